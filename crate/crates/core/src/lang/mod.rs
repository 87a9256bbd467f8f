//! Lexing, symbol tables, abstraction and concretization.

pub mod abstraction;
pub mod concretize;
pub mod lexer;
pub mod symbols;

pub use abstraction::{abstract_line, abstract_program_line, AbstractToken, AbstractedLine, EOL, INVALID, UNK};
pub use concretize::{concretize_line, concretize_token, ConcretizeError};
pub use lexer::{tokenize, ConcreteToken, LexError, TokenKind};
pub use symbols::{build_symbol_table, CType, Position, SymbolTable};
