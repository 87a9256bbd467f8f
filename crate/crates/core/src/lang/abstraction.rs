//! Abstraction of concrete tokens into type-tagged tokens.

use super::lexer::{tokenize, ConcreteToken, LexError, TokenKind};
use super::symbols::{Position, SymbolTable};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const INVALID: &str = "INVALID";
pub const UNK: &str = "UNK";
pub const EOL: &str = "<EOL>";

/// Library names kept verbatim: they are never declared by the program
/// but are not errors either.
pub const BUILTINS: &[&str] = &[
    "printf", "scanf", "puts", "putchar", "getchar", "gets", "fgets", "sprintf", "sscanf", "fprintf", "stdin",
    "stdout", "stderr", "sqrt", "pow", "abs", "fabs", "floor", "ceil", "exp", "log", "sin", "cos", "tan", "strlen",
    "strcmp", "strcpy", "strcat", "strncpy", "strncmp", "malloc", "calloc", "realloc", "free", "exit", "NULL", "EOF",
    "memset", "memcpy", "isdigit", "isalpha", "isspace", "toupper", "tolower", "atoi", "rand", "srand",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbstractToken {
    pub tag: String,
    /// Index of the concrete token this abstracts; `None` for tokens that
    /// were inserted by a repair.
    pub origin: Option<usize>,
}

impl AbstractToken {
    pub fn new(tag: impl Into<String>, origin: Option<usize>) -> Self {
        AbstractToken { tag: tag.into(), origin }
    }

    pub fn inserted(tag: impl Into<String>) -> Self {
        Self::new(tag, None)
    }
}

impl fmt::Display for AbstractToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractedLine {
    pub tokens: Vec<AbstractToken>,
    pub concrete: Vec<ConcreteToken>,
    pub line: usize,
    /// The raw source text, used to preserve spacing on concretization.
    pub text: String,
}

impl AbstractedLine {
    pub fn tags(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.tag.clone()).collect()
    }

    pub fn tag_refs(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.tag.as_str()).collect()
    }

    pub fn joined(&self) -> String {
        self.tag_refs().join(" ")
    }
}

/// True for tags produced by abstraction, as opposed to verbatim lexemes.
pub fn is_abstract_tag(tag: &str) -> bool {
    if tag == INVALID || tag == UNK {
        return true;
    }
    let prefixed = ["VARIABLE_", "POINTER_", "ARRAY_", "FUNCTION_", "LITERAL_"].iter().any(|p| tag.starts_with(p));
    prefixed && tag.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

pub fn is_variable_tag(tag: &str) -> bool {
    is_abstract_tag(tag) && !tag.starts_with("LITERAL_") && tag != INVALID && tag != UNK
}

pub fn is_literal_tag(tag: &str) -> bool {
    tag.starts_with("LITERAL_") && is_abstract_tag(tag)
}

/// Conversion classes of printf-style specifiers in a string literal, in
/// order, including repeats.
pub fn format_specifiers(literal: &str) -> Vec<&'static str> {
    let chars: Vec<char> = literal.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '%' {
            i += 1;
            continue;
        }
        i += 1;
        if chars.get(i) == Some(&'%') {
            i += 1;
            continue;
        }
        while i < chars.len() && "-+ #0123456789.*hlLqjzt".contains(chars[i]) {
            i += 1;
        }
        if let Some(&c) = chars.get(i) {
            let class = match c {
                'd' | 'i' | 'u' | 'o' | 'x' | 'X' => Some("INT"),
                'f' | 'F' | 'e' | 'E' | 'g' | 'G' | 'a' | 'A' => Some("FLOAT"),
                'c' => Some("CHAR"),
                's' => Some("STR"),
                _ => None,
            };
            if let Some(class) = class {
                out.push(class);
                i += 1;
            }
        }
    }
    out
}

pub fn string_tag(literal: &str) -> String {
    let mut tag = String::from("LITERAL_STRING");
    for spec in format_specifiers(literal) {
        tag.push_str("_FMT_");
        tag.push_str(spec);
    }
    tag
}

/// The format classes encoded in a string tag, in order.
pub fn string_tag_formats(tag: &str) -> Vec<&str> {
    tag.strip_prefix("LITERAL_STRING")
        .map(|rest| rest.split("_FMT_").filter(|s| !s.is_empty()).collect())
        .unwrap_or_default()
}

pub fn literal_tag(token: &ConcreteToken) -> Option<String> {
    Some(match token.kind {
        TokenKind::IntLiteral => "LITERAL_INT".into(),
        TokenKind::FloatLiteral => "LITERAL_FLOAT".into(),
        TokenKind::CharLiteral => "LITERAL_CHAR".into(),
        TokenKind::StringLiteral => string_tag(&token.lexeme),
        _ => return None,
    })
}

fn abstract_token(token: &ConcreteToken, table: &SymbolTable, line: usize) -> String {
    if let Some(tag) = literal_tag(token) {
        return tag;
    }
    if token.kind != TokenKind::Identifier {
        return token.lexeme.clone();
    }
    if is_abstract_tag(&token.lexeme) || is_builtin(&token.lexeme) {
        return token.lexeme.clone();
    }
    match table.lookup(&token.lexeme, Position::new(line, token.column)) {
        Some(sym) => sym.ty.tag(),
        None => INVALID.into(),
    }
}

/// Abstracts one tokenized line at index `line` of the program described
/// by `table`.
pub fn abstract_line(tokens: &[ConcreteToken], table: &SymbolTable, line: usize) -> AbstractedLine {
    let abstracted = tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| AbstractToken::new(abstract_token(tok, table, line), Some(i)))
        .collect();
    let mut text = String::new();
    for tok in tokens {
        while text.chars().count() < tok.column {
            text.push(' ');
        }
        text.push_str(&tok.lexeme);
    }
    AbstractedLine { tokens: abstracted, concrete: tokens.to_vec(), line, text }
}

/// Tokenizes and abstracts line `line` of `program`, keeping the raw text.
pub fn abstract_program_line<S: AsRef<str>>(
    program: &[S],
    table: &SymbolTable,
    line: usize,
) -> Result<AbstractedLine, LexError> {
    let text = program.get(line).map(|s| s.as_ref()).unwrap_or("");
    let tokens = tokenize(text)?;
    let mut out = abstract_line(&tokens, table, line);
    out.text = text.to_string();
    Ok(out)
}

/// Abstract tags of a whitespace-separated abstract line, as written in
/// tests and logs.
pub fn tags_of(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}
