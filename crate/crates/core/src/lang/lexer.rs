//! Line-oriented lexer for the supported C subset.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    FloatLiteral,
    CharLiteral,
    StringLiteral,
    Punctuation,
    Operator,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::IntLiteral | TokenKind::FloatLiteral | TokenKind::CharLiteral | TokenKind::StringLiteral
        )
    }
}

/// A lexeme as it appears in the source line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcreteToken {
    pub lexeme: String,
    pub kind: TokenKind,
    /// 0-based character offset within the line.
    pub column: usize,
}

impl ConcreteToken {
    pub fn is(&self, lexeme: &str) -> bool {
        self.lexeme == lexeme
    }
}

impl fmt::Display for ConcreteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexeme)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("unterminated string literal starting at column {0}")]
    UnterminatedString(usize),
    #[error("unterminated character literal starting at column {0}")]
    UnterminatedChar(usize),
    #[error("line contains an embedded newline")]
    EmbeddedNewline,
}

impl LexError {
    pub fn column(&self) -> Option<usize> {
        match self {
            LexError::UnterminatedString(c) | LexError::UnterminatedChar(c) => Some(*c),
            LexError::EmbeddedNewline => None,
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "int", "long", "register", "return", "short", "signed", "sizeof", "static", "struct",
    "switch", "typedef", "union", "unsigned", "void", "volatile", "while",
];

const OPERATORS_3: &[&str] = &["<<=", ">>=", "..."];
const OPERATORS_2: &[&str] =
    &["->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^="];
const OPERATORS_1: &str = "+-*/%<>=!&|^~?:.";
const PUNCTUATION: &str = "()[]{};,";

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Splits one source line into tokens using maximal munch.
///
/// Comments (`// ...` and single-line `/* ... */`) are skipped like
/// whitespace. Characters outside the C alphabet become single-character
/// punctuation tokens so that malformed input still lexes.
pub fn tokenize(line: &str) -> Result<Vec<ConcreteToken>, LexError> {
    if line.contains('\n') {
        return Err(LexError::EmbeddedNewline);
    }
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            break;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let mut j = i + 2;
            while j + 1 < chars.len() && !(chars[j] == '*' && chars[j + 1] == '/') {
                j += 1;
            }
            i = if j + 1 < chars.len() { j + 2 } else { chars.len() };
            continue;
        }
        let start = i;
        let kind;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            kind = if is_keyword(&word) { TokenKind::Keyword } else { TokenKind::Identifier };
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let (end, is_float) = lex_number(&chars, i);
            i = end;
            kind = if is_float { TokenKind::FloatLiteral } else { TokenKind::IntLiteral };
        } else if c == '"' || c == '\'' {
            i = lex_quoted(&chars, i).ok_or(if c == '"' {
                LexError::UnterminatedString(start)
            } else {
                LexError::UnterminatedChar(start)
            })?;
            kind = if c == '"' { TokenKind::StringLiteral } else { TokenKind::CharLiteral };
        } else if let Some(len) = match_operator(&chars[i..]) {
            i += len;
            kind = TokenKind::Operator;
        } else {
            i += 1;
            kind = TokenKind::Punctuation;
        }
        tokens.push(ConcreteToken { lexeme: chars[start..i].iter().collect(), kind, column: start });
    }
    Ok(tokens)
}

fn lex_number(chars: &[char], start: usize) -> (usize, bool) {
    let mut i = start;
    let mut is_float = false;
    if chars[i] == '0' && matches!(chars.get(i + 1), Some('x') | Some('X')) {
        i += 2;
        while i < chars.len() && chars[i].is_ascii_hexdigit() {
            i += 1;
        }
    } else {
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if i < chars.len() && chars[i] == '.' {
            is_float = true;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
            let mut j = i + 1;
            if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                j += 1;
            }
            if j < chars.len() && chars[j].is_ascii_digit() {
                is_float = true;
                i = j;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
    }
    while i < chars.len() && matches!(chars[i], 'u' | 'U' | 'l' | 'L' | 'f' | 'F') {
        if matches!(chars[i], 'f' | 'F') {
            is_float = true;
        }
        i += 1;
    }
    (i, is_float)
}

fn lex_quoted(chars: &[char], start: usize) -> Option<usize> {
    let quote = chars[start];
    let mut i = start + 1;
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            c if c == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn match_operator(rest: &[char]) -> Option<usize> {
    let starts = |op: &str| op.chars().zip(rest.iter()).filter(|(a, b)| a == *b).count() == op.len();
    if OPERATORS_3.iter().any(|op| starts(op)) {
        return Some(3);
    }
    if OPERATORS_2.iter().any(|op| starts(op)) {
        return Some(2);
    }
    if OPERATORS_1.contains(rest[0]) && !PUNCTUATION.contains(rest[0]) {
        return Some(1);
    }
    None
}

/// True when `a` immediately followed by `b` would not lex back into the two
/// tokens `a`, `b`.
pub fn needs_space(a: &str, b: &str) -> bool {
    let joined = format!("{a}{b}");
    match tokenize(&joined) {
        Ok(toks) => !(toks.len() == 2 && toks[0].lexeme == a && toks[1].lexeme == b),
        Err(_) => true,
    }
}

/// Renders lexemes with the minimum spacing needed to re-lex identically,
/// plus a space after `,` and `;` and around word-like neighbours.
pub fn render_lexemes<S: AsRef<str>>(lexemes: &[S]) -> String {
    let mut out = String::new();
    for (idx, lex) in lexemes.iter().enumerate() {
        let lex = lex.as_ref();
        if idx > 0 {
            let prev = lexemes[idx - 1].as_ref();
            if needs_space(prev, lex) || ((prev == "," || prev == ";") && lex != ")") {
                out.push(' ');
            }
        }
        out.push_str(lex);
    }
    out
}

pub fn render(tokens: &[ConcreteToken]) -> String {
    let lexemes: Vec<&str> = tokens.iter().map(|t| t.lexeme.as_str()).collect();
    render_lexemes(&lexemes)
}

/// Leading whitespace of a line, reused when a repaired line is written back.
pub fn indentation(line: &str) -> &str {
    let trimmed = line.trim_start();
    &line[..line.len() - trimmed.len()]
}
