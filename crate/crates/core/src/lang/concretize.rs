//! Mapping abstract repairs back to source text.

use super::abstraction::{
    is_abstract_tag, is_literal_tag, literal_tag, string_tag_formats, AbstractToken, AbstractedLine, INVALID,
};
use super::lexer::{indentation, needs_space};
use super::symbols::{Position, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConcretizeError {
    #[error("no symbol in scope for {0}")]
    NoSymbol(String),
    #[error("cannot concretize tag {0}")]
    Unsupported(String),
}

fn zero_literal(tag: &str) -> Option<String> {
    match tag {
        "LITERAL_INT" => Some("0".into()),
        "LITERAL_FLOAT" => Some("0.0".into()),
        "LITERAL_CHAR" => Some("'\\0'".into()),
        _ if tag.starts_with("LITERAL_STRING") => {
            let specs: Vec<&str> = string_tag_formats(tag)
                .into_iter()
                .map(|f| match f {
                    "INT" => "%d",
                    "FLOAT" => "%f",
                    "CHAR" => "%c",
                    _ => "%s",
                })
                .collect();
            Some(format!("\"{}\"", specs.join(" ")))
        }
        _ => None,
    }
}

/// Chooses a lexeme for an inserted abstract tag at the repair position
/// `at` (the start of the repair line).
///
/// Variables: the visible symbol of matching type with the latest
/// occurrence on or before the repair line, ties going to the inner scope.
/// Literals: the latest matching literal, else the type's zero literal.
pub fn concretize_token(tag: &str, table: &SymbolTable, at: Position) -> Result<String, ConcretizeError> {
    if !is_abstract_tag(tag) {
        return Ok(tag.to_string());
    }
    if tag == INVALID || !tag.chars().any(|c| c == '_') {
        return Err(ConcretizeError::Unsupported(tag.to_string()));
    }
    let limit = at.line;
    if is_literal_tag(tag) {
        let best = table
            .visible_literals(at)
            .into_iter()
            .filter(|(lit, _)| lit.pos.line <= limit)
            .filter(|(lit, _)| {
                let probe = super::lexer::ConcreteToken { lexeme: lit.lexeme.clone(), kind: lit.kind, column: 0 };
                literal_tag(&probe).as_deref() == Some(tag)
            })
            .max_by_key(|(lit, depth)| (lit.pos.line, *depth, lit.pos.column));
        return match best {
            Some((lit, _)) => Ok(lit.lexeme.clone()),
            None => zero_literal(tag).ok_or_else(|| ConcretizeError::Unsupported(tag.into())),
        };
    }
    table
        .visible(at, Position::end_of_line(limit))
        .into_iter()
        .filter(|v| v.symbol.ty.tag() == tag)
        .filter_map(|v| {
            let last = v.symbol.occurrences.iter().filter(|p| p.line <= limit).max()?;
            Some(((last.line, v.depth, last.column), v.symbol.name.clone()))
        })
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, name)| name)
        .ok_or_else(|| ConcretizeError::NoSymbol(tag.to_string()))
}

/// Renders an abstract repaired line as concrete text.
///
/// Tokens that come from the source keep their lexeme; inserted tokens are
/// concretized. Original spacing is kept between source tokens that stay
/// adjacent, and the original indentation is preserved.
pub fn concretize_line(
    repaired: &[AbstractToken],
    source: &AbstractedLine,
    table: &SymbolTable,
) -> Result<String, ConcretizeError> {
    let first_col = source.concrete.first().map(|t| t.column).unwrap_or(0);
    let at = Position::new(source.line, first_col);
    let mut lexemes = Vec::with_capacity(repaired.len());
    for tok in repaired {
        let lexeme = match tok.origin {
            Some(o) if o < source.concrete.len() && source.tokens[o].tag == tok.tag => {
                source.concrete[o].lexeme.clone()
            }
            _ => concretize_token(&tok.tag, table, at)?,
        };
        lexemes.push(lexeme);
    }
    let chars: Vec<char> = source.text.chars().collect();
    let mut out = String::from(indentation(&source.text));
    for (i, lexeme) in lexemes.iter().enumerate() {
        if i > 0 {
            let prev = &repaired[i - 1];
            let gap = match (prev.origin, repaired[i].origin) {
                (Some(a), Some(b)) if b == a + 1 && b < source.concrete.len() => {
                    let start = source.concrete[a].column + source.concrete[a].lexeme.chars().count();
                    let end = source.concrete[b].column;
                    Some(chars.get(start..end).map(|s| s.iter().collect::<String>()).unwrap_or_default())
                }
                _ => None,
            };
            match gap {
                Some(g) if !(g.is_empty() && needs_space(&lexemes[i - 1], lexeme)) => out.push_str(&g),
                _ => {
                    let prev_lex = lexemes[i - 1].as_str();
                    if needs_space(prev_lex, lexeme) || ((prev_lex == "," || prev_lex == ";") && lexeme != ")") {
                        out.push(' ');
                    }
                }
            }
        }
        out.push_str(lexeme);
    }
    Ok(out)
}
