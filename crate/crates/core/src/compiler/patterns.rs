//! Message pattern table mapping diagnostic text to error ids.

use crate::error::{Error, Result};
use regex::{Regex, RegexBuilder};

pub const E_UNK: &str = "E_UNK";

/// Placeholder standing for any program-specific text in a pattern.
pub const HOLE: char = '□';

/// Built-in table, tried top to bottom. Specific "expected" forms come
/// before the generic ones they would otherwise be swallowed by.
pub const DEFAULT_PATTERNS: &str = "\
E1\texpected □ after expression
E1\texpected □ at end of declaration
E1\texpected □ at end of declaration list
E6\texpected □ in □ statement specifier
E6\texpected □ after do/while statement
E6\texpected □ after 'case'
E23\texpected □ after return statement
E2\tuse of undeclared identifier □
E10\texpression is not assignable
E57\tunknown type name □
E76\tnon-object type □ is not assignable
E98\tvariable has incomplete type □
E148\tparameter named □ is missing
E5\t□ statement not in loop or switch statement
E5\t□ statement not in loop statement
E8\textraneous closing brace □
E3\textraneous □
E3\texpected expression
E9\tmissing terminating □ character
E12\tredefinition of □
E14\tcalled object type □ is not a function or function pointer
E15\ttoo few arguments to function call, □
E16\ttoo many arguments to function call, □
E17\tsubscripted value is not an array, pointer, or vector
E18\tinvalid operands to binary expression □
E4\texpected □ after □
E3\texpected □
";

#[derive(Debug, Clone)]
pub struct PatternTable {
    entries: Vec<(String, Regex, String)>,
}

impl Default for PatternTable {
    fn default() -> Self {
        Self::parse(DEFAULT_PATTERNS).expect("built-in pattern table parses")
    }
}

fn compile_pattern(pattern: &str) -> Result<Regex> {
    let mut re = String::from("^");
    for (i, piece) in pattern.split(HOLE).enumerate() {
        if i > 0 {
            re.push_str(".+?");
        }
        re.push_str(&regex::escape(piece));
    }
    re.push('$');
    RegexBuilder::new(&re)
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::Invalid(format!("bad pattern {pattern:?}: {e}")))
}

impl PatternTable {
    /// Parses `<errorID>\t<pattern>` lines; blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, pattern) =
                line.split_once('\t').ok_or_else(|| Error::Invalid(format!("pattern line {}: missing tab", n + 1)))?;
            entries.push((id.trim().to_string(), compile_pattern(pattern.trim())?, pattern.to_string()));
        }
        Ok(PatternTable { entries })
    }

    /// Error id of the first matching pattern, or [`E_UNK`].
    pub fn classify(&self, message: &str) -> String {
        let message = message.trim();
        self.entries
            .iter()
            .find(|(_, re, _)| re.is_match(message))
            .map(|(id, _, _)| id.clone())
            .unwrap_or_else(|| E_UNK.to_string())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(id, _, p)| format!("{id}\t{p}\n")).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
