//! Built-in diagnostic engine for the C subset.
//!
//! A recursive-descent parser with error recovery modelled on clang's: it
//! reports the same message texts for the common syntax mistakes and the
//! few semantic checks that matter here (undeclared identifiers,
//! assignability, stray `break`/`continue`, redefinitions). Messages go
//! through the same pattern table as external compiler output.

use super::{BridgeError, Compiler, Diagnostic, PatternTable};
use crate::lang::abstraction::is_builtin;
use crate::lang::lexer::{tokenize, TokenKind};
use std::collections::HashSet;

#[derive(Debug, Clone, Default)]
pub struct MockCompiler {
    pub patterns: PatternTable,
}

impl Compiler for MockCompiler {
    fn compile(&self, program: &[String]) -> Result<Vec<Diagnostic>, BridgeError> {
        Ok(check_program(program, &self.patterns))
    }
}

/// Raw (line, message) diagnostics in discovery order.
pub fn raw_messages<S: AsRef<str>>(program: &[S]) -> Vec<(usize, String)> {
    let mut toks = Vec::new();
    let mut lex_errors = Vec::new();
    for (line, text) in program.iter().enumerate() {
        match tokenize(text.as_ref()) {
            Ok(ts) => toks.extend(ts.into_iter().map(|t| Tok { text: t.lexeme, kind: t.kind, line })),
            Err(e) => {
                let quote = match e {
                    crate::lang::LexError::UnterminatedChar(_) => '\'',
                    _ => '"',
                };
                lex_errors.push((line, format!("missing terminating {quote} character")));
            }
        }
    }
    let mut p = Parser { toks, pos: 0, out: lex_errors, scopes: vec![HashSet::new()], loops: 0, switches: 0 };
    p.program();
    p.out.sort_by_key(|(line, _)| *line);
    p.out
}

pub fn check_program<S: AsRef<str>>(program: &[S], patterns: &PatternTable) -> Vec<Diagnostic> {
    let n = program.len();
    raw_messages(program)
        .into_iter()
        .map(|(line, message)| Diagnostic {
            error_id: patterns.classify(&message),
            line: line.min(n.saturating_sub(1)),
            message,
        })
        .collect()
}

struct Tok {
    text: String,
    kind: TokenKind,
    line: usize,
}

/// Marker for an expression that already reported an error.
struct Failed;

type PResult<T> = Result<T, Failed>;

const TYPE_WORDS: &[&str] = &[
    "int", "char", "float", "double", "void", "long", "short", "unsigned", "signed", "const", "static", "volatile",
    "register", "extern", "auto",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" => 7,
        "<<" | ">>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    out: Vec<(usize, String)>,
    scopes: Vec<HashSet<String>>,
    loops: usize,
    switches: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn at(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.text == s)
    }

    fn eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here_line(&self) -> usize {
        self.peek().or_else(|| self.toks.last()).map(|t| t.line).unwrap_or(0)
    }

    fn prev_line(&self) -> usize {
        self.pos.checked_sub(1).and_then(|i| self.toks.get(i)).map(|t| t.line).unwrap_or_else(|| self.here_line())
    }

    fn error_here(&mut self, msg: impl Into<String>) {
        let line = self.here_line();
        self.out.push((line, msg.into()));
    }

    fn error_after(&mut self, msg: impl Into<String>) {
        let line = self.prev_line();
        self.out.push((line, msg.into()));
    }

    fn declared(&self, name: &str) -> bool {
        is_builtin(name) || self.scopes.iter().rev().any(|s| s.contains(name))
    }

    fn declare(&mut self, name: &str, line: usize) {
        let global = self.scopes.len() == 1;
        let scope = self.scopes.last_mut().unwrap();
        // repeated file-scope declarations are tentative definitions
        if !scope.insert(name.to_string()) && !global {
            self.out.push((line, format!("redefinition of '{name}'")));
        }
    }

    fn starts_type(&self) -> bool {
        match self.peek() {
            Some(t) if TYPE_WORDS.contains(&t.text.as_str()) => true,
            Some(t) if t.text == "struct" || t.text == "union" || t.text == "enum" => true,
            _ => false,
        }
    }

    /// Expects a terminating `;`. A `:` in its place is taken as a typo and
    /// consumed; anything else is left for the next statement.
    fn expect_semi(&mut self, msg: &str) {
        if self.eat(";") {
            return;
        }
        if self.at(":") {
            self.error_here(msg);
            self.bump();
            return;
        }
        self.error_after(msg);
    }

    /// Skips to the end of the current statement: past a `;` at nesting
    /// depth 0, or up to a brace.
    fn skip_statement(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                "(" | "[" => depth += 1,
                ")" | "]" => depth -= 1,
                ";" if depth <= 0 => {
                    self.bump();
                    return;
                }
                "{" | "}" if depth <= 0 => return,
                _ => {}
            }
            self.bump();
        }
    }

    /// Skips past the `)` closing an already opened parenthesis, stopping
    /// early (without consuming) at `;` or a brace.
    fn skip_to_close_paren(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                "(" | "[" => depth += 1,
                ")" | "]" if depth > 0 => depth -= 1,
                ")" => {
                    self.bump();
                    return;
                }
                ";" | "{" | "}" => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn program(&mut self) {
        while !self.eof() {
            if self.at("}") {
                self.error_here("extraneous closing brace ('}')");
                self.bump();
            } else if self.eat(";") {
            } else if self.starts_type() {
                self.external_declaration();
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.peek_at(1).is_some_and(|t| ["=", ";", ",", "["].contains(&t.text.as_str()))
            {
                // file-scope declaration with the type left out defaults to int
                self.declarators(true);
            } else if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
            {
                let name = self.peek().unwrap().text.clone();
                self.error_here(format!("unknown type name '{name}'"));
                self.bump();
                self.declarators(true);
            } else {
                self.error_here("expected identifier or '('");
                self.skip_statement();
                if self.at("{") {
                    self.skip_braces();
                }
            }
        }
    }

    fn skip_braces(&mut self) {
        let mut depth = 0;
        while let Some(t) = self.bump() {
            match t.text.as_str() {
                "{" => depth += 1,
                "}" => {
                    depth -= 1;
                    if depth <= 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }

    /// Consumes declaration specifiers. Returns false if there were none.
    fn specifiers(&mut self) -> bool {
        let mut any = false;
        loop {
            if self.peek().is_some_and(|t| TYPE_WORDS.contains(&t.text.as_str())) {
                self.bump();
                any = true;
            } else if self.at("struct") || self.at("union") || self.at("enum") {
                self.bump();
                any = true;
                if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
                    self.bump();
                }
                if self.at("{") {
                    self.struct_body();
                }
            } else {
                return any;
            }
        }
    }

    fn struct_body(&mut self) {
        self.bump();
        self.scopes.push(HashSet::new());
        while !self.eof() && !self.at("}") {
            if self.starts_type() {
                self.specifiers();
                self.declarators(true);
            } else {
                self.error_here("type name requires a specifier or qualifier");
                self.skip_statement();
            }
        }
        self.scopes.pop();
        if !self.eat("}") {
            self.error_here("expected '}'");
        }
    }

    fn external_declaration(&mut self) {
        self.specifiers();
        if self.eat(";") {
            return;
        }
        let save = self.pos;
        while self.eat("*") {}
        let is_function = self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(1).is_some_and(|t| t.text == "(");
        if !is_function {
            self.pos = save;
            self.declarators(true);
            return;
        }
        let name = self.bump().unwrap().text.clone();
        // prototypes and definitions may repeat a function name
        self.scopes[0].insert(name);
        self.bump();
        let params = self.parameters();
        if self.at("{") {
            self.scopes.push(HashSet::new());
            for (p, line) in params {
                self.declare(&p, line);
            }
            self.compound_body();
            self.scopes.pop();
        } else {
            self.expect_semi("expected ';' after top level declarator");
        }
    }

    /// Parameter list after the opening parenthesis; consumes the `)`.
    fn parameters(&mut self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        if self.eat(")") {
            return out;
        }
        loop {
            if !self.specifiers() {
                if self.eat("...") {
                } else {
                    self.error_here("expected parameter declarator");
                    self.skip_to_close_paren();
                    return out;
                }
            }
            while self.eat("*") {}
            if let Some(t) = self.peek().filter(|t| t.kind == TokenKind::Identifier) {
                out.push((t.text.clone(), t.line));
                self.bump();
            }
            while self.at("[") {
                self.bump();
                if !self.at("]") && self.assignment().is_err() {
                    self.skip_to_close_paren();
                    return out;
                }
                if !self.eat("]") {
                    self.error_here("expected ']'");
                }
            }
            if self.eat(",") {
                continue;
            }
            if !self.eat(")") {
                self.error_here("expected ')'");
                self.skip_to_close_paren();
            }
            return out;
        }
    }

    /// `declarator (= init)? (, declarator (= init)?)* ;` after the
    /// specifiers.
    fn declarators(&mut self, require_semi: bool) {
        loop {
            while self.eat("*") {}
            let Some(t) = self.peek().filter(|t| t.kind == TokenKind::Identifier) else {
                self.error_here("expected identifier or '('");
                self.skip_statement();
                return;
            };
            let (name, line) = (t.text.clone(), t.line);
            self.bump();
            while self.at("[") {
                self.bump();
                if !self.at("]") && self.assignment().is_err() {
                    self.skip_statement();
                    self.declare(&name, line);
                    return;
                }
                if !self.eat("]") {
                    self.error_here("expected ']'");
                }
            }
            self.declare(&name, line);
            if self.eat("=") {
                let ok = if self.at("{") { self.initializer_list() } else { self.assignment().map(|_| ()) };
                if ok.is_err() {
                    self.skip_statement();
                    return;
                }
            }
            if self.eat(",") {
                continue;
            }
            if require_semi {
                self.expect_semi("expected ';' at end of declaration");
            }
            return;
        }
    }

    fn initializer_list(&mut self) -> PResult<()> {
        self.bump();
        while !self.at("}") {
            if self.at("{") {
                self.initializer_list()?;
            } else {
                self.assignment()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        if !self.eat("}") {
            self.error_here("expected '}'");
            return Err(Failed);
        }
        Ok(())
    }

    /// Statements up to and including the closing brace; the opening brace
    /// is at the cursor. The caller owns the scope.
    fn compound_body(&mut self) {
        self.bump();
        loop {
            if self.eat("}") {
                return;
            }
            if self.eof() {
                self.error_after("expected '}'");
                return;
            }
            self.statement();
        }
    }

    fn statement(&mut self) {
        let Some(tok) = self.peek() else { return };
        let text = tok.text.clone();
        match text.as_str() {
            "{" => {
                self.scopes.push(HashSet::new());
                self.compound_body();
                self.scopes.pop();
            }
            "if" => {
                self.bump();
                self.condition("if");
                self.statement();
                if self.eat("else") {
                    self.statement();
                }
            }
            "while" => {
                self.bump();
                self.condition("while");
                self.loops += 1;
                self.statement();
                self.loops -= 1;
            }
            "switch" => {
                self.bump();
                self.condition("switch");
                self.switches += 1;
                self.statement();
                self.switches -= 1;
            }
            "do" => {
                self.bump();
                self.loops += 1;
                self.statement();
                self.loops -= 1;
                if !self.eat("while") {
                    self.error_here("expected 'while' in do/while loop");
                    self.skip_statement();
                    return;
                }
                self.condition("while");
                self.expect_semi("expected ';' after do/while statement");
            }
            "for" => self.for_statement(),
            "case" => {
                self.bump();
                if self.conditional().is_err() {
                    self.skip_statement();
                    return;
                }
                if !self.eat(":") {
                    self.error_here("expected ':' after 'case'");
                    self.eat(";");
                }
            }
            "default" => {
                self.bump();
                if !self.eat(":") {
                    self.error_here("expected ':' after 'default'");
                    self.eat(";");
                }
            }
            "return" => {
                self.bump();
                if !self.at(";") && self.expression().is_err() {
                    self.skip_statement();
                    return;
                }
                self.expect_semi("expected ';' after return statement");
            }
            "break" | "continue" => {
                self.bump();
                if text == "break" && self.loops + self.switches == 0 {
                    self.error_after("'break' statement not in loop or switch statement");
                } else if text == "continue" && self.loops == 0 {
                    self.error_after("'continue' statement not in loop statement");
                }
                self.expect_semi(&format!("expected ';' after {text} statement"));
            }
            ";" => {
                self.bump();
            }
            "}" => {
                // only reachable when a statement is required right before a
                // closing brace, e.g. `if (x) }`
                self.error_here("expected statement");
            }
            _ if self.starts_type() => {
                self.specifiers();
                if self.eat(";") {
                    return;
                }
                self.declarators(true);
            }
            _ if tok.kind == TokenKind::Identifier
                && !self.declared(&text)
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) =>
            {
                self.error_here(format!("unknown type name '{text}'"));
                self.bump();
                self.declarators(true);
            }
            _ => {
                if self.expression().is_err() {
                    self.skip_statement();
                    return;
                }
                self.expect_semi("expected ';' after expression");
            }
        }
    }

    /// `( expr )` after a control keyword.
    fn condition(&mut self, keyword: &str) {
        if !self.eat("(") {
            self.error_after(format!("expected '(' after '{keyword}'"));
            self.skip_to_close_paren();
            return;
        }
        if self.expression().is_err() {
            self.skip_to_close_paren();
            return;
        }
        if self.eat(")") {
            if self.at(")") {
                self.error_here("extraneous ')' after condition, expected a statement");
                while self.eat(")") {}
            }
        } else {
            self.error_here("expected ')'");
        }
    }

    fn for_statement(&mut self) {
        self.bump();
        if !self.eat("(") {
            self.error_after("expected '(' after 'for'");
            self.skip_statement();
            return;
        }
        self.scopes.push(HashSet::new());
        let missing_semi = "expected ';' in 'for' statement specifier";
        let mut broken = false;
        if self.starts_type() {
            self.specifiers();
            self.declarators(false);
            if !self.eat(";") {
                self.error_after(missing_semi);
            }
        } else if self.eat(";") {
        } else {
            broken = self.expression().is_err();
            if broken {
                self.skip_to_close_paren();
            } else if !self.eat(";") {
                self.error_after(missing_semi);
            }
        }
        if !broken && !self.at(";") && !self.at(")") {
            broken = self.expression().is_err();
            if broken {
                self.skip_to_close_paren();
            }
        }
        if !broken {
            if !self.eat(";") {
                self.error_after(missing_semi);
            }
            if !self.at(")") && self.expression().is_err() {
                self.skip_to_close_paren();
                broken = true;
            }
        }
        if !broken && !self.eat(")") {
            self.error_here("expected ')'");
            self.skip_to_close_paren();
        }
        self.loops += 1;
        self.statement();
        self.loops -= 1;
        self.scopes.pop();
    }

    fn expression(&mut self) -> PResult<()> {
        self.assignment()?;
        while self.eat(",") {
            self.assignment()?;
        }
        Ok(())
    }

    /// Returns whether the parsed expression is assignable.
    fn assignment(&mut self) -> PResult<bool> {
        let lhs = self.conditional()?;
        if let Some(op) = self.peek().map(|t| t.text.clone()) {
            if ASSIGN_OPS.contains(&op.as_str()) {
                if !lhs {
                    self.error_here("expression is not assignable");
                }
                self.bump();
                self.assignment()?;
                return Ok(false);
            }
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> PResult<bool> {
        let cond = self.binary(1)?;
        if self.eat("?") {
            self.expression()?;
            if !self.eat(":") {
                self.error_here("expected ':'");
                return Err(Failed);
            }
            self.conditional()?;
            return Ok(false);
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<bool> {
        let mut lhs = self.unary()?;
        while let Some(prec) = self.peek().and_then(|t| binary_precedence(&t.text)) {
            if prec < min_prec {
                break;
            }
            self.bump();
            self.binary(prec + 1)?;
            lhs = false;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<bool> {
        let Some(text) = self.peek().map(|t| t.text.clone()) else {
            self.error_after("expected expression");
            return Err(Failed);
        };
        match text.as_str() {
            "++" | "--" => {
                self.bump();
                if !self.unary()? {
                    self.error_here("expression is not assignable");
                }
                Ok(false)
            }
            "-" | "+" | "!" | "~" | "&" => {
                self.bump();
                self.unary()?;
                Ok(false)
            }
            "*" => {
                self.bump();
                self.unary()?;
                Ok(true)
            }
            "sizeof" => {
                self.bump();
                if self.at("(") && self.is_type_at(1) {
                    self.bump();
                    self.type_name();
                    if !self.eat(")") {
                        self.error_here("expected ')'");
                        return Err(Failed);
                    }
                } else {
                    self.unary()?;
                }
                Ok(false)
            }
            "(" if self.is_type_at(1) => {
                self.bump();
                self.type_name();
                if !self.eat(")") {
                    self.error_here("expected ')'");
                    return Err(Failed);
                }
                self.unary()?;
                Ok(false)
            }
            _ => self.postfix(),
        }
    }

    fn is_type_at(&self, k: usize) -> bool {
        self.peek_at(k).is_some_and(|t| {
            TYPE_WORDS.contains(&t.text.as_str()) || t.text == "struct" || t.text == "union" || t.text == "enum"
        })
    }

    fn type_name(&mut self) {
        self.specifiers();
        while self.eat("*") {}
    }

    fn postfix(&mut self) -> PResult<bool> {
        let mut assignable = self.primary()?;
        loop {
            if self.eat("[") {
                self.expression()?;
                if !self.eat("]") {
                    self.error_here("expected ']'");
                    return Err(Failed);
                }
                assignable = true;
            } else if self.eat("(") {
                self.call_arguments()?;
                assignable = false;
            } else if self.at(".") || self.at("->") {
                self.bump();
                if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
                    self.bump();
                } else {
                    self.error_here("expected identifier");
                    return Err(Failed);
                }
                assignable = true;
            } else if self.at("++") || self.at("--") {
                if !assignable {
                    self.error_here("expression is not assignable");
                }
                self.bump();
                assignable = false;
            } else {
                return Ok(assignable);
            }
        }
    }

    /// Arguments after the opening parenthesis; consumes the `)`.
    fn call_arguments(&mut self) -> PResult<()> {
        if self.eat(")") {
            return Ok(());
        }
        loop {
            self.assignment()?;
            if self.eat(",") {
                continue;
            }
            if self.eat(")") {
                return Ok(());
            }
            self.error_here("expected ')'");
            return Err(Failed);
        }
    }

    fn primary(&mut self) -> PResult<bool> {
        let Some(tok) = self.peek() else {
            self.error_after("expected expression");
            return Err(Failed);
        };
        match tok.kind {
            TokenKind::Identifier => {
                let name = tok.text.clone();
                let called = self.peek_at(1).is_some_and(|t| t.text == "(");
                if !called && !self.declared(&name) {
                    self.error_here(format!("use of undeclared identifier '{name}'"));
                }
                self.bump();
                Ok(!called)
            }
            kind if kind.is_literal() => {
                self.bump();
                while self.peek().is_some_and(|t| t.kind == TokenKind::StringLiteral) {
                    self.bump();
                }
                Ok(false)
            }
            _ if tok.text == "(" => {
                self.bump();
                let inner = self.expression_value()?;
                if !self.eat(")") {
                    self.error_here("expected ')'");
                    return Err(Failed);
                }
                Ok(inner)
            }
            _ => {
                self.error_here("expected expression");
                Err(Failed)
            }
        }
    }

    fn expression_value(&mut self) -> PResult<bool> {
        let mut last = self.assignment()?;
        while self.eat(",") {
            last = self.assignment()?;
        }
        Ok(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diags(src: &str) -> Vec<(String, usize)> {
        let program: Vec<String> = src.lines().map(str::to_string).collect();
        check_program(&program, &PatternTable::default()).into_iter().map(|d| (d.error_id, d.line)).collect()
    }

    fn ids(src: &str) -> Vec<String> {
        diags(src).into_iter().map(|d| d.0).collect()
    }

    fn wrap(body: &str) -> String {
        format!("int main() {{\n    int x, y, i;\n    float f;\n{body}\n    return 0;\n}}")
    }

    #[test]
    fn clean_program() {
        let src = wrap(
            "    x = 1; y = x * 2 + (i - 3);\n    for (i = 0; i < 10; i++) { x += i; }\n    \
             if (x > y) printf(\"%d\\n\", x); else { y = -x; }\n    while (x) x--;\n    \
             do { x++; } while (x < 5);\n    scanf(\"%d\", &x);\n    f = sqrt(2.0) / 3;",
        );
        assert!(diags(&src).is_empty(), "{:?}", raw_messages(&src.lines().collect::<Vec<_>>()));
    }

    #[test]
    fn missing_semicolon_after_declaration() {
        assert_eq!(diags("int a\n a = 1;"), [("E1".to_string(), 0)]);
    }

    #[test]
    fn undeclared_identifier() {
        assert_eq!(ids("int main() {\n x = 1;\n return 0;\n}"), ["E2"]);
    }

    #[test]
    fn not_assignable() {
        assert_eq!(ids("int main() {\n int i;\n 0 = i;\n return 0;\n}"), ["E10"]);
    }

    #[test]
    fn missing_semicolon_after_expression() {
        assert_eq!(diags(&wrap("    x = 1\n    y = 2;")), [("E1".to_string(), 3)]);
        assert_eq!(ids(&wrap("    x = 5:")), ["E1"]);
        assert_eq!(ids(&wrap("    x = i x;")), ["E1"]);
    }

    #[test]
    fn return_without_semicolon() {
        assert_eq!(ids("int main() {\n return 0\n}"), ["E23"]);
    }

    #[test]
    fn loop_header_separators() {
        assert_eq!(ids(&wrap("    for (i = 0, i < x, i++) x++;")), ["E6", "E6"]);
        assert_eq!(ids(&wrap("    for (i = 0; i < x) x++;")), ["E6"]);
        assert_eq!(ids(&wrap("    for (i = 0 i < x; i++) x++;")), ["E6"]);
    }

    #[test]
    fn parenthesis_mistakes() {
        assert_eq!(ids(&wrap("    if (x > y)) {\n    }")), ["E3"]);
        assert_eq!(ids(&wrap("    if ((x > y) {\n    }")), ["E3"]);
        assert_eq!(ids(&wrap("    if (x > y {\n    }")), ["E3"]);
        assert_eq!(ids(&wrap("    if x > y) {\n    }")), ["E4"]);
        assert_eq!(ids(&wrap("    printf(\"%d\", x;")), ["E3"]);
        assert_eq!(ids(&wrap("    printf(\"%d\" x);")), ["E3"]);
    }

    #[test]
    fn malformed_expressions() {
        assert_eq!(ids(&wrap("    x = i = < 3;")), ["E3"]);
        assert_eq!(ids(&wrap("    x = y + ;")), ["E3"]);
        assert_eq!(ids(&wrap("    x = = y;")), ["E3"]);
        assert_eq!(ids(&wrap("    if (x = < y) x = 1;")), ["E3"]);
    }

    #[test]
    fn stray_break_and_braces() {
        assert_eq!(ids(&wrap("    x = 1; break;")), ["E5"]);
        assert_eq!(ids("int main() {\n return 0;\n}\n}"), ["E8"]);
        assert_eq!(ids(&wrap("    do { x++; } while (x < 3)")), ["E6"]);
    }

    #[test]
    fn switch_case_colon() {
        let src =
            wrap("    switch (x) {\n    case 1;\n        y = 1;\n        break;\n    default:\n        y = 2;\n    }");
        assert_eq!(ids(&src), ["E6"]);
    }

    #[test]
    fn unterminated_string() {
        assert!(ids(&wrap("    printf(\"%d, x);")).contains(&"E9".to_string()));
    }

    #[test]
    fn redefinition_and_scopes() {
        assert_eq!(ids(&wrap("    int x;")), ["E12"]);
        assert!(ids(&wrap("    { int x; x = 1; }")).is_empty());
        assert_eq!(ids(&wrap("    { int z; }\n    z = 1;")), ["E2"]);
    }

    #[test]
    fn helper_functions_and_arrays() {
        let src = "int sq(int v) {\n    return v * v;\n}\nint main() {\n    int a[5] = {1, 2, 3};\n    a[0] = sq(a[1]);\n    return 0;\n}";
        assert!(ids(src).is_empty());
    }

    #[test]
    fn deterministic() {
        let src = wrap("    x = = 1\n    y = z;");
        assert_eq!(diags(&src), diags(&src));
    }

    #[test]
    fn missing_closing_brace_at_end() {
        assert_eq!(ids("int main() {\n int x;"), ["E3"]);
    }
}
