//! Best-effort symbol table for programs that may not compile.
//!
//! The builder walks the token stream of the whole program once, keeping a
//! stack of block scopes. Declarations it can parse contribute symbols;
//! everything else is skipped. Identifier and literal occurrences are
//! recorded so that concretization can pick the most recently used
//! candidate.

use super::abstraction::is_builtin;
use super::lexer::{tokenize, ConcreteToken, TokenKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A (line, column) location; orders lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub const MAX: Position = Position { line: usize::MAX, column: usize::MAX };

    pub fn new(line: usize, column: usize) -> Self {
        Position { line, column }
    }

    /// The last position on `line`.
    pub fn end_of_line(line: usize) -> Self {
        Position { line, column: usize::MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CType {
    Int,
    Float,
    Char,
    Void,
    Struct,
    Unknown,
    Pointer(Box<CType>),
    Array(Box<CType>),
    Function(Box<CType>),
}

impl CType {
    fn name(&self) -> String {
        match self {
            CType::Int => "INT".into(),
            CType::Float => "FLOAT".into(),
            CType::Char => "CHAR".into(),
            CType::Void => "VOID".into(),
            CType::Struct => "STRUCT".into(),
            CType::Unknown => "UNKNOWN".into(),
            CType::Pointer(t) => format!("POINTER_{}", t.name()),
            CType::Array(t) => format!("ARRAY_{}", t.name()),
            CType::Function(t) => format!("FUNCTION_{}", t.name()),
        }
    }

    /// Abstract tag used for identifiers of this type.
    pub fn tag(&self) -> String {
        match self {
            CType::Pointer(_) | CType::Array(_) | CType::Function(_) => self.name(),
            scalar => format!("VARIABLE_{}", scalar.name()),
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub ty: CType,
    pub decl: Position,
    /// Declaration and every resolved use, in textual order.
    pub occurrences: Vec<Position>,
}

impl Symbol {
    pub fn decl_line(&self) -> usize {
        self.decl.line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    pub parent: Option<usize>,
    pub depth: usize,
    pub start: Position,
    pub end: Position,
    pub symbols: BTreeMap<String, Symbol>,
}

impl Scope {
    fn contains(&self, pos: Position) -> bool {
        self.start <= pos && pos <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralUse {
    pub lexeme: String,
    pub kind: TokenKind,
    pub pos: Position,
    pub scope: usize,
}

/// Scope tree plus occurrence records. Scope 0 is the global scope and
/// always exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolTable {
    scopes: Vec<Scope>,
    literals: Vec<LiteralUse>,
}

/// A symbol visible from some position, with the depth of its scope.
#[derive(Debug, Clone, Copy)]
pub struct Visible<'a> {
    pub symbol: &'a Symbol,
    pub depth: usize,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable {
            scopes: vec![Scope {
                parent: None,
                depth: 0,
                start: Position::new(0, 0),
                end: Position::MAX,
                symbols: BTreeMap::new(),
            }],
            literals: Vec::new(),
        }
    }
}

impl SymbolTable {
    pub fn scopes(&self) -> &[Scope] {
        &self.scopes
    }

    pub fn literals(&self) -> &[LiteralUse] {
        &self.literals
    }

    /// Innermost scope containing `pos`.
    pub fn scope_at(&self, pos: Position) -> usize {
        let mut best = 0;
        for (idx, scope) in self.scopes.iter().enumerate().skip(1) {
            if scope.contains(pos) {
                let cur = &self.scopes[best];
                if scope.depth > cur.depth || (scope.depth == cur.depth && scope.start > cur.start) {
                    best = idx;
                }
            }
        }
        best
    }

    /// Scope indices from the innermost scope at `pos` out to the global scope.
    pub fn chain_at(&self, pos: Position) -> Vec<usize> {
        let mut chain = vec![self.scope_at(pos)];
        while let Some(parent) = self.scopes[*chain.last().unwrap()].parent {
            chain.push(parent);
        }
        chain
    }

    /// Resolves `name` as seen from `pos`: innermost enclosing scope wins and
    /// only declarations at or before `pos` count.
    pub fn lookup(&self, name: &str, pos: Position) -> Option<&Symbol> {
        self.chain_at(pos).into_iter().find_map(|idx| self.scopes[idx].symbols.get(name).filter(|sym| sym.decl <= pos))
    }

    /// Every symbol visible from `pos` (shadowed names removed) whose
    /// declaration is at or before `cutoff`.
    pub fn visible(&self, pos: Position, cutoff: Position) -> Vec<Visible<'_>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for idx in self.chain_at(pos) {
            let scope = &self.scopes[idx];
            for (name, sym) in &scope.symbols {
                if sym.decl <= cutoff && seen.insert(name.as_str()) {
                    out.push(Visible { symbol: sym, depth: scope.depth });
                }
            }
        }
        out
    }

    /// Literal uses in scopes enclosing `pos`, paired with their scope depth.
    pub fn visible_literals(&self, pos: Position) -> Vec<(&LiteralUse, usize)> {
        let chain = self.chain_at(pos);
        self.literals
            .iter()
            .filter(|lit| chain.contains(&lit.scope))
            .map(|lit| (lit, self.scopes[lit.scope].depth))
            .collect()
    }

    /// All symbols of all scopes, for inspection and tests.
    pub fn all_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.scopes.iter().flat_map(|s| s.symbols.values())
    }
}

#[derive(Debug, Clone)]
struct Tok {
    pos: Position,
    token: ConcreteToken,
}

impl Tok {
    fn is(&self, s: &str) -> bool {
        self.token.lexeme == s
    }
}

const TYPE_WORDS: &[&str] = &["int", "char", "float", "double", "void", "long", "short", "unsigned", "signed"];
const QUALIFIERS: &[&str] = &["const", "static", "volatile", "register", "extern", "auto"];

#[derive(PartialEq)]
enum ForState {
    Header { paren_depth: usize },
    AwaitBody,
    BodyStatement,
    BodyBlock { brace_scope: usize },
}

struct ForScope {
    scope: usize,
    state: ForState,
}

struct PendingParam {
    name: String,
    ty: CType,
    pos: Position,
}

struct Builder {
    toks: Vec<Tok>,
    table: SymbolTable,
    stack: Vec<usize>,
    fors: Vec<ForScope>,
    pending_params: Option<Vec<PendingParam>>,
    paren_depth: usize,
}

/// Builds the best-effort symbol table for a program given as lines.
/// Lines that fail to lex are skipped; nothing here is fatal.
pub fn build_symbol_table<S: AsRef<str>>(program: &[S]) -> SymbolTable {
    let mut toks = Vec::new();
    for (line_no, line) in program.iter().enumerate() {
        if let Ok(line_toks) = tokenize(line.as_ref()) {
            toks.extend(line_toks.into_iter().map(|token| Tok { pos: Position::new(line_no, token.column), token }));
        }
    }
    let mut builder = Builder {
        toks,
        table: SymbolTable::default(),
        stack: vec![0],
        fors: Vec::new(),
        pending_params: None,
        paren_depth: 0,
    };
    builder.run();
    builder.table
}

impl Builder {
    fn current(&self) -> usize {
        *self.stack.last().unwrap()
    }

    fn push_scope(&mut self, start: Position) -> usize {
        let parent = self.current();
        let idx = self.table.scopes.len();
        self.table.scopes.push(Scope {
            parent: Some(parent),
            depth: self.stack.len(),
            start,
            end: Position::MAX,
            symbols: BTreeMap::new(),
        });
        self.stack.push(idx);
        idx
    }

    fn pop_scope(&mut self, end: Position) {
        if self.stack.len() > 1 {
            let idx = self.stack.pop().unwrap();
            self.table.scopes[idx].end = end;
        }
    }

    fn declare(&mut self, name: &str, ty: CType, pos: Position) {
        let scope = self.current();
        self.table.scopes[scope].symbols.entry(name.to_string()).or_insert_with(|| Symbol {
            name: name.to_string(),
            ty,
            decl: pos,
            occurrences: vec![pos],
        });
    }

    fn resolve_use(&mut self, name: &str, pos: Position) {
        for &idx in self.stack.iter().rev() {
            if let Some(sym) = self.table.scopes[idx].symbols.get_mut(name) {
                if sym.decl <= pos {
                    if sym.occurrences.last() != Some(&pos) {
                        sym.occurrences.push(pos);
                    }
                    return;
                }
            }
        }
    }

    fn at_declaration_start(&self, i: usize) -> bool {
        match i.checked_sub(1).map(|p| &self.toks[p]) {
            None => true,
            Some(prev) if prev.is(";") || prev.is("{") || prev.is("}") => true,
            Some(prev) if prev.is("(") => i >= 2 && self.toks[i - 2].is("for"),
            // a declaration on a fresh line still counts after a missing `;`
            Some(prev) => prev.pos.line < self.toks[i].pos.line && !prev.is(","),
        }
    }

    fn run(&mut self) {
        let mut i = 0;
        while i < self.toks.len() {
            if self.unknown_type_at(i) && self.at_declaration_start(i) {
                // recovered like the compiler does: the declarators are ints
                let tok = self.toks[i].clone();
                self.observe(&tok);
                if let Some(next) = self.parse_declarators(CType::Int, i + 1) {
                    i = next;
                    continue;
                }
                i += 1;
                continue;
            }
            if self.starts_type(i) && self.at_declaration_start(i) {
                if self.toks[i - 1.min(i)].is("(") && i >= 2 && self.toks[i - 2].is("for") {
                    let scope = self.push_scope(self.toks[i - 2].pos);
                    self.fors.push(ForScope {
                        scope,
                        state: ForState::Header { paren_depth: self.paren_depth.saturating_sub(1) },
                    });
                }
                if let Some(next) = self.parse_declaration(i) {
                    if next > i {
                        i = next;
                        continue;
                    }
                }
            }
            let tok = self.toks[i].clone();
            self.observe(&tok);
            i += 1;
        }
        let end = self.toks.last().map(|t| t.pos).unwrap_or(Position::MAX);
        while self.stack.len() > 1 {
            self.pop_scope(end);
        }
        for f in self.fors.drain(..) {
            if self.table.scopes[f.scope].end == Position::MAX {
                self.table.scopes[f.scope].end = end;
            }
        }
    }

    /// Scope and for-header bookkeeping for a token outside declarations.
    fn observe(&mut self, tok: &Tok) {
        let lexeme = tok.token.lexeme.as_str();
        if let Some(f) = self.fors.last_mut() {
            if f.state == ForState::AwaitBody {
                f.state = if lexeme == "{" {
                    ForState::BodyBlock { brace_scope: self.table.scopes.len() }
                } else {
                    ForState::BodyStatement
                };
            }
        }
        match lexeme {
            "{" => {
                let scope = self.push_scope(tok.pos);
                if let Some(params) = self.pending_params.take() {
                    for p in params {
                        self.table.scopes[scope].symbols.insert(
                            p.name.clone(),
                            Symbol { name: p.name, ty: p.ty, decl: p.pos, occurrences: vec![p.pos] },
                        );
                    }
                }
            }
            "}" => {
                let closing = self.current();
                self.pop_scope(tok.pos);
                if let Some(f) = self.fors.pop_if(|f| f.state == (ForState::BodyBlock { brace_scope: closing })) {
                    self.close_for(f.scope, tok.pos);
                }
            }
            "(" => self.paren_depth += 1,
            ")" => {
                self.paren_depth = self.paren_depth.saturating_sub(1);
                if let Some(f) = self.fors.last_mut() {
                    if f.state == (ForState::Header { paren_depth: self.paren_depth }) {
                        f.state = ForState::AwaitBody;
                    }
                }
            }
            ";" => {
                if let Some(f) = self.fors.pop_if(|f| f.state == ForState::BodyStatement) {
                    self.close_for(f.scope, tok.pos);
                }
            }
            _ => {}
        }
        match tok.token.kind {
            TokenKind::Identifier => self.resolve_use(lexeme, tok.pos),
            kind if kind.is_literal() => {
                let scope = self.current();
                self.table.literals.push(LiteralUse { lexeme: lexeme.to_string(), kind, pos: tok.pos, scope });
            }
            _ => {}
        }
    }

    fn close_for(&mut self, scope: usize, end: Position) {
        if self.current() == scope {
            self.pop_scope(end);
        } else {
            self.table.scopes[scope].end = end;
            self.stack.retain(|&s| s != scope);
        }
    }

    fn starts_type(&self, i: usize) -> bool {
        let t = &self.toks[i];
        TYPE_WORDS.iter().any(|w| t.is(w))
            || QUALIFIERS.iter().any(|w| t.is(w))
            || ((t.is("struct") || t.is("union") || t.is("enum"))
                && self.toks.get(i + 1).is_some_and(|n| n.token.kind == TokenKind::Identifier))
    }

    /// Parses type specifiers starting at `i`; returns the base type and the
    /// index after them.
    fn parse_specifiers(&self, mut i: usize) -> Option<(CType, usize)> {
        let mut words = Vec::new();
        let mut is_struct = false;
        while let Some(t) = self.toks.get(i) {
            if TYPE_WORDS.iter().any(|w| t.is(w)) {
                words.push(t.token.lexeme.clone());
                i += 1;
            } else if QUALIFIERS.iter().any(|w| t.is(w)) {
                i += 1;
            } else if (t.is("struct") || t.is("union") || t.is("enum")) && !is_struct {
                if self.toks.get(i + 1)?.token.kind != TokenKind::Identifier {
                    return None;
                }
                is_struct = !t.is("enum");
                if t.is("enum") {
                    words.push("int".into());
                }
                i += 2;
            } else {
                break;
            }
        }
        let base = if is_struct {
            CType::Struct
        } else if words.iter().any(|w| w == "float" || w == "double") {
            CType::Float
        } else if words.iter().any(|w| w == "char") {
            CType::Char
        } else if words.iter().any(|w| w == "void") {
            CType::Void
        } else if words.is_empty() {
            return None;
        } else {
            CType::Int
        };
        Some((base, i))
    }

    /// Parses `specifiers declarator (= init)? (, declarator (= init)?)* ;`.
    /// Returns the index after the consumed tokens, or `None` if the tokens
    /// do not form a declaration (nothing is recorded in that case beyond
    /// the declarators already accepted).
    fn parse_declaration(&mut self, start: usize) -> Option<usize> {
        let (base, i) = self.parse_specifiers(start)?;
        self.parse_declarators(base, i)
    }

    /// An undeclared identifier used as a type name: `Foo a;`, `Foo a, b`.
    fn unknown_type_at(&self, i: usize) -> bool {
        let t = &self.toks[i];
        let same_line = |k: usize| self.toks.get(k).filter(|n| n.pos.line == t.pos.line);
        t.token.kind == TokenKind::Identifier
            && !is_builtin(&t.token.lexeme)
            && !self.is_declared(&t.token.lexeme)
            && same_line(i + 1).is_some_and(|n| n.token.kind == TokenKind::Identifier)
            && same_line(i + 2).is_some_and(|n| [",", ";", "=", "["].iter().any(|s| n.is(s)))
    }

    fn is_declared(&self, name: &str) -> bool {
        self.stack.iter().any(|&s| self.table.scopes[s].symbols.contains_key(name))
    }

    fn parse_declarators(&mut self, base: CType, mut i: usize) -> Option<usize> {
        loop {
            let mut ty = base.clone();
            while self.toks.get(i)?.is("*") {
                ty = CType::Pointer(Box::new(ty));
                i += 1;
            }
            let name_tok = self.toks.get(i)?.clone();
            if name_tok.token.kind != TokenKind::Identifier {
                return None;
            }
            i += 1;
            let mut dims = 0;
            while self.toks.get(i).is_some_and(|t| t.is("[")) {
                i = self.skip_balanced(i)?;
                dims += 1;
            }
            for _ in 0..dims {
                ty = CType::Array(Box::new(ty));
            }
            if self.toks.get(i).is_some_and(|t| t.is("(")) {
                return self.parse_function(ty, &name_tok, i);
            }
            self.declare(&name_tok.token.lexeme, ty, name_tok.pos);
            if self.toks.get(i).is_some_and(|t| t.is("=")) {
                i += 1;
                while let Some(t) = self.toks.get(i) {
                    if t.is(",") || t.is(";") {
                        break;
                    }
                    if t.is("(") || t.is("[") || t.is("{") {
                        let close = self.skip_balanced(i)?;
                        for k in i..close {
                            let tok = self.toks[k].clone();
                            self.observe_inert(&tok);
                        }
                        i = close;
                    } else {
                        let tok = t.clone();
                        self.observe_inert(&tok);
                        i += 1;
                    }
                }
            }
            match self.toks.get(i) {
                Some(t) if t.is(",") => i += 1,
                Some(t) if t.is(";") => {
                    let tok = self.toks[i].clone();
                    self.observe(&tok);
                    return Some(i + 1);
                }
                // a malformed initializer such as `a == 1`: skip it and keep
                // reading declarators on the same line
                Some(t) if t.pos.line == name_tok.pos.line && !t.is("{") && !t.is("}") => {
                    let mut depth = 0usize;
                    while let Some(t) = self.toks.get(i) {
                        if t.pos.line != name_tok.pos.line || t.is("{") || t.is("}") {
                            return Some(i);
                        }
                        if depth == 0 && (t.is(",") || t.is(";")) {
                            break;
                        }
                        if t.is("(") || t.is("[") {
                            depth += 1;
                        } else if (t.is(")") || t.is("]")) && depth > 0 {
                            depth -= 1;
                        }
                        let tok = t.clone();
                        self.observe_inert(&tok);
                        i += 1;
                    }
                    match self.toks.get(i) {
                        Some(t) if t.is(",") => i += 1,
                        Some(t) if t.is(";") => {
                            let tok = self.toks[i].clone();
                            self.observe(&tok);
                            return Some(i + 1);
                        }
                        _ => return Some(i),
                    }
                }
                _ => return Some(i),
            }
        }
    }

    /// Records identifier uses and literals inside initializers without
    /// touching scope state.
    fn observe_inert(&mut self, tok: &Tok) {
        match tok.token.kind {
            TokenKind::Identifier => self.resolve_use(&tok.token.lexeme, tok.pos),
            kind if kind.is_literal() => {
                let scope = self.current();
                self.table.literals.push(LiteralUse { lexeme: tok.token.lexeme.clone(), kind, pos: tok.pos, scope });
            }
            _ => {}
        }
    }

    fn parse_function(&mut self, ret: CType, name: &Tok, open: usize) -> Option<usize> {
        let close = self.skip_balanced(open)?;
        let mut params = Vec::new();
        let mut i = open + 1;
        while i < close - 1 {
            let mut end = i;
            let mut depth = 0usize;
            while end < close - 1 {
                let t = &self.toks[end];
                if t.is("(") || t.is("[") {
                    depth += 1;
                } else if t.is(")") || t.is("]") {
                    depth = depth.saturating_sub(1);
                } else if t.is(",") && depth == 0 {
                    break;
                }
                end += 1;
            }
            if let Some((base, mut j)) = self.parse_specifiers(i) {
                let mut ty = base;
                while j < end && self.toks[j].is("*") {
                    ty = CType::Pointer(Box::new(ty));
                    j += 1;
                }
                if j < end && self.toks[j].token.kind == TokenKind::Identifier {
                    let tok = &self.toks[j];
                    let mut k = j + 1;
                    while k < end && self.toks[k].is("[") {
                        ty = CType::Array(Box::new(ty));
                        k = self.skip_balanced(k).unwrap_or(end);
                    }
                    params.push(PendingParam { name: tok.token.lexeme.clone(), ty, pos: tok.pos });
                }
            }
            i = end + 1;
        }
        self.declare(&name.token.lexeme, CType::Function(Box::new(ret)), name.pos);
        match self.toks.get(close) {
            Some(t) if t.is("{") => {
                self.pending_params = Some(params);
                Some(close)
            }
            Some(t) if t.is(";") => Some(close + 1),
            _ => Some(close),
        }
    }

    /// Given an opening bracket at `open`, returns the index just past its
    /// matching closer.
    fn skip_balanced(&self, open: usize) -> Option<usize> {
        let mut depth = 0usize;
        for (k, t) in self.toks.iter().enumerate().skip(open) {
            if t.is("(") || t.is("[") || t.is("{") {
                depth += 1;
            } else if t.is(")") || t.is("]") || t.is("}") {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(k + 1);
                }
            }
        }
        None
    }
}
