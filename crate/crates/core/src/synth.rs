//! Random programs in the C subset and bug injection, for fixture corpora.
//!
//! Every generated pair is checked with the mock compiler: the fixed
//! program compiles cleanly and the buggy one reports at least one error.

use crate::compiler::{Compiler, MockCompiler};
use crate::corpus::{mine_pair, ClassKey, TrainPair};
use crate::lang::lexer::{indentation, render_lexemes, tokenize, TokenKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const INTS: &[&str] = &["a", "b", "c", "k", "sum", "count", "total", "big", "small", "num"];
const FLOATS: &[&str] = &["x", "y", "avg", "rate"];
const CHARS: &[&str] = &["ch", "grade"];
const ARRAYS: &[&str] = &["arr", "marks"];
const ARITH: &[&str] = &["+", "-", "*", "/", "%"];
const COMPARE: &[&str] = &["<", ">", "<=", ">=", "==", "!="];

const MAIN_INDENT: &str = "    ";
const INNER_INDENT: &str = "        ";

/// Variables declared by a generated program, by type.
#[derive(Debug, Clone, Default)]
struct Scope {
    ints: Vec<&'static str>,
    floats: Vec<&'static str>,
    chars: Vec<&'static str>,
    arrays: Vec<&'static str>,
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty pool")
}

fn int_operand<R: Rng>(rng: &mut R, s: &Scope) -> String {
    match rng.gen_range(0..10) {
        0..=5 => pick(rng, &s.ints).to_string(),
        6 if !s.arrays.is_empty() => format!("{}[i]", pick(rng, &s.arrays)),
        _ => rng.gen_range(1..20).to_string(),
    }
}

fn int_expr<R: Rng>(rng: &mut R, s: &Scope) -> String {
    match rng.gen_range(0..6) {
        0 => int_operand(rng, s),
        1 => format!(
            "({} {} {}) {} {}",
            int_operand(rng, s),
            pick(rng, &["+", "-"]),
            int_operand(rng, s),
            pick(rng, &["*", "/"]),
            int_operand(rng, s)
        ),
        2 => format!(
            "{} {} {} {} {}",
            int_operand(rng, s),
            pick(rng, ARITH),
            int_operand(rng, s),
            pick(rng, &["+", "-"]),
            int_operand(rng, s)
        ),
        _ => format!("{} {} {}", int_operand(rng, s), pick(rng, ARITH), int_operand(rng, s)),
    }
}

fn condition<R: Rng>(rng: &mut R, s: &Scope) -> String {
    let one = |rng: &mut R| format!("{} {} {}", pick(rng, &s.ints), pick(rng, COMPARE), int_operand(rng, s));
    match rng.gen_range(0..5) {
        0 => format!("{} {} {}", one(rng), pick(rng, &["&&", "||"]), one(rng)),
        _ => one(rng),
    }
}

/// A statement that fits on one line.
fn simple<R: Rng>(rng: &mut R, s: &Scope) -> String {
    let v = pick(rng, &s.ints);
    match rng.gen_range(0..16) {
        0..=3 => format!("{v} = {};", int_expr(rng, s)),
        4 => format!("{v} {} {};", pick(rng, &["+=", "-=", "*="]), int_operand(rng, s)),
        5 => format!("{v}{};", pick(rng, &["++", "--"])),
        6 | 7 => format!("printf(\"%d\\n\", {});", int_expr(rng, s)),
        8 => format!("printf(\"%d %d\\n\", {v}, {});", pick(rng, &s.ints)),
        9 => format!("scanf(\"%d\", &{v});"),
        10 if !s.floats.is_empty() => {
            let f = pick(rng, &s.floats);
            match rng.gen_range(0..3) {
                0 => format!("{f} = {} * {}.5;", pick(rng, &s.ints), rng.gen_range(1..9)),
                1 => format!("printf(\"%f\\n\", {f});"),
                _ => format!("scanf(\"%f\", &{f});"),
            }
        }
        11 if !s.chars.is_empty() => {
            let c = pick(rng, &s.chars);
            match rng.gen_range(0..2) {
                0 => format!("{c} = '{}';", pick(rng, &["a", "b", "y", "n"])),
                _ => format!("printf(\"%c\\n\", {c});"),
            }
        }
        12 if !s.arrays.is_empty() => format!("{}[i] = {};", pick(rng, &s.arrays), int_expr(rng, s)),
        13 => format!("if ({}) {v} = {};", condition(rng, s), int_operand(rng, s)),
        14 => "printf(\"done\\n\");".to_string(),
        _ => format!("{v} = {} {} {};", v, pick(rng, ARITH), int_operand(rng, s)),
    }
}

fn push(out: &mut Vec<String>, indent: &str, text: &str) {
    out.push(format!("{indent}{text}"));
}

/// A top-level statement of `main`, possibly spanning several lines.
fn statement<R: Rng>(rng: &mut R, s: &Scope, out: &mut Vec<String>) {
    let (m, n) = (MAIN_INDENT, INNER_INDENT);
    match rng.gen_range(0..14) {
        0..=4 => push(out, m, &simple(rng, s)),
        5 => {
            push(out, m, &format!("if ({}) {{", condition(rng, s)));
            for _ in 0..rng.gen_range(1..3) {
                push(out, n, &simple(rng, s));
            }
            if rng.gen_bool(0.4) {
                push(out, m, "} else {");
                push(out, n, &simple(rng, s));
            }
            push(out, m, "}");
        }
        6 => {
            push(out, m, &format!("while (i {} n) {{", pick(rng, &["<", "<="])));
            push(out, n, &simple(rng, s));
            push(out, n, pick(rng, &["i++;", "i = i + 1;", "i += 1;"]));
            push(out, m, "}");
        }
        7 | 8 => {
            let (start, cmp, step) =
                (rng.gen_range(0..2), pick(rng, &["<", "<="]), pick(rng, &["i++", "i = i + 1", "i += 1"]));
            push(out, m, &format!("for (i = {start}; i {cmp} n; {step}) {{"));
            for _ in 0..rng.gen_range(1..3) {
                push(out, n, &simple(rng, s));
            }
            push(out, m, "}");
        }
        9 => {
            push(out, m, "do {");
            push(out, n, &simple(rng, s));
            push(out, n, "i++;");
            push(out, m, &format!("}} while (i {} n);", pick(rng, &["<", "<="])));
        }
        10 => {
            push(out, m, &format!("switch ({}) {{", pick(rng, &s.ints)));
            for c in 1..=rng.gen_range(1..3) {
                push(out, m, &format!("case {c}:"));
                push(out, n, &simple(rng, s));
                push(out, n, "break;");
            }
            push(out, m, "default:");
            push(out, n, &simple(rng, s));
            push(out, m, "}");
        }
        11 => out.push(String::new()),
        _ => push(out, m, &format!("{} = {};", pick(rng, &s.ints), int_expr(rng, s))),
    }
}

/// A random error-free program: declarations, a handful of statements and
/// a `return`.
pub fn generate_program<R: Rng>(rng: &mut R) -> Vec<String> {
    let n_ints = rng.gen_range(2..5);
    let mut ints: Vec<&str> = INTS.choose_multiple(rng, n_ints).copied().collect();
    let mut s = Scope::default();
    let mut out = vec!["int main() {".to_string()];
    let decl = |names: &[&str], ty: &str, out: &mut Vec<String>, rng: &mut R| {
        let parts: Vec<String> = names
            .iter()
            .map(|v| if rng.gen_bool(0.25) { format!("{v} = {}", rng.gen_range(0..10)) } else { v.to_string() })
            .collect();
        push(out, MAIN_INDENT, &format!("{ty} {};", parts.join(", ")));
    };
    ints.extend(["i", "n"]);
    decl(&ints, "int", &mut out, rng);
    s.ints = ints;
    if rng.gen_bool(0.5) {
        let n_floats = rng.gen_range(1..3);
        s.floats = FLOATS.choose_multiple(rng, n_floats).copied().collect();
        decl(&s.floats.clone(), "float", &mut out, rng);
    }
    if rng.gen_bool(0.3) {
        s.chars = vec![pick(rng, CHARS)];
        decl(&s.chars.clone(), "char", &mut out, rng);
    }
    if rng.gen_bool(0.4) {
        let a = pick(rng, ARRAYS);
        push(&mut out, MAIN_INDENT, &format!("int {a}[{}];", rng.gen_range(5..20)));
        s.arrays = vec![a];
    }
    push(&mut out, MAIN_INDENT, "scanf(\"%d\", &n);");
    push(&mut out, MAIN_INDENT, "i = 0;");
    for _ in 0..rng.gen_range(3..7) {
        statement(rng, &s, &mut out);
    }
    push(&mut out, MAIN_INDENT, "return 0;");
    out.push("}".to_string());
    out
}

/// A kind of single-line mistake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Injection {
    DropFinalSemi,
    SemiToColon,
    ForSemiToComma(usize),
    ForDropSemi(usize),
    ForExtraSemi,
    CondDropClose,
    CondExtraClose,
    CondDropOpen,
    CallDropClose,
    CallExtraClose,
    CallDropComma,
    CallExtraComma,
    DropBinaryOp(&'static str),
    TrailingOp(&'static str),
    DeclDropComma,
    DeclDoubleEq,
    AssignDropEq,
    SplitComparison(&'static str),
    Undeclared,
    TypeTypo,
    CaseSemi,
    DefaultSemi,
    StrayBreak,
    DropIndexClose,
    DropGroupOpen,
    DropGroupClose,
    HalfIncrement,
    LiteralTarget,
    /// Any token removed.
    DropAny,
    /// Any token written twice.
    DuplicateAny,
}

impl Injection {
    /// Realistic mistakes used for the main fixture corpus. Each leaves a
    /// line from which the intended class can in principle be told.
    pub fn core() -> Vec<Injection> {
        use Injection::*;
        let mut v = vec![
            DropFinalSemi,
            SemiToColon,
            ForSemiToComma(0),
            ForSemiToComma(1),
            ForDropSemi(0),
            ForDropSemi(1),
            ForExtraSemi,
            CondDropClose,
            CondExtraClose,
            CondDropOpen,
            CallDropClose,
            CallExtraClose,
            CallDropComma,
            CallExtraComma,
            DeclDoubleEq,
            AssignDropEq,
            SplitComparison("<="),
            SplitComparison(">="),
            Undeclared,
            TypeTypo,
            CaseSemi,
            DefaultSemi,
            StrayBreak,
            DropIndexClose,
            DropGroupOpen,
            DropGroupClose,
            HalfIncrement,
            LiteralTarget,
        ];
        v.extend(["+", "&&"].map(DropBinaryOp));
        v.extend(["+", "*", "-", "/"].map(TrailingOp));
        v
    }

    /// Core mistakes plus every operator variant and random token noise,
    /// enough to populate a long tail of classes.
    pub fn extended() -> Vec<Injection> {
        use Injection::*;
        let mut v = Injection::core();
        v.push(DeclDropComma);
        v.extend(["-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!=", "||"].map(DropBinaryOp));
        v.extend(["%", "<", ">", "==", "=", "&&", "||", ","].map(TrailingOp));
        v.extend([DropAny, DropAny, DuplicateAny, DuplicateAny]);
        v
    }

    pub fn name(&self) -> String {
        format!("{self:?}").to_lowercase().replace(['(', ')', '"'], "")
    }

    /// Every way to apply this mistake to one line, as new lexemes.
    fn variants(&self, lx: &[String], kinds: &[TokenKind], s: &Scope) -> Vec<Vec<String>> {
        use Injection::*;
        let first = lx.first().map(String::as_str).unwrap_or("");
        let ends_semi = lx.last().is_some_and(|t| t == ";");
        let is_decl = ["int", "float", "char"].contains(&first);
        let mut out = Vec::new();
        match *self {
            DropFinalSemi if ends_semi && first != "for" => out.push(without(lx, lx.len() - 1)),
            SemiToColon if ends_semi && first != "for" && first != "break" => {
                out.push(replaced(lx, lx.len() - 1, &[":"]))
            }
            ForSemiToComma(k) if first == "for" => {
                if let Some(&p) = positions(lx, ";").get(k) {
                    out.push(replaced(lx, p, &[","]));
                }
            }
            ForDropSemi(k) if first == "for" => {
                if let Some(&p) = positions(lx, ";").get(k) {
                    out.push(without(lx, p));
                }
            }
            ForExtraSemi if first == "for" => {
                if let Some(close) = matching(lx, 1) {
                    out.push(inserted(lx, close, &[";"]));
                }
            }
            CondDropClose | CondExtraClose | CondDropOpen if first == "if" || first == "while" => {
                if let Some(close) = matching(lx, 1) {
                    out.push(match self {
                        CondDropClose => without(lx, close),
                        CondExtraClose => inserted(lx, close, &[")"]),
                        _ => without(lx, 1),
                    });
                }
            }
            CallDropClose | CallExtraClose | CallDropComma | CallExtraComma
                if first == "printf" || first == "scanf" =>
            {
                let close = matching(lx, 1);
                let comma = lx.iter().position(|t| t == ",");
                match (self, close, comma) {
                    (CallDropClose, Some(c), _) => out.push(without(lx, c)),
                    (CallExtraClose, Some(c), _) => out.push(inserted(lx, c, &[")"])),
                    (CallDropComma, _, Some(c)) => out.push(without(lx, c)),
                    (CallExtraComma, _, Some(c)) => out.push(inserted(lx, c, &[","])),
                    _ => {}
                }
            }
            DropBinaryOp(op) => {
                for p in positions(lx, op) {
                    if binary_at(lx, kinds, p) {
                        out.push(without(lx, p));
                    }
                }
            }
            TrailingOp(op) if ends_semi && first != "for" && lx.contains(&"=".to_string()) => {
                out.push(inserted(lx, lx.len() - 1, &[op]))
            }
            DeclDropComma if is_decl => {
                if let Some(p) = lx.iter().position(|t| t == ",") {
                    out.push(without(lx, p));
                }
            }
            DeclDoubleEq if is_decl => {
                if let Some(p) = lx.iter().position(|t| t == "=") {
                    out.push(replaced(lx, p, &["=="]));
                }
            }
            AssignDropEq if lx.len() > 2 && kinds[0] == TokenKind::Identifier && lx[1] == "=" => {
                out.push(without(lx, 1))
            }
            SplitComparison(op) => {
                let (a, b) = if op == "<=" { ("=", "<") } else { ("=", ">") };
                for p in positions(lx, op) {
                    out.push(replaced(lx, p, &[a, b]));
                }
            }
            Undeclared if !is_decl => {
                let declared = |t: &str| {
                    s.ints.contains(&t) || s.floats.contains(&t) || s.chars.contains(&t) || s.arrays.contains(&t)
                };
                for (p, t) in lx.iter().enumerate() {
                    if kinds[p] == TokenKind::Identifier && declared(t) {
                        out.push(replaced(lx, p, &[&misspell(t)]));
                    }
                }
            }
            TypeTypo if first == "int" && !lx.contains(&"[".to_string()) => out.push(replaced(lx, 0, &["Int"])),
            CaseSemi if first == "case" && lx.last().is_some_and(|t| t == ":") => {
                out.push(replaced(lx, lx.len() - 1, &[";"]))
            }
            DefaultSemi if first == "default" => out.push(replaced(lx, lx.len() - 1, &[";"])),
            StrayBreak if lx.is_empty() => out.push(vec!["break".into(), ";".into()]),
            DropIndexClose => {
                for p in positions(lx, "[") {
                    if let Some(c) = matching(lx, p) {
                        out.push(without(lx, c));
                    }
                }
            }
            DropGroupOpen | DropGroupClose => {
                for p in positions(lx, "(") {
                    let grouping = p > 0 && kinds[p - 1] != TokenKind::Identifier && kinds[p - 1] != TokenKind::Keyword;
                    if let (true, Some(c)) = (grouping, matching(lx, p)) {
                        out.push(without(lx, if *self == DropGroupOpen { p } else { c }));
                    }
                }
            }
            HalfIncrement => {
                for p in positions(lx, "++") {
                    out.push(replaced(lx, p, &["+"]));
                }
            }
            LiteralTarget
                if lx.len() == 4
                    && kinds[0] == TokenKind::Identifier
                    && lx[1] == "="
                    && kinds[2] == TokenKind::IntLiteral
                    && lx[3] == ";" =>
            {
                out.push(vec![lx[2].clone(), "=".into(), lx[0].clone(), ";".into()])
            }
            DropAny => {
                for p in 0..lx.len() {
                    out.push(without(lx, p));
                }
            }
            DuplicateAny => {
                for p in 0..lx.len() {
                    out.push(inserted(lx, p, &[&lx[p]]));
                }
            }
            _ => {}
        }
        out
    }
}

fn misspell(name: &str) -> String {
    let mut cs: Vec<char> = name.chars().collect();
    cs[0] = cs[0].to_ascii_uppercase();
    cs.into_iter().collect()
}

fn positions(lx: &[String], s: &str) -> Vec<usize> {
    lx.iter().enumerate().filter(|(_, t)| *t == s).map(|(i, _)| i).collect()
}

/// Index of the bracket closing the one at `open`.
fn matching(lx: &[String], open: usize) -> Option<usize> {
    let close = match lx.get(open)?.as_str() {
        "(" => ")",
        "[" => "]",
        _ => return None,
    };
    let mut depth = 0;
    for (i, t) in lx.iter().enumerate().skip(open) {
        if *t == lx[open] {
            depth += 1;
        } else if t == close {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn binary_at(lx: &[String], kinds: &[TokenKind], p: usize) -> bool {
    let operand_end =
        |i: usize| matches!(kinds[i], TokenKind::Identifier) || kinds[i].is_literal() || lx[i] == ")" || lx[i] == "]";
    let operand_start = |i: usize| matches!(kinds[i], TokenKind::Identifier) || kinds[i].is_literal() || lx[i] == "(";
    p > 0 && p + 1 < lx.len() && operand_end(p - 1) && operand_start(p + 1)
}

fn without(lx: &[String], p: usize) -> Vec<String> {
    let mut v = lx.to_vec();
    v.remove(p);
    v
}

fn inserted(lx: &[String], p: usize, toks: &[&str]) -> Vec<String> {
    let mut v = lx[..p].to_vec();
    v.extend(toks.iter().map(|t| t.to_string()));
    v.extend_from_slice(&lx[p..]);
    v
}

fn replaced(lx: &[String], p: usize, toks: &[&str]) -> Vec<String> {
    let mut v = lx[..p].to_vec();
    v.extend(toks.iter().map(|t| t.to_string()));
    v.extend_from_slice(&lx[p + 1..]);
    v
}

fn scope_of(program: &[String]) -> Scope {
    let mut s = Scope::default();
    for line in program {
        let Ok(toks) = tokenize(line) else { continue };
        let ty = match toks.first().map(|t| t.lexeme.as_str()) {
            Some("int") => 0,
            Some("float") => 1,
            Some("char") => 2,
            _ => continue,
        };
        for (i, t) in toks.iter().enumerate() {
            if t.kind != TokenKind::Identifier || i == 0 || !(toks[i - 1].is(",") || i == 1) {
                continue;
            }
            let name = [INTS, &["i", "n"], FLOATS, CHARS, ARRAYS].concat().into_iter().find(|n| *n == t.lexeme);
            let Some(name) = name else { continue };
            match (ty, toks.get(i + 1).is_some_and(|n| n.is("["))) {
                (_, true) => s.arrays.push(name),
                (0, _) => s.ints.push(name),
                (1, _) => s.floats.push(name),
                _ => s.chars.push(name),
            }
        }
    }
    s
}

/// A program with one injected mistake.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injected {
    pub buggy: Vec<String>,
    pub line: usize,
}

/// Applies `injection` to a random applicable line of `program`.
pub fn inject<R: Rng>(rng: &mut R, program: &[String], injection: Injection) -> Option<Injected> {
    let s = scope_of(program);
    let mut options: Vec<(usize, Vec<String>)> = Vec::new();
    // the first and last lines hold the function frame
    for (l, text) in program.iter().enumerate().take(program.len().saturating_sub(1)).skip(1) {
        let Ok(toks) = tokenize(text) else { continue };
        let lx: Vec<String> = toks.iter().map(|t| t.lexeme.clone()).collect();
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        for v in injection.variants(&lx, &kinds, &s) {
            options.push((l, v));
        }
    }
    let (line, lx) = options.choose(rng)?.clone();
    let indent = if program[line].is_empty() { MAIN_INDENT } else { indentation(&program[line]) };
    let mut buggy = program.to_vec();
    buggy[line] = format!("{indent}{}", render_lexemes(&lx));
    Some(Injected { buggy, line })
}

fn join(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// A verified training pair for `injection`, or None after `tries` attempts.
pub fn synth_pair<R: Rng>(rng: &mut R, injection: Injection, tries: usize) -> Option<TrainPair> {
    let mock = MockCompiler::default();
    for _ in 0..tries {
        let program = generate_program(rng);
        debug_assert_eq!(mock.error_count(&program).ok(), Some(0), "{program:#?}");
        let Some(inj) = inject(rng, &program, injection) else { continue };
        if inj.buggy == program {
            continue;
        }
        let diags = mock.compile(&inj.buggy).expect("mock never fails");
        let Some(d) = diags.first() else { continue };
        return Some(TrainPair {
            id: Some(injection.name()),
            source: join(&inj.buggy),
            target: join(&program),
            error_id: d.error_id.clone(),
            error_line: d.line,
        });
    }
    None
}

/// `n` verified pairs cycling through `injections`.
pub fn corpus(n: usize, injections: &[Injection], seed: u64) -> Vec<TrainPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut misses = 0;
    while out.len() < n && misses < 10 * n + 100 {
        let inj = injections[out.len() % injections.len()];
        match synth_pair(&mut rng, inj, 20) {
            Some(p) => out.push(p),
            None => misses += 1,
        }
    }
    for (i, p) in out.iter_mut().enumerate() {
        p.id = Some(format!("{}-{i}", p.id.as_deref().unwrap_or("pair")));
    }
    out
}

/// The standard fixture: realistic mistakes, every core injection equally
/// often.
pub fn fixture_corpus(n: usize, seed: u64) -> Vec<TrainPair> {
    corpus(n, &Injection::core(), seed)
}

/// Train and test splits whose class frequencies follow a Zipf law.
#[derive(Debug, Clone)]
pub struct HeavyTail {
    pub train: Vec<TrainPair>,
    pub test: Vec<TrainPair>,
    /// Training count per chosen class, most frequent first.
    pub counts: Vec<(ClassKey, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTailConfig {
    pub classes: usize,
    /// Training examples of the most frequent class.
    pub head: usize,
    pub exponent: f64,
    /// Held-out examples per class.
    pub test_per_class: usize,
    /// Candidate pairs generated before choosing classes.
    pub pool: usize,
}

impl Default for HeavyTailConfig {
    fn default() -> Self {
        HeavyTailConfig { classes: 100, head: 120, exponent: 1.1, test_per_class: 2, pool: 6_000 }
    }
}

/// Zipf count of the class at 0-based rank `r`, at least one.
pub fn zipf_count(head: usize, exponent: f64, r: usize) -> usize {
    ((head as f64 / ((r + 1) as f64).powf(exponent)).floor() as usize).max(1)
}

/// Generates a pool from the extended injections, groups it by mined class
/// and keeps the most populous `classes` classes, assigning Zipf counts in
/// a seeded random order so the frequency rank is unrelated to the
/// injection.
pub fn heavy_tail_corpus(config: &HeavyTailConfig, seed: u64) -> HeavyTail {
    let pool = corpus(config.pool, &Injection::extended(), seed);
    let mut groups: BTreeMap<ClassKey, Vec<TrainPair>> = BTreeMap::new();
    for (i, p) in pool.into_iter().enumerate() {
        if let Ok(m) = mine_pair(i, &p) {
            groups.entry(m.key).or_default().push(p);
        }
    }
    let mut keys: Vec<(ClassKey, usize)> = groups.iter().map(|(k, v)| (k.clone(), v.len())).collect();
    keys.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    keys.truncate(config.classes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    keys.shuffle(&mut rng);
    // classes able to fill a large count go first
    let mut order: Vec<(ClassKey, usize)> = Vec::new();
    let mut remaining = keys;
    for r in 0..remaining.len() {
        let need = zipf_count(config.head, config.exponent, r) + config.test_per_class;
        let at = remaining.iter().position(|(_, n)| *n >= need).unwrap_or(0);
        let (k, n) = remaining.remove(at);
        order.push((k, n));
    }
    let mut out = HeavyTail { train: Vec::new(), test: Vec::new(), counts: Vec::new() };
    for (r, (key, _)) in order.into_iter().enumerate() {
        let mut members = groups.remove(&key).unwrap_or_default();
        members.shuffle(&mut rng);
        let test_n = config.test_per_class.min(members.len().saturating_sub(1));
        let test: Vec<TrainPair> = members.drain(..test_n).collect();
        let train_n = zipf_count(config.head, config.exponent, r).min(members.len());
        out.train.extend(members.into_iter().take(train_n));
        out.test.extend(test);
        out.counts.push((key, train_n));
    }
    out.train.shuffle(&mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::mine_corpus;
    use std::collections::BTreeSet;

    #[test]
    fn generated_programs_compile() {
        let mock = MockCompiler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            let p = generate_program(&mut rng);
            assert_eq!(mock.compile(&p).unwrap(), vec![], "{p:#?}");
        }
    }

    #[test]
    fn pairs_are_verified_single_line() {
        let mock = MockCompiler::default();
        for p in fixture_corpus(200, 3) {
            let (s, t) = (p.source_lines(), p.target_lines());
            assert_eq!(mock.error_count(&t).unwrap(), 0);
            assert!(mock.error_count(&s).unwrap() >= 1);
            assert!(p.differing_line().is_some());
        }
    }

    #[test]
    fn every_core_injection_applies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for inj in Injection::core() {
            assert!(synth_pair(&mut rng, inj, 200).is_some(), "{inj:?}");
        }
    }

    #[test]
    fn fixture_spans_many_classes() {
        let pairs = fixture_corpus(600, 11);
        let mined = mine_corpus(&pairs);
        assert_eq!(mined.dropped, 0);
        let keys: BTreeSet<_> = mined.pairs.iter().map(|m| m.key.clone()).collect();
        assert!(keys.len() >= 30, "{}", keys.len());
    }

    #[test]
    fn deterministic() {
        assert_eq!(fixture_corpus(40, 9), fixture_corpus(40, 9));
        assert_ne!(fixture_corpus(40, 9), fixture_corpus(40, 10));
    }

    #[test]
    fn missing_semicolon_example() {
        let program: Vec<String> =
            ["int main() {", "    int a;", "    a = 1;", "    return 0;", "}"].map(String::from).to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inj = inject(&mut rng, &program, Injection::AssignDropEq).unwrap();
        assert_eq!(inj.line, 2);
        assert_eq!(inj.buggy[2], "    a 1;");
    }

    #[test]
    fn zipf_counts() {
        assert_eq!(zipf_count(100, 1.0, 0), 100);
        assert_eq!(zipf_count(100, 1.0, 3), 25);
        assert_eq!(zipf_count(100, 1.0, 500), 1);
    }

    #[test]
    fn heavy_tail_shape() {
        let cfg = HeavyTailConfig { classes: 40, head: 40, exponent: 1.0, test_per_class: 1, pool: 2500 };
        let h = heavy_tail_corpus(&cfg, 2);
        assert_eq!(h.counts.len(), 40);
        let counts: Vec<usize> = h.counts.iter().map(|c| c.1).collect();
        assert_eq!(counts[0], 40);
        assert!(counts.iter().rev().take(10).all(|&c| c <= 4));
        assert_eq!(h.train.len(), counts.iter().sum::<usize>());
    }
}
