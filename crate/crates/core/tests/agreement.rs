//! Mock diagnostics against a real clang, when one is installed.

use fixline_core::compiler::{Compiler, ExternalCompiler, MockCompiler};
use fixline_core::synth::fixture_corpus;
use std::path::Path;

const CLANG: &str = "/usr/bin/clang";

#[test]
fn mock_agrees_with_clang_on_single_errors() {
    if !Path::new(CLANG).exists() {
        eprintln!("skipped: {CLANG} not found");
        return;
    }
    let clang = ExternalCompiler::new(&format!("{CLANG} -fsyntax-only -include stdio.h -x c")).unwrap();
    let mock = MockCompiler::default();
    let (mut agree, mut total) = (0, 0);
    let mut misses = Vec::new();
    for p in fixture_corpus(300, 13) {
        let prog = p.source_lines();
        let m = mock.compile(&prog).unwrap();
        if m.len() != 1 {
            continue;
        }
        let c = clang.compile(&prog).unwrap();
        total += 1;
        if c.first().map(|d| &d.error_id) == Some(&m[0].error_id) {
            agree += 1;
        } else {
            misses.push(format!(
                "{} mock {} clang {:?}",
                p.label(0),
                m[0].error_id,
                c.first().map(|d| (&d.error_id, &d.message))
            ));
        }
    }
    let rate = agree as f64 / total.max(1) as f64;
    println!("errorID agreement {agree}/{total} = {rate:.3}");
    for m in misses.iter().take(20) {
        println!("  {m}");
    }
    assert!(total >= 100);
    assert!(rate >= 0.9);
}
