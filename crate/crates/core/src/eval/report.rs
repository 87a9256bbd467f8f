//! Plain-text tables and SVG plots for evaluation reports.

use super::{EvalReport, KS};
use std::fmt::Write;

fn row(out: &mut String, name: &str, m: &std::collections::BTreeMap<usize, f64>) {
    let _ = write!(out, "{name:<14}");
    for k in KS {
        let _ = write!(out, " {:>7.3}", m.get(&k).copied().unwrap_or(0.0));
    }
    out.push('\n');
}

/// Human-readable summary of a report.
pub fn table(r: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "cases {}  skipped {}  zero-shot {}  rerank {}  gold class {}  gold profile {}",
        r.cases, r.skipped, r.zero_shot, r.options.rerank, r.options.gold_class, r.options.gold_profile
    );
    let _ = writeln!(out, "{:<14} {:>7} {:>7} {:>7}", "metric", "@1", "@3", "@5");
    row(&mut out, "Pred", &r.pred_at);
    row(&mut out, "Rep", &r.rep_at);
    row(&mut out, "Top class", &r.top_class_at);
    row(&mut out, "Top errorID", &r.top_error_at);
    row(&mut out, "Top tokens", &r.top_tokens_at);
    let _ = writeln!(out, "MAP {:.3}  mean Hamming {:.3}", r.map, r.mean_hamming);
    let _ = writeln!(out, "line deletion: Rep {:.3}  Pred@1 {:.3}", r.kali_rep, r.kali_pred1);
    let _ = writeln!(out, "{:<10} {:>8} {:>6} {:>7} {:>7}", "stratum", "classes", "cases", "Pred@1", "Rep@5");
    for s in &r.strata {
        let _ = writeln!(out, "{:<10} {:>8} {:>6} {:>7.3} {:>7.3}", s.name, s.classes, s.cases, s.pred1, s.rep5);
    }
    if let Some(t) = &r.timing {
        if let Some(train) = t.train_seconds {
            let _ = write!(out, "train {train:.2}s  ");
        }
        let _ = writeln!(out, "predict {:.4}s per program", t.mean_predict_seconds);
    }
    out
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(title: &str, x_label: &str, y_label: &str, body: &str) -> String {
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{cx}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{t}</text>\n",
            "<line x1=\"{p}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
            "<line x1=\"{p}\" y1=\"{p}\" x2=\"{p}\" y2=\"{b}\" stroke=\"black\"/>\n",
            "<text x=\"{cx}\" y=\"{xl}\" text-anchor=\"middle\">{xlab}</text>\n",
            "<text x=\"14\" y=\"{cy}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {cy})\">{ylab}</text>\n",
            "{body}</svg>\n"
        ),
        w = W,
        h = H,
        cx = W / 2.0,
        cy = H / 2.0,
        t = escape(title),
        p = PAD,
        b = H - PAD,
        r = W - PAD,
        xl = H - 12.0,
        xlab = escape(x_label),
        ylab = escape(y_label),
        body = body
    )
}

/// Bars of `values` scaled to `max`, one per entry, left to right.
fn bars(values: &[f64], max: f64, colors: &[&str]) -> String {
    let n = values.len().max(1) as f64;
    let (pw, ph) = (W - 2.0 * PAD, H - 2.0 * PAD);
    let bw = pw / n;
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        let h = if max > 0.0 { ph * (v / max).clamp(0.0, 1.0) } else { 0.0 };
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            PAD + i as f64 * bw,
            H - PAD - h,
            (bw * 0.9).max(0.5),
            h,
            colors[i % colors.len()]
        );
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.2}</text>", PAD - 4.0, PAD + 4.0, max);
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">0</text>", PAD - 4.0, H - PAD);
    out
}

/// Training count per class in popularity order.
pub fn frequency_svg(counts: &[usize]) -> String {
    let vals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let max = vals.iter().cloned().fold(0.0, f64::max);
    frame("Training examples per repair class", "class (by popularity)", "examples", &bars(&vals, max, &["#4c72b0"]))
}

/// Pred@1 and Rep@5 per evaluated class, coloured by stratum.
pub fn class_hits_svg(r: &EvalReport, metric: &str) -> String {
    let vals: Vec<f64> = r.per_class.iter().map(|c| if metric == "rep5" { c.rep5 } else { c.pred1 }).collect();
    let colors: Vec<&str> = r
        .per_class
        .iter()
        .map(|c| match c.class {
            c if c < super::HEAD_END => "#4c72b0",
            c if c < super::TORSO_END => "#dd8452",
            _ => "#55a868",
        })
        .collect();
    let mut body = String::new();
    let n = vals.len().max(1) as f64;
    let bw = (W - 2.0 * PAD) / n;
    for (i, (v, c)) in vals.iter().zip(&colors).enumerate() {
        let h = (H - 2.0 * PAD) * v.clamp(0.0, 1.0);
        let _ = writeln!(
            body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{c}\"/>",
            PAD + i as f64 * bw,
            H - PAD - h,
            (bw * 0.9).max(0.5),
            h
        );
    }
    let _ = writeln!(body, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">1</text>", PAD - 4.0, PAD + 4.0);
    let label = if metric == "rep5" { "Rep@5" } else { "Pred@1" };
    frame(&format!("{label} per repair class (head, torso, tail)"), "class (by popularity)", label, &body)
}

/// Pred@k and Rep@k curves as grouped bars.
pub fn at_k_svg(r: &EvalReport) -> String {
    let mut vals = Vec::new();
    for k in KS {
        vals.push(r.pred_at.get(&k).copied().unwrap_or(0.0));
        vals.push(r.rep_at.get(&k).copied().unwrap_or(0.0));
    }
    frame("Pred@k and Rep@k for k = 1, 3, 5", "k", "rate", &bars(&vals, 1.0, &["#4c72b0", "#dd8452"]))
}
