//! Static two-panel figure: efficiency box plots per checkpoint and the
//! `n·MSE` diagonals against `n` with the asymptotic variances.

use super::harness::SimSummary;
use super::stats::fmt_g;
use std::fmt::Write;

const W: f64 = 960.0;
const H: f64 = 420.0;
const PANEL_W: f64 = 400.0;
const PANEL_H: f64 = 300.0;
const TOP: f64 = 50.0;
const LEFT: [f64; 2] = [70.0, 550.0];
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn num(v: f64) -> String {
    fmt_g(v, 6)
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Axis { lo, hi }
        } else {
            Axis {
                lo: lo - 0.5,
                hi: lo + 0.5,
            }
        }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + PANEL_H * (1.0 - (v - self.lo) / (self.hi - self.lo))
    }
}

fn frame(out: &mut String, left: f64, title: &str, axis: &Axis) {
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(left),
        num(TOP),
        num(PANEL_W),
        num(PANEL_H)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        num(left + PANEL_W / 2.0),
        num(TOP - 15.0),
        title
    );
    for i in 0..=4 {
        let v = axis.lo + (axis.hi - axis.lo) * i as f64 / 4.0;
        let y = axis.y(v);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/><text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#,
            num(left - 5.0),
            num(y),
            num(left),
            num(y),
            num(left - 8.0),
            num(y + 4.0),
            fmt_g(v, 4)
        );
    }
}

/// Renders the figure; identical summaries give identical bytes.
pub fn render(s: &SimSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif">"#,
        W, H, W, H
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // efficiency box plots
    let lo = s
        .checkpoints
        .iter()
        .map(|c| c.efficiency.min)
        .fold(1.0, f64::min)
        .max(0.0);
    let eff = Axis::new((lo * 10.0).floor() / 10.0, 1.0);
    frame(&mut out, LEFT[0], "D-efficiency", &eff);
    let m = s.checkpoints.len() as f64;
    let slot = PANEL_W / m;
    let half = (slot * 0.3).min(20.0);
    for (i, c) in s.checkpoints.iter().enumerate() {
        let x = LEFT[0] + slot * (i as f64 + 0.5);
        let q = &c.efficiency;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><rect x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.4" stroke="black"/><line x1="{}" y1="{m}" x2="{}" y2="{m}" stroke="black" stroke-width="2"/>"#,
            num(eff.y(q.max)),
            num(eff.y(q.min)),
            num(x - half),
            num(eff.y(q.q75)),
            num(2.0 * half),
            num(eff.y(q.q25) - eff.y(q.q75)),
            COLORS[0],
            num(x - half),
            num(x + half),
            x = num(x),
            m = num(eff.y(q.median)),
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            num(x),
            num(TOP + PANEL_H + 15.0),
            c.n
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">n</text>"#,
        num(LEFT[0] + PANEL_W / 2.0),
        num(TOP + PANEL_H + 35.0)
    );

    // n·MSE diagonals
    let p = s.reference.m_star_inv.len();
    let diag = |c: &super::harness::CheckpointSummary, j: usize| c.n_mse[j][j];
    let mut hi = (0..p)
        .map(|j| s.reference.m_star_inv[j][j])
        .fold(0.0, f64::max);
    for c in &s.checkpoints {
        for j in 0..p {
            hi = hi.max(diag(c, j));
        }
    }
    let mse = Axis::new(0.0, hi * 1.1);
    frame(&mut out, LEFT[1], "n times MSE", &mse);
    let n_max = s.checkpoints.last().map_or(1, |c| c.n) as f64;
    let xs = |n: usize| LEFT[1] + PANEL_W * n as f64 / n_max;
    for j in 0..p {
        let color = COLORS[j % COLORS.len()];
        let pts: Vec<String> = s
            .checkpoints
            .iter()
            .map(|c| format!("{},{}", num(xs(c.n)), num(mse.y(diag(c, j)))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        let y = mse.y(s.reference.m_star_inv[j][j]);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-dasharray="6,4"/><text x="{}" y="{}" font-size="11" fill="{color}">theta{}</text>"#,
            num(LEFT[1]),
            num(y),
            num(LEFT[1] + PANEL_W),
            num(y),
            num(LEFT[1] + PANEL_W + 5.0),
            num(y + 4.0),
            j + 1
        );
    }
    for c in &s.checkpoints {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="10">{}</text>"#,
            num(xs(c.n)),
            num(TOP + PANEL_H + 15.0),
            c.n
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}
