//! Static SVG 1.1 documents: phase portrait and (d, A) region map.

use std::fmt::Write;

use hollingiv::model::{EquilibriumReport, RegionLabel, StabilityClass};
use hollingiv::ModelParams;

const W: f64 = 720.0;
const H: f64 = 540.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
    fn inside(&self, x: f64, y: f64) -> bool {
        x >= self.x.0 && x <= self.x.1 && y >= self.y.0 && y <= self.y.1
    }
}

fn header(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<title>{title}</title>\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (f.px(f.x.0), f.px(f.x.1), f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(s, "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>", x1 - x0, y0 - y1);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (vx, vy) = (f.x.0 + t * (f.x.1 - f.x.0), f.y.0 + t * (f.y.1 - f.y.0));
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>", f.px(vx), y0 + 16.0, tick(vx));
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>", x0 - 6.0, f.py(vy) + 4.0, tick(vy));
    }
    let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{xlabel}</text>", 0.5 * (x0 + x1), H - 18.0);
    let ym = 0.5 * (y0 + y1);
    let _ = writeln!(s, "<text x=\"14\" y=\"{ym:.2}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 14 {ym:.2})\">{ylabel}</text>");
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn polyline(s: &mut String, f: &Frame, pts: &[(f64, f64)], style: &str) {
    let mut run: Vec<String> = vec![];
    let flush = |run: &mut Vec<String>, s: &mut String| {
        if run.len() > 1 {
            let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" {style}/>", run.join(" "));
        }
        run.clear();
    };
    let mut last = (f64::NAN, f64::NAN);
    for (k, &(x, y)) in pts.iter().enumerate() {
        if f.inside(x, y) {
            let (u, v) = (f.px(x), f.py(y));
            if run.is_empty() || (u - last.0).hypot(v - last.1) >= 0.5 || k + 1 == pts.len() {
                run.push(format!("{u:.2},{v:.2}"));
                last = (u, v);
            }
        } else {
            flush(&mut run, s);
        }
    }
    flush(&mut run, s);
}

fn stability_color(c: StabilityClass) -> &'static str {
    match c {
        StabilityClass::StableNode => "#1a7f37",
        StabilityClass::StableFocus => "#2da44e",
        StabilityClass::UnstableNode => "#cf222e",
        StabilityClass::UnstableFocus => "#fa4549",
        StabilityClass::Saddle => "#0969da",
        StabilityClass::NonHyperbolic(_) => "#8250df",
    }
}

pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub stable: bool,
}

pub struct Portrait<'a> {
    pub params: &'a ModelParams,
    pub x_max: f64,
    pub y_max: f64,
    pub equilibria: &'a [EquilibriumReport],
    pub interior_roots: Option<(f64, f64)>,
    pub trajectories: &'a [Vec<(f64, f64)>],
    pub cycles: &'a [Curve],
}

pub fn portrait(p: &Portrait) -> String {
    let f = Frame { x: (0.0, p.x_max), y: (0.0, p.y_max) };
    let prm = p.params;
    let mut s = header(&format!("Phase portrait K={} A={} a={} b={} d={}", prm.K, prm.A, prm.a, prm.b, prm.d));
    axes(&mut s, &f, "x (prey)", "y");
    let n = 600;
    let g: Vec<(f64, f64)> = (0..=n).map(|i| p.x_max * i as f64 / n as f64).map(|x| (x, prm.G(x))).collect();
    polyline(&mut s, &f, &g, "stroke=\"#9a6700\" stroke-width=\"1.2\"");
    if let Some((al, be)) = p.interior_roots {
        for x in [al, be] {
            if x <= p.x_max {
                polyline(&mut s, &f, &[(x, 0.0), (x, p.y_max)], "stroke=\"#9a6700\" stroke-width=\"1\" stroke-dasharray=\"5,4\"");
            }
        }
    }
    for t in p.trajectories {
        polyline(&mut s, &f, t, "stroke=\"#57606a\" stroke-width=\"0.8\"");
    }
    for c in p.cycles {
        let style = if c.stable {
            "stroke=\"#d1242f\" stroke-width=\"2.2\""
        } else {
            "stroke=\"#d1242f\" stroke-width=\"2.2\" stroke-dasharray=\"6,4\""
        };
        polyline(&mut s, &f, &c.points, style);
    }
    for e in p.equilibria {
        let (x, y) = e.location;
        if f.inside(x, y) {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{}\" stroke=\"black\"><title>{:?} {:?}</title></circle>",
                f.px(x),
                f.py(y),
                stability_color(e.stability),
                e.kind,
                e.stability
            );
        }
    }
    let legend = [
        (StabilityClass::StableNode, "stable node"),
        (StabilityClass::StableFocus, "stable focus"),
        (StabilityClass::UnstableNode, "unstable node"),
        (StabilityClass::UnstableFocus, "unstable focus"),
        (StabilityClass::Saddle, "saddle"),
    ];
    for (i, (c, name)) in legend.iter().enumerate() {
        let y = MARGIN + 10.0 + 16.0 * i as f64;
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{}\" stroke=\"black\"/>", W - MARGIN - 110.0, stability_color(*c));
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{name}</text>", W - MARGIN - 100.0, y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

fn region_color(r: &RegionLabel) -> &'static str {
    match r {
        RegionLabel::V0_1 => "#c6dbef",
        RegionLabel::V0_2 => "#9ecae1",
        RegionLabel::V0_3 => "#6baed6",
        RegionLabel::V0_4 => "#e7e7e7",
        RegionLabel::Valpha => "#fdae6b",
        RegionLabel::Vbeta => "#a1d99b",
        RegionLabel::ValphaBeta => "#fd8d3c",
        RegionLabel::Boundary(_) => "#252525",
    }
}

/// Cells `(d, A, label)` on a regular grid, row by row in `A`.
pub fn region_map(cells: &[(f64, f64, RegionLabel)], d: (f64, f64, usize), allee: (f64, f64, usize), title: &str) -> String {
    let f = Frame { x: (d.0, d.1), y: (allee.0, allee.1) };
    let mut s = header(title);
    let cw = (W - 2.0 * MARGIN) / d.2.max(1) as f64;
    let ch = (H - 2.0 * MARGIN) / allee.2.max(1) as f64;
    let step = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let (sd, sa) = (step(d.0, d.1, d.2), step(allee.0, allee.1, allee.2));
    let index = |v: f64, lo: f64, st: f64| if st > 0.0 { ((v - lo) / st).round() } else { 0.0 };
    let mut k = 0;
    while k < cells.len() {
        let (dd, aa, r) = &cells[k];
        let (i, j) = (index(*dd, d.0, sd), index(*aa, allee.0, sa));
        let mut len = 1;
        while k + len < cells.len() && cells[k + len].2 == *r && index(cells[k + len].1, allee.0, sa) == j {
            len += 1;
        }
        let x = MARGIN + i * cw;
        let y = H - MARGIN - (j + 1.0) * ch;
        let _ = writeln!(s, "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>", len as f64 * cw + 0.3, ch + 0.3, region_color(r));
        k += len;
    }
    axes(&mut s, &f, "d", "A");
    let mut seen: Vec<(String, &RegionLabel)> = vec![];
    for (_, _, r) in cells {
        if !seen.iter().any(|(n, _)| *n == r.name()) {
            seen.push((r.name(), r));
        }
    }
    let lx = W - MARGIN - 170.0;
    let _ = writeln!(s, "<rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"164\" height=\"{:.2}\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"black\"/>", MARGIN + 4.0, 16.0 * seen.len() as f64 + 6.0);
    for (i, (name, r)) in seen.iter().enumerate() {
        let y = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(s, "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\" stroke=\"black\"/>", lx + 6.0, y - 8.0, region_color(r));
        let _ = writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{name}</text>", lx + 22.0, y + 1.0);
    }
    s.push_str("</svg>\n");
    s
}
