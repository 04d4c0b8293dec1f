//! Focus quantities at `E_α` via the Liénard form
//!
//! ```text
//! x' = φ(y) - F(x),  y' = -g(x)
//! φ(y) = G(α)(e^y - 1),  F(x) = G(α - x) - G(α),  g(x) = d / p(α - x) - 1
//! ```
//!
//! and the involution `θ` with `H(θ(x)) = H(x)`, `H = ∫ g`. The coefficients
//! of `F(θ(x)) - F(x)` are the `B_i`.

use serde::{Deserialize, Serialize};

use crate::ddouble::{parse_dd, DD};
use crate::error::{Error, Result};
use crate::model::{self, eval_pG, ModelParams};
use crate::series::{involution_solve, TruncatedSeries, DEFAULT_ORDER};

pub const FOCUS_TOL: f64 = 1e-9;
pub const DUAL_PATH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LienardData {
    pub alpha: f64,
    pub phi_series: TruncatedSeries,
    #[serde(rename = "F_series")]
    pub f_series: TruncatedSeries,
    pub g_series: TruncatedSeries,
    #[serde(rename = "H_series")]
    pub h_series: TruncatedSeries,
    /// `H` carried one degree further, which pins down the last `θ` coefficient.
    #[serde(skip)]
    h_ext: Option<TruncatedSeries>,
}

pub fn lienard_convert(params: &ModelParams) -> Result<LienardData> {
    lienard_convert_order(params, DEFAULT_ORDER)
}

pub fn lienard_convert_order(params: &ModelParams, order: usize) -> Result<LienardData> {
    let (alpha, _) = model::e_alpha(params).ok_or(Error::NoInteriorEquilibrium)?;
    let n = order;
    let (p, g_big) = eval_pG(params, alpha, n)?;
    let f_series = reflect(&g_big).add_const(-g_big.coeff(0));
    let g_series = reflect(&p).recip()?.scale(params.d).add_const(-1.0);
    let mut h = vec![0.0; n + 2];
    for k in 1..=n + 1 {
        h[k] = g_series.coeff(k - 1) / k as f64;
    }
    let h_ext = TruncatedSeries::new(h, n + 1);
    let galpha = g_big.coeff(0);
    let mut phi = vec![0.0; n + 1];
    let mut fact = 1.0;
    for (k, c) in phi.iter_mut().enumerate().skip(1) {
        fact *= k as f64;
        *c = galpha / fact;
    }
    let data = LienardData {
        alpha,
        phi_series: TruncatedSeries::new(phi, n),
        f_series,
        h_series: h_ext.truncate(n),
        g_series,
        h_ext: Some(h_ext),
    };
    let g0 = data.g_series.coeff(0);
    if g0.abs() > 1e-10 {
        return Err(Error::Consistency { what: "g(0) = d/p(alpha) - 1".into(), discrepancy: g0.abs() });
    }
    if !(data.phi_series.coeff(1) > 0.0) {
        return Err(Error::Consistency { what: "phi'(0) = G(alpha) must be positive".into(), discrepancy: galpha });
    }
    if !(data.g_series.coeff(1) > 0.0) {
        return Err(Error::Consistency { what: "g'(0) must be positive".into(), discrepancy: data.g_series.coeff(1) });
    }
    Ok(data)
}

impl LienardData {
    pub fn h_extended(&self) -> TruncatedSeries {
        self.h_ext.clone().unwrap_or_else(|| self.h_series.clone())
    }
}

/// `f(α - x)` from the expansion of `f` at `α`.
fn reflect(s: &TruncatedSeries) -> TruncatedSeries {
    let c = s.coeffs().iter().enumerate().map(|(k, v)| if k % 2 == 1 { -v } else { *v }).collect();
    TruncatedSeries::from_coeffs(c)
}

/// `H(x) = -d (a x²/2 + x/α + ln((α - x)/α))` expanded at 0.
pub fn h_closed_form(a: f64, alpha: f64, d: f64, order: usize) -> TruncatedSeries {
    let mut c = vec![0.0; order + 1];
    if order >= 2 {
        c[2] = d * (1.0 - a * alpha * alpha) / (2.0 * alpha * alpha);
    }
    for (k, ck) in c.iter_mut().enumerate().skip(3) {
        *ck = d / (k as f64 * alpha.powi(k as i32));
    }
    TruncatedSeries::new(c, order)
}

/// `μ_2..μ_6`.
pub fn mu_closed(a: f64, alpha: f64) -> [f64; 5] {
    let m = -2.0 / (3.0 * alpha * (1.0 - a * alpha * alpha));
    let al = alpha;
    [
        m,
        -m * m,
        m * (2.0 * m * m + 3.0 * m / (2.0 * al) + 3.0 / (5.0 * al * al)),
        -m * m * (4.0 * m * m + 9.0 * m / (2.0 * al) + 9.0 / (5.0 * al * al)),
        m * (9.0 * m.powi(4) + 57.0 * m.powi(3) / (4.0 * al) + 177.0 * m * m / (20.0 * al * al) + 12.0 * m / (5.0 * al.powi(3)) + 3.0 / (7.0 * al.powi(4))),
    ]
}

/// Closed forms of `B_1..B_7` from `G', G'', G'''` at `α`. Entry `i` is
/// valid once the earlier odd coefficients vanish.
pub fn b_closed(a: f64, alpha: f64, g1: f64, g2: f64, g3: f64) -> [f64; 7] {
    let m = -2.0 / (3.0 * alpha * (1.0 - a * alpha * alpha));
    let al2 = alpha * alpha;
    let t3 = g3 - 3.0 * m * g2;
    let t5 = (5.0 * m * alpha + 2.0) * g3 - 40.0 * a * m * al2;
    [2.0 * g1, -m * g1, t3 / 3.0, -m / 2.0 * t3, -t5 / (10.0 * al2), m / (4.0 * al2) * t5, b7_closed(a, alpha)]
}

/// `B_7` on the locus `B_1 = B_3 = B_5 = 0`; negative for all admissible `a, α`.
pub fn b7_closed(a: f64, alpha: f64) -> f64 {
    let aa = a * alpha * alpha;
    -96.0 * a * (6.0 * aa * aa + 23.0 * aa + 6.0) / (630.0 * alpha.powi(3) * (1.0 - aa).powi(2) * (2.0 + 3.0 * aa))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FocusStability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusReport {
    /// `μ_2..μ_6` from the closed forms.
    pub mu: [f64; 5],
    /// `θ_2..θ_6` from the involution solve.
    pub mu_series: [f64; 5],
    /// `B_1..B_7` from `F∘θ - F`.
    #[serde(rename = "B")]
    pub b: [f64; 7],
    /// Closed forms, present where their vanishing conditions hold.
    #[serde(rename = "B_closed")]
    pub b_closed: [Option<f64>; 7],
    /// Natural magnitude of each `B_i`, used for zero tests and relative errors.
    #[serde(rename = "B_scale")]
    pub b_scale: [f64; 7],
    pub max_mu_discrepancy: f64,
    pub max_b_discrepancy: f64,
    /// Weak-focus order `k` (0 for a hyperbolic focus).
    pub order: Option<usize>,
    pub codim: usize,
    pub stability_of_focus: Option<FocusStability>,
    pub tolerance: f64,
}

pub fn focus_quantities(params: &ModelParams) -> Result<FocusReport> {
    let lien = lienard_convert(params)?;
    let (_, g_big) = eval_pG(params, lien.alpha, DEFAULT_ORDER)?;
    focus_from_parts(params.a, lien.alpha, &g_big, &lien.h_extended())
}

/// Focus quantities from the expansion of `G` at `α` (order `N`) and of `H`
/// at 0 (order `N + 1`).
pub fn focus_from_parts(a: f64, alpha: f64, g_at_alpha: &TruncatedSeries, h_ext: &TruncatedSeries) -> Result<FocusReport> {
    let n = g_at_alpha.order();
    let theta = involution_solve(h_ext)?.truncate(n);
    let f = reflect(g_at_alpha).add_const(-g_at_alpha.coeff(0));
    let fth = f.compose(&theta)?;
    let bser = fth.try_sub(&f)?;
    let absf = TruncatedSeries::from_coeffs(f.coeffs().iter().map(|c| c.abs()).collect());
    let absth = TruncatedSeries::from_coeffs(theta.coeffs().iter().map(|c| c.abs()).collect());
    let mag = absf.compose(&absth)?.try_add(&absf)?;

    let mut b = [0.0; 7];
    let mut b_scale = [0.0; 7];
    for i in 0..7 {
        b[i] = bser.coeff(i + 1);
        b_scale[i] = mag.coeff(i + 1);
    }
    let zero = |i: usize| b[i].abs() < FOCUS_TOL * b_scale[i].max(1.0);

    let mu = mu_closed(a, alpha);
    let mut mu_series = [0.0; 5];
    let mut max_mu = 0.0f64;
    for i in 0..5 {
        mu_series[i] = theta.coeff(i + 2);
        max_mu = max_mu.max((mu_series[i] - mu[i]).abs() / mu[i].abs());
    }

    let g1 = g_at_alpha.derivative_at(1);
    let g2 = g_at_alpha.derivative_at(2);
    let g3 = g_at_alpha.derivative_at(3);
    let closed = b_closed(a, alpha, g1, g2, g3);
    let mut b_closed_opt = [None; 7];
    b_closed_opt[0] = Some(closed[0]);
    b_closed_opt[1] = Some(closed[1]);
    if zero(0) {
        b_closed_opt[2] = Some(closed[2]);
        b_closed_opt[3] = Some(closed[3]);
        if zero(2) {
            b_closed_opt[4] = Some(closed[4]);
            b_closed_opt[5] = Some(closed[5]);
            if zero(4) {
                b_closed_opt[6] = Some(closed[6]);
            }
        }
    }
    let mut max_b = 0.0f64;
    for i in 0..7 {
        if let Some(c) = b_closed_opt[i] {
            let scale = c.abs().max(b_scale[i]).max(f64::MIN_POSITIVE);
            max_b = max_b.max((b[i] - c).abs() / scale);
        }
    }
    if max_mu > DUAL_PATH_TOL {
        return Err(Error::Consistency { what: "mu closed form vs involution".into(), discrepancy: max_mu });
    }
    if max_b > DUAL_PATH_TOL {
        return Err(Error::Consistency { what: "B closed form vs series".into(), discrepancy: max_b });
    }

    let mut order = None;
    for k in 0..4 {
        if !zero(2 * k) {
            order = Some(k);
            break;
        }
    }
    let codim = order.unwrap_or(3).min(3);
    let stability_of_focus = order.map(|k| if b[2 * k] < 0.0 { FocusStability::Stable } else { FocusStability::Unstable });
    Ok(FocusReport {
        mu,
        mu_series,
        b,
        b_closed: b_closed_opt,
        b_scale,
        max_mu_discrepancy: max_mu,
        max_b_discrepancy: max_b,
        order,
        codim,
        stability_of_focus,
        tolerance: FOCUS_TOL,
    })
}

/// `∂Re λ/∂d` at `E_α`: closed form `p G'' q / (2 sqrt((bd-1)² - 4ad²))` and
/// a central difference of `p(α) G'(α) / 2`.
pub fn hopf_transversality(params: &ModelParams) -> Result<(f64, f64)> {
    let (alpha, _) = model::e_alpha(params).ok_or(Error::NoInteriorEquilibrium)?;
    let (_, g) = eval_pG(params, alpha, 3)?;
    let (a, b, d) = (params.a, params.b, params.d);
    let disc = (b * d - 1.0).powi(2) - 4.0 * a * d * d;
    let closed = params.p(alpha) * g.derivative_at(2) * params.quad(alpha) / (2.0 * disc.sqrt());
    let re = |dd: f64| -> Result<f64> {
        let q = params.with_d(dd);
        let (al, _) = model::e_alpha(&q).ok_or(Error::NoInteriorEquilibrium)?;
        Ok(0.5 * q.p(al) * q.dG(al))
    };
    let h = 1e-6 * d;
    Ok((closed, (re(d + h)? - re(d - h)?) / (2.0 * h)))
}

/// `b(K, α)` solving `B_5 = 0` with `A = 0`.
pub fn hopf_locus_b(k: f64, alpha: f64, a: f64) -> f64 {
    hopf_locus_b_dd(DD::from(k), DD::from(alpha), DD::from(a)).to_f64()
}

pub fn hopf_locus_b_dd(k: DD, al: DD, a: DD) -> DD {
    let num = a * (a * k * al * al * 9.0 - a * al * al * al * 36.0 + k * 6.0 - al * 44.0);
    num / ((a * al * al * 3.0 + 2.0) * 3.0)
}

/// Variant with `aKα²` in place of `9aKα²` and `aα² + 2` in place of
/// `3aα² + 2`. It does not zero `B_5`; kept for comparison only.
pub fn hopf_locus_b_reference(k: f64, alpha: f64, a: f64) -> f64 {
    a * (a * k * alpha * alpha - 36.0 * a * alpha.powi(3) + 6.0 * k - 44.0 * alpha) / (3.0 * (a * alpha * alpha + 2.0))
}

/// `C_1 = G'(α)` on the `A = 0`, `B_5 = 0` surface.
pub fn c1(k: DD, al: DD, a: DD) -> DD {
    let (k2, al2) = (k * k, al * al);
    let al3 = al2 * al;
    let t2 = (k2 * al3 * 18.0 - k * al2 * al2 * 72.0 + al3 * al2 * 72.0) * a * a;
    let t1 = (k2 * al * 12.0 - k * al2 * 79.0 + al3 * 90.0) * a;
    (t2 + t1 + k * 6.0 - al * 12.0) / (a * al2 * 9.0 + 6.0)
}

/// `C_2`, a positive multiple of `B_3` on the same surface.
pub fn c2(k: DD, al: DD, a: DD) -> DD {
    let (k2, al2) = (k * k, al * al);
    let t2 = (k2 * al2 * 18.0 - k * al2 * al * 72.0 + al2 * al2 * 48.0) * a * a;
    let t1 = (k2 * 12.0 - k * al * 88.0 + al2 * 234.0) * a;
    (t2 + t1 - 12.0) / (a * al2 * 9.0 + 6.0)
}

/// `G', G'', G'''` at `α` for `A = 0`, `G = x (K - x)(a x² + b x + 1)`.
fn g_derivs_a0(k: DD, al: DD, b: DD, a: DD) -> [DD; 3] {
    let q = a * al * al + b * al + 1.0;
    let q1 = a * al * 2.0 + b;
    let q2 = a * 2.0;
    let (u, v) = (al, k - al);
    let g1 = v * q - u * q + u * v * q1;
    let g2 = q * (-2.0) + (v - u) * q1 * 2.0 + u * v * q2;
    let g3 = q1 * (-6.0) + (v - u) * q2 * 3.0;
    [g1, g2, g3]
}

/// Closed-form `(B_1, B_3, B_5)` at `A = 0` in double-double.
pub fn b135(k: DD, al: DD, b: DD, a: DD) -> [DD; 3] {
    let [g1, g2, g3] = g_derivs_a0(k, al, b, a);
    let m = DD::from(-2.0) / (al * (DD::ONE - a * al * al) * 3.0);
    let b1 = g1 * 2.0;
    let b3 = (g3 - m * g2 * 3.0) / 3.0;
    let b5 = -((m * al * 5.0 + 2.0) * g3 - a * m * al * al * 40.0) / (al * al * 10.0);
    [b1, b3, b5]
}

/// `det ∂(B_1, B_3, B_5)/∂(K, α, b)` at `b = b(K, α)`.
pub fn jacobian_j(k: DD, al: DD, a: DD) -> f64 {
    let b = hopf_locus_b_dd(k, al, a);
    let base = [k, al, b];
    let mut jm = [[0.0; 3]; 3];
    for j in 0..3 {
        let h = base[j].abs() * 1e-9;
        let mut vp = base;
        let mut vm = base;
        vp[j] = vp[j] + h;
        vm[j] = vm[j] - h;
        let bp = b135(vp[0], vp[1], vp[2], a);
        let bm = b135(vm[0], vm[1], vm[2], a);
        for i in 0..3 {
            jm[i][j] = ((bp[i] - bm[i]) / (h * 2.0)).to_f64();
        }
    }
    det3(&jm)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub k: (DD, DD),
    pub alpha: (DD, DD),
}

impl Rectangle {
    /// `K ∈ [71.75583310, 71.75583315]`, `α ∈ [24.53545865, 24.53545867]`.
    pub fn pqrs() -> Self {
        let p = |s| parse_dd(s).expect("literal");
        Self { k: (p("71.75583310"), p("71.75583315")), alpha: (p("24.53545865"), p("24.53545867")) }
    }

    fn lerp(lo: DD, hi: DD, t: f64) -> DD {
        lo + (hi - lo) * t
    }

    fn centre(&self) -> (DD, DD) {
        (Self::lerp(self.k.0, self.k.1, 0.5), Self::lerp(self.alpha.0, self.alpha.1, 0.5))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCheck {
    pub condition: String,
    pub expected_sign: f64,
    pub min: f64,
    pub max: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    pub checks: Vec<EdgeCheck>,
    pub holds: bool,
    pub samples_per_edge: usize,
}

fn edge_check<F: Fn(f64) -> DD>(condition: &str, sign: f64, n: usize, f: F) -> EdgeCheck {
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64).to_f64()).collect();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let holds = if sign > 0.0 { min > 0.0 } else { max < 0.0 };
    EdgeCheck { condition: condition.into(), expected_sign: sign, min, max, holds }
}

/// The four edge sign conditions on `C_1`, `C_2` as stated for the
/// rectangle: `C_2 > 0` on `K = K_0`, `C_2 < 0` on `K = K_1`, `C_1 > 0` on
/// `α = α_0`, `C_1 < 0` on `α = α_1`.
pub fn sign_table(a: f64, rect: &Rectangle, n: usize) -> SignTable {
    let a = DD::from(a);
    let (k0, k1) = rect.k;
    let (a0, a1) = rect.alpha;
    let al = |t| Rectangle::lerp(a0, a1, t);
    let kk = |t| Rectangle::lerp(k0, k1, t);
    let checks = vec![
        edge_check("C2 > 0 on K = K0", 1.0, n, |t| c2(k0, al(t), a)),
        edge_check("C2 < 0 on K = K1", -1.0, n, |t| c2(k1, al(t), a)),
        edge_check("C1 > 0 on alpha = alpha0", 1.0, n, |t| c1(kk(t), a0, a)),
        edge_check("C1 < 0 on alpha = alpha1", -1.0, n, |t| c1(kk(t), a1, a)),
    ];
    let holds = checks.iter().all(|c| c.holds);
    SignTable { checks, holds, samples_per_edge: n + 1 }
}

fn c_jacobian(k: DD, al: DD, a: DD) -> [[f64; 2]; 2] {
    let hk = k * 1e-10;
    let ha = al * 1e-10;
    let dk = |f: fn(DD, DD, DD) -> DD| ((f(k + hk, al, a) - f(k - hk, al, a)) / (hk * 2.0)).to_f64();
    let da = |f: fn(DD, DD, DD) -> DD| ((f(k, al + ha, a) - f(k, al - ha, a)) / (ha * 2.0)).to_f64();
    [[dk(c1), da(c1)], [dk(c2), da(c2)]]
}

/// Sign table for `M⁻¹ (C_1, C_2)` with `M` the Jacobian at the centre:
/// first component `< 0` on `K = K_0` and `> 0` on `K = K_1`, second
/// `< 0` on `α = α_0` and `> 0` on `α = α_1`.
pub fn preconditioned_sign_table(a: f64, rect: &Rectangle, n: usize) -> SignTable {
    let a = DD::from(a);
    let (kc, ac) = rect.centre();
    let m = c_jacobian(kc, ac, a);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let g = move |k: DD, al: DD, row: usize| {
        let (u, v) = (c1(k, al, a), c2(k, al, a));
        u * inv[row][0] + v * inv[row][1]
    };
    let (k0, k1) = rect.k;
    let (a0, a1) = rect.alpha;
    let al = |t| Rectangle::lerp(a0, a1, t);
    let kk = |t| Rectangle::lerp(k0, k1, t);
    let checks = vec![
        edge_check("(M^-1 C)_1 < 0 on K = K0", -1.0, n, |t| g(k0, al(t), 0)),
        edge_check("(M^-1 C)_1 > 0 on K = K1", 1.0, n, |t| g(k1, al(t), 0)),
        edge_check("(M^-1 C)_2 < 0 on alpha = alpha0", -1.0, n, |t| g(kk(t), a0, 1)),
        edge_check("(M^-1 C)_2 > 0 on alpha = alpha1", 1.0, n, |t| g(kk(t), a1, 1)),
    ];
    let holds = checks.iter().all(|c| c.holds);
    SignTable { checks, holds, samples_per_edge: n + 1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hopf3Report {
    pub a: f64,
    pub k_star: f64,
    pub alpha_star: f64,
    /// Low parts of the double-double root.
    pub k_star_lo: f64,
    pub alpha_star_lo: f64,
    pub b_star: f64,
    pub b_reference_formula: f64,
    pub b_lower_bound: f64,
    pub d_star: f64,
    /// `|C_1|, |C_2|` at the root divided by their largest edge magnitudes.
    pub residuals: (f64, f64),
    pub edge_scale: (f64, f64),
    pub j_value: f64,
    /// Extremes of `J` and of `b(K, α)` on a 101×101 grid over the rectangle.
    pub j_grid_range: (f64, f64),
    pub b_grid_min: f64,
    pub reference_table: SignTable,
    pub preconditioned_table: SignTable,
    /// `B_7` at the root (closed form, locus value).
    pub b7: f64,
}

const EDGE_SAMPLES: usize = 400;

/// Certifies the reference sign table, then locates the interior root.
pub fn hopf3_search(a: f64) -> Result<Hopf3Report> {
    let rect = Rectangle::pqrs();
    let table = sign_table(a, &rect, EDGE_SAMPLES);
    if !table.holds {
        let failed: Vec<_> = table.checks.iter().filter(|c| !c.holds).map(|c| format!("{} (range [{:e}, {:e}])", c.condition, c.min, c.max)).collect();
        return Err(Error::Certification(failed.join("; ")));
    }
    locate(a, &rect, table)
}

/// Root location under the preconditioned certificate, for use when the
/// plain table is not sign-definite.
pub fn hopf3_locate(a: f64, rect: &Rectangle) -> Result<Hopf3Report> {
    let pre = preconditioned_sign_table(a, rect, EDGE_SAMPLES);
    if !pre.holds {
        let failed: Vec<_> = pre.checks.iter().filter(|c| !c.holds).map(|c| c.condition.clone()).collect();
        return Err(Error::Certification(failed.join("; ")));
    }
    locate(a, rect, sign_table(a, rect, EDGE_SAMPLES))
}

fn bisect_dd<F: Fn(DD) -> DD>(mut lo: DD, mut hi: DD, f: F) -> Result<DD> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo.signum() == fhi.signum() {
        return Err(Error::Certification(format!("no sign change: f(lo) = {:e}, f(hi) = {:e}", flo.to_f64(), fhi.to_f64())));
    }
    let neg_lo = flo.signum() < 0.0;
    for _ in 0..120 {
        let mid = (lo + hi) * 0.5;
        let fm = f(mid);
        if fm.signum() == 0.0 {
            return Ok(mid);
        }
        if (fm.signum() < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if ((hi - lo) / mid).abs().to_f64() < 1e-30 {
            break;
        }
    }
    Ok((lo + hi) * 0.5)
}

fn locate(a_f: f64, rect: &Rectangle, reference_table: SignTable) -> Result<Hopf3Report> {
    let a = DD::from(a_f);
    let (k0, k1) = rect.k;
    let (a0, a1) = rect.alpha;
    let alpha_of = |k: DD| bisect_dd(a0, a1, |al| c1(k, al, a));
    let g = |k: DD| -> DD {
        match alpha_of(k) {
            Ok(al) => c2(k, al, a),
            Err(_) => DD::from(f64::NAN),
        }
    };
    let k_star = bisect_dd(k0, k1, g)?;
    let al_star = alpha_of(k_star)?;
    let n = EDGE_SAMPLES;
    let edge_max = |f: &dyn Fn(f64) -> f64| (0..=n).map(|i| f(i as f64 / n as f64).abs()).fold(0.0, f64::max);
    let lerp = Rectangle::lerp;
    let s1 = edge_max(&|t| c1(lerp(k0, k1, t), a0, a).to_f64()).max(edge_max(&|t| c1(lerp(k0, k1, t), a1, a).to_f64()));
    let s2 = edge_max(&|t| c2(k0, lerp(a0, a1, t), a).to_f64()).max(edge_max(&|t| c2(k1, lerp(a0, a1, t), a).to_f64()));
    let r1 = c1(k_star, al_star, a).to_f64().abs() / s1;
    let r2 = c2(k_star, al_star, a).to_f64().abs() / s2;
    let b_star = hopf_locus_b_dd(k_star, al_star, a);
    let q = a * al_star * al_star + b_star * al_star + 1.0;
    let d_star = (al_star / q).to_f64();
    let j_value = jacobian_j(k_star, al_star, a);
    let mut jr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bmin = f64::INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            let k = lerp(k0, k1, i as f64 / 100.0);
            let al = lerp(a0, a1, j as f64 / 100.0);
            let jv = jacobian_j(k, al, a);
            jr = (jr.0.min(jv), jr.1.max(jv));
            bmin = bmin.min(hopf_locus_b_dd(k, al, a).to_f64());
        }
    }
    Ok(Hopf3Report {
        a: a_f,
        k_star: k_star.hi,
        alpha_star: al_star.hi,
        k_star_lo: k_star.lo,
        alpha_star_lo: al_star.lo,
        b_star: b_star.to_f64(),
        b_reference_formula: hopf_locus_b_reference(k_star.to_f64(), al_star.to_f64(), a_f),
        b_lower_bound: -2.0 * a_f.sqrt(),
        d_star,
        residuals: (r1, r2),
        edge_scale: (s1, s2),
        j_value,
        j_grid_range: jr,
        b_grid_min: bmin,
        reference_table,
        preconditioned_table: preconditioned_sign_table(a_f, rect, EDGE_SAMPLES),
        b7: b7_closed(a_f, al_star.to_f64()),
    })
}

/// A point of the codimension-3 Hopf locus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    #[serde(rename = "A")]
    pub allee: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub d: f64,
    pub b: f64,
    pub alpha: f64,
    pub b7: f64,
}

/// `(B_1, B_3, B_5)` closed forms at general `A`.
fn b135_general(params: &ModelParams) -> Option<([f64; 3], f64)> {
    let r = model::h_roots(params)?;
    if r.coalesced {
        return None;
    }
    let al = r.alpha;
    let (_, g) = eval_pG(params, al, 3).ok()?;
    let c = b_closed(params.a, al, g.derivative_at(1), g.derivative_at(2), g.derivative_at(3));
    Some(([c[0], c[2], c[4]], al))
}

/// Follows the locus `B_1 = B_3 = B_5 = 0` from an `A = 0` point to
/// `a_target`, with steps `|ΔA| ≤ step` and Newton corrections in `(K, d, b)`.
pub fn hopf3_continue(a: f64, start: (f64, f64, f64), a_target: f64, step: f64) -> Result<Vec<LocusPoint>> {
    let step = step.min(1e-3);
    let (mut k, mut d, mut b) = start;
    let mut allee = 0.0;
    let n = ((a_target - allee).abs() / step).ceil().max(1.0) as usize;
    let da = (a_target - allee) / n as f64;
    let mut out = vec![];
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..=n {
        let target = i as f64 * da;
        if let Some((pk, pd, pb)) = prev {
            // secant predictor
            let (dk, dd, db) = (k - pk, d - pd, b - pb);
            prev = Some((k, d, b));
            k += dk;
            d += dd;
            b += db;
        } else {
            prev = Some((k, d, b));
        }
        allee = target;
        let mut x = [k, d, b];
        let eval = |x: &[f64; 3]| -> Result<[f64; 3]> {
            let p = ModelParams { K: x[0], A: allee, a, b: x[2], d: x[1] };
            b135_general(&p).map(|v| v.0).ok_or(Error::NoInteriorEquilibrium)
        };
        for _ in 0..30 {
            let f0 = eval(&x)?;
            let mut jm = [[0.0; 3]; 3];
            for j in 0..3 {
                let h = 1e-7 * x[j].abs().max(1e-3);
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (fp, fm) = (eval(&xp)?, eval(&xm)?);
                for r in 0..3 {
                    jm[r][j] = (fp[r] - fm[r]) / (2.0 * h);
                }
            }
            let dx = solve3(&jm, &f0).ok_or_else(|| Error::Degenerate("singular locus Jacobian".into()))?;
            for j in 0..3 {
                x[j] -= dx[j];
            }
            if dx.iter().zip(&x).all(|(d, v)| d.abs() <= 1e-14 * v.abs().max(1.0)) {
                break;
            }
        }
        k = x[0];
        d = x[1];
        b = x[2];
        let p = ModelParams { K: k, A: allee, a, b, d };
        let (_, al) = b135_general(&p).ok_or(Error::NoInteriorEquilibrium)?;
        out.push(LocusPoint { allee, k, d, b, alpha: al, b7: b7_closed(a, al) });
    }
    Ok(out)
}

fn solve3(m: &[[f64; 3]; 3], r: &[f64; 3]) -> Option<[f64; 3]> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut out = [0.0; 3];
    for c in 0..3 {
        let mut mc = *m;
        for row in 0..3 {
            mc[row][c] = r[row];
        }
        out[c] = det3(&mc) / det;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution_example_alpha1_a_half() {
        let h = h_closed_form(0.5, 1.0, 3.0, 9);
        let th = involution_solve(&h).unwrap();
        assert!((th.coeff(2) + 4.0 / 3.0).abs() < 1e-13);
        assert!((th.coeff(3) + 16.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn corrected_locus_b_zeroes_b5() {
        let a = 0.00025573;
        for (k, al) in [(71.75, 24.53), (60.0, 20.0), (80.0, 30.0)] {
            let b = hopf_locus_b_dd(DD::from(k), DD::from(al), DD::from(a));
            let b5 = b135(DD::from(k), DD::from(al), b, DD::from(a))[2].to_f64();
            assert!(b5.abs() < 1e-25, "{b5}");
            let reference = hopf_locus_b_reference(k, al, a);
            let b5p = b135(DD::from(k), DD::from(al), DD::from(reference), DD::from(a))[2].to_f64();
            assert!(b5p.abs() > 1e-6);
        }
    }

    #[test]
    fn c1_is_half_b1() {
        let a = DD::from(0.00025573);
        let (k, al) = (DD::from(70.0), DD::from(25.0));
        let b = hopf_locus_b_dd(k, al, a);
        let b1 = b135(k, al, b, a)[0];
        assert!(((b1 / c1(k, al, a)).to_f64() - 2.0).abs() < 1e-25);
    }

    #[test]
    fn hopf3_root() {
        let a = 0.00025573;
        assert!(matches!(hopf3_search(a), Err(Error::Certification(_))));
        let r = hopf3_locate(a, &Rectangle::pqrs()).unwrap();
        assert!((r.k_star - 71.755833116708955).abs() < 1e-12);
        assert!((r.alpha_star - 24.535458659827834).abs() < 1e-12);
        assert!((r.b_star + 0.023738922355996).abs() < 1e-13);
        assert!((r.j_value / -1.0014372568e-5 - 1.0).abs() < 1e-6);
        assert!(r.residuals.0 < 1e-12 && r.residuals.1 < 1e-12);
        let p = ModelParams::new(r.k_star, 0.0, a, r.b_star, r.d_star).unwrap();
        let f = focus_quantities(&p).unwrap();
        assert_eq!(f.codim, 3);
        assert_eq!(f.stability_of_focus, Some(FocusStability::Stable));
        let (closed, fd) = hopf_transversality(&p).unwrap();
        assert!((closed / fd - 1.0).abs() < 1e-5, "{closed} {fd}");
    }

    #[test]
    fn locus_continuation_keeps_codim3() {
        let a = 0.00025573;
        let r = hopf3_locate(a, &Rectangle::pqrs()).unwrap();
        let pts = hopf3_continue(a, (r.k_star, r.d_star, r.b_star), 0.005, 1e-3).unwrap();
        assert_eq!(pts.len(), 6);
        for pt in pts {
            assert!(pt.b7 < 0.0);
            let p = ModelParams::new(pt.k, pt.allee, a, pt.b, pt.d).unwrap();
            assert_eq!(focus_quantities(&p).unwrap().codim, 3);
        }
    }

    #[test]
    fn generic_focus_is_codim0() {
        let p = ModelParams::new(20.0, 2.0, 0.004905, -0.10891, 24.28).unwrap();
        let f = focus_quantities(&p).unwrap();
        assert_eq!(f.codim, 0);
        assert_eq!(f.stability_of_focus, Some(FocusStability::Stable));
        let l = lienard_convert(&p).unwrap();
        let h = h_closed_form(p.a, l.alpha, p.d, 8);
        for k in 0..=8 {
            assert!((l.h_series.coeff(k) - h.coeff(k)).abs() < 1e-11 * h.max_abs());
        }
    }
}
