//! Bogdanov–Takens cusp of orders 2 and 3, its three-parameter unfolding,
//! and the nilpotent saddle at `A = K`.

use serde::{Deserialize, Serialize};

use crate::ddouble::DD;
use crate::error::{Error, Result};
use crate::model::{eval_pG, ModelParams, TOL_HYP};

/// `sign(x) |x|^(n/5)`.
pub fn odd_root5(x: f64, n: i32) -> f64 {
    let s = if n.rem_euclid(2) == 1 { x.signum() } else { 1.0 };
    s * x.abs().powf(n as f64 / 5.0)
}

fn quad_l(l: f64) -> f64 {
    l * l - 3.0 * l + 3.0
}

fn zeta_quartic(l: f64) -> f64 {
    3.0 * l.powi(4) - 22.0 * l.powi(3) + 62.0 * l * l - 78.0 * l + 39.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BTReport {
    /// `(d_m, A*, b*)`.
    pub bt_point: (f64, f64, f64),
    pub ell: f64,
    pub alpha: f64,
    pub feasible: bool,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// Normal-form formula applied to the expansion at the cusp.
    pub zeta: Option<f64>,
    /// Closed form in `ℓ` with the `(ℓ-1)` denominator.
    pub zeta_closed_reference: Option<f64>,
    /// Closed form in `ℓ` with the factor `(ℓ-1)^4` in the numerator.
    pub zeta_closed: Option<f64>,
    pub order: Option<u8>,
}

/// `(d_m, A*, b*)` for given `a, K`.
pub fn bt_point(a: f64, k: f64) -> Result<BTReport> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter { name: "a", reason: format!("must be positive, got {a}") });
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter { name: "K", reason: format!("must be positive, got {k}") });
    }
    let sa = a.sqrt();
    let l = k * sa;
    if (l - 2.0).abs() < 1e-12 {
        return Err(Error::Degenerate("K = 2/sqrt(a): G'(1/sqrt(a)) = (b + 2 sqrt(a))/a does not vanish".into()));
    }
    let q = quad_l(l);
    let dm = q / (sa * (l - 1.0).powi(2));
    let astar = (2.0 * l - 3.0) / (sa * (l - 2.0));
    let bstar = -sa * (l * l - 4.0 * l + 5.0) / q;
    Ok(BTReport {
        bt_point: (dm, astar, bstar),
        ell: l,
        alpha: 1.0 / sa,
        feasible: l > 1.0 && l < 3f64.sqrt(),
        delta1: None,
        delta2: None,
        zeta: None,
        zeta_closed_reference: None,
        zeta_closed: None,
        order: None,
    })
}

pub fn zeta_closed_reference(a: f64, l: f64) -> f64 {
    -a.powf(3.5) * (l - 2.0).powi(2) * zeta_quartic(l) / (quad_l(l).powi(6) * (l - 1.0))
}

pub fn zeta_closed(a: f64, l: f64) -> f64 {
    -a.powf(3.5) * (l - 2.0).powi(2) * (l - 1.0).powi(4) * zeta_quartic(l) / quad_l(l).powi(6)
}

/// `G''(1/√a)` at `(A*, b*)` in double-double, with the sum of the absolute
/// values of its terms.
pub fn g2_at_bt_dd(a: f64, k: f64) -> (DD, f64) {
    let a_dd = DD::from(a);
    let k_dd = DD::from(k);
    let sa = a_dd.sqrt();
    let l = k_dd * sa;
    let q = l * l - l * 3.0 + 3.0;
    let astar = (l * 2.0 - 3.0) / (sa * (l - 2.0));
    let bstar = -(sa * (l * l - l * 4.0 + 5.0)) / q;
    let x = DD::ONE / sa;
    let qx = a_dd * x * x + bstar * x + 1.0;
    let q1 = a_dd * x * 2.0 + bstar;
    let q2 = a_dd * 2.0;
    let (u, v) = (x - astar, k_dd - x);
    let terms = [qx * (-2.0), (v - u) * q1 * 2.0, u * v * q2];
    let scale = terms.iter().map(|t| t.to_f64().abs()).sum();
    (terms[0] + terms[1] + terms[2], scale)
}

/// Quadratic and cubic normal-form coefficients at a user-supplied cusp.
pub fn cusp_coeffs(params: &ModelParams) -> Result<BTReport> {
    let mut rep = bt_point(params.a, params.K)?;
    let al = rep.alpha;
    let dm = params.d_m();
    if (params.d - dm).abs() > TOL_HYP * dm {
        return Err(Error::NotABtPoint(format!("d = {} differs from d_m = {dm}", params.d)));
    }
    let (p, g) = eval_pG(params, al, 5)?;
    let g0 = g.coeff(0);
    if !(g0 > 0.0) {
        return Err(Error::NotABtPoint(format!("G(1/sqrt(a)) = {g0} is not positive")));
    }
    let g1 = g.coeff(1);
    if g1.abs() * al > TOL_HYP * g0 {
        return Err(Error::NotABtPoint(format!("G'(alpha) = {g1:e}")));
    }
    let p0 = p.coeff(0);
    let d1 = -p0 * g0 * p.derivative_at(2) / 2.0;
    let d2 = p0 * g.derivative_at(2);
    rep.delta1 = Some(d1);
    rep.delta2 = Some(d2);
    let (u, v) = (al - params.A, params.K - al);
    let g2_scale = p0 * (2.0 * params.quad(al) + 2.0 * (v - u).abs() * (2.0 * params.a * al + params.b).abs() + 2.0 * params.a * (u * v).abs());
    if d2.abs() > TOL_HYP * g2_scale {
        rep.order = Some(2);
        return Ok(rep);
    }
    // x1 = x - α, y1 = -p(α)(y - G(α))
    let pg = p.try_mul(&g.add_const(-g0))?;
    let k = |i: usize, j: usize| if j == 0 { pg.coeff(i) } else { p.coeff(i) / p0 };
    let m = |i: usize, j: usize| {
        let pi = p.coeff(i) - if i == 0 { params.d } else { 0.0 };
        if j == 0 {
            -p0 * g0 * pi
        } else {
            pi
        }
    };
    let z = (4.0 * k(4, 0) * m(2, 0) + m(2, 0) * m(3, 1) - 3.0 * k(3, 0) * m(3, 0) - m(3, 0) * m(2, 1)) / m(2, 0).powi(4);
    rep.zeta = Some(z);
    rep.zeta_closed_reference = Some(zeta_closed_reference(params.a, rep.ell));
    rep.zeta_closed = Some(zeta_closed(params.a, rep.ell));
    if z != 0.0 {
        rep.order = Some(3);
    }
    Ok(rep)
}

/// Params at the order-3 cusp for given `a, K`.
pub fn bt_params(a: f64, k: f64) -> Result<ModelParams> {
    let r = bt_point(a, k)?;
    let (d, allee, b) = r.bt_point;
    ModelParams::new(k, allee, a, b, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum C31Denominator {
    /// `240 b30³` as tabulated.
    Reference,
    /// `240 b20³`, matching `c30` and `c20`.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub eta: [f64; 3],
    pub xi31: f64,
    pub d21: f64,
}

/// `(d_m, A*, b*)` and `α = 1/√a` in double-double.
fn bt_point_dd(a: DD, k: DD) -> (DD, DD, DD, DD) {
    let sa = a.sqrt();
    let l = k * sa;
    let q = l * l - l * 3.0 + 3.0;
    let lm = l - 1.0;
    let dm = q / (sa * lm * lm);
    let astar = (l * 2.0 - 3.0) / (sa * (l - 2.0));
    let bstar = -(sa * (l * l - l * 4.0 + 5.0)) / q;
    (dm, astar, bstar, DD::ONE / sa)
}

fn poly_mul(f: &[DD], g: &[DD], n: usize) -> Vec<DD> {
    let mut out = vec![DD::ZERO; n + 1];
    for (i, &fi) in f.iter().enumerate().take(n + 1) {
        for (j, &gj) in g.iter().enumerate().take(n + 1 - i) {
            out[i + j] = out[i + j] + fi * gj;
        }
    }
    out
}

/// The coefficient chain `k, m → a → b → c → d → ξ → η` at
/// `(b*, A*, d_m) + ε`, evaluated in double-double.
pub fn coefficient_chain(a: f64, k: f64, eps: [f64; 3], c31: C31Denominator) -> Result<ChainOutput> {
    let r = bt_point(a, k)?;
    if !(r.ell > 1.0 && r.ell < 2.0) {
        return Err(Error::InvalidParameter { name: "K", reason: format!("K sqrt(a) = {} outside (1, 2)", r.ell) });
    }
    let (a, kk) = (DD::from(a), DD::from(k));
    let (dm, astar, bstar, al) = bt_point_dd(a, kk);
    let l = kk * a.sqrt();
    let lm = l - 1.0;
    let yc = lm * lm * lm * lm / (a * (DD::from(2.0) - l) * (l * l - l * 3.0 + 3.0));
    let (b, allee, d) = (bstar + eps[0], astar + eps[1], dm + eps[2]);
    let n = 5;
    let q = [a * al * al + b * al + 1.0, a * al * 2.0 + b, a];
    // p = (α + t) / q(α + t)
    let mut p = vec![DD::ZERO; n + 1];
    let num = [al, DD::ONE];
    for i in 0..=n {
        let mut acc = if i < 2 { num[i] } else { DD::ZERO };
        for j in 1..=i.min(2) {
            acc = acc - q[j] * p[i - j];
        }
        p[i] = acc / q[0];
    }
    let g = poly_mul(&poly_mul(&[al - allee, DD::ONE], &[kk - al, -DD::ONE], n), &q, n);
    let pg = poly_mul(&p, &g, n);
    let k_ = |i: usize, j: usize| if j == 0 { pg[i] - yc * p[i] } else { -p[i] };
    let m_ = |i: usize, j: usize| {
        let pi = if i == 0 { p[0] - d } else { p[i] };
        if j == 0 {
            yc * pi
        } else {
            pi
        }
    };
    let (k00, k10, k20, k30, k40) = (k_(0, 0), k_(1, 0), k_(2, 0), k_(3, 0), k_(4, 0));
    let (k01, k21, k31) = (k_(0, 1), k_(2, 1), k_(3, 1));
    let (m00, m10, m20, m30, m40) = (m_(0, 0), m_(1, 0), m_(2, 0), m_(3, 0), m_(4, 0));
    let (m01, m21, m31) = (m_(0, 1), m_(2, 1), m_(3, 1));

    let a00 = -(k00 * m01) + m00 * k01;
    let a10 = k01 * m10 - k10 * m01;
    let a01 = k10 + m01;
    let a20 = k01 * m20 + k21 * m00 - k00 * m21 - k20 * m01;
    let a30 = k01 * m30 + k21 * m10 + k31 * m00 - k00 * m31 - k10 * m21 - k30 * m01;
    let a40 = k01 * m40 - k10 * m31 - k20 * m21 + k21 * m20 + k31 * m10 - k40 * m01;
    let a21 = (k01 * k30 * 3.0 + k01 * m21 - k00 * k31 * 3.0 - k10 * k21 * 2.0) / k01;
    let a12 = k21 * k21 * 2.0 / k01;
    let a11 = (k01 * k20 - k00 * k21) * 2.0 / k01;
    let a31 = (k00 * k21 * k21 * 2.0 + k40 * k01 * k01 * 4.0 + m31 * k01 * k01 - k01 * k10 * k31 * 3.0 - k01 * k20 * k21 * 2.0) / (k01 * k01);
    let a22 = k31 * 3.0 / k01;

    let (b00, b10, b01, b11, b21) = (a00, a10, a01, a11, a21);
    let b20 = a20 - a00 * a12 / 2.0;
    let b30 = (a30 * 3.0 - a00 * a22 - a10 * a12) / 3.0;
    let b40 = (a40 * 12.0 - a00 * a12 * a12 * 2.0 - a10 * a22 * 3.0 - a12 * a20 * 2.0) / 12.0;
    let b31 = (a31 * 6.0 + a11 * a12) / 6.0;

    let c00 = b00;
    let c01 = b01;
    let c10 = (b10 * b20 * 2.0 - b00 * b30) / (b20 * 2.0);
    let c11 = (b11 * b20 * 2.0 - b01 * b30) / (b20 * 2.0);
    let b20_3 = b20 * b20 * b20;
    let c20 = (b20_3 * 80.0 + b00 * b30 * b30 * 45.0 - b00 * b20 * b40 * 48.0 - b10 * b20 * b30 * 60.0) / (b20 * b20 * 80.0);
    let c21 = (b20 * b20 * b21 * 80.0 + b01 * b30 * b30 * 45.0 - b01 * b20 * b40 * 48.0 - b11 * b20 * b30 * 60.0) / (b20 * b20 * 80.0);
    let c31_num = b01 * b20 * b30 * b40 * 336.0 - b01 * b30 * b30 * b30 * 175.0 - b11 * b20 * b20 * b40 * 192.0 + b11 * b20 * b30 * b30 * 210.0
        + b20_3 * b31 * 240.0
        - b20 * b20 * b21 * b30 * 240.0;
    let c31 = c31_num
        / match c31 {
            C31Denominator::Reference => b30 * b30 * b30 * 240.0,
            C31Denominator::Corrected => b20_3 * 240.0,
        };

    let s = c20.sqrt();
    let d00 = c00 / c20;
    let d01 = c01 / s;
    let d11 = (c31 * c10 * c10 * 3.0 - c10 * c20 * c21 * 4.0 + c11 * c20 * c20 * 4.0) / (c20 * c20 * s * 4.0);
    let d21 = (c20 * c21 * 2.0 - c10 * c31 * 3.0) / (c20 * c20 * s * 2.0);
    let d31 = c31 / s;

    let xi00 = d00.to_f64();
    let xi01 = (d01 - d00 * d21).to_f64();
    let xi11 = d11.to_f64();
    let xi31 = d31.to_f64();
    let eta = [odd_root5(xi31, 4) * xi00, -odd_root5(xi31, 1) * xi01, -odd_root5(xi31, -1) * xi11];
    Ok(ChainOutput { eta, xi31, d21: d21.to_f64() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldingReport {
    pub ell: f64,
    pub rho: f64,
    pub sigma: f64,
    /// `∂(η₁,η₂,η₃)/∂(ε₁,ε₂,ε₃)` from the closed forms.
    pub eta_linear: [[f64; 3]; 3],
    pub det_eta: f64,
    /// `-2(ℓ-1)²ρ^{4/5}/(a²σ²)`.
    pub det_eta_closed: f64,
    /// Central differences of the coefficient chain, extrapolated to zero step.
    pub eta_linear_fd: [[f64; 3]; 3],
    /// `κ` with `fd row 2 ≈ closed row 2 + κ · closed row 1` (least squares),
    /// and the largest entry of what remains, relative to the row norm.
    pub row2_offset: (f64, f64),
    pub det_eta_fd: f64,
    /// `ξ31` at `ε = 0` from the chain, to compare with `ρ`.
    pub xi31_chain: f64,
    pub fd_step: f64,
}

/// Relative to `1/d_m`, `K`, `d_m` for `ε₁, ε₂, ε₃`.
pub const FD_STEP: f64 = 1e-6;

/// Ridders extrapolation of central differences over steps `h0 / 2^k`,
/// keeping for each component the entry with the smallest error estimate.
fn ridders<F: Fn(f64) -> Result<[f64; 3]>>(diff: F, h0: f64) -> Result<[f64; 3]> {
    const ROWS: usize = 48;
    const COLS: usize = 6;
    let mut best = [0.0; 3];
    let mut err = [f64::INFINITY; 3];
    let mut prev: Vec<[f64; 3]> = vec![];
    for k in 0..ROWS {
        let mut row = vec![diff(h0 / 2f64.powi(k as i32))?];
        for m in 1..COLS.min(k + 1) {
            let f = 4f64.powi(m as i32);
            let mut t = [0.0; 3];
            for i in 0..3 {
                t[i] = (f * row[m - 1][i] - prev[m - 1][i]) / (f - 1.0);
                let e = (t[i] - row[m - 1][i]).abs().max((t[i] - prev[m - 1][i]).abs());
                if e < err[i] && t[i].is_finite() {
                    err[i] = e;
                    best[i] = t[i];
                }
            }
            row.push(t);
        }
        prev = row;
    }
    Ok(best)
}

pub fn rho_sigma(a: f64, l: f64) -> (f64, f64) {
    let sigma = quad_l(l) / ((l - 1.0) * (a * (2.0 - l)).sqrt());
    let rho = -zeta_quartic(l) * a.sqrt() / ((l - 1.0).powi(2) * (2.0 - l) * sigma);
    (rho, sigma)
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn unfolding_map(a: f64, k: f64) -> Result<UnfoldingReport> {
    unfolding_map_with(a, k, C31Denominator::Corrected)
}

pub fn unfolding_map_with(a: f64, k: f64, c31: C31Denominator) -> Result<UnfoldingReport> {
    let bt = bt_point(a, k)?;
    if !bt.feasible {
        return Err(Error::InvalidParameter { name: "K", reason: format!("K sqrt(a) = {} outside (1, sqrt 3)", bt.ell) });
    }
    let l = bt.ell;
    let sa = a.sqrt();
    let (rho, sigma) = rho_sigma(a, l);
    let q = quad_l(l);
    let r5 = l * l - 4.0 * l + 5.0;
    let l1 = (l - 1.0).powi(4);
    let base = [
        [1.0 / a.powf(1.5), 0.0, l1 / (sa * q * q)],
        [-3.0 * r5 / (a.powf(1.5) * (2.0 - l) * sigma), -(2.0 - l) / (sa * sigma), -3.0 * r5 * l1 / (sa * q * q * (2.0 - l) * sigma)],
        [
            (l.powi(4) - 6.0 * l.powi(3) + 18.0 * l * l - 30.0 * l + 21.0) / (2.0 * a * (2.0 - l) * (l - 1.0).powi(2) * sigma),
            -(5.0 * l - 9.0) * (2.0 - l) / (2.0 * (l - 1.0) * sigma),
            -3.0 * r5 * l1 / (2.0 * (2.0 - l) * q * q * sigma),
        ],
    ];
    let scale = [odd_root5(rho, 4), odd_root5(rho, 1), odd_root5(rho, -1)];
    let mut m = base;
    for i in 0..3 {
        for v in m[i].iter_mut() {
            *v *= scale[i];
        }
    }
    let det_eta = det3(&m);
    let det_eta_closed = -2.0 * (l - 1.0).powi(2) * odd_root5(rho, 4) / (a * a * sigma * sigma);

    let h = FD_STEP;
    let (dm, _, _) = bt.bt_point;
    // b* + 2√a = 1/d_m
    let natural = [1.0 / dm, k, dm];
    let mut fd = [[0.0; 3]; 3];
    for j in 0..3 {
        let col = ridders(|h| {
            let mut ep = [0.0; 3];
            let mut em = [0.0; 3];
            ep[j] = h * natural[j];
            em[j] = -h * natural[j];
            let (up, dn) = (coefficient_chain(a, k, ep, c31)?, coefficient_chain(a, k, em, c31)?);
            Ok([0, 1, 2].map(|i| (up.eta[i] - dn.eta[i]) / (2.0 * h * natural[j])))
        }, h)?;
        for i in 0..3 {
            fd[i][j] = col[i];
        }
    }
    let at0 = coefficient_chain(a, k, [0.0; 3], c31)?;
    let diff: Vec<f64> = (0..3).map(|j| fd[1][j] - m[1][j]).collect();
    let r1 = m[0];
    let kappa = (0..3).map(|j| diff[j] * r1[j]).sum::<f64>() / r1.iter().map(|v| v * v).sum::<f64>();
    let row_norm = fd[1].iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let rest = (0..3).fold(0.0f64, |s, j| s.max((diff[j] - kappa * r1[j]).abs())) / row_norm;
    Ok(UnfoldingReport {
        ell: l,
        rho,
        sigma,
        eta_linear: m,
        det_eta,
        det_eta_closed,
        row2_offset: (kappa, rest),
        det_eta_fd: det3(&fd),
        eta_linear_fd: fd,
        xi31_chain: at0.xi31,
        fd_step: h,
    })
}

/// `ε₁` on the exact saddle-node surface through the cusp, as a function of `ε₃`.
pub fn saddle_node_eps1(a: f64, l: f64, eps3: f64) -> f64 {
    let q = quad_l(l);
    -a * (l - 1.0).powi(4) * eps3 / (a.sqrt() * (l - 1.0).powi(2) * q * eps3 + q * q)
}

/// Signed residuals of `params` against the codimension-one surfaces.
pub fn codim1_surfaces(params: &ModelParams) -> Vec<(String, f64)> {
    let mut out = vec![
        ("transcritical_EA".to_string(), params.d - params.p(params.A.max(0.0))),
        ("transcritical_EK".to_string(), params.d - params.p(params.K)),
        ("saddle_node_alpha_beta".to_string(), params.d - params.d_m()),
    ];
    if let Ok(bt) = bt_point(params.a, params.K) {
        if bt.feasible {
            let (dm, _, bstar) = bt.bt_point;
            let e1 = params.b - bstar;
            let e3 = params.d - dm;
            out.push(("saddle_node_near_bt".to_string(), e1 - saddle_node_eps1(params.a, bt.ell, e3)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSReport {
    pub ell: f64,
    /// `(γ₁, γ₂, γ₃, γ₄)`; `γ₃, γ₄` only on `b = b_ns`.
    pub gamma: (f64, f64, Option<f64>, Option<f64>),
    /// `γ₁, γ₂` from derivatives of `p` and `G` at `K`.
    pub gamma_derivative_form: (f64, f64),
    pub b_ns: f64,
    /// 2 or 3; `None` when `γ₂` and `γ₄` both vanish.
    pub codim: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NsOutcome {
    Saddle(NSReport),
    /// `ℓ ≥ 1`: the triple point is a nilpotent elliptic point.
    Elliptic { ell: f64 },
}

pub fn b_ns(a: f64, k: f64) -> f64 {
    let l2 = k * k * a;
    2.0 * (3.0 * l2 * l2 - 4.0 * l2 - 1.0) / (k * (5.0 - 3.0 * l2))
}

/// `γ₂` with the sum of the absolute values of its terms.
pub fn gamma2(a: f64, k: f64, b: f64) -> (f64, f64) {
    let l2 = k * k * a;
    let w = l2 + k * b + 1.0;
    let den = 2.0 * k * (l2 - 1.0).powi(2);
    let (t1, t2) = (k * (3.0 * l2 - 5.0) * b, 6.0 * l2 * l2 - 8.0 * l2 - 2.0);
    (w * (t1 + t2) / den, (w * (t1.abs() + t2.abs()) / den).abs())
}

pub fn gamma34_at_bns(a: f64, k: f64) -> (f64, f64) {
    let l2 = k * k * a;
    let g3 = 27.0 * (6.0 * l2 * l2 - 13.0 * l2 + 3.0) * (l2 - 1.0).powi(4) / (k * k * (3.0 * l2 - 5.0).powi(4));
    let g4 = 81.0 * (21.0 * l2 * l2 - 47.0 * l2 + 6.0) * (l2 - 1.0).powi(6) / (k.powi(3) * (3.0 * l2 - 5.0).powi(6));
    (g3, g4)
}

/// `(-3 + √21)/6`: below it `γ₂ < 0` for every admissible `b`.
pub fn ell_gamma2_threshold() -> f64 {
    (-3.0 + 21f64.sqrt()) / 6.0
}

/// `((47 - √1705)/42)^{1/2}`.
pub fn ell_gamma4_zero() -> f64 {
    ((47.0 - 1705f64.sqrt()) / 42.0).sqrt()
}

/// Sign change of `γ₄(b_ns)` in `ℓ` by bisection on `(lo, hi)`.
pub fn bisect_gamma4(a: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let f = |l: f64| gamma34_at_bns(a, l / a.sqrt()).1;
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    if flo.signum() == f(hi).signum() {
        return Err(Error::NoIntersection("gamma4 keeps its sign on the interval".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nilpotent triple point at `A = K`, `d = p(K)`.
pub fn ns_coeffs(a: f64, k: f64, b: f64) -> Result<NsOutcome> {
    let params = ModelParams::new(k, 0.0, a, b, 1.0)?;
    let l = k * a.sqrt();
    if l >= 1.0 {
        return Ok(NsOutcome::Elliptic { ell: l });
    }
    let l2 = l * l;
    let w = l2 + k * b + 1.0;
    let g1 = k * w * w / (l2 - 1.0);
    let (g2, g2_scale) = gamma2(a, k, b);

    let params = ModelParams { A: k, d: params.p(k), ..params };
    let (p, g) = eval_pG(&params, k, 3)?;
    let (p0, p1, p2) = (p.coeff(0), p.derivative_at(1), p.derivative_at(2));
    let (gg2, gg3) = (g.derivative_at(2), g.derivative_at(3));
    let g1d = p0 * gg2 / (2.0 * p1);
    let g2d = (p0 * p2 * gg2 - 2.0 * p1 * p1 * gg2 - p0 * p1 * gg3) / (2.0 * p0 * p1 * p1 * gg2);

    let bns = b_ns(a, k);
    let (mut g3, mut g4) = (None, None);
    let mut codim = Some(2);
    if g2.abs() <= TOL_HYP * g2_scale {
        let (c3, c4) = gamma34_at_bns(a, k);
        g3 = Some(c3);
        g4 = Some(c4);
        let g4_scale = 81.0 * (21.0 * l2 * l2 + 47.0 * l2 + 6.0) * (l2 - 1.0).powi(6) / (k.powi(3) * (3.0 * l2 - 5.0).powi(6));
        codim = if c4.abs() > TOL_HYP * g4_scale { Some(3) } else { None };
    }
    Ok(NsOutcome::Saddle(NSReport { ell: l, gamma: (g1, g2, g3, g4), gamma_derivative_form: (g1d, g2d), b_ns: bns, codim }))
}
