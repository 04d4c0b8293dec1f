//! The scaled predator-prey system
//!
//! ```text
//! x' = p(x) (G(x) - y),   y' = y (p(x) - d)
//! p(x) = x / (a x² + b x + 1),   G(x) = (x - A)(K - x)(a x² + b x + 1)
//! ```
//!
//! with its equilibria, their linearization and the region labels of the
//! `(d, A)` plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

pub const TOL_HYP: f64 = 1e-9;
pub const TOL_COAL: f64 = 1e-10;
pub const TOL_ADMIT: f64 = 1e-12;

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub K: f64,
    pub A: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

#[allow(non_snake_case)]
impl ModelParams {
    pub fn new(K: f64, A: f64, a: f64, b: f64, d: f64) -> Result<Self> {
        let p = Self { K, A, a, b, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        for (name, v) in [("K", self.K), ("A", self.A), ("a", self.a), ("b", self.b), ("d", self.d)] {
            if !v.is_finite() {
                return bad(name, format!("{v} is not finite"));
            }
        }
        if self.K <= 0.0 {
            return bad("K", format!("K = {} must be positive", self.K));
        }
        if self.a <= 0.0 {
            return bad("a", format!("a = {} must be positive", self.a));
        }
        if self.d <= 0.0 {
            return bad("d", format!("d = {} must be positive", self.d));
        }
        if self.b <= -2.0 * self.a.sqrt() {
            return bad("b", format!("b = {} must exceed -2 sqrt(a) = {}", self.b, -2.0 * self.a.sqrt()));
        }
        if !(self.A > -self.K && self.A < self.K) {
            return bad("A", format!("A = {} must lie in (-K, K) = ({}, {})", self.A, -self.K, self.K));
        }
        Ok(())
    }

    pub fn ell(&self) -> f64 {
        self.K * self.a.sqrt()
    }

    pub fn d_m(&self) -> f64 {
        1.0 / (self.b + 2.0 * self.a.sqrt())
    }

    /// Abscissa `1/sqrt(a)` of the maximum of `p`.
    pub fn x_peak(&self) -> f64 {
        1.0 / self.a.sqrt()
    }

    pub fn quad(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + 1.0
    }

    pub fn p(&self, x: f64) -> f64 {
        x / self.quad(x)
    }

    pub fn dp(&self, x: f64) -> f64 {
        let q = self.quad(x);
        (1.0 - self.a * x * x) / (q * q)
    }

    pub fn G(&self, x: f64) -> f64 {
        (x - self.A) * (self.K - x) * self.quad(x)
    }

    pub fn dG(&self, x: f64) -> f64 {
        let q = self.quad(x);
        let dq = 2.0 * self.a * x + self.b;
        (self.K - x) * q - (x - self.A) * q + (x - self.A) * (self.K - x) * dq
    }

    /// `h(x) = a d x² + (b d - 1) x + d`, whose roots are the interior abscissae.
    pub fn h(&self, x: f64) -> f64 {
        (self.a * self.d * x + self.b * self.d - 1.0) * x + self.d
    }

    pub fn field(&self, x: f64, y: f64) -> [f64; 2] {
        let p = self.p(x);
        [p * (self.G(x) - y), y * (p - self.d)]
    }

    pub fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let p = self.p(x);
        let dp = self.dp(x);
        [[dp * (self.G(x) - y) + p * self.dG(x), -p], [y * dp, p - self.d]]
    }

    pub fn with_d(&self, d: f64) -> Self {
        Self { d, ..*self }
    }
}

/// Maps the unscaled parameters to `(mcK/r, mcA/r, m²c²a/r², mcb/r, rd/(m²c²))`.
#[allow(clippy::too_many_arguments)]
pub fn scale_params(r: f64, k0: f64, allee0: f64, a0: f64, b0: f64, c: f64, d0: f64, m: f64) -> Result<ModelParams> {
    let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
    for (name, v) in [("r", r), ("K", k0), ("m", m), ("c", c), ("d", d0), ("a", a0)] {
        if !(v > 0.0 && v.is_finite()) {
            return bad(name, format!("{v} must be positive"));
        }
    }
    if !(b0 > -2.0 * a0.sqrt()) {
        return bad("b", format!("b = {b0} must exceed -2 sqrt(a)"));
    }
    if !(allee0 > -k0 && allee0 < k0) {
        return bad("A", format!("A = {allee0} must lie in (-K, K)"));
    }
    let mc = m * c;
    ModelParams::new(mc * k0 / r, mc * allee0 / r, mc * mc * a0 / (r * r), mc * b0 / r, r * d0 / (mc * mc))
}

/// Taylor expansions of `p` and `G` about `x0`.
#[allow(non_snake_case)]
pub fn eval_pG(params: &ModelParams, x0: f64, order: usize) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let x = TruncatedSeries::variable(x0, order);
    let q = quad_series(params, &x);
    let p = x.try_mul(&q.recip()?)?;
    let g = x.add_const(-params.A).try_mul(&x.scale(-1.0).add_const(params.K))?.try_mul(&q)?;
    Ok((p, g))
}

fn quad_series(params: &ModelParams, x: &TruncatedSeries) -> TruncatedSeries {
    x.scale(params.a).add_const(params.b).try_mul(x).unwrap().add_const(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HRoots {
    pub alpha: f64,
    pub beta: f64,
    pub coalesced: bool,
}

/// Positive roots `α ≤ β` of `h`, present when `d ≤ d_m`.
pub fn h_roots(params: &ModelParams) -> Option<HRoots> {
    let dm = params.d_m();
    let xm = params.x_peak();
    if (params.d - dm).abs() <= TOL_COAL * dm {
        return Some(HRoots { alpha: xm, beta: xm, coalesced: true });
    }
    if params.d > dm {
        return None;
    }
    let (a, d, b) = (params.a, params.d, params.b);
    let s = 1.0 - b * d;
    let disc = (s - 2.0 * a.sqrt() * d) * (s + 2.0 * a.sqrt() * d);
    if disc < 0.0 {
        return Some(HRoots { alpha: xm, beta: xm, coalesced: true });
    }
    let beta = (s + disc.sqrt()) / (2.0 * a * d);
    let alpha = 1.0 / (a * beta);
    Some(HRoots { alpha, beta, coalesced: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    E0,
    EA,
    EK,
    Ealpha,
    Ebeta,
    Coalesced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Degeneracy {
    ZeroTrace,
    ZeroEigenvalue,
    DoubleZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityClass {
    StableNode,
    UnstableNode,
    Saddle,
    StableFocus,
    UnstableFocus,
    NonHyperbolic(Degeneracy),
}

impl StabilityClass {
    pub fn is_attracting(self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableFocus)
    }

    pub fn is_repelling(self) -> bool {
        matches!(self, StabilityClass::UnstableNode | StabilityClass::UnstableFocus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub location: (f64, f64),
    pub eigenvalues: [Complex64; 2],
    pub stability: StabilityClass,
    pub trace: f64,
    pub det: f64,
}

pub fn eigenvalues(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    if m[1][0] == 0.0 || m[0][1] == 0.0 {
        return [Complex64::new(m[0][0], 0.0), Complex64::new(m[1][1], 0.0)];
    }
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * (m[0][0] - m[1][1]);
    let disc = half * half + m[0][1] * m[1][0];
    if disc >= 0.0 {
        let r = disc.sqrt();
        let big = 0.5 * tr + r.copysign(tr);
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (l1, l2) = if big < small { (big, small) } else { (small, big) };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(0.5 * tr, -im), Complex64::new(0.5 * tr, im)]
    }
}

/// Classifies a 2×2 linearization; trace and determinant are scaled by the
/// largest matrix entry before comparing against `TOL_HYP`.
pub fn classify(m: &[[f64; 2]; 2]) -> StabilityClass {
    let s = m.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if s == 0.0 {
        return StabilityClass::NonHyperbolic(Degeneracy::DoubleZero);
    }
    let tr = (m[0][0] + m[1][1]) / s;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / (s * s);
    if tr.abs() < TOL_HYP && det.abs() < TOL_HYP {
        return StabilityClass::NonHyperbolic(Degeneracy::DoubleZero);
    }
    if det.abs() < TOL_HYP {
        return StabilityClass::NonHyperbolic(Degeneracy::ZeroEigenvalue);
    }
    if det < 0.0 {
        return StabilityClass::Saddle;
    }
    if tr.abs() < TOL_HYP {
        return StabilityClass::NonHyperbolic(Degeneracy::ZeroTrace);
    }
    let node = tr * tr - 4.0 * det >= 0.0;
    match (node, tr < 0.0) {
        (true, true) => StabilityClass::StableNode,
        (true, false) => StabilityClass::UnstableNode,
        (false, true) => StabilityClass::StableFocus,
        (false, false) => StabilityClass::UnstableFocus,
    }
}

fn report(params: &ModelParams, kind: EquilibriumKind, x: f64, y: f64) -> EquilibriumReport {
    let j = params.jacobian(x, y);
    EquilibriumReport {
        kind,
        location: (x, y),
        eigenvalues: eigenvalues(&j),
        stability: classify(&j),
        trace: j[0][0] + j[1][1],
        det: j[0][0] * j[1][1] - j[0][1] * j[1][0],
    }
}

fn admissible(params: &ModelParams, x: f64) -> bool {
    let lo = params.A.max(0.0);
    let tol = TOL_ADMIT * params.K;
    x > lo + tol && x < params.K - tol
}

/// All equilibria in the closed positive cone.
pub fn equilibria(params: &ModelParams) -> Vec<EquilibriumReport> {
    let mut out = vec![report(params, EquilibriumKind::E0, 0.0, 0.0)];
    if params.A > 0.0 {
        out.push(report(params, EquilibriumKind::EA, params.A, 0.0));
    }
    out.push(report(params, EquilibriumKind::EK, params.K, 0.0));
    if let Some(r) = h_roots(params) {
        if r.coalesced {
            if admissible(params, r.alpha) {
                out.push(report(params, EquilibriumKind::Coalesced, r.alpha, params.G(r.alpha)));
            }
        } else {
            if admissible(params, r.alpha) {
                out.push(report(params, EquilibriumKind::Ealpha, r.alpha, params.G(r.alpha)));
            }
            if admissible(params, r.beta) {
                out.push(report(params, EquilibriumKind::Ebeta, r.beta, params.G(r.beta)));
            }
        }
    }
    out
}

/// `E_α` if it lies in the open positive cone.
pub fn e_alpha(params: &ModelParams) -> Option<(f64, f64)> {
    let r = h_roots(params)?;
    if r.coalesced || !admissible(params, r.alpha) {
        return None;
    }
    Some((r.alpha, params.G(r.alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    /// `d = p(A)`
    TranscriticalA,
    /// `d = p(K)`
    TranscriticalK,
    /// `d = d_m` with the double root inside the prey range
    SaddleNode,
    /// `A = 0`
    AlleeSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionLabel {
    V0_1,
    V0_2,
    V0_3,
    V0_4,
    Valpha,
    Vbeta,
    ValphaBeta,
    Boundary(Transition),
}

impl RegionLabel {
    pub fn name(&self) -> String {
        match self {
            RegionLabel::Boundary(t) => format!("Boundary({t:?})"),
            other => format!("{other:?}"),
        }
    }
}

/// Region of the `(d, A)` plane. With no interior roots (`d > d_m`) the
/// label is `V0_3` when `K < 1/sqrt(a)` (the same component as `K < α`) and
/// `V0_4` otherwise.
pub fn region(params: &ModelParams) -> RegionLabel {
    use RegionLabel::*;
    let d = params.d;
    let close = |v: f64| (d - v).abs() <= TOL_COAL * d;
    if params.A.abs() <= TOL_COAL * params.K {
        return Boundary(Transition::AlleeSwitch);
    }
    if close(params.p(params.K)) {
        return Boundary(Transition::TranscriticalK);
    }
    if params.A > 0.0 && close(params.p(params.A)) {
        return Boundary(Transition::TranscriticalA);
    }
    let xm = params.x_peak();
    if close(params.d_m()) && xm >= params.A.max(0.0) && xm <= params.K {
        return Boundary(Transition::SaddleNode);
    }
    let Some(r) = h_roots(params) else {
        return if params.K < xm { V0_3 } else { V0_4 };
    };
    let (al, be, k) = (r.alpha, r.beta, params.K);
    if params.A > 0.0 {
        let a = params.A;
        if be < a {
            V0_2
        } else if al < a {
            if k < be { V0_1 } else { Vbeta }
        } else if k < al {
            V0_3
        } else if k < be {
            Valpha
        } else {
            ValphaBeta
        }
    } else if k < al {
        V0_3
    } else if k < be {
        Valpha
    } else {
        ValphaBeta
    }
}

/// Level `M` beyond which the lines `x + y = N` are crossed inward.
pub fn trap_bound(params: &ModelParams) -> f64 {
    let k = params.K;
    let f = |x: f64| x + params.p(x) * params.G(x) / params.d;
    let n = 1000;
    let h = k / n as f64;
    let (mut best, mut fbest) = (0.0, f(0.0));
    for i in 1..=n {
        let x = i as f64 * h;
        let v = f(x);
        if v > fbest {
            best = x;
            fbest = v;
        }
    }
    // golden-section refinement around the best grid point
    let (mut lo, mut hi) = ((best - h).max(0.0), (best + h).min(k));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1) > f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let sup = fbest.max(f(0.5 * (lo + hi))).max(k);
    sup * (1.0 + 1e-6) + 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle_params() -> ModelParams {
        ModelParams::new(20.0, 2.0, 0.004905, -0.10891, 24.28).unwrap()
    }

    #[test]
    fn rejects_bad_b_by_name() {
        let e = ModelParams::new(1.0, 0.0, 0.2, -1.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "b", .. }));
        assert!(ModelParams::new(1.0, 1.0, 0.2, 0.0, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0, 0.2, 0.0, 1.0).is_err());
    }

    #[test]
    fn unit_scaling_is_identity() {
        let p = scale_params(1.0, 20.0, 2.0, 0.004905, -0.10891, 1.0, 24.28, 1.0).unwrap();
        assert_eq!(p, two_cycle_params());
        let q = scale_params(2.0, 4.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(q.K, 2.0);
    }

    #[test]
    fn peak_of_response_is_dm() {
        let p = two_cycle_params();
        assert!((p.p(p.x_peak()) - p.d_m()).abs() < 1e-14 * p.d_m());
    }

    #[test]
    fn roots_two_cycle_params() {
        let r = h_roots(&two_cycle_params()).unwrap();
        // 40-digit roots of the quadratic
        assert!((r.alpha - 9.802_480_588_123_234).abs() < 1e-12 * 9.8);
        assert!((r.beta - 20.798_163_948_013_95).abs() < 1e-12 * 20.8);
        let p = two_cycle_params();
        assert!((r.alpha * r.beta - 1.0 / p.a).abs() < 1e-12 / p.a);
    }

    #[test]
    fn roots_coalesce_and_vanish() {
        let p = two_cycle_params();
        let r = h_roots(&p.with_d(p.d_m())).unwrap();
        assert!(r.coalesced && r.alpha == p.x_peak() && r.beta == p.x_peak());
        assert!(h_roots(&p.with_d(p.d_m() * 1.01)).is_none());
    }

    #[test]
    fn two_cycle_equilibria() {
        let eq = equilibria(&two_cycle_params());
        let kinds: Vec<_> = eq.iter().map(|e| e.kind).collect();
        use EquilibriumKind::*;
        assert_eq!(kinds, vec![E0, EA, EK, Ealpha]);
        assert_eq!(eq[0].stability, StabilityClass::StableNode);
        assert_eq!(eq[1].stability, StabilityClass::Saddle);
        assert_eq!(eq[2].stability, StabilityClass::Saddle);
        assert_eq!(region(&two_cycle_params()), RegionLabel::Valpha);
    }

    #[test]
    fn origin_eigenvalue_is_allee_product() {
        let p = ModelParams::new(10.0, -0.5, 0.02, -0.1, 5.0).unwrap();
        let e0 = &equilibria(&p)[0];
        assert!((e0.eigenvalues[0].re - 5.0).abs() < 1e-14);
        assert_eq!(e0.stability, StabilityClass::Saddle);
        assert!(equilibria(&p).iter().all(|e| e.kind != EquilibriumKind::EA));
    }

    #[test]
    fn region_on_transcritical_k() {
        let p = two_cycle_params();
        let q = p.with_d(p.p(p.K));
        assert_eq!(region(&q), RegionLabel::Boundary(Transition::TranscriticalK));
    }

    #[test]
    fn weak_allee_without_roots_is_v03() {
        let p = ModelParams::new(5.0, -1.0, 0.01, 0.0, 10.0).unwrap();
        assert!(h_roots(&p).is_none());
        assert_eq!(region(&p), RegionLabel::V0_3);
    }

    #[test]
    fn trap_bound_exceeds_k() {
        let p = two_cycle_params();
        let m = trap_bound(&p);
        assert!(m > p.K);
        for n in [m, 2.0 * m] {
            for i in 0..=1000 {
                let x = n * i as f64 / 1000.0;
                assert!(p.p(x) * p.G(x) - p.d * (n - x) < 0.0);
            }
        }
    }
}
