//! Limit-cycle detection on the section through `E_α`, and the
//! existence / non-existence criteria for closed orbits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{return_map, ReturnOptions, ReturnOutcome, Section};
use crate::error::Result;
use crate::model::{self, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleStability {
    Stable,
    Unstable,
    /// Same displacement sign on both sides, or `|P'(s*) - 1| < 1e-4`.
    SemiStable { near_tangent: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub s: f64,
    pub period: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub stability: CycleStability,
    pub floquet_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycles: Vec<Cycle>,
    pub count: usize,
    /// Seeds whose orbit did not come back to the section.
    pub no_return: Vec<f64>,
    pub seeds_evaluated: usize,
}

impl CycleReport {
    fn empty() -> Self {
        Self { cycles: vec![], count: 0, no_return: vec![], seeds_evaluated: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CycleOptions {
    pub n_seed: usize,
    /// Section range as fractions of `r2 - α`; `None` uses the defaults.
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub ret: ReturnOptions,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { n_seed: 200, s_min: None, s_max: None, ret: ReturnOptions::default() }
    }
}

fn displacement(params: &ModelParams, sec: &Section, s: f64, ro: &ReturnOptions) -> Result<Option<f64>> {
    Ok(return_map(params, sec, s, ro)?.value().map(|p| p - s))
}

/// Counts limit cycles surrounding `E_α` from sign changes of `D(s) = P(s) - s`.
pub fn find_cycles(params: &ModelParams, opts: &CycleOptions) -> Result<CycleReport> {
    let Some((alpha, _)) = model::e_alpha(params) else {
        return Ok(CycleReport::empty());
    };
    let sec = Section::through_e_alpha(params)?;
    let roots = model::h_roots(params).expect("E_alpha implies real roots");
    let r2 = roots.beta.min(params.K);
    let width = r2 - alpha;
    let s_min = opts.s_min.unwrap_or(1e-4 * width);
    let s_max = opts.s_max.unwrap_or((1.0 - 1e-6) * width);
    let ro = &opts.ret;
    let n = opts.n_seed.max(2);
    let (l0, l1) = (s_min.ln(), s_max.ln());
    let mut seeds: Vec<f64> = (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect();
    let mut vals = eval_all(params, &sec, &seeds, ro)?;

    // 10x local resolution where |D| dips without a sign change
    let mut extra = vec![];
    for i in 1..n - 1 {
        if let (Some(a), Some(b), Some(c)) = (vals[i - 1], vals[i], vals[i + 1]) {
            let same = a.signum() == b.signum() && b.signum() == c.signum();
            if same && b.abs() <= a.abs() && b.abs() <= c.abs() {
                let (u, v) = (seeds[i - 1].ln(), seeds[i + 1].ln());
                extra.extend((1..20).map(|j| (u + (v - u) * j as f64 / 20.0).exp()));
            }
        }
    }
    if !extra.is_empty() {
        let ev = eval_all(params, &sec, &extra, ro)?;
        let mut all: Vec<(f64, Option<f64>)> = seeds.into_iter().zip(vals).chain(extra.into_iter().zip(ev)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.dedup_by(|a, b| a.0 == b.0);
        (seeds, vals) = all.into_iter().unzip();
    }

    let no_return: Vec<f64> = seeds.iter().zip(&vals).filter(|(_, v)| v.is_none()).map(|(s, _)| *s).collect();
    let mut cycles: Vec<Cycle> = vec![];
    for i in 0..seeds.len() - 1 {
        let (Some(da), Some(db)) = (vals[i], vals[i + 1]) else { continue };
        let exact = if da == 0.0 { Some(seeds[i]) } else { None };
        if !(da < 0.0 && db > 0.0 || da > 0.0 && db < 0.0) && exact.is_none() {
            continue;
        }
        let s_star = match exact {
            Some(s) => s,
            None => bisect(params, &sec, seeds[i], seeds[i + 1], da, ro)?,
        };
        let left = vals[..=i].iter().rev().flatten().find(|v| **v != 0.0).copied().unwrap_or(da);
        let right = db;
        let mut c = describe(params, &sec, s_star, left, right, ro)?;
        if let Some(prev) = cycles.last() {
            if (c.s - prev.s).abs() < 1e-6 * alpha {
                continue;
            }
        }
        if let CycleStability::SemiStable { .. } = c.stability {
        } else if (c.floquet_estimate - 1.0).abs() < 1e-4 {
            c.stability = CycleStability::SemiStable { near_tangent: true };
        }
        cycles.push(c);
    }
    let count = cycles.len();
    Ok(CycleReport { cycles, count, no_return, seeds_evaluated: seeds.len() })
}

fn eval_all(params: &ModelParams, sec: &Section, seeds: &[f64], ro: &ReturnOptions) -> Result<Vec<Option<f64>>> {
    seeds.par_iter().map(|&s| displacement(params, sec, s, ro)).collect()
}

fn bisect(params: &ModelParams, sec: &Section, mut lo: f64, mut hi: f64, dlo: f64, ro: &ReturnOptions) -> Result<f64> {
    let neg_lo = dlo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(dm) = displacement(params, sec, mid, ro)? else { break };
        if dm.abs() < 1e-10 * mid || hi - lo < 1e-14 * mid {
            return Ok(mid);
        }
        if (dm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn describe(params: &ModelParams, sec: &Section, s: f64, left: f64, right: f64, ro: &ReturnOptions) -> Result<Cycle> {
    let stability = if left < 0.0 && right > 0.0 {
        CycleStability::Unstable
    } else if left > 0.0 && right < 0.0 {
        CycleStability::Stable
    } else {
        CycleStability::SemiStable { near_tangent: false }
    };
    let h = 1e-6 * s;
    let pp = return_map(params, sec, s + h, ro)?.value();
    let pm = return_map(params, sec, s - h, ro)?.value();
    let floquet_estimate = match (pp, pm) {
        (Some(a), Some(b)) => ((a - b) / (2.0 * h)).abs(),
        _ => f64::NAN,
    };
    let (period, x_range, y_range) = sweep_orbit(params, sec, s, ro)?;
    Ok(Cycle { s, period, x_range, y_range, stability, floquet_estimate })
}

/// Period and bounding box of one revolution from `s`.
fn sweep_orbit(params: &ModelParams, sec: &Section, s: f64, ro: &ReturnOptions) -> Result<(f64, (f64, f64), (f64, f64))> {
    let period = match return_map(params, sec, s, ro)? {
        ReturnOutcome::Return { period, .. } => period,
        ReturnOutcome::NoReturn { t, .. } => t,
    };
    let samples = orbit_samples(params, sec, s, period, ro.rtol)?;
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &samples {
        xr = (xr.0.min(x), xr.1.max(x));
        yr = (yr.0.min(y), yr.1.max(y));
    }
    Ok((period, xr, yr))
}

/// Densely sampled closed orbit through `α + s` over one period.
pub fn orbit_samples(params: &ModelParams, sec: &Section, s: f64, period: f64, rtol: f64) -> Result<Vec<(f64, f64)>> {
    let f = |z: &super::State| params.field(z[0], z[1]);
    let p0 = sec.point(s);
    let mut out = vec![(p0[0], p0[1])];
    super::integrator::solve(f, 0.0, p0, period, &super::options(rtol), |st| {
        for j in 1..=8 {
            let z = st.at(st.t0 + st.h * j as f64 / 8.0);
            out.push((z[0], z[1]));
        }
        super::Control::Continue
    })?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoCycleReason {
    /// `A ≥ 1/sqrt(a)`
    AlleeBeyondPeak,
    /// `A < 1/sqrt(a)` and `0 < d < p(A)`
    DeathBelowResponseAtA,
    /// `G' > 0` on `(r1, β)`
    Dulac,
}

/// Sufficient conditions for the absence of closed orbits.
pub fn no_cycle_certificate(params: &ModelParams) -> Option<NoCycleReason> {
    let xm = params.x_peak();
    if params.A >= xm {
        return Some(NoCycleReason::AlleeBeyondPeak);
    }
    if params.A > 0.0 && params.d < params.p(params.A) {
        return Some(NoCycleReason::DeathBelowResponseAtA);
    }
    let roots = model::h_roots(params)?;
    let r1 = params.A.max(0.0);
    if roots.beta > r1 && min_dg(params, r1, roots.beta) > 0.0 {
        return Some(NoCycleReason::Dulac);
    }
    None
}

/// Minimum of the cubic `G'` on `[lo, hi]`.
fn min_dg(params: &ModelParams, lo: f64, hi: f64) -> f64 {
    let (big_a, k, a, b) = (params.A, params.K, params.a, params.b);
    // G'(x) = -4a x³ + 3(aA + aK - b) x² + 2(bA + bK - aAK - 1) x + (A + K - bAK)
    let c3 = -4.0 * a;
    let c2 = 3.0 * (a * big_a + a * k - b);
    let c1 = 2.0 * (b * big_a + b * k - a * big_a * k - 1.0);
    let mut cands = vec![lo, hi];
    // critical points from 3 c3 x² + 2 c2 x + c1 = 0
    let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        let r = disc.sqrt();
        let q = -0.5 * (qb + r.copysign(qb));
        for x in [q / qa, if q != 0.0 { qc / q } else { f64::NAN }] {
            if x > lo && x < hi {
                cands.push(x);
            }
        }
    }
    cands.into_iter().map(|x| params.dG(x)).fold(f64::INFINITY, f64::min)
}

/// `A ≤ 0`, `α < K < β` and `G'(α) > 0`, which force a periodic orbit.
pub fn existence_check(params: &ModelParams) -> bool {
    if params.A > 0.0 {
        return false;
    }
    let Some(r) = model::h_roots(params) else { return false };
    if r.coalesced {
        return false;
    }
    r.alpha < params.K && params.K < r.beta && params.dG(r.alpha) > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dg_cubic_matches_direct_derivative() {
        let p = ModelParams::new(10.5, -0.5, 0.018, -0.18, 8.99).unwrap();
        for x in [0.0f64, 1.0, 4.9, 9.0] {
            let (big_a, k, a, b) = (p.A, p.K, p.a, p.b);
            let cubic = -4.0 * a * x.powi(3) + 3.0 * (a * big_a + a * k - b) * x * x
                + 2.0 * (b * big_a + b * k - a * big_a * k - 1.0) * x
                + (big_a + k - b * big_a * k);
            assert!((cubic - p.dG(x)).abs() < 1e-12 * (1.0 + cubic.abs()));
        }
    }

    #[test]
    fn certificates_direct() {
        let a: f64 = 0.01;
        let p = ModelParams::new(15.0, 1.2 / a.sqrt(), a, 0.0, 1.0).unwrap();
        assert_eq!(no_cycle_certificate(&p), Some(NoCycleReason::AlleeBeyondPeak));
        let q = ModelParams::new(15.0, 0.5 / a.sqrt(), a, 0.0, 1.0).unwrap();
        let q = q.with_d(0.5 * q.p(q.A));
        assert_eq!(no_cycle_certificate(&q), Some(NoCycleReason::DeathBelowResponseAtA));
    }

    #[test]
    fn existence_guards() {
        let p = ModelParams::new(10.5, -0.5, 0.01809954751, -0.1809954751, 8.99).unwrap();
        assert!(existence_check(&p));
        assert!(!existence_check(&ModelParams { A: 0.5, ..p }));
        let stable = ModelParams { d: 10.0, ..p };
        assert!(stable.dG(model::h_roots(&stable).unwrap().alpha) < 0.0);
        assert!(!existence_check(&stable));
    }
}
