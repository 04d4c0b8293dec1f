//! Saddle separatrices and connection gaps.

use serde::{Deserialize, Serialize};

use super::integrator::{solve, Control, State};
use super::{integrate_in, options, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::model::{self, EquilibriumKind, ModelParams, StabilityClass};

pub const SEED_DISTANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaddleChoice {
    EA,
    EK,
    Ebeta,
}

impl SaddleChoice {
    fn kind(self) -> EquilibriumKind {
        match self {
            SaddleChoice::EA => EquilibriumKind::EA,
            SaddleChoice::EK => EquilibriumKind::EK,
            SaddleChoice::Ebeta => EquilibriumKind::Ebeta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub stable: bool,
    /// Unit direction of the seed offset.
    pub direction: (f64, f64),
    /// Branch lies on a coordinate axis.
    pub on_axis: bool,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy)]
struct Saddle {
    point: State,
    /// (eigenvalue, unit eigenvector): unstable first, then stable.
    unstable: (f64, State),
    stable: (f64, State),
}

fn eigvec(j: &[[f64; 2]; 2], lam: f64) -> State {
    let a = [j[0][1], lam - j[0][0]];
    let b = [lam - j[1][1], j[1][0]];
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    let v = if na >= nb { a } else { b };
    let n = v[0].hypot(v[1]);
    if n == 0.0 {
        return if (lam - j[0][0]).abs() < (lam - j[1][1]).abs() { [1.0, 0.0] } else { [0.0, 1.0] };
    }
    [v[0] / n, v[1] / n]
}

fn saddle(params: &ModelParams, which: SaddleChoice) -> Result<Saddle> {
    let eq = model::equilibria(params);
    let e = eq
        .iter()
        .find(|e| e.kind == which.kind())
        .ok_or_else(|| Error::NotASaddle(format!("{which:?} does not exist")))?;
    if e.stability != StabilityClass::Saddle {
        return Err(Error::NotASaddle(format!("{which:?} is {:?}", e.stability)));
    }
    let point = [e.location.0, e.location.1];
    let j = params.jacobian(point[0], point[1]);
    let (l1, l2) = (e.eigenvalues[0].re, e.eigenvalues[1].re);
    let (lu, ls) = if l1 > 0.0 { (l1, l2) } else { (l2, l1) };
    Ok(Saddle { point, unstable: (lu, eigvec(&j, lu)), stable: (ls, eigvec(&j, ls)) })
}

fn on_axis(tr: &Trajectory) -> bool {
    tr.samples.iter().all(|s| s.2 == 0.0) || tr.samples.iter().all(|s| s.1 == 0.0)
}

fn seed(sd: &Saddle, v: State, sign: f64, dist: f64) -> State {
    let mut z = [sd.point[0] + sign * dist * v[0], sd.point[1] + sign * dist * v[1]];
    // keep seeds along an axis exactly on it
    if v[1] == 0.0 {
        z[1] = sd.point[1];
    }
    if v[0] == 0.0 {
        z[0] = sd.point[0];
    }
    z
}

/// The four branches of a saddle's invariant manifolds, integrated for
/// time `t_span` (forward for unstable, backward for stable).
pub fn separatrices(params: &ModelParams, which: SaddleChoice, t_span: f64, dist: f64) -> Result<Vec<Branch>> {
    let sd = saddle(params, which)?;
    let bound = 10.0 * model::trap_bound(params);
    let mut out = vec![];
    for (stable, v) in [(false, sd.unstable.1), (true, sd.stable.1)] {
        for sign in [1.0, -1.0] {
            let z = seed(&sd, v, sign, dist);
            let t_end = if stable { -t_span } else { t_span };
            let trajectory = if z[0] < 0.0 || z[1] < 0.0 {
                Trajectory { samples: vec![(0.0, z[0], z[1])], termination: Termination::LeftDomain }
            } else {
                integrate_in(params, z, t_end, super::DEFAULT_RTOL, bound)?
            };
            let on_axis = on_axis(&trajectory);
            out.push(Branch { stable, direction: (sign * v[0], sign * v[1]), on_axis, trajectory });
        }
    }
    Ok(out)
}

/// Height of the first crossing of `x = sigma_x` by the branch seeded in the
/// direction whose components have the requested signs (zero means free).
fn branch_crossing(params: &ModelParams, which: SaddleChoice, stable: bool, want: (f64, f64), sigma_x: f64, t_span: f64) -> Result<f64> {
    let sd = saddle(params, which)?;
    let v = if stable { sd.stable.1 } else { sd.unstable.1 };
    let score = |s: f64| want.0 * s * v[0] + want.1 * s * v[1];
    let sign = if score(1.0) >= score(-1.0) { 1.0 } else { -1.0 };
    let z0 = seed(&sd, v, sign, SEED_DISTANCE);
    let f = |z: &State| params.field(z[0], z[1]);
    let t_end = if stable { -t_span } else { t_span };
    let bound = 10.0 * model::trap_bound(params);
    let mut hit = None;
    solve(f, 0.0, z0, t_end, &options(super::DEFAULT_RTOL), |st| {
        let (g0, g1) = (st.y0[0] - sigma_x, st.y1[0] - sigma_x);
        if g0 == 0.0 || g0.signum() != g1.signum() {
            hit = Some(st.locate(|z| z[0] - sigma_x).1[1]);
            return Control::Stop;
        }
        let y = st.y1;
        if y[0] < 0.0 || y[1] < 0.0 || y[0] + y[1] > bound || st.f1[0].abs().max(st.f1[1].abs()) < 1e-13 {
            return Control::Stop;
        }
        Control::Continue
    })?;
    hit.ok_or_else(|| Error::NoIntersection(format!("{which:?} {} branch misses x = {sigma_x}", if stable { "stable" } else { "unstable" })))
}

/// `y(W^u(E_K) ∩ Σ) - y(W^s(E_A) ∩ Σ)` on the vertical line `x = sigma_x`.
pub fn connection_gap(params: &ModelParams, sigma_x: f64) -> Result<f64> {
    let t = 1e4;
    let yu = branch_crossing(params, SaddleChoice::EK, false, (0.0, 1.0), sigma_x, t)?;
    let ys = branch_crossing(params, SaddleChoice::EA, true, (0.0, 1.0), sigma_x, t)?;
    Ok(yu - ys)
}

/// `y(W^u(E_β) ∩ Σ) - y(W^s(E_β) ∩ Σ)` for the branches leaving and
/// entering `E_β` from the left, on the line `x = sigma_x`.
pub fn homoclinic_gap(params: &ModelParams, sigma_x: f64) -> Result<f64> {
    let t = 1e4;
    let yu = branch_crossing(params, SaddleChoice::Ebeta, false, (-1.0, 0.0), sigma_x, t)?;
    let ys = branch_crossing(params, SaddleChoice::Ebeta, true, (-1.0, 0.0), sigma_x, t)?;
    Ok(yu - ys)
}
