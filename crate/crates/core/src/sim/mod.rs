//! Trajectories, return maps, limit cycles and separatrices.

pub mod cycles;
pub mod integrator;
pub mod manifolds;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use integrator::{solve, Control, Options, State};

pub use cycles::{existence_check, find_cycles, no_cycle_certificate, Cycle, CycleOptions, CycleReport, CycleStability, NoCycleReason};
pub use manifolds::{connection_gap, homoclinic_gap, separatrices, Branch, SaddleChoice};

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;
pub const T_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    ConvergedToEquilibrium,
    LeftDomain,
    SectionEventLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(t, x, y)` at every accepted step.
    pub samples: Vec<(f64, f64, f64)>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        *self.samples.last().expect("trajectory has at least its initial point")
    }
}

pub fn options(rtol: f64) -> Options {
    Options { rtol, atol: DEFAULT_ATOL, ..Options::default() }
}

/// Integrates the model from `(x0, y0)`; negative `t_end` integrates backward.
pub fn integrate(params: &ModelParams, x0: f64, y0: f64, t_end: f64, rtol: f64) -> Result<Trajectory> {
    if !(x0 >= 0.0 && y0 >= 0.0) {
        return Err(Error::Domain(format!("initial point ({x0}, {y0}) is outside the positive cone")));
    }
    let bound = 10.0 * model::trap_bound(params).max(y0 + x0);
    integrate_in(params, [x0, y0], t_end, rtol, bound)
}

/// Attracting equilibria and the capture radius used to stop on arrival.
fn attractors(params: &ModelParams) -> (Vec<(f64, f64)>, f64) {
    let pts = model::equilibria(params).into_iter().filter(|e| e.stability.is_attracting()).map(|e| e.location).collect();
    (pts, 1e-8 * params.K.max(1.0))
}

fn captured(att: &(Vec<(f64, f64)>, f64), z: &State) -> bool {
    att.0.iter().any(|e| (z[0] - e.0).abs().max((z[1] - e.1).abs()) < att.1)
}

pub(crate) fn integrate_in(params: &ModelParams, y0: State, t_end: f64, rtol: f64, bound: f64) -> Result<Trajectory> {
    let f = |s: &State| params.field(s[0], s[1]);
    let att = attractors(params);
    let f0 = f(&y0);
    let mut samples = vec![(0.0, y0[0], y0[1])];
    if f0[0].abs().max(f0[1].abs()) < 1e-13 {
        return Ok(Trajectory { samples, termination: Termination::ConvergedToEquilibrium });
    }
    let mut termination = Termination::TimeLimit;
    let opts = options(rtol);
    solve(f, 0.0, y0, t_end, &opts, |s| {
        samples.push((s.t1(), s.y1[0], s.y1[1]));
        let y = s.y1;
        if y[0] < -1e-9 || y[1] < -1e-9 || y[0] + y[1] > bound {
            termination = Termination::LeftDomain;
            return Control::Stop;
        }
        if s.f1[0].abs().max(s.f1[1].abs()) < 1e-13 || captured(&att, &y) {
            termination = Termination::ConvergedToEquilibrium;
            return Control::Stop;
        }
        Control::Continue
    })?;
    Ok(Trajectory { samples, termination })
}

/// The ray `{y = G(α), x > α}` through the interior equilibrium.
///
/// The flow crosses it upward between `α` and `β` (there `p(x) > d`), so
/// returns are counted on crossings with `y' > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub anchor: (f64, f64),
    /// Sign of `y'` at accepted crossings.
    pub crossing_orientation: f64,
}

impl Section {
    pub fn through_e_alpha(params: &ModelParams) -> Result<Self> {
        let anchor = model::e_alpha(params).ok_or(Error::NoInteriorEquilibrium)?;
        Ok(Self { anchor, crossing_orientation: 1.0 })
    }

    pub fn point(&self, s: f64) -> State {
        [self.anchor.0 + s, self.anchor.1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReturnOutcome {
    Return { s: f64, period: f64 },
    NoReturn { termination: Termination, t: f64 },
}

impl ReturnOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            ReturnOutcome::Return { s, .. } => Some(*s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReturnOptions {
    pub rtol: f64,
    pub t_max: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, t_max: T_MAX }
    }
}

/// First return of `(α + s, G(α))` to the section.
pub fn return_map(params: &ModelParams, section: &Section, s: f64, ro: &ReturnOptions) -> Result<ReturnOutcome> {
    let (xa, yc) = section.anchor;
    let f = |z: &State| params.field(z[0], z[1]);
    let bound = 10.0 * model::trap_bound(params);
    let orient = section.crossing_orientation;
    let g = |z: &State| orient * (z[1] - yc);
    let att = attractors(params);
    let mut out = None;
    let opts = options(ro.rtol);
    let fin = solve(f, 0.0, section.point(s), ro.t_max, &opts, |st| {
        let (g0, g1) = (g(&st.y0), g(&st.y1));
        if g0 < 0.0 && g1 >= 0.0 {
            let (t, z) = st.locate(g);
            if z[0] > xa {
                out = Some(ReturnOutcome::Return { s: z[0] - xa, period: t });
                return Control::Stop;
            }
        }
        let y = st.y1;
        if y[0] < 0.0 || y[1] < 0.0 || y[0] + y[1] > bound {
            out = Some(ReturnOutcome::NoReturn { termination: Termination::LeftDomain, t: st.t1() });
            return Control::Stop;
        }
        if st.f1[0].abs().max(st.f1[1].abs()) < 1e-13 || captured(&att, &y) {
            out = Some(ReturnOutcome::NoReturn { termination: Termination::ConvergedToEquilibrium, t: st.t1() });
            return Control::Stop;
        }
        Control::Continue
    });
    let fin_t = match fin {
        Ok(f) => f.t,
        Err(Error::StepLimit { t, .. }) => t,
        Err(e) => return Err(e),
    };
    Ok(out.unwrap_or(ReturnOutcome::NoReturn { termination: Termination::TimeLimit, t: fin_t }))
}
