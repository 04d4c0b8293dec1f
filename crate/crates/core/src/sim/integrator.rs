//! Dormand-Prince 5(4) with PI step control and quintic dense output.

use crate::error::{Error, Result};

pub type State = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y0: State,
    pub y1: State,
    pub f1: State,
    rcont: [State; 5],
}

impl Step {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at `t` inside the step.
    pub fn at(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }

    /// Locates a root of `g` along the dense output, given a sign change
    /// between the step ends.
    pub fn locate<G: Fn(&State) -> f64>(&self, g: G) -> (f64, State) {
        let (mut lo, mut hi) = (self.t0, self.t1());
        let mut glo = g(&self.y0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let gm = g(&self.at(mid));
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        (hi, self.at(hi))
    }
}

pub enum Control {
    Continue,
    Stop,
}

/// Outcome of [`solve`]: the final time and state and whether the callback
/// stopped the run.
#[derive(Debug, Clone, Copy)]
pub struct Finish {
    pub t: f64,
    pub y: State,
    pub stopped: bool,
    pub steps: usize,
}

fn norm(e: &State, y0: &State, y1: &State, o: &Options) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        let sk = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (e[i] / sk).powi(2);
    }
    (s / 2.0).sqrt()
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for i in 0..2 {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrates `y' = f(y)` from `t0` to `t_end` (either direction), calling
/// `on_step` after every accepted step.
pub fn solve<F, C>(f: F, t0: f64, y0: State, t_end: f64, opts: &Options, mut on_step: C) -> Result<Finish>
where
    F: Fn(&State) -> State,
    C: FnMut(&Step) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    if span == 0.0 {
        return Ok(Finish { t, y, stopped: false, steps: 0 });
    }
    let mut h = dir * initial_step(&f, &y, &k1, opts).min(span).min(opts.h_max);
    let mut facold: f64 = 1e-4;
    let mut reject = false;
    let mut steps = 0;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::StepLimit { t, state: y });
        }
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            return Ok(Finish { t, y, stopped: false, steps });
        }
        if h.abs() > remaining {
            h = dir * remaining;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, state: y });
        }
        let k2 = f(&axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(&axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y1);
        steps += 1;
        let mut e = [0.0; 2];
        for i in 0..2 {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = norm(&e, &y, &y1, opts);
        if !err.is_finite() {
            h *= 0.1;
            reject = true;
            continue;
        }
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / facold.powf(0.04);
        fac = (fac / 0.9).clamp(0.1, 5.0);
        let hnew = h / fac;
        if err <= 1.0 {
            facold = err.max(1e-4);
            let mut rcont = [[0.0; 2]; 5];
            for i in 0..2 {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = Step { t0: t, h, y0: y, y1, f1: k7, rcont };
            t += h;
            y = y1;
            k1 = k7;
            if let Control::Stop = on_step(&step) {
                return Ok(Finish { t, y, stopped: true, steps });
            }
            let mut hn = hnew;
            if reject {
                hn = dir * hn.abs().min(h.abs());
            }
            h = dir * hn.abs().min(opts.h_max);
            reject = false;
        } else {
            h /= (fac11 / 0.9).min(10.0);
            reject = true;
        }
    }
}

fn initial_step<F: Fn(&State) -> State>(f: &F, y: &State, k1: &State, o: &Options) -> f64 {
    let sk = |i: usize| o.atol + o.rtol * y[i].abs();
    let dnf = ((k1[0] / sk(0)).powi(2) + (k1[1] / sk(1)).powi(2)) / 2.0;
    let dny = ((y[0] / sk(0)).powi(2) + (y[1] / sk(1)).powi(2)) / 2.0;
    let h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    let y1 = [y[0] + h * k1[0], y[1] + h * k1[1]];
    let k2 = f(&y1);
    let der2 = (((k2[0] - k1[0]) / sk(0)).powi(2) + ((k2[1] - k1[1]) / sk(1)).powi(2)) / 2.0;
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / der12).powf(0.2) };
    (100.0 * h).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |y: &State| [y[1], -y[0]];
        let opts = Options::default();
        let t_end = 2.0 * std::f64::consts::PI;
        let fin = solve(f, 0.0, [1.0, 0.0], t_end, &opts, |_| Control::Continue).unwrap();
        assert!((fin.y[0] - 1.0).abs() < 1e-9);
        assert!(fin.y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_exact() {
        let f = |y: &State| [y[1], -y[0]];
        let opts = Options { rtol: 1e-12, atol: 1e-14, ..Options::default() };
        let mut worst: f64 = 0.0;
        solve(f, 0.0, [1.0, 0.0], 3.0, &opts, |s| {
            let tm = s.t0 + 0.37 * s.h;
            let y = s.at(tm);
            worst = worst.max((y[0] - tm.cos()).abs());
            Control::Continue
        })
        .unwrap();
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn backward_exponential() {
        let fin = solve(|y: &State| [y[0], 0.0], 1.0, [1.0, 0.0], 0.0, &Options::default(), |_| Control::Continue)
            .unwrap();
        assert!((fin.y[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn event_location() {
        let f = |y: &State| [y[1], -y[0]];
        let mut hit = None;
        solve(f, 0.0, [1.0, 0.0], 10.0, &Options::default(), |s| {
            if s.y0[0] > 0.0 && s.y1[0] <= 0.0 {
                hit = Some(s.locate(|y| y[0]).0);
                return Control::Stop;
            }
            Control::Continue
        })
        .unwrap();
        assert!((hit.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}
