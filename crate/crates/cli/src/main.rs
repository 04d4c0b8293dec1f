mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, Value};

use config::{Cli, Command, Format, RunConfig};
use hollingiv::sim::{self, CycleOptions, CycleStability, ReturnOptions, Section};
use hollingiv::{hopf, local_bifurcations as lb, model, Error, ModelParams};
use output::{emit, f17, Rendered};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: String) -> Self {
        Self { code, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::Domain(_)
            | Error::NoInteriorEquilibrium
            | Error::NotABtPoint(_)
            | Error::NotASaddle(_)
            | Error::Degenerate(_) => 3,
            _ => 5,
        };
        Failure::new(code, e.to_string())
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn only_json(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.format != Format::Json {
        return Err(Failure::new(2, format!("command {} only writes json", cfg.command.name())));
    }
    Ok(())
}

fn run(cfg: RunConfig) -> Result<(), Failure> {
    let name = cfg.command.name();
    let p = &cfg.params;
    let mut command = cfg.command.clone();
    let (options, body) = match &mut command {
        Command::Equilibria(o) => {
            only_json(&cfg)?;
            let prm = p.full(name)?;
            let body = json!({ "equilibria": model::equilibria(&prm), "region": model::region(&prm).name() });
            (to_value(o), Rendered::Json(body))
        }
        Command::Region(o) => {
            only_json(&cfg)?;
            let prm = p.full(name)?;
            let roots = model::h_roots(&prm);
            let body = json!({
                "region": model::region(&prm).name(),
                "roots": roots,
                "d_m": prm.d_m(),
                "p_A": if prm.A > 0.0 { Some(prm.p(prm.A)) } else { None },
                "p_K": prm.p(prm.K),
                "trap_bound": model::trap_bound(&prm),
            });
            (to_value(o), Rendered::Json(body))
        }
        Command::Bt(o) => {
            only_json(&cfg)?;
            let (a, k) = (p.a(name)?, p.k(name)?);
            let point = lb::bt_point(a, k)?;
            let coeffs = if point.feasible { Some(lb::cusp_coeffs(&lb::bt_params(a, k)?)?) } else { None };
            let surfaces = match lb::bt_params(a, k) {
                Ok(prm) => lb::codim1_surfaces(&prm).into_iter().map(|(n, v)| json!({ "surface": n, "value": v })).collect(),
                Err(_) => vec![],
            };
            (to_value(o), Rendered::Json(json!({ "bt": point, "cusp": coeffs, "codim1_surfaces": surfaces })))
        }
        Command::Unfold(o) => {
            only_json(&cfg)?;
            let (a, k) = (p.a(name)?, p.k(name)?);
            let c31 = *o.c31.get_or_insert(config::C31::Corrected);
            let rep = lb::unfolding_map_with(a, k, c31.into())?;
            (to_value(o), Rendered::Json(to_value(&rep)))
        }
        Command::Ns(o) => {
            only_json(&cfg)?;
            let (a, k) = (p.a(name)?, p.k(name)?);
            let at_bns = *o.at_b_ns.get_or_insert(false);
            let b = if at_bns { lb::b_ns(a, k) } else { p.b.ok_or_else(|| Failure::new(2, "command ns needs parameter b or --at-b-ns".into()))? };
            let rep = lb::ns_coeffs(a, k, b)?;
            (to_value(o), Rendered::Json(json!({ "b": b, "outcome": rep })))
        }
        Command::Hopf(o) => {
            only_json(&cfg)?;
            let prm = p.full(name)?;
            let focus = hopf::focus_quantities(&prm)?;
            let (closed, fd) = hopf::hopf_transversality(&prm)?;
            let body = json!({ "focus": focus, "transversality": { "closed_form": closed, "finite_difference": fd } });
            (to_value(o), Rendered::Json(body))
        }
        Command::Hopf3(o) => {
            only_json(&cfg)?;
            let a = p.a(name)?;
            o.fill();
            let rep = hopf::hopf3_locate(a, &hopf::Rectangle::pqrs())?;
            let cont = match o.continue_to {
                Some(target) => Some(hopf::hopf3_continue(a, (rep.k_star, rep.d_star, rep.b_star), target, o.step.unwrap_or(1e-3))?),
                None => None,
            };
            (to_value(o), Rendered::Json(json!({ "hopf3": rep, "continuation": cont })))
        }
        Command::Simulate(o) => {
            let prm = p.full(name)?;
            o.fill()?;
            let (x0, y0, t_end, rtol) = (o.x0.unwrap(), o.y0.unwrap(), o.t_end.unwrap(), o.rtol.unwrap());
            let tr = sim::integrate(&prm, x0, y0, t_end, rtol)?;
            let body = match cfg.format {
                Format::Json => Rendered::Json(to_value(&tr)),
                Format::Csv => Rendered::Text(output::csv_table(&["t", "x", "y"], tr.samples.iter().map(|(t, x, y)| vec![f17(*t), f17(*x), f17(*y)]))),
                Format::Svg => {
                    let mut po = config::PortraitOpts { cycles: Some(false), ..Default::default() };
                    po.fill(&prm);
                    let path: Vec<(f64, f64)> = tr.samples.iter().map(|s| (s.1, s.2)).collect();
                    Rendered::Text(render_portrait(&prm, &po, vec![path], vec![]))
                }
            };
            (to_value(o), body)
        }
        Command::Cycles(o) => {
            only_json(&cfg)?;
            let prm = p.full(name)?;
            o.fill();
            let rep = sim::find_cycles(&prm, &cycle_opts(o.n_seed.unwrap(), o.rtol.unwrap(), o.t_max.unwrap()))?;
            (to_value(o), Rendered::Json(to_value(&rep)))
        }
        Command::Certify(o) => {
            only_json(&cfg)?;
            let prm = p.full(name)?;
            let strip = model::h_roots(&prm).map(|r| (prm.A.max(0.0), r.beta.min(prm.K)));
            let body = json!({
                "no_cycle_certificate": sim::no_cycle_certificate(&prm),
                "existence_check": sim::existence_check(&prm),
                "cycle_strip": strip,
            });
            (to_value(o), Rendered::Json(body))
        }
        Command::Sweep(o) => {
            o.fill(p)?;
            let (k, a, b) = (p.k(name)?, p.a(name)?, p.b.unwrap());
            let (nd, na) = (o.n_d.unwrap().max(1), o.n_allee.unwrap().max(1));
            let (d0, d1, a0, a1) = (o.d_min.unwrap(), o.d_max.unwrap(), o.allee_min.unwrap(), o.allee_max.unwrap());
            let at = |lo: f64, hi: f64, n: usize, i: usize| if n > 1 { lo + (hi - lo) * i as f64 / (n - 1) as f64 } else { lo };
            let cells: Vec<(f64, f64, model::RegionLabel)> = (0..nd * na)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx % nd, idx / nd);
                    let (d, allee) = (at(d0, d1, nd, i), at(a0, a1, na, j));
                    ModelParams::new(k, allee, a, b, d).map(|prm| (d, allee, model::region(&prm)))
                })
                .collect::<Result<_, _>>()?;
            let body = match cfg.format {
                Format::Json => Rendered::Json(json!(cells.iter().map(|(d, al, r)| json!({ "d": d, "A": al, "region": r.name() })).collect::<Vec<_>>())),
                Format::Csv => Rendered::Text(output::csv_table(&["d", "A", "region"], cells.iter().map(|(d, al, r)| vec![f17(*d), f17(*al), r.name()]))),
                Format::Svg => Rendered::Text(svg::region_map(&cells, (d0, d1, nd), (a0, a1, na), &format!("Regions in the (d, A) plane, K={k} a={a} b={b}"))),
            };
            (to_value(o), body)
        }
        Command::Portrait(o) => {
            let prm = p.full(name)?;
            o.fill(&prm);
            let t_end = o.t_end.unwrap();
            let trajectories = o
                .points
                .as_deref()
                .unwrap_or_default()
                .par_iter()
                .map(|pt| sim::integrate(&prm, pt.0[0], pt.0[1], t_end, sim::DEFAULT_RTOL).map(|t| t.samples.iter().map(|s| (s.1, s.2)).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>, _>>()?;
            let cycles = if o.cycles.unwrap() { cycle_curves(&prm)? } else { vec![] };
            let body = match cfg.format {
                Format::Svg => Rendered::Text(render_portrait(&prm, o, trajectories, cycles)),
                Format::Json => Rendered::Json(json!({
                    "equilibria": model::equilibria(&prm),
                    "trajectories": trajectories,
                    "cycles": cycles.iter().map(|c| json!({ "stable": c.stable, "points": c.points })).collect::<Vec<_>>(),
                })),
                Format::Csv => return Err(Failure::new(2, "portrait writes svg or json".into())),
            };
            (to_value(o), body)
        }
    };
    if cfg.format == Format::Csv && !matches!(command, Command::Simulate(_) | Command::Sweep(_)) {
        return Err(Failure::new(2, format!("command {name} does not write csv")));
    }
    emit(&cfg, &options, body)
}

fn cycle_opts(n_seed: usize, rtol: f64, t_max: f64) -> CycleOptions {
    CycleOptions { n_seed, ret: ReturnOptions { rtol, t_max }, ..CycleOptions::default() }
}

fn cycle_curves(prm: &ModelParams) -> Result<Vec<svg::Curve>, Failure> {
    let rep = sim::find_cycles(prm, &CycleOptions::default())?;
    if rep.count == 0 {
        return Ok(vec![]);
    }
    let sec = Section::through_e_alpha(prm)?;
    rep.cycles
        .iter()
        .map(|c| {
            let pts = sim::cycles::orbit_samples(prm, &sec, c.s, c.period, sim::DEFAULT_RTOL)?;
            Ok(svg::Curve { points: pts, stable: c.stability == CycleStability::Stable })
        })
        .collect()
}

fn render_portrait(prm: &ModelParams, o: &config::PortraitOpts, trajectories: Vec<Vec<(f64, f64)>>, cycles: Vec<svg::Curve>) -> String {
    let eqs = model::equilibria(prm);
    let roots = model::h_roots(prm).map(|r| (r.alpha, r.beta));
    svg::portrait(&svg::Portrait {
        params: prm,
        x_max: o.x_max.unwrap(),
        y_max: o.y_max.unwrap(),
        equilibria: &eqs,
        interior_roots: roots,
        trajectories: &trajectories,
        cycles: &cycles,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match config::parse_config(cli).and_then(run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
