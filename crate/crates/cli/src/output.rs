//! JSON with 17 significant digits, CSV tables and the run manifest.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use crate::config::{FileConfig, Format, RunConfig};
use crate::Failure;
use hollingiv::{hopf, model, sim};

/// Pretty printer writing every `f64` as `d.dddddddddddddddde±x`.
pub struct Sig17<'a>(PrettyFormatter<'a>);

impl Default for Sig17<'_> {
    fn default() -> Self {
        Sig17(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
    value.serialize(&mut ser).expect("results serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory CSV");
    for r in rows {
        w.write_record(&r).expect("in-memory CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("CSV is UTF-8")
}

pub fn manifest(cfg: &RunConfig, options: &Value) -> Value {
    let file = FileConfig {
        params: cfg.params.clone(),
        command: Some(cfg.command.name().to_string()),
        options: options.as_object().cloned().unwrap_or_default(),
        format: Some(cfg.format),
        output: cfg.output.clone(),
        run: None,
    };
    let mut v = serde_json::to_value(file).expect("config serializes");
    v["run"] = json!({
        "tool": "hollingiv",
        "version": env!("CARGO_PKG_VERSION"),
        "config_file": cfg.config_file,
        "overrides": cfg.overrides,
        "tolerances": {
            "rtol_default": sim::DEFAULT_RTOL,
            "atol": sim::DEFAULT_ATOL,
            "t_max_default": sim::T_MAX,
            "tol_hyp": model::TOL_HYP,
            "tol_coal": model::TOL_COAL,
            "focus_tol": hopf::FOCUS_TOL,
            "dual_path_tol": hopf::DUAL_PATH_TOL,
        },
    });
    v
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(4, format!("cannot write {}: {e}", path.display())))
}

fn manifest_path(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.manifest.clone().or_else(|| {
        cfg.output.as_ref().map(|o| {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

pub enum Rendered {
    Json(Value),
    Text(String),
}

pub fn emit(cfg: &RunConfig, options: &Value, body: Rendered) -> Result<(), Failure> {
    let man = manifest(cfg, options);
    let man_path = manifest_path(cfg);
    let text = match body {
        Rendered::Json(result) => {
            let mut doc = json!({ "command": cfg.command.name(), "result": result });
            if man_path.is_none() {
                doc["manifest"] = man.clone();
            }
            to_json(&doc)
        }
        Rendered::Text(t) => t,
    };
    match &cfg.output {
        Some(p) => write_file(p, &text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::new(4, format!("cannot write stdout: {e}")))?;
        }
    }
    match man_path {
        Some(p) => write_file(&p, &to_json(&man))?,
        None if cfg.format != Format::Json => eprint!("{}", to_json(&man)),
        None => {}
    }
    Ok(())
}
