//! Subcommand implementations. Each returns the JSON document it wrote.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};
use varsample::complex::{
    betti_with, build_cech, build_modified_vr, certify, CertificateKind, CertifyInputs, CertifyMode, Coefficients,
    CECH_MAX_DIM,
};
use varsample::geom::{bottlenecks_with, BottleneckOptions};
use varsample::poly::PolySystem;
use varsample::reach::{eta_over, reach_lower_bound, ReachOptions, SphereSystem};
use varsample::sample::{io as sample_io, total_sample, Sample, SampleOptions};
use varsample::solve::{real_points, solve_square};
use varsample::util::timed;
use varsample::Error;

use crate::config::{CoeffArg, ComplexArg, RunConfig};

/// Why a command stopped; maps onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input: exit 2.
    Usage { kind: &'static str, message: String },
    /// The numerical pipeline failed: exit 3.
    Numerical { kind: &'static str, message: String },
    /// Results were written but not certified under `--require-certificate`: exit 4.
    Uncertified(String),
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure::Usage {
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage { .. } => 2,
            Failure::Numerical { .. } => 3,
            Failure::Uncertified(_) => 4,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Usage { kind, message } | Failure::Numerical { kind, message } => (*kind, message.clone()),
            Failure::Uncertified(m) => ("uncertified", m.clone()),
        };
        json!({
            "format": "varsample-error/1",
            "error": { "kind": kind, "message": message, "exit_code": self.exit_code() },
        })
    }
}

fn error_kind(e: &Error) -> (&'static str, bool) {
    use varsample::SolveError;
    match e {
        Error::Poly(_) => ("parse", false),
        Error::Solve(SolveError::BadStartPoint { .. }) => ("bad_start_point", true),
        Error::Solve(SolveError::PathBudgetExceeded { .. }) => ("path_budget_exceeded", false),
        Error::Solve(_) => ("solver_input", false),
        Error::DegenerateBasePoint { .. } => ("degenerate_base_point", true),
        Error::EmptyNormalLocus => ("empty_normal_locus", true),
        Error::BadDimension(_) => ("bad_dimension", false),
        Error::InfiniteBottlenecks => ("infinite_bottlenecks", true),
        Error::NoBottlenecks => ("no_bottlenecks", true),
        Error::InvalidArgument(_) => ("invalid_argument", false),
        Error::UnsupportedInput(_) => ("unsupported_input", false),
        Error::SingularPoint(_) => ("singular_point", true),
        Error::OffSphere(_) => ("off_sphere", true),
        Error::ReachIterationCap { .. } => ("reach_iteration_cap", true),
        Error::TopDimension { .. } => ("top_dimension", false),
        Error::MissingCertificateInput(_) => ("missing_certificate_input", false),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, numerical) = error_kind(&e);
        let message = e.to_string();
        if numerical {
            Failure::Numerical { kind, message }
        } else {
            Failure::Usage { kind, message }
        }
    }
}

impl From<varsample::SolveError> for Failure {
    fn from(e: varsample::SolveError) -> Self {
        Error::from(e).into()
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage {
        kind: "io",
        message: format!("{}: {e}", path.display()),
    }
}

pub fn load_system(cfg: &RunConfig) -> Result<PolySystem, Failure> {
    let text = fs::read_to_string(&cfg.input).map_err(|e| Failure::Usage {
        kind: "input_not_found",
        message: format!("cannot read {}: {e}", cfg.input.display()),
    })?;
    Ok(PolySystem::parse(&text, cfg.vars.as_deref()).map_err(Error::from)?)
}

/// Drops every `timings` entry so reruns compare byte for byte.
fn canonicalize(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("timings");
            m.values_mut().for_each(canonicalize);
        }
        Value::Array(a) => a.iter_mut().for_each(canonicalize),
        _ => {}
    }
}

fn create(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_failure(&cfg.out, e))?;
    let path = cfg.out.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| io_failure(&path, e))
}

fn write_json(cfg: &RunConfig, name: &str, mut doc: Value) -> Result<Value, Failure> {
    if cfg.canonical_output {
        canonicalize(&mut doc);
    }
    let mut w = create(cfg, name)?;
    let text = serde_json::to_string_pretty(&doc).expect("json");
    writeln!(w, "{text}")
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&cfg.out.join(name), e))?;
    Ok(doc)
}

fn document(format: &str, cfg: &RunConfig, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("format".into(), json!(format));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config"));
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn sample_options(cfg: &RunConfig) -> SampleOptions {
    SampleOptions {
        settings: cfg.solver.clone(),
        b2_override: cfg.b2_override,
        delta_override: cfg.delta,
        ..Default::default()
    }
}

fn sample_summary(s: &Sample) -> Value {
    json!({
        "size": s.len(),
        "basic_count": s.basic_count,
        "extra_count": s.extra_count,
        "delta": s.delta,
        "b2": s.b2,
        "epsilon_certified": s.epsilon_certified,
        "paths_tracked": s.paths_tracked,
    })
}

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Scatter plot of a varsample sample.csv (default: the one beside this script)."""
import csv
import pathlib
import sys

import matplotlib.pyplot as plt

path = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).with_name("sample.csv")
with open(path, newline="") as f:
    rows = list(csv.DictReader(f))
if not rows:
    sys.exit("empty sample")
cols = [c for c in rows[0] if c.startswith("x")]
fig = plt.figure()
ax = fig.add_subplot(projection="3d" if len(cols) >= 3 else None)
for source, color in (("basic", "tab:blue"), ("extra", "tab:red")):
    pts = [[float(r[c]) for c in cols[:3]] for r in rows if r["source"] == source]
    if pts:
        ax.scatter(*zip(*pts), s=2, c=color, label=source)
ax.set_aspect("equal" if len(cols) == 2 else "auto")
ax.legend()
plt.savefig(path.with_suffix(".png"), dpi=150)
plt.show()
"#;

pub fn cmd_sample(cfg: &RunConfig) -> Result<Value, Failure> {
    let epsilon = cfg.require("epsilon", cfg.epsilon).map_err(Failure::usage)?;
    let sys = load_system(cfg)?;
    let sample = total_sample(&sys, epsilon, &sample_options(cfg))?;
    let mut w = create(cfg, "sample.csv")?;
    sample_io::write_csv(&sample, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&cfg.out, e))?;
    let mut w = create(cfg, "sample.obj")?;
    sample_io::write_obj(&sample, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&cfg.out, e))?;
    let path = cfg.out.join("plot_sample.py");
    fs::write(&path, PLOT_SCRIPT).map_err(|e| io_failure(&path, e))?;
    let t = sample.timings;
    eprintln!(
        "|E_delta| = {}, |E'_delta| = {}, delta = {}, epsilon = {epsilon}, b2 = {}, paths = {}, cpu = {:.2}+{:.2} s",
        sample.basic_count,
        sample.extra_count,
        sample.delta,
        sample.b2.map_or("-".into(), |b| b.to_string()),
        sample.paths_tracked,
        t.bottlenecks.cpu_s,
        t.sampling.cpu_s,
    );
    let mut body = sample_io::to_json(&sample);
    body["epsilon"] = json!(epsilon);
    let doc = write_json(cfg, "sample.json", document(sample_io::SAMPLE_FORMAT, cfg, body))?;
    if cfg.require_certificate && sample.epsilon_certified.is_none() {
        return Err(Failure::Uncertified(format!(
            "sample at delta = {} is not certified {epsilon}-dense",
            sample.delta
        )));
    }
    Ok(doc)
}

pub fn cmd_bottlenecks(cfg: &RunConfig) -> Result<Value, Failure> {
    let sys = load_system(cfg)?;
    let opts = BottleneckOptions {
        wfs_override: cfg.wfs_override,
        bounding_box: None,
    };
    let (report, time) = timed(|| bottlenecks_with(&sys, &cfg.solver, &opts));
    let report = report?;
    let mut body = serde_json::to_value(&report).expect("report");
    body["timings"] = json!({ "bottlenecks": time });
    if !report.finite {
        eprintln!("warning: {}", report.diagnosis);
    }
    write_json(cfg, "bottlenecks.json", document("varsample-bottlenecks/1", cfg, body))
}

pub fn cmd_reach(cfg: &RunConfig) -> Result<Value, Failure> {
    let epsilon0 = cfg.require("epsilon0", cfg.epsilon0).map_err(Failure::usage)?;
    let sys = load_system(cfg)?;
    let opts = ReachOptions {
        settings: cfg.solver.clone(),
        b2_override: cfg.b2_override,
        delta_override: cfg.delta,
        bounding_box: None,
    };
    let (est, time) = timed(|| reach_lower_bound(&sys, epsilon0, &opts));
    let est = est?;
    let mut w = create(cfg, "reach_points.csv")?;
    let n = sys.num_vars();
    let header: Vec<String> = (0..n).map(|i| format!("x{i}")).chain(["eta".into()]).collect();
    let mut text = header.join(",") + "\n";
    for (p, eta) in &est.per_point {
        let row: Vec<String> = p.iter().chain([eta]).map(f64::to_string).collect();
        text += &row.join(",");
        text.push('\n');
    }
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&cfg.out, e))?;
    let mut body = serde_json::to_value(&est).expect("estimate");
    if let Value::Object(m) = &mut body {
        m.remove("per_point");
    }
    body["epsilon0"] = json!(epsilon0);
    body["certificate"] = json!(est.certificate_line());
    body["timings"] = json!({ "total": time });
    println!("{}", est.certificate_line());
    let doc = write_json(cfg, "reach.json", document("varsample-reach/1", cfg, body))?;
    if cfg.require_certificate && !(est.sample_certified && est.lower_bound > 0.0) {
        return Err(Failure::Uncertified(
            "reach bound rests on a sample that is not certified dense".into(),
        ));
    }
    Ok(doc)
}

pub fn cmd_homology(cfg: &RunConfig) -> Result<Value, Failure> {
    let epsilon = cfg.require("epsilon", cfg.epsilon).map_err(Failure::usage)?;
    if let Some(k) = cfg.max_dim {
        if k == 0 || k > CECH_MAX_DIM {
            return Err(Error::TopDimension {
                requested: k,
                cap: CECH_MAX_DIM,
            }
            .into());
        }
    }
    let sys = load_system(cfg)?;
    let coeff = match cfg.coeff {
        CoeffArg::Gf2 => Coefficients::Gf2,
        CoeffArg::Rational => Coefficients::Rational,
    };
    let mut warnings: Vec<String> = Vec::new();
    let (report, sample) = match cfg.complex {
        ComplexArg::Vr => {
            if cfg.max_dim.is_some_and(|k| k != 2) {
                warnings.push("--max-dim is ignored for the modified Vietoris-Rips complex".into());
            }
            let sample = total_sample(&sys, epsilon, &sample_options(cfg))?;
            let k = build_modified_vr(&sample.points, epsilon)?;
            write_complex(cfg, &k)?;
            let report = betti_with(&k, 1, coeff)?;
            let inputs = CertifyInputs {
                wfs: cfg.wfs_override.or(sample.b2),
                local_reach_min: None,
                sample_epsilon: Some(sample.epsilon_certified.unwrap_or(f64::INFINITY)),
            };
            (certify(report, epsilon, CertifyMode::Wfs, &inputs)?, sample)
        }
        ComplexArg::Cech => {
            let d = sys.num_vars() - sys.codim();
            let max_dim = cfg.max_dim.unwrap_or((d + 1).min(CECH_MAX_DIM));
            let sample = total_sample(&sys, epsilon / 2.0, &sample_options(cfg))?;
            let k = build_cech(&sample.points, epsilon, max_dim)?;
            write_complex(cfg, &k)?;
            let report = betti_with(&k, max_dim - 1, coeff)?;
            let eta_min = SphereSystem::from_system(&sys)
                .and_then(|f| eta_over(&f, &sample.points))
                .map(|v| v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min));
            match eta_min {
                Ok(eta) => {
                    let inputs = CertifyInputs {
                        wfs: None,
                        local_reach_min: Some(eta),
                        sample_epsilon: Some(sample.epsilon_certified.unwrap_or(f64::INFINITY)),
                    };
                    (certify(report, epsilon, CertifyMode::Reach, &inputs)?, sample)
                }
                Err(e) => {
                    warnings.push(format!("no local reach bound available: {e}"));
                    (report, sample)
                }
            }
        }
    };
    if report.certificate.kind == CertificateKind::None {
        let failed: Vec<String> = report
            .certificate
            .checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| format!("{} ({} {} {} fails)", c.inequality, c.lhs, c.relation, c.rhs))
            .collect();
        warnings.push(if failed.is_empty() {
            "homology is not certified".into()
        } else {
            format!("homology is not certified: {}", failed.join("; "))
        });
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let betti: Vec<String> = report.betti.iter().map(usize::to_string).collect();
    eprintln!("betti = ({})", betti.join(", "));
    let mut body = serde_json::to_value(&report).expect("report");
    body["sample"] = sample_summary(&sample);
    body["warnings"] = json!(warnings);
    body["timings"] = json!(sample.timings);
    let doc = write_json(cfg, "homology.json", document("varsample-homology/1", cfg, body))?;
    if cfg.require_certificate && report.certificate.kind == CertificateKind::None {
        return Err(Failure::Uncertified("homology certificate does not hold".into()));
    }
    Ok(doc)
}

fn write_complex(cfg: &RunConfig, k: &varsample::complex::SimplicialComplex) -> Result<(), Failure> {
    let mut w = create(cfg, "complex.txt")?;
    k.write_text(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&cfg.out, e))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Value, Failure> {
    let sys = load_system(cfg)?;
    let (set, time) = timed(|| solve_square(&sys, &cfg.solver));
    let set = set?;
    let points: Vec<Value> = set
        .points
        .iter()
        .map(|p| json!(p.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()))
        .collect();
    let body = json!({
        "variables": sys.var_names(),
        "points": points,
        "status": set.status,
        "residuals": set.residuals,
        "multiplicity": set.multiplicity,
        "paths_tracked": set.paths_tracked,
        "real_points": real_points(&set, cfg.solver.real_tol),
        "timings": { "solve": time },
    });
    write_json(cfg, "solve.json", document("varsample-solve/1", cfg, body))
}
