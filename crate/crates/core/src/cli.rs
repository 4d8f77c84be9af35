//! Command implementations behind the `chifield` binary. Every output file
//! starts with the tool version, the config hash, the seed and the resolved
//! settings. CSV files carry nothing time-, path- or thread-dependent, so
//! reruns of the same configuration are byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance::{self, Scale};
use crate::analytic::{
    ec_density_a1, ec_sum_product, hermite, inv_chi_constant, lk_sphere_circle, maxima_density_sphere,
    maxima_prefactor,
};
use crate::config::{Command, ConfigError, ExperimentConfig, ModelChoice};
use crate::critcount::{hessian_covariance_oracle, simulate_counts_with_points, OracleSource, SimulationPlan};
use crate::error::Error;
use crate::kacrice::{
    estimate_a1_a2, estimate_dk, estimate_ek, estimate_ek_tilted, expected_critical_points, expected_maxima,
    CountFormulaInput, HessianLaw, MCEstimate,
};
use crate::rng::RngStream;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Compute(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(Error::from(e))
    }
}

impl Failure {
    /// 2 for configuration errors, 1 for failures during computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 1,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        match self {
            Failure::Config(e) => {
                let mut v = json!({ "status": "error", "kind": "config", "message": e.message });
                if let Some(f) = &e.file {
                    v["file"] = json!(f.display().to_string());
                }
                if let Some(l) = e.line {
                    v["line"] = json!(l);
                }
                v
            }
            Failure::Compute(e) => json!({ "status": "error", "kind": "compute", "message": e.to_string() }),
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    /// Text for standard output (tables, file list).
    pub report: String,
    /// False when `validate` saw a failing criterion.
    pub success: bool,
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn header(cfg: &ExperimentConfig) -> String {
    let mut s = format!("# chifield {VERSION}\n# config_sha256 = {}\n", cfg.hash());
    for (k, v) in cfg.canonical() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn write_csv(cfg: &ExperimentConfig, name: &str, table: &Table) -> Result<PathBuf, Failure> {
    let mut s = header(cfg);
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for r in &table.rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    let path = cfg.out.join(name);
    std::fs::write(&path, s)?;
    Ok(path)
}

fn write_json(cfg: &ExperimentConfig, name: &str, results: Value) -> Result<PathBuf, Failure> {
    let config: serde_json::Map<String, Value> =
        cfg.canonical().into_iter().chain(cfg.run_settings()).map(|(k, v)| (k, Value::String(v))).collect();
    let doc = json!({
        "tool": "chifield",
        "version": VERSION,
        "config_sha256": cfg.hash(),
        "seed": cfg.seed,
        "command": cfg.command.name(),
        "config": config,
        "results": results,
    });
    let path = cfg.out.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))? + "\n")?;
    Ok(path)
}

fn stream(cfg: &ExperimentConfig, i: usize) -> RngStream {
    RngStream::new(cfg.seed, i as u64)
}

fn law(cfg: &ExperimentConfig) -> Result<HessianLaw, Failure> {
    let model = cfg.hessian.ok_or_else(|| ConfigError::new("no Hessian model"))?;
    Ok(HessianLaw::from_model(&model)?)
}

fn est_cells(e: &MCEstimate) -> [String; 2] {
    [num(e.value), num(e.std_error)]
}

/// Runs the configured command, writing its outputs under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, Failure> {
    std::fs::create_dir_all(&cfg.out)?;
    let name = cfg.command.name();
    let mut files = Vec::new();
    let mut success = true;
    let mut report = String::new();
    match cfg.command {
        Command::ClosedForm => {
            let mut t = Table::new(&["t", "hermite2", "a1_closed", "maxima_density_sphere", "ec_sum_product"]);
            let lk = lk_sphere_circle(cfg.r);
            for &x in &cfg.t_grid {
                let a1 = cfg.hessian.map_or(f64::NAN, |h| ec_density_a1(x, &h));
                t.push(vec![
                    num(x),
                    num(hermite(2, x)),
                    num(a1),
                    num(maxima_density_sphere(cfg.r, x, cfg.sign_variant)),
                    num(ec_sum_product(&lk, x)),
                ]);
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            let inv = inv_chi_constant(cfg.k, cfg.m).ok();
            files.push(write_json(
                cfg,
                &format!("{name}.json"),
                json!({
                    "inv_chi_constant": inv,
                    "maxima_prefactor": if cfg.k >= 1 { Some(maxima_prefactor(cfg.m, cfg.k)) } else { None },
                    "lipschitz_killing": lk.curvatures,
                    "sigma2": cfg.sigma2,
                    "c": cfg.c,
                    "r": cfg.r,
                }),
            )?);
        }
        Command::EstimateEk => {
            let law = law(cfg)?;
            let tilted = cfg.k > cfg.m;
            let mut t = Table::new(&["t", "ek", "ek_se", "ek_tilted", "ek_tilted_se", "n"]);
            let mut rows = Vec::new();
            for (i, &x) in cfg.t_grid.iter().enumerate() {
                let e = estimate_ek(cfg.k, x, &law, cfg.n, stream(cfg, i))?;
                let w = if tilted { Some(estimate_ek_tilted(cfg.k, x, &law, cfg.n, stream(cfg, i))?) } else { None };
                let [a, b] = est_cells(&e);
                let [c, d] = w.as_ref().map_or([String::new(), String::new()], est_cells);
                t.push(vec![num(x), a, b, c, d, cfg.n.to_string()]);
                rows.push(json!({ "t": x, "ek": e, "ek_tilted": w }));
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!(rows))?);
        }
        Command::EstimateDk => {
            let law = law(cfg)?;
            let mut t = Table::new(&["t", "dk", "dk_se", "a1_closed", "n"]);
            let mut rows = Vec::new();
            for (i, &x) in cfg.t_grid.iter().enumerate() {
                let d = estimate_dk(cfg.k, x, &law, cfg.n, stream(cfg, i))?;
                let a1 = if cfg.k == 2 { cfg.hessian.map(|h| ec_density_a1(x, &h)) } else { None };
                let [a, b] = est_cells(&d);
                t.push(vec![num(x), a, b, a1.map_or(String::new(), num), cfg.n.to_string()]);
                rows.push(json!({ "t": x, "dk": d, "a1_closed": a1 }));
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!(rows))?);
        }
        Command::A1a2 => {
            let law = law(cfg)?;
            let model = cfg.hessian.expect("resolved");
            let mut t = Table::new(&["t", "a1", "a1_se", "a2", "a2_se", "d", "d_se", "a1_closed"]);
            let mut rows = Vec::new();
            for (i, &x) in cfg.t_grid.iter().enumerate() {
                let (a1, a2) = estimate_a1_a2(2, x, &law, cfg.n, stream(cfg, i))?;
                let d = estimate_dk(2, x, &law, cfg.n, stream(cfg, i))?;
                let closed = ec_density_a1(x, &model);
                let [p, q] = est_cells(&a1);
                let [r, s] = est_cells(&a2);
                let [u, v] = est_cells(&d);
                t.push(vec![num(x), p, q, r, s, u, v, num(closed)]);
                rows.push(json!({ "t": x, "a1": a1, "a2": a2, "d": d, "a1_closed": closed }));
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!(rows))?);
        }
        Command::ExpectedMaxima => {
            let model = cfg.hessian.expect("resolved");
            let mut t = Table::new(&[
                "t",
                "expected_maxima",
                "expected_maxima_se",
                "maxima_density_sphere",
                "expected_critical_points",
                "expected_critical_points_se",
            ]);
            let mut rows = Vec::new();
            for (i, &x) in cfg.t_grid.iter().enumerate() {
                let mut input = CountFormulaInput::isotropic(cfg.k, x, cfg.volume, &model)?;
                input.variant = cfg.sign_variant;
                let mx = expected_maxima(&input, cfg.n, stream(cfg, i))?;
                let closed = (cfg.k == 2 && cfg.model == ModelChoice::Sphere)
                    .then(|| maxima_density_sphere(cfg.r, x, cfg.sign_variant));
                let cp = if cfg.k > cfg.m { Some(expected_critical_points(&input, cfg.n, stream(cfg, i))?) } else { None };
                let [a, b] = est_cells(&mx);
                let [c, d] = cp.as_ref().map_or([String::new(), String::new()], est_cells);
                t.push(vec![num(x), a, b, closed.map_or(String::new(), num), c, d]);
                rows.push(json!({ "t": x, "expected_maxima": mx, "maxima_density_sphere": closed, "expected_critical_points": cp }));
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!(rows))?);
        }
        Command::SimulateCount => {
            let spec = cfg.spectrum.as_ref().expect("resolved");
            let plan = SimulationPlan {
                k: cfg.k as usize,
                thresholds: cfg.t_grid.clone(),
                realizations: cfg.n,
                depth: cfg.depth,
                pixel_grid: cfg.pixel,
            };
            let runs = simulate_counts_with_points(spec, &plan, stream(cfg, 0))?;
            let mut counts = Table::new(&["realization", "t", "above", "maxima", "signed_ec", "pixel_ec"]);
            let mut points = Table::new(&[
                "realization", "x", "y", "z", "value", "index", "eig1", "eig2", "grad_norm", "degenerate",
            ]);
            for (c, pts) in &runs {
                for (j, &x) in cfg.t_grid.iter().enumerate() {
                    counts.push(vec![
                        c.realization.to_string(),
                        num(x),
                        c.above[j].to_string(),
                        c.maxima[j].to_string(),
                        c.signed_ec[j].map_or(String::new(), |v| v.to_string()),
                        c.pixel_ec.as_ref().map_or(String::new(), |p| p[j].to_string()),
                    ]);
                }
                for p in pts {
                    points.push(vec![
                        c.realization.to_string(),
                        num(p.location[0]),
                        num(p.location[1]),
                        num(p.location[2]),
                        num(p.value),
                        p.index.to_string(),
                        num(p.hess_eigs[0]),
                        num(p.hess_eigs[1]),
                        num(p.grad_norm),
                        p.degenerate.to_string(),
                    ]);
                }
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &counts)?);
            files.push(write_csv(cfg, "critical-points.csv", &points)?);
            let mut summary = Vec::new();
            for (j, &x) in cfg.t_grid.iter().enumerate() {
                let stats = |f: &dyn Fn(&crate::critcount::RealizationCounts) -> Option<f64>| {
                    let v: Vec<f64> = runs.iter().filter_map(|(c, _)| f(c)).collect();
                    let n = v.len() as f64;
                    let m = v.iter().sum::<f64>() / n;
                    let var = v.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                    json!({ "mean": m, "std_error": (var / n).sqrt(), "count": v.len() })
                };
                let mut row = json!({
                    "t": x,
                    "above": stats(&|c| Some(c.above[j] as f64)),
                    "maxima": stats(&|c| Some(c.maxima[j] as f64)),
                    "signed_ec": stats(&|c| c.signed_ec[j].map(|v| v as f64)),
                });
                if cfg.k == 2 {
                    row["maxima_density_sphere"] = json!(maxima_density_sphere(cfg.r, x, cfg.sign_variant));
                    row["ec_sum_product"] = json!(ec_sum_product(&lk_sphere_circle(cfg.r), x));
                }
                if plan.pixel_grid.is_some() {
                    let agree = runs
                        .iter()
                        .filter(|(c, _)| c.signed_ec[j].is_some_and(|s| Some(s) == c.pixel_ec.as_ref().map(|p| p[j])))
                        .count();
                    row["pixel_agreement"] = json!(agree as f64 / runs.len() as f64);
                }
                summary.push(row);
            }
            let degenerate: usize = runs.iter().map(|(c, _)| c.degenerate).sum();
            files.push(write_json(
                cfg,
                &format!("{name}.json"),
                json!({ "realizations": runs.len(), "degenerate_points": degenerate, "thresholds": summary }),
            )?);
        }
        Command::OracleHessian => {
            let source = match (cfg.model.planar_kind(), &cfg.spectrum) {
                (Some(kind), _) => OracleSource::Planar(kind),
                (None, Some(spec)) => OracleSource::Sphere(spec.clone()),
                _ => return Err(ConfigError::new("oracle-hessian needs model berry, bf or a spectrum").into()),
            };
            let rep = hessian_covariance_oracle(&source, cfg.n, stream(cfg, 0))?;
            let model = cfg.hessian.expect("resolved");
            let cov = model.covariance();
            let mut t = Table::new(&["statistic", "estimate", "std_error", "model"]);
            for (name, e, target) in [
                ("var_h1", &rep.est_var_h1, cov[0][0]),
                ("cov_h1h3", &rep.est_cov_h13, cov[0][2]),
                ("var_h2", &rep.est_var_h2, cov[1][1]),
                ("e_h1_gamma", &rep.est_e_h1_gamma, -1.0),
                ("c_minus_sigma2", &rep.est_c_minus_sigma2, model.c_minus_sigma2()),
            ] {
                t.push(vec![name.to_string(), num(e.value), num(e.std_error), num(target)]);
            }
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!({ "report": rep, "model_covariance": cov }))?);
        }
        Command::Validate => {
            let scale = if cfg.quick { Scale::Quick } else { Scale::Full };
            let ids: Vec<&str> = if !cfg.criteria.is_empty() {
                cfg.criteria.iter().map(String::as_str).collect()
            } else if cfg.quick {
                acceptance::QUICK.to_vec()
            } else {
                acceptance::ALL.to_vec()
            };
            let mut t = Table::new(&["criterion", "result", "summary"]);
            let mut outcomes = Vec::new();
            for id in ids {
                let o = acceptance::run(id, scale, cfg.seed);
                let _ = writeln!(report, "{o}");
                for d in &o.details {
                    let _ = writeln!(report, "    {d}");
                }
                success &= o.pass;
                t.push(vec![
                    o.id.clone(),
                    if o.pass { "PASS" } else { "FAIL" }.to_string(),
                    format!("\"{}\"", o.summary.replace('"', "'")),
                ]);
                outcomes.push(o);
            }
            // timings vary between runs, so they stay out of the CSV
            files.push(write_csv(cfg, &format!("{name}.csv"), &t)?);
            files.push(write_json(cfg, &format!("{name}.json"), json!(outcomes))?);
        }
    }
    for f in &files {
        let _ = writeln!(report, "wrote {}", f.display());
    }
    Ok(RunOutput { files, report, success })
}
