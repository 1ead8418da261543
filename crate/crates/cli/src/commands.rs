use std::fmt::Write;
use std::path::Path;

use lodcdf_core::estimate::{crhf_exp_cdf, product_limit_with_variance, rhr_mle_with_variance};
use lodcdf_core::export::{step_cdf_csv, NumberFormat};
use lodcdf_core::simulation::{self, Scheme, SimConfig, StudyResult, SweepParam};
use lodcdf_core::{Dataset, LeftoverPolicy, StepCdf, TallyTable, VarianceEstimate};
use serde_json::{json, Value};

use crate::args::{
    CompareArgs, EstimateArgs, FormatArg, MethodArg, SchemeArg, SimulateArgs, StudyArgs, SweepArgs,
};
use crate::error::CliError;

/// Table precision, matching published tables of pointwise estimates.
pub const SIG_DIGITS: usize = 7;
const TABLE: NumberFormat = NumberFormat::Significant(SIG_DIGITS);

fn num(x: f64) -> String {
    TABLE.render(x)
}

fn point(x: f64) -> String {
    NumberFormat::Full.render(x)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: shown.clone(), message: e.to_string() })?;
    Dataset::from_reader(text.as_bytes()).map_err(|e| CliError::from_ingest(&shown, e))
}

struct Fits {
    product_limit: StepCdf,
    rhr_mle: StepCdf,
    crhf_exp: StepCdf,
}

impl Fits {
    fn new(table: &TallyTable) -> Self {
        // The dataset guarantees an exact observation, so every fit succeeds.
        Self {
            product_limit: product_limit_with_variance(table).expect("exact observation present"),
            rhr_mle: rhr_mle_with_variance(table).expect("exact observation present"),
            crhf_exp: crhf_exp_cdf(table).expect("exact observation present"),
        }
    }

    fn selected(&self, method: MethodArg) -> Vec<&StepCdf> {
        match method {
            MethodArg::ProductLimit => vec![&self.product_limit],
            MethodArg::RhrMle => vec![&self.rhr_mle],
            MethodArg::CrhfExp => vec![&self.crhf_exp],
            MethodArg::All => vec![&self.product_limit, &self.rhr_mle, &self.crhf_exp],
        }
    }
}

fn data_header(out: &mut String, command: &str, input: &Path, data: &Dataset, table: &TallyTable) {
    let _ = writeln!(out, "# lodcdf {command}");
    let _ = writeln!(out, "# input: {}", input.display());
    let _ = writeln!(
        out,
        "# n: {}, detected: {}, distinct: {}",
        data.len(),
        data.n_detected(),
        table.len()
    );
}

fn lower_note(f: &StepCdf) -> String {
    if f.lower_value() > 0.0 {
        format!("{} (estimate does not reach 0 below the first exact value)", num(f.lower_value()))
    } else {
        num(f.lower_value())
    }
}

fn variance_json(v: Option<VarianceEstimate>) -> (Value, Value) {
    match v {
        None => (Value::Null, Value::Null),
        Some(VarianceEstimate::Unstable) => (json!("unstable"), json!("unstable")),
        Some(VarianceEstimate::Finite(v)) => (json!(v), json!(v.sqrt())),
    }
}

fn stderr_cell(v: Option<VarianceEstimate>) -> String {
    TABLE.render_variance(v).1
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<String, CliError> {
    let data = load_dataset(&args.input)?;
    let table = data.tally();
    let fits = Fits::new(&table);
    let selected = fits.selected(args.method);
    let policy: LeftoverPolicy = args.policy.into();

    if args.format == FormatArg::Json {
        let estimates: Vec<Value> = selected
            .iter()
            .map(|f| {
                let mut v = serde_json::to_value(f).expect("serializable");
                v["mean"] = json!(f.mean(policy));
                v
            })
            .collect();
        let evaluations: Vec<Value> = args
            .eval_points
            .iter()
            .map(|&t| {
                let mut row = serde_json::Map::new();
                row.insert("t".into(), json!(t));
                for f in &selected {
                    let (est, var) = f.eval(t);
                    let (var, se) = variance_json(var);
                    row.insert(
                        f.method().as_str().into(),
                        json!({ "estimate": est, "variance": var, "stderr": se }),
                    );
                }
                Value::Object(row)
            })
            .collect();
        let doc = json!({
            "input": args.input.display().to_string(),
            "n": data.len(),
            "detected": data.n_detected(),
            "mean_policy": policy.as_str(),
            "estimates": estimates,
            "evaluations": evaluations,
        });
        return Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n");
    }

    let mut out = String::new();
    data_header(&mut out, "estimate", &args.input, &data, &table);
    for f in &selected {
        let _ = writeln!(out, "# {}: lower_value={}", f.method(), lower_note(f));
        let _ = writeln!(out, "# {}: mean({})={}", f.method(), policy.as_str(), num(f.mean(policy)));
    }

    if args.method == MethodArg::All {
        let points: Vec<f64> = if args.eval_points.is_empty() {
            fits.product_limit.jump_points().collect()
        } else {
            args.eval_points.clone()
        };
        out.push_str("t,product_limit,rhr_mle,sd_product_limit,sd_rhr_mle,crhf_exp\n");
        for t in points {
            let (pl, pl_var) = fits.product_limit.eval(t);
            let (rhr, rhr_var) = fits.rhr_mle.eval(t);
            let crhf = fits.crhf_exp.estimate_at(t);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                point(t),
                num(pl),
                num(rhr),
                stderr_cell(pl_var),
                stderr_cell(rhr_var),
                num(crhf)
            );
        }
        return Ok(out);
    }

    let f = selected[0];
    if args.eval_points.is_empty() {
        out.push_str(&step_cdf_csv(f, TABLE));
    } else {
        out.push_str("t,estimate,variance,stderr\n");
        for &t in &args.eval_points {
            let (est, var) = f.eval(t);
            let (var, se) = TABLE.render_variance(var);
            let _ = writeln!(out, "{},{},{},{}", point(t), num(est), var, se);
        }
    }
    Ok(out)
}

pub struct CompareRow {
    pub t: f64,
    pub product_limit: f64,
    pub rhr_mle: f64,
    pub ratio: f64,
    pub tie: bool,
}

/// Per exact value: both estimates, their ratio and whether censored values tie with it.
pub fn compare_rows(table: &TallyTable) -> Vec<CompareRow> {
    let fits = Fits::new(table);
    let exact = table.exact_tally().expect("exact observation present");
    fits.product_limit
        .jumps()
        .iter()
        .zip(fits.rhr_mle.jumps())
        .zip(exact.rows())
        .map(|((a, b), row)| CompareRow {
            t: a.t,
            product_limit: a.estimate,
            rhr_mle: b.estimate,
            ratio: b.estimate / a.estimate,
            tie: row.censored > 0,
        })
        .collect()
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String, CliError> {
    let data = load_dataset(&args.input)?;
    let table = data.tally();
    let fits = Fits::new(&table);
    let rows = compare_rows(&table);
    let means: Vec<(LeftoverPolicy, f64, f64)> = [LeftoverPolicy::AtFirstExact, LeftoverPolicy::AtZero]
        .into_iter()
        .map(|p| (p, fits.product_limit.mean(p), fits.rhr_mle.mean(p)))
        .collect();

    if args.format == FormatArg::Json {
        let doc = json!({
            "input": args.input.display().to_string(),
            "n": data.len(),
            "rows": rows.iter().map(|r| json!({
                "t": r.t,
                "product_limit": r.product_limit,
                "rhr_mle": r.rhr_mle,
                "ratio": r.ratio,
                "tie": r.tie,
            })).collect::<Vec<_>>(),
            "means": means.iter().map(|(p, a, b)| json!({
                "policy": p.as_str(),
                "product_limit": a,
                "rhr_mle": b,
                "difference": a - b,
            })).collect::<Vec<_>>(),
        });
        return Ok(serde_json::to_string_pretty(&doc).expect("serializable") + "\n");
    }

    let mut out = String::new();
    data_header(&mut out, "compare", &args.input, &data, &table);
    for (p, a, b) in &means {
        let _ = writeln!(
            out,
            "# mean({}): product_limit={}, rhr_mle={}, difference={}",
            p.as_str(),
            num(*a),
            num(*b),
            num(a - b)
        );
    }
    out.push_str("t,product_limit,rhr_mle,ratio,tie\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            point(r.t),
            num(r.product_limit),
            num(r.rhr_mle),
            num(r.ratio),
            u8::from(r.tie)
        );
    }
    Ok(out)
}

pub fn sim_config(study: &StudyArgs) -> Result<SimConfig, CliError> {
    let scheme = match study.scheme {
        SchemeArg::Time => Scheme::Time { lods: study.lods.clone() },
        SchemeArg::Random => Scheme::Random { mu_c: study.mu_c, sigma_c: study.sigma_c },
    };
    let cfg = SimConfig {
        mu: study.mu,
        sigma: study.sigma,
        scheme,
        n: study.n,
        m: study.m,
        seed: study.seed,
    };
    cfg.validate().map_err(|e| CliError::InvalidParams(e.to_string()))?;
    if study.threads == Some(0) {
        return Err(CliError::InvalidParams("threads must be at least 1".into()));
    }
    Ok(cfg)
}

fn workers(study: &StudyArgs) -> usize {
    study
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn study_json(cfg: &SimConfig, result: &StudyResult, full: bool) -> Value {
    let mut doc = json!({
        "config": cfg,
        "mean_diff": result.mean_diff,
        "std_error": result.std_error(),
        "n_pairs": result.n_pairs(),
        "n_degenerate": result.n_degenerate,
    });
    if full {
        doc["pairs"] = serde_json::to_value(&result.pairs).expect("serializable");
    }
    doc
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let cfg = sim_config(&args.study)?;
    let result = simulation::run_study_with_workers(&cfg, workers(&args.study)).map_err(CliError::from_sim)?;
    Ok(serde_json::to_string_pretty(&study_json(&cfg, &result, args.full)).expect("serializable") + "\n")
}

fn parse_param(name: &str) -> Result<SweepParam, CliError> {
    match name.trim() {
        "mu" => Ok(SweepParam::Mu),
        "sigma" => Ok(SweepParam::Sigma),
        other => Err(CliError::InvalidParams(format!("unknown parameter `{other}` (expected mu or sigma)"))),
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::InvalidParams(format!("`{s}` is not a number")))
}

/// Parses `name=START:END:COUNT` or `name=V1,V2,...`.
pub fn parse_grid(spec: &str) -> Result<(SweepParam, Vec<f64>), CliError> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::InvalidParams(format!("grid `{spec}` must look like sigma=0.5:4:8")))?;
    let param = parse_param(name)?;
    let parts: Vec<&str> = values.split(':').collect();
    let grid = match parts.as_slice() {
        [start, end, count] => {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::InvalidParams(format!("grid count `{count}` is not an integer")))?;
            simulation::linspace(parse_f64(start)?, parse_f64(end)?, count)
        }
        [list] => list.split(',').map(parse_f64).collect::<Result<_, _>>()?,
        _ => return Err(CliError::InvalidParams(format!("cannot parse grid `{spec}`"))),
    };
    if grid.is_empty() {
        return Err(CliError::InvalidParams("grid is empty".into()));
    }
    Ok((param, grid))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let (param, grid) = parse_grid(&args.grid)?;
    let mut study = args.study.clone();
    for fix in &args.fix {
        let (name, value) = fix
            .split_once('=')
            .ok_or_else(|| CliError::InvalidParams(format!("--fix `{fix}` must look like mu=0")))?;
        let fixed = parse_param(name)?;
        if fixed == param {
            return Err(CliError::InvalidParams(format!("{} is both fixed and varied", fixed.as_str())));
        }
        match fixed {
            SweepParam::Mu => study.mu = parse_f64(value)?,
            SweepParam::Sigma => study.sigma = parse_f64(value)?,
        }
    }
    // The varied parameter's base value is replaced at every grid point.
    match param {
        SweepParam::Mu => study.mu = grid[0],
        SweepParam::Sigma => study.sigma = grid[0],
    }
    let cfg = sim_config(&study)?;
    let points = simulation::sweep_with_workers(&cfg, param, &grid, workers(&study)).map_err(CliError::from_sim)?;

    let mut out = String::new();
    let _ = writeln!(out, "# lodcdf sweep");
    match &cfg.scheme {
        Scheme::Time { lods } => {
            let lods: Vec<String> = lods.iter().map(|l| point(*l)).collect();
            let _ = writeln!(out, "# scheme: time, lods: {}", lods.join(";"));
        }
        Scheme::Random { mu_c, sigma_c } => {
            let _ = writeln!(out, "# scheme: random, mu_c: {}, sigma_c: {}", point(*mu_c), point(*sigma_c));
        }
    }
    let fixed = match param {
        SweepParam::Mu => format!("sigma={}", point(cfg.sigma)),
        SweepParam::Sigma => format!("mu={}", point(cfg.mu)),
    };
    let _ = writeln!(out, "# varied: {}, fixed: {}", param.as_str(), fixed);
    let _ = writeln!(out, "# n: {}, m: {}, seed: {}", cfg.n, cfg.m, cfg.seed);
    out.push_str("param,mean_diff,n_pairs,n_degenerate\n");
    for p in &points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            point(p.param),
            num(p.result.mean_diff),
            p.result.n_pairs(),
            p.result.n_degenerate
        );
    }
    Ok(out)
}
