//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use lodcdf_core::baselines::{ecdf, km_negation_oracle};
use lodcdf_core::estimate::{
    crhf_exp_cdf, greenwood_variance, product_limit_cdf, product_limit_with_variance, rhr_log_likelihood,
    rhr_log_likelihood_curvature, rhr_mle_cdf, rhr_mle_with_variance, rhr_table, rhr_variance,
};
use lodcdf_core::rng::{open_unit, stream, Purpose};
use lodcdf_core::simulation::{run_study, Scheme, SimConfig, StudyResult};
use lodcdf_core::{Dataset, Observation, StepCdf, TallyTable, VarianceEstimate};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lodcdf")
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run_bin(args: &[&str]) -> Result<(Vec<u8>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(bin()).args(args).env_remove("LODCDF_SEED").output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok((out.stdout, elapsed))
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    if want == 0.0 {
        got == 0.0
    } else {
        ((got - want) / want).abs() <= tol
    }
}

/// Dataset generator for the randomised criteria: a value grid of `levels`
/// points with spacing 0.5 (ties are frequent) or continuous values.
struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn new(criterion: u64) -> Self {
        Self { rng: stream(20_240_501, criterion, 0, Purpose::Lifetimes) }
    }

    fn unit(&mut self) -> f64 {
        open_unit(&mut self.rng)
    }

    fn below(&mut self, k: usize) -> usize {
        ((self.unit() * k as f64) as usize).min(k - 1)
    }

    fn size(&mut self) -> usize {
        2 + self.below(199)
    }

    fn gridded(&mut self) -> Dataset {
        let n = self.size();
        let levels = 1 + self.below(40);
        let p_censor = 0.9 * self.unit();
        let mut obs: Vec<Observation> = (0..n)
            .map(|_| Observation { value: self.below(levels) as f64 * 0.5, detected: self.unit() >= p_censor })
            .collect();
        if !obs.iter().any(|o| o.detected) {
            obs[0].detected = true;
        }
        Dataset::new(obs).unwrap()
    }

    fn tie_free(&mut self) -> Dataset {
        let n = self.size();
        let p_censor = 0.9 * self.unit();
        let mut obs: Vec<Observation> = (0..n)
            .map(|_| Observation { value: 10.0 * self.unit(), detected: self.unit() >= p_censor })
            .collect();
        if !obs.iter().any(|o| o.detected) {
            obs[0].detected = true;
        }
        Dataset::new(obs).unwrap()
    }
}

fn probe_points(f: &StepCdf) -> Vec<f64> {
    let mut pts = vec![-1.0];
    for j in f.jumps() {
        pts.extend([j.t - 0.25, j.t, j.t + 0.25]);
    }
    pts
}

/// Chain-rule product over every distinct value, exponent `1{d_j >= 1}`.
fn all_points_product_limit(table: &TallyTable, t: f64) -> f64 {
    table.rows().iter().rev().filter(|r| r.value > t).fold(1.0, |acc, r| {
        acc * (1.0 - r.exact as f64 / r.at_or_below as f64).powi(i32::from(r.exact >= 1))
    })
}

fn finite_variance(v: Option<VarianceEstimate>) -> Option<f64> {
    match v {
        Some(VarianceEstimate::Finite(x)) => Some(x),
        _ => None,
    }
}

const TABLE_POINTS: [f64; 12] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 9.0, 12.0, 14.0, 15.0, 17.0];

/// Published pointwise estimates for the copper data: product-limit,
/// reversed-hazard, and their standard deviations.
const TABLE: [[f64; 4]; 12] = [
    [0.2981959, 0.2799105, 0.07438262, 0.07541081],
    [0.4066308, 0.4043151, 0.07924497, 0.07922304],
    [0.6235005, 0.6199498, 0.07582786, 0.07644654],
    [0.7590441, 0.7547215, 0.06362657, 0.06510580],
    [0.7820455, 0.7816759, 0.06125617, 0.06159916],
    [0.8280481, 0.8276568, 0.05555525, 0.05598826],
    [0.8510495, 0.8506473, 0.05211982, 0.05261188],
    [0.8970522, 0.8966282, 0.04362071, 0.04428404],
    [0.9179138, 0.9174800, 0.03933148, 0.03953237],
    [0.9387755, 0.9383319, 0.03424881, 0.03449597],
    [0.9591837, 0.9591837, 0.02826635, 0.02826635],
    [0.9795918, 0.9795918, 0.02019884, 0.02019884],
];

fn criterion_1() -> Outcome {
    let points = TABLE_POINTS.map(|t| t.to_string()).join(",");
    let path = fixture("copper_basin_trough_reconstructed.csv");
    let (stdout, elapsed) = run_bin(&["estimate", path.to_str().unwrap(), "--method", "all", "--at", &points])?;
    let text = String::from_utf8(stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or("no header")?.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).ok_or(format!("missing column {name}"));
    let cols = [col("product_limit")?, col("rhr_mle")?, col("sd_product_limit")?, col("sd_rhr_mle")?];
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    ensure!(rows.len() == TABLE.len(), "expected {} rows, got {}", TABLE.len(), rows.len());
    let mut worst: f64 = 0.0;
    for ((row, want), t) in rows.iter().zip(TABLE).zip(TABLE_POINTS) {
        ensure!(row[0] == t, "row for t={t} reports t={}", row[0]);
        for (c, w) in cols.iter().zip(want) {
            let err = (row[*c] - w).abs();
            ensure!(err <= 1e-6, "t={t} column {}: {} vs {w}", header[*c], row[*c]);
            worst = worst.max(err);
        }
    }
    ensure!(elapsed < Duration::from_secs(1), "runtime {elapsed:?}");
    Ok(format!("48 cells within 1e-6 (max abs error {worst:.1e}), runtime {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let data = Dataset::from_reader(std::fs::read_to_string(fixture("six.csv")).unwrap().as_bytes())
        .map_err(|e| e.to_string())?;
    let table = data.tally();
    let levels = |f: &StepCdf| -> Vec<f64> {
        std::iter::once(f.lower_value()).chain(f.jumps().iter().map(|j| j.estimate)).collect()
    };
    let pl = product_limit_cdf(&table).map_err(|e| e.to_string())?;
    let rhr = rhr_mle_cdf(&table).map_err(|e| e.to_string())?;
    let want_pl = [2.0 / 9.0, 4.0 / 9.0, 2.0 / 3.0, 5.0 / 6.0, 1.0];
    let want_rhr = [0.0, 5.0 / 12.0, 5.0 / 8.0, 5.0 / 6.0, 1.0];
    for (name, got, want) in [("product-limit", levels(&pl), want_pl), ("rhr-mle", levels(&rhr), want_rhr)] {
        ensure!(got.len() == 5, "{name}: {} levels", got.len());
        for (g, w) in got.iter().zip(want) {
            ensure!(rel_close(*g, w, 1e-12), "{name}: {got:?}");
        }
    }
    let gw = finite_variance(greenwood_variance(&table, &pl).map_err(|e| e.to_string())?.eval(1.0).1)
        .ok_or("greenwood variance at t=1 not finite")?;
    let rv = finite_variance(rhr_variance(&table, &rhr).map_err(|e| e.to_string())?.eval(1.0).1)
        .ok_or("rhr variance at t=1 not finite")?;
    ensure!(rel_close(gw, 4.0 / 81.0, 1e-12), "greenwood variance {gw}");
    ensure!(rel_close(rv, 425.0 / 8640.0, 1e-12), "rhr variance {rv}");
    Ok("levels, greenwood 4/81 and rhr 425/8640 within 1e-12 relative".into())
}

fn criterion_3() -> Outcome {
    let mut gen = Gen::new(3);
    let datasets = 1000;
    for i in 0..datasets {
        let data = gen.gridded();
        let table = data.tally();
        let pl = product_limit_with_variance(&table).map_err(|e| e.to_string())?;
        let rhr = rhr_mle_with_variance(&table).map_err(|e| e.to_string())?;
        let crhf = crhf_exp_cdf(&table).map_err(|e| e.to_string())?;
        for t in probe_points(&pl) {
            let (a, b, c) = (rhr.estimate_at(t), pl.estimate_at(t), crhf.estimate_at(t));
            ensure!(a <= b && b <= c, "dataset {i} t={t}: ordering {a} {b} {c}");
            ensure!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&c), "dataset {i} t={t}: range");
            ensure!(b == all_points_product_limit(&table, t), "dataset {i} t={t}: all-points form differs");
        }
        for f in [&pl, &rhr, &crhf] {
            let mut prev = f.lower_value();
            ensure!((0.0..=1.0).contains(&prev), "dataset {i}: lower value {prev}");
            for j in f.jumps() {
                ensure!(j.estimate >= prev && j.estimate <= 1.0, "dataset {i} {}: not monotone", f.method());
                prev = j.estimate;
            }
        }
        for f in [&pl, &rhr] {
            for j in f.jumps() {
                let v = finite_variance(j.variance).ok_or(format!("dataset {i}: non-finite variance"))?;
                ensure!(v >= 0.0, "dataset {i}: negative variance {v}");
            }
        }

        let exact = Dataset::new(data.observations().iter().map(|o| Observation::exact(o.value)).collect()).unwrap();
        let et = exact.tally();
        let (pe, re, e) = (product_limit_cdf(&et).unwrap(), rhr_mle_cdf(&et).unwrap(), ecdf(&exact));
        ensure!(pe.lower_value() == 0.0 && re.lower_value() == 0.0, "dataset {i}: uncensored lower value");
        for ((a, b), c) in pe.jumps().iter().zip(re.jumps()).zip(e.jumps()) {
            ensure!(a.estimate == b.estimate, "dataset {i}: uncensored estimators differ");
            ensure!((a.estimate - c.estimate).abs() <= 1e-12 * c.estimate, "dataset {i}: not the ECDF");
        }
    }
    Ok(format!("{datasets} datasets"))
}

fn criterion_4() -> Outcome {
    let mut gen = Gen::new(4);
    let datasets = 500;
    for i in 0..datasets {
        let data = gen.tie_free();
        ensure!(data.tally().len() == data.len(), "dataset {i} has ties");
        let pl = product_limit_cdf(&data.tally()).unwrap();
        let km = km_negation_oracle(&data);
        ensure!(pl.jumps().len() == km.jumps().len(), "dataset {i}: jump counts differ");
        for (a, b) in pl.jumps().iter().zip(km.jumps()) {
            ensure!(a.t == b.t, "dataset {i}: jump points differ");
            ensure!((a.estimate - b.estimate).abs() <= 1e-12, "dataset {i} t={}: {} vs {}", a.t, a.estimate, b.estimate);
        }
        ensure!((pl.lower_value() - km.lower_value()).abs() <= 1e-12, "dataset {i}: lower values differ");
    }
    let eps = 0.01;
    for i in 0..datasets {
        let mut data = gen.gridded();
        let table = data.tally();
        let exact_values: Vec<f64> = table.exact_tally().unwrap().rows().iter().map(|r| r.value).collect();
        if !data.observations().iter().any(|o| !o.detected && exact_values.contains(&o.value)) {
            let mut obs = data.observations().to_vec();
            let e = obs.iter().find(|o| o.detected).unwrap().value;
            obs.push(Observation::censored(e));
            data = Dataset::new(obs).unwrap();
        }
        let table = data.tally();
        let moved: Vec<Observation> = data
            .observations()
            .iter()
            .map(|o| if !o.detected && exact_values.contains(&o.value) { Observation::censored(o.value + eps) } else { *o })
            .collect();
        let rhr = rhr_mle_cdf(&table).unwrap();
        let pl = product_limit_cdf(&Dataset::new(moved).unwrap().tally()).unwrap();
        for j in rhr.jumps() {
            let v = pl.estimate_at(j.t);
            ensure!((j.estimate - v).abs() <= 1e-12, "tie dataset {i} t={}: {} vs {v}", j.t, j.estimate);
        }
        ensure!((rhr.lower_value() - pl.lower_value()).abs() <= 1e-12, "tie dataset {i}: lower values differ");
    }
    Ok(format!("{datasets} tie-free datasets, {datasets} datasets with censored/exact ties"))
}

/// Log-likelihood term of one row as a function of its rate.
fn row_term(d: f64, below: f64, r: f64) -> f64 {
    let lhs = if d == 0.0 { 0.0 } else { d * r.ln() };
    let rhs = if below == 0.0 { 0.0 } else { below * (1.0 - r).ln() };
    lhs + rhs
}

fn oracle_log_likelihood(table: &TallyTable, rates: &[f64]) -> f64 {
    table.rows().iter().zip(rates).skip(1).map(|(r, &x)| row_term(r.exact as f64, r.below() as f64, x)).sum()
}

fn criterion_5() -> Outcome {
    let mut gen = Gen::new(5);
    let tallies = 100;
    let grid: Vec<f64> = (1..10_000).map(|i| i as f64 * 1e-4).collect();
    let h = 1e-5;
    let (mut coords, mut curvatures, mut worst) = (0usize, 0usize, 0f64);
    for i in 0..tallies {
        let table = gen.gridded().tally();
        let rates = rhr_table(&table).dense(table.len());
        let best = oracle_log_likelihood(&table, &rates);
        let lib = rhr_log_likelihood(&table, &rates);
        ensure!((best - lib).abs() <= 1e-9 * best.abs().max(1.0), "tally {i}: log-likelihood {lib} vs {best}");
        for k in 1..table.len() {
            let row = table.rows()[k];
            let mut trial = rates.clone();
            for &g in &grid {
                trial[k] = g;
                let l = oracle_log_likelihood(&table, &trial);
                // allowance for rounding in the summed log-likelihood
                ensure!(l <= best + 1e-12 * best.abs(), "tally {i} row {k}: rate {g} gives {l} > {best} at {}", rates[k]);
            }
            coords += 1;
            if row.exact >= 1 && row.below() > 0 {
                let (d, b, r) = (row.exact as f64, row.below() as f64, rates[k]);
                // the log-likelihood is separable, so only row k varies along this coordinate
                let fd = (row_term(d, b, r + h) - 2.0 * row_term(d, b, r) + row_term(d, b, r - h)) / (h * h);
                let exact = rhr_log_likelihood_curvature(&table, k);
                let rel = ((fd - exact) / exact).abs();
                ensure!(rel <= 1e-5, "tally {i} row {k}: curvature {fd} vs {exact}");
                worst = worst.max(rel);
                curvatures += 1;
            }
        }
    }
    Ok(format!("{tallies} tallies, {coords} coordinates on a 1e-4 grid, {curvatures} curvatures (max rel error {worst:.1e})"))
}

fn study(mu: f64, sigma: f64, scheme: Scheme) -> Result<(StudyResult, Duration), String> {
    let cfg = SimConfig::new(mu, sigma, scheme, 1000, 42);
    let start = Instant::now();
    let result = run_study(&cfg).map_err(|e| e.to_string())?;
    Ok((result, start.elapsed()))
}

fn criterion_6() -> Outcome {
    let (time1, t_a) = study(0.0, 1.0, Scheme::time_default())?;
    let (random1, t_b) = study(0.0, 1.0, Scheme::random_default())?;
    let (time15, t_c) = study(0.0, 15.0, Scheme::time_default())?;
    let summary = |r: &StudyResult| format!("{:.3e} (se {:.3e})", r.mean_diff, r.std_error());
    let detail = format!(
        "time sigma=1: {}, random sigma=1: {}, time sigma=15: {}",
        summary(&time1),
        summary(&random1),
        summary(&time15)
    );
    for t in [t_a, t_b, t_c] {
        ensure!(t < Duration::from_secs(30), "runtime {t:?}; {detail}");
    }
    ensure!(time1.mean_diff - 2.0 * time1.std_error() > 0.0, "time scheme mean_diff not positive; {detail}");
    ensure!(random1.mean_diff - 2.0 * random1.std_error() > 0.0, "random scheme mean_diff not positive; {detail}");
    let margin = 2.0 * (time1.std_error().powi(2) + time15.std_error().powi(2)).sqrt();
    ensure!(time1.mean_diff.abs() - time15.mean_diff.abs() > margin, "no decay from sigma=1 to sigma=15; {detail}");
    Ok(detail)
}

fn criterion_7() -> Outcome {
    let simulate = ["simulate", "--mu", "0", "--sigma", "1", "--scheme", "random", "--m", "500", "--seed", "9", "--full"];
    let sweep = ["sweep", "--fix", "mu=0", "--grid", "sigma=0.5:4:8", "--m", "300", "--seed", "9"];
    let mut invocations = 0;
    for base in [&simulate[..], &sweep[..]] {
        let reference = run_bin(base)?.0;
        ensure!(run_bin(base)?.0 == reference, "{} differs between reruns", base[0]);
        for threads in ["1", "2", "4", "7"] {
            let mut args = base.to_vec();
            args.extend(["--threads", threads]);
            ensure!(run_bin(&args)?.0 == reference, "{} differs with --threads {threads}", base[0]);
            invocations += 1;
        }
        invocations += 2;
    }
    Ok(format!("{invocations} invocations byte-identical across reruns and 1/2/4/7 workers"))
}

fn main() {
    let criteria: [(&str, Check); 7] = [
        ("1 copper table reproduction", criterion_1),
        ("2 six-observation fixture", criterion_2),
        ("3 property suite", criterion_3),
        ("4 oracle equivalence", criterion_4),
        ("5 likelihood maximum and curvature", criterion_5),
        ("6 simulation signs", criterion_6),
        ("7 determinism", criterion_7),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {name}: {reason}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
