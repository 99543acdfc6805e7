//! Command-line front end: construct families, run verification sweeps,
//! compute δ-invariants and emit JSON/CSV reports.
//!
//! Exit codes: 0 on pass, 1 on verification failure, 2 on usage or input
//! errors.

use clap::{Args, Parser, Subcommand};
use deltalag::catalog::{build_chart, builtin_families, ChartSpec};
use deltalag::curvature::{gauss_curvature_tensor, second_fundamental_form, CurvatureTensor};
use deltalag::delta::{
    delta_bruteforce_oracle, delta_invariant, improved_rhs, DeltaOptions, TupleSpec,
};
use deltalag::families::{first_integral_residual, integrate_mu_nu, FamilyKind, OdeState};
use deltalag::immersion::ChartImmersion;
use deltalag::report::{run_verification, VerifyConfig};
use deltalag::Tolerances;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "deltalag",
    about = "Verification lab for δ(2,2) curvature invariants of Lagrangian submanifolds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args, Clone)]
struct ChartArgs {
    /// Built-in family name (see `families`).
    #[arg(long)]
    family: Option<String>,
    /// JSON chart document (family reference or polynomial graph).
    #[arg(long)]
    chart: Option<std::path::PathBuf>,
    /// Family parameter μ₀.
    #[arg(long)]
    mu0: Option<f64>,
    /// Family parameter c.
    #[arg(long)]
    cparam: Option<f64>,
    /// Intrinsic dimension m (gradient graphs, tori).
    #[arg(long)]
    m: Option<usize>,
    /// Potential degree (gradient graphs).
    #[arg(long)]
    degree: Option<usize>,
    /// Any parameter as key=value; may repeat.
    #[arg(long = "param", value_parser = parse_key_value)]
    params: Vec<(String, f64)>,
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.to_string(), v))
}

impl ChartArgs {
    fn param_map(&self, seed: Option<u64>, family: &str) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        if let Some(v) = self.mu0 {
            map.insert("mu0".to_string(), v);
        }
        if let Some(v) = self.cparam {
            map.insert("c".to_string(), v);
        }
        if let Some(v) = self.m {
            map.insert("m".to_string(), v as f64);
        }
        if let Some(v) = self.degree {
            map.insert("degree".to_string(), v as f64);
        }
        if let (Some(s), "gradient-graph") = (seed, family) {
            map.entry("seed".to_string()).or_insert(s as f64);
        }
        for (k, v) in &self.params {
            map.insert(k.clone(), *v);
        }
        map
    }

    fn spec(&self, seed: Option<u64>) -> Result<ChartSpec, String> {
        match (&self.family, &self.chart) {
            (Some(name), None) => Ok(ChartSpec::Family {
                family: name.clone(),
                params: self.param_map(seed, name),
            }),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                ChartSpec::from_json(&text).map_err(|e| format!("bad chart document: {e}"))
            }
            _ => Err("exactly one of --family or --chart is required".to_string()),
        }
    }
}

#[derive(Subcommand)]
enum Commands {
    /// Verify a chart: residual sweep, inequality and (for the classified
    /// families) the equality case. Writes a JSON report.
    Verify {
        #[command(flatten)]
        chart: ChartArgs,
        /// Grid resolution over the first two chart axes.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Additional low-discrepancy interior samples.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Equality-residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Lagrangian-residual tolerance.
        #[arg(long)]
        tol_lagrangian: Option<f64>,
        /// Constraint-membership tolerance.
        #[arg(long)]
        tol_constraint: Option<f64>,
        /// Optimizer seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optimizer restarts per δ evaluation.
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Run the brute-force oracle with this many samples at the center.
        #[arg(long)]
        oracle: Option<usize>,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Output format (json).
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Compute δ(n₁,…,n_k) on a chart point or a raw curvature tensor.
    Delta {
        #[command(flatten)]
        chart: ChartArgs,
        /// Point coordinates t,u1,... (defaults to the domain center).
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        /// JSON curvature-tensor component table instead of a chart.
        #[arg(long)]
        tensor: Option<std::path::PathBuf>,
        /// Tuple n₁,n₂,… (default 2,2).
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 2])]
        tuple: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Brute-force oracle sample count.
        #[arg(long)]
        oracle: Option<usize>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Sweep a family parameter, a trajectory, or random charts; emits CSV.
    Scan {
        #[command(flatten)]
        chart: ChartArgs,
        /// Family parameter to sweep (family mode).
        #[arg(long)]
        sweep: Option<String>,
        /// Sweep range lo:hi:count.
        #[arg(long)]
        range: Option<String>,
        /// Trajectory mode: integrate the named (μ,ν) system instead.
        #[arg(long)]
        trajectory: Option<String>,
        /// Trajectory span t_end (from 0).
        #[arg(long, default_value_t = 2.0)]
        span: f64,
        /// Trajectory step.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Initial ν for trajectory mode.
        #[arg(long, default_value_t = 0.0)]
        nu0: f64,
        /// Random-graph mode: number of seeds.
        #[arg(long)]
        random_graphs: Option<usize>,
        /// Points per random graph.
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// List built-in families and their parameters.
    Families {
        #[arg(long, default_value = "text")]
        format: String,
    },
}

fn write_out(out: &Option<std::path::PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn fail_usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

#[derive(Deserialize)]
struct TensorComponent {
    idx: [usize; 4],
    value: f64,
}

#[derive(Deserialize)]
struct TensorSpec {
    m: usize,
    components: Vec<TensorComponent>,
}

fn load_tensor(path: &std::path::Path) -> Result<CurvatureTensor, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let spec: TensorSpec = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut r = CurvatureTensor::zeros(spec.m);
    for c in &spec.components {
        if c.idx.iter().any(|&i| i >= spec.m) {
            return Err(format!("index {:?} out of range for m = {}", c.idx, spec.m));
        }
        r.set(c.idx[0], c.idx[1], c.idx[2], c.idx[3], c.value);
    }
    let sym = r.symmetry_residual();
    if sym > 1e-8 {
        return Err(format!(
            "component table violates curvature symmetries (residual {sym:.3e})"
        ));
    }
    Ok(r)
}

fn build_from_args(
    chart_args: &ChartArgs,
    seed: u64,
    restarts: usize,
) -> Result<(ChartImmersion, BTreeMap<String, f64>, bool), String> {
    let spec = chart_args.spec(Some(seed))?;
    let params = match &spec {
        ChartSpec::Family { params, .. } => params.clone(),
        ChartSpec::Graph { .. } => BTreeMap::new(),
    };
    let opts = DeltaOptions {
        restarts: restarts.min(16),
        seed,
        ..Default::default()
    };
    let built = build_chart(&spec, &Tolerances::default(), &opts)
        .map_err(|e| format!("cannot build chart: {e}"))?;
    Ok((built.chart, params, built.expect_equality))
}

fn cmd_verify(
    chart_args: ChartArgs,
    grid: usize,
    samples: usize,
    tol: Option<f64>,
    tol_lagrangian: Option<f64>,
    tol_constraint: Option<f64>,
    seed: u64,
    restarts: usize,
    oracle: Option<usize>,
    out: Option<std::path::PathBuf>,
    format: String,
) -> ExitCode {
    if format != "json" {
        return fail_usage("verify reports are JSON; use --format json");
    }
    let (chart, params, expect_equality) = match build_from_args(&chart_args, seed, restarts) {
        Ok(v) => v,
        Err(e) => return fail_usage(&e),
    };
    let mut tolerances = Tolerances::default();
    if let Some(t) = tol {
        tolerances.equality = t;
    }
    if let Some(t) = tol_lagrangian {
        tolerances.lagrangian = t;
    }
    if let Some(t) = tol_constraint {
        tolerances.constraint = t;
    }
    let cfg = VerifyConfig {
        grid,
        samples,
        seed,
        restarts,
        expect_equality,
        oracle_samples: oracle,
        tolerances,
    };
    match run_verification(&chart, params, &cfg) {
        Ok(report) => {
            let json = report.to_json();
            if write_out(&out, &json).is_err() {
                return fail_usage("cannot write report");
            }
            for (name, ok) in &report.summary.criteria {
                eprintln!("{}: {}", name, if *ok { "pass" } else { "FAIL" });
            }
            if report.summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail_usage(&format!("verification could not run: {e}")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_delta(
    chart_args: ChartArgs,
    at: Option<Vec<f64>>,
    tensor: Option<std::path::PathBuf>,
    tuple: Vec<usize>,
    seed: u64,
    restarts: usize,
    oracle: Option<usize>,
    out: Option<std::path::PathBuf>,
) -> ExitCode {
    let (r, hsq_c) = if let Some(path) = &tensor {
        match load_tensor(path) {
            Ok(r) => (r, None),
            Err(e) => return fail_usage(&e),
        }
    } else {
        let (chart, _, _) = match build_from_args(&chart_args, seed, restarts) {
            Ok(v) => v,
            Err(e) => return fail_usage(&e),
        };
        let u = at.unwrap_or_else(|| chart.center());
        let pg = match second_fundamental_form(&chart, &u, &Tolerances::default()) {
            Ok(pg) => pg,
            Err(e) => return fail_usage(&format!("point geometry failed: {e}")),
        };
        (gauss_curvature_tensor(&pg), Some((pg.mean_sq, pg.c)))
    };
    let spec = match TupleSpec::new(r.m(), tuple) {
        Ok(s) => s,
        Err(e) => return fail_usage(&e.to_string()),
    };
    let opts = DeltaOptions {
        restarts,
        seed,
        ..Default::default()
    };
    let mut result = match delta_invariant(&r, &spec, &opts) {
        Ok(d) => d,
        Err(e) => return fail_usage(&e.to_string()),
    };
    if let Some(n) = oracle {
        match delta_bruteforce_oracle(&r, &spec, n, seed ^ 0x0acc1e5e) {
            Ok(v) => result.oracle_gap = Some((result.inf_sum - v).abs()),
            Err(e) => return fail_usage(&e.to_string()),
        }
    }
    let mut doc = serde_json::Map::new();
    doc.insert("tuple".into(), serde_json::json!(spec.parts()));
    doc.insert("value".into(), serde_json::json!(result.value));
    doc.insert("tau".into(), serde_json::json!(result.tau));
    doc.insert("inf_sum".into(), serde_json::json!(result.inf_sum));
    doc.insert("converged".into(), serde_json::json!(result.converged));
    doc.insert("restarts".into(), serde_json::json!(result.restarts_used));
    doc.insert("seed".into(), serde_json::json!(seed));
    if let Some(gap) = result.oracle_gap {
        doc.insert("oracle_gap".into(), serde_json::json!(gap));
    }
    if let Some((hsq, c)) = hsq_c {
        doc.insert("hsq".into(), serde_json::json!(hsq));
        if spec.strict() {
            if let Ok(rhs) = improved_rhs(&spec, hsq, c) {
                doc.insert("improved_rhs".into(), serde_json::json!(rhs));
                doc.insert(
                    "equality_residual".into(),
                    serde_json::json!(result.value - rhs),
                );
            }
        }
    }
    let blocks: Vec<Vec<Vec<f64>>> = result
        .minimizer
        .iter()
        .map(|b| {
            (0..b.ncols())
                .map(|j| (0..b.nrows()).map(|i| b[(i, j)]).collect())
                .collect()
        })
        .collect();
    doc.insert("minimizer_blocks".into(), serde_json::json!(blocks));
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap();
    if write_out(&out, &text).is_err() {
        return fail_usage("cannot write output");
    }
    ExitCode::SUCCESS
}

fn parse_range(range: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err("range must be lo:hi:count".into());
    }
    let lo: f64 = parts[0].parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].parse().map_err(|e| format!("{e}"))?;
    let count: usize = parts[2].parse().map_err(|e| format!("{e}"))?;
    if count < 1 {
        return Err("count must be at least 1".into());
    }
    Ok((0..count)
        .map(|k| {
            if count == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (count - 1) as f64
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    chart_args: ChartArgs,
    sweep: Option<String>,
    range: Option<String>,
    trajectory: Option<String>,
    span: f64,
    step: f64,
    nu0: f64,
    random_graphs: Option<usize>,
    points: usize,
    seed: u64,
    restarts: usize,
    out: Option<std::path::PathBuf>,
) -> ExitCode {
    let mut csv = String::new();
    if let Some(kind_name) = trajectory {
        let kind = match kind_name.as_str() {
            "c5" => FamilyKind::C5,
            "cp5" => FamilyKind::Cp5,
            "ch5-kpos" => FamilyKind::Ch5KPos,
            "ch5-kneg" => FamilyKind::Ch5KNeg,
            "ch5-kzero" => FamilyKind::Ch5KZero,
            other => return fail_usage(&format!("unknown trajectory family `{other}`")),
        };
        let mu0 = chart_args.mu0.unwrap_or(0.5);
        let traj = match integrate_mu_nu(kind, OdeState::new(0.0, mu0, nu0), span, step) {
            Ok(t) => t,
            Err(e) => return fail_usage(&e.to_string()),
        };
        csv.push_str("t,mu,nu,angle,first_integral_residual,mu_sq_plus_nu_sq,status\n");
        let konst = traj.konst;
        for s in &traj.states {
            let res = (s.nu * s.nu - traj.kind.radicand(s.mu, konst)).abs();
            csv.push_str(&format!(
                "{},{},{},{},{},{},ok\n",
                s.t,
                s.mu,
                s.nu,
                s.angle,
                res,
                s.mu * s.mu + s.nu * s.nu
            ));
        }
        if let Some(reason) = &traj.truncated {
            csv.push_str(&format!(",,,,,,truncated: {reason}\n"));
        }
        eprintln!(
            "first-integral residual over the whole span: {:.3e}",
            first_integral_residual(&traj)
        );
    } else if let Some(seeds) = random_graphs {
        csv.push_str("seed,point,delta22,hsq,improved_rhs,slack\n");
        let spec = match TupleSpec::new(5, vec![2, 2]) {
            Ok(s) => s,
            Err(e) => return fail_usage(&e.to_string()),
        };
        for s in 0..seeds {
            let chart = match deltalag::immersion::random_gradient_graph(seed + s as u64, 5, 3) {
                Ok(c) => c,
                Err(e) => return fail_usage(&e.to_string()),
            };
            for (i, u) in chart.halton(points).iter().enumerate() {
                let pg = match second_fundamental_form(&chart, u, &Tolerances::default()) {
                    Ok(pg) => pg,
                    Err(e) => return fail_usage(&e.to_string()),
                };
                let r = gauss_curvature_tensor(&pg);
                let opts = DeltaOptions {
                    restarts,
                    seed,
                    ..Default::default()
                };
                let d = match delta_invariant(&r, &spec, &opts) {
                    Ok(d) => d,
                    Err(e) => return fail_usage(&e.to_string()),
                };
                let rhs = improved_rhs(&spec, pg.mean_sq, pg.c).unwrap();
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    seed + s as u64,
                    i,
                    d.value,
                    pg.mean_sq,
                    rhs,
                    rhs - d.value
                ));
            }
        }
    } else {
        let (Some(param), Some(range)) = (sweep, range) else {
            return fail_usage("scan needs --sweep/--range, --trajectory, or --random-graphs");
        };
        let values = match parse_range(&range) {
            Ok(v) => v,
            Err(e) => return fail_usage(&e),
        };
        csv.push_str(&format!(
            "{param},delta22,improved_rhs,equality_residual,hsq,max_lagrangian,max_constraint,max_horizontality,status\n"
        ));
        for v in values {
            let mut args = chart_args.clone();
            args.params.push((param.clone(), v));
            match build_from_args(&args, seed, restarts) {
                Ok((chart, _, _)) => {
                    let cfg = VerifyConfig {
                        grid: 4,
                        samples: 8,
                        seed,
                        restarts,
                        expect_equality: true,
                        oracle_samples: None,
                        tolerances: Tolerances::default(),
                    };
                    match run_verification(&chart, BTreeMap::new(), &cfg) {
                        Ok(rep) => {
                            let rec = rep.points.iter().find(|p| p.delta22.is_some());
                            let (d, h, eq) = rec
                                .map(|p| {
                                    (
                                        p.delta22.unwrap(),
                                        p.hsq.unwrap_or(f64::NAN),
                                        p.equality_residual.unwrap_or(f64::NAN),
                                    )
                                })
                                .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                            let rhs = d - eq;
                            csv.push_str(&format!(
                                "{},{},{},{},{},{},{},{},ok\n",
                                v,
                                d,
                                rhs,
                                rep.summary.max_equality_residual.unwrap_or(f64::NAN),
                                h,
                                rep.summary.max_lagrangian,
                                rep.summary.max_constraint.unwrap_or(0.0),
                                rep.summary.max_horizontality.unwrap_or(0.0),
                            ));
                        }
                        Err(e) => csv.push_str(&format!("{v},,,,,,,,error: {e}\n")),
                    }
                }
                // domain exits are marked, not dropped
                Err(e) => csv.push_str(&format!("{v},,,,,,,,domain-exit: {e}\n")),
            }
        }
    }
    if write_out(&out, &csv).is_err() {
        return fail_usage("cannot write output");
    }
    ExitCode::SUCCESS
}

fn cmd_families(format: String) -> ExitCode {
    let families = builtin_families();
    if format == "json" {
        let text = serde_json::to_string_pretty(&families).unwrap();
        println!("{text}");
    } else {
        for f in families {
            println!("{}  {}", f.name, if f.ideal { "[ideal]" } else { "" });
            println!("    {}", f.description);
            for p in f.params {
                println!("    --param {}={} : {}", p.name, p.default, p.doc);
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Commands::Verify {
            chart,
            grid,
            samples,
            tol,
            tol_lagrangian,
            tol_constraint,
            seed,
            restarts,
            oracle,
            out,
            format,
        } => cmd_verify(
            chart,
            grid,
            samples,
            tol,
            tol_lagrangian,
            tol_constraint,
            seed,
            restarts,
            oracle,
            out,
            format,
        ),
        Commands::Delta {
            chart,
            at,
            tensor,
            tuple,
            seed,
            restarts,
            oracle,
            out,
        } => cmd_delta(chart, at, tensor, tuple, seed, restarts, oracle, out),
        Commands::Scan {
            chart,
            param,
            range,
            trajectory,
            span,
            step,
            nu0,
            random_graphs,
            points,
            seed,
            restarts,
            out,
        } => cmd_scan(
            chart,
            sweep,
            range,
            trajectory,
            span,
            step,
            nu0,
            random_graphs,
            points,
            seed,
            restarts,
            out,
        ),
        Commands::Families { format } => cmd_families(format),
    }
}
