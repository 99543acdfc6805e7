//! Verification sweeps and machine-readable reports.
//!
//! A sweep samples a chart on a tensor grid over its first two axes (the
//! structurally interesting ones) plus low-discrepancy interior points,
//! computes every residual at each point, and aggregates pass/fail per
//! enabled criterion. Reports are byte-stable for fixed inputs: points are
//! assembled in index order and all maps are ordered.

use crate::curvature::{gauss_curvature_tensor, second_fundamental_form};
use crate::delta::{
    canonical_frame_fit, delta_bruteforce_oracle, delta_invariant, improved_rhs, DeltaOptions,
    TupleSpec,
};
use crate::immersion::ChartImmersion;
use crate::{Result, Tolerances, TOOL_VERSION};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub restarts: usize,
    pub expect_equality: bool,
    pub oracle_samples: Option<usize>,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid: 8,
            samples: 32,
            seed: 0,
            restarts: 64,
            expect_equality: false,
            oracle_samples: None,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitRecord {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRecord {
    pub coords: Vec<f64>,
    pub lagrangian: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizontality: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cubic_symmetry: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hsq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta22: Option<f64>,
    /// 25/4·H² + 8c − δ(2,2) (nonnegative up to noise).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub points: usize,
    pub max_lagrangian: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_constraint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_horizontality: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_cubic_symmetry: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_inequality_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_equality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
    pub criteria: BTreeMap<String, bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChartIdentity {
    pub name: String,
    pub dim: usize,
    pub is_lift: bool,
    pub ambient_curvature: f64,
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub restarts: usize,
    pub grid: usize,
    pub samples: usize,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub chart: ChartIdentity,
    pub provenance: Provenance,
    pub points: Vec<PointRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Sample points: grid×grid over the first two axes (center elsewhere),
/// plus Halton interior points.
pub fn sweep_points(chart: &ChartImmersion, grid: usize, samples: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![1usize; chart.dim()];
    counts[0] = grid.max(1);
    if chart.dim() > 1 {
        counts[1] = grid.max(1);
    }
    let mut points = chart.grid(&counts);
    points.extend(chart.halton(samples));
    points
}

fn eval_point(
    chart: &ChartImmersion,
    u: &[f64],
    cfg: &VerifyConfig,
) -> PointRecord {
    let tol = &cfg.tolerances;
    let mut rec = PointRecord {
        coords: u.to_vec(),
        lagrangian: f64::NAN,
        constraint: None,
        horizontality: None,
        cubic_symmetry: None,
        hsq: None,
        delta22: None,
        inequality_slack: None,
        equality_residual: None,
        fit: None,
        error: None,
    };
    match chart.lagrangian_residual(u) {
        Ok(r) => rec.lagrangian = r,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    }
    if chart.is_lift() {
        rec.constraint = chart.constraint_residual(u).ok();
        rec.horizontality = chart.horizontality_residual(u).ok();
    }
    let pg = match second_fundamental_form(chart, u, tol) {
        Ok(pg) => pg,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    rec.cubic_symmetry = Some(pg.symmetry_residual);
    rec.hsq = Some(pg.mean_sq);
    if chart.dim() == 5 {
        let r = gauss_curvature_tensor(&pg);
        let spec = TupleSpec::new(5, vec![2, 2]).expect("(2,2) is valid in dimension 5");
        let opts = DeltaOptions {
            restarts: cfg.restarts,
            seed: cfg.seed,
            ..Default::default()
        };
        match delta_invariant(&r, &spec, &opts) {
            Ok(d) => {
                let rhs = improved_rhs(&spec, pg.mean_sq, pg.c)
                    .expect("(2,2) in dimension 5 is strict");
                rec.delta22 = Some(d.value);
                rec.inequality_slack = Some(rhs - d.value);
                if cfg.expect_equality {
                    rec.equality_residual = Some(d.value - rhs);
                }
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        if let Ok(fit) = canonical_frame_fit(&pg, &DeltaOptions::fast(8)) {
            rec.fit = Some(FitRecord {
                a: fit.a,
                b: fit.b,
                mu: fit.mu,
                residual: fit.residual,
            });
        }
    }
    rec
}

/// Runs a verification sweep over the chart.
pub fn run_verification(
    chart: &ChartImmersion,
    params: BTreeMap<String, f64>,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let points = sweep_points(chart, cfg.grid, cfg.samples);
    let records: Vec<PointRecord> = points
        .par_iter()
        .map(|u| eval_point(chart, u, cfg))
        .collect();

    let tol = &cfg.tolerances;
    let fmax = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let max_lagrangian = fmax(&mut records.iter().map(|r| r.lagrangian));
    let max_constraint = chart
        .is_lift()
        .then(|| fmax(&mut records.iter().filter_map(|r| r.constraint)));
    let max_horizontality = chart
        .is_lift()
        .then(|| fmax(&mut records.iter().filter_map(|r| r.horizontality)));
    let syms: Vec<f64> = records.iter().filter_map(|r| r.cubic_symmetry).collect();
    let max_cubic_symmetry = (!syms.is_empty()).then(|| syms.iter().copied().fold(0.0, f64::max));
    let slacks: Vec<f64> = records.iter().filter_map(|r| r.inequality_slack).collect();
    let min_inequality_slack = (!slacks.is_empty())
        .then(|| slacks.iter().copied().fold(f64::INFINITY, f64::min));
    let eqs: Vec<f64> = records
        .iter()
        .filter_map(|r| r.equality_residual)
        .collect();
    let max_equality_residual = (!eqs.is_empty())
        .then(|| eqs.iter().map(|x| x.abs()).fold(0.0, f64::max));

    // optional oracle comparison at the box center
    let oracle_gap = match cfg.oracle_samples {
        Some(n) if chart.dim() == 5 => {
            let u = chart.center();
            let pg = second_fundamental_form(chart, &u, tol)?;
            let r = gauss_curvature_tensor(&pg);
            let spec = TupleSpec::new(5, vec![2, 2])?;
            let opts = DeltaOptions {
                restarts: cfg.restarts,
                seed: cfg.seed,
                ..Default::default()
            };
            let d = delta_invariant(&r, &spec, &opts)?;
            let oracle = delta_bruteforce_oracle(&r, &spec, n, cfg.seed ^ 0x0acc1e5e)?;
            Some((d.inf_sum - oracle).abs())
        }
        _ => None,
    };

    let mut criteria = BTreeMap::new();
    let no_errors = records.iter().all(|r| r.error.is_none());
    criteria.insert("no-evaluation-errors".into(), no_errors);
    criteria.insert(
        "lagrangian".into(),
        max_lagrangian.is_finite() && max_lagrangian < tol.lagrangian.max(1e-8),
    );
    if let Some(v) = max_constraint {
        criteria.insert("constraint".into(), v < tol.constraint.max(1e-8));
    }
    if let Some(v) = max_horizontality {
        criteria.insert("horizontality".into(), v < tol.horizontality.max(1e-8));
    }
    if let Some(v) = max_cubic_symmetry {
        criteria.insert("cubic-symmetry".into(), v < tol.cubic_symmetry);
    }
    if let Some(v) = min_inequality_slack {
        criteria.insert("improved-inequality".into(), v > -tol.inequality_slack);
    }
    if cfg.expect_equality {
        criteria.insert(
            "improved-equality".into(),
            max_equality_residual.map(|v| v < tol.equality).unwrap_or(false),
        );
    }
    let pass = criteria.values().all(|&b| b);

    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        chart: ChartIdentity {
            name: chart.name().to_string(),
            dim: chart.dim(),
            is_lift: chart.is_lift(),
            ambient_curvature: chart.space().curvature_sign(),
            params,
        },
        provenance: Provenance {
            seed: cfg.seed,
            restarts: cfg.restarts,
            grid: cfg.grid,
            samples: cfg.samples,
            tolerances: *tol,
        },
        points: records,
        summary: Summary {
            points: points.len(),
            max_lagrangian,
            max_constraint,
            max_horizontality,
            max_cubic_symmetry,
            min_inequality_slack,
            max_equality_residual,
            oracle_gap,
            criteria,
            pass,
        },
    })
}
