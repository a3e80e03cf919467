//! Run metrics: estimation error statistics, phase-plane area, path
//! deviation.

use serde::{Deserialize, Serialize};

use super::record::TickRecord;
use super::HarnessError;
use crate::{PlanarState, MPS_TO_KMH};

/// Signed error statistics of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub min: f64,
    pub max: f64,
    pub rmse: f64,
    pub samples: usize,
}

impl ErrorStats {
    /// `None` for an empty sample.
    pub fn from_errors(errors: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sq = 0.0;
        let mut n = 0;
        for e in errors {
            min = min.min(e);
            max = max.max(e);
            sq += e * e;
            n += 1;
        }
        (n > 0).then(|| Self {
            min,
            max,
            rmse: (sq / n as f64).sqrt(),
            samples: n,
        })
    }
}

/// Errors of one estimator in report units: km/h, km/h, deg/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateErrors {
    pub vx: ErrorStats,
    pub vy: ErrorStats,
    pub yaw_rate: ErrorStats,
}

impl StateErrors {
    /// Statistics of `estimate − truth` over samples with `t ≥ warmup`.
    pub fn compute(times: &[f64], truth: &[PlanarState], estimate: &[PlanarState], warmup: f64) -> Option<Self> {
        let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= warmup).collect();
        let channel = |f: fn(&PlanarState) -> f64, scale: f64| {
            ErrorStats::from_errors(idx.iter().map(|&i| scale * (f(&estimate[i]) - f(&truth[i]))))
        };
        Some(Self {
            vx: channel(|s| s.vx, MPS_TO_KMH)?,
            vy: channel(|s| s.vy, MPS_TO_KMH)?,
            yaw_rate: channel(|s| s.yaw_rate, 180.0 / std::f64::consts::PI)?,
        })
    }
}

/// Area of the convex hull of a planar point set (monotone chain).
pub fn convex_hull_area(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let n = hull.len();
    let twice: f64 = (0..n).map(|i| {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        a.0 * b.1 - b.0 * a.1
    }).sum();
    0.5 * twice.abs()
}

/// Convex-hull area of the (β, β̇) trajectory, β̇ by central differences.
pub fn phase_area(times: &[f64], beta: &[f64]) -> Result<f64, HarnessError> {
    if times.len() != beta.len() || beta.len() < 3 {
        return Err(HarnessError::Degenerate("phase area needs at least three samples".into()));
    }
    let pts: Vec<(f64, f64)> = (1..beta.len() - 1)
        .map(|i| (beta[i], (beta[i + 1] - beta[i - 1]) / (times[i + 1] - times[i - 1])))
        .collect();
    Ok(convex_hull_area(&pts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EstimationErrors {
    pub rhonn: Option<StateErrors>,
    pub mf: Option<StateErrors>,
    pub li: Option<StateErrors>,
}

/// Everything that can be recomputed from the trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub estimation: EstimationErrors,
    /// rad·rad/s
    pub phase_area: f64,
    /// m
    pub max_deviation: f64,
    /// rad
    pub max_sideslip: f64,
    pub saturation_count: usize,
    pub solver_failures: usize,
    pub bound_violations: usize,
    pub ticks: usize,
}

/// Metrics from the per-tick records.
pub fn metrics_from_records(records: &[TickRecord], warmup: f64, dm_bounds: (f64, f64)) -> RunMetrics {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let truth: Vec<PlanarState> = records.iter().map(|r| r.truth()).collect();
    let estimation = EstimationErrors {
        rhonn: StateErrors::compute(&times, &truth, &records.iter().map(|r| r.rhonn()).collect::<Vec<_>>(), warmup),
        mf: StateErrors::compute(&times, &truth, &records.iter().map(|r| r.mf()).collect::<Vec<_>>(), warmup),
        li: StateErrors::compute(&times, &truth, &records.iter().map(|r| r.li()).collect::<Vec<_>>(), warmup),
    };
    let beta: Vec<f64> = records.iter().map(|r| r.sideslip).collect();
    RunMetrics {
        estimation,
        phase_area: phase_area(&times, &beta).unwrap_or(0.0),
        max_deviation: records.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max),
        max_sideslip: beta.iter().map(|b| b.abs()).fold(0.0, f64::max),
        saturation_count: records.iter().filter(|r| r.saturated).count(),
        solver_failures: records.iter().filter(|r| r.solver_failed).count(),
        bound_violations: records
            .iter()
            .filter(|r| !(r.dm_cmd >= dm_bounds.0 && r.dm_cmd <= dm_bounds.1))
            .count(),
        ticks: records.len(),
    }
}

/// One estimator's trace against plant truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRun {
    pub label: String,
    pub plant_hash: String,
    pub times: Vec<f64>,
    pub truth: Vec<PlanarState>,
    pub estimate: Vec<PlanarState>,
}

impl EstimatorRun {
    /// Splits one run's records into the three estimator traces.
    pub fn from_records(records: &[TickRecord], plant_hash: &str) -> [EstimatorRun; 3] {
        let times: Vec<f64> = records.iter().map(|r| r.t).collect();
        let truth: Vec<PlanarState> = records.iter().map(|r| r.truth()).collect();
        let mk = |label: &str, f: fn(&TickRecord) -> PlanarState| EstimatorRun {
            label: label.into(),
            plant_hash: plant_hash.into(),
            times: times.clone(),
            truth: truth.clone(),
            estimate: records.iter().map(f).collect(),
        };
        [mk("RHONN", TickRecord::rhonn), mk("7DoF-MF", TickRecord::mf), mk("7DoF-LI", TickRecord::li)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRow {
    pub label: String,
    pub errors: StateErrors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub plant_hash: String,
    pub warmup: f64,
    pub rows: Vec<EstimationRow>,
}

impl EstimationReport {
    pub fn row(&self, label: &str) -> Option<&StateErrors> {
        self.rows.iter().find(|r| r.label == label).map(|r| &r.errors)
    }

    /// Markdown table in km/h and deg/s.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| Model | State | Min | Max | RMSE |\n|---|---|---|---|---|\n");
        for row in &self.rows {
            for (name, st) in [("Vx (km/h)", row.errors.vx), ("Vy (km/h)", row.errors.vy), ("yaw rate (deg/s)", row.errors.yaw_rate)] {
                s += &format!("| {} | {} | {:.4} | {:.4} | {:.4} |\n", row.label, name, st.min, st.max, st.rmse);
            }
        }
        s
    }
}

/// Min/Max/RMSE table for runs that share one plant trajectory.
pub fn estimation_report(runs: &[EstimatorRun], warmup: f64) -> Result<EstimationReport, HarnessError> {
    let first = runs.first().ok_or_else(|| HarnessError::MismatchedRuns("no runs given".into()))?;
    for r in runs {
        if r.plant_hash != first.plant_hash {
            return Err(HarnessError::MismatchedRuns(format!("{} has plant hash {} but {} has {}", r.label, r.plant_hash, first.label, first.plant_hash)));
        }
        if r.times != first.times || r.truth != first.truth {
            return Err(HarnessError::MismatchedRuns(format!("{} was recorded on a different plant trajectory", r.label)));
        }
        if r.estimate.len() != r.times.len() {
            return Err(HarnessError::MismatchedRuns(format!("{} has {} estimates for {} samples", r.label, r.estimate.len(), r.times.len())));
        }
    }
    let rows = runs
        .iter()
        .map(|r| {
            StateErrors::compute(&r.times, &r.truth, &r.estimate, warmup)
                .map(|errors| EstimationRow { label: r.label.clone(), errors })
                .ok_or_else(|| HarnessError::Degenerate(format!("{} has no samples after the warmup", r.label)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EstimationReport {
        plant_hash: first.plant_hash.clone(),
        warmup,
        rows,
    })
}
