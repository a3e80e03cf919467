//! Reference paths for the two manoeuvres.

use serde::{Deserialize, Serialize};

use super::PlantError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[serde(alias = "DLC")]
    Dlc,
    #[serde(alias = "SlipperyCurve")]
    SlipperyCurve,
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "dlc" | "doublelanechange" => Ok(Self::Dlc),
            "slipperycurve" | "curve" => Ok(Self::SlipperyCurve),
            other => Err(format!("unknown scenario '{other}'")),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dlc => "dlc",
            Self::SlipperyCurve => "slippery_curve",
        })
    }
}

/// Double-lane-change section lengths, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DlcGeometry {
    pub lead_in: f64,
    pub entry: f64,
    pub lane_change: f64,
    pub offset_lane: f64,
    pub lane_return: f64,
    pub exit: f64,
    pub run_out: f64,
    pub offset: f64,
}

impl Default for DlcGeometry {
    fn default() -> Self {
        Self {
            lead_in: 30.0,
            entry: 12.0,
            lane_change: 13.5,
            offset_lane: 11.0,
            lane_return: 12.5,
            exit: 12.0,
            run_out: 60.0,
            offset: 3.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveGeometry {
    pub lead_in: f64,
    pub radius: f64,
    pub arc_length: f64,
}

impl Default for CurveGeometry {
    fn default() -> Self {
        Self {
            lead_in: 120.0,
            radius: 200.0,
            arc_length: 380.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub dlc: DlcGeometry,
    pub curve: CurveGeometry,
    /// Polyline spacing, m.
    pub spacing: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dlc: DlcGeometry::default(),
            curve: CurveGeometry::default(),
            spacing: 0.25,
        }
    }
}

/// Closest-point projection onto the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub station: f64,
    /// Signed offset of the query point, positive to the left of the path.
    pub lateral: f64,
    pub segment: usize,
}

/// Polyline with cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    points: Vec<(f64, f64)>,
    stations: Vec<f64>,
}

impl Path {
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        assert!(points.len() >= 2, "a path needs at least two points");
        let mut stations = Vec::with_capacity(points.len());
        let mut s = 0.0;
        stations.push(0.0);
        for w in points.windows(2) {
            s += (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            stations.push(s);
        }
        Self { points, stations }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.stations.last().unwrap()
    }

    fn project_segment(&self, i: usize, x: f64, y: f64) -> (f64, f64, f64) {
        let (ax, ay) = self.points[i];
        let (bx, by) = self.points[i + 1];
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0);
        let (px, py) = (ax + t * dx, ay + t * dy);
        let dist2 = (x - px).powi(2) + (y - py).powi(2);
        let cross = dx * (y - ay) - dy * (x - ax);
        let side = if cross >= 0.0 { 1.0 } else { -1.0 };
        (dist2, self.stations[i] + t * len2.sqrt(), side * dist2.sqrt())
    }

    /// Nearest point search, restricted to a window around `hint` when given.
    pub fn project(&self, x: f64, y: f64, hint: Option<usize>) -> Projection {
        let n = self.points.len() - 1;
        let (lo, hi) = match hint {
            Some(h) => (h.saturating_sub(200), (h + 800).min(n)),
            None => (0, n),
        };
        let mut best = (f64::INFINITY, 0.0, 0.0, lo);
        for i in lo..hi {
            let (d2, s, lat) = self.project_segment(i, x, y);
            if d2 < best.0 {
                best = (d2, s, lat, i);
            }
        }
        Projection {
            station: best.1,
            lateral: best.2,
            segment: best.3,
        }
    }

    pub fn point_at(&self, station: f64) -> Result<(f64, f64), PlantError> {
        if !(0.0..=self.length()).contains(&station) {
            return Err(PlantError::PathExhausted(station));
        }
        let i = match self.stations.binary_search_by(|s| s.total_cmp(&station)) {
            Ok(i) => i.min(self.points.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let seg = self.stations[i + 1] - self.stations[i];
        let t = if seg > 0.0 { (station - self.stations[i]) / seg } else { 0.0 };
        let (ax, ay) = self.points[i];
        let (bx, by) = self.points[i + 1];
        Ok((ax + t * (bx - ax), ay + t * (by - ay)))
    }
}

/// Smooth half-cosine ramp from 0 to 1 over u ∈ [0, 1].
fn ramp(u: f64) -> f64 {
    0.5 * (1.0 - (std::f64::consts::PI * u.clamp(0.0, 1.0)).cos())
}

pub fn dlc_path(g: &DlcGeometry, spacing: f64) -> Path {
    let x1 = g.lead_in + g.entry;
    let x2 = x1 + g.lane_change;
    let x3 = x2 + g.offset_lane;
    let x4 = x3 + g.lane_return;
    let end = x4 + g.exit + g.run_out;
    let lateral = |x: f64| {
        if x <= x1 {
            0.0
        } else if x <= x2 {
            g.offset * ramp((x - x1) / g.lane_change)
        } else if x <= x3 {
            g.offset
        } else if x <= x4 {
            g.offset * (1.0 - ramp((x - x3) / g.lane_return))
        } else {
            0.0
        }
    };
    let n = (end / spacing).ceil() as usize;
    let points = (0..=n)
        .map(|i| {
            let x = (i as f64 * spacing).min(end);
            (x, lateral(x))
        })
        .collect();
    Path::from_points(points)
}

/// Straight lead-in along +X followed by a left-hand arc.
pub fn curve_path(g: &CurveGeometry, spacing: f64) -> Path {
    let mut points = Vec::new();
    let n_lead = (g.lead_in / spacing).ceil() as usize;
    for i in 0..n_lead {
        points.push((i as f64 * g.lead_in / n_lead as f64, 0.0));
    }
    let n_arc = (g.arc_length / spacing).ceil() as usize;
    for i in 0..=n_arc {
        let th = (i as f64 / n_arc as f64) * g.arc_length / g.radius;
        points.push((g.lead_in + g.radius * th.sin(), g.radius * (1.0 - th.cos())));
    }
    Path::from_points(points)
}

pub fn scenario_path(kind: ScenarioKind, cfg: &PathConfig) -> Path {
    match kind {
        ScenarioKind::Dlc => dlc_path(&cfg.dlc, cfg.spacing),
        ScenarioKind::SlipperyCurve => curve_path(&cfg.curve, cfg.spacing),
    }
}
