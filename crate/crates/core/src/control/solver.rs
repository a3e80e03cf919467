//! Box-constrained derivative-free minimiser.
//!
//! Nelder–Mead with every trial point clamped into the box, restarted from
//! several seeds, followed by a shrinking coordinate pattern search.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Nelder–Mead runs after the first one.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Initial simplex edge as a fraction of the box width.
    pub initial_step: f64,
    /// Simplex size at which a run stops, as a fraction of the box width.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            max_iterations: 400,
            initial_step: 0.25,
            tolerance: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub cost: f64,
    /// Cost evaluations performed.
    pub evaluations: usize,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let c = (self.f)(x);
        if c.is_nan() {
            f64::INFINITY
        } else {
            c
        }
    }
}

fn clamp_into<const N: usize>(x: &mut [f64; N], lo: &[f64; N], hi: &[f64; N]) {
    for i in 0..N {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

fn nelder_mead<const N: usize, F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    start: [f64; N],
    lo: &[f64; N],
    hi: &[f64; N],
    cfg: &SolverConfig,
) -> ([f64; N], f64) {
    let width: [f64; N] = std::array::from_fn(|i| hi[i] - lo[i]);
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let mut x0 = start;
    clamp_into(&mut x0, lo, hi);
    simplex.push((x0, f.eval(&x0)));
    for i in 0..N {
        let mut x = x0;
        let step = cfg.initial_step * width[i];
        // Step away from the nearer bound so the vertex is not clamped back.
        x[i] += if x[i] + step <= hi[i] { step } else { -step };
        clamp_into(&mut x, lo, hi);
        simplex.push((x, f.eval(&x)));
    }
    for _ in 0..cfg.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| (0..N).map(move |i| (x[i] - best[i]).abs() / width[i].max(f64::MIN_POSITIVE)))
            .fold(0.0, f64::max);
        if size < cfg.tolerance {
            break;
        }
        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let worst = simplex[N];
        let along = |t: f64| {
            let mut p: [f64; N] = std::array::from_fn(|i| centroid[i] + t * (worst.0[i] - centroid[i]));
            clamp_into(&mut p, lo, hi);
            p
        };
        let xr = along(-1.0);
        let fr = f.eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f.eval(&xe);
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                (x, f.eval(&x))
            } else {
                let x = along(0.5);
                (x, f.eval(&x))
            };
            if fc < worst.1.min(fr) {
                simplex[N] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x: [f64; N] = std::array::from_fn(|i| best[i] + 0.5 * (v.0[i] - best[i]));
                    *v = (x, f.eval(&x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

fn pattern_polish<const N: usize, F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    mut x: [f64; N],
    mut fx: f64,
    lo: &[f64; N],
    hi: &[f64; N],
    cfg: &SolverConfig,
) -> ([f64; N], f64) {
    let mut h = 0.05;
    while h > cfg.tolerance {
        let mut improved = false;
        for i in 0..N {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * h * (hi[i] - lo[i]);
                clamp_into(&mut y, lo, hi);
                if y == x {
                    continue;
                }
                let fy = f.eval(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// Minimises `f` over the box `[lo, hi]`, trying each of `seeds` first.
pub fn minimize_box<const N: usize, F: FnMut(&[f64]) -> f64>(
    f: F,
    lo: [f64; N],
    hi: [f64; N],
    seeds: &[[f64; N]],
    cfg: &SolverConfig,
) -> Minimum<N> {
    let mut f = Counted { f, evaluations: 0 };
    let mut best: Option<([f64; N], f64)> = None;
    let consider = |cand: ([f64; N], f64), best: &mut Option<([f64; N], f64)>| {
        if best.is_none_or(|b| cand.1 < b.1) {
            *best = Some(cand);
        }
    };
    for s in seeds {
        let mut x = *s;
        clamp_into(&mut x, &lo, &hi);
        let c = f.eval(&x);
        consider((x, c), &mut best);
    }
    let midpoint: [f64; N] = std::array::from_fn(|i| 0.5 * (lo[i] + hi[i]));
    let first = best.map_or(midpoint, |b| b.0);
    let run = nelder_mead(&mut f, first, &lo, &hi, cfg);
    consider(run, &mut best);
    for k in 0..cfg.restarts {
        // Alternate between restarting at the incumbent and at the other seeds.
        let start = match k {
            0 => best.unwrap().0,
            _ => seeds.get(k).copied().unwrap_or(midpoint),
        };
        let run = nelder_mead(&mut f, start, &lo, &hi, cfg);
        consider(run, &mut best);
    }
    let (x, c) = best.unwrap();
    let (x, c) = pattern_polish(&mut f, x, c, &lo, &hi, cfg);
    Minimum {
        x,
        cost: c,
        evaluations: f.evaluations,
    }
}
