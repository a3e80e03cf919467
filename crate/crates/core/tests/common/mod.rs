//! Reference implementations written independently of the library, used as
//! oracles by the integration tests.

#![allow(dead_code)]

use std::sync::OnceLock;

/// Products of every non-empty subset of `xi`, ordered by subset size and
/// then lexicographically by index.
pub fn enumerate_basis(xi: &[f64; 4]) -> [f64; 15] {
    let mut out = [0.0; 15];
    for (o, s) in out.iter_mut().zip(subsets()) {
        *o = s.iter().fold(1.0, |acc, &i| acc * xi[i]);
    }
    out
}

fn subsets() -> &'static [Vec<usize>] {
    static SUBSETS: OnceLock<Vec<Vec<usize>>> = OnceLock::new();
    SUBSETS.get_or_init(|| {
        let mut s: Vec<Vec<usize>> = (1u32..16)
            .map(|mask| (0..4).filter(|i| mask & (1 << i) != 0).collect())
            .collect();
        s.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        s
    })
}

/// Plain-array copy of an identified model.
#[derive(Debug, Clone)]
pub struct RefModel {
    pub w: [[f64; 15]; 3],
    /// (mu, beta) for V_x, V_y, ω_r and steer.
    pub sig: [(f64, f64); 4],
    pub gain_vx: f64,
    pub gain_yaw: f64,
    pub scale: f64,
}

impl RefModel {
    pub fn step(&self, x: [f64; 3], total_torque: f64, dm: f64, steer: f64) -> [f64; 3] {
        let raw = [x[0], x[1], x[2], steer];
        let mut xi = [0.0; 4];
        for i in 0..4 {
            let (mu, beta) = self.sig[i];
            xi[i] = mu * (beta * raw[i]).tanh();
        }
        let phi = enumerate_basis(&xi);
        let dot = |w: &[f64; 15]| w.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>();
        [
            self.scale * self.gain_vx * total_torque + dot(&self.w[0]),
            dot(&self.w[1]),
            self.scale * self.gain_yaw * dm + dot(&self.w[2]),
        ]
    }
}

/// Scalar Kalman step: returns (K, w', p').
pub fn scalar_kalman(p: f64, h: f64, r: f64, q: f64, zeta: f64, w: f64, e: f64) -> (f64, f64, f64) {
    let k = p * h / (r + p * h * h);
    (k, w + zeta * k * e, p - k * h * p + q)
}

/// EKF update with explicit loops on row-major matrices.
pub fn matrix_ekf(p: &[Vec<f64>], q: &[Vec<f64>], r: f64, zeta: f64, w: &[f64], e: f64, h: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = w.len();
    let ph: Vec<f64> = (0..n).map(|i| (0..n).map(|j| p[i][j] * h[j]).sum()).collect();
    let s = r + (0..n).map(|i| h[i] * ph[i]).sum::<f64>();
    let k: Vec<f64> = ph.iter().map(|v| v / s).collect();
    let w_next: Vec<f64> = (0..n).map(|i| w[i] + zeta * k[i] * e).collect();
    let htp: Vec<f64> = (0..n).map(|j| (0..n).map(|i| h[i] * p[i][j]).sum()).collect();
    let mut p_next = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            p_next[i][j] = p[i][j] - k[i] * htp[j] + q[i][j];
        }
    }
    let sym = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (p_next[i][j] + p_next[j][i])).collect())
        .collect();
    (w_next, sym)
}

/// NMPC cost for given predictions; sideslip uses a 0.5 m/s floor on V_x.
pub fn ref_cost(preds: &[[f64; 3]; 3], q: [f64; 3], r: [f64; 3], yaw_ref: f64, beta_ref: f64) -> f64 {
    let mut c = 0.0;
    for i in 0..3 {
        let vx = if preds[i][0].abs() < 0.5 { 0.5f64.copysign(preds[i][0]) } else { preds[i][0] };
        c += q[i] * (yaw_ref - preds[i][2]).powi(2) + r[i] * (beta_ref - preds[i][1] / vx).powi(2);
    }
    c
}

/// Exhaustive minimum over an `n`³ grid of the yaw-moment box; every
/// sequence is rolled out in full.
#[allow(clippy::too_many_arguments)]
pub fn grid_oracle(
    m: &RefModel,
    x: [f64; 3],
    total_torque: f64,
    steer: f64,
    lo: f64,
    hi: f64,
    q: [f64; 3],
    r: [f64; 3],
    yaw_ref: f64,
    beta_ref: f64,
    n: usize,
) -> f64 {
    let v = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let p1 = m.step(x, total_torque, v(i), steer);
        for j in 0..n {
            let p2 = m.step(p1, total_torque, v(j), steer);
            for k in 0..n {
                let p3 = m.step(p2, total_torque, v(k), steer);
                let c = ref_cost(&[p1, p2, p3], q, r, yaw_ref, beta_ref);
                if c < best {
                    best = c;
                }
            }
        }
    }
    best
}
