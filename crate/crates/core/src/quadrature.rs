//! Adaptive Gauss–Legendre quadrature for positive integrands on `(0, ∞)`,
//! carried out in `u = ln x` with the integrand kept in log form.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Exec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
    /// Scan range for locating the bulk of the integrand in `u = ln x`.
    pub u_range: (f64, f64),
    pub exec: Exec,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            initial_panels: 32,
            max_panels: 10_000,
            u_range: (-150.0, 150.0),
            exec: Exec::default(),
        }
    }
}

/// `∫ exp(h(u)) du = exp(ln_scale) · scaled`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogIntegral {
    pub ln_scale: f64,
    pub scaled: f64,
    /// Estimated relative error.
    pub rel_error: f64,
    pub panels: usize,
    pub support: (f64, f64),
}

impl LogIntegral {
    pub fn value(&self) -> f64 {
        self.scaled * self.ln_scale.exp()
    }

    pub fn ln_value(&self) -> f64 {
        self.ln_scale + self.scaled.ln()
    }
}

const ORDER: usize = 20;
/// Integrand values below `max - DYNAMIC_RANGE` (in log) are dropped.
const DYNAMIC_RANGE: f64 = 50.0;
const SCAN_STEP: f64 = 0.25;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * x.iter().zip(w).map(|(xi, wi)| wi * f(c + r * xi)).sum::<f64>()
}

/// Refine `[a, b]` until halving changes the panel value by at most `tol`.
/// Returns (value, error estimate, panels used).
fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, budget: usize) -> (f64, f64, usize) {
    let m = 0.5 * (a + b);
    let (l, r) = (panel(f, a, m), panel(f, m, b));
    let err = (l + r - whole).abs();
    if err <= tol || budget < 2 {
        return (l + r, err, 2);
    }
    let (lv, le, ln) = refine(f, a, m, l, tol / 2.0, budget / 2);
    let (rv, re, rn) = refine(f, m, b, r, tol / 2.0, budget / 2);
    (lv + rv, le + re, ln + rn)
}

/// `∫_{-∞}^{∞} exp(h(u)) du` for a log-integrand `h` that decays at both ends.
pub fn integrate_log<H>(h: H, cfg: &QuadratureConfig) -> Result<LogIntegral>
where
    H: Fn(f64) -> f64 + Sync + Send,
{
    let (u0, u1) = cfg.u_range;
    let steps = ((u1 - u0) / SCAN_STEP).ceil() as usize;
    let scan = cfg.exec.map_index(steps + 1, |i| h(u0 + i as f64 * SCAN_STEP));
    if let Some(i) = scan.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::QuadratureFailure(format!(
            "integrand not finite at u = {}",
            u0 + i as f64 * SCAN_STEP
        )));
    }
    let peak = scan.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::QuadratureFailure("integrand vanishes on the scan range".into()));
    }
    let keep: Vec<usize> = (0..scan.len()).filter(|&i| scan[i] >= peak - DYNAMIC_RANGE).collect();
    let (first, last) = (keep[0], *keep.last().unwrap());
    if first == 0 || last == steps {
        return Err(Error::QuadratureFailure(format!(
            "integrand does not decay inside u ∈ [{u0}, {u1}]"
        )));
    }
    let a = u0 + (first - 1) as f64 * SCAN_STEP;
    let b = u0 + (last + 1) as f64 * SCAN_STEP;

    let f = |u: f64| (h(u) - peak).exp();
    let n = cfg.initial_panels.max(1);
    let width = (b - a) / n as f64;
    let coarse = cfg.exec.map_index(n, |i| panel(&f, a + i as f64 * width, a + (i + 1) as f64 * width));
    let total = pairwise_sum(&coarse);
    if !(total > 0.0) {
        return Err(Error::QuadratureFailure(format!("non-positive integral estimate {total}")));
    }
    let tol = cfg.rel_tol * total / n as f64;
    let budget = cfg.max_panels / n;
    let refined = cfg.exec.map_index(n, |i| {
        refine(&f, a + i as f64 * width, a + (i + 1) as f64 * width, coarse[i], tol, budget)
    });
    let values: Vec<f64> = refined.iter().map(|r| r.0).collect();
    let errors: Vec<f64> = refined.iter().map(|r| r.1).collect();
    let panels: usize = refined.iter().map(|r| r.2).sum();
    let scaled = pairwise_sum(&values);
    let rel_error = pairwise_sum(&errors) / scaled;
    if rel_error > cfg.rel_tol.max(1e-14) * 10.0 {
        return Err(Error::QuadratureFailure(format!(
            "relative error estimate {rel_error:e} after {panels} panels"
        )));
    }
    Ok(LogIntegral {
        ln_scale: peak,
        scaled,
        rel_error,
        panels,
        support: (a, b),
    })
}

/// `∫_0^∞ x^{ρ-1} F(x) dx` given `ln F`.
pub fn mellin_moment<L>(ln_f: L, rho: f64, cfg: &QuadratureConfig) -> Result<LogIntegral>
where
    L: Fn(f64) -> f64 + Sync + Send,
{
    integrate_log(|u| rho * u + ln_f(u.exp()), cfg)
}
