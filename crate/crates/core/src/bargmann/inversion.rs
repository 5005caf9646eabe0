//! Numerical inverse Mellin transform along a vertical contour.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{hat_ln, MellinSolution};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Exec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Decaying,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionDiagnostics {
    pub contour_re: f64,
    pub t_max: f64,
    pub n_points: usize,
    /// `|F̂(c + i t_max)| x^{-c} / π`: size of the truncated integrand.
    pub tail_magnitude: f64,
    /// `Σ|terms| / |Σ terms|`; large values mean heavy cancellation.
    pub oscillation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourConfig {
    /// Fixed contour abscissa; `None` picks one per evaluation point.
    pub contour_re: Option<f64>,
    /// Trapezoid step in `t`.
    pub step: f64,
    /// `t_max` is grown until `|F̂(c+it)| < rel_drop·|F̂(c)|`.
    pub rel_drop: f64,
    pub t_cap: f64,
    pub exec: Exec,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            contour_re: None,
            step: 0.02,
            rel_drop: 1e-12,
            t_cap: 4096.0,
            exec: Exec::default(),
        }
    }
}

/// Contour used when none is given: 1.5, moved right of the abscissa if needed.
pub fn default_contour(sol: &MellinSolution) -> f64 {
    1.5f64.max(sol.abscissa() + 0.5)
}

pub fn default_probes() -> Vec<f64> {
    (1..=32).map(|k| k as f64).collect()
}

/// Decay of `|F̂(c+it)|` over the last quarter of the probes.
pub fn inversion_feasibility(sol: &MellinSolution, contour_re: f64, t_probe: &[f64]) -> Feasibility {
    let mut values = Vec::with_capacity(t_probe.len());
    for &t in t_probe {
        match hat_ln(sol, Complex64::new(contour_re, t)) {
            Ok(v) if !v.re.is_nan() => values.push(v.re),
            _ => return Feasibility::Inconclusive,
        }
    }
    if values.len() < 2 {
        return Feasibility::Inconclusive;
    }
    let start = (values.len() * 3 / 4).min(values.len() - 2);
    let tail = &values[start..];
    let origin = hat_ln(sol, Complex64::new(contour_re, 0.0)).map(|v| v.re).unwrap_or(f64::NAN);
    if tail.windows(2).all(|p| p[1] < p[0]) && tail[tail.len() - 1] < origin {
        Feasibility::Decaying
    } else if tail.windows(2).all(|p| p[1] > p[0]) {
        Feasibility::Diverging
    } else {
        Feasibility::Inconclusive
    }
}

/// Smallest `t = 2^k` with `|F̂(c+it)| < rel_drop·|F̂(c)|`, refined by bisection.
pub fn adaptive_t_max(sol: &MellinSolution, contour_re: f64, rel_drop: f64, t_cap: f64) -> Result<f64> {
    let base = hat_ln(sol, Complex64::new(contour_re, 0.0))?.re;
    let target = base + rel_drop.ln();
    let below = |t: f64| -> Result<bool> { Ok(hat_ln(sol, Complex64::new(contour_re, t))?.re < target) };
    let mut hi = 1.0;
    while !below(hi)? {
        hi *= 2.0;
        if hi > t_cap {
            return Err(Error::InversionInfeasible(format!(
                "|F̂({contour_re} + it)| does not drop by {rel_drop:e} before t = {t_cap}"
            )));
        }
    }
    // make sure the drop persists beyond the first crossing
    let mut lo = hi / 2.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = hi * 1.25;
    if !below(t)? || !below(2.0 * t)? {
        return Err(Error::InversionInfeasible(format!(
            "|F̂({contour_re} + it)| is not decaying near t = {t}"
        )));
    }
    Ok(t)
}

/// `F(x) = (1/π) ∫₀^{t_max} Re[F̂(c+it) x^{-c-it}] dt` by the trapezoid rule
/// with `n_points` nodes.
pub fn invert_mellin_numeric(
    sol: &MellinSolution,
    x: f64,
    contour_re: f64,
    t_max: f64,
    n_points: usize,
) -> Result<(f64, InversionDiagnostics)> {
    invert_mellin_with(sol, x, contour_re, t_max, n_points, Exec::default())
}

pub fn invert_mellin_with(
    sol: &MellinSolution,
    x: f64,
    contour_re: f64,
    t_max: f64,
    n_points: usize,
    exec: Exec,
) -> Result<(f64, InversionDiagnostics)> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("x > 0 required, got {x}")));
    }
    if n_points < 2 || !(t_max > 0.0) {
        return Err(Error::InvalidParameter("need t_max > 0 and at least 2 points".into()));
    }
    let probes: Vec<f64> = (1..=16).map(|k| t_max * k as f64 / 16.0).collect();
    if inversion_feasibility(sol, contour_re, &probes) == Feasibility::Diverging {
        return Err(Error::InversionInfeasible("Diverging".into()));
    }
    let lx = x.ln();
    let h = t_max / (n_points - 1) as f64;
    let terms = exec.map_index(n_points, |i| -> Result<f64> {
        let t = i as f64 * h;
        let rho = Complex64::new(contour_re, t);
        let v = (hat_ln(sol, rho)? - rho * lx).exp().re;
        Ok(if i == 0 || i + 1 == n_points { 0.5 * v } else { v })
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    let sum = pairwise_sum(&terms);
    let abs_sum = pairwise_sum(&terms.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let value = sum * h / PI;
    let tail = (hat_ln(sol, Complex64::new(contour_re, t_max))?.re - contour_re * lx).exp() / PI;
    Ok((
        value,
        InversionDiagnostics {
            contour_re,
            t_max,
            n_points,
            tail_magnitude: tail,
            oscillation: if sum != 0.0 { abs_sum / sum.abs() } else { f64::INFINITY },
        },
    ))
}

/// Contour abscissa minimizing `|F̂(c)| x^{-c}`, which keeps the contour
/// integrand free of cancellation.
fn saddle_contour(sol: &MellinSolution, lx: f64) -> f64 {
    let lo = if sol.abscissa().is_finite() { sol.abscissa() + 0.25 } else { -40.0 };
    let hi = lo.max(1.5) + 40.0;
    let g = |c: f64| {
        hat_ln(sol, Complex64::new(c, 0.0))
            .map(|v| v.re - c * lx)
            .unwrap_or(f64::INFINITY)
    };
    let (mut a, mut b) = (lo, hi);
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) < g(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    0.5 * (a + b)
}

/// Inversion with contour and truncation chosen automatically.
pub fn invert_mellin_auto(sol: &MellinSolution, x: f64, cfg: &ContourConfig) -> Result<(f64, InversionDiagnostics)> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("x > 0 required, got {x}")));
    }
    let c = cfg.contour_re.unwrap_or_else(|| saddle_contour(sol, x.ln()));
    let t_max = adaptive_t_max(sol, c, cfg.rel_drop, cfg.t_cap)?;
    let n = (t_max / cfg.step).ceil() as usize + 1;
    invert_mellin_with(sol, x, c, t_max, n, cfg.exec)
}

/// Samples of `F` on a uniform grid in `ln x`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericGrid {
    pub ln_x: Vec<f64>,
    pub values: Vec<f64>,
}

fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
}

pub(super) const GRID_LN_RANGE: (f64, f64) = (-16.0, 16.0);
pub(super) const GRID_POINTS: usize = 2049;

impl NumericGrid {
    /// Cubic (Catmull–Rom) interpolation in `ln x`, of `ln F` where the four
    /// neighbouring samples are positive and of `F` otherwise; `None` outside
    /// the grid.
    pub fn interpolate(&self, u: f64) -> Option<f64> {
        let n = self.ln_x.len();
        let (u0, u1) = (self.ln_x[0], self.ln_x[n - 1]);
        if !(u >= u0 && u <= u1) {
            return None;
        }
        let h = (u1 - u0) / (n - 1) as f64;
        let i = (((u - u0) / h).floor() as usize).min(n - 2);
        let t = (u - self.ln_x[i]) / h;
        let p = |k: isize| self.values[(i as isize + k).clamp(0, n as isize - 1) as usize];
        let (p0, p1, p2, p3) = (p(-1), p(0), p(1), p(2));
        if p0 > 0.0 && p1 > 0.0 && p2 > 0.0 && p3 > 0.0 {
            Some(catmull_rom(p0.ln(), p1.ln(), p2.ln(), p3.ln(), t).exp())
        } else {
            Some(catmull_rom(p0, p1, p2, p3, t))
        }
    }
}

pub(super) fn numeric_grid(sol: &MellinSolution, cfg: &ContourConfig) -> Result<NumericGrid> {
    let (a, b) = GRID_LN_RANGE;
    let ln_x: Vec<f64> = (0..GRID_POINTS)
        .map(|i| a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let inner = ContourConfig {
        exec: Exec::Sequential,
        ..*cfg
    };
    let values = cfg.exec.map(&ln_x, |u| invert_mellin_auto(sol, u.exp(), &inner).map(|r| r.0));
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(NumericGrid { ln_x, values })
}
