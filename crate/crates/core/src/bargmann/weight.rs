//! Weight functions `F(x)` and atomic measures.

use std::f64::consts::PI;

use super::inversion::{invert_mellin_auto, ContourConfig};
use super::{HatForm, MellinSolution, WeightKind};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::qspecial::{ln_gamma_real, log_add_exp};

const SERIES_CAP: usize = 100_000;

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect(),
    }
}

/// `ln F(x)` of a closed-form density at unit scale.
fn ln_density_unit(form: &HatForm, x: f64) -> Result<f64> {
    let lx = x.ln();
    match form {
        HatForm::Gamma { sigma } => Ok(sigma * lx - x - ln_gamma_real(1.0 + sigma)),
        HatForm::LogGaussian { lambda, q } => {
            // ln x ~ N(ln λ + L/2, L) under F(x) x dx/x, L = -ln q
            let l = -q.ln();
            let m = lambda.ln() + 0.5 * l;
            Ok(-lx - (lx - m).powi(2) / (2.0 * l) - 0.5 * (2.0 * PI * l).ln())
        }
        HatForm::BracketForm { q, phi } => {
            // φ Σₙ G(x s q^{2n}) / (q⁻²; q⁻²)ₙ with G the log-normal of
            // Mellin transform q^{ρ(ρ-1)/2}
            let l = q.ln();
            let s = q - 1.0 / q;
            let ln_g = |y: f64| -(y - 0.5 * l).powi(2) / (2.0 * l) - y - 0.5 * (2.0 * PI * l).ln();
            let y0 = lx + s.ln();
            // terms peak near ln y = L/2
            let n_peak = ((0.5 * l - y0) / (2.0 * l)).max(0.0);
            let mut acc = f64::NEG_INFINITY;
            let mut ln_poch = 0.0;
            for n in 0..SERIES_CAP {
                if n > 0 {
                    ln_poch += (-(-2.0 * n as f64 * l).exp()).ln_1p();
                }
                let t = ln_g(y0 + 2.0 * n as f64 * l) - ln_poch;
                acc = log_add_exp(acc, t);
                if n as f64 > n_peak && t < acc - 45.0 {
                    return Ok(phi.ln() + acc);
                }
            }
            Err(Error::NonConvergence { terms: SERIES_CAP })
        }
        HatForm::ParenForm { q } => {
            // (c/L) / Π_{k≥0}(1 + c x q^{-k})
            let c = q - 1.0;
            let l = q.ln();
            let mut acc = (c / l).ln();
            for k in 0..SERIES_CAP {
                let t = c * x * (-(k as f64) * l).exp();
                acc -= t.ln_1p();
                if t < 1e-18 {
                    return Ok(acc);
                }
            }
            Err(Error::NonConvergence { terms: SERIES_CAP })
        }
        _ => Err(Error::Unsupported(format!("no closed-form density for {form:?}"))),
    }
}

/// `ln F(x)`. Fails for atomic measures and for numeric densities where the
/// sampled value is not positive.
pub fn weight_ln(sol: &MellinSolution, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("x > 0 required, got {x}")));
    }
    match &sol.weight_kind {
        WeightKind::Density(_) => Ok(ln_density_unit(&sol.hat_form, x / sol.scale)? - sol.scale.ln()),
        WeightKind::NumericDensity(_) => {
            let v = weight_eval(sol, x)?;
            Ok(if v > 0.0 { v.ln() } else { f64::NAN })
        }
        WeightKind::AtomicMeasure { .. } => Err(Error::Unsupported(
            "atomic measure has no density; use the atom list".into(),
        )),
        WeightKind::Unavailable(v) => Err(Error::InversionInfeasible(format!("{v:?}"))),
    }
}

/// `F(x)`.
pub fn weight_eval(sol: &MellinSolution, x: f64) -> Result<f64> {
    match &sol.weight_kind {
        WeightKind::NumericDensity(grid) => {
            if !(x > 0.0) {
                return Err(Error::InvalidParameter(format!("x > 0 required, got {x}")));
            }
            match grid.interpolate(x.ln()) {
                Some(v) => Ok(v),
                None => invert_mellin_auto(sol, x, &ContourConfig::default()).map(|r| r.0),
            }
        }
        _ => weight_ln(sol, x).map(f64::exp),
    }
}

/// Support points and masses of an atomic weight.
pub fn atoms(sol: &MellinSolution) -> Option<(&[f64], &[f64])> {
    match &sol.weight_kind {
        WeightKind::AtomicMeasure { support, masses } => Some((support, masses)),
        _ => None,
    }
}

/// Atoms at `xₙ = a qⁿ` with `wₙ ∝ a^{1-n} qⁿ / ((q-1)(q²-1)⋯(qⁿ-1))`, i.e.
/// the coefficients of the series expansion of the product form of `F̂`.
pub(super) fn atomic_measure(sol: &MellinSolution) -> Result<WeightKind> {
    let HatForm::AtomicProduct { a, q } = sol.hat_form else {
        return Err(Error::Unsupported("not an atomic form".into()));
    };
    let l = q.ln();
    let mut ln_w = vec![a.ln()];
    let mut support = vec![a * sol.scale];
    let mut ln_poch = 0.0;
    for n in 1..SERIES_CAP {
        ln_poch += (n as f64 * l).exp_m1().ln();
        let lw = (1.0 - n as f64) * a.ln() + n as f64 * l - ln_poch;
        let top = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // below this the mass underflows relative to the largest atom
        if lw < top - 700.0 && lw < ln_w[n - 1] {
            break;
        }
        ln_w.push(lw);
        support.push(a * sol.scale * (n as f64 * l).exp());
    }
    let total = ln_w.iter().copied().fold(f64::NEG_INFINITY, log_add_exp);
    let masses = ln_w.iter().map(|lw| (lw - total).exp()).collect();
    Ok(WeightKind::AtomicMeasure { support, masses })
}

/// `[ψ(-x d/dx) F](x)` for ψ a finite exponential sum, through the exact
/// dilations `b^{-x d/dx} F(x) = F(x/b)`; affine ψ uses the closed-form
/// derivative of the Gamma density.
pub fn apply_psi_dilations(sol: &MellinSolution, x: f64) -> Result<f64> {
    let psi = &sol.frame_psi;
    if let HatForm::Gamma { sigma } = sol.hat_form {
        if matches!(sol.weight_kind, WeightKind::Density(_)) {
            // F ∝ (x/s)^σ e^{-x/s}: -x F' = (x/s - σ) F; ψ_frame(y) = s (y + σ)
            let y = x / sol.scale;
            let f = weight_eval(sol, x)?;
            return Ok(sol.scale * ((y - sigma) * f + sigma * f));
        }
    }
    let sum = psi
        .exponential_sum()
        .ok_or_else(|| Error::Unsupported(format!("ψ(-x d/dx) has no dilation form for {}", psi.family_name())))?;
    if !matches!(sol.weight_kind, WeightKind::Density(_)) {
        return Err(Error::Unsupported("termwise action needs a closed-form density".into()));
    }
    let mut acc = sum.constant * weight_eval(sol, x)?;
    for (coef, base) in &sum.terms {
        acc += coef * weight_eval(sol, x / base)?;
    }
    Ok(acc)
}

/// Minimum of `F` over `grid` and where it occurs.
pub fn positivity_scan(sol: &MellinSolution, grid: &[f64], exec: Exec) -> Result<(f64, f64)> {
    if atoms(sol).is_some() {
        return Err(Error::Unsupported("atomic masses are checked directly".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let values = exec.map(grid, |&x| weight_eval(sol, x));
    let mut best = (f64::INFINITY, grid[0]);
    for (x, v) in grid.iter().zip(values) {
        let v = v?;
        if v < best.0 || v.is_nan() {
            best = (v, *x);
        }
    }
    Ok(best)
}
