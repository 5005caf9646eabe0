//! Bargmann weight functions: solutions of `F̂(ρ+1) = ψ(ρ)F̂(ρ)` with
//! `F̂(1) = 1`, the weights `F` they are Mellin transforms of, and numerical
//! inverse Mellin transforms for families without a closed-form weight.
//!
//! Every solution lives in a *frame*: ψ with `μ` absorbed into the argument,
//! reflected `x ↦ ψ(1-x)` when only `a†` has eigenvectors, and re-indexed so
//! that a Fock vacuum sits at index 0. The frame structure function is kept on
//! the solution; moments are `F̂(n+1) = ψ_frame(n)!`.

mod hat;
mod inversion;
mod weight;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::psi::{PsiFamily, PsiSpec};
use crate::qspecial::generalized_factorial;
use crate::repr::{classify, coherent_domain, Ladder, SpectrumDescriptor, SpectrumKind};

pub use hat::HatForm;
pub use inversion::{
    adaptive_t_max, default_contour, default_probes, invert_mellin_auto, invert_mellin_numeric,
    invert_mellin_with, inversion_feasibility, ContourConfig, Feasibility, InversionDiagnostics, NumericGrid,
};
pub use weight::{apply_psi_dilations, atoms, log_grid, positivity_scan, weight_eval, weight_ln};

/// How the frame structure function is obtained from the user's ψ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    /// `x ↦ ψ(1-x)` was applied (dual ladder pair).
    pub dual: bool,
    /// `x ↦ ψ(x + shift)` was applied after the reflection.
    pub shift: i64,
}

/// Closed-form densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityTag {
    /// `x^σ e^{-x} / Γ(1+σ)`
    Gamma,
    /// log-normal
    LogNormal,
    /// log-normal prefactor times the `q⁻²`-series
    BracketSeries,
    /// `1 / 𝓔xp_q(qx)`
    ParenProduct,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind {
    Density(DensityTag),
    /// Point masses, support strictly increasing, masses positive and summing to 1.
    AtomicMeasure { support: Vec<f64>, masses: Vec<f64> },
    NumericDensity(NumericGrid),
    /// `F̂` exists but is not the Mellin transform of a function.
    Unavailable(Feasibility),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MellinSolution {
    pub psi: PsiSpec,
    pub spectrum: SpectrumDescriptor,
    pub frame: Frame,
    /// The ψ that `F̂` interpolates: `F̂(ρ+1) = frame_psi(ρ)·F̂(ρ)`.
    pub frame_psi: PsiSpec,
    pub hat_form: HatForm,
    /// `F̂(ρ) = scale^{ρ-1} F̂_form(ρ)`, i.e. `F(x) = F_form(x/scale)/scale`.
    pub scale: f64,
    pub weight_kind: WeightKind,
    /// Factor multiplying the unnormalized closed form so that `F̂(1) = 1`.
    pub normalization: f64,
    raw_at_one: f64,
}

impl MellinSolution {
    /// Lower abscissa of convergence of `F̂`.
    pub fn abscissa(&self) -> f64 {
        self.hat_form.abscissa()
    }

    /// `F̂(n+1)` as predicted by the moment conditions: `ψ_frame(n)!`.
    pub fn moment_target(&self, n: i64) -> Result<f64> {
        generalized_factorial(&self.frame_psi, n)
    }

    /// Integer moments `n` for which `∫ xⁿ F` is required to be finite.
    pub fn moment_range_allowed(&self, n: i64) -> bool {
        match classify(&self.frame_psi).map(|s| s.kind) {
            Ok(SpectrumKind::FullLine) => true,
            Ok(SpectrumKind::LowerBounded { nu_minus }) => n >= nu_minus.min(0),
            _ => false,
        }
    }
}

/// `ln F̂(ρ)`; the imaginary part is a branch of the argument.
pub fn hat_ln(sol: &MellinSolution, rho: Complex64) -> Result<Complex64> {
    let abscissa = sol.abscissa();
    if !(rho.re > abscissa) || !rho.re.is_finite() || !rho.im.is_finite() {
        return Err(Error::BelowAbscissa {
            re: rho.re,
            im: rho.im,
            abscissa,
        });
    }
    Ok(sol.hat_form.raw_ln(rho) - sol.raw_at_one + (rho - 1.0) * sol.scale.ln())
}

/// `F̂(ρ)`, normalized so that `F̂(1) = 1`.
pub fn hat_eval(sol: &MellinSolution, rho: Complex64) -> Result<Complex64> {
    hat_ln(sol, rho).map(|l| l.exp())
}

/// Solve with the default contour settings for numeric weights.
pub fn solve_mellin(psi: &PsiSpec) -> Result<MellinSolution> {
    solve_mellin_with(psi, &ContourConfig::default())
}

pub fn solve_mellin_with(psi: &PsiSpec, contour: &ContourConfig) -> Result<MellinSolution> {
    let spectrum = classify(psi)?;
    let domain = coherent_domain(psi, &spectrum)?;
    let dual = match domain.ladder {
        Ladder::A => false,
        Ladder::ADagger => true,
        Ladder::None => {
            return Err(Error::NoCoherentStates(format!(
                "{:?} spectrum: neither a nor a† has eigenvectors",
                spectrum.kind
            )))
        }
    };
    let mut frame_psi = psi.absorb_mu()?;
    if dual {
        frame_psi = frame_psi.reflect()?;
    }
    let shift = match classify(&frame_psi)?.kind {
        SpectrumKind::LowerBounded { nu_minus } if nu_minus > 0 => nu_minus,
        _ => 0,
    };
    let frame_psi = frame_psi.shift(shift)?;
    let (hat_form, scale, density) = closed_form(&frame_psi)?;
    let raw_at_one = hat_form.raw_ln(Complex64::new(1.0, 0.0)).re;
    let mut sol = MellinSolution {
        psi: psi.clone(),
        spectrum,
        frame: Frame { dual, shift },
        frame_psi,
        hat_form,
        scale,
        weight_kind: WeightKind::Unavailable(Feasibility::Inconclusive),
        normalization: (-raw_at_one).exp(),
        raw_at_one,
    };
    sol.weight_kind = match density {
        Some(Target::Density(tag)) => WeightKind::Density(tag),
        Some(Target::Atoms) => weight::atomic_measure(&sol)?,
        None => {
            let verdict = inversion_feasibility(&sol, default_contour(&sol), &default_probes());
            if verdict == Feasibility::Decaying {
                WeightKind::NumericDensity(inversion::numeric_grid(&sol, contour)?)
            } else {
                WeightKind::Unavailable(verdict)
            }
        }
    };
    Ok(sol)
}

enum Target {
    Density(DensityTag),
    Atoms,
}

/// Map a frame ψ to its closed form. `None` as target means the weight is
/// obtained numerically.
fn closed_form(psi: &PsiSpec) -> Result<(HatForm, f64, Option<Target>)> {
    let none = |what: &str| Err(Error::NoClosedForm(what.to_string()));
    match psi.family() {
        PsiFamily::Affine { sigma } => Ok((HatForm::Gamma { sigma: *sigma }, 1.0, Some(Target::Density(DensityTag::Gamma)))),
        PsiFamily::QBracket { q } => Ok((bracket_form(*q), 1.0, Some(Target::Density(DensityTag::BracketSeries)))),
        PsiFamily::QParen { q } => Ok((HatForm::ParenForm { q: *q }, 1.0, Some(Target::Density(DensityTag::ParenProduct)))),
        PsiFamily::ExpPoly { coeffs } => Ok((HatForm::BernoulliExp { coeffs: coeffs.clone() }, 1.0, None)),
        PsiFamily::QLinear {
            lambda_minus,
            lambda_plus,
            constant,
            q,
        } => {
            let (lm, lp, c, q) = if *q > 1.0 {
                (*lambda_minus, *lambda_plus, *constant, *q)
            } else {
                (*lambda_plus, *lambda_minus, *constant, 1.0 / q)
            };
            let tol = 1e-12 * lm.abs().max(lp.abs()).max(c.abs());
            let zero = |v: f64| v.abs() <= tol;
            if !(lp > 0.0) {
                return none("q-linear psi decreasing in the frame");
            }
            if zero(lm) && zero(c) {
                Ok((
                    HatForm::LogGaussian { lambda: lp, q: 1.0 / q },
                    1.0,
                    Some(Target::Density(DensityTag::LogNormal)),
                ))
            } else if zero(lm) && c > 0.0 {
                Ok((HatForm::AtomicProduct { a: c / lp, q }, lp, Some(Target::Atoms)))
            } else if zero(lm) && zero(c + lp) {
                Ok((
                    HatForm::ParenForm { q },
                    lp * (q - 1.0),
                    Some(Target::Density(DensityTag::ParenProduct)),
                ))
            } else if zero(c) && zero(lm + lp) {
                Ok((bracket_form(q), lp * (q - 1.0 / q), Some(Target::Density(DensityTag::BracketSeries))))
            } else {
                none(&format!(
                    "q-linear psi {lm}·q^-x + {lp}·q^x + {c} (q = {q}) is outside the solved families"
                ))
            }
        }
        PsiFamily::PolyProduct { coeffs } => {
            let n = coeffs.len() - 1;
            let lead = coeffs[n];
            if n == 0 || !(lead > 0.0) {
                return none("polynomial psi must have positive degree and leading coefficient");
            }
            if n == 1 {
                return Ok((
                    HatForm::Gamma { sigma: coeffs[0] / lead },
                    lead,
                    Some(Target::Density(DensityTag::Gamma)),
                ));
            }
            let roots = poly_roots(coeffs);
            let form = HatForm::GammaProduct { lead: 1.0, roots };
            if !(form.abscissa() < 1.0) {
                return none("polynomial psi has a root with Re ≥ 1 in the frame; F̂(1) is not defined");
            }
            Ok((form, lead, None))
        }
    }
}

fn bracket_form(q: f64) -> HatForm {
    // φ = s / f̂(1), f̂(1) = 1/(q⁻²; q⁻²)_∞
    let s = q - 1.0 / q;
    let l = q.ln();
    let mut ln_poch = 0.0;
    for k in 1.. {
        let t = (-2.0 * k as f64 * l).exp();
        ln_poch += (-t).ln_1p();
        if t < 1e-18 {
            break;
        }
    }
    HatForm::BracketForm {
        q,
        phi: s * ln_poch.exp(),
    }
}

/// Complex roots of a real polynomial (ascending coefficients), from the
/// companion matrix and polished by Newton steps.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        if i + 1 < n {
            m[(i + 1, i)] = 1.0;
        }
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let eval = |z: Complex64| {
        coeffs.iter().rev().fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |(p, dp), c| {
            (p * z + c, dp * z + p)
        })
    };
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let (p, dp) = eval(z);
                if dp.norm() == 0.0 {
                    break;
                }
                z -= p / dp;
            }
            let scale = z.norm().max(1.0);
            if z.im.abs() < 1e-12 * scale {
                z.im = 0.0;
            }
            if z.re.abs() < 1e-12 * scale {
                z.re = 0.0;
            }
            z
        })
        .collect()
}
