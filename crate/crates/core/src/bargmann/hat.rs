//! Closed forms for `ln F̂(ρ)` up to an additive constant.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::qspecial::{bernoulli_poly, ln_gamma};

/// Closed-form family of `F̂`. Each variant solves `F̂(ρ+1) = ψ(ρ)F̂(ρ)` for
/// the structure function named in its doc, at unit scale.
#[derive(Clone, Debug, PartialEq)]
pub enum HatForm {
    /// `ψ = x + σ`: `Γ(ρ+σ)`.
    Gamma { sigma: f64 },
    /// `ψ = λ q^{-x}`, `q < 1`: `exp(ρ ln λ - ½(ρ² - ρ) ln q)`.
    LogGaussian { lambda: f64, q: f64 },
    /// `ψ = exp(Σ aₙxⁿ)`: `exp(Σ aₙ/(n+1) B_{n+1}(ρ))`.
    BernoulliExp { coeffs: Vec<f64> },
    /// `ψ = a + q^x`, `q > 1`: `a^ρ Π_{p≥0} (1 + a⁻¹ q^{ρ-p-1})`.
    AtomicProduct { a: f64, q: f64 },
    /// `ψ = [x]`, `q > 1`: `q^{ρ(ρ-1)/2} s^{-ρ} / Π_{j≥0}(1 - q^{-2(ρ+j)})`,
    /// `s = q - q⁻¹`. `phi` is the prefactor that makes `F̂(1) = 1`.
    BracketForm { q: f64, phi: f64 },
    /// `ψ = (x)`, `q > 1`: `c^{-ρ} M(ρ)` with `c = q - 1` and `M` the Mellin
    /// transform of `1/(-x; q⁻¹)_∞`.
    ParenForm { q: f64 },
    /// `ψ = C Π (x - rᵢ)`: `C^ρ Π Γ(ρ - rᵢ)`.
    GammaProduct { lead: f64, roots: Vec<Complex64> },
}

const TERM_TOL: f64 = 1e-17;
const TERM_CAP: usize = 100_000;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let (s, co) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * co - 2.0 * half * half, z.re.exp() * s)
}

impl HatForm {
    /// Abscissa of convergence: `F̂` is analytic for `Re ρ` above it.
    pub fn abscissa(&self) -> f64 {
        match self {
            HatForm::Gamma { sigma } => -sigma,
            HatForm::BracketForm { .. } | HatForm::ParenForm { .. } => 0.0,
            HatForm::GammaProduct { roots, .. } => roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max),
            HatForm::LogGaussian { .. } | HatForm::BernoulliExp { .. } | HatForm::AtomicProduct { .. } => {
                f64::NEG_INFINITY
            }
        }
    }

    /// `ln F̂(ρ)` before normalization.
    pub fn raw_ln(&self, rho: Complex64) -> Complex64 {
        match self {
            HatForm::Gamma { sigma } => ln_gamma(rho + sigma),
            HatForm::LogGaussian { lambda, q } => rho * lambda.ln() - 0.5 * (rho * rho - rho) * q.ln(),
            HatForm::BernoulliExp { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| *a / (n + 1) as f64 * bernoulli_poly(n + 1, rho))
                .sum(),
            HatForm::AtomicProduct { a, q } => {
                let l = q.ln();
                let mut acc = rho * a.ln();
                for p in 0..TERM_CAP {
                    let w = ((rho - (p + 1) as f64) * l - a.ln()).exp();
                    acc += (c(1.0) + w).ln();
                    if w.norm() < TERM_TOL {
                        break;
                    }
                }
                acc
            }
            HatForm::BracketForm { q, .. } => {
                let l = q.ln();
                let s = q - 1.0 / q;
                let mut acc = 0.5 * rho * (rho - 1.0) * l - rho * s.ln();
                for j in 0..TERM_CAP {
                    // -ln(1 - q^{-2(ρ+j)})
                    let e = cexpm1(-2.0 * l * (rho + j as f64));
                    acc -= (-e).ln();
                    if (-2.0 * l * (rho.re + j as f64)).exp() < TERM_TOL {
                        break;
                    }
                }
                acc
            }
            HatForm::ParenForm { q } => -rho * (q - 1.0).ln() + ln_paren_mellin(*q, rho),
            HatForm::GammaProduct { lead, roots } => {
                rho * lead.ln() + roots.iter().map(|r| ln_gamma(rho - r)).sum::<Complex64>()
            }
        }
    }
}

/// `ln M(ρ)` with `M(ρ) = ∫₀^∞ x^{ρ-1} / Π_{k≥0}(1 + x q^{-k}) dx`
/// `= π/sin(πρ) · (q^{ρ-1}; q⁻¹)_∞ / (q⁻¹; q⁻¹)_∞`.
///
/// `ρ` is first moved into `Re σ ∈ (1/2, 3/2]` with `M(ρ+1) = (q^ρ - 1) M(ρ)`;
/// there the removable singularity at `σ = 1` is handled by pairing the sine
/// with the vanishing first factor of the product.
pub(crate) fn ln_paren_mellin(q: f64, rho: Complex64) -> Complex64 {
    let l = q.ln();
    let k = (rho.re - 1.5).ceil();
    let sigma = rho - k;
    let eps = sigma - 1.0;
    let h = if eps.norm() < 1e-8 {
        l * (1.0 + 0.5 * l * eps)
    } else {
        PI * cexpm1(eps * l) / (PI * eps).sin()
    };
    let mut acc = h.ln();
    for j in 0..TERM_CAP {
        // (q^{σ-1}; q⁻¹)_∞ without its first factor: Π_{j≥0}(1 - q^{σ-2-j})
        let w = ((sigma - 2.0 - j as f64) * l).exp();
        acc += (c(1.0) - w).ln();
        if w.norm() < TERM_TOL {
            break;
        }
    }
    for j in 1..TERM_CAP {
        let w = (-(j as f64) * l).exp();
        acc -= (-w).ln_1p();
        if w < TERM_TOL {
            break;
        }
    }
    let k = k as i64;
    if k > 0 {
        for j in 0..k {
            acc += cexpm1((sigma + j as f64) * l).ln();
        }
    } else {
        for j in 1..=-k {
            acc -= cexpm1((sigma - j as f64) * l).ln();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(form: &HatForm, rho: Complex64) -> Complex64 {
        (form.raw_ln(rho + 1.0) - form.raw_ln(rho)).exp()
    }

    #[test]
    fn expm1_matches_direct_evaluation() {
        for z in [Complex64::new(0.3, -1.2), Complex64::new(-2.0, 4.0), Complex64::new(1e-12, 1e-11)] {
            let direct = z.exp() - 1.0;
            assert!((cexpm1(z) - direct).norm() <= 1e-15 * direct.norm().max(1.0) + 1e-27);
        }
        let tiny = Complex64::new(1e-20, -3e-20);
        assert!((cexpm1(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn each_form_satisfies_its_recursion() {
        let q: f64 = 1.2;
        let s = q - 1.0 / q;
        let cases: Vec<(HatForm, Box<dyn Fn(Complex64) -> Complex64>)> = vec![
            (HatForm::Gamma { sigma: 0.5 }, Box::new(|r| r + 0.5)),
            (HatForm::LogGaussian { lambda: 2.0, q: 0.5 }, Box::new(|r: Complex64| 2.0 * (-r * 0.5f64.ln()).exp())),
            (
                HatForm::AtomicProduct { a: 1.0, q: 2.0 },
                Box::new(|r: Complex64| 1.0 + (r * 2f64.ln()).exp()),
            ),
            (
                HatForm::BracketForm { q, phi: 1.0 },
                Box::new(move |r: Complex64| ((r * q.ln()).exp() - (-r * q.ln()).exp()) / s),
            ),
            (
                HatForm::ParenForm { q: 1.5 },
                Box::new(|r: Complex64| cexpm1(r * 1.5f64.ln()) / 0.5),
            ),
            (
                HatForm::GammaProduct {
                    lead: 2.0,
                    roots: vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.5), Complex64::new(-1.0, -0.5)],
                },
                Box::new(|r: Complex64| 2.0 * r * ((r + 1.0) * (r + 1.0) + 0.25)),
            ),
        ];
        for (form, psi) in &cases {
            for rho in [Complex64::new(0.7, 0.0), Complex64::new(2.3, 1.7), Complex64::new(5.5, -3.0), Complex64::new(1.0, 0.0)] {
                let got = ratio(form, rho);
                let want = psi(rho);
                assert!((got - want).norm() <= 1e-12 * want.norm(), "{form:?} at {rho}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bernoulli_form_recursion() {
        let form = HatForm::BernoulliExp { coeffs: vec![0.3, -0.2, 0.1, 0.05, 0.0, 0.01] };
        for rho in [Complex64::new(0.5, 0.0), Complex64::new(1.5, 2.0)] {
            let psi = (0.3 - 0.2 * rho + 0.1 * rho * rho + 0.05 * rho.powi(3) + 0.01 * rho.powi(5)).exp();
            assert!((ratio(&form, rho) - psi).norm() <= 1e-12 * psi.norm());
        }
    }

    #[test]
    fn bracket_product_truncates_early() {
        // the stopping test must not depend on 1 + (e^z - 1), which stalls at ulp level
        let q: f64 = 1.2;
        let form = HatForm::BracketForm { q, phi: 1.0 };
        for rho in [Complex64::new(1.0, 5.0), Complex64::new(2.0, 4.0), Complex64::new(3.0, 5.0)] {
            let want = (rho * q.ln()).sinh() / q.ln().sinh();
            assert!((ratio(&form, rho) - want).norm() <= 1e-13 * want.norm(), "{rho}");
        }
    }

    #[test]
    fn paren_mellin_strip_edges() {
        // ∫ dx / Π_{k≥0}(1 + x q^{-k}) = ln q
        let q: f64 = 1.5;
        let m1 = ln_paren_mellin(q, Complex64::new(1.0, 0.0)).exp();
        assert!((m1.re - q.ln()).abs() < 1e-15 && m1.im.abs() < 1e-15);
        // continuity across the shift boundaries and the removable point
        for x in [0.5, 1.5, 2.5, 1.0] {
            let a = ln_paren_mellin(q, Complex64::new(x - 1e-9, 0.0)).exp().re;
            let b = ln_paren_mellin(q, Complex64::new(x + 1e-9, 0.0)).exp().re;
            assert!((a - b).abs() < 1e-7 * a.abs(), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn paren_mellin_against_quadrature() {
        // scipy-free oracle: trapezoid in u = ln x of x^ρ / Π(1 + x q^{-k})
        let q: f64 = 1.5;
        let rho = 0.7;
        let f = |u: f64| {
            let x = u.exp();
            let mut ln_p = 0.0;
            for k in 0..2000 {
                let t = x * q.powi(-k);
                ln_p += t.ln_1p();
                if t < 1e-18 {
                    break;
                }
            }
            (rho * u - ln_p).exp()
        };
        let h = 0.01;
        let integral: f64 = (-6000..6000).map(|i| f(i as f64 * h)).sum::<f64>() * h;
        let got = ln_paren_mellin(q, Complex64::new(rho, 0.0)).exp().re;
        assert!((got - integral).abs() < 1e-10 * integral, "{got} vs {integral}");
    }
}
