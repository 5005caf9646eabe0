//! q-numbers, generalized factorials, q-exponentials, Bernoulli polynomials
//! and the complex log-gamma function.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::psi::PsiSpec;

/// Hard cap on the number of series terms.
pub const SERIES_TERM_CAP: usize = 1_000_000;

/// Stopping rule for power series: stop once `|term| < tol * (1 + |sum|)` has
/// held for three consecutive terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tol: 1e-17,
            max_terms: SERIES_TERM_CAP,
        }
    }
}

fn check_q_positive(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) || q == 1.0 {
        return Err(Error::InvalidParameter(format!("q > 0 and q ≠ 1 required, got q = {q}")));
    }
    Ok(())
}

/// `[x] = (q^x - q^-x) / (q - q^-1)`.
///
/// Evaluated as `sinh(x ln q) / sinh(ln q)`, which is exactly symmetric under
/// `q -> 1/q`.
pub fn q_bracket(x: f64, q: f64) -> Result<f64> {
    check_q_positive(q)?;
    let l = q.ln();
    Ok((x * l).sinh() / l.sinh())
}

/// `(x) = (q^x - 1) / (q - 1)` for `q > 1`.
pub fn q_paren(x: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::InvalidParameter(format!("q > 1 required, got q = {q}")));
    }
    let l = q.ln();
    Ok((x * l).exp_m1() / l.exp_m1())
}

/// `ψ(μ+n)!` for the structure function of `psi`.
///
/// `n > 0`: `ψ(μ+1)⋯ψ(μ+n)`; `n = 0`: 1; `n < 0`: `1 / (ψ(μ+n+1)⋯ψ(μ))`, so that
/// `ψ(n+1)! = ψ(n+1)·ψ(n)!` holds for every integer `n`.
pub fn generalized_factorial(psi: &PsiSpec, n: i64) -> Result<f64> {
    factorial_of(|x| psi.evaluate(x), psi.mu(), n)
}

/// Generalized factorial of an arbitrary structure function `f` on `mu + Z`.
pub fn factorial_of<F: Fn(f64) -> f64>(f: F, mu: f64, n: i64) -> Result<f64> {
    if n >= 0 {
        Ok((1..=n).map(|k| f(mu + k as f64)).product())
    } else {
        let mut prod = 1.0;
        for k in (n + 1)..=0 {
            let v = f(mu + k as f64);
            if v == 0.0 {
                return Err(Error::ZeroFactor { at: mu + k as f64 });
            }
            prod *= v;
        }
        Ok(1.0 / prod)
    }
}

/// `ln ψ(μ+n)!` for structure functions that are strictly positive on the
/// product range.
pub fn ln_factorial_of<F: Fn(f64) -> f64>(f: F, mu: f64, n: i64) -> Result<f64> {
    let ln_factor = |k: i64| {
        let x = mu + k as f64;
        let v = f(x);
        if v > 0.0 {
            Ok(v.ln())
        } else if v == 0.0 {
            Err(Error::ZeroFactor { at: x })
        } else {
            Err(Error::NegativePsi { at: x, value: v })
        }
    };
    if n >= 0 {
        (1..=n).map(ln_factor).sum()
    } else {
        let s: Result<f64> = ((n + 1)..=0).map(ln_factor).sum();
        s.map(|v| -v)
    }
}

/// Which q-number the q-exponential divides by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpVariant {
    /// `Σ xⁿ / [n]!`
    Bracket,
    /// `Σ xⁿ / (n)!`
    Paren,
}

fn normalized_q(q: f64, variant: ExpVariant) -> Result<f64> {
    match variant {
        ExpVariant::Bracket => {
            check_q_positive(q)?;
            Ok(if q < 1.0 { 1.0 / q } else { q })
        }
        ExpVariant::Paren => {
            if !(q.is_finite() && q > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "q > 1 required for the (n)! exponential, got q = {q}"
                )));
            }
            Ok(q)
        }
    }
}

fn q_number(k: f64, q: f64, variant: ExpVariant) -> f64 {
    let l = q.ln();
    match variant {
        ExpVariant::Bracket => (k * l).sinh() / l.sinh(),
        ExpVariant::Paren => (k * l).exp_m1() / l.exp_m1(),
    }
}

/// q-exponential `Σ_{n≥0} xⁿ / [n]!` or `Σ xⁿ / (n)!`.
///
/// Inputs with `q < 1` are mapped to `1/q` for the bracket variant; the paren
/// variant requires `q > 1`.
pub fn exp_q(x: f64, q: f64, variant: ExpVariant) -> Result<f64> {
    exp_q_with(x, q, variant, SeriesConfig::default())
}

pub fn exp_q_with(x: f64, q: f64, variant: ExpVariant, cfg: SeriesConfig) -> Result<f64> {
    let q = normalized_q(q, variant)?;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small = 0;
    for n in 1..cfg.max_terms {
        term *= x / q_number(n as f64, q, variant);
        sum += term;
        if term.abs() < cfg.tol * (1.0 + sum.abs()) {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { terms: cfg.max_terms })
}

/// `ln exp_q(y)` for `y ≥ 0`, summed in log space so it stays finite where the
/// series itself overflows.
pub fn ln_exp_q_positive(y: f64, q: f64, variant: ExpVariant) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("y ≥ 0 required, got {y}")));
    }
    let q = normalized_q(q, variant)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let ln_y = y.ln();
    let cfg = SeriesConfig::default();
    let ln_tol = cfg.tol.ln();
    let mut acc = 0.0; // ln Σ so far, starting from the n = 0 term
    let mut ln_term = 0.0;
    let mut small = 0;
    for n in 1..cfg.max_terms {
        let prev = ln_term;
        ln_term += ln_y - q_number(n as f64, q, variant).ln();
        acc = log_add_exp(acc, ln_term);
        if ln_term < prev && ln_term < acc + ln_tol {
            small += 1;
            if small == 3 {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { terms: cfg.max_terms })
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Bernoulli numbers `B_0..=B_m` with `B_1 = -1/2`.
pub fn bernoulli_numbers(m: usize) -> Vec<f64> {
    let mut b = vec![0.0; m + 1];
    b[0] = 1.0;
    for n in 1..=m {
        // Σ_{k=0}^{n} C(n+1, k) B_k = 0
        let mut s = 0.0;
        let mut binom = 1.0; // C(n+1, 0)
        for (k, bk) in b.iter().enumerate().take(n) {
            s += binom * bk;
            binom *= (n + 1 - k) as f64 / (k + 1) as f64;
        }
        b[n] = -s / (n + 1) as f64;
    }
    b
}

/// Bernoulli polynomial `B_m(ρ)` at a complex argument.
pub fn bernoulli_poly(m: usize, rho: Complex64) -> Complex64 {
    let b = bernoulli_numbers(m);
    // B_m(ρ) = Σ_k C(m,k) B_k ρ^{m-k}; Horner in ρ over descending powers.
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    let mut coeffs = Vec::with_capacity(m + 1);
    for (k, bk) in b.iter().enumerate() {
        coeffs.push(binom * bk);
        binom *= (m - k) as f64 / (k + 1) as f64;
    }
    for c in coeffs {
        acc = acc * rho + c;
    }
    acc
}

/// The two finite q-products that appear as denominators of the weight series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochhammerForm {
    /// `(q - 1)(q² - 1)⋯(qⁿ - 1)`
    PowersMinusOne,
    /// `(1 - q⁻²)(1 - q⁻⁴)⋯(1 - q⁻²ⁿ)`
    OneMinusInverseSquares,
}

pub fn q_pochhammer_factor(n: u32, q: f64, form: PochhammerForm) -> Result<f64> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidParameter(format!("q > 0 required, got q = {q}")));
    }
    let l = q.ln();
    let mut prod = 1.0;
    for k in 1..=n {
        let factor = match form {
            PochhammerForm::PowersMinusOne => (k as f64 * l).exp_m1(),
            PochhammerForm::OneMinusInverseSquares => -(-2.0 * k as f64 * l).exp_m1(),
        };
        if factor == 0.0 {
            return Err(Error::ZeroFactor { at: k as f64 });
        }
        prod *= factor;
    }
    Ok(prod)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for complex `z` (Lanczos, reflection for `Re z < 1/2`).
///
/// The imaginary part is a continuous branch along vertical lines but is not
/// the principal value; only `exp` of the result is meaningful.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Real `ln Γ(x)` for `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}
