//! Structure functions ψ of the deformed oscillator algebra
//! `a†a = ψ(N)`, `aa† = ψ(N+1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance under which a lattice value counts as a zero of ψ when
/// no analytic zero information is available.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Built-in families of structure functions.
#[derive(Clone, Debug, PartialEq)]
pub enum PsiFamily {
    /// `x + σ`
    Affine { sigma: f64 },
    /// `λ₋ q^{-x} + λ₊ q^{x} + c`
    QLinear {
        lambda_minus: f64,
        lambda_plus: f64,
        constant: f64,
        q: f64,
    },
    /// `exp(a₀ + a₁x + ⋯ + a_{2p+1}x^{2p+1})`, `a_{2p+1} > 0`
    ExpPoly { coeffs: Vec<f64> },
    /// `[x] = (q^x - q^{-x}) / (q - q^{-1})`, stored with `q > 1`
    QBracket { q: f64 },
    /// `(x) = (q^x - 1) / (q - 1)`, `q > 1`
    QParen { q: f64 },
    /// Real polynomial `c₀ + c₁x + ⋯`, ascending coefficients.
    PolyProduct { coeffs: Vec<f64> },
}

/// A structure function together with the representation label `μ ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiSpec {
    family: PsiFamily,
    mu: f64,
}

/// `ψ(x) = Σ cⱼ bⱼˣ + constant`, the form on which `ψ(±x d/dx)` acts by dilations.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialSum {
    pub terms: Vec<(f64, f64)>,
    pub constant: f64,
}

/// Direction of an asymptote.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    PlusInfinity,
    MinusInfinity,
}

/// Result of a lattice zero scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeZeros {
    pub zeros: Vec<i64>,
    /// ψ changes sign between two adjacent lattice points neither of which is a zero.
    pub off_lattice_sign_change: bool,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

/// Coefficients of `p(α + βx)` given ascending coefficients of `p`.
fn compose_affine(coeffs: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (k, &ck) in coeffs.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        // (α + βx)^k = Σ_j C(k,j) α^{k-j} β^j x^j
        let row = binomial_row(k);
        for (j, b) in row.iter().enumerate() {
            out[j] += ck * b * alpha.powi((k - j) as i32) * beta.powi(j as i32);
        }
    }
    out
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl PsiSpec {
    /// Validate and build a spec.
    pub fn new(family: PsiFamily, mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mu must lie in [0, 1), got {mu}")));
        }
        let family = match family {
            PsiFamily::Affine { sigma } => {
                finite("sigma", sigma)?;
                PsiFamily::Affine { sigma }
            }
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                if !(q.is_finite() && q > 0.0) || q == 1.0 {
                    return Err(Error::InvalidParameter(format!("q > 0 and q ≠ 1 required, got q = {q}")));
                }
                finite("lambda_minus", lambda_minus)?;
                finite("lambda_plus", lambda_plus)?;
                finite("const", constant)?;
                if lambda_minus == 0.0 && lambda_plus == 0.0 && constant == 0.0 {
                    return Err(Error::InvalidParameter("psi must not vanish identically".into()));
                }
                PsiFamily::QLinear {
                    lambda_minus,
                    lambda_plus,
                    constant,
                    q,
                }
            }
            PsiFamily::ExpPoly { coeffs } => {
                for (i, a) in coeffs.iter().enumerate() {
                    finite(&format!("a{i}"), *a)?;
                }
                if coeffs.len() < 2 || coeffs.len() % 2 != 0 {
                    return Err(Error::InvalidParameter(format!(
                        "exponent degree must be odd (2p+1), got {} coefficients",
                        coeffs.len()
                    )));
                }
                if !(coeffs[coeffs.len() - 1] > 0.0) {
                    return Err(Error::InvalidParameter(
                        "highest exponent coefficient a_{2p+1} > 0 required".into(),
                    ));
                }
                PsiFamily::ExpPoly { coeffs }
            }
            PsiFamily::QBracket { q } => {
                if !(q.is_finite() && q > 0.0) || q == 1.0 {
                    return Err(Error::InvalidParameter(format!("q > 0 and q ≠ 1 required, got q = {q}")));
                }
                PsiFamily::QBracket {
                    q: if q < 1.0 { 1.0 / q } else { q },
                }
            }
            PsiFamily::QParen { q } => {
                if !(q.is_finite() && q > 1.0) {
                    return Err(Error::InvalidParameter(format!("q > 1 required, got q = {q}")));
                }
                PsiFamily::QParen { q }
            }
            PsiFamily::PolyProduct { mut coeffs } => {
                for (i, c) in coeffs.iter().enumerate() {
                    finite(&format!("c{i}"), *c)?;
                }
                while coeffs.last() == Some(&0.0) {
                    coeffs.pop();
                }
                if coeffs.is_empty() {
                    return Err(Error::InvalidParameter("psi must not vanish identically".into()));
                }
                PsiFamily::PolyProduct { coeffs }
            }
        };
        Ok(PsiSpec { family, mu })
    }

    pub fn affine(sigma: f64) -> Result<Self> {
        Self::new(PsiFamily::Affine { sigma }, 0.0)
    }

    pub fn qlinear(lambda_minus: f64, lambda_plus: f64, constant: f64, q: f64) -> Result<Self> {
        Self::new(
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            },
            0.0,
        )
    }

    /// `λ q^{-x}`.
    pub fn q_inverse_power(lambda: f64, q: f64) -> Result<Self> {
        Self::qlinear(lambda, 0.0, 0.0, q)
    }

    /// `a + q^x`.
    pub fn shifted_exponential(a: f64, q: f64) -> Result<Self> {
        Self::qlinear(0.0, 1.0, a, q)
    }

    /// The oscillator `aa† - q a†a = q^{-N}`: `(σ q^x - q^{-x}) / (q - q^{-1})`.
    pub fn q_oscillator(sigma: f64, q: f64) -> Result<Self> {
        let s = q - 1.0 / q;
        Self::qlinear(-1.0 / s, sigma / s, 0.0, q)
    }

    /// The oscillator `aa† - q a†a = 1`: `(1 - q)^{-1} + σ q^x`.
    pub fn q_oscillator_unit(sigma: f64, q: f64) -> Result<Self> {
        Self::qlinear(0.0, sigma, 1.0 / (1.0 - q), q)
    }

    pub fn exp_poly(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(PsiFamily::ExpPoly { coeffs }, 0.0)
    }

    pub fn q_bracket(q: f64) -> Result<Self> {
        Self::new(PsiFamily::QBracket { q }, 0.0)
    }

    pub fn q_paren(q: f64) -> Result<Self> {
        Self::new(PsiFamily::QParen { q }, 0.0)
    }

    pub fn poly(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(PsiFamily::PolyProduct { coeffs }, 0.0)
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        Self::new(self.family, mu)
    }

    pub fn family(&self) -> &PsiFamily {
        &self.family
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// ψ(x). Overflow yields `±∞`.
    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.family {
            PsiFamily::Affine { sigma } => x + sigma,
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                let l = q.ln();
                let mut v = *constant;
                // zero coefficients are skipped so that 0·∞ never occurs
                if *lambda_minus != 0.0 {
                    v += lambda_minus * (-x * l).exp();
                }
                if *lambda_plus != 0.0 {
                    v += lambda_plus * (x * l).exp();
                }
                v
            }
            PsiFamily::ExpPoly { coeffs } => horner(coeffs, x).exp(),
            PsiFamily::QBracket { q } => {
                let l = q.ln();
                (x * l).sinh() / l.sinh()
            }
            PsiFamily::QParen { q } => {
                let l = q.ln();
                (x * l).exp_m1() / l.exp_m1()
            }
            PsiFamily::PolyProduct { coeffs } => horner(coeffs, x),
        }
    }

    /// ψ at a complex argument.
    pub fn evaluate_complex(&self, z: Complex64) -> Complex64 {
        let horner_c = |coeffs: &[f64]| {
            coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
        };
        match &self.family {
            PsiFamily::Affine { sigma } => z + sigma,
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                let l = q.ln();
                let mut v = Complex64::new(*constant, 0.0);
                if *lambda_minus != 0.0 {
                    v += lambda_minus * (-z * l).exp();
                }
                if *lambda_plus != 0.0 {
                    v += lambda_plus * (z * l).exp();
                }
                v
            }
            PsiFamily::ExpPoly { coeffs } => horner_c(coeffs).exp(),
            PsiFamily::QBracket { q } => {
                let l = q.ln();
                (z * l).sinh() / l.sinh()
            }
            PsiFamily::QParen { q } => {
                let w = z * q.ln();
                // e^w - 1 without cancellation near w = 0
                let half = (0.5 * w.im).sin();
                let em1 = Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * half * half, w.re.exp() * w.im.sin());
                em1 / (q - 1.0)
            }
            PsiFamily::PolyProduct { coeffs } => horner_c(coeffs),
        }
    }

    /// Sign of ψ(x) that survives underflow of the exponential terms.
    pub fn sign(&self, x: f64) -> f64 {
        let v = self.evaluate(x);
        if v != 0.0 {
            return v.signum();
        }
        match &self.family {
            PsiFamily::ExpPoly { .. } => 1.0,
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                let l = q.ln();
                // a zero sum with a representable term is an exact cancellation
                if *constant != 0.0 {
                    return 0.0;
                }
                let terms = [(*lambda_minus, -x * l), (*lambda_plus, x * l)];
                terms
                    .iter()
                    .filter(|(c, _)| *c != 0.0)
                    .map(|(c, e)| (c.signum(), c.abs().ln() + e))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map_or(0.0, |(s, _)| s)
            }
            _ => 0.0,
        }
    }

    /// The exponent of an `ExpPoly` ψ, i.e. `ln ψ(x)` without overflow.
    pub fn ln_evaluate(&self, x: f64) -> f64 {
        match &self.family {
            PsiFamily::ExpPoly { coeffs } => horner(coeffs, x),
            _ => self.evaluate(x).ln(),
        }
    }

    /// Dilation form of ψ, when ψ is a finite sum of exponentials in x.
    pub fn exponential_sum(&self) -> Option<ExponentialSum> {
        match &self.family {
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                let mut terms = Vec::new();
                if *lambda_minus != 0.0 {
                    terms.push((*lambda_minus, 1.0 / q));
                }
                if *lambda_plus != 0.0 {
                    terms.push((*lambda_plus, *q));
                }
                Some(ExponentialSum {
                    terms,
                    constant: *constant,
                })
            }
            PsiFamily::QBracket { q } => {
                let s = q - 1.0 / q;
                Some(ExponentialSum {
                    terms: vec![(1.0 / s, *q), (-1.0 / s, 1.0 / q)],
                    constant: 0.0,
                })
            }
            PsiFamily::QParen { q } => Some(ExponentialSum {
                terms: vec![(1.0 / (q - 1.0), *q)],
                constant: -1.0 / (q - 1.0),
            }),
            _ => None,
        }
    }

    /// Real zeros of ψ when known in closed form.
    pub fn structural_zeros(&self) -> Option<Vec<f64>> {
        match &self.family {
            PsiFamily::Affine { sigma } => Some(vec![-sigma]),
            PsiFamily::ExpPoly { .. } => Some(vec![]),
            PsiFamily::QBracket { .. } | PsiFamily::QParen { .. } => Some(vec![0.0]),
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                // with y = q^x > 0: λ₊y² + c·y + λ₋ = 0
                let (a, b, c) = (*lambda_plus, *constant, *lambda_minus);
                let mut ys = Vec::new();
                if a == 0.0 {
                    if b != 0.0 {
                        ys.push(-c / b);
                    }
                } else {
                    let disc = b * b - 4.0 * a * c;
                    if disc == 0.0 {
                        ys.push(-b / (2.0 * a));
                    } else if disc > 0.0 {
                        let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
                        let t = -0.5 * (b + sgn * disc.sqrt());
                        if t != 0.0 {
                            ys.push(t / a);
                            ys.push(c / t);
                        } else {
                            ys.push(0.0);
                        }
                    }
                }
                let l = q.ln();
                let mut xs: Vec<f64> = ys.into_iter().filter(|y| *y > 0.0).map(|y| y.ln() / l).collect();
                xs.sort_by(|u, v| u.total_cmp(v));
                xs.dedup();
                Some(xs)
            }
            PsiFamily::PolyProduct { .. } => None,
        }
    }

    /// Upper bound on `|x|` over the real zeros of ψ.
    pub fn real_zero_bound(&self) -> f64 {
        match &self.family {
            PsiFamily::PolyProduct { coeffs } => {
                let n = coeffs.len() - 1;
                if n == 0 {
                    return 0.0;
                }
                let lead = coeffs[n].abs();
                1.0 + coeffs[..n].iter().map(|c| c.abs() / lead).fold(0.0, f64::max)
            }
            _ => self
                .structural_zeros()
                .unwrap_or_default()
                .iter()
                .map(|z| z.abs())
                .fold(0.0, f64::max),
        }
    }

    /// Integers `n ∈ [n_min, n_max]` with `ψ(μ+n) = 0`.
    pub fn find_lattice_zeros(&self, n_min: i64, n_max: i64) -> LatticeZeros {
        self.find_lattice_zeros_tol(n_min, n_max, DEFAULT_ZERO_TOL)
    }

    /// Zero scan with an explicit tolerance. Built-in families with closed-form
    /// zeros ignore `zero_tol`.
    pub fn find_lattice_zeros_tol(&self, n_min: i64, n_max: i64, zero_tol: f64) -> LatticeZeros {
        let zeros: Vec<i64> = match self.structural_zeros() {
            Some(roots) => {
                let mut z: Vec<i64> = roots
                    .iter()
                    .filter_map(|r| {
                        let n = (r - self.mu).round();
                        let hit = (self.mu + n - r).abs() <= 1e-9 * r.abs().max(1.0);
                        (hit && n >= n_min as f64 && n <= n_max as f64).then_some(n as i64)
                    })
                    .collect();
                z.sort_unstable();
                z.dedup();
                z
            }
            None => (n_min..=n_max)
                .filter(|&n| self.evaluate(self.mu + n as f64).abs() <= zero_tol)
                .collect(),
        };
        let mut off_lattice_sign_change = false;
        let mut prev: Option<(i64, f64)> = None;
        for n in n_min..=n_max {
            if zeros.binary_search(&n).is_ok() {
                prev = None;
                continue;
            }
            let v = self.sign(self.mu + n as f64);
            if let Some((_, pv)) = prev {
                if pv.signum() != v.signum() {
                    off_lattice_sign_change = true;
                }
            }
            prev = Some((n, v));
        }
        LatticeZeros {
            zeros,
            off_lattice_sign_change,
        }
    }

    /// `lim ψ(x)` as `x → ±∞`, as an extended real.
    pub fn asymptote(&self, direction: Direction) -> Result<f64> {
        let plus = direction == Direction::PlusInfinity;
        let inf = f64::INFINITY;
        Ok(match &self.family {
            PsiFamily::Affine { .. } => {
                if plus {
                    inf
                } else {
                    -inf
                }
            }
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => {
                // dominant coefficient: q^x grows toward +∞ iff q > 1
                let growing = if (*q > 1.0) == plus { *lambda_plus } else { *lambda_minus };
                if growing > 0.0 {
                    inf
                } else if growing < 0.0 {
                    -inf
                } else {
                    *constant
                }
            }
            PsiFamily::ExpPoly { .. } => {
                if plus {
                    inf
                } else {
                    0.0
                }
            }
            PsiFamily::QBracket { .. } => {
                if plus {
                    inf
                } else {
                    -inf
                }
            }
            PsiFamily::QParen { q } => {
                if plus {
                    inf
                } else {
                    -1.0 / (q - 1.0)
                }
            }
            PsiFamily::PolyProduct { coeffs } => {
                let n = coeffs.len() - 1;
                let lead = coeffs[n];
                if n == 0 {
                    lead
                } else {
                    let sign = if plus || n % 2 == 0 { lead.signum() } else { -lead.signum() };
                    sign * inf
                }
            }
        })
    }

    /// `x ↦ ψ(1 - x)`: the structure function seen by the dual ladder pair
    /// `b = a†`, `b† = a`, `Ñ = -N`.
    pub fn reflect(&self) -> Result<PsiSpec> {
        let mu = if self.mu == 0.0 { 0.0 } else { 1.0 - self.mu };
        let family = match &self.family {
            PsiFamily::Affine { sigma } => PsiFamily::PolyProduct {
                coeffs: vec![1.0 + sigma, -1.0],
            },
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => PsiFamily::QLinear {
                lambda_minus: lambda_plus * q,
                lambda_plus: lambda_minus / q,
                constant: *constant,
                q: *q,
            },
            PsiFamily::QBracket { q } => {
                let s = q - 1.0 / q;
                PsiFamily::QLinear {
                    lambda_minus: q / s,
                    lambda_plus: -1.0 / (q * s),
                    constant: 0.0,
                    q: *q,
                }
            }
            PsiFamily::QParen { q } => PsiFamily::QLinear {
                lambda_minus: q / (q - 1.0),
                lambda_plus: 0.0,
                constant: -1.0 / (q - 1.0),
                q: *q,
            },
            PsiFamily::PolyProduct { coeffs } => PsiFamily::PolyProduct {
                coeffs: compose_affine(coeffs, 1.0, -1.0),
            },
            PsiFamily::ExpPoly { .. } => {
                return Err(Error::Unsupported(
                    "reflection of an exponential-polynomial psi leaves the family (leading coefficient turns negative)"
                        .into(),
                ))
            }
        };
        PsiSpec::new(family, mu)
    }

    /// `x ↦ ψ(x + k)`: re-index the lattice by `k`.
    pub fn shift(&self, k: i64) -> Result<PsiSpec> {
        if k == 0 {
            return Ok(self.clone());
        }
        PsiSpec::new(self.translated(k as f64), self.mu)
    }

    /// `x ↦ ψ(μ + x)` with `μ = 0`: the same lattice values, indexed from 0.
    pub fn absorb_mu(&self) -> Result<PsiSpec> {
        if self.mu == 0.0 {
            return Ok(self.clone());
        }
        PsiSpec::new(self.translated(self.mu), 0.0)
    }

    fn translated(&self, h: f64) -> PsiFamily {
        match &self.family {
            PsiFamily::Affine { sigma } => PsiFamily::Affine { sigma: sigma + h },
            PsiFamily::QLinear {
                lambda_minus,
                lambda_plus,
                constant,
                q,
            } => PsiFamily::QLinear {
                lambda_minus: lambda_minus * q.powf(-h),
                lambda_plus: lambda_plus * q.powf(h),
                constant: *constant,
                q: *q,
            },
            PsiFamily::QBracket { q } => {
                let s = q - 1.0 / q;
                PsiFamily::QLinear {
                    lambda_minus: -q.powf(-h) / s,
                    lambda_plus: q.powf(h) / s,
                    constant: 0.0,
                    q: *q,
                }
            }
            PsiFamily::QParen { q } => PsiFamily::QLinear {
                lambda_minus: 0.0,
                lambda_plus: q.powf(h) / (q - 1.0),
                constant: -1.0 / (q - 1.0),
                q: *q,
            },
            PsiFamily::ExpPoly { coeffs } => PsiFamily::ExpPoly {
                coeffs: compose_affine(coeffs, h, 1.0),
            },
            PsiFamily::PolyProduct { coeffs } => PsiFamily::PolyProduct {
                coeffs: compose_affine(coeffs, h, 1.0),
            },
        }
    }

    /// Family name as used in configuration files.
    pub fn family_name(&self) -> &'static str {
        match self.family {
            PsiFamily::Affine { .. } => "affine",
            PsiFamily::QLinear { .. } => "qlinear",
            PsiFamily::ExpPoly { .. } => "explog",
            PsiFamily::QBracket { .. } => "qbracket",
            PsiFamily::QParen { .. } => "qparen",
            PsiFamily::PolyProduct { .. } => "poly",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::{q_bracket, q_paren};

    #[test]
    fn evaluate_examples() {
        assert_eq!(PsiSpec::affine(0.5).unwrap().evaluate(2.0), 2.5);
        let osc = PsiSpec::q_oscillator(1.0, 1.2).unwrap();
        let want = q_bracket(3.0, 1.2).unwrap();
        assert!((osc.evaluate(3.0) - want).abs() < 1e-13 * want);
        assert_eq!(PsiSpec::q_bracket(1.2).unwrap().evaluate(0.0), 0.0);
    }

    #[test]
    fn oscillator_parameter_maps_reproduce_q_numbers() {
        let q = 1.2;
        let osc = PsiSpec::q_oscillator(1.0, q).unwrap();
        let unit = PsiSpec::q_oscillator_unit(1.0 / (q - 1.0), q).unwrap();
        for i in -100..=100 {
            let x = i as f64 * 0.1;
            let b = q_bracket(x, q).unwrap();
            let p = q_paren(x, q).unwrap();
            assert!((osc.evaluate(x) - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-15, "x={x}");
            assert!((unit.evaluate(x) - p).abs() <= 1e-12 * p.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn lattice_zero_examples() {
        let x = PsiSpec::affine(0.0).unwrap();
        assert_eq!(x.find_lattice_zeros(-5, 5).zeros, vec![0]);
        let pos = PsiSpec::shifted_exponential(1.0, 2.0).unwrap();
        let z = pos.find_lattice_zeros(-20, 20);
        assert!(z.zeros.is_empty() && !z.off_lattice_sign_change);
        let window = PsiSpec::poly(vec![0.0, 5.0, -1.0]).unwrap();
        assert_eq!(window.find_lattice_zeros(-2, 8).zeros, vec![0, 5]);
    }

    #[test]
    fn lattice_zeros_stable_under_tolerance_halving() {
        let specs = [
            PsiSpec::affine(-2.0).unwrap(),
            PsiSpec::q_bracket(1.2).unwrap(),
            PsiSpec::q_paren(1.5).unwrap(),
            PsiSpec::q_oscillator(1.0, 1.3).unwrap(),
            PsiSpec::poly(vec![0.0, 5.0, -1.0]).unwrap(),
            PsiSpec::poly(vec![0.0, 1.0, 1.0]).unwrap(),
        ];
        for psi in &specs {
            let base = psi.find_lattice_zeros_tol(-50, 50, DEFAULT_ZERO_TOL);
            let mut tol = DEFAULT_ZERO_TOL;
            for _ in 0..10 {
                tol /= 2.0;
                assert_eq!(psi.find_lattice_zeros_tol(-50, 50, tol), base, "{psi:?}");
            }
        }
    }

    #[test]
    fn off_lattice_sign_change_flagged() {
        // zero at 0.5: ψ(0) < 0 < ψ(1)
        let psi = PsiSpec::affine(-0.5).unwrap();
        let z = psi.find_lattice_zeros(-3, 3);
        assert!(z.zeros.is_empty());
        assert!(z.off_lattice_sign_change);
    }

    #[test]
    fn qlinear_structural_zeros() {
        // (q^x - q^-x)/s has its only zero at 0
        assert_eq!(PsiSpec::q_oscillator(1.0, 1.3).unwrap().structural_zeros().unwrap(), vec![0.0]);
        // q^x - 4 with q = 2: zero at 2
        let z = PsiSpec::qlinear(0.0, 1.0, -4.0, 2.0).unwrap().structural_zeros().unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0] - 2.0).abs() < 1e-15);
        // 2^x + 2^-x - 2.5 vanishes at x = ±1
        let z = PsiSpec::qlinear(1.0, 1.0, -2.5, 2.0).unwrap().structural_zeros().unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0] + 1.0).abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
        assert!(PsiSpec::shifted_exponential(1.0, 2.0).unwrap().structural_zeros().unwrap().is_empty());
    }

    #[test]
    fn asymptote_examples() {
        let inv = PsiSpec::q_inverse_power(1.0, 0.5).unwrap();
        assert_eq!(inv.asymptote(Direction::PlusInfinity).unwrap(), f64::INFINITY);
        assert_eq!(inv.asymptote(Direction::MinusInfinity).unwrap(), 0.0);
        let shifted = PsiSpec::shifted_exponential(1.0, 2.0).unwrap();
        assert_eq!(shifted.asymptote(Direction::MinusInfinity).unwrap(), 1.0);
        let aff = PsiSpec::affine(0.3).unwrap();
        assert_eq!(aff.asymptote(Direction::PlusInfinity).unwrap(), f64::INFINITY);
        assert_eq!(aff.asymptote(Direction::MinusInfinity).unwrap(), f64::NEG_INFINITY);
        let paren = PsiSpec::q_paren(1.5).unwrap();
        assert!((paren.asymptote(Direction::MinusInfinity).unwrap() + 2.0).abs() < 1e-15);
        let window = PsiSpec::poly(vec![0.0, 5.0, -1.0]).unwrap();
        assert_eq!(window.asymptote(Direction::PlusInfinity).unwrap(), f64::NEG_INFINITY);
        assert_eq!(window.asymptote(Direction::MinusInfinity).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn validation_errors() {
        assert!(PsiSpec::qlinear(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(PsiSpec::qlinear(0.0, 0.0, 0.0, 2.0).is_err());
        assert!(PsiSpec::exp_poly(vec![0.0, 0.0, 1.0]).is_err());
        assert!(PsiSpec::exp_poly(vec![0.0, -1.0]).is_err());
        assert!(PsiSpec::q_paren(0.9).is_err());
        assert!(PsiSpec::poly(vec![0.0, 0.0]).is_err());
        assert!(PsiSpec::affine(0.0).unwrap().with_mu(1.0).is_err());
        // q < 1 brackets are normalized
        assert_eq!(PsiSpec::q_bracket(0.5).unwrap(), PsiSpec::q_bracket(2.0).unwrap());
    }

    #[test]
    fn reflect_and_shift_agree_with_pointwise_definitions() {
        let specs = [
            PsiSpec::affine(0.7).unwrap(),
            PsiSpec::qlinear(0.3, -0.2, 1.1, 1.4).unwrap(),
            PsiSpec::q_bracket(1.2).unwrap(),
            PsiSpec::q_paren(1.5).unwrap(),
            PsiSpec::poly(vec![1.0, -2.0, 0.5, 0.25]).unwrap(),
        ];
        for psi in &specs {
            let r = psi.reflect().unwrap();
            let s = psi.shift(3).unwrap();
            for i in -30..=30 {
                let x = i as f64 * 0.2;
                let want_r = psi.evaluate(1.0 - x);
                let want_s = psi.evaluate(x + 3.0);
                assert!((r.evaluate(x) - want_r).abs() <= 1e-12 * want_r.abs().max(1.0), "{psi:?}");
                assert!((s.evaluate(x) - want_s).abs() <= 1e-12 * want_s.abs().max(1.0), "{psi:?}");
            }
        }
        let e = PsiSpec::exp_poly(vec![0.1, 0.2, 0.0, 0.3]).unwrap();
        assert!(e.reflect().is_err());
        let es = e.shift(-2).unwrap();
        assert!((es.ln_evaluate(0.5) - e.ln_evaluate(-1.5)).abs() < 1e-13);
    }

    #[test]
    fn exponential_sum_matches_evaluate() {
        for psi in [
            PsiSpec::q_bracket(1.3).unwrap(),
            PsiSpec::q_paren(1.5).unwrap(),
            PsiSpec::qlinear(0.4, 0.6, -0.1, 0.7).unwrap(),
        ] {
            let es = psi.exponential_sum().unwrap();
            for i in -10..=10 {
                let x = i as f64 * 0.37;
                let v: f64 = es.terms.iter().map(|(c, b)| c * b.powf(x)).sum::<f64>() + es.constant;
                assert!((v - psi.evaluate(x)).abs() < 1e-12 * v.abs().max(1.0));
            }
        }
    }
}
