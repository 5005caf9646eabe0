//! Coherent states `a|z⟩ = z|z⟩`, their norms, and the overlap kernel
//! `G(z̄ζ) = ⟨z|ζ⟩`.
//!
//! Coefficients are `c_n = z^{n-b} / (ψ(μ+n)!)^{1/2}` with the factorial taken
//! relative to a base index `b`: `b = ν₋` for Fock-type spectra with `ν₋ ≥ 0`
//! (the lowest state is then `c_{ν₋} = 1`) and `b = 0` otherwise, which
//! reproduces both branches of the two-part expansion through the reciprocal
//! convention for negative factorials.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::pairwise_sum;
use crate::psi::{Direction, PsiSpec};
use crate::repr::{coherent_domain, Ladder, SpectrumDescriptor, SpectrumKind};

const TERM_CAP: usize = 1_000_000;
/// Consecutive growing terms before a branch is declared divergent.
const DIVERGENCE_RUN: usize = 50;

/// Index set of the spectrum as seen by the coherent-state expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexFrame {
    pub base: i64,
    /// Lowest index, `None` for a spectrum unbounded below.
    pub lowest: Option<i64>,
}

impl IndexFrame {
    pub fn for_spectrum(spec: &SpectrumDescriptor) -> Result<Self> {
        match spec.kind {
            SpectrumKind::LowerBounded { nu_minus } if nu_minus >= 0 => Ok(IndexFrame {
                base: nu_minus,
                lowest: Some(nu_minus),
            }),
            SpectrumKind::LowerBounded { nu_minus } => Ok(IndexFrame {
                base: 0,
                lowest: Some(nu_minus),
            }),
            SpectrumKind::FullLine => Ok(IndexFrame { base: 0, lowest: None }),
            SpectrumKind::UpperBounded { .. } => Err(Error::Unsupported(
                "eigenvectors of a† only: reflect psi to obtain the dual a-side".into(),
            )),
            SpectrumKind::FiniteWindow { .. } | SpectrumKind::NoUnitaryRep => Err(Error::NoCoherentStates(
                "a and a† have no eigenvectors on this spectrum".into(),
            )),
        }
    }
}

/// A truncated coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub coefficients: Vec<(i64, Complex64)>,
    pub z: Complex64,
    pub truncation: (i64, i64),
    /// Bound on the squared norm of the dropped coefficients.
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSquared {
    pub value: f64,
    pub converged: bool,
    pub truncation: (i64, i64),
    pub tail_bound: f64,
}

/// Terms `t_n = r^{n-b} / ψ(μ+n)!` of one series, in log form.
struct Walk {
    lo: i64,
    ln_terms: Vec<f64>,
    converged: bool,
    tail_bound: f64,
}

fn ln_psi(psi: &PsiSpec, x: f64) -> Result<f64> {
    let v = psi.evaluate(x);
    // ψ may underflow to 0 while its logarithm is still representable
    let ln = psi.ln_evaluate(x);
    if v > 0.0 || (psi.sign(x) > 0.0 && ln.is_finite()) {
        Ok(ln)
    } else {
        Err(Error::NegativePsi { at: x, value: v })
    }
}

fn walk(psi: &PsiSpec, frame: IndexFrame, ln_r: f64, tol: f64) -> Result<Walk> {
    let mu = psi.mu();
    let downward = frame.lowest.map_or(true, |lo| lo < frame.base);
    let budget = if downward { tol / 2.0 } else { tol };
    let mut converged = true;
    let mut tail = 0.0;

    // upward: t_{n+1} = t_n · r / ψ(μ+n+1)
    let limit_up = psi.asymptote(Direction::PlusInfinity)?;
    let mut up = vec![0.0];
    let mut n = frame.base;
    let mut growing = 0;
    loop {
        if up.len() > TERM_CAP {
            return Err(Error::NonConvergence { terms: TERM_CAP });
        }
        let ln_t = *up.last().unwrap();
        if ln_r == f64::NEG_INFINITY {
            break;
        }
        let next = ln_t + ln_r - ln_psi(psi, mu + (n + 1) as f64)?;
        up.push(next);
        n += 1;
        growing = if next > ln_t { growing + 1 } else { 0 };
        if growing >= DIVERGENCE_RUN && ln_r.exp() >= limit_up {
            converged = false;
            break;
        }
        let psi_next = psi.evaluate(mu + (n + 1) as f64);
        let ratio = ln_r.exp() / psi_next;
        if ratio < 1.0 && psi_next >= psi.evaluate(mu + n as f64) {
            let bound = next.exp() * ratio / (1.0 - ratio);
            if bound <= budget {
                tail += bound;
                break;
            }
        }
    }

    // downward: t_{n-1} = t_n · ψ(μ+n) / r
    let mut down: Vec<f64> = Vec::new();
    if downward {
        let limit_down = psi.asymptote(Direction::MinusInfinity)?;
        let mut n = frame.base;
        let mut ln_t = 0.0;
        let mut growing = 0;
        loop {
            if let Some(lo) = frame.lowest {
                if n == lo {
                    break;
                }
            }
            if down.len() > TERM_CAP {
                return Err(Error::NonConvergence { terms: TERM_CAP });
            }
            let next = ln_t + ln_psi(psi, mu + n as f64)? - ln_r;
            down.push(next);
            n -= 1;
            growing = if next > ln_t { growing + 1 } else { 0 };
            ln_t = next;
            if next == f64::INFINITY {
                converged = false;
                break;
            }
            if frame.lowest.is_none() {
                if growing >= DIVERGENCE_RUN && limit_down >= ln_r.exp() {
                    converged = false;
                    break;
                }
                let psi_next = psi.evaluate(mu + n as f64);
                let ratio = psi_next / ln_r.exp();
                if ratio < 1.0 && psi_next <= psi.evaluate(mu + (n + 1) as f64) {
                    let bound = next.exp() * ratio / (1.0 - ratio);
                    if bound <= budget {
                        tail += bound;
                        break;
                    }
                }
            }
        }
    }

    let lo = frame.base - down.len() as i64;
    let mut ln_terms: Vec<f64> = down.into_iter().rev().collect();
    ln_terms.extend(up);
    Ok(Walk {
        lo,
        ln_terms,
        converged,
        tail_bound: if converged { tail } else { f64::INFINITY },
    })
}

fn require_a_ladder(psi: &PsiSpec, spec: &SpectrumDescriptor) -> Result<crate::repr::CoherentDomain> {
    let domain = coherent_domain(psi, spec)?;
    match domain.ladder {
        Ladder::A => Ok(domain),
        Ladder::ADagger => Err(Error::Unsupported(
            "eigenvectors of a† only: reflect psi to obtain the dual a-side".into(),
        )),
        Ladder::None => Err(Error::NoCoherentStates("empty coherent-state domain".into())),
    }
}

/// Coefficients of `|z⟩`, truncated so that the dropped norm² is at most `tol`.
pub fn coherent_coefficients(
    psi: &PsiSpec,
    spec: &SpectrumDescriptor,
    z: Complex64,
    tol: f64,
) -> Result<CoherentState> {
    let domain = require_a_ladder(psi, spec)?;
    let frame = IndexFrame::for_spectrum(spec)?;
    let r2 = z.norm_sqr();
    let origin_ok = r2 == 0.0 && frame.lowest == Some(frame.base);
    if !(origin_ok || (r2 > domain.inner_r2 && r2 < domain.outer_r2)) {
        return Err(Error::OutOfDomain {
            r2,
            inner: domain.inner_r2,
            outer: domain.outer_r2,
        });
    }
    let w = walk(psi, frame, r2.ln(), tol)?;
    if !w.converged {
        return Err(Error::NonConvergence { terms: w.ln_terms.len() });
    }
    let theta = z.arg();
    let coefficients: Vec<(i64, Complex64)> = w
        .ln_terms
        .iter()
        .enumerate()
        .map(|(i, lt)| {
            let n = w.lo + i as i64;
            (n, Complex64::from_polar((0.5 * lt).exp(), (n - frame.base) as f64 * theta))
        })
        .collect();
    let hi = w.lo + w.ln_terms.len() as i64 - 1;
    Ok(CoherentState {
        coefficients,
        z,
        truncation: (w.lo, hi),
        tail_bound: w.tail_bound,
    })
}

/// `Σ |c_n|²` at `|z|² = r2`. Divergence is reported through `converged`.
///
/// For a lower-bounded spectrum with `ν₋ < 0` the expansion carries negative
/// powers of `z`, so `r2 = 0` diverges there.
pub fn norm_squared(psi: &PsiSpec, spec: &SpectrumDescriptor, r2: f64, tol: f64) -> Result<NormSquared> {
    if !(r2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("r2 ≥ 0 required, got {r2}")));
    }
    require_a_ladder(psi, spec)?;
    let frame = IndexFrame::for_spectrum(spec)?;
    let w = walk(psi, frame, r2.ln(), tol)?;
    let terms: Vec<f64> = w.ln_terms.iter().map(|l| l.exp()).collect();
    Ok(NormSquared {
        value: pairwise_sum(&terms),
        converged: w.converged,
        truncation: (w.lo, w.lo + terms.len() as i64 - 1),
        tail_bound: w.tail_bound,
    })
}

/// Reproducing kernel `G(u) = Σ_n u^{n-b} / ψ(μ+n)!`.
pub fn kernel_g(psi: &PsiSpec, spec: &SpectrumDescriptor, u: Complex64, tol: f64) -> Result<Complex64> {
    let domain = require_a_ladder(psi, spec)?;
    let frame = IndexFrame::for_spectrum(spec)?;
    let r = u.norm();
    let origin_ok = r == 0.0 && frame.lowest == Some(frame.base);
    if !(origin_ok || (r > domain.inner_r2 && r < domain.outer_r2)) {
        return Err(Error::OutOfDomain {
            r2: r,
            inner: domain.inner_r2,
            outer: domain.outer_r2,
        });
    }
    let w = walk(psi, frame, r.ln(), tol)?;
    if !w.converged {
        return Err(Error::NonConvergence { terms: w.ln_terms.len() });
    }
    let theta = u.arg();
    let terms: Vec<Complex64> = w
        .ln_terms
        .iter()
        .enumerate()
        .map(|(i, lt)| Complex64::from_polar(lt.exp(), (w.lo + i as i64 - frame.base) as f64 * theta))
        .collect();
    let re: Vec<f64> = terms.iter().map(|t| t.re).collect();
    let im: Vec<f64> = terms.iter().map(|t| t.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)))
}

/// `|u·G(u) - ψ(u d/du) G(u)|` on the truncated series with `n_terms` terms per
/// branch, `ψ(u d/du)` acting on each monomial through its index.
pub fn kernel_residual(psi: &PsiSpec, spec: &SpectrumDescriptor, u: f64, n_terms: usize) -> Result<f64> {
    require_a_ladder(psi, spec)?;
    let frame = IndexFrame::for_spectrum(spec)?;
    let mu = psi.mu();
    let lo = match frame.lowest {
        Some(lo) => lo.max(frame.base - n_terms as i64),
        None => frame.base - n_terms as i64,
    };
    let hi = frame.base + n_terms as i64 - 1;
    let ln_u = u.ln();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for n in lo..=hi {
        let ln_g = -relative_ln_factorial(psi, frame.base, n)?;
        let m = (n - frame.base) as f64;
        lhs.push((ln_g + (m + 1.0) * ln_u).exp());
        let x = mu + n as f64;
        // ψ vanishes at a Fock vacuum
        if psi.sign(x) != 0.0 {
            rhs.push((ln_psi(psi, x)? + ln_g + m * ln_u).exp());
        }
    }
    Ok((pairwise_sum(&lhs) - pairwise_sum(&rhs)).abs())
}

/// `ln ψ(μ+n)!` relative to `base`.
fn relative_ln_factorial(psi: &PsiSpec, base: i64, n: i64) -> Result<f64> {
    let mu = psi.mu();
    if n >= base {
        ((base + 1)..=n).map(|k| ln_psi(psi, mu + k as f64)).sum()
    } else {
        let s: Result<f64> = ((n + 1)..=base).map(|k| ln_psi(psi, mu + k as f64)).sum();
        s.map(|v| -v)
    }
}

/// `⟨w|ζ⟩` on the common index range of two truncated states.
pub fn inner_product(bra: &CoherentState, ket: &CoherentState) -> Complex64 {
    let lo = bra.truncation.0.max(ket.truncation.0);
    let hi = bra.truncation.1.min(ket.truncation.1);
    let mut re = Vec::new();
    let mut im = Vec::new();
    for n in lo..=hi {
        let a = bra.coefficients[(n - bra.truncation.0) as usize].1;
        let b = ket.coefficients[(n - ket.truncation.0) as usize].1;
        let p = a.conj() * b;
        re.push(p.re);
        im.push(p.im);
    }
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Norm of `a|z⟩ - z|z⟩` on a truncated state, split into the part coming from
/// interior indices and the part injected at the truncation edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenResidual {
    pub interior: f64,
    pub boundary: f64,
}

pub fn eigen_residual(psi: &PsiSpec, state: &CoherentState) -> EigenResidual {
    let mu = psi.mu();
    let (lo, hi) = state.truncation;
    let c = |n: i64| state.coefficients[(n - lo) as usize].1;
    let mut interior = 0.0;
    for n in (lo + 1)..=hi {
        let lowered = c(n) * psi.evaluate(mu + n as f64).max(0.0).sqrt();
        interior += (lowered - state.z * c(n - 1)).norm_sqr();
    }
    let top = (state.z * c(hi)).norm_sqr();
    let bottom = psi.evaluate(mu + lo as f64).max(0.0) * c(lo).norm_sqr();
    EigenResidual {
        interior: interior.sqrt(),
        boundary: (top + bottom).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::classify;
    use std::f64::consts::E;

    fn setup(psi: PsiSpec) -> (PsiSpec, SpectrumDescriptor) {
        let spec = classify(&psi).unwrap();
        (psi, spec)
    }

    #[test]
    fn vacuum_at_origin() {
        let (psi, spec) = setup(PsiSpec::affine(0.0).unwrap());
        let st = coherent_coefficients(&psi, &spec, Complex64::new(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(st.coefficients[0], (0, Complex64::new(1.0, 0.0)));
        assert!(st.coefficients[1..].iter().all(|(_, c)| c.norm() == 0.0));
    }

    #[test]
    fn classical_coefficients() {
        let (psi, spec) = setup(PsiSpec::affine(0.0).unwrap());
        let st = coherent_coefficients(&psi, &spec, Complex64::new(1.0, 0.0), 1e-15).unwrap();
        let mut fact = 1.0;
        for (n, c) in &st.coefficients {
            if *n > 0 {
                fact *= *n as f64;
            }
            assert!((c.re - 1.0 / fact.sqrt()).abs() < 1e-15 && c.im == 0.0);
        }
        assert!(st.tail_bound <= 1e-15);
    }

    #[test]
    fn full_line_coefficients() {
        // ψ = q^{-x}, q = 1/2: ψ(n)! = q^{-n(n+1)/2} for every integer n
        let q: f64 = 0.5;
        let (psi, spec) = setup(PsiSpec::q_inverse_power(1.0, q).unwrap());
        let st = coherent_coefficients(&psi, &spec, Complex64::new(1.0, 0.0), 1e-14).unwrap();
        assert!(st.truncation.0 < -3 && st.truncation.1 > 3);
        for (n, c) in &st.coefficients {
            let nf = *n as f64;
            let want = q.powf(nf * (nf + 1.0) / 4.0);
            assert!((c.re - want).abs() <= 1e-13 * want, "n={n}: {} vs {want}", c.re);
        }
    }

    #[test]
    fn norm_examples() {
        let (psi, spec) = setup(PsiSpec::affine(0.0).unwrap());
        let n = norm_squared(&psi, &spec, 1.0, 1e-15).unwrap();
        assert!(n.converged);
        assert!((n.value - E).abs() < 1e-14);
        for psi in [PsiSpec::q_bracket(1.2).unwrap(), PsiSpec::q_paren(1.5).unwrap()] {
            let (psi, spec) = setup(psi);
            let n = norm_squared(&psi, &spec, 0.0, 1e-15).unwrap();
            assert!(n.converged && n.value == 1.0);
        }
        let (psi, spec) = setup(PsiSpec::shifted_exponential(1.0, 2.0).unwrap());
        let n = norm_squared(&psi, &spec, 0.5, 1e-12).unwrap();
        assert!(!n.converged);
        let n = norm_squared(&psi, &spec, 3.0, 1e-12).unwrap();
        assert!(n.converged);
    }

    #[test]
    fn norm_diverges_outside_bounded_disk() {
        // 1 - 2^{-x}: Fock spectrum with |z|² < 1
        let (psi, spec) = setup(PsiSpec::qlinear(-1.0, 0.0, 1.0, 2.0).unwrap());
        assert_eq!(spec.kind, SpectrumKind::LowerBounded { nu_minus: 0 });
        assert!(norm_squared(&psi, &spec, 0.9, 1e-12).unwrap().converged);
        assert!(!norm_squared(&psi, &spec, 2.0, 1e-12).unwrap().converged);
        assert!(matches!(
            coherent_coefficients(&psi, &spec, Complex64::new(1.5, 0.0), 1e-12),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn norm_nondecreasing_in_r2() {
        for psi in [PsiSpec::q_bracket(1.2).unwrap(), PsiSpec::affine(0.0).unwrap(), PsiSpec::q_paren(1.5).unwrap()] {
            let (psi, spec) = setup(psi);
            let mut prev = 0.0;
            for i in 0..60 {
                let r2 = i as f64 * 0.5;
                let v = norm_squared(&psi, &spec, r2, 1e-13).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let (psi, spec) = setup(PsiSpec::affine(0.0).unwrap());
        let g = kernel_g(&psi, &spec, Complex64::new(1.0, 0.0), 1e-16).unwrap();
        assert!((g.re - E).abs() < 1e-15 && g.im == 0.0);
        let (b, bspec) = setup(PsiSpec::q_bracket(1.2).unwrap());
        assert_eq!(kernel_g(&b, &bspec, Complex64::new(0.0, 0.0), 1e-16).unwrap(), Complex64::new(1.0, 0.0));
        // brute force Σ 1/[n]!
        let q: f64 = 1.2;
        let mut want = 0.0;
        let mut fact = 1.0;
        for n in 0..80 {
            if n > 0 {
                fact *= (q.powi(n) - q.powi(-n)) / (q - 1.0 / q);
            }
            want += 1.0 / fact;
        }
        let g = kernel_g(&b, &bspec, Complex64::new(1.0, 0.0), 1e-16).unwrap();
        assert!((g.re - want).abs() < 1e-14);
        let e = crate::qspecial::exp_q(1.0, q, crate::qspecial::ExpVariant::Bracket).unwrap();
        assert!((g.re - e).abs() < 1e-14);
    }

    #[test]
    fn kernel_residual_examples() {
        let (psi, spec) = setup(PsiSpec::affine(0.0).unwrap());
        assert!(kernel_residual(&psi, &spec, 1.0, 30).unwrap() <= 1e-12);
        let (b, bspec) = setup(PsiSpec::q_bracket(1.2).unwrap());
        assert!(kernel_residual(&b, &bspec, 2.0, 40).unwrap() <= 1e-10);
        let small = kernel_residual(&b, &bspec, 1e-8, 10).unwrap();
        assert!(small < 1e-20);
        // full line: the only unpaired terms sit at the two truncation edges
        let (l, lspec) = setup(PsiSpec::q_inverse_power(1.0, 0.5).unwrap());
        assert!(kernel_residual(&l, &lspec, 1.0, 20).unwrap() <= 1e-12);
        // vacuum above index 0: factorials are taken relative to it
        let (s, sspec) = setup(PsiSpec::affine(-2.0).unwrap());
        assert!(kernel_residual(&s, &sspec, 1.5, 40).unwrap() <= 1e-12);
        // ψ over/underflows far out on both branches
        let (c, cspec) = setup(PsiSpec::exp_poly(vec![0.0, 0.5, 0.0, 0.01]).unwrap());
        let r = kernel_residual(&c, &cspec, 1.0, 200).unwrap();
        assert!(r.is_finite() && r <= 1e-12, "{r}");
    }

    #[test]
    fn kernel_equals_inner_product() {
        let (psi, spec) = setup(PsiSpec::q_bracket(1.2).unwrap());
        let w = Complex64::new(0.7, -0.4);
        let zeta = Complex64::new(-0.3, 1.1);
        let sw = coherent_coefficients(&psi, &spec, w, 1e-16).unwrap();
        let sz = coherent_coefficients(&psi, &spec, zeta, 1e-16).unwrap();
        let ip = inner_product(&sw, &sz);
        let g = kernel_g(&psi, &spec, w.conj() * zeta, 1e-16).unwrap();
        assert!((ip - g).norm() < 1e-13);
    }

    #[test]
    fn eigenvector_property() {
        let cases = [
            (PsiSpec::affine(0.0).unwrap(), Complex64::new(0.8, 0.6)),
            (PsiSpec::q_bracket(1.2).unwrap(), Complex64::new(1.5, -0.5)),
            (PsiSpec::q_paren(1.5).unwrap(), Complex64::new(-2.0, 0.3)),
            (PsiSpec::q_inverse_power(1.0, 0.5).unwrap(), Complex64::new(0.9, 0.2)),
            (PsiSpec::shifted_exponential(1.0, 2.0).unwrap(), Complex64::new(1.1, 1.0)),
            (PsiSpec::affine(3.0).unwrap(), Complex64::new(0.5, 0.5)),
        ];
        for (psi, z) in cases {
            let spec = classify(&psi).unwrap();
            let st = coherent_coefficients(&psi, &spec, z, 1e-14).unwrap();
            let res = eigen_residual(&psi, &st);
            assert!(res.interior <= 1e-12, "{psi:?}: {res:?}");
            assert!(res.boundary <= 1e-6, "{psi:?}: {res:?}");
        }
    }

    #[test]
    fn negative_lowest_index_uses_two_part_expansion() {
        // ψ = x + 2: ν₋ = -2, c_{-1} = z^{-1} ψ(0)^{1/2}, c_{-2} = z^{-2} (ψ(-1)ψ(0))^{1/2}
        let (psi, spec) = setup(PsiSpec::affine(2.0).unwrap());
        let z = Complex64::new(0.5, 0.0);
        let st = coherent_coefficients(&psi, &spec, z, 1e-14).unwrap();
        assert_eq!(st.truncation.0, -2);
        assert!((st.coefficients[0].1.re - 4.0 * 2f64.sqrt()).abs() < 1e-13);
        assert!((st.coefficients[1].1.re - 2.0 * 2f64.sqrt()).abs() < 1e-13);
        assert!((st.coefficients[2].1.re - 1.0).abs() < 1e-15);
        assert!(!norm_squared(&psi, &spec, 0.0, 1e-12).unwrap().converged);
    }

    #[test]
    fn dagger_side_is_rejected() {
        let (psi, spec) = setup(PsiSpec::q_inverse_power(1.0, 2.0).unwrap());
        assert!(matches!(
            coherent_coefficients(&psi, &spec, Complex64::new(1.0, 0.0), 1e-12),
            Err(Error::Unsupported(_))
        ));
    }
}
