//! Verification harness: truncated matrix representations, moment checks,
//! resolution-of-identity matrix elements and functional-equation residuals.
//!
//! Every check produces a [`CheckEntry`]; an entry passes iff its relative
//! error is at most its tolerance, where the relative error of a check with
//! target 0 is its absolute error.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bargmann::{apply_psi_dilations, atoms, hat_eval, positivity_scan, weight_eval, weight_ln, MellinSolution, WeightKind};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Exec};
use crate::psi::PsiSpec;
use crate::quadrature::mellin_moment;
pub use crate::quadrature::QuadratureConfig;
use crate::repr::{SpectrumDescriptor, SpectrumKind};

/// Interior tolerance of the truncated algebra identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, target: f64, computed: f64, tol: f64) -> Self {
        let abs_err = (computed - target).abs();
        let rel_err = if target == 0.0 { abs_err } else { abs_err / target.abs() };
        CheckEntry {
            name: name.into(),
            target,
            computed,
            abs_err,
            rel_err,
            tol,
            pass: rel_err <= tol,
        }
    }

    /// A residual that is already an error measure (target 0).
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        CheckEntry::new(name, 0.0, residual, tol)
    }

    /// A check that could not be computed.
    pub fn failed(name: impl Into<String>, target: f64, tol: f64) -> Self {
        CheckEntry {
            name: name.into(),
            target,
            computed: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tol,
            pass: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
    /// Echo of the settings the checks ran with.
    pub config: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| !e.pass)
    }

    /// Combine reports; entries are ordered by name so the result does not
    /// depend on the order in which checks finished.
    pub fn merge(reports: impl IntoIterator<Item = VerificationReport>) -> VerificationReport {
        let mut out = VerificationReport::default();
        for r in reports {
            out.entries.extend(r.entries);
            out.config.extend(r.config);
        }
        out.entries.sort_by(|a, b| a.name.cmp(&b.name));
        out.config.sort();
        out.config.dedup();
        out
    }
}

/// Zero-padded index label so that names sort numerically.
pub fn index_label(n: i64) -> String {
    if n < 0 {
        format!("m{:04}", -n)
    } else {
        format!("p{:04}", n)
    }
}

/// Dense matrices of `a`, `a†`, `N` on the basis `|offset⟩ … |offset+dim-1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedRep {
    pub dim: usize,
    pub offset: i64,
    pub a: DMatrix<Complex64>,
    pub a_dag: DMatrix<Complex64>,
    pub n: DMatrix<Complex64>,
    pub psi: PsiSpec,
}

/// Build `a|n⟩ = ψ(μ+n)^{1/2}|n-1⟩`, `a†|n⟩ = ψ(μ+n+1)^{1/2}|n+1⟩`.
///
/// The window is pinned by the spectrum where it has an edge: `offset = ν₋`
/// for Fock spectra and finite windows, `offset = ν₊ - dim + 1` for spectra
/// bounded above; `offset` is used as given otherwise.
pub fn build_truncated_rep(psi: &PsiSpec, spec: &SpectrumDescriptor, dim: usize, offset: i64) -> Result<TruncatedRep> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dim ≥ 1 required".into()));
    }
    let offset = match spec.kind {
        SpectrumKind::LowerBounded { nu_minus } => nu_minus,
        SpectrumKind::UpperBounded { nu_plus } => nu_plus - dim as i64 + 1,
        SpectrumKind::FiniteWindow { nu_minus, nu_plus } => {
            let size = (nu_plus - nu_minus + 1) as usize;
            if dim > size {
                return Err(Error::InvalidParameter(format!(
                    "dim {dim} exceeds the {size}-dimensional representation"
                )));
            }
            nu_minus
        }
        SpectrumKind::FullLine | SpectrumKind::NoUnitaryRep => offset,
    };
    let mu = psi.mu();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(dim, dim, zero);
    let mut n = DMatrix::from_element(dim, dim, zero);
    for i in 0..dim {
        let x = mu + (offset + i as i64) as f64;
        n[(i, i)] = Complex64::new(x, 0.0);
        if i > 0 {
            let v = psi.evaluate(x);
            if v < 0.0 {
                return Err(Error::NegativePsi { at: x, value: v });
            }
            a[(i - 1, i)] = Complex64::new(v.sqrt(), 0.0);
        }
    }
    let a_dag = a.adjoint();
    Ok(TruncatedRep {
        dim,
        offset,
        a,
        a_dag,
        n,
        psi: psi.clone(),
    })
}

impl TruncatedRep {
    fn psi_of_n(&self, shift: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                Complex64::new(self.psi.evaluate(self.n[(i, i)].re + shift), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Index range `[lo, hi)` not touched by a truncation edge: the top edge
    /// is always one, the bottom edge unless ψ vanishes there (a true vacuum).
    fn interior(&self) -> (usize, usize) {
        let bottom_is_vacuum = self.psi.evaluate(self.n[(0, 0)].re) == 0.0;
        (if bottom_is_vacuum { 0 } else { 1 }, self.dim.saturating_sub(1))
    }

    fn identities(&self) -> [(&'static str, DMatrix<Complex64>, DMatrix<Complex64>); 4] {
        let (a, ad, n) = (&self.a, &self.a_dag, &self.n);
        [
            ("comm_a_n", a * n - n * a, a.clone()),
            ("comm_adag_n", ad * n - n * ad, -ad.clone()),
            ("adag_a", ad * a, self.psi_of_n(0.0)),
            ("a_adag", a * ad, self.psi_of_n(1.0)),
        ]
    }
}

fn max_scaled_residual(lhs: &DMatrix<Complex64>, rhs: &DMatrix<Complex64>, rows: (usize, usize)) -> f64 {
    let mut worst: f64 = 0.0;
    for i in rows.0..rows.1 {
        for j in rows.0..rows.1 {
            let r = (lhs[(i, j)] - rhs[(i, j)]).norm() / rhs[(i, j)].norm().max(1.0);
            worst = worst.max(r);
        }
    }
    worst
}

/// Interior residuals of `[a,N] = a`, `[a†,N] = -a†`, `a†a = ψ(N)`,
/// `aa† = ψ(N+1)`, each entry scaled by `max(1, |target|)`.
pub fn algebra_residuals(rep: &TruncatedRep) -> VerificationReport {
    let interior = rep.interior();
    let mut report = VerificationReport::default();
    for (name, lhs, rhs) in rep.identities() {
        let r = max_scaled_residual(&lhs, &rhs, interior);
        report.push(CheckEntry::residual(format!("algebra.{name}"), r, ALGEBRA_TOL));
    }
    report.config.push(("dim".into(), rep.dim.to_string()));
    report.config.push(("offset".into(), rep.offset.to_string()));
    report
}

/// The same residuals over the full matrices, edges included.
pub fn algebra_residuals_full(rep: &TruncatedRep) -> [(&'static str, f64); 4] {
    rep.identities()
        .map(|(name, lhs, rhs)| (name, max_scaled_residual(&lhs, &rhs, (0, rep.dim))))
}

fn moment_value(sol: &MellinSolution, n: i64, quad: &QuadratureConfig) -> Result<f64> {
    match &sol.weight_kind {
        WeightKind::AtomicMeasure { .. } => {
            let (x, w) = atoms(sol).expect("atomic");
            let terms: Vec<f64> = x.iter().zip(w).map(|(xk, wk)| wk * xk.powi(n as i32)).collect();
            Ok(pairwise_sum(&terms))
        }
        WeightKind::Unavailable(v) => Err(Error::InversionInfeasible(format!("{v:?}"))),
        WeightKind::NumericDensity(grid) => {
            // only the sampled window carries mass; samples at or below zero
            // are inversion noise in the tails
            let ln_f = |x: f64| match grid.interpolate(x.ln()) {
                Some(v) if v > 0.0 => v.ln(),
                _ => f64::NEG_INFINITY,
            };
            Ok(mellin_moment(ln_f, n as f64 + 1.0, quad)?.value())
        }
        WeightKind::Density(_) => {
            let ln_f = |x: f64| weight_ln(sol, x).unwrap_or(f64::NAN);
            Ok(mellin_moment(ln_f, n as f64 + 1.0, quad)?.value())
        }
    }
}

/// `∫ xⁿ F(x) dx` (or `Σ wₖ xₖⁿ`) against `ψ(n)!` of the solution's frame.
pub fn moment_check(
    sol: &MellinSolution,
    n_range: RangeInclusive<i64>,
    quad: &QuadratureConfig,
    tol: f64,
) -> Result<VerificationReport> {
    if let Some(n) = n_range.clone().find(|&n| !sol.moment_range_allowed(n)) {
        return Err(Error::InvalidParameter(format!(
            "moment n = {n} lies outside the spectrum; negative moments need a two-sided spectrum"
        )));
    }
    let ns: Vec<i64> = n_range.collect();
    let computed = quad.exec.map(&ns, |&n| moment_value(sol, n, quad));
    let mut report = VerificationReport::default();
    for (n, value) in ns.iter().zip(computed) {
        let target = sol.moment_target(*n)?;
        report.push(CheckEntry::new(format!("moment.{}", index_label(*n)), target, value?, tol));
    }
    report.config.push(("quad_rel_tol".into(), format!("{:e}", quad.rel_tol)));
    Ok(report)
}

/// `⟨m| ∫ F(|z|²) |z̄⟩⟨z̄| d²z/π |n⟩`: zero for `m ≠ n` by the angular
/// integral, `∫ xⁿ F / ψ(n)!` on the diagonal.
pub fn resolution_identity_check(sol: &MellinSolution, m: i64, n: i64, quad: &QuadratureConfig) -> Result<f64> {
    if !sol.moment_range_allowed(m) || !sol.moment_range_allowed(n) {
        return Err(Error::InvalidParameter(format!("({m}, {n}) outside the spectrum")));
    }
    if m != n {
        return Ok(0.0);
    }
    Ok(moment_value(sol, n, quad)? / sol.moment_target(n)?)
}

/// `|x F(x) - [ψ(-x d/dx) F](x)|` with ψ acting through exact dilations.
pub fn weight_ode_residual(sol: &MellinSolution, x: f64) -> Result<f64> {
    let lhs = x * weight_eval(sol, x)?;
    let rhs = apply_psi_dilations(sol, x)?;
    Ok((lhs - rhs).abs())
}

/// `|F̂(ρ+1) - ψ(ρ)F̂(ρ)| / |F̂(ρ+1)|` at each ρ.
pub fn recursion_check(sol: &MellinSolution, rhos: &[Complex64], tol: f64) -> VerificationReport {
    let mut report = VerificationReport::default();
    for (i, rho) in rhos.iter().enumerate() {
        let name = format!("recursion.{}", index_label(i as i64));
        let entry = match (hat_eval(sol, *rho + 1.0), hat_eval(sol, *rho)) {
            (Ok(next), Ok(cur)) => {
                let psi = sol.frame_psi.evaluate_complex(*rho);
                CheckEntry::residual(name, (next - psi * cur).norm() / next.norm(), tol)
            }
            _ => CheckEntry::failed(name, 0.0, tol),
        };
        report.push(entry);
    }
    let one = hat_eval(sol, Complex64::new(1.0, 0.0)).map(|v| v.re).unwrap_or(f64::NAN);
    report.push(CheckEntry::new("recursion.normalization", 1.0, one, 1e-14));
    report
}

/// `min F ≥ -1e-12` on `grid`.
pub fn positivity_check(sol: &MellinSolution, grid: &[f64], exec: Exec) -> CheckEntry {
    match positivity_scan(sol, grid, exec) {
        Ok((min, _)) => CheckEntry {
            name: "positivity.min".into(),
            target: 0.0,
            computed: min,
            abs_err: (-min).max(0.0),
            rel_err: (-min).max(0.0),
            tol: 1e-12,
            pass: min >= -1e-12,
        },
        Err(_) => CheckEntry::failed("positivity.min", 0.0, 1e-12),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bargmann::solve_mellin;
    use crate::repr::classify;

    fn rep(psi: PsiSpec, dim: usize, offset: i64) -> TruncatedRep {
        let spec = classify(&psi).unwrap();
        build_truncated_rep(&psi, &spec, dim, offset).unwrap()
    }

    #[test]
    fn oscillator_matrices() {
        let r = rep(PsiSpec::affine(0.0).unwrap(), 3, 0);
        assert_eq!(r.a[(0, 1)].re, 1.0);
        assert_eq!(r.a[(1, 2)].re, 2f64.sqrt());
        assert_eq!(r.a_dag, r.a.adjoint());
        let b = rep(PsiSpec::q_bracket(1.2).unwrap(), 3, 0);
        assert!((b.a[(1, 2)].re - crate::qspecial::q_bracket(2.0, 1.2).unwrap().sqrt()).abs() < 1e-15);
        let w = rep(PsiSpec::q_inverse_power(1.0, 0.5).unwrap(), 5, -2);
        assert_eq!(w.offset, -2);
        assert_eq!(w.n[(0, 0)].re, -2.0);
        assert!((w.a[(0, 1)].re - 0.5f64.powi(1).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interior_exactness() {
        let cases = [
            (PsiSpec::affine(0.0).unwrap(), 10, 0),
            (PsiSpec::q_bracket(1.2).unwrap(), 20, 0),
            (PsiSpec::shifted_exponential(1.0, 2.0).unwrap(), 30, -15),
            (PsiSpec::q_paren(1.5).unwrap(), 200, 0),
            (PsiSpec::q_inverse_power(1.0, 0.5).unwrap(), 30, -15),
        ];
        for (psi, dim, offset) in cases {
            let r = rep(psi.clone(), dim, offset);
            let report = algebra_residuals(&r);
            assert!(report.passed(), "{psi:?}: {:?}", report.first_failure());
        }
    }

    #[test]
    fn truncation_edges_carry_the_error() {
        let r = rep(PsiSpec::q_bracket(1.2).unwrap(), 20, 0);
        let full = algebra_residuals_full(&r);
        assert!(full[3].1 > 0.5, "aa† - ψ(N+1) at the top edge");
        let w = rep(PsiSpec::shifted_exponential(1.0, 2.0).unwrap(), 30, -15);
        let full = algebra_residuals_full(&w);
        assert!(full[2].1 > 0.5 && full[3].1 > 0.5);
    }

    #[test]
    fn window_checks() {
        let psi = PsiSpec::poly(vec![0.0, 5.0, -1.0]).unwrap();
        let spec = classify(&psi).unwrap();
        assert!(build_truncated_rep(&psi, &spec, 6, 0).is_err());
        let r = build_truncated_rep(&psi, &spec, 5, 0).unwrap();
        // finite window: both algebra relations exact away from the top
        assert!(algebra_residuals(&r).passed());
    }

    #[test]
    fn negative_psi_is_reported() {
        let psi = PsiSpec::affine(0.5).unwrap();
        let spec = classify(&psi).unwrap();
        assert!(matches!(
            build_truncated_rep(&psi, &spec, 4, -3),
            Err(Error::NegativePsi { .. })
        ));
    }

    #[test]
    fn gamma_moments_and_identity() {
        let sol = solve_mellin(&PsiSpec::affine(0.0).unwrap()).unwrap();
        let quad = QuadratureConfig::default();
        let report = moment_check(&sol, 0..=12, &quad, 1e-8).unwrap();
        assert!(report.passed(), "{:?}", report.first_failure());
        assert_eq!(resolution_identity_check(&sol, 0, 1, &quad).unwrap(), 0.0);
        let d = resolution_identity_check(&sol, 3, 3, &quad).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
        let m3 = moment_check(&sol, 3..=3, &quad, 1e-8).unwrap().entries[0].computed / 6.0;
        assert!((m3 - d).abs() < 1e-8);
    }

    #[test]
    fn negative_moments_need_two_sided_spectrum() {
        let sol = solve_mellin(&PsiSpec::affine(0.0).unwrap()).unwrap();
        assert!(moment_check(&sol, -1..=2, &QuadratureConfig::default(), 1e-8).is_err());
        let sol = solve_mellin(&PsiSpec::q_inverse_power(1.0, 0.5).unwrap()).unwrap();
        let r = moment_check(&sol, -5..=5, &QuadratureConfig::default(), 1e-8).unwrap();
        assert!(r.passed(), "{:?}", r.first_failure());
    }

    #[test]
    fn duality_of_moments() {
        // ψ = q^{-x} with q = 2 is only a†-coherent; its moments are those of
        // the reflected partner 2^{x-1}
        let quad = QuadratureConfig::default();
        let dual = solve_mellin(&PsiSpec::q_inverse_power(1.0, 2.0).unwrap()).unwrap();
        let partner = solve_mellin(&PsiSpec::q_inverse_power(0.5, 0.5).unwrap()).unwrap();
        let a = moment_check(&dual, -4..=4, &quad, 1e-9).unwrap();
        let b = moment_check(&partner, -4..=4, &quad, 1e-9).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((x.computed - y.computed).abs() <= 1e-9 * y.computed);
            assert!(x.pass && y.pass);
        }
    }

    #[test]
    fn ode_residual_examples() {
        let paren = solve_mellin(&PsiSpec::q_paren(1.5).unwrap()).unwrap();
        assert!(weight_ode_residual(&paren, 0.3).unwrap() <= 1e-10);
        let bracket = solve_mellin(&PsiSpec::q_bracket(1.2).unwrap()).unwrap();
        assert!(weight_ode_residual(&bracket, 1.0).unwrap() <= 1e-8);
        // x → 0⁺: F(0) is finite for the paren weight
        assert!(weight_ode_residual(&paren, 1e-9).unwrap() < 1e-12);
        let numeric = solve_mellin(&PsiSpec::exp_poly(vec![0.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(weight_ode_residual(&numeric, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn merge_orders_by_name() {
        let mut a = VerificationReport::default();
        a.push(CheckEntry::residual("b", 0.0, 1.0));
        let mut b = VerificationReport::default();
        b.push(CheckEntry::residual("a", 2.0, 1.0));
        let m = VerificationReport::merge([a, b]);
        assert_eq!(m.entries[0].name, "a");
        assert_eq!(m.first_failure().unwrap().name, "a");
        assert_eq!(index_label(-3), "m0003");
    }
}
