//! The six pipelines behind the subcommands.

use dbarg_core::bargmann::{
    default_contour, default_probes, inversion_feasibility, log_grid, weight_eval, DensityTag,
    Feasibility, MellinSolution, WeightKind,
};
use dbarg_core::coherent::{coherent_coefficients, IndexFrame, eigen_residual, kernel_g, kernel_residual, norm_squared};
use dbarg_core::verify::{
    algebra_residuals, build_truncated_rep, index_label, moment_check, positivity_check, recursion_check,
    resolution_identity_check, weight_ode_residual, CheckEntry,
};
use dbarg_core::{
    classify, coherent_domain, solve_mellin, CoherentDomain, Error, Exec, Ladder, PsiSpec, QuadratureConfig,
    SpectrumDescriptor, SpectrumKind,
};
use num_complex::Complex64;

use crate::config::{Command, ParamValue, RunConfig};
use crate::report::{
    CheckReport, DomainReport, Fixed64, KernelReport, PsiReport, Report, Settings, SpectrumReport, Table,
    WeightReport,
};

/// Default tolerances; `--tol` replaces all of them except the algebra and
/// normalization checks, which test exact identities.
const MOMENT_TOL: f64 = 1e-8;
const NUMERIC_MOMENT_TOL: f64 = 1e-6;
const RECURSION_TOL: f64 = 1e-10;
const ODE_TOL: f64 = 1e-8;
const KERNEL_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-12;
/// Diagonal resolution-of-identity elements checked at most up to this index.
const IDENTITY_MAX: i64 = 8;

pub struct Outcome {
    pub report: Report,
    pub table: Option<Table>,
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let mut out = Outcome {
        report: empty_report(cfg),
        table: None,
    };
    match cfg.command {
        Command::Classify => {
            structure(cfg, &mut out.report);
        }
        Command::Domain => {
            if let Some((spec, domain)) = structure(cfg, &mut out.report) {
                domain_checks(cfg, &spec, &domain, &mut out.report);
            }
        }
        Command::Weight => {
            structure(cfg, &mut out.report);
            if let Some(sol) = solve(cfg, &mut out.report) {
                out.table = weight_checks(cfg, &sol, &mut out.report);
            }
        }
        Command::Verify => {
            if let Some((spec, _)) = structure(cfg, &mut out.report) {
                algebra_checks(cfg, &spec, &mut out.report);
            }
            if let Some(sol) = solve(cfg, &mut out.report) {
                mellin_checks(cfg, &sol, &mut out.report);
            }
        }
        Command::Kernel => {
            if let Some((spec, domain)) = structure(cfg, &mut out.report) {
                out.table = kernel_samples(cfg, &spec, &domain, &mut out.report);
            }
        }
        Command::Export => {
            if let Some((spec, domain)) = structure(cfg, &mut out.report) {
                domain_checks(cfg, &spec, &domain, &mut out.report);
                algebra_checks(cfg, &spec, &mut out.report);
            }
            if let Some(sol) = solve(cfg, &mut out.report) {
                out.table = weight_checks(cfg, &sol, &mut out.report);
                mellin_checks(cfg, &sol, &mut out.report);
            }
        }
    }
    out.report.finish();
    out
}

fn empty_report(cfg: &RunConfig) -> Report {
    let mut params = Vec::new();
    let mut coeffs = Vec::new();
    for (k, v) in &cfg.params {
        match v {
            ParamValue::Scalar(x) => params.push((k.clone(), *x)),
            ParamValue::List(l) => coeffs = l.iter().copied().map(Fixed64).collect(),
        }
    }
    Report {
        tool: "dbarg",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        psi: PsiReport {
            family: cfg.family.clone(),
            params,
            coeffs,
            mu: cfg.psi.mu(),
        },
        spectrum: None,
        domain: None,
        weight: None,
        kernel: None,
        settings: Settings {
            dim: cfg.dim,
            offset: cfg.offset,
            tol: cfg.tol,
            x_min: cfg.x_min,
            x_max: cfg.x_max,
            points: cfg.points,
            n_max: cfg.n_max,
        },
        checks: Vec::new(),
        passed: true,
        first_failure: None,
    }
}

fn push(report: &mut Report, entry: &CheckEntry) {
    report.checks.push(CheckReport::from(entry));
}

fn spectrum_report(spec: &SpectrumDescriptor) -> SpectrumReport {
    let (kind, nu_minus, nu_plus) = match spec.kind {
        SpectrumKind::FullLine => ("FullLine", None, None),
        SpectrumKind::LowerBounded { nu_minus } => ("LowerBounded", Some(nu_minus), None),
        SpectrumKind::UpperBounded { nu_plus } => ("UpperBounded", None, Some(nu_plus)),
        SpectrumKind::FiniteWindow { nu_minus, nu_plus } => ("FiniteWindow", Some(nu_minus), Some(nu_plus)),
        SpectrumKind::NoUnitaryRep => ("NoUnitaryRep", None, None),
    };
    SpectrumReport { kind, nu_minus, nu_plus }
}

fn domain_report(d: &CoherentDomain) -> DomainReport {
    let shape = if d.is_empty() {
        "empty"
    } else if d.is_whole_plane() {
        "whole plane"
    } else if d.is_punctured_plane() {
        "punctured plane"
    } else if d.outer_r2 == f64::INFINITY {
        "exterior of a disk"
    } else if d.origin_included {
        "disk"
    } else {
        "annulus"
    };
    DomainReport {
        ladder: match d.ladder {
            Ladder::A => "a",
            Ladder::ADagger => "a_dagger",
            Ladder::None => "none",
        },
        shape,
        inner_r2: d.inner_r2,
        outer_r2: d.outer_r2,
        origin_included: d.origin_included,
    }
}

/// Classification and coherent-state domain; both go into the report.
fn structure(cfg: &RunConfig, report: &mut Report) -> Option<(SpectrumDescriptor, CoherentDomain)> {
    let spec = match classify(&cfg.psi) {
        Ok(s) => s,
        Err(e) => {
            report.checks.push(CheckReport::error("classify", e.to_string()));
            return None;
        }
    };
    report.spectrum = Some(spectrum_report(&spec));
    match coherent_domain(&cfg.psi, &spec) {
        Ok(d) => {
            report.domain = Some(domain_report(&d));
            Some((spec, d))
        }
        Err(e) => {
            report.checks.push(CheckReport::error("domain", e.to_string()));
            None
        }
    }
}

/// The structure function whose `a`-coherent states carry the domain: ψ
/// itself, or its reflection `ψ(1-x)` when only `a†` has eigenvectors.
fn a_side(psi: &PsiSpec, domain: &CoherentDomain) -> Option<Result<(PsiSpec, SpectrumDescriptor), Error>> {
    match domain.ladder {
        Ladder::None => None,
        Ladder::A => Some(classify(psi).map(|s| (psi.clone(), s))),
        Ladder::ADagger => Some(psi.reflect().and_then(|r| classify(&r).map(|s| (r, s)))),
    }
}

/// `|z|²` well inside the domain.
fn sample_r2(d: &CoherentDomain) -> f64 {
    if d.outer_r2 == f64::INFINITY {
        if d.inner_r2 > 0.0 {
            2.0 * d.inner_r2
        } else {
            1.0
        }
    } else {
        0.5 * (d.inner_r2 + d.outer_r2)
    }
}

fn domain_checks(cfg: &RunConfig, _spec: &SpectrumDescriptor, domain: &CoherentDomain, report: &mut Report) {
    let Some(side) = a_side(&cfg.psi, domain) else { return };
    let (psi, spec) = match side {
        Ok(v) => v,
        Err(e) => return report.checks.push(CheckReport::error("domain.reflect", e.to_string())),
    };
    let r2 = sample_r2(domain);
    let tol = cfg.tol.unwrap_or(EIGEN_TOL);
    let norm = match norm_squared(&psi, &spec, r2, 1e-30) {
        Ok(n) if n.converged => n,
        Ok(_) => return report.checks.push(CheckReport::error("domain.norm", format!("Σ|c_n|² diverges at |z|² = {r2}"))),
        Err(e) => return report.checks.push(CheckReport::error("domain.norm", e.to_string())),
    };
    match kernel_g(&psi, &spec, Complex64::new(r2, 0.0), 1e-30) {
        Ok(g) => push(report, &CheckEntry::new("domain.kernel_diagonal", norm.value, g.re, tol)),
        Err(e) => report.checks.push(CheckReport::error("domain.kernel_diagonal", e.to_string())),
    }
    let z = Complex64::from_polar(r2.sqrt(), 0.7);
    match coherent_coefficients(&psi, &spec, z, 1e-30) {
        Ok(state) => {
            let res = eigen_residual(&psi, &state);
            let scale = norm.value.sqrt() * z.norm().max(1.0);
            push(report, &CheckEntry::residual("domain.eigen_residual", res.interior / scale, tol));
        }
        Err(e) => report.checks.push(CheckReport::error("domain.eigen_residual", e.to_string())),
    }
}

fn clamp_dim(cfg: &RunConfig, spec: &SpectrumDescriptor) -> usize {
    match spec.kind {
        SpectrumKind::FiniteWindow { nu_minus, nu_plus } => cfg.dim.min((nu_plus - nu_minus + 1) as usize),
        _ => cfg.dim,
    }
}

fn algebra_checks(cfg: &RunConfig, spec: &SpectrumDescriptor, report: &mut Report) {
    let dim = clamp_dim(cfg, spec);
    let offset = cfg.offset.unwrap_or(-(dim as i64) / 2);
    if spec.kind == SpectrumKind::NoUnitaryRep {
        return report.checks.push(CheckReport::error("algebra", "no unitary representation on this lattice"));
    }
    match build_truncated_rep(&cfg.psi, spec, dim, offset) {
        Ok(rep) => {
            for e in &algebra_residuals(&rep).entries {
                push(report, e);
            }
        }
        Err(e) => report.checks.push(CheckReport::error("algebra", e.to_string())),
    }
}

fn solve(cfg: &RunConfig, report: &mut Report) -> Option<MellinSolution> {
    match solve_mellin(&cfg.psi) {
        Ok(sol) => {
            report.weight = Some(weight_report(&sol));
            Some(sol)
        }
        Err(e) => {
            report.checks.push(CheckReport::error("weight.solve", e.to_string()));
            None
        }
    }
}

fn feasibility_name(f: Feasibility) -> &'static str {
    match f {
        Feasibility::Decaying => "Decaying",
        Feasibility::Diverging => "Diverging",
        Feasibility::Inconclusive => "Inconclusive",
    }
}

fn weight_report(sol: &MellinSolution) -> WeightReport {
    let (kind, density, atoms_n) = match &sol.weight_kind {
        WeightKind::Density(tag) => (
            "density",
            Some(match tag {
                DensityTag::Gamma => "gamma",
                DensityTag::LogNormal => "log-normal",
                DensityTag::BracketSeries => "bracket-series",
                DensityTag::ParenProduct => "paren-product",
            }),
            None,
        ),
        WeightKind::AtomicMeasure { support, .. } => ("atomic", None, Some(support.len())),
        WeightKind::NumericDensity(_) => ("numeric", None, None),
        WeightKind::Unavailable(_) => ("unavailable", None, None),
    };
    let feasibility = match &sol.weight_kind {
        WeightKind::Unavailable(v) => Some(*v),
        WeightKind::NumericDensity(_) => Some(Feasibility::Decaying),
        _ => None,
    };
    WeightReport {
        kind,
        density,
        frame_dual: sol.frame.dual,
        frame_shift: sol.frame.shift,
        scale: sol.scale,
        normalization: sol.normalization,
        abscissa: sol.abscissa(),
        feasibility: feasibility.map(feasibility_name),
        atoms: atoms_n,
    }
}

fn is_numeric(sol: &MellinSolution) -> bool {
    matches!(sol.weight_kind, WeightKind::NumericDensity(_))
}

fn weight_checks(cfg: &RunConfig, sol: &MellinSolution, report: &mut Report) -> Option<Table> {
    match &sol.weight_kind {
        WeightKind::Unavailable(v) => {
            let err = Error::InversionInfeasible(feasibility_name(*v).to_string());
            report.checks.push(CheckReport::error("weight.feasibility", err.to_string()));
            None
        }
        WeightKind::AtomicMeasure { support, masses } => {
            let total: f64 = masses.iter().sum();
            let tol = cfg.tol.unwrap_or(1e-14);
            push(report, &CheckEntry::new("weight.mass", 1.0, total, tol));
            let min = masses.iter().copied().fold(f64::INFINITY, f64::min);
            let mut positive = CheckEntry::residual("weight.min_mass", (-min).max(0.0), 0.0);
            positive.computed = min;
            positive.pass = min > 0.0;
            push(report, &positive);
            Some(Table {
                header: &["x_k", "w_k"],
                rows: support.iter().zip(masses).map(|(x, w)| vec![*x, *w]).collect(),
            })
        }
        _ => {
            let grid = log_grid(cfg.x_min, cfg.x_max, cfg.points);
            push(report, &positivity_check(sol, &grid, Exec::default()));
            let tol = cfg.tol.unwrap_or(if is_numeric(sol) { NUMERIC_MOMENT_TOL } else { MOMENT_TOL });
            match moment_check(sol, 0..=0, &QuadratureConfig::default(), tol) {
                Ok(r) => {
                    let mut e = r.entries[0].clone();
                    e.name = "weight.mass".into();
                    push(report, &e);
                }
                Err(e) => report.checks.push(CheckReport::error("weight.mass", e.to_string())),
            }
            let rows = grid
                .iter()
                .map(|&x| vec![x, weight_eval(sol, x).unwrap_or(f64::NAN)])
                .collect();
            Some(Table {
                header: &["x", "F"],
                rows,
            })
        }
    }
}

/// 100 points `Re ρ ∈ [0.5, 6]`, `Im ρ ∈ [-4.5, 4.5]`.
fn recursion_points() -> Vec<Complex64> {
    let mut v = Vec::with_capacity(100);
    for i in 0..10 {
        for j in 0..10 {
            v.push(Complex64::new(0.5 + 5.5 * (i as f64 + 0.5) / 10.0, -4.5 + j as f64));
        }
    }
    v
}

fn mellin_checks(cfg: &RunConfig, sol: &MellinSolution, report: &mut Report) {
    let recursion = recursion_check(sol, &recursion_points(), cfg.tol.unwrap_or(RECURSION_TOL));
    for e in &recursion.entries {
        push(report, e);
    }
    if let WeightKind::Unavailable(v) = sol.weight_kind {
        let err = Error::InversionInfeasible(feasibility_name(v).to_string());
        report.checks.push(CheckReport::error("moment", err.to_string()));
        return;
    }
    let quad = QuadratureConfig::default();
    let tol = cfg.tol.unwrap_or(if is_numeric(sol) { NUMERIC_MOMENT_TOL } else { MOMENT_TOL });
    let lo = (-cfg.n_max..=0).find(|&n| sol.moment_range_allowed(n)).unwrap_or(0);
    match moment_check(sol, lo..=cfg.n_max, &quad, tol) {
        Ok(r) => r.entries.iter().for_each(|e| push(report, e)),
        Err(e) => report.checks.push(CheckReport::error("moment", e.to_string())),
    }
    for n in 0..=cfg.n_max.min(IDENTITY_MAX) {
        let name = format!("identity.{}", index_label(n));
        match resolution_identity_check(sol, n, n, &quad) {
            Ok(d) => push(report, &CheckEntry::new(name, 1.0, d, tol)),
            Err(e) => report.checks.push(CheckReport::error(name, e.to_string())),
        }
    }
    if matches!(sol.weight_kind, WeightKind::Density(_)) {
        let ode_tol = cfg.tol.unwrap_or(ODE_TOL);
        for (i, x) in [0.5, 1.0, 5.0].into_iter().enumerate() {
            match weight_ode_residual(sol, x) {
                Ok(r) => push(report, &CheckEntry::residual(format!("ode.{}", index_label(i as i64)), r, ode_tol)),
                // no dilation form for this ψ: nothing to check
                Err(Error::Unsupported(_)) => {}
                Err(e) => report.checks.push(CheckReport::error("ode", e.to_string())),
            }
        }
    }
    if matches!(sol.weight_kind, WeightKind::NumericDensity(_)) {
        // the numeric weight is only trusted while F̂ keeps decaying on the contour
        let c = default_contour(sol);
        let v = inversion_feasibility(sol, c, &default_probes());
        if v != Feasibility::Decaying {
            let err = Error::InversionInfeasible(feasibility_name(v).to_string());
            report.checks.push(CheckReport::error("weight.feasibility", err.to_string()));
        }
    }
}

fn kernel_samples(
    cfg: &RunConfig,
    _spec: &SpectrumDescriptor,
    domain: &CoherentDomain,
    report: &mut Report,
) -> Option<Table> {
    let Some(side) = a_side(&cfg.psi, domain) else {
        report.checks.push(CheckReport::error("kernel", "no coherent states for this structure function"));
        return None;
    };
    let (psi, spec) = match side {
        Ok(v) => v,
        Err(e) => {
            report.checks.push(CheckReport::error("kernel", e.to_string()));
            return None;
        }
    };
    // G(u) converges for |u| inside the domain; the grid runs along the real
    // axis. u = 0 needs an expansion without negative powers.
    let origin = domain.origin_included
        && IndexFrame::for_spectrum(&spec).is_ok_and(|f| f.lowest == Some(f.base));
    let lo = if origin { cfg.u_min } else { cfg.u_min.max(domain.inner_r2) };
    let hi = cfg.u_max.min(domain.outer_r2);
    let inside = |u: f64| if u == 0.0 { origin } else { domain.contains_r2(u.abs()) };
    let n = cfg.points;
    let us: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .filter(|u| inside(*u))
        .collect();
    if us.is_empty() {
        report.checks.push(CheckReport::error(
            "kernel",
            format!("[{}, {}] does not meet the coherent-state domain", cfg.u_min, cfg.u_max),
        ));
        return None;
    }
    let mut rows = Vec::with_capacity(us.len());
    for &u in &us {
        match kernel_g(&psi, &spec, Complex64::new(u, 0.0), 1e-30) {
            Ok(g) => rows.push(vec![u, g.re, g.im]),
            Err(e) => {
                report.checks.push(CheckReport::error("kernel", format!("G({u}): {e}")));
                return None;
            }
        }
    }
    let tol = cfg.tol.unwrap_or(KERNEL_TOL);
    for (i, frac) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let k = ((us.len() - 1) as f64 * frac).round() as usize;
        let (u, g) = (us[k], rows[k][1]);
        if u <= 0.0 {
            continue;
        }
        let name = format!("kernel.equation.{}", index_label(i as i64));
        match kernel_residual(&psi, &spec, u, 200) {
            Ok(r) => push(report, &CheckEntry::residual(name, r / (u * g.abs()).max(f64::MIN_POSITIVE), tol)),
            Err(e) => report.checks.push(CheckReport::error(name, e.to_string())),
        }
    }
    report.kernel = Some(KernelReport {
        u_min: us[0],
        u_max: us[us.len() - 1],
        samples: us.len(),
    });
    Some(Table {
        header: &["u", "Re G", "Im G"],
        rows,
    })
}
