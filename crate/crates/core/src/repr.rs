//! Classification of the irreducible representations on the eigenbasis of `N`
//! and of the domain where coherent states exist.

use crate::error::{Error, Result};
use crate::psi::{Direction, PsiSpec};

/// Default half-width of the lattice scan window.
pub const DEFAULT_SCAN_WINDOW: i64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// `Sp N = μ + Z`
    FullLine,
    /// `Sp N = μ + ν₋ + N`
    LowerBounded { nu_minus: i64 },
    /// `Sp N = μ + ν₊ - N`
    UpperBounded { nu_plus: i64 },
    /// `Sp N = μ + {ν₋, …, ν₊}`
    FiniteWindow { nu_minus: i64, nu_plus: i64 },
    /// ψ is negative somewhere on the lattice without bracketing lattice zeros.
    NoUnitaryRep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumDescriptor {
    pub kind: SpectrumKind,
    pub mu: f64,
}

/// Which ladder operator has eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    A,
    ADagger,
    None,
}

/// `{ z : inner_r2 < |z|² < outer_r2 }`, plus `z = 0` when `origin_included`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentDomain {
    pub ladder: Ladder,
    pub inner_r2: f64,
    pub outer_r2: f64,
    pub origin_included: bool,
}

impl CoherentDomain {
    fn empty() -> Self {
        CoherentDomain {
            ladder: Ladder::None,
            inner_r2: 0.0,
            outer_r2: 0.0,
            origin_included: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ladder == Ladder::None
    }

    /// Whole complex plane.
    pub fn is_whole_plane(&self) -> bool {
        self.ladder != Ladder::None && self.origin_included && self.outer_r2 == f64::INFINITY
    }

    /// Complex plane minus the origin.
    pub fn is_punctured_plane(&self) -> bool {
        self.ladder != Ladder::None
            && !self.origin_included
            && self.inner_r2 == 0.0
            && self.outer_r2 == f64::INFINITY
    }

    pub fn contains_r2(&self, r2: f64) -> bool {
        if self.ladder == Ladder::None {
            return false;
        }
        (r2 == 0.0 && self.origin_included) || (r2 > self.inner_r2 && r2 < self.outer_r2)
    }
}

/// Classify with the default scan window.
pub fn classify(psi: &PsiSpec) -> Result<SpectrumDescriptor> {
    classify_with_window(psi, DEFAULT_SCAN_WINDOW)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LatticeSign {
    Zero,
    Positive,
    Negative,
}

/// Classify on the lattice window `[-window, window]`.
///
/// When several admissible intervals exist the choice is, in order: a
/// lower-bounded spectrum, an upper-bounded spectrum, the lowest finite window.
pub fn classify_with_window(psi: &PsiSpec, window: i64) -> Result<SpectrumDescriptor> {
    let mu = psi.mu();
    // beyond the zero bound ψ keeps one sign, so the window edges stand for ±∞
    let bound = psi.real_zero_bound() + 2.0;
    if !(bound < window as f64) {
        return Err(Error::Unsupported(format!(
            "zero scan window [-{window}, {window}] is inconclusive (zeros may lie up to |x| = {bound})"
        )));
    }
    let zeros = psi.find_lattice_zeros(-window, window).zeros;
    let sign_at = |n: i64| -> LatticeSign {
        if zeros.binary_search(&n).is_ok() {
            return LatticeSign::Zero;
        }
        if psi.sign(mu + n as f64) > 0.0 {
            LatticeSign::Positive
        } else {
            LatticeSign::Negative
        }
    };
    let signs: Vec<LatticeSign> = (-window..=window).map(sign_at).collect();
    let index = |n: i64| (n + window) as usize;

    if zeros.is_empty() {
        let kind = if signs.iter().all(|s| *s == LatticeSign::Positive) {
            SpectrumKind::FullLine
        } else {
            SpectrumKind::NoUnitaryRep
        };
        return Ok(SpectrumDescriptor { kind, mu });
    }

    let lowest = zeros[0];
    let highest = *zeros.last().unwrap();
    // [ν₋+1, ∞) positive with ψ(ν₋) = 0
    if signs[index(highest) + 1..].iter().all(|s| *s == LatticeSign::Positive) {
        return Ok(SpectrumDescriptor {
            kind: SpectrumKind::LowerBounded { nu_minus: highest },
            mu,
        });
    }
    // (-∞, ν₊] positive with ψ(ν₊+1) = 0
    if signs[..index(lowest)].iter().all(|s| *s == LatticeSign::Positive) {
        return Ok(SpectrumDescriptor {
            kind: SpectrumKind::UpperBounded { nu_plus: lowest - 1 },
            mu,
        });
    }
    for pair in zeros.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if signs[index(lo) + 1..index(hi)].iter().all(|s| *s == LatticeSign::Positive) {
            return Ok(SpectrumDescriptor {
                kind: SpectrumKind::FiniteWindow {
                    nu_minus: lo,
                    nu_plus: hi - 1,
                },
                mu,
            });
        }
    }
    Ok(SpectrumDescriptor {
        kind: SpectrumKind::NoUnitaryRep,
        mu,
    })
}

/// Domain of existence of the coherent states.
pub fn coherent_domain(psi: &PsiSpec, spec: &SpectrumDescriptor) -> Result<CoherentDomain> {
    let plus = psi.asymptote(Direction::PlusInfinity)?;
    let minus = psi.asymptote(Direction::MinusInfinity)?;
    Ok(match spec.kind {
        SpectrumKind::FiniteWindow { .. } | SpectrumKind::NoUnitaryRep => CoherentDomain::empty(),
        SpectrumKind::LowerBounded { .. } => CoherentDomain {
            ladder: Ladder::A,
            inner_r2: 0.0,
            outer_r2: plus,
            origin_included: true,
        },
        SpectrumKind::UpperBounded { .. } => CoherentDomain {
            ladder: Ladder::ADagger,
            inner_r2: 0.0,
            outer_r2: minus,
            origin_included: true,
        },
        SpectrumKind::FullLine => {
            if plus > minus {
                CoherentDomain {
                    ladder: Ladder::A,
                    inner_r2: minus.max(0.0),
                    outer_r2: plus,
                    origin_included: false,
                }
            } else if plus < minus {
                CoherentDomain {
                    ladder: Ladder::ADagger,
                    inner_r2: plus.max(0.0),
                    outer_r2: minus,
                    origin_included: false,
                }
            } else {
                return Err(Error::DegenerateDomain(plus));
            }
        }
    })
}
