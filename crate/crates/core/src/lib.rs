//! Deformed harmonic oscillator algebras `[a,N] = a`, `[a†,N] = -a†`,
//! `a†a = ψ(N)`, `aa† = ψ(N+1)`: representation classification, coherent
//! states, Bargmann weight functions obtained from the Mellin functional
//! equation `F̂(ρ+1) = ψ(ρ)F̂(ρ)`, and numerical verification of the resulting
//! resolution of the identity.

pub mod bargmann;
pub mod coherent;
pub mod error;
pub mod par;
pub mod psi;
pub mod qspecial;
pub mod quadrature;
pub mod repr;
pub mod verify;

pub use error::{Error, Result};
pub use par::Exec;
pub use psi::{Direction, PsiFamily, PsiSpec};
pub use repr::{classify, coherent_domain, CoherentDomain, Ladder, SpectrumDescriptor, SpectrumKind};
pub use bargmann::{solve_mellin, solve_mellin_with, MellinSolution, WeightKind};
pub use coherent::{coherent_coefficients, kernel_g, norm_squared, CoherentState};
pub use quadrature::QuadratureConfig;
pub use verify::{CheckEntry, VerificationReport};
