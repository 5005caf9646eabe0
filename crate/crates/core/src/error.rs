use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero factor psi({at}) in generalized factorial product")]
    ZeroFactor { at: f64 },

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate coherent-state domain: psi(+inf) = psi(-inf) = {0}")]
    DegenerateDomain(f64),

    #[error("|z|^2 = {r2} lies outside the coherent-state domain ({inner}, {outer})")]
    OutOfDomain { r2: f64, inner: f64, outer: f64 },

    #[error("no coherent states: {0}")]
    NoCoherentStates(String),

    #[error("no closed-form Mellin solution for {0}")]
    NoClosedForm(String),

    #[error("rho = {re}{im:+}i is below the abscissa of convergence {abscissa}")]
    BelowAbscissa { re: f64, im: f64, abscissa: f64 },

    #[error("inverse Mellin infeasible: {0}")]
    InversionInfeasible(String),

    #[error("negative psi({at}) = {value}: no unitary ladder matrix element")]
    NegativePsi { at: f64, value: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
