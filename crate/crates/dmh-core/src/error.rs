use thiserror::Error;

/// Errors reported by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Mesh resolutions must be even so the interface plane z = 0.5 is a
    /// grid plane; odd resolutions would cut elements.
    #[error("mesh resolution n = {0} must be an even integer >= 2 so that the interface plane z = 0.5 is covered conformingly by grid faces")]
    InvalidResolution(usize),

    #[error("face {0} is not a boundary face")]
    NotBoundaryFace(usize),

    #[error("coefficient `{name}` = {value} violates {constraint}")]
    InvalidCoefficient {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("stabilization function argument {0} is negative")]
    NegativePeclet(f64),

    #[error("diffusion tensor is not symmetric positive definite")]
    NotSpd,

    #[error("element {element}: condensed scalar block M = {m:.6e} is numerically singular")]
    SingularElement { element: usize, m: f64 },

    #[error("element {0} has no condensed data")]
    MissingCondensedElement(usize),

    #[error("reduced system is singular near equation {0}")]
    SingularSystem(usize),

    #[error("iterative solver stalled at relative residual {residual:.3e} after {iterations} iterations")]
    IterativeNoConvergence { residual: f64, iterations: usize },

    #[error("linear solve residual {residual:.3e} exceeds the contract {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("analytic reference solution requires r > 0, got r = {0}")]
    ZeroReaction(f64),

    #[error("interface coefficient system is singular")]
    SingularInterfaceSystem,

    #[error("uncondensed block oracle is limited to {limit} elements, mesh has {actual}")]
    BlockOracleTooLarge { limit: usize, actual: usize },

    #[error("trace constant must be positive, got {0}")]
    InvalidTraceConstant(f64),
}
