use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A parameter lies outside the range where the formulas apply.
    #[error("{name} = {value} is out of range ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Bob's angle makes the estimation system singular (`sin 2α ≈ 0`).
    #[error("estimation is singular at alpha = {alpha} (sin 2α below 1e-9)")]
    DegenerateAngle { alpha: f64 },

    /// Observed counts cannot come from any symmetrized channel.
    #[error("channel estimation infeasible: {reason}")]
    EstimationInfeasible { reason: &'static str },

    /// `1 - (1-ε)cos(2α+θ)` vanishes, so Eve's overlap operator is undefined.
    #[error("degenerate channel: 1 - (1-ε)cos(2α+θ) = 0")]
    DegenerateChannel,

    /// The observed inner product cannot be produced by any unitary attack.
    #[error("unreachable channel: target B = {target} exceeds B_max = {b_max}")]
    Unreachable { target: f64, b_max: f64 },

    /// The probe-overlap operator `B̂` must be indefinite.
    #[error("B matrix is definite (det = {det}); expected B11*B22 - B12^2 <= 0")]
    DefiniteB { det: f64 },

    /// Candidate curves are not defined at ε = 0; use the closed form instead.
    #[error("zero noise: candidate families degenerate, use Q(B) = B / cos(α+θ)")]
    ZeroNoise,

    /// Bracketing or bisection failed to isolate a root.
    #[error("root not isolated in [{lo}, {hi}]")]
    RootNotFound { lo: f64, hi: f64 },

    /// A fiber link delivering nothing to Bob.
    #[error("link has zero transmission")]
    DegenerateLink,

    /// The brute-force search found no point satisfying the constraint.
    #[error("oracle found no feasible contraction within slack {slack}")]
    OracleInfeasible { slack: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, expected: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain { name, value, expected })
    }
}
