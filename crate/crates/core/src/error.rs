use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested evaluation sits on (or numerically at) a pole of the impedance.
    #[error("evaluation at {omega:.6e} rad/s is within numerical distance of a pole")]
    PoleProximity { omega: f64 },

    #[error("adaptive refinement exceeded {limit} grid points")]
    RefinementLimit { limit: usize },

    #[error("state-shifted resonance is non-positive ({omega:.6e} rad/s)")]
    NonPositiveResult { omega: f64 },

    #[error("frequency {omega:.6e} rad/s is outside the analysis band [{lo:.6e}, {hi:.6e}]")]
    OutOfBand { omega: f64, lo: f64, hi: f64 },

    #[error(
        "{qubits}-qubit parity needs at least {required} resonant modes \
         (reflection phase must wind by at least {qubits}π); device has {modes}"
    )]
    WindingInfeasible {
        qubits: usize,
        modes: usize,
        required: usize,
    },

    #[error(
        "no eraser solution: best candidate f_p = {best_f_hz:.9e} Hz, chi/2π = {best_chi_hz:.6e} Hz, \
         residual norm {best_norm:.3e} rad"
    )]
    NoSolution {
        best_f_hz: f64,
        best_chi_hz: f64,
        best_norm: f64,
    },

    #[error("eraser optimum at {omega:.9e} rad/s collides with a reflection pole")]
    PoleCollision { omega: f64 },

    #[error("even and odd parity phases coincide; parities are indistinguishable")]
    EraserDegenerate,
}
