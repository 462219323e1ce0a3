use thiserror::Error;

/// Errors raised by the simulation engine and its I/O layers.
#[derive(Debug, Error)]
pub enum SimError {
    /// Adjacent rays crossed: the front spacing became non-positive and the
    /// ray-tube amplitude transport is singular.
    #[error("caustic: rays {left} and {right} crossed at t = {t}")]
    Caustic { left: usize, right: usize, t: f64 },

    /// The per-ray Hamiltonian drifted past the configured hard limit.
    #[error("energy drift {residual:.3e} exceeds hard limit {limit:.3e} at t = {t}")]
    EnergyDrift { residual: f64, limit: f64, t: f64 },

    /// E - V(r) <= 0: the relativistic velocity formula is singular.
    #[error("turning point: E - V = {value:.3e} at ray {ray}")]
    TurningPoint { ray: usize, value: f64 },

    /// The effective refractive index squared is non-positive.
    #[error("evanescent region: n^2 = {n_squared:.3e} at ray {ray}")]
    Evanescent { ray: usize, n_squared: f64 },

    /// Probability reached the comparator grid boundary.
    #[error("probability {mass:.3e} escaped to the grid boundary at t = {t}")]
    DomainEscape { mass: f64, t: f64 },

    /// The wave function is below the node floor where a value was requested.
    #[error("wave-function node at x = {x}")]
    Node { x: f64 },

    /// A front does not satisfy the preconditions of a front-level operation.
    #[error("degenerate front: {0}")]
    DegenerateFront(String),

    /// Invalid configuration or parameters.
    #[error("config error: {0}")]
    Config(String),

    /// Diagnostic extraction failed (e.g. too few histogram maxima).
    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    /// The stepper exceeded the runaway step guard.
    #[error("run exceeded {0} steps without reaching z_max")]
    Runaway(u64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Process exit code for the CLI: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
