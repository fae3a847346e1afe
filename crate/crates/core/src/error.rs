use thiserror::Error;

/// Errors raised by the scenario, metric, solver and selection routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(&'static str),
    #[error("could not place {satellites} satellites with the requested separation after {attempts} layout attempts")]
    LayoutExhausted { satellites: usize, attempts: usize },
    #[error("user lies behind the array plane (boresight component {boresight_component:.3e})")]
    BehindArray { boresight_component: f64 },
    #[error("distance must be strictly positive")]
    ZeroDistance,
    #[error("wavelength must be strictly positive")]
    InvalidWavelength,
    #[error("link (satellite {sat}, user {ue}) is not active")]
    InactiveLink { sat: usize, ue: usize },
    #[error("geometry needs at least {need} satellites, got {have}")]
    TooFewSatellites { have: usize, need: usize },
    #[error("singular positioning geometry (min eigenvalue {min_eigenvalue:.3e})")]
    SingularGeometry { min_eigenvalue: f64 },
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("anchor point violates the feasible set: {0}")]
    InfeasibleAnchor(&'static str),
    #[error("zero channel on link (satellite {sat}, user {ue})")]
    ZeroChannel { sat: usize, ue: usize },
    #[error("zero-forcing needs at most {antennas} users, satellite serves {users}")]
    ZfDimensionOverflow { users: usize, antennas: usize },
    #[error(
        "zero-forcing channel Gram matrix is rank deficient (condition number {condition:.3e})"
    )]
    ZfRankDeficient { condition: f64 },
    #[error("no beamformer for active link (satellite {sat}, user {ue})")]
    MissingBeam { sat: usize, ue: usize },
    #[error("satellite has no served users")]
    EmptyServedSet,
    #[error("no satellite subset gives a finite GDOP for user {ue}")]
    NoFeasibleSubset { ue: usize },
    #[error("user {ue} has an empty preference list under GDOP threshold {threshold}")]
    EmptyPreferenceList { ue: usize, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
