use crate::linalg::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration produced non-finite values at λ = {lambda}")]
    IntegrationOverflow { lambda: C64 },

    #[error("λ = {lambda} is (numerically) an eigenvalue: V(S) is singular")]
    AtEigenvalue { lambda: C64 },

    #[error("bracket exhaustion in band {band}: located {found} of {expected} eigenvalues")]
    BracketExhaustion {
        band: usize,
        found: usize,
        expected: usize,
    },

    #[error("residue contour around λ = {lambda} clashes with a neighbouring eigenvalue; try radius ≤ {suggested_radius:e}")]
    ContourClash { lambda: f64, suggested_radius: f64 },

    #[error("multiplicity mismatch at λ = {lambda}: rank deficiency {rank_deficiency}, winding number {winding}")]
    MultiplicityMismatch {
        lambda: f64,
        rank_deficiency: usize,
        winding: i64,
    },

    #[error("cannot classify eigenvalue slots: vote margin {margin:.3} below 2/3")]
    InconclusiveRank { margin: f64 },

    #[error("asymptotic fit too noisy (residual {residual:e})")]
    NoisyData { residual: f64 },

    #[error("grouping failed: {0}")]
    GroupingFailure(String),

    #[error("pair (n = {n}, k = {k}) straddles two groups")]
    GroupingInconsistency { n: usize, k: usize },

    #[error("main equation solve failed at x = {x}: residual {residual:e}, condition estimate {condition:e}")]
    SolveFailure {
        x: f64,
        residual: f64,
        condition: f64,
    },

    #[error("recovered potential is not Hermitian (defect {defect:e}); truncation too small")]
    ReconstructionInconsistency { defect: f64 },

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps `self` with the name of the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
