//! Dense state-vector oracle for graph-state secret sharing.
//!
//! Everything here is exponential in the number of qudits and exists to
//! cross-check the rank-based predictions on small instances.

mod codes;
mod protocol;
mod report;
mod state;
mod variants;
mod weyl;

use thiserror::Error;

use crate::access::AccessError;
use crate::multigraph::GraphError;

pub use codes::{hermitian_eigenvalues, trace_distance, uhlmann_fidelity, DensityMatrix, InfoLeak, QuantumCheck};
pub use protocol::{mub_vector, ClassicalDecode, CqRound, DecodeParams, QqDecode};
pub use report::{graph_hash, OracleReport, VerdictPair};
pub use state::{decode_index, encode_index, fourier, omega_pow, StateVector, DEFAULT_AMPLITUDE_BUDGET};
pub use variants::{LogicalOperators, Variant, VariantOutcome};
pub use weyl::WeylOperator;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{q}^{n} amplitudes exceed the budget of {budget}")]
    Budget { q: u32, n: usize, budget: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Access(#[from] AccessError),
    #[error("dealer {0} is isolated")]
    IsolatedDealer(usize),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("player set is not authorised: {0}")]
    Unauthorized(String),
    #[error("basis t={t} is not supported for q={q}")]
    UnsupportedBasis { q: u32, t: u32 },
    #[error("{0}")]
    Precondition(String),
}

/// Entry point carrying the amplitude budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    budget: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { budget: DEFAULT_AMPLITUDE_BUDGET }
    }
}

impl Oracle {
    pub fn new(budget: usize) -> Self {
        Oracle { budget }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub(crate) fn check(&self, q: u32, n: usize) -> Result<usize, OracleError> {
        state::dimension(q, n, self.budget).ok_or(OracleError::Budget { q, n, budget: self.budget })
    }
}
