//! Exact transition matrices over `Ω(μ)` and the quantities derived from
//! them: spectra, Dirichlet forms, worst-case pinning gaps and mixing
//! bounds.
//!
//! Reversible chains are diagonalized through the symmetric conjugate
//! `D^{1/2} P D^{−1/2}` with `D = diag(μ)`.

pub mod functionals;
pub mod spectral;
pub mod transition;

pub use functionals::*;
pub use spectral::{detailed_balance_residual, spectral_report, symmetrized, SpectralReport, REVERSIBILITY_TOL};
pub use transition::{
    glauber_matrix, project_matrix, transition_matrix, GlauberPick, TransitionMatrix, MATRIX_CAP,
};
