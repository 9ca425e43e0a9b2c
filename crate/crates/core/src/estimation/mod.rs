//! Parameter estimation: blind EM with constrained K-Means starts, multi-start
//! selection, and the data-aided reference.

mod da;
mod em;
mod kmeans;
mod multi;

pub use da::da_fit;
pub use em::{
    e_step, em_fit, m_step, DistributionMode, EmConfig, EmInit, EmResult, PosteriorMatrix, COLLAPSE_RATIO,
    SIGMA2_MIN,
};
pub use kmeans::{active_points, constrained_kmeans, kmeans_init, Clustering, INIT_PROB_FLOOR};
pub use multi::{multi_init_em, BranchOutcome, MultiStartResult, SelectionScore, DEFAULT_KS, SELECTION_TIE_TOL};
