//! Kernel estimation, bootstrap standardization, goodness-of-fit testing and
//! covariate regression on rooted densities.

pub mod blockfit;
pub mod bootstrap;
pub mod gof;
pub mod logistic;
pub mod louvain;

pub use blockfit::{fit_blockmodel, BlockFit, FitOptions};
pub use bootstrap::{
    bonferroni_critical_value, bootstrap_moments, critical_value, standardize, BootstrapModel, BootstrapMoments,
    CriticalRule, CriticalValue,
};
pub use gof::{gof_test, triadic_closure, GofConfig, GofResult};
pub use logistic::{logistic_fit, CovariateTable, RegressionFit};
pub use louvain::{louvain, LouvainOptions, Partition};
