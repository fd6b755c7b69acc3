//! Rooted subgraph counts and densities on sparse graphs, exact moment
//! algebra for inhomogeneous random graphs (stochastic blockmodels), and the
//! vertex-level inference built on top of them: block kernel estimation,
//! parametric bootstrap standardization, goodness-of-fit testing and logistic
//! regression on rooted densities.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`] and [`motif`]: host graphs and small rooted graphs.
//! - [`census`]: per-vertex rooted counts `X_F(G, i)` and densities `s_i(F, G)`.
//! - [`overlap`]: gluing products, overlap sets and their coefficients.
//! - [`random_graph`]: blockmodel kernels, seeded sampling, exact moments.
//! - [`inference`]: Louvain, block fits, bootstrap, goodness-of-fit, regression.
//! - [`experiments`]: Monte Carlo harnesses for the limit theorems.

pub mod census;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod inference;
pub mod motif;
pub mod overlap;
pub mod random_graph;
pub mod rng;
pub mod stats;

pub use census::{census, rooted_count, CountVector, DensityMatrix};
pub use error::{Error, Result};
pub use graph::Graph;
pub use motif::{catalog, Ratio, RootedMotif};
pub use overlap::{gluing_product, inductive_coefficients, overlap_set, OverlapSet};
pub use random_graph::{Kernel, LatentMode, SampleSpec};
