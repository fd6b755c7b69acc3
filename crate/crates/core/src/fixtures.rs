//! Bundled test assets: the small counting example graph, the three-block
//! experiment kernel, and a synthetic school-like dataset with covariates.

use rand::Rng;
use serde::Serialize;

use crate::census::census;
use crate::error::Result;
use crate::graph::{load_edge_list, Graph, LoadedGraph};
use crate::motif::catalog;
use crate::random_graph::{sample_graph, Kernel, LatentMode, SampleSpec};
use crate::rng::{self, stream};

pub const FIG_A1_EDGES: &str = include_str!("../fixtures/fig_a1.txt");
pub const FIG_C1_KERNEL: &str = include_str!("../fixtures/fig_c1_kernel.json");
pub const SCHOOL_EDGES: &str = include_str!("../fixtures/school_edges.txt");
pub const SCHOOL_COVARIATES: &str = include_str!("../fixtures/school_covariates.csv");

/// The counting example graph with its two highlighted roots.
#[derive(Clone, Debug)]
pub struct FigA1 {
    pub graph: Graph,
    pub labels: Vec<String>,
    pub i: usize,
    pub j: usize,
}

pub fn fig_a1() -> FigA1 {
    let LoadedGraph { graph, labels, .. } = load_edge_list(FIG_A1_EDGES.as_bytes()).expect("bundled edge list parses");
    let find = |t: &str| labels.iter().position(|l| l == t).expect("root present");
    let (i, j) = (find("i"), find("j"));
    FigA1 { graph, labels, i, j }
}

/// Three equal blocks, assortative, with equal row sums of `B` so that every
/// block has the same expected degree.
pub fn fig_c1_kernel() -> Kernel {
    serde_json::from_str(FIG_C1_KERNEL).expect("bundled kernel parses")
}

/// Planted logistic coefficients of the synthetic school data:
/// intercept, triangle density, binary extra covariate.
pub const SCHOOL_BETA: [f64; 3] = [-1.0, 0.4, 0.8];
pub const SCHOOL_SEED: u64 = 20_240_601;
pub const SCHOOL_GRADES: usize = 6;
pub const SCHOOL_N: usize = 900;

/// A school-like network: grades are blocks, friendships are mostly within
/// a grade and to adjacent grades. The label follows a logistic model in
/// the vertex's triangle density and a binary extra covariate.
#[derive(Clone, Debug, Serialize)]
pub struct SchoolData {
    #[serde(skip)]
    pub graph: Graph,
    pub grade: Vec<usize>,
    pub triangle_density: Vec<f64>,
    pub extra: Vec<f64>,
    pub label: Vec<u8>,
    pub beta: [f64; 3],
}

pub fn school_kernel(grades: usize) -> Kernel {
    let b = (0..grades)
        .map(|r| {
            (0..grades)
                .map(|c| match r.abs_diff(c) {
                    0 => 0.9,
                    1 => 0.15,
                    _ => 0.03,
                })
                .collect()
        })
        .collect();
    Kernel::equal_blocks(b).expect("valid school kernel")
}

/// Generate the synthetic dataset.
pub fn synthetic_school(n: usize, grades: usize, beta: [f64; 3], seed: u64) -> Result<SchoolData> {
    let kernel = school_kernel(grades);
    let rho = 0.12;
    let spec = SampleSpec::new(n, rho, seed).with_latent(LatentMode::Grid);
    let (graph, lat) = sample_graph(&kernel, &spec)?;
    let dm = census(&graph, &[catalog::triangle()])?;
    let triangle_density = dm.column(0);
    let mut rng = rng::chacha(seed, stream::COVARIATES, 0);
    let extra: Vec<f64> = (0..n).map(|_| if rng.gen::<f64>() < 0.5 { 1.0 } else { 0.0 }).collect();
    let label = (0..n)
        .map(|v| {
            let eta = beta[0] + beta[1] * triangle_density[v] + beta[2] * extra[v];
            let p = 1.0 / (1.0 + (-eta).exp());
            u8::from(rng.gen::<f64>() < p)
        })
        .collect();
    Ok(SchoolData {
        graph,
        grade: lat.block,
        triangle_density,
        extra,
        label,
        beta,
    })
}

/// The dataset behind the bundled school files.
pub fn school() -> Result<SchoolData> {
    synthetic_school(SCHOOL_N, SCHOOL_GRADES, SCHOOL_BETA, SCHOOL_SEED)
}

impl SchoolData {
    /// Covariate table: `vertex_id,label,grade,extra`.
    pub fn covariate_csv(&self) -> String {
        let mut out = String::from("vertex_id,label,grade,extra\n");
        for v in 0..self.label.len() {
            out.push_str(&format!("{v},{},{},{}\n", self.label[v], self.grade[v], self.extra[v]));
        }
        out
    }

    pub fn edge_list(&self) -> String {
        let mut buf = Vec::new();
        crate::graph::write_edge_list(&self.graph, &mut buf).expect("write to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig_a1_shape() {
        let fx = fig_a1();
        assert_eq!(fx.graph.n(), 11);
        assert_eq!(fx.graph.edge_count(), 18);
        assert_eq!(fx.graph.degree(fx.i), 3);
        assert_eq!(fx.graph.degree(fx.j), 5);
    }

    #[test]
    fn kernel_has_equal_blocks_and_row_sums() {
        let k = fig_c1_kernel();
        assert_eq!(k.k(), 3);
        assert!(k.pi().iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-12));
        let sums: Vec<f64> = k.matrix().iter().map(|r| r.iter().sum()).collect();
        assert!(sums.iter().all(|s| (s - sums[0]).abs() < 1e-12));
    }

    #[test]
    fn bundled_school_files_match_generator() {
        let data = school().unwrap();
        assert_eq!(data.edge_list(), SCHOOL_EDGES);
        assert_eq!(data.covariate_csv(), SCHOOL_COVARIATES);
    }
}
