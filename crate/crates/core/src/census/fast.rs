//! Closed-form and specialised counters for small motifs.

use rayon::prelude::*;

use crate::error::Result;
use crate::graph::Graph;
use crate::motif::{catalog, RootedMotif};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastMotif {
    Edge,
    TwoStar,
    ThreeStar,
    Cherry,
    Triangle,
    Square,
}

impl FastMotif {
    /// The fast counter for `motif`, if its rooted isomorphism class has one.
    pub fn detect(motif: &RootedMotif) -> Result<Option<Self>> {
        let code = motif.canonical_code()?;
        let table = [
            (catalog::edge(), FastMotif::Edge),
            (catalog::two_star(), FastMotif::TwoStar),
            (catalog::three_star(), FastMotif::ThreeStar),
            (catalog::cherry(), FastMotif::Cherry),
            (catalog::triangle(), FastMotif::Triangle),
            (catalog::square(), FastMotif::Square),
        ];
        for (m, kind) in table {
            if m.order() == motif.order() && m.canonical_code()? == code {
                return Ok(Some(kind));
            }
        }
        Ok(None)
    }

    pub fn count_at(self, graph: &Graph, v: usize) -> Result<u64> {
        let d = graph.degree(v) as u64;
        Ok(match self {
            FastMotif::Edge => d,
            FastMotif::TwoStar => choose2(d),
            FastMotif::ThreeStar => choose3(d),
            FastMotif::Cherry => cherry_at(graph, v),
            FastMotif::Triangle => triangles_at(graph, v),
            FastMotif::Square => {
                let mut scratch = vec![0u32; graph.n()];
                squares_at(graph, v, &mut scratch)
            }
        })
    }

    pub fn count_all(self, graph: &Graph) -> Result<Vec<u64>> {
        let n = graph.n();
        Ok(match self {
            FastMotif::Triangle => triangles_all(graph),
            FastMotif::Square => (0..n)
                .into_par_iter()
                .map_init(
                    || vec![0u32; n],
                    |scratch, v| squares_at(graph, v, scratch),
                )
                .collect(),
            other => (0..n)
                .map(|v| other.count_at(graph, v))
                .collect::<Result<_>>()?,
        })
    }
}

fn choose2(d: u64) -> u64 {
    d * d.saturating_sub(1) / 2
}

fn choose3(d: u64) -> u64 {
    if d < 3 {
        return 0;
    }
    d * (d - 1) * (d - 2) / 6
}

fn cherry_at(graph: &Graph, v: usize) -> u64 {
    graph
        .neighbors(v)
        .iter()
        .map(|&a| graph.degree(a) as u64 - 1)
        .sum()
}

/// Size of the intersection of two sorted lists.
fn intersect_len(a: &[usize], b: &[usize]) -> u64 {
    let (mut x, mut y, mut c) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                x += 1;
                y += 1;
            }
        }
    }
    c
}

fn triangles_at(graph: &Graph, v: usize) -> u64 {
    let nv = graph.neighbors(v);
    let twice: u64 = nv
        .iter()
        .map(|&a| intersect_len(nv, graph.neighbors(a)))
        .sum();
    twice / 2
}

/// Per-vertex triangle counts with degree-ordered forward adjacency: each
/// triangle is found once, from its lowest-ranked vertex.
fn triangles_all(graph: &Graph) -> Vec<u64> {
    let n = graph.n();
    let rank = |v: usize| (graph.degree(v), v);
    let forward: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| rank(u) > rank(v))
                .collect()
        })
        .collect();
    let mut counts = vec![0u64; n];
    let mut mark = vec![false; n];
    for u in 0..n {
        for &w in &forward[u] {
            mark[w] = true;
        }
        for &v in &forward[u] {
            for &w in &forward[v] {
                if mark[w] {
                    counts[u] += 1;
                    counts[v] += 1;
                    counts[w] += 1;
                }
            }
        }
        for &w in &forward[u] {
            mark[w] = false;
        }
    }
    counts
}

/// Squares through `v`: for each vertex `w` opposite to `v`, any two common
/// neighbours close a square. `scratch` must be zeroed and is left zeroed.
fn squares_at(graph: &Graph, v: usize, scratch: &mut [u32]) -> u64 {
    let mut touched = Vec::new();
    for &a in graph.neighbors(v) {
        for &w in graph.neighbors(a) {
            if w == v {
                continue;
            }
            if scratch[w] == 0 {
                touched.push(w);
            }
            scratch[w] += 1;
        }
    }
    let mut total = 0u64;
    for w in touched {
        total += choose2(scratch[w] as u64);
        scratch[w] = 0;
    }
    total
}
