//! Overlap sets `H_{F1,F2}`: every rooted graph that is the union of a copy
//! of `F1` and a copy of `F2` sharing the root, with the number `c_H` of
//! ordered copy pairs covering `H`. They turn products of rooted counts into
//! linear combinations:
//!
//! `X_F1(G,i) X_F2(G,i) = sum_H c_H X_H(G,i)`.
//!
//! Two independent computations of `c_H` are provided: a direct count of
//! covering pairs and an inductive subtraction over the containment order.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::census::{rooted_count, CountVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::motif::{CanonicalCode, RootedMotif, MAX_BRUTE_FORCE_ORDER};

/// One element of an overlap set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapEntry {
    pub motif: RootedMotif,
    pub coefficient: u64,
}

/// `H_{F1,F2}` with coefficients. Entries are sorted by decreasing order,
/// then decreasing edge count, then canonical code, so the gluing product
/// comes first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapSet {
    pub f1: RootedMotif,
    pub f2: RootedMotif,
    pub entries: Vec<OverlapEntry>,
}

impl OverlapSet {
    /// The gluing product entry `F1F2`.
    pub fn gluing(&self) -> &OverlapEntry {
        &self.entries[0]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coefficient of the class of `motif`, 0 when absent.
    pub fn coefficient_of(&self, motif: &RootedMotif) -> Result<u64> {
        let code = motif.canonical_code()?;
        for e in &self.entries {
            if e.motif.order() == motif.order() && e.motif.canonical_code()? == code {
                return Ok(e.coefficient);
            }
        }
        Ok(0)
    }

    /// Entries other than the gluing product.
    pub fn overlapping(&self) -> &[OverlapEntry] {
        &self.entries[1..]
    }
}

/// Disjoint union of `f1` and `f2` with the roots identified.
pub fn gluing_product(f1: &RootedMotif, f2: &RootedMotif) -> RootedMotif {
    let a = f1.order();
    let mut edges = f1.edges();
    let shift = |v: usize| if v == 0 { 0 } else { v + a - 1 };
    edges.extend(f2.edges().into_iter().map(|(x, y)| (shift(x), shift(y))));
    RootedMotif::new(a + f2.order() - 1, 0, &edges).expect("gluing of valid motifs is valid")
}

fn check_size(f1: &RootedMotif, f2: &RootedMotif) -> Result<()> {
    let order = f1.order() + f2.order() - 1;
    if order > MAX_BRUTE_FORCE_ORDER {
        return Err(Error::MotifTooLarge {
            order,
            limit: MAX_BRUTE_FORCE_ORDER,
        });
    }
    Ok(())
}

/// Distinct unions of a copy of `f1` and a copy of `f2` over a shared root.
///
/// `f1` is fixed on vertices `0..|F1|`; each non-root vertex of `f2` goes to
/// an unused vertex of `f1` or to a fresh vertex. Fresh vertices are numbered
/// in order, which visits every union up to relabeling.
fn candidate_unions(f1: &RootedMotif, f2: &RootedMotif) -> Result<BTreeMap<(usize, usize, CanonicalCode), RootedMotif>> {
    let a = f1.order();
    let b = f2.order();
    let f2_edges = f2.edges();
    let mut out = BTreeMap::new();
    let mut image = vec![0usize; b];

    fn go(
        v: usize,
        used: u32,
        next_fresh: usize,
        image: &mut [usize],
        ctx: &(&RootedMotif, &[(usize, usize)], usize),
        out: &mut BTreeMap<(usize, usize, CanonicalCode), RootedMotif>,
    ) -> Result<()> {
        let (f1, f2_edges, a) = *ctx;
        if v == image.len() {
            let mut edges = f1.edges();
            for &(x, y) in f2_edges {
                let (p, q) = (image[x].min(image[y]), image[x].max(image[y]));
                if !edges.contains(&(p, q)) {
                    edges.push((p, q));
                }
            }
            let h = RootedMotif::new(next_fresh, 0, &edges)?;
            let key = (h.order(), h.edge_count(), h.canonical_code()?);
            out.entry(key).or_insert_with(|| h);
            return Ok(());
        }
        for t in 1..a {
            if used & (1 << t) == 0 {
                image[v] = t;
                go(v + 1, used | (1 << t), next_fresh, image, ctx, out)?;
            }
        }
        image[v] = next_fresh;
        go(v + 1, used, next_fresh + 1, image, ctx, out)
    }

    go(1, 1, a, &mut image, &(f1, &f2_edges, a), &mut out)?;
    Ok(out)
}

/// Edge sets (as bitmasks over vertex pairs of `host`) of all copies of
/// `motif` in `host` with the roots matched.
fn copy_edge_sets(host: &RootedMotif, motif: &RootedMotif) -> HashSet<u64> {
    let n = host.order();
    let bit = |x: usize, y: usize| {
        let (p, q) = (x.min(y), x.max(y));
        1u64 << (q * (q - 1) / 2 + p)
    };
    let mut found = HashSet::new();
    let mut image = vec![0usize; motif.order()];

    fn go(
        v: usize,
        used: u32,
        image: &mut [usize],
        host: &RootedMotif,
        motif: &RootedMotif,
        n: usize,
        bit: &dyn Fn(usize, usize) -> u64,
        found: &mut HashSet<u64>,
    ) {
        if v == motif.order() {
            let mut mask = 0u64;
            for (x, y) in motif.edges() {
                mask |= bit(image[x], image[y]);
            }
            found.insert(mask);
            return;
        }
        for w in 1..n {
            if used & (1 << w) != 0 {
                continue;
            }
            if (0..v).all(|u| !motif.is_adjacent(u, v) || host.is_adjacent(image[u], w)) {
                image[v] = w;
                go(v + 1, used | (1 << w), image, host, motif, n, bit, found);
            }
        }
    }

    go(1, 1, &mut image, host, motif, n, &bit, &mut found);
    found
}

/// Number of ordered pairs of copies of `f1` and `f2` in `h` whose union is `h`.
pub fn covering_pairs(h: &RootedMotif, f1: &RootedMotif, f2: &RootedMotif) -> u64 {
    let full: u64 = copy_edge_sets(h, h).into_iter().next().unwrap_or(0);
    let c1 = copy_edge_sets(h, f1);
    let c2 = copy_edge_sets(h, f2);
    let mut total = 0;
    for &x in &c1 {
        for &y in &c2 {
            if x | y == full {
                total += 1;
            }
        }
    }
    total
}

fn sorted_entries(mut entries: Vec<((usize, usize, CanonicalCode), OverlapEntry)>) -> Vec<OverlapEntry> {
    entries.sort_by(|(ka, _), (kb, _)| kb.0.cmp(&ka.0).then(kb.1.cmp(&ka.1)).then(ka.2.cmp(&kb.2)));
    entries.into_iter().map(|(_, e)| e).collect()
}

/// `H_{F1,F2}` with `c_H` counted directly as covering copy pairs.
pub fn overlap_set(f1: &RootedMotif, f2: &RootedMotif) -> Result<OverlapSet> {
    check_size(f1, f2)?;
    let candidates = candidate_unions(f1, f2)?;
    let mut entries = Vec::with_capacity(candidates.len());
    for (key, h) in candidates {
        let c = covering_pairs(&h, f1, f2);
        if c == 0 {
            return Err(Error::Invariant(format!("union {h} has no covering pair")));
        }
        entries.push((key, OverlapEntry { motif: h.canonical_form()?, coefficient: c }));
    }
    Ok(OverlapSet {
        f1: f1.clone(),
        f2: f2.clone(),
        entries: sorted_entries(entries),
    })
}

/// `H_{F1,F2}` with `c_H` obtained bottom-up: visiting candidates by
/// increasing `(|H|, e(H), code)`, `c_H = X_F1(H) X_F2(H) - sum c_H' X_H'(H)`
/// over the classes already visited.
pub fn inductive_coefficients(f1: &RootedMotif, f2: &RootedMotif) -> Result<OverlapSet> {
    check_size(f1, f2)?;
    let candidates = candidate_unions(f1, f2)?;
    let mut done: Vec<((usize, usize, CanonicalCode), RootedMotif, u64)> = Vec::new();
    for (key, h) in candidates {
        let host = h.to_graph();
        let product = rooted_count(&host, 0, f1)? as i128 * rooted_count(&host, 0, f2)? as i128;
        let mut c = product;
        for (_, smaller, c_small) in &done {
            if smaller.order() <= h.order() && smaller.edge_count() <= h.edge_count() {
                c -= *c_small as i128 * rooted_count(&host, 0, smaller)? as i128;
            }
        }
        if c <= 0 {
            return Err(Error::Invariant(format!(
                "inductive coefficient {c} for {h} is not positive"
            )));
        }
        done.push((key, h, c as u64));
    }
    let entries = done
        .into_iter()
        .map(|(key, h, c)| Ok((key, OverlapEntry { motif: h.canonical_form()?, coefficient: c })))
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapSet {
        f1: f1.clone(),
        f2: f2.clone(),
        entries: sorted_entries(entries),
    })
}

/// Both sides of the product identity at one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductIdentity {
    pub vertex: usize,
    pub lhs: u128,
    pub rhs: u128,
    pub holds: bool,
}

/// `X_F1(G,i) X_F2(G,i)` against `sum_H c_H X_H(G,i)`.
pub fn verify_product_identity(
    graph: &Graph,
    vertex: usize,
    f1: &RootedMotif,
    f2: &RootedMotif,
) -> Result<ProductIdentity> {
    let set = overlap_set(f1, f2)?;
    let lhs = rooted_count(graph, vertex, f1)? as u128 * rooted_count(graph, vertex, f2)? as u128;
    let mut rhs = 0u128;
    for e in &set.entries {
        rhs += e.coefficient as u128 * rooted_count(graph, vertex, &e.motif)? as u128;
    }
    Ok(ProductIdentity {
        vertex,
        lhs,
        rhs,
        holds: lhs == rhs,
    })
}

/// The product identity at every vertex, reusing a precomputed overlap set.
pub fn verify_product_identity_all(graph: &Graph, set: &OverlapSet) -> Result<Vec<ProductIdentity>> {
    let x1 = CountVector::compute(graph, &set.f1)?;
    let x2 = CountVector::compute(graph, &set.f2)?;
    let xs = set
        .entries
        .iter()
        .map(|e| CountVector::compute(graph, &e.motif))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..graph.n())
        .map(|v| {
            let lhs = x1.counts[v] as u128 * x2.counts[v] as u128;
            let rhs = set
                .entries
                .iter()
                .zip(&xs)
                .map(|(e, x)| e.coefficient as u128 * x.counts[v] as u128)
                .sum();
            ProductIdentity {
                vertex: v,
                lhs,
                rhs,
                holds: lhs == rhs,
            }
        })
        .collect())
}
