//! Small rooted graphs: canonical labeling, root-preserving automorphisms,
//! complete-graph counts and the balance parameters `m(F)` and `gamma(F)`.
//!
//! Motifs are tiny, so isomorphism questions are answered by exhaustive
//! search over root-preserving permutations. The search only permutes
//! vertices within classes of an isomorphism invariant (adjacency to the
//! root, degree, neighbor degrees), which keeps it cheap up to order 10.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Reduced non-negative rational.
pub type Ratio = num_rational::Ratio<u64>;

/// Largest order accepted by the brute-force canonicalization.
pub const MAX_BRUTE_FORCE_ORDER: usize = 10;

const MAX_ORDER: usize = 16;

/// A connected graph with a distinguished root.
///
/// The root is always stored at index 0: constructors that receive another
/// root swap it into place, which is a rooted isomorphism.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RootedMotif {
    adj: Vec<u16>,
}

/// JSON record for a motif: `{"order": 3, "root": 0, "edges": [[0,1],[1,2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifSpec {
    pub order: usize,
    #[serde(default)]
    pub root: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Canonical code of a rooted motif. Two motifs are rooted-isomorphic iff
/// their codes are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalCode {
    order: u8,
    bits: u64,
}

#[inline]
fn pair_index(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    b * (b - 1) / 2 + a
}

impl RootedMotif {
    /// Build a motif of `order` vertices rooted at `root`.
    pub fn new(order: usize, root: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidMotif(
                "a motif needs at least two vertices and one edge".into(),
            ));
        }
        if order > MAX_ORDER {
            return Err(Error::MotifTooLarge {
                order,
                limit: MAX_ORDER,
            });
        }
        if root >= order {
            return Err(Error::InvalidMotif(format!(
                "root {root} is not a vertex of a motif of order {order}"
            )));
        }
        let swap = |v: usize| {
            if v == root {
                0
            } else if v == 0 {
                root
            } else {
                v
            }
        };
        let mut adj = vec![0u16; order];
        for &(a, b) in edges {
            if a >= order || b >= order {
                return Err(Error::InvalidMotif(format!(
                    "edge ({a}, {b}) out of range for order {order}"
                )));
            }
            if a == b {
                return Err(Error::InvalidMotif(format!("self-loop at {a}")));
            }
            let (a, b) = (swap(a), swap(b));
            if adj[a] & (1 << b) != 0 {
                return Err(Error::InvalidMotif(format!("duplicate edge ({a}, {b})")));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        let motif = RootedMotif { adj };
        if !motif.is_connected() {
            return Err(Error::InvalidMotif("motif is not connected".into()));
        }
        Ok(motif)
    }

    /// Motif rooted at vertex 0.
    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(order, 0, edges)
    }

    pub fn from_spec(spec: &MotifSpec) -> Result<Self> {
        let edges: Vec<(usize, usize)> = spec.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(spec.order, spec.root, &edges)
    }

    pub fn to_spec(&self) -> MotifSpec {
        MotifSpec {
            order: self.order(),
            root: 0,
            edges: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.adj.len()
    }

    /// Index of the root vertex (always 0).
    #[inline]
    pub fn root(&self) -> usize {
        0
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    #[inline]
    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a] & (1 << b) != 0
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.order();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.is_adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Host-graph view of the motif (root is vertex 0).
    pub fn to_graph(&self) -> Graph {
        Graph::from_edges(self.order(), self.edges()).expect("motif edges are valid")
    }

    fn is_connected(&self) -> bool {
        let full: u32 = (1u32 << self.order()) - 1;
        let mut seen: u32 = 1;
        let mut frontier: u32 = 1;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = (self.adj[v] as u32) & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == full
    }

    fn check_brute_force(&self) -> Result<()> {
        if self.order() > MAX_BRUTE_FORCE_ORDER {
            return Err(Error::MotifTooLarge {
                order: self.order(),
                limit: MAX_BRUTE_FORCE_ORDER,
            });
        }
        Ok(())
    }

    /// Invariant used to restrict permutations: vertices can only be mapped
    /// onto vertices with an equal key.
    fn vertex_key(&self, v: usize) -> (bool, usize, Vec<usize>) {
        let mut nd: Vec<usize> = (0..self.order())
            .filter(|&u| self.is_adjacent(v, u))
            .map(|u| self.degree(u))
            .collect();
        nd.sort_unstable_by(|a, b| b.cmp(a));
        (self.is_adjacent(0, v), self.degree(v), nd)
    }

    /// Non-root vertices sorted by key (descending) and the cell id of each
    /// position `1..order`.
    fn cells(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.order();
        let mut verts: Vec<usize> = (1..n).collect();
        let keys: Vec<_> = (0..n).map(|v| self.vertex_key(v)).collect();
        verts.sort_by(|&a, &b| keys[b].cmp(&keys[a]).then(a.cmp(&b)));
        let mut cell_of_pos = vec![0; n];
        let mut cell = 0;
        for p in 1..n {
            if p > 1 && keys[verts[p - 1]] != keys[verts[p - 2]] {
                cell += 1;
            }
            cell_of_pos[p] = cell;
        }
        let mut cell_members = vec![0; n];
        cell_members[1..n].copy_from_slice(&verts[..n - 1]);
        (cell_members, cell_of_pos)
    }

    /// Canonical code and the labeling achieving it (`perm[p]` is the vertex
    /// placed at position `p`).
    fn canonical_search(&self) -> (CanonicalCode, Vec<usize>) {
        let n = self.order();
        let total = n * (n - 1) / 2;
        let (members, cell_of_pos) = self.cells();
        // vertices available for each position
        let candidates: Vec<Vec<usize>> = (0..n)
            .map(|p| {
                if p == 0 {
                    vec![0]
                } else {
                    (1..n)
                        .filter(|&q| cell_of_pos[q] == cell_of_pos[p])
                        .map(|q| members[q])
                        .collect()
                }
            })
            .collect();

        struct Search<'a> {
            motif: &'a RootedMotif,
            n: usize,
            total: usize,
            candidates: Vec<Vec<usize>>,
            perm: Vec<usize>,
            used: u16,
            best: Option<u64>,
            best_perm: Vec<usize>,
        }

        impl Search<'_> {
            fn prefix_mask(&self, placed: usize) -> u64 {
                let len = placed * (placed - 1) / 2;
                if len == 0 {
                    return 0;
                }
                let ones = (1u64 << len) - 1;
                ones << (self.total - len)
            }

            fn go(&mut self, p: usize, bits: u64) {
                if p == self.n {
                    if self.best.is_none_or(|b| bits < b) {
                        self.best = Some(bits);
                        self.best_perm = self.perm.clone();
                    }
                    return;
                }
                for ci in 0..self.candidates[p].len() {
                    let v = self.candidates[p][ci];
                    if self.used & (1 << v) != 0 {
                        continue;
                    }
                    let mut next = bits;
                    for q in 0..p {
                        if self.motif.is_adjacent(self.perm[q], v) {
                            next |= 1u64 << (self.total - 1 - pair_index(q, p));
                        }
                    }
                    if let Some(best) = self.best {
                        let mask = self.prefix_mask(p + 1);
                        if next & mask > best & mask {
                            continue;
                        }
                    }
                    self.perm[p] = v;
                    self.used |= 1 << v;
                    self.go(p + 1, next);
                    self.used &= !(1 << v);
                }
            }
        }

        let mut search = Search {
            motif: self,
            n,
            total,
            candidates,
            perm: vec![0; n],
            used: 1,
            best: None,
            best_perm: Vec::new(),
        };
        search.go(1, 0);
        let bits = search.best.expect("at least one labeling exists");
        (
            CanonicalCode {
                order: n as u8,
                bits,
            },
            search.best_perm,
        )
    }

    /// Canonical code; equal codes mean rooted-isomorphic motifs.
    pub fn canonical_code(&self) -> Result<CanonicalCode> {
        self.check_brute_force()?;
        Ok(self.canonical_search().0)
    }

    /// Canonical relabeling with the root at index 0.
    pub fn canonical_form(&self) -> Result<RootedMotif> {
        self.check_brute_force()?;
        let (_, perm) = self.canonical_search();
        Ok(self.permuted(&perm))
    }

    /// Motif whose vertex `p` is this motif's vertex `perm[p]`.
    fn permuted(&self, perm: &[usize]) -> RootedMotif {
        let n = self.order();
        let mut pos = vec![0; n];
        for (p, &v) in perm.iter().enumerate() {
            pos[v] = p;
        }
        let mut adj = vec![0u16; n];
        for (p, &v) in perm.iter().enumerate() {
            let mut mask = 0u16;
            for u in 0..n {
                if self.is_adjacent(v, u) {
                    mask |= 1 << pos[u];
                }
            }
            adj[p] = mask;
        }
        RootedMotif { adj }
    }

    /// Rooted isomorphism test.
    pub fn is_equivalent(&self, other: &RootedMotif) -> Result<bool> {
        if self.order() != other.order() || self.edge_count() != other.edge_count() {
            return Ok(false);
        }
        Ok(self.canonical_code()? == other.canonical_code()?)
    }

    /// Order of the root-preserving automorphism group.
    pub fn aut_count(&self) -> Result<u64> {
        self.check_brute_force()?;
        let n = self.order();
        let keys: Vec<_> = (0..n).map(|v| self.vertex_key(v)).collect();

        fn go(m: &RootedMotif, keys: &[(bool, usize, Vec<usize>)], image: &mut Vec<usize>, used: u16) -> u64 {
            let v = image.len();
            if v == m.order() {
                return 1;
            }
            let mut total = 0;
            for w in 1..m.order() {
                if used & (1 << w) != 0 || keys[w] != keys[v] {
                    continue;
                }
                let consistent = (0..v).all(|u| m.is_adjacent(u, v) == m.is_adjacent(image[u], w));
                if consistent {
                    image.push(w);
                    total += go(m, keys, image, used | (1 << w));
                    image.pop();
                }
            }
            total
        }

        let mut image = vec![0];
        Ok(go(self, &keys, &mut image, 1))
    }

    /// Number of copies rooted at a fixed vertex of `K_n`:
    /// `(n-1)(n-2)...(n-|F|+1) / aut(F)`, or 0 when `n < |F|`.
    pub fn count_in_complete(&self, n: usize) -> Result<u128> {
        if n < self.order() {
            return Ok(0);
        }
        let placements = falling_factorial(n as u64 - 1, self.order() - 1).ok_or(Error::Overflow)?;
        let aut = self.aut_count()? as u128;
        if placements % aut != 0 {
            return Err(Error::Invariant(format!(
                "aut {aut} does not divide {placements}"
            )));
        }
        Ok(placements / aut)
    }

    /// `m(F) = max e(H)/(|H|-1)` over subgraphs `H` containing the root with
    /// at least two vertices. Induced subgraphs attain the maximum.
    pub fn m_parameter(&self) -> Ratio {
        let n = self.order();
        let mut best = Ratio::new(0, 1);
        for mask in 1u32..(1u32 << (n - 1)) {
            let set = (mask << 1) | 1;
            let edges = self.edges_within(set);
            let r = Ratio::new(edges as u64, mask.count_ones() as u64);
            if r > best {
                best = r;
            }
        }
        best
    }

    /// `gamma(F) = max e(H)/(|H|-1)` over subgraphs `H` avoiding the root with
    /// at least two vertices. Undefined when `|F| < 3`.
    pub fn gamma_parameter(&self) -> Result<Ratio> {
        let n = self.order();
        if n < 3 {
            return Err(Error::Undefined("gamma"));
        }
        let mut best = Ratio::new(0, 1);
        for mask in 1u32..(1u32 << (n - 1)) {
            let size = mask.count_ones() as u64;
            if size < 2 {
                continue;
            }
            let edges = self.edges_within(mask << 1);
            let r = Ratio::new(edges as u64, size - 1);
            if r > best {
                best = r;
            }
        }
        Ok(best)
    }

    fn edges_within(&self, set: u32) -> usize {
        let mut total = 0;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += ((self.adj[v] as u32) & set).count_ones() as usize;
        }
        total / 2
    }

    /// True when every edge touches the root or a neighbor of the root, so
    /// that all copies at a vertex `i` only use edges incident to `N[i]`.
    pub fn is_within_closed_neighborhood(&self) -> bool {
        let closed = self.adj[0] | 1;
        self.edges()
            .iter()
            .all(|&(a, b)| closed & (1 << a) != 0 || closed & (1 << b) != 0)
    }
}

impl fmt::Debug for RootedMotif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedMotif(order={}, edges={:?})", self.order(), self.edges())
    }
}

impl fmt::Display for RootedMotif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = catalog::name_of(self) {
            return f.write_str(name);
        }
        let edges: Vec<String> = self
            .edges()
            .iter()
            .map(|(a, b)| format!("{a}-{b}"))
            .collect();
        write!(f, "[{}|{}]", self.order(), edges.join(","))
    }
}

impl Serialize for RootedMotif {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RootedMotif {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = MotifSpec::deserialize(d)?;
        RootedMotif::from_spec(&spec).map_err(serde::de::Error::custom)
    }
}

/// `n (n-1) ... (n-k+1)`, `None` on overflow.
pub fn falling_factorial(n: u64, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for t in 0..k as u64 {
        if t > n {
            return Some(0);
        }
        acc = acc.checked_mul((n - t) as u128)?;
    }
    Some(acc)
}

/// Named motifs. All are rooted at vertex 0.
pub mod catalog {
    use super::RootedMotif;

    /// Canonical names, in display order.
    pub const NAMES: &[&str] = &[
        "edge",
        "cherry",
        "2-star",
        "triangle",
        "square",
        "3-star",
        "tripod",
        "shovel",
        "diamond",
        "bowtie",
        "two-cherries",
        "triangle-cherry",
    ];

    fn make(order: usize, edges: &[(usize, usize)]) -> RootedMotif {
        RootedMotif::from_edges(order, edges).expect("catalog motif is valid")
    }

    pub fn edge() -> RootedMotif {
        make(2, &[(0, 1)])
    }

    /// Path of length two rooted at an end.
    pub fn cherry() -> RootedMotif {
        make(3, &[(0, 1), (1, 2)])
    }

    /// Path of length two rooted at its center.
    pub fn two_star() -> RootedMotif {
        make(3, &[(0, 1), (0, 2)])
    }

    pub fn triangle() -> RootedMotif {
        make(3, &[(0, 1), (0, 2), (1, 2)])
    }

    /// Rooted 4-cycle.
    pub fn square() -> RootedMotif {
        make(4, &[(0, 1), (1, 2), (2, 3), (0, 3)])
    }

    pub fn three_star() -> RootedMotif {
        make(4, &[(0, 1), (0, 2), (0, 3)])
    }

    /// Root attached to a hub carrying two leaves.
    pub fn tripod() -> RootedMotif {
        make(4, &[(0, 1), (1, 2), (1, 3)])
    }

    /// Triangle with a pendant edge on a non-root vertex.
    pub fn shovel() -> RootedMotif {
        make(4, &[(0, 1), (0, 2), (1, 2), (1, 3)])
    }

    /// Two triangles sharing an edge that contains the root.
    pub fn diamond() -> RootedMotif {
        make(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    }

    /// Two triangles sharing only the root.
    pub fn bowtie() -> RootedMotif {
        make(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
    }

    /// Two cherries glued at the root.
    pub fn two_cherries() -> RootedMotif {
        make(5, &[(0, 1), (1, 2), (0, 3), (3, 4)])
    }

    /// A triangle and a cherry glued at the root.
    pub fn triangle_cherry() -> RootedMotif {
        make(5, &[(0, 1), (0, 2), (1, 2), (0, 3), (3, 4)])
    }

    /// Look up a motif by name or common alias.
    pub fn by_name(name: &str) -> Option<RootedMotif> {
        let m = match name.trim().to_ascii_lowercase().as_str() {
            "edge" => edge(),
            "cherry" | "2-path" | "path" => cherry(),
            "2-star" | "two-star" | "wedge" => two_star(),
            "triangle" => triangle(),
            "square" | "4-cycle" | "c4" => square(),
            "3-star" | "three-star" => three_star(),
            "tripod" => tripod(),
            "shovel" => shovel(),
            "diamond" => diamond(),
            "bowtie" => bowtie(),
            "two-cherries" => two_cherries(),
            "triangle-cherry" => triangle_cherry(),
            _ => return None,
        };
        Some(m)
    }

    /// Every named motif.
    pub fn all() -> Vec<(&'static str, RootedMotif)> {
        NAMES
            .iter()
            .map(|&n| (n, by_name(n).expect("catalog names resolve")))
            .collect()
    }

    /// Catalog name of a motif, if it is rooted-isomorphic to one.
    pub fn name_of(motif: &RootedMotif) -> Option<&'static str> {
        if motif.order() > 5 {
            return None;
        }
        let code = motif.canonical_code().ok()?;
        NAMES.iter().copied().find(|&n| {
            let m = by_name(n).expect("catalog names resolve");
            m.order() == motif.order()
                && m.edge_count() == motif.edge_count()
                && m.canonical_code().ok() == Some(code)
        })
    }
}
