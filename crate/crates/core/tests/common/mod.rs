//! Brute-force references shared by the integration tests. Nothing here goes
//! through the library's canonical forms or embedding plans.

#![allow(dead_code)]

use rand::Rng;
use rootstat::rng;
use rootstat::{Graph, RootedMotif};

/// `G(n, p)` from a seeded stream.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng::chacha(seed, 900, n as u64);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// All permutations of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// `k`-subsets of `items`.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut with: Vec<Vec<usize>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], k));
    with
}

/// Whether the edge set `edges` on local vertices `0..k` (root 0) is a
/// rooted copy of `motif`, by trying every root-fixing bijection.
fn is_rooted_copy(edges: &[(usize, usize)], motif: &RootedMotif, perms: &[Vec<usize>]) -> bool {
    let k = motif.order();
    let mut adj = vec![vec![false; k]; k];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let medges = motif.edges();
    let root = motif.root();
    perms.iter().any(|p| p[root] == 0 && medges.iter().all(|&(a, b)| adj[p[a]][p[b]]))
}

/// Rooted copies of `motif` at `root`: every vertex set containing the root,
/// every edge subset of its induced subgraph with `e(F)` edges, tested for
/// rooted isomorphism.
pub fn subset_count(g: &Graph, root: usize, motif: &RootedMotif) -> u64 {
    let k = motif.order();
    let e = motif.edge_count();
    let perms = permutations(k);
    let others: Vec<usize> = (0..g.n()).filter(|&v| v != root).collect();
    let mut total = 0;
    for s in subsets(&others, k - 1) {
        let verts: Vec<usize> = std::iter::once(root).chain(s).collect();
        let mut induced = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if g.has_edge(verts[a], verts[b]) {
                    induced.push((a, b));
                }
            }
        }
        if induced.len() < e {
            continue;
        }
        for mask in 0u32..(1 << induced.len()) {
            if mask.count_ones() as usize != e {
                continue;
            }
            let chosen: Vec<(usize, usize)> =
                (0..induced.len()).filter(|&t| mask >> t & 1 == 1).map(|t| induced[t]).collect();
            if is_rooted_copy(&chosen, motif, &perms) {
                total += 1;
            }
        }
    }
    total
}

/// Injective edge-preserving maps of the unrooted motif into `g`.
pub fn embeddings(g: &Graph, motif: &RootedMotif) -> u64 {
    let k = motif.order();
    let edges = motif.edges();
    fn go(g: &Graph, edges: &[(usize, usize)], k: usize, map: &mut Vec<usize>) -> u64 {
        let d = map.len();
        if d == k {
            return 1;
        }
        let mut total = 0;
        for v in 0..g.n() {
            if map.contains(&v) {
                continue;
            }
            let ok = edges
                .iter()
                .all(|&(a, b)| !((a == d && b < d) || (b == d && a < d)) || g.has_edge(map[a.min(b)], v));
            if ok {
                map.push(v);
                total += go(g, edges, k, map);
                map.pop();
            }
        }
        total
    }
    go(g, &edges, k, &mut Vec::new())
}

/// Unrooted automorphisms of a motif by brute force.
pub fn unrooted_aut(motif: &RootedMotif) -> u64 {
    let edges = motif.edges();
    permutations(motif.order())
        .iter()
        .filter(|p| edges.iter().all(|&(a, b)| motif.is_adjacent(p[a], p[b])))
        .count() as u64
}
