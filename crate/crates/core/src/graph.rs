//! Labeled simple undirected graphs on `0..n` and the G(n, p) sampler.
//!
//! Adjacency is stored as sorted neighbor arrays. That keeps common-neighbor
//! queries a linear merge and BFS cache friendly, which is what the
//! fingerprinting passes spend most of their time on.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Above this edge probability the sampler draws one Bernoulli per pair;
/// at or below it, it skips geometrically over the pair sequence.
pub const DENSE_SAMPLING_THRESHOLD: f64 = 0.1;

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, validating endpoints. Duplicate edges
    /// are merged; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::param(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    /// Trusted constructor for adjacency lists already known to be sorted,
    /// symmetric and loop-free.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(Graph { adj: adj.clone() }.check_invariants().is_ok());
        Graph { adj }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|v| (0..n).filter(|&w| w != v).collect())
            .collect();
        Graph { adj }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n >= 3 {
            edges.push((0, n - 1));
        }
        Graph::from_edges(n, &edges).expect("cycle edges are valid")
    }

    /// Star with hub 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::from_edges(leaves + 1, &edges).expect("star edges are valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Verifies symmetry, sortedness, range and absence of loops.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        for (u, list) in self.adj.iter().enumerate() {
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvariantViolation(format!(
                        "neighbors of {u} not strictly ascending"
                    )));
                }
            }
            for &v in list {
                if v >= n {
                    return Err(Error::InvariantViolation(format!(
                        "neighbor {v} of {u} out of range"
                    )));
                }
                if v == u {
                    return Err(Error::InvariantViolation(format!("self-loop at {u}")));
                }
                if self.adj[v].binary_search(&u).is_err() {
                    return Err(Error::InvariantViolation(format!(
                        "edge ({u}, {v}) is not symmetric"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Applies a relabeling: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::param("permutation length differs from n"));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (u, list) in self.adj.iter().enumerate() {
            adj[perm[u]] = list.iter().map(|&v| perm[v]).collect();
            adj[perm[u]].sort_unstable();
        }
        Ok(Graph { adj })
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            Err(Error::param(format!(
                "vertex {v} out of range for n = {}",
                self.n()
            )))
        } else {
            Ok(())
        }
    }

    /// BFS distances from `v`; `None` marks unreachable vertices.
    pub fn distances_from(&self, v: usize) -> Result<Vec<Option<usize>>> {
        self.check_vertex(v)?;
        let raw = self.bfs(v, usize::MAX);
        Ok(raw
            .into_iter()
            .map(|d| (d != usize::MAX).then_some(d))
            .collect())
    }

    /// Raw BFS from `source`, stopping at depth `max_depth`. Unreached
    /// vertices hold `usize::MAX`.
    pub(crate) fn bfs(&self, source: usize, max_depth: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du == max_depth {
                continue;
            }
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices at distance at most `radius` from `v`, ascending.
    pub fn ball(&self, v: usize, radius: usize) -> Result<Vec<usize>> {
        self.check_vertex(v)?;
        let dist = self.bfs(v, radius);
        Ok((0..self.n()).filter(|&w| dist[w] != usize::MAX).collect())
    }

    /// Induced subgraph on `vs`. The i-th entry of `vs` becomes vertex `i`;
    /// the returned map sends original ids to new ids.
    pub fn induced_subgraph(&self, vs: &[usize]) -> Result<(Graph, HashMap<usize, usize>)> {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vs.iter().enumerate() {
            self.check_vertex(v)?;
            if local[v] != usize::MAX {
                return Err(Error::param(format!("vertex {v} listed twice")));
            }
            local[v] = i;
        }
        let sub = self.induced_with_index(vs, &local);
        let map = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Ok((sub, map))
    }

    /// Induced subgraph given a precomputed old -> new index (`usize::MAX`
    /// for vertices outside the set).
    pub(crate) fn induced_with_index(&self, vs: &[usize], local: &[usize]) -> Graph {
        let adj = vs
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&w| {
                        let l = local[w];
                        (l != usize::MAX).then_some(l)
                    })
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        Graph { adj }
    }

    /// Largest BFS distance over all pairs; `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for v in 0..self.n() {
            for d in self.bfs(v, usize::MAX) {
                if d == usize::MAX {
                    return None;
                }
                best = best.max(d);
            }
        }
        Some(best)
    }

    /// Whether every pair of distinct vertices is adjacent or shares a
    /// neighbor, i.e. whether the diameter is at most 2. Uses bitsets, so it
    /// is much cheaper than [`Graph::diameter`] on dense graphs.
    pub fn within_distance_two(&self) -> bool {
        let n = self.n();
        let words = n.div_ceil(64);
        let rows: Vec<Vec<u64>> = self
            .adj
            .iter()
            .map(|list| {
                let mut row = vec![0u64; words];
                for &w in list {
                    row[w / 64] |= 1 << (w % 64);
                }
                row
            })
            .collect();
        let mut reach = vec![0u64; words];
        for v in 0..n {
            reach.copy_from_slice(&rows[v]);
            reach[v / 64] |= 1 << (v % 64);
            for &w in &self.adj[v] {
                for (r, x) in reach.iter_mut().zip(&rows[w]) {
                    *r |= x;
                }
            }
            let full = (0..words).all(|i| {
                let want = if i + 1 == words && !n.is_multiple_of(64) {
                    (1u64 << (n % 64)) - 1
                } else {
                    u64::MAX
                };
                reach[i] == want
            });
            if !full {
                return false;
            }
        }
        true
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::param("common_neighbors requires u != v"));
        }
        Ok(sorted_intersection(&self.adj[u], &self.adj[v]))
    }

    /// Text fixture format: `n m` then one `u v` line per edge with `u < v`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))?;
        let (n, m) = parse_pair(header, 1)?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (u, v) = parse_pair(line, lineno)?;
            if u >= v {
                return Err(Error::parse(lineno, "edge must satisfy u < v"));
            }
            if v >= n {
                return Err(Error::parse(lineno, format!("vertex {v} out of range")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::parse(
                1,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        let g = Graph::from_edges(n, &edges)?;
        if g.edge_count() != m {
            return Err(Error::parse(1, "duplicate edges"));
        }
        Ok(g)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::from_text(&text)
    }
}

pub(crate) fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_ascii_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::parse(lineno, "expected two integers"))?
            .parse()
            .map_err(|_| Error::parse(lineno, "expected a non-negative integer"))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::parse(lineno, "trailing tokens"));
    }
    Ok((a, b))
}

/// Merge-intersection of two ascending slices.
pub(crate) fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Edge probability, either given directly or as `p = n^(-alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeProb {
    Alpha(f64),
    P(f64),
}

/// Parameters of one G(n, p) draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErParams {
    pub n: usize,
    pub prob: EdgeProb,
    pub seed: u64,
}

impl ErParams {
    pub fn with_alpha(n: usize, alpha: f64, seed: u64) -> Self {
        ErParams {
            n,
            prob: EdgeProb::Alpha(alpha),
            seed,
        }
    }

    pub fn with_p(n: usize, p: f64, seed: u64) -> Self {
        ErParams {
            n,
            prob: EdgeProb::P(p),
            seed,
        }
    }

    /// Edge probability, `exp(-alpha ln n)` in the alpha form. For small `n`
    /// and alpha near 0 this is close to 1; near 1 it is close to `1/n`.
    pub fn p(&self) -> f64 {
        match self.prob {
            EdgeProb::P(p) => p,
            EdgeProb::Alpha(alpha) => alpha_to_p(self.n, alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        if let EdgeProb::Alpha(alpha) = self.prob {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::param(format!("alpha = {alpha} outside (0, 1)")));
            }
        }
        let p = self.p();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("p = {p} outside [0, 1]")));
        }
        Ok(())
    }
}

pub fn alpha_to_p(n: usize, alpha: f64) -> f64 {
    (-alpha * (n as f64).ln()).exp()
}

/// Samples G(n, p). Pairs `(i, j)`, `i < j`, are visited in lexicographic
/// order from a ChaCha8 stream seeded with `params.seed`, so a seed gives the
/// same graph on every platform. For `p > 0.1` each pair consumes one uniform
/// draw; otherwise each draw gives a geometric skip to the next present pair.
pub fn sample_er(params: &ErParams) -> Result<Graph> {
    params.validate()?;
    let n = params.n;
    let p = params.p();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut adj = vec![Vec::new(); n];
    if p <= 0.0 || n < 2 {
        return Ok(Graph { adj });
    }

    let push = |i: usize, j: usize, adj: &mut Vec<Vec<usize>>| {
        adj[i].push(j);
        adj[j].push(i);
    };

    if p > DENSE_SAMPLING_THRESHOLD {
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < p {
                    push(i, j, &mut adj);
                }
            }
        }
    } else {
        let log_q = (-p).ln_1p();
        let (mut i, mut j) = (0usize, 1usize);
        loop {
            let u: f64 = rng.gen();
            let skip = ((-u).ln_1p() / log_q).floor();
            // Advance (i, j) by `skip` pairs, row by row.
            let mut remaining = if skip.is_finite() && skip < (n * n) as f64 {
                skip as usize
            } else {
                break;
            };
            while i < n - 1 && j + remaining >= n {
                remaining -= n - j;
                i += 1;
                j = i + 1;
            }
            if i >= n - 1 {
                break;
            }
            j += remaining;
            push(i, j, &mut adj);
            j += 1;
            if j == n {
                i += 1;
                j = i + 1;
                if i >= n - 1 {
                    break;
                }
            }
        }
    }
    // Pairs are emitted in lexicographic order, so each row is sorted except
    // for back-references, which also arrive in ascending order.
    for list in &mut adj {
        debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
    }
    Ok(Graph { adj })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Graph {
        Graph::complete(4)
    }

    #[test]
    fn sampler_extremes() {
        let g = sample_er(&ErParams::with_p(4, 0.0, 9)).unwrap();
        assert_eq!(g, Graph::empty(4));
        let g = sample_er(&ErParams::with_p(4, 1.0, 9)).unwrap();
        assert_eq!(g, k4());
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn sampler_rejects_bad_params() {
        assert!(sample_er(&ErParams::with_p(0, 0.5, 1)).is_err());
        assert!(sample_er(&ErParams::with_p(5, 1.5, 1)).is_err());
        assert!(sample_er(&ErParams::with_p(5, -0.1, 1)).is_err());
        assert!(sample_er(&ErParams::with_alpha(5, 1.0, 1)).is_err());
    }

    #[test]
    fn sampler_is_deterministic_and_valid() {
        for &p in &[0.02, 0.1, 0.3] {
            let a = sample_er(&ErParams::with_p(150, p, 42)).unwrap();
            let b = sample_er(&ErParams::with_p(150, p, 42)).unwrap();
            assert_eq!(a, b);
            a.check_invariants().unwrap();
            let c = sample_er(&ErParams::with_p(150, p, 43)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn alpha_to_p_matches_power() {
        let p = alpha_to_p(300, 0.25);
        assert!((p - 300f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn sparse_path_reaches_last_pair() {
        // With p = 0.1 on n = 3 every pair is reachable; over many seeds
        // each of the 3 pairs must show up.
        let mut seen = [false; 3];
        for seed in 0..500 {
            let g = sample_er(&ErParams::with_p(3, 0.1, seed)).unwrap();
            for (u, v) in g.edges() {
                seen[u + v - 1] = true;
            }
        }
        assert_eq!(seen, [true; 3]);
    }

    #[test]
    fn distances() {
        let path = Graph::path(3);
        assert_eq!(
            path.distances_from(0).unwrap(),
            vec![Some(0), Some(1), Some(2)]
        );
        assert_eq!(
            k4().distances_from(2).unwrap(),
            vec![Some(1), Some(1), Some(0), Some(1)]
        );
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            two.distances_from(0).unwrap(),
            vec![Some(0), Some(1), None, None]
        );
        assert!(two.distances_from(4).is_err());
    }

    #[test]
    fn induced() {
        let (sub, map) = k4().induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(sub, Graph::complete(3));
        assert_eq!(map.len(), 3);
        let (sub, map) = k4().induced_subgraph(&[]).unwrap();
        assert_eq!(sub.n(), 0);
        assert!(map.is_empty());
        let (sub, _) = Graph::cycle(5).induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(sub, Graph::path(3));
    }

    #[test]
    fn diameters() {
        assert_eq!(Graph::complete(5).diameter(), Some(1));
        assert_eq!(Graph::path(3).diameter(), Some(2));
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(two.diameter(), None);
        assert_eq!(Graph::empty(1).diameter(), Some(0));
    }

    #[test]
    fn common() {
        assert_eq!(k4().common_neighbors(0, 1).unwrap(), vec![2, 3]);
        assert_eq!(Graph::path(3).common_neighbors(0, 2).unwrap(), vec![1]);
        assert!(Graph::path(4).common_neighbors(1, 2).unwrap().is_empty());
        assert!(k4().common_neighbors(1, 1).is_err());
    }

    #[test]
    fn text_round_trip_and_errors() {
        let g = sample_er(&ErParams::with_p(30, 0.2, 5)).unwrap();
        let text = g.to_text();
        assert_eq!(Graph::from_text(&text).unwrap(), g);
        assert!(Graph::from_text("3 1\n1 0\n").is_err());
        assert!(Graph::from_text("3 2\n0 1\n").is_err());
        match Graph::from_text("3 1\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
