//! Exact isomorphism certificates, degree neighborhoods and the
//! degree-neighborhood canonical labeling.
//!
//! A certificate is the lexicographically smallest relabeled edge list over
//! the leaves of an individualization-refinement search tree, computed per
//! connected component. Color refinement ranks vertices by
//! `(color, sorted neighbor colors)` until stable; the target cell is the
//! lowest-colored non-singleton cell. Both choices depend only on the
//! isomorphism type of the colored graph, so the set of leaf encodings is an
//! invariant and its minimum is canonical. Subtrees are skipped when a known
//! automorphism maps them onto an explored sibling, and the search backjumps
//! whenever a leaf reproduces the first or best leaf.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default bound on the number of vertices accepted by [`certificate`].
pub const DEFAULT_CERT_LIMIT: usize = 5000;

/// Canonical byte encoding of an (optionally vertex-colored) graph.
///
/// Equal certificates mean isomorphic graphs and vice versa. The byte layout
/// is internal; equality, ordering and hashing are the supported operations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate(Vec<u8>);

impl Certificate {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Certificate(")?;
        for b in self.0.iter().take(16) {
            write!(f, "{b:02x}")?;
        }
        if self.0.len() > 16 {
            write!(f, "..;{}B", self.0.len())?;
        }
        write!(f, ")")
    }
}

pub fn certificate(g: &Graph) -> Result<Certificate> {
    certificate_with_limit(g, DEFAULT_CERT_LIMIT)
}

pub fn certificate_with_limit(g: &Graph, limit: usize) -> Result<Certificate> {
    colored_certificate(g, &vec![0; g.n()], limit)
}

/// Certificate of `g` with `root` distinguished: equal iff there is an
/// isomorphism mapping one root to the other.
pub fn rooted_certificate(g: &Graph, root: usize, limit: usize) -> Result<Certificate> {
    if root >= g.n() {
        return Err(Error::param(format!("root {root} out of range")));
    }
    let mut colors = vec![1; g.n()];
    colors[root] = 0;
    colored_certificate(g, &colors, limit)
}

/// Certificate of a vertex-colored graph; isomorphisms must preserve colors.
pub fn colored_certificate(g: &Graph, colors: &[u32], limit: usize) -> Result<Certificate> {
    if colors.len() != g.n() {
        return Err(Error::param("color vector length differs from n"));
    }
    if g.n() > limit {
        return Err(Error::ResourceLimit {
            what: "certificate vertex count",
            actual: g.n(),
            limit,
        });
    }
    let mut parts: Vec<Vec<u8>> = components(g)
        .into_iter()
        .map(|comp| component_encoding(g, &comp, colors))
        .collect();
    parts.sort_unstable();

    let mut bytes = Vec::with_capacity(8 + parts.iter().map(Vec::len).sum::<usize>());
    push_u32(&mut bytes, g.n());
    push_u32(&mut bytes, parts.len());
    for p in parts {
        bytes.extend_from_slice(&p);
    }
    Ok(Certificate(bytes))
}

fn push_u32(buf: &mut Vec<u8>, x: usize) {
    buf.extend_from_slice(&(x as u32).to_le_bytes());
}

fn components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut comp = Vec::new();
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Self-delimiting encoding of one component: vertex count, edge count, the
/// colors in canonical order, then the canonical edge list.
fn component_encoding(g: &Graph, comp: &[usize], colors: &[u32]) -> Vec<u8> {
    let k = comp.len();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in comp.iter().enumerate() {
        local[v] = i;
    }
    let sub = g.induced_with_index(comp, &local);
    let sub_colors: Vec<u32> = comp.iter().map(|&v| colors[v]).collect();

    let edges = if k <= 2 {
        // At most one edge, and the color order fixes the labeling.
        sub.edges().map(|_| (0, 1)).collect()
    } else {
        Canonizer::new(&sub).canonical_edges(&sub_colors)
    };

    let mut sorted_colors = sub_colors;
    sorted_colors.sort_unstable();

    let mut buf = Vec::with_capacity(8 + 4 * k + 8 * edges.len());
    push_u32(&mut buf, k);
    push_u32(&mut buf, edges.len());
    for c in sorted_colors {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    for (a, b) in edges {
        buf.extend_from_slice(&a.to_le_bytes());
        buf.extend_from_slice(&b.to_le_bytes());
    }
    buf
}

struct Leaf {
    path: Vec<u32>,
    /// vertex -> canonical position
    lab: Vec<u32>,
    enc: Vec<(u32, u32)>,
}

struct Canonizer {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    first: Option<Leaf>,
    best_is_first: bool,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
    // refinement scratch
    nbr_colors: Vec<u32>,
    order: Vec<u32>,
}

impl Canonizer {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * g.edge_count());
        offsets.push(0);
        for v in 0..n {
            targets.extend(g.neighbors(v).iter().map(|&w| w as u32));
            offsets.push(targets.len());
        }
        Canonizer {
            n,
            nbr_colors: vec![0; targets.len()],
            offsets,
            targets,
            first: None,
            best_is_first: true,
            best: None,
            generators: Vec::new(),
            order: (0..n as u32).collect(),
        }
    }

    fn canonical_edges(mut self, initial: &[u32]) -> Vec<(u32, u32)> {
        let mut colors = dense_ranks(initial);
        self.refine(&mut colors);
        let mut path = Vec::new();
        self.search(colors, &mut path);
        let best = if self.best_is_first {
            self.first.take()
        } else {
            self.best.take()
        };
        best.expect("search visits at least one leaf").enc
    }

    /// Equitable refinement. `colors` must be dense ranks on entry and is
    /// dense ranks on exit.
    fn refine(&mut self, colors: &mut [u32]) {
        let n = self.n;
        let mut cells = count_distinct(colors);
        loop {
            if cells == n {
                return;
            }
            for v in 0..n {
                let (s, e) = (self.offsets[v], self.offsets[v + 1]);
                for i in s..e {
                    self.nbr_colors[i] = colors[self.targets[i] as usize];
                }
                self.nbr_colors[s..e].sort_unstable();
            }
            let offsets = &self.offsets;
            let nbr = &self.nbr_colors;
            let key_cmp = |a: u32, b: u32| -> Ordering {
                let (a, b) = (a as usize, b as usize);
                colors[a].cmp(&colors[b]).then_with(|| {
                    nbr[offsets[a]..offsets[a + 1]].cmp(&nbr[offsets[b]..offsets[b + 1]])
                })
            };
            self.order.sort_unstable_by(|&a, &b| key_cmp(a, b));
            let mut new = vec![0u32; n];
            let mut rank = 0u32;
            for i in 0..n {
                if i > 0 && key_cmp(self.order[i - 1], self.order[i]) != Ordering::Equal {
                    rank += 1;
                }
                new[self.order[i] as usize] = rank;
            }
            let new_cells = rank as usize + 1;
            colors.copy_from_slice(&new);
            if new_cells == cells {
                return;
            }
            cells = new_cells;
        }
    }

    fn target_cell(&self, colors: &[u32]) -> Option<Vec<u32>> {
        let mut counts = vec![0u32; self.n];
        for &c in colors {
            counts[c as usize] += 1;
        }
        let target = counts.iter().position(|&c| c > 1)? as u32;
        Some(
            (0..self.n as u32)
                .filter(|&v| colors[v as usize] == target)
                .collect(),
        )
    }

    /// Returns `Some(level)` to abandon the current subtree up to the node
    /// at depth `level`.
    fn search(&mut self, colors: Vec<u32>, path: &mut Vec<u32>) -> Option<usize> {
        let level = path.len();
        let Some(cell) = self.target_cell(&colors) else {
            return self.leaf(&colors, path);
        };
        let mut tried: Vec<u32> = Vec::new();
        for &v in &cell {
            if !tried.is_empty() && self.same_orbit_as_tried(v, &tried, path) {
                continue;
            }
            tried.push(v);
            let mut child: Vec<u32> = colors
                .iter()
                .enumerate()
                .map(|(w, &c)| 2 * c + u32::from(w as u32 != v))
                .collect();
            densify(&mut child);
            self.refine(&mut child);
            path.push(v);
            let jump = self.search(child, path);
            path.pop();
            if let Some(t) = jump {
                if t < level {
                    return Some(t);
                }
            }
        }
        None
    }

    fn same_orbit_as_tried(&self, v: u32, tried: &[u32], path: &[u32]) -> bool {
        let mut uf = UnionFind::new(self.n);
        let mut any = false;
        for gen in &self.generators {
            if path.iter().all(|&p| gen[p as usize] == p) {
                any = true;
                for (x, &y) in gen.iter().enumerate() {
                    uf.union(x, y as usize);
                }
            }
        }
        if !any {
            return false;
        }
        let root = uf.find(v as usize);
        tried.iter().any(|&t| uf.find(t as usize) == root)
    }

    fn leaf(&mut self, colors: &[u32], path: &[u32]) -> Option<usize> {
        let lab: Vec<u32> = colors.to_vec();
        let mut enc: Vec<(u32, u32)> = Vec::with_capacity(self.targets.len() / 2);
        for u in 0..self.n {
            for &w in &self.targets[self.offsets[u]..self.offsets[u + 1]] {
                if (w as usize) > u {
                    let (a, b) = (lab[u], lab[w as usize]);
                    enc.push((a.min(b), a.max(b)));
                }
            }
        }
        enc.sort_unstable();

        let Some(first) = &self.first else {
            self.first = Some(Leaf {
                path: path.to_vec(),
                lab,
                enc,
            });
            self.best_is_first = true;
            return None;
        };
        if enc == first.enc {
            let gen = automorphism(&first.lab, &lab);
            let jump = common_prefix(&first.path, path);
            self.generators.push(gen);
            return Some(jump);
        }
        let best = if self.best_is_first {
            first
        } else {
            self.best.as_ref().expect("best is set when not first")
        };
        match enc.cmp(&best.enc) {
            Ordering::Equal => {
                let gen = automorphism(&best.lab, &lab);
                let jump = common_prefix(&best.path, path);
                self.generators.push(gen);
                Some(jump)
            }
            Ordering::Less => {
                self.best = Some(Leaf {
                    path: path.to_vec(),
                    lab,
                    enc,
                });
                self.best_is_first = false;
                None
            }
            Ordering::Greater => None,
        }
    }
}

/// `gamma(v) = lab_a^{-1}(lab_b(v))`, an automorphism whenever both
/// labelings produce the same relabeled graph.
fn automorphism(lab_a: &[u32], lab_b: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; lab_a.len()];
    for (v, &p) in lab_a.iter().enumerate() {
        inv[p as usize] = v as u32;
    }
    lab_b.iter().map(|&p| inv[p as usize]).collect()
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut seen = vec![false; colors.len()];
    colors
        .iter()
        .filter(|&&c| !std::mem::replace(&mut seen[c as usize], true))
        .count()
}

fn dense_ranks(values: &[u32]) -> Vec<u32> {
    let mut out = values.to_vec();
    densify(&mut out);
    out
}

fn densify(values: &mut [u32]) {
    let mut distinct: Vec<u32> = values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for v in values.iter_mut() {
        *v = distinct.binary_search(v).expect("value present") as u32;
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Isomorphism test by certificate equality, with cheap invariant checks first.
pub fn is_isomorphic(g: &Graph, h: &Graph) -> bool {
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return false;
    }
    let (mut dg, mut dh) = (g.degrees(), h.degrees());
    dg.sort_unstable();
    dh.sort_unstable();
    if dg != dh {
        return false;
    }
    let limit = usize::MAX;
    certificate_with_limit(g, limit).expect("no limit") == certificate_with_limit(h, limit).expect("no limit")
}

/// Reference isomorphism test by plain backtracking over degree-compatible
/// assignments. Independent of the certificate machinery; meant for tests
/// on small graphs.
pub fn is_isomorphic_backtracking(g: &Graph, h: &Graph) -> bool {
    let n = g.n();
    if n != h.n() || g.edge_count() != h.edge_count() {
        return false;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn extend(
        g: &Graph,
        h: &Graph,
        order: &[usize],
        depth: usize,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for cand in 0..h.n() {
            if used[cand] || h.degree(cand) != g.degree(v) {
                continue;
            }
            let consistent = order[..depth]
                .iter()
                .all(|&u| g.has_edge(u, v) == h.has_edge(map[u], cand));
            if !consistent {
                continue;
            }
            map[v] = cand;
            used[cand] = true;
            if extend(g, h, order, depth + 1, map, used) {
                return true;
            }
            used[cand] = false;
            map[v] = usize::MAX;
        }
        false
    }

    extend(g, h, &order, 0, &mut map, &mut used)
}

/// A vertex's degree with the ascending multiset of its neighbors' degrees.
/// Ordered by degree first, then element-wise by the neighbor degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeNeighborhood {
    pub degree: usize,
    pub neighbor_degrees: Vec<usize>,
}

pub fn degree_neighborhood(g: &Graph, v: usize) -> Result<DegreeNeighborhood> {
    if v >= g.n() {
        return Err(Error::param(format!("vertex {v} out of range")));
    }
    let mut neighbor_degrees: Vec<usize> = g.neighbors(v).iter().map(|&w| g.degree(w)).collect();
    neighbor_degrees.sort_unstable();
    Ok(DegreeNeighborhood {
        degree: g.degree(v),
        neighbor_degrees,
    })
}

pub fn degree_neighborhoods(g: &Graph) -> Vec<DegreeNeighborhood> {
    (0..g.n())
        .map(|v| degree_neighborhood(g, v).expect("in range"))
        .collect()
}

/// Two vertices share a degree neighborhood, so sorting cannot order them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("vertices {first} and {second} have the same degree neighborhood")]
pub struct AmbiguityError {
    pub first: usize,
    pub second: usize,
}

/// Vertices sorted ascending by degree neighborhood. Fails when two
/// vertices tie, rather than breaking the tie arbitrarily.
pub fn canonical_labeling(g: &Graph) -> Result<Vec<usize>, AmbiguityError> {
    let dns = degree_neighborhoods(g);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| dns[a].cmp(&dns[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if dns[w[0]] == dns[w[1]] {
            return Err(AmbiguityError {
                first: w[0],
                second: w[1],
            });
        }
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_er, ErParams};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    }

    #[test]
    fn triangle_relabelings_share_certificate() {
        let k3 = Graph::complete(3);
        let c = certificate(&k3).unwrap();
        let relabeled = k3.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(c, certificate(&relabeled).unwrap());
        assert_ne!(c, certificate(&Graph::path(3)).unwrap());
    }

    #[test]
    fn limit_is_enforced() {
        let g = Graph::empty(11);
        assert!(matches!(
            certificate_with_limit(&g, 10),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(certificate_with_limit(&g, 11).is_ok());
    }

    #[test]
    fn regular_and_symmetric_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cases = [
            Graph::complete(7),
            Graph::cycle(12),
            Graph::empty(9),
            Graph::from_edges(6, &[(0, 1), (2, 3), (4, 5)]).unwrap(),
            // Petersen graph
            Graph::from_edges(
                10,
                &[
                    (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),
                    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
                    (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
                ],
            )
            .unwrap(),
        ];
        for g in cases {
            let c = certificate(&g).unwrap();
            for _ in 0..5 {
                let p = random_perm(g.n(), &mut rng);
                assert_eq!(c, certificate(&g.relabel(&p).unwrap()).unwrap());
            }
        }
        // C6 vs two triangles: both 2-regular on 6 vertices.
        let two_triangles =
            Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_ne!(
            certificate(&Graph::cycle(6)).unwrap(),
            certificate(&two_triangles).unwrap()
        );
        assert!(!is_isomorphic(&Graph::cycle(6), &two_triangles));
    }

    #[test]
    fn rooted_distinguishes_root_position() {
        let p = Graph::path(3);
        assert_eq!(
            rooted_certificate(&p, 0, 10).unwrap(),
            rooted_certificate(&p, 2, 10).unwrap()
        );
        assert_ne!(
            rooted_certificate(&p, 0, 10).unwrap(),
            rooted_certificate(&p, 1, 10).unwrap()
        );
    }

    #[test]
    fn sparse_random_graphs_with_many_twins() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..10 {
            let g = sample_er(&ErParams::with_p(150, 0.02, seed)).unwrap();
            let c = certificate(&g).unwrap();
            let p = random_perm(g.n(), &mut rng);
            assert_eq!(c, certificate(&g.relabel(&p).unwrap()).unwrap());
        }
    }

    #[test]
    fn isomorphic_examples() {
        let a = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let b = Graph::from_edges(4, &[(0, 2), (1, 3)]).unwrap();
        assert!(is_isomorphic(&a, &b));
        assert!(is_isomorphic_backtracking(&a, &b));
        assert!(!is_isomorphic(&Graph::complete(3), &Graph::path(3)));
        assert!(!is_isomorphic_backtracking(&Graph::complete(3), &Graph::path(3)));
    }

    #[test]
    fn degree_neighborhood_examples() {
        let star = Graph::star(3);
        let dn = degree_neighborhood(&star, 0).unwrap();
        assert_eq!((dn.degree, dn.neighbor_degrees), (3, vec![1, 1, 1]));
        let dn = degree_neighborhood(&star, 2).unwrap();
        assert_eq!((dn.degree, dn.neighbor_degrees), (1, vec![3]));
        let dn = degree_neighborhood(&Graph::complete(4), 1).unwrap();
        assert_eq!((dn.degree, dn.neighbor_degrees), (3, vec![3, 3, 3]));
        assert!(degree_neighborhood(&star, 4).is_err());
    }

    #[test]
    fn degree_neighborhood_order_is_degree_first() {
        let a = DegreeNeighborhood {
            degree: 2,
            neighbor_degrees: vec![5, 5],
        };
        let b = DegreeNeighborhood {
            degree: 3,
            neighbor_degrees: vec![1, 1, 1],
        };
        assert!(a < b);
    }

    #[test]
    fn canonical_labeling_on_path_is_ambiguous() {
        let err = canonical_labeling(&Graph::path(3)).unwrap_err();
        assert_eq!((err.first, err.second), (0, 2));
    }
}
