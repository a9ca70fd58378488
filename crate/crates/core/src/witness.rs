//! Evidence against reconstruction: the same-neighborhoods relation, star
//! multiplicity reports, and a search for distinct graphs that share all
//! r-neighborhoods.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso::{rooted_certificate, Certificate, DEFAULT_CERT_LIMIT};
use crate::shotgun::validate_radius;

/// Certificate of the r-ball around `v` with `v` distinguished.
pub fn rooted_ball_certificate(g: &Graph, v: usize, radius: usize) -> Result<Certificate> {
    let ball = g.ball(v, radius)?;
    let (local, map) = g.induced_subgraph(&ball)?;
    rooted_certificate(&local, map[&v], DEFAULT_CERT_LIMIT)
}

/// Whether every vertex has isomorphic r-neighborhoods (center fixed) in
/// `g` and in `h`.
pub fn same_r_neighborhoods(g: &Graph, h: &Graph, radius: usize) -> Result<bool> {
    validate_radius(radius)?;
    if g.n() != h.n() {
        return Err(Error::param(format!(
            "graphs have different sizes {} and {}",
            g.n(),
            h.n()
        )));
    }
    if g.degrees() != h.degrees() {
        return Ok(false);
    }
    let mismatch = (0..g.n()).into_par_iter().try_fold(
        || false,
        |found, v| -> Result<bool> {
            Ok(found || rooted_ball_certificate(g, v, radius)? != rooted_ball_certificate(h, v, radius)?)
        },
    );
    let results: Vec<bool> = mismatch.collect::<Result<_>>()?;
    Ok(!results.into_iter().any(|m| m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarWitnessReport {
    pub n: usize,
    pub alpha: f64,
    /// `(alpha + 2/3) / 2`.
    pub beta: f64,
    /// Largest degree a counted star may have: `n^(1 - beta)`.
    pub max_star_degree: f64,
    /// Vertices whose 1-neighborhood is a star of degree at most
    /// `max_star_degree`, isolated vertices included.
    pub star_count: usize,
    /// Isolated vertices (stars of degree 0).
    pub isolated: usize,
    /// Degree at least 1 with the most stars; the smallest such on ties,
    /// 0 when there are none.
    pub best_degree: usize,
    pub multiplicity: usize,
    /// `n^beta / 2`.
    pub threshold: f64,
    pub passed: bool,
    /// Star counts per degree, degree-0 stars excluded.
    pub histogram: BTreeMap<usize, usize>,
}

impl StarWitnessReport {
    /// The counting step behind the report: when at least three quarters of
    /// the vertices are stars, some degree bucket (degree 0 included) holds
    /// at least `star_count / (n^(1-beta) + 1)` of them.
    pub fn pigeonhole_holds(&self) -> bool {
        let n = self.n as f64;
        if (self.star_count as f64) < 0.75 * n {
            return true;
        }
        let largest = self.multiplicity.max(self.isolated) as f64;
        largest >= self.star_count as f64 / (self.max_star_degree + 1.0)
    }
}

pub fn star_beta(alpha: f64) -> f64 {
    (alpha + 2.0 / 3.0) / 2.0
}

/// Whether the neighborhood of `v` has no edge between two neighbors.
pub fn is_star(g: &Graph, v: usize) -> bool {
    let nb = g.neighbors(v);
    nb.iter().all(|&a| {
        let na = g.neighbors(a);
        // merge-style check: na and nb share nothing
        let (mut i, mut j) = (0, 0);
        while i < na.len() && j < nb.len() {
            match na[i].cmp(&nb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    })
}

pub fn star_witness(g: &Graph, alpha: f64) -> Result<StarWitnessReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let n = g.n();
    let ln_n = (n.max(1) as f64).ln();
    let beta = star_beta(alpha);
    let max_star_degree = ((1.0 - beta) * ln_n).exp();
    let threshold = 0.5 * (beta * ln_n).exp();

    let stars: Vec<usize> = (0..n)
        .into_par_iter()
        .filter(|&v| g.degree(v) as f64 <= max_star_degree && is_star(g, v))
        .collect();
    let mut histogram = BTreeMap::new();
    let mut isolated = 0;
    for &v in &stars {
        match g.degree(v) {
            0 => isolated += 1,
            d => *histogram.entry(d).or_insert(0) += 1,
        }
    }
    let (best_degree, multiplicity) = histogram
        .iter()
        .fold((0, 0), |(bd, bm), (&d, &m)| if m > bm { (d, m) } else { (bd, bm) });
    let report = StarWitnessReport {
        n,
        alpha,
        beta,
        max_star_degree,
        star_count: stars.len(),
        isolated,
        best_degree,
        multiplicity,
        threshold,
        passed: multiplicity as f64 >= threshold,
        histogram,
    };
    if !report.pigeonhole_holds() {
        return Err(Error::InvariantViolation("star bucket count below pigeonhole bound".into()));
    }
    Ok(report)
}

/// Largest `n` searched exhaustively by [`search_nonrecon_pair`].
pub const EXHAUSTIVE_MAX_N: usize = 7;

/// Looks for a graph `h != g` on the same vertex set with
/// `same_r_neighborhoods(g, h, radius)`.
///
/// Up to [`EXHAUSTIVE_MAX_N`] vertices every graph with the same labeled
/// degree sequence is tried, pairs decided in lexicographic order with
/// inclusion first. Larger graphs first try transposing two vertices with
/// isomorphic rooted neighborhoods but different neighbor sets, then a
/// seeded Metropolis walk of degree-preserving double edge swaps scored by
/// the number of vertices whose neighborhood differs from `g`. `budget`
/// bounds the number of candidates examined. `None` means nothing was found
/// within budget, which proves nothing.
pub fn search_nonrecon_pair(g: &Graph, radius: usize, budget: u64, seed: u64) -> Result<Option<Graph>> {
    validate_radius(radius)?;
    let found = if g.n() <= EXHAUSTIVE_MAX_N {
        exhaustive(g, radius, budget)?
    } else {
        match transposition(g, radius)? {
            Some(h) => Some(h),
            None => swap_walk(g, radius, budget, seed)?,
        }
    };
    if let Some(h) = &found {
        if h == g || !same_r_neighborhoods(g, h, radius)? {
            return Err(Error::InvariantViolation(
                "search returned a pair that fails re-verification".into(),
            ));
        }
    }
    Ok(found)
}

fn exhaustive(g: &Graph, radius: usize, budget: u64) -> Result<Option<Graph>> {
    let n = g.n();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    // remaining_after[k][v]: pairs from index k onward that touch v
    let mut remaining_after = vec![vec![0usize; n]; pairs.len() + 1];
    for k in (0..pairs.len()).rev() {
        remaining_after[k] = remaining_after[k + 1].clone();
        remaining_after[k][pairs[k].0] += 1;
        remaining_after[k][pairs[k].1] += 1;
    }
    let mut search = Exhaustive {
        g,
        radius,
        pairs,
        remaining_after,
        need: g.degrees(),
        chosen: Vec::new(),
        budget,
    };
    search.descend(0)
}

struct Exhaustive<'a> {
    g: &'a Graph,
    radius: usize,
    pairs: Vec<(usize, usize)>,
    remaining_after: Vec<Vec<usize>>,
    need: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    budget: u64,
}

impl Exhaustive<'_> {
    fn descend(&mut self, k: usize) -> Result<Option<Graph>> {
        if self.budget == 0 {
            return Ok(None);
        }
        if k == self.pairs.len() {
            self.budget -= 1;
            let h = Graph::from_edges(self.g.n(), &self.chosen)?;
            if &h != self.g && same_r_neighborhoods(self.g, &h, self.radius)? {
                return Ok(Some(h));
            }
            return Ok(None);
        }
        let (i, j) = self.pairs[k];
        if self.need[i] > 0 && self.need[j] > 0 {
            self.need[i] -= 1;
            self.need[j] -= 1;
            self.chosen.push((i, j));
            let found = self.descend(k + 1)?;
            self.chosen.pop();
            self.need[i] += 1;
            self.need[j] += 1;
            if found.is_some() {
                return Ok(found);
            }
        }
        let rest = &self.remaining_after[k + 1];
        if self.need[i] <= rest[i] && self.need[j] <= rest[j] {
            return self.descend(k + 1);
        }
        Ok(None)
    }
}

fn swap_labels(g: &Graph, a: usize, b: usize) -> Result<Graph> {
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.swap(a, b);
    g.relabel(&perm)
}

/// Relabeling by a transposition keeps every neighborhood type except at
/// the two swapped vertices, which exchange theirs.
fn transposition(g: &Graph, radius: usize) -> Result<Option<Graph>> {
    let certs: Vec<Certificate> = (0..g.n())
        .into_par_iter()
        .map(|v| rooted_ball_certificate(g, v, radius))
        .collect::<Result<_>>()?;
    let mut groups: HashMap<&Certificate, Vec<usize>> = HashMap::new();
    for (v, c) in certs.iter().enumerate() {
        groups.entry(c).or_default().push(v);
    }
    let mut best: Option<(usize, usize)> = None;
    for members in groups.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                if !twins(g, a, b) && best.is_none_or(|p| (a, b) < p) {
                    best = Some((a, b));
                }
            }
        }
    }
    best.map(|(a, b)| swap_labels(g, a, b)).transpose()
}

/// Whether the transposition of `a` and `b` is an automorphism.
fn twins(g: &Graph, a: usize, b: usize) -> bool {
    let strip = |v: usize, other: usize| -> Vec<usize> {
        g.neighbors(v).iter().copied().filter(|&w| w != other).collect()
    };
    strip(a, b) == strip(b, a)
}

fn swap_walk(g: &Graph, radius: usize, budget: u64, seed: u64) -> Result<Option<Graph>> {
    let n = g.n();
    if g.edge_count() < 2 {
        return Ok(None);
    }
    let target: Vec<Certificate> = (0..n)
        .into_par_iter()
        .map(|v| rooted_ball_certificate(g, v, radius))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = g.clone();
    let mut differs = vec![false; n];
    let mut mismatches = 0usize;

    for _ in 0..budget {
        let edges: Vec<(usize, usize)> = h.edges().collect();
        let mut pick = edges.choose_multiple(&mut rng, 2);
        let (&(a, b), &(c, d)) = (pick.next().expect("two edges"), pick.next().expect("two edges"));
        let (c, d) = if rng.gen_bool(0.5) { (c, d) } else { (d, c) };
        if a == c || a == d || b == c || b == d || h.has_edge(a, c) || h.has_edge(b, d) {
            continue;
        }
        let mut next_edges: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&e| e != (a, b) && e != (c.min(d), c.max(d)))
            .collect();
        next_edges.push((a.min(c), a.max(c)));
        next_edges.push((b.min(d), b.max(d)));
        let candidate = Graph::from_edges(n, &next_edges)?;

        let mut touched = Vec::new();
        for s in [a, b, c, d] {
            for dg in [&h, &candidate] {
                touched.extend(dg.ball(s, radius)?);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        let updates: Vec<(usize, bool)> = touched
            .iter()
            .map(|&v| Ok((v, rooted_ball_certificate(&candidate, v, radius)? != target[v])))
            .collect::<Result<_>>()?;
        let delta: isize = updates
            .iter()
            .map(|&(v, now)| now as isize - differs[v] as isize)
            .sum();
        if delta > 0 && rng.gen::<f64>() >= (-1.5 * delta as f64).exp() {
            continue;
        }
        for (v, now) in updates {
            differs[v] = now;
        }
        mismatches = (mismatches as isize + delta) as usize;
        h = candidate;
        if mismatches == 0 && &h != g {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::is_isomorphic;

    fn two_edges() -> (Graph, Graph) {
        (
            Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap(),
            Graph::from_edges(4, &[(0, 2), (1, 3)]).unwrap(),
        )
    }

    #[test]
    fn same_neighborhoods_examples() {
        let (g, h) = two_edges();
        assert!(same_r_neighborhoods(&g, &h, 1).unwrap());
        assert!(same_r_neighborhoods(&g, &g, 2).unwrap());
        assert!(!same_r_neighborhoods(&Graph::complete(3), &Graph::path(3), 1).unwrap());
        assert!(same_r_neighborhoods(&g, &Graph::empty(5), 1).is_err());
        assert!(same_r_neighborhoods(&g, &h, 3).is_err());
    }

    #[test]
    fn star_report_matching_and_k4() {
        let matching = Graph::from_edges(10, &[(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]).unwrap();
        let r = star_witness(&matching, 0.9).unwrap();
        assert_eq!(r.star_count, 10);
        assert_eq!((r.best_degree, r.multiplicity), (1, 10));
        assert!((r.beta - (0.9 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
        let r = star_witness(&Graph::complete(4), 0.5).unwrap();
        assert_eq!(r.star_count, 0);
        assert!(!r.passed);
    }

    #[test]
    fn star_report_counts_isolated_separately() {
        let g = Graph::from_edges(5, &[(0, 1)]).unwrap();
        let r = star_witness(&g, 0.5).unwrap();
        assert_eq!(r.star_count, 5);
        assert_eq!(r.isolated, 3);
        assert_eq!(r.multiplicity, 2);
        assert!(r.pigeonhole_holds());
    }

    #[test]
    fn search_small_examples() {
        let (g, h) = two_edges();
        let found = search_nonrecon_pair(&g, 1, 1_000, 0).unwrap().unwrap();
        assert_eq!(found, h);
        assert!(is_isomorphic(&g, &found));
        assert_eq!(search_nonrecon_pair(&Graph::complete(4), 1, 1_000, 0).unwrap(), None);
    }

    #[test]
    fn search_two_stars() {
        let g = Graph::from_edges(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]).unwrap();
        let h = search_nonrecon_pair(&g, 1, 1_000, 3).unwrap().unwrap();
        assert_ne!(h, g);
        assert!(same_r_neighborhoods(&g, &h, 1).unwrap());
    }

    #[test]
    fn swap_walk_results_verify() {
        for seed in 0..4 {
            let g = crate::graph::sample_er(&crate::graph::ErParams::with_p(12, 0.3, seed)).unwrap();
            if let Some(h) = swap_walk(&g, 1, 2_000, seed).unwrap() {
                assert_ne!(h, g);
                assert!(same_r_neighborhoods(&g, &h, 1).unwrap());
            }
        }
    }
}
