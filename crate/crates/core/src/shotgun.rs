//! Shredding graphs into anonymized r-neighborhoods, the collection file
//! format, and recovery of unlabeled neighborhood centers.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{parse_pair, Graph};

const HEADER_MAGIC: &str = "SHOTGUN v1";

/// Stream id used to shuffle view order in unlabeled-center mode. View `i`
/// uses stream `i`, so this never collides for realistic `n`.
const ORDER_STREAM: u64 = u64::MAX;

/// One observed r-neighborhood: the induced ball around a center, with
/// vertices renamed by a random permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodView {
    pub radius: usize,
    /// Label of the center in the source graph, when observed.
    pub center: Option<usize>,
    pub local: Graph,
    /// Anonymous id of the center inside `local`, when known.
    pub center_pos: Option<usize>,
}

impl NeighborhoodView {
    pub fn size(&self) -> usize {
        self.local.n()
    }

    /// Center label and position; errors for views without both.
    pub fn labeled_center(&self) -> Result<(usize, usize)> {
        match (self.center, self.center_pos) {
            (Some(c), Some(p)) => Ok((c, p)),
            _ => Err(Error::param("view has no labeled center")),
        }
    }

    /// Checks that every vertex lies within `radius` of the center inside
    /// the local graph.
    pub fn check_closure(&self) -> Result<()> {
        let pos = self
            .center_pos
            .ok_or_else(|| Error::param("view has no center position"))?;
        if pos >= self.local.n() {
            return Err(Error::param(format!(
                "center position {pos} out of range for k = {}",
                self.local.n()
            )));
        }
        let dist = self.local.bfs(pos, self.radius);
        if let Some(far) = dist.iter().position(|&d| d == usize::MAX) {
            return Err(Error::param(format!(
                "vertex {far} is farther than {} from the center",
                self.radius
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborhoodCollection {
    pub n: usize,
    pub radius: usize,
    /// Whether view `i` carries center label `i`. When false the views are
    /// in shuffled order with no labels.
    pub labeled: bool,
    pub views: Vec<NeighborhoodView>,
}

/// Ground truth kept by the shredder, indexed like the collection's views.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShredTruth {
    /// Source vertex at the center of each view.
    pub centers: Vec<usize>,
    /// Source vertex behind each anonymous id of each view.
    pub local_to_source: Vec<Vec<usize>>,
}

impl ShredTruth {
    /// Anonymous id of the true center in view `i`.
    pub fn center_pos(&self, i: usize) -> usize {
        self.local_to_source[i]
            .iter()
            .position(|&s| s == self.centers[i])
            .expect("center belongs to its own view")
    }
}

pub fn validate_radius(radius: usize) -> Result<()> {
    if radius == 1 || radius == 2 {
        Ok(())
    } else {
        Err(Error::param(format!("radius must be 1 or 2, got {radius}")))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Shreds `g` into one anonymized view per vertex.
pub fn shred(
    g: &Graph,
    radius: usize,
    anonymize_seed: u64,
    labeled_centers: bool,
) -> Result<NeighborhoodCollection> {
    shred_with_truth(g, radius, anonymize_seed, labeled_centers).map(|(c, _)| c)
}

/// Like [`shred`], also returning where every anonymous vertex came from.
///
/// View `v` is renamed by a uniform permutation drawn from stream `v` of a
/// ChaCha8 generator seeded with `anonymize_seed`. Without labeled centers
/// the view order is shuffled as well, using a dedicated stream.
pub fn shred_with_truth(
    g: &Graph,
    radius: usize,
    anonymize_seed: u64,
    labeled_centers: bool,
) -> Result<(NeighborhoodCollection, ShredTruth)> {
    validate_radius(radius)?;
    let n = g.n();
    let mut shredded: Vec<(NeighborhoodView, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|v| shred_one(g, v, radius, anonymize_seed, labeled_centers))
        .collect();

    let mut centers: Vec<usize> = (0..n).collect();
    if !labeled_centers {
        centers.shuffle(&mut stream_rng(anonymize_seed, ORDER_STREAM));
        let mut slots: Vec<Option<_>> = shredded.into_iter().map(Some).collect();
        shredded = centers
            .iter()
            .map(|&v| slots[v].take().expect("each view taken once"))
            .collect();
    }
    let (views, local_to_source) = shredded.into_iter().unzip();
    Ok((
        NeighborhoodCollection {
            n,
            radius,
            labeled: labeled_centers,
            views,
        },
        ShredTruth {
            centers,
            local_to_source,
        },
    ))
}

fn shred_one(
    g: &Graph,
    v: usize,
    radius: usize,
    seed: u64,
    labeled: bool,
) -> (NeighborhoodView, Vec<usize>) {
    let n = g.n();
    let dist = g.bfs(v, radius);
    let ball: Vec<usize> = (0..n).filter(|&w| dist[w] != usize::MAX).collect();
    let mut perm: Vec<usize> = (0..ball.len()).collect();
    perm.shuffle(&mut stream_rng(seed, v as u64));

    let mut index = vec![usize::MAX; n];
    for (i, &w) in ball.iter().enumerate() {
        index[w] = perm[i];
    }
    let mut local_to_source = vec![0; ball.len()];
    let mut adj = vec![Vec::new(); ball.len()];
    for &w in &ball {
        let lw = index[w];
        local_to_source[lw] = w;
        let mut list: Vec<usize> = g
            .neighbors(w)
            .iter()
            .filter_map(|&x| (index[x] != usize::MAX).then_some(index[x]))
            .collect();
        list.sort_unstable();
        adj[lw] = list;
    }
    let view = NeighborhoodView {
        radius,
        center: labeled.then_some(v),
        local: Graph::from_sorted_adjacency(adj),
        center_pos: labeled.then_some(index[v]),
    };
    (view, local_to_source)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CenterError {
    #[error("several vertices qualify as center: {0:?}")]
    Ambiguous(Vec<usize>),
    #[error("no vertex qualifies as center")]
    NoCenter,
    #[error("view has radius {0}, expected {1}")]
    WrongRadius(usize, usize),
}

/// Center of a 1-neighborhood: the unique vertex adjacent to all others.
pub fn find_center_r1(view: &NeighborhoodView) -> Result<usize, CenterError> {
    if view.radius != 1 {
        return Err(CenterError::WrongRadius(view.radius, 1));
    }
    let k = view.local.n();
    let candidates: Vec<usize> = (0..k).filter(|&v| view.local.degree(v) + 1 == k).collect();
    match candidates.len() {
        0 => Err(CenterError::NoCenter),
        1 => Ok(candidates[0]),
        _ => Err(CenterError::Ambiguous(candidates)),
    }
}

/// Which rule produced a 2-neighborhood center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterRule {
    /// Degree pruning followed by the maximum-degree survivor.
    Pruning,
    /// Unique vertex within distance 2 of every other vertex.
    Eccentricity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenterFound {
    pub pos: usize,
    pub rule: CenterRule,
}

/// Degree below which [`find_center_r2`] prunes a vertex: `n^(1-alpha) / 2`.
pub fn pruning_threshold(n: usize, alpha: f64) -> f64 {
    0.5 * ((1.0 - alpha) * (n as f64).ln()).exp()
}

/// Center of a 2-neighborhood. See [`locate_center_r2`].
pub fn find_center_r2(view: &NeighborhoodView, n: usize, alpha: f64) -> Result<usize, CenterError> {
    locate_center_r2(view, n, alpha).map(|f| f.pos)
}

/// Center of a 2-neighborhood, intended for `1/2 < alpha < 1`.
///
/// Vertices with local degree below `n^(1-alpha)/2` are removed, and the
/// survivor of highest degree in the remaining induced subgraph is taken.
/// The true center is always within distance 2 of every vertex of its view,
/// so the pick is checked against that. If pruning yields no unique
/// survivor, or the check fails (at moderate `n` a low-degree center can be
/// pruned), the unique vertex of local eccentricity at most 2 is used.
pub fn locate_center_r2(
    view: &NeighborhoodView,
    n: usize,
    alpha: f64,
) -> Result<CenterFound, CenterError> {
    if view.radius != 2 {
        return Err(CenterError::WrongRadius(view.radius, 2));
    }
    let local = &view.local;
    let k = local.n();
    if k == 0 {
        return Err(CenterError::NoCenter);
    }
    if k == 1 {
        return Ok(CenterFound {
            pos: 0,
            rule: CenterRule::Pruning,
        });
    }

    let threshold = pruning_threshold(n, alpha);
    let alive: Vec<bool> = (0..k).map(|v| local.degree(v) as f64 >= threshold).collect();
    let mut best: Option<(usize, usize)> = None;
    let mut tie = false;
    for v in (0..k).filter(|&v| alive[v]) {
        let d = local.neighbors(v).iter().filter(|&&w| alive[w]).count();
        match best {
            Some((_, bd)) if d < bd => {}
            Some((_, bd)) if d == bd => tie = true,
            _ => {
                best = Some((v, d));
                tie = false;
            }
        }
    }
    if let (Some((v, _)), false) = (best, tie) {
        if eccentricity_at_most_two(local, v) {
            return Ok(CenterFound {
                pos: v,
                rule: CenterRule::Pruning,
            });
        }
    }

    let candidates: Vec<usize> = (0..k).filter(|&v| eccentricity_at_most_two(local, v)).collect();
    match candidates.len() {
        0 => Err(CenterError::NoCenter),
        1 => Ok(CenterFound {
            pos: candidates[0],
            rule: CenterRule::Eccentricity,
        }),
        _ => Err(CenterError::Ambiguous(candidates)),
    }
}

fn eccentricity_at_most_two(g: &Graph, v: usize) -> bool {
    g.bfs(v, 2).iter().all(|&d| d != usize::MAX)
}

impl NeighborhoodCollection {
    /// Line-oriented text form; see the crate README for the grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{HEADER_MAGIC} n={} r={} labeled={}",
            self.n,
            self.radius,
            u8::from(self.labeled)
        );
        for view in &self.views {
            let center = view.center.map_or("?".to_string(), |c| c.to_string());
            let pos = view.center_pos.map_or("?".to_string(), |c| c.to_string());
            let _ = writeln!(
                out,
                "VIEW {center} k={} m={} c={pos}",
                view.local.n(),
                view.local.edge_count()
            );
            for (i, j) in view.local.edges() {
                let _ = writeln!(out, "{i} {j}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
        let rest = header
            .strip_prefix(HEADER_MAGIC)
            .ok_or_else(|| Error::parse(1, "missing SHOTGUN v1 header"))?;
        let fields = parse_fields(rest, 1, &["n", "r", "labeled"])?;
        let n = parse_num(&fields[0], 1)?;
        let radius = parse_num(&fields[1], 1)?;
        validate_radius(radius).map_err(|e| Error::parse(1, e.to_string()))?;
        let labeled = match fields[2].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(1, format!("labeled must be 0 or 1, got {other}"))),
        };

        let mut views = Vec::with_capacity(n);
        while let Some((lineno, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix("VIEW ")
                .ok_or_else(|| Error::parse(lineno, "expected VIEW line"))?;
            let (center_tok, rest) = rest
                .split_once(' ')
                .ok_or_else(|| Error::parse(lineno, "truncated VIEW line"))?;
            let fields = parse_fields(rest, lineno, &["k", "m", "c"])?;
            let center = parse_optional(center_tok, lineno)?;
            let k = parse_num(&fields[0], lineno)?;
            let m = parse_num(&fields[1], lineno)?;
            let center_pos = parse_optional(&fields[2], lineno)?;

            let mut edges = Vec::with_capacity(m);
            for _ in 0..m {
                let (eline, text) = lines
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "view ends before its edges"))?;
                let (i, j) = parse_pair(text, eline)?;
                if i >= j || j >= k {
                    return Err(Error::parse(eline, format!("edge must satisfy 0 <= i < j < {k}")));
                }
                edges.push((i, j));
            }
            let local = Graph::from_edges(k, &edges).map_err(|e| Error::parse(lineno, e.to_string()))?;
            if local.edge_count() != m {
                return Err(Error::parse(lineno, "duplicate edges in view"));
            }
            let view = NeighborhoodView {
                radius,
                center,
                local,
                center_pos,
            };
            validate_view(&view, labeled, views.len(), n).map_err(|e| Error::parse(lineno, e))?;
            views.push(view);
        }
        if views.len() != n {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("expected {n} views, found {}", views.len()),
            ));
        }
        Ok(NeighborhoodCollection {
            n,
            radius,
            labeled,
            views,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

pub fn save_collection(c: &NeighborhoodCollection, path: impl AsRef<Path>) -> Result<()> {
    c.save(path)
}

pub fn load_collection(path: impl AsRef<Path>) -> Result<NeighborhoodCollection> {
    NeighborhoodCollection::load(path)
}

fn validate_view(view: &NeighborhoodView, labeled: bool, index: usize, n: usize) -> Result<(), String> {
    if index >= n {
        return Err(format!("more than {n} views"));
    }
    if let Some(p) = view.center_pos {
        if p >= view.local.n() {
            return Err(format!("center position {p} out of range"));
        }
    }
    if labeled {
        if view.center != Some(index) {
            return Err(format!("labeled view {index} must have center {index}"));
        }
        view.check_closure().map_err(|e| e.to_string())?;
    } else if view.center.is_some() {
        return Err("unlabeled collection has a labeled view".into());
    }
    Ok(())
}

/// Parses `key=value` tokens in exactly the given order.
fn parse_fields(rest: &str, lineno: usize, keys: &[&str]) -> Result<Vec<String>> {
    let tokens: Vec<&str> = rest.split_ascii_whitespace().collect();
    if tokens.len() != keys.len() {
        return Err(Error::parse(lineno, format!("expected fields {keys:?}")));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| {
            tok.strip_prefix(key)
                .and_then(|t| t.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| Error::parse(lineno, format!("expected {key}=<value>, got {tok}")))
        })
        .collect()
}

fn parse_num(s: &str, lineno: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(lineno, format!("not a non-negative integer: {s}")))
}

fn parse_optional(s: &str, lineno: usize) -> Result<Option<usize>> {
    if s == "?" {
        Ok(None)
    } else {
        parse_num(s, lineno).map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::certificate;

    #[test]
    fn shred_triangle() {
        let c = shred(&Graph::complete(3), 1, 5, true).unwrap();
        assert_eq!(c.views.len(), 3);
        for (i, v) in c.views.iter().enumerate() {
            assert_eq!(v.local, Graph::complete(3));
            assert_eq!(v.center, Some(i));
            assert!(v.center_pos.unwrap() < 3);
        }
    }

    #[test]
    fn shred_path() {
        let p = Graph::path(3);
        let c1 = shred(&p, 1, 5, true).unwrap();
        assert_eq!(c1.views[0].local, Graph::path(2));
        let c2 = shred(&p, 2, 5, true).unwrap();
        assert_eq!(
            certificate(&c2.views[0].local).unwrap(),
            certificate(&Graph::path(3)).unwrap()
        );
        assert!(shred(&p, 3, 5, true).is_err());
    }

    #[test]
    fn truth_maps_back() {
        let g = crate::graph::sample_er(&crate::graph::ErParams::with_p(40, 0.1, 2)).unwrap();
        for labeled in [true, false] {
            let (c, truth) = shred_with_truth(&g, 2, 17, labeled).unwrap();
            for (i, view) in c.views.iter().enumerate() {
                let map = &truth.local_to_source[i];
                for (a, b) in view.local.edges() {
                    assert!(g.has_edge(map[a], map[b]));
                }
                if labeled {
                    assert_eq!(view.center_pos, Some(truth.center_pos(i)));
                } else {
                    assert!(view.center.is_none());
                }
            }
        }
    }

    #[test]
    fn center_r1_examples() {
        let star = shred(&Graph::star(5), 1, 3, false).unwrap();
        let (_, truth) = shred_with_truth(&Graph::star(5), 1, 3, false).unwrap();
        let hub_view = truth.centers.iter().position(|&c| c == 0).unwrap();
        assert_eq!(
            find_center_r1(&star.views[hub_view]),
            Ok(truth.center_pos(hub_view))
        );
        let k3 = shred(&Graph::complete(3), 1, 3, false).unwrap();
        assert!(matches!(
            find_center_r1(&k3.views[0]),
            Err(CenterError::Ambiguous(ref c)) if c.len() == 3
        ));
        let broken = NeighborhoodView {
            radius: 1,
            center: None,
            local: Graph::path(4),
            center_pos: None,
        };
        assert_eq!(find_center_r1(&broken), Err(CenterError::NoCenter));
    }

    #[test]
    fn center_r2_star_hub() {
        // threshold 100^0.4 / 2 ~ 3.15: leaves have degree 1 and are pruned.
        assert!((pruning_threshold(100, 0.6) - 3.1548).abs() < 1e-3);
        let view = NeighborhoodView {
            radius: 2,
            center: None,
            local: Graph::star(10),
            center_pos: None,
        };
        assert_eq!(
            locate_center_r2(&view, 100, 0.6),
            Ok(CenterFound {
                pos: 0,
                rule: CenterRule::Pruning
            })
        );
        let single = NeighborhoodView {
            radius: 2,
            center: None,
            local: Graph::empty(1),
            center_pos: None,
        };
        assert_eq!(find_center_r2(&single, 100, 0.6), Ok(0));
    }

    #[test]
    fn center_r2_falls_back_when_center_is_pruned() {
        // Center 0 has degree 2 (< threshold 3.15), its neighbors 1 and 2
        // have degree 5 each through distance-2 vertices.
        let edges = [
            (0, 1), (0, 2),
            (1, 3), (1, 4), (1, 5), (1, 6),
            (2, 7), (2, 8), (2, 9), (2, 10),
        ];
        let view = NeighborhoodView {
            radius: 2,
            center: None,
            local: Graph::from_edges(11, &edges).unwrap(),
            center_pos: None,
        };
        assert_eq!(
            locate_center_r2(&view, 100, 0.6),
            Ok(CenterFound {
                pos: 0,
                rule: CenterRule::Eccentricity
            })
        );
    }

    #[test]
    fn collection_round_trip_k4() {
        let c = shred(&Graph::complete(4), 1, 9, true).unwrap();
        let text = c.to_text();
        let back = NeighborhoodCollection::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
        let u = shred(&Graph::complete(4), 2, 9, false).unwrap();
        assert_eq!(NeighborhoodCollection::from_text(&u.to_text()).unwrap(), u);
    }

    #[test]
    fn load_rejects_view_outside_radius() {
        // Vertex 2 is only reachable through vertex 1: distance 2 in an r=1 view.
        let text = "SHOTGUN v1 n=1 r=1 labeled=1\nVIEW 0 k=3 m=2 c=0\n0 1\n1 2\n";
        match NeighborhoodCollection::from_text(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        // r=2 view with a vertex having no witness path at all.
        let text = "SHOTGUN v1 n=1 r=2 labeled=1\nVIEW 0 k=3 m=1 c=0\n0 1\n";
        assert!(NeighborhoodCollection::from_text(text).is_err());
    }

    #[test]
    fn load_reports_line_numbers() {
        let text = "SHOTGUN v1 n=1 r=1 labeled=1\nVIEW 0 k=2 m=1 c=0\n0 z\n";
        match NeighborhoodCollection::from_text(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(NeighborhoodCollection::from_text("SHOTGUN v2 n=1 r=1 labeled=1\n").is_err());
        assert!(NeighborhoodCollection::from_text("SHOTGUN v1 n=2 r=1 labeled=1\nVIEW 0 k=1 m=0 c=0\n").is_err());
    }
}
