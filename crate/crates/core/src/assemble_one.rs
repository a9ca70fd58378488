//! Reconstruction from 1-neighborhoods by matching common-neighbor
//! fingerprints across views.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sorted_intersection, Graph};
use crate::iso::{certificate_with_limit, Certificate, DEFAULT_CERT_LIMIT};
use crate::shotgun::{NeighborhoodCollection, NeighborhoodView};

/// Fingerprint of the edge between a view's center and one of its neighbors:
/// the certificate of the graph induced by their common neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeFingerprint {
    pub center: usize,
    pub neighbor_pos: usize,
    pub cert: Certificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyStatus {
    ExactSuccess,
    Ambiguous,
    Failed,
}

impl AssemblyStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AssemblyStatus::ExactSuccess => "exact_success",
            AssemblyStatus::Ambiguous => "ambiguous",
            AssemblyStatus::Failed => "failed",
        }
    }

    /// Rank used to pick the better of two outcomes.
    pub(crate) fn rank(self) -> u8 {
        match self {
            AssemblyStatus::ExactSuccess => 2,
            AssemblyStatus::Ambiguous => 1,
            AssemblyStatus::Failed => 0,
        }
    }
}

impl std::fmt::Display for AssemblyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counters describing how an assembly went. Fields that do not apply to
/// the method used stay zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyDiagnostics {
    /// Which reconstruction path produced the outcome.
    pub path: String,
    pub fingerprints: usize,
    pub distinct_certs: usize,
    /// Certificates seen exactly twice at distinct centers.
    pub matched_certs: usize,
    /// Certificates seen three or more times.
    pub colliding_certs: usize,
    /// Largest number of entries sharing one certificate.
    pub max_multiplicity: usize,
    /// Certificates seen only once.
    pub unmatched_certs: usize,
    /// Certificates seen twice within the same view.
    pub self_paired_certs: usize,
    /// Fingerprint entries that did not become an edge.
    pub unresolved_entries: usize,
    /// Matched pairs naming an already-declared edge.
    pub duplicate_edges: usize,
    /// Vertices whose reconstructed degree differs from their view.
    pub degree_mismatches: usize,
    /// Views smaller than the whole graph (diameter-2 path).
    pub short_views: usize,
    /// Views whose center matched no unique reference position.
    pub unmatched_centers: usize,
    /// Human-readable reason for a failure or ambiguity, if any.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssemblyOutcome {
    pub graph: Graph,
    pub status: AssemblyStatus,
    pub diagnostics: AssemblyDiagnostics,
}

impl AssemblyOutcome {
    /// An outcome carrying no reconstruction at all (a graph on zero
    /// vertices), so it can never be mistaken for a correct answer.
    pub(crate) fn failed(path: &str, note: String) -> Self {
        AssemblyOutcome {
            graph: Graph::empty(0),
            status: AssemblyStatus::Failed,
            diagnostics: AssemblyDiagnostics {
                path: path.to_string(),
                note: Some(note),
                ..Default::default()
            },
        }
    }
}

/// Center label and center position of every view. A view without a label
/// is named by its index, which is how recovered-center collections are
/// assembled. Labels must be a permutation of `0..n`.
pub(crate) fn view_centers(c: &NeighborhoodCollection) -> Result<Vec<(usize, usize)>> {
    if c.views.len() != c.n {
        return Err(Error::param(format!(
            "collection declares n = {} but has {} views",
            c.n,
            c.views.len()
        )));
    }
    let mut seen = vec![false; c.n];
    c.views
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let pos = v
                .center_pos
                .ok_or_else(|| Error::param(format!("view {i} has no center position")))?;
            let label = v.center.unwrap_or(i);
            if label >= c.n || std::mem::replace(&mut seen[label], true) {
                return Err(Error::param(format!("view {i} has invalid center label {label}")));
            }
            if pos >= v.local.n() {
                return Err(Error::param(format!("view {i} center position out of range")));
            }
            Ok((label, pos))
        })
        .collect()
}

pub fn edge_fingerprints(view: &NeighborhoodView) -> Result<Vec<EdgeFingerprint>> {
    edge_fingerprints_with_limit(view, DEFAULT_CERT_LIMIT)
}

pub fn edge_fingerprints_with_limit(
    view: &NeighborhoodView,
    limit: usize,
) -> Result<Vec<EdgeFingerprint>> {
    if view.radius != 1 {
        return Err(Error::param(format!("expected radius 1, got {}", view.radius)));
    }
    let (center, pos) = view.labeled_center()?;
    fingerprints_at(view, center, pos, limit)
}

pub(crate) fn fingerprints_at(
    view: &NeighborhoodView,
    center: usize,
    pos: usize,
    limit: usize,
) -> Result<Vec<EdgeFingerprint>> {
    let local = &view.local;
    let mut index = vec![usize::MAX; local.n()];
    local
        .neighbors(pos)
        .iter()
        .map(|&u0| {
            let common = sorted_intersection(local.neighbors(pos), local.neighbors(u0));
            let h = induce(local, &common, &mut index);
            Ok(EdgeFingerprint {
                center,
                neighbor_pos: u0,
                cert: certificate_with_limit(&h, limit)?,
            })
        })
        .collect()
}

/// Induced subgraph on `vs`, reusing `index` (all `usize::MAX` on entry and
/// on exit) as the old-to-new map.
pub(crate) fn induce(g: &Graph, vs: &[usize], index: &mut [usize]) -> Graph {
    for (i, &v) in vs.iter().enumerate() {
        index[v] = i;
    }
    let h = g.induced_with_index(vs, index);
    for &v in vs {
        index[v] = usize::MAX;
    }
    h
}

pub fn assemble_from_1nbhd(c: &NeighborhoodCollection) -> Result<AssemblyOutcome> {
    assemble_from_1nbhd_with_limit(c, DEFAULT_CERT_LIMIT)
}

pub fn assemble_from_1nbhd_with_limit(
    c: &NeighborhoodCollection,
    limit: usize,
) -> Result<AssemblyOutcome> {
    if c.radius != 1 {
        return Err(Error::param(format!("expected radius 1, got {}", c.radius)));
    }
    let centers = view_centers(c)?;
    let per_view: Result<Vec<Vec<EdgeFingerprint>>> = c
        .views
        .par_iter()
        .zip(&centers)
        .map(|(view, &(label, pos))| fingerprints_at(view, label, pos, limit))
        .collect();
    let fps = match per_view {
        Ok(f) => f,
        Err(e @ Error::ResourceLimit { .. }) => {
            return Ok(AssemblyOutcome::failed("fingerprint1", e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let degrees = center_degrees(c, &centers);
    Ok(join(c.n, fps.into_iter().flatten().collect(), &degrees, "fingerprint1"))
}

/// Degree of each center inside its own view, indexed by label.
pub(crate) fn center_degrees(c: &NeighborhoodCollection, centers: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0; c.n];
    for (view, &(label, pos)) in c.views.iter().zip(centers) {
        deg[label] = view.local.degree(pos);
    }
    deg
}

/// Declares an edge for every certificate carried by exactly two entries at
/// distinct centers. The outcome is exact only if every certificate was
/// matched that way and the declared degrees agree with the views.
pub(crate) fn join(
    n: usize,
    mut entries: Vec<EdgeFingerprint>,
    center_degree: &[usize],
    path: &str,
) -> AssemblyOutcome {
    entries.sort_unstable_by(|a, b| {
        a.cert
            .cmp(&b.cert)
            .then(a.center.cmp(&b.center))
            .then(a.neighbor_pos.cmp(&b.neighbor_pos))
    });
    let mut diag = AssemblyDiagnostics {
        path: path.to_string(),
        fingerprints: entries.len(),
        ..Default::default()
    };
    let mut edges = Vec::new();
    let mut start = 0;
    while start < entries.len() {
        let mut end = start + 1;
        while end < entries.len() && entries[end].cert == entries[start].cert {
            end += 1;
        }
        let group = &entries[start..end];
        diag.distinct_certs += 1;
        diag.max_multiplicity = diag.max_multiplicity.max(group.len());
        match group {
            [a, b] if a.center != b.center => {
                diag.matched_certs += 1;
                edges.push((a.center.min(b.center), a.center.max(b.center)));
            }
            [_, _] => {
                diag.self_paired_certs += 1;
                diag.unresolved_entries += 2;
            }
            [_] => {
                diag.unmatched_certs += 1;
                diag.unresolved_entries += 1;
            }
            _ => {
                diag.colliding_certs += 1;
                diag.unresolved_entries += group.len();
            }
        }
        start = end;
    }
    edges.sort_unstable();
    let before = edges.len();
    edges.dedup();
    diag.duplicate_edges = before - edges.len();

    let graph = Graph::from_edges(n, &edges).expect("join produces in-range pairs");
    diag.degree_mismatches = (0..n).filter(|&v| graph.degree(v) != center_degree[v]).count();

    let exact = diag.colliding_certs == 0
        && diag.unmatched_certs == 0
        && diag.self_paired_certs == 0
        && diag.duplicate_edges == 0
        && diag.degree_mismatches == 0;
    AssemblyOutcome {
        graph,
        status: if exact {
            AssemblyStatus::ExactSuccess
        } else {
            AssemblyStatus::Ambiguous
        },
        diagnostics: diag,
    }
}
