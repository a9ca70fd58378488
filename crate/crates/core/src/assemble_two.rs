//! Reconstruction from 2-neighborhoods.
//!
//! Path A applies when every view is the whole graph: vertices are matched
//! to a reference view through their degree neighborhoods. Path B joins
//! fingerprints of the graph induced by vertices at distance exactly 2 from
//! both endpoints of an edge.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::assemble_one::{
    center_degrees, induce, join, view_centers, AssemblyDiagnostics, AssemblyOutcome,
    AssemblyStatus, EdgeFingerprint,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::iso::{canonical_labeling, certificate_with_limit, degree_neighborhood, DEFAULT_CERT_LIMIT};
use crate::shotgun::{NeighborhoodCollection, NeighborhoodView};

/// Same shape as [`EdgeFingerprint`]; `cert` describes the graph induced by
/// the vertices at distance exactly 2 from both the center and the neighbor.
pub type DistanceTwoFingerprint = EdgeFingerprint;

fn check_radius(radius: usize) -> Result<()> {
    if radius == 2 {
        Ok(())
    } else {
        Err(Error::param(format!("expected radius 2, got {radius}")))
    }
}

pub fn assemble_diameter2(c: &NeighborhoodCollection) -> Result<AssemblyOutcome> {
    check_radius(c.radius)?;
    let centers = view_centers(c)?;
    let n = c.n;
    let path = "diameter2";

    let short_views = c.views.iter().filter(|v| v.local.n() != n).count();
    if short_views > 0 {
        let mut out = AssemblyOutcome::failed(
            path,
            format!("{short_views} views do not cover the graph; diameter exceeds 2"),
        );
        out.diagnostics.short_views = short_views;
        return Ok(out);
    }

    let reference_view = centers
        .iter()
        .position(|&(label, _)| label == 0)
        .expect("labels form a permutation");
    let reference = &c.views[reference_view].local;
    let mut diag = AssemblyDiagnostics {
        path: path.to_string(),
        ..Default::default()
    };

    let order = match canonical_labeling(reference) {
        Ok(order) => order,
        Err(e) => {
            diag.note = Some(e.to_string());
            return Ok(AssemblyOutcome {
                graph: Graph::empty(n),
                status: AssemblyStatus::Ambiguous,
                diagnostics: diag,
            });
        }
    };
    let by_neighborhood: HashMap<_, usize> = order
        .iter()
        .map(|&v| (degree_neighborhood(reference, v).expect("in range"), v))
        .collect();

    let matches: Vec<Option<usize>> = c
        .views
        .par_iter()
        .zip(&centers)
        .map(|(view, &(_, pos))| {
            let dn = degree_neighborhood(&view.local, pos).expect("in range");
            by_neighborhood.get(&dn).copied()
        })
        .collect();

    // perm[reference vertex] = center label
    let mut perm = vec![usize::MAX; n];
    for (m, &(label, _)) in matches.iter().zip(&centers) {
        match m {
            Some(r) if perm[*r] == usize::MAX => perm[*r] = label,
            _ => diag.unmatched_centers += 1,
        }
    }
    if diag.unmatched_centers > 0 {
        diag.note = Some("centers do not match reference positions one-to-one".into());
        return Ok(AssemblyOutcome {
            graph: Graph::empty(n),
            status: AssemblyStatus::Ambiguous,
            diagnostics: diag,
        });
    }
    let graph = reference.relabel(&perm)?;
    let degrees = center_degrees(c, &centers);
    diag.degree_mismatches = (0..n).filter(|&v| graph.degree(v) != degrees[v]).count();
    if diag.degree_mismatches > 0 {
        return Err(Error::InvariantViolation(
            "diameter-2 assembly disagrees with view degrees".into(),
        ));
    }
    Ok(AssemblyOutcome {
        graph,
        status: AssemblyStatus::ExactSuccess,
        diagnostics: diag,
    })
}

pub fn l_fingerprints(view: &NeighborhoodView) -> Result<Vec<DistanceTwoFingerprint>> {
    l_fingerprints_with_limit(view, DEFAULT_CERT_LIMIT)
}

pub fn l_fingerprints_with_limit(
    view: &NeighborhoodView,
    limit: usize,
) -> Result<Vec<DistanceTwoFingerprint>> {
    check_radius(view.radius)?;
    let (center, pos) = view.labeled_center()?;
    l_fingerprints_at(view, center, pos, limit)
}

/// Vertices of the view at distance exactly 2 from both the center and
/// `neighbor`, in ascending order.
pub fn distance_two_set(view: &NeighborhoodView, pos: usize, neighbor: usize) -> Vec<usize> {
    let from_center = view.local.bfs(pos, 2);
    let from_neighbor = view.local.bfs(neighbor, 2);
    (0..view.local.n())
        .filter(|&w| from_center[w] == 2 && from_neighbor[w] == 2)
        .collect()
}

pub(crate) fn l_fingerprints_at(
    view: &NeighborhoodView,
    center: usize,
    pos: usize,
    limit: usize,
) -> Result<Vec<DistanceTwoFingerprint>> {
    let local = &view.local;
    let from_center = local.bfs(pos, 2);
    let mut index = vec![usize::MAX; local.n()];
    local
        .neighbors(pos)
        .iter()
        .map(|&u0| {
            let from_neighbor = local.bfs(u0, 2);
            let set: Vec<usize> = (0..local.n())
                .filter(|&w| from_center[w] == 2 && from_neighbor[w] == 2)
                .collect();
            let h = induce(local, &set, &mut index);
            Ok(EdgeFingerprint {
                center,
                neighbor_pos: u0,
                cert: certificate_with_limit(&h, limit)?,
            })
        })
        .collect()
}

pub fn assemble_from_2nbhd_fingerprint(c: &NeighborhoodCollection) -> Result<AssemblyOutcome> {
    assemble_from_2nbhd_fingerprint_with_limit(c, DEFAULT_CERT_LIMIT)
}

pub fn assemble_from_2nbhd_fingerprint_with_limit(
    c: &NeighborhoodCollection,
    limit: usize,
) -> Result<AssemblyOutcome> {
    check_radius(c.radius)?;
    let centers = view_centers(c)?;
    let per_view: Result<Vec<Vec<EdgeFingerprint>>> = c
        .views
        .par_iter()
        .zip(&centers)
        .map(|(view, &(label, pos))| l_fingerprints_at(view, label, pos, limit))
        .collect();
    let fps = match per_view {
        Ok(f) => f,
        Err(e @ Error::ResourceLimit { .. }) => {
            return Ok(AssemblyOutcome::failed("fingerprint2", e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let degrees = center_degrees(c, &centers);
    Ok(join(c.n, fps.into_iter().flatten().collect(), &degrees, "fingerprint2"))
}

/// Path A for `alpha < 1/2`, path B otherwise (including `alpha = 1/2`).
/// When path A does not succeed exactly, path B is tried as well and the
/// outcome with the better status is returned, preferring path A on ties.
pub fn assemble_auto(c: &NeighborhoodCollection, n: usize, alpha: f64) -> Result<AssemblyOutcome> {
    if c.n != n {
        return Err(Error::param(format!("collection has n = {}, expected {n}", c.n)));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if alpha >= 0.5 {
        return assemble_from_2nbhd_fingerprint(c);
    }
    let a = assemble_diameter2(c)?;
    if a.status == AssemblyStatus::ExactSuccess {
        return Ok(a);
    }
    let b = assemble_from_2nbhd_fingerprint(c)?;
    Ok(if b.status.rank() > a.status.rank() { b } else { a })
}
