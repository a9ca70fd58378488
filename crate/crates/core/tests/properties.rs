use std::collections::HashSet;

use proptest::prelude::*;
use proptest::sample::subsequence;

use shotgun_core::assemble_one::{assemble_from_1nbhd, AssemblyStatus};
use shotgun_core::assemble_two::{assemble_from_2nbhd_fingerprint, distance_two_set};
use shotgun_core::iso::{
    canonical_labeling, certificate, degree_neighborhoods, is_isomorphic_backtracking,
};
use shotgun_core::shotgun::{shred, shred_with_truth, NeighborhoodCollection};
use shotgun_core::witness::{is_star, same_r_neighborhoods, star_witness};
use shotgun_core::{sample_er, ErParams, Graph};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..1.0f64, any::<u64>())
        .prop_map(|(n, p, seed)| sample_er(&ErParams::with_p(n, p, seed)).unwrap())
}

fn graph_and_perm(max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    graph(max_n).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

fn brute_diameter_two(g: &Graph) -> bool {
    (0..g.n()).all(|u| {
        (0..g.n()).all(|v| {
            u == v || g.has_edge(u, v) || (0..g.n()).any(|w| g.has_edge(u, w) && g.has_edge(w, v))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sampled_graphs_are_simple(g in graph(40)) {
        prop_assert!(g.check_invariants().is_ok());
        for (u, v) in g.edges() {
            prop_assert!(u < v && g.has_edge(v, u));
        }
    }

    #[test]
    fn sampling_is_deterministic(n in 1usize..80, p in 0.0..1.0f64, seed in any::<u64>()) {
        let a = sample_er(&ErParams::with_p(n, p, seed)).unwrap();
        let b = sample_er(&ErParams::with_p(n, p, seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn distances_are_symmetric(g in graph(30)) {
        let all: Vec<_> = (0..g.n()).map(|v| g.distances_from(v).unwrap()).collect();
        for (v, row) in all.iter().enumerate() {
            prop_assert_eq!(row[v], Some(0));
            for (w, d) in row.iter().enumerate() {
                prop_assert_eq!(*d, all[w][v]);
            }
        }
    }

    #[test]
    fn induced_subgraph_keeps_inner_edges(
        (g, vs) in graph(10).prop_flat_map(|g| {
            let n = g.n();
            (Just(g), subsequence((0..n).collect::<Vec<_>>(), 0..=n))
        })
    ) {
        let (h, map) = g.induced_subgraph(&vs).unwrap();
        let set: HashSet<usize> = vs.iter().copied().collect();
        let direct = g.edges().filter(|(u, v)| set.contains(u) && set.contains(v)).count();
        prop_assert_eq!(h.edge_count(), direct);
        prop_assert_eq!(map.len(), vs.len());
        for (u, v) in g.edges().filter(|(u, v)| set.contains(u) && set.contains(v)) {
            prop_assert!(h.has_edge(map[&u], map[&v]));
        }
    }

    #[test]
    fn diameter_two_matches_brute_force(g in graph(6)) {
        let d = g.diameter();
        prop_assert_eq!(d.is_some_and(|d| d <= 2), brute_diameter_two(&g));
        prop_assert_eq!(g.within_distance_two(), brute_diameter_two(&g));
    }

    #[test]
    fn graph_text_round_trip(g in graph(30)) {
        prop_assert_eq!(Graph::from_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn certificate_is_exact_on_small_graphs(g in graph(7), h in graph(7)) {
        let same = certificate(&g).unwrap() == certificate(&h).unwrap();
        prop_assert_eq!(same, is_isomorphic_backtracking(&g, &h));
    }

    #[test]
    fn degree_neighborhoods_are_invariant((g, perm) in graph_and_perm(40)) {
        let mut a = degree_neighborhoods(&g);
        let mut b = degree_neighborhoods(&g.relabel(&perm).unwrap());
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn canonical_labeling_is_consistent((g, perm) in graph_and_perm(12)) {
        if let Ok(order) = canonical_labeling(&g) {
            let h = g.relabel(&perm).unwrap();
            let order_h = canonical_labeling(&h).unwrap();
            // Relabel each graph so that its i-th vertex in order becomes i.
            let to_rank = |order: &[usize]| {
                let mut r = vec![0; order.len()];
                for (i, &v) in order.iter().enumerate() {
                    r[v] = i;
                }
                r
            };
            prop_assert_eq!(g.relabel(&to_rank(&order)).unwrap(), h.relabel(&to_rank(&order_h)).unwrap());
        }
    }

    #[test]
    fn shred_views_match_direct_balls(g in graph(25), radius in 1usize..=2, seed in any::<u64>()) {
        let (c, truth) = shred_with_truth(&g, radius, seed, true).unwrap();
        for (v, view) in c.views.iter().enumerate() {
            let (ball, map) = g.induced_subgraph(&g.ball(v, radius).unwrap()).unwrap();
            prop_assert_eq!(certificate(&view.local).unwrap(), certificate(&ball).unwrap());
            prop_assert_eq!(truth.local_to_source[v][view.center_pos.unwrap()], v);
            prop_assert!(view.check_closure().is_ok());
            prop_assert_eq!(map.len(), view.local.n());
        }
        if g.within_distance_two() && radius == 2 {
            prop_assert!(c.views.iter().all(|v| v.local.n() == g.n()));
        }
    }

    #[test]
    fn anonymization_keeps_views_isomorphic(g in graph(25), s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = shred(&g, 2, s1, true).unwrap();
        let b = shred(&g, 2, s2, true).unwrap();
        for (x, y) in a.views.iter().zip(&b.views) {
            prop_assert_eq!(certificate(&x.local).unwrap(), certificate(&y.local).unwrap());
        }
    }

    #[test]
    fn collection_round_trip(g in graph(25), radius in 1usize..=2, labeled in any::<bool>(), seed in any::<u64>()) {
        let c = shred(&g, radius, seed, labeled).unwrap();
        let text = c.to_text();
        let back = NeighborhoodCollection::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn assemblers_are_sound_and_anonymization_invariant(g in graph(30), s1 in any::<u64>(), s2 in any::<u64>()) {
        let o1 = assemble_from_1nbhd(&shred(&g, 1, s1, true).unwrap()).unwrap();
        let o2 = assemble_from_1nbhd(&shred(&g, 1, s2, true).unwrap()).unwrap();
        prop_assert_eq!(&o1, &o2);
        if o1.status == AssemblyStatus::ExactSuccess {
            prop_assert_eq!(&o1.graph, &g);
        }
        for e in o1.graph.edges() {
            prop_assert!(g.has_edge(e.0, e.1) || o1.status != AssemblyStatus::ExactSuccess);
        }
        let b1 = assemble_from_2nbhd_fingerprint(&shred(&g, 2, s1, true).unwrap()).unwrap();
        let b2 = assemble_from_2nbhd_fingerprint(&shred(&g, 2, s2, true).unwrap()).unwrap();
        prop_assert_eq!(&b1, &b2);
        if b1.status == AssemblyStatus::ExactSuccess {
            prop_assert_eq!(&b1.graph, &g);
        }
    }

    #[test]
    fn l_sets_match_source(g in graph(25), seed in any::<u64>()) {
        let (c, truth) = shred_with_truth(&g, 2, seed, true).unwrap();
        let dist: Vec<_> = (0..g.n()).map(|v| g.distances_from(v).unwrap()).collect();
        for (u, view) in c.views.iter().enumerate() {
            let pos = view.center_pos.unwrap();
            let map = &truth.local_to_source[u];
            for &w0 in view.local.neighbors(pos) {
                let v = map[w0];
                let local_set = distance_two_set(view, pos, w0);
                let mut mapped: Vec<usize> = local_set.iter().map(|&x| map[x]).collect();
                mapped.sort_unstable();
                let direct: Vec<usize> = (0..g.n())
                    .filter(|&x| dist[u][x] == Some(2) && dist[v][x] == Some(2))
                    .collect();
                prop_assert_eq!(&mapped, &direct);
                let (in_view, _) = view.local.induced_subgraph(&local_set).unwrap();
                let (in_source, _) = g.induced_subgraph(&direct).unwrap();
                prop_assert_eq!(in_view.edge_count(), in_source.edge_count());
                prop_assert_eq!(certificate(&in_view).unwrap(), certificate(&in_source).unwrap());
            }
        }
    }

    #[test]
    fn same_neighborhoods_is_reflexive_and_symmetric(g in graph(10), h in graph(10), radius in 1usize..=2) {
        prop_assert!(same_r_neighborhoods(&g, &g, radius).unwrap());
        if g.n() == h.n() {
            prop_assert_eq!(
                same_r_neighborhoods(&g, &h, radius).unwrap(),
                same_r_neighborhoods(&h, &g, radius).unwrap()
            );
        }
    }

    #[test]
    fn star_count_matches_recount(g in graph(60), alpha in 0.05..0.95f64) {
        let r = star_witness(&g, alpha).unwrap();
        let limit = (g.n() as f64).powf(1.0 - (alpha + 2.0 / 3.0) / 2.0);
        let recount = (0..g.n())
            .filter(|&v| {
                let nb = g.neighbors(v);
                let no_inner_edge = nb.iter().all(|&a| nb.iter().all(|&b| !g.has_edge(a, b)));
                (nb.len() as f64) <= limit && no_inner_edge
            })
            .count();
        prop_assert_eq!(r.star_count, recount);
        prop_assert!(r.pigeonhole_holds());
        prop_assert_eq!(r.passed, r.multiplicity as f64 >= r.threshold);
        for v in 0..g.n() {
            let nb = g.neighbors(v);
            prop_assert_eq!(is_star(&g, v), nb.iter().all(|&a| nb.iter().all(|&b| !g.has_edge(a, b))));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn certificate_is_permutation_invariant((g, perm) in graph_and_perm(50)) {
        let h = g.relabel(&perm).unwrap();
        prop_assert_eq!(certificate(&g).unwrap(), certificate(&h).unwrap());
    }
}
