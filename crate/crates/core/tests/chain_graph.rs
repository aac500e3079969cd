use chaoslab_core::chain::{
    build_transition_graph, chain_components, tarjan_scc, verify_proximal_witness, Discretized, ProximalSearch,
    TransitionGraph,
};
use chaoslab_core::{Chain, MetricSystem, SftSystem, ToralMap};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reachability by repeated relaxation; `reach[i][j]` iff a path of length ≥ 0 leads i → j.
fn closure(adj: &[Vec<u32>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !row[v as usize] {
                    row[v as usize] = true;
                    stack.push(v as usize);
                }
            }
        }
    }
    reach
}

/// Same component iff mutually reachable.
fn assert_partition_matches(adj: &[Vec<u32>], ids: &[u32]) {
    let reach = closure(adj);
    let n = adj.len();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(ids[i] == ids[j], reach[i][j] && reach[j][i], "boxes {i}, {j}");
        }
    }
}

fn check_graph(g: &TransitionGraph) {
    assert!(g.num_boxes() <= 200);
    let comps = chain_components(g);
    assert_partition_matches(&g.adjacency, &comps.scc_id);
    // Ids ordered by smallest member.
    let mut first = vec![usize::MAX; comps.components.len()];
    for (i, &c) in comps.scc_id.iter().enumerate() {
        first[c as usize] = first[c as usize].min(i);
    }
    assert!(first.windows(2).all(|w| w[0] < w[1]));
    // Recurrent iff a cycle passes through the component.
    for c in &comps.components {
        let members: Vec<usize> = (0..g.num_boxes()).filter(|&i| comps.scc_id[i] == c.id).collect();
        let cyc = members.len() > 1 || g.has_edge(members[0], members[0]);
        assert_eq!(c.recurrent, cyc);
        assert_eq!(c.size, members.len());
    }
}

fn small_graphs() -> Vec<TransitionGraph> {
    let mut out = Vec::new();
    for sys in [SftSystem::full_shift(2), SftSystem::golden_mean(), SftSystem::two_fixed_points(), SftSystem::period_two()] {
        for depth in 1..=6 {
            for k in 1..=4 {
                let g = build_transition_graph(&sys, depth as f64, 0.5f64.powi(k)).unwrap();
                if g.num_boxes() <= 200 {
                    out.push(g);
                }
            }
        }
    }
    let cat = ToralMap::cat();
    for n in [2usize, 4, 8, 12, 14] {
        for delta in [0.0, 1e-3, 1e-2, 0.1] {
            out.push(build_transition_graph(&cat, 1.0 / n as f64, delta).unwrap());
        }
    }
    out
}

#[test]
fn suite_graphs_match_closure_oracle() {
    let graphs = small_graphs();
    assert!(graphs.len() > 40);
    for g in &graphs {
        check_graph(g);
    }
}

#[test]
fn two_fixed_points_give_two_components() {
    let sys = SftSystem::two_fixed_points();
    for depth in 1..=8 {
        let g = build_transition_graph(&sys, depth as f64, 1.0 / 16.0).unwrap();
        assert_eq!(chain_components(&g).num_recurrent_components(), 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tarjan_matches_closure(n in 1usize..120, density in 0.0..0.08f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let adj: Vec<Vec<u32>> = (0..n)
            .map(|_| (0..n as u32).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        let ids = tarjan_scc(&adj);
        prop_assert_eq!(ids.len(), n);
        assert_partition_matches(&adj, &ids);
    }
}

/// Graph paths of box representatives are chains with slack `δ + (L+1)·diam`.
#[test]
fn graph_paths_are_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cat = ToralMap::cat();
    let g = build_transition_graph(&cat, 1.0 / 32.0, 1e-3).unwrap();
    let slack = g.path_slack(cat.lipschitz_bound());
    for _ in 0..200 {
        let mut i = rng.gen_range(0..g.num_boxes());
        let mut pts = vec![cat.representative(&g.cover, i)];
        for _ in 0..30 {
            let succ = g.successors(i);
            i = succ[rng.gen_range(0..succ.len())] as usize;
            pts.push(cat.representative(&g.cover, i));
        }
        let c = Chain::new("cat", pts, slack).unwrap();
        assert!(c.is_valid(&cat), "max defect {} > {slack}", c.max_defect(&cat));
    }
    let gm = SftSystem::golden_mean();
    let g = build_transition_graph(&gm, 6.0, 1.0 / 8.0).unwrap();
    let slack = g.path_slack(gm.lipschitz_bound());
    for _ in 0..200 {
        let mut i = rng.gen_range(0..g.num_boxes());
        let mut pts = vec![gm.representative(&g.cover, i)];
        for _ in 0..30 {
            let succ = g.successors(i);
            i = succ[rng.gen_range(0..succ.len())] as usize;
            pts.push(gm.representative(&g.cover, i));
        }
        assert!(pts.iter().all(|p| gm.contains(p)));
        assert!(Chain::new("golden-mean", pts, slack).unwrap().is_valid(&gm));
    }
}

/// Every δ'-chain with δ' ≤ δ follows graph edges.
#[test]
fn point_chains_follow_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cat = ToralMap::cat();
    let delta = 1e-2;
    let g = build_transition_graph(&cat, 1.0 / 16.0, delta).unwrap();
    for t in 0..200 {
        let d = delta * [1.0, 0.5, 1e-3][t % 3];
        let po = cat.random_pseudo_orbit(&mut rng, 40, d).unwrap();
        let boxes: Vec<usize> = po.points.iter().map(|p| cat.locate(&g.cover, p).unwrap()).collect();
        for w in boxes.windows(2) {
            assert!(g.has_edge(w[0], w[1]), "missing edge {} -> {}", w[0], w[1]);
        }
    }
    for sys in [SftSystem::golden_mean(), SftSystem::full_shift(2)] {
        for k in 1..=4 {
            let delta = 0.5f64.powi(k + 1);
            let g = build_transition_graph(&sys, 5.0, delta).unwrap();
            for _ in 0..50 {
                let po = sys.random_pseudo_orbit(&mut rng, 40, delta).unwrap();
                let boxes: Vec<usize> = po.points.iter().map(|p| sys.locate(&g.cover, p).unwrap()).collect();
                for w in boxes.windows(2) {
                    assert!(g.has_edge(w[0], w[1]), "{}: missing edge {} -> {}", sys.name, w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn refining_does_not_merge_two_fixed_points() {
    let sys = SftSystem::two_fixed_points();
    let g = build_transition_graph(&sys, 4.0, 1.0 / 16.0).unwrap();
    let comps = chain_components(&g);
    let zero = sys.locate(&g.cover, &chaoslab_core::BiInfSeq::constant(0)).unwrap();
    let one = sys.locate(&g.cover, &chaoslab_core::BiInfSeq::constant(1)).unwrap();
    assert_ne!(comps.scc_id[zero], comps.scc_id[one]);
    assert_eq!(g.cover.label(zero), "0000");
}

#[test]
fn golden_mean_witness_chains_are_valid() {
    let sys = SftSystem::golden_mean();
    let cands = sys.periodic_points(2);
    let w = sys.find_chain_proximal_pair(&cands, &[0.125], 4096).unwrap();
    let w = w.witness().expect("pair found");
    assert!(verify_proximal_witness(&sys, w));
    for c in w.chains() {
        assert!(c.points.iter().all(|p| sys.contains(p)));
        assert!(c.points.windows(2).all(|s| sys.distance(&sys.forward(&s[0]), &s[1]) <= w.delta));
    }
}
