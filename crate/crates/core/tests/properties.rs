use bspbn::binning::{bin_columns, bin_univariate, build_grid, BinningRule, Grid};
use bspbn::dag::Dag;
use bspbn::metrics::{hmd, shd};
use proptest::prelude::*;

fn rule() -> impl Strategy<Value = BinningRule> {
    prop_oneof![Just(BinningRule::Simple), Just(BinningRule::Linear)]
}

/// Columns of equal length, 1 to 3 of them.
fn dataset() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3, 1usize..=60).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-1e3f64..1e3, n), d)
    })
}

fn dag_from_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Dag {
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let mut dag = Dag::empty(&names).unwrap();
    for (u, v) in pairs {
        if u != v && !dag.has_arc(u, v) && dag.can_add_arc(u, v) {
            dag.add_arc(u, v).unwrap();
        }
    }
    dag
}

fn random_dag() -> impl Strategy<Value = Dag> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..20).prop_map(move |pairs| dag_from_pairs(n, pairs))
    })
}

fn dag_pair() -> impl Strategy<Value = (Dag, Dag)> {
    (2usize..8).prop_flat_map(|n| {
        let arcs = || prop::collection::vec((0..n, 0..n), 0..16);
        (arcs(), arcs()).prop_map(move |(a, b)| (dag_from_pairs(n, a), dag_from_pairs(n, b)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn binning_conserves_mass(cols in dataset(), m in 2usize..40, rule in rule()) {
        let grids: Vec<Grid> = cols.iter().map(|c| build_grid(c, m).unwrap()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let t = bin_columns(&refs, &grids, rule).unwrap();
        let n = cols[0].len() as f64;
        prop_assert!((t.weights().iter().sum::<f64>() - n).abs() <= 1e-9 * n);
        prop_assert!(t.weights().iter().all(|&w| w > 0.0));
        let cells: usize = grids.iter().map(|g| g.m).product();
        let per_row = match rule { BinningRule::Simple => 1, BinningRule::Linear => 1 << cols.len() };
        prop_assert!(t.len() <= cells.min(cols[0].len() * per_row));
    }

    #[test]
    fn grid_aligned_rules_agree(idx in prop::collection::vec((0usize..12, 0usize..7), 1..40)) {
        let gx = Grid::new(-2.0, 3.5, 12).unwrap();
        let gy = Grid::new(0.0, 1.0, 7).unwrap();
        let xs: Vec<f64> = idx.iter().map(|p| gx.point(p.0)).collect();
        let ys: Vec<f64> = idx.iter().map(|p| gy.point(p.1)).collect();
        let a = bin_columns(&[&xs, &ys], &[gx, gy], BinningRule::Simple).unwrap();
        let b = bin_columns(&[&xs, &ys], &[gx, gy], BinningRule::Linear).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn linear_weights_touch_enclosing_cell(x in -5.0f64..5.0, m in 2usize..30) {
        let g = Grid::new(-3.0, 4.0, m).unwrap();
        let bins = bin_univariate(x, &g, BinningRule::Linear);
        prop_assert!((bins.iter().map(|b| b.1).sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(bins.iter().all(|&(_, w)| (0.0..=1.0).contains(&w)));
        if bins.len() == 2 {
            prop_assert_eq!(bins[1].0, bins[0].0 + 1);
            let (lo, hi) = (g.point(bins[0].0), g.point(bins[1].0));
            prop_assert!(lo <= x && x <= hi);
        }
        let s = bin_univariate(x, &g, BinningRule::Simple);
        prop_assert_eq!(s.len(), 1);
        let c = x.clamp(g.lo, g.hi);
        prop_assert!((g.point(s[0].0) - c).abs() <= 0.5 * g.delta() + 1e-12);
    }

    #[test]
    fn topological_order_respects_arcs(dag in random_dag()) {
        prop_assert!(dag.is_acyclic());
        let order = dag.topological_order_indices().unwrap();
        prop_assert_eq!(order.len(), dag.node_count());
        let mut pos = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for (u, v) in dag.arcs() {
            prop_assert!(pos[u] < pos[v]);
        }
    }

    #[test]
    fn structural_distance_bounds((a, b) in dag_pair()) {
        let h = hmd(&a, &b).unwrap();
        let s = shd(&a, &b).unwrap();
        let shared = a.skeleton().iter().filter(|e| b.skeleton().contains(e)).count();
        prop_assert!(h <= s && s <= h + shared);
        prop_assert_eq!(h, hmd(&b, &a).unwrap());
        prop_assert_eq!(s, shd(&b, &a).unwrap());
        prop_assert_eq!(s == 0, a.arcs() == b.arcs());
        prop_assert_eq!(shd(&a, &a).unwrap(), 0);
    }
}

#[test]
fn thousand_random_binnings_conserve_mass() {
    use rand::{Rng, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let d = r.random_range(1..=4);
        let n = r.random_range(1..=200);
        let scale = 10f64.powi(r.random_range(-3..4));
        let cols: Vec<Vec<f64>> = (0..d).map(|_| (0..n).map(|_| scale * r.random_range(-1.0..1.0)).collect()).collect();
        let grids: Vec<Grid> = cols.iter().map(|c| build_grid(c, r.random_range(2..64)).unwrap()).collect();
        let rule = if r.random_bool(0.5) { BinningRule::Simple } else { BinningRule::Linear };
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let t = bin_columns(&refs, &grids, rule).unwrap();
        assert!((t.total() - n as f64).abs() <= 1e-9 * n as f64);
        assert!((t.weights().iter().sum::<f64>() - n as f64).abs() <= 1e-9 * n as f64);
    }
}
