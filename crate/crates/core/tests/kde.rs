mod common;

use bspbn::binned_kde::SbkdeCpd;
use bspbn::binning::BinningRule;
use bspbn::kde::{normal_reference_bandwidth, BandwidthMatrix, CkdeCpd, KdeModel};
use bspbn::learning::LgCpd;
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn columns(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..points[0].len()).map(|j| points.iter().map(|p| p[j]).collect()).collect()
}

#[test]
fn kde_and_ckde_match_brute_force() {
    for case in 0..100u64 {
        let mut r = rng(case);
        let d = 1 + (case % 4) as usize;
        let n = r.random_range(1..=50);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
        let h = random_spd(&mut r, d, 0.1, 1.5);
        let cols = columns(&points);
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let bw = BandwidthMatrix::from_rows(&h).unwrap();
        let kde = KdeModel::new(&refs, bw.clone()).unwrap();
        let ckde = CkdeCpd::new(refs[0], &refs[1..], bw).unwrap();
        for _ in 0..3 {
            let x: Vec<f64> = (0..d).map(|_| r.random_range(-4.0..4.0)).collect();
            assert!(rel_close(kde.logpdf(&x), kde_log(&points, &h, &x), 1e-12), "case {case}");
            assert!(rel_close(ckde.logpdf(&x), ckde_log(&points, &h, &x), 1e-12), "case {case}");
        }
    }
}

#[test]
fn hand_values() {
    let k = KdeModel::new(&[&[0.4]], BandwidthMatrix::scalar(1.0).unwrap()).unwrap();
    assert!((k.logpdf(&[0.4]) + 0.918_938_533_204_672_7).abs() < 1e-12);
    let k = KdeModel::new(&[&[-1.0, 1.0]], BandwidthMatrix::scalar(1.0).unwrap()).unwrap();
    assert!((k.logpdf(&[0.0]) + 1.418_938_533_204_672_7).abs() < 1e-12);
}

#[test]
fn one_parent_hand_case() {
    let child = [0.0, 1.0, 2.5];
    let parent = [1.0, 0.2, -0.3];
    let h = vec![vec![0.5, 0.1], vec![0.1, 0.4]];
    let cpd = CkdeCpd::new(&child, &[&parent], BandwidthMatrix::from_rows(&h).unwrap()).unwrap();
    let points: Vec<Vec<f64>> = (0..3).map(|i| vec![child[i], parent[i]]).collect();
    let row = [0.7, 0.5];
    let joint: f64 = points.iter().map(|p| gauss_log(&[row[0] - p[0], row[1] - p[1]], &h).exp()).sum();
    let marg: f64 = points.iter().map(|p| gauss_log(&[row[1] - p[1]], &[vec![0.4]]).exp()).sum();
    assert!((cpd.logpdf(&row) - (joint / marg).ln()).abs() < 1e-12);
}

#[test]
fn kde_integrates_to_one() {
    let mut r = rng(11);
    let xs = normal_sample(&mut r, 500);
    let kde = KdeModel::fit(&[&xs], &["x"]).unwrap();
    let h = kde.bandwidth().matrix()[(0, 0)].sqrt();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min) - 5.0 * h;
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 5.0 * h;
    let mass = simpson(|x| kde.logpdf(&[x]).exp(), lo, hi, 10_000);
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
}

#[test]
fn conditional_integrates_to_one_over_child() {
    let mut r = rng(12);
    let a = normal_sample(&mut r, 300);
    let b: Vec<f64> = a.iter().zip(normal_sample(&mut r, 300)).map(|(x, e)| 0.8 * x + 0.5 * e).collect();
    let ckde = CkdeCpd::fit(&b, &[&a], &["b", "a"]).unwrap();
    let sb = SbkdeCpd::fit(&b, &[&a], &["b", "a"], BinningRule::Linear, 64).unwrap();
    for pa in [-1.0, 0.0, 0.7] {
        let m = simpson(|x| ckde.logpdf(&[x, pa]).exp(), -8.0, 8.0, 4000);
        assert!((m - 1.0).abs() < 1e-3, "{m}");
        let m = simpson(|x| sb.logpdf(&[x, pa]).exp(), -8.0, 8.0, 4000);
        assert!((m - 1.0).abs() < 1e-3, "{m}");
    }
}

#[test]
fn independent_parent_barely_changes_child_density() {
    let mut r = rng(13);
    let x = normal_sample(&mut r, 2000);
    let y = normal_sample(&mut r, 2000);
    let cond = CkdeCpd::fit(&x, &[&y], &["x", "y"]).unwrap();
    let marg = KdeModel::fit(&[&x], &["x"]).unwrap();
    let xt = normal_sample(&mut r, 200);
    let yt = normal_sample(&mut r, 200);
    let a: f64 = cond.logpdf_columns(&xt, &[&yt]).iter().sum::<f64>() / 200.0;
    let b: f64 = marg.logpdf_columns(&[&xt]).iter().sum::<f64>() / 200.0;
    assert!((a - b).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn kde_approaches_gaussian_on_gaussian_data() {
    let mut r = rng(14);
    let x: Vec<f64> = normal_sample(&mut r, 5000).iter().map(|v| 2.0 + 1.5 * v).collect();
    let kde = KdeModel::fit(&[&x], &["x"]).unwrap();
    let lg = LgCpd::fit(&x, &[], &["x"]).unwrap();
    let test: Vec<f64> = normal_sample(&mut r, 1000).iter().map(|v| 2.0 + 1.5 * v).collect();
    let a = kde.logpdf_columns(&[&test]).iter().sum::<f64>() / 1000.0;
    let b = lg.logpdf_columns(&test, &[]).iter().sum::<f64>() / 1000.0;
    assert!((a - b).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn bandwidth_scales_quadratically() {
    let x = [0.3, -1.2, 2.2, 0.9, 1.4, -0.1];
    let sx: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
    let a = normal_reference_bandwidth(&[&x], &["x"]).unwrap();
    let b = normal_reference_bandwidth(&[&sx], &["x"]).unwrap();
    assert!((b.matrix()[(0, 0)] - 9.0 * a.matrix()[(0, 0)]).abs() < 1e-12);
    let c = [1.0, 1.0, 1.0];
    let err = normal_reference_bandwidth(&[&x[..3], &c], &["x", "c"]).unwrap_err();
    assert!(err.to_string().contains('c'));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_leaves_density_unchanged(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..30),
        shift in -100.0f64..100.0,
        q in (-6.0f64..6.0, -6.0f64..6.0),
    ) {
        let bw = BandwidthMatrix::from_rows(&[vec![0.6, 0.2], vec![0.2, 0.5]]).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let xs2: Vec<f64> = xs.iter().map(|v| v + shift).collect();
        let ys2: Vec<f64> = ys.iter().map(|v| v + shift).collect();
        let a = KdeModel::new(&[&xs, &ys], bw.clone()).unwrap().logpdf(&[q.0, q.1]);
        let b = KdeModel::new(&[&xs2, &ys2], bw).unwrap().logpdf(&[q.0 + shift, q.1 + shift]);
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn far_queries_stay_finite(x in -1e6f64..1e6) {
        let k = KdeModel::new(&[&[0.0, 1.0, 2.0]], BandwidthMatrix::scalar(0.01).unwrap()).unwrap();
        let v = k.logpdf(&[x]);
        prop_assert!(v.is_finite());
    }
}
