mod common;

use localtime::asymptotics;
use localtime::exact;
use localtime::graph::{Endpoint, EnsembleSpec};
use localtime::zdomain::{self, Mode, NumericResolvent, ResolventAlgebra};
use localtime::zseries;
use localtime::TransitionMatrix;
use proptest::prelude::*;

const Z_GRID: [f64; 4] = [1.1, 1.5, 2.0, 5.0];

prop_compose! {
    fn chain(max: usize)(size in 1..=max, seed in any::<u64>()) -> TransitionMatrix {
        common::random_strongly_connected(&mut common::rng(seed), size)
    }
}

prop_compose! {
    /// Arbitrary (possibly reducible) chain with some zero entries.
    fn any_chain(max: usize)(size in 1..=max)(
        raw in prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.05f64..1.0], size), size)
    ) -> TransitionMatrix {
        let rows: Vec<Vec<f64>> = raw
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                if r.iter().all(|&w| w == 0.0) {
                    r[i] = 1.0;
                }
                r
            })
            .collect();
        TransitionMatrix::from_adjacency_rows(&rows).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chapman_kolmogorov(p in any_chain(6), m in 0usize..8, k in 0usize..8, seed in any::<u64>()) {
        let size = p.size();
        let va = (seed as usize) % size;
        let vb = (seed as usize / 7) % size;
        let lhs = p.n_step_probability(va, vb, m + k).unwrap();
        let rhs: f64 = (0..size)
            .map(|u| p.n_step_probability(va, u, m).unwrap() * p.n_step_probability(u, vb, k).unwrap())
            .sum();
        prop_assert!((lhs - rhs).abs() < 1e-10);
        let total: f64 = (0..size).map(|u| p.n_step_probability(va, u, m).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adjacency_ignores_row_scale(
        raw in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 4),
        row in 0usize..4,
        factor in 0.01f64..100.0,
    ) {
        let raw: Vec<Vec<f64>> = raw.into_iter().map(|mut r| { r[0] += 0.1; r }).collect();
        let mut scaled = raw.clone();
        for w in scaled[row].iter_mut() {
            *w *= factor;
        }
        let a = TransitionMatrix::from_adjacency_rows(&raw).unwrap();
        let b = TransitionMatrix::from_adjacency_rows(&scaled).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn total_time_and_marginalization(p in any_chain(5), n in 0usize..12, seed in any::<u64>()) {
        let size = p.size();
        let va = seed as usize % size;
        let v1 = (seed as usize / 5) % size;
        let v2 = (seed as usize / 11) % size;
        let free = EnsembleSpec::free(va, n);
        let total: f64 = (0..size).map(|v| exact::mean_local_time(&p, &free, v).unwrap()).sum();
        prop_assert!((total - n as f64).abs() < 1e-10);

        let fixed = |vb| EnsembleSpec::fixed(va, vb, n);
        let sum = |f: &dyn Fn(&EnsembleSpec) -> f64| (0..size).map(|vb| f(&fixed(vb))).sum::<f64>();
        let mean = |s: &EnsembleSpec| exact::mean_local_time(&p, s, v1).unwrap();
        let corr = |s: &EnsembleSpec| exact::correlation(&p, s, v1, v2).unwrap();
        let zero = |s: &EnsembleSpec| exact::zero_visit_probability(&p, s, v1).unwrap();
        let norm = |s: &EnsembleSpec| exact::normalization(&p, s).unwrap();
        prop_assert!((sum(&mean) - mean(&free)).abs() < 1e-10);
        prop_assert!((sum(&corr) - corr(&free)).abs() < 1e-10);
        prop_assert!((sum(&zero) - zero(&free)).abs() < 1e-10);
        prop_assert!((sum(&norm) - 1.0).abs() < 1e-10);
        for l in 0..=n {
            let d = |s: &EnsembleSpec| exact::local_time_distribution(&p, s, v1, n).unwrap().mass[l];
            prop_assert!((sum(&d) - d(&free)).abs() < 1e-10);
        }
    }

    #[test]
    fn moments_and_normalization(p in any_chain(5), n in 0usize..12, seed in any::<u64>(), fixed in any::<bool>()) {
        let size = p.size();
        let va = seed as usize % size;
        let v = (seed as usize / 3) % size;
        let spec = if fixed { EnsembleSpec::fixed(va, (seed as usize / 13) % size, n) } else { EnsembleSpec::free(va, n) };
        let t = exact::local_time_distribution(&p, &spec, v, n).unwrap();
        prop_assert!(t.mass.iter().all(|&m| m >= 0.0));
        prop_assert!((t.total() - exact::normalization(&p, &spec).unwrap()).abs() < 1e-10);
        prop_assert!((t.mean() - exact::mean_local_time(&p, &spec, v).unwrap()).abs() < 1e-10);
        prop_assert!((t.second_moment() - exact::correlation(&p, &spec, v, v).unwrap()).abs() < 1e-10);
        prop_assert!((t.mass[0] - exact::zero_visit_probability(&p, &spec, v).unwrap()).abs() < 1e-12);
        let m = exact::mean_local_time(&p, &spec, v).unwrap();
        prop_assert!(m >= -1e-15 && m <= n as f64 + 1e-12);
    }

    #[test]
    fn correlation_is_symmetric(p in any_chain(5), n in 0usize..10, seed in any::<u64>()) {
        let size = p.size();
        let (va, v1, v2) = (seed as usize % size, (seed as usize / 3) % size, (seed as usize / 17) % size);
        let a = exact::correlation_free(&p, va, v1, v2, n).unwrap();
        let b = exact::correlation_free(&p, va, v2, v1, n).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(exact::correlation_free(&p, va, v1, v1, n).unwrap() + 1e-12 >= exact::mean_local_time_free(&p, va, v1, n).unwrap());
    }

    #[test]
    fn resolvent_identity_and_row_sums(p in chain(7), zi in 0usize..4) {
        let z = Z_GRID[zi];
        let size = p.size();
        let rows = common::rows(&p);
        let r = NumericResolvent::new(&p, z).unwrap();
        for a in 0..size {
            for b in 0..size {
                let rp: f64 = (0..size).map(|u| r.element(a, u) * rows[u][b]).sum();
                let delta = if a == b { 1.0 } else { 0.0 };
                prop_assert!((rp - z * r.element(a, b) - delta).abs() < 1e-9);
                prop_assert!((r.element(a, b) - common::resolvent_of(&rows, z, a, b)).abs() < 1e-10);
            }
            let row: f64 = (0..size).map(|b| r.element(a, b)).sum();
            prop_assert!((row - 1.0 / (1.0 - z)).abs() < 1e-10);
        }
    }

    #[test]
    fn series_resolvent_identity(p in any_chain(5), order in 1usize..40, seed in any::<u64>()) {
        let size = p.size();
        let (va, vb) = (seed as usize % size, (seed as usize / 7) % size);
        let rows = common::rows(&p);
        let mut rp = localtime::ZSeries::zero(order as i64);
        for (u, row) in rows.iter().enumerate() {
            rp = &rp + &zseries::resolvent_element(&p, va, u, order).unwrap().scale(row[vb]);
        }
        // R P - z R = I, with z R = shift(-1) of R
        let zr = zseries::resolvent_element(&p, va, vb, order + 1).unwrap().shift(-1);
        let diff = &rp - &zr;
        for n in 0..=order as i64 - 1 {
            let expect = if n == 0 && va == vb { 1.0 } else { 0.0 };
            prop_assert!((diff.coefficient(n).unwrap() - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_condition(p in chain(7), z in 1.0001f64..8.0, seed in any::<u64>()) {
        let v = seed as usize % p.size();
        let r = NumericResolvent::new(&p, z).unwrap();
        let alpha = r.rp(v, v);
        prop_assert!(alpha < 0.5, "alpha = {alpha}");
    }

    #[test]
    fn deformed_resolvent_matches_direct(p in chain(7), u in -2.0f64..0.0, z in 1.0001f64..5.0, seed in any::<u64>()) {
        let size = p.size();
        let (v, a, b) = (seed as usize % size, (seed as usize / 3) % size, (seed as usize / 29) % size);
        let closed = zdomain::deformed_resolvent_element(&p, z, v, u, a, b).unwrap();
        let direct = zdomain::deformed_resolvent_direct(&p, z, v, u, a, b).unwrap();
        prop_assert!((closed - direct).abs() < 1e-9 * direct.abs().max(1.0));
        let mut m = common::rows(&p);
        for row in m.iter_mut() {
            row[v] *= u.exp();
        }
        prop_assert!((closed - common::resolvent_of(&m, z, a, b)).abs() < 1e-9 * closed.abs().max(1.0));
    }

    #[test]
    fn numeric_transform_sums_the_series(p in chain(5), zi in 1usize..4, seed in any::<u64>(), l in 0u32..4) {
        let z = Z_GRID[zi];
        let size = p.size();
        let (va, v) = (seed as usize % size, (seed as usize / 5) % size);
        let order = (40.0 / z.ln()).ceil() as usize;
        for e in [Endpoint::Free, Endpoint::Fixed((seed as usize / 41) % size)] {
            let num = zdomain::distribution_z(&p, va, e, v, l, Mode::Numeric { z }).unwrap().as_numeric().unwrap();
            let ser = zdomain::distribution_z(&p, va, e, v, l, Mode::Series { order }).unwrap();
            prop_assert!((num - ser.as_series().unwrap().evaluate(1.0 / z)).abs() < 1e-9 * num.abs().max(1.0));
            if l == 0 {
                let zero = zdomain::zero_visit_z(&p, z, va, e, v).unwrap();
                prop_assert!((num - zero).abs() < 1e-9 * num.abs().max(1.0));
            }
        }
    }

    #[test]
    fn stationary_is_invariant(p in chain(8)) {
        let pi = asymptotics::invariant_distribution(&p).unwrap().pi;
        let size = p.size();
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for b in 0..size {
            let image: f64 = (0..size).map(|a| pi[a] * p.get(a, b)).sum();
            prop_assert!((image - pi[b]).abs() < 1e-12);
            prop_assert!(pi[b] > 0.0);
        }
    }
}

#[test]
fn series_matches_exact_on_random_graphs() {
    let mut rng = common::rng(7);
    for _ in 0..10 {
        let size = 2 + (rand::Rng::random_range(&mut rng, 0..7));
        let p = common::random_strongly_connected(&mut rng, size);
        let n = 24;
        let (va, v1, v2) = (0, size - 1, size / 2);
        for e in [Endpoint::Free, Endpoint::Fixed(1)] {
            let mean = zdomain::mean_z(&p, va, e, v1, Mode::Series { order: n }).unwrap();
            let corr = zdomain::correlation_z(&p, va, e, v1, v2, Mode::Series { order: n }).unwrap();
            for k in 0..=n {
                let spec = EnsembleSpec { start: va, horizon: k, endpoint: e };
                let m = exact::mean_local_time(&p, &spec, v1).unwrap();
                let c = exact::correlation(&p, &spec, v1, v2).unwrap();
                assert!((mean.as_series().unwrap().coefficient(k as i64).unwrap() - m).abs() < 1e-9);
                assert!((corr.as_series().unwrap().coefficient(k as i64).unwrap() - c).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn initial_condition_independence() {
    let mut rng = common::rng(99);
    for size in [3, 5, 6] {
        let p = common::random_strongly_connected(&mut rng, size);
        for v1 in 0..size {
            let a = asymptotics::extrapolated_fraction(&p, 0, v1).unwrap();
            let b = asymptotics::extrapolated_fraction(&p, size - 1, v1).unwrap();
            let pi = asymptotics::limiting_local_time_fraction(&p, v1).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            assert!((a - pi).abs() < 1e-6);
        }
    }
}

#[test]
fn mean_fraction_converges_on_aperiodic_graph() {
    let p = common::complete(5);
    let pi = asymptotics::limiting_local_time_fraction(&p, 2).unwrap();
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32, 64, 128] {
        let gap = (exact::mean_local_time_free(&p, 0, 2, n).unwrap() / n as f64 - pi).abs();
        assert!(gap < prev);
        prev = gap;
    }
}
