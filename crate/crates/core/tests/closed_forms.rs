mod common;

use localtime::closed_forms::{self, LineWindow, StarPair, StarVertex};
use localtime::exact;
use localtime::graph::{Endpoint, EnsembleSpec};
use localtime::zdomain::{self, Mode};
use localtime::asymptotics;

const Z_GRID: [f64; 4] = [1.1, 1.5, 2.0, 5.0];

#[test]
fn complete_resolvent_matches_solve() {
    for n in 2..=7 {
        let p = closed_forms::complete_transition(n).unwrap();
        let rows = common::rows(&p);
        for z in Z_GRID {
            for a in 0..n {
                for b in 0..n {
                    let c = closed_forms::complete_resolvent(n, z, a, b).unwrap();
                    assert!((c - common::resolvent_of(&rows, z, a, b)).abs() < 1e-10);
                    assert!((c - zdomain::resolvent_element(&p, z, a, b).unwrap()).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn complete_mean_matches_matrix_powers() {
    for size in 2..=6 {
        let p = closed_forms::complete_transition(size).unwrap();
        for n in 0..=64 {
            let other = closed_forms::complete_mean_local_time(size, n, false).unwrap();
            let start = closed_forms::complete_mean_local_time(size, n, true).unwrap();
            assert!((other - exact::mean_local_time_free(&p, 0, 1, n).unwrap()).abs() < 1e-10);
            assert!((start - exact::mean_local_time_free(&p, 0, 0, n).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn star_resolvent_matches_solve() {
    for n in 1..=6 {
        let p = closed_forms::star_transition(n).unwrap();
        let rows = common::rows(&p);
        for z in Z_GRID {
            let r = closed_forms::star_resolvent(n, z).unwrap();
            for a in 0..=n {
                for b in 0..=n {
                    assert!((r[(a, b)] - common::resolvent_of(&rows, z, a, b)).abs() < 1e-10);
                    let by_class = closed_forms::star_resolvent_element(n, z, StarPair::of(a, b)).unwrap();
                    assert_eq!(by_class, r[(a, b)]);
                }
            }
        }
    }
}

#[test]
fn star_limits_match_stationary() {
    for n in [1, 2, 3, 5, 10] {
        let p = closed_forms::star_transition(n).unwrap();
        let pi = asymptotics::invariant_distribution(&p).unwrap();
        assert!((pi.get(0) - closed_forms::star_limiting_fraction(n, StarVertex::Center)).abs() < 1e-12);
        assert!((pi.get(n) - closed_forms::star_limiting_fraction(n, StarVertex::Peripheral)).abs() < 1e-12);
    }
}

#[test]
fn line_resolvent_matches_window() {
    let window = LineWindow::new(60);
    let p = window.transition();
    let rows = common::rows(&p);
    let z = 1.5;
    for delta in -10i64..=10 {
        let generic = common::resolvent_of(&rows, z, window.index(0).unwrap(), window.index(delta).unwrap());
        assert!((closed_forms::line_resolvent(z, delta).unwrap() - generic).abs() < 1e-8);
    }
    // near-critical z needs a wider window: the decay ratio is z - sqrt(z^2 - 1)
    for z in Z_GRID {
        let ratio = z - (z * z - 1.0).sqrt();
        let radius = 10 + (40.0 / -ratio.ln()).ceil() as usize;
        let w = LineWindow::new(radius);
        let r = zdomain::resolvent_element(&w.transition(), z, w.index(0).unwrap(), w.index(3).unwrap()).unwrap();
        assert!((closed_forms::line_resolvent(z, 3).unwrap() - r).abs() < 1e-10);
    }
}

#[test]
fn line_zero_visit_matches_window() {
    for n in 0..=40usize {
        let window = LineWindow::covering(n, 0);
        window.check_exact(n, 0).unwrap();
        let p = window.transition();
        let origin = window.index(0).unwrap();
        let z = exact::zero_visit_probability(&p, &EnsembleSpec::free(origin, n), origin).unwrap();
        assert!((z - closed_forms::line_zero_visit(n)).abs() < 1e-12, "n = {n}");
    }
    // parity plateau
    for m in 0..30 {
        assert_eq!(closed_forms::line_zero_visit(2 * m), closed_forms::line_zero_visit(2 * m + 1));
    }
}

#[test]
fn line_distribution_matches_augmented_chain() {
    let window = LineWindow::new(25);
    let p = window.transition();
    let origin = window.index(0).unwrap();
    let order = 20;
    for l in 0..=4u32 {
        let closed = closed_forms::line_distribution_series(l, order).unwrap();
        let generic = zdomain::distribution_z(&p, origin, Endpoint::Free, origin, l, Mode::Series { order }).unwrap();
        for n in 0..=order {
            let t = exact::local_time_distribution(&p, &EnsembleSpec::free(origin, n), origin, n.max(l as usize) + 1).unwrap();
            let c = closed.coefficient(n as i64).unwrap();
            assert!((c - t.mass[l as usize]).abs() < 1e-10, "l = {l}, n = {n}");
            assert!((c - generic.as_series().unwrap().coefficient(n as i64).unwrap()).abs() < 1e-10);
        }
    }
    // the transform itself, against the window at a z where the window is wide enough
    let z = 3.0;
    for l in 0..4 {
        let num = zdomain::distribution_z(&p, origin, Endpoint::Free, origin, l, Mode::Numeric { z }).unwrap();
        assert!((num.as_numeric().unwrap() - closed_forms::line_distribution_z(l, z).unwrap()).abs() < 1e-10);
    }
}
