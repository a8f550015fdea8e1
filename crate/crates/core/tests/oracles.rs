use hypspin_core::graphs::*;
use hypspin_core::oracles::*;
use proptest::prelude::*;

#[test]
fn tree_correlations_are_products() {
    for (b, depth) in [(2, 3), (3, 2), (1, 9)] {
        let g = build_reference(Reference::Tree { branching: b, depth }).unwrap();
        assert!(g.vertex_count() <= 15);
        let dist = distances(&g, VertexId(1)).unwrap();
        for beta in [0.3, 1.0, 2.5] {
            for y in g.vertices() {
                let exact = brute_force_ising(&g, beta, VertexId(1), y).unwrap().value;
                let want = beta.tanh().powi(dist[y.0].unwrap() as i32);
                assert!((exact - want).abs() < 1e-10, "b{b} d{depth} beta {beta} y {y}");
            }
        }
    }
}

#[test]
fn enumeration_handles_twenty_vertices() {
    let g = build_reference(Reference::Path { length: 19 }).unwrap();
    let r = brute_force_ising(&g, 0.7, VertexId(0), VertexId(19)).unwrap();
    assert!((r.value - 0.7f64.tanh().powi(19)).abs() < 1e-10);
    assert!(r.error_bound >= 0.0);
}

#[test]
fn bessel_ratio_is_increasing() {
    let mut prev = -1.0;
    for i in 0..=200 {
        let beta = i as f64 * 0.05;
        let r = bessel_ratio(beta).unwrap();
        assert!(r.value > prev, "beta {beta}");
        assert!(r.error_bound <= 1e-10);
        prev = r.value;
    }
}

#[test]
fn dense_solves_report_small_errors() {
    let g = contract_boundary(&build_triangulation(7, 3).unwrap()).unwrap();
    let r = dense_resistance(&g, VertexId(0), VertexId(g.vertex_count() - 1)).unwrap();
    assert!(r.error_bound < 1e-10);
    assert!(r.value > 0.0);
}

proptest! {
    #[test]
    fn bessel_ratio_bounds(beta in 0.0f64..60.0) {
        let r = bessel_ratio(beta).unwrap();
        prop_assert!(r.value >= 0.0 && r.value < 1.0);
        // I1/I0 < beta/2 and I1/I0 > beta / (1 + sqrt(1 + beta^2)) (Amos-type bounds)
        if beta > 0.0 {
            prop_assert!(r.value <= beta / 2.0 + 1e-12);
            prop_assert!(r.value >= beta / (1.0 + (1.0 + beta * beta).sqrt()) - 1e-12);
        }
    }

    #[test]
    fn path_correlation_is_power(d in 0usize..30, beta in 0.0f64..5.0) {
        let r = bessel_ratio(beta).unwrap().value;
        let p = o2_path_correlation(d, beta).unwrap();
        prop_assert!((p.value - r.powi(d as i32)).abs() <= 1e-15);
        prop_assert!(p.error_bound >= 0.0);
    }
}
