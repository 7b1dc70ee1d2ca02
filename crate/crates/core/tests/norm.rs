use proptest::prelude::*;
use wulff_core::norm::{conjugate_exponent, flower, DualPair, Norm, NormSpec};
use wulff_core::Error;

fn pair(p: f64) -> DualPair {
    DualPair::from_spec(NormSpec::p_norm(p, 2)).unwrap()
}

fn nonzero() -> impl Strategy<Value = [f64; 2]> {
    [-3.0..3.0f64, -3.0..3.0f64].prop_filter("away from 0", |x| x[0].hypot(x[1]) > 1e-3)
}

proptest! {
    #[test]
    fn p_norm_axioms(p in 1.05..8.0f64, x in nonzero(), y in nonzero(), t in -4.0..4.0f64) {
        let n = Norm::new(NormSpec::p_norm(p, 2)).unwrap();
        let hx = n.eval(&x);
        prop_assert!(hx > 0.0);
        prop_assert!((n.eval(&[t * x[0], t * x[1]]) - t.abs() * hx).abs() <= 1e-12 * hx.max(1.0) * t.abs().max(1.0));
        let s = [x[0] + y[0], x[1] + y[1]];
        prop_assert!(n.eval(&s) <= hx + n.eval(&y) + 1e-12);
    }

    #[test]
    fn gradient_identities(p in 1.1..6.0f64, x in nonzero()) {
        let pr = pair(p);
        let h = pr.primal().eval(&x);
        let g = pr.primal().grad(&x).unwrap();
        prop_assert!((x[0] * g[0] + x[1] * g[1] - h).abs() <= 1e-12 * h);
        prop_assert!((pr.dual_eval(&g) - 1.0).abs() <= 1e-12);
        // H0(x) DH(DH0(x)) = x
        let back = pr.dual_grad(&g).unwrap();
        prop_assert!((h * back[0] - x[0]).abs() <= 1e-9 * h && (h * back[1] - x[1]).abs() <= 1e-9 * h);
    }

    #[test]
    fn hoelder_inequality(p in 1.1..6.0f64, x in nonzero(), xi in nonzero()) {
        let pr = pair(p);
        let lhs = x[0] * xi[0] + x[1] * xi[1];
        prop_assert!(lhs <= pr.primal().eval(&x) * pr.dual_eval(&xi) * (1.0 + 1e-12));
    }

    #[test]
    fn numeric_dual_matches_conjugate_exponent(p in 1.2..5.0f64, xi in nonzero()) {
        let numeric = DualPair::numeric(Norm::new(NormSpec::p_norm(p, 2)).unwrap());
        let q = Norm::new(NormSpec::p_norm(conjugate_exponent(p), 2)).unwrap();
        let exact = q.eval(&xi);
        prop_assert!((numeric.dual_eval(&xi) - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn lagrangian_euler_relation(p in 1.1..6.0f64, xi in nonzero()) {
        let pr = pair(p);
        let dv = pr.lagrangian_grad(&xi).unwrap();
        let v = pr.lagrangian(&xi);
        prop_assert!((xi[0] * dv[0] + xi[1] * dv[1] - 2.0 * v).abs() <= 1e-11 * v.max(1.0));
    }

    #[test]
    fn quadratic_dual_uses_inverse(a in 0.2..5.0f64, b in 0.2..5.0f64, xi in nonzero()) {
        let pr = DualPair::from_spec(NormSpec::diagonal(&[a, b])).unwrap();
        let exact = (xi[0] * xi[0] / a + xi[1] * xi[1] / b).sqrt();
        prop_assert!((pr.dual_eval(&xi) - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn flower_gauge_is_a_norm(x in nonzero(), y in nonzero()) {
        let n = Norm::new(flower::flower_spec()).unwrap();
        let s = [x[0] + y[0], x[1] + y[1]];
        prop_assert!(n.eval(&s) <= n.eval(&x) + n.eval(&y) + 1e-10);
        // The unit ball lies in the Euclidean unit disc and contains the l1 ball.
        let h = n.eval(&x);
        prop_assert!(h >= x[0].hypot(x[1]) * (1.0 - 1e-10));
        prop_assert!(h <= (x[0].abs() + x[1].abs()) * (1.0 + 1e-10));
    }
}

#[test]
fn flower_unit_ball_touches_axes_at_one() {
    let n = Norm::new(flower::flower_spec()).unwrap();
    for x in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
        assert!((n.eval(&x) - 1.0).abs() < 1e-10);
    }
    assert!((n.eval(&[2.0, 0.0]) - 2.0).abs() < 1e-10);
}

#[test]
fn gradient_at_origin_is_a_domain_error() {
    let n = Norm::euclidean(2);
    assert!(matches!(n.grad(&[0.0, 0.0]), Err(Error::Domain(_))));
}

#[test]
fn spec_json_round_trip() {
    for spec in [NormSpec::p_norm(3.0, 2), NormSpec::diagonal(&[4.0, 1.0]), flower::flower_spec(), NormSpec::euclidean(3)] {
        let json = serde_json::to_string(&spec).unwrap();
        let back: NormSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
    let v: serde_json::Value = serde_json::to_value(flower::flower_spec()).unwrap();
    assert_eq!(v["family"], "disc_hull_gauge");
}
