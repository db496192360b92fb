use approx::assert_relative_eq;
use proptest::prelude::*;
use selberg_core::moebius::{BoundaryPoint, ElementClass, MoebiusElement};
use selberg_core::{Complex64, Error};

fn m(a: f64, b: f64, c: f64, d: f64) -> MoebiusElement {
    MoebiusElement::new(a, b, c, d).unwrap()
}

#[test]
fn compose_identity_inverse_and_diagonal_powers() {
    let g = m(2.0, 1.0, 1.0, 1.0);
    assert!(MoebiusElement::identity().compose(&g).approx_eq(&g, 1e-15));
    assert!(g.compose(&g.inverse()).approx_eq(&MoebiusElement::identity(), 1e-12));
    let h = MoebiusElement::diagonal(1.0);
    let sq = h.compose(&h);
    let e = std::f64::consts::E;
    assert_relative_eq!(sq.a(), e, max_relative = 1e-15);
    assert_relative_eq!(sq.d(), 1.0 / e, max_relative = 1e-15);
    assert_eq!(sq.b(), 0.0);
    assert_eq!(sq.c(), 0.0);
}

#[test]
fn classification() {
    assert_eq!(MoebiusElement::identity().classify(), ElementClass::Identity);
    assert_eq!(m(1.0, 1.0, 0.0, 1.0).classify(), ElementClass::Parabolic);
    assert_eq!(MoebiusElement::diagonal(1.0).classify(), ElementClass::Hyperbolic);
    let t = 0.3f64;
    assert_eq!(m(t.cos(), -t.sin(), t.sin(), t.cos()).classify(), ElementClass::Elliptic);
    assert_eq!(m(-1.0, 0.0, 0.0, -1.0).classify(), ElementClass::Identity);
}

#[test]
fn translation_lengths() {
    assert_relative_eq!(MoebiusElement::diagonal(1.0).translation_length().unwrap(), 1.0, max_relative = 1e-15);
    assert!(matches!(m(1.0, 1.0, 0.0, 1.0).translation_length(), Err(Error::NotHyperbolic { .. })));
    // trace 2(1 + sqrt 2): diag(x, 1/x) with x + 1/x = 2 + 2 sqrt 2.
    let t = 2.0 + 2.0 * 2f64.sqrt();
    let x = 0.5 * (t + (t * t - 4.0).sqrt());
    let g = m(x, 0.0, 0.0, 1.0 / x);
    // 2 arccosh(1 + sqrt 2), reference from a 50-digit evaluation.
    assert_relative_eq!(g.translation_length().unwrap(), 3.057_141_838_961_996_3, max_relative = 1e-14);
}

#[test]
fn fixed_points_examples() {
    let (p, q) = MoebiusElement::diagonal(1.0).fixed_points().unwrap();
    assert_eq!(p, BoundaryPoint::Infinity);
    assert_eq!(q, BoundaryPoint::Finite(0.0));

    let (p, q) = m(2.0, 1.0, 1.0, 1.0).fixed_points().unwrap();
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    assert_relative_eq!(p.finite().unwrap(), golden, max_relative = 1e-14);
    assert_relative_eq!(q.finite().unwrap(), 1.0 - golden, max_relative = 1e-14);

    let shift = m(1.0, 1.0, 0.0, 1.0);
    let g = MoebiusElement::diagonal(1.0).conjugate_by(&shift);
    let (p, q) = g.fixed_points().unwrap();
    assert_eq!(p, BoundaryPoint::Infinity);
    assert_relative_eq!(q.finite().unwrap(), 1.0, epsilon = 1e-14);
}

#[test]
fn attracting_point_first() {
    let g = m(2.0, 1.0, 1.0, 1.0);
    let (p, _) = g.fixed_points().unwrap();
    let mut z = Complex64::new(0.3, 0.7);
    for _ in 0..60 {
        z = g.apply(z);
    }
    assert!((z.re - p.finite().unwrap()).abs() < 1e-9 && z.im.abs() < 1e-9);
}

#[test]
fn determinant_invariant_on_long_words() {
    // Elliptic letters keep the entries O(1), so ad - bc is well conditioned.
    let rot = |t: f64| m(t.cos(), -t.sin(), t.sin(), t.cos());
    let letters = [rot(0.3), rot(-1.1), rot(2.9).conjugate_by(&m(1.25, 0.1, 0.0, 0.8))];
    let mut w = MoebiusElement::identity();
    for i in 0..200 {
        w = w.compose(&letters[i % 3]);
        assert!((w.det() - 1.0).abs() <= 1e-12);
    }
}

fn hyperbolic() -> impl Strategy<Value = MoebiusElement> {
    (0.2f64..3.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(l, x, y)| {
        let h = MoebiusElement::new(1.0, x, y, 1.0 + x * y).unwrap();
        MoebiusElement::diagonal(l).conjugate_by(&h)
    })
}

fn any_element() -> impl Strategy<Value = MoebiusElement> {
    (0.3f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| MoebiusElement::new(a, b, c, (1.0 + b * c) / a).unwrap())
}

proptest! {
    #[test]
    fn conjugation_preserves_length(g in hyperbolic(), h in any_element()) {
        let l = g.translation_length().unwrap();
        let conj = h.compose(&g.compose(&h.inverse()));
        prop_assert!((conj.translation_length().unwrap() - l).abs() <= 1e-10 * l);
    }

    #[test]
    fn powers_scale_length(g in hyperbolic(), n in 2u32..=4) {
        let l = g.translation_length().unwrap();
        let ln = g.pow(n).translation_length().unwrap();
        prop_assert!((ln - n as f64 * l).abs() <= 1e-10 * n as f64 * l);
    }

    #[test]
    fn fixed_points_transport(g in hyperbolic(), h in any_element()) {
        let (p, q) = g.fixed_points().unwrap();
        let (p2, q2) = g.conjugate_by(&h).fixed_points().unwrap();
        for (a, b) in [(h.apply_boundary(p), p2), (h.apply_boundary(q), q2)] {
            if let (Some(x), Some(y)) = (a.finite(), b.finite()) {
                if x.abs() < 1e4 && y.abs() < 1e4 {
                    prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
                }
            }
        }
    }
}
