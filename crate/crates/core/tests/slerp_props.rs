//! Great-circle interpolation: norm, angle linearity and symmetry.

use lfa_core::traversal::slerp;
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Two unit vectors that are neither parallel nor antipodal.
fn endpoints() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..10)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(-1.0f64..1.0, d),
                prop::collection::vec(-1.0f64..1.0, d),
            )
        })
        .prop_filter("degenerate", |(a, b)| dot(a, a) > 1e-3 && dot(b, b) > 1e-3)
        .prop_map(|(a, b)| (unit(a), unit(b)))
        .prop_filter("near-antipodal", |(a, b)| dot(a, b) > -0.999)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn stays_on_the_sphere((a, b) in endpoints(), t in -1.0f64..2.0) {
        let p = slerp(&a, &b, t).unwrap();
        prop_assert!((dot(&p, &p).sqrt() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn angle_grows_linearly((a, b) in endpoints(), k in 0u32..=20) {
        let t = k as f64 / 20.0;
        let theta = dot(&a, &b).clamp(-1.0, 1.0).acos();
        let p = slerp(&a, &b, t).unwrap();
        prop_assert!((dot(&a, &p) - (t * theta).cos()).abs() <= 1e-6);
    }

    #[test]
    fn reversing_endpoints_mirrors_t((a, b) in endpoints(), t in 0.0f64..=1.0) {
        let p = slerp(&a, &b, t).unwrap();
        let q = slerp(&b, &a, 1.0 - t).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn endpoints_are_exact((a, b) in endpoints()) {
        prop_assert_eq!(slerp(&a, &b, 0.0).unwrap(), a.clone());
        prop_assert_eq!(slerp(&a, &b, 1.0).unwrap(), b);
    }
}
