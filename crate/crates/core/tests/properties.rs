use proptest::prelude::*;

use rumorflow::finalsize::{final_ignorants, level_curve, DEFAULT_TOL};
use rumorflow::invariants::hamiltonian_piqueira;
use rumorflow::models::*;
use rumorflow::stability::{classify_equilibrium, jacobian_fd_check, threshold_sigma, StabilityClass, DEFAULT_TIE_TOL};

fn params() -> impl Strategy<Value = Params> {
    (0.05f64..1.0, 0.05f64..1.0, 0.1f64..3.0).prop_map(|(a, b, mu)| Params::new(a, b, mu).unwrap())
}

/// Points of the open simplex.
fn simplex() -> impl Strategy<Value = State3> {
    (0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0).prop_map(|(a, b, c)| State3::renormalized(a, b, c).unwrap().0)
}

/// Points of the open triangle, `(R, I)`.
fn interior() -> impl Strategy<Value = State2> {
    (0.001f64..0.998, 0.001f64..0.998)
        .prop_filter("inside", |(r, i)| r + i < 0.999)
        .prop_map(|(r, i)| State2::new(r, i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn full_fields_conserve_population(p in params(), x in simplex()) {
        let [a, b, c] = piqueira_field(&p, &x);
        prop_assert!((a + b + c).abs() <= 1e-15);
        let [a, b, c] = belen_pearce_field(&x);
        prop_assert!((a + b + c).abs() <= 1e-16);
    }

    #[test]
    fn jacobian3_columns_sum_to_zero(p in params(), x in simplex()) {
        for sum in jacobian3(&p, &x).column_sums() {
            prop_assert!(sum.abs() <= 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn planar_field_is_the_reduced_full_field(p in params(), y in interior()) {
        let full = piqueira_field(&p, &lift(&y));
        let planar = planar_field(&p, &y);
        prop_assert!((full[2] - planar[0]).abs() <= 1e-15);
        prop_assert!((full[0] - planar[1]).abs() <= 1e-15);
    }

    #[test]
    fn reduce_undoes_lift(y in interior()) {
        prop_assert_eq!(reduce(&lift(&y)), y);
    }

    #[test]
    fn contact_rate_scales_the_field_exactly(p in params(), x in simplex()) {
        let unit = piqueira_field(&p.with_mu(1.0).unwrap(), &x);
        let scaled = piqueira_field(&p, &x);
        for (s, u) in scaled.iter().zip(unit) {
            prop_assert_eq!(*s, p.mu * u);
        }
    }

    #[test]
    fn equilibria_do_not_move(p in params(), i in 0.0f64..=1.0) {
        let x = State3::new(i, 0.0, 1.0 - i).unwrap();
        prop_assert!(piqueira_field(&p, &x).iter().all(|v| *v == 0.0));
        prop_assert!(planar_field(&p, &State2::new(1.0 - i, i).unwrap()).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tau_sign_tracks_threshold(p in params(), i in 0.0f64..=1.0) {
        let sigma = threshold_sigma(&p);
        let rep = classify_equilibrium(&p, i, DEFAULT_TIE_TOL).unwrap();
        let tau = p.mu * ((p.rho1 + p.rho2) * i - p.rho1);
        prop_assert!((rep.tau() - tau).abs() <= 1e-12);
        prop_assert_eq!(rep.eigen_full[2], rep.eigen_planar[1]);
        match rep.class {
            StabilityClass::Stable => prop_assert!(i < sigma),
            StabilityClass::Unstable => prop_assert!(i > sigma),
            StabilityClass::Marginal => prop_assert!((i - sigma).abs() < 1e-9),
        }
    }

    #[test]
    fn final_size_lies_on_the_level_line_below_threshold(p in params(), y in interior()) {
        let fs = final_ignorants(&p, &y, DEFAULT_TOL).unwrap();
        prop_assert!(fs.i_inf > 0.0 && fs.i_inf < threshold_sigma(&p));
        let h_end = hamiltonian_piqueira(&p, &State2::new(fs.r_inf, fs.i_inf).unwrap()).unwrap();
        prop_assert!((h_end - fs.k).abs() <= DEFAULT_TOL * 4.0, "residual {}", (h_end - fs.k).abs());
        prop_assert!(fs.residual <= DEFAULT_TOL);
    }

    #[test]
    fn level_curve_inverts_the_first_integral(p in params(), y in interior()) {
        let k = hamiltonian_piqueira(&p, &y).unwrap();
        let pt = level_curve(&p, k, &[y.i]).unwrap()[0];
        prop_assert!((pt.r - y.r).abs() <= 1e-12);
    }
}

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*seed >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn analytic_jacobians_match_finite_differences() {
    let mut seed = 17;
    for _ in 0..100 {
        let p = Params::new(0.05 + 0.9 * lcg(&mut seed), 0.05 + 0.9 * lcg(&mut seed), 0.2 + 2.0 * lcg(&mut seed)).unwrap();
        let (a, b, c) = (lcg(&mut seed) + 1e-3, lcg(&mut seed) + 1e-3, lcg(&mut seed) + 1e-3);
        let x = State3::renormalized(a, b, c).unwrap().0;
        for (model, point) in [
            (ModelId::Piqueira3, vec![x.i, x.s, x.r]),
            (ModelId::PiqueiraPlanar, vec![x.r, x.i]),
            (ModelId::BelenPearce3, vec![x.i, x.s, x.r]),
            (ModelId::BelenPearcePlanar, vec![x.i, x.s]),
        ] {
            let err = jacobian_fd_check(model, &p, &point).unwrap();
            assert!(err <= 1e-6, "{model:?} at {point:?}: {err}");
        }
    }
}
