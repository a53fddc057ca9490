use num_rational::BigRational;
use proptest::prelude::*;

use ospq_core::degeneration::{eta_prime, eta_prime_scaled};
use ospq_core::hopf::{coproduct, counit, tau_to, Factor, Gen, ShiftForm, SignConvention, TensorExpr};
use ospq_core::numeric::{BigComplex, Precision};
use ospq_core::qpoch::{qpoch_series, QPochFactor};
use ospq_core::relations::{relation_catalog, Mode, NumParams, RelationId};
use ospq_core::series::{rat, RatSeries};
use ospq_core::theta::theta;

const GENS: [Gen; 4] = [Gen::Hplus, Gen::Hminus, Gen::E, Gen::F];

fn small_rat() -> impl Strategy<Value = BigRational> {
    (-9i64..=9, 1i64..=7).prop_map(|(n, d)| rat(n, d))
}

fn series(order: usize, c0: Option<BigRational>) -> impl Strategy<Value = RatSeries> {
    proptest::collection::vec(small_rat(), order + 1).prop_map(move |mut v| {
        if let Some(c) = &c0 {
            v[0] = c.clone();
        }
        RatSeries::from_coeffs("x", v).unwrap()
    })
}

fn gen() -> impl Strategy<Value = Gen> {
    prop::sample::select(GENS.to_vec())
}

fn shift() -> impl Strategy<Value = ShiftForm> {
    (small_rat(), -3i64..=3, small_rat()).prop_map(|(c, k, a)| ShiftForm::constant(c).add(&ShiftForm::c(k, a)))
}

fn word(n: i64) -> impl Strategy<Value = TensorExpr> {
    proptest::collection::vec((gen(), shift(), any::<bool>()), 0..5).prop_map(move |fs| {
        let w = fs
            .into_iter()
            .map(|(g, s, inv)| {
                let f = Factor::new(g, n, s);
                if inv && g.parity() == 0 {
                    f.inv()
                } else {
                    f
                }
            })
            .collect();
        TensorExpr::word(n, w)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn exp_log_roundtrip(f in series(6, Some(rat(1, 1)))) {
        prop_assert_eq!(f.log().unwrap().exp().unwrap(), f);
    }

    #[test]
    fn series_mul_commutes_and_inverts(a in series(6, None), b in series(6, Some(rat(3, 2)))) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        let one = RatSeries::constant("x", rat(1, 1), 6);
        prop_assert_eq!(b.mul(&b.invert().unwrap()).unwrap(), one);
    }

    #[test]
    fn product_of_matches_repeated_mul(fs in proptest::collection::vec(series(5, None), 1..5)) {
        let mut acc = RatSeries::constant("x", rat(1, 1), 5);
        for f in &fs {
            acc = acc.mul(f).unwrap();
        }
        prop_assert_eq!(RatSeries::product_of("x", &fs, 5).unwrap(), acc);
    }

    #[test]
    fn qpoch_pair_is_reciprocal(c in 1i64..=9, b in 1i64..=9) {
        let coef = rat(c, 10);
        let base = rat(b, 11);
        let num = qpoch_series(&QPochFactor::numerator(coef.clone(), base.clone()).unwrap(), 8).unwrap();
        let den = qpoch_series(&QPochFactor::denominator(coef, base).unwrap(), 8).unwrap();
        prop_assert_eq!(num.mul(&den).unwrap(), RatSeries::constant("x", rat(1, 1), 8));
    }

    #[test]
    fn koszul_sign_rule(a in gen(), b in gen(), c in gen(), d in gen()) {
        let lhs = TensorExpr::generator(a, 0).tensor(&TensorExpr::generator(b, 1))
            .mul(&TensorExpr::generator(c, 0).tensor(&TensorExpr::generator(d, 1))).unwrap();
        let ac = TensorExpr::generator(a, 0).mul(&TensorExpr::generator(c, 0)).unwrap();
        let bd = TensorExpr::generator(b, 1).mul(&TensorExpr::generator(d, 1)).unwrap();
        let sign = if b.parity() * c.parity() == 1 { rat(-1, 1) } else { rat(1, 1) };
        prop_assert_eq!(lhs, ac.tensor(&bd).scale(&sign).canonical());
    }

    #[test]
    fn canonical_is_idempotent(e in word(0), f in word(0)) {
        let x = e.add(&f.scale(&rat(-2, 3))).unwrap();
        prop_assert_eq!(x.canonical(), x.canonical().canonical());
    }

    #[test]
    fn tau_laws(e in word(0), n in -3i64..=3, m in -3i64..=3, p in -3i64..=3) {
        let e = tau_to(&e, n).unwrap();
        let direct = tau_to(&e, m).unwrap();
        prop_assert_eq!(tau_to(&tau_to(&e, p).unwrap(), m).unwrap(), direct.clone());
        prop_assert_eq!(tau_to(&direct, n).unwrap(), e);
    }

    #[test]
    fn central_substitution_is_linear(a in shift(), b in shift(), k in -3i64..=3, by in shift()) {
        prop_assert_eq!(a.add(&b).substitute(k, &by), a.substitute(k, &by).add(&b.substitute(k, &by)));
        let two = rat(2, 1);
        prop_assert_eq!(a.scale(&two).substitute(k, &by), a.substitute(k, &by).scale(&two));
    }

    #[test]
    fn counit_after_coproduct_is_identity_on_cartan(n in -3i64..=3) {
        // τ(ε ⊗ id)Δ⁺ on H⁺ needs no sign convention choice
        let conv = SignConvention::new(1, -1).unwrap();
        let x = TensorExpr::generator(Gen::Hplus, n);
        let back = counit(&coproduct(&x, 0, 1, conv).unwrap(), 0, conv).unwrap();
        prop_assert_eq!(tau_to(&back, n).unwrap(), x);
    }

    #[test]
    fn eta_prime_inverts(eta in 0.05f64..2.0, hbar in 0.0f64..1.0, c in 0i64..=3) {
        let ep = eta_prime(eta, hbar, c).unwrap();
        prop_assert!((1.0 / ep - 1.0 / eta - hbar * c as f64).abs() < 1e-9);
        prop_assert_eq!(eta_prime_scaled(eta, hbar, c, 1.0).unwrap(), ep);
    }

    #[test]
    fn theta_quasi_periodic(qr in 0.1f64..0.85, qa in 0.0f64..6.0, zr in 0.4f64..1.6, za in 0.0f64..6.0) {
        let prec = Precision::digits(30);
        let q = BigComplex::from_f64(qr * qa.cos(), qr * qa.sin(), prec);
        let z = BigComplex::from_f64(zr * za.cos(), zr * za.sin(), prec);
        let lhs = theta(&(&q * &z), &q).unwrap();
        let rhs = (&theta(&z, &q).unwrap() / &z).scale_i64(-1);
        prop_assert!(lhs.rel_diff(&rhs, 1e-25) < 1e-20);
    }

    #[test]
    fn exchange_functions_are_reciprocal(xr in 0.2f64..0.9, xa in 0.1f64..6.0) {
        let prec = Precision::digits(30);
        let np = NumParams::from_f64(0.45, 0.36, 1, prec);
        let cat = relation_catalog(1, Mode::Corrected);
        let x = BigComplex::from_f64(xr * xa.cos(), xr * xa.sin(), prec);
        let inv = x.recip().unwrap();
        for id in [RelationId::EE, RelationId::FF, RelationId::HpHp] {
            let f = cat.get(id).structure.as_ref().unwrap();
            if f.near_singular(&x, &np) || f.near_singular(&inv, &np) {
                continue;
            }
            // a symmetric pair satisfies f(x) f(1/x) = 1
            let prod = &f.eval(&x, &np).unwrap() * &f.eval(&inv, &np).unwrap();
            prop_assert!(prod.rel_diff(&BigComplex::one(prec), 0.0) < 1e-20, "{id:?}");
        }
    }
}
