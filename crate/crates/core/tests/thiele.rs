mod common;

use common::{first_order, rel, sup_abs, sup_rel, Closed, TERM};
use lifesurplus::{
    activum, activum_curve, equivalence_premium, passivum, passivum_curve, solve_backward, solve_forward,
    ActuarialBasis, CashflowSpec, Curve, RateCurve, TechnicalBasis, DEFAULT_STEP,
};
use proptest::prelude::*;

const H: f64 = DEFAULT_STEP;

fn term_contract(h: f64) -> ActuarialBasis {
    common::term_pair(h).0
}

/// Node values at `t = 0, 0.5, ..., 20`.
fn at_41(c: &Curve) -> Vec<f64> {
    (0..=40).map(|k| c.at(0.5 * k as f64).unwrap()).collect()
}

#[test]
fn term_premium_matches_ratio_of_integrals() {
    let cf = CashflowSpec::term_assurance(TERM, 1.0, 0.0);
    let p = equivalence_premium(&first_order(), &cf, H).unwrap();
    let oracle = Closed::first_order().premium(TERM, 1.0, 0.0);
    assert!(rel(p, oracle) < 1e-9, "{p} vs {oracle}");
}

#[test]
fn endowment_premium_matches_ratio_of_integrals() {
    let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
    let p = equivalence_premium(&first_order(), &cf, H).unwrap();
    assert!(rel(p, Closed::first_order().premium(TERM, 1.0, 1.0)) < 1e-9);
}

#[test]
fn backward_matches_quadrature_at_41_nodes() {
    let ab = term_contract(H);
    let p = ab.cashflows.premium.eval(0.0).unwrap();
    let v = solve_backward(&ab, 0.0, H).unwrap();
    let oracle: Vec<f64> = (0..=40)
        .map(|k| Closed::first_order().policy_value(0.5 * k as f64, TERM, 1.0, 0.0, p))
        .collect();
    assert!(sup_rel(&at_41(&v), &oracle) < 1e-6);
}

#[test]
fn forward_matches_quadrature_at_41_nodes() {
    let ab = term_contract(H);
    let p = ab.cashflows.premium.eval(0.0).unwrap();
    let w = solve_forward(&ab, 0.0, H).unwrap();
    let oracle: Vec<f64> = (0..=40)
        .map(|k| Closed::first_order().accumulation(0.5 * k as f64, 1.0, p))
        .collect();
    assert!(sup_rel(&at_41(&w), &oracle) < 1e-6);
}

#[test]
fn prospective_equals_retrospective_on_special_basis() {
    for ab in [term_contract(H), common::endowment_pair(H).0] {
        let terminal = ab.cashflows.maturity_benefit;
        let v = solve_backward(&ab, terminal, H).unwrap();
        let w = solve_forward(&ab, 0.0, H).unwrap();
        assert!(sup_abs(&v.values, &w.values) <= 1e-6 * v.max_abs().max(1.0));
    }
}

#[test]
fn forward_reaches_maturity_benefit() {
    let ab = common::endowment_pair(H).0;
    let w = solve_forward(&ab, 0.0, H).unwrap();
    assert!(rel(w.last(), 1.0) < 1e-6);
}

#[test]
fn boundaries_are_exact() {
    let ab = common::endowment_pair(H).0;
    assert_eq!(solve_backward(&ab, 1.0, H).unwrap().last(), 1.0);
    assert_eq!(solve_forward(&ab, 0.0, H).unwrap().first(), 0.0);
}

/// Coarse meshes keep the RK4 error well above rounding, so the ratio shows
/// the order. The premium is fixed so only the integrator varies.
#[test]
fn halving_the_step_cuts_the_error_about_sixteen_fold() {
    let p = Closed::first_order().premium(TERM, 1.0, 0.0);
    let cf = CashflowSpec::term_assurance(TERM, 1.0, p);
    let ab = ActuarialBasis::new("L", first_order(), cf);
    let oracle: Vec<f64> = (0..=40)
        .map(|k| Closed::first_order().policy_value(0.5 * k as f64, TERM, 1.0, 0.0, p))
        .collect();
    let err = |h: f64| sup_abs(&at_41(&solve_backward(&ab, 0.0, h).unwrap()), &oracle);
    let ratio = err(0.5) / err(0.25);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn reserve_is_passivum_minus_activum() {
    let ab = common::endowment_pair(H).0;
    let v = solve_backward(&ab, 1.0, H).unwrap();
    let k = passivum_curve(&ab, H).unwrap();
    let a = activum_curve(&ab, H).unwrap();
    let diff: Vec<f64> = k.values.iter().zip(&a.values).map(|(k, a)| k - a).collect();
    assert!(sup_abs(&v.values, &diff) <= 1e-6 * k.max_abs());
}

#[test]
fn passivum_matches_quadrature() {
    let ab = common::endowment_pair(H).0;
    let got = passivum(&ab, 10.0, H).unwrap();
    assert!(rel(got, Closed::first_order().passivum(10.0, TERM, 1.0, 1.0)) < 1e-9);
    assert_eq!(passivum(&ab, TERM, H).unwrap(), 1.0);
    assert_eq!(activum(&ab, TERM, H).unwrap(), 0.0);
}

#[test]
fn equation_of_value_at_outset() {
    let ab = common::endowment_pair(H).0;
    assert!(rel(passivum(&ab, 0.0, H).unwrap(), activum(&ab, 0.0, H).unwrap()) < 1e-9);
}

#[test]
fn certain_maturity_without_interest() {
    let tb = TechnicalBasis::new("z", RateCurve::constant(0.0), RateCurve::constant(0.0));
    let ab = ActuarialBasis::new("z", tb, CashflowSpec::new(10.0, RateCurve::constant(0.3), RateCurve::constant(0.0), 1.0));
    for t in [0.0, 2.5, 7.0, 10.0] {
        assert!((passivum(&ab, t, H).unwrap() - 1.0).abs() < 1e-12);
        assert!((activum(&ab, t, H).unwrap() - 0.3 * (10.0 - t)).abs() < 1e-12);
    }
}

#[test]
fn closed_form_cases() {
    let disc = TechnicalBasis::new("d", RateCurve::constant(0.05), RateCurve::constant(0.0));
    let endow = ActuarialBasis::new("d", disc.clone(), CashflowSpec::new(20.0, RateCurve::constant(0.0), RateCurve::constant(1.0), 1.0));
    let v = solve_backward(&endow, 1.0, H).unwrap();
    assert!(rel(v.first(), (-1f64).exp()) < 1e-12);

    let annuity = ActuarialBasis::new("d", disc, CashflowSpec::new(20.0, RateCurve::constant(0.1), RateCurve::constant(0.0), 0.0));
    let w = solve_forward(&annuity, 0.0, H).unwrap();
    let exact: Vec<f64> = w.times().map(|t| 0.1 * ((0.05 * t).exp() - 1.0) / 0.05).collect();
    assert!(sup_rel(&w.values, &exact) < 1e-12);

    let risk = TechnicalBasis::new("r", RateCurve::constant(0.04), RateCurve::constant(0.01));
    let cover = ActuarialBasis::new("r", risk.clone(), CashflowSpec::term_assurance(20.0, 1.0, 0.01));
    assert!(solve_backward(&cover, 0.0, H).unwrap().max_abs() < 1e-14);
    let premium = equivalence_premium(&risk, &CashflowSpec::term_assurance(20.0, 1.0, 0.0), H).unwrap();
    assert!((premium - 0.01).abs() < 1e-12);
    assert_eq!(equivalence_premium(&risk, &CashflowSpec::term_assurance(20.0, 0.0, 0.0), H).unwrap(), 0.0);
}

#[test]
fn step_must_divide_the_term() {
    let ab = term_contract(H);
    assert!(solve_backward(&ab, 0.0, 0.3).is_err());
    assert!(solve_forward(&ab, 0.0, -0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any contract priced by equivalence on its own basis: forward and
    /// backward solutions coincide, and the reserve is passivum minus activum.
    #[test]
    fn special_bases_close_both_ways(
        delta in 0.0..0.08f64,
        mu_scale in 0.3..2.0f64,
        sum in 0.1..5.0f64,
        maturity in 0.0..5.0f64,
        age in 20.0..60.0f64,
    ) {
        let h = 0.02;
        let tb = TechnicalBasis::new("p", RateCurve::constant(delta), RateCurve::g82m(age).scaled(mu_scale));
        let cf = CashflowSpec::new(TERM, RateCurve::constant(0.0), RateCurve::constant(sum), maturity);
        let p = equivalence_premium(&tb, &cf, h).unwrap();
        let ab = ActuarialBasis::new("p", tb, cf.with_level_premium(p));
        let v = solve_backward(&ab, maturity, h).unwrap();
        let w = solve_forward(&ab, 0.0, h).unwrap();
        let scale = v.max_abs().max(1.0);
        prop_assert!(v.first().abs() <= 1e-10 * scale);
        prop_assert!(sup_abs(&v.values, &w.values) <= 1e-6 * scale);
        let k = passivum_curve(&ab, h).unwrap();
        let a = activum_curve(&ab, h).unwrap();
        let diff: Vec<f64> = k.values.iter().zip(&a.values).map(|(k, a)| k - a).collect();
        prop_assert!(sup_abs(&v.values, &diff) <= 1e-6 * scale);
    }

    /// The policy value is affine in the terminal value and the premium.
    #[test]
    fn backward_is_affine(p1 in 0.0..0.1f64, p2 in 0.0..0.1f64, lambda in -1.0..2.0f64) {
        let h = 0.05;
        let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
        let value = |p: f64| solve_backward(&ActuarialBasis::new("a", first_order(), cf.with_level_premium(p)), 1.0, h).unwrap();
        let mix = value(lambda * p1 + (1.0 - lambda) * p2);
        let (a, b) = (value(p1), value(p2));
        for i in 0..mix.len() {
            let lin = lambda * a.values[i] + (1.0 - lambda) * b.values[i];
            prop_assert!((mix.values[i] - lin).abs() < 1e-12);
        }
    }
}
