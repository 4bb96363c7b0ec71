mod common;

use common::{endowment_pair, first_order, integrate, rel, second_order, sup_abs, Closed, TERM};
use lifesurplus::{
    bonus_accum, bonus_modeled_surplus, bonus_passivum, bonus_policy_value, bonus_systematic, declared_accumulation,
    equivalence_premium, modeled_surplus, passivum, solve_backward, ActuarialBasis, BonusPair, CashflowSpec,
    RateCurve, TechnicalBasis, DEFAULT_STEP,
};
use proptest::prelude::*;

const H: f64 = DEFAULT_STEP;

fn pair(l: f64, m: f64) -> BonusPair {
    BonusPair::new(RateCurve::constant(l), RateCurve::constant(m))
}

/// `exp(beta t)` as a curve.
fn growth(beta: f64) -> RateCurve {
    RateCurve::makeham(0.0, 1.0, beta.exp(), 0.0)
}

/// The same contract with benefits inflated by `exp(beta t)`.
fn inflated(ab: &ActuarialBasis, beta: f64) -> ActuarialBasis {
    let cf = &ab.cashflows;
    let s = cf.death_benefit.eval(0.0).unwrap();
    let spec = CashflowSpec::new(
        cf.term,
        cf.premium.clone(),
        growth(beta).scaled(s),
        cf.maturity_benefit * (beta * cf.term).exp(),
    );
    ActuarialBasis::new(ab.label.clone(), ab.technical.clone(), spec)
}

#[test]
fn accumulation_closed_forms() {
    assert_eq!(bonus_accum(&RateCurve::constant(0.0), 13.0, H).unwrap(), 1.0);
    assert_eq!(bonus_accum(&RateCurve::constant(0.02), 0.0, H).unwrap(), 1.0);
    assert!(rel(bonus_accum(&RateCurve::constant(0.02), 10.0, H).unwrap(), 0.2f64.exp()) < 1e-14);
}

/// `b / (1 + b t)` tabulated as its exact average over each 0.005-year step.
#[test]
fn simple_bonus_accumulates_linearly() {
    let b = 0.03;
    let nodes: Vec<f64> = (0..=4000).map(|i| i as f64 * H).collect();
    let values: Vec<f64> = nodes.windows(2).map(|w| ((1.0 + b * w[1]) / (1.0 + b * w[0])).ln() / H).collect();
    let beta = RateCurve::table(nodes, values).unwrap();
    let got = bonus_accum(&beta, 10.0, H).unwrap();
    // Left-continuity moves a sixth of each jump into the next Simpson panel.
    assert!(rel(got, 1.3) < 1e-5, "{got}");
}

#[test]
fn accumulation_is_multiplicative_for_constant_force() {
    let beta = RateCurve::constant(0.035);
    for (t, s) in [(3.0, 4.5), (10.0, 0.25), (0.0, 7.0)] {
        let whole = bonus_accum(&beta, t + s, H).unwrap();
        let parts = bonus_accum(&beta, t, H).unwrap() * (0.035 * s).exp();
        assert!(rel(whole, parts) < 1e-14);
    }
}

#[test]
fn no_bonus_reduces_to_plain_values() {
    let (l, m) = endowment_pair(H);
    let none = BonusPair::none();
    let v = solve_backward(&l, 1.0, H).unwrap();
    for t in [0.0, 7.5, 20.0] {
        let b = bonus_policy_value(&l, &m, &none, t, H).unwrap();
        assert_eq!(b.origin, t);
        let tail = &v.values[v.index_of(t).unwrap()..];
        assert!(sup_abs(&b.values, tail) <= 1e-12);
        assert!((bonus_passivum(&l, &m, &none, t, H).unwrap() - passivum(&l, t, H).unwrap()).abs() <= 1e-12);
    }
    let plain = modeled_surplus(&l, &m, H).unwrap();
    let with = bonus_modeled_surplus(&l, &m, &none, H).unwrap();
    assert!(sup_abs(&plain.theta_discounted, &with.surplus.theta_discounted) <= 1e-12);
    assert!(sup_abs(&plain.c_total, &with.surplus.c_total) <= 1e-12);
    assert!(with.cost.iter().all(|&c| c == 0.0));
}

#[test]
fn anticipated_benefit_grows_at_valuation_force() {
    let (l, m) = endowment_pair(H);
    let p = l.cashflows.premium.eval(0.0).unwrap();
    let t = 5.0;
    let curve = bonus_policy_value(&l, &m, &pair(0.02, 0.03), t, H).unwrap();
    let closed = Closed::first_order();
    let benefit = |r: f64| (0.03 * t).exp() * (0.02 * (r - t)).exp();
    for r in [5.0, 10.0, 20.0] {
        let pr = closed.phi(r);
        let oracle = integrate(|u| closed.phi(u) / pr * (closed.mu(u) * benefit(u) - p), r, TERM)
            + closed.phi(TERM) / pr * benefit(TERM);
        assert!(rel(curve.at(r).unwrap(), oracle) < 1e-6, "r = {r}");
    }
}

#[test]
fn bonus_at_valuation_force_is_interest_at_reduced_rate() {
    let beta = 0.02;
    let tb = TechnicalBasis::new("L", RateCurve::constant(0.05), RateCurve::g82m(40.0));
    let single = ActuarialBasis::new("L", tb.clone(), CashflowSpec::endowment(TERM, 1.0, 0.0));
    let reduced = ActuarialBasis::new(
        "r",
        TechnicalBasis::new("r", RateCurve::constant(0.05 - beta), RateCurve::g82m(40.0)),
        single.cashflows.clone(),
    );
    let plain = solve_backward(&reduced, 1.0, H).unwrap();
    let bonus = pair(beta, 0.03);
    let report = bonus_modeled_surplus(&single, &single, &bonus, H).unwrap();
    for (i, t) in plain.times().enumerate() {
        let declared = (0.03 * t).exp();
        assert!(rel(report.v_diag[i], declared * plain.values[i]) < 1e-6, "t = {t}");
        let k = bonus_passivum(&single, &single, &bonus, t, H).unwrap();
        assert!(rel(k, declared * plain.values[i]) < 1e-6);
    }
}

#[test]
fn passivum_boundary_and_quadrature() {
    let (l, m) = endowment_pair(H);
    let bonus = pair(0.02, 0.03);
    let at_n = bonus_passivum(&l, &m, &bonus, TERM, H).unwrap();
    assert!(rel(at_n, (0.03 * TERM).exp()) < 1e-12);

    let closed = Closed::first_order();
    let t = 10.0;
    let f = (0.03f64 * t).exp() / (0.02f64 * t).exp();
    let pt = closed.phi(t);
    let oracle = f
        * (integrate(|u| closed.phi(u) / pt * closed.mu(u) * (0.02 * u).exp(), t, TERM)
            + closed.phi(TERM) / pt * (0.02 * TERM).exp());
    assert!(rel(bonus_passivum(&l, &m, &bonus, t, H).unwrap(), oracle) < 1e-9);
}

#[test]
fn matching_bonus_and_bases_give_no_systematic_surplus() {
    let (l, _) = endowment_pair(H);
    let r = bonus_systematic(&l, &l, &pair(0.02, 0.02), 10.0, H).unwrap();
    assert!(r.total.abs() < 1e-12 && r.cost == 0.0);
}

#[test]
fn declaring_more_than_anticipated_costs_surplus() {
    let (l, _) = endowment_pair(H);
    let bonus = pair(0.01, 0.03);
    for t in [1.0, 10.0, 19.0] {
        let r = bonus_systematic(&l, &l, &bonus, t, H).unwrap();
        let k = bonus_passivum(&l, &l, &bonus, t, H).unwrap();
        assert!((r.total + 0.02 * k).abs() < 1e-12, "t = {t}");
        assert!(r.total < 0.0);
    }
    let report = bonus_modeled_surplus(&l, &l, &bonus, H).unwrap();
    let n = report.surplus.c_total.len() - 1;
    assert!(report.surplus.c_total[1..n].iter().all(|&c| c < 0.0));
}

#[test]
fn equal_bonus_on_different_bases_is_plain_surplus_with_inflated_benefit() {
    let (l, m) = endowment_pair(H);
    let bonus = pair(0.02, 0.02);
    let t = 10.0;
    let r = bonus_systematic(&l, &m, &bonus, t, H).unwrap();
    let v = bonus_policy_value(&l, &m, &bonus, t, H).unwrap().first();
    let (cl, cm) = (Closed::first_order(), Closed::second_order());
    let expected = (cm.delta - cl.delta) * v - (cm.mu(t) - cl.mu(t)) * ((0.02 * t).exp() - v);
    assert!((r.technical - expected).abs() < 1e-12);
    assert_eq!(r.cost, 0.0);

    let report = bonus_modeled_surplus(&l, &m, &bonus, H).unwrap();
    let plain = modeled_surplus(&inflated(&l, 0.02), &inflated(&m, 0.02), H).unwrap();
    let scale = plain.theta_discounted.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    assert!(sup_abs(&report.surplus.theta_discounted, &plain.theta_discounted) <= 1e-6 * scale);
}

#[test]
fn fully_consistent_bonus_system_has_no_surplus() {
    let beta = 0.02;
    let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
    let tb = first_order();
    let reserve_premium = equivalence_premium(&tb, &inflated(&ActuarialBasis::new("L", tb.clone(), cf.clone()), beta).cashflows, H).unwrap();
    let l = ActuarialBasis::new("L", tb, cf.with_level_premium(reserve_premium));
    let report = bonus_modeled_surplus(&l, &l, &pair(beta, beta), H).unwrap();
    assert!(report.surplus.theta_discounted.iter().all(|x| x.abs() < 1e-9));
}

#[test]
fn unanticipated_bonus_reduces_surplus() {
    let (l, m) = endowment_pair(H);
    let base = bonus_modeled_surplus(&l, &m, &pair(0.0, 0.0), H).unwrap();
    let declared = bonus_modeled_surplus(&l, &m, &pair(0.0, 0.02), H).unwrap();
    let n = base.surplus.theta_discounted.len() - 1;
    for i in 1..=n {
        assert!(declared.surplus.theta_discounted[i] < base.surplus.theta_discounted[i]);
    }
    assert!(declared.cost[1..n].iter().all(|&c| c > 0.0));
}

#[test]
fn surplus_matches_declared_accumulation_route() {
    let (l, m) = endowment_pair(H);
    let bonus = pair(0.02, 0.03);
    let report = bonus_modeled_surplus(&l, &m, &bonus, H).unwrap();
    let w = declared_accumulation(&l, &m, &bonus, H).unwrap();
    let cm = Closed::second_order();
    let n = w.len() - 1;
    let mut oracle: Vec<f64> = w.times().enumerate().map(|(i, t)| cm.phi(t) * (w.values[i] - report.v_diag[i])).collect();
    oracle[n] = cm.phi(TERM) * (w.values[n] - (0.03 * TERM).exp());
    let scale = oracle.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    assert!(sup_abs(&report.surplus.theta_discounted, &oracle) <= 1e-6 * scale);
}

/// Central differences of the surplus recover its rate with second-order
/// error.
#[test]
fn surplus_rate_is_the_derivative() {
    let bonus = pair(0.02, 0.03);
    let cm = Closed::second_order();
    let err = |h: f64| {
        let (l, m) = endowment_pair(h);
        let r = bonus_modeled_surplus(&l, &m, &bonus, h).unwrap().surplus;
        [5.0, 10.0, 15.0]
            .iter()
            .map(|&t| {
                let i = (t / h).round() as usize;
                let slope = (r.theta_discounted[i + 1] - r.theta_discounted[i - 1]) / (2.0 * h);
                (slope - cm.phi(t) * r.c_total[i]).abs()
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(0.1), err(0.05));
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}: {coarse} {fine}");
}

#[test]
fn negative_bonus_is_rejected() {
    let (l, m) = endowment_pair(H);
    assert!(bonus_modeled_surplus(&l, &m, &pair(-0.01, 0.0), H).is_err());
    assert!(bonus_passivum(&l, &m, &pair(0.0, -0.01), 5.0, H).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zero_bonus_reduction_on_random_bases(df in 0.5..2.0f64, mf in 0.3..1.5f64, load in 0.8..1.3f64) {
        let h = 0.05;
        let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
        let p = load * equivalence_premium(&first_order(), &cf, h).unwrap();
        let l = ActuarialBasis::new("L", first_order(), cf.with_level_premium(p));
        let m = ActuarialBasis::new("M", second_order().rescaled("M", df, mf), cf.with_level_premium(p));
        let plain = modeled_surplus(&l, &m, h).unwrap();
        let with = bonus_modeled_surplus(&l, &m, &BonusPair::none(), h).unwrap();
        prop_assert!(sup_abs(&plain.theta_discounted, &with.surplus.theta_discounted) <= 1e-12);
    }

    #[test]
    fn accumulation_never_decreases(beta in 0.0..0.1f64, t in 0.0..19.0f64, dt in 0.0..1.0f64) {
        let b = RateCurve::constant(beta);
        prop_assert!(bonus_accum(&b, t + dt, 0.01).unwrap() >= bonus_accum(&b, t, 0.01).unwrap());
    }
}
