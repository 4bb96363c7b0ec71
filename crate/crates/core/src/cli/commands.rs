use crate::bonus::{bonus_accum, bonus_modeled_surplus, declared_accumulation};
use crate::error::Error;
use crate::grid;
use crate::paidup::{PaidUpOrder, PaidUpTable};
use crate::simulate::monte_carlo;
use crate::surplus::{modeled_surplus, SurplusReport};
use crate::thiele::{
    activum_curve, equivalence_premium, passivum_curve, solve_backward, solve_forward, ActuarialBasis, Curve, Sampled,
};

use super::config::Resolved;
use super::{num, CliError, Outcome};

/// Monte Carlo self-checks allow this many standard errors.
const MC_SIGMAS: f64 = 4.0;

fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    max_abs(a.iter().zip(b).map(|(x, y)| x - y))
}

fn times(c: &Curve) -> Vec<f64> {
    c.times().collect()
}

pub(super) fn premium(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let contractual = r.contract.premium.eval(0.0)?;
    let pi_l = equivalence_premium(&r.valuation.technical, &r.contract, h)?;
    let pi_m = equivalence_premium(&r.experience.technical, &r.experience.cashflows, h)?;
    out.write_csv(
        &r.out,
        "premium.csv",
        &["basis", "premium_rate"],
        [
            vec!["contract".to_string(), num(contractual)],
            vec![r.valuation.label.clone(), num(pi_l)],
            vec![r.experience.label.clone(), num(pi_m)],
        ],
    )?;
    out.summary = match &r.priced_on {
        Some((basis, rate)) => format!("premium rate {} per annum, priced on basis '{basis}'", num(*rate)),
        None => format!("premium rate {} per annum at t = 0 (contractual)", num(contractual)),
    };
    if check {
        for (ab, pi) in [(&r.valuation, pi_l), (&r.experience, pi_m)] {
            let priced = ab.with_level_premium(pi);
            let v0 = solve_backward(&priced, priced.cashflows.maturity_benefit, h)?.first();
            let scale = passivum_curve(&priced, h)?.first().max(1e-12);
            out.check(format!("equivalence on '{}': V_0", ab.label), v0.abs(), 1e-9 * scale);
        }
    }
    Ok(())
}

pub(super) fn policy_value(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let v_l = solve_backward(&r.valuation, r.valuation.cashflows.maturity_benefit, h)?;
    let v_m = solve_backward(&r.experience, r.experience.cashflows.maturity_benefit, h)?;
    let k = passivum_curve(&r.valuation, h)?;
    let a = activum_curve(&r.valuation, h)?;
    let ts = times(&v_l);
    out.write_csv(
        &r.out,
        "policy_values.csv",
        &["t", "V_valuation", "V_experience", "passivum", "activum"],
        (0..ts.len()).map(|i| vec![num(ts[i]), num(v_l.values[i]), num(v_m.values[i]), num(k.values[i]), num(a.values[i])]),
    )?;
    out.summary = format!("V_0 = {} on basis '{}'", num(v_l.first()), r.valuation.label);
    if check {
        let diff: Vec<f64> = k.values.iter().zip(&a.values).map(|(k, a)| k - a).collect();
        let scale = k.max_abs().max(1e-12);
        out.check("policy value = passivum - activum", max_diff(&v_l.values, &diff), 1e-6 * scale);
    }
    Ok(())
}

/// Accumulation by quadrature: `W_t = int_0^t phi (tau - mu S) / phi_t`.
fn retrospective(ab: &ActuarialBasis, h: f64) -> Result<Vec<f64>, Error> {
    let s = Sampled::new(ab, h)?;
    let f: Vec<f64> = (0..s.mesh.half_count())
        .map(|j| s.phi_half(j) * (s.premium[j] - s.mu[j] * s.benefit[j]))
        .collect();
    let integral = grid::cumulative_half(&s.mesh, &f);
    Ok((0..s.mesh.node_count()).map(|i| integral[2 * i] / s.phi_node(i)).collect())
}

pub(super) fn accumulation(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let w_l = solve_forward(&r.valuation, 0.0, h)?;
    let w_m = solve_forward(&r.experience, 0.0, h)?;
    let ts = times(&w_l);
    out.write_csv(
        &r.out,
        "accumulation.csv",
        &["t", "W_valuation", "W_experience"],
        (0..ts.len()).map(|i| vec![num(ts[i]), num(w_l.values[i]), num(w_m.values[i])]),
    )?;
    out.summary = format!(
        "W_n = {} on basis '{}', {} on basis '{}'",
        num(w_l.last()),
        r.valuation.label,
        num(w_m.last()),
        r.experience.label
    );
    if check {
        for (ab, w) in [(&r.valuation, &w_l), (&r.experience, &w_m)] {
            let q = retrospective(ab, h)?;
            let scale = max_abs(q.iter().copied()).max(1e-12);
            out.check(format!("accumulation on '{}' vs quadrature", ab.label), max_diff(&w.values, &q), 1e-6 * scale);
        }
    }
    Ok(())
}

fn surplus_rows(rep: &SurplusReport) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..rep.len()).map(|i| {
        vec![
            num(rep.times[i]),
            num(rep.c_technical[i]),
            num(rep.c_cashflow[i]),
            num(rep.c_total[i]),
            num(rep.theta[i]),
            num(rep.theta_discounted[i]),
        ]
    })
}

/// `phiM(t) (W^M_t - V^L_t)`, with the experience maturity at `n`.
/// `phi^M (W^M - V^L)` at every node, and the size of the discounted terms
/// it is formed from.
pub(super) fn surplus_oracle(val: &ActuarialBasis, exp: &ActuarialBasis, h: f64) -> Result<(Vec<f64>, f64), Error> {
    let sm = Sampled::new(exp, h)?;
    let w = solve_forward(exp, 0.0, h)?;
    let mut v = solve_backward(val, val.cashflows.maturity_benefit, h)?.values;
    let n = v.len() - 1;
    v[n] = exp.cashflows.maturity_benefit;
    let scale = max_abs((0..=n).map(|i| sm.phi_node(i) * (w.values[i].abs() + v[i].abs())));
    Ok(((0..=n).map(|i| sm.phi_node(i) * (w.values[i] - v[i])).collect(), scale))
}

/// Relative to `scale`, so a surplus that is identically zero is still
/// compared at the size of the reserves.
pub(super) fn check_surplus(rep: &SurplusReport, oracle: &(Vec<f64>, f64), name: &str, out: &mut Outcome) {
    let (values, scale) = oracle;
    let scale = max_abs(values.iter().copied()).max(*scale).max(1e-12);
    out.check(name, max_diff(&rep.theta_discounted, values), 1e-6 * scale);
}

pub(super) fn surplus(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let rep = modeled_surplus(&r.valuation, &r.experience, h)?;
    out.write_csv(
        &r.out,
        "surplus.csv",
        &["t", "c_technical", "c_cashflow", "c_total", "theta", "theta_discounted"],
        surplus_rows(&rep),
    )?;
    out.summary = format!(
        "total EPV of surplus {}, initial surplus {}",
        num(rep.total_epv()),
        num(-rep.v0_valuation)
    );
    if check {
        check_surplus(&rep, &surplus_oracle(&r.valuation, &r.experience, h)?, "modeled surplus vs phi (W - V)", out);
        let pi_l = equivalence_premium(&r.valuation.technical, &r.valuation.cashflows, h)?;
        let s = Sampled::new(&r.valuation, h)?;
        let f: Vec<f64> = (0..s.mesh.half_count())
            .map(|j| s.phi_half(j) * (s.premium[j] - pi_l))
            .collect();
        let loadings = grid::tail_nodes(&s.mesh, &f)[0];
        let scale = passivum_curve(&r.valuation, h)?.first().max(1e-12);
        out.check(
            "initial surplus vs capitalized loadings",
            (-rep.v0_valuation - loadings).abs(),
            1e-6 * scale,
        );
    }
    Ok(())
}

pub(super) fn simulate(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let seed = r
        .mc
        .seed
        .ok_or_else(|| CliError::Config("simulate needs a seed: set monte_carlo.seed or pass --seed".into()))?;
    let mc = monte_carlo(
        &r.valuation,
        &r.experience,
        r.mc.paths,
        seed,
        &r.mc.checkpoints,
        &r.mc.intervals,
        h,
    )?;
    let model = modeled_surplus(&r.valuation, &r.experience, h)?;
    let n = mc.times.len() - 1;
    out.write_csv(
        &r.out,
        "mc_surplus.csv",
        &["t", "mean", "std_error", "modeled"],
        (0..=n).map(|i| vec![num(mc.times[i]), num(mc.mean[i]), num(mc.std_error[i]), num(model.theta_discounted[i])]),
    )?;
    out.write_csv(
        &r.out,
        "mc_checkpoints.csv",
        &["t", "alive", "policy_value", "estimate", "std_error"],
        mc.checkpoints.iter().map(|c| {
            let (e, s) = match c.estimate {
                Some(e) => (num(e.mean), num(e.std_error)),
                None => ("skipped".into(), "skipped".into()),
            };
            vec![num(c.t), c.alive.to_string(), num(c.policy_value), e, s]
        }),
    )?;
    out.write_csv(
        &r.out,
        "mc_covariance.csv",
        &["first_start", "first_end", "second_start", "second_end", "covariance", "std_error", "ci_low", "ci_high"],
        mc.covariances.iter().map(|c| {
            let (lo, hi) = c.confidence_interval(1.96);
            vec![
                num(c.first.0),
                num(c.first.1),
                num(c.second.0),
                num(c.second.1),
                num(c.covariance),
                num(c.std_error),
                num(lo),
                num(hi),
            ]
        }),
    )?;
    out.write_csv(
        &r.out,
        "mc_summary.csv",
        &["quantity", "value", "std_error"],
        [
            vec!["n_paths".into(), mc.n_paths.to_string(), String::new()],
            vec!["seed".into(), mc.seed.to_string(), String::new()],
            vec!["survivors".into(), mc.survivors.to_string(), String::new()],
            vec!["mean_at_n".into(), num(mc.mean[n]), num(mc.std_error[n])],
            vec!["modeled_at_n".into(), num(model.theta_discounted[n]), String::new()],
            vec![
                "martingale_residual".into(),
                num(mc.martingale_residual.mean),
                num(mc.martingale_residual.std_error),
            ],
        ],
    )?;
    out.summary = format!(
        "MC mean discounted surplus at n = {} (s.e. {}, {} paths, seed {}); modeled {}",
        num(mc.mean[n]),
        num(mc.std_error[n]),
        mc.n_paths,
        seed,
        num(model.theta_discounted[n])
    );
    if check {
        let mut nodes: Vec<usize> = mc
            .checkpoints
            .iter()
            .map(|c| (c.t / h).round() as usize)
            .collect();
        nodes.push(n);
        for i in nodes {
            out.check(
                format!("MC mean vs modeled surplus at t = {}", mc.times[i]),
                (mc.mean[i] - model.theta_discounted[i]).abs(),
                MC_SIGMAS * mc.std_error[i],
            );
        }
        for c in &mc.checkpoints {
            if let Some(e) = c.estimate {
                out.check(
                    format!("nested estimate of policy value at t = {}", c.t),
                    (e.mean - c.policy_value).abs(),
                    MC_SIGMAS * e.std_error,
                );
            }
        }
        let m = mc.martingale_residual;
        out.check("martingale residual", m.mean.abs(), MC_SIGMAS * m.std_error);
    }
    Ok(())
}

/// Paid-up times from the config, or the quartiles of the term.
fn paidup_times(r: &Resolved) -> Vec<f64> {
    if !r.paidup_times.is_empty() {
        return r.paidup_times.clone();
    }
    let n = r.contract.term;
    [0.25, 0.5, 0.75].iter().map(|q| (q * n / r.h).round() * r.h).collect()
}

pub(super) fn write_fan(
    dir: &std::path::Path,
    table: &PaidUpTable,
    at: &[f64],
    name: &str,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &t in at {
        let s = table.state(table.index_of(t)?)?;
        for (j, time) in s.first_order_values.times().enumerate() {
            rows.push(vec![
                num(s.t),
                num(time),
                num(s.first_order_values.values[j]),
                num(s.second_order_values.values[j]),
            ]);
        }
    }
    out.write_csv(dir, name, &["t_paidup", "r", "V_first", "V_second"], rows)
}

pub(super) fn check_paidup(table: &PaidUpTable, premium_scale: f64, out: &mut Outcome) -> Result<(), CliError> {
    let last = table.times.len() - 1;
    let mut rel = 0.0f64;
    for i in (0..=last).filter(|&i| table.kappa_defined(i)) {
        let v = table.policy_values[i];
        let d = table.value(i, i, PaidUpOrder::First)? - v;
        rel = rel.max(d.abs() / v.abs().max(f64::MIN_POSITIVE));
    }
    out.check("paid-up value at conversion vs policy value (relative)", rel, 1e-9);
    let mut residual = 0.0f64;
    for i in 1..last {
        let interior = (i - 1..=i + 1).all(|j| table.kappa_defined(j));
        if interior {
            residual = residual.max(table.premium_decomposition(i)?.residual.abs());
        }
    }
    out.check("paid-up premium decomposition residual", residual, 1e-4 * premium_scale + 1e-12);
    if !table.kappa_is_monotone() {
        log::warn!("paid-up factor is not monotone in t");
    }
    Ok(())
}

pub(super) fn paidup(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let table = PaidUpTable::new(&r.valuation, &r.experience, h)?;
    let at = paidup_times(r);
    write_fan(&r.out, &table, &at, "paidup_fan.csv", out)?;
    let last = table.times.len() - 1;
    let mut rows = Vec::with_capacity(last + 1);
    for i in (0..=last).filter(|&i| table.kappa_defined(i)) {
        let d = table.premium_decomposition(i)?;
        let s = table.second_order_premium(i)?;
        rows.push(vec![
            num(table.times[i]),
            num(table.kappa_at(i)?),
            num(table.policy_values[i]),
            num(d.growth),
            num(d.mortality),
            num(d.residual),
            num(s.rate),
            num(s.loading),
        ]);
    }
    out.write_csv(
        &r.out,
        "paidup_premium.csv",
        &["t", "kappa", "V_valuation", "growth", "mortality", "residual", "second_order_rate", "loading"],
        rows,
    )?;
    let v_m = solve_backward(&r.experience, r.experience.cashflows.maturity_benefit, h)?;
    let mut summary_rows = Vec::new();
    let mut parts = Vec::new();
    for &t in &at {
        let i = table.index_of(t)?;
        let kappa = table.kappa_at(i)?;
        parts.push(format!("kappa({t}) = {}", num(kappa)));
        summary_rows.push(vec![
            num(t),
            num(kappa),
            num(table.policy_values[i]),
            num(table.value(i, i, PaidUpOrder::Second)?),
            num(v_m.values[i]),
        ]);
    }
    out.write_csv(
        &r.out,
        "paidup_summary.csv",
        &["t", "kappa", "V_valuation", "V_second_order", "V_experience"],
        summary_rows,
    )?;
    out.summary = format!("paid-up factors: {}", parts.join(", "));
    if check {
        let s = Sampled::new(&r.valuation, h)?;
        check_paidup(&table, max_abs(s.premium.iter().copied()), out)?;
    }
    Ok(())
}

pub(super) fn bonus(r: &Resolved, check: bool, out: &mut Outcome) -> Result<(), CliError> {
    let h = r.h;
    let pair = r
        .bonus
        .as_ref()
        .ok_or_else(|| CliError::Config("bonus needs a [bonus] table with beta_l and beta_m".into()))?;
    let rep = bonus_modeled_surplus(&r.valuation, &r.experience, pair, h)?;
    let s = &rep.surplus;
    out.write_csv(
        &r.out,
        "bonus.csv",
        &[
            "t",
            "V_diag",
            "k_bonus",
            "c_technical",
            "c_cashflow",
            "cost_of_bonus",
            "c_total",
            "theta_discounted",
        ],
        (0..s.len()).map(|i| {
            vec![
                num(s.times[i]),
                num(rep.v_diag[i]),
                num(rep.k_bonus[i]),
                num(s.c_technical[i]),
                num(s.c_cashflow[i]),
                num(rep.cost[i]),
                num(s.c_total[i]),
                num(s.theta_discounted[i]),
            ]
        }),
    )?;
    out.summary = format!(
        "total EPV of surplus with bonus {}, initial surplus {}",
        num(s.total_epv()),
        num(-s.v0_valuation)
    );
    if check {
        let sm = Sampled::new(&r.experience, h)?;
        let w = declared_accumulation(&r.valuation, &r.experience, pair, h)?;
        let n = s.len() - 1;
        let mut oracle: Vec<f64> = (0..=n).map(|i| sm.phi_node(i) * (w.values[i] - rep.v_diag[i])).collect();
        let maturity = r.experience.cashflows.maturity_benefit * bonus_accum(&pair.beta_m, r.contract.term, h)?;
        oracle[n] = sm.phi_node(n) * (w.values[n] - maturity);
        let scale = max_abs((0..=n).map(|i| sm.phi_node(i) * (w.values[i].abs() + rep.v_diag[i].abs())));
        check_surplus(s, &(oracle, scale), "bonus surplus vs phi (W - V)", out);
    }
    Ok(())
}
