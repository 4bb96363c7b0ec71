//! Built-in setups behind the figures: a life aged 40, term 20 years,
//! first-order basis `delta = 0.05` with G82 males mortality, second-order
//! basis `1.5 delta`, `0.8 mu`.

use std::path::PathBuf;

use crate::curves::{RateCurve, TechnicalBasis, DEFAULT_STEP};
use crate::grid::Mesh;
use crate::paidup::PaidUpTable;
use crate::simulate::monte_carlo;
use crate::surplus::modeled_surplus;
use crate::thiele::{equivalence_premium, solve_backward, solve_forward, ActuarialBasis, CashflowSpec, Sampled};

use super::commands::{check_paidup, check_surplus, surplus_oracle, write_fan};
use super::{num, Cli, CliError, Outcome};

/// Seed used for the simulated scenarios of figure 1 unless `--seed` is given.
pub const FIGURE_SEED: u64 = 1969;
/// Lives per simulated portfolio in figure 1.
pub const PORTFOLIO_SIZE: usize = 1000;

const TERM: f64 = 20.0;
const PAIDUP_TIMES: [f64; 3] = [5.0, 10.0, 15.0];

fn first_order() -> TechnicalBasis {
    TechnicalBasis::new("first-order", RateCurve::constant(0.05), RateCurve::g82m(40.0))
}

fn second_order() -> TechnicalBasis {
    first_order().rescaled("second-order", 1.5, 0.8)
}

fn third() -> TechnicalBasis {
    first_order().rescaled("low-interest", 0.6, 1.2)
}

/// The contract priced on the first-order basis, valued on `tb`.
fn priced(cf: CashflowSpec, tb: TechnicalBasis, h: f64) -> Result<ActuarialBasis, CliError> {
    let p = equivalence_premium(&first_order(), &cf, h)?;
    Ok(ActuarialBasis::new(tb.label.clone(), tb, cf.with_level_premium(p)))
}

pub(super) fn reproduce(figure: u8, cli: &Cli) -> Result<Outcome, CliError> {
    let h = cli.mesh.unwrap_or(DEFAULT_STEP);
    Mesh::new(TERM, h).map_err(|e| CliError::Config(format!("--mesh: {e}")))?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Outcome::default();
    match figure {
        1 => figure1(cli, h, &dir, &mut out)?,
        2 => figure2(cli.self_check, h, &dir, &mut out)?,
        3 | 4 => paidup_fans(figure, cli.self_check, h, &dir, &mut out)?,
        _ => return Err(CliError::Config(format!("no data for figure {figure}; choose 1, 2, 3 or 4"))),
    }
    Ok(out)
}

/// Term assurance values on three bases, and simulated portfolio surplus.
fn figure1(cli: &Cli, h: f64, dir: &PathBuf, out: &mut Outcome) -> Result<(), CliError> {
    let cf = CashflowSpec::term_assurance(TERM, 1.0, 0.0);
    let bases = [
        priced(cf.clone(), first_order(), h)?,
        priced(cf.clone(), second_order(), h)?,
        priced(cf, third(), h)?,
    ];
    let curves = bases
        .iter()
        .map(|b| solve_backward(b, 0.0, h))
        .collect::<Result<Vec<_>, _>>()?;
    let ts: Vec<f64> = curves[0].times().collect();
    out.write_csv(
        dir,
        "figure1a.csv",
        &["t", "V_first_order", "V_second_order", "V_low_interest"],
        (0..ts.len()).map(|i| {
            let mut row = vec![num(ts[i])];
            row.extend(curves.iter().map(|c| num(c.values[i])));
            row
        }),
    )?;

    let (l, m) = (&bases[0], &bases[1]);
    let seed = cli.seed.unwrap_or(FIGURE_SEED);
    let lives = cli.paths.unwrap_or(PORTFOLIO_SIZE);
    let sm = Sampled::new(m, h)?;
    let model = modeled_surplus(l, m, h)?;
    let scenarios = [seed, seed.wrapping_add(1)]
        .iter()
        .map(|&s| monte_carlo(l, m, lives, s, &[], &[], h))
        .collect::<Result<Vec<_>, _>>()?;
    out.write_csv(
        dir,
        "figure1_paths.csv",
        &["t", "scenario_1", "scenario_2", "modeled"],
        (0..ts.len()).map(|i| {
            let v = sm.v_node(i);
            vec![
                num(ts[i]),
                num(scenarios[0].mean[i] / v),
                num(scenarios[1].mean[i] / v),
                num(model.theta[i]),
            ]
        }),
    )?;
    out.summary = format!(
        "figure 1: term assurance premium {} per annum; portfolio scenarios of {lives} lives, seeds {seed} and {}",
        num(l.cashflows.premium.eval(0.0)?),
        seed.wrapping_add(1)
    );
    if cli.self_check {
        let w = solve_forward(l, 0.0, h)?;
        let gap = w.values.iter().zip(&curves[0].values).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        out.check("prospective = retrospective on the first-order basis", gap, 1e-6);
    }
    Ok(())
}

/// Endowment values on both bases and the constant surplus on the second.
fn figure2(check: bool, h: f64, dir: &PathBuf, out: &mut Outcome) -> Result<(), CliError> {
    let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
    let l = priced(cf.clone(), first_order(), h)?;
    let m = priced(cf, second_order(), h)?;
    let v_l = solve_backward(&l, 1.0, h)?;
    let v_m = solve_backward(&m, 1.0, h)?;
    let w_m = solve_forward(&m, 0.0, h)?;
    let mm = modeled_surplus(&m, &m, h)?;
    out.write_csv(
        dir,
        "figure2.csv",
        &["t", "V_L", "V_M", "W_M", "theta_MM_discounted"],
        (0..v_l.len()).map(|i| {
            vec![
                num(v_l.time(i)),
                num(v_l.values[i]),
                num(v_m.values[i]),
                num(w_m.values[i]),
                num(mm.theta_discounted[i]),
            ]
        }),
    )?;
    out.summary = format!(
        "figure 2: discounted surplus on the second-order basis is constant at {} (= -V_0^M)",
        num(mm.theta_discounted[0])
    );
    if check {
        let (lo, hi) = mm
            .theta_discounted
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        out.check("constancy of second-order surplus", hi - lo, 1e-8 * v_m.first().abs());
        let lm = modeled_surplus(&l, &m, h)?;
        check_surplus(&lm, &surplus_oracle(&l, &m, h)?, "modeled surplus vs phi (W - V)", out);
    }
    Ok(())
}

/// Paid-up fans at t = 5, 10, 15 on the first- and second-order bases.
fn paidup_fans(figure: u8, check: bool, h: f64, dir: &PathBuf, out: &mut Outcome) -> Result<(), CliError> {
    let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
    let l = priced(cf.clone(), first_order(), h)?;
    let m = priced(cf, second_order(), h)?;
    let table = PaidUpTable::new(&l, &m, h)?;
    write_fan(dir, &table, &PAIDUP_TIMES, &format!("figure{figure}.csv"), out)?;
    let v_m = solve_backward(&m, 1.0, h)?;
    out.write_csv(
        dir,
        &format!("figure{figure}_policy_values.csv"),
        &["t", "V_L", "V_M"],
        (0..table.times.len()).map(|i| vec![num(table.times[i]), num(table.policy_values[i]), num(v_m.values[i])]),
    )?;
    let kappas = PAIDUP_TIMES
        .iter()
        .map(|&t| Ok(format!("kappa({t}) = {}", num(table.kappa_at(table.index_of(t)?)?))))
        .collect::<Result<Vec<_>, CliError>>()?;
    out.summary = format!("figure {figure}: paid-up fans, {}", kappas.join(", "));
    if check {
        check_paidup(&table, l.cashflows.premium.eval(0.0)?, out)?;
    }
    Ok(())
}
