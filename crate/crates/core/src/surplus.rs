//! Deterministic surplus calculus between a valuation basis `L` and the
//! experience basis `M`.
//!
//! The systematic rate is
//!
//! ```text
//! c(t) = (dM - dL) V - (muM - muL)(S_L - V)              technical part
//!      + (tauM - tauL) - muM (S_M - S_L)                cashflow part
//! ```
//!
//! and the modeled discounted surplus is `-V_0 + int_0^t phiM c`, less the
//! discounted maturity difference at `t = n`.

use crate::curves::RateCurve;
use crate::error::{domain, Error, Result};
use crate::grid;
use crate::thiele::{ActuarialBasis, Curve, Sampled};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystematicMode {
    /// Technical-basis component only.
    Plain,
    /// Technical-basis plus cashflow (loading) component.
    Augmented,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystematicRate {
    pub technical: f64,
    pub cashflow: f64,
    pub total: f64,
}

/// Surplus decomposition on the shared mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SurplusReport {
    pub step: f64,
    pub times: Vec<f64>,
    pub c_technical: Vec<f64>,
    pub c_cashflow: Vec<f64>,
    pub c_total: Vec<f64>,
    /// Modeled surplus, undiscounted.
    pub theta: Vec<f64>,
    /// Modeled surplus discounted to 0 with the experience interest.
    pub theta_discounted: Vec<f64>,
    /// `V_0` under the valuation basis; initial surplus is its negative.
    pub v0_valuation: f64,
    /// `-phiM(n) (S̄_M - S̄_L)`, already included in the last node.
    pub terminal_adjustment: f64,
}

impl SurplusReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_epv(&self) -> f64 {
        self.theta_discounted[self.theta_discounted.len() - 1]
    }
}

pub(crate) fn check_terms(val: &ActuarialBasis, exp: &ActuarialBasis) -> Result<()> {
    if (val.term() - exp.term()).abs() > 1e-12 * val.term().max(1.0) {
        return Err(domain(format!(
            "valuation term {} differs from experience term {}",
            val.term(),
            exp.term()
        )));
    }
    Ok(())
}

struct Rates {
    delta_l: f64,
    delta_m: f64,
    mu_l: f64,
    mu_m: f64,
    tau_l: f64,
    tau_m: f64,
    s_l: f64,
    s_m: f64,
}

fn rates_at(val: &ActuarialBasis, exp: &ActuarialBasis, t: f64) -> Result<Rates> {
    Ok(Rates {
        delta_l: val.technical.delta.eval(t)?,
        delta_m: exp.technical.delta.eval(t)?,
        mu_l: val.technical.mu.eval(t)?,
        mu_m: exp.technical.mu.eval(t)?,
        tau_l: val.cashflows.premium.eval(t)?,
        tau_m: exp.cashflows.premium.eval(t)?,
        s_l: val.cashflows.death_benefit.eval(t)?,
        s_m: exp.cashflows.death_benefit.eval(t)?,
    })
}

fn combine(r: &Rates, v: f64, mode: SystematicMode) -> SystematicRate {
    let technical = (r.delta_m - r.delta_l) * v - (r.mu_m - r.mu_l) * (r.s_l - v);
    let cashflow = match mode {
        SystematicMode::Plain => 0.0,
        SystematicMode::Augmented => (r.tau_m - r.tau_l) - r.mu_m * (r.s_m - r.s_l),
    };
    SystematicRate {
        technical,
        cashflow,
        total: technical + cashflow,
    }
}

/// Systematic surplus rate at node `t`, given the valuation policy values `v`.
pub fn systematic_rate(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    v: &Curve,
    t: f64,
    mode: SystematicMode,
) -> Result<SystematicRate> {
    check_terms(val, exp)?;
    let policy_value = v.at(t)?;
    Ok(combine(&rates_at(val, exp, t)?, policy_value, mode))
}

/// Modeled surplus `Θ̃^{L,M}` and `Θ^{L,M}` at every node.
pub fn modeled_surplus(val: &ActuarialBasis, exp: &ActuarialBasis, h: f64) -> Result<SurplusReport> {
    check_terms(val, exp)?;
    let sl = Sampled::new(val, h)?;
    let sm = Sampled::new(exp, h)?;
    let v = sl.backward(sl.maturity)?;
    Ok(assemble(&sm, v[0], sm.maturity - sl.maturity, |i| {
        let j = 2 * i;
        let r = Rates {
            delta_l: sl.delta[j],
            delta_m: sm.delta[j],
            mu_l: sl.mu[j],
            mu_m: sm.mu[j],
            tau_l: sl.premium[j],
            tau_m: sm.premium[j],
            s_l: sl.benefit[j],
            s_m: sm.benefit[j],
        };
        let c = combine(&r, v[i], SystematicMode::Augmented);
        (c.technical, c.cashflow, 0.0)
    }))
}

/// Integrates node rates `(technical, cashflow, cost)` into a report, with
/// `total = technical + cashflow - cost`. Shared with the bonus module.
pub(crate) fn assemble(
    sm: &Sampled,
    v0: f64,
    maturity_gap: f64,
    rate: impl Fn(usize) -> (f64, f64, f64),
) -> SurplusReport {
    let mesh = sm.mesh;
    let n = mesh.steps();
    let h = mesh.step();
    let mut c_technical = Vec::with_capacity(n + 1);
    let mut c_cashflow = Vec::with_capacity(n + 1);
    let mut c_total = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let (tech, cash, cost) = rate(i);
        c_technical.push(tech);
        c_cashflow.push(cash);
        c_total.push(tech + cash - cost);
    }
    let integrand: Vec<f64> = (0..=n).map(|i| sm.phi_node(i) * c_total[i]).collect();
    let integral = grid::cumulative_nodes(h, &integrand);
    let terminal_adjustment = -sm.phi_node(n) * maturity_gap;
    let mut theta_discounted: Vec<f64> = integral.iter().map(|x| x - v0).collect();
    theta_discounted[n] += terminal_adjustment;
    let theta = theta_discounted
        .iter()
        .enumerate()
        .map(|(i, x)| x / sm.v_node(i))
        .collect();
    SurplusReport {
        step: h,
        times: (0..=n).map(|i| mesh.node_time(i)).collect(),
        c_technical,
        c_cashflow,
        c_total,
        theta,
        theta_discounted,
        v0_valuation: v0,
        terminal_adjustment,
    }
}

/// Split of the pure-premium loading `P - pi_L` into the part emerging as
/// premiums are received (`P - tau_L`) and the part capitalized at outset
/// (`tau_L - pi_L`).
pub fn loading_split(premium: &RateCurve, tau_l: &RateCurve, pi_l: f64, t: f64) -> Result<(f64, f64)> {
    let p = premium.eval(t)?;
    let tau = tau_l.eval(t)?;
    Ok((p - tau, tau - pi_l))
}

/// Initial surplus `-V_0^L`, computed from the Thiele solution and checked
/// against the capitalized loadings `int phiL (tauL - piL)`.
pub fn initial_surplus(val: &ActuarialBasis, pi_l: f64, h: f64) -> Result<f64> {
    let s = Sampled::new(val, h)?;
    let from_solver = -s.backward(s.maturity)?[0];
    let integrand: Vec<f64> = (0..s.mesh.half_count())
        .map(|j| s.phi_half(j) * (s.premium[j] - pi_l))
        .collect();
    let from_loadings = grid::tail_nodes(&s.mesh, &integrand)[0];
    let tol = 1e-6 * from_solver.abs().max(from_loadings.abs()) + 1e-10 * s.maturity.abs().max(1.0);
    if (from_solver - from_loadings).abs() > tol || !from_solver.is_finite() {
        return Err(Error::InternalConsistency(format!(
            "initial surplus {from_solver} disagrees with capitalized loadings {from_loadings}"
        )));
    }
    Ok(from_solver)
}

/// EPV under the experience basis of total surplus, `Θ̃^{L,M}(n)`.
pub fn total_surplus_epv(val: &ActuarialBasis, exp: &ActuarialBasis, h: f64) -> Result<f64> {
    Ok(modeled_surplus(val, exp, h)?.total_epv())
}
