//! Compound reversionary bonus.
//!
//! Benefits declared up to `t` are `S beta~M(t)`; from `t` on the valuation
//! anticipates growth at the valuation bonus force, so the benefit assumed at
//! `r >= t` is `F(t) S_r beta~L(r)` with `F(t) = beta~M(t) / beta~L(t)`.
//!
//! Only the diagonal `V^{L_t}_t` is needed for surplus. Since the valuation
//! is linear in the benefit, `V^{L_t}_t = F(t) Y_t + Q_t`, where `Y` values
//! the benefits `S beta~L` alone and `Q` the premiums alone; two backward
//! solves serve every `t`.

use serde::{Deserialize, Serialize};

use crate::curves::{cumulative, RateCurve};
use crate::error::{domain, Result};
use crate::grid::{self, Mesh};
use crate::surplus::{assemble, check_terms, SurplusReport};
use crate::thiele::{ActuarialBasis, Curve, Sampled};

/// Forces of bonus: anticipated by the valuation (`beta_l`) and declared in
/// experience (`beta_m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BonusPair {
    pub beta_l: RateCurve,
    pub beta_m: RateCurve,
}

impl BonusPair {
    pub fn new(beta_l: RateCurve, beta_m: RateCurve) -> Self {
        BonusPair { beta_l, beta_m }
    }

    pub fn none() -> Self {
        Self::new(RateCurve::constant(0.0), RateCurve::constant(0.0))
    }
}

/// Components of the systematic surplus rate with bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusRate {
    pub technical: f64,
    pub cashflow: f64,
    /// `(beta_M - beta_L) k`, subtracted in `total`.
    pub cost: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BonusSurplusReport {
    pub surplus: SurplusReport,
    /// `V^{L_t}_t` at each node.
    pub v_diag: Vec<f64>,
    /// `k^{L_t,M}(t)` at each node.
    pub k_bonus: Vec<f64>,
    pub cost: Vec<f64>,
}

/// `exp(int_0^t beta)`.
pub fn bonus_accum(beta: &RateCurve, t: f64, h: f64) -> Result<f64> {
    Ok(cumulative(beta, 0.0, t, h)?.exp())
}

/// Everything on the half grid / nodes that the bonus quantities need.
struct BonusTable {
    sl: Sampled,
    sm: Sampled,
    beta_l: Vec<f64>,
    beta_m: Vec<f64>,
    acc_l: Vec<f64>,
    acc_m: Vec<f64>,
}

impl BonusTable {
    fn new(val: &ActuarialBasis, exp: &ActuarialBasis, bonus: &BonusPair, h: f64) -> Result<Self> {
        check_terms(val, exp)?;
        let sl = Sampled::new(val, h)?;
        let sm = Sampled::new(exp, h)?;
        let mesh = sl.mesh;
        let sample = |c: &RateCurve, which: &str| -> Result<Vec<f64>> {
            let b = mesh.sample(c)?;
            if let Some(j) = b.iter().position(|&x| x < 0.0) {
                return Err(domain(format!(
                    "{which} force of bonus is negative at t = {}",
                    mesh.half_time(j)
                )));
            }
            Ok(b)
        };
        let beta_l = sample(&bonus.beta_l, "valuation")?;
        let beta_m = sample(&bonus.beta_m, "declared")?;
        let acc = |b: &[f64]| -> Vec<f64> { grid::cumulative_half(&mesh, b).iter().map(|x| x.exp()).collect() };
        Ok(BonusTable {
            acc_l: acc(&beta_l),
            acc_m: acc(&beta_m),
            sl,
            sm,
            beta_l,
            beta_m,
        })
    }

    fn mesh(&self) -> Mesh {
        self.sl.mesh
    }

    fn ratio(&self, i: usize) -> f64 {
        self.acc_m[2 * i] / self.acc_l[2 * i]
    }

    /// Valuation benefit inflated by the anticipated bonus, half grid.
    fn inflated_benefit(&self) -> Vec<f64> {
        self.sl.benefit.iter().zip(&self.acc_l).map(|(s, a)| s * a).collect()
    }

    fn inflated_maturity(&self) -> f64 {
        self.sl.maturity * self.acc_l[self.acc_l.len() - 1]
    }

    /// Backward solve under the valuation basis with benefit `scale * S beta~L`
    /// and premium weighted by `premium_weight`, down to node `stop`.
    fn solve(&self, scale: f64, premium_weight: f64, stop: usize) -> Result<Vec<f64>> {
        let s = &self.sl;
        let benefit = self.inflated_benefit();
        let b: Vec<f64> = (0..self.mesh().half_count())
            .map(|j| premium_weight * s.premium[j] - s.mu[j] * scale * benefit[j])
            .collect();
        grid::rk4_backward(&self.mesh(), &s.growth(), &b, scale * self.inflated_maturity(), stop)
    }

    fn diagonal(&self) -> Result<Vec<f64>> {
        let y = self.solve(1.0, 0.0, 0)?;
        let q = self.solve(0.0, 1.0, 0)?;
        Ok((0..y.len()).map(|i| self.ratio(i) * y[i] + q[i]).collect())
    }

    fn passivum(&self) -> Vec<f64> {
        let s = &self.sl;
        let mesh = self.mesh();
        let n = mesh.steps();
        let benefit = self.inflated_benefit();
        let integrand: Vec<f64> = (0..mesh.half_count())
            .map(|j| s.phi_half(j) * s.mu[j] * benefit[j])
            .collect();
        let tail = grid::tail_nodes(&mesh, &integrand);
        let end = s.phi_node(n) * self.inflated_maturity();
        (0..=n)
            .map(|i| self.ratio(i) * (tail[i] + end) / s.phi_node(i))
            .collect()
    }

    fn rate(&self, i: usize, v: f64, k: f64) -> BonusRate {
        let (l, m) = (&self.sl, &self.sm);
        let j = 2 * i;
        let declared = self.acc_m[j];
        let at_risk = l.benefit[j] * declared - v;
        let technical = (m.delta[j] - l.delta[j]) * v - (m.mu[j] - l.mu[j]) * at_risk;
        let cashflow = (m.premium[j] - l.premium[j]) - m.mu[j] * (m.benefit[j] - l.benefit[j]) * declared;
        let cost = (self.beta_m[j] - self.beta_l[j]) * k;
        BonusRate {
            technical,
            cashflow,
            cost,
            total: technical + cashflow - cost,
        }
    }
}

/// Valuation policy values on `[t, n]` for the benefits anticipated at `t`.
pub fn bonus_policy_value(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    bonus: &BonusPair,
    t: f64,
    h: f64,
) -> Result<Curve> {
    let table = BonusTable::new(val, exp, bonus, h)?;
    let mesh = table.mesh();
    let i = mesh.node_index(t)?;
    let values = table.solve(table.ratio(i), 1.0, i)?;
    Ok(Curve::new(mesh.node_time(i), mesh.step(), values))
}

/// `k^{L_t,M}(t)`: EPV at `t` of the anticipated benefits, per survivor.
pub fn bonus_passivum(val: &ActuarialBasis, exp: &ActuarialBasis, bonus: &BonusPair, t: f64, h: f64) -> Result<f64> {
    let table = BonusTable::new(val, exp, bonus, h)?;
    let i = table.mesh().node_index(t)?;
    Ok(table.passivum()[i])
}

pub fn bonus_systematic(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    bonus: &BonusPair,
    t: f64,
    h: f64,
) -> Result<BonusRate> {
    let table = BonusTable::new(val, exp, bonus, h)?;
    let i = table.mesh().node_index(t)?;
    let v = table.solve(table.ratio(i), 1.0, i)?[0];
    Ok(table.rate(i, v, table.passivum()[i]))
}

/// Experience-basis accumulation of the cashflows actually paid, with death
/// benefits `S^M beta~M`. Starts from 0.
pub fn declared_accumulation(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    bonus: &BonusPair,
    h: f64,
) -> Result<Curve> {
    let table = BonusTable::new(val, exp, bonus, h)?;
    let m = &table.sm;
    let mesh = table.mesh();
    let b: Vec<f64> = (0..mesh.half_count())
        .map(|j| m.premium[j] - m.mu[j] * m.benefit[j] * table.acc_m[j])
        .collect();
    let values = grid::rk4_forward(&mesh, &m.growth(), &b, 0.0)?;
    Ok(Curve::new(0.0, mesh.step(), values))
}

/// Modeled surplus with bonus, starting from `-V^{L_0}_0`.
pub fn bonus_modeled_surplus(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    bonus: &BonusPair,
    h: f64,
) -> Result<BonusSurplusReport> {
    let table = BonusTable::new(val, exp, bonus, h)?;
    let n = table.mesh().steps();
    let v_diag = table.diagonal()?;
    let k_bonus = table.passivum();
    let rates: Vec<BonusRate> = (0..=n).map(|i| table.rate(i, v_diag[i], k_bonus[i])).collect();
    let gap = (table.sm.maturity - table.sl.maturity) * table.acc_m[2 * n];
    let surplus = assemble(&table.sm, v_diag[0], gap, |i| {
        (rates[i].technical, rates[i].cashflow, rates[i].cost)
    });
    Ok(BonusSurplusReport {
        surplus,
        v_diag,
        k_bonus,
        cost: rates.iter().map(|r| r.cost).collect(),
    })
}
