//! Paid-up valuation: the policy value at `t` buys reduced, premium-free
//! benefits `kappa(t) S`, with `kappa(t) = V_t / k(t)`.

use crate::error::{domain, Error, Result};
use crate::surplus::check_terms;
use crate::thiele::{ActuarialBasis, Curve, Sampled};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaidUpOrder {
    /// Valued on the valuation basis.
    First,
    /// Same frozen benefits valued on the experience technical basis.
    Second,
}

/// A policy made paid-up at `t`, valued on `[t, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaidUpState {
    pub t: f64,
    pub kappa: f64,
    pub first_order_values: Curve,
    pub second_order_values: Curve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremiumDecomposition {
    /// `(d kappa / dt) k(t)`: premium spent on raising the paid-up benefit.
    pub growth: f64,
    /// `mu (S - kappa S)`: cover for the sum at risk above the paid-up benefit.
    pub mortality: f64,
    /// Valuation premium less the two parts.
    pub residual: f64,
    /// Set at the mesh boundary, where the derivative is one-sided.
    pub one_sided: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderPremium {
    /// Premium rate needed on the experience basis to fund benefit growth.
    pub rate: f64,
    /// Valuation premium less `rate`, emerging as surplus.
    pub loading: f64,
    pub one_sided: bool,
}

/// Policy values, passiva and reduction factors at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PaidUpTable {
    pub step: f64,
    pub times: Vec<f64>,
    pub policy_values: Vec<f64>,
    /// Passivum of the valuation cashflows on the valuation basis.
    pub passivum_first: Vec<f64>,
    /// Passivum of the valuation cashflows on the experience technical basis.
    pub passivum_second: Vec<f64>,
    pub kappa: Vec<f64>,
    premium: Vec<f64>,
    benefit: Vec<f64>,
    mu_first: Vec<f64>,
    mu_second: Vec<f64>,
}

impl PaidUpTable {
    pub fn new(val: &ActuarialBasis, exp: &ActuarialBasis, h: f64) -> Result<Self> {
        check_terms(val, exp)?;
        let sl = Sampled::new(val, h)?;
        let sm = Sampled::on_mesh(sl.mesh, &exp.technical, &val.cashflows)?;
        let n = sl.mesh.steps();
        let policy_values = sl.backward(sl.maturity)?;
        let passivum_first = sl.passivum_nodes();
        let passivum_second = sm.passivum_nodes();
        let kappa = policy_values
            .iter()
            .zip(&passivum_first)
            .map(|(v, k)| if *k > 0.0 { v / k } else { f64::NAN })
            .collect();
        let at_nodes = |f: &[f64]| (0..=n).map(|i| f[2 * i]).collect::<Vec<_>>();
        Ok(PaidUpTable {
            step: sl.mesh.step(),
            times: (0..=n).map(|i| sl.mesh.node_time(i)).collect(),
            premium: at_nodes(&sl.premium),
            benefit: at_nodes(&sl.benefit),
            mu_first: at_nodes(&sl.mu),
            mu_second: at_nodes(&sm.mu),
            policy_values,
            passivum_first,
            passivum_second,
            kappa,
        })
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.step;
        let i = x.round();
        if !(x.is_finite() && (x - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.times.len()) {
            return Err(domain(format!("t = {t} is not a mesh node")));
        }
        Ok(i as usize)
    }

    /// Reduction factor at node `i`.
    pub fn kappa_at(&self, i: usize) -> Result<f64> {
        let k = self.kappa[i];
        if k.is_nan() {
            return Err(Error::DegenerateContract(format!(
                "no future benefits at t = {}, paid-up factor undefined",
                self.times[i]
            )));
        }
        if k < -1e-10 {
            log::warn!("negative paid-up factor {k} at t = {}", self.times[i]);
        }
        Ok(k)
    }

    /// Paid-up value at node `j` of a policy made paid-up at node `i <= j`.
    pub fn value(&self, i: usize, j: usize, order: PaidUpOrder) -> Result<f64> {
        if j < i {
            return Err(domain(format!(
                "paid-up value at r = {} precedes paid-up time {}",
                self.times[j], self.times[i]
            )));
        }
        let k = match order {
            PaidUpOrder::First => self.passivum_first[j],
            PaidUpOrder::Second => self.passivum_second[j],
        };
        Ok(self.kappa_at(i)? * k)
    }

    pub fn state(&self, i: usize) -> Result<PaidUpState> {
        let kappa = self.kappa_at(i)?;
        let scaled = |k: &[f64]| Curve::new(self.times[i], self.step, k[i..].iter().map(|x| kappa * x).collect());
        Ok(PaidUpState {
            t: self.times[i],
            kappa,
            first_order_values: scaled(&self.passivum_first),
            second_order_values: scaled(&self.passivum_second),
        })
    }

    pub fn kappa_defined(&self, i: usize) -> bool {
        !self.kappa[i].is_nan()
    }

    /// `d kappa / dt` by central differences; one-sided at the ends of the
    /// mesh or next to a node where `kappa` is undefined.
    fn kappa_slope(&self, i: usize) -> Result<(f64, bool)> {
        let last = self.times.len() - 1;
        let h = self.step;
        let left = i > 0 && self.kappa_defined(i - 1);
        let right = i < last && self.kappa_defined(i + 1);
        Ok(match (left, right) {
            (true, true) => ((self.kappa_at(i + 1)? - self.kappa_at(i - 1)?) / (2.0 * h), false),
            (false, true) => ((self.kappa_at(i + 1)? - self.kappa_at(i)?) / h, true),
            (true, false) => ((self.kappa_at(i)? - self.kappa_at(i - 1)?) / h, true),
            (false, false) => {
                return Err(Error::DegenerateContract(format!(
                    "paid-up factor undefined around t = {}",
                    self.times[i]
                )))
            }
        })
    }

    pub fn premium_decomposition(&self, i: usize) -> Result<PremiumDecomposition> {
        let (slope, one_sided) = self.kappa_slope(i)?;
        let kappa = self.kappa_at(i)?;
        let growth = slope * self.passivum_first[i];
        let mortality = self.mu_first[i] * (self.benefit[i] - kappa * self.benefit[i]);
        Ok(PremiumDecomposition {
            growth,
            mortality,
            residual: self.premium[i] - growth - mortality,
            one_sided,
        })
    }

    pub fn second_order_premium(&self, i: usize) -> Result<SecondOrderPremium> {
        let (slope, one_sided) = self.kappa_slope(i)?;
        let kappa = self.kappa_at(i)?;
        let rate = slope * self.passivum_second[i] + self.mu_second[i] * (self.benefit[i] - kappa * self.benefit[i]);
        Ok(SecondOrderPremium {
            rate,
            loading: self.premium[i] - rate,
            one_sided,
        })
    }

    /// Whether `kappa` is non-decreasing over the nodes where it is defined.
    pub fn kappa_is_monotone(&self) -> bool {
        let defined: Vec<f64> = self.kappa.iter().copied().filter(|k| !k.is_nan()).collect();
        defined.windows(2).all(|w| w[1] >= w[0] - 1e-12)
    }
}

/// `kappa(t) = V_t / k(t)` on the valuation basis.
pub fn paidup_factor(val: &ActuarialBasis, t: f64, h: f64) -> Result<f64> {
    let table = PaidUpTable::new(val, val, h)?;
    table.kappa_at(table.index_of(t)?)
}

/// Value at `r` of the benefits made paid-up at `t`.
pub fn paidup_value(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    t: f64,
    r: f64,
    order: PaidUpOrder,
    h: f64,
) -> Result<f64> {
    if r < t {
        return Err(domain(format!("paid-up value at r = {r} precedes paid-up time {t}")));
    }
    let table = PaidUpTable::new(val, exp, h)?;
    table.value(table.index_of(t)?, table.index_of(r)?, order)
}

pub fn paidup_state(val: &ActuarialBasis, exp: &ActuarialBasis, t: f64, h: f64) -> Result<PaidUpState> {
    let table = PaidUpTable::new(val, exp, h)?;
    table.state(table.index_of(t)?)
}

pub fn paidup_premium_decomposition(val: &ActuarialBasis, t: f64, h: f64) -> Result<PremiumDecomposition> {
    let table = PaidUpTable::new(val, val, h)?;
    table.premium_decomposition(table.index_of(t)?)
}

pub fn second_order_paidup_premium(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    t: f64,
    h: f64,
) -> Result<SecondOrderPremium> {
    let table = PaidUpTable::new(val, exp, h)?;
    table.second_order_premium(table.index_of(t)?)
}
