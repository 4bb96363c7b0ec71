//! Deterministic rate curves and the discount/survival factors built from them.
//!
//! A [`RateCurve`] is a pure function of policy duration `t` (years since
//! inception). Mortality curves carry the entry age, so `t = 0` is age `x`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default quadrature / integration step in years.
pub const DEFAULT_STEP: f64 = 0.005;

/// Slack allowed when testing `t` against a closed interval.
const TIME_EPS: f64 = 1e-9;

/// A deterministic time-indexed rate (interest, hazard, premium, benefit, bonus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateCurve {
    Constant {
        rate: f64,
    },
    /// `a + b * c^(entry_age + t)`.
    Makeham {
        a: f64,
        b: f64,
        c: f64,
        entry_age: f64,
    },
    Scaled {
        base: Box<RateCurve>,
        factor: f64,
    },
    Shifted {
        base: Box<RateCurve>,
        offset: f64,
    },
    /// Left-continuous step function: `values[i]` applies on
    /// `(nodes[i], nodes[i + 1]]`, and `values[0]` also at `nodes[0]`.
    Table { nodes: Vec<f64>, values: Vec<f64> },
}

impl RateCurve {
    pub fn constant(rate: f64) -> Self {
        RateCurve::Constant { rate }
    }

    pub fn makeham(a: f64, b: f64, c: f64, entry_age: f64) -> Self {
        RateCurve::Makeham { a, b, c, entry_age }
    }

    /// Danish G82 males first-order mortality,
    /// `0.0005 + 10^(5.728 - 10 + 0.038 (x + t))`.
    pub fn g82m(entry_age: f64) -> Self {
        RateCurve::makeham(0.0005, 10f64.powf(5.728 - 10.0), 10f64.powf(0.038), entry_age)
    }

    pub fn scaled(self, factor: f64) -> Self {
        RateCurve::Scaled {
            base: Box::new(self),
            factor,
        }
    }

    pub fn shifted(self, offset: f64) -> Self {
        RateCurve::Shifted {
            base: Box::new(self),
            offset,
        }
    }

    pub fn table(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let curve = RateCurve::Table { nodes, values };
        curve.validate()?;
        Ok(curve)
    }

    /// Structural checks: finite parameters and a well-formed table.
    pub fn validate(&self) -> Result<()> {
        match self {
            RateCurve::Constant { rate } => finite("constant rate", *rate),
            RateCurve::Makeham { a, b, c, entry_age } => {
                finite("makeham a", *a)?;
                finite("makeham b", *b)?;
                finite("makeham entry_age", *entry_age)?;
                if !(c.is_finite() && *c > 0.0) {
                    return Err(domain(format!("makeham c must be positive, got {c}")));
                }
                Ok(())
            }
            RateCurve::Scaled { base, factor } => {
                finite("scale factor", *factor)?;
                base.validate()
            }
            RateCurve::Shifted { base, offset } => {
                finite("shift offset", *offset)?;
                base.validate()
            }
            RateCurve::Table { nodes, values } => {
                if nodes.len() < 2 {
                    return Err(domain("table needs at least two nodes"));
                }
                if values.len() + 1 != nodes.len() {
                    return Err(domain(format!(
                        "table with {} nodes needs {} values, got {}",
                        nodes.len(),
                        nodes.len() - 1,
                        values.len()
                    )));
                }
                if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
                    return Err(domain("table nodes must be finite and strictly increasing"));
                }
                values.iter().try_for_each(|v| finite("table value", *v))
            }
        }
    }

    /// Value of the curve at duration `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= -TIME_EPS) {
            return Err(domain(format!("curve evaluated at invalid time {t}")));
        }
        self.eval_unchecked(t)
    }

    fn eval_unchecked(&self, t: f64) -> Result<f64> {
        Ok(match self {
            RateCurve::Constant { rate } => *rate,
            RateCurve::Makeham { a, b, c, entry_age } => a + b * c.powf(entry_age + t),
            RateCurve::Scaled { base, factor } => factor * base.eval_unchecked(t)?,
            RateCurve::Shifted { base, offset } => base.eval_unchecked(t)? + offset,
            RateCurve::Table { nodes, values } => {
                let first = nodes[0];
                let last = nodes[nodes.len() - 1];
                if t < first - TIME_EPS || t > last + TIME_EPS {
                    return Err(domain(format!(
                        "t = {t} outside table domain [{first}, {last}]"
                    )));
                }
                // first node strictly >= t, minus one, gives the interval (left-continuous)
                let idx = nodes.partition_point(|&x| x < t);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
        })
    }

    /// `Some(rate)` when the curve does not depend on `t`.
    fn is_constant(&self) -> Option<f64> {
        match self {
            RateCurve::Constant { rate } => Some(*rate),
            RateCurve::Scaled { base, factor } => base.is_constant().map(|r| r * factor),
            RateCurve::Shifted { base, offset } => base.is_constant().map(|r| r + offset),
            _ => None,
        }
    }
}

fn finite(what: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} must be finite, got {x}")))
    }
}

/// Value of `curve` at `t`.
pub fn eval_rate(curve: &RateCurve, t: f64) -> Result<f64> {
    curve.eval(t)
}

/// Composite Simpson approximation of the integral of `curve` over `[t0, t1]`
/// using panels no wider than `quad_step`.
pub fn cumulative(curve: &RateCurve, t0: f64, t1: f64, quad_step: f64) -> Result<f64> {
    if !(t0.is_finite() && t1.is_finite() && t0 >= -TIME_EPS && t1 >= t0) {
        return Err(domain(format!("invalid integration interval [{t0}, {t1}]")));
    }
    if !(quad_step.is_finite() && quad_step > 0.0) {
        return Err(domain(format!("quadrature step must be positive, got {quad_step}")));
    }
    let width = t1 - t0;
    if width == 0.0 {
        return Ok(0.0);
    }
    if let Some(rate) = curve.is_constant() {
        return Ok(rate * width);
    }
    let panels = (width / quad_step - TIME_EPS).ceil().max(1.0) as usize;
    let h = width / panels as f64;
    let mut sum = 0.0;
    let mut left = curve.eval(t0)?;
    for i in 0..panels {
        let a = t0 + h * i as f64;
        let mid = curve.eval(a + 0.5 * h)?;
        let right = curve.eval(if i + 1 == panels { t1 } else { a + h })?;
        sum += left + 4.0 * mid + right;
        left = right;
    }
    let value = sum * h / 6.0;
    if !value.is_finite() {
        return Err(Error::NumericalInstability(format!(
            "integral over [{t0}, {t1}] is not finite"
        )));
    }
    Ok(value)
}

/// A technical basis: force of interest and force of mortality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnicalBasis {
    pub delta: RateCurve,
    pub mu: RateCurve,
    #[serde(default)]
    pub label: String,
}

impl TechnicalBasis {
    pub fn new(label: impl Into<String>, delta: RateCurve, mu: RateCurve) -> Self {
        TechnicalBasis {
            delta,
            mu,
            label: label.into(),
        }
    }

    /// Scale interest and mortality, e.g. `(1.5, 0.8)` for a realistic
    /// second-order basis derived from a safe-side first-order one.
    pub fn rescaled(&self, label: impl Into<String>, delta_factor: f64, mu_factor: f64) -> Self {
        TechnicalBasis {
            delta: self.delta.clone().scaled(delta_factor),
            mu: self.mu.clone().scaled(mu_factor),
            label: label.into(),
        }
    }
}

/// Discount, survival and combined factors at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factors {
    pub v: f64,
    pub p: f64,
    pub phi: f64,
}

/// `v = exp(-int delta)`, `p = exp(-int mu)`, `phi = v p`, all from 0 to `t`.
pub fn factors(basis: &TechnicalBasis, t: f64, quad_step: f64) -> Result<Factors> {
    let v = (-cumulative(&basis.delta, 0.0, t, quad_step)?).exp();
    let p = (-cumulative(&basis.mu, 0.0, t, quad_step)?).exp();
    Ok(Factors { v, p, phi: v * p })
}
