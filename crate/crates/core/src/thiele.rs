//! Thiele's differential equation for the alive/dead model.
//!
//! ```text
//! d/dt g(t) = delta_t g(t) + tau_t - mu_t (S_t - g(t))
//! ```
//!
//! Solved backwards from `g(n) = terminal` (policy values) or forwards from
//! `g(0) = initial` (accumulations) with classical RK4 on a uniform mesh.
//! Maturity benefits enter only as the terminal boundary value.

use serde::{Deserialize, Serialize};

use crate::curves::{RateCurve, TechnicalBasis};
use crate::error::{domain, Error, Result};
use crate::grid::{self, Mesh};

/// Contractual (or valuation) cashflows of a single-life contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CashflowSpec {
    /// Premium rate per annum while alive.
    pub premium: RateCurve,
    /// Sum paid immediately on death.
    pub death_benefit: RateCurve,
    /// Paid at `term` on survival.
    pub maturity_benefit: f64,
    pub term: f64,
    /// Force of reversionary bonus; `None` for non-participating business.
    #[serde(default)]
    pub bonus_rate: Option<RateCurve>,
}

impl CashflowSpec {
    pub fn new(term: f64, premium: RateCurve, death_benefit: RateCurve, maturity_benefit: f64) -> Self {
        CashflowSpec {
            premium,
            death_benefit,
            maturity_benefit,
            term,
            bonus_rate: None,
        }
    }

    /// Term assurance for a level sum `sum`.
    pub fn term_assurance(term: f64, sum: f64, premium: f64) -> Self {
        Self::new(term, RateCurve::constant(premium), RateCurve::constant(sum), 0.0)
    }

    /// Endowment assurance paying `sum` on death or at maturity.
    pub fn endowment(term: f64, sum: f64, premium: f64) -> Self {
        Self::new(term, RateCurve::constant(premium), RateCurve::constant(sum), sum)
    }

    pub fn with_premium(&self, premium: RateCurve) -> Self {
        CashflowSpec {
            premium,
            ..self.clone()
        }
    }

    pub fn with_level_premium(&self, rate: f64) -> Self {
        self.with_premium(RateCurve::constant(rate))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.term.is_finite() && self.term > 0.0) {
            return Err(domain(format!("term must be positive, got {}", self.term)));
        }
        if !(self.maturity_benefit.is_finite() && self.maturity_benefit >= 0.0) {
            return Err(domain(format!(
                "maturity benefit must be non-negative, got {}",
                self.maturity_benefit
            )));
        }
        self.premium.validate()?;
        self.death_benefit.validate()?;
        if let Some(b) = &self.bonus_rate {
            b.validate()?;
        }
        Ok(())
    }
}

/// A technical basis together with the cashflows valued on it; parametrizes
/// exactly one Thiele equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuarialBasis {
    pub technical: TechnicalBasis,
    pub cashflows: CashflowSpec,
    #[serde(default)]
    pub label: String,
}

impl ActuarialBasis {
    pub fn new(label: impl Into<String>, technical: TechnicalBasis, cashflows: CashflowSpec) -> Self {
        ActuarialBasis {
            technical,
            cashflows,
            label: label.into(),
        }
    }

    pub fn term(&self) -> f64 {
        self.cashflows.term
    }

    pub fn with_premium(&self, premium: RateCurve) -> Self {
        ActuarialBasis {
            cashflows: self.cashflows.with_premium(premium),
            ..self.clone()
        }
    }

    pub fn with_level_premium(&self, rate: f64) -> Self {
        self.with_premium(RateCurve::constant(rate))
    }
}

/// Node values of a function on `origin, origin + h, ..., n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<f64>,
    /// Set when some node value is materially negative. Negative policy
    /// values are allowed but usually unsound in practice.
    pub negative_values: bool,
}

impl Curve {
    pub fn new(origin: f64, step: f64, values: Vec<f64>) -> Self {
        let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let negative_values = values.iter().any(|&v| v < -1e-10 * scale);
        Curve {
            origin,
            step,
            values,
            negative_values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.origin + self.step * i as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.time(i))
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.origin) / self.step;
        let i = x.round();
        if !(x.is_finite() && (x - i).abs() <= 1e-6 && i >= 0.0 && (i as usize) < self.values.len()) {
            return Err(domain(format!(
                "t = {t} is not a node of the curve on [{}, {}]",
                self.origin,
                self.end()
            )));
        }
        Ok(i as usize)
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.index_of(t)?])
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One Thiele equation sampled on the half grid, with its integrating factors.
#[derive(Debug, Clone)]
pub(crate) struct Sampled {
    pub mesh: Mesh,
    pub delta: Vec<f64>,
    pub mu: Vec<f64>,
    pub premium: Vec<f64>,
    pub benefit: Vec<f64>,
    pub maturity: f64,
    /// Running integrals of delta and mu on the half grid.
    pub int_delta: Vec<f64>,
    pub int_mu: Vec<f64>,
}

impl Sampled {
    pub fn new(ab: &ActuarialBasis, h: f64) -> Result<Self> {
        ab.cashflows.validate()?;
        let mesh = Mesh::new(ab.term(), h)?;
        Self::on_mesh(mesh, &ab.technical, &ab.cashflows)
    }

    pub fn on_mesh(mesh: Mesh, tb: &TechnicalBasis, cf: &CashflowSpec) -> Result<Self> {
        let delta = mesh.sample(&tb.delta)?;
        let mu = mesh.sample(&tb.mu)?;
        if let Some(j) = mu.iter().position(|&m| m < 0.0) {
            return Err(domain(format!(
                "force of mortality of basis '{}' is negative at t = {}",
                tb.label,
                mesh.half_time(j)
            )));
        }
        let premium = mesh.sample(&cf.premium)?;
        let benefit = mesh.sample(&cf.death_benefit)?;
        if let Some(j) = benefit.iter().position(|&s| s < 0.0) {
            return Err(domain(format!(
                "death benefit is negative at t = {}",
                mesh.half_time(j)
            )));
        }
        let int_delta = grid::cumulative_half(&mesh, &delta);
        let int_mu = grid::cumulative_half(&mesh, &mu);
        Ok(Sampled {
            mesh,
            delta,
            mu,
            premium,
            benefit,
            maturity: cf.maturity_benefit,
            int_delta,
            int_mu,
        })
    }

    pub fn phi_half(&self, j: usize) -> f64 {
        (-(self.int_delta[j] + self.int_mu[j])).exp()
    }

    pub fn v_node(&self, i: usize) -> f64 {
        (-self.int_delta[2 * i]).exp()
    }

    pub fn phi_node(&self, i: usize) -> f64 {
        self.phi_half(2 * i)
    }

    pub fn growth(&self) -> Vec<f64> {
        self.delta.iter().zip(&self.mu).map(|(d, m)| d + m).collect()
    }

    fn forcing(&self, premium: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..self.mesh.half_count())
            .map(|j| premium(j) - self.mu[j] * self.benefit[j])
            .collect()
    }

    pub fn backward(&self, terminal: f64) -> Result<Vec<f64>> {
        grid::rk4_backward(&self.mesh, &self.growth(), &self.forcing(|j| self.premium[j]), terminal, 0)
    }

    pub fn backward_with_level(&self, rate: f64, terminal: f64) -> Result<Vec<f64>> {
        grid::rk4_backward(&self.mesh, &self.growth(), &self.forcing(|_| rate), terminal, 0)
    }

    pub fn forward(&self, initial: f64) -> Result<Vec<f64>> {
        grid::rk4_forward(&self.mesh, &self.growth(), &self.forcing(|j| self.premium[j]), initial)
    }

    /// EPV at each node of future benefits, per survivor.
    pub fn passivum_nodes(&self) -> Vec<f64> {
        let n = self.mesh.steps();
        let integrand: Vec<f64> = (0..self.mesh.half_count())
            .map(|j| self.phi_half(j) * self.mu[j] * self.benefit[j])
            .collect();
        let tail = grid::tail_nodes(&self.mesh, &integrand);
        let phi_n = self.phi_node(n);
        (0..=n)
            .map(|i| (tail[i] + phi_n * self.maturity) / self.phi_node(i))
            .collect()
    }

    /// EPV at each node of future premiums, per survivor.
    pub fn activum_nodes(&self) -> Vec<f64> {
        let n = self.mesh.steps();
        let integrand: Vec<f64> = (0..self.mesh.half_count())
            .map(|j| self.phi_half(j) * self.premium[j])
            .collect();
        let tail = grid::tail_nodes(&self.mesh, &integrand);
        (0..=n).map(|i| tail[i] / self.phi_node(i)).collect()
    }

    pub fn has_benefits(&self) -> bool {
        self.maturity != 0.0 || self.benefit.iter().any(|&s| s != 0.0)
    }
}

fn to_curve(mesh: &Mesh, values: Vec<f64>) -> Curve {
    Curve::new(0.0, mesh.step(), values)
}

/// Policy values: Thiele solved backwards from `g(n) = terminal`.
pub fn solve_backward(ab: &ActuarialBasis, terminal: f64, h: f64) -> Result<Curve> {
    let s = Sampled::new(ab, h)?;
    let values = s.backward(terminal)?;
    let curve = to_curve(&s.mesh, values);
    if curve.negative_values {
        log::warn!("negative policy values under basis '{}'", ab.label);
    }
    Ok(curve)
}

/// Accumulations: Thiele solved forwards from `g(0) = initial`.
pub fn solve_forward(ab: &ActuarialBasis, initial: f64, h: f64) -> Result<Curve> {
    let s = Sampled::new(ab, h)?;
    let values = s.forward(initial)?;
    Ok(to_curve(&s.mesh, values))
}

/// Level premium rate satisfying the equivalence principle (`V_0 = 0` with
/// terminal value `S̄`). The premium curve of `cf` is ignored.
///
/// `V_0` is affine in the level rate, so two solves and a linear solve give
/// the root; bisection takes over if the residual says otherwise.
pub fn equivalence_premium(tb: &TechnicalBasis, cf: &CashflowSpec, h: f64) -> Result<f64> {
    let cf = cf.with_level_premium(0.0);
    cf.validate()?;
    let s = Sampled::on_mesh(Mesh::new(cf.term, h)?, tb, &cf)?;
    if !s.has_benefits() {
        return Ok(0.0);
    }
    let v0 = |rate: f64| -> Result<f64> { Ok(s.backward_with_level(rate, s.maturity)?[0]) };
    let at_zero = v0(0.0)?;
    let at_one = v0(1.0)?;
    let slope = at_one - at_zero;
    if !(slope.is_finite() && slope < 0.0) {
        return Err(Error::DegenerateContract(format!(
            "policy value does not decrease with premium (slope {slope})"
        )));
    }
    let mut rate = -at_zero / slope;
    let tol = 1e-12 * at_zero.abs().max(1.0);
    if v0(rate)?.abs() > tol {
        rate = bisect_premium(&v0, rate, tol)?;
    }
    if rate < 0.0 {
        log::warn!("equivalence premium under '{}' is negative: {rate}", tb.label);
    }
    Ok(rate)
}

fn bisect_premium(v0: &dyn Fn(f64) -> Result<f64>, guess: f64, tol: f64) -> Result<f64> {
    let width = guess.abs().max(1e-6);
    let (mut lo, mut hi) = (guess - width, guess + width);
    for _ in 0..60 {
        if v0(lo)? > 0.0 && v0(hi)? < 0.0 {
            break;
        }
        lo -= hi - lo;
        hi += hi - lo;
    }
    if !(v0(lo)? > 0.0 && v0(hi)? < 0.0) {
        return Err(Error::NumericalInstability("could not bracket the equivalence premium".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = v0(mid)?;
        if value.abs() <= tol {
            return Ok(mid);
        }
        if value > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Passivum `k(t)`: EPV at `t` of future benefit cashflows, per survivor.
pub fn passivum(ab: &ActuarialBasis, t: f64, h: f64) -> Result<f64> {
    let s = Sampled::new(ab, h)?;
    let i = s.mesh.node_index(t)?;
    Ok(s.passivum_nodes()[i])
}

/// Activum `a(t)`: EPV at `t` of future premiums, per survivor.
pub fn activum(ab: &ActuarialBasis, t: f64, h: f64) -> Result<f64> {
    let s = Sampled::new(ab, h)?;
    let i = s.mesh.node_index(t)?;
    Ok(s.activum_nodes()[i])
}

pub fn passivum_curve(ab: &ActuarialBasis, h: f64) -> Result<Curve> {
    let s = Sampled::new(ab, h)?;
    Ok(to_curve(&s.mesh, s.passivum_nodes()))
}

pub fn activum_curve(ab: &ActuarialBasis, h: f64) -> Result<Curve> {
    let s = Sampled::new(ab, h)?;
    Ok(to_curve(&s.mesh, s.activum_nodes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(delta: f64, mu: f64) -> TechnicalBasis {
        TechnicalBasis::new("flat", RateCurve::constant(delta), RateCurve::constant(mu))
    }

    #[test]
    fn premium_funding_risk_exactly_gives_zero_reserve() {
        let m = 0.01;
        let ab = ActuarialBasis::new("z", flat(0.04, m), CashflowSpec::term_assurance(20.0, 2.0, m * 2.0));
        let v = solve_backward(&ab, 0.0, 0.05).unwrap();
        assert!(v.values.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn pure_discounting_endowment() {
        let ab = ActuarialBasis::new("z", flat(0.05, 0.0), CashflowSpec::endowment(20.0, 1.0, 0.0));
        let v = solve_backward(&ab, 1.0, 0.005).unwrap();
        assert_eq!(v.last(), 1.0);
        for (t, x) in v.times().zip(&v.values) {
            assert!((x - (-0.05 * (20.0 - t)).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn annuity_accumulation() {
        let (d, p) = (0.04, 0.3);
        let ab = ActuarialBasis::new("z", flat(d, 0.0), CashflowSpec::new(10.0, RateCurve::constant(p), RateCurve::constant(0.0), 0.0));
        let w = solve_forward(&ab, 0.0, 0.01).unwrap();
        assert_eq!(w.first(), 0.0);
        for (t, x) in w.times().zip(&w.values) {
            assert!((x - p * ((d * t).exp() - 1.0) / d).abs() < 1e-11);
        }
    }

    #[test]
    fn no_cashflows_no_accumulation() {
        let ab = ActuarialBasis::new("z", flat(0.05, 0.02), CashflowSpec::term_assurance(10.0, 0.0, 0.0));
        let w = solve_forward(&ab, 0.0, 0.1).unwrap();
        assert!(w.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_hazard_premium_is_the_hazard() {
        for delta in [0.0, 0.03, 0.08] {
            let p = equivalence_premium(&flat(delta, 0.01), &CashflowSpec::term_assurance(20.0, 1.0, 0.0), 0.01).unwrap();
            assert!((p - 0.01).abs() < 1e-12, "delta={delta}: {p}");
        }
    }

    #[test]
    fn nothing_to_fund() {
        let cf = CashflowSpec::term_assurance(20.0, 0.0, 0.0);
        assert_eq!(equivalence_premium(&flat(0.05, 0.01), &cf, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn passivum_activum_boundaries() {
        let ab = ActuarialBasis::new("z", flat(0.0, 0.0), CashflowSpec::endowment(20.0, 1.0, 0.25));
        let k = passivum_curve(&ab, 0.05).unwrap();
        assert!(k.values.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let a = activum_curve(&ab, 0.05).unwrap();
        for (t, x) in a.times().zip(&a.values) {
            assert!((x - 0.25 * (20.0 - t)).abs() < 1e-12);
        }
        assert_eq!(activum(&ab, 20.0, 0.05).unwrap(), 0.0);
        let ab = ActuarialBasis::new("z", flat(0.05, 0.01), CashflowSpec::endowment(20.0, 1.0, 0.25));
        assert_eq!(passivum(&ab, 20.0, 0.05).unwrap(), 1.0);
        assert!(passivum(&ab, 20.01, 0.05).is_err());
    }

    #[test]
    fn negative_reserves_are_flagged() {
        // heavy premium on a tiny benefit
        let ab = ActuarialBasis::new("z", flat(0.05, 0.01), CashflowSpec::term_assurance(10.0, 1.0, 0.5));
        let v = solve_backward(&ab, 0.0, 0.1).unwrap();
        assert!(v.negative_values);
    }

    #[test]
    fn rejects_negative_mortality() {
        let ab = ActuarialBasis::new("z", flat(0.05, -0.01), CashflowSpec::term_assurance(10.0, 1.0, 0.0));
        assert!(matches!(solve_backward(&ab, 0.0, 0.1), Err(Error::Domain(_))));
    }
}
