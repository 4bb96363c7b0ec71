//! Independent oracles: adaptive Gauss-Kronrod quadrature and closed-form
//! Makeham survival. Nothing here calls the engine's mesh integrators.

#![allow(dead_code)]

use lifesurplus::{equivalence_premium, ActuarialBasis, CashflowSpec, RateCurve, TechnicalBasis};

pub const G82_A: f64 = 0.0005;
pub const G82_LOG_B: f64 = 5.728 - 10.0;
pub const G82_LOG_C: f64 = 0.038;
pub const AGE: f64 = 40.0;
pub const TERM: f64 = 20.0;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = r * XGK[k];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod (7, 15) integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adapt(&f, a, b, 1e-14, 40)
}

/// Constant interest with `scale` times G82 males mortality from `AGE`.
#[derive(Debug, Clone, Copy)]
pub struct Closed {
    pub delta: f64,
    pub mu_scale: f64,
    pub age: f64,
}

impl Closed {
    pub fn first_order() -> Self {
        Closed {
            delta: 0.05,
            mu_scale: 1.0,
            age: AGE,
        }
    }

    pub fn second_order() -> Self {
        Closed {
            delta: 0.075,
            mu_scale: 0.8,
            age: AGE,
        }
    }

    fn b() -> f64 {
        10f64.powf(G82_LOG_B)
    }

    fn c() -> f64 {
        10f64.powf(G82_LOG_C)
    }

    pub fn mu(&self, t: f64) -> f64 {
        self.mu_scale * (G82_A + Self::b() * Self::c().powf(self.age + t))
    }

    /// Integral of `mu` over `[0, t]` in closed form.
    pub fn int_mu(&self, t: f64) -> f64 {
        let c = Self::c();
        self.mu_scale * (G82_A * t + Self::b() * c.powf(self.age) * (c.powf(t) - 1.0) / c.ln())
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.int_mu(t)).exp()
    }

    pub fn phi(&self, t: f64) -> f64 {
        (-self.delta * t - self.int_mu(t)).exp()
    }

    /// Prospective value at `t` of death benefit `s`, maturity `sbar` and
    /// premium rate `p`.
    pub fn policy_value(&self, t: f64, n: f64, s: f64, sbar: f64, p: f64) -> f64 {
        let pt = self.phi(t);
        integrate(|r| self.phi(r) / pt * (self.mu(r) * s - p), t, n) + self.phi(n) / pt * sbar
    }

    /// Retrospective accumulation at `t` from 0.
    pub fn accumulation(&self, t: f64, s: f64, p: f64) -> f64 {
        let pt = self.phi(t);
        integrate(|r| self.phi(r) / pt * (p - self.mu(r) * s), 0.0, t)
    }

    pub fn passivum(&self, t: f64, n: f64, s: f64, sbar: f64) -> f64 {
        self.policy_value(t, n, s, sbar, 0.0)
    }

    pub fn annuity(&self, t: f64, n: f64) -> f64 {
        let pt = self.phi(t);
        integrate(|r| self.phi(r) / pt, t, n)
    }

    /// Level premium from the ratio of integrals.
    pub fn premium(&self, n: f64, s: f64, sbar: f64) -> f64 {
        self.passivum(0.0, n, s, sbar) / self.annuity(0.0, n)
    }
}

pub fn first_order() -> TechnicalBasis {
    TechnicalBasis::new("first-order", RateCurve::constant(0.05), RateCurve::g82m(AGE))
}

pub fn second_order() -> TechnicalBasis {
    first_order().rescaled("second-order", 1.5, 0.8)
}

/// Contract priced on the first-order basis and valued on `tb`.
pub fn priced(cf: &CashflowSpec, tb: TechnicalBasis, h: f64) -> ActuarialBasis {
    let p = equivalence_premium(&first_order(), cf, h).unwrap();
    ActuarialBasis::new(tb.label.clone(), tb, cf.with_level_premium(p))
}

pub fn endowment_pair(h: f64) -> (ActuarialBasis, ActuarialBasis) {
    let cf = CashflowSpec::endowment(TERM, 1.0, 0.0);
    (priced(&cf, first_order(), h), priced(&cf, second_order(), h))
}

pub fn term_pair(h: f64) -> (ActuarialBasis, ActuarialBasis) {
    let cf = CashflowSpec::term_assurance(TERM, 1.0, 0.0);
    (priced(&cf, first_order(), h), priced(&cf, second_order(), h))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Largest `|a_i - b_i|` relative to the largest `|b_i|`.
pub fn sup_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn sup_abs(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
