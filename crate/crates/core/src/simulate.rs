//! Monte Carlo over the time of death under the experience basis.
//!
//! Each path is driven by its own ChaCha8 stream seeded from
//! `splitmix64(splitmix64(seed) ^ path_index)`, so results do not depend on how paths are
//! scheduled across threads. Lifetimes come from inverting the cumulative
//! hazard on the half grid. Benefits are discounted at the exact death time;
//! the reserve is released at the first node at or after death.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curves::{RateCurve, DEFAULT_STEP};
use crate::error::{domain, Result};
use crate::grid::{self, Mesh};
use crate::surplus::check_terms;
use crate::thiele::{ActuarialBasis, Curve, Sampled};

/// One simulated life.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Time of death in `(0, n]`; `None` when the life survives to `n`.
    pub death_time: Option<f64>,
    pub seed: u64,
}

impl Scenario {
    pub fn survived(&self) -> bool {
        self.death_time.is_none()
    }

    pub fn alive_at(&self, t: f64) -> bool {
        self.death_time.map_or(true, |d| d > t)
    }
}

/// Realized surplus along one path, at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub times: Vec<f64>,
    /// Discounted stochastic surplus.
    pub theta_discounted: Vec<f64>,
    /// The same, undiscounted with the experience interest.
    pub theta: Vec<f64>,
    /// Increment of `int v R dN - int v R mu dt` over the step ending at
    /// each node (zero at `t = 0`).
    pub martingale_increments: Vec<f64>,
    /// Discounted value of all realized cashflows, premiums positive.
    pub discounted_cashflow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_sums(n: usize, sum: f64, sum_sq: f64) -> Estimate {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error: (var / nf).sqrt(),
        }
    }

    fn from_samples(xs: &[f64]) -> Estimate {
        let (s, q) = xs.iter().fold((0.0, 0.0), |(s, q), x| (s + x, q + x * x));
        Estimate::from_sums(xs.len(), s, q)
    }

    /// `|mean - target| <= k * std_error`.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Conditional expectation check at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEstimate {
    pub t: f64,
    /// Paths alive at `t`.
    pub alive: usize,
    /// Valuation policy value at `t`.
    pub policy_value: f64,
    /// Mean discounted future net outgo among survivors, simulated under the
    /// valuation basis. `None` when no path is alive at `t`.
    pub estimate: Option<Estimate>,
}

impl CheckpointEstimate {
    pub fn skipped(&self) -> bool {
        self.estimate.is_none()
    }
}

/// Sample covariance of discounted surplus increments over two intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCovariance {
    pub first: (f64, f64),
    pub second: (f64, f64),
    pub covariance: f64,
    pub std_error: f64,
}

impl IntervalCovariance {
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        (self.covariance - z * self.std_error, self.covariance + z * self.std_error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCReport {
    pub n_paths: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub survivors: usize,
    pub checkpoints: Vec<CheckpointEstimate>,
    pub covariances: Vec<IntervalCovariance>,
    /// Per-path `int_0^n v R dM`, averaged.
    pub martingale_residual: Estimate,
}

impl MCReport {
    pub fn estimate_at(&self, i: usize) -> Estimate {
        Estimate {
            mean: self.mean[i],
            std_error: self.std_error[i],
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of path `index` in a run seeded with `seed`. The run seed is mixed
/// first so that nearby run seeds do not share path seeds.
pub fn path_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

/// Standard exponential draw. The uniform lies strictly inside `(0, 1)`.
fn exponential(rng: &mut ChaCha8Rng) -> f64 {
    let u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    -u.ln()
}

/// Inverse-transform sampler on a cumulative hazard tabulated on the half grid.
#[derive(Debug, Clone)]
pub struct LifetimeSampler {
    mesh: Mesh,
    cum: Vec<f64>,
}

impl LifetimeSampler {
    pub fn new(mu: &RateCurve, mesh: Mesh) -> Result<Self> {
        let rates = mesh.sample(mu)?;
        if let Some(j) = rates.iter().position(|&m| m < 0.0) {
            return Err(domain(format!(
                "force of mortality is negative at t = {}",
                mesh.half_time(j)
            )));
        }
        Ok(Self::from_cumulative(mesh, grid::cumulative_half(&mesh, &rates)))
    }

    fn from_cumulative(mesh: Mesh, cum: Vec<f64>) -> Self {
        LifetimeSampler { mesh, cum }
    }

    /// Probability of surviving the whole term.
    pub fn survival(&self) -> f64 {
        (-self.cum[self.cum.len() - 1]).exp()
    }

    /// First time after `from` at which the hazard accumulated since `from`
    /// reaches `e`, or `None` if that does not happen by `n`.
    pub fn invert(&self, from: f64, e: f64) -> Option<f64> {
        let target = grid::interp_half(&self.mesh, &self.cum, from) + e;
        if target > self.cum[self.cum.len() - 1] {
            return None;
        }
        let j = self.cum.partition_point(|&c| c < target).max(1);
        let (c0, c1) = (self.cum[j - 1], self.cum[j]);
        let (t0, t1) = (self.mesh.half_time(j - 1), self.mesh.half_time(j));
        let t = if c1 > c0 {
            t0 + (target - c0) / (c1 - c0) * (t1 - t0)
        } else {
            t1
        };
        Some(t.max(from).min(self.mesh.term()))
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Option<f64> {
        self.invert(0.0, exponential(rng))
    }
}

/// Draws one lifetime from the hazard `mu` on `[0, n]`.
pub fn sample_lifetime(mu: &RateCurve, n: f64, seed: u64) -> Result<Scenario> {
    let steps = (n / DEFAULT_STEP).ceil().max(1.0) as usize;
    let sampler = LifetimeSampler::new(mu, Mesh::with_steps(n, steps)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Scenario {
        death_time: sampler.draw(&mut rng),
        seed,
    })
}

/// Everything a path needs, tabulated once.
struct Engine {
    mesh: Mesh,
    exp: Sampled,
    val: Sampled,
    exp_benefit: RateCurve,
    val_benefit: RateCurve,
    sampler_exp: LifetimeSampler,
    sampler_val: LifetimeSampler,
    /// Running discounted premiums under the experience basis, half grid.
    premiums_exp: Vec<f64>,
    /// The same under the valuation basis.
    premiums_val: Vec<f64>,
    /// Valuation policy values at nodes.
    reserve: Vec<f64>,
    /// Running compensator `int v^M R^L mu^M` at nodes.
    compensator: Vec<f64>,
    /// Discounted surplus at each node of a path still alive there.
    alive_value: Vec<f64>,
}

impl Engine {
    fn new(val: &ActuarialBasis, exp: &ActuarialBasis, reserve: Option<&Curve>, h: f64) -> Result<Engine> {
        check_terms(val, exp)?;
        let sv = Sampled::new(val, h)?;
        let sm = Sampled::new(exp, h)?;
        let mesh = sm.mesh;
        let n = mesh.steps();
        let reserve = match reserve {
            Some(c) => {
                if c.len() != mesh.node_count() || (c.step - mesh.step()).abs() > 1e-12 || c.origin != 0.0 {
                    return Err(domain("policy value curve does not live on the simulation mesh"));
                }
                c.values.clone()
            }
            None => sv.backward(sv.maturity)?,
        };
        let running = |s: &Sampled| {
            let f: Vec<f64> = (0..mesh.half_count())
                .map(|j| (-s.int_delta[j]).exp() * s.premium[j])
                .collect();
            grid::cumulative_half(&mesh, &f)
        };
        let premiums_exp = running(&sm);
        let premiums_val = running(&sv);
        let compensand: Vec<f64> = (0..=n)
            .map(|i| sm.v_node(i) * (sv.benefit[2 * i] - reserve[i]) * sm.mu[2 * i])
            .collect();
        let compensator = grid::cumulative_nodes(mesh.step(), &compensand);
        let mut alive_value: Vec<f64> = (0..=n)
            .map(|i| premiums_exp[2 * i] - sm.v_node(i) * reserve[i])
            .collect();
        alive_value[n] = premiums_exp[2 * n] - sm.v_node(n) * sm.maturity;
        Ok(Engine {
            mesh,
            sampler_exp: LifetimeSampler::from_cumulative(mesh, sm.int_mu.clone()),
            sampler_val: LifetimeSampler::from_cumulative(mesh, sv.int_mu.clone()),
            exp: sm,
            val: sv,
            exp_benefit: exp.cashflows.death_benefit.clone(),
            val_benefit: val.cashflows.death_benefit.clone(),
            premiums_exp,
            premiums_val,
            reserve,
            compensator,
            alive_value,
        })
    }

    fn v_exp(&self, t: f64) -> f64 {
        (-grid::interp_half(&self.mesh, &self.exp.int_delta, t)).exp()
    }

    fn v_val(&self, t: f64) -> f64 {
        (-grid::interp_half(&self.mesh, &self.val.int_delta, t)).exp()
    }

    /// Number of nodes strictly before `death`, i.e. nodes at which the life
    /// is still in force.
    fn nodes_alive(&self, death: Option<f64>) -> usize {
        let n = self.mesh.steps();
        match death {
            None => n + 1,
            Some(d) => {
                let mut i = ((d / self.mesh.step()).ceil() as usize).min(n);
                while i > 0 && self.mesh.node_time(i - 1) >= d {
                    i -= 1;
                }
                while i < n && self.mesh.node_time(i) < d {
                    i += 1;
                }
                i
            }
        }
    }

    /// Discounted surplus after death at `d`; constant from then on.
    fn after_death(&self, d: f64) -> Result<f64> {
        Ok(grid::interp_half(&self.mesh, &self.premiums_exp, d) - self.v_exp(d) * self.exp_benefit.eval(d)?)
    }

    /// `int_0^{min(d, n)} v^M R^L dM^M` along the path.
    fn martingale_to(&self, death: Option<f64>, t: f64) -> Result<f64> {
        let end = death.map_or(t, |d| d.min(t));
        let mut m = -grid::interp_nodes(&self.mesh, &self.compensator, end);
        if let Some(d) = death.filter(|&d| d <= t) {
            let r = self.val_benefit.eval(d)? - grid::interp_nodes(&self.mesh, &self.reserve, d);
            m += self.v_exp(d) * r;
        }
        Ok(m)
    }

    /// Discounted future net outgo from `t` under the valuation basis, for a
    /// life alive at `t` whose residual hazard draw is `e`.
    fn nested_outgo(&self, t: f64, e: f64) -> Result<f64> {
        let n = self.mesh.term();
        let death = self.sampler_val.invert(t, e);
        let end = death.unwrap_or(n);
        let benefit = match death {
            Some(d) => self.v_val(d) * self.val_benefit.eval(d)?,
            None => self.v_val(n) * self.val.maturity,
        };
        let premiums = grid::interp_half(&self.mesh, &self.premiums_val, end)
            - grid::interp_half(&self.mesh, &self.premiums_val, t);
        Ok((benefit - premiums) / self.v_val(t))
    }

    fn path(&self, sc: &Scenario) -> Result<PathResult> {
        let n = self.mesh.steps();
        let alive = self.nodes_alive(sc.death_time);
        let dead_value = match sc.death_time {
            Some(d) => self.after_death(d)?,
            None => 0.0,
        };
        let mut theta_discounted = Vec::with_capacity(n + 1);
        let mut theta = Vec::with_capacity(n + 1);
        let mut martingale_increments = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        for i in 0..=n {
            let x = if i < alive { self.alive_value[i] } else { dead_value };
            theta_discounted.push(x);
            theta.push(x / self.exp.v_node(i));
            let m = self.martingale_to(sc.death_time, self.mesh.node_time(i))?;
            martingale_increments.push(m - prev);
            prev = m;
        }
        Ok(PathResult {
            times: (0..=n).map(|i| self.mesh.node_time(i)).collect(),
            discounted_cashflow: theta_discounted[n],
            theta_discounted,
            theta,
            martingale_increments,
        })
    }
}

/// Realized surplus along the path `sc`, with `v` the valuation policy values.
pub fn path_surplus(
    sc: &Scenario,
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    v: &Curve,
    h: f64,
) -> Result<PathResult> {
    if let Some(d) = sc.death_time {
        if !(d > 0.0 && d <= exp.term()) {
            return Err(domain(format!("death time {d} outside (0, {}]", exp.term())));
        }
    }
    Engine::new(val, exp, Some(v), h)?.path(sc)
}

/// Path summary: surplus is `alive_value[i]` at nodes `i < alive`, and
/// `after_death` from then on.
struct PathSummary {
    alive: usize,
    after_death: f64,
    residual: f64,
    nested: Vec<Option<f64>>,
}

/// Runs `n_paths` lives under the experience basis.
pub fn monte_carlo(
    val: &ActuarialBasis,
    exp: &ActuarialBasis,
    n_paths: usize,
    seed: u64,
    checkpoints: &[f64],
    intervals: &[(f64, f64)],
    h: f64,
) -> Result<MCReport> {
    if n_paths < 2 {
        return Err(domain(format!("need at least two paths, got {n_paths}")));
    }
    let engine = Engine::new(val, exp, None, h)?;
    let mesh = engine.mesh;
    let n = mesh.steps();
    let checkpoint_nodes: Vec<usize> = checkpoints
        .iter()
        .map(|&t| mesh.node_index(t))
        .collect::<Result<_>>()?;
    let interval_nodes = interval_indices(&mesh, intervals)?;

    let paths: Vec<PathSummary> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| -> Result<PathSummary> {
            let mut rng = ChaCha8Rng::seed_from_u64(path_seed(seed, p));
            let death = engine.sampler_exp.draw(&mut rng);
            let alive = engine.nodes_alive(death);
            let after_death = match death {
                Some(d) => engine.after_death(d)?,
                None => 0.0,
            };
            let residual = engine.martingale_to(death, mesh.term())?;
            let nested = checkpoint_nodes
                .iter()
                .map(|&c| {
                    let e = exponential(&mut rng);
                    if c < alive {
                        engine.nested_outgo(mesh.node_time(c), e).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_>>()?;
            Ok(PathSummary {
                alive,
                after_death,
                residual,
                nested,
            })
        })
        .collect::<Result<_>>()?;

    // fixed-order reductions from here on
    let mut dead_sum = vec![0.0; n + 2];
    let mut dead_sq = vec![0.0; n + 2];
    let mut dead_count = vec![0usize; n + 2];
    for p in &paths {
        dead_sum[p.alive] += p.after_death;
        dead_sq[p.alive] += p.after_death * p.after_death;
        dead_count[p.alive] += 1;
    }
    let survivors = dead_count[n + 1];
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0usize);
    let mut mean = Vec::with_capacity(n + 1);
    let mut std_error = Vec::with_capacity(n + 1);
    for i in 0..=n {
        sum += dead_sum[i];
        sq += dead_sq[i];
        count += dead_count[i];
        let a = engine.alive_value[i];
        let living = (n_paths - count) as f64;
        let est = Estimate::from_sums(n_paths, living * a + sum, living * a * a + sq);
        mean.push(est.mean);
        std_error.push(est.std_error);
    }

    let checkpoints = checkpoint_nodes
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let outgo: Vec<f64> = paths.iter().filter_map(|p| p.nested[k]).collect();
            CheckpointEstimate {
                t: mesh.node_time(c),
                alive: outgo.len(),
                policy_value: engine.reserve[c],
                estimate: (!outgo.is_empty()).then(|| Estimate::from_samples(&outgo)),
            }
        })
        .collect();

    let increment = |p: &PathSummary, (a, b): (usize, usize)| {
        let at = |i: usize| if i < p.alive { engine.alive_value[i] } else { p.after_death };
        at(b) - at(a)
    };
    let mut covariances = Vec::new();
    for x in 0..interval_nodes.len() {
        for y in x + 1..interval_nodes.len() {
            let xs: Vec<f64> = paths.iter().map(|p| increment(p, interval_nodes[x])).collect();
            let ys: Vec<f64> = paths.iter().map(|p| increment(p, interval_nodes[y])).collect();
            let (covariance, std_error) = covariance(&xs, &ys);
            covariances.push(IntervalCovariance {
                first: intervals[x],
                second: intervals[y],
                covariance,
                std_error,
            });
        }
    }

    let residuals: Vec<f64> = paths.iter().map(|p| p.residual).collect();
    Ok(MCReport {
        n_paths,
        seed,
        times: (0..=n).map(|i| mesh.node_time(i)).collect(),
        mean,
        std_error,
        survivors,
        checkpoints,
        covariances,
        martingale_residual: Estimate::from_samples(&residuals),
    })
}

fn interval_indices(mesh: &Mesh, intervals: &[(f64, f64)]) -> Result<Vec<(usize, usize)>> {
    let idx: Vec<(usize, usize)> = intervals
        .iter()
        .map(|&(a, b)| Ok((mesh.node_index(a)?, mesh.node_index(b)?)))
        .collect::<Result<_>>()?;
    for (k, &(a, b)) in idx.iter().enumerate() {
        if a >= b {
            return Err(domain(format!("interval {:?} is empty or reversed", intervals[k])));
        }
        for &(c, d) in &idx[..k] {
            if a < d && c < b {
                return Err(domain(format!("interval {:?} overlaps another interval", intervals[k])));
            }
        }
    }
    Ok(idx)
}

/// Sample covariance and its standard error, from the spread of the centred
/// products.
fn covariance(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let est = Estimate::from_samples(&prods);
    (est.mean * n / (n - 1.0), est.std_error)
}
