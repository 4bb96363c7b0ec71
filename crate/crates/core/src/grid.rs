//! Uniform time mesh over `[0, n]` and the fixed-step numerics that run on it.
//!
//! Curves are sampled on the *half grid* (nodes plus midpoints), which is
//! exactly what classical RK4 and per-panel Simpson both consume.

use crate::curves::RateCurve;
use crate::error::{domain, Error, Result};

const MESH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    term: f64,
    steps: usize,
}

impl Mesh {
    /// Mesh with step `h`; `term / h` must be an integer.
    pub fn new(term: f64, h: f64) -> Result<Mesh> {
        if !(term.is_finite() && term > 0.0) {
            return Err(domain(format!("term must be positive, got {term}")));
        }
        if !(h.is_finite() && h > 0.0 && h <= term) {
            return Err(domain(format!("mesh step must lie in (0, {term}], got {h}")));
        }
        let ratio = term / h;
        let steps = ratio.round();
        if (ratio - steps).abs() > MESH_EPS * ratio.max(1.0) {
            return Err(domain(format!("mesh step {h} does not divide term {term}")));
        }
        Ok(Mesh {
            term,
            steps: steps as usize,
        })
    }

    /// Mesh with `steps` equal intervals.
    pub fn with_steps(term: f64, steps: usize) -> Result<Mesh> {
        if !(term.is_finite() && term > 0.0) || steps == 0 {
            return Err(domain(format!("bad mesh: term {term}, {steps} steps")));
        }
        Ok(Mesh { term, steps })
    }

    pub fn term(&self) -> f64 {
        self.term
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        self.term / self.steps as f64
    }

    pub fn node_count(&self) -> usize {
        self.steps + 1
    }

    pub fn half_count(&self) -> usize {
        2 * self.steps + 1
    }

    pub fn node_time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.term
        } else {
            self.term * i as f64 / self.steps as f64
        }
    }

    pub fn half_time(&self, j: usize) -> f64 {
        if j == 2 * self.steps {
            self.term
        } else {
            self.term * j as f64 / (2 * self.steps) as f64
        }
    }

    /// Index of the node at time `t`; errors when `t` is off the mesh.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        if !(t.is_finite() && t >= -MESH_EPS && t <= self.term + MESH_EPS) {
            return Err(domain(format!("t = {t} outside [0, {}]", self.term)));
        }
        let x = t / self.step();
        let i = x.round();
        if (x - i).abs() > 1e-6 {
            return Err(domain(format!("t = {t} is not a mesh node (step {})", self.step())));
        }
        Ok(i as usize)
    }

    /// Index of the last node `<= t` (clamped to the mesh).
    pub fn floor_index(&self, t: f64) -> usize {
        let x = (t / self.step()).floor();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.steps)
        }
    }

    pub fn sample(&self, curve: &RateCurve) -> Result<Vec<f64>> {
        (0..self.half_count())
            .map(|j| curve.eval(self.half_time(j)))
            .collect()
    }
}

/// Linear interpolation of half-grid samples at `t` in `[0, n]`.
pub fn interp_half(mesh: &Mesh, f: &[f64], t: f64) -> f64 {
    interp(0.5 * mesh.step(), f, t)
}

/// Linear interpolation of node samples at `t` in `[0, n]`.
pub fn interp_nodes(mesh: &Mesh, f: &[f64], t: f64) -> f64 {
    interp(mesh.step(), f, t)
}

fn interp(dx: f64, f: &[f64], t: f64) -> f64 {
    let x = (t / dx).max(0.0);
    let j = (x.floor() as usize).min(f.len() - 2);
    let w = x - j as f64;
    f[j] + w * (f[j + 1] - f[j])
}

/// Running integral of half-grid samples, at every half-grid point.
///
/// Even points accumulate whole Simpson panels; midpoints add the
/// three-point single-interval rule `(h/12)(5 f0 + 8 f1 - f2)` with spacing `h/2`.
pub fn cumulative_half(mesh: &Mesh, f: &[f64]) -> Vec<f64> {
    debug_assert_eq!(f.len(), mesh.half_count());
    let h = mesh.step();
    let mut out = vec![0.0; f.len()];
    for i in 0..mesh.steps() {
        let (f0, f1, f2) = (f[2 * i], f[2 * i + 1], f[2 * i + 2]);
        let base = out[2 * i];
        out[2 * i + 1] = base + 0.5 * h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        out[2 * i + 2] = base + h / 6.0 * (f0 + 4.0 * f1 + f2);
    }
    out
}

/// Tail integrals `int_{t_i}^{n} f` at every node, by Simpson panels.
pub fn tail_nodes(mesh: &Mesh, f: &[f64]) -> Vec<f64> {
    debug_assert_eq!(f.len(), mesh.half_count());
    let h = mesh.step();
    let n = mesh.steps();
    let mut out = vec![0.0; n + 1];
    for i in (0..n).rev() {
        out[i] = out[i + 1] + h / 6.0 * (f[2 * i] + 4.0 * f[2 * i + 1] + f[2 * i + 2]);
    }
    out
}

/// Running integral of node-only samples.
///
/// Even nodes use composite Simpson; odd nodes add a single-interval
/// three-point correction to the preceding even node.
pub fn cumulative_nodes(h: f64, f: &[f64]) -> Vec<f64> {
    let len = f.len();
    let mut out = vec![0.0; len];
    if len < 2 {
        return out;
    }
    if len == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    for i in 1..len {
        out[i] = if i % 2 == 0 {
            out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i])
        } else if i + 1 < len {
            out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1])
        } else {
            out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
    }
    out
}

/// Classical RK4 for the linear ODE `g' = a(t) g + b(t)`, run backwards from
/// `g(n) = terminal` down to node `stop`. Returns values at nodes `stop..=n`.
pub fn rk4_backward(mesh: &Mesh, a: &[f64], b: &[f64], terminal: f64, stop: usize) -> Result<Vec<f64>> {
    let n = mesh.steps();
    let h = mesh.step();
    let f = |j: usize, y: f64| a[j] * y + b[j];
    let mut out = vec![0.0; n + 1 - stop];
    let mut g = terminal;
    out[n - stop] = g;
    for i in (stop + 1..=n).rev() {
        let k1 = f(2 * i, g);
        let k2 = f(2 * i - 1, g - 0.5 * h * k1);
        let k3 = f(2 * i - 1, g - 0.5 * h * k2);
        let k4 = f(2 * i - 2, g - h * k3);
        g -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !g.is_finite() {
            return Err(Error::NumericalInstability(format!(
                "backward Thiele solution diverged at t = {}",
                mesh.node_time(i - 1)
            )));
        }
        out[i - 1 - stop] = g;
    }
    Ok(out)
}

/// Classical RK4 for `g' = a(t) g + b(t)` forwards from `g(0) = initial`.
pub fn rk4_forward(mesh: &Mesh, a: &[f64], b: &[f64], initial: f64) -> Result<Vec<f64>> {
    let n = mesh.steps();
    let h = mesh.step();
    let f = |j: usize, y: f64| a[j] * y + b[j];
    let mut out = Vec::with_capacity(n + 1);
    let mut g = initial;
    out.push(g);
    for i in 0..n {
        let k1 = f(2 * i, g);
        let k2 = f(2 * i + 1, g + 0.5 * h * k1);
        let k3 = f(2 * i + 1, g + 0.5 * h * k2);
        let k4 = f(2 * i + 2, g + h * k3);
        g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !g.is_finite() {
            return Err(Error::NumericalInstability(format!(
                "forward Thiele solution diverged at t = {}",
                mesh.node_time(i + 1)
            )));
        }
        out.push(g);
    }
    Ok(out)
}
