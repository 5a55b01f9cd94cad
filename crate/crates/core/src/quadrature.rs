//! Tanh-sinh quadrature on [-1, 1] for integrands with algebraic endpoint
//! singularities.
//!
//! Nodes are `x = tanh(pi/2 sinh s)`. The integrand receives the node together
//! with `1 + x` and `1 - x` computed without cancellation, so it can evaluate
//! itself accurately right next to a singular endpoint.

use crate::error::{GyreError, Result};
use num_complex::Complex64 as C;
use std::f64::consts::FRAC_PI_2;

/// Half-width of the truncated `s` range. At `s = 4.5` the node complement is
/// about 1e-61, far below where `(1-x)^(-2/3)` contributions matter.
const S_MAX: f64 = 4.5;

#[derive(Clone, Copy, Debug)]
pub struct TanhSinh {
    /// Converged once successive levels differ by at most
    /// `max(abs_tol, rel_tol * |I|)`.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub min_level: u32,
    pub max_level: u32,
}

impl Default for TanhSinh {
    fn default() -> Self {
        TanhSinh {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            min_level: 3,
            max_level: 10,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub x: f64,
    /// `1 + x`
    pub from_left: f64,
    /// `1 - x`
    pub from_right: f64,
    pub weight: f64,
}

fn node(s: f64) -> Node {
    let y = FRAC_PI_2 * s.sinh();
    let e = (-2.0 * y.abs()).exp();
    let comp = 2.0 * e / (1.0 + e);
    let x = (1.0 - e) / (1.0 + e) * y.signum();
    let weight = FRAC_PI_2 * s.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    let (from_left, from_right) = if s >= 0.0 { (2.0 - comp, comp) } else { (comp, 2.0 - comp) };
    Node {
        x,
        from_left,
        from_right,
        weight,
    }
}

/// Nodes added at `level` (all nodes for level 0), step `2^-level / 2`.
fn level_nodes(level: u32) -> impl Iterator<Item = (f64, Node)> {
    let h = 0.5 / f64::from(1u32 << level);
    let n = (S_MAX / h).floor() as i64;
    (-n..=n)
        .filter(move |&k| level == 0 || k.rem_euclid(2) == 1)
        .map(move |k| (h, node(k as f64 * h)))
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    /// Difference between the last two levels.
    pub error: f64,
    pub evaluations: usize,
}

impl TanhSinh {
    /// Integrates `f` over [-1, 1]. `f` returns one or more values sharing the
    /// same nodes; convergence is required for every component.
    pub fn integrate_many<const N: usize, F>(&self, mut f: F) -> Result<QuadResult<[C; N]>>
    where
        F: FnMut(&Node) -> [C; N],
    {
        let mut sums = [C::new(0.0, 0.0); N];
        let mut prev: Option<[C; N]> = None;
        let mut evaluations = 0;
        let mut last_change = f64::INFINITY;
        for level in 0..=self.max_level {
            let mut h = 0.0;
            for (hl, nd) in level_nodes(level) {
                h = hl;
                if nd.weight == 0.0 {
                    continue;
                }
                let vals = f(&nd);
                evaluations += 1;
                for (s, v) in sums.iter_mut().zip(vals) {
                    *s += nd.weight * v;
                }
            }
            let est: [C; N] = std::array::from_fn(|i| sums[i] * h);
            if let Some(p) = prev {
                let mut ok = true;
                let mut worst = 0.0f64;
                for i in 0..N {
                    let d = (est[i] - p[i]).norm();
                    if !d.is_finite() {
                        return Err(GyreError::QuadratureNonconvergence(d));
                    }
                    worst = worst.max(d);
                    ok &= d <= self.abs_tol.max(self.rel_tol * est[i].norm());
                }
                last_change = worst;
                if ok && level >= self.min_level {
                    return Ok(QuadResult {
                        value: est,
                        error: worst,
                        evaluations,
                    });
                }
            }
            prev = Some(est);
        }
        Err(GyreError::QuadratureNonconvergence(last_change))
    }

    pub fn integrate<F>(&self, mut f: F) -> Result<QuadResult<C>>
    where
        F: FnMut(&Node) -> C,
    {
        let r = self.integrate_many(|nd| [f(nd)])?;
        Ok(QuadResult {
            value: r.value[0],
            error: r.error,
            evaluations: r.evaluations,
        })
    }

    /// Integrates a real function over [a, b].
    pub fn integrate_real<F>(&self, a: f64, b: f64, mut f: F) -> Result<QuadResult<f64>>
    where
        F: FnMut(f64) -> f64,
    {
        let half = 0.5 * (b - a);
        let r = self.integrate(|nd| {
            let x = if nd.x < 0.0 { a + half * nd.from_left } else { b - half * nd.from_right };
            C::new(f(x) * half, 0.0)
        })?;
        Ok(QuadResult {
            value: r.value.re,
            error: r.error,
            evaluations: r.evaluations,
        })
    }
}
