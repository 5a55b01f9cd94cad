//! Gauss map, flat structures and the Weierstrass immersion on the branched
//! tori of the T (order-4 screw) and R (order-3 screw) families.
//!
//! On the open strip `0 < Im z < Im tau / 2` the Gauss map has no branch
//! points, so it is single valued there. We evaluate it through an analytic
//! logarithm of `sn(4Kz)` built from the product expansions of theta_1 and
//! theta_4, normalized so that `G((1 + tau) / 4) = 1`. That point is where
//! `rho sn(4Kz) = 1`, so this is the principal root at the hyperelliptic
//! point in the middle of the chord from `0` to `(1 + tau) / 2`.

use crate::elliptic::{complete_k_from_complement, EllipticModulus, Tau, POLE_GUARD};
use crate::error::{GyreError, Result};
use crate::quadrature::{Node, TanhSinh};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

const I: C = C::new(0.0, 1.0);
const ONE: C = C::new(1.0, 0.0);
const SNAP: f64 = 1e-12;
/// Relative agreement required between the two dual integrals defining psi.
pub const DUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    T,
    R,
}

impl Family {
    pub fn screw_order(self) -> usize {
        match self {
            Family::T => 4,
            Family::R => 3,
        }
    }

    /// `G^(1/e)` is `rho sn(4Kz)`.
    pub fn root_exponent(self) -> f64 {
        match self {
            Family::T => 0.5,
            Family::R => 2.0 / 3.0,
        }
    }

    pub fn torus_basis(self, tau: Tau) -> (C, C) {
        match self {
            Family::T => (ONE, tau.value()),
            Family::R => (C::new(0.5, 0.0), tau.value()),
        }
    }

    /// Period of `G` along the strip.
    pub fn strip_period(self) -> f64 {
        match self {
            Family::T => 2.0,
            Family::R => 1.5,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::T => "T",
            Family::R => "R",
        })
    }
}

impl FromStr for Family {
    type Err = GyreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" => Ok(Family::T),
            "R" | "r" => Ok(Family::R),
            _ => Err(GyreError::Config(format!("unknown family '{s}' (expected T or R)"))),
        }
    }
}

/// Which kind of singular point, if any, a path endpoint sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Regular,
    /// Zero of `sn(4Kz)`: `z` in `Z/2`.
    Zero,
    /// Pole of `sn(4Kz)`: `z` in `tau/2 + Z/2`.
    Pole,
}

/// Offset from a singular point, passed down so that the factor vanishing
/// there is formed without cancellation.
#[derive(Clone, Copy, Debug)]
enum Near {
    None,
    Zero(C),
    Pole(C),
}

#[derive(Clone, Copy, Debug)]
pub struct WeierstrassData {
    pub family: Family,
    pub tau: Tau,
    pub modulus: EllipticModulus,
    /// Lopez-Ros factor `m^(1/4)` with `arg m = 2 pi r + arg m~`.
    pub rho: C,
    /// Associate angle: `dh = exp(-i theta) dz`.
    pub theta: f64,
    log_mid: C,
}

impl WeierstrassData {
    pub fn new(family: Family, tau: Tau, theta: f64) -> Result<Self> {
        let modulus = EllipticModulus::new(tau)?;
        let mut data = WeierstrassData {
            family,
            tau,
            modulus,
            rho: modulus.m_pow(0.25),
            theta,
            log_mid: C::new(0.0, 0.0),
        };
        data.log_mid = data.log_w((1.0 + tau.value()) / 4.0, Near::None);
        Ok(data)
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        WeierstrassData { theta, ..*self }
    }

    pub fn reduced(&self) -> crate::elliptic::ReducedTau {
        self.modulus.reduced
    }

    /// `exp(-i theta)`.
    pub fn dh(&self) -> C {
        C::from_polar(1.0, -self.theta)
    }

    /// `rho sn(4Kz)` by direct theta quotients.
    pub fn w(&self, z: C) -> Result<C> {
        Ok(self.rho * self.modulus.scd_lattice(z)?.0)
    }

    /// Logarithm of `sn(4Kz)` up to an additive constant, analytic on the
    /// closed strip minus the branch points.
    fn log_w(&self, z: C, near: Near) -> C {
        let q = self.modulus.q;
        let e = (4.0 * PI * I * z).exp();
        let einv = 1.0 / e;
        let one_minus_e = match near {
            Near::Zero(off) => -expm1(4.0 * PI * I * off),
            _ => ONE - e,
        };
        let mut l = -2.0 * PI * I * z + one_minus_e.ln();
        let q2 = q * q;
        let (mut qodd, mut qeven) = (q, q2);
        for n in 1..100_000 {
            let a = qeven * e;
            let b = qeven * einv;
            let c = qodd * e;
            let d = qodd * einv;
            let one_minus_d = match near {
                Near::Pole(off) if n == 1 => -expm1(-4.0 * PI * I * off),
                _ => ONE - d,
            };
            l += (ONE - a).ln() + (ONE - b).ln() - (ONE - c).ln() - one_minus_d.ln();
            if b.norm().max(d.norm()).max(c.norm()) < 1e-17 && n > 1 {
                break;
            }
            qodd *= q2;
            qeven *= q2;
        }
        l
    }

    fn log_g(&self, z: C, near: Near) -> C {
        self.family.root_exponent() * (self.log_w(z, near) - self.log_mid)
    }

    /// Gauss map on the closed strip `0 <= Im z <= Im tau / 2`.
    pub fn gauss(&self, z: C) -> Result<C> {
        let (s, kind) = self.classify(z);
        let near = match kind {
            PointKind::Regular => Near::None,
            PointKind::Zero => Near::Zero(z - s),
            PointKind::Pole => Near::Pole(z - s),
        };
        if kind != PointKind::Regular && (z - s).norm() < POLE_GUARD {
            return Err(GyreError::SingularInterior(z));
        }
        self.check_in_strip(z)?;
        Ok(self.log_g(z, near).exp())
    }

    fn check_in_strip(&self, z: C) -> Result<()> {
        let h = self.tau.im() / 2.0;
        if z.im < -SNAP * h || z.im > h * (1.0 + SNAP) {
            return Err(GyreError::Config(format!(
                "z = {z} lies outside the strip 0 <= Im z <= {h}"
            )));
        }
        Ok(())
    }

    /// Nearest branch point on the strip boundary and whether `z` is close
    /// enough to it for the singular factor to matter.
    fn classify(&self, z: C) -> (C, PointKind) {
        let tau = self.tau.value();
        let h = tau.im / 2.0;
        if z.im < 0.25 * h {
            let s = C::new((2.0 * z.re).round() / 2.0, 0.0);
            if (z - s).norm() < 0.25 * h.min(0.25) {
                return (s, PointKind::Zero);
            }
        } else if z.im > 0.75 * h {
            let base = tau / 2.0;
            let s = base + (2.0 * (z.re - base.re)).round() / 2.0;
            if (z - s).norm() < 0.25 * h.min(0.25) {
                return (s, PointKind::Pole);
            }
        }
        (z, PointKind::Regular)
    }

    /// Snaps `z` onto an exact branch point when it is one.
    fn endpoint(&self, z: C) -> (C, PointKind) {
        let (s, kind) = self.classify(z);
        if kind != PointKind::Regular && (z - s).norm() <= SNAP * (1.0 + z.norm()) {
            (s, kind)
        } else {
            (z, PointKind::Regular)
        }
    }

    /// `(int G dz, int dz / G)` along the straight segment `a -> b` inside
    /// the closed strip. Endpoints may be branch points; branch points in the
    /// interior of a boundary segment are split off automatically.
    pub fn segment_integrals(&self, a: C, b: C, quad: &TanhSinh) -> Result<(C, C)> {
        self.check_in_strip(a)?;
        self.check_in_strip(b)?;
        let mut cuts = vec![a];
        cuts.extend(self.boundary_branch_points_between(a, b));
        cuts.push(b);
        let mut total = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        for pair in cuts.windows(2) {
            let (g, ginv) = self.plain_segment(pair[0], pair[1], quad)?;
            total.0 += g;
            total.1 += ginv;
        }
        Ok(total)
    }

    fn boundary_branch_points_between(&self, a: C, b: C) -> Vec<C> {
        let h = self.tau.im() / 2.0;
        let tol = SNAP * (1.0 + h);
        let mut out = Vec::new();
        let base = if a.im.abs() < tol && b.im.abs() < tol {
            C::new(0.0, 0.0)
        } else if (a.im - h).abs() < tol && (b.im - h).abs() < tol {
            self.tau.value() / 2.0
        } else {
            return out;
        };
        let (lo, hi) = (a.re.min(b.re), a.re.max(b.re));
        let mut k = (2.0 * (lo - base.re)).ceil() as i64;
        while base.re + k as f64 / 2.0 < hi {
            let s = base + k as f64 / 2.0;
            if (s.re - lo).abs() > tol && (s.re - hi).abs() > tol {
                out.push(s);
            }
            k += 1;
        }
        if b.re < a.re {
            out.reverse();
        }
        out
    }

    fn plain_segment(&self, a: C, b: C, quad: &TanhSinh) -> Result<(C, C)> {
        let (a, ka) = self.endpoint(a);
        let (b, kb) = self.endpoint(b);
        let half = 0.5 * (b - a);
        let hint = |kind: PointKind, off: C| match kind {
            PointKind::Regular => Near::None,
            PointKind::Zero => Near::Zero(off),
            PointKind::Pole => Near::Pole(off),
        };
        let r = quad.integrate_many(|nd: &Node| {
            let (z, near) = if nd.x < 0.0 {
                let off = half * nd.from_left;
                (a + off, hint(ka, off))
            } else {
                let off = -half * nd.from_right;
                (b + off, hint(kb, off))
            };
            let lg = self.log_g(z, near);
            [lg.exp() * half, (-lg).exp() * half]
        })?;
        Ok((r.value[0], r.value[1]))
    }

    /// `int dh G` and `int dh / G` along the segment.
    pub fn flat_increments(&self, a: C, b: C, quad: &TanhSinh) -> Result<(C, C)> {
        let (g, ginv) = self.segment_integrals(a, b, quad)?;
        Ok((self.dh() * g, self.dh() * ginv))
    }

    /// Spatial displacement `Re int (1/2 (1/G - G), i/2 (1/G + G), 1) dh`.
    pub fn displacement(&self, a: C, b: C, quad: &TanhSinh) -> Result<[f64; 3]> {
        let (phi1, phi2) = self.flat_increments(a, b, quad)?;
        let horiz = 0.5 * (phi2.conj() - phi1);
        Ok([horiz.re, horiz.im, (self.dh() * (b - a)).re])
    }
}

/// `exp(z) - 1` without cancellation for small `z`.
fn expm1(z: C) -> C {
    let (s, c) = (z.im.sin(), z.im.cos());
    let half = (0.5 * z.im).sin();
    C::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

/// Continues `G` along a polyline by tracking the root of `rho sn(4Kz)`,
/// seeded with the principal root at the first sample. Each step is refined
/// until the argument of `rho sn` changes by less than pi/4.
pub fn gauss_map_along(path: &[C], data: &WeierstrassData) -> Result<Vec<C>> {
    let Some(&first) = path.first() else {
        return Ok(Vec::new());
    };
    for &z in path {
        guard_branch_points(data, z)?;
    }
    let e = data.family.root_exponent();
    let w0 = data.w(first)?;
    let mut g = w0.powf(e);
    let mut w = w0;
    let mut out = vec![g];
    for pair in path.windows(2) {
        let (ng, nw) = continue_root(data, pair[0], w, g, pair[1], e, 0)?;
        g = ng;
        w = nw;
        out.push(g);
    }
    Ok(out)
}

fn continue_root(
    data: &WeierstrassData,
    za: C,
    wa: C,
    ga: C,
    zb: C,
    e: f64,
    depth: u32,
) -> Result<(C, C)> {
    let wb = data.w(zb)?;
    let ratio = wb / wa;
    if ratio.arg().abs() < FRAC_PI_4 && ratio.norm().ln().abs() < 1.0 {
        return Ok((ga * ratio.powf(e), wb));
    }
    if depth > 48 {
        return Err(GyreError::ContinuationAmbiguity(zb));
    }
    let zm = 0.5 * (za + zb);
    guard_branch_points(data, zm)?;
    let (gm, wm) = continue_root(data, za, wa, ga, zm, e, depth + 1)?;
    continue_root(data, zm, wm, gm, zb, e, depth + 1)
}

fn guard_branch_points(data: &WeierstrassData, z: C) -> Result<()> {
    let tau = data.tau.value();
    let nt = (z.im / tau.im).round();
    let z = z - nt * tau;
    for base in [C::new(0.0, 0.0), tau / 2.0, tau, -tau / 2.0] {
        let d = z - base;
        let d = d - (2.0 * d.re).round() / 2.0;
        if d.norm() < POLE_GUARD {
            return Err(GyreError::SingularInterior(z));
        }
    }
    Ok(())
}

/// Both dual integrals over the chord `0 -> (1 + tau) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct PsiReport {
    /// `int G dz`.
    pub psi: C,
    /// `int dz / G`.
    pub dual: C,
}

impl PsiReport {
    pub fn relative_gap(&self) -> f64 {
        (self.psi - self.dual).norm() / self.psi.norm()
    }
}

/// Computes `psi` and its dual with the default quadrature.
pub fn psi_report(data: &WeierstrassData) -> Result<PsiReport> {
    psi_report_with(data, &TanhSinh::default())
}

pub fn psi_report_with(data: &WeierstrassData, quad: &TanhSinh) -> Result<PsiReport> {
    let tau = data.tau.value();
    let end = 0.5 * (1.0 + tau);
    let mid = 0.5 * end;
    check_chord(data)?;
    let (g1, d1) = data.segment_integrals(C::new(0.0, 0.0), mid, quad)?;
    let (g2, d2) = data.segment_integrals(mid, end, quad)?;
    Ok(PsiReport {
        psi: g1 + g2,
        dual: d1 + d2,
    })
}

/// Verifies by sampling that the chord stays off every branch point. The
/// chord runs through the open strip, so this only trips on bad input.
fn check_chord(data: &WeierstrassData) -> Result<()> {
    let end = 0.5 * (1.0 + data.tau.value());
    for j in 1..64 {
        let z = end * (j as f64 / 64.0);
        guard_branch_points(data, z)?;
        if !data.log_g(z, Near::None).is_finite() {
            return Err(GyreError::SingularInterior(z));
        }
    }
    Ok(())
}

/// `psi(tau) = int_0^((1+tau)/2) G dz`, checked against `int dz / G`.
pub fn psi(data: &WeierstrassData) -> Result<C> {
    let rep = psi_report(data)?;
    let gap = rep.relative_gap();
    if gap > DUAL_TOL {
        return Err(GyreError::DualMismatch(gap));
    }
    Ok(rep.psi)
}

/// `theta_h = arg psi`.
pub fn theta_h(tau: Tau, family: Family) -> Result<f64> {
    Ok(psi(&WeierstrassData::new(family, tau, 0.0)?)?.arg())
}

/// Inner and outer edge integrals of the lower annulus in closed form,
/// `int_0^(1/2) G~` and `int_(tau~/2)^((1+tau~)/2) G~`, without the
/// `exp(r pi i / 4)` factor.
pub(crate) fn closed_form_edges_raw(tau: Tau) -> Result<(C, C)> {
    let em = EllipticModulus::new(tau)?;
    let s = em.m_tilde_pow(0.5);
    let a = em.m_tilde_pow(0.25);
    // 1 - m~^(1/4) without cancellation when m~ is close to 1
    let one_minus_a = if em.m_complement.norm() < 0.25 {
        em.m_complement / ((1.0 + a) * (1.0 + s))
    } else {
        1.0 - a
    };
    let mu = (1.0 + a) * (1.0 + a) / (2.0 + 2.0 * s);
    let mu_c = one_minus_a * one_minus_a / (2.0 + 2.0 * s);
    let k_m = complete_k_from_complement(em.m_complement)?;
    let x = em.m_tilde_pow(-0.125) / (2.0 * SQRT_2 * (1.0 + s).sqrt() * k_m);
    let k = complete_k_from_complement(mu_c)?;
    let kp = complete_k_from_complement(mu)?;
    Ok((x * (k - kp), x * (k + kp)))
}

/// Closed form of `psi` for the T family.
///
/// With inner and outer edges `I`, `O` as above, the chord integral is
/// `exp(r pi i / 4) ((1 - i) I + (1 + i) O) / 2 + O E_r)`, where
/// `E_r = sum_(k=1)^r (-i)^k` counts the outer edges crossed when the chord
/// endpoint moves from `(1 + tau~) / 2` to `(1 + tau) / 2`. For `r = 1` this
/// is `exp(pi i / 4) (1 - i) X K(mu)`.
pub fn psi_closed_form_t(tau: Tau) -> Result<C> {
    let (inner, outer) = closed_form_edges_raw(tau)?;
    let r = tau.reduced().r;
    let j0 = 0.5 * ((ONE - I) * inner + (ONE + I) * outer);
    Ok(C::from_polar(1.0, r as f64 * FRAC_PI_4) * (j0 + outer * edge_walk(r)))
}

/// `sum_(k=1)^r (-i)^k` for `r >= 0`, `-sum_(k=r+1)^0 (-i)^k` for `r < 0`.
fn edge_walk(r: i64) -> C {
    let pow = |k: i64| (-I).powi(k.rem_euclid(4) as i32);
    if r >= 0 {
        (1..=r).map(pow).sum()
    } else {
        -((r + 1)..=0).map(pow).sum::<C>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapTag {
    Phi1,
    Phi2,
}

/// Image of a boundary line of the lower annulus.
#[derive(Clone, Debug)]
pub struct FlatPolyline {
    /// Images of the branch points, first and last included.
    pub vertices: Vec<C>,
    /// Dense samples, vertices included.
    pub samples: Vec<C>,
    pub map_tag: MapTag,
}

/// Images of both boundary lines of the lower annulus over one strip period.
#[derive(Clone, Debug)]
pub struct FlatStructure {
    /// Image of `Im z = 0+`, starting at the image of `0` (the origin).
    pub inner: FlatPolyline,
    /// Image of `Im z = Im tau / 2 - 0`, starting at the image of `tau / 2`.
    pub outer: FlatPolyline,
}

pub fn flat_structure(
    data: &WeierstrassData,
    map_tag: MapTag,
    n_samples: usize,
) -> Result<FlatStructure> {
    let quad = TanhSinh::default();
    let pick = |a: C, b: C| -> Result<C> {
        let (p1, p2) = data.flat_increments(a, b, &quad)?;
        Ok(match map_tag {
            MapTag::Phi1 => p1,
            MapTag::Phi2 => p2,
        })
    };
    let edges = (2.0 * data.family.strip_period()).round() as usize;
    let per_edge = n_samples.max(edges) / edges;
    let line = |base: C, start: C| -> Result<FlatPolyline> {
        let mut vertices = vec![start];
        let mut samples = vec![start];
        let mut cur = start;
        for e in 0..edges {
            let z0 = base + e as f64 / 2.0;
            let mut prev = z0;
            for j in 1..=per_edge {
                let z = z0 + 0.5 * j as f64 / per_edge as f64;
                cur += pick(prev, z)?;
                samples.push(cur);
                prev = z;
            }
            vertices.push(cur);
        }
        Ok(FlatPolyline {
            vertices,
            samples,
            map_tag,
        })
    };
    let top = data.tau.value() / 2.0;
    let inner = line(C::new(0.0, 0.0), C::new(0.0, 0.0))?;
    let outer = line(top, pick(C::new(0.0, 0.0), top)?)?;
    Ok(FlatStructure { inner, outer })
}

/// Axis-aligned parameter rectangle sampled at `nu x nv` points.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Grid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn point(&self, j: usize, k: usize) -> C {
        let fr = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        C::new(
            self.re_min + (self.re_max - self.re_min) * fr(j, self.nu),
            self.im_min + (self.im_max - self.im_min) * fr(k, self.nv),
        )
    }
}

/// Base point of the immersion: a hyperelliptic point on the lower boundary.
pub const BASE_POINT: C = C::new(0.25, 0.0);

/// Immersion at an arbitrary point of the closed strip, integrated along the
/// straight segment from the base point.
pub fn immersion_at(data: &WeierstrassData, z: C, quad: &TanhSinh) -> Result<[f64; 3]> {
    data.displacement(BASE_POINT, z, quad)
}

/// The Weierstrass immersion on a grid, row-major with `k` (imaginary part)
/// as the slow index. Points are reached from the base point `1/4` along the
/// first column and then along each row.
pub fn immersion(grid: &Grid, data: &WeierstrassData) -> Result<Vec<[f64; 3]>> {
    let quad = TanhSinh::default();
    let mut out = vec![[0.0; 3]; grid.nu * grid.nv];
    let mut col = immersion_at(data, grid.point(0, 0), &quad)?;
    for k in 0..grid.nv {
        if k > 0 {
            col = add(col, data.displacement(grid.point(0, k - 1), grid.point(0, k), &quad)?);
        }
        let mut x = col;
        out[k * grid.nu] = x;
        for j in 1..grid.nu {
            x = add(x, data.displacement(grid.point(j - 1, k), grid.point(j, k), &quad)?);
            out[k * grid.nu + j] = x;
        }
    }
    Ok(out)
}

pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn tau(re: f64, im: f64) -> Tau {
        Tau::from_parts(re, im).unwrap()
    }

    #[test]
    fn lopez_ros_factor_normalizes_the_midpoint() {
        for &(re, im) in &[(0.0, 1.0), (0.3, 0.7), (-0.8, 0.9), (0.9, 0.4), (0.5, 0.8), (-1.0, 1.2), (1.7, 0.6)] {
            let d = WeierstrassData::new(Family::T, tau(re, im), 0.0).unwrap();
            let w = d.w((1.0 + d.tau.value()) / 4.0).unwrap();
            assert!((w - 1.0).norm() < 1e-12, "tau = {re}+{im}i: {w}");
        }
    }

    #[test]
    fn analytic_branch_squares_to_rho_sn() {
        let d = WeierstrassData::new(Family::T, tau(0.3, 0.8), 0.0).unwrap();
        for z in [C::new(0.1, 0.05), C::new(0.7, 0.3), C::new(-0.4, 0.39), C::new(1.3, 0.01)] {
            let g = d.gauss(z).unwrap();
            assert!((g * g - d.w(z).unwrap()).norm() < 1e-12 * g.norm_sqr().max(1.0));
        }
        let d = WeierstrassData::new(Family::R, tau(-0.4, 0.9), 0.0).unwrap();
        let z = C::new(0.2, 0.3);
        let g = d.gauss(z).unwrap();
        let w = d.w(z).unwrap();
        assert!((g.powi(3) - w * w).norm() < 1e-12 * w.norm_sqr());
    }

    #[test]
    fn continuation_agrees_with_the_analytic_branch() {
        let d = WeierstrassData::new(Family::T, tau(-0.2, 0.7), 0.0).unwrap();
        let mid = (1.0 + d.tau.value()) / 4.0;
        let path = [mid, C::new(0.9, 0.1), C::new(1.6, 0.3), C::new(-0.7, 0.2)];
        let g = gauss_map_along(&path, &d).unwrap();
        for (z, gz) in path.iter().zip(&g) {
            assert!((d.gauss(*z).unwrap() - gz).norm() < 1e-10);
        }
        // quasi-periodicity along the strip: G(z + 1/2) = -i G(z)
        let z = C::new(0.3, 0.2);
        assert!((d.gauss(z + 0.5).unwrap() + I * d.gauss(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn constant_path_at_hyperelliptic_point() {
        let d = WeierstrassData::new(Family::T, tau(0.1, 1.1), 0.0).unwrap();
        let g = gauss_map_along(&[C::new(0.25, 0.0)], &d).unwrap();
        let sn_k = d.modulus.sn(d.modulus.k).unwrap();
        assert!((g[0] - (d.rho * sn_k).sqrt()).norm() < 1e-14);
    }

    fn loop_around(center: C, radius: f64, n: usize) -> Vec<C> {
        (0..=n)
            .map(|j| center + C::from_polar(radius, 2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    #[test]
    fn monodromy_around_branch_points() {
        let t = tau(0.2, 0.9);
        let d = WeierstrassData::new(Family::T, t, 0.0).unwrap();
        let g = gauss_map_along(&loop_around(C::new(0.5, 0.0), 0.1, 16), &d).unwrap();
        assert!((g[16] + g[0]).norm() < 1e-12);
        let d = WeierstrassData::new(Family::R, t, 0.0).unwrap();
        let g = gauss_map_along(&loop_around(t.value() / 2.0, 0.1, 16), &d).unwrap();
        // counterclockwise around a double pole of G^3
        let turn = C::from_polar(1.0, -4.0 * PI / 3.0);
        assert!((g[16] - turn * g[0]).norm() < 1e-12 * g[0].norm());
    }

    #[test]
    fn dual_integrals_agree() {
        for &(re, im) in &[(0.0, 1.0), (-0.6, 0.9), (0.7, 0.5), (0.95, 0.2), (0.2, 4.0)] {
            for fam in [Family::T, Family::R] {
                let d = WeierstrassData::new(fam, tau(re, im), 0.0).unwrap();
                let rep = psi_report(&d).unwrap();
                assert!(rep.relative_gap() < 1e-10, "{fam} {re}+{im}i: {}", rep.relative_gap());
            }
        }
    }

    #[test]
    fn boundary_calibration() {
        for im in [0.7, 1.5] {
            assert!((theta_h(tau(-1.0, im), Family::T).unwrap() - FRAC_PI_2).abs() < 1e-9);
            assert!(theta_h(tau(1.0, im), Family::T).unwrap().abs() < 1e-9);
            assert!((theta_h(tau(-1.0, im), Family::R).unwrap() - FRAC_PI_2).abs() < 1e-9);
            assert!(theta_h(tau(0.5, im), Family::R).unwrap().abs() < 1e-9);
        }
        // CLP circle: theta_h = arg tau - pi/2 at -1/2 + i/2
        let t = tau(-0.5, 0.5);
        assert!((theta_h(t, Family::T).unwrap() - FRAC_PI_4).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(re, im) in &[(1.0, 1.3), (-1.0, 1.3), (0.0, 1.0), (0.3, 0.7), (-0.7, 0.6), (0.6, 0.55)] {
            let t = tau(re, im);
            let num = psi(&WeierstrassData::new(Family::T, t, 0.0).unwrap()).unwrap();
            let cf = psi_closed_form_t(t).unwrap();
            assert!((num - cf).norm() < 1e-9 * num.norm(), "{t}: {num} vs {cf}");
        }
    }

    #[test]
    fn edge_walk_values() {
        assert_eq!(edge_walk(0), C::new(0.0, 0.0));
        assert_eq!(edge_walk(1), -I);
        assert_eq!(edge_walk(2), C::new(-1.0, -1.0));
        assert_eq!(edge_walk(-1), -ONE);
        assert_eq!(edge_walk(4), C::new(0.0, 0.0));
    }

    #[test]
    fn boundary_segments_split_at_branch_points() {
        let d = WeierstrassData::new(Family::T, tau(0.1, 0.8), 0.0).unwrap();
        let q = TanhSinh::default();
        let (whole, _) = d.segment_integrals(C::new(0.1, 0.0), C::new(1.3, 0.0), &q).unwrap();
        let mut parts = C::new(0.0, 0.0);
        for (a, b) in [(0.1, 0.5), (0.5, 1.0), (1.0, 1.3)] {
            parts += d.segment_integrals(C::new(a, 0.0), C::new(b, 0.0), &q).unwrap().0;
        }
        assert!((whole - parts).norm() < 1e-12);
    }

    #[test]
    fn flat_structure_closes_with_right_angles() {
        let d = WeierstrassData::new(Family::T, tau(0.3, 0.2), FRAC_PI_2).unwrap();
        let fs = flat_structure(&d, MapTag::Phi1, 40).unwrap();
        for line in [&fs.inner, &fs.outer] {
            let v = &line.vertices;
            assert_eq!(v.len(), 5);
            assert!((v[4] - v[0]).norm() < 1e-9);
            for e in 0..3 {
                let a = v[e + 1] - v[e];
                let b = v[e + 2] - v[e + 1];
                assert!(((b / a).norm() - 1.0).abs() < 1e-9);
                assert!(((b / a).arg().abs() - FRAC_PI_2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn height_is_exact() {
        let d = WeierstrassData::new(Family::T, tau(-0.3, 0.9), FRAC_PI_2).unwrap();
        let grid = Grid {
            re_min: 0.05,
            re_max: 1.0,
            im_min: 0.0,
            im_max: 0.45,
            nu: 5,
            nv: 4,
        };
        let x = immersion(&grid, &d).unwrap();
        for k in 0..grid.nv {
            for j in 0..grid.nu {
                let p = x[k * grid.nu + j];
                assert!((p[2] - grid.point(j, k).im).abs() < 1e-12);
            }
        }
    }
}
