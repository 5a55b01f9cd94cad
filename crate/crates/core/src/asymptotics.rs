//! Real-line integral forms of the two edge vectors of the T flat structure
//! and the limiting behaviour of `theta_h`, used as independent checks on the
//! contour integrals in [`crate::weierstrass`].

use crate::elliptic::{complete_k_from_complement, EllipticModulus, Tau};
use crate::error::{GyreError, Result};
use crate::period::wrap;
use crate::quadrature::{Node, TanhSinh};
use crate::weierstrass::{closed_form_edges_raw, theta_h, Family};
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    TauInf,
    TauToOne,
}

#[derive(Clone, Copy, Debug)]
pub struct AsymptoteReport {
    pub tau: Tau,
    pub theta_h_numeric: f64,
    pub theta_h_asymptote: f64,
    /// Wrapped distance between the two angles.
    pub deviation: f64,
    pub regime: Regime,
}

/// `m^(1/8) / (4 K~)`, the common scale of both edge vectors.
fn scale(em: &EllipticModulus) -> Result<C> {
    Ok(em.m_pow(0.125) / (4.0 * complete_k_from_complement(em.m_complement)?))
}

fn finite(v: C, tau: Tau) -> Result<C> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(GyreError::BranchCut(tau.value()))
    }
}

/// Inner edge vector `int_0^(1/2) G dz` as the real integral
/// `2 m^(1/8) / (4 K~) int_0^1 zeta^(1/2) / sqrt((1 - zeta^2)(1 - m~ zeta^2))`.
pub fn psi1(tau: Tau) -> Result<C> {
    let em = EllipticModulus::new(tau)?;
    let (m, mc) = (em.m_tilde_pow(1.0), em.m_complement);
    let quad = TanhSinh::default();
    let r = quad.integrate(|nd: &Node| {
        let zeta = 0.5 * nd.from_left;
        let one_minus = 0.5 * nd.from_right;
        let one_minus_sq = one_minus * (1.0 + zeta);
        // 1 - m~ zeta^2 = (1 - zeta^2) + (1 - m~) zeta^2, exact as m~ -> 1
        let inner = if mc.norm() < 0.25 {
            one_minus_sq + mc * zeta * zeta
        } else {
            1.0 - m * zeta * zeta
        };
        0.5 * zeta.sqrt() / (one_minus_sq.sqrt() * inner.sqrt())
    })?;
    finite(2.0 * scale(&em)? * r.value, tau)
}

/// Edge vector `int_0^(tau~/2) G dz` from an inner vertex to the nearest
/// outer vertex, as
/// `exp(3 pi i / 4) m^(1/8) / (4 K~) int_0^inf xi^(1/2) / sqrt((1 + xi^2)(1 + m~ xi^2))`.
pub fn psi2(tau: Tau) -> Result<C> {
    let em = EllipticModulus::new(tau)?;
    let m = em.m_tilde_pow(1.0);
    let quad = TanhSinh::default();
    // xi = u / (1 - u) turns the integrand into
    // sqrt(u / v) / sqrt((u^2 + v^2)(v^2 + m~ u^2)) with v = 1 - u.
    let r = quad.integrate(|nd: &Node| {
        let u = 0.5 * nd.from_left;
        let v = 0.5 * nd.from_right;
        let a = (u * u + v * v).sqrt();
        let b = (C::new(v * v, 0.0) + m * u * u).sqrt();
        0.5 * (u / v).sqrt() / (a * b)
    })?;
    finite(C::from_polar(1.0, 3.0 * FRAC_PI_4) * scale(&em)? * r.value, tau)
}

/// Limit of `theta_h` as `Im tau -> inf`: `Re(1 - tau) pi / 4` for T and
/// `Re(1/2 - tau) pi / 3` for R.
pub fn theta_h_asymptote(tau: Tau, family: Family) -> f64 {
    match family {
        Family::T => (1.0 - tau.re()) * FRAC_PI_4,
        Family::R => (0.5 - tau.re()) * FRAC_PI_3,
    }
}

/// Compares `theta_h` with its limit. Towards `tau = 1` the limit is 0.
pub fn asymptote_report(tau: Tau, family: Family, regime: Regime) -> Result<AsymptoteReport> {
    let numeric = theta_h(tau, family)?;
    let limit = match regime {
        Regime::TauInf => theta_h_asymptote(tau, family),
        Regime::TauToOne => 0.0,
    };
    Ok(AsymptoteReport {
        tau,
        theta_h_numeric: numeric,
        theta_h_asymptote: limit,
        deviation: wrap(numeric - limit).abs(),
        regime,
    })
}

/// Point `1 + eps exp(3 pi i / 4)` on the diagonal approach to `tau = 1`.
pub fn diagonal_approach(eps: f64) -> Result<Tau> {
    Tau::new(1.0 + C::from_polar(eps, 0.75 * PI))
}

/// Inner and outer edge vectors of the T flat structure in terms of complete
/// elliptic integrals of the auxiliary parameter
/// `mu = (1 + m~^(1/4))^2 / (2 + 2 m~^(1/2))`:
/// `X (K(mu) - K'(mu))` and `X (K(mu) + K'(mu))`, rotated by `exp(r pi i / 4)`.
pub fn closed_form_edges_t(tau: Tau) -> Result<(C, C)> {
    let (inner, outer) = closed_form_edges_raw(tau)?;
    let rot = C::from_polar(1.0, tau.reduced().r as f64 * FRAC_PI_4);
    Ok((rot * inner, rot * outer))
}
