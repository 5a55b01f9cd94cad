//! Theta series, modular lambda, complete elliptic integrals and Jacobi
//! functions of complex modulus.
//!
//! Everything is normalized by the lattice ratio `tau`: `sn(u; tau)` has
//! periods `4K` and `2iK' = 4K tau`, with `m = lambda(2 tau)`. Internally the
//! functions are evaluated in lattice units `z = u / 4K`, where the periods are
//! `1` and `tau`.

use crate::error::{GyreError, Result};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Theta series refuse nomes above this modulus (Im tau below about 0.005).
pub const MAX_NOME: f64 = 0.985;
/// Pole guard radius in lattice units.
pub const POLE_GUARD: f64 = 1e-8;
const SERIES_EPS: f64 = 1e-17;
const MAX_TERMS: usize = 100_000;

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tau(C);

impl Tau {
    pub fn new(value: C) -> Result<Self> {
        if value.re.is_finite() && value.im.is_finite() && value.im > 0.0 {
            Ok(Tau(value))
        } else {
            Err(GyreError::InvalidTau(value))
        }
    }

    pub fn from_parts(re: f64, im: f64) -> Result<Self> {
        Self::new(C::new(re, im))
    }

    pub fn value(self) -> C {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn reduced(self) -> ReducedTau {
        ReducedTau::new(self)
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_complex(self.0))
    }
}

/// Formats `a+bi` / `a-bi` with shortest round-trip digits.
pub fn format_complex(z: C) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `a+bi`, `a-bi`, `bi` or `a` (no spaces; `i` alone means 1i).
pub fn parse_complex(s: &str) -> Option<C> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| C::new(re, 0.0));
    };
    // split at the last sign that is not an exponent sign or the leading sign
    let bytes = body.as_bytes();
    let mut split = None;
    for j in (1..bytes.len()).rev() {
        if (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E') {
            split = Some(j);
            break;
        }
    }
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(j) => Some(C::new(body[..j].parse().ok()?, imag(&body[j..])?)),
        None => Some(C::new(0.0, imag(body)?)),
    }
}

impl FromStr for Tau {
    type Err = GyreError;

    fn from_str(s: &str) -> Result<Self> {
        let z = parse_complex(s)
            .ok_or_else(|| GyreError::Config(format!("cannot parse complex number '{s}'")))?;
        Tau::new(z)
    }
}

/// `tau = r + tilde` with `-1/2 < Re tilde <= 1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedTau {
    pub r: i64,
    pub tilde: C,
}

impl ReducedTau {
    pub fn new(tau: Tau) -> Self {
        let v = tau.value();
        // ceil(Re - 1/2) keeps Re tilde = 1/2 on the r = 0 side
        let r = (v.re - 0.5).ceil() as i64;
        ReducedTau {
            r,
            tilde: v - r as f64,
        }
    }
}

pub fn nome(tau: Tau) -> C {
    (C::i() * PI * tau.value()).exp()
}

/// Theta constants for nome `q`; `s2` omits the `q^(1/4)` prefactor of theta_2.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ThetaConstants {
    pub s2: C,
    pub t3: C,
    pub t4: C,
}

pub(crate) fn check_nome(q: C) -> Result<()> {
    if q.norm() > MAX_NOME {
        Err(GyreError::SeriesNonconvergence(q.norm()))
    } else {
        Ok(())
    }
}

pub(crate) fn theta_constants(q: C) -> Result<ThetaConstants> {
    check_nome(q)?;
    let one = C::new(1.0, 0.0);
    let (mut t3, mut t4, mut s2) = (one, one, one);
    // q^(n^2) and q^(n(n+1)) by running products
    let (mut qn2, mut qnn1) = (one, one);
    let q2 = q * q;
    let mut odd = q;
    let mut even = q2;
    for n in 1..MAX_TERMS {
        qn2 *= odd;
        qnn1 *= even;
        odd *= q2;
        even *= q2;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        t3 += 2.0 * qn2;
        t4 += 2.0 * sign * qn2;
        s2 += qnn1;
        if qn2.norm() < SERIES_EPS * t3.norm().min(t4.norm()) {
            break;
        }
    }
    Ok(ThetaConstants { s2: 2.0 * s2, t3, t4 })
}

/// `lambda(tau) = theta_2^4 / theta_3^4` with nome `exp(i pi tau)`.
pub fn modular_lambda(tau: Tau) -> Result<C> {
    let mut v = tau.value();
    v.re -= 2.0 * (v.re / 2.0).round();
    let q = (C::i() * PI * v).exp();
    let tc = theta_constants(q)?;
    let x = (C::i() * PI * v / 4.0).exp() * tc.s2 / tc.t3;
    Ok(x.powi(4))
}

/// Complete elliptic integral of the first kind, principal branch, by the
/// arithmetic-geometric mean with the optimal choice of square roots.
pub fn complete_k(m: C) -> Result<C> {
    if m.im == 0.0 && m.re >= 1.0 {
        return Err(GyreError::BranchCut(m));
    }
    Ok(PI / (2.0 * agm(C::new(1.0, 0.0), (1.0 - m).sqrt())))
}

/// `K(1 - m1)` from the complementary parameter, accurate when `m1` is tiny.
pub fn complete_k_from_complement(m1: C) -> Result<C> {
    if m1.im == 0.0 && m1.re <= 0.0 {
        return Err(GyreError::BranchCut(1.0 - m1));
    }
    Ok(PI / (2.0 * agm(C::new(1.0, 0.0), m1.sqrt())))
}

pub(crate) fn agm(mut a: C, mut b: C) -> C {
    for _ in 0..64 {
        let a1 = 0.5 * (a + b);
        let mut b1 = (a * b).sqrt();
        if (a1 - b1).norm() > (a1 + b1).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    0.5 * (a + b)
}

/// Modulus data of the lattice `tau`, together with everything needed to
/// evaluate `sn`, `cn`, `dn` on it.
#[derive(Clone, Copy, Debug)]
pub struct EllipticModulus {
    pub tau: Tau,
    pub reduced: ReducedTau,
    /// `lambda(2 tau)`.
    pub m: C,
    /// The square root of `m` selected by the theta quotient; it is the `k`
    /// in `sn(u + iK') = 1 / (k sn u)`.
    pub k_sqrt_m: C,
    /// `K(m)`.
    pub k: C,
    /// `K' = -2 i tau K`.
    pub k_prime: C,
    /// `1 - m`, from the complementary lattice when `m` is close to 1.
    pub m_complement: C,
    /// `arg m` under the convention `2 pi r + arg m~`.
    pub arg_m: f64,
    /// `arg m~` on (-pi, pi]; the negative real axis is assigned by the sign
    /// of `Re tilde`.
    pub arg_m_tilde: f64,
    pub(crate) q: C,
    theta: ThetaConstants,
}

impl EllipticModulus {
    pub fn new(tau: Tau) -> Result<Self> {
        let reduced = tau.reduced();
        let tt = reduced.tilde;
        let q = (2.0 * PI * C::i() * tt).exp();
        let theta = theta_constants(q)?;
        let ratio = theta.s2 / theta.t3;
        let m = ((C::i() * PI * tt / 2.0).exp() * ratio).powi(4);
        let k_sqrt_m = (C::i() * PI * tau.value()).exp() * ratio * ratio;
        let k = 0.5 * PI * theta.t3 * theta.t3;
        let k_prime = -2.0 * C::i() * tau.value() * k;
        let m_complement = if (1.0 - m).norm() < 0.25 {
            let co = -1.0 / (2.0 * tt);
            let qc = (C::i() * PI * co).exp();
            let tc = theta_constants(qc)?;
            ((C::i() * PI * co / 4.0).exp() * tc.s2 / tc.t3).powi(4)
        } else {
            1.0 - m
        };
        let mut arg_m_tilde = m.arg();
        if m.re < 0.0 && m.im.abs() <= 1e-13 * m.norm() {
            arg_m_tilde = if tt.re > 0.0 { PI } else { -PI };
        }
        Ok(EllipticModulus {
            tau,
            reduced,
            m,
            k_sqrt_m,
            k,
            k_prime,
            m_complement,
            arg_m: 2.0 * PI * reduced.r as f64 + arg_m_tilde,
            arg_m_tilde,
            q,
            theta,
        })
    }

    /// `m^p` with `arg m` taken from the convention.
    pub fn m_pow(&self, p: f64) -> C {
        C::from_polar(self.m.norm().powf(p), p * self.arg_m)
    }

    /// `m~^p` on the principal branch.
    pub fn m_tilde_pow(&self, p: f64) -> C {
        C::from_polar(self.m.norm().powf(p), p * self.arg_m_tilde)
    }

    /// `sn(u)`.
    pub fn sn(&self, u: C) -> Result<C> {
        Ok(self.scd(u)?.0)
    }

    /// `sc(u) = sn(u) / cn(u)`.
    pub fn sc(&self, u: C) -> Result<C> {
        let (s, c, _) = self.scd(u)?;
        Ok(s / c)
    }

    /// `(sn, cn, dn)` at `u`.
    pub fn scd(&self, u: C) -> Result<(C, C, C)> {
        self.scd_lattice(u / (4.0 * self.k))
    }

    /// `(sn, cn, dn)` at `u = 4Kz`.
    pub fn scd_lattice(&self, z: C) -> Result<(C, C, C)> {
        let tau = self.tau.value();
        let nt = (z.im / tau.im).round();
        let mut z = z - nt * tau;
        z.re -= z.re.round();
        let parity = if (nt as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let quarter = tau.im / 4.0;
        let shift = if z.im > quarter {
            1.0
        } else if z.im < -quarter {
            -1.0
        } else {
            0.0
        };
        let mut w = z - shift * tau / 2.0;
        w.re -= w.re.round();
        let (s, c, d) = self.scd_small(w);
        let (s, c, d) = if shift == 0.0 {
            (s, c, d)
        } else {
            if w.norm() < POLE_GUARD || (w.re.abs() - 0.5).hypot(w.im) < POLE_GUARD {
                return Err(GyreError::PoleProximity(z));
            }
            let ks = self.k_sqrt_m * s;
            let j = C::i() * shift;
            (1.0 / ks, -j * d / ks, -j * c / s)
        };
        Ok((s, parity * c, parity * d))
    }

    /// Theta quotients for `|Im w| <= Im tau / 4`.
    fn scd_small(&self, w: C) -> (C, C, C) {
        let q = self.q;
        let v = 2.0 * PI * w;
        let e = (C::i() * v).exp();
        let e2 = e * e;
        let (ei, e2i) = (1.0 / e, 1.0 / e2);
        let one = C::new(1.0, 0.0);
        // theta_1, theta_2 without q^(1/4), and theta_3, theta_4 at v
        let mut t1 = e - ei;
        let mut t2 = e + ei;
        let mut t3 = one;
        let mut t4 = one;
        let (mut qnn1, mut qn2) = (one, one);
        let (mut odd, mut even) = (q, q * q);
        let q2 = q * q;
        let (mut ep, mut em) = (e, ei);
        let (mut e2p, mut e2m) = (one, one);
        let grow = (2.0 * v.im.abs()).exp();
        for n in 1..MAX_TERMS {
            qn2 *= odd;
            qnn1 *= even;
            odd *= q2;
            even *= q2;
            ep *= e2;
            em *= e2i;
            e2p *= e2;
            e2m *= e2i;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            t1 += sign * qnn1 * (ep - em);
            t2 += qnn1 * (ep + em);
            let c2n = qn2 * (e2p + e2m);
            t3 += c2n;
            t4 += sign * c2n;
            let bound = 2.0 * qn2.norm() * grow.powi(n as i32) * v.im.abs().exp();
            if bound < SERIES_EPS * t4.norm().min(t3.norm()) && n > 1 {
                break;
            }
        }
        // t1 holds 2i * sum, t2 holds 2 * sum (cos), c2n terms carry the factor 2 via e2p + e2m
        let t1 = t1 / C::i();
        let tc = self.theta;
        (
            tc.t3 / tc.s2 * t1 / t4,
            tc.t4 / tc.s2 * t2 / t4,
            tc.t4 / tc.t3 * t3 / t4,
        )
    }
}

pub fn jacobi_sn(u: C, tau: Tau) -> Result<C> {
    EllipticModulus::new(tau)?.sn(u)
}

pub fn jacobi_sc(u: C, tau: Tau) -> Result<C> {
    EllipticModulus::new(tau)?.sc(u)
}

/// Complementary lattice ratio: `sn(u; tau) = -i sc(iu; complementary(tau))`.
pub fn complementary(tau: Tau) -> Tau {
    Tau(-1.0 / (4.0 * tau.value()))
}
