//! Self-check suites behind `gyre validate`: elliptic identities, asymptotic
//! limits, the closed form for T, and invariants of the period problem.
//!
//! Sample points come from an additive recurrence with irrational steps, so
//! every run checks the same points.

use crate::asymptotics::{asymptote_report, diagonal_approach, psi1, psi2, Regime};
use crate::elliptic::{complementary, jacobi_sc, EllipticModulus, Tau};
use crate::error::{GyreError, Result};
use crate::period::{pitch_reflect, wrap};
use crate::quadrature::TanhSinh;
use crate::weierstrass::{psi, psi_closed_form_t, psi_report, theta_h, Family, WeierstrassData};
use num_complex::Complex64 as C;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Asymptotics,
    ClosedForm,
    PeriodInvariants,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Identities, Suite::Asymptotics, Suite::ClosedForm, Suite::PeriodInvariants];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Identities => "identities",
            Suite::Asymptotics => "asymptotics",
            Suite::ClosedForm => "closedform",
            Suite::PeriodInvariants => "period-invariants",
        })
    }
}

impl FromStr for Suite {
    type Err = GyreError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| GyreError::Config(format!("unknown suite '{s}'")))
    }
}

/// One line of the pass/fail table: `value` is the worst error observed,
/// or 0 / 1 for yes/no conditions.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tol,
            passed: value < tol,
        }
    }

    fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tol: 0.5,
            passed: ok,
        }
    }
}

/// Point `n` of the sequence `frac(n (phi - 1), n (sqrt 2 - 1))` in the unit square.
pub fn sample(n: usize) -> (f64, f64) {
    let a = 0.618_033_988_749_894_9 * (n + 1) as f64;
    let b = 0.414_213_562_373_095_1 * (n + 1) as f64;
    (a.fract(), b.fract())
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn run(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Identities => identities(40),
        Suite::Asymptotics => asymptotics(),
        Suite::ClosedForm => closed_form(),
        Suite::PeriodInvariants => period_invariants(),
    }
}

/// Worst relative errors of the classical `sn` identities at `n` points.
pub fn identities(n: usize) -> Result<Vec<Check>> {
    let mut worst = [0.0f64; 7];
    for j in 0..n {
        let (a, b) = sample(j);
        let (c, d) = sample(j + 7919);
        let tau = Tau::from_parts(2.0 * a - 1.0, 0.5 + 2.5 * b)?;
        let em = EllipticModulus::new(tau)?;
        let (k, kp) = (em.k, em.k_prime);
        let u = 4.0 * k * (C::new(0.05 + 0.4 * c, 0.0) + (0.05 + 0.15 * d) * tau.value());
        let s = em.sn(u)?;
        let i = C::i();
        let errs = [
            rel(em.sn(u + 4.0 * k)?, s).max(rel(em.sn(u + 2.0 * i * kp)?, s)),
            rel(em.sn(-u)?, -s),
            rel(em.sn(2.0 * k - u)?, s),
            rel(em.sn(2.0 * k + u)?, -s),
            rel(em.sn(u + i * kp)?, 1.0 / (em.k_sqrt_m * s)),
            rel(-i * jacobi_sc(i * u, complementary(tau))?, s),
            {
                let h = 1e-3 * (4.0 * k).norm();
                let f = |t: f64| em.sn(u + t * h);
                let deriv = (f(-2.0)? - 8.0 * f(-1.0)? + 8.0 * f(1.0)? - f(2.0)?) / (12.0 * h);
                let (_, cn, dn) = em.scd(u)?;
                rel(deriv, cn * dn)
            },
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    let names = [
        "sn periods 4K and 2iK'",
        "sn odd",
        "sn(2K - u) = sn(u)",
        "sn(2K + u) = -sn(u)",
        "sn(u + iK') = 1 / (k sn u)",
        "sn(u; tau) = -i sc(iu; -1/(4 tau))",
        "d sn / du = cn dn",
    ];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(name, w)| Check::below(*name, w, 1e-8))
        .collect())
}

/// Real parts used for the `Im tau -> inf` checks.
pub fn asymptote_abscissae(family: Family) -> [f64; 4] {
    match family {
        Family::T => [-0.8, -0.3, 0.4, 0.9],
        Family::R => [-0.8, -0.3, 0.1, 0.4],
    }
}

pub fn asymptotics() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for family in [Family::T, Family::R] {
        for (t, tol) in [(4.0, 1e-2), (6.0, 1e-3)] {
            let mut worst = 0.0f64;
            for re in asymptote_abscissae(family) {
                let rep = asymptote_report(Tau::from_parts(re, t)?, family, Regime::TauInf)?;
                worst = worst.max(rep.deviation);
            }
            out.push(Check::below(format!("{family}: |theta_h - limit| at Im tau = {t}"), worst, tol));
        }
    }
    // towards tau = 1 along the diagonal the limit is approached from below
    let reps = [0.2, 0.1, 0.05]
        .map(|eps| diagonal_approach(eps).and_then(|t| asymptote_report(t, Family::T, Regime::TauToOne)));
    let vals: Vec<f64> = reps
        .into_iter()
        .map(|r| r.map(|r| r.theta_h_numeric))
        .collect::<Result<_>>()?;
    out.push(Check::holds(
        format!("T: theta_h < 0 along 1 + eps e^(3 pi i/4), eps = 0.2, 0.1, 0.05 (got {vals:.4?})"),
        vals.iter().all(|&v| v < 0.0),
    ));
    out.push(Check::holds(
        "T: |theta_h| decreasing along 1 + eps e^(3 pi i/4)",
        vals.windows(2).all(|w| w[1].abs() < w[0].abs()),
    ));
    let mut worst = 0.0f64;
    let quad = TanhSinh::default();
    for &(re, im) in &[(0.0, 1.0), (-0.6, 0.8), (0.7, 1.7), (0.95, 0.4)] {
        let tau = Tau::from_parts(re, im)?;
        let data = WeierstrassData::new(Family::T, tau, 0.0)?;
        let origin = C::new(0.0, 0.0);
        let e1 = data.segment_integrals(origin, C::new(0.5, 0.0), &quad)?.0;
        let e2 = data.segment_integrals(origin, tau.reduced().tilde / 2.0, &quad)?.0;
        worst = worst.max(rel(psi1(tau)?, e1)).max(rel(psi2(tau)?, e2));
    }
    out.push(Check::below("edge vectors: real-line vs contour integrals", worst, 1e-7));
    Ok(out)
}

/// 20 points of the T domain `-1 < Re tau < 1, |tau -+ 1/2| > 1/2`.
pub fn omega_t_samples() -> Vec<Tau> {
    let mut out = Vec::new();
    for re in [-0.9, -0.45, 0.05, 0.5, 0.93] {
        let d = (re - 0.5f64.copysign(re)).abs();
        let floor = if d < 0.5 { (0.25 - d * d).sqrt() } else { 0.0 };
        for lift in [0.04, 0.3, 0.8, 2.0] {
            out.push(Tau::from_parts(re, floor + lift).expect("upper half-plane"));
        }
    }
    out
}

pub fn closed_form() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for tau in omega_t_samples() {
        let numeric = psi(&WeierstrassData::new(Family::T, tau, 0.0)?)?;
        worst = worst.max(rel(psi_closed_form_t(tau)?, numeric));
    }
    Ok(vec![Check::below("T: closed-form psi at 20 points of the domain", worst, 1e-8)])
}

pub fn period_invariants() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let ims = [0.6, 1.0, 1.5, 2.0, 2.5];
    let lines = [
        (Family::T, -1.0, FRAC_PI_2),
        (Family::R, -1.0, FRAC_PI_2),
        (Family::T, 1.0, 0.0),
        (Family::R, 0.5, 0.0),
    ];
    for (family, re, want) in lines {
        let mut worst = 0.0f64;
        for im in ims {
            worst = worst.max(wrap(theta_h(Tau::from_parts(re, im)?, family)? - want).abs());
        }
        out.push(Check::below(format!("{family}: theta_h = {want:.4} on Re tau = {re}"), worst, 1e-8));
    }
    let hclp = theta_h(Tau::from_parts(0.5, 0.5)?, Family::R)?;
    out.push(Check::below("R: theta_h((1 + i) / 2) = 0", hclp.abs(), 1e-6));

    let mut worst = 0.0f64;
    for j in 0..10 {
        let (a, b) = sample(j + 101);
        let tau = Tau::from_parts(-0.9 + 1.8 * a, 0.5 + 1.5 * b)?;
        for k in [1u32, 2] {
            let tp = pitch_reflect(tau, k);
            let lhs = theta_h(tau, Family::T)? + theta_h(tp, Family::T)?;
            let rhs = (tau.value() + 1.0 - 1.0 / (2.0 * f64::from(k))).arg();
            worst = worst.max(wrap(lhs - rhs).abs());
        }
    }
    out.push(Check::below("T: theta_h(tau) + theta_h(tau') = arg(tau + 1 - 1/(2k))", worst, 1e-8));

    let mut worst = 0.0f64;
    for j in 0..20 {
        let (a, b) = sample(j + 211);
        let tau = Tau::from_parts(-0.95 + 1.9 * a, 0.4 + 2.6 * b)?;
        let family = if j % 2 == 0 { Family::T } else { Family::R };
        worst = worst.max(psi_report(&WeierstrassData::new(family, tau, 0.0)?)?.relative_gap());
    }
    out.push(Check::below("int G dz vs int dz / G over [0, (1 + tau) / 2]", worst, 1e-8));
    Ok(out)
}
