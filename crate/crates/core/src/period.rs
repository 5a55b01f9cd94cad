//! Associate angles, the period residual `theta_h - theta_v`, root finding on
//! vertical lines of the modulus plane and continuation of the solution
//! curves.

use crate::elliptic::Tau;
use crate::error::{GyreError, Result};
use crate::weierstrass::{psi, psi_closed_form_t, Family, WeierstrassData};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pitch(pub u32);

impl Pitch {
    pub const ONE: Pitch = Pitch(1);
}

/// Wraps an angle to (-pi, pi].
pub fn wrap(a: f64) -> f64 {
    let w = a - 2.0 * PI * (a / (2.0 * PI)).round();
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// `arg(tau + 1 - 2/p) - pi/2` for T, `arg(tau + 1 - 3/(2p)) - pi/2` for R.
pub fn theta_v(tau: Tau, family: Family, pitch: Pitch) -> Result<f64> {
    if pitch.0 == 0 {
        return Err(GyreError::PitchZero);
    }
    let p = f64::from(pitch.0);
    let shift = match family {
        Family::T => 1.0 - 2.0 / p,
        Family::R => 1.0 - 1.5 / p,
    };
    Ok(wrap((tau.value() + shift).arg() - FRAC_PI_2))
}

/// Residual and the data it was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedPoint {
    pub re_tau: f64,
    pub im_tau: f64,
    /// `theta_v`, which is the associate angle of the surface at a solution.
    pub theta: f64,
    pub residual: f64,
    pub psi_re: f64,
    pub psi_im: f64,
}

impl SolvedPoint {
    pub fn tau(&self) -> Tau {
        Tau::from_parts(self.re_tau, self.im_tau).expect("solved points lie in the upper half-plane")
    }

    pub fn psi(&self) -> C {
        C::new(self.psi_re, self.psi_im)
    }
}

pub fn evaluate(tau: Tau, family: Family, pitch: Pitch) -> Result<SolvedPoint> {
    let ps = psi(&WeierstrassData::new(family, tau, 0.0)?)?;
    let tv = theta_v(tau, family, pitch)?;
    Ok(SolvedPoint {
        re_tau: tau.re(),
        im_tau: tau.im(),
        theta: tv,
        residual: wrap(ps.arg() - tv),
        psi_re: ps.re,
        psi_im: ps.im,
    })
}

/// `theta_h(tau) - theta_v(tau; p)` wrapped to (-pi, pi].
pub fn residual(tau: Tau, family: Family, pitch: Pitch) -> Result<f64> {
    Ok(evaluate(tau, family, pitch)?.residual)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub scan_points: usize,
    /// Target `|residual|` for refined roots.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            scan_points: 120,
            tol: 1e-10,
        }
    }
}

/// Default scan range on a vertical line: from just above the boundary
/// circles of the family domain up to `Im tau = 20`, never below 0.05.
pub fn default_bracket(re: f64, family: Family) -> (f64, f64) {
    let circles: &[f64] = match family {
        Family::T | Family::R => &[-0.5, 0.5],
    };
    let mut lo: f64 = 0.05;
    for &c in circles {
        let d = re - c;
        if d.abs() < 0.5 {
            lo = lo.max((0.25 - d * d).sqrt() * (1.0 + 1e-6) + 1e-9);
        }
    }
    (lo, 20.0)
}

/// All roots found on one vertical line, with the scan that located them.
#[derive(Clone, Debug)]
pub struct VerticalSolution {
    pub root: SolvedPoint,
    /// Every refined root in increasing `Im tau`; more than one is evidence
    /// against uniqueness and is reported, not discarded.
    pub roots: Vec<SolvedPoint>,
    pub table: Vec<(f64, f64)>,
}

/// Scans the residual on a geometric grid in `[t_min, t_max]`, brackets every
/// sign change and refines each with Brent's method. Sign changes across the
/// +-pi wrap are ignored.
pub fn solve_on_vertical(
    re: f64,
    family: Family,
    pitch: Pitch,
    t_min: f64,
    t_max: f64,
) -> Result<VerticalSolution> {
    solve_on_vertical_with(re, family, pitch, t_min, t_max, &SolverOptions::default())
}

pub fn solve_on_vertical_with(
    re: f64,
    family: Family,
    pitch: Pitch,
    t_min: f64,
    t_max: f64,
    opts: &SolverOptions,
) -> Result<VerticalSolution> {
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(GyreError::Config(format!("bad bracket [{t_min}, {t_max}]")));
    }
    let n = opts.scan_points.max(2);
    let ratio = (t_max / t_min).powf(1.0 / (n - 1) as f64);
    let mut table = Vec::with_capacity(n);
    for j in 0..n {
        let t = t_min * ratio.powi(j as i32);
        table.push((t, residual(Tau::from_parts(re, t)?, family, pitch)?));
    }
    let mut roots = Vec::new();
    for w in table.windows(2) {
        let ((t0, f0), (t1, f1)) = (w[0], w[1]);
        if f0 == 0.0 || f0.signum() != f1.signum() && (f0 - f1).abs() < PI {
            roots.push(refine(re, family, pitch, (t0, f0), (t1, f1), opts)?);
        }
    }
    match roots.first() {
        Some(&root) => Ok(VerticalSolution { root, roots, table }),
        None => Err(GyreError::NoBracket { re, table }),
    }
}

fn refine(
    re: f64,
    family: Family,
    pitch: Pitch,
    a: (f64, f64),
    b: (f64, f64),
    opts: &SolverOptions,
) -> Result<SolvedPoint> {
    let mut err = None;
    let t = brent(
        |t| match Tau::from_parts(re, t).and_then(|tau| residual(tau, family, pitch)) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        a,
        b,
        opts.tol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    evaluate(Tau::from_parts(re, t)?, family, pitch)
}

/// Brent's method on a bracket `(a, f(a))`, `(b, f(b))` with opposite signs;
/// stops when `|f| < ftol` or the bracket collapses to rounding level.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: (f64, f64), b: (f64, f64), ftol: f64) -> f64 {
    let (mut a, mut fa) = a;
    let (mut b, mut fb) = b;
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb.abs() < ftol || fb.is_nan() {
            break;
        }
        let xtol = 4.0 * f64::EPSILON * b.abs();
        if (b - a).abs() <= xtol {
            break;
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let between = if lo < b { s > lo && s < b } else { s < lo && s > b };
        let poor = if bisected {
            (s - b).abs() >= 0.5 * (b - c).abs() || (b - c).abs() < xtol
        } else {
            (s - b).abs() >= 0.5 * (c - d).abs() || (c - d).abs() < xtol
        };
        if !between || poor {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyCurve {
    pub family: Family,
    pub pitch: Pitch,
    pub points: Vec<SolvedPoint>,
}

/// Warm-started root near `guess`: brackets by expanding geometrically
/// around the guess, then refines.
fn solve_near(
    re: f64,
    family: Family,
    pitch: Pitch,
    guess: f64,
    opts: &SolverOptions,
) -> Result<SolvedPoint> {
    let (lo_bound, hi_bound) = default_bracket(re, family);
    let guess = guess.clamp(lo_bound, hi_bound);
    let at = |t: f64| residual(Tau::from_parts(re, t)?, family, pitch);
    let f0 = at(guess)?;
    if f0.abs() < opts.tol {
        return evaluate(Tau::from_parts(re, guess)?, family, pitch);
    }
    let mut table = vec![(guess, f0)];
    let mut factor: f64 = 1.02;
    while factor < 1e3 {
        for t in [guess / factor, guess * factor] {
            if t < lo_bound || t > hi_bound {
                continue;
            }
            let f = at(t)?;
            table.push((t, f));
            if f.signum() != f0.signum() && (f - f0).abs() < PI {
                let (a, b) = if t < guess { ((t, f), (guess, f0)) } else { ((guess, f0), (t, f)) };
                return refine(re, family, pitch, a, b, opts);
            }
        }
        factor = factor * factor;
    }
    Err(GyreError::NoBracket { re, table })
}

/// Marches `Re tau` from `r_min` to `r_max`. Each vertical is solved from a
/// linear prediction of `Im tau`; when the correction exceeds five times the
/// predicted change the step is halved through intermediate verticals that
/// are used for warm starts only.
pub fn trace_family(family: Family, pitch: Pitch, r_min: f64, r_max: f64, step: f64) -> Result<FamilyCurve> {
    trace_family_with(family, pitch, r_min, r_max, step, &SolverOptions::default())
}

pub fn trace_family_with(
    family: Family,
    pitch: Pitch,
    r_min: f64,
    r_max: f64,
    step: f64,
    opts: &SolverOptions,
) -> Result<FamilyCurve> {
    if !(step > 0.0) || r_max < r_min {
        return Err(GyreError::Config(format!("bad range [{r_min}, {r_max}] with step {step}")));
    }
    let n = ((r_max - r_min) / step + 1e-9).floor() as usize;
    // snapped to 1e-12 so that e.g. -0.95 + 19 * 0.05 is written as 0
    let targets: Vec<f64> = (0..=n)
        .map(|j| ((r_min + j as f64 * step) * 1e12).round() / 1e12)
        .collect();
    let (lo, hi) = default_bracket(targets[0], family);
    let first = solve_on_vertical_with(targets[0], family, pitch, lo, hi, opts)?.root;
    let mut points = vec![first];
    // (re, im) history including warm-start-only points
    let mut hist = vec![(first.re_tau, first.im_tau)];
    for &target in &targets[1..] {
        let mut re_cur = hist.last().unwrap().0;
        let mut h = target - re_cur;
        loop {
            let next_re = if (target - re_cur - h).abs() < 1e-12 { target } else { re_cur + h };
            let predicted = predict(&hist, next_re);
            let last_im = hist.last().unwrap().1;
            let attempt = solve_near(next_re, family, pitch, predicted, opts);
            let ok = match &attempt {
                Ok(p) => {
                    let predictor_step = (predicted - last_im).abs().max(0.1 * h.abs());
                    hist.len() < 2 || (p.im_tau - predicted).abs() <= 5.0 * predictor_step
                }
                Err(_) => false,
            };
            if ok {
                let p = attempt?;
                hist.push((p.re_tau, p.im_tau));
                re_cur = next_re;
                if (target - re_cur).abs() < 1e-12 {
                    points.push(p);
                    break;
                }
                h = (target - re_cur).min(2.0 * h).max(h).min(target - re_cur);
            } else {
                h *= 0.5;
                if h.abs() < 1e-6 {
                    let (last_re, last_im) = *hist.last().unwrap();
                    return Err(GyreError::ContinuationBreak { last_re, last_im });
                }
            }
        }
    }
    Ok(FamilyCurve { family, pitch, points })
}

fn predict(hist: &[(f64, f64)], re: f64) -> f64 {
    match hist {
        [.., (r0, t0), (r1, t1)] => t1 + (t1 - t0) / (r1 - r0) * (re - r1),
        [(_, t)] => *t,
        [] => 1.0,
    }
}

/// `Re tau` of the line where the family meets its classical neighbour
/// (tD for T, rPD for R).
pub fn terminal_line(family: Family) -> f64 {
    match family {
        Family::T => 1.0,
        Family::R => 0.5,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub family: Family,
    /// Richardson-extrapolated `Im tau` at the terminal line.
    pub im_tau: f64,
    /// `(1 - Re tau / line, Im tau)` samples used by the extrapolation.
    pub samples: Vec<(f64, f64)>,
    /// Independent estimate from the closed form (T only).
    pub closed_form_im_tau: Option<f64>,
}

/// `Im tau` where the tG curve meets `Re tau = 1`.
pub fn locate_td_intersection() -> Result<f64> {
    Ok(locate_intersection(Family::T)?.im_tau)
}

/// Traces the family towards its terminal line on `Re tau = line - 2^-k`
/// and extrapolates `Im tau` to the line by Richardson extrapolation.
pub fn locate_intersection(family: Family) -> Result<IntersectionReport> {
    let line = terminal_line(family);
    let opts = SolverOptions::default();
    let start = line - 0.5;
    let (lo, hi) = default_bracket(start, family);
    let first = solve_on_vertical_with(start, family, Pitch::ONE, lo, hi, &opts)?.root;
    let mut hist = vec![(first.re_tau, first.im_tau)];
    let mut samples = Vec::new();
    for k in 2..=8 {
        let h = 0.5f64.powi(k);
        let re = line - h;
        let guess = predict(&hist, re);
        let p = solve_near(re, family, Pitch::ONE, guess, &opts)?;
        hist.push((re, p.im_tau));
        samples.push((h, p.im_tau));
    }
    let (est, prev) = richardson(&samples);
    if !est.is_finite() || (est - prev).abs() > 0.05 {
        return Err(GyreError::ExtrapolationDivergence(format!(
            "successive estimates {prev} and {est}"
        )));
    }
    let closed_form_im_tau = match family {
        Family::T => Some(closed_form_td_intersection(est)?),
        Family::R => None,
    };
    Ok(IntersectionReport {
        family,
        im_tau: est,
        samples,
        closed_form_im_tau,
    })
}

/// Two-term Richardson extrapolation to `h = 0` on samples at halving `h`.
/// The order is read off the last three samples (it comes out as 2: the
/// curve meets the terminal line tangentially to first order). Returns the
/// estimate and the one from the previous pair.
fn richardson(samples: &[(f64, f64)]) -> (f64, f64) {
    let n = samples.len();
    let (y0, y1, y2) = (samples[n - 3].1, samples[n - 2].1, samples[n - 1].1);
    let ratio = (y1 - y0) / (y2 - y1);
    let order = if ratio.is_finite() && ratio > 1.0 { ratio.log2().round().max(1.0) } else { 1.0 };
    let f = 2f64.powf(order) - 1.0;
    (y2 + (y2 - y1) / f, y1 + (y1 - y0) / f)
}

/// On `Re tau = 1` the residual vanishes identically, and the tG curve
/// meets the line where its derivative in `Re tau` vanishes too:
/// `Im(psi'/psi) + 1/t = 0` at `tau = 1 + it`, with `psi` in closed form.
pub fn closed_form_td_intersection(guess: f64) -> Result<f64> {
    let slope = |t: f64| -> Result<f64> {
        let h = 1e-5;
        let p = |x: f64| psi_closed_form_t(Tau::from_parts(x, t)?);
        let dpsi = (p(1.0 + h)? - p(1.0 - h)?) / (2.0 * h);
        Ok((dpsi / p(1.0)?).im + 1.0 / t)
    };
    let mut a = (0.8 * guess, slope(0.8 * guess)?);
    let mut b = (1.25 * guess, slope(1.25 * guess)?);
    let mut grow = 0;
    while a.1.signum() == b.1.signum() {
        grow += 1;
        if grow > 10 {
            return Err(GyreError::ExtrapolationDivergence(
                "no sign change of the closed-form slope".into(),
            ));
        }
        a = (a.0 * 0.8, slope(a.0 * 0.8)?);
        b = (b.0 * 1.25, slope(b.0 * 1.25)?);
    }
    let mut err = None;
    let t = brent(
        |t| match slope(t) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        a,
        b,
        1e-12,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Reflection in the circle `|tau + 1 - 1/(2k)| = 1/(2k)`.
pub fn pitch_reflect(tau: Tau, k: u32) -> Tau {
    let k = f64::from(k);
    let tb = tau.value().conj();
    let v = -((2.0 * k - 1.0) * tb + (2.0 * k - 2.0)) / (2.0 * k * tb + (2.0 * k - 1.0));
    Tau::new(v).expect("reflection in a circle centred on the real axis keeps the upper half-plane")
}
