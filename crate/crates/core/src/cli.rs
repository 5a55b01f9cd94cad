//! Command-line front end. `run` parses the arguments, executes one job and
//! returns the process exit code: 0 on success, 2 when a validation suite
//! reports a failure, 1 on any error.
//!
//! `--config <file.json>` supplies flags as a JSON object, keys spelled like
//! the long flags (`"r_min"` or `"r-min"`). Flags given on the command line
//! take precedence.

use crate::elliptic::{format_complex, parse_complex, Tau};
use crate::error::{GyreError, Result};
use crate::geometry::{catenoid_mesh, describe, export_csv_curve, export_obj, export_svg_flat, fundamental_unit, ribbon_mesh};
use crate::period::{default_bracket, locate_intersection, solve_on_vertical_with, theta_v, trace_family_with, Pitch, SolverOptions};
use crate::validate::{self, Suite};
use crate::weierstrass::{flat_structure, Family, MapTag, WeierstrassData};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gyre",
    version,
    about = "Weierstrass data, period solver and meshes for the tG and rGL minimal surface families",
    args_override_self = true
)]
struct Cli {
    /// JSON file whose keys mirror the long flags of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    job: Job,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    T,
    R,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::T => Family::T,
            FamilyArg::R => Family::R,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapArg {
    Phi1,
    Phi2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Identities,
    Asymptotics,
    Closedform,
    PeriodInvariants,
    All,
}

#[derive(Args, Debug)]
struct FamilyOpts {
    /// Surface family.
    #[arg(long, value_enum, ignore_case = true, default_value = "t")]
    family: FamilyArg,
    /// Helix pitch in units of the pole/zero spacing (1 for tG and rGL).
    #[arg(long, default_value_t = 1)]
    pitch: u32,
}

#[derive(Args, Debug)]
struct Tolerance {
    /// Target |theta_h - theta_v| for refined roots.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

impl Tolerance {
    fn options(&self) -> Result<SolverOptions> {
        if !(self.tol > 0.0) {
            return Err(GyreError::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(SolverOptions {
            tol: self.tol,
            ..SolverOptions::default()
        })
    }
}

#[derive(Subcommand, Debug)]
enum Job {
    /// Trace a family curve over a range of Re tau and write it as CSV.
    #[command(allow_negative_numbers = true)]
    Trace {
        #[command(flatten)]
        fam: FamilyOpts,
        #[arg(long, default_value_t = -0.9)]
        r_min: f64,
        #[arg(long, default_value_t = 0.9)]
        r_max: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[command(flatten)]
        tol: Tolerance,
        #[arg(long, default_value = "curve.csv")]
        out: PathBuf,
    },
    /// Solve the period condition on one vertical line Re tau = re.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        fam: FamilyOpts,
        #[arg(long)]
        re: f64,
        /// Lower end of the scan (default: just above the boundary circles).
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[command(flatten)]
        tol: Tolerance,
    },
    /// Estimate where the family meets tD (T) or rPD (R).
    Intersect {
        #[arg(long, value_enum, ignore_case = true, default_value = "t")]
        family: FamilyArg,
    },
    /// Twisted catenoid (theta = pi/2) as an OBJ quad mesh.
    Catenoid {
        #[arg(long, value_enum, ignore_case = true, default_value = "t")]
        family: FamilyArg,
        /// Lattice ratio as a+bi.
        #[arg(long, allow_hyphen_values = true, default_value = "-1+1i")]
        tau: String,
        /// Columns per strip period (a multiple of the screw order).
        #[arg(long, default_value_t = 48)]
        nu: usize,
        /// Rows from the lower to the upper boundary.
        #[arg(long, default_value_t = 16)]
        nv: usize,
        #[arg(long, default_value = "catenoid.obj")]
        out: PathBuf,
    },
    /// Ribbon or fundamental unit at the solved point on Re tau = re.
    #[command(allow_negative_numbers = true)]
    Surface {
        #[command(flatten)]
        fam: FamilyOpts,
        #[arg(long, default_value_t = 0.0)]
        re: f64,
        #[arg(long, default_value_t = 48)]
        nu: usize,
        #[arg(long, default_value_t = 12)]
        nv: usize,
        /// Strip periods covered by the ribbon.
        #[arg(long, default_value_t = 1)]
        turns: usize,
        /// Add the inverted second ribbon and the lattice vectors.
        #[arg(long)]
        unit: bool,
        #[command(flatten)]
        tol: Tolerance,
        #[arg(long, default_value = "surface.obj")]
        out: PathBuf,
    },
    /// Flat structure (images of both boundary lines) as SVG.
    #[command(allow_negative_numbers = true)]
    Flat {
        #[arg(long, value_enum, ignore_case = true, default_value = "t")]
        family: FamilyArg,
        #[arg(long, allow_hyphen_values = true, default_value = "0+1i")]
        tau: String,
        /// Associate angle.
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, value_enum, ignore_case = true, default_value = "phi1")]
        map: MapArg,
        /// Samples per boundary line.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value = "flat.svg")]
        out: PathBuf,
    },
    /// Run self-check suites and print a pass/fail table.
    Validate {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

fn parse_tau(s: &str) -> Result<Tau> {
    let z = parse_complex(s).ok_or_else(|| GyreError::Config(format!("cannot parse '{s}' as a+bi")))?;
    Tau::new(z)
}

/// Moves the flags from a `--config` file in front of the command-line flags
/// of the subcommand, so explicit flags override them.
fn expand_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" && i + 1 < args.len() {
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| GyreError::io(&path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| GyreError::Config(format!("{path}: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| GyreError::Config(format!("{path}: expected a JSON object")))?;
    let mut extra = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => extra.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => extra.extend([flag, s.clone()]),
            serde_json::Value::Number(n) => extra.extend([flag, n.to_string()]),
            _ => return Err(GyreError::Config(format!("{path}: unsupported value for '{key}'"))),
        }
    }
    // insert right after the subcommand name
    let sub = args
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(args.len());
    args.splice(sub..sub, extra);
    Ok(args)
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = argv.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.job) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(job: Job) -> Result<i32> {
    match job {
        Job::Trace {
            fam,
            r_min,
            r_max,
            step,
            tol,
            out,
        } => {
            let family = fam.family.into();
            let curve = trace_family_with(family, Pitch(fam.pitch), r_min, r_max, step, &tol.options()?)?;
            export_csv_curve(&curve, &out)?;
            let worst = curve.points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max);
            println!(
                "{family} pitch {}: {} points, max |residual| {worst:.2e} -> {}",
                fam.pitch,
                curve.points.len(),
                out.display()
            );
        }
        Job::Solve {
            fam,
            re,
            t_min,
            t_max,
            tol,
        } => {
            let family = fam.family.into();
            let (lo, hi) = default_bracket(re, family);
            let sol = solve_on_vertical_with(
                re,
                family,
                Pitch(fam.pitch),
                t_min.unwrap_or(lo),
                t_max.unwrap_or(hi),
                &tol.options()?,
            )?;
            for p in &sol.roots {
                println!(
                    "tau = {}  theta = {:.12}  residual = {:.2e}",
                    format_complex(p.tau().value()),
                    p.theta,
                    p.residual
                );
            }
            if sol.roots.len() > 1 {
                eprintln!("warning: {} roots on Re tau = {re}", sol.roots.len());
            }
        }
        Job::Intersect { family } => {
            let rep = locate_intersection(family.into())?;
            println!("{} meets Re tau = {} at Im tau = {:.7}", rep.family, crate::period::terminal_line(rep.family), rep.im_tau);
            if let Some(cf) = rep.closed_form_im_tau {
                println!("closed-form estimate: Im tau = {cf:.7}");
            }
        }
        Job::Catenoid {
            family,
            tau,
            nu,
            nv,
            out,
        } => {
            let data = WeierstrassData::new(family.into(), parse_tau(&tau)?, FRAC_PI_2)?;
            let mesh = catenoid_mesh(&data, nu, nv)?;
            export_obj(&mesh, &out)?;
            println!("{} -> {}", describe(&mesh), out.display());
        }
        Job::Surface {
            fam,
            re,
            nu,
            nv,
            turns,
            unit,
            tol,
            out,
        } => {
            let family = fam.family.into();
            let pitch = Pitch(fam.pitch);
            let (lo, hi) = default_bracket(re, family);
            let p = solve_on_vertical_with(re, family, pitch, lo, hi, &tol.options()?)?.root;
            let tau = p.tau();
            let data = WeierstrassData::new(family, tau, theta_v(tau, family, pitch)?)?;
            let ribbon = ribbon_mesh(&data, pitch, nu, nv, turns)?;
            let mesh = if unit {
                let u = fundamental_unit(&ribbon, &data)?;
                println!("seam deviation {:.2e}", u.seam_deviation);
                u.mesh
            } else {
                ribbon
            };
            export_obj(&mesh, &out)?;
            println!("{} -> {}", describe(&mesh), out.display());
        }
        Job::Flat {
            family,
            tau,
            theta,
            map,
            samples,
            out,
        } => {
            let data = WeierstrassData::new(family.into(), parse_tau(&tau)?, theta)?;
            let tag = match map {
                MapArg::Phi1 => MapTag::Phi1,
                MapArg::Phi2 => MapTag::Phi2,
            };
            let fs = flat_structure(&data, tag, samples)?;
            export_svg_flat(&[fs.inner, fs.outer], &out)?;
            println!("flat structure -> {}", out.display());
        }
        Job::Validate { suite } => {
            let suites: Vec<Suite> = match suite {
                SuiteArg::Identities => vec![Suite::Identities],
                SuiteArg::Asymptotics => vec![Suite::Asymptotics],
                SuiteArg::Closedform => vec![Suite::ClosedForm],
                SuiteArg::PeriodInvariants => vec![Suite::PeriodInvariants],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            let mut failed = 0;
            for s in suites {
                for c in validate::run(s)? {
                    println!(
                        "{:<4} {:<18} {:>10.3e} < {:<8.1e} {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        s.to_string(),
                        c.value,
                        c.tol,
                        c.name
                    );
                    failed += usize::from(!c.passed);
                }
            }
            if failed > 0 {
                println!("{failed} check(s) failed");
                return Ok(2);
            }
        }
    }
    Ok(0)
}
