//! Quad meshes of twisted catenoids, ribbons and fundamental units, the
//! symmetry checks they are expected to pass, and OBJ / SVG / CSV export.
//!
//! Meshes are sampled on a skew grid `z = x_j + t_k tau / 2` of the strip
//! `0 <= Im z <= Im tau / 2`, so both boundary lines are rows of the grid.
//! Columns sit half a cell away from the branch points `Z/2` on the lower
//! line and `tau/2 + Z/2` on the upper one.

use crate::elliptic::{format_complex, Tau};
use crate::error::{GyreError, Result};
use crate::period::{theta_v, wrap, FamilyCurve, Pitch, SolvedPoint};
use crate::quadrature::TanhSinh;
use crate::weierstrass::{add, immersion_at, theta_h, Family, FlatPolyline, WeierstrassData, BASE_POINT};
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub type Point = [f64; 3];

/// Surface data a mesh was generated from, written into the OBJ header.
#[derive(Clone, Copy, Debug)]
pub struct MeshInfo {
    pub family: Family,
    pub tau: Tau,
    pub theta: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Parameter of each vertex on the torus.
    pub params: Vec<C>,
    pub quads: Vec<[usize; 4]>,
    pub boundary_loops: Vec<(String, Vec<usize>)>,
    pub lattice_vectors: Option<[Point; 3]>,
    pub info: Option<MeshInfo>,
    /// Columns and rows of the parameter grid of the first sheet.
    pub grid: (usize, usize),
}

impl Mesh {
    pub fn boundary(&self, name: &str) -> Option<&[usize]> {
        self.boundary_loops
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        diameter(self.vertices.iter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Isometry {
    /// Rotation by `angle` about the vertical line through `axis`, followed
    /// by a translation.
    Screw { axis: [f64; 2], angle: f64, offset: Point },
    Inversion { center: Point },
    Translation { offset: Point },
    /// Rotation by pi about the line through `point` with direction `dir`.
    HalfTurn { point: Point, dir: Point },
}

impl Isometry {
    pub fn apply(&self, p: Point) -> Point {
        match *self {
            Isometry::Screw { axis, angle, offset } => {
                let (s, c) = angle.sin_cos();
                let (x, y) = (p[0] - axis[0], p[1] - axis[1]);
                [
                    axis[0] + c * x - s * y + offset[0],
                    axis[1] + s * x + c * y + offset[1],
                    p[2] + offset[2],
                ]
            }
            Isometry::Inversion { center } => sub(scale(center, 2.0), p),
            Isometry::Translation { offset } => add(p, offset),
            Isometry::HalfTurn { point, dir } => {
                let d = scale(dir, 1.0 / norm(dir));
                let v = sub(p, point);
                let along = scale(d, dot(v, d));
                add(point, sub(scale(along, 2.0), v))
            }
        }
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn diameter<'a>(pts: impl Iterator<Item = &'a Point> + Clone) -> f64 {
    let mut d = 0.0f64;
    for (i, p) in pts.clone().enumerate() {
        for q in pts.clone().skip(i + 1) {
            d = d.max(norm(sub(*p, *q)));
        }
    }
    d
}

/// Skew grid `x0 + j dx + k / (rows - 1) * tau / 2`.
#[derive(Clone, Copy, Debug)]
struct StripGrid {
    x0: f64,
    dx: f64,
    cols: usize,
    rows: usize,
    top: C,
}

impl StripGrid {
    fn new(data: &WeierstrassData, periods: usize, nu: usize, nv: usize) -> Result<Self> {
        let order = data.family.screw_order();
        if nu == 0 || nu % order != 0 {
            return Err(GyreError::Config(format!(
                "nu = {nu} must be a positive multiple of the screw order {order}"
            )));
        }
        if nv < 2 {
            return Err(GyreError::Config("nv must be at least 2".into()));
        }
        let dx = data.family.strip_period() / nu as f64;
        Ok(StripGrid {
            x0: 0.5 * dx,
            dx,
            cols: nu * periods,
            rows: nv,
            top: data.tau.value() / 2.0,
        })
    }

    fn point(&self, j: usize, k: usize) -> C {
        C::new(self.x0 + j as f64 * self.dx, 0.0) + self.top * (k as f64 / (self.rows - 1) as f64)
    }

    fn index(&self, j: usize, k: usize) -> usize {
        k * self.cols + j
    }
}

/// Immersion at every grid point: along the lower boundary from the base
/// point, then up each column.
fn sample(data: &WeierstrassData, g: &StripGrid) -> Result<(Vec<Point>, Vec<C>)> {
    let quad = TanhSinh::default();
    let n = g.cols * g.rows;
    let mut pts = vec![[0.0; 3]; n];
    let mut params = vec![C::new(0.0, 0.0); n];
    let mut x = immersion_at(data, g.point(0, 0), &quad)?;
    for j in 0..g.cols {
        if j > 0 {
            x = add(x, data.displacement(g.point(j - 1, 0), g.point(j, 0), &quad)?);
        }
        let mut y = x;
        for k in 0..g.rows {
            if k > 0 {
                y = add(y, data.displacement(g.point(j, k - 1), g.point(j, k), &quad)?);
            }
            pts[g.index(j, k)] = y;
            params[g.index(j, k)] = g.point(j, k);
        }
    }
    Ok((pts, params))
}

fn quads(g: &StripGrid, wrap_around: bool) -> Vec<[usize; 4]> {
    let jmax = if wrap_around { g.cols } else { g.cols - 1 };
    let mut out = Vec::with_capacity(jmax * (g.rows - 1));
    for k in 0..g.rows - 1 {
        for j in 0..jmax {
            let j1 = (j + 1) % g.cols;
            out.push([g.index(j, k), g.index(j1, k), g.index(j1, k + 1), g.index(j, k + 1)]);
        }
    }
    out
}

fn info(data: &WeierstrassData) -> Option<MeshInfo> {
    Some(MeshInfo {
        family: data.family,
        tau: data.tau,
        theta: data.theta,
    })
}

/// Twisted catenoid: the lower annulus at `theta = pi/2`, closed over one
/// strip period. Loops `bottom` (height 0) and `top` (height `Im tau / 2`).
pub fn catenoid_mesh(data: &WeierstrassData, nu: usize, nv: usize) -> Result<Mesh> {
    if (data.theta - FRAC_PI_2).abs() > 1e-12 {
        return Err(GyreError::Config(format!(
            "catenoid needs theta = pi/2, got {}",
            data.theta
        )));
    }
    let g = StripGrid::new(data, 1, nu, nv)?;
    let (vertices, params) = sample(data, &g)?;
    let row = |k: usize| (0..g.cols).map(|j| g.index(j, k)).collect::<Vec<_>>();
    Ok(Mesh {
        vertices,
        params,
        quads: quads(&g, true),
        boundary_loops: vec![("bottom".into(), row(0)), ("top".into(), row(g.rows - 1))],
        lattice_vectors: None,
        info: info(data),
        grid: (g.cols, g.rows),
    })
}

/// Ribbon over `turns` strip periods at a solved point. The single
/// boundary loop runs along the bottom, up the last column, back along the
/// top and down the first column.
pub fn ribbon_mesh(data: &WeierstrassData, pitch: Pitch, nu: usize, nv: usize, turns: usize) -> Result<Mesh> {
    let th = theta_h(data.tau, data.family)?;
    let tv = theta_v(data.tau, data.family, pitch)?;
    if wrap(th - tv).abs() > 1e-6 || wrap(data.theta - tv).abs() > 1e-6 {
        return Err(GyreError::NotSolved {
            tau: data.tau.value(),
            residual: wrap(th - tv),
        });
    }
    let g = StripGrid::new(data, turns.max(1), nu, nv)?;
    let (vertices, params) = sample(data, &g)?;
    let mut outline: Vec<usize> = (0..g.cols).map(|j| g.index(j, 0)).collect();
    outline.extend((1..g.rows).map(|k| g.index(g.cols - 1, k)));
    outline.extend((0..g.cols - 1).rev().map(|j| g.index(j, g.rows - 1)));
    outline.extend((1..g.rows - 1).rev().map(|k| g.index(0, k)));
    Ok(Mesh {
        vertices,
        params,
        quads: quads(&g, false),
        boundary_loops: vec![("boundary".into(), outline)],
        lattice_vectors: None,
        info: info(data),
        grid: (g.cols, g.rows),
    })
}

/// Result of assembling two ribbons.
#[derive(Clone, Debug)]
pub struct FundamentalUnit {
    pub mesh: Mesh,
    /// Largest distance between identified samples of the shared boundary,
    /// relative to the mesh diameter.
    pub seam_deviation: f64,
    pub inversion: Isometry,
}

/// Adds the image of `ribbon` under the point inversion through the image of
/// the base point `1/4` (the midpoint of the first lower edge), checks that
/// the two copies agree along the shared lower boundary, and attaches the
/// lattice generators.
pub fn fundamental_unit(ribbon: &Mesh, data: &WeierstrassData) -> Result<FundamentalUnit> {
    let (cols, rows) = ribbon.grid;
    let n = ribbon.vertices.len();
    if cols * rows != n || rows < 2 {
        return Err(GyreError::Config("fundamental_unit needs a ribbon mesh".into()));
    }
    let quad = TanhSinh::default();
    let center = immersion_at(data, BASE_POINT, &quad)?;
    let inv = Isometry::Inversion { center };

    let mut mesh = ribbon.clone();
    mesh.vertices.extend(ribbon.vertices.iter().map(|&p| inv.apply(p)));
    mesh.params.extend(ribbon.params.iter().map(|&z| C::new(0.5, 0.0) - z));
    mesh.quads
        .extend(ribbon.quads.iter().map(|q| [q[3] + n, q[2] + n, q[1] + n, q[0] + n]));
    let copy: Vec<_> = ribbon
        .boundary_loops
        .iter()
        .map(|(name, l)| (format!("{name}'"), l.iter().map(|i| i + n).collect()))
        .collect();
    mesh.boundary_loops.extend(copy);

    // Lower-boundary sample x of the first copy meets sample 1/2 - x of the
    // second one, i.e. column j meets column `per_edge - 1 - j`.
    let dx = (ribbon.params[1] - ribbon.params[0]).re;
    let per_edge = (0.5 / dx).round() as i64;
    let mut worst = 0.0f64;
    for j in 0..cols as i64 {
        let partner = per_edge - 1 - j;
        if partner < 0 || partner >= cols as i64 {
            continue;
        }
        let a = mesh.vertices[j as usize];
        let b = mesh.vertices[n + partner as usize];
        worst = worst.max(norm(sub(a, b)));
    }
    let seam_deviation = worst / mesh.diameter().max(f64::MIN_POSITIVE);
    if seam_deviation > 1e-5 {
        return Err(GyreError::SeamMismatch(seam_deviation));
    }
    mesh.lattice_vectors = Some(lattice_vectors(data)?);
    Ok(FundamentalUnit {
        mesh,
        seam_deviation,
        inversion: inv,
    })
}

/// Lattice generators at a solved point: the screw translation composed to a
/// full turn, and the translations composing the inversion through the
/// image of `1/4` with those through the images of `3/4` and `tau/2 + 1/4`.
/// (The one through `tau/2 + 3/4` gives the vertical generator again.)
pub fn lattice_vectors(data: &WeierstrassData) -> Result<[Point; 3]> {
    let quad = TanhSinh::default();
    let p = data.family.strip_period();
    let top = data.tau.value() / 2.0;
    let vertical = data.displacement(BASE_POINT, BASE_POINT + p, &quad)?;
    let h1 = scale(data.displacement(BASE_POINT, C::new(0.75, 0.0), &quad)?, 2.0);
    let h2 = scale(data.displacement(BASE_POINT, top + 0.25, &quad)?, 2.0);
    Ok([vertical, h1, h2])
}

/// Height of the images of `0` and `(1 + tau) / 2` apart.
pub fn vertical_spacing(data: &WeierstrassData) -> f64 {
    (data.dh() * (1.0 + data.tau.value()) / 2.0).re
}

/// Spread of heights along a boundary loop.
pub fn height_spread(mesh: &Mesh, name: &str) -> Option<f64> {
    let l = mesh.boundary(name)?;
    let (lo, hi) = l.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
        let z = mesh.vertices[i][2];
        (lo.min(z), hi.max(z))
    });
    Some(hi - lo)
}

/// Deviation of a closed loop from invariance under rotation by
/// `2 pi / order` about the vertical line through its centroid, relative to
/// the loop diameter. Both rotation senses are tried.
pub fn rotational_deviation(mesh: &Mesh, name: &str, order: usize) -> Option<f64> {
    let l = mesh.boundary(name)?;
    if l.is_empty() || l.len() % order != 0 {
        return None;
    }
    let pts: Vec<Point> = l.iter().map(|&i| mesh.vertices[i]).collect();
    let c = scale(pts.iter().fold([0.0; 3], |a, &p| add(a, p)), 1.0 / pts.len() as f64);
    let shift = pts.len() / order;
    let best = [1.0, -1.0]
        .iter()
        .map(|sense| {
            let rot = Isometry::Screw {
                axis: [c[0], c[1]],
                angle: sense * 2.0 * PI / order as f64,
                offset: [0.0; 3],
            };
            (0..pts.len())
                .map(|i| norm(sub(rot.apply(pts[i]), pts[(i + shift) % pts.len()])))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    Some(best / diameter(pts.iter()).max(f64::MIN_POSITIVE))
}

/// Largest distance of a boundary sample from the chord joining the images
/// of the two branch points bounding its edge, relative to that chord.
/// Applies to meshes whose loops are rows of the strip grid.
pub fn straight_edge_deviation(mesh: &Mesh, data: &WeierstrassData, name: &str) -> Result<f64> {
    let l = mesh
        .boundary(name)
        .ok_or_else(|| GyreError::Config(format!("no boundary loop '{name}'")))?;
    let quad = TanhSinh::default();
    let first = mesh.params[l[0]];
    let base = if first.im.abs() < 1e-12 { C::new(0.0, 0.0) } else { data.tau.value() / 2.0 };
    let mut worst = 0.0f64;
    let mut cache: Option<(i64, Point, Point)> = None;
    for &i in l {
        let z = mesh.params[i];
        let edge = ((z.re - base.re) * 2.0).floor() as i64;
        let (a, b) = match cache {
            Some((kk, a, b)) if kk == edge => (a, b),
            _ => {
                let a = immersion_at(data, base + edge as f64 / 2.0, &quad)?;
                let b = immersion_at(data, base + (edge + 1) as f64 / 2.0, &quad)?;
                cache = Some((edge, a, b));
                (a, b)
            }
        };
        let d = sub(b, a);
        let off = norm(cross(sub(mesh.vertices[i], a), d)) / dot(d, d);
        worst = worst.max(off);
    }
    Ok(worst)
}

/// Half turn about the horizontal axis through the images of the fixed
/// points `(1 + tau) / 4` and `(1 + tau) / 4 + P / 2` of `z -> (1 + tau) / 2 - z`,
/// which swaps the two boundaries of the catenoid.
pub fn horizontal_half_turn(data: &WeierstrassData) -> Result<Isometry> {
    let quad = TanhSinh::default();
    let c = (1.0 + data.tau.value()) / 4.0;
    let a = immersion_at(data, c, &quad)?;
    let b = immersion_at(data, c + data.family.strip_period() / 2.0, &quad)?;
    Ok(Isometry::HalfTurn { point: a, dir: sub(b, a) })
}

/// Distance between each catenoid vertex moved by the horizontal half turn
/// and the vertex at the mirrored parameter, relative to the diameter.
pub fn half_turn_deviation(mesh: &Mesh, data: &WeierstrassData) -> Result<f64> {
    let iso = horizontal_half_turn(data)?;
    let (cols, rows) = mesh.grid;
    let per_edge = (0.5 * cols as f64 / data.family.strip_period()).round() as usize;
    let mut worst = 0.0f64;
    for k in 0..rows {
        for j in 0..cols {
            // x_j + x_j' = 1/2 mod P
            let jp = (per_edge + 2 * cols - 1 - j) % cols;
            let p = iso.apply(mesh.vertices[k * cols + j]);
            let q = mesh.vertices[(rows - 1 - k) * cols + jp];
            worst = worst.max(norm(sub(p, q)));
        }
    }
    Ok(worst / mesh.diameter().max(f64::MIN_POSITIVE))
}

/// Largest five-point Laplacian of the immersion over an axis-aligned
/// square of half-width `2h` around `center`. The coordinates of a minimal
/// surface are harmonic in a conformal parameter, so this tends to zero
/// like `h^2`.
pub fn laplacian_defect(data: &WeierstrassData, center: C, h: f64) -> Result<f64> {
    let quad = TanhSinh::default();
    let x0 = immersion_at(data, center, &quad)?;
    let at = |z: C| -> Result<Point> { Ok(add(x0, data.displacement(center, z, &quad)?)) };
    let mut worst = 0.0f64;
    for a in -1..=1 {
        for b in -1..=1 {
            let z = center + C::new(a as f64 * h, b as f64 * h);
            let p = at(z)?;
            let mut lap = scale(p, -4.0);
            for d in [C::new(h, 0.0), C::new(-h, 0.0), C::new(0.0, h), C::new(0.0, -h)] {
                lap = add(lap, at(z + d)?);
            }
            worst = worst.max(norm(lap) / (h * h));
        }
    }
    Ok(worst)
}

/// `x` with `digits` significant digits, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        format!("{mant}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| GyreError::io(path, e))
}

pub fn obj_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    if let Some(i) = mesh.info {
        let t = i.tau.value();
        let _ = writeln!(
            out,
            "# gyre family={} tau={}+{}i theta={}",
            i.family,
            format_sig(t.re, 12),
            format_sig(t.im, 12),
            format_sig(i.theta, 12)
        );
    }
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", format_sig(v[0], 9), format_sig(v[1], 9), format_sig(v[2], 9));
    }
    for q in &mesh.quads {
        let _ = writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    out
}

pub fn export_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    write_file(path, &obj_string(mesh))
}

/// Polylines scaled uniformly into a 1000 x 1000 box (y up), one path each,
/// with a circle of radius 3 at every vertex.
pub fn svg_string(polylines: &[FlatPolyline]) -> String {
    let all = polylines.iter().flat_map(|p| p.samples.iter().chain(p.vertices.iter()));
    let (mut lo, mut hi) = (C::new(f64::INFINITY, f64::INFINITY), C::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for z in all {
        lo = C::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = C::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im);
    let s = if span.is_finite() && span > 0.0 { 940.0 / span } else { 1.0 };
    let mid = (lo + hi) / 2.0;
    let map = |z: C| (500.0 + s * (z.re - mid.re), 500.0 - s * (z.im - mid.im));
    let mut out = String::new();
    out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\" width=\"1000\" height=\"1000\">\n");
    for p in polylines {
        let mut d = String::new();
        for (i, &z) in p.samples.iter().enumerate() {
            let (x, y) = map(z);
            let _ = write!(d, "{}{:.3} {:.3}", if i == 0 { "M" } else { " L" }, x, y);
        }
        let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>");
        for &z in &p.vertices {
            let (x, y) = map(z);
            let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3\" fill=\"red\"/>");
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn export_svg_flat(polylines: &[FlatPolyline], path: &Path) -> Result<()> {
    write_file(path, &svg_string(polylines))
}

pub const CSV_HEADER: &str = "re_tau,im_tau,theta,residual,psi_re,psi_im";

pub fn csv_string(curve: &FamilyCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        let row = [p.re_tau, p.im_tau, p.theta, p.residual, p.psi_re, p.psi_im].map(|x| format_sig(x, 12));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn export_csv_curve(curve: &FamilyCurve, path: &Path) -> Result<()> {
    write_file(path, &csv_string(curve))
}

/// Inverse of [`csv_string`].
pub fn parse_csv_curve(text: &str) -> Result<Vec<SolvedPoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(GyreError::Config("missing CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<f64> = l
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| GyreError::Config(format!("bad field '{s}': {e}"))))
                .collect::<Result<_>>()?;
            if f.len() != 6 {
                return Err(GyreError::Config(format!("expected 6 fields in '{l}'")));
            }
            Ok(SolvedPoint {
                re_tau: f[0],
                im_tau: f[1],
                theta: f[2],
                residual: f[3],
                psi_re: f[4],
                psi_im: f[5],
            })
        })
        .collect()
}

/// Describes the mesh source in one line, for logs.
pub fn describe(mesh: &Mesh) -> String {
    match mesh.info {
        Some(i) => format!(
            "{} tau={} theta={:.6}: {} vertices, {} quads",
            i.family,
            format_complex(i.tau.value()),
            i.theta,
            mesh.vertices.len(),
            mesh.quads.len()
        ),
        None => format!("{} vertices, {} quads", mesh.vertices.len(), mesh.quads.len()),
    }
}
