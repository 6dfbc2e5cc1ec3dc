//! Closed-form quadratic, cubic and quartic solvers with Newton polish, and
//! root-pattern classification.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_CLASS_TOL: f64 = 1e-7;

/// Relative size below which a leading coefficient counts as vanished.
const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    /// Real roots, ascending, repeated according to multiplicity.
    pub real_roots: Vec<f64>,
    /// Pairs `α ± iβ` stored as `(α, β)` with `β > 0`.
    pub complex_pairs: Vec<(f64, f64)>,
    pub real_repeated: Vec<bool>,
    pub pair_repeated: Vec<bool>,
    /// Nominal degree of the input polynomial.
    pub degree: usize,
    /// Leading coefficient divided by the largest coefficient magnitude.
    pub relative_leading: f64,
    /// Largest relative root condition number.
    pub condition: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootClass {
    Hyperbolic,
    Elliptic,
    Degenerate,
}

impl RootClass {
    pub fn label(&self) -> &'static str {
        match self {
            RootClass::Hyperbolic => "hyperbolic",
            RootClass::Elliptic => "elliptic",
            RootClass::Degenerate => "degenerate",
        }
    }
}

impl RootSet {
    pub fn count(&self) -> usize {
        self.real_roots.len() + 2 * self.complex_pairs.len()
    }

    pub fn degree_dropped(&self) -> bool {
        self.count() < self.degree
    }

    /// Pair members first (`α + iβ`, `α − iβ`), then the real roots ascending.
    pub fn all_roots(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.count());
        for &(a, b) in &self.complex_pairs {
            out.push(Complex64::new(a, b));
            out.push(Complex64::new(a, -b));
        }
        out.extend(self.real_roots.iter().map(|&r| Complex64::new(r, 0.0)));
        out
    }

    /// Coefficients of `∏ (s − root)`, lowest degree first.
    pub fn monic_expansion(&self) -> Vec<f64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for z in self.all_roots() {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * z;
            }
            c = next;
        }
        c.into_iter().map(|z| z.re).collect()
    }
}

fn trim_check(c: &[f64]) -> Result<f64> {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite polynomial coefficient".into()));
    }
    Ok(scale)
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

fn horner_real(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

fn polish_real(c: &[f64], mut x: f64) -> f64 {
    let (mut px, _) = horner_real(c, x);
    for _ in 0..4 {
        let (p, dp) = horner_real(c, x);
        if dp == 0.0 || p == 0.0 {
            break;
        }
        let y = x - p / dp;
        let (py, _) = horner_real(c, y);
        if py.abs() < px.abs() {
            x = y;
            px = py;
        } else {
            break;
        }
    }
    x
}

fn polish_complex(c: &[f64], mut z: Complex64) -> Complex64 {
    let (mut pz, _) = horner(c, z);
    for _ in 0..4 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let w = z - p / dp;
        let (pw, _) = horner(c, w);
        if pw.norm() < pz.norm() {
            z = w;
            pz = pw;
        } else {
            break;
        }
    }
    z
}

/// Roots of a real quadratic `x² + b x + c` (monic).
enum Quad {
    Real(f64, f64),
    Pair(f64, f64),
}

fn monic_quadratic(b: f64, c: f64) -> Quad {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let q = if b == 0.0 { -0.5 * disc.sqrt() } else { q };
        if q == 0.0 {
            Quad::Real(0.0, 0.0)
        } else {
            Quad::Real(q, c / q)
        }
    } else {
        Quad::Pair(-0.5 * b, 0.5 * (-disc).sqrt())
    }
}

struct Collector {
    reals: Vec<f64>,
    pairs: Vec<(f64, f64)>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            reals: Vec::new(),
            pairs: Vec::new(),
        }
    }

    fn push(&mut self, q: Quad) {
        match q {
            Quad::Real(a, b) => {
                self.reals.push(a);
                self.reals.push(b);
            }
            Quad::Pair(a, b) => self.pairs.push((a, b)),
        }
    }

    fn finish(mut self, c: &[f64], degree: usize, scale: f64) -> RootSet {
        let lead = c.iter().rposition(|&x| x != 0.0).unwrap_or(0);
        let poly = &c[..=lead];
        for r in self.reals.iter_mut() {
            *r = polish_real(poly, *r);
        }
        for p in self.pairs.iter_mut() {
            let z = polish_complex(poly, Complex64::new(p.0, p.1));
            *p = (z.re, z.im.abs());
        }
        self.reals.sort_by(|a, b| a.total_cmp(b));
        self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut rs = RootSet {
            real_roots: self.reals,
            complex_pairs: self.pairs,
            real_repeated: Vec::new(),
            pair_repeated: Vec::new(),
            degree,
            relative_leading: c[degree] / scale,
            condition: 0.0,
        };
        let all = rs.all_roots();
        let near = |z: Complex64, skip: usize| {
            all.iter()
                .enumerate()
                .any(|(k, w)| k != skip && (z - w).norm() <= DEFAULT_CLASS_TOL * (1.0 + z.norm()))
        };
        let np = 2 * rs.complex_pairs.len();
        rs.pair_repeated = rs
            .complex_pairs
            .iter()
            .enumerate()
            .map(|(k, &(_, b))| b <= DEFAULT_CLASS_TOL || near(all[2 * k], 2 * k))
            .collect();
        rs.real_repeated = (0..rs.real_roots.len()).map(|k| near(all[np + k], np + k)).collect();
        rs.condition = all
            .iter()
            .map(|&z| {
                let (_, dp) = horner(poly, z);
                let mag: f64 = poly
                    .iter()
                    .enumerate()
                    .map(|(k, ck)| ck.abs() * z.norm().powi(k as i32))
                    .sum();
                mag / (dp.norm() * z.norm().max(1.0))
            })
            .fold(0.0, f64::max);
        rs
    }
}

/// Roots of `c0 + c1 s + c2 s²`.
pub fn solve_quadratic(c: [f64; 3]) -> Result<RootSet> {
    let scale = trim_check(&c)?;
    let mut col = Collector::new();
    if c[2].abs() > DROP_TOL * scale {
        col.push(monic_quadratic(c[1] / c[2], c[0] / c[2]));
    } else if c[1] != 0.0 {
        col.reals.push(-c[0] / c[1]);
    }
    Ok(col.finish(&c, 2, scale))
}

fn depressed_cubic_real_root(p: f64, q: f64) -> f64 {
    let d = q * q / 4.0 + p * p * p / 27.0;
    if d >= 0.0 {
        let a = -q.signum() * (q.abs() / 2.0 + d.sqrt()).cbrt();
        if a == 0.0 {
            0.0
        } else {
            a - p / (3.0 * a)
        }
    } else {
        // three real roots; return the largest
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    }
}

/// Real root of the monic cubic `s³ + b s² + c s + d`, with the deflated
/// quadratic `s² + e s + f`.
fn cubic_split(b: f64, c: f64, d: f64) -> (f64, f64, f64) {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let r = polish_real(&[d, c, b, 1.0], depressed_cubic_real_root(p, q) - b / 3.0);
    let e = b + r;
    // pick the better-conditioned formula for the constant term
    let f = if r.abs() > 1.0 && r != 0.0 { -d / r } else { c + e * r };
    (r, e, f)
}

/// Roots of `c0 + c1 s + c2 s² + c3 s³`.
pub fn solve_cubic(c: [f64; 4]) -> Result<RootSet> {
    let scale = trim_check(&c)?;
    if c[3].abs() <= DROP_TOL * scale {
        let mut rs = solve_quadratic([c[0], c[1], c[2]])?;
        rs.degree = 3;
        rs.relative_leading = c[3] / scale;
        return Ok(rs);
    }
    let (b, cc, d) = (c[2] / c[3], c[1] / c[3], c[0] / c[3]);
    let (r, e, f) = cubic_split(b, cc, d);
    let mut col = Collector::new();
    col.reals.push(r);
    col.push(monic_quadratic(e, f));
    Ok(col.finish(&c, 3, scale))
}

/// Roots of `c0 + c1 s + c2 s² + c3 s³ + c4 s⁴` (Ferrari).
pub fn solve_quartic(c: [f64; 5]) -> Result<RootSet> {
    let scale = trim_check(&c)?;
    if c[4].abs() <= DROP_TOL * scale {
        let mut rs = solve_cubic([c[0], c[1], c[2], c[3]])?;
        rs.degree = 4;
        rs.relative_leading = c[4] / scale;
        return Ok(rs);
    }
    let (b, cc, d, e) = (c[3] / c[4], c[2] / c[4], c[1] / c[4], c[0] / c[4]);
    // s = y − b/4: y⁴ + p y² + q y + r
    let sh = b / 4.0;
    let p = cc - 6.0 * sh * sh;
    let q = d - 2.0 * cc * sh + 8.0 * sh * sh * sh;
    let r = e - d * sh + cc * sh * sh - 3.0 * sh.powi(4);
    let mut col = Collector::new();
    let qscale = 1.0 + p.abs() + r.abs().sqrt();
    if q.abs() <= 1e-14 * qscale * qscale.sqrt() {
        // biquadratic
        match monic_quadratic(p, r) {
            Quad::Real(z1, z2) => {
                for z in [z1, z2] {
                    if z >= 0.0 {
                        col.reals.push(z.sqrt() - sh);
                        col.reals.push(-z.sqrt() - sh);
                    } else {
                        col.pairs.push((-sh, (-z).sqrt()));
                    }
                }
            }
            Quad::Pair(re, im) => {
                // y² = re ± i im
                let w = Complex64::new(re, im).sqrt();
                col.pairs.push((w.re - sh, w.im.abs()));
                col.pairs.push((-w.re - sh, w.im.abs()));
            }
        }
    } else {
        // resolvent: 8m³ + 8p m² + (2p² − 8r) m − q² = 0, take the largest real root (> 0)
        let m = largest_resolvent_root(p, r, q);
        let w = (2.0 * m).sqrt();
        let t = q / (2.0 * w);
        for (sgn, u) in [(1.0, p / 2.0 + m - t), (-1.0, p / 2.0 + m + t)] {
            match monic_quadratic(sgn * w, u) {
                Quad::Real(y1, y2) => {
                    col.reals.push(y1 - sh);
                    col.reals.push(y2 - sh);
                }
                Quad::Pair(re, im) => col.pairs.push((re - sh, im)),
            }
        }
    }
    Ok(col.finish(&c, 4, scale))
}

fn largest_resolvent_root(p: f64, r: f64, q: f64) -> f64 {
    let cub = [-q * q / 8.0, p * p / 4.0 - r, p, 1.0];
    let (m0, e, f) = cubic_split(p, p * p / 4.0 - r, -q * q / 8.0);
    let mut best = m0;
    if let Quad::Real(a, b) = monic_quadratic(e, f) {
        best = best.max(a).max(b);
    }
    // q ≠ 0 forces a strictly positive root
    polish_real(&cub, best).max(f64::MIN_POSITIVE)
}

/// Dispatch on the length of the coefficient slice (3, 4 or 5).
pub fn solve_poly(c: &[f64]) -> Result<RootSet> {
    match c.len() {
        3 => solve_quadratic([c[0], c[1], c[2]]),
        4 => solve_cubic([c[0], c[1], c[2], c[3]]),
        5 => solve_quartic([c[0], c[1], c[2], c[3], c[4]]),
        n => Err(Error::UnsupportedDegree(n.saturating_sub(1))),
    }
}

pub fn classify_roots(rs: &RootSet, tol: f64) -> RootClass {
    if rs.degree_dropped() || rs.relative_leading.abs() < tol {
        return RootClass::Degenerate;
    }
    let all = rs.all_roots();
    if rs.complex_pairs.iter().any(|&(_, b)| b < tol) {
        return RootClass::Degenerate;
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if (all[i] - all[j]).norm() < tol {
                return RootClass::Degenerate;
            }
        }
    }
    match rs.complex_pairs.len() {
        0 => RootClass::Hyperbolic,
        1 => RootClass::Elliptic,
        _ => RootClass::Degenerate,
    }
}
