//! Riemannian metrics on the 2-torus in conformal and semi-geodesic form.
//!
//! Conformal model: `ds² = Λ(q1,q2)(dq1² + dq2²)`, `H = |p|²/(2Λ)`.
//! Semi-geodesic model: `ds² = g²(t,x) dt² + dx²`, `H = (p1²/g² + p2²)/2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;

/// Rectangular period lattice `L1 Z × L2 Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub l1: f64,
    pub l2: f64,
}

impl Lattice {
    pub fn new(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::Invalid(format!("lattice periods must be positive, got ({l1}, {l2})")));
        }
        Ok(Lattice { l1, l2 })
    }

    pub const fn unit() -> Self {
        Lattice { l1: 1.0, l2: 1.0 }
    }

    /// Node `(i, j)` of a regular `nx × ny` grid covering one fundamental cell.
    pub fn grid_point(&self, i: usize, j: usize, nx: usize, ny: usize) -> TorusPoint {
        TorusPoint::new(
            self.l1 * i as f64 / nx as f64,
            self.l2 * j as f64 / ny as f64,
        )
    }
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice::unit()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TorusPoint {
    pub u1: f64,
    pub u2: f64,
}

impl TorusPoint {
    pub const fn new(u1: f64, u2: f64) -> Self {
        TorusPoint { u1, u2 }
    }

    pub fn reduce(&self, lat: &Lattice) -> TorusPoint {
        TorusPoint::new(self.u1.rem_euclid(lat.l1), self.u2.rem_euclid(lat.l2))
    }

    /// Distance on the flat torus (shortest representative).
    pub fn torus_distance(&self, other: &TorusPoint, lat: &Lattice) -> f64 {
        let wrap = |d: f64, l: f64| {
            let d = d.rem_euclid(l);
            d.min(l - d)
        };
        wrap(self.u1 - other.u1, lat.l1).hypot(wrap(self.u2 - other.u2, lat.l2))
    }
}

/// Anything that yields a value with first and second partials at a point.
pub trait FieldSource: Send + Sync + fmt::Debug {
    fn eval(&self, p: TorusPoint) -> Jet;
}

#[derive(Debug)]
struct ConstantSource(f64);

impl FieldSource for ConstantSource {
    fn eval(&self, _p: TorusPoint) -> Jet {
        Jet::constant(self.0)
    }
}

#[derive(Debug)]
struct ExprSource(Expr);

impl FieldSource for ExprSource {
    fn eval(&self, p: TorusPoint) -> Jet {
        self.0.eval_field(p.u1, p.u2)
    }
}

type JetFn = dyn Fn(TorusPoint) -> Jet + Send + Sync;

struct FnSource {
    label: String,
    f: Box<JetFn>,
}

impl fmt::Debug for FnSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSource({})", self.label)
    }
}

impl FieldSource for FnSource {
    fn eval(&self, p: TorusPoint) -> Jet {
        (self.f)(p)
    }
}

/// A smooth scalar field on the torus with exact or tabulated partials.
///
/// Immutable and cheap to clone; evaluation is pure.
#[derive(Clone, Debug)]
pub struct ScalarField {
    source: Arc<dyn FieldSource>,
    lattice: Lattice,
}

impl ScalarField {
    pub fn constant(c: f64, lattice: Lattice) -> Self {
        ScalarField {
            source: Arc::new(ConstantSource(c)),
            lattice,
        }
    }

    pub fn expression(expr: Expr, lattice: Lattice) -> Self {
        ScalarField {
            source: Arc::new(ExprSource(expr)),
            lattice,
        }
    }

    pub fn parse(src: &str, lattice: Lattice) -> Result<Self> {
        Ok(Self::expression(Expr::parse(src)?, lattice))
    }

    /// Field from a closure returning the full jet. The closure must supply
    /// exact partials.
    pub fn from_fn<F>(label: impl Into<String>, lattice: Lattice, f: F) -> Self
    where
        F: Fn(TorusPoint) -> Jet + Send + Sync + 'static,
    {
        ScalarField {
            source: Arc::new(FnSource {
                label: label.into(),
                f: Box::new(f),
            }),
            lattice,
        }
    }

    pub fn from_source(source: Arc<dyn FieldSource>, lattice: Lattice) -> Self {
        ScalarField { source, lattice }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn eval(&self, p: TorusPoint) -> Jet {
        self.source.eval(p)
    }

    pub fn value(&self, p: TorusPoint) -> f64 {
        self.source.eval(p).v
    }

    /// Pointwise sum; lattices must agree.
    pub fn sum(&self, other: &ScalarField) -> ScalarField {
        let (a, b) = (self.clone(), other.clone());
        ScalarField::from_fn("sum", self.lattice, move |p| a.eval(p) + b.eval(p))
    }
}

/// One-variable profile `f(ξ)` used by Liouville metrics and simple waves.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    Expr(Expr),
    /// Closure returning `(f, f', f'')`.
    Custom(Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Expr(e) => write!(f, "Expr({e})"),
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Profile {
    pub fn parse(src: &str) -> Result<Self> {
        Ok(Profile::Expr(Expr::parse(src)?))
    }

    /// Compose with a jet-valued argument (chain rule through all orders).
    pub fn compose(&self, xi: Jet) -> Jet {
        match self {
            Profile::Constant(c) => Jet::constant(*c),
            Profile::Expr(e) => e.eval_profile(xi),
            Profile::Custom(f) => {
                let [f0, f1, f2] = f(xi.v);
                xi.chain(f0, f1, f2)
            }
        }
    }

    /// `(f, f', f'')` at a real argument.
    pub fn eval(&self, xi: f64) -> [f64; 3] {
        let j = self.compose(Jet::var1(xi));
        [j.v, j.d1, j.d11]
    }

    pub fn value(&self, xi: f64) -> f64 {
        self.compose(Jet::constant(xi)).v
    }

    pub fn describe(&self) -> String {
        match self {
            Profile::Constant(c) => format!("{c}"),
            Profile::Expr(e) => e.source().to_string(),
            Profile::Custom(_) => "<custom>".to_string(),
        }
    }
}

/// `ds² = Λ (dq1² + dq2²)`.
#[derive(Clone, Debug)]
pub struct ConformalMetric {
    pub lambda: ScalarField,
}

/// `ds² = g² dt² + dx²`.
#[derive(Clone, Debug)]
pub struct SemiGeodesicMetric {
    pub g: ScalarField,
}

const PROBE: usize = 64;

impl ConformalMetric {
    /// Checks `Λ > 0` on a probe grid.
    pub fn new(lambda: ScalarField) -> Result<Self> {
        probe_positive(&lambda, "conformal factor")?;
        Ok(ConformalMetric { lambda })
    }

    pub fn new_unchecked(lambda: ScalarField) -> Self {
        ConformalMetric { lambda }
    }
}

impl SemiGeodesicMetric {
    /// Checks `g > 0` on a probe grid.
    pub fn new(g: ScalarField) -> Result<Self> {
        probe_positive(&g, "g")?;
        Ok(SemiGeodesicMetric { g })
    }

    pub fn new_unchecked(g: ScalarField) -> Self {
        SemiGeodesicMetric { g }
    }
}

fn probe_positive(f: &ScalarField, what: &'static str) -> Result<()> {
    let rep = metric_positivity_scan(f, PROBE, PROBE);
    if rep.pass {
        Ok(())
    } else {
        Err(Error::NonPositive {
            what,
            value: rep.min,
            u1: rep.at.u1,
            u2: rep.at.u2,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Conformal,
    SemiGeodesic,
}

#[derive(Clone, Debug)]
pub enum Metric {
    Conformal(ConformalMetric),
    SemiGeodesic(SemiGeodesicMetric),
}

impl Metric {
    pub fn model(&self) -> Model {
        match self {
            Metric::Conformal(_) => Model::Conformal,
            Metric::SemiGeodesic(_) => Model::SemiGeodesic,
        }
    }

    /// The field defining the metric (`Λ` or `g`).
    pub fn field(&self) -> &ScalarField {
        match self {
            Metric::Conformal(m) => &m.lambda,
            Metric::SemiGeodesic(m) => &m.g,
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.field().lattice()
    }

    /// Divisor turning `p1` into the first basis momentum of coefficient
    /// polynomials: `g` in the semi-geodesic model, `1` in the conformal one.
    pub fn momentum_scale(&self, p: TorusPoint) -> f64 {
        match self {
            Metric::Conformal(_) => 1.0,
            Metric::SemiGeodesic(m) => m.g.value(p),
        }
    }

    pub fn hamiltonian(&self, q: TorusPoint, p: [f64; 2]) -> f64 {
        match self {
            Metric::Conformal(m) => (p[0] * p[0] + p[1] * p[1]) / (2.0 * m.lambda.value(q)),
            Metric::SemiGeodesic(m) => {
                let g = m.g.value(q);
                0.5 * (p[0] * p[0] / (g * g) + p[1] * p[1])
            }
        }
    }

    /// `(H, ∂H/∂q, ∂H/∂p)` and the defining field value (for positivity checks).
    pub fn hamiltonian_gradient(&self, q: TorusPoint, p: [f64; 2]) -> (f64, [f64; 2], [f64; 2], f64) {
        match self {
            Metric::Conformal(m) => {
                let l = m.lambda.eval(q);
                let pp = p[0] * p[0] + p[1] * p[1];
                let h = pp / (2.0 * l.v);
                let k = -pp / (2.0 * l.v * l.v);
                (h, [k * l.d1, k * l.d2], [p[0] / l.v, p[1] / l.v], l.v)
            }
            Metric::SemiGeodesic(m) => {
                let g = m.g.eval(q);
                let g2 = g.v * g.v;
                let h = 0.5 * (p[0] * p[0] / g2 + p[1] * p[1]);
                let k = -p[0] * p[0] / (g2 * g.v);
                (h, [k * g.d1, k * g.d2], [p[0] / g2, p[1]], g.v)
            }
        }
    }
}

/// Description of a Liouville metric `Λ = f1(m1 q1 + n1 q2) + f2(m2 q1 + n2 q2)`.
#[derive(Clone, Debug)]
pub struct LiouvilleSpec {
    pub f1: Profile,
    pub f2: Profile,
    pub m1: f64,
    pub n1: f64,
    pub m2: f64,
    pub n2: f64,
    pub lattice: Lattice,
}

impl LiouvilleSpec {
    pub fn new(f1: Profile, f2: Profile, dirs: [f64; 4], lattice: Lattice) -> Self {
        LiouvilleSpec {
            f1,
            f2,
            m1: dirs[0],
            n1: dirs[1],
            m2: dirs[2],
            n2: dirs[3],
            lattice,
        }
    }

    /// The same metric with the two summands exchanged.
    pub fn swapped(&self) -> Self {
        LiouvilleSpec {
            f1: self.f2.clone(),
            f2: self.f1.clone(),
            m1: self.m2,
            n1: self.n2,
            m2: self.m1,
            n2: self.n1,
            lattice: self.lattice,
        }
    }

    /// Orthogonality defect `m1 m2 + n1 n2`, relative to the direction lengths.
    pub fn orthogonality_defect(&self) -> f64 {
        let dot = self.m1 * self.m2 + self.n1 * self.n2;
        let norm = self.m1.hypot(self.n1) * self.m2.hypot(self.n2);
        if norm == 0.0 {
            f64::INFINITY
        } else {
            dot / norm
        }
    }

    pub fn first_phase(&self, q: TorusPoint) -> Jet {
        Jet::linear(self.m1, self.n1, q.u1, q.u2)
    }

    pub fn second_phase(&self, q: TorusPoint) -> Jet {
        Jet::linear(self.m2, self.n2, q.u1, q.u2)
    }
}

/// Build the conformal factor of a Liouville metric.
pub fn liouville_conformal_factor(spec: &LiouvilleSpec) -> Result<ConformalMetric> {
    let defect = spec.orthogonality_defect();
    if !(defect.abs() <= 1e-12) {
        return Err(Error::DirectionConstraint(defect));
    }
    let s = spec.clone();
    let field = ScalarField::from_fn("liouville", spec.lattice, move |q| {
        s.f1.compose(s.first_phase(q)) + s.f2.compose(s.second_phase(q))
    });
    ConformalMetric::new(field)
}

const D1_6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2_6: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

#[derive(Debug)]
struct SampledSource {
    nx: usize,
    ny: usize,
    lattice: Lattice,
    // value, d1, d2, d11, d12, d22 at the nodes, row-major in (i, j)
    nodes: [Vec<f64>; 6],
}

impl SampledSource {
    fn at(&self, k: usize, i: isize, j: isize) -> f64 {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.nodes[k][i * self.ny + j]
    }
}

fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

impl FieldSource for SampledSource {
    fn eval(&self, p: TorusPoint) -> Jet {
        let hx = self.lattice.l1 / self.nx as f64;
        let hy = self.lattice.l2 / self.ny as f64;
        let p = p.reduce(&self.lattice);
        let (fx, fy) = (p.u1 / hx, p.u2 / hy);
        let (i0, j0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as isize, j0 as isize);
        // exact node hits need no interpolation
        if tx == 0.0 && ty == 0.0 {
            return Jet::from_array(std::array::from_fn(|k| self.at(k, i0, j0)));
        }
        let (wx, wy) = (cubic_weights(tx), cubic_weights(ty));
        let mut out = [0.0; 6];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (a, wa) in wx.iter().enumerate() {
                let mut row = 0.0;
                for (b, wb) in wy.iter().enumerate() {
                    row += wb * self.at(k, i0 - 1 + a as isize, j0 - 1 + b as isize);
                }
                acc += wa * row;
            }
            *o = acc;
        }
        Jet::from_array(out)
    }
}

pub const MIN_SAMPLES: usize = 8;

/// Tabulated periodic field. `values[i * ny + j]` is the sample at node
/// `(i L1/nx, j L2/ny)`. Partials at the nodes come from 6th-order periodic
/// central differences; off-node values use periodic bicubic interpolation.
pub fn field_from_samples(values: &[f64], nx: usize, ny: usize, lattice: Lattice) -> Result<ScalarField> {
    if nx < MIN_SAMPLES || ny < MIN_SAMPLES {
        return Err(Error::GridTooSmall {
            nx,
            ny,
            min: MIN_SAMPLES,
        });
    }
    if values.len() != nx * ny {
        return Err(Error::Invalid(format!(
            "expected {} samples for a {nx}x{ny} grid, got {}",
            nx * ny,
            values.len()
        )));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    let hx = lattice.l1 / nx as f64;
    let hy = lattice.l2 / ny as f64;
    let idx = |i: isize, j: isize| {
        i.rem_euclid(nx as isize) as usize * ny + j.rem_euclid(ny as isize) as usize
    };
    let d_first = |f: &[f64], i: usize, j: usize, axis: usize| -> f64 {
        let (i, j) = (i as isize, j as isize);
        let mut acc = 0.0;
        for (k, c) in D1_6.iter().enumerate() {
            let k = k as isize + 1;
            let (fp, fm) = if axis == 0 {
                (f[idx(i + k, j)], f[idx(i - k, j)])
            } else {
                (f[idx(i, j + k)], f[idx(i, j - k)])
            };
            acc += c * (fp - fm);
        }
        acc / if axis == 0 { hx } else { hy }
    };
    let d_second = |f: &[f64], i: usize, j: usize, axis: usize| -> f64 {
        let (i, j) = (i as isize, j as isize);
        let mut acc = D2_6[0] * f[idx(i, j)];
        for (k, c) in D2_6.iter().enumerate().skip(1) {
            let k = k as isize;
            let (fp, fm) = if axis == 0 {
                (f[idx(i + k, j)], f[idx(i - k, j)])
            } else {
                (f[idx(i, j + k)], f[idx(i, j - k)])
            };
            acc += c * (fp + fm);
        }
        let h = if axis == 0 { hx } else { hy };
        acc / (h * h)
    };
    let mut d1 = vec![0.0; nx * ny];
    let mut d2 = vec![0.0; nx * ny];
    let mut d11 = vec![0.0; nx * ny];
    let mut d22 = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            d1[i * ny + j] = d_first(values, i, j, 0);
            d2[i * ny + j] = d_first(values, i, j, 1);
            d11[i * ny + j] = d_second(values, i, j, 0);
            d22[i * ny + j] = d_second(values, i, j, 1);
        }
    }
    let mut d12 = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            d12[i * ny + j] = d_first(&d1, i, j, 1);
        }
    }
    let src = SampledSource {
        nx,
        ny,
        lattice,
        nodes: [values.to_vec(), d1, d2, d11, d12, d22],
    };
    Ok(ScalarField::from_source(Arc::new(src), lattice))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub min: f64,
    pub at: TorusPoint,
    pub pass: bool,
}

/// Dense sampling of a field on an `nx × ny` grid; fails when `min ≤ 0`.
pub fn metric_positivity_scan(field: &ScalarField, nx: usize, ny: usize) -> PositivityReport {
    let nx = nx.max(2);
    let ny = ny.max(2);
    let lat = field.lattice();
    let mut best = (f64::INFINITY, TorusPoint::default());
    for i in 0..nx {
        for j in 0..ny {
            let p = lat.grid_point(i, j, nx, ny);
            let v = field.value(p);
            // NaN counts as a failure
            if !(v >= best.0) {
                best = (v, p);
            }
        }
    }
    PositivityReport {
        min: best.0,
        at: best.1,
        pass: best.0 > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_plus_sin() -> LiouvilleSpec {
        LiouvilleSpec::new(
            Profile::parse("2+cos(2*pi*xi)").unwrap(),
            Profile::parse("2+sin(2*pi*xi)").unwrap(),
            [1.0, 1.0, 1.0, -1.0],
            Lattice::unit(),
        )
    }

    #[test]
    fn liouville_constants() {
        let spec = LiouvilleSpec::new(
            Profile::Constant(1.0),
            Profile::Constant(2.0),
            [1.0, 1.0, 1.0, -1.0],
            Lattice::unit(),
        );
        let m = liouville_conformal_factor(&spec).unwrap();
        for p in [TorusPoint::new(0.0, 0.0), TorusPoint::new(0.3, 0.9)] {
            assert_eq!(m.lambda.eval(p), Jet::constant(3.0));
        }
    }

    #[test]
    fn liouville_symmetric_point() {
        let spec = LiouvilleSpec::new(
            Profile::parse("2+cos(2*pi*xi)").unwrap(),
            Profile::Constant(0.0),
            [1.0, 1.0, 1.0, -1.0],
            Lattice::unit(),
        );
        let m = liouville_conformal_factor(&spec).unwrap();
        let j = m.lambda.eval(TorusPoint::new(0.0, 0.0));
        assert_eq!(j.v, 3.0);
        assert_eq!(j.d2, 0.0);
    }

    #[test]
    fn liouville_derivative_matches_central_differences() {
        let m = liouville_conformal_factor(&cos_plus_sin()).unwrap();
        let h = 1e-5;
        for &(a, b) in &[(0.1, 0.2), (0.37, 0.81), (0.9, 0.05)] {
            let p = TorusPoint::new(a, b);
            let fd = (m.lambda.value(TorusPoint::new(a + h, b))
                - m.lambda.value(TorusPoint::new(a - h, b)))
                / (2.0 * h);
            let exact = m.lambda.eval(p).d1;
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn liouville_rejects_non_orthogonal_directions() {
        let mut spec = cos_plus_sin();
        spec.n2 = 0.5;
        assert!(matches!(
            liouville_conformal_factor(&spec),
            Err(Error::DirectionConstraint(_))
        ));
    }

    #[test]
    fn liouville_rejects_non_positive_factor() {
        let spec = LiouvilleSpec::new(
            Profile::parse("cos(2*pi*xi)").unwrap(),
            Profile::Constant(0.0),
            [1.0, 0.0, 0.0, 1.0],
            Lattice::unit(),
        );
        assert!(matches!(
            liouville_conformal_factor(&spec),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn axis_aligned_directions_are_accepted() {
        let spec = LiouvilleSpec::new(
            Profile::Constant(1.0),
            Profile::Constant(1.0),
            [1.0, 0.0, 0.0, 1.0],
            Lattice::unit(),
        );
        assert!(liouville_conformal_factor(&spec).is_ok());
    }

    #[test]
    fn samples_constant_grid() {
        let f = field_from_samples(&vec![5.0; 100], 10, 10, Lattice::unit()).unwrap();
        for p in [TorusPoint::new(0.0, 0.0), TorusPoint::new(0.123, 0.777)] {
            let j = f.eval(p);
            assert!((j.v - 5.0).abs() < 1e-13);
            for d in [j.d1, j.d2, j.d11, j.d12, j.d22] {
                assert!(d.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn samples_sine_derivative() {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .flat_map(|i| {
                let x = i as f64 / n as f64;
                std::iter::repeat((2.0 * PI * x).sin()).take(n)
            })
            .collect();
        let f = field_from_samples(&vals, n, n, Lattice::unit()).unwrap();
        for i in 0..n {
            let x = i as f64 / n as f64;
            let j = f.eval(TorusPoint::new(x, 0.5));
            assert!((j.d1 - 2.0 * PI * (2.0 * PI * x).cos()).abs() <= 1e-6);
            assert!(j.d2.abs() <= 1e-12);
        }
    }

    #[test]
    fn samples_preconditions() {
        assert!(matches!(
            field_from_samples(&[1.0; 16], 4, 4, Lattice::unit()),
            Err(Error::GridTooSmall { .. })
        ));
        let mut v = vec![1.0; 64];
        v[10] = f64::NAN;
        assert_eq!(
            field_from_samples(&v, 8, 8, Lattice::unit()).unwrap_err(),
            Error::NonFinite(10)
        );
    }

    #[test]
    fn positivity_scan_reports() {
        let c = ScalarField::constant(3.0, Lattice::unit());
        let r = metric_positivity_scan(&c, 8, 8);
        assert!(r.pass && r.min == 3.0);
        let g = ScalarField::parse("1 + 2*sin(2*pi*x)", Lattice::unit()).unwrap();
        let r = metric_positivity_scan(&g, 64, 64);
        assert!(!r.pass && r.min < 0.0);
        assert!(SemiGeodesicMetric::new(g).is_err());
    }

    #[test]
    fn torus_distance_wraps() {
        let lat = Lattice::new(1.0, 2.0).unwrap();
        let a = TorusPoint::new(0.05, 1.95);
        let b = TorusPoint::new(0.95, 0.05);
        assert!((a.torus_distance(&b, &lat) - (0.1f64).hypot(0.1)).abs() < 1e-12);
        assert!(Lattice::new(0.0, 1.0).is_err());
    }
}
