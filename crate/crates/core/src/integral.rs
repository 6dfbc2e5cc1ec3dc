//! Candidate polynomial integrals, the Poisson-bracket residual, hat
//! polynomials and Kolokoltsov coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::metric::{
    ConformalMetric, Lattice, LiouvilleSpec, Metric, Model, ScalarField, SemiGeodesicMetric,
    TorusPoint,
};

/// Homogeneous polynomial of degree `n` in two variables `(X, Y)`;
/// `coeffs[k]` multiplies `X^(n-k) Y^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPoly {
    pub coeffs: Vec<f64>,
}

impl HomPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "homogeneous polynomial needs at least one coefficient");
        HomPoly { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        HomPoly::new(vec![0.0; n + 1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `2H = X² + Y²`.
    pub fn two_h() -> Self {
        HomPoly::new(vec![1.0, 0.0, 1.0])
    }

    /// `u X + v Y`.
    pub fn linear(u: f64, v: f64) -> Self {
        HomPoly::new(vec![u, v])
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let n = self.degree() as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * x.powi(n - k as i32) * y.powi(k as i32))
            .sum()
    }

    pub fn add(&self, other: &HomPoly) -> HomPoly {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        HomPoly::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &HomPoly) -> HomPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> HomPoly {
        HomPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        HomPoly::new(out)
    }

    pub fn pow(&self, k: u32) -> HomPoly {
        let mut out = HomPoly::new(vec![1.0]);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn d_x(&self) -> HomPoly {
        let n = self.degree();
        if n == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new((0..n).map(|k| (n - k) as f64 * self.coeffs[k]).collect())
    }

    pub fn d_y(&self) -> HomPoly {
        let n = self.degree();
        if n == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new((0..n).map(|k| (k + 1) as f64 * self.coeffs[k + 1]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// The hat polynomial `Σ c_k s^k` obtained by setting `X = 1, Y = s`.
    pub fn dehomogenize(&self) -> HatPoly {
        HatPoly::new(self.coeffs.clone())
    }
}

/// A candidate integral `F = Σ a_k X^(n-k) p2^k` with coefficient fields.
///
/// In the semi-geodesic model `X = p1/g`; in the conformal model `X = p1`.
#[derive(Clone, Debug)]
pub struct IntegralCoeffs {
    degree: usize,
    coeffs: Vec<ScalarField>,
    model: Model,
    normalized: bool,
}

impl IntegralCoeffs {
    pub fn new(model: Model, coeffs: Vec<ScalarField>) -> Result<Self> {
        let degree = coeffs.len().wrapping_sub(1);
        if !(1..=4).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        Ok(IntegralCoeffs {
            degree,
            coeffs,
            model,
            normalized: false,
        })
    }

    /// Semi-geodesic integral with `a_(n-1) = g` and `a_n = 1`; `lower` holds
    /// `a_0..a_(n-2)`.
    pub fn normalized(g: &ScalarField, lower: Vec<ScalarField>) -> Result<Self> {
        let mut coeffs = lower;
        let lat = g.lattice();
        coeffs.push(g.clone());
        coeffs.push(ScalarField::constant(1.0, lat));
        let mut f = IntegralCoeffs::new(Model::SemiGeodesic, coeffs)?;
        f.normalized = true;
        Ok(f)
    }

    /// Constant coefficients.
    pub fn constant(model: Model, a: &[f64], lattice: Lattice) -> Result<Self> {
        IntegralCoeffs::new(model, a.iter().map(|&c| ScalarField::constant(c, lattice)).collect())
    }

    pub fn parse(model: Model, sources: &[&str], lattice: Lattice) -> Result<Self> {
        let coeffs = sources
            .iter()
            .map(|s| ScalarField::parse(s, lattice))
            .collect::<Result<Vec<_>>>()?;
        IntegralCoeffs::new(model, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn coeff_fields(&self) -> &[ScalarField] {
        &self.coeffs
    }

    pub fn jets_at(&self, q: TorusPoint) -> Vec<Jet> {
        self.coeffs.iter().map(|c| c.eval(q)).collect()
    }

    pub fn values_at(&self, q: TorusPoint) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.value(q)).collect()
    }

    /// The momentum polynomial at a base point (in the model's `(X, p2)` basis).
    pub fn hom_poly_at(&self, q: TorusPoint) -> HomPoly {
        HomPoly::new(self.values_at(q))
    }

    /// Value of `F` at a phase-space point.
    pub fn eval(&self, metric: &Metric, q: TorusPoint, p: [f64; 2]) -> Result<f64> {
        if metric.model() != self.model {
            return Err(model_mismatch(self.model, metric.model()));
        }
        let x = p[0] / metric.momentum_scale(q);
        Ok(self.hom_poly_at(q).eval(x, p[1]))
    }

    /// Largest `|a_(n-1) - g|` and `|a_n - 1|` over the given points.
    pub fn normalization_defect(&self, metric: &SemiGeodesicMetric, points: &[TorusPoint]) -> f64 {
        let n = self.degree;
        points.iter().fold(0.0, |m: f64, &q| {
            let a = self.values_at(q);
            m.max((a[n - 1] - metric.g.value(q)).abs()).max((a[n] - 1.0).abs())
        })
    }
}

fn model_mismatch(a: Model, b: Model) -> Error {
    Error::ModelMismatch(format!("integral is in the {a:?} model, metric is {b:?}"))
}

pub fn hamiltonian_eval(metric: &Metric, q: TorusPoint, p: [f64; 2]) -> f64 {
    metric.hamiltonian(q, p)
}

/// Coefficients of the degree-(n+1) polynomial `{F, H}` at a base point.
///
/// Semi-geodesic model: basis `(p1/g)^(n+1-j) p2^j`, so a zero vector is
/// exactly system `U_t + A(U) U_x = 0` at the point. Conformal model: basis
/// `p1^(n+1-j) p2^j` of `Λ {F, H}`.
pub fn bracket_residual(f: &IntegralCoeffs, metric: &Metric, q: TorusPoint) -> Result<Vec<f64>> {
    if f.model != metric.model() {
        return Err(model_mismatch(f.model, metric.model()));
    }
    let a = f.jets_at(q);
    if let Some(i) = a.iter().position(|j| !j.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(match metric {
        Metric::SemiGeodesic(m) => semi_geodesic_bracket(&a, m.g.eval(q)),
        Metric::Conformal(m) => conformal_bracket(&a, m, q),
    })
}

fn semi_geodesic_bracket(a: &[Jet], g: Jet) -> Vec<f64> {
    let n = a.len() - 1;
    let at = |k: isize| -> Option<&Jet> {
        if k < 0 || k as usize > n {
            None
        } else {
            Some(&a[k as usize])
        }
    };
    let gx = g.d2 / g.v;
    (0..=n + 1)
        .map(|j| {
            let ji = j as isize;
            let mut c = 0.0;
            if let Some(aj) = at(ji) {
                c += aj.d1 / g.v;
            }
            if let Some(am) = at(ji - 1) {
                c += am.d2 - gx * (n + 1 - j) as f64 * am.v;
            }
            if let Some(ap) = at(ji + 1) {
                c += gx * (j + 1) as f64 * ap.v;
            }
            c
        })
        .collect()
}

fn conformal_bracket(a: &[Jet], m: &ConformalMetric, q: TorusPoint) -> Vec<f64> {
    let l = m.lambda.eval(q);
    let f = HomPoly::new(a.iter().map(|j| j.v).collect());
    let f1 = HomPoly::new(a.iter().map(|j| j.d1).collect());
    let f2 = HomPoly::new(a.iter().map(|j| j.d2).collect());
    let transport = HomPoly::linear(1.0, 0.0)
        .mul(&f1)
        .add(&HomPoly::linear(0.0, 1.0).mul(&f2));
    let force = f.d_x().scale(l.d1).add(&f.d_y().scale(l.d2));
    transport
        .add(&HomPoly::two_h().mul(&force).scale(0.5 / l.v))
        .coeffs
}

/// Univariate polynomial with real coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct HatPoly {
    pub coeffs: Vec<f64>,
}

impl HatPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        HatPoly { coeffs }
    }

    /// Nominal degree (length − 1), regardless of vanishing leading terms.
    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// True when the nominal leading coefficient vanishes.
    pub fn degree_dropped(&self) -> bool {
        self.leading() == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> HatPoly {
        if self.coeffs.len() <= 1 {
            return HatPoly::new(vec![0.0]);
        }
        HatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// `F̂(s) = Σ a_k s^k` and `Ĝ(s) = n s F̂(s) − (1+s²) F̂′(s)`.
pub fn hat_polys(a: &[f64], n: usize) -> Result<(HatPoly, HatPoly)> {
    if !(n == 3 || n == 4) {
        return Err(Error::UnsupportedDegree(n));
    }
    if a.len() != n + 1 {
        return Err(Error::Invalid(format!("expected {} coefficients, got {}", n + 1, a.len())));
    }
    let get = |k: isize| if k < 0 || k as usize > n { 0.0 } else { a[k as usize] };
    // the s^(n+1) term cancels identically
    let g = (0..=n as isize)
        .map(|j| (n as isize - j + 1) as f64 * get(j - 1) - (j + 1) as f64 * get(j + 1))
        .collect();
    Ok((HatPoly::new(a.to_vec()), HatPoly::new(g)))
}

/// Remove the `4H²` component so that `a4 = 0`; returns `(a′, a4)`.
pub fn canonicalize_quartic(a: [f64; 5]) -> ([f64; 5], f64) {
    let r = a[4];
    ([a[0] - r, a[1], a[2] - 2.0 * r, a[3], 0.0], r)
}

/// `|Ĝ(i)|`; values near zero mean `Ĝ` is divisible by `1+s²`.
pub fn check_not_divisible_by_h(g: &HatPoly) -> Result<f64> {
    if g.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(g.eval_complex(Complex64::new(0.0, 1.0)).norm())
}

/// Coefficients `A_i` of `F = Σ A_i p^(n-i) p̄^i` with `p = p1 − i p2`,
/// from real coefficients `b_k` of `p1^(n-k) p2^k`.
pub fn kolokoltsov_coeffs(b: &[f64]) -> Vec<Complex64> {
    let n = b.len() - 1;
    // p1 = (p + p̄)/2, p2 = i(p − p̄)/2, as polynomials in (p, p̄)
    let p1 = [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
    let p2 = [Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5)];
    let mul = |x: &[Complex64], y: &[Complex64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); x.len() + y.len() - 1];
        for (i, a) in x.iter().enumerate() {
            for (j, c) in y.iter().enumerate() {
                out[i + j] += a * c;
            }
        }
        out
    };
    let mut total = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, &bk) in b.iter().enumerate() {
        let mut term = vec![Complex64::new(bk, 0.0)];
        for _ in 0..n - k {
            term = mul(&term, &p1);
        }
        for _ in 0..k {
            term = mul(&term, &p2);
        }
        for (t, c) in total.iter_mut().zip(term) {
            *t += c;
        }
    }
    total
}

#[derive(Clone, Debug)]
pub struct KolokoltsovReport {
    pub a0: Vec<Complex64>,
    pub an: Vec<Complex64>,
    pub spread: f64,
    pub constant: bool,
}

pub const KOLOKOLTSOV_SPREAD_TOL: f64 = 1e-8;

/// Extreme Kolokoltsov coefficients at each sample and their spread.
pub fn kolokoltsov_check(f: &IntegralCoeffs, points: &[TorusPoint]) -> Result<KolokoltsovReport> {
    if f.model != Model::Conformal {
        return Err(model_mismatch(f.model, Model::Conformal));
    }
    let mut a0 = Vec::with_capacity(points.len());
    let mut an = Vec::with_capacity(points.len());
    for &q in points {
        let c = kolokoltsov_coeffs(&f.values_at(q));
        a0.push(c[0]);
        an.push(c[c.len() - 1]);
    }
    let spread_of = |v: &[Complex64]| {
        v.iter()
            .fold(0.0f64, |m, z| m.max((z - v[0]).norm()))
    };
    let spread = if points.is_empty() {
        0.0
    } else {
        spread_of(&a0).max(spread_of(&an))
    };
    Ok(KolokoltsovReport {
        a0,
        an,
        spread,
        constant: spread <= KOLOKOLTSOV_SPREAD_TOL,
    })
}

/// The classical quadratic integral of a Liouville metric,
/// `F2 = (p·d1)²/|d1|² − f1(ξ1) |p|²/Λ`, in the conformal basis.
pub fn liouville_quadratic_integral(spec: &LiouvilleSpec, lambda: &ScalarField) -> Result<IntegralCoeffs> {
    let d2 = spec.m1 * spec.m1 + spec.n1 * spec.n1;
    if d2 == 0.0 {
        return Err(Error::Invalid("zero direction vector".into()));
    }
    let lat = lambda.lattice();
    let mk = |c: f64| {
        let s = spec.clone();
        let l = lambda.clone();
        ScalarField::from_fn("liouville-quadratic", lat, move |q| {
            let ratio = s.f1.compose(s.first_phase(q)) / l.eval(q);
            Jet::constant(c) - ratio
        })
    };
    let b0 = mk(spec.m1 * spec.m1 / d2);
    let b2 = mk(spec.n1 * spec.n1 / d2);
    let b1 = ScalarField::constant(2.0 * spec.m1 * spec.n1 / d2, lat);
    IntegralCoeffs::new(Model::Conformal, vec![b0, b1, b2])
}
