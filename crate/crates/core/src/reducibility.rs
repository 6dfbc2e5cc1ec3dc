//! Simple waves of the cubic system, the reducibility identities
//! `F3 = k1 F1³ + 2 k2 H F1` and `F4 = k1 F2² + 2 k2 H F2 + 4 k3 H²`, the
//! elliptic factorization `F4 − 4rH² = K M`, and the conformal-model PDE
//! residuals for linear and quadratic integrals.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{poly_divmod, RationalPoly};
use crate::hydro::build_matrix_a;
use crate::integral::{bracket_residual, HomPoly, IntegralCoeffs};
use crate::jet::Jet;
use crate::metric::{Lattice, Metric, Model, Profile, ScalarField, SemiGeodesicMetric, TorusPoint};

/// Simple wave `U = U(x − λt)` of the cubic system with profile `a2(ξ) = g`.
#[derive(Clone, Debug)]
pub struct SimpleWaveSolution {
    pub lambda: f64,
    pub a2: Profile,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

const PROFILE_PROBE: usize = 1024;

impl SimpleWaveSolution {
    /// `c1 = 3(λ−1)/(2λ²)`, `c2 = c1/(3λ) = (λ−1)/(2λ³)`, `c3 = 0`.
    pub fn constants(lambda: f64) -> (f64, f64, f64) {
        let c1 = 3.0 * (lambda - 1.0) / (2.0 * lambda * lambda);
        (c1, (lambda - 1.0) / (2.0 * lambda.powi(3)), 0.0)
    }

    /// Solution with explicitly chosen constants (for controls).
    pub fn with_constants(lambda: f64, a2: Profile, c1: f64, c2: f64) -> Self {
        SimpleWaveSolution {
            lambda,
            a2,
            c1,
            c2,
            c3: 0.0,
        }
    }

    /// `(k1, k2)` of the cubic identity.
    pub fn identity_constants(&self) -> (f64, f64) {
        let l = self.lambda;
        (self.c2, (3.0 - l) / (2.0 * l))
    }

    /// `(a0, a1, a2)` with their ξ-derivatives in the `d1`/`d11` slots.
    pub fn coeff_jets(&self, xi: f64) -> [Jet; 3] {
        self.coeff_jets_of(Jet::var1(xi))
    }

    fn coeff_jets_of(&self, xi: Jet) -> [Jet; 3] {
        let a2 = self.a2.compose(xi);
        let a2sq = a2 * a2;
        let a1 = a2sq * self.c1 + (3.0 - self.lambda) / 2.0;
        let a0 = a2 * (1.0 - self.lambda * self.c1) + a2sq * a2 * self.c2;
        [a0, a1, a2]
    }

    /// `(a0, a1, a2, 1)` at phase `ξ`.
    pub fn coeffs(&self, xi: f64) -> [f64; 4] {
        let [a0, a1, a2] = self.coeff_jets(xi);
        [a0.v, a1.v, a2.v, 1.0]
    }

    /// Residuals of the three ODEs `U′ ∥ λ`-eigenvector, with central
    /// differences of step `h`.
    pub fn system_residual(&self, xi: f64, h: f64) -> [f64; 3] {
        let [a0, a1, a2, _] = self.coeffs(xi);
        let (up, dn) = (self.coeffs(xi + h), self.coeffs(xi - h));
        let d = |k: usize| (up[k] - dn[k]) / (2.0 * h);
        let (d0, d1, d2) = (d(0), d(1), d(2));
        let l = self.lambda;
        [
            a1 * d2 - l * d0,
            a2 * d0 + 2.0 * a2 * d2 - 3.0 * a0 * d2 - l * d1,
            a2 * d1 + (3.0 - 2.0 * a1) * d2 - l * d2,
        ]
    }

    /// `λ a0 − (c1/3) a2³ − ((3−λ)/2) a2 − c3`.
    pub fn eliminated_residual(&self, xi: f64) -> f64 {
        let [a0, _, a2, _] = self.coeffs(xi);
        let l = self.lambda;
        l * a0 - self.c1 / 3.0 * a2.powi(3) - (3.0 - l) / 2.0 * a2 - self.c3
    }

    /// `‖A(U) U′ − λ U′‖∞` with `U′` from central differences.
    pub fn eigenvector_residual(&self, xi: f64, h: f64) -> f64 {
        let a = self.coeffs(xi);
        let m = build_matrix_a(&a, 3).expect("cubic");
        let (up, dn) = (self.coeffs(xi + h), self.coeffs(xi - h));
        let du = nalgebra::DVector::from_iterator(3, (0..3).map(|k| (up[k] - dn[k]) / (2.0 * h)));
        (&m * &du - &du * self.lambda).amax()
    }

    fn phase(&self, q: TorusPoint) -> Jet {
        Jet::linear(-self.lambda, 1.0, q.u1, q.u2)
    }

    /// `g(t, x) = a2(x − λt)`.
    pub fn metric(&self, lattice: Lattice) -> SemiGeodesicMetric {
        let s = self.clone();
        SemiGeodesicMetric::new_unchecked(ScalarField::from_fn("simple-wave g", lattice, move |q| {
            s.a2.compose(s.phase(q))
        }))
    }

    /// The normalized cubic integral with `a_i(x − λt)`.
    pub fn integral(&self, lattice: Lattice) -> IntegralCoeffs {
        let field = |k: usize| {
            let s = self.clone();
            ScalarField::from_fn("simple-wave a", lattice, move |q| s.coeff_jets_of(s.phase(q))[k])
        };
        let g = field(2);
        IntegralCoeffs::normalized(&g, vec![field(0), field(1)]).expect("cubic")
    }

    /// `F1 = p1 + λ p2` in the semi-geodesic basis `(p1/g, p2)`.
    pub fn linear_integral(&self, lattice: Lattice) -> IntegralCoeffs {
        let g = self.metric(lattice).g;
        IntegralCoeffs::new(
            Model::SemiGeodesic,
            vec![g, ScalarField::constant(self.lambda, lattice)],
        )
        .expect("degree 1")
    }

    /// Smallest sampled value of `a2` on one period `[0, 1)`.
    pub fn min_profile(&self) -> f64 {
        (0..PROFILE_PROBE)
            .map(|i| self.a2.value(i as f64 / PROFILE_PROBE as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Simple wave with slope `λ` and profile `a2`.
pub fn simple_wave(lambda: f64, a2: Profile) -> Result<SimpleWaveSolution> {
    if lambda == 0.0 {
        return Err(Error::FlatCase);
    }
    if !lambda.is_finite() {
        return Err(Error::Invalid(format!("lambda = {lambda}")));
    }
    let (c1, c2, _) = SimpleWaveSolution::constants(lambda);
    let sol = SimpleWaveSolution::with_constants(lambda, a2, c1, c2);
    let min = sol.min_profile();
    if !(min > 0.0) {
        return Err(Error::NonPositive {
            what: "a2 profile",
            value: min,
            u1: 0.0,
            u2: 0.0,
        });
    }
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCertificate {
    pub degree: usize,
    pub constants: Vec<f64>,
    pub sub_integral: String,
    pub nodes: usize,
    pub residual: f64,
    pub tolerance: f64,
}

impl ReductionCertificate {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for ReductionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "degree = {}", self.degree)?;
        let ks: Vec<String> = self.constants.iter().map(|k| format!("{k:.16e}")).collect();
        writeln!(f, "constants = [{}]", ks.join(", "))?;
        writeln!(f, "sub_integral = \"{}\"", self.sub_integral)?;
        writeln!(f, "nodes = {}", self.nodes)?;
        writeln!(f, "residual = {:.16e}", self.residual)?;
        writeln!(f, "tolerance = {:.16e}", self.tolerance)?;
        writeln!(f, "status = \"{}\"", if self.passed() { "pass" } else { "FAIL" })
    }
}

pub const CUBIC_IDENTITY_TOL: f64 = 1e-12;

/// Coefficientwise `F3 − (k1 F1³ + 2 k2 H F1)` at `nodes` phases in `[0, 1)`.
pub fn verify_cubic_identity(sol: &SimpleWaveSolution, nodes: usize) -> ReductionCertificate {
    let (k1, k2) = sol.identity_constants();
    verify_cubic_identity_with(sol, k1, k2, nodes)
}

/// As [`verify_cubic_identity`] with explicit constants.
pub fn verify_cubic_identity_with(sol: &SimpleWaveSolution, k1: f64, k2: f64, nodes: usize) -> ReductionCertificate {
    let residual = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let a = sol.coeffs(i as f64 / nodes as f64);
            // F1 = p1 + λ p2 = g X + λ p2 with X = p1/g
            let f1 = HomPoly::linear(a[2], sol.lambda);
            let rhs = f1.pow(3).scale(k1).add(&HomPoly::two_h().mul(&f1).scale(k2));
            HomPoly::new(a.to_vec()).sub(&rhs).max_abs()
        })
        .reduce(|| 0.0, f64::max);
    ReductionCertificate {
        degree: 3,
        constants: vec![k1, k2],
        sub_integral: format!("F1 = p1 + {} p2", sol.lambda),
        nodes,
        residual,
        tolerance: CUBIC_IDENTITY_TOL,
    }
}

/// `2H` as a polynomial in the model basis at `q`.
fn two_h_at(metric: &Metric, q: TorusPoint) -> HomPoly {
    match metric {
        Metric::SemiGeodesic(_) => HomPoly::two_h(),
        Metric::Conformal(m) => HomPoly::two_h().scale(1.0 / m.lambda.value(q)),
    }
}

fn two_h_jets(metric: &Metric, q: TorusPoint) -> [Jet; 3] {
    match metric {
        Metric::SemiGeodesic(_) => [Jet::constant(1.0), Jet::constant(0.0), Jet::constant(1.0)],
        Metric::Conformal(m) => {
            let r = m.lambda.eval(q).recip();
            [r, Jet::constant(0.0), r]
        }
    }
}

fn jet_poly_mul(x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    let mut out = vec![Jet::constant(0.0); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] = out[i + j] + *a * *b;
        }
    }
    out
}

/// `k1 F2² + k2 (2H) F2 + k3 (2H)²` as a quartic integral with exact partials.
pub fn quartic_from_quadratic(f2: &IntegralCoeffs, metric: &Metric, k: [f64; 3]) -> Result<IntegralCoeffs> {
    if f2.degree() != 2 {
        return Err(Error::UnsupportedDegree(f2.degree()));
    }
    if f2.model() != metric.model() {
        return Err(Error::ModelMismatch("quadratic integral and metric differ in model".into()));
    }
    let lat = metric.lattice();
    let fields = (0..5)
        .map(|idx| {
            let (f2, metric) = (f2.clone(), metric.clone());
            ScalarField::from_fn("composed quartic", lat, move |q| {
                let b = f2.jets_at(q);
                let h = two_h_jets(&metric, q);
                let sq = jet_poly_mul(&b, &b);
                let hb = jet_poly_mul(&h, &b);
                let hh = jet_poly_mul(&h, &h);
                sq[idx] * k[0] + hb[idx] * k[1] + hh[idx] * k[2]
            })
        })
        .collect();
    IntegralCoeffs::new(f2.model(), fields)
}

pub const QUARTIC_IDENTITY_TOL: f64 = 1e-10;

/// Least-squares fit of `F4 = k1 F2² + 2 k2 H F2 + 4 k3 H²` over `nodes`.
pub fn verify_quartic_identity(
    f4: &IntegralCoeffs,
    f2: &IntegralCoeffs,
    metric: &Metric,
    nodes: &[TorusPoint],
) -> Result<ReductionCertificate> {
    if f4.degree() != 4 || f2.degree() != 2 {
        return Err(Error::Precondition("need a quartic and a quadratic integral".into()));
    }
    for &q in nodes {
        let r = bracket_residual(f2, metric, q)?;
        let worst = r.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if worst > 1e-8 {
            return Err(Error::Precondition(format!(
                "F2 is not an integral: bracket residual {worst:e} at ({}, {})",
                q.u1, q.u2
            )));
        }
    }
    let rows: Vec<([HomPoly; 3], HomPoly)> = nodes
        .par_iter()
        .map(|&q| {
            let b = f2.hom_poly_at(q);
            let h = two_h_at(metric, q);
            ([b.mul(&b), h.mul(&b), h.mul(&h)], f4.hom_poly_at(q))
        })
        .collect();
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (basis, target) in &rows {
        for c in 0..5 {
            let v = Vector3::new(basis[0].coeffs[c], basis[1].coeffs[c], basis[2].coeffs[c]);
            normal += v * v.transpose();
            rhs += v * target.coeffs[c];
        }
    }
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(hi > 0.0) || lo <= 1e-12 * hi {
        return Err(Error::Singular(
            "F2², H F2 and H² are linearly dependent on the grid".into(),
        ));
    }
    let k = normal
        .cholesky()
        .ok_or_else(|| Error::Singular("normal matrix".into()))?
        .solve(&rhs);
    let residual = rows
        .iter()
        .map(|(basis, target)| {
            let fit = basis[0]
                .scale(k[0])
                .add(&basis[1].scale(k[1]))
                .add(&basis[2].scale(k[2]));
            target.sub(&fit).max_abs()
        })
        .fold(0.0, f64::max);
    Ok(ReductionCertificate {
        degree: 4,
        constants: vec![k[0], k[1], k[2]],
        sub_integral: "F2 (quadratic integral)".into(),
        nodes: nodes.len(),
        residual,
        tolerance: QUARTIC_IDENTITY_TOL,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticFactorization {
    /// `K` in the basis `(p1/g)^(2-k) p2^k`.
    pub k: [f64; 3],
    pub m: [f64; 3],
    pub remainder: f64,
    /// `K = (p1/g)² + p2² = 2H`, the first alternative of the factorization.
    pub k_proportional_to_h: bool,
}

pub const FACTOR_TOL: f64 = 1e-8;

/// Divide `F4 − 4rH²` by `K = p2² − 2α (p1/g) p2 + (α²+β²)(p1/g)²`.
///
/// `f4` holds the coefficients of `(p1/g)^(4-k) p2^k`.
pub fn factor_quartic_elliptic(f4: &[f64; 5], r: f64, alpha: f64, beta: f64) -> Result<QuarticFactorization> {
    // in s = p2/(p1/g): F̂(s) − r(1+s²)², divided by s² − 2αs + α²+β²
    let num = [f4[0] - r, f4[1], f4[2] - 2.0 * r, f4[3], f4[4] - r];
    let k = [alpha * alpha + beta * beta, -2.0 * alpha, 1.0];
    // synthetic division by the monic quadratic
    let mut rem = num;
    let mut quot = [0.0; 3];
    for d in (0..3).rev() {
        let c = rem[d + 2];
        quot[d] = c;
        rem[d] -= c * k[0];
        rem[d + 1] -= c * k[1];
        rem[d + 2] = 0.0;
    }
    let scale = num.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let remainder = rem[0].abs().max(rem[1].abs()) / scale;
    if remainder > FACTOR_TOL {
        return Err(Error::Factorization(remainder));
    }
    Ok(QuarticFactorization {
        k,
        m: quot,
        remainder,
        k_proportional_to_h: alpha.abs() <= FACTOR_TOL && (beta.abs() - 1.0).abs() <= FACTOR_TOL,
    })
}

/// Exact counterpart of [`factor_quartic_elliptic`] for rational data.
pub fn factor_quartic_exact(num: &RationalPoly, k: &RationalPoly) -> Result<(RationalPoly, RationalPoly)> {
    poly_divmod(num, k)
}

#[derive(Clone, Debug)]
pub enum ConformalMode {
    /// `F1 = b0 p1 + b1 p2` with constant `b0, b1`.
    Linear { b0: f64, b1: f64 },
    /// Extreme complex coefficient `A + iB` of a quadratic integral, with the
    /// middle coefficient field `b1` when available.
    Quadratic { a: f64, b: f64, b1: Option<ScalarField> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalResidualReport {
    pub linear: Option<f64>,
    /// Invariant direction `(b1, −b0)` of `Λ` in linear mode.
    pub direction: Option<(f64, f64)>,
    pub second_order: Option<f64>,
    pub first_order: Option<f64>,
    pub nodes: usize,
}

/// Residuals of the PDEs for `Λ` implied by linear or quadratic integrals.
pub fn conformal_residuals(lambda: &ScalarField, mode: &ConformalMode, nodes: &[TorusPoint]) -> ConformalResidualReport {
    let maxabs = |f: &(dyn Fn(TorusPoint) -> f64 + Sync)| -> f64 {
        nodes.par_iter().map(|&q| f(q).abs()).reduce(|| 0.0, f64::max)
    };
    let mut rep = ConformalResidualReport {
        linear: None,
        direction: None,
        second_order: None,
        first_order: None,
        nodes: nodes.len(),
    };
    match mode {
        ConformalMode::Linear { b0, b1 } => {
            rep.linear = Some(maxabs(&|q| {
                let inv = lambda.eval(q).recip();
                b0 * inv.d1 + b1 * inv.d2
            }));
            rep.direction = Some((*b1, -*b0));
        }
        ConformalMode::Quadratic { a, b, b1 } => {
            rep.second_order = Some(maxabs(&|q| {
                let l = lambda.eval(q);
                b * l.d11 - 2.0 * a * l.d12 - b * l.d22
            }));
            if let Some(b1) = b1 {
                rep.first_order = Some(maxabs(&|q| {
                    let l = lambda.eval(q);
                    let p = b1.eval(q) * l;
                    let e1 = p.d1 + 2.0 * a * l.d1 + 2.0 * b * l.d2;
                    let e2 = p.d2 + 2.0 * b * l.d1 - 2.0 * a * l.d2;
                    e1.abs().max(e2.abs())
                }));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::{kolokoltsov_coeffs, liouville_quadratic_integral};
    use crate::metric::{liouville_conformal_factor, LiouvilleSpec};

    fn profile() -> Profile {
        Profile::parse("2 + 0.3*sin(2*pi*xi)").unwrap()
    }

    #[test]
    fn constants() {
        let s = simple_wave(1.0, profile()).unwrap();
        assert_eq!((s.c1, s.c2, s.c3), (0.0, 0.0, 0.0));
        for xi in [0.0, 0.3, 0.77] {
            let a = s.coeffs(xi);
            assert_eq!(a[1], 1.0);
            assert_eq!(a[0], a[2]);
        }
        let s = simple_wave(2.0, profile()).unwrap();
        assert_eq!(s.c1, 3.0 / 8.0);
        assert_eq!(s.c2, 1.0 / 16.0);
        assert_eq!(simple_wave(0.0, profile()).unwrap_err(), Error::FlatCase);
        assert!(simple_wave(1.0, Profile::parse("sin(2*pi*xi)").unwrap()).is_err());
    }

    #[test]
    fn system_residuals_vanish() {
        for l in [1.0, 2.0, 3.0] {
            let s = simple_wave(l, profile()).unwrap();
            for i in 0..50 {
                let xi = i as f64 / 50.0;
                assert!(s.system_residual(xi, 1e-5).iter().all(|r| r.abs() <= 1e-8), "λ={l}");
                assert!(s.eliminated_residual(xi).abs() <= 1e-10);
                assert!(s.eigenvector_residual(xi, 1e-5) <= 1e-8);
            }
        }
    }

    #[test]
    fn alternative_c2_breaks_the_system() {
        let l = 2.0;
        let (c1, _, _) = SimpleWaveSolution::constants(l);
        let alt = SimpleWaveSolution::with_constants(l, profile(), c1, (l - 1.0) / (3.0 * l.powi(3)));
        let worst = (0..50)
            .map(|i| alt.system_residual(i as f64 / 50.0, 1e-5)[0].abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-3);
    }

    #[test]
    fn cubic_identity() {
        let s = simple_wave(1.0, profile()).unwrap();
        let c = verify_cubic_identity(&s, 256);
        assert!(c.residual <= 1e-14);
        let s = simple_wave(2.0, profile()).unwrap();
        let c = verify_cubic_identity(&s, 256);
        assert!(c.passed(), "{c}");
        let (k1, k2) = s.identity_constants();
        let bad = verify_cubic_identity_with(&s, k1, k2 + 1e-3, 256);
        assert!(bad.residual >= 1e-4);
    }

    #[test]
    fn simple_wave_integral_is_an_integral() {
        let s = simple_wave(2.0, profile()).unwrap();
        let m = Metric::SemiGeodesic(s.metric(Lattice::unit()));
        let f = s.integral(Lattice::unit());
        let f1 = s.linear_integral(Lattice::unit());
        for i in 0..10 {
            let q = TorusPoint::new(0.1 * i as f64, 0.37 + 0.05 * i as f64);
            let r = bracket_residual(&f, &m, q).unwrap();
            assert!(r.iter().all(|c| c.abs() < 1e-12), "{r:?}");
            let r = bracket_residual(&f1, &m, q).unwrap();
            assert!(r.iter().all(|c| c.abs() < 1e-12), "{r:?}");
        }
    }

    fn liouville() -> (Metric, IntegralCoeffs) {
        let spec = LiouvilleSpec::new(
            Profile::parse("2+cos(2*pi*xi)").unwrap(),
            Profile::parse("2+sin(2*pi*xi)").unwrap(),
            [1.0, 1.0, 1.0, -1.0],
            Lattice::unit(),
        );
        let cm = liouville_conformal_factor(&spec).unwrap();
        let f2 = liouville_quadratic_integral(&spec, &cm.lambda).unwrap();
        (Metric::Conformal(cm), f2)
    }

    fn nodes(n: usize) -> Vec<TorusPoint> {
        (0..n * n).map(|k| Lattice::unit().grid_point(k / n, k % n, n, n)).collect()
    }

    #[test]
    fn quartic_identity_fits() {
        let (m, f2) = liouville();
        let pts = nodes(8);
        for k in [[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.3, -2.0, 0.7]] {
            let f4 = quartic_from_quadratic(&f2, &m, k).unwrap();
            let c = verify_quartic_identity(&f4, &f2, &m, &pts).unwrap();
            assert!(c.residual <= 1e-12, "{c}");
            for (x, y) in c.constants.iter().zip(k) {
                assert!((x - y).abs() < 1e-9);
            }
            let r = bracket_residual(&f4, &m, pts[5]).unwrap();
            assert!(r.iter().all(|c| c.abs() < 1e-10));
        }
    }

    #[test]
    fn quartic_identity_singular_for_energy() {
        let lat = Lattice::unit();
        let m = Metric::SemiGeodesic(SemiGeodesicMetric::new(ScalarField::constant(1.0, lat)).unwrap());
        let f2 = IntegralCoeffs::constant(Model::SemiGeodesic, &[1.0, 0.0, 1.0], lat).unwrap();
        let f4 = IntegralCoeffs::constant(Model::SemiGeodesic, &[1.0, 0.0, 2.0, 0.0, 1.0], lat).unwrap();
        assert!(matches!(
            verify_quartic_identity(&f4, &f2, &m, &nodes(4)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn quartic_identity_rejects_non_integral() {
        let (m, _) = liouville();
        let lat = Lattice::unit();
        let f2 = IntegralCoeffs::parse(Model::Conformal, &["q1", "0", "1"], lat).unwrap();
        let f4 = quartic_from_quadratic(&f2, &m, [1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            verify_quartic_identity(&f4, &f2, &m, &nodes(4)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn factorization_cases() {
        let (alpha, beta, r) = (0.4, 1.3, 0.6);
        let k = HomPoly::new(vec![alpha * alpha + beta * beta, -2.0 * alpha, 1.0]);
        let f4 = k.mul(&k).add(&HomPoly::two_h().pow(2).scale(r));
        let c: [f64; 5] = f4.coeffs.clone().try_into().unwrap();
        let fac = factor_quartic_elliptic(&c, r, alpha, beta).unwrap();
        for (x, y) in fac.m.iter().zip(&k.coeffs) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(!fac.k_proportional_to_h);
        // F4 = H M + 4rH²
        let mm = HomPoly::new(vec![0.5, -1.0, 2.0]);
        let f4 = HomPoly::two_h().mul(&mm).add(&HomPoly::two_h().pow(2).scale(r));
        let c: [f64; 5] = f4.coeffs.clone().try_into().unwrap();
        let fac = factor_quartic_elliptic(&c, r, 0.0, 1.0).unwrap();
        assert!(fac.k_proportional_to_h);
        assert!(matches!(
            factor_quartic_elliptic(&[0.3, 1.1, -0.7, 0.2, 1.0], r, alpha, beta),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn conformal_examples() {
        let lat = Lattice::unit();
        let f = ScalarField::parse("2 + sin(2*pi*q1)", lat).unwrap();
        let rep = conformal_residuals(&f, &ConformalMode::Linear { b0: 0.0, b1: 1.0 }, &nodes(8));
        assert_eq!(rep.linear, Some(0.0));
        assert_eq!(rep.direction, Some((1.0, -0.0)));
        let sep = ScalarField::parse("4 + sin(2*pi*q1) + cos(2*pi*q2)", lat).unwrap();
        let rep = conformal_residuals(&sep, &ConformalMode::Quadratic { a: 0.7, b: 0.0, b1: None }, &nodes(8));
        assert_eq!(rep.second_order, Some(0.0));
        let diag = ScalarField::parse("3 + sin(2*pi*(q1+q2))", lat).unwrap();
        let rep = conformal_residuals(&diag, &ConformalMode::Quadratic { a: 0.0, b: 1.3, b1: None }, &nodes(8));
        assert!(rep.second_order.unwrap() < 1e-12);
    }

    #[test]
    fn liouville_first_order_pair() {
        let spec = LiouvilleSpec::new(
            Profile::parse("2+cos(2*pi*xi)").unwrap(),
            Profile::parse("2+sin(2*pi*xi)").unwrap(),
            [1.0, 0.0, 0.0, 1.0],
            Lattice::unit(),
        );
        let cm = liouville_conformal_factor(&spec).unwrap();
        let f2 = liouville_quadratic_integral(&spec, &cm.lambda).unwrap();
        let q0 = TorusPoint::new(0.1, 0.2);
        let ac = kolokoltsov_coeffs(&f2.values_at(q0));
        let middle = {
            let f2 = f2.clone();
            ScalarField::from_fn("b1", Lattice::unit(), move |q| {
                // p p̄ coefficient: (b0 + b2)/2 for real b's with zero p1p2 term
                let b = f2.jets_at(q);
                (b[0] + b[2]) * 0.5
            })
        };
        assert!((middle.value(q0) - ac[1].re).abs() < 1e-14);
        let mode = ConformalMode::Quadratic { a: ac[0].re, b: ac[0].im, b1: Some(middle) };
        let rep = conformal_residuals(&cm.lambda, &mode, &nodes(16));
        assert!(rep.first_order.unwrap() < 1e-12);
        assert!(rep.second_order.unwrap() < 1e-12);
    }
}
