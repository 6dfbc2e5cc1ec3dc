//! The quasi-linear system matrix, eigenvalues and Riemann invariants,
//! coefficient/invariant Jacobians, genuine nonlinearity, the remainder and
//! Viète constructions for quartics, and the elliptic-region PDE residual.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integral::{canonicalize_quartic, hat_polys, HatPoly};
use crate::roots::{classify_roots, solve_poly, RootClass, RootSet};

/// Calibration turning the genuine-nonlinearity closed form
/// `−(1+s²)² γ(s) / (S Ĝ′(s))` into `∂λ/∂r`. Equals `−c` where
/// `2Ĝ₄ − Q = c γ`; see [`crate::exact::verify_displayed_identities`].
pub const KAPPA: f64 = -3.0;

/// The factor `c` in `2Ĝ₄ − Q = c γ`.
pub const NONLINEARITY_FACTOR: i64 = 3;

const IMAG_UNIT_TOL: f64 = 1e-10;

/// System matrix `A(U)` for coefficient values `a0..an`.
pub fn build_matrix_a(a: &[f64], n: usize) -> Result<DMatrix<f64>> {
    if !(n == 3 || n == 4) {
        return Err(Error::UnsupportedDegree(n));
    }
    if a.len() != n + 1 {
        return Err(Error::Invalid(format!("expected {} coefficients, got {}", n + 1, a.len())));
    }
    let get = |k: isize| if k < 0 || k as usize > n { 0.0 } else { a[k as usize] };
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        if j > 0 {
            m[(j, j - 1)] = a[n - 1];
        }
        let ji = j as isize;
        m[(j, n - 1)] = (j + 1) as f64 * get(ji + 1) - (n - j + 1) as f64 * get(ji - 1);
    }
    Ok(m)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best-permutation distance between two multisets of complex numbers,
/// relative to `max(1, |w|)`.
pub fn matched_mismatch(z: &[Complex64], w: &[Complex64]) -> f64 {
    if z.len() != w.len() {
        return f64::INFINITY;
    }
    permutations(z.len())
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| (z[i] - w[j]).norm() / w[j].norm().max(1.0))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Max relative distance between the eigenvalues of `A` and `{g s_i}`.
pub fn eigen_crosscheck(a: &DMatrix<f64>, g: f64, rs: &RootSet) -> Result<f64> {
    let ev: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver);
    }
    let scaled: Vec<Complex64> = rs.all_roots().iter().map(|s| s * g).collect();
    if scaled.len() != ev.len() {
        return Err(Error::Precondition(format!(
            "{} roots for a {}x{} matrix",
            scaled.len(),
            ev.len(),
            ev.len()
        )));
    }
    Ok(matched_mismatch(&ev, &scaled))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannEntry {
    pub s: Complex64,
    pub lambda: Complex64,
    pub r: Complex64,
    /// `r²`, single-valued for odd `n`.
    pub r_squared: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannData {
    pub n: usize,
    pub g: f64,
    pub entries: Vec<RiemannEntry>,
    pub class: RootClass,
}

impl RiemannData {
    /// `(u, v) = (Re r, Im r)` of the pair member with positive imaginary part.
    pub fn pair_invariant(&self) -> Option<(f64, f64)> {
        self.entries
            .iter()
            .find(|e| e.s.im > 0.0)
            .map(|e| (e.r.re, e.r.im))
    }

    /// Real roots with their invariants, ascending in `s`.
    pub fn real_entries(&self) -> impl Iterator<Item = &RiemannEntry> {
        self.entries.iter().filter(|e| e.s.im == 0.0)
    }
}

fn weight(s: Complex64, n: usize) -> Complex64 {
    let base = Complex64::new(1.0, 0.0) + s * s;
    if n % 2 == 0 {
        base.powi(n as i32 / 2)
    } else if s.im == 0.0 {
        Complex64::new(base.re.powf(n as f64 / 2.0), 0.0)
    } else {
        base.powf(n as f64 / 2.0)
    }
}

/// `r_i = F̂(s_i) / (1+s_i²)^(n/2)` at every root of `rs`.
pub fn riemann_invariants(fhat: &HatPoly, rs: &RootSet, g: f64, n: usize) -> Result<RiemannData> {
    let roots = rs.all_roots();
    for s in &roots {
        if (s - Complex64::new(0.0, 1.0)).norm() < IMAG_UNIT_TOL
            || (s + Complex64::new(0.0, 1.0)).norm() < IMAG_UNIT_TOL
        {
            return Err(Error::RootAtImaginaryUnit { tol: IMAG_UNIT_TOL });
        }
    }
    let entries = roots
        .into_iter()
        .map(|s| {
            let f = fhat.eval_complex(s);
            let base = Complex64::new(1.0, 0.0) + s * s;
            let r = f / weight(s, n);
            let r_squared = f * f / base.powi(n as i32);
            let (r, r_squared) = if s.im == 0.0 {
                (Complex64::new(r.re, 0.0), Complex64::new(r_squared.re, 0.0))
            } else {
                (r, r_squared)
            };
            RiemannEntry {
                s,
                lambda: s * g,
                r,
                r_squared,
            }
        })
        .collect();
    Ok(RiemannData {
        n,
        g,
        entries,
        class: classify_roots(rs, crate::roots::DEFAULT_CLASS_TOL),
    })
}

/// Everything computed at a single base point.
#[derive(Clone, Debug)]
pub struct PointAnalysis {
    pub n: usize,
    pub g: f64,
    pub fhat: HatPoly,
    pub ghat: HatPoly,
    pub roots: Option<RootSet>,
    pub class: RootClass,
    pub riemann: Option<RiemannData>,
}

/// Hat polynomials, roots, class and invariants for coefficient values `a`.
/// `g` is the metric coefficient giving `λ = g s`.
pub fn analyze_point(a: &[f64], g: f64, tol: f64) -> Result<PointAnalysis> {
    let n = a.len().wrapping_sub(1);
    let (fhat, ghat) = hat_polys(a, n)?;
    let roots = if ghat.is_zero() { None } else { Some(solve_poly(&ghat.coeffs)?) };
    let class = roots
        .as_ref()
        .map_or(RootClass::Degenerate, |rs| classify_roots(rs, tol));
    let riemann = roots.as_ref().and_then(|rs| {
        let mut d = riemann_invariants(&fhat, rs, g, n).ok()?;
        d.class = class;
        Some(d)
    });
    Ok(PointAnalysis {
        n,
        g,
        fhat,
        ghat,
        roots,
        class,
        riemann,
    })
}

fn ghat4(a: &[f64; 4]) -> HatPoly {
    hat_polys(&[a[0], a[1], a[2], a[3], 0.0], 4).expect("degree 4").1
}

/// `∂s/∂a_j` for a simple root `s` of `Ĝ₄` (with `a4 = 0`).
pub fn root_sensitivity(a: &[f64; 4], s: f64) -> Result<[f64; 4]> {
    let g = ghat4(a);
    let dg = g.derivative().eval(s);
    let scale = g.max_abs() * s.abs().max(1.0).powi(3);
    if dg.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::RepeatedRoot(s));
    }
    let s2 = s * s;
    Ok([
        -4.0 * s / dg,
        (1.0 - 3.0 * s2) / dg,
        2.0 * s * (1.0 - s2) / dg,
        s2 * (3.0 - s2) / dg,
    ])
}

/// `M[i][j] = s_i^j / (1+s_i²)²` for the roots in [`RootSet::all_roots`] order.
pub fn invariant_gradient_matrix(rs: &RootSet) -> Result<Matrix4<Complex64>> {
    let roots = rs.all_roots();
    if roots.len() != 4 {
        return Err(Error::Precondition(format!("need four roots, got {}", roots.len())));
    }
    Ok(Matrix4::from_fn(|i, j| {
        let s = roots[i];
        s.powi(j as i32) / (Complex64::new(1.0, 0.0) + s * s).powi(2)
    }))
}

/// `(∂a_i/∂r_j)`: rows are coefficients `a0..a3`, columns follow the root
/// order of [`RootSet::all_roots`].
pub fn jacobian_da_dr(rs: &RootSet) -> Result<Matrix4<Complex64>> {
    let roots = rs.all_roots();
    let m = invariant_gradient_matrix(rs)?;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < 1e-12 * (1.0 + roots[i].norm()) {
                return Err(Error::Singular("root collision".into()));
            }
        }
    }
    m.try_inverse()
        .ok_or_else(|| Error::Singular("invariant gradient matrix".into()))
}

/// Riemann invariants of the canonical quartic `a0..a3` (`a4 = 0`), in root order.
pub fn quartic_invariants(a: &[f64; 4]) -> Result<(RootSet, Vec<Complex64>)> {
    let full = [a[0], a[1], a[2], a[3], 0.0];
    let (fhat, ghat) = hat_polys(&full, 4)?;
    let rs = solve_poly(&ghat.coeffs)?;
    let data = riemann_invariants(&fhat, &rs, a[3], 4)?;
    Ok((rs, data.entries.iter().map(|e| e.r).collect()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearityReport {
    pub s: f64,
    /// `S = ∏_{k≠i} (s_i − s_k)`.
    pub big_s: f64,
    pub dg: f64,
    pub gamma: f64,
    pub dlambda_dr: f64,
    pub oracle_dlambda_dr: f64,
    /// The complex-pair invariant is real (`Im r = 0`).
    pub im_r_zero: bool,
}

/// `∂λ/∂r` along each real root of an elliptic canonical quartic, by the
/// calibrated closed form and by a finite-difference oracle.
pub fn genuine_nonlinearity(a: &[f64; 4], rs: &RootSet) -> Result<Vec<NonlinearityReport>> {
    if a[3] <= 0.0 {
        return Err(Error::Precondition("a3 must be positive".into()));
    }
    if classify_roots(rs, crate::roots::DEFAULT_CLASS_TOL) != RootClass::Elliptic || rs.real_roots.len() != 2 {
        return Err(Error::Precondition("elliptic configuration with two real roots required".into()));
    }
    let roots = rs.all_roots();
    let ghat = ghat4(a);
    let dghat = ghat.derivative();
    let jac = jacobian_da_dr(rs)?;
    let (_, r0) = quartic_invariants(a)?;
    let im_r_zero = r0[0].im.abs() <= 1e-10 * r0[0].norm().max(1.0);
    let gamma = |s: f64| (a[3] + a[1]) * s * s + 4.0 * a[0] * s - (a[1] + a[3]);
    (2..4)
        .map(|i| {
            let s = roots[i].re;
            let big_s = (0..4)
                .filter(|&k| k != i)
                .fold(Complex64::new(1.0, 0.0), |acc, k| acc * (roots[i] - roots[k]))
                .re;
            let dg = dghat.eval(s);
            if big_s.abs() < 1e-12 || dg.abs() < 1e-12 {
                return Err(Error::Precondition(format!("|S| = {big_s:e}, |G'| = {dg:e}")));
            }
            let w = (1.0 + s * s).powi(2);
            let closed = KAPPA * (-w * gamma(s) / (big_s * dg));
            let oracle = fd_dlambda_dr(a, s, &jac, i)?;
            Ok(NonlinearityReport {
                s,
                big_s,
                dg,
                gamma: gamma(s),
                dlambda_dr: closed,
                oracle_dlambda_dr: oracle,
                im_r_zero,
            })
        })
        .collect()
}

/// `Σ_j ∂(a3 s)/∂a_j · ∂a_j/∂r_i` with the first factor from re-solved roots.
fn fd_dlambda_dr(a: &[f64; 4], s: f64, jac: &Matrix4<Complex64>, col: usize) -> Result<f64> {
    let lam = |b: &[f64; 4]| -> Result<f64> {
        let rs = solve_poly(&ghat4(b).coeffs)?;
        let near = rs
            .real_roots
            .iter()
            .copied()
            .min_by(|x, y| (x - s).abs().total_cmp(&(y - s).abs()))
            .ok_or_else(|| Error::Precondition("real root vanished under perturbation".into()))?;
        Ok(b[3] * near)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let h = 1e-6 * a[j].abs().max(1.0);
        let (mut up, mut dn) = (*a, *a);
        up[j] += h;
        dn[j] -= h;
        let d = (lam(&up)? - lam(&dn)?) / (2.0 * h);
        total += jac[(j, col)] * d;
    }
    Ok(total.re)
}

/// `γ` and the closed-form remainder `R` of `Ĝ₄ ÷ γ`.
pub fn remainder_gamma(a: &[f64; 4]) -> Result<(HatPoly, HatPoly)> {
    let [a0, a1, a2, a3] = *a;
    let t = a1 + a3;
    if t == 0.0 {
        return Err(Error::Precondition("a1 + a3 = 0: gamma degenerates".into()));
    }
    let gamma = HatPoly::new(vec![-t, 4.0 * a0, t]);
    let inner = a1.powi(3) + a1 * a1 * a3 - a1 * (4.0 * a0 * a2 + a3 * a3)
        + a3 * (8.0 * a0 * a0 - 4.0 * a0 * a2 - a3 * a3);
    let k = 2.0 * inner / t.powi(3);
    Ok((gamma, HatPoly::new(vec![k * t, -4.0 * k * a0])))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VieteParam {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    /// `(a0/a3, a1/a3, a2/a3)`.
    pub ratios: [f64; 3],
}

impl VieteParam {
    /// Canonical quartic coefficients `a0..a3` for a given `a3`.
    pub fn coeffs(&self, a3: f64) -> [f64; 4] {
        [self.ratios[0] * a3, self.ratios[1] * a3, self.ratios[2] * a3, a3]
    }

    /// `α² + β² − 1 − α(μ − 1/μ)`.
    pub fn relation_defect(&self) -> f64 {
        let (a, b, m) = (self.alpha, self.beta, self.mu);
        a * a + b * b - 1.0 - a * (m - 1.0 / m)
    }
}

/// Quartic whose roots are `α ± iβ, μ, −1/μ` and whose `γ` divides `Ĝ₄`.
pub fn viete_parametrization(alpha: f64, beta: f64) -> Result<VieteParam> {
    if alpha == 0.0 {
        return Err(Error::AlphaZero);
    }
    if beta == 0.0 {
        return Err(Error::Precondition("beta must be nonzero".into()));
    }
    let rho = alpha * alpha + beta * beta;
    let t = (rho - 1.0) / alpha;
    let root = (t * t + 4.0).sqrt();
    let mu = if t >= 0.0 { (t + root) / 2.0 } else { (t - root) / 2.0 };
    Ok(VieteParam {
        alpha,
        beta,
        mu,
        ratios: [
            (1.0 - rho * rho) / (4.0 * alpha),
            rho,
            (1.0 - 3.0 * alpha * alpha - beta * beta) / (2.0 * alpha),
        ],
    })
}

/// Fields on a periodic `nt × nx` grid, row-major in `(i_t, i_x)`.
#[derive(Clone, Debug)]
pub struct EllipticFields {
    pub nt: usize,
    pub nx: usize,
    pub ht: f64,
    pub hx: f64,
    pub v: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EllipticResidual {
    pub max_residual: f64,
    pub residual: Vec<f64>,
    pub discriminant: Vec<f64>,
}

pub const BETA_MIN: f64 = 1e-8;

/// `a·b − c·d` with one rounding error (Kahan).
fn diff_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let w = c * d;
    let e = (-c).mul_add(d, w);
    a.mul_add(b, -w) + e
}

/// `(v_t/β)_t + ((α/β) v_x)_t + ((α/β) v_t)_x + (((α²+β²)/β) v_x)_x` by
/// centered differences, and the principal-symbol discriminant per node.
pub fn elliptic_pde_residual(f: &EllipticFields) -> Result<EllipticResidual> {
    let (nt, nx) = (f.nt, f.nx);
    let size = nt * nx;
    if nt < 3 || nx < 3 {
        return Err(Error::GridTooSmall { nx: nt, ny: nx, min: 3 });
    }
    if f.v.len() != size || f.alpha.len() != size || f.beta.len() != size {
        return Err(Error::Invalid("field sizes do not match the grid".into()));
    }
    if let Some(k) = f.beta.iter().position(|b| !(b.abs() >= BETA_MIN)) {
        return Err(Error::Precondition(format!(
            "|beta| = {:e} below {BETA_MIN:e} at node {k}",
            f.beta[k].abs()
        )));
    }
    let idx = |i: isize, j: isize| i.rem_euclid(nt as isize) as usize * nx + j.rem_euclid(nx as isize) as usize;
    let d_t = |u: &[f64], i: isize, j: isize| (u[idx(i + 1, j)] - u[idx(i - 1, j)]) / (2.0 * f.ht);
    let d_x = |u: &[f64], i: isize, j: isize| (u[idx(i, j + 1)] - u[idx(i, j - 1)]) / (2.0 * f.hx);
    let nodes = |g: &(dyn Fn(isize, isize) -> f64 + Sync)| -> Vec<f64> {
        (0..size)
            .into_par_iter()
            .map(|k| g((k / nx) as isize, (k % nx) as isize))
            .collect()
    };
    let vt = nodes(&|i, j| d_t(&f.v, i, j));
    let vx = nodes(&|i, j| d_x(&f.v, i, j));
    let flux_t = nodes(&|i, j| {
        let k = idx(i, j);
        (vt[k] + f.alpha[k] * vx[k]) / f.beta[k]
    });
    let flux_x = nodes(&|i, j| {
        let k = idx(i, j);
        let (a, b) = (f.alpha[k], f.beta[k]);
        (a * vt[k] + (a * a + b * b) * vx[k]) / b
    });
    let residual = nodes(&|i, j| d_t(&flux_t, i, j) + d_x(&flux_x, i, j));
    let discriminant = (0..size)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (f.alpha[k], f.beta[k]);
            let a12 = a / b;
            diff_of_products(a12, a12, 1.0 / b, (a * a + b * b) / b)
        })
        .collect();
    let max_residual = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(EllipticResidual {
        max_residual,
        residual,
        discriminant,
    })
}

/// Canonicalize and split a quartic coefficient vector.
pub fn canonical4(a: &[f64]) -> Result<([f64; 4], f64)> {
    if a.len() != 5 {
        return Err(Error::UnsupportedDegree(a.len().saturating_sub(1)));
    }
    let (c, shift) = canonicalize_quartic([a[0], a[1], a[2], a[3], a[4]]);
    Ok(([c[0], c[1], c[2], c[3]], shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::solve_quartic;

    #[test]
    fn matrix_examples() {
        let m = build_matrix_a(&[0.0, 0.0, 1.0, 1.0], 3).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 3.0]));
        let m = build_matrix_a(&[0.0, 0.0, 0.0, 1.0, 1.0], 4).unwrap();
        assert_eq!(m.column(3).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 3.0, 4.0]);
        for j in 1..4 {
            assert_eq!(m[(j, j - 1)], 1.0);
        }
        let (a0, a1, a2) = (0.4, -0.7, 1.9);
        let m = build_matrix_a(&[a0, a1, a2, 1.0], 3).unwrap();
        assert_eq!(m[(0, 2)], a1);
        assert_eq!(m[(1, 2)], 2.0 * a2 - 3.0 * a0);
        assert_eq!(m[(2, 2)], 3.0 - 2.0 * a1);
        assert_eq!((m[(1, 0)], m[(2, 1)]), (a2, a2));
        assert!(build_matrix_a(&[1.0, 1.0, 1.0], 2).is_err());
    }

    #[test]
    fn flat_cubic_eigenvalues() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let m = build_matrix_a(&a, 3).unwrap();
        let (_, g) = hat_polys(&a, 3).unwrap();
        let rs = solve_poly(&g.coeffs).unwrap();
        assert!(eigen_crosscheck(&m, 1.0, &rs).unwrap() <= 1e-12);
    }

    #[test]
    fn eigenvalues_scale_with_g() {
        let g = 2.0;
        let a = [0.3, -0.2, g, 1.0];
        let m = build_matrix_a(&a, 3).unwrap();
        let (_, gh) = hat_polys(&a, 3).unwrap();
        let rs = solve_poly(&gh.coeffs).unwrap();
        assert!(eigen_crosscheck(&m, g, &rs).unwrap() <= 1e-12);
    }

    #[test]
    fn invariant_examples() {
        let (f, _) = hat_polys(&[1.0, 0.0, 2.0, 0.0, 1.0], 4).unwrap();
        // roots ±1, ±2
        let rs = solve_quartic([4.0, 0.0, -5.0, 0.0, 1.0]).unwrap();
        let d = riemann_invariants(&f, &rs, 1.0, 4).unwrap();
        for e in &d.entries {
            assert!((e.r - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let a = [0.0, 0.0, 1.0, 1.0];
        let (f, g) = hat_polys(&a, 3).unwrap();
        let rs = solve_poly(&g.coeffs).unwrap();
        let d = riemann_invariants(&f, &rs, 1.0, 3).unwrap();
        let s = (3.0 + 17f64.sqrt()) / 2.0;
        let zero = d.entries.iter().find(|e| e.s.re.abs() < 1e-14).unwrap();
        assert_eq!(zero.r.norm(), 0.0);
        let top = d.entries.iter().find(|e| (e.s.re - s).abs() < 1e-12).unwrap();
        let want = (s * s + s * s * s) / (1.0 + s * s).powf(1.5);
        assert!((top.r.re - want).abs() < 1e-14);
        assert!((top.r.re - 1.142_985_028_074_64).abs() < 1e-12);
    }

    #[test]
    fn imaginary_unit_root_is_rejected() {
        let f = HatPoly::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        let rs = solve_quartic([-1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(riemann_invariants(&f, &rs, 1.0, 4), Err(Error::RootAtImaginaryUnit { .. })));
    }

    #[test]
    fn sensitivity_at_special_roots() {
        // a1 = 0 makes s = 0 a root
        let a = [0.5, 0.0, 0.3, 1.0];
        let dg = ghat4(&a).derivative().eval(0.0);
        let d = root_sensitivity(&a, 0.0).unwrap();
        assert_eq!(d, [0.0, 1.0 / dg, 0.0, 0.0]);
        let d = root_sensitivity(&[0.1, 0.2, 0.3, 1.0], 1.0).unwrap();
        let dg = ghat4(&[0.1, 0.2, 0.3, 1.0]).derivative().eval(1.0);
        for (x, w) in d.iter().zip([-4.0, -2.0, 0.0, 2.0]) {
            assert!((x - w / dg).abs() < 1e-15);
        }
    }

    #[test]
    fn sensitivity_matches_resolve() {
        let a = [1.0, 1.0, 1.0, 2.0];
        let rs = solve_poly(&ghat4(&a).coeffs).unwrap();
        for &s in &rs.real_roots {
            let d = root_sensitivity(&a, s).unwrap();
            for j in 0..4 {
                let eps = 1e-6;
                let mut b = a;
                b[j] += eps;
                let rb = solve_poly(&ghat4(&b).coeffs).unwrap();
                let sb = rb.real_roots.iter().copied().min_by(|x, y| (x - s).abs().total_cmp(&(y - s).abs())).unwrap();
                assert!(((sb - s) / eps - d[j]).abs() < 1e-5, "j={j}");
            }
        }
    }

    #[test]
    fn jacobian_inverse_and_closed_column() {
        let a = [1.0, 1.0, 1.0, 2.0];
        let rs = solve_poly(&ghat4(&a).coeffs).unwrap();
        assert_eq!(classify_roots(&rs, 1e-7), RootClass::Elliptic);
        let m = invariant_gradient_matrix(&rs).unwrap();
        let j = jacobian_da_dr(&rs).unwrap();
        assert!((m * j - Matrix4::identity()).norm() < 1e-10);
        let roots = rs.all_roots();
        for i in 2..4 {
            let s = roots[i];
            let big_s = (0..4).filter(|&k| k != i).fold(Complex64::new(1.0, 0.0), |acc, k| acc * (s - roots[k]));
            let want = (Complex64::new(1.0, 0.0) + s * s).powi(2) / big_s;
            assert!((j[(3, i)] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn nonlinearity_reference_tuple() {
        let a = [1.0, 1.0, 1.0, 2.0];
        let rs = solve_poly(&ghat4(&a).coeffs).unwrap();
        let reps = genuine_nonlinearity(&a, &rs).unwrap();
        assert_eq!(reps.len(), 2);
        for r in reps {
            assert!((r.dlambda_dr - r.oracle_dlambda_dr).abs() <= 1e-6 * r.oracle_dlambda_dr.abs().max(1.0));
            assert!(r.dlambda_dr != 0.0 && r.gamma != 0.0);
        }
    }

    #[test]
    fn remainder_reference() {
        let (g, r) = remainder_gamma(&[1.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(g.coeffs, vec![-3.0, 4.0, 3.0]);
        assert!((r.coeffs[0] + 30.0 / 27.0).abs() < 1e-15 && (r.coeffs[1] - 40.0 / 27.0).abs() < 1e-15);
        let (a1, a3) = (0.7, 1.3);
        let (g, r) = remainder_gamma(&[0.0, a1, 0.4, a3]).unwrap();
        assert_eq!(r.coeffs[1], 0.0);
        assert!((r.coeffs[0] - 2.0 * (a1 - a3)).abs() < 1e-14);
        assert!(g.eval(1.0).abs() < 1e-15 && g.eval(-1.0).abs() < 1e-15);
        assert!(remainder_gamma(&[1.0, 1.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn viete_reference() {
        let v = viete_parametrization(1.0, 1.0).unwrap();
        assert_eq!(v.ratios, [-0.75, 2.0, -1.5]);
        assert!((v.mu - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(v.relation_defect().abs() < 1e-12);
        let a = v.coeffs(1.0);
        let rs = solve_poly(&ghat4(&a).coeffs).unwrap();
        let (al, be) = rs.complex_pairs[0];
        assert!((al - 1.0).abs() < 1e-8 && (be - 1.0).abs() < 1e-8);
        let mut want = [v.mu, -1.0 / v.mu];
        want.sort_by(f64::total_cmp);
        for (x, w) in rs.real_roots.iter().zip(want) {
            assert!((x - w).abs() < 1e-8);
        }
        let (_, r) = quartic_invariants(&a).unwrap();
        assert!(r[0].im.abs() < 1e-12);
        assert_eq!(viete_parametrization(0.0, 1.0), Err(Error::AlphaZero));
    }

    #[test]
    fn viete_flags_im_r_zero() {
        let v = viete_parametrization(0.6, 0.9).unwrap();
        let a = v.coeffs(1.5);
        let rs = solve_poly(&ghat4(&a).coeffs).unwrap();
        let reps = genuine_nonlinearity(&a, &rs).unwrap();
        assert!(reps.iter().all(|r| r.im_r_zero));
    }

    fn grid(nt: usize, nx: usize, f: impl Fn(f64, f64) -> (f64, f64, f64)) -> EllipticFields {
        let mut e = EllipticFields {
            nt,
            nx,
            ht: 1.0 / nt as f64,
            hx: 1.0 / nx as f64,
            v: vec![],
            alpha: vec![],
            beta: vec![],
        };
        for i in 0..nt {
            for j in 0..nx {
                let (v, a, b) = f(i as f64 / nt as f64, j as f64 / nx as f64);
                e.v.push(v);
                e.alpha.push(a);
                e.beta.push(b);
            }
        }
        e
    }

    #[test]
    fn elliptic_residual_examples() {
        use std::f64::consts::PI;
        let e = grid(32, 32, |t, x| (2.5, (2.0 * PI * t).sin(), 1.5 + (2.0 * PI * x).cos()));
        let r = elliptic_pde_residual(&e).unwrap();
        assert!(r.max_residual < 1e-12);
        assert!(r.discriminant.iter().all(|d| (d + 1.0).abs() <= 1e-14));
        // harmonic on the torus only if constant; use a Laplace eigenfunction and compare with −8π² v
        let mut errs = vec![];
        for n in [32, 64] {
            let e = grid(n, n, |t, x| ((2.0 * PI * t).sin() * (2.0 * PI * x).cos(), 0.0, 1.0));
            let r = elliptic_pde_residual(&e).unwrap();
            let err = r
                .residual
                .iter()
                .zip(&e.v)
                .map(|(res, v)| (res + 8.0 * PI * PI * v).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 3.5);
        let bad = grid(8, 8, |_, _| (0.0, 1.0, 0.0));
        assert!(matches!(elliptic_pde_residual(&bad), Err(Error::Precondition(_))));
    }
}
