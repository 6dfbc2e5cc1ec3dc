use num_complex::Complex64;
use proptest::prelude::*;

use torus_hydro::exact::{int, poly_divmod, rat, sturm_real_root_count, Interval, RationalPoly};
use torus_hydro::hydro::{analyze_point, matched_mismatch, viete_parametrization};
use torus_hydro::integral::{canonicalize_quartic, hat_polys, kolokoltsov_coeffs, HomPoly};
use torus_hydro::roots::{classify_roots, solve_poly, RootClass, DEFAULT_CLASS_TOL};
use torus_hydro::{liouville_conformal_factor, Lattice, LiouvilleSpec, Profile, ScalarField, TorusPoint};

fn coeff() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn expand(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c.iter().map(|z| z.re).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fields_are_periodic(u1 in -2.0..2.0f64, u2 in -2.0..2.0f64, m in -2i32..=2, n in -2i32..=2) {
        let lat = Lattice::new(1.0, 2.0).unwrap();
        let f = ScalarField::parse("2 + 0.5*sin(2*pi*x/2)*cos(2*pi*t)", lat).unwrap();
        let a = f.value(TorusPoint::new(u1, u2));
        let b = f.value(TorusPoint::new(u1 + m as f64, u2 + 2.0 * n as f64));
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn jets_match_finite_differences(u1 in 0.0..1.0f64, u2 in 0.0..1.0f64) {
        let f = ScalarField::parse("exp(0.3*sin(2*pi*t))*(2 + cos(2*pi*(t + 2*x)))", Lattice::unit()).unwrap();
        let q = TorusPoint::new(u1, u2);
        let j = f.eval(q);
        let h = 1e-5;
        let v = |a: f64, b: f64| f.value(TorusPoint::new(u1 + a, u2 + b));
        prop_assert!((j.d1 - (v(h, 0.0) - v(-h, 0.0)) / (2.0 * h)).abs() <= 1e-6);
        prop_assert!((j.d2 - (v(0.0, h) - v(0.0, -h)) / (2.0 * h)).abs() <= 1e-6);
        let h = 1e-4;
        let d12 = (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h);
        prop_assert!((j.d12 - d12).abs() <= 1e-4 * (1.0 + d12.abs()));
    }

    #[test]
    fn liouville_factor_is_swap_symmetric(u1 in 0.0..1.0f64, u2 in 0.0..1.0f64) {
        let spec = LiouvilleSpec::new(
            Profile::parse("2+cos(2*pi*xi)").unwrap(),
            Profile::parse("1.5+sin(2*pi*xi)^2").unwrap(),
            [1.0, 1.0, 1.0, -1.0],
            Lattice::unit(),
        );
        let a = liouville_conformal_factor(&spec).unwrap();
        let b = liouville_conformal_factor(&spec.swapped()).unwrap();
        let q = TorusPoint::new(u1, u2);
        prop_assert!((a.lambda.value(q) - b.lambda.value(q)).abs() <= 1e-14);
    }

    #[test]
    fn real_roots_are_critical_points(a0 in coeff(), a1 in coeff(), a2 in coeff(), g in 0.5..3.0f64, quartic in any::<bool>()) {
        let a: Vec<f64> = if quartic { vec![a0, a1, a2, g, 0.7] } else { vec![a0, a1, g, 1.0] };
        let n = a.len() - 1;
        let pa = analyze_point(&a, 1.0, DEFAULT_CLASS_TOL).unwrap();
        let r = |s: f64| pa.fhat.eval(s) / (1.0 + s * s).powf(n as f64 / 2.0);
        if let Some(rs) = &pa.roots {
            for &s in &rs.real_roots {
                let h = 1e-6 * (1.0 + s.abs());
                let slope = (r(s + h) - r(s - h)) / (2.0 * h);
                prop_assert!(slope.abs() <= 1e-5 * (1.0 + pa.fhat.max_abs()), "s = {s}, slope = {slope}");
            }
        }
    }

    #[test]
    fn critical_values_bound_the_circle(a0 in coeff(), a1 in coeff(), a2 in coeff(), g in 0.5..3.0f64) {
        let a = [a0, a1, a2, g, 0.0];
        let pa = analyze_point(&a, 1.0, DEFAULT_CLASS_TOL).unwrap();
        let riemann = pa.riemann.unwrap();
        let crit = riemann.real_entries().map(|e| e.r.re).fold(f64::NEG_INFINITY, f64::max);
        let circle = (0..20000)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 20000.0;
                let (c, s) = (th.cos(), th.sin());
                (0..5).map(|j| a[j] * c.powi(4 - j as i32) * s.powi(j as i32)).sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((circle - crit).abs() <= 1e-6 * (1.0 + crit.abs()), "{circle} vs {crit}");
    }

    #[test]
    fn canonicalization_preserves_ghat(a in prop::array::uniform5(coeff())) {
        let (c, shift) = canonicalize_quartic(a);
        prop_assert_eq!(c[4], 0.0);
        prop_assert_eq!(shift, a[4]);
        let (_, g1) = hat_polys(&a, 4).unwrap();
        let (_, g2) = hat_polys(&c, 4).unwrap();
        for (x, y) in g1.coeffs.iter().zip(&g2.coeffs) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn kolokoltsov_is_conjugate_symmetric(b in prop::collection::vec(coeff(), 2..6)) {
        let k = kolokoltsov_coeffs(&b);
        let n = k.len() - 1;
        for i in 0..=n {
            prop_assert!((k[i] - k[n - i].conj()).norm() <= 1e-13);
        }
    }

    #[test]
    fn solver_recovers_roots(
        reals in prop::collection::vec(-3.0..3.0f64, 0..=4),
        re in -2.0..2.0f64,
        im in 0.2..2.0f64,
        with_pair in any::<bool>(),
    ) {
        let mut roots: Vec<Complex64> = reals.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        if with_pair && roots.len() <= 2 {
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        }
        prop_assume!(roots.len() >= 2);
        for i in 0..roots.len() {
            for j in 0..i {
                prop_assume!((roots[i] - roots[j]).norm() > 0.05);
            }
        }
        let rs = solve_poly(&expand(&roots)).unwrap();
        prop_assert!(matched_mismatch(&rs.all_roots(), &roots) <= 1e-7);
    }

    #[test]
    fn sturm_count_matches_solver(
        ints in prop::collection::btree_set(-6i64..=6, 0..=3),
        b in -3i64..=3,
        extra in 1i64..=4,
        square in any::<bool>(),
    ) {
        // Π(s − r_i) · (s² + b s + c) with c > b²/4
        let c = b * b / 4 + extra;
        let mut p = RationalPoly::from_ints(&[c, b, 1]);
        for &r in &ints {
            p = p.mul(&RationalPoly::from_ints(&[-r, 1]));
        }
        if square && !ints.is_empty() {
            let r = *ints.iter().next().unwrap();
            p = p.mul(&RationalPoly::from_ints(&[-r, 1]));
        }
        let count = sturm_real_root_count(&p, &Interval::Line).unwrap();
        prop_assert_eq!(count, ints.len());
        let lo = int(-10);
        let hi = int(0);
        let below = sturm_real_root_count(&p, &Interval::Bounded(lo, hi)).unwrap();
        prop_assert_eq!(below, ints.iter().filter(|&&r| r <= 0).count());
        if !square && p.degree().unwrap() <= 4 {
            let rs = solve_poly(&p.to_f64()).unwrap();
            prop_assert_eq!(rs.real_roots.len(), count);
        }
    }

    #[test]
    fn divmod_round_trip(
        num in prop::collection::vec(-20i64..=20, 1..8),
        den in prop::collection::vec(-20i64..=20, 1..5),
        d in 1i64..=7,
    ) {
        let den = RationalPoly::new(den.iter().map(|&x| rat(x, d)).collect());
        prop_assume!(!den.is_zero());
        let num = RationalPoly::from_ints(&num);
        let (q, r) = poly_divmod(&num, &den).unwrap();
        prop_assert_eq!(q.mul(&den).add(&r), num);
        if let Some(dr) = r.degree() {
            prop_assert!(dr < den.degree().unwrap());
        }
    }

    #[test]
    fn product_evaluates_as_product(a in prop::collection::vec(-9i64..=9, 1..5), b in prop::collection::vec(-9i64..=9, 1..5), x in -5i64..=5) {
        let (pa, pb) = (RationalPoly::from_ints(&a), RationalPoly::from_ints(&b));
        let x = rat(x, 3);
        prop_assert_eq!(pa.mul(&pb).eval(&x), pa.eval(&x) * pb.eval(&x));
    }

    #[test]
    fn viete_roots(alpha in 0.1..2.0f64, beta in 0.1..2.0f64, negative in any::<bool>()) {
        let alpha = if negative { -alpha } else { alpha };
        let v = viete_parametrization(alpha, beta).unwrap();
        prop_assert!(v.relation_defect().abs() <= 1e-10 * (1.0 + alpha.abs().recip()));
        let c = v.coeffs(1.0);
        let (_, g) = hat_polys(&[c[0], c[1], c[2], c[3], 0.0], 4).unwrap();
        let rs = solve_poly(&g.coeffs).unwrap();
        prop_assert_eq!(classify_roots(&rs, DEFAULT_CLASS_TOL), RootClass::Elliptic);
        let want = [
            Complex64::new(alpha, beta),
            Complex64::new(alpha, -beta),
            Complex64::new(v.mu, 0.0),
            Complex64::new(-1.0 / v.mu, 0.0),
        ];
        prop_assert!(matched_mismatch(&rs.all_roots(), &want) <= 1e-8);
    }

    #[test]
    fn hom_poly_algebra(a in prop::collection::vec(coeff(), 1..5), b in prop::collection::vec(coeff(), 1..5), x in coeff(), y in coeff()) {
        let (pa, pb) = (HomPoly::new(a), HomPoly::new(b));
        let prod = pa.mul(&pb).eval(x, y);
        prop_assert!((prod - pa.eval(x, y) * pb.eval(x, y)).abs() <= 1e-10 * (1.0 + prod.abs()));
        // Euler's relation for homogeneous polynomials
        let n = pa.degree() as f64;
        let euler = x * pa.d_x().eval(x, y) + y * pa.d_y().eval(x, y);
        prop_assert!((euler - n * pa.eval(x, y)).abs() <= 1e-10 * (1.0 + euler.abs()));
    }
}
