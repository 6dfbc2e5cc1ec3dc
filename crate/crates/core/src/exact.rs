//! Exact rational polynomial arithmetic, Sturm chains and exact checks of the
//! closed-form identities for the quartic case.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        RationalPoly::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        RationalPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RationalPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RationalPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn mul(&self, o: &RationalPoly) -> RationalPoly {
        if self.is_zero() || o.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn neg(&self) -> RationalPoly {
        self.scale(&int(-1))
    }

    pub fn derivative(&self) -> RationalPoly {
        RationalPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn monic(&self) -> RationalPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    /// Nearest `f64` coefficients.
    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one() && k > 0;
            let body = if mag.is_integer() {
                mag.to_string()
            } else {
                format!("({mag})")
            };
            match (k, unit) {
                (0, _) => write!(f, "{body}")?,
                (1, true) => f.write_str("s")?,
                (1, false) => write!(f, "{body}*s")?,
                (_, true) => write!(f, "s^{k}")?,
                (_, false) => write!(f, "{body}*s^{k}")?,
            }
        }
        Ok(())
    }
}

/// Quotient and remainder with `num = q·den + r`, `deg r < deg den`.
pub fn poly_divmod(num: &RationalPoly, den: &RationalPoly) -> Result<(RationalPoly, RationalPoly)> {
    let dd = den.degree().ok_or(Error::ZeroPolynomial)?;
    let lead = den.leading();
    let mut rem = num.coeffs.clone();
    let nq = rem.len().saturating_sub(dd);
    let mut quot = vec![Rational::zero(); nq];
    for k in (0..nq).rev() {
        let c = &rem[k + dd] / &lead;
        if !c.is_zero() {
            for (j, dj) in den.coeffs.iter().enumerate() {
                rem[k + j] -= &c * dj;
            }
        }
        quot[k] = c;
    }
    rem.truncate(dd);
    Ok((RationalPoly::new(quot), RationalPoly::new(rem)))
}

/// Monic greatest common divisor.
pub fn poly_gcd(a: &RationalPoly, b: &RationalPoly) -> RationalPoly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let (_, r) = poly_divmod(&x, &y).expect("nonzero divisor");
        x = y;
        y = r;
    }
    x.monic()
}

/// Squarefree part `p / gcd(p, p′)`.
pub fn squarefree(p: &RationalPoly) -> Result<RationalPoly> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let g = poly_gcd(p, &p.derivative());
    Ok(poly_divmod(p, &g)?.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Interval {
    Line,
    /// Half-open `(lo, hi]`.
    Bounded(Rational, Rational),
}

fn sturm_chain(p: &RationalPoly) -> Vec<RationalPoly> {
    let mut chain = vec![p.clone(), p.derivative()];
    while !chain[chain.len() - 1].is_zero() {
        let n = chain.len();
        let (_, r) = poly_divmod(&chain[n - 2], &chain[n - 1]).expect("nonzero divisor");
        chain.push(r.neg());
    }
    chain.pop();
    chain
}

fn sign_changes(signs: impl Iterator<Item = i32>) -> usize {
    let mut prev = 0;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if prev != 0 && s != prev {
            n += 1;
        }
        prev = s;
    }
    n
}

fn sgn(r: &Rational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots (squarefree part taken internally).
pub fn sturm_real_root_count(p: &RationalPoly, interval: &Interval) -> Result<usize> {
    let sf = squarefree(p)?;
    let chain = sturm_chain(&sf);
    Ok(match interval {
        Interval::Line => {
            let at_pos = chain.iter().map(|q| sgn(&q.leading()));
            let at_neg = chain.iter().map(|q| {
                let d = q.degree().unwrap_or(0);
                sgn(&q.leading()) * if d % 2 == 0 { 1 } else { -1 }
            });
            sign_changes(at_neg).saturating_sub(sign_changes(at_pos))
        }
        Interval::Bounded(lo, hi) => {
            let v = |x: &Rational| sign_changes(chain.iter().map(|q| sgn(&q.eval(x))));
            v(lo).saturating_sub(v(hi))
        }
    })
}

/// `Ĝ₄` for `a = (a0, a1, a2, a3)` with `a4 = 0`.
pub fn ghat4(a: &[Rational; 4]) -> RationalPoly {
    let [a0, a1, a2, a3] = a;
    RationalPoly::new(vec![
        -a1.clone(),
        int(4) * a0 - int(2) * a2,
        int(3) * (a1 - a3),
        int(2) * a2,
        a3.clone(),
    ])
}

/// `γ(s) = (a3+a1) s² + 4 a0 s − (a1+a3)`.
pub fn gamma(a: &[Rational; 4]) -> RationalPoly {
    let [a0, a1, _, a3] = a;
    let t = a1 + a3;
    RationalPoly::new(vec![-t.clone(), int(4) * a0, t])
}

/// Closed form of the remainder of `Ĝ₄ ÷ γ`; needs `a1+a3 ≠ 0`.
pub fn remainder_closed_form(a: &[Rational; 4]) -> Result<RationalPoly> {
    let [a0, a1, a2, a3] = a;
    let t = a1 + a3;
    if t.is_zero() {
        return Err(Error::Precondition("a1 + a3 = 0".into()));
    }
    let inner = a1 * a1 * a1 + a1 * a1 * a3 - a1 * (int(4) * a0 * a2 + a3 * a3)
        + a3 * (int(8) * a0 * a0 - int(4) * a0 * a2 - a3 * a3);
    let k = int(2) * inner / (&t * &t * &t);
    Ok(RationalPoly::new(vec![&k * &t, -(&k * int(4) * a0)]))
}

/// The quartic `Q` of the genuine-nonlinearity formula.
pub fn nonlinearity_quartic(a: &[Rational; 4]) -> RationalPoly {
    let [a0, a1, a2, a3] = a;
    RationalPoly::new(vec![
        a1 + int(3) * a3,
        int(-4) * (a0 + a2),
        int(3) * (a1 - int(3) * a3),
        int(4) * a2,
        int(2) * a3,
    ])
}

/// Quartic family `s⁴ + 2k s³ − 6 s² − 2k s + c0`.
pub fn quartic_family(k: i64, c0: i64) -> RationalPoly {
    RationalPoly::from_ints(&[c0, -2 * k, -6, 2 * k, 1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRow {
    pub k: i64,
    pub minus_one_roots: usize,
    pub plus_one_roots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub trials: usize,
    pub seed: u64,
    pub remainder: CheckOutcome,
    pub nonlinearity: CheckOutcome,
    /// The constant `c` with `2Ĝ₄ − Q = c·γ`, when one constant fits every trial.
    pub nonlinearity_constant: Option<Rational>,
    pub unit_values: CheckOutcome,
    pub family: Vec<FamilyRow>,
}

impl IdentityReport {
    /// True when every exact identity holds. The family table is a finding
    /// and does not enter.
    pub fn all_identities_hold(&self) -> bool {
        self.remainder.passed && self.nonlinearity.passed && self.unit_values.passed
    }

    pub fn family_minus_one_all_real(&self) -> bool {
        self.family.iter().all(|r| r.minus_one_roots == 4)
    }

    pub fn family_plus_one_all_real(&self) -> bool {
        self.family.iter().all(|r| r.plus_one_roots == 4)
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials = {}", self.trials)?;
        writeln!(f, "seed = {}", self.seed)?;
        for c in [&self.remainder, &self.nonlinearity, &self.unit_values] {
            writeln!(f, "[{}]", c.name)?;
            writeln!(f, "trials = {}", c.trials)?;
            writeln!(f, "status = \"{}\"", if c.passed { "pass" } else { "FAIL" })?;
            if let Some(w) = &c.witness {
                writeln!(f, "witness = \"{w}\"")?;
            }
            if c.name == "nonlinearity_factor" {
                match &self.nonlinearity_constant {
                    Some(c) => writeln!(f, "constant_c = \"{c}\"")?,
                    None => writeln!(f, "constant_c = \"none\"")?,
                }
            }
        }
        writeln!(f, "[family_real_roots]")?;
        writeln!(f, "minus_one = \"s^4 + 2k s^3 - 6 s^2 - 2k s - 1\"")?;
        writeln!(f, "plus_one = \"s^4 + 2k s^3 - 6 s^2 - 2k s + 1\"")?;
        writeln!(f, "minus_one_all_four = {}", self.family_minus_one_all_real())?;
        writeln!(f, "plus_one_all_four = {}", self.family_plus_one_all_real())?;
        for r in &self.family {
            writeln!(
                f,
                "k = {:>3}  minus_one = {}  plus_one = {}",
                r.k, r.minus_one_roots, r.plus_one_roots
            )?;
        }
        Ok(())
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-40..=40), rng.gen_range(1..=12))
}

fn show(a: &[Rational; 4]) -> String {
    format!("a = ({}, {}, {}, {})", a[0], a[1], a[2], a[3])
}

/// Random tuples `(a0..a3)` with `a3 ≠ 0` and `a1 + a3 ≠ 0`; with `a0_zero`
/// the first entry is forced to 0.
pub fn random_tuples(trials: usize, seed: u64, a0_zero: bool) -> Vec<[Rational; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let mut a: [Rational; 4] = std::array::from_fn(|_| random_rational(&mut rng));
        if a0_zero {
            a[0] = Rational::zero();
        }
        if a[3].is_zero() || (&a[1] + &a[3]).is_zero() {
            continue;
        }
        out.push(a);
    }
    out
}

fn first_failure<F>(tuples: &[[Rational; 4]], check: F) -> Option<String>
where
    F: Fn(&[Rational; 4]) -> Option<String> + Sync + Send,
{
    tuples.par_iter().find_map_first(check)
}

/// Exact checks of the remainder formula, the genuine-nonlinearity identity
/// constant, the `a0 = 0` evaluation and the quartic-family root counts.
pub fn verify_displayed_identities(trials: usize, seed: u64) -> IdentityReport {
    let tuples = random_tuples(trials, seed, false);

    let remainder_witness = first_failure(&tuples, |a| {
        let (_, r) = poly_divmod(&ghat4(a), &gamma(a)).ok()?;
        let closed = remainder_closed_form(a).ok()?;
        (r != closed).then(|| format!("{}: division gives {r}, closed form {closed}", show(a)))
    });

    let factors: Vec<std::result::Result<Rational, String>> = tuples
        .par_iter()
        .map(|a| {
            let lhs = ghat4(a).scale(&int(2)).sub(&nonlinearity_quartic(a));
            let (q, r) = poly_divmod(&lhs, &gamma(a)).map_err(|e| e.to_string())?;
            if !r.is_zero() || q.degree().unwrap_or(0) > 0 {
                return Err(format!("{}: 2G - Q = {lhs} is not a multiple of gamma", show(a)));
            }
            Ok(q.coeff(0))
        })
        .collect();
    let mut factor_witness = None;
    let mut constant: Option<Rational> = None;
    for (a, f) in tuples.iter().zip(&factors) {
        match f {
            Err(w) => {
                factor_witness = Some(w.clone());
                break;
            }
            Ok(c) => match &constant {
                None => constant = Some(c.clone()),
                Some(c0) if c0 != c => {
                    factor_witness = Some(format!("{}: factor {c} differs from {c0}", show(a)));
                    break;
                }
                _ => {}
            },
        }
    }
    if factor_witness.is_some() {
        constant = None;
    }

    let zero_tuples = random_tuples(trials, seed.wrapping_add(1), true);
    let unit_witness = first_failure(&zero_tuples, |a| {
        let g = ghat4(a);
        let want = int(2) * (&a[1] - &a[3]);
        let (gp, gm) = (g.eval(&int(1)), g.eval(&int(-1)));
        (gp != want || gm != want)
            .then(|| format!("{}: G(1) = {gp}, G(-1) = {gm}, expected {want}", show(a)))
    });

    let family = (-10..=10)
        .map(|k| FamilyRow {
            k,
            minus_one_roots: sturm_real_root_count(&quartic_family(k, -1), &Interval::Line).unwrap_or(0),
            plus_one_roots: sturm_real_root_count(&quartic_family(k, 1), &Interval::Line).unwrap_or(0),
        })
        .collect();

    IdentityReport {
        trials,
        seed,
        remainder: CheckOutcome {
            name: "remainder",
            trials,
            passed: remainder_witness.is_none(),
            witness: remainder_witness,
        },
        nonlinearity: CheckOutcome {
            name: "nonlinearity_factor",
            trials,
            passed: factor_witness.is_none(),
            witness: factor_witness,
        },
        nonlinearity_constant: constant,
        unit_values: CheckOutcome {
            name: "values_at_unit",
            trials,
            passed: unit_witness.is_none(),
            witness: unit_witness,
        },
        family,
    }
}
