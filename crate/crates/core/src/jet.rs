//! Second-order forward-mode derivatives in two variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the two torus coordinates. Arithmetic and the elementary
//! functions propagate all six quantities exactly, so fields built from
//! expressions or compositions get analytic partials for free.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64, d11: f64, d12: f64, d22: f64) -> Self {
        Jet {
            v,
            d1,
            d2,
            d11,
            d12,
            d22,
        }
    }

    pub const fn constant(v: f64) -> Self {
        Jet::new(v, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The first coordinate as an independent variable.
    pub const fn var1(v: f64) -> Self {
        Jet::new(v, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub const fn var2(v: f64) -> Self {
        Jet::new(v, 0.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// Linear form `m*u1 + n*u2` evaluated at `(u1, u2)`.
    pub fn linear(m: f64, n: f64, u1: f64, u2: f64) -> Self {
        Jet::new(m * u1 + n * u2, m, n, 0.0, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.v, self.d1, self.d2, self.d11, self.d12, self.d22]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Jet::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }

    /// Apply a scalar function given its value and first two derivatives at `self.v`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        Jet {
            v: f0,
            d1: f1 * self.d1,
            d2: f1 * self.d2,
            d11: f1 * self.d11 + f2 * self.d1 * self.d1,
            d12: f1 * self.d12 + f2 * self.d1 * self.d2,
            d22: f1 * self.d22 + f2 * self.d2 * self.d2,
        }
    }

    pub fn recip(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn tanh(&self) -> Jet {
        let t = self.v.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }

    pub fn powi(&self, k: i32) -> Jet {
        match k {
            0 => Jet::constant(1.0),
            1 => *self,
            _ => {
                let kf = k as f64;
                self.chain(
                    self.v.powi(k),
                    kf * self.v.powi(k - 1),
                    kf * (kf - 1.0) * self.v.powi(k - 2),
                )
            }
        }
    }

    pub fn powf(&self, c: f64) -> Jet {
        if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
            return self.powi(c as i32);
        }
        self.chain(
            self.v.powf(c),
            c * self.v.powf(c - 1.0),
            c * (c - 1.0) * self.v.powf(c - 2.0),
        )
    }

    /// General power `self^e` for a non-constant exponent.
    pub fn pow(&self, e: &Jet) -> Jet {
        if e.d1 == 0.0 && e.d2 == 0.0 && e.d11 == 0.0 && e.d12 == 0.0 && e.d22 == 0.0 {
            return self.powf(e.v);
        }
        (*e * self.ln()).exp()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(
            self.v + o.v,
            self.d1 + o.d1,
            self.d2 + o.d2,
            self.d11 + o.d11,
            self.d12 + o.d12,
            self.d22 + o.d22,
        )
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(
            self.v - o.v,
            self.d1 - o.d1,
            self.d2 - o.d2,
            self.d11 - o.d11,
            self.d12 - o.d12,
            self.d22 - o.d22,
        )
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2, -self.d11, -self.d12, -self.d22)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + self.v * o.d2,
            d11: self.d11 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d11,
            d12: self.d12 * o.v + self.d1 * o.d2 + self.d2 * o.d1 + self.v * o.d12,
            d22: self.d22 * o.v + 2.0 * self.d2 * o.d2 + self.v * o.d22,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet::new(
            self.v * c,
            self.d1 * c,
            self.d2 * c,
            self.d11 * c,
            self.d12 * c,
            self.d22 * c,
        )
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet, Jet) -> Jet, x: f64, y: f64) {
        let j = f(Jet::var1(x), Jet::var2(y));
        let h = 1e-5;
        let val = |a: f64, b: f64| f(Jet::constant(a), Jet::constant(b)).v;
        let d1 = (val(x + h, y) - val(x - h, y)) / (2.0 * h);
        let d2 = (val(x, y + h) - val(x, y - h)) / (2.0 * h);
        let g1 = |a: f64, b: f64| f(Jet::var1(a), Jet::var2(b)).d1;
        let g2 = |a: f64, b: f64| f(Jet::var1(a), Jet::var2(b)).d2;
        let d11 = (g1(x + h, y) - g1(x - h, y)) / (2.0 * h);
        let d12 = (g1(x, y + h) - g1(x, y - h)) / (2.0 * h);
        let d22 = (g2(x, y + h) - g2(x, y - h)) / (2.0 * h);
        for (a, b) in [(j.d1, d1), (j.d2, d2), (j.d11, d11), (j.d12, d12), (j.d22, d22)] {
            assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn products_and_quotients() {
        fd_check(|x, y| x * y * y / (x + 3.0), 0.7, -1.2);
    }

    #[test]
    fn transcendental() {
        fd_check(|x, y| (x * 2.0).sin() * y.cos() + (x * y).exp(), 0.3, 0.4);
        fd_check(|x, y| (x * x + y * y + 1.0).sqrt().ln() + (x - y).tanh(), 0.3, 0.4);
        fd_check(|x, y| (x + 2.0).powf(1.5) * y.powi(3) + x.tan(), 0.3, 0.4);
        fd_check(|x, y| (x + 2.0).pow(&(y + 1.0)), 0.3, 0.4);
    }
}
