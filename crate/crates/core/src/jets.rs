//! Forward-mode third-order jets in two variables.
//!
//! A `Jet3` carries a function value together with all partial derivatives up
//! to order three at a point `(x, y)`. Conformal factors are written as jet
//! expressions, which yields their derivatives in closed form — the curvature
//! needs order two and the curvature gradient order three.

/// Value and partials `(f, fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub c: [f64; 10],
}

const V: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const XX: usize = 3;
const XY: usize = 4;
const YY: usize = 5;
const XXX: usize = 6;
const XXY: usize = 7;
const XYY: usize = 8;
const YYY: usize = 9;

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; 10];
        c[V] = v;
        Jet3 { c }
    }

    pub fn var_x(x: f64) -> Self {
        let mut c = [0.0; 10];
        c[V] = x;
        c[X] = 1.0;
        Jet3 { c }
    }

    pub fn var_y(y: f64) -> Self {
        let mut c = [0.0; 10];
        c[V] = y;
        c[Y] = 1.0;
        Jet3 { c }
    }

    pub fn value(&self) -> f64 {
        self.c[V]
    }

    pub fn dx(&self) -> f64 {
        self.c[X]
    }

    pub fn dy(&self) -> f64 {
        self.c[Y]
    }

    /// Laplacian `fxx + fyy`.
    pub fn laplacian(&self) -> f64 {
        self.c[XX] + self.c[YY]
    }

    /// Gradient of the Laplacian: `(fxxx + fxyy, fxxy + fyyy)`.
    pub fn laplacian_gradient(&self) -> (f64, f64) {
        (self.c[XXX] + self.c[XYY], self.c[XXY] + self.c[YYY])
    }

    pub fn mul(&self, g: &Jet3) -> Jet3 {
        let f = &self.c;
        let gc = &g.c;
        let mut h = [0.0; 10];
        h[V] = f[V] * gc[V];
        h[X] = f[X] * gc[V] + f[V] * gc[X];
        h[Y] = f[Y] * gc[V] + f[V] * gc[Y];
        h[XX] = f[XX] * gc[V] + 2.0 * f[X] * gc[X] + f[V] * gc[XX];
        h[YY] = f[YY] * gc[V] + 2.0 * f[Y] * gc[Y] + f[V] * gc[YY];
        h[XY] = f[XY] * gc[V] + f[X] * gc[Y] + f[Y] * gc[X] + f[V] * gc[XY];
        h[XXX] = f[XXX] * gc[V] + 3.0 * f[XX] * gc[X] + 3.0 * f[X] * gc[XX] + f[V] * gc[XXX];
        h[YYY] = f[YYY] * gc[V] + 3.0 * f[YY] * gc[Y] + 3.0 * f[Y] * gc[YY] + f[V] * gc[YYY];
        h[XXY] = f[XXY] * gc[V]
            + f[XX] * gc[Y]
            + 2.0 * (f[XY] * gc[X] + f[X] * gc[XY])
            + f[Y] * gc[XX]
            + f[V] * gc[XXY];
        h[XYY] = f[XYY] * gc[V]
            + f[YY] * gc[X]
            + 2.0 * (f[XY] * gc[Y] + f[Y] * gc[XY])
            + f[X] * gc[YY]
            + f[V] * gc[XYY];
        Jet3 { c: h }
    }

    /// Compose with a scalar function given its first three derivatives at
    /// `self.value()`.
    pub fn chain(&self, u0: f64, u1: f64, u2: f64, u3: f64) -> Jet3 {
        let f = &self.c;
        let mut h = [0.0; 10];
        h[V] = u0;
        h[X] = u1 * f[X];
        h[Y] = u1 * f[Y];
        h[XX] = u2 * f[X] * f[X] + u1 * f[XX];
        h[YY] = u2 * f[Y] * f[Y] + u1 * f[YY];
        h[XY] = u2 * f[X] * f[Y] + u1 * f[XY];
        h[XXX] = u3 * f[X] * f[X] * f[X] + 3.0 * u2 * f[X] * f[XX] + u1 * f[XXX];
        h[YYY] = u3 * f[Y] * f[Y] * f[Y] + 3.0 * u2 * f[Y] * f[YY] + u1 * f[YYY];
        h[XXY] = u3 * f[X] * f[X] * f[Y]
            + u2 * (f[XX] * f[Y] + 2.0 * f[X] * f[XY])
            + u1 * f[XXY];
        h[XYY] = u3 * f[X] * f[Y] * f[Y]
            + u2 * (f[YY] * f[X] + 2.0 * f[Y] * f[XY])
            + u1 * f[XYY];
        Jet3 { c: h }
    }

    pub fn recip(&self) -> Jet3 {
        let v = self.c[V];
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v))
    }

    pub fn ln(&self) -> Jet3 {
        let v = self.c[V];
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.c[V].exp();
        self.chain(e, e, e, e)
    }

    pub fn tanh(&self) -> Jet3 {
        let t = self.c[V].tanh();
        let s = 1.0 - t * t;
        // (tanh)' = s, (tanh)'' = -2ts, (tanh)''' = -2s^2 + 4t^2 s
        self.chain(t, s, -2.0 * t * s, -2.0 * s * s + 4.0 * t * t * s)
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.c[V].sin_cos();
        self.chain(s, c, -s, -c)
    }

    pub fn asinh(&self) -> Jet3 {
        let v = self.c[V];
        let w = (1.0 + v * v).sqrt();
        self.chain(
            v.asinh(),
            1.0 / w,
            -v / (w * w * w),
            (2.0 * v * v - 1.0) / (w * w * w * w * w),
        )
    }

    pub fn powi(&self, k: u32) -> Jet3 {
        let mut acc = Jet3::constant(1.0);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, a: f64) -> Jet3 {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= a;
        }
        Jet3 { c }
    }

    pub fn add(&self, g: &Jet3) -> Jet3 {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(g.c.iter()) {
            *x += *y;
        }
        Jet3 { c }
    }

    pub fn sub(&self, g: &Jet3) -> Jet3 {
        self.add(&g.scale(-1.0))
    }

    pub fn div(&self, g: &Jet3) -> Jet3 {
        self.mul(&g.recip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // central finite differences of a scalar function of (x, y)
    fn fd_partials(f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64) -> [f64; 10] {
        let h = 1e-3;
        let fv = |i: i32, j: i32| f(x + i as f64 * h, y + j as f64 * h);
        let fx = (fv(1, 0) - fv(-1, 0)) / (2.0 * h);
        let fy = (fv(0, 1) - fv(0, -1)) / (2.0 * h);
        let fxx = (fv(1, 0) - 2.0 * fv(0, 0) + fv(-1, 0)) / (h * h);
        let fyy = (fv(0, 1) - 2.0 * fv(0, 0) + fv(0, -1)) / (h * h);
        let fxy = (fv(1, 1) - fv(1, -1) - fv(-1, 1) + fv(-1, -1)) / (4.0 * h * h);
        let fxxx = (fv(2, 0) - 2.0 * fv(1, 0) + 2.0 * fv(-1, 0) - fv(-2, 0)) / (2.0 * h * h * h);
        let fyyy = (fv(0, 2) - 2.0 * fv(0, 1) + 2.0 * fv(0, -1) - fv(0, -2)) / (2.0 * h * h * h);
        let gxx = |j: i32| (fv(1, j) - 2.0 * fv(0, j) + fv(-1, j)) / (h * h);
        let fxxy = (gxx(1) - gxx(-1)) / (2.0 * h);
        let gyy = |i: i32| (fv(i, 1) - 2.0 * fv(i, 0) + fv(i, -1)) / (h * h);
        let fxyy = (gyy(1) - gyy(-1)) / (2.0 * h);
        [fv(0, 0), fx, fy, fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy]
    }

    #[test]
    fn jet_matches_finite_differences() {
        // representative of the conformal-factor expressions used by surfaces
        let f = |x: f64, y: f64| -> f64 {
            let s = (x / y).asinh();
            -y.ln() + 0.1 * (s.tanh().powi(2) - 1.0) + 0.05 * (0.7 * s).sin()
        };
        let jet_f = |x: f64, y: f64| -> Jet3 {
            let s = Jet3::var_x(x).div(&Jet3::var_y(y)).asinh();
            let tanh_sq = s.tanh().powi(2).sub(&Jet3::constant(1.0));
            Jet3::var_y(y)
                .ln()
                .scale(-1.0)
                .add(&tanh_sq.scale(0.1))
                .add(&s.scale(0.7).sin().scale(0.05))
        };
        for &(x, y) in &[(0.3, 1.2), (-0.9, 0.5), (2.0, 3.0)] {
            let j = jet_f(x, y);
            let fd = fd_partials(&f, x, y);
            for i in 0..10 {
                let tol = if i < 3 {
                    5e-6
                } else if i < 6 {
                    1e-4
                } else {
                    2e-3
                };
                assert_relative_eq!(j.c[i], fd[i], epsilon = tol, max_relative = tol);
            }
        }
    }

    #[test]
    fn log_jet_exact() {
        let j = Jet3::var_y(2.0).ln().scale(-1.0);
        assert_relative_eq!(j.value(), -(2f64.ln()));
        assert_relative_eq!(j.dy(), -0.5);
        assert_relative_eq!(j.c[5], 0.25); // d2/dy2 of -ln y = 1/y^2
        assert_relative_eq!(j.c[9], -2.0 / 8.0); // d3/dy3 = -2/y^3
    }
}
