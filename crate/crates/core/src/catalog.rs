//! Closed-form test functions with all derivatives up to order 4.
//!
//! Derivatives come from truncated bivariate Taylor arithmetic: each function
//! is built from `x`, `t` and a handful of elementary operations on
//! [`Taylor`] values, and `u_J` is read off as `J! * coeff`.

use crate::jet::{Deriv, JetPoint, MAX_ORDER};

const M: usize = MAX_ORDER as usize + 1;

/// Taylor coefficients `c[i][j]` of `dx^i dt^j` with `i + j <= 4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    c: [[f64; M]; M],
}

impl Taylor {
    pub fn constant(v: f64) -> Taylor {
        let mut c = [[0.0; M]; M];
        c[0][0] = v;
        Taylor { c }
    }

    pub fn var_x(x0: f64) -> Taylor {
        let mut t = Taylor::constant(x0);
        t.c[1][0] = 1.0;
        t
    }

    pub fn var_t(t0: f64) -> Taylor {
        let mut t = Taylor::constant(t0);
        t.c[0][1] = 1.0;
        t
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    /// The mixed partial `d^{nx+nt} / dx^nx dt^nt`.
    pub fn derivative(&self, nx: usize, nt: usize) -> f64 {
        self.c[nx][nt] * factorial(nx) * factorial(nt)
    }

    pub fn add(&self, o: &Taylor) -> Taylor {
        let mut r = *self;
        for i in 0..M {
            for j in 0..M - i {
                r.c[i][j] += o.c[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Taylor) -> Taylor {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Taylor {
        let mut r = *self;
        for row in r.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        r
    }

    pub fn shift(&self, s: f64) -> Taylor {
        let mut r = *self;
        r.c[0][0] += s;
        r
    }

    pub fn mul(&self, o: &Taylor) -> Taylor {
        let mut r = [[0.0; M]; M];
        for i in 0..M {
            for j in 0..M - i {
                let a = self.c[i][j];
                if a == 0.0 {
                    continue;
                }
                for k in 0..M - i - j {
                    for l in 0..M - i - j - k {
                        r[i + k][j + l] += a * o.c[k][l];
                    }
                }
            }
        }
        Taylor { c: r }
    }

    /// `g(self)` given the derivatives `g^{(k)}(f0)`, k = 0..=4.
    fn compose(&self, g: [f64; M]) -> Taylor {
        let mut h = *self;
        h.c[0][0] = 0.0;
        let mut out = Taylor::constant(g[0]);
        let mut hp = Taylor::constant(1.0);
        for (k, gk) in g.iter().enumerate().skip(1) {
            hp = hp.mul(&h);
            out = out.add(&hp.scale(gk / factorial(k)));
        }
        out
    }

    pub fn exp(&self) -> Taylor {
        let e = self.value().exp();
        self.compose([e; M])
    }

    /// `self^a`; requires a positive value unless `a` is a small integer.
    pub fn powf(&self, a: f64) -> Taylor {
        let f0 = self.value();
        let mut g = [0.0; M];
        let mut fall = 1.0;
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = fall * f0.powf(a - k as f64);
            fall *= a - k as f64;
        }
        self.compose(g)
    }

    pub fn recip(&self) -> Taylor {
        self.powf(-1.0)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Catalog of closed-form test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogFn {
    /// `(A / sqrt(2t)) exp(-4 x^2 / t)`.
    Gaussian { amp: f64 },
    /// `(4 pi t)^{-1/2} exp(-x^2 / 4t)`, an exact heat solution.
    HeatKernel,
    /// `A exp(-(x - c t) / lambda)`.
    ExpFront { amp: f64, speed: f64, width: f64 },
    /// The nontrivial `u(t)` root of the algebraic chain element for the
    /// scaling field `delta x d/dx + t d/dt - K t u d/du` on the
    /// reaction-diffusion family.
    RationalU { alpha: f64, k: f64 },
    Constant(f64),
}

impl CatalogFn {
    pub fn taylor(&self, x: f64, t: f64) -> Taylor {
        let tx = Taylor::var_x(x);
        let tt = Taylor::var_t(t);
        match *self {
            CatalogFn::Gaussian { amp } => {
                let pre = tt.scale(2.0).powf(-0.5).scale(amp);
                let arg = tx.mul(&tx).scale(-4.0).mul(&tt.recip());
                pre.mul(&arg.exp())
            }
            CatalogFn::HeatKernel => {
                let pre = tt.scale(4.0 * std::f64::consts::PI).powf(-0.5);
                let arg = tx.mul(&tx).scale(-0.25).mul(&tt.recip());
                pre.mul(&arg.exp())
            }
            CatalogFn::ExpFront { amp, speed, width } => {
                let arg = tx.sub(&tt.scale(speed)).scale(-1.0 / width);
                arg.exp().scale(amp)
            }
            CatalogFn::RationalU { alpha, k } => {
                let den = tt
                    .mul(&tt)
                    .scale(k * k)
                    .sub(&tt.scale((4.0 - alpha) * k))
                    .shift(2.0 - alpha);
                den.recip().scale((2.0 - alpha) * (1.0 + k))
            }
            CatalogFn::Constant(v) => Taylor::constant(v),
        }
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.taylor(x, t).value()
    }
}

pub fn jet_point_of(f: &CatalogFn, x: f64, t: f64) -> JetPoint {
    let tay = f.taylor(x, t);
    let mut pt = JetPoint::new(x, t);
    for d in Deriv::all() {
        pt.set(d, tay.derivative(d.nx as usize, d.nt as usize));
    }
    pt
}
