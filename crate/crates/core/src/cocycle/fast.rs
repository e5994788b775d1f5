//! Double-precision evaluation of group maps, for long orbits where the
//! octuple backend would be far too slow.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::fourier::{GroupFactor, GroupMap};
use crate::real::to_f64;
use crate::su2::GroupElement;

/// `{z, w}` in double precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastGroup {
    pub z: C64,
    pub w: C64,
}

impl core::ops::Mul for FastGroup {
    type Output = FastGroup;

    fn mul(self, o: FastGroup) -> FastGroup {
        FastGroup {
            z: self.z * o.z - self.w * o.w.conj(),
            w: self.z * o.w + self.w * o.z.conj(),
        }
    }
}

impl FastGroup {
    pub const IDENTITY: FastGroup = FastGroup {
        z: C64::new(1.0, 0.0),
        w: C64::new(0.0, 0.0),
    };

    pub fn from_exact(g: &GroupElement) -> Self {
        let (zr, zi) = g.z.to_f64();
        let (wr, wi) = g.w.to_f64();
        FastGroup {
            z: C64::new(zr, zi),
            w: C64::new(wr, wi),
        }
    }

    pub fn diagonal(s: f64) -> Self {
        FastGroup {
            z: turn(s),
            w: C64::new(0.0, 0.0),
        }
    }

    pub fn inverse(self) -> FastGroup {
        FastGroup {
            z: self.z.conj(),
            w: -self.w,
        }
    }

    pub fn renormalized(self) -> FastGroup {
        let n = libm::sqrt(self.z.norm_sqr() + self.w.norm_sqr());
        FastGroup {
            z: self.z / n,
            w: self.w / n,
        }
    }

    pub fn distance_to_identity(self) -> f64 {
        libm::sqrt((self.z - 1.0).norm_sqr() + self.w.norm_sqr())
    }

    /// `exp({t, u})`.
    pub fn exp(t: f64, u: C64) -> FastGroup {
        let r = libm::sqrt(t * t + u.norm_sqr());
        let sinc = if r < 1e-8 {
            1.0 - r * r / 6.0
        } else {
            libm::sin(r) / r
        };
        FastGroup {
            z: C64::new(libm::cos(r), t * sinc),
            w: u * sinc,
        }
    }
}

pub fn turn(x: f64) -> C64 {
    let r = x - libm::round(x);
    let (s, c) = libm::sincos(core::f64::consts::TAU * r);
    C64::new(c, s)
}

#[derive(Clone, Debug)]
enum FastFactor {
    Constant(FastGroup),
    Morphism(f64),
    Exp { band: i64, t: Vec<C64>, z: Vec<C64> },
}

/// A [`GroupMap`] rounded to doubles.
#[derive(Clone, Debug)]
pub struct FastMap {
    factors: Vec<FastFactor>,
}

impl FastMap {
    pub fn compile(g: &GroupMap) -> Self {
        let factors = g
            .factors()
            .iter()
            .map(|f| match f {
                GroupFactor::Constant(c) => FastFactor::Constant(FastGroup::from_exact(c)),
                GroupFactor::Morphism { h } => FastFactor::Morphism(*h as f64 / 2.0),
                GroupFactor::Exp(a) => {
                    let conv = |c: crate::real::Cx| C64::new(to_f64(c.re), to_f64(c.im));
                    let t = a.modes().map(|(_, t, _)| conv(t)).collect();
                    let z = a.modes().map(|(_, _, z)| conv(z)).collect();
                    FastFactor::Exp {
                        band: a.band(),
                        t,
                        z,
                    }
                }
            })
            .collect();
        FastMap { factors }
    }

    /// Largest Fourier index among exponential factors.
    pub fn band(&self) -> i64 {
        self.factors
            .iter()
            .map(|f| {
                if let FastFactor::Exp { band, .. } = f {
                    *band
                } else {
                    0
                }
            })
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, x: f64) -> FastGroup {
        let mut acc = FastGroup::IDENTITY;
        for f in &self.factors {
            let g = match f {
                FastFactor::Constant(c) => *c,
                FastFactor::Morphism(half_h) => FastGroup::diagonal(half_h * x),
                FastFactor::Exp { band, t, z } => {
                    let e = turn(x);
                    let e_inv = e.conj();
                    let mut pos = C64::new(1.0, 0.0);
                    let mut neg = C64::new(1.0, 0.0);
                    let centre = *band as usize;
                    let mut tv = t[centre].re;
                    let mut uv = z[centre];
                    for k in 1..=centre {
                        pos *= e;
                        neg *= e_inv;
                        tv += 2.0 * (t[centre + k] * pos).re;
                        uv += z[centre + k] * pos + z[centre - k] * neg;
                    }
                    FastGroup::exp(tv, uv)
                }
            };
            acc = acc * g;
        }
        acc.renormalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::AlgebraMap;
    use crate::real::{real, Cx};

    #[test]
    fn agrees_with_the_exact_map() {
        let mut f = AlgebraMap::zero(3);
        f.set_z(3, Cx::from_f64(0.2, -0.1));
        f.set_t(2, Cx::from_f64(0.05, 0.3));
        let g = GroupMap::morphism(3)
            .then(&GroupMap::exp(f).unwrap())
            .then(&GroupMap::constant(GroupElement::new(
                Cx::from_f64(0.6, 0.0),
                Cx::from_f64(0.0, 0.8),
            )));
        let fast = FastMap::compile(&g);
        for x in [0.0, 0.2, 0.77] {
            let exact = FastGroup::from_exact(&g.evaluate(real(x)));
            let approx = fast.evaluate(x);
            assert!((exact.z - approx.z).norm() + (exact.w - approx.w).norm() < 1e-13);
        }
    }
}
