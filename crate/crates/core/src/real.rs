//! Scalar and complex arithmetic at octuple precision.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub use f256::f256 as Real;

/// Significand bits of [`Real`] (IEEE binary256).
pub const PRECISION_BITS: u32 = 237;

pub fn real(x: f64) -> Real {
    Real::from(x)
}

pub fn int(n: i64) -> Real {
    Real::from(n)
}

pub fn pi() -> Real {
    f256::consts::PI
}

pub fn tau() -> Real {
    f256::consts::TAU
}

pub fn half() -> Real {
    Real::ONE.div2()
}

/// Nearest `f64`, truncating the significand. Values outside the `f64`
/// exponent range saturate to zero or infinity.
pub fn to_f64(x: Real) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let (hi, _) = x.to_bits();
    let negative = hi >> 127 == 1;
    let biased = ((hi >> 108) & ((1u128 << 19) - 1)) as i64;
    let magnitude = if biased == 0 {
        0.0
    } else if biased == (1 << 19) - 1 {
        f64::INFINITY
    } else {
        let exp = biased - 262_143;
        if exp > 1023 {
            f64::INFINITY
        } else if exp < -1022 {
            0.0
        } else {
            let frac = ((hi & ((1u128 << 108) - 1)) >> 56) as u64;
            f64::from_bits(((exp + 1023) as u64) << 52 | frac)
        }
    };
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// `x - round(x)`, in `[-1/2, 1/2]`.
pub fn centered_frac(x: Real) -> Real {
    x - x.round()
}

/// Distance from `x` to the nearest integer.
pub fn dist_z(x: Real) -> Real {
    centered_frac(x).abs()
}

/// Fractional part in `[0, 1)`.
pub fn frac01(x: Real) -> Real {
    x - x.floor()
}

pub fn max_real(a: Real, b: Real) -> Real {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn cmp_real(a: &Real, b: &Real) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// `n!` as a real (exact for the small arguments used here).
pub fn factorial(n: u32) -> Real {
    (1..=n).fold(Real::ONE, |acc, i| acc * Real::from(i))
}

/// Binomial coefficient as a real.
pub fn binomial(n: u32, k: u32) -> Real {
    if k > n {
        return Real::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = Real::ONE;
    for i in 0..k {
        acc = acc * Real::from(n - i) / Real::from(i + 1);
    }
    acc.round()
}

/// Complex number over [`Real`].
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Cx {
    pub re: Real,
    pub im: Real,
}

impl Cx {
    pub const ZERO: Cx = Cx {
        re: Real::ZERO,
        im: Real::ZERO,
    };
    pub const ONE: Cx = Cx {
        re: Real::ONE,
        im: Real::ZERO,
    };
    pub const I: Cx = Cx {
        re: Real::ZERO,
        im: Real::ONE,
    };

    pub const fn new(re: Real, im: Real) -> Self {
        Cx { re, im }
    }

    pub fn from_real(re: Real) -> Self {
        Cx { re, im: Real::ZERO }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Cx::new(real(re), real(im))
    }

    /// `e^{i·angle}`.
    pub fn cis(angle: Real) -> Self {
        let (s, c) = angle.sin_cos();
        Cx::new(c, s)
    }

    /// `e^{2iπ·x}`, reducing `x` modulo 1 first for accuracy.
    pub fn turn(x: Real) -> Self {
        Cx::cis(tau() * centered_frac(x))
    }

    /// `e^{2iπj/n}` for `j < n`, as products of two table entries.
    pub fn unit_roots(n: usize) -> alloc::vec::Vec<Cx> {
        let block = (1usize << ((usize::BITS - n.max(1).leading_zeros()) / 2)).max(1);
        let small: alloc::vec::Vec<Cx> = (0..block)
            .map(|j| Cx::turn(int(j as i64) / int(n as i64)))
            .collect();
        let large: alloc::vec::Vec<Cx> = (0..n.div_ceil(block))
            .map(|i| Cx::turn(int((i * block) as i64) / int(n as i64)))
            .collect();
        (0..n)
            .map(|j| small[j % block] * large[j / block])
            .collect()
    }

    pub fn from_polar(r: Real, angle: Real) -> Self {
        Cx::cis(angle).scale(r)
    }

    pub fn conj(self) -> Self {
        Cx::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> Real {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> Real {
        self.re.hypot(self.im)
    }

    /// Argument in `(-π, π]`.
    pub fn arg(self) -> Real {
        self.im.atan2(&self.re)
    }

    pub fn scale(self, k: Real) -> Self {
        Cx::new(self.re * k, self.im * k)
    }

    pub fn mul_i(self) -> Self {
        Cx::new(-self.im, self.re)
    }

    pub fn recip(self) -> Self {
        let d = self.norm_sqr();
        Cx::new(self.re / d, -self.im / d)
    }

    pub fn is_zero(self) -> bool {
        self.re.eq_zero() && self.im.eq_zero()
    }

    pub fn to_f64(self) -> (f64, f64) {
        (to_f64(self.re), to_f64(self.im))
    }
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "({re:e}{im:+e}i)")
    }
}

impl Add for Cx {
    type Output = Cx;
    fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cx {
    type Output = Cx;
    fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cx {
    type Output = Cx;
    fn mul(self, o: Cx) -> Cx {
        Cx::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Div for Cx {
    type Output = Cx;
    fn div(self, o: Cx) -> Cx {
        let d = o.norm_sqr();
        Cx::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

impl AddAssign for Cx {
    fn add_assign(&mut self, o: Cx) {
        *self = *self + o;
    }
}

impl SubAssign for Cx {
    fn sub_assign(&mut self, o: Cx) {
        *self = *self - o;
    }
}

impl MulAssign for Cx {
    fn mul_assign(&mut self, o: Cx) {
        *self = *self * o;
    }
}

impl Mul<Real> for Cx {
    type Output = Cx;
    fn mul(self, k: Real) -> Cx {
        self.scale(k)
    }
}
