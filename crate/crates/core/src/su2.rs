//! SU(2) and su(2) in `{z, w}` / `{t, u}` coordinates.
//!
//! `{z, w}` is the unitary matrix `[[z, w], [−w̄, z̄]]` and `{t, u}` the
//! anti-hermitian matrix `[[it, u], [−ū, −it]]`.

use alloc::string::ToString;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::real::{pi, real, tau, Cx, Real};

type Mat2 = [[Cx; 2]; 2];

/// Rotation angles this close to π are refused by [`log_group`].
const BRANCH_MARGIN: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub z: Cx,
    pub w: Cx,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AlgebraElement {
    pub t: Real,
    pub u: Cx,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        z: Cx::ONE,
        w: Cx::ZERO,
    };

    /// Builds `{z, w}` and projects it back onto the unit sphere.
    pub fn new(z: Cx, w: Cx) -> Self {
        GroupElement { z, w }.renormalized()
    }

    /// `{e^{2iπs}, 0}`.
    pub fn diagonal(s: Real) -> Self {
        GroupElement {
            z: Cx::turn(s),
            w: Cx::ZERO,
        }
    }

    pub fn minus_identity() -> Self {
        GroupElement {
            z: -Cx::ONE,
            w: Cx::ZERO,
        }
    }

    pub fn norm_sqr(&self) -> Real {
        self.z.norm_sqr() + self.w.norm_sqr()
    }

    /// Rescales onto `|z|² + |w|² = 1`, by a series for `1/√n²` when the
    /// drift is tiny (the usual case after a product).
    pub fn renormalized(self) -> Self {
        let n2 = self.norm_sqr();
        let err = n2 - Real::ONE;
        if err.abs() > real(1e-20) {
            let r = n2.sqrt().recip();
            return GroupElement {
                z: self.z.scale(r),
                w: self.w.scale(r),
            };
        }
        let k = Real::ONE - err.div2() + err * err * real(0.375);
        GroupElement {
            z: self.z.scale(k),
            w: self.w.scale(k),
        }
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            z: self.z.conj(),
            w: -self.w,
        }
    }

    pub fn to_matrix(&self) -> Mat2 {
        [[self.z, self.w], [-self.w.conj(), self.z.conj()]]
    }

    pub fn is_diagonal(&self) -> bool {
        self.w.is_zero()
    }

    /// Operator-norm distance is equivalent; this is the Euclidean one on
    /// `(z, w)`.
    pub fn distance(&self, other: &GroupElement) -> Real {
        ((self.z - other.z).norm_sqr() + (self.w - other.w).norm_sqr()).sqrt()
    }

    pub fn distance_to_identity(&self) -> Real {
        self.distance(&GroupElement::IDENTITY)
    }

    /// The element `A = D·{e^{2iπa},0}·D*` in the form `(D, a)` with
    /// `D·A·D* = {e^{2iπa}, 0}` and `a ∈ [0, 1/2]`.
    pub fn diagonalize(&self) -> (GroupElement, Real) {
        diagonalize(self)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: GroupElement) -> GroupElement {
        multiply(&self, &o)
    }
}

/// Matrix product in `{z, w}` coordinates, renormalised.
pub fn multiply(a: &GroupElement, b: &GroupElement) -> GroupElement {
    GroupElement {
        z: a.z * b.z - a.w * b.w.conj(),
        w: a.z * b.w + a.w * b.z.conj(),
    }
    .renormalized()
}

/// Conjugate transpose.
pub fn inverse(s: &GroupElement) -> GroupElement {
    s.inverse()
}

impl AlgebraElement {
    pub const ZERO: AlgebraElement = AlgebraElement {
        t: Real::ZERO,
        u: Cx::ZERO,
    };

    pub fn new(t: Real, u: Cx) -> Self {
        AlgebraElement { t, u }
    }

    pub fn norm_sqr(&self) -> Real {
        self.t * self.t + self.u.norm_sqr()
    }

    pub fn norm(&self) -> Real {
        self.norm_sqr().sqrt()
    }

    /// `t₁t₂ + Re(u₁ū₂)`.
    pub fn dot(&self, o: &AlgebraElement) -> Real {
        self.t * o.t + (self.u * o.u.conj()).re
    }

    pub fn scale(&self, k: Real) -> Self {
        AlgebraElement {
            t: self.t * k,
            u: self.u.scale(k),
        }
    }

    pub fn to_matrix(&self) -> Mat2 {
        [
            [Cx::new(Real::ZERO, self.t), self.u],
            [-self.u.conj(), Cx::new(Real::ZERO, -self.t)],
        ]
    }

    /// Reads `{t, u}` off an anti-hermitian traceless matrix.
    pub fn from_matrix(m: &Mat2) -> Self {
        AlgebraElement {
            t: m[0][0].im,
            u: m[0][1],
        }
    }

    /// Matrix commutator `[a, b]`.
    pub fn bracket(&self, o: &AlgebraElement) -> AlgebraElement {
        let p = mat_mul(&self.to_matrix(), &o.to_matrix());
        let q = mat_mul(&o.to_matrix(), &self.to_matrix());
        AlgebraElement {
            t: (p[0][0] - q[0][0]).im,
            u: p[0][1] - q[0][1],
        }
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, o: AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            t: self.t + o.t,
            u: self.u + o.u,
        }
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, o: AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            t: self.t - o.t,
            u: self.u - o.u,
        }
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement {
            t: -self.t,
            u: -self.u,
        }
    }
}

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Cx::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn sinc(r: Real) -> Real {
    if r.eq_zero() {
        Real::ONE
    } else {
        r.sin() / r
    }
}

/// The exponential `{cos r + i t sinc r, u sinc r}` with `r = ‖{t,u}‖`.
pub fn exp_alg(s: &AlgebraElement) -> GroupElement {
    let r = s.norm();
    if r.eq_zero() {
        return GroupElement::IDENTITY;
    }
    let k = sinc(r);
    GroupElement {
        z: Cx::new(r.cos(), s.t * k),
        w: s.u.scale(k),
    }
}

/// Principal logarithm, defined away from the antipode `−Id`.
pub fn log_group(s: &GroupElement) -> Result<AlgebraElement> {
    let sin = (s.z.im * s.z.im + s.w.norm_sqr()).sqrt();
    let r = sin.atan2(&s.z.re);
    if pi() - r < real(BRANCH_MARGIN) {
        return Err(Error::Branch("element too close to −Id".to_string()));
    }
    if sin.eq_zero() {
        return Ok(AlgebraElement::ZERO);
    }
    let k = r / sin;
    Ok(AlgebraElement {
        t: s.z.im * k,
        u: s.w.scale(k),
    })
}

/// `Ad({e^{2iπs},0}).{t, u} = {t, e^{4iπs}u}`.
pub fn ad_action(s: Real, v: &AlgebraElement) -> AlgebraElement {
    AlgebraElement {
        t: v.t,
        u: v.u * Cx::turn(s.mul2()),
    }
}

/// `S·v·S*` for arbitrary `S`.
pub fn ad(s: &GroupElement, v: &AlgebraElement) -> AlgebraElement {
    let m = mat_mul(
        &mat_mul(&s.to_matrix(), &v.to_matrix()),
        &s.inverse().to_matrix(),
    );
    AlgebraElement::from_matrix(&m)
}

/// `Ad(S)` written as `t' = c·t + 2Re(d·u)`, `u' = p·t + q·u + r·ū`, which
/// lets it act on Fourier coefficients directly.
#[derive(Clone, Copy, Debug)]
pub struct AdMatrix {
    pub c: Real,
    pub d: Cx,
    pub p: Cx,
    pub q: Cx,
    pub r: Cx,
}

impl AdMatrix {
    pub fn of(s: &GroupElement) -> Self {
        let e1 = ad(s, &AlgebraElement::new(Real::ONE, Cx::ZERO));
        let e2 = ad(s, &AlgebraElement::new(Real::ZERO, Cx::ONE));
        let e3 = ad(s, &AlgebraElement::new(Real::ZERO, Cx::I));
        AdMatrix {
            c: e1.t,
            d: Cx::new(e2.t.div2(), -e3.t.div2()),
            p: e1.u,
            q: (e2.u - e3.u.mul_i()).scale(real(0.5)),
            r: (e2.u + e3.u.mul_i()).scale(real(0.5)),
        }
    }

    pub fn apply(&self, v: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            t: self.c * v.t + (self.d * v.u).re.mul2(),
            u: self.p.scale(v.t) + self.q * v.u + self.r * v.u.conj(),
        }
    }
}

/// `(D, a)` with `D·A·D* = {e^{2iπa}, 0}`, `a ∈ [0, 1/2]`, and `D` the
/// shortest rotation carrying the axis of `A` to the diagonal axis.
pub fn diagonalize(a: &GroupElement) -> (GroupElement, Real) {
    let sin = (a.z.im * a.z.im + a.w.norm_sqr()).sqrt();
    let r = sin.atan2(&a.z.re);
    let param = r / tau();
    if sin.eq_zero() {
        return (GroupElement::IDENTITY, param);
    }
    let nt = a.z.im / sin;
    let nu = a.w.scale(sin.recip());
    let nu_abs = nu.abs();
    let beta = nu_abs.atan2(&nt);
    let dir = if nu_abs.eq_zero() {
        Cx::I
    } else {
        nu.scale(nu_abs.recip())
    };
    let gen = AlgebraElement::new(Real::ZERO, -(dir.mul_i()).scale(beta.div2()));
    (exp_alg(&gen), param)
}

/// `exp(t·log D)`.
pub fn one_parameter_path(d: &GroupElement, t: Real) -> Result<GroupElement> {
    Ok(exp_alg(&log_group(d)?.scale(t)))
}
