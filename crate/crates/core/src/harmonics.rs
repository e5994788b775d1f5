//! Harmonic analysis on SU(2) ≅ S³ and the truncated Koopman operator of a
//! cocycle on `L²(𝕋) ⊗ E_m`.
//!
//! `ψ_{l,m}(ζ, ω) = c_l ζ^l ω^{m−l}` with `c_l = √((m+1)!/(l!(m−l)!))` is
//! orthonormal on S³. `S` acts by `(S.φ)(v) = φ(S v)`, and `pi_matrix(S)`
//! holds `⟨S.ψ_j, ψ_p⟩` at `[j][p]`, which makes it a homomorphism. The
//! Koopman basis is `π^{j,p}(S) = √(m+1)·pi_matrix(S⁻¹)[j][p]`, on which
//! `Uf(x, S) = f(x − α, A(x)⁻¹S)` preserves `j`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::cocycle::{Cocycle, FastGroup};
use crate::error::{Error, Result};
use crate::fourier::fft;
use crate::linalg::{smallest_singular, Banded};
use crate::real::{binomial, factorial, int, max_real, real, Cx, Real};
use crate::su2::GroupElement;

/// `(m, j, p)` with `0 ≤ j, p ≤ m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    pub m: usize,
    pub j: usize,
    pub p: usize,
}

impl HarmonicIndex {
    pub fn new(m: usize, j: usize, p: usize) -> Result<Self> {
        if j > m || p > m {
            return Err(Error::Usage(format!(
                "indices ({j}, {p}) exceed degree {m}"
            )));
        }
        Ok(HarmonicIndex { m, j, p })
    }
}

fn norm_const(l: usize, m: usize) -> Real {
    (factorial(m as u32 + 1) / (factorial(l as u32) * factorial((m - l) as u32))).sqrt()
}

/// `ψ_{l,m}(ζ, ω)`.
pub fn psi(l: usize, m: usize, zeta: Cx, omega: Cx) -> Result<Cx> {
    if l > m {
        return Err(Error::Usage(format!("l = {l} exceeds m = {m}")));
    }
    let mut v = Cx::from_real(norm_const(l, m));
    for _ in 0..l {
        v *= zeta;
    }
    for _ in 0..m - l {
        v *= omega;
    }
    Ok(v)
}

/// Field operations shared by the exact and the double-precision paths.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn conj(self) -> Self;
    fn from_real(x: Real) -> Self;
}

impl Scalar for Cx {
    fn zero() -> Self {
        Cx::ZERO
    }
    fn one() -> Self {
        Cx::ONE
    }
    fn conj(self) -> Self {
        Cx::conj(self)
    }
    fn from_real(x: Real) -> Self {
        Cx::from_real(x)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn from_real(x: Real) -> Self {
        C64::new(crate::real::to_f64(x), 0.0)
    }
}

/// Degree-`m` constants for [`PiTable::matrix`].
#[derive(Clone, Debug)]
pub struct PiTable<T> {
    m: usize,
    ratio: Vec<Vec<T>>,
    binom: Vec<Vec<T>>,
}

impl<T: Scalar> PiTable<T> {
    pub fn new(m: usize) -> Self {
        let ratio = (0..=m)
            .map(|j| {
                (0..=m)
                    .map(|p| T::from_real(norm_const(j, m) / norm_const(p, m)))
                    .collect()
            })
            .collect();
        let binom = (0..=m)
            .map(|n| {
                (0..=m)
                    .map(|k| T::from_real(binomial(n as u32, k as u32)))
                    .collect()
            })
            .collect();
        PiTable { m, ratio, binom }
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// `[j][p] = ⟨S.ψ_j, ψ_p⟩` for `S = {z, w}`: the `ζ^p ω^{m−p}`
    /// coefficient of `(zζ + wω)^j (−w̄ζ + z̄ω)^{m−j}`, rescaled.
    pub fn matrix(&self, z: T, w: T) -> Vec<Vec<T>> {
        let m = self.m;
        let powers = |base: T| {
            let mut v = vec![T::one(); m + 1];
            for i in 1..=m {
                v[i] = v[i - 1] * base;
            }
            v
        };
        let (pz, pw, pwb, pzb) = (powers(z), powers(w), powers(-w.conj()), powers(z.conj()));
        let mut out = vec![vec![T::zero(); m + 1]; m + 1];
        for j in 0..=m {
            for a in 0..=j {
                let left = self.binom[j][a] * pz[a] * pw[j - a];
                for b in 0..=m - j {
                    let right = self.binom[m - j][b] * pwb[b] * pzb[m - j - b];
                    out[j][a + b] = out[j][a + b] + left * right;
                }
            }
            for p in 0..=m {
                out[j][p] = out[j][p] * self.ratio[j][p];
            }
        }
        out
    }
}

/// The representation matrix of `S` on degree-`m` polynomials.
pub fn pi_matrix(s: &GroupElement, m: usize) -> Vec<Vec<Cx>> {
    PiTable::<Cx>::new(m).matrix(s.z, s.w)
}

/// Double-precision variant for long orbit computations.
pub fn pi_matrix_fast(table: &PiTable<C64>, s: &FastGroup) -> Vec<Vec<C64>> {
    table.matrix(s.z, s.w)
}

/// `p_l(|z|, |w|) = Σ_i (−1)^i C(l,i)² |z|^{2(l−i)} |w|^{2i}` with `l = m/2`;
/// equals `⟨D.ψ_l, ψ_l⟩`.
pub fn legendre_projection(d: &GroupElement, m: usize) -> Result<Real> {
    if m % 2 != 0 {
        return Err(Error::Usage(format!("degree {m} is odd")));
    }
    Ok(legendre_in_z2(d.z.norm_sqr(), m / 2))
}

/// The same polynomial in the variable `|z|²` (with `|w|² = 1 − |z|²`).
pub fn legendre_in_z2(z2: Real, l: usize) -> Real {
    let w2 = Real::ONE - z2;
    let mut acc = Real::ZERO;
    for i in 0..=l {
        let c = binomial(l as u32, i as u32);
        let term = c * c * z2.powi((l - i) as i32) * w2.powi(i as i32);
        acc = if i % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// `f(x, S) = Σ f^k_{j,p} e^{2iπkx} π^{j,p}(S)` for one degree `m` and
/// `|k| ≤ n_trunc`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberFunction {
    m: usize,
    n_trunc: i64,
    coeffs: Vec<Cx>,
}

impl FiberFunction {
    pub fn zero(m: usize, n_trunc: i64) -> Self {
        let len = (2 * n_trunc + 1) as usize * (m + 1) * (m + 1);
        FiberFunction {
            m,
            n_trunc,
            coeffs: vec![Cx::ZERO; len],
        }
    }

    pub fn basis(k: i64, idx: HarmonicIndex, n_trunc: i64) -> Result<Self> {
        if k.abs() > n_trunc {
            return Err(Error::Usage(format!(
                "frequency {k} beyond truncation {n_trunc}"
            )));
        }
        let mut f = Self::zero(idx.m, n_trunc);
        f.set(k, idx.j, idx.p, Cx::ONE);
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn n_trunc(&self) -> i64 {
        self.n_trunc
    }

    fn slot(&self, k: i64, j: usize, p: usize) -> Option<usize> {
        (k.abs() <= self.n_trunc && j <= self.m && p <= self.m)
            .then(|| (((k + self.n_trunc) as usize) * (self.m + 1) + j) * (self.m + 1) + p)
    }

    pub fn get(&self, k: i64, j: usize, p: usize) -> Cx {
        self.slot(k, j, p).map_or(Cx::ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, k: i64, j: usize, p: usize, v: Cx) {
        let i = self.slot(k, j, p).expect("index inside the truncation");
        self.coeffs[i] = v;
    }

    /// `Σ |f^k_{j,p}|²`.
    pub fn norm_sqr(&self) -> Real {
        self.coeffs.iter().fold(Real::ZERO, |a, c| a + c.norm_sqr())
    }

    pub fn inner(&self, other: &FiberFunction) -> Cx {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(Cx::ZERO, |a, (x, y)| a + *x * y.conj())
    }
}

/// Which Koopman operator to use: `Uf(x, S) = f(x − α, A(x)⁻¹S)` as is, or
/// its inverse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    #[default]
    Literal,
    Inverse,
}

/// Fourier coefficients of `x ↦ pi_matrix(A(x))`, enough to assemble `U`.
#[derive(Clone, Debug)]
pub struct KoopmanOperator {
    m: usize,
    alpha: Real,
    band: i64,
    /// `coeffs[n + band][q][p]`: the `n`-th coefficient of `pi(A(·))[q][p]`.
    coeffs: Vec<Vec<Vec<Cx>>>,
    /// Largest coefficient dropped by the transform.
    pub alias_bound: Real,
}

impl KoopmanOperator {
    /// Expands `pi(A(·))` on grids doubled until the top half of the band
    /// is below `floor`.
    pub fn build(c: &Cocycle, m: usize, floor: Real, max_grid: usize) -> Result<Self> {
        let table = PiTable::<Cx>::new(m);
        let mut size = 8usize;
        loop {
            if size > max_grid {
                return Err(Error::Bandwidth {
                    requested: size,
                    limit: max_grid,
                });
            }
            let values = c.transfer().samples(size)?;
            let mats: Vec<Vec<Vec<Cx>>> = values.iter().map(|g| table.matrix(g.z, g.w)).collect();
            let mut spectra = vec![vec![Vec::new(); m + 1]; m + 1];
            let mut tail = Real::ZERO;
            for q in 0..=m {
                for p in 0..=m {
                    let series: Vec<Cx> = mats.iter().map(|a| a[q][p]).collect();
                    let s = fft::forward(&series);
                    for (i, v) in s.iter().enumerate() {
                        let k = if i < size / 2 {
                            i as i64
                        } else {
                            i as i64 - size as i64
                        };
                        if k.unsigned_abs() as usize >= size / 4 {
                            tail = max_real(tail, v.abs());
                        }
                    }
                    spectra[q][p] = s;
                }
            }
            if tail <= floor {
                let band = (size / 4) as i64 - 1;
                let mut coeffs = vec![vec![vec![Cx::ZERO; m + 1]; m + 1]; (2 * band + 1) as usize];
                for n in -band..=band {
                    let i = n.rem_euclid(size as i64) as usize;
                    for q in 0..=m {
                        for p in 0..=m {
                            coeffs[(n + band) as usize][q][p] = spectra[q][p][i];
                        }
                    }
                }
                let mut op = KoopmanOperator {
                    m,
                    alpha: c.alpha().value(),
                    band,
                    coeffs,
                    alias_bound: tail,
                };
                op.trim(floor);
                return Ok(op);
            }
            size *= 2;
        }
    }

    fn trim(&mut self, floor: Real) {
        while self.band > 0 {
            let top = |n: i64| {
                self.coeffs[(n + self.band) as usize]
                    .iter()
                    .flatten()
                    .all(|v| v.abs() <= floor)
            };
            if !(top(self.band) && top(-self.band)) {
                break;
            }
            self.coeffs.pop();
            self.coeffs.remove(0);
            self.band -= 1;
        }
    }

    pub fn band(&self) -> i64 {
        self.band
    }

    fn coeff(&self, n: i64, q: usize, p: usize) -> Cx {
        if n.abs() > self.band {
            return Cx::ZERO;
        }
        self.coeffs[(n + self.band) as usize][q][p]
    }

    /// `Uf`, truncated to `|k| ≤ n_trunc`, with the discarded mass.
    pub fn apply(&self, f: &FiberFunction, n_trunc: i64) -> Result<(FiberFunction, Real)> {
        if f.degree() != self.m {
            return Err(Error::Usage("degree mismatch".into()));
        }
        let m = self.m;
        let reach = n_trunc.max(f.n_trunc()) + self.band;
        let mut wide = FiberFunction::zero(m, reach);
        for k in -f.n_trunc()..=f.n_trunc() {
            let phase = Cx::turn(-(int(k) * self.alpha));
            for j in 0..=m {
                for p in 0..=m {
                    let v = f.get(k, j, p);
                    if v.is_zero() {
                        continue;
                    }
                    let v = v * phase;
                    for n in -self.band..=self.band {
                        for q in 0..=m {
                            let a = self.coeff(n, q, p);
                            if a.is_zero() {
                                continue;
                            }
                            let i = wide.slot(k + n, j, q).unwrap();
                            wide.coeffs[i] += v * a;
                        }
                    }
                }
            }
        }
        let mut out = FiberFunction::zero(m, n_trunc);
        let mut leaked = Real::ZERO;
        for k in -reach..=reach {
            for j in 0..=m {
                for q in 0..=m {
                    let v = wide.get(k, j, q);
                    if k.abs() <= n_trunc {
                        out.set(k, j, q, v);
                    } else {
                        leaked += v.norm_sqr();
                    }
                }
            }
        }
        Ok((out, leaked))
    }

    /// One `j`-slice in the chosen convention. `Inverse` is the adjoint of
    /// the literal slice, i.e. `U⁻¹` for the unitary operator.
    pub fn slice_matrix_in(&self, n_trunc: i64, convention: Convention) -> Banded {
        let mat = self.slice_matrix(n_trunc);
        match convention {
            Convention::Literal => mat,
            Convention::Inverse => {
                let dim = (2 * n_trunc + 1) as usize * (self.m + 1);
                let width = (self.band as usize + 1) * (self.m + 1);
                let mut adj = Banded::zeros(dim, width, width);
                for i in 0..dim {
                    for j in i.saturating_sub(width)..(i + width + 1).min(dim) {
                        let v = mat.get(j, i);
                        if !v.is_zero() {
                            adj.set(i, j, v.conj());
                        }
                    }
                }
                adj
            }
        }
    }

    /// One `j`-slice of the truncated operator, indexed by `(k + N)(m+1) + p`.
    pub fn slice_matrix(&self, n_trunc: i64) -> Banded {
        let m = self.m;
        let dim = (2 * n_trunc + 1) as usize * (m + 1);
        let width = (self.band as usize + 1) * (m + 1);
        let mut mat = Banded::zeros(dim, width, width);
        for k in -n_trunc..=n_trunc {
            let phase = Cx::turn(-(int(k) * self.alpha));
            for p in 0..=m {
                let col = (k + n_trunc) as usize * (m + 1) + p;
                for n in -self.band..=self.band {
                    let kk = k + n;
                    if kk.abs() > n_trunc {
                        continue;
                    }
                    for q in 0..=m {
                        let a = self.coeff(n, q, p);
                        if !a.is_zero() {
                            let row = (kk + n_trunc) as usize * (m + 1) + q;
                            mat.set(row, col, a * phase);
                        }
                    }
                }
            }
        }
        mat
    }
}

/// `Uf` for the cocycle, truncated to `|k| ≤ n_trunc`, and the leaked mass.
pub fn koopman_apply(
    c: &Cocycle,
    f: &FiberFunction,
    n_trunc: i64,
) -> Result<(FiberFunction, Real)> {
    KoopmanOperator::build(c, f.degree(), real(1e-66), 1 << 12)?.apply(f, n_trunc)
}

/// `σ_min(U_N − λ)` at one trial eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenEvidence {
    pub lambda: Cx,
    pub sigma_min: Real,
    /// Unit vector achieving `sigma_min`, indexed like
    /// [`KoopmanOperator::slice_matrix`].
    pub vector: Vec<Cx>,
}

/// The values `e^{−2iπ(kα + (m−2p)a)}`, `|k| ≤ n`, `0 ≤ p ≤ m`.
pub fn lemma_eigenvalues(alpha: Real, a: Real, m: usize, n: i64) -> Vec<Cx> {
    let mut out = Vec::new();
    for k in -n..=n {
        for p in 0..=m {
            out.push(Cx::turn(
                -(int(k) * alpha + int(m as i64 - 2 * p as i64) * a),
            ));
        }
    }
    out
}

pub fn eigen_search(
    c: &Cocycle,
    m: usize,
    n_trunc: i64,
    lambdas: &[Cx],
) -> Result<Vec<EigenEvidence>> {
    eigen_search_in(c, m, n_trunc, lambdas, Convention::Literal)
}

/// [`eigen_search`] in either convention; eigenvalues of `Inverse` are the
/// conjugates of the literal ones.
pub fn eigen_search_in(
    c: &Cocycle,
    m: usize,
    n_trunc: i64,
    lambdas: &[Cx],
    convention: Convention,
) -> Result<Vec<EigenEvidence>> {
    if m == 0 {
        return Err(Error::Usage("eigen search needs m ≥ 1".into()));
    }
    let op = KoopmanOperator::build(c, m, real(1e-66), 1 << 12)?;
    let mat = op.slice_matrix_in(n_trunc, convention);
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let est = smallest_singular(&mat.shifted(lambda), 12);
            EigenEvidence {
                lambda,
                sigma_min: est.sigma,
                vector: est.vector,
            }
        })
        .collect())
}

/// Uniform grid of `count` points on the unit circle.
pub fn circle_grid(count: usize) -> Vec<Cx> {
    (0..count)
        .map(|i| Cx::turn(int(i as i64) / int(count as i64)))
        .collect()
}

/// Midpoints (on the circle) between angularly consecutive values.
pub fn gap_midpoints(values: &[Cx]) -> Vec<(Cx, Real)> {
    let mut angles: Vec<Real> = values
        .iter()
        .map(|v| crate::real::frac01(v.arg() / crate::real::tau()))
        .collect();
    angles.sort_by(crate::real::cmp_real);
    angles.dedup_by(|a, b| (*a - *b).abs() < real(1e-60));
    let n = angles.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = angles[i];
        let b = if i + 1 < n {
            angles[i + 1]
        } else {
            angles[0] + Real::ONE
        };
        let mid = a.midpoint(b);
        let half_chord = (crate::real::pi() * (b - a).div2()).sin().mul2();
        out.push((Cx::turn(mid), half_chord));
    }
    out
}
