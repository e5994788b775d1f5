//! Fourier series of maps from the circle into su(2) and SU(2).

pub mod fft;
mod grid;
mod group;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::real::{int, max_real, real, tau, Cx, Real};
use crate::su2::{AdMatrix, AlgebraElement};

pub use grid::{transform_adaptive, transform_adaptive_grid, Grid, GridOptions};
pub use group::{group_conjugate_pointwise, GroupFactor, GroupMap};

/// Frequency lattice of a map. On the half lattice an index `k` stands for
/// the frequency `k/2` and the natural period is 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    Integer,
    Half,
}

impl Lattice {
    /// Lattice indices per unit of frequency.
    pub fn scale(self) -> i64 {
        match self {
            Lattice::Integer => 1,
            Lattice::Half => 2,
        }
    }

    pub fn period(self) -> Real {
        int(self.scale())
    }
}

/// A band-limited map `𝕋 → su(2)`: `t(x) = Σ t̂_k e^{2iπkx}` (real) and
/// `u(x) = Σ ẑ_k e^{2iπkx}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraMap {
    lattice: Lattice,
    band: i64,
    t: Vec<Cx>,
    z: Vec<Cx>,
    alias_bound: Real,
}

/// A `C^s` norm read off a sampling grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CNormEstimate {
    pub value: Real,
    pub grid_size: usize,
}

impl AlgebraMap {
    pub fn zero(band: i64) -> Self {
        Self::zero_on(Lattice::Integer, band)
    }

    pub fn zero_on(lattice: Lattice, band: i64) -> Self {
        let n = (2 * band + 1) as usize;
        AlgebraMap {
            lattice,
            band,
            t: vec![Cx::ZERO; n],
            z: vec![Cx::ZERO; n],
            alias_bound: Real::ZERO,
        }
    }

    /// The constant map `x ↦ v`.
    pub fn constant(v: AlgebraElement) -> Self {
        let mut f = Self::zero(0);
        f.t[0] = Cx::from_real(v.t);
        f.z[0] = v.u;
        f
    }

    /// `{0, c·e^{2iπkx}}`.
    pub fn z_mode(k: i64, c: Cx) -> Self {
        let mut f = Self::zero(k.abs());
        f.set_z(k, c);
        f
    }

    /// `{2Re(c·e^{2iπkx}), 0}` for `k ≠ 0`, `{Re c, 0}` for `k = 0`.
    pub fn t_mode(k: i64, c: Cx) -> Self {
        let mut f = Self::zero(k.abs());
        if k == 0 {
            f.set_t(0, Cx::from_real(c.re));
        } else {
            f.set_t(k, c);
        }
        f
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Largest stored index (in lattice units).
    pub fn band(&self) -> i64 {
        self.band
    }

    /// Largest stored frequency.
    pub fn max_frequency(&self) -> Real {
        int(self.band) / self.lattice.period()
    }

    pub fn alias_bound(&self) -> Real {
        self.alias_bound
    }

    pub fn with_alias_bound(mut self, bound: Real) -> Self {
        self.alias_bound = bound;
        self
    }

    fn slot(&self, k: i64) -> Option<usize> {
        (k.abs() <= self.band).then(|| (k + self.band) as usize)
    }

    pub fn frequency(&self, k: i64) -> Real {
        int(k) / self.lattice.period()
    }

    pub fn t_coeff(&self, k: i64) -> Cx {
        self.slot(k).map_or(Cx::ZERO, |i| self.t[i])
    }

    pub fn z_coeff(&self, k: i64) -> Cx {
        self.slot(k).map_or(Cx::ZERO, |i| self.z[i])
    }

    /// Grows the stored band (never shrinks it).
    pub fn widen(&mut self, band: i64) {
        if band <= self.band {
            return;
        }
        let mut grown = Self::zero_on(self.lattice, band);
        for k in -self.band..=self.band {
            let i = grown.slot(k).unwrap();
            grown.t[i] = self.t_coeff(k);
            grown.z[i] = self.z_coeff(k);
        }
        grown.alias_bound = self.alias_bound;
        *self = grown;
    }

    /// Sets `t̂_k` and `t̂_{−k} = conj(t̂_k)`.
    pub fn set_t(&mut self, k: i64, c: Cx) {
        self.widen(k.abs());
        let i = self.slot(k).unwrap();
        let j = self.slot(-k).unwrap();
        if k == 0 {
            self.t[i] = Cx::from_real(c.re);
        } else {
            self.t[i] = c;
            self.t[j] = c.conj();
        }
    }

    pub fn set_z(&mut self, k: i64, c: Cx) {
        self.widen(k.abs());
        let i = self.slot(k).unwrap();
        self.z[i] = c;
    }

    /// Iterates `(k, t̂_k, ẑ_k)` over the stored band.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Cx, Cx)> + '_ {
        (-self.band..=self.band).map(move |k| (k, self.t_coeff(k), self.z_coeff(k)))
    }

    fn map_modes(&self, keep: impl Fn(i64) -> (bool, bool)) -> Self {
        let mut out = self.clone();
        for k in -self.band..=self.band {
            let i = out.slot(k).unwrap();
            let (kt, kz) = keep(k);
            if !kt {
                out.t[i] = Cx::ZERO;
            }
            if !kz {
                out.z[i] = Cx::ZERO;
            }
        }
        out
    }

    fn lattice_bound(&self, n: i64) -> i64 {
        n * self.lattice.scale()
    }

    /// `T_N`: keeps frequencies `|k| ≤ N`.
    pub fn truncate(&self, n: i64) -> Self {
        let b = self.lattice_bound(n);
        self.map_modes(|k| (k.abs() <= b, k.abs() <= b))
            .shrink_to(b.min(self.band))
    }

    /// Keeps lattice indices `|k| ≤ b`.
    pub(crate) fn truncate_index(&self, b: i64) -> Self {
        self.map_modes(|k| (k.abs() <= b, k.abs() <= b))
            .shrink_to(b.min(self.band))
    }

    /// `Ṫ_N`: `T_N` without the mean.
    pub fn remove_mean_truncate(&self, n: i64) -> Self {
        let b = self.lattice_bound(n);
        let keep = |k: i64| k != 0 && k.abs() <= b;
        self.map_modes(|k| (keep(k), keep(k)))
            .shrink_to(b.min(self.band))
    }

    /// `R_N`: keeps frequencies `|k| > N`.
    pub fn rest(&self, n: i64) -> Self {
        let b = self.lattice_bound(n);
        self.map_modes(|k| (k.abs() > b, k.abs() > b))
    }

    /// z-part restricted to `0 < |k − k₁| ≤ 2N` (the twisted solve window).
    pub fn window(&self, n: i64, k1: i64) -> Self {
        let (b, c) = (self.lattice_bound(2 * n), self.lattice_bound(k1));
        self.map_modes(|k| (false, k != c && (k - c).abs() <= b))
    }

    /// z-part restricted to `|k − k₁| > 2N`.
    pub fn dis_centered_rest(&self, n: i64, k1: i64) -> Self {
        let (b, c) = (self.lattice_bound(2 * n), self.lattice_bound(k1));
        self.map_modes(|k| (false, (k - c).abs() > b))
    }

    /// Keeps only the z-mode at `k₁`.
    pub fn z_only_at(&self, k1: i64) -> Self {
        let c = self.lattice_bound(k1);
        self.map_modes(|k| (false, k == c))
    }

    pub fn t_part(&self) -> Self {
        self.map_modes(|_| (true, false))
    }

    pub fn z_part(&self) -> Self {
        self.map_modes(|_| (false, true))
    }

    /// Mean value `{t̂_0, ẑ_0}`.
    pub fn mean(&self) -> AlgebraElement {
        AlgebraElement::new(self.t_coeff(0).re, self.z_coeff(0))
    }

    fn shrink_to(mut self, band: i64) -> Self {
        if band >= self.band {
            return self;
        }
        let lo = (self.band - band) as usize;
        let hi = lo + (2 * band + 1) as usize;
        self.t = self.t[lo..hi].to_vec();
        self.z = self.z[lo..hi].to_vec();
        self.band = band;
        self
    }

    /// Drops the outer band wherever all coefficients are `≤ threshold`,
    /// adding the dropped mass to the alias bound.
    pub fn trimmed(self, threshold: Real) -> Self {
        let mut b = self.band;
        let mut dropped = Real::ZERO;
        while b > 0 {
            let edge = [
                self.t_coeff(b),
                self.t_coeff(-b),
                self.z_coeff(b),
                self.z_coeff(-b),
            ];
            if edge.iter().any(|c| c.abs() > threshold) {
                break;
            }
            dropped += edge.iter().map(|c| c.abs()).fold(Real::ZERO, |a, b| a + b);
            b -= 1;
        }
        let bound = self.alias_bound + dropped;
        self.shrink_to(b).with_alias_bound(bound)
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> Real {
        self.t
            .iter()
            .chain(&self.z)
            .fold(Real::ZERO, |m, c| max_real(m, c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.t.iter().chain(&self.z).all(|c| c.is_zero())
    }

    fn zip_with(&self, o: &Self, f: impl Fn(Cx, Cx) -> Cx) -> Result<Self> {
        if self.lattice != o.lattice {
            return Err(Error::Usage("maps live on different lattices".into()));
        }
        let band = self.band.max(o.band);
        let mut out = Self::zero_on(self.lattice, band);
        for k in -band..=band {
            let i = out.slot(k).unwrap();
            out.t[i] = f(self.t_coeff(k), o.t_coeff(k));
            out.z[i] = f(self.z_coeff(k), o.z_coeff(k));
        }
        out.alias_bound = self.alias_bound + o.alias_bound;
        Ok(out)
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a - b)
    }

    /// Sum; panics on mismatched lattices.
    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("matching lattices")
    }

    /// Difference; panics on mismatched lattices.
    pub fn sub(&self, o: &Self) -> Self {
        self.try_sub(o).expect("matching lattices")
    }

    pub fn scale(&self, k: Real) -> Self {
        let mut out = self.clone();
        out.t
            .iter_mut()
            .chain(out.z.iter_mut())
            .for_each(|c| *c = c.scale(k));
        out.alias_bound = self.alias_bound * k.abs();
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-Real::ONE)
    }

    /// `x ↦ f(x + s)`.
    pub fn shifted(&self, s: Real) -> Self {
        let mut out = self.clone();
        for k in -self.band..=self.band {
            let i = out.slot(k).unwrap();
            let phase = Cx::turn(self.frequency(k) * s);
            out.t[i] *= phase;
            out.z[i] *= phase;
        }
        out
    }

    /// The `σ`-th derivative.
    pub fn derivative(&self, sigma: u32) -> Self {
        let mut out = self.clone();
        if sigma == 0 {
            return out;
        }
        for k in -self.band..=self.band {
            let i = out.slot(k).unwrap();
            let mut factor = Cx::ONE;
            let step = Cx::new(Real::ZERO, tau() * self.frequency(k));
            for _ in 0..sigma {
                factor *= step;
            }
            out.t[i] *= factor;
            out.z[i] *= factor;
        }
        out
    }

    /// `Ad(S)` applied coefficientwise.
    pub fn ad_constant(&self, m: &AdMatrix) -> Self {
        let mut out = self.clone();
        for k in -self.band..=self.band {
            let i = out.slot(k).unwrap();
            let (t, z, zbar) = (self.t_coeff(k), self.z_coeff(k), self.z_coeff(-k).conj());
            out.t[i] = t.scale(m.c) + m.d * z + m.d.conj() * zbar;
            out.z[i] = m.p * t + m.q * z + m.r * zbar;
        }
        out
    }

    /// Multiplies the z-part by `e^{2iπ·(h/2)·x}` where `h` is in
    /// half-frequency units, i.e. the z-frequencies move by `h/2`.
    pub fn shift_z_half(&self, h: i64) -> Result<Self> {
        let s = match self.lattice {
            Lattice::Integer if h % 2 != 0 => {
                return Err(Error::Usage(format!(
                    "half-integer shift {h}/2 on an integer lattice"
                )))
            }
            Lattice::Integer => h / 2,
            Lattice::Half => h,
        };
        let band = self.band + s.abs();
        let mut out = Self::zero_on(self.lattice, band);
        for k in -self.band..=self.band {
            let i = out.slot(k).unwrap();
            out.t[i] = self.t_coeff(k);
            let j = out.slot(k + s).unwrap();
            out.z[j] = self.z_coeff(k);
        }
        out.alias_bound = self.alias_bound;
        Ok(out)
    }

    /// Moves an integer-lattice map onto the half lattice.
    pub fn to_half_lattice(&self) -> Self {
        if self.lattice == Lattice::Half {
            return self.clone();
        }
        let mut out = Self::zero_on(Lattice::Half, 2 * self.band);
        for k in -self.band..=self.band {
            let i = out.slot(2 * k).unwrap();
            out.t[i] = self.t_coeff(k);
            out.z[i] = self.z_coeff(k);
        }
        out.alias_bound = self.alias_bound;
        out
    }

    /// Back to the integer lattice; refuses when odd indices carry more than
    /// `tolerance`.
    pub fn to_integer_lattice(&self, tolerance: Real) -> Result<Self> {
        if self.lattice == Lattice::Integer {
            return Ok(self.clone());
        }
        let mut out = Self::zero(self.band / 2);
        for k in -self.band..=self.band {
            if k % 2 != 0 {
                if self.t_coeff(k).abs() > tolerance || self.z_coeff(k).abs() > tolerance {
                    return Err(Error::Domain(format!("half-integer content at index {k}")));
                }
                continue;
            }
            let i = out.slot(k / 2).unwrap();
            out.t[i] = self.t_coeff(k);
            out.z[i] = self.z_coeff(k);
        }
        out.alias_bound = self.alias_bound;
        Ok(out)
    }

    /// `(Σ (1+k²)^s (|t̂_k|² + |ẑ_k|²))^{1/2}`.
    pub fn norm_h(&self, s: Real) -> Real {
        let integral = s == s.round();
        let mut acc = Real::ZERO;
        for (k, t, z) in self.modes() {
            let mass = t.norm_sqr() + z.norm_sqr();
            if mass.eq_zero() {
                continue;
            }
            let f = self.frequency(k);
            let base = Real::ONE + f * f;
            let w = if integral {
                base.powi(i32::try_from(&s).unwrap_or(0))
            } else {
                (base.ln() * s).exp()
            };
            acc += w * mass;
        }
        acc.sqrt()
    }

    pub fn norm_l2(&self) -> Real {
        self.norm_h(Real::ZERO)
    }

    /// Value at `x`, by direct summation.
    pub fn evaluate(&self, x: Real) -> AlgebraElement {
        let mut t = Real::ZERO;
        let mut u = Cx::ZERO;
        for (k, tk, zk) in self.modes() {
            if tk.is_zero() && zk.is_zero() {
                continue;
            }
            let e = Cx::turn(self.frequency(k) * x);
            t += (tk * e).re;
            u += zk * e;
        }
        AlgebraElement::new(t, u)
    }

    /// Values on the grid `x_j = P·j/M` (`P` the lattice period). `M` must
    /// be a power of two exceeding `2·band`.
    pub fn samples(&self, m: usize) -> Result<Vec<AlgebraElement>> {
        if !m.is_power_of_two() || (m as i64) <= 2 * self.band {
            return Err(Error::Bandwidth {
                requested: (2 * self.band + 1) as usize,
                limit: m,
            });
        }
        let mut ct = vec![Cx::ZERO; m];
        let mut cz = vec![Cx::ZERO; m];
        for (k, tk, zk) in self.modes() {
            let i = k.rem_euclid(m as i64) as usize;
            ct[i] = tk;
            cz[i] = zk;
        }
        let t = fft::inverse(&ct);
        let z = fft::inverse(&cz);
        Ok(t.into_iter()
            .zip(z)
            .map(|(t, z)| AlgebraElement::new(t.re, z))
            .collect())
    }

    /// Values on `x_j = P·j/M` for any power of two `M`, oversampling when
    /// the band does not fit the grid.
    pub fn samples_on(&self, m: usize) -> Result<Vec<AlgebraElement>> {
        let need = self.min_grid();
        if need <= m {
            return self.samples(m);
        }
        let stride = need / m;
        Ok(self.samples(need)?.into_iter().step_by(stride).collect())
    }

    /// `Σ_k (1 + |k|)^s (|t̂_k| + |ẑ_k|)`, an upper bound for the `C^s` norm
    /// up to `(2π)^s`.
    pub fn wiener_norm(&self, s: u32) -> Real {
        let mut acc = Real::ZERO;
        for (k, t, z) in self.modes() {
            if t.is_zero() && z.is_zero() {
                continue;
            }
            let w = (Real::ONE + self.frequency(k).abs()).powi(s as i32);
            acc += w * (t.abs() + z.abs());
        }
        acc
    }

    /// Coefficients `|k| < M/2` from samples on `x_j = P·j/M`; the Nyquist
    /// index is folded into the alias bound.
    pub fn from_samples(lattice: Lattice, values: &[AlgebraElement]) -> Result<Self> {
        let m = values.len();
        if !m.is_power_of_two() || m < 2 {
            return Err(Error::Usage("sample count must be a power of two".into()));
        }
        let ct = fft::forward(
            &values
                .iter()
                .map(|v| Cx::from_real(v.t))
                .collect::<Vec<_>>(),
        );
        let cz = fft::forward(&values.iter().map(|v| v.u).collect::<Vec<_>>());
        let band = (m / 2 - 1) as i64;
        let mut out = Self::zero_on(lattice, band);
        for k in -band..=band {
            let i = k.rem_euclid(m as i64) as usize;
            let s = out.slot(k).unwrap();
            out.z[s] = cz[i];
            out.t[s] = ct[i];
        }
        for k in 0..=band {
            let avg = (out.t_coeff(k) + out.t_coeff(-k).conj()).scale(real(0.5));
            out.set_t(k, avg);
        }
        out.alias_bound = ct[m / 2].abs() + cz[m / 2].abs();
        Ok(out)
    }

    /// Smallest power-of-two grid that resolves the map.
    pub fn min_grid(&self) -> usize {
        ((2 * self.band + 2) as usize).next_power_of_two().max(2)
    }

    /// `sup_x ‖f(x)‖` on a grid of `grid_size` points (raised to the minimal
    /// resolving size if needed).
    pub fn sup_norm(&self, grid_size: usize) -> CNormEstimate {
        self.norm_c_estimate(0, grid_size)
    }

    /// `max_{σ ≤ s} sup_x ‖∂^σ f(x)‖`, estimated on a grid.
    pub fn norm_c_estimate(&self, s: u32, grid_size: usize) -> CNormEstimate {
        let m = grid_size.max(self.min_grid()).next_power_of_two();
        let mut value = Real::ZERO;
        for sigma in 0..=s {
            let d = self.derivative(sigma);
            let vals = d.samples(m).expect("grid resolves the map");
            for v in vals {
                value = max_real(value, v.norm());
            }
        }
        CNormEstimate {
            value,
            grid_size: m,
        }
    }

    /// Pointwise maximum of the t- and z-coefficient differences.
    pub fn max_coeff_diff(&self, o: &Self) -> Real {
        self.sub(o).max_coeff()
    }
}
