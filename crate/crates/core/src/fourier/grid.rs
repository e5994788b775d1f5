//! Re-expansion of pointwise-defined maps on oversampled grids.

use alloc::vec::Vec;

use super::{AlgebraMap, Lattice};
use crate::error::{Error, Result};
use crate::real::{int, max_real, real, Real};
use crate::su2::AlgebraElement;

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Coefficients below this are treated as zero.
    pub floor: Real,
    /// Smallest grid tried (rounded up to a power of two).
    pub min_size: usize,
    /// Grids larger than this are refused with a bandwidth error.
    pub max_size: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            floor: real(1e-66),
            min_size: 64,
            max_size: 1 << 14,
        }
    }
}

/// What a transform settled on.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub size: usize,
    /// Largest coefficient in the discarded upper quarter band.
    pub tail: Real,
}

/// Expands `x ↦ f(x)` (period given by the lattice) into Fourier modes. The
/// grid is doubled until the upper half of the resolved band is below the
/// floor; the discarded mass is kept as the alias bound.
pub fn transform_adaptive(
    lattice: Lattice,
    band_hint: i64,
    opts: &GridOptions,
    f: impl Fn(Real) -> Result<AlgebraElement>,
) -> Result<(AlgebraMap, Grid)> {
    let period = lattice.period();
    transform_adaptive_grid(lattice, band_hint, opts, |m| {
        let step = period / int(m as i64);
        (0..m).map(|j| f(step * int(j as i64))).collect()
    })
}

/// As [`transform_adaptive`], with the map supplied a whole grid at a time:
/// `sample(M)` returns the values at `x_j = P·j/M`.
pub fn transform_adaptive_grid(
    lattice: Lattice,
    band_hint: i64,
    opts: &GridOptions,
    sample: impl Fn(usize) -> Result<Vec<AlgebraElement>>,
) -> Result<(AlgebraMap, Grid)> {
    let mut m = ((4 * band_hint.max(0) + 4) as usize)
        .max(opts.min_size)
        .next_power_of_two();
    loop {
        if m > opts.max_size {
            return Err(Error::Bandwidth {
                requested: m,
                limit: opts.max_size,
            });
        }
        let values = sample(m)?;
        let full = AlgebraMap::from_samples(lattice, &values)?;
        let quarter = (m / 4) as i64;
        let mut tail = full.alias_bound();
        let mut tail_mass = full.alias_bound();
        for (k, t, z) in full.modes() {
            if k.abs() >= quarter {
                tail = max_real(tail, max_real(t.abs(), z.abs()));
                tail_mass += t.abs() + z.abs();
            }
        }
        if tail <= opts.floor {
            let kept = full.truncate_index(quarter - 1).with_alias_bound(tail_mass);
            return Ok((kept.trimmed(opts.floor), Grid { size: m, tail }));
        }
        m *= 2;
    }
}
