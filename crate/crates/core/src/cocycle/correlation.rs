//! Correlations `⟨Uⁿf, g⟩` of fiber harmonics along the cocycle.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::fast::{turn, FastGroup};
use super::Cocycle;
use crate::error::{Error, Result};
use crate::harmonics::{pi_matrix_fast, HarmonicIndex, PiTable};

/// `e^{2iπkx} π^{j,p}(S)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    pub k: i64,
    pub index: HarmonicIndex,
}

#[derive(Clone, Debug)]
pub struct CorrelationTrace {
    /// `⟨Uⁿf, g⟩` for `n = 1..=T`.
    pub inner: Vec<C64>,
    /// Cesàro means `C_n = (1/n) Σ_{i≤n} |⟨Uⁱf, g⟩|²`.
    pub cesaro: Vec<f64>,
    pub quadrature: usize,
}

/// Cesàro trace of `|⟨Uⁿf, g⟩|²` for `n ≤ length`, with
/// `⟨Uⁿf, g⟩ = ∫ e^{2iπ(k(x−nα) − k'x)} pi(Qₙ(x))[p'][p] dx` and
/// `Qₙ(x) = A(x)A(x−α)···A(x−(n−1)α)`, by an equispaced rule in double
/// precision. `quadrature = 0` picks a size from the cocycle's bandwidth.
pub fn correlation_trace(
    c: &Cocycle,
    f: Observable,
    g: Observable,
    length: usize,
    quadrature: usize,
) -> Result<CorrelationTrace> {
    if f.index.m != g.index.m {
        return Err(Error::Usage("observables of different degree".into()));
    }
    let fast = c.fast();
    let m = f.index.m;
    let q_count = if quadrature > 0 {
        quadrature
    } else {
        let reach = (m as i64 + 1) * (fast.map.band() + c.transfer().degree().abs() + 2)
            + f.k.abs()
            + g.k.abs();
        (4 * reach as usize + 16).next_power_of_two()
    };
    let table = PiTable::<C64>::new(m);
    let xs: Vec<f64> = (0..q_count).map(|i| i as f64 / q_count as f64).collect();
    let mut products = vec![FastGroup::IDENTITY; q_count];
    let mut inner = Vec::with_capacity(length);
    let mut cesaro = Vec::with_capacity(length);
    let mut running = 0.0;
    let same_row = f.index.j == g.index.j;
    for n in 0..length {
        for (prod, &x) in products.iter_mut().zip(&xs) {
            *prod = *prod * fast.map.evaluate(x - n as f64 * fast.alpha);
            if n % 64 == 63 {
                *prod = prod.renormalized();
            }
        }
        let steps = (n + 1) as f64;
        let mut acc = C64::new(0.0, 0.0);
        if same_row {
            for (prod, &x) in products.iter().zip(&xs) {
                let entry = pi_matrix_fast(&table, prod)[g.index.p][f.index.p];
                let phase = turn(f.k as f64 * (x - steps * fast.alpha) - g.k as f64 * x);
                acc += entry * phase;
            }
            acc /= q_count as f64;
        }
        running += acc.norm_sqr();
        inner.push(acc);
        cesaro.push(running / steps);
    }
    Ok(CorrelationTrace {
        inner,
        cesaro,
        quadrature: q_count,
    })
}
