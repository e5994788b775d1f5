//! Quasiperiodic cocycles `(x, S) ↦ (x + α, A(x)·S)`.

mod correlation;
pub mod fast;

use alloc::vec::Vec;

use crate::arithmetic::RotationNumber;
use crate::error::{Error, Result};
use crate::fourier::GroupMap;
use crate::real::{int, to_f64, Real};
use crate::su2::GroupElement;

pub use correlation::{correlation_trace, CorrelationTrace, Observable};
pub use fast::{FastGroup, FastMap};

#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    alpha: RotationNumber,
    transfer: GroupMap,
}

impl Cocycle {
    /// Refuses transfer maps that are not 1-periodic.
    pub fn new(alpha: RotationNumber, transfer: GroupMap) -> Result<Self> {
        if !transfer.is_periodic() {
            return Err(Error::Domain("transfer map is not 1-periodic".into()));
        }
        Ok(Cocycle { alpha, transfer })
    }

    pub fn constant(alpha: RotationNumber, a: GroupElement) -> Self {
        Cocycle {
            alpha,
            transfer: GroupMap::constant(a),
        }
    }

    pub fn alpha(&self) -> &RotationNumber {
        &self.alpha
    }

    pub fn transfer(&self) -> &GroupMap {
        &self.transfer
    }

    pub fn evaluate(&self, x: Real) -> GroupElement {
        self.transfer.evaluate(x)
    }

    /// `A(x + (n−1)α)···A(x)`; for negative `n` the inverse of the forward
    /// product started at `x + nα`.
    pub fn iterate(&self, n: i64, x: Real) -> GroupElement {
        let alpha = self.alpha.value();
        if n < 0 {
            return self.iterate(-n, x + int(n) * alpha).inverse();
        }
        let values: Vec<GroupElement> = (0..n).map(|i| self.evaluate(x + int(i) * alpha)).collect();
        ordered_product(&values)
    }

    /// `(α, B(·+α)·A(·)·B(·)⁻¹)`. `B` may be 2-periodic; the conjugated
    /// cocycle is 1-periodic whenever the input is.
    pub fn conjugate(&self, b: &GroupMap) -> Cocycle {
        let transfer = b
            .shifted(self.alpha.value())
            .then(&self.transfer)
            .then(&b.inverse());
        Cocycle {
            alpha: self.alpha.clone(),
            transfer,
        }
    }

    pub fn fast(&self) -> FastCocycle {
        FastCocycle {
            alpha: to_f64(self.alpha.value()),
            map: FastMap::compile(&self.transfer),
        }
    }

    /// Iterates `m` among the continued-fraction denominators (and their
    /// doubles) up to `horizon`, with `|||mα||| + sup_x d(Aₘ(x), Id)` on a
    /// grid of `grid` points. Only those within `tolerance` are kept.
    pub fn rigidity_scan(
        &self,
        horizon: u64,
        tolerance: f64,
        grid: usize,
    ) -> Result<Vec<RigidityHit>> {
        let expansion = self.alpha.expand(90)?;
        let mut candidates: Vec<u64> = Vec::new();
        for &(_, q) in &expansion.convergents {
            for m in [q, 2 * q] {
                if m <= horizon as u128 && !candidates.contains(&(m as u64)) {
                    candidates.push(m as u64);
                }
            }
        }
        candidates.sort_unstable();
        let fast = self.fast();
        let mut hits = Vec::new();
        for m in candidates {
            let arith = to_f64(self.alpha.dist_multiple(m as i64).0);
            let dist = arith + fast.sup_distance_to_identity(m, grid);
            if dist <= tolerance {
                hits.push(RigidityHit { m, distance: dist });
            }
        }
        Ok(hits)
    }
}

/// An iterate close to `(0, Id)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidityHit {
    pub m: u64,
    pub distance: f64,
}

/// Product `v_{n−1}···v_0` by binary splitting.
fn ordered_product(values: &[GroupElement]) -> GroupElement {
    match values.len() {
        0 => GroupElement::IDENTITY,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            ordered_product(hi) * ordered_product(lo)
        }
    }
}

/// A cocycle rounded to doubles.
#[derive(Clone, Debug)]
pub struct FastCocycle {
    pub alpha: f64,
    pub map: FastMap,
}

impl FastCocycle {
    pub fn iterate(&self, n: u64, x: f64) -> FastGroup {
        let mut acc = FastGroup::IDENTITY;
        for i in 0..n {
            acc = self.map.evaluate(x + i as f64 * self.alpha) * acc;
            if i % 64 == 63 {
                acc = acc.renormalized();
            }
        }
        acc.renormalized()
    }

    pub fn sup_distance_to_identity(&self, n: u64, grid: usize) -> f64 {
        (0..grid)
            .map(|j| {
                self.iterate(n, j as f64 / grid as f64)
                    .distance_to_identity()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::AlgebraMap;
    use crate::real::{real, Cx};

    fn sample() -> Cocycle {
        let mut f = AlgebraMap::zero(2);
        f.set_z(1, Cx::from_f64(0.1, 0.05));
        f.set_t(2, Cx::from_f64(-0.04, 0.02));
        let transfer =
            GroupMap::constant(GroupElement::diagonal(real(0.17))).then(&GroupMap::exp(f).unwrap());
        Cocycle::new(RotationNumber::golden_mean(), transfer).unwrap()
    }

    #[test]
    fn zero_and_constant_iterates() {
        let c = sample();
        assert_eq!(c.iterate(0, real(0.3)), GroupElement::IDENTITY);
        let a = GroupElement::new(Cx::from_f64(0.6, 0.1), Cx::from_f64(0.2, -0.3));
        let k = Cocycle::constant(RotationNumber::golden_mean(), a);
        let mut power = GroupElement::IDENTITY;
        for _ in 0..7 {
            power = a * power;
        }
        assert!(k.iterate(7, real(0.9)).distance(&power) < real(1e-68));
    }

    #[test]
    fn cocycle_identity_and_negative_iterates() {
        let c = sample();
        let alpha = c.alpha().value();
        let x = real(0.41);
        let (n, m) = (5, 3);
        let lhs = c.iterate(n + m, x);
        let rhs = c.iterate(n, x + int(m) * alpha) * c.iterate(m, x);
        assert!(lhs.distance(&rhs) < real(1e-66));
        let back = c.iterate(-n, x + int(n) * alpha) * c.iterate(n, x);
        assert!(back.distance_to_identity() < real(1e-66));
    }

    #[test]
    fn conjugation_covariance_and_round_trip() {
        let c = sample();
        let mut y = AlgebraMap::zero(1);
        y.set_z(-1, Cx::from_f64(0.01, 0.0));
        let b = GroupMap::exp(y).unwrap().then(&GroupMap::morphism(2));
        let d = c.conjugate(&b);
        let alpha = c.alpha().value();
        let x = real(0.13);
        let n = 4;
        let lhs = d.iterate(n, x);
        let rhs = b.evaluate(x + int(n) * alpha) * c.iterate(n, x) * b.evaluate(x).inverse();
        assert!(lhs.distance(&rhs) < real(1e-65));
        let back = d.conjugate(&b.inverse());
        for j in 0..8 {
            let x = int(j) / int(8);
            assert!(back.evaluate(x).distance(&c.evaluate(x)) < real(1e-65));
        }
        assert!(Cocycle::new(RotationNumber::golden_mean(), GroupMap::morphism(1)).is_err());
    }

    #[test]
    fn rigidity_of_trivial_and_diagonal_cocycles() {
        let alpha = RotationNumber::golden_mean();
        let id = Cocycle::constant(alpha.clone(), GroupElement::IDENTITY);
        let hits = id.rigidity_scan(1000, 1.0, 4).unwrap();
        for h in &hits {
            let expected = to_f64(alpha.dist_multiple(h.m as i64).0);
            assert!((h.distance - expected).abs() < 1e-12);
        }
        assert!(hits.iter().any(|h| h.m == 987));
        // a = 3α: distance at q_n is controlled by (1 + 3)·|||q_n α|||.
        let a = int(3) * alpha.value();
        let diag = Cocycle::constant(alpha.clone(), GroupElement::diagonal(a));
        for h in diag.rigidity_scan(2000, 1.0, 2).unwrap() {
            let bound = 4.0 * to_f64(alpha.dist_multiple(h.m as i64).0) * 7.0;
            assert!(h.distance <= bound, "m = {} distance {}", h.m, h.distance);
        }
    }
}
