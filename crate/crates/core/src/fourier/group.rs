//! Maps `𝕋 → SU(2)` kept as finite products of simple factors.

use alloc::vec;
use alloc::vec::Vec;

use super::{transform_adaptive, AlgebraMap, GridOptions, Lattice};
use crate::error::{Error, Result};
use crate::real::{int, Cx, Real};
use crate::su2::{ad, exp_alg, AdMatrix, GroupElement};

#[derive(Clone, Debug, PartialEq)]
pub enum GroupFactor {
    Constant(GroupElement),
    /// `x ↦ {e^{iπ·h·x}, 0}`; 2-periodic when `h` is odd.
    Morphism {
        h: i64,
    },
    Exp(AlgebraMap),
}

impl GroupFactor {
    fn evaluate(&self, x: Real) -> GroupElement {
        match self {
            GroupFactor::Constant(g) => *g,
            GroupFactor::Morphism { h } => GroupElement::diagonal(int(*h) * x.div2()),
            GroupFactor::Exp(f) => exp_alg(&f.evaluate(x)),
        }
    }

    fn inverse(&self) -> Self {
        match self {
            GroupFactor::Constant(g) => GroupFactor::Constant(g.inverse()),
            GroupFactor::Morphism { h } => GroupFactor::Morphism { h: -h },
            GroupFactor::Exp(f) => GroupFactor::Exp(f.neg()),
        }
    }
}

/// `x ↦ F₀(x)·F₁(x)···F_r(x)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GroupMap {
    factors: Vec<GroupFactor>,
}

impl GroupMap {
    pub fn identity() -> Self {
        GroupMap::default()
    }

    pub fn constant(g: GroupElement) -> Self {
        GroupMap {
            factors: vec![GroupFactor::Constant(g)],
        }
    }

    /// `x ↦ {e^{iπhx}, 0}`.
    pub fn morphism(h: i64) -> Self {
        GroupMap {
            factors: vec![GroupFactor::Morphism { h }],
        }
    }

    /// `x ↦ exp(f(x))`; `f` must live on the integer lattice.
    pub fn exp(f: AlgebraMap) -> Result<Self> {
        if f.lattice() != Lattice::Integer {
            return Err(Error::Usage(
                "exponential factors must be 1-periodic".into(),
            ));
        }
        Ok(GroupMap {
            factors: vec![GroupFactor::Exp(f)],
        })
    }

    pub fn factors(&self) -> &[GroupFactor] {
        &self.factors
    }

    pub fn from_factors(factors: Vec<GroupFactor>) -> Self {
        GroupMap { factors }
    }

    /// Pointwise product `self(x)·other(x)`.
    pub fn then(&self, other: &GroupMap) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        GroupMap { factors }
    }

    pub fn inverse(&self) -> Self {
        GroupMap {
            factors: self
                .factors
                .iter()
                .rev()
                .map(GroupFactor::inverse)
                .collect(),
        }
    }

    /// Sum of morphism degrees (in half-frequency units).
    pub fn degree(&self) -> i64 {
        self.factors
            .iter()
            .map(|f| {
                if let GroupFactor::Morphism { h } = f {
                    *h
                } else {
                    0
                }
            })
            .sum()
    }

    /// Whether `x ↦ g(x)` is 1-periodic: each odd morphism flips the sign at
    /// `x + 1`, and `−Id` is central.
    pub fn is_periodic(&self) -> bool {
        self.degree() % 2 == 0
    }

    /// Same map with adjacent constants multiplied out, adjacent morphisms
    /// added and trivial factors dropped.
    pub fn compact(&self) -> Self {
        let mut out: Vec<GroupFactor> = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            match (out.last_mut(), f) {
                (_, GroupFactor::Morphism { h: 0 }) => {}
                (_, GroupFactor::Exp(m)) if m.is_zero() => {}
                (Some(GroupFactor::Constant(a)), GroupFactor::Constant(b)) => *a = *a * *b,
                (Some(GroupFactor::Morphism { h }), GroupFactor::Morphism { h: g }) => {
                    *h += g;
                    if *h == 0 {
                        out.pop();
                    }
                }
                _ => out.push(f.clone()),
            }
        }
        GroupMap { factors: out }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.iter().all(|f| match f {
            GroupFactor::Constant(_) => true,
            GroupFactor::Morphism { h } => *h == 0,
            GroupFactor::Exp(m) => m
                .modes()
                .all(|(k, t, z)| k == 0 || (t.is_zero() && z.is_zero())),
        })
    }

    pub fn evaluate(&self, x: Real) -> GroupElement {
        self.factors
            .iter()
            .fold(GroupElement::IDENTITY, |acc, f| acc * f.evaluate(x))
    }

    /// `x ↦ g(x + s)`.
    pub fn shifted(&self, s: Real) -> Self {
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            match f {
                GroupFactor::Constant(_) => factors.push(f.clone()),
                GroupFactor::Morphism { h } => {
                    factors.push(f.clone());
                    factors.push(GroupFactor::Constant(GroupElement::diagonal(
                        int(*h) * s.div2(),
                    )));
                }
                GroupFactor::Exp(m) => factors.push(GroupFactor::Exp(m.shifted(s))),
            }
        }
        GroupMap { factors }
    }

    /// Values on `x_j = j/M`.
    pub fn samples(&self, m: usize) -> Result<Vec<GroupElement>> {
        let mut out = vec![GroupElement::IDENTITY; m];
        let has_morphism = self
            .factors
            .iter()
            .any(|f| matches!(f, GroupFactor::Morphism { .. }));
        // {e^{iπhj/M}, 0} = ω^{hj mod 2M} with ω = e^{iπ/M}.
        let roots = if has_morphism {
            Cx::unit_roots(2 * m)
        } else {
            Vec::new()
        };
        let period = 2 * m as i64;
        for f in &self.factors {
            match f {
                GroupFactor::Constant(g) => out.iter_mut().for_each(|v| *v = *v * *g),
                GroupFactor::Morphism { h } => {
                    let h = h.rem_euclid(period);
                    for (j, v) in out.iter_mut().enumerate() {
                        let z = roots[((h * j as i64) % period) as usize];
                        *v = *v * GroupElement { z, w: Cx::ZERO };
                    }
                }
                GroupFactor::Exp(a) => {
                    let vals = a.samples_on(m)?;
                    for (v, y) in out.iter_mut().zip(&vals) {
                        *v = *v * exp_alg(y);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `x ↦ Ad(g(x)).f(x)`. Constant and morphism factors act exactly on
    /// coefficients; exponential factors go through an adaptive grid.
    pub fn conjugate_pointwise(&self, f: &AlgebraMap, opts: &GridOptions) -> Result<AlgebraMap> {
        let mut acc = f.clone();
        let mut pending: Vec<&GroupFactor> = Vec::new();
        for factor in self.factors.iter().rev() {
            match factor {
                GroupFactor::Exp(_) => pending.push(factor),
                _ => {
                    acc = flush(acc, &mut pending, opts)?;
                    acc = match factor {
                        GroupFactor::Constant(g) => acc.ad_constant(&AdMatrix::of(g)),
                        GroupFactor::Morphism { h } => acc.shift_z_half(2 * h)?,
                        GroupFactor::Exp(_) => unreachable!(),
                    };
                }
            }
        }
        flush(acc, &mut pending, opts)
    }
}

/// Applies a run of exponential factors (innermost first) on one grid.
fn flush(
    acc: AlgebraMap,
    pending: &mut Vec<&GroupFactor>,
    opts: &GridOptions,
) -> Result<AlgebraMap> {
    if pending.is_empty() {
        return Ok(acc);
    }
    let maps: Vec<&AlgebraMap> = pending
        .iter()
        .map(|f| match f {
            GroupFactor::Exp(m) => m,
            _ => unreachable!(),
        })
        .collect();
    let hint = maps.iter().map(|m| m.band()).sum::<i64>() + acc.band();
    let lattice = acc.lattice();
    let (out, _) = transform_adaptive(lattice, hint, opts, |x| {
        let mut v = acc.evaluate(x);
        for m in &maps {
            v = ad(&exp_alg(&m.evaluate(x)), &v);
        }
        Ok(v)
    })?;
    pending.clear();
    Ok(out)
}

/// `x ↦ Ad(g(x)).f(x)`.
pub fn group_conjugate_pointwise(g: &GroupMap, f: &AlgebraMap) -> Result<AlgebraMap> {
    g.conjugate_pointwise(f, &GridOptions::default())
}
