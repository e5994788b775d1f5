//! JSON forms of library values. Reals are written as shortest round-trip
//! decimal strings so files reload bit-identically.

use cocycle_core::arithmetic::RotationNumber;
use cocycle_core::cocycle::Cocycle;
use cocycle_core::fourier::{AlgebraMap, GroupFactor, GroupMap, Lattice};
use cocycle_core::kam::{SchemeTrace, StopReason};
use cocycle_core::normal_form::{NormalFormLedger, Plant, PlantStep, ResonantStep};
use cocycle_core::su2::GroupElement;
use cocycle_core::{Cx, Real};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealText(pub String);

impl From<Real> for RealText {
    fn from(x: Real) -> Self {
        RealText(format!("{x:e}"))
    }
}

impl RealText {
    pub fn value(&self) -> LabResult<Real> {
        self.0
            .parse()
            .map_err(|_| LabError::Config(format!("not a real number: {:?}", self.0)))
    }
}

pub type CxText = [RealText; 2];

pub fn cx_text(c: Cx) -> CxText {
    [c.re.into(), c.im.into()]
}

pub fn cx_value(c: &CxText) -> LabResult<Cx> {
    Ok(Cx::new(c[0].value()?, c[1].value()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub z: CxText,
    pub w: CxText,
}

impl From<&GroupElement> for ElementJson {
    fn from(g: &GroupElement) -> Self {
        ElementJson {
            z: cx_text(g.z),
            w: cx_text(g.w),
        }
    }
}

impl ElementJson {
    pub fn value(&self) -> LabResult<GroupElement> {
        Ok(GroupElement {
            z: cx_value(&self.z)?,
            w: cx_value(&self.w)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeJson {
    Integer,
    Half,
}

/// Nonzero coefficients as `(k, re, im)` triples. `t` lists `k ≥ 0` only,
/// its negative modes being conjugates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraMapJson {
    pub lattice: LatticeJson,
    pub band: i64,
    pub t: Vec<(i64, RealText, RealText)>,
    pub z: Vec<(i64, RealText, RealText)>,
    pub alias_bound: RealText,
}

impl From<&AlgebraMap> for AlgebraMapJson {
    fn from(f: &AlgebraMap) -> Self {
        let triple = |k: i64, c: Cx| (k, c.re.into(), c.im.into());
        let mut t = Vec::new();
        let mut z = Vec::new();
        for (k, tk, zk) in f.modes() {
            if k >= 0 && !tk.is_zero() {
                t.push(triple(k, tk));
            }
            if !zk.is_zero() {
                z.push(triple(k, zk));
            }
        }
        AlgebraMapJson {
            lattice: match f.lattice() {
                Lattice::Integer => LatticeJson::Integer,
                Lattice::Half => LatticeJson::Half,
            },
            band: f.band(),
            t,
            z,
            alias_bound: f.alias_bound().into(),
        }
    }
}

impl AlgebraMapJson {
    pub fn value(&self) -> LabResult<AlgebraMap> {
        let lattice = match self.lattice {
            LatticeJson::Integer => Lattice::Integer,
            LatticeJson::Half => Lattice::Half,
        };
        let mut f = AlgebraMap::zero_on(lattice, self.band.max(0));
        for (k, re, im) in &self.t {
            if *k < 0 {
                return Err(LabError::Config(format!("t lists k ≥ 0 only, found {k}")));
            }
            f.set_t(*k, Cx::new(re.value()?, im.value()?));
        }
        for (k, re, im) in &self.z {
            f.set_z(*k, Cx::new(re.value()?, im.value()?));
        }
        Ok(f.with_alias_bound(self.alias_bound.value()?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorJson {
    Constant(ElementJson),
    Morphism { h: i64 },
    Exp(AlgebraMapJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupMapJson(pub Vec<FactorJson>);

impl From<&GroupMap> for GroupMapJson {
    fn from(g: &GroupMap) -> Self {
        GroupMapJson(
            g.factors()
                .iter()
                .map(|f| match f {
                    GroupFactor::Constant(c) => FactorJson::Constant(c.into()),
                    GroupFactor::Morphism { h } => FactorJson::Morphism { h: *h },
                    GroupFactor::Exp(m) => FactorJson::Exp(m.into()),
                })
                .collect(),
        )
    }
}

impl GroupMapJson {
    pub fn value(&self) -> LabResult<GroupMap> {
        let factors = self
            .0
            .iter()
            .map(|f| {
                Ok(match f {
                    FactorJson::Constant(c) => GroupFactor::Constant(c.value()?),
                    FactorJson::Morphism { h } => GroupFactor::Morphism { h: *h },
                    FactorJson::Exp(m) => GroupFactor::Exp(m.value()?),
                })
            })
            .collect::<LabResult<Vec<_>>>()?;
        Ok(GroupMap::from_factors(factors))
    }
}

/// A cocycle file: rotation number (as given) and transfer function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleJson {
    pub alpha: String,
    pub transfer: GroupMapJson,
}

impl CocycleJson {
    pub fn new(alpha: &str, c: &Cocycle) -> Self {
        CocycleJson {
            alpha: alpha.to_owned(),
            transfer: c.transfer().into(),
        }
    }

    pub fn value(&self) -> LabResult<Cocycle> {
        let alpha = crate::config::parse_alpha(&self.alpha)?;
        Ok(Cocycle::new(alpha, self.transfer.value()?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: i64,
    pub k: i64,
    pub eps: RealText,
    pub amp: RealText,
    pub phi: RealText,
    pub theta: RealText,
    pub after_c_fix: bool,
    pub in_window: bool,
}

impl From<&ResonantStep> for StepJson {
    fn from(s: &ResonantStep) -> Self {
        StepJson {
            n: s.n,
            big_n: s.big_n,
            k: s.k,
            eps: s.eps.into(),
            amp: s.amp.into(),
            phi: s.phi.into(),
            theta: s.theta.into(),
            after_c_fix: s.after_c_fix,
            in_window: s.in_window,
        }
    }
}

impl StepJson {
    fn value(&self) -> LabResult<ResonantStep> {
        Ok(ResonantStep {
            n: self.n,
            big_n: self.big_n,
            k: self.k,
            eps: self.eps.value()?,
            amp: self.amp.value()?,
            phi: self.phi.value()?,
            theta: self.theta.value()?,
            after_c_fix: self.after_c_fix,
            in_window: self.in_window,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerJson {
    pub alpha: String,
    pub schedule: Vec<i64>,
    pub steps: Vec<StepJson>,
    #[serde(rename = "D")]
    pub d: GroupMapJson,
    pub far: GroupMapJson,
    pub horizon: usize,
    pub final_constant: ElementJson,
    pub d_log_norm: RealText,
    pub final_eps: RealText,
    pub exhausted: bool,
    pub tail_bound: RealText,
    pub verification: RealText,
}

impl LedgerJson {
    pub fn new(alpha: &str, l: &NormalFormLedger) -> Self {
        LedgerJson {
            alpha: alpha.to_owned(),
            schedule: l.schedule.clone(),
            steps: l.steps.iter().map(StepJson::from).collect(),
            d: (&l.d).into(),
            far: (&l.far).into(),
            horizon: l.horizon,
            final_constant: (&l.final_constant).into(),
            d_log_norm: l.d_log_norm.into(),
            final_eps: l.final_eps.into(),
            exhausted: l.exhausted,
            tail_bound: l.tail_bound.into(),
            verification: l.verification.into(),
        }
    }

    pub fn value(&self) -> LabResult<NormalFormLedger> {
        Ok(NormalFormLedger {
            alpha: crate::config::parse_alpha(&self.alpha)?,
            schedule: self.schedule.clone(),
            steps: self
                .steps
                .iter()
                .map(StepJson::value)
                .collect::<LabResult<_>>()?,
            d: self.d.value()?,
            far: self.far.value()?,
            horizon: self.horizon,
            final_constant: self.final_constant.value()?,
            d_log_norm: self.d_log_norm.value()?,
            final_eps: self.final_eps.value()?,
            exhausted: self.exhausted,
            tail_bound: self.tail_bound.value()?,
            verification: self.verification.value()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantStepJson {
    pub n: usize,
    pub k: i64,
    pub eps: RealText,
    pub amp: RealText,
    pub phi: RealText,
    pub theta: RealText,
}

pub fn plant_json(p: &Plant) -> Vec<PlantStepJson> {
    p.steps
        .iter()
        .map(|s: &PlantStep| PlantStepJson {
            n: s.n,
            k: s.k,
            eps: s.eps.into(),
            amp: s.amp.into(),
            phi: s.phi.into(),
            theta: s.theta().into(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsJson {
    pub eps0: RealText,
    pub eps_s0: RealText,
    pub y_h: [RealText; 3],
    pub y_ratio: [RealText; 3],
    pub eps_next0: RealText,
    pub eps_next_s0: RealText,
    pub smallness: RealText,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceJson {
    pub k1: i64,
    pub eps1: RealText,
    pub distance: RealText,
    /// `(k, distance, outside_scan)`.
    pub near_misses: Vec<(i64, RealText, bool)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStepJson {
    pub n: usize,
    #[serde(rename = "N_n")]
    pub big_n: i64,
    #[serde(rename = "K_n")]
    pub big_k: RealText,
    pub a: RealText,
    pub eps0: RealText,
    pub eps_s0: RealText,
    pub resonance: Option<ResonanceJson>,
    pub norms: NormsJson,
    pub residual: RealText,
    pub partition_exact: bool,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceJson {
    pub alpha: String,
    pub a1: ElementJson,
    pub eps1: RealText,
    pub steps: Vec<TraceStepJson>,
    pub stop: String,
    pub final_constant: ElementJson,
    pub final_eps: RealText,
}

pub fn stop_text(s: &StopReason) -> String {
    match s {
        StopReason::MaxSteps => "max_steps".into(),
        StopReason::EpsilonUnderflow => "epsilon_underflow".into(),
        StopReason::EstimateViolation(m) => format!("estimate_violation: {m}"),
        StopReason::Refused(m) => format!("refused: {m}"),
        StopReason::Bandwidth(m) => format!("bandwidth: {m}"),
        StopReason::Precision(m) => format!("precision: {m}"),
    }
}

impl TraceJson {
    pub fn new(alpha: &str, t: &SchemeTrace) -> Self {
        let steps = t
            .steps
            .iter()
            .map(|s| {
                let n = &s.norms;
                TraceStepJson {
                    n: s.n,
                    big_n: s.big_n,
                    big_k: s.big_k.into(),
                    a: s.a.into(),
                    eps0: n.eps0.into(),
                    eps_s0: n.eps_s0.into(),
                    resonance: s.resonance.as_ref().map(|r| ResonanceJson {
                        k1: r.k1,
                        eps1: r.eps1.into(),
                        distance: r.distance.into(),
                        near_misses: r
                            .near_misses
                            .iter()
                            .map(|m| (m.k, m.distance.into(), m.outside_scan))
                            .collect(),
                    }),
                    norms: NormsJson {
                        eps0: n.eps0.into(),
                        eps_s0: n.eps_s0.into(),
                        y_h: n.y_h.map(RealText::from),
                        y_ratio: n.y_ratio.map(RealText::from),
                        eps_next0: n.eps_next0.into(),
                        eps_next_s0: n.eps_next_s0.into(),
                        smallness: n.smallness.into(),
                    },
                    residual: s.residual.into(),
                    partition_exact: s.partition_exact,
                    grid: s.grid,
                }
            })
            .collect();
        let (a_fin, f_fin) = t.final_state();
        TraceJson {
            alpha: alpha.to_owned(),
            a1: (&t.a1).into(),
            eps1: t.f1.wiener_norm(0).into(),
            steps,
            stop: stop_text(&t.stop),
            final_constant: (&a_fin).into(),
            final_eps: f_fin.wiener_norm(0).into(),
        }
    }
}

pub fn rotation_json(alpha: &RotationNumber) -> RealText {
    alpha.value().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cocycle_core::real::{int, real};

    #[test]
    fn reals_round_trip_exactly() {
        for x in [
            Real::ONE / int(3),
            -real(1e-300) * real(1e-300),
            Real::ZERO,
            cocycle_core::real::pi(),
        ] {
            assert_eq!(RealText::from(x).value().unwrap(), x);
        }
    }

    #[test]
    fn maps_round_trip() {
        let mut f = AlgebraMap::zero(3);
        f.set_t(2, Cx::new(Real::ONE / int(7), real(0.25)));
        f.set_t(0, Cx::from_real(real(0.5)));
        f.set_z(-3, Cx::new(real(-1.5), Real::ONE / int(11)));
        let g = GroupMap::constant(GroupElement::diagonal(Real::ONE / int(5)))
            .then(&GroupMap::morphism(-3))
            .then(&GroupMap::exp(f.clone()).unwrap());
        let text = serde_json::to_string(&GroupMapJson::from(&g)).unwrap();
        let back: GroupMapJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.value().unwrap(), g);
        assert_eq!(AlgebraMapJson::from(&f).value().unwrap(), f);
    }
}
