//! Stages of an experiment, each writing its own files.

use std::path::Path;

use cocycle_core::arithmetic::{DiophantineReport, RotationNumber};
use cocycle_core::cocycle::{correlation_trace, Cocycle, Observable};
use cocycle_core::fourier::{AlgebraMap, GroupMap};
use cocycle_core::harmonics::{
    circle_grid, eigen_search_in, lemma_eigenvalues, Convention, HarmonicIndex,
};
use cocycle_core::kam::{run_scheme, KamParams, SchemeTrace, StopReason};
use cocycle_core::normal_form::{
    classify_pair, design_plant, diagnose, extract, synthesize, ClassificationReport, DesignSpec,
    DesignStep, Diagnosis, Equivalence, NormalFormLedger, Plant, PlantStep, Verdict,
};
use cocycle_core::real::{real, to_f64};
use cocycle_core::su2::GroupElement;
use cocycle_core::{Cx, Error as CoreError, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{CocycleSpec, CorrelationConfig, EigenConfig, ExperimentConfig, PlantSpec};
use crate::error::{LabError, LabResult};
use crate::output::{OutputDir, Stamp};
use crate::serial::{self, CocycleJson, LedgerJson, RealText, TraceJson};

pub struct Session {
    pub cfg: ExperimentConfig,
    pub alpha: RotationNumber,
    pub params: KamParams,
    pub out: OutputDir,
    pub trace_name: String,
}

impl Session {
    pub fn new(cfg: ExperimentConfig, out_root: &Path) -> LabResult<Self> {
        let alpha = cfg.rotation_number()?;
        let params = cfg.kam.params();
        params.validate()?;
        let stamp = Stamp {
            config_hash: cfg.hash(),
            precision_bits: params.precision_bits,
            seed: cfg.seed,
        };
        let out = OutputDir::create(out_root, stamp)?;
        Ok(Session {
            cfg,
            alpha,
            params,
            out,
            trace_name: "trace.json".into(),
        })
    }

    /// The plant named in the configuration, with designed magnitudes solved.
    pub fn plant(&self) -> LabResult<Option<Plant>> {
        let Some(spec) = &self.cfg.plant else {
            return Ok(None);
        };
        let plant = match spec {
            PlantSpec::Explicit { steps } => Plant {
                steps: steps
                    .iter()
                    .map(|s| PlantStep {
                        n: s.n,
                        k: s.k,
                        eps: real(s.eps),
                        amp: real(s.amp),
                        phi: real(s.phi),
                    })
                    .collect(),
            },
            PlantSpec::Designed { design, last_eps } => {
                let spec = DesignSpec {
                    steps: design
                        .iter()
                        .map(|s| DesignStep {
                            n: s.n,
                            k: s.k,
                            theta: real(s.theta),
                            phi: real(s.phi),
                        })
                        .collect(),
                    last_eps: real(*last_eps),
                };
                design_plant(&spec, &self.alpha)?
            }
        };
        Ok(Some(plant))
    }

    /// Input cocycle: synthesised from the plant if there is one, else built
    /// from the `cocycle` section.
    pub fn cocycle(&mut self) -> LabResult<Cocycle> {
        let c = match (self.plant()?, &self.cfg.cocycle) {
            (Some(plant), _) => {
                self.out.json("plant.json", &serial::plant_json(&plant))?;
                synthesize(&plant, &self.alpha, &self.params)?
            }
            (None, Some(spec)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                build_cocycle(spec, &self.alpha, &mut rng)?
            }
            (None, None) => {
                return Err(LabError::Config(
                    "the configuration names neither a plant nor a cocycle".into(),
                ));
            }
        };
        self.out
            .json("cocycle.json", &CocycleJson::new(&self.cfg.alpha, &c))?;
        Ok(c)
    }

    pub fn load_cocycle(&self, path: &Path) -> LabResult<Cocycle> {
        read_json::<CocycleJson>(path)?.value()
    }

    /// Runs the scheme and writes the trace, whatever the stop reason.
    pub fn scheme(&mut self, c: &Cocycle) -> LabResult<SchemeTrace> {
        let trace = run_scheme(c, &self.params)?;
        let name = self.trace_name.clone();
        self.out
            .json(&name, &TraceJson::new(&self.cfg.alpha, &trace))?;
        let rows: Vec<TraceRow> = trace
            .steps
            .iter()
            .map(|s| TraceRow {
                n: s.n,
                big_n: s.big_n,
                big_k: to_f64(s.big_k),
                eps0: to_f64(s.norms.eps0),
                eps_next0: to_f64(s.norms.eps_next0),
                k1: s.resonance.as_ref().map(|r| r.k1),
                residual: to_f64(s.residual),
            })
            .collect();
        self.out.csv(
            "trace.csv",
            &["n", "N_n", "K_n", "eps0", "eps_next0", "k1", "residual"],
            &rows,
        )?;
        Ok(trace)
    }

    pub fn ledger(&mut self, trace: &SchemeTrace) -> LabResult<NormalFormLedger> {
        let ledger = extract(trace)?;
        self.write_ledger(&ledger)?;
        Ok(ledger)
    }

    pub fn write_ledger(&mut self, ledger: &NormalFormLedger) -> LabResult<()> {
        self.out
            .json("ledger.json", &LedgerJson::new(&self.cfg.alpha, ledger))?;
        let rows: Vec<LedgerRow> = ledger
            .steps
            .iter()
            .map(|s| LedgerRow {
                n: s.n,
                big_n: s.big_n,
                k: s.k,
                eps: to_f64(s.eps),
                amp: to_f64(s.amp),
                phi: to_f64(s.phi),
                theta: to_f64(s.theta),
            })
            .collect();
        self.out.csv(
            "ledger.csv",
            &["n", "N", "k", "eps", "amp", "phi", "theta"],
            &rows,
        )?;
        Ok(())
    }

    pub fn diagnose(&mut self, ledger: &NormalFormLedger) -> LabResult<Diagnosis> {
        let d = diagnose(ledger, &self.cfg.analysis.diagnose_options())?;
        self.out.json("diagnosis.json", &DiagnosisJson::from(&d))?;
        Ok(d)
    }

    pub fn classify(
        &mut self,
        l1: &NormalFormLedger,
        l2: &NormalFormLedger,
    ) -> LabResult<ClassificationReport> {
        let r = classify_pair(l1, l2, &self.cfg.analysis.classify_options())?;
        self.out
            .json("classification.json", &ClassificationJson::from(&r))?;
        Ok(r)
    }

    /// `σ_min(U_N − λ)` at the eigenvalues predicted from `a` plus a circle
    /// grid.
    pub fn eigen(&mut self, c: &Cocycle, a: Real, e: &EigenConfig) -> LabResult<()> {
        let mut seeds = lemma_eigenvalues(self.alpha.value(), a, e.m, e.n_trunc);
        let convention = if e.inverse {
            seeds.iter_mut().for_each(|l| *l = l.conj());
            Convention::Inverse
        } else {
            Convention::Literal
        };
        let mut lambdas = seeds.clone();
        lambdas.extend(circle_grid(e.circle));
        let evidence = eigen_search_in(c, e.m, e.n_trunc, &lambdas, convention)?;
        let rows: Vec<EigenRow> = evidence
            .iter()
            .enumerate()
            .map(|(i, ev)| {
                let (re, im) = ev.lambda.to_f64();
                EigenRow {
                    lambda_re: re,
                    lambda_im: im,
                    sigma_min: to_f64(ev.sigma_min),
                    seeded: i < seeds.len(),
                }
            })
            .collect();
        self.out.csv(
            "eigen.csv",
            &["lambda_re", "lambda_im", "sigma_min", "seeded"],
            &rows,
        )?;
        let min_over = |pick: bool| {
            evidence
                .iter()
                .zip(&rows)
                .filter(|(_, r)| r.seeded == pick)
                .map(|(ev, _)| ev.sigma_min)
                .fold(None, |acc: Option<Real>, s| {
                    Some(acc.map_or(s, |a| if s < a { s } else { a }))
                })
                .map(RealText::from)
        };
        let summary = EigenSummary {
            m: e.m,
            n_trunc: e.n_trunc,
            a: a.into(),
            seeds: seeds.len(),
            circle: e.circle,
            inverse: e.inverse,
            min_sigma_seeded: min_over(true),
            max_sigma_seeded: evidence[..seeds.len()]
                .iter()
                .map(|ev| ev.sigma_min)
                .fold(None, |acc: Option<Real>, s| {
                    Some(acc.map_or(s, |a| if s > a { s } else { a }))
                })
                .map(RealText::from),
            min_sigma_circle: min_over(false),
        };
        self.out.json("eigen.json", &summary)?;
        Ok(())
    }

    pub fn correlation(&mut self, c: &Cocycle, corr: &CorrelationConfig) -> LabResult<()> {
        let f = Observable {
            k: corr.k,
            index: HarmonicIndex::new(corr.m, corr.j, corr.p)?,
        };
        let g = match corr.g {
            Some([k, j, p]) => Observable {
                k,
                index: HarmonicIndex::new(corr.m, j as usize, p as usize)?,
            },
            None => f,
        };
        let trace = correlation_trace(c, f, g, corr.length, corr.quadrature)?;
        let rows: Vec<(usize, f64, f64, f64)> = trace
            .inner
            .iter()
            .zip(&trace.cesaro)
            .enumerate()
            .map(|(i, (v, cn))| (i + 1, v.re, v.im, *cn))
            .collect();
        self.out
            .csv("correlation.csv", &["n", "re", "im", "C_n"], &rows)?;
        Ok(())
    }
}

/// Rotation parameter of the constant a trace ends on.
pub fn final_rotation(trace: &SchemeTrace) -> Real {
    trace.final_state().0.diagonalize().1
}

/// Maps a stop that cut the scheme short to the error reported once the
/// partial outputs are on disk.
pub fn stop_error(trace: &SchemeTrace) -> Option<LabError> {
    match &trace.stop {
        StopReason::MaxSteps | StopReason::EpsilonUnderflow => None,
        StopReason::EstimateViolation(m) => Some(LabError::EstimateViolation(m.clone())),
        StopReason::Refused(m) => Some(CoreError::Refused(m.clone()).into()),
        StopReason::Bandwidth(m) | StopReason::Precision(m) => {
            Some(CoreError::Precision(m.clone()).into())
        }
    }
}

/// The whole chain: cocycle, scheme, ledger, diagnosis, then the optional
/// spectral and correlation stages.
pub fn run_pipeline(session: &mut Session, cocycle: Option<Cocycle>) -> LabResult<()> {
    let c = match cocycle {
        Some(c) => c,
        None => session.cocycle()?,
    };
    let trace = session.scheme(&c)?;
    let ledger = session.ledger(&trace)?;
    session.diagnose(&ledger)?;
    if let Some(e) = stop_error(&trace) {
        return Err(e);
    }
    if let Some(e) = session.cfg.analysis.eigen.clone() {
        session.eigen(&c, final_rotation(&trace), &e)?;
    }
    if let Some(corr) = session.cfg.analysis.correlation.clone() {
        session.correlation(&c, &corr)?;
    }
    Ok(())
}

pub fn build_cocycle(
    spec: &CocycleSpec,
    alpha: &RotationNumber,
    rng: &mut impl Rng,
) -> LabResult<Cocycle> {
    let a0 = match spec.constant {
        Some([zr, zi, wr, wi]) => {
            let g = GroupElement::new(Cx::from_f64(zr, zi), Cx::from_f64(wr, wi));
            if g.norm_sqr().eq_zero() {
                return Err(LabError::Config("the constant must be nonzero".into()));
            }
            g.renormalized()
        }
        None => GroupElement::diagonal(real(spec.a)),
    };
    let mut f = AlgebraMap::zero(0);
    for m in &spec.modes {
        if m.t != [0.0, 0.0] {
            let c = Cx::from_f64(m.t[0], m.t[1]);
            f.set_t(m.k.abs(), if m.k < 0 { c.conj() } else { c });
        }
        if m.z != [0.0, 0.0] {
            f.set_z(m.k, Cx::from_f64(m.z[0], m.z[1]));
        }
    }
    if let Some(r) = &spec.random {
        if r.band < 1 || r.norm < 0.0 {
            return Err(LabError::Config(
                "a random perturbation needs band ≥ 1 and a nonnegative norm".into(),
            ));
        }
        let mut draw = || Cx::from_f64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut g = AlgebraMap::zero(r.band);
        for k in 1..=r.band {
            g.set_t(k, draw());
        }
        for k in (-r.band..=r.band).filter(|&k| k != 0) {
            g.set_z(k, draw());
        }
        let scale = real(r.norm) / g.wiener_norm(0);
        f = f.add(&g.scale(scale));
    }
    let mut transfer = GroupMap::constant(a0);
    if !f.is_zero() {
        transfer = transfer.then(&GroupMap::exp(f)?);
    }
    Ok(Cocycle::new(alpha.clone(), transfer)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> LabResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    // Output files wrap their payload in a stamped envelope; bare payloads
    // are accepted too.
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|source| LabError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let payload = match v {
        serde_json::Value::Object(mut m)
            if m.contains_key("config_hash") && m.contains_key("data") =>
        {
            m.remove("data").unwrap()
        }
        other => other,
    };
    serde_json::from_value(payload).map_err(|source| LabError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_ledger(path: &Path) -> LabResult<NormalFormLedger> {
    read_json::<LedgerJson>(path)?.value()
}

#[derive(Serialize)]
struct TraceRow {
    n: usize,
    big_n: i64,
    big_k: f64,
    eps0: f64,
    eps_next0: f64,
    k1: Option<i64>,
    residual: f64,
}

#[derive(Serialize)]
struct LedgerRow {
    n: usize,
    big_n: i64,
    k: i64,
    eps: f64,
    amp: f64,
    phi: f64,
    theta: f64,
}

#[derive(Serialize)]
struct EigenRow {
    lambda_re: f64,
    lambda_im: f64,
    sigma_min: f64,
    seeded: bool,
}

#[derive(Serialize)]
struct EigenSummary {
    m: usize,
    n_trunc: i64,
    a: RealText,
    seeds: usize,
    circle: usize,
    inverse: bool,
    min_sigma_seeded: Option<RealText>,
    max_sigma_seeded: Option<RealText>,
    min_sigma_circle: Option<RealText>,
}

#[derive(Serialize)]
pub struct DcJson {
    pub gamma: RealText,
    pub tau: RealText,
    pub horizon: u64,
    pub worst_k: i64,
    pub worst_margin: RealText,
    pub holds: bool,
}

impl From<&DiophantineReport> for DcJson {
    fn from(r: &DiophantineReport) -> Self {
        DcJson {
            gamma: r.gamma.into(),
            tau: r.tau.into(),
            horizon: r.horizon,
            worst_k: r.worst_k,
            worst_margin: r.worst_margin.into(),
            holds: r.holds,
        }
    }
}

#[derive(Serialize)]
struct SigmaJson {
    sigma: f64,
    sums: Vec<f64>,
    exponent: Option<f64>,
    summable: bool,
}

#[derive(Serialize)]
struct LimitJson {
    a: f64,
    dc: DcJson,
}

#[derive(Serialize)]
pub struct DiagnosisJson {
    verdict: &'static str,
    confidence: f64,
    rule: String,
    partial_sums: Vec<f64>,
    h_sigma_sums: Vec<SigmaJson>,
    gap_sequence: Vec<usize>,
    limit: Option<LimitJson>,
}

impl From<&Diagnosis> for DiagnosisJson {
    fn from(d: &Diagnosis) -> Self {
        DiagnosisJson {
            verdict: match d.verdict {
                Verdict::FinitelyResonant => "finitely_resonant",
                Verdict::AngleSquareSummable => "angle_square_summable",
                Verdict::NotSummable => "not_summable",
            },
            confidence: d.confidence,
            rule: d.rule.clone(),
            partial_sums: d.partial_sums.clone(),
            h_sigma_sums: d
                .h_sigma_sums
                .iter()
                .map(|s| SigmaJson {
                    sigma: s.sigma,
                    sums: s.sums.clone(),
                    exponent: s.exponent,
                    summable: s.summable,
                })
                .collect(),
            gap_sequence: d.gap_sequence.clone(),
            limit: d.limit.as_ref().map(|l| LimitJson {
                a: l.a,
                dc: (&l.dc).into(),
            }),
        }
    }
}

#[derive(Serialize)]
struct ItemJson {
    item: u8,
    pass: bool,
    margin: f64,
    detail: String,
}

#[derive(Serialize)]
pub struct ClassificationJson {
    verdict: &'static str,
    items: Vec<ItemJson>,
    k_tilde: Vec<i64>,
    k_tilde_sums: Vec<(u32, f64)>,
    window_notes: Vec<String>,
}

pub fn equivalence_text(e: Equivalence) -> &'static str {
    match e {
        Equivalence::Equivalent => "equivalent",
        Equivalence::Inequivalent => "inequivalent",
        Equivalence::Inconclusive => "inconclusive",
    }
}

impl From<&ClassificationReport> for ClassificationJson {
    fn from(r: &ClassificationReport) -> Self {
        ClassificationJson {
            verdict: equivalence_text(r.verdict),
            items: r
                .items
                .iter()
                .map(|i| ItemJson {
                    item: i.item,
                    pass: i.pass,
                    margin: i.margin,
                    detail: i.detail.clone(),
                })
                .collect(),
            k_tilde: r.k_tilde.clone(),
            k_tilde_sums: r.k_tilde_sums.clone(),
            window_notes: r.window_notes.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ModeSpec, RandomPerturbation};

    #[test]
    fn seeded_perturbations_repeat_and_have_the_requested_norm() {
        let spec = CocycleSpec {
            a: 0.2,
            constant: None,
            modes: vec![ModeSpec {
                k: 1,
                t: [1e-6, 0.0],
                z: [0.0, 0.0],
            }],
            random: Some(RandomPerturbation {
                band: 3,
                norm: 1e-5,
            }),
        };
        let alpha = RotationNumber::golden_mean();
        let one = build_cocycle(&spec, &alpha, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let two = build_cocycle(&spec, &alpha, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let other = build_cocycle(&spec, &alpha, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(one.transfer(), two.transfer());
        assert_ne!(one.transfer(), other.transfer());
        let cocycle_core::fourier::GroupFactor::Exp(f) = &one.transfer().factors()[1] else {
            panic!()
        };
        // The random part has norm 1e-5; the explicit t-mode adds up to 2e-6.
        let w = to_f64(f.wiener_norm(0));
        assert!(w > 0.8e-5 && w < 1.2e-5, "{w}");
    }

    #[test]
    fn constant_spec_gives_constant_cocycle() {
        let spec = CocycleSpec {
            a: 0.3,
            constant: None,
            modes: vec![],
            random: None,
        };
        let c = build_cocycle(
            &spec,
            &RotationNumber::golden_mean(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(c.transfer().is_constant());
    }
}
