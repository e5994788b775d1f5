//! The normal-form ledger of a scheme run and what can be read from it:
//! reducibility evidence, pairwise classification, and the inverse
//! direction (building cocycles with a prescribed ledger).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::arithmetic::{check_dc_alpha, DiophantineReport, RotationNumber};
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::fourier::GroupMap;
use crate::kam::{detect_resonance, next_constant, KamParams, SchemeTrace};
use crate::real::{centered_frac, int, max_real, pi, real, tau, to_f64, Cx, Real};
use crate::su2::{diagonalize, log_group, AlgebraElement, GroupElement};

#[derive(Clone, Debug, PartialEq)]
pub struct ResonantStep {
    /// Scheme step (1-based).
    pub n: usize,
    /// `N_n` at that step.
    pub big_n: i64,
    pub k: i64,
    /// Distance to exact resonance in turns, including the absorbed mean
    /// `F̂_t(0)/2π`.
    pub eps: Real,
    pub amp: Real,
    /// In `[0, 2π)`.
    pub phi: Real,
    pub theta: Real,
    /// The previous resonance had odd `k` and its periodicity restore
    /// rotated the frame this phase is measured in.
    pub after_c_fix: bool,
    /// `N_{n−1} < |k| ≤ N_n`.
    pub in_window: bool,
}

#[derive(Clone, Debug)]
pub struct NormalFormLedger {
    pub alpha: RotationNumber,
    /// `N_1, …, N_horizon`.
    pub schedule: Vec<i64>,
    pub steps: Vec<ResonantStep>,
    /// Close-to-identity part of the total conjugation.
    pub d: GroupMap,
    /// Far part: the product of the diagonalising constants, `B_i` and `C_i`.
    pub far: GroupMap,
    pub horizon: usize,
    pub final_constant: GroupElement,
    /// Largest `‖log D‖₀` seen while assembling `D`.
    pub d_log_norm: Real,
    /// `‖F‖₀` left at the horizon.
    pub final_eps: Real,
    /// The perturbation fell below the precision floor before the horizon,
    /// so no later resonance can show up at working precision.
    pub exhausted: bool,
    /// `‖F‖` left at the horizon plus the last `‖Y‖₀`.
    pub tail_bound: Real,
    /// Grid residual of `H(x+α)·A(x)·H(x)⁻¹ = A'·e^{F'(x)}`.
    pub verification: Real,
}

impl NormalFormLedger {
    pub fn thetas(&self) -> Vec<Real> {
        self.steps.iter().map(|s| s.theta).collect()
    }

    /// `N_{n−1}` for the step preceding resonance `i` (0-based), or 1.
    fn previous_scale(&self, i: usize) -> Real {
        if i == 0 {
            return Real::ONE;
        }
        int(self.steps[i - 1].big_n)
    }
}

/// `arctan(amp/|eps|)`; `π/2` at `eps = 0` and `0` at `amp = 0`.
pub fn angle(amp: Real, eps: Real) -> Real {
    if amp.eq_zero() {
        Real::ZERO
    } else if eps.eq_zero() {
        pi().div2()
    } else {
        (amp / eps.abs()).atan()
    }
}

fn arg_01(c: Cx) -> Real {
    let a = c.arg();
    if a < Real::ZERO {
        a + tau()
    } else {
        a
    }
}

fn grid_points(m: usize) -> impl Iterator<Item = Real> {
    (0..m).map(move |j| int(j as i64) / int(m as i64))
}

/// Far factor of one step: `[C]·[B]·D`.
fn far_part(step: &crate::kam::KamStepResult) -> GroupMap {
    let mut g = GroupMap::identity();
    if let Some(dp) = step.c_fix {
        g = GroupMap::constant(dp.inverse())
            .then(&GroupMap::morphism(1))
            .then(&GroupMap::constant(dp));
    }
    if let Some(k) = step.b {
        g = g.then(&GroupMap::morphism(-k));
    }
    g.then(&GroupMap::constant(step.d))
}

/// Reads the ledger from a run and splits `H_n = far·D`.
pub fn extract(trace: &SchemeTrace) -> Result<NormalFormLedger> {
    let schedule: Vec<i64> = trace
        .params
        .schedule(trace.steps.len())
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let probe = 64usize;
    let mut far = GroupMap::identity();
    let mut h = GroupMap::identity();
    let mut d_log_norm = Real::ZERO;
    let mut steps = Vec::new();
    let mut last_c_fix = false;
    for step in &trace.steps {
        far = far_part(step).then(&far).compact();
        h = step.g.then(&h).compact();
        let d = far.inverse().then(&h);
        for x in grid_points(probe) {
            let l = log_group(&d.evaluate(x))?;
            d_log_norm = max_real(d_log_norm, l.norm());
        }
        if d_log_norm >= Real::ONE {
            return Err(Error::EstimateViolation(format!(
                "‖log D‖₀ = {:.3e} left the close-to-identity class at step {}",
                to_f64(d_log_norm),
                step.n
            )));
        }
        if let Some(res) = &step.resonance {
            let eps = res.eps1 + step.obstruction.t / tau();
            let amp = step.obstruction.u.abs();
            let prev = if step.n >= 2 { schedule[step.n - 2] } else { 0 };
            steps.push(ResonantStep {
                n: step.n,
                big_n: step.big_n,
                k: res.k1,
                eps,
                amp,
                phi: arg_01(step.obstruction.u),
                theta: angle(amp, eps),
                after_c_fix: last_c_fix,
                in_window: prev < res.k1.abs() && res.k1.abs() <= step.big_n,
            });
            last_c_fix = step.c_fix.is_some();
        }
    }
    let (final_constant, f_final) = trace.final_state();
    let eps_entry = trace.f1.wiener_norm(0);
    let eps_final = f_final.wiener_norm(0);
    if !trace.steps.is_empty() && eps_final > eps_entry && eps_final > trace.params.epsilon_floor()
    {
        return Err(Error::EstimateViolation(format!(
            "perturbation grew from {:.3e} to {:.3e} over the run",
            to_f64(eps_entry),
            to_f64(eps_final)
        )));
    }
    let tail_bound = eps_final + trace.steps.last().map_or(Real::ZERO, |s| s.norms.y_h[0]);

    let alpha_v = trace.alpha.value();
    let h_shift = h.shifted(alpha_v);
    let mut verification = Real::ZERO;
    for x in grid_points(probe) {
        let lhs = h_shift.evaluate(x) * trace.cocycle.evaluate(x) * h.evaluate(x).inverse();
        let rhs = final_constant * crate::su2::exp_alg(&f_final.evaluate(x));
        verification = max_real(verification, lhs.distance(&rhs));
    }
    let d = far.inverse().then(&h);
    Ok(NormalFormLedger {
        alpha: trace.alpha.clone(),
        schedule,
        steps,
        d,
        far,
        horizon: trace.steps.len(),
        final_constant,
        d_log_norm,
        final_eps: eps_final,
        exhausted: trace.stop == crate::kam::StopReason::EpsilonUnderflow,
        tail_bound,
        verification,
    })
}

// ---------------------------------------------------------------- diagnosis

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// No resonance in the last `quiet_steps` steps: evidence of smooth
    /// reducibility.
    FinitelyResonant,
    /// Evidence of measurable reducibility.
    AngleSquareSummable,
    /// Evidence of weak mixing in the fibres.
    NotSummable,
}

#[derive(Clone, Debug)]
pub struct DiagnoseOptions {
    pub sigmas: Vec<f64>,
    pub quiet_steps: usize,
    /// Power-law exponent above which `θ_i²` is called summable.
    pub critical_exponent: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            sigmas: vec![0.0, 1.0, 2.0],
            quiet_steps: 5,
            critical_exponent: 1.5,
            gamma: 3.0,
            tau: 2.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaEvidence {
    pub sigma: f64,
    /// Partial sums of `(N_{n_i}^σ θ_i)²`.
    pub sums: Vec<f64>,
    /// Fitted `p` in `term_i ≈ C·i^{−p}`, when at least two terms exist.
    pub exponent: Option<f64>,
    pub summable: bool,
}

#[derive(Clone, Debug)]
pub struct LimitEvidence {
    /// Rotation parameter of the constant reached at the horizon.
    pub a: f64,
    pub dc: DiophantineReport,
}

#[derive(Clone, Debug)]
pub struct Diagnosis {
    pub verdict: Verdict,
    /// Between 0 and 1; 0 when the rule had nothing to fit.
    pub confidence: f64,
    pub rule: String,
    pub partial_sums: Vec<f64>,
    pub h_sigma_sums: Vec<SigmaEvidence>,
    pub gap_sequence: Vec<usize>,
    pub limit: Option<LimitEvidence>,
}

/// Least-squares slope of `ln term_i` against `ln i`, negated.
fn decay_exponent(terms: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > 0.0 && t.is_finite())
        .map(|(i, t)| (libm::log((i + 1) as f64), libm::log(*t)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

fn partial(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

pub fn diagnose(ledger: &NormalFormLedger, opts: &DiagnoseOptions) -> Result<Diagnosis> {
    let thetas: Vec<f64> = ledger.steps.iter().map(|s| to_f64(s.theta)).collect();
    let squares: Vec<f64> = thetas.iter().map(|t| t * t).collect();
    let partial_sums = partial(&squares);
    let gap_sequence: Vec<usize> = ledger.steps.windows(2).map(|w| w[1].n - w[0].n).collect();
    let h_sigma_sums = opts
        .sigmas
        .iter()
        .map(|&sigma| {
            let terms: Vec<f64> = ledger
                .steps
                .iter()
                .zip(&thetas)
                .map(|(s, t)| {
                    let w = libm::pow(s.big_n as f64, sigma) * t;
                    w * w
                })
                .collect();
            let exponent = decay_exponent(&terms);
            SigmaEvidence {
                sigma,
                sums: partial(&terms),
                exponent,
                summable: exponent.map_or(true, |p| p > opts.critical_exponent),
            }
        })
        .collect();

    let last = ledger.steps.last().map_or(0, |s| s.n);
    let quiet = ledger.horizon.saturating_sub(last);
    let (verdict, confidence, rule, limit) = if quiet >= opts.quiet_steps || ledger.exhausted {
        let (_, a) = diagonalize(&ledger.final_constant);
        let horizon = ledger.schedule.last().copied().unwrap_or(1).max(1) as u64;
        let dc = check_dc_alpha(
            a.mul2(),
            &ledger.alpha,
            real(opts.gamma),
            real(opts.tau),
            horizon.min(1 << 16),
        )?;
        (
            Verdict::FinitelyResonant,
            if ledger.exhausted {
                1.0
            } else {
                (quiet as f64 / (2 * opts.quiet_steps) as f64).min(1.0)
            },
            if ledger.exhausted {
                format!(
                    "the perturbation vanished at working precision ({:.3e}) after the last resonance",
                    to_f64(ledger.final_eps)
                )
            } else {
                format!(
                    "no resonance in the last {quiet} steps (threshold {})",
                    opts.quiet_steps
                )
            },
            Some(LimitEvidence { a: to_f64(a), dc }),
        )
    } else {
        match decay_exponent(&squares) {
            Some(p) => {
                let verdict = if p > opts.critical_exponent {
                    Verdict::AngleSquareSummable
                } else {
                    Verdict::NotSummable
                };
                let confidence =
                    ((p - opts.critical_exponent).abs() / opts.critical_exponent).min(1.0);
                let rule = format!(
                    "θ_i² ≈ C·i^(−p) with fitted p = {p:.3}; summable when p > {}",
                    opts.critical_exponent
                );
                (verdict, confidence, rule, None)
            }
            None => (
                Verdict::AngleSquareSummable,
                0.0,
                String::from(
                    "fewer than two resonances and the run is not quiet: nothing to extrapolate",
                ),
                None,
            ),
        }
    };
    Ok(Diagnosis {
        verdict,
        confidence,
        rule,
        partial_sums,
        h_sigma_sums,
        gap_sequence,
        limit,
    })
}

// ----------------------------------------------------------- classification

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Inequivalent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ItemReport {
    pub item: u8,
    pub pass: bool,
    /// Worst `tolerance − deviation` (negative on failure).
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub verdict: Equivalence,
    pub items: Vec<ItemReport>,
    pub k_tilde: Vec<i64>,
    /// `Σ (|k̃_i|^s θ_{i−1})²` for each checked `s`.
    pub k_tilde_sums: Vec<(u32, f64)>,
    pub window_notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Tolerances are `N_{i−1}^{−σ*}`.
    pub sigma_star: f64,
    pub s_values: Vec<u32>,
    pub window_slack: f64,
    /// Resonant steps allowed to differ between the two ledgers.
    pub allowed_exceptions: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            sigma_star: 8.0,
            s_values: vec![1, 2, 4, 8],
            window_slack: 2.0,
            allowed_exceptions: 0,
        }
    }
}

fn circular_gap(a: Real, b: Real) -> Real {
    let d = centered_frac((a - b) / tau());
    d.abs() * tau()
}

pub fn classify_pair(
    l1: &NormalFormLedger,
    l2: &NormalFormLedger,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport> {
    if l1.alpha.value() != l2.alpha.value() {
        return Err(Error::Usage(
            "ledgers over different rotation numbers".into(),
        ));
    }
    let common = l1.schedule.len().min(l2.schedule.len());
    if l1.schedule[..common] != l2.schedule[..common] {
        return Err(Error::Usage("ledgers over different schedules".into()));
    }
    let within = |l: &NormalFormLedger| -> Vec<ResonantStep> {
        l.steps.iter().filter(|s| s.n <= common).cloned().collect()
    };
    let (s1, s2) = (within(l1), within(l2));

    let mut window_notes = Vec::new();
    for (tag, steps, l) in [("first", &s1, l1), ("second", &s2, l2)] {
        for s in steps.iter() {
            let lo = if s.n >= 2 {
                l.schedule[s.n - 2] as f64
            } else {
                0.0
            };
            let hi = s.big_n as f64;
            let k = s.k.unsigned_abs() as f64;
            if !s.in_window {
                let accepted = k > lo / opts.window_slack && k <= hi * opts.window_slack;
                window_notes.push(format!(
                    "{tag} ledger: k = {} at step {} outside ({lo}, {hi}]{}",
                    s.k,
                    s.n,
                    if accepted {
                        ", within slack"
                    } else {
                        ", beyond slack"
                    }
                ));
            }
        }
    }

    let n1: Vec<usize> = s1.iter().map(|s| s.n).collect();
    let n2: Vec<usize> = s2.iter().map(|s| s.n).collect();
    let exceptions = n1.iter().filter(|n| !n2.contains(n)).count()
        + n2.iter().filter(|n| !n1.contains(n)).count();
    let mut items = vec![ItemReport {
        item: 1,
        pass: exceptions <= opts.allowed_exceptions,
        margin: opts.allowed_exceptions as f64 - exceptions as f64,
        detail: format!(
            "{exceptions} resonant steps differ (allowed {})",
            opts.allowed_exceptions
        ),
    }];

    let pairs: Vec<(usize, &ResonantStep, &ResonantStep)> = s1
        .iter()
        .enumerate()
        .filter_map(|(i, a)| s2.iter().find(|b| b.n == a.n).map(|b| (i, a, b)))
        .collect();
    let tol = |i: usize| -> Real { (l1.previous_scale(i).ln() * real(-opts.sigma_star)).exp() };

    let mut theta_margin = f64::INFINITY;
    let mut eps_margin = f64::INFINITY;
    let mut phi_margin = f64::INFINITY;
    let mut k_tilde = Vec::new();
    let mut phi_skipped = 0;
    for &(i, a, b) in &pairs {
        let t = tol(i);
        theta_margin = theta_margin.min(to_f64(t - (a.theta - b.theta).abs()));
        k_tilde.push(a.k - b.k);
        // With a = kα/2 + ε the rotation parameters differ by k̃α/2 mod 1/2
        // exactly when the ε agree mod 1/2.
        let de = centered_frac((a.eps - b.eps).mul2()).abs().div2();
        eps_margin = eps_margin.min(to_f64(t - de));
        if a.after_c_fix || b.after_c_fix {
            phi_skipped += 1;
        } else {
            phi_margin = phi_margin.min(to_f64(t - circular_gap(a.phi, b.phi)));
        }
    }
    let thetas: Vec<f64> = pairs.iter().map(|(_, a, _)| to_f64(a.theta)).collect();
    let k_tilde_sums: Vec<(u32, f64)> = opts
        .s_values
        .iter()
        .map(|&s| {
            let total = k_tilde
                .iter()
                .enumerate()
                .map(|(i, k)| {
                    let prev = if i == 0 { 1.0 } else { thetas[i - 1] };
                    let w = libm::pow(k.unsigned_abs() as f64, s as f64) * prev;
                    w * w
                })
                .sum();
            (s, total)
        })
        .collect();
    items.push(ItemReport {
        item: 2,
        pass: theta_margin >= 0.0,
        margin: theta_margin,
        detail: format!("angles compared on {} common resonant steps", pairs.len()),
    });
    items.push(ItemReport {
        item: 3,
        pass: eps_margin >= 0.0 && k_tilde_sums.iter().all(|(_, v)| v.is_finite()),
        margin: eps_margin,
        detail: format!("k̃ = {k_tilde:?}"),
    });
    items.push(ItemReport {
        item: 4,
        pass: phi_margin >= 0.0,
        margin: phi_margin,
        detail: format!("{phi_skipped} steps skipped after a periodicity restore"),
    });
    let verdict = if items.iter().all(|i| i.pass) {
        if pairs.is_empty() && (s1.len() + s2.len()) > 0 {
            Equivalence::Inconclusive
        } else {
            Equivalence::Equivalent
        }
    } else {
        Equivalence::Inequivalent
    };
    Ok(ClassificationReport {
        verdict,
        items,
        k_tilde,
        k_tilde_sums,
        window_notes,
    })
}

// ----------------------------------------------------------------- synthesis

#[derive(Clone, Debug, PartialEq)]
pub struct PlantStep {
    pub n: usize,
    pub k: i64,
    pub eps: Real,
    pub amp: Real,
    pub phi: Real,
}

impl PlantStep {
    pub fn theta(&self) -> Real {
        angle(self.amp, self.eps)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plant {
    pub steps: Vec<PlantStep>,
}

impl Plant {
    pub fn from_ledger(l: &NormalFormLedger) -> Self {
        Plant {
            steps: l
                .steps
                .iter()
                .map(|s| PlantStep {
                    n: s.n,
                    k: s.k,
                    eps: s.eps,
                    amp: s.amp,
                    phi: s.phi,
                })
                .collect(),
        }
    }
}

/// Reduces `x` into `(−1/4, 1/4]` modulo `1/2`.
fn reduce_half(x: Real) -> Real {
    x - x.mul2().round().div2()
}

/// Representative of `kα/2 + ε` in `[0, 1/2)` modulo `1/2`.
fn canonical_start(k: i64, eps: Real, alpha: Real) -> Real {
    let x = int(k) * alpha.div2() + eps;
    x - x.mul2().floor().div2()
}

struct Forward {
    /// Conjugation of each step, without the close-to-identity part.
    gs: Vec<GroupMap>,
    final_constant: GroupElement,
    t0: Vec<Real>,
}

fn forward_pass(plant: &Plant, alpha: &RotationNumber, params: &KamParams) -> Result<Forward> {
    let last = plant.steps.last().map_or(0, |s| s.n);
    let schedule = params.schedule(last);
    let av = alpha.value();
    let first = &plant.steps[0];
    let mut a_const = GroupElement::diagonal(canonical_start(first.k, first.eps, av));
    let mut gs = Vec::with_capacity(last);
    let mut t0 = Vec::with_capacity(plant.steps.len());
    let mut planted = plant.steps.iter().peekable();
    for (idx, &(n, k_big)) in schedule.iter().enumerate() {
        let step = idx + 1;
        let (d, a) = diagonalize(&a_const);
        let found = detect_resonance(a, alpha, n, k_big).map_err(|e| match e {
            Error::NonUniqueResonance { first, second } => Error::Refused(format!(
                "step {step}: resonances {first} and {second} share a window"
            )),
            other => other,
        })?;
        let here = planted.next_if(|p| p.n == step);
        let (obstruction, k1) = match (here, found) {
            (Some(p), Some(r)) if r.k1 == p.k => {
                let t = (p.eps - r.eps1) * tau();
                t0.push(t);
                (
                    AlgebraElement::new(t, Cx::from_polar(p.amp, p.phi)),
                    Some(p.k),
                )
            }
            (Some(p), found) => {
                return Err(Error::Refused(format!(
                    "step {step}: planted k = {} but the scan finds {:?}",
                    p.k,
                    found.map(|r| r.k1)
                )))
            }
            (None, Some(r)) => {
                return Err(Error::Refused(format!(
                    "step {step}: unplanted resonance at k = {}",
                    r.k1
                )))
            }
            (None, None) => (AlgebraElement::ZERO, None),
        };
        let (a_next, far, _) = next_constant(a, k1, &obstruction, av);
        gs.push(far.then(&GroupMap::constant(d)));
        a_const = a_next;
    }
    Ok(Forward {
        gs,
        final_constant: a_const,
        t0,
    })
}

/// Checks ordering, schedule windows and the scheme's smallness condition
/// for the perturbation still pending at each step.
fn validate_plant(plant: &Plant, params: &KamParams, t0: Option<&[Real]>) -> Result<()> {
    let last = plant.steps.last().map_or(0, |s| s.n);
    if last > params.max_steps {
        return Err(Error::Refused(format!(
            "planted step {last} beyond max_steps = {}",
            params.max_steps
        )));
    }
    let schedule = params.schedule(last);
    let mut prev_n = 0;
    for s in &plant.steps {
        if s.n <= prev_n {
            return Err(Error::Refused(format!(
                "planted steps must increase (step {})",
                s.n
            )));
        }
        prev_n = s.n;
        let lo = if s.n >= 2 { schedule[s.n - 2].0 } else { 0 };
        let hi = schedule[s.n - 1].0;
        if !(lo < s.k.abs() && s.k.abs() <= hi) {
            return Err(Error::Refused(format!(
                "step {}: |k| = {} outside the window ({lo}, {hi}]",
                s.n,
                s.k.abs()
            )));
        }
        if s.amp < Real::ZERO {
            return Err(Error::Refused(format!("step {}: negative amplitude", s.n)));
        }
    }
    if let Some(t0) = t0 {
        for (idx, &(n, k_big)) in schedule.iter().enumerate() {
            let pending: Real = plant
                .steps
                .iter()
                .zip(t0)
                .filter(|(s, _)| s.n > idx)
                .fold(Real::ZERO, |acc, (s, t)| acc + s.amp + t.abs());
            let small = real(params.c0) * k_big * int(n).powi(params.s0 as i32) * pending;
            if small >= Real::ONE {
                return Err(Error::Refused(format!(
                    "step {}: c₀·K·N^s₀·ε = {:.3e} ≥ 1 for the pending planted modes",
                    idx + 1,
                    to_f64(small)
                )));
            }
        }
    }
    Ok(())
}

/// Builds `(α, A(·))` whose scheme run meets exactly the planted
/// resonances: the constants are simulated forward with the same reduction
/// rules as [`crate::kam::kam_step`], then the far conjugations are undone
/// backward.
pub fn synthesize(plant: &Plant, alpha: &RotationNumber, params: &KamParams) -> Result<Cocycle> {
    if plant.steps.is_empty() {
        return Ok(Cocycle::constant(alpha.clone(), GroupElement::IDENTITY));
    }
    params.validate()?;
    validate_plant(plant, params, None)?;
    let fwd = forward_pass(plant, alpha, params)?;
    validate_plant(plant, params, Some(&fwd.t0))?;
    let av = alpha.value();
    let mut gamma = GroupMap::constant(fwd.final_constant);
    for g in fwd.gs.iter().rev() {
        gamma = g.shifted(av).inverse().then(&gamma).then(g).compact();
    }
    Cocycle::new(alpha.clone(), gamma)
}

/// A plant given by its angles and phases; magnitudes are solved for.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignStep {
    pub n: usize,
    pub k: i64,
    pub theta: Real,
    pub phi: Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSpec {
    pub steps: Vec<DesignStep>,
    /// `ε` of the last resonance; earlier ones are fixed by the next `k`.
    pub last_eps: Real,
}

impl DesignSpec {
    pub fn from_ledger(l: &NormalFormLedger) -> Self {
        DesignSpec {
            steps: l
                .steps
                .iter()
                .map(|s| DesignStep {
                    n: s.n,
                    k: s.k,
                    theta: s.theta,
                    phi: s.phi,
                })
                .collect(),
            last_eps: l.steps.last().map_or(Real::ZERO, |s| s.eps),
        }
    }
}

fn polar_step(d: &DesignStep, r: Real) -> PlantStep {
    PlantStep {
        n: d.n,
        k: d.k,
        eps: r * d.theta.cos(),
        amp: r * d.theta.sin(),
        phi: d.phi,
    }
}

/// `ε` seen at the next resonance when step `p` is followed by the
/// nonresonant steps up to it.
fn next_eps(p: &PlantStep, next_k: i64, alpha: Real) -> Real {
    let a = canonical_start(p.k, p.eps, alpha);
    let obstruction = AlgebraElement::new(Real::ZERO, Cx::from_polar(p.amp, p.phi));
    let (a_next, _, _) = next_constant(a, Some(p.k), &obstruction, alpha);
    let (_, a2) = diagonalize(&a_next);
    reduce_half(a2 - int(next_k) * alpha.div2())
}

/// Solves for the magnitudes `r_i` (with `ε_i = r cos θ_i`,
/// `amp_i = r sin θ_i`) so that each resonance leaves behind exactly the
/// rotation the next planted one needs. Only `last_eps` is free.
pub fn design_plant(spec: &DesignSpec, alpha: &RotationNumber) -> Result<Plant> {
    let count = spec.steps.len();
    if count == 0 {
        return Ok(Plant::default());
    }
    let av = alpha.value();
    let last = &spec.steps[count - 1];
    let mut out = vec![
        PlantStep {
            n: 0,
            k: 0,
            eps: Real::ZERO,
            amp: Real::ZERO,
            phi: Real::ZERO
        };
        count
    ];
    out[count - 1] = PlantStep {
        n: last.n,
        k: last.k,
        eps: spec.last_eps,
        amp: spec.last_eps.abs() * last.theta.tan(),
        phi: last.phi,
    };
    if last.theta >= pi().div2() {
        return Err(Error::Usage(
            "the last angle must be below π/2 when its ε is prescribed".into(),
        ));
    }
    for i in (0..count - 1).rev() {
        let target = out[i + 1].eps;
        let next_k = spec.steps[i + 1].k;
        let h = |r: Real| next_eps(&polar_step(&spec.steps[i], r), next_k, av) - target;
        let grid: Vec<Real> = (0..=240)
            .map(|j| (real(-92.0 + 0.38 * j as f64)).exp())
            .collect();
        let mut found = None;
        for w in grid.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (hl, hh) = (h(lo), h(hi));
            if (hl <= Real::ZERO) == (hh <= Real::ZERO) {
                continue;
            }
            let (mut lo, mut hi, mut hl) = (lo, hi, hl);
            for _ in 0..260 {
                let mid = (lo + hi).div2();
                let hm = h(mid);
                if (hm <= Real::ZERO) == (hl <= Real::ZERO) {
                    lo = mid;
                    hl = hm;
                } else {
                    hi = mid;
                }
            }
            // A jump of the reduction modulo 1/2 also changes sign; skip it.
            if h(lo).abs() < real(1e-60) {
                found = Some(lo);
                break;
            }
        }
        let r = found.ok_or_else(|| {
            Error::Refused(format!(
                "no magnitude at step {} leaves ε = {:.3e} at k = {next_k}",
                spec.steps[i].n,
                to_f64(target)
            ))
        })?;
        out[i] = polar_step(&spec.steps[i], r);
    }
    Ok(Plant { steps: out })
}

/// Point of the dyadic path from `source` (t = 0) to `target` (t = 1): on
/// `[1 − 2^{1−i}, 1 − 2^{−i}]` steps before `i` follow the target, step `i`
/// is interpolated and later steps follow the source.
pub fn deform_spec(source: &DesignSpec, target: &DesignSpec, t: Real) -> Result<DesignSpec> {
    if source.steps.len() != target.steps.len() {
        return Err(Error::Usage(
            "deformation needs ledgers with the same number of resonances".into(),
        ));
    }
    if t < Real::ZERO || t > Real::ONE {
        return Err(Error::Usage("t must lie in [0, 1]".into()));
    }
    let count = source.steps.len();
    if t == Real::ONE || count == 0 {
        return Ok(target.clone());
    }
    // Interval index i ≥ 1 with 1 − 2^{1−i} ≤ t < 1 − 2^{−i}.
    let mut i = 1usize;
    let mut left = Real::ZERO;
    let mut width = Real::ONE.div2();
    while t >= left + width {
        left += width;
        width = width.div2();
        i += 1;
    }
    let s = (t - left) / width;
    let mut steps = Vec::with_capacity(count);
    for (j, (a, b)) in source.steps.iter().zip(&target.steps).enumerate() {
        let step = match (j + 1).cmp(&i) {
            core::cmp::Ordering::Less => b.clone(),
            core::cmp::Ordering::Greater => a.clone(),
            core::cmp::Ordering::Equal => DesignStep {
                n: a.n,
                k: a.k,
                theta: a.theta + (b.theta - a.theta) * s,
                phi: a.phi + centered_frac((b.phi - a.phi) / tau()) * tau() * s,
            },
        };
        steps.push(step);
    }
    let last_eps = match count.cmp(&i) {
        core::cmp::Ordering::Less => target.last_eps,
        core::cmp::Ordering::Greater => source.last_eps,
        core::cmp::Ordering::Equal => source.last_eps + (target.last_eps - source.last_eps) * s,
    };
    Ok(DesignSpec { steps, last_eps })
}

/// `synthesize` along the dyadic path between two ledgers.
pub fn deform(
    source: &NormalFormLedger,
    target: &NormalFormLedger,
    t: Real,
    params: &KamParams,
) -> Result<Cocycle> {
    if source.alpha.value() != target.alpha.value() {
        return Err(Error::Usage(
            "ledgers over different rotation numbers".into(),
        ));
    }
    let spec = deform_spec(
        &DesignSpec::from_ledger(source),
        &DesignSpec::from_ledger(target),
        t,
    )?;
    synthesize(&design_plant(&spec, &source.alpha)?, &source.alpha, params)
}

/// `sup_x d(A(x), B(x))` on an `m`-point grid.
pub fn cocycle_distance(a: &Cocycle, b: &Cocycle, m: usize) -> Real {
    grid_points(m).fold(Real::ZERO, |acc, x| {
        max_real(acc, a.evaluate(x).distance(&b.evaluate(x)))
    })
}
