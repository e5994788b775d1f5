//! One step of the local conjugation lemma and its iteration.
//!
//! A step takes `A·e^{F(·)}` with `A` constant, conjugates it by
//! `G = [C]·[B]·e^{Y}·D` and returns `A'·e^{F'(·)}`. `D` diagonalises `A`,
//! `Y` solves the linearised equations on the non-resonant modes, `B` is the
//! torus morphism removing a resonance and `C` restores 1-periodicity when
//! the resonant frequency is odd. `F'` is recomputed exactly from the
//! conjugated product, never from an estimate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::arithmetic::RotationNumber;
use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::fourier::{transform_adaptive_grid, AlgebraMap, GridOptions, GroupMap, Lattice};
use crate::real::{centered_frac, int, max_real, real, tau, to_f64, Cx, Real};
use crate::su2::{diagonalize, exp_alg, log_group, AdMatrix, AlgebraElement, GroupElement};

/// Configuration of a scheme run. Exponents are plain doubles; the derived
/// `K_n` are computed and compared at working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct KamParams {
    pub n1: i64,
    pub sigma: f64,
    pub nu: f64,
    pub tau: f64,
    pub gamma: f64,
    pub s0: u32,
    pub c0: f64,
    /// The constant `C` in `K ≥ C·γ·N^τ`.
    pub c_schedule: f64,
    pub max_steps: usize,
    pub precision_bits: u32,
    /// Points of the grid on which each step's conjugation is verified.
    pub verify_grid: usize,
    /// Largest transform grid before a bandwidth refusal.
    pub max_grid: usize,
}

impl Default for KamParams {
    fn default() -> Self {
        KamParams {
            n1: 16,
            sigma: 0.5,
            nu: 3.75,
            tau: 2.5,
            gamma: 3.0,
            s0: 0,
            c0: 1.0,
            c_schedule: 1.0,
            max_steps: 8,
            precision_bits: crate::real::PRECISION_BITS,
            verify_grid: 1024,
            max_grid: 1 << 16,
        }
    }
}

impl KamParams {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 1 {
            return Err(Error::Usage("N₁ must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::Usage(format!(
                "σ = {} is outside (0, 1)",
                self.sigma
            )));
        }
        if self.nu <= self.tau {
            return Err(Error::Usage(format!(
                "ν = {} must exceed τ = {}",
                self.nu, self.tau
            )));
        }
        if self.precision_bits > crate::real::PRECISION_BITS || self.precision_bits < 64 {
            return Err(Error::Usage(format!(
                "precision {} bits unsupported (64..={})",
                self.precision_bits,
                crate::real::PRECISION_BITS
            )));
        }
        let n = self.n1 as f64;
        let (lhs, rhs) = (
            libm::pow(n, self.nu),
            self.c_schedule * self.gamma * libm::pow(n, self.tau),
        );
        if lhs < rhs {
            return Err(Error::Refused(format!(
                "N₁^ν = {lhs:.3e} is below C·γ·N₁^τ = {rhs:.3e}"
            )));
        }
        Ok(())
    }

    /// `N_{n+1} = round(N_n^{1+σ})`.
    pub fn next_truncation(&self, n: i64) -> i64 {
        libm::round(libm::pow(n as f64, 1.0 + self.sigma)) as i64
    }

    /// `(N_n, K_n)` for steps `1..=steps`.
    pub fn schedule(&self, steps: usize) -> Vec<(i64, Real)> {
        let mut out = Vec::with_capacity(steps);
        let mut n = self.n1;
        for _ in 0..steps {
            out.push((n, self.k_of(n)));
            n = self.next_truncation(n);
        }
        out
    }

    /// `K = N^ν`.
    pub fn k_of(&self, n: i64) -> Real {
        (int(n).ln() * real(self.nu)).exp()
    }

    /// Coefficients below this are dropped from re-expanded maps.
    pub fn coefficient_floor(&self) -> Real {
        Real::ONE.div_pow2(self.precision_bits.saturating_sub(16))
    }

    /// Perturbations this small end the run.
    pub fn epsilon_floor(&self) -> Real {
        Real::ONE.div_pow2(self.precision_bits * 4 / 5)
    }

    fn grid_options(&self) -> GridOptions {
        GridOptions {
            floor: self.coefficient_floor(),
            min_size: 64,
            max_size: self.max_grid,
        }
    }
}

/// A frequency that almost qualified as (or was excluded from being) the
/// resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearMiss {
    pub k: i64,
    pub distance: Real,
    /// `true` when `|k| > N` (resonant but outside the scanned range).
    pub outside_scan: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resonance {
    pub k1: i64,
    /// `a − k₁α/2` reduced into `(−1/4, 1/4]`.
    pub eps1: Real,
    /// `|||k₁α − 2a|||`.
    pub distance: Real,
    pub near_misses: Vec<NearMiss>,
}

/// Candidate `k` with `|||kα − 2a|||` possibly below `bound`, found with a
/// double-precision filter and confirmed at working precision.
fn scan(
    a: Real,
    alpha: &RotationNumber,
    ks: impl Iterator<Item = i64>,
    bound: Real,
) -> Vec<(i64, Real)> {
    let (af, two_a) = (to_f64(alpha.value()), to_f64(centered_frac(a.mul2())));
    let slack = to_f64(bound) + 1e-6;
    let mut out = Vec::new();
    for k in ks {
        let approx = k as f64 * af - two_a;
        if (approx - libm::round(approx)).abs() > slack {
            continue;
        }
        let (d, _) = alpha.dist_shifted(a.mul2(), k);
        if d <= bound {
            out.push((k, d));
        }
    }
    out
}

/// Looks for `|k| ≤ N` with `|||kα − 2a||| ≤ 1/K` (closed condition) and
/// checks that it is the only such `k` within `|k − k₁| ≤ 2N`. `k = 0` is
/// included: it is the resonance of `A` near `±Id`.
pub fn detect_resonance(
    a: Real,
    alpha: &RotationNumber,
    n: i64,
    k_big: Real,
) -> Result<Option<Resonance>> {
    let bound = k_big.recip();
    let hits = scan(a, alpha, -n..=n, bound);
    let Some(&(k1, distance)) = hits.iter().min_by(|x, y| crate::real::cmp_real(&x.1, &y.1)) else {
        return Ok(None);
    };
    let window = scan(a, alpha, (k1 - 2 * n)..=(k1 + 2 * n), bound);
    if let Some(&(other, _)) = window.iter().find(|(k, _)| *k != k1) {
        return Err(Error::NonUniqueResonance {
            first: k1,
            second: other,
        });
    }
    let mut near_misses: Vec<NearMiss> = scan(a, alpha, -n..=n, bound.mul2())
        .into_iter()
        .filter(|(_, d)| *d > bound)
        .map(|(k, d)| NearMiss {
            k,
            distance: d,
            outside_scan: false,
        })
        .collect();
    near_misses.extend(
        scan(a, alpha, (-2 * n..-n).chain(n + 1..=2 * n), bound)
            .into_iter()
            .map(|(k, d)| NearMiss {
                k,
                distance: d,
                outside_scan: true,
            }),
    );
    let eps = a - int(k1) * alpha.value().div2();
    let eps1 = eps - (eps.mul2()).round().div2();
    Ok(Some(Resonance {
        k1,
        eps1,
        distance,
        near_misses,
    }))
}

fn divisor(x: Real) -> Cx {
    Cx::turn(x) - Cx::ONE
}

/// `Ŷ_t(k) = −F̂_t(k)/(e^{2iπkα} − 1)` for `0 < |k| ≤ N`. With `dc = (γ, τ)`
/// each divisor is checked against `|||kα||| ≥ γ⁻¹|k|^{−τ}`.
pub fn solve_diagonal(
    f: &AlgebraMap,
    alpha: &RotationNumber,
    n: i64,
    dc: Option<(Real, Real)>,
) -> Result<AlgebraMap> {
    let mut y = AlgebraMap::zero(n.min(f.band()));
    for k in 1..=n.min(f.band()) {
        let c = f.t_coeff(k);
        if c.is_zero() {
            continue;
        }
        if let Some((gamma, tau_dc)) = dc {
            let floor = (gamma * (int(k).ln() * tau_dc).exp()).recip();
            if alpha.dist_multiple(k).0 < floor {
                return Err(Error::Internal(format!(
                    "|||{k}α||| below the certified Diophantine floor"
                )));
            }
        }
        y.set_t(k, -(c / divisor(int(k) * alpha.value())));
    }
    Ok(y)
}

/// `Ŷ_z(k) = −F̂_z(k)/(e^{2iπ(kα − 2a)} − 1)` on `|k| ≤ N`, or on
/// `0 < |k − k₁| ≤ 2N` when a resonance `k₁` is given. A divisor with
/// `|||kα − 2a||| < 1/K` on a solved mode is an internal error.
pub fn solve_twisted(
    f: &AlgebraMap,
    a: Real,
    alpha: &RotationNumber,
    n: i64,
    k1: Option<i64>,
    k_big: Real,
) -> Result<AlgebraMap> {
    let (lo, hi) = match k1 {
        Some(k1) => (k1 - 2 * n, k1 + 2 * n),
        None => (-n, n),
    };
    let mut y = AlgebraMap::zero(0);
    let bound = k_big.recip();
    for k in lo.max(-f.band())..=hi.min(f.band()) {
        if Some(k) == k1 {
            continue;
        }
        let c = f.z_coeff(k);
        if c.is_zero() {
            continue;
        }
        let arg = int(k) * alpha.value() - a.mul2();
        if crate::real::dist_z(arg) < bound {
            return Err(Error::Internal(format!(
                "small divisor at k = {k} missed by the resonance scan"
            )));
        }
        y.set_z(k, -(c / divisor(arg)));
    }
    Ok(y)
}

/// Norms recorded at every step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepNorms {
    /// `ε_{n,0}`: Wiener norm of the incoming perturbation.
    pub eps0: Real,
    /// `ε_{n,s₀}`.
    pub eps_s0: Real,
    /// `‖Y‖_{H^s}` for `s = 0, 1, 2`.
    pub y_h: [Real; 3],
    /// `‖Y‖_s / (N^{s+ν+1/2} ε_{n,0})`, compared against `(2π)^s`.
    pub y_ratio: [Real; 3],
    pub eps_next0: Real,
    pub eps_next_s0: Real,
    /// `c₀ K N^{s₀} ε_{n,0}`.
    pub smallness: Real,
}

#[derive(Clone, Debug)]
pub struct KamStepResult {
    pub n: usize,
    pub big_n: i64,
    pub big_k: Real,
    /// Rotation parameter of the incoming constant, in `[0, 1/2]`.
    pub a: Real,
    /// `D` with `D·A·D* = {e^{2iπa}, 0}`.
    pub d: GroupElement,
    pub y: AlgebraMap,
    /// Frequency of `B(·) = {e^{−iπk₁·}, 0}` when resonant.
    pub b: Option<i64>,
    /// `D'` of the periodicity restore `C(·) = D'*·{e^{iπ·}, 0}·D'`.
    pub c_fix: Option<GroupElement>,
    /// The whole conjugation `G`.
    pub g: GroupMap,
    /// The mean obstruction `{F̂_t(0), F̂_z(k₁)}` moved into the constant.
    pub obstruction: AlgebraElement,
    pub a_next: GroupElement,
    pub f_next: AlgebraMap,
    pub resonance: Option<Resonance>,
    pub norms: StepNorms,
    /// `sup_x d(G(x+α)·A·e^{F(x)}·G(x)⁻¹, A'·e^{F'(x)})` on the check grid.
    pub residual: Real,
    pub partition_exact: bool,
    pub grid: usize,
}

/// Splits `F̄` into solved modes, obstruction and rest, and checks that
/// the three pieces add back to `F̄` coefficient by coefficient.
fn partition_is_exact(fbar: &AlgebraMap, n: i64, k1: Option<i64>) -> bool {
    let t = fbar.t_part();
    let t_sum = t
        .remove_mean_truncate(n)
        .add(&t.truncate(0))
        .add(&t.rest(n));
    let z = fbar.z_part();
    let z_sum = match k1 {
        Some(k1) => fbar
            .window(n, k1)
            .add(&fbar.z_only_at(k1))
            .add(&fbar.dis_centered_rest(n, k1)),
        None => z.truncate(n).add(&z.rest(n)),
    };
    t_sum.max_coeff_diff(&t).eq_zero() && z_sum.max_coeff_diff(&z).eq_zero()
}

/// Values of a group map on `x_j = j/M`, shifted by `s`.
fn group_samples(g: &GroupMap, s: Real, m: usize) -> Result<Vec<GroupElement>> {
    g.shifted(s).samples(m)
}

/// The constant reached after a step from rotation parameter `a`, with
/// obstruction `{t₀, û}` and optional resonance `k₁`, together with the far
/// part `[C]·[B]` of the conjugation and the `D'` of the periodicity
/// restore when `k₁` is odd.
pub fn next_constant(
    a: Real,
    k1: Option<i64>,
    obstruction: &AlgebraElement,
    alpha: Real,
) -> (GroupElement, GroupMap, Option<GroupElement>) {
    let base = GroupElement::diagonal(a - int(k1.unwrap_or(0)) * alpha.div2());
    let mut a_next = base * exp_alg(obstruction);
    let mut far = k1.map_or_else(GroupMap::identity, |k| GroupMap::morphism(-k));
    let mut c_fix = None;
    if k1.is_some_and(|k| k % 2 != 0) {
        let (dp, _) = diagonalize(&a_next);
        let c = GroupMap::constant(dp.inverse())
            .then(&GroupMap::morphism(1))
            .then(&GroupMap::constant(dp));
        a_next = c.evaluate(alpha) * a_next;
        far = c.then(&far);
        c_fix = Some(dp);
    }
    (a_next, far, c_fix)
}

pub fn kam_step(
    a_const: &GroupElement,
    f: &AlgebraMap,
    alpha: &RotationNumber,
    n: i64,
    k_big: Real,
    params: &KamParams,
    index: usize,
) -> Result<KamStepResult> {
    let eps0 = f.wiener_norm(0);
    let eps_s0 = f.wiener_norm(params.s0);
    let smallness = real(params.c0) * k_big * int(n).powi(params.s0 as i32) * eps0;
    if smallness >= Real::ONE {
        return Err(Error::Refused(format!(
            "step {index}: c₀·K·N^s₀·ε = {:.3e} ≥ 1 (N = {n}, ε = {:.3e})",
            to_f64(smallness),
            to_f64(eps0)
        )));
    }
    let (d, a) = diagonalize(a_const);
    let fbar = f.ad_constant(&AdMatrix::of(&d));
    let resonance = detect_resonance(a, alpha, n, k_big)?;
    let k1 = resonance.as_ref().map(|r| r.k1);

    let dc = Some((real(params.gamma), real(params.tau)));
    let y =
        solve_diagonal(&fbar, alpha, n, dc)?.add(&solve_twisted(&fbar, a, alpha, n, k1, k_big)?);
    let partition_exact = partition_is_exact(&fbar, n, k1);

    let t0 = fbar.t_coeff(0).re;
    let obstruction = AlgebraElement::new(t0, k1.map_or(Cx::ZERO, |k| fbar.z_coeff(k)));
    let (a_next, far, c_fix) = next_constant(a, k1, &obstruction, alpha.value());
    let alpha_v = alpha.value();
    let g = far
        .then(&GroupMap::exp(y.clone())?)
        .then(&GroupMap::constant(d));

    let a_next_inv = a_next.inverse();
    let hint = f.band() + 2 * y.band() + k1.map_or(0, |k| k.abs()) + 1;
    let (f_next, grid) =
        transform_adaptive_grid(Lattice::Integer, hint, &params.grid_options(), |m| {
            let (gs, g0, fs) = (
                group_samples(&g, alpha_v, m)?,
                g.samples(m)?,
                f.samples_on(m)?,
            );
            (0..m)
                .map(|j| {
                    log_group(&(a_next_inv * gs[j] * *a_const * exp_alg(&fs[j]) * g0[j].inverse()))
                })
                .collect()
        })?;

    let check = params.verify_grid.max(64).next_power_of_two();
    let (gs, g0, fs, fn_s) = (
        group_samples(&g, alpha_v, check)?,
        g.samples(check)?,
        f.samples_on(check)?,
        f_next.samples_on(check)?,
    );
    let mut residual = Real::ZERO;
    for j in 0..check {
        let lhs = gs[j] * *a_const * exp_alg(&fs[j]) * g0[j].inverse();
        let rhs = a_next * exp_alg(&fn_s[j]);
        residual = max_real(residual, lhs.distance(&rhs));
    }

    let mut y_h = [Real::ZERO; 3];
    let mut y_ratio = [Real::ZERO; 3];
    for s in 0..3 {
        y_h[s] = y.norm_h(int(s as i64));
        if !eps0.eq_zero() {
            let scale = (int(n).ln() * (int(s as i64) + real(params.nu) + real(0.5))).exp() * eps0;
            y_ratio[s] = y_h[s] / scale;
            if y_ratio[s] > tau().powi(s as i32) {
                return Err(Error::EstimateViolation(format!(
                    "step {index}: ‖Y‖_{s} = {:.3e} exceeds (2π)^{s}·N^(s+ν+1/2)·ε",
                    to_f64(y_h[s])
                )));
            }
        }
    }
    let norms = StepNorms {
        eps0,
        eps_s0,
        y_h,
        y_ratio,
        eps_next0: f_next.wiener_norm(0),
        eps_next_s0: f_next.wiener_norm(params.s0),
        smallness,
    };
    Ok(KamStepResult {
        n: index,
        big_n: n,
        big_k: k_big,
        a,
        d,
        y,
        b: k1,
        c_fix,
        g,
        obstruction,
        a_next,
        f_next,
        resonance,
        norms,
        residual,
        partition_exact,
        grid: grid.size,
    })
}

/// Why a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum StopReason {
    MaxSteps,
    /// The perturbation fell below the working-precision floor.
    EpsilonUnderflow,
    /// A step's estimate check failed; the trace stops before that step.
    EstimateViolation(String),
    /// A step's precondition failed mid-run.
    Refused(String),
    Bandwidth(String),
    Precision(String),
}

#[derive(Clone, Debug)]
pub struct SchemeTrace {
    pub cocycle: Cocycle,
    pub alpha: RotationNumber,
    pub params: KamParams,
    /// `A₁` and `F₁` with `A(x) = A₁·e^{F₁(x)}`.
    pub a1: GroupElement,
    pub f1: AlgebraMap,
    pub steps: Vec<KamStepResult>,
    pub stop: StopReason,
}

impl SchemeTrace {
    /// Indices (1-based) of resonant steps.
    pub fn resonant_steps(&self) -> Vec<usize> {
        self.steps
            .iter()
            .filter(|s| s.resonance.is_some())
            .map(|s| s.n)
            .collect()
    }

    /// `H_n = G_n···G_1`.
    pub fn conjugation(&self) -> GroupMap {
        self.steps
            .iter()
            .fold(GroupMap::identity(), |acc, s| s.g.then(&acc))
    }

    /// The constant and perturbation reached at the end.
    pub fn final_state(&self) -> (GroupElement, &AlgebraMap) {
        match self.steps.last() {
            Some(s) => (s.a_next, &s.f_next),
            None => (self.a1, &self.f1),
        }
    }
}

/// Splits `A(·)` as `A₁·e^{F₁(·)}` with `F₁` of zero mean: `A₁` starts at the
/// normalised grid mean of `A` and is corrected by the mean of the
/// logarithm until it stops moving.
pub fn split_constant(c: &Cocycle, params: &KamParams) -> Result<(GroupElement, AlgebraMap)> {
    let transfer = c.transfer();
    if transfer.is_constant() {
        return Ok((transfer.evaluate(Real::ZERO), AlgebraMap::zero(0)));
    }
    let opts = params.grid_options();
    let probe = 256usize;
    let vals = transfer.samples(probe)?;
    let (mut z, mut w) = (Cx::ZERO, Cx::ZERO);
    for v in &vals {
        z += v.z;
        w += v.w;
    }
    let mut a1 = GroupElement::new(z, w);
    let hint = transfer
        .factors()
        .iter()
        .map(|f| match f {
            crate::fourier::GroupFactor::Exp(m) => m.band(),
            crate::fourier::GroupFactor::Morphism { h } => h.abs(),
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    let mut last = None;
    for _ in 0..40 {
        let inv = a1.inverse();
        let (f, _) = transform_adaptive_grid(Lattice::Integer, hint, &opts, |m| {
            transfer
                .samples(m)?
                .iter()
                .map(|v| log_group(&(inv * *v)))
                .collect()
        })?;
        let mean = f.mean();
        if mean.norm() <= params.coefficient_floor() {
            let f = f.remove_mean_truncate(f.band());
            return Ok((a1, f));
        }
        if let Some(prev) = last {
            if mean.norm() >= prev {
                return Ok((a1, f));
            }
        }
        last = Some(mean.norm());
        a1 = a1 * exp_alg(&mean);
    }
    Err(Error::Precision(
        "mean-zero splitting did not converge".into(),
    ))
}

/// Iterates [`kam_step`] along the `(N_n, K_n)` schedule.
pub fn run_scheme(c: &Cocycle, params: &KamParams) -> Result<SchemeTrace> {
    params.validate()?;
    let alpha = c.alpha().clone();
    let (a1, f1) = split_constant(c, params)?;
    let eps_entry = f1.wiener_norm(0);
    if f1.wiener_norm(params.s0) >= Real::ONE {
        return Err(Error::Refused(format!(
            "‖F₁‖_s₀ = {:.3e} ≥ 1",
            to_f64(f1.wiener_norm(params.s0))
        )));
    }
    let schedule = params.schedule(params.max_steps);
    if let Some(&(n, k)) = schedule.first() {
        let small = real(params.c0) * k * int(n).powi(params.s0 as i32) * eps_entry;
        if small >= Real::ONE && eps_entry > params.epsilon_floor() {
            return Err(Error::Refused(format!(
                "entry smallness fails: c₀·K₁·N₁^s₀·ε₁ = {:.3e} ≥ 1",
                to_f64(small)
            )));
        }
    }
    let mut trace = SchemeTrace {
        cocycle: c.clone(),
        alpha: alpha.clone(),
        params: params.clone(),
        a1,
        f1,
        steps: Vec::new(),
        stop: StopReason::MaxSteps,
    };
    for (i, &(n, k)) in schedule.iter().enumerate() {
        let (a, f) = trace.final_state();
        if f.wiener_norm(0) < params.epsilon_floor() {
            trace.stop = StopReason::EpsilonUnderflow;
            return Ok(trace);
        }
        let (a, f) = (a, f.clone());
        match kam_step(&a, &f, &alpha, n, k, params, i + 1) {
            Ok(step) => trace.steps.push(step),
            Err(e) => {
                trace.stop = match e {
                    Error::EstimateViolation(m) => StopReason::EstimateViolation(m),
                    Error::Refused(m) => StopReason::Refused(m),
                    Error::Bandwidth { requested, limit } => {
                        StopReason::Bandwidth(format!("grid {requested} exceeds {limit}"))
                    }
                    Error::Precision(m) | Error::Branch(m) => StopReason::Precision(m),
                    other => return Err(other),
                };
                return Ok(trace);
            }
        }
    }
    Ok(trace)
}
