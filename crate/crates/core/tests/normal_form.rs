use cocycle_core::arithmetic::RotationNumber;
use cocycle_core::cocycle::Cocycle;
use cocycle_core::fourier::GroupMap;
use cocycle_core::kam::{run_scheme, KamParams};
use cocycle_core::normal_form::{
    cocycle_distance, deform, design_plant, diagnose, extract, synthesize, DesignSpec, DesignStep,
    DiagnoseOptions, NormalFormLedger, Plant, PlantStep, ResonantStep, Verdict,
};
use cocycle_core::real::{real, to_f64};
use cocycle_core::su2::GroupElement;
use cocycle_core::Real;

fn golden() -> RotationNumber {
    RotationNumber::golden_mean()
}

/// A ledger with one resonance per step `1..=thetas.len()` on the default
/// schedule; the run is neither quiet nor exhausted.
fn ledger_with_angles(thetas: &[f64]) -> NormalFormLedger {
    let schedule: Vec<i64> = KamParams::default()
        .schedule(thetas.len())
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let steps = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| ResonantStep {
            n: i + 1,
            big_n: schedule[i],
            k: schedule[i],
            eps: real(t.cos()),
            amp: real(t.sin()),
            phi: Real::ZERO,
            theta: real(t),
            after_c_fix: false,
            in_window: true,
        })
        .collect();
    NormalFormLedger {
        alpha: golden(),
        schedule,
        steps,
        d: GroupMap::identity(),
        far: GroupMap::identity(),
        horizon: thetas.len(),
        final_constant: GroupElement::diagonal(real(0.2)),
        d_log_norm: Real::ZERO,
        final_eps: real(1e-12),
        exhausted: false,
        tail_bound: real(1e-12),
        verification: Real::ZERO,
    }
}

#[test]
fn geometric_angles_are_square_summable() {
    let thetas: Vec<f64> = (1..=10).map(|i| 0.5f64.powi(i)).collect();
    let d = diagnose(&ledger_with_angles(&thetas), &DiagnoseOptions::default()).unwrap();
    assert_eq!(d.verdict, Verdict::AngleSquareSummable, "{}", d.rule);
    let total: f64 = thetas.iter().map(|t| t * t).sum();
    assert!((d.partial_sums.last().unwrap() - total).abs() < 1e-15);
}

#[test]
fn harmonic_squares_are_not_summable() {
    let thetas: Vec<f64> = (1..=10).map(|i| 1.0 / (i as f64).sqrt()).collect();
    let d = diagnose(&ledger_with_angles(&thetas), &DiagnoseOptions::default()).unwrap();
    assert_eq!(d.verdict, Verdict::NotSummable, "{}", d.rule);
    assert!(d.confidence > 0.0);
}

#[test]
fn weighted_sums_split_by_sigma() {
    // N grows like N^{3/2} per step, so N^2·2^{-i} blows up.
    let thetas: Vec<f64> = (1..=6).map(|i| 0.5f64.powi(i)).collect();
    let l = ledger_with_angles(&thetas);
    let opts = DiagnoseOptions {
        sigmas: vec![0.0, 2.0],
        ..DiagnoseOptions::default()
    };
    let d = diagnose(&l, &opts).unwrap();
    let (s0, s2) = (&d.h_sigma_sums[0], &d.h_sigma_sums[1]);
    assert!(
        s0.summable && !s2.summable,
        "{:?} {:?}",
        s0.exponent,
        s2.exponent
    );
    // Independent recomputation of the σ = 2 partial sums.
    let mut acc = 0.0;
    for (i, (t, s)) in thetas.iter().zip(&l.steps).enumerate() {
        acc += ((s.big_n as f64).powi(2) * t).powi(2);
        assert!((s2.sums[i] - acc).abs() <= 1e-12 * acc);
    }
}

#[test]
fn quiet_or_exhausted_runs_are_finitely_resonant() {
    let mut l = ledger_with_angles(&[0.3, 0.3]);
    assert_eq!(
        diagnose(&l, &DiagnoseOptions::default()).unwrap().verdict,
        Verdict::NotSummable
    );
    l.exhausted = true;
    let d = diagnose(&l, &DiagnoseOptions::default()).unwrap();
    assert_eq!(d.verdict, Verdict::FinitelyResonant);
    assert!(d.limit.is_some());
    l.exhausted = false;
    l.horizon = 7;
    assert_eq!(
        diagnose(&l, &DiagnoseOptions::default()).unwrap().verdict,
        Verdict::FinitelyResonant
    );
}

#[test]
fn constant_input_gives_an_empty_ledger() {
    let a = GroupElement::diagonal(real(0.23));
    let c = Cocycle::constant(golden(), a);
    let l = extract(&run_scheme(&c, &KamParams::default()).unwrap()).unwrap();
    assert!(l.steps.is_empty());
    assert!(l.final_constant.distance(&a) < real(1e-65));
    assert!(l.d.evaluate(real(0.4)).distance_to_identity() < real(1e-65));
    let d = diagnose(&l, &DiagnoseOptions::default()).unwrap();
    assert_eq!(d.verdict, Verdict::FinitelyResonant);
}

fn single_plant(k: i64, eps: f64, amp: f64, phi: f64) -> Plant {
    Plant {
        steps: vec![PlantStep {
            n: 1,
            k,
            eps: real(eps),
            amp: real(amp),
            phi: real(phi),
        }],
    }
}

#[test]
fn single_resonance_round_trip() {
    let params = KamParams::default();
    let plant = single_plant(2, 1e-7, 1e-7, 0.7);
    let c = synthesize(&plant, &golden(), &params).unwrap();
    let l = extract(&run_scheme(&c, &params).unwrap()).unwrap();
    assert_eq!(l.steps.len(), 1);
    let s = &l.steps[0];
    assert_eq!((s.n, s.k), (1, 2));
    assert!(s.in_window && !s.after_c_fix);
    for (got, want) in [(s.eps, 1e-7), (s.amp, 1e-7), (s.phi, 0.7)] {
        assert!((to_f64(got) - want).abs() < 1e-8 * want.max(1e-7));
    }
    assert!(l.verification < real(1e-20));
    assert!(l.exhausted);
    assert_eq!(
        diagnose(&l, &DiagnoseOptions::default()).unwrap().verdict,
        Verdict::FinitelyResonant
    );
}

#[test]
fn constant_angle_to_the_horizon_is_not_summable() {
    // Resonances up to the last step of the run.
    let params = KamParams {
        n1: 5,
        nu: 2.0,
        tau: 1.2,
        gamma: 2.7,
        max_steps: 3,
        ..KamParams::default()
    };
    let spec = DesignSpec {
        steps: vec![
            DesignStep {
                n: 1,
                k: -2,
                theta: real(0.3),
                phi: real(0.4),
            },
            DesignStep {
                n: 3,
                k: 34,
                theta: real(0.3),
                phi: real(1.1),
            },
        ],
        last_eps: real(1e-4),
    };
    let c = synthesize(&design_plant(&spec, &golden()).unwrap(), &golden(), &params).unwrap();
    let l = extract(&run_scheme(&c, &params).unwrap()).unwrap();
    assert_eq!(
        l.steps.iter().map(|s| (s.n, s.k)).collect::<Vec<_>>(),
        vec![(1, -2), (3, 34)]
    );
    assert!(!l.exhausted);
    let d = diagnose(&l, &DiagnoseOptions::default()).unwrap();
    assert_eq!(d.verdict, Verdict::NotSummable, "{}", d.rule);
    assert_eq!(d.gap_sequence, vec![2]);
}

fn ledger_of_plant(plant: &Plant) -> NormalFormLedger {
    let params = KamParams::default();
    let c = synthesize(plant, &golden(), &params).unwrap();
    extract(&run_scheme(&c, &params).unwrap()).unwrap()
}

#[test]
fn deformation_hits_its_endpoints_and_is_continuous() {
    let params = KamParams::default();
    let source = ledger_of_plant(&single_plant(2, 1e-7, 1e-7, 0.7));
    let target = ledger_of_plant(&single_plant(2, 2e-7, 0.5e-7, 2.1));
    let grid = 64;
    let at = |t: f64| deform(&source, &target, real(t), &params).unwrap();
    let from_ledger =
        |l: &NormalFormLedger| synthesize(&Plant::from_ledger(l), &golden(), &params).unwrap();
    assert!(cocycle_distance(&at(0.0), &from_ledger(&source), grid) < real(1e-40));
    assert!(cocycle_distance(&at(1.0), &from_ledger(&target), grid) < real(1e-40));

    // Distances between nearby parameters shrink with the spacing.
    let ts: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
    let cocycles: Vec<Cocycle> = ts.iter().map(|&t| at(t)).collect();
    let coarse = cocycles
        .windows(2)
        .map(|w| to_f64(cocycle_distance(&w[0], &w[1], grid)))
        .fold(0.0, f64::max);
    for &t in &[0.1, 0.37, 0.62, 0.9] {
        let mut last = f64::INFINITY;
        for h in [1e-3, 1e-5, 1e-7] {
            let d = to_f64(cocycle_distance(&at(t), &at(t + h), grid));
            assert!(d <= last && d <= coarse, "t = {t}, h = {h}: {d}");
            last = d;
        }
        assert!(last < 1e-10, "t = {t}: {last}");
    }
}
