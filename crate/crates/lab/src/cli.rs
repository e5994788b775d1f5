use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use cocycle_core::arithmetic::{calibrate_gamma, check_dc, check_dc_alpha};
use cocycle_core::normal_form::{deform, synthesize, Plant};
use cocycle_core::real::{real, PRECISION_BITS};
use cocycle_core::Error as CoreError;
use serde::Serialize;

use crate::config::{parse_alpha, CorrelationConfig, EigenConfig, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::output::Stamp;
use crate::pipeline::{self, load_ledger, DcJson, Session};
use crate::serial::{self, CocycleJson, RealText};

#[derive(Debug, Parser)]
#[command(
    name = "cocycle",
    version,
    about = "Experiments with quasiperiodic SU(2) cocycles"
)]
pub struct Cli {
    /// Experiment configuration (JSON); defaults apply when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continued-fraction expansion of a rotation number.
    Cf {
        /// Defaults to the configured rotation number.
        alpha: Option<String>,
        #[arg(long, default_value_t = 12)]
        terms: usize,
    },
    /// Diophantine check of α, or of a shift `a` against α.
    DcCheck {
        alpha: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        k_max: u64,
        #[arg(long)]
        shift: Option<f64>,
        /// Also report the smallest γ that works up to `k_max`.
        #[arg(long)]
        calibrate: bool,
    },
    Kam {
        #[command(subcommand)]
        action: KamAction,
    },
    Nf {
        #[command(subcommand)]
        action: NfAction,
    },
    Eigen {
        #[command(subcommand)]
        action: EigenAction,
    },
    /// Correlation trace `⟨Uⁿf, g⟩` and its Cesàro means.
    Simulate {
        #[command(flatten)]
        input: CocycleInput,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        quadrature: Option<usize>,
    },
    /// Full pipeline: scheme, ledger, diagnosis and configured analyses.
    Run {
        #[command(flatten)]
        input: CocycleInput,
    },
}

#[derive(Debug, Args)]
pub struct CocycleInput {
    /// Cocycle file (as written by `nf synthesize`) instead of the
    /// configured one.
    #[arg(long)]
    pub cocycle: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum KamAction {
    /// Runs the reduction scheme and writes its trace.
    Run {
        #[command(flatten)]
        input: CocycleInput,
        /// Trace file; its directory replaces `--out-dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum NfAction {
    /// Scheme run followed by ledger extraction and diagnosis.
    Extract {
        #[command(flatten)]
        input: CocycleInput,
    },
    Classify {
        first: PathBuf,
        second: PathBuf,
    },
    /// Builds a cocycle from the configured plant or from a ledger.
    Synthesize {
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Cocycle at parameter `t` of the dyadic path between two ledgers.
    Deform {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        t: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum EigenAction {
    Search {
        #[command(flatten)]
        input: CocycleInput,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n_trunc: Option<i64>,
        #[arg(long)]
        circle: Option<usize>,
        /// Use the inverse Koopman convention (conjugated spectrum).
        #[arg(long)]
        inverse_convention: bool,
    },
}

/// Configuration after command-line overrides.
pub fn effective_config(cli: &Cli) -> LabResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(b) = cli.precision_bits {
        cfg.kam.precision_bits = b;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = Some(d.clone());
    }
    let bits = cfg.kam.precision_bits;
    if !(64..=PRECISION_BITS).contains(&bits) {
        return Err(CoreError::Precision(format!(
            "{bits} bits requested; supported range is 64..={PRECISION_BITS}"
        ))
        .into());
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    #[serde(flatten)]
    stamp: Stamp,
    data: &'a T,
}

fn print_stamped<T: Serialize>(cfg: &ExperimentConfig, data: &T) {
    let stamp = Stamp {
        config_hash: cfg.hash(),
        precision_bits: cfg.kam.precision_bits,
        seed: cfg.seed,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&Stamped { stamp, data }).expect("serialisable")
    );
}

#[derive(Serialize)]
struct CfJson {
    alpha: String,
    value: RealText,
    quotients: Vec<u64>,
    convergents: Vec<(u128, u128)>,
    rational: bool,
    precision_bits: u32,
}

#[derive(Serialize)]
struct DcCheckJson {
    alpha: String,
    quotients: Vec<u64>,
    convergents: Vec<(u128, u128)>,
    shift: Option<f64>,
    report: DcJson,
    calibrated_gamma: Option<RealText>,
}

pub fn run(cli: Cli) -> LabResult<()> {
    let cfg = effective_config(&cli)?;
    let out_root = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Cf { alpha, terms } => {
            let spec = alpha.unwrap_or_else(|| cfg.alpha.clone());
            let a = parse_alpha(&spec)?;
            let cf = a.expand(terms)?;
            print_stamped(
                &cfg,
                &CfJson {
                    alpha: spec,
                    value: a.value().into(),
                    quotients: cf.partial_quotients,
                    convergents: cf.convergents,
                    rational: cf.rational,
                    precision_bits: cf.precision_bits,
                },
            );
            Ok(())
        }
        Command::DcCheck {
            alpha,
            gamma,
            tau,
            k_max,
            shift,
            calibrate,
        } => {
            let spec = alpha.unwrap_or_else(|| cfg.alpha.clone());
            let a = parse_alpha(&spec)?;
            let (g, t) = (
                real(gamma.unwrap_or(cfg.kam.gamma)),
                real(tau.unwrap_or(cfg.kam.tau)),
            );
            let report = match shift {
                Some(s) => check_dc_alpha(real(s), &a, g, t, k_max)?,
                None => check_dc(&a, g, t, k_max)?,
            };
            let calibrated = if calibrate {
                Some(calibrate_gamma(&a, t, k_max)?.into())
            } else {
                None
            };
            let cf = a.expand(12)?;
            print_stamped(
                &cfg,
                &DcCheckJson {
                    alpha: spec,
                    quotients: cf.partial_quotients,
                    convergents: cf.convergents,
                    shift,
                    report: (&report).into(),
                    calibrated_gamma: calibrated,
                },
            );
            Ok(())
        }
        Command::Kam {
            action: KamAction::Run { input, out },
        } => {
            let (root, name) = match &out {
                Some(p) => (
                    p.parent()
                        .filter(|d| !d.as_os_str().is_empty())
                        .map_or_else(|| PathBuf::from("."), PathBuf::from),
                    p.file_name().map(|n| n.to_string_lossy().into_owned()),
                ),
                None => (out_root, None),
            };
            let mut s = Session::new(cfg, &root)?;
            if let Some(n) = name {
                s.trace_name = n;
            }
            let c = input_cocycle(&mut s, &input)?;
            let trace = s.scheme(&c)?;
            s.ledger(&trace)?;
            finish(&s, pipeline::stop_error(&trace))
        }
        Command::Nf { action } => nf(cfg, &out_root, action),
        Command::Eigen {
            action:
                EigenAction::Search {
                    input,
                    m,
                    n_trunc,
                    circle,
                    inverse_convention,
                },
        } => {
            let base = cfg.analysis.eigen.clone();
            let e = EigenConfig {
                m: m.or(base.as_ref().map(|e| e.m)).unwrap_or(2),
                n_trunc: n_trunc.or(base.as_ref().map(|e| e.n_trunc)).unwrap_or(8),
                circle: circle.or(base.as_ref().map(|e| e.circle)).unwrap_or(1000),
                inverse: inverse_convention || base.as_ref().is_some_and(|e| e.inverse),
            };
            let mut s = Session::new(cfg, &out_root)?;
            let c = input_cocycle(&mut s, &input)?;
            let trace = s.scheme(&c)?;
            s.eigen(&c, pipeline::final_rotation(&trace), &e)?;
            finish(&s, None)
        }
        Command::Simulate {
            input,
            length,
            m,
            j,
            p,
            k,
            quadrature,
        } => {
            let base = cfg.analysis.correlation.clone();
            let b = base.as_ref();
            let corr = CorrelationConfig {
                length: length.or(b.map(|c| c.length)).unwrap_or(1000),
                m: m.or(b.map(|c| c.m)).unwrap_or(2),
                j: j.or(b.map(|c| c.j)).unwrap_or(1),
                p: p.or(b.map(|c| c.p)).unwrap_or(1),
                k: k.or(b.map(|c| c.k)).unwrap_or(0),
                g: b.and_then(|c| c.g),
                quadrature: quadrature.or(b.map(|c| c.quadrature)).unwrap_or(0),
            };
            let mut s = Session::new(cfg, &out_root)?;
            let c = input_cocycle(&mut s, &input)?;
            s.correlation(&c, &corr)?;
            finish(&s, None)
        }
        Command::Run { input } => {
            let mut s = Session::new(cfg, &out_root)?;
            let c = match &input.cocycle {
                Some(p) => Some(s.load_cocycle(p)?),
                None => None,
            };
            let result = pipeline::run_pipeline(&mut s, c);
            finish(&s, result.err())
        }
    }
}

fn nf(cfg: ExperimentConfig, out_root: &std::path::Path, action: NfAction) -> LabResult<()> {
    match action {
        NfAction::Extract { input } => {
            let mut s = Session::new(cfg, out_root)?;
            let c = input_cocycle(&mut s, &input)?;
            let trace = s.scheme(&c)?;
            let ledger = s.ledger(&trace)?;
            s.diagnose(&ledger)?;
            finish(&s, pipeline::stop_error(&trace))
        }
        NfAction::Classify { first, second } => {
            let (l1, l2) = (load_ledger(&first)?, load_ledger(&second)?);
            let mut s = Session::new(cfg, out_root)?;
            let r = s.classify(&l1, &l2)?;
            println!("verdict: {}", pipeline::equivalence_text(r.verdict));
            finish(&s, None)
        }
        NfAction::Synthesize { ledger } => {
            let mut s = Session::new(cfg, out_root)?;
            let (plant, alpha_spec) = match &ledger {
                Some(p) => {
                    let l = load_ledger(p)?;
                    let spec = pipeline::read_json::<serial::LedgerJson>(p)?.alpha;
                    (Plant::from_ledger(&l), spec)
                }
                None => match s.plant()? {
                    Some(p) => (p, s.cfg.alpha.clone()),
                    None => {
                        return Err(LabError::Config(
                            "no plant configured and no --ledger given".into(),
                        ))
                    }
                },
            };
            let alpha = parse_alpha(&alpha_spec)?;
            s.out.json("plant.json", &serial::plant_json(&plant))?;
            let c = synthesize(&plant, &alpha, &s.params)?;
            s.out
                .json("cocycle.json", &CocycleJson::new(&alpha_spec, &c))?;
            finish(&s, None)
        }
        NfAction::Deform { source, target, t } => {
            let (l1, l2) = (load_ledger(&source)?, load_ledger(&target)?);
            let spec = pipeline::read_json::<serial::LedgerJson>(&source)?.alpha;
            let mut s = Session::new(cfg, out_root)?;
            let c = deform(&l1, &l2, real(t), &s.params)?;
            s.out.json("cocycle.json", &CocycleJson::new(&spec, &c))?;
            finish(&s, None)
        }
    }
}

fn input_cocycle(
    s: &mut Session,
    input: &CocycleInput,
) -> LabResult<cocycle_core::cocycle::Cocycle> {
    match &input.cocycle {
        Some(p) => s.load_cocycle(p),
        None => s.cocycle(),
    }
}

/// Lists what was written, then reports any deferred failure.
fn finish(s: &Session, failure: Option<LabError>) -> LabResult<()> {
    for p in s.out.written() {
        println!("wrote {}", p.display());
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
