//! Subcommand bodies.

use std::path::Path;

use serde::Serialize;
use spinbeats::channels::PzConvention;
use spinbeats::experiments::{self, noisy_mfe_study};
use spinbeats::protocols::{self, TimePoint};
use spinbeats::sweep::derive_seed;
use spinbeats::verify::{self, Check, VerifyOptions};

use crate::config::{self, MfeSource, Overrides, RunConfig};
use crate::output::{self, Cell, Series, Table};
use crate::{CliError, CommonArgs, VerifyArgs};

fn load(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    config::apply_overrides(
        &mut cfg,
        &Overrides {
            seed: args.seed,
            shots: args.shots,
            out: args.out.clone(),
            svg: args.svg,
        },
    );
    Ok(cfg)
}

/// The value a run reports: echo-symmetrized for the inherent method.
fn reported(p: &TimePoint) -> f64 {
    p.estimate.echo_corrected()
}

fn write_svg(
    cfg: &RunConfig,
    title: &str,
    x: &[f64],
    series: &[Series<'_>],
) -> Result<(), CliError> {
    if let Some(path) = &cfg.output.svg {
        output::write_atomic(path, &output::svg(title, "t (ns)", x, series))?;
    }
    Ok(())
}

pub fn simulate(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let plan = config::plan_simulate(&cfg)?;
    let points = protocols::simulate(&plan.spec, &plan.method, &plan.grid, plan.seed)?;
    let rows: Vec<Vec<Cell>> = points
        .iter()
        .map(|p| {
            vec![
                Cell::F(p.t),
                Cell::F(reported(p)),
                Cell::F(p.exact),
                Cell::F(p.estimate.stderr),
                Cell::U(p.estimate.shots),
                Cell::U(p.seed),
                Cell::F(p.estimate.t_eff),
                Cell::U(p.estimate.n_identity as u64),
                Cell::F(p.estimate.value),
            ]
        })
        .collect();
    let notes = vec![format!(
        "method = {}, prng = {}",
        plan.method.method.name(),
        spinbeats::circuits::PRNG_NAME
    )];
    let text = output::csv(
        &config::to_toml(&plan.resolved)?,
        &notes,
        &[
            "t_ns",
            "S_tilde_est",
            "S_tilde_exact",
            "stderr_est",
            "shots",
            "seed",
            "t_eff_ns",
            "n_identity",
            "S_tilde_raw",
        ],
        &rows,
    );
    output::emit(cfg.output.csv.as_deref(), &text)?;
    let est: Vec<f64> = points.iter().map(reported).collect();
    let exact: Vec<f64> = points.iter().map(|p| p.exact).collect();
    write_svg(
        &cfg,
        "relaxed singlet yield",
        &plan.grid,
        &[
            Series {
                label: "estimate",
                y: &est,
                dashed: false,
            },
            Series {
                label: "closed form",
                y: &exact,
                dashed: true,
            },
        ],
    )
}

struct Yields {
    t: Vec<f64>,
    est: Vec<f64>,
    exact: Vec<f64>,
}

fn read_yields(path: &Path) -> Result<Yields, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
    let table = Table::parse(&text).map_err(bad)?;
    Ok(Yields {
        t: table.column("t_ns").map_err(bad)?,
        est: table.column("S_tilde_est").map_err(bad)?,
        exact: table.column("S_tilde_exact").map_err(bad)?,
    })
}

pub fn mfe(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let plan = config::plan_mfe(&cfg)?;
    let (low, high) = match &plan.source {
        MfeSource::Files { low, high } => {
            let (l, h) = (read_yields(low)?, read_yields(high)?);
            let same = l.t.len() == h.t.len()
                && l.t
                    .iter()
                    .zip(&h.t)
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0));
            if !same {
                return Err(CliError::Config(format!(
                    "time grids differ between {} and {}",
                    low.display(),
                    high.display()
                )));
            }
            (l, h)
        }
        MfeSource::Run {
            low,
            high,
            method,
            qubits_high,
            grid,
        } => {
            let run = |spec, method, k| -> Result<Yields, CliError> {
                let pts = protocols::simulate(spec, method, grid, derive_seed(plan.seed, k))?;
                Ok(Yields {
                    t: grid.clone(),
                    est: pts.iter().map(reported).collect(),
                    exact: pts.iter().map(|p| p.exact).collect(),
                })
            };
            let mut method_high = method.clone();
            method_high.qubits = qubits_high.clone();
            (run(low, method, 0)?, run(high, &method_high, 1)?)
        }
    };
    let m_est = experiments::mfe_series(&low.est, &high.est, plan.theta)?;
    let m_theory = experiments::mfe_series(&low.exact, &high.exact, plan.theta)?;
    let mse = experiments::mse(&m_est, &m_theory)?;
    let rows: Vec<Vec<Cell>> = low
        .t
        .iter()
        .zip(m_est.iter().zip(&m_theory))
        .map(|(&t, (&e, &th))| vec![Cell::F(t), Cell::F(e), Cell::F(th)])
        .collect();
    let mut text = output::csv(
        &config::to_toml(&plan.resolved)?,
        &[],
        &["t_ns", "M_est", "M_theory"],
        &rows,
    );
    text.push_str(&format!("# mse_percent = {mse:.16e}\n"));
    output::emit(cfg.output.csv.as_deref(), &text)?;
    eprintln!("mse_percent = {mse:.6e}");
    write_svg(
        &cfg,
        "time-resolved field effect",
        &low.t,
        &[
            Series {
                label: "estimate",
                y: &m_est,
                dashed: false,
            },
            Series {
                label: "theory",
                y: &m_theory,
                dashed: true,
            },
        ],
    )
}

pub fn noise_study(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(args)?;
    let plan = config::plan_noise_study(&cfg)?;
    let study = noisy_mfe_study(
        &plan.low,
        &plan.high,
        &plan.ft,
        plan.theta,
        &plan.study,
        &plan.grid,
    )?;
    let rows: Vec<Vec<Cell>> = study
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::F(p.t),
                Cell::F(p.m_theory),
                Cell::F(p.mean),
                Cell::F(p.std),
                Cell::F(p.predicted_std),
                Cell::B(p.prediction_valid),
                Cell::U(p.rejected as u64),
            ]
        })
        .collect();
    let notes = vec![format!(
        "rejected samples (non-positive low-field intensity) = {}",
        study.rejected
    )];
    let text = output::csv(
        &config::to_toml(&plan.resolved)?,
        &notes,
        &[
            "t_ns",
            "M_theory",
            "M_mean",
            "M_std",
            "M_std_predicted",
            "prediction_valid",
            "rejected",
        ],
        &rows,
    );
    output::emit(cfg.output.csv.as_deref(), &text)?;
    let mean: Vec<f64> = study.points.iter().map(|p| p.mean).collect();
    let upper: Vec<f64> = study.points.iter().map(|p| p.mean + p.std).collect();
    let lower: Vec<f64> = study.points.iter().map(|p| p.mean - p.std).collect();
    let theory: Vec<f64> = study.points.iter().map(|p| p.m_theory).collect();
    write_svg(
        &cfg,
        "field effect under detector noise",
        &plan.grid,
        &[
            Series {
                label: "mean",
                y: &mean,
                dashed: false,
            },
            Series {
                label: "theory",
                y: &theory,
                dashed: true,
            },
            Series {
                label: "mean + std",
                y: &upper,
                dashed: true,
            },
            Series {
                label: "mean - std",
                y: &lower,
                dashed: true,
            },
        ],
    )
}

#[derive(Serialize)]
struct Report<'a> {
    convention: &'static str,
    seed: u64,
    passed: bool,
    checks: &'a [Check],
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let mut opts = VerifyOptions::default();
    if let Some(s) = args.seed {
        opts.seed = s;
    }
    if args.inject_pz_sign_flip {
        opts.convention = PzConvention::Printed;
    }
    let checks = verify::run_suite(&opts)?;
    for c in &checks {
        println!(
            "{}",
            serde_json::to_string(c).map_err(|e| CliError::Io(e.to_string()))?
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let report = Report {
        convention: match opts.convention {
            PzConvention::Derived => "derived",
            PzConvention::Printed => "printed",
        },
        seed: opts.seed,
        passed: failed.is_empty(),
        checks: &checks,
    };
    println!(
        "{}",
        serde_json::json!({"summary": {"checks": checks.len(), "failed": failed.len(), "passed": failed.is_empty()}})
    );
    if let Some(p) = &args.out {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        output::write_atomic(p, &(text + "\n"))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
