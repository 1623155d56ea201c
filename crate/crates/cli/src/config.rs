//! TOML run configuration. See `README.md` for the schema.
//!
//! A CSV written by this tool starts with the fully resolved configuration
//! as `# ` comment lines, so it can be passed back as `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinbeats::circuits::{NoiseModel, QubitTimes};
use spinbeats::experiments::{self, FtParams, NoiseStudyConfig};
use spinbeats::protocols::{KrausOptions, KrausVariant, Method, MethodConfig};
use spinbeats::spinsys::{Hyperfine, Preset, SpinSystemSpec};

use crate::CliError;

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_mt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hfc: Option<Vec<Hyperfine>>,
}

impl SystemConfig {
    pub fn resolve(&self) -> Result<SpinSystemSpec, CliError> {
        let mut spec = match self.preset {
            Some(p) if p.is_dps() => match self.sigma {
                Some(s) => p.dps_with_sigma(s),
                None => p.dps(),
            }
            .map_err(cfg_err)?,
            Some(p) => {
                let (Some(t1), Some(t2)) = (self.t1_ns, self.t2_ns) else {
                    return Err(cfg_err(format!(
                        "preset {} has no default relaxation times; set t1_ns and t2_ns",
                        p.name()
                    )));
                };
                p.tmp(t1, t2).map_err(cfg_err)?
            }
            None => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| cfg_err(format!("system without preset needs `{name}`")))
                };
                SpinSystemSpec {
                    g1: need(self.g1, "g1")?,
                    g2: need(self.g2, "g2")?,
                    field_mt: need(self.field_mt, "field_mt")?,
                    hfc: Vec::new(),
                    t1_ns: need(self.t1_ns, "t1_ns")?,
                    t2_ns: need(self.t2_ns, "t2_ns")?,
                    theta: need(self.theta, "theta")?,
                    sigma: None,
                }
            }
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut spec.g1, self.g1);
        set(&mut spec.g2, self.g2);
        set(&mut spec.field_mt, self.field_mt);
        set(&mut spec.t1_ns, self.t1_ns);
        set(&mut spec.t2_ns, self.t2_ns);
        set(&mut spec.theta, self.theta);
        if self.sigma.is_some() {
            spec.sigma = self.sigma;
        }
        if let Some(h) = &self.hfc {
            spec.hfc = h.clone();
        }
        spec.validate().map_err(cfg_err)?;
        Ok(spec)
    }

    /// Every field explicit.
    pub fn resolved(preset: Option<Preset>, spec: &SpinSystemSpec) -> Self {
        Self {
            preset,
            g1: Some(spec.g1),
            g2: Some(spec.g2),
            field_mt: Some(spec.field_mt),
            t1_ns: Some(spec.t1_ns),
            t2_ns: Some(spec.t2_ns),
            theta: Some(spec.theta),
            sigma: spec.sigma,
            hfc: Some(spec.hfc.clone()),
        }
    }

    fn is_dps_like(&self, spec: &SpinSystemSpec) -> bool {
        self.preset.map_or(!spec.has_hfc(), Preset::is_dps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    #[default]
    Weighted,
    RandomRotation,
}

fn default_echo() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default)]
    pub name: Method,
    #[serde(default)]
    pub shots: u64,
    #[serde(default = "default_echo")]
    pub n_echo: usize,
    #[serde(default)]
    pub ancilla: bool,
    #[serde(default)]
    pub variant: VariantName,
    #[serde(default)]
    pub simplified: bool,
}

impl Default for MethodSection {
    fn default() -> Self {
        Self {
            name: Method::default(),
            shots: 0,
            n_echo: default_echo(),
            ancilla: false,
            variant: VariantName::default(),
            simplified: false,
        }
    }
}

/// One value for both qubits or one per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit {
    Both(f64),
    Each(Vec<f64>),
}

impl PerQubit {
    fn values(&self, what: &str) -> Result<[f64; 2], CliError> {
        match self {
            PerQubit::Both(x) => Ok([*x, *x]),
            PerQubit::Each(v) if v.len() == 2 => Ok([v[0], v[1]]),
            PerQubit::Each(v) => Err(cfg_err(format!(
                "qubits.{what} needs 2 entries, got {}",
                v.len()
            ))),
        }
    }
}

fn default_t_id() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitsSection {
    pub t1_ns: PerQubit,
    pub t2_ns: PerQubit,
    #[serde(default = "default_t_id")]
    pub t_id_ns: f64,
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub stochastic_dephasing: bool,
}

impl QubitsSection {
    /// Backend qubits whose own decay equals one radical's target decay.
    pub fn matched(spec: &SpinSystemSpec) -> Self {
        Self {
            t1_ns: PerQubit::Both(2.0 * spec.t1_ns),
            t2_ns: PerQubit::Both(2.0 * spec.t2_ns),
            t_id_ns: default_t_id(),
            drift: 0.0,
            stochastic_dephasing: false,
        }
    }

    pub fn noise_model(&self) -> Result<NoiseModel, CliError> {
        let t1 = self.t1_ns.values("t1_ns")?;
        let t2 = self.t2_ns.values("t2_ns")?;
        let nm = NoiseModel {
            qubits: vec![QubitTimes::new(t1[0], t2[0]), QubitTimes::new(t1[1], t2[1])],
            t_id: self.t_id_ns,
            drift: self.drift,
            stochastic_dephasing: self.stochastic_dephasing,
        };
        nm.validate(2).map_err(cfg_err)?;
        Ok(nm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSection {
    pub fn default_for(dps: bool) -> Self {
        Self {
            start: 0.0,
            stop: if dps { 60.0 } else { 100.0 },
            points: 121,
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0
            || !(self.start >= 0.0)
            || !(self.stop >= self.start)
            || !self.stop.is_finite()
        {
            return Err(cfg_err(format!(
                "grid needs 0 <= start <= stop and points > 0 (got {} .. {}, {} points)",
                self.start, self.stop, self.points
            )));
        }
        Ok(experiments::linspace(self.start, self.stop, self.points))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Previously written `simulate` outputs to combine instead of running.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FtChoice {
    Named(String),
    Params(FtParams),
}

impl FtChoice {
    fn params(&self) -> Result<FtParams, CliError> {
        match self {
            FtChoice::Named(n) if n == "tmp" => Ok(FtParams::TMP),
            FtChoice::Named(n) if n == "dps" => Ok(FtParams::DPS),
            FtChoice::Named(n) => Err(cfg_err(format!(
                "unknown F(t) parameter set `{n}` (tmp, dps)"
            ))),
            FtChoice::Params(p) => {
                p.validate().map_err(cfg_err)?;
                Ok(*p)
            }
        }
    }
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStudySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ft: Option<FtChoice>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default)]
    pub method: MethodSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<QubitsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mfe: Option<MfeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_study: Option<NoiseStudySection>,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

/// Parse TOML, or the `# ` header of a CSV written by this tool.
pub fn parse(text: &str, csv: bool) -> Result<RunConfig, CliError> {
    let body = if csv {
        text.lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| {
                l.strip_prefix("# ")
                    .or_else(|| l.strip_prefix('#'))
                    .unwrap_or(l)
            })
            .collect::<Vec<_>>()
            .join("\n")
    } else {
        text.to_string()
    };
    toml::from_str(&body).map_err(|e| cfg_err(format!("invalid config: {e}")))
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
    let csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    parse(&text, csv)
}

/// Fold command-line flags into the config.
pub fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(s) = o.shots {
        cfg.method.shots = s;
    }
    if let Some(p) = &o.out {
        cfg.output.csv = Some(p.clone());
    }
    if o.svg && cfg.output.svg.is_none() {
        cfg.output.svg = Some(match &cfg.output.csv {
            Some(p) => p.with_extension("svg"),
            None => PathBuf::from("spinbeats.svg"),
        });
    }
}

pub fn to_toml(cfg: &RunConfig) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
}

fn method_config(m: &MethodSection, qubits: NoiseModel) -> Result<MethodConfig, CliError> {
    let cfg = MethodConfig {
        method: m.name,
        shots: m.shots,
        n_echo: m.n_echo,
        qubits,
        kraus: KrausOptions {
            ancilla: m.ancilla,
            variant: match m.variant {
                VariantName::Weighted => KrausVariant::Weighted,
                VariantName::RandomRotation => KrausVariant::RandomRotation,
            },
            ..Default::default()
        },
        simplified: m.simplified,
    };
    cfg.validate().map_err(cfg_err)?;
    Ok(cfg)
}

/// Everything `simulate` needs, plus the resolved config for the header.
#[derive(Debug, Clone)]
pub struct SimulatePlan {
    pub spec: SpinSystemSpec,
    pub method: MethodConfig,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub resolved: RunConfig,
}

fn resolve_qubits(
    cfg: &RunConfig,
    spec: &SpinSystemSpec,
) -> Result<(QubitsSection, NoiseModel), CliError> {
    let section = cfg
        .qubits
        .clone()
        .unwrap_or_else(|| QubitsSection::matched(spec));
    let nm = section.noise_model()?;
    Ok((section, nm))
}

pub fn plan_simulate(cfg: &RunConfig) -> Result<SimulatePlan, CliError> {
    let system = cfg
        .system
        .as_ref()
        .ok_or_else(|| cfg_err("missing [system] section"))?;
    let spec = system.resolve()?;
    let (qsec, qubits) = resolve_qubits(cfg, &spec)?;
    let method = method_config(&cfg.method, qubits)?;
    let gsec = cfg
        .grid
        .clone()
        .unwrap_or_else(|| GridSection::default_for(system.is_dps_like(&spec)));
    let grid = gsec.times()?;
    let mut resolved = cfg.clone();
    // output paths belong to this invocation, not to the run
    resolved.output = OutputSection::default();
    resolved.system = Some(SystemConfig::resolved(system.preset, &spec));
    resolved.qubits = Some(qsec);
    resolved.grid = Some(gsec);
    resolved.mfe = None;
    resolved.noise_study = None;
    Ok(SimulatePlan {
        spec,
        method,
        grid,
        seed: cfg.seed,
        resolved,
    })
}

/// Where the two yield series for `mfe` come from.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // built once per run
pub enum MfeSource {
    Run {
        low: SpinSystemSpec,
        high: SpinSystemSpec,
        method: MethodConfig,
        /// Backend qubits for each field (matched to each system when unset).
        qubits_high: NoiseModel,
        grid: Vec<f64>,
    },
    Files {
        low: PathBuf,
        high: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct MfePlan {
    pub source: MfeSource,
    pub theta: f64,
    pub seed: u64,
    pub resolved: RunConfig,
}

pub fn plan_mfe(cfg: &RunConfig) -> Result<MfePlan, CliError> {
    let sec = cfg
        .mfe
        .clone()
        .ok_or_else(|| cfg_err("missing [mfe] section"))?;
    let mut resolved = cfg.clone();
    // output paths belong to this invocation, not to the run
    resolved.output = OutputSection::default();
    resolved.noise_study = None;
    if let (Some(low), Some(high)) = (&sec.low_csv, &sec.high_csv) {
        let theta = sec
            .theta
            .ok_or_else(|| cfg_err("mfe from CSV files needs `theta`"))?;
        check_theta(theta)?;
        resolved.system = None;
        resolved.qubits = None;
        resolved.grid = None;
        return Ok(MfePlan {
            source: MfeSource::Files {
                low: low.clone(),
                high: high.clone(),
            },
            theta,
            seed: cfg.seed,
            resolved,
        });
    }
    let (Some(low_cfg), Some(high_cfg)) = (&sec.low, &sec.high) else {
        return Err(cfg_err(
            "[mfe] needs `low` and `high` systems, or `low_csv` and `high_csv`",
        ));
    };
    let low = low_cfg.resolve()?;
    let high = high_cfg.resolve()?;
    let theta = sec.theta.unwrap_or(high.theta);
    check_theta(theta)?;
    let (qsec_low, qubits_low) = resolve_qubits(cfg, &low)?;
    let (_, qubits_high) = resolve_qubits(cfg, &high)?;
    let method = method_config(&cfg.method, qubits_low)?;
    let gsec = cfg
        .grid
        .clone()
        .unwrap_or_else(|| GridSection::default_for(low_cfg.is_dps_like(&low)));
    let grid = gsec.times()?;
    resolved.system = None;
    resolved.grid = Some(gsec);
    if cfg.qubits.is_some() {
        resolved.qubits = Some(qsec_low);
    }
    resolved.mfe = Some(MfeSection {
        low: Some(SystemConfig::resolved(low_cfg.preset, &low)),
        high: Some(SystemConfig::resolved(high_cfg.preset, &high)),
        theta: Some(theta),
        low_csv: None,
        high_csv: None,
    });
    Ok(MfePlan {
        source: MfeSource::Run {
            low,
            high,
            method,
            qubits_high,
            grid,
        },
        theta,
        seed: cfg.seed,
        resolved,
    })
}

fn check_theta(theta: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(cfg_err(format!("theta = {theta} outside [0, 1]")))
    }
}

#[derive(Debug, Clone)]
pub struct NoisePlan {
    pub low: SpinSystemSpec,
    pub high: SpinSystemSpec,
    pub ft: FtParams,
    pub theta: f64,
    pub study: NoiseStudyConfig,
    pub grid: Vec<f64>,
    pub resolved: RunConfig,
}

pub fn plan_noise_study(cfg: &RunConfig) -> Result<NoisePlan, CliError> {
    let sec = cfg
        .mfe
        .clone()
        .ok_or_else(|| cfg_err("noise-study needs an [mfe] section with `low` and `high`"))?;
    let (Some(low_cfg), Some(high_cfg)) = (&sec.low, &sec.high) else {
        return Err(cfg_err("noise-study needs [mfe] `low` and `high` systems"));
    };
    let low = low_cfg.resolve()?;
    let high = high_cfg.resolve()?;
    let theta = sec.theta.unwrap_or(high.theta);
    check_theta(theta)?;
    let dps = low_cfg.is_dps_like(&low);
    let ns = cfg.noise_study.clone().unwrap_or(NoiseStudySection {
        sigma: None,
        mu: 0.0,
        trials: default_trials(),
        ft: None,
    });
    let ft_choice = ns
        .ft
        .clone()
        .unwrap_or_else(|| FtChoice::Named(if dps { "dps" } else { "tmp" }.into()));
    let ft = ft_choice.params()?;
    let sigma = ns.sigma.unwrap_or(if dps {
        NoiseStudyConfig::DPS_SIGMA
    } else {
        NoiseStudyConfig::TMP_SIGMA
    });
    let study = NoiseStudyConfig {
        sigma,
        mu: ns.mu,
        trials: ns.trials,
        seed: cfg.seed,
    };
    study.validate().map_err(cfg_err)?;
    let gsec = cfg
        .grid
        .clone()
        .unwrap_or_else(|| GridSection::default_for(dps));
    let grid = gsec.times()?;

    let mut resolved = cfg.clone();
    // output paths belong to this invocation, not to the run
    resolved.output = OutputSection::default();
    resolved.system = None;
    resolved.qubits = None;
    resolved.grid = Some(gsec);
    resolved.mfe = Some(MfeSection {
        low: Some(SystemConfig::resolved(low_cfg.preset, &low)),
        high: Some(SystemConfig::resolved(high_cfg.preset, &high)),
        theta: Some(theta),
        low_csv: None,
        high_csv: None,
    });
    resolved.noise_study = Some(NoiseStudySection {
        sigma: Some(sigma),
        mu: ns.mu,
        trials: ns.trials,
        ft: Some(FtChoice::Params(ft)),
    });
    Ok(NoisePlan {
        low,
        high,
        ft,
        theta,
        study,
        grid,
        resolved,
    })
}
