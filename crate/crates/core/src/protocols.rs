//! Ways of putting radical-pair relaxation onto a (simulated) qubit register.
//!
//! * **Kraus**: encode `S(t)` into two qubits, apply single-qubit zero
//!   temperature damping explicitly (exact channel, or an ancilla circuit),
//!   and emulate dephasing by mixing runs with and without a Z gate.
//! * **Inherent**: let the backend qubits decay during idle identity gates
//!   whose count is chosen to match the target relaxation; X⊗X echo pulses
//!   symmetrize zero-temperature decay and cancel frequency drift.
//! * **Correction**: measure a reference singlet under the same noise and
//!   combine populations classically, either adding or removing relaxation.
//!
//! Measurement uses the map `CX(0→1)` then `H` on qubit 0, which sends
//! `|S> → |11>`, `|T0> → |01>` and spreads `|T±>` over `00`/`10`. The two
//! triplet-polarized populations are therefore only known as a sum and are
//! reported as equal halves.
//!
//! # Encoding
//!
//! The two-qubit encoding of a singlet yield `S` prepares
//! `√S |S> − i √(1−S) |T0>`. The relative phase `−i` is what unitary
//! evolution from a singlet produces for a `T0` admixture, and it gives equal
//! `|01>`/`|10>` populations; with a real relative phase those populations
//! differ and single-qubit damping no longer reproduces the two-radical
//! result.
//!
//! # Idle count
//!
//! `N = t · T_qu / (T_rp · t_id)` where `T_rp` is the per-radical target time
//! (twice the mean of the finite pair times) and `T_qu` the mean of the
//! matching backend times (T1 only counts when the target T1 is finite, same
//! for T2). `N` is rounded to a multiple of `2n` so the echo schedule
//! `(k + ½) t / n` falls on whole identity gates; the relaxation actually
//! simulated then corresponds to `t_eff = N t_id T_rp / T_qu`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{self, PzConvention};
use crate::circuits::{self, Circuit, Gate, NoiseModel};
use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::spinsys::{self, SpinDynamics, SpinSystemSpec};
use crate::sweep;

/// Electronic populations in the singlet/triplet basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub s: f64,
    pub t0: f64,
    pub tplus: f64,
    pub tminus: f64,
}

impl Populations {
    pub const SINGLET: Populations = Populations {
        s: 1.0,
        t0: 0.0,
        tplus: 0.0,
        tminus: 0.0,
    };
    pub const EQUILIBRIUM: Populations = Populations {
        s: 0.25,
        t0: 0.25,
        tplus: 0.25,
        tminus: 0.25,
    };

    pub fn new(s: f64, t0: f64, tplus: f64, tminus: f64) -> Result<Self> {
        let p = Self {
            s,
            t0,
            tplus,
            tminus,
        };
        p.validate(1e-10)?;
        Ok(p)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let named: [(&'static str, f64); 4] = [
            ("S", self.s),
            ("T0", self.t0),
            ("T+", self.tplus),
            ("T-", self.tminus),
        ];
        for (name, v) in named {
            if !(v >= -tol && v <= 1.0 + tol) {
                return Err(Error::ProbabilityOutOfRange {
                    name,
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        if (self.sum() - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "populations sum to {}",
                self.sum()
            )));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.s + self.t0 + self.tplus + self.tminus
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s, self.t0, self.tplus, self.tminus]
    }

    /// Overlaps of a two-electron state with `S, T0, T+, T−`.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "state of dim {}",
                rho.dim()
            )));
        }
        Ok(Self {
            s: rho.overlap(&spinsys::singlet()),
            t0: rho.overlap(&spinsys::triplet_zero()),
            tplus: rho.overlap(&spinsys::triplet_plus()),
            tminus: rho.overlap(&spinsys::triplet_minus()),
        })
    }

    /// From probabilities of `00, 01, 10, 11` after the measurement map.
    pub fn from_measured(p: &[f64; 4]) -> Self {
        let tpm = 0.5 * (p[0] + p[2]);
        Self {
            s: p[3],
            t0: p[1],
            tplus: tpm,
            tminus: tpm,
        }
    }
}

/// `S̃ = S S' + T0 T0' + T+ T+' + T− T−'`.
pub fn correction_combine(run: &Populations, corr: &Populations) -> f64 {
    run.s * corr.s + run.t0 * corr.t0 + run.tplus * corr.tplus + run.tminus * corr.tminus
}

/// Full population map of a correction: `S̃ − T̃0 = (S − T0)(S' − T0')`,
/// `T̃± = T± + T±' − 4 T± T±'`, normalization fixes `S̃ + T̃0`. Its singlet
/// component agrees with [`correction_combine`] whenever `T+ = T−` in both
/// arguments.
pub fn correction_apply(run: &Populations, corr: &Populations) -> Populations {
    let tp = run.tplus + corr.tplus - 4.0 * run.tplus * corr.tplus;
    let tm = run.tminus + corr.tminus - 4.0 * run.tminus * corr.tminus;
    let diff = (run.s - run.t0) * (corr.s - corr.t0);
    let total = 1.0 - tp - tm;
    Populations {
        s: 0.5 * (total + diff),
        t0: 0.5 * (total - diff),
        tplus: tp,
        tminus: tm,
    }
}

const SINGULAR_TOL: f64 = 1e-9;

/// Inverse of [`correction_apply`]: remove the relaxation described by `corr`.
pub fn correction_undo(damped: &Populations, corr: &Populations) -> Result<Populations> {
    let solve_t = |damped_t: f64, corr_t: f64, name: &str| -> Result<f64> {
        let den = 1.0 - 4.0 * corr_t;
        if den.abs() < SINGULAR_TOL {
            return Err(Error::SingularCorrection(format!(
                "corrector {name} = {corr_t} is at the equilibrium value 1/4"
            )));
        }
        Ok((damped_t - corr_t) / den)
    };
    let tp = solve_t(damped.tplus, corr.tplus, "T+")?;
    let tm = solve_t(damped.tminus, corr.tminus, "T-")?;
    let den = corr.s - corr.t0;
    if den.abs() < SINGULAR_TOL {
        return Err(Error::SingularCorrection(format!(
            "corrector has S' = T0' = {} (coherence fully lost)",
            corr.s
        )));
    }
    let diff = (damped.s - damped.t0) / den;
    let total = 1.0 - tp - tm;
    Ok(Populations {
        s: 0.5 * (total + diff),
        t0: 0.5 * (total - diff),
        tplus: tp,
        tminus: tm,
    })
}

/// Undo the backend's decoherence with `corr_inherent`, then apply the
/// target relaxation carried by `corr_kraus`.
pub fn double_correction(
    run_inherent: &Populations,
    corr_inherent: &Populations,
    corr_kraus: &Populations,
) -> Result<f64> {
    let clean = correction_undo(run_inherent, corr_inherent)?;
    Ok(correction_combine(&clean, corr_kraus))
}

/// Shortcut when the target has no longitudinal relaxation and the backend
/// coherence already matches the target T2: `S̃ = P(S) + P(T±)` with the
/// triplet-polarized population taken from the inherent corrector.
pub fn double_correction_simplified(
    run_inherent: &Populations,
    corr_inherent: &Populations,
) -> f64 {
    run_inherent.s + 0.5 * (corr_inherent.tplus + corr_inherent.tminus)
}

/// `M = (4θ S_B + 1 − θ) / (4θ S_0 + 1 − θ)`.
pub fn tr_mfe(s_b: f64, s_0: f64, theta: f64) -> f64 {
    (4.0 * theta * s_b + 1.0 - theta) / (4.0 * theta * s_0 + 1.0 - theta)
}

/// Fluorescence `F (θ S + (1 − θ)/4)`.
pub fn intensity(f: f64, s: f64, theta: f64) -> f64 {
    f * (theta * s + 0.25 * (1.0 - theta))
}

fn check_echo(n_echo: usize) -> Result<()> {
    if n_echo < 2 || !n_echo.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "echo count must be even and at least 2, got {n_echo}"
        )));
    }
    Ok(())
}

/// Signed single-qubit echo residual
/// `(e^{-t/T1} − 1) sinh²(t/(4 n T1)) / cosh(t/(2 n T1))`.
pub fn echo_amplitude(t: f64, t1: f64, n_echo: usize) -> Result<f64> {
    check_echo(n_echo)?;
    if t1.is_infinite() || t == 0.0 {
        return Ok(0.0);
    }
    let n = n_echo as f64;
    let x = t / (4.0 * n * t1);
    Ok((-t / t1).exp_m1() * x.sinh().powi(2) / (2.0 * x).cosh())
}

/// Square of [`echo_amplitude`]: the gap between the echoed estimate and the
/// fully symmetrized relaxed yield when both radicals decay with `t1`.
pub fn echo_deviation(t: f64, t1: f64, n_echo: usize) -> Result<f64> {
    Ok(echo_amplitude(t, t1, n_echo)?.powi(2))
}

/// Estimate returned by every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Relaxed singlet yield as measured (for the inherent method, the raw
    /// echoed value).
    pub value: f64,
    pub stderr: f64,
    pub shots: u64,
    pub populations: Populations,
    /// Identity gates per qubit (inherent methods).
    pub n_identity: usize,
    /// Relaxation time actually emulated.
    pub t_eff: f64,
    /// Additive echo term: `value + echo_term` is the symmetrized estimate.
    pub echo_term: f64,
}

impl Estimate {
    pub fn echo_corrected(&self) -> f64 {
        self.value + self.echo_term
    }
}

/// Relaxation the methods should inject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub t1: f64,
    pub t2: f64,
    pub sigma: f64,
}

impl Target {
    pub fn of(spec: &SpinSystemSpec) -> Self {
        Self {
            t1: spec.t1_ns,
            t2: spec.t2_ns,
            sigma: spec.sigma.unwrap_or(0.0),
        }
    }

    /// Relaxed yield from the isolated one.
    pub fn closed_form(&self, s: f64, t: f64) -> f64 {
        channels::relaxed_gaussian(s, t, self.t1, self.t2, self.sigma)
    }

    /// Dephasing weight for the single-qubit zero-temperature emulation.
    fn weights(&self, t: f64, convention: PzConvention) -> Result<(f64, f64)> {
        let p = channels::decay_params_with(t, self.t1, self.t2, convention)?;
        if self.sigma == 0.0 {
            return Ok((p.p_x, p.p_z));
        }
        let extra = -self.sigma * self.sigma * t * t;
        let exponent = match convention {
            PzConvention::Derived => (t / (2.0 * self.t1) - t / self.t2 + extra).min(0.0),
            PzConvention::Printed => -t * (1.0 / (2.0 * self.t1) + 1.0 / self.t2) + extra,
        };
        Ok((p.p_x, -0.5 * exponent.exp_m1()))
    }
}

/// How dephasing is emulated in the Kraus method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KrausVariant {
    /// Two circuit families, with and without Z, combined with weight `p_z`.
    #[default]
    Weighted,
    /// One circuit family; every shot applies `Rz(θ)` with random θ.
    RandomRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KrausOptions {
    /// Realize damping with an ancilla (`CRy` + `CX`) rather than the exact
    /// channel.
    pub ancilla: bool,
    pub variant: KrausVariant,
    pub convention: PzConvention,
}

/// `Ry(2 acos √S)`, `X⊗X`, `Rz(π/2)`, `H`, `CX`: prepares
/// `√S|S> − i√(1−S)|T0>` from `|00>` on qubits 0 and 1.
pub fn encoding_gates(s: f64) -> Result<Vec<Gate>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ProbabilityOutOfRange {
            name: "S",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(vec![
        Gate::ry(0, 2.0 * s.sqrt().acos()),
        Gate::x(0),
        Gate::x(1),
        Gate::rz(0, std::f64::consts::FRAC_PI_2),
        Gate::h(0),
        Gate::cx(0, 1),
    ])
}

/// `|00> → |S>`.
pub fn singlet_prep_gates() -> Vec<Gate> {
    vec![Gate::x(0), Gate::x(1), Gate::h(0), Gate::cx(0, 1)]
}

/// `|S> → |11>`, `|T0> → |01>`.
pub fn measurement_gates() -> Vec<Gate> {
    vec![Gate::cx(0, 1), Gate::h(0)]
}

/// Probabilities of `00, 01, 10, 11` on qubits 0, 1, ancillas summed out.
fn pair_probs(rho: &DensityMatrix) -> [f64; 4] {
    let p = circuits::probabilities(rho);
    let shift = p.len().trailing_zeros() - 2;
    let mut out = [0.0; 4];
    for (i, x) in p.iter().enumerate() {
        out[i >> shift] += x;
    }
    out
}

fn tail(nq: usize, first: Option<Gate>) -> Circuit {
    let mut c = Circuit::new(nq);
    c.extend(first);
    c.extend(measurement_gates());
    c
}

#[derive(Debug, Clone, Copy)]
struct Stratum {
    weight: f64,
    freqs: [f64; 4],
    shots: u64,
}

/// Measured pair probabilities plus how they were sampled.
#[derive(Debug, Clone)]
struct Measured {
    probs: [f64; 4],
    strata: Vec<Stratum>,
}

impl Measured {
    fn exact(probs: [f64; 4]) -> Self {
        Self {
            probs,
            strata: Vec::new(),
        }
    }

    fn sampled(probs: &[f64; 4], shots: u64, seed: u64) -> Result<Self> {
        let r = circuits::sample_probabilities(probs, 2, shots, seed)?;
        let f = r.frequencies(2);
        let freqs = [f[0], f[1], f[2], f[3]];
        Ok(Self {
            probs: freqs,
            strata: vec![Stratum {
                weight: 1.0,
                freqs,
                shots,
            }],
        })
    }

    fn shots(&self) -> u64 {
        self.strata.iter().map(|s| s.shots).sum()
    }

    fn populations(&self) -> Populations {
        Populations::from_measured(&self.probs)
    }
}

/// Linearized standard error of `f` over independently sampled inputs.
fn delta_stderr<F>(inputs: &[&Measured], f: F) -> f64
where
    F: Fn(&[[f64; 4]]) -> Option<f64>,
{
    let base: Vec<[f64; 4]> = inputs.iter().map(|m| m.probs).collect();
    let h = 1e-6;
    let mut var = 0.0;
    for (k, m) in inputs.iter().enumerate() {
        if m.strata.is_empty() {
            continue;
        }
        let mut grad = [0.0; 4];
        for (j, g) in grad.iter_mut().enumerate() {
            let mut up = base.clone();
            let mut dn = base.clone();
            up[k][j] += h;
            dn[k][j] -= h;
            match (f(&up), f(&dn)) {
                (Some(a), Some(b)) => *g = (a - b) / (2.0 * h),
                _ => return f64::NAN,
            }
        }
        for s in &m.strata {
            let mut q = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    let cov = (if i == j { s.freqs[i] } else { 0.0 }) - s.freqs[i] * s.freqs[j];
                    q += grad[i] * grad[j] * cov;
                }
            }
            var += s.weight * s.weight * q / s.shots as f64;
        }
    }
    var.max(0.0).sqrt()
}

fn branch_split(w: f64, shots: u64) -> (u64, u64) {
    if w <= 0.0 {
        return (0, shots);
    }
    if w >= 1.0 {
        return (shots, 0);
    }
    let nz = ((w * shots as f64).round() as u64).clamp(1, shots.saturating_sub(1).max(1));
    (nz, shots - nz)
}

fn kraus_measure(
    s: f64,
    t: f64,
    target: &Target,
    shots: u64,
    seed: u64,
    opts: &KrausOptions,
) -> Result<Measured> {
    let (p_x, w_z) = target.weights(t, opts.convention)?;
    let encoding = encoding_gates(s)?;
    let (nq, pre) = if opts.ancilla {
        let mut c = Circuit::new(3);
        c.extend(encoding);
        c.push(Gate::cry(0, 2, 2.0 * p_x.sqrt().asin()));
        c.push(Gate::cx(2, 0));
        (3, circuits::run_density(&c, None)?)
    } else {
        let mut c = Circuit::new(2);
        c.extend(encoding);
        let rho = circuits::run_density(&c, None)?;
        (
            2,
            channels::apply_channel(&channels::amplitude_damping(p_x)?, &rho, &[0])?,
        )
    };
    let branch = |first: Option<Gate>| -> Result<[f64; 4]> {
        Ok(pair_probs(&circuits::run_density_from(
            &tail(nq, first),
            &pre,
            None,
        )?))
    };
    let p_plain = branch(None)?;
    let p_z = branch(Some(Gate::z(0)))?;
    let mixed: [f64; 4] = std::array::from_fn(|i| w_z * p_z[i] + (1.0 - w_z) * p_plain[i]);

    if shots == 0 {
        return Ok(Measured::exact(mixed));
    }
    match opts.variant {
        KrausVariant::Weighted => {
            let (nz, nplain) = branch_split(w_z, shots);
            let mut strata = Vec::new();
            let mut probs = [0.0; 4];
            for (k, (weight, p, n)) in [(w_z, p_z, nz), (1.0 - w_z, p_plain, nplain)]
                .into_iter()
                .enumerate()
            {
                if n == 0 {
                    continue;
                }
                let m = Measured::sampled(&p, n, sweep::derive_seed(seed, k as u64))?;
                for (acc, x) in probs.iter_mut().zip(m.probs) {
                    *acc += weight * x;
                }
                strata.push(Stratum {
                    weight,
                    ..m.strata[0]
                });
            }
            Ok(Measured { probs, strata })
        }
        KrausVariant::RandomRotation => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = [0u64; 4];
            for _ in 0..shots {
                let theta = circuits::stochastic_rz_dephasing(w_z, &mut rng)?;
                let p = branch(Some(Gate::rz(0, theta)))?;
                let k = circuits::multinomial(&p, 1, &mut rng)?;
                let idx = k.iter().position(|&c| c == 1).unwrap_or(3);
                counts[idx] += 1;
            }
            let freqs = counts.map(|c| c as f64 / shots as f64);
            Ok(Measured {
                probs: freqs,
                strata: vec![Stratum {
                    weight: 1.0,
                    freqs,
                    shots,
                }],
            })
        }
    }
}

/// Kraus method with default options and no Gaussian dephasing.
pub fn kraus_method(s: f64, t: f64, t1: f64, t2: f64, shots: u64, seed: u64) -> Result<Estimate> {
    kraus_method_with(
        s,
        t,
        &Target { t1, t2, sigma: 0.0 },
        shots,
        seed,
        &KrausOptions::default(),
    )
}

/// Relaxed singlet yield of an isolated yield `s` at time `t`, emulated with
/// one damped qubit.
pub fn kraus_method_with(
    s: f64,
    t: f64,
    target: &Target,
    shots: u64,
    seed: u64,
    opts: &KrausOptions,
) -> Result<Estimate> {
    let m = kraus_measure(s, t, target, shots, seed, opts)?;
    let stderr = delta_stderr(&[&m], |p| Some(p[0][3]));
    Ok(Estimate {
        value: m.probs[3],
        stderr,
        shots: m.shots(),
        populations: m.populations(),
        n_identity: 0,
        t_eff: t,
        echo_term: 0.0,
    })
}

/// Idle schedule derived from the target and backend times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdlePlan {
    pub n_identity: usize,
    pub t_eff: f64,
    pub n_echo: usize,
}

fn finite_mean(xs: &[f64]) -> Option<f64> {
    let v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn idle_plan(t: f64, target: &Target, qubits: &NoiseModel, n_echo: usize) -> Result<IdlePlan> {
    check_echo(n_echo)?;
    qubits.validate(2)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let none = IdlePlan {
        n_identity: 0,
        t_eff: 0.0,
        n_echo,
    };
    let Some(t_pair) = finite_mean(&[target.t1, target.t2]) else {
        return Ok(none);
    };
    let t_rp = 2.0 * t_pair;
    let mut backend = Vec::new();
    for q in &qubits.qubits[..2] {
        if target.t1.is_finite() {
            backend.push(q.t1);
        }
        if target.t2.is_finite() {
            backend.push(q.t2);
        }
    }
    if backend.iter().any(|x| x.is_infinite()) {
        return Ok(none);
    }
    let t_qu = backend.iter().sum::<f64>() / backend.len() as f64;
    let raw = t * t_qu / (t_rp * qubits.t_id);
    let block = 2 * n_echo;
    let n = ((raw / block as f64).round() as usize) * block;
    Ok(IdlePlan {
        n_identity: n,
        t_eff: n as f64 * qubits.t_id * t_rp / t_qu,
        n_echo,
    })
}

/// `N/(2n)` idles, then `n − 1` rounds of `X⊗X` + `N/n` idles, then `X⊗X`
/// and `N/(2n)` idles.
pub fn echo_idle_gates(plan: &IdlePlan, t_id: f64) -> Vec<Gate> {
    let mut gates = Vec::new();
    if plan.n_identity == 0 {
        return gates;
    }
    let half = plan.n_identity / (2 * plan.n_echo);
    let idle = |gates: &mut Vec<Gate>, k: usize| {
        for _ in 0..k {
            gates.push(Gate::id(0, t_id));
            gates.push(Gate::id(1, t_id));
        }
    };
    idle(&mut gates, half);
    for k in 0..plan.n_echo {
        gates.push(Gate::x(0));
        gates.push(Gate::x(1));
        idle(
            &mut gates,
            if k + 1 == plan.n_echo { half } else { 2 * half },
        );
    }
    gates
}

/// Pre-idle preparation: the DPS-style rotation circuit for specs without
/// hyperfine terms, otherwise the encoding of the exact `S(t)`.
fn preparation(dynamics: &SpinDynamics, t: f64) -> Result<Vec<Gate>> {
    let spec = dynamics.spec();
    if spec.has_hfc() {
        encoding_gates(dynamics.singlet_probability(t).clamp(0.0, 1.0))
    } else {
        let (w1, w2) = spec.larmor();
        let mut g = singlet_prep_gates();
        g.push(Gate::rz(0, w1 * t));
        g.push(Gate::rz(1, w2 * t));
        Ok(g)
    }
}

fn inherent_measure(
    prep: Vec<Gate>,
    plan: &IdlePlan,
    qubits: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Measured> {
    let mut c = Circuit::new(2);
    c.extend(prep);
    c.extend(echo_idle_gates(plan, qubits.t_id));
    c.extend(measurement_gates());
    let probs = pair_probs(&circuits::run_density(&c, Some(qubits))?);
    if shots == 0 {
        Ok(Measured::exact(probs))
    } else {
        Measured::sampled(&probs, shots, seed)
    }
}

fn echo_term(plan: &IdlePlan, qubits: &NoiseModel) -> Result<f64> {
    let d = plan.n_identity as f64 * qubits.t_id;
    let x0 = echo_amplitude(d, qubits.qubits[0].t1, plan.n_echo)?;
    let x1 = echo_amplitude(d, qubits.qubits[1].t1, plan.n_echo)?;
    Ok(x0 * x1)
}

/// Relaxed singlet yield emulated by the backend's own idle decay.
pub fn inherent_method(
    dynamics: &SpinDynamics,
    t: f64,
    qubits: &NoiseModel,
    n_echo: usize,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    if dynamics.spec().sigma.is_some_and(|s| s > 0.0) {
        return Err(Error::InvalidParameter(
            "Gaussian dephasing cannot come from backend idling; use the kraus or inherent+correction method".into(),
        ));
    }
    let plan = idle_plan(t, &Target::of(dynamics.spec()), qubits, n_echo)?;
    let m = inherent_measure(preparation(dynamics, t)?, &plan, qubits, shots, seed)?;
    Ok(Estimate {
        value: m.probs[3],
        stderr: delta_stderr(&[&m], |p| Some(p[0][3])),
        shots: m.shots(),
        populations: m.populations(),
        n_identity: plan.n_identity,
        t_eff: plan.t_eff,
        echo_term: echo_term(&plan, qubits)?,
    })
}

/// Inherent run plus two correctors: a singlet under the same backend noise
/// (to undo it) and a Kraus-method singlet (to apply the target relaxation).
/// With `simplified`, only the backend corrector is used.
pub fn inherent_correction_method(
    dynamics: &SpinDynamics,
    t: f64,
    qubits: &NoiseModel,
    n_echo: usize,
    shots: u64,
    seed: u64,
    simplified: bool,
) -> Result<Estimate> {
    let target = Target::of(dynamics.spec());
    let plan = idle_plan(t, &target, qubits, n_echo)?;
    let run = inherent_measure(
        preparation(dynamics, t)?,
        &plan,
        qubits,
        shots,
        sweep::derive_seed(seed, 0),
    )?;
    let reference = if dynamics.spec().has_hfc() {
        encoding_gates(1.0)?
    } else {
        singlet_prep_gates()
    };
    let corr = inherent_measure(reference, &plan, qubits, shots, sweep::derive_seed(seed, 1))?;

    let (value, stderr, total) = if simplified {
        let f = |p: &[[f64; 4]]| {
            Some(double_correction_simplified(
                &Populations::from_measured(&p[0]),
                &Populations::from_measured(&p[1]),
            ))
        };
        let v = f(&[run.probs, corr.probs]).expect("total");
        (
            v,
            delta_stderr(&[&run, &corr], f),
            run.shots() + corr.shots(),
        )
    } else {
        let kraus = kraus_measure(
            1.0,
            t,
            &target,
            shots,
            sweep::derive_seed(seed, 2),
            &KrausOptions::default(),
        )?;
        let f = |p: &[[f64; 4]]| {
            double_correction(
                &Populations::from_measured(&p[0]),
                &Populations::from_measured(&p[1]),
                &Populations::from_measured(&p[2]),
            )
            .ok()
        };
        let v = double_correction(
            &run.populations(),
            &corr.populations(),
            &kraus.populations(),
        )?;
        (
            v,
            delta_stderr(&[&run, &corr, &kraus], f),
            run.shots() + corr.shots() + kraus.shots(),
        )
    };
    Ok(Estimate {
        value,
        stderr,
        shots: total,
        populations: run.populations(),
        n_identity: plan.n_identity,
        t_eff: t,
        echo_term: 0.0,
    })
}

/// `<S| E(E_U(ρ(0))) |S>` on the full electron+nuclear space, with the
/// infinite-temperature pair channel and optional Gaussian dephasing.
pub fn relaxed_singlet_exact(dynamics: &SpinDynamics, t: f64) -> Result<f64> {
    let spec = dynamics.spec();
    let dims = spec.dims();
    let mut rho = channels::pair_relaxation(
        &dynamics.full_state(t),
        &dims,
        t,
        spec.t1_ns,
        spec.t2_ns,
        0.5,
    )?;
    if let Some(sigma) = spec.sigma.filter(|&s| s > 0.0) {
        let p = channels::dephasing_for_factor((-0.5 * sigma * sigma * t * t).exp());
        let ch = channels::dephasing_kraus(p)?;
        rho = channels::apply_channel_on(&ch, &rho, &dims, &[0])?;
        rho = channels::apply_channel_on(&ch, &rho, &dims, &[1])?;
    }
    let electrons = crate::linalg::partial_trace(&rho, &dims, &[0, 1])?;
    Ok(electrons.overlap(&spinsys::singlet()))
}

/// Which method a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Kraus,
    Inherent,
    InherentCorrection,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Kraus => "kraus",
            Method::Inherent => "inherent",
            Method::InherentCorrection => "inherent-correction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    /// 0 = exact density-matrix probabilities.
    pub shots: u64,
    pub n_echo: usize,
    pub qubits: NoiseModel,
    pub kraus: KrausOptions,
    /// Use the single-corrector shortcut in the correction method.
    pub simplified: bool,
}

impl MethodConfig {
    pub fn exact(method: Method, qubits: NoiseModel) -> Self {
        Self {
            method,
            shots: 0,
            n_echo: 4,
            qubits,
            kraus: KrausOptions::default(),
            simplified: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method != Method::Kraus {
            check_echo(self.n_echo)?;
            self.qubits.validate(2)?;
        }
        Ok(())
    }
}

/// One grid point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub t: f64,
    pub estimate: Estimate,
    /// Closed-form relaxed yield from the exact `S(t)`.
    pub exact: f64,
    pub seed: u64,
}

pub fn estimate(
    dynamics: &SpinDynamics,
    cfg: &MethodConfig,
    t: f64,
    seed: u64,
) -> Result<Estimate> {
    match cfg.method {
        Method::Kraus => {
            let s = dynamics.singlet_probability(t).clamp(0.0, 1.0);
            kraus_method_with(
                s,
                t,
                &Target::of(dynamics.spec()),
                cfg.shots,
                seed,
                &cfg.kraus,
            )
        }
        Method::Inherent => inherent_method(dynamics, t, &cfg.qubits, cfg.n_echo, cfg.shots, seed),
        Method::InherentCorrection => inherent_correction_method(
            dynamics,
            t,
            &cfg.qubits,
            cfg.n_echo,
            cfg.shots,
            seed,
            cfg.simplified,
        ),
    }
}

/// Run every grid point (in parallel when enabled); seeds derive from `seed`
/// and the point index, so results do not depend on scheduling.
pub fn simulate(
    spec: &SpinSystemSpec,
    cfg: &MethodConfig,
    grid: &[f64],
    seed: u64,
) -> Result<Vec<TimePoint>> {
    spec.validate()?;
    cfg.validate()?;
    let dynamics = SpinDynamics::new(spec)?;
    let target = Target::of(spec);
    sweep::try_map(grid, |i, &t| {
        let point_seed = sweep::derive_seed(seed, i as u64);
        let estimate = estimate(&dynamics, cfg, t, point_seed)?;
        Ok(TimePoint {
            t,
            estimate,
            exact: target.closed_form(dynamics.singlet_probability(t), t),
            seed: point_seed,
        })
    })
}
