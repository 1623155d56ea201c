//! Numerical self-checks: channel structure, commutation, closed-form
//! agreement. Each check reports its worst deviation and a verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{self, DecayParams, PzConvention};
use crate::circuits::NoiseModel;
use crate::error::Result;
use crate::linalg::{self, DensityMatrix};
use crate::protocols::{self, KrausOptions, Populations, Target};
use crate::spinsys::{self, Preset, SpinDynamics, SpinSystemSpec};

/// How a deviation is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// Pass when `deviation < tol`.
    Below,
    /// Pass when `deviation > tol` (a property that must fail).
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tol: f64,
    pub expect: Expect,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, deviation: f64, tol: f64, expect: Expect) -> Self {
        let passed = match expect {
            Expect::Below => deviation < tol,
            Expect::Above => deviation > tol,
        };
        Self {
            name: name.to_string(),
            deviation,
            tol,
            expect,
            passed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// `Printed` injects the alternative sign of the dephasing exponent.
    pub convention: PzConvention,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            convention: PzConvention::Derived,
            seed: 20240601,
        }
    }
}

/// TMP relaxation used throughout the suite (equal times keep the closed
/// form exact in the presence of polarized triplet populations).
pub const TMP_TAU_NS: f64 = 40.0;

fn grid(stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| stop * i as f64 / (n - 1) as f64).collect()
}

fn presets() -> Result<Vec<SpinSystemSpec>> {
    Ok(vec![
        Preset::DpsLow.dps()?,
        Preset::DpsHigh.dps()?,
        Preset::TmpLow.tmp(TMP_TAU_NS, TMP_TAU_NS)?,
        Preset::TmpHigh.tmp(TMP_TAU_NS, TMP_TAU_NS)?,
    ])
}

pub fn completeness(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let p = DecayParams {
            p_x: rng.random(),
            p_z: 0.5 * rng.random::<f64>(),
            p_n: rng.random(),
        };
        worst = worst.max(channels::relaxation_channel(p)?.completeness_error());
    }
    Ok(Check::new(
        "kraus completeness (200 random relaxation channels)",
        worst,
        1e-12,
        Expect::Below,
    ))
}

pub fn damping_dephasing_commute(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let ex = channels::gad_kraus(rng.random(), rng.random())?;
        let ez = channels::dephasing_kraus(0.5 * rng.random::<f64>())?;
        let r = channels::commute_check(
            |r| ex.apply(r),
            |r| ez.apply(r),
            2,
            1,
            0.0,
            rng.random::<u64>() ^ k,
        )?;
        worst = worst.max(r.max_deviation);
    }
    Ok(Check::new(
        "E_x and E_z commute (100 draws)",
        worst,
        1e-12,
        Expect::Below,
    ))
}

/// `(p_n = ½ pair channel, reduced evolution)` and `(p_n = 1, reduced
/// evolution)` commutators on the TMP electronic space.
pub fn evolution_commutators(opts: &VerifyOptions) -> Result<(Check, Check)> {
    let mut inf_worst = 0.0_f64;
    let mut zero_worst = 0.0_f64;
    for (k, preset) in [Preset::TmpLow, Preset::TmpHigh].into_iter().enumerate() {
        let spec = preset.tmp(TMP_TAU_NS, 0.8 * TMP_TAU_NS)?;
        let dynamics = SpinDynamics::new(&spec)?;
        for (j, &t) in [3.0, 11.0, 27.0, 64.0].iter().enumerate() {
            let seed = opts.seed ^ ((k * 16 + j) as u64);
            let evolve = |r: &DensityMatrix| dynamics.evolve_electronic(r, t);
            let relax = |p_n: f64| {
                move |r: &DensityMatrix| {
                    channels::pair_relaxation_with(
                        r,
                        &[2, 2],
                        t,
                        spec.t1_ns,
                        spec.t2_ns,
                        p_n,
                        opts.convention,
                    )
                }
            };
            inf_worst = inf_worst.max(
                channels::commute_check(relax(0.5), evolve, 4, 20, 1e-10, seed)?.max_deviation,
            );
            zero_worst = zero_worst
                .max(channels::commute_check(relax(1.0), evolve, 4, 20, 1e-3, seed)?.max_deviation);
        }
    }
    Ok((
        Check::new(
            "infinite-temperature pair channel commutes with TMP evolution",
            inf_worst,
            1e-10,
            Expect::Below,
        ),
        Check::new(
            "zero-temperature pair channel does not commute with TMP evolution",
            zero_worst,
            1e-3,
            Expect::Above,
        ),
    ))
}

/// Single-qubit zero-temperature channel realizes `e^{-t/T1}` population
/// and `e^{-t/T2}` coherence decay.
pub fn decay_condition(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let t1 = rng.random_range(5.0..200.0);
        let t2 = rng.random_range(1.0..2.0 * t1);
        let t = rng.random_range(0.0..150.0);
        let p = channels::decay_params_with(t, t1, t2, opts.convention)?;
        let ch = channels::relaxation_channel(p)?;
        let rho = linalg::random_density_matrix(2, rng);
        let out = ch.apply(&rho)?;
        let (m, o) = (rho.matrix(), out.matrix());
        worst = worst
            .max((o[(1, 1)].re - (-t / t1).exp() * m[(1, 1)].re).abs())
            .max((o[(1, 0)] - m[(1, 0)] * (-t / t2).exp()).norm());
    }
    Ok(Check::new(
        "decay parameters reproduce T1 and T2",
        worst,
        1e-12,
        Expect::Below,
    ))
}

/// Full electron+nuclear pipeline and the Kraus method against the
/// closed-form relaxed yield, 50 times per preset.
pub fn closed_form_oracles(opts: &VerifyOptions) -> Result<(Check, Check)> {
    let mut pipe = 0.0_f64;
    let mut kraus = 0.0_f64;
    let kopts = KrausOptions {
        convention: opts.convention,
        ..Default::default()
    };
    for spec in presets()? {
        let dynamics = SpinDynamics::new(&spec)?;
        let target = Target::of(&spec);
        let dims = spec.dims();
        for t in grid(if spec.has_hfc() { 100.0 } else { 60.0 }, 50) {
            let s = dynamics.singlet_probability(t);
            let want = target.closed_form(s, t);
            let full = channels::pair_relaxation_with(
                &dynamics.full_state(t),
                &dims,
                t,
                spec.t1_ns,
                spec.t2_ns,
                0.5,
                opts.convention,
            )?;
            let got = linalg::partial_trace(&full, &dims, &[0, 1])?.overlap(&spinsys::singlet());
            pipe = pipe.max((got - want).abs());
            let k = protocols::kraus_method_with(s.clamp(0.0, 1.0), t, &target, 0, 0, &kopts)?;
            kraus = kraus.max((k.value - want).abs());
        }
    }
    Ok((
        Check::new(
            "full pipeline matches closed-form relaxed yield",
            pipe,
            1e-10,
            Expect::Below,
        ),
        Check::new(
            "kraus method matches closed-form relaxed yield",
            kraus,
            1e-10,
            Expect::Below,
        ),
    ))
}

/// Two-radical infinite-temperature channel and one-qubit zero-temperature
/// channel give the same singlet yield on evolved singlets.
pub fn single_qubit_reduction(opts: &VerifyOptions) -> Result<Check> {
    let mut worst = 0.0_f64;
    for spec in presets()? {
        let dynamics = SpinDynamics::new(&spec)?;
        for t in grid(60.0, 13) {
            let rho = dynamics.electronic_state(t);
            let two = channels::pair_relaxation_with(
                &rho,
                &[2, 2],
                t,
                spec.t1_ns,
                spec.t2_ns,
                0.5,
                opts.convention,
            )?;
            let p = channels::decay_params_with(t, spec.t1_ns, spec.t2_ns, opts.convention)?;
            let one = channels::apply_channel(&channels::relaxation_channel(p)?, &rho, &[0])?;
            let s = spinsys::singlet();
            worst = worst.max((two.overlap(&s) - one.overlap(&s)).abs());
        }
    }
    Ok(Check::new(
        "one-qubit zero-temperature channel reproduces pair singlet yield",
        worst,
        1e-10,
        Expect::Below,
    ))
}

/// Evolved TMP electronic state: equal polarized-triplet populations and no
/// coherence between the `{00, 11}` and `{01, 10}` blocks.
pub fn evolved_state_pattern() -> Result<Check> {
    let mut worst = 0.0_f64;
    for preset in [Preset::TmpLow, Preset::TmpHigh] {
        let dynamics = SpinDynamics::new(&preset.tmp(TMP_TAU_NS, TMP_TAU_NS)?)?;
        for t in grid(100.0, 21) {
            let rho = dynamics.electronic_state(t);
            let m = rho.matrix();
            worst = worst.max((m[(0, 0)] - m[(3, 3)]).norm());
            for (i, j) in [(0, 1), (0, 2), (3, 1), (3, 2)] {
                worst = worst.max(m[(i, j)].norm()).max(m[(j, i)].norm());
            }
        }
    }
    Ok(Check::new(
        "evolved TMP state has the symmetric block pattern",
        worst,
        1e-10,
        Expect::Below,
    ))
}

pub fn two_g_closed_form() -> Result<Check> {
    let mut worst = 0.0_f64;
    for preset in [Preset::DpsLow, Preset::DpsHigh] {
        let spec = preset.dps()?;
        let dynamics = SpinDynamics::new(&spec)?;
        for t in grid(60.0, 241) {
            worst = worst
                .max((dynamics.singlet_probability(t) - spinsys::analytic_two_g(&spec, t)?).abs());
        }
    }
    Ok(Check::new(
        "two-g singlet yield equals cos^2 closed form",
        worst,
        1e-10,
        Expect::Below,
    ))
}

pub fn correction_round_trip(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0_f64;
    let mut done = 0;
    while done < 1000 {
        let run = random_populations(rng);
        let corr = random_populations(rng);
        let damped = protocols::correction_apply(&run, &corr);
        let Ok(back) = protocols::correction_undo(&damped, &corr) else {
            continue;
        };
        if (corr.s - corr.t0).abs() < 1e-3 || (1.0 - 4.0 * corr.tplus).abs() < 1e-3 {
            continue;
        }
        for (a, b) in back.as_array().iter().zip(run.as_array()) {
            worst = worst.max((a - b).abs());
        }
        done += 1;
    }
    Ok(Check::new(
        "correction apply/undo round trip (1000 draws)",
        worst,
        1e-10,
        Expect::Below,
    ))
}

/// Random populations with `T+ = T−`.
pub fn random_populations<R: Rng + ?Sized>(rng: &mut R) -> Populations {
    let w: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let total: f64 = w.iter().sum();
    Populations {
        s: w[0] / total,
        t0: w[1] / total,
        tplus: 0.5 * w[2] / total,
        tminus: 0.5 * w[2] / total,
    }
}

pub fn echo_residual() -> Result<Check> {
    let spec = Preset::DpsHigh.dps()?;
    let dynamics = SpinDynamics::new(&spec)?;
    let target = Target::of(&spec);
    let qubits = NoiseModel::uniform(2, spec.t1_ns, spec.t2_ns, 0.05);
    let mut worst = 0.0_f64;
    for n in [2, 4, 8] {
        for t in grid(60.0, 13) {
            let e = protocols::inherent_method(&dynamics, t, &qubits, n, 0, 0)?;
            let want = target.closed_form(dynamics.singlet_probability(t), e.t_eff);
            let dev = (want - e.value).abs();
            let predicted = protocols::echo_deviation(e.t_eff, 2.0 * spec.t1_ns, n)?;
            worst = worst.max((dev - predicted).abs());
        }
    }
    Ok(Check::new(
        "echoed inherent method deviates by the echo residual",
        worst,
        1e-10,
        Expect::Below,
    ))
}

/// Every check, in a fixed order.
pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![
        completeness(&mut rng)?,
        damping_dephasing_commute(&mut rng)?,
        decay_condition(opts, &mut rng)?,
    ];
    let (inf, zero) = evolution_commutators(opts)?;
    checks.push(inf);
    checks.push(zero);
    let (pipe, kraus) = closed_form_oracles(opts)?;
    checks.push(pipe);
    checks.push(kraus);
    checks.push(single_qubit_reduction(opts)?);
    checks.push(evolved_state_pattern()?);
    checks.push(two_g_closed_form()?);
    checks.push(correction_round_trip(&mut rng)?);
    checks.push(echo_residual()?);
    Ok(checks)
}
