//! Kraus channels for thermal relaxation.
//!
//! Generalized amplitude damping `E_x` (damping probability `p_x`, thermal
//! weight `p_n`) and dephasing `E_z` (Z flip with probability `p_z`) commute,
//! so `E = E_x ∘ E_z` is unambiguous. `p_n = 1` is zero temperature (only
//! `|1> → |0>`), `p_n = 1/2` is infinite temperature.
//!
//! # Dephasing probability
//!
//! The decay parameters are fixed by requiring the zero-temperature channel
//! to reproduce `ρ11 → e^{-t/T1} ρ11` and `ρ10 → e^{-t/T2} ρ10`. Since the
//! coherence picks up `sqrt(1 - p_x) (1 - 2 p_z)`, this gives
//!
//! ```text
//! p_x = 1 - e^{-t/T1}
//! p_z = (1 - e^{t/(2 T1) - t/T2}) / 2
//! ```
//!
//! A frequently quoted variant has the exponent `-t (1/(2 T1) + 1/T2)`; it is
//! available as [`PzConvention::Printed`] for comparison only. It fails the
//! coherence condition above and the closed-form relaxed singlet yield (the
//! verification suite reports both). With `T1 = T2 = τ` the derived form
//! reduces to `(1 - e^{-t/(2τ)}) / 2`, and with `T1 = ∞` to
//! `(1 - e^{-t/T2}) / 2`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, pauli, ComplexMatrix, DensityMatrix, C64, STRUCTURAL_TOL, ZERO};

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    label: String,
}

impl QuantumChannel {
    pub fn new(label: impl Into<String>, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.rows()).ok_or_else(|| {
            Error::InvalidParameter("channel needs at least one Kraus operator".into())
        })?;
        if kraus.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::DimensionMismatch(
                "Kraus operators differ in shape".into(),
            ));
        }
        let ch = Self {
            dim,
            kraus,
            label: label.into(),
        };
        let err = ch.completeness_error();
        if err >= STRUCTURAL_TOL {
            return Err(Error::InvalidParameter(format!(
                "Kraus operators of '{}' are incomplete (max |ΣK†K - I| = {err:e})",
                ch.label
            )));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn unitary(label: impl Into<String>, u: ComplexMatrix) -> Result<Self> {
        let err = u.unitarity_error();
        if err >= linalg::SPECTRAL_TOL {
            return Err(Error::NotUnitary(err));
        }
        Self::new(label, vec![u])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max |Σ K†K − I|`.
    pub fn completeness_error(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }

    /// `Σ K ρ K†` on a state of exactly this dimension.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel '{}' has dim {}, state has dim {}",
                self.label,
                self.dim,
                rho.dim()
            )));
        }
        Ok(DensityMatrix::from_trusted(kraus_sum(
            &self.kraus,
            rho.matrix(),
        )))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch(
                "composing channels of different dim".into(),
            ));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a * b))
            .filter(|k| k.max_abs() > 0.0)
            .collect::<Vec<_>>();
        let kraus = if kraus.is_empty() {
            vec![ComplexMatrix::zeros(self.dim, self.dim)]
        } else {
            kraus
        };
        Ok(Self {
            dim: self.dim,
            kraus,
            label: format!("{}∘{}", self.label, first.label),
        })
    }
}

fn kraus_sum(kraus: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
    for k in kraus {
        out = &out + &k.conjugate(rho).expect("shapes checked");
    }
    out
}

fn check_prob(name: &'static str, value: f64, hi: f64) -> Result<()> {
    if !(0.0..=hi).contains(&value) {
        return Err(Error::ProbabilityOutOfRange {
            name,
            value,
            lo: 0.0,
            hi,
        });
    }
    Ok(())
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Generalized amplitude damping: four Kraus operators.
pub fn gad_kraus(p_x: f64, p_n: f64) -> Result<QuantumChannel> {
    check_prob("p_x", p_x, 1.0)?;
    check_prob("p_n", p_n, 1.0)?;
    let keep = (1.0 - p_x).sqrt();
    let jump = p_x.sqrt();
    let (a, b) = (p_n.sqrt(), (1.0 - p_n).sqrt());
    let m = |v: [f64; 4]| ComplexMatrix::from_vec(2, 2, v.iter().map(|&x| c(x)).collect()).unwrap();
    QuantumChannel::new(
        format!("gad(p_x={p_x}, p_n={p_n})"),
        vec![
            m([a, 0.0, 0.0, a * keep]),
            m([0.0, a * jump, 0.0, 0.0]),
            m([b * keep, 0.0, 0.0, b]),
            m([0.0, 0.0, b * jump, 0.0]),
        ],
    )
}

/// Zero-temperature amplitude damping `|1> → |0>` with probability `p_x`.
pub fn amplitude_damping(p_x: f64) -> Result<QuantumChannel> {
    gad_kraus(p_x, 1.0)
}

/// `sqrt(1 − p_z) I`, `sqrt(p_z) Z`.
pub fn dephasing_kraus(p_z: f64) -> Result<QuantumChannel> {
    check_prob("p_z", p_z, 0.5)?;
    QuantumChannel::new(
        format!("dephase(p_z={p_z})"),
        vec![
            ComplexMatrix::identity(2).scale_real((1.0 - p_z).sqrt()),
            pauli::z().scale_real(p_z.sqrt()),
        ],
    )
}

/// Dephasing probability that multiplies coherences by `factor ∈ [0, 1]`.
pub fn dephasing_for_factor(factor: f64) -> f64 {
    0.5 * (1.0 - factor.clamp(0.0, 1.0))
}

/// Parameters of the relaxation channel at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub p_x: f64,
    pub p_z: f64,
    pub p_n: f64,
}

/// Which closed form for `p_z` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PzConvention {
    /// Solves the T1/T2 coherence condition exactly.
    #[default]
    Derived,
    /// The variant with exponent `-t(1/(2T1) + 1/T2)`; kept for comparison.
    Printed,
}

fn validate_times(t: f64, t1: f64, t2: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    if !(t1 > 0.0) || !(t2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation times must be positive (T1 = {t1}, T2 = {t2})"
        )));
    }
    if t2 > 2.0 * t1 {
        return Err(Error::Unphysical { t1, t2 });
    }
    Ok(())
}

/// Zero-temperature decay parameters (`p_n = 1`) for duration `t`.
pub fn decay_params(t: f64, t1: f64, t2: f64) -> Result<DecayParams> {
    decay_params_with(t, t1, t2, PzConvention::Derived)
}

pub fn decay_params_with(
    t: f64,
    t1: f64,
    t2: f64,
    convention: PzConvention,
) -> Result<DecayParams> {
    validate_times(t, t1, t2)?;
    let p_x = -(-t / t1).exp_m1();
    let p_z = match convention {
        // T2 ≤ 2 T1 keeps the exponent non-positive
        PzConvention::Derived => -0.5 * (t / (2.0 * t1) - t / t2).min(0.0).exp_m1(),
        PzConvention::Printed => -0.5 * (-t * (1.0 / (2.0 * t1) + 1.0 / t2)).exp_m1(),
    };
    Ok(DecayParams { p_x, p_z, p_n: 1.0 })
}

/// `E_x(p_x, p_n) ∘ E_z(p_z)` on one qubit.
pub fn relaxation_channel(params: DecayParams) -> Result<QuantumChannel> {
    let ch = gad_kraus(params.p_x, params.p_n)?.after(&dephasing_kraus(params.p_z)?)?;
    Ok(QuantumChannel {
        label: format!(
            "relax(p_x={}, p_z={}, p_n={})",
            params.p_x, params.p_z, params.p_n
        ),
        ..ch
    })
}

/// Single-qubit relaxation over `t` with temperature weight `p_n`.
pub fn thermal_relaxation(t: f64, t1: f64, t2: f64, p_n: f64) -> Result<QuantumChannel> {
    thermal_relaxation_with(t, t1, t2, p_n, PzConvention::Derived)
}

pub fn thermal_relaxation_with(
    t: f64,
    t1: f64,
    t2: f64,
    p_n: f64,
    convention: PzConvention,
) -> Result<QuantumChannel> {
    let mut p = decay_params_with(t, t1, t2, convention)?;
    p.p_n = p_n;
    relaxation_channel(p)
}

/// Embed an operator acting on `targets` (in that order) into the full space.
pub fn embed_operator(
    op: &ComplexMatrix,
    dims: &[usize],
    targets: &[usize],
) -> Result<ComplexMatrix> {
    let local_dim: usize = targets
        .iter()
        .map(|&t| dims.get(t).copied().unwrap_or(0))
        .product();
    if targets.is_empty() || local_dim != op.rows() || !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dim {} on targets {targets:?} of {dims:?}",
            op.rows()
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &t in targets {
        if seen[t] {
            return Err(Error::DimensionMismatch(format!("repeated target {t}")));
        }
        seen[t] = true;
    }
    let n: usize = dims.iter().product();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = idx % dims[k];
            idx /= dims[k];
        }
        d
    };
    let local = |d: &[usize]| -> usize { targets.iter().fold(0, |acc, &t| acc * dims[t] + d[t]) };

    let all_digits: Vec<Vec<usize>> = (0..n).map(digits).collect();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (&all_digits[i], &all_digits[j]);
            let spectators_match = (0..dims.len()).all(|k| seen[k] || di[k] == dj[k]);
            if spectators_match {
                let v = op[(local(di), local(dj))];
                if v != ZERO {
                    out[(i, j)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Apply `ch` to the listed subsystems of a tensor-product state.
pub fn apply_channel_on(
    ch: &QuantumChannel,
    rho: &DensityMatrix,
    dims: &[usize],
    targets: &[usize],
) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} do not match state dim {}",
            rho.dim()
        )));
    }
    let kraus = ch
        .kraus
        .iter()
        .map(|k| embed_operator(k, dims, targets))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityMatrix::from_trusted(kraus_sum(&kraus, rho.matrix())))
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(Error::DimensionMismatch(format!(
            "dim {dim} is not a qubit register"
        )))
    }
}

/// Apply `ch` to the given qubits of a qubit register (qubit 0 leftmost).
pub fn apply_channel(
    ch: &QuantumChannel,
    rho: &DensityMatrix,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let n = qubit_count(rho.dim())?;
    if targets.iter().any(|&t| t >= n) {
        return Err(Error::DimensionMismatch(format!(
            "targets {targets:?} out of range for {n} qubits"
        )));
    }
    if 1usize << targets.len() != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel of dim {} on {} targets",
            ch.dim(),
            targets.len()
        )));
    }
    apply_channel_on(ch, rho, &vec![2; n], targets)
}

/// Relaxation of a radical pair with pair-effective `t1`, `t2`: each electron
/// relaxes with the per-radical times `2 t1`, `2 t2`. `dims` is the full tensor
/// structure with the electrons as subsystems 0 and 1.
pub fn pair_relaxation(
    rho: &DensityMatrix,
    dims: &[usize],
    t: f64,
    t1: f64,
    t2: f64,
    p_n: f64,
) -> Result<DensityMatrix> {
    pair_relaxation_with(rho, dims, t, t1, t2, p_n, PzConvention::Derived)
}

pub fn pair_relaxation_with(
    rho: &DensityMatrix,
    dims: &[usize],
    t: f64,
    t1: f64,
    t2: f64,
    p_n: f64,
    convention: PzConvention,
) -> Result<DensityMatrix> {
    let ch = thermal_relaxation_with(t, 2.0 * t1, 2.0 * t2, p_n, convention)?;
    let rho = apply_channel_on(&ch, rho, dims, &[0])?;
    apply_channel_on(&ch, &rho, dims, &[1])
}

/// Outcome of a numerical commutation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommuteReport {
    pub commutes: bool,
    pub max_deviation: f64,
    pub trials: usize,
}

/// Test whether two maps commute on `trials` random density matrices of `dim`.
///
/// The deviation is the largest entrywise `|a(b(ρ)) − b(a(ρ))|`.
pub fn commute_check<A, B>(
    a: A,
    b: B,
    dim: usize,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<CommuteReport>
where
    A: Fn(&DensityMatrix) -> Result<DensityMatrix>,
    B: Fn(&DensityMatrix) -> Result<DensityMatrix>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let rho = linalg::random_density_matrix(dim, &mut rng);
        let ab = a(&b(&rho)?)?;
        let ba = b(&a(&rho)?)?;
        worst = worst.max(ab.matrix().max_abs_diff(ba.matrix()));
    }
    Ok(CommuteReport {
        commutes: worst < tol,
        max_deviation: worst,
        trials,
    })
}

/// Relaxed singlet yield from the isolated one:
/// `(1 + e^{-t/T1} + e^{-t/T2} (4S − 2)) / 4`.
pub fn relaxed_closed_form(s: f64, t: f64, t1: f64, t2: f64) -> f64 {
    relaxed_gaussian(s, t, t1, t2, 0.0)
}

/// As [`relaxed_closed_form`] with extra Gaussian dephasing `e^{-σ² t²}` on the
/// coherence term.
pub fn relaxed_gaussian(s: f64, t: f64, t1: f64, t2: f64, sigma: f64) -> f64 {
    let pop = (-t / t1).exp();
    let coh = (-t / t2 - sigma * sigma * t * t).exp();
    0.25 * (1.0 + pop + coh * (4.0 * s - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_density_matrix;
    use crate::spinsys::singlet;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn gad_zero_temperature_is_plain_damping() {
        let ch = gad_kraus(0.3, 1.0).unwrap();
        assert_eq!(ch.kraus()[2].max_abs(), 0.0);
        assert_eq!(ch.kraus()[3].max_abs(), 0.0);
    }

    #[test]
    fn gad_without_damping_is_identity() {
        let ch = gad_kraus(0.0, 0.7).unwrap();
        let rho = random_density_matrix(2, &mut rng(1));
        assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn gad_full_damping_at_infinite_temperature_is_fully_mixed() {
        let ch = gad_kraus(1.0, 0.5).unwrap();
        let rho = random_density_matrix(2, &mut rng(2));
        let out = ch.apply(&rho).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
                < 1e-15
        );
    }

    #[test]
    fn gad_rejects_bad_probabilities() {
        assert!(matches!(
            gad_kraus(1.2, 0.5),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            gad_kraus(0.2, -0.1),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(dephasing_kraus(0.6).is_err());
    }

    #[test]
    fn dephasing_cases() {
        let rho = random_density_matrix(2, &mut rng(3));
        let id = dephasing_kraus(0.0).unwrap().apply(&rho).unwrap();
        assert!(id.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[c(s), c(s)]).unwrap();
        let out = dephasing_kraus(0.5).unwrap().apply(&plus).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5))
                < 1e-15
        );

        let pz = 0.17;
        let out = dephasing_kraus(pz).unwrap().apply(&rho).unwrap();
        let want = rho.matrix()[(1, 0)] * (1.0 - 2.0 * pz);
        assert!((out.matrix()[(1, 0)] - want).norm() < 1e-15);
    }

    #[test]
    fn identity_channel_leaves_register_unchanged() {
        let rho = random_density_matrix(8, &mut rng(4));
        let out = apply_channel(&QuantumChannel::identity(2), &rho, &[1]).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn infinite_temperature_on_singlet_matches_matrix_form() {
        let (px, pz) = (0.31, 0.12);
        let ch = relaxation_channel(DecayParams {
            p_x: px,
            p_z: pz,
            p_n: 0.5,
        })
        .unwrap();
        let rho = DensityMatrix::pure(&singlet()).unwrap();
        let rho = apply_channel(&ch, &rho, &[0]).unwrap();
        let rho = apply_channel(&ch, &rho, &[1]).unwrap();
        let pbar = 1.0 - px;
        let big_pz = 1.0 - 2.0 * pz;
        let mut want = ComplexMatrix::zeros(4, 4);
        want[(0, 0)] = c(0.25 * (1.0 - pbar * pbar));
        want[(3, 3)] = c(0.25 * (1.0 - pbar * pbar));
        want[(1, 1)] = c(0.25 * (pbar * pbar + 1.0));
        want[(2, 2)] = c(0.25 * (pbar * pbar + 1.0));
        want[(1, 2)] = c(-0.5 * pbar * big_pz * big_pz);
        want[(2, 1)] = c(-0.5 * pbar * big_pz * big_pz);
        assert!(rho.matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn damping_twice_composes() {
        let p = 0.23;
        let once = amplitude_damping(p).unwrap();
        let twice = once.after(&once).unwrap();
        let combined = amplitude_damping(1.0 - (1.0 - p) * (1.0 - p)).unwrap();
        let mut r = rng(5);
        for _ in 0..20 {
            let rho = random_density_matrix(2, &mut r);
            let a = twice.apply(&rho).unwrap();
            let b = combined.apply(&rho).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }

    #[test]
    fn decay_param_limits() {
        let p = decay_params(0.0, 50.0, 40.0).unwrap();
        assert_eq!((p.p_x, p.p_z), (0.0, 0.0));
        let p = decay_params(1e6, 50.0, 40.0).unwrap();
        assert!((p.p_x - 1.0).abs() < 1e-15 && (p.p_z - 0.5).abs() < 1e-15);
        let (t, t2) = (13.0, 21.0);
        let p = decay_params(t, f64::INFINITY, t2).unwrap();
        assert!((p.p_z - 0.5 * (1.0 - (-t / t2).exp())).abs() < 1e-15);
        assert_eq!(p.p_x, 0.0);
        assert!(matches!(
            decay_params(1.0, 10.0, 25.0),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn zero_temperature_channel_realizes_t1_t2() {
        let (t, t1, t2) = (17.0, 40.0, 30.0);
        let ch = relaxation_channel(decay_params(t, t1, t2).unwrap()).unwrap();
        let rho = random_density_matrix(2, &mut rng(6));
        let out = ch.apply(&rho).unwrap();
        let m = rho.matrix();
        let o = out.matrix();
        assert!((o[(1, 1)].re - (-t / t1).exp() * m[(1, 1)].re).abs() < 1e-12);
        assert!((o[(1, 0)] - m[(1, 0)] * (-t / t2).exp()).norm() < 1e-12);
    }

    #[test]
    fn completeness_for_random_parameters() {
        let mut r = rng(7);
        use rand::Rng;
        for _ in 0..200 {
            let (px, pn, pz) = (
                r.random::<f64>(),
                r.random::<f64>(),
                0.5 * r.random::<f64>(),
            );
            let ch = relaxation_channel(DecayParams {
                p_x: px,
                p_z: pz,
                p_n: pn,
            })
            .unwrap();
            assert!(ch.completeness_error() < 1e-12);
        }
    }

    #[test]
    fn embed_respects_target_order() {
        let cx = ComplexMatrix::from_real(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
            ],
        )
        .unwrap();
        // control on qubit 1, target qubit 0: |01> -> |11>
        let full = embed_operator(&cx, &[2, 2], &[1, 0]).unwrap();
        assert_eq!(full[(3, 1)], c(1.0));
        assert_eq!(full[(1, 1)], ZERO);
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(relaxed_closed_form(1.0, 0.0, 50.0, 50.0), 1.0);
        let inf = f64::INFINITY;
        assert_eq!(relaxed_closed_form(0.3, 7.0, inf, inf), 0.3);
        assert!((relaxed_closed_form(0.8, 1e5, 50.0, 40.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gaussian_closed_form_cases() {
        let (s, t, t1, t2) = (0.7, 12.0, 50.0, 45.0);
        assert_eq!(
            relaxed_gaussian(s, t, t1, t2, 0.0),
            relaxed_closed_form(s, t, t1, t2)
        );
        assert!((relaxed_gaussian(s, 0.0, t1, t2, 0.3) - s).abs() < 1e-15);
        let half = relaxed_gaussian(0.5, t, t1, t2, 0.9);
        assert!((half - 0.25 * (1.0 + (-t / t1).exp())).abs() < 1e-15);
    }
}
