//! Radical-pair spin systems.
//!
//! Units: ħ = 1, time in ns, fields and hyperfine constants in mT. Angular
//! frequencies come out in rad/ns via [`GAMMA`]. Tensor order is
//! electron 1 ⊗ electron 2 ⊗ nuclei (in the order they are listed).
//! Electron basis state `|0>` is spin up (`S_z = +1/2`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron_all, ComplexMatrix, DensityMatrix, Propagator, C64, ZERO};

/// Bohr magneton over ħ, in rad ns⁻¹ mT⁻¹.
pub const GAMMA: f64 = 8.794e-2;
/// Free-electron g-factor, used to convert hyperfine constants from mT.
pub const G_FREE: f64 = 2.0023;

/// g-factors of the perdeuterated DPS/PTP pair.
pub const DPS_G1: f64 = 2.0028;
pub const DPS_G2: f64 = 2.0082;
pub const DPS_LOW_FIELD_MT: f64 = 17.0;
pub const DPS_HIGH_FIELD_MT: f64 = 960.0;
/// Pair relaxation time for DPS/PTP runs without hyperfine couplings.
pub const DPS_TAU_NO_HFC_NS: f64 = 50.0;
/// Pair relaxation time for DPS/PTP runs with semiclassical hyperfine dephasing.
pub const DPS_TAU_HFC_NS: f64 = 60.0;
pub const DPS_THETA: f64 = 0.425;

pub const TMP_LOW_FIELD_MT: f64 = 0.0;
pub const TMP_HIGH_FIELD_MT: f64 = 100.0;
/// Amine hydrogen coupling on TMP, mT.
pub const TMP_A_H_MT: f64 = -1.87;
/// Nitrogen coupling on TMP, mT.
pub const TMP_A_N_MT: f64 = 1.8;
pub const TMP_THETA: f64 = 0.108;
/// TMP and PTP g-factors are not resolved separately; both default to the
/// PTP value, so the high-field beats come from hyperfine mixing alone.
pub const TMP_G: f64 = 2.0028;

/// One isotropic hyperfine coupling `a I·S` between an electron and a nucleus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperfine {
    /// 1 or 2.
    pub electron: u8,
    /// Nuclear spin quantum number, 1/2 or 1.
    pub spin: f64,
    pub coupling_mt: f64,
}

/// Declarative radical pair description.
///
/// `t1_ns` / `t2_ns` are pair-effective relaxation times (the rates of the
/// two radicals added). They may be `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemSpec {
    pub g1: f64,
    pub g2: f64,
    pub field_mt: f64,
    #[serde(default)]
    pub hfc: Vec<Hyperfine>,
    pub t1_ns: f64,
    pub t2_ns: f64,
    pub theta: f64,
    /// Gaussian dephasing second moment, rad/ns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl SpinSystemSpec {
    pub fn validate(&self) -> Result<()> {
        for h in &self.hfc {
            if h.electron != 1 && h.electron != 2 {
                return Err(Error::InvalidParameter(format!(
                    "hyperfine electron index {} (must be 1 or 2)",
                    h.electron
                )));
            }
            nuclear_dim(h.spin)?;
        }
        if !(self.t1_ns > 0.0) || !(self.t2_ns > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "relaxation times must be positive (T1 = {}, T2 = {})",
                self.t1_ns, self.t2_ns
            )));
        }
        if self.t2_ns > 2.0 * self.t1_ns {
            return Err(Error::Unphysical {
                t1: self.t1_ns,
                t2: self.t2_ns,
            });
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::ProbabilityOutOfRange {
                name: "theta",
                value: self.theta,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if let Some(s) = self.sigma {
            if !(s >= 0.0) {
                return Err(Error::InvalidParameter(format!("sigma = {s}")));
            }
        }
        if !self.g1.is_finite() || !self.g2.is_finite() || !self.field_mt.is_finite() {
            return Err(Error::InvalidParameter(
                "non-finite g-factor or field".into(),
            ));
        }
        Ok(())
    }

    pub fn has_hfc(&self) -> bool {
        !self.hfc.is_empty()
    }

    /// Subsystem dimensions in tensor order.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![2, 2];
        d.extend(self.hfc.iter().map(|h| nuclear_dim(h.spin).unwrap_or(0)));
        d
    }

    pub fn nuclear_dim(&self) -> usize {
        self.dims()[2..].iter().product()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Electron Larmor frequencies `(ω1, ω2)` in rad/ns.
    pub fn larmor(&self) -> (f64, f64) {
        (
            GAMMA * self.g1 * self.field_mt,
            GAMMA * self.g2 * self.field_mt,
        )
    }

    pub fn with_relaxation(mut self, t1_ns: f64, t2_ns: f64) -> Self {
        self.t1_ns = t1_ns;
        self.t2_ns = t2_ns;
        self
    }
}

/// The two experimental systems at their two field settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DpsLow,
    DpsHigh,
    TmpLow,
    TmpHigh,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::DpsLow,
        Preset::DpsHigh,
        Preset::TmpLow,
        Preset::TmpHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::DpsLow => "dps-low",
            Preset::DpsHigh => "dps-high",
            Preset::TmpLow => "tmp-low",
            Preset::TmpHigh => "tmp-high",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset '{name}'")))
    }

    pub fn is_dps(self) -> bool {
        matches!(self, Preset::DpsLow | Preset::DpsHigh)
    }

    /// DPS/PTP without hyperfine couplings, T1 = T2 = 50 ns.
    pub fn dps(self) -> Result<SpinSystemSpec> {
        let field_mt = match self {
            Preset::DpsLow => DPS_LOW_FIELD_MT,
            Preset::DpsHigh => DPS_HIGH_FIELD_MT,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} is not a DPS preset",
                    self.name()
                )))
            }
        };
        Ok(SpinSystemSpec {
            g1: DPS_G1,
            g2: DPS_G2,
            field_mt,
            hfc: Vec::new(),
            t1_ns: DPS_TAU_NO_HFC_NS,
            t2_ns: DPS_TAU_NO_HFC_NS,
            theta: DPS_THETA,
            sigma: None,
        })
    }

    /// DPS/PTP with semiclassical Gaussian dephasing `sigma` (rad/ns),
    /// T1 = T2 = 60 ns.
    pub fn dps_with_sigma(self, sigma: f64) -> Result<SpinSystemSpec> {
        let mut s = self.dps()?;
        s.t1_ns = DPS_TAU_HFC_NS;
        s.t2_ns = DPS_TAU_HFC_NS;
        s.sigma = Some(sigma);
        Ok(s)
    }

    /// TMP/PTP. Relaxation times have no published defaults and must be given.
    pub fn tmp(self, t1_ns: f64, t2_ns: f64) -> Result<SpinSystemSpec> {
        let field_mt = match self {
            Preset::TmpLow => TMP_LOW_FIELD_MT,
            Preset::TmpHigh => TMP_HIGH_FIELD_MT,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} is not a TMP preset",
                    self.name()
                )))
            }
        };
        let spec = SpinSystemSpec {
            g1: TMP_G,
            g2: TMP_G,
            field_mt,
            hfc: vec![
                Hyperfine {
                    electron: 1,
                    spin: 1.0,
                    coupling_mt: TMP_A_N_MT,
                },
                Hyperfine {
                    electron: 1,
                    spin: 0.5,
                    coupling_mt: TMP_A_H_MT,
                },
            ],
            t1_ns,
            t2_ns,
            theta: TMP_THETA,
            sigma: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build the spec; TMP presets need `relaxation = Some((T1, T2))`, DPS
    /// presets take it as an optional override.
    pub fn build(self, relaxation: Option<(f64, f64)>) -> Result<SpinSystemSpec> {
        if self.is_dps() {
            let s = self.dps()?;
            Ok(match relaxation {
                Some((t1, t2)) => s.with_relaxation(t1, t2),
                None => s,
            })
        } else {
            let (t1, t2) = relaxation.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "preset {} requires explicit t1_ns and t2_ns",
                    self.name()
                ))
            })?;
            self.tmp(t1, t2)
        }
    }
}

fn nuclear_dim(spin: f64) -> Result<usize> {
    if spin == 0.5 {
        Ok(2)
    } else if spin == 1.0 {
        Ok(3)
    } else {
        Err(Error::UnsupportedSpin(spin))
    }
}

/// Angular momentum matrices `(S_x, S_y, S_z)` for spin 1/2 or 1.
pub fn spin_operators(s: f64) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let dim = nuclear_dim(s)?;
    // basis m = s, s-1, ..., -s
    let ms: Vec<f64> = (0..dim).map(|k| s - k as f64).collect();
    let mut plus = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        let m = ms[k];
        plus[(k - 1, k)] = C64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let sx = (&plus + &minus).scale_real(0.5);
    let sy = (&plus - &minus).scale(C64::new(0.0, -0.5));
    let sz = ComplexMatrix::from_real_diag(&ms);
    Ok((sx, sy, sz))
}

/// Embed `op` acting on subsystem `k` of a tensor product with `dims`.
fn embed(op: &ComplexMatrix, k: usize, dims: &[usize]) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if i == k {
                op.clone()
            } else {
                ComplexMatrix::identity(d)
            }
        })
        .collect();
    kron_all(&factors)
}

/// Zeeman plus isotropic hyperfine Hamiltonian, rad/ns, field along z.
pub fn build_hamiltonian(spec: &SpinSystemSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let dims = spec.dims();
    let n = spec.hilbert_dim();
    let (w1, w2) = spec.larmor();
    let (ex, ey, ez) = spin_operators(0.5)?;

    let mut h = ComplexMatrix::zeros(n, n);
    h = &h + &embed(&ez, 0, &dims).scale_real(w1);
    h = &h + &embed(&ez, 1, &dims).scale_real(w2);

    for (j, hf) in spec.hfc.iter().enumerate() {
        let (ix, iy, iz) = spin_operators(hf.spin)?;
        let e = (hf.electron - 1) as usize;
        let nuc = 2 + j;
        let a = GAMMA * G_FREE * hf.coupling_mt;
        for (s_op, i_op) in [(&ex, &ix), (&ey, &iy), (&ez, &iz)] {
            let term = &embed(s_op, e, &dims) * &embed(i_op, nuc, &dims);
            h = &h + &term.scale_real(a);
        }
    }
    Ok(h)
}

fn basis_vec(dim: usize, entries: &[(usize, f64)]) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    for &(i, x) in entries {
        v[i] = C64::new(x, 0.0);
    }
    v
}

/// `|S> = (|01> - |10>)/√2`.
pub fn singlet() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    basis_vec(4, &[(1, s), (2, -s)])
}

/// `|T0> = (|01> + |10>)/√2`.
pub fn triplet_zero() -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    basis_vec(4, &[(1, s), (2, s)])
}

/// `|T+> = |00>`.
pub fn triplet_plus() -> Vec<C64> {
    basis_vec(4, &[(0, 1.0)])
}

/// `|T-> = |11>`.
pub fn triplet_minus() -> Vec<C64> {
    basis_vec(4, &[(3, 1.0)])
}

/// `ρ(0) = |S><S| ⊗ I/N_I`.
pub fn initial_state(spec: &SpinSystemSpec) -> DensityMatrix {
    let electrons = DensityMatrix::pure(&singlet()).expect("normalized");
    electrons.tensor(&DensityMatrix::maximally_mixed(spec.nuclear_dim()))
}

/// Cached propagator for the reduced electronic dynamics of one spec.
#[derive(Debug, Clone)]
pub struct SpinDynamics {
    spec: SpinSystemSpec,
    propagator: Propagator,
    rho0: DensityMatrix,
}

impl SpinDynamics {
    pub fn new(spec: &SpinSystemSpec) -> Result<Self> {
        let h = build_hamiltonian(spec)?;
        Ok(Self {
            spec: spec.clone(),
            propagator: Propagator::new(&h)?,
            rho0: initial_state(spec),
        })
    }

    pub fn spec(&self) -> &SpinSystemSpec {
        &self.spec
    }

    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        self.propagator.at(t)
    }

    /// Full electron+nuclear state at time `t`.
    pub fn full_state(&self, t: f64) -> DensityMatrix {
        self.rho0
            .evolve(&self.propagator.at(t))
            .expect("dimensions fixed at construction")
    }

    /// `Tr_I{e^{-iHt} ρ(0) e^{iHt}}`.
    pub fn electronic_state(&self, t: f64) -> DensityMatrix {
        self.evolve_electronic(&DensityMatrix::pure(&singlet()).expect("normalized"), t)
            .expect("4x4 input")
    }

    /// Reduced electronic channel: attach maximally mixed nuclei, evolve for
    /// `t`, trace the nuclei out again.
    pub fn evolve_electronic(&self, rho_e: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho_e.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "electronic state has dim {}",
                rho_e.dim()
            )));
        }
        let full = rho_e.tensor(&DensityMatrix::maximally_mixed(self.spec.nuclear_dim()));
        let evolved = full.evolve(&self.propagator.at(t))?;
        linalg::partial_trace(&evolved, &self.spec.dims(), &[0, 1])
    }

    pub fn singlet_probability(&self, t: f64) -> f64 {
        self.electronic_state(t).overlap(&singlet())
    }
}

/// `S(t) = <S|Tr_I{e^{-iHt} ρ(0) e^{iHt}}|S>`.
pub fn singlet_probability(spec: &SpinSystemSpec, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    Ok(SpinDynamics::new(spec)?.singlet_probability(t))
}

/// `cos²(Δω t / 2)` with `Δω = γ (g1 − g2) B`, valid without hyperfine terms.
pub fn analytic_two_g(spec: &SpinSystemSpec, t: f64) -> Result<f64> {
    if spec.has_hfc() {
        return Err(Error::InvalidParameter(
            "closed form requires a spec without hyperfine couplings".into(),
        ));
    }
    let (w1, w2) = spec.larmor();
    Ok(((w1 - w2) * t / 2.0).cos().powi(2))
}

/// Gaussian second moment `γ·sqrt(Σ a² I(I+1) / 3)`, rad/ns, from `(a_mT, I)`
/// pairs.
pub fn second_moment(hfc: &[(f64, f64)]) -> f64 {
    let sum: f64 = hfc.iter().map(|&(a, i)| a * a * i * (i + 1.0)).sum();
    GAMMA * (sum / 3.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, I};

    #[test]
    fn spin_half_sz() {
        let (_, _, sz) = spin_operators(0.5).unwrap();
        assert_eq!(sz, ComplexMatrix::from_real_diag(&[0.5, -0.5]));
    }

    #[test]
    fn spin_one_sz_and_casimir() {
        let (sx, sy, sz) = spin_operators(1.0).unwrap();
        assert_eq!(sz, ComplexMatrix::from_real_diag(&[1.0, 0.0, -1.0]));
        let cas = &(&(&sx * &sx) + &(&sy * &sy)) + &(&sz * &sz);
        assert!(cas.max_abs_diff(&ComplexMatrix::identity(3).scale_real(2.0)) < 1e-14);
    }

    #[test]
    fn commutation_relations() {
        for s in [0.5, 1.0] {
            let (sx, sy, sz) = spin_operators(s).unwrap();
            let c = sx.commutator(&sy).unwrap();
            assert!(c.max_abs_diff(&sz.scale(I)) < 1e-14);
        }
    }

    #[test]
    fn unsupported_spin() {
        assert_eq!(
            spin_operators(1.5).unwrap_err(),
            Error::UnsupportedSpin(1.5)
        );
    }

    #[test]
    fn dps_hamiltonian_is_diagonal_zeeman() {
        let spec = Preset::DpsHigh.dps().unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let (w1, w2) = (GAMMA * DPS_G1 * 960.0, GAMMA * DPS_G2 * 960.0);
        let want = ComplexMatrix::from_real_diag(&[
            0.5 * (w1 + w2),
            0.5 * (w1 - w2),
            0.5 * (-w1 + w2),
            -0.5 * (w1 + w2),
        ]);
        assert!(h.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn tmp_hamiltonian_dimension() {
        let spec = Preset::TmpHigh.tmp(40.0, 40.0).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.rows(), 24);
        assert!(h.is_hermitian(1e-14));
    }

    #[test]
    fn zero_field_no_hfc_is_zero() {
        let mut spec = Preset::DpsLow.dps().unwrap();
        spec.field_mt = 0.0;
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn initial_state_structure() {
        let dps = Preset::DpsLow.dps().unwrap();
        let rho = initial_state(&dps);
        assert_eq!(rho.dim(), 4);
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(1, 2)].re + 0.5).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-14);

        let tmp = Preset::TmpLow.tmp(40.0, 40.0).unwrap();
        let rho = initial_state(&tmp);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        let el = partial_trace(&rho, &tmp.dims(), &[0, 1]).unwrap();
        let s = DensityMatrix::pure(&singlet()).unwrap();
        assert!(el.matrix().max_abs_diff(s.matrix()) < 1e-15);
        let nuc = partial_trace(&rho, &tmp.dims(), &[2, 3]).unwrap();
        assert!(
            nuc.matrix()
                .max_abs_diff(&ComplexMatrix::identity(6).scale_real(1.0 / 6.0))
                < 1e-15
        );
    }

    #[test]
    fn singlet_probability_starts_at_one() {
        let tmp = Preset::TmpLow.tmp(40.0, 40.0).unwrap();
        assert!((singlet_probability(&tmp, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn analytic_two_g_cases() {
        let spec = Preset::DpsHigh.dps().unwrap();
        assert_eq!(analytic_two_g(&spec, 0.0).unwrap(), 1.0);
        let (w1, w2) = spec.larmor();
        let t = std::f64::consts::PI / (w1 - w2).abs();
        assert!(analytic_two_g(&spec, t).unwrap() < 1e-20);
        let mut eq = spec.clone();
        eq.g2 = eq.g1;
        assert_eq!(analytic_two_g(&eq, 33.0).unwrap(), 1.0);
        let tmp = Preset::TmpHigh.tmp(40.0, 40.0).unwrap();
        assert!(analytic_two_g(&tmp, 1.0).is_err());
    }

    #[test]
    fn second_moment_cases() {
        assert_eq!(second_moment(&[]), 0.0);
        assert!((second_moment(&[(2.0, 0.5)]) - GAMMA).abs() < 1e-15);
        let base = second_moment(&[(1.3, 1.0), (0.4, 0.5)]);
        let scaled = second_moment(&[(3.0 * 1.3, 1.0), (3.0 * 0.4, 0.5)]);
        assert!((scaled - 3.0 * base).abs() < 1e-14);
    }

    #[test]
    fn validation_rejects_unphysical_relaxation() {
        assert!(matches!(
            Preset::TmpLow.tmp(10.0, 25.0),
            Err(Error::Unphysical { .. })
        ));
        assert!(Preset::TmpLow.build(None).is_err());
        assert!(Preset::TmpHigh.tmp(f64::INFINITY, 30.0).is_ok());
    }
}
