//! Gate-level density-matrix simulator with a zero-temperature noisy backend
//! and multinomial shot sampling.
//!
//! Qubit 0 is the leftmost tensor factor and the first character of a
//! bitstring. `Rz(θ) = diag(e^{-iθ/2}, e^{iθ/2})`, `Ry(θ)|0> = cos(θ/2)|0> +
//! sin(θ/2)|1>`.
//!
//! Noise is applied after every gate to that gate's targets, for the gate's
//! duration. Consecutive identity gates on a qubit are merged into one idle
//! period before the channel is applied; amplitude damping, dephasing and
//! drift all compose additively in time, so merging is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::channels::{self, embed_operator};
use crate::error::{Error, Result};
use crate::linalg::{pauli, ComplexMatrix, DensityMatrix, C64, SPECTRAL_TOL};

/// Name of the PRNG used for sampling (recorded in outputs).
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9)";

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    /// Targets: control, target.
    CX,
    Ry(f64),
    Rz(f64),
    /// Targets: control, target.
    CRy(f64),
    Identity,
    Custom(ComplexMatrix),
}

impl GateKind {
    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::CX | GateKind::CRy(_) => Some(2),
            GateKind::Custom(_) => None,
            _ => Some(1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::CX => "CX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::CRy(_) => "CRY",
            GateKind::Identity => "I",
            GateKind::Custom(_) => "U",
        }
    }

    fn angle(&self) -> Option<f64> {
        match self {
            GateKind::Ry(t) | GateKind::Rz(t) | GateKind::CRy(t) => Some(*t),
            _ => None,
        }
    }

    /// Local unitary in target order.
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            GateKind::H => pauli::h(),
            GateKind::X => pauli::x(),
            GateKind::Z => pauli::z(),
            GateKind::Identity => ComplexMatrix::identity(2),
            GateKind::Ry(t) => pauli::ry(*t),
            GateKind::Rz(t) => pauli::rz(*t),
            GateKind::CX => controlled(&pauli::x()),
            GateKind::CRy(t) => controlled(&pauli::ry(*t)),
            GateKind::Custom(u) => u.clone(),
        }
    }
}

fn controlled(u: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(4);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 + r, 2 + c)] = u[(r, c)];
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Backend wall time in ns.
    pub duration: f64,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            duration: 0.0,
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }
    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, vec![q])
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::CX, vec![control, target])
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry(theta), vec![q])
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz(theta), vec![q])
    }
    pub fn cry(control: usize, target: usize, theta: f64) -> Self {
        Self::new(GateKind::CRy(theta), vec![control, target])
    }
    pub fn id(q: usize, duration: f64) -> Self {
        Self::new(GateKind::Identity, vec![q]).with_duration(duration)
    }
    pub fn custom(targets: Vec<usize>, u: ComplexMatrix) -> Self {
        Self::new(GateKind::Custom(u), targets)
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self, nqubits: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedGate(msg));
        if self.targets.is_empty() {
            return bad(format!("{} without targets", self.kind.name()));
        }
        if let Some(q) = self.targets.iter().find(|&&q| q >= nqubits) {
            return bad(format!(
                "{} targets qubit {q} of {nqubits}",
                self.kind.name()
            ));
        }
        for (i, q) in self.targets.iter().enumerate() {
            if self.targets[..i].contains(q) {
                return bad(format!("{} repeats qubit {q}", self.kind.name()));
            }
        }
        match self.kind.arity() {
            Some(k) if k != self.targets.len() => {
                return bad(format!(
                    "{} takes {k} targets, got {}",
                    self.kind.name(),
                    self.targets.len()
                ))
            }
            None => {
                let GateKind::Custom(u) = &self.kind else {
                    unreachable!()
                };
                if !u.is_square() || u.rows() != 1 << self.targets.len() {
                    return bad(format!(
                        "custom unitary of dim {} on {} qubits",
                        u.rows(),
                        self.targets.len()
                    ));
                }
                let err = u.unitarity_error();
                if err >= SPECTRAL_TOL {
                    return bad(format!("custom matrix not unitary ({err:e})"));
                }
            }
            _ => {}
        }
        if let Some(t) = self.kind.angle() {
            if !t.is_finite() {
                return bad(format!("{} angle {t}", self.kind.name()));
            }
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad(format!("{} duration {}", self.kind.name(), self.duration));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub nqubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(nqubits: usize) -> Self {
        Self {
            nqubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> &mut Self {
        self.gates.extend(gates);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nqubits == 0 || self.nqubits > 6 {
            return Err(Error::MalformedGate(format!(
                "register of {} qubits unsupported (1..=6)",
                self.nqubits
            )));
        }
        self.gates.iter().try_for_each(|g| g.validate(self.nqubits))
    }

    /// Total backend time on each qubit.
    pub fn busy_time(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.nqubits];
        for g in &self.gates {
            for &q in &g.targets {
                t[q] += g.duration;
            }
        }
        t
    }

    /// One line per gate: `GATE targets θ duration`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let targets = g
                .targets
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let angle = g.kind.angle().map_or("-".to_string(), |a| a.to_string());
            let _ = writeln!(
                out,
                "{} {} {} {}",
                g.kind.name(),
                targets,
                angle,
                g.duration
            );
        }
        out
    }
}

/// Zero-temperature relaxation times of one backend qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitTimes {
    pub t1: f64,
    pub t2: f64,
}

impl QubitTimes {
    pub fn new(t1: f64, t2: f64) -> Self {
        Self { t1, t2 }
    }

    pub fn ideal() -> Self {
        Self::new(f64::INFINITY, f64::INFINITY)
    }

    pub fn is_ideal(&self) -> bool {
        self.t1.is_infinite() && self.t2.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub qubits: Vec<QubitTimes>,
    /// Identity-gate duration in ns.
    pub t_id: f64,
    /// Residual frequency miscalibration, rad/ns, applied during idle time.
    pub drift: f64,
    /// Replace the dephasing channel with a random Rz per shot.
    pub stochastic_dephasing: bool,
}

impl NoiseModel {
    pub fn uniform(nqubits: usize, t1: f64, t2: f64, t_id: f64) -> Self {
        Self {
            qubits: vec![QubitTimes::new(t1, t2); nqubits],
            t_id,
            drift: 0.0,
            stochastic_dephasing: false,
        }
    }

    pub fn ideal(nqubits: usize, t_id: f64) -> Self {
        Self::uniform(nqubits, f64::INFINITY, f64::INFINITY, t_id)
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn validate(&self, nqubits: usize) -> Result<()> {
        if self.qubits.len() < nqubits {
            return Err(Error::InvalidParameter(format!(
                "noise model covers {} qubits, circuit has {nqubits}",
                self.qubits.len()
            )));
        }
        if !(self.t_id > 0.0 && self.t_id.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "identity gate duration must be positive, got {}",
                self.t_id
            )));
        }
        if !self.drift.is_finite() {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        for q in &self.qubits {
            channels::decay_params(0.0, q.t1, q.t2)?;
        }
        Ok(())
    }
}

/// Counts of measured bitstrings.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotResult {
    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bits: &str) -> f64 {
        self.count(bits) as f64 / self.shots as f64
    }

    /// Relative frequencies indexed by basis state.
    pub fn frequencies(&self, nqubits: usize) -> Vec<f64> {
        (0..1usize << nqubits)
            .map(|i| self.frequency(&bitstring(i, nqubits)))
            .collect()
    }
}

/// `q0 q1 …` with qubit 0 first.
pub fn bitstring(index: usize, nqubits: usize) -> String {
    format!("{index:0nqubits$b}")
}

/// One draw of the random-rotation angle that dephases with probability `p`
/// on average: `θ ~ N(0, ln((1 − 2p)^{-2}))`.
pub fn stochastic_rz_dephasing<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<f64> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::ProbabilityOutOfRange {
            name: "p_z (random rotation)",
            value: p,
            lo: 0.0,
            hi: 0.5,
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let var = -2.0 * (-2.0 * p).ln_1p();
    let normal =
        Normal::new(0.0, var.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(normal.sample(rng))
}

struct Register<'a> {
    n: usize,
    dims: Vec<usize>,
    rho: ComplexMatrix,
    noise: Option<&'a NoiseModel>,
    pending: Vec<f64>,
}

impl<'a> Register<'a> {
    fn new(n: usize, rho: ComplexMatrix, noise: Option<&'a NoiseModel>) -> Self {
        Self {
            n,
            dims: vec![2; n],
            rho,
            noise,
            pending: vec![0.0; n],
        }
    }

    fn unitary(&mut self, u: &ComplexMatrix, targets: &[usize]) -> Result<()> {
        let full = embed_operator(u, &self.dims, targets)?;
        self.rho = full.conjugate(&self.rho)?;
        Ok(())
    }

    fn kraus(&mut self, ch: &channels::QuantumChannel, q: usize) -> Result<()> {
        let state = DensityMatrix::from_trusted(std::mem::replace(
            &mut self.rho,
            ComplexMatrix::zeros(0, 0),
        ));
        self.rho = channels::apply_channel_on(ch, &state, &self.dims, &[q])?.into_matrix();
        Ok(())
    }

    /// Relaxation (and drift, for idle time) on `q` over `d` ns.
    fn relax<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        d: f64,
        idle: bool,
        rng: Option<&mut R>,
    ) -> Result<()> {
        let Some(noise) = self.noise else {
            return Ok(());
        };
        if d <= 0.0 {
            return Ok(());
        }
        let times = noise.qubits[q];
        let p = channels::decay_params(d, times.t1, times.t2)?;
        if p.p_x > 0.0 {
            self.kraus(&channels::amplitude_damping(p.p_x)?, q)?;
        }
        if p.p_z > 0.0 {
            match rng {
                Some(rng) if noise.stochastic_dephasing => {
                    let theta = stochastic_rz_dephasing(p.p_z, rng)?;
                    self.unitary(&pauli::rz(theta), &[q])?;
                }
                _ => self.kraus(&channels::dephasing_kraus(p.p_z)?, q)?,
            }
        }
        if idle && noise.drift != 0.0 {
            self.unitary(&pauli::rz(noise.drift * d), &[q])?;
        }
        Ok(())
    }

    fn flush<R: Rng + ?Sized>(&mut self, q: usize, rng: Option<&mut R>) -> Result<()> {
        let d = std::mem::take(&mut self.pending[q]);
        self.relax(q, d, true, rng)
    }

    fn run<R: Rng + ?Sized>(&mut self, gates: &[Gate], mut rng: Option<&mut R>) -> Result<()> {
        for g in gates {
            if g.kind == GateKind::Identity {
                self.pending[g.targets[0]] += g.duration;
                continue;
            }
            for &q in &g.targets {
                self.flush(q, rng.as_deref_mut())?;
            }
            self.unitary(&g.kind.matrix(), &g.targets)?;
            for &q in &g.targets {
                self.relax(q, g.duration, false, rng.as_deref_mut())?;
            }
        }
        for q in 0..self.n {
            self.flush(q, rng.as_deref_mut())?;
        }
        Ok(())
    }
}

fn ground_state(n: usize) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(1 << n, 1 << n);
    rho[(0, 0)] = C64::new(1.0, 0.0);
    rho
}

fn check(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<()> {
    circuit.validate()?;
    if let Some(noise) = noise {
        noise.validate(circuit.nqubits)?;
    }
    Ok(())
}

/// Execute from `|0…0>`. Dephasing is applied as a channel even when the
/// noise model asks for random rotations.
pub fn run_density(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<DensityMatrix> {
    run_density_from(
        circuit,
        &DensityMatrix::from_trusted(ground_state(circuit.nqubits)),
        noise,
    )
}

pub fn run_density_from(
    circuit: &Circuit,
    rho0: &DensityMatrix,
    noise: Option<&NoiseModel>,
) -> Result<DensityMatrix> {
    check(circuit, noise)?;
    if rho0.dim() != 1 << circuit.nqubits {
        return Err(Error::DimensionMismatch(format!(
            "initial state dim {} for {} qubits",
            rho0.dim(),
            circuit.nqubits
        )));
    }
    let mut reg = Register::new(circuit.nqubits, rho0.matrix().clone(), noise);
    reg.run::<ChaCha8Rng>(&circuit.gates, None)?;
    Ok(DensityMatrix::from_trusted(reg.rho))
}

/// Execute one stochastic trajectory: every dephasing step becomes a random Rz.
pub fn run_density_stochastic<R: Rng + ?Sized>(
    circuit: &Circuit,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<DensityMatrix> {
    check(circuit, Some(noise))?;
    let mut reg = Register::new(circuit.nqubits, ground_state(circuit.nqubits), Some(noise));
    reg.run(&circuit.gates, Some(rng))?;
    Ok(DensityMatrix::from_trusted(reg.rho))
}

/// Computational-basis probabilities, clamped to `[0, 1]` and renormalized.
pub fn probabilities(rho: &DensityMatrix) -> Vec<f64> {
    let mut p: Vec<f64> = rho.populations().into_iter().map(|x| x.max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Multinomial counts via sequential binomial draws.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    let mut counts = vec![0; probs.len()];
    let mut left = shots;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Sample `shots` outcomes from a probability vector over `nqubits`.
pub fn sample_probabilities(
    probs: &[f64],
    nqubits: usize,
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    if probs.len() != 1 << nqubits {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {nqubits} qubits",
            probs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = multinomial(probs, shots, &mut rng)?;
    Ok(ShotResult {
        counts: counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(i, c)| (bitstring(i, nqubits), c))
            .collect(),
        shots,
        seed,
    })
}

/// Run and sample. With stochastic dephasing each shot is its own trajectory.
pub fn sample(
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    match noise {
        Some(nm) if nm.stochastic_dephasing => {
            if shots == 0 {
                return Err(Error::InvalidParameter("shots must be positive".into()));
            }
            let n = circuit.nqubits;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = BTreeMap::new();
            for _ in 0..shots {
                let p = probabilities(&run_density_stochastic(circuit, nm, &mut rng)?);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let idx = p
                    .iter()
                    .position(|&x| {
                        acc += x;
                        u < acc
                    })
                    .unwrap_or(p.len() - 1);
                *counts.entry(bitstring(idx, n)).or_insert(0) += 1;
            }
            Ok(ShotResult {
                counts,
                shots,
                seed,
            })
        }
        _ => {
            let p = probabilities(&run_density(circuit, noise)?);
            sample_probabilities(&p, circuit.nqubits, shots, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinsys::singlet;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn bell_state() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::h(0)).push(Gate::cx(0, 1));
        let rho = run_density(&circ, None).unwrap();
        let m = rho.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(i, j)] - c(0.5)).norm() < 1e-12);
        }
    }

    #[test]
    fn measurement_map_sends_singlet_to_11() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::cx(0, 1)).push(Gate::h(0));
        let rho = run_density_from(&circ, &DensityMatrix::pure(&singlet()).unwrap(), None).unwrap();
        assert!((rho.populations()[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idle_decay_of_excited_state() {
        let (t1, t_id, n) = (20.0, 0.3, 57);
        let mut circ = Circuit::new(1);
        circ.push(Gate::x(0));
        circ.extend((0..n).map(|_| Gate::id(0, t_id)));
        let noise = NoiseModel::uniform(1, t1, t1, t_id);
        let p1 = run_density(&circ, Some(&noise)).unwrap().populations()[1];
        assert!((p1 - (-(n as f64) * t_id / t1).exp()).abs() < 1e-10);
    }

    #[test]
    fn empty_circuit_matches_channel_sequence() {
        let (t1, t2, d) = (30.0, 25.0, 7.5);
        let mut circ = Circuit::new(2);
        circ.push(Gate::h(0))
            .push(Gate::ry(1, 0.7))
            .push(Gate::id(0, d))
            .push(Gate::id(1, d));
        let noise = NoiseModel::uniform(2, t1, t2, 0.1);
        let got = run_density(&circ, Some(&noise)).unwrap();

        let mut ideal = circ.clone();
        ideal.gates.truncate(2);
        let mut want = run_density(&ideal, None).unwrap();
        let p = channels::decay_params(d, t1, t2).unwrap();
        let ad = channels::amplitude_damping(p.p_x).unwrap();
        let dz = channels::dephasing_kraus(p.p_z).unwrap();
        for q in 0..2 {
            want = channels::apply_channel(&ad, &want, &[q]).unwrap();
            want = channels::apply_channel(&dz, &want, &[q]).unwrap();
        }
        assert!(got.matrix().max_abs_diff(want.matrix()) < 1e-10);
    }

    #[test]
    fn echo_sequence_is_identity() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 4, 6, 8] {
            let a: f64 = rng.random_range(-20.0..20.0);
            let mut u = pauli::rz(a / (2.0 * n as f64));
            for _ in 0..n - 1 {
                u = &pauli::rz(a / n as f64) * &(&pauli::x() * &u);
            }
            u = &pauli::rz(a / (2.0 * n as f64)) * &(&pauli::x() * &u);
            assert!(
                u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn echoes_cancel_drift_in_simulation() {
        let n = 4;
        let mut circ = Circuit::new(1);
        circ.push(Gate::h(0));
        circ.push(Gate::id(0, 1.0));
        for k in 0..n {
            circ.push(Gate::x(0));
            circ.push(Gate::id(0, if k + 1 == n { 1.0 } else { 2.0 }));
        }
        let noise = NoiseModel::ideal(1, 1.0).with_drift(0.37);
        let rho = run_density(&circ, Some(&noise)).unwrap();
        assert!((rho.matrix()[(0, 1)] - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn positivity_after_every_gate() {
        let noise = NoiseModel::uniform(2, 15.0, 12.0, 0.5);
        let gates = [
            Gate::h(0).with_duration(1.0),
            Gate::cx(0, 1).with_duration(2.0),
            Gate::ry(1, 1.1).with_duration(0.5),
            Gate::id(0, 3.0),
            Gate::cry(1, 0, 0.4).with_duration(1.0),
        ];
        let mut circ = Circuit::new(2);
        for g in gates {
            circ.push(g);
            let rho = run_density(&circ, Some(&noise)).unwrap();
            assert!((rho.trace() - 1.0).abs() < 1e-12);
            assert!(rho.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn malformed_gates_rejected() {
        for g in [
            Gate::x(3),
            Gate::cx(1, 1),
            Gate::new(GateKind::CX, vec![0]),
            Gate::custom(
                vec![0],
                ComplexMatrix::from_real(2, 2, &[1., 1., 0., 1.]).unwrap(),
            ),
            Gate::rz(0, f64::NAN),
            Gate::h(0).with_duration(-1.0),
        ] {
            let mut circ = Circuit::new(2);
            circ.push(g);
            assert!(matches!(
                run_density(&circ, None),
                Err(Error::MalformedGate(_))
            ));
        }
    }

    #[test]
    fn deterministic_sampling() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::x(0)).push(Gate::x(1));
        let r = sample(&circ, None, 1000, 5).unwrap();
        assert_eq!(r.count("11"), 1000);
        assert_eq!(r.counts.len(), 1);
    }

    #[test]
    fn same_seed_same_counts() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::h(0)).push(Gate::ry(1, 0.9));
        let a = sample(&circ, None, 5000, 99).unwrap();
        let b = sample(&circ, None, 5000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 5000);
    }

    #[test]
    fn hadamard_shots_within_binomial_band() {
        let mut circ = Circuit::new(1);
        circ.push(Gate::h(0));
        let band = 4.0 * (0.25f64 / 5000.0).sqrt();
        let inside = (0..200)
            .filter(|&s| (sample(&circ, None, 5000, s).unwrap().frequency("0") - 0.5).abs() <= band)
            .count();
        assert!(inside >= 198, "{inside}/200");
    }

    #[test]
    fn random_rotation_zero_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(stochastic_rz_dephasing(0.0, &mut rng).unwrap(), 0.0);
        assert!(stochastic_rz_dephasing(0.5, &mut rng).is_err());
    }

    #[test]
    fn random_rotation_coherence_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| stochastic_rz_dephasing(0.25, &mut rng).unwrap().cos())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "{mean}");
    }

    #[test]
    fn random_rotation_ensemble_matches_channel() {
        let p = 0.2;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[c(s), c(s)]).unwrap();
        let want = channels::dephasing_kraus(p).unwrap().apply(&plus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let th = stochastic_rz_dephasing(p, &mut rng).unwrap();
            let out = plus.evolve(&pauli::rz(th)).unwrap();
            let x = out.matrix()[(1, 0)].re;
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - want.matrix()[(1, 0)].re).abs() < 3.0 * se);
    }

    #[test]
    fn stochastic_sampling_matches_channel_statistics() {
        // H, dephase, H: P(1) = p_z
        let (t2, d) = (10.0, 4.0);
        let mut circ = Circuit::new(1);
        circ.push(Gate::h(0)).push(Gate::id(0, d)).push(Gate::h(0));
        let mut noise = NoiseModel::uniform(1, f64::INFINITY, t2, 1.0);
        noise.stochastic_dephasing = true;
        let shots = 20_000;
        let r = sample(&circ, Some(&noise), shots, 3).unwrap();
        let pz = channels::decay_params(d, f64::INFINITY, t2).unwrap().p_z;
        let se = (pz * (1.0 - pz) / shots as f64).sqrt();
        assert!((r.frequency("1") - pz).abs() < 4.0 * se);
    }

    #[test]
    fn dump_lines() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::ry(0, 0.5))
            .push(Gate::cx(0, 1))
            .push(Gate::id(1, 2.5));
        assert_eq!(circ.dump(), "RY 0 0.5 0\nCX 0,1 - 0\nI 1 - 2.5\n");
    }

    #[test]
    fn multinomial_sums_to_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = multinomial(&[0.1, 0.0, 0.6, 0.3], 777, &mut rng).unwrap();
        assert_eq!(c.iter().sum::<u64>(), 777);
        assert_eq!(c[1], 0);
    }
}
