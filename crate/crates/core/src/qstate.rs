//! Dense state-vector simulation over the gate set {H, X, Z, CNOT}.
//!
//! Qubit 0 is the most significant bit of a computational-basis index, so the
//! basis state for bit string `b₀b₁…` reads left to right like the string.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::f2::BitVec;

/// Comparison tolerance for amplitudes, probabilities and operator entries.
pub const TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    fn check(&self, num_qubits: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                })
            }
        };
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => in_range(q),
            Gate::Cnot { control, target } => {
                in_range(control)?;
                in_range(target)?;
                if control == target {
                    return Err(Error::CnotSelfLoop(control));
                }
                Ok(())
            }
        }
    }

    /// The same gate with every qubit index moved by `offset`.
    pub fn shifted(&self, offset: isize) -> Gate {
        let s = |q: usize| q.checked_add_signed(offset).expect("qubit shift underflow");
        match *self {
            Gate::H(q) => Gate::H(s(q)),
            Gate::X(q) => Gate::X(s(q)),
            Gate::Z(q) => Gate::Z(s(q)),
            Gate::Cnot { control, target } => Gate::cnot(s(control), s(target)),
        }
    }
}

/// One-based text form: `H 1`, `CNOT 1 2`.
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {}", q + 1),
            Gate::X(q) => write!(f, "X {}", q + 1),
            Gate::Z(q) => write!(f, "Z {}", q + 1),
            Gate::Cnot { control, target } => write!(f, "CNOT {} {}", control + 1, target + 1),
        }
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let index = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse(format!("bad qubit index {t:?}"))),
            }
        };
        match parts.as_slice() {
            ["H", q] => Ok(Gate::H(index(q)?)),
            ["X", q] => Ok(Gate::X(index(q)?)),
            ["Z", q] => Ok(Gate::Z(index(q)?)),
            ["CNOT", c, t] => Ok(Gate::cnot(index(c)?, index(t)?)),
            _ => Err(Error::Parse(format!("unrecognized gate {s:?}"))),
        }
    }
}

/// An ordered gate list, applied first to last.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Circuit(Vec<Gate>);

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, g: Gate) {
        self.0.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn gates(&self) -> &[Gate] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every gate in the set is self-inverse, so the inverse is the reversal.
    pub fn inverse(&self) -> Circuit {
        Circuit(self.0.iter().rev().copied().collect())
    }

    pub fn shifted(&self, offset: isize) -> Circuit {
        Circuit(self.0.iter().map(|g| g.shifted(offset)).collect())
    }
}

impl From<Vec<Gate>> for Circuit {
    fn from(gates: Vec<Gate>) -> Self {
        Circuit(gates)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Circuit)
    }
}

/// Rank-one single-qubit projectors used by the strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Projector {
    Comp0,
    Comp1,
    /// `(|0⟩ + i|1⟩)/√2`
    PlusI,
    /// `(|0⟩ − i|1⟩)/√2`
    MinusI,
}

impl Projector {
    pub fn ket(self) -> [Complex64; 2] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Projector::Comp0 => [ONE, ZERO],
            Projector::Comp1 => [ZERO, ONE],
            Projector::PlusI => [h, I * h],
            Projector::MinusI => [h, -I * h],
        }
    }
}

/// A product of single-qubit projectors, one per qubit, qubit 0 first.
pub type ProjectorSpec = Vec<Projector>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureBasis {
    /// Outcome 0 is `|0⟩`, outcome 1 is `|1⟩`.
    Computational,
    /// Outcome 0 is `|+i⟩`, outcome 1 is `|−i⟩`.
    ImagPair,
}

impl MeasureBasis {
    pub fn projector(self, outcome: u8) -> Projector {
        match (self, outcome) {
            (MeasureBasis::Computational, 0) => Projector::Comp0,
            (MeasureBasis::Computational, _) => Projector::Comp1,
            (MeasureBasis::ImagPair, 0) => Projector::PlusI,
            (MeasureBasis::ImagPair, _) => Projector::MinusI,
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct StateVec {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVec {
    /// `|0…0⟩`
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: u64) -> Self {
        assert!(num_qubits < 31, "state vector too large");
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index as usize] = ONE;
        Self { num_qubits, amps }
    }

    /// The computational-basis state labelled by a bit string.
    pub fn from_bits(bits: &BitVec) -> Self {
        Self::basis(bits.len(), bits.basis_index())
    }

    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { num_qubits, amps })
    }

    /// `⊗_q |π_q⟩`
    pub fn product(projectors: &[Projector]) -> Self {
        let mut amps = vec![ONE];
        for p in projectors {
            let [a, b] = p.ket();
            amps = amps.iter().flat_map(|&c| [c * a, c * b]).collect();
        }
        Self {
            num_qubits: projectors.len(),
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.check(self.num_qubits)?;
        match *g {
            Gate::H(q) => {
                let m = self.mask(q);
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                for i in (0..self.amps.len()).filter(|i| i & m == 0) {
                    let (a, b) = (self.amps[i], self.amps[i | m]);
                    self.amps[i] = (a + b) * h;
                    self.amps[i | m] = (a - b) * h;
                }
            }
            Gate::X(q) => {
                let m = self.mask(q);
                for i in (0..self.amps.len()).filter(|i| i & m == 0) {
                    self.amps.swap(i, i | m);
                }
            }
            Gate::Z(q) => {
                let m = self.mask(q);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (self.mask(control), self.mask(target));
                for i in (0..self.amps.len()).filter(|i| i & c != 0 && i & t == 0) {
                    self.amps.swap(i, i | t);
                }
            }
        }
        Ok(())
    }

    pub fn run_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        circuit.gates().iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Consuming form of [`StateVec::run_circuit`].
    pub fn with_circuit(mut self, circuit: &Circuit) -> Result<Self> {
        self.run_circuit(circuit)?;
        Ok(self)
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner_product(&self, other: &StateVec) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality up to a global phase: `|⟨a|b⟩| ≥ 1 − tol` for unit vectors.
    pub fn equals_up_to_phase(&self, other: &StateVec, tol: f64) -> bool {
        self.inner_product(other)
            .is_ok_and(|ip| ip.norm() >= 1.0 - tol)
    }

    /// Largest entrywise deviation; `∞` when the sizes differ.
    pub fn max_abs_diff(&self, other: &StateVec) -> f64 {
        if self.num_qubits != other.num_qubits {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Reduced state on the first half of the qubits.
    pub fn partial_trace_second_half(&self) -> Result<DensityOp> {
        if !self.num_qubits.is_multiple_of(2) {
            return Err(Error::OddQubitCount(self.num_qubits));
        }
        let m = self.num_qubits / 2;
        let d = 1usize << m;
        let mut rho = DensityOp::zeros(m);
        for a in 0..d {
            for b in a..d {
                let v: Complex64 = (0..d)
                    .map(|c| self.amps[(a << m) | c] * self.amps[(b << m) | c].conj())
                    .sum();
                rho.entries[a * d + b] = v;
                rho.entries[b * d + a] = v.conj();
            }
        }
        Ok(rho)
    }

    /// `|⟨π|ψ⟩|²` for a product projector covering every qubit.
    pub fn project_prob(&self, spec: &[Projector]) -> Result<f64> {
        if spec.len() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: spec.len(),
            });
        }
        // Contract the last qubit at each step, halving the buffer.
        let mut buf = self.amps.clone();
        for p in spec.iter().rev() {
            let [a, b] = p.ket();
            let (a, b) = (a.conj(), b.conj());
            buf = buf
                .chunks_exact(2)
                .map(|pair| a * pair[0] + b * pair[1])
                .collect();
        }
        Ok(buf[0].norm_sqr())
    }

    /// `‖(π ⊗ Id)|ψ⟩‖²` where the product projector `spec` acts on qubits
    /// `first .. first + spec.len()` and the rest are left alone.
    pub fn project_prob_on(&self, first: usize, spec: &[Projector]) -> Result<f64> {
        if first + spec.len() > self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: first + spec.len() - 1,
                num_qubits: self.num_qubits,
            });
        }
        let mut v = self.clone();
        for (k, p) in spec.iter().enumerate() {
            v.project_in_place(first + k, *p);
        }
        Ok(v.norm_sqr())
    }

    /// Applies `|π⟩⟨π|` on qubit `q` without renormalizing.
    fn project_in_place(&mut self, q: usize, p: Projector) {
        let m = self.mask(q);
        let [a, b] = p.ket();
        for i in (0..self.amps.len()).filter(|i| i & m == 0) {
            let overlap = a.conj() * self.amps[i] + b.conj() * self.amps[i | m];
            self.amps[i] = a * overlap;
            self.amps[i | m] = b * overlap;
        }
    }

    /// Samples a single-qubit measurement with Born probabilities and returns
    /// the outcome with the renormalized post-measurement state.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        q: usize,
        basis: MeasureBasis,
        rng: &mut R,
    ) -> Result<(u8, StateVec)> {
        let mut post = self.clone();
        let outcome = post.measure_in_place(q, basis, rng)?;
        Ok((outcome, post))
    }

    /// In-place form of [`StateVec::measure_qubit`].
    pub fn measure_in_place<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        basis: MeasureBasis,
        rng: &mut R,
    ) -> Result<u8> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        let m = self.mask(q);
        let [a0, b0] = basis.projector(0).ket();
        let [a1, b1] = basis.projector(1).ket();
        let (mut p0, mut p1) = (0.0, 0.0);
        for i in (0..self.amps.len()).filter(|i| i & m == 0) {
            let (u, v) = (self.amps[i], self.amps[i | m]);
            p0 += (a0.conj() * u + b0.conj() * v).norm_sqr();
            p1 += (a1.conj() * u + b1.conj() * v).norm_sqr();
        }
        let total = p0 + p1;
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        // A branch with (numerically) zero weight is never selected.
        let outcome = if p0 <= TOLERANCE * TOLERANCE {
            1
        } else if p1 <= TOLERANCE * TOLERANCE || rng.random::<f64>() * total < p0 {
            0
        } else {
            1
        };
        let p = if outcome == 0 { p0 } else { p1 };
        self.project_in_place(q, basis.projector(outcome));
        let scale = 1.0 / p.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
        Ok(outcome)
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVec[{} qubits;", self.num_qubits)?;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > TOLERANCE {
                write!(
                    f,
                    " {:+.4}{:+.4}i|{:0w$b}⟩",
                    a.re,
                    a.im,
                    i,
                    w = self.num_qubits
                )?;
            }
        }
        f.write_str("]")
    }
}

/// A dense `2ⁿ × 2ⁿ` operator, row-major. Used for reduced states and for
/// sums of POVM elements.
#[derive(Clone, PartialEq)]
pub struct DensityOp {
    num_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityOp {
    pub fn zeros(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self {
            num_qubits,
            entries: vec![ZERO; d * d],
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        let mut op = Self::zeros(num_qubits);
        let d = op.dim();
        for i in 0..d {
            op.entries[i * d + i] = ONE;
        }
        op
    }

    /// `|ψ⟩⟨ψ|`
    pub fn pure(psi: &StateVec) -> Self {
        let d = psi.amps.len();
        let mut entries = Vec::with_capacity(d * d);
        for a in &psi.amps {
            entries.extend(psi.amps.iter().map(|b| a * b.conj()));
        }
        Self {
            num_qubits: psi.num_qubits,
            entries,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn add_assign(&mut self, other: &DensityOp) {
        assert_eq!(self.num_qubits, other.num_qubits, "operator size mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.entries {
            *a *= factor;
        }
    }

    /// `Tr[self · other]`
    pub fn trace_product(&self, other: &DensityOp) -> Complex64 {
        let d = self.dim();
        assert_eq!(d, other.dim(), "operator size mismatch");
        (0..d)
            .flat_map(|i| (0..d).map(move |k| (i, k)))
            .map(|(i, k)| self.get(i, k) * other.get(k, i))
            .sum()
    }

    pub fn frobenius_distance(&self, other: &DensityOp) -> f64 {
        assert_eq!(self.num_qubits, other.num_qubits, "operator size mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, c| (self.get(r, c) + self.get(c, r).conj()) * 0.5);
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian, unit trace and positive semidefinite, all within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && (self.trace() - ONE).norm() <= tol
            && self.min_eigenvalue() >= -tol
    }
}

impl fmt::Debug for DensityOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        writeln!(f, "DensityOp[{} qubits]", self.num_qubits)?;
        for r in 0..d {
            let row: Vec<String> = (0..d)
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{:+.3}{:+.3}i", v.re, v.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}
