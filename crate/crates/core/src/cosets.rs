//! Coset states `|W_{x,z}⟩`, built three independent ways.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::f2::{BitVec, Subspace};
use crate::qstate::{Circuit, Gate, StateVec};

/// A coset state label with canonical representatives:
/// `x ∈ ⟨e_i⟩_{i∈Iᶜ}` and `z ∈ ⟨e_i⟩_{i∈I}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetLabel<'a> {
    w: &'a Subspace,
    x: BitVec,
    z: BitVec,
}

impl<'a> CosetLabel<'a> {
    pub fn new(w: &'a Subspace, x: BitVec, z: BitVec) -> Result<Self> {
        let n = w.ambient_dim();
        if x.len() != n || z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if x.len() != n { x.len() } else { z.len() },
            });
        }
        if !x.supported_in(w.non_pivots()) {
            return Err(Error::InvalidLabel(format!(
                "x = {x} has support on a pivot column"
            )));
        }
        if !z.supported_in(w.pivots()) {
            return Err(Error::InvalidLabel(format!(
                "z = {z} has support off the pivot columns"
            )));
        }
        Ok(Self { w, x, z })
    }

    /// Label from packed representative bits; see [`Subspace::x_rep`].
    pub fn from_bits(w: &'a Subspace, x_bits: u64, z_bits: u64) -> Self {
        Self {
            w,
            x: w.x_rep(x_bits),
            z: w.z_rep(z_bits),
        }
    }

    pub fn subspace(&self) -> &Subspace {
        self.w
    }

    pub fn x(&self) -> &BitVec {
        &self.x
    }

    pub fn z(&self) -> &BitVec {
        &self.z
    }

    /// `x + z`; the supports are disjoint so this is a plain union.
    pub fn x_plus_z(&self) -> BitVec {
        self.x.xor(&self.z)
    }
}

/// `CNOT_J H_I`: Hadamards on every pivot, then one CNOT per cross pair,
/// sorted by control and then target.
pub fn encoder_circuit(w: &Subspace) -> Circuit {
    let mut c = Circuit::new();
    for &i in w.pivots() {
        c.push(Gate::H(i));
    }
    for (i, j) in w.cross_pairs() {
        c.push(Gate::cnot(i, j));
    }
    c
}

fn uniform_amplitude(w: &Subspace) -> f64 {
    (0.5f64).powf(w.dim() as f64 / 2.0)
}

/// `|W⟩`: equal amplitudes on the elements of `W`.
pub fn subspace_state(w: &Subspace) -> StateVec {
    let n = w.ambient_dim();
    let a = Complex64::new(uniform_amplitude(w), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for u in w.elements() {
        amps[u.basis_index() as usize] = a;
    }
    StateVec::from_amplitudes(n, amps).expect("amplitude count matches qubit count")
}

/// `|W_{x,z}⟩ = 2^{-m/2} Σ_{u∈W} (−1)^{z·u} |x + u⟩`, straight from the definition.
pub fn coset_state_direct(label: &CosetLabel<'_>) -> StateVec {
    let w = label.subspace();
    let n = w.ambient_dim();
    let a = uniform_amplitude(w);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for u in w.elements() {
        let sign = if label.z.dot(&u) { -a } else { a };
        amps[label.x.xor(&u).basis_index() as usize] = Complex64::new(sign, 0.0);
    }
    StateVec::from_amplitudes(n, amps).expect("amplitude count matches qubit count")
}

/// `X_{supp x} Z_{supp z} |W⟩`
pub fn coset_state_pauli(label: &CosetLabel<'_>) -> StateVec {
    let mut paulis = Circuit::new();
    for q in label.z.ones() {
        paulis.push(Gate::Z(q));
    }
    for q in label.x.ones() {
        paulis.push(Gate::X(q));
    }
    subspace_state(label.subspace())
        .with_circuit(&paulis)
        .expect("label coordinates are in range")
}

/// `CNOT_J H_I |x + z⟩`
pub fn coset_state_encoded(label: &CosetLabel<'_>) -> StateVec {
    StateVec::from_bits(&label.x_plus_z())
        .with_circuit(&encoder_circuit(label.subspace()))
        .expect("encoder indices are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::{enumerate_subspaces, BitMat};
    use crate::qstate::{Projector, TOLERANCE};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn space(s: &str) -> Subspace {
        Subspace::half_dimensional(&s.parse::<BitMat>().unwrap()).unwrap()
    }

    fn bits(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn two_term(n: usize, terms: &[(u64, f64)]) -> StateVec {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for &(i, a) in terms {
            amps[i as usize] = Complex64::new(a * FRAC_1_SQRT_2, 0.0);
        }
        StateVec::from_amplitudes(n, amps).unwrap()
    }

    #[test]
    fn encoder_for_the_diagonal_line() {
        let w = space("11");
        let c = encoder_circuit(&w);
        assert_eq!(c.to_string(), "H 1\nCNOT 1 2\n");
        let s = StateVec::zero(2).with_circuit(&c).unwrap();
        assert!(s.max_abs_diff(&two_term(2, &[(0b00, 1.0), (0b11, 1.0)])) < TOLERANCE);
    }

    #[test]
    fn encoder_for_m2_example() {
        let w = space("1100,0010");
        let c = encoder_circuit(&w);
        assert_eq!(c.to_string(), "H 1\nH 3\nCNOT 1 2\n");
        // Φ⁺ ⊗ |+⟩ ⊗ |0⟩
        let expected = {
            let mut s = StateVec::zero(4);
            s.run_circuit(&"H 1\nCNOT 1 2\nH 3".parse().unwrap())
                .unwrap();
            s
        };
        assert!(subspace_state(&w).max_abs_diff(&expected) < TOLERANCE);
        assert!(
            StateVec::zero(4)
                .with_circuit(&c)
                .unwrap()
                .max_abs_diff(&expected)
                < TOLERANCE
        );
    }

    #[test]
    fn encoder_for_identity_block_is_hadamards_only() {
        let w = space("100000,010000,001000");
        let c = encoder_circuit(&w);
        assert_eq!(c.to_string(), "H 1\nH 2\nH 3\n");
        let s = StateVec::zero(6).with_circuit(&c).unwrap();
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expect = if i & 0b111 == 0 {
                (0.125f64).sqrt()
            } else {
                0.0
            };
            assert!((a.re - expect).abs() < TOLERANCE && a.im.abs() < TOLERANCE);
        }
    }

    #[test]
    fn subspace_state_of_worked_example() {
        let w = space("101001,011101,000010");
        let s = subspace_state(&w);
        let support: Vec<u64> = (0..64)
            .filter(|&i| s.amplitude(i).norm() > TOLERANCE)
            .collect();
        assert_eq!(support.len(), 8);
        for i in support {
            assert!(w.contains(&BitVec::from_basis_index(6, i)));
            assert!((s.amplitude(i).re - (0.125f64).sqrt()).abs() < TOLERANCE);
        }
    }

    #[test]
    fn empty_subspace_state_is_scalar_one() {
        let w = Subspace::row_space(&BitMat::zeros(0, 0));
        let s = subspace_state(&w);
        assert_eq!(s.num_qubits(), 0);
        assert!((s.amplitude(0).re - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn direct_construction_examples() {
        let w3 = space("11");
        // z = 10 flips the sign of |11⟩.
        let l = CosetLabel::new(&w3, bits("00"), bits("10")).unwrap();
        assert!(
            coset_state_direct(&l).max_abs_diff(&two_term(2, &[(0, 1.0), (3, -1.0)])) < TOLERANCE
        );
        let l = CosetLabel::new(&w3, bits("00"), bits("00")).unwrap();
        assert!(coset_state_direct(&l).max_abs_diff(&subspace_state(&w3)) < TOLERANCE);
        let l = CosetLabel::new(&w3, bits("01"), bits("10")).unwrap();
        let psi_minus = two_term(2, &[(0b01, 1.0), (0b10, -1.0)]);
        assert!(coset_state_direct(&l).equals_up_to_phase(&psi_minus, TOLERANCE));
        assert!(coset_state_encoded(&l).max_abs_diff(&psi_minus) < TOLERANCE);
    }

    #[test]
    fn pauli_construction_for_m2_example() {
        let w = space("1100,0010");
        let l = CosetLabel::new(&w, bits("0001"), bits("1010")).unwrap();
        // Φ⁻ ⊗ |−⟩ ⊗ |1⟩
        let expected = StateVec::basis(4, 0b1011)
            .with_circuit(&"H 1\nCNOT 1 2\nH 3".parse().unwrap())
            .unwrap();
        assert!(coset_state_pauli(&l).max_abs_diff(&expected) < TOLERANCE);
        assert!(coset_state_direct(&l).max_abs_diff(&expected) < TOLERANCE);
    }

    #[test]
    fn labels_reject_wrong_supports() {
        let w3 = space("11");
        assert!(CosetLabel::new(&w3, bits("10"), bits("00")).is_err());
        assert!(CosetLabel::new(&w3, bits("00"), bits("01")).is_err());
        assert!(CosetLabel::new(&w3, bits("000"), bits("00")).is_err());
    }

    #[test]
    fn three_constructions_agree_for_m_up_to_2() {
        for m in 1..=2usize {
            for w in enumerate_subspaces(2 * m, m) {
                for xb in 0..1u64 << m {
                    for zb in 0..1u64 << m {
                        let l = CosetLabel::from_bits(&w, xb, zb);
                        let d = coset_state_direct(&l);
                        assert!(d.max_abs_diff(&coset_state_pauli(&l)) < TOLERANCE);
                        assert!(d.equals_up_to_phase(&coset_state_encoded(&l), TOLERANCE));
                    }
                }
            }
        }
    }

    #[test]
    fn coset_states_form_an_orthonormal_basis() {
        for m in 1..=2usize {
            for w in enumerate_subspaces(2 * m, m) {
                let states: Vec<StateVec> = (0..1u64 << m)
                    .flat_map(|xb| (0..1u64 << m).map(move |zb| (xb, zb)))
                    .map(|(xb, zb)| coset_state_direct(&CosetLabel::from_bits(&w, xb, zb)))
                    .collect();
                for (a, sa) in states.iter().enumerate() {
                    for (b, sb) in states.iter().enumerate() {
                        let ip = sa.inner_product(sb).unwrap();
                        let expect = if a == b { 1.0 } else { 0.0 };
                        assert!((ip - Complex64::new(expect, 0.0)).norm() < TOLERANCE);
                    }
                }
            }
        }
    }

    /// A single generator `v` with leading index `i`: `CNOT_{i,B_i} H_i |c⟩ = (|c⟩ + |c+v⟩)/√2`.
    #[test]
    fn single_generator_superposition() {
        let v = bits("001011");
        let lead = 2;
        let mut c = Circuit::new();
        c.push(Gate::H(lead));
        for j in v.ones().filter(|&j| j != lead) {
            c.push(Gate::cnot(lead, j));
        }
        for ci in 0..64u64 {
            let cv = BitVec::from_basis_index(6, ci);
            if cv.get(lead) {
                continue;
            }
            let out = StateVec::from_bits(&cv).with_circuit(&c).unwrap();
            let expect = two_term(6, &[(ci, 1.0), (cv.xor(&v).basis_index(), 1.0)]);
            assert!(out.max_abs_diff(&expect) < TOLERANCE);
        }
    }

    #[test]
    fn product_states_of_first_example() {
        // W⁽¹⁾ = span{01}: |W_{10,01}⟩ = |1⟩ ⊗ |−⟩
        let w1 = space("01");
        let l = CosetLabel::new(&w1, bits("10"), bits("01")).unwrap();
        let s = coset_state_encoded(&l);
        let minus = two_term(2, &[(0b10, 1.0), (0b11, -1.0)]);
        assert!(s.max_abs_diff(&minus) < TOLERANCE);
        assert!(
            (s.project_prob(&[Projector::Comp1, Projector::PlusI])
                .unwrap()
                - 0.5)
                .abs()
                < TOLERANCE
        );
    }
}
