//! Bob's and Charlie's optimal local strategy.
//!
//! Alice's state is `CNOT_J H_I |x+z⟩`. The players first undo every CNOT
//! that lives on one side ([`separate_local`]), then use local CNOTs to
//! reduce the remaining Bob→Charlie adjacency to a partial matching
//! ([`single_out_bell_pairs`]). What is left is a string of computational
//! qubits and `ℓ` disjoint Bell pairs over `y = f(x+z)`; [`StrategySpec`]
//! measures that and maps outcomes back to guesses.

use std::fmt;

use crate::bound::{inverse_pow2, Rational};
use crate::cosets::{coset_state_encoded, CosetLabel};
use crate::f2::{BitMat, BitVec, Subspace};
use crate::qstate::{Circuit, DensityOp, Gate, MeasureBasis, Projector, StateVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bob,
    Charlie,
}

/// Result of undoing every gate of the encoder that is local to one player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSeparation {
    /// `J′`: encoder CNOTs from a Bob qubit to a Charlie qubit.
    pub cross_pairs: Vec<(usize, usize)>,
    /// `I′`: controls of `J′`, ascending.
    pub entangled_controls: Vec<usize>,
    pub bob_gates: Circuit,
    pub charlie_gates: Circuit,
}

/// Reduces `CNOT_J H_I |x+z⟩` to `CNOT_{J′} H_{I′} |x+z⟩` with local gates only.
pub fn separate_local(w: &Subspace) -> LocalSeparation {
    let m = w.half();
    let pairs = w.cross_pairs();
    let cross_pairs: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| i < m && j >= m)
        .collect();
    let mut entangled_controls: Vec<usize> = cross_pairs.iter().map(|&(i, _)| i).collect();
    entangled_controls.dedup();

    let mut bob_gates = Circuit::new();
    let mut charlie_gates = Circuit::new();
    // Pivots precede their row's other ones, so i ≥ m forces j ≥ m.
    for &(i, j) in &pairs {
        if j < m {
            bob_gates.push(Gate::cnot(i, j));
        } else if i >= m {
            charlie_gates.push(Gate::cnot(i, j));
        }
    }
    for &i in w.pivots() {
        if i >= m {
            charlie_gates.push(Gate::H(i));
        } else if !entangled_controls.contains(&i) {
            bob_gates.push(Gate::H(i));
        }
    }
    LocalSeparation {
        cross_pairs,
        entangled_controls,
        bob_gates,
        charlie_gates,
    }
}

/// Everything the players agree on for one subspace before the game starts.
///
/// After `bob_circuit ⊗ charlie_circuit`, the state is
/// `∏_t CNOT_{i_t, j_t} H_{i_t} |y⟩` with `y = (f₁(first half of x+z), f₂(second half))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizedForm {
    w: Subspace,
    bob_circuit: Circuit,
    charlie_circuit: Circuit,
    residual_pairs: Vec<(usize, usize)>,
    f1: BitMat,
    f2: BitMat,
    f1_inv: BitMat,
    f2_inv: BitMat,
    pairing: Vec<(usize, usize)>,
}

impl LocalizedForm {
    pub fn new(w: &Subspace) -> Self {
        single_out_bell_pairs(w, &separate_local(w))
    }

    pub fn subspace(&self) -> &Subspace {
        &self.w
    }

    pub fn half(&self) -> usize {
        self.w.half()
    }

    /// Bob's local circuit, on qubits `0..m`.
    pub fn bob_circuit(&self) -> &Circuit {
        &self.bob_circuit
    }

    /// Charlie's local circuit, on qubits `m..2m`.
    pub fn charlie_circuit(&self) -> &Circuit {
        &self.charlie_circuit
    }

    pub fn circuit(&self, side: Side) -> &Circuit {
        match side {
            Side::Bob => &self.bob_circuit,
            Side::Charlie => &self.charlie_circuit,
        }
    }

    /// `(i_t, j_t)` sorted by `i_t`.
    pub fn residual_pairs(&self) -> &[(usize, usize)] {
        &self.residual_pairs
    }

    /// `ℓ`
    pub fn num_bell_pairs(&self) -> usize {
        self.residual_pairs.len()
    }

    /// `h_W` as `(i, h(i))` pairs, ascending in both coordinates.
    pub fn pairing(&self) -> &[(usize, usize)] {
        &self.pairing
    }

    pub fn f1(&self) -> &BitMat {
        &self.f1
    }

    pub fn f2(&self) -> &BitMat {
        &self.f2
    }

    /// `f = (f₁, f₂)` on a full `2m`-coordinate vector.
    pub fn apply_f(&self, v: &BitVec) -> BitVec {
        self.apply_halves(v, &self.f1, &self.f2)
    }

    pub fn apply_f_inverse(&self, v: &BitVec) -> BitVec {
        self.apply_halves(v, &self.f1_inv, &self.f2_inv)
    }

    fn apply_halves(&self, v: &BitVec, first: &BitMat, second: &BitMat) -> BitVec {
        let m = self.half();
        first
            .mul_vec(&v.slice(0..m))
            .concat(&second.mul_vec(&v.slice(m..2 * m)))
    }

    /// `∏_t CNOT_{i_t, j_t} H_{i_t}`: the entangling part left after localization.
    pub fn residual_circuit(&self) -> Circuit {
        let mut c = Circuit::new();
        for &(i, _) in &self.residual_pairs {
            c.push(Gate::H(i));
        }
        for &(i, j) in &self.residual_pairs {
            c.push(Gate::cnot(i, j));
        }
        c
    }
}

/// Row additions on the Bob→Charlie adjacency are CNOTs between Bob's controls;
/// column additions are CNOTs between Charlie's targets.
///
/// The adjacency has rows `I ∩ [0, m)` and columns `Iᶜ ∩ [m, 2m)`. Bob
/// `CNOT_{p,q}` adds row `q` to row `p` and, pulled through the Hadamards,
/// adds `y_q` to `y_p`; Charlie `CNOT_{s,t}` adds column `s` to column `t`
/// and `y_s` to `y_t`. Rows are reduced top-down first, then each pivot row
/// is cleared left-to-right with column additions, leaving a partial matching.
pub fn single_out_bell_pairs(w: &Subspace, sep: &LocalSeparation) -> LocalizedForm {
    let m = w.half();
    let rows: Vec<usize> = w.pivots().iter().copied().filter(|&i| i < m).collect();
    let cols: Vec<usize> = w.non_pivots().iter().copied().filter(|&j| j >= m).collect();
    let mut adj = BitMat::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        let gen_row = w.pivots().iter().position(|&p| p == i).expect("row pivot");
        for (c, &j) in cols.iter().enumerate() {
            adj.set(r, c, w.generator().get(gen_row, j));
        }
    }

    let mut bob_circuit = sep.bob_gates.clone();
    let mut charlie_circuit = sep.charlie_gates.clone();
    let mut f1 = BitMat::identity(m);
    let mut f2 = BitMat::identity(m);

    // Row phase: each column gets at most one 1, sitting in a distinct row.
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; rows.len()];
    for c in 0..cols.len() {
        let Some(r) = (0..rows.len()).find(|&r| pivot_of_row[r].is_none() && adj.get(r, c)) else {
            continue;
        };
        pivot_of_row[r] = Some(c);
        for other in 0..rows.len() {
            if other != r && adj.get(other, c) {
                adj.add_row(r, other);
                bob_circuit.push(Gate::cnot(rows[other], rows[r]));
                f1.add_row(rows[r], rows[other]);
            }
        }
    }

    // Column phase: clear the non-pivot ones of each pivot row.
    let mut pivots: Vec<(usize, usize)> = pivot_of_row
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| (r, c)))
        .collect();
    pivots.sort_by_key(|&(_, c)| c);
    for &(r, c) in &pivots {
        for t in 0..cols.len() {
            if t != c && adj.get(r, t) {
                adj.add_col(c, t);
                charlie_circuit.push(Gate::cnot(cols[c], cols[t]));
                f2.add_row(cols[c] - m, cols[t] - m);
            }
        }
    }

    // Controls that lost every cross edge no longer need their Hadamard.
    for (r, &i) in rows.iter().enumerate() {
        if sep.entangled_controls.contains(&i) && pivot_of_row[r].is_none() {
            bob_circuit.push(Gate::H(i));
        }
    }

    let mut residual_pairs: Vec<(usize, usize)> =
        pivots.iter().map(|&(r, c)| (rows[r], cols[c])).collect();
    residual_pairs.sort_unstable();

    let free_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|i| !residual_pairs.iter().any(|(a, _)| a == i))
        .collect();
    let free_cols: Vec<usize> = cols
        .iter()
        .copied()
        .filter(|j| !residual_pairs.iter().any(|(_, b)| b == j))
        .collect();
    debug_assert_eq!(free_rows.len(), free_cols.len());
    let pairing = free_rows.into_iter().zip(free_cols).collect();

    let f1_inv = f1
        .inverse()
        .expect("products of elementary row additions are invertible");
    let f2_inv = f2
        .inverse()
        .expect("products of elementary row additions are invertible");
    LocalizedForm {
        w: w.clone(),
        bob_circuit,
        charlie_circuit,
        residual_pairs,
        f1,
        f2,
        f1_inv,
        f2_inv,
        pairing,
    }
}

/// How one measured qubit feeds the reconstructed `y` vector: measure in
/// `basis`, and `coord` of the player's `ŷ` becomes `outcome ⊕ invert`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRole {
    pub qubit: usize,
    pub basis: MeasureBasis,
    pub coord: usize,
    pub invert: bool,
}

/// The product POVMs and decoders for both players on one subspace.
#[derive(Debug, Clone)]
pub struct StrategySpec {
    lf: LocalizedForm,
    bob: Vec<QubitRole>,
    charlie: Vec<QubitRole>,
}

/// Assigns a measurement and a decoded coordinate to every qubit.
///
/// Bob, qubit `i < m`:
/// * `i ∈ Iᶜ`: computational, reads `y_i`;
/// * `i ∈ I`, unpaired by a Bell pair: computational, stands in for `y_{h(i)}`;
/// * `i = i_t`: `±i` basis, `+i` means `y_{j_t} = 0`.
///
/// Charlie, qubit `j ≥ m`, symmetrically with `h⁻¹`, except that on `j = j_t`
/// the outcome `+i` means `y_{i_t} = 1`.
pub fn build_strategy(lf: &LocalizedForm) -> StrategySpec {
    let w = lf.subspace();
    let m = lf.half();
    let bell_partner_of = |q: usize| {
        lf.residual_pairs.iter().find_map(|&(i, j)| {
            if i == q {
                Some(j)
            } else if j == q {
                Some(i)
            } else {
                None
            }
        })
    };
    let paired_with = |q: usize| {
        lf.pairing.iter().find_map(|&(i, j)| {
            if i == q {
                Some(j)
            } else if j == q {
                Some(i)
            } else {
                None
            }
        })
    };
    let is_pivot = |q: usize| w.pivots().contains(&q);

    let role = |q: usize, own_side_coord: bool, bell_invert: bool| {
        if let Some(partner) = bell_partner_of(q) {
            QubitRole {
                qubit: q,
                basis: MeasureBasis::ImagPair,
                coord: partner,
                invert: bell_invert,
            }
        } else if own_side_coord {
            QubitRole {
                qubit: q,
                basis: MeasureBasis::Computational,
                coord: q,
                invert: false,
            }
        } else {
            QubitRole {
                qubit: q,
                basis: MeasureBasis::Computational,
                coord: paired_with(q).expect("every unmatched qubit is paired by h"),
                invert: false,
            }
        }
    };

    let bob = (0..m).map(|i| role(i, !is_pivot(i), false)).collect();
    let charlie = (m..2 * m).map(|j| role(j, is_pivot(j), true)).collect();
    StrategySpec {
        lf: lf.clone(),
        bob,
        charlie,
    }
}

impl StrategySpec {
    pub fn for_subspace(w: &Subspace) -> Self {
        build_strategy(&LocalizedForm::new(w))
    }

    pub fn localized(&self) -> &LocalizedForm {
        &self.lf
    }

    pub fn roles(&self, side: Side) -> &[QubitRole] {
        match side {
            Side::Bob => &self.bob,
            Side::Charlie => &self.charlie,
        }
    }

    /// Measured bits → guess: `x̂ ∈ CS(W)` for Bob, `ẑ ∈ CS(W⊥)` for Charlie.
    pub fn decode(&self, side: Side, outcomes: &[u8]) -> BitVec {
        let roles = self.roles(side);
        assert_eq!(outcomes.len(), roles.len(), "one outcome per local qubit");
        let mut y = BitVec::zeros(2 * self.lf.half());
        for (role, &o) in roles.iter().zip(outcomes) {
            y.set(role.coord, (o & 1 == 1) ^ role.invert);
        }
        let guess = self.lf.apply_f_inverse(&y);
        let w = self.lf.subspace();
        match side {
            Side::Bob => w.canonical_x(&guess),
            Side::Charlie => w.canonical_z(&guess),
        }
    }

    /// The unique outcome string that [`StrategySpec::decode`] maps to `guess`.
    pub fn outcomes_for(&self, side: Side, guess: &BitVec) -> Vec<u8> {
        let y = self.lf.apply_f(guess);
        self.roles(side)
            .iter()
            .map(|r| u8::from(y.get(r.coord) ^ r.invert))
            .collect()
    }

    /// The product projector, in the post-circuit frame, that answers `guess`.
    pub fn projectors_for(&self, side: Side, guess: &BitVec) -> Vec<Projector> {
        self.roles(side)
            .iter()
            .zip(self.outcomes_for(side, guess))
            .map(|(r, o)| r.basis.projector(o))
            .collect()
    }

    /// The POVM element `B_x̂` (or `C_ẑ`) as an operator on the player's `m`
    /// qubits: `U† |π⟩⟨π| U` with `U` the player's local circuit.
    pub fn povm_element(&self, side: Side, guess: &BitVec) -> DensityOp {
        let m = self.lf.half() as isize;
        let local = match side {
            Side::Bob => self.lf.bob_circuit.clone(),
            Side::Charlie => self.lf.charlie_circuit.shifted(-m),
        };
        let pi = StateVec::product(&self.projectors_for(side, guess));
        DensityOp::pure(
            &pi.with_circuit(&local.inverse())
                .expect("local circuit fits"),
        )
    }

    /// All guesses a player can output: the canonical transversal.
    pub fn guesses(&self, side: Side) -> Vec<BitVec> {
        let w = self.lf.subspace();
        (0..1u64 << self.lf.half())
            .map(|b| match side {
                Side::Bob => w.x_rep(b),
                Side::Charlie => w.z_rep(b),
            })
            .collect()
    }

    /// `Σ_g P_g`, which must be the identity.
    pub fn povm_sum(&self, side: Side) -> DensityOp {
        let mut sum = DensityOp::zeros(self.lf.half());
        for g in self.guesses(side) {
            sum.add_assign(&self.povm_element(side, &g));
        }
        sum
    }

    /// The state the players measure: `|W_{x,z}⟩` after both local circuits.
    pub fn processed_state(&self, label: &CosetLabel<'_>) -> StateVec {
        let mut s = coset_state_encoded(label);
        s.run_circuit(&self.lf.bob_circuit)
            .expect("Bob's circuit fits");
        s.run_circuit(&self.lf.charlie_circuit)
            .expect("Charlie's circuit fits");
        s
    }

    /// `Tr[(B_x̂ ⊗ C_ẑ) |W_{x,z}⟩⟨W_{x,z}|]`
    pub fn guess_probability(&self, label: &CosetLabel<'_>, x_hat: &BitVec, z_hat: &BitVec) -> f64 {
        let state = self.processed_state(label);
        self.guess_probability_on(&state, x_hat, z_hat)
    }

    fn guess_probability_on(&self, processed: &StateVec, x_hat: &BitVec, z_hat: &BitVec) -> f64 {
        let mut spec = self.projectors_for(Side::Bob, x_hat);
        spec.extend(self.projectors_for(Side::Charlie, z_hat));
        processed
            .project_prob(&spec)
            .expect("projector covers every qubit")
    }

    /// Joint success probability on one coset state.
    pub fn success_probability(&self, label: &CosetLabel<'_>) -> f64 {
        self.guess_probability(label, label.x(), label.z())
    }

    /// Probability that one player alone is right on this coset state.
    pub fn marginal_success(&self, side: Side, label: &CosetLabel<'_>) -> f64 {
        let state = self.processed_state(label);
        let (first, guess) = match side {
            Side::Bob => (0, label.x()),
            Side::Charlie => (self.lf.half(), label.z()),
        };
        state
            .project_prob_on(first, &self.projectors_for(side, guess))
            .expect("projector fits")
    }

    /// Joint success averaged over every `(x, z)` of the canonical transversals.
    pub fn subspace_success(&self) -> f64 {
        self.average_over_labels(|label| self.success_probability(label))
    }

    pub fn subspace_marginal(&self, side: Side) -> f64 {
        self.average_over_labels(|label| self.marginal_success(side, label))
    }

    fn average_over_labels(&self, f: impl Fn(&CosetLabel<'_>) -> f64) -> f64 {
        let m = self.lf.half();
        let w = self.lf.subspace();
        let mut total = 0.0;
        for xb in 0..1u64 << m {
            for zb in 0..1u64 << m {
                total += f(&CosetLabel::from_bits(w, xb, zb));
            }
        }
        total / (1u64 << (2 * m)) as f64
    }
}

impl fmt::Display for LocalizedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = |v: &[(usize, usize)]| {
            v.iter()
                .map(|(a, b)| format!("({},{})", a + 1, b + 1))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(f, "bell pairs: {}", self.num_bell_pairs())?;
        writeln!(f, "residual pairs: {}", one(&self.residual_pairs))?;
        write!(f, "h pairing: {}", one(&self.pairing))
    }
}

/// `2^{-(m-k)}` with `k = dim(W ∩ ⟨e_i⟩_{i ≥ m})`; equivalently `2^{-|I ∩ [0,m)|}`.
pub fn win_probability_formula(w: &Subspace) -> Rational {
    let m = w.half();
    let second: Vec<usize> = (m..2 * m).collect();
    inverse_pow2(m - w.intersection_dim(&second))
}

/// The no-entanglement game in which Alice hands out the bits of `x + z`
/// directly. Bob reads his own `x` bits and copies each pivot bit `i` into
/// `x_{h(i)}`; Charlie mirrors this with `h⁻¹`.
#[derive(Debug, Clone)]
pub struct ClassicalStrategy {
    w: Subspace,
    pairing: Vec<(usize, usize)>,
}

impl ClassicalStrategy {
    pub fn new(w: &Subspace) -> Self {
        let m = w.half();
        let rows = w.pivots().iter().copied().filter(|&i| i < m);
        let cols = w.non_pivots().iter().copied().filter(|&j| j >= m);
        Self {
            w: w.clone(),
            pairing: rows.zip(cols).collect(),
        }
    }

    pub fn pairing(&self) -> &[(usize, usize)] {
        &self.pairing
    }

    /// `seen` is the player's half of `x + z` (`m` bits).
    pub fn guess(&self, side: Side, seen: &BitVec) -> BitVec {
        let m = self.w.half();
        assert_eq!(seen.len(), m, "a player sees m bits");
        let mut out = BitVec::zeros(2 * m);
        match side {
            Side::Bob => {
                for i in 0..m {
                    if !seen.get(i) {
                        continue;
                    }
                    match self.pairing.iter().find(|&&(a, _)| a == i) {
                        Some(&(_, j)) => out.set(j, true),
                        None => out.set(i, true),
                    }
                }
            }
            Side::Charlie => {
                for j in m..2 * m {
                    if !seen.get(j - m) {
                        continue;
                    }
                    match self.pairing.iter().find(|&&(_, b)| b == j) {
                        Some(&(i, _)) => out.set(i, true),
                        None => out.set(j, true),
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::enumerate_subspaces;
    use crate::qstate::TOLERANCE;
    use num_traits::ToPrimitive;

    fn space(s: &str) -> Subspace {
        Subspace::half_dimensional(&s.parse::<BitMat>().unwrap()).unwrap()
    }

    fn worked_m3() -> Subspace {
        space("101001,011101,000010")
    }

    fn bits(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn pairs1(v: &[(usize, usize)]) -> Vec<(usize, usize)> {
        v.iter().map(|&(a, b)| (a + 1, b + 1)).collect()
    }

    #[test]
    fn separation_for_m2_example() {
        let sep = separate_local(&space("1100,0010"));
        assert!(sep.cross_pairs.is_empty());
        assert_eq!(sep.bob_gates.to_string(), "CNOT 1 2\nH 1\n");
        assert_eq!(sep.charlie_gates.to_string(), "H 3\n");
    }

    #[test]
    fn separation_for_m3_example() {
        let sep = separate_local(&worked_m3());
        assert_eq!(pairs1(&sep.cross_pairs), vec![(1, 6), (2, 4), (2, 6)]);
        assert_eq!(sep.entangled_controls, vec![0, 1]);
        assert_eq!(sep.bob_gates.to_string(), "CNOT 1 3\nCNOT 2 3\n");
        assert_eq!(sep.charlie_gates.to_string(), "H 5\n");
    }

    #[test]
    fn separation_for_identity_block() {
        let w = space("100000,010000,001000");
        let sep = separate_local(&w);
        assert!(sep.cross_pairs.is_empty());
        assert_eq!(sep.bob_gates.to_string(), "H 1\nH 2\nH 3\n");
        let lf = single_out_bell_pairs(&w, &sep);
        // All Hadamards undone: the players hold |x+z⟩ itself.
        for xb in 0..8 {
            for zb in 0..8 {
                let l = CosetLabel::from_bits(&w, xb, zb);
                let s = coset_state_encoded(&l)
                    .with_circuit(lf.bob_circuit())
                    .unwrap()
                    .with_circuit(lf.charlie_circuit())
                    .unwrap();
                assert!(s.max_abs_diff(&StateVec::from_bits(&l.x_plus_z())) < TOLERANCE);
            }
        }
    }

    /// The adjacency {1→6, 2→4, 2→6} has rank 2, and local operations cannot
    /// change the Schmidt rank, so two Bell pairs remain.
    #[test]
    fn localization_of_m3_example() {
        let w = worked_m3();
        let lf = LocalizedForm::new(&w);
        assert_eq!(pairs1(lf.residual_pairs()), vec![(1, 6), (2, 4)]);
        assert!(lf.pairing().is_empty());
        assert_eq!(
            lf.bob_circuit().to_string(),
            "CNOT 1 3\nCNOT 2 3\nCNOT 2 1\n"
        );
        assert_eq!(lf.charlie_circuit().to_string(), "H 5\n");
        // y = (z1, z1+z2, x3, x4, z5, x6)
        let v = bits("110000");
        assert_eq!(lf.apply_f(&v), bits("100000"));
        let v = bits("010000");
        assert_eq!(lf.apply_f(&v), bits("010000"));
        let v = bits("100000");
        assert_eq!(lf.apply_f(&v), bits("110000"));

        let purity = coset_state_encoded(&CosetLabel::from_bits(&w, 0, 0))
            .partial_trace_second_half()
            .unwrap();
        let p = purity.trace_product(&purity).re;
        assert!(
            (p - 0.25).abs() < TOLERANCE,
            "Schmidt rank 4 means purity 1/4"
        );
    }

    fn assert_localized_identity(w: &Subspace) {
        let lf = LocalizedForm::new(w);
        let m = w.half();
        let residual = lf.residual_circuit();
        for xb in 0..1u64 << m {
            for zb in 0..1u64 << m {
                let l = CosetLabel::from_bits(w, xb, zb);
                let lhs = coset_state_encoded(&l)
                    .with_circuit(lf.bob_circuit())
                    .unwrap()
                    .with_circuit(lf.charlie_circuit())
                    .unwrap();
                let y = lf.apply_f(&l.x_plus_z());
                let rhs = StateVec::from_bits(&y).with_circuit(&residual).unwrap();
                assert!(
                    lhs.max_abs_diff(&rhs) < TOLERANCE,
                    "{w:?} x={} z={}",
                    l.x(),
                    l.z()
                );
                // f fixes x on Bob's side and z on Charlie's side.
                assert_eq!(lf.apply_f(l.x()).slice(0..m), l.x().slice(0..m));
                assert_eq!(lf.apply_f(l.z()).slice(m..2 * m), l.z().slice(m..2 * m));
            }
        }
        let bob_pivots = w.pivots().iter().filter(|&&i| i < m).count();
        assert_eq!(lf.pairing().len() + lf.num_bell_pairs(), bob_pivots);
        for &(i, j) in lf.residual_pairs() {
            assert!(i < m && j >= m && w.pivots().contains(&i) && !w.pivots().contains(&j));
        }
        for g in lf.bob_circuit().gates() {
            assert!(
                matches!(*g, Gate::H(q) if q < m)
                    || matches!(*g, Gate::Cnot { control, target } if control < m && target < m)
            );
        }
        for g in lf.charlie_circuit().gates() {
            assert!(
                matches!(*g, Gate::H(q) if q >= m)
                    || matches!(*g, Gate::Cnot { control, target } if control >= m && target >= m)
            );
        }
    }

    #[test]
    fn localized_form_identity_exhaustive_small_m() {
        for m in 1..=3usize {
            for w in enumerate_subspaces(2 * m, m) {
                assert_localized_identity(&w);
            }
        }
    }

    #[test]
    fn already_matched_needs_no_extra_gates() {
        // Cross adjacency 1→3, 2→4 is a matching.
        let w = space("1010,0101");
        let sep = separate_local(&w);
        let lf = single_out_bell_pairs(&w, &sep);
        assert_eq!(lf.f1(), &BitMat::identity(2));
        assert_eq!(lf.f2(), &BitMat::identity(2));
        assert_eq!(lf.bob_circuit(), &sep.bob_gates);
        assert_eq!(lf.charlie_circuit(), &sep.charlie_gates);
        assert_eq!(pairs1(lf.residual_pairs()), vec![(1, 3), (2, 4)]);
    }

    #[test]
    fn dependent_rows_get_their_hadamard_back() {
        // Both Bob pivots point only at qubit 3: rank 1.
        let w = space("1010,0110");
        let lf = LocalizedForm::new(&w);
        assert_eq!(pairs1(lf.residual_pairs()), vec![(1, 3)]);
        assert_eq!(pairs1(lf.pairing()), vec![(2, 4)]);
        assert_eq!(lf.bob_circuit().to_string(), "CNOT 2 1\nH 2\n");
        assert_localized_identity(&w);
    }

    #[test]
    fn strategy_for_first_line() {
        // W⁽¹⁾ = span{01}: Bob reads x directly, Charlie undoes |±⟩ and reads z.
        let w1 = space("01");
        let s = StrategySpec::for_subspace(&w1);
        assert_eq!(s.localized().bob_circuit().to_string(), "");
        assert_eq!(s.localized().charlie_circuit().to_string(), "H 2\n");
        assert_eq!(s.roles(Side::Bob)[0].basis, MeasureBasis::Computational);
        assert_eq!(s.roles(Side::Charlie)[0].basis, MeasureBasis::Computational);
        assert_eq!(s.decode(Side::Bob, &[1]), bits("10"));
        assert_eq!(s.decode(Side::Charlie, &[1]), bits("01"));
        assert!((s.subspace_success() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn strategy_for_diagonal_line() {
        // W⁽³⁾ = span{11}: B_00 = |+i⟩⟨+i|, B_10 = |−i⟩⟨−i|; C_00 = |−i⟩⟨−i|, C_01 = |+i⟩⟨+i|.
        let w3 = space("11");
        let s = StrategySpec::for_subspace(&w3);
        assert_eq!(s.localized().num_bell_pairs(), 1);
        assert_eq!(
            s.projectors_for(Side::Bob, &bits("00")),
            vec![Projector::PlusI]
        );
        assert_eq!(
            s.projectors_for(Side::Bob, &bits("01")),
            vec![Projector::MinusI]
        );
        assert_eq!(
            s.projectors_for(Side::Charlie, &bits("00")),
            vec![Projector::MinusI]
        );
        assert_eq!(
            s.projectors_for(Side::Charlie, &bits("10")),
            vec![Projector::PlusI]
        );
        // Bob's circuit is empty: the POVM elements are the bare ±i projectors.
        let b00 = s.povm_element(Side::Bob, &bits("00"));
        let expect = DensityOp::pure(&StateVec::product(&[Projector::PlusI]));
        assert!(b00.frobenius_distance(&expect) < TOLERANCE);
        assert!((s.subspace_success() - 0.5).abs() < TOLERANCE);
    }

    #[test]
    fn bell_case_table_gives_one_half() {
        // Each of Φ±, Ψ± with the prescribed ±i projectors.
        let w3 = space("11");
        let s = StrategySpec::for_subspace(&w3);
        for xb in 0..2 {
            for zb in 0..2 {
                let l = CosetLabel::from_bits(&w3, xb, zb);
                assert!((s.success_probability(&l) - 0.5).abs() < TOLERANCE);
            }
        }
    }

    #[test]
    fn decode_is_a_bijection_onto_representatives() {
        for w in enumerate_subspaces(6, 3).step_by(7) {
            let s = StrategySpec::for_subspace(&w);
            for side in [Side::Bob, Side::Charlie] {
                for g in s.guesses(side) {
                    let o = s.outcomes_for(side, &g);
                    assert_eq!(s.decode(side, &o), g);
                }
            }
        }
    }

    #[test]
    fn decode_trivial_case() {
        let w = space("100000,010000,001000");
        let s = StrategySpec::for_subspace(&w);
        assert!(s.decode(Side::Bob, &[0, 0, 0]).is_zero());
        assert!(s.decode(Side::Charlie, &[0, 0, 0]).is_zero());
    }

    #[test]
    fn classical_play_of_m3_example() {
        // Alice's 011110 splits into 011 for Bob and 110 for Charlie.
        let c = ClassicalStrategy::new(&worked_m3());
        assert_eq!(pairs1(c.pairing()), vec![(1, 4), (2, 6)]);
        assert_eq!(c.guess(Side::Bob, &bits("011")), bits("001001"));
        assert_eq!(c.guess(Side::Charlie, &bits("110")), bits("100010"));
    }

    /// Classical game: win iff z_i = x_{h(i)} on every Bob pivot.
    #[test]
    fn classical_strategy_exactness() {
        for m in 1..=3usize {
            for w in enumerate_subspaces(2 * m, m) {
                let c = ClassicalStrategy::new(&w);
                let mut wins = 0u64;
                for xb in 0..1u64 << m {
                    for zb in 0..1u64 << m {
                        let l = CosetLabel::from_bits(&w, xb, zb);
                        let s = l.x_plus_z();
                        let bob = c.guess(Side::Bob, &s.slice(0..m));
                        let charlie = c.guess(Side::Charlie, &s.slice(m..2 * m));
                        let condition = c
                            .pairing()
                            .iter()
                            .all(|&(i, j)| l.z().get(i) == l.x().get(j));
                        let win = &bob == l.x() && &charlie == l.z();
                        assert_eq!(win, condition);
                        wins += u64::from(win);
                    }
                }
                let p = wins as f64 / (1u64 << (2 * m)) as f64;
                let expect = win_probability_formula(&w).to_f64().unwrap();
                assert!((p - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn formula_examples() {
        use num_bigint::BigInt;
        let q = |n: i64, d: i64| Rational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(win_probability_formula(&space("01")), q(1, 1));
        assert_eq!(win_probability_formula(&space("10")), q(1, 2));
        assert_eq!(win_probability_formula(&space("11")), q(1, 2));
        assert_eq!(win_probability_formula(&worked_m3()), q(1, 4));
        assert_eq!(
            win_probability_formula(&space("100000,010000,001000")),
            q(1, 8)
        );
        for w in enumerate_subspaces(6, 3) {
            let bob_pivots = w.pivots().iter().filter(|&&i| i < 3).count();
            assert_eq!(win_probability_formula(&w), inverse_pow2(bob_pivots));
        }
    }

    #[test]
    fn povm_completeness() {
        for m in 1..=3usize {
            for w in enumerate_subspaces(2 * m, m) {
                let s = StrategySpec::for_subspace(&w);
                for side in [Side::Bob, Side::Charlie] {
                    let sum = s.povm_sum(side);
                    assert!(sum.frobenius_distance(&DensityOp::identity(m)) < TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn guess_distribution_sums_to_one() {
        let w = worked_m3();
        let s = StrategySpec::for_subspace(&w);
        let l = CosetLabel::from_bits(&w, 0b101, 0b011);
        let total: f64 = s
            .guesses(Side::Bob)
            .iter()
            .flat_map(|x| {
                s.guesses(Side::Charlie)
                    .into_iter()
                    .map(move |z| (x.clone(), z))
            })
            .map(|(x, z)| s.guess_probability(&l, &x, &z))
            .sum();
        assert!((total - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn worked_m3_example_wins_a_quarter() {
        let s = StrategySpec::for_subspace(&worked_m3());
        assert!((s.subspace_success() - 0.25).abs() < TOLERANCE);
    }

    #[test]
    fn without_bell_pairs_guesses_are_perfectly_correlated() {
        for m in 1..=2usize {
            for w in enumerate_subspaces(2 * m, m) {
                let s = StrategySpec::for_subspace(&w);
                if s.localized().num_bell_pairs() != 0 {
                    continue;
                }
                for xb in 0..1u64 << m {
                    for zb in 0..1u64 << m {
                        let l = CosetLabel::from_bits(&w, xb, zb);
                        let joint = s.success_probability(&l);
                        let bob = s.marginal_success(Side::Bob, &l);
                        let charlie = s.marginal_success(Side::Charlie, &l);
                        assert!(joint.abs() < TOLERANCE || (joint - 1.0).abs() < TOLERANCE);
                        assert!(
                            (bob - joint).abs() < TOLERANCE && (charlie - joint).abs() < TOLERANCE
                        );
                    }
                }
            }
        }
    }
}
