//! Invariant checks run end to end at one size `m`, as used by `verify`.
//!
//! Everything is exhaustive at `m ≤ 2`. At `m = 3` counting, tightness and the
//! per-subspace formula are still exhaustive; state-level checks use a seeded
//! sample of subspaces.

use num_traits::ToPrimitive;
use rand::Rng;

use crate::bound::{count_by_intersection, rate_envelope, upper_bound, vandermonde_sum};
use crate::cosets::{coset_state_direct, coset_state_encoded, coset_state_pauli, CosetLabel};
use crate::error::{Error, Result};
use crate::f2::{enumerate_subspaces, gaussian_binomial, BitMat, BitVec, Subspace};
use crate::game::{exact_value, round_rng, SubspaceSampler, MAX_ENUM_M};
use crate::qstate::{DensityOp, StateVec, TOLERANCE};
use crate::strategy::{win_probability_formula, LocalizedForm, Side, StrategySpec};

/// Subspaces drawn for the state-level checks at `m = 3`.
pub const SAMPLED_SUBSPACES: usize = 100;
const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

/// `ρ^B_x = 2^{-m} Σ_z Tr_C |W_{x,z}⟩⟨W_{x,z}|` for `x = x_rep(x_bits)`.
pub fn averaged_bob_state(w: &Subspace, x_bits: u64) -> DensityOp {
    let m = w.half();
    let mut rho = DensityOp::zeros(m);
    for zb in 0..1u64 << m {
        let psi = coset_state_direct(&CosetLabel::from_bits(w, x_bits, zb));
        rho.add_assign(&psi.partial_trace_second_half().expect("2m qubits"));
    }
    rho.scale(1.0 / (1u64 << m) as f64);
    rho
}

/// `W + ⟨e_i⟩_{i ≥ m}`
pub fn widened_by_second_half(w: &Subspace) -> Subspace {
    let n = w.ambient_dim();
    let mut rows: Vec<BitVec> = w.generator().rows().to_vec();
    rows.extend((w.half()..n).map(|i| BitVec::unit(n, i)));
    Subspace::row_space(&BitMat::from_rows(n, rows).expect("rows have ambient length"))
}

/// Every pair of averaged reduced states is either equal, exactly when
/// `x + y ∈ W + ⟨e_i⟩_{i ≥ m}`, or orthogonal.
pub fn identical_or_orthogonal(w: &Subspace) -> bool {
    let m = w.half();
    let wide = widened_by_second_half(w);
    let states: Vec<DensityOp> = (0..1u64 << m).map(|xb| averaged_bob_state(w, xb)).collect();
    for a in 0..1u64 << m {
        for b in 0..1u64 << m {
            let (ra, rb) = (&states[a as usize], &states[b as usize]);
            let should_match = wide.same_coset(&w.x_rep(a), &w.x_rep(b));
            let ok = if should_match {
                ra.frobenius_distance(rb) < TOLERANCE
            } else {
                ra.trace_product(rb).norm() < TOLERANCE
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Direct and Pauli constructions agree exactly; the encoder agrees up to phase.
pub fn encodings_agree(label: &CosetLabel<'_>) -> bool {
    let direct = coset_state_direct(label);
    direct.max_abs_diff(&coset_state_pauli(label)) < TOLERANCE
        && direct.equals_up_to_phase(&coset_state_encoded(label), TOLERANCE)
}

/// The local circuits turn every coset state into `CNOT_res H_res |f(x+z)⟩`.
pub fn localization_holds(w: &Subspace) -> bool {
    let lf = LocalizedForm::new(w);
    let residual = lf.residual_circuit();
    let m = w.half();
    (0..1u64 << m).all(|xb| {
        (0..1u64 << m).all(|zb| {
            let l = CosetLabel::from_bits(w, xb, zb);
            let lhs = coset_state_encoded(&l)
                .with_circuit(lf.bob_circuit())
                .and_then(|s| s.with_circuit(lf.charlie_circuit()));
            let rhs = StateVec::from_bits(&lf.apply_f(&l.x_plus_z())).with_circuit(&residual);
            matches!((lhs, rhs), (Ok(a), Ok(b)) if a.max_abs_diff(&b) < TOLERANCE)
        })
    })
}

/// Simulated joint success equals `2^{-(m-k)}`.
pub fn formula_matches_simulation(w: &Subspace) -> bool {
    let expected = win_probability_formula(w).to_f64().unwrap_or(f64::NAN);
    (StrategySpec::for_subspace(w).subspace_success() - expected).abs() < TOLERANCE
}

/// Both POVMs resolve the identity.
pub fn povms_complete(w: &Subspace) -> bool {
    let s = StrategySpec::for_subspace(w);
    let id = DensityOp::identity(w.half());
    [Side::Bob, Side::Charlie]
        .into_iter()
        .all(|side| s.povm_sum(side).frobenius_distance(&id) < TOLERANCE)
}

/// With no Bell pairs left, Bob is right exactly when Charlie is, on every
/// coset state and every outcome pair that has positive probability.
pub fn correlated_without_bell_pairs(w: &Subspace) -> bool {
    let s = StrategySpec::for_subspace(w);
    if s.localized().num_bell_pairs() != 0 {
        return true;
    }
    let m = w.half();
    let wp = w.orthogonal_complement();
    let bob_guesses = s.guesses(Side::Bob);
    let charlie_guesses = s.guesses(Side::Charlie);
    (0..1u64 << m).all(|xb| {
        (0..1u64 << m).all(|zb| {
            let l = CosetLabel::from_bits(w, xb, zb);
            bob_guesses.iter().all(|xh| {
                charlie_guesses.iter().all(|zh| {
                    let p = s.guess_probability(&l, xh, zh);
                    let bob_right = w.same_coset(l.x(), xh);
                    let charlie_right = wp.same_coset(l.z(), zh);
                    p < TOLERANCE || bob_right == charlie_right
                })
            })
        })
    })
}

fn all_labels(w: &Subspace) -> impl Iterator<Item = CosetLabel<'_>> {
    let m = w.half();
    (0..1u64 << (2 * m)).map(move |b| CosetLabel::from_bits(w, b >> m, b & ((1 << m) - 1)))
}

/// Subspaces used for state-level checks: all of them up to `m = 2`, a
/// seeded uniform sample beyond.
pub fn state_check_subspaces(m: usize) -> Vec<Subspace> {
    if m <= 2 {
        return enumerate_subspaces(2 * m, m).collect();
    }
    let sampler = SubspaceSampler::new(m);
    let mut rng = round_rng(SAMPLE_SEED, 0);
    (0..SAMPLED_SUBSPACES)
        .map(|_| sampler.sample(&mut rng))
        .collect()
}

fn count_passing(spaces: &[Subspace], f: impl Fn(&Subspace) -> bool) -> (usize, usize) {
    (spaces.iter().filter(|w| f(w)).count(), spaces.len())
}

fn tally_check(name: &'static str, (ok, total): (usize, usize), what: &str) -> Check {
    Check::new(name, ok == total, format!("{ok}/{total} {what}"))
}

/// Runs every check at size `m`.
pub fn run_checks(m: usize) -> Result<Vec<Check>> {
    if !(1..=MAX_ENUM_M).contains(&m) {
        return Err(Error::UnsupportedSize {
            m,
            min: 1,
            max: MAX_ENUM_M,
        });
    }
    let mut checks = Vec::new();
    let all: Vec<Subspace> = enumerate_subspaces(2 * m, m).collect();

    let second: Vec<usize> = (m..2 * m).collect();
    let mut hist = vec![0u64; m + 1];
    for w in &all {
        hist[w.intersection_dim(&second)] += 1;
    }
    let counting_ok = hist
        .iter()
        .enumerate()
        .all(|(k, &h)| count_by_intersection(m, k) == h.into());
    checks.push(Check::new(
        "counting",
        counting_ok && gaussian_binomial(2 * m, m) == (all.len() as u64).into(),
        format!("histogram {hist:?} over {} subspaces", all.len()),
    ));

    checks.push(Check::new(
        "q-vandermonde",
        vandermonde_sum(m) == gaussian_binomial(2 * m, m),
        format!("sum = {}", vandermonde_sum(m)),
    ));

    let bound = upper_bound(m);
    let (lo, hi) = rate_envelope(m);
    checks.push(Check::new(
        "rate-envelope",
        lo <= bound && bound <= hi,
        format!("{lo} <= {bound} <= {hi}"),
    ));

    let exact = exact_value(m)?;
    checks.push(Check::new(
        "tightness",
        exact == bound,
        format!("exact {exact}, bound {bound}"),
    ));

    let spaces = state_check_subspaces(m);
    let mut rng = round_rng(SAMPLE_SEED, 1);
    let labels_ok = spaces
        .iter()
        .filter(|w| {
            if m <= 2 {
                all_labels(w).all(|l| encodings_agree(&l))
            } else {
                (0..2).all(|_| {
                    let (xb, zb) = (
                        rng.random_range(0..1u64 << m),
                        rng.random_range(0..1u64 << m),
                    );
                    encodings_agree(&CosetLabel::from_bits(w, xb, zb))
                })
            }
        })
        .count();
    checks.push(tally_check(
        "encoding",
        (labels_ok, spaces.len()),
        "subspaces",
    ));

    checks.push(tally_check(
        "localization",
        count_passing(&spaces, localization_holds),
        "subspaces",
    ));
    checks.push(tally_check(
        "povm-completeness",
        count_passing(&spaces, povms_complete),
        "subspaces",
    ));
    checks.push(tally_check(
        "per-subspace-formula",
        count_passing(&spaces, formula_matches_simulation),
        "subspaces",
    ));
    checks.push(tally_check(
        "identical-or-orthogonal",
        count_passing(&spaces, identical_or_orthogonal),
        "subspaces",
    ));
    checks.push(tally_check(
        "correlation",
        count_passing(&spaces, correlated_without_bell_pairs),
        "subspaces",
    ));

    let strat = spaces.iter().map(StrategySpec::for_subspace);
    let marginals_ok = strat
        .filter(|s| {
            let joint = s.subspace_success();
            joint <= s.subspace_marginal(Side::Bob) + TOLERANCE
                && joint <= s.subspace_marginal(Side::Charlie) + TOLERANCE
        })
        .count();
    checks.push(tally_check(
        "marginals-dominate",
        (marginals_ok, spaces.len()),
        "subspaces",
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(s: &str) -> Subspace {
        Subspace::half_dimensional(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn all_checks_pass_small_m() {
        for m in 1..=2 {
            for c in run_checks(m).unwrap() {
                assert!(c.passed, "m={m} {}: {}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn range_is_enforced() {
        assert!(run_checks(0).is_err());
        assert!(run_checks(4).is_err());
    }

    #[test]
    fn averaged_state_for_w3() {
        // Bob's half of a Bell pair averaged over z is maximally mixed.
        let rho = averaged_bob_state(&space("11"), 0);
        let mut half = DensityOp::identity(1);
        half.scale(0.5);
        assert!(rho.frobenius_distance(&half) < TOLERANCE);
        assert!(rho.is_density(TOLERANCE));
    }

    #[test]
    fn widened_space_for_m2_example() {
        let wide = widened_by_second_half(&space("1100,0010"));
        assert_eq!(wide.dim(), 3);
        assert!(wide.contains(&"1100".parse().unwrap()));
        assert!(!wide.contains(&"1000".parse().unwrap()));
    }

    #[test]
    fn first_line_gives_orthogonal_bob_states() {
        // On W1 = ⟨e2⟩ the two cosets leave Bob with |0⟩ and |1⟩.
        let w = space("01");
        assert!(identical_or_orthogonal(&w));
        let a = averaged_bob_state(&w, 0);
        let b = averaged_bob_state(&w, 1);
        assert!(a.trace_product(&b).norm() < TOLERANCE);
    }
}
