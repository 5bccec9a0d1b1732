//! Whole games: the exact value over every choice Alice can make, and seeded
//! Monte Carlo play with sampled measurements.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bound::Rational;
use crate::cosets::CosetLabel;
use crate::error::{Error, Result};
use crate::f2::{enumerate_subspaces, gaussian_binomial, BitMat, BitVec, Subspace};
use crate::strategy::{win_probability_formula, Side, StrategySpec};

/// Largest `m` for which whole-Grassmannian enumeration is supported.
pub const MAX_ENUM_M: usize = 3;
/// Largest `m` Monte Carlo accepts (`2^{2m}` amplitudes per round).
pub const MAX_SIM_M: usize = 10;

/// One played round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub w: Subspace,
    pub x: BitVec,
    pub z: BitVec,
    pub x_hat: BitVec,
    pub z_hat: BitVec,
    pub bob_correct: bool,
    pub charlie_correct: bool,
    pub joint_win: bool,
}

/// Aggregate counts of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct GameStats {
    pub m: usize,
    pub rounds: u64,
    pub seed: u64,
    pub joint_wins: u64,
    pub bob_wins: u64,
    pub charlie_wins: u64,
}

impl GameStats {
    pub fn joint_rate(&self) -> f64 {
        self.joint_wins as f64 / self.rounds as f64
    }

    pub fn bob_rate(&self) -> f64 {
        self.bob_wins as f64 / self.rounds as f64
    }

    pub fn charlie_rate(&self) -> f64 {
        self.charlie_wins as f64 / self.rounds as f64
    }
}

fn check_enum_range(m: usize) -> Result<()> {
    if (1..=MAX_ENUM_M).contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize {
            m,
            min: 1,
            max: MAX_ENUM_M,
        })
    }
}

/// `(1 / C(2m,m)₂) · Σ_W 2^{-(m-k_W)}` over every `W ∈ G(2m, m)`.
pub fn exact_value(m: usize) -> Result<Rational> {
    check_enum_range(m)?;
    let sum = enumerate_subspaces(2 * m, m)
        .map(|w| win_probability_formula(&w))
        .fold(Rational::zero(), |a, b| a + b);
    Ok(sum / Rational::from_integer(BigInt::from(gaussian_binomial(2 * m, m))))
}

/// The game value computed from the state vectors: for every `W` and every
/// `(x, z)`, the probability that the strategy's measurement returns exactly
/// the right cosets.
pub fn exact_value_simulated(m: usize) -> Result<f64> {
    check_enum_range(m)?;
    let spaces: Vec<Subspace> = enumerate_subspaces(2 * m, m).collect();
    let total: f64 = spaces
        .par_iter()
        .map(|w| StrategySpec::for_subspace(w).subspace_success())
        .sum();
    Ok(total / spaces.len() as f64)
}

/// Same as [`exact_value_simulated`] but over `samples` subspaces drawn
/// uniformly with replacement; the inner `(x, z)` average stays exact.
pub fn exact_value_sampled(m: usize, samples: usize, seed: u64) -> Result<f64> {
    check_sim_range(m)?;
    if samples == 0 {
        return Err(Error::NoRounds);
    }
    let sampler = SubspaceSampler::new(m);
    let total: f64 = (0..samples as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = round_rng(seed, t);
            let w = sampler.sample(&mut rng);
            StrategySpec::for_subspace(&w).subspace_success()
        })
        .sum();
    Ok(total / samples as f64)
}

/// Exact per-player success probabilities averaged over `G(2m, m)`.
pub fn exact_marginals(m: usize) -> Result<(f64, f64)> {
    check_enum_range(m)?;
    let spaces: Vec<Subspace> = enumerate_subspaces(2 * m, m).collect();
    let (b, c) = spaces
        .par_iter()
        .map(|w| {
            let s = StrategySpec::for_subspace(w);
            (
                s.subspace_marginal(Side::Bob),
                s.subspace_marginal(Side::Charlie),
            )
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = spaces.len() as f64;
    Ok((b / n, c / n))
}

/// Plays one round on a fixed coset state: runs both local circuits, samples
/// every qubit in its strategy basis, decodes, and judges by coset membership.
pub fn play_round<R: Rng + ?Sized>(
    w: &Subspace,
    x: &BitVec,
    z: &BitVec,
    strategy: &StrategySpec,
    rng: &mut R,
) -> Result<RoundResult> {
    let label = CosetLabel::new(w, x.clone(), z.clone())?;
    let mut state = strategy.processed_state(&label);
    let mut measure = |side: Side| -> Result<Vec<u8>> {
        strategy
            .roles(side)
            .iter()
            .map(|r| state.measure_in_place(r.qubit, r.basis, rng))
            .collect()
    };
    let bob_out = measure(Side::Bob)?;
    let charlie_out = measure(Side::Charlie)?;
    let x_hat = strategy.decode(Side::Bob, &bob_out);
    let z_hat = strategy.decode(Side::Charlie, &charlie_out);
    let bob_correct = w.same_coset(x, &x_hat);
    let charlie_correct = w.orthogonal_complement().same_coset(z, &z_hat);
    Ok(RoundResult {
        w: w.clone(),
        x: x.clone(),
        z: z.clone(),
        x_hat,
        z_hat,
        bob_correct,
        charlie_correct,
        joint_win: bob_correct && charlie_correct,
    })
}

fn check_sim_range(m: usize) -> Result<()> {
    if (1..=MAX_SIM_M).contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize {
            m,
            min: 1,
            max: MAX_SIM_M,
        })
    }
}

/// Round `t` draws from its own ChaCha stream, so rounds can run in any order.
pub fn round_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// Uniform draws from `G(2m, m)`.
pub struct SubspaceSampler {
    m: usize,
    table: Option<Vec<Subspace>>,
}

impl SubspaceSampler {
    pub fn new(m: usize) -> Self {
        let table = (m <= MAX_ENUM_M).then(|| enumerate_subspaces(2 * m, m).collect());
        Self { m, table }
    }

    /// Small `m` indexes the enumeration. Larger `m` takes the row space of
    /// a uniform full-rank `m × 2m` matrix; every subspace has the same
    /// number of such generators, so this is uniform too.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Subspace {
        if let Some(table) = &self.table {
            return table[rng.random_range(0..table.len())].clone();
        }
        let m = self.m;
        loop {
            let mut g = BitMat::zeros(m, 2 * m);
            for r in 0..m {
                for c in 0..2 * m {
                    g.set(r, c, rng.random::<bool>());
                }
            }
            if g.rank() == m {
                return Subspace::row_space(&g);
            }
        }
    }
}

fn sample_round(sampler: &SubspaceSampler, m: usize, seed: u64, t: u64) -> Result<RoundResult> {
    let mut rng = round_rng(seed, t);
    let w = sampler.sample(&mut rng);
    let x = w.x_rep(rng.random_range(0..1u64 << m));
    let z = w.z_rep(rng.random_range(0..1u64 << m));
    let strategy = StrategySpec::for_subspace(&w);
    play_round(&w, &x, &z, &strategy, &mut rng)
}

fn check_run(m: usize, rounds: u64) -> Result<()> {
    check_sim_range(m)?;
    if rounds == 0 {
        return Err(Error::NoRounds);
    }
    Ok(())
}

fn tally(
    m: usize,
    rounds: u64,
    seed: u64,
    results: impl Iterator<Item = (bool, bool)>,
) -> GameStats {
    let mut stats = GameStats {
        m,
        rounds,
        seed,
        joint_wins: 0,
        bob_wins: 0,
        charlie_wins: 0,
    };
    for (b, c) in results {
        stats.bob_wins += u64::from(b);
        stats.charlie_wins += u64::from(c);
        stats.joint_wins += u64::from(b && c);
    }
    stats
}

/// Plays `rounds` independent games with `W`, `x`, `z` uniform.
pub fn monte_carlo(m: usize, rounds: u64, seed: u64) -> Result<GameStats> {
    check_run(m, rounds)?;
    let sampler = SubspaceSampler::new(m);
    let outcomes: Vec<(bool, bool)> = (0..rounds)
        .into_par_iter()
        .map(|t| sample_round(&sampler, m, seed, t).map(|r| (r.bob_correct, r.charlie_correct)))
        .collect::<Result<_>>()?;
    Ok(tally(m, rounds, seed, outcomes.into_iter()))
}

/// [`monte_carlo`] keeping every round, in round order.
pub fn monte_carlo_transcript(
    m: usize,
    rounds: u64,
    seed: u64,
) -> Result<(GameStats, Vec<RoundResult>)> {
    check_run(m, rounds)?;
    let sampler = SubspaceSampler::new(m);
    let transcript: Vec<RoundResult> = (0..rounds)
        .into_par_iter()
        .map(|t| sample_round(&sampler, m, seed, t))
        .collect::<Result<_>>()?;
    let stats = tally(
        m,
        rounds,
        seed,
        transcript
            .iter()
            .map(|r| (r.bob_correct, r.charlie_correct)),
    );
    Ok((stats, transcript))
}

/// Monte Carlo on one fixed subspace, with `x` and `z` uniform.
pub fn play_fixed(w: &Subspace, rounds: u64, seed: u64) -> Result<GameStats> {
    let m = w.half();
    check_run(m, rounds)?;
    let strategy = StrategySpec::for_subspace(w);
    let outcomes: Vec<(bool, bool)> = (0..rounds)
        .into_par_iter()
        .map(|t| {
            let mut rng = round_rng(seed, t);
            let x = w.x_rep(rng.random_range(0..1u64 << m));
            let z = w.z_rep(rng.random_range(0..1u64 << m));
            play_round(w, &x, &z, &strategy, &mut rng).map(|r| (r.bob_correct, r.charlie_correct))
        })
        .collect::<Result<_>>()?;
    Ok(tally(m, rounds, seed, outcomes.into_iter()))
}

/// `3·sqrt(p(1−p)/n)`
pub fn three_sigma(p: f64, n: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}
