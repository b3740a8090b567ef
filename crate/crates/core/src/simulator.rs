//! Monte Carlo play of the star search game, plus a turn-by-turn series
//! oracle for the focal payoff.
//!
//! Rays are numbered `0..=k` with the treasure on ray 0. Each round draws the
//! pointer once; every turn each searcher independently either follows it or
//! picks one of the other `k` rays uniformly. Searchers do not remember
//! earlier turns. The round ends on the first turn anyone takes ray 0 and the
//! arrivers of that turn split the prize.
//!
//! Round `i` draws from ChaCha8 stream `i` keyed by the configured seed, and
//! rounds are reduced in fixed-size batches in index order. Reports are
//! therefore bit-identical for a given config regardless of the rayon pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{starred, GameParams, TrustProfile};

pub const DEFAULT_MAX_TURNS: u64 = 1_000_000;
pub const DEFAULT_TAIL_TOL: f64 = 1e-14;

/// Rounds per reduction batch; part of the determinism contract.
const BATCH_ROUNDS: u64 = 8192;

/// Largest population for which the series oracle's binomial weights fit in a double.
pub const ORACLE_MAX_N: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub params: GameParams,
    pub profile: TrustProfile,
    pub rounds: u64,
    pub seed: u64,
    pub max_turns: u64,
}

impl SimulationConfig {
    pub fn new(params: GameParams, profile: TrustProfile, rounds: u64, seed: u64) -> Result<Self> {
        Self::with_max_turns(params, profile, rounds, seed, DEFAULT_MAX_TURNS)
    }

    pub fn with_max_turns(
        params: GameParams,
        profile: TrustProfile,
        rounds: u64,
        seed: u64,
        max_turns: u64,
    ) -> Result<Self> {
        if rounds < 1 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if max_turns < 1 {
            return Err(Error::InvalidConfig("max-turns must be at least 1".into()));
        }
        Ok(Self { params, profile, rounds, seed, max_turns })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub rounds_completed: u64,
    /// Rounds in which nobody reached the treasure within `max_turns`. They
    /// score 0 for everyone, so a nonzero count biases the mean low.
    pub capped_rounds: u64,
    pub focal_mean_payoff: f64,
    pub focal_std_error: f64,
    /// Mean finishing turn over uncapped rounds (`NaN` if every round capped).
    pub mean_finish_turn: f64,
    pub seed_echo: u64,
}

impl SimulationReport {
    pub fn warning(&self) -> Option<String> {
        (self.capped_rounds > 0).then(|| {
            format!(
                "{} of {} rounds hit the turn cap; focal_mean_payoff is biased low",
                self.capped_rounds, self.rounds_completed
            )
        })
    }
}

/// How a round ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finish {
    Turn(u64),
    Capped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub focal_payoff: f64,
    /// Index 0 is the focal searcher.
    pub payoffs: Vec<f64>,
    /// Number of searchers who reached the treasure on the final turn.
    pub arrivals: u64,
    pub finish: Finish,
}

/// Plays one round. The caller owns the generator.
pub fn simulate_round<R: Rng + ?Sized>(
    params: &GameParams,
    profile: &TrustProfile,
    max_turns: u64,
    rng: &mut R,
) -> RoundOutcome {
    let n = params.n() as usize;
    let mut arrived = vec![false; n];
    let (arrivals, finish) = play(params, profile, max_turns, rng, &mut arrived);
    let share = if arrivals == 0 { 0.0 } else { 1.0 / arrivals as f64 };
    let payoffs: Vec<f64> = arrived.iter().map(|&a| if a { share } else { 0.0 }).collect();
    RoundOutcome { focal_payoff: payoffs[0], payoffs, arrivals, finish }
}

/// Core loop; fills `arrived` for the deciding turn and returns the number of
/// arrivers with the finishing turn.
fn play<R: Rng + ?Sized>(
    params: &GameParams,
    profile: &TrustProfile,
    max_turns: u64,
    rng: &mut R,
    arrived: &mut [bool],
) -> (u64, Finish) {
    let k = params.k();
    let pointer = if rng.random::<f64>() < params.p() { 0 } else { rng.random_range(1..=k) };

    for turn in 1..=max_turns {
        let mut arrivals = 0;
        for (i, slot) in arrived.iter_mut().enumerate() {
            let trust = if i == 0 { profile.r() } else { profile.q() };
            let ray = if rng.random::<f64>() < trust {
                pointer
            } else {
                // uniform over the k rays other than the pointed one
                let j = rng.random_range(0..k);
                if j >= pointer {
                    j + 1
                } else {
                    j
                }
            };
            *slot = ray == 0;
            arrivals += u64::from(*slot);
        }
        if arrivals > 0 {
            return (arrivals, Finish::Turn(turn));
        }
    }
    arrived.fill(false);
    (0, Finish::Capped)
}

/// Running moments, merged pairwise (Chan et al.) so batches combine exactly
/// the same way every time.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Self { count, mean, m2 }
    }

    fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchTotals {
    payoff: Moments,
    capped: u64,
    finish_turn_sum: u64,
    finished: u64,
}

impl BatchTotals {
    fn merge(self, other: Self) -> Self {
        Self {
            payoff: self.payoff.merge(other.payoff),
            capped: self.capped + other.capped,
            finish_turn_sum: self.finish_turn_sum + other.finish_turn_sum,
            finished: self.finished + other.finished,
        }
    }
}

/// The generator for round `round` of a run seeded with `seed`.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn run_batch(config: &SimulationConfig, base: &ChaCha8Rng, start: u64, end: u64) -> BatchTotals {
    let mut totals = BatchTotals::default();
    let mut arrived = vec![false; config.params.n() as usize];
    for round in start..end {
        let mut rng = base.clone();
        rng.set_stream(round);
        let (arrivals, finish) = play(&config.params, &config.profile, config.max_turns, &mut rng, &mut arrived);
        let focal = if arrived[0] { 1.0 / arrivals as f64 } else { 0.0 };
        totals.payoff.push(focal);
        match finish {
            Finish::Turn(t) => {
                totals.finish_turn_sum += t;
                totals.finished += 1;
            }
            Finish::Capped => totals.capped += 1,
        }
    }
    totals
}

/// Estimates the focal player's expected payoff from `config.rounds`
/// independent rounds.
pub fn estimate_payoff(config: &SimulationConfig) -> SimulationReport {
    let base = ChaCha8Rng::seed_from_u64(config.seed);
    let batches = config.rounds.div_ceil(BATCH_ROUNDS);
    let per_batch: Vec<BatchTotals> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let start = b * BATCH_ROUNDS;
            let end = (start + BATCH_ROUNDS).min(config.rounds);
            run_batch(config, &base, start, end)
        })
        .collect();
    let totals = per_batch.into_iter().fold(BatchTotals::default(), BatchTotals::merge);

    let rounds = totals.payoff.count;
    SimulationReport {
        rounds_completed: rounds,
        capped_rounds: totals.capped,
        focal_mean_payoff: totals.payoff.mean,
        focal_std_error: (totals.payoff.sample_variance() / rounds as f64).sqrt(),
        mean_finish_turn: if totals.finished == 0 {
            f64::NAN
        } else {
            totals.finish_turn_sum as f64 / totals.finished as f64
        },
        seed_echo: config.seed,
    }
}

/// Focal payoff by summing expected shares turn by turn.
///
/// For each pointer branch the per-turn expected share is an explicit sum over
/// the number `m` of other arrivers, `focal * Σ C(n-1, m) x^m (1-x)^(n-1-m) / (m+1)`,
/// and the no-find probability is `(1-x)^(n-1) (1 - focal)`. The geometric
/// series over turns is summed term by term until its remaining tail is below
/// `tail_tol`. No closed-form simplification is used.
pub fn series_payoff_oracle(params: &GameParams, profile: &TrustProfile, tail_tol: f64) -> Result<f64> {
    let (q, r) = (profile.q(), profile.r());
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DegenerateTrust(q));
    }
    if params.n() > ORACLE_MAX_N {
        return Err(Error::InvalidConfig(format!("series oracle supports n <= {ORACLE_MAX_N} (got {})", params.n())));
    }
    let n = params.n();
    let k = params.k();
    let correct = series_branch(n, q, r, tail_tol);
    let wrong = series_branch(n, starred(q, k), starred(r, k), tail_tol);
    Ok(params.p() * correct + (1.0 - params.p()) * wrong)
}

/// Expected share in one turn: `focal * E[1/(M+1)]`, `M ~ Binomial(others, x)`.
pub(crate) fn binomial_share(others: u64, x: f64) -> f64 {
    let mut coefficient = 1.0_f64;
    let mut total = 0.0;
    for m in 0..=others {
        let weight = coefficient * x.powi(m as i32) * (1.0 - x).powi((others - m) as i32);
        total += weight / (m + 1) as f64;
        coefficient = coefficient * (others - m) as f64 / (m + 1) as f64;
    }
    total
}

fn series_branch(n: u64, other: f64, focal: f64, tail_tol: f64) -> f64 {
    let per_turn = focal * binomial_share(n - 1, other);
    let mut miss = 1.0;
    for _ in 0..n - 1 {
        miss *= 1.0 - other;
    }
    miss *= 1.0 - focal;

    let mut total = 0.0;
    let mut term = per_turn;
    // tail after adding `term` is term * miss / (1 - miss)
    loop {
        total += term;
        term *= miss;
        if term == 0.0 || term / (1.0 - miss) < tail_tol {
            total += term;
            break;
        }
    }
    total
}
