//! Sampling layer over mixed games: realized pure payoffs, empirical and
//! expected means, the Hoeffding horizon and the deviation audit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, GameMode};
use crate::geometry::{Point, TargetSet};
use crate::play::{next_mean, play, Order, Strategy, Trajectory};

/// Smallest `N ≥ (γ²/2ε²)·ln(2d / (ε(1 − exp(−ε²/2γ²))))`.
pub fn hoeffding_horizon(eps: f64, gamma: f64, d: usize) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::NonPositiveInput("epsilon in (0,1)"));
    }
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveInput("gamma"));
    }
    if d == 0 {
        return Err(Error::NonPositiveInput("dimension"));
    }
    let r = eps * eps / (2.0 * gamma * gamma);
    let tail = -(-r).exp_m1();
    let bound = (gamma * gamma / (2.0 * eps * eps)) * (2.0 * d as f64 / (eps * tail)).ln();
    Ok(bound.max(0.0).ceil() as u64)
}

/// Named, seeded random source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeededSource {
    pub seed: u64,
    pub algorithm: &'static str,
}

impl SeededSource {
    pub fn new(seed: u64) -> Self {
        SeededSource {
            seed,
            algorithm: "chacha8",
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledRound {
    pub t: usize,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub x_index: usize,
    pub y_index: usize,
    /// `F[x][y]`.
    pub payoff: Point,
    /// Running mean of realized payoffs.
    pub empirical: Point,
    /// Running mean of `𝖤f(μ_t, ν_t)`.
    pub expected: Point,
}

impl SampledRound {
    pub fn deviation(&self) -> f64 {
        self.empirical.dist(&self.expected)
    }
}

fn sample_index(rng: &mut ChaCha8Rng, dist: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `u` past the total mass: take the last supported index.
    dist.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Plays `rounds` rounds of the mixed game and samples `x ∼ μ_t`, `y ∼ ν_t`
/// independently each round. Strategies see the distribution history only, so
/// the returned trajectory is exactly the deterministic run on `𝖤f`.
pub fn run_stochastic(
    game: &Game,
    target: &TargetSet,
    x: &mut dyn Strategy,
    y: &mut dyn Strategy,
    rounds: usize,
    order: Order,
    src: &SeededSource,
) -> Result<(Vec<SampledRound>, Trajectory)> {
    if game.mode() != GameMode::Mixed {
        return Err(Error::InvalidGame(
            "stochastic runs need a mixed game".into(),
        ));
    }
    if rounds == 0 {
        return Err(Error::NonPositiveInput("rounds"));
    }
    let traj = play(game, target, x, y, rounds, order)?;
    let mut rng = src.rng();
    let mut out: Vec<SampledRound> = Vec::with_capacity(rounds);
    for (t, r) in traj.rounds.iter().enumerate() {
        let mu = r.x.distribution(game.rows());
        let nu = r.y.distribution(game.cols());
        let xi = sample_index(&mut rng, &mu);
        let yi = sample_index(&mut rng, &nu);
        let payoff = game.payoffs()[xi][yi].clone();
        let empirical = next_mean(out.last().map(|s| &s.empirical), t, &payoff);
        out.push(SampledRound {
            t: t + 1,
            mu,
            nu,
            x_index: xi,
            y_index: yi,
            payoff,
            empirical,
            expected: r.phi.clone(),
        });
    }
    Ok((out, traj))
}

/// Whether `‖emp_n − exp_n‖ ≥ ε` for some recorded `n ≥ N`.
pub fn deviation_event(run: &[SampledRound], eps: f64, n: usize) -> bool {
    run.iter()
        .filter(|r| r.t >= n)
        .any(|r| r.deviation() >= eps)
}

/// Mergeable per-run deviation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DeviationTally {
    pub runs: usize,
    pub hits: usize,
}

impl DeviationTally {
    pub fn record(&mut self, hit: bool) {
        self.runs += 1;
        self.hits += usize::from(hit);
    }

    pub fn merge(self, other: DeviationTally) -> DeviationTally {
        DeviationTally {
            runs: self.runs + other.runs,
            hits: self.hits + other.hits,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub runs: usize,
    pub deviations: usize,
    pub horizon: usize,
    pub eps: f64,
    pub frequency: f64,
    /// Three binomial standard errors at success probability `ε`.
    pub band: f64,
    pub pass: bool,
}

impl DeviationReport {
    pub fn from_tally(tally: DeviationTally, eps: f64, horizon: usize) -> Self {
        let frequency = if tally.runs == 0 {
            0.0
        } else {
            tally.hits as f64 / tally.runs as f64
        };
        let band = if tally.runs == 0 {
            0.0
        } else {
            3.0 * (eps * (1.0 - eps) / tally.runs as f64).sqrt()
        };
        DeviationReport {
            runs: tally.runs,
            deviations: tally.hits,
            horizon,
            eps,
            frequency,
            band,
            pass: frequency <= eps + band,
        }
    }
}

/// Frequency of the deviation event over a batch of runs, each at least `n` long.
pub fn deviation_audit(runs: &[Vec<SampledRound>], eps: f64, n: usize) -> Result<DeviationReport> {
    let mut tally = DeviationTally::default();
    for run in runs {
        if run.len() < n {
            return Err(Error::Validation(format!(
                "run of length {} is shorter than N = {n}",
                run.len()
            )));
        }
        tally.record(deviation_event(run, eps, n));
    }
    Ok(DeviationReport::from_tally(tally, eps, n))
}
