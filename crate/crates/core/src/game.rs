//! Finite vector-payoff games and their mixed (bilinear) extensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, Point, TargetSet};
use crate::lp::{self, MatrixGameSolution};

/// Tolerance on the sum of a mixed action.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameMode {
    /// Players pick pure action indices.
    Pure,
    /// Players pick probability vectors; payoffs are expectations.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Pure(usize),
    Mixed(Vec<f64>),
}

impl Action {
    pub fn uniform(k: usize) -> Self {
        Action::Mixed(vec![1.0 / k as f64; k])
    }

    /// Probability vector of the action over `k` pure actions.
    pub fn distribution(&self, k: usize) -> Vec<f64> {
        match self {
            Action::Pure(i) => {
                let mut e = vec![0.0; k];
                e[*i] = 1.0;
                e
            }
            Action::Mixed(p) => p.clone(),
        }
    }
}

/// Finite game with payoff tensor `F[i][j] ∈ ℝ^d` and strict bound `‖F[i][j]‖ < γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    mode: GameMode,
    payoffs: Vec<Vec<Point>>,
    gamma: f64,
    d: usize,
}

/// Values of a scalarized game `⟨F, λ⟩` where the row player minimizes.
#[derive(Clone, Debug)]
pub struct ScalarGame {
    /// `inf_x sup_y`
    pub upper: f64,
    /// `sup_y inf_x`
    pub lower: f64,
    /// Row action attaining `upper`.
    pub x: Action,
    /// Column action attaining `lower`.
    pub y: Action,
}

impl Game {
    /// `gamma = None` picks `(1 + 1e-6) · max ‖F[i][j]‖` (1 when every payoff is zero).
    pub fn new(mode: GameMode, payoffs: Vec<Vec<Point>>, gamma: Option<f64>) -> Result<Self> {
        let m = payoffs.len();
        if m == 0 || payoffs[0].is_empty() {
            return Err(Error::InvalidGame(
                "need at least one action per player".into(),
            ));
        }
        let n = payoffs[0].len();
        if payoffs.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGame("ragged payoff tensor".into()));
        }
        let d = payoffs[0][0].dim();
        if d == 0 {
            return Err(Error::InvalidGame(
                "payoff dimension must be at least 1".into(),
            ));
        }
        for p in payoffs.iter().flatten() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::InvalidGame("non-finite payoff".into()));
            }
        }
        let max_norm = payoffs
            .iter()
            .flatten()
            .map(Point::norm)
            .fold(0.0, f64::max);
        let gamma = match gamma {
            Some(g) => g,
            None if max_norm == 0.0 => 1.0,
            None => (1.0 + 1e-6) * max_norm,
        };
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidGame(
                "gamma must be finite and positive".into(),
            ));
        }
        if max_norm >= gamma {
            return Err(Error::InvalidGame(format!(
                "payoff norm {max_norm} is not strictly below gamma {gamma}"
            )));
        }
        Ok(Game {
            mode,
            payoffs,
            gamma,
            d,
        })
    }

    /// `f(x, y) = (x₁y₁, x₂y₂)` on the simplex, from pure vertices `e₁, e₂`.
    pub fn appendix_a(mode: GameMode) -> Self {
        let p = |a: f64, b: f64| Point(vec![a, b]);
        Game::new(
            mode,
            vec![
                vec![p(1.0, 0.0), p(0.0, 0.0)],
                vec![p(0.0, 0.0), p(0.0, 1.0)],
            ],
            None,
        )
        .expect("static game is valid")
    }

    /// One-dimensional matching pennies `[[a, b], [b, a]]`.
    pub fn pennies(mode: GameMode, a: f64, b: f64) -> Self {
        let p = |v: f64| Point(vec![v]);
        Game::new(mode, vec![vec![p(a), p(b)], vec![p(b), p(a)]], None).expect("finite payoffs")
    }

    pub fn mode(&self) -> GameMode {
        self.mode
    }

    pub fn with_mode(&self, mode: GameMode) -> Self {
        Game {
            mode,
            ..self.clone()
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> usize {
        self.payoffs.len()
    }

    pub fn cols(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn payoffs(&self) -> &[Vec<Point>] {
        &self.payoffs
    }

    pub fn vertices(&self) -> Vec<Point> {
        self.payoffs.iter().flatten().cloned().collect()
    }

    pub fn fallback_x(&self) -> Action {
        match self.mode {
            GameMode::Pure => Action::Pure(0),
            GameMode::Mixed => Action::uniform(self.rows()),
        }
    }

    pub fn fallback_y(&self) -> Action {
        match self.mode {
            GameMode::Pure => Action::Pure(0),
            GameMode::Mixed => Action::uniform(self.cols()),
        }
    }

    fn check_action(&self, a: &Action, limit: usize) -> Result<()> {
        match a {
            Action::Pure(i) if *i >= limit => Err(Error::IndexOutOfRange { index: *i, limit }),
            Action::Pure(_) => Ok(()),
            Action::Mixed(_) if self.mode == GameMode::Pure => Err(Error::KindMismatch),
            Action::Mixed(p) => {
                if p.len() != limit {
                    return Err(Error::InvalidAction(format!(
                        "expected {limit} probabilities, got {}",
                        p.len()
                    )));
                }
                if p.iter().any(|v| !(*v >= -SIMPLEX_TOL)) {
                    return Err(Error::InvalidAction("negative probability".into()));
                }
                let s: f64 = p.iter().sum();
                if (s - 1.0).abs() > SIMPLEX_TOL {
                    return Err(Error::InvalidAction(format!("probabilities sum to {s}")));
                }
                Ok(())
            }
        }
    }

    pub fn check_x(&self, x: &Action) -> Result<()> {
        self.check_action(x, self.rows())
    }

    pub fn check_y(&self, y: &Action) -> Result<()> {
        self.check_action(y, self.cols())
    }

    /// Payoff of an action pair (expected payoff for mixed actions).
    pub fn payoff(&self, x: &Action, y: &Action) -> Result<Point> {
        self.check_x(x)?;
        self.check_y(y)?;
        Ok(match (x, y) {
            (Action::Pure(i), Action::Pure(j)) => self.payoffs[*i][*j].clone(),
            _ => {
                let mu = x.distribution(self.rows());
                let nu = y.distribution(self.cols());
                let mut z = vec![0.0; self.d];
                for (i, row) in self.payoffs.iter().enumerate() {
                    if mu[i] == 0.0 {
                        continue;
                    }
                    for (j, f) in row.iter().enumerate() {
                        let w = mu[i] * nu[j];
                        if w != 0.0 {
                            for k in 0..self.d {
                                z[k] += w * f.0[k];
                            }
                        }
                    }
                }
                Point(z)
            }
        })
    }

    /// `G[i][j] = ⟨F[i][j], λ⟩`
    pub fn scalarize(&self, lambda: &[f64]) -> Vec<Vec<f64>> {
        self.payoffs
            .iter()
            .map(|r| r.iter().map(|f| dot(&f.0, lambda)).collect())
            .collect()
    }

    /// `⟨f(x,y), λ⟩ − σ_S(λ)`
    pub fn g_s(&self, x: &Action, y: &Action, lambda: &[f64], set: &TargetSet) -> Result<f64> {
        Ok(self.payoff(x, y)?.dot(lambda) - set.support(lambda)?)
    }

    /// Upper and lower values of `⟨F, λ⟩` with the row player minimizing.
    ///
    /// Pure games use pure min-max / max-min; mixed games solve the LP pair.
    pub fn scalar_game(&self, lambda: &[f64]) -> Result<ScalarGame> {
        let g = self.scalarize(lambda);
        match self.mode {
            GameMode::Pure => {
                let (mut upper, mut xi) = (f64::INFINITY, 0);
                for (i, row) in g.iter().enumerate() {
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if m < upper {
                        upper = m;
                        xi = i;
                    }
                }
                let (mut lower, mut yj) = (f64::NEG_INFINITY, 0);
                for j in 0..self.cols() {
                    let m = g.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
                    if m > lower {
                        lower = m;
                        yj = j;
                    }
                }
                Ok(ScalarGame {
                    upper,
                    lower,
                    x: Action::Pure(xi),
                    y: Action::Pure(yj),
                })
            }
            GameMode::Mixed => {
                let MatrixGameSolution {
                    value,
                    lower_value,
                    row_strategy,
                    col_strategy,
                } = lp::matrix_game(&g)?;
                Ok(ScalarGame {
                    upper: value,
                    lower: lower_value,
                    x: Action::Mixed(row_strategy),
                    y: Action::Mixed(col_strategy),
                })
            }
        }
    }

    pub fn upper_value(&self, lambda: &[f64]) -> Result<f64> {
        Ok(self.scalar_game(lambda)?.upper)
    }

    /// `inf_x sup_y − sup_y inf_x` of the scalarized game.
    pub fn minimax_gap(&self, lambda: &[f64]) -> Result<f64> {
        let s = self.scalar_game(lambda)?;
        Ok(s.upper - s.lower)
    }

    /// Column maximizing `⟨f(x, e_j), λ⟩`, with that value.
    pub fn best_response(&self, x: &Action, lambda: &[f64]) -> Result<(usize, f64)> {
        self.check_x(x)?;
        let mu = x.distribution(self.rows());
        let g = self.scalarize(lambda);
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..self.cols() {
            let v: f64 = g.iter().zip(&mu).map(|(r, p)| r[j] * p).sum();
            if v > best.1 {
                best = (j, v);
            }
        }
        Ok(best)
    }

    /// Row minimizing `⟨f(e_i, y), λ⟩`, with that value.
    pub fn best_reply(&self, y: &Action, lambda: &[f64]) -> Result<(usize, f64)> {
        self.check_y(y)?;
        let nu = y.distribution(self.cols());
        let g = self.scalarize(lambda);
        let mut best = (0, f64::INFINITY);
        for (i, r) in g.iter().enumerate() {
            let v: f64 = r.iter().zip(&nu).map(|(a, p)| a * p).sum();
            if v < best.1 {
                best = (i, v);
            }
        }
        Ok(best)
    }
}
