//! The repeated-play loop shared by approach and avoidance experiments, and
//! the simple registered opponents.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::avoid::RindIndex;
use crate::error::Result;
use crate::forcing::Player;
use crate::game::{Action, Game, GameMode};
use crate::geometry::{Point, TargetSet};

/// Who commits first within a round. The second mover sees the first mover's action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    /// 𝒴 answers a visible `x_t`.
    XFirst,
    /// 𝒳 answers a visible `y_t`.
    YFirst,
}

/// Diagnostics a strategy attaches to its move.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepInfo {
    pub tau: Option<f64>,
    pub example_found: Option<bool>,
    pub slack: Option<f64>,
    pub rind: Option<RindIndex>,
    /// Set by the avoidance strategy when a new escape drive starts this round.
    pub drive_start: bool,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub action: Action,
    pub info: StepInfo,
}

impl Decision {
    pub fn plain(action: Action) -> Self {
        Decision {
            action,
            info: StepInfo::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Round {
    /// 1-based round number.
    pub t: usize,
    pub x: Action,
    pub y: Action,
    pub payoff: Point,
    /// Running mean after this round.
    pub phi: Point,
    /// Nearest point of the target to `phi`.
    pub psi: Point,
    pub dist: f64,
    pub x_info: StepInfo,
    pub y_info: StepInfo,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub rounds: Vec<Round>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn last_phi(&self) -> Option<&Point> {
        self.rounds.last().map(|r| &r.phi)
    }
}

/// `(t·φ_t + z) / (t+1)`
pub fn next_mean(phi: Option<&Point>, t: usize, z: &Point) -> Point {
    match phi {
        None => z.clone(),
        Some(phi) => {
            let tf = t as f64;
            Point(
                phi.0
                    .iter()
                    .zip(&z.0)
                    .map(|(p, q)| (tf * p + q) / (tf + 1.0))
                    .collect(),
            )
        }
    }
}

/// A strategy for either player. `seen` is the other player's current action
/// when this player moves second, `None` otherwise.
pub trait Strategy {
    fn act(&mut self, game: &Game, history: &[Round], seen: Option<&Action>) -> Result<Decision>;

    fn name(&self) -> &str;
}

/// Plays `rounds` rounds and records the trajectory relative to `target`.
pub fn play(
    game: &Game,
    target: &TargetSet,
    x: &mut dyn Strategy,
    y: &mut dyn Strategy,
    rounds: usize,
    order: Order,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        rounds: Vec::with_capacity(rounds),
    };
    for t in 0..rounds {
        let (xd, yd) = match order {
            Order::XFirst => {
                let xd = x.act(game, &traj.rounds, None)?;
                let yd = y.act(game, &traj.rounds, Some(&xd.action))?;
                (xd, yd)
            }
            Order::YFirst => {
                let yd = y.act(game, &traj.rounds, None)?;
                let xd = x.act(game, &traj.rounds, Some(&yd.action))?;
                (xd, yd)
            }
        };
        let payoff = game.payoff(&xd.action, &yd.action)?;
        let phi = next_mean(traj.last_phi(), t, &payoff);
        let np = target.project(&phi)?;
        traj.rounds.push(Round {
            t: t + 1,
            x: xd.action,
            y: yd.action,
            payoff,
            phi,
            psi: np.point,
            dist: np.distance,
            x_info: xd.info,
            y_info: yd.info,
        });
    }
    Ok(traj)
}

/// Always the same action.
pub struct Constant(pub Action);

impl Strategy for Constant {
    fn act(&mut self, _: &Game, _: &[Round], _: Option<&Action>) -> Result<Decision> {
        Ok(Decision::plain(self.0.clone()))
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// Cycles through a fixed list of actions.
pub struct Script(pub Vec<Action>);

impl Strategy for Script {
    fn act(&mut self, _: &Game, history: &[Round], _: Option<&Action>) -> Result<Decision> {
        Ok(Decision::plain(
            self.0[history.len() % self.0.len()].clone(),
        ))
    }

    fn name(&self) -> &str {
        "script"
    }
}

/// Uniform pure actions in pure games; flat-Dirichlet mixed actions in mixed games.
pub struct RandomPlay {
    rng: ChaCha8Rng,
    player: Player,
}

impl RandomPlay {
    pub fn new(player: Player, seed: u64) -> Self {
        RandomPlay {
            rng: ChaCha8Rng::seed_from_u64(seed),
            player,
        }
    }
}

impl Strategy for RandomPlay {
    fn act(&mut self, game: &Game, _: &[Round], _: Option<&Action>) -> Result<Decision> {
        let k = match self.player {
            Player::X => game.rows(),
            Player::Y => game.cols(),
        };
        let action = match game.mode() {
            GameMode::Pure => Action::Pure(self.rng.random_range(0..k)),
            GameMode::Mixed => {
                let w: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut self.rng)).collect();
                let s: f64 = w.iter().sum();
                Action::Mixed(w.into_iter().map(|v: f64| v / s).collect())
            }
        };
        Ok(Decision::plain(action))
    }

    fn name(&self) -> &str {
        "random"
    }
}

/// Picks the pure action that moves the next running mean farthest from
/// (𝒴) or closest to (𝒳) the target, breaking ties by the stage payoff's own
/// distance. Without sight of the other move it assumes the other player's
/// fallback action.
pub struct GreedyDistance {
    pub player: Player,
    pub target: TargetSet,
}

impl Strategy for GreedyDistance {
    fn act(&mut self, game: &Game, history: &[Round], seen: Option<&Action>) -> Result<Decision> {
        let t = history.len();
        let phi = history.last().map(|r| &r.phi);
        let mut best: Option<(usize, (f64, f64))> = None;
        let (own, other) = match self.player {
            Player::X => (
                game.rows(),
                seen.cloned().unwrap_or_else(|| game.fallback_y()),
            ),
            Player::Y => (
                game.cols(),
                seen.cloned().unwrap_or_else(|| game.fallback_x()),
            ),
        };
        for k in 0..own {
            let z = match self.player {
                Player::X => game.payoff(&Action::Pure(k), &other)?,
                Player::Y => game.payoff(&other, &Action::Pure(k))?,
            };
            let dist = self.target.distance(&next_mean(phi, t, &z))?;
            let stage = self.target.distance(&z)?;
            let score = match self.player {
                Player::X => (-dist, -stage),
                Player::Y => (dist, stage),
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        Ok(Decision::plain(Action::Pure(best.map_or(0, |b| b.0))))
    }

    fn name(&self) -> &str {
        "bestresponse"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_mean_identity() {
        let g = Game::appendix_a(GameMode::Pure);
        let s0 = TargetSet::segment([0.0, 0.0], [0.5, 0.5]);
        let mut x = Script(vec![Action::Pure(0), Action::Pure(1), Action::Pure(1)]);
        let mut y = Constant(Action::Pure(0));
        let tr = play(&g, &s0, &mut x, &mut y, 3, Order::XFirst).unwrap();
        assert_eq!(tr.rounds[0].phi, Point::from([1.0, 0.0]));
        assert_eq!(tr.rounds[1].phi, Point::from([0.5, 0.0]));
        assert!(tr.rounds[2].phi.dist(&Point::from([1.0 / 3.0, 0.0])) < 1e-15);
    }

    #[test]
    fn constant_payoff_in_target_stays_at_distance_zero() {
        let g = Game::new(
            GameMode::Pure,
            vec![vec![Point::from([0.2, 0.2]); 2]; 2],
            None,
        )
        .unwrap();
        let s0 = TargetSet::segment([0.0, 0.0], [0.5, 0.5]);
        let mut x = RandomPlay::new(Player::X, 1);
        let mut y = RandomPlay::new(Player::Y, 2);
        let tr = play(&g, &s0, &mut x, &mut y, 50, Order::XFirst).unwrap();
        assert!(tr.rounds.iter().all(|r| r.dist < 1e-15));
    }

    #[test]
    fn random_play_is_seeded() {
        let g = Game::appendix_a(GameMode::Mixed);
        let mut a = RandomPlay::new(Player::Y, 7);
        let mut b = RandomPlay::new(Player::Y, 7);
        for _ in 0..5 {
            let da = a.act(&g, &[], None).unwrap().action;
            let db = b.act(&g, &[], None).unwrap().action;
            assert_eq!(da, db);
            g.check_y(&da).unwrap();
        }
    }

    #[test]
    fn greedy_opponent_sees_x() {
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let half = TargetSet::segment([-1.0], [0.0]);
        let mut y = GreedyDistance {
            player: Player::Y,
            target: half,
        };
        let d = y.act(&g, &[], Some(&Action::Pure(1))).unwrap();
        assert_eq!(d.action, Action::Pure(1));
    }

    #[test]
    fn greedy_ties_break_on_stage_payoff() {
        // From φ = −1 both replies keep the mean inside [−1, 0]; only −1 stays there.
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let half = TargetSet::segment([-1.0], [0.0]);
        let h = play(
            &g,
            &half,
            &mut Constant(Action::Pure(1)),
            &mut Constant(Action::Pure(0)),
            1,
            Order::XFirst,
        )
        .unwrap();
        let mut x = GreedyDistance {
            player: Player::X,
            target: half,
        };
        let d = x.act(&g, &h.rounds, Some(&Action::Pure(0))).unwrap();
        assert_eq!(d.action, Action::Pure(1));
    }
}
