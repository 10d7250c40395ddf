//! The approach player: halfspace-forcing example search, the greedy
//! strategy 𝔤* and audits of its guarantees.
//!
//! A candidate at `φ ∉ S` is the nearest point `ψ` together with a halfspace
//! `H = {z : ⟨λ,z⟩ ≤ c}`, `λ = (φ−ψ)/‖φ−ψ‖`, whose boundary crosses `[φ,ψ)`.
//! It is an example when 𝒳 can 1-force `H`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcing::FORCE_TOL;
use crate::game::{Action, Game};
use crate::geometry::{dot, Halfspace, Point, TargetSet, DIST_EPS};
use crate::play::{self, Decision, Order, Round, StepInfo, Strategy, Trajectory};

/// Per-round tolerances `τ_t`, `t ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceSchedule {
    /// `τ_t = γ · 2^{−t}`.
    GeometricHalving { gamma: f64 },
    /// Listed values for `t = 1..=len`, then halving from the last entry.
    Custom(Vec<f64>),
}

impl ToleranceSchedule {
    /// `τ_t`, floored at the smallest positive normal float so it stays strictly positive.
    pub fn tau(&self, t: usize) -> f64 {
        let halve = |base: f64, k: usize| base * 0.5f64.powi(k.min(i32::MAX as usize) as i32);
        let v = match self {
            ToleranceSchedule::GeometricHalving { gamma } => halve(*gamma, t),
            ToleranceSchedule::Custom(list) if t >= 1 && t <= list.len() => list[t - 1],
            ToleranceSchedule::Custom(list) => {
                let last = list.last().copied().unwrap_or(1.0);
                halve(last, t.saturating_sub(list.len()))
            }
        };
        v.max(f64::MIN_POSITIVE)
    }

    /// `Σ_{i=1}^{t} τ_i`
    pub fn partial_sum(&self, t: usize) -> f64 {
        (1..=t).map(|i| self.tau(i)).sum()
    }

    /// Checks `τ_t > 0` and `Σ τ_t ≤ γ`.
    pub fn validate(&self, gamma: f64) -> Result<()> {
        let total = match self {
            ToleranceSchedule::GeometricHalving { gamma: g } => {
                if !(*g > 0.0) {
                    return Err(Error::NonPositiveInput("schedule gamma"));
                }
                *g
            }
            ToleranceSchedule::Custom(list) => {
                if list.is_empty() || list.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::NonPositiveInput("tolerance"));
                }
                list.iter().sum::<f64>() + list.last().copied().unwrap_or(0.0)
            }
        };
        if total > gamma * (1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "tolerances sum to {total}, above gamma {gamma}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfspaceForcingExample {
    pub phi: Point,
    pub psi: Point,
    pub halfspace: Halfspace,
    pub witness: Action,
    /// `c − ⟨λ,ψ⟩`, the distance from `ψ` to the complement of `H`.
    pub slack: f64,
    /// Scalarized upper value `v(λ)`.
    pub value: f64,
}

/// A candidate whose halfspace 𝒳 cannot 1-force: the tangent halfspace at `ψ`
/// already has `v(λ) > ⟨λ,ψ⟩ + τ`, so the target is not an A-set (up to discretization).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NotASetEvidence {
    pub phi: Point,
    pub psi: Point,
    pub halfspace: Halfspace,
    pub value: f64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExampleSearch {
    Example(HalfspaceForcingExample),
    NotASet(NotASetEvidence),
}

/// Distance at or below which `φ` counts as inside `S`.
pub fn inside_tolerance(set: &TargetSet) -> f64 {
    set.resolution() + DIST_EPS
}

/// Looks for a halfspace-forcing example at `φ` with slack at most `τ`.
///
/// The boundary is placed at `c = max(⟨λ,ψ⟩, min(v, ⟨λ,ψ⟩ + τ))`, the least
/// forcible offset within the slack budget.
pub fn find_example(game: &Game, set: &TargetSet, phi: &Point, tau: f64) -> Result<ExampleSearch> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveInput("tau"));
    }
    let np = set.project(phi)?;
    if np.distance <= inside_tolerance(set) {
        return Err(Error::DegenerateDirection(np.distance));
    }
    let psi = np.point;
    let lambda: Vec<f64> = phi.sub(&psi).scale(1.0 / np.distance).0;
    let s = game.scalar_game(&lambda)?;
    let v = s.upper;
    let at_psi = dot(&lambda, &psi.0);
    let at_phi = dot(&lambda, &phi.0);
    let c = at_psi.max(v.min(at_psi + tau));
    if v <= c + FORCE_TOL && c < at_phi {
        Ok(ExampleSearch::Example(HalfspaceForcingExample {
            phi: phi.clone(),
            psi,
            halfspace: Halfspace {
                normal: lambda,
                offset: c,
            },
            witness: s.x,
            slack: c - at_psi,
            value: v,
        }))
    } else {
        Ok(ExampleSearch::NotASet(NotASetEvidence {
            phi: phi.clone(),
            psi,
            halfspace: Halfspace {
                normal: lambda,
                offset: at_psi,
            },
            value: v,
            tau,
        }))
    }
}

/// The greedy approach strategy 𝔤*.
pub struct GStar {
    pub target: TargetSet,
    pub schedule: ToleranceSchedule,
    /// Rounds that found no example, with the refuting candidate.
    pub evidence: Vec<(usize, NotASetEvidence)>,
}

impl GStar {
    pub fn new(target: TargetSet, schedule: ToleranceSchedule) -> Self {
        GStar {
            target,
            schedule,
            evidence: Vec::new(),
        }
    }

    /// The action for round `t + 1` given `φ_t` (`None` before the first round).
    pub fn step(&mut self, game: &Game, t: usize, phi: Option<&Point>) -> Result<Decision> {
        let Some(phi) = phi else {
            return Ok(Decision::plain(game.fallback_x()));
        };
        let tau = self.schedule.tau(t);
        if self.target.distance(phi)? <= inside_tolerance(&self.target) {
            return Ok(Decision {
                action: game.fallback_x(),
                info: StepInfo {
                    tau: Some(tau),
                    ..StepInfo::default()
                },
            });
        }
        match find_example(game, &self.target, phi, tau)? {
            ExampleSearch::Example(ex) => Ok(Decision {
                action: ex.witness,
                info: StepInfo {
                    tau: Some(tau),
                    example_found: Some(true),
                    slack: Some(ex.slack),
                    ..StepInfo::default()
                },
            }),
            ExampleSearch::NotASet(ev) => {
                log::debug!("round {}: no forcing example (v = {})", t + 1, ev.value);
                self.evidence.push((t + 1, ev));
                Ok(Decision {
                    action: game.fallback_x(),
                    info: StepInfo {
                        tau: Some(tau),
                        example_found: Some(false),
                        ..StepInfo::default()
                    },
                })
            }
        }
    }
}

impl Strategy for GStar {
    fn act(&mut self, game: &Game, history: &[Round], _: Option<&Action>) -> Result<Decision> {
        self.step(game, history.len(), history.last().map(|r| &r.phi))
    }

    fn name(&self) -> &str {
        "gstar"
    }
}

/// Runs 𝔤* for `rounds` rounds; the adversary sees each `x_t` before answering.
pub fn run_approach(
    game: &Game,
    target: &TargetSet,
    adversary: &mut dyn Strategy,
    rounds: usize,
    schedule: ToleranceSchedule,
) -> Result<(Trajectory, Vec<(usize, NotASetEvidence)>)> {
    if rounds == 0 {
        return Err(Error::NonPositiveInput("rounds"));
    }
    let mut g = GStar::new(target.clone(), schedule);
    let traj = play::play(game, target, &mut g, adversary, rounds, Order::XFirst)?;
    Ok((traj, g.evidence))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeViolation {
    pub t: usize,
    pub squared_distance: f64,
    pub bound: f64,
}

/// Checks `‖φ_t − ψ_t‖² ≤ (γ² + 2γ Σ_{i<t} τ_i)/t + slack` at every round.
pub fn potential_audit(
    traj: &Trajectory,
    schedule: &ToleranceSchedule,
    gamma: f64,
    slack: f64,
) -> Vec<EnvelopeViolation> {
    let mut partial = 0.0;
    let mut out = Vec::new();
    for r in &traj.rounds {
        let bound = (gamma * gamma + 2.0 * gamma * partial) / r.t as f64;
        let lhs = r.dist * r.dist;
        if lhs > bound + slack {
            out.push(EnvelopeViolation {
                t: r.t,
                squared_distance: lhs,
                bound,
            });
        }
        partial += schedule.tau(r.t);
    }
    out
}

/// Rounds `t ≥ from` with `dist(φ_t, S) > eps + slack`.
pub fn rate_violations(traj: &Trajectory, eps: f64, from: usize, slack: f64) -> Vec<usize> {
    traj.rounds
        .iter()
        .filter(|r| r.t >= from && r.dist > eps + slack)
        .map(|r| r.t)
        .collect()
}

/// `⌈3γ²/ε²⌉`
pub fn rate_horizon(gamma: f64, eps: f64) -> usize {
    (3.0 * gamma * gamma / (eps * eps)).ceil() as usize
}

/// For every round that played a forcing example, replays the played `x_t`
/// against every pure column and checks `⟨f(x_t, e_j) − ψ, φ − ψ⟩ ≤ τγ + tol`
/// with `(φ, ψ)` from the previous round. Returns offending rounds.
pub fn force_audit(game: &Game, traj: &Trajectory, gamma: f64, tol: f64) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for w in traj.rounds.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if cur.x_info.example_found != Some(true) {
            continue;
        }
        let tau = cur.x_info.tau.unwrap_or(0.0);
        let dir = prev.phi.sub(&prev.psi);
        for j in 0..game.cols() {
            let z = game.payoff(&cur.x, &Action::Pure(j))?;
            if dot(&z.sub(&prev.psi).0, &dir.0) > tau * gamma + tol {
                bad.push(cur.t);
                break;
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::Player;
    use crate::game::GameMode;
    use crate::play::{Constant, GreedyDistance, RandomPlay};

    fn s0() -> TargetSet {
        TargetSet::segment([0.0, 0.0], [0.5, 0.5])
    }

    #[test]
    fn schedule_values() {
        let s = ToleranceSchedule::GeometricHalving { gamma: 1.0 };
        assert_eq!(s.tau(1), 0.5);
        assert_eq!(s.tau(3), 0.125);
        assert!(s.tau(5000) > 0.0);
        assert!(s.validate(1.0).is_ok());
        assert!((s.partial_sum(60) - 1.0).abs() < 1e-15);
        let c = ToleranceSchedule::Custom(vec![0.5, 0.25]);
        assert_eq!(c.tau(3), 0.125);
        assert!(c.validate(1.0).is_ok());
        assert!(ToleranceSchedule::Custom(vec![0.9, 0.5])
            .validate(1.0)
            .is_err());
    }

    #[test]
    fn example_at_off_diagonal_point() {
        let g = Game::appendix_a(GameMode::Mixed);
        let phi = Point::from([0.75, 0.25]);
        for tau in [1.0, 0.1, 1e-3, 1e-8] {
            let ExampleSearch::Example(ex) = find_example(&g, &s0(), &phi, tau).unwrap() else {
                panic!("S0 admits a forcing example at every tolerance");
            };
            // Projection onto the diagonal averages the coordinates.
            assert!(ex.psi.dist(&Point::from([0.5, 0.5])) < 1e-12);
            assert!(ex.slack >= 0.0 && ex.slack <= tau);
            // Soundness: the witness lands in H against every column.
            for j in 0..2 {
                let z = g.payoff(&ex.witness, &Action::Pure(j)).unwrap();
                assert!(ex.halfspace.contains(&z.0, 1e-7));
            }
        }
    }

    #[test]
    fn degenerate_direction_inside() {
        let g = Game::appendix_a(GameMode::Mixed);
        let r = find_example(&g, &s0(), &Point::from([0.2, 0.2]), 0.1);
        assert!(matches!(r, Err(Error::DegenerateDirection(_))));
    }

    #[test]
    fn first_move_is_uniform_fallback() {
        let g = Game::appendix_a(GameMode::Mixed);
        let mut gs = GStar::new(
            s0(),
            ToleranceSchedule::GeometricHalving { gamma: g.gamma() },
        );
        assert_eq!(
            gs.step(&g, 0, None).unwrap().action,
            Action::Mixed(vec![0.5, 0.5])
        );
        let d = gs.step(&g, 3, Some(&Point::from([0.1, 0.1]))).unwrap();
        assert_eq!(d.action, Action::Mixed(vec![0.5, 0.5]));
        assert_eq!(d.info.example_found, None);
    }

    #[test]
    fn approach_s0_against_random_and_greedy() {
        let g = Game::appendix_a(GameMode::Mixed);
        let sched = ToleranceSchedule::GeometricHalving { gamma: g.gamma() };
        let mut adversaries: Vec<Box<dyn Strategy>> = vec![
            Box::new(RandomPlay::new(Player::Y, 3)),
            Box::new(GreedyDistance {
                player: Player::Y,
                target: s0(),
            }),
        ];
        for adv in adversaries.iter_mut() {
            let (tr, ev) = run_approach(&g, &s0(), adv.as_mut(), 400, sched.clone()).unwrap();
            assert!(ev.is_empty());
            assert!(potential_audit(&tr, &sched, g.gamma(), 1e-6).is_empty());
            assert!(rate_violations(&tr, 0.1, 300, 1e-7).is_empty());
            assert!(force_audit(&g, &tr, g.gamma(), 1e-7).unwrap().is_empty());
            assert!(tr.rounds[0].dist <= g.gamma());
        }
    }

    #[test]
    fn audit_flags_a_non_forcing_run() {
        let g = Game::appendix_a(GameMode::Mixed);
        let sched = ToleranceSchedule::GeometricHalving { gamma: g.gamma() };
        let mut x = Constant(Action::Pure(0));
        let mut y = Constant(Action::Pure(0));
        let tr = play::play(&g, &s0(), &mut x, &mut y, 20, Order::XFirst).unwrap();
        assert!(!potential_audit(&tr, &sched, g.gamma(), 1e-6).is_empty());
    }

    #[test]
    fn pennies_halfline_has_no_examples() {
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let half = TargetSet::segment([-1.0], [0.0]);
        let r = find_example(&g, &half, &Point::from([0.5]), 0.25).unwrap();
        assert!(matches!(r, ExampleSearch::NotASet(_)));
    }
}
