//! Single-round forcing oracles.
//!
//! "1-force" is the first-mover question `∃x ∀y f(x,y) ∈ S`; "2-force" lets the
//! forcing player answer the opponent's move, `∀y ∃x f(x,y) ∈ S`. 𝒴 forces
//! complements. Halfspaces are decided for both game modes; general sets only
//! by enumeration over a pure game.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Action, Game, GameMode};
use crate::geometry::{dot, Halfspace, Point, Region, TargetSet, DIST_EPS};

/// Additive slack on every forcing inequality.
pub const FORCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// One action that works against every reply.
    Fixed(Action),
    /// Pure response for each opponent action, indexed by the opponent's index.
    Table(Vec<usize>),
    /// Best response to the queried mixed action along `normal` (minimizing for 𝒳,
    /// maximizing for 𝒴).
    BestResponse { normal: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForceCertificate {
    pub player: Player,
    pub order: u8,
    pub target: String,
    pub witness: Witness,
}

impl ForceCertificate {
    /// The forcing player's action against `opponent`.
    pub fn respond(&self, game: &Game, opponent: &Action) -> Result<Action> {
        match &self.witness {
            Witness::Fixed(a) => Ok(a.clone()),
            Witness::Table(t) => match opponent {
                Action::Pure(k) => {
                    t.get(*k)
                        .map(|i| Action::Pure(*i))
                        .ok_or(Error::IndexOutOfRange {
                            index: *k,
                            limit: t.len(),
                        })
                }
                Action::Mixed(_) => Err(Error::KindMismatch),
            },
            Witness::BestResponse { normal } => match self.player {
                Player::X => Ok(Action::Pure(game.best_reply(opponent, normal)?.0)),
                Player::Y => Ok(Action::Pure(game.best_response(opponent, normal)?.0)),
            },
        }
    }

    /// Replays the witness against every pure opponent action; `true` iff each
    /// outcome lands where the certificate claims (`region` for 𝒳, its complement for 𝒴).
    pub fn replay<R: Region>(&self, game: &Game, region: &R, tol: f64) -> Result<bool> {
        let opponents = match self.player {
            Player::X => game.cols(),
            Player::Y => game.rows(),
        };
        for k in 0..opponents {
            let opp = Action::Pure(k);
            let own = self.respond(game, &opp)?;
            let z = match self.player {
                Player::X => game.payoff(&own, &opp)?,
                Player::Y => game.payoff(&opp, &own)?,
            };
            let inside = region.contains(&z, tol);
            let ok = match self.player {
                Player::X => inside,
                // The complement is open; a boundary point is not in it.
                Player::Y => !region.contains(&z, -tol),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn describe(h: &Halfspace) -> String {
    format!("halfspace normal={:?} offset={}", h.normal, h.offset)
}

fn check_dim(game: &Game, h: &Halfspace) -> Result<()> {
    if h.dim() != game.dim() {
        return Err(Error::DimensionMismatch {
            expected: game.dim(),
            got: h.dim(),
        });
    }
    Ok(())
}

/// Does 𝒳 have a single action placing every payoff in `H`?
///
/// Mixed games: the scalarized upper value `v(λ)` must satisfy `v ≤ c`.
/// Pure games: some row whose every entry lies in `H`.
pub fn x_one_forces_halfspace(game: &Game, h: &Halfspace) -> Result<Option<ForceCertificate>> {
    check_dim(game, h)?;
    let s = game.scalar_game(&h.normal)?;
    Ok((s.upper <= h.offset + FORCE_TOL).then(|| ForceCertificate {
        player: Player::X,
        order: 1,
        target: describe(h),
        witness: Witness::Fixed(s.x),
    }))
}

/// Can 𝒳 answer every 𝒴 action with a payoff in `H`?
pub fn x_two_forces_halfspace(game: &Game, h: &Halfspace) -> Result<Option<ForceCertificate>> {
    check_dim(game, h)?;
    let g = game.scalarize(&h.normal);
    let witness = match game.mode() {
        GameMode::Pure => {
            let mut table = Vec::with_capacity(game.cols());
            for j in 0..game.cols() {
                match (0..game.rows()).find(|&i| g[i][j] <= h.offset + FORCE_TOL) {
                    Some(i) => table.push(i),
                    None => return Ok(None),
                }
            }
            Witness::Table(table)
        }
        GameMode::Mixed => {
            if game.scalar_game(&h.normal)?.lower > h.offset + FORCE_TOL {
                return Ok(None);
            }
            Witness::BestResponse {
                normal: h.normal.clone(),
            }
        }
    };
    Ok(Some(ForceCertificate {
        player: Player::X,
        order: 2,
        target: describe(h),
        witness,
    }))
}

/// Can 𝒴 answer every 𝒳 action with a payoff strictly outside `H`?
///
/// Exactly the negation of [`x_one_forces_halfspace`] under the same tolerance.
pub fn y_two_forces_complement(game: &Game, h: &Halfspace) -> Result<Option<ForceCertificate>> {
    check_dim(game, h)?;
    let g = game.scalarize(&h.normal);
    let witness = match game.mode() {
        GameMode::Pure => {
            let mut table = Vec::with_capacity(game.rows());
            for row in &g {
                match row.iter().position(|v| *v > h.offset + FORCE_TOL) {
                    Some(j) => table.push(j),
                    None => return Ok(None),
                }
            }
            Witness::Table(table)
        }
        GameMode::Mixed => {
            if game.scalar_game(&h.normal)?.upper <= h.offset + FORCE_TOL {
                return Ok(None);
            }
            Witness::BestResponse {
                normal: h.normal.clone(),
            }
        }
    };
    Ok(Some(ForceCertificate {
        player: Player::Y,
        order: 2,
        target: format!("complement of {}", describe(h)),
        witness,
    }))
}

/// Does 𝒴 have a single action placing every payoff strictly outside `H`?
pub fn y_one_forces_complement(game: &Game, h: &Halfspace) -> Result<Option<ForceCertificate>> {
    check_dim(game, h)?;
    let s = game.scalar_game(&h.normal)?;
    Ok((s.lower > h.offset + FORCE_TOL).then(|| ForceCertificate {
        player: Player::Y,
        order: 1,
        target: format!("complement of {}", describe(h)),
        witness: Witness::Fixed(s.y),
    }))
}

fn require_pure(game: &Game) -> Result<()> {
    if game.mode() != GameMode::Pure {
        return Err(Error::InvalidGame(
            "set forcing is decided by enumeration over pure games".into(),
        ));
    }
    Ok(())
}

/// `in[i][j]`: whether `F[i][j]` lies in the region.
pub fn membership_table<R: Region>(game: &Game, region: &R, tol: f64) -> Vec<Vec<bool>> {
    game.payoffs()
        .iter()
        .map(|row| row.iter().map(|z| region.contains(z, tol)).collect())
        .collect()
}

pub fn x_one_forces_set(game: &Game, set: &TargetSet) -> Result<Option<ForceCertificate>> {
    require_pure(game)?;
    set.validate()?;
    let t = membership_table(game, set, DIST_EPS);
    Ok(t.iter()
        .position(|row| row.iter().all(|b| *b))
        .map(|i| ForceCertificate {
            player: Player::X,
            order: 1,
            target: "set".into(),
            witness: Witness::Fixed(Action::Pure(i)),
        }))
}

pub fn x_two_forces_set(game: &Game, set: &TargetSet) -> Result<Option<ForceCertificate>> {
    require_pure(game)?;
    set.validate()?;
    let t = membership_table(game, set, DIST_EPS);
    let mut table = Vec::with_capacity(game.cols());
    for j in 0..game.cols() {
        match (0..game.rows()).find(|&i| t[i][j]) {
            Some(i) => table.push(i),
            None => return Ok(None),
        }
    }
    Ok(Some(ForceCertificate {
        player: Player::X,
        order: 2,
        target: "set".into(),
        witness: Witness::Table(table),
    }))
}

/// Outcome of the four single-round forcing equivalences on one region.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub x_one_forces: bool,
    pub x_two_forces: bool,
    pub y_two_forces_complement: bool,
    pub supersets_checked: usize,
    pub response_maps_checked: usize,
    pub violations: Vec<String>,
}

impl DualityReport {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

fn one_forces(t: &[Vec<bool>]) -> bool {
    t.iter().any(|row| row.iter().all(|b| *b))
}

fn two_forces(t: &[Vec<bool>]) -> bool {
    (0..t[0].len()).all(|j| t.iter().any(|row| row[j]))
}

fn y_two_forces_out(t: &[Vec<bool>]) -> bool {
    t.iter().all(|row| row.iter().any(|b| !*b))
}

/// Checks the four forcing equivalences by exhaustive enumeration.
///
/// 1. 𝒳 1-forces S iff 𝒴 cannot 2-force Sᶜ.
/// 2. 𝒳 1-forces S ⇒ 𝒳 1-forces every superset (all supersets of the
///    realized payoff cells are enumerated).
/// 3. 𝒳 1-forces S iff S meets every set 𝒴 can 2-force; the minimal such sets
///    are the graphs `{f(i, r(i))}` of response maps `r`, all of which are enumerated.
/// 4. 𝒳 1-forces S ⇒ 𝒳 2-forces S.
pub fn forcing_dualities_check<R: Region>(game: &Game, region: &R) -> Result<DualityReport> {
    require_pure(game)?;
    let t = membership_table(game, region, DIST_EPS);
    let (m, n) = (game.rows(), game.cols());
    let one = one_forces(&t);
    let two = two_forces(&t);
    let y_two = y_two_forces_out(&t);
    let mut violations = Vec::new();

    if one == y_two {
        violations.push(format!("1-force={one} but Y 2-forces complement={y_two}"));
    }

    let outside: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !t[i][j])
        .collect();
    let mut supersets = 0usize;
    if one {
        for mask in 0u64..(1u64 << outside.len()) {
            let mut sup = t.clone();
            for (k, &(i, j)) in outside.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    sup[i][j] = true;
                }
            }
            supersets += 1;
            if !one_forces(&sup) {
                violations.push(format!("superset mask {mask:#b} lost 1-forcibility"));
                break;
            }
        }
    }

    let maps = n.pow(m as u32);
    let mut meets_all = true;
    let mut r = vec![0usize; m];
    for _ in 0..maps {
        if !(0..m).any(|i| t[i][r[i]]) {
            meets_all = false;
        }
        for k in 0..m {
            r[k] += 1;
            if r[k] < n {
                break;
            }
            r[k] = 0;
        }
    }
    if one != meets_all {
        violations.push(format!(
            "1-force={one} but meets every Y-2-forcible set={meets_all}"
        ));
    }

    if one && !two {
        violations.push("1-forcible but not 2-forcible".into());
    }

    Ok(DualityReport {
        x_one_forces: one,
        x_two_forces: two,
        y_two_forces_complement: y_two,
        supersets_checked: supersets,
        response_maps_checked: maps,
        violations,
    })
}

/// For a pure scalar game with `a = min max > max min = b`, the halfspace
/// `(−∞, (a+b)/2]` along `λ`.
pub fn minimax_gap_halfspace(game: &Game, lambda: &[f64]) -> Result<Option<Halfspace>> {
    let s = game.with_mode(GameMode::Pure).scalar_game(lambda)?;
    if s.upper <= s.lower + FORCE_TOL {
        return Ok(None);
    }
    Ok(Some(Halfspace::new(
        lambda.to_vec(),
        0.5 * (s.upper + s.lower),
    )?))
}

/// `⟨F[i][j], λ⟩` maximum over all cells; a halfspace with offset at least
/// `γ‖λ‖` contains every payoff.
pub fn covering_offset(game: &Game, lambda: &[f64]) -> f64 {
    game.vertices()
        .iter()
        .map(|p: &Point| dot(&p.0, lambda))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    fn hs(n: &[f64], c: f64) -> Halfspace {
        Halfspace::new(n.to_vec(), c).unwrap()
    }

    #[test]
    fn appendix_a_diagonal_halfspace() {
        let g = Game::appendix_a(GameMode::Mixed);
        let h = hs(&[1.0, 1.0], 0.5);
        let cert = x_one_forces_halfspace(&g, &h).unwrap().expect("v = 0.5");
        assert!(cert.replay(&g, &h, 1e-9).unwrap());
        assert!(y_two_forces_complement(&g, &h).unwrap().is_none());

        let h = hs(&[1.0, 1.0], 0.4);
        assert!(x_one_forces_halfspace(&g, &h).unwrap().is_none());
        let cert = y_two_forces_complement(&g, &h)
            .unwrap()
            .expect("v = 0.5 > 0.4");
        // Against the mixed optimum the best response still exceeds 0.4.
        let y = cert.respond(&g, &Action::Mixed(vec![0.5, 0.5])).unwrap();
        let z = g.payoff(&Action::Mixed(vec![0.5, 0.5]), &y).unwrap();
        assert!(!h.contains(&z.0, 0.0));
    }

    #[test]
    fn covering_halfspace_is_forcible() {
        let g = Game::appendix_a(GameMode::Mixed);
        let lam = [0.6, -0.8];
        let h = hs(&lam, g.gamma() * norm(&lam));
        assert!(x_one_forces_halfspace(&g, &h).unwrap().is_some());
        assert!(y_two_forces_complement(&g, &h).unwrap().is_none());
        assert!(covering_offset(&g, &lam) <= h.offset);
    }

    #[test]
    fn pure_pennies_halfline() {
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let h = hs(&[1.0], 0.0);
        assert!(x_one_forces_halfspace(&g, &h).unwrap().is_none());
        let cert = y_two_forces_complement(&g, &h).unwrap().unwrap();
        assert_eq!(cert.witness, Witness::Table(vec![0, 1]));
        assert!(cert.replay(&g, &h, 1e-9).unwrap());
        let two = x_two_forces_halfspace(&g, &h).unwrap().unwrap();
        assert!(two.replay(&g, &h, 1e-9).unwrap());
    }

    #[test]
    fn gap_halfspace_is_two_but_not_one_forcible() {
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let h = minimax_gap_halfspace(&g, &[1.0]).unwrap().unwrap();
        assert_eq!(h.offset, 0.0);
        assert!(x_two_forces_halfspace(&g, &h).unwrap().is_some());
        assert!(x_one_forces_halfspace(&g, &h).unwrap().is_none());
        // The mixed extension closes the gap.
        let mixed = g.with_mode(GameMode::Mixed);
        assert!(x_one_forces_halfspace(&mixed, &h).unwrap().is_some());
    }

    #[test]
    fn set_forcing_on_pure_vertices() {
        let g = Game::appendix_a(GameMode::Pure);
        let s1 = TargetSet::Union(vec![
            TargetSet::segment([0.5, 0.0], [1.0, 0.0]),
            TargetSet::segment([0.0, 0.5], [0.0, 1.0]),
        ]);
        // Column 0 yields (1,0) or (0,0); column 1 yields (0,0) or (0,1).
        let cert = x_two_forces_set(&g, &s1).unwrap().unwrap();
        assert_eq!(cert.witness, Witness::Table(vec![0, 1]));
        assert!(x_one_forces_set(&g, &s1).unwrap().is_none());

        let all = TargetSet::hull(g.vertices());
        assert!(x_two_forces_set(&g, &all).unwrap().is_some());
        assert!(x_one_forces_set(&g, &all).unwrap().is_some());
        let far = TargetSet::cloud(vec![Point::from([5.0, 5.0])], 0.01);
        assert!(x_two_forces_set(&g, &far).unwrap().is_none());
        assert!(x_two_forces_set(&g.with_mode(GameMode::Mixed), &far).is_err());
    }

    #[test]
    fn dualities_on_examples() {
        let g = Game::pennies(GameMode::Pure, 1.0, -1.0);
        let r = forcing_dualities_check(&g, &hs(&[1.0], 0.0)).unwrap();
        assert!(r.consistent(), "{:?}", r.violations);
        assert_eq!(r.response_maps_checked, 4);

        let c = Game::new(
            GameMode::Pure,
            vec![vec![Point::from([0.3, 0.3]); 3]; 2],
            None,
        )
        .unwrap();
        let s = TargetSet::ball([0.3, 0.3], 0.1);
        let r = forcing_dualities_check(&c, &s).unwrap();
        assert!(r.x_one_forces && r.x_two_forces && r.consistent());
    }
}
