//! Scenario files and the built-in registry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::approach::ToleranceSchedule;
use crate::avoid::{PeelOptions, DEFAULT_H, DEFAULT_MAX_STAGES};
use crate::error::{Error, Result};
use crate::game::{Game, GameMode};
use crate::geometry::{direction_grid, Point, TargetSet};

/// `{"d": …, "payoffs": m×n×d, "mode": "pure"|"mixed", "gamma": optional}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameDescriptor {
    pub d: usize,
    pub payoffs: Vec<Vec<Vec<f64>>>,
    pub mode: GameMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl GameDescriptor {
    pub fn build(&self) -> Result<Game> {
        for (i, row) in self.payoffs.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if z.len() != self.d {
                    return Err(Error::Validation(format!(
                        "payoff [{i}][{j}] has {} coordinates, game declares d = {}",
                        z.len(),
                        self.d
                    )));
                }
            }
        }
        let payoffs = self
            .payoffs
            .iter()
            .map(|row| row.iter().map(|z| Point(z.clone())).collect())
            .collect();
        Game::new(self.mode, payoffs, self.gamma)
    }

    pub fn from_game(game: &Game, gamma: Option<f64>) -> Self {
        GameDescriptor {
            d: game.dim(),
            payoffs: game
                .payoffs()
                .iter()
                .map(|row| row.iter().map(|z| z.0.clone()).collect())
                .collect(),
            mode: game.mode(),
            gamma,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bindings {
    /// Name of the target used by default.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approacher: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSpec {
    /// `τ_t = γ·2^{−t}` with the game's `γ`.
    #[default]
    GeometricHalving,
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Cloud resolution for sampled targets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Number of planar angles or spherical grid points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_stages: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub game: GameDescriptor,
    pub targets: BTreeMap<String, TargetSet>,
    pub bindings: Bindings,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Scenario {
    /// Checks every invariant and returns the constructed game.
    pub fn validate(&self) -> Result<Game> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("scenario name is empty".into()));
        }
        let game = self.game.build()?;
        if self.targets.is_empty() {
            return Err(Error::Validation("scenario declares no targets".into()));
        }
        for (name, set) in &self.targets {
            let d = set
                .validate()
                .map_err(|e| Error::Validation(format!("target {name}: {e}")))?;
            if d != game.dim() {
                return Err(Error::Validation(format!(
                    "target {name} has dimension {d}, game has {}",
                    game.dim()
                )));
            }
        }
        if !self.targets.contains_key(&self.bindings.target) {
            return Err(Error::Validation(format!(
                "bound target {} is not declared",
                self.bindings.target
            )));
        }
        for spec in [&self.bindings.adversary, &self.bindings.approacher]
            .into_iter()
            .flatten()
        {
            AgentSpec::parse(spec)?;
        }
        self.tolerance_schedule(&game).validate(game.gamma())?;
        if let Some(h) = self.grid.h {
            if !(h > 0.0) {
                return Err(Error::Validation("grid.h must be positive".into()));
            }
        }
        if self.grid.directions == Some(0) || self.grid.max_stages == Some(0) {
            return Err(Error::Validation("grid counts must be positive".into()));
        }
        Ok(game)
    }

    pub fn target(&self, name: Option<&str>) -> Result<&TargetSet> {
        let key = name.unwrap_or(&self.bindings.target);
        self.targets
            .get(key)
            .ok_or_else(|| Error::Validation(format!("unknown target {key}")))
    }

    pub fn tolerance_schedule(&self, game: &Game) -> ToleranceSchedule {
        match &self.schedule {
            ScheduleSpec::GeometricHalving => ToleranceSchedule::GeometricHalving {
                gamma: game.gamma(),
            },
            ScheduleSpec::Custom(v) => ToleranceSchedule::Custom(v.clone()),
        }
    }

    pub fn peel_options(&self, game: &Game) -> PeelOptions {
        PeelOptions {
            max_stages: self.grid.max_stages.unwrap_or(DEFAULT_MAX_STAGES),
            h: self.grid.h.unwrap_or(DEFAULT_H),
            directions: self
                .grid
                .directions
                .map(|k| direction_grid(game.dim(), k, &game.vertices())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Strategy names accepted by `--adversary` and `--approacher`.
#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    Random,
    BestResponse,
    HStar,
    GStar,
    Script(String),
}

impl AgentSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AgentSpec::Random),
            "bestresponse" => Ok(AgentSpec::BestResponse),
            "hstar" => Ok(AgentSpec::HStar),
            "gstar" => Ok(AgentSpec::GStar),
            _ => match s.strip_prefix("script:") {
                Some(path) if !path.is_empty() => Ok(AgentSpec::Script(path.to_string())),
                _ => Err(Error::Validation(format!("unknown strategy {s}"))),
            },
        }
    }
}

pub const BUILTINS: [&str; 5] = [
    "appendixA-S0",
    "appendixA-S1",
    "appendixA-S2",
    "pure-pennies-halfline",
    "lx-minimal-forcible",
];

fn single(name: &str, game: &Game, target: &str, set: TargetSet, adversary: &str) -> Scenario {
    Scenario {
        name: name.to_string(),
        game: GameDescriptor::from_game(game, None),
        targets: BTreeMap::from([(target.to_string(), set)]),
        bindings: Bindings {
            target: target.to_string(),
            adversary: Some(adversary.to_string()),
            approacher: None,
        },
        schedule: ScheduleSpec::GeometricHalving,
        grid: GridSpec::default(),
        notes: None,
    }
}

pub fn builtin(name: &str) -> Option<Scenario> {
    let bilinear = Game::appendix_a(GameMode::Mixed);
    let seg = |a: [f64; 2], b: [f64; 2]| TargetSet::segment(a, b);
    let sc = match name {
        "appendixA-S0" => single(
            name,
            &bilinear,
            "S0",
            seg([0.0, 0.0], [0.5, 0.5]),
            "bestresponse",
        ),
        "appendixA-S1" => {
            let mut s = single(
                name,
                &bilinear,
                "S1",
                TargetSet::Union(vec![
                    seg([0.5, 0.0], [1.0, 0.0]),
                    seg([0.0, 0.5], [0.0, 1.0]),
                ]),
                "bestresponse",
            );
            s.targets.insert("S0".into(), seg([0.0, 0.0], [0.5, 0.5]));
            s.bindings.approacher = Some("gstar".into());
            s.grid.h = Some(0.25);
            s.notes =
                Some("S1 sampled at h = 0.25; the open end at (0, 1/2) is sampled closed.".into());
            s
        }
        "appendixA-S2" => {
            let mut s = single(
                name,
                &bilinear,
                "S2",
                TargetSet::Union(vec![
                    seg([0.0, 0.0], [1.0, 0.0]),
                    seg([0.0, 0.0], [0.0, 0.4]),
                    seg([0.0, 0.6], [0.0, 1.0]),
                ]),
                "bestresponse",
            );
            s.grid.h = Some(0.1);
            s.notes = Some(
                "x1 = e1, x2 = e2; the open middle fifth (0,0.4)-(0,0.6) of L_{x2} is removed."
                    .into(),
            );
            s
        }
        "pure-pennies-halfline" => single(
            name,
            &Game::pennies(GameMode::Pure, 1.0, -1.0),
            "halfline",
            TargetSet::segment([-1.0], [0.0]),
            "bestresponse",
        ),
        "lx-minimal-forcible" => {
            let mut s = single(
                name,
                &bilinear,
                "Lx",
                seg([0.0, 0.5], [0.5, 0.0]),
                "bestresponse",
            );
            s.notes = Some("L_x for x = (1/2, 1/2).".into());
            s
        }
        _ => return None,
    };
    Some(sc)
}

/// Parses a scenario from JSON text.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Loads a built-in by name, or a scenario file by path, and validates it.
pub fn load_scenario(name_or_path: &str) -> Result<(Scenario, Game)> {
    let scenario = match builtin(name_or_path) {
        Some(s) => s,
        None => {
            let path = Path::new(name_or_path);
            if !path.exists() {
                return Err(Error::Validation(format!(
                    "{name_or_path} is neither a built-in scenario nor a file"
                )));
            }
            parse_scenario(&std::fs::read_to_string(path)?, name_or_path)?
        }
    };
    let game = scenario.validate()?;
    Ok((scenario, game))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_round_trip() {
        for name in BUILTINS {
            let s = builtin(name).unwrap();
            s.validate().unwrap();
            let back = parse_scenario(&s.to_json(), name).unwrap();
            assert_eq!(back, s);
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn appendix_payoffs() {
        let (s, g) = load_scenario("appendixA-S0").unwrap();
        assert_eq!(
            s.game.payoffs,
            vec![
                vec![vec![1.0, 0.0], vec![0.0, 0.0]],
                vec![vec![0.0, 0.0], vec![0.0, 1.0]]
            ]
        );
        assert_eq!(g.mode(), GameMode::Mixed);
        let (_, p) = load_scenario("pure-pennies-halfline").unwrap();
        assert_eq!((p.dim(), p.mode()), (1, GameMode::Pure));
    }

    #[test]
    fn malformed_text_reports_location() {
        match parse_scenario("{\"name\": \"x\",\n \"game\": [", "mem") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("mem:2:")),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn invariant_failures_are_named() {
        let mut s = builtin("appendixA-S0").unwrap();
        s.bindings.target = "missing".into();
        assert!(matches!(s.validate(), Err(Error::Validation(m)) if m.contains("missing")));
        let mut s = builtin("appendixA-S0").unwrap();
        s.game.payoffs[0][0] = vec![1.0];
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
        let mut s = builtin("appendixA-S0").unwrap();
        s.targets
            .insert("bad".into(), TargetSet::segment([0.0], [1.0]));
        assert!(matches!(s.validate(), Err(Error::Validation(m)) if m.contains("bad")));
        let mut s = builtin("appendixA-S0").unwrap();
        s.bindings.adversary = Some("oracle".into());
        assert!(s.validate().is_err());
    }
}
