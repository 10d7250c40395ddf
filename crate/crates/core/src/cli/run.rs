//! Experiment modes behind the command-line subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::output::{indexed, num, slug, Csv, Output};
use super::scenario::{load_scenario, AgentSpec, GameDescriptor, Scenario};
use crate::approach::{potential_audit, rate_horizon, rate_violations, GStar};
use crate::avoid::{
    classify, peel, Classification, HStar, HStarEvent, OnionDecomposition, Verdict,
};
use crate::error::{Error, Result};
use crate::forcing::{
    x_one_forces_halfspace, x_one_forces_set, x_two_forces_halfspace, x_two_forces_set,
    y_one_forces_complement, y_two_forces_complement, ForceCertificate, Player,
};
use crate::game::{Action, Game, GameMode};
use crate::geometry::{Halfspace, TargetSet};
use crate::lp::{matrix_game, LinearProgram, Sense};
use crate::play::{play, GreedyDistance, Order, RandomPlay, Script, Strategy, Trajectory};
use crate::stochastic::{
    deviation_audit, hoeffding_horizon, run_stochastic, SampledRound, SeededSource,
};

/// Summary of one command.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: String,
    pub outcome: String,
    pub pass: bool,
    pub artifacts: Vec<PathBuf>,
    pub wall_clock_s: f64,
    pub seeds: Vec<u64>,
    pub details: Value,
}

impl RunReport {
    fn new(scenario: &str, mode: &str, started: Instant) -> Self {
        RunReport {
            scenario: scenario.to_string(),
            mode: mode.to_string(),
            outcome: String::new(),
            pass: true,
            artifacts: Vec::new(),
            wall_clock_s: started.elapsed().as_secs_f64(),
            seeds: Vec::new(),
            details: Value::Null,
        }
    }

    fn finish(mut self, started: Instant) -> Self {
        self.wall_clock_s = started.elapsed().as_secs_f64();
        self
    }
}

/// Onion decomposition of `set`, keeping the partial result when the stage budget runs out.
pub fn peel_or_partial(
    game: &Game,
    scenario: &Scenario,
    set: &TargetSet,
) -> Result<OnionDecomposition> {
    match peel(game, set, &scenario.peel_options(game)) {
        Err(Error::StageBudgetExceeded(partial)) => {
            log::warn!("stage budget exhausted; treating the remaining cloud as the core");
            Ok(*partial)
        }
        other => other,
    }
}

fn read_script(path: &str, game: &Game, player: Player) -> Result<Vec<Action>> {
    let text = std::fs::read_to_string(path)?;
    let actions: Vec<Action> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{path}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if actions.is_empty() {
        return Err(Error::Validation(format!("script {path} is empty")));
    }
    for a in &actions {
        match player {
            Player::X => game.check_x(a)?,
            Player::Y => game.check_y(a)?,
        }
    }
    Ok(actions)
}

/// Builds a registered strategy for `player`.
pub fn build_agent(
    spec: &str,
    player: Player,
    scenario: &Scenario,
    game: &Game,
    target: &TargetSet,
    seed: u64,
) -> Result<Box<dyn Strategy>> {
    Ok(match (AgentSpec::parse(spec)?, player) {
        (AgentSpec::Random, _) => Box::new(RandomPlay::new(player, seed)),
        (AgentSpec::BestResponse, _) => Box::new(GreedyDistance {
            player,
            target: target.clone(),
        }),
        (AgentSpec::HStar, Player::Y) => {
            Box::new(HStar::new(peel_or_partial(game, scenario, target)?))
        }
        (AgentSpec::GStar, Player::X) => Box::new(GStar::new(
            target.clone(),
            scenario.tolerance_schedule(game),
        )),
        (AgentSpec::Script(path), _) => Box::new(Script(read_script(&path, game, player)?)),
        (AgentSpec::HStar, Player::X) | (AgentSpec::GStar, Player::Y) => {
            return Err(Error::Validation(format!(
                "strategy {spec} cannot play for {player:?}"
            )));
        }
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flag(x: Option<bool>) -> String {
    x.map(|b| u8::from(b).to_string()).unwrap_or_default()
}

pub struct SimulateArgs {
    pub scenario: String,
    pub target: Option<String>,
    pub rounds: usize,
    pub epsilon: f64,
    pub opponent: Option<String>,
    pub seed: u64,
    pub order: Order,
}

/// 𝔤* against the chosen adversary, with the rate check from `⌈3γ²/ε²⌉` on.
pub fn simulate_approach(out: &Output, a: &SimulateArgs) -> Result<RunReport> {
    let started = Instant::now();
    if !(a.epsilon > 0.0) {
        return Err(Error::NonPositiveInput("epsilon"));
    }
    if a.rounds == 0 {
        return Err(Error::NonPositiveInput("rounds"));
    }
    let (sc, game) = load_scenario(&a.scenario)?;
    let target = sc.target(a.target.as_deref())?.clone();
    let schedule = sc.tolerance_schedule(&game);
    let adv_name = a
        .opponent
        .clone()
        .or_else(|| sc.bindings.adversary.clone())
        .unwrap_or("bestresponse".into());
    let mut adversary = build_agent(&adv_name, Player::Y, &sc, &game, &target, a.seed)?;
    let mut gstar = GStar::new(target.clone(), schedule.clone());
    let traj = play(
        &game,
        &target,
        &mut gstar,
        adversary.as_mut(),
        a.rounds,
        a.order,
    )?;

    let d = game.dim();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(indexed("phi", d))
        .chain(["dist", "tau_t", "example_found", "slack"].map(String::from))
        .collect();
    let mut csv = Csv::new(&header);
    for r in &traj.rounds {
        let mut row = vec![r.t.to_string()];
        row.extend(r.phi.0.iter().map(|v| num(*v)));
        row.extend([
            num(r.dist),
            opt(r.x_info.tau),
            flag(r.x_info.example_found),
            opt(r.x_info.slack),
        ]);
        csv.row(&row);
    }
    let name = slug(&sc.name);
    let mut report = RunReport::new(&sc.name, "simulate approach", started);
    report.seeds = vec![a.seed];
    report
        .artifacts
        .push(out.write(&format!("approach_{name}.csv"), &csv.finish())?);

    let gamma = game.gamma();
    let horizon = rate_horizon(gamma, a.epsilon);
    let envelope = potential_audit(&traj, &schedule, gamma, 1e-12);
    let rate = (a.rounds >= horizon).then(|| rate_violations(&traj, a.epsilon, horizon, 1e-12));
    report.pass = envelope.is_empty() && rate.as_ref().is_none_or(Vec::is_empty);
    report.outcome = match &rate {
        Some(v) => format!(
            "rate check from t = {horizon}: {} violations; envelope violations: {}; rounds without an example: {}",
            v.len(),
            envelope.len(),
            gstar.evidence.len()
        ),
        None => format!(
            "rate check not reached (needs {horizon} rounds); envelope violations: {}; rounds without an example: {}",
            envelope.len(),
            gstar.evidence.len()
        ),
    };
    report.details = json!({
        "adversary": adv_name,
        "rate_horizon": horizon,
        "final_distance": traj.rounds.last().map(|r| r.dist),
        "rate_violations": rate.map(|v| v.len()),
        "envelope_violations": envelope.len(),
        "no_example_rounds": gstar.evidence.len(),
    });
    Ok(report.finish(started))
}

/// 𝔥* against the chosen approacher; passes when the mean leaves `S_δ` at some `t ≥ T(S)`.
pub fn simulate_avoid(out: &Output, a: &SimulateArgs) -> Result<RunReport> {
    let started = Instant::now();
    if a.rounds == 0 {
        return Err(Error::NonPositiveInput("rounds"));
    }
    let (sc, game) = load_scenario(&a.scenario)?;
    let target = sc.target(a.target.as_deref())?.clone();
    let app_name = a
        .opponent
        .clone()
        .or_else(|| sc.bindings.approacher.clone())
        .unwrap_or("gstar".into());
    let mut approacher = build_agent(&app_name, Player::X, &sc, &game, &target, a.seed)?;
    let dec = peel_or_partial(&game, &sc, &target)?;
    let (delta, horizon) = (dec.delta, dec.horizon);
    let mut hstar = HStar::new(dec);
    let traj = play(
        &game,
        &target,
        approacher.as_mut(),
        &mut hstar,
        a.rounds,
        a.order,
    )?;

    let d = game.dim();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(indexed("phi", d))
        .chain(["dist", "rind", "drive_start"].map(String::from))
        .collect();
    let mut csv = Csv::new(&header);
    for r in &traj.rounds {
        let mut row = vec![r.t.to_string()];
        row.extend(r.phi.0.iter().map(|v| num(*v)));
        row.extend([
            num(r.dist),
            r.y_info.rind.map(|i| i.to_string()).unwrap_or_default(),
            u8::from(r.y_info.drive_start).to_string(),
        ]);
        csv.row(&row);
    }
    let name = slug(&sc.name);
    let mut report = RunReport::new(&sc.name, "simulate avoid", started);
    report.seeds = vec![a.seed];
    report
        .artifacts
        .push(out.write(&format!("avoid_{name}.csv"), &csv.finish())?);

    let count = |f: fn(&HStarEvent) -> bool| hstar.events.iter().filter(|e| f(e)).count();
    let misses = count(|e| matches!(e, HStarEvent::CertificateMiss { .. }));
    let drives = count(|e| matches!(e, HStarEvent::DriveStart { .. }));
    let overruns = count(|e| matches!(e, HStarEvent::DriveOverrun { .. }));
    match horizon {
        None => {
            report.outcome =
                "target peels to a stable core; the avoidance strategy plays arbitrarily".into();
        }
        Some(h) if (a.rounds as u64) < h => {
            report.outcome = format!("escape check not reached (T(S) = {h})");
        }
        Some(h) => {
            let escaped = escape_round(&traj, h as usize, delta);
            report.pass = escaped.is_some();
            report.outcome = match escaped {
                Some(t) => {
                    format!("mean left the δ-neighborhood at t = {t} (T(S) = {h}, δ = {delta:e})")
                }
                None => format!("mean stayed within δ = {delta:e} after T(S) = {h}"),
            };
        }
    }
    report.details = json!({
        "approacher": app_name,
        "delta": delta,
        "horizon": horizon,
        "drives": drives,
        "certificate_misses": misses,
        "drive_overruns": overruns,
    });
    Ok(report.finish(started))
}

/// First `t ≥ from` with `dist(φ_t, S) > δ`.
pub fn escape_round(traj: &Trajectory, from: usize, delta: f64) -> Option<usize> {
    traj.rounds
        .iter()
        .find(|r| r.t >= from && r.dist > delta)
        .map(|r| r.t)
}

fn decomposition_json(dec: &OnionDecomposition) -> Value {
    let stages: Vec<Value> = dec
        .stages
        .iter()
        .map(|s| {
            json!({
                "tolerance": s.tolerance,
                "size": s.points.len(),
                "removed": s.removed,
                "certificates": s.certificates.iter().map(|c| json!({
                    "psi": c.psi,
                    "lambda": c.halfspace.normal,
                    "c": c.halfspace.offset,
                    "tau": c.tau,
                    "value": c.value,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "stages": stages,
        "classification": dec.classification,
        "delta": dec.delta,
        "horizon": dec.horizon,
        "h": dec.h,
    })
}

pub struct PeelArgs {
    pub scenario: String,
    pub target: Option<String>,
    pub stages: Option<usize>,
    pub grid: Option<usize>,
    pub h: Option<f64>,
}

fn scenario_with_overrides(a: &PeelArgs) -> Result<(Scenario, Game)> {
    let (mut sc, _) = load_scenario(&a.scenario)?;
    if a.stages.is_some() {
        sc.grid.max_stages = a.stages;
    }
    if a.grid.is_some() {
        sc.grid.directions = a.grid;
    }
    if a.h.is_some() {
        sc.grid.h = a.h;
    }
    let game = sc.validate()?;
    Ok((sc, game))
}

pub fn run_peel(out: &Output, a: &PeelArgs) -> Result<RunReport> {
    let started = Instant::now();
    let (sc, game) = scenario_with_overrides(a)?;
    let target = sc.target(a.target.as_deref())?;
    let (dec, exhausted) = match peel(&game, target, &sc.peel_options(&game)) {
        Ok(d) => (d, false),
        Err(Error::StageBudgetExceeded(p)) => (*p, true),
        Err(e) => return Err(e),
    };
    let name = slug(&sc.name);
    let mut doc = decomposition_json(&dec);
    doc["scenario"] = json!(sc.name);
    doc["stage_budget_exhausted"] = json!(exhausted);
    doc["resolution_note"] = json!(format!(
        "decided on a cloud of resolution h = {} with a finite direction grid",
        dec.h
    ));
    let mut report = RunReport::new(&sc.name, "peel", started);
    let text = serde_json::to_string_pretty(&doc).expect("json");
    report
        .artifacts
        .push(out.write(&format!("peel_{name}.json"), &text)?);
    let mut csv = Csv::new(&["stage".into(), "hausdorff".into()]);
    for (i, w) in dec.stages.windows(2).enumerate() {
        csv.row(&[
            i.to_string(),
            num(crate::geometry::hausdorff_clouds(
                &w[0].points,
                &w[1].points,
            )?),
        ]);
    }
    report
        .artifacts
        .push(out.write(&format!("peel_{name}_hausdorff.csv"), &csv.finish())?);
    report.pass = !exhausted;
    report.outcome = match dec.classification {
        Classification::Empty { n } => {
            format!("peels to the empty set at N = {n}; δ = {:e}", dec.delta)
        }
        Classification::ASetApprox { core_size, .. } if !exhausted => {
            format!(
                "stabilizes after {} stages with {core_size} core points",
                dec.stages.len()
            )
        }
        Classification::ASetApprox { .. } => {
            format!("stage budget exhausted after {} stages", dec.stages.len())
        }
    };
    report.details = json!({ "classification": dec.classification, "stages": dec.stages.len() });
    Ok(report.finish(started))
}

pub fn run_classify(out: &Output, a: &PeelArgs) -> Result<RunReport> {
    let started = Instant::now();
    let (sc, game) = scenario_with_overrides(a)?;
    let target = sc.target(a.target.as_deref())?;
    let verdict = classify(&game, target, &sc.peel_options(&game))?;
    let mut doc = json!({ "scenario": sc.name, "verdict": verdict.label() });
    let mut report = RunReport::new(&sc.name, "classify", started);
    report.outcome = match &verdict {
        Verdict::Undecided { gap } => {
            doc["minimax_gap"] = json!(gap);
            format!("Undecided (minimax gap {gap})")
        }
        Verdict::Approachable(dec) | Verdict::Avoidable(dec) => {
            doc["decomposition"] = decomposition_json(dec);
            verdict.label().to_string()
        }
    };
    report.artifacts.push(out.write(
        &format!("classify_{}.json", slug(&sc.name)),
        &serde_json::to_string_pretty(&doc).expect("json"),
    )?);
    report.details = json!({ "verdict": verdict.label() });
    Ok(report.finish(started))
}

pub struct ForceArgs {
    pub scenario: Option<String>,
    pub game: Option<PathBuf>,
    pub halfspace: Option<String>,
    pub set: Option<String>,
    pub order: u8,
    pub player: Player,
}

fn read_game(path: &Path) -> Result<Game> {
    let text = std::fs::read_to_string(path)?;
    let origin = path.display().to_string();
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let inner = value.get("game").cloned().unwrap_or(value);
    let desc: GameDescriptor = serde_json::from_value(inner).map_err(|e| Error::Parse {
        location: origin,
        message: e.to_string(),
    })?;
    desc.build()
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Validation(format!("bad number {p:?}: {e}")))
        })
        .collect()
}

pub fn force_check(out: &Output, a: &ForceArgs) -> Result<RunReport> {
    let started = Instant::now();
    let (game, scenario) = match (&a.game, &a.scenario) {
        (Some(p), _) => (read_game(p)?, None),
        (None, Some(s)) => {
            let (sc, g) = load_scenario(s)?;
            (g, Some(sc))
        }
        (None, None) => {
            return Err(Error::Validation(
                "force check needs --game or --scenario".into(),
            ))
        }
    };
    if a.order != 1 && a.order != 2 {
        return Err(Error::Validation("--order must be 1 or 2".into()));
    }
    let (label, cert): (String, Option<ForceCertificate>) = match (&a.halfspace, &a.set) {
        (Some(spec), None) => {
            let v = parse_floats(spec)?;
            if v.len() != game.dim() + 1 {
                return Err(Error::DimensionMismatch {
                    expected: game.dim() + 1,
                    got: v.len(),
                });
            }
            let h = Halfspace::new(v[..game.dim()].to_vec(), v[game.dim()])?;
            let cert = match (a.player, a.order) {
                (Player::X, 1) => x_one_forces_halfspace(&game, &h)?,
                (Player::X, _) => x_two_forces_halfspace(&game, &h)?,
                (Player::Y, 1) => y_one_forces_complement(&game, &h)?,
                (Player::Y, _) => y_two_forces_complement(&game, &h)?,
            };
            let what = if a.player == Player::X {
                "H"
            } else {
                "complement of H"
            };
            (
                format!("{what} = {{z : ⟨{:?}, z⟩ ≤ {}}}", h.normal, h.offset),
                cert,
            )
        }
        (None, Some(spec)) => {
            let set = match scenario.as_ref().and_then(|s| s.targets.get(spec)) {
                Some(t) => t.clone(),
                None => serde_json::from_str::<TargetSet>(spec).map_err(|e| Error::Parse {
                    location: "--set".into(),
                    message: e.to_string(),
                })?,
            };
            let cert = match (a.player, a.order) {
                (Player::X, 1) => x_one_forces_set(&game, &set)?,
                (Player::X, _) => x_two_forces_set(&game, &set)?,
                (Player::Y, _) => {
                    return Err(Error::Validation(
                        "set forcing is decided for the 𝒳 player only".into(),
                    ));
                }
            };
            (spec.clone(), cert)
        }
        _ => {
            return Err(Error::Validation(
                "give exactly one of --halfspace or --set".into(),
            ))
        }
    };
    let name = scenario
        .as_ref()
        .map_or("game".to_string(), |s| s.name.clone());
    let doc = json!({
        "player": a.player,
        "order": a.order,
        "target": label,
        "forces": cert.is_some(),
        "certificate": cert,
    });
    let mut report = RunReport::new(&name, "force check", started);
    report.artifacts.push(out.write(
        &format!(
            "force_{}_{}{}.json",
            slug(&name),
            if a.player == Player::X { "x" } else { "y" },
            a.order
        ),
        &serde_json::to_string_pretty(&doc).expect("json"),
    )?);
    report.outcome = format!(
        "{:?} {}-forces {label}: {}",
        a.player,
        a.order,
        cert.is_some()
    );
    report.details = doc;
    Ok(report.finish(started))
}

/// Linear program file: `{"objective", "rows", "senses": ["le"|"ge"|"eq"], "rhs", "maximize", "free"}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LpFile {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    senses: Vec<String>,
    rhs: Vec<f64>,
    #[serde(default)]
    maximize: bool,
    #[serde(default)]
    free: Option<Vec<bool>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn lp_solve(out: &Output, path: &Path) -> Result<RunReport> {
    let started = Instant::now();
    let f: LpFile = read_json(path)?;
    let senses = f
        .senses
        .iter()
        .map(|s| match s.as_str() {
            "le" => Ok(Sense::Le),
            "ge" => Ok(Sense::Ge),
            "eq" => Ok(Sense::Eq),
            other => Err(Error::Validation(format!("unknown sense {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = f.objective.len();
    let lp = LinearProgram {
        objective: f.objective,
        rows: f.rows,
        senses,
        rhs: f.rhs,
        maximize: f.maximize,
        free: f.free.unwrap_or_else(|| vec![false; n]),
    };
    let sol = lp.solve()?;
    let doc = json!({ "value": sol.value, "x": sol.x, "pivots": sol.pivots });
    let name = path.display().to_string();
    let mut report = RunReport::new(&name, "lp solve", started);
    report.artifacts.push(out.write(
        &format!("lp_{}.json", slug(&name)),
        &serde_json::to_string_pretty(&doc).expect("json"),
    )?);
    report.outcome = format!("optimal value {}", sol.value);
    report.details = doc;
    Ok(report.finish(started))
}

pub struct GameValueArgs {
    pub matrix: Option<PathBuf>,
    pub scenario: Option<String>,
    pub lambda: Option<String>,
}

/// Value and optimal strategies of a scalar matrix game (row player minimizes),
/// read from a file or obtained by scalarizing a scenario game along `λ`.
pub fn game_value(out: &Output, a: &GameValueArgs) -> Result<RunReport> {
    let started = Instant::now();
    let (name, matrix) = match (&a.matrix, &a.scenario, &a.lambda) {
        (Some(p), None, None) => (p.display().to_string(), read_json::<Vec<Vec<f64>>>(p)?),
        (None, Some(s), Some(l)) => {
            let (_, g) = load_scenario(s)?;
            let lam = parse_floats(l)?;
            if lam.len() != g.dim() {
                return Err(Error::DimensionMismatch {
                    expected: g.dim(),
                    got: lam.len(),
                });
            }
            (s.clone(), g.scalarize(&lam))
        }
        _ => {
            return Err(Error::Validation(
                "give a matrix file, or --scenario with --lambda".into(),
            ))
        }
    };
    let sol = matrix_game(&matrix)?;
    let doc = json!({
        "value": sol.value,
        "lower_value": sol.lower_value,
        "row_strategy": sol.row_strategy,
        "col_strategy": sol.col_strategy,
    });
    let mut report = RunReport::new(&name, "game value", started);
    report.artifacts.push(out.write(
        &format!("game_{}.json", slug(&name)),
        &serde_json::to_string_pretty(&doc).expect("json"),
    )?);
    report.outcome = format!("value {}", sol.value);
    report.details = doc;
    Ok(report.finish(started))
}

pub struct StochasticArgs {
    pub scenario: String,
    pub target: Option<String>,
    pub rounds: usize,
    pub seeds: std::ops::Range<u64>,
    pub epsilon: f64,
    pub adversary: Option<String>,
}

/// Parses `a..b` (half-open) or a single seed.
pub fn parse_seed_range(s: &str) -> Result<std::ops::Range<u64>> {
    let bad = || Error::Validation(format!("seed range {s:?} is not of the form a..b"));
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (
                a.parse::<u64>().map_err(|_| bad())?,
                b.parse::<u64>().map_err(|_| bad())?,
            );
            if a >= b {
                return Err(bad());
            }
            Ok(a..b)
        }
        None => {
            let a = s.parse::<u64>().map_err(|_| bad())?;
            Ok(a..a.checked_add(1).ok_or_else(bad)?)
        }
    }
}

/// Decorrelates the adversary's stream from the sampler's.
const ADVERSARY_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

fn one_stochastic_run(
    sc: &Scenario,
    game: &Game,
    target: &TargetSet,
    adv: &str,
    rounds: usize,
    seed: u64,
) -> Result<Vec<SampledRound>> {
    let mut x = GStar::new(target.clone(), sc.tolerance_schedule(game));
    let mut y = build_agent(adv, Player::Y, sc, game, target, seed ^ ADVERSARY_STREAM)?;
    Ok(run_stochastic(
        game,
        target,
        &mut x,
        y.as_mut(),
        rounds,
        Order::XFirst,
        &SeededSource::new(seed),
    )?
    .0)
}

/// Independent seeded runs of 𝔤* against the adversary, then the deviation audit
/// at the Hoeffding horizon.
pub fn stochastic_run(out: &Output, a: &StochasticArgs) -> Result<RunReport> {
    let started = Instant::now();
    if a.rounds == 0 {
        return Err(Error::NonPositiveInput("rounds"));
    }
    let (sc, game) = load_scenario(&a.scenario)?;
    let game = game.with_mode(GameMode::Mixed);
    let target = sc.target(a.target.as_deref())?.clone();
    let adv = a
        .adversary
        .clone()
        .or_else(|| sc.bindings.adversary.clone())
        .unwrap_or("bestresponse".into());
    AgentSpec::parse(&adv)?;
    let horizon = hoeffding_horizon(a.epsilon, game.gamma(), game.dim())? as usize;
    let seeds: Vec<u64> = a.seeds.clone().collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(seeds.len())
        .max(1);
    let chunk = seeds.len().div_ceil(workers);
    let runs: Vec<Vec<SampledRound>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                let (sc, game, target, adv) = (&sc, &game, &target, &adv);
                scope.spawn(move || {
                    part.iter()
                        .map(|&s| one_stochastic_run(sc, game, target, adv, a.rounds, s))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect();

    let d = game.dim();
    let header: Vec<String> = ["run".to_string(), "t".to_string()]
        .into_iter()
        .chain(indexed("emp", d))
        .chain(indexed("exp", d))
        .chain(std::iter::once("emp_dev".to_string()))
        .collect();
    let mut csv = Csv::new(&header);
    for (seed, run) in seeds.iter().zip(&runs) {
        for r in run {
            let mut row = vec![seed.to_string(), r.t.to_string()];
            row.extend(r.empirical.0.iter().map(|v| num(*v)));
            row.extend(r.expected.0.iter().map(|v| num(*v)));
            row.push(num(r.deviation()));
            csv.row(&row);
        }
    }
    let audit_at = horizon.min(a.rounds);
    let audit = deviation_audit(&runs, a.epsilon, audit_at)?;
    let name = slug(&sc.name);
    let mut report = RunReport::new(&sc.name, "stochastic run", started);
    report.seeds = seeds;
    report
        .artifacts
        .push(out.write(&format!("stochastic_{name}.csv"), &csv.finish())?);
    report.artifacts.push(
        out.write(
            &format!("stochastic_{name}_audit.json"),
            &serde_json::to_string_pretty(&json!({ "hoeffding_horizon": horizon, "audit": audit }))
                .expect("json"),
        )?,
    );
    report.pass = audit.pass;
    report.outcome = format!(
        "deviation frequency {:.4} at n ≥ {audit_at} over {} runs (limit {:.4}){}",
        audit.frequency,
        audit.runs,
        audit.eps + audit.band,
        if audit_at < horizon {
            format!("; runs are shorter than the horizon {horizon}")
        } else {
            String::new()
        }
    );
    report.details = json!({ "hoeffding_horizon": horizon, "audit": audit });
    Ok(report.finish(started))
}
