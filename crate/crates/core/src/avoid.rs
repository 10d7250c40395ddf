//! The opponent's machinery: counterexample search on point clouds, the
//! shrinkage operator, onion peeling, the rind index, the escape drive and
//! the avoidance strategy 𝔥*.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcing::FORCE_TOL;
use crate::game::{Action, Game, GameMode};
use crate::geometry::{self, direction_grid, dist_sq, dot, PayoffHull, Point, TargetSet};
use crate::play::{Decision, Round, StepInfo, Strategy};

/// Default cloud resolution for sampling analytic targets.
pub const DEFAULT_H: f64 = 0.01;
/// Default stage budget.
pub const DEFAULT_MAX_STAGES: usize = 64;
/// Neighbors within this multiple of `h` constrain admissible normals.
pub const LINK_FACTOR: f64 = 1.5;

/// `ε(τ) = τ²(√(γ²+τ²) − γ) / (8(4γ²+τ²))`
pub fn epsilon_of_tau(tau: f64, gamma: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveInput("tau"));
    }
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveInput("gamma"));
    }
    let t2 = tau * tau;
    // √(γ²+τ²) − γ rewritten as τ²/(√(γ²+τ²) + γ) to avoid cancellation.
    let root_gap = t2 / ((gamma * gamma + t2).sqrt() + gamma);
    Ok(t2 * root_gap / (8.0 * (4.0 * gamma * gamma + t2)))
}

/// Hausdorff radius under which a counterexample of slack `τ` survives with
/// slack at least `τ/4`: `ε(τ/4)/2`.
pub fn robustness_radius(tau: f64, gamma: f64) -> Result<f64> {
    Ok(epsilon_of_tau(tau / 4.0, gamma)? / 2.0)
}

/// A halfspace-forcing counterexample `(φ, ψ, H)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub phi: Point,
    pub psi: Point,
    pub halfspace: geometry::Halfspace,
    /// `ρ(ψ, Hᶜ) = c − ⟨λ,ψ⟩`.
    pub tau: f64,
    /// Scalarized upper value `v(λ) > c`.
    pub value: f64,
    /// Scalarized lower value; 𝒴 can 1-force `Hᶜ` when it exceeds `c`.
    pub lower_value: f64,
    /// 𝒴's single forcing action, when `Hᶜ` is 1-forcible.
    pub y_witness: Option<Action>,
}

impl Counterexample {
    pub fn normal(&self) -> &[f64] {
        &self.halfspace.normal
    }

    /// `ρ(φ, S)` at the time of certification.
    pub fn radius(&self) -> f64 {
        self.phi.dist(&self.psi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScanMode {
    First,
    All,
    BestPerPsi,
}

/// Knobs for a counterexample scan.
#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Admissible `⟨λ, q − ψ⟩` for linked neighbors `q`.
    pub cone_tol: f64,
    /// Only consider `ψ` inside this ball.
    pub near: Option<(Point, f64)>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            cone_tol: 1e-12,
            near: None,
        }
    }
}

#[derive(Clone, Debug)]
struct DirectionValue {
    upper: f64,
    lower: f64,
    y: Action,
}

/// Counterexample search over a finite direction grid, with scalarized game
/// values cached per direction.
#[derive(Clone, Debug)]
pub struct CloudScanner {
    hull: PayoffHull,
    directions: Vec<Vec<f64>>,
    values: Vec<DirectionValue>,
    gamma: f64,
}

/// Direction grid for a game's payoff dimension (720 angles in the plane,
/// 2000 Fibonacci points in space, axes plus generator differences beyond).
pub fn default_directions(game: &Game) -> Vec<Vec<f64>> {
    let k = match game.dim() {
        2 => 720,
        3 => 2000,
        _ => 0,
    };
    direction_grid(game.dim(), k, &game.vertices())
}

impl CloudScanner {
    pub fn new(game: &Game, directions: Vec<Vec<f64>>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidGeometry("empty direction grid".into()));
        }
        let mut values = Vec::with_capacity(directions.len());
        for lam in &directions {
            if lam.len() != game.dim() {
                return Err(Error::DimensionMismatch {
                    expected: game.dim(),
                    got: lam.len(),
                });
            }
            let s = game.scalar_game(lam)?;
            values.push(DirectionValue {
                upper: s.upper,
                lower: s.lower,
                y: s.y,
            });
        }
        Ok(CloudScanner {
            hull: PayoffHull::new(game.vertices())?,
            directions,
            values,
            gamma: game.gamma(),
        })
    }

    pub fn for_game(game: &Game) -> Result<Self> {
        CloudScanner::new(game, default_directions(game))
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn scan(
        &self,
        points: &[Point],
        h: f64,
        tau: f64,
        opts: &ScanOptions,
        mode: ScanMode,
    ) -> Result<Vec<Counterexample>> {
        let link2 = (LINK_FACTOR * h).powi(2);
        let mut out: Vec<Counterexample> = Vec::new();
        for (pi, psi) in points.iter().enumerate() {
            if let Some((c, r)) = &opts.near {
                if psi.dist(c) > *r {
                    continue;
                }
            }
            let neighbors: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|(qi, q)| *qi != pi && dist_sq(&q.0, &psi.0) <= link2)
                .map(|(_, q)| q.sub(psi).0)
                .collect();
            let mut best: Option<Counterexample> = None;
            for (lam, val) in self.directions.iter().zip(&self.values) {
                let at_psi = dot(lam, &psi.0);
                let value_room = val.upper - at_psi - 2.0 * FORCE_TOL;
                if value_room < tau {
                    continue;
                }
                if neighbors.iter().any(|d| dot(lam, d) > opts.cone_tol) {
                    continue;
                }
                // Largest r keeping ψ the nearest cloud point to ψ + rλ.
                let mut r_max = f64::INFINITY;
                for q in points {
                    let diff: Vec<f64> = q.0.iter().zip(&psi.0).map(|(a, b)| a - b).collect();
                    let along = dot(lam, &diff);
                    if along > 0.0 {
                        r_max = r_max.min(dot(&diff, &diff) / (2.0 * along));
                    }
                }
                let Some((lo, hi)) = self.hull.ray_interval(psi, lam)? else {
                    continue;
                };
                let r = r_max.min(hi);
                if !(r > 0.0) || r < lo || !r.is_finite() {
                    continue;
                }
                let slack = value_room.min(r - 1e-12);
                if slack < tau {
                    continue;
                }
                let c = at_psi + slack;
                let ce = Counterexample {
                    phi: psi.offset(lam, r),
                    psi: psi.clone(),
                    halfspace: geometry::Halfspace {
                        normal: lam.clone(),
                        offset: c,
                    },
                    tau: slack,
                    value: val.upper,
                    lower_value: val.lower,
                    y_witness: (val.lower > c + FORCE_TOL).then(|| val.y.clone()),
                };
                match mode {
                    ScanMode::First => return Ok(vec![ce]),
                    ScanMode::All => out.push(ce),
                    ScanMode::BestPerPsi => {
                        if best.as_ref().is_none_or(|b| ce.tau > b.tau) {
                            best = Some(ce);
                        }
                    }
                }
            }
            if let Some(b) = best {
                out.push(b);
            }
        }
        Ok(out)
    }

    /// First counterexample with slack at least `τ` (ψ by cloud index, λ by grid index).
    pub fn find(
        &self,
        points: &[Point],
        h: f64,
        tau: f64,
        opts: &ScanOptions,
    ) -> Result<Option<Counterexample>> {
        Ok(self
            .scan(points, h, tau, opts, ScanMode::First)?
            .into_iter()
            .next())
    }

    /// Every `(ψ, λ)` counterexample with slack at least `τ`.
    pub fn find_all(
        &self,
        points: &[Point],
        h: f64,
        tau: f64,
        opts: &ScanOptions,
    ) -> Result<Vec<Counterexample>> {
        self.scan(points, h, tau, opts, ScanMode::All)
    }

    /// `𝒱_τ`: drops every cloud point strictly within `ε(τ)` of a certified `ψ`.
    /// Returns the surviving cloud and one maximal-slack certificate per removed center.
    pub fn shrink(
        &self,
        points: &[Point],
        h: f64,
        tau: f64,
    ) -> Result<(Vec<Point>, Vec<Counterexample>)> {
        let certs = self.scan(
            points,
            h,
            tau,
            &ScanOptions::default(),
            ScanMode::BestPerPsi,
        )?;
        let eps = epsilon_of_tau(tau, self.gamma)?;
        let kept = points
            .iter()
            .filter(|p| certs.iter().all(|c| p.dist(&c.psi) >= eps))
            .cloned()
            .collect();
        Ok((kept, certs))
    }
}

/// Cloud and resolution used for `set`: clouds as given, analytic sets sampled at `h`.
pub fn cloud_of(set: &TargetSet, h: f64) -> Result<(Vec<Point>, f64)> {
    set.validate()?;
    match set {
        TargetSet::Cloud { points, h: hc } => {
            let mut pts = points.clone();
            pts.sort_by(|a, b| a.lex_cmp(b));
            pts.dedup_by(|a, b| a.dist(b) <= 1e-12);
            Ok((pts, *hc))
        }
        _ => Ok((set.to_cloud(h)?, h.max(set.resolution()))),
    }
}

/// First counterexample for `set` under the default scan.
pub fn find_counterexample(
    game: &Game,
    set: &TargetSet,
    tau: f64,
    directions: Vec<Vec<f64>>,
) -> Result<Option<Counterexample>> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveInput("tau"));
    }
    let (pts, h) = cloud_of(set, DEFAULT_H)?;
    CloudScanner::new(game, directions)?.find(&pts, h, tau, &ScanOptions::default())
}

/// `(𝒱_τ(S), certificates)` for a point cloud.
pub fn shrink(
    game: &Game,
    points: &[Point],
    h: f64,
    tau: f64,
) -> Result<(Vec<Point>, Vec<Counterexample>)> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveInput("tau"));
    }
    CloudScanner::for_game(game)?.shrink(points, h, tau)
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    /// The cloud `Sᵢ`.
    pub points: Vec<Point>,
    /// `1/(i+1)`, the tolerance applied to obtain `Sᵢ₊₁`.
    pub tolerance: f64,
    pub removed: usize,
    pub certificates: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `S_N = ∅`.
    Empty { n: usize },
    /// Stabilized cloud with no counterexample of slack at least `residual_tau`.
    ASetApprox { residual_tau: f64, core_size: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct OnionDecomposition {
    pub stages: Vec<Stage>,
    pub h: f64,
    pub gamma: f64,
    pub classification: Classification,
    /// `δ(S) = ε(1/N)`, zero unless empty.
    pub delta: f64,
    /// `T(S) = ⌈8/δ(S)⌉`, `None` for infinity.
    pub horizon: Option<u64>,
    /// Stabilized core `S_∞` when classified as an A-set.
    pub core: Vec<Point>,
}

/// `ℐ_S(φ)`: `Outside` is −1, `Core` is ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RindIndex {
    Outside,
    Stage(usize),
    Core,
}

impl RindIndex {
    pub fn as_i64(self) -> i64 {
        match self {
            RindIndex::Outside => -1,
            RindIndex::Stage(i) => i as i64,
            RindIndex::Core => i64::MAX,
        }
    }
}

impl std::fmt::Display for RindIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RindIndex::Outside => write!(f, "-1"),
            RindIndex::Stage(i) => write!(f, "{i}"),
            RindIndex::Core => write!(f, "inf"),
        }
    }
}

fn cloud_distance(points: &[Point], phi: &Point) -> f64 {
    points
        .iter()
        .map(|p| dist_sq(&p.0, &phi.0))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

impl OnionDecomposition {
    pub fn is_empty_class(&self) -> bool {
        matches!(self.classification, Classification::Empty { .. })
    }

    pub fn rind_index(&self, phi: &Point) -> RindIndex {
        if !self.is_empty_class() {
            return RindIndex::Core;
        }
        let mut idx = RindIndex::Outside;
        for (i, st) in self.stages.iter().enumerate() {
            if !st.points.is_empty() && cloud_distance(&st.points, phi) <= self.delta {
                idx = RindIndex::Stage(i);
            }
        }
        idx
    }

    /// Hausdorff distances between consecutive nonempty stages.
    pub fn stage_distances(&self) -> Result<Vec<f64>> {
        self.stages
            .windows(2)
            .filter(|w| !w[1].points.is_empty())
            .map(|w| geometry::hausdorff_clouds(&w[0].points, &w[1].points))
            .collect()
    }

    pub fn certificates(&self) -> impl Iterator<Item = (usize, &Counterexample)> {
        self.stages
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.certificates.iter().map(move |c| (i, c)))
    }
}

#[derive(Clone, Debug)]
pub struct PeelOptions {
    pub max_stages: usize,
    /// Sampling resolution for analytic targets.
    pub h: f64,
    /// Direction grid; `None` picks [`default_directions`].
    pub directions: Option<Vec<Vec<f64>>>,
}

impl Default for PeelOptions {
    fn default() -> Self {
        PeelOptions {
            max_stages: DEFAULT_MAX_STAGES,
            h: DEFAULT_H,
            directions: None,
        }
    }
}

/// Iterates `Sᵢ₊₁ = 𝒱_{1/(i+1)}(Sᵢ)`.
///
/// Stops when a stage empties the cloud, or when a stage removes nothing and a
/// sweep at `τ_min = 1/(max_stages+1)` finds no counterexample: every later
/// tolerance is at least `τ_min`, so no later stage could remove anything.
pub fn peel(game: &Game, set: &TargetSet, opts: &PeelOptions) -> Result<OnionDecomposition> {
    if opts.max_stages == 0 {
        return Err(Error::NonPositiveInput("stage budget"));
    }
    let (mut cur, h) = cloud_of(set, opts.h)?;
    if cur.first().map_or(0, Point::dim) != game.dim() {
        return Err(Error::DimensionMismatch {
            expected: game.dim(),
            got: set.dim(),
        });
    }
    let scanner = match &opts.directions {
        Some(d) => CloudScanner::new(game, d.clone())?,
        None => CloudScanner::for_game(game)?,
    };
    let gamma = game.gamma();
    let tau_min = 1.0 / (opts.max_stages as f64 + 1.0);
    let mut stages = Vec::new();
    for i in 0..opts.max_stages {
        let tau = 1.0 / (i as f64 + 1.0);
        let (next, certs) = scanner.shrink(&cur, h, tau)?;
        let removed = cur.len() - next.len();
        log::debug!(
            "stage {i}: tau={tau:.4} removed={removed} remaining={}",
            next.len()
        );
        stages.push(Stage {
            points: std::mem::take(&mut cur),
            tolerance: tau,
            removed,
            certificates: certs,
        });
        if next.is_empty() {
            let n = i + 1;
            let delta = epsilon_of_tau(1.0 / n as f64, gamma)?;
            return Ok(OnionDecomposition {
                stages,
                h,
                gamma,
                classification: Classification::Empty { n },
                delta,
                horizon: Some((8.0 / delta).ceil() as u64),
                core: Vec::new(),
            });
        }
        cur = next;
        if removed == 0
            && scanner
                .find(&cur, h, tau_min, &ScanOptions::default())?
                .is_none()
        {
            return Ok(a_set_decomposition(stages, cur, h, gamma, tau_min));
        }
    }
    if scanner
        .find(&cur, h, tau_min, &ScanOptions::default())?
        .is_none()
    {
        return Ok(a_set_decomposition(stages, cur, h, gamma, tau_min));
    }
    Err(Error::StageBudgetExceeded(Box::new(OnionDecomposition {
        stages,
        h,
        gamma,
        classification: Classification::ASetApprox {
            residual_tau: tau_min,
            core_size: cur.len(),
        },
        delta: 0.0,
        horizon: None,
        core: cur,
    })))
}

fn a_set_decomposition(
    stages: Vec<Stage>,
    core: Vec<Point>,
    h: f64,
    gamma: f64,
    tau_min: f64,
) -> OnionDecomposition {
    OnionDecomposition {
        stages,
        h,
        gamma,
        classification: Classification::ASetApprox {
            residual_tau: tau_min,
            core_size: core.len(),
        },
        delta: 0.0,
        horizon: None,
        core,
    }
}

/// Result of one escape drive.
#[derive(Clone, Debug, Serialize)]
pub struct DriveOutcome {
    pub y_actions: Vec<Action>,
    /// Rounds used.
    pub m: u64,
    /// `ε(τ)` of the certificate.
    pub eps: f64,
    /// `ρ(φ, S)` at certification.
    pub radius: f64,
    /// `ρ(φ, q_M)`.
    pub final_distance: f64,
    /// `⌈Tγε/8⌉`, the round bound as stated for the drive.
    pub stated_bound: u64,
    /// `⌈8Tγ/ε⌉`, the round count the partial-average argument needs.
    pub cap: u64,
}

impl DriveOutcome {
    pub fn decrease(&self) -> f64 {
        self.radius - self.final_distance
    }
}

/// `⌈Tγε/8⌉`
pub fn stated_drive_bound(t0: u64, gamma: f64, eps: f64) -> u64 {
    (t0 as f64 * gamma * eps / 8.0).ceil() as u64
}

/// `⌈8Tγ/ε⌉`
pub fn drive_cap(t0: u64, gamma: f64, eps: f64) -> u64 {
    (8.0 * t0 as f64 * gamma / eps).ceil() as u64
}

/// 𝒴's drive action against `x` for a certificate: the 1-forcing witness when
/// there is one, otherwise a best response along the normal.
pub fn drive_action(game: &Game, ce: &Counterexample, x: Option<&Action>) -> Result<Action> {
    if let Some(y) = &ce.y_witness {
        return Ok(y.clone());
    }
    let fallback = game.fallback_x();
    let x = x.unwrap_or(&fallback);
    Ok(Action::Pure(game.best_response(x, ce.normal())?.0))
}

/// Drives the average `(T·p + Σ f(xᵢ,yᵢ))/(T+M)` into `B(φ, ρ(φ,S) − ε)`.
///
/// `xs(i)` supplies 𝒳's `i`-th move (1-based). Fails with `DriveOverrun` past
/// `⌈8Tγ/ε⌉` rounds; the stated bound is reported alongside.
pub fn antiforce_drive(
    game: &Game,
    ce: &Counterexample,
    p: &Point,
    t0: u64,
    xs: &mut dyn FnMut(u64) -> Result<Action>,
) -> Result<DriveOutcome> {
    let gamma = game.gamma();
    let eps = epsilon_of_tau(ce.tau, gamma)?;
    if p.dist(&ce.psi) > 2.0 * eps * (1.0 + 1e-12) {
        return Err(Error::DrivePrecondition(format!(
            "start point is {} from the center, above 2ε = {}",
            p.dist(&ce.psi),
            2.0 * eps
        )));
    }
    let min_t = (8.0 / eps).ceil() as u64;
    if t0 < min_t {
        return Err(Error::DrivePrecondition(format!(
            "T = {t0} below ⌈8/ε⌉ = {min_t}"
        )));
    }
    let radius = ce.radius();
    let goal = radius - eps;
    let cap = drive_cap(t0, gamma, eps);
    let stated_bound = stated_drive_bound(t0, gamma, eps);
    let tf = t0 as f64;
    let mut sum: Vec<f64> = p.0.iter().map(|v| v * tf).collect();
    let mut y_actions = Vec::new();
    let mut m = 0u64;
    loop {
        m += 1;
        if m > cap {
            return Err(Error::DriveOverrun {
                rounds: m as usize,
                cap: cap as usize,
            });
        }
        let x = xs(m)?;
        let y = drive_action(game, ce, Some(&x))?;
        let z = game.payoff(&x, &y)?;
        y_actions.push(y);
        for (s, v) in sum.iter_mut().zip(&z.0) {
            *s += v;
        }
        let denom = tf + m as f64;
        let q: Vec<f64> = sum.iter().map(|s| s / denom).collect();
        let d = geometry::dist(&q, &ce.phi.0);
        if d <= goal {
            return Ok(DriveOutcome {
                y_actions,
                m,
                eps,
                radius,
                final_distance: d,
                stated_bound,
                cap,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HStarEvent {
    DriveStart {
        t: usize,
        stage: usize,
        psi: Point,
        tau: f64,
    },
    DriveComplete {
        t: usize,
        rounds: u64,
    },
    CertificateMiss {
        t: usize,
        index: i64,
    },
    DriveOverrun {
        t: usize,
        rounds: u64,
        cap: u64,
    },
}

#[derive(Clone, Debug)]
struct ActiveDrive {
    cert: Counterexample,
    rounds: u64,
    eps: f64,
    cap: u64,
    done: bool,
}

/// The avoidance strategy 𝔥* built from an onion decomposition.
pub struct HStar {
    dec: OnionDecomposition,
    drive: Option<ActiveDrive>,
    pub events: Vec<HStarEvent>,
}

impl HStar {
    pub fn new(dec: OnionDecomposition) -> Self {
        HStar {
            dec,
            drive: None,
            events: Vec::new(),
        }
    }

    pub fn decomposition(&self) -> &OnionDecomposition {
        &self.dec
    }

    fn select(&self, phi: &Point, cur: usize, prev: usize) -> Option<(usize, Counterexample)> {
        let reach = 2.0 * epsilon_of_tau(1.0 / (cur as f64 + 1.0), self.dec.gamma).ok()?;
        let need = 1.0 / (prev as f64 + 1.0);
        self.dec
            .certificates()
            .filter(|(_, c)| c.tau >= need && phi.dist(&c.psi) <= reach)
            .min_by(|a, b| {
                (a.0 != cur, phi.dist(&a.1.psi))
                    .partial_cmp(&(b.0 != cur, phi.dist(&b.1.psi)))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, c)| (i, c.clone()))
    }
}

impl Strategy for HStar {
    fn act(&mut self, game: &Game, history: &[Round], seen: Option<&Action>) -> Result<Decision> {
        let t = history.len();
        let arbitrary = |rind| Decision {
            action: game.fallback_y(),
            info: StepInfo {
                rind,
                ..StepInfo::default()
            },
        };
        let Some(horizon) = self.dec.horizon else {
            return Ok(arbitrary(Some(RindIndex::Core)));
        };
        let horizon = horizon as usize;
        if t < horizon || t == 0 {
            return Ok(arbitrary(None));
        }
        let phi = &history[t - 1].phi;
        let cur = self.dec.rind_index(phi);
        let prev = if t >= 2 {
            self.dec.rind_index(&history[t - 2].phi)
        } else {
            cur
        };
        let mut drive_start = false;

        if t == horizon || cur != prev || self.drive.is_none() {
            match cur {
                RindIndex::Stage(j) => {
                    let k = match prev {
                        RindIndex::Stage(k) => k,
                        _ => j,
                    };
                    match self.select(phi, j, k) {
                        Some((stage, cert)) => {
                            let eps = epsilon_of_tau(cert.tau, self.dec.gamma)?;
                            let cap = drive_cap(t as u64, self.dec.gamma, eps);
                            self.events.push(HStarEvent::DriveStart {
                                t: t + 1,
                                stage,
                                psi: cert.psi.clone(),
                                tau: cert.tau,
                            });
                            self.drive = Some(ActiveDrive {
                                cert,
                                rounds: 0,
                                eps,
                                cap,
                                done: false,
                            });
                            drive_start = true;
                        }
                        None => {
                            log::debug!(
                                "round {}: no certificate near iterate at index {j}",
                                t + 1
                            );
                            self.events.push(HStarEvent::CertificateMiss {
                                t: t + 1,
                                index: j as i64,
                            });
                        }
                    }
                }
                RindIndex::Outside => self.drive = None,
                RindIndex::Core => {}
            }
        }

        let Some(drive) = self.drive.as_mut() else {
            return Ok(arbitrary(Some(cur)));
        };
        if drive.rounds > 0
            && !drive.done
            && phi.dist(&drive.cert.phi) <= drive.cert.radius() - drive.eps
        {
            drive.done = true;
            self.events.push(HStarEvent::DriveComplete {
                t,
                rounds: drive.rounds,
            });
        }
        drive.rounds += 1;
        if drive.rounds == drive.cap + 1 {
            self.events.push(HStarEvent::DriveOverrun {
                t: t + 1,
                rounds: drive.rounds,
                cap: drive.cap,
            });
        }
        let action = drive_action(game, &drive.cert, seen)?;
        Ok(Decision {
            action,
            info: StepInfo {
                rind: Some(cur),
                drive_start,
                ..StepInfo::default()
            },
        })
    }

    fn name(&self) -> &str {
        "hstar"
    }
}

/// Outcome of the approachability/avoidability decision.
#[derive(Clone, Debug)]
pub enum Verdict {
    Approachable(OnionDecomposition),
    Avoidable(OnionDecomposition),
    /// Pure game without the minimax property; `gap` is the largest
    /// `min max − max min` over the direction grid.
    Undecided {
        gap: f64,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Approachable(_) => "Approachable",
            Verdict::Avoidable(_) => "Avoidable",
            Verdict::Undecided { .. } => "Undecided",
        }
    }
}

/// Decides whether `set` is approachable (play 𝔤*) or avoidable (play 𝔥*).
///
/// The dichotomy needs the minimax property; pure games whose scalarizations
/// have a positive gap are reported as undecided.
pub fn classify(game: &Game, set: &TargetSet, opts: &PeelOptions) -> Result<Verdict> {
    if game.mode() == GameMode::Pure {
        let dirs = opts
            .directions
            .clone()
            .unwrap_or_else(|| default_directions(game));
        let mut gap = 0.0f64;
        for lam in &dirs {
            gap = gap.max(game.minimax_gap(lam)?);
        }
        if gap > FORCE_TOL {
            return Ok(Verdict::Undecided { gap });
        }
    }
    let dec = peel(game, set, opts)?;
    Ok(match dec.classification {
        Classification::Empty { .. } => Verdict::Avoidable(dec),
        Classification::ASetApprox { .. } => Verdict::Approachable(dec),
    })
}
