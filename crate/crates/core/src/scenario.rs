//! Synthetic scenarios: environment generation from a spec, scripted oracle
//! demonstrators and the four-trial comparison protocol.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{Environment, Zod};
use crate::error::{Error, Result};
use crate::eval::{mhd_with, MhdMode, TrialMetric, MHD_STEP_M};
use crate::features::{blur_layer, BinaryLayer, FeatureSchema, LayerKind};
use crate::geometry::{Cell, GridGeometry, Point};
use crate::irl::{reward_map, BehaviorModel, DemoRecord, DemoSource, Demonstration, DEFAULT_DEMO_MARGIN};
use crate::planner::{densify, plan_baseline_cells, plan_ioc_cells, shortest_path, BaselineParams, GridPath, Provenance, Trajectory};

/// The scripted behaviors an oracle can demonstrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Behavior {
    EdgeOfRoad,
    Covert,
    ZodAvoidance,
}

impl Behavior {
    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::EdgeOfRoad => "edge-of-road",
            Behavior::Covert => "covert",
            Behavior::ZodAvoidance => "zod-avoidance",
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "edge-of-road" | "edge" => Behavior::EdgeOfRoad,
            "covert" => Behavior::Covert,
            "zod-avoidance" | "zod" => Behavior::ZodAvoidance,
            _ => return Err(Error::InvalidScenario(format!("unknown behavior `{s}`"))),
        })
    }
}

/// Road centerline polyline and its full width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadSpec {
    pub points: Vec<Point>,
    pub width_m: f64,
}

/// Axis-aligned building footprint in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    pub x0_m: f64,
    pub y0_m: f64,
    pub x1_m: f64,
    pub y1_m: f64,
}

impl BuildingSpec {
    fn contains(&self, p: Point) -> bool {
        p.x >= self.x0_m.min(self.x1_m)
            && p.x <= self.x0_m.max(self.x1_m)
            && p.y >= self.y0_m.min(self.y1_m)
            && p.y <= self.y0_m.max(self.y1_m)
    }
}

/// Named initial/goal waypoint pair `(i, g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointPair {
    pub site: String,
    pub i: Point,
    pub g: Point,
}

impl WaypointPair {
    pub fn new(site: impl Into<String>, i: Point, g: Point) -> Self {
        Self { site: site.into(), i, g }
    }
}

/// Everything needed to regenerate a synthetic site and run trials on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub seed: u64,
    pub geometry: GridGeometry,
    #[serde(default)]
    pub roads: Vec<RoadSpec>,
    #[serde(default)]
    pub buildings: Vec<BuildingSpec>,
    #[serde(default)]
    pub zods: Vec<Zod>,
    pub behavior: Behavior,
    #[serde(default)]
    pub label_noise: f64,
    /// Evaluation sites.
    pub waypoints: Vec<WaypointPair>,
    /// Pairs the oracle demonstrates for training.
    #[serde(default)]
    pub training_pairs: Vec<WaypointPair>,
    /// Use only the first `k` trials of the protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(0.0..1.0).contains(&self.label_noise) {
            return Err(Error::InvalidScenario(format!("label noise must be in [0, 1), got {}", self.label_noise)));
        }
        for z in &self.zods {
            z.validate()?;
        }
        let (x0, y0) = (self.geometry.origin_x, self.geometry.origin_y);
        let x1 = x0 + self.geometry.width as f64 * self.geometry.resolution;
        let y1 = y0 + self.geometry.height as f64 * self.geometry.resolution;
        let inside = |p: Point| p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
        for r in &self.roads {
            if r.points.is_empty() || !(r.width_m > 0.0) {
                return Err(Error::InvalidScenario("roads need points and a positive width".into()));
            }
            if !r.points.iter().all(|p| inside(*p)) {
                return Err(Error::InvalidScenario("road leaves the map".into()));
            }
        }
        for b in &self.buildings {
            if !inside(Point::new(b.x0_m, b.y0_m)) || !inside(Point::new(b.x1_m, b.y1_m)) {
                return Err(Error::InvalidScenario("building leaves the map".into()));
            }
        }
        if let Some(k) = self.trials {
            if !(1..=4).contains(&k) {
                return Err(Error::InvalidScenario(format!("trial count must be 1..=4, got {k}")));
            }
        }
        for w in self.waypoints.iter().chain(&self.training_pairs) {
            for p in [w.i, w.g] {
                self.geometry.checked_index(self.geometry.cell_of(p))?;
                if self.buildings.iter().any(|b| b.contains(p)) {
                    return Err(Error::InvalidScenario(format!(
                        "waypoint ({}, {}) of `{}` is inside a building",
                        p.x, p.y, w.site
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn cell(&self, p: Point) -> Cell {
        self.geometry.cell_of(p)
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

fn on_road(road: &RoadSpec, p: Point) -> bool {
    let half = road.width_m / 2.0;
    if road.points.len() == 1 {
        return p.distance(road.points[0]) <= half;
    }
    road.points.windows(2).any(|w| segment_distance(p, w[0], w[1]) <= half)
}

/// Rasterize a spec. Buildings override roads; grass fills the rest; label
/// noise swaps road and grass labels of free cells independently.
pub fn generate_environment(spec: &ScenarioSpec) -> Result<Environment> {
    spec.validate()?;
    let g = spec.geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = g.len();
    let mut obstacle = vec![0u8; n];
    let mut road = vec![0u8; n];
    let mut grass = vec![0u8; n];
    for i in 0..n {
        let p = g.center_of(g.cell(i));
        if spec.buildings.iter().any(|b| b.contains(p)) {
            obstacle[i] = 1;
            continue;
        }
        let mut is_road = spec.roads.iter().any(|r| on_road(r, p));
        if spec.label_noise > 0.0 && rng.gen::<f64>() < spec.label_noise {
            is_road = !is_road;
        }
        if is_road {
            road[i] = 1;
        } else {
            grass[i] = 1;
        }
    }
    let layers = vec![
        BinaryLayer::new(LayerKind::Obstacle, g, obstacle)?,
        BinaryLayer::new(LayerKind::Road, g, road)?,
        BinaryLayer::new(LayerKind::Grass, g, grass)?,
    ];
    Environment::new(spec.seed, layers, spec.zods.clone(), None)
}

/// Oracle cost constants.
pub const EDGE_ROAD_COST: f64 = 1.0;
pub const EDGE_ROAD_EDGE_COST: f64 = 0.5;
pub const EDGE_GRASS_COST: f64 = 8.0;
pub const ZOD_GRASS_COST: f64 = 3.0;
pub const COVERT_BLUR_RADIUS: u32 = 5;
pub const COVERT_WEIGHT: f64 = 4.0;

/// Road cells with a grass cell among their eight neighbors.
pub fn road_edge_cells(env: &Environment) -> Vec<bool> {
    let g = *env.geometry();
    let road = env.layer(LayerKind::Road);
    let grass = env.layer(LayerKind::Grass);
    (0..g.len())
        .map(|i| {
            let c = g.cell(i);
            road.cells()[i] == 1 && g.neighbors(c).any(|(_, n)| grass.get(n) == Some(true))
        })
        .collect()
}

/// Per-cell entry costs of the scripted demonstrator; `None` is impassable.
pub fn behavior_costs(env: &Environment, behavior: Behavior) -> Result<Vec<Option<f64>>> {
    let g = *env.geometry();
    let obstacle = env.layer(LayerKind::Obstacle).cells();
    let road = env.layer(LayerKind::Road).cells();
    let avoid = env.layer(LayerKind::Avoidance).cells();
    let costs = match behavior {
        Behavior::EdgeOfRoad | Behavior::ZodAvoidance => {
            let edge = road_edge_cells(env);
            let zod = behavior == Behavior::ZodAvoidance;
            (0..g.len())
                .map(|i| {
                    if obstacle[i] == 1 || (zod && avoid[i] == 1) {
                        None
                    } else if road[i] == 1 {
                        Some(if edge[i] { EDGE_ROAD_EDGE_COST } else { EDGE_ROAD_COST })
                    } else {
                        Some(if zod { ZOD_GRASS_COST } else { EDGE_GRASS_COST })
                    }
                })
                .collect()
        }
        Behavior::Covert => {
            let blur = blur_layer(env.layer(LayerKind::Obstacle), COVERT_BLUR_RADIUS)?;
            (0..g.len())
                .map(|i| (obstacle[i] == 0).then(|| 1.0 + COVERT_WEIGHT * (1.0 - blur[i])))
                .collect()
        }
    };
    Ok(costs)
}

/// The scripted demonstrator's path from `i` to `g`.
pub fn oracle_path(env: &Environment, behavior: Behavior, i: Cell, g: Cell) -> Result<GridPath> {
    shortest_path(env.geometry(), &behavior_costs(env, behavior)?, i, g)
}

/// Oracle demonstration captured for persistence.
pub fn oracle_record(env: &Environment, behavior: Behavior, i: Cell, g: Cell, id: impl Into<String>) -> Result<DemoRecord> {
    let path = oracle_path(env, behavior, i, g)?;
    DemoRecord::capture(env, id, &path.cells, DEFAULT_DEMO_MARGIN, DemoSource::Oracle)
}

/// Oracle demonstration bound to `schema`.
pub fn oracle_demonstrate(
    env: &Environment,
    behavior: Behavior,
    i: Cell,
    g: Cell,
    schema: &FeatureSchema,
    id: impl Into<String>,
) -> Result<Demonstration> {
    oracle_record(env, behavior, i, g, id)?.bind(schema)
}

/// Oracle demonstrations for every training pair of a spec.
pub fn training_demonstrations(spec: &ScenarioSpec, env: &Environment, schema: &FeatureSchema) -> Result<Vec<Demonstration>> {
    spec.training_pairs
        .iter()
        .map(|p| {
            oracle_demonstrate(
                env,
                spec.behavior,
                spec.cell(p.i),
                spec.cell(p.g),
                schema,
                format!("{}/{}", spec.name, p.site),
            )
        })
        .collect()
}

/// Whether removing avoidance cells disconnects `i` from `g` within road cells.
pub fn zod_blocks_road(env: &Environment, i: Cell, g: Cell) -> bool {
    let geo = env.geometry();
    let road = env.layer(LayerKind::Road).cells();
    let avoid = env.layer(LayerKind::Avoidance).cells();
    let connected = |allow: &dyn Fn(usize) -> bool| {
        let costs: Vec<Option<f64>> = (0..geo.len()).map(|k| allow(k).then_some(1.0)).collect();
        shortest_path(geo, &costs, i, g).is_ok()
    };
    connected(&|k| road[k] == 1) && !connected(&|k| road[k] == 1 && avoid[k] == 0)
}

/// One leg of a trial: which planner runs and in which direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLeg {
    pub provenance: Provenance,
    /// `true` for `i → g`.
    pub forward: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub legs: [TrialLeg; 3],
}

/// The four-trial alternation of planners and directions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: Vec<TrialRecord>,
}

impl TrialPlan {
    pub fn standard() -> Self {
        use Provenance::{Baseline, GroundTruth, Ioc};
        let leg = |provenance, forward| TrialLeg { provenance, forward };
        let t = |trial, legs| TrialRecord { trial, legs };
        TrialPlan {
            trials: vec![
                t(1, [leg(GroundTruth, true), leg(Ioc, false), leg(Baseline, true)]),
                t(2, [leg(GroundTruth, false), leg(Ioc, true), leg(Baseline, false)]),
                t(3, [leg(GroundTruth, true), leg(Baseline, false), leg(Ioc, true)]),
                t(4, [leg(GroundTruth, false), leg(Baseline, true), leg(Ioc, false)]),
            ],
        }
    }

    /// First `k` trials of the standard plan.
    pub fn first(k: usize) -> Result<Self> {
        if !(1..=4).contains(&k) {
            return Err(Error::InvalidScenario(format!("trial count must be 1..=4, got {k}")));
        }
        let mut p = Self::standard();
        p.trials.truncate(k);
        Ok(p)
    }
}

/// Trial execution settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOptions {
    pub baseline: BaselineParams,
    pub resample_step_m: f64,
    pub mode: MhdMode,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            baseline: BaselineParams::default(),
            resample_step_m: MHD_STEP_M,
            mode: MhdMode::Directed,
        }
    }
}

/// One executed (or failed) leg.
#[derive(Clone, Debug, PartialEq)]
pub struct LegResult {
    pub site: String,
    pub trial: usize,
    pub order: usize,
    pub provenance: Provenance,
    pub from: Point,
    pub to: Point,
    /// Densified trajectory, absent when planning failed.
    pub trajectory: Option<Trajectory>,
    pub cells: Vec<Cell>,
    /// Against this trial's ground truth; absent for ground truth itself.
    pub mhd_m: Option<f64>,
    pub error: Option<String>,
}

impl LegResult {
    pub fn file_name(&self) -> String {
        format!("{}_t{}_{}_{}.csv", sanitize(&self.site), self.trial, self.order, self.provenance)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub scenario: String,
    pub behavior: Behavior,
    pub seed: u64,
    pub schema: FeatureSchema,
    pub resample_step_m: f64,
    pub mode: MhdMode,
    pub plan: TrialPlan,
    pub legs: Vec<LegResult>,
    pub metrics: Vec<TrialMetric>,
}

#[derive(Serialize, Deserialize)]
struct LegManifest {
    site: String,
    trial: usize,
    order: usize,
    provenance: Provenance,
    from: Point,
    to: Point,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mhd_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ReportManifest {
    scenario: String,
    behavior: Behavior,
    seed: u64,
    schema: FeatureSchema,
    resample_step_m: f64,
    mhd_mode: MhdMode,
    plan: TrialPlan,
    legs: Vec<LegManifest>,
}

impl TrialReport {
    /// Metrics for one planner at one site.
    pub fn mhds(&self, site: &str, planner: Provenance) -> Vec<f64> {
        self.metrics
            .iter()
            .filter(|m| m.site == site && m.planner == planner.as_str())
            .map(|m| m.mhd_m)
            .collect()
    }

    pub fn mean_mhd(&self, site: &str, planner: Provenance) -> Option<f64> {
        let v = self.mhds(site, planner);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn legs_for(&self, site: &str, planner: Provenance) -> impl Iterator<Item = &LegResult> {
        let site = site.to_string();
        self.legs
            .iter()
            .filter(move |l| l.site == site && l.provenance == planner)
    }

    pub fn manifest_json(&self) -> Result<String> {
        let m = ReportManifest {
            scenario: self.scenario.clone(),
            behavior: self.behavior,
            seed: self.seed,
            schema: self.schema.clone(),
            resample_step_m: self.resample_step_m,
            mhd_mode: self.mode,
            plan: self.plan.clone(),
            legs: self
                .legs
                .iter()
                .map(|l| LegManifest {
                    site: l.site.clone(),
                    trial: l.trial,
                    order: l.order,
                    provenance: l.provenance,
                    from: l.from,
                    to: l.to,
                    file: l.trajectory.as_ref().map(|_| format!("trajectories/{}", l.file_name())),
                    mhd_m: l.mhd_m,
                    error: l.error.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        Ok(s)
    }

    /// `manifest.json`, `metrics.csv` and one CSV per trajectory.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let traj = dir.join("trajectories");
        std::fs::create_dir_all(&traj)?;
        std::fs::write(dir.join("manifest.json"), self.manifest_json()?)?;
        std::fs::write(dir.join("metrics.csv"), crate::eval::metrics_csv(&self.metrics))?;
        for l in &self.legs {
            if let Some(t) = &l.trajectory {
                t.save_csv(&traj.join(l.file_name()))?;
            }
        }
        Ok(())
    }

    /// Metric rows of a report directory.
    pub fn read_metrics(dir: &Path) -> Result<Vec<TrialMetric>> {
        crate::eval::parse_metrics_csv(&std::fs::read_to_string(dir.join("metrics.csv"))?)
    }
}

/// Run the trial protocol at every site of `spec` over `env`.
pub fn run_trials(spec: &ScenarioSpec, env: &Environment, model: &BehaviorModel, options: &TrialOptions) -> Result<TrialReport> {
    let plan = match spec.trials {
        Some(k) => TrialPlan::first(k)?,
        None => TrialPlan::standard(),
    };
    let stack = env.stack(&model.schema)?;
    let reward = reward_map(model, &stack)?;
    let opacity = env.opacity();
    let geo = *env.geometry();
    let mut legs = Vec::new();
    let mut metrics = Vec::new();
    for site in &spec.waypoints {
        let (ci, cg) = (geo.cell_of(site.i), geo.cell_of(site.g));
        for record in &plan.trials {
            let mut gt: Option<Trajectory> = None;
            for (k, leg) in record.legs.iter().enumerate() {
                let (from, to) = if leg.forward { (ci, cg) } else { (cg, ci) };
                let planned = match leg.provenance {
                    Provenance::GroundTruth | Provenance::Oracle => oracle_path(env, spec.behavior, from, to),
                    Provenance::Ioc => plan_ioc_cells(&reward, from, to),
                    Provenance::Baseline => plan_baseline_cells(&opacity, from, to, &options.baseline),
                };
                let mut result = LegResult {
                    site: site.site.clone(),
                    trial: record.trial,
                    order: k + 1,
                    provenance: leg.provenance,
                    from: geo.center_of(from),
                    to: geo.center_of(to),
                    trajectory: None,
                    cells: Vec::new(),
                    mhd_m: None,
                    error: None,
                };
                match planned.and_then(|p| {
                    let t = Trajectory::from_cells(&geo, &p.cells, leg.provenance)?;
                    Ok((p.cells, densify(&t, options.resample_step_m)?))
                }) {
                    Ok((cells, t)) => {
                        if leg.provenance == Provenance::GroundTruth {
                            gt = Some(t.clone());
                        } else if let Some(reference) = &gt {
                            let d = mhd_with(&t, reference, options.mode)?;
                            result.mhd_m = Some(d);
                            metrics.push(TrialMetric {
                                site: site.site.clone(),
                                planner: leg.provenance.as_str().to_string(),
                                trial: record.trial,
                                mhd_m: d,
                            });
                        }
                        result.cells = cells;
                        result.trajectory = Some(t);
                    }
                    Err(e) => result.error = Some(e.to_string()),
                }
                legs.push(result);
            }
        }
    }
    Ok(TrialReport {
        scenario: spec.name.clone(),
        behavior: spec.behavior,
        seed: spec.seed,
        schema: model.schema.clone(),
        resample_step_m: options.resample_step_m,
        mode: options.mode,
        plan,
        legs,
        metrics,
    })
}
