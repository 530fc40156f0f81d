//! Maximum-entropy reward learning from demonstrated grid paths.
//!
//! Rewards are linear in the features, `R(s) = θᵀφ(s)`. Each demonstration
//! carries its own [`FeatureStack`] (demonstrations come from different
//! regions), so the likelihood gradient is averaged over per-demonstration
//! MDPs:
//!
//! ```text
//! ∇L(θ) = 1/N Σ_i ( φ_ζi − Σ_s D_s^(i) φ_i(s) )
//! ```

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::features::{BinaryLayer, FeatureSchema, FeatureStack, LayerKind};
use crate::geometry::{Cell, CellRect, GridGeometry};
use crate::mdp::{expected_visitation, soft_backward, GridMdp};

/// Where a demonstration came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoSource {
    Oracle,
    HumanUi,
    File,
}

/// A demonstrated path bound to the feature stack it was driven over.
#[derive(Clone, Debug)]
pub struct Demonstration {
    id: String,
    path: Vec<Cell>,
    stack: FeatureStack,
    source: DemoSource,
}

/// Validate a cell path against a stack: in bounds, passable, king-adjacent.
pub fn validate_path(stack: &FeatureStack, path: &[Cell]) -> Result<()> {
    for c in path {
        stack.geometry().checked_index(*c)?;
        if stack.is_blocked(*c) {
            return Err(Error::InvalidDemonstration(format!(
                "path enters obstacle cell ({}, {})",
                c.col, c.row
            )));
        }
    }
    for w in path.windows(2) {
        if !w[0].is_adjacent(w[1]) {
            return Err(Error::InvalidDemonstration(format!(
                "cells ({}, {}) and ({}, {}) are not adjacent",
                w[0].col, w[0].row, w[1].col, w[1].row
            )));
        }
    }
    Ok(())
}

impl Demonstration {
    pub fn new(id: impl Into<String>, path: Vec<Cell>, stack: FeatureStack, source: DemoSource) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::InvalidDemonstration("a path needs at least two cells".into()));
        }
        validate_path(&stack, &path)?;
        Ok(Self {
            id: id.into(),
            path,
            stack,
            source,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn path(&self) -> &[Cell] {
        &self.path
    }

    pub fn stack(&self) -> &FeatureStack {
        &self.stack
    }

    pub fn source(&self) -> DemoSource {
        self.source
    }

    pub fn start(&self) -> Cell {
        self.path[0]
    }

    pub fn goal(&self) -> Cell {
        *self.path.last().expect("length checked")
    }

    /// Feature counts φ_ζ.
    pub fn feature_counts(&self) -> Vec<f64> {
        feature_counts(&self.stack, &self.path).expect("path validated at construction")
    }
}

/// `Σ_{s ∈ path} φ(s)`.
pub fn feature_counts(stack: &FeatureStack, path: &[Cell]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; stack.dim()];
    for c in path {
        for (o, v) in out.iter_mut().zip(stack.feature_vector(*c)?) {
            *o += v;
        }
    }
    Ok(out)
}

/// Path reward `Σ_{s ∈ ζ} θᵀφ(s)`.
pub fn path_reward(demo: &Demonstration, theta: &[f64]) -> Result<f64> {
    check_dim(demo.stack.dim(), theta.len())?;
    Ok(demo.feature_counts().iter().zip(theta).map(|(a, b)| a * b).sum())
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Persistable capture of a demonstration: raw layers over a halo window
/// around the path. Binding it to a schema recomputes the blurred planes and
/// crops to the inner window, so blur near the window edge sees the same
/// sources it would on the full environment (up to `halo` cells).
#[derive(Clone, Debug, PartialEq)]
pub struct DemoRecord {
    pub id: String,
    pub source: DemoSource,
    pub layers: Vec<BinaryLayer>,
    /// Inner window, relative to the halo window.
    pub inner: CellRect,
    /// Path in inner-window coordinates.
    pub path: Vec<Cell>,
    pub halo: usize,
}

/// Cells kept around a demonstrated path for its local MDP.
pub const DEFAULT_DEMO_MARGIN: usize = 12;
/// Covers the largest blur radius of the built-in schemas.
pub const DEFAULT_DEMO_HALO: usize = 12;

impl DemoRecord {
    /// Capture `path` (environment cells) with `margin` cells of context.
    pub fn capture(
        env: &Environment,
        id: impl Into<String>,
        path: &[Cell],
        margin: usize,
        source: DemoSource,
    ) -> Result<Self> {
        let bbox = CellRect::bounding(path)
            .ok_or_else(|| Error::InvalidDemonstration("empty path".into()))?;
        let g = env.geometry();
        for c in path {
            g.checked_index(*c)?;
        }
        let inner_abs = g.clip(bbox.expand(margin));
        let halo_abs = g.clip(inner_abs.expand(DEFAULT_DEMO_HALO));
        let layers = env.crop_layers(halo_abs)?;
        let inner = CellRect {
            col0: inner_abs.col0 - halo_abs.col0,
            row0: inner_abs.row0 - halo_abs.row0,
            width: inner_abs.width,
            height: inner_abs.height,
        };
        let local = path
            .iter()
            .map(|c| Cell::new(c.col - inner_abs.col0, c.row - inner_abs.row0))
            .collect();
        Ok(Self {
            id: id.into(),
            source,
            layers,
            inner,
            path: local,
            halo: DEFAULT_DEMO_HALO,
        })
    }

    pub fn bind(&self, schema: &FeatureSchema) -> Result<Demonstration> {
        if schema.max_radius() as usize > self.halo {
            return Err(Error::SchemaMismatch(format!(
                "schema blur radius {} exceeds the captured halo of {} cells",
                schema.max_radius(),
                self.halo
            )));
        }
        let stack = FeatureStack::build(&self.layers, schema)?.crop(self.inner)?;
        Demonstration::new(self.id.clone(), self.path.clone(), stack, self.source)
    }

    /// Geometry of the inner window (world frame).
    pub fn geometry(&self) -> Result<GridGeometry> {
        let halo = self
            .layers
            .first()
            .ok_or_else(|| Error::InvalidLayer("demonstration has no layers".into()))?;
        halo.geometry().window(self.inner)
    }

    pub fn to_json(&self) -> Result<String> {
        let g = *self
            .layers
            .first()
            .ok_or_else(|| Error::InvalidLayer("demonstration has no layers".into()))?
            .geometry();
        let file = DemoFile {
            id: self.id.clone(),
            source: self.source,
            geometry: g,
            halo: self.halo,
            inner: self.inner,
            path: self.path.iter().map(|c| [c.col, c.row]).collect(),
            layers: self
                .layers
                .iter()
                .map(|l| (l.kind(), crate::environment::rle_encode(l.cells())))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: DemoFile = serde_json::from_str(s)?;
        f.geometry.validate()?;
        let layers = f
            .layers
            .into_iter()
            .map(|(kind, rle)| BinaryLayer::new(kind, f.geometry, crate::environment::rle_decode(&rle, f.geometry.len())?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            id: f.id,
            source: f.source,
            layers,
            inner: f.inner,
            path: f.path.into_iter().map(|[c, r]| Cell::new(c, r)).collect(),
            halo: f.halo,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DemoFile {
    id: String,
    source: DemoSource,
    geometry: GridGeometry,
    halo: usize,
    inner: CellRect,
    path: Vec<[i32; 2]>,
    layers: Vec<(LayerKind, String)>,
}

/// How many transitions each demonstration's MDP allows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// `factor × |ζ|` for each demonstration.
    PathMultiple(usize),
    Fixed(usize),
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::PathMultiple(2)
    }
}

impl Horizon {
    pub fn for_path(self, len: usize) -> usize {
        match self {
            Horizon::PathMultiple(f) => f * len,
            Horizon::Fixed(h) => h,
        }
    }
}

/// Per-demonstration quantities from one backward/forward evaluation.
#[derive(Clone, Debug)]
pub struct DemoEvaluation {
    pub empirical: Vec<f64>,
    pub expected: Vec<f64>,
    pub log_likelihood: f64,
}

/// Log-likelihood of one demonstration and its expected feature counts.
pub fn evaluate_demo(demo: &Demonstration, theta: &[f64], horizon: Horizon) -> Result<DemoEvaluation> {
    let stack = demo.stack();
    check_dim(stack.dim(), theta.len())?;
    let passable: Vec<bool> = stack.blocked().iter().map(|b| !b).collect();
    let h = horizon.for_path(demo.path.len()).max(demo.path.len() - 1).max(1);
    let mdp = GridMdp::new(*stack.geometry(), passable, demo.goal(), h)?;
    let reward = stack.dot(theta)?;
    let values = soft_backward(&mdp, &reward)?;
    let visits = expected_visitation(&mdp, &values, demo.start(), h + 1)?;
    let empirical = demo.feature_counts();
    let expected = visits.expected_features(stack.values(), stack.dim());
    let start = stack.geometry().checked_index(demo.start())?;
    let path_r: f64 = empirical.iter().zip(theta).map(|(a, b)| a * b).sum();
    Ok(DemoEvaluation {
        empirical,
        expected,
        log_likelihood: path_r - values.log_partition(&mdp, start),
    })
}

/// Averaged likelihood gradient and log-likelihood.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub gradient: Vec<f64>,
    pub log_likelihood: f64,
}

pub fn likelihood_gradient(demos: &[Demonstration], theta: &[f64], horizon: Horizon) -> Result<Gradient> {
    if demos.is_empty() {
        return Err(Error::NoDemonstrations);
    }
    let schema = demos[0].stack().schema();
    if let Some(d) = demos.iter().find(|d| d.stack().schema() != schema) {
        return Err(Error::SchemaMismatch(format!("demonstration `{}` uses a different schema", d.id())));
    }
    check_dim(schema.dim(), theta.len())?;
    let n = demos.len() as f64;
    let mut gradient = vec![0.0; theta.len()];
    let mut ll = 0.0;
    for d in demos {
        let e = evaluate_demo(d, theta, horizon)?;
        for ((g, a), b) in gradient.iter_mut().zip(&e.empirical).zip(&e.expected) {
            *g += (a - b) / n;
        }
        ll += e.log_likelihood / n;
    }
    Ok(Gradient {
        gradient,
        log_likelihood: ll,
    })
}

/// How training starts.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// Uniform weights in [-5, 5] from a seeded generator.
    Random { seed: u64 },
    /// Continue from deployed weights.
    Warm(Vec<f64>),
}

/// Stopping limits; whichever is hit first ends training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub max_iterations: usize,
    pub wall_clock: Option<Duration>,
    pub gradient_tolerance: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            wall_clock: None,
            gradient_tolerance: 1e-4,
        }
    }
}

impl Budget {
    pub fn with_seconds(secs: f64) -> Self {
        Self {
            wall_clock: Some(Duration::from_secs_f64(secs)),
            ..Self::default()
        }
    }
}

/// Step size schedule `η_k = η_0 · decay^k`.
pub const INITIAL_STEP: f64 = 0.1;
pub const STEP_DECAY: f64 = 0.99;
pub const STEP_GROWTH: f64 = 1.25;
pub const INIT_RANGE: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Random,
    Warm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    WallClock,
    Cancelled,
}

/// Training bookkeeping stored with a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub demo_ids: Vec<String>,
    pub init: InitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub final_gradient_norm: f64,
    pub log_likelihood: f64,
    pub stop_reason: StopReason,
    /// Elapsed time. Not written to model files, which must be reproducible.
    #[serde(skip)]
    pub wall_clock_s: f64,
}

/// Learned weights with the schema they index and their training history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorModel {
    pub schema: FeatureSchema,
    pub theta: Vec<f64>,
    pub meta: TrainingMeta,
}

impl BehaviorModel {
    pub fn new(schema: FeatureSchema, theta: Vec<f64>, meta: TrainingMeta) -> Result<Self> {
        check_dim(schema.dim(), theta.len())?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Format("model weights must be finite".into()));
        }
        Ok(Self { schema, theta, meta })
    }

    /// Untrained model with seeded uniform weights in [-5, 5].
    pub fn random(schema: FeatureSchema, seed: u64) -> Self {
        let theta = random_weights(schema.dim(), seed);
        Self {
            schema,
            theta,
            meta: TrainingMeta {
                demo_ids: Vec::new(),
                init: InitMode::Random,
                seed: Some(seed),
                iterations: 0,
                accepted_steps: 0,
                final_gradient_norm: f64::NAN,
                log_likelihood: f64::NAN,
                stop_reason: StopReason::MaxIterations,
                wall_clock_s: 0.0,
            },
        }
    }

    /// Deterministic serialization: identical models give identical bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&ModelFile::from(self))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s)?;
        BehaviorModel::new(f.schema, f.theta, f.meta.into_meta())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

// Non-finite numbers are not valid JSON, so optional floats are written as null.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: FeatureSchema,
    theta: Vec<f64>,
    meta: MetaFile,
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    demo_ids: Vec<String>,
    init: InitMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    iterations: usize,
    accepted_steps: usize,
    final_gradient_norm: Option<f64>,
    log_likelihood: Option<f64>,
    stop_reason: StopReason,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<&BehaviorModel> for ModelFile {
    fn from(m: &BehaviorModel) -> Self {
        ModelFile {
            schema: m.schema.clone(),
            theta: m.theta.clone(),
            meta: MetaFile {
                demo_ids: m.meta.demo_ids.clone(),
                init: m.meta.init,
                seed: m.meta.seed,
                iterations: m.meta.iterations,
                accepted_steps: m.meta.accepted_steps,
                final_gradient_norm: finite(m.meta.final_gradient_norm),
                log_likelihood: finite(m.meta.log_likelihood),
                stop_reason: m.meta.stop_reason,
            },
        }
    }
}

impl MetaFile {
    fn into_meta(self) -> TrainingMeta {
        TrainingMeta {
            demo_ids: self.demo_ids,
            init: self.init,
            seed: self.seed,
            iterations: self.iterations,
            accepted_steps: self.accepted_steps,
            final_gradient_norm: self.final_gradient_norm.unwrap_or(f64::NAN),
            log_likelihood: self.log_likelihood.unwrap_or(f64::NAN),
            stop_reason: self.stop_reason,
            wall_clock_s: 0.0,
        }
    }
}

pub fn random_weights(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE)).collect()
}

/// Progress event emitted after every iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainProgress {
    pub iteration: usize,
    pub gradient_norm: f64,
    pub log_likelihood: f64,
    pub accepted: bool,
    pub elapsed_s: f64,
}

/// Cooperative cancellation and progress reporting for [`train`].
#[derive(Default)]
pub struct TrainControl<'a> {
    pub cancel: Option<&'a AtomicBool>,
    pub on_progress: Option<&'a mut dyn FnMut(&TrainProgress)>,
}

/// Options that shape the likelihood but not the stopping rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainOptions {
    pub horizon: Horizon,
    pub initial_step: f64,
    pub step_decay: f64,
    /// Factor applied to the step scale after an accepted step.
    pub step_growth: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            horizon: Horizon::default(),
            initial_step: INITIAL_STEP,
            step_decay: STEP_DECAY,
            step_growth: STEP_GROWTH,
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient ascent on the demonstration log-likelihood.
///
/// Step `k` moves along the last accepted gradient by `η_k · scale`. A
/// proposal whose log-likelihood falls below the last accepted point is
/// rejected and `scale` is halved, so the accepted sequence never decreases.
pub fn train(
    demos: &[Demonstration],
    schema: &FeatureSchema,
    init: Init,
    budget: Budget,
    options: TrainOptions,
    mut control: TrainControl<'_>,
) -> Result<BehaviorModel> {
    if demos.is_empty() {
        return Err(Error::NoDemonstrations);
    }
    if let Some(d) = demos.iter().find(|d| d.stack().schema() != schema) {
        return Err(Error::SchemaMismatch(format!(
            "demonstration `{}` was bound to a different schema",
            d.id()
        )));
    }
    if !(budget.gradient_tolerance >= 0.0) {
        return Err(Error::InvalidBudget("gradient tolerance must be non-negative".into()));
    }
    let (mut theta, init_mode, seed) = match init {
        Init::Random { seed } => (random_weights(schema.dim(), seed), InitMode::Random, Some(seed)),
        Init::Warm(t) => {
            if t.len() != schema.dim() {
                return Err(Error::SchemaMismatch(format!(
                    "warm-start weights have {} entries, schema has {}",
                    t.len(),
                    schema.dim()
                )));
            }
            (t, InitMode::Warm, None)
        }
    };

    let started = Instant::now();
    let mut best: Option<(Vec<f64>, Gradient)> = None;
    let mut scale = 1.0;
    let mut iterations = 0;
    let mut accepted_steps = 0;
    let stop = loop {
        if control.cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            break StopReason::Cancelled;
        }
        if budget.wall_clock.is_some_and(|w| started.elapsed() >= w) {
            break StopReason::WallClock;
        }
        if iterations >= budget.max_iterations {
            break StopReason::MaxIterations;
        }
        let eval = likelihood_gradient(demos, &theta, options.horizon);
        iterations += 1;
        let accepted = match (&eval, &best) {
            (Ok(e), _) if !e.log_likelihood.is_finite() || e.gradient.iter().any(|g| !g.is_finite()) => false,
            (Ok(_), None) => true,
            (Ok(e), Some((_, b))) => e.log_likelihood >= b.log_likelihood,
            (Err(_), None) => return eval.map(|_| unreachable!()),
            (Err(_), Some(_)) => false,
        };
        if accepted {
            best = Some((theta.clone(), eval.expect("accepted evaluations are Ok")));
            if iterations > 1 {
                accepted_steps += 1;
                scale *= options.step_growth;
            }
        } else {
            scale *= 0.5;
        }
        let (base, grad) = best.as_ref().expect("first evaluation is accepted or returned");
        let norm = inf_norm(&grad.gradient);
        if let Some(cb) = control.on_progress.as_mut() {
            cb(&TrainProgress {
                iteration: iterations,
                gradient_norm: norm,
                log_likelihood: grad.log_likelihood,
                accepted,
                elapsed_s: started.elapsed().as_secs_f64(),
            });
        }
        if norm < budget.gradient_tolerance {
            break StopReason::Converged;
        }
        let step = options.initial_step * options.step_decay.powi(iterations as i32 - 1) * scale;
        theta = base
            .iter()
            .zip(&grad.gradient)
            .map(|(t, g)| t + step * g)
            .collect();
    };

    let (theta, grad) = match best {
        Some((t, g)) => (t, Some(g)),
        None => (theta, None),
    };
    let meta = TrainingMeta {
        demo_ids: demos.iter().map(|d| d.id().to_string()).collect(),
        init: init_mode,
        seed,
        iterations,
        accepted_steps,
        final_gradient_norm: grad.as_ref().map_or(f64::NAN, |g| inf_norm(&g.gradient)),
        log_likelihood: grad.as_ref().map_or(f64::NAN, |g| g.log_likelihood),
        stop_reason: stop,
        wall_clock_s: started.elapsed().as_secs_f64(),
    };
    BehaviorModel::new(schema.clone(), theta, meta)
}

/// Per-cell reward `θᵀφ(s)` over one environment.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardMap {
    geometry: GridGeometry,
    values: Vec<f64>,
    passable: Vec<bool>,
}

impl RewardMap {
    pub fn new(geometry: GridGeometry, values: Vec<f64>, passable: Vec<bool>) -> Result<Self> {
        if values.len() != geometry.len() || passable.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                found: values.len().min(passable.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("reward values must be finite".into()));
        }
        Ok(Self {
            geometry,
            values,
            passable,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn passable(&self) -> &[bool] {
        &self.passable
    }

    pub fn get(&self, cell: Cell) -> Option<f64> {
        self.geometry.index(cell).map(|i| self.values[i])
    }

    /// Same map with `c` added to every cell.
    pub fn shifted(&self, c: f64) -> RewardMap {
        RewardMap {
            geometry: self.geometry,
            values: self.values.iter().map(|v| v + c).collect(),
            passable: self.passable.clone(),
        }
    }
}

pub fn reward_map(model: &BehaviorModel, stack: &FeatureStack) -> Result<RewardMap> {
    if stack.schema() != &model.schema {
        if stack.dim() != model.theta.len() {
            return Err(Error::DimensionMismatch {
                expected: stack.dim(),
                found: model.theta.len(),
            });
        }
        return Err(Error::SchemaMismatch("model and stack schemas differ".into()));
    }
    let values = stack.dot(&model.theta)?;
    RewardMap::new(*stack.geometry(), values, stack.blocked().iter().map(|b| !b).collect())
}
