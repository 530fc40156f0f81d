//! Independent oracles for the likelihood machinery: random small instances,
//! a linear-space path sum over walk lengths, and explicit path enumeration.

#![allow(dead_code)]

use navlearn_core::features::{BinaryLayer, FeatureDescriptor, FeatureSchema, FeatureStack, LayerKind};
use navlearn_core::geometry::{Cell, GridGeometry, Point, KING_MOVES};
use navlearn_core::irl::{DemoSource, Demonstration};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub demos: Vec<Demonstration>,
    pub theta: Vec<f64>,
    pub horizon: usize,
}

fn random_schema(rng: &mut ChaCha8Rng, max_dim: usize) -> FeatureSchema {
    let mut pool = Vec::new();
    for kind in LayerKind::ALL {
        for r in 0..=3 {
            pool.push(FeatureDescriptor::blurred(kind, r));
        }
    }
    pool.shuffle(rng);
    let k = rng.gen_range(1..max_dim);
    let mut d: Vec<FeatureDescriptor> = pool.into_iter().take(k).collect();
    d.push(FeatureDescriptor::Bias);
    FeatureSchema::new(d).unwrap()
}

fn random_stack(rng: &mut ChaCha8Rng, w: usize, h: usize, schema: &FeatureSchema) -> FeatureStack {
    let g = GridGeometry::new(w, h, 0.5, Point::new(0.0, 0.0)).unwrap();
    let obstacle = BinaryLayer::from_fn(LayerKind::Obstacle, g, |_| rng.gen_bool(0.15));
    let road = BinaryLayer::from_fn(LayerKind::Road, g, |c| obstacle.get(c) == Some(false) && rng.gen_bool(0.5));
    let grass = BinaryLayer::from_fn(LayerKind::Grass, g, |c| {
        obstacle.get(c) == Some(false) && road.get(c) == Some(false)
    });
    let avoid = BinaryLayer::from_fn(LayerKind::Avoidance, g, |_| rng.gen_bool(0.1));
    FeatureStack::build(&[obstacle, road, grass, avoid], schema).unwrap()
}

/// Random walk over passable cells, cut at the first visit of its last cell.
fn random_path(rng: &mut ChaCha8Rng, stack: &FeatureStack, max_steps: usize) -> Option<Vec<Cell>> {
    let g = *stack.geometry();
    let free: Vec<Cell> = (0..g.len()).map(|i| g.cell(i)).filter(|c| !stack.is_blocked(*c)).collect();
    let mut path = vec![*free.choose(rng)?];
    let steps = rng.gen_range(1..=max_steps);
    for _ in 0..steps {
        let c = *path.last().unwrap();
        let next: Vec<Cell> = KING_MOVES
            .iter()
            .map(|&(dc, dr)| c.offset(dc, dr))
            .filter(|n| g.contains(*n) && !stack.is_blocked(*n))
            .collect();
        path.push(*next.choose(rng)?);
    }
    let goal = *path.last().unwrap();
    let first = path.iter().position(|c| *c == goal).unwrap();
    path.truncate(first + 1);
    (path.len() >= 2).then_some(path)
}

/// A seeded instance with grids up to `max_side`, horizon up to `max_horizon`
/// and dimension up to `max_dim`.
pub fn instance(seed: u64, max_side: usize, max_horizon: usize, max_dim: usize, n_demos: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = random_schema(&mut rng, max_dim);
    let horizon = rng.gen_range(3..=max_horizon);
    let mut demos = Vec::new();
    while demos.len() < n_demos {
        let w = rng.gen_range(2..=max_side);
        let h = rng.gen_range(2..=max_side);
        let stack = random_stack(&mut rng, w, h, &schema);
        if let Some(path) = random_path(&mut rng, &stack, horizon.min(5)) {
            if path.len() - 1 <= horizon {
                let id = format!("d{}", demos.len());
                demos.push(Demonstration::new(id, path, stack, DemoSource::Oracle).unwrap());
            }
        }
    }
    let theta = (0..schema.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
    Instance { demos, theta, horizon }
}

fn cell_rewards(stack: &FeatureStack, theta: &[f64]) -> Vec<f64> {
    let d = stack.dim();
    (0..stack.geometry().len())
        .map(|i| stack.values()[i * d..(i + 1) * d].iter().zip(theta).map(|(a, b)| a * b).sum())
        .collect()
}

fn neighbors(stack: &FeatureStack, i: usize) -> Vec<usize> {
    let g = stack.geometry();
    let c = g.cell(i);
    KING_MOVES
        .iter()
        .filter_map(|&(dc, dr)| g.index(c.offset(dc, dr)))
        .filter(|&j| !stack.blocked()[j])
        .collect()
}

/// `Σ_ζ exp R(ζ)` over walks from the demo's start that first reach its goal
/// within `horizon` transitions, accumulated by walk length in linear space.
pub fn path_sum(demo: &Demonstration, theta: &[f64], horizon: usize) -> f64 {
    let stack = demo.stack();
    let g = stack.geometry();
    let n = g.len();
    let w: Vec<f64> = cell_rewards(stack, theta).iter().map(|r| r.exp()).collect();
    let s = g.index(demo.start()).unwrap();
    let goal = g.index(demo.goal()).unwrap();
    let mut a = vec![0.0; n];
    a[s] = w[s];
    let mut total = 0.0;
    for _ in 0..horizon {
        let mut b = vec![0.0; n];
        for i in 0..n {
            if a[i] == 0.0 || i == goal {
                continue;
            }
            for j in neighbors(stack, i) {
                b[j] += a[i] * w[j];
            }
        }
        total += b[goal];
        b[goal] = 0.0;
        a = b;
    }
    total
}

pub fn log_likelihood(demo: &Demonstration, theta: &[f64], horizon: usize) -> f64 {
    let g = demo.stack().geometry();
    let r = cell_rewards(demo.stack(), theta);
    let demo_r: f64 = demo.path().iter().map(|c| r[g.index(*c).unwrap()]).sum();
    demo_r - path_sum(demo, theta, horizon).ln()
}

pub fn mean_log_likelihood(inst: &Instance, theta: &[f64]) -> f64 {
    inst.demos.iter().map(|d| log_likelihood(d, theta, inst.horizon)).sum::<f64>() / inst.demos.len() as f64
}

/// Central finite differences of the mean log-likelihood.
pub fn fd_gradient(inst: &Instance, h: f64) -> Vec<f64> {
    (0..inst.theta.len())
        .map(|k| {
            let mut p = inst.theta.clone();
            let mut m = inst.theta.clone();
            p[k] += h;
            m[k] -= h;
            (mean_log_likelihood(inst, &p) - mean_log_likelihood(inst, &m)) / (2.0 * h)
        })
        .collect()
}

/// Every walk from start to first goal arrival within `horizon` transitions,
/// or `None` once more than `limit` exist.
pub fn enumerate_paths(demo: &Demonstration, horizon: usize, limit: usize) -> Option<Vec<Vec<usize>>> {
    let stack = demo.stack();
    let g = stack.geometry();
    let goal = g.index(demo.goal()).unwrap();
    let mut out = Vec::new();
    let mut stack_dfs = vec![vec![g.index(demo.start()).unwrap()]];
    while let Some(p) = stack_dfs.pop() {
        let last = *p.last().unwrap();
        if last == goal {
            out.push(p);
            if out.len() > limit {
                return None;
            }
            continue;
        }
        if p.len() > horizon {
            continue;
        }
        for j in neighbors(stack, last) {
            let mut q = p.clone();
            q.push(j);
            stack_dfs.push(q);
        }
    }
    Some(out)
}

/// Expected feature counts and log-likelihood by explicit enumeration.
pub fn enumerated_expectation(demo: &Demonstration, theta: &[f64], paths: &[Vec<usize>]) -> (Vec<f64>, f64) {
    let stack = demo.stack();
    let d = stack.dim();
    let r = cell_rewards(stack, theta);
    let weights: Vec<f64> = paths.iter().map(|p| p.iter().map(|&i| r[i]).sum::<f64>().exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut e = vec![0.0; d];
    for (p, w) in paths.iter().zip(&weights) {
        for &i in p {
            for (k, ek) in e.iter_mut().enumerate() {
                *ek += w / z * stack.values()[i * d + k];
            }
        }
    }
    let demo_r: f64 = demo.path().iter().map(|c| r[stack.geometry().index(*c).unwrap()]).sum();
    (e, demo_r - z.ln())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rel_error(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-8);
    max_abs_diff(got, want) / scale
}
