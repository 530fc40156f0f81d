//! Acceptance suite. Each test checks one criterion and writes a single
//! `PASS`/`FAIL` line to stderr (bypassing output capture) before asserting.

mod common;

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use common::*;
use navlearn_core::environment::Environment;
use navlearn_core::eval::{mhd_points, mhd_resampled, MhdMode};
use navlearn_core::features::{FeatureSchema, LayerKind};
use navlearn_core::geometry::Point;
use navlearn_core::irl::{
    evaluate_demo, likelihood_gradient, reward_map, train, BehaviorModel, Budget, Demonstration, Horizon, Init,
    TrainControl, TrainOptions, TrainProgress,
};
use navlearn_core::planner::{plan_baseline_cells, plan_ioc_cells, BaselineParams, GridPath, Provenance, Trajectory};
use navlearn_core::scenario::{
    generate_environment, oracle_demonstrate, road_edge_cells, run_trials, training_demonstrations, zod_blocks_road,
    Behavior, ScenarioSpec, TrialOptions, TrialReport,
};
use navlearn_core::worlds::{covert_world, road_world, zod_training_world, zod_world};

/// Iteration cap for cold-start scenario training.
const SCENARIO_ITERATIONS: usize = 150;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(name: &str, pass: bool, detail: String) {
    let line = format!("{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{name}: {detail}");
}

fn cold_train(demos: &[Demonstration], schema: &FeatureSchema, seed: u64) -> BehaviorModel {
    let budget = Budget {
        max_iterations: SCENARIO_ITERATIONS,
        ..Budget::default()
    };
    train(demos, schema, Init::Random { seed }, budget, TrainOptions::default(), TrainControl::default()).unwrap()
}

struct RoadRun {
    spec: ScenarioSpec,
    env: Environment,
    demos: Vec<Demonstration>,
    model: BehaviorModel,
    report: TrialReport,
}

struct RoadSuite {
    runs: Vec<RoadRun>,
    elapsed: Duration,
}

fn road_suite() -> &'static RoadSuite {
    static SUITE: OnceLock<RoadSuite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let t = Instant::now();
        let schema = FeatureSchema::standard();
        let runs = (0..10)
            .map(|seed| {
                let spec = road_world(seed);
                let env = generate_environment(&spec).unwrap();
                let demos = training_demonstrations(&spec, &env, &schema).unwrap();
                let model = cold_train(&demos, &schema, seed);
                let report = run_trials(&spec, &env, &model, &TrialOptions::default()).unwrap();
                RoadRun {
                    spec,
                    env,
                    demos,
                    model,
                    report,
                }
            })
            .collect();
        RoadSuite {
            runs,
            elapsed: t.elapsed(),
        }
    })
}

#[test]
fn gradient_oracle() {
    let _g = serial();
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let inst = instance(10_000 + seed, 8, 10, 10, 2);
        assert!(inst.theta.len() <= 10 && inst.horizon <= 10);
        let g = likelihood_gradient(&inst.demos, &inst.theta, Horizon::Fixed(inst.horizon)).unwrap();
        worst = worst.max(rel_error(&g.gradient, &fd_gradient(&inst, 1e-5)));
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        "gradient-oracle",
        worst < 1e-4 && secs < 60.0,
        format!("50 instances, max relative error {worst:.2e} (< 1e-4), {secs:.2} s (< 60 s)"),
    );
}

#[test]
fn visitation_oracle() {
    let _g = serial();
    let mut worst: f64 = 0.0;
    let mut found = 0;
    let mut seed = 20_000;
    while found < 20 {
        let inst = instance(seed, 4, 5, 8, 1);
        seed += 1;
        let d = &inst.demos[0];
        let Some(paths) = enumerate_paths(d, inst.horizon, 200) else { continue };
        let (want, _) = enumerated_expectation(d, &inst.theta, &paths);
        let got = evaluate_demo(d, &inst.theta, Horizon::Fixed(inst.horizon)).unwrap().expected;
        worst = worst.max(max_abs_diff(&got, &want));
        found += 1;
    }
    verdict(
        "visitation-oracle",
        worst < 1e-6,
        format!("20 instances of at most 200 paths, max abs error {worst:.2e} (< 1e-6)"),
    );
}

#[test]
fn mhd_suite() {
    let _g = serial();
    let p = |x, y| Point::new(x, y);
    let a: Vec<Point> = (0..40).map(|i| p(i as f64 * 0.3, (i as f64 * 0.7).sin() * 2.0)).collect();
    let b: Vec<Point> = (0..55).map(|i| p(i as f64 * 0.25 - 1.0, (i as f64 * 0.4).cos())).collect();
    let self_zero = mhd_points(&a, &a).unwrap() == 0.0;
    let hand = mhd_points(&[p(0.0, 0.0), p(1.0, 0.0)], &[p(0.0, 1.0)]).unwrap();
    let hand_ok = (hand - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-12;
    let fwd = mhd_points(&[p(0.0, 0.0)], &[p(0.0, 0.0), p(10.0, 0.0)]).unwrap();
    let rev = mhd_points(&[p(0.0, 0.0), p(10.0, 0.0)], &[p(0.0, 0.0)]).unwrap();
    let directed = fwd == 0.0 && (rev - 5.0).abs() < 1e-12;

    let mut rigid: f64 = 0.0;
    let ta = Trajectory::new(a.clone(), None, Provenance::Ioc).unwrap();
    let tb = Trajectory::new(b.clone(), None, Provenance::GroundTruth).unwrap();
    for k in 0..20 {
        let (th, dx, dy) = (0.37 * k as f64, 13.0 - 1.7 * k as f64, -4.0 + 0.9 * k as f64);
        let m = |q: &Point| p(th.cos() * q.x - th.sin() * q.y + dx, th.sin() * q.x + th.cos() * q.y + dy);
        let ra: Vec<Point> = a.iter().map(m).collect();
        let rb: Vec<Point> = b.iter().map(m).collect();
        rigid = rigid.max((mhd_points(&ra, &rb).unwrap() - mhd_points(&a, &b).unwrap()).abs());
        for mode in [MhdMode::Directed, MhdMode::Symmetric] {
            let x = mhd_resampled(
                &Trajectory::new(ra.clone(), None, Provenance::Ioc).unwrap(),
                &Trajectory::new(rb.clone(), None, Provenance::GroundTruth).unwrap(),
                0.25,
                mode,
            )
            .unwrap();
            rigid = rigid.max((x - mhd_resampled(&ta, &tb, 0.25, mode).unwrap()).abs());
        }
    }
    verdict(
        "mhd-suite",
        self_zero && hand_ok && directed && rigid < 1e-9,
        format!(
            "self-distance zero {self_zero}, hand case {hand:.6} vs (1+√2)/2, directed {fwd} vs {rev}, rigid-motion deviation {rigid:.1e} (< 1e-9)"
        ),
    );
}

#[test]
fn edge_of_road_reproduction() {
    let _g = serial();
    let suite = road_suite();
    let mut wins = 0;
    let mut rows = Vec::new();
    for run in &suite.runs {
        assert!((4..=6).contains(&run.demos.len()));
        assert_eq!(run.model.schema.dim(), 21);
        let ioc = run.report.mean_mhd("L", Provenance::Ioc).unwrap();
        let base = run.report.mean_mhd("L", Provenance::Baseline).unwrap();
        if ioc < base {
            wins += 1;
        }
        rows.push(format!("{}:{ioc:.2}/{base:.2}", run.spec.seed));
    }
    let secs = suite.elapsed.as_secs_f64();
    verdict(
        "edge-of-road",
        wins >= 9 && secs < 600.0,
        format!(
            "IOC < baseline mean MHD on {wins}/10 seeds (>= 9), {secs:.1} s (< 600 s); seed:ioc/baseline {}",
            rows.join(" ")
        ),
    );
}

#[test]
fn reward_bump_ordering() {
    let _g = serial();
    let suite = road_suite();
    let mut fractions = Vec::new();
    for run in &suite.runs {
        let stack = run.env.stack(&run.model.schema).unwrap();
        let rm = reward_map(&run.model, &stack).unwrap();
        let edge = road_edge_cells(&run.env);
        let road = run.env.layer(LayerKind::Road).cells();
        let mut e = Vec::new();
        let mut interior = Vec::new();
        for (i, &r) in rm.values().iter().enumerate() {
            if road[i] == 1 {
                if edge[i] {
                    e.push(r);
                } else {
                    interior.push(r);
                }
            }
        }
        interior.sort_by(f64::total_cmp);
        let wins: usize = e.iter().map(|x| interior.partition_point(|y| y < x)).sum();
        fractions.push(wins as f64 / (e.len() * interior.len()) as f64);
    }
    let min = fractions.iter().copied().fold(1.0, f64::min);
    verdict(
        "reward-bump",
        min >= 0.95,
        format!(
            "edge > interior on a minimum of {:.2}% of cell pairs per map (>= 95%); per map {}",
            min * 100.0,
            fractions.iter().map(|f| format!("{:.4}", f)).collect::<Vec<_>>().join(" ")
        ),
    );
}

#[test]
fn covert_reproduction() {
    let _g = serial();
    let mut rows = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let gap = |behavior, schema: FeatureSchema| {
            let spec = covert_world(seed, behavior);
            let env = generate_environment(&spec).unwrap();
            let demos = training_demonstrations(&spec, &env, &schema).unwrap();
            assert_eq!(demos.len(), 4);
            let model = cold_train(&demos, &schema, seed);
            let r = run_trials(&spec, &env, &model, &TrialOptions::default()).unwrap();
            r.mean_mhd("P-Q", Provenance::Baseline).unwrap() - r.mean_mhd("P-Q", Provenance::Ioc).unwrap()
        };
        let edge = gap(Behavior::EdgeOfRoad, FeatureSchema::edge_of_road());
        let covert = gap(Behavior::Covert, FeatureSchema::covert());
        pass &= covert > edge;
        rows.push(format!("seed {seed}: edge gap {edge:.3} m, covert gap {covert:.3} m"));
    }
    verdict(
        "covert-gap",
        pass,
        format!("covert IOC-vs-baseline gap exceeds edge-of-road gap at (P,Q); {}", rows.join("; ")),
    );
}

#[test]
fn zod_safety() {
    let _g = serial();
    let schema = FeatureSchema::standard();
    let mut demos = Vec::new();
    for s in 0..12 {
        let spec = zod_training_world(100 + s);
        let env = generate_environment(&spec).unwrap();
        demos.extend(training_demonstrations(&spec, &env, &schema).unwrap());
    }
    assert_eq!(demos.len(), 12);
    let model = cold_train(&demos, &schema, 7);

    let mut ioc_hits = 0;
    let mut blocked_maps = 0;
    let mut baseline_crossings = 0;
    for seed in 0..10 {
        let spec = zod_world(seed);
        let env = generate_environment(&spec).unwrap();
        let rm = reward_map(&model, &env.stack(&schema).unwrap()).unwrap();
        let avoid = env.layer(LayerKind::Avoidance);
        let hits = |p: &GridPath| p.cells.iter().filter(|c| avoid.get(**c) == Some(true)).count();
        let w = &spec.waypoints[0];
        let (i, g) = (spec.cell(w.i), spec.cell(w.g));
        ioc_hits += hits(&plan_ioc_cells(&rm, i, g).unwrap()) + hits(&plan_ioc_cells(&rm, g, i).unwrap());
        if zod_blocks_road(&env, i, g) {
            blocked_maps += 1;
            let base = plan_baseline_cells(&env.opacity(), i, g, &BaselineParams::default()).unwrap();
            if hits(&base) >= 1 {
                baseline_crossings += 1;
            }
        }
    }
    verdict(
        "zod-safety",
        ioc_hits == 0 && baseline_crossings == blocked_maps,
        format!(
            "IOC avoidance cells entered across 10 maps (both directions): {ioc_hits} (0); baseline crosses on {baseline_crossings}/{blocked_maps} maps where a ZOD blocks the road"
        ),
    );
}

#[test]
fn online_budget() {
    let _g = serial();
    let suite = road_suite();
    let run = &suite.runs[0];
    let before = run.report.mean_mhd("L", Provenance::Ioc).unwrap();

    // Corrective demonstration: the left turn into the branch.
    let x_v = run.spec.roads[1].points[0].x;
    let y_h = run.spec.roads[0].points[0].y;
    let i = run.spec.cell(Point::new(x_v - 14.0, y_h));
    let g = run.spec.cell(Point::new(x_v, y_h + 12.0));
    let mut demos = run.demos.clone();
    demos.push(oracle_demonstrate(&run.env, Behavior::EdgeOfRoad, i, g, &run.model.schema, "corrective").unwrap());

    let mut last = 0.0f64;
    let mut slowest = 0.0f64;
    let mut on_progress = |p: &TrainProgress| {
        slowest = slowest.max(p.elapsed_s - last);
        last = p.elapsed_s;
    };
    let t = Instant::now();
    let model = train(
        &demos,
        &run.model.schema,
        Init::Warm(run.model.theta.clone()),
        Budget::with_seconds(30.0),
        TrainOptions::default(),
        TrainControl {
            cancel: None,
            on_progress: Some(&mut on_progress),
        },
    )
    .unwrap();
    let secs = t.elapsed().as_secs_f64();
    let after = run_trials(&run.spec, &run.env, &model, &TrialOptions::default())
        .unwrap()
        .mean_mhd("L", Provenance::Ioc)
        .unwrap();
    verdict(
        "online-budget",
        secs <= 30.0 + slowest && after <= before,
        format!(
            "warm retrain with {} demos took {secs:.2} s (<= 30 s + {slowest:.3} s slowest iteration, {} iterations, {:?}); held-out IOC mean MHD {before:.4} -> {after:.4} m",
            demos.len(),
            model.meta.iterations,
            model.meta.stop_reason
        ),
    );
}

#[test]
fn determinism() {
    let _g = serial();
    let once = || {
        let spec = road_world(3);
        let env = generate_environment(&spec).unwrap();
        let schema = FeatureSchema::standard();
        let demos = training_demonstrations(&spec, &env, &schema).unwrap();
        let budget = Budget {
            max_iterations: 40,
            ..Budget::default()
        };
        let model =
            train(&demos, &schema, Init::Random { seed: 3 }, budget, TrainOptions::default(), TrainControl::default())
                .unwrap();
        let report = run_trials(&spec, &env, &model, &TrialOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        report.write_dir(dir.path()).unwrap();
        let mut files = Vec::new();
        for entry in walk(dir.path()) {
            let rel = entry.strip_prefix(dir.path()).unwrap().to_path_buf();
            files.push((rel, std::fs::read(&entry).unwrap()));
        }
        files.sort();
        (model.to_json().unwrap(), files)
    };
    let (m1, f1) = once();
    let (m2, f2) = once();
    verdict(
        "determinism",
        m1 == m2 && f1 == f2 && !f1.is_empty(),
        format!(
            "model files identical {}, {} report files identical {}",
            m1 == m2,
            f1.len(),
            f1 == f2
        ),
    );
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
