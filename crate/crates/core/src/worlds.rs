//! Seeded generators for the three synthetic sites: a T-junction road world,
//! a road lined with buildings, and a road crossed by zones of danger.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::Zod;
use crate::geometry::{GridGeometry, Point, DEFAULT_RESOLUTION};
use crate::scenario::{Behavior, BuildingSpec, RoadSpec, ScenarioSpec, WaypointPair};

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}

/// Snap to the cell-center lattice so waypoints land mid-cell.
fn snap(v: f64) -> f64 {
    (v / DEFAULT_RESOLUTION).floor() * DEFAULT_RESOLUTION + DEFAULT_RESOLUTION / 2.0
}

fn road(points: &[(f64, f64)], width_m: f64) -> RoadSpec {
    RoadSpec {
        points: points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
        width_m,
    }
}

fn pair(site: &str, i: (f64, f64), g: (f64, f64)) -> WaypointPair {
    WaypointPair::new(site, Point::new(snap(i.0), snap(i.1)), Point::new(snap(g.0), snap(g.1)))
}

/// 200×120 cells at 0.5 m: a through road with a branch to the top edge.
/// The evaluation pair runs from the left end of the through road to the
/// top of the branch; training pairs cover the right arm, the branch and the
/// opposite corner of the junction.
pub fn road_world(seed: u64) -> ScenarioSpec {
    let mut rng = rng_for(seed, 0x0001);
    let y_h = snap(rng.gen_range(18.0..26.0));
    let w_h = rng.gen_range(5.0..7.0);
    let x_v = snap(rng.gen_range(55.0..72.0));
    let w_v = rng.gen_range(5.0..7.0);
    let training_pairs = vec![
        pair("right-arm", (x_v + 10.0, y_h), (x_v + 26.0, y_h)),
        pair("branch", (x_v, y_h + 26.0), (x_v, y_h + 12.0)),
        pair("right-turn", (x_v + 14.0, y_h), (x_v, y_h + 12.0)),
        pair("left-arm", (16.0, y_h), (32.0, y_h)),
        pair("far-right", (98.0, y_h), (82.0, y_h)),
    ];
    ScenarioSpec {
        name: format!("road-{seed}"),
        seed,
        geometry: GridGeometry::new(200, 120, DEFAULT_RESOLUTION, Point::new(0.0, 0.0)).expect("valid"),
        roads: vec![road(&[(0.0, y_h), (100.0, y_h)], w_h), road(&[(x_v, y_h), (x_v, 60.0)], w_v)],
        buildings: vec![],
        zods: vec![],
        behavior: Behavior::EdgeOfRoad,
        label_noise: 0.0,
        waypoints: vec![pair("L", (6.0, y_h), (x_v, 56.0))],
        training_pairs: training_pairs
            .into_iter()
            .map(|mut p| {
                p.i.x = p.i.x.clamp(1.0, 99.0);
                p.g.x = p.g.x.clamp(1.0, 99.0);
                p
            })
            .collect(),
        trials: None,
    }
}

/// 240×80 cells at 0.5 m: a straight road with a row of buildings set back
/// from its north side and running to the top edge, separated by dead-end
/// alleys. Training pairs lie west of the evaluation pair.
pub fn covert_world(seed: u64, behavior: Behavior) -> ScenarioSpec {
    let mut rng = rng_for(seed, 0x0002);
    let y_r = snap(rng.gen_range(12.0..15.0));
    let width = 5.0;
    let front = y_r + width / 2.0 + rng.gen_range(1.0..2.0);
    let mut buildings = Vec::new();
    let mut x = rng.gen_range(1.0..3.0);
    while x < 116.0 {
        let len = rng.gen_range(9.0f64..15.0).min(118.0 - x);
        buildings.push(BuildingSpec {
            x0_m: x,
            y0_m: front + rng.gen_range(0.0..0.5),
            x1_m: x + len,
            y1_m: 40.0,
        });
        x += len + rng.gen_range(2.0..3.5);
    }
    ScenarioSpec {
        name: format!("covert-{seed}"),
        seed,
        geometry: GridGeometry::new(240, 80, DEFAULT_RESOLUTION, Point::new(0.0, 0.0)).expect("valid"),
        roads: vec![road(&[(0.0, y_r), (120.0, y_r)], width)],
        buildings,
        zods: vec![],
        behavior,
        label_noise: 0.0,
        waypoints: vec![pair("P-Q", (72.0, y_r), (112.0, y_r))],
        training_pairs: vec![
            pair("w1", (4.0, y_r), (24.0, y_r)),
            pair("w2", (46.0, y_r), (26.0, y_r)),
            pair("w3", (44.0, y_r), (64.0, y_r)),
            pair("w4", (34.0, y_r), (14.0, y_r)),
        ],
        trials: None,
    }
}

/// ZOD radii in meters.
pub const ZOD_RADII: [f64; 3] = [2.0, 2.5, 3.0];
const ZOD_ROAD_WIDTH: f64 = 4.0;

fn zod_road(rng: &mut ChaCha8Rng) -> f64 {
    snap(rng.gen_range(13.0..17.0))
}

/// 160×60 cells at 0.5 m: a straight road with one or two ZODs sitting on it.
pub fn zod_world(seed: u64) -> ScenarioSpec {
    let mut rng = rng_for(seed, 0x0003);
    let y_r = zod_road(&mut rng);
    let count = rng.gen_range(1..=2);
    let mut zods = Vec::new();
    let mut x = rng.gen_range(18.0..30.0);
    for _ in 0..count {
        let r = *ZOD_RADII.choose(&mut rng).expect("non-empty");
        zods.push(Zod::new(Point::new(x, y_r + rng.gen_range(-0.5..0.5)), r));
        x += rng.gen_range(18.0..28.0);
    }
    ScenarioSpec {
        name: format!("zod-{seed}"),
        seed,
        geometry: GridGeometry::new(160, 60, DEFAULT_RESOLUTION, Point::new(0.0, 0.0)).expect("valid"),
        roads: vec![road(&[(0.0, y_r), (80.0, y_r)], ZOD_ROAD_WIDTH)],
        buildings: vec![],
        zods,
        behavior: Behavior::ZodAvoidance,
        label_noise: 0.0,
        waypoints: vec![pair("A-B", (3.0, y_r), (77.0, y_r))],
        training_pairs: vec![],
        trials: None,
    }
}

/// A training map for ZOD avoidance: one ZOD on the road and one
/// demonstration pair passing it.
pub fn zod_training_world(seed: u64) -> ScenarioSpec {
    let mut rng = rng_for(seed, 0x0004);
    let y_r = zod_road(&mut rng);
    let r = ZOD_RADII[(seed % 3) as usize];
    let cx = rng.gen_range(30.0..50.0);
    let zod = Zod::new(Point::new(cx, y_r + rng.gen_range(-0.5..0.5)), r);
    let (i, g) = if seed % 2 == 0 {
        ((cx - 11.0, y_r), (cx + 11.0, y_r))
    } else {
        ((cx + 11.0, y_r), (cx - 11.0, y_r))
    };
    ScenarioSpec {
        name: format!("zod-train-{seed}"),
        seed,
        geometry: GridGeometry::new(160, 60, DEFAULT_RESOLUTION, Point::new(0.0, 0.0)).expect("valid"),
        roads: vec![road(&[(0.0, y_r), (80.0, y_r)], ZOD_ROAD_WIDTH)],
        buildings: vec![],
        zods: vec![zod],
        behavior: Behavior::ZodAvoidance,
        label_noise: 0.0,
        waypoints: vec![],
        training_pairs: vec![pair("pass", i, g)],
        trials: None,
    }
}
