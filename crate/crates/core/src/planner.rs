//! Grid planners: the IOC planner over a learned reward map and the
//! obstacle-only baseline, plus trajectory plumbing (densification, CSV).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::OpacityLayer;
use crate::geometry::{step_length, Cell, GridGeometry, Point};
use crate::irl::RewardMap;

/// Where a trajectory came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GroundTruth,
    Ioc,
    Baseline,
    Oracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::GroundTruth => "ground-truth",
            Provenance::Ioc => "ioc",
            Provenance::Baseline => "baseline",
            Provenance::Oracle => "oracle",
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ground-truth" | "gt" => Provenance::GroundTruth,
            "ioc" => Provenance::Ioc,
            "baseline" => Provenance::Baseline,
            "oracle" => Provenance::Oracle,
            _ => return Err(Error::Format(format!("unknown provenance `{s}`"))),
        })
    }
}

/// World-frame polyline with optional timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    times: Option<Vec<f64>>,
    provenance: Provenance,
}

impl Trajectory {
    pub fn new(points: Vec<Point>, times: Option<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidTrajectory("coordinates must be finite".into()));
        }
        if let Some(t) = &times {
            if t.len() != points.len() {
                return Err(Error::InvalidTrajectory(format!(
                    "{} timestamps for {} points",
                    t.len(),
                    points.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) || t.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidTrajectory("timestamps must be finite and non-decreasing".into()));
            }
        }
        Ok(Self {
            points,
            times,
            provenance,
        })
    }

    /// Polyline through cell centers.
    pub fn from_cells(geometry: &GridGeometry, cells: &[Cell], provenance: Provenance) -> Result<Self> {
        Self::new(cells.iter().map(|c| geometry.center_of(*c)).collect(), None, provenance)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn times(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Timestamps, synthesized at 1 m/s from arc length when absent.
    pub fn timestamps(&self) -> Vec<f64> {
        if let Some(t) = &self.times {
            return t.clone();
        }
        let mut out = Vec::with_capacity(self.points.len());
        let mut s = 0.0;
        out.push(0.0);
        for w in self.points.windows(2) {
            s += w[0].distance(w[1]);
            out.push(s);
        }
        out
    }

    /// `t_s,x_m,y_m` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,x_m,y_m\n");
        for (t, p) in self.timestamps().iter().zip(&self.points) {
            let _ = writeln!(out, "{t},{},{}", p.x, p.y);
        }
        out
    }

    pub fn from_csv(s: &str, provenance: Provenance) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::EmptyTrajectory)?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t_s", "x_m", "y_m"] {
            return Err(Error::Format(format!("unexpected trajectory header `{header}`")));
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (n, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("row {}: {e}", n + 1)))?;
            let [t, x, y] = vals[..] else {
                return Err(Error::Format(format!("row {}: expected 3 columns", n + 1)));
            };
            times.push(t);
            points.push(Point::new(x, y));
        }
        Self::new(points, Some(times), provenance)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: &Path, provenance: Provenance) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?, provenance)
    }
}

/// Resample at `step` meters of arc length, keeping both endpoints.
/// Timestamps, when present, are interpolated.
pub fn densify(traj: &Trajectory, step: f64) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidTrajectory(format!("resample step must be positive, got {step}")));
    }
    let pts = traj.points();
    let times = traj.times();
    let total = traj.length();
    if pts.len() == 1 || total == 0.0 {
        return Trajectory::new(vec![pts[0]], times.map(|t| vec![t[0]]), traj.provenance());
    }
    let mut out_p = Vec::new();
    let mut out_t = Vec::new();
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut k = 0usize;
    loop {
        let s = k as f64 * step;
        if s >= total - 1e-9 * total.max(1.0) {
            break;
        }
        while seg + 1 < pts.len() - 1 && seg_start + pts[seg].distance(pts[seg + 1]) < s {
            seg_start += pts[seg].distance(pts[seg + 1]);
            seg += 1;
        }
        let len = pts[seg].distance(pts[seg + 1]);
        let f = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (pts[seg], pts[seg + 1]);
        out_p.push(Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)));
        if let Some(t) = times {
            out_t.push(t[seg] + f * (t[seg + 1] - t[seg]));
        }
        k += 1;
    }
    out_p.push(*pts.last().expect("non-empty"));
    if let Some(t) = times {
        out_t.push(*t.last().expect("non-empty"));
    }
    Trajectory::new(out_p, times.map(|_| out_t), traj.provenance())
}

/// Snap a world polyline to grid cells: densify at a quarter cell, take the
/// containing cell of each sample, drop repeats and stop at the first arrival
/// in the final cell.
pub fn rasterize(geometry: &GridGeometry, points: &[Point]) -> Result<Vec<Cell>> {
    if points.len() < 2 {
        return Err(Error::InvalidTrajectory("a polyline needs at least two points".into()));
    }
    let dense = densify(&Trajectory::new(points.to_vec(), None, Provenance::GroundTruth)?, geometry.resolution / 4.0)?;
    let mut cells: Vec<Cell> = Vec::new();
    for p in dense.points() {
        let c = geometry.cell_of(*p);
        if !geometry.contains(c) {
            return Err(Error::OutOfBounds(c));
        }
        match cells.last() {
            Some(last) if *last == c => {}
            Some(last) if !last.is_adjacent(c) => {
                return Err(Error::InvalidTrajectory(format!(
                    "rasterized cells ({}, {}) and ({}, {}) are not adjacent",
                    last.col, last.row, c.col, c.row
                )))
            }
            _ => cells.push(c),
        }
    }
    let goal = *cells.last().expect("at least one sample");
    let first = cells.iter().position(|c| *c == goal).expect("goal is present");
    cells.truncate(first + 1);
    Ok(cells)
}

/// A planned cell path and its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub cost: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    row: i32,
    col: i32,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed for a min-heap: lowest cost, then lowest row, then lowest column.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.row.cmp(&self.row))
            .then_with(|| other.col.cmp(&self.col))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over king moves. Entering cell `j` with a move of length `ℓ`
/// costs `ℓ · entry_cost[j]`; `None` entries are impassable.
pub fn shortest_path(geometry: &GridGeometry, entry_cost: &[Option<f64>], start: Cell, goal: Cell) -> Result<GridPath> {
    let n = geometry.len();
    if entry_cost.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: entry_cost.len(),
        });
    }
    let s = geometry.checked_index(start)?;
    let g = geometry.checked_index(goal)?;
    if entry_cost[s].is_none() {
        return Err(Error::Impassable(start));
    }
    if entry_cost[g].is_none() {
        return Err(Error::Impassable(goal));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry {
        cost: 0.0,
        row: start.row,
        col: start.col,
        index: s,
    });
    while let Some(Entry { cost, index, .. }) = heap.pop() {
        if done[index] {
            continue;
        }
        done[index] = true;
        if index == g {
            break;
        }
        let here = geometry.cell(index);
        for (_, next) in geometry.neighbors(here) {
            let j = geometry.index(next).expect("neighbors are in bounds");
            let Some(c) = entry_cost[j] else { continue };
            if done[j] {
                continue;
            }
            let nd = cost + step_length(next.col - here.col, next.row - here.row) * c;
            if nd < dist[j] {
                dist[j] = nd;
                prev[j] = index;
                heap.push(Entry {
                    cost: nd,
                    row: next.row,
                    col: next.col,
                    index: j,
                });
            }
        }
    }
    if !done[g] {
        return Err(Error::Unreachable { from: start, to: goal });
    }
    let mut cells = vec![goal];
    let mut at = g;
    while at != s {
        at = prev[at];
        cells.push(geometry.cell(at));
    }
    cells.reverse();
    Ok(GridPath { cells, cost: dist[g] })
}

/// Keeps every entry cost positive.
pub const IOC_EPSILON: f64 = 1e-6;

/// How rewards become entry costs for the IOC planner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IocCost {
    /// `max(−R(c), 0) + ε`: ranks paths by total reward whenever rewards are
    /// negative, which is how the likelihood ranks them.
    #[default]
    NegatedReward,
    /// `R_max − R(c) + ε`: invariant to reward shifts, but adds a per-step
    /// charge of `R_max` that the likelihood does not have.
    ShiftedMax,
}

pub fn ioc_costs(reward: &RewardMap, mode: IocCost) -> Vec<Option<f64>> {
    let passable = reward.passable();
    let r_max = reward
        .values()
        .iter()
        .zip(passable)
        .filter(|(_, p)| **p)
        .map(|(r, _)| *r)
        .fold(f64::NEG_INFINITY, f64::max);
    reward
        .values()
        .iter()
        .zip(passable)
        .map(|(r, p)| {
            p.then(|| match mode {
                IocCost::NegatedReward => (-r).max(0.0) + IOC_EPSILON,
                IocCost::ShiftedMax => r_max - r + IOC_EPSILON,
            })
        })
        .collect()
}

/// Maximum-reward path over passable cells.
pub fn plan_ioc_cells_with(reward: &RewardMap, start: Cell, goal: Cell, mode: IocCost) -> Result<GridPath> {
    shortest_path(reward.geometry(), &ioc_costs(reward, mode), start, goal)
}

pub fn plan_ioc_cells(reward: &RewardMap, start: Cell, goal: Cell) -> Result<GridPath> {
    plan_ioc_cells_with(reward, start, goal, IocCost::default())
}

pub fn plan_ioc(reward: &RewardMap, start: Cell, goal: Cell) -> Result<Trajectory> {
    let path = plan_ioc_cells(reward, start, goal)?;
    Trajectory::from_cells(reward.geometry(), &path.cells, Provenance::Ioc)
}

/// Cost weights for the obstacle-only planner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub w_obstacle: f64,
    pub w_unknown: f64,
    pub inflation_radius_cells: u32,
    pub hard_threshold: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            w_obstacle: 50.0,
            w_unknown: 10.0,
            inflation_radius_cells: 2,
            hard_threshold: 0.97,
        }
    }
}

/// Entry costs for the baseline; hard obstacles and cells within the
/// inflation radius (Euclidean, in cells) are `None`.
pub fn baseline_costs(opacity: &OpacityLayer, params: &BaselineParams) -> Vec<Option<f64>> {
    let g = opacity.geometry();
    let vals = opacity.values();
    let unknown = opacity.unknown();
    let mut blocked = vec![false; g.len()];
    let r = params.inflation_radius_cells as i32;
    for (i, &v) in vals.iter().enumerate() {
        if v < params.hard_threshold {
            continue;
        }
        let c = g.cell(i);
        for dr in -r..=r {
            for dc in -r..=r {
                if dc * dc + dr * dr <= r * r {
                    if let Some(j) = g.index(c.offset(dc, dr)) {
                        blocked[j] = true;
                    }
                }
            }
        }
    }
    (0..g.len())
        .map(|i| {
            (!blocked[i]).then(|| 1.0 + params.w_obstacle * vals[i] + if unknown[i] { params.w_unknown } else { 0.0 })
        })
        .collect()
}

pub fn plan_baseline_cells(opacity: &OpacityLayer, start: Cell, goal: Cell, params: &BaselineParams) -> Result<GridPath> {
    shortest_path(opacity.geometry(), &baseline_costs(opacity, params), start, goal)
}

pub fn plan_baseline(opacity: &OpacityLayer, start: Cell, goal: Cell, params: &BaselineParams) -> Result<Trajectory> {
    let path = plan_baseline_cells(opacity, start, goal, params)?;
    Trajectory::from_cells(opacity.geometry(), &path.cells, Provenance::Baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(w: usize, h: usize) -> GridGeometry {
        GridGeometry::new(w, h, 0.5, Point::new(0.0, 0.0)).unwrap()
    }

    fn uniform(w: usize, h: usize) -> RewardMap {
        RewardMap::new(geom(w, h), vec![-1.0; w * h], vec![true; w * h]).unwrap()
    }

    #[test]
    fn trivial_plan() {
        let t = plan_ioc(&uniform(4, 4), Cell::new(1, 1), Cell::new(1, 1)).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn uniform_reward_gives_shortest_path() {
        let map = uniform(12, 9);
        let p = plan_ioc_cells(&map, Cell::new(0, 0), Cell::new(10, 4)).unwrap();
        // 4 diagonal + 6 straight moves.
        assert_eq!(p.cells.len(), 11);
        let t = Trajectory::from_cells(map.geometry(), &p.cells, Provenance::Ioc).unwrap();
        let straight = map.geometry().center_of(Cell::new(0, 0)).distance(map.geometry().center_of(Cell::new(10, 4)));
        assert!(t.length() - straight <= std::f64::consts::SQRT_2 * 0.5);
    }

    #[test]
    fn ties_break_toward_lower_rows() {
        // Two equal-cost routes around a blocked middle cell.
        let g = geom(3, 3);
        let mut passable = vec![true; 9];
        passable[4] = false;
        let map = RewardMap::new(g, vec![0.0; 9], passable).unwrap();
        let p = plan_ioc_cells(&map, Cell::new(0, 1), Cell::new(2, 1)).unwrap();
        assert_eq!(p.cells[1].row, 0);
    }

    #[test]
    fn plan_errors() {
        let g = geom(4, 3);
        let passable: Vec<bool> = (0..12).map(|i| i % 4 != 2).collect();
        let map = RewardMap::new(g, vec![0.0; 12], passable).unwrap();
        assert!(matches!(plan_ioc(&map, Cell::new(0, 0), Cell::new(3, 0)), Err(Error::Unreachable { .. })));
        assert!(matches!(plan_ioc(&map, Cell::new(0, 0), Cell::new(2, 0)), Err(Error::Impassable(_))));
        assert!(matches!(plan_ioc(&map, Cell::new(0, 0), Cell::new(9, 0)), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn shifted_max_cost_ignores_reward_shift() {
        let g = geom(9, 7);
        let vals: Vec<f64> = (0..63).map(|i| ((i * 37) % 11) as f64 * 0.4 - 2.0).collect();
        let a = RewardMap::new(g, vals, vec![true; 63]).unwrap();
        let plan = |m: &RewardMap| plan_ioc_cells_with(m, Cell::new(0, 0), Cell::new(8, 6), IocCost::ShiftedMax).unwrap();
        assert_eq!(plan(&a).cells, plan(&a.shifted(17.5)).cells);
    }

    #[test]
    fn cost_modes_differ_on_longer_paths() {
        // Row 0 at -1, everything else at -0.9. Direct along row 0 totals 4;
        // the detour through row 1 totals 0.9(2 + √2) + √2 ≈ 4.49. The
        // shifted cost charges only the 0.1 gap to R_max, so it detours.
        let g = geom(5, 3);
        let vals: Vec<f64> = (0..15).map(|i| if i < 5 { -1.0 } else { -0.9 }).collect();
        let map = RewardMap::new(g, vals, vec![true; 15]).unwrap();
        let direct = plan_ioc_cells(&map, Cell::new(0, 0), Cell::new(4, 0)).unwrap();
        assert!(direct.cells.iter().all(|c| c.row == 0));
        assert!((direct.cost - 4.0).abs() < 1e-4);
        let shifted = plan_ioc_cells_with(&map, Cell::new(0, 0), Cell::new(4, 0), IocCost::ShiftedMax).unwrap();
        assert!(shifted.cells.iter().any(|c| c.row == 1));
    }

    #[test]
    fn baseline_on_empty_map_is_straight() {
        let g = geom(10, 10);
        let op = OpacityLayer::new(g, vec![0.0; 100], vec![false; 100]).unwrap();
        let p = plan_baseline_cells(&op, Cell::new(1, 5), Cell::new(8, 5), &BaselineParams::default()).unwrap();
        assert!(p.cells.iter().all(|c| c.row == 5));
        assert!((p.cost - 7.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_routes_through_gap_clear_of_inflation() {
        let g = geom(21, 15);
        let gap = 8..=12;
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let c = g.cell(i);
                if c.row == 7 && !gap.contains(&c.col) { 1.0 } else { 0.0 }
            })
            .collect();
        let op = OpacityLayer::new(g, vals, vec![false; g.len()]).unwrap();
        let p = plan_baseline_cells(&op, Cell::new(2, 1), Cell::new(2, 13), &BaselineParams::default()).unwrap();
        let crossing = p.cells.iter().find(|c| c.row == 7).unwrap();
        assert_eq!(crossing.col, 10);
        let costs = baseline_costs(&op, &BaselineParams::default());
        assert!(p.cells.iter().all(|c| costs[g.index(*c).unwrap()].is_some()));
    }

    #[test]
    fn baseline_rejects_inflated_endpoints() {
        let g = geom(10, 10);
        let vals: Vec<f64> = (0..100).map(|i| if i == 55 { 1.0 } else { 0.0 }).collect();
        let op = OpacityLayer::new(g, vals, vec![false; 100]).unwrap();
        let r = plan_baseline(&op, Cell::new(4, 5), Cell::new(0, 0), &BaselineParams::default());
        assert!(matches!(r, Err(Error::Impassable(_))));
    }

    #[test]
    fn densify_arithmetic() {
        let t = Trajectory::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], None, Provenance::Oracle).unwrap();
        let d = densify(&t, 0.25).unwrap();
        assert_eq!(d.len(), 5);
        assert_eq!(d.points()[2], Point::new(0.5, 0.0));
        let single = Trajectory::new(vec![Point::new(3.0, 4.0)], None, Provenance::Oracle).unwrap();
        assert_eq!(densify(&single, 0.25).unwrap(), single);
        assert!(densify(&t, 0.0).is_err());
    }

    #[test]
    fn densify_keeps_endpoints_and_length() {
        let t = Trajectory::new(
            vec![Point::new(0.0, 0.0), Point::new(1.3, 0.0), Point::new(1.3, 0.7), Point::new(2.0, 2.0)],
            Some(vec![0.0, 1.0, 2.0, 4.0]),
            Provenance::Ioc,
        )
        .unwrap();
        let d = densify(&t, 0.25).unwrap();
        assert_eq!(d.points()[0], t.points()[0]);
        assert_eq!(d.points().last(), t.points().last());
        assert!((d.length() - t.length()).abs() < 0.25);
        assert!(d.points().windows(2).all(|w| w[0].distance(w[1]) <= 0.25 + 1e-12));
        assert_eq!(d.times().unwrap().last(), Some(&4.0));
    }

    #[test]
    fn csv_round_trip() {
        let t = Trajectory::new(vec![Point::new(0.25, 0.75), Point::new(0.75, 1.25)], None, Provenance::Ioc).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("t_s,x_m,y_m\n0,0.25,0.75\n"));
        let back = Trajectory::from_csv(&csv, Provenance::Ioc).unwrap();
        assert_eq!(back.points(), t.points());
        assert_eq!(back.to_csv(), csv);
        assert!(Trajectory::from_csv("a,b,c\n", Provenance::Ioc).is_err());
        assert!(Trajectory::from_csv("t_s,x_m,y_m\n1,2\n", Provenance::Ioc).is_err());
    }

    #[test]
    fn rasterize_snaps_and_truncates() {
        let g = geom(10, 10);
        let cells = rasterize(&g, &[Point::new(0.25, 0.25), Point::new(2.25, 1.25), Point::new(2.3, 1.3)]).unwrap();
        assert_eq!(cells[0], Cell::new(0, 0));
        assert_eq!(*cells.last().unwrap(), Cell::new(4, 2));
        assert!(cells.windows(2).all(|w| w[0].is_adjacent(w[1])));
        // Wiggling back into the final cell ends the path at its first arrival.
        let back = rasterize(&g, &[Point::new(0.25, 0.25), Point::new(1.75, 0.25), Point::new(0.75, 0.25)]).unwrap();
        assert_eq!(back, vec![Cell::new(0, 0), Cell::new(1, 0)]);
        assert!(matches!(rasterize(&g, &[Point::new(0.25, 0.25)]), Err(Error::InvalidTrajectory(_))));
        assert!(matches!(
            rasterize(&g, &[Point::new(0.25, 0.25), Point::new(-1.0, 0.25)]),
            Err(Error::OutOfBounds(_))
        ));
    }
}
