//! Modified Hausdorff distance and the mean/median/best trial summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::planner::{densify, Trajectory};

/// Resample step applied to both trajectories before comparison.
pub const MHD_STEP_M: f64 = 0.25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MhdMode {
    /// Mean over the candidate's points of the distance to the reference.
    #[default]
    Directed,
    /// Larger of the two directed distances.
    Symmetric,
}

fn directed(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let sum: f64 = a
        .iter()
        .map(|p| b.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(sum / a.len() as f64)
}

/// Directed MHD from point set `a` to reference set `b`, no resampling.
pub fn mhd_points(a: &[Point], b: &[Point]) -> Result<f64> {
    directed(a, b)
}

/// MHD of `candidate` against `reference` (ground truth).
pub fn mhd(candidate: &Trajectory, reference: &Trajectory) -> Result<f64> {
    directed(candidate.points(), reference.points())
}

pub fn mhd_with(candidate: &Trajectory, reference: &Trajectory, mode: MhdMode) -> Result<f64> {
    match mode {
        MhdMode::Directed => mhd(candidate, reference),
        MhdMode::Symmetric => Ok(mhd(candidate, reference)?.max(mhd(reference, candidate)?)),
    }
}

/// Densify both at `step` meters, then compare.
pub fn mhd_resampled(candidate: &Trajectory, reference: &Trajectory, step: f64, mode: MhdMode) -> Result<f64> {
    mhd_with(&densify(candidate, step)?, &densify(reference, step)?, mode)
}

/// Translate `traj` so its first point coincides with `anchor`.
pub fn realign_start(traj: &Trajectory, anchor: Point) -> Result<Trajectory> {
    let first = traj.points()[0];
    let (dx, dy) = (anchor.x - first.x, anchor.y - first.y);
    Trajectory::new(
        traj.points().iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect(),
        traj.times().map(<[f64]>::to_vec),
        traj.provenance(),
    )
}

/// One row of a metric table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetric {
    pub site: String,
    pub planner: String,
    pub trial: usize,
    pub mhd_m: f64,
}

/// Summary for one `(site, planner)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MhdResult {
    pub site: String,
    pub planner: String,
    pub trials: Vec<f64>,
    /// Absent for single-trial sites.
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub best: f64,
    /// Lowest mean at the site (lowest best when no means exist).
    pub flagged: bool,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub fn summarize(rows: &[TrialMetric]) -> Result<Vec<MhdResult>> {
    if rows.is_empty() {
        return Err(Error::NoTrials);
    }
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if !(r.mhd_m >= 0.0 && r.mhd_m.is_finite()) {
            return Err(Error::Format(format!("invalid MHD {} for {} {}", r.mhd_m, r.site, r.planner)));
        }
        groups.entry((r.site.clone(), r.planner.clone())).or_default().push(r.mhd_m);
    }
    let mut out: Vec<MhdResult> = groups
        .into_iter()
        .map(|((site, planner), trials)| {
            let mut sorted = trials.clone();
            sorted.sort_by(f64::total_cmp);
            let multi = trials.len() > 1;
            MhdResult {
                site,
                planner,
                mean: multi.then(|| trials.iter().sum::<f64>() / trials.len() as f64),
                median: multi.then(|| median(&sorted)),
                best: sorted[0],
                trials,
                flagged: false,
            }
        })
        .collect();
    let mut start = 0;
    while start < out.len() {
        let end = start + out[start..].iter().take_while(|r| r.site == out[start].site).count();
        let key = |r: &MhdResult| r.mean.unwrap_or(r.best);
        let best = out[start..end].iter().map(key).fold(f64::INFINITY, f64::min);
        for r in &mut out[start..end] {
            r.flagged = key(r) == best;
        }
        start = end;
    }
    Ok(out)
}

/// Rows as `site,planner,trial,mhd_m`.
pub fn metrics_csv(rows: &[TrialMetric]) -> String {
    let mut out = String::from("site,planner,trial,mhd_m\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.site, r.planner, r.trial, r.mhd_m);
    }
    out
}

pub fn parse_metrics_csv(s: &str) -> Result<Vec<TrialMetric>> {
    let mut lines = s.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "site,planner,trial,mhd_m" => {}
        other => return Err(Error::Format(format!("unexpected metrics header {other:?}"))),
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let [site, planner, trial, mhd] = f[..] else {
                return Err(Error::Format(format!("bad metrics row `{l}`")));
            };
            Ok(TrialMetric {
                site: site.into(),
                planner: planner.into(),
                trial: trial.parse().map_err(|_| Error::Format(format!("bad trial in `{l}`")))?,
                mhd_m: mhd.parse().map_err(|_| Error::Format(format!("bad mhd in `{l}`")))?,
            })
        })
        .collect()
}

/// Aligned text table; flagged rows are marked with `*`.
pub fn format_table(results: &[MhdResult]) -> String {
    let fmt = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |x| format!("{x:.3}"));
    let rows: Vec<[String; 5]> = results
        .iter()
        .map(|r| {
            [
                r.site.clone(),
                format!("{}{}", r.planner, if r.flagged { " *" } else { "" }),
                fmt(r.mean),
                fmt(r.median),
                format!("{:.3}", r.best),
            ]
        })
        .collect();
    let header = ["site", "planner", "mean", "median", "best"].map(String::from);
    let mut widths = header.clone().map(|h| h.len());
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = r
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}
