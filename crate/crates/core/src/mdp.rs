//! Deterministic 8-connected grid MDP with an absorbing goal, the soft value
//! recursion and forward expected state visitation.
//!
//! The path set is every king-move walk from the start that first enters the
//! goal within `horizon` transitions. With `V_k` the soft value given `k`
//! remaining transitions,
//!
//! ```text
//! V_0(s) = 0 if s = goal else -inf
//! V_k(goal) = 0
//! V_k(s) = R(s) + log Σ_{s' ∈ succ(s)} exp V_{k-1}(s')
//! ```
//!
//! `exp V_H(start)` is the partition function over that path set (goal reward
//! excluded) and the time-indexed policy
//! `π_t(s'|s) = exp(R(s) + V_{H-t-1}(s') - V_{H-t}(s))` samples paths with
//! probability proportional to `exp R(ζ)`.

use crate::error::{Error, Result};
use crate::geometry::{Cell, GridGeometry, KING_MOVES};

const NONE: u32 = u32::MAX;

/// Grid MDP: states are cells, actions are king moves into passable cells.
#[derive(Clone, Debug)]
pub struct GridMdp {
    geometry: GridGeometry,
    passable: Vec<bool>,
    goal: usize,
    horizon: usize,
    /// Successor table, 8 slots per cell, `NONE` for removed actions.
    successors: Vec<[u32; 8]>,
}

impl GridMdp {
    pub fn new(geometry: GridGeometry, passable: Vec<bool>, goal: Cell, horizon: usize) -> Result<Self> {
        if passable.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                found: passable.len(),
            });
        }
        if horizon == 0 {
            return Err(Error::InvalidBudget("horizon must be at least 1".into()));
        }
        let goal_idx = geometry.checked_index(goal)?;
        if !passable[goal_idx] {
            return Err(Error::Impassable(goal));
        }
        let successors = (0..geometry.len())
            .map(|i| {
                let mut out = [NONE; 8];
                if passable[i] && i != goal_idx {
                    let c = geometry.cell(i);
                    for (a, &(dc, dr)) in KING_MOVES.iter().enumerate() {
                        if let Some(j) = geometry.index(c.offset(dc, dr)) {
                            if passable[j] {
                                out[a] = j as u32;
                            }
                        }
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            geometry,
            passable,
            goal: goal_idx,
            horizon,
            successors,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_passable(&self, index: usize) -> bool {
        self.passable[index]
    }

    /// Successor of `index` under king move `action`, if the action is available.
    pub fn successor(&self, index: usize, action: usize) -> Option<usize> {
        let j = self.successors[index][action];
        (j != NONE).then_some(j as usize)
    }

    /// Available actions; the goal only has the implicit stay action.
    pub fn actions(&self, index: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors[index]
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != NONE)
            .map(|(a, &j)| (a, j as usize))
    }
}

/// Soft value tables `V_0..=V_H` together with the reward they were built from.
#[derive(Clone, Debug)]
pub struct SoftValues {
    /// `tables[k]` is `V_k`, indexed by cell.
    tables: Vec<Vec<f64>>,
    reward: Vec<f64>,
}

impl SoftValues {
    pub fn horizon(&self) -> usize {
        self.tables.len() - 1
    }

    /// `V_k`, the soft value with `k` transitions remaining.
    pub fn table(&self, k: usize) -> &[f64] {
        &self.tables[k]
    }

    /// `V_H`.
    pub fn values(&self) -> &[f64] {
        &self.tables[self.horizon()]
    }

    pub fn reward(&self) -> &[f64] {
        &self.reward
    }

    /// Log partition function over paths from `start`, goal reward included.
    pub fn log_partition(&self, mdp: &GridMdp, start: usize) -> f64 {
        if start == mdp.goal() {
            self.reward[start]
        } else {
            self.values()[start] + self.reward[mdp.goal()]
        }
    }

    /// Action distribution at `index` with `remaining` transitions left, in
    /// [`KING_MOVES`] order. All zeros when the goal cannot be reached in time
    /// or `index` is the goal.
    pub fn policy_at(&self, mdp: &GridMdp, index: usize, remaining: usize) -> [f64; 8] {
        let mut p = [0.0; 8];
        if remaining == 0 || index == mdp.goal() {
            return p;
        }
        let next = &self.tables[remaining - 1];
        let norm = self.tables[remaining][index] - self.reward[index];
        if norm == f64::NEG_INFINITY {
            return p;
        }
        for (a, j) in mdp.actions(index) {
            p[a] = (next[j] - norm).exp();
        }
        p
    }

    /// Policy for the first step of a full-horizon rollout.
    pub fn stationary_policy(&self, mdp: &GridMdp, index: usize) -> [f64; 8] {
        self.policy_at(mdp, index, self.horizon())
    }
}

/// Soft backward recursion over `mdp.horizon()` sweeps.
pub fn soft_backward(mdp: &GridMdp, reward: &[f64]) -> Result<SoftValues> {
    let n = mdp.geometry.len();
    if reward.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: reward.len(),
        });
    }
    let mut v0 = vec![f64::NEG_INFINITY; n];
    v0[mdp.goal] = 0.0;
    let mut tables = Vec::with_capacity(mdp.horizon + 1);
    tables.push(v0);
    let mut buf = [0.0f64; 8];
    for k in 1..=mdp.horizon {
        let prev = &tables[k - 1];
        let mut cur = vec![f64::NEG_INFINITY; n];
        for (i, slot) in cur.iter_mut().enumerate() {
            if i == mdp.goal {
                *slot = 0.0;
                continue;
            }
            let mut len = 0;
            let mut m = f64::NEG_INFINITY;
            for &j in &mdp.successors[i] {
                if j != NONE {
                    let v = prev[j as usize];
                    buf[len] = v;
                    len += 1;
                    if v > m {
                        m = v;
                    }
                }
            }
            if m == f64::NEG_INFINITY {
                continue;
            }
            let s: f64 = buf[..len].iter().map(|&v| (v - m).exp()).sum();
            *slot = reward[i] + m + s.ln();
        }
        tables.push(cur);
    }
    Ok(SoftValues {
        tables,
        reward: reward.to_vec(),
    })
}

/// Expected visitation counts for one start under a soft policy.
#[derive(Clone, Debug)]
pub struct VisitationField {
    counts: Vec<f64>,
    /// Probability mass (in transit + absorbed) after each step.
    mass: Vec<f64>,
    absorbed: f64,
}

impl VisitationField {
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn mass_trace(&self) -> &[f64] {
        &self.mass
    }

    /// Probability of having reached the goal within the horizon.
    pub fn absorbed(&self) -> f64 {
        self.absorbed
    }

    /// `Σ_s D_s φ(s)` for a cell-major feature array of width `dim`.
    pub fn expected_features(&self, features: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, &d) in self.counts.iter().enumerate() {
            if d > 0.0 {
                for (o, f) in out.iter_mut().zip(&features[i * dim..(i + 1) * dim]) {
                    *o += d * f;
                }
            }
        }
        out
    }
}

/// Forward pass: `D^0 = δ(start)`, mass propagated with the time-indexed
/// policy, goal arrivals counted once and held. Sums `D^t` for `t < steps`;
/// `steps = horizon + 1` covers every path.
pub fn expected_visitation(mdp: &GridMdp, values: &SoftValues, start: Cell, steps: usize) -> Result<VisitationField> {
    let n = mdp.geometry.len();
    let s0 = mdp.geometry.checked_index(start)?;
    if !mdp.passable[s0] {
        return Err(Error::Impassable(start));
    }
    if steps == 0 {
        return Err(Error::InvalidBudget("visitation needs at least one step".into()));
    }
    let horizon = values.horizon();
    let mut counts = vec![0.0; n];
    let mut mass = Vec::with_capacity(steps);
    counts[s0] = 1.0;
    if s0 == mdp.goal {
        mass.push(1.0);
        return Ok(VisitationField {
            counts,
            mass,
            absorbed: 1.0,
        });
    }
    if values.values()[s0] == f64::NEG_INFINITY {
        return Err(Error::Unreachable {
            from: start,
            to: mdp.geometry.cell(mdp.goal),
        });
    }
    let mut cur = vec![0.0; n];
    cur[s0] = 1.0;
    let mut next = vec![0.0; n];
    let mut absorbed = 0.0;
    mass.push(1.0);
    for t in 0..steps.saturating_sub(1).min(horizon) {
        let remaining = horizon - t;
        let vnext = &values.tables[remaining - 1];
        let vcur = &values.tables[remaining];
        next.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let d = cur[i];
            if d == 0.0 {
                continue;
            }
            let norm = vcur[i] - values.reward[i];
            for &j in &mdp.successors[i] {
                if j == NONE {
                    continue;
                }
                let j = j as usize;
                let p = (vnext[j] - norm).exp();
                if p > 0.0 {
                    next[j] += d * p;
                }
            }
        }
        let arrived = next[mdp.goal];
        next[mdp.goal] = 0.0;
        absorbed += arrived;
        counts[mdp.goal] += arrived;
        let mut in_transit = 0.0;
        for i in 0..n {
            counts[i] += next[i];
            in_transit += next[i];
        }
        mass.push(in_transit + absorbed);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(VisitationField {
        counts,
        mass,
        absorbed,
    })
}
