//! HTTP service over a workbench workspace.
//!
//! Bodies are JSON unless noted. Errors return
//! `{"error": {"code": "<code>", "message": "<text>"}}`: 400 for malformed
//! input (`bad_request`, `malformed_polyline`, `invalid_id`, ...), 404
//! `not_found`, 409 `model_busy` / `already_exists`, 422 for requests that
//! parse but cannot be honored (`schema_mismatch`, `dimension_mismatch`,
//! `unreachable`, `invalid_demonstration`, `no_demonstrations`).
//!
//! | method | path | body / query | response |
//! |---|---|---|---|
//! | GET | `/health` | | `{status}` |
//! | GET | `/environments` | | `{ids}` |
//! | POST | `/environments` | `{id?, spec}` or `{id?, world: {kind: road\|covert\|zod\|zod-training, seed, behavior?}}` | 201 environment |
//! | GET | `/environments/{id}` | | `{id, geometry, seed, zods, layers: [{kind, cells}], has_unknown}` |
//! | GET | `/environments/{id}/layers/{name}` | name: obstacle, road, grass, avoidance, unknown, opacity | matrix |
//! | GET | `/environments/{id}/features` | `?descriptor=road/r3` | matrix |
//! | GET | `/environments/{id}/reward` | `?model=M` | matrix, `null` on obstacles |
//! | PUT | `/environments/{id}/zods` | `{zods: [{center_x_m, center_y_m, radius_m}]}` | environment |
//! | GET | `/demos` | | `{ids}` |
//! | POST | `/demos` | `{id?, environment, points: [{x, y}], source?}` | 201 `{id, source, points, length_m}` |
//! | GET, DELETE | `/demos/{id}` | | demo, 204 |
//! | GET | `/models`, `/models/{id}` | | `{ids}`, model file |
//! | POST | `/jobs` | `{model, schema?, init?: warm\|random, seed?, budget_s?, max_iterations?, demos?}` | 202 job |
//! | GET | `/jobs`, `/jobs/{id}` | | job(s) |
//! | POST | `/jobs/{id}/cancel` | | job |
//! | GET | `/jobs/{id}/events` | | `application/x-ndjson` event lines |
//! | POST | `/plans` | `{id?, environment, planner: ioc\|baseline, model?, from: {x, y}, to: {x, y}, baseline?}` | 201 `{id, provenance, cells, points, cost, length_m}` |
//! | GET, POST | `/trajectories` | `{id?, provenance, points, times?}` | `{ids}`, 201 trajectory |
//! | GET | `/trajectories/{id}` | | `{id, provenance, points, times, length_m}` |
//! | GET | `/mhd` | `?candidate=A&reference=B&mode=directed\|symmetric&step=0.25` | `{candidate, reference, mode, step_m, mhd_m}` |
//! | GET, POST | `/reports` | `{id?, spec, model, trials?}` | `{ids}`, 201 `{id, results, table}` |
//! | GET | `/reports/{id}` | | `{id, results, table}` |
//! | GET | `/training-log` | | training log records |
//!
//! A matrix is `{name, geometry, rows}` with `rows[r][c]` the value at cell
//! `(c, r)`, row 0 at the grid origin. A job is `{id, model, init, budget_s,
//! max_iterations, demo_ids, status, progress, stop_reason, error}` with
//! `status` one of queued, running, done, cancelled, failed. Event lines are
//! `{"event": "progress", iteration, gradient_norm, log_likelihood,
//! elapsed_s}` or `{"event": "status", status, stop_reason?, error?}`; the
//! stream ends after a terminal status.

pub mod api;
pub mod error;
pub mod jobs;
pub mod workspace;

use std::net::SocketAddr;
use std::path::PathBuf;

pub use api::{router, AppState};
pub use error::{ServiceError, ServiceResult};
pub use workspace::Workspace;

/// Environment variable that overrides the workspace root.
pub const WORKSPACE_ENV: &str = "NAVLEARN_WORKSPACE";
pub const DEFAULT_PORT: u16 = 8080;

/// Open the workspace and serve until the process ends.
pub async fn serve(root: PathBuf, addr: SocketAddr) -> ServiceResult<()> {
    let state = AppState::new(Workspace::open(root)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await?;
    Ok(())
}
