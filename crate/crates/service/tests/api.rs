use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use navlearn_core::environment::Environment;
use navlearn_core::features::LayerKind;
use navlearn_core::geometry::{Cell, Point};
use navlearn_core::scenario::{oracle_path, Behavior};
use navlearn_service::{router, AppState, Workspace};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &std::path::Path) -> Router {
    router(AppState::new(Workspace::open(dir).unwrap()))
}

async fn raw(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = raw(app, method, uri, body).await;
    let v = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap() };
    (status, v)
}

/// Follow a job's event stream to its end and return the lines.
async fn wait_job(app: &Router, job: &str) -> Vec<Value> {
    let (status, text) = raw(app, Method::GET, &format!("/jobs/{job}/events"), None).await;
    assert_eq!(status, StatusCode::OK);
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn pts(env: &Environment, cells: &[Cell]) -> Value {
    let g = env.geometry();
    json!(cells.iter().map(|c| g.center_of(*c)).collect::<Vec<Point>>())
}

fn load_env(dir: &std::path::Path, id: &str) -> Environment {
    Environment::load(&dir.join(format!("environments/{id}.json"))).unwrap()
}

fn avoidance_hits(env: &Environment, cells: &Value) -> usize {
    let avoid = env.layer(LayerKind::Avoidance);
    cells
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| avoid.get(Cell::new(c["col"].as_i64().unwrap() as i32, c["row"].as_i64().unwrap() as i32)) == Some(true))
        .count()
}

#[tokio::test(flavor = "multi_thread")]
async fn environments_and_layers() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = call(&app, Method::POST, "/environments", Some(json!({"id": "z", "world": {"kind": "zod", "seed": 1}}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["geometry"]["width"], 160);
    let (s, v) = call(&app, Method::POST, "/environments", Some(json!({"id": "z", "world": {"kind": "zod", "seed": 1}}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::CONFLICT, Some("already_exists")));

    let (s, m) = call(&app, Method::GET, "/environments/z/layers/road", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(m["rows"].as_array().unwrap().len(), 60);
    assert_eq!(m["rows"][0].as_array().unwrap().len(), 160);
    let (s, m) = call(&app, Method::GET, "/environments/z/features?descriptor=road/r3", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(m["name"], "road/r3");

    let (s, v) = call(&app, Method::GET, "/environments/nope", None).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));
    let (s, _) = call(&app, Method::GET, "/environments/z/layers/water", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, v) = call(&app, Method::POST, "/environments", Some(json!({"world": {"kind": "ocean", "seed": 1}}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));

    // ZOD edits regenerate the avoidance layer.
    let (s, v) = call(&app, Method::PUT, "/environments/z/zods", Some(json!({"zods": []}))).await;
    assert_eq!(s, StatusCode::OK);
    let avoid = v["layers"].as_array().unwrap().iter().find(|l| l["kind"] == "avoidance").unwrap();
    assert_eq!(avoid["cells"], 0);
    let zods = json!({"zods": [{"center_x_m": 20.0, "center_y_m": 15.0, "radius_m": 2.0}]});
    let (_, v) = call(&app, Method::PUT, "/environments/z/zods", Some(zods)).await;
    let avoid = v["layers"].as_array().unwrap().iter().find(|l| l["kind"] == "avoidance").unwrap();
    assert!(avoid["cells"].as_u64().unwrap() > 40);
    assert_eq!(load_env(dir.path(), "z").zods().len(), 1);
}

#[tokio::test(flavor = "multi_thread")]
async fn demonstrations_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    call(&app, Method::POST, "/environments", Some(json!({"id": "c", "world": {"kind": "covert", "seed": 0}}))).await;
    let env = load_env(dir.path(), "c");

    let one = json!({"environment": "c", "points": [{"x": 5.0, "y": 5.0}]});
    let (s, v) = call(&app, Method::POST, "/demos", Some(one)).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("malformed_polyline")));
    let outside = json!({"environment": "c", "points": [{"x": 5.0, "y": 5.0}, {"x": 500.0, "y": 5.0}]});
    let (s, v) = call(&app, Method::POST, "/demos", Some(outside)).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("malformed_polyline")));
    let through = json!({"environment": "c", "points": [{"x": 30.0, "y": 2.0}, {"x": 30.0, "y": 38.0}]});
    let (s, v) = call(&app, Method::POST, "/demos", Some(through)).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("invalid_demonstration")));
    let bad = json!({"environment": "c", "points": "nope"});
    assert_eq!(call(&app, Method::POST, "/demos", Some(bad)).await.0, StatusCode::BAD_REQUEST);

    let y = env.geometry().center_of(Cell::new(0, 26)).y;
    let ok = json!({"id": "d1", "environment": "c", "points": [{"x": 4.0, "y": y}, {"x": 12.0, "y": y}]});
    let (s, v) = call(&app, Method::POST, "/demos", Some(ok)).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["source"], "human-ui");
    assert_eq!(v["points"].as_array().unwrap().len(), 17);
    let (s, v) = call(&app, Method::GET, "/demos", None).await;
    assert_eq!((s, v["ids"].clone()), (StatusCode::OK, json!(["d1"])));
    assert_eq!(call(&app, Method::DELETE, "/demos/d1", None).await.0, StatusCode::NO_CONTENT);
    assert_eq!(call(&app, Method::DELETE, "/demos/d1", None).await.0, StatusCode::NOT_FOUND);
}

async fn road_demos(app: &Router, dir: &std::path::Path, env_id: &str, n: usize) -> Environment {
    let env = load_env(dir, env_id);
    let spec = navlearn_core::worlds::road_world(0);
    for p in spec.training_pairs.iter().take(n) {
        let path = oracle_path(&env, Behavior::EdgeOfRoad, spec.cell(p.i), spec.cell(p.g)).unwrap();
        let body = json!({"environment": env_id, "points": pts(&env, &path.cells), "source": "oracle"});
        assert_eq!(call(app, Method::POST, "/demos", Some(body)).await.0, StatusCode::CREATED);
    }
    env
}

#[tokio::test(flavor = "multi_thread")]
async fn training_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    call(&app, Method::POST, "/environments", Some(json!({"id": "r", "world": {"kind": "road", "seed": 0}}))).await;

    let (s, v) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "standard"}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("no_demonstrations")));
    road_demos(&app, dir.path(), "r", 3).await;
    let (s, v) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m"}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));

    // Cold start; a second job on the same model is rejected while it runs.
    let (s, job) = call(
        &app,
        Method::POST,
        "/jobs",
        Some(json!({"model": "m", "schema": "standard", "seed": 3, "max_iterations": 200, "budget_s": 60})),
    )
    .await;
    assert_eq!(s, StatusCode::ACCEPTED);
    assert_eq!(job["init"], "random");
    let (s, v) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "standard"}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::CONFLICT, Some("model_busy")));
    let events = wait_job(&app, job["id"].as_str().unwrap()).await;
    assert_eq!(events[0]["status"], "queued");
    assert!(events.iter().any(|e| e["event"] == "progress" && e["gradient_norm"].is_number()));
    let last = events.last().unwrap();
    assert_eq!((last["event"].as_str(), last["status"].as_str()), (Some("status"), Some("done")));
    let (_, model) = call(&app, Method::GET, "/models/m", None).await;
    assert_eq!(model["meta"]["demo_ids"].as_array().unwrap().len(), 3);

    // Plan before and after a warm retrain with one more demonstration.
    let plan = json!({"environment": "r", "planner": "ioc", "model": "m", "from": {"x": 6.25, "y": 20.25}, "to": {"x": 60.25, "y": 50.25}});
    let (s, before) = call(&app, Method::POST, "/plans", Some(plan.clone())).await;
    assert_eq!(s, StatusCode::CREATED);
    let theta_before = model["theta"].clone();
    road_demos(&app, dir.path(), "r", 4).await;
    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "budget_s": 30, "max_iterations": 60}))).await;
    assert_eq!(job["init"], "warm");
    assert_eq!(job["demo_ids"].as_array().unwrap().len(), 7);
    let events = wait_job(&app, job["id"].as_str().unwrap()).await;
    assert_eq!(events.last().unwrap()["status"], "done");
    let (_, model) = call(&app, Method::GET, "/models/m", None).await;
    assert_eq!(model["meta"]["demo_ids"].as_array().unwrap().len(), 7);
    assert_eq!(model["meta"]["init"], "warm");
    let (_, after) = call(&app, Method::POST, "/plans", Some(plan)).await;
    if model["theta"] == theta_before {
        assert_eq!(before["cells"], after["cells"]);
    }

    // Schema mismatch and missing ids.
    let (s, v) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "covert"}))).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("schema_mismatch")));
    let (s, _) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "demos": ["ghost"]}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    // MHD between stored trajectories and against a demonstration.
    let base = json!({"environment": "r", "planner": "baseline", "from": {"x": 6.25, "y": 20.25}, "to": {"x": 60.25, "y": 50.25}});
    let (_, b) = call(&app, Method::POST, "/plans", Some(base)).await;
    let uri = format!("/mhd?candidate={}&reference={}", after["id"].as_str().unwrap(), after["id"].as_str().unwrap());
    let (s, v) = call(&app, Method::GET, &uri, None).await;
    assert_eq!((s, v["mhd_m"].as_f64()), (StatusCode::OK, Some(0.0)));
    let uri = format!("/mhd?candidate={}&reference=demo-1&mode=symmetric", b["id"].as_str().unwrap());
    let (s, v) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["mhd_m"].as_f64().unwrap() > 0.0);
    assert_eq!(call(&app, Method::GET, "/mhd?candidate=x&reference=y", None).await.0, StatusCode::NOT_FOUND);

    let (_, log) = call(&app, Method::GET, "/training-log", None).await;
    assert_eq!(log.as_array().unwrap().len(), 2);

    let (s, reward) = call(&app, Method::GET, "/environments/r/reward?model=m", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(reward["rows"].as_array().unwrap().len(), 120);
}

#[tokio::test(flavor = "multi_thread")]
async fn cancelled_job_keeps_weights() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    call(&app, Method::POST, "/environments", Some(json!({"id": "r", "world": {"kind": "road", "seed": 1}}))).await;
    road_demos(&app, dir.path(), "r", 2).await;
    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "edge", "max_iterations": 5}))).await;
    wait_job(&app, job["id"].as_str().unwrap()).await;
    let before = std::fs::read(dir.path().join("models/m.json")).unwrap();

    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "budget_s": 60, "max_iterations": 100000}))).await;
    let id = job["id"].as_str().unwrap().to_string();
    loop {
        let (_, v) = call(&app, Method::GET, &format!("/jobs/{id}"), None).await;
        if v["progress"]["iteration"].as_u64().unwrap_or(0) >= 2 {
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
    }
    let (s, _) = call(&app, Method::POST, &format!("/jobs/{id}/cancel"), None).await;
    assert_eq!(s, StatusCode::OK);
    let events = wait_job(&app, &id).await;
    assert_eq!(events.last().unwrap()["status"], "cancelled");
    let (_, v) = call(&app, Method::GET, &format!("/jobs/{id}"), None).await;
    assert_eq!(v["status"], "cancelled");
    assert_eq!(std::fs::read(dir.path().join("models/m.json")).unwrap(), before);
    let (s, _) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "max_iterations": 1}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
}

#[tokio::test(flavor = "multi_thread")]
async fn retraining_avoids_a_new_zod() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    call(&app, Method::POST, "/environments", Some(json!({"id": "f", "world": {"kind": "zod", "seed": 4}}))).await;
    call(&app, Method::PUT, "/environments/f/zods", Some(json!({"zods": []}))).await;
    let env = load_env(dir.path(), "f");
    let spec = navlearn_core::worlds::zod_world(4);
    let w = &spec.waypoints[0];
    let (i, g) = (spec.cell(w.i), spec.cell(w.g));

    // Road-following demonstrations, then a plan that drives straight down the road.
    for (a, b) in [(10.0, 40.0), (60.0, 30.0)] {
        let ia = spec.cell(Point::new(a, w.i.y));
        let ib = spec.cell(Point::new(b, w.i.y));
        let path = oracle_path(&env, Behavior::ZodAvoidance, ia, ib).unwrap();
        call(&app, Method::POST, "/demos", Some(json!({"environment": "f", "points": pts(&env, &path.cells)}))).await;
    }
    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "standard", "seed": 2, "max_iterations": 150}))).await;
    wait_job(&app, job["id"].as_str().unwrap()).await;
    let plan = json!({"environment": "f", "planner": "ioc", "model": "m", "from": w.i, "to": w.g});
    let (_, first) = call(&app, Method::POST, "/plans", Some(plan.clone())).await;

    // A ZOD on the planned path; the current model drives through it.
    let mid = &first["points"][first["points"].as_array().unwrap().len() / 2];
    let zod = json!({"zods": [{"center_x_m": mid["x"], "center_y_m": mid["y"], "radius_m": 3.0}]});
    call(&app, Method::PUT, "/environments/f/zods", Some(zod)).await;
    let env = load_env(dir.path(), "f");
    let (_, crossing) = call(&app, Method::POST, "/plans", Some(plan.clone())).await;
    assert!(avoidance_hits(&env, &crossing["cells"]) > 0);

    // Two avoidance demonstrations and a warm 30 s retrain.
    let cx = mid["x"].as_f64().unwrap();
    for (a, b) in [(cx - 12.0, cx + 12.0), (cx + 12.0, cx - 12.0)] {
        let path = oracle_path(&env, Behavior::ZodAvoidance, spec.cell(Point::new(a, w.i.y)), spec.cell(Point::new(b, w.i.y))).unwrap();
        assert_eq!(avoidance_hits(&env, &json!(path.cells)), 0);
        call(&app, Method::POST, "/demos", Some(json!({"environment": "f", "points": pts(&env, &path.cells)}))).await;
    }
    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "budget_s": 30}))).await;
    let t = std::time::Instant::now();
    let events = wait_job(&app, job["id"].as_str().unwrap()).await;
    assert!(t.elapsed().as_secs_f64() < 35.0);
    assert_eq!(events.last().unwrap()["status"], "done");
    let (_, replanned) = call(&app, Method::POST, "/plans", Some(plan)).await;
    assert_eq!(avoidance_hits(&env, &replanned["cells"]), 0);
    let _ = (i, g);
}

#[tokio::test(flavor = "multi_thread")]
async fn reports_summarize_trials() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    call(&app, Method::POST, "/environments", Some(json!({"id": "r", "world": {"kind": "road", "seed": 2}}))).await;
    road_demos(&app, dir.path(), "r", 2).await;
    let (_, job) = call(&app, Method::POST, "/jobs", Some(json!({"model": "m", "schema": "standard", "max_iterations": 10}))).await;
    wait_job(&app, job["id"].as_str().unwrap()).await;
    let spec = navlearn_core::worlds::road_world(2);
    let (s, v) = call(&app, Method::POST, "/reports", Some(json!({"id": "rep", "spec": spec, "model": "m"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert!(v["table"].as_str().unwrap().contains("mean"));
    assert!(dir.path().join("reports/rep/metrics.csv").is_file());
    let (s, again) = call(&app, Method::GET, "/reports/rep", None).await;
    assert_eq!((s, &again["results"]), (StatusCode::OK, &v["results"]));
    let (s, v) = call(&app, Method::POST, "/reports", Some(json!({"spec": spec, "model": "m", "trials": 1}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert!(v["results"][0]["mean"].is_null());
}
