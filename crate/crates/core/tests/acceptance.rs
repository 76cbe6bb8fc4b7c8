//! Release acceptance checks. Each criterion prints one PASS/FAIL line to
//! stderr (uncaptured), and the test fails if any criterion fails.

mod common;

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::Rng;
use tower::ServiceExt;

use wildrisk::cli::{session_state, Source};
use wildrisk::config::RunConfig;
use wildrisk::counterfactual::{pdsi_sweep, sweep, Scenario};
use wildrisk::eval::{metrics, ConfusionMatrix};
use wildrisk::features::{label_dynamic, label_static, FeatureTable, RiskLevel};
use wildrisk::grid::GeoPoint;
use wildrisk::ingest::FireIncident;
use wildrisk::models::{
    dual_objective, mlp_backprop_gradients, train, train_logreg_traced, train_svm, ForestConfig, LogRegConfig, ModelConfig,
    MlpParams, Params, SvmConfig, TrainedModel, Variant,
};
use wildrisk::sampling::{smote, SmoteConfig};
use wildrisk::seed;
use wildrisk::service::router;

use common::{ok, read_json, trained_workspace};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn metric_formulas() -> Check {
    let cm = ConfusionMatrix::binary(137, 97, 3177, 13557);
    let m = metrics(&cm).map_err(|e| e.to_string())?;
    let recall = m.per_class[1].recall;
    // independent oracle: recall = TP / (TP + FN), accuracy = (TP + TN) / N
    let want_recall = 137.0 / (137.0 + 97.0);
    let want_acc = (137.0 + 13557.0) / (137.0 + 97.0 + 3177.0 + 13557.0);
    ensure((recall - want_recall).abs() < 1e-12, || format!("recall {recall} vs oracle {want_recall}"))?;
    ensure((m.accuracy - want_acc).abs() < 1e-12, || format!("accuracy {} vs oracle {want_acc}", m.accuracy))?;
    ensure((recall - 0.5855).abs() <= 1e-4, || format!("recall {recall:.6} not within 1e-4 of 0.5855"))?;
    ensure((m.accuracy - 0.8070).abs() <= 1e-4, || format!("accuracy {:.6} not within 1e-4 of 0.8070", m.accuracy))?;
    Ok(format!("recall {recall:.4}, accuracy {:.4}", m.accuracy))
}

fn labeling() -> Check {
    let cases = [
        (0.0, RiskLevel::Low),
        (9.999, RiskLevel::Low),
        (10.0, RiskLevel::Medium),
        (4999.99, RiskLevel::Medium),
        (5000.0, RiskLevel::High),
        (1e7, RiskLevel::High),
    ];
    for (acres, want) in cases {
        let got = label_static(acres).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("static {acres} -> {got:?}, want {want:?}"))?;
    }
    ensure(label_static(-1.0).is_err(), || "negative area accepted".into())?;
    let fire = |acres: f64| FireIncident { id: "x".into(), year: 2015, location: GeoPoint::new(36.0, -120.0), burned_area: acres };
    for (acres, want) in [(299.99, 0u8), (300.0, 1), (300.01, 1), (0.0, 0)] {
        let got = label_dynamic([&fire(acres)], 300.0);
        ensure(got == want, || format!("dynamic {acres} -> {got}, want {want}"))?;
    }
    ensure(label_dynamic(std::iter::empty::<&FireIncident>(), 300.0) == 0, || "no fire labelled positive".into())?;
    ensure(label_dynamic([&fire(10.0), &fire(299.99)], 300.0) == 0, || "small fires must not add up".into())?;
    Ok("static 9.999/10/4999.99/5000, dynamic 299.99/300".into())
}

fn smote_balance() -> Check {
    let mut rng = seed::rng(2024);
    let mut synthetic = 0usize;
    for trial in 0..1000 {
        let d = rng.gen_range(1..=6);
        let n_min = rng.gen_range(1..=15);
        let n_maj = rng.gen_range(n_min + 1..=n_min + 40);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n_min + n_maj {
            x.push((0..d).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<f64>>());
            y.push(usize::from(i < n_min));
        }
        // shuffle label positions so the minority is not always first
        for i in (1..y.len()).rev() {
            let j = rng.gen_range(0..=i);
            y.swap(i, j);
        }
        let cfg = SmoteConfig { k_neighbors: rng.gen_range(1..=7), seed: trial };
        let out = smote(&x, &y, &cfg).map_err(|e| format!("trial {trial}: {e}"))?;
        let pos = out.y.iter().filter(|&&c| c == 1).count();
        let neg = out.y.len() - pos;
        ensure(pos == neg, || format!("trial {trial}: {pos} vs {neg} after balancing"))?;
        ensure(out.x[..out.n_original] == x[..], || format!("trial {trial}: originals altered"))?;
        for (s, &(a, b)) in out.x[out.n_original..].iter().zip(&out.parents) {
            ensure(y[a] == 1 && y[b] == 1, || format!("trial {trial}: parent not in minority"))?;
            for k in 0..d {
                let (lo, hi) = (x[a][k].min(x[b][k]), x[a][k].max(x[b][k]));
                ensure(s[k] >= lo && s[k] <= hi, || format!("trial {trial}: component {k} = {} outside [{lo}, {hi}]", s[k]))?;
            }
        }
        synthetic += out.synthetic_count();
    }
    Ok(format!("1000 sets, {synthetic} synthetic rows checked"))
}

fn mlp_gradients() -> Check {
    let eps = 1e-5;
    let mut rng = seed::rng(77);
    let mut worst: f64 = 0.0;
    for point in 0..20 {
        let classes = if point % 2 == 0 { 2 } else { 3 };
        let mut p = MlpParams::xavier(6, 36, classes, &mut rng);
        // move away from the initializer so biases are exercised too
        let flat: Vec<f64> = p.flatten().iter().map(|v| v + rng.gen_range(-0.5..0.5)).collect();
        p.set_flat(&flat);
        let x: Vec<Vec<f64>> = (0..8).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<usize> = (0..8).map(|_| rng.gen_range(0..classes)).collect();
        let (_, g) = mlp_backprop_gradients(&p, &x, &y);
        let analytic = g.flatten();
        let mut q = p.clone();
        for i in 0..flat.len() {
            let mut v = flat.clone();
            v[i] = flat[i] + eps;
            q.set_flat(&v);
            let up = q.loss(&x, &y);
            v[i] = flat[i] - eps;
            q.set_flat(&v);
            let down = q.loss(&x, &y);
            let numeric = (up - down) / (2.0 * eps);
            let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("20 points, max relative error {worst:.2e}"))
}

/// Best dual objective over a lattice of feasible α for a 4-point problem,
/// refined once around the coarse optimum.
fn brute_force_dual(x: &[Vec<f64>], ys: &[f64], gamma: f64, c: f64) -> f64 {
    let eval = |a: [f64; 3]| -> Option<f64> {
        // α3 from Σ α y = 0
        let a3 = -(a[0] * ys[0] + a[1] * ys[1] + a[2] * ys[2]) * ys[3];
        if !(-1e-12..=c + 1e-12).contains(&a3) {
            return None;
        }
        Some(dual_objective(x, ys, &[a[0], a[1], a[2], a3.clamp(0.0, c)], gamma))
    };
    let search = |center: [f64; 3], half: f64, steps: usize| -> ([f64; 3], f64) {
        let mut best = ([0.0; 3], f64::NEG_INFINITY);
        let axis = |m: f64| -> Vec<f64> {
            (0..=steps).map(|i| (m - half + 2.0 * half * i as f64 / steps as f64).clamp(0.0, c)).collect()
        };
        let (a0, a1, a2) = (axis(center[0]), axis(center[1]), axis(center[2]));
        for &u in &a0 {
            for &v in &a1 {
                for &w in &a2 {
                    if let Some(f) = eval([u, v, w]) {
                        if f > best.1 {
                            best = ([u, v, w], f);
                        }
                    }
                }
            }
        }
        best
    };
    let (coarse, _) = search([c / 2.0; 3], c / 2.0, 100);
    let (fine, _) = search(coarse, c / 50.0, 80);
    search(fine, c / 1000.0, 40).1
}

fn model_oracles() -> Check {
    let mut rng = seed::rng(5);
    // logistic regression: objective never increases
    let mut lr_checked = 0;
    for trial in 0..10 {
        let x: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let classes = if trial % 2 == 0 { 2 } else { 3 };
        let y: Vec<usize> = (0..60).map(|i| i % classes).collect();
        let (_, traces) = train_logreg_traced(&x, &y, classes, &LogRegConfig::default()).map_err(|e| e.to_string())?;
        for t in &traces {
            for w in t.windows(2) {
                ensure(w[1] <= w[0] + 1e-12, || format!("logreg objective rose from {} to {}", w[0], w[1]))?;
            }
            lr_checked += t.len();
        }
    }
    // SVM: box, balance and optimality against a brute-force dual
    let mut worst_gap: f64 = 0.0;
    for trial in 0..25 {
        let x: Vec<Vec<f64>> = (0..4).map(|_| vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]).collect();
        let y: Vec<usize> = vec![0, 1, usize::from(rng.gen_bool(0.5)), usize::from(rng.gen_bool(0.5))];
        let gamma = rng.gen_range(0.3..2.0);
        let cfg = SvmConfig { c: 1.0, gamma: Some(gamma), tol: 1e-6, ..Default::default() };
        let p = train_svm(&x, &y, &cfg, trial).map_err(|e| e.to_string())?;
        let ys: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();
        let mut alpha = vec![0.0; 4];
        for (&i, &a) in p.support_indices.iter().zip(&p.dual_coef) {
            alpha[i] = a * ys[i];
        }
        for &a in &alpha {
            ensure((-1e-12..=cfg.c + 1e-12).contains(&a), || format!("trial {trial}: alpha {a} outside [0, C]"))?;
        }
        let balance: f64 = alpha.iter().zip(&ys).map(|(a, y)| a * y).sum();
        ensure(balance.abs() < 1e-6, || format!("trial {trial}: sum alpha y = {balance:e}"))?;
        let got = dual_objective(&x, &ys, &alpha, gamma);
        let best = brute_force_dual(&x, &ys, gamma, cfg.c);
        let gap = (got - best).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap < 1e-3, || format!("trial {trial}: SMO objective {got} vs brute force {best}"))?;
    }
    // one unpruned tree memorizes distinct rows
    let x: Vec<Vec<f64>> = (0..150).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y: Vec<usize> = (0..150).map(|_| rng.gen_range(0..3)).collect();
    let cfg = ModelConfig { forest: ForestConfig { n_trees: 1, bootstrap: false, ..Default::default() }, ..Default::default() };
    let forest = train(Variant::RandomForest, &x, &y, 3, &cfg, 3).map_err(|e| e.to_string())?;
    ensure(matches!(&forest, Params::Forest(f) if f.trees.len() == 1), || "expected a single tree".into())?;
    let hits = x.iter().zip(&y).filter(|(r, &c)| wildrisk::models::argmax(&forest.predict_proba(r)) == c).count();
    ensure(hits == x.len(), || format!("single tree training accuracy {hits}/{}", x.len()))?;
    Ok(format!("{lr_checked} logreg steps, 25 SVM duals (max gap {worst_gap:.1e}), tree accuracy 1.0"))
}

fn end_to_end(dir: &std::path::Path) -> Check {
    let run = |sub: &str| -> std::result::Result<String, String> {
        let d = dir.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| e.to_string())?;
        ok(&d, &["synth", "--seed", "11", "--out", "region"]);
        ok(&d, &["assemble-dynamic", "--region", "region", "--out", "dynamic.csv"]);
        ok(&d, &["evaluate", "--table", "dynamic.csv", "--all", "--k", "5", "--smote-k", "5", "--seed", "42", "--out", "cv.json"]);
        std::fs::read_to_string(d.join("cv.json")).map_err(|e| e.to_string())
    };
    let first = run("first")?;
    let second = run("second")?;
    ensure(first == second, || "rerun with the same seed produced a different report".into())?;
    for f in ["region/incidents.csv", "region/predictors.csv", "region/county_pdsi.csv", "dynamic.csv"] {
        let a = std::fs::read(dir.join("first").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.join("second").join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{f} differs between reruns"))?;
    }
    let table = FeatureTable::read_csv(std::fs::File::open(dir.join("first/dynamic.csv")).unwrap()).map_err(|e| e.to_string())?;
    let (_, y) = table.xy();
    let rate = y.iter().filter(|&&c| c == 1).count() as f64 / y.len() as f64;
    ensure(table.len() == 2000 && (rate - 0.05).abs() < 0.01, || format!("{} rows, positive rate {rate}", table.len()))?;
    let report: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in report["reports"].as_array().ok_or("no reports")? {
        let variant = r["variant"].as_str().unwrap_or("?");
        let f1 = r["macro_f1"]["mean"].as_f64().ok_or("missing macro F1")?;
        ensure(r["folds"].as_array().is_some_and(|f| f.iter().all(|f| f["error"].is_null())), || format!("{variant}: a fold failed"))?;
        let floor = if variant == "mlp" { 0.80 } else { 0.70 };
        ensure(f1 >= floor, || format!("{variant} macro F1 {f1:.3} below {floor}"))?;
        parts.push(format!("{variant} {f1:.3}"));
    }
    ensure(parts.len() == 4, || "expected four variants".into())?;
    Ok(format!("macro F1 {}; rerun identical", parts.join(", ")))
}

fn counterfactual_direction(dir: &std::path::Path) -> Check {
    ok(dir, &["counterfactual", "--model", "model.json", "--region", "a", "--out", "sweep.csv"]);
    let text = std::fs::read_to_string(dir.join("sweep.csv")).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("scenario_kind,parameter,baseline_count,treated_count,delta"), || "bad sweep header".into())?;
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    let params: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    ensure(params == [0.0, 1.0, 1.5, 2.0, 3.0, 4.0], || format!("sweep parameters {params:?}"))?;
    let baseline: usize = rows[0][2].parse().unwrap();
    let treated: Vec<usize> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    ensure(treated[0] == baseline, || format!("delta 0 gives {} vs baseline {baseline}", treated[0]))?;
    ensure(treated.windows(2).all(|w| w[1] <= w[0]), || format!("counts not non-increasing: {treated:?}"))?;
    ensure(treated[5] < baseline, || format!("drought relief removed no risk: {treated:?}"))?;

    // identity scenarios on every year
    let model = TrainedModel::from_json(&std::fs::read_to_string(dir.join("model.json")).unwrap()).map_err(|e| e.to_string())?;
    let FeatureTable::Dynamic(rows) = FeatureTable::read_csv(std::fs::File::open(dir.join("dyn.csv")).unwrap()).unwrap() else {
        return Err("expected a dynamic table".into());
    };
    let identities = [
        Scenario::PdsiDelta { delta: 0.0 },
        Scenario::NdviScale { factor: 1.0 },
        Scenario::PopulationScale { factor: 1.0 },
    ];
    for year in 2013..=2017 {
        let yr: Vec<_> = rows.iter().filter(|r| r.year == year).cloned().collect();
        for r in sweep(&model, &yr, &identities).map_err(|e| e.to_string())? {
            ensure(r.flips.is_empty(), || format!("{year}: {} changed {} predictions", r.description, r.flips.len()))?;
        }
        let s = sweep(&model, &yr, &pdsi_sweep()).map_err(|e| e.to_string())?;
        let counts: Vec<usize> = s.iter().map(|r| r.treated_risk_cells).collect();
        ensure(counts.windows(2).all(|w| w[1] <= w[0]), || format!("{year}: sweep {counts:?}"))?;
    }
    Ok(format!("treated counts {treated:?} from baseline {baseline}; identities flip nothing"))
}

fn transfer(dir: &std::path::Path) -> Check {
    let before = std::fs::read(dir.join("model.json")).map_err(|e| e.to_string())?;
    let hash = read_json(&dir.join("model.json"))["content_hash"].as_str().unwrap().to_string();
    ok(dir, &["synth", "--seed", "2", "--rows", "16", "--cols", "24", "--out", "b"]);
    ok(dir, &["transfer", "--model", "model.json", "--region", "b", "--out", "t1"]);
    ok(dir, &["transfer", "--model", "model.json", "--region", "b", "--out", "t2"]);
    let after = std::fs::read(dir.join("model.json")).map_err(|e| e.to_string())?;
    ensure(before == after, || "model file changed".into())?;
    let s1 = read_json(&dir.join("t1/summary.json"));
    let s2 = read_json(&dir.join("t2/summary.json"));
    ensure(s1["model_hash"] == hash.as_str(), || "summary hash differs from the saved model".into())?;
    ensure(s1["transfer"]["training_steps"] == 0, || "training happened".into())?;
    ensure(s1 == s2, || "transfer summaries differ".into())?;
    for f in ["predictions.csv", "risk.geojson"] {
        ensure(std::fs::read(dir.join("t1").join(f)).ok() == std::fs::read(dir.join("t2").join(f)).ok(), || format!("{f} differs"))?;
    }
    ensure(s1["cells"] == 384, || format!("expected 384 cells, got {}", s1["cells"]))?;
    Ok(format!("hash {}..., {} of {} cells at risk", &hash[..12], s1["count"], s1["cells"]))
}

fn cross_interface(dir: &std::path::Path) -> Check {
    let mut parts = Vec::new();
    let cfg = RunConfig::default();
    let src = Source { region: Some(dir.join("a")), table: None, year: None };
    let state = Arc::new(session_state(&cfg, &dir.join("model.json"), &src).map_err(|e| e.to_string())?);
    let app = router(state);
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    for year in 2013..=2017 {
        let out = format!("p{year}");
        ok(dir, &["predict", "--model", "model.json", "--region", "a", "--year", &year.to_string(), "--out", &out]);
        let cli = read_json(&dir.join(&out).join("summary.json"))["count"].as_u64().ok_or("no CLI count")?;
        let (status, body) = rt.block_on(async {
            let res = app
                .clone()
                .oneshot(Request::get(format!("/api/risk?year={year}")).body(Body::empty()).unwrap())
                .await
                .unwrap();
            let status = res.status();
            (status, res.into_body().collect().await.unwrap().to_bytes())
        });
        ensure(status == StatusCode::OK, || format!("{year}: status {status}"))?;
        let body: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        let api = body["count"].as_u64().ok_or("no API count")?;
        ensure(api == cli, || format!("{year}: service {api} vs CLI {cli}"))?;
        parts.push(format!("{year}={api}"));
    }
    Ok(format!("counts agree ({})", parts.join(", ")))
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    std::fs::create_dir_all(&ws).unwrap();
    trained_workspace(&ws);

    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check + '_>)> = vec![
        ("metric formulas", Duration::from_secs(1), Box::new(metric_formulas)),
        ("labeling thresholds", Duration::from_secs(1), Box::new(labeling)),
        ("SMOTE balance and interpolation", Duration::from_secs(10), Box::new(smote_balance)),
        ("MLP gradient check", Duration::from_secs(10), Box::new(mlp_gradients)),
        ("model oracles", Duration::from_secs(30), Box::new(model_oracles)),
        ("end-to-end synthetic", Duration::from_secs(300), Box::new(|| end_to_end(dir.path()))),
        ("counterfactual direction", Duration::from_secs(60), Box::new(|| counterfactual_direction(&ws))),
        ("transfer", Duration::from_secs(60), Box::new(|| transfer(&ws))),
        ("cross-interface equality", Duration::from_secs(60), Box::new(|| cross_interface(&ws))),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > *budget => Err(format!("{d}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => writeln!(err, "PASS  {name}: {detail} ({took:.2?})").unwrap(),
            Err(why) => {
                writeln!(err, "FAIL  {name}: {why} ({took:.2?})").unwrap();
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
