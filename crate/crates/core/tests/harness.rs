use std::path::Path;

use plurisub::exhaustion::Stage;
use plurisub::harness::{
    describe, describe_records, list_catalog, run, run_path, DomainConfig, Overrides, RunConfig, EXIT_ABORT,
    EXIT_CERTIFICATION, EXIT_CONFIG, EXIT_PASS,
};
use plurisub::Record;

fn config(dir: &Path, body: &str) -> RunConfig {
    let mut cfg = RunConfig::parse(body).unwrap();
    cfg.output.dir = dir.display().to_string();
    cfg
}

const LIPSCHITZ_BALL: &str = r#"
schema_version = 1

[domain]
name = "ball"

[gaussian]
truncation = 2
seed = 3

[pipeline]
stage = "lipschitz_eta"

[certify]
construction_points = 50
exhaustion_samples = 100
nested_points = 10
nested_rays = 2
boundary_probes = 100
"#;

#[test]
fn passing_run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(tmp.path(), LIPSCHITZ_BALL));
    assert_eq!(out.code, EXIT_PASS, "{}", out.message);
    for f in ["records.jsonl", "state.json", "config.toml", "summary.txt"] {
        assert!(tmp.path().join(f).exists(), "missing {f}");
    }
    let text = describe(&tmp.path().join("records.jsonl")).unwrap();
    assert!(text.contains(" 0 failures"), "{text}");

    // The written config reloads to the same run.
    let again = RunConfig::load(&tmp.path().join("config.toml")).unwrap();
    assert_eq!(again.to_toml(), config(tmp.path(), LIPSCHITZ_BALL).to_toml());
}

#[test]
fn bad_weights_exit_with_config_code() {
    let body = LIPSCHITZ_BALL.replace("seed = 3", "seed = 3\nweights = [0.6, 0.5]");
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, body).unwrap();
    let out = run_path(&path, &Overrides::default());
    assert_eq!(out.code, EXIT_CONFIG);
    assert!(out.message.contains("sum"), "{}", out.message);
}

#[test]
fn missing_config_is_a_config_error() {
    let out = run_path(Path::new("/nonexistent/plurisub.toml"), &Overrides::default());
    assert_eq!(out.code, EXIT_CONFIG);
}

#[test]
fn construction_error_aborts_with_header() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), LIPSCHITZ_BALL);
    cfg.domain = DomainConfig::FullSpace;
    cfg.pipeline.stage = Stage::SmoothPsi;
    let out = run(&cfg);
    assert_eq!(out.code, EXIT_ABORT, "{}", out.message);
    let header = std::fs::read_to_string(tmp.path().join("records.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(header.lines().next().unwrap()).unwrap();
    assert_eq!(v["kind"], "header");
    assert!(v["abort"].is_string());
}

#[test]
fn non_pseudoconvex_domain_fails_certification() {
    let body = LIPSCHITZ_BALL.replace(
        "name = \"ball\"",
        "name = \"hollowed_ball\"\nouter = 1.0\ninner = 0.5",
    ) + "psh = true\nexhaustion = false\npoints = 100\ndirections = 4\ntolerance_mode = \"relative\"\n";
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&config(tmp.path(), &body));
    assert_eq!(out.code, EXIT_CERTIFICATION, "{}", out.message);
    let bad = out.report.failures().next().unwrap();
    assert!(bad.location.is_some());
}

#[test]
fn overrides_apply() {
    let mut cfg = RunConfig::parse(LIPSCHITZ_BALL).unwrap();
    Overrides {
        seed: Some(99),
        out_dir: Some("/tmp/x".into()),
        dim_sweep: Some(vec![1, 2]),
        tolerance_scale: Some(2.0),
    }
    .apply(&mut cfg);
    assert_eq!(cfg.gaussian.seed, 99);
    assert_eq!(cfg.output.dir, "/tmp/x");
    assert_eq!(cfg.certify.dim_sweep, Some(vec![1, 2]));
    assert_eq!(cfg.certify.tolerance_scale, 2.0);
}

#[test]
fn catalog_lists_domains_and_pipelines() {
    let text = list_catalog();
    for name in ["ball", "polydisc", "halfspace_intersection", "hartogs_wedge", "full_space"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    for stage in ["lipschitz_eta", "smooth_Psi", "semi_anti_Psi", "psh_eta"] {
        assert!(text.contains(stage), "{stage} missing from\n{text}");
    }
}

#[test]
fn describe_groups_by_anchor_in_order() {
    let recs = vec![
        Record::new("b-anchor", "f", 10).tolerance(0.1).violation(-1.0),
        Record::new("a-anchor", "f", 10).tolerance(0.1).violation(0.5),
        Record::new("b-anchor", "g", 10).tolerance(0.1).violation(-2.0),
    ];
    let text = describe_records(&recs, None);
    let b = text.find("b-anchor").unwrap();
    let a = text.find("a-anchor").unwrap();
    assert!(b < a);
    assert!(text.contains("[FAIL]"));
    assert!(text.contains("3 records, 1 failures"), "{text}");
}
