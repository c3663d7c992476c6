mod common;

use std::fs;

use morphreg::objectives::eval_all;
use morphreg_cli::bundle::{read_json, Bundle, Manifest, MANIFEST, SELECTED};
use morphreg_cli::commands;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn two_stage_bundle_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let root = common::tiny_bundle(tmp.path());
    let manifest: Manifest = read_json(&root.join(MANIFEST)).unwrap();
    assert_eq!(manifest.stages.len(), 2);
    assert_eq!(manifest.stages[0].grid_resolution, [3; 3]);
    assert_eq!(manifest.stages[1].grid_resolution, [5; 3]);
    assert_eq!(manifest.stages[1].variable_count, 6 * 125);
    assert_eq!(manifest.dims, [32; 3]);
    assert_eq!(manifest.objectives.len(), 3);
    assert_eq!(manifest.identity.deformation, 0.0);

    let bundle = Bundle::open(&root).unwrap();
    assert_eq!(bundle.stage_count(), 2);
    for stage in 1..=2 {
        let rows = bundle.front(stage).unwrap();
        assert_eq!(rows.len(), manifest.stages[stage - 1].front_size);
        assert!(!rows.is_empty());
        for row in rows {
            let sol = bundle.solution(&row.id).unwrap();
            let o = eval_all(&sol, bundle.problem()).unwrap();
            assert!(close(o.dissimilarity, row.dissimilarity), "{}", row.id);
            assert!(close(o.deformation, row.deformation), "{}", row.id);
            assert!(
                close(o.guidance.unwrap(), row.guidance.unwrap()),
                "{}",
                row.id
            );
        }
    }
    assert!(bundle.front(3).is_err());
    assert!(bundle.solution("s3-000").is_err());
}

#[test]
fn same_seed_gives_byte_identical_fronts() {
    let tmp = tempfile::tempdir().unwrap();
    let problem = common::tiny_problem(tmp.path());
    let cfg = common::tiny_config(5);
    commands::register(&cfg, &problem, &tmp.path().join("a"), true).unwrap();
    commands::register(&cfg, &problem, &tmp.path().join("b"), true).unwrap();
    for stage in ["stage_1", "stage_2"] {
        let a = fs::read(tmp.path().join("a").join(stage).join("front.csv")).unwrap();
        let b = fs::read(tmp.path().join("b").join(stage).join("front.csv")).unwrap();
        assert_eq!(a, b, "{stage}");
    }
}

#[test]
fn rerun_replaces_previous_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let root = common::tiny_bundle(tmp.path());
    fs::write(root.join(SELECTED), "{}").unwrap();
    let mut cfg = common::tiny_config(3);
    cfg.schedule.truncate(1);
    commands::register(&cfg, &tmp.path().join("problem"), &root, true).unwrap();
    assert!(!root.join(SELECTED).exists());
    assert!(!root.join("stage_2").exists());
    assert_eq!(Bundle::open(&root).unwrap().stage_count(), 1);
}

#[test]
fn metrics_agree_with_front_row() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = Bundle::open(&common::tiny_bundle(tmp.path())).unwrap();
    let row = bundle.front(2).unwrap()[0].clone();
    let m = commands::metrics(&bundle, &row.id).unwrap();
    assert!(close(m.dissimilarity, row.dissimilarity));
    assert!(close(
        m.guidance_rms_mm.unwrap().powi(2),
        row.guidance.unwrap()
    ));
    let dice = m.dice.unwrap();
    assert!((0.0..=1.0).contains(&dice));
}

#[test]
fn render_writes_volumes_and_dvf() {
    let tmp = tempfile::tempdir().unwrap();
    let bundle = Bundle::open(&common::tiny_bundle(tmp.path())).unwrap();
    let id = bundle.front(1).unwrap()[0].id.clone();
    let dir = commands::render(&bundle, &id, None).unwrap();
    assert_eq!(dir, bundle.root().join("render").join(&id));
    for f in ["transformed_source", "transformed_target", "dvf"] {
        assert!(dir.join(format!("{f}.mhd")).exists(), "{f}");
        assert!(dir.join(format!("{f}.raw")).exists(), "{f}");
    }
    let dvf = fs::read_to_string(dir.join("dvf.mhd")).unwrap();
    assert!(dvf.contains("ElementNumberOfChannels = 3"));
}
