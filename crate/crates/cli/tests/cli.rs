use std::path::Path;
use std::process::Command;

use jcrwave_cli::{run, Experiment, ExperimentConfig};

fn cfg(overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::from_str_with_overrides("", &o).unwrap()
}

fn render_all(kind: Experiment, c: &ExperimentConfig) -> Vec<String> {
    let out = run(kind, c).unwrap();
    out.tables.iter().map(|t| t.render(kind.name(), c.seed, &c.to_toml())).collect()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jcrwave"))
}

fn header_columns(csv: &str) -> String {
    csv.lines().find(|l| !l.starts_with('#')).unwrap().to_string()
}

#[test]
fn shipped_config_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/default.toml");
    assert_eq!(ExperimentConfig::load(Some(&path), &[]).unwrap(), ExperimentConfig::default());
}

#[test]
fn coarray_matches_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let c = ExperimentConfig::default();
    let out = run(Experiment::Coarray, &c).unwrap();
    for t in &out.tables {
        let expected = std::fs::read_to_string(dir.join(format!("{}.csv", t.name))).unwrap();
        assert_eq!(t.render("coarray", c.seed, &c.to_toml()), expected, "{}", t.name);
    }
}

#[test]
fn coarray_of_the_smallest_wichmann_ruler() {
    let out = run(Experiment::Coarray, &ExperimentConfig::default()).unwrap();
    let lags = &out.tables[0];
    assert_eq!(lags.rows.len(), 23);
    let summary = &out.tables[1].rows[0];
    assert_eq!(summary[out.tables[1].index("vp_count")], 22usize.into());
    assert_eq!(summary[out.tables[1].index("vp_count_closed_form")], 22usize.into());
    assert_eq!(summary[out.tables[1].index("hole_free")], true.into());
}

#[test]
fn csv_schemas_are_stable() {
    let small = cfg(&[
        "tradeoff.m_max=6",
        "optimize.m_max=6",
        "optimize.target_counts=[1]",
        "scenario.distances_m=[20.0]",
        "music_rmse.snapshots=[10]",
        "music_rmse.trials=2",
        "music_rmse.grid_points=1024",
    ]);
    let expected = [
        (Experiment::Coarray, vec!["lag,lag_s,multiplicity,in_contiguous", "family,params,positions,elements,elements_closed_form,aperture,span_s,vp_count,vp_count_closed_form,contiguous_extent,hole_free,holes"]),
        (Experiment::Tradeoff, vec!["targets,distance_m,family,params,elements,aperture,span_s,mu,rate,phi_c,dmmse_db,feasible,phi_r,rcrb_db,phi_c_norm,phi_r_norm,on_hull,hull_vertex,collinear,note"]),
        (Experiment::MusicRmse, vec!["family,params,elements,targets,distance_m,snr_db,method,snapshots,trials,failures,resolved_fraction,rmse,rcrb,rmse_db,rcrb_db,status"]),
        (
            Experiment::Optimize,
            vec![
                "targets,distance_m,family,omega_c,params,elements,objective,phi_c,dmmse_db,phi_r,rcrb_db,status",
                "targets,distance_m,family,problem,bound,bound_unit,params,elements,dmmse_db,rcrb_db,objective,slack,mix_a_elements,mix_b_elements,mix_weight,mix_dmmse_db,mix_rcrb_db,status",
                "targets,distance_m,family,elements,vp_params,crb_params,agree,first_param_gap,vp_rcrb_db,crb_rcrb_db",
            ],
        ),
    ];
    for (kind, headers) in expected {
        let rendered = render_all(kind, &small);
        let got: Vec<String> = rendered.iter().map(|s| header_columns(s)).collect();
        assert_eq!(got, headers, "{}", kind.name());
        for (csv, header) in rendered.iter().zip(&got) {
            for name in header.split(',') {
                assert!(csv.contains(&format!("# unit {name}: ")), "{name} has no unit");
            }
            assert!(csv.contains("# seed: 0") && csv.contains("# convention: rcrb_db"));
        }
    }
}

#[test]
fn output_is_identical_across_thread_counts() {
    let c = cfg(&[
        "tradeoff.m_max=16",
        "tradeoff.target_counts=[1, 4]",
        "music_rmse.snapshots=[20]",
        "music_rmse.trials=24",
        "music_rmse.grid_points=2048",
        "scenario.distances_m=[20.0]",
        "seed=11",
    ]);
    for kind in [Experiment::Tradeoff, Experiment::MusicRmse] {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| render_all(kind, &c));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| render_all(kind, &c));
        assert_eq!(one, four, "{}", kind.name());
        assert_eq!(one, render_all(kind, &c));
    }
}

#[test]
fn seed_changes_monte_carlo_output() {
    let base = ["music_rmse.snapshots=[20]", "music_rmse.trials=8", "music_rmse.grid_points=2048", "music_rmse.families=[\"uniform\"]"];
    let mut a: Vec<&str> = base.to_vec();
    a.push("seed=1");
    let mut b: Vec<&str> = base.to_vec();
    b.push("seed=2");
    let (ra, rb) = (render_all(Experiment::MusicRmse, &cfg(&a)), render_all(Experiment::MusicRmse, &cfg(&b)));
    assert_ne!(header_columns(&ra[0]), "");
    assert_ne!(ra, rb);
}

#[test]
fn infeasible_points_are_rows_not_errors() {
    let c = cfg(&["tradeoff.target_counts=[30]", "tradeoff.families=[\"uniform\"]", "scenario.distances_m=[5.0]"]);
    let out = run(Experiment::Tradeoff, &c).unwrap();
    let t = &out.tables[0];
    let (fe, m) = (t.index("feasible"), t.index("elements"));
    for row in &t.rows {
        let elements = row[m].as_f64().unwrap();
        assert_eq!(row[fe], (elements > 30.0).into());
    }
}

#[test]
fn binary_writes_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["tradeoff", "--svg", "--threads", "2", "--seed", "3", "--set", "tradeoff.m_max=8", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(dir.path().join("tradeoff.csv")).unwrap();
    assert!(csv.contains("# seed: 3") && csv.contains("m_max = 8"));
    let svg = std::fs::read_to_string(dir.path().join("tradeoff.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn binary_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(&cfg_path, "[coarray]\nfamily = \"nested\"\nparams = [2, 3]\n").unwrap();
    let out = bin().args(["coarray", "--config"]).arg(&cfg_path).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("coarray_summary.csv")).unwrap();
    assert!(csv.contains("\"nested(2,3)\""));
}

#[test]
fn binary_exit_codes() {
    let ok = bin().arg("validate").output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("no problems found"));

    let warn = bin().args(["validate", "--set", "scenario.velocities_mps=[60.0]"]).output().unwrap();
    assert!(warn.status.success());
    assert!(String::from_utf8_lossy(&warn.stdout).contains("warning"));

    let bad = bin().args(["validate", "--set", "scenario.cpi_s=-1.0"]).output().unwrap();
    assert!(!bad.status.success());

    let unknown = bin().args(["tradeoff", "--set", "tradeoff.m_mx=4"]).output().unwrap();
    assert!(!unknown.status.success());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("m_mx"));

    let missing = bin().args(["coarray", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert!(!missing.status.success());
}
