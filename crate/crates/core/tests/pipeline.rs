use smch::analysis::certify;
use smch::dynamics::SolutionState;
use smch::integrator::{run, Cadence, NullSink, RunStatus};
use smch::scenario::{build_initial_m, parse_scenario, save_snapshot, InitialDataFamily};
use smch::Spectral;

const BASE: &str = r#"{
    "grid": {"n": 256, "half_length": 20},
    "initial_data": {"kind": "gaussian_bump", "amplitude": 0.8, "width": 1.5},
    "stepper": {"t_end": 0.4, "dt_init": 0.01, "adaptive": false}
}"#;

#[test]
fn from_file_initial_data_matches_saved_state() {
    let scenario = parse_scenario(BASE).unwrap();
    let grid = scenario.grid_spec().unwrap();
    let sp = Spectral::new(grid);
    let m0 = build_initial_m(&scenario.initial_data, grid).unwrap().m;
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0).unwrap();
    let out = run(&sp, &s0, &scenario.stepper, &scenario.model, &Cadence::default(), &mut NullSink).unwrap();
    assert_eq!(out.status, RunStatus::ReachedTEnd);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("end.smch");
    save_snapshot(&out.final_state, &path).unwrap();
    let m = build_initial_m(&InitialDataFamily::FromFile { path }, grid).unwrap().m;
    assert_eq!(m.values(), out.final_state.m.values());
}

#[test]
fn from_file_rejects_mismatched_grid() {
    let scenario = parse_scenario(BASE).unwrap();
    let grid = scenario.grid_spec().unwrap();
    let sp = Spectral::new(grid);
    let m0 = build_initial_m(&scenario.initial_data, grid).unwrap().m;
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.smch");
    save_snapshot(&s0, &path).unwrap();

    let other = parse_scenario(&BASE.replace("\"n\": 256", "\"n\": 128")).unwrap();
    assert!(build_initial_m(&InitialDataFamily::FromFile { path }, other.grid_spec().unwrap()).is_err());
}

#[test]
fn energy_is_conserved_over_a_scenario_run() {
    let scenario = parse_scenario(BASE).unwrap();
    let grid = scenario.grid_spec().unwrap();
    let sp = Spectral::new(grid);
    let m0 = build_initial_m(&scenario.initial_data, grid).unwrap().m;
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0).unwrap();
    let out = run(&sp, &s0, &scenario.stepper, &scenario.model, &Cadence::default(), &mut NullSink).unwrap();
    let first = out.history.first().unwrap().h1;
    let drift = out
        .history
        .iter()
        .map(|r| ((r.h1 - first) / first).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-8, "relative drift {drift:e}");
    assert!(out.history.iter().all(|r| r.m_inf.is_finite()));
}

#[test]
fn smooth_wide_data_does_not_certify_breaking() {
    let scenario = parse_scenario(BASE).unwrap();
    let grid = scenario.grid_spec().unwrap();
    let sp = Spectral::new(grid);
    let m0 = build_initial_m(&scenario.initial_data, grid).unwrap().m;
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0).unwrap();
    let cert = certify(&sp, &s0, 1.0).unwrap();
    assert!(!cert.fires);
}
