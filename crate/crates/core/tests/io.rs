use std::fs;
use std::path::Path;

use metasurf::io::{self, GridFile, SolveReport, VerifyReport};

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn uniform_disk_demo_solves_and_verifies() {
    let mut cfg = io::demo_config("uniform-disk").unwrap();
    cfg.verify.rays = 200_000;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();

    let solved = io::run_solve(&cfg, out, out).unwrap();
    assert!(solved.solver.converged);
    assert!(solved.residual.as_ref().unwrap().median < 0.1);
    assert!(solved.mass_balance.relative_error < 1e-6);
    assert!(solved.mass_balance.normalization_factor.is_none());

    let verified = io::run_verify(&cfg, out, &out.join(io::PHASE_FILE), out).unwrap();
    assert!(verified.passed);
    assert!(verified.density_distance.l1 < 0.05, "{:?}", verified.density_distance);
    let full = &verified.energy_balance[0];
    assert_eq!(full.region, "full");
    assert!(full.balance.rel_err < 0.01);
    // traced power is either binned or evanescent
    let leak = verified.traced_power - verified.binned_power - verified.evanescent_power;
    assert!(leak.abs() <= 1e-12 * verified.traced_power);

    // every artifact re-parses to what produced it
    let report: SolveReport = serde_json::from_str(&read(&out.join(io::SOLVE_REPORT_FILE))).unwrap();
    assert_eq!(report, solved);
    let vreport: VerifyReport = serde_json::from_str(&read(&out.join(io::VERIFY_REPORT_FILE))).unwrap();
    assert_eq!(vreport, verified);
    for f in [io::PHASE_FILE, io::POTENTIAL_FILE, io::RESIDUAL_FILE] {
        let text = read(&out.join(f));
        assert_eq!(GridFile::parse(&text).unwrap().to_text(), text, "{f}");
    }
    let hist = read(&out.join(io::HISTOGRAM_FILE));
    let rows = io::parse_histogram(&hist).unwrap();
    assert_eq!(rows.len(), cfg.verify.bins_u * cfg.verify.bins_v);
    assert_eq!(io::format_histogram(&rows), hist);

    let (summary, field) = io::run_residual(&cfg, out, &out.join(io::PHASE_FILE)).unwrap();
    assert!(summary.residual.median < 0.1);
    assert_eq!(field.grid.len(), GridFile::read(&out.join(io::RESIDUAL_FILE)).unwrap().field.grid.len());
}

#[test]
fn reruns_produce_identical_artifacts() {
    let mut cfg = io::demo_config("gaussian-to-ring").unwrap();
    cfg.grid.resolution = 24;
    cfg.solver.epsilon_schedule = None;
    cfg.verify.rays = 20_000;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let report = io::run_solve(&cfg, dir, dir).unwrap();
        assert!((report.mass_balance.normalization_factor.unwrap() - 1.0).abs() > 1e-3);
        io::run_verify(&cfg, dir, &dir.join(io::PHASE_FILE), dir).unwrap();
    }
    for f in [
        io::PHASE_FILE,
        io::POTENTIAL_FILE,
        io::RESIDUAL_FILE,
        io::SOLVE_REPORT_FILE,
        io::VERIFY_REPORT_FILE,
        io::HISTOGRAM_FILE,
    ] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_round_trips_through_json() {
    for name in io::DEMO_NAMES {
        let cfg = io::demo_config(name).unwrap();
        assert_eq!(io::parse_config(&cfg.to_json()).unwrap(), cfg);
    }
}
