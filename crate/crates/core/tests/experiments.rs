use nrmhd::experiments::io::{read_csv, write_csv};
use nrmhd::experiments::nonuniform::report_from_runs;
use nrmhd::experiments::*;
use nrmhd::families::FamilyParams;
use nrmhd::{Grid, SolveConfig, VecField};

fn grid() -> Grid<f64> {
    Grid::new(2, 256, 8.0).unwrap()
}

fn base() -> FamilyParams {
    FamilyParams::new(2, 4, 1, 0.25, 2.0).unwrap()
}

fn short(t_end: f64) -> SolveConfig {
    SolveConfig {
        dt: 0.05,
        t_end,
        ..SolveConfig::default()
    }
}

#[test]
fn omega_flip_leaves_residual_norms_unchanged() {
    let g = grid();
    let plus = run_approximate(&base(), &g, &short(0.2), &[0.1, 0.2]).unwrap();
    let minus = run_approximate(&base().flipped(), &g, &short(0.2), &[0.1, 0.2]).unwrap();
    assert_eq!(plus.residuals.len(), 2);
    for (p, m) in plus.residuals.iter().zip(&minus.residuals) {
        assert!(p.e_norm > 0.0 && p.f_norm > 0.0);
        assert!((p.e_norm - m.e_norm).abs() <= 1e-10 * p.e_norm, "{p:?} {m:?}");
        assert!((p.f_norm - m.f_norm).abs() <= 1e-10 * p.f_norm, "{p:?} {m:?}");
    }
}

#[test]
fn residuals_vanish_without_the_high_part() {
    let g = grid();
    let ev = ResidualEvaluator::new(&base(), &g).unwrap();
    let fine = ev.fine_grid().clone();
    let data = nrmhd::families::make_family(&base(), &fine).unwrap();
    let zero = VecField::zeros(&fine);
    let (e, f) = ev.norms_with(&data.u0, &data.u0, &zero, &zero).unwrap();
    assert_eq!((e, f), (0.0, 0.0));
}

#[test]
fn sample_times_must_be_on_the_step_grid() {
    assert!(run_approximate(&base(), &grid(), &short(0.2), &[0.12]).is_err());
}

#[test]
fn residual_report_survives_a_csv_roundtrip() {
    let g = grid();
    let times = [0.1];
    let (report, runs) = exp_residuals(&base(), &[2, 4, 8], &g, &short(0.1), &times).unwrap();
    let samples: Vec<ResidualSample> = runs.iter().flat_map(|r| r.residuals.iter().copied()).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("residuals.csv");
    write_csv(&path, &samples).unwrap();
    let back: Vec<ResidualSample> = read_csv(&path).unwrap();
    assert_eq!(back, samples);
    assert_eq!(residuals_report(&back, 0.25, 2.0, &times).unwrap(), report);
}

#[test]
fn pair_series_feed_both_reports() {
    let g = grid();
    let b = base();
    let runs: Vec<PairRun> = [2, 4].iter().map(|&n| run_pair(&b, n, &g, &short(0.3)).unwrap()).collect();
    let initial: Vec<InitialDistance> = [2, 4, 8].iter().map(|&n| initial_distance(&b, n, &g).unwrap()).collect();
    for r in &runs {
        assert!(r.completed);
        assert_eq!(r.samples.len(), 7);
        let d0 = initial.iter().find(|i| i.n == r.n).unwrap().d0;
        assert!((r.samples[0].distance() - d0).abs() <= 1e-12 * d0);
        assert!(r.samples.iter().all(|p| p.distance() <= p.triangle_bound()));
    }
    let report = report_from_runs(&b, &runs, &initial).unwrap();
    assert_eq!(report.entries.len(), 2);
    assert!(report.d0_fit.is_some() && report.c0_change.is_some());

    let samples: Vec<PairSample> = runs.iter().flat_map(|r| r.samples.iter().copied()).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pairs.csv");
    write_csv(&path, &samples).unwrap();
    let back: Vec<PairSample> = read_csv(&path).unwrap();
    let completed: Vec<(u32, bool)> = runs.iter().map(|r| (r.n, r.completed)).collect();
    assert_eq!(nonuniform_report(2, 0.25, 2.0, &back, &completed, &initial).unwrap(), report);

    for (n, series) in split_by_n(&back) {
        let c = fit_c(&series).unwrap();
        let d = difference_diagnostics(&series, c + 1e-9).unwrap();
        assert!(d.holds, "n = {n}");
        assert_eq!(d.c_fit, c);
        assert_eq!(d.lhs.len(), series.len());
    }
}

#[test]
fn continuity_control_is_exact() {
    let config = ContinuityConfig {
        base_n: 4,
        levels: 3,
        ..ContinuityConfig::default()
    };
    let (report, series) = exp_continuity(&base(), &config, &grid(), &short(0.2)).unwrap();
    assert!(report.completed);
    assert_eq!(report.control_sol_dist, 0.0);
    assert!(series.iter().filter(|s| s.k == -1).all(|s| s.dist == 0.0));
    for l in &report.levels {
        assert!((l.data_dist - l.eps).abs() <= 1e-12 * l.eps, "{l:?}");
        assert!(l.sol_dist >= l.data_dist);
    }
    assert!(report.data_dist_decreasing && report.sol_dist_decreasing);
}
