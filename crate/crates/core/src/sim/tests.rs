use super::paths::*;
use super::*;
use std::f64::consts::PI;

fn gmm2() -> Gmm {
    Gmm::isotropic(vec![0.5, 0.5], vec![vec![0.3, 0.3], vec![0.7, 0.6]], 0.01).unwrap()
}

fn spec(strategy: Strategy, target: Vec<f64>) -> TrialSpec {
    let g = ReferenceDistribution::Gmm(gmm2());
    let t = TargetRegion::with_fraction(target, 1.0, 0.005).unwrap();
    let mut s = TrialSpec::new(strategy, g, t, vec![0.5, 0.5]);
    s.k = 6;
    s.time_limit = 60.0;
    s.record = usize::MAX;
    s
}

#[test]
fn target_radius_matches_ball_volume() {
    assert!((radius_for_fraction(1, 1.0, 0.005) - 0.0025).abs() < 1e-15);
    assert!((radius_for_fraction(2, 1.0, 0.005) - (0.005 / PI).sqrt()).abs() < 1e-15);
    assert!((radius_for_fraction(3, 1.0, 0.005) - (0.005 * 3.0 / (4.0 * PI)).cbrt()).abs() < 1e-15);
    let r4 = radius_for_fraction(4, 1.0, 0.005);
    assert!((PI * PI / 2.0 * r4.powi(4) - 0.005).abs() < 1e-15);
    let r5 = radius_for_fraction(5, 2.0, 0.01);
    assert!((8.0 * PI * PI / 15.0 * r5.powi(5) - 0.01 * 32.0).abs() < 1e-12);
}

#[test]
fn target_center_is_kept_off_the_walls() {
    let t = TargetRegion::new(vec![0.0, 0.99], 0.04, 1.0).unwrap();
    assert_eq!(t.center, vec![0.04, 0.96]);
    assert!(t.contains(&[0.04, 0.92]));
    assert!(!t.contains(&[0.04, 0.9199]));
    assert!(TargetRegion::new(vec![0.5], 0.6, 1.0).is_err());
}

#[test]
fn strategy_names_round_trip() {
    for s in Strategy::ALL {
        assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
    }
    assert!("lawnmower".parse::<Strategy>().is_err());
}

#[test]
fn start_inside_target_is_an_immediate_hit() {
    for s in Strategy::ALL {
        let r = run_trial(&spec(s, vec![0.5, 0.5])).unwrap();
        assert!(r.success);
        assert_eq!(r.time_to_reach, Some(0.0));
        assert_eq!(r.path_length, 0.0);
    }
}

#[test]
fn speed_law_and_first_hit_hold_for_every_strategy() {
    for s in Strategy::ALL {
        let sp = spec(s, vec![0.3, 0.3]);
        let r = run_trial(&sp).unwrap();
        let step = sp.u_max * sp.dt;
        for w in r.trajectory.windows(2) {
            assert!(dist(&w[0], &w[1]) <= step + 1e-12, "{s}");
        }
        assert!(r.trajectory.iter().all(|p| p.iter().all(|v| (0.0..=1.0).contains(v))));
        let (last, before) = r.trajectory.split_last().unwrap();
        assert!(before.iter().all(|p| !sp.target.contains(p)), "{s}");
        assert_eq!(r.success, sp.target.contains(last), "{s}");
        if let Some(t) = r.time_to_reach {
            assert!(((r.trajectory.len() - 1) as f64 * sp.dt - t).abs() < 1e-9);
        }
    }
}

#[test]
fn trials_are_deterministic_under_seed() {
    for s in Strategy::ALL {
        let mut sp = spec(s, vec![0.8, 0.2]);
        sp.time_limit = 20.0;
        let a = run_trial(&sp).unwrap();
        let b = run_trial(&sp).unwrap();
        assert_eq!(a, b);
        if matches!(s, Strategy::Sampling) {
            sp.seed = 1;
            assert_ne!(run_trial(&sp).unwrap().trajectory, a.trajectory);
        }
    }
}

#[test]
fn sampling_a_point_mass_is_a_straight_line() {
    let g = Gmm::isotropic(vec![1.0], vec![vec![0.8, 0.9]], 1e-9).unwrap();
    let t = TargetRegion::new(vec![0.1, 0.1], 0.02, 1.0).unwrap();
    let mut sp = TrialSpec::new(Strategy::Sampling, ReferenceDistribution::Gmm(g), t, vec![0.2, 0.3]);
    sp.time_limit = 10.0;
    sp.record = usize::MAX;
    let r = run_trial(&sp).unwrap();
    let dir = [0.6f64, 0.6];
    let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    for p in &r.trajectory {
        let v = [p[0] - 0.2, p[1] - 0.3];
        assert!((v[0] * dir[1] - v[1] * dir[0]).abs() / n < 1e-4);
    }
    // Reaches the point after |(0.6, 0.6)| / 0.1 seconds and stays near it.
    let end = r.trajectory.last().unwrap();
    assert!(dist(end, &[0.8, 0.9]) < 1e-3);
}

#[test]
fn spiral_geometry() {
    let s = Spiral { center: [0.5, 0.5], gap: 0.08 };
    assert_eq!(s.point(0.0), [0.5, 0.5]);
    for theta in [0.1, 1.0, 7.5, 30.0] {
        assert!((s.radius_at(theta + 2.0 * PI) - s.radius_at(theta) - 0.08).abs() < 1e-9);
    }
    let p = spiral_2d(1.0, 0.08).unwrap();
    assert_eq!(p.points()[0], vec![0.5, 0.5]);
    let p3 = spiral_3d(1.0, 0.2, 0.0).unwrap();
    assert_eq!(p3.points()[0], vec![0.5, 0.5, 0.0]);
    let top = p3.points().iter().map(|q| q[2]).fold(0.0, f64::max);
    assert!((top - 1.0).abs() < 1e-12);
    assert!(spiral_2d(1.0, 0.0).is_err());
}

#[test]
fn spiral_rejects_high_dimension() {
    let g = ReferenceDistribution::iso_gaussian(vec![0.5; 4], 0.01).unwrap();
    let t = TargetRegion::with_fraction(vec![0.2; 4], 1.0, 0.005).unwrap();
    let sp = TrialSpec::new(Strategy::Spiral, g.clone(), t.clone(), vec![0.5; 4]);
    assert!(matches!(run_trial(&sp), Err(Error::UnsupportedDimension(4))));
    let sp = TrialSpec::new(Strategy::GmmSpiral, g, t, vec![0.5; 4]);
    assert!(matches!(run_trial(&sp), Err(Error::Argument(_))));
}

#[test]
fn gmm_spiral_starts_at_the_mean_and_reaches_two_sigma() {
    let one = Gmm::isotropic(vec![1.0], vec![vec![0.45, 0.55]], 0.01).unwrap();
    let p = gmm_spiral(&one, 1.0, 0.05, 2.0).unwrap();
    assert!(dist(&p.points()[0], &[0.45, 0.55]) < 1e-15);
    for e in sweep_extent(&one, 0, p.points()) {
        assert!((e - 2.0).abs() < 1e-6, "{e}");
    }
    let aniso = Gmm::new(vec![1.0], vec![vec![0.5, 0.5]], vec![vec![0.01, 0.004, 0.004, 0.005]]).unwrap();
    let p = gmm_spiral(&aniso, 1.0, 0.03, 2.0).unwrap();
    for e in sweep_extent(&aniso, 0, p.points()) {
        assert!((e - 2.0).abs() < 1e-6, "{e}");
    }
    let cov3 = vec![0.006, 0.001, 0.0, 0.001, 0.004, 0.001, 0.0, 0.001, 0.003];
    let g3 = Gmm::new(vec![1.0], vec![vec![0.5, 0.5, 0.5]], vec![cov3]).unwrap();
    let p = gmm_spiral(&g3, 1.0, 0.05, 2.0).unwrap();
    for e in sweep_extent(&g3, 0, p.points()) {
        assert!((e - 2.0).abs() < 1e-6, "{e}");
    }
}

#[test]
fn gmm_spiral_visits_heaviest_component_first() {
    let g = Gmm::isotropic(vec![0.2, 0.8], vec![vec![0.2, 0.2], vec![0.7, 0.7]], 0.005).unwrap();
    let p = gmm_spiral(&g, 1.0, 0.05, 2.0).unwrap();
    assert!(dist(&p.points()[0], &[0.7, 0.7]) < 1e-15);
    let pos = p.points().iter().position(|q| dist(q, &[0.2, 0.2]) < 1e-15).unwrap();
    assert!(pos > 0);
}

#[test]
fn polyline_walks_by_arclength() {
    let p = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(p.length(), 2.0);
    assert_eq!(p.at(0.5), vec![0.5, 0.0]);
    assert_eq!(p.at(1.5), vec![1.0, 0.5]);
    assert_eq!(p.at(5.0), vec![1.0, 1.0]);
    assert!(Polyline::new(vec![]).is_err());
}

#[test]
fn single_attempt_series_is_first_reach_time() {
    for s in Strategy::ALL {
        let sp = spec(s, vec![0.3, 0.3]);
        let first = run_trial(&sp).unwrap();
        let series = cumulative_average_experiment(&sp, 1).unwrap();
        match first.time_to_reach {
            Some(t) => assert_eq!(series.entries, vec![(1, t)]),
            None => assert!(series.timed_out && series.entries.is_empty()),
        }
    }
    assert!(cumulative_average_experiment(&spec(Strategy::Ergodic, vec![0.3, 0.3]), 0).is_err());
}

#[test]
fn series_averages_accumulate() {
    let mut sp = spec(Strategy::Sampling, vec![0.3, 0.3]);
    sp.time_limit = 200.0;
    let s = cumulative_average_experiment(&sp, 4).unwrap();
    assert!((s.direct_time - dist(&[0.5, 0.5], &sp.target.center) / 0.1).abs() < 1e-12);
    for (i, e) in s.entries.iter().enumerate() {
        assert_eq!(e.0, i + 1);
        assert!(e.1 > 0.0);
    }
}

#[test]
fn suite_gmms_follow_the_recipe() {
    let gs = suite_gmms(3, 4, 7).unwrap();
    assert_eq!(gs.len(), 4);
    for g in &gs {
        assert_eq!(g.n_components(), 6);
        assert!(g.weights().iter().all(|w| (w - 1.0 / 6.0).abs() < 1e-15));
        assert!(g.means().iter().flatten().all(|&m| (0.3..=0.7).contains(&m)));
        assert_eq!(g.covariance(0), &[0.01, 0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0, 0.01]);
    }
    assert_eq!(suite_gmms(3, 4, 7).unwrap(), gs);
}

#[test]
fn tiny_suite_reports_every_trial() {
    let opts = SuiteOptions { n_gmms: 2, n_trials: 2, time_limit: 30.0, k: 5, ..SuiteOptions::new(2) };
    let rep = run_suite(&opts).unwrap();
    assert_eq!(rep.rows.len(), 16);
    assert_eq!(rep.summaries.len(), 4);
    for s in &rep.summaries {
        assert_eq!(s.trials, 4);
        assert!(s.mean_time_penalized <= 30.0);
    }
    let mut buf = Vec::new();
    rep.write_rows(&mut buf).unwrap();
    rep.write_summary(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with('#')).count(), 2);
    assert_eq!(text.lines().count(), 16 + 4 + 2);
}

#[test]
fn bench_reports_parameter_counts() {
    let opts = BenchOptions { k: 10, steps: 5, warmup: 1, repetitions: 1, dense_max_d: 2, ..Default::default() };
    let rows = bench_timing(&[2, 5], |d| Ok(ReferenceDistribution::uniform(d, 1.0)), &opts).unwrap();
    assert_eq!(rows[0].grad_phi_params, 20);
    assert_eq!(rows[1].grad_phi_params, 50);
    assert_eq!(rows[1].w_hat_params, 50);
    assert!(rows[0].dense_step_seconds.is_some());
    assert!(rows[1].dense_step_seconds.is_none());
    assert_eq!(rows[1].dense_params, 1e5);
    assert!(bench_timing(&[1], |d| Ok(ReferenceDistribution::uniform(d, 1.0)), &opts).is_err());
}
