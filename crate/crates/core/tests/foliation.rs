use algebroid::calculus::{check_killing_frame, KILLING_FRAME_TOL};
use algebroid::fixtures;
use algebroid::foliation::*;
use algebroid::model::sample_points;

#[test]
fn flat_plane_gives_straight_lines() {
    let spec = fixtures::load(fixtures::FX_FOLIATION_FLAT);
    let (x0, v0) = ([0.4, -1.0], [0.7, 0.3]);
    let trace = geodesic_integrate(&spec, &x0, &v0, 1.0, 1e-3).unwrap();
    assert_eq!(trace.times.len(), 1001);
    assert!(!trace.truncated());
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        assert!((x[0] - (x0[0] + t * v0[0])).abs() < 1e-12);
        assert!((x[1] - (x0[1] + t * v0[1])).abs() < 1e-12);
    }
    assert!(trace.energy_drift() < 1e-15);
}

#[test]
fn warped_metric_bends_upward() {
    let spec = fixtures::load(fixtures::FX_NONRIEM_FOL);
    let v = 1.0 / 2f64.sqrt();
    let h = 1e-3;
    let trace = geodesic_integrate(&spec, &[0.0, 1.0], &[v, 0.0], 0.01, h).unwrap();
    // y'' = y x'^2 at the start, so y(h) = 1 + h^2 v^2 / 2 + O(h^3)
    let y1 = trace.positions[1][1];
    assert!(y1 > 1.0);
    assert!((y1 - (1.0 + 0.5 * h * h * v * v)).abs() < 1e-8);
}

#[test]
fn sphere_geodesics_conserve_energy_and_clairaut() {
    let spec = fixtures::load(fixtures::FX_SO3_SPHERE);
    let trace = geodesic_integrate(&spec, &[1.0, 0.0], &[0.3, 0.8], 1.0, 1e-3).unwrap();
    assert!(!trace.truncated());
    assert!(trace.energy_drift() <= 1e-8, "{}", trace.energy_drift());
    let clairaut = |t: usize| trace.positions[t][0].sin().powi(2) * trace.velocities[t][1];
    let c0 = clairaut(0);
    for t in 0..trace.times.len() {
        assert!((clairaut(t) - c0).abs() < 1e-8);
    }
}

#[test]
fn energy_error_is_fourth_order() {
    let spec = fixtures::load(fixtures::FX_SO3_SPHERE);
    let run = |h: f64| geodesic_integrate(&spec, &[1.0, 0.0], &[0.9, 1.5], 1.0, h).unwrap().energy_drift();
    let (coarse, fine) = (run(0.1), run(0.05));
    assert!(coarse > 1e-9, "coarse drift {coarse} should be well above round-off");
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn flat_foliation_stays_orthogonal() {
    let spec = fixtures::load(fixtures::FX_FOLIATION_FLAT);
    let trace = geodesic_integrate(&spec, &[-1.0, 0.5], &[1.0, 0.0], 1.0, 1e-3).unwrap();
    assert!(trace.orthogonality.iter().all(|o| o[0] == 0.0));
    let (kind, rep) = orthogonality_monitor(&spec, &trace).unwrap();
    assert_eq!(kind, MonitorKind::TransportedFrame);
    assert_eq!(rep.max_residual, 0.0);
}

#[test]
fn radial_rotation_geodesic() {
    let spec = fixtures::load(fixtures::FX_ACTION_SO2);
    let trace = geodesic_integrate(&spec, &[1.0, 0.0], &[1.0, 0.0], 0.9, 1e-3).unwrap();
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        assert!((x[0] - 1.0 - t).abs() < 1e-12 && x[1].abs() < 1e-12);
    }
    let (kind, rep) = orthogonality_monitor(&spec, &trace).unwrap();
    assert_eq!(kind, MonitorKind::TransportedFrame);
    assert!(rep.max_residual <= 1e-6);
}

#[test]
fn killing_fixtures_preserve_orthogonality() {
    let mut exercised = 0;
    for (name, doc) in fixtures::ALL {
        let spec = fixtures::load(doc);
        if spec.metric.is_none() {
            continue;
        }
        let pts = sample_points(&spec.chart, 100, 42);
        if !check_killing_frame(&spec, &pts, KILLING_FRAME_TOL).unwrap().pass {
            continue;
        }
        let starts = orthogonal_starts(&spec, 20, 5, 1.0).unwrap();
        if starts.is_empty() {
            continue;
        }
        assert_eq!(starts.len(), 20, "{name}");
        for (kind, rep) in orthogonality_sweep(&spec, &starts, 1.0, 1e-3).unwrap() {
            assert_eq!(kind, MonitorKind::TransportedFrame, "{name}");
            assert!(rep.max_residual <= 1e-6, "{name}: {rep:?}");
        }
        exercised += 1;
    }
    assert!(exercised >= 4, "only {exercised} fixtures exercised");
}

#[test]
fn rank_drop_start_is_in_scope() {
    // y d_x vanishes on the x axis, so only d_y is orthogonalised against there
    let spec = fixtures::load(fixtures::FX_FREE_NONABELIAN_KILLING);
    let v = orthogonalize(&spec, &[0.3, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(v, [1.0, 0.0]);
    let trace = geodesic_integrate(&spec, &[0.3, 0.0], &v, 1.0, 1e-3).unwrap();
    let (kind, rep) = orthogonality_monitor(&spec, &trace).unwrap();
    assert_eq!(kind, MonitorKind::TransportedFrame);
    assert!(rep.max_residual <= 1e-6, "{rep:?}");
}

#[test]
fn warped_metric_breaks_orthogonality() {
    let spec = fixtures::load(fixtures::FX_NONRIEM_FOL);
    let trace = geodesic_integrate(&spec, &[0.0, 1.0], &[1.0 / 2f64.sqrt(), 0.0], 1.0, 1e-3).unwrap();
    let (kind, rep) = orthogonality_monitor(&spec, &trace).unwrap();
    assert_eq!(kind, MonitorKind::RawSpan);
    assert!(rep.note.as_deref().unwrap().contains("raw span surrogate"));
    assert!(rep.max_residual >= 1e-2, "{rep:?}");
    assert!(trace.orthogonality.last().unwrap()[0].abs() >= 1e-2);
}

#[test]
fn leaving_the_chart_truncates() {
    let spec = fixtures::load(fixtures::FX_FOLIATION_FLAT);
    let trace = geodesic_integrate(&spec, &[2.5, 0.0], &[1.0, 0.0], 1.0, 1e-2).unwrap();
    let exit = trace.exit_time.unwrap();
    assert!((exit - 0.51).abs() < 1e-9, "{exit}");
    assert!(trace.positions.iter().all(|x| spec.chart.contains(x)));
}

#[test]
fn input_errors() {
    let no_metric = fixtures::load(fixtures::FX_OMEGA_XDY);
    assert!(matches!(
        geodesic_integrate(&no_metric, &[0.0, 0.0], &[1.0, 0.0], 1.0, 1e-3),
        Err(FoliationError::MissingMetric)
    ));
    let spec = fixtures::load(fixtures::FX_FOLIATION_FLAT);
    assert!(matches!(
        geodesic_integrate(&spec, &[9.0, 0.0], &[1.0, 0.0], 1.0, 1e-3),
        Err(FoliationError::OutsideDomain(_))
    ));
    assert!(matches!(geodesic_integrate(&spec, &[0.0, 0.0], &[1.0, 0.0], 1.0, 0.0), Err(FoliationError::BadStep(_))));
    assert!(matches!(geodesic_integrate(&spec, &[0.0], &[1.0, 0.0], 1.0, 1e-3), Err(FoliationError::Dimension { .. })));
}

#[test]
fn csv_trace_columns() {
    let spec = fixtures::load(fixtures::FX_ACTION_SO2);
    let trace = geodesic_integrate(&spec, &[1.0, 0.0], &[0.0, 1.0], 0.01, 1e-3).unwrap();
    let mut buf = Vec::new();
    write_csv(&spec, &trace, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x,y,v_x,v_y,energy,orth_1");
    assert_eq!(lines.count(), trace.times.len());
}
