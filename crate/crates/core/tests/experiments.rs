use std::path::PathBuf;

use entroswarm::experiments::*;
use entroswarm::policies::{GoalDir, PolicyKind};
use entroswarm::world::{Phase, SettleCriteria, ROBOT_RADIUS};
use entroswarm::{Error, Vec2};

fn config(name: &str) -> ScenarioSpec {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ScenarioSpec::from_toml(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn crossing(duration: f64) -> ScenarioSpec {
    let mut s = config("crossing.toml");
    s.duration = duration;
    s
}

#[test]
fn shipped_configs_build() {
    for name in [
        "crossing.toml",
        "compression.toml",
        "compression_locked.toml",
        "transport_connected.toml",
        "transport_free.toml",
    ] {
        let s = config(name);
        build_scenario(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn crossing_count_from_occupation_ratio() {
    let s = build_scenario(&crossing(10.0)).unwrap();
    let area = 2.0 * 152.0 * 285.0 + 76.0 * 381.0;
    let body = std::f64::consts::PI * 16.5 * 16.5;
    let expected = (0.17857 * area / body).floor() as usize;
    assert_eq!(expected, 24);
    assert_eq!(s.world.robots.len(), expected);
    let down = s
        .roles
        .iter()
        .filter(|r| matches!(r, entroswarm::policies::Role::Road(GoalDir::Down)))
        .count();
    assert_eq!(down, 12);
}

#[test]
fn placement_has_no_overlap() {
    for name in ["crossing.toml", "compression.toml", "transport_free.toml"] {
        let mut spec = config(name);
        if name == "transport_free.toml" {
            spec.robots.count = Some(400);
        }
        let s = build_scenario(&spec).unwrap();
        let r = &s.world.robots;
        for i in 0..r.len() {
            for j in 0..i {
                assert!((r[i].pos - r[j].pos).norm() >= 2.0 * ROBOT_RADIUS, "{name} {i} {j}");
            }
            if let Some(p) = &s.world.payload {
                assert!((r[i].pos - p.pos).norm() >= ROBOT_RADIUS + p.radius, "{name} {i}");
            }
        }
    }
}

#[test]
fn empty_scenario_is_valid() {
    let mut spec = config("compression_locked.toml");
    spec.robots.count = Some(0);
    spec.duration = 5.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    assert_eq!(r.decisions, 0);
    assert!(r.snapshots.iter().all(|s| s.robots.is_empty()));
}

#[test]
fn overfull_arena_is_infeasible() {
    let mut spec = crossing(10.0);
    spec.robots.count = Some(400);
    assert!(matches!(build_scenario(&spec), Err(Error::InfeasiblePacking { .. })));
    let mut spec = config("compression.toml");
    spec.robots.count = Some(20_000);
    assert!(matches!(build_scenario(&spec), Err(Error::InfeasiblePacking { .. })));
    let mut spec = config("transport_connected.toml");
    spec.robots.count = Some(40);
    assert!(matches!(build_scenario(&spec), Err(Error::InfeasiblePacking { .. })));
}

#[test]
fn one_tick_gives_one_decision_per_robot() {
    for name in ["crossing.toml", "compression.toml", "transport_free.toml"] {
        let mut spec = config(name);
        spec.duration = spec.policy.decision_tick;
        let s = build_scenario(&spec).unwrap();
        let r = run_scenario(&s).unwrap();
        assert_eq!(r.ticks, 1);
        assert_eq!(r.decisions, s.world.robots.len() as u64, "{name}");
    }
}

#[test]
fn same_seed_same_report() {
    for name in ["crossing.toml", "compression.toml", "transport_free.toml", "transport_connected.toml"] {
        let mut spec = config(name);
        spec.duration = 50.0;
        let a = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
        let b = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.snapshots, b.snapshots, "{name}");
        assert_eq!(a.payload, b.payload);
        assert_eq!(a.crossing, b.crossing);
        assert_eq!(a.pressure, b.pressure);
        spec.seed += 1;
        let c = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
        assert_ne!(a.digest, c.digest);
        assert_ne!(a.snapshots, c.snapshots, "{name}");
    }
}

#[test]
fn snapshots_are_time_ordered() {
    let mut spec = config("transport_free.toml");
    spec.duration = 200.0;
    spec.snapshot_period = 3.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    assert!(r.snapshots.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(r.snapshots.len(), 67);
    assert_eq!(r.payload.len() as u64, r.ticks + 1);
}

#[test]
fn crossing_long_run_resolves_contacts() {
    let spec = crossing(100_000.0);
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    assert_eq!(r.ticks, 100_000);
    assert_eq!(r.contact.residual_events, 0, "max residual {}", r.contact.max_residual);
    let m = crossing_metrics(&r, &report_gate(&r).unwrap()).unwrap();
    assert!(!m.deadlock);
}

/// A short crossing report whose log is replaced by a scripted track.
fn scripted(ys: &[f32], dir: GoalDir) -> RunReport {
    let mut spec = crossing(1.0);
    spec.robots.count = Some(1);
    let mut r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    r.crossing = Some(CrossingLog {
        dirs: vec![dir],
        times: (0..ys.len()).map(|k| k as f64).collect(),
        y: vec![ys.to_vec()],
        respawns: Vec::new(),
        exits: Vec::new(),
    });
    r
}

#[test]
fn scripted_single_crossing() {
    let r = scripted(&[600.0, 520.0, 470.0, 400.0, 300.0], GoalDir::Down);
    let gate = Gate {
        y: 475.5,
        deadlock_window: 100.0,
    };
    let m = crossing_metrics(&r, &gate).unwrap();
    assert_eq!(m.gate_events, 1);
    assert!((m.flow_down * 4.0 - 1.0).abs() < 1e-12);
    assert_eq!(m.flow_up, 0.0);
    assert!(!m.deadlock);

    // going back against its direction cancels the count
    let r = scripted(&[600.0, 400.0, 600.0], GoalDir::Down);
    let m = crossing_metrics(&r, &gate).unwrap();
    assert_eq!(m.gate_events, 2);
    assert_eq!(m.flow_down, 0.0);

    let r = scripted(&[300.0, 600.0], GoalDir::Up);
    let m = crossing_metrics(&r, &gate).unwrap();
    assert!((m.flow_up - 1.0).abs() < 1e-12);
}

#[test]
fn teleport_segments_are_not_crossings() {
    let mut r = scripted(&[100.0, 900.0, 850.0], GoalDir::Down);
    r.crossing.as_mut().unwrap().respawns = vec![(1, 0)];
    let m = crossing_metrics(
        &r,
        &Gate {
            y: 475.5,
            deadlock_window: 100.0,
        },
    )
    .unwrap();
    assert_eq!(m.gate_events, 0);
}

#[test]
fn quiet_stretch_flags_deadlock() {
    let mut ys = vec![600.0f32; 50];
    ys[10] = 400.0;
    let r = scripted(&ys, GoalDir::Down);
    let gate = |w| Gate {
        y: 475.5,
        deadlock_window: w,
    };
    // crossings at t = 10 and 11, then 38 s of nothing
    let m = crossing_metrics(&r, &gate(30.0)).unwrap();
    assert!(m.deadlock);
    assert!((m.longest_quiet - 38.0).abs() < 1e-9);
    assert!(!crossing_metrics(&r, &gate(40.0)).unwrap().deadlock);
}

#[test]
fn empty_crossing_report() {
    let mut spec = crossing(3000.0);
    spec.robots.count = Some(0);
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    let m = crossing_metrics(&r, &report_gate(&r).unwrap()).unwrap();
    assert_eq!(m.flow_total, 0.0);
    assert_eq!(m.gate_events, 0);
    assert!(!m.deadlock);
}

#[test]
fn gate_outside_arena_is_rejected() {
    let r = scripted(&[600.0, 300.0], GoalDir::Down);
    for y in [-1.0, 2000.0, f64::NAN] {
        let g = Gate {
            y,
            deadlock_window: 10.0,
        };
        assert!(crossing_metrics(&r, &g).is_err());
    }
    let mut spec = crossing(10.0);
    spec.metrics.gate_y = Some(5000.0);
    assert!(build_scenario(&spec).is_err());
}

#[test]
fn wrong_report_kinds_are_rejected() {
    let mut spec = config("compression.toml");
    spec.duration = 2.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    assert!(crossing_metrics(
        &r,
        &Gate {
            y: 10.0,
            deadlock_window: 1.0
        }
    )
    .is_err());
    assert!(phase_census(&r).is_err());
    assert!(relabel_mismatches(&r).is_err());
    let goal = GoalRegion {
        center: 0.0,
        half_width: 1.0,
    };
    assert!(matches!(transport_metrics(&r, &goal), Err(Error::NoPayload)));
}

#[test]
fn vacuum_collapses_to_the_floor() {
    let mut spec = config("compression.toml");
    spec.robots.count = Some(0);
    let s = build_scenario(&spec).unwrap();
    let settle = SettleCriteria {
        window: 20.0,
        max_time: 5000.0,
        ..SettleCriteria::default()
    };
    let pts = pv_sweep(&s, &[1000.0], spec.policy.kt.unwrap(), &settle).unwrap();
    let p = pts[0].as_ref().unwrap();
    let floor = s.world.min_piston_gap * 4000.0;
    assert!((p.volume - floor).abs() < 1e-6 * floor, "{} vs {floor}", p.volume);
    assert_eq!(p.pressure, 0.0);
    assert!(pv_sweep(&s, &[0.0], spec.policy.kt.unwrap(), &settle).is_err());
}

#[test]
fn locked_pressure_tracks_temperature() {
    let mut spec = config("compression_locked.toml");
    spec.robots.count = Some(40);
    if let ArenaSpec::Compression(a) = &mut spec.arena {
        a.width = 600.0;
        a.height = 600.0;
    }
    let s = build_scenario(&spec).unwrap();
    let kts: Vec<_> = [1.0, 2.0, 4.0].iter().map(|&k| k.try_into().unwrap()).collect();
    let pts = locked_pressure_sweep(&s, &kts, 200.0, 2000.0).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (_, b, r2) = linear_fit(&xs, &ys).unwrap();
    assert!(b > 0.0 && r2 > 0.9, "slope {b} r2 {r2}");
}

#[test]
fn still_payload_has_no_displacement() {
    let mut spec = config("transport_free.toml");
    spec.robots.count = Some(0);
    spec.duration = 20.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    let m = transport_metrics(&r, &goal_of(&r).unwrap()).unwrap();
    assert_eq!(m.max_displacement, 0.0);
    assert_eq!(m.time_to_goal, None);
}

#[test]
fn scripted_payload_motion() {
    let mut spec = config("transport_free.toml");
    spec.robots.count = Some(0);
    spec.duration = 2.0;
    let mut r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    // light propagates along -y, so goal-ward is +y; 10 mm/s from y = 750
    r.payload = (0..=100).map(|k| (k as f64, Vec2::new(500.0, 750.0 + 10.0 * k as f64))).collect();
    let goal = goal_of(&r).unwrap();
    assert_eq!(goal.center, 1400.0);
    assert_eq!(goal.half_width, 50.0);
    let m = transport_metrics(&r, &goal).unwrap();
    assert_eq!(m.max_displacement, 1000.0);
    // enters the band [1350, 1450] at y = 1350, t = 60
    assert_eq!(m.time_to_goal, Some(60.0));
    assert_eq!(m.series[30], (30.0, 300.0));
}

#[test]
fn uniform_light_has_no_liquid() {
    let mut spec = config("transport_free.toml");
    spec.light.payload_shadow = false;
    spec.duration = 30.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    let rows = phase_census(&r).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|c| c.liquid == 0 && c.gas == 200));
}

#[test]
fn census_energies_match_phase_temperatures() {
    let mut spec = config("transport_free.toml");
    spec.policy.kt_gas = Some(50.0.try_into().unwrap());
    spec.policy.kt_liquid = Some(1.0.try_into().unwrap());
    spec.duration = 400.0;
    spec.snapshot_period = 1.0;
    let r = run_scenario(&build_scenario(&spec).unwrap()).unwrap();
    let p = phase_summary(&r).unwrap();
    assert!((p.mean_energy_gas / 50.0 - 1.0).abs() < 0.1, "{p:?}");
    assert!((p.mean_energy_liquid / 1.0 - 1.0).abs() < 0.1, "{p:?}");
    assert_eq!(relabel_mismatches(&r).unwrap(), 0);
    assert!(r.snapshots.iter().any(|s| s.robots.iter().any(|b| b.phase == Phase::Liquid)));
}

#[test]
fn spec_errors_name_the_key() {
    let base = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/crossing.toml"))
        .unwrap();
    let bad = base.replace("kt = 500.0", "kt = 500.0\nbogus = 1");
    match ScenarioSpec::from_toml(&bad) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "bogus"),
        other => panic!("{other:?}"),
    }
    let mut spec = crossing(10.0);
    spec.policy.kind = PolicyKind::Compression;
    assert!(matches!(build_scenario(&spec), Err(Error::Config { .. })));
    let mut spec = crossing(10.0);
    spec.dt = 0.3;
    match build_scenario(&spec) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "dt"),
        other => panic!("{other:?}"),
    }
    let mut spec = crossing(10.0);
    spec.duration = 0.0;
    assert!(build_scenario(&spec).is_err());
}

#[test]
fn spec_round_trips_through_toml() {
    for name in ["crossing.toml", "compression.toml", "transport_free.toml"] {
        let s = config(name);
        let back = ScenarioSpec::from_toml(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.digest(), s.digest());
    }
}

#[test]
fn sweep_counts_rows() {
    let mut base = config("transport_free.toml");
    base.duration = 20.0;
    let sweep = SweepSpec {
        base: String::new(),
        param: SweepParam::Count,
        values: vec![100.0, 50.0],
        seeds: vec![2, 1],
        settle: SettleCriteria::default(),
    };
    let rows = run_sweep(&base, &sweep, 2).unwrap();
    assert_eq!(rows.len(), 4);
    let order: Vec<(f64, u64)> = rows.iter().map(|r| (r.value, r.seed)).collect();
    assert_eq!(order, vec![(50.0, 1), (50.0, 2), (100.0, 1), (100.0, 2)]);
    assert!(rows.iter().all(|r| r.error.is_none()));
    assert_eq!(rows[2].metrics["robots"], 100.0);
    let agg = aggregate(&rows);
    assert_eq!(agg.len(), 2);
    assert_eq!(agg[1].ok, 2);

    // thread count does not change results
    assert_eq!(run_sweep(&base, &sweep, 1).unwrap(), rows);

    let empty = SweepSpec {
        values: vec![],
        ..sweep.clone()
    };
    assert!(run_sweep(&base, &empty, 1).is_err());
    // a bad point fails its row only
    let bad = SweepSpec {
        values: vec![50.0, 2.5],
        seeds: vec![1],
        ..sweep
    };
    let rows = run_sweep(&base, &bad, 1).unwrap();
    assert!(rows[0].error.is_some() && rows[1].error.is_none());
}
