use super::*;
use crate::maxent::{sample_heading_uniform, sample_speed};
use crate::rng::RngStream;
use crate::units::{Angle, EnergyTemp};
use proptest::prelude::*;
use std::f64::consts::PI;

fn deg(d: f64) -> Angle {
    Angle::from_degrees(d).unwrap()
}

fn robot(id: usize, x: f64, y: f64, heading_deg: f64, speed: f64) -> RobotState {
    let mut r = RobotState::new(id, Vec2::new(x, y), deg(heading_deg));
    r.cmd_speed = speed;
    r
}

fn square(half: f64) -> Vec<Segment> {
    polygon(&[
        Vec2::new(-half, -half),
        Vec2::new(half, -half),
        Vec2::new(half, half),
        Vec2::new(-half, half),
    ])
}

fn piston(side: PistonSide, y: f64, x_min: f64, width: f64, travel: (f64, f64)) -> PistonWall {
    PistonWall {
        side,
        position: y,
        x_min,
        width,
        mass: 50.0,
        external_force: 0.0,
        velocity: 0.0,
        damping: 50.0,
        travel,
        locked: false,
        impulse_total: 0.0,
    }
}

/// Open box `[0, w] × [0, h]` closed above and below by pistons.
fn piston_box(w: f64, h: f64, locked: bool) -> World {
    let walls = vec![
        Segment::new(Vec2::new(0.0, -10.0 * h), Vec2::new(0.0, 10.0 * h)),
        Segment::new(Vec2::new(w, -10.0 * h), Vec2::new(w, 10.0 * h)),
    ];
    let mut b = piston(PistonSide::Bottom, 0.0, 0.0, w, (-4.0 * h, 4.0 * h));
    let mut t = piston(PistonSide::Top, h, 0.0, w, (-4.0 * h, 4.0 * h));
    b.locked = locked;
    t.locked = locked;
    World::new(walls).with_pistons(vec![b, t])
}

/// Robots on a square lattice inside `[0, w] × [0, h]`.
fn fill_lattice(world: &mut World, n: usize, w: f64, h: f64) {
    let pitch = 2.0 * ROBOT_RADIUS + 4.0;
    let cols = ((w - 2.0 * ROBOT_RADIUS) / pitch) as usize;
    assert!(cols > 0);
    for k in 0..n {
        let (c, r) = (k % cols, k / cols);
        let x = ROBOT_RADIUS + 2.0 + pitch * c as f64;
        let y = ROBOT_RADIUS + 2.0 + pitch * r as f64;
        assert!(y < h - ROBOT_RADIUS, "lattice overflow");
        world.robots.push(robot(k, x, y, 0.0, 0.0));
    }
}

/// Robots at uniform random non-overlapping positions, the stationary
/// layout of a dilute isotropic gas.
fn scatter(world: &mut World, n: usize, w: f64, h: f64, seed: u64) {
    let mut rng = RngStream::new(seed, 99);
    let r = ROBOT_RADIUS + 1.0;
    while world.robots.len() < n {
        let p = Vec2::new(r + (w - 2.0 * r) * rng.uniform(), r + (h - 2.0 * r) * rng.uniform());
        if world.robots.iter().all(|q| (q.pos - p).norm() > 2.0 * r) {
            let id = world.robots.len();
            world.robots.push(robot(id, p.x, p.y, 0.0, 0.0));
        }
    }
}

/// Resamples every robot with uniform heading and exponential energy once
/// per second of simulated time.
fn isotropic_driver(seed: u64, kt: f64) -> impl FnMut(&mut World) -> Result<()> {
    let root = RngStream::root(seed);
    let mut streams: Vec<RngStream> = Vec::new();
    let mut next_tick = 0.0;
    move |w: &mut World| {
        if streams.len() < w.robots.len() {
            streams = (0..w.robots.len()).map(|i| root.split(i as u64)).collect();
        }
        if w.time + 1e-9 >= next_tick {
            for (r, s) in w.robots.iter_mut().zip(streams.iter_mut()) {
                r.heading = sample_heading_uniform(-PI, PI, s)?;
                r.cmd_speed = sample_speed(EnergyTemp::new(kt)?, s)?;
            }
            next_tick += 1.0;
        }
        Ok(())
    }
}

#[test]
fn resting_robot_does_not_move() {
    let mut w = World::new(square(200.0));
    w.robots.push(robot(0, 10.0, -20.0, 33.0, 0.0));
    let before = w.robots[0].pos;
    w.step(0.01).unwrap();
    assert_eq!(w.robots[0].pos, before);
    assert_eq!(w.stats.last_residual, 0.0);
}

#[test]
fn robot_is_clamped_against_wall() {
    let mut w = World::new(square(200.0));
    w.robots.push(robot(0, 200.0 - ROBOT_RADIUS - 1.0, 0.0, 0.0, 10.0));
    w.step(1.0).unwrap();
    let gap = 200.0 - w.robots[0].pos.x - ROBOT_RADIUS;
    assert!(gap.abs() < 1e-9, "{gap}");
}

#[test]
fn head_on_pair_stays_symmetric() {
    let mut w = World::new(square(500.0));
    w.robots.push(robot(0, -60.0, 0.0, 0.0, 20.0));
    w.robots.push(robot(1, 60.0, 0.0, 180.0, 20.0));
    for _ in 0..500 {
        w.step(0.01).unwrap();
        let (a, b) = (w.robots[0].pos, w.robots[1].pos);
        assert!((a.x + b.x).abs() < 1e-9 && (a.y + b.y).abs() < 1e-9);
        assert!((b - a).norm() >= 2.0 * ROBOT_RADIUS - 1e-3);
    }
}

#[test]
fn overlap_is_split_evenly() {
    let mut w = World::new(square(500.0));
    w.robots.push(robot(0, 0.0, 0.0, 0.0, 0.0));
    w.robots.push(robot(1, 2.0 * ROBOT_RADIUS - 2.0, 0.0, 0.0, 0.0));
    w.resolve_contacts();
    assert!((w.robots[0].pos.x + 1.0).abs() < 1e-12);
    assert!((w.robots[1].pos.x - (2.0 * ROBOT_RADIUS - 1.0)).abs() < 1e-12);
}

#[test]
fn no_overlap_leaves_world_unchanged() {
    let mut w = World::new(square(500.0));
    w.robots.push(robot(0, 0.0, 0.0, 10.0, 3.0));
    w.robots.push(robot(1, 100.0, 0.0, 20.0, 4.0));
    let before = w.robots.clone();
    w.resolve_contacts();
    assert_eq!(w.robots, before);
}

#[test]
fn pressing_robot_pushes_payload() {
    let mut w = World::new(square(1000.0));
    w.payload = Some(PayloadObject::new(Vec2::ZERO, 1.0, 0.0).unwrap());
    w.contact.push_coefficient = 2.0;
    let x = -(PAYLOAD_RADIUS + ROBOT_RADIUS) + 1.5;
    w.robots.push(robot(0, x, 0.0, 0.0, 0.0));
    w.resolve_contacts();
    let v = w.payload.as_ref().unwrap().velocity;
    assert!((v.x - 3.0).abs() < 1e-12 && v.y.abs() < 1e-12, "{v:?}");
    let gap = w.robots[0].pos.norm() - PAYLOAD_RADIUS - ROBOT_RADIUS;
    assert!(gap.abs() < 1e-12);
}

#[test]
fn attached_robots_drive_payload() {
    let mut w = World::new(square(5000.0));
    w.payload = Some(PayloadObject::new(Vec2::ZERO, 10.0, 10.0).unwrap());
    for (k, a) in [0.0, 120.0, 240.0].iter().enumerate() {
        let off = Vec2::from_angle(deg(*a)) * (PAYLOAD_RADIUS + ROBOT_RADIUS);
        let mut r = robot(k, off.x, off.y, 90.0, 10.0);
        r.attached = Some(off);
        w.robots.push(r);
    }
    for _ in 0..1000 {
        w.step(0.01).unwrap();
    }
    // drive 3·ζ·v against drag c = 10 with M = 10: v(t) = 3 (1 - e^{-t})
    let p = w.payload.as_ref().unwrap();
    let expect = 3.0 * (1.0 - (-10.0f64).exp());
    assert!((p.velocity.y - expect).abs() < 1e-9, "{:?}", p.velocity);
    assert!(p.velocity.x.abs() < 1e-9);
    for r in &w.robots {
        assert!((r.pos - p.pos - r.attached.unwrap()).norm() < 1e-9);
    }
}

#[test]
fn quiet_pistons_see_zero_pressure() {
    let mut w = piston_box(400.0, 400.0, true);
    w.robots.push(robot(0, 200.0, 200.0, 0.0, 0.0));
    for _ in 0..100 {
        w.step(0.01).unwrap();
    }
    let s = wall_pressure(&w, 1.0).unwrap();
    assert_eq!(s.pressure, 0.0);
    assert!((s.volume - 400.0 * 400.0).abs() < 1e-9);
    assert!(matches!(wall_pressure(&World::new(vec![]), 1.0), Err(Error::NoPiston)));
}

#[test]
fn bouncing_robot_matches_momentum_flux() {
    // With ζ = 2m/dt one blocked substep of depth v·dt carries exactly the
    // elastic momentum transfer 2mv.
    let (dt, v, width) = (0.01, 100.0, 100.0);
    let free = 200.0;
    let h = free + 2.0 * ROBOT_RADIUS;
    let mut w = piston_box(width, h, true);
    w.contact.push_coefficient = 2.0 / dt;
    w.robots.push(robot(0, 50.0, ROBOT_RADIUS, 90.0, v));
    let window = 400.0;
    let steps = (window / dt).round() as usize;
    let mut last = 0.0;
    for _ in 0..steps {
        w.step(dt).unwrap();
        let total: f64 = w.pistons.iter().map(|p| p.impulse_total).sum();
        if total > last {
            let h = w.robots[0].heading;
            w.robots[0].heading = h.offset(PI);
            last = total;
        }
    }
    let measured = wall_pressure(&w, window).unwrap().pressure;
    let hits = window * v / free;
    let oracle = hits * 2.0 * v / window / (2.0 * width);
    assert!((measured / oracle - 1.0).abs() < 0.05, "{measured} vs {oracle}");
}

fn locked_box_pressure(n: usize, seed: u64) -> f64 {
    let (wd, ht) = (3000.0, 1000.0);
    let mut w = piston_box(wd, ht, true);
    scatter(&mut w, n, wd, ht, seed);
    let mut drive = isotropic_driver(seed, 20_000.0);
    for _ in 0..500 {
        drive(&mut w).unwrap();
        w.step(0.01).unwrap();
    }
    let probe = w.pressure_probe().unwrap();
    for _ in 0..5000 {
        drive(&mut w).unwrap();
        w.step(0.01).unwrap();
    }
    w.pressure_since(&probe).unwrap().pressure
}

#[test]
fn pressure_scales_with_count() {
    let mut p200 = 0.0;
    let mut p400 = 0.0;
    for seed in 0..10 {
        p200 += locked_box_pressure(200, seed);
        p400 += locked_box_pressure(400, 100 + seed);
    }
    let ratio = p400 / p200;
    eprintln!("ratio {ratio}");
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn empty_box_collapses_to_floor() {
    let mut w = piston_box(300.0, 600.0, false);
    let settle = SettleCriteria {
        window: 20.0,
        ..Default::default()
    };
    let (v, p) = equilibrium_volume(&mut w, 100.0, &settle, &mut |_| Ok(())).unwrap();
    assert!((v - w.min_piston_gap * 300.0).abs() < 1e-6, "{v}");
    assert_eq!(p, 0.0);
}

#[test]
fn unloaded_pistons_drift_to_bounds() {
    let (wd, ht) = (600.0, 300.0);
    let mut w = piston_box(wd, ht, false);
    for p in w.pistons.iter_mut() {
        p.travel = (-200.0, 500.0);
    }
    fill_lattice(&mut w, 20, wd, ht);
    let settle = SettleCriteria {
        window: 50.0,
        ..Default::default()
    };
    let mut drive = isotropic_driver(4, 2000.0);
    let (v, _) = equilibrium_volume(&mut w, 0.0, &settle, &mut drive).unwrap();
    assert!((v - 700.0 * wd).abs() / (700.0 * wd) < 1e-6, "{v}");
}

#[test]
fn doubled_force_halves_volume() {
    // PV ≈ N·ζ·kT·τ/2 ≈ 10⁵ here, so these loads hold the gap near 1 m
    let (wd, ht) = (2000.0, 700.0);
    let base = {
        let mut w = piston_box(wd, ht, false);
        fill_lattice(&mut w, 100, wd, ht);
        for p in w.pistons.iter_mut() {
            p.damping = PistonWall::critical_damping(p.mass, 100.0, ht);
        }
        w
    };
    let settle = SettleCriteria {
        window: 300.0,
        ..Default::default()
    };
    let mut vols = Vec::new();
    for (k, f) in [100.0, 200.0].into_iter().enumerate() {
        let mut w = base.clone();
        let mut drive = isotropic_driver(7 + k as u64, 2000.0);
        let (v, p) = equilibrium_volume(&mut w, f, &settle, &mut drive).unwrap();
        eprintln!("F {f}: V {v} P {p} t {}", w.time);
        vols.push(v);
    }
    let r = vols[1] / vols[0];
    assert!((r - 0.5).abs() < 0.1, "{vols:?}");
}

#[test]
fn settle_failure_carries_trace() {
    let mut w = piston_box(300.0, 3000.0, false);
    for p in w.pistons.iter_mut() {
        p.mass = 1e6;
        p.damping = 0.0;
    }
    let settle = SettleCriteria {
        window: 1.0,
        max_time: 3.0,
        velocity_threshold: 1e-9,
        ..Default::default()
    };
    match equilibrium_volume(&mut w, 1.0, &settle, &mut |_| Ok(())) {
        Err(Error::NotSettled { trace, .. }) => assert!(trace.len() >= 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_step_is_rejected() {
    let mut w = World::new(vec![]);
    assert!(w.step(0.0).is_err());
    assert!(w.step(f64::NAN).is_err());
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let run = || {
        let mut w = piston_box(800.0, 800.0, false);
        fill_lattice(&mut w, 60, 800.0, 800.0);
        let mut drive = isotropic_driver(11, 500.0);
        for _ in 0..3000 {
            drive(&mut w).unwrap();
            w.step(0.01).unwrap();
        }
        (w.robots.clone(), w.pistons.clone())
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contacts_leave_no_overlap(seed in 0u64..1000, n in 5usize..60) {
        let mut w = World::new(square(300.0));
        let mut rng = RngStream::root(seed);
        while w.robots.len() < n {
            let p = Vec2::new(-280.0 + 560.0 * rng.uniform(), -280.0 + 560.0 * rng.uniform());
            if w.robots.iter().all(|r| (r.pos - p).norm() > 2.0 * ROBOT_RADIUS) {
                let id = w.robots.len();
                w.robots.push(robot(id, p.x, p.y, 0.0, 0.0));
            }
        }
        let mut drive = isotropic_driver(seed, 400.0);
        for _ in 0..400 {
            drive(&mut w).unwrap();
            let speeds: Vec<f64> = w.robots.iter().map(|r| r.cmd_speed).collect();
            w.step(0.01).unwrap();
            prop_assert!(w.overlap_residual() < 1e-3, "residual {}", w.overlap_residual());
            // contacts never rewrite what a robot was commanded
            for (r, v) in w.robots.iter().zip(&speeds) {
                prop_assert_eq!(r.cmd_speed, *v);
                prop_assert!(r.velocity().norm() <= r.cmd_speed * (1.0 + 1e-12));
            }
        }
    }
}
