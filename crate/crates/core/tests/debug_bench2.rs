use glasnav_core::bench::sample_tasks;
use glasnav_core::nav::{navigate_active_task, navigate_noncontact_task, LogEvent, NavMode, NavRun};
use glasnav_core::params::Params;
use glasnav_core::sim::Scenario;
use std::path::Path;

fn load() -> Scenario {
    Scenario::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/ref.json")).unwrap()
}

#[test]
fn debug_noncontact_tasks() {
    let scenario = load();
    let params = Params::default();
    let tasks = sample_tasks(&scenario, 10, 1).unwrap();
    let seed = 1u64.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut run = NavRun::new(&scenario, &params, NavMode::NonContact, seed);
    for (i, (_, goal)) in tasks.iter().enumerate() {
        let r = navigate_noncontact_task(&mut run, *goal, i as u32);
        println!("NC task {i}: {:?} dur {:.1} path {:.1} goal ({:.2},{:.2},{:.2})",
            r.outcome, r.duration_s, r.path_length_m, goal.x, goal.y, goal.z);
    }
}

#[test]
fn debug_active_touches() {
    let scenario = load();
    let params = Params::default();
    let tasks = sample_tasks(&scenario, 10, 1).unwrap();
    let seed = 1u64.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (2u64 << 48);
    let mut run = NavRun::new(&scenario, &params, NavMode::Active, seed);
    for (i, (_, goal)) in tasks.iter().enumerate() {
        let r = navigate_active_task(&mut run, *goal, i as u32);
        for rec in &r.log {
            if let Some(e) = &rec.event {
                match e {
                    LogEvent::TouchStart { .. } | LogEvent::Contact { .. } | LogEvent::Invalidated { .. } => {
                        println!("  task {i} t={:.1} pos=({:.1},{:.1},{:.1}) {:?}", rec.t, rec.position.x, rec.position.y, rec.position.z, e);
                    }
                    _ => {}
                }
            }
        }
        println!("A task {i}: {:?} touches {} contacts {}", r.outcome, r.touch_count, r.contact_count);
    }
    let mut buf = Vec::new();
    run.registry.dump(&mut buf).unwrap();
    for line in String::from_utf8(buf).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let verts = v["polygon_vertices_3d"].as_array().unwrap();
        let xs: Vec<f64> = verts.iter().map(|p| p[0].as_f64().unwrap()).collect();
        let ys: Vec<f64> = verts.iter().map(|p| p[1].as_f64().unwrap()).collect();
        let zs: Vec<f64> = verts.iter().map(|p| p[2].as_f64().unwrap()).collect();
        let f = |v: &Vec<f64>| (v.iter().cloned().fold(f64::INFINITY, f64::min),
                                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        println!("registry id {} {} obs {} n=({:.2},{:.2},{:.2}) x{:.1?} y{:.1?} z{:.1?}",
            v["id"], v["status"], v["observation_count"],
            v["normal"][0].as_f64().unwrap(), v["normal"][1].as_f64().unwrap(), v["normal"][2].as_f64().unwrap(),
            f(&xs), f(&ys), f(&zs));
    }
}
