//! Benchmark harness: repeated randomized point-to-point tasks for the
//! three navigation methods with per-run totals and aggregate statistics.

use crate::geometry::Vec3;
use crate::nav::{
    navigate_active_task, navigate_contact_based_task, navigate_noncontact_task, NavMode, NavResult,
    NavRun, Outcome,
};
use crate::params::Params;
use crate::sim::Scenario;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Active,
    NonContact,
    ContactBased,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::NonContact, Method::ContactBased, Method::Active];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Active => "active",
            Method::NonContact => "noncontact",
            Method::ContactBased => "contact_based",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "active" => Some(Method::Active),
            "noncontact" => Some(Method::NonContact),
            "contact_based" => Some(Method::ContactBased),
            _ => None,
        }
    }

    fn mode(&self) -> NavMode {
        match self {
            Method::Active => NavMode::Active,
            Method::NonContact => NavMode::NonContact,
            Method::ContactBased => NavMode::ContactBased,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub scenario: Scenario,
    pub params: Params,
    pub n_tasks: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    pub jobs: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("task sampling exhausted after {0} rejections")]
    SamplingExhausted(usize),
}

/// Per-method aggregate over runs (population standard deviation).
#[derive(Debug, Clone, Serialize)]
pub struct MethodStats {
    pub method: Method,
    pub duration_avg: f64,
    pub duration_std: f64,
    pub path_avg: f64,
    pub path_std: f64,
    pub contacts_avg: f64,
    pub contacts_std: f64,
    pub success_rate: f64,
}

/// One run of all tasks for one method.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub run: usize,
    pub tasks: Vec<NavResult>,
}

impl RunRecord {
    pub fn duration(&self) -> f64 {
        self.tasks.iter().map(|t| t.duration_s).sum()
    }
    pub fn path(&self) -> f64 {
        self.tasks.iter().map(|t| t.path_length_m).sum()
    }
    pub fn contacts(&self) -> u32 {
        self.tasks.iter().map(|t| t.contact_count).sum()
    }
    pub fn touches(&self) -> u32 {
        self.tasks.iter().map(|t| t.touch_count).sum()
    }
    pub fn outcome_label(&self) -> &'static str {
        if self.tasks.iter().any(|t| t.outcome == Outcome::Crashed) {
            "Crashed"
        } else if self.tasks.iter().any(|t| t.outcome == Outcome::Infeasible) {
            "Infeasible"
        } else {
            "Reached"
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub tasks: Vec<(Vec3, Vec3)>,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<MethodStats>,
}

const MAX_REJECTIONS: usize = 10_000;

/// Samples a chain of `n` start/goal pairs whose straight connecting
/// segments are always blocked by a panel or an obstacle (the trivial
/// straight path is never viable). Deterministic per seed.
pub fn sample_tasks(
    scenario: &Scenario,
    n: usize,
    seed: u64,
) -> Result<Vec<(Vec3, Vec3)>, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tasks = Vec::with_capacity(n);
    let mut prev = scenario.start.position;
    let b = &scenario.bounds;
    let margin = 0.5;
    for _ in 0..n {
        let mut rejections = 0usize;
        let goal = loop {
            if rejections >= MAX_REJECTIONS {
                return Err(BenchError::SamplingExhausted(rejections));
            }
            let cand = Vec3::new(
                rng.gen_range(b.min.x + margin..b.max.x - margin),
                rng.gen_range(b.min.y + margin..b.max.y - margin),
                rng.gen_range((b.min.z + 0.6).min(b.max.z - 0.6)..(b.max.z - 0.6).max(b.min.z + 0.7)),
            );
            if !task_point_clear(scenario, &cand) {
                rejections += 1;
                continue;
            }
            if (cand - prev).norm() < 3.0 {
                rejections += 1;
                continue;
            }
            if !segment_blocked(scenario, &prev, &cand) {
                rejections += 1;
                continue;
            }
            break cand;
        };
        tasks.push((prev, goal));
        prev = goal;
    }
    Ok(tasks)
}

fn task_point_clear(scenario: &Scenario, p: &Vec3) -> bool {
    let clear_of_boxes = scenario.obstacles.iter().all(|o| {
        let grown = crate::sim::Aabb {
            min: o.min - Vec3::new(0.4, 0.4, 0.4),
            max: o.max + Vec3::new(0.4, 0.4, 0.4),
        };
        !grown.contains(p)
    });
    let clear_of_panels = scenario.glass_panels.iter().all(|panel| {
        let n = panel.normal.normalize();
        let d = p - panel.center;
        let (w_axis, h_axis) = panel.axes();
        // Wide margins: filled surfaces carry dilation overshoot plus the
        // robot-radius inflation, and goals must stay plannable after fills.
        !(d.dot(&n).abs() < 0.8
            && d.dot(&w_axis).abs() < panel.width * 0.5 + 0.6
            && d.dot(&h_axis).abs() < panel.height * 0.5 + 0.6)
    });
    clear_of_boxes && clear_of_panels
}

fn segment_blocked(scenario: &Scenario, a: &Vec3, b: &Vec3) -> bool {
    scenario.obstacles.iter().any(|o| o.intersects_segment(a, b))
        || scenario
            .glass_panels
            .iter()
            .any(|panel| panel.segment_crossing(a, b).is_some())
}

/// Executes the full benchmark: methods x runs over the shared task list,
/// dispatched to a worker pool and reduced in (method, run) order so the
/// output is identical regardless of parallelism.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchReport, BenchError> {
    let tasks = sample_tasks(&config.scenario, config.n_tasks, config.master_seed)?;

    let mut pairs: Vec<(Method, usize)> = Vec::new();
    for &method in &config.methods {
        for run in 0..config.n_runs {
            pairs.push((method, run));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .expect("worker pool");
    let runs: Vec<RunRecord> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(method, run)| execute_run(config, &tasks, method, run))
            .collect()
    });

    let mut summary = Vec::new();
    for &method in &config.methods {
        let rows: Vec<&RunRecord> = runs.iter().filter(|r| r.method == method).collect();
        let durations: Vec<f64> = rows.iter().map(|r| r.duration()).collect();
        let paths: Vec<f64> = rows.iter().map(|r| r.path()).collect();
        let contacts: Vec<f64> = rows.iter().map(|r| r.contacts() as f64).collect();
        let total_tasks = (rows.len() * config.n_tasks).max(1);
        let successes: usize = rows
            .iter()
            .map(|r| {
                r.tasks
                    .iter()
                    .filter(|t| t.outcome == Outcome::Reached)
                    .count()
            })
            .sum();
        summary.push(MethodStats {
            method,
            duration_avg: mean(&durations),
            duration_std: std_dev(&durations),
            path_avg: mean(&paths),
            path_std: std_dev(&paths),
            contacts_avg: mean(&contacts),
            contacts_std: std_dev(&contacts),
            success_rate: successes as f64 / total_tasks as f64,
        });
    }

    Ok(BenchReport {
        tasks,
        runs,
        summary,
    })
}

fn execute_run(
    config: &BenchmarkConfig,
    tasks: &[(Vec3, Vec3)],
    method: Method,
    run_idx: usize,
) -> RunRecord {
    let method_idx = match method {
        Method::NonContact => 0u64,
        Method::ContactBased => 1,
        Method::Active => 2,
    };
    let seed = config
        .master_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (method_idx << 48)
        ^ ((run_idx as u64) << 16);
    let mut run = NavRun::new(&config.scenario, &config.params, method.mode(), seed);
    let mut results = Vec::with_capacity(tasks.len());
    for (i, (_, goal)) in tasks.iter().enumerate() {
        let result = match method {
            Method::Active => navigate_active_task(&mut run, *goal, i as u32),
            Method::NonContact => navigate_noncontact_task(&mut run, *goal, i as u32),
            Method::ContactBased => navigate_contact_based_task(&mut run, *goal, i as u32),
        };
        results.push(result);
    }
    RunRecord {
        method,
        run: run_idx,
        tasks: results,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// `method,run,duration_s,path_m,contacts,touches,outcome` per run.
pub fn runs_csv(report: &BenchReport) -> String {
    let mut out = String::from("method,run,duration_s,path_m,contacts,touches,outcome\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{},{},{}\n",
            r.method.name(),
            r.run,
            r.duration(),
            r.path(),
            r.contacts(),
            r.touches(),
            r.outcome_label()
        ));
    }
    out
}

/// Per-task detail rows.
pub fn tasks_csv(report: &BenchReport) -> String {
    let mut out = String::from("method,run,task,duration_s,path_m,contacts,touches,outcome\n");
    for r in &report.runs {
        for (i, t) in r.tasks.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.3},{:.3},{},{},{:?}\n",
                r.method.name(),
                r.run,
                i,
                t.duration_s,
                t.path_length_m,
                t.contact_count,
                t.touch_count,
                t.outcome
            ));
        }
    }
    out
}

/// Aggregate table mirroring the benchmark statistics layout.
pub fn summary_csv(report: &BenchReport) -> String {
    let mut out = String::from(
        "method,duration_avg_s,duration_std_s,path_avg_m,path_std_m,contacts_avg,contacts_std,success_rate\n",
    );
    for s in &report.summary {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            s.method.name(),
            s.duration_avg,
            s.duration_std,
            s.path_avg,
            s.path_std,
            s.contacts_avg,
            s.contacts_std,
            s.success_rate
        ));
    }
    out
}
