//! Batch runs: generate, estimate RSD by sampling, solve for `z`.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lottery_core::clock::{Deadline, Stopwatch};
use lottery_core::colgen::{binary_search_z, Budget, Framework, MdsdStatus, SearchOptions};
use lottery_core::datagen::{generate, GenParams};
use lottery_core::efficiency::{extreme_pe_cardinality, Direction};
use lottery_core::io::{decomposition_to_json, instance_to_json};
use lottery_core::mechanisms::rsd_sampled;
use lottery_core::{floor_to_u64, Decomposition, Instance};
use serde::Deserialize;

use crate::error::Result;
use crate::files::{create_dir, write_file};
use crate::report::{Row, RunReport};

/// Initial columns are sampled with the instance seed shifted by this much,
/// independently of the orderings behind the RSD estimate.
pub const POOL_SEED_OFFSET: u64 = 777;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Generator parameter cells; omitted fields take their defaults.
    #[serde(default)]
    pub grid: Vec<GenParams>,
    /// Seeds run for every cell. When empty each cell runs once with its
    /// own `seed`.
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub framework: Option<Framework>,
    pub samples: Option<u64>,
    /// Seconds per instance.
    pub time_limit: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub framework: Framework,
    pub samples: u64,
    pub time_limit: f64,
    pub tolerance: f64,
    pub jobs: usize,
}

struct Job {
    id: String,
    params: GenParams,
}

fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for (c, cell) in config.grid.iter().enumerate() {
        let seeds = if config.seeds.is_empty() { vec![cell.seed] } else { config.seeds.clone() };
        for seed in seeds {
            out.push(Job {
                id: format!("c{c:02}-s{seed}"),
                params: GenParams { seed, ..cell.clone() },
            });
        }
    }
    out
}

struct Solved {
    row: Row,
    instance: Option<Instance>,
    decomposition: Option<Decomposition>,
}

fn run_one(job: &Job, settings: &RunSettings) -> Solved {
    let clock = Stopwatch::start();
    let n = job.params.n_agents;
    let o = job.params.n_objects();
    let attempt = || -> lottery_core::Result<(Row, Instance, Option<Decomposition>)> {
        let budget = Budget {
            deadline: Deadline::after_secs(settings.time_limit),
            tolerance: settings.tolerance,
            ..Budget::default()
        };
        let inst = generate(&job.params)?;
        let x = rsd_sampled(&inst, settings.samples, job.params.seed)?.assignment;
        let p_min = extreme_pe_cardinality(&inst, Direction::Min)?;
        let r = binary_search_z(
            &inst,
            &x,
            &SearchOptions {
                framework: settings.framework,
                budget,
                known_feasible: Some(p_min),
                pool: None,
                samples: settings.samples,
                seed: job.params.seed.wrapping_add(POOL_SEED_OFFSET),
            },
        )?;
        let status = match r.status {
            MdsdStatus::Optimal => "optimal",
            MdsdStatus::BudgetExhausted => "budget-exhausted",
            MdsdStatus::NotDecomposable => "not-decomposable",
        };
        let row = Row {
            id: job.id.clone(),
            agents: inst.n_agents(),
            objects: inst.n_objects(),
            p_min: Some(p_min),
            floor_mu: Some(floor_to_u64(&x.mu()) as usize),
            z: Some(r.z),
            upper: Some(r.upper),
            status: status.into(),
            iterations: r.iterations(),
            columns: r.columns_generated(),
            error: String::new(),
            seconds: 0.0,
        };
        Ok((row, inst, r.decomposition))
    };
    match attempt() {
        Ok((mut row, inst, d)) => {
            row.seconds = clock.elapsed_secs();
            Solved {
                row,
                instance: Some(inst),
                decomposition: d,
            }
        }
        Err(e) => Solved {
            row: Row::failed(job.id.clone(), n, o, e.to_string(), clock.elapsed_secs()),
            instance: None,
            decomposition: None,
        },
    }
}

/// Runs every row, writing instance and decomposition sidecars under `out`
/// when given. Rows come back in job order whatever the number of workers.
pub fn run(config: &ExperimentConfig, settings: &RunSettings, out: Option<&Path>) -> Result<RunReport> {
    let jobs = jobs(config);
    if let Some(dir) = out {
        create_dir(&dir.join("instances"))?;
        create_dir(&dir.join("decompositions"))?;
    }
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<Option<Solved>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let workers = settings.jobs.clamp(1, jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(t) else { break };
                let solved = run_one(job, settings);
                done.lock().expect("no worker panicked")[t] = Some(solved);
            });
        }
    });
    let mut report = RunReport::default();
    for solved in done.into_inner().expect("no worker panicked").into_iter().flatten() {
        if let Some(dir) = out {
            let id = &solved.row.id;
            if let Some(inst) = &solved.instance {
                write_file(&dir.join("instances").join(format!("{id}.json")), &instance_to_json(inst))?;
                if let Some(d) = &solved.decomposition {
                    write_file(
                        &dir.join("decompositions").join(format!("{id}.json")),
                        &decomposition_to_json(inst, d),
                    )?;
                }
            }
        }
        report.rows.push(solved.row);
    }
    Ok(report)
}
