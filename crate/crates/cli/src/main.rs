//! `lottery`: instance generation, assignment mechanisms, decompositions and
//! batch experiments from the command line. File formats are described in
//! the repository README.

mod error;
mod experiment;
mod files;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lottery_core::bvn::{decompose_md, decompose_robust};
use lottery_core::clock::Deadline;
use lottery_core::colgen::{binary_search_z, Budget, ColumnPool, Framework, MdsdStatus, SearchOptions};
use lottery_core::datagen::{family_lb, family_ub, family_ub_rsd, generate, GenParams};
use lottery_core::efficiency::{extreme_pe_cardinality, Direction};
use lottery_core::io::{assignment_to_json, decomposition_to_json, instance_to_json, matching_to_json};
use lottery_core::mechanisms::{
    probabilistic_serial, rsd_exact_lottery, rsd_sampled, RsdEstimate, RSD_EXACT_LIMIT,
};
use lottery_core::popularity::{binary_search_margin, unpopularity_margin};
use lottery_core::rng::{random_permutation, seeded};
use lottery_core::{floor_to_u64, serial_dictatorship, Instance, ProbabilisticAssignment, DEFAULT_SAMPLES, TOLERANCE};

use error::{CliError, Result};
use experiment::{ExperimentConfig, RunSettings};
use files::{emit, read_assignment, read_decomposition, read_instance, read_json, read_matching, write_file};

/// Default per-instance time limit in seconds.
const DEFAULT_TIME_LIMIT: f64 = 3600.0;

#[derive(Parser)]
#[command(name = "lottery", version, about = "Lotteries over Pareto-efficient matchings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sampled orderings for RSD estimates and initial columns.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Feasibility tolerance of the column-generation masters.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Seconds allowed per solve.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Column-generation framework: rmp or alpha.
    #[arg(long, global = true)]
    framework: Option<Framework>,
    /// Output file (or directory for `generate` and `experiment`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances.
    Generate {
        /// JSON file with generator parameters; defaults otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Number of instances, seeded consecutively from `--seed`.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Number of agents, overriding the parameter file.
        #[arg(long)]
        agents: Option<usize>,
    },
    /// Serial dictatorship for one ordering of the agents.
    Sd {
        instance: PathBuf,
        /// Comma-separated agent ids; a seeded random ordering otherwise.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
    },
    /// Random serial dictatorship, exact for small instances.
    Rsd {
        instance: PathBuf,
        /// Enumerate every ordering.
        #[arg(long)]
        exact: bool,
        /// Sample orderings even when enumeration is possible.
        #[arg(long, conflicts_with = "exact")]
        sampled: bool,
    },
    /// The probabilistic serial (eating) assignment.
    Ps { instance: PathBuf },
    /// Decompose an assignment into matchings of cardinality floor or ceil of its mean.
    Decompose {
        instance: PathBuf,
        assignment: PathBuf,
        /// Require every matching to be Pareto efficient.
        #[arg(long)]
        robust: bool,
    },
    /// Best worst case over lotteries of Pareto-efficient matchings.
    SolveMdsd {
        instance: PathBuf,
        /// Assignment to implement; the RSD assignment otherwise.
        assignment: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Measure::Cardinality)]
        measure: Measure,
    },
    /// Unpopularity margin of a matching or of every term of a decomposition.
    Unpopularity {
        instance: PathBuf,
        matching: Option<PathBuf>,
        #[arg(long, conflicts_with = "matching")]
        decomposition: Option<PathBuf>,
    },
    /// Extreme efficient cardinalities, the RSD mean and the resulting interval for z.
    Bounds {
        instance: PathBuf,
        /// Also solve for z and check it against the interval.
        #[arg(long)]
        solve: bool,
    },
    /// Run a batch experiment from a JSON configuration.
    Experiment {
        config: PathBuf,
        /// Parallel worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write a member of an adversarial instance family.
    Family {
        #[arg(value_enum)]
        kind: FamilyKind,
        /// `k` for the lower family, `l` for the upper family.
        size: usize,
        /// Also write the exact RSD assignment here.
        #[arg(long)]
        rsd: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Measure {
    /// Maximize the smallest number of assigned agents.
    Cardinality,
    /// Minimize the largest unpopularity margin.
    Margin,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    /// `k²` agents and `k + 1` objects where z stays near half the mean.
    Lb,
    /// `l²` agents and two objects where z approaches twice p-.
    Ub,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn samples(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES as u64)
    }

    fn budget(&self) -> Budget {
        Budget {
            deadline: Deadline::after_secs(self.time_limit.unwrap_or(DEFAULT_TIME_LIMIT)),
            tolerance: self.tolerance.unwrap_or(TOLERANCE),
            ..Budget::default()
        }
    }
}

/// Exact RSD when the orderings can be enumerated (or `force_exact`),
/// sampled otherwise. Also returns the SD outcomes when exact.
fn rsd(cli: &Cli, inst: &Instance, force_exact: bool, force_sampled: bool) -> Result<(RsdEstimate, Option<ColumnPool>)> {
    if force_exact || (!force_sampled && inst.n_agents() <= RSD_EXACT_LIMIT) {
        let lottery = rsd_exact_lottery(inst)?;
        let mut pool = ColumnPool::new();
        for (m, _) in &lottery.outcomes {
            pool.insert(inst, m.clone())?;
        }
        let est = RsdEstimate {
            assignment: lottery.assignment(inst.n_objects()),
            sample_count: lottery.total,
            seed: 0,
            exact: true,
        };
        return Ok((est, Some(pool)));
    }
    Ok((rsd_sampled(inst, cli.samples(), cli.seed())?, None))
}

fn describe_rsd(est: &RsdEstimate) -> String {
    if est.exact {
        format!("exact over {} orderings", est.sample_count)
    } else {
        format!("sampled, {} orderings, seed {}", est.sample_count, est.seed)
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate { params, count, agents } => {
            let mut base: GenParams = match params {
                Some(p) => read_json(p)?,
                None => GenParams::default(),
            };
            if let Some(n) = agents {
                base.n_agents = *n;
            }
            let first = cli.seed.unwrap_or(base.seed);
            match &cli.out {
                None if *count == 1 => emit(None, &instance_to_json(&generate(&GenParams { seed: first, ..base })?)),
                None => Err(CliError::Usage("--out DIR is required for more than one instance".into())),
                Some(dir) => {
                    for t in 0..*count {
                        let seed = first + t;
                        let inst = generate(&GenParams { seed, ..base.clone() })?;
                        write_file(&dir.join(format!("instance-{seed}.json")), &instance_to_json(&inst))?;
                    }
                    Ok(())
                }
            }
        }
        Command::Sd { instance, order } => {
            let inst = read_instance(instance)?;
            let order: Vec<usize> = match order {
                Some(ids) => ids
                    .iter()
                    .map(|a| inst.agent_index(a).ok_or_else(|| CliError::Usage(format!("unknown agent `{a}`"))))
                    .collect::<Result<_>>()?,
                None => random_permutation(inst.n_agents(), &mut seeded(cli.seed())),
            };
            let m = serial_dictatorship(&inst, &order)?;
            emit(cli.out.as_ref(), &matching_to_json(&inst, &m))
        }
        Command::Rsd { instance, exact, sampled } => {
            let inst = read_instance(instance)?;
            let (est, _) = rsd(cli, &inst, *exact, *sampled)?;
            eprintln!("RSD {}", describe_rsd(&est));
            emit(cli.out.as_ref(), &assignment_to_json(&inst, &est.assignment))
        }
        Command::Ps { instance } => {
            let inst = read_instance(instance)?;
            emit(cli.out.as_ref(), &assignment_to_json(&inst, &probabilistic_serial(&inst)))
        }
        Command::Decompose { instance, assignment, robust } => {
            let inst = read_instance(instance)?;
            let x = read_assignment(&inst, assignment)?;
            let d = if *robust { decompose_robust(&inst, &x)? } else { decompose_md(&inst, &x)? };
            eprintln!(
                "{} matchings, worst-case cardinality {}, mean {}",
                d.len(),
                d.worst_case_cardinality(),
                x.mu()
            );
            emit(cli.out.as_ref(), &decomposition_to_json(&inst, &d))
        }
        Command::SolveMdsd { instance, assignment, measure } => solve_mdsd(cli, instance, assignment.as_deref(), *measure),
        Command::Unpopularity { instance, matching, decomposition } => {
            let inst = read_instance(instance)?;
            match (matching, decomposition) {
                (Some(p), _) => {
                    let m = read_matching(&inst, p)?;
                    println!("margin {}", unpopularity_margin(&inst, &m));
                }
                (None, Some(p)) => {
                    let d = read_decomposition(&inst, p)?;
                    let mut worst = 0;
                    for (t, (w, m)) in d.terms().iter().enumerate() {
                        let g = unpopularity_margin(&inst, m);
                        worst = worst.max(g);
                        println!("term {t}: weight {w}, cardinality {}, margin {g}", m.cardinality());
                    }
                    println!("worst margin {worst}");
                }
                (None, None) => return Err(CliError::Usage("give a matching file or --decomposition".into())),
            }
            Ok(())
        }
        Command::Bounds { instance, solve } => bounds(cli, instance, *solve),
        Command::Experiment { config, jobs } => {
            let cfg: ExperimentConfig = read_json(config)?;
            let settings = RunSettings {
                framework: cli.framework.or(cfg.framework).unwrap_or_default(),
                samples: cli.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES as u64),
                time_limit: cli.time_limit.or(cfg.time_limit).unwrap_or(DEFAULT_TIME_LIMIT),
                tolerance: cli.tolerance.or(cfg.tolerance).unwrap_or(TOLERANCE),
                jobs: *jobs,
            };
            let report = experiment::run(&cfg, &settings, cli.out.as_deref())?;
            let table = report.render();
            if let Some(dir) = &cli.out {
                write_file(&dir.join("report.csv"), &report.to_csv()?)?;
                write_file(&dir.join("report.txt"), &table)?;
                write_file(&dir.join("timings.csv"), &report.timings_csv()?)?;
            }
            print!("{table}");
            let total: f64 = report.rows.iter().map(|r| r.seconds).sum();
            eprintln!("total solve time {total:.2}s");
            match report.summary().errors {
                0 => Ok(()),
                n => Err(CliError::RowsFailed(n)),
            }
        }
        Command::Family { kind, size, rsd: rsd_out } => {
            let (inst, x) = match kind {
                FamilyKind::Lb => {
                    let inst = family_lb(*size)?;
                    let x = match rsd_out {
                        Some(_) => Some(lottery_core::mechanisms::rsd_exact(&inst)?.assignment),
                        None => None,
                    };
                    (inst, x)
                }
                FamilyKind::Ub => (family_ub(*size)?, rsd_out.as_ref().map(|_| family_ub_rsd(*size)).transpose()?),
            };
            if let (Some(path), Some(x)) = (rsd_out, x) {
                write_file(path, &assignment_to_json(&inst, &x))?;
            }
            emit(cli.out.as_ref(), &instance_to_json(&inst))
        }
    }
}

fn solve_mdsd(cli: &Cli, instance: &Path, assignment: Option<&Path>, measure: Measure) -> Result<()> {
    let inst = read_instance(instance)?;
    let (x, pool, source): (ProbabilisticAssignment, Option<ColumnPool>, String) = match assignment {
        Some(p) => (read_assignment(&inst, p)?, None, p.display().to_string()),
        None => {
            let (est, pool) = rsd(cli, &inst, false, false)?;
            let source = format!("RSD ({})", describe_rsd(&est));
            (est.assignment, pool, source)
        }
    };
    let budget = cli.budget();
    println!("assignment: {source}");
    let decomposition = match measure {
        Measure::Cardinality => {
            let framework = cli.framework.unwrap_or_default();
            // every SD outcome is efficient, so p- is feasible for any RSD
            // assignment, sampled or not
            let known = match assignment {
                None => Some(extreme_pe_cardinality(&inst, Direction::Min)?),
                Some(_) => None,
            };
            let r = binary_search_z(
                &inst,
                &x,
                &SearchOptions {
                    framework,
                    budget,
                    known_feasible: known,
                    pool,
                    samples: cli.samples(),
                    seed: cli.seed().wrapping_add(experiment::POOL_SEED_OFFSET),
                },
            )?;
            println!("framework: {}", if framework == Framework::Rmp { "rmp" } else { "alpha" });
            println!("status: {}", status_name(r.status));
            match r.status {
                MdsdStatus::Optimal => println!("z: {}", r.z),
                MdsdStatus::BudgetExhausted => println!("z: in [{}, {})", r.z, r.upper),
                MdsdStatus::NotDecomposable => println!("z: none"),
            }
            println!("floor(mu): {}", floor_to_u64(&x.mu()));
            println!("iterations: {}, columns generated: {}", r.iterations(), r.columns_generated());
            println!("seconds: {:.3}", r.seconds);
            r.decomposition
        }
        Measure::Margin => {
            let r = binary_search_margin(&inst, &x, &budget, pool, cli.samples(), cli.seed())?;
            println!("status: {}", status_name(r.status));
            match r.status {
                MdsdStatus::Optimal => println!("margin: {}", r.omega),
                MdsdStatus::BudgetExhausted => println!("margin: in [{}, {}]", r.lower, r.omega),
                MdsdStatus::NotDecomposable => println!("margin: none"),
            }
            println!("seconds: {:.3}", r.seconds);
            r.decomposition
        }
    };
    if let Some(d) = &decomposition {
        println!("matchings: {}", d.len());
        if let Some(out) = &cli.out {
            write_file(out, &decomposition_to_json(&inst, d))?;
        }
    }
    Ok(())
}

fn status_name(s: MdsdStatus) -> &'static str {
    match s {
        MdsdStatus::Optimal => "optimal",
        MdsdStatus::BudgetExhausted => "budget-exhausted",
        MdsdStatus::NotDecomposable => "not-decomposable",
    }
}

fn bounds(cli: &Cli, instance: &Path, solve: bool) -> Result<()> {
    let inst = read_instance(instance)?;
    let p_min = extreme_pe_cardinality(&inst, Direction::Min)?;
    let p_max = extreme_pe_cardinality(&inst, Direction::Max)?;
    let (est, pool) = rsd(cli, &inst, false, false)?;
    let mu = est.assignment.mu();
    let fm = floor_to_u64(&mu) as usize;
    println!("agents: {}, objects: {}", inst.n_agents(), inst.n_objects());
    println!("p-: {p_min}");
    println!("p+: {p_max}");
    println!("mu: {} ({:.4}), RSD {}", mu, lottery_core::rat_to_f64(&mu), describe_rsd(&est));
    println!("floor(mu): {fm}");
    println!("interval: {} < z < {}", fm as f64 / 2.0, 2 * p_min);
    if solve {
        let r = binary_search_z(
            &inst,
            &est.assignment,
            &SearchOptions {
                framework: cli.framework.unwrap_or_default(),
                budget: cli.budget(),
                known_feasible: Some(p_min),
                pool,
                samples: cli.samples(),
                seed: cli.seed().wrapping_add(experiment::POOL_SEED_OFFSET),
            },
        )?;
        if r.status == MdsdStatus::Optimal {
            let inside = fm < 2 * r.z && r.z < 2 * p_min;
            println!("z: {} ({})", r.z, if inside { "inside the interval" } else { "OUTSIDE the interval" });
        } else {
            println!("z: in [{}, {}) ({})", r.z, r.upper, status_name(r.status));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
