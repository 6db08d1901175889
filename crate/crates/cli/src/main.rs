use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emlfr::ca::{assign_any_order, CommunitySizes};
use emlfr::cm::{cm_sample, find_illegal, rewire_to_simple, RepairPolicy};
use emlfr::em::EmConfig;
use emlfr::hh::{compact, hh_edges};
use emlfr::io::{read_assignment, read_degrees, read_edges, write_assignment, write_degrees, write_edges, Format};
use emlfr::lfr::{build_lfr, LfrParams, Sampler};
use emlfr::metrics::{
    avg_local_clustering, convergence_experiment, degree_assortativity, distinct_degree_count, realized_mixing,
    triangle_count, write_convergence_csv, EnsembleStart, Metric,
};
use emlfr::random::{sample_monotonic_pld, PldParams, Seed};
use emlfr::swap::{draw_random_swaps, run_swaps, write_swap_trace, RunConfig};
use emlfr::{graph, EdgeList, Error, MultiEdgeList};

#[derive(Parser)]
#[command(name = "emlfr", version, about = "I/O-efficient generators for LFR benchmark graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Encoding of graph and degree files.
    #[arg(long, global = true, default_value = "text")]
    format: Format,
    /// Working memory in bytes; accepts K, M and G suffixes.
    #[arg(long, global = true, default_value = "256M", value_parser = parse_bytes)]
    memory_budget: u64,
    /// Directory for spill files (system temp dir by default).
    #[arg(long, global = true)]
    spill_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a non-decreasing powerlaw degree sequence from Pld[min, max).
    Degrees {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Realize a non-decreasing degree sequence with Havel-Hakimi.
    Hh {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Exit with a validation error if the sequence is not graphical.
        #[arg(long)]
        strict: bool,
    },
    /// Randomize a simple graph with uniform edge swaps.
    Es {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        swaps_factor: f64,
        /// Swaps per run (default m/8).
        #[arg(long)]
        run_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the swap sequence as `a b d` lines.
        #[arg(long)]
        dump_swaps: Option<PathBuf>,
    },
    /// Sample a configuration-model multigraph.
    Cm {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Rewire loops and multi-edges away.
        #[arg(long)]
        repair: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Assign nodes to communities of given sizes.
    Ca {
        /// Community sizes, one per line.
        #[arg(long)]
        sizes: PathBuf,
        /// Per-node internal-degree constraint, one per line.
        #[arg(long)]
        constraints: PathBuf,
        /// Per-node membership count (default 1 each).
        #[arg(long)]
        memberships: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate an LFR benchmark graph.
    Lfr(LfrArgs),
    /// Print graph measures as `name<TAB>value` lines.
    Metrics {
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Ground truth for the realized mixing.
        #[arg(long)]
        communities: Option<PathBuf>,
    },
    /// Ensemble convergence experiment over a degree sequence.
    Converge {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "hh")]
        sampler: Sampler,
        #[arg(long, default_value_t = 20)]
        ensemble: usize,
        /// Snapshots are taken after every m swaps up to this multiple.
        #[arg(long, default_value_t = 20)]
        max_multiple: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args)]
struct LfrArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10)]
    dmin: u64,
    /// Exclusive upper degree bound (default n/20).
    #[arg(long)]
    dmax: Option<u64>,
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 20)]
    smin: u64,
    /// Exclusive upper community-size bound (default n/10).
    #[arg(long)]
    smax: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.2)]
    mu: f64,
    #[arg(long, default_value_t = 0)]
    overlap_nodes: u64,
    #[arg(long, default_value_t = 1)]
    nu: u32,
    #[arg(long, default_value = "hh")]
    sampler: Sampler,
    #[arg(long, default_value_t = 10.0)]
    swaps_factor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the ground truth as `node<TAB>community` lines.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// Write the JSON audit line here instead of stderr.
    #[arg(long)]
    audit: Option<PathBuf>,
}

fn parse_bytes(s: &str) -> Result<u64, String> {
    let (digits, mult) = match s.char_indices().last() {
        Some((i, 'K' | 'k')) => (&s[..i], 1u64 << 10),
        Some((i, 'M' | 'm')) => (&s[..i], 1 << 20),
        Some((i, 'G' | 'g')) => (&s[..i], 1 << 30),
        _ => (s, 1),
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|x| x.checked_mul(mult))
        .filter(|&x| x > 0)
        .ok_or_else(|| format!("`{s}` is not a positive byte count"))
}

fn open_in(path: &Option<PathBuf>) -> io::Result<Box<dyn Read>> {
    Ok(match path {
        Some(p) => Box::new(File::open(p)?),
        None => Box::new(io::stdin().lock()),
    })
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_simple(input: &Option<PathBuf>, format: Format) -> emlfr::Result<(u64, EdgeList)> {
    let g = read_edges(open_in(input)?, format)?;
    Ok((g.n, EdgeList::from_sorted(g.edges)?))
}

fn run(cli: Cli) -> emlfr::Result<()> {
    let fmt = cli.global.format;
    let em = EmConfig {
        spill_dir: cli.global.spill_dir.clone(),
        ..EmConfig::with_budget(cli.global.memory_budget)
    };
    match cli.cmd {
        Command::Degrees {
            n,
            min,
            max,
            gamma,
            seed,
            output,
        } => {
            let d = sample_monotonic_pld(n, PldParams::new(min, max, gamma)?, Seed(seed).rng("degrees"))?;
            write_degrees(open_out(&output)?, &d, fmt)
        }
        Command::Hh { input, output, strict } => {
            let d = read_degrees(open_in(&input)?, fmt)?;
            let out = hh_edges(&compact(&d)?);
            if !out.graphical {
                eprintln!("sequence is not graphical: {} half-edges unmet", out.unmet);
                if strict {
                    return Err(Error::Validation("degree sequence is not graphical".into()));
                }
            }
            write_edges(open_out(&output)?, d.len() as u64, out.edges.as_slice(), fmt)
        }
        Command::Es {
            input,
            output,
            swaps_factor,
            run_size,
            seed,
            dump_swaps,
        } => {
            let (n, g) = read_simple(&input, fmt)?;
            if !(swaps_factor.is_finite() && swaps_factor >= 0.0) {
                return Err(Error::Validation(format!("swaps factor must be non-negative, got {swaps_factor}")));
            }
            let k = (swaps_factor * g.len() as f64).round() as usize;
            let out = if k == 0 {
                g
            } else {
                let cfg = match run_size {
                    Some(r) => RunConfig::new(r)?,
                    None => RunConfig::default_for(g.len()),
                };
                let swaps = draw_random_swaps(g.len() as u64, k, &mut Seed(seed).rng("es"))?;
                if let Some(p) = &dump_swaps {
                    write_swap_trace(io::BufWriter::new(File::create(p)?), &swaps)?;
                }
                run_swaps(&g, &swaps, &cfg, &em)?.0
            };
            write_edges(open_out(&output)?, n, out.as_slice(), fmt)
        }
        Command::Cm {
            input,
            output,
            repair,
            seed,
        } => {
            let d = read_degrees(open_in(&input)?, fmt)?;
            let mut rng = Seed(seed).rng("cm");
            let multi = cm_sample(&d, &mut rng)?;
            let report = find_illegal(multi.as_slice())?;
            eprintln!(
                "self_loops\t{}\nparallel_pairs\t{}",
                report.self_loops.len(),
                report.parallel_pairs()
            );
            let edges: MultiEdgeList = if repair {
                let (simple, rep) = rewire_to_simple(multi, &mut rng, &RepairPolicy::default(), &em)?;
                eprintln!("repair_rounds\t{}", rep.rounds);
                simple.into()
            } else {
                multi
            };
            write_edges(open_out(&output)?, d.len() as u64, edges.as_slice(), fmt)
        }
        Command::Ca {
            sizes,
            constraints,
            memberships,
            seed,
            output,
        } => {
            let s = CommunitySizes::new(read_degrees(File::open(&sizes)?, Format::Text)?)?;
            let c = read_degrees(File::open(&constraints)?, Format::Text)?;
            let nu: Vec<u32> = match &memberships {
                Some(p) => read_degrees(File::open(p)?, Format::Text)?
                    .into_iter()
                    .map(|k| u32::try_from(k).map_err(|_| Error::Validation(format!("membership count {k} too large"))))
                    .collect::<emlfr::Result<_>>()?,
                None => vec![1; c.len()],
            };
            let a = assign_any_order(&s, &c, &nu, &mut Seed(seed).rng("ca"))?;
            write_assignment(open_out(&output)?, &a)
        }
        Command::Lfr(a) => {
            let mut p = LfrParams::new(a.n);
            p.dmin = a.dmin;
            p.dmax = a.dmax.unwrap_or(p.dmax);
            p.gamma = a.gamma;
            p.smin = a.smin;
            p.smax = a.smax.unwrap_or(p.smax);
            p.beta = a.beta;
            p.mu = a.mu;
            p.overlap = a.overlap_nodes;
            p.nu = a.nu;
            p.sampler = a.sampler;
            p.swaps_factor = a.swaps_factor;
            let g = build_lfr(&p, Seed(a.seed), &em)?;
            write_edges(open_out(&a.output)?, a.n, g.edges.as_slice(), fmt)?;
            if let Some(path) = &a.communities {
                write_assignment(File::create(path)?, &g.ground_truth)?;
            }
            let line = g.audit.to_json_line();
            match &a.audit {
                Some(path) => writeln!(File::create(path)?, "{line}")?,
                None => eprintln!("{line}"),
            }
            Ok(())
        }
        Command::Metrics { input, communities } => {
            let (n, g) = read_simple(&input, fmt)?;
            let n = n as usize;
            let deg = graph::degrees(g.as_slice(), n);
            let mut out = open_out(&None)?;
            writeln!(out, "nodes\t{n}")?;
            writeln!(out, "edges\t{}", g.len())?;
            writeln!(out, "triangles\t{}", triangle_count(&g))?;
            match degree_assortativity(&g) {
                Some(r) => writeln!(out, "assortativity\t{r}")?,
                None => writeln!(out, "assortativity\tundefined")?,
            }
            writeln!(out, "clustering\t{}", avg_local_clustering(&g, n))?;
            writeln!(out, "distinct_degrees\t{}", distinct_degree_count(&deg))?;
            if let Some(path) = &communities {
                let truth = read_assignment(File::open(path)?)?;
                match realized_mixing(&g, &truth, n).mean {
                    Some(m) => writeln!(out, "mixing\t{m}")?,
                    None => writeln!(out, "mixing\tundefined")?,
                }
            }
            Ok(())
        }
        Command::Converge {
            input,
            output,
            sampler,
            ensemble,
            max_multiple,
            seed,
            jobs,
        } => {
            let d = read_degrees(open_in(&input)?, fmt)?;
            let start = match sampler {
                Sampler::Hh => {
                    let out = hh_edges(&compact(&d)?);
                    if !out.graphical {
                        return Err(Error::Validation("degree sequence is not graphical".into()));
                    }
                    EnsembleStart::Fixed(out.edges)
                }
                Sampler::Cm => EnsembleStart::ConfigurationModel(d),
            };
            let pool = rayon_pool(jobs)?;
            let report = pool.install(|| {
                convergence_experiment(&start, ensemble, max_multiple, &Metric::ALL, Seed(seed), &em)
            })?;
            for t in &report.trajectories {
                match t.convergence {
                    Some(p) => eprintln!("{}\tconverged at {p}m", t.metric.name()),
                    None => eprintln!("{}\tnot converged", t.metric.name()),
                }
            }
            write_convergence_csv(open_out(&output)?, &report)
        }
    }
}

fn rayon_pool(jobs: Option<usize>) -> emlfr::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Domain(_) | Error::Usage(_) => 2,
        Error::LasVegas { .. } => 3,
        Error::Io(_) => 1,
    }
}
