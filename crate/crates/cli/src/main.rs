//! `inthist` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 capacity or bounds error,
//! 4 I/O error.

mod args;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inthist::bench::{self, BenchConfig, BenchEntry, LikelihoodBenchConfig};
use inthist::io::{deserialize_ih, read_pgm, serialize_ih, write_map_pgm};
use inthist::tiler::TensorFileSink;
use inthist::{
    best_match, compute, compute_streamed, likelihood_map, plan_tiles, region_histogram, with_workers, BinSpec,
    Error, GrayImage, Metric, Result, Strategy,
};

use args::{parse_list, parse_region, parse_size, resolve_strategy};

#[derive(Debug, Parser)]
#[command(name = "inthist", version, about = "Integral histograms of grayscale images")]
struct Cli {
    /// Cap on worker threads used inside library calls (0 = one per hardware thread).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the integral histogram of a PGM image and write a tensor file.
    Compute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bins: usize,
        /// sequential, crossweave, sts or wavefront.
        #[arg(long, default_value = "crossweave")]
        strategy: String,
        /// Wavefront tile side in pixels.
        #[arg(long)]
        tile: Option<usize>,
        /// Stream under this many bytes of working memory instead of computing in memory.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the histogram of an inclusive region `r0,c0,r1,c1`, one bin per line.
    Query {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        /// Print fractions instead of counts.
        #[arg(long)]
        normalize: bool,
    },
    /// Score every window placement against a template region and render the map.
    Likelihood {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bins: usize,
        /// Template region `r0,c0,r1,c1`; its extents set the window size.
        #[arg(long, allow_hyphen_values = true)]
        template: String,
        #[arg(long, default_value = "bhattacharyya")]
        metric: String,
        #[arg(long, default_value = "crossweave")]
        strategy: String,
        #[arg(long)]
        tile: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time strategies over a sweep and write CSV.
    Bench {
        /// Comma-separated sizes, `WxH` or `N` for square.
        #[arg(long, default_value = "512x512")]
        sizes: String,
        #[arg(long, default_value = "16")]
        bins: String,
        #[arg(long, default_value = "sequential,crossweave,sts,wavefront")]
        strategies: String,
        /// Wavefront tile sides; each wavefront entry runs once per tile.
        #[arg(long, default_value = "64")]
        tiles: String,
        /// Worker caps to sweep; defaults to the global --workers value.
        #[arg(long)]
        worker_counts: Option<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        warmup: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also time likelihood maps for these window sides at a fixed map size.
        #[arg(long)]
        likelihood_windows: Option<String>,
        #[arg(long, default_value_t = 256)]
        map_side: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    let result = with_workers(workers, || run(cli.command, workers)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("inthist: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command, workers: usize) -> Result<()> {
    match command {
        Command::Compute {
            input,
            bins,
            strategy,
            tile,
            budget,
            out,
        } => cmd_compute(&input, bins, &strategy, tile, budget, &out),
        Command::Query {
            tensor,
            region,
            normalize,
        } => cmd_query(&tensor, &region, normalize),
        Command::Likelihood {
            input,
            bins,
            template,
            metric,
            strategy,
            tile,
            out,
        } => cmd_likelihood(&input, bins, &template, &metric, &strategy, tile, &out),
        Command::Bench {
            sizes,
            bins,
            strategies,
            tiles,
            worker_counts,
            reps,
            warmup,
            seed,
            likelihood_windows,
            map_side,
            out,
        } => {
            let tiles: Vec<usize> = parse_list(&tiles, "tiles")?;
            let strategies = strategies
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|name| resolve_strategy(name, None))
                .collect::<Result<Vec<_>>>()?;
            if strategies.is_empty() {
                return Err(Error::Parameter("--strategies must name at least one strategy".into()));
            }
            let mut expanded = Vec::new();
            for s in strategies {
                match s {
                    Strategy::WavefrontTiled { .. } => {
                        for &t in &tiles {
                            expanded.push(Strategy::wavefront(t)?);
                        }
                    }
                    other => expanded.push(other),
                }
            }
            let config = BenchConfig {
                sizes: parse_list::<String>(&sizes, "sizes")?
                    .iter()
                    .map(|s| parse_size(s))
                    .collect::<Result<_>>()?,
                bins: parse_list(&bins, "bins")?,
                strategies: expanded,
                workers: match worker_counts {
                    Some(list) => parse_list(&list, "worker-counts")?,
                    None => vec![workers],
                },
                warmup,
                reps,
                seed,
            };
            let likelihood = likelihood_windows
                .map(|list| -> Result<_> {
                    Ok(LikelihoodBenchConfig {
                        map_side,
                        windows: parse_list(&list, "likelihood-windows")?,
                        bins: config.bins.first().copied().unwrap_or(16),
                        metric: Metric::default(),
                        workers,
                        warmup,
                        reps,
                        seed,
                    })
                })
                .transpose()?;
            cmd_bench(&config, likelihood.as_ref(), &out)
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_image(path: &Path) -> Result<GrayImage> {
    read_pgm(&read_file(path)?)
}

fn cmd_compute(
    input: &Path,
    bins: usize,
    strategy: &str,
    tile: Option<usize>,
    budget: Option<u64>,
    out: &Path,
) -> Result<()> {
    let strategy = resolve_strategy(strategy, tile)?;
    let spec = BinSpec::uniform(bins)?;
    let img = load_image(input)?;
    match budget {
        Some(budget) => {
            let plan = plan_tiles(img.width(), img.height(), bins, budget)?;
            let file = File::create(out)?;
            let mut sink = TensorFileSink::new(BufWriter::new(file), img.width(), img.height(), bins)?;
            let summary = compute_streamed(&img, &spec, &plan, &mut sink)?;
            sink.into_inner()?;
            eprintln!(
                "streamed {}x{}x{bins}: {} bin chunks x {} strips, peak {} of {budget} bytes",
                img.width(),
                img.height(),
                summary.chunks,
                summary.strips,
                summary.peak_bytes
            );
        }
        None => {
            let ih = compute(&img, &spec, strategy)?;
            write_file(out, &serialize_ih(&ih)?)?;
        }
    }
    Ok(())
}

fn cmd_query(tensor: &Path, region: &str, normalize: bool) -> Result<()> {
    let region = parse_region(region)?;
    let ih = deserialize_ih(&read_file(tensor)?)?;
    let hist = region_histogram(&ih, &region)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if normalize {
        for f in hist.normalize()?.fractions() {
            writeln!(out, "{f}")?;
        }
    } else {
        for c in hist.counts() {
            writeln!(out, "{c}")?;
        }
    }
    Ok(())
}

fn cmd_likelihood(
    input: &Path,
    bins: usize,
    template: &str,
    metric: &str,
    strategy: &str,
    tile: Option<usize>,
    out: &Path,
) -> Result<()> {
    let region = parse_region(template)?;
    let metric: Metric = metric.parse()?;
    let strategy = resolve_strategy(strategy, tile)?;
    let spec = BinSpec::uniform(bins)?;
    let img = load_image(input)?;
    let ih = compute(&img, &spec, strategy)?;
    let tpl = region_histogram(&ih, &region)?.normalize()?;
    let map = likelihood_map(&ih, &tpl, region.height(), region.width(), metric)?;
    write_file(out, &write_map_pgm(map.rows(), map.cols(), map.values())?)?;
    let (r, c, score) = best_match(&map);
    println!("{r} {c} {score}");
    Ok(())
}

fn cmd_bench(config: &BenchConfig, likelihood: Option<&LikelihoodBenchConfig>, out: &Path) -> Result<()> {
    let mut entries = bench::run_bench(config)?;
    if let Some(lik) = likelihood {
        entries.extend(bench::run_likelihood_bench(lik)?);
    }
    for e in &entries {
        match e {
            BenchEntry::Skipped { label, reason } => eprintln!("skipped {label}: {reason}"),
            BenchEntry::Measured(r) => eprintln!(
                "{:<12} {}x{} bins={} tile={} workers={}: median {:.3} ms ({:.2} fps)",
                r.strategy, r.width, r.height, r.bins, r.tile, r.workers, r.median_ms, r.throughput_fps
            ),
        }
    }
    let mut file = BufWriter::new(File::create(out)?);
    bench::write_csv(&mut file, bench::measured(&entries))?;
    file.flush()?;
    Ok(())
}
