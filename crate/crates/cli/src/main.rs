//! `rlt`: build, query and evaluate relative location tree sketches.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rlt_sketch::harness::{
    evaluate, gen_lowerbound_euclidean, gen_lowerbound_general, ingest::ingest_with, ingest::write_text,
    recover_bits, recover_distances, InputFormat,
};
use rlt_sketch::{build_euclidean_sketch, build_lp_sketch, Epsilon, Error, Norm, QueryContext, SketchBits};

#[derive(Parser)]
#[command(name = "rlt", version, about = "Compact distance sketches for point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a sketch from a point or metric file.
    Sketch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: InputFormat,
        /// Norm order: a positive integer or `inf`. Metric files always use `inf`.
        #[arg(long, default_value = "2")]
        p: Norm,
        #[arg(long)]
        eps: f64,
        /// Randomized Euclidean sketch (requires p = 2).
        #[arg(long)]
        euclidean: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Divide ε by 4 so that estimates are within 1 ± ε instead of 1 ± 4ε.
        #[arg(long)]
        quarter_eps: bool,
        /// Run the cubic triangle-inequality check on metrics of any size.
        #[arg(long)]
        check_triangle: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the distance between points `i` and `j`.
    Estimate {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Compare every pairwise estimate with the exact distance.
    Evaluate {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        format: InputFormat,
        /// Tolerated relative error (on squared distances for Euclidean sketches).
        #[arg(long)]
        band: f64,
        /// Fraction of pairs that must lie within the band.
        #[arg(long, default_value_t = 1.0)]
        min_fraction: f64,
        /// Per-pair lines go here; the summary goes to `<report>.json`.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate the sparse-vector instance: 2n points in R^n.
    GenLbEuclidean {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Points file; the planted bits go to `<out>.planted`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random metric with distances 1 + kε.
    GenLbGeneral {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Metric file; the planted values go to `<out>.planted`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover planted values from a sketch of a generated instance.
    Recover {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        /// Compare with a planted file and fail on any mismatch.
        #[arg(long)]
        planted: Option<PathBuf>,
    },
    /// Print the header and per-section bit counts.
    Info {
        #[arg(long)]
        sketch: PathBuf,
    },
}

enum Failure {
    Contract(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn matrix_text<T: ToString>(rows: &[Vec<T>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(T::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Sketch {
            input,
            format,
            p,
            eps,
            euclidean,
            seed,
            quarter_eps,
            check_triangle,
            out,
        } => {
            let eps = if quarter_eps { eps / 4.0 } else { eps };
            let norm = if format == InputFormat::Metric { Norm::Inf } else { p };
            let ps = ingest_with(&input, format, norm, check_triangle)?;
            let bits = if euclidean {
                build_euclidean_sketch(&ps, eps, seed)?
            } else {
                build_lp_sketch(&ps, Epsilon::from_f64(eps)?)?
            };
            bits.write_to(&out)?;
            println!("wrote {} bits to {}", bits.len_bits(), out.display());
        }
        Command::Estimate { sketch, i, j } => {
            let ctx = QueryContext::from_bits(&SketchBits::read_from(&sketch)?)?;
            println!("{}", ctx.estimate(i, j)?);
        }
        Command::Evaluate {
            sketch,
            input,
            format,
            band,
            min_fraction,
            report,
            seed,
        } => {
            let bits = SketchBits::read_from(&sketch)?;
            let header = bits.header()?;
            let ctx = QueryContext::from_bits(&bits)?;
            let ps = ingest_with(&input, format, header.norm, false)?;
            let mut rep = evaluate(&ctx, &ps, band, bits.size_report()?)?;
            rep.seed = seed;
            if let Some(path) = report {
                rep.write_pairs(BufWriter::new(fs::File::create(&path)?))?;
                fs::write(with_suffix(&path, ".json"), rep.summary_json() + "\n")?;
            }
            println!("{}", rep.summary_json());
            eprintln!("queries took {:.3}s", rep.query_seconds);
            if rep.fraction_within_band < min_fraction {
                return Err(Failure::Contract(format!(
                    "{:.6} of pairs within band {band}, required {min_fraction}",
                    rep.fraction_within_band
                )));
            }
        }
        Command::GenLbEuclidean { n, eps, seed, out } => {
            let inst = gen_lowerbound_euclidean(n, eps, seed)?;
            write_text(&out, &inst.points)?;
            let bits: Vec<Vec<u8>> = inst.bits.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
            fs::write(with_suffix(&out, ".planted"), matrix_text(&bits))?;
        }
        Command::GenLbGeneral { n, eps, seed, out } => {
            let inst = gen_lowerbound_general(n, eps, seed)?;
            fs::write(&out, inst.metric.to_text())?;
            fs::write(with_suffix(&out, ".planted"), matrix_text(&inst.k))?;
        }
        Command::Recover {
            sketch,
            n,
            eps,
            planted,
        } => {
            let ctx = QueryContext::from_bits(&SketchBits::read_from(&sketch)?)?;
            let text = if ctx.header().euclidean {
                if ctx.len() != 2 * n {
                    return Err(Error::DimensionMismatch {
                        expected: 2 * n,
                        found: ctx.len(),
                    }
                    .into());
                }
                let bits = recover_bits(&ctx, n, eps)?;
                matrix_text(&bits.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect::<Vec<Vec<u8>>>())
            } else {
                if ctx.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: ctx.len(),
                    }
                    .into());
                }
                matrix_text(&recover_distances(&ctx, eps)?)
            };
            io::stdout().write_all(text.as_bytes())?;
            if let Some(path) = planted {
                if fs::read_to_string(&path)? != text {
                    return Err(Failure::Contract("recovered values differ from the planted ones".into()));
                }
                eprintln!("all planted values recovered");
            }
        }
        Command::Info { sketch } => {
            let bits = SketchBits::read_from(&sketch)?;
            let h = bits.header()?;
            let size = bits.size_report()?;
            println!(
                "n = {}, d = {}, p = {}, eps = {}, scale = 2^{}, phi <= 2^{}, {}",
                h.n,
                h.d,
                h.norm,
                h.eps.value(),
                h.scale_exponent,
                h.phi_exponent,
                if h.euclidean { "euclidean" } else { "lp" }
            );
            println!("{}", size.to_json());
            println!("total bits: {}", size.total());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Contract(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
