use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use finikey_cli::commands::{
    bounds_table, eff_table, fer_table, fit_table, histogram_summary, lambda_from_arg, read_points, BoundsFlags,
    GroupBy,
};
use finikey_cli::figure::{figure1, figure2, figure3, lambda_for_rate, Fig1Plan, Fig2Plan, Fig3Plan, Scale};
use finikey_cli::manifest::RunManifest;
use finikey_cli::range::{parse_counts, parse_reals};
use finikey_cli::table::Table;
use finikey_core::fit::DEFAULT_FLOOR;
use finikey_core::ldpc::{peg_construct, DEFAULT_MAX_ITER};
use finikey_core::sim::{TrialConfig, DEFAULT_MAX_TRIALS, DEFAULT_STOP_ERRORS};
use finikey_core::{ParityCheckMatrix, RateAdaptedCode};

#[derive(Parser)]
#[command(name = "finikey", version, about = "Finite-key reconciliation bounds and LDPC simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Converse/achievability bounds over an (n, eps, q) grid.
    Bounds {
        /// Block lengths: list or start:stop:logK / linK.
        #[arg(long)]
        n: String,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        q: String,
        /// Compute only the listed column groups; all three when none given.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        expansion: bool,
        #[arg(long)]
        optimized: bool,
        /// Add the Berry-Esseen constant to the converse expansion.
        #[arg(long)]
        constant: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a PEG code and write it as alist.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rate: f64,
        /// lambda1, lambda2, lambda3 or a polynomial file; defaults by rate.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// FER over a Q list, or calibrated efficiency points with --eps.
    Simulate {
        /// alist file.
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        q: String,
        /// Target FERs; switches to calibration.
        #[arg(long)]
        eps: Option<String>,
        #[command(flatten)]
        trials: TrialArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares (xi1, xi2) per group of simulated points.
    Fit {
        /// fer.csv or eff.csv.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor_filter: f64,
        /// q, q-eps or leak.
        #[arg(long, default_value = "q")]
        group_by: GroupBy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a figure's data as CSV files in --out.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        number: u8,
        #[arg(long, default_value = "desk")]
        scale: Scale,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the pipeline's error target.
        #[arg(long)]
        stop_errors: Option<u64>,
        /// Override the pipeline's trial cap.
        #[arg(long)]
        max_trials: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STOP_ERRORS)]
    stop_errors: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
    max_trials: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

impl TrialArgs {
    fn config(&self, q: f64) -> TrialConfig {
        TrialConfig {
            stop_errors: self.stop_errors,
            max_trials: self.max_trials,
            max_iter: self.max_iter,
            ..TrialConfig::new(q, self.seed)
        }
    }

    fn stamp(&self, m: RunManifest) -> RunManifest {
        m.param("stop_errors", self.stop_errors)
            .param("max_trials", self.max_trials)
            .param("max_iter", self.max_iter)
    }
}

/// Outcome of a command: Ok(flagged row count) or a fatal error.
type Outcome = Result<usize, String>;

fn emit(table: &Table, out: Option<&PathBuf>, manifest: &RunManifest) -> Outcome {
    table
        .write(out.map(|p| p.as_path()), manifest)
        .map_err(|e| format!("writing output: {e}"))?;
    for note in &table.notes {
        eprintln!("flagged: {note}");
    }
    Ok(table.flagged)
}

fn load_code(path: &PathBuf) -> Result<Arc<ParityCheckMatrix>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ParityCheckMatrix::from_alist(&text)
        .map(Arc::new)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Bounds { n, eps, q, exact, expansion, optimized, constant, out } => {
            let ns = parse_counts(&n)?;
            let (eps_list, q_list) = (parse_reals(&eps)?, parse_reals(&q)?);
            let any = exact || expansion || optimized;
            let flags = BoundsFlags {
                exact: exact || !any,
                expansion: expansion || !any,
                optimized: optimized || !any,
                constant,
            };
            let t = bounds_table(&ns, &eps_list, &q_list, flags);
            let m = RunManifest::new("bounds", 0)
                .param("n", n)
                .param("eps", eps)
                .param("q", q)
                .param("flags", format!("{flags:?}").replace(' ', ""));
            emit(&t, out.as_ref(), &m)
        }
        Command::Build { n, rate, lambda, seed, out } => {
            let l = match &lambda {
                Some(arg) => lambda_from_arg(arg)?,
                None => lambda_for_rate(rate),
            };
            let h = peg_construct(n, rate, &l, seed).map_err(|e| e.to_string())?;
            fs::write(&out, h.to_alist()).map_err(|e| format!("{}: {e}", out.display()))?;
            print!("{}", histogram_summary(&h, &l));
            Ok(0)
        }
        Command::Simulate { code, q, eps, trials, out } => {
            let base = load_code(&code)?;
            let q_list = parse_reals(&q)?;
            let m = trials.stamp(
                RunManifest::new("simulate", trials.seed)
                    .param("code", code.display())
                    .param("q", &q),
            );
            let first_q = q_list.first().copied().unwrap_or(0.01);
            match eps {
                Some(eps) => {
                    let targets = parse_reals(&eps)?;
                    let t = eff_table(&base, &q_list, &targets, &trials.config(first_q));
                    emit(&t, out.as_ref(), &m.param("eps", eps))
                }
                None => {
                    let code = RateAdaptedCode::unmodulated(base);
                    let t = fer_table(&code, &q_list, &trials.config(first_q));
                    emit(&t, out.as_ref(), &m)
                }
            }
        }
        Command::Fit { points, floor_filter, group_by, out } => {
            let text = fs::read_to_string(&points).map_err(|e| format!("{}: {e}", points.display()))?;
            let records = read_points(&text).map_err(|e| format!("{}: {e}", points.display()))?;
            let t = fit_table(&records, floor_filter, group_by);
            let m = RunManifest::new("fit", 0)
                .param("points", points.display())
                .param("floor", floor_filter)
                .param("group_by", format!("{group_by:?}").to_lowercase());
            emit(&t, out.as_ref(), &m)
        }
        Command::Figure { number, scale, seed, stop_errors, max_trials, max_iter, svg, out } => {
            let tune = |b: &mut finikey_cli::figure::Budget| {
                b.stop_errors = stop_errors.unwrap_or(b.stop_errors);
                b.max_trials = max_trials.unwrap_or(b.max_trials);
                b.max_iter = max_iter.unwrap_or(b.max_iter);
            };
            let mut output = match number {
                1 => {
                    let mut plan = Fig1Plan::for_scale(scale);
                    plan.points.iter_mut().for_each(|(_, b)| tune(b));
                    figure1(&plan, seed)
                }
                2 => {
                    let mut plan = Fig2Plan::for_scale(scale);
                    tune(&mut plan.budget);
                    figure2(&plan, seed)
                }
                _ => {
                    let mut plan = Fig3Plan::for_scale(scale);
                    tune(&mut plan.budget);
                    figure3(&plan, seed)
                }
            };
            if !svg {
                output.svgs.clear();
            }
            for f in &mut output.files {
                f.manifest.parameters.push(("scale".into(), scale.to_string()));
            }
            for path in output.write(&out).map_err(|e| format!("{}: {e}", out.display()))? {
                eprintln!("wrote {}", path.display());
            }
            for note in output.notes() {
                eprintln!("flagged: {note}");
            }
            Ok(output.flagged())
        }
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("FINIKEY_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("FINIKEY_THREADS ignored: {e}");
        }
    }
    match run(Cli::parse().command) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(flagged) => {
            eprintln!("{flagged} row(s) flagged");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
