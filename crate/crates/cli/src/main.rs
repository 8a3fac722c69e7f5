use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use v2x_chest::config::ExperimentConfig;
use v2x_chest::frame::{buffering_time_us, tdr, FrameSpec, PilotScheme};
use v2x_chest::metrics::{complexity, ratio_table, ComplexityParams, MetricsReport, Scheme};
use v2x_chest::sim;

/// Channel estimation experiments for IEEE 802.11p vehicular links.
#[derive(Parser)]
#[command(name = "v2x-chest", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo NMSE/BER sweep; writes one CSV row per estimator and SNR.
    Simulate(RunArgs),
    /// Writes train.wice and test.wice (plus .meta.csv sidecars) into --out.
    ExportDataset(RunArgs),
    /// Scores a prediction file against the dataset it was made from.
    EvalPredictions {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset written by export-dataset.
        #[arg(long)]
        dataset: PathBuf,
        /// Predictions in the same container, without targets.
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Operation counts of every scheme and the LMMSE/WI ratios.
    Complexity {
        /// Pilot symbols per frame for the WI counts.
        #[arg(long = "pilot-symbols", short = 'P', default_value_t = 1)]
        pilot_symbols: u64,
        #[arg(long, default_value_t = 52)]
        active: u64,
        /// Symbols per frame, I.
        #[arg(long, default_value_t = 100)]
        symbols: u64,
        /// DFT taps, L.
        #[arg(long, default_value_t = 12)]
        taps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data-rate gain and buffering time of every WI frame layout.
    Tdr {
        /// Symbols per frame, I.
        #[arg(long, default_value_t = 100)]
        symbols: usize,
        /// LP pilots per pilot symbol, L.
        #[arg(long, default_value_t = 12)]
        taps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags shared by the Monte-Carlo subcommands. They override the config file,
/// whose own defaults are: scenario VTV-SDWW-500, frames 100, snr 0,10,20,30,40,
/// modulation 4, seed 1, estimators wi-fp-sls,wi-fp-als,wi-lp,lmmse-100,
/// symbols 100, workers 0 (one per core), [wi] P from Doppler (1 up to 250 Hz,
/// 2 up to 500 Hz, else 3) L 12 scheme fp-als, [lmmse] window 100, [rbf] r0 4500,
/// [addtt] alpha 0.5 beta 2, [export] train 8000 test 2000 snr 30.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV file (simulate, eval-predictions) or directory (export-dataset); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Frames per SNR point [default: 100].
    #[arg(long)]
    frames: Option<usize>,
    /// Comma-separated SNR list in dB [default: 0,10,20,30,40].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    /// Comma-separated estimators: ideal, ls, lmmse[-W], rbf, addtt, wi-fp-sls, wi-fp-als, wi-lp.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// Worker threads, 0 for one per core [default: 0].
    #[arg(long)]
    workers: Option<usize>,
    /// Built-in channel profile: VTV-UC, VTV-SDWW-500, VTV-SDWW-1000 [default: VTV-SDWW-500].
    #[arg(long)]
    scenario: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("{}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.frames {
            cfg.frames = v;
        }
        if let Some(v) = &self.snr {
            cfg.snr = v.clone();
        }
        if let Some(v) = &self.estimators {
            cfg.estimators = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = &self.scenario {
            cfg.scenario = v.clone();
            cfg.profile = None;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_report(out: Option<&PathBuf>, report: &MetricsReport) -> Result<()> {
    emit(out, &report.to_csv_string())
}

fn complexity_table(p: &ComplexityParams) -> String {
    let mut s = String::from("scheme,mul_div,sum_sub,total\n");
    for scheme in Scheme::ALL {
        let c = complexity(scheme, p);
        s += &format!("{},{},{},{}\n", scheme.id(), c.mul_div, c.sum_sub, c.total());
    }
    s += "\nnumerator,denominator,ratio\n";
    for (a, b, r) in ratio_table(p) {
        s += &format!("{},{},{r:.4}\n", a.id(), b.id());
    }
    s
}

fn tdr_table(symbols: usize, taps: usize) -> Result<String> {
    let mut s = String::from("P,scheme,gain_pct,phi_us\n");
    for p in 1..=3 {
        for scheme in [PilotScheme::Full, PilotScheme::Lp] {
            let spec = FrameSpec::weighted(symbols, p, scheme).with_lp_pilots(taps);
            spec.validate()?;
            let name = match scheme {
                PilotScheme::Full => "FP",
                PilotScheme::Lp => "LP",
            };
            s += &format!(
                "{p},{name},{:.2},{}\n",
                tdr(&spec).gain_pct_2dp(),
                buffering_time_us(&spec)
            );
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Command::Simulate(args) => {
            let cfg = args.config()?;
            emit_report(cfg.out.as_ref(), &sim::run(&cfg)?)
        }
        Command::ExportDataset(args) => {
            let cfg = args.config()?;
            let Some(dir) = cfg.out.clone() else {
                bail!("export-dataset needs --out DIR");
            };
            for path in sim::export_dataset(&cfg, &dir)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::EvalPredictions {
            run,
            dataset,
            predictions,
        } => {
            let cfg = run.config()?;
            emit_report(cfg.out.as_ref(), &sim::eval_predictions(&cfg, &dataset, &predictions)?)
        }
        Command::Complexity {
            pilot_symbols,
            active,
            symbols,
            taps,
            out,
        } => {
            if active <= 4 {
                bail!("--active must exceed the 4 standard pilots");
            }
            if !(1..symbols).contains(&pilot_symbols) {
                bail!("--pilot-symbols must be between 1 and symbols - 1");
            }
            let p = ComplexityParams {
                k_on: active,
                k_p: 4,
                k_d: active - 4,
                symbols,
                data_symbols: symbols - pilot_symbols,
                taps,
                pilot_symbols,
            };
            emit(out.as_ref(), &complexity_table(&p))
        }
        Command::Tdr { symbols, taps, out } => emit(out.as_ref(), &tdr_table(symbols, taps)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
