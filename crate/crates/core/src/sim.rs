//! Monte-Carlo runner, dataset export and prediction scoring.
//!
//! Every frame draws from its own ChaCha stream, `(seed, frame << 8 | purpose)`,
//! so a frame's channel, payload and noise do not depend on how frames are
//! spread over workers. Per-frame results are merged in frame order.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{ideal, ls_preamble, AddTtEstimator, LmmseEstimator, RbfEstimator};
use crate::channel::{apply_channel, noise_variance, sample_channel, ChannelRealization, ReceivedFrame};
use crate::config::{EstimatorId, ExperimentConfig};
use crate::dataset::{read_dataset, write_dataset, DatasetRecord};
use crate::error::{Error, Result};
use crate::estimate::EstimateGrid;
use crate::frame::{buffering_time_us, tdr, FrameGrid, FrameSpec};
use crate::linalg::CMatrix;
use crate::metrics::{
    bit_errors, complexity, equalize_demap, squared_error, ComplexityParams, MetricsReport,
    OpCount, PointStats, ReportRow, Scheme,
};
use crate::wi::{WiEstimator, WiScheme, WiWeightTable};

const PURPOSE_CHANNEL: u64 = 0;
const PURPOSE_BITS: u64 = 1;

/// The RNG stream for one purpose of one frame.
pub fn frame_rng(seed: u64, frame: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((frame << 8) | purpose);
    rng
}

/// Frame layouts an experiment can transmit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Structure {
    Standard,
    Wi(WiScheme),
}

impl Structure {
    fn purpose(self) -> u64 {
        PURPOSE_BITS
            + match self {
                Self::Standard => 0,
                Self::Wi(WiScheme::FpSls) => 1,
                Self::Wi(WiScheme::FpAls) => 2,
                Self::Wi(WiScheme::Lp) => 3,
            }
    }
}

enum Prepared {
    Ideal,
    Ls,
    Lmmse(LmmseEstimator),
    Rbf(Box<RbfEstimator>),
    AddTt(AddTtEstimator),
    Wi(WiEstimator),
}

struct Slot {
    id: EstimatorId,
    structure: Structure,
    est: Prepared,
}

/// Everything needed to simulate frames of one configuration.
pub struct Simulation {
    pub cfg: ExperimentConfig,
    profile: crate::channel::TdlProfile,
    structures: Vec<(Structure, FrameSpec)>,
    slots: Vec<Slot>,
    table: Arc<WiWeightTable>,
}

impl Simulation {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let profile = cfg.profile()?;
        let mut structures: Vec<(Structure, FrameSpec)> = Vec::new();
        let mut slots = Vec::new();
        let mut keys = Vec::new();
        for id in cfg.estimator_ids()? {
            let structure = match id {
                EstimatorId::Wi(s) => Structure::Wi(s),
                _ => Structure::Standard,
            };
            let spec = match structure {
                Structure::Standard => cfg.standard_spec()?,
                Structure::Wi(s) => cfg.wi_spec(s)?,
            };
            if !structures.iter().any(|(s, _)| *s == structure) {
                structures.push((structure, spec.clone()));
            }
            let est = match id {
                EstimatorId::Ideal => Prepared::Ideal,
                EstimatorId::Ls => Prepared::Ls,
                EstimatorId::Lmmse(w) => Prepared::Lmmse(LmmseEstimator::new(&spec, &profile, w)?),
                EstimatorId::Rbf => Prepared::Rbf(Box::new(RbfEstimator::new(&spec, cfg.rbf.r0)?)),
                EstimatorId::AddTt => Prepared::AddTt(AddTtEstimator::new(&spec, cfg.addtt_params())?),
                EstimatorId::Wi(s) => {
                    let w = WiEstimator::new(s, &spec, profile.doppler_hz)?;
                    for &snr in &cfg.snr {
                        keys.extend(w.weight_keys(noise_variance(snr)));
                    }
                    if cfg.export.snr.is_finite() {
                        keys.extend(w.weight_keys(noise_variance(cfg.export.snr)));
                    }
                    Prepared::Wi(w)
                }
            };
            slots.push(Slot { id, structure, est });
        }
        Ok(Self {
            cfg: cfg.clone(),
            profile,
            structures,
            slots,
            table: Arc::new(WiWeightTable::build(keys)?),
        })
    }

    fn spec(&self, s: Structure) -> &FrameSpec {
        &self.structures.iter().find(|(x, _)| *x == s).expect("structure registered").1
    }

    /// The channel of frame `frame`, shared by every estimator and SNR.
    pub fn channel(&self, frame: u64) -> Result<ChannelRealization> {
        let spec = self.cfg.standard_spec()?;
        sample_channel(&self.profile, &spec, &mut frame_rng(self.cfg.seed, frame, PURPOSE_CHANNEL))
    }

    fn grid(&self, frame: u64, s: Structure) -> Result<FrameGrid> {
        FrameGrid::random(self.spec(s), &mut frame_rng(self.cfg.seed, frame, s.purpose()))
    }

    /// The transmitted standard-layout frame of `frame`.
    pub fn standard_grid(&self, frame: u64) -> Result<FrameGrid> {
        FrameGrid::random(
            &self.cfg.standard_spec()?,
            &mut frame_rng(self.cfg.seed, frame, Structure::Standard.purpose()),
        )
    }

    fn estimate(&self, slot: &Slot, rx: &ReceivedFrame, chan: &ChannelRealization) -> Result<EstimateGrid> {
        let spec = self.spec(slot.structure);
        let grid = match &slot.est {
            Prepared::Ideal => ideal(chan),
            Prepared::Ls => {
                let h = ls_preamble(&rx.preamble[0], &rx.preamble[1])?;
                let cols = vec![h; spec.symbols];
                EstimateGrid::new(CMatrix::from_columns(&cols), "ls")
            }
            Prepared::Lmmse(e) => e.estimate(rx)?,
            Prepared::Rbf(e) => e.estimate(rx)?,
            Prepared::AddTt(e) => e.estimate(rx)?,
            Prepared::Wi(e) => e.estimate(rx, Some(&self.table))?,
        };
        if !grid.is_finite() {
            return Err(Error::IllConditioned(format!("{} produced non-finite estimates", slot.id.name())));
        }
        Ok(grid)
    }

    /// Stats for every (estimator, SNR) pair of one frame, estimator-major.
    pub fn run_frame(&self, frame: u64) -> Result<Vec<PointStats>> {
        let chan = self.channel(frame)?;
        let truth = chan.data_region();
        let grids: Vec<(Structure, FrameGrid)> = self
            .structures
            .iter()
            .map(|(s, _)| Ok((*s, self.grid(frame, *s)?)))
            .collect::<Result<_>>()?;
        let mut out = vec![PointStats::default(); self.slots.len() * self.cfg.snr.len()];
        for (j, &snr) in self.cfg.snr.iter().enumerate() {
            for (s, grid) in &grids {
                let rx = apply_channel(grid, &chan, snr)?;
                let cells = grid.data_cells();
                for (n, slot) in self.slots.iter().enumerate().filter(|(_, x)| x.structure == *s) {
                    let est = self.estimate(slot, &rx, &chan)?;
                    let (err, energy) = squared_error(&est.h, &truth)?;
                    let bits = equalize_demap(&rx.symbols, &est.h, &cells, grid.spec.modulation);
                    let errors = bit_errors(&bits, &grid.payload_bits)?;
                    out[n * self.cfg.snr.len() + j].record(err, energy, errors, bits.len() as u64);
                }
            }
        }
        Ok(out)
    }

    pub fn run(&self) -> Result<MetricsReport> {
        let frames = self.cfg.frames as u64;
        let per_frame: Vec<Vec<PointStats>> = pool(self.cfg.workers)?
            .install(|| (0..frames).into_par_iter().map(|f| self.run_frame(f)).collect::<Result<_>>())?;
        let mut totals = vec![PointStats::default(); self.slots.len() * self.cfg.snr.len()];
        for frame in &per_frame {
            for (t, s) in totals.iter_mut().zip(frame) {
                t.merge(s);
            }
        }
        let mut rows = Vec::new();
        for (n, slot) in self.slots.iter().enumerate() {
            let spec = self.spec(slot.structure);
            for (j, &snr) in self.cfg.snr.iter().enumerate() {
                rows.push(ReportRow {
                    estimator: slot.id.name(),
                    scenario: self.cfg.scenario_name(),
                    snr_db: snr,
                    stats: totals[n * self.cfg.snr.len() + j],
                    ops: estimator_ops(slot.id, spec),
                    tdr_gain_pct: tdr(spec).gain_pct_2dp(),
                    phi_us: estimator_latency_us(slot.id, spec),
                });
            }
        }
        Ok(MetricsReport { rows })
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config {
            line: 0,
            msg: format!("cannot start {workers} workers: {e}"),
        })
}

/// Runs the configured sweep.
pub fn run(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    Simulation::new(cfg)?.run()
}

fn complexity_params(spec: &FrameSpec, symbols: usize) -> ComplexityParams {
    ComplexityParams {
        k_on: spec.active as u64,
        k_p: spec.pilots_per_symbol as u64,
        k_d: spec.data_per_symbol as u64,
        symbols: symbols as u64,
        data_symbols: (symbols - spec.pilot_symbols) as u64,
        taps: spec.lp_pilots as u64,
        pilot_symbols: spec.pilot_symbols as u64,
    }
}

/// Analytic per-frame operation count of an estimator.
pub fn estimator_ops(id: EstimatorId, spec: &FrameSpec) -> Option<OpCount> {
    let p = complexity_params(spec, spec.symbols);
    let k_on = spec.active as u64;
    Some(match id {
        EstimatorId::Ideal => return None,
        EstimatorId::Ls => OpCount::new(2 * k_on, 2 * k_on),
        EstimatorId::Lmmse(w) => {
            let w = w.min(spec.symbols);
            let windows = spec.symbols.div_ceil(w) as u64;
            let one = complexity(Scheme::LmmseOffline, &complexity_params(spec, w));
            OpCount::new(one.mul_div * windows, one.sum_sub * windows)
        }
        EstimatorId::Rbf => complexity(Scheme::Rbf, &p),
        EstimatorId::AddTt => complexity(Scheme::AddTt, &p),
        EstimatorId::Wi(s) => complexity(Scheme::Wi(s), &p),
    })
}

/// Receiver buffering before an estimator can produce its first output, in µs.
pub fn estimator_latency_us(id: EstimatorId, spec: &FrameSpec) -> f64 {
    let us = |n: usize| (n as f64 * spec.symbol_duration * 1e12).round() / 1e6;
    match id {
        EstimatorId::Ideal | EstimatorId::Ls => 0.0,
        EstimatorId::AddTt => us(1),
        EstimatorId::Lmmse(w) => us(w.min(spec.symbols)),
        EstimatorId::Rbf => us(spec.symbols),
        EstimatorId::Wi(_) => buffering_time_us(spec),
    }
}

/// Where an exported record came from, kept beside the dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub index: u64,
    pub scenario: String,
    pub scheme: String,
    pub snr_db: f64,
    pub seed: u64,
    pub frame: u64,
}

/// `<stem>.meta.csv` next to `<stem>.wice`.
pub fn meta_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("meta.csv")
}

pub fn write_meta(path: &Path, metas: &[RecordMeta]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    for m in metas {
        w.serialize(m).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<Vec<RecordMeta>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|m| m.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

/// One regenerated frame of an export: receiver view, WI estimate and truth.
pub struct ExportFrame {
    pub grid: FrameGrid,
    pub rx: ReceivedFrame,
    pub estimate: EstimateGrid,
    pub truth: CMatrix,
}

/// Columns of the data-region grid that hold data symbols.
pub fn data_symbol_columns(spec: &FrameSpec) -> Vec<usize> {
    let pilots = spec.pilot_symbol_indices();
    (0..spec.symbols).filter(|i| !pilots.contains(i)).collect()
}

fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

impl Simulation {
    /// A simulation holding just the export scheme's WI estimator.
    pub fn for_export(cfg: &ExperimentConfig) -> Result<Self> {
        let cfg = ExperimentConfig {
            estimators: vec![format!("wi-{}", cfg.export_scheme().name())],
            snr: vec![cfg.export.snr],
            ..cfg.clone()
        };
        Self::new(&cfg)
    }

    fn export_slot(&self) -> Result<&Slot> {
        self.slots
            .iter()
            .find(|s| matches!(s.est, Prepared::Wi(_)))
            .ok_or_else(|| Error::Config {
                line: 0,
                msg: "export needs a WI estimator".into(),
            })
    }

    pub fn export_frame(&self, frame: u64, snr_db: f64) -> Result<ExportFrame> {
        let slot = self.export_slot()?;
        let chan = self.channel(frame)?;
        let grid = self.grid(frame, slot.structure)?;
        let rx = apply_channel(&grid, &chan, snr_db)?;
        let estimate = self.estimate(slot, &rx, &chan)?;
        Ok(ExportFrame {
            grid,
            rx,
            estimate,
            truth: chan.data_region(),
        })
    }
}

/// Builds `count` records starting at frame `first`.
pub fn export_records(
    cfg: &ExperimentConfig,
    first: u64,
    count: usize,
) -> Result<(Vec<DatasetRecord>, Vec<RecordMeta>)> {
    let sim = Simulation::for_export(cfg)?;
    let spec = sim.spec(sim.export_slot()?.structure).clone();
    let cols = data_symbol_columns(&spec);
    let snr = cfg.export.snr;
    let records: Vec<DatasetRecord> = pool(cfg.workers)?.install(|| {
        (first..first + count as u64)
            .into_par_iter()
            .map(|f| {
                let x = sim.export_frame(f, snr)?;
                Ok(DatasetRecord::from_complex(
                    &select_columns(&x.estimate.h, &cols),
                    Some(&select_columns(&x.truth, &cols)),
                ))
            })
            .collect::<Result<_>>()
    })?;
    let metas = (0..count as u64)
        .map(|n| RecordMeta {
            index: n,
            scenario: cfg.scenario_name(),
            scheme: cfg.export_scheme().name().into(),
            snr_db: snr,
            seed: cfg.seed,
            frame: first + n,
        })
        .collect();
    Ok((records, metas))
}

/// Writes `train.wice` and `test.wice` (with `.meta.csv` sidecars) into `dir`.
pub fn export_dataset(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let spec = cfg.wi_spec(cfg.export_scheme())?;
    let mut written = Vec::new();
    for (name, first, count) in [
        ("train", 0u64, cfg.export.train),
        ("test", cfg.export.train as u64, cfg.export.test),
    ] {
        let (records, metas) = export_records(cfg, first, count)?;
        let path = dir.join(format!("{name}.wice"));
        write_dataset(&path, spec.active, spec.data_symbols(), &records)?;
        write_meta(&meta_path(&path), &metas)?;
        written.push(path);
    }
    Ok(written)
}

/// Scores a prediction file against the dataset it was made from. The frames
/// are regenerated from the sidecar metadata; data-symbol columns of the WI
/// estimate are replaced by the predictions before equalization.
pub fn eval_predictions(cfg: &ExperimentConfig, dataset: &Path, predictions: &Path) -> Result<MetricsReport> {
    let (hdr, records) = read_dataset(dataset)?;
    let (phdr, preds) = read_dataset(predictions)?;
    if (hdr.active, hdr.data_symbols, hdr.count) != (phdr.active, phdr.data_symbols, phdr.count) {
        return Err(Error::Dimension(format!(
            "dataset is {} x {}x{}, predictions are {} x {}x{}",
            hdr.count, hdr.active, hdr.data_symbols, phdr.count, phdr.active, phdr.data_symbols
        )));
    }
    let metas = read_meta(&meta_path(dataset))?;
    if metas.len() != records.len() {
        return Err(Error::Format(format!(
            "{} metadata rows for {} records",
            metas.len(),
            records.len()
        )));
    }
    let first = metas.first();
    let mut cfg = cfg.clone();
    if let Some(m) = first {
        cfg.seed = m.seed;
        cfg.wi.scheme = m.scheme.clone();
        cfg.export.snr = m.snr_db;
    }
    let sim = Simulation::for_export(&cfg)?;
    let spec = sim.spec(sim.export_slot()?.structure).clone();
    if spec.data_symbols() != hdr.data_symbols || spec.active != hdr.active {
        return Err(Error::Dimension("dataset dimensions do not match the configured frame".into()));
    }
    let cols = data_symbol_columns(&spec);
    let results: Vec<(PointStats, PointStats)> = pool(cfg.workers)?.install(|| {
        metas
            .par_iter()
            .zip(preds.par_iter())
            .map(|(m, p)| {
                let x = sim.export_frame(m.frame, m.snr_db)?;
                let cells = x.grid.data_cells();
                let score = |h: &CMatrix| -> Result<PointStats> {
                    let (e, n) = squared_error(&select_columns(h, &cols), &select_columns(&x.truth, &cols))?;
                    let bits = equalize_demap(&x.rx.symbols, h, &cells, spec.modulation);
                    let mut s = PointStats::default();
                    s.record(e, n, bit_errors(&bits, &x.grid.payload_bits)?, bits.len() as u64);
                    Ok(s)
                };
                let mut post = x.estimate.h.clone();
                let pred = p.input_complex();
                for (c, &col) in cols.iter().enumerate() {
                    post.set_column(col, &pred.column(c));
                }
                Ok((score(&x.estimate.h)?, score(&post)?))
            })
            .collect::<Result<_>>()
    })?;
    let (mut pre, mut post) = (PointStats::default(), PointStats::default());
    for (a, b) in &results {
        pre.merge(a);
        post.merge(b);
    }
    let name = format!("wi-{}", cfg.export_scheme().name());
    let row = |estimator: String, stats| ReportRow {
        estimator,
        scenario: first.map(|m| m.scenario.clone()).unwrap_or_default(),
        snr_db: cfg.export.snr,
        stats,
        ops: None,
        tdr_gain_pct: tdr(&spec).gain_pct_2dp(),
        phi_us: buffering_time_us(&spec),
    };
    Ok(MetricsReport {
        rows: vec![row(name.clone(), pre), row(format!("{name}-cnn"), post)],
    })
}
