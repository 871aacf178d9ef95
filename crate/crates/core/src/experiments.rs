//! Reproducible experiment drivers.
//!
//! Every driver fans independent runs out over a small worker pool and
//! reassembles results in a fixed order, so output CSVs depend only on the
//! configuration and seeds. Variances are population variances over seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    ln_covering_ansatz_family, ln_covering_depolarizing, ln_covering_ideal, ln_covering_noisy_general, AnsatzFamily,
    BoundInput,
};
use crate::circuits::{build_hardware_efficient, build_vqe_ansatz, Circuit, VqeAnsatz, FEATURE_DIM};
use crate::data::{default_h2_table, generate_dataset_with, load_h2_table, qnn_observable, Dataset, DatasetConfig, H2Problem};
use crate::error::{Error, Result};
use crate::optimize::{init_params, train_qnn, train_vqe, AdamConfig, Optimizer, SgdConfig, TrainTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    QnnLayers,
    QnnNoise,
    VqeThreeAnsatze,
    VqeAdamDepths,
    ScalingFit,
    BoundsTable,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::QnnLayers,
        ExperimentId::QnnNoise,
        ExperimentId::VqeThreeAnsatze,
        ExperimentId::VqeAdamDepths,
        ExperimentId::ScalingFit,
        ExperimentId::BoundsTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::QnnLayers => "qnn_layers",
            ExperimentId::QnnNoise => "qnn_noise",
            ExperimentId::VqeThreeAnsatze => "vqe_three_ansatze",
            ExperimentId::VqeAdamDepths => "vqe_adam_depths",
            ExperimentId::ScalingFit => "scaling_fit",
            ExperimentId::BoundsTable => "bounds_table",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

/// How the generalization gap of a trained classifier is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMetric {
    /// Train accuracy minus test accuracy.
    #[default]
    Accuracy,
    /// Test loss minus train loss.
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QnnSettings {
    pub n_examples: usize,
    pub delta: f64,
    pub train_size: usize,
    pub sgd: SgdConfig,
    pub layers: Vec<usize>,
    pub noise_layers: usize,
    pub noise_levels: Vec<f64>,
}

impl Default for QnnSettings {
    fn default() -> Self {
        Self {
            n_examples: 400,
            delta: 0.2,
            train_size: 60,
            sgd: SgdConfig::qnn(),
            layers: (1..=5).collect(),
            noise_layers: 2,
            noise_levels: vec![0.1, 0.5, 0.9],
        }
    }
}

impl QnnSettings {
    pub fn dataset_config(&self) -> DatasetConfig {
        DatasetConfig {
            n: self.n_examples,
            delta: self.delta,
            train_size: self.train_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqeSettings {
    pub sgd: SgdConfig,
    pub adam: AdamConfig,
    pub adam_layers: Vec<usize>,
    pub adam_bond_length: f64,
    pub bond_min: f64,
    pub bond_max: f64,
    /// H₂ coefficient table; the shipped table when absent.
    pub table: Option<PathBuf>,
}

impl Default for VqeSettings {
    fn default() -> Self {
        Self {
            sgd: SgdConfig::vqe(),
            adam: AdamConfig::default(),
            adam_layers: vec![5, 10, 15, 20],
            adam_bond_length: 0.3,
            bond_min: 0.3,
            bond_max: 2.1,
            table: None,
        }
    }
}

impl VqeSettings {
    pub fn load_table(&self) -> Result<Vec<H2Problem>> {
        let mut table = match &self.table {
            Some(path) => load_h2_table(path)?,
            None => default_h2_table(),
        };
        table.retain(|p| p.bond_length >= self.bond_min - 1e-12 && p.bond_length <= self.bond_max + 1e-12);
        table.sort_by(|a, b| a.bond_length.total_cmp(&b.bond_length));
        if table.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no bond lengths in [{}, {}]",
                self.bond_min, self.bond_max
            )));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSettings {
    pub layers: Vec<usize>,
    pub gap_metric: GapMetric,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        Self {
            layers: (1..=15).collect(),
            gap_metric: GapMetric::Accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSettings {
    pub epsilon: f64,
    pub p: f64,
    pub qnn_layers: Vec<usize>,
    pub families: Vec<AnsatzFamily>,
}

impl Default for BoundsSettings {
    fn default() -> Self {
        let mut families: Vec<AnsatzFamily> = [1, 2, 5]
            .into_iter()
            .map(|layers| AnsatzFamily::HardwareEfficient { n: FEATURE_DIM, layers })
            .collect();
        for n in [4, 8, 16] {
            families.push(AnsatzFamily::Mps { n });
            families.push(AnsatzFamily::Tree { n });
        }
        families.push(AnsatzFamily::Uccsd { n: 4, k: 4 });
        Self {
            epsilon: 0.05,
            p: 0.1,
            qnn_layers: (1..=15).collect(),
            families,
        }
    }
}

/// Full experiment configuration. Every field has a default, so a config
/// file only needs the overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
    pub qnn: QnnSettings,
    pub vqe: VqeSettings,
    pub scaling: ScalingSettings,
    pub bounds: BoundsSettings,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seeds: vec![0, 1, 2, 3, 4],
            out_dir: None,
            qnn: QnnSettings::default(),
            vqe: VqeSettings::default(),
            scaling: ScalingSettings::default(),
            bounds: BoundsSettings::default(),
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config as overrides of [`ExperimentConfig::default`]. Nested
    /// objects merge key by key, so `{"vqe": {"sgd": {"epochs": 50}}}` keeps
    /// the VQE learning rate; arrays and scalars replace the default.
    pub fn from_json(text: &str) -> Result<Self> {
        let parse = |e: serde_json::Error| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        };
        let overrides: serde_json::Value = serde_json::from_str(text).map_err(parse)?;
        let mut merged = serde_json::to_value(Self::default()).expect("default config serializes");
        merge_json(&mut merged, overrides);
        let cfg: Self = serde_json::from_value(merged).map_err(parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("at least one seed is required".into()));
        }
        self.qnn.sgd.validate()?;
        self.vqe.sgd.validate()?;
        self.vqe.adam.validate()?;
        for &p in &self.qnn.noise_levels {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::NoiseOutOfRange(p));
            }
        }
        Ok(())
    }
}

fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    use serde_json::Value;
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (key, value) in patch {
                match base.get_mut(&key) {
                    Some(slot) => merge_json(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn worker_count(requested: usize, jobs: usize) -> usize {
    let n = if requested == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    };
    n.clamp(1, jobs.max(1))
}

/// Maps `f` over `items` on up to `workers` threads, preserving order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = worker_count(workers, items.len());
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One dataset per seed, generated concurrently.
pub fn generate_datasets(cfg: &ExperimentConfig) -> Result<Vec<Dataset>> {
    let dc = cfg.qnn.dataset_config();
    par_map(&cfg.seeds, cfg.workers, |&seed| generate_dataset_with(seed, dc))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnnRun {
    pub layers: usize,
    pub noise_p: Option<f64>,
    pub seed: u64,
    pub trace: TrainTrace,
}

/// Trains one hardware-efficient classifier per (layers, noise, dataset),
/// each initialised from its dataset's seed.
pub fn train_qnn_grid(
    datasets: &[Dataset],
    layers: &[usize],
    noise: &[Option<f64>],
    sgd: &SgdConfig,
    workers: usize,
) -> Result<Vec<QnnRun>> {
    let obs = qnn_observable();
    let mut jobs = Vec::new();
    for &l in layers {
        for &p in noise {
            for (d, ds) in datasets.iter().enumerate() {
                jobs.push((l, p, d, ds.seed));
            }
        }
    }
    let results = par_map(&jobs, workers, |&(l, p, d, seed)| -> Result<QnnRun> {
        let ansatz = build_hardware_efficient(FEATURE_DIM, l)?;
        let cfg = SgdConfig { seed, ..*sgd };
        let trace = train_qnn(&datasets[d], &ansatz, &obs, &cfg, p, None)?;
        Ok(QnnRun {
            layers: l,
            noise_p: p,
            seed,
            trace,
        })
    });
    results.into_iter().collect()
}

/// Per-epoch accuracy statistics of one (layers, noise) group.
#[derive(Debug, Clone, PartialEq)]
pub struct QnnCurve {
    pub layers: usize,
    pub noise_p: Option<f64>,
    pub train_acc_mean: Vec<f64>,
    pub train_acc_var: Vec<f64>,
    pub test_acc_mean: Vec<f64>,
    pub test_acc_var: Vec<f64>,
    pub train_loss_mean: Vec<f64>,
    pub test_loss_mean: Vec<f64>,
    pub n_seeds: usize,
}

impl QnnCurve {
    pub fn final_train_acc(&self) -> f64 {
        *self.train_acc_mean.last().expect("non-empty curve")
    }

    pub fn final_test_acc(&self) -> f64 {
        *self.test_acc_mean.last().expect("non-empty curve")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnnReport {
    pub runs: Vec<QnnRun>,
}

impl QnnReport {
    pub const CSV_HEADER: &'static str = "layers,noise_p,epoch,train_acc_mean,train_acc_var,test_acc_mean,test_acc_var,train_loss_mean,test_loss_mean,n_seeds";

    /// Curves grouped by (layers, noise), in the order groups first appear.
    pub fn curves(&self) -> Vec<QnnCurve> {
        let mut keys: Vec<(usize, Option<f64>)> = Vec::new();
        for r in &self.runs {
            if !keys.iter().any(|&(l, p)| l == r.layers && p == r.noise_p) {
                keys.push((r.layers, r.noise_p));
            }
        }
        keys.into_iter()
            .map(|(l, p)| {
                let group: Vec<&QnnRun> = self.runs.iter().filter(|r| r.layers == l && r.noise_p == p).collect();
                let epochs = group.iter().map(|r| r.trace.train_acc.len()).min().unwrap_or(0);
                let stat = |f: &dyn Fn(&TrainTrace) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
                    (0..epochs)
                        .map(|e| mean_var(&group.iter().map(|r| f(&r.trace)[e]).collect::<Vec<_>>()))
                        .unzip()
                };
                let (train_acc_mean, train_acc_var) = stat(&|t| &t.train_acc);
                let (test_acc_mean, test_acc_var) = stat(&|t| &t.test_acc);
                let (train_loss_mean, _) = stat(&|t| &t.losses);
                let (test_loss_mean, _) = stat(&|t| &t.test_losses);
                QnnCurve {
                    layers: l,
                    noise_p: p,
                    train_acc_mean,
                    train_acc_var,
                    test_acc_mean,
                    test_acc_var,
                    train_loss_mean,
                    test_loss_mean,
                    n_seeds: group.len(),
                }
            })
            .collect()
    }

    pub fn curve(&self, layers: usize, noise_p: Option<f64>) -> Option<QnnCurve> {
        self.curves().into_iter().find(|c| c.layers == layers && c.noise_p == noise_p)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for c in self.curves() {
            for e in 0..c.train_acc_mean.len() {
                let _ = writeln!(
                    s,
                    "{},{},{e},{},{},{},{},{},{},{}",
                    c.layers,
                    opt_cell(c.noise_p),
                    c.train_acc_mean[e],
                    c.train_acc_var[e],
                    c.test_acc_mean[e],
                    c.test_acc_var[e],
                    c.train_loss_mean[e],
                    c.test_loss_mean[e],
                    c.n_seeds
                );
            }
        }
        s
    }
}

pub fn run_qnn_layers(cfg: &ExperimentConfig) -> Result<QnnReport> {
    let datasets = generate_datasets(cfg)?;
    run_qnn_layers_on(cfg, &datasets)
}

/// [`run_qnn_layers`] on pre-generated datasets.
pub fn run_qnn_layers_on(cfg: &ExperimentConfig, datasets: &[Dataset]) -> Result<QnnReport> {
    let runs = train_qnn_grid(datasets, &cfg.qnn.layers, &[None], &cfg.qnn.sgd, cfg.workers)?;
    Ok(QnnReport { runs })
}

pub fn run_qnn_noise(cfg: &ExperimentConfig) -> Result<QnnReport> {
    let datasets = generate_datasets(cfg)?;
    run_qnn_noise_on(cfg, &datasets)
}

pub fn run_qnn_noise_on(cfg: &ExperimentConfig, datasets: &[Dataset]) -> Result<QnnReport> {
    let noise: Vec<Option<f64>> = cfg.qnn.noise_levels.iter().map(|&p| Some(p)).collect();
    let runs = train_qnn_grid(datasets, &[cfg.qnn.noise_layers], &noise, &cfg.qnn.sgd, cfg.workers)?;
    Ok(QnnReport { runs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeRun {
    pub bond_length: f64,
    pub ansatz: VqeAnsatz,
    pub seed: u64,
    pub final_energy: f64,
    pub iterations: usize,
    pub converged_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeBondSummary {
    pub bond_length: f64,
    pub exact_energy: f64,
    /// (mean, variance) of the final energy per ansatz, in [`VqeAnsatz::ALL`] order.
    pub energies: [(f64, f64); 3],
}

impl VqeBondSummary {
    pub fn mean(&self, kind: VqeAnsatz) -> f64 {
        let i = VqeAnsatz::ALL.iter().position(|&k| k == kind).expect("known ansatz");
        self.energies[i].0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeReport {
    pub runs: Vec<VqeRun>,
    /// (bond length, λ_min(H)) per table row.
    pub exact: Vec<(f64, f64)>,
}

impl VqeReport {
    pub const CSV_HEADER: &'static str = "bond_length,exact_energy,restricted_mean,restricted_var,modest_mean,modest_var,overwhelming_mean,overwhelming_var,overwhelming_minus_modest";

    pub fn summaries(&self) -> Vec<VqeBondSummary> {
        self.exact
            .iter()
            .map(|&(bond, exact)| {
                let mut energies = [(0.0, 0.0); 3];
                for (i, kind) in VqeAnsatz::ALL.into_iter().enumerate() {
                    let es: Vec<f64> = self
                        .runs
                        .iter()
                        .filter(|r| r.bond_length == bond && r.ansatz == kind)
                        .map(|r| r.final_energy)
                        .collect();
                    energies[i] = mean_var(&es);
                }
                VqeBondSummary {
                    bond_length: bond,
                    exact_energy: exact,
                    energies,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in self.summaries() {
            let [(rm, rv), (mm, mv), (om, ov)] = r.energies;
            let _ = writeln!(s, "{},{},{rm},{rv},{mm},{mv},{om},{ov},{}", r.bond_length, r.exact_energy, om - mm);
        }
        s
    }
}

pub fn run_vqe_three_ansatze(cfg: &ExperimentConfig) -> Result<VqeReport> {
    let table = cfg.vqe.load_table()?;
    let exact: Vec<(f64, f64)> = table
        .iter()
        .map(|p| Ok((p.bond_length, p.observable.extreme_eigenvalues()?.0)))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (b, _) in table.iter().enumerate() {
        for kind in VqeAnsatz::ALL {
            for &seed in &cfg.seeds {
                jobs.push((b, kind, seed));
            }
        }
    }
    let opt = Optimizer::Sgd(cfg.vqe.sgd);
    let runs = par_map(&jobs, cfg.workers, |&(b, kind, seed)| -> Result<VqeRun> {
        let ansatz = build_vqe_ansatz(kind, 4)?;
        let trace = train_vqe(&table[b].observable, &ansatz, &opt, init_params(seed, ansatz.param_count()))?;
        Ok(VqeRun {
            bond_length: table[b].bond_length,
            ansatz: kind,
            seed,
            final_energy: trace.final_loss().expect("initial energy recorded"),
            iterations: trace.losses.len() - 1,
            converged_at: trace.converged_at,
        })
    });
    Ok(VqeReport {
        runs: runs.into_iter().collect::<Result<_>>()?,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamRun {
    pub layers: usize,
    pub seed: u64,
    pub trace: TrainTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamReport {
    pub bond_length: f64,
    pub exact_energy: f64,
    pub runs: Vec<AdamRun>,
}

impl AdamReport {
    pub const CSV_HEADER: &'static str = "layers,seed,iteration,energy,abs_delta";

    /// Mean over seeds of the last recorded `|ΔL|`.
    pub fn mean_final_delta(&self, layers: usize) -> Option<f64> {
        let ds: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.layers == layers)
            .filter_map(|r| r.trace.deltas().last().copied())
            .collect();
        (!ds.is_empty()).then(|| mean_var(&ds).0)
    }

    pub fn converged_count(&self, layers: usize) -> (usize, usize) {
        let group: Vec<_> = self.runs.iter().filter(|r| r.layers == layers).collect();
        (group.iter().filter(|r| r.trace.converged_at.is_some()).count(), group.len())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.runs {
            for (t, e) in r.trace.losses.iter().enumerate() {
                let delta = (t > 0).then(|| (e - r.trace.losses[t - 1]).abs());
                let _ = writeln!(s, "{},{},{t},{e},{}", r.layers, r.seed, opt_cell(delta));
            }
        }
        s
    }
}

pub fn run_vqe_adam_depths(cfg: &ExperimentConfig) -> Result<AdamReport> {
    let table = cfg.vqe.load_table()?;
    let problem = table
        .iter()
        .find(|p| (p.bond_length - cfg.vqe.adam_bond_length).abs() < 1e-9)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("bond length {} not in the H₂ table", cfg.vqe.adam_bond_length))
        })?;
    let mut jobs = Vec::new();
    for &l in &cfg.vqe.adam_layers {
        for &seed in &cfg.seeds {
            jobs.push((l, seed));
        }
    }
    let opt = Optimizer::Adam(cfg.vqe.adam);
    let runs = par_map(&jobs, cfg.workers, |&(layers, seed)| -> Result<AdamRun> {
        let ansatz = build_hardware_efficient(4, layers)?;
        let trace = train_vqe(&problem.observable, &ansatz, &opt, init_params(seed, ansatz.param_count()))?;
        Ok(AdamRun { layers, seed, trace })
    });
    Ok(AdamReport {
        bond_length: problem.bond_length,
        exact_energy: problem.observable.extreme_eigenvalues()?.0,
        runs: runs.into_iter().collect::<Result<_>>()?,
    })
}

/// Least-squares line `y = a·x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// `1 − SS_res/SS_tot`; `None` when the targets have zero variance.
    pub r_squared: Option<f64>,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("a line fit needs at least two points".into()));
    }
    let (mx, vx) = mean_var(xs);
    let (my, _) = mean_var(ys);
    if vx == 0.0 {
        return Err(Error::InvalidArgument("a line fit needs two distinct x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot);
    Ok(FitResult { a, b, r_squared })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub layers: usize,
    pub n_gt: usize,
    pub gap_mean: f64,
    pub gap_var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub metric: GapMetric,
    pub points: Vec<ScalingPoint>,
    pub fit: FitResult,
    pub runs: Vec<QnnRun>,
}

impl ScalingReport {
    pub const CSV_HEADER: &'static str = "layers,n_gt,sqrt_n_gt,gap_mean,gap_var";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                p.layers,
                p.n_gt,
                (p.n_gt as f64).sqrt(),
                p.gap_mean,
                p.gap_var
            );
        }
        s
    }
}

fn final_gap(t: &TrainTrace, metric: GapMetric) -> f64 {
    match metric {
        GapMetric::Accuracy => t.train_acc.last().copied().unwrap_or(0.0) - t.test_acc.last().copied().unwrap_or(0.0),
        GapMetric::Loss => t.test_losses.last().copied().unwrap_or(0.0) - t.losses.last().copied().unwrap_or(0.0),
    }
}

/// Fits the mean final generalization gap of noiseless runs against
/// `√N_gt`, one point per layer count.
pub fn scaling_from_runs(runs: Vec<QnnRun>, metric: GapMetric) -> Result<ScalingReport> {
    let mut by_layer: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.noise_p.is_none()) {
        by_layer.entry(r.layers).or_default().push(final_gap(&r.trace, metric));
    }
    let points: Vec<ScalingPoint> = by_layer
        .into_iter()
        .map(|(layers, gaps)| {
            let (gap_mean, gap_var) = mean_var(&gaps);
            Ok(ScalingPoint {
                layers,
                n_gt: build_hardware_efficient(FEATURE_DIM, layers)?.gate_counts().n_gt,
                gap_mean,
                gap_var,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|p| (p.n_gt as f64).sqrt()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.gap_mean).collect();
    let fit = fit_line(&xs, &ys)?;
    Ok(ScalingReport {
        metric,
        points,
        fit,
        runs,
    })
}

pub fn run_scaling_fit(cfg: &ExperimentConfig) -> Result<ScalingReport> {
    let datasets = generate_datasets(cfg)?;
    run_scaling_fit_on(cfg, &datasets)
}

pub fn run_scaling_fit_on(cfg: &ExperimentConfig, datasets: &[Dataset]) -> Result<ScalingReport> {
    let runs = train_qnn_grid(datasets, &cfg.scaling.layers, &[None], &cfg.qnn.sgd, cfg.workers)?;
    scaling_from_runs(runs, cfg.scaling.gap_metric)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub circuit: String,
    pub n_qubits: usize,
    pub n_gt: Option<usize>,
    pub n_g: Option<usize>,
    pub k: Option<u32>,
    pub norm_o: f64,
    pub epsilon: f64,
    pub p: Option<f64>,
    pub formula: String,
    pub ln_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str = "circuit,n_qubits,n_gt,n_g,k,norm_o,epsilon,p,formula,ln_value";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        let cell = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.circuit,
                r.n_qubits,
                cell(r.n_gt.map(|v| v.to_string())),
                cell(r.n_g.map(|v| v.to_string())),
                cell(r.k.map(|v| v.to_string())),
                r.norm_o,
                r.epsilon,
                opt_cell(r.p),
                r.formula,
                r.ln_value
            );
        }
        s
    }

    pub fn value(&self, circuit: &str, formula: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.circuit == circuit && r.formula == formula)
            .map(|r| r.ln_value)
    }
}

/// Per-circuit bounds (ideal, general noisy, depolarizing) for every QNN
/// depth and VQE ansatz, then the closed-form family bounds (ideal and
/// depolarizing). Circuit rows use the trainable part only.
pub fn run_bounds_table(cfg: &ExperimentConfig) -> Result<BoundsReport> {
    let b = &cfg.bounds;
    let mut circuits: Vec<(String, Circuit, f64)> = Vec::new();
    let qnn_norm = qnn_observable().operator_norm()?;
    for &l in &b.qnn_layers {
        circuits.push((format!("qnn_he(L={l})"), build_hardware_efficient(FEATURE_DIM, l)?, qnn_norm));
    }
    let table = cfg.vqe.load_table()?;
    let h2_norm = table
        .iter()
        .map(|p| p.observable.operator_norm())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    for kind in VqeAnsatz::ALL {
        circuits.push((format!("vqe_{}", kind.name()), build_vqe_ansatz(kind, 4)?, h2_norm));
    }

    let mut rows = Vec::new();
    for (name, c, norm_o) in &circuits {
        let counts = c.gate_counts();
        let input = BoundInput {
            p: b.p,
            ..BoundInput::from_counts(counts, *norm_o, b.epsilon)
        };
        for (bound, p) in [
            (ln_covering_ideal(&input)?, None),
            (ln_covering_noisy_general(&input)?, Some(b.p)),
            (ln_covering_depolarizing(&input)?, Some(b.p)),
        ] {
            rows.push(BoundsRow {
                circuit: name.clone(),
                n_qubits: c.n_qubits(),
                n_gt: Some(input.n_gt),
                n_g: Some(input.n_g),
                k: Some(input.k),
                norm_o: *norm_o,
                epsilon: b.epsilon,
                p,
                formula: bound.formula_id.name().to_string(),
                ln_value: bound.ln_value,
            });
        }
    }
    for family in &b.families {
        let n_qubits = match *family {
            AnsatzFamily::HardwareEfficient { n, .. }
            | AnsatzFamily::Mps { n }
            | AnsatzFamily::Tree { n }
            | AnsatzFamily::Uccsd { n, .. } => n,
        };
        for p in [None, Some(b.p)] {
            let bound = ln_covering_ansatz_family(*family, 1.0, b.epsilon, p)?;
            rows.push(BoundsRow {
                circuit: family.label(),
                n_qubits,
                n_gt: None,
                n_g: None,
                k: None,
                norm_o: 1.0,
                epsilon: b.epsilon,
                p,
                formula: bound.formula_id.name().to_string(),
                ln_value: bound.ln_value,
            });
        }
    }
    Ok(BoundsReport { rows })
}

/// CSV text and a JSON summary of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: ExperimentId,
    pub csv: String,
    pub summary: serde_json::Value,
}

/// Runs `id` and renders its CSV.
pub fn run(id: ExperimentId, cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let (csv, summary) = match id {
        ExperimentId::QnnLayers | ExperimentId::QnnNoise => {
            let report = if id == ExperimentId::QnnLayers {
                run_qnn_layers(cfg)?
            } else {
                run_qnn_noise(cfg)?
            };
            let finals: Vec<serde_json::Value> = report
                .curves()
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "layers": c.layers,
                        "noise_p": c.noise_p,
                        "final_train_acc": c.final_train_acc(),
                        "final_test_acc": c.final_test_acc(),
                    })
                })
                .collect();
            (report.to_csv(), serde_json::json!({ "final": finals }))
        }
        ExperimentId::VqeThreeAnsatze => {
            let report = run_vqe_three_ansatze(cfg)?;
            let rows = report.summaries().len();
            (report.to_csv(), serde_json::json!({ "bond_lengths": rows }))
        }
        ExperimentId::VqeAdamDepths => {
            let report = run_vqe_adam_depths(cfg)?;
            let per_depth: Vec<serde_json::Value> = cfg
                .vqe
                .adam_layers
                .iter()
                .map(|&l| {
                    let (converged, total) = report.converged_count(l);
                    serde_json::json!({
                        "layers": l,
                        "converged": converged,
                        "runs": total,
                        "mean_final_abs_delta": report.mean_final_delta(l),
                    })
                })
                .collect();
            (
                report.to_csv(),
                serde_json::json!({
                    "bond_length": report.bond_length,
                    "exact_energy": report.exact_energy,
                    "depths": per_depth,
                }),
            )
        }
        ExperimentId::ScalingFit => {
            let report = run_scaling_fit(cfg)?;
            (report.to_csv(), serde_json::json!({ "fit": report.fit, "metric": report.metric }))
        }
        ExperimentId::BoundsTable => {
            let report = run_bounds_table(cfg)?;
            (report.to_csv(), serde_json::json!({ "rows": report.rows.len() }))
        }
    };
    Ok(ExperimentOutput {
        experiment: id,
        csv,
        summary,
    })
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub experiment: ExperimentId,
    pub seeds: Vec<u64>,
    pub config: ExperimentConfig,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_exact_and_degenerate() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-12 && (fit.b - 1.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, Some(1.0));

        let flat = fit_line(&xs, &[0.3; 4]).unwrap();
        assert!(flat.a.abs() < 1e-15);
        assert_eq!(flat.r_squared, None);
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fit_satisfies_normal_equations() {
        let xs = [1.0, 1.7, 2.2, 3.9, 4.4, 5.0];
        let ys = [0.1, 0.4, 0.2, 0.8, 0.5, 0.9];
        let f = fit_line(&xs, &ys).unwrap();
        let (mut ga, mut gb) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            let r = y - f.a * x - f.b;
            ga += -2.0 * r * x;
            gb += -2.0 * r;
        }
        assert!(ga.abs() <= 1e-8 && gb.abs() <= 1e-8);
        assert!(f.r_squared.unwrap() <= 1.0);
    }

    #[test]
    fn par_map_preserves_order() {
        let xs: Vec<u64> = (0..50).collect();
        assert_eq!(par_map(&xs, 4, |x| x * x), xs.iter().map(|x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(ExperimentConfig::from_json(r#"{"seeds":[1],"bogus":3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"qnn":{"sgd":{"learning_rate":0.1,"extra":1}}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"seeds":[]}"#).is_err());
        let partial = ExperimentConfig::from_json(r#"{"vqe":{"sgd":{"epochs":50}}}"#).unwrap();
        assert_eq!(partial.vqe.sgd, SgdConfig { epochs: 50, ..SgdConfig::vqe() });
        assert_eq!(partial.qnn, QnnSettings::default());
        let cfg = ExperimentConfig::from_json(r#"{"seeds":[7],"vqe":{"adam":{"variant":"paper_literal"}}}"#).unwrap();
        assert_eq!(cfg.seeds, vec![7]);
        assert_eq!(cfg.qnn.layers, vec![1, 2, 3, 4, 5]);
        assert_eq!(cfg.vqe.adam.variant, crate::optimize::AdamVariant::PaperLiteral);
    }

    #[test]
    fn experiment_names_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
    }
}
