use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vqalab::bounds::{ln_covering_depolarizing, ln_covering_ideal, ln_covering_noisy_general, BoundInput};
use vqalab::circuits::{build_hardware_efficient, build_mps_ansatz, build_tree_ansatz, build_vqe_ansatz, Circuit, VqeAnsatz};
use vqalab::experiments::{run, ExperimentConfig, ExperimentId, Manifest};
use vqalab::optimize::AdamVariant;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] vqalab::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Parser)]
#[command(name = "vqalab", version, about = "Expressivity bounds and VQA experiments on an exact simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// QNN accuracy curves for L = 1..5
    QnnLayers(ExpArgs),
    /// QNN accuracy under depolarizing noise
    QnnNoise(ExpArgs),
    /// VQE energies of the restricted, modest and overwhelming ansätze
    VqeThreeAnsatze(ExpArgs),
    /// Adam VQE convergence across hardware-efficient depths
    VqeAdamDepths(ExpArgs),
    /// Generalization gap against √N_gt with a least-squares fit
    ScalingFit(ExpArgs),
    /// ln covering bounds for every experiment circuit and ansatz family
    BoundsTable(ExpArgs),
    /// ln covering bounds for one circuit or raw gate counts
    Bounds(BoundsArgs),
    /// Build or inspect a circuit in the text format
    Circuit(CircuitArgs),
}

#[derive(Args)]
struct ExpArgs {
    /// JSON config; unknown keys are rejected
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config `out_dir`, else `results`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Depolarizing rate: the only level for qnn_noise, the rate for bounds_table
    #[arg(long)]
    noise_p: Option<f64>,
    #[arg(long, value_enum)]
    adam_variant: Option<VariantArg>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Paper,
}

#[derive(Args)]
struct BoundsArgs {
    /// Circuit file; supplies N_gt, N_g and k
    #[arg(long, conflicts_with_all = ["n_gt", "n_g", "k"])]
    circuit: Option<PathBuf>,
    #[arg(long)]
    n_gt: Option<usize>,
    #[arg(long)]
    n_g: Option<usize>,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 1.0)]
    norm_o: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Depolarizing rate; omit for the ideal bound only
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum AnsatzArg {
    HardwareEfficient,
    Mps,
    Tree,
    VqeRestricted,
    VqeModest,
    VqeOverwhelming,
}

#[derive(Args)]
struct CircuitArgs {
    /// Parse and validate a circuit file instead of building one
    #[arg(long, conflicts_with = "ansatz")]
    file: Option<PathBuf>,
    #[arg(long, value_enum)]
    ansatz: Option<AnsatzArg>,
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// MPS block width
    #[arg(long, default_value_t = 2)]
    block_width: usize,
    /// Print gate counts instead of the circuit text
    #[arg(long)]
    counts: bool,
}

fn load_config(args: &ExpArgs, id: ExperimentId) -> CliResult<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&fs::read_to_string(path).map_err(io_err(path))?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(declared) = cfg.experiment {
        if declared != id {
            return Err(CliError::Usage(format!(
                "config is for '{}' but the subcommand is '{}'",
                declared.name(),
                id.name()
            )));
        }
    }
    cfg.experiment = Some(id);
    if let Some(seeds) = &args.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(p) = args.noise_p {
        cfg.qnn.noise_levels = vec![p];
        cfg.bounds.p = p;
    }
    if let Some(v) = args.adam_variant {
        cfg.vqe.adam.variant = match v {
            VariantArg::Standard => AdamVariant::Standard,
            VariantArg::Paper => AdamVariant::PaperLiteral,
        };
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(id: ExperimentId, args: &ExpArgs) -> CliResult<()> {
    let cfg = load_config(args, id)?;
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;

    let output = run(id, &cfg)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let csv_name = format!("{}_{stamp}.csv", id.name());
    let csv_path = out_dir.join(&csv_name);
    fs::write(&csv_path, &output.csv).map_err(io_err(&csv_path))?;

    let manifest_path = out_dir.join("manifest.json");
    let mut runs: Vec<Manifest> = match fs::read_to_string(&manifest_path) {
        Ok(text) => serde_json::from_value(serde_json::from_str::<serde_json::Value>(&text)?["runs"].clone())?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(io_err(&manifest_path)(e)),
    };
    runs.push(Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: id,
        seeds: cfg.seeds.clone(),
        config: cfg,
        outputs: vec![csv_name],
        summary: output.summary.clone(),
    });
    let text = serde_json::to_string_pretty(&serde_json::json!({ "runs": runs }))?;
    fs::write(&manifest_path, text + "\n").map_err(io_err(&manifest_path))?;

    println!("{}", csv_path.display());
    println!("{}", serde_json::to_string_pretty(&output.summary)?);
    Ok(())
}

fn run_bounds(args: &BoundsArgs) -> CliResult<()> {
    let mut input = match &args.circuit {
        Some(path) => {
            let c = Circuit::from_text(&fs::read_to_string(path).map_err(io_err(path))?)?;
            BoundInput::from_counts(c.gate_counts(), args.norm_o, args.epsilon)
        }
        None => {
            let n_gt = args
                .n_gt
                .ok_or_else(|| CliError::Usage("either --circuit or --n-gt is required".into()))?;
            BoundInput {
                n_gt,
                n_g: args.n_g.unwrap_or(n_gt),
                k: args.k,
                norm_o: args.norm_o,
                epsilon: args.epsilon,
                ..BoundInput::default()
            }
        }
    };
    input.d = args.d;
    println!("formula,ln_value");
    let ideal = ln_covering_ideal(&input)?;
    println!("{},{}", ideal.formula_id, ideal.ln_value);
    if let Some(p) = args.p {
        input.p = p;
        for b in [ln_covering_noisy_general(&input)?, ln_covering_depolarizing(&input)?] {
            println!("{},{}", b.formula_id, b.ln_value);
        }
    }
    Ok(())
}

fn run_circuit(args: &CircuitArgs) -> CliResult<()> {
    let c = match (&args.file, args.ansatz) {
        (Some(path), _) => Circuit::from_text(&fs::read_to_string(path).map_err(io_err(path))?)?,
        (None, Some(a)) => match a {
            AnsatzArg::HardwareEfficient => build_hardware_efficient(args.qubits, args.layers)?,
            AnsatzArg::Mps => build_mps_ansatz(args.qubits, args.block_width)?,
            AnsatzArg::Tree => build_tree_ansatz(args.qubits)?,
            AnsatzArg::VqeRestricted => build_vqe_ansatz(VqeAnsatz::Restricted, args.qubits)?,
            AnsatzArg::VqeModest => build_vqe_ansatz(VqeAnsatz::Modest, args.qubits)?,
            AnsatzArg::VqeOverwhelming => build_vqe_ansatz(VqeAnsatz::Overwhelming, args.qubits)?,
        },
        (None, None) => return Err(CliError::Usage("either --file or --ansatz is required".into())),
    };
    if args.counts {
        let g = c.gate_counts();
        println!("n_qubits,n_g,n_gt,k,k_trainable,params");
        println!("{},{},{},{},{},{}", c.n_qubits(), g.n_g, g.n_gt, g.k, g.k_trainable, c.param_count());
    } else {
        print!("{}", c.to_text());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::QnnLayers(a) => run_experiment(ExperimentId::QnnLayers, a),
        Command::QnnNoise(a) => run_experiment(ExperimentId::QnnNoise, a),
        Command::VqeThreeAnsatze(a) => run_experiment(ExperimentId::VqeThreeAnsatze, a),
        Command::VqeAdamDepths(a) => run_experiment(ExperimentId::VqeAdamDepths, a),
        Command::ScalingFit(a) => run_experiment(ExperimentId::ScalingFit, a),
        Command::BoundsTable(a) => run_experiment(ExperimentId::BoundsTable, a),
        Command::Bounds(a) => run_bounds(a),
        Command::Circuit(a) => run_circuit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
