use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cayley_gibbs::scanner::{
    emit_csv, emit_csv_with_consistency, emit_curve, emit_jsonl, scan_grid, GridSpec, ParamRange,
    ScanOptions, DEFAULT_CURVE_RANGE, DEFAULT_CURVE_SAMPLES,
};
use cayley_gibbs::CouplingParameters;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

/// Sweep (J, Jp, T) and classify fixed points of the scalar map g.
#[derive(Debug, Parser)]
#[command(name = "cayley-scan", version)]
struct Cli {
    /// Nearest-neighbour coupling: `min:max:steps` or a single value
    #[arg(long = "J", allow_hyphen_values = true)]
    j: ParamRange,

    /// Prolonged next-nearest-neighbour coupling: `min:max:steps` or a value
    #[arg(long = "Jp", allow_hyphen_values = true)]
    jp: ParamRange,

    /// Temperature: `min:max:steps` or a value (zero cells are dropped)
    #[arg(long = "T", allow_hyphen_values = true)]
    t: ParamRange,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,

    /// Output file (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Emit the curve table (x, g(x), g(x)-x) for a singleton grid
    #[arg(long)]
    curve: bool,

    /// Curve samples, log-uniform over [1e-4, 1e4]
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    samples: usize,

    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Run the depth-2 Kolmogorov consistency check at every fixed point
    #[arg(long)]
    check_consistency: bool,
}

const EXIT_INVALID: u8 = 2;

fn run(cli: &Cli) -> Result<String, (u8, String)> {
    let invalid = |e: cayley_gibbs::Error| (EXIT_INVALID, e.to_string());
    let spec = GridSpec {
        j: cli.j,
        jp: cli.jp,
        t: cli.t,
    };
    spec.validate().map_err(invalid)?;

    if cli.curve {
        if !spec.is_singleton() {
            return Err((
                EXIT_INVALID,
                "--curve needs single values for --J, --Jp and --T".into(),
            ));
        }
        let params =
            CouplingParameters::new(spec.j.min, spec.jp.min, spec.t.min).map_err(invalid)?;
        let table = emit_curve(&params, DEFAULT_CURVE_RANGE, cli.samples).map_err(invalid)?;
        return Ok(match cli.format {
            Format::Csv => table.to_csv(),
            Format::Jsonl => table
                .rows
                .iter()
                .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
                .collect(),
        });
    }

    let options = ScanOptions {
        workers: cli.workers,
        check_consistency: cli.check_consistency,
    };
    let output = scan_grid(&spec, options).map_err(invalid)?;
    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(match (cli.format, cli.check_consistency) {
        (Format::Csv, false) => emit_csv(&output.points),
        (Format::Csv, true) => emit_csv_with_consistency(&output.points),
        (Format::Jsonl, _) => emit_jsonl(&output.points),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match run(&cli) {
        Ok(text) => text,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(code);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(text.as_bytes())),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
