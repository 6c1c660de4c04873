//! Command line for work quasiprobability scenarios.
//!
//! Exit codes: 0 when every check comes out as expected, 2 on validation
//! or I/O errors, 3 when a property check fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quasiwork_core::{
    check_axioms_with, generate_scenario, run_chi, run_distribution, run_verify, BuiltScenario,
    Error as CoreError, Scenario, TpmReductionStatus, Verdict, WorkDistribution,
};

#[derive(Parser)]
#[command(name = "quasiwork", version, about = "Work quasiprobability distributions of driven quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic random scenario file.
    Gen(GenArgs),
    /// Emit the forward, reversed, and operational work distributions.
    Dist(DistArgs),
    /// Run the full verification suite and write a machine-readable report.
    Verify(VerifyArgs),
    /// Tabulate the detector-protocol characteristic function against the
    /// direct Fourier sums.
    Chi(ChiArgs),
    /// Run the measure-axiom suite against the scenario's initial state.
    Axioms(AxiomArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Generator seed.
    #[arg(long)]
    seed: u64,
    /// Hilbert space dimension (2..=8).
    #[arg(long)]
    dim: usize,
    /// Output file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's q values (repeatable).
    #[arg(long = "q")]
    q_values: Vec<f64>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Override the atom merge tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Override the reversal symmetry tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Axiom suite trial count.
    #[arg(long, default_value_t = 200)]
    trials: u32,
}

#[derive(Args)]
struct ChiArgs {
    #[command(flatten)]
    common: ScenarioArgs,
    /// Override the operational-vs-direct tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct AxiomArgs {
    /// Scenario JSON file (supplies the state and the seed).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Trial count.
    #[arg(long, default_value_t = 200)]
    trials: u32,
    /// Override the axiom comparison tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

enum Outcome {
    AllAsExpected,
    PropertyViolation,
}

enum CliError {
    Validation(String),
    Property(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotNormalized { .. }
            | CoreError::DetectorMismatch { .. }
            | CoreError::FourierMismatch { .. } => CliError::Property(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Dist(args) => dist(args),
        Command::Verify(args) => verify(args),
        Command::Chi(args) => chi(args),
        Command::Axioms(args) => axioms(args),
    };
    match result {
        Ok(Outcome::AllAsExpected) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyViolation) => {
            eprintln!("error: property checks failed");
            ExitCode::from(3)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Property(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_scenario(path: &Path, q_override: &[f64]) -> Result<(Scenario, BuiltScenario), CliError> {
    let text = fs::read_to_string(path)?;
    let mut scenario = Scenario::from_json(&text)?;
    if !q_override.is_empty() {
        scenario.q_values = q_override.to_vec();
    }
    let built = scenario.build()?;
    Ok((scenario, built))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)?;
    Ok(())
}

/// Compact label for a q value used in file names.
fn q_label(q: f64) -> String {
    format!("{q}")
}

fn gen(args: GenArgs) -> Result<Outcome, CliError> {
    let scenario = generate_scenario(args.seed, args.dim)?;
    let text = scenario.to_json_pretty();
    if args.out == "-" {
        println!("{text}");
    } else {
        fs::write(&args.out, text)?;
        println!("wrote {}", args.out);
    }
    Ok(Outcome::AllAsExpected)
}

fn dist(args: DistArgs) -> Result<Outcome, CliError> {
    let (mut scenario, _) = load_scenario(&args.common.scenario, &args.common.q_values)?;
    if let Some(tol) = args.tol {
        scenario.tolerances.merge_tol = tol;
    }
    let built = scenario.build()?;
    let bundle = run_distribution(&built)?;

    fs::create_dir_all(&args.common.out)?;
    let out = &args.common.out;
    let emit = |name: String, q: Option<f64>, d: &WorkDistribution| -> Result<(), CliError> {
        write(&out.join(format!("{name}.json")), &d.to_json(q))?;
        write(&out.join(format!("{name}.csv")), &d.to_csv())?;
        Ok(())
    };

    emit("tpm".into(), None, &bundle.tpm)?;
    emit("backward_tpm".into(), None, &bundle.backward_tpm)?;
    for set in &bundle.per_q {
        let label = q_label(set.q);
        emit(format!("forward_pq_q{label}"), Some(set.q), &set.forward)?;
        emit(format!("backward_pq_q{label}"), Some(set.q), &set.backward)?;
        emit(
            format!("operational_pq_q{label}"),
            Some(set.q),
            &set.operational,
        )?;
        println!(
            "q={}: forward {} atoms, backward {} atoms, operational {} atoms",
            set.q,
            set.forward.atoms().len(),
            set.backward.atoms().len(),
            set.operational.atoms().len()
        );
    }
    println!(
        "tpm {} atoms, backward_tpm {} atoms -> {}",
        bundle.tpm.atoms().len(),
        bundle.backward_tpm.atoms().len(),
        out.display()
    );
    Ok(Outcome::AllAsExpected)
}

fn verify(args: VerifyArgs) -> Result<Outcome, CliError> {
    let (mut scenario, _) = load_scenario(&args.common.scenario, &args.common.q_values)?;
    if let Some(tol) = args.tol {
        scenario.tolerances.symmetry_tol = tol;
    }
    let built = scenario.build()?;
    let report = run_verify(&built, args.trials)?;

    fs::create_dir_all(&args.common.out)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write(&args.common.out.join("verify_report.json"), &json)?;

    for s in &report.symmetry {
        let reduction = match s.tpm_reduction_backward {
            TpmReductionStatus::Pass => "pass",
            TpmReductionStatus::Fail => "fail",
            TpmReductionStatus::NotApplicable => "n/a",
        };
        println!(
            "symmetry q={}: defect {:.3e} [{}], class defect {:.3e}, backward TPM reduction {}",
            s.q,
            s.symmetry_defect,
            if s.verdict == Verdict::Pass { "pass" } else { "FAIL" },
            s.class_defect,
            reduction
        );
    }
    println!(
        "endpoint class defect {:.3e}",
        report.endpoint_class_defect
    );
    for c in &report.axioms.checks {
        println!(
            "axiom {}: defect {:.3e} [{}]",
            c.axiom,
            c.max_defect,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    println!(
        "tpm additivity violation: defect {:.3e} [{}]",
        report.axioms.tpm_violation.max_defect,
        if report.axioms.tpm_violation.found { "found" } else { "MISSING" }
    );
    println!("fourier max defect {:.3e}", report.fourier_max_defect);
    println!(
        "class witness at q=1/2: {}",
        if report.class_witness.found { "found" } else { "MISSING" }
    );
    println!(
        "verdict: {}",
        if report.passed { "all checks as expected" } else { "FAILED" }
    );

    Ok(if report.passed {
        Outcome::AllAsExpected
    } else {
        Outcome::PropertyViolation
    })
}

fn chi(args: ChiArgs) -> Result<Outcome, CliError> {
    let (mut scenario, _) = load_scenario(&args.common.scenario, &args.common.q_values)?;
    if let Some(tol) = args.tol {
        scenario.tolerances.fourier_tol = tol;
    }
    let built = scenario.build()?;
    let table = run_chi(&built)?;

    fs::create_dir_all(&args.common.out)?;
    let json = serde_json::to_string_pretty(&table)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write(&args.common.out.join("chi_table.json"), &json)?;
    for &q in &built.q_values {
        let label = q_label(q);
        write(
            &args.common.out.join(format!("chi_q{label}.csv")),
            &table.forward_csv(q),
        )?;
        write(
            &args.common.out.join(format!("chi_backward_q{label}.csv")),
            &table.backward_csv(q),
        )?;
    }
    println!(
        "chi table: {} rows, max defect {:.3e} (tolerance {:.1e})",
        table.rows.len() + table.backward_rows.len(),
        table.max_defect,
        table.tolerance
    );
    Ok(if table.passed {
        Outcome::AllAsExpected
    } else {
        Outcome::PropertyViolation
    })
}

fn axioms(args: AxiomArgs) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&args.scenario)?;
    let mut scenario = Scenario::from_json(&text)?;
    if let Some(tol) = args.tol {
        scenario.tolerances.axiom_tol = tol;
    }
    let built = scenario.build()?;
    let report = check_axioms_with(
        built.process.initial_state(),
        built.seed,
        args.trials,
        &built.tolerances,
    )?;

    fs::create_dir_all(&args.out)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    write(&args.out.join("axiom_report.json"), &json)?;

    for c in &report.checks {
        println!(
            "axiom {}: defect {:.3e} [{}]",
            c.axiom,
            c.max_defect,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    println!(
        "tpm additivity violation: defect {:.3e} [{}]",
        report.tpm_violation.max_defect,
        if report.tpm_violation.found { "found" } else { "MISSING" }
    );
    Ok(if report.all_as_expected {
        Outcome::AllAsExpected
    } else {
        Outcome::PropertyViolation
    })
}
