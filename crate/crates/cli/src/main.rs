//! `mres`: generate QBF families, build and check M-Res refutations, verify
//! extracted strategies and export them as circuits.
//!
//! Exit status is 0 on success, 1 when a check fails (the report names the
//! offending step or property) and 2 on usage or I/O errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mres_core::calculus::{
    check_line_invariant_with_budget, check_proof, extract_strategy, strategy_circuit, CheckerConfig, InvariantError,
    Mode, Proof, DEFAULT_INVARIANT_BUDGET,
};
use mres_core::families::{default_partition, example_formula, gen, FamilyId, GenOptions};
use mres_core::qbf::{
    check_universal_strategy_with_budget, eval_qbf_with_budget, formula_hash, parse_qdimacs, write_qdimacs,
    write_qdimacs_with_comments, GameError, PartialAssignment, Pcnf, Var, DEFAULT_GAME_BUDGET,
};
use mres_core::refutations::{build_example, prove};
use mres_core::Strategy;

#[derive(Parser)]
#[command(name = "mres", version, about = "Merge Resolution proofs for QBF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a formula family instance as QDIMACS
    Gen(GenArgs),
    /// Build the refutation of a family instance
    Prove(ProveArgs),
    /// Replay a proof and report whether it is a valid refutation
    Check(CheckArgs),
    /// Check the semantic line invariant on every proof line
    Invariant(InvariantArgs),
    /// Verify that a strategy wins the evaluation game
    VerifyStrategy(VerifyArgs),
    /// Apply a partial assignment to the existential variables of a formula
    Restrict(RestrictArgs),
    /// Decide a small formula by brute-force game evaluation
    Oracle(OracleArgs),
    /// Proof statistics: line counts, rule histogram, map size, regularity
    Stats(StatsArgs),
    /// Export the extracted strategy as a multiplexer circuit
    ExportCircuit(CircuitArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Qdimacs,
    StatsKv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PartitionKind {
    Default,
}

#[derive(Clone, Copy)]
enum Target {
    Family(FamilyId),
    Example,
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Target, String> {
        if s.eq_ignore_ascii_case("example") {
            return Ok(Target::Example);
        }
        s.parse().map(Target::Family).map_err(|e| {
            let names: Vec<&str> = FamilyId::ALL.iter().map(|f| f.name()).collect();
            format!("{e} (known: example, {})", names.join(", "))
        })
    }
}

/// Proof input plus the formula it refutes.
#[derive(Args)]
struct ProofInput {
    /// Proof file; standard input when absent or `-`
    proof: Option<PathBuf>,
    /// Formula file; regenerated from the proof's `c family` comment when absent
    #[arg(short = 'f', long = "formula", value_name = "FILE")]
    formula: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    family: Target,
    n: usize,
    #[arg(long, value_enum)]
    partition: Option<PartitionKind>,
    /// Emit the normal form (renumbered, sorted, no family header)
    #[arg(long)]
    normalize: bool,
    #[arg(long, value_enum, default_value_t = Format::Qdimacs)]
    format: Format,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProveArgs {
    family: Target,
    n: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    mode: ModeArg,
    #[arg(long, value_enum)]
    partition: Option<PartitionKind>,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Plain,
    We,
    Wf,
    Wef,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Plain => Mode::Plain,
            ModeArg::We => Mode::We,
            ModeArg::Wf => Mode::Wf,
            ModeArg::Wef => Mode::Wef,
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: ProofInput,
    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    mode: ModeArg,
    /// Reject irregular proofs and tautological lines
    #[arg(long)]
    regular: bool,
    /// Also check the semantic line invariant (bounded by --max-vars)
    #[arg(long)]
    semantic: bool,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_INVARIANT_BUDGET)]
    max_vars: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct InvariantArgs {
    #[command(flatten)]
    input: ProofInput,
    /// Largest number of free existentials enumerated per line
    #[arg(long, value_name = "N", default_value_t = DEFAULT_INVARIANT_BUDGET)]
    max_vars: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: ProofInput,
    /// Strategy dump to verify instead of the one extracted from the proof
    #[arg(long, value_name = "FILE")]
    strategy: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_GAME_BUDGET)]
    max_vars: usize,
    /// Write the verified strategy as a map dump
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RestrictArgs {
    /// Formula file; standard input for `-`
    formula: PathBuf,
    /// Comma-separated `var=0|1` tokens; `var` is an index or a variable name
    assignment: String,
    #[arg(long)]
    normalize: bool,
    #[arg(long, value_enum, default_value_t = Format::Qdimacs)]
    format: Format,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Formula file; standard input when absent or `-`
    formula: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_GAME_BUDGET)]
    max_vars: usize,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: ProofInput,
    #[arg(long, value_enum, default_value_t = ModeArg::Wef)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CircuitArgs {
    #[command(flatten)]
    input: ProofInput,
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
}

/// A failed check: exit status 1.
struct Failed;

type Outcome = Result<Result<(), Failed>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Prove(a) => cmd_prove(a),
        Command::Check(a) => cmd_check(a),
        Command::Invariant(a) => cmd_invariant(a),
        Command::VerifyStrategy(a) => cmd_verify_strategy(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Stats(a) => cmd_stats(a),
        Command::ExportCircuit(a) => cmd_export_circuit(a),
    };
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mres: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("cannot read standard input")?;
            Ok(s)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).context("cannot write standard output")?;
            out.flush().context("cannot write standard output")
        }
    }
}

fn gen_options(partition: Option<PartitionKind>, n: usize) -> Result<GenOptions> {
    Ok(GenOptions {
        partition: match partition {
            Some(PartitionKind::Default) => Some(default_partition(n)?),
            None => None,
        },
    })
}

fn generate(target: Target, n: usize, opts: &GenOptions) -> Result<Pcnf> {
    match target {
        Target::Example if n == 1 => Ok(example_formula()),
        Target::Example => bail!("the example formula only exists for n = 1"),
        Target::Family(fam) => Ok(gen(fam, n, opts)?),
    }
}

fn target_name(target: Target) -> String {
    match target {
        Target::Example => "example".into(),
        Target::Family(f) => f.name().into(),
    }
}

fn formula_stats(f: &Pcnf) -> String {
    format!(
        "vars={}\nexistentials={}\nuniversals={}\nclauses={}\nblocks={}\nhash={}\n",
        f.num_quantified(),
        f.num_existentials(),
        f.universals().len(),
        f.matrix().len(),
        f.prefix().len(),
        formula_hash(f)
    )
}

fn emit_formula(f: &Pcnf, header: Option<String>, normalize: bool, format: Format) -> Result<String> {
    match format {
        Format::StatsKv => Ok(formula_stats(f)),
        Format::Text => bail!("formulas are written as qdimacs or stats-kv"),
        Format::Qdimacs if normalize => Ok(write_qdimacs(&f.normalized())),
        Format::Qdimacs => Ok(write_qdimacs_with_comments(f, &Vec::from_iter(header))),
    }
}

fn cmd_gen(a: GenArgs) -> Outcome {
    let opts = gen_options(a.partition, a.n)?;
    let f = generate(a.family, a.n, &opts)?;
    let header = format!("family {} {}", target_name(a.family), a.n);
    write_output(a.output.as_deref(), &emit_formula(&f, Some(header), a.normalize, a.format)?)?;
    Ok(Ok(()))
}

fn cmd_prove(a: ProveArgs) -> Outcome {
    let opts = gen_options(a.partition, a.n)?;
    let built = match a.family {
        Target::Example if a.n == 1 => build_example(),
        Target::Example => bail!("the example formula only exists for n = 1"),
        Target::Family(fam) => prove(fam, a.n, a.mode.into(), &opts)?,
    };
    write_output(a.output.as_deref(), &built.proof.to_text())?;
    Ok(Ok(()))
}

/// Reads the proof and finds its formula: the `-f` file when given, otherwise
/// the instance named by the `c family <name> <n>` comment.
fn load(input: &ProofInput) -> Result<(Pcnf, Proof)> {
    let text = read_input(input.proof.as_deref())?;
    let proof = Proof::parse(&text).context("malformed proof")?;
    let formula = match &input.formula {
        Some(path) => parse_qdimacs(&read_input(Some(path))?)
            .with_context(|| format!("malformed formula {}", path.display()))?,
        None => {
            let family = proof
                .comment_value("family")
                .ok_or_else(|| anyhow!("proof has no `c family` comment; pass the formula with -f"))?;
            let (name, n) = family
                .split_once(char::is_whitespace)
                .ok_or_else(|| anyhow!("malformed `c family {family}` comment"))?;
            let target: Target = name.parse().map_err(|e: String| anyhow!(e))?;
            let n: usize = n.trim().parse().with_context(|| format!("bad size in `c family {family}`"))?;
            generate(target, n, &GenOptions::default())?
        }
    };
    Ok((formula, proof))
}

/// Proof commands other than `check` verify the hash binding up front.
fn hash_mismatch(formula: &Pcnf, proof: &Proof) -> Option<String> {
    let hash = proof.formula_hash.as_ref()?;
    let actual = formula_hash(formula);
    (*hash != actual).then(|| format!("failed_property=formula-hash\nfailure=proof is for formula {hash}, got {actual}\n"))
}

fn budget_or(e: GameError) -> anyhow::Error {
    match e {
        GameError::BudgetExceeded { count, limit } => {
            anyhow!("refusing to enumerate {count} variables (limit {limit}); raise --max-vars")
        }
        other => other.into(),
    }
}

fn cmd_check(a: CheckArgs) -> Outcome {
    let (formula, proof) = load(&a.input)?;
    let mut cfg = CheckerConfig::for_mode(a.mode.into());
    if a.regular {
        cfg = cfg.regular();
    }
    if a.semantic {
        if formula.num_existentials() > a.max_vars {
            bail!(
                "refusing the semantic check on {} existentials (limit {}); raise --max-vars",
                formula.num_existentials(),
                a.max_vars
            );
        }
        cfg = cfg.with_semantic_check();
        cfg.invariant_budget = a.max_vars;
    }
    let report = check_proof(&formula, &proof, cfg);
    let mut out = String::new();
    if a.format == Format::Text {
        let regular = if a.regular { " --regular" } else { "" };
        out.push_str(&format!("{} (mode {}{regular})\n", report.verdict(), Mode::from(a.mode)));
        if let Some(fail) = &report.failure {
            out.push_str(&format!("{fail}\n"));
        }
    }
    out.push_str(&report.to_kv());
    if report.valid && !report.is_refutation() {
        out.push_str("failed_property=refutation\nfailure=last line is not the empty clause\n");
    }
    write_output(None, &out)?;
    Ok(if report.is_refutation() { Ok(()) } else { Err(Failed) })
}

fn cmd_invariant(a: InvariantArgs) -> Outcome {
    let (formula, proof) = load(&a.input)?;
    if let Some(msg) = hash_mismatch(&formula, &proof) {
        write_output(None, &format!("invariant=false\n{msg}"))?;
        return Ok(Err(Failed));
    }
    match check_line_invariant_with_budget(&formula, &proof, a.max_vars) {
        Ok(None) => {
            write_output(None, &format!("invariant=true\nlines={}\n", proof.len()))?;
            Ok(Ok(()))
        }
        Ok(Some(line)) => {
            write_output(
                None,
                &format!("invariant=false\nfailed_step={}\nfailed_property=line-invariant\n", line + 1),
            )?;
            Ok(Err(Failed))
        }
        Err(InvariantError::Replay { step, error }) => {
            write_output(
                None,
                &format!("invariant=false\nfailed_step={}\nfailed_property=rule\nfailure={error}\n", step + 1),
            )?;
            Ok(Err(Failed))
        }
        Err(InvariantError::Game(e)) => Err(budget_or(e)),
    }
}

fn cmd_verify_strategy(a: VerifyArgs) -> Outcome {
    let (formula, proof) = load(&a.input)?;
    let strategy = match &a.strategy {
        Some(path) => Strategy::parse(&read_input(Some(path))?)
            .with_context(|| format!("malformed strategy {}", path.display()))?
            .complete_for(&formula),
        None => {
            if let Some(msg) = hash_mismatch(&formula, &proof) {
                write_output(None, &format!("winning=false\n{msg}"))?;
                return Ok(Err(Failed));
            }
            match extract_strategy(&formula, &proof) {
                Ok(s) => s,
                Err(e) => {
                    write_output(None, &format!("winning=false\nfailed_property=extraction\nfailure={e}\n"))?;
                    return Ok(Err(Failed));
                }
            }
        }
    };
    let wins = check_universal_strategy_with_budget(&formula, &strategy, a.max_vars).map_err(budget_or)?;
    if let Some(path) = &a.output {
        write_output(Some(path), &strategy.dump())?;
    }
    if wins {
        write_output(None, "winning=true\n")?;
        Ok(Ok(()))
    } else {
        write_output(None, "winning=false\nfailed_property=strategy\n")?;
        Ok(Err(Failed))
    }
}

/// `var=0|1` tokens where `var` is a QDIMACS index or a `c var` name.
fn parse_assignment(f: &Pcnf, text: &str) -> Result<PartialAssignment> {
    let mut rho = PartialAssignment::new();
    for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (var, value) = token.split_once('=').ok_or_else(|| anyhow!("expected var=0|1, got `{token}`"))?;
        let var = var.trim();
        let var = match var.parse::<u32>() {
            Ok(i) if i > 0 => Var::new(i),
            _ => f.var_by_name(var).ok_or_else(|| anyhow!("unknown variable `{var}`"))?,
        };
        let value = match value.trim() {
            "0" => false,
            "1" => true,
            v => bail!("value of {var} must be 0 or 1, got `{v}`"),
        };
        rho.assign(var, value)?;
    }
    Ok(rho)
}

fn cmd_restrict(a: RestrictArgs) -> Outcome {
    let f = parse_qdimacs(&read_input(Some(&a.formula))?).context("malformed formula")?;
    let rho = parse_assignment(&f, &a.assignment)?;
    let restricted = f.restrict(&rho)?;
    write_output(a.output.as_deref(), &emit_formula(&restricted, None, a.normalize, a.format)?)?;
    Ok(Ok(()))
}

fn cmd_oracle(a: OracleArgs) -> Outcome {
    let f = parse_qdimacs(&read_input(a.formula.as_deref())?).context("malformed formula")?;
    let value = eval_qbf_with_budget(&f, a.max_vars).map_err(budget_or)?;
    write_output(None, &format!("value={value}\n"))?;
    Ok(Ok(()))
}

fn cmd_stats(a: StatsArgs) -> Outcome {
    let (formula, proof) = load(&a.input)?;
    let report = check_proof(&formula, &proof, CheckerConfig::for_mode(a.mode.into()));
    let mut out = String::new();
    if a.format == Format::Text {
        let c = &report.counts;
        out.push_str(&format!(
            "lines {}\nrules A={} R={} WE={} WF={}\nmax map size {}\nregular {}\n{}\n",
            report.lines,
            c.axiom,
            c.resolve,
            c.weaken_exist,
            c.weaken_strategy,
            report.max_map_nodes,
            if report.regular { "yes" } else { "no" },
            report.verdict()
        ));
        if let Some(fail) = &report.failure {
            out.push_str(&format!("{fail}\n"));
        }
    } else {
        out.push_str(&report.to_kv());
    }
    write_output(None, &out)?;
    Ok(if report.valid { Ok(()) } else { Err(Failed) })
}

fn cmd_export_circuit(a: CircuitArgs) -> Outcome {
    let (formula, proof) = load(&a.input)?;
    if let Some(msg) = hash_mismatch(&formula, &proof) {
        eprint!("{msg}");
        return Ok(Err(Failed));
    }
    match extract_strategy(&formula, &proof) {
        Ok(s) => {
            write_output(a.output.as_deref(), &strategy_circuit(&s))?;
            Ok(Ok(()))
        }
        Err(e) => {
            eprintln!("failed_property=extraction\nfailure={e}");
            Ok(Err(Failed))
        }
    }
}
