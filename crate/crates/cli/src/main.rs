use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use podtmc::checker::{
    check_mixed_time, check_skolem_form, eval_wmlo, model_check, simulate_runs, Verdict,
};
use podtmc::logic::{parse_ctl, parse_wmlo, CmpOp, MixedTimeFormula};
use podtmc::markov::{parse_model, parse_rational, write_model, Agent, Model, Rational};
use podtmc::reductions::{
    diophantine_chain, diophantine_to_formula, lrs_to_companion, nonemptiness_formula, parse_pfa,
    pfa_to_podtmc, skolem_search, IntPolynomial, Lrs, SkolemMode,
};
use podtmc::semantics::{clock_belief, spr_belief, BeliefState, ObservationSequence, Semantics};

#[derive(Parser, Debug)]
#[command(name = "podtmc", version, about = "Exact model checker for partially observed Markov chains")]
struct Cli {
    /// Output style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Human,
    Rows,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SemanticsArg {
    Clk,
    Spr,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Semantics {
        match s {
            SemanticsArg::Clk => Semantics::Clock,
            SemanticsArg::Spr => Semantics::PerfectRecall,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a formula on every run of a model.
    Check(CheckArgs),
    /// Bounded searches for witnesses of marginal questions.
    #[command(subcommand)]
    Semidecide(Question),
    /// Emit the model and formula files of a reduction.
    #[command(subcommand)]
    Reduce(Reduction),
    /// Print an agent's posterior over states.
    Belief(BeliefArgs),
    /// Sample runs and print state frequencies.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FormulaSource {
    /// Formula text.
    #[arg(long)]
    formula: Option<String>,
    /// File holding the formula.
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

impl FormulaSource {
    fn text(&self) -> Result<String> {
        match (&self.formula, &self.formula_file) {
            (Some(text), _) => Ok(text.clone()),
            (None, Some(path)) => read(path),
            (None, None) => bail!("no formula given"),
        }
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    formula: FormulaSource,
    #[arg(long, value_enum, default_value = "spr")]
    semantics: SemanticsArg,
    /// Run length; defaults to the temporal depth of the formula.
    #[arg(long)]
    horizon: Option<usize>,
    /// Read the formula as a first-order sentence over time variables.
    #[arg(long)]
    wmlo: bool,
    /// Largest time a quantifier ranges over (first-order sentences only).
    #[arg(long)]
    bound: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Question {
    /// Is there a time t with Pr(p at t) <op> c?
    SkolemForm {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        prop: String,
        #[arg(long, default_value = "=")]
        op: String,
        #[arg(long)]
        value: String,
        #[arg(long)]
        bound: u64,
    },
    /// Is there a time vector zeroing a polynomial in marginals?
    MixedTime {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        formula: FormulaSource,
        #[arg(long)]
        bound: u64,
    },
    /// Zero, positivity or ultimate-positivity search on a recurrence.
    Lrs {
        /// File holding `order=k coeffs=… init=…`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "zero")]
        mode: String,
        #[arg(long)]
        bound: u64,
        /// Start at n = 1 instead of n = 0.
        #[arg(long)]
        from_one: bool,
    },
}

#[derive(Subcommand, Debug)]
enum Reduction {
    /// Automaton to chain plus nonemptiness formula.
    Pfa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Time bound written into the formula.
        #[arg(long)]
        bound: u32,
    },
    /// Recurrence to its matrix form.
    Lrs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integer polynomial to chain plus mixed-time formula.
    Dioph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct BeliefArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    agent: String,
    #[arg(long, value_enum, default_value = "spr")]
    semantics: SemanticsArg,
    /// Comma-separated observations from time 0.
    #[arg(long, conflicts_with_all = ["time", "obs"])]
    history: Option<String>,
    #[arg(long, requires = "obs")]
    time: Option<usize>,
    #[arg(long, requires = "time")]
    obs: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    horizon: usize,
    #[arg(long)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// What a command prints and how it exits.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(text: String) -> Outcome {
        Outcome { text, code: 0 }
    }

    fn verdict(text: String, v: &Verdict) -> Outcome {
        Outcome {
            text,
            code: v.exit_code() as u8,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check(args) => cmd_check(args, cli.format),
        Command::Semidecide(q) => cmd_semidecide(q, cli.format),
        Command::Reduce(r) => cmd_reduce(r, cli.format),
        Command::Belief(args) => cmd_belief(args, cli.format),
        Command::Simulate(args) => cmd_simulate(args, cli.format),
    }
}

fn read(path: &Path) -> Result<String> {
    if path.as_os_str().is_empty() {
        bail!("empty path");
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_model(path: &Path) -> Result<Model> {
    let text = read(path)?;
    let model = parse_model(&text).with_context(|| format!("in {}", path.display()))?;
    let violations = model.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        bail!("{}: {}", path.display(), list.join("; "));
    }
    Ok(model)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn quote(s: &str) -> String {
    if s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
        format!("{s:?}")
    } else {
        s.to_string()
    }
}

fn cmd_check(args: &CheckArgs, format: Format) -> Result<Outcome> {
    let model = load_model(&args.model)?;
    let text = args.formula.text()?;
    let semantics = args.semantics.into();
    let mut out = String::new();
    if args.wmlo {
        let phi = parse_wmlo(text.trim())?;
        let v = eval_wmlo(&model, semantics, &phi, args.bound)?;
        match format {
            Format::Human => writeln!(out, "{v}")?,
            Format::Rows => writeln!(out, "{}", verdict_row(&v))?,
        }
        return Ok(Outcome::verdict(out, &v));
    }
    if args.bound.is_some() {
        bail!("--bound applies to first-order sentences; use --horizon");
    }
    let phi = parse_ctl(text.trim())?;
    let report = model_check(&model, semantics, &phi, args.horizon)?;
    let names = |run: &[usize]| -> Vec<&str> { run.iter().map(|&s| model.state_name(s)).collect() };
    match format {
        Format::Human => {
            writeln!(out, "{} (horizon {})", report.verdict, report.horizon)?;
            for f in &report.failures {
                write!(out, "  run {}", names(&f.run).join(" "))?;
                let values: Vec<String> = f.values.iter().map(|(t, v)| format!("{t} = {v}")).collect();
                if values.is_empty() {
                    writeln!(out)?;
                } else {
                    writeln!(out, ": {}", values.join(", "))?;
                }
            }
        }
        Format::Rows => {
            writeln!(out, "{} horizon={}", verdict_row(&report.verdict), report.horizon)?;
            for f in &report.failures {
                let run = names(&f.run).join(",");
                if f.values.is_empty() {
                    writeln!(out, "failure run={run}")?;
                }
                for (term, value) in &f.values {
                    writeln!(out, "failure run={run} term={} value={value}", quote(term))?;
                }
            }
        }
    }
    Ok(Outcome::verdict(out, &report.verdict))
}

fn verdict_row(v: &Verdict) -> String {
    match v {
        Verdict::Holds => "verdict=holds".into(),
        Verdict::Fails(None) => "verdict=fails".into(),
        Verdict::Fails(Some(a)) => format!("verdict=fails {a}"),
        Verdict::Witness(a) => format!("verdict=witness {a}"),
        Verdict::NoWitnessUpTo(t) => format!("verdict=no-witness-up-to bound={t}"),
    }
}

fn parse_value(text: &str) -> Result<Rational> {
    parse_rational(text.trim()).with_context(|| format!("`{text}` is not a rational number"))
}

fn cmd_semidecide(q: &Question, format: Format) -> Result<Outcome> {
    let mut out = String::new();
    match q {
        Question::SkolemForm {
            model,
            prop,
            op,
            value,
            bound,
        } => {
            let model = load_model(model)?;
            let op = CmpOp::parse(op.trim()).with_context(|| format!("unknown comparison `{op}`"))?;
            let c = parse_value(value)?;
            let v = check_skolem_form(&model, prop, op, &c, *bound)?;
            if is_zero(&c) {
                writeln!(out, "decided: qualitative")?;
            }
            match &v {
                Verdict::Witness(a) => {
                    let t = a.get("t").context("witness without a time")?;
                    let marginal = model.marginal(prop, t as usize);
                    match format {
                        Format::Human => writeln!(out, "witness {a}: Pr({prop}) = {marginal}")?,
                        Format::Rows => writeln!(out, "{a} value={marginal}")?,
                    }
                }
                Verdict::NoWitnessUpTo(t) => writeln!(out, "no-witness-up-to {t}")?,
                other => writeln!(out, "{other}")?,
            }
            Ok(Outcome::verdict(out, &v))
        }
        Question::MixedTime {
            model,
            formula,
            bound,
        } => {
            let model = load_model(model)?;
            let phi = parse_wmlo(formula.text()?.trim())?;
            let psi = MixedTimeFormula::from_wmlo(&phi)?;
            let v = check_mixed_time(&model, &psi, *bound)?;
            match &v {
                Verdict::Witness(a) => match format {
                    Format::Human => writeln!(out, "witness {a}")?,
                    Format::Rows => writeln!(out, "{a} value=0")?,
                },
                Verdict::NoWitnessUpTo(t) => writeln!(out, "no-witness-up-to {t}")?,
                other => writeln!(out, "{other}")?,
            }
            Ok(Outcome::verdict(out, &v))
        }
        Question::Lrs {
            input,
            mode,
            bound,
            from_one,
        } => {
            let lrs: Lrs = read(input)?.trim().parse()?;
            let mode: SkolemMode = mode.parse()?;
            let v = skolem_search(&lrs, mode, *bound, *from_one);
            match &v {
                Verdict::Witness(a) | Verdict::Fails(Some(a)) => {
                    let n = a.get("n").context("result without an index")?;
                    let u = lrs.terms(n as usize).pop().expect("n + 1 terms");
                    match format {
                        Format::Human => writeln!(out, "{v}: u = {u}")?,
                        Format::Rows => writeln!(out, "{} value={u}", verdict_row(&v))?,
                    }
                }
                Verdict::NoWitnessUpTo(t) => writeln!(out, "no-witness-up-to {t}")?,
                other => writeln!(out, "{other}")?,
            }
            Ok(Outcome::verdict(out, &v))
        }
    }
}

fn is_zero(c: &Rational) -> bool {
    *c.numer() == 0.into()
}

fn cmd_reduce(r: &Reduction, format: Format) -> Result<Outcome> {
    let mut written = Vec::new();
    let mut dump = String::new();
    match r {
        Reduction::Pfa { input, out, bound } => {
            let pfa = parse_pfa(&read(input)?)?;
            fs::create_dir_all(out)?;
            let model = pfa_to_podtmc(&pfa);
            let phi = nonemptiness_formula(&pfa, *bound);
            written.push(emit(out, "model.txt", &write_model(&model))?);
            written.push(emit(out, "formula.txt", &format!("{phi}\n"))?);
        }
        Reduction::Lrs { input, out } => {
            let lrs: Lrs = read(input)?.trim().parse()?;
            fs::create_dir_all(out)?;
            let a = lrs_to_companion(&lrs);
            dump = a.to_string();
            written.push(emit(out, "companion.txt", &dump)?);
        }
        Reduction::Dioph { input, out } => {
            let p = IntPolynomial::parse(read(input)?.trim())?;
            let psi = diophantine_to_formula(&p)?;
            fs::create_dir_all(out)?;
            written.push(emit(out, "model.txt", &write_model(&diophantine_chain()))?);
            written.push(emit(out, "formula.txt", &format!("{psi}\n"))?);
        }
    }
    let mut text = String::new();
    for path in &written {
        match format {
            Format::Human => writeln!(text, "wrote {}", path.display())?,
            Format::Rows => writeln!(text, "wrote={}", quote(&path.display().to_string()))?,
        }
    }
    if format == Format::Human {
        text.push_str(&dump);
    }
    Ok(Outcome::ok(text))
}

fn emit(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write(&path, text)?;
    Ok(path)
}

fn cmd_belief(args: &BeliefArgs, format: Format) -> Result<Outcome> {
    let model = load_model(&args.model)?;
    let agent = Agent::parse(&args.agent);
    let history: Option<Vec<String>> = args
        .history
        .as_ref()
        .map(|h| h.split(',').map(|s| s.trim().to_string()).collect());
    let belief = match (args.semantics.into(), history, &args.time, &args.obs) {
        (Semantics::PerfectRecall, Some(h), _, _) => spr_belief(&model, &ObservationSequence::new(agent, h)?)?,
        (Semantics::PerfectRecall, None, _, _) => bail!("perfect recall needs --history"),
        (Semantics::Clock, Some(h), _, _) => {
            let t = h.len() - 1;
            clock_belief(&model, &agent, t, &h[t])?
        }
        (Semantics::Clock, None, Some(t), Some(obs)) => clock_belief(&model, &agent, *t, obs)?,
        (Semantics::Clock, None, _, _) => bail!("give --history or --time with --obs"),
    };
    Ok(Outcome::ok(belief_table(&model, &belief, format)?))
}

fn belief_table(model: &Model, b: &BeliefState, format: Format) -> Result<String> {
    let mut out = String::new();
    if format == Format::Human {
        writeln!(out, "agent {} at time {}", b.agent, b.time)?;
    }
    let width = model.state_names().iter().map(String::len).max().unwrap_or(0);
    for (s, name) in model.state_names().iter().enumerate() {
        let p = b.posterior.get(s);
        match format {
            Format::Human => writeln!(out, "  {name:<width$}  {p}")?,
            Format::Rows => writeln!(out, "state={name} prob={p}")?,
        }
    }
    Ok(out)
}

fn cmd_simulate(args: &SimulateArgs, format: Format) -> Result<Outcome> {
    let model = load_model(&args.model)?;
    let table = simulate_runs(&model, args.horizon, args.runs, args.seed);
    let mut out = String::new();
    if format == Format::Human {
        writeln!(out, "{} runs, seed {}", table.runs(), args.seed)?;
    }
    for t in 0..=args.horizon {
        for (s, name) in model.state_names().iter().enumerate() {
            let count = table.count(t, s);
            let freq = table.frequency(t, s);
            match format {
                Format::Human => writeln!(out, "  t={t} {name}: {count} ({freq:.6})")?,
                Format::Rows => writeln!(out, "t={t} state={name} count={count} freq={freq:.6}")?,
            }
        }
    }
    Ok(Outcome::ok(out))
}
