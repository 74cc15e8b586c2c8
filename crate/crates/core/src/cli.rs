//! The `dak` command-line front end.
//!
//! Exit codes: `0` success or certified, `1` a property was refuted (or a
//! dominance claim failed), `2` bad input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{generate_instance, generate_instances, GeneratorParams, GraphModel};
use crate::instance::{Instance, InstanceFile};
use crate::mechanisms::{registry, run_mechanism, MechanismOutcome};
use crate::money::Money;
use crate::verifier::{certify_mechanism, revenue_comparison, CertificationReport, CheckConfig, RevenueComparison};

/// Version of the JSON report layout written by the CLI.
pub const REPORT_SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_GRID: &str = "1,2,3,4";

#[derive(Debug, Parser)]
#[command(name = "dak", version, about = "Incentive-compatible diffusion auctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one mechanism on one instance under truthful reports.
    Run(RunArgs),
    /// Certify a mechanism over a set of instances.
    Verify(VerifyArgs),
    /// Compare the revenue of two payment rules.
    Compare(CompareArgs),
    /// Generate random instances.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub policy: String,
    #[arg(long)]
    pub payment: String,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InstanceSource {
    /// Instance file (a single instance or a JSON array of instances).
    #[arg(long = "instance")]
    pub instances: Vec<PathBuf>,
    /// Generate instances instead, e.g. `--random n=5 count=200 seed=7`.
    /// Keys: n (count or range `lo..hi`), count, seed, model (tree|gnp|mixed), p.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub random: Vec<String>,
    /// Sorted bid grid. Defaults to 1,2,3,4 for generated instances and to the
    /// distinct true valuations for instance files.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub policy: String,
    #[arg(long)]
    pub payment: String,
    #[command(flatten)]
    pub source: InstanceSource,
    /// Probe only the grid itself.
    #[arg(long)]
    pub no_midpoints: bool,
    /// Leave declining to participate out of the IC deviations.
    #[arg(long)]
    pub no_nil: bool,
    /// Largest neighbor set whose subsets are enumerated.
    #[arg(long, default_value_t = crate::network::DEFAULT_SUBSET_CAP)]
    pub cap: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub policy: String,
    /// Exactly two payment rules; the first is tested for dominance over the second.
    #[arg(long = "payment", num_args = 1, required = true)]
    pub payments: Vec<String>,
    #[command(flatten)]
    pub source: InstanceSource,
    #[arg(long, value_enum, default_value = "both")]
    pub format: Format,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "tree")]
    pub model: String,
    #[arg(long, default_value_t = 0.4)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_GRID)]
    pub grid: Vec<String>,
    /// Output directory; required when count > 1. Without it the instance is
    /// printed to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn to_json<T: Serialize>(body: &T) -> String {
    serde_json::to_string_pretty(&Versioned { schema: REPORT_SCHEMA, body }).expect("report serializes")
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

fn parse_grid(values: &[String]) -> Result<Vec<Money>> {
    values.iter().map(|v| v.trim().parse()).collect()
}

/// Reads one instance or an array of instances from a file.
pub fn load_instances(path: &Path) -> Result<Vec<Instance>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let located = |e: serde_json::Error| Error::Format(format!("{}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(located)?;
    let files: Vec<InstanceFile> = if value.is_array() {
        serde_json::from_value(value).map_err(located)?
    } else {
        vec![serde_json::from_value(value).map_err(located)?]
    };
    files.into_iter().map(InstanceFile::into_instance).collect()
}

struct RandomSpec {
    params: GeneratorParams,
    count: usize,
    seed: u64,
}

fn parse_random(tokens: &[String], grid: Vec<Money>) -> Result<RandomSpec> {
    let bad = |msg: String| Error::BadGenerator(msg);
    let mut min_n = 5;
    let mut max_n = 5;
    let mut count = 100;
    let mut seed = 0;
    let mut model = GraphModel::Mixed { p: 0.4 };
    let mut p = None;
    for token in tokens {
        let (key, value) = token.split_once('=').ok_or_else(|| bad(format!("expected KEY=VALUE, got `{token}`")))?;
        let num = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("bad value for {key}: `{v}`")));
        match key {
            "n" => {
                if let Some((lo, hi)) = value.split_once("..") {
                    min_n = num(lo)? as usize;
                    max_n = num(hi)? as usize;
                } else {
                    min_n = num(value)? as usize;
                    max_n = min_n;
                }
            }
            "count" => count = num(value)? as usize,
            "seed" => seed = num(value)?,
            "model" => model = value.parse()?,
            "p" => p = Some(value.parse::<f64>().map_err(|_| bad(format!("bad value for p: `{value}`")))?),
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
    }
    if let Some(p) = p {
        model = model.with_p(p);
    }
    Ok(RandomSpec {
        params: GeneratorParams { min_buyers: min_n, max_buyers: max_n, model, valuation_grid: grid },
        count,
        seed,
    })
}

fn distinct_valuations(instances: &[Instance]) -> Vec<Money> {
    let mut grid: Vec<Money> = instances.iter().flat_map(|i| i.valuations().iter().copied()).collect();
    grid.sort();
    grid.dedup();
    grid
}

/// Instances plus the grid they are checked on.
fn resolve_source(source: &InstanceSource) -> Result<(Vec<Instance>, Vec<Money>)> {
    let explicit = source.grid.as_deref().map(parse_grid).transpose()?;
    let mut instances = Vec::new();
    for path in &source.instances {
        instances.extend(load_instances(path)?);
    }
    if !source.random.is_empty() {
        let grid = match &explicit {
            Some(g) => g.clone(),
            None => parse_grid(&DEFAULT_GRID.split(',').map(String::from).collect::<Vec<_>>())?,
        };
        let spec = parse_random(&source.random, grid)?;
        instances.extend(generate_instances(&spec.params, spec.count, spec.seed)?);
    }
    if instances.is_empty() {
        return Err(Error::Format("no instances: pass --instance or --random".into()));
    }
    let grid = explicit.unwrap_or_else(|| distinct_valuations(&instances));
    Ok((instances, grid))
}

fn write_report(path: Option<&Path>, json: &str) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, format!("{json}\n")).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

fn emit(out: &mut dyn Write, format: Format, table: &str, json: &str) {
    let _ = match format {
        Format::Table => write!(out, "{table}"),
        Format::Json => writeln!(out, "{json}"),
        Format::Both => writeln!(out, "{table}\n{json}"),
    };
}

#[derive(Serialize)]
struct RunReport<'a> {
    policy: String,
    payment: String,
    instance: Option<&'a str>,
    #[serde(flatten)]
    outcome: &'a MechanismOutcome,
}

fn outcome_table(instance: &Instance, report: &RunReport) -> String {
    let outcome = report.outcome;
    let mut t = String::new();
    t += &format!("policy   {}\npayment  {}\n", report.policy, report.payment);
    if let Some(name) = report.instance {
        t += &format!("instance {name}\n");
    }
    let winner = outcome.winner.map_or("none".to_string(), |w| w.to_string());
    t += &format!("winner   {winner}\n\n{:<6} {:>10} {:>10}  {}\n", "buyer", "valuation", "payment", "");
    for buyer in instance.graph().buyers() {
        let mark = if outcome.wins(buyer) { "wins" } else { "" };
        t += &format!(
            "{:<6} {:>10} {:>10}  {mark}\n",
            buyer.to_string(),
            instance.valuation(buyer).to_string(),
            outcome.payment(buyer).to_string()
        );
    }
    t += &format!("\nrevenue  {}\nwelfare  {}\n", outcome.revenue, outcome.welfare);
    t
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let policy = registry::policy(&args.policy)?;
    let payment = registry::payment(&args.payment)?;
    let instances = load_instances(&args.instance)?;
    let [instance] = instances.as_slice() else {
        return Err(Error::Format(format!("{} must hold exactly one instance", args.instance.display())));
    };
    let outcome = run_mechanism(policy.as_ref(), payment.as_ref(), instance.graph(), &instance.truthful_profile())?;
    let report = RunReport {
        policy: policy.name(),
        payment: payment.name(),
        instance: instance.name.as_deref(),
        outcome: &outcome,
    };
    let json = to_json(&report);
    emit(out, args.format, &outcome_table(instance, &report), &json);
    write_report(args.report.as_deref(), &json)?;
    Ok(EXIT_OK)
}

fn certification_table(report: &CertificationReport) -> String {
    let mut t = format!(
        "policy {}  payment {}  instances {}\n\n{:<22} {:<6} {:>12}  {}\n",
        report.policy, report.payment, report.instances, "property", "holds", "checked", "first failure"
    );
    for p in &report.properties {
        let failure = p.instance.map_or(String::new(), |i| format!("instance {i}"));
        t += &format!("{:<22} {:<6} {:>12}  {failure}\n", p.property.to_string(), p.holds, p.checked);
    }
    for e in report.errors.iter().take(5) {
        t += &format!("error: instance {} {}: {}\n", e.instance, e.property, e.message);
    }
    if report.errors.len() > 5 {
        t += &format!("error: ... {} more\n", report.errors.len() - 5);
    }
    t += &format!("\nverdict: {}\n", report.verdict);
    t
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DAK_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Format(format!("DAK_THREADS must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::Format(e.to_string()))
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let policy = registry::policy(&args.policy)?;
    let payment = registry::payment(&args.payment)?;
    let (instances, grid) = resolve_source(&args.source)?;
    let config = CheckConfig {
        bid_grid: grid,
        include_midpoints: !args.no_midpoints,
        include_nil: !args.no_nil,
        neighbor_subset_cap: args.cap,
    };
    let report = thread_pool()?.install(|| certify_mechanism(policy.as_ref(), payment.as_ref(), &instances, &config))?;
    let json = to_json(&report);
    emit(out, args.format, &certification_table(&report), &json);
    write_report(args.report.as_deref(), &json)?;
    Ok(if report.certified { EXIT_OK } else { EXIT_REFUTED })
}

fn comparison_table(c: &RevenueComparison) -> String {
    let mut t = format!("{:<9} {:>14} {:>14} {:>12}\n", "instance", c.payment_a, c.payment_b, "margin");
    for r in &c.rows {
        t += &format!(
            "{:<9} {:>14} {:>14} {:>12}\n",
            r.instance,
            r.revenue_a.to_string(),
            r.revenue_b.to_string(),
            r.margin.to_string()
        );
    }
    let strict_rows = c.rows.iter().filter(|r| r.margin > Money::ZERO).count();
    let verdict = if c.rows.iter().all(|r| r.margin.is_zero()) {
        format!("{} and {} are equal on every row", c.payment_a, c.payment_b)
    } else if c.a_dominates {
        format!("{} dominates {} (strictly on {strict_rows} of {} rows)", c.payment_a, c.payment_b, c.rows.len())
    } else {
        let first = c.rows.iter().find(|r| r.margin.is_negative()).map_or(0, |r| r.instance);
        format!("{} does not dominate {} (first shortfall: instance {first})", c.payment_a, c.payment_b)
    };
    t += &format!("\nverdict: {verdict}\n");
    t
}

fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<i32> {
    let [a, b] = args.payments.as_slice() else {
        return Err(Error::Format("compare needs exactly two --payment flags".into()));
    };
    let policy = registry::policy(&args.policy)?;
    let rule_a = registry::payment(a)?;
    let rule_b = registry::payment(b)?;
    let (instances, _) = resolve_source(&args.source)?;
    let comparison = revenue_comparison(policy.as_ref(), rule_a.as_ref(), rule_b.as_ref(), &instances)?;
    let json = to_json(&comparison);
    emit(out, args.format, &comparison_table(&comparison), &json);
    write_report(args.report.as_deref(), &json)?;
    Ok(if comparison.a_dominates { EXIT_OK } else { EXIT_REFUTED })
}

fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let model: GraphModel = args.model.parse::<GraphModel>()?.with_p(args.p);
    let params = GeneratorParams::new(args.n, model, parse_grid(&args.grid)?);
    match &args.out {
        None if args.count == 1 => {
            let inst = generate_instance(&params, args.seed)?;
            let _ = writeln!(out, "{}", inst.to_json());
        }
        None => return Err(Error::BadGenerator("--count above 1 needs --out".into())),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            for inst in generate_instances(&params, args.count, args.seed)? {
                let path = dir.join(format!("instance-{}.json", inst.seed.unwrap_or_default()));
                fs::write(&path, format!("{}\n", inst.to_json())).map_err(|e| io_err(&path, e))?;
                let _ = writeln!(out, "{}", path.display());
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Gen(a) => cmd_gen(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
