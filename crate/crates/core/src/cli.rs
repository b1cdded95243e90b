//! Command-line front end.
//!
//! Every run is described by a [`RunConfig`], built from flags and an
//! optional TOML file with the same schema (flags win). The config
//! serializes back to TOML losslessly, so `--dump-config` output can be fed
//! to `--config` to repeat a run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::descriptor::SetDescriptor;
use crate::energy::{rep_function, Moment};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::incidence::all_bucket_checks;
use crate::popularity::{decompose_with, intersection_bound_check, refine_43};
use crate::search::{append_ledger, exhaustive, hill_climb, Objective, SearchRecord};
use crate::setops::{FSet, SetOp};
use crate::verify::{
    proof_trace_shift, run_batch, verify_corollary, verify_e2, verify_e4, verify_shift, TraceOptions,
    VerificationReport, VerifyOptions, CSV_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HARD_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

/// A complete, reproducible description of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    /// Prime modulus or `rational`.
    pub p: String,
    /// Set descriptors by role (`A`, `B`, `C`, `D`); several per role form a batch.
    #[serde(default)]
    pub sets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub strict: bool,
    /// Command-specific options such as `thm`, `n`, `op` or `objective`.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    fn ctx(&self) -> Result<FieldCtx> {
        self.p.parse().map_err(|e: Error| Error::Parse(format!("--p: {e}")))
    }

    fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.param(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::Parse(format!("--{key} {v:?}: {e}"))),
        }
    }

    fn sets_for(&self, ctx: FieldCtx, role: &str) -> Result<Vec<FSet>> {
        self.sets
            .get(role)
            .into_iter()
            .flatten()
            .map(|d| {
                let desc: SetDescriptor = d.parse().map_err(|e| Error::Parse(format!("--{role} {d:?}: {e}")))?;
                desc.realize(ctx).map_err(|e| match e {
                    Error::Parse(m) | Error::BadParams(m) => Error::Parse(format!("--{role} {d:?}: {m}")),
                    other => other,
                })
            })
            .collect()
    }

    /// Instances for a batch: each role either has one set (broadcast) or
    /// the same number as the longest role. Missing roles fall back to
    /// `fallback[role]`.
    fn instances(&self, ctx: FieldCtx, roles: &[&str], fallback: &[(&str, &str)]) -> Result<Vec<Vec<FSet>>> {
        let mut columns: BTreeMap<&str, Vec<FSet>> = BTreeMap::new();
        for role in roles {
            columns.insert(role, self.sets_for(ctx, role)?);
        }
        for (role, from) in fallback {
            if columns[role].is_empty() {
                let copy = columns[from].clone();
                columns.insert(role, copy);
            }
        }
        let n = columns.values().map(Vec::len).max().unwrap_or(0);
        if n == 0 {
            return Err(Error::Parse(format!("--{} is required", roles[0])));
        }
        for (role, col) in &columns {
            if col.is_empty() {
                return Err(Error::Parse(format!("--{role} is required")));
            }
            if col.len() != 1 && col.len() != n {
                return Err(Error::Parse(format!("--{role} given {} times, expected 1 or {n}", col.len())));
            }
        }
        Ok((0..n)
            .map(|i| roles.iter().map(|r| {
                let col = &columns[r];
                col[if col.len() == 1 { 0 } else { i }].clone()
            }).collect())
            .collect())
    }
}

#[derive(Parser, Debug)]
#[command(name = "sumprod", version, about = "Exact experiments on shifted product sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Prime modulus, or `rational` (the default).
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long = "A", global = true)]
    a: Vec<String>,
    #[arg(long = "B", global = true)]
    b: Vec<String>,
    #[arg(long = "C", global = true)]
    c: Vec<String>,
    #[arg(long = "D", global = true)]
    d: Vec<String>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads; output never depends on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run small-set steps outside their guarantee regime.
    #[arg(long, global = true)]
    force: bool,
    /// Strip 0 from every input set first.
    #[arg(long, global = true)]
    strict: bool,
    /// TOML file with the `RunConfig` schema; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moment energy of a representation function.
    Energy {
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        op: Option<String>,
    },
    /// Popular products P and the popular subset A'.
    Decompose,
    /// Iterated popular-subset refinement for the 4/3-energy.
    Refine,
    /// Incidence constructions for every dyadic bucket of r_{A/D}.
    Incidence,
    /// Both sides of an energy or shifted product bound.
    Verify {
        #[arg(long)]
        thm: Option<String>,
    },
    /// Full proof-chain trace of the shifted product bound.
    Trace,
    /// Exhaustive or hill-climbing search for small shifted products.
    Search {
        #[arg(long)]
        objective: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// `exhaustive` or `hill`.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        steps: Option<String>,
        /// CSV ledger to append the record to.
        #[arg(long)]
        ledger: Option<String>,
    },
    /// Both growth statements for A with their specializations.
    Corollary,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Energy { .. } => "energy",
            Command::Decompose => "decompose",
            Command::Refine => "refine",
            Command::Incidence => "incidence",
            Command::Verify { .. } => "verify",
            Command::Trace => "trace",
            Command::Search { .. } => "search",
            Command::Corollary => "corollary",
        }
    }

    fn params(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Energy { n, op } => vec![("n", n.clone()), ("op", op.clone())],
            Command::Verify { thm } => vec![("thm", thm.clone())],
            Command::Search { objective, n, mode, steps, ledger } => vec![
                ("objective", objective.clone()),
                ("n", n.clone()),
                ("mode", mode.clone()),
                ("steps", steps.clone()),
                ("ledger", ledger.clone()),
            ],
            _ => Vec::new(),
        }
    }
}

fn build_config(cli: Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("--config {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig { p: "rational".into(), ..Default::default() },
    };
    let name = cli.command.name();
    if !cfg.command.is_empty() && cfg.command != name {
        cfg.params.clear();
        cfg.sets.clear();
    }
    cfg.command = name.into();
    let c = cli.common;
    if let Some(p) = c.p {
        cfg.p = p;
    }
    for (role, values) in [("A", c.a), ("B", c.b), ("C", c.c), ("D", c.d)] {
        if !values.is_empty() {
            cfg.sets.insert(role.into(), values);
        }
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    cfg.seed = c.seed.or(cfg.seed);
    cfg.jobs = c.jobs.or(cfg.jobs);
    cfg.force |= c.force;
    cfg.strict |= c.strict;
    for (key, value) in cli.command.params() {
        if let Some(v) = value {
            cfg.params.insert(key.into(), v);
        }
    }
    Ok(cfg)
}

/// What a command produced.
pub enum Output {
    Reports(Vec<VerificationReport>),
    Value(Value),
}

/// Runs one configuration and returns its output, using `jobs` worker threads.
pub fn execute(cfg: &RunConfig) -> Result<Output> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        if j == 0 {
            return Err(Error::Parse("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::BadParams(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cfg))
}

fn first_error(results: Vec<Result<VerificationReport>>) -> Result<Vec<VerificationReport>> {
    results.into_iter().collect()
}

fn dispatch(cfg: &RunConfig) -> Result<Output> {
    let ctx = cfg.ctx()?;
    let vopts = VerifyOptions { strict: cfg.strict };
    match cfg.command.as_str() {
        "energy" => {
            let moment: Moment = cfg.parsed("n", Moment::int(2))?;
            let op: SetOp = cfg.parsed("op", SetOp::Ratio)?;
            let sets = cfg.instances(ctx, &["A", "D"], &[("D", "A")])?;
            let rows: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let h = rep_function(&s[0], &s[1], op)?;
                    Ok(json!({
                        "X": s[0],
                        "Y": s[1],
                        "op": op.symbol(),
                        "moment": moment,
                        "energy": h.energy_moment(moment),
                        "support": h.len(),
                        "mass": h.mass(),
                    }))
                })
                .collect::<Result<_>>()?;
            Ok(Output::Value(Value::Array(rows)))
        }
        "decompose" => {
            let sets = cfg.instances(ctx, &["A", "B"], &[("B", "A")])?;
            let rows: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let dec = decompose_with(&s[0], &s[1], s[0].len(), cfg.force)?;
                    let inter = intersection_bound_check(&dec.popular_subset, &s[1], &dec.popular);
                    let mut v = serde_json::to_value(&dec).expect("serializable");
                    v["min_intersection"] = json!(inter);
                    v["coverage_bound_holds"] = json!(dec.coverage_bound_holds());
                    v["subset_bound_holds"] = json!(dec.subset_bound_holds());
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            Ok(Output::Value(Value::Array(rows)))
        }
        "refine" => {
            let sets = cfg.instances(ctx, &["A", "B"], &[("B", "A")])?;
            let rows: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let r = refine_43(&s[0], &s[1], cfg.force)?;
                    let mut v = serde_json::to_value(&r).expect("serializable");
                    v["size_bound_holds"] = json!(r.size_bound_holds());
                    v["chain_bound_holds"] = json!(r.chain_bound_holds());
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            Ok(Output::Value(Value::Array(rows)))
        }
        "incidence" => {
            let sets = cfg.instances(ctx, &["A", "C", "D"], &[("C", "A"), ("D", "A")])?;
            let rows: Vec<Value> = sets
                .iter()
                .map(|s| {
                    let checks = all_bucket_checks(&s[0], &s[2], &s[1])?;
                    if let Some((b, _, _)) = checks.iter().find(|(_, d, w)| !d.holds || !w.holds) {
                        return Err(Error::HardAssertion(format!("incidence construction fails for τ = {}", b.tau)));
                    }
                    Ok(json!({
                        "A": s[0],
                        "C": s[1],
                        "D": s[2],
                        "buckets": checks
                            .iter()
                            .map(|(b, d, w)| json!({"tau": b.tau, "size": b.len(), "direct": d, "swapped": w}))
                            .collect::<Vec<_>>(),
                    }))
                })
                .collect::<Result<_>>()?;
            Ok(Output::Value(Value::Array(rows)))
        }
        "verify" => {
            let thm = cfg.param("thm").unwrap_or("shift");
            let reports = match thm {
                "e4" | "e2" => {
                    let sets = cfg.instances(ctx, &["A", "C", "D"], &[("C", "A"), ("D", "A")])?;
                    let f = if thm == "e4" { verify_e4 } else { verify_e2 };
                    first_error(run_batch(&sets, |s| f(&s[0], &s[1], &s[2], vopts)))?
                }
                "shift" => {
                    let sets = cfg.instances(ctx, &["A", "B", "C", "D"], &[("B", "A"), ("C", "A"), ("D", "A")])?;
                    first_error(run_batch(&sets, |s| verify_shift(&s[0], &s[1], &s[2], &s[3], vopts)))?
                }
                other => return Err(Error::Parse(format!("--thm {other:?}: expected e4, e2 or shift"))),
            };
            Ok(Output::Reports(reports))
        }
        "trace" => {
            let sets = cfg.instances(ctx, &["A", "B", "C", "D"], &[("B", "A"), ("C", "A"), ("D", "A")])?;
            let topts = TraceOptions { force: cfg.force, verify: vopts };
            let reports = first_error(run_batch(&sets, |s| {
                proof_trace_shift(&s[0], &s[1], &s[2], &s[3], topts).map(|t| t.into_report())
            }))?;
            Ok(Output::Reports(reports))
        }
        "corollary" => {
            let sets = cfg.instances(ctx, &["A"], &[])?;
            let nested: Vec<Result<[VerificationReport; 2]>> = {
                use rayon::prelude::*;
                sets.par_iter()
                    .map(|s| verify_corollary(&s[0], vopts).map(|c| [c.shift_product, c.two_products]))
                    .collect()
            };
            let mut reports = Vec::new();
            for r in nested {
                reports.extend(r?);
            }
            Ok(Output::Reports(reports))
        }
        "search" => {
            let objective: Objective = cfg.parsed("objective", Objective::ShiftProduct)?;
            let mode = cfg.param("mode").unwrap_or("exhaustive");
            let record: SearchRecord = match mode {
                "exhaustive" => {
                    let n: usize = cfg.parsed("n", 0)?;
                    if n == 0 {
                        return Err(Error::Parse("--n is required for exhaustive search".into()));
                    }
                    exhaustive(ctx, n, objective)?
                }
                "hill" => {
                    let steps: usize = cfg.parsed("steps", 1000)?;
                    let start = cfg.sets_for(ctx, "A")?;
                    let start = start.first().ok_or_else(|| Error::Parse("--A (start set) is required".into()))?;
                    hill_climb(start, objective, steps, cfg.seed.unwrap_or(0))?
                }
                other => return Err(Error::Parse(format!("--mode {other:?}: expected exhaustive or hill"))),
            };
            if let Some(path) = cfg.param("ledger") {
                append_ledger(std::path::Path::new(path), std::slice::from_ref(&record))?;
            }
            Ok(Output::Value(json!([record])))
        }
        other => Err(Error::Parse(format!("unknown command {other:?}"))),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

/// Writes an output in the requested format.
pub fn render(output: &Output, format: Format, w: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::BadParams(format!("write failed: {e}"));
    match (output, format) {
        (Output::Reports(r), Format::Json) => {
            writeln!(w, "{}", serde_json::to_string_pretty(r).expect("serializable")).map_err(io)
        }
        (Output::Value(v), Format::Json) => {
            writeln!(w, "{}", serde_json::to_string_pretty(v).expect("serializable")).map_err(io)
        }
        (Output::Reports(reports), Format::Csv) => {
            let mut out = csv::Writer::from_writer(w);
            let e = |e: csv::Error| Error::BadParams(format!("csv: {e}"));
            out.write_record(CSV_HEADER).map_err(e)?;
            for (i, r) in reports.iter().enumerate() {
                for row in r.csv_rows(i) {
                    out.write_record(&row).map_err(e)?;
                }
            }
            out.flush().map_err(io)
        }
        (Output::Value(v), Format::Csv) => {
            let mut out = csv::Writer::from_writer(w);
            let e = |e: csv::Error| Error::BadParams(format!("csv: {e}"));
            out.write_record(["instance", "key", "value"]).map_err(e)?;
            let items = v.as_array().cloned().unwrap_or_else(|| vec![v.clone()]);
            for (i, item) in items.iter().enumerate() {
                let mut pairs = Vec::new();
                flatten("", item, &mut pairs);
                for (k, val) in pairs {
                    out.write_record([i.to_string(), k, val]).map_err(e)?;
                }
            }
            out.flush().map_err(io)
        }
        (Output::Reports(reports), Format::Text) => {
            for r in reports {
                writeln!(w, "{}: lhs {} rhs {} ratio {:.6}", r.theorem_id, r.lhs, r.rhs, r.ratio).map_err(io)?;
                for (k, v) in &r.metrics {
                    writeln!(w, "  {k} = {v}").map_err(io)?;
                }
                for (k, v) in &r.flags {
                    writeln!(w, "  [{}] {k}", if *v { "x" } else { " " }).map_err(io)?;
                }
                for step in r.trace.iter().flatten() {
                    let status = match step.holds {
                        Some(true) => "ok  ",
                        Some(false) => "FAIL",
                        None => "~   ",
                    };
                    writeln!(w, "  {status} {:<32} {} {} {}  ratio {:.4}", step.name, step.lhs, step.relation_symbol(), step.rhs, step.ratio)
                        .map_err(io)?;
                }
                for n in &r.notes {
                    writeln!(w, "  note: {n}").map_err(io)?;
                }
            }
            Ok(())
        }
        (Output::Value(v), Format::Text) => {
            let items = v.as_array().cloned().unwrap_or_else(|| vec![v.clone()]);
            for (i, item) in items.iter().enumerate() {
                if items.len() > 1 {
                    writeln!(w, "# instance {i}").map_err(io)?;
                }
                let mut pairs = Vec::new();
                flatten("", item, &mut pairs);
                for (k, val) in pairs {
                    writeln!(w, "{k}: {val}").map_err(io)?;
                }
            }
            Ok(())
        }
    }
}

/// Parses `argv` (including the program name), runs it and writes the
/// report to `out`. Returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let dump = cli.common.dump_config;
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if dump {
        let _ = write!(out, "{}", cfg.to_toml());
        return EXIT_OK;
    }
    match execute(&cfg).and_then(|o| render(&o, cfg.format, out)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_hard_assertion() {
                EXIT_HARD_ASSERTION
            } else {
                EXIT_USAGE
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("sumprod").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn verify_e4_json() {
        let (code, out, _) = run_str(&["verify", "--thm", "e4", "--p", "rational", "--A", "1,2,4", "--C", "1,2,4", "--D", "1,2,4"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["lhs"], json!(115));
        assert_eq!(v[0]["rhs"], json!(729));
    }

    #[test]
    fn energy_singleton() {
        let (code, out, _) = run_str(&["energy", "--n", "2", "--op", "ratio", "--A", "1", "--D", "1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["energy"], json!(1));
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let (code, _, err) = run_str(&["verify", "--thm", "e7", "--A", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--thm"));
        let (code, _, err) = run_str(&["verify", "--p", "100", "--A", "1"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--p"));
        let (code, _, _) = run_str(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn config_round_trip() {
        let (code, text, _) = run_str(&["corollary", "--p", "101", "--A", "coset(3,10)", "--seed", "5", "--dump-config"]);
        assert_eq!(code, 0);
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.command, "corollary");
        assert_eq!(cfg.seed, Some(5));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
