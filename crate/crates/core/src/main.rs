use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use orbit_types::census::{exact_census, mc_census, DEFAULT_BUDGET, DEFAULT_CHUNK};
use orbit_types::construct::realize_type_with_plan;
use orbit_types::group::GroupSpec;
use orbit_types::howe::TypePoset;
use orbit_types::io::{connection_to_file, load_connection, load_graph, load_tuple};
use orbit_types::slice::{verify_slice_properties, OrbitPoint};
use orbit_types::verify::run_suite;

/// Gauge orbit types of lattice connections.
///
/// Groups are named `S3`, `Q8`, `Zn`, `U1`, `SU2`, products such as
/// `SU2xZ2`, or a path to a multiplication-table file. Worker threads for
/// sampling follow the `ORBIT_TYPES_THREADS` environment variable.
#[derive(Debug, Parser)]
#[command(name = "orbit-types", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the poset of orbit types of a group.
    Howe {
        group: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the gauge orbit of a connection file.
    Classify {
        input: PathBuf,
        /// Overrides or supplies the file's `group` field.
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the strata of G^n exactly or by Monte Carlo.
    Census {
        #[arg(long)]
        group: String,
        #[arg(long)]
        loops: usize,
        #[arg(long, conflicts_with = "exact")]
        samples: Option<u64>,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CHUNK)]
        chunk_size: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-type rows as CSV instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Extend a connection so that its orbit type becomes the target.
    Construct {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        input: PathBuf,
        /// Class id, label, `t_min` or `t_max`.
        #[arg(long)]
        target_type: String,
        /// Graph files whose restrictions must not change.
        #[arg(long)]
        protect: Vec<PathBuf>,
        /// Where to write the extended connection.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the verification report (stdout if absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the orbit-projection slice at a base tuple.
    SliceCheck {
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 1e-3)]
        noise: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every invariant check for a group.
    Verify {
        group: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What a command produced: the text to emit and whether its checks passed.
struct Output {
    text: String,
    passed: bool,
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Writes via a sibling temporary file and a rename, so a failed run never
/// leaves a truncated file behind.
fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn group(name: &str) -> anyhow::Result<GroupSpec> {
    GroupSpec::from_name(name).with_context(|| format!("group `{name}`"))
}

fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn cmd_howe(name: &str) -> anyhow::Result<Output> {
    let poset = TypePoset::enumerate(&group(name)?);
    let text = to_json(&json!({
        "version": version(),
        "config": {"command": "howe", "group": name},
        "poset": poset.summary(),
    }))?;
    Ok(Output { text, passed: true })
}

fn cmd_classify(input: &Path, group_name: Option<&str>) -> anyhow::Result<Output> {
    let spec = group_name.map(group).transpose()?;
    let c = load_connection(input, spec.as_ref())?;
    let spec = c.spec().clone();
    let poset = TypePoset::enumerate(&spec);
    let gens = c.holonomy_generators()?;
    let reduced = c.reduced_generators()?;
    let z = c.centralizer()?;
    let t = c.orbit_type(&poset)?;
    let fmt = |v: &[_]| v.iter().map(|g| spec.element_to_json(g)).collect::<Vec<Value>>();
    let text = to_json(&json!({
        "version": version(),
        "config": {"command": "classify", "input": input.display().to_string(), "group": spec.to_string()},
        "holonomy_generators": fmt(&gens),
        "reduced_generators": fmt(&reduced),
        "centralizer": spec.format_subgroup(&z),
        "type": {"id": t.id, "label": t.label},
        "is_t_min": t.id == poset.t_min().id,
        "is_t_max": t.id == poset.t_max().id,
    }))?;
    Ok(Output { text, passed: true })
}

#[allow(clippy::too_many_arguments)]
fn cmd_census(
    name: &str,
    loops: usize,
    samples: Option<u64>,
    exact: bool,
    seed: Option<u64>,
    chunk_size: u64,
    budget: u128,
    csv: bool,
) -> anyhow::Result<Output> {
    let spec = group(name)?;
    let poset = TypePoset::enumerate(&spec);
    let report = match (exact, samples) {
        (true, _) => exact_census(&poset, loops, budget)?,
        (false, Some(n)) => {
            let Some(seed) = seed else { bail!("--seed is required with --samples") };
            mc_census(&poset, loops, n, seed, chunk_size)?
        }
        (false, None) => bail!("pass --exact or --samples N"),
    };
    let text = if csv { report.to_csv() } else { to_json(&report)? };
    Ok(Output { text, passed: true })
}

fn cmd_construct(
    group_name: Option<&str>,
    input: &Path,
    target: &str,
    protect: &[PathBuf],
    out: Option<&Path>,
) -> anyhow::Result<(Output, Option<String>)> {
    let spec = group_name.map(group).transpose()?;
    let c = load_connection(input, spec.as_ref())?;
    let protected = protect.iter().map(|p| load_graph(p)).collect::<orbit_types::Result<Vec<_>>>()?;
    let poset = TypePoset::enumerate(c.spec());
    let t = poset.find(target)?;
    let before = c.orbit_type(&poset)?;
    let (ext, plan) = realize_type_with_plan(&c, &protected, &poset, t)?;
    let after = ext.orbit_type(&poset)?;
    let mut restrictions = Vec::new();
    for (path, g) in protect.iter().zip(&protected) {
        let ok = match (c.restrict(g), ext.restrict(g)) {
            (Ok(a), Ok(b)) => a.approx_eq(&b),
            _ => false,
        };
        restrictions.push(json!({"graph": path.display().to_string(), "preserved": ok}));
    }
    let original_ok = ext.restrict(c.graph())?.approx_eq(&c);
    let passed = after.id == t.id && original_ok && restrictions.iter().all(|r| r["preserved"] == true);
    let conn_text = to_json(&connection_to_file(&ext))?;
    let text = to_json(&json!({
        "version": version(),
        "config": {
            "command": "construct",
            "group": c.spec().to_string(),
            "input": input.display().to_string(),
            "target_type": target,
            "protect": protect.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "out": out.map(|p| p.display().to_string()),
        },
        "type_before": {"id": before.id, "label": before.label},
        "target": {"id": t.id, "label": t.label},
        "type_after": {"id": after.id, "label": after.label},
        "plan": plan,
        "verification": {
            "type_matches": after.id == t.id,
            "input_restriction_preserved": original_ok,
            "protected": restrictions,
            "passed": passed,
        },
        "connection": if out.is_none() { serde_json::to_value(connection_to_file(&ext))? } else { Value::Null },
    }))?;
    Ok((Output { text, passed }, out.map(|_| conn_text)))
}

fn cmd_slice(group_name: Option<&str>, base: &Path, trials: u64, noise: f64, seed: u64) -> anyhow::Result<Output> {
    if !(noise.is_finite() && noise >= 0.0) {
        bail!("--noise must be a non-negative number");
    }
    let spec = group_name.map(group).transpose()?;
    let (spec, tuple) = load_tuple(base, spec.as_ref())?;
    let point = OrbitPoint::new(spec, tuple)?;
    let report = verify_slice_properties(&point, trials, noise, seed)?;
    let passed = report.passed();
    let text = to_json(&json!({
        "config": {
            "command": "slice-check",
            "base": base.display().to_string(),
            "trials": trials,
            "noise": noise,
            "seed": seed,
        },
        "report": report,
    }))?;
    Ok(Output { text, passed })
}

fn cmd_verify(name: &str, seed: u64) -> anyhow::Result<Output> {
    let spec = group(name)?;
    let report = run_suite(&spec, seed)?;
    let passed = report.passed();
    Ok(Output {
        text: to_json(&report)?,
        passed,
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (output, out) = match &cli.command {
        Command::Howe { group, out } => (cmd_howe(group)?, out.clone()),
        Command::Classify { input, group, out } => (cmd_classify(input, group.as_deref())?, out.clone()),
        Command::Census {
            group,
            loops,
            samples,
            exact,
            seed,
            chunk_size,
            budget,
            out,
            csv,
        } => (
            cmd_census(group, *loops, *samples, *exact, *seed, *chunk_size, *budget, *csv)?,
            out.clone(),
        ),
        Command::Construct {
            group,
            input,
            target_type,
            protect,
            out,
            report,
        } => {
            let (output, conn) = cmd_construct(group.as_deref(), input, target_type, protect, out.as_deref())?;
            if let (Some(path), Some(text)) = (out, conn) {
                write_atomic(path, &text)?;
            }
            (output, report.clone())
        }
        Command::SliceCheck {
            group,
            base,
            trials,
            noise,
            seed,
            out,
        } => (cmd_slice(group.as_deref(), base, *trials, *noise, *seed)?, out.clone()),
        Command::Verify { group, seed, out } => (cmd_verify(group, *seed)?, out.clone()),
    };
    emit(out.as_deref(), &output.text)?;
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
