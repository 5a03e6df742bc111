//! Command-line front end for `rskcap`: capacity sweeps, input densities,
//! estimator simulations, Blahut-Arimoto checks and figure data.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical
//! non-convergence, 1 I/O failure.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod range;
pub mod table;

use std::path::{Path, PathBuf};

use rayon::ThreadPool;

use args::{Cli, Command, Common, ReproduceArgs};
use config::{ConfigFile, Resolver};
pub use error::{CliError, CliResult};
use table::{emit, Format, Table};

/// Version of the JSON layouts (tables and manifests).
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RSKCAP_OUT_DIR";

fn allowed(specific: &[&'static str], common: bool) -> Vec<&'static str> {
    let mut keys = specific.to_vec();
    if common {
        keys.extend(commands::COMMON_KEYS);
    }
    keys
}

fn thread_pool(r: &mut Resolver, flag: &Option<String>) -> CliResult<Option<ThreadPool>> {
    let jobs = r.optional("jobs", flag);
    let Some(text) = jobs else { return Ok(None) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config("jobs", format!("'{text}' is not a positive thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| CliError::config("jobs", e.to_string()))
}

fn in_pool<R: Send>(pool: &Option<ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

struct Prepared {
    resolver: Resolver,
    pool: Option<ThreadPool>,
    format: Format,
    out: Option<PathBuf>,
}

fn prepare(common: &Common, keys: &[&'static str]) -> CliResult<Prepared> {
    let file = ConfigFile::load(common.config.as_deref(), &allowed(keys, true))?;
    let mut resolver = Resolver::new(file);
    let pool = thread_pool(&mut resolver, &common.jobs)?;
    let format = resolver
        .text("format", &common.format, "csv")
        .parse::<Format>()
        .map_err(|m| CliError::config("format", m))?;
    let out_flag = common.out.as_ref().map(|p| p.display().to_string());
    let out = resolver.optional("out", &out_flag).map(PathBuf::from);
    Ok(Prepared {
        resolver,
        pool,
        format,
        out,
    })
}

fn table_command<F>(name: &str, common: &Common, keys: &[&'static str], compute: F) -> CliResult<()>
where
    F: FnOnce(&mut Resolver) -> CliResult<Table> + Send,
{
    let Prepared {
        mut resolver,
        pool,
        format,
        out,
    } = prepare(common, keys)?;
    let table = in_pool(&pool, || compute(&mut resolver))?;
    emit(&table.render(format, name, resolver.effective())?, out.as_deref())
}

fn ba_command(a: &args::BaArgs) -> CliResult<()> {
    let Prepared {
        mut resolver,
        pool,
        format,
        out,
    } = prepare(&a.common, &commands::BA_KEYS)?;
    let dist_flag = a.distribution.as_ref().map(|p| p.display().to_string());
    let dist = resolver.optional("distribution", &dist_flag).map(PathBuf::from);
    let result = in_pool(&pool, || commands::ba(a, &mut resolver))?;
    emit(&result.summary.render(format, "ba", resolver.effective())?, out.as_deref())?;
    if let Some(path) = dist {
        emit(&result.distribution.render(format, "ba", resolver.effective())?, Some(&path))?;
    }
    if result.not_converged.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(result.not_converged.join("; ")))
    }
}

/// Write `<figure>.csv` and `<figure>.manifest.json`; returns their paths.
pub fn reproduce(a: &ReproduceArgs) -> CliResult<(PathBuf, PathBuf)> {
    let file = ConfigFile::load(a.config.as_deref(), &commands::REPRODUCE_KEYS)?;
    let mut r = Resolver::new(file);
    let out_flag = a.out_dir.as_ref().map(|p| p.display().to_string());
    let dir = r
        .optional("out-dir", &out_flag)
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    r.record("out-dir", serde_json::Value::String(dir.display().to_string()));
    let pool = thread_pool(&mut r, &a.jobs)?;
    let seed = r.integer("seed", &a.seed, "0")?;
    let settings = r.capacity_settings(&a.abs_tol, &a.rel_tol)?;
    let table = in_pool(&pool, || commands::figure(a.figure, &settings, &mut r))?;

    let name = a.figure.name();
    let csv_path = dir.join(format!("{name}.csv"));
    let manifest_path = dir.join(format!("{name}.manifest.json"));
    // Absolute paths keep RSKCAP_OUT_DIR from being applied twice.
    let abs = |p: &Path| std::path::absolute(p).map_err(|e| CliError::io(format!("resolving {}", p.display()), e));
    emit(&table.to_csv()?, Some(&abs(&csv_path)?))?;
    let mut manifest = serde_json::to_vec_pretty(&commands::manifest(a.figure, seed, &table, r.effective()))
        .expect("JSON values serialise");
    manifest.push(b'\n');
    emit(&manifest, Some(&abs(&manifest_path)?))?;
    Ok((csv_path, manifest_path))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Capacity(a) => table_command("capacity", &a.common, &commands::CAPACITY_KEYS, |r| {
            commands::capacity(a, r)
        }),
        Command::Oid(a) => table_command("oid", &a.common, &commands::OID_KEYS, |r| commands::oid(a, r)),
        Command::Simulate(a) => table_command("simulate", &a.common, &commands::SIMULATE_KEYS, |r| {
            commands::simulate(a, r)
        }),
        Command::Ba(a) => ba_command(a),
        Command::Reproduce(a) => reproduce(a).map(|_| ()),
    }
}
