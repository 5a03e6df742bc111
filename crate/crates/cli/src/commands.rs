//! The computations behind each subcommand, returning tables.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use rskcap::binding::{LigandPair, RatioSymbol, ReceptorEnsemble};
use rskcap::capacity::{
    capacity_csk, capacity_rsk_optimal, capacity_rsk_suboptimal, linear_grid, log_grid, CapacityReport,
    CapacitySettings, JeffreysPrior,
};
use rskcap::fisher::{Csk, FisherModel, RskOptimal, RskSuboptimal, Scheme};
use rskcap::oracle::{blahut_arimoto, build_channel_csk, build_channel_rsk_sub, crlb_experiment, EstimatorStats};

use crate::args::{BaArgs, CapacityArgs, Figure, OidArgs, SimulateArgs};
use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

pub const COMMON_KEYS: [&str; 5] = ["jobs", "format", "out", "abs-tol", "rel-tol"];
pub const CAPACITY_KEYS: [&str; 5] = ["scheme", "gamma", "nr", "cmax", "threshold-factor"];
pub const OID_KEYS: [&str; 7] = ["scheme", "gamma", "nr", "alpha-grid", "c-grid", "cmax", "threshold-factor"];
pub const SIMULATE_KEYS: [&str; 6] = ["alpha", "gamma", "nr", "trials", "seed", "threshold-factor"];
pub const BA_KEYS: [&str; 10] = [
    "scheme",
    "gamma",
    "nr",
    "inputs",
    "cmax",
    "cmin",
    "tol",
    "max-iter",
    "threshold-factor",
    "distribution",
];
pub const REPRODUCE_KEYS: [&str; 5] = ["out-dir", "jobs", "seed", "abs-tol", "rel-tol"];

/// Ligand pair with `k2 = 1`, `k1 = γ`, and its receptor ensemble with the
/// threshold `factor / max(k1, k2)`.
fn rsk_setup(gamma: f64, n: u64, factor: f64) -> CliResult<(LigandPair, ReceptorEnsemble)> {
    let pair = LigandPair::from_similarity(gamma)?;
    let ensemble = ReceptorEnsemble::new(n, 1.0, factor / gamma.max(1.0))?;
    Ok((pair, ensemble))
}

fn csk_setup(n: u64) -> CliResult<ReceptorEnsemble> {
    Ok(ReceptorEnsemble::with_dissociation_constant(n, 1.0)?)
}

#[derive(Debug, Clone, Copy)]
struct Point {
    scheme: Scheme,
    gamma: Option<f64>,
    n: u64,
    c_max: Option<f64>,
}

/// Scheme × N_R × (γ for RSK, c_max for CSK), in that nesting order.
fn points(schemes: &[Scheme], gammas: &[f64], nrs: &[u64], cmaxes: &[f64]) -> Vec<Point> {
    let mut out = Vec::new();
    for &scheme in schemes {
        for &n in nrs {
            if scheme.is_rsk() {
                out.extend(gammas.iter().map(|&g| Point {
                    scheme,
                    gamma: Some(g),
                    n,
                    c_max: None,
                }));
            } else {
                out.extend(cmaxes.iter().map(|&c| Point {
                    scheme,
                    gamma: None,
                    n,
                    c_max: Some(c),
                }));
            }
        }
    }
    out
}

fn capacity_at(p: &Point, factor: f64, settings: &CapacitySettings) -> CliResult<CapacityReport> {
    Ok(match p.scheme {
        Scheme::RskOptimal | Scheme::RskSuboptimal => {
            let (pair, ens) = rsk_setup(p.gamma.unwrap_or(1.0), p.n, factor)?;
            if p.scheme == Scheme::RskOptimal {
                capacity_rsk_optimal(&pair, &ens, settings)?
            } else {
                capacity_rsk_suboptimal(&pair, &ens, settings)?
            }
        }
        Scheme::Csk => capacity_csk(&csk_setup(p.n)?, p.c_max.unwrap_or(f64::INFINITY), settings)?,
    })
}

pub fn capacity(args: &CapacityArgs, r: &mut Resolver) -> CliResult<Table> {
    let schemes = r.schemes("scheme", &args.scheme, "rsk-opt")?;
    let gammas = r.positive_range("gamma", &args.gamma, "5", false)?;
    let nrs = r.counts("nr", &args.nr, "1000")?;
    let cmaxes = r.positive_range("cmax", &args.cmax, "0.4", true)?;
    let factor = r.positive("threshold-factor", &args.threshold_factor, "3")?;
    let settings = r.capacity_settings(&args.common.abs_tol, &args.common.rel_tol)?;

    let pts = points(&schemes, &gammas, &nrs, &cmaxes);
    let reports = pts
        .par_iter()
        .map(|p| capacity_at(p, factor, &settings))
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = Table::new(&[
        "scheme",
        "gamma",
        "nr",
        "c_max",
        "threshold",
        "capacity_bits",
        "raw_bits",
        "normalization",
    ]);
    for (p, rep) in pts.iter().zip(reports) {
        let threshold = match p.scheme {
            Scheme::RskSuboptimal => p.gamma.map(|g| factor / g.max(1.0)),
            _ => None,
        };
        t.push(vec![
            p.scheme.label().into(),
            p.gamma.into(),
            p.n.into(),
            p.c_max.into(),
            threshold.into(),
            rep.capacity_bits.into(),
            rep.raw_bits.into(),
            rep.normalization.into(),
        ]);
    }
    Ok(t)
}

/// Jeffreys density of one configuration on `grid`.
fn density(p: &Point, grid: &[f64], factor: f64, settings: &CapacitySettings) -> CliResult<Vec<f64>> {
    let tabulate = |model: &dyn FisherModel| -> CliResult<Vec<f64>> {
        Ok(JeffreysPrior::new(model, &settings.outer)?.tabulate(grid)?.density)
    };
    match p.scheme {
        Scheme::RskOptimal => {
            let (pair, ens) = rsk_setup(p.gamma.unwrap_or(1.0), p.n, factor)?;
            tabulate(&RskOptimal {
                pair,
                n_receptors: ens.n_receptors(),
                quad: settings.inner,
            })
        }
        Scheme::RskSuboptimal => {
            let (pair, ensemble) = rsk_setup(p.gamma.unwrap_or(1.0), p.n, factor)?;
            tabulate(&RskSuboptimal { pair, ensemble })
        }
        Scheme::Csk => tabulate(&Csk {
            ensemble: csk_setup(p.n)?,
            c_max: p.c_max.unwrap_or(f64::INFINITY),
        }),
    }
}

pub fn oid(args: &OidArgs, r: &mut Resolver) -> CliResult<Table> {
    let schemes = r.schemes("scheme", &args.scheme, "rsk-opt")?;
    let gammas = r.positive_range("gamma", &args.gamma, "5", false)?;
    let nrs = r.counts("nr", &args.nr, "1000")?;
    let alpha_grid = r.range("alpha-grid", &args.alpha_grid, "0:1:lin1001")?;
    let c_grid = r.positive_range("c-grid", &args.c_grid, "0.001:1000:log1001", false)?;
    let cmaxes = r.positive_range("cmax", &args.cmax, "inf", true)?;
    let factor = r.positive("threshold-factor", &args.threshold_factor, "3")?;
    let settings = r.capacity_settings(&args.common.abs_tol, &args.common.rel_tol)?;

    if let Some(a) = alpha_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::config("alpha-grid", format!("{a} lies outside [0, 1]")));
    }
    if schemes.contains(&Scheme::Csk) {
        let top = c_grid.iter().copied().fold(0.0, f64::max);
        if let Some(c) = cmaxes.iter().find(|c| top > **c) {
            return Err(CliError::config("c-grid", format!("grid reaches {top}, beyond the cap {c}")));
        }
    }

    let pts = points(&schemes, &gammas, &nrs, &cmaxes);
    let grids: Vec<&[f64]> = pts
        .iter()
        .map(|p| if p.scheme.is_rsk() { &alpha_grid[..] } else { &c_grid[..] })
        .collect();
    let densities = pts
        .par_iter()
        .zip(grids.par_iter())
        .map(|(p, g)| density(p, g, factor, &settings))
        .collect::<CliResult<Vec<_>>>()?;

    let mut t = Table::new(&["scheme", "gamma", "nr", "c_max", "x", "density"]);
    for ((p, g), d) in pts.iter().zip(&grids).zip(densities) {
        for (x, v) in g.iter().zip(d) {
            t.push(vec![
                p.scheme.label().into(),
                p.gamma.into(),
                p.n.into(),
                p.c_max.into(),
                (*x).into(),
                v.into(),
            ]);
        }
    }
    Ok(t)
}

pub fn simulate(args: &SimulateArgs, r: &mut Resolver) -> CliResult<Table> {
    let alphas = r.range("alpha", &args.alpha, "0.3")?;
    let gammas = r.positive_range("gamma", &args.gamma, "5", false)?;
    let nrs = r.counts("nr", &args.nr, "1000")?;
    let trials = r.integer("trials", &args.trials, "10000")?;
    let seed = r.integer("seed", &args.seed, "1")?;
    let factor = r.positive("threshold-factor", &args.threshold_factor, "3")?;
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::config("alpha", format!("{a} lies outside [0, 1]")));
    }
    if trials < 100 {
        return Err(CliError::config("trials", format!("need at least 100 trials, got {trials}")));
    }
    if gammas.contains(&1.0) {
        return Err(CliError::config("gamma", "γ = 1 makes the ratio unidentifiable"));
    }

    let mut t = Table::new(&[
        "alpha",
        "gamma",
        "nr",
        "trials",
        "seed",
        "estimator",
        "mean",
        "variance",
        "mse",
        "inverse_fisher",
        "variance_times_fisher",
        "ci_low",
        "ci_high",
    ]);
    for &a in &alphas {
        for &g in &gammas {
            for &n in &nrs {
                let (pair, ens) = rsk_setup(g, n, factor)?;
                let rep = crlb_experiment(RatioSymbol::new(a)?, &pair, &ens, trials as usize, seed)?;
                let row = |name: &str, s: &EstimatorStats| -> Vec<Cell> {
                    vec![
                        a.into(),
                        g.into(),
                        n.into(),
                        trials.into(),
                        seed.into(),
                        name.into(),
                        s.mean.into(),
                        s.empirical_var.into(),
                        s.mse.into(),
                        s.inverse_fisher.into(),
                        s.ratio.into(),
                        s.ratio_ci.0.into(),
                        s.ratio_ci.1.into(),
                    ]
                };
                t.push(row("ml", &rep.ml));
                t.push(row("kpr", &rep.kpr));
            }
        }
    }
    Ok(t)
}

pub struct BaOutput {
    pub summary: Table,
    pub distribution: Table,
    /// Configurations that hit the iteration cap.
    pub not_converged: Vec<String>,
}

pub fn ba(args: &BaArgs, r: &mut Resolver) -> CliResult<BaOutput> {
    let schemes = r.schemes("scheme", &args.scheme, "rsk-sub")?;
    let gammas = r.positive_range("gamma", &args.gamma, "5", false)?;
    let nrs = r.counts("nr", &args.nr, "1000")?;
    let inputs = r.integer("inputs", &args.inputs, "201")? as usize;
    let cmaxes = r.positive_range("cmax", &args.cmax, "0.4", false)?;
    let cmin = r.positive("cmin", &args.cmin, "1e-4")?;
    let tol = r.positive("tol", &args.tol, "1e-6")?;
    let max_iter = r.integer("max-iter", &args.max_iter, "10000")? as usize;
    let factor = r.positive("threshold-factor", &args.threshold_factor, "3")?;
    let settings = r.capacity_settings(&args.common.abs_tol, &args.common.rel_tol)?;
    if schemes.contains(&Scheme::RskOptimal) {
        return Err(CliError::config(
            "scheme",
            "rsk-opt observes continuous bound times and has no discrete channel",
        ));
    }
    if inputs < 2 {
        return Err(CliError::config("inputs", "need at least two inputs"));
    }
    if max_iter == 0 {
        return Err(CliError::config("max-iter", "need at least one iteration"));
    }
    if let Some(c) = cmaxes.iter().find(|c| **c <= cmin) {
        return Err(CliError::config("cmin", format!("must lie below every cap, got cap {c}")));
    }

    let mut summary = Table::new(&[
        "scheme",
        "gamma",
        "nr",
        "c_max",
        "inputs",
        "ba_lower_bits",
        "ba_upper_bits",
        "jeffreys_bits",
        "difference_bits",
        "iterations",
        "converged",
    ]);
    let mut distribution = Table::new(&["scheme", "gamma", "nr", "c_max", "x", "probability"]);
    let mut not_converged = Vec::new();
    for p in points(&schemes, &gammas, &nrs, &cmaxes) {
        let (grid, channel, approx) = match p.scheme {
            Scheme::Csk => {
                let ens = csk_setup(p.n)?;
                let c_max = p.c_max.unwrap_or(1.0);
                let grid = log_grid(cmin, c_max, inputs);
                let ch = build_channel_csk(&grid, &ens)?;
                (grid, ch, capacity_csk(&ens, c_max, &settings)?)
            }
            _ => {
                let (pair, ens) = rsk_setup(p.gamma.unwrap_or(1.0), p.n, factor)?;
                let grid = linear_grid(0.0, 1.0, inputs);
                let ch = build_channel_rsk_sub(&grid, &pair, &ens)?;
                (grid, ch, capacity_rsk_suboptimal(&pair, &ens, &settings)?)
            }
        };
        let res = blahut_arimoto(&channel, tol, max_iter)?;
        if !res.converged {
            let at = match (p.gamma, p.c_max) {
                (Some(g), _) => format!("gamma={g}"),
                (None, Some(c)) => format!("c_max={c}"),
                (None, None) => String::new(),
            };
            not_converged.push(format!(
                "{} {at} nr={}: bounds [{}, {}] after {} iterations",
                p.scheme, p.n, res.capacity_bits, res.upper_bound_bits, res.iterations
            ));
        }
        summary.push(vec![
            p.scheme.label().into(),
            p.gamma.into(),
            p.n.into(),
            p.c_max.into(),
            (inputs as u64).into(),
            res.capacity_bits.into(),
            res.upper_bound_bits.into(),
            approx.capacity_bits.into(),
            (res.capacity_bits - approx.capacity_bits).into(),
            (res.iterations as u64).into(),
            res.converged.into(),
        ]);
        for (x, q) in grid.iter().zip(&res.input_distribution) {
            distribution.push(vec![
                p.scheme.label().into(),
                p.gamma.into(),
                p.n.into(),
                p.c_max.into(),
                (*x).into(),
                (*q).into(),
            ]);
        }
    }
    Ok(BaOutput {
        summary,
        distribution,
        not_converged,
    })
}

const FIG2_GAMMAS: [f64; 6] = [0.1, 0.2, 0.5, 2.0, 5.0, 10.0];

fn column(name: &str, values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{name}{v}")).collect()
}

/// Canned sweeps behind each figure. Every parameter is recorded in `r`.
pub fn figure(fig: Figure, settings: &CapacitySettings, r: &mut Resolver) -> CliResult<Table> {
    let n = 1000u64;
    let factor = 3.0;
    r.record("nr", json!(n));
    r.record("threshold-factor", json!(factor));
    r.record("kd", json!(1.0));
    let cap = |p: Point| capacity_at(&p, factor, settings).map(|rep| rep.capacity_bits);
    match fig {
        Figure::Fig1a => {
            r.record("gamma", json!("1:100:log25"));
            let gammas = log_grid(1.0, 100.0, 25);
            let rows = gammas
                .par_iter()
                .map(|&g| {
                    let pt = |scheme| Point {
                        scheme,
                        gamma: Some(g),
                        n,
                        c_max: None,
                    };
                    Ok(vec![g.into(), cap(pt(Scheme::RskOptimal))?.into(), cap(pt(Scheme::RskSuboptimal))?.into()])
                })
                .collect::<CliResult<Vec<Vec<Cell>>>>()?;
            let mut t = Table::new(&["gamma", "capacity_rsk_opt_bits", "capacity_rsk_sub_bits"]);
            rows.into_iter().for_each(|row| t.push(row));
            Ok(t)
        }
        Figure::Fig1b => {
            r.record("nr", json!("10:10000:log30"));
            r.record("gamma", json!(5.0));
            r.record("cmax", json!([0.1, 0.4]));
            let nrs = crate::range::parse_counts("10:10000:log30").expect("valid built-in range");
            let rows = nrs
                .par_iter()
                .map(|&m| {
                    let rsk = cap(Point {
                        scheme: Scheme::RskOptimal,
                        gamma: Some(5.0),
                        n: m,
                        c_max: None,
                    })?;
                    let csk = |c| {
                        cap(Point {
                            scheme: Scheme::Csk,
                            gamma: None,
                            n: m,
                            c_max: Some(c),
                        })
                    };
                    Ok(vec![m.into(), rsk.into(), csk(0.1)?.into(), csk(0.4)?.into()])
                })
                .collect::<CliResult<Vec<Vec<Cell>>>>()?;
            let mut t = Table::new(&["nr", "c_rsk", "c_csk_cmax0.1", "c_csk_cmax0.4"]);
            rows.into_iter().for_each(|row| t.push(row));
            Ok(t)
        }
        Figure::Fig1c => {
            r.record("cmax", json!("0.01:100:log50"));
            let cs = log_grid(0.01, 100.0, 50);
            let rows = cs
                .par_iter()
                .map(|&c| {
                    let v = cap(Point {
                        scheme: Scheme::Csk,
                        gamma: None,
                        n,
                        c_max: Some(c),
                    })?;
                    Ok(vec![c.into(), v.into()])
                })
                .collect::<CliResult<Vec<Vec<Cell>>>>()?;
            let mut t = Table::new(&["c_over_kd", "capacity_csk_bits"]);
            rows.into_iter().for_each(|row| t.push(row));
            Ok(t)
        }
        Figure::Fig2a | Figure::Fig2b => {
            let scheme = if fig == Figure::Fig2a {
                Scheme::RskOptimal
            } else {
                Scheme::RskSuboptimal
            };
            r.record("scheme", json!(scheme.label()));
            r.record("alpha", json!("0:1:lin201"));
            r.record("gamma", json!(FIG2_GAMMAS));
            let grid = linear_grid(0.0, 1.0, 201);
            let cols = FIG2_GAMMAS
                .par_iter()
                .map(|&g| {
                    let p = Point {
                        scheme,
                        gamma: Some(g),
                        n,
                        c_max: None,
                    };
                    density(&p, &grid, factor, settings)
                })
                .collect::<CliResult<Vec<_>>>()?;
            let names = column("density_gamma", &FIG2_GAMMAS);
            let mut header = vec!["alpha"];
            header.extend(names.iter().map(String::as_str));
            let mut t = Table::new(&header);
            for (i, &a) in grid.iter().enumerate() {
                let mut row: Vec<Cell> = vec![a.into()];
                row.extend(cols.iter().map(|c| Cell::from(c[i])));
                t.push(row);
            }
            Ok(t)
        }
        Figure::Fig2c => {
            r.record("c_over_kd", json!("0.001:1000:log121"));
            r.record("cmax", json!("inf"));
            let grid = log_grid(1e-3, 1e3, 121);
            let p = Point {
                scheme: Scheme::Csk,
                gamma: None,
                n,
                c_max: None,
            };
            let d = density(&p, &grid, factor, settings)?;
            let mut t = Table::new(&["c_over_kd", "density"]);
            for (c, v) in grid.iter().zip(d) {
                t.push(vec![(*c).into(), v.into()]);
            }
            Ok(t)
        }
    }
}

pub fn manifest(fig: Figure, seed: u64, table: &Table, parameters: &Map<String, Value>) -> Value {
    json!({
        "schema_version": crate::SCHEMA_VERSION,
        "tool": "rskcap",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "figure": fig.name(),
        "seed": seed,
        "csv": format!("{}.csv", fig.name()),
        "columns": table.columns,
        "rows": table.rows.len(),
        "parameters": parameters,
    })
}
