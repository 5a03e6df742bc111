//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any
//! criterion fails.

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rskcap::binding::{LigandPair, RatioSymbol, ReceptorEnsemble};
use rskcap::capacity::{
    capacity_csk, capacity_rsk_optimal, capacity_rsk_suboptimal, linear_grid, log_grid, CapacitySettings,
    JeffreysPrior,
};
use rskcap::fisher::{
    fisher_csk_with, fisher_rsk_optimal, fisher_rsk_suboptimal_with, Csk, RskOptimal, RskSuboptimal, SumMode,
};
use rskcap::oracle::{
    blahut_arimoto, build_channel_csk, build_channel_rsk_sub, crlb_experiment, DiscreteChannel, BA_DEFAULT_MAX_ITER,
    BA_DEFAULT_TOL,
};
use rskcap::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn settings() -> CapacitySettings {
    CapacitySettings::default()
}

fn pair(gamma: f64) -> LigandPair {
    LigandPair::from_similarity(gamma).unwrap()
}

fn ensemble(p: &LigandPair, n: u64) -> ReceptorEnsemble {
    ReceptorEnsemble::for_pair(p, n).unwrap()
}

fn csk_ensemble(n: u64) -> ReceptorEnsemble {
    ReceptorEnsemble::with_dissociation_constant(n, 1.0).unwrap()
}

fn c_rsk(gamma: f64, n: u64) -> Result<f64> {
    let p = pair(gamma);
    Ok(capacity_rsk_optimal(&p, &ensemble(&p, n), &settings())?.capacity_bits)
}

fn rsk_saturation() -> Result<Outcome> {
    let start = Instant::now();
    let gammas = [1.5, 2.0, 5.0, 10.0, 50.0, 100.0];
    let caps = gammas.iter().map(|&g| c_rsk(g, 1000)).collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed();
    let last = caps[caps.len() - 1];
    let monotone = caps.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        (3.5..=4.5).contains(&last) && monotone && elapsed < Duration::from_secs(10),
        format!("C(γ=100) = {last:.6} bits, monotone = {monotone}, {elapsed:.2?}"),
    )
}

fn optimal_suboptimal_gap() -> Result<Outcome> {
    let p = pair(5.0);
    let e = ensemble(&p, 1000);
    let opt = capacity_rsk_optimal(&p, &e, &settings())?.capacity_bits;
    let sub = capacity_rsk_suboptimal(&p, &e, &settings())?.capacity_bits;
    let gap = opt - sub;
    outcome(
        (0.0..=0.5).contains(&gap),
        format!("{opt:.6} - {sub:.6} = {gap:.6} bits"),
    )
}

fn csk_plateau() -> Result<Outcome> {
    let n = 1000.0f64;
    let c_max = 1e4f64;
    let c = capacity_csk(&csk_ensemble(1000), c_max, &settings())?.capacity_bits;
    let closed = (2.0 * (n / (2.0 * PI * E)).sqrt() * c_max.sqrt().atan()).log2();
    outcome(
        (c - 4.5).abs() <= 0.25 && (c - closed).abs() <= 1e-6,
        format!("C = {c:.9} bits, closed form {closed:.9}, |Δ| = {:.1e}", (c - closed).abs()),
    )
}

fn power_limited_crossover() -> Result<Outcome> {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [100u64, 1000, 10_000] {
        let rsk = c_rsk(5.0, n)?;
        let csk = capacity_csk(&csk_ensemble(n), 0.1, &settings())?.capacity_bits;
        pass &= rsk > csk;
        detail.push(format!("N={n}: {rsk:.3} > {csk:.3}"));
    }
    outcome(pass, detail.join(", "))
}

/// Composite Simpson rule on `[0, t_max]`.
fn simpson(f: impl Fn(f64) -> f64, t_max: f64, panels: usize) -> f64 {
    let h = t_max / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(0.0) + inner + f(t_max)) * h / 3.0
}

/// `N ∫ (f1 - f2)^2 / f dτ` directly in bound time.
fn brute_force_fisher(alpha: f64, k1: f64, k2: f64, n: f64) -> f64 {
    let t_max = 80.0 / k1.min(k2);
    n * simpson(
        |t| {
            let f1 = k1 * (-k1 * t).exp();
            let f2 = k2 * (-k2 * t).exp();
            (f1 - f2).powi(2) / (alpha * f1 + (1.0 - alpha) * f2)
        },
        t_max,
        400_000,
    )
}

fn fisher_spot_checks() -> Result<Outcome> {
    let q = settings().inner;
    let mut pass = true;
    let mut detail = Vec::new();
    for (a, gamma, exact) in [(0.0, 5.0, 16000.0 / 9.0), (1.0, 1.5, 1000.0 / 3.0)] {
        let p = pair(gamma);
        let value = fisher_rsk_optimal(RatioSymbol::new(a)?, &p, 1000, &q)?;
        let oracle = brute_force_fisher(a, p.k1_off(), p.k2_off(), 1000.0);
        let rel = ((value - exact) / exact).abs();
        let rel_oracle = ((oracle - exact) / exact).abs();
        pass &= rel <= 1e-6 && rel_oracle <= 1e-6;
        detail.push(format!("I({a}; γ={gamma}) = {value:.10} (rel {rel:.1e}, oracle rel {rel_oracle:.1e})"));
    }
    outcome(pass, detail.join("; "))
}

fn literal_sums() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_190_611);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let gamma = rng.random_range(1.1..50.0);
        let a = rng.random_range(0.0..=1.0);
        let c = 10f64.powf(rng.random_range(-2.0..2.0));
        let n = rng.random_range(10u64..=20_000);
        let p = pair(gamma);
        let e = ensemble(&p, n);
        let alpha = RatioSymbol::new(a)?;
        let closed = fisher_rsk_suboptimal_with(alpha, &p, &e, SumMode::ClosedForm)?;
        let literal = fisher_rsk_suboptimal_with(alpha, &p, &e, SumMode::LiteralSum)?;
        worst = worst.max(((literal - closed) / closed).abs());
        let closed = fisher_csk_with(c, &e, SumMode::ClosedForm)?;
        let literal = fisher_csk_with(c, &e, SumMode::LiteralSum)?;
        worst = worst.max(((literal - closed) / closed).abs());
    }
    outcome(worst <= 1e-10, format!("worst relative difference {worst:.2e} over 10 points"))
}

fn square_root_scaling() -> Result<Outcome> {
    let s = settings();
    let p = pair(5.0);
    let mut worst: f64 = 0.0;
    for n in [250u64, 1000] {
        let e = ensemble(&p, n);
        let e4 = e.with_n_receptors(4 * n)?;
        let diffs = [
            capacity_rsk_optimal(&p, &e4, &s)?.raw_bits - capacity_rsk_optimal(&p, &e, &s)?.raw_bits,
            capacity_rsk_suboptimal(&p, &e4, &s)?.raw_bits - capacity_rsk_suboptimal(&p, &e, &s)?.raw_bits,
            capacity_csk(&csk_ensemble(4 * n), 0.4, &s)?.raw_bits - capacity_csk(&csk_ensemble(n), 0.4, &s)?.raw_bits,
        ];
        for d in diffs {
            worst = worst.max((d - 1.0).abs());
        }
    }
    outcome(worst <= 1e-6, format!("max |ΔC - 1| = {worst:.2e} bits"))
}

fn crlb_attainment() -> Result<Outcome> {
    let start = Instant::now();
    let p = pair(5.0);
    let r = crlb_experiment(RatioSymbol::new(0.3)?, &p, &ensemble(&p, 1000), 10_000, 7)?;
    let elapsed = start.elapsed();
    let ml = r.ml.ratio;
    let kpr = r.kpr.ratio;
    outcome(
        (0.85..=1.15).contains(&ml) && (0.9..=1.1).contains(&kpr) && elapsed < Duration::from_secs(120),
        format!(
            "ML Var·I = {ml:.4} (95% CI {:.3}-{:.3}), KPR Var·I = {kpr:.4} (95% CI {:.3}-{:.3}), {elapsed:.2?}",
            r.ml.ratio_ci.0, r.ml.ratio_ci.1, r.kpr.ratio_ci.0, r.kpr.ratio_ci.1
        ),
    )
}

fn ba_agreement() -> Result<Outcome> {
    let s = settings();
    let p = pair(5.0);
    let e = ensemble(&p, 1000);
    let ba_sub = blahut_arimoto(
        &build_channel_rsk_sub(&linear_grid(0.0, 1.0, 201), &p, &e)?,
        BA_DEFAULT_TOL,
        BA_DEFAULT_MAX_ITER,
    )?;
    let ja_sub = capacity_rsk_suboptimal(&p, &e, &s)?.capacity_bits;
    let c_grid = log_grid(1e-4, 0.4, 201);
    let ba_csk = blahut_arimoto(&build_channel_csk(&c_grid, &csk_ensemble(1000))?, BA_DEFAULT_TOL, BA_DEFAULT_MAX_ITER)?;
    let ja_csk = capacity_csk(&csk_ensemble(1000), 0.4, &s)?.capacity_bits;
    let eps = 0.11;
    let bsc = DiscreteChannel::from_rows(vec![0.0, 1.0], &[vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])?;
    let ba_bsc = blahut_arimoto(&bsc, 1e-9, BA_DEFAULT_MAX_ITER)?.capacity_bits;
    let d_sub = (ba_sub.capacity_bits - ja_sub).abs();
    let d_csk = (ba_csk.capacity_bits - ja_csk).abs();
    outcome(
        d_sub <= 0.2 && d_csk <= 0.2 && (ba_bsc - 0.5).abs() <= 1e-4,
        format!(
            "rsk-sub BA [{:.6}, {:.6}] vs {ja_sub:.6} (Δ {d_sub:.3}); csk BA [{:.6}, {:.6}] vs {ja_csk:.6} (Δ {d_csk:.3}); BSC(0.11) = {ba_bsc:.6}",
            ba_sub.capacity_bits, ba_sub.upper_bound_bits, ba_csk.capacity_bits, ba_csk.upper_bound_bits
        ),
    )
}

fn oid_structure() -> Result<Outcome> {
    let s = settings();
    let model = |gamma: f64| RskOptimal {
        pair: pair(gamma),
        n_receptors: 1000,
        quad: s.inner,
    };
    let m5 = model(5.0);
    let m02 = model(0.2);
    let p5 = JeffreysPrior::new(&m5, &s.outer)?;
    let p02 = JeffreysPrior::new(&m02, &s.outer)?;
    let mut worst: f64 = 0.0;
    for a in linear_grid(0.0, 1.0, 1001) {
        let x = p5.pdf(a)?;
        let y = p02.pdf(1.0 - a)?;
        if x != y {
            worst = worst.max((x - y).abs());
        }
    }
    let mean = p5.mean(&s.outer)?;
    let csk = Csk {
        ensemble: csk_ensemble(1000),
        c_max: 100.0,
    };
    let density = JeffreysPrior::new(&csk, &s.outer)?.tabulate(&log_grid(1e-3, 100.0, 500))?.density;
    let decreasing = density.windows(2).all(|w| w[1] < w[0]);
    let sub = RskSuboptimal {
        pair: pair(5.0),
        ensemble: ensemble(&pair(5.0), 1000),
    };
    let sub_mean = JeffreysPrior::new(&sub, &s.outer)?.mean(&s.outer)?;
    outcome(
        worst <= 1e-6 && mean > 0.5 && decreasing,
        format!(
            "max |p(α; 5) - p(1-α; 0.2)| = {worst:.1e}, mean {mean:.4} (suboptimal {sub_mean:.4}), CSK decreasing = {decreasing}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("RSK saturation", rsk_saturation),
        ("optimal/suboptimal gap", optimal_suboptimal_gap),
        ("CSK plateau", csk_plateau),
        ("power-limited crossover", power_limited_crossover),
        ("Fisher closed forms", fisher_spot_checks),
        ("literal-sum equivalence", literal_sums),
        ("square-root scaling", square_root_scaling),
        ("CRLB attainment", crlb_attainment),
        ("Blahut-Arimoto agreement", ba_agreement),
        ("input-density structure", oid_structure),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
