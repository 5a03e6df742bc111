//! Adaptive tanh-sinh (double-exponential) quadrature.
//!
//! Every rule here is open: the integrand is never evaluated at an interval
//! endpoint, and abscissae cluster double-exponentially towards both ends.
//! That makes the rule exact-to-rounding for integrands with algebraic
//! endpoint singularities such as `x^(-1/2)`, which is what `sqrt(I)` looks
//! like next to a divergent Fisher information.
//!
//! Each panel is refined by halving the step size up to [`MAX_LEVEL`]; a panel
//! that has not settled by then is bisected. Panels are refined worst-first
//! until the summed error estimate meets the requested tolerance.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest step-halving level inside one panel (step `2^-MAX_LEVEL`).
pub const MAX_LEVEL: usize = 6;

const T_MAX: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_panels: 400,
        }
    }
}

impl QuadSettings {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) || (abs_tol == 0.0 && rel_tol == 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerances must be non-negative and not both zero (abs {abs_tol}, rel {rel_tol})"
            )));
        }
        Ok(QuadSettings {
            abs_tol,
            rel_tol,
            ..Default::default()
        })
    }

    fn target(&self, estimate: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * estimate.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Node {
    /// Distance of the abscissa from the nearer end of [-1, 1].
    offset: f64,
    weight: f64,
}

struct Table {
    center_weight: f64,
    /// `levels[k]` holds the abscissae first used at step `2^-k`.
    levels: Vec<Vec<Node>>,
}

fn node(t: f64) -> Option<Node> {
    let s = FRAC_PI_2 * t.sinh();
    let e = (-2.0 * s).exp();
    // 1 - tanh(s) and the derivative of tanh(s) without cancellation.
    let offset = 2.0 * e / (1.0 + e);
    let weight = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    (offset > f64::MIN_POSITIVE && weight > 0.0).then_some(Node { offset, weight })
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut levels = Vec::with_capacity(MAX_LEVEL + 1);
        levels.push((1..).map(|j| j as f64).take_while(|&t| t <= T_MAX).filter_map(node).collect());
        for k in 1..=MAX_LEVEL {
            let h = 0.5f64.powi(k as i32);
            let nodes = (0..)
                .map(|j| (2 * j + 1) as f64 * h)
                .take_while(|&t| t <= T_MAX)
                .filter_map(node)
                .collect();
            levels.push(nodes);
        }
        Table {
            center_weight: FRAC_PI_2,
            levels,
        }
    })
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// One tanh-sinh panel on `[lo, hi]`, refined until two successive levels
/// agree to `tol(estimate)` or `MAX_LEVEL` is reached.
fn panel<F>(f: &F, lo: f64, hi: f64, settings: &QuadSettings, evals: &mut usize) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let table = table();
    let half = 0.5 * (hi - lo);
    let mid = lo + half;
    if !(mid > lo && mid < hi) {
        return Err(Error::Quadrature {
            estimate: f64::NAN,
            residual: f64::INFINITY,
        });
    }
    let mut eval = |x: f64| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    };

    let mut sum = table.center_weight * eval(mid)?;
    let mut previous = f64::NAN;
    let mut estimate = 0.0;
    let mut error = f64::INFINITY;
    for (k, nodes) in table.levels.iter().enumerate() {
        for n in nodes {
            let d = half * n.offset;
            let left = lo + d;
            let right = hi - d;
            // Abscissae that round onto an endpoint are dropped.
            if left > lo {
                sum += n.weight * eval(left)?;
            }
            if right < hi {
                sum += n.weight * eval(right)?;
            }
        }
        let h = 0.5f64.powi(k as i32);
        estimate = half * h * sum;
        if k >= 2 {
            error = (estimate - previous).abs();
            // Panels are judged against a share of the global budget; the
            // relative part is what keeps refinement scale-free.
            if error <= settings.target(estimate) * 1e-2 || error == 0.0 {
                break;
            }
        }
        previous = estimate;
    }
    Ok(Panel {
        lo,
        hi,
        value: estimate,
        error,
    })
}

/// Integrate `f` over the finite interval `[a, b]`.
///
/// `f` may fail (for example when it is itself a quadrature); the first
/// failure aborts the integration. Non-finite integrand values are errors.
pub fn integrate<F>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            panels: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, settings)?;
        return Ok(Integral { value: -r.value, ..r });
    }

    let mut evals = 0;
    let mut panels = vec![panel(&f, a, b, settings, &mut evals)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= settings.target(value) {
            return Ok(Integral {
                value,
                error_estimate: error,
                evaluations: evals,
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = &panels[worst];
        let mid = p.lo + 0.5 * (p.hi - p.lo);
        if panels.len() >= settings.max_panels || !(mid > p.lo && mid < p.hi) {
            return Err(Error::Quadrature {
                estimate: value,
                residual: error,
            });
        }
        let (lo, hi) = (p.lo, p.hi);
        let left = panel(&f, lo, mid, settings, &mut evals)?;
        let right = panel(&f, mid, hi, settings, &mut evals)?;
        panels[worst] = left;
        panels.insert(worst + 1, right);
    }
}

/// Integrate `f` over `[a, ∞)`.
///
/// `[a, a + 1]` is integrated directly and the tail through `x = a + 1/s`,
/// `s ∈ (0, 1]`, so the far tail sits next to `s = 0` where small values are
/// exactly representable.
pub fn integrate_to_infinity<F>(f: F, a: f64, settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    if !a.is_finite() {
        return Err(Error::Domain(format!("lower bound must be finite, got {a}")));
    }
    let head = integrate(&f, a, a + 1.0, settings)?;
    let tail = integrate(
        |s| {
            let x = a + 1.0 / s;
            if x.is_infinite() {
                return Ok(0.0);
            }
            let fx = f(x)?;
            if fx == 0.0 {
                return Ok(0.0);
            }
            Ok(fx / s / s)
        },
        0.0,
        1.0,
        settings,
    )?;
    Ok(combine(head, tail))
}

/// Integrate over `[a, b]` when `f` may be singular at either end.
///
/// The left half is integrated as usual. The right half is integrated in the
/// distance `y = b - x` from the upper end, through `f_reflected(y) = f(b - y)`,
/// which the caller evaluates without forming `b - y` in floating point. An
/// ordinary rule cannot place abscissae closer than one ulp to `b`, which
/// loses `O(sqrt(ulp))` of an inverse-square-root singularity.
pub fn integrate_two_sided<F, G>(f: F, f_reflected: G, a: f64, b: f64, settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("two-sided integration needs finite a < b, got [{a}, {b}]")));
    }
    let mid = a + 0.5 * (b - a);
    let left = integrate(f, a, mid, settings)?;
    let right = integrate(f_reflected, 0.0, b - mid, settings)?;
    Ok(combine(left, right))
}

/// Integrate over consecutive panels `[p_0, p_1], [p_1, p_2], ...`, for
/// integrands with features at known interior points.
pub fn integrate_with_breaks<F>(f: F, points: &[f64], settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut total = Integral {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        panels: 0,
    };
    for w in points.windows(2) {
        total = combine(total, integrate(&f, w[0], w[1], settings)?);
    }
    Ok(total)
}

fn combine(x: Integral, y: Integral) -> Integral {
    Integral {
        value: x.value + y.value,
        error_estimate: x.error_estimate + y.error_estimate,
        evaluations: x.evaluations + y.evaluations,
        panels: x.panels + y.panels,
    }
}

/// Integrate over `[a, b]`, dispatching to the semi-infinite map when `b = +∞`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<Integral>
where
    F: Fn(f64) -> Result<f64>,
{
    if b == f64::INFINITY {
        integrate_to_infinity(f, a, settings)
    } else {
        integrate(f, a, b, settings)
    }
}
