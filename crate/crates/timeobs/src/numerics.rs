//! Complex error function, adaptive quadrature, and numerical differentiation.
//!
//! These are the low-level kernels every physics module builds on: a
//! Faddeeva-based complex complementary error function, an adaptive
//! Gauss-Legendre integrator over finite intervals, and a Richardson-refined
//! central-difference derivative with respect to energy.

use crate::error::{Result, TimeObsError};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Step of the primary trapezoidal node grid for the Faddeeva sum.
const H_PRIMARY: f64 = 0.45;
/// Step of the alternate grid, used when the argument is close to a primary
/// node on the real axis.  The two grids share no node, so at least one of
/// them keeps every denominator away from zero.
const H_FALLBACK: f64 = 0.5;
/// Positive nodes per grid: (k + 1/2) h for k < N keeps |t_k| below 7.3,
/// where exp(-t^2) is below 8e-24.
const N_PRIMARY: usize = 16;
const N_FALLBACK: usize = 15;
/// Distance (in both axes) below which the alternate grid takes over.
const NODE_GUARD: f64 = 0.01;

fn exp_table(h: f64, n: usize, cell: &OnceLock<Vec<f64>>) -> &Vec<f64> {
    cell.get_or_init(|| {
        (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) * h;
                (-t * t).exp()
            })
            .collect()
    })
}

/// Faddeeva function w(z) = exp(-z^2) erfc(-i z) for arguments in the closed
/// upper half-plane.
///
/// Uses a trapezoidal sum over shifted Gaussian nodes plus a pole-correction
/// term inside the strip Im z < pi/h; above the strip the bare sum is
/// accurate on its own.  Two interleaved node grids are alternated near the
/// real axis so that no argument can land on a node of the grid in use.
/// Relative accuracy is near machine precision over the half-plane; a mild
/// loss (about 1e-15) occurs within the node-guard band on the real axis.
pub fn faddeeva(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0, "faddeeva requires Im z >= 0");
    static PRIMARY: OnceLock<Vec<f64>> = OnceLock::new();
    static FALLBACK: OnceLock<Vec<f64>> = OnceLock::new();

    let mut h = H_PRIMARY;
    let mut table = exp_table(H_PRIMARY, N_PRIMARY, &PRIMARY);
    if z.im < NODE_GUARD {
        let u = z.re.abs();
        let k = (u / H_PRIMARY - 0.5).round().max(0.0);
        let nearest = (k + 0.5) * H_PRIMARY;
        if (u - nearest).abs() < NODE_GUARD {
            h = H_FALLBACK;
            table = exp_table(H_FALLBACK, N_FALLBACK, &FALLBACK);
        }
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for (k, ek) in table.iter().enumerate() {
        let t = (k as f64 + 0.5) * h;
        sum += ek * (1.0 / (z - t) + 1.0 / (z + t));
    }
    let mut w = Complex64::new(0.0, h / PI) * sum;

    if z.im < PI / h {
        let shift = Complex64::new(0.0, 2.0 * PI / h) * z;
        w += 2.0 * (shift - z * z).exp() / (1.0 + shift.exp());
    }
    w
}

enum ErfcInner {
    Value(Complex64),
    /// The result magnitude exceeds the f64 range.
    TooBig,
    /// The result magnitude is below the smallest representable f64.
    TooSmall,
}

/// erfc on the closed right half-plane Re z >= 0.
fn erfc_right(z: Complex64) -> ErfcInner {
    if z.im < 0.0 {
        return match erfc_right(z.conj()) {
            ErfcInner::Value(v) => ErfcInner::Value(v.conj()),
            other => other,
        };
    }
    // First quadrant: erfc(z) = exp(-z^2) w(iz), and iz lies in the upper
    // half-plane.
    let w = faddeeva(Complex64::new(-z.im, z.re));
    let growth = z.im * z.im - z.re * z.re;
    let log_mag = growth + w.norm().ln();
    if log_mag > 709.0 {
        return ErfcInner::TooBig;
    }
    if log_mag < -745.0 {
        return ErfcInner::TooSmall;
    }
    if growth.abs() < 650.0 {
        ErfcInner::Value((-z * z).exp() * w)
    } else {
        // Fold the prefactor into a single exponential so no intermediate
        // leaves the f64 range.  w has no zeros in the upper half-plane, so
        // the logarithm is well defined.
        ErfcInner::Value((w.ln() - z * z).exp())
    }
}

/// Complementary error function for complex arguments.
///
/// The argument is reduced to the first quadrant through the reflection
/// erfc(-z) = 2 - erfc(z) and conjugation symmetry, then evaluated as
/// exp(-z^2) w(iz).  Arguments with |Re z| or |Im z| at or above 1e6 are
/// rejected, as are results whose magnitude leaves the f64 range.  Relative
/// accuracy is at the 1e-13 level for |z| up to 30, except in shrinking
/// neighbourhoods of the complex zeros of erfc in the left half-plane,
/// where the reflection difference loses relative (not absolute) accuracy.
pub fn erfc_complex(z: Complex64) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(TimeObsError::Domain("erfc argument must be finite".into()));
    }
    if z.re.abs() >= 1e6 || z.im.abs() >= 1e6 {
        return Err(TimeObsError::Domain(
            "erfc argument guard: |Re z| and |Im z| must be below 1e6".into(),
        ));
    }
    if z.re >= 0.0 {
        match erfc_right(z) {
            ErfcInner::Value(v) => Ok(v),
            ErfcInner::TooBig => Err(TimeObsError::Overflow(
                "erfc result overflows the f64 range".into(),
            )),
            ErfcInner::TooSmall => Err(TimeObsError::Overflow(
                "erfc result underflows the f64 range".into(),
            )),
        }
    } else {
        match erfc_right(-z) {
            ErfcInner::Value(v) => Ok(2.0 - v),
            // 2 - (below tiniest f64) is exactly 2.
            ErfcInner::TooSmall => Ok(Complex64::new(2.0, 0.0)),
            ErfcInner::TooBig => Err(TimeObsError::Overflow(
                "erfc result overflows the f64 range".into(),
            )),
        }
    }
}

/// Interval, tolerances, and panel budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Lower integration limit (finite).
    pub lower: f64,
    /// Upper integration limit (finite, greater than `lower`).
    pub upper: f64,
    /// Relative tolerance on the accumulated error estimate, in (0, 1).
    pub rel_tol: f64,
    /// Absolute tolerance floor; convergence is declared when the error
    /// estimate drops below max(rel_tol * |value|, abs_tol).  Needed when
    /// the integral itself is consistent with zero.
    pub abs_tol: f64,
    /// Maximum number of panels before giving up.
    pub max_panels: usize,
    /// Number of equal panels the interval starts with.  Raise it for
    /// oscillatory integrands so the first pass already resolves the phase.
    pub initial_panels: usize,
}

impl QuadratureSpec {
    /// Spec over `[lower, upper]` with relative tolerance 1e-8, no absolute
    /// floor, a budget of 20000 panels, and a single initial panel.
    pub fn new(lower: f64, upper: f64) -> Self {
        QuadratureSpec {
            lower,
            upper,
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_panels: 20_000,
            initial_panels: 1,
        }
    }

    /// Replaces the relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Replaces the absolute tolerance floor.
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    /// Replaces the panel budget.
    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    /// Replaces the initial panel count.
    pub fn with_initial_panels(mut self, initial_panels: usize) -> Self {
        self.initial_panels = initial_panels;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = self.lower.is_finite()
            && self.upper.is_finite()
            && self.lower < self.upper
            && self.rel_tol > 0.0
            && self.rel_tol < 1.0
            && self.abs_tol >= 0.0
            && self.abs_tol.is_finite()
            && self.max_panels >= 1
            && self.initial_panels >= 1
            && self.initial_panels <= self.max_panels;
        if ok {
            Ok(())
        } else {
            Err(TimeObsError::Domain(format!(
                "invalid quadrature spec: lower={}, upper={}, rel_tol={}, \
                 abs_tol={}, max_panels={}, initial_panels={}",
                self.lower,
                self.upper,
                self.rel_tol,
                self.abs_tol,
                self.max_panels,
                self.initial_panels
            )))
        }
    }
}

fn legendre_p15(x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=15u32 {
        let kf = f64::from(k);
        let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = pk;
    }
    let dp = 15.0 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// 15-point Gauss-Legendre nodes and weights on [-1, 1], ascending.
fn gl15_rule() -> &'static [(f64, f64); 15] {
    static RULE: OnceLock<[(f64, f64); 15]> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut rule = [(0.0f64, 0.0f64); 15];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / 15.5).cos();
            for _ in 0..60 {
                let (p, dp) = legendre_p15(x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_p15(x);
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule.sort_by(|a, b| a.0.total_cmp(&b.0));
        rule
    })
}

fn gl15_panel<F>(f: &F, a: f64, b: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let rule = gl15_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule.iter() {
        let at = mid + half * x;
        let v = f(at)?;
        if !v.is_finite() {
            return Err(TimeObsError::Domain(format!(
                "integrand is not finite at x = {at}"
            )));
        }
        acc += w * v;
    }
    Ok(half * acc)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fine: Complex64,
    err: f64,
}

struct ByError(Panel);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .err
            .total_cmp(&other.0.err)
            .then(self.0.a.total_cmp(&other.0.a))
    }
}

fn assess_panel<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let coarse = gl15_panel(f, a, b)?;
    let mid = 0.5 * (a + b);
    let fine = gl15_panel(f, a, mid)? + gl15_panel(f, mid, b)?;
    Ok(Panel {
        a,
        b,
        fine,
        err: (coarse - fine).norm(),
    })
}

/// Adaptive Gauss-Legendre integration of a complex-valued integrand over a
/// finite interval.
///
/// Each panel carries the two-half refinement of a 15-point rule as its
/// value and the coarse/fine discrepancy as its error estimate; panels are
/// refined worst-first until the summed error drops below
/// max(rel_tol * |value|, abs_tol) or the panel budget is exhausted, in
/// which case the error carries the best estimate, its residual, and the
/// panel count.  Integrand failures propagate immediately.
pub fn integrate<F>(f: F, spec: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    spec.validate()?;
    let span = spec.upper - spec.lower;
    let n0 = spec.initial_panels;
    let mut heap: BinaryHeap<ByError> = BinaryHeap::with_capacity(n0 + 16);
    let mut total = Complex64::new(0.0, 0.0);
    let mut toterr = 0.0f64;
    for j in 0..n0 {
        let a = spec.lower + span * (j as f64) / (n0 as f64);
        let b = if j + 1 == n0 {
            spec.upper
        } else {
            spec.lower + span * ((j + 1) as f64) / (n0 as f64)
        };
        let panel = assess_panel(&f, a, b)?;
        total += panel.fine;
        toterr += panel.err;
        heap.push(ByError(panel));
    }
    loop {
        let threshold = (spec.rel_tol * total.norm()).max(spec.abs_tol);
        if toterr <= threshold {
            return Ok(total);
        }
        if heap.len() >= spec.max_panels {
            return Err(TimeObsError::NonConvergence {
                panels: heap.len(),
                estimate: total,
                residual: toterr,
            });
        }
        let worst = heap.pop().expect("non-empty heap").0;
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // The panel cannot be split further in f64; the requested
            // tolerance is unreachable.
            return Err(TimeObsError::NonConvergence {
                panels: heap.len() + 1,
                estimate: total,
                residual: toterr,
            });
        }
        let left = assess_panel(&f, worst.a, mid)?;
        let right = assess_panel(&f, mid, worst.b)?;
        total += left.fine + right.fine - worst.fine;
        toterr += left.err + right.err - worst.err;
        toterr = toterr.max(0.0);
        heap.push(ByError(left));
        heap.push(ByError(right));
    }
}

/// [`integrate`] for real-valued integrands; returns the real part.
pub fn integrate_real<F>(f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate(|x| f(x).map(|v| Complex64::new(v, 0.0)), spec).map(|v| v.re)
}

/// Derivative with respect to energy with the default step
/// max(|E|, 1) * 1e-6.
///
/// Central differences at steps h and h/2 combined by one Richardson
/// extrapolation, so the leading h^2 error cancels.  The function must be
/// defined on (0, infinity); a stencil reaching E <= 0 is a domain error.
pub fn d_de<F>(f: F, e: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let h = e.abs().max(1.0) * 1e-6;
    d_de_with_step(f, e, h)
}

/// [`d_de`] with an explicit step.
pub fn d_de_with_step<F>(f: F, e: f64, h: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(e.is_finite() && h.is_finite() && h > 0.0) {
        return Err(TimeObsError::Domain(format!(
            "derivative requires finite E and positive step, got E={e}, h={h}"
        )));
    }
    if e - h <= 0.0 {
        return Err(TimeObsError::Domain(format!(
            "derivative stencil at E={e} with step {h} crosses E <= 0"
        )));
    }
    let d1 = (f(e + h)? - f(e - h)?) / (2.0 * h);
    let d2 = (f(e + 0.5 * h)? - f(e - 0.5 * h)?) / h;
    let out = (4.0 * d2 - d1) / 3.0;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(TimeObsError::Domain(format!(
            "derivative is not finite at E={e}"
        )))
    }
}

pub(crate) fn sqrt_pi() -> f64 {
    SQRT_PI
}
