//! Adaptive quadrature of the Lorentzian-weighted integrals.
//!
//! Integrals are in the dimensionless detuning `x = (nu - omega) / gamma`,
//! where the emission line is `1 / (x^2 + 1/4)`. Lorentzian integrals are
//! taken in the variable `u = atan(x)`, which maps infinite limits to
//! `+-pi/2` and turns the kernel into the bounded `1 / (sin^2 u + cos^2 u / 4)`.
//!
//! The integrator is a global adaptive Gauss-Kronrod 7/15 scheme: the panel
//! with the largest error estimate is bisected until the summed estimate
//! meets the tolerance or the evaluation budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Maximum integrand evaluations per integral.
pub const EVALUATION_BUDGET: usize = 1_000_000;

/// Above this scaled time the oscillatory panel width is capped at `pi / (2 s)`.
const OSCILLATION_CAP_TIME: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

// 15-point Kronrod nodes (non-negative half) and weights, with the embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7/15 panel: `(value, error estimate)` with QUADPACK's error scaling.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    if abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_value);
    }
    (value, err)
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken on position so refinement order is fully deterministic
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Integrate `f` over the sorted `breakpoints` to absolute tolerance `tol`.
fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    tol: f64,
    budget: usize,
    what: &'static str,
) -> Result<IntegralResult> {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            evaluations += 15;
            heap.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    let exact_total = |heap: &BinaryHeap<Panel>| heap.iter().map(|p| p.error).sum::<f64>();
    let mut total_error = exact_total(&heap);
    loop {
        if total_error <= tol {
            // running sum may drift; confirm before accepting
            total_error = exact_total(&heap);
            if total_error <= tol {
                let mut panels = heap.into_vec();
                panels.sort_by(|p, q| p.a.total_cmp(&q.a));
                let value = crate::summation::compensated_sum(panels.iter().map(|p| p.value));
                return Ok(IntegralResult { value, error_estimate: total_error, evaluations });
            }
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok(IntegralResult { value: 0.0, error_estimate: 0.0, evaluations }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if evaluations + 30 > budget || !(worst.a < mid && mid < worst.b) {
            heap.push(worst);
            let error_estimate = exact_total(&heap);
            return Err(Error::Convergence { what, error_estimate, tolerance: tol, evaluations });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain("tol", format!("must be finite and > 0, got {tol}")));
    }
    Ok(())
}

/// `integral_a^b g(x) / (x^2 + 1/4) dx` in the variable `u = atan(x)`.
fn lorentzian_weighted<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    tol: f64,
    what: &'static str,
) -> Result<IntegralResult> {
    let (ua, ub) = (a.atan(), b.atan());
    let mut breaks = vec![ua];
    // peak of the line sits at u = 0, width ~0.5
    for u in [-1.0, -0.25, 0.0, 0.25, 1.0] {
        if ua < u && u < ub {
            breaks.push(u);
        }
    }
    breaks.push(ub);
    integrate(
        |u: f64| {
            let (s, c) = u.sin_cos();
            g(u.tan()) / (s * s + 0.25 * c * c)
        },
        &breaks,
        tol,
        EVALUATION_BUDGET,
        what,
    )
}

/// `integral_a^b dx / (x^2 + 1/4)`; either limit may be infinite.
///
/// The exact value is `2 [atan(2b) - atan(2a)]`, i.e. `2 pi` over the whole line.
pub fn lorentzian_band_integral(a: f64, b: f64, tol: f64) -> Result<IntegralResult> {
    check_tolerance(tol)?;
    if a.is_nan() || b.is_nan() || a >= b || a == f64::INFINITY || b == f64::NEG_INFINITY {
        return Err(Error::domain("band", format!("need a < b, got [{a}, {b}]")));
    }
    lorentzian_weighted(|_| 1.0, a, b, tol, "lorentzian band integral")
}

/// Ground-state population of the atom at scaled time `s`, obtained by
/// integrating the one-photon probability density over all detunings:
/// `(1/2pi) integral |1 - e^{-i x s - s/2}|^2 / (x^2 + 1/4) dx`
/// `= (1/2pi) integral [1 + e^{-s} - 2 e^{-s/2} cos(x s)] / (x^2 + 1/4) dx`.
///
/// The kernel is even; `[0, L]` is integrated directly on panels aligned to
/// the cosine period (a quarter period once `s > 20`), the smooth part of the
/// tail beyond `L` in the tangent variable, and the oscillating part of the
/// tail is bounded by parts and added to the error estimate.
pub fn rho_bb_integral(scaled_time: f64, tol: f64) -> Result<IntegralResult> {
    check_tolerance(tol)?;
    if scaled_time.is_nan() || scaled_time < 0.0 || scaled_time.is_infinite() {
        return Err(Error::domain(
            "scaled_time",
            format!("time must be finite and non-negative, got {scaled_time}"),
        ));
    }
    let s = scaled_time;
    let damping = (-0.5 * s).exp();
    let constant = 1.0 + damping * damping;
    // 2/(2 pi) for the even extension
    let scale = 2.0 / TAU;
    let numerator = |x: f64| {
        let (sin, cos) = (x * s).sin_cos();
        let re = 1.0 - damping * cos;
        let im = damping * sin;
        scale * (re * re + im * im)
    };
    if s == 0.0 {
        // nothing oscillates; the kernel is identically zero
        return lorentzian_weighted(numerator, 0.0, f64::INFINITY, tol, "rho_bb integral");
    }
    let kernel = |x: f64| numerator(x) / (x * x + 0.25);

    // |integral_L^inf cos(xs)/(x^2+1/4) dx| <= min(2/(s L^2), 1/L)
    let osc_coeff = scale * 2.0 * damping;
    let target = 0.25 * tol;
    let by_parts = (2.0 * osc_coeff / (s * target)).sqrt();
    let direct = osc_coeff / target;
    let mut cut = by_parts.min(direct).max(50.0);

    let panel = if s > OSCILLATION_CAP_TIME { PI / (2.0 * s) } else { TAU / s };
    let panel_count = (cut / panel).ceil();
    if 15.0 * panel_count > EVALUATION_BUDGET as f64 {
        return Err(Error::Convergence {
            what: "rho_bb integral",
            error_estimate: f64::INFINITY,
            tolerance: tol,
            evaluations: 0,
        });
    }
    let panel_count = panel_count as usize;
    cut = panel_count as f64 * panel;
    let mut breaks: Vec<f64> = (0..=panel_count).map(|k| k as f64 * panel).collect();
    // resolve the line centre when the first panel is wide
    if panel > 1.0 {
        breaks.splice(1..1, [0.25, 1.0].into_iter().filter(|&x| x < panel));
    }

    let tail_bound = osc_coeff * (2.0 / (s * (cut * cut + 0.25))).min(1.0 / cut);
    let core = integrate(kernel, &breaks, 0.5 * tol, EVALUATION_BUDGET, "rho_bb integral")?;
    let tail = lorentzian_weighted(
        |_| scale * constant,
        cut,
        f64::INFINITY,
        0.25 * tol,
        "rho_bb integral",
    )?;
    let result = IntegralResult {
        value: core.value + tail.value,
        error_estimate: core.error_estimate + tail.error_estimate + tail_bound,
        evaluations: core.evaluations + tail.evaluations,
    };
    if result.error_estimate > tol {
        return Err(Error::Convergence {
            what: "rho_bb integral",
            error_estimate: result.error_estimate,
            tolerance: tol,
            evaluations: result.evaluations,
        });
    }
    Ok(result)
}

/// Relative change of the band's photon weight when the flattened coupling
/// `omega^3` is replaced by the full `nu^3 = omega^3 (1 + x / omega_tilde)^3`.
///
/// Both weights are normalized over the physical spectrum `[-omega_tilde, cutoff]`
/// (`nu` from 0 to `omega + cutoff * gamma`). The excess numerator
/// `(1 + y)^3 - 1` is integrated on its own so the small difference keeps
/// full precision.
pub fn cubic_weight_band_error(
    eps_tilde: f64,
    delta_tilde: f64,
    cutoff: f64,
    omega_tilde: f64,
    tol: f64,
) -> Result<f64> {
    check_tolerance(tol)?;
    if !(omega_tilde.is_finite() && omega_tilde > 0.0) {
        return Err(Error::domain("omega_tilde", format!("must be finite and > 0, got {omega_tilde}")));
    }
    if !cutoff.is_finite() {
        return Err(Error::domain("cutoff", format!("must be finite, got {cutoff}")));
    }
    if !(eps_tilde.is_finite() && eps_tilde >= 0.0) {
        return Err(Error::domain("eps_tilde", format!("must be finite and >= 0, got {eps_tilde}")));
    }
    if !delta_tilde.is_finite() {
        return Err(Error::domain("delta_tilde", format!("must be finite, got {delta_tilde}")));
    }
    let (lo, hi) = (delta_tilde - eps_tilde, delta_tilde + eps_tilde);
    if cutoff <= hi {
        return Err(Error::domain(
            "cutoff",
            format!("must exceed the band's upper edge {hi}, got {cutoff}"),
        ));
    }
    if lo < -omega_tilde {
        return Err(Error::domain(
            "eps_tilde",
            format!("band reaches below zero frequency (lower edge {lo} < {})", -omega_tilde),
        ));
    }
    if eps_tilde == 0.0 {
        return Ok(0.0);
    }

    let excess = |x: f64| {
        let y = x / omega_tilde;
        y * (3.0 + y * (3.0 + y))
    };
    let what = "cubic weight band error";
    let band_flat = lorentzian_weighted(|_| 1.0, lo, hi, tol, what)?.value;
    let band_excess = lorentzian_weighted(excess, lo, hi, tol, what)?.value;
    let total_flat = lorentzian_weighted(|_| 1.0, -omega_tilde, cutoff, tol, what)?.value;
    let total_excess = lorentzian_weighted(excess, -omega_tilde, cutoff, tol, what)?.value;

    let ratio = (1.0 + band_excess / band_flat) / (1.0 + total_excess / total_flat);
    Ok((ratio - 1.0).abs())
}

/// Standard `omega / gamma` for an optical transition with a MHz-scale linewidth.
pub const DEFAULT_OMEGA_TILDE: f64 = 1e8;
/// Default upper frequency cutoff, in units of gamma above the transition.
pub const DEFAULT_CUTOFF: f64 = 1e6;
