//! Finite-mode realization of the emitted one-photon field.
//!
//! The continuum of modes is replaced by `N` modes on a detuning grid over
//! `[center - span, center + span]` (units of the decay rate). Each mode
//! stands for a frequency cell of width `dx_i`, so its amplitude carries the
//! mode density: `p_i ~ sqrt(dx_i) / (x_i + i/2)`. On a uniform grid this is
//! the bare Lorentzian profile `p_i ~ 1/(x_i + i/2)`.
//!
//! Partial traces and spectra here are computed exactly from the amplitudes
//! and serve as the brute-force check on the closed forms in [`crate::model`].

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{self, PartitionSpec, SpectralWeights};
use crate::parallel::Execution;
use crate::summation::compensated_sum;

/// Largest partition-`A` mode count accepted by [`reduced_density_matrix`].
pub const MAX_DENSE_MODES: usize = 4096;

/// Tolerance on elementwise Hermiticity in [`eigenvalues_hermitian`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Placement of mode detunings inside the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridSpacing {
    /// Equal spacing `2 span / N`, modes at cell midpoints.
    Uniform,
    /// Midpoints of a uniform grid in `v`, mapped by `x = scale * sinh(v)`.
    /// Cells are narrow near resonance (width `~ scale * dv`) and widen
    /// linearly with `|x|` in the tails.
    Graded { scale: f64 },
}

impl Default for GridSpacing {
    fn default() -> Self {
        GridSpacing::Graded { scale: 1.0 }
    }
}

/// Discretized post-decay field state.
#[derive(Clone, Debug)]
pub struct DiscreteModeGrid {
    detunings: Vec<f64>,
    cell_widths: Vec<f64>,
    amplitudes: Vec<Complex64>,
    span: f64,
    center: f64,
    spacing: GridSpacing,
}

/// Grid with the default graded spacing.
pub fn build_mode_grid(mode_count: usize, span: f64, center: f64) -> Result<DiscreteModeGrid> {
    DiscreteModeGrid::build(mode_count, span, center, GridSpacing::default())
}

impl DiscreteModeGrid {
    pub fn build(mode_count: usize, span: f64, center: f64, spacing: GridSpacing) -> Result<Self> {
        if mode_count < 1 {
            return Err(Error::domain("mode_count", "need at least one mode"));
        }
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::domain("span", format!("must be finite and > 0, got {span}")));
        }
        if !center.is_finite() {
            return Err(Error::domain("center", format!("must be finite, got {center}")));
        }
        let n = mode_count as f64;
        let (lo, hi) = (center - span, center + span);
        let (detunings, cell_widths): (Vec<f64>, Vec<f64>) = match spacing {
            GridSpacing::Uniform => {
                let h = (hi - lo) / n;
                (0..mode_count).map(|i| (lo + (i as f64 + 0.5) * h, h)).unzip()
            }
            GridSpacing::Graded { scale } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::domain("scale", format!("must be finite and > 0, got {scale}")));
                }
                let (v_lo, v_hi) = ((lo / scale).asinh(), (hi / scale).asinh());
                let dv = (v_hi - v_lo) / n;
                (0..mode_count)
                    .map(|i| {
                        let v = v_lo + (i as f64 + 0.5) * dv;
                        (scale * v.sinh(), scale * v.cosh() * dv)
                    })
                    .unzip()
            }
        };
        if detunings.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(
                "mode_count",
                format!("{mode_count} modes are too dense to resolve over span {span}"),
            ));
        }

        let raw: Vec<Complex64> = detunings
            .iter()
            .zip(&cell_widths)
            .map(|(&x, &dx)| dx.sqrt() / Complex64::new(x, 0.5))
            .collect();
        let norm = compensated_sum(raw.iter().map(|p| p.norm_sqr())).sqrt();
        let amplitudes = raw.into_iter().map(|p| p / norm).collect();

        Ok(Self { detunings, cell_widths, amplitudes, span, center, spacing })
    }

    /// Arbitrary one-photon state on unit-spaced modes centered on zero,
    /// normalized on construction.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 {
            return Err(Error::domain("amplitudes", "need at least one mode"));
        }
        if amplitudes.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::domain("amplitudes", "must be finite"));
        }
        let norm = compensated_sum(amplitudes.iter().map(|p| p.norm_sqr())).sqrt();
        if norm == 0.0 {
            return Err(Error::domain("amplitudes", "state has zero norm"));
        }
        let offset = 0.5 * (n as f64 - 1.0);
        Ok(Self {
            detunings: (0..n).map(|i| i as f64 - offset).collect(),
            cell_widths: vec![1.0; n],
            amplitudes: amplitudes.into_iter().map(|p| p / norm).collect(),
            span: 0.5 * n as f64,
            center: 0.0,
            spacing: GridSpacing::Uniform,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.detunings.len()
    }

    /// Mode detunings `(nu_i - omega) / gamma`, strictly increasing.
    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.cell_widths
    }

    /// Normalized amplitudes `p_i` of the one-photon state.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    /// Continuum photon weight outside the grid window,
    /// `1 - [atan(2(span + c)) + atan(2(span - c))] / pi`.
    pub fn tail_mass(&self) -> f64 {
        let (w, c) = (self.span, self.center);
        1.0 - ((2.0 * (w + c)).atan() + (2.0 * (w - c)).atan()) / PI
    }

    pub fn norm_sqr(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|p| p.norm_sqr()))
    }
}

/// Membership of each grid mode in partition `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionLabels {
    in_a: Vec<bool>,
}

impl PartitionLabels {
    pub fn from_flags(in_a: Vec<bool>) -> Self {
        Self { in_a }
    }

    /// Labels for the low `len` bits of `mask` (bit `i` set means mode `i` is in `A`).
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Self { in_a: (0..len).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn flags(&self) -> &[bool] {
        &self.in_a
    }

    pub fn len(&self) -> usize {
        self.in_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_a.is_empty()
    }

    pub fn count_a(&self) -> usize {
        self.in_a.iter().filter(|&&b| b).count()
    }

    /// Swap the roles of `A` and `B`.
    pub fn complement(&self) -> Self {
        Self { in_a: self.in_a.iter().map(|b| !b).collect() }
    }
}

/// Modes with `|x_i - delta| < eps` go to `A`; the window edge itself belongs to `B`.
pub fn assign_partition(grid: &DiscreteModeGrid, spec: &PartitionSpec) -> PartitionLabels {
    let (eps, delta) = (spec.eps_tilde(), spec.delta_tilde());
    PartitionLabels { in_a: grid.detunings.iter().map(|&x| (x - delta).abs() < eps).collect() }
}

fn check_labels(grid: &DiscreteModeGrid, labels: &PartitionLabels) -> Result<()> {
    if labels.len() != grid.mode_count() {
        return Err(Error::Contract(format!(
            "{} labels for a grid of {} modes",
            labels.len(),
            grid.mode_count()
        )));
    }
    Ok(())
}

/// The two nonzero eigenvalues of `rho_A`: summed `|p_i|^2` inside and outside `A`.
pub fn reduced_weights(grid: &DiscreteModeGrid, labels: &PartitionLabels) -> Result<SpectralWeights> {
    check_labels(grid, labels)?;
    let weight_where = |want: bool| {
        compensated_sum(
            grid.amplitudes
                .iter()
                .zip(&labels.in_a)
                .filter(|(_, &a)| a == want)
                .map(|(p, _)| p.norm_sqr()),
        )
    };
    let (a, b) = (weight_where(true), weight_where(false));
    SpectralWeights::new(a.clamp(0.0, 1.0), b.clamp(0.0, 1.0))
}

/// Dense `rho_A` in the basis `{|0_A>, |1_m>}` over the `A` modes in grid order.
///
/// The vacuum entry is the photon weight in `B`; the one-photon block is `p_m p_n^*`.
pub fn reduced_density_matrix(
    grid: &DiscreteModeGrid,
    labels: &PartitionLabels,
) -> Result<DMatrix<Complex64>> {
    check_labels(grid, labels)?;
    let in_a: Vec<Complex64> = grid
        .amplitudes
        .iter()
        .zip(&labels.in_a)
        .filter_map(|(&p, &a)| a.then_some(p))
        .collect();
    if in_a.len() > MAX_DENSE_MODES {
        return Err(Error::Size { what: "partition A", size: in_a.len(), limit: MAX_DENSE_MODES });
    }
    let vacuum = reduced_weights(grid, labels)?.lambda_b();
    let dim = in_a.len() + 1;
    Ok(DMatrix::from_fn(dim, dim, |r, c| match (r, c) {
        (0, 0) => Complex64::new(vacuum, 0.0),
        (0, _) | (_, 0) => Complex64::new(0.0, 0.0),
        (m, n) => in_a[m - 1] * in_a[n - 1].conj(),
    }))
}

/// Real spectrum of a Hermitian matrix, largest first.
pub fn eigenvalues_hermitian(matrix: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if !matrix.is_square() {
        return Err(Error::Contract(format!(
            "matrix is {}x{}, not square",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let n = matrix.nrows();
    for r in 0..n {
        for c in r..n {
            let skew = (matrix[(r, c)] - matrix[(c, r)].conj()).norm();
            if skew > HERMITIAN_TOLERANCE {
                return Err(Error::Contract(format!(
                    "matrix is not Hermitian at ({r}, {c}): deviation {skew:.3e}"
                )));
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Atom and one-photon amplitudes of the evolving state.
#[derive(Clone, Debug)]
pub struct JointStateCoefficients {
    pub c_a: Complex64,
    pub c_b: Vec<Complex64>,
}

impl JointStateCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.c_a.norm_sqr() + compensated_sum(self.c_b.iter().map(|c| c.norm_sqr()))
    }
}

/// Amplitudes at scaled time `s = gamma t`:
/// `c_a = e^{-s/2}`, `c_b,i = g_i (1 - e^{-i x_i s - s/2}) / (x_i + i/2)`.
///
/// The per-mode coupling is fixed by the mode density, `|g_i|^2 = dx_i / 2pi`,
/// so the norm falls short of one by about the grid's tail mass.
pub fn joint_state_at(grid: &DiscreteModeGrid, scaled_time: f64) -> Result<JointStateCoefficients> {
    if scaled_time.is_nan() || scaled_time < 0.0 {
        return Err(Error::domain(
            "scaled_time",
            format!("time must be non-negative, got {scaled_time}"),
        ));
    }
    if scaled_time.is_infinite() {
        return Err(Error::domain("scaled_time", "must be finite"));
    }
    let s = scaled_time;
    let decay = (-0.5 * s).exp();
    let c_b = grid
        .detunings
        .iter()
        .zip(&grid.cell_widths)
        .map(|(&x, &dx)| {
            let transient = Complex64::from_polar(decay, -x * s);
            (dx / TAU).sqrt() * (Complex64::new(1.0, 0.0) - transient) / Complex64::new(x, 0.5)
        })
        .collect();
    Ok(JointStateCoefficients { c_a: Complex64::new(decay, 0.0), c_b })
}

/// `(excited, ground)` populations of the atom after tracing out the field.
pub fn atom_reduced_populations(coeffs: &JointStateCoefficients) -> (f64, f64) {
    (coeffs.c_a.norm_sqr(), compensated_sum(coeffs.c_b.iter().map(|c| c.norm_sqr())))
}

/// Outcome of comparing the discrete reduced weights with the closed form for one spec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleComparison {
    pub spec: PartitionSpec,
    pub closed_form: f64,
    pub discrete: f64,
}

impl OracleComparison {
    pub fn abs_error(&self) -> f64 {
        (self.closed_form - self.discrete).abs()
    }
}

/// `lambda_a` from the grid versus the arctan closed form, for every spec.
pub fn compare_with_closed_form(
    grid: &DiscreteModeGrid,
    specs: &[PartitionSpec],
    exec: Execution,
) -> Result<Vec<OracleComparison>> {
    exec.try_map(specs, |spec| {
        let labels = assign_partition(grid, spec);
        let discrete = reduced_weights(grid, &labels)?.lambda_a();
        Ok(OracleComparison { spec: *spec, closed_form: model::partition_weights(spec).lambda_a(), discrete })
    })
}

/// Worst case over all labelings of a small grid.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RankTwoReport {
    pub labelings: usize,
    /// Largest third eigenvalue (absolute value) of any `rho_A`.
    pub max_third_eigenvalue: f64,
    /// Largest deviation of the top two eigenvalues from the analytic weights.
    pub max_spectrum_mismatch: f64,
}

/// Diagonalize `rho_A` for every one of the `2^N` partitions of `grid`.
pub fn rank_two_survey(grid: &DiscreteModeGrid, exec: Execution) -> Result<RankTwoReport> {
    let n = grid.mode_count();
    if n > 20 {
        return Err(Error::Size { what: "exhaustive labeling grid", size: n, limit: 20 });
    }
    let masks: Vec<u64> = (0..1u64 << n).collect();
    let per_mask = exec.try_map(&masks, |&mask| -> Result<(f64, f64)> {
        let labels = PartitionLabels::from_mask(mask, n);
        let weights = reduced_weights(grid, &labels)?;
        let rho = reduced_density_matrix(grid, &labels)?;
        let eig = eigenvalues_hermitian(&rho)?;
        let third = eig.get(2).map_or(0.0, |v| v.abs());
        let mut analytic = [weights.lambda_a(), weights.lambda_b()];
        analytic.sort_by(|a, b| b.total_cmp(a));
        let top = [eig[0], eig.get(1).copied().unwrap_or(0.0)];
        let mismatch = (top[0] - analytic[0]).abs().max((top[1] - analytic[1]).abs());
        Ok((third, mismatch))
    })?;
    Ok(per_mask.into_iter().fold(
        RankTwoReport { labelings: masks.len(), ..Default::default() },
        |acc, (third, mismatch)| RankTwoReport {
            max_third_eigenvalue: acc.max_third_eigenvalue.max(third),
            max_spectrum_mismatch: acc.max_spectrum_mismatch.max(mismatch),
            ..acc
        },
    ))
}
