//! Parameter sweeps over band half-width, detuning and time, plus
//! the oracle and quadrature verification runs.
//!
//! Points are evaluated through [`Execution`] and collected in axis order,
//! so results are identical whether or not the rayon pool is used.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, TAU};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, PartitionSpec};
use crate::oracle::{self, DiscreteModeGrid, GridSpacing};
use crate::parallel::Execution;
use crate::quadrature;

/// Minimum mode count for a meaningful continuum comparison.
pub const MIN_ORACLE_MODES: usize = 1_000;
/// Memory guard for the discrete grid (three `f64`-sized vectors per mode).
pub const MAX_ORACLE_MODES: usize = 50_000_000;

/// Inclusive linear axis `min..=max` with `steps` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRange {
    min: f64,
    max: f64,
    steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Config(format!("range bounds must be finite, got {min}:{max}")));
        }
        if min >= max {
            return Err(Error::Config(format!("range needs min < max, got {min}:{max}")));
        }
        if steps < 2 {
            return Err(Error::Config(format!("range needs at least 2 steps, got {steps}")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.steps - 1) as f64
    }

    /// Grid points; the end points are hit exactly and a symmetric range contains 0 exactly
    /// when `steps` is odd.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                self.min * (1.0 - t) + self.max * t
            })
            .collect()
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.steps)
    }
}

impl std::str::FromStr for AxisRange {
    type Err = Error;

    /// `min:max:steps`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("expected min:max:steps, got '{s}'")));
        }
        let num = |p: &str| {
            p.parse::<f64>().map_err(|_| Error::Config(format!("'{p}' in range '{s}' is not a number")))
        };
        let steps = parts[2]
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("'{}' in range '{s}' is not a step count", parts[2])))?;
        AxisRange::new(num(parts[0])?, num(parts[1])?, steps)
    }
}

/// Either a linear range or an explicit list of values.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    Range(AxisRange),
    List(Vec<f64>),
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Range(r) => r.values(),
            Axis::List(v) => v.clone(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Range(r) => r.fmt(f),
            Axis::List(v) => f.write_str(&join_values(v)),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    /// `min:max:steps` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        if s.contains(':') {
            s.parse().map(Axis::Range)
        } else {
            parse_list(s).map(Axis::List)
        }
    }
}

/// Comma-separated finite numbers, at least one.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| match p.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Config(format!("'{p}' in list '{s}' is not a finite number"))),
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::Config(format!("empty value list '{s}'")));
    }
    Ok(values)
}

fn join_values(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Epsilon,
    Delta,
    Time,
    FidelityGrid,
    OracleCheck,
    Verify,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Epsilon => "sweep-epsilon",
            SweepKind::Delta => "sweep-delta",
            SweepKind::Time => "sweep-time",
            SweepKind::FidelityGrid => "fidelity-grid",
            SweepKind::OracleCheck => "oracle-check",
            SweepKind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// What to compute; one variant per sweep kind.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepPlan {
    Epsilon { deltas: Vec<f64>, eps: AxisRange },
    Delta { eps_values: Vec<f64>, delta: AxisRange },
    Time { range: AxisRange },
    FidelityGrid { eps: AxisRange, delta: AxisRange },
    OracleCheck { modes: usize, span: f64, spacing: GridSpacing, eps: Axis, delta: Axis },
    Verify { tol: f64 },
}

impl SweepPlan {
    pub fn kind(&self) -> SweepKind {
        match self {
            SweepPlan::Epsilon { .. } => SweepKind::Epsilon,
            SweepPlan::Delta { .. } => SweepKind::Delta,
            SweepPlan::Time { .. } => SweepKind::Time,
            SweepPlan::FidelityGrid { .. } => SweepKind::FidelityGrid,
            SweepPlan::OracleCheck { .. } => SweepKind::OracleCheck,
            SweepPlan::Verify { .. } => SweepKind::Verify,
        }
    }
}

/// A fully resolved run: plan plus where and how to write it.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub plan: SweepPlan,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

/// Table of sweep rows with provenance metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SweepResult {
    fn new(kind: SweepKind, header: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("tool".to_owned(), "wwent".to_owned());
        metadata.insert("version".to_owned(), env!("CARGO_PKG_VERSION").to_owned());
        metadata.insert("kind".to_owned(), kind.name().to_owned());
        Self { metadata, header, rows }
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_owned(), value.to_string());
        self
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Column label for a curve parameter, e.g. `entanglement_delta_2`.
pub fn curve_label(prefix: &str, value: f64) -> String {
    format!("{prefix}_{value}")
}

/// One verification identity and its outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn abs_error(&self) -> f64 {
        (self.computed - self.expected).abs()
    }

    pub fn passed(&self) -> bool {
        self.abs_error() <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn to_result(&self, tol: f64) -> SweepResult {
        let header = ["check", "computed", "expected", "abs_error", "tolerance", "passed"]
            .map(str::to_owned)
            .to_vec();
        let rows = self
            .checks
            .iter()
            .enumerate()
            .map(|(i, c)| {
                vec![
                    i as f64,
                    c.computed,
                    c.expected,
                    c.abs_error(),
                    c.tolerance,
                    if c.passed() { 1.0 } else { 0.0 },
                ]
            })
            .collect();
        let mut result = SweepResult::new(SweepKind::Verify, header, rows)
            .with("tol", tol)
            .with("all_passed", self.all_passed());
        for (i, c) in self.checks.iter().enumerate() {
            result = result.with(&format!("check.{i:02}"), &c.name);
        }
        result
    }
}

/// Sweep engine. `Sweeper::default()` runs in parallel when the feature is enabled.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sweeper {
    exec: Execution,
}

impl Sweeper {
    pub fn new(exec: Execution) -> Self {
        Self { exec }
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn run(&self, plan: &SweepPlan) -> Result<SweepResult> {
        match plan {
            SweepPlan::Epsilon { deltas, eps } => self.sweep_epsilon(deltas, *eps),
            SweepPlan::Delta { eps_values, delta } => self.sweep_delta(eps_values, *delta),
            SweepPlan::Time { range } => self.sweep_time(*range),
            SweepPlan::FidelityGrid { eps, delta } => self.grid_fidelity(*eps, *delta),
            SweepPlan::OracleCheck { modes, span, spacing, eps, delta } => {
                let specs = spec_grid(&eps.values(), &delta.values())?;
                Ok(self
                    .oracle_check(*modes, *span, *spacing, &specs)?
                    .with("eps_axis", eps)
                    .with("delta_axis", delta))
            }
            SweepPlan::Verify { tol } => Ok(self.verify(*tol)?.to_result(*tol)),
        }
    }

    /// Entanglement versus band half-width, one column per detuning.
    pub fn sweep_epsilon(&self, deltas: &[f64], eps: AxisRange) -> Result<SweepResult> {
        if deltas.is_empty() {
            return Err(Error::Config("sweep-epsilon needs at least one detuning".into()));
        }
        let eps_values = eps.values();
        // validate once up front so errors name the parameter, not a row
        PartitionSpec::new(eps.min(), deltas[0])?;
        for &d in deltas {
            PartitionSpec::new(eps.max(), d)?;
        }
        let rows = self.exec.try_map(&eps_values, |&e| -> Result<Vec<f64>> {
            let mut row = Vec::with_capacity(deltas.len() + 1);
            row.push(e);
            for &d in deltas {
                row.push(model::partition_entanglement(&PartitionSpec::new(e, d)?));
            }
            Ok(row)
        })?;
        let header = std::iter::once("eps_tilde".to_owned())
            .chain(deltas.iter().map(|&d| curve_label("entanglement_delta", d)))
            .collect();
        Ok(SweepResult::new(SweepKind::Epsilon, header, rows)
            .with("deltas", join_values(deltas))
            .with("eps_range", eps))
    }

    /// Entanglement versus detuning, one column per band half-width.
    pub fn sweep_delta(&self, eps_values: &[f64], delta: AxisRange) -> Result<SweepResult> {
        if eps_values.is_empty() {
            return Err(Error::Config("sweep-delta needs at least one band half-width".into()));
        }
        for &e in eps_values {
            PartitionSpec::new(e, delta.min())?;
        }
        let rows = self.exec.try_map(&delta.values(), |&d| -> Result<Vec<f64>> {
            let mut row = Vec::with_capacity(eps_values.len() + 1);
            row.push(d);
            for &e in eps_values {
                row.push(model::partition_entanglement(&PartitionSpec::new(e, d)?));
            }
            Ok(row)
        })?;
        let header = std::iter::once("delta_tilde".to_owned())
            .chain(eps_values.iter().map(|&e| curve_label("entanglement_eps", e)))
            .collect();
        Ok(SweepResult::new(SweepKind::Delta, header, rows)
            .with("eps_values", join_values(eps_values))
            .with("delta_range", delta))
    }

    /// Atomic excited population and atom-field entanglement over scaled time.
    pub fn sweep_time(&self, range: AxisRange) -> Result<SweepResult> {
        if range.min() < 0.0 {
            return Err(Error::Config(format!(
                "scaled time range starts at {}: time must be non-negative",
                range.min()
            )));
        }
        let rows = self.exec.try_map(&range.values(), |&s| -> Result<Vec<f64>> {
            let snap = model::atom_population(s)?;
            Ok(vec![s, snap.excited_population, snap.atom_field_entropy])
        })?;
        let header = ["gamma_t", "excited_population", "atom_field_entropy"].map(str::to_owned).to_vec();
        Ok(SweepResult::new(SweepKind::Time, header, rows).with("time_range", range))
    }

    /// Vacuum fidelity of partition `A` on an `eps x delta` grid, `eps` outer.
    pub fn grid_fidelity(&self, eps: AxisRange, delta: AxisRange) -> Result<SweepResult> {
        let specs = spec_grid(&eps.values(), &delta.values())?;
        let rows = self.exec.map(&specs, |spec| {
            vec![spec.eps_tilde(), spec.delta_tilde(), model::vacuum_fidelity(spec)]
        });
        let header = ["eps_tilde", "delta_tilde", "fidelity"].map(str::to_owned).to_vec();
        Ok(SweepResult::new(SweepKind::FidelityGrid, header, rows)
            .with("eps_range", eps)
            .with("delta_range", delta))
    }

    /// Closed-form `lambda_a` against the discrete-mode sum for each spec.
    pub fn oracle_check(
        &self,
        modes: usize,
        span: f64,
        spacing: GridSpacing,
        specs: &[PartitionSpec],
    ) -> Result<SweepResult> {
        if modes < MIN_ORACLE_MODES {
            return Err(Error::domain(
                "modes",
                format!("need at least {MIN_ORACLE_MODES} modes for a continuum comparison, got {modes}"),
            ));
        }
        if modes > MAX_ORACLE_MODES {
            return Err(Error::Size { what: "mode grid", size: modes, limit: MAX_ORACLE_MODES });
        }
        let grid = DiscreteModeGrid::build(modes, span, 0.0, spacing)?;
        let comparisons = oracle::compare_with_closed_form(&grid, specs, self.exec)?;
        let max_error = comparisons.iter().map(|c| c.abs_error()).fold(0.0, f64::max);
        let rows = comparisons
            .iter()
            .map(|c| {
                vec![c.spec.eps_tilde(), c.spec.delta_tilde(), c.closed_form, c.discrete, c.abs_error()]
            })
            .collect();
        let header = ["eps_tilde", "delta_tilde", "lambda_a_closed", "lambda_a_discrete", "abs_error"]
            .map(str::to_owned)
            .to_vec();
        let spacing_name = match spacing {
            GridSpacing::Uniform => "uniform".to_owned(),
            GridSpacing::Graded { scale } => format!("graded(scale={scale})"),
        };
        Ok(SweepResult::new(SweepKind::OracleCheck, header, rows)
            .with("modes", modes)
            .with("span", span)
            .with("spacing", spacing_name)
            .with("tail_mass", format!("{:.6e}", grid.tail_mass()))
            .with("max_abs_error", format!("{max_error:.16e}")))
    }

    /// Quadrature identities and the rank-two check on a small exhaustive grid.
    pub fn verify(&self, tol: f64) -> Result<VerifyReport> {
        let mut checks = Vec::new();
        let mut check = |name: String, computed: f64, expected: f64, tolerance: f64| {
            checks.push(CheckOutcome { name, computed, expected, tolerance })
        };

        for (a, b) in [(f64::NEG_INFINITY, f64::INFINITY), (-0.5, 0.5), (0.3, 7.1), (2.0, f64::INFINITY)] {
            let r = quadrature::lorentzian_band_integral(a, b, tol)?;
            let expected = 2.0 * ((2.0 * b).atan() - (2.0 * a).atan());
            check(format!("lorentzian band [{a}, {b}] vs arctan antiderivative"), r.value, expected, tol);
        }
        let full = quadrature::lorentzian_band_integral(f64::NEG_INFINITY, f64::INFINITY, tol)?;
        check("full lorentzian = 2 pi".into(), full.value, TAU, tol);

        let times = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
        let integrals = self.exec.try_map(&times, |&s| quadrature::rho_bb_integral(s, tol))?;
        for (s, r) in times.iter().zip(integrals) {
            check(
                format!("ground population integral at gamma t = {s} vs 1 - exp(-gamma t)"),
                r.value,
                -(-s).exp_m1(),
                tol,
            );
        }

        let cubic = quadrature::cubic_weight_band_error(
            0.5,
            0.0,
            quadrature::DEFAULT_CUTOFF,
            quadrature::DEFAULT_OMEGA_TILDE,
            tol.min(1e-12),
        )?;
        check("nu^3 flattening error in the optical regime (below 1e-6)".into(), cubic, 0.0, 1e-6);

        let spec = PartitionSpec::new(0.5, 0.0)?;
        let w = model::partition_weights(&spec);
        check("lambda_a + lambda_b = 1".into(), w.lambda_a() + w.lambda_b(), 1.0, 1e-14);
        check(
            "peak atom-field entanglement at ln 2".into(),
            model::peak_entanglement_time(),
            LN_2,
            1e-12,
        );
        check("critical epsilon at delta = 0".into(), model::critical_epsilon(0.0)?, 0.5, 1e-9);

        let grid = oracle::build_mode_grid(8, 3.0, 0.0)?;
        let rank = oracle::rank_two_survey(&grid, self.exec)?;
        check("third eigenvalue of rho_A, all 256 partitions of 8 modes".into(), rank.max_third_eigenvalue, 0.0, 1e-12);
        check("top eigenvalues of rho_A vs mode sums".into(), rank.max_spectrum_mismatch, 0.0, 1e-10);

        let half = oracle::build_mode_grid(200_000, 1000.0, 0.0)?;
        let labels = oracle::assign_partition(&half, &spec);
        check(
            "discrete band weight at (0.5, 0) vs closed form".into(),
            oracle::reduced_weights(&half, &labels)?.lambda_a(),
            w.lambda_a(),
            2e-3,
        );

        Ok(VerifyReport { checks })
    }
}

/// Cartesian product, `eps` outer and `delta` inner.
pub fn spec_grid(eps: &[f64], delta: &[f64]) -> Result<Vec<PartitionSpec>> {
    eps.iter()
        .flat_map(|&e| delta.iter().map(move |&d| PartitionSpec::new(e, d)))
        .collect()
}
