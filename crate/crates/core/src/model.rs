//! Continuum closed forms for single-atom decay with a flat (Lorentzian
//! line shape) coupling.
//!
//! After the atom has decayed the field holds one photon spread over all
//! modes with a Lorentzian profile of width `gamma` around the atomic
//! frequency. Splitting the modes into a band `A` of half-width `eps`
//! centred at `nu_q` and its complement `B`, the reduced state of `A` has
//! exactly two nonzero eigenvalues: the photon weight inside the band and
//! the vacuum weight. Everything else here (entropies, fidelity, the decay
//! dynamics of the atom) follows from two-outcome distributions.

use std::f64::consts::{FRAC_1_PI, LN_2};

use crate::error::{Error, Result};

/// Tolerance on `lambda_a + lambda_b = 1` accepted by [`SpectralWeights::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// CODATA 2018 vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
/// CODATA 2018 reduced Planck constant, J s.
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;
/// Speed of light in vacuum, m/s.
pub const LIGHT_SPEED: f64 = 299_792_458.0;

/// Physical inputs of the free-space decay rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleParams {
    /// Transition dipole moment, C m.
    pub dipole_moment: f64,
    /// Atomic transition angular frequency, rad/s.
    pub transition_angular_frequency: f64,
    pub vacuum_permittivity: f64,
    pub reduced_planck: f64,
    pub light_speed: f64,
}

impl DipoleParams {
    /// Dipole moment and transition frequency with CODATA constants.
    pub fn with_si_constants(dipole_moment: f64, transition_angular_frequency: f64) -> Self {
        Self {
            dipole_moment,
            transition_angular_frequency,
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            reduced_planck: REDUCED_PLANCK,
            light_speed: LIGHT_SPEED,
        }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("dipole_moment", self.dipole_moment),
            ("transition_angular_frequency", self.transition_angular_frequency),
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("reduced_planck", self.reduced_planck),
            ("light_speed", self.light_speed),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(name, format!("must be finite and > 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Free-space spontaneous decay rate `gamma = (1/4 pi eps0) 4 omega^3 d^2 / (3 hbar c^3)` in rad/s.
pub fn decay_rate_from_dipole(params: &DipoleParams) -> Result<f64> {
    params.validate()?;
    Ok(decay_rate_formula(params))
}

fn decay_rate_formula(p: &DipoleParams) -> f64 {
    let omega = p.transition_angular_frequency;
    let prefactor = 1.0 / (4.0 * std::f64::consts::PI * p.vacuum_permittivity);
    prefactor * 4.0 * omega.powi(3) * p.dipole_moment.powi(2)
        / (3.0 * p.reduced_planck * p.light_speed.powi(3))
}

/// Physical time at which half of an excited ensemble has decayed, `ln 2 / gamma`.
/// This is also the instant of maximal atom-field entanglement.
pub fn half_life_time(decay_rate: f64) -> Result<f64> {
    if !(decay_rate.is_finite() && decay_rate > 0.0) {
        return Err(Error::domain("decay_rate", format!("must be finite and > 0, got {decay_rate}")));
    }
    Ok(LN_2 / decay_rate)
}

/// Mode partition `A`: a band of half-width `eps_tilde` centred at detuning `delta_tilde`,
/// both in units of the decay rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionSpec {
    eps_tilde: f64,
    delta_tilde: f64,
}

impl PartitionSpec {
    /// Infinite inputs are rejected; use large finite values for limits.
    pub fn new(eps_tilde: f64, delta_tilde: f64) -> Result<Self> {
        if !eps_tilde.is_finite() {
            return Err(Error::domain("eps_tilde", format!("must be finite, got {eps_tilde}")));
        }
        if eps_tilde < 0.0 {
            return Err(Error::domain("eps_tilde", format!("must be >= 0, got {eps_tilde}")));
        }
        if !delta_tilde.is_finite() {
            return Err(Error::domain("delta_tilde", format!("must be finite, got {delta_tilde}")));
        }
        Ok(Self { eps_tilde, delta_tilde })
    }

    pub fn eps_tilde(&self) -> f64 {
        self.eps_tilde
    }

    pub fn delta_tilde(&self) -> f64 {
        self.delta_tilde
    }

    /// Open detuning window `(delta - eps, delta + eps)` covered by partition `A`.
    pub fn window(&self) -> (f64, f64) {
        (self.delta_tilde - self.eps_tilde, self.delta_tilde + self.eps_tilde)
    }
}

/// The two nonzero eigenvalues of a partition's reduced field state:
/// photon weight inside `A` and photon weight in `B` (= vacuum weight of `A`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWeights {
    lambda_a: f64,
    lambda_b: f64,
}

impl SpectralWeights {
    pub fn new(lambda_a: f64, lambda_b: f64) -> Result<Self> {
        for (name, v) in [("lambda_a", lambda_a), ("lambda_b", lambda_b)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        if (lambda_a + lambda_b - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::domain(
                "lambda_a + lambda_b",
                format!("must equal 1, got {}", lambda_a + lambda_b),
            ));
        }
        Ok(Self { lambda_a, lambda_b })
    }

    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }

    pub fn lambda_b(&self) -> f64 {
        self.lambda_b
    }

    pub fn swapped(&self) -> Self {
        Self { lambda_a: self.lambda_b, lambda_b: self.lambda_a }
    }
}

/// Photon weight inside the band:
/// `lambda_a = [atan(2(eps + delta)) + atan(2(eps - delta))] / pi`, `lambda_b = 1 - lambda_a`.
pub fn partition_weights(spec: &PartitionSpec) -> SpectralWeights {
    let (eps, delta) = (spec.eps_tilde, spec.delta_tilde);
    let lambda_a = (FRAC_1_PI * ((2.0 * (eps + delta)).atan() + (2.0 * (eps - delta)).atan()))
        .clamp(0.0, 1.0);
    SpectralWeights { lambda_a, lambda_b: 1.0 - lambda_a }
}

/// `-p log2 p` with `0 log 0 = 0`.
fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy in bits of the two-outcome distribution `(p, 1 - p)`.
pub fn binary_entropy_of(p: f64) -> f64 {
    (entropy_term(p) + entropy_term(1.0 - p)).clamp(0.0, 1.0)
}

/// `1 - H(p)` computed without cancellation near `p = 1/2`.
///
/// Near the maximum the entropy is flat to second order, so `1 - H` from the
/// entropy itself bottoms out at machine epsilon; this form keeps full
/// relative precision and lets a line search resolve the peak position.
pub fn binary_entropy_deficit(p: f64) -> f64 {
    if (0.25..=0.75).contains(&p) {
        // exact by Sterbenz
        let d = p - 0.5;
        (((0.5 + d) * (2.0 * d).ln_1p() + (0.5 - d) * (-2.0 * d).ln_1p()) / LN_2).max(0.0)
    } else {
        1.0 - binary_entropy_of(p)
    }
}

/// von Neumann entropy (bits) of a reduced state with spectrum `weights`.
pub fn binary_entropy(weights: &SpectralWeights) -> f64 {
    (entropy_term(weights.lambda_a) + entropy_term(weights.lambda_b)).clamp(0.0, 1.0)
}

/// Entropy of entanglement between band `A` and the remaining modes.
pub fn partition_entanglement(spec: &PartitionSpec) -> f64 {
    binary_entropy(&partition_weights(spec))
}

/// Overlap of partition `A` with its vacuum, `Tr(rho_A |0><0|)`; equals `lambda_b`.
pub fn vacuum_fidelity(spec: &PartitionSpec) -> f64 {
    partition_weights(spec).lambda_b
}

const CRITICAL_EPSILON_TOLERANCE: f64 = 1e-12;

/// Band half-width at which the photon is equally likely inside and outside
/// the band, i.e. the unit-entanglement point for detuning `delta_tilde`.
///
/// Found by bisection on `[|delta|, |delta| + 10]`, widening the upper end
/// until the root is bracketed.
pub fn critical_epsilon(delta_tilde: f64) -> Result<f64> {
    if !delta_tilde.is_finite() {
        return Err(Error::domain("delta_tilde", format!("must be finite, got {delta_tilde}")));
    }
    let delta = delta_tilde.abs();
    let excess = |eps: f64| {
        FRAC_1_PI * ((2.0 * (eps + delta)).atan() + (2.0 * (eps - delta)).atan()) - 0.5
    };
    let mut lo = delta;
    let mut hi = delta + 10.0;
    while excess(hi) < 0.0 {
        lo = hi;
        hi = delta + 2.0 * (hi - delta);
    }
    while hi - lo > CRITICAL_EPSILON_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Atomic populations and atom-field entanglement at scaled time `gamma * t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySnapshot {
    pub scaled_time: f64,
    pub excited_population: f64,
    pub ground_population: f64,
    /// Bits.
    pub atom_field_entropy: f64,
}

fn check_time(scaled_time: f64) -> Result<()> {
    if scaled_time.is_nan() || scaled_time < 0.0 {
        return Err(Error::domain(
            "scaled_time",
            format!("time must be non-negative, got {scaled_time}"),
        ));
    }
    if scaled_time.is_infinite() {
        return Err(Error::domain("scaled_time", "must be finite"));
    }
    Ok(())
}

/// Entropy of `(e^{-s}, 1 - e^{-s})` using `ln e^{-s} = -s` exactly.
fn decay_entropy(s: f64) -> f64 {
    let excited = (-s).exp();
    let ground = -(-s).exp_m1();
    let excited_term = excited * s;
    let ground_term = if ground > 0.0 { -ground * ground.ln() } else { 0.0 };
    ((excited_term + ground_term) / LN_2).clamp(0.0, 1.0)
}

/// Populations of the decaying atom, `e^{-gamma t}` excited and the rest in the ground state.
pub fn atom_population(scaled_time: f64) -> Result<DecaySnapshot> {
    check_time(scaled_time)?;
    Ok(DecaySnapshot {
        scaled_time,
        excited_population: (-scaled_time).exp(),
        ground_population: -(-scaled_time).exp_m1(),
        atom_field_entropy: decay_entropy(scaled_time),
    })
}

/// Entanglement (bits) between the atom and the whole radiation field during decay.
pub fn atom_field_entanglement(scaled_time: f64) -> Result<f64> {
    check_time(scaled_time)?;
    Ok(decay_entropy(scaled_time))
}

/// `1 - atom_field_entanglement`, accurate near the one-ebit instant.
pub fn entanglement_deficit(scaled_time: f64) -> Result<f64> {
    check_time(scaled_time)?;
    Ok(binary_entropy_deficit((-scaled_time).exp()))
}

/// Joint entropy of all field modes. The atom-field state stays pure, so it
/// equals the atomic entropy.
pub fn field_state_entropy(scaled_time: f64) -> Result<f64> {
    atom_field_entanglement(scaled_time)
}

/// Entropic bound `max(S_B - S_AB, 0)` on distillable entanglement.
pub fn distillable_bound(entropy_b: f64, entropy_ab: f64) -> Result<f64> {
    for (name, v) in [("entropy_b", entropy_b), ("entropy_ab", entropy_ab)] {
        if v.is_nan() || v < 0.0 {
            return Err(Error::domain(name, format!("entropy must be >= 0, got {v}")));
        }
    }
    Ok((entropy_b - entropy_ab).max(0.0))
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if !(lo < x1 && x1 <= x2 && x2 < hi) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Scaled time of maximal atom-field entanglement, located numerically by
/// golden-section search over `[0, 5]` on the entanglement deficit.
pub fn peak_entanglement_time() -> f64 {
    golden_section_min(|s| binary_entropy_deficit((-s).exp()), 0.0, 5.0, 1e-15)
}
