//! Analytic dynamics of the diagonal Hamiltonian.
//!
//! Every register basis state `|m_1..m_A>` is stationary; the marker's
//! coherent state rotates rigidly in phase space at
//! `Ω = ω_marker + Σ_k g_k·v^k`, where `v` is the integer the register writes
//! into the coupling (the product `n·m` for factoring). Conditioning the
//! marker on the coherent state belonging to a target value multiplies each
//! branch by the overlap `ε = exp{−|α|²[1 − exp(iΔ)]}` with `Δ = (Ω_target −
//! Ω_trial)·t`.

mod reduce;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use reduce::DoubleDouble;
use reduce::{reduce_f64, reduce_two_pi};

/// Highest supported order of the nonlinear coupling polynomial.
pub const MAX_ORDER: usize = 4;

/// Oscillator frequencies and nonlinear coupling strengths.
///
/// `omega` lists the bare oscillator frequencies with the marker last. The
/// register frequencies only produce phases that are removed by working in
/// the frame co-rotating with the free register Hamiltonian, so only the
/// marker entry enters [`rotation_frequency`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    omega: Vec<f64>,
    couplings: Vec<f64>,
}

impl OscillatorParams {
    pub fn new(omega: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() || couplings.len() > MAX_ORDER {
            return Err(Error::InvalidParams(format!(
                "coupling order must be in 1..={MAX_ORDER}, got {}",
                couplings.len()
            )));
        }
        if omega.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "non-finite frequency or coupling".into(),
            ));
        }
        if *couplings.last().unwrap() == 0.0 {
            return Err(Error::InvalidParams(
                "leading coupling g_K must be nonzero".into(),
            ));
        }
        Ok(Self { omega, couplings })
    }

    /// Single linear coupling `g` with a marker at rest.
    pub fn linear(g: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![g])
    }

    /// `ω = 0`, `g = (1)`: the default for factoring.
    pub fn factoring_default() -> Self {
        Self {
            omega: vec![0.0; 3],
            couplings: vec![1.0],
        }
    }

    pub fn order(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn marker_omega(&self) -> f64 {
        self.omega.last().copied().unwrap_or(0.0)
    }

    /// Coupling that sets the natural time scale `2π/g`: the first nonzero `|g_k|`.
    pub fn time_scale_coupling(&self) -> f64 {
        self.couplings
            .iter()
            .copied()
            .find(|g| *g != 0.0)
            .map(f64::abs)
            .unwrap_or(1.0)
    }
}

/// Angular speed of a marker's coherent state in phase space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RotationFrequency(pub f64);

impl RotationFrequency {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Reduced phase difference between a target and a trial branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDelta {
    /// Angle in (−π, π].
    pub angle: f64,
    /// Exact integer difference `target − trial` of the coupling arguments.
    pub raw_integer: i128,
}

impl PhaseDelta {
    pub const ZERO: Self = Self {
        angle: 0.0,
        raw_integer: 0,
    };

    /// Phase of `k` half turns, taken exactly from the parity of `k`.
    pub fn half_turns(k: i128) -> Self {
        Self {
            angle: if k % 2 == 0 {
                0.0
            } else {
                std::f64::consts::PI
            },
            raw_integer: k,
        }
    }
}

/// Polar coherent amplitude `α = magnitude·e^{i·phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerAmplitude {
    magnitude: f64,
    phase: f64,
}

impl MarkerAmplitude {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude >= 0.0) || !magnitude.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidAmplitude(format!(
                "magnitude {magnitude}, phase {phase}"
            )));
        }
        Ok(Self { magnitude, phase })
    }

    /// Real, non-negative amplitude.
    pub fn real(magnitude: f64) -> Result<Self> {
        Self::new(magnitude, 0.0)
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

fn checked_power(base: i128, k: usize) -> Result<i128> {
    base.checked_pow(k as u32)
        .ok_or_else(|| Error::Overflow(format!("{base}^{k} exceeds 128 bits")))
}

/// `Ω = ω_marker + Σ_k g_k·term^k`.
pub fn rotation_frequency(
    params: &OscillatorParams,
    product_term: i128,
) -> Result<RotationFrequency> {
    let mut omega = params.marker_omega();
    for (k, g) in params.couplings.iter().enumerate() {
        omega += g * checked_power(product_term, k + 1)? as f64;
    }
    Ok(RotationFrequency(omega))
}

/// Precomputed pieces of `Δ(target, ·, t)` for one target and one time.
///
/// The products `g_k·t` are held exactly as double-doubles and the integer
/// differences `target^k − trial^k` are formed in 128-bit arithmetic, so the
/// only rounding happens in the final multiplication and reduction.
#[derive(Debug, Clone)]
pub struct PhaseKernel {
    scaled: Vec<DoubleDouble>,
    target_powers: Vec<i128>,
    target: i128,
}

impl PhaseKernel {
    /// `bound` is the largest |trial| that will be passed to [`Self::delta`];
    /// overflow is ruled out here once so that evaluation cannot fail.
    pub fn new(params: &OscillatorParams, target: i128, t: f64, bound: u128) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("non-finite time {t}")));
        }
        let order = params.order();
        let bound = i128::try_from(bound)
            .map_err(|_| Error::Overflow(format!("trial bound {bound} exceeds 128 bits")))?;
        let mut target_powers = Vec::with_capacity(order);
        for k in 1..=order {
            let tp = checked_power(target, k)?;
            let bp = checked_power(bound, k)?;
            // both signs of the difference must fit
            tp.checked_sub(bp)
                .and_then(|_| tp.checked_add(bp))
                .ok_or_else(|| Error::Overflow(format!("{target}^{k} ± {bound}^{k}")))?;
            target_powers.push(tp);
        }
        let scaled = params
            .couplings
            .iter()
            .map(|&g| DoubleDouble::product(g, t))
            .collect();
        Ok(Self {
            scaled,
            target_powers,
            target,
        })
    }

    pub fn target(&self) -> i128 {
        self.target
    }

    /// Reduced `Δ = Σ_k g_k·t·(target^k − trial^k)` for `|trial| <= bound`.
    #[inline]
    pub fn delta(&self, trial: i128) -> PhaseDelta {
        let raw_integer = self.target - trial;
        let first = self.scaled[0].mul(DoubleDouble::from_i128(raw_integer));
        let angle = if self.scaled.len() == 1 {
            reduce_two_pi(first)
        } else {
            let mut sum = reduce_two_pi(first);
            let mut power = trial;
            for k in 1..self.scaled.len() {
                power *= trial;
                let diff = self.target_powers[k] - power;
                sum += reduce_two_pi(self.scaled[k].mul(DoubleDouble::from_i128(diff)));
            }
            reduce_f64(sum)
        };
        PhaseDelta { angle, raw_integer }
    }
}

/// Reduced phase difference `(Ω_target − Ω_trial)·t`.
///
/// The marker frequency cancels, so the result depends only on the couplings.
pub fn phase_delta(
    params: &OscillatorParams,
    target_term: i128,
    trial_term: i128,
    t: f64,
) -> Result<PhaseDelta> {
    PhaseKernel::new(params, target_term, t, trial_term.unsigned_abs()).map(|k| k.delta(trial_term))
}

/// Overlap `<α e^{-iΩ_target t} | α e^{-iΩ_trial t}> = exp{−|α|²[1 − e^{iΔ}]}`.
pub fn epsilon_overlap(alpha: MarkerAmplitude, delta: PhaseDelta) -> Complex64 {
    let a2 = alpha.magnitude * alpha.magnitude;
    let half = (0.5 * delta.angle).sin();
    let modulus = (-2.0 * a2 * half * half).exp();
    let arg = a2 * delta.angle.sin();
    Complex64::new(modulus * arg.cos(), modulus * arg.sin())
}

/// `|ε|² = exp(−2|α|²(1 − cos Δ))`, written with `1 − cos Δ = 2 sin²(Δ/2)`.
#[inline]
pub fn overlap_weight(magnitude: f64, angle: f64) -> f64 {
    let half = (0.5 * angle).sin();
    (-4.0 * magnitude * magnitude * half * half).exp()
}

/// Free rotation `α → α·e^{−iΩt}`.
pub fn evolve_marker(
    alpha: MarkerAmplitude,
    omega_eff: RotationFrequency,
    t: f64,
) -> MarkerAmplitude {
    let turned =
        DoubleDouble::from_f64(alpha.phase).add(DoubleDouble::product(omega_eff.0, t).neg());
    MarkerAmplitude {
        magnitude: alpha.magnitude,
        phase: reduce_two_pi(turned),
    }
}
