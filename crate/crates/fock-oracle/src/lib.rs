//! Dense truncated-Fock reference simulator.
//!
//! This crate is a deliberately naive ground truth for tiny instances: the
//! joint register/marker state is stored as one dense complex vector, the
//! diagonal Hamiltonian is applied as an explicit phase per basis state and
//! the conditional measurement is an explicit projection onto truncated
//! coherent vectors. It shares no code with the fast path in `hoamp-core`.

use num_complex::Complex64;
use thiserror::Error;

/// Sparse register amplitudes keyed by occupation numbers.
pub type RegisterState = Vec<(Vec<u64>, Complex64)>;

/// Largest joint dimension the oracle will allocate.
pub const MAX_JOINT_DIMENSION: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("cutoff {cutoff} too small for |alpha| = {magnitude} (need at least {required})")]
    CutoffTooSmall {
        cutoff: usize,
        magnitude: f64,
        required: usize,
    },
    #[error("joint dimension {0} exceeds {MAX_JOINT_DIMENSION}")]
    DimensionTooLarge(usize),
    #[error("marker count mismatch: state has {state}, got {given}")]
    MarkerMismatch { state: usize, given: usize },
    #[error("projection probability vanished")]
    Vanished,
}

/// Smallest cutoff satisfying `M >= |alpha|^2 + 10|alpha| + 10`.
pub fn min_cutoff(magnitude: f64) -> usize {
    (magnitude * magnitude + 10.0 * magnitude + 10.0).ceil() as usize
}

/// Coherent state `|alpha>` truncated to Fock levels `0..=cutoff`.
pub fn coherent_vector(alpha: Complex64, cutoff: usize) -> Result<Vec<Complex64>, OracleError> {
    let magnitude = alpha.norm();
    let required = min_cutoff(magnitude);
    if cutoff < required {
        return Err(OracleError::CutoffTooSmall {
            cutoff,
            magnitude,
            required,
        });
    }
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new((-0.5 * magnitude * magnitude).exp(), 0.0);
    out.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    Ok(out)
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `<a|b>` for two dense vectors.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    inner(a, b)
}

/// Dense state over `register basis x marker_1 levels x ... x marker_B levels`.
///
/// The marker index runs fastest; marker `b` has stride `(cutoff+1)^(B-1-b)`.
#[derive(Debug, Clone)]
pub struct DenseJointState {
    register: Vec<Vec<u64>>,
    cutoff: usize,
    markers: usize,
    amplitudes: Vec<Complex64>,
}

impl DenseJointState {
    /// Tensor a register state (basis tuples with amplitudes) with a product of
    /// coherent markers.
    pub fn prepare(
        register: &[(Vec<u64>, Complex64)],
        alphas: &[Complex64],
        cutoff: usize,
    ) -> Result<Self, OracleError> {
        let levels = cutoff + 1;
        let marker_dim = levels
            .checked_pow(alphas.len() as u32)
            .ok_or(OracleError::DimensionTooLarge(usize::MAX))?;
        let dim = register
            .len()
            .checked_mul(marker_dim)
            .ok_or(OracleError::DimensionTooLarge(usize::MAX))?;
        if dim > MAX_JOINT_DIMENSION {
            return Err(OracleError::DimensionTooLarge(dim));
        }
        let coherent: Vec<Vec<Complex64>> = alphas
            .iter()
            .map(|&a| coherent_vector(a, cutoff))
            .collect::<Result<_, _>>()?;

        // marker product vector, built by repeated Kronecker products
        let mut marker = vec![Complex64::new(1.0, 0.0)];
        for v in &coherent {
            let mut next = Vec::with_capacity(marker.len() * levels);
            for a in &marker {
                for b in v {
                    next.push(a * b);
                }
            }
            marker = next;
        }

        let mut amplitudes = Vec::with_capacity(dim);
        for (_, c) in register {
            for m in &marker {
                amplitudes.push(c * m);
            }
        }
        Ok(Self {
            register: register.iter().map(|(t, _)| t.clone()).collect(),
            cutoff,
            markers: alphas.len(),
            amplitudes,
        })
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn marker_levels(&self, mut index: usize) -> Vec<usize> {
        let levels = self.cutoff + 1;
        let mut out = vec![0; self.markers];
        for slot in out.iter_mut().rev() {
            *slot = index % levels;
            index /= levels;
        }
        out
    }

    /// Multiply every basis amplitude by `exp(-i E t)` where `E` is returned by
    /// `energy(register_tuple, marker_levels)`.
    pub fn evolve<F>(&mut self, t: f64, energy: F)
    where
        F: Fn(&[u64], &[usize]) -> f64,
    {
        let marker_dim = self.amplitudes.len() / self.register.len().max(1);
        let level_table: Vec<Vec<usize>> = (0..marker_dim).map(|k| self.marker_levels(k)).collect();
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            let reg = &self.register[i / marker_dim];
            let phase = -energy(reg, &level_table[i % marker_dim]) * t;
            *amp *= Complex64::from_polar(1.0, phase);
        }
    }

    /// Project every marker onto the given coherent amplitude and return the
    /// normalized register state together with the projection probability.
    pub fn project_markers(
        &self,
        targets: &[Complex64],
    ) -> Result<(RegisterState, f64), OracleError> {
        if targets.len() != self.markers {
            return Err(OracleError::MarkerMismatch {
                state: self.markers,
                given: targets.len(),
            });
        }
        let coherent: Vec<Vec<Complex64>> = targets
            .iter()
            .map(|&a| coherent_vector(a, self.cutoff))
            .collect::<Result<_, _>>()?;
        let marker_dim = self.amplitudes.len() / self.register.len().max(1);
        let bra: Vec<Complex64> = (0..marker_dim)
            .map(|k| {
                self.marker_levels(k)
                    .iter()
                    .zip(&coherent)
                    .map(|(&lvl, v)| v[lvl].conj())
                    .product()
            })
            .collect();

        let mut projected: Vec<(Vec<u64>, Complex64)> = self
            .register
            .iter()
            .enumerate()
            .map(|(i, reg)| {
                let block = &self.amplitudes[i * marker_dim..(i + 1) * marker_dim];
                let a: Complex64 = block.iter().zip(&bra).map(|(x, b)| b * x).sum();
                (reg.clone(), a)
            })
            .collect();
        let probability: f64 = projected.iter().map(|(_, a)| a.norm_sqr()).sum();
        if probability.is_nan() || probability <= 0.0 {
            return Err(OracleError::Vanished);
        }
        let scale = probability.sqrt().recip();
        for (_, a) in &mut projected {
            *a *= scale;
        }
        Ok((projected, probability))
    }
}

/// One marker oscillator for [`brute_force_step`].
pub struct MarkerSpec<'a> {
    /// Initial coherent amplitude.
    pub alpha: Complex64,
    /// Bare marker frequency.
    pub omega: f64,
    /// Frequency shift written by the register, `f(m_1..m_A)`.
    pub shift: &'a dyn Fn(&[u64]) -> f64,
    /// Shift value whose rotated coherent state is the projection target.
    pub target_shift: f64,
}

/// Prepare, evolve under the diagonal Hamiltonian for time `t`, and condition
/// every marker on its target coherent state.
///
/// `register_omega[j]` is the free frequency of register oscillator `j`
/// (missing entries are zero).
pub fn brute_force_step(
    register: &[(Vec<u64>, Complex64)],
    register_omega: &[f64],
    markers: &[MarkerSpec<'_>],
    t: f64,
    cutoff: usize,
) -> Result<(RegisterState, f64), OracleError> {
    let alphas: Vec<Complex64> = markers.iter().map(|m| m.alpha).collect();
    let mut state = DenseJointState::prepare(register, &alphas, cutoff)?;
    state.evolve(t, |reg, levels| {
        let free: f64 = reg
            .iter()
            .enumerate()
            .map(|(j, &m)| register_omega.get(j).copied().unwrap_or(0.0) * m as f64)
            .sum();
        let marker: f64 = markers
            .iter()
            .zip(levels)
            .map(|(spec, &k)| (spec.omega + (spec.shift)(reg)) * k as f64)
            .sum();
        free + marker
    });
    let targets: Vec<Complex64> = markers
        .iter()
        .map(|m| m.alpha * Complex64::from_polar(1.0, -(m.omega + m.target_shift) * t))
        .collect();
    state.project_markers(&targets)
}
