//! Linear-response optical absorption from the steady-state dipole autocorrelation.
//!
//! Frequencies are in the rotating frame of the pump, so `ω = 0` is resonant.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::DensityOperator;
use crate::operators::{embed, solve_shifted, CMatrix, PauliKind, PauliSite};
use crate::pipeline::Reservoir;
use crate::reservoir::QubitNetworkSpec;
use crate::scalar::Real;
use crate::superop::{HermitianBasis, StepPropagator};

/// Largest allowed mismatch between the analytic and the late-time correlation tail.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// `Σ_x = Σ_i σ_x^(i)`.
pub fn dipole_operator<T: Real>(n_qubits: usize) -> CMatrix<T> {
    let dim = 1 << n_qubits;
    (0..n_qubits).fold(CMatrix::zeros(dim, dim), |acc, i| {
        acc + embed(PauliSite::new(PauliKind::X, i), n_qubits).expect("site in range")
    })
}

/// `g(t) = Tr[Σ_x e^{Lt} Σ_x ρ_ss] / Tr[Σ_x² ρ_ss]` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace<T> {
    pub times: Vec<T>,
    pub values: Vec<Complex<T>>,
    /// `lim_{t→∞} g(t) = Tr[Σ_x ρ_ss]² / Tr[Σ_x² ρ_ss]`.
    pub tail: Complex<T>,
    pub signal: T,
    pub gamma: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSpectrum<T> {
    pub omega: Vec<T>,
    pub alpha: Vec<T>,
    pub signal: T,
    pub gamma: T,
}

/// `t_max = 40/γ`, `dt = min(0.01/γ, 0.05)`.
pub fn default_time_grid<T: Real>(gamma: T) -> (T, T) {
    (T::lit(40.0) / gamma, (T::lit(0.01) / gamma).min(T::lit(0.05)))
}

/// 801 points uniform on `±10·max(γ, J₀)`.
pub fn default_omega_grid<T: Real>(gamma: T, coupling_strength: T) -> Vec<T> {
    let half = T::lit(10.0) * gamma.max(coupling_strength);
    let n = 801;
    (0..n)
        .map(|k| -half + T::lit(2.0) * half * T::from_count(k) / T::from_count(n - 1))
        .collect()
}

/// Shared inputs of the spectral routines at one drive amplitude.
struct DipoleSetup<T: Real> {
    basis: HermitianBasis,
    generator: DMatrix<T>,
    rho: DensityOperator<T>,
    dipole: CMatrix<T>,
    /// `Tr[Σ_x ρ_ss]`
    mean: T,
    /// `Tr[Σ_x² ρ_ss]`
    norm: T,
}

impl<T: Real> DipoleSetup<T> {
    fn new(spec: &QubitNetworkSpec<T>, s: T) -> Result<Self> {
        if !(spec.gamma > T::zero()) {
            return Err(Error::InvalidParameter("absorption needs gamma > 0".into()));
        }
        let reservoir = Reservoir::new(spec)?;
        let rho = reservoir.steady_state(s)?;
        let dipole = dipole_operator::<T>(spec.n_qubits);
        let mean = (&dipole * rho.matrix()).trace().re;
        let norm = (&dipole * &dipole * rho.matrix()).trace().re;
        if !(norm > T::zero()) {
            return Err(Error::InvalidParameter("dipole variance vanishes in the steady state".into()));
        }
        Ok(Self { basis: reservoir.basis(), generator: reservoir.generator(s), rho, dipole, mean, norm })
    }

    /// Real and imaginary coordinate vectors of `Σ_x ρ_ss − ρ_ss Tr[Σ_x ρ_ss]`.
    fn source(&self, deflate: bool) -> (DVector<T>, DVector<T>) {
        let mut m = &self.dipole * self.rho.matrix();
        if deflate {
            m -= self.rho.matrix() * Complex::new(self.mean, T::zero());
        }
        let re = self.basis.coords(&m);
        let im = self.basis.coords(&(m * Complex::new(T::zero(), -T::one())));
        (re, im)
    }

    /// `G − r tᵀ`: the generator with the stationary direction shifted out of the kernel.
    fn deflated(&self) -> DMatrix<T> {
        let r = self.basis.coords(self.rho.matrix());
        let t = self.basis.functional(&CMatrix::<T>::identity(self.basis.hilbert_dim(), self.basis.hilbert_dim()));
        &self.generator - r * t.transpose()
    }
}

/// Steady-state dipole autocorrelation, stepped with `e^{L·dt}` up to `t_max`.
///
/// Fails with [`Error::TailMismatch`] if the last sample is further than
/// [`TAIL_TOLERANCE`] from the analytic tail.
pub fn correlation_trace<T: Real>(spec: &QubitNetworkSpec<T>, s: T, t_max: T, dt: T) -> Result<CorrelationTrace<T>> {
    if !(t_max > T::zero() && dt > T::zero()) {
        return Err(Error::InvalidParameter("t_max and dt must be positive".into()));
    }
    let setup = DipoleSetup::new(spec, s)?;
    let steps = (t_max / dt).round().to_usize().unwrap_or(0).max(1);
    let step = StepPropagator::new(setup.generator.clone(), dt, 2 * steps);
    let f = setup.basis.functional(&setup.dipole);
    let (mut re, mut im) = setup.source(false);
    // Same arithmetic as the t = 0 numerator, so Re g(0) = 1 exactly.
    let norm = f.dot(&re);
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        if k > 0 {
            re = step.apply(&re);
            im = step.apply(&im);
        }
        times.push(dt * T::from_count(k));
        values.push(Complex::new(f.dot(&re) / norm, f.dot(&im) / norm));
    }
    let tail = Complex::new(setup.mean * setup.mean / norm, T::zero());
    let last = values[steps];
    if (last - tail).modulus() > T::lit(TAIL_TOLERANCE) {
        return Err(Error::TailMismatch { analytic: tail.re.as_f64(), numerical: last.re.as_f64() });
    }
    Ok(CorrelationTrace { times, values, tail, signal: s, gamma: spec.gamma })
}

/// [`correlation_trace`] that doubles `t_max` on a tail mismatch, at most `max_doublings` times.
pub fn correlation_trace_converged<T: Real>(
    spec: &QubitNetworkSpec<T>,
    s: T,
    t_max: T,
    dt: T,
    max_doublings: usize,
) -> Result<CorrelationTrace<T>> {
    let mut t = t_max;
    for attempt in 0..=max_doublings {
        match correlation_trace(spec, s, t, dt) {
            Err(Error::TailMismatch { .. }) if attempt < max_doublings => t = t * T::lit(2.0),
            other => return other,
        }
    }
    unreachable!("loop returns on the last attempt")
}

/// `α(ω) = Re ∫₀^{t_max} e^{−iωt} (g(t) − g_∞) dt` by the trapezoidal rule.
pub fn spectrum_time_domain<T: Real>(trace: &CorrelationTrace<T>, omega_grid: &[T]) -> AbsorptionSpectrum<T> {
    let n = trace.times.len();
    let alpha = omega_grid
        .iter()
        .map(|&w| {
            if n < 2 {
                return T::zero();
            }
            let mut acc = T::zero();
            for k in 0..n {
                let t = trace.times[k];
                let d = trace.values[k] - trace.tail;
                let phase = Complex::new((w * t).cos(), -(w * t).sin());
                let mut term = (phase * d).re;
                if k == 0 || k == n - 1 {
                    term /= T::lit(2.0);
                }
                let h = if k + 1 < n { trace.times[k + 1] - t } else { t - trace.times[k - 1] };
                acc += term * h;
            }
            acc
        })
        .collect();
    AbsorptionSpectrum { omega: omega_grid.to_vec(), alpha, signal: trace.signal, gamma: trace.gamma }
}

/// `α(ω) = Re Tr[Σ_x (iω − L)⁻¹ (Σ_x ρ_ss − ρ_ss Tr[Σ_x ρ_ss])] / Tr[Σ_x² ρ_ss]`, one
/// linear solve per frequency.
pub fn spectrum_resolvent<T: Real>(spec: &QubitNetworkSpec<T>, s: T, omega_grid: &[T]) -> Result<AbsorptionSpectrum<T>> {
    let setup = DipoleSetup::new(spec, s)?;
    let deflated = setup.deflated().map(|x| Complex::new(x, T::zero()));
    let (re, im) = setup.source(true);
    let rhs = DVector::from_iterator(re.len(), re.iter().zip(im.iter()).map(|(&a, &b)| Complex::new(a, b)));
    let f = setup.basis.functional(&setup.dipole);
    let alpha = omega_grid
        .par_iter()
        .map(|&w| {
            let x = solve_shifted(&deflated, Complex::new(T::zero(), w), &rhs)?;
            let value = f.iter().zip(x.iter()).fold(T::zero(), |acc, (&fi, xi)| acc + fi * xi.re);
            Ok(value / setup.norm)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(AbsorptionSpectrum { omega: omega_grid.to_vec(), alpha, signal: s, gamma: spec.gamma })
}

/// Absorption at the pump frequency, `α_{s,γ}(0)`.
pub fn resonant_absorption<T: Real>(spec: &QubitNetworkSpec<T>, s: T) -> Result<T> {
    let setup = DipoleSetup::new(spec, s)?;
    // At ω = 0 the system is real and only the Hermitian part of the source contributes.
    let (re, _) = setup.source(true);
    let x = solve_shifted(&setup.deflated(), T::zero(), &re)?;
    Ok(setup.basis.functional(&setup.dipole).dot(&x) / setup.norm)
}

/// `α_{s,γ}(0)` for every `s` in the grid.
pub fn resonant_absorptions<T: Real>(spec: &QubitNetworkSpec<T>, s_grid: &[T]) -> Result<Vec<T>> {
    s_grid.iter().map(|&s| resonant_absorption(spec, s)).collect()
}

/// Mean of `α_{s,γ}(0)` over `s_grid`.
pub fn average_absorption<T: Real>(spec: &QubitNetworkSpec<T>, s_grid: &[T]) -> Result<T> {
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("signal grid is empty".into()));
    }
    let values = resonant_absorptions(spec, s_grid)?;
    Ok(values.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(values.len()))
}

/// `{0.1, 0.2, …, 1.0}`.
pub fn default_signal_grid<T: Real>() -> Vec<T> {
    (1..=10).map(|k| T::from_count(k) / T::lit(10.0)).collect()
}
