//! Experiments built on the simulator: path entanglement and its logarithmic
//! negativity, HOM interference, and heralded coherence fringes.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{beam_splitter_unitary, phase_shift_unitary, BranchEnsemble};
use crate::error::{check_closed, Error, Result};
use crate::fock::PureState;
use crate::scissor::{gain_to_transmittance, HeraldPattern, ScissorAmplifier};

/// Two photons shared between two paths, `c0|2,0> + c1|1,1> + c2|0,2>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritPathState {
    coefficients: [Complex64; 3],
}

impl QutritPathState {
    /// Normalizes `coefficients`; fails on the zero vector.
    pub fn new(coefficients: [Complex64; 3]) -> Result<Self> {
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate("path state has zero norm".into()));
        }
        Ok(QutritPathState {
            coefficients: coefficients.map(|c| c / norm),
        })
    }

    pub fn coefficients(&self) -> [Complex64; 3] {
        self.coefficients
    }

    /// Schmidt coefficients in the photon-number basis, i.e. `|c_i|`.
    pub fn schmidt_coefficients(&self) -> [f64; 3] {
        self.coefficients.map(|c| c.norm())
    }

    /// As a two-mode state of cutoff 2.
    pub fn to_pure_state(&self) -> PureState {
        let occs = [[2, 0], [1, 1], [0, 2]];
        PureState::from_amplitudes(2, 2, occs.into_iter().map(Into::into).zip(self.coefficients))
            .expect("two modes, two photons")
            .pruned()
    }
}

fn real3(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    [a, b, c].map(|x| Complex64::new(x, 0.0))
}

/// `|2>` split on a beam splitter of reflectivity `sigma`.
pub fn path_entangled_state(sigma: f64) -> Result<QutritPathState> {
    check_closed("sigma", sigma, 0.0, 1.0, "[0, 1]")?;
    QutritPathState::new(real3(1.0 - sigma, SQRT_2 * (sigma * (1.0 - sigma)).sqrt(), sigma))
}

/// The split state after amplifying the second path with gain `g`.
pub fn amplified_path_state(sigma: f64, g: f64) -> Result<QutritPathState> {
    check_closed("sigma", sigma, 0.0, 1.0, "[0, 1]")?;
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::domain("g", g, "[0, inf)"));
    }
    QutritPathState::new(real3(
        1.0 - sigma,
        g * SQRT_2 * (sigma * (1.0 - sigma)).sqrt(),
        g * g * sigma,
    ))
}

/// Gain that makes the amplified state balanced, `sqrt((1-sigma)/sigma)`.
pub fn balanced_gain(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain("sigma", sigma, "(0, 1)"));
    }
    Ok(((1.0 - sigma) / sigma).sqrt())
}

/// `log2 || rho^{T_B} ||_1` of a pure two-mode state.
///
/// Builds the density matrix on `(cutoff+1)^2` levels, transposes the second
/// mode and sums the absolute eigenvalues.
pub fn log_negativity_two_mode(state: &PureState) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: state.modes(),
        });
    }
    let norm = state.norm_sqr();
    if norm == 0.0 {
        return Err(Error::Degenerate("zero state".into()));
    }
    let d = state.cutoff() as usize + 1;
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for (occ, amp) in state.iter() {
        psi[occ.get(0) as usize * d + occ.get(1) as usize] = amp / norm.sqrt();
    }
    // rho^{T_B}[(a,b),(a',b')] = rho[(a,b'),(a',b)]
    let pt = DMatrix::from_fn(d * d, d * d, |row, col| {
        let (a, b) = (row / d, row % d);
        let (ap, bp) = (col / d, col % d);
        psi[a * d + bp] * psi[ap * d + b].conj()
    });
    let trace_norm: f64 = pt.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok(trace_norm.log2())
}

pub fn log_negativity(state: &QutritPathState) -> f64 {
    log_negativity_two_mode(&state.to_pure_state()).expect("normalized two-mode state")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityPoint {
    pub g: f64,
    pub pre: f64,
    pub post: f64,
}

/// Negativity of the split state before and after amplification over a gain grid.
pub fn negativity_curve(sigma: f64, gains: &[f64]) -> Result<Vec<NegativityPoint>> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain("sigma", sigma, "(0, 1)"));
    }
    let pre = log_negativity(&path_entangled_state(sigma)?);
    gains
        .iter()
        .map(|&g| {
            Ok(NegativityPoint {
                g,
                pre,
                post: log_negativity(&amplified_path_state(sigma, g)?),
            })
        })
        .collect()
}

/// Two-fold coincidence probability after a waveplate at `theta` ahead of a
/// polarizing splitter: `|sin^2 2theta - cos^2 2theta|^2`.
pub fn hom_coincidence(theta: f64) -> f64 {
    let (s, c) = (2.0 * theta).sin_cos();
    (s * s - c * c).powi(2)
}

/// The same quantity from the circuit: `|1,1>` through a splitter of
/// transmittance `cos^2 2theta`, projected back onto `|1,1>`.
pub fn hom_circuit_coincidence(theta: f64) -> Result<f64> {
    let eta = (2.0 * theta).cos().powi(2);
    let ensemble = BranchEnsemble::from_pure(PureState::fock([1, 1], 2)?)
        .apply_unitary(&beam_splitter_unitary(eta, 0.0)?, &[0, 1])?;
    Ok(ensemble.project(&[0, 1], &[1, 1])?.probability())
}

/// Heralded four-fold coincidence rate as a function of the reference phase.
#[derive(Clone, Debug, PartialEq)]
pub struct FringeScan {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
    pub pattern: HeraldPattern,
    /// Fringe periods per `2 pi` of phase, read off the simulated model.
    pub wavenumber: u32,
}

const WAVENUMBER_PROBES: usize = 16;

/// Largest non-constant Fourier harmonic of a `2 pi`-periodic function.
fn dominant_wavenumber(f: impl Fn(f64) -> f64, fallback: u32) -> u32 {
    let samples: Vec<f64> = (0..WAVENUMBER_PROBES)
        .map(|j| f(TAU * j as f64 / WAVENUMBER_PROBES as f64))
        .collect();
    let mean = samples.iter().sum::<f64>() / WAVENUMBER_PROBES as f64;
    let mut best = (fallback, 0.0);
    for k in 1..WAVENUMBER_PROBES / 2 {
        let c: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, v)| Complex64::from_polar(*v, -TAU * (k * j) as f64 / WAVENUMBER_PROBES as f64))
            .sum();
        let mag = c.norm() / WAVENUMBER_PROBES as f64;
        if mag > best.1 && mag > 1e-12 * mean.abs().max(f64::MIN_POSITIVE) {
            best = (k as u32, mag);
        }
    }
    best.0
}

/// Simulates the coherence measurement: `|2>` is split by `sigma`, the
/// transmitted path is amplified with gain `g` and heralded on `pattern`, then
/// it is phase shifted by `phi` and recombined with the reference on a
/// balanced splitter whose outputs must both fire.
pub fn fringe_scan(sigma: f64, g: f64, pattern: &HeraldPattern, phases: &[f64]) -> Result<FringeScan> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain("sigma", sigma, "(0, 1)"));
    }
    let eta = gain_to_transmittance(g)?;
    if phases.is_empty() || phases.iter().any(|p| !p.is_finite()) || phases.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("phase grid must be finite and strictly increasing".into()));
    }

    let split = BranchEnsemble::from_pure(PureState::fock([2, 0], 2)?)
        .apply_unitary(&beam_splitter_unitary(1.0 - sigma, 0.0)?, &[0, 1])?;
    let heralded = ScissorAmplifier::two_photon().herald_branches(split, 1, eta, pattern)?;
    let recombine = beam_splitter_unitary(0.5, 0.0)?;

    let rate = |phi: f64| -> Result<f64> {
        let e = heralded
            .clone()
            .apply_unitary(&phase_shift_unitary(phi), &[1])?
            .apply_unitary(&recombine, &[0, 1])?;
        Ok(e.project(&[0, 1], &[1, 1])?.probability())
    };

    let values = phases.par_iter().map(|&phi| rate(phi)).collect::<Result<Vec<_>>>()?;
    let wavenumber = dominant_wavenumber(|phi| rate(phi).unwrap_or(0.0), pattern.total());
    Ok(FringeScan {
        phases: phases.to_vec(),
        values,
        pattern: pattern.clone(),
        wavenumber,
    })
}

/// Least-squares fit `amplitude * cos(k phi - offset) + mean`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    /// `amplitude / mean`, clipped to `[0, 1]`.
    pub visibility: f64,
    /// In `(-pi, pi]`.
    pub offset: f64,
    pub amplitude: f64,
    pub mean: f64,
    /// Set when the data carry no fringe; visibility is then 0.
    pub degenerate: bool,
}

pub fn fit_visibility(scan: &FringeScan) -> Result<FringeFit> {
    fit_fringe(&scan.phases, &scan.values, scan.wavenumber)
}

pub fn fit_fringe(phases: &[f64], values: &[f64], wavenumber: u32) -> Result<FringeFit> {
    if phases.len() != values.len() {
        return Err(Error::Dimension {
            expected: phases.len(),
            found: values.len(),
        });
    }
    if phases.len() < 4 {
        return Err(Error::Usage(format!("fringe fit needs at least 4 points, got {}", phases.len())));
    }
    if wavenumber == 0 {
        return Err(Error::Usage("fringe wavenumber must be positive".into()));
    }
    let k = wavenumber as f64;
    let period = TAU / k;
    // Coverage of the sample cells, so an evenly spaced grid on [0, period) counts.
    let n = phases.len();
    let span = (phases[n - 1] - phases[0]) * n as f64 / (n - 1) as f64;
    if span < period * (1.0 - 1e-12) {
        return Err(Error::Usage(format!("phase span {span} is shorter than one period {period}")));
    }

    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => (k * phases[i]).cos(),
        1 => (k * phases[i]).sin(),
        _ => 1.0,
    });
    let y = DVector::from_column_slice(values);
    let coef = design
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let (alpha, beta, mean) = (coef[0], coef[1], coef[2]);
    let amplitude = alpha.hypot(beta);

    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mean <= 0.0 || amplitude <= 1e-12 * scale {
        return Ok(FringeFit {
            visibility: 0.0,
            offset: 0.0,
            amplitude,
            mean,
            degenerate: true,
        });
    }
    Ok(FringeFit {
        visibility: (amplitude / mean).clamp(0.0, 1.0),
        offset: beta.atan2(alpha),
        amplitude,
        mean,
        degenerate: false,
    })
}

/// `n` points evenly covering `[0, 2 pi)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
