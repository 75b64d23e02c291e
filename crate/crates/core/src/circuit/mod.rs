//! Passive linear optics acting on Fock states.
//!
//! A [`ModeUnitary`] `U` transforms creation operators as
//! `a_j^dag -> sum_k U[k][j] a_k^dag`; column `j` is the output distribution of
//! a photon entering mode `j`. Multi-photon amplitudes follow from matrix
//! permanents (see [`fock_amplitude`]).
//!
//! Beam-splitter convention, used everywhere in the crate:
//!
//! ```text
//! U = [[ sqrt(eta),                 sqrt(1-eta) e^{i phi} ],
//!      [ sqrt(1-eta) e^{-i phi},    -sqrt(eta)            ]]
//! ```
//!
//! so a photon entering port 0 stays in port 0 with amplitude `sqrt(eta)`.

mod channel;
mod ensemble;
mod evolution;
mod permanent;

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_closed, Error, Result};

pub use channel::{apply_loss, loss_branches, spdc_two_mode_squeezed};
pub use ensemble::BranchEnsemble;
pub use evolution::{apply_mode_unitary, apply_unitary_on_modes, fock_amplitude, transition_table};
pub use permanent::permanent;

/// Elementwise tolerance of the unitarity check on construction.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// An `m x m` unitary on mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
}

impl ModeUnitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let residual = unitarity_residual(&matrix);
        if !(residual <= UNITARITY_TOLERANCE) {
            return Err(Error::NotUnitary { residual });
        }
        Ok(ModeUnitary { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        ModeUnitary {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        ModeUnitary {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `next * self`: apply `self` first.
    pub fn then(&self, next: &ModeUnitary) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: next.dim(),
            });
        }
        Ok(ModeUnitary {
            matrix: &next.matrix * &self.matrix,
        })
    }

    /// Embeds this unitary into `modes` modes, acting on `targets` (in the
    /// order of this matrix's rows) and as the identity elsewhere.
    pub fn embed(&self, modes: usize, targets: &[usize]) -> Result<Self> {
        if targets.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: targets.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= modes {
                return Err(Error::Dimension { expected: modes, found: t });
            }
            if targets[..i].contains(&t) {
                return Err(Error::Usage(format!("mode {t} listed twice")));
            }
        }
        let mut m = DMatrix::identity(modes, modes);
        for (i, &ti) in targets.iter().enumerate() {
            for (j, &tj) in targets.iter().enumerate() {
                m[(ti, tj)] = self.matrix[(i, j)];
            }
        }
        Ok(ModeUnitary { matrix: m })
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }
}

fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let prod = m * m.adjoint();
    let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Beam splitter with intensity transmittance `eta` and coupling phase `phase`.
pub fn beam_splitter_unitary(eta: f64, phase: f64) -> Result<ModeUnitary> {
    check_closed("transmittance", eta, 0.0, 1.0, "[0, 1]")?;
    let t = Complex64::new(eta.sqrt(), 0.0);
    let r = (1.0 - eta).sqrt();
    let e = Complex64::from_polar(1.0, phase);
    let m = DMatrix::from_row_slice(2, 2, &[t, e * r, e.conj() * r, -t]);
    Ok(ModeUnitary { matrix: m })
}

pub fn phase_shift_unitary(angle: f64) -> ModeUnitary {
    ModeUnitary {
        matrix: DMatrix::from_element(1, 1, Complex64::from_polar(1.0, angle)),
    }
}

/// Discrete Fourier transform on `m` modes, `U[j][k] = w^{jk} / sqrt(m)` with
/// `w = exp(2 pi i / m)`.
pub fn qft_unitary(m: usize) -> Result<ModeUnitary> {
    if m == 0 {
        return Err(Error::Usage("QFT needs at least one mode".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let matrix = DMatrix::from_fn(m, m, |j, k| {
        // Reduce the exponent first so large products stay exact.
        let e = (j * k) % m;
        Complex64::from_polar(scale, TAU * e as f64 / m as f64)
    });
    Ok(ModeUnitary { matrix })
}

/// One element of a linear-optical network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircuitElement {
    BeamSplitter {
        modes: (usize, usize),
        transmittance: f64,
        phase: f64,
    },
    PhaseShift {
        mode: usize,
        angle: f64,
    },
    /// Intensity transmission `transmission` into the environment.
    Loss {
        mode: usize,
        transmission: f64,
    },
}

impl CircuitElement {
    pub fn beam_splitter(a: usize, b: usize, transmittance: f64, phase: f64) -> Result<Self> {
        check_closed("transmittance", transmittance, 0.0, 1.0, "[0, 1]")?;
        if a == b {
            return Err(Error::Usage(format!("beam splitter needs two distinct modes, got {a} twice")));
        }
        Ok(CircuitElement::BeamSplitter {
            modes: (a, b),
            transmittance,
            phase: phase.rem_euclid(TAU),
        })
    }

    pub fn phase_shift(mode: usize, angle: f64) -> Self {
        CircuitElement::PhaseShift {
            mode,
            angle: angle.rem_euclid(TAU),
        }
    }

    pub fn loss(mode: usize, transmission: f64) -> Result<Self> {
        check_closed("transmission", transmission, 0.0, 1.0, "[0, 1]")?;
        Ok(CircuitElement::Loss { mode, transmission })
    }

    fn max_mode(&self) -> usize {
        match *self {
            CircuitElement::BeamSplitter { modes: (a, b), .. } => a.max(b),
            CircuitElement::PhaseShift { mode, .. } | CircuitElement::Loss { mode, .. } => mode,
        }
    }

    /// Local unitary and the modes it acts on. `None` for loss.
    pub fn local_unitary(&self) -> Option<(ModeUnitary, Vec<usize>)> {
        match *self {
            CircuitElement::BeamSplitter {
                modes: (a, b),
                transmittance,
                phase,
            } => Some((
                beam_splitter_unitary(transmittance, phase).expect("validated on construction"),
                vec![a, b],
            )),
            CircuitElement::PhaseShift { mode, angle } => Some((phase_shift_unitary(angle), vec![mode])),
            CircuitElement::Loss { .. } => None,
        }
    }
}

/// Multiplies the embedded element unitaries in application order.
pub fn compile_circuit(elements: &[CircuitElement], modes: usize) -> Result<ModeUnitary> {
    let mut total = ModeUnitary::identity(modes);
    for el in elements {
        if el.max_mode() >= modes {
            return Err(Error::Dimension {
                expected: modes,
                found: el.max_mode(),
            });
        }
        let (u, targets) = el
            .local_unitary()
            .ok_or_else(|| Error::Usage("loss elements cannot be compiled into a unitary".into()))?;
        total = total.then(&u.embed(modes, &targets)?)?;
    }
    Ok(total)
}

/// Three-mode tritter built from two balanced splitters, a 1/3 splitter and a
/// 3 pi / 2 phase. Equals [`qft_unitary`]`(3)` up to diagonal phases on the
/// input and output ports.
pub fn default_tritter() -> Vec<CircuitElement> {
    vec![
        CircuitElement::beam_splitter(0, 1, 0.5, 0.0).unwrap(),
        CircuitElement::beam_splitter(1, 2, 1.0 / 3.0, 0.0).unwrap(),
        CircuitElement::phase_shift(0, 1.5 * PI),
        CircuitElement::beam_splitter(0, 1, 0.5, 0.0).unwrap(),
    ]
}

/// Residual of the best match `u = D1 * target * D2` over diagonal unitaries.
///
/// Returns `None` when the entry magnitudes already disagree by more than
/// `1e-9`, in which case no diagonal rephasing can help.
pub fn phase_equivalence_residual(u: &ModeUnitary, target: &ModeUnitary) -> Option<f64> {
    let n = u.dim();
    if target.dim() != n {
        return None;
    }
    for i in 0..n {
        for j in 0..n {
            if (u.entry(i, j).norm() - target.entry(i, j).norm()).abs() > 1e-9 {
                return None;
            }
        }
    }
    // Fix D2[0] = 1, read D1 from column 0 and D2 from row 0.
    let pivot_ok = (0..n).all(|i| target.entry(i, 0).norm() > 1e-12) && (0..n).all(|j| target.entry(0, j).norm() > 1e-12);
    if !pivot_ok {
        return None;
    }
    let d1: Vec<Complex64> = (0..n).map(|i| u.entry(i, 0) / target.entry(i, 0)).collect();
    let d2: Vec<Complex64> = (0..n).map(|j| u.entry(0, j) / (d1[0] * target.entry(0, j))).collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = d1[i] * target.entry(i, j) * d2[j] - u.entry(i, j);
            worst = worst.max(r.norm());
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn full_transmission_splitter() {
        let u = beam_splitter_unitary(1.0, 0.0).unwrap();
        assert_eq!(u.entry(0, 0).norm_sqr(), 1.0);
        assert_eq!(u.entry(1, 1), Complex64::new(-1.0, 0.0));
        assert_eq!(u.entry(0, 1).norm(), 0.0);
    }

    #[test]
    fn balanced_splitter_magnitudes() {
        let u = beam_splitter_unitary(0.5, 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((u.entry(i, j).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn splitter_rejects_out_of_range() {
        assert!(matches!(beam_splitter_unitary(1.2, 0.0), Err(Error::Domain { .. })));
        assert!(beam_splitter_unitary(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn random_splitters_are_unitary() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let eta: f64 = rng.random();
            let phi: f64 = rng.random_range(-10.0..10.0);
            let u = beam_splitter_unitary(eta, phi).unwrap();
            assert!(u.unitarity_residual() < 1e-12);
        }
    }

    #[test]
    fn qft_small_cases() {
        let q1 = qft_unitary(1).unwrap();
        assert_eq!(q1.entry(0, 0), Complex64::new(1.0, 0.0));
        let q2 = qft_unitary(2).unwrap();
        assert!((q2.entry(1, 1) - Complex64::new(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let q3 = qft_unitary(3).unwrap();
        let s = 1.0 / 3f64.sqrt();
        for k in 0..3 {
            assert!((q3.entry(0, k) - Complex64::new(s, 0.0)).norm() < 1e-15);
            assert!((q3.entry(k, 0) - Complex64::new(s, 0.0)).norm() < 1e-15);
        }
        let w = Complex64::from_polar(s, TAU / 3.0);
        assert!((q3.entry(1, 1) - w).norm() < 1e-15);
        assert!(q3.unitarity_residual() < 1e-14);
        assert!(qft_unitary(0).is_err());
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(ModeUnitary::new(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn empty_circuit_is_identity() {
        assert_eq!(compile_circuit(&[], 3).unwrap(), ModeUnitary::identity(3));
    }

    #[test]
    fn single_splitter_embeds_block() {
        let bs = CircuitElement::beam_splitter(0, 1, 0.5, 0.0).unwrap();
        let u = compile_circuit(&[bs], 3).unwrap();
        let b = beam_splitter_unitary(0.5, 0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(u.entry(i, j), b.entry(i, j));
            }
        }
        assert_eq!(u.entry(2, 2), Complex64::new(1.0, 0.0));
        assert_eq!(u.entry(0, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn loss_cannot_compile() {
        let l = CircuitElement::loss(0, 0.5).unwrap();
        assert!(matches!(compile_circuit(&[l], 2), Err(Error::Usage(_))));
    }

    #[test]
    fn element_mode_out_of_range() {
        let bs = CircuitElement::beam_splitter(0, 3, 0.5, 0.0).unwrap();
        assert!(compile_circuit(&[bs], 3).is_err());
    }

    #[test]
    fn angles_reduced() {
        match CircuitElement::phase_shift(0, -PI / 2.0) {
            CircuitElement::PhaseShift { angle, .. } => assert!((angle - 1.5 * PI).abs() < 1e-15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn tritter_matches_qft_up_to_phases() {
        let t = compile_circuit(&default_tritter(), 3).unwrap();
        let q = qft_unitary(3).unwrap();
        let r = phase_equivalence_residual(&t, &q).expect("magnitudes agree");
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn tritter_without_phase_is_not_qft() {
        let mut els = default_tritter();
        els.remove(2);
        let t = compile_circuit(&els, 3).unwrap();
        let q = qft_unitary(3).unwrap();
        assert!(phase_equivalence_residual(&t, &q).map_or(true, |r| r > 1e-3));
    }
}
