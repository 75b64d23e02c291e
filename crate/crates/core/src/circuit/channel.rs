use num_complex::Complex64;

use crate::error::{check_closed, Error, Result};
use crate::fock::{binomial, MixedState, OccupationVector, PureState};

/// Kraus branches of the pure-loss channel on `mode`.
///
/// `transmission` is the intensity transmission: each photon survives with
/// probability `transmission`. Branch `k` is `K_k |psi>` with
/// `K_k |n> = sqrt(C(n,k) t^(n-k) (1-t)^k) |n-k>`, i.e. `k` photons lost.
/// Branches are unnormalized and zero branches are omitted; their squared
/// norms sum to the squared norm of the input.
pub fn loss_branches(state: &PureState, mode: usize, transmission: f64) -> Result<Vec<PureState>> {
    check_closed("transmission", transmission, 0.0, 1.0, "[0, 1]")?;
    if mode >= state.modes() {
        return Err(Error::Dimension {
            expected: state.modes(),
            found: mode,
        });
    }
    if transmission == 1.0 {
        return Ok(vec![state.clone()]);
    }
    let max_n = state.iter().map(|(o, _)| o.get(mode)).max().unwrap_or(0);
    let mut branches = Vec::with_capacity(max_n as usize + 1);
    for k in 0..=max_n {
        let mut branch = PureState::zero(state.modes(), state.cutoff()).with_prune_threshold(state.prune_threshold());
        for (occ, &amp) in state.iter() {
            let n = occ.get(mode);
            if n < k {
                continue;
            }
            let w = binomial(n, k) * transmission.powi((n - k) as i32) * (1.0 - transmission).powi(k as i32);
            if w == 0.0 {
                continue;
            }
            branch.accumulate(occ.with_count(mode, n - k), amp * w.sqrt());
        }
        if !branch.is_empty() {
            branches.push(branch);
        }
    }
    Ok(branches)
}

/// Single-mode pure-loss channel on a mixture.
pub fn apply_loss(state: &MixedState, mode: usize, transmission: f64) -> Result<MixedState> {
    let mut out = Vec::new();
    for (w, psi) in state.components() {
        for branch in loss_branches(psi, mode, transmission)? {
            let p = branch.norm_sqr();
            if p > 0.0 {
                out.push((w * p, branch));
            }
        }
    }
    MixedState::from_ensemble(out)
}

/// Two-mode squeezed vacuum `sum_{n <= pairs} chi^n |n, n>`, normalized.
pub fn spdc_two_mode_squeezed(chi: f64, pairs: u32) -> Result<PureState> {
    if !(chi.abs() < 1.0) {
        return Err(Error::domain("chi", chi, "(-1, 1)"));
    }
    let amps = (0..=pairs).map(|n| (OccupationVector::from([n, n]), Complex64::new(chi.powi(n as i32), 0.0)));
    PureState::from_amplitudes(2, 2 * pairs, amps)?.pruned().normalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fock1(n: u32) -> MixedState {
        MixedState::pure(PureState::fock([n], 4).unwrap()).unwrap()
    }

    #[test]
    fn unit_transmission_is_identity() {
        let s = fock1(2);
        let out = apply_loss(&s, 0, 1.0).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn single_photon_coin_flip() {
        let out = apply_loss(&fock1(1), 0, 0.5).unwrap();
        let pops = out.populations();
        assert!((pops[&[0].into()] - 0.5).abs() < 1e-15);
        assert!((pops[&[1].into()] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_photon_binomial_weights() {
        for &t in &[0.05, 0.1, 0.3, 0.9] {
            let out = apply_loss(&fock1(2), 0, t).unwrap();
            let pops = out.populations();
            assert!((pops[&[0].into()] - (1.0 - t) * (1.0 - t)).abs() < 1e-15);
            assert!((pops[&[1].into()] - 2.0 * t * (1.0 - t)).abs() < 1e-15);
            assert!((pops[&[2].into()] - t * t).abs() < 1e-15);
            assert!((out.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_composes_multiplicatively() {
        let amps = [
            (OccupationVector::from([0, 2]), Complex64::new(0.3, 0.1)),
            (OccupationVector::from([1, 1]), Complex64::new(-0.5, 0.2)),
            (OccupationVector::from([2, 2]), Complex64::new(0.4, -0.6)),
            (OccupationVector::from([3, 0]), Complex64::new(0.1, 0.0)),
        ];
        let s = MixedState::pure(PureState::from_amplitudes(2, 4, amps).unwrap()).unwrap();
        for &(t1, t2) in &[(0.3, 0.8), (0.5, 0.5), (0.01, 0.99)] {
            let seq = apply_loss(&apply_loss(&s, 0, t1).unwrap(), 0, t2).unwrap();
            let once = apply_loss(&s, 0, t1 * t2).unwrap();
            assert!(seq.density_distance(&once).unwrap() < 1e-12);
        }
    }

    #[test]
    fn loss_rejects_bad_transmission() {
        assert!(apply_loss(&fock1(1), 0, -0.1).is_err());
        assert!(apply_loss(&fock1(1), 1, 0.5).is_err());
    }

    #[test]
    fn spdc_vacuum_at_zero_squeezing() {
        let s = spdc_two_mode_squeezed(0.0, 3).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(&[0, 0].into()), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn spdc_geometric_amplitudes() {
        let s = spdc_two_mode_squeezed(0.3, 2).unwrap();
        let norm = (1.0f64 + 0.09 + 0.0081).sqrt();
        for (n, c) in [(0u32, 1.0), (1, 0.3), (2, 0.09)] {
            assert!((s.amplitude(&[n, n].into()).re - c / norm).abs() < 1e-15);
        }
        let r = s.amplitude(&[2, 2].into()) / s.amplitude(&[1, 1].into());
        assert!((r.re - 0.3).abs() < 1e-15);
        assert_eq!(s.cutoff(), 4);
    }

    #[test]
    fn spdc_rejects_unphysical_squeezing() {
        assert!(spdc_two_mode_squeezed(1.0, 2).is_err());
        assert!(spdc_two_mode_squeezed(-1.5, 2).is_err());
    }
}
