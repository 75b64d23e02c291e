use crate::error::{Error, Result};
use crate::fock::{MixedState, PureState};

use super::{apply_unitary_on_modes, loss_branches, ModeUnitary};

/// A mixed state kept as a list of unnormalized pure branches.
///
/// `rho = sum_i |b_i><b_i|`. The trace is the total probability of whatever
/// conditioning events produced the branches, so heralding probabilities can
/// be read off after a projection without renormalizing in between.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchEnsemble {
    modes: usize,
    branches: Vec<PureState>,
}

impl BranchEnsemble {
    pub fn from_pure(state: PureState) -> Self {
        BranchEnsemble {
            modes: state.modes(),
            branches: vec![state],
        }
    }

    pub fn from_mixed(state: &MixedState) -> Self {
        BranchEnsemble {
            modes: state.modes(),
            branches: state
                .components()
                .iter()
                .map(|(w, s)| s.scaled(w.sqrt().into()))
                .collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn branches(&self) -> &[PureState] {
        &self.branches
    }

    pub fn into_branches(self) -> Vec<PureState> {
        self.branches
    }

    /// Trace of the (unnormalized) ensemble.
    pub fn probability(&self) -> f64 {
        self.branches.iter().map(PureState::norm_sqr).sum()
    }

    /// Appends the modes of `other` to every branch.
    pub fn tensor(self, other: &PureState) -> Self {
        BranchEnsemble {
            modes: self.modes + other.modes(),
            branches: self.branches.iter().map(|b| b.tensor(other)).collect(),
        }
    }

    pub fn apply_unitary(self, u: &ModeUnitary, targets: &[usize]) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| apply_unitary_on_modes(b, u, targets))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchEnsemble { modes: self.modes, branches })
    }

    pub fn apply_loss(self, mode: usize, transmission: f64) -> Result<Self> {
        if transmission == 1.0 {
            return Ok(self);
        }
        let mut branches = Vec::with_capacity(self.branches.len() * 2);
        for b in &self.branches {
            branches.extend(loss_branches(b, mode, transmission)?);
        }
        Ok(BranchEnsemble { modes: self.modes, branches })
    }

    /// Projects `modes[i]` onto `pattern[i]` photons and removes those modes.
    /// Branches with no overlap are dropped.
    pub fn project(self, modes: &[usize], pattern: &[u32]) -> Result<Self> {
        let remaining = self.modes - modes.len();
        let mut branches = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let (r, p) = b.project_pattern(modes, pattern)?;
            if p > 0.0 {
                branches.push(r);
            }
        }
        Ok(BranchEnsemble {
            modes: remaining,
            branches,
        })
    }

    /// Relabels modes: new mode `i` is old mode `order[i]`.
    pub fn reorder_modes(self, order: &[usize]) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| b.reorder_modes(order))
            .collect::<Result<Vec<_>>>()?;
        Ok(BranchEnsemble { modes: self.modes, branches })
    }

    pub fn retain(&mut self, keep: impl FnMut(&PureState) -> bool) {
        self.branches.retain(keep);
    }

    /// Normalized mixture. Fails when the ensemble carries no probability.
    pub fn to_mixed(&self) -> Result<MixedState> {
        if self.probability() == 0.0 {
            return Err(Error::Degenerate("ensemble has zero probability".into()));
        }
        MixedState::from_branches(self.branches.iter().cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::beam_splitter_unitary;

    #[test]
    fn loss_then_projection_probability() {
        // |2> through 50% loss: P(1 photon) = 1/2.
        let e = BranchEnsemble::from_pure(PureState::fock([2], 2).unwrap());
        let e = e.apply_loss(0, 0.5).unwrap();
        assert!((e.probability() - 1.0).abs() < 1e-15);
        let p = e.project(&[0], &[1]).unwrap().probability();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_through_mixed() {
        let e = BranchEnsemble::from_pure(PureState::fock([1, 1], 2).unwrap())
            .apply_unitary(&beam_splitter_unitary(0.3, 0.2).unwrap(), &[0, 1])
            .unwrap()
            .apply_loss(1, 0.4)
            .unwrap();
        let m = e.to_mixed().unwrap();
        let back = BranchEnsemble::from_mixed(&m);
        assert!(back.to_mixed().unwrap().density_distance(&m).unwrap() < 1e-15);
        assert!((back.probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_ensemble_cannot_normalize() {
        let e = BranchEnsemble::from_pure(PureState::fock([1], 2).unwrap()).project(&[0], &[2]).unwrap();
        assert!(e.to_mixed().is_err());
    }
}
