use std::collections::HashMap;

use num_complex::Complex64;

use super::permanent::permanent;
use super::ModeUnitary;
use crate::error::{Error, Result};
use crate::fock::{basis_with_total, OccupationVector, PureState};

/// `<n_out| U |n_in>` for a passive linear-optical unitary.
///
/// Equals `per(U_sub) / sqrt(prod n_in! prod n_out!)`, where `U_sub` repeats
/// row `i` of `U` `n_out[i]` times and column `j` `n_in[j]` times. Returns zero
/// when the photon numbers differ.
pub fn fock_amplitude(u: &ModeUnitary, n_in: &OccupationVector, n_out: &OccupationVector) -> Result<Complex64> {
    let m = u.dim();
    for occ in [n_in, n_out] {
        if occ.modes() != m {
            return Err(Error::Dimension {
                expected: m,
                found: occ.modes(),
            });
        }
    }
    Ok(amplitude_unchecked(u, n_in, n_out))
}

fn repeated_indices(occ: &OccupationVector) -> Vec<usize> {
    occ.counts()
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
        .collect()
}

fn amplitude_unchecked(u: &ModeUnitary, n_in: &OccupationVector, n_out: &OccupationVector) -> Complex64 {
    let total = n_in.total();
    if total != n_out.total() {
        return Complex64::new(0.0, 0.0);
    }
    let rows = repeated_indices(n_out);
    let cols = repeated_indices(n_in);
    let n = total as usize;
    let mut sub = Vec::with_capacity(n * n);
    for &r in &rows {
        for &c in &cols {
            sub.push(u.entry(r, c));
        }
    }
    let norm = (n_in.factorial_product() * n_out.factorial_product()).sqrt();
    permanent(&sub, n) / norm
}

/// Non-zero output amplitudes of `U` acting on the basis state `n_in`, in
/// canonical output order.
pub fn transition_table(u: &ModeUnitary, n_in: &OccupationVector) -> Result<Vec<(OccupationVector, Complex64)>> {
    if n_in.modes() != u.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            found: n_in.modes(),
        });
    }
    Ok(basis_with_total(u.dim(), n_in.total())
        .into_iter()
        .map(|out| {
            let a = amplitude_unchecked(u, n_in, &out);
            (out, a)
        })
        .filter(|(_, a)| a.norm() > 0.0)
        .collect())
}

/// Applies `U` to every mode of `state`.
pub fn apply_mode_unitary(state: &PureState, u: &ModeUnitary) -> Result<PureState> {
    if u.dim() != state.modes() {
        return Err(Error::Dimension {
            expected: state.modes(),
            found: u.dim(),
        });
    }
    let targets: Vec<usize> = (0..state.modes()).collect();
    apply_unitary_on_modes(state, u, &targets)
}

/// Applies `U` to the subset `targets` of the modes of `state`; `targets[i]`
/// is the state mode playing the role of row/column `i` of `U`.
pub fn apply_unitary_on_modes(state: &PureState, u: &ModeUnitary, targets: &[usize]) -> Result<PureState> {
    if targets.len() != u.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            found: targets.len(),
        });
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= state.modes()) {
        return Err(Error::Dimension {
            expected: state.modes(),
            found: bad,
        });
    }
    let mut cache: HashMap<OccupationVector, Vec<(OccupationVector, Complex64)>> = HashMap::new();
    let mut out = PureState::zero(state.modes(), state.cutoff()).with_prune_threshold(state.prune_threshold());
    for (occ, &amp) in state.iter() {
        let local = occ.select(targets);
        let table = cache
            .entry(local)
            .or_insert_with_key(|local| transition_table(u, local).expect("dimension checked"));
        for (local_out, a) in table.iter() {
            let mut next = occ.clone();
            for (i, &t) in targets.iter().enumerate() {
                next = next.with_count(t, local_out.get(i));
            }
            out.accumulate(next, amp * a);
        }
    }
    out.prune();
    Ok(out)
}
