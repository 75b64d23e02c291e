//! Fock-basis labels, sparse state containers and photon-number projections.
//!
//! States are stored as sparse maps keyed by [`OccupationVector`]. Keys are
//! ordered lexicographically, so iteration order is canonical and every
//! computation built on top of it is reproducible.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default truncation: two photon pairs.
pub const DEFAULT_CUTOFF: u32 = 4;

/// Amplitudes with a smaller magnitude are dropped by [`PureState::prune`].
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-15;

const NORM_TOLERANCE: f64 = 1e-12;

/// Photon counts per optical mode.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OccupationVector(SmallVec<[u32; 6]>);

impl OccupationVector {
    pub fn new(counts: impl IntoIterator<Item = u32>) -> Self {
        OccupationVector(counts.into_iter().collect())
    }

    pub fn vacuum(modes: usize) -> Self {
        OccupationVector(SmallVec::from_elem(0, modes))
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    /// Copy with the entry at `mode` replaced by `n`.
    pub fn with_count(&self, mode: usize, n: u32) -> Self {
        let mut out = self.clone();
        out.0[mode] = n;
        out
    }

    /// Copy with `mode` removed from the label.
    pub fn without_mode(&self, mode: usize) -> Self {
        let mut out = self.clone();
        out.0.remove(mode);
        out
    }

    pub fn concat(&self, other: &OccupationVector) -> Self {
        let mut out = self.clone();
        out.0.extend_from_slice(&other.0);
        out
    }

    /// Sub-label restricted to `modes`, in the order given.
    pub fn select(&self, modes: &[usize]) -> Self {
        OccupationVector(modes.iter().map(|&m| self.0[m]).collect())
    }

    /// Product of the factorials of the entries.
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

impl fmt::Debug for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

impl From<&[u32]> for OccupationVector {
    fn from(counts: &[u32]) -> Self {
        OccupationVector(SmallVec::from_slice(counts))
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(counts: Vec<u32>) -> Self {
        OccupationVector(SmallVec::from_vec(counts))
    }
}

impl<const N: usize> From<[u32; N]> for OccupationVector {
    fn from(counts: [u32; N]) -> Self {
        OccupationVector(SmallVec::from_slice(&counts))
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// All occupation vectors over `modes` modes with at most `max_total`
/// photons, in lexicographic order.
pub fn basis_enumerate(modes: usize, max_total: u32) -> Vec<OccupationVector> {
    let mut out = Vec::new();
    let mut current = vec![0u32; modes];
    enumerate_into(&mut current, 0, max_total, false, &mut out);
    out
}

/// Occupation vectors with exactly `total` photons, in lexicographic order.
pub fn basis_with_total(modes: usize, total: u32) -> Vec<OccupationVector> {
    let mut out = Vec::new();
    if modes == 0 {
        if total == 0 {
            out.push(OccupationVector::default());
        }
        return out;
    }
    let mut current = vec![0u32; modes];
    enumerate_into(&mut current, 0, total, true, &mut out);
    out
}

fn enumerate_into(current: &mut [u32], mode: usize, remaining: u32, exact: bool, out: &mut Vec<OccupationVector>) {
    if mode + 1 == current.len() {
        let range = if exact { remaining..=remaining } else { 0..=remaining };
        for n in range {
            current[mode] = n;
            out.push(OccupationVector::from(&*current));
        }
        current[mode] = 0;
        return;
    }
    for n in 0..=remaining {
        current[mode] = n;
        enumerate_into(current, mode + 1, remaining - n, exact, out);
    }
    current[mode] = 0;
}

/// Number of occupation vectors with at most `max_total` photons.
pub fn basis_size(modes: usize, max_total: u32) -> usize {
    if modes == 0 {
        return 1;
    }
    (0..=max_total)
        .map(|t| binomial(t + modes as u32 - 1, modes as u32 - 1).round() as usize)
        .sum()
}

/// A pure state as a sparse amplitude map over the truncated Fock basis.
///
/// The state is not required to be normalized; heralded evolution produces
/// sub-normalized states whose squared norm is the event probability.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    modes: usize,
    cutoff: u32,
    prune_threshold: f64,
    amplitudes: BTreeMap<OccupationVector, Complex64>,
}

impl PureState {
    /// The zero vector.
    pub fn zero(modes: usize, cutoff: u32) -> Self {
        PureState {
            modes,
            cutoff,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn vacuum(modes: usize, cutoff: u32) -> Self {
        let mut s = Self::zero(modes, cutoff);
        s.amplitudes.insert(OccupationVector::vacuum(modes), Complex64::new(1.0, 0.0));
        s
    }

    /// A single Fock basis state.
    pub fn fock(occupation: impl Into<OccupationVector>, cutoff: u32) -> Result<Self> {
        let occupation = occupation.into();
        let modes = occupation.modes();
        Self::from_amplitudes(modes, cutoff, [(occupation, Complex64::new(1.0, 0.0))])
    }

    /// Builds a state from `(label, amplitude)` pairs. Repeated labels add up.
    pub fn from_amplitudes(
        modes: usize,
        cutoff: u32,
        amplitudes: impl IntoIterator<Item = (OccupationVector, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(modes, cutoff);
        for (occ, amp) in amplitudes {
            if occ.modes() != modes {
                return Err(Error::Dimension {
                    expected: modes,
                    found: occ.modes(),
                });
            }
            if occ.total() > cutoff {
                return Err(Error::Truncation {
                    total: occ.total(),
                    cutoff,
                });
            }
            s.accumulate(occ, amp);
        }
        Ok(s)
    }

    /// Single-mode state `sum_k c_k |k>`.
    pub fn single_mode(coefficients: &[Complex64], cutoff: u32) -> Result<Self> {
        Self::from_amplitudes(
            1,
            cutoff,
            coefficients
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
                .map(|(k, &c)| (OccupationVector::from([k as u32]), c)),
        )
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self
    }

    /// Copy with a different cutoff. Lowering it below the populated photon
    /// numbers is rejected.
    pub fn with_cutoff(mut self, cutoff: u32) -> Result<Self> {
        if let Some(total) = self.max_photons().filter(|&t| t > cutoff) {
            return Err(Error::Truncation { total, cutoff });
        }
        self.cutoff = cutoff;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn amplitude(&self, occupation: &OccupationVector) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    /// Iterates `(label, amplitude)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn max_photons(&self) -> Option<u32> {
        self.amplitudes.keys().map(OccupationVector::total).max()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy of the state.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalize the zero state".into()));
        }
        // Leave already-normalized states bitwise untouched.
        if (norm - 1.0).abs() <= 16.0 * f64::EPSILON {
            return Ok(self.clone());
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.amplitudes.values_mut() {
            *a *= factor;
        }
        out
    }

    /// Drops amplitudes below the prune threshold. Retained entries are untouched.
    pub fn prune(&mut self) {
        let threshold = self.prune_threshold;
        self.amplitudes.retain(|_, a| a.norm() >= threshold);
    }

    pub fn pruned(mut self) -> Self {
        self.prune();
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        inner_product(self, other)
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        let denom = self.norm_sqr() * other.norm_sqr();
        if denom == 0.0 {
            return Err(Error::Degenerate("fidelity with the zero state".into()));
        }
        Ok(overlap / denom)
    }

    /// Linear superposition `self + other`.
    pub fn add(&self, other: &PureState) -> Result<Self> {
        if self.modes != other.modes {
            return Err(Error::Dimension {
                expected: self.modes,
                found: other.modes,
            });
        }
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        for (occ, &amp) in other.iter() {
            out.accumulate(occ.clone(), amp);
        }
        Ok(out)
    }

    /// Tensor product; modes of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &PureState) -> Self {
        let mut out = Self::zero(self.modes + other.modes, self.cutoff + other.cutoff);
        out.prune_threshold = self.prune_threshold;
        for (a, &x) in self.iter() {
            for (b, &y) in other.iter() {
                out.amplitudes.insert(a.concat(b), x * y);
            }
        }
        out
    }

    /// Projects `mode` onto `|n>` and removes it from the labels.
    ///
    /// Returns the unnormalized residual together with its squared norm,
    /// the probability of observing `n` photons in `mode`.
    pub fn project_photon_number(&self, mode: usize, n: u32) -> Result<(PureState, f64)> {
        if mode >= self.modes {
            return Err(Error::Dimension {
                expected: self.modes,
                found: mode,
            });
        }
        let mut residual = Self::zero(self.modes - 1, self.cutoff.saturating_sub(n));
        residual.prune_threshold = self.prune_threshold;
        for (occ, &amp) in self.iter() {
            if occ.get(mode) == n {
                residual.amplitudes.insert(occ.without_mode(mode), amp);
            }
        }
        let p = residual.norm_sqr();
        Ok((residual, p))
    }

    /// Projects several modes at once. `pattern[i]` is the photon number
    /// required in `modes[i]`; all listed modes are removed from the labels.
    pub fn project_pattern(&self, modes: &[usize], pattern: &[u32]) -> Result<(PureState, f64)> {
        if modes.len() != pattern.len() {
            return Err(Error::Dimension {
                expected: modes.len(),
                found: pattern.len(),
            });
        }
        if let Some(&bad) = modes.iter().find(|&&m| m >= self.modes) {
            return Err(Error::Dimension {
                expected: self.modes,
                found: bad,
            });
        }
        let detected: u32 = pattern.iter().sum();
        let keep: Vec<usize> = (0..self.modes).filter(|m| !modes.contains(m)).collect();
        let mut residual = Self::zero(keep.len(), self.cutoff.saturating_sub(detected));
        residual.prune_threshold = self.prune_threshold;
        for (occ, &amp) in self.iter() {
            if modes.iter().zip(pattern).all(|(&m, &n)| occ.get(m) == n) {
                residual.amplitudes.insert(occ.select(&keep), amp);
            }
        }
        let p = residual.norm_sqr();
        Ok((residual, p))
    }

    /// Photon-number distribution of one mode.
    pub fn mode_distribution(&self, mode: usize) -> BTreeMap<u32, f64> {
        let mut out = BTreeMap::new();
        for (occ, amp) in self.iter() {
            *out.entry(occ.get(mode)).or_insert(0.0) += amp.norm_sqr();
        }
        out
    }

    /// Relabels modes: new mode `i` is old mode `order[i]`.
    pub fn reorder_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.modes];
        if order.len() != self.modes {
            return Err(Error::Dimension {
                expected: self.modes,
                found: order.len(),
            });
        }
        for &m in order {
            if m >= self.modes || std::mem::replace(&mut seen[m], true) {
                return Err(Error::Usage(format!("{order:?} is not a permutation of the modes")));
            }
        }
        let mut out = Self::zero(self.modes, self.cutoff);
        out.prune_threshold = self.prune_threshold;
        for (occ, &amp) in self.iter() {
            out.amplitudes.insert(occ.select(order), amp);
        }
        Ok(out)
    }

    pub(crate) fn accumulate(&mut self, occupation: OccupationVector, amp: Complex64) {
        *self.amplitudes.entry(occupation).or_default() += amp;
    }
}

/// `<a|b> = sum_k conj(a_k) b_k`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.modes != b.modes {
        return Err(Error::Dimension {
            expected: a.modes,
            found: b.modes,
        });
    }
    // Iterate the sparser map and look up in the other.
    let (small, large, conj_small) = if a.len() <= b.len() { (a, b, true) } else { (b, a, false) };
    let mut acc = Complex64::new(0.0, 0.0);
    for (occ, &x) in small.iter() {
        if let Some(&y) = large.amplitudes.get(occ) {
            acc += if conj_small { x.conj() * y } else { y.conj() * x };
        }
    }
    Ok(acc)
}

pub fn project_photon_number(state: &PureState, mode: usize, n: u32) -> Result<(PureState, f64)> {
    state.project_photon_number(mode, n)
}

/// Sparse density-operator entries keyed by `(row, column)` labels.
pub type DensityMatrix = BTreeMap<(OccupationVector, OccupationVector), Complex64>;

/// A convex mixture of normalized pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn pure(state: PureState) -> Result<Self> {
        Self::from_ensemble([(1.0, state)])
    }

    /// Builds a mixture from `(weight, state)` pairs. States are normalized,
    /// zero-weight entries dropped and the weights rescaled to sum to one.
    pub fn from_ensemble(components: impl IntoIterator<Item = (f64, PureState)>) -> Result<Self> {
        let mut out: Vec<(f64, PureState)> = Vec::new();
        for (w, state) in components {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::domain("weight", w, "[0, inf)"));
            }
            if let Some((_, first)) = out.first() {
                if first.modes() != state.modes() {
                    return Err(Error::Dimension {
                        expected: first.modes(),
                        found: state.modes(),
                    });
                }
                if first.cutoff() != state.cutoff() {
                    return Err(Error::Usage(format!(
                        "mixture components disagree on cutoff ({} vs {})",
                        first.cutoff(),
                        state.cutoff()
                    )));
                }
            }
            if w == 0.0 {
                continue;
            }
            out.push((w, state.normalize()?));
        }
        let total: f64 = out.iter().map(|(w, _)| w).sum();
        if out.is_empty() || total == 0.0 {
            return Err(Error::Degenerate("mixture has no weight".into()));
        }
        for (w, _) in &mut out {
            *w /= total;
        }
        Ok(MixedState { components: out })
    }

    /// Mixture from unnormalized branches, each weighted by its squared norm.
    /// Zero branches are skipped.
    pub fn from_branches(branches: impl IntoIterator<Item = PureState>) -> Result<Self> {
        Self::from_ensemble(
            branches
                .into_iter()
                .filter(|s| s.norm_sqr() > 0.0)
                .map(|s| (s.norm_sqr(), s)),
        )
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn modes(&self) -> usize {
        self.components[0].1.modes()
    }

    pub fn cutoff(&self) -> u32 {
        self.components[0].1.cutoff()
    }

    pub fn trace(&self) -> f64 {
        self.components.iter().map(|(w, s)| w * s.norm_sqr()).sum()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let mut rho = DensityMatrix::new();
        for (w, s) in &self.components {
            for (row, a) in s.iter() {
                for (col, b) in s.iter() {
                    *rho.entry((row.clone(), col.clone())).or_default() += *a * b.conj() * *w;
                }
            }
        }
        rho
    }

    /// Largest elementwise difference between the two density matrices.
    pub fn density_distance(&self, other: &MixedState) -> Result<f64> {
        if self.modes() != other.modes() {
            return Err(Error::Dimension {
                expected: self.modes(),
                found: other.modes(),
            });
        }
        let a = self.density_matrix();
        let b = other.density_matrix();
        let mut worst: f64 = 0.0;
        for (k, x) in &a {
            worst = worst.max((x - b.get(k).copied().unwrap_or_default()).norm());
        }
        for (k, y) in &b {
            if !a.contains_key(k) {
                worst = worst.max(y.norm());
            }
        }
        Ok(worst)
    }

    /// Diagonal of the density matrix.
    pub fn populations(&self) -> BTreeMap<OccupationVector, f64> {
        let mut out = BTreeMap::new();
        for (w, s) in &self.components {
            for (occ, a) in s.iter() {
                *out.entry(occ.clone()).or_insert(0.0) += w * a.norm_sqr();
            }
        }
        out
    }

    pub fn population(&self, occupation: &OccupationVector) -> f64 {
        self.components
            .iter()
            .map(|(w, s)| w * s.amplitude(occupation).norm_sqr())
            .sum()
    }

    /// `<psi|rho|psi>` for a (not necessarily normalized) pure target.
    pub fn fidelity_with_pure(&self, target: &PureState) -> Result<f64> {
        let norm = target.norm_sqr();
        if norm == 0.0 {
            return Err(Error::Degenerate("fidelity with the zero state".into()));
        }
        let mut f = 0.0;
        for (w, s) in &self.components {
            f += w * target.inner(s)?.norm_sqr();
        }
        Ok(f / norm)
    }
}
