//! The two-photon quantum-scissor heralded amplifier.
//!
//! Physical layout of [`ScissorAmplifier`] (order `n = 2`):
//!
//! ```text
//!  resource |2> ──[ eta(g), phase ]──┬── transmitted ──> QFT port 1
//!                                    └── reflected ────> output mode
//!  signal ───────────────────────────────────────────> QFT port 0
//!  vacuum ───────────────────────────────────────────> QFT port 2
//!                         QFT outputs ──> herald detectors (1,1,0) etc.
//! ```
//!
//! Conditioned on a success pattern the output mode carries
//! `N sum_{k<=2} g^k e^{i k theta} c_k |k>`, where `theta` is the pattern's
//! [`herald_phase`]. The resource splitter carries a fixed `-pi/3` coupling
//! phase so that pattern `(1,1,0)` needs no correction with the plain
//! `qft_unitary(3)` interferometer.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::circuit::{beam_splitter_unitary, qft_unitary, BranchEnsemble, ModeUnitary};
use crate::error::{check_closed, Error, Result};
use crate::fock::{MixedState, OccupationVector, PureState, DEFAULT_CUTOFF};

/// Coupling phase of the resource splitter that zeroes the `(1,1,0)` herald
/// phase for the port map signal -> 0, ancilla -> 1.
pub const RESOURCE_SPLITTER_PHASE: f64 = -PI / 3.0;

/// Heralding probability of each PNR coincidence for a two-photon arrival.
pub const PNR_TWO_PHOTON_EFFICIENCY: f64 = 0.5;

/// `eta(g) = 1 - g^2/(1+g^2) = 1/(1+g^2)`.
pub fn gain_to_transmittance(g: f64) -> Result<f64> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::domain("g", g, "[0, inf)"));
    }
    Ok(1.0 / (1.0 + g * g))
}

/// Nominal amplitude gain and the resource-splitter transmittance that sets it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSetting {
    g: f64,
    eta: f64,
}

impl GainSetting {
    pub fn new(g: f64) -> Result<Self> {
        Ok(GainSetting {
            g,
            eta: gain_to_transmittance(g)?,
        })
    }

    /// Inverse map `g = sqrt((1-eta)/eta)`.
    pub fn from_transmittance(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::domain("transmittance", eta, "(0, 1]"));
        }
        Ok(GainSetting {
            g: ((1.0 - eta) / eta).sqrt(),
            eta,
        })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn transmittance(&self) -> f64 {
        self.eta
    }

    /// Unnormalized intensity gain of the `k`-photon component, `g^(2k)`.
    pub fn intensity_gain(&self, photons: u32) -> f64 {
        self.g.powi(2 * photons as i32)
    }
}

/// Photon counts registered by the herald detectors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeraldPattern(OccupationVector);

impl HeraldPattern {
    pub fn new(counts: impl Into<OccupationVector>) -> Self {
        HeraldPattern(counts.into())
    }

    /// The three non-bunched two-photon patterns, in canonical order
    /// `(1,1,0)`, `(1,0,1)`, `(0,1,1)`.
    pub fn success_patterns() -> [HeraldPattern; 3] {
        [
            HeraldPattern::new([1, 1, 0]),
            HeraldPattern::new([1, 0, 1]),
            HeraldPattern::new([0, 1, 1]),
        ]
    }

    pub fn counts(&self) -> &[u32] {
        self.0.counts()
    }

    pub fn total(&self) -> u32 {
        self.0.total()
    }

    /// Exactly `n` detectors out of `n + 1` fire, one photon each.
    pub fn is_success(&self) -> bool {
        let n = self.total() as usize;
        n >= 1 && self.0.modes() == n + 1 && self.counts().iter().all(|&c| c <= 1)
    }

    /// Digits only, e.g. `110`.
    pub fn compact(&self) -> String {
        self.counts().iter().map(|c| c.to_string()).collect()
    }
}

impl fmt::Display for HeraldPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for HeraldPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HeraldPattern{}", self.0)
    }
}

impl FromStr for HeraldPattern {
    type Err = Error;

    /// Accepts `110`, `1,1,0` or `(1,1,0)`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let counts: Option<Vec<u32>> = if inner.contains(',') {
            inner.split(',').map(|p| p.trim().parse().ok()).collect()
        } else {
            inner.chars().map(|c| c.to_digit(10)).collect()
        };
        match counts {
            Some(c) if !c.is_empty() => Ok(HeraldPattern::new(c)),
            _ => Err(Error::Usage(format!("cannot parse herald pattern {s:?}"))),
        }
    }
}

/// Relative phase per photon-number step imparted by a success pattern.
pub fn herald_phase(pattern: &HeraldPattern) -> Result<f64> {
    match pattern.counts() {
        [1, 1, 0] => Ok(0.0),
        [1, 0, 1] => Ok(2.0 * PI / 3.0),
        [0, 1, 1] => Ok(4.0 * PI / 3.0),
        _ => Err(Error::Usage(format!(
            "{pattern} is not a success pattern; expected one of (1,1,0), (1,0,1), (0,1,1)"
        ))),
    }
}

/// Single-mode phase shift undoing the herald phase of `pattern`.
pub fn herald_correction(pattern: &HeraldPattern) -> Result<ModeUnitary> {
    Ok(crate::circuit::phase_shift_unitary(-herald_phase(pattern)?))
}

/// The ideal `n`-scissor map `c_k -> N g^k c_k` for `k <= n`; higher
/// components are discarded. Returns `n + 1` normalized coefficients.
pub fn ideal_scissor_transform(coefficients: &[Complex64], g: f64, order: u32) -> Result<Vec<Complex64>> {
    if order == 0 {
        return Err(Error::Usage("scissor order must be at least 1".into()));
    }
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::domain("g", g, "[0, inf)"));
    }
    let kept: Vec<Complex64> = (0..=order as usize)
        .map(|k| coefficients.get(k).copied().unwrap_or_default() * g.powi(k as i32))
        .collect();
    let norm = kept.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate("no amplitude survives truncation".into()));
    }
    Ok(kept.into_iter().map(|c| c / norm).collect())
}

/// The ideal output of a successful herald: the scissor transform with the
/// pattern's herald phase applied, as a single-mode state.
pub fn expected_output(coefficients: &[Complex64], g: f64, pattern: &HeraldPattern) -> Result<PureState> {
    let theta = herald_phase(pattern)?;
    let order = pattern.total();
    let ideal = ideal_scissor_transform(coefficients, g, order)?;
    let rotated: Vec<Complex64> = ideal
        .iter()
        .enumerate()
        .map(|(k, c)| c * Complex64::from_polar(1.0, theta * k as f64))
        .collect();
    PureState::single_mode(&rotated, order)
}

/// Result of heralded amplification of a single-mode input.
#[derive(Clone, Debug, PartialEq)]
pub struct ScissorOutcome {
    /// Normalized single-mode output conditioned on `pattern`.
    pub output: MixedState,
    /// Probability of observing `pattern`.
    pub success_probability: f64,
    pub pattern: HeraldPattern,
    /// Input weight above the scissor order, removed by truncation.
    pub truncation_weight: f64,
}

/// Which interferometer input ports receive the signal and the transmitted
/// part of the resource. Remaining ports are fed vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortMap {
    pub signal: usize,
    pub ancilla: usize,
}

impl Default for PortMap {
    fn default() -> Self {
        PortMap { signal: 0, ancilla: 1 }
    }
}

/// An `n`-photon scissor: resource `|n>`, an `(n+1)`-mode interferometer and
/// `n` herald photons.
///
/// Only `n = 2` with the default QFT, port map and splitter phase is
/// calibrated against [`herald_phase`].
#[derive(Clone, Debug)]
pub struct ScissorAmplifier {
    order: u32,
    interferometer: ModeUnitary,
    ports: PortMap,
    splitter_phase: f64,
    max_input_cutoff: u32,
}

impl Default for ScissorAmplifier {
    fn default() -> Self {
        ScissorAmplifier {
            order: 2,
            interferometer: qft_unitary(3).expect("three modes"),
            ports: PortMap::default(),
            splitter_phase: RESOURCE_SPLITTER_PHASE,
            max_input_cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl ScissorAmplifier {
    pub fn two_photon() -> Self {
        Self::default()
    }

    /// A general-order device. `interferometer` must act on `order + 1` modes.
    pub fn new(order: u32, interferometer: ModeUnitary, ports: PortMap, splitter_phase: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::Usage("scissor order must be at least 1".into()));
        }
        let m = order as usize + 1;
        if interferometer.dim() != m {
            return Err(Error::Dimension {
                expected: m,
                found: interferometer.dim(),
            });
        }
        if ports.signal == ports.ancilla || ports.signal >= m || ports.ancilla >= m {
            return Err(Error::Usage(format!("invalid port map {ports:?} for {m} modes")));
        }
        Ok(ScissorAmplifier {
            order,
            interferometer,
            ports,
            splitter_phase,
            max_input_cutoff: DEFAULT_CUTOFF,
        })
    }

    pub fn with_max_input_cutoff(mut self, cutoff: u32) -> Self {
        self.max_input_cutoff = cutoff;
        self
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn ports(&self) -> PortMap {
        self.ports
    }

    pub fn interferometer(&self) -> &ModeUnitary {
        &self.interferometer
    }

    pub fn splitter_phase(&self) -> f64 {
        self.splitter_phase
    }

    fn check_pattern(&self, pattern: &HeraldPattern) -> Result<()> {
        if pattern.total() != self.order || pattern.counts().len() != self.order as usize + 1 || !pattern.is_success() {
            return Err(Error::Usage(format!("{pattern} is not a success pattern of the {}-scissor", self.order)));
        }
        Ok(())
    }

    /// Feeds mode `target` of every branch into the signal port, heralds on
    /// `pattern` and puts the output mode back at position `target`.
    ///
    /// The resource splitter is set to `transmittance` directly, so `1.0`
    /// routes the whole resource into the interferometer. Branch norms after
    /// the call are joint probabilities with the herald.
    pub fn herald_branches(
        &self,
        ensemble: BranchEnsemble,
        target: usize,
        transmittance: f64,
        pattern: &HeraldPattern,
    ) -> Result<BranchEnsemble> {
        self.check_pattern(pattern)?;
        let m = ensemble.modes();
        if target >= m {
            return Err(Error::Dimension { expected: m, found: target });
        }
        let splitter = beam_splitter_unitary(transmittance, self.splitter_phase)?;
        let ports = self.order as usize + 1;

        // Appended modes: [anc, out, vac...] with the resource in anc.
        let anc = m;
        let out = m + 1;
        let mut extra = vec![0u32; ports];
        extra[0] = self.order;
        let resource = PureState::fock(extra, self.order)?;

        let mut qft_modes = vec![usize::MAX; ports];
        qft_modes[self.ports.signal] = target;
        qft_modes[self.ports.ancilla] = anc;
        let mut next_vac = m + 2;
        for slot in qft_modes.iter_mut().filter(|s| **s == usize::MAX) {
            *slot = next_vac;
            next_vac += 1;
        }

        let joint = ensemble
            .tensor(&resource)
            .apply_unitary(&splitter, &[anc, out])?
            .apply_unitary(&self.interferometer, &qft_modes)?;
        let heralded = joint.project(&qft_modes, pattern.counts())?;

        // Survivors: original modes except target, then out.
        let mut order: Vec<usize> = (0..m - 1).collect();
        order.insert(target, m - 1);
        heralded.reorder_modes(&order)
    }

    /// Heralded amplification of a single-mode input at gain `g`.
    pub fn run(&self, input: &MixedState, g: f64, pattern: &HeraldPattern) -> Result<ScissorOutcome> {
        self.check_pattern(pattern)?;
        if input.modes() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: input.modes(),
            });
        }
        if input.cutoff() > self.max_input_cutoff {
            return Err(Error::Truncation {
                total: input.cutoff(),
                cutoff: self.max_input_cutoff,
            });
        }
        let eta = gain_to_transmittance(g)?;
        let truncation_weight = input
            .populations()
            .iter()
            .filter(|(o, _)| o.total() > self.order)
            .fold(0.0, |acc, (_, p)| acc + p);
        let heralded = self.herald_branches(BranchEnsemble::from_mixed(input), 0, eta, pattern)?;
        let success_probability = heralded.probability();
        if success_probability == 0.0 {
            return Err(Error::Degenerate(format!("pattern {pattern} cannot occur for this input")));
        }
        let output = heralded.to_mixed()?;
        Ok(ScissorOutcome {
            output,
            success_probability,
            pattern: pattern.clone(),
            truncation_weight,
        })
    }
}

/// Full-circuit simulation of the two-photon scissor with the default device.
pub fn run_two_scissor(input: &MixedState, g: f64, pattern: &HeraldPattern) -> Result<ScissorOutcome> {
    ScissorAmplifier::two_photon().run(input, g, pattern)
}

/// Output of the closed-form amplified mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifiedMixture {
    /// Normalized populations of `|0>`, `|1>`, `|2>`.
    pub weights: [f64; 3],
    /// `N = 1 / [(1-t)^2 + 2 g^2 t (1-t) + g^4 t^2]`.
    pub normalization: f64,
}

/// Heralded amplification of `|2>` sent through a loss channel of intensity
/// transmission `tau`.
pub fn amplified_mixture_closed_form(tau: f64, g: f64) -> Result<AmplifiedMixture> {
    check_closed("tau", tau, 0.0, 1.0, "[0, 1]")?;
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::domain("g", g, "[0, inf)"));
    }
    let raw = [
        (1.0 - tau) * (1.0 - tau),
        2.0 * g * g * tau * (1.0 - tau),
        g.powi(4) * tau * tau,
    ];
    let normalization = 1.0 / raw.iter().sum::<f64>();
    Ok(AmplifiedMixture {
        weights: raw.map(|w| w * normalization),
        normalization,
    })
}

/// Two-photon intensity gain `G2 = N g^4`.
pub fn two_photon_gain(tau: f64, g: f64) -> Result<f64> {
    check_closed("tau", tau, 0.0, 1.0, "[0, 1]")?;
    if tau == 0.0 {
        return Err(Error::Degenerate("tau = 0 leaves no two-photon component".into()));
    }
    let mix = amplified_mixture_closed_form(tau, g)?;
    Ok(mix.normalization * g.powi(4))
}

/// Coincidence probability of a probabilistic PNR stage on `mode`: the mode
/// is split on a balanced splitter and both outputs must fire.
///
/// `state` may be sub-normalized; the result is then a joint probability.
pub fn pnr_coincidence_probability(ensemble: &BranchEnsemble, mode: usize) -> Result<f64> {
    let m = ensemble.modes();
    if mode >= m {
        return Err(Error::Dimension { expected: m, found: mode });
    }
    let cutoff = ensemble.branches().iter().map(PureState::cutoff).max().unwrap_or(0);
    let vac = PureState::vacuum(1, cutoff);
    let split = ensemble
        .clone()
        .tensor(&vac)
        .apply_unitary(&beam_splitter_unitary(0.5, 0.0)?, &[mode, m])?;
    Ok(split.project(&[mode, m], &[1, 1])?.probability())
}

/// Counting statistics of one gain-measurement configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PnrEstimate {
    /// Two-fold herald probability.
    pub herald_probability: f64,
    /// Herald and PNR coincidence together.
    pub fourfold_probability: f64,
    /// `fourfold / herald / 0.5`, the estimate of the two-photon population.
    pub rho22: f64,
}

/// Models the photon-counting gain measurement for `|2>` sent through a loss
/// channel `tau`.
///
/// With the amplifier on (`sigma = 1`, resource split at `eta(g)`) the PNR
/// stage sees the heralded output. With it off (`sigma = 0`, `eta = 1`) the
/// resource alone drives the heralds and the PNR stage sees the attenuated
/// input directly, conditioned on the same pattern.
pub fn simulate_gain_measurement(tau: f64, g: f64, with_amplifier: bool, pattern: &HeraldPattern) -> Result<PnrEstimate> {
    check_closed("tau", tau, 0.0, 1.0, "[0, 1]")?;
    let device = ScissorAmplifier::two_photon();
    let source = MixedState::pure(PureState::fock([2], 2)?)?;
    let input = crate::circuit::apply_loss(&source, 0, tau)?;
    let ensemble = BranchEnsemble::from_mixed(&input);

    let (heralded, pnr_mode) = if with_amplifier {
        let eta = gain_to_transmittance(g)?;
        (device.herald_branches(ensemble, 0, eta, pattern)?, 0)
    } else {
        // Mode 1 is an empty signal port; the attenuated input bypasses the circuit.
        let with_port = ensemble.tensor(&PureState::vacuum(1, 0));
        (device.herald_branches(with_port, 1, 1.0, pattern)?, 0)
    };
    let herald_probability = heralded.probability();
    if herald_probability == 0.0 {
        return Err(Error::Degenerate("heralding pattern never occurs".into()));
    }
    let fourfold_probability = pnr_coincidence_probability(&heralded, pnr_mode)?;
    Ok(PnrEstimate {
        herald_probability,
        fourfold_probability,
        rho22: fourfold_probability / herald_probability / PNR_TWO_PHOTON_EFFICIENCY,
    })
}

/// Ratio of the amplifier-on and amplifier-off two-photon estimates.
pub fn measured_two_photon_gain(tau: f64, g: f64, pattern: &HeraldPattern) -> Result<f64> {
    let on = simulate_gain_measurement(tau, g, true, pattern)?;
    let off = simulate_gain_measurement(tau, g, false, pattern)?;
    if off.rho22 == 0.0 {
        return Err(Error::Degenerate("no two-photon component reaches the PNR stage".into()));
    }
    Ok(on.rho22 / off.rho22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pure_input(coeffs: &[Complex64]) -> MixedState {
        MixedState::pure(PureState::single_mode(coeffs, 4).unwrap()).unwrap()
    }

    fn p110() -> HeraldPattern {
        HeraldPattern::new([1, 1, 0])
    }

    /// Heralding probability of the ideal device, derived by hand from the
    /// QFT permanents: every success pattern has
    /// `|<pattern|QFT|k, 2-k, 0>|^2 C(2,k) = 2/9`, hence
    /// `P = (2/9) eta^(2-k) (1-eta)^k |c_k|^2` summed over `k`.
    fn success_probability_oracle(coeffs: &[f64], g: f64) -> f64 {
        let eta = 1.0 / (1.0 + g * g);
        coeffs
            .iter()
            .take(3)
            .enumerate()
            .map(|(k, ck)| 2.0 / 9.0 * eta.powi(2 - k as i32) * (1.0 - eta).powi(k as i32) * ck * ck)
            .sum()
    }

    #[test]
    fn transmittance_examples() {
        assert_eq!(gain_to_transmittance(0.0).unwrap(), 1.0);
        assert_eq!(gain_to_transmittance(1.0).unwrap(), 0.5);
        assert!((gain_to_transmittance(3.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(gain_to_transmittance(-1.0).is_err());
    }

    #[test]
    fn gain_setting_roundtrip() {
        for &g in &[0.0, 0.3, 1.0, 2.5, 9.0] {
            let s = GainSetting::new(g).unwrap();
            let eta = s.transmittance();
            assert!(eta > 0.0 && eta <= 1.0);
            assert!(((1.0 - eta) / eta - g * g).abs() < 1e-12 * (1.0 + g * g));
            let back = GainSetting::from_transmittance(eta).unwrap();
            assert!((back.g() - g).abs() < 1e-12 * (1.0 + g));
        }
        assert!(GainSetting::from_transmittance(0.0).is_err());
    }

    #[test]
    fn pattern_classification() {
        for p in HeraldPattern::success_patterns() {
            assert!(p.is_success());
        }
        for bad in [[2, 0, 0], [0, 2, 0], [1, 0, 0], [1, 1, 1], [0, 0, 0]] {
            assert!(!HeraldPattern::new(bad).is_success(), "{bad:?}");
        }
        assert_eq!("1,0,1".parse::<HeraldPattern>().unwrap(), HeraldPattern::new([1, 0, 1]));
        assert_eq!("(0,1,1)".parse::<HeraldPattern>().unwrap(), HeraldPattern::new([0, 1, 1]));
        assert_eq!("110".parse::<HeraldPattern>().unwrap(), p110());
        assert!("1x0".parse::<HeraldPattern>().is_err());
        assert_eq!(p110().compact(), "110");
    }

    #[test]
    fn herald_phase_table() {
        let [a, b, c] = HeraldPattern::success_patterns();
        assert_eq!(herald_phase(&a).unwrap(), 0.0);
        assert!((herald_phase(&b).unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((herald_phase(&c).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!(herald_phase(&HeraldPattern::new([2, 0, 0])).is_err());
    }

    #[test]
    fn ideal_transform_examples() {
        let coeffs = [c(0.6), c(0.0), c(0.8)];
        assert_eq!(ideal_scissor_transform(&coeffs, 1.0, 2).unwrap(), coeffs.to_vec());
        let input = [c(0.5), c(0.5), Complex64::new(0.0, 0.5)];
        let out = ideal_scissor_transform(&input, 3.0, 2).unwrap();
        let raw = [c(0.5), c(1.5), Complex64::new(0.0, 4.5)];
        let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (o, r) in out.iter().zip(raw) {
            assert!((o - r / n).norm() < 1e-15);
        }
        let err = ideal_scissor_transform(&[c(0.0), c(0.0), c(0.0), c(1.0)], 2.0, 2).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn vacuum_is_fixed_point() {
        for &g in &[0.0, 0.5, 2.0] {
            let out = run_two_scissor(&pure_input(&[c(1.0)]), g, &p110()).unwrap();
            assert!((out.output.population(&[0].into()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_superposition_amplified_at_g2() {
        let s = 1.0 / 3f64.sqrt();
        let input = [c(s), c(s), c(s)];
        let out = run_two_scissor(&pure_input(&input), 2.0, &p110()).unwrap();
        let target = expected_output(&input, 2.0, &p110()).unwrap();
        assert!(out.output.fidelity_with_pure(&target).unwrap() > 1.0 - 1e-10);
        let pops = out.output.populations();
        // Amplitudes proportional to (1, 2, 4).
        let norm = 21.0;
        assert!((pops[&[0].into()] - 1.0 / norm).abs() < 1e-12);
        assert!((pops[&[1].into()] - 4.0 / norm).abs() < 1e-12);
        assert!((pops[&[2].into()] - 16.0 / norm).abs() < 1e-12);
        assert!((out.success_probability - success_probability_oracle(&[s, s, s], 2.0)).abs() < 1e-14);
    }

    #[test]
    fn simulated_herald_phases() {
        let input = [c(0.6), c(0.48), c(0.64)];
        for pattern in HeraldPattern::success_patterns() {
            let out = run_two_scissor(&pure_input(&input), 1.5, &pattern).unwrap();
            let (_, psi) = &out.output.components()[0];
            let a0 = psi.amplitude(&[0].into()) / input[0];
            let a1 = psi.amplitude(&[1].into()) / input[1];
            let a2 = psi.amplitude(&[2].into()) / input[2];
            let step1 = (a1 / a0).arg().rem_euclid(2.0 * PI);
            let step2 = (a2 / a1).arg().rem_euclid(2.0 * PI);
            let expect = herald_phase(&pattern).unwrap();
            let d1 = (step1 - expect).abs().min(2.0 * PI - (step1 - expect).abs());
            let d2 = (step2 - expect).abs().min(2.0 * PI - (step2 - expect).abs());
            assert!(d1 < 1e-9 && d2 < 1e-9, "{pattern}: {step1} {step2} vs {expect}");
        }
    }

    #[test]
    fn oracle_equivalence_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let coeffs: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            for &g in &[0.5, 1.0, 2.0, 3.0] {
                for pattern in HeraldPattern::success_patterns() {
                    let out = run_two_scissor(&pure_input(&coeffs), g, &pattern).unwrap();
                    let target = expected_output(&coeffs, g, &pattern).unwrap();
                    assert!(out.output.fidelity_with_pure(&target).unwrap() > 1.0 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn patterns_share_success_probability() {
        let input = [c(0.3), Complex64::new(0.4, 0.2), c(-0.5)];
        let outs: Vec<_> = HeraldPattern::success_patterns()
            .iter()
            .map(|p| run_two_scissor(&pure_input(&input), 2.2, p).unwrap())
            .collect();
        for o in &outs[1..] {
            assert!((o.success_probability - outs[0].success_probability).abs() < 1e-14);
            for k in 0..3u32 {
                let occ = OccupationVector::from([k]);
                assert!((o.output.population(&occ) - outs[0].output.population(&occ)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn success_probability_matches_closed_form() {
        let coeffs = [0.6, 0.0, 0.8];
        for &g in &[0.0, 0.5, 1.0, 4.0, 20.0] {
            let input: Vec<Complex64> = coeffs.iter().map(|&x| c(x)).collect();
            let out = run_two_scissor(&pure_input(&input), g, &p110()).unwrap();
            let expect = success_probability_oracle(&coeffs, g);
            assert!((out.success_probability - expect).abs() < 1e-13, "g={g}");
        }
    }

    #[test]
    fn truncation_weight_reported() {
        let input = [c(0.5), c(0.5), c(0.5), c(0.5)];
        let out = run_two_scissor(&pure_input(&input), 1.0, &p110()).unwrap();
        assert!((out.truncation_weight - 0.25).abs() < 1e-12);
        let target = expected_output(&input, 1.0, &p110()).unwrap();
        assert!(out.output.fidelity_with_pure(&target).unwrap() > 1.0 - 1e-12);
        assert_eq!(out.output.population(&[3].into()), 0.0);
    }

    #[test]
    fn zero_gain_truncates_to_vacuum() {
        let input = [c(0.6), c(0.8)];
        let out = run_two_scissor(&pure_input(&input), 0.0, &p110()).unwrap();
        assert!((out.output.population(&[0].into()) - 1.0).abs() < 1e-14);
        assert!(run_two_scissor(&pure_input(&[c(0.0), c(1.0)]), 0.0, &p110()).is_err());
    }

    #[test]
    fn rejects_failure_patterns_and_oversized_inputs() {
        let input = pure_input(&[c(1.0)]);
        assert!(matches!(
            run_two_scissor(&input, 1.0, &HeraldPattern::new([2, 0, 0])),
            Err(Error::Usage(_))
        ));
        let big = MixedState::pure(PureState::vacuum(1, 6)).unwrap();
        assert!(matches!(run_two_scissor(&big, 1.0, &p110()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn mixture_linearity() {
        let a = PureState::single_mode(&[c(0.6), c(0.8)], 4).unwrap();
        let b = PureState::single_mode(&[c(0.0), Complex64::new(0.0, 0.6), c(0.8)], 4).unwrap();
        let (wa, wb) = (0.3, 0.7);
        let mix = MixedState::from_ensemble([(wa, a.clone()), (wb, b.clone())]).unwrap();
        let g = 1.7;
        let out = run_two_scissor(&mix, g, &p110()).unwrap();
        let oa = run_two_scissor(&MixedState::pure(a).unwrap(), g, &p110()).unwrap();
        let ob = run_two_scissor(&MixedState::pure(b).unwrap(), g, &p110()).unwrap();
        let pa = wa * oa.success_probability;
        let pb = wb * ob.success_probability;
        assert!((out.success_probability - (pa + pb)).abs() < 1e-12);
        let expected = MixedState::from_ensemble([
            (pa, oa.output.components()[0].1.clone()),
            (pb, ob.output.components()[0].1.clone()),
        ])
        .unwrap();
        assert!(out.output.density_distance(&expected).unwrap() < 1e-10);
    }

    #[test]
    fn closed_form_mixture_examples() {
        let m = amplified_mixture_closed_form(0.3, 1.0).unwrap();
        assert!((m.normalization - 1.0).abs() < 1e-15);
        assert!((m.weights[0] - 0.49).abs() < 1e-15);
        assert!((m.weights[1] - 0.42).abs() < 1e-15);
        assert!((m.weights[2] - 0.09).abs() < 1e-15);
        let m = amplified_mixture_closed_form(1.0, 2.0).unwrap();
        assert_eq!(m.weights, [0.0, 0.0, 1.0]);
        let m = amplified_mixture_closed_form(0.05, 3.0).unwrap();
        assert!((m.normalization - 1.0 / 1.96).abs() < 1e-15);
        for (w, raw) in m.weights.iter().zip([0.9025, 0.855, 0.2025]) {
            assert!((w - raw / 1.96).abs() < 1e-15);
        }
        assert!(amplified_mixture_closed_form(1.5, 1.0).is_err());
    }

    #[test]
    fn two_photon_gain_examples() {
        for &tau in &[0.05, 0.3, 1.0] {
            assert!((two_photon_gain(tau, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((two_photon_gain(0.05, 3.0).unwrap() - 81.0 / 1.96).abs() < 1e-12);
        assert!((two_photon_gain(0.05, 1e6).unwrap() - 400.0).abs() < 1e-6);
        assert!(matches!(two_photon_gain(0.0, 2.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pnr_splits_two_photons_half_the_time() {
        let e = BranchEnsemble::from_pure(PureState::fock([2], 2).unwrap());
        assert!((pnr_coincidence_probability(&e, 0).unwrap() - 0.5).abs() < 1e-15);
        let one = BranchEnsemble::from_pure(PureState::fock([1], 2).unwrap());
        assert_eq!(pnr_coincidence_probability(&one, 0).unwrap(), 0.0);
    }

    #[test]
    fn gain_measurement_reproduces_closed_form() {
        for &tau in &[0.05, 0.1, 0.5] {
            for &g in &[0.5, 1.0, 2.0, 3.0, 6.0] {
                let sim = measured_two_photon_gain(tau, g, &p110()).unwrap();
                let closed = two_photon_gain(tau, g).unwrap();
                assert!((sim - closed).abs() < 1e-9 * closed.max(1.0), "tau={tau} g={g}: {sim} vs {closed}");
            }
        }
        let off = simulate_gain_measurement(0.05, 2.0, false, &p110()).unwrap();
        assert!((off.rho22 - 0.0025).abs() < 1e-15);
        assert!((off.herald_probability - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn unit_gain_measurement_ratio() {
        let r = measured_two_photon_gain(0.2, 1.0, &HeraldPattern::new([0, 1, 1])).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }
}
