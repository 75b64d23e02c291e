//! Loss budget of the gain measurement and first-order Sobol indices.
//!
//! [`LossyGainModel`] places a pure-loss channel at every site of a
//! [`LossLayout`] and returns the measured two-photon gain, i.e. the ratio of
//! the amplifier-on and amplifier-off PNR estimates of the `|2>` population.
//! [`first_order_indices`] estimates `S_i = V_i / Var(f)` by Saltelli sampling.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{compile_circuit, default_tritter, fock_amplitude, ModeUnitary};
use crate::error::{check_closed, Error, Result};
use crate::fock::{basis_with_total, binomial};
use crate::scissor::{gain_to_transmittance, HeraldPattern, PnrEstimate, PNR_TWO_PHOTON_EFFICIENCY};

/// Default sampling range of every loss fraction.
pub const DEFAULT_LOSS_RANGE: (f64, f64) = (0.0, 0.5);
pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// Groups of loss sites, in the order they are traversed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LossRegion {
    PostPreparation,
    SizeMeasurement,
    PreQft,
    WithinQft,
    PreDetection,
}

impl LossRegion {
    pub const ALL: [LossRegion; 5] = [
        LossRegion::PostPreparation,
        LossRegion::SizeMeasurement,
        LossRegion::PreQft,
        LossRegion::WithinQft,
        LossRegion::PreDetection,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LossRegion::PostPreparation => "post-preparation",
            LossRegion::SizeMeasurement => "size-measurement",
            LossRegion::PreQft => "pre-qft",
            LossRegion::WithinQft => "within-qft",
            LossRegion::PreDetection => "pre-detection",
        }
    }
}

impl fmt::Display for LossRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optical position of a loss site.
///
/// "Input" is the attenuated `|2>` under test, "ancilla" the `|2>` resource of
/// the scissor. The input passes the `tau` channel between `InputSource` and
/// `InputPreSplit`. QFT and detector sites are indexed by interferometer mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossLocation {
    InputSource,
    InputPreSplit,
    /// Input arm into the QFT; used with the amplifier on.
    InputToQft,
    /// Input arm into the PNR stage; used with the amplifier off.
    InputToPnr,
    /// Amplified output into the PNR stage; used with the amplifier on.
    OutputToPnr,
    AncillaSource,
    AncillaPreSplit,
    /// Transmitted resource arm into the QFT.
    AncillaToQft,
    /// Between the two halves of the tritter.
    WithinQft(usize),
    Detector(usize),
}

impl LossLocation {
    pub fn region(&self) -> LossRegion {
        use LossLocation::*;
        match self {
            InputSource | AncillaSource => LossRegion::PostPreparation,
            InputToPnr | OutputToPnr => LossRegion::SizeMeasurement,
            InputPreSplit | InputToQft | AncillaPreSplit | AncillaToQft => LossRegion::PreQft,
            WithinQft(_) => LossRegion::WithinQft,
            Detector(_) => LossRegion::PreDetection,
        }
    }
}

impl fmt::Display for LossLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LossLocation::*;
        match self {
            InputSource => f.write_str("input-source"),
            InputPreSplit => f.write_str("input-pre-split"),
            InputToQft => f.write_str("input-to-qft"),
            InputToPnr => f.write_str("input-to-pnr"),
            OutputToPnr => f.write_str("output-to-pnr"),
            AncillaSource => f.write_str("ancilla-source"),
            AncillaPreSplit => f.write_str("ancilla-pre-split"),
            AncillaToQft => f.write_str("ancilla-to-qft"),
            WithinQft(m) => write!(f, "within-qft-{m}"),
            Detector(m) => write!(f, "detector-{m}"),
        }
    }
}

impl FromStr for LossLocation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use LossLocation::*;
        let indexed = |prefix: &str| -> Option<usize> {
            let m: usize = s.strip_prefix(prefix)?.parse().ok()?;
            (m < 3).then_some(m)
        };
        Ok(match s {
            "input-source" => InputSource,
            "input-pre-split" => InputPreSplit,
            "input-to-qft" => InputToQft,
            "input-to-pnr" => InputToPnr,
            "output-to-pnr" => OutputToPnr,
            "ancilla-source" => AncillaSource,
            "ancilla-pre-split" => AncillaPreSplit,
            "ancilla-to-qft" => AncillaToQft,
            _ => {
                if let Some(m) = indexed("within-qft-") {
                    WithinQft(m)
                } else if let Some(m) = indexed("detector-") {
                    Detector(m)
                } else {
                    return Err(Error::Usage(format!(
                        "unknown loss location {s:?}; expected input-source, input-pre-split, input-to-qft, \
                         input-to-pnr, output-to-pnr, ancilla-source, ancilla-pre-split, ancilla-to-qft, \
                         within-qft-<0..2> or detector-<0..2>"
                    )));
                }
            }
        })
    }
}

/// Ordered loss sites; variable `L_{i+1}` sits at `sites[i]`. Several sites
/// may share a location, in which case their transmissions multiply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossLayout {
    sites: Vec<LossLocation>,
}

impl Default for LossLayout {
    /// Fourteen sites:
    /// L1 input source, L2 input to PNR, L3 input pre-split, L4 ancilla source,
    /// L5 ancilla pre-split, L6 output to PNR, L7 input to QFT, L8 ancilla to
    /// QFT, L9-L11 within the QFT, L12-L14 herald detectors.
    fn default() -> Self {
        use LossLocation::*;
        LossLayout {
            sites: vec![
                InputSource,
                InputToPnr,
                InputPreSplit,
                AncillaSource,
                AncillaPreSplit,
                OutputToPnr,
                InputToQft,
                AncillaToQft,
                WithinQft(0),
                WithinQft(1),
                WithinQft(2),
                Detector(0),
                Detector(1),
                Detector(2),
            ],
        }
    }
}

impl LossLayout {
    pub fn new(sites: Vec<LossLocation>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Usage("loss layout needs at least one site".into()));
        }
        for s in &sites {
            if let LossLocation::WithinQft(m) | LossLocation::Detector(m) = s {
                if *m >= 3 {
                    return Err(Error::Usage(format!("loss site {s} refers to a mode beyond the tritter")));
                }
            }
        }
        Ok(LossLayout { sites })
    }

    pub fn dim(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[LossLocation] {
        &self.sites
    }

    /// `L1`, `L2`, ...
    pub fn label(&self, i: usize) -> String {
        format!("L{}", i + 1)
    }

    pub fn region(&self, i: usize) -> LossRegion {
        self.sites[i].region()
    }

    /// Variable indices belonging to each non-empty region.
    pub fn region_groups(&self) -> Vec<(LossRegion, Vec<usize>)> {
        LossRegion::ALL
            .iter()
            .map(|&r| (r, (0..self.dim()).filter(|&i| self.region(i) == r).collect::<Vec<_>>()))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }
}

/// Loss fractions, one per layout site, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    name: "loss",
                    value: v,
                    range: if i == usize::MAX { "" } else { "[0, 1]" },
                });
            }
        }
        Ok(LossVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        LossVector(vec![0.0; dim])
    }

    /// Zero everywhere except `value` at variable `index`.
    pub fn single(dim: usize, index: usize, value: f64) -> Result<Self> {
        let mut v = vec![0.0; dim];
        *v.get_mut(index).ok_or(Error::Dimension { expected: dim, found: index })? = value;
        LossVector::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Net transmission at every location.
#[derive(Clone, Copy, Debug)]
struct Transmissions {
    input_source: f64,
    input_pre_split: f64,
    input_to_qft: f64,
    input_to_pnr: f64,
    output_to_pnr: f64,
    ancilla_source: f64,
    ancilla_pre_split: f64,
    ancilla_to_qft: f64,
    within: [f64; 3],
    detector: [f64; 3],
}

impl Transmissions {
    fn from_losses(layout: &LossLayout, losses: &[f64]) -> Self {
        let mut t = Transmissions {
            input_source: 1.0,
            input_pre_split: 1.0,
            input_to_qft: 1.0,
            input_to_pnr: 1.0,
            output_to_pnr: 1.0,
            ancilla_source: 1.0,
            ancilla_pre_split: 1.0,
            ancilla_to_qft: 1.0,
            within: [1.0; 3],
            detector: [1.0; 3],
        };
        for (site, &l) in layout.sites().iter().zip(losses) {
            let slot = match site {
                LossLocation::InputSource => &mut t.input_source,
                LossLocation::InputPreSplit => &mut t.input_pre_split,
                LossLocation::InputToQft => &mut t.input_to_qft,
                LossLocation::InputToPnr => &mut t.input_to_pnr,
                LossLocation::OutputToPnr => &mut t.output_to_pnr,
                LossLocation::AncillaSource => &mut t.ancilla_source,
                LossLocation::AncillaPreSplit => &mut t.ancilla_pre_split,
                LossLocation::AncillaToQft => &mut t.ancilla_to_qft,
                LossLocation::WithinQft(m) => &mut t.within[*m],
                LossLocation::Detector(m) => &mut t.detector[*m],
            };
            *slot *= 1.0 - l;
        }
        t
    }
}

/// Binomial thinning `P(k of n survive)` for `n <= 2`.
fn thinning(n: u32, t: f64) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (k, slot) in p.iter_mut().enumerate().take(n as usize + 1) {
        let k = k as u32;
        *slot = binomial(n, k) * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32);
    }
    p
}

/// Dense transition matrices of one photon-number sector of the tritter halves.
#[derive(Clone, Debug)]
struct Sector {
    basis: Vec<[u32; 3]>,
    index: HashMap<[u32; 3], usize>,
    /// Row-major, `u[out * d + in]`.
    first: Vec<Complex64>,
    second: Vec<Complex64>,
}

const MAX_QFT_PHOTONS: u32 = 4;

/// The interferometer with losses between its halves and lossy
/// number-resolving herald detectors.
#[derive(Clone, Debug)]
struct HeraldStage {
    sectors: Vec<Sector>,
}

impl HeraldStage {
    fn new(first: &ModeUnitary, second: &ModeUnitary) -> Result<Self> {
        let mut sectors = Vec::new();
        for n in 0..=MAX_QFT_PHOTONS {
            let occs = basis_with_total(3, n);
            let basis: Vec<[u32; 3]> = occs.iter().map(|o| [o.get(0), o.get(1), o.get(2)]).collect();
            let index = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
            let d = occs.len();
            let mut u1 = vec![Complex64::new(0.0, 0.0); d * d];
            let mut u2 = u1.clone();
            for (o, out) in occs.iter().enumerate() {
                for (i, inp) in occs.iter().enumerate() {
                    u1[o * d + i] = fock_amplitude(first, inp, out)?;
                    u2[o * d + i] = fock_amplitude(second, inp, out)?;
                }
            }
            sectors.push(Sector {
                basis,
                index,
                first: u1,
                second: u2,
            });
        }
        Ok(HeraldStage { sectors })
    }

    /// Probability that `|s, a, 0>` at the interferometer input yields
    /// `pattern` at the detectors.
    fn herald_probability(&self, s: u32, a: u32, within: &[f64; 3], detector: &[f64; 3], pattern: &[u32; 3]) -> f64 {
        let n = s + a;
        let needed: u32 = pattern.iter().sum();
        if n < needed {
            return 0.0;
        }
        let sec = &self.sectors[n as usize];
        let d = sec.basis.len();
        let col = sec.index[&[s, a, 0]];
        let psi: Vec<Complex64> = (0..d).map(|o| sec.first[o * d + col]).collect();

        // Kraus amplitude of losing k of m photons at transmission t.
        let kraus = |m: u32, k: u32, t: f64| (binomial(m, k) * t.powi((m - k) as i32) * (1.0 - t).powi(k as i32)).sqrt();
        let detect = |m: &[u32; 3]| -> f64 {
            let mut w = 1.0;
            for j in 0..3 {
                if m[j] < pattern[j] {
                    return 0.0;
                }
                w *= kraus(m[j], m[j] - pattern[j], detector[j]).powi(2);
            }
            w
        };

        let mut total = 0.0;
        let max_lost = n - needed;
        for k0 in 0..=max_lost {
            for k1 in 0..=max_lost - k0 {
                for k2 in 0..=max_lost - k0 - k1 {
                    let k = [k0, k1, k2];
                    let out = &self.sectors[(n - k0 - k1 - k2) as usize];
                    let dm = out.basis.len();
                    let mut branch = vec![Complex64::new(0.0, 0.0); dm];
                    for (i, m) in sec.basis.iter().enumerate() {
                        if m[0] < k0 || m[1] < k1 || m[2] < k2 || psi[i] == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let c = (0..3).map(|j| kraus(m[j], k[j], within[j])).product::<f64>();
                        if c == 0.0 {
                            continue;
                        }
                        let dst = out.index[&[m[0] - k0, m[1] - k1, m[2] - k2]];
                        branch[dst] += psi[i] * c;
                    }
                    for (o, m) in out.basis.iter().enumerate() {
                        let w = detect(m);
                        if w == 0.0 {
                            continue;
                        }
                        let amp: Complex64 = (0..dm).map(|i| out.second[o * dm + i] * branch[i]).sum();
                        total += w * amp.norm_sqr();
                    }
                }
            }
        }
        total
    }
}

/// Gain-measurement model with a loss channel at every layout site.
///
/// Amplifier on: the attenuated input enters the QFT signal port, the
/// resource is split at `eta(g)` and the reflected arm is the output sent to
/// the PNR stage. Amplifier off: the input goes straight to the PNR stage and
/// the whole resource enters the QFT, so the heralds fire on the resource
/// alone. Both configurations herald on the same pattern.
#[derive(Clone, Debug)]
pub struct LossyGainModel {
    layout: LossLayout,
    stage: HeraldStage,
    pattern: [u32; 3],
}

impl LossyGainModel {
    pub fn new(layout: LossLayout) -> Result<Self> {
        let tritter = default_tritter();
        let first = compile_circuit(&tritter[..2], 3)?;
        let second = compile_circuit(&tritter[2..], 3)?;
        Ok(LossyGainModel {
            layout,
            stage: HeraldStage::new(&first, &second)?,
            pattern: [1, 1, 0],
        })
    }

    pub fn with_pattern(mut self, pattern: &HeraldPattern) -> Result<Self> {
        match pattern.counts() {
            &[a, b, c] if pattern.is_success() => self.pattern = [a, b, c],
            _ => return Err(Error::Usage(format!("{pattern} is not a two-photon success pattern"))),
        }
        Ok(self)
    }

    pub fn layout(&self) -> &LossLayout {
        &self.layout
    }

    fn check(&self, g: f64, tau: f64, losses: &[f64]) -> Result<()> {
        check_closed("tau", tau, 0.0, 1.0, "[0, 1]")?;
        gain_to_transmittance(g)?;
        if losses.len() != self.layout.dim() {
            return Err(Error::Dimension {
                expected: self.layout.dim(),
                found: losses.len(),
            });
        }
        for &l in losses {
            check_closed("loss", l, 0.0, 1.0, "[0, 1]")?;
        }
        Ok(())
    }

    /// PNR statistics of one configuration.
    pub fn configuration(&self, g: f64, tau: f64, losses: &[f64], amplifier_on: bool) -> Result<PnrEstimate> {
        self.check(g, tau, losses)?;
        let t = Transmissions::from_losses(&self.layout, losses);
        let mut table = [[None::<f64>; 3]; 3];
        let mut herald = |s: u32, a: u32| -> f64 {
            *table[s as usize][a as usize]
                .get_or_insert_with(|| self.stage.herald_probability(s, a, &t.within, &t.detector, &self.pattern))
        };
        let input_common = t.input_source * tau * t.input_pre_split;
        let resource = thinning(2, t.ancilla_source * t.ancilla_pre_split);

        // Joint probability of the herald and k photons in the output arm.
        let mut joint = [0.0; 3];
        let pnr_transmission;
        if amplifier_on {
            let eta = gain_to_transmittance(g)?;
            let signal = thinning(2, input_common * t.input_to_qft);
            for (s, &ps) in signal.iter().enumerate() {
                for (r, &pr) in resource.iter().enumerate() {
                    let split = thinning(r as u32, eta);
                    for (kept, &pk) in split.iter().enumerate().take(r + 1) {
                        let out = r - kept;
                        for (a, &pa) in thinning(kept as u32, t.ancilla_to_qft).iter().enumerate().take(kept + 1) {
                            let w = ps * pr * pk * pa;
                            if w > 0.0 {
                                joint[out] += w * herald(s as u32, a as u32);
                            }
                        }
                    }
                }
            }
            pnr_transmission = t.output_to_pnr;
        } else {
            let mut h = 0.0;
            for (r, &pr) in resource.iter().enumerate() {
                for (a, &pa) in thinning(r as u32, t.ancilla_to_qft).iter().enumerate().take(r + 1) {
                    h += pr * pa * herald(0, a as u32);
                }
            }
            // The input arm is independent of the heralds.
            let input = thinning(2, input_common);
            for k in 0..3 {
                joint[k] = h * input[k];
            }
            pnr_transmission = t.input_to_pnr;
        }
        let herald_probability: f64 = joint.iter().sum();
        if herald_probability == 0.0 {
            return Err(Error::Degenerate("heralding pattern never occurs".into()));
        }
        let fourfold_probability = joint[2] * pnr_transmission * pnr_transmission * PNR_TWO_PHOTON_EFFICIENCY;
        Ok(PnrEstimate {
            herald_probability,
            fourfold_probability,
            rho22: fourfold_probability / herald_probability / PNR_TWO_PHOTON_EFFICIENCY,
        })
    }

    /// Measured two-photon intensity gain `rho22(on) / rho22(off)`.
    pub fn gain(&self, g: f64, tau: f64, losses: &[f64]) -> Result<f64> {
        let on = self.configuration(g, tau, losses, true)?;
        let off = self.configuration(g, tau, losses, false)?;
        if off.rho22 == 0.0 {
            return Err(Error::Degenerate("no two-photon component reaches the PNR stage".into()));
        }
        Ok(on.rho22 / off.rho22)
    }
}

fn default_model() -> &'static LossyGainModel {
    static MODEL: OnceLock<LossyGainModel> = OnceLock::new();
    MODEL.get_or_init(|| LossyGainModel::new(LossLayout::default()).expect("default layout"))
}

/// [`LossyGainModel::gain`] with the default fourteen-site layout.
pub fn lossy_gain_model(g: f64, tau: f64, losses: &LossVector) -> Result<f64> {
    default_model().gain(g, tau, losses.as_slice())
}

/// Saltelli design: `a`, `b` and `ab[i]` (= `a` with column `i` from `b`),
/// each `n_base` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SaltelliSample {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub ab: Vec<Vec<Vec<f64>>>,
}

impl SaltelliSample {
    pub fn n_base(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.ab.len()
    }

    pub fn evaluation_count(&self) -> usize {
        self.n_base() * (self.dim() + 2)
    }
}

fn check_design(n_base: usize, bounds: &[(f64, f64)]) -> Result<()> {
    if n_base < 2 {
        return Err(Error::Usage(format!("n_base must be at least 2, got {n_base}")));
    }
    if bounds.is_empty() {
        return Err(Error::Usage("at least one input dimension is required".into()));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Usage(format!("invalid sampling range [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Uniform draws on `bounds` from a ChaCha8 stream seeded with `seed`;
/// `a` is filled row by row, then `b`.
pub fn saltelli_sample(n_base: usize, bounds: &[(f64, f64)], seed: u64) -> Result<SaltelliSample> {
    check_design(n_base, bounds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..n_base)
            .map(|_| bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
            .collect()
    };
    let a = draw(&mut rng);
    let b = draw(&mut rng);
    let ab = (0..bounds.len())
        .map(|i| {
            a.iter()
                .zip(&b)
                .map(|(ra, rb)| {
                    let mut row = ra.clone();
                    row[i] = rb[i];
                    row
                })
                .collect()
        })
        .collect();
    Ok(SaltelliSample { a, b, ab })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolConfig {
    pub n_base: usize,
    pub seed: u64,
    pub bounds: Vec<(f64, f64)>,
    pub bootstrap: usize,
}

impl SobolConfig {
    pub fn new(n_base: usize, seed: u64, bounds: Vec<(f64, f64)>) -> Self {
        SobolConfig {
            n_base,
            seed,
            bounds,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }

    /// The same range for all `dim` inputs.
    pub fn uniform(n_base: usize, seed: u64, dim: usize, range: (f64, f64)) -> Self {
        Self::new(n_base, seed, vec![range; dim])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolResult {
    pub indices: Vec<f64>,
    /// 95% half-widths, `1.96` bootstrap standard deviations.
    pub ci: Vec<f64>,
    pub n_base: usize,
    pub evaluations: usize,
    /// Sample variance of all model evaluations.
    pub variance: f64,
}

impl SobolResult {
    /// Variable indices sorted by decreasing index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.indices.len()).collect();
        order.sort_by(|&i, &j| self.indices[j].total_cmp(&self.indices[i]));
        order
    }

    /// Sum of indices per layout region.
    pub fn region_sums(&self, layout: &LossLayout) -> Vec<(LossRegion, f64)> {
        layout
            .region_groups()
            .into_iter()
            .map(|(r, members)| (r, members.iter().map(|&i| self.indices[i]).sum()))
            .collect()
    }
}

fn mean_variance(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n as f64 - 1.0))
}

/// `V_i / Var` over the given rows of the evaluation blocks
/// `[f(A), f(B), f(AB_1), ..., f(AB_D)]`. `None` when the variance vanishes.
///
/// `f(B)` is centered on the mean of the rows; the expectation is unchanged
/// but the estimator no longer picks up a `mean^2` variance term.
fn saltelli_estimate(f: &[f64], n: usize, d: usize, rows: &[usize]) -> Option<Vec<f64>> {
    let all = rows.iter().flat_map(|&j| (0..d + 2).map(move |block| f[block * n + j]));
    let (mean, var) = mean_variance(all);
    if !(var > 1e-24 * mean * mean) {
        return None;
    }
    let (fa, fb) = (&f[..n], &f[n..2 * n]);
    Some(
        (0..d)
            .map(|i| {
                let abi = &f[(2 + i) * n..(3 + i) * n];
                let v: f64 = rows.iter().map(|&j| (fb[j] - mean) * (abi[j] - fa[j])).sum::<f64>() / rows.len() as f64;
                v / var
            })
            .collect(),
    )
}

/// First-order indices from `config.n_base * (D + 2)` model evaluations.
///
/// Evaluations run in parallel; all reductions are sequential in row order,
/// so results are bitwise reproducible for a given seed.
pub fn first_order_indices<F>(model: F, config: &SobolConfig) -> Result<SobolResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let sample = saltelli_sample(config.n_base, &config.bounds, config.seed)?;
    let n = sample.n_base();
    let d = sample.dim();
    let points: Vec<&[f64]> = sample
        .a
        .iter()
        .chain(&sample.b)
        .chain(sample.ab.iter().flatten())
        .map(Vec::as_slice)
        .collect();
    let f: Vec<f64> = points.par_iter().map(|x| model(x)).collect::<Result<_>>()?;
    if let Some(bad) = f.iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!("model returned {bad}")));
    }
    let all_rows: Vec<usize> = (0..n).collect();
    let indices = saltelli_estimate(&f, n, d, &all_rows).ok_or_else(|| Error::Degenerate("model output has zero variance".into()))?;
    let (_, variance) = mean_variance(f.iter().copied());

    let resamples: Vec<Vec<f64>> = (0..config.bootstrap as u64)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r + 1);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            saltelli_estimate(&f, n, d, &rows)
        })
        .collect();
    let ci = (0..d)
        .map(|i| {
            if resamples.len() < 2 {
                return f64::NAN;
            }
            let (_, var) = mean_variance(resamples.iter().map(|s| s[i]));
            1.96 * var.sqrt()
        })
        .collect();

    Ok(SobolResult {
        indices,
        ci,
        n_base: n,
        evaluations: sample.evaluation_count(),
        variance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub g: f64,
    pub result: SobolResult,
}

/// Sobol indices of `model` over the loss variables at each gain.
/// `config.bounds` must have one range per layout site.
pub fn sensitivity_sweep(model: &LossyGainModel, gains: &[f64], tau: f64, config: &SobolConfig) -> Result<Vec<SweepPoint>> {
    if config.bounds.len() != model.layout().dim() {
        return Err(Error::Dimension {
            expected: model.layout().dim(),
            found: config.bounds.len(),
        });
    }
    for &(lo, hi) in &config.bounds {
        check_closed("loss range", lo, 0.0, 1.0, "[0, 1]")?;
        check_closed("loss range", hi, 0.0, 1.0, "[0, 1]")?;
    }
    gains
        .iter()
        .map(|&g| {
            model.gain(g, tau, &vec![0.0; model.layout().dim()])?;
            let result = first_order_indices(|l| model.gain(g, tau, l), config)?;
            Ok(SweepPoint { g, result })
        })
        .collect()
}
