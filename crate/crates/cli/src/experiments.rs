//! Runs a resolved config and collects the rows of its CSV table.

use anyhow::{Context, Result};
use qscissor::analysis::{fit_visibility, fringe_scan, hom_circuit_coincidence, hom_coincidence, negativity_curve};
use qscissor::scissor::{expected_output, measured_two_photon_gain, two_photon_gain, ScissorAmplifier};
use qscissor::sensitivity::{sensitivity_sweep, LossLayout, LossLocation, LossyGainModel, SobolConfig};
use qscissor::{Complex64, HeraldPattern, MixedState, OccupationVector, PureState};
use serde_json::{json, Map, Value};

use crate::config::{
    ExperimentConfig, FringeParams, GainSweepParams, HomParams, NegativityParams, Params, ScissorParams, SobolParams,
};

/// A CSV table plus experiment-specific summary fields for the metadata file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Map<String, Value>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

// Adding 0.0 turns -0 into 0.
fn num(x: f64) -> String {
    format!("{}", x + 0.0)
}

fn patterns(names: &[String]) -> Result<Vec<HeraldPattern>> {
    names
        .iter()
        .map(|p| p.parse::<HeraldPattern>().with_context(|| format!("pattern {p:?}")))
        .collect()
}

pub fn run(config: &ExperimentConfig) -> Result<Table> {
    match &config.params {
        Params::Scissor(p) => scissor(p),
        Params::GainSweep(p) => gain_sweep(p),
        Params::Fringes(p) => fringes(p),
        Params::Negativity(p) => negativity(p),
        Params::Hom(p) => hom(p),
        Params::Sobol(p) => sobol(p),
    }
}

fn scissor(p: &ScissorParams) -> Result<Table> {
    let raw: Vec<Complex64> = p
        .input
        .iter()
        .enumerate()
        .map(|(k, &re)| Complex64::new(re, p.input_imag.get(k).copied().unwrap_or(0.0)))
        .collect();
    let state = PureState::single_mode(&raw, p.cutoff)?.normalize()?;
    let coefficients: Vec<Complex64> = (0..raw.len())
        .map(|k| state.amplitude(&OccupationVector::from([k as u32])))
        .collect();
    let input = MixedState::pure(state)?;
    let device = ScissorAmplifier::two_photon().with_max_input_cutoff(p.cutoff);

    let mut table = Table::new(&[
        "g",
        "pattern",
        "success_probability",
        "truncation_weight",
        "p0",
        "p1",
        "p2",
        "fidelity",
    ]);
    for &g in &p.g {
        for pattern in patterns(&p.patterns)? {
            let out = device
                .run(&input, g, &pattern)
                .with_context(|| format!("scissor at g = {g}, pattern {}", pattern.compact()))?;
            let target = expected_output(&coefficients, g, &pattern)?;
            let pop = |n: u32| out.output.population(&OccupationVector::from([n]));
            table.push(vec![
                num(g),
                pattern.compact(),
                num(out.success_probability),
                num(out.truncation_weight),
                num(pop(0)),
                num(pop(1)),
                num(pop(2)),
                num(out.output.fidelity_with_pure(&target)?),
            ]);
        }
    }
    Ok(table)
}

fn gain_sweep(p: &GainSweepParams) -> Result<Table> {
    let pattern = HeraldPattern::success_patterns()[0].clone();
    let mut table = Table::new(&["tau", "g", "G2_closed_form", "G2_simulated"]);
    for &tau in &p.tau {
        for &g in &p.g {
            let closed = two_photon_gain(tau, g).with_context(|| format!("closed-form gain at tau = {tau}, g = {g}"))?;
            let simulated = measured_two_photon_gain(tau, g, &pattern)
                .with_context(|| format!("simulated gain at tau = {tau}, g = {g}"))?;
            table.push(vec![num(tau), num(g), num(closed), num(simulated)]);
        }
    }
    Ok(table)
}

fn fringes(p: &FringeParams) -> Result<Table> {
    let mut table = Table::new(&["pattern", "phi", "rate"]);
    let mut fits = Map::new();
    for pattern in patterns(&p.patterns)? {
        let scan = fringe_scan(p.sigma, p.g, &pattern, &p.phi)?;
        let fit = fit_visibility(&scan)?;
        for (phi, rate) in scan.phases.iter().zip(&scan.values) {
            table.push(vec![pattern.compact(), num(*phi), num(*rate)]);
        }
        fits.insert(
            pattern.compact(),
            json!({
                "wavenumber": scan.wavenumber,
                "visibility": fit.visibility,
                "offset": fit.offset,
                "amplitude": fit.amplitude,
                "mean": fit.mean,
                "degenerate": fit.degenerate,
            }),
        );
    }
    table.summary.insert("fits".into(), Value::Object(fits));
    Ok(table)
}

fn negativity(p: &NegativityParams) -> Result<Table> {
    let mut table = Table::new(&["sigma", "g", "E_N_pre", "E_N_post"]);
    for &sigma in &p.sigma {
        for point in negativity_curve(sigma, &p.g)? {
            table.push(vec![num(sigma), num(point.g), num(point.pre), num(point.post)]);
        }
    }
    Ok(table)
}

fn hom(p: &HomParams) -> Result<Table> {
    let mut table = Table::new(&["theta", "coincidence_formula", "coincidence_circuit"]);
    for &theta in &p.theta {
        table.push(vec![num(theta), num(hom_coincidence(theta)), num(hom_circuit_coincidence(theta)?)]);
    }
    Ok(table)
}

fn sobol(p: &SobolParams) -> Result<Table> {
    let seed = p.seed.context("sobol needs a seed")?;
    let sites = p
        .layout
        .iter()
        .map(|s| s.parse::<LossLocation>())
        .collect::<qscissor::Result<Vec<_>>>()?;
    let layout = LossLayout::new(sites)?;
    let model = LossyGainModel::new(layout.clone())?;
    let mut config = SobolConfig::uniform(p.n_base, seed, layout.dim(), (p.loss_min, p.loss_max));
    config.bootstrap = p.bootstrap;
    let sweep = sensitivity_sweep(&model, &p.g, p.tau, &config)?;

    let mut table = Table::new(&["g", "variable", "location", "region", "S", "ci"]);
    let mut per_gain = Vec::new();
    for point in &sweep {
        let r = &point.result;
        for i in 0..layout.dim() {
            table.push(vec![
                num(point.g),
                layout.label(i),
                layout.sites()[i].to_string(),
                layout.region(i).name().to_string(),
                num(r.indices[i]),
                num(r.ci[i]),
            ]);
        }
        let regions: Map<String, Value> = r
            .region_sums(&layout)
            .into_iter()
            .map(|(region, s)| (region.name().to_string(), json!(s)))
            .collect();
        per_gain.push(json!({
            "g": point.g,
            "variance": r.variance,
            "ranking": r.ranking().into_iter().map(|i| layout.label(i)).collect::<Vec<_>>(),
            "region_sums": regions,
        }));
    }
    table.summary.insert("evaluations_per_gain".into(), json!(sweep.first().map(|s| s.result.evaluations)));
    table.summary.insert("gains".into(), Value::Array(per_gain));
    Ok(table)
}
