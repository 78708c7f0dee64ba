//! Local threshold search by cyclic coordinate ascent.
//!
//! Each sweep visits the thresholds in order and moves one at a time to the
//! golden-section optimum between its neighbours, in the posterior coordinate.
//! A move is kept only if it improves the score, so the per-sweep score log is
//! nondecreasing. Three starts are tried (uniform, equal-mass, seeded random)
//! and the best end point wins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cell_probabilities, uniform_posterior_quantizer, QuantizerSpec, StatisticDomain};
use crate::divergence::chernoff_discrete;
use crate::error::{Error, Result};
use crate::fusion::{exact_error, TandemSystem};
use crate::models::ConditionalModel;
use crate::numeric::scalar::{bisect_root, golden_section_min};

#[derive(Debug, Clone, Copy)]
pub enum Objective<'a> {
    /// Maximize the Chernoff information of the symbol PMFs.
    ChernoffInfo,
    /// Minimize the exact Bayes error of the tandem system with this node 2 and prior.
    BayesError {
        node2: &'a ConditionalModel,
        prior1: f64,
    },
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub max_sweeps: usize,
    /// Stop when a sweep improves the score by less than this.
    pub sweep_tol: f64,
    /// Golden-section bracket width per coordinate.
    pub coordinate_tol: f64,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 100,
            sweep_tol: 1e-10,
            coordinate_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Uniform,
    EqualMass,
    Random,
}

#[derive(Debug, Clone)]
pub struct OptimizedQuantizer {
    pub spec: QuantizerSpec,
    /// Chernoff information, or Bayes error, depending on the objective.
    pub objective_value: f64,
    /// Score after each sweep of the winning start, starting with the initial
    /// point. The score is the Chernoff information or the negated Bayes error.
    pub ascent_log: Vec<f64>,
    pub start: Start,
    /// The model cannot be learned; `spec` is the uniform quantizer, untouched.
    pub non_learnable: bool,
}

/// Keeps thresholds strictly inside their neighbours' interval.
const EDGE_MARGIN: f64 = 1e-9;

impl Objective<'_> {
    fn score(&self, model: &ConditionalModel, thresholds: &[f64]) -> f64 {
        let eval = || -> Result<f64> {
            let spec = QuantizerSpec::new(StatisticDomain::PosteriorStat, thresholds.to_vec())?;
            match *self {
                Objective::ChernoffInfo => {
                    Ok(chernoff_discrete(&cell_probabilities(model, &spec)?).value)
                }
                Objective::BayesError { node2, prior1 } => {
                    let system = TandemSystem::new(model.clone(), node2.clone(), spec, prior1)?;
                    Ok(-exact_error(&system)?.pe_exact)
                }
            }
        };
        eval().unwrap_or(f64::NEG_INFINITY)
    }

    fn natural(&self, score: f64) -> f64 {
        match self {
            Objective::ChernoffInfo => score,
            Objective::BayesError { .. } => -score,
        }
    }

    fn prior1(&self) -> f64 {
        match *self {
            Objective::ChernoffInfo => 0.5,
            Objective::BayesError { prior1, .. } => prior1,
        }
    }
}

/// Thresholds splitting the prior-mixture law of the posterior statistic into k equal-mass cells.
fn equal_mass_start(model: &ConditionalModel, k: usize, prior1: f64) -> Result<Vec<f64>> {
    let mass_below = |t: f64| -> f64 {
        let spec =
            QuantizerSpec::new(StatisticDomain::PosteriorStat, vec![t]).expect("t in (0, 1)");
        match cell_probabilities(model, &spec) {
            Ok(pmf) => prior1 * pmf.p()[0] + (1.0 - prior1) * pmf.q()[0],
            Err(_) => f64::NAN,
        }
    };
    let mut out: Vec<f64> = Vec::with_capacity(k - 1);
    for j in 1..k {
        let target = j as f64 / k as f64;
        let lo = out.last().copied().unwrap_or(0.0) + EDGE_MARGIN;
        let hi = 1.0 - EDGE_MARGIN * (k - j) as f64;
        let t = bisect_root(|t| mass_below(t) - target, lo, hi);
        if !(t > lo - EDGE_MARGIN && t < hi) || t.is_nan() {
            return Err(Error::Numerical {
                context: "optimize_thresholds",
                detail: format!("equal-mass start failed at level {j}"),
            });
        }
        out.push(t.max(lo));
    }
    Ok(out)
}

fn random_start(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut t: Vec<f64> = (1..k).map(|_| rng.random_range(0.01..0.99)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > 4.0 * EDGE_MARGIN) {
            return t;
        }
    }
}

struct Ascent {
    thresholds: Vec<f64>,
    score: f64,
    log: Vec<f64>,
}

fn coordinate_ascent(
    model: &ConditionalModel,
    objective: &Objective<'_>,
    mut thresholds: Vec<f64>,
    opts: &OptimizeOptions,
) -> Ascent {
    let mut score = objective.score(model, &thresholds);
    let mut log = vec![score];
    for _ in 0..opts.max_sweeps {
        let before = score;
        for j in 0..thresholds.len() {
            let lo = if j == 0 { 0.0 } else { thresholds[j - 1] } + EDGE_MARGIN;
            let hi = thresholds.get(j + 1).copied().unwrap_or(1.0) - EDGE_MARGIN;
            if hi - lo <= opts.coordinate_tol {
                continue;
            }
            let mut trial = thresholds.clone();
            let best = golden_section_min(
                |t| {
                    trial[j] = t;
                    -objective.score(model, &trial)
                },
                lo,
                hi,
                opts.coordinate_tol,
            );
            if -best.value > score {
                thresholds[j] = best.x;
                score = -best.value;
            }
        }
        log.push(score);
        if score - before < opts.sweep_tol {
            break;
        }
    }
    Ascent {
        thresholds,
        score,
        log,
    }
}

/// Locally optimal k-level posterior-statistic quantizer for `objective`.
pub fn optimize_thresholds(
    model: &ConditionalModel,
    k: usize,
    objective: Objective<'_>,
    opts: &OptimizeOptions,
) -> Result<OptimizedQuantizer> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "threshold optimization needs k ≥ 2, got {k}"
        )));
    }
    if let Objective::BayesError { prior1, .. } = objective {
        if !(prior1 > 0.0 && prior1 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "prior1 must lie in (0, 1), got {prior1}"
            )));
        }
    }
    let uniform = uniform_posterior_quantizer(k)?;
    if model.is_non_learnable() {
        let score = objective.score(model, uniform.thresholds());
        return Ok(OptimizedQuantizer {
            spec: uniform,
            objective_value: objective.natural(score),
            ascent_log: vec![score],
            start: Start::Uniform,
            non_learnable: true,
        });
    }

    let mut starts = vec![(Start::Uniform, uniform.thresholds().to_vec())];
    if let Ok(t) = equal_mass_start(model, k, objective.prior1()) {
        starts.push((Start::EqualMass, t));
    }
    starts.push((Start::Random, random_start(k, opts.seed)));

    let mut best: Option<(Start, Ascent)> = None;
    for (start, init) in starts {
        let run = coordinate_ascent(model, &objective, init, opts);
        if best.as_ref().is_none_or(|(_, b)| run.score > b.score) {
            best = Some((start, run));
        }
    }
    let (start, run) = best.expect("at least one start");
    Ok(OptimizedQuantizer {
        spec: QuantizerSpec::new(StatisticDomain::PosteriorStat, run.thresholds)?,
        objective_value: objective.natural(run.score),
        ascent_log: run.log,
        start,
        non_learnable: false,
    })
}
