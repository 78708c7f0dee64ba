//! Sweep over quantizer sizes: Chernoff information and Bayes error per k.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exact_error, monte_carlo_error, ErrorReport, TandemSystem};
use crate::divergence::{chernoff_continuous, chernoff_discrete, ChernoffResult};
use crate::error::{Error, Result};
use crate::models::ConditionalModel;
use crate::quantize::{
    optimize_thresholds, refine, uniform_posterior_quantizer, Objective, OptimizeOptions,
    QuantizerSpec,
};

/// Consecutive values must differ by more than this to count as a strict step.
pub const MONOTONE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerMode {
    /// Uniform posterior quantizers, each refining the previous one.
    UniformNested,
    /// Thresholds chosen per k to minimize the system Bayes error.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub spec: QuantizerSpec,
    pub chernoff_discrete: ChernoffResult,
    /// Symbol term plus node-2 term.
    pub chernoff_system: f64,
    pub error: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub k: usize,
    pub outcome: Result<ExperimentRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    /// One entry per requested k, in request order.
    pub rows: Vec<RowResult>,
    /// System Chernoff information strictly increasing along k.
    pub chernoff_monotone: bool,
    /// Exact Bayes error strictly decreasing along k.
    pub pe_monotone: bool,
}

fn build_specs(
    node1: &ConditionalModel,
    node2: &ConditionalModel,
    prior1: f64,
    k_list: &[usize],
    mode: QuantizerMode,
) -> Result<Vec<Result<QuantizerSpec>>> {
    match mode {
        QuantizerMode::UniformNested => {
            for w in k_list.windows(2) {
                if w[1] % w[0] != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "uniform_nested needs each k to divide the next, got {} then {}",
                        w[0], w[1]
                    )));
                }
            }
            let mut specs: Vec<Result<QuantizerSpec>> = Vec::with_capacity(k_list.len());
            let mut prev = uniform_posterior_quantizer(k_list[0])?;
            specs.push(Ok(prev.clone()));
            for w in k_list.windows(2) {
                prev = refine(&prev, w[1] / w[0])?;
                specs.push(Ok(prev.clone()));
            }
            Ok(specs)
        }
        QuantizerMode::Optimized => Ok(k_list
            .par_iter()
            .map(|&k| {
                if k == 1 {
                    return uniform_posterior_quantizer(1);
                }
                let objective = Objective::BayesError { node2, prior1 };
                optimize_thresholds(node1, k, objective, &OptimizeOptions::default())
                    .map(|o| o.spec)
            })
            .collect()),
    }
}

/// For each k: the quantizer, its symbol Chernoff information, the system
/// Chernoff information, the exact Bayes error and (when `monte_carlo` is
/// `Some((n, seed))`) a Monte Carlo estimate with the same seed for every k.
pub fn quantizer_sweep(
    node1: &ConditionalModel,
    node2: &ConditionalModel,
    prior1: f64,
    k_list: &[usize],
    mode: QuantizerMode,
    monte_carlo: Option<(u64, u64)>,
) -> Result<ExperimentTable> {
    if k_list.is_empty() {
        return Err(Error::InvalidArgument("k_list must not be empty".into()));
    }
    if k_list[0] < 1 || k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "k_list must be strictly ascending positive integers, got {k_list:?}"
        )));
    }
    if !(prior1 > 0.0 && prior1 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "prior1 must lie in (0, 1), got {prior1}"
        )));
    }
    let node2_chernoff = chernoff_continuous(node2)?;
    let specs = build_specs(node1, node2, prior1, k_list, mode)?;

    let rows: Vec<RowResult> = k_list
        .par_iter()
        .zip(specs)
        .map(|(&k, spec)| {
            let outcome = spec.and_then(|spec| {
                let system = TandemSystem::new(node1.clone(), node2.clone(), spec.clone(), prior1)?;
                let chernoff = chernoff_discrete(system.pmf());
                let mut error = exact_error(&system)?;
                if let Some((n, seed)) = monte_carlo {
                    error = error.with_monte_carlo(&monte_carlo_error(&system, n, seed)?);
                }
                Ok(ExperimentRow {
                    k,
                    spec,
                    chernoff_discrete: chernoff,
                    chernoff_system: chernoff.value + node2_chernoff.value,
                    error,
                })
            });
            RowResult { k, outcome }
        })
        .collect();

    let ok: Vec<&ExperimentRow> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let all_ok = ok.len() == rows.len();
    let chernoff_monotone = all_ok
        && ok
            .windows(2)
            .all(|w| w[1].chernoff_system - w[0].chernoff_system > MONOTONE_GAP);
    let pe_monotone = all_ok
        && ok
            .windows(2)
            .all(|w| w[0].error.pe_exact - w[1].error.pe_exact > MONOTONE_GAP);
    Ok(ExperimentTable {
        rows,
        chernoff_monotone,
        pe_monotone,
    })
}
