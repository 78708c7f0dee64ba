//! The tandem system: node 1 quantizes its likelihood ratio, node 2 fuses the
//! received symbol with its own observation by a Bayes likelihood ratio test.
//!
//! By conditional independence the fused statistic factorizes,
//! `Λ(u, x₂) = (p_u / q_u) · Λ₂(x₂)`, and node 2 decides class 1 iff
//! `Λ(u, x₂) ≥ π₀ / π₁` (ties go to class 1).

mod experiment;
mod exponent;

pub use experiment::{
    quantizer_sweep, ExperimentRow, ExperimentTable, QuantizerMode, RowResult, MONOTONE_GAP,
};
pub use exponent::{iid_error_exponent, ExponentPoint, MAX_EXPONENT_STATES};

use std::cell::RefCell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ConditionalModel, Label, LabeledSample};
use crate::numeric::quadrature::{integrate, QuadOptions};
use crate::quantize::{cell_probabilities, DiscreteCondPmf, QuantizerSpec, StatisticDomain};

/// Absolute tolerance of the quadratures behind [`exact_error`] for non-monotone node-2 families.
pub const ERROR_QUAD_TOL: f64 = 1e-10;

/// Samples per Monte Carlo work unit; each unit owns an independent RNG stream.
const MC_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TandemSystem {
    node1: ConditionalModel,
    node2: ConditionalModel,
    quantizer: QuantizerSpec,
    prior1: f64,
    pmf: DiscreteCondPmf,
}

impl TandemSystem {
    pub fn new(
        node1: ConditionalModel,
        node2: ConditionalModel,
        quantizer: QuantizerSpec,
        prior1: f64,
    ) -> Result<Self> {
        if !(prior1 > 0.0 && prior1 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "prior1 must lie in (0, 1), got {prior1}"
            )));
        }
        let pmf = cell_probabilities(&node1, &quantizer)?;
        Ok(Self {
            node1,
            node2,
            quantizer,
            prior1,
            pmf,
        })
    }

    pub fn node1(&self) -> &ConditionalModel {
        &self.node1
    }

    pub fn node2(&self) -> &ConditionalModel {
        &self.node2
    }

    pub fn quantizer(&self) -> &QuantizerSpec {
        &self.quantizer
    }

    pub fn prior1(&self) -> f64 {
        self.prior1
    }

    pub fn prior0(&self) -> f64 {
        1.0 - self.prior1
    }

    /// Symbol PMFs `(p, q)` induced by the quantizer on node 1.
    pub fn pmf(&self) -> &DiscreteCondPmf {
        &self.pmf
    }

    /// Bayes threshold π₀ / π₁ on the fused likelihood ratio.
    pub fn decision_threshold(&self) -> f64 {
        self.prior0() / self.prior1
    }

    /// The same system with class labels exchanged: both models swapped, the
    /// quantizer mirrored onto the inverted statistic, and the prior replaced
    /// by its complement.
    pub fn relabeled(&self) -> Result<Self> {
        let thresholds: Vec<f64> = self
            .quantizer
            .thresholds()
            .iter()
            .rev()
            .map(|&t| match self.quantizer.domain() {
                StatisticDomain::PosteriorStat => 1.0 - t,
                StatisticDomain::LikelihoodRatio => 1.0 / t,
            })
            .collect();
        let quantizer = QuantizerSpec::new(self.quantizer.domain(), thresholds)?;
        Self::new(
            self.node1.swapped(),
            self.node2.swapped(),
            quantizer,
            self.prior0(),
        )
    }

    /// `p_u / q_u` with the unreachable-symbol convention `0/0 = 1`.
    fn symbol_ratio(&self, u: usize) -> f64 {
        let p = self.pmf.prob(Label::One, u);
        let q = self.pmf.prob(Label::Zero, u);
        match (p > 0.0, q > 0.0) {
            (false, false) => 1.0,
            (true, false) => f64::INFINITY,
            _ => p / q,
        }
    }

    fn check_symbol(&self, u: usize) -> Result<()> {
        if u == 0 || u > self.quantizer.k() {
            return Err(Error::InvalidArgument(format!(
                "symbol {u} outside 1..={}",
                self.quantizer.k()
            )));
        }
        Ok(())
    }

    /// `Λ(u, x₂) = (p_u / q_u) · Λ₂(x₂)`.
    ///
    /// `0 · ∞` products (evidence that rules out both classes) evaluate to 1.
    pub fn fused_llr(&self, u: usize, x2: f64) -> Result<f64> {
        self.check_symbol(u)?;
        Ok(self.fused_unchecked(u, x2))
    }

    fn fused_unchecked(&self, u: usize, x2: f64) -> f64 {
        let ratio = self.symbol_ratio(u);
        let lr2 = self.node2.likelihood_ratio(x2);
        let product = ratio * lr2;
        if product.is_nan() {
            1.0
        } else {
            product
        }
    }

    pub fn decide(&self, u: usize, x2: f64) -> Result<Label> {
        self.check_symbol(u)?;
        Ok(self.decide_unchecked(u, x2))
    }

    fn decide_unchecked(&self, u: usize, x2: f64) -> Label {
        if self.fused_unchecked(u, x2) >= self.decision_threshold() {
            Label::One
        } else {
            Label::Zero
        }
    }

    /// Quantizes `x₁` and runs the fusion rule.
    pub fn classify(&self, x1: f64, x2: f64) -> Label {
        let u = self.quantizer.symbol(&self.node1, x1);
        self.decide_unchecked(u, x2)
    }
}

/// Error probabilities of the fusion rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `π₀·pfa + π₁·pmd`.
    pub pe_exact: f64,
    /// P(decide 1 | Y=0).
    pub pfa: f64,
    /// P(decide 0 | Y=1).
    pub pmd: f64,
    pub pe_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
}

impl ErrorReport {
    fn from_rates(prior1: f64, pfa: f64, pmd: f64) -> Self {
        Self {
            pe_exact: (1.0 - prior1) * pfa + prior1 * pmd,
            pfa,
            pmd,
            pe_mc: None,
            mc_stderr: None,
        }
    }

    pub fn with_monte_carlo(mut self, mc: &MonteCarloEstimate) -> Self {
        self.pe_mc = Some(mc.pe);
        self.mc_stderr = Some(mc.stderr);
        self
    }
}

/// `(P(decide 1 | Y=0), P(decide 0 | Y=1))` for the node-2 test `ln Λ₂(x) ≥ level`.
fn node2_decision_rates(node2: &ConditionalModel, level: f64) -> Result<(f64, f64)> {
    if level == f64::NEG_INFINITY {
        return Ok((1.0, 0.0));
    }
    if level == f64::INFINITY {
        return Ok((0.0, 1.0));
    }
    if node2.is_non_learnable() {
        return Ok(if 0.0 >= level { (1.0, 0.0) } else { (0.0, 1.0) });
    }
    if let Some(direction) = node2.monotone_direction() {
        let t = node2.llr_crossings(level)[0];
        return Ok(if direction > 0.0 {
            (node2.sf(Label::Zero, t), node2.cdf(Label::One, t))
        } else {
            (node2.cdf(Label::Zero, t), node2.sf(Label::One, t))
        });
    }

    // Kinks of min(π₀ q f₀, π₁ p f₁) sit at the level crossings; integrate each smooth piece.
    let (lo, hi) = node2.support();
    let mut edges = vec![lo];
    edges.extend(
        node2
            .llr_crossings(level)
            .into_iter()
            .filter(|&x| x > lo && x < hi),
    );
    edges.push(hi);
    let opts = QuadOptions {
        abs_tol: ERROR_QUAD_TOL / edges.len() as f64,
        ..Default::default()
    };
    let (mut false_alarm, mut miss) = (0.0, 0.0);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        if node2.log_likelihood_ratio(0.5 * (a + b)) >= level {
            false_alarm += integrate(|x| node2.pdf(Label::Zero, x), a, b, opts)?.value;
        } else {
            miss += integrate(|x| node2.pdf(Label::One, x), a, b, opts)?.value;
        }
    }
    Ok((false_alarm.clamp(0.0, 1.0), miss.clamp(0.0, 1.0)))
}

/// Bayes error of the `(U, X₂)` fusion rule:
/// `Σ_u ∫ min(π₀ q_u f₀(x₂), π₁ p_u f₁(x₂)) dx₂`.
///
/// Monotone node-2 families use the per-symbol threshold and Gaussian CDFs;
/// other families integrate between the likelihood-ratio crossings.
pub fn exact_error(system: &TandemSystem) -> Result<ErrorReport> {
    let log_threshold = system.decision_threshold().ln();
    let pmf = system.pmf();
    let (mut pfa, mut pmd) = (0.0, 0.0);
    for u in 1..=pmf.k() {
        let p = pmf.prob(Label::One, u);
        let q = pmf.prob(Label::Zero, u);
        if p == 0.0 && q == 0.0 {
            continue;
        }
        let level = match (p > 0.0, q > 0.0) {
            (true, false) => f64::NEG_INFINITY,
            (false, true) => f64::INFINITY,
            _ => log_threshold - (p.ln() - q.ln()),
        };
        let (fa, md) =
            node2_decision_rates(system.node2(), level).map_err(|e| Error::Numerical {
                context: "exact_error",
                detail: format!("symbol {u} (p = {p}, q = {q}): {e}"),
            })?;
        pfa += q * fa;
        pmd += p * md;
    }
    Ok(ErrorReport::from_rates(system.prior1(), pfa, pmd))
}

/// Bayes error of fusing the raw `X₁` (no quantization) with `X₂`, the floor
/// that no quantizer can beat.
pub fn unquantized_error(
    node1: &ConditionalModel,
    node2: &ConditionalModel,
    prior1: f64,
) -> Result<ErrorReport> {
    if !(prior1 > 0.0 && prior1 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "prior1 must lie in (0, 1), got {prior1}"
        )));
    }
    let log_threshold = ((1.0 - prior1) / prior1).ln();
    let (lo, hi) = node1.support();
    let opts = QuadOptions {
        abs_tol: 1e-12,
        ..Default::default()
    };
    let failure = RefCell::new(None);
    let rate = |class: Label| {
        integrate(
            |x1| {
                let level = log_threshold - node1.log_likelihood_ratio(x1);
                match node2_decision_rates(node2, level) {
                    Ok((fa, md)) => {
                        let r = if class == Label::Zero { fa } else { md };
                        node1.pdf(class, x1) * r
                    }
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
            opts,
        )
        .map(|r| r.value)
    };
    let pfa = rate(Label::Zero)?;
    let pmd = rate(Label::One)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(ErrorReport::from_rates(prior1, pfa, pmd))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub n: u64,
    pub errors: u64,
    /// Empirical error frequency.
    pub pe: f64,
    /// Binomial standard error `√(p̂(1−p̂)/n)`.
    pub stderr: f64,
    pub class0: u64,
    pub false_alarms: u64,
    pub misses: u64,
}

/// Simulates `n` labeled draws and counts fusion errors.
///
/// Work is split into fixed-size chunks, chunk `i` drawing from ChaCha8 stream
/// `i` of `seed`, so the estimate depends only on `(n, seed)` and not on the
/// thread count.
pub fn monte_carlo_error(system: &TandemSystem, n: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Monte Carlo needs n ≥ 1 samples".into(),
        ));
    }
    let chunks = n.div_ceil(MC_CHUNK);
    let counts: Vec<(u64, u64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let len = MC_CHUNK.min(n - chunk * MC_CHUNK);
            let (mut class0, mut false_alarms, mut misses) = (0, 0, 0);
            for _ in 0..len {
                let s =
                    LabeledSample::draw(system.node1(), system.node2(), system.prior1(), &mut rng);
                let decision = system.classify(s.x1, s.x2);
                match (s.y, decision) {
                    (Label::Zero, Label::One) => false_alarms += 1,
                    (Label::One, Label::Zero) => misses += 1,
                    _ => {}
                }
                if s.y == Label::Zero {
                    class0 += 1;
                }
            }
            (class0, false_alarms, misses)
        })
        .collect();
    let (class0, false_alarms, misses) = counts
        .iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    let errors = false_alarms + misses;
    let pe = errors as f64 / n as f64;
    Ok(MonteCarloEstimate {
        n,
        errors,
        pe,
        stderr: (pe * (1.0 - pe) / n as f64).sqrt(),
        class0,
        false_alarms,
        misses,
    })
}
