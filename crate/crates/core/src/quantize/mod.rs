//! k-level quantization of the node-1 likelihood-ratio statistic.
//!
//! A [`QuantizerSpec`] holds `k − 1` strictly increasing thresholds on either
//! Λ itself or the posterior statistic Λ/(1+Λ). Symbol `j` covers the half-open
//! cell `[b_{j−1}, b_j)` with `b₀ = −∞` and `b_k = +∞`.

mod optimize;

pub use optimize::{optimize_thresholds, Objective, OptimizeOptions, OptimizedQuantizer};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ConditionalModel, Label};

/// Tolerance on the per-class sums of a [`DiscreteCondPmf`].
pub const PMF_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticDomain {
    LikelihoodRatio,
    PosteriorStat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantizer {
    k: usize,
    domain: StatisticDomain,
    thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuantizer", into = "RawQuantizer")]
pub struct QuantizerSpec {
    k: usize,
    domain: StatisticDomain,
    thresholds: Vec<f64>,
}

impl TryFrom<RawQuantizer> for QuantizerSpec {
    type Error = Error;

    fn try_from(raw: RawQuantizer) -> Result<Self> {
        let spec = QuantizerSpec::new(raw.domain, raw.thresholds)?;
        if spec.k != raw.k {
            return Err(Error::InvalidQuantizer(format!(
                "k = {} but {} thresholds given (expected k − 1)",
                raw.k,
                spec.thresholds.len()
            )));
        }
        Ok(spec)
    }
}

impl From<QuantizerSpec> for RawQuantizer {
    fn from(spec: QuantizerSpec) -> Self {
        RawQuantizer {
            k: spec.k,
            domain: spec.domain,
            thresholds: spec.thresholds,
        }
    }
}

impl QuantizerSpec {
    /// Builds a `thresholds.len() + 1` level quantizer.
    ///
    /// Posterior thresholds must lie in (0, 1); likelihood-ratio thresholds in (0, ∞).
    pub fn new(domain: StatisticDomain, thresholds: Vec<f64>) -> Result<Self> {
        for w in thresholds.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidQuantizer(format!(
                    "thresholds must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let in_range = |t: f64| match domain {
            StatisticDomain::PosteriorStat => t > 0.0 && t < 1.0,
            StatisticDomain::LikelihoodRatio => t > 0.0 && t.is_finite(),
        };
        if let Some(bad) = thresholds.iter().find(|t| !in_range(**t)) {
            return Err(Error::InvalidQuantizer(format!(
                "threshold {bad} outside the open range of the {domain:?} domain"
            )));
        }
        Ok(Self {
            k: thresholds.len() + 1,
            domain,
            thresholds,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn domain(&self) -> StatisticDomain {
        self.domain
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Symbol in `1..=k` for a statistic value in this spec's domain.
    pub fn apply(&self, statistic: f64) -> usize {
        self.thresholds.partition_point(|&b| b <= statistic) + 1
    }

    /// The statistic this spec cuts, evaluated at an observation.
    pub fn statistic(&self, model: &ConditionalModel, x: f64) -> f64 {
        match self.domain {
            StatisticDomain::LikelihoodRatio => model.likelihood_ratio(x),
            StatisticDomain::PosteriorStat => model.posterior_stat(x),
        }
    }

    /// Quantizes an observation: `apply(statistic(x))`.
    pub fn symbol(&self, model: &ConditionalModel, x: f64) -> usize {
        self.apply(self.statistic(model, x))
    }

    /// Thresholds expressed as levels of ln Λ.
    pub fn llr_levels(&self) -> Vec<f64> {
        self.thresholds
            .iter()
            .map(|&t| match self.domain {
                StatisticDomain::LikelihoodRatio => t.ln(),
                StatisticDomain::PosteriorStat => t.ln() - (1.0 - t).ln(),
            })
            .collect()
    }

    /// Cell boundaries in the posterior coordinate, including 0 and 1.
    fn posterior_edges(&self) -> Vec<f64> {
        let inner = self.thresholds.iter().map(|&t| match self.domain {
            StatisticDomain::PosteriorStat => t,
            StatisticDomain::LikelihoodRatio => t / (1.0 + t),
        });
        std::iter::once(0.0)
            .chain(inner)
            .chain(std::iter::once(1.0))
            .collect()
    }
}

/// `{1/k, 2/k, …, (k−1)/k}` on the posterior statistic.
pub fn uniform_posterior_quantizer(k: usize) -> Result<QuantizerSpec> {
    if k < 1 {
        return Err(Error::InvalidArgument(
            "quantizer needs k ≥ 1 levels".into(),
        ));
    }
    let thresholds = (1..k).map(|j| j as f64 / k as f64).collect();
    QuantizerSpec::new(StatisticDomain::PosteriorStat, thresholds)
}

/// Splits every cell of `spec` into `rho` nested subcells.
///
/// Finite cells are split uniformly in the spec's own coordinate. The unbounded
/// top cell of a likelihood-ratio spec is split uniformly in the posterior
/// coordinate. Original thresholds are kept bit-for-bit, so refined symbol `i`
/// always lies inside coarse symbol [`coarse_symbol`]`(i, rho)`.
pub fn refine(spec: &QuantizerSpec, rho: usize) -> Result<QuantizerSpec> {
    if rho < 2 {
        return Err(Error::InvalidArgument(format!(
            "refinement factor must be ≥ 2, got {rho}"
        )));
    }
    let split = |lo: f64, hi: f64, out: &mut Vec<f64>| {
        out.extend((1..rho).map(|i| lo + (hi - lo) * (i as f64 / rho as f64)));
    };
    let mut thresholds = Vec::with_capacity(spec.k * rho - 1);
    match spec.domain {
        StatisticDomain::PosteriorStat => {
            let edges = spec.posterior_edges();
            for (i, w) in edges.windows(2).enumerate() {
                if i > 0 {
                    thresholds.push(w[0]);
                }
                split(w[0], w[1], &mut thresholds);
            }
        }
        StatisticDomain::LikelihoodRatio => {
            let mut lower = 0.0;
            for &b in &spec.thresholds {
                split(lower, b, &mut thresholds);
                thresholds.push(b);
                lower = b;
            }
            let s0 = lower / (1.0 + lower);
            let mut tail = Vec::with_capacity(rho - 1);
            split(s0, 1.0, &mut tail);
            thresholds.extend(tail.into_iter().map(|s| s / (1.0 - s)));
        }
    }
    QuantizerSpec::new(spec.domain, thresholds)
}

/// Coarse symbol containing refined symbol `i` (both 1-based): ⌈i/ρ⌉.
pub fn coarse_symbol(i: usize, rho: usize) -> usize {
    i.div_ceil(rho)
}

/// Paired symbol PMFs: `p_j = P(U=j | Y=1)`, `q_j = P(U=j | Y=0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCondPmf {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DiscreteCondPmf {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "pmf pair needs equal nonzero lengths, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        for (name, v) in [("p", &p), ("q", &q)] {
            if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidArgument(format!(
                    "{name} has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > PMF_SUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{name} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self { p, q })
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Exchanges the roles of the two classes.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }

    /// Probability of symbol `u` (1-based) under class `y`.
    pub fn prob(&self, y: Label, u: usize) -> f64 {
        match y {
            Label::One => self.p[u - 1],
            Label::Zero => self.q[u - 1],
        }
    }
}

/// Induced symbol probabilities of `spec` applied to node observations from `model`.
///
/// The real line is cut at every crossing of ln Λ with a threshold level; each
/// resulting piece maps to a single symbol, and its class masses come from
/// CDF differences. Zero-probability cells are kept.
pub fn cell_probabilities(
    model: &ConditionalModel,
    spec: &QuantizerSpec,
) -> Result<DiscreteCondPmf> {
    let levels = spec.llr_levels();
    let mut cuts: Vec<f64> = levels
        .iter()
        .flat_map(|&l| model.llr_crossings(l))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let symbol_at = |x: f64| -> Result<usize> {
        let llr = model.log_likelihood_ratio(x);
        if llr.is_nan() {
            return Err(Error::Numerical {
                context: "cell_probabilities",
                detail: format!("likelihood ratio undefined at piece representative {x}"),
            });
        }
        Ok(levels.partition_point(|&l| l <= llr) + 1)
    };

    let mut p = vec![0.0; spec.k()];
    let mut q = vec![0.0; spec.k()];
    let mut lower = f64::NEG_INFINITY;
    for i in 0..=cuts.len() {
        let upper = cuts.get(i).copied().unwrap_or(f64::INFINITY);
        let rep = match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (false, true) => upper - 1.0,
            (true, false) => lower + 1.0,
            (false, false) => 0.5 * (model.support().0 + model.support().1),
        };
        let j = symbol_at(rep)? - 1;
        p[j] += model.interval_mass(Label::One, lower, upper);
        q[j] += model.interval_mass(Label::Zero, lower, upper);
        lower = upper;
    }
    DiscreteCondPmf::new(p, q).map_err(|e| Error::Numerical {
        context: "cell_probabilities",
        detail: e.to_string(),
    })
}

/// Sums consecutive blocks of `rho` symbols.
pub fn coarsen_pmf(fine: &DiscreteCondPmf, rho: usize) -> Result<DiscreteCondPmf> {
    if rho == 0 || !fine.k().is_multiple_of(rho) {
        return Err(Error::InvalidArgument(format!(
            "cannot coarsen {} symbols in blocks of {rho}",
            fine.k()
        )));
    }
    let block = |v: &[f64]| v.chunks(rho).map(|c| c.iter().sum()).collect::<Vec<f64>>();
    Ok(DiscreteCondPmf {
        p: block(&fine.p),
        q: block(&fine.q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::std_normal_cdf;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_shift() -> ConditionalModel {
        ConditionalModel::gaussian_equal_variance(0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn apply_follows_half_open_cells() {
        let spec = QuantizerSpec::new(StatisticDomain::LikelihoodRatio, vec![1.0]).unwrap();
        assert_eq!(spec.apply(0.3), 1);
        assert_eq!(spec.apply(1.0), 2);
        let four = uniform_posterior_quantizer(4).unwrap();
        assert_eq!(four.apply(0.6), 3);
        assert_eq!(four.apply(0.0), 1);
        assert_eq!(four.apply(1.0), 4);
        assert_eq!(four.apply(0.75), 4);
    }

    #[test]
    fn uniform_quantizer_thresholds() {
        assert_eq!(uniform_posterior_quantizer(2).unwrap().thresholds(), &[0.5]);
        assert_eq!(
            uniform_posterior_quantizer(4).unwrap().thresholds(),
            &[0.25, 0.5, 0.75]
        );
        let one = uniform_posterior_quantizer(1).unwrap();
        assert!(one.thresholds().is_empty());
        assert_eq!(one.apply(0.9), 1);
        assert!(uniform_posterior_quantizer(0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(QuantizerSpec::new(StatisticDomain::PosteriorStat, vec![0.5, 0.5]).is_err());
        assert!(QuantizerSpec::new(StatisticDomain::PosteriorStat, vec![0.7, 0.2]).is_err());
        assert!(QuantizerSpec::new(StatisticDomain::PosteriorStat, vec![1.0]).is_err());
        assert!(QuantizerSpec::new(StatisticDomain::LikelihoodRatio, vec![0.5, 4.0]).is_ok());
        let bad_k = r#"{"k":3,"domain":"posterior_stat","thresholds":[0.5]}"#;
        assert!(serde_json::from_str::<QuantizerSpec>(bad_k).is_err());
        let ok = r#"{"k":2,"domain":"posterior_stat","thresholds":[0.5]}"#;
        assert_eq!(serde_json::from_str::<QuantizerSpec>(ok).unwrap().k(), 2);
    }

    #[test]
    fn binary_cells_of_unit_shift() {
        let pmf =
            cell_probabilities(&unit_shift(), &uniform_posterior_quantizer(2).unwrap()).unwrap();
        let lo = std_normal_cdf(-0.5);
        let hi = std_normal_cdf(0.5);
        assert_abs_diff_eq!(pmf.q()[0], hi, epsilon = 1e-14);
        assert_abs_diff_eq!(pmf.q()[1], lo, epsilon = 1e-14);
        assert_abs_diff_eq!(pmf.p()[0], lo, epsilon = 1e-14);
        assert_abs_diff_eq!(pmf.p()[1], hi, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 0.691_462_461_274_013, epsilon = 1e-12);
    }

    #[test]
    fn non_learnable_model_gives_identical_pmfs() {
        let flat = ConditionalModel::gaussian_equal_variance(0.4, 0.4, 1.0).unwrap();
        for k in [1, 2, 3, 8] {
            let pmf = cell_probabilities(&flat, &uniform_posterior_quantizer(k).unwrap()).unwrap();
            assert_eq!(pmf.p(), pmf.q());
        }
    }

    #[test]
    fn decreasing_ratio_model_cells() {
        // Class 1 to the left: Λ decreases in x.
        let m = ConditionalModel::gaussian_equal_variance(1.0, 0.0, 1.0).unwrap();
        let pmf = cell_probabilities(&m, &uniform_posterior_quantizer(2).unwrap()).unwrap();
        assert_abs_diff_eq!(pmf.p()[1], std_normal_cdf(0.5), epsilon = 1e-14);
        assert_abs_diff_eq!(pmf.q()[1], std_normal_cdf(-0.5), epsilon = 1e-14);
    }

    #[test]
    fn refine_examples() {
        let fine = refine(&uniform_posterior_quantizer(2).unwrap(), 2).unwrap();
        assert_eq!(fine, uniform_posterior_quantizer(4).unwrap());
        assert_eq!(coarse_symbol(1, 2), 1);
        assert_eq!(coarse_symbol(2, 2), 1);
        assert_eq!(coarse_symbol(3, 2), 2);
        assert_eq!(coarse_symbol(6, 3), 2);
        assert!(refine(&fine, 1).is_err());

        let lr = QuantizerSpec::new(StatisticDomain::LikelihoodRatio, vec![0.5, 2.0]).unwrap();
        let lr_fine = refine(&lr, 3).unwrap();
        assert_eq!(lr_fine.k(), 9);
        assert_eq!(lr_fine.thresholds()[2], 0.5);
        assert_eq!(lr_fine.thresholds()[5], 2.0);
    }

    #[test]
    fn coarsen_examples() {
        let fine =
            DiscreteCondPmf::new(vec![0.1, 0.2, 0.3, 0.4], vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let coarse = coarsen_pmf(&fine, 2).unwrap();
        assert_abs_diff_eq!(coarse.p()[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(coarse.p()[1], 0.7, epsilon = 1e-15);
        let all = coarsen_pmf(&fine, 4).unwrap();
        assert_abs_diff_eq!(all.p()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(all.q()[0], 1.0, epsilon = 1e-15);
        assert!(coarsen_pmf(&fine, 3).is_err());
    }

    #[test]
    fn pmf_validation() {
        assert!(DiscreteCondPmf::new(vec![0.5, 0.6], vec![0.5, 0.5]).is_err());
        assert!(DiscreteCondPmf::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteCondPmf::new(vec![-0.1, 1.1], vec![0.5, 0.5]).is_err());
    }

    fn arb_model() -> impl Strategy<Value = ConditionalModel> {
        prop_oneof![
            (-2.0..2.0f64, -2.0..2.0f64, 0.3..3.0f64)
                .prop_map(|(a, b, s)| ConditionalModel::gaussian_equal_variance(a, b, s).unwrap()),
            (-2.0..2.0f64, 0.3..3.0f64, -2.0..2.0f64, 0.3..3.0f64)
                .prop_map(|(a, s, b, t)| ConditionalModel::gaussian(a, s, b, t).unwrap()),
            (0.05..0.95f64, -2.0..2.0f64, 0.05..0.95f64, -2.0..2.0f64).prop_map(|(w, a, v, b)| {
                ConditionalModel::mixture([w, a, 1.0, a + 1.5, 0.7], [v, b, 0.8, b - 1.0, 1.3])
                    .unwrap()
            }),
        ]
    }

    fn arb_spec() -> impl Strategy<Value = QuantizerSpec> {
        prop::collection::btree_set(1u32..999, 0..6).prop_map(|set| {
            QuantizerSpec::new(
                StatisticDomain::PosteriorStat,
                set.into_iter().map(|v| v as f64 / 1000.0).collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cells_sum_to_one(model in arb_model(), spec in arb_spec()) {
            let pmf = cell_probabilities(&model, &spec).unwrap();
            prop_assert!((pmf.p().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!((pmf.q().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn refinement_is_consistent(model in arb_model(), spec in arb_spec(), rho in 2usize..5) {
            let fine = refine(&spec, rho).unwrap();
            for s in [0.0, 0.013, 0.37, 0.5, 0.81, 0.999, 1.0] {
                prop_assert_eq!(coarse_symbol(fine.apply(s), rho), spec.apply(s));
            }
            let coarse = cell_probabilities(&model, &spec).unwrap();
            let merged = coarsen_pmf(&cell_probabilities(&model, &fine).unwrap(), rho).unwrap();
            for j in 0..spec.k() {
                prop_assert!((merged.p()[j] - coarse.p()[j]).abs() < 1e-12);
                prop_assert!((merged.q()[j] - coarse.q()[j]).abs() < 1e-12);
            }
        }

        #[test]
        fn partition_returns_exactly_one_symbol(spec in arb_spec(), s in 0.0..=1.0f64) {
            let j = spec.apply(s);
            prop_assert!(j >= 1 && j <= spec.k());
            let t = spec.thresholds();
            if j > 1 { prop_assert!(t[j - 2] <= s); }
            if j < spec.k() { prop_assert!(s < t[j - 1]); }
        }
    }
}
