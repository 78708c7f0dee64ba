//! Class-conditional observation models for a single scalar feature.
//!
//! A [`ConditionalModel`] pairs `f(x | Y=0)` with `f(x | Y=1)`. Every family is
//! built from Gaussian components, so densities, CDFs and likelihood-ratio level
//! crossings are available in closed form or by bracketed root finding.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::scalar::bisect_root;
use crate::numeric::{log_add_exp, std_normal_cdf, std_normal_log_pdf, std_normal_sf};

/// Truncation half-width, in units of the largest scale parameter.
pub const SUPPORT_SIGMAS: f64 = 12.0;

/// Grid resolution used to bracket likelihood-ratio level crossings of
/// non-monotone families.
const CROSSING_GRID: usize = 4096;

/// Binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Label::Zero),
            1 => Ok(Label::One),
            other => Err(Error::InvalidArgument(format!(
                "class label must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Label::Zero => 0,
            Label::One => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Zero => Label::One,
            Label::One => Label::Zero,
        }
    }

    fn index(self) -> usize {
        self.bit() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Parameters per class: `[mean, sd]`, with the same `sd` for both classes.
    GaussianEqualVariance,
    /// Parameters per class: `[mean, sd]`.
    GaussianGeneral,
    /// Parameters per class: `[weight, mean_a, sd_a, mean_b, sd_b]`; the second
    /// component has weight `1 - weight`.
    TwoComponentMixture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Gaussian {
    mean: f64,
    sd: f64,
}

impl Gaussian {
    fn log_pdf(&self, x: f64) -> f64 {
        std_normal_log_pdf((x - self.mean) / self.sd) - self.sd.ln()
    }

    fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sd)
    }

    fn sf(&self, x: f64) -> f64 {
        std_normal_sf((x - self.mean) / self.sd)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.sd * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Density {
    Normal(Gaussian),
    Mixture {
        weight: f64,
        first: Gaussian,
        second: Gaussian,
    },
}

impl Density {
    fn components(&self) -> Vec<Gaussian> {
        match *self {
            Density::Normal(g) => vec![g],
            Density::Mixture { first, second, .. } => vec![first, second],
        }
    }

    fn log_pdf(&self, x: f64) -> f64 {
        match *self {
            Density::Normal(g) => g.log_pdf(x),
            Density::Mixture {
                weight,
                first,
                second,
            } => log_add_exp(
                weight.ln() + first.log_pdf(x),
                (1.0 - weight).ln() + second.log_pdf(x),
            ),
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Density::Normal(g) => g.cdf(x),
            Density::Mixture {
                weight,
                first,
                second,
            } => weight * first.cdf(x) + (1.0 - weight) * second.cdf(x),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        match *self {
            Density::Normal(g) => g.sf(x),
            Density::Mixture {
                weight,
                first,
                second,
            } => weight * first.sf(x) + (1.0 - weight) * second.sf(x),
        }
    }

    fn median_guess(&self) -> f64 {
        match *self {
            Density::Normal(g) => g.mean,
            Density::Mixture {
                weight,
                first,
                second,
            } => weight * first.mean + (1.0 - weight) * second.mean,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Density::Normal(g) => g.sample(rng),
            Density::Mixture {
                weight,
                first,
                second,
            } => {
                if rng.random::<f64>() < weight {
                    first.sample(rng)
                } else {
                    second.sample(rng)
                }
            }
        }
    }
}

fn parse_density(family: Family, params: &[f64], which: &str) -> Result<Density> {
    if let Some(bad) = params.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "{which}: non-finite parameter {bad}"
        )));
    }
    let gaussian = |mean: f64, sd: f64| -> Result<Gaussian> {
        if sd > 0.0 {
            Ok(Gaussian { mean, sd })
        } else {
            Err(Error::InvalidModel(format!(
                "{which}: scale parameters must be strictly positive, got {sd}"
            )))
        }
    };
    match family {
        Family::GaussianEqualVariance | Family::GaussianGeneral => match params {
            [mean, sd] => Ok(Density::Normal(gaussian(*mean, *sd)?)),
            _ => Err(Error::InvalidModel(format!(
                "{which}: expected [mean, sd], got {} values",
                params.len()
            ))),
        },
        Family::TwoComponentMixture => match params {
            [w, m1, s1, m2, s2] => {
                if !(0.0..=1.0).contains(w) {
                    return Err(Error::InvalidModel(format!(
                        "{which}: mixture weight must lie in [0, 1], got {w}"
                    )));
                }
                Ok(Density::Mixture {
                    weight: *w,
                    first: gaussian(*m1, *s1)?,
                    second: gaussian(*m2, *s2)?,
                })
            }
            _ => Err(Error::InvalidModel(format!(
                "{which}: expected [weight, mean_a, sd_a, mean_b, sd_b], got {} values",
                params.len()
            ))),
        },
    }
}

/// Serialized form of [`ConditionalModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub family: Family,
    pub params0: Vec<f64>,
    pub params1: Vec<f64>,
}

/// Class-conditional density pair `(f(x | Y=0), f(x | Y=1))`.
///
/// Immutable after construction; parameters are validated once in [`ConditionalModel::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelParams", into = "ModelParams")]
pub struct ConditionalModel {
    family: Family,
    params: [Vec<f64>; 2],
    density: [Density; 2],
}

impl TryFrom<ModelParams> for ConditionalModel {
    type Error = Error;

    fn try_from(raw: ModelParams) -> Result<Self> {
        ConditionalModel::new(raw.family, raw.params0, raw.params1)
    }
}

impl From<ConditionalModel> for ModelParams {
    fn from(model: ConditionalModel) -> Self {
        let [params0, params1] = model.params;
        ModelParams {
            family: model.family,
            params0,
            params1,
        }
    }
}

/// Outcome of a likelihood-ratio evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrEval {
    pub value: f64,
    /// Both densities vanish at the point; `value` is set to 1 by convention.
    pub indeterminate: bool,
}

impl ConditionalModel {
    pub fn new(family: Family, params0: Vec<f64>, params1: Vec<f64>) -> Result<Self> {
        let d0 = parse_density(family, &params0, "params0")?;
        let d1 = parse_density(family, &params1, "params1")?;
        if family == Family::GaussianEqualVariance && params0[1] != params1[1] {
            return Err(Error::InvalidModel(format!(
                "gaussian_equal_variance requires equal scales, got {} and {}",
                params0[1], params1[1]
            )));
        }
        Ok(Self {
            family,
            params: [params0, params1],
            density: [d0, d1],
        })
    }

    pub fn gaussian_equal_variance(mean0: f64, mean1: f64, sd: f64) -> Result<Self> {
        Self::new(
            Family::GaussianEqualVariance,
            vec![mean0, sd],
            vec![mean1, sd],
        )
    }

    pub fn gaussian(mean0: f64, sd0: f64, mean1: f64, sd1: f64) -> Result<Self> {
        Self::new(Family::GaussianGeneral, vec![mean0, sd0], vec![mean1, sd1])
    }

    /// Each class is `[weight, mean_a, sd_a, mean_b, sd_b]`.
    pub fn mixture(class0: [f64; 5], class1: [f64; 5]) -> Result<Self> {
        Self::new(
            Family::TwoComponentMixture,
            class0.to_vec(),
            class1.to_vec(),
        )
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self, y: Label) -> &[f64] {
        &self.params[y.index()]
    }

    /// Same family with the class labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            family: self.family,
            params: [self.params[1].clone(), self.params[0].clone()],
            density: [self.density[1], self.density[0]],
        }
    }

    /// Both classes have the same density; no partition separates them.
    pub fn is_non_learnable(&self) -> bool {
        self.params[0] == self.params[1]
    }

    /// `+1` when Λ is strictly increasing in x, `-1` when strictly decreasing,
    /// `None` for non-monotone or constant likelihood ratios.
    pub fn monotone_direction(&self) -> Option<f64> {
        match (self.family, self.density) {
            (Family::GaussianEqualVariance, [Density::Normal(g0), Density::Normal(g1)])
                if g0.mean != g1.mean =>
            {
                Some((g1.mean - g0.mean).signum())
            }
            _ => None,
        }
    }

    /// Truncated support `[min μ − 12·max σ, max μ + 12·max σ]` over all components of both classes.
    pub fn support(&self) -> (f64, f64) {
        let comps: Vec<Gaussian> = self.density.iter().flat_map(|d| d.components()).collect();
        let max_sd = comps.iter().map(|g| g.sd).fold(0.0, f64::max);
        let lo = comps.iter().map(|g| g.mean).fold(f64::INFINITY, f64::min);
        let hi = comps
            .iter()
            .map(|g| g.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo - SUPPORT_SIGMAS * max_sd, hi + SUPPORT_SIGMAS * max_sd)
    }

    pub fn log_pdf(&self, y: Label, x: f64) -> f64 {
        self.density[y.index()].log_pdf(x)
    }

    pub fn pdf(&self, y: Label, x: f64) -> f64 {
        self.log_pdf(y, x).exp()
    }

    /// `P(X ≤ x | Y = y)`.
    pub fn cdf(&self, y: Label, x: f64) -> f64 {
        self.density[y.index()].cdf(x)
    }

    /// `P(X > x | Y = y)`.
    pub fn sf(&self, y: Label, x: f64) -> f64 {
        self.density[y.index()].sf(x)
    }

    /// `P(a < X ≤ b | Y = y)`, using whichever tail keeps the difference well conditioned.
    pub fn interval_mass(&self, y: Label, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let d = &self.density[y.index()];
        let mass = if a >= d.median_guess() {
            d.sf(a) - d.sf(b)
        } else {
            d.cdf(b) - d.cdf(a)
        };
        mass.max(0.0)
    }

    /// ln Λ(x); `NaN` only when both densities vanish.
    pub fn log_likelihood_ratio(&self, x: f64) -> f64 {
        self.log_pdf(Label::One, x) - self.log_pdf(Label::Zero, x)
    }

    pub fn likelihood_ratio_eval(&self, x: f64) -> LrEval {
        let l1 = self.log_pdf(Label::One, x);
        let l0 = self.log_pdf(Label::Zero, x);
        if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
            return LrEval {
                value: 1.0,
                indeterminate: true,
            };
        }
        if l0 == f64::NEG_INFINITY {
            return LrEval {
                value: f64::INFINITY,
                indeterminate: false,
            };
        }
        LrEval {
            value: (l1 - l0).exp(),
            indeterminate: false,
        }
    }

    /// Λ(x) = f(x | Y=1) / f(x | Y=0).
    pub fn likelihood_ratio(&self, x: f64) -> f64 {
        self.likelihood_ratio_eval(x).value
    }

    /// Λ(x) / (1 + Λ(x)), the posterior of class 1 under equal priors.
    pub fn posterior_stat(&self, x: f64) -> f64 {
        posterior_from_lr(self.likelihood_ratio(x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, y: Label, rng: &mut R) -> f64 {
        self.density[y.index()].sample(rng)
    }

    /// Sorted points where ln Λ(x) changes sign relative to `level`.
    ///
    /// Gaussian families are solved in closed form (ln Λ is at most quadratic);
    /// mixtures are bracketed on a fixed grid over [`Self::support`] and refined
    /// by bisection. The grid depends only on the model, so two calls with
    /// the same level always return identical points.
    pub fn llr_crossings(&self, level: f64) -> Vec<f64> {
        if !level.is_finite() || self.is_non_learnable() {
            return Vec::new();
        }
        match self.density {
            [Density::Normal(g0), Density::Normal(g1)] => quadratic_llr_crossings(g0, g1, level),
            _ => self.grid_llr_crossings(level),
        }
    }

    fn grid_llr_crossings(&self, level: f64) -> Vec<f64> {
        let (lo, hi) = self.support();
        let step = (hi - lo) / CROSSING_GRID as f64;
        let h = |x: f64| self.log_likelihood_ratio(x) - level;
        let mut roots = Vec::new();
        let mut x_prev = lo;
        let mut above_prev = h(lo) >= 0.0;
        for i in 1..=CROSSING_GRID {
            let x = lo + step * i as f64;
            let above = h(x) >= 0.0;
            if above != above_prev {
                roots.push(bisect_root(h, x_prev, x));
            }
            x_prev = x;
            above_prev = above;
        }
        roots
    }
}

fn quadratic_llr_crossings(g0: Gaussian, g1: Gaussian, level: f64) -> Vec<f64> {
    let v0 = g0.sd * g0.sd;
    let v1 = g1.sd * g1.sd;
    let a = 0.5 / v0 - 0.5 / v1;
    let b = g1.mean / v1 - g0.mean / v0;
    let c =
        (g0.sd / g1.sd).ln() - 0.5 * g1.mean * g1.mean / v1 + 0.5 * g0.mean * g0.mean / v0 - level;
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        // A tangent root does not change the sign of ln Λ − level.
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        let r = (-c / a).sqrt();
        (-r, r)
    } else {
        (q / a, c / q)
    };
    let mut roots = vec![r1, r2];
    roots.sort_by(f64::total_cmp);
    roots
}

/// Maps Λ ∈ [0, ∞] to Λ / (1 + Λ) ∈ [0, 1].
pub fn posterior_from_lr(lr: f64) -> f64 {
    if lr == f64::INFINITY {
        1.0
    } else {
        lr / (1.0 + lr)
    }
}

/// One draw of `(Y, X₁, X₂)` with `X₁` and `X₂` independent given `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub y: Label,
    pub x1: f64,
    pub x2: f64,
}

impl LabeledSample {
    pub fn draw<R: Rng + ?Sized>(
        node1: &ConditionalModel,
        node2: &ConditionalModel,
        prior1: f64,
        rng: &mut R,
    ) -> Self {
        let y = if rng.random::<f64>() < prior1 {
            Label::One
        } else {
            Label::Zero
        };
        let x1 = node1.sample(y, rng);
        let x2 = node2.sample(y, rng);
        Self { y, x1, x2 }
    }
}
