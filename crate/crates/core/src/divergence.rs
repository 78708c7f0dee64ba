//! Chernoff information and KL divergence between class-conditional laws.
//!
//! `C(f₁ ‖ f₀) = −ln min_{λ∈(0,1)} Σ p_j^{1−λ} q_j^λ` for symbol PMFs, and the
//! same with an integral for densities. The Chernoff coefficient
//! `g(λ) = Σ p^{1−λ} q^λ` is convex in λ (each term is log-convex), so the inner
//! minimization is a golden-section search over `[1e-9, 1 − 1e-9]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::TandemSystem;
use crate::models::{ConditionalModel, Label};
use crate::numeric::quadrature::{integrate, QuadOptions};
use crate::numeric::scalar::golden_section_min;
use crate::quantize::DiscreteCondPmf;

pub const LAMBDA_MIN: f64 = 1e-9;
pub const LAMBDA_MAX: f64 = 1.0 - 1e-9;
/// Final bracket width of the λ search.
pub const LAMBDA_WIDTH: f64 = 1e-12;
/// Absolute tolerance of every density integral in this module.
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffResult {
    /// Chernoff information in nats; `+∞` for disjoint supports.
    pub value: f64,
    pub lambda_star: f64,
    /// `min_λ g(λ)`, in `[0, 1]`.
    pub inner_min: f64,
    pub iterations: usize,
}

impl ChernoffResult {
    fn from_inner_min(inner_min: f64, lambda_star: f64, iterations: usize) -> Self {
        // Hölder gives g ≤ 1; anything above is rounding.
        let inner_min = inner_min.clamp(0.0, 1.0);
        Self {
            value: -inner_min.ln(),
            lambda_star,
            inner_min,
            iterations,
        }
    }

    fn zero() -> Self {
        Self {
            value: 0.0,
            lambda_star: 0.5,
            inner_min: 1.0,
            iterations: 0,
        }
    }
}

/// How the inner minimization over λ is carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSolver {
    GoldenSection,
    /// Exhaustive scan with the given step; slow, kept for cross-checking.
    Grid {
        step: f64,
    },
}

fn minimize_over_lambda<G: FnMut(f64) -> f64>(mut g: G, solver: LambdaSolver) -> ChernoffResult {
    match solver {
        LambdaSolver::GoldenSection => {
            let m = golden_section_min(&mut g, LAMBDA_MIN, LAMBDA_MAX, LAMBDA_WIDTH);
            ChernoffResult::from_inner_min(m.value, m.x, m.iterations)
        }
        LambdaSolver::Grid { step } => {
            let steps = ((LAMBDA_MAX - LAMBDA_MIN) / step).ceil() as usize;
            let mut best = (LAMBDA_MIN, g(LAMBDA_MIN));
            for i in 1..=steps {
                let lambda = (LAMBDA_MIN + step * i as f64).min(LAMBDA_MAX);
                let v = g(lambda);
                if v < best.1 {
                    best = (lambda, v);
                }
            }
            ChernoffResult::from_inner_min(best.1, best.0, steps + 1)
        }
    }
}

/// Pairs `(p_j, ln(q_j / p_j))` over symbols where both masses are positive.
/// Terms with a zero mass contribute nothing for interior λ.
fn overlapping_terms(pmf: &DiscreteCondPmf) -> Vec<(f64, f64)> {
    pmf.p()
        .iter()
        .zip(pmf.q())
        .filter(|(&p, &q)| p > 0.0 && q > 0.0)
        .map(|(&p, &q)| (p, q.ln() - p.ln()))
        .collect()
}

/// `g(λ) = Σ_j p_j^{1−λ} q_j^λ`.
pub fn chernoff_coefficient(pmf: &DiscreteCondPmf, lambda: f64) -> f64 {
    overlapping_terms(pmf)
        .iter()
        .map(|&(p, log_ratio)| p * (lambda * log_ratio).exp())
        .sum()
}

pub fn chernoff_discrete(pmf: &DiscreteCondPmf) -> ChernoffResult {
    chernoff_discrete_with(pmf, LambdaSolver::GoldenSection)
}

pub fn chernoff_discrete_with(pmf: &DiscreteCondPmf, solver: LambdaSolver) -> ChernoffResult {
    if pmf.p() == pmf.q() {
        return ChernoffResult::zero();
    }
    let terms = overlapping_terms(pmf);
    if terms.is_empty() {
        return ChernoffResult {
            value: f64::INFINITY,
            lambda_star: 0.5,
            inner_min: 0.0,
            iterations: 0,
        };
    }
    let g = |lambda: f64| {
        terms
            .iter()
            .map(|&(p, log_ratio)| p * (lambda * log_ratio).exp())
            .sum::<f64>()
    };
    minimize_over_lambda(g, solver)
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: QUAD_TOL,
        ..Default::default()
    }
}

/// `∫ f₁^{1−λ} f₀^λ dx` over the model's truncated support.
pub fn chernoff_coefficient_continuous(model: &ConditionalModel, lambda: f64) -> Result<f64> {
    let (lo, hi) = model.support();
    let integrand = |x: f64| {
        ((1.0 - lambda) * model.log_pdf(Label::One, x) + lambda * model.log_pdf(Label::Zero, x))
            .exp()
    };
    Ok(integrate(integrand, lo, hi, quad_opts())?.value)
}

pub fn chernoff_continuous(model: &ConditionalModel) -> Result<ChernoffResult> {
    if model.is_non_learnable() {
        return Ok(ChernoffResult::zero());
    }
    let mut failure = None;
    let result = minimize_over_lambda(
        |lambda| match chernoff_coefficient_continuous(model, lambda) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        LambdaSolver::GoldenSection,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

/// Which relative entropy to compute; `p` is the class-1 law, `q` the class-0 law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlDirection {
    /// D(p ‖ q) = D(f₁ ‖ f₀).
    Forward,
    /// D(q ‖ p) = D(f₀ ‖ f₁).
    Reverse,
}

fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == 0.0 {
                0.0
            } else if y == 0.0 {
                f64::INFINITY
            } else {
                x * (x.ln() - y.ln())
            }
        })
        .sum::<f64>()
        .max(0.0)
}

pub fn kl_discrete(pmf: &DiscreteCondPmf, direction: KlDirection) -> f64 {
    match direction {
        KlDirection::Forward => kl(pmf.p(), pmf.q()),
        KlDirection::Reverse => kl(pmf.q(), pmf.p()),
    }
}

pub fn kl_continuous(model: &ConditionalModel, direction: KlDirection) -> Result<f64> {
    if model.is_non_learnable() {
        return Ok(0.0);
    }
    let (a, b) = match direction {
        KlDirection::Forward => (Label::One, Label::Zero),
        KlDirection::Reverse => (Label::Zero, Label::One),
    };
    let (lo, hi) = model.support();
    let integrand = |x: f64| {
        let la = model.log_pdf(a, x);
        la.exp() * (la - model.log_pdf(b, x))
    };
    Ok(integrate(integrand, lo, hi, quad_opts())?.value.max(0.0))
}

/// `f(x) = Σ_t c_t Π_i x_i^{a_{t,i}}` with positive coefficients and real exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    coeffs: Vec<f64>,
    exponents: Vec<Vec<f64>>,
}

impl Posynomial {
    pub fn new(coeffs: Vec<f64>, exponents: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() != exponents.len() {
            return Err(Error::InvalidArgument(format!(
                "posynomial needs one exponent row per coefficient, got {} and {}",
                coeffs.len(),
                exponents.len()
            )));
        }
        let n = exponents[0].len();
        if exponents
            .iter()
            .any(|row| row.len() != n || row.iter().any(|a| !a.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "ragged or non-finite exponent matrix".into(),
            ));
        }
        if coeffs.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument(
                "posynomial coefficients must be positive".into(),
            ));
        }
        Ok(Self { coeffs, exponents })
    }

    /// `f(x) = x₁ + … + x_n`.
    pub fn sum_of_variables(n: usize) -> Self {
        let exponents = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            coeffs: vec![1.0; n],
            exponents,
        }
    }

    pub fn variables(&self) -> usize {
        self.exponents[0].len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        self.coeffs
            .iter()
            .zip(&self.exponents)
            .map(|(c, row)| c * row.iter().zip(&logs).map(|(a, l)| a * l).sum::<f64>().exp())
            .sum()
    }
}

/// `f(p)^{1−λ} f(q)^λ − f(p^{1−λ} q^λ)` for a posynomial `f`.
///
/// Nonnegative by Hölder's inequality. It vanishes when `p = q`, and more
/// generally when the vectors of posynomial terms at `p` and at `q` are
/// proportional (e.g. always for a single monomial).
pub fn geometric_convexity_gap(f: &Posynomial, p: &[f64], q: &[f64], lambda: f64) -> Result<f64> {
    if p.len() != f.variables() || q.len() != f.variables() {
        return Err(Error::InvalidArgument(format!(
            "posynomial in {} variables evaluated at vectors of length {} and {}",
            f.variables(),
            p.len(),
            q.len()
        )));
    }
    if p.iter().chain(q).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "geometric convexity needs positive vectors".into(),
        ));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "λ must lie in (0, 1), got {lambda}"
        )));
    }
    // Written as base·(ratio)^λ so that p = q gives an exact zero.
    let mid: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| a * (b / a).powf(lambda))
        .collect();
    let fp = f.eval(p);
    let fq = f.eval(q);
    Ok(fp * (fq / fp).powf(lambda) - f.eval(&mid))
}

/// Chernoff information of `(U, X₂)` as the sum of the symbol term and the node-2 term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemChernoff {
    pub value: f64,
    /// The quantized node-1 term; its `lambda_star` is the one reported for the system.
    pub discrete: ChernoffResult,
    /// The node-2 term. Its minimizer need not equal the discrete one, so the
    /// sum is not tied to a single joint λ.
    pub continuous: ChernoffResult,
}

pub fn system_chernoff(system: &TandemSystem) -> Result<SystemChernoff> {
    let discrete = chernoff_discrete(system.pmf());
    let continuous = chernoff_continuous(system.node2())?;
    Ok(SystemChernoff {
        value: discrete.value + continuous.value,
        discrete,
        continuous,
    })
}

/// Comparison of the additive system value against a literal joint computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivityAudit {
    /// Chernoff information of the product PMF over (U, discretized X₂) with one shared λ.
    pub joint: ChernoffResult,
    /// Chernoff information of the discretized X₂ alone.
    pub discretized_node2: f64,
    pub additive: SystemChernoff,
    /// `|joint − additive|`.
    pub discrepancy: f64,
    /// Set when the discrepancy exceeds [`ADDITIVITY_FLAG_TOL`].
    pub flagged: bool,
}

pub const ADDITIVITY_FLAG_TOL: f64 = 1e-6;

/// Cell probabilities of node 2 on `cells` equal-width bins over its truncated
/// support, with the tails folded into the two end bins.
pub fn discretize_node(model: &ConditionalModel, cells: usize) -> Result<DiscreteCondPmf> {
    if cells < 1 {
        return Err(Error::InvalidArgument(
            "need at least one discretization cell".into(),
        ));
    }
    let (lo, hi) = model.support();
    let width = (hi - lo) / cells as f64;
    let edge = |i: usize| match i {
        0 => f64::NEG_INFINITY,
        i if i == cells => f64::INFINITY,
        i => lo + width * i as f64,
    };
    let mass = |y: Label| -> Vec<f64> {
        (0..cells)
            .map(|i| model.interval_mass(y, edge(i), edge(i + 1)))
            .collect()
    };
    DiscreteCondPmf::new(mass(Label::One), mass(Label::Zero))
}

/// Joint Chernoff information of `(U, X₂)` against the additive decomposition.
pub fn joint_chernoff_audit(system: &TandemSystem, cells: usize) -> Result<AdditivityAudit> {
    let node2 = discretize_node(system.node2(), cells)?;
    let symbols = system.pmf();
    let product = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .flat_map(|&x| b.iter().map(move |&y| x * y))
            .collect()
    };
    let joint_pmf = DiscreteCondPmf::new(
        product(symbols.p(), node2.p()),
        product(symbols.q(), node2.q()),
    )?;
    let joint = chernoff_discrete(&joint_pmf);
    let additive = system_chernoff(system)?;
    let discrepancy = (joint.value - additive.value).abs();
    Ok(AdditivityAudit {
        joint,
        discretized_node2: chernoff_discrete(&node2).value,
        additive,
        discrepancy,
        flagged: discrepancy > ADDITIVITY_FLAG_TOL,
    })
}
