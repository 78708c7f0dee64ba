//! Built-in oracle comparisons run by `tandem selftest`.

use tandem_core::divergence::{
    chernoff_continuous, chernoff_discrete, chernoff_discrete_with, kl_continuous, KlDirection,
    LambdaSolver,
};
use tandem_core::fusion::{exact_error, iid_error_exponent, monte_carlo_error, TandemSystem};
use tandem_core::quantize::{cell_probabilities, uniform_posterior_quantizer};
use tandem_core::{ConditionalModel, DiscreteCondPmf};

/// Φ(−1/2): single-sensor Bayes error for a unit mean shift (30-digit reference).
const SINGLE_SENSOR_PE: f64 = 0.308_537_538_725_986_9;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn compare(name: &'static str, got: f64, want: f64, tol: f64) -> Check {
    let diff = (got - want).abs();
    Check {
        name,
        passed: diff <= tol,
        detail: format!("got {got:.12e}, expected {want:.12e} (tolerance {tol:e})"),
    }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> Check {
    Check {
        name,
        passed: false,
        detail: err.to_string(),
    }
}

fn gauss(m0: f64, m1: f64, s: f64) -> ConditionalModel {
    ConditionalModel::gaussian_equal_variance(m0, m1, s).expect("valid model")
}

fn closed_form_chernoff() -> Check {
    let name = "continuous Chernoff vs (Δμ)²/8σ²";
    match chernoff_continuous(&gauss(0.0, 2.0, 1.5)) {
        Ok(r) => compare(name, r.value, 4.0 / (8.0 * 2.25), 1e-9),
        Err(e) => failed(name, e),
    }
}

fn closed_form_kl() -> Check {
    let name = "continuous KL vs (Δμ)²/2σ²";
    match kl_continuous(&gauss(1.0, -1.0, 2.0), KlDirection::Forward) {
        Ok(v) => compare(name, v, 0.5, 1e-8),
        Err(e) => failed(name, e),
    }
}

fn golden_vs_grid() -> Check {
    let name = "discrete Chernoff golden section vs λ grid";
    let pmf =
        uniform_posterior_quantizer(4).and_then(|s| cell_probabilities(&gauss(0.0, 1.0, 1.0), &s));
    match pmf {
        Ok(pmf) => compare(
            name,
            chernoff_discrete(&pmf).value,
            chernoff_discrete_with(&pmf, LambdaSolver::Grid { step: 1e-5 }).value,
            1e-8,
        ),
        Err(e) => failed(name, e),
    }
}

fn single_sensor_error() -> Check {
    let name = "k = 2 with uninformative node 2 vs Φ(−1/2)";
    let system = uniform_posterior_quantizer(2)
        .and_then(|s| TandemSystem::new(gauss(0.0, 1.0, 1.0), gauss(0.0, 0.0, 1.0), s, 0.5))
        .and_then(|sys| exact_error(&sys));
    match system {
        Ok(r) => compare(name, r.pe_exact, SINGLE_SENSOR_PE, 1e-10),
        Err(e) => failed(name, e),
    }
}

fn monte_carlo_agreement() -> Check {
    let name = "Monte Carlo vs exact Bayes error at k = 4";
    let run = || -> tandem_core::Result<Check> {
        let system = TandemSystem::new(
            gauss(0.0, 1.0, 1.0),
            gauss(0.0, 1.0, 1.0),
            uniform_posterior_quantizer(4)?,
            0.5,
        )?;
        let exact = exact_error(&system)?.pe_exact;
        let mc = monte_carlo_error(&system, 200_000, 11)?;
        let z = (mc.pe - exact).abs() / mc.stderr;
        Ok(Check {
            name,
            passed: z <= 4.0,
            detail: format!(
                "exact {exact:.12e}, simulated {:.12e} ({z:.2} standard errors)",
                mc.pe
            ),
        })
    };
    run().unwrap_or_else(|e| failed(name, e))
}

fn single_observation_exponent() -> Check {
    let name = "iid error at n = 1 vs Σ min(π₀q, π₁p)";
    let run = || -> tandem_core::Result<Check> {
        let pmf = DiscreteCondPmf::new(vec![0.9, 0.1], vec![0.2, 0.8])?;
        let points = iid_error_exponent(&pmf, 0.3, 1)?;
        let want = (0.7f64 * 0.2).min(0.3 * 0.9) + (0.7f64 * 0.8).min(0.3 * 0.1);
        Ok(compare(name, points[0].pe, want, 1e-15))
    };
    run().unwrap_or_else(|e| failed(name, e))
}

pub fn run() -> Vec<Check> {
    vec![
        closed_form_chernoff(),
        closed_form_kl(),
        golden_vs_grid(),
        single_sensor_error(),
        monte_carlo_agreement(),
        single_observation_exponent(),
    ]
}
