//! Subcommand bodies. Each builds a [`Table`] and writes it to the configured sink.

use anyhow::{bail, Result};
use tandem_core::divergence::{chernoff_continuous, chernoff_discrete, kl_discrete, KlDirection};
use tandem_core::fusion::{
    iid_error_exponent, monte_carlo_error, quantizer_sweep, ExperimentTable, TandemSystem,
};
use tandem_core::quantize::cell_probabilities;

use crate::config::ExperimentConfig;
use crate::report::{Cell, Row, Table};
use crate::selftest;

/// Process outcome, mapped to the exit code by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Some rows failed numerically; the rest were still written.
    RowErrors,
    /// `--check` was requested and a monotonicity flag is false.
    CheckFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::RowErrors => 1,
            Status::CheckFailed => 2,
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "k",
    "thresholds",
    "C_discrete",
    "lambda_star",
    "C_system",
    "pe_exact",
    "pfa",
    "pmd",
    "pe_mc",
    "mc_stderr",
];

fn experiment(
    config: &ExperimentConfig,
    k_list: &[usize],
    monte_carlo: Option<(u64, u64)>,
) -> Result<ExperimentTable> {
    Ok(quantizer_sweep(
        &config.node1,
        &config.node2,
        config.prior1,
        k_list,
        config.quantizer_mode,
        monte_carlo,
    )?)
}

fn emit(table: &Table, config: &ExperimentConfig) -> Result<()> {
    let text = table.render(config.output_format)?;
    match &config.output_path {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
            for (name, value) in &table.summary {
                if let Cell::Bool(b) = value {
                    eprintln!("{name}: {b}");
                }
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn k_cell(k: usize) -> Cell {
    Cell::Int(k as u64)
}

pub fn sweep(config: &ExperimentConfig, check: bool) -> Result<Status> {
    let mc = (config.mc_samples > 0).then_some((config.mc_samples, config.seed));
    let result = experiment(config, &config.k_list, mc)?;
    let mut table = Table::new("sweep", SWEEP_COLUMNS.to_vec());
    for row in &result.rows {
        table.rows.push(match &row.outcome {
            Ok(r) => Row::Values(vec![
                k_cell(r.k),
                Cell::Reals(r.spec.thresholds().to_vec()),
                r.chernoff_discrete.value.into(),
                r.chernoff_discrete.lambda_star.into(),
                r.chernoff_system.into(),
                r.error.pe_exact.into(),
                r.error.pfa.into(),
                r.error.pmd.into(),
                r.error.pe_mc.into(),
                r.error.mc_stderr.into(),
            ]),
            Err(e) => Row::Error {
                key: k_cell(row.k),
                message: e.to_string(),
            },
        });
    }
    table
        .summary
        .push(("chernoff_monotone", Cell::Bool(result.chernoff_monotone)));
    table
        .summary
        .push(("pe_monotone", Cell::Bool(result.pe_monotone)));
    emit(&table, config)?;

    Ok(if table.has_errors() {
        Status::RowErrors
    } else if check && !(result.chernoff_monotone && result.pe_monotone) {
        Status::CheckFailed
    } else {
        Status::Success
    })
}

pub fn chernoff(config: &ExperimentConfig) -> Result<Status> {
    let result = experiment(config, &config.k_list, None)?;
    let mut table = Table::new(
        "chernoff",
        vec![
            "k",
            "thresholds",
            "C_discrete",
            "lambda_star",
            "KL_forward",
            "KL_reverse",
            "C_system",
        ],
    );
    for row in &result.rows {
        let values = row.outcome.as_ref().map_err(Clone::clone).and_then(|r| {
            let pmf = cell_probabilities(&config.node1, &r.spec)?;
            Ok(vec![
                k_cell(r.k),
                Cell::Reals(r.spec.thresholds().to_vec()),
                r.chernoff_discrete.value.into(),
                r.chernoff_discrete.lambda_star.into(),
                kl_discrete(&pmf, KlDirection::Forward).into(),
                kl_discrete(&pmf, KlDirection::Reverse).into(),
                r.chernoff_system.into(),
            ])
        });
        table.rows.push(match values {
            Ok(cells) => Row::Values(cells),
            Err(e) => Row::Error {
                key: k_cell(row.k),
                message: e.to_string(),
            },
        });
    }
    let node1 = chernoff_continuous(&config.node1)?;
    let node2 = chernoff_continuous(&config.node2)?;
    table.summary.push(("C_node1", node1.value.into()));
    table
        .summary
        .push(("lambda_star_node1", node1.lambda_star.into()));
    table.summary.push(("C_node2", node2.value.into()));
    table
        .summary
        .push(("lambda_star_node2", node2.lambda_star.into()));
    emit(&table, config)?;
    Ok(if table.has_errors() {
        Status::RowErrors
    } else {
        Status::Success
    })
}

pub fn simulate(config: &ExperimentConfig) -> Result<Status> {
    if config.mc_samples == 0 {
        bail!("config field `mc_samples`: must be positive for simulate");
    }
    let result = experiment(config, &config.k_list, None)?;
    let mut table = Table::new(
        "simulate",
        vec![
            "k",
            "thresholds",
            "n",
            "errors",
            "pe_mc",
            "mc_stderr",
            "pfa_mc",
            "pmd_mc",
        ],
    );
    for row in &result.rows {
        let values = row.outcome.as_ref().map_err(Clone::clone).and_then(|r| {
            let system = TandemSystem::new(
                config.node1.clone(),
                config.node2.clone(),
                r.spec.clone(),
                config.prior1,
            )?;
            let mc = monte_carlo_error(&system, config.mc_samples, config.seed)?;
            let class1 = mc.n - mc.class0;
            let rate = |count: u64, total: u64| {
                if total == 0 {
                    Cell::Empty
                } else {
                    (count as f64 / total as f64).into()
                }
            };
            Ok(vec![
                k_cell(r.k),
                Cell::Reals(r.spec.thresholds().to_vec()),
                Cell::Int(mc.n),
                Cell::Int(mc.errors),
                mc.pe.into(),
                mc.stderr.into(),
                rate(mc.false_alarms, mc.class0),
                rate(mc.misses, class1),
            ])
        });
        table.rows.push(match values {
            Ok(cells) => Row::Values(cells),
            Err(e) => Row::Error {
                key: k_cell(row.k),
                message: e.to_string(),
            },
        });
    }
    table.summary.push(("seed", Cell::Int(config.seed)));
    emit(&table, config)?;
    Ok(if table.has_errors() {
        Status::RowErrors
    } else {
        Status::Success
    })
}

/// Error exponent of `n` iid copies of node 1's symbol, for `n = 1..=n_max`.
pub fn exponent(config: &ExperimentConfig, k: usize, n_max: usize) -> Result<Status> {
    let result = experiment(config, &[k], None)?;
    let row = match &result.rows[0].outcome {
        Ok(r) => r,
        Err(e) => bail!("k = {k}: {e}"),
    };
    let pmf = cell_probabilities(&config.node1, &row.spec)?;
    let points = iid_error_exponent(&pmf, config.prior1, n_max)?;
    let mut table = Table::new("exponent", vec!["n", "pe", "exponent"]);
    for p in &points {
        table.rows.push(Row::Values(vec![
            Cell::Int(p.n as u64),
            p.pe.into(),
            p.exponent.into(),
        ]));
    }
    let c = chernoff_discrete(&pmf);
    table.summary.push(("k", k_cell(k)));
    table
        .summary
        .push(("thresholds", Cell::Reals(row.spec.thresholds().to_vec())));
    table.summary.push(("chernoff_discrete", c.value.into()));
    table.summary.push(("lambda_star", c.lambda_star.into()));
    emit(&table, config)?;
    Ok(Status::Success)
}

pub fn selftest() -> Result<Status> {
    let results = selftest::run();
    let mut all = true;
    for r in &results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {}: {}", r.name, r.detail);
        all &= r.passed;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("selftest: {passed}/{} passed", results.len());
    Ok(if all {
        Status::Success
    } else {
        Status::CheckFailed
    })
}
