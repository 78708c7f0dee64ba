//! Exact Bayes error of `n` iid symbol observations, by dynamic programming
//! over the distribution of the accumulated log-likelihood ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantize::DiscreteCondPmf;

/// Upper bound on the number of LLR atoms the recursion may carry.
pub const MAX_EXPONENT_STATES: f64 = 1e7;

/// Atoms whose accumulated LLRs differ by at most this much are merged.
const ATOM_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub n: usize,
    pub pe: f64,
    /// `−ln(Pe(n)) / n`.
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy)]
struct Atom {
    llr: f64,
    /// Mass under class 1.
    p: f64,
    /// Mass under class 0.
    q: f64,
}

fn atom(p: f64, q: f64) -> Atom {
    let llr = match (p > 0.0, q > 0.0) {
        (true, true) => p.ln() - q.ln(),
        (true, false) => f64::INFINITY,
        _ => f64::NEG_INFINITY,
    };
    Atom { llr, p, q }
}

fn merge(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.p > 0.0 || a.q > 0.0);
    atoms.sort_by(|a, b| a.llr.total_cmp(&b.llr));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.llr == a.llr || (last.llr - a.llr).abs() <= ATOM_MERGE_TOL => {
                last.p += a.p;
                last.q += a.q;
            }
            _ => out.push(a),
        }
    }
    out
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Pe(n) = Σ min(π₀ q(uⁿ), π₁ p(uⁿ))` and `−ln Pe(n)/n` for `n = 1..=n_max`.
///
/// The number of distinct accumulated LLRs after `n` steps is at most the
/// number of multisets of size `n` over the distinct per-symbol LLRs; the call
/// is refused when that bound exceeds [`MAX_EXPONENT_STATES`].
pub fn iid_error_exponent(
    pmf: &DiscreteCondPmf,
    prior1: f64,
    n_max: usize,
) -> Result<Vec<ExponentPoint>> {
    if !(prior1 > 0.0 && prior1 < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "prior1 must lie in (0, 1), got {prior1}"
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be ≥ 1".into()));
    }
    let prior0 = 1.0 - prior1;
    let symbols = merge(
        pmf.p()
            .iter()
            .zip(pmf.q())
            .map(|(&p, &q)| atom(p, q))
            .collect(),
    );
    let m = symbols.len();
    let bound = binomial(n_max + m - 1, m - 1);
    if bound > MAX_EXPONENT_STATES {
        return Err(Error::InvalidArgument(format!(
            "{m} distinct symbol ratios over n = {n_max} may produce {bound:.3e} states (limit {MAX_EXPONENT_STATES:e})"
        )));
    }

    let mut dist = vec![Atom {
        llr: 0.0,
        p: 1.0,
        q: 1.0,
    }];
    let mut points = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let next = dist
            .iter()
            .flat_map(|a| {
                symbols.iter().map(move |s| {
                    let (p, q) = (a.p * s.p, a.q * s.q);
                    let llr = if p > 0.0 && q > 0.0 {
                        a.llr + s.llr
                    } else {
                        atom(p, q).llr
                    };
                    Atom { llr, p, q }
                })
            })
            .collect();
        dist = merge(next);
        let pe: f64 = dist.iter().map(|a| (prior0 * a.q).min(prior1 * a.p)).sum();
        points.push(ExponentPoint {
            n,
            pe,
            exponent: -pe.ln() / n as f64,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Oracle: enumerate all kⁿ sequences.
    fn enumerate_pe(p: &[f64], q: &[f64], prior1: f64, n: usize) -> f64 {
        let k = p.len();
        let total = k.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let (mut pp, mut qq) = (1.0, 1.0);
                for _ in 0..n {
                    pp *= p[code % k];
                    qq *= q[code % k];
                    code /= k;
                }
                ((1.0 - prior1) * qq).min(prior1 * pp)
            })
            .sum()
    }

    #[test]
    fn identical_pmfs_have_zero_exponent() {
        let pmf = DiscreteCondPmf::new(vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        for pt in iid_error_exponent(&pmf, 0.4, 6).unwrap() {
            assert_abs_diff_eq!(pt.pe, 0.4, epsilon = 1e-14);
            assert_abs_diff_eq!(pt.exponent, -(0.4f64).ln() / pt.n as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_observation_error() {
        let pmf = DiscreteCondPmf::new(vec![0.9, 0.1], vec![0.1, 0.9]).unwrap();
        let pts = iid_error_exponent(&pmf, 0.5, 1).unwrap();
        assert_abs_diff_eq!(pts[0].pe, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(pts[0].exponent, -(0.1f64).ln(), epsilon = 1e-14);
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let cases: [(&[f64], &[f64], f64); 3] = [
            (&[0.9, 0.1], &[0.1, 0.9], 0.5),
            (&[0.5, 0.3, 0.2], &[0.2, 0.3, 0.5], 0.3),
            (&[0.6, 0.4, 0.0], &[0.1, 0.4, 0.5], 0.5),
        ];
        for (p, q, prior) in cases {
            let pmf = DiscreteCondPmf::new(p.to_vec(), q.to_vec()).unwrap();
            let pts = iid_error_exponent(&pmf, prior, 9).unwrap();
            for pt in &pts {
                let oracle = enumerate_pe(p, q, prior, pt.n);
                assert_abs_diff_eq!(pt.pe, oracle, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn exponent_approaches_chernoff_information() {
        let pmf = DiscreteCondPmf::new(vec![0.9, 0.1], vec![0.1, 0.9]).unwrap();
        let c = crate::divergence::chernoff_discrete(&pmf).value;
        let pts = iid_error_exponent(&pmf, 0.5, 12).unwrap();
        let gap = |n: usize| (pts[n - 1].exponent - c).abs();
        assert!(gap(4) > gap(8) && gap(8) > gap(12));
    }

    #[test]
    fn state_guard() {
        let k = 40;
        let p: Vec<f64> = (1..=k).map(|i| i as f64).collect();
        let sp: f64 = p.iter().sum();
        let p: Vec<f64> = p.into_iter().map(|x| x / sp).collect();
        let q = vec![1.0 / k as f64; k];
        let pmf = DiscreteCondPmf::new(p, q).unwrap();
        assert!(iid_error_exponent(&pmf, 0.5, 12).is_err());
        assert!(iid_error_exponent(&pmf, 0.5, 2).is_ok());
        assert!(iid_error_exponent(&pmf, 0.5, 0).is_err());
    }
}
