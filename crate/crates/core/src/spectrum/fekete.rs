//! Upper bounds on the spectral radius from norms of dyadic powers.
//!
//! `‖μ^{∗2n}‖ ≤ ‖μ^{∗n}‖²` makes `r_{2^k} = ‖μ^{∗2^k}‖^{1/2^k}`
//! nonincreasing, and every term bounds `r(μ) = inf_n ‖μ^{∗n}‖^{1/n}`.

use serde::Serialize;

use crate::measure::{convolve::square_within, tv_norm, MixedMeasure, PowerBudget};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeketeStep {
    pub k: u32,
    /// Upper end of the total-variation estimate of `μ^{∗2^k}`.
    pub norm: f64,
    pub r: f64,
    pub atoms: usize,
    pub degree: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    KMax,
    Budget,
    Converged,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeketeReport {
    pub sequence: Vec<FeketeStep>,
    pub final_bound: f64,
    pub budget_hit: bool,
    pub stop: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_reason: Option<String>,
}

impl FeketeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

/// Squares `μ` up to `k_max` times. Stops early when the next square would
/// exceed `budget`, when the measure becomes zero, or when the relative
/// improvement of `r` drops below `rel_tol` (`rel_tol = 0` never stops early).
pub fn fekete_bound(
    mu: &MixedMeasure,
    k_max: u32,
    rel_tol: f64,
    budget: &PowerBudget,
) -> FeketeReport {
    let mut sequence = Vec::new();
    let mut cur = mu.clone();
    let mut stop = StopReason::KMax;
    let mut budget_reason = None;
    for k in 0..=k_max {
        if k > 0 {
            match square_within(&cur, budget) {
                Ok(sq) => cur = sq,
                Err(reason) => {
                    stop = StopReason::Budget;
                    budget_reason = Some(reason);
                    break;
                }
            }
        }
        let norm = tv_norm(&cur).upper();
        let r = norm.powf(0.5f64.powi(k as i32));
        sequence.push(FeketeStep {
            k,
            norm,
            r,
            atoms: cur.disc.len(),
            degree: cur.ac.degree(),
        });
        if cur.is_zero() {
            stop = StopReason::Zero;
            break;
        }
        if let [.., prev, last] = sequence.as_slice() {
            if rel_tol > 0.0 && prev.r - last.r < rel_tol * prev.r {
                stop = StopReason::Converged;
                break;
            }
        }
    }
    let final_bound = sequence.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
    FeketeReport {
        sequence,
        final_bound,
        budget_hit: stop == StopReason::Budget,
        stop,
        budget_reason,
    }
}
