//! Preference reversals: a smaller-sooner and a larger-later reward whose
//! ranking flips as the agent gets closer to them.

use serde::{Deserialize, Serialize};

use crate::discounting::Weighting;
use crate::error::{Error, Result};
use crate::problems::{evaluate_dated, strictly_greater, DatedReward, RELATIVE_MARGIN};

/// `small` at `t1` against `large` at `t2 > t1`. From `early_vantage` the
/// large-later reward strictly wins; from `late_vantage` the small-sooner one
/// strictly wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversalWitness {
    pub small: DatedReward,
    pub large: DatedReward,
    pub early_vantage: u32,
    pub late_vantage: u32,
    pub early_small_value: f64,
    pub early_large_value: f64,
    pub late_small_value: f64,
    pub late_large_value: f64,
}

impl ReversalWitness {
    /// Builds a witness, computing the four values from `f`. The result is
    /// not checked; see [`verify_witness`].
    pub fn evaluate<W: Weighting + ?Sized>(
        f: &W,
        small: DatedReward,
        large: DatedReward,
        early_vantage: u32,
        late_vantage: u32,
    ) -> Result<Self> {
        Ok(ReversalWitness {
            small,
            large,
            early_vantage,
            late_vantage,
            early_small_value: evaluate_dated(&small, f, early_vantage)?,
            early_large_value: evaluate_dated(&large, f, early_vantage)?,
            late_small_value: evaluate_dated(&small, f, late_vantage)?,
            late_large_value: evaluate_dated(&large, f, late_vantage)?,
        })
    }

    fn structurally_valid(&self) -> bool {
        self.small.at < self.large.at
            && self.early_vantage < self.late_vantage
            && self.late_vantage <= self.small.at
            && self.small.amount.is_finite()
            && self.large.amount.is_finite()
    }
}

fn matches(stated: f64, recomputed: f64) -> bool {
    (stated - recomputed).abs() <= RELATIVE_MARGIN * stated.abs().max(recomputed.abs()).max(1.0)
}

/// True iff `w` is well formed, its stated values agree with `f`, and the
/// ranking flips with strict inequalities at both vantages.
pub fn verify_witness<W: Weighting + ?Sized>(w: &ReversalWitness, f: &W) -> bool {
    if !w.structurally_valid() {
        return false;
    }
    let Ok(fresh) = ReversalWitness::evaluate(f, w.small, w.large, w.early_vantage, w.late_vantage)
    else {
        return false;
    };
    let stated = [
        (w.early_small_value, fresh.early_small_value),
        (w.early_large_value, fresh.early_large_value),
        (w.late_small_value, fresh.late_small_value),
        (w.late_large_value, fresh.late_large_value),
    ];
    if !stated.iter().all(|&(s, r)| matches(s, r)) {
        return false;
    }
    strictly_greater(fresh.early_large_value, fresh.early_small_value)
        && strictly_greater(fresh.late_small_value, fresh.late_large_value)
}

/// Exhaustive search for the first reversal in the order
/// `(small amount, large amount, t1, t2, early vantage, late vantage)`, all
/// ascending. Reward dates range over `0..=delay_bound` and vantages over
/// `0..=vantage_bound`; the late vantage must not be after `t1`.
///
/// Amounts are sorted and deduplicated before the search.
pub fn find_reversal<W: Weighting + ?Sized>(
    f: &W,
    amount_grid: &[f64],
    delay_bound: u32,
    vantage_bound: u32,
) -> Result<Option<ReversalWitness>> {
    let mut amounts: Vec<f64> = amount_grid.to_vec();
    if amounts.is_empty() {
        return Err(Error::EmptyGrid("amounts"));
    }
    if let Some(&bad) = amounts.iter().find(|a| !a.is_finite()) {
        return Err(Error::NonFiniteAmount(bad));
    }
    amounts.sort_by(f64::total_cmp);
    amounts.dedup();

    for &x in &amounts {
        for &y in &amounts {
            for t1 in 0..=delay_bound {
                for t2 in t1 + 1..=delay_bound {
                    let small = DatedReward { amount: x, at: t1 };
                    let large = DatedReward { amount: y, at: t2 };
                    let last_vantage = t1.min(vantage_bound);
                    for s1 in 0..=last_vantage {
                        let early_small = evaluate_dated(&small, f, s1)?;
                        let early_large = evaluate_dated(&large, f, s1)?;
                        if !strictly_greater(early_large, early_small) {
                            continue;
                        }
                        for s2 in s1 + 1..=last_vantage {
                            let late_small = evaluate_dated(&small, f, s2)?;
                            let late_large = evaluate_dated(&large, f, s2)?;
                            if strictly_greater(late_small, late_large) {
                                return Ok(Some(ReversalWitness {
                                    small,
                                    large,
                                    early_vantage: s1,
                                    late_vantage: s2,
                                    early_small_value: early_small,
                                    early_large_value: early_large,
                                    late_small_value: late_small,
                                    late_large_value: late_large,
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}
