//! Discount functions and the time-consistency test.
//!
//! A discount function assigns a strictly positive weight to every integer
//! delay. Present value is `amount * weight(delay)`. Preferences are
//! time-consistent exactly when the one-step ratio `weight(a + 1) / weight(a)`
//! is the same at every delay, which on an integer grid singles out the
//! exponential family `weight(0) * delta^t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used by [`check_consistency`] when callers have no
/// better choice.
pub const DEFAULT_CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// A weighting of future delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DiscountFunction {
    /// `delta^t` with `0 < delta < 1`.
    Exponential { delta: f64 },
    /// `1 / (1 + t)`.
    Hyperbolic,
    /// `1 / (1 + t + m)`.
    ShiftedHyperbolic { m: u32 },
    /// Explicit weights for delays `0..=H`.
    Tabulated { weights: Vec<f64> },
}

impl DiscountFunction {
    pub fn exponential(delta: f64) -> Result<Self> {
        let f = DiscountFunction::Exponential { delta };
        f.validate()?;
        Ok(f)
    }

    pub fn shifted_hyperbolic(m: u32) -> Self {
        DiscountFunction::ShiftedHyperbolic { m }
    }

    /// Builds a table, rejecting nonpositive, non-finite or increasing weights.
    pub fn tabulated(weights: Vec<f64>) -> Result<Self> {
        let f = DiscountFunction::Tabulated { weights };
        f.validate()?;
        Ok(f)
    }

    /// Checks the family invariants. Values built through the constructors
    /// are always valid; this exists for values that arrive deserialized.
    pub fn validate(&self) -> Result<()> {
        match self {
            DiscountFunction::Exponential { delta } => {
                if !(delta.is_finite() && *delta > 0.0 && *delta < 1.0) {
                    return Err(Error::InvalidDelta(*delta));
                }
            }
            DiscountFunction::Hyperbolic | DiscountFunction::ShiftedHyperbolic { .. } => {}
            DiscountFunction::Tabulated { weights } => {
                if weights.is_empty() {
                    return Err(Error::EmptyTable);
                }
                for (delay, &value) in weights.iter().enumerate() {
                    if !(value.is_finite() && value > 0.0) {
                        return Err(Error::NonPositiveWeight { delay, value });
                    }
                    if delay > 0 && value > weights[delay - 1] {
                        return Err(Error::IncreasingWeights { delay });
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest delay the function is defined for, `None` when unbounded.
    pub fn max_delay(&self) -> Option<u32> {
        match self {
            DiscountFunction::Tabulated { weights } => Some(weights.len().saturating_sub(1) as u32),
            _ => None,
        }
    }

    /// Weight of a reward `t` periods away.
    pub fn weight(&self, t: u32) -> Result<f64> {
        match self {
            DiscountFunction::Exponential { delta } => Ok(delta.powi(t as i32)),
            DiscountFunction::Hyperbolic => Ok(1.0 / (1.0 + f64::from(t))),
            DiscountFunction::ShiftedHyperbolic { m } => {
                Ok(1.0 / (1.0 + f64::from(t) + f64::from(*m)))
            }
            DiscountFunction::Tabulated { weights } => {
                weights
                    .get(t as usize)
                    .copied()
                    .ok_or(Error::DelayOutOfRange {
                        delay: t,
                        max: weights.len().saturating_sub(1) as u32,
                    })
            }
        }
    }
}

impl fmt::Display for DiscountFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscountFunction::Exponential { delta } => write!(f, "exponential(delta={delta})"),
            DiscountFunction::Hyperbolic => write!(f, "hyperbolic"),
            DiscountFunction::ShiftedHyperbolic { m } => write!(f, "shifted-hyperbolic(m={m})"),
            DiscountFunction::Tabulated { weights } => {
                write!(f, "tabulated(H={})", weights.len().saturating_sub(1))
            }
        }
    }
}

/// Anything that weights integer delays. Implemented by [`DiscountFunction`]
/// and by [`DiscountInForce`], the rewritten weighting a self-modified agent
/// applies.
pub trait Weighting {
    fn weight(&self, delay: u32) -> Result<f64>;
}

impl Weighting for DiscountFunction {
    fn weight(&self, delay: u32) -> Result<f64> {
        DiscountFunction::weight(self, delay)
    }
}

impl<W: Weighting + ?Sized> Weighting for &W {
    fn weight(&self, delay: u32) -> Result<f64> {
        (**self).weight(delay)
    }
}

/// The discounting a particular self applies: the original function read
/// `offset` periods further out, `weight'(d) = base(d + offset)`.
///
/// An unmodified self has offset 0. A self `m` periods after modification
/// has offset `m`, which for the hyperbolic base is exactly `1/(1+d+m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountInForce {
    pub base: DiscountFunction,
    pub offset: u32,
}

impl DiscountInForce {
    pub fn original(base: DiscountFunction) -> Self {
        DiscountInForce { base, offset: 0 }
    }

    pub fn shifted(base: DiscountFunction, offset: u32) -> Self {
        DiscountInForce { base, offset }
    }

    /// The same weighting written as a single built-in family, when one exists.
    ///
    /// A shifted exponential is `delta^offset` times an exponential, which is
    /// not itself a member of any family, so it yields `None`.
    pub fn closed_form(&self) -> Option<DiscountFunction> {
        if self.offset == 0 {
            return Some(self.base.clone());
        }
        match &self.base {
            DiscountFunction::Exponential { .. } => None,
            DiscountFunction::Hyperbolic => {
                Some(DiscountFunction::ShiftedHyperbolic { m: self.offset })
            }
            DiscountFunction::ShiftedHyperbolic { m } => {
                Some(DiscountFunction::ShiftedHyperbolic { m: m + self.offset })
            }
            DiscountFunction::Tabulated { weights } => weights
                .get(self.offset as usize..)
                .filter(|rest| !rest.is_empty())
                .map(|rest| DiscountFunction::Tabulated {
                    weights: rest.to_vec(),
                }),
        }
    }
}

impl Weighting for DiscountInForce {
    fn weight(&self, delay: u32) -> Result<f64> {
        self.base.weight(delay + self.offset)
    }
}

impl fmt::Display for DiscountInForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.closed_form() {
            Some(family) => write!(f, "{family}"),
            None => write!(f, "{}+{}", self.base, self.offset),
        }
    }
}

/// `amount * weight(f, t)`.
pub fn present_value<W: Weighting + ?Sized>(f: &W, amount: f64, t: u32) -> Result<f64> {
    Ok(amount * f.weight(t)?)
}

/// The exponential discount function of an agent that can borrow and lend at
/// interest rate `i`: `delta = 1 / (1 + i)`.
pub fn delta_from_interest_rate(i: f64) -> Result<DiscountFunction> {
    if !(i.is_finite() && i > 0.0) {
        return Err(Error::InvalidInterestRate(i));
    }
    DiscountFunction::exponential(1.0 / (1.0 + i))
}

/// The first delay pair whose one-step ratios disagree beyond tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyWitness {
    /// Reference delay, always 0.
    pub a: u32,
    /// First delay whose ratio deviates from the reference ratio.
    pub b: u32,
    pub ratio_a: f64,
    pub ratio_b: f64,
    /// `|ratio_b - ratio_a| / ratio_a`.
    pub deviation: f64,
}

impl ConsistencyWitness {
    /// Recomputes both ratios from `f` and reports whether they still fail
    /// the test at `tol`.
    pub fn reproduces<W: Weighting + ?Sized>(&self, f: &W, tol: f64) -> Result<bool> {
        let ra = one_step_ratio(f, self.a)?;
        let rb = one_step_ratio(f, self.b)?;
        Ok((rb - ra).abs() / ra > tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    pub witness: Option<ConsistencyWitness>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub horizon: u32,
}

fn one_step_ratio<W: Weighting + ?Sized>(f: &W, a: u32) -> Result<f64> {
    Ok(f.weight(a + 1)? / f.weight(a)?)
}

/// Tests whether the one-step ratio `weight(a+1)/weight(a)` is constant for
/// `a` in `0..horizon` to within relative tolerance `tol`.
///
/// A tabulated function must cover delays up to `horizon`.
pub fn check_consistency<W: Weighting + ?Sized>(
    f: &W,
    horizon: u32,
    tol: f64,
) -> Result<ConsistencyVerdict> {
    if horizon < 2 {
        return Err(Error::HorizonTooSmall(horizon));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let reference = one_step_ratio(f, 0)?;
    let mut witness = None;
    let mut max_deviation: f64 = 0.0;
    for a in 1..horizon {
        let ratio = one_step_ratio(f, a)?;
        let deviation = (ratio - reference).abs() / reference;
        max_deviation = max_deviation.max(deviation);
        if deviation > tol && witness.is_none() {
            witness = Some(ConsistencyWitness {
                a: 0,
                b: a,
                ratio_a: reference,
                ratio_b: ratio,
                deviation,
            });
        }
    }
    Ok(ConsistencyVerdict {
        consistent: witness.is_none(),
        witness,
        max_deviation,
        tolerance: tol,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn hyperbolic_weight_at_two_days() {
        assert!((DiscountFunction::Hyperbolic.weight(2).unwrap() - 1.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn zero_delay_has_unit_weight() {
        let families = [
            DiscountFunction::exponential(0.4).unwrap(),
            DiscountFunction::Hyperbolic,
            DiscountFunction::shifted_hyperbolic(0),
            DiscountFunction::tabulated(vec![1.0, 0.5]).unwrap(),
        ];
        for f in &families {
            assert_eq!(f.weight(0).unwrap(), 1.0, "{f}");
        }
        assert!((DiscountFunction::shifted_hyperbolic(4).weight(0).unwrap() - 0.2).abs() < EPS);
    }

    #[test]
    fn exponential_cubed() {
        let f = DiscountFunction::exponential(0.9).unwrap();
        assert!((f.weight(3).unwrap() - 0.729).abs() < EPS);
    }

    #[test]
    fn present_values_from_the_two_day_example() {
        let h = DiscountFunction::Hyperbolic;
        assert!((present_value(&h, 30.0, 2).unwrap() - 10.0).abs() < EPS);
        assert!((present_value(&h, 16.0, 1).unwrap() - 8.0).abs() < EPS);
        assert_eq!(present_value(&h, 0.0, 7).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_range_and_validation() {
        let f = DiscountFunction::tabulated(vec![1.0, 0.8, 0.8, 0.1]).unwrap();
        assert_eq!(f.weight(3).unwrap(), 0.1);
        assert_eq!(
            f.weight(4),
            Err(Error::DelayOutOfRange { delay: 4, max: 3 })
        );
        assert_eq!(
            DiscountFunction::tabulated(vec![1.0, 1.2]),
            Err(Error::IncreasingWeights { delay: 1 })
        );
        assert_eq!(
            DiscountFunction::tabulated(vec![1.0, 0.0]),
            Err(Error::NonPositiveWeight {
                delay: 1,
                value: 0.0
            })
        );
        assert_eq!(DiscountFunction::tabulated(vec![]), Err(Error::EmptyTable));
        assert!(DiscountFunction::tabulated(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn exponential_rejects_out_of_range_delta() {
        for delta in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            assert!(DiscountFunction::exponential(delta).is_err(), "{delta}");
        }
    }

    #[test]
    fn interest_rate_to_delta() {
        assert_eq!(
            delta_from_interest_rate(1.0).unwrap(),
            DiscountFunction::Exponential { delta: 0.5 }
        );
        match delta_from_interest_rate(0.25).unwrap() {
            DiscountFunction::Exponential { delta } => assert!((delta - 0.8).abs() < EPS),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            delta_from_interest_rate(0.0),
            Err(Error::InvalidInterestRate(0.0))
        );
        assert!(delta_from_interest_rate(-0.1).is_err());
    }

    #[test]
    fn exponential_is_consistent() {
        let f = DiscountFunction::exponential(0.7).unwrap();
        let v = check_consistency(&f, 50, 1e-9).unwrap();
        assert!(v.consistent);
        assert!(v.witness.is_none());
    }

    #[test]
    fn hyperbolic_witness_is_first_pair() {
        let v = check_consistency(&DiscountFunction::Hyperbolic, 3, 1e-9).unwrap();
        assert!(!v.consistent);
        let w = v.witness.unwrap();
        assert_eq!((w.a, w.b), (0, 1));
        assert!((w.ratio_a - 0.5).abs() < EPS);
        assert!((w.ratio_b - 2.0 / 3.0).abs() < EPS);
        assert!(w.reproduces(&DiscountFunction::Hyperbolic, 1e-9).unwrap());
    }

    #[test]
    fn hyperbolic_inconsistent_at_smallest_horizon() {
        assert!(
            !check_consistency(&DiscountFunction::Hyperbolic, 2, 1e-9)
                .unwrap()
                .consistent
        );
    }

    #[test]
    fn shifted_hyperbolic_is_inconsistent() {
        let v = check_consistency(&DiscountFunction::shifted_hyperbolic(5), 10, 1e-9).unwrap();
        let w = v.witness.unwrap();
        assert!((w.ratio_a - 6.0 / 7.0).abs() < EPS);
        assert!((w.ratio_b - 7.0 / 8.0).abs() < EPS);
    }

    #[test]
    fn consistency_errors() {
        assert_eq!(
            check_consistency(&DiscountFunction::Hyperbolic, 1, 1e-9),
            Err(Error::HorizonTooSmall(1))
        );
        let short = DiscountFunction::tabulated(vec![1.0, 0.5, 0.25]).unwrap();
        assert!(matches!(
            check_consistency(&short, 5, 1e-9),
            Err(Error::DelayOutOfRange { .. })
        ));
        assert!(check_consistency(&short, 2, 1e-9).unwrap().consistent);
    }

    #[test]
    fn closed_forms_of_shifted_weightings() {
        let h = DiscountInForce::shifted(DiscountFunction::Hyperbolic, 3);
        assert_eq!(
            h.closed_form(),
            Some(DiscountFunction::ShiftedHyperbolic { m: 3 })
        );
        let t =
            DiscountInForce::shifted(DiscountFunction::tabulated(vec![1.0, 0.5, 0.2]).unwrap(), 1);
        assert_eq!(
            t.closed_form(),
            Some(DiscountFunction::Tabulated {
                weights: vec![0.5, 0.2]
            })
        );
        let e = DiscountInForce::shifted(DiscountFunction::exponential(0.5).unwrap(), 2);
        assert_eq!(e.closed_form(), None);
        assert_eq!(e.weight(1).unwrap(), 0.125);
        for d in 0..6 {
            assert_eq!(
                h.weight(d).unwrap(),
                DiscountFunction::ShiftedHyperbolic { m: 3 }
                    .weight(d)
                    .unwrap()
            );
        }
    }
}
