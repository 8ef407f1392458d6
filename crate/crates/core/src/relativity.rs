//! Proper time along travel itineraries, and what it does to discounting that
//! is keyed to elapsed time.
//!
//! A segment's clock runs slow by the special-relativistic factor
//! `sqrt(1 - beta^2)` and the Schwarzschild factor `sqrt(1 - r_s/r)`,
//! combined multiplicatively. Acceleration is ignored and `c = 1`.
//!
//! A clone comparison models two copies of an agent that rewrote its
//! discounting at departure, so that a self which has lived through `m`
//! periods of its own clock weighs a reward `d` periods away by
//! `f(m + d)`. The copies reunite after different itineraries, so their `m`
//! differ and they can rank the same dated choice differently.

use serde::{Deserialize, Serialize};

use crate::discounting::{DiscountFunction, DiscountInForce, Weighting};
use crate::error::{Error, Result};
use crate::problems::{select, BinaryChoice, DatedReward, Selection};

const SPAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockSegment {
    /// Coordinate periods spent in this segment.
    pub coordinate_duration: f64,
    /// Speed as a fraction of light speed, `0 <= beta < 1`.
    #[serde(default)]
    pub beta: f64,
    /// Schwarzschild radius over orbital radius, `0 <= r_s/r < 1`.
    #[serde(default)]
    pub gravity_ratio: f64,
}

impl ClockSegment {
    pub fn new(coordinate_duration: f64, beta: f64, gravity_ratio: f64) -> Result<Self> {
        let seg = ClockSegment {
            coordinate_duration,
            beta,
            gravity_ratio,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn at_rest(coordinate_duration: f64) -> Result<Self> {
        Self::new(coordinate_duration, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coordinate_duration.is_finite() && self.coordinate_duration > 0.0) {
            return Err(Error::InvalidSegment(format!(
                "coordinate_duration must be positive, got {}",
                self.coordinate_duration
            )));
        }
        if !(self.beta.is_finite() && (0.0..1.0).contains(&self.beta)) {
            return Err(Error::InvalidSegment(format!(
                "beta must satisfy 0 <= beta < 1, got {}",
                self.beta
            )));
        }
        if !(self.gravity_ratio.is_finite() && (0.0..1.0).contains(&self.gravity_ratio)) {
            return Err(Error::InvalidSegment(format!(
                "gravity_ratio must satisfy 0 <= gravity_ratio < 1, got {}",
                self.gravity_ratio
            )));
        }
        Ok(())
    }

    /// Proper time per coordinate period.
    pub fn clock_rate(&self) -> f64 {
        (1.0 - self.beta * self.beta).sqrt() * (1.0 - self.gravity_ratio).sqrt()
    }
}

/// Time elapsed on the clock carried through `seg`.
pub fn proper_time(seg: &ClockSegment) -> Result<f64> {
    seg.validate()?;
    Ok(seg.coordinate_duration * seg.clock_rate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Itinerary {
    pub segments: Vec<ClockSegment>,
}

impl Itinerary {
    pub fn new(segments: Vec<ClockSegment>) -> Result<Self> {
        let it = Itinerary { segments };
        it.validate()?;
        Ok(it)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::EmptyItinerary);
        }
        self.segments.iter().try_for_each(ClockSegment::validate)
    }

    pub fn coordinate_span(&self) -> f64 {
        self.segments.iter().map(|s| s.coordinate_duration).sum()
    }
}

/// Sum of segment proper times.
pub fn elapsed_proper_time(it: &Itinerary) -> Result<f64> {
    it.validate()?;
    it.segments.iter().map(proper_time).sum()
}

/// Which clock measures the probe's delays after the reunion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayClock {
    /// Reunited clones share a frame, so coordinate delays apply to both.
    #[default]
    Shared,
    /// Each clone's delays are rescaled by its itinerary's average clock rate
    /// (proper over coordinate time), as if it kept travelling the same way.
    /// This alone can make even exponential discounters disagree.
    OwnRate,
}

/// One clone's reading of the probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneView {
    pub elapsed_proper_time: f64,
    /// Elapsed proper time rounded to the period grid; the offset of its
    /// rewritten discounting.
    pub elapsed_periods: u32,
    /// Average proper time per coordinate period over the itinerary.
    pub clock_rate: f64,
    pub delay_a: u32,
    pub delay_b: u32,
    pub value_a: f64,
    pub value_b: f64,
    pub selection: Selection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub home: CloneView,
    pub traveler: CloneView,
    pub diverges: bool,
}

/// Nearest integer, halves away from zero, clamped to the grid.
fn to_grid(x: f64) -> u32 {
    x.round().max(0.0) as u32
}

fn view(
    f: &DiscountFunction,
    it: &Itinerary,
    probe: &BinaryChoice,
    clock: DelayClock,
) -> Result<CloneView> {
    let elapsed = elapsed_proper_time(it)?;
    let clock_rate = elapsed / it.coordinate_span();
    let elapsed_periods = to_grid(elapsed);
    let scale = match clock {
        DelayClock::Shared => 1.0,
        DelayClock::OwnRate => clock_rate,
    };
    let delay = |r: &DatedReward| to_grid(f64::from(r.at - probe.decided_at) * scale);
    let (delay_a, delay_b) = (delay(&probe.option_a), delay(&probe.option_b));
    let discount = DiscountInForce::shifted(f.clone(), elapsed_periods);
    let value_a = probe.option_a.amount * discount.weight(delay_a)?;
    let value_b = probe.option_b.amount * discount.weight(delay_b)?;
    Ok(CloneView {
        elapsed_proper_time: elapsed,
        elapsed_periods,
        clock_rate,
        delay_a,
        delay_b,
        value_a,
        value_b,
        selection: select(value_a, value_b, probe.option_a.at, probe.option_b.at),
    })
}

/// Evaluates `probe`, decided at the reunion, from both clones.
pub fn clone_divergence(
    f: &DiscountFunction,
    home: &Itinerary,
    traveler: &Itinerary,
    probe: &BinaryChoice,
    clock: DelayClock,
) -> Result<DivergenceReport> {
    f.validate()?;
    home.validate()?;
    traveler.validate()?;
    probe.validate()?;
    let (hs, ts) = (home.coordinate_span(), traveler.coordinate_span());
    if (hs - ts).abs() > SPAN_TOLERANCE * hs.max(ts).max(1.0) {
        return Err(Error::MismatchedSpans {
            home: hs,
            traveler: ts,
        });
    }
    let home = view(f, home, probe, clock)?;
    let traveler = view(f, traveler, probe, clock)?;
    let diverges = home.selection != traveler.selection;
    Ok(DivergenceReport {
        home,
        traveler,
        diverges,
    })
}

/// First probe, decided at period 0, on which the clones disagree.
///
/// Probes are `(x at t1, y at t2)` with `x`, `y` from `amounts` (ascending)
/// and `0 <= t1 < t2 <= delay_bound`, enumerated in that lexicographic order.
pub fn find_divergent_probe(
    f: &DiscountFunction,
    home: &Itinerary,
    traveler: &Itinerary,
    amounts: &[f64],
    delay_bound: u32,
    clock: DelayClock,
) -> Result<Option<(BinaryChoice, DivergenceReport)>> {
    let mut amounts = amounts.to_vec();
    if amounts.is_empty() {
        return Err(Error::EmptyGrid("amounts"));
    }
    amounts.sort_by(f64::total_cmp);
    amounts.dedup();
    for &x in &amounts {
        for &y in &amounts {
            for t1 in 0..=delay_bound {
                for t2 in t1 + 1..=delay_bound {
                    let probe =
                        BinaryChoice::new(DatedReward::new(x, t1)?, DatedReward::new(y, t2)?, 0)?;
                    let report = clone_divergence(f, home, traveler, &probe, clock)?;
                    if report.diverges {
                        return Ok(Some((probe, report)));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn proper_time_examples() {
        assert_eq!(
            proper_time(&ClockSegment::at_rest(10.0).unwrap()).unwrap(),
            10.0
        );
        let fast = ClockSegment::new(10.0, 0.8, 0.0).unwrap();
        assert!((proper_time(&fast).unwrap() - 6.0).abs() < EPS);
        let deep = ClockSegment::new(10.0, 0.0, 0.75).unwrap();
        assert!((proper_time(&deep).unwrap() - 5.0).abs() < EPS);
    }

    #[test]
    fn segment_validation() {
        assert!(ClockSegment::new(0.0, 0.0, 0.0).is_err());
        assert!(ClockSegment::new(1.0, 1.0, 0.0).is_err());
        assert!(ClockSegment::new(1.0, -0.1, 0.0).is_err());
        assert!(ClockSegment::new(1.0, 0.0, 1.0).is_err());
        assert!(ClockSegment::new(f64::INFINITY, 0.0, 0.0).is_err());
        assert_eq!(Itinerary::new(vec![]), Err(Error::EmptyItinerary));
    }

    #[test]
    fn itinerary_sums() {
        let rest = Itinerary::new(vec![
            ClockSegment::at_rest(3.0).unwrap(),
            ClockSegment::at_rest(4.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(elapsed_proper_time(&rest).unwrap(), 7.0);
        let mixed = Itinerary::new(vec![
            ClockSegment::new(10.0, 0.8, 0.0).unwrap(),
            ClockSegment::new(10.0, 0.0, 0.75).unwrap(),
            ClockSegment::at_rest(2.0).unwrap(),
        ])
        .unwrap();
        assert!((elapsed_proper_time(&mixed).unwrap() - 13.0).abs() < EPS);
    }

    fn home() -> Itinerary {
        Itinerary::new(vec![ClockSegment::at_rest(10.0).unwrap()]).unwrap()
    }

    fn traveler() -> Itinerary {
        Itinerary::new(vec![ClockSegment::new(10.0, 0.8, 0.0).unwrap()]).unwrap()
    }

    fn probe(x: f64, t1: u32, y: f64, t2: u32) -> BinaryChoice {
        BinaryChoice::new(
            DatedReward::new(x, t1).unwrap(),
            DatedReward::new(y, t2).unwrap(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn identical_itineraries_agree() {
        let r = clone_divergence(
            &DiscountFunction::Hyperbolic,
            &home(),
            &home(),
            &probe(16.0, 1, 30.0, 2),
            DelayClock::Shared,
        )
        .unwrap();
        assert!(!r.diverges);
        assert_eq!(r.home, r.traveler);
    }

    #[test]
    fn elapsed_time_shifts_hyperbolic_preferences() {
        // home has lived 10 periods, traveler 6: 20@1 vs 22@2 is
        // 20/12 < 22/13 at home but 20/8 > 22/9 for the traveler
        let r = clone_divergence(
            &DiscountFunction::Hyperbolic,
            &home(),
            &traveler(),
            &probe(20.0, 1, 22.0, 2),
            DelayClock::Shared,
        )
        .unwrap();
        assert_eq!(r.home.elapsed_periods, 10);
        assert_eq!(r.traveler.elapsed_periods, 6);
        assert_eq!(r.home.selection, Selection::B);
        assert_eq!(r.traveler.selection, Selection::A);
        assert!(r.diverges);
    }

    #[test]
    fn own_rate_shrinks_traveler_delays() {
        let r = clone_divergence(
            &DiscountFunction::Hyperbolic,
            &home(),
            &traveler(),
            &probe(16.0, 1, 30.0, 2),
            DelayClock::OwnRate,
        )
        .unwrap();
        assert_eq!((r.home.delay_a, r.home.delay_b), (1, 2));
        // 0.6 rounds to 1 and 1.2 rounds to 1
        assert_eq!((r.traveler.delay_a, r.traveler.delay_b), (1, 1));
        assert!((r.traveler.clock_rate - 0.6).abs() < EPS);
    }

    #[test]
    fn mismatched_spans_are_rejected() {
        let short = Itinerary::new(vec![ClockSegment::at_rest(9.0).unwrap()]).unwrap();
        assert!(matches!(
            clone_divergence(
                &DiscountFunction::Hyperbolic,
                &home(),
                &short,
                &probe(1.0, 1, 2.0, 2),
                DelayClock::Shared
            ),
            Err(Error::MismatchedSpans { .. })
        ));
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(to_grid(0.5), 1);
        assert_eq!(to_grid(1.5), 2);
        assert_eq!(to_grid(2.4999), 2);
    }
}
