//! Nonparametric signal detection core: outcome accumulation, hit and
//! false-alarm rates, sensitivity A' and bias B''D.
//!
//! Outcome masses are fractional: a single record may contribute e.g. 0.5
//! to Hit and 0.5 to CorrectRejection. Rates generalize the classical
//! integer-count definitions by replacing counts with mass sums, which
//! reduces to ordinary counting when every mass is pure.
//!
//! Degenerate inputs produce `None` rather than errors: an empty signal or
//! noise cell is a legitimate state of a small corpus, not a failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four classical detection outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeKind {
    Hit,
    Miss,
    FalseAlarm,
    CorrectRejection,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 4] = [
        OutcomeKind::Hit,
        OutcomeKind::Miss,
        OutcomeKind::FalseAlarm,
        OutcomeKind::CorrectRejection,
    ];

    /// Hits and correct rejections are the correct outcomes.
    pub fn is_correct(self) -> bool {
        matches!(self, OutcomeKind::Hit | OutcomeKind::CorrectRejection)
    }

    /// Hits and misses sit on signal trials; the rest on noise trials.
    pub fn is_signal(self) -> bool {
        matches!(self, OutcomeKind::Hit | OutcomeKind::Miss)
    }

    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::Hit => "hit",
            OutcomeKind::Miss => "miss",
            OutcomeKind::FalseAlarm => "false_alarm",
            OutcomeKind::CorrectRejection => "correct_rejection",
        }
    }
}

const MASS_SUM_TOL: f64 = 1e-9;

/// Fractional allocation of one record across the four outcomes.
///
/// Components are nonnegative and sum to 1 within 1e-9; construction
/// enforces this so downstream code never revalidates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeMass {
    hit: f64,
    miss: f64,
    false_alarm: f64,
    correct_rejection: f64,
}

impl OutcomeMass {
    pub fn new(hit: f64, miss: f64, false_alarm: f64, correct_rejection: f64) -> Result<Self> {
        let components = [hit, miss, false_alarm, correct_rejection];
        if components.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::InvalidMass(format!(
                "components must be in [0, 1], got {components:?}"
            )));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidMass(format!(
                "components must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            hit,
            miss,
            false_alarm,
            correct_rejection,
        })
    }

    /// Full mass on a single outcome.
    pub fn pure(kind: OutcomeKind) -> Self {
        let mut mass = Self {
            hit: 0.0,
            miss: 0.0,
            false_alarm: 0.0,
            correct_rejection: 0.0,
        };
        *mass.component_mut(kind) = 1.0;
        mass
    }

    /// Half mass on each of two distinct outcomes.
    pub fn split(a: OutcomeKind, b: OutcomeKind) -> Self {
        debug_assert_ne!(a, b);
        let mut mass = Self {
            hit: 0.0,
            miss: 0.0,
            false_alarm: 0.0,
            correct_rejection: 0.0,
        };
        *mass.component_mut(a) = 0.5;
        *mass.component_mut(b) = 0.5;
        mass
    }

    pub fn component(&self, kind: OutcomeKind) -> f64 {
        match kind {
            OutcomeKind::Hit => self.hit,
            OutcomeKind::Miss => self.miss,
            OutcomeKind::FalseAlarm => self.false_alarm,
            OutcomeKind::CorrectRejection => self.correct_rejection,
        }
    }

    fn component_mut(&mut self, kind: OutcomeKind) -> &mut f64 {
        match kind {
            OutcomeKind::Hit => &mut self.hit,
            OutcomeKind::Miss => &mut self.miss,
            OutcomeKind::FalseAlarm => &mut self.false_alarm,
            OutcomeKind::CorrectRejection => &mut self.correct_rejection,
        }
    }
}

/// Accumulated outcome masses for one measured dimension.
///
/// One unit of mass enters per included record, so the four cells sum to
/// `record_count` within floating-point accumulation error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConfusionMatrix {
    hits: f64,
    misses: f64,
    false_alarms: f64,
    correct_rejections: f64,
    record_count: u64,
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one record's mass. Callers accumulate in canonical record
    /// order so floating-point results are bit-reproducible.
    pub fn accumulate(&mut self, mass: &OutcomeMass) {
        self.hits += mass.component(OutcomeKind::Hit);
        self.misses += mass.component(OutcomeKind::Miss);
        self.false_alarms += mass.component(OutcomeKind::FalseAlarm);
        self.correct_rejections += mass.component(OutcomeKind::CorrectRejection);
        self.record_count += 1;
    }

    pub fn hits(&self) -> f64 {
        self.hits
    }

    pub fn misses(&self) -> f64 {
        self.misses
    }

    pub fn false_alarms(&self) -> f64 {
        self.false_alarms
    }

    pub fn correct_rejections(&self) -> f64 {
        self.correct_rejections
    }

    pub fn record_count(&self) -> u64 {
        self.record_count
    }

    /// Total mass on signal trials (hits + misses).
    pub fn signal_mass(&self) -> f64 {
        self.hits + self.misses
    }

    /// Total mass on noise trials (false alarms + correct rejections).
    pub fn noise_mass(&self) -> f64 {
        self.false_alarms + self.correct_rejections
    }

    /// hits / (hits + misses); `None` when no signal mass exists.
    pub fn hit_rate(&self) -> Option<f64> {
        let signal = self.signal_mass();
        (signal > 0.0).then(|| self.hits / signal)
    }

    /// false_alarms / (false_alarms + correct_rejections); `None` when no
    /// noise mass exists.
    pub fn false_alarm_rate(&self) -> Option<f64> {
        let noise = self.noise_mass();
        (noise > 0.0).then(|| self.false_alarms / noise)
    }

    /// Bundles rates, A', and B''D with definedness propagation.
    pub fn metrics(&self) -> SdtMetrics {
        let hr = self.hit_rate();
        let far = self.false_alarm_rate();
        let (a, b) = match (hr, far) {
            (Some(h), Some(f)) => {
                // Rates are ratios of nonnegative masses, so in [0, 1].
                let a = a_prime(h, f).expect("rates in range");
                let b = b_double_prime(h, f).expect("rates in range");
                (Some(a), b)
            }
            _ => (None, None),
        };
        SdtMetrics {
            hit_rate: hr,
            false_alarm_rate: far,
            a_prime: a,
            b_double_prime: b,
            signal_mass: self.signal_mass(),
            noise_mass: self.noise_mass(),
        }
    }
}

/// Rates and nonparametric measures for one confusion matrix.
///
/// `None` marks an undefined value: a rate with an empty denominator, or a
/// measure depending on such a rate. B''D is additionally undefined at the
/// perfect-performance corners where its denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdtMetrics {
    pub hit_rate: Option<f64>,
    pub false_alarm_rate: Option<f64>,
    pub a_prime: Option<f64>,
    pub b_double_prime: Option<f64>,
    pub signal_mass: f64,
    pub noise_mass: f64,
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::RateOutOfRange { name, value });
    }
    Ok(())
}

/// Nonparametric sensitivity A' in [0.5, 1].
///
/// The hr = far diagonal (including both 0 and both 1, where the formula
/// is 0/0) is defined as exactly 0.5: no discrimination.
pub fn a_prime(hit_rate: f64, false_alarm_rate: f64) -> Result<f64> {
    check_rate("hit_rate", hit_rate)?;
    check_rate("false_alarm_rate", false_alarm_rate)?;
    if hit_rate == false_alarm_rate {
        return Ok(0.5);
    }
    // Off the diagonal the larger rate is positive and the smaller is
    // below 1, so the denominator cannot vanish.
    let (hi, lo) = if hit_rate > false_alarm_rate {
        (hit_rate, false_alarm_rate)
    } else {
        (false_alarm_rate, hit_rate)
    };
    let diff = hi - lo;
    Ok(0.5 + diff * (1.0 + diff) / (4.0 * hi * (1.0 - lo)))
}

/// Nonparametric bias B''D in [-1, 1]; positive is conservative, negative
/// liberal. `None` when the denominator is 0 (e.g. hr = 1, far = 0).
pub fn b_double_prime(hit_rate: f64, false_alarm_rate: f64) -> Result<Option<f64>> {
    check_rate("hit_rate", hit_rate)?;
    check_rate("false_alarm_rate", false_alarm_rate)?;
    let correct = (1.0 - hit_rate) * (1.0 - false_alarm_rate);
    let incorrect = hit_rate * false_alarm_rate;
    let denominator = correct + incorrect;
    if denominator == 0.0 {
        return Ok(None);
    }
    Ok(Some((correct - incorrect) / denominator))
}
