//! Annealing coefficient paths `H(s) = A·D(s)·H_d + P(s)·H_p + Z(s)·H_z`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `D = 1 - s`, `Z = 0`; starts from the uniform superposition.
    Vanilla,
    /// `D = s(1 - s)`, `Z = 1 - s`.
    QuadraticReverse,
    /// `D` piecewise and exactly zero on `[0.9, 1]`, `Z = 1 - s`.
    PiecewiseReverse,
}

impl ScheduleKind {
    pub fn is_reverse(self) -> bool {
        !matches!(self, ScheduleKind::Vanilla)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Vanilla => "vanilla",
            ScheduleKind::QuadraticReverse => "quadratic",
            ScheduleKind::PiecewiseReverse => "piecewise",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(ScheduleKind::Vanilla),
            "quadratic" | "quadratic-reverse" => Ok(ScheduleKind::QuadraticReverse),
            "piecewise" | "piecewise-reverse" => Ok(ScheduleKind::PiecewiseReverse),
            other => Err(Error::input(format!(
                "unknown schedule {other:?} (expected vanilla, quadratic or piecewise)"
            ))),
        }
    }
}

/// Middle branch `a·s² + b·s + c` of the piecewise driver and its breakpoints.
/// Kept as data so transcription errors can be caught by [`check_branch_continuity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDriver {
    pub quadratic: f64,
    pub linear: f64,
    pub constant: f64,
    pub first_break: f64,
    pub second_break: f64,
}

impl Default for PiecewiseDriver {
    fn default() -> Self {
        PiecewiseDriver {
            quadratic: -25.0 / 16.0,
            linear: 25.0 / 16.0,
            constant: -9.0 / 64.0,
            first_break: 0.5,
            second_break: 0.9,
        }
    }
}

impl PiecewiseDriver {
    fn rising(s: f64) -> f64 {
        s * (1.0 - s)
    }

    fn middle(&self, s: f64) -> f64 {
        (self.quadratic * s + self.linear) * s + self.constant
    }

    /// Branches on `[0, b1)`, `[b1, b2)`, `[b2, 1]`.
    pub fn value(&self, s: f64) -> f64 {
        if s < self.first_break {
            Self::rising(s)
        } else if s < self.second_break {
            self.middle(s)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub kind: ScheduleKind,
    /// Overall multiplier `A` on the driver coefficient.
    pub driver_amplitude: f64,
    #[serde(default)]
    pub piecewise: PiecewiseDriver,
}

/// Coefficients of the driver, problem and diagonal-perturbation terms at one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub d: f64,
    pub p: f64,
    pub z: f64,
}

impl AnnealSchedule {
    pub fn new(kind: ScheduleKind) -> Self {
        AnnealSchedule { kind, driver_amplitude: 1.0, piecewise: PiecewiseDriver::default() }
    }

    pub fn with_amplitude(kind: ScheduleKind, driver_amplitude: f64) -> Result<Self> {
        if !(driver_amplitude.is_finite() && driver_amplitude > 0.0) {
            return Err(Error::input(format!("driver amplitude must be positive, got {driver_amplitude}")));
        }
        Ok(AnnealSchedule { driver_amplitude, ..Self::new(kind) })
    }

    /// Unscaled driver profile `D(s)`.
    pub fn driver_profile(&self, s: f64) -> f64 {
        match self.kind {
            ScheduleKind::Vanilla => 1.0 - s,
            ScheduleKind::QuadraticReverse => s * (1.0 - s),
            ScheduleKind::PiecewiseReverse => self.piecewise.value(s),
        }
    }

    pub fn evaluate(&self, s: f64) -> Result<CoefficientTriple> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::input(format!("schedule parameter s = {s} outside [0, 1]")));
        }
        Ok(self.evaluate_unchecked(s))
    }

    pub(crate) fn evaluate_unchecked(&self, s: f64) -> CoefficientTriple {
        let d = self.driver_amplitude * self.driver_profile(s);
        let z = if self.kind.is_reverse() { 1.0 - s } else { 0.0 };
        CoefficientTriple { d, p: s, z }
    }
}

/// Largest discontinuity of the piecewise driver across its two breakpoints.
pub fn check_branch_continuity(schedule: &AnnealSchedule) -> Result<f64> {
    if schedule.kind != ScheduleKind::PiecewiseReverse {
        return Err(Error::input(format!(
            "branch continuity applies to the piecewise schedule, not {}",
            schedule.kind
        )));
    }
    let pw = &schedule.piecewise;
    let first = (PiecewiseDriver::rising(pw.first_break) - pw.middle(pw.first_break)).abs();
    let second = pw.middle(pw.second_break).abs();
    Ok(schedule.driver_amplitude * first.max(second))
}
