//! Drive tones, envelopes, and pulse schedules.

use crate::atomstruct::SpinAxis;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Envelope shape over a tone's active window `[start, stop]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `f = 1` over the whole window.
    Flat,
    /// `sin²` ramp up over `ramp` seconds, flat top, `sin²` ramp down.
    RampedFlat { ramp: f64 },
    /// `f = sin²(π t' / T)` over the whole window.
    FullSinSq,
}

impl Envelope {
    /// Envelope value at `t` for a window `[start, stop]`; zero outside.
    pub fn value(&self, t: f64, start: f64, stop: f64) -> f64 {
        if t < start || t > stop {
            return 0.0;
        }
        let dur = stop - start;
        let rel = t - start;
        match *self {
            Envelope::Flat => 1.0,
            Envelope::RampedFlat { ramp } => {
                if rel < ramp {
                    (PI * rel / (2.0 * ramp)).sin().powi(2)
                } else if rel > dur - ramp {
                    (PI * (dur - rel) / (2.0 * ramp)).sin().powi(2)
                } else {
                    1.0
                }
            }
            Envelope::FullSinSq => (PI * rel / dur).sin().powi(2),
        }
    }

    /// Mean value over the window (envelope area / duration).
    pub fn mean(&self, start: f64, stop: f64) -> f64 {
        match *self {
            Envelope::Flat => 1.0,
            Envelope::FullSinSq => 0.5,
            Envelope::RampedFlat { ramp } => {
                let dur = stop - start;
                // each sin^2 ramp integrates to ramp/2
                ((dur - 2.0 * ramp) + ramp) / dur
            }
        }
    }
}

/// What a tone is for, used to validate protocol gating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToneRole {
    Dressing,
    Target,
}

/// One oscillating magnetic-field tone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriveTone {
    pub polarization: SpinAxis,
    pub amplitude_gauss: f64,
    /// Carrier angular frequency, rad/s.
    pub frequency: f64,
    /// Carrier phase, rad.
    pub phase: f64,
    pub envelope: Envelope,
    pub role: ToneRole,
}

/// A tone with its active interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduledTone {
    pub tone: DriveTone,
    pub start: f64,
    pub stop: f64,
}

impl ScheduledTone {
    pub fn envelope_value(&self, t: f64) -> f64 {
        self.tone.envelope.value(t, self.start, self.stop)
    }

    /// Flat-top interval for ramped tones, full window otherwise.
    fn flat_window(&self) -> (f64, f64) {
        match self.tone.envelope {
            Envelope::RampedFlat { ramp } => (self.start + ramp, self.stop - ramp),
            _ => (self.start, self.stop),
        }
    }
}

/// A complete drive program.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub tones: Vec<ScheduledTone>,
    /// Total protocol duration, s.
    pub duration: f64,
}

impl PulseSchedule {
    pub fn new(tones: Vec<ScheduledTone>, duration: f64) -> Result<Self> {
        let schedule = PulseSchedule { tones, duration };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Structural checks: positive windows inside the protocol, sane
    /// amplitudes, ramps that fit, and target tones confined to the
    /// flat top of every dressing tone (`g(t) = 0` unless `f(t) = 1`).
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidConfig("schedule duration must be positive".into()));
        }
        for (k, st) in self.tones.iter().enumerate() {
            if !(st.stop > st.start) || st.start < 0.0 || st.stop > self.duration + 1e-15 {
                return Err(Error::InvalidConfig(format!(
                    "tone {k}: window [{:.3e}, {:.3e}] outside protocol [0, {:.3e}]",
                    st.start, st.stop, self.duration
                )));
            }
            if st.tone.amplitude_gauss < 0.0 || !st.tone.amplitude_gauss.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "tone {k}: amplitude must be non-negative, got {}",
                    st.tone.amplitude_gauss
                )));
            }
            if st.tone.frequency < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "tone {k}: carrier frequency must be non-negative",
                )));
            }
            if let Envelope::RampedFlat { ramp } = st.tone.envelope {
                if !(ramp > 0.0) || 2.0 * ramp > st.stop - st.start {
                    return Err(Error::InvalidConfig(format!(
                        "tone {k}: ramps of {ramp:.3e} s do not fit in the window"
                    )));
                }
            }
        }
        // targets only while every dressing envelope is flat at 1
        for (k, target) in self.tones.iter().enumerate() {
            if target.tone.role != ToneRole::Target {
                continue;
            }
            for dress in self.tones.iter().filter(|t| t.tone.role == ToneRole::Dressing) {
                let (flat_lo, flat_hi) = dress.flat_window();
                if target.start < flat_lo - 1e-15 || target.stop > flat_hi + 1e-15 {
                    return Err(Error::InvalidConfig(format!(
                        "target tone {k} active outside the dressing flat top"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest carrier frequency over all tones (rad/s).
    pub fn max_carrier(&self) -> f64 {
        self.tones
            .iter()
            .map(|t| t.tone.frequency)
            .fold(0.0, f64::max)
    }
}
