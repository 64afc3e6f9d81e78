use std::fmt::Write;

use thiserror::Error;

use crate::model::Day;

/// Objective weights of the soft constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    /// Base penalty for teaching in a slot with availability 0; each step
    /// down (-1, -2) multiplies it by ten.
    pub c0: f64,
    /// Teaching both first and last period on a day.
    pub d4: f64,
    /// Full-time professor not teaching on the meeting day.
    pub dtue: f64,
    /// Two-period lecture on consecutive days.
    pub dgp2: f64,
    /// Three-period lecture on three consecutive days.
    pub dgp3: f64,
    /// Professor teaching all five days.
    pub d5: f64,
    /// Per-student over-capacity penalty for lectures (soft capacity).
    pub ct_regular: f64,
    /// Per-student over-capacity penalty for labs (soft capacity).
    pub ct_lab: f64,
    /// Scales the availability penalty of adjunct professors.
    pub adjunct_multiplier: f64,
    /// Day on which full-time professors should teach.
    pub meeting_day: Day,
}

impl Default for Weights {
    fn default() -> Weights {
        Weights {
            c0: 1000.0,
            d4: 50.0,
            dtue: 20.0,
            dgp2: 1.0,
            dgp3: 1.0,
            d5: 100.0,
            ct_regular: 200.0,
            ct_lab: 1e6,
            adjunct_multiplier: 10.0,
            meeting_day: Day::T,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightsError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown weight {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value {value:?} for {key}: {reason}")]
    BadValue { line: usize, key: String, value: String, reason: &'static str },
}

impl Weights {
    /// Reads `key=value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Weights, WeightsError> {
        let mut w = Weights::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(WeightsError::Syntax { line, text: raw.to_string() });
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = |reason| WeightsError::BadValue { line, key: key.to_string(), value: value.to_string(), reason };
            if key == "meeting_day" {
                w.meeting_day = Day::parse(value).ok_or_else(|| bad("not a day (M,T,W,R,F)"))?;
                continue;
            }
            let v: f64 = value.parse().map_err(|_| bad("not a number"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(bad("must be finite and non-negative"));
            }
            let slot = match key {
                "c0" => &mut w.c0,
                "d4" => &mut w.d4,
                "dtue" => &mut w.dtue,
                "dgp2" => &mut w.dgp2,
                "dgp3" => &mut w.dgp3,
                "d5" => &mut w.d5,
                "ct_regular" => &mut w.ct_regular,
                "ct_lab" => &mut w.ct_lab,
                "adjunct_multiplier" => {
                    if v < 1.0 {
                        return Err(bad("must be at least 1"));
                    }
                    &mut w.adjunct_multiplier
                }
                _ => return Err(WeightsError::UnknownKey { line, key: key.to_string() }),
            };
            *slot = v;
        }
        Ok(w)
    }

    /// Renders every weight as `key=value`; `parse` reads it back unchanged.
    pub fn to_cfg(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("c0", self.c0),
            ("d4", self.d4),
            ("dtue", self.dtue),
            ("dgp2", self.dgp2),
            ("dgp3", self.dgp3),
            ("d5", self.d5),
            ("ct_regular", self.ct_regular),
            ("ct_lab", self.ct_lab),
            ("adjunct_multiplier", self.adjunct_multiplier),
        ] {
            let _ = writeln!(out, "{k}={v}");
        }
        let _ = writeln!(out, "meeting_day={}", self.meeting_day);
        out
    }

    /// Penalty for one unit of unavailability at level `avail` (0, -1, -2).
    pub fn availability_cost(&self, avail: i8, adjunct: bool) -> f64 {
        let base = self.c0 * 10f64.powi(-i32::from(avail));
        if adjunct {
            base * self.adjunct_multiplier
        } else {
            base
        }
    }

    /// Every weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Weights {
        Weights {
            c0: self.c0 * k,
            d4: self.d4 * k,
            dtue: self.dtue * k,
            dgp2: self.dgp2 * k,
            dgp3: self.dgp3 * k,
            d5: self.d5 * k,
            ct_regular: self.ct_regular * k,
            ct_lab: self.ct_lab * k,
            adjunct_multiplier: self.adjunct_multiplier,
            meeting_day: self.meeting_day,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let w = Weights::parse("# tuned\nd4 = 75\nmeeting_day=R\n\nct_lab=1e7 # big\n").unwrap();
        assert_eq!(w.d4, 75.0);
        assert_eq!(w.ct_lab, 1e7);
        assert_eq!(w.meeting_day, Day::R);
        assert_eq!(w.c0, 1000.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Weights::parse("d4"), Err(WeightsError::Syntax { .. })));
        assert!(matches!(Weights::parse("d6=1"), Err(WeightsError::UnknownKey { .. })));
        assert!(matches!(Weights::parse("d4=-1"), Err(WeightsError::BadValue { .. })));
        assert!(matches!(Weights::parse("adjunct_multiplier=0.5"), Err(WeightsError::BadValue { .. })));
    }

    #[test]
    fn cfg_round_trip() {
        let w = Weights { dgp2: 2.5, meeting_day: Day::W, ..Weights::default() };
        assert_eq!(Weights::parse(&w.to_cfg()).unwrap(), w);
    }

    #[test]
    fn availability_cost() {
        let w = Weights::default();
        assert_eq!(w.availability_cost(0, false), 1000.0);
        assert_eq!(w.availability_cost(-2, false), 100_000.0);
        assert_eq!(w.availability_cost(-1, true), 100_000.0);
    }
}
