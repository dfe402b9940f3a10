use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lower end of the range CLPFD restricts integers to.
pub const CLPFD_MIN: i64 = -(1 << 28);
/// Upper end of the CLPFD range.
pub const CLPFD_MAX: i64 = (1 << 28) - 1;

/// Evaluation options, mirroring the ProB command-line parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalParams {
    pub minint: i64,
    pub maxint: i64,
    pub timeout_ms: u64,
    /// Expand DEFINITIONS before evaluating.
    pub init: bool,
    /// Alternate enumeration order.
    pub kodkod: bool,
    /// Interval propagation on quantifier domains before enumeration.
    pub smt: bool,
    /// Restrict integers to the CLPFD range as well.
    pub clpfd: bool,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            minint: -65536,
            maxint: 65536,
            timeout_ms: 10_000,
            init: false,
            kodkod: false,
            smt: false,
            clpfd: false,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("MININT ({minint}) must be below MAXINT ({maxint})")]
    EmptyRange { minint: i64, maxint: i64 },
    #[error("TIME_OUT must be a positive number of milliseconds")]
    ZeroTimeout,
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("parameter {name} expects {expected}, got '{found}'")]
    BadValue {
        name: String,
        expected: &'static str,
        found: String,
    },
    #[error("expected '-p' before '{0}'")]
    MissingFlag(String),
}

impl EvalParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.minint >= self.maxint {
            return Err(ParamsError::EmptyRange {
                minint: self.minint,
                maxint: self.maxint,
            });
        }
        if self.timeout_ms == 0 {
            return Err(ParamsError::ZeroTimeout);
        }
        Ok(())
    }

    /// Inclusive integer range that values must stay within.
    pub fn int_bounds(&self) -> (i64, i64) {
        if self.clpfd {
            (self.minint.max(CLPFD_MIN), self.maxint.min(CLPFD_MAX))
        } else {
            (self.minint, self.maxint)
        }
    }

    /// `-p MAXINT 65536 -p MININT -65536 -p TIME_OUT 10000 ...`; boolean
    /// options appear only when set.
    pub fn to_flag_string(&self) -> String {
        let mut parts = vec![
            format!("-p MAXINT {}", self.maxint),
            format!("-p MININT {}", self.minint),
            format!("-p TIME_OUT {}", self.timeout_ms),
        ];
        if self.init {
            parts.push("-p init".into());
        }
        for (on, name) in [
            (self.kodkod, "KODKOD"),
            (self.smt, "SMT"),
            (self.clpfd, "CLPFD"),
        ] {
            if on {
                parts.push(format!("-p {name} TRUE"));
            }
        }
        parts.join(" ")
    }

    /// Parses a flag string, starting from the defaults. Unmentioned options
    /// keep their default values.
    pub fn from_flag_string(text: &str) -> Result<Self, ParamsError> {
        let mut params = EvalParams::default();
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut i = 0;
        while i < words.len() {
            if words[i] != "-p" {
                return Err(ParamsError::MissingFlag(words[i].to_string()));
            }
            let name = *words
                .get(i + 1)
                .ok_or_else(|| ParamsError::MissingFlag("end of input".into()))?;
            if name.eq_ignore_ascii_case("init") {
                // bare `-p init`, or `-p INIT TRUE|FALSE`
                match words.get(i + 2) {
                    Some(&v) if v == "TRUE" || v == "FALSE" => {
                        params.init = v == "TRUE";
                        i += 3;
                    }
                    _ => {
                        params.init = true;
                        i += 2;
                    }
                }
                continue;
            }
            let value = *words.get(i + 2).ok_or_else(|| ParamsError::BadValue {
                name: name.to_string(),
                expected: "a value",
                found: String::new(),
            })?;
            match name {
                "MAXINT" => params.maxint = parse_int(name, value)?,
                "MININT" => params.minint = parse_int(name, value)?,
                "TIME_OUT" => params.timeout_ms = parse_int(name, value)?,
                "KODKOD" => params.kodkod = parse_bool(name, value)?,
                "SMT" => params.smt = parse_bool(name, value)?,
                "CLPFD" => params.clpfd = parse_bool(name, value)?,
                other => return Err(ParamsError::UnknownParameter(other.to_string())),
            }
            i += 3;
        }
        params.validate()?;
        Ok(params)
    }
}

fn parse_int<T: FromStr>(name: &str, value: &str) -> Result<T, ParamsError> {
    value.parse().map_err(|_| ParamsError::BadValue {
        name: name.to_string(),
        expected: "an integer",
        found: value.to_string(),
    })
}

fn parse_bool(name: &str, value: &str) -> Result<bool, ParamsError> {
    match value {
        "TRUE" => Ok(true),
        "FALSE" => Ok(false),
        _ => Err(ParamsError::BadValue {
            name: name.to_string(),
            expected: "TRUE or FALSE",
            found: value.to_string(),
        }),
    }
}

impl fmt::Display for EvalParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_flag_string())
    }
}

impl FromStr for EvalParams {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalParams::from_flag_string(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_match_the_prob_command_line() {
        let p = EvalParams::default();
        assert_eq!(
            p.to_flag_string(),
            "-p MAXINT 65536 -p MININT -65536 -p TIME_OUT 10000"
        );
        assert_eq!(p.int_bounds(), (-65536, 65536));
    }

    #[test]
    fn parses_boolean_options_and_init() {
        let p: EvalParams = "-p MAXINT 100 -p MININT -5 -p KODKOD TRUE -p SMT TRUE -p init"
            .parse()
            .unwrap();
        assert_eq!((p.minint, p.maxint), (-5, 100));
        assert!(p.kodkod && p.smt && p.init && !p.clpfd);
        assert_eq!(p.timeout_ms, 10_000);
    }

    #[test]
    fn init_takes_an_optional_value() {
        let p: EvalParams = "-p INIT TRUE -p KODKOD TRUE -p SMT TRUE -p CLPFD TRUE"
            .parse()
            .unwrap();
        assert!(p.init && p.kodkod && p.smt && p.clpfd);
        let p: EvalParams = "-p INIT FALSE -p MAXINT 9".parse().unwrap();
        assert!(!p.init);
        assert_eq!(p.maxint, 9);
    }

    #[test]
    fn clpfd_narrows_the_range() {
        let p = EvalParams {
            minint: -(1 << 40),
            maxint: 1 << 40,
            clpfd: true,
            ..EvalParams::default()
        };
        assert_eq!(p.int_bounds(), (-(1 << 28), (1 << 28) - 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            "-p MAXINT 1 -p MININT 1".parse::<EvalParams>(),
            Err(ParamsError::EmptyRange { .. })
        ));
        assert!(matches!(
            "-p FOO TRUE".parse::<EvalParams>(),
            Err(ParamsError::UnknownParameter(_))
        ));
        assert!(matches!(
            "-p SMT yes".parse::<EvalParams>(),
            Err(ParamsError::BadValue { .. })
        ));
        assert!(matches!(
            "MAXINT 5".parse::<EvalParams>(),
            Err(ParamsError::MissingFlag(_))
        ));
        assert!(matches!(
            "-p TIME_OUT 0".parse::<EvalParams>(),
            Err(ParamsError::ZeroTimeout)
        ));
    }

    proptest! {
        #[test]
        fn flag_string_round_trips(
            minint in -100_000i64..0,
            span in 1i64..200_000,
            timeout_ms in 1u64..100_000,
            init: bool, kodkod: bool, smt: bool, clpfd: bool,
        ) {
            let p = EvalParams { minint, maxint: minint + span, timeout_ms, init, kodkod, smt, clpfd };
            prop_assert_eq!(EvalParams::from_flag_string(&p.to_flag_string()).unwrap(), p);
        }
    }
}
