use chrono::Utc;

/// Source of the timestamp and duration written into a rule.
pub trait Clock: Send + Sync {
    /// `Thu Jun 27 18:02:32 BRT 2013` style.
    fn timestamp(&self) -> String;

    /// Duration to record for an evaluation that took `measured` ms.
    fn duration_ms(&self, measured: u64) -> u64 {
        measured
    }
}

/// Wall-clock time in UTC.
#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn timestamp(&self) -> String {
        Utc::now().format("%a %b %d %H:%M:%S %Z %Y").to_string()
    }
}

/// A pinned clock, for reproducible rule files.
#[derive(Clone, Debug)]
pub struct FixedClock {
    pub timestamp: String,
    /// Replaces measured durations when set.
    pub elapsed_ms: Option<u64>,
}

impl FixedClock {
    pub fn new(timestamp: impl Into<String>, elapsed_ms: Option<u64>) -> Self {
        FixedClock {
            timestamp: timestamp.into(),
            elapsed_ms,
        }
    }
}

impl Clock for FixedClock {
    fn timestamp(&self) -> String {
        self.timestamp.clone()
    }

    fn duration_ms(&self, measured: u64) -> u64 {
        self.elapsed_ms.unwrap_or(measured)
    }
}
