use serde::{Deserialize, Serialize};

/// How a try's running time is measured and budgeted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// CPU seconds of the worker thread running the try.
    #[default]
    Cpu,
    /// The solver's deterministic work counter; makes whole experiments
    /// reproducible byte for byte.
    Work,
}

impl std::str::FromStr for Clock {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cpu" => Ok(Clock::Cpu),
            "work" => Ok(Clock::Work),
            _ => Err(format!("unknown clock {s:?} (expected cpu or work)")),
        }
    }
}

/// CPU time consumed by the calling thread, in seconds.
pub fn thread_cpu_time() -> f64 {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "clock_gettime(CLOCK_THREAD_CPUTIME_ID) failed");
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Per-try limits. `timeout` is in the unit of `clock`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub clock: Clock,
    pub timeout: f64,
    /// Optional step limit on top of the timeout.
    pub cutoff: Option<u64>,
}

impl Budget {
    pub fn cpu_seconds(timeout: f64) -> Self {
        Budget {
            clock: Clock::Cpu,
            timeout,
            cutoff: None,
        }
    }

    pub fn work_units(timeout: f64) -> Self {
        Budget {
            clock: Clock::Work,
            timeout,
            cutoff: None,
        }
    }
}
