//! Injected faults for mutation-sensitivity testing.
//!
//! Without the `fault-injection` feature every query answers `false` and
//! [`inject`] refuses. With it, a single process-wide fault can be switched on;
//! callers that flip it must not run law checks concurrently.

use core::fmt;
use core::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Omit the `1/α!` factor in the Taylor sum of a lift.
    DropFactorial,
    /// Transpose the pair ↔ tensor-basis identification.
    TransposeTensorBasis,
    /// Accept presentations whose generators are not nilpotent.
    SkipLocalityCheck,
}

impl Fault {
    pub const ALL: [Fault; 3] = [
        Fault::DropFactorial,
        Fault::TransposeTensorBasis,
        Fault::SkipLocalityCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::DropFactorial => "drop-factorial",
            Fault::TransposeTensorBasis => "transpose-tensor-basis",
            Fault::SkipLocalityCheck => "skip-locality-check",
        }
    }

    #[cfg(feature = "fault-injection")]
    fn code(self) -> u8 {
        match self {
            Fault::DropFactorial => 1,
            Fault::TransposeTensorBasis => 2,
            Fault::SkipLocalityCheck => 3,
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fault {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Fault::ALL.into_iter().find(|f| f.name() == s).ok_or(())
    }
}

/// Whether this build can inject faults at all.
pub const AVAILABLE: bool = cfg!(feature = "fault-injection");

#[cfg(feature = "fault-injection")]
static ACTIVE: core::sync::atomic::AtomicU8 = core::sync::atomic::AtomicU8::new(0);

/// Switch the active fault (`None` restores correct behaviour).
///
/// Returns `false` when the build lacks the `fault-injection` feature.
pub fn inject(fault: Option<Fault>) -> bool {
    #[cfg(feature = "fault-injection")]
    {
        ACTIVE.store(fault.map_or(0, Fault::code), core::sync::atomic::Ordering::SeqCst);
        true
    }
    #[cfg(not(feature = "fault-injection"))]
    {
        fault.is_none()
    }
}

#[inline]
pub fn is_active(fault: Fault) -> bool {
    #[cfg(feature = "fault-injection")]
    {
        ACTIVE.load(core::sync::atomic::Ordering::Relaxed) == fault.code()
    }
    #[cfg(not(feature = "fault-injection"))]
    {
        let _ = fault;
        false
    }
}
