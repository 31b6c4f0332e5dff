//! Emulated fixed-function cycle counters and the frequency estimator built
//! on them.
//!
//! The estimator reads two counters at each interval boundary: unhalted core
//! cycles (advancing at the actual frequency) and unhalted reference cycles
//! (advancing at the base operating frequency). Both stop while the core is
//! halted, so their ratio scales the base frequency into the frequency the
//! core really ran at.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Khz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CounterSample {
    pub unhalted_core_cycles: u64,
    pub unhalted_ref_cycles: u64,
    pub base_ratio: u32,
    pub bus_clock_khz: Khz,
}

impl CounterSample {
    pub fn zeroed(base_ratio: u32, bus_clock_khz: Khz) -> Self {
        Self {
            unhalted_core_cycles: 0,
            unhalted_ref_cycles: 0,
            base_ratio,
            bus_clock_khz,
        }
    }

    /// Advances both counters over `unhalted_ms` milliseconds of unhalted
    /// execution at `core_khz`. One kHz for one ms is exactly one cycle.
    pub fn advance(&self, core_khz: Khz, unhalted_ms: u64) -> Result<Self> {
        let base = base_operating_frequency(self.base_ratio, self.bus_clock_khz)?;
        Ok(Self {
            unhalted_core_cycles: self.unhalted_core_cycles + core_khz * unhalted_ms,
            unhalted_ref_cycles: self.unhalted_ref_cycles + base * unhalted_ms,
            ..*self
        })
    }
}

/// Platform base ratio times the bus clock.
pub fn base_operating_frequency(base_ratio: u32, bus_clock_khz: Khz) -> Result<Khz> {
    if base_ratio < 1 {
        return Err(Error::InvalidPlatformRatio(base_ratio));
    }
    Ok(base_ratio as Khz * bus_clock_khz)
}

/// `base × Δcore / Δref`, rounded to the nearest kHz.
pub fn measure_frequency(prev: &CounterSample, curr: &CounterSample) -> Result<Khz> {
    if curr.unhalted_core_cycles < prev.unhalted_core_cycles
        || curr.unhalted_ref_cycles < prev.unhalted_ref_cycles
    {
        return Err(Error::CounterRegression);
    }
    let core = (curr.unhalted_core_cycles - prev.unhalted_core_cycles) as u128;
    let reference = (curr.unhalted_ref_cycles - prev.unhalted_ref_cycles) as u128;
    if reference == 0 {
        return Err(Error::NoReferenceCycles);
    }
    let base = base_operating_frequency(curr.base_ratio, curr.bus_clock_khz)? as u128;
    Ok(((base * core * 2 + reference) / (2 * reference)) as Khz)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sample(core: u64, reference: u64) -> CounterSample {
        CounterSample {
            unhalted_core_cycles: core,
            unhalted_ref_cycles: reference,
            base_ratio: 24,
            bus_clock_khz: 133_333,
        }
    }

    #[test]
    fn base_frequency() {
        assert_eq!(base_operating_frequency(24, 133_333).unwrap(), 3_199_992);
        assert_eq!(base_operating_frequency(12, 133_333).unwrap(), 1_599_996);
        assert_eq!(base_operating_frequency(1, 133_333).unwrap(), 133_333);
        assert!(matches!(
            base_operating_frequency(0, 133_333),
            Err(Error::InvalidPlatformRatio(0))
        ));
    }

    #[test]
    fn equal_deltas_give_base() {
        let prev = sample(1_000, 2_000);
        let curr = sample(1_000 + 777_777, 2_000 + 777_777);
        assert_eq!(measure_frequency(&prev, &curr).unwrap(), 3_199_992);
    }

    #[test]
    fn turbo_ratio() {
        let prev = CounterSample {
            base_ratio: 32,
            bus_clock_khz: 100_000,
            ..sample(0, 0)
        };
        let curr = CounterSample {
            unhalted_core_cycles: 3_400_000_000,
            unhalted_ref_cycles: 3_200_000_000,
            ..prev
        };
        assert_eq!(measure_frequency(&prev, &curr).unwrap(), 3_400_000);
    }

    #[test]
    fn halted_interval_is_an_error() {
        let s = sample(10, 10);
        assert!(matches!(
            measure_frequency(&s, &s),
            Err(Error::NoReferenceCycles)
        ));
        assert!(matches!(
            measure_frequency(&sample(10, 10), &sample(5, 20)),
            Err(Error::CounterRegression)
        ));
    }

    proptest! {
        #[test]
        fn advance_then_measure_is_exact(
            khz in 100_000u64..6_000_000,
            ms in 1u64..100_000,
            ratio in 1u32..60,
            start in 0u64..1_000_000_000,
        ) {
            let prev = CounterSample {
                unhalted_core_cycles: start,
                unhalted_ref_cycles: start / 2,
                base_ratio: ratio,
                bus_clock_khz: 133_333,
            };
            let curr = prev.advance(khz, ms).unwrap();
            prop_assert!(curr.unhalted_core_cycles >= prev.unhalted_core_cycles);
            prop_assert_eq!(measure_frequency(&prev, &curr).unwrap(), khz);
        }
    }
}
