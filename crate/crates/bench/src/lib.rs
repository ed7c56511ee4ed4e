//! Shared fixtures for the benchmarks.

use landau_core::capacity::CompactSet;
use landau_core::profile::RadialProfile;
use landau_core::symbol::{AngularMode, Symbol2D};

/// Radial symbol `e^{-a s}`.
pub fn gaussian_symbol(a: f64) -> Symbol2D {
    Symbol2D::radial(RadialProfile::gaussian(a))
}

/// A non-radial symbol with angular band 1.
pub fn banded_symbol() -> Symbol2D {
    Symbol2D::AngularFourier(vec![AngularMode {
        m: 1,
        cos: Some(RadialProfile::gaussian(0.4)),
        sin: None,
    }])
}

pub fn unit_disk() -> CompactSet {
    CompactSet::disk([0.0, 0.0], 1.0)
}

pub fn unit_segment() -> CompactSet {
    CompactSet::segment([-1.0, 0.0], [1.0, 0.0])
}
