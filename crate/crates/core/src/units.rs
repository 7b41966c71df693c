//! Conversions between user-facing units and internal SI units.
//!
//! User-facing linewidths are ordinary-frequency FWHM in MHz; internally every
//! rate is an angular frequency in rad/s: `Γ = 2π × f[MHz] × 10⁶`.

use std::f64::consts::PI;

const MHZ: f64 = 1e6;
const NS: f64 = 1e-9;

pub fn mhz_to_rad_per_s(mhz: f64) -> f64 {
    2.0 * PI * mhz * MHZ
}

pub fn rad_per_s_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * MHZ)
}

pub fn ns_to_s(ns: f64) -> f64 {
    ns * NS
}

pub fn s_to_ns(s: f64) -> f64 {
    s / NS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for f in [2.6, 6.06, 7.3, 20.6] {
            let back = rad_per_s_to_mhz(mhz_to_rad_per_s(f));
            assert!((back - f).abs() <= 1e-12 * f);
        }
        assert!((s_to_ns(ns_to_s(3.25)) - 3.25).abs() < 1e-15);
        assert!((mhz_to_rad_per_s(1.0) - 6.283185307179586e6).abs() < 1e-6);
    }
}
