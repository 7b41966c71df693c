//! A heralded single photon on the default grid: its spectrum against the
//! closed-form Lorentzian, and the two bandwidth measures.

use cavity_compression::metrics::{bandwidth_b50, power_spectrum};
use cavity_compression::prelude::*;
use cavity_compression::units::{mhz_to_rad_per_s, rad_per_s_to_mhz};
use cavity_compression::wavepacket::heralded_spectrum_analytic;

pub fn run() -> Result<()> {
    let gamma_p = mhz_to_rad_per_s(20.6);
    let photon = PhotonParams::new(gamma_p, 0.0)?;
    let axes = AxisPair::default_for(gamma_p, 0.0)?;

    let psi = heralded_exponential(photon, axes)?;
    let spectrum = forward_transform(&psi)?;
    println!("energy in time {:.12}, in frequency {:.12}", psi.energy(), spectrum.energy());

    // worst deviation from the analytic power spectrum within ±5 Γp
    let mut worst: f64 = 0.0;
    for (k, z) in spectrum.samples().iter().enumerate() {
        let w = axes.frequency(k);
        if w.abs() <= 5.0 * gamma_p {
            let exact = heralded_spectrum_analytic(w, photon).norm_sqr();
            worst = worst.max((z.norm_sqr() - exact).abs() / exact);
        }
    }
    println!("max relative deviation from Lorentzian within ±5 Γp: {worst:.2e}");

    let report = bandwidth_b50(&power_spectrum(&spectrum), &axes)?;
    println!(
        "B50 = {:.3} MHz over [{:.3}, {:.3}] MHz, FWHM = {:.3} MHz (grid step {:.3} MHz)",
        rad_per_s_to_mhz(report.b50),
        rad_per_s_to_mhz(report.window_lo),
        rad_per_s_to_mhz(report.window_hi),
        rad_per_s_to_mhz(report.fwhm.unwrap_or(f64::NAN)),
        rad_per_s_to_mhz(axes.frequency_step()),
    );
    assert!((report.b50 - gamma_p).abs() < axes.frequency_step());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("heralded spectrum example");
}
