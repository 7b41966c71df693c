//! Emulated Fabry-Pérot scans of the photon before and after compression
//! with the experimental linewidths 20.6, 7.3 and 2.6 MHz.

use cavity_compression::prelude::*;
use cavity_compression::spectroscopy::symmetric_detunings;
use cavity_compression::units::{mhz_to_rad_per_s, rad_per_s_to_mhz};

pub fn run() -> Result<()> {
    let gamma_p = mhz_to_rad_per_s(20.6);
    let gamma_c = mhz_to_rad_per_s(7.3);
    let fp = FPParams::new(mhz_to_rad_per_s(2.6))?;

    let axes = AxisPair::default_for(gamma_p, 0.0)?;
    let pipeline = CompressionPipeline::new(PhotonParams::new(gamma_p, 0.0)?, axes)?;
    let flip_time = binary_flip_time(gamma_p, gamma_c)?;
    let out = pipeline.run(&CavityParams::resonant(gamma_c)?, &Modulation::BinaryFlip { flip_time })?;

    let detunings = symmetric_detunings(mhz_to_rad_per_s(40.0), 161)?;
    let before = scan(&out.input_spectrum, &fp, &detunings)?;
    let after = scan(&out.output_spectrum, &fp, &detunings)?.relative_to(&before);
    let before = before.relative_to(&before);

    for i in (0..detunings.len()).step_by(10) {
        let bar = |r: f64| "#".repeat((r * 20.0).round() as usize);
        println!(
            "{:>7.1} MHz  {:<22} {}",
            rad_per_s_to_mhz(detunings[i]),
            bar(before.rates[i]),
            bar(after.rates[i])
        );
    }
    println!(
        "uncompressed scan FWHM {:.2} MHz (Γp + Γfp = 23.2 MHz)",
        rad_per_s_to_mhz(before.fwhm()?.width)
    );
    println!("peak transmission rate ratio {:.3}", after.peak());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("Fabry-Pérot example");
}
