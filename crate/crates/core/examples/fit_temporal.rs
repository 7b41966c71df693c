//! Fit the photon decay rate to a synthetic coincidence histogram.

use cavity_compression::estimation::synthetic::{decay_histogram, HistogramLayout};
use cavity_compression::prelude::*;
use cavity_compression::units::{mhz_to_rad_per_s, s_to_ns};

pub fn run() -> Result<()> {
    let gamma_p = mhz_to_rad_per_s(20.6);
    let layout = HistogramLayout { start: -10e-9, bin_width: 0.5e-9, n_bins: 200 };

    for seed in 0..5 {
        let hist = decay_histogram(&layout, gamma_p, 1.2e-9, 1e5, Some(seed))?;
        let fit = fit_exponential_decay(&hist)?;
        println!(
            "seed {seed}: Γp = {:.3} ± {:.3} MHz, t0 = {:.3} ns, converged {}",
            fit.get("gamma_p_mhz").unwrap_or(f64::NAN),
            fit.std_error("gamma_p").unwrap_or(f64::NAN) / mhz_to_rad_per_s(1.0),
            s_to_ns(fit.get("t0").unwrap_or(f64::NAN)),
            fit.converged
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("temporal fit example");
}
