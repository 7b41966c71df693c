//! Fit optical density and scale of a self-absorbed Lorentzian to a noisy
//! scan, then reconstruct the line without absorption.

use cavity_compression::estimation::synthetic::reabsorption_scan;
use cavity_compression::prelude::*;
use cavity_compression::spectroscopy::symmetric_detunings;

pub fn run() -> Result<()> {
    // MHz throughout: the lineshape only depends on ratios of frequencies
    let (gamma_p, gamma_a) = (20.6, 6.06);
    let detunings = symmetric_detunings(60.0, 121)?;
    let data = reabsorption_scan(&detunings, 1.0, gamma_p, gamma_a, 1.0, 0.02, Some(11))?;

    let fit = fit_reabsorption(&data, gamma_p, gamma_a)?;
    let od = fit.result.get("od").unwrap_or(f64::NAN);
    println!(
        "OD = {od:.4} ± {:.4}, A = {:.4} ± {:.4}, converged {}",
        fit.result.std_error("od").unwrap_or(f64::NAN),
        fit.result.get("scale").unwrap_or(f64::NAN),
        fit.result.std_error("scale").unwrap_or(f64::NAN),
        fit.result.converged
    );
    let centre = detunings.len() / 2;
    println!(
        "on resonance: measured {:.5}, without absorption {:.5}",
        data.y[centre], fit.lorentzian[centre]
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("reabsorption fit example");
}
