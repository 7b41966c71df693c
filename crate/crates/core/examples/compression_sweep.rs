//! Compressed bandwidth against cavity linewidth for a resonant cavity with
//! the flip at the envelope zero.

use cavity_compression::prelude::*;

pub fn run() -> Result<()> {
    let axes = AxisPair::default_for(1.0, 0.0)?;
    let pipeline = CompressionPipeline::new(PhotonParams::new(1.0, 0.0)?, axes)?;

    println!("{:>8} {:>10} {:>10}", "Γc/Γp", "t_flip·Γp", "B50/Γp");
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 1..=18 {
        let gamma_c = 0.05 * i as f64;
        let flip_time = binary_flip_time(1.0, gamma_c)?;
        let b50 = pipeline.objective(&CavityParams::resonant(gamma_c)?, &Modulation::BinaryFlip { flip_time })?;
        println!("{gamma_c:>8.2} {flip_time:>10.4} {b50:>10.4}");
        if b50 < best.1 {
            best = (gamma_c, b50);
        }
    }
    println!("narrowest on this sweep: Γc = {:.2} Γp, B50 = {:.4} Γp", best.0, best.1);

    let unmodulated = pipeline.objective(&CavityParams::resonant(0.25)?, &Modulation::None)?;
    println!("without the modulator B50 stays at {unmodulated:.4} Γp");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("compression sweep example");
}
