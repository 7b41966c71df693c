//! Grid scan plus simplex refinement of cavity linewidth and detuning.

use cavity_compression::optimizer::Stage;
use cavity_compression::prelude::*;

pub fn run() -> Result<()> {
    let axes = AxisPair::default_for(1.0, 0.0)?;
    let pipeline = CompressionPipeline::new(PhotonParams::new(1.0, 0.0)?, axes)?;

    let opt = minimize(&SearchSpace::default(), &pipeline)?;
    let grid = opt.trace.iter().filter(|e| e.stage == Stage::Grid).count();
    println!(
        "Γc = {:.4} Γp, Δω = {:+.4} Γp, flip at {:.4}/Γp -> B50 = {:.5} Γp",
        opt.gamma_c_opt,
        opt.detuning_opt,
        opt.flip_time_opt.unwrap_or(f64::NAN),
        opt.b50_opt
    );
    println!("{} evaluations ({grid} on the grid, {} failed)", opt.evaluation_count, opt.failures().count());

    // free flip time at fixed resonant Γc = Γp/4
    let space = SearchSpace {
        flip_mode: FlipMode::Free { range: (1.5, 3.5) },
        resolution: [1, 1, 21],
        ..SearchSpace::point(0.25, 0.0, FlipMode::Analytic)
    };
    let free = minimize(&space, &pipeline)?;
    println!(
        "free flip time {:.4}/Γp vs envelope zero {:.4}/Γp",
        free.flip_time_opt.unwrap_or(f64::NAN),
        binary_flip_time(1.0, 0.25)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("optimizer example");
}
