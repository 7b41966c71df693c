//! Drive the `ccomp` command line in-process and read back its summary.

use cavity_compression::cli::{self, read_key_values};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("ccomp-example-{}", std::process::id()));
    let out = dir.to_string_lossy().into_owned();

    // Γc = Γp/4 with the default 20.6 MHz photon
    let code = cli::run(["ccomp", "simulate", "--gamma-c-mhz", "5.15", "--out", out.as_str()]);
    assert_eq!(code, cli::EXIT_OK);
    let summary = read_key_values(&dir.join("summary.txt"))?;
    for key in ["b50_input_mhz", "b50_compressed_mhz", "b50_compressed_over_gamma_p", "b50_ratio"] {
        println!("{key} = {}", summary[key]);
    }

    let code = cli::run(["ccomp", "fit-temporal", "--seed", "3", "--out", out.as_str()]);
    let fit = read_key_values(&dir.join("fit.txt"))?;
    println!("fit-temporal exit {code}: gamma_p_mhz = {}", fit["gamma_p_mhz"]);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().expect("command line example");
}
