//! Amplitude and correction exponents over an ε grid.

use std::path::Path;

use resonant_waves::harness::{scaling_scan, RunConfig};

fn main() -> resonant_waves::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/caseB_d2.toml");
    let report = scaling_scan(&RunConfig::from_path(&path)?)?;
    report.write_csv(std::io::stdout().lock())?;
    println!(
        "amplitude slope {:.4} (expected {}), correction slope {:.4} (expected {}), pass {}",
        report.amplitude_slope,
        report.expected_amplitude,
        report.correction_slope,
        report.expected_correction,
        report.pass
    );
    Ok(())
}
