//! Cellwise outlier detection: the Z-score detector (per-coordinate) and
//! the DDC-style detector (uses cross-coordinate structure) on data with
//! planted cell contamination.
//!
//! Run with: cargo run --example detect_cells

use cellwise_conformal::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    // correlated training data: x2 ~ x1, x3 independent
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut normal = move || {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let z = normal();
            vec![z, z + 0.1 * normal(), normal()]
        })
        .collect();
    let train = FeatureMatrix::from_rows(&rows)?;

    let zscore = fit_zscore(&train, DEFAULT_Z_THRESHOLD)?;
    let ddc = fit_ddc(&train, 0.95)?;
    println!("z-score thresholds: {:?}", zscore.thresholds());
    println!("ddc thresholds:     {:?}", ddc.thresholds());

    // a test point whose second cell disagrees with its first: marginally
    // unremarkable, structurally impossible
    let sneaky = [2.0, -2.0, 0.0];
    println!("\npoint {sneaky:?} (cells marginally fine, jointly inconsistent):");
    println!("  z-score flags: {:?}", detect(&zscore, &sneaky)?.mask.iter().collect::<Vec<_>>());
    println!("  ddc flags:     {:?}", detect(&ddc, &sneaky)?.mask.iter().collect::<Vec<_>>());
    println!("  ddc scores:    {:?}", scores(&ddc, &sneaky)?.iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>());

    // a marginally huge cell: both detectors see it
    let loud = [0.0, 0.0, 25.0];
    println!("\npoint {loud:?} (one marginally huge cell):");
    println!("  z-score flags: {:?}", detect(&zscore, &loud)?.mask.iter().collect::<Vec<_>>());
    println!("  ddc flags:     {:?}", detect(&ddc, &loud)?.mask.iter().collect::<Vec<_>>());

    // sure detection in action: plant an outlier far beyond the
    // threshold, and the detection of the contaminated point is exactly
    // the detection of the clean point united with the planted cells
    let clean = [0.3, 0.35, -0.8];
    let mut contaminated = clean;
    contaminated[2] = 1e6;
    let d_clean = detect(&zscore, &clean)?.mask;
    let d_cont = detect(&zscore, &contaminated)?.mask;
    let planted = CellMask::from_indices(vec![2]);
    assert_eq!(d_cont, d_clean.union(&planted));
    println!(
        "\nsure-detection identity: detect(contaminated) = detect(clean) + planted cells = {:?}",
        d_cont.iter().collect::<Vec<_>>()
    );
    Ok(())
}
