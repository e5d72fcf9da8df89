//! A diagnostic for detector stability: compare the false-discovery sets
//! the detector produces on contaminated versus clean versions of the
//! same test points, via Jaccard similarity. High similarity means the
//! spurious flags are a property of the point, not of the contamination.
//!
//! Run with: cargo run --example jaccard_diagnostic

use cellwise_conformal::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    // correlated coordinates, so the detector's cross-coordinate
    // predictions couple cells: contaminating one cell can change which
    // OTHER cells look suspicious
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let normal = {
        use rand::Rng;
        move |rng: &mut ChaCha8Rng| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    };
    let draw_row = move |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let f1 = normal(rng);
        let f2 = normal(rng);
        (0..d)
            .map(|j| {
                let loading = if j % 2 == 0 { f1 } else { f2 };
                0.8 * loading + 0.3 * normal(rng)
            })
            .collect()
    };
    let train_rows: Vec<Vec<f64>> = (0..400).map(|_| draw_row(&mut rng)).collect();
    let train = FeatureMatrix::from_rows(&train_rows)?;
    let test_rows: Vec<Vec<f64>> = (0..2000).map(|_| draw_row(&mut rng)).collect();
    let detector = fit_ddc(&train, 0.95)?;

    let law = draw_outlier_law(&ContaminationSpec::random(0.15), d, &mut rng)?;

    let mut samples = Vec::new();
    let mut both_empty = 0usize;
    for row in &test_rows {
        let case = contaminate_with(&law, row, &mut rng)?;
        let truth = case.true_mask.as_ref().unwrap();
        // false discoveries on the contaminated point and on its clean twin
        let fd_contaminated = detect(&detector, &case.x_observed)?.mask.difference(truth);
        let fd_clean = detect(&detector, case.x_clean.as_ref().unwrap())?.mask.difference(truth);
        if fd_contaminated.is_empty() && fd_clean.is_empty() {
            both_empty += 1;
        }
        samples.push(jaccard(&fd_contaminated, &fd_clean));
    }

    let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
    let ones = samples.iter().filter(|&&v| v == 1.0).count();
    println!("points compared:                 {}", samples.len());
    println!("mean jaccard similarity:         {mean:.3}");
    println!("identical false-discovery sets:  {ones}");
    println!("  of which both sets empty:      {both_empty}");
    println!();
    println!("similarity 1 includes the empty-empty convention: a detector that");
    println!("makes no spurious flags on either version is perfectly stable there.");
    Ok(())
}
