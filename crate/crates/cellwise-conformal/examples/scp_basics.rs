//! Split conformal prediction from scratch: generate clean linear data,
//! split it, fit a model, calibrate, and check empirical coverage.
//!
//! Run with: cargo run --example scp_basics

use cellwise_conformal::*;

fn main() -> Result<()> {
    // 200 labeled rows from a linear model with standard normal noise
    let spec = SettingSpec::setting_a(vec![2.0, -1.0, 0.5, 0.0, 1.5]);
    let labeled = generate(&spec, 200, 1)?;
    let (train, calib) = split(&labeled, SplitIndex::half(labeled.len())?)?;
    println!("train rows: {}, calibration rows: {}", train.len(), calib.len());

    let model = fit_ols(&train)?;
    println!("fitted coefficients: {:?}", model.beta.iter().map(|b| (b * 100.0).round() / 100.0).collect::<Vec<_>>());

    // an inert detector (infinite threshold) and a mean imputer make the
    // context behave exactly like classical split conformal
    let detector = fit_zscore(&train.features, f64::INFINITY)?;
    let imputer = fit_imputer(ImputerKind::Mean, &train.features, &ImputerParams::default())?;
    let alpha = 0.1;
    let ctx = ConformalContext::new(
        ModelKind::Point(model),
        detector,
        imputer,
        calib,
        alpha,
        ScoreKind::AbsResidual,
    )?;

    // fresh clean test batch: coverage should land near 1 - alpha
    let test = generate(&spec, 500, 2)?;
    let mut tr = TrialResult::new("scp");
    for i in 0..test.len() {
        let interval = scp_interval(&ctx, test.features.row(i))?;
        tr.record_interval(&interval, test.labels[i]);
    }
    let (avg_len, inf_frac) = tr.length_stats();
    println!(
        "coverage {:.3} (target {:.2}), average length {:.2}, infinite fraction {:.3}",
        tr.coverage()?,
        1.0 - alpha,
        avg_len,
        inf_frac
    );

    // the +infinity convention: with too few calibration points the
    // conformal quantile index runs past the end and the interval is all
    // of the real line
    let tiny = generate(&spec, 12, 3)?;
    let (train2, calib2) = split(&tiny, SplitIndex::half(tiny.len())?)?;
    let ctx2 = ConformalContext::new(
        ModelKind::Point(fit_ols(&train2)?),
        fit_zscore(&train2.features, f64::INFINITY)?,
        fit_imputer(ImputerKind::Mean, &train2.features, &ImputerParams::default())?,
        calib2,
        0.05, // 6 calibration points cannot support a 95% quantile
        ScoreKind::AbsResidual,
    )?;
    let wide = scp_interval(&ctx2, test.features.row(0))?;
    println!(
        "6 calibration points at alpha 0.05 -> interval ({}, {})",
        wide.lo, wide.hi
    );
    assert!(wide.is_infinite());
    Ok(())
}
