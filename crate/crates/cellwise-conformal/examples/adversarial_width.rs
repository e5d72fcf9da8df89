//! No detect-impute pipeline bounds the damage of a single adversarial
//! cell: for any error target M there is a contamination of one
//! coordinate that forces prediction error at least M. Consequently, any
//! symmetric interval that keeps 90% coverage on a batch containing such
//! points must pay for it in width.
//!
//! Run with: cargo run --example adversarial_width

use cellwise_conformal::*;

fn main() -> Result<()> {
    // the planted cell value scales with the target error
    println!("{:>10} {:>16} {:>16}", "target M", "planted cell", "|y - prediction|");
    let model = LinearModel { beta: vec![0.5, 2.0], intercept: 0.0 };
    for m_target in [10.0, 100.0, 1000.0, 1e6] {
        let case = adversarial_case(m_target, &model)?;
        let err = (case.y_true.unwrap() - predict(&model, &case.x_observed)?).abs();
        assert!(err >= m_target);
        println!("{:>10} {:>16} {:>16}", m_target, case.x_observed[1], err);
    }

    // a degenerate second coefficient has no such construction
    let flat = LinearModel { beta: vec![1.0, 0.0], intercept: 0.0 };
    println!("\nbeta[1] = 0 -> {}", adversarial_case(10.0, &flat).unwrap_err());

    // width consequence, at desk scale: when a fraction f of points are
    // adversarial and the pipeline is to stay valid at level 1 - alpha,
    // at least f - alpha of them must be covered, and covering one costs
    // half-width >= M. Make the planted points exchangeable between
    // calibration and test (same fraction in both) so split conformal
    // does stay valid — and watch the calibrated width absorb the cost.
    let m_target = 50.0;
    let alpha = 0.1;
    let plant_frac = 0.2;

    // clean data: y = x1 + x2 exactly, features in [0, 1]^2
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|i| vec![(i % 20) as f64 / 19.0, ((i * 7) % 23) as f64 / 22.0])
        .collect();
    let labels: Vec<f64> = rows.iter().map(|r| r[0] + r[1]).collect();
    let data = LabeledDataset::new(FeatureMatrix::from_rows(&rows)?, labels)?;
    let (train, calib) = split(&data, SplitIndex::half(data.len())?)?;
    let model = fit_ols(&train)?;

    // contaminate 20% of the calibration points with the same adversarial
    // construction the test batch will carry
    let planted_case = adversarial_case(m_target, &model)?;
    let n_cal = calib.len();
    let n_planted_cal = (plant_frac * n_cal as f64) as usize;
    let mut cal_rows: Vec<Vec<f64>> = (0..n_cal).map(|i| calib.features.row(i).to_vec()).collect();
    let mut cal_labels = calib.labels.clone();
    for i in 0..n_planted_cal {
        cal_rows[i] = planted_case.x_observed.clone();
        cal_labels[i] = planted_case.y_true.unwrap();
    }
    let calib = LabeledDataset::new(FeatureMatrix::from_rows(&cal_rows)?, cal_labels)?;

    let ctx = ConformalContext::new(
        ModelKind::Point(model.clone()),
        fit_zscore(&train.features, f64::INFINITY)?, // adversary evades detection
        fit_imputer(ImputerKind::Mean, &train.features, &ImputerParams::default())?,
        calib,
        alpha,
        ScoreKind::AbsResidual,
    )?;

    let n = 100;
    let planted = (plant_frac * n as f64) as usize;
    let mut covered_planted = 0usize;
    let mut covered = 0usize;
    let mut half_widths = Vec::with_capacity(n);
    for i in 0..n {
        let (case, y) = if i < planted {
            let c = adversarial_case(m_target, &model)?;
            let y = c.y_true.unwrap();
            (c, y)
        } else {
            let x = vec![(i % 11) as f64 / 10.0, (i % 13) as f64 / 12.0];
            let y = x[0] + x[1];
            (TestCase::from_observed(x), y)
        };
        let interval = scp_interval(&ctx, &case.x_observed)?;
        half_widths.push(interval.length() / 2.0);
        if interval.covers(y) {
            covered += 1;
            if i < planted {
                covered_planted += 1;
            }
        }
    }
    let coverage = covered as f64 / n as f64;
    let mean_half_width: f64 = half_widths.iter().sum::<f64>() / n as f64;
    let bound = m_target * (plant_frac - (1.0 - coverage));
    println!("\nbatch with {planted} adversarial points out of {n} (M = {m_target}),");
    println!("with the same fraction planted into calibration:");
    println!("  coverage {coverage:.2}, covered planted points {covered_planted}");
    println!("  mean half-width {mean_half_width:.2} >= counting bound M*(f - miss) = {bound:.2}");
    assert!(coverage >= 1.0 - alpha);
    assert!(mean_half_width >= bound - 1e-9);
    assert!(mean_half_width >= m_target * (plant_frac - alpha));
    println!("\nvalidity against undetectable cells is bought with width: every");
    println!("interval in the batch is now at least {:.0} wide.", 2.0 * m_target);
    Ok(())
}
