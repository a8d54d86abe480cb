//! Barzilai-Borwein and L-BFGS on an ill-conditioned quadratic.
//!
//! cargo run --example optimizers

use hexfwi::optimize::{minimize, BbVariant, OptimizerConfig, StoppingCriteria};
use hexfwi::Result;

fn main() -> Result<()> {
    let n = 40;
    // eigenvalues from 1 to 400
    let diag: Vec<f64> = (0..n).map(|i| 1.0 + 399.0 * i as f64 / (n - 1) as f64).collect();
    let x0 = vec![1.0; n];
    let stop = StoppingCriteria::new(1e-8, 1e-300, 2000)?;
    let configs = [
        ("BB1", OptimizerConfig::bb(BbVariant::Bb1)),
        ("BB2", OptimizerConfig::bb(BbVariant::Bb2)),
        ("L-BFGS(5)", OptimizerConfig::lbfgs(5)),
        ("L-BFGS(10)", OptimizerConfig::lbfgs(10)),
    ];
    for (name, config) in configs {
        let mut objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let g: Vec<f64> = x.iter().zip(&diag).map(|(v, d)| d * v).collect();
            Ok((1.0 + 0.5 * x.iter().zip(&g).map(|(v, gi)| v * gi).sum::<f64>(), g))
        };
        let (_, h) = minimize(&mut objective, &x0, &config, &stop, 0.0, &mut |_| {})?;
        println!(
            "{name:>11}: {:>4} iterations, |g| = {:.2e}, stop {:?}",
            h.iterations(),
            h.final_grad_norm.unwrap_or(f64::NAN),
            h.stop_reason
        );
    }
    Ok(())
}
