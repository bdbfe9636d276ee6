//! The mixture negative log-likelihood, its ceiling, mode ranking and the
//! weighted marginal densities, on a hand-built two-component mixture.

use mdn_inverse::mdn::{
    marginal_grid, nll_loss, predict_modes, trapezoid, weighted_marginal_pdf, MixtureParams, LOSS_CEILING,
};
use ndarray::array;

fn main() -> mdn_inverse::Result<()> {
    let mix = MixtureParams::new(
        vec![0.7, 0.3],
        array![[0.2, 0.4, 0.5, 0.5, 0.5], [0.8, 0.4, 0.5, 0.5, 0.5]],
        array![[0.05, 0.1, 0.1, 0.1, 0.1], [0.05, 0.1, 0.1, 0.1, 0.1]],
    )?;

    for y in [[0.2, 0.4, 0.5, 0.5, 0.5], [0.8, 0.4, 0.5, 0.5, 0.5], [0.5, 0.4, 0.5, 0.5, 0.5], [5.0; 5]] {
        println!("loss at {:?} = {:.6}", y, nll_loss(&mix, &y)?);
    }
    println!("ceiling = {LOSS_CEILING:.6}");

    for c in predict_modes(&mix, 2)? {
        println!("component {} (pi {:.2}): mean {:?}", c.component, c.pi, c.mean);
    }

    let grid = marginal_grid(&mix, 0, 801);
    let pdf = weighted_marginal_pdf(&mix, 0, &grid)?;
    println!("marginal of the first output integrates to {:.6}", trapezoid(&grid, &pdf));
    Ok(())
}
