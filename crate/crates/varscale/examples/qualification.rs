//! Tikhonov regularization tracks the rate function t^nu only up to
//! nu = 1: the measured constant sup |1 − t·h_alpha(t)|·phibar(t)/phibar(alpha)
//! sits at 1 below that threshold and runs away beyond it. The second
//! half shows the same saturation through the noise-propagation product
//! delta·Gamma(alpha), which stops being finite once the rate outpaces
//! the scheme.

use varscale::indexfn::{geometric_grid, IndexFn};
use varscale::regularize::{gamma_bound_check, qualification_constant, RegScheme};

fn main() -> varscale::Result<()> {
    let t_grid = geometric_grid(1e-10, 1e4, 600);
    let alpha_grid = geometric_grid(1e-10, 1e2, 30);

    println!("{:>6} {:>14} {:>14} {:>8}", "nu", "constant", "refined", "stable");
    for nu in [0.25, 0.5, 1.0, 2.0] {
        let report = qualification_constant(
            RegScheme::Tikhonov,
            &IndexFn::power(nu),
            &t_grid,
            &alpha_grid,
        )?;
        println!(
            "{:>6} {:>14.6e} {:>14.6e} {:>8}",
            nu, report.constant, report.refined_constant, report.stable
        );
    }

    let deltas = geometric_grid(1e-6, 1e-2, 5);
    let alpha_rule = |d: f64| -> varscale::Result<f64> { Ok(d.powf(0.8)) };
    let gamma = gamma_bound_check(
        RegScheme::Tikhonov,
        &IndexFn::power(0.75),
        &alpha_rule,
        &deltas,
        &geometric_grid(1e-12, 1e2, 800),
    )?;
    println!(
        "\ndelta*Gamma product for psibar = t^0.75 with alpha = delta^0.8:"
    );
    println!(
        "max {:.4e}, refined {:.4e}, stable: {} (the supremum escapes to t -> 0)",
        gamma.max_product, gamma.refined_max, gamma.stable
    );
    Ok(())
}
