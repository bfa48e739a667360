//! How tight is the analytic continuity modulus? On a problem with a
//! handful of modes the exact worst case is computable by brute force:
//! maximise ‖f‖ subject to ‖Af‖ ≤ δ and ‖f‖_χ ≤ R. Compare it against
//! the closed-form bound as δ shrinks.

use varscale::bounds::{modulus_bound_direct, modulus_brute_force};
use varscale::indexfn::{chi_from_psi, IndexFn};
use varscale::operators::SpectralOperator;

fn main() -> varscale::Result<()> {
    let a = SpectralOperator::diagonal(vec![0.9, 0.5, 0.2])?;
    let psi = IndexFn::power(0.5);
    let chi = chi_from_psi(&psi)?;
    let r = 1.0;

    println!("sigma = [0.9, 0.5, 0.2], psi = sqrt, R = {r}");
    println!("{:>10} {:>16} {:>16} {:>10}", "delta", "exact", "bound", "exact/bound");
    for k in 0..8 {
        let delta = 0.5 * 0.25f64.powi(k);
        let exact = modulus_brute_force(&a, &chi, r, delta)?;
        let bound = modulus_bound_direct(&psi, r, delta)?.value;
        println!(
            "{:>10.3e} {:>16.9e} {:>16.9e} {:>10.4}",
            delta,
            exact,
            bound,
            exact / bound
        );
    }
    Ok(())
}
