//! Two ways to spell the worst-case reconstruction error under the
//! source constraint ‖f‖_χ ≤ R and data error δ: directly through Ψ, or
//! through the rate function ψ̄ and the inverse of Θ(t) = √t·ψ̄(t). Both
//! give the same number; this prints the comparison for Ψ(λ) = √λ.

use varscale::bounds::check_coincidence;
use varscale::indexfn::{geometric_grid, IndexFn};

fn main() -> varscale::Result<()> {
    let psi = IndexFn::power(0.5);
    let r = 1.0;
    let deltas = geometric_grid(1e-6, 1e-1, 11);
    let report = check_coincidence(&psi, r, &deltas)?;
    println!(
        "{:>12} {:>22} {:>22} {:>12}",
        "delta", "direct", "nested", "rel dev"
    );
    for row in &report.rows {
        println!(
            "{:>12.3e} {:>22.15e} {:>22.15e} {:>12.3e}",
            row.delta, row.direct, row.nested, row.rel_dev
        );
    }
    println!("\nlargest relative deviation: {:.3e}", report.max_rel_dev);
    Ok(())
}
