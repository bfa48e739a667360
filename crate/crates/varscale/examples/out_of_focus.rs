//! An out-of-focus lens has the transfer function 2·J1(D·omega)/(D·omega),
//! which oscillates through zero. At a zero the forward operator carries
//! no information, so no unbounded smoothness scale can be transferred
//! through it: the range condition sup chi(1/k̂²)·g² < ∞ fails the
//! moment chi is unbounded, and the checker pins a witness frequency at
//! the first Bessel zero. A bounded chi, by contrast, survives.

use varscale::indexfn::IndexFn;
use varscale::operators::{
    kernel_multiplier, range_inclusion_check, KernelSpec, OmegaGrid, RangeVerdict,
};

fn main() -> varscale::Result<()> {
    let d = 1.0;
    let lens = |w: f64| kernel_multiplier(KernelSpec::OutOfFocus { d }, w);
    let flat = |_: f64| 1.0;
    let grid = OmegaGrid { lo: 1e-2, hi: 1e3, n: 400 };

    println!("transfer function near its first zero:");
    for omega in [3.0, 3.5, 3.8, 3.8317, 3.9, 4.5] {
        println!("    k̂({omega:>7.4}) = {:+.6e}", lens(omega));
    }

    let unbounded = IndexFn::power(0.5);
    match range_inclusion_check(&lens, &flat, &unbounded, &grid)? {
        RangeVerdict::Unbounded { witness_omega, detail } => {
            println!("\nchi = sqrt: unbounded, witness at omega = {witness_omega:.6}");
            println!("    ({detail})");
        }
        RangeVerdict::Bounded { c_bar } => println!("\nchi = sqrt: bounded by {c_bar:.3e} ?!"),
    }

    let capped = IndexFn::minimum(IndexFn::power(0.5), IndexFn::constant(2.0));
    match range_inclusion_check(&lens, &flat, &capped, &grid)? {
        RangeVerdict::Bounded { c_bar } => {
            println!("chi = min(sqrt, 2): bounded, sup = {c_bar:.6}");
        }
        RangeVerdict::Unbounded { witness_omega, .. } => {
            println!("chi = min(sqrt, 2): unbounded at {witness_omega:.4} ?!");
        }
    }
    Ok(())
}
