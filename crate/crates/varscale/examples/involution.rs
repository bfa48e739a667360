//! The map S(Ψ)(μ) = μ·Ψ(1/μ) is an involution on index functions.
//! Apply it twice to every member of the built-in concave family and
//! watch the round trip come back to machine precision.

use varscale::indexfn::{concave_family, geometric_grid, involution_s};

fn main() -> varscale::Result<()> {
    let grid = geometric_grid(1e-6, 1e6, 64);
    println!("{:<18} {:>14}", "member", "max rel dev");
    for member in concave_family() {
        let round_trip = involution_s(&involution_s(&member.f));
        let mut worst = 0.0f64;
        for &lambda in &grid {
            let a = member.f.eval(lambda)?;
            let b = round_trip.eval(lambda)?;
            worst = worst.max((a - b).abs() / a.abs());
        }
        println!("{:<18} {:>14.3e}", member.name, worst);
    }
    Ok(())
}
