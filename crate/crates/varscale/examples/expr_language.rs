//! Index functions parse from a compact prefix notation, the same one
//! the CLI configs use. A few round trips, then the shape report the
//! verifier produces for each.

use varscale::indexfn::{default_grid, verify_props, IndexFn};

fn main() -> varscale::Result<()> {
    let exprs = [
        "pow 0.5",
        "quot id log",
        "scale 2.0 (log1p)",
        "min (pow 0.5) (const 2.0)",
        "comp (pow 2.0) (sum (const 1.0) (scale 0.5 (log)))",
    ];
    let grid = default_grid();
    for text in exprs {
        let f: IndexFn = text.parse()?;
        let props = verify_props(&f, &grid);
        println!("{text}");
        for lambda in [0.1, 1.0, 10.0, 1e4] {
            match f.eval(lambda) {
                Ok(y) => print!("    f({lambda:>7}) = {y:<12.6}"),
                Err(e) => print!("    f({lambda:>7}) : {e}"),
            }
        }
        println!();
        println!(
            "    increasing: {:?}, concave from: {:?}, rate function: {:?}",
            props.monotone_increasing, props.concave_on, props.is_rate_function
        );
    }
    Ok(())
}
