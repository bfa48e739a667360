//! A full synthetic rate experiment. The source satisfies a power-type
//! smoothness condition with exponent mu, the a-priori rule sets
//! alpha = delta^(2/(2mu+1)), and the measured error should then decay
//! like delta^(2mu/(2mu+1)). Fit the log-log slope over a delta grid and
//! compare.

use varscale::harness::{
    run_rate_experiment, ChoiceSpec, DeltaSpec, DiagonalLaw, ElementKind, ExperimentConfig,
    NoiseSpec, OperatorSpec, SchemeName, SourceSpec,
};

fn main() -> varscale::Result<()> {
    let mu = 0.5;
    let config = ExperimentConfig {
        operator: OperatorSpec::Diagonal { diagonal: DiagonalLaw::Inverse, n: 400 },
        source: SourceSpec::Monomial { monomial: mu, r1: 1.0, element: ElementKind::White },
        noise: NoiseSpec { seed: 17 },
        deltas: DeltaSpec { max: 1e-2, min: 1e-6, count: 9 },
        scheme: SchemeName::Tikhonov,
        choice: ChoiceSpec::APrioriTheta { psibar: format!("pow {mu}") },
        out: None,
    };
    let report = run_rate_experiment(&config)?;

    println!("{:>10} {:>12} {:>12} {:>12}", "delta", "alpha", "error", "bound");
    for row in &report.rows {
        println!(
            "{:>10.2e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.delta, row.alpha, row.error, row.bound
        );
    }
    println!("\n{}", report.summary());
    println!(
        "fitted slope {:+.4}, theory {:+.4}, within ±{}: {}",
        report.fit.slope,
        report.theory_slope.unwrap(),
        report.tolerance,
        report.pass.unwrap()
    );
    Ok(())
}
