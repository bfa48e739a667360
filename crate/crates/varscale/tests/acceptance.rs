//! Acceptance gate: ten numbered end-to-end checks with pinned
//! tolerances, fixed seeds, and runtime budgets. Each prints exactly one
//! verdict line; the process exits nonzero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varscale::bounds::{
    check_coincidence, interpolation_check, modulus_bound_direct, modulus_bound_nested,
    modulus_brute_force,
};
use varscale::harness::{
    run_deblur_experiment, run_eddington_experiment, run_rate_experiment, source_element,
    ChoiceSpec, DeltaSpec, DiagonalLaw, ElementKind, ExperimentConfig, KernelName, NoiseSpec,
    OperatorSpec, SchemeName, SourceSpec,
};
use varscale::indexfn::{
    chi_from_psi, concave_family, geometric_grid, involution_s, psi_bar_from_psi, IndexFn,
};
use varscale::operators::{
    kernel_multiplier, range_inclusion_check, sobolev_weight, KernelSpec, OmegaGrid,
    SpectralOperator,
};
use varscale::regularize::{gamma_bound_check, qualification_constant, RegScheme};
use varscale::Result;

const SEED: u64 = 17;

fn main() -> ExitCode {
    let mut all = true;
    all &= verdict(1, "involution self-inverse", 1, involution_suite);
    all &= verdict(2, "modulus bound coincidence", 1, coincidence_suite);
    all &= verdict(3, "interpolation inequality", 5, interpolation_suite);
    all &= verdict(4, "modulus oracle domination", 10, oracle_suite);
    all &= verdict(5, "holder rate slopes", 5, holder_suite);
    all &= verdict(6, "discrepancy principle", 10, discrepancy_suite);
    all &= verdict(7, "qualification limits", 2, qualification_suite);
    all &= verdict(8, "deblur rates and range boundary", 30, deblur_suite);
    all &= verdict(9, "spectral line log bound", 10, eddington_suite);
    all &= verdict(10, "lens range obstruction", 1, lens_suite);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verdict(
    idx: u32,
    label: &str,
    budget_secs: u64,
    run: fn() -> Result<(bool, String)>,
) -> bool {
    let budget = Duration::from_secs(budget_secs);
    let start = Instant::now();
    let (pass, detail) = match run() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let ok = pass && in_budget;
    println!(
        "criterion {idx:2} [{}] {label}: {detail} ({:.2}s / {budget_secs}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
    );
    ok
}

/// Applying Ψ ↦ μΨ(1/μ) twice reproduces every family member to 1e-12
/// on a 128-point grid.
fn involution_suite() -> Result<(bool, String)> {
    let grid = geometric_grid(1e-6, 1e6, 128);
    let mut worst = 0.0f64;
    for member in concave_family() {
        let twice = involution_s(&involution_s(&member.f));
        for &x in &grid {
            let a = member.f.eval(x)?;
            let b = twice.eval(x)?;
            worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok((worst <= 1e-12, format!("max rel dev {worst:.3e} vs 1e-12")))
}

/// The direct and the nested reading of the continuity modulus agree to
/// 1e-8 for Ψ = λ^κ, κ ∈ {0.25, 0.5, 0.75}, R ∈ {0.1, 1, 10},
/// δ/R ∈ geomspace(1e-6, 1, 25).
fn coincidence_suite() -> Result<(bool, String)> {
    let ratios = geometric_grid(1e-6, 1.0, 25);
    let mut worst = 0.0f64;
    for kappa in [0.25, 0.5, 0.75] {
        for r in [0.1, 1.0, 10.0] {
            let deltas: Vec<f64> = ratios.iter().map(|&q| q * r).collect();
            let report = check_coincidence(&IndexFn::power(kappa), r, &deltas)?;
            worst = worst.max(report.max_rel_dev);
        }
    }
    Ok((worst <= 1e-8, format!("max rel dev {worst:.3e} vs 1e-8")))
}

/// 1000 seeded vectors on two diagonal operators never violate
/// ‖f‖² ≤ ‖Af‖²·Ψ(‖f‖_χ²/‖Af‖²) beyond 1e-10 relative slack, for every
/// Ψ in the concave family.
fn interpolation_suite() -> Result<(bool, String)> {
    let n = 32;
    let poly = SpectralOperator::diagonal((1..=n).map(|i| 1.0 / i as f64).collect())?;
    let expo = SpectralOperator::diagonal((1..=n).map(|i| (-(i as f64)).exp()).collect())?;
    let members: Vec<(IndexFn, IndexFn)> = concave_family()
        .into_iter()
        .map(|m| chi_from_psi(&m.f).map(|chi| (m.f, chi)))
        .collect::<Result<_>>()?;
    let mut checked = 0usize;
    let mut violations = 0usize;
    for k in 0..1000u64 {
        let f = source_element(&poly, ElementKind::White, 1.0, 9000 + k)?.real_values();
        for a in [&poly, &expo] {
            for (psi, chi) in &members {
                let sample = interpolation_check(a, psi, chi, &f)?;
                checked += 1;
                if sample.lhs > sample.rhs * (1.0 + 1e-10) {
                    violations += 1;
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!("{checked} checks, {violations} violations beyond 1e-10"),
    ))
}

/// On 50 seeded diagonal problems with at most 4 modes, the exact
/// discrete modulus never exceeds the analytic bound, and the two
/// analytic forms agree to 1e-8.
fn oracle_suite() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(424_242);
    let mut worst_excess = 0.0f64;
    let mut worst_dev = 0.0f64;
    let mut failures = 0usize;
    for case in 0..50usize {
        let n = 1 + case % 4;
        let sigma = loop {
            let mut draw: Vec<f64> =
                (0..n).map(|_| 0.05 + 0.95 * rng.random::<f64>()).collect();
            draw.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if draw.windows(2).all(|p| p[0] - p[1] > 1e-3) {
                break draw;
            }
        };
        let kappa = [0.25, 0.5, 0.75][case % 3];
        let r = 10f64.powf(2.0 * rng.random::<f64>() - 1.0);
        let delta = r * 10f64.powf(-0.2 - 2.8 * rng.random::<f64>());
        let psi = IndexFn::power(kappa);
        let chi = chi_from_psi(&psi)?;
        let psibar = psi_bar_from_psi(&psi)?;
        let a = SpectralOperator::diagonal(sigma)?;
        let brute = modulus_brute_force(&a, &chi, r, delta)?;
        let direct = modulus_bound_direct(&psi, r, delta)?.value;
        let nested = modulus_bound_nested(&psibar, r, delta)?.value;
        worst_excess = worst_excess.max(brute / direct - 1.0);
        worst_dev = worst_dev.max((direct - nested).abs() / direct);
        if brute > direct * (1.0 + 1e-8) || (direct - nested).abs() > 1e-8 * direct {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!(
            "50 cases, {failures} failures (worst oracle excess {worst_excess:.2e}, worst form dev {worst_dev:.2e})"
        ),
    ))
}

fn holder_config(mu: f64) -> ExperimentConfig {
    ExperimentConfig {
        operator: OperatorSpec::Diagonal { diagonal: DiagonalLaw::Inverse, n: 400 },
        source: SourceSpec::Monomial { monomial: mu, r1: 1.0, element: ElementKind::White },
        noise: NoiseSpec { seed: SEED },
        deltas: DeltaSpec { max: 1e-2, min: 1e-6, count: 9 },
        scheme: SchemeName::Tikhonov,
        choice: ChoiceSpec::APrioriTheta { psibar: format!("pow {mu}") },
        out: None,
    }
}

/// Tikhonov with α = δ^{2/(2μ+1)} on σᵢ = 1/i, n = 400,
/// δ ∈ geomspace(1e-2, 1e-6, 9): fitted slope within ±0.1 of
/// 2μ/(2μ+1) for μ ∈ {0.25, 0.5}.
///
/// The μ = 0.25 sub-case fails on this pinned grid: below δ ≈ 1e-4 the
/// prescribed α = δ^{4/3} drops under the smallest singular value
/// squared, the finite section resolves the problem completely, and the
/// measured error is dominated by amplified noise (slope → 1), which
/// steepens the fit to ≈ 0.66 against the 0.33 ± 0.1 window. No seed or
/// source element changes this; see the run notes.
fn holder_suite() -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut ok = true;
    for mu in [0.25, 0.5] {
        let report = run_rate_experiment(&holder_config(mu))?;
        let theory = report.theory_slope.unwrap();
        let pass = report.pass.unwrap();
        ok &= pass;
        parts.push(format!(
            "mu={mu}: slope {:.4} vs {:.4}±0.1{}",
            report.fit.slope,
            theory,
            if pass { "" } else { " MISSED" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Discrepancy rule with C = 1.5: every row's residual equals C·δ to
/// 1e-8 relative, and the fitted slope for μ = 1/2 stays within ±0.1
/// of 0.5.
fn discrepancy_suite() -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        operator: OperatorSpec::Diagonal { diagonal: DiagonalLaw::Inverse, n: 400 },
        source: SourceSpec::Monomial { monomial: 0.5, r1: 1.0, element: ElementKind::Octave },
        noise: NoiseSpec { seed: SEED },
        deltas: DeltaSpec { max: 3e-3, min: 3e-6, count: 9 },
        scheme: SchemeName::Tikhonov,
        choice: ChoiceSpec::Discrepancy { c_dis: 1.5 },
        out: None,
    };
    let report = run_rate_experiment(&cfg)?;
    let mut worst = 0.0f64;
    for row in &report.rows {
        let target = 1.5 * row.delta;
        worst = worst.max((row.residual - target).abs() / target);
    }
    let residuals_ok = worst <= 1e-8 && report.rows.len() == 9;
    let slope_ok = report.pass == Some(true);
    Ok((
        residuals_ok && slope_ok,
        format!(
            "worst residual dev {worst:.2e} vs 1e-8; slope {:.4} vs 0.5±0.1",
            report.fit.slope
        ),
    ))
}

/// Tikhonov qualification constant stays at one for t^ν, ν ≤ 1, and a
/// divergence witness appears for ν = 2 and for the δΓ product at
/// μ = 0.75.
fn qualification_suite() -> Result<(bool, String)> {
    let t_grid = geometric_grid(1e-10, 1e4, 600);
    let alpha_grid = geometric_grid(1e-10, 1e2, 30);
    let mut worst = 0.0f64;
    let mut stable = true;
    for nu in [0.25, 0.5, 1.0] {
        let report = qualification_constant(
            RegScheme::Tikhonov,
            &IndexFn::power(nu),
            &t_grid,
            &alpha_grid,
        )?;
        worst = worst.max(report.constant);
        stable &= report.stable;
    }
    let low_ok = worst <= 1.0 + 1e-6 && stable;

    let nu2 = qualification_constant(
        RegScheme::Tikhonov,
        &IndexFn::power(2.0),
        &t_grid,
        &alpha_grid,
    )?;
    let nu2_diverges = !nu2.stable && nu2.refined_constant > 10.0 * nu2.constant;

    let gamma_t = geometric_grid(1e-12, 1e2, 800);
    let gamma_d = geometric_grid(1e-6, 1e-2, 5);
    let alpha_rule = |d: f64| -> Result<f64> { Ok(d.powf(0.8)) };
    let gamma = gamma_bound_check(
        RegScheme::Tikhonov,
        &IndexFn::power(0.75),
        &alpha_rule,
        &gamma_d,
        &gamma_t,
    )?;
    let gamma_diverges = !gamma.stable && gamma.refined_max > 2.0 * gamma.max_product;

    Ok((
        low_ok && nu2_diverges && gamma_diverges,
        format!(
            "max constant {worst:.9} vs 1+1e-6; nu=2 refined/base {:.1}x; gamma refined/base {:.1}x",
            nu2.refined_constant / nu2.constant,
            gamma.refined_max / gamma.max_product
        ),
    ))
}

fn deblur_config() -> ExperimentConfig {
    ExperimentConfig {
        operator: OperatorSpec::Kernel {
            kernel: KernelName::PartialBlur,
            n: 4096,
            len: 64.0,
            d: None,
        },
        source: SourceSpec::Monomial { monomial: 0.0, r1: 1.0, element: ElementKind::Octave },
        noise: NoiseSpec { seed: SEED },
        deltas: DeltaSpec { max: 1e-1, min: 1e-4, count: 9 },
        scheme: SchemeName::Tikhonov,
        choice: ChoiceSpec::ChengYamamoto { c_lo: 100.0, c_hi: 100.0 },
        out: None,
    }
}

/// Deconvolution at N = 4096: l = 1 slope within ±0.1 of 0.4, l = 2
/// within ±0.1 of 4/7, and the smoothness-transfer boundary κ ≤ 2l/3
/// is confirmed from both sides (bounded at 0.99×, unbounded witness at
/// 1.01×).
fn deblur_suite() -> Result<(bool, String)> {
    let cfg = deblur_config();
    let mut parts = Vec::new();
    let mut ok = true;
    for l in [1u32, 2] {
        let report = run_deblur_experiment(l, &cfg)?;
        let pass = report.pass.unwrap();
        ok &= pass;
        parts.push(format!(
            "l={l}: slope {:.4} vs {:.4}±0.1{}",
            report.fit.slope,
            report.theory_slope.unwrap(),
            if pass { "" } else { " MISSED" }
        ));

        let grid = OmegaGrid { lo: 1e-2, hi: 1e3, n: 400 };
        let blur = |w: f64| kernel_multiplier(KernelSpec::PartialBlur, w);
        let penalty = move |w: f64| 1.0 / sobolev_weight(l, w * w).sqrt();
        let boundary = 2.0 * l as f64 / 3.0;
        let below =
            range_inclusion_check(&blur, &penalty, &IndexFn::power(boundary * 0.99), &grid)?;
        let above =
            range_inclusion_check(&blur, &penalty, &IndexFn::power(boundary * 1.01), &grid)?;
        let edge_ok = below.is_bounded() && !above.is_bounded();
        ok &= edge_ok;
        parts.push(format!(
            "l={l} boundary: below bounded {}, above bounded {}",
            below.is_bounded(),
            above.is_bounded()
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Spectral-line sharpening at N = 4096: every row with δ < η respects
/// the bound δ(1 + log(η/δ)), and ½‖x‖₂ ≤ ‖Lx‖ ≤ ‖x‖₂ holds to 1e-10
/// on 100 seeded probes.
fn eddington_suite() -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        operator: OperatorSpec::Kernel {
            kernel: KernelName::Eddington,
            n: 4096,
            len: 200.0,
            d: None,
        },
        source: SourceSpec::GaussianSpectrum { gaussian_spectrum: true, r1: 1.0 },
        noise: NoiseSpec { seed: SEED },
        deltas: DeltaSpec { max: 3e-2, min: 3e-4, count: 9 },
        scheme: SchemeName::Tikhonov,
        choice: ChoiceSpec::Discrepancy { c_dis: 1.5 },
        out: None,
    };
    let report = run_eddington_experiment(&cfg)?;
    let dominated = report.bounds_dominate();
    let sandwich = report.sandwich_ok == Some(true);
    let uncapped = report.rows.iter().filter(|r| !r.capped).count();
    Ok((
        dominated && sandwich && uncapped == report.rows.len(),
        format!(
            "eta {:.4}, {} rows under the log bound, sandwich {}",
            report.eta.unwrap(),
            uncapped,
            if sandwich { "holds" } else { "VIOLATED" }
        ),
    ))
}

/// The oscillating lens multiplier admits no smoothness transfer for
/// any unbounded χ derived from the concave family: every member yields
/// an unbounded-range witness.
fn lens_suite() -> Result<(bool, String)> {
    let grid = OmegaGrid { lo: 1e-2, hi: 1e3, n: 400 };
    let lens = |w: f64| kernel_multiplier(KernelSpec::OutOfFocus { d: 1.0 }, w);
    let one = |_: f64| 1.0;
    let mut witnesses = 0usize;
    let mut total = 0usize;
    let mut first_witness = f64::NAN;
    for member in concave_family() {
        let chi = chi_from_psi(&member.f)?;
        total += 1;
        match range_inclusion_check(&lens, &one, &chi, &grid)? {
            varscale::operators::RangeVerdict::Unbounded { witness_omega, .. } => {
                witnesses += 1;
                if first_witness.is_nan() {
                    first_witness = witness_omega;
                }
            }
            varscale::operators::RangeVerdict::Bounded { .. } => {}
        }
    }
    Ok((
        witnesses == total,
        format!("{witnesses}/{total} unbounded witnesses (first at omega {first_witness:.4})"),
    ))
}
