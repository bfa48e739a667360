//! Error bounds, modulus-of-continuity bounds, and their cross checks.
//!
//! Everything here is a pure function of index functions and a handful
//! of positive scalars. The two headline facts being exercised: the
//! interpolation bound `‖f‖² ≤ ‖Af‖²·Ψ(‖f‖_χ²/‖Af‖²)` for concave `Ψ`,
//! and the identity between the direct modulus bound `δ√Ψ(R²/δ²)` and
//! its nested form `R·ψ̄(Θ⁻¹(δ/R))`, which agree exactly and are checked
//! against a brute-force modulus oracle on small diagonal operators.
//!
//! Concavity is a precondition everywhere. When the sampled verifier
//! cannot confirm it the bound is still computed but comes back with
//! `verified: false`, so callers can surface the gap instead of
//! silently trusting a meaningless number.

use crate::indexfn::{
    default_grid, evaluable_bracket, geometric_grid, inverse, psi_bar_from_psi, theta_fn,
    verify_props, IndexFn, WIDE_BRACKET,
};
use crate::operators::SpectralOperator;
use crate::{Error, Result};
use std::io::Write;

/// Scalar inputs shared by the bound evaluators, validated positive.
#[derive(Clone, Copy, Debug)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub zeta: f64,
    pub r: f64,
    pub delta: f64,
    pub k_bar: f64,
}

impl BoundInputs {
    pub fn new(epsilon: f64, zeta: f64, r: f64, delta: f64, k_bar: f64) -> Result<Self> {
        for (name, v) in [
            ("epsilon", epsilon),
            ("zeta", zeta),
            ("R", r),
            ("delta", delta),
            ("K_bar", k_bar),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(BoundInputs { epsilon, zeta, r, delta, k_bar })
    }
}

/// A bound value plus the verdict of the sampled precondition check.
#[derive(Clone, Copy, Debug)]
pub struct BoundValue {
    pub value: f64,
    /// Whether the concavity (and, where required, monotonicity)
    /// preconditions passed the sampled verifier.
    pub verified: bool,
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Sampled check that `f` is concave (and increasing) across its whole
/// evaluable range on the default grid.
fn concave_increasing_verified(f: &IndexFn) -> bool {
    let props = verify_props(f, &default_grid());
    if !props.monotone_increasing.is_true() || props.excluded > 0 {
        return false;
    }
    match (props.concave_on, props.grid.first()) {
        (Some(from), Some(&lo)) => from <= lo,
        _ => false,
    }
}

/// Reconstruction error bound `ε·√Ψ(ζ²/ε²)` from a residual norm `ε`
/// and a smoothness norm `ζ`.
///
/// Increasing in each argument separately; that is checked by
/// [`error_bound_monotone`], not on every call.
pub fn error_bound(psi: &IndexFn, epsilon: f64, zeta: f64) -> Result<BoundValue> {
    require_positive("epsilon", epsilon)?;
    require_positive("zeta", zeta)?;
    let verified = concave_increasing_verified(psi);
    let value = error_bound_value(psi, epsilon, zeta)?;
    Ok(BoundValue { value, verified })
}

fn error_bound_value(psi: &IndexFn, epsilon: f64, zeta: f64) -> Result<f64> {
    let ratio = (zeta / epsilon) * (zeta / epsilon);
    Ok(epsilon * psi.eval(ratio)?.sqrt())
}

/// Sampled monotonicity probe for [`error_bound`]: the bound must be
/// non-decreasing in `ε` for fixed `ζ` and in `ζ` for fixed `ε`.
pub fn error_bound_monotone(psi: &IndexFn, eps_grid: &[f64], zeta_grid: &[f64]) -> Result<bool> {
    const SLACK: f64 = 1e-11;
    for &z in zeta_grid {
        let mut prev = 0.0;
        for &e in eps_grid {
            let v = error_bound_value(psi, e, z)?;
            if v < prev * (1.0 - SLACK) {
                return Ok(false);
            }
            prev = v;
        }
    }
    for &e in eps_grid {
        let mut prev = 0.0;
        for &z in zeta_grid {
            let v = error_bound_value(psi, e, z)?;
            if v < prev * (1.0 - SLACK) {
                return Ok(false);
            }
            prev = v;
        }
    }
    Ok(true)
}

/// Closed-form specialisations of the interpolation bound.
#[derive(Clone, Copy, Debug)]
pub enum SpecialKind {
    /// `Ψ(λ) = λ^κ`: bound `‖f‖_θ^{1−κ}·‖f‖_{ψθ}^κ`.
    Power(f64),
    /// `Ψ(λ) = λ/log λ`: bound `‖f‖_{ψθ}/√(2·log(‖f‖_{ψθ}/‖f‖_θ))`.
    OverLog,
    /// `Ψ(λ) = log λ`: bound `‖f‖_θ·√(2·log(‖f‖_{ψθ}/‖f‖_θ))`.
    Log,
}

/// Evaluate one of the displayed closed forms. The logarithmic kinds
/// require `norm_psitheta > norm_theta` so the logarithm is positive.
pub fn specialized_bound(kind: SpecialKind, norm_theta: f64, norm_psitheta: f64) -> Result<f64> {
    require_positive("norm_theta", norm_theta)?;
    require_positive("norm_psitheta", norm_psitheta)?;
    let ratio = norm_psitheta / norm_theta;
    match kind {
        SpecialKind::Power(kappa) => {
            if !(0.0..=1.0).contains(&kappa) {
                return Err(Error::Domain(format!("exponent {kappa} outside [0, 1]")));
            }
            Ok(norm_theta.powf(1.0 - kappa) * norm_psitheta.powf(kappa))
        }
        SpecialKind::OverLog => {
            if ratio <= 1.0 {
                return Err(Error::Domain(format!(
                    "norm ratio {ratio} must exceed 1 for the log forms"
                )));
            }
            Ok(norm_psitheta / (2.0 * ratio.ln()).sqrt())
        }
        SpecialKind::Log => {
            if ratio <= 1.0 {
                return Err(Error::Domain(format!(
                    "norm ratio {ratio} must exceed 1 for the log forms"
                )));
            }
            Ok(norm_theta * (2.0 * ratio.ln()).sqrt())
        }
    }
}

/// Direct modulus-of-continuity bound `δ·√Ψ(R²/δ²)` over the smoothness
/// ball of radius `R`.
pub fn modulus_bound_direct(psi: &IndexFn, r: f64, delta: f64) -> Result<BoundValue> {
    require_positive("R", r)?;
    require_positive("delta", delta)?;
    let verified = concave_increasing_verified(psi);
    let value = delta * psi.eval((r / delta) * (r / delta))?.sqrt();
    Ok(BoundValue { value, verified })
}

/// Nested modulus bound `R·ψ̄(Θ⁻¹(δ/R))` with `Θ(t) = √t·ψ̄(t)`.
///
/// `Θ⁻¹` is evaluated by bracketed bisection on the window where `Θ`
/// actually evaluates. The verification flag reports whether the
/// composite `ψ̄²∘(Θ²)⁻¹` passed the sampled concavity check.
pub fn modulus_bound_nested(psibar: &IndexFn, r: f64, delta: f64) -> Result<BoundValue> {
    require_positive("R", r)?;
    require_positive("delta", delta)?;
    let theta = theta_fn(psibar)?;
    let (lo, hi) = evaluable_bracket(&theta, WIDE_BRACKET.0, WIDE_BRACKET.1)?;
    let theta_inv = inverse(&theta, lo, hi)?;
    let verified = nested_composite_concave(psibar, &theta, lo, hi);
    let t = theta_inv.eval(delta / r)?;
    Ok(BoundValue { value: r * psibar.eval(t)?, verified })
}

/// Concavity of `t ↦ ψ̄²((Θ²)⁻¹(t))`, the function whose concavity makes
/// the nested bound valid.
fn nested_composite_concave(psibar: &IndexFn, theta: &IndexFn, lo: f64, hi: f64) -> bool {
    let psibar2 = IndexFn::compose(IndexFn::power(2.0), psibar.clone());
    let theta2 = IndexFn::compose(IndexFn::power(2.0), theta.clone());
    let theta2_inv = match inverse(&theta2, lo, hi) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let composite = IndexFn::compose(psibar2, theta2_inv);
    let props = verify_props(&composite, &default_grid());
    props.monotone_increasing.is_true()
        && match (props.concave_on, valid_grid_start(&props)) {
            (Some(from), Some(lo)) => from <= lo,
            _ => false,
        }
}

fn valid_grid_start(props: &crate::indexfn::FnProps) -> Option<f64> {
    props
        .grid
        .iter()
        .copied()
        .find(|&l| matches!(props.concave_on, Some(c) if c <= l) || props.concave_on.is_none())
}

/// One row of a [`CoincidenceReport`].
#[derive(Clone, Copy, Debug)]
pub struct CoincidenceRow {
    pub delta: f64,
    pub direct: f64,
    pub nested: f64,
    pub rel_dev: f64,
}

/// Pointwise comparison of the two modulus bounds over a δ-grid.
#[derive(Clone, Debug)]
pub struct CoincidenceReport {
    pub r: f64,
    pub rows: Vec<CoincidenceRow>,
    pub max_rel_dev: f64,
}

impl CoincidenceReport {
    /// CSV with header `delta,bound_direct,bound_nested,rel_dev`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,bound_direct,bound_nested,rel_dev")?;
        for row in &self.rows {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                row.delta, row.direct, row.nested, row.rel_dev
            )?;
        }
        Ok(())
    }
}

/// Evaluate both modulus bounds over `delta_grid` and report the largest
/// relative deviation. The two formulas are two readings of the same
/// quantity, so the deviation measures only numerical error in the
/// inversion path.
pub fn check_coincidence(psi: &IndexFn, r: f64, delta_grid: &[f64]) -> Result<CoincidenceReport> {
    require_positive("R", r)?;
    if delta_grid.is_empty() {
        return Err(Error::InvalidGrid("empty delta grid".into()));
    }
    let psibar = psi_bar_from_psi(psi)?;
    let theta = theta_fn(&psibar)?;
    let (lo, hi) = evaluable_bracket(&theta, WIDE_BRACKET.0, WIDE_BRACKET.1)?;
    let theta_inv = inverse(&theta, lo, hi)?;
    let mut rows = Vec::with_capacity(delta_grid.len());
    let mut max_rel_dev: f64 = 0.0;
    for &delta in delta_grid {
        require_positive("delta", delta)?;
        let direct = delta * psi.eval((r / delta) * (r / delta))?.sqrt();
        let t = theta_inv.eval(delta / r)?;
        let nested = r * psibar.eval(t)?;
        let rel_dev = (direct - nested).abs() / direct.abs().max(f64::MIN_POSITIVE);
        max_rel_dev = max_rel_dev.max(rel_dev);
        rows.push(CoincidenceRow { delta, direct, nested, rel_dev });
    }
    Ok(CoincidenceReport { r, rows, max_rel_dev })
}

const MIXING_GRID: usize = 10_000;
const BRUTE_FORCE_MAX_N: usize = 8;

/// Brute-force modulus of continuity on a small diagonal operator:
/// the exact maximum of `‖x‖` over `Σ χ(1/σᵢ²)xᵢ² ≤ R²`, `Σ σᵢ²xᵢ² ≤ δ²`.
///
/// With two quadratic constraints on a diagonal form the maximiser needs
/// at most two active coordinates, so all pairs are scanned on a fine
/// mixing grid, plus the exact crossing point of the two constraints.
/// Coordinates whose `χ` weight overflows the evaluable range cannot
/// carry mass and are skipped.
pub fn modulus_brute_force(
    a: &SpectralOperator,
    chi: &IndexFn,
    r: f64,
    delta: f64,
) -> Result<f64> {
    require_positive("R", r)?;
    require_positive("delta", delta)?;
    let sigma = match a {
        SpectralOperator::Diagonal { sigma } => sigma,
        _ => return Err(Error::Domain("brute-force modulus needs a diagonal operator".into())),
    };
    if sigma.len() > BRUTE_FORCE_MAX_N {
        return Err(Error::Domain(format!(
            "brute-force modulus capped at n = {BRUTE_FORCE_MAX_N}, got {}",
            sigma.len()
        )));
    }
    for pair in sigma.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::Degenerate(format!("repeated singular value {}", pair[0])));
        }
    }
    let r2 = r * r;
    let d2 = delta * delta;
    let s2: Vec<f64> = sigma.iter().map(|&s| s * s).collect();
    let weights: Vec<f64> = sigma
        .iter()
        .map(|&s| match chi.eval(1.0 / (s * s)) {
            Ok(w) => Ok(w),
            Err(Error::Bracket { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let mut best: f64 = 0.0;
    for i in 0..sigma.len() {
        if weights[i].is_finite() {
            best = best.max((r2 / weights[i]).min(d2 / s2[i]));
        }
        for j in i + 1..sigma.len() {
            if !weights[i].is_finite() || !weights[j].is_finite() {
                continue;
            }
            let value_at = |t: f64| {
                let c = weights[i] * t + weights[j] * (1.0 - t);
                let s = s2[i] * t + s2[j] * (1.0 - t);
                (r2 / c).min(d2 / s)
            };
            for k in 0..=MIXING_GRID {
                best = best.max(value_at(k as f64 / MIXING_GRID as f64));
            }
            let den = r2 * (s2[i] - s2[j]) - d2 * (weights[i] - weights[j]);
            if den != 0.0 {
                let t_star = (d2 * weights[j] - r2 * s2[j]) / den;
                if (0.0..=1.0).contains(&t_star) {
                    best = best.max(value_at(t_star));
                }
            }
        }
    }
    Ok(best.sqrt())
}

/// Tabulated a-priori rate curve `δ ↦ δ·√Ψ(K̄/δ²)`.
#[derive(Clone, Debug)]
pub struct RateCurve {
    pub rows: Vec<(f64, f64)>,
    /// Sampled surrogate for `Ψ(λ)/λ → 0`: without it the curve need
    /// not decay (the identity gives a constant).
    pub limquo_decay: bool,
}

impl RateCurve {
    /// CSV with header `delta,bound`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,bound")?;
        for &(delta, bound) in &self.rows {
            writeln!(w, "{delta:.16e},{bound:.16e}")?;
        }
        Ok(())
    }
}

/// Tabulate the rate curve over `delta_grid` (sorted descending in the
/// output). When the decay surrogate holds, the curve is required to be
/// non-increasing toward small `δ`; a violation is a verification error.
pub fn rate_curve(psi: &IndexFn, k_bar: f64, delta_grid: &[f64]) -> Result<RateCurve> {
    require_positive("K_bar", k_bar)?;
    if delta_grid.is_empty() {
        return Err(Error::InvalidGrid("empty delta grid".into()));
    }
    let mut deltas: Vec<f64> = delta_grid.to_vec();
    for &d in &deltas {
        require_positive("delta", d)?;
    }
    deltas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        rows.push((delta, delta * psi.eval(k_bar / (delta * delta))?.sqrt()));
    }
    let limquo_decay = limquo_surrogate(psi)?;
    if limquo_decay {
        for pair in rows.windows(2) {
            let (d_hi, b_hi) = pair[0];
            let (d_lo, b_lo) = pair[1];
            if b_lo > b_hi * (1.0 + 1e-11) {
                return Err(Error::Unverified(format!(
                    "rate curve increased from δ={d_hi:e} to δ={d_lo:e} despite decaying Ψ(λ)/λ"
                )));
            }
        }
    }
    Ok(RateCurve { rows, limquo_decay })
}

/// Sampled test for `Ψ(λ)/λ → 0` at large `λ`: the quotient must fall
/// strictly through the probe points and end below half its start.
fn limquo_surrogate(psi: &IndexFn) -> Result<bool> {
    let probes = geometric_grid(1e2, 1e14, 7);
    let mut values = Vec::with_capacity(probes.len());
    for &l in &probes {
        values.push(psi.eval(l)? / l);
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0] * (1.0 + 1e-12));
    Ok(decreasing && values[values.len() - 1] < 0.5 * values[0])
}

/// Both sides of the interpolation inequality for one coefficient
/// vector on a diagonal operator.
#[derive(Clone, Copy, Debug)]
pub struct InterpolationSample {
    /// `‖f‖²`.
    pub lhs: f64,
    /// `‖Af‖²·Ψ(‖f‖_χ²/‖Af‖²)`, infinite when the `χ`-norm overflows.
    pub rhs: f64,
}

/// Evaluate `‖f‖² ≤ ‖Af‖²·Ψ(‖f‖_χ²/‖Af‖²)` on a diagonal operator.
///
/// `χ` weights that overflow the evaluable range count as infinite;
/// coordinates with `fᵢ = 0` contribute nothing either way, and an
/// infinite `χ`-norm makes the right side infinite, so the inequality
/// holds vacuously rather than failing on overflow.
pub fn interpolation_check(
    a: &SpectralOperator,
    psi: &IndexFn,
    chi: &IndexFn,
    f: &[f64],
) -> Result<InterpolationSample> {
    let sigma = match a {
        SpectralOperator::Diagonal { sigma } => sigma,
        _ => return Err(Error::Domain("interpolation check needs a diagonal operator".into())),
    };
    if sigma.len() != f.len() {
        return Err(Error::SizeMismatch(sigma.len(), f.len()));
    }
    let lhs: f64 = f.iter().map(|&v| v * v).sum();
    let af2: f64 = sigma.iter().zip(f).map(|(&s, &v)| s * s * v * v).sum();
    if af2 == 0.0 {
        return Err(Error::Degenerate("Af = 0: interpolation ratio undefined".into()));
    }
    let mut zeta2 = 0.0f64;
    for (&s, &v) in sigma.iter().zip(f) {
        if v == 0.0 {
            continue;
        }
        let w = match chi.eval(1.0 / (s * s)) {
            Ok(w) => w,
            Err(Error::Bracket { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        zeta2 += w * v * v;
        if zeta2.is_infinite() {
            break;
        }
    }
    let rhs = if zeta2.is_infinite() {
        f64::INFINITY
    } else {
        af2 * psi.eval(zeta2 / af2)?
    };
    Ok(InterpolationSample { lhs, rhs })
}
