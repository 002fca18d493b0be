//! Translation-invariant coupling norms, corollary bounds on the
//! thermodynamic limit, finite-size pressure convergence runs, and the
//! N = N₁m + r box decomposition.

use serde::Serialize;

use crate::disorder::DisorderDistribution;
use crate::model::{CouplingFamily, Region};
use crate::quenched;
use crate::rng;
use crate::scalar::Real;
use crate::{Error, Result};

/// Which per-site coupling norm to compute. Each orbit representative X ∋ 0
/// has exactly |X| translates containing the origin, so the |X| factors in
/// Σ_{X∋0} E[|J_X|^p]/|X| cancel and each orbit contributes its bare moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Σ J_X/|X| over deterministic nonnegative couplings.
    Ferro,
    /// Σ E[|J_X|]/|X|.
    L1,
    /// Σ E[J_X²]/|X|.
    L2Sq,
    /// Σ E[|J_X|^p]/|X| for p ∈ [1, 2].
    Lp(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub kind: NormKind,
    /// May be +∞ when a contribution's moment does not exist.
    pub value: f64,
    pub per_orbit_contributions: Vec<(usize, f64)>,
}

/// Exact norm over orbit representatives via the moment closed forms.
pub fn norm(family: &CouplingFamily, kind: NormKind) -> Result<NormReport> {
    let mut contributions = Vec::with_capacity(family.orbits.len());
    for (i, orbit) in family.orbits.iter().enumerate() {
        let c = match kind {
            NormKind::Ferro => match orbit.distribution {
                DisorderDistribution::Deterministic { value } if value >= 0.0 => value,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "the ferromagnetic norm needs deterministic nonnegative couplings, got {other:?}"
                    )));
                }
            },
            NormKind::L1 => orbit.distribution.moment_p(1.0)?,
            NormKind::L2Sq => orbit.distribution.moment_p(2.0)?,
            NormKind::Lp(p) => orbit.distribution.moment_p(p)?,
        };
        contributions.push((i, c));
    }
    Ok(NormReport {
        kind,
        value: contributions.iter().map(|(_, c)| c).sum(),
        per_orbit_contributions: contributions,
    })
}

/// Which corollary bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// ln 2 + 2β‖J‖ (deterministic ferromagnets).
    Ferro,
    /// ln 2 + (3β²/2)‖J‖₂².
    SecondMoment,
    /// ln 2 + 2β‖J‖₁.
    FirstMoment,
    /// Per-orbit split: finite-variance orbits through the second-moment
    /// term, the rest through the first-moment term.
    Combined,
    /// ln 2 + 3β^p‖J‖_p^p, using the envelope
    /// ln cosh x ≤ min(x²/2, |x|) ≤ |x|^p and |x − tanh x| ≤ min(|x|, |x|³)
    /// ≤ 2|x|^p for p ∈ [1, 2].
    PNorm(f64),
}

/// Numeric value of the corollary bound; +∞ (corollary not applicable) when
/// the relevant norm diverges.
pub fn bound_value(family: &CouplingFamily, beta: f64, kind: BoundKind) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta {beta} must be finite and nonnegative")));
    }
    let ln2 = std::f64::consts::LN_2;
    Ok(match kind {
        BoundKind::Ferro => ln2 + 2.0 * beta * norm(family, NormKind::Ferro)?.value,
        BoundKind::SecondMoment => {
            ln2 + 1.5 * beta * beta * norm(family, NormKind::L2Sq)?.value
        }
        BoundKind::FirstMoment => ln2 + 2.0 * beta * norm(family, NormKind::L1)?.value,
        BoundKind::Combined => {
            let mut total = ln2;
            for orbit in &family.orbits {
                let second = orbit.distribution.moment_p(2.0)?;
                total += if second.is_finite() {
                    1.5 * beta * beta * second
                } else {
                    2.0 * beta * orbit.distribution.moment_p(1.0)?
                };
            }
            total
        }
        BoundKind::PNorm(p) => ln2 + 3.0 * beta.powf(p) * norm(family, NormKind::Lp(p))?.value,
    })
}

/// The tightest applicable bound for a family: ferro for deterministic
/// nonnegative families, otherwise second moment when finite, otherwise
/// first moment.
pub fn applicable_bound(family: &CouplingFamily, beta: f64) -> Result<(BoundKind, f64)> {
    if norm(family, NormKind::Ferro).is_ok() {
        return Ok((BoundKind::Ferro, bound_value(family, beta, BoundKind::Ferro)?));
    }
    let second = bound_value(family, beta, BoundKind::SecondMoment)?;
    if second.is_finite() {
        return Ok((BoundKind::SecondMoment, second));
    }
    Ok((BoundKind::FirstMoment, bound_value(family, beta, BoundKind::FirstMoment)?))
}

/// How pressures in a convergence run are computed.
#[derive(Debug, Clone, Copy)]
pub enum ConvergenceMode {
    /// Deterministic ferromagnet, single exact pressure per box.
    FerroExact,
    /// Exact disorder enumeration per box.
    QuenchedExact,
    /// Monte Carlo over disorder, per-row seed derived from the base seed.
    QuenchedMc { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub pressure: f64,
    pub std_error: f64,
    pub exact: bool,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub beta: f64,
    pub rows: Vec<ConvergenceRow>,
    pub bound_kind: BoundKind,
    pub claimed_limit_bound: f64,
    /// Pairs (N₁, kN₁) where the sub-box inequality failed beyond tolerance.
    pub flagged_pairs: Vec<(usize, usize)>,
}

fn capacity_check(d: usize, n: usize) -> Result<()> {
    let ok = match d {
        1 => n <= 32,
        2 => n <= 5,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Capacity(format!(
            "box side {n} in dimension {d} exceeds the exact-enumeration budget"
        )))
    }
}

/// Pressure sequence p_N along a list of box sides, with the applicable
/// corollary bound. Only p_{kN₁} vs p_{N₁} comparisons are asserted; general
/// monotonicity in N is not claimed.
pub fn convergence_run(
    family: &CouplingFamily,
    mode: ConvergenceMode,
    beta: f64,
    n_list: &[usize],
) -> Result<ConvergenceTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty N list".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("N list must be strictly increasing".into()));
    }
    let d = family.dimension;
    for &n in n_list {
        capacity_check(d, n)?;
    }
    let (bound_kind, claimed_limit_bound) = applicable_bound(family, beta)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let region = Region::cube(d, n)?;
        let (pressure, std_error, exact) = match mode {
            ConvergenceMode::FerroExact | ConvergenceMode::QuenchedExact => {
                let est = quenched::quenched_exact(family, &region, beta)?;
                (est.mean, 0.0, true)
            }
            ConvergenceMode::QuenchedMc { samples, seed } => {
                let mc = quenched::quenched_mc(
                    family,
                    &region,
                    beta,
                    samples,
                    rng::derive_seed(seed, n as u64),
                )?;
                (mc.estimate.mean, mc.estimate.std_error, false)
            }
        };
        rows.push(ConvergenceRow { n, pressure, std_error, exact, bound: claimed_limit_bound });
    }
    let mut flagged_pairs = Vec::new();
    for (i, small) in rows.iter().enumerate() {
        for big in rows.iter().skip(i + 1) {
            if big.n % small.n != 0 {
                continue;
            }
            // sub-box super-additivity at m = N/N₁, r = 0: p_N ≥ p_{N₁}
            let slack = 5.0 * (big.std_error + small.std_error) + 1e-10;
            if big.pressure + slack < small.pressure {
                flagged_pairs.push((small.n, big.n));
            }
        }
    }
    Ok(ConvergenceTable { beta, rows, bound_kind, claimed_limit_bound, flagged_pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxDecomposition {
    pub m: usize,
    pub r: usize,
    pub volume_fraction: f64,
}

/// N = N₁m + r with m = ⌊N/N₁⌋, so that r ≤ N₁ − 1, and the covered volume
/// fraction (mN₁)^d / N^d.
pub fn box_decompose(n: usize, n1: usize, d: usize) -> Result<BoxDecomposition> {
    if n1 == 0 || n1 > n || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "box decomposition needs 1 ≤ N1 ≤ N and d ≥ 1, got N = {n}, N1 = {n1}, d = {d}"
        )));
    }
    let m = n / n1;
    let r = n - m * n1;
    let volume_fraction = ((m * n1) as f64 / n as f64).powi(d as i32);
    Ok(BoxDecomposition { m, r, volume_fraction })
}

/// Closed-form pressure of the 1D nearest-neighbor ferromagnet with free
/// boundaries: p_N = (ln 2 + (N−1)·ln(2 cosh βJ))/N, from the two-state
/// transfer matrix. Independent oracle for the engine.
pub fn ferro_chain_pressure<R: Real>(n: usize, beta: R, j: R) -> R {
    let bonds = R::of((n - 1) as f64);
    (R::ln_2() + bonds * (R::two() * (beta * j).cosh()).ln()) / R::of(n as f64)
}
