//! Numerical verification of the pressure inequalities on exact finite
//! instances: the telescoping bound and its exact ratio identity, the three
//! corollary bounds for non-random / dependent / independent couplings,
//! monotonicity of the quenched pressure in the multipliers, the Griffiths
//! inequality for ferromagnets, box super-additivity, the truncation error
//! bound, and the scalar inequality toolbox.
//!
//! Reports fold each sub-check's allowance into the recorded violation, so a
//! positive `max_violation` always means a genuine violation.

use rayon::prelude::*;
use serde::Serialize;

use crate::disorder::{truncate, DisorderDistribution};
use crate::engine;
use crate::limit;
use crate::model::{self, CouplingFamily, Hamiltonian, Region};
use crate::quenched::{self, ExactEnsemble};
use crate::rng;
use crate::scalar::{ln_cosh, simpson};
use crate::{Error, Result};

/// Tolerance for pure-enumeration inequality checks.
pub const ENUM_TOL: f64 = 1e-10;
/// Tolerance for finite-difference derivative sign checks.
pub const FD_TOL: f64 = 1e-8;
/// Tolerance for analytic-vs-finite-difference derivative agreement.
pub const DERIV_AGREE_TOL: f64 = 1e-6;
/// Relative tolerance for the exact partition-ratio identity.
pub const RATIO_TOL: f64 = 1e-12;
/// Tolerance for Gibbs expectation sign checks.
pub const EXPECTATION_TOL: f64 = 1e-12;
/// Tolerance for the quadrature side of the scalar toolbox.
pub const QUADRATURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances_run: u64,
    /// Positive means violated (allowances already subtracted).
    pub max_violation: f64,
    pub worst_instance_seed: u64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_instance: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            instances_run: 0,
            max_violation: f64::NEG_INFINITY,
            worst_instance_seed: 0,
            passed: true,
            worst_instance: None,
        }
    }

    /// Record one sub-check outcome; `violation` is already net of its
    /// allowance, so positive means violated.
    pub fn record(&mut self, violation: f64, seed: u64, instance: impl FnOnce() -> Option<String>) {
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst_instance_seed = seed;
            self.worst_instance = if violation > 0.0 { instance() } else { None };
        }
        self.passed = self.max_violation <= 0.0;
    }

    pub fn bump_instances(&mut self, n: u64) {
        self.instances_run += n;
    }

    /// Merge a per-instance report into a sweep aggregate.
    pub fn absorb(&mut self, other: &CheckReport) {
        self.instances_run += other.instances_run.max(1);
        if other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
            self.worst_instance_seed = other.worst_instance_seed;
            self.worst_instance = other.worst_instance.clone();
        }
        self.passed = self.max_violation <= 0.0;
    }
}

fn describe_instance(h: &Hamiltonian<f64>) -> String {
    format!(
        "{{sites: {}, terms: {:?}}}",
        h.region().len(),
        h.terms()
            .iter()
            .map(|t| (t.subset().0, t.multiplier(), t.coupling()))
            .collect::<Vec<_>>()
    )
}

/// Pointwise scalar inequalities used by the proofs, plus the exact integral
/// identity |x − tanh x| = ∫₀^|x| tanh²(y) dy checked by quadrature.
pub fn scalar_toolbox_check(grid: &[f64]) -> CheckReport {
    let mut report = CheckReport::new("scalar_toolbox");
    for (i, &x) in grid.iter().enumerate() {
        let a = x.abs();
        let lc = ln_cosh(x);
        let gap = x - x.tanh();
        let chain_b = a * x.tanh().powi(2);
        let chain_c = a.min(a.powi(3));
        let checks = [
            lc - x * x / 2.0,
            lc - a,
            x.tanh().abs() - a,
            gap.abs() - chain_b,
            chain_b - chain_c,
            chain_c - x * x,
            // exponent-p envelope backing the p-norm bound
            a.min(a * a) - a.powf(1.0),
            a.min(a * a) - a.powf(1.5),
            a.min(a * a) - a.powf(2.0),
        ];
        for v in checks {
            report.record(v - EXPECTATION_TOL, i as u64, || Some(format!("x = {x}")));
        }
        report.bump_instances(1);
    }
    // quadrature on a subsample: the identity is exact, the quadrature is not
    let stride = (grid.len() / 100).max(1);
    for (i, &x) in grid.iter().enumerate().step_by(stride) {
        let a = x.abs();
        let panels = 200 + (a * 160.0) as usize;
        let integral = simpson(|y| y.tanh().powi(2), 0.0, a, panels);
        let v = ((x - x.tanh()).abs() - integral).abs() - QUADRATURE_TOL;
        report.record(v, i as u64, || Some(format!("x = {x} (quadrature)")));
    }
    report
}

/// Exact ratio identity: exp(Δ ln Z) across one added term equals the
/// cosh/tanh closed form, to 1e−12 relative, for every prefix index.
pub fn ratio_identity_check(h: &Hamiltonian<f64>, beta: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("ratio_identity");
    let mut log_z_prev = engine::log_partition(&h.prefix(0)?, beta)?.log_partition;
    for n in 0..h.n_terms() {
        let prefix = h.prefix(n)?;
        let log_z_next = engine::log_partition(&h.prefix(n + 1)?, beta)?.log_partition;
        let quotient = (log_z_next - log_z_prev).exp();
        let ratio = engine::partition_ratio(&prefix, &h.terms()[n], beta)?;
        let rel = (quotient - ratio).abs() / ratio.abs().max(f64::MIN_POSITIVE);
        report.record(rel - RATIO_TOL, n as u64, || Some(describe_instance(h)));
        log_z_prev = log_z_next;
        report.bump_instances(1);
    }
    Ok(report)
}

/// One-sided telescoping bound for a single prefix index `n`:
/// p(full) − p(prefix n) ≤ (1/|Λ|) Σ_{k>n} [ln cosh(βλ_k J_k) +
/// tanh(βλ_k J_k)·⟨σ_{X_k}⟩ over prefix k−1].
pub fn telescoping_bound_check(h: &Hamiltonian<f64>, beta: f64, n: usize) -> Result<CheckReport> {
    if n > h.n_terms() {
        return Err(Error::InvalidParameter(format!(
            "prefix index {n} exceeds term count {}",
            h.n_terms()
        )));
    }
    let mut report = CheckReport::new("telescoping_bound");
    let volume = h.region().len() as f64;
    let p_full = engine::log_partition(h, beta)?.pressure_density;
    let p_n = engine::log_partition(&h.prefix(n)?, beta)?.pressure_density;
    let mut rhs = 0.0;
    for k in n..h.n_terms() {
        let term = h.terms()[k];
        let arg = beta * term.effective();
        let expectation = engine::gibbs_expectation(&h.prefix(k)?, beta, term.subset())?;
        rhs += ln_cosh(arg) + arg.tanh() * expectation;
    }
    rhs /= volume;
    report.record((p_full - p_n) - rhs - ENUM_TOL, n as u64, || Some(describe_instance(h)));
    report.bump_instances(1);
    Ok(report)
}

/// Telescoping bound for every prefix index at once, sharing the per-term
/// Gibbs expectations via suffix sums. Also asserts the slack decomposition:
/// the bound's slack equals Σ_k [stated term − ln(exact ratio_k)] ≥ 0.
pub fn telescoping_bound_check_all(h: &Hamiltonian<f64>, beta: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("telescoping_bound");
    let volume = h.region().len() as f64;
    let m = h.n_terms();
    let mut pressures = Vec::with_capacity(m + 1);
    let mut terms_rhs = Vec::with_capacity(m);
    let mut log_ratios = Vec::with_capacity(m);
    for k in 0..=m {
        pressures.push(engine::log_partition(&h.prefix(k)?, beta)?.pressure_density);
    }
    for k in 0..m {
        let term = h.terms()[k];
        let arg = beta * term.effective();
        let expectation = engine::gibbs_expectation(&h.prefix(k)?, beta, term.subset())?;
        terms_rhs.push(ln_cosh(arg) + arg.tanh() * expectation);
        log_ratios.push(engine::log_partition_ratio(&h.prefix(k)?, &term, beta)?);
    }
    // suffix sums give the bound for every n
    let mut suffix = 0.0;
    let mut suffix_ratio = 0.0;
    let mut bounds = vec![0.0; m + 1];
    let mut ratio_tails = vec![0.0; m + 1];
    for k in (0..m).rev() {
        suffix += terms_rhs[k];
        suffix_ratio += log_ratios[k];
        bounds[k] = suffix;
        ratio_tails[k] = suffix_ratio;
    }
    let p_full = pressures[m];
    for n in 0..=m {
        let lhs = p_full - pressures[n];
        let rhs = bounds[n] / volume;
        report.record(lhs - rhs - ENUM_TOL, n as u64, || Some(describe_instance(h)));
        // slack decomposition: rhs − lhs = Σ_{k>n} [term_k − ln ratio_k] / |Λ|
        let slack_direct = rhs - lhs;
        let slack_decomposed = (bounds[n] - ratio_tails[n]) / volume;
        report.record(
            (slack_direct - slack_decomposed).abs() - 1e-9,
            n as u64,
            || Some(describe_instance(h)),
        );
        report.bump_instances(1);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorollaryVariant {
    /// Inequality for non-random couplings: |⟨σ_X⟩| ≤ 1 inside the sum.
    Nonrandom,
    /// Dependent couplings: E[ln cosh] + E[|tanh|] per term.
    Dependent,
    /// Independent couplings: E[ln cosh] + |E[tanh]| per term.
    Independent,
}

/// The corollary pressure bounds, with every expectation computed exactly
/// over the ensemble's finite disorder space.
pub fn corollary_bound_check(
    ens: &ExactEnsemble,
    beta: f64,
    n: usize,
    variant: CorollaryVariant,
) -> Result<CheckReport> {
    if n > ens.n_terms() {
        return Err(Error::InvalidParameter(format!(
            "prefix index {n} exceeds term count {}",
            ens.n_terms()
        )));
    }
    match variant {
        CorollaryVariant::Nonrandom if ens.n_outcomes() != 1 => {
            return Err(Error::InvalidParameter(
                "the nonrandom variant needs a deterministic (single-outcome) ensemble".into(),
            ));
        }
        CorollaryVariant::Independent if !ens.is_independent() => {
            return Err(Error::InvalidParameter(
                "the independent variant needs an independent-product ensemble".into(),
            ));
        }
        _ => {}
    }
    let name = match variant {
        CorollaryVariant::Nonrandom => "corollary_bound_nonrandom",
        CorollaryVariant::Dependent => "corollary_bound_dependent",
        CorollaryVariant::Independent => "corollary_bound_independent",
    };
    let mut report = CheckReport::new(name);
    let volume = ens.region().len() as f64;
    let lhs = ens.quenched_pressure(beta)?;
    let mut rhs = ens.quenched_pressure_prefix(beta, n)?;
    for k in n..ens.n_terms() {
        rhs += match variant {
            CorollaryVariant::Nonrandom | CorollaryVariant::Dependent => {
                (ens.term_marginal(k, |j| ln_cosh(beta * j))
                    + ens.term_marginal(k, |j| (beta * j).tanh().abs()))
                    / volume
            }
            CorollaryVariant::Independent => {
                (ens.term_marginal(k, |j| ln_cosh(beta * j))
                    + ens.term_marginal(k, |j| (beta * j).tanh()).abs())
                    / volume
            }
        };
    }
    report.record(lhs - rhs - ENUM_TOL, n as u64, || {
        Some(format!("ensemble with {} terms, prefix {n}", ens.n_terms()))
    });
    report.bump_instances(1);
    Ok(report)
}

/// Monotonicity of the exact quenched pressure in a common orbit multiplier:
/// P_Λ(λ) nondecreasing along the grid, central finite differences
/// nonnegative, and the analytic derivative E[Σ βJ_X ⟨σ_X⟩] matching the
/// finite difference. P here is the unnormalized E[ln Z].
pub fn cl_monotonicity_check(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
    orbit_index: usize,
    lambda_grid: &[f64],
) -> Result<CheckReport> {
    if orbit_index >= family.orbits.len() {
        return Err(Error::InvalidParameter(format!(
            "orbit index {orbit_index} out of range ({} orbits)",
            family.orbits.len()
        )));
    }
    if lambda_grid.iter().any(|&l| !(l >= 0.0)) {
        return Err(Error::InvalidParameter("lambda grid must be nonnegative".into()));
    }
    if lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("lambda grid must be strictly increasing".into()));
    }
    let ens = ExactEnsemble::from_family(family, region)?;
    let pressure_at = |l: f64| -> Result<f64> {
        ens.with_orbit_multiplier(orbit_index, l)?.quenched_log_z(beta)
    };
    let mut report = CheckReport::new("cl_monotonicity");
    let values: Vec<f64> = lambda_grid.iter().map(|&l| pressure_at(l)).collect::<Result<_>>()?;
    for i in 0..values.len() {
        if i + 1 < values.len() {
            report.record(values[i] - values[i + 1] - ENUM_TOL, i as u64, || {
                Some(format!("λ ∈ [{}, {}]", lambda_grid[i], lambda_grid[i + 1]))
            });
        }
        let l = lambda_grid[i];
        let step = 1e-4 * l.max(1.0);
        if l - step >= 0.0 {
            let fd = (pressure_at(l + step)? - pressure_at(l - step)?) / (2.0 * step);
            report.record(-fd - FD_TOL, i as u64, || Some(format!("λ = {l}, fd = {fd}")));
            let analytic = ens
                .with_orbit_multiplier(orbit_index, l)?
                .quenched_dlogz_dlambda(orbit_index, beta)?;
            report.record((analytic - fd).abs() - DERIV_AGREE_TOL, i as u64, || {
                Some(format!("λ = {l}, analytic {analytic} vs fd {fd}"))
            });
        }
        report.bump_instances(1);
    }
    Ok(report)
}

/// First Griffiths inequality on deterministic ferromagnets: the pressure is
/// nondecreasing in each coupling, and every ⟨σ_X⟩ is nonnegative.
pub fn griffiths_check(
    h: &Hamiltonian<f64>,
    beta: f64,
    term_index: usize,
    j_grid: &[f64],
) -> Result<CheckReport> {
    if term_index >= h.n_terms() {
        return Err(Error::InvalidParameter(format!(
            "term index {term_index} out of range ({} terms)",
            h.n_terms()
        )));
    }
    if h.terms().iter().any(|t| t.effective() < 0.0) {
        return Err(Error::InvalidParameter(
            "griffiths check needs all couplings nonnegative".into(),
        ));
    }
    if j_grid.iter().any(|&j| !(j >= 0.0)) {
        return Err(Error::InvalidParameter("coupling grid must be nonnegative".into()));
    }
    if j_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("coupling grid must be strictly increasing".into()));
    }
    let with_coupling = |j: f64| -> Result<Hamiltonian<f64>> {
        h.map_terms(|i, t| if i == term_index { t.with_coupling(j) } else { Ok(*t) })
    };
    let pressure_at =
        |j: f64| -> Result<f64> { Ok(engine::log_partition(&with_coupling(j)?, beta)?.pressure_density) };
    let mut report = CheckReport::new("griffiths");
    let values: Vec<f64> = j_grid.iter().map(|&j| pressure_at(j)).collect::<Result<_>>()?;
    for i in 0..values.len() {
        if i + 1 < values.len() {
            report.record(values[i] - values[i + 1] - ENUM_TOL, i as u64, || {
                Some(describe_instance(h))
            });
        }
        let j = j_grid[i];
        let step = 1e-4 * j.max(1.0);
        let fd = if j - step >= 0.0 {
            (pressure_at(j + step)? - pressure_at(j - step)?) / (2.0 * step)
        } else {
            (pressure_at(j + step)? - pressure_at(j)?) / step
        };
        report.record(-fd - ENUM_TOL, i as u64, || Some(describe_instance(h)));
        let h_j = with_coupling(j)?;
        for t in h_j.terms() {
            let expectation = engine::gibbs_expectation(&h_j, beta, t.subset())?;
            report.record(-expectation - EXPECTATION_TOL, i as u64, || Some(describe_instance(&h_j)));
        }
        report.bump_instances(1);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub enum DisorderMode {
    /// Exact disorder enumeration (finitely-supported laws only).
    Exact,
    /// Monte Carlo over disorder replicas, compared at 5 standard errors.
    Mc { samples: u64, seed: u64 },
}

/// Box decomposition inequality for cubes:
/// p_N ≥ (mN₁)^d/N^d · p_{N₁} + (1 − (mN₁)^d/N^d)·ln 2,
/// for deterministic ferromagnets and for quenched pressures alike.
pub fn superadditivity_check(
    family: &CouplingFamily,
    n: usize,
    n1: usize,
    beta: f64,
    mode: DisorderMode,
) -> Result<CheckReport> {
    let d = family.dimension;
    let decomposition = limit::box_decompose(n, n1, d)?;
    let big = Region::cube(d, n)?;
    let small = Region::cube(d, n1)?;
    let fraction = decomposition.volume_fraction;
    let mut report = CheckReport::new("superadditivity");
    match mode {
        DisorderMode::Exact => {
            let p_big = quenched::quenched_exact(family, &big, beta)?.mean;
            let p_small = quenched::quenched_exact(family, &small, beta)?.mean;
            let rhs = fraction * p_small + (1.0 - fraction) * std::f64::consts::LN_2;
            report.record(rhs - p_big - ENUM_TOL, n as u64, || {
                Some(format!("N = {n}, N1 = {n1}, fraction = {fraction}"))
            });
        }
        DisorderMode::Mc { samples, seed } => {
            let mc_big = quenched::quenched_mc(family, &big, beta, samples, seed)?;
            let mc_small =
                quenched::quenched_mc(family, &small, beta, samples, rng::derive_seed(seed, 1))?;
            let rhs = fraction * mc_small.estimate.mean + (1.0 - fraction) * std::f64::consts::LN_2;
            let combined = (mc_big.estimate.std_error.powi(2)
                + (fraction * mc_small.estimate.std_error).powi(2))
            .sqrt();
            report.record(rhs - mc_big.estimate.mean - 5.0 * combined, seed, || {
                Some(format!("N = {n}, N1 = {n1}, fraction = {fraction}, seed = {seed}"))
            });
        }
    }
    report.bump_instances(1);
    Ok(report)
}

/// One row of a truncation sweep at cutoff R.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationRow {
    pub r: f64,
    pub diff_mean: f64,
    pub diff_std_error: f64,
    pub bound: f64,
}

/// Common-random-number sweep of p_Λ(β) − p_Λ⁽¹⁾(β) against the tail bound
/// (2β/|Λ|)·Σ E[|J⁽²⁾|]. The same underlying coupling draws feed the full
/// and truncated Hamiltonians at every cutoff.
pub fn truncation_sweep(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
    r_grid: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<TruncationRow>> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidParameter("R grid must be positive".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("R grid must be strictly increasing".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    for orbit in &family.orbits {
        if let DisorderDistribution::SymmetricPareto { alpha, .. } = orbit.distribution {
            if alpha <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "tail index alpha = {alpha} ≤ 1: E[J] does not exist, truncation bound needs alpha > 1"
                )));
            }
        }
    }
    let layout = model::layout(family, region)?;
    let dists: Vec<DisorderDistribution> =
        layout.terms.iter().map(|t| family.orbits[t.orbit].distribution).collect();
    let pairs_per_r: Vec<Vec<crate::disorder::TruncatedPair>> = r_grid
        .iter()
        .map(|&r| dists.iter().map(|d| truncate(*d, r)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    // per sample: one vector of underlying draws, reused at every cutoff
    let per_sample: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut rng = rng::stream(seed, i + 1);
            let draws: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
            let full = hamiltonian_with(&layout, &draws)?;
            let p_full = engine::log_partition(&full, beta)?.pressure_density;
            let mut diffs = Vec::with_capacity(r_grid.len());
            for pairs in &pairs_per_r {
                let bounded: Vec<f64> =
                    draws.iter().zip(pairs).map(|(&j, p)| p.split(j).0).collect();
                let truncated = hamiltonian_with(&layout, &bounded)?;
                diffs.push(p_full - engine::log_partition(&truncated, beta)?.pressure_density);
            }
            Ok(diffs)
        })
        .collect::<Result<Vec<_>>>()?;
    let volume = layout.region.len() as f64;
    let n = n_samples as f64;
    let mut rows = Vec::with_capacity(r_grid.len());
    for (ri, &r) in r_grid.iter().enumerate() {
        let mean = per_sample.iter().map(|d| d[ri]).sum::<f64>() / n;
        let var = per_sample.iter().map(|d| (d[ri] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let bound = 2.0 * beta / volume
            * dists.iter().map(|d| d.truncation_remainder_abs_mean(r)).sum::<f64>();
        rows.push(TruncationRow {
            r,
            diff_mean: mean,
            diff_std_error: (var / n).sqrt(),
            bound,
        });
    }
    Ok(rows)
}

fn hamiltonian_with(layout: &model::TermLayout, couplings: &[f64]) -> Result<Hamiltonian<f64>> {
    let terms = layout
        .terms
        .iter()
        .zip(couplings)
        .map(|(t, &j)| model::InteractionTerm::new(t.subset, 1.0, j))
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(layout.region.clone(), terms)
}

/// Truncation error bound check: the measured p − p⁽¹⁾ stays below the tail
/// bound at every cutoff, and the bound decreases monotonically in R.
pub fn truncation_error_check(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
    r_grid: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<CheckReport> {
    let rows = truncation_sweep(family, region, beta, r_grid, n_samples, seed)?;
    let mut report = CheckReport::new("truncation_error");
    for (i, row) in rows.iter().enumerate() {
        report.record(
            row.diff_mean - row.bound - 5.0 * row.diff_std_error,
            seed,
            || Some(format!("R = {}, diff {} ± {}, bound {}", row.r, row.diff_mean, row.diff_std_error, row.bound)),
        );
        if i + 1 < rows.len() {
            report.record(rows[i + 1].bound - row.bound - 1e-15, seed, || {
                Some(format!("bound not decreasing between R = {} and R = {}", row.r, rows[i + 1].r))
            });
        }
        report.bump_instances(1);
    }
    Ok(report)
}
