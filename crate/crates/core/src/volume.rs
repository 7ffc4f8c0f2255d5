//! Closed-form volumes of infinite-horizon reachability zonotopes.
//!
//! All values are in the unit-cube convention. Three eigenstructure cases are
//! covered: `n` distinct real eigenvalues, a single Jordan block, and several
//! Jordan blocks with pairwise distinct eigenvalues. Every eigenvalue must
//! lie in `[0, 1)`.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, LdtSystem};
use crate::spectral::{self, JordanBlock, JordanStructure, DEFAULT_CLUSTER_TOL};
use crate::zonotope::{build_generators, oracle_volume, RegionKind};

/// Relative size of `|q b|` (against `|q| |b|`) treated as an exact zero.
pub const UNCONTROLLABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeCase {
    Distinct,
    SingleJordan,
    MultiJordan,
}

impl VolumeCase {
    pub fn as_str(self) -> &'static str {
        match self {
            VolumeCase::Distinct => "distinct",
            VolumeCase::SingleJordan => "single-jordan",
            VolumeCase::MultiJordan => "multi-jordan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    /// Closed-form volume, unit-cube convention.
    pub analytic: f64,
    pub oracle: Option<f64>,
    pub horizon_used: Option<usize>,
    /// `|analytic - oracle| / analytic`; absent when either side is missing
    /// or the analytic volume is zero.
    pub rel_gap: Option<f64>,
    pub case: VolumeCase,
    /// Some `q b` term vanished, so the volume is zero.
    pub uncontrollable: bool,
}

impl VolumeReport {
    fn analytic(analytic: f64, case: VolumeCase, uncontrollable: bool) -> Self {
        Self {
            analytic,
            oracle: None,
            horizon_used: None,
            rel_gap: None,
            case,
            uncontrollable,
        }
    }

    /// Attaches a finite-horizon oracle value.
    pub fn with_oracle(mut self, oracle: f64, horizon: usize) -> Self {
        self.oracle = Some(oracle);
        self.horizon_used = Some(horizon);
        self.rel_gap =
            (self.analytic > 0.0).then(|| (self.analytic - oracle).abs() / self.analytic);
        self
    }
}

pub(crate) fn check_unit_interval(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::EigenvalueOutOfRange { lambda })
    }
}

/// `prod_{i<j} (lambda_j - lambda_i) / (1 - lambda_i lambda_j)` (signed).
pub(crate) fn evenness_product(eigs: &[f64]) -> f64 {
    let mut prod = 1.0;
    for (i, &li) in eigs.iter().enumerate() {
        for &lj in &eigs[i + 1..] {
            prod *= (lj - li) / (1.0 - li * lj);
        }
    }
    prod
}

/// `q b`, snapped to zero when negligible against `|q| |b|`.
pub(crate) fn modal_coupling(q: &[f64], b: &[f64]) -> f64 {
    let qb = dot(q, b);
    let scale = dot(q, q).sqrt() * dot(b, b).sqrt();
    if qb.abs() <= UNCONTROLLABLE_TOL * scale {
        0.0
    } else {
        qb
    }
}

/// Spectral data entering the distinct-eigenvalue formula.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctTerms {
    pub eigenvalues: Vec<f64>,
    pub det_p: f64,
    /// `q_i b` for each eigenvalue, in eigenvalue order.
    pub couplings: Vec<f64>,
}

impl DistinctTerms {
    pub fn from_structure(js: &JordanStructure, b: &[f64]) -> Result<Self> {
        if !js.is_diagonalizable() {
            return Err(Error::RepeatedEigenvalues);
        }
        let eigenvalues: Vec<f64> = js.blocks().iter().map(|blk| blk.lambda).collect();
        if eigenvalues.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::RepeatedEigenvalues);
        }
        for &l in &eigenvalues {
            check_unit_interval(l)?;
        }
        let couplings = (0..js.n())
            .map(|i| modal_coupling(js.q().row(i), b))
            .collect();
        Ok(Self {
            eigenvalues,
            det_p: js.p().det()?,
            couplings,
        })
    }

    pub fn volume(&self) -> f64 {
        let modal: f64 = self
            .eigenvalues
            .iter()
            .zip(&self.couplings)
            .map(|(l, qb)| qb / (1.0 - l))
            .product();
        (self.det_p * evenness_product(&self.eigenvalues) * modal).abs()
    }

    pub fn uncontrollable(&self) -> bool {
        self.couplings.contains(&0.0)
    }
}

/// Infinite-horizon volume for `n` distinct real eigenvalues in `[0, 1)`:
/// `|det(P) prod_{i<j} (l_j - l_i)/(1 - l_i l_j) prod_i q_i b / (1 - l_i)|`.
/// Returns zero when some `q_i b` vanishes.
pub fn volume_distinct(sys: &LdtSystem) -> Result<f64> {
    volume_distinct_with(sys, DEFAULT_CLUSTER_TOL)
}

pub fn volume_distinct_with(sys: &LdtSystem, cluster_tol: f64) -> Result<f64> {
    Ok(distinct_terms(sys, cluster_tol)?.volume())
}

pub fn distinct_terms(sys: &LdtSystem, cluster_tol: f64) -> Result<DistinctTerms> {
    let b = sys.input_vector()?;
    let spectrum = spectral::eig_real(sys.a(), spectral::DEFAULT_COMPLEX_TOL)?;
    for &l in &spectrum.eigenvalues {
        check_unit_interval(l)?;
    }
    if spectrum
        .eigenvalues
        .windows(2)
        .any(|w| w[1] - w[0] <= cluster_tol)
    {
        return Err(Error::RepeatedEigenvalues);
    }
    let js = spectral::jordan_structure(sys.a(), cluster_tol)?;
    DistinctTerms::from_structure(&js, &b)
}

/// Volume for a single Jordan block `J(lambda, n)` with last input entry
/// `b_last`: `|b_last|^n / ((1 - lambda)^n (1 - lambda^2)^(n(n-1)/2))`.
pub fn volume_single_jordan(lambda: f64, n: usize, b_last: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    check_unit_interval(lambda)?;
    let n_i = n as i32;
    let pairs = (n * (n - 1) / 2) as i32;
    Ok(b_last.abs().powi(n_i) / ((1.0 - lambda).powi(n_i) * (1.0 - lambda * lambda).powi(pairs)))
}

/// Cross-block factor `|prod_{i<j} ((l_i - l_j)/(1 - l_i l_j))^(m_i m_j)|`.
pub(crate) fn cross_block_factor(blocks: &[JordanBlock]) -> f64 {
    let mut prod = 1.0f64;
    for (i, bi) in blocks.iter().enumerate() {
        for bj in &blocks[i + 1..] {
            let term = (bi.lambda - bj.lambda) / (1.0 - bi.lambda * bj.lambda);
            prod *= term.abs().powi((bi.size * bj.size) as i32);
        }
    }
    prod
}

/// Within-block factor `prod_i 1 / (1 - l_i^2)^(m_i (m_i - 1) / 2)`.
pub(crate) fn within_block_factor(blocks: &[JordanBlock]) -> f64 {
    blocks
        .iter()
        .map(|b| 1.0 / (1.0 - b.lambda * b.lambda).powi((b.size * (b.size - 1) / 2) as i32))
        .product()
}

pub(crate) fn check_blocks(blocks: &[JordanBlock]) -> Result<()> {
    for (i, b) in blocks.iter().enumerate() {
        check_unit_interval(b.lambda)?;
        if blocks[i + 1..].iter().any(|o| o.lambda == b.lambda) {
            return Err(Error::SharedBlockEigenvalue { lambda: b.lambda });
        }
    }
    Ok(())
}

/// `q_{i, m_i} b` for every block.
pub fn last_row_couplings(js: &JordanStructure, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != js.n() {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, expected {}",
            b.len(),
            js.n()
        )));
    }
    Ok((0..js.blocks().len())
        .map(|i| modal_coupling(js.last_row(i), b))
        .collect())
}

/// Volume for a general Jordan structure with pairwise distinct block
/// eigenvalues:
/// `cross * |det(P_J) prod_i (q_{i,m_i} b)^m_i / ((1-l_i)^m_i (1-l_i^2)^(m_i(m_i-1)/2))|`.
pub fn volume_jordan(js: &JordanStructure, b: &DenseMatrix) -> Result<f64> {
    if b.cols() != 1 {
        return Err(Error::MultiInputUnsupported { r: b.cols() });
    }
    let b = b.col(0);
    check_blocks(js.blocks())?;
    let couplings = last_row_couplings(js, &b)?;
    let mut modal = js.p().det()?;
    for (blk, qb) in js.blocks().iter().zip(&couplings) {
        modal *= (qb / (1.0 - blk.lambda)).powi(blk.size as i32);
    }
    Ok(cross_block_factor(js.blocks()) * within_block_factor(js.blocks()) * modal.abs())
}

/// Classifies the spectrum of `sys` and applies the matching closed form.
pub fn volume_auto(sys: &LdtSystem, cluster_tol: f64) -> Result<VolumeReport> {
    if sys.r() != 1 {
        return Err(Error::MultiInputUnsupported { r: sys.r() });
    }
    let js = spectral::jordan_structure(sys.a(), cluster_tol)?;
    volume_with_structure(sys, &js)
}

/// As [`volume_auto`] with a caller-supplied Jordan structure.
pub fn volume_with_structure(sys: &LdtSystem, js: &JordanStructure) -> Result<VolumeReport> {
    let b = sys.input_vector()?;
    if js.n() != sys.n() {
        return Err(Error::DimensionMismatch(
            "Jordan structure size differs from n".into(),
        ));
    }
    for blk in js.blocks() {
        check_unit_interval(blk.lambda)?;
    }
    if js.is_diagonalizable() {
        check_blocks(js.blocks())?;
        let terms = DistinctTerms::from_structure(js, &b)?;
        return Ok(VolumeReport::analytic(
            terms.volume(),
            VolumeCase::Distinct,
            terms.uncontrollable(),
        ));
    }
    let case = if js.blocks().len() == 1 {
        VolumeCase::SingleJordan
    } else {
        VolumeCase::MultiJordan
    };
    let v = volume_jordan(js, sys.b())?;
    let uncontrollable = last_row_couplings(js, &b)?.contains(&0.0);
    Ok(VolumeReport::analytic(v, case, uncontrollable))
}

/// Reach report with the subset-determinant oracle evaluated at `horizon`.
pub fn volume_report_with_oracle(
    sys: &LdtSystem,
    js: &JordanStructure,
    horizon: usize,
) -> Result<VolumeReport> {
    let report = volume_with_structure(sys, js)?;
    let z = build_generators(sys, horizon, RegionKind::Reach)?;
    Ok(report.with_oracle(oracle_volume(&z)?, horizon))
}

/// Checks `|lambda| > 1` for every eigenvalue of `a`.
pub fn check_anti_stable(a: &DenseMatrix) -> Result<()> {
    let spectrum = spectral::eig_real(a, spectral::DEFAULT_COMPLEX_TOL)?;
    if let Some(&l) = spectrum.eigenvalues.iter().find(|l| l.abs() <= 1.0) {
        return Err(Error::NotAntiStable { lambda: l });
    }
    Ok(())
}

/// The pair `(A^-1, B)` whose reach region, mapped by `A^-1`, is the
/// controllability region of `(A, B)`.
pub fn inverse_pair(sys: &LdtSystem) -> Result<LdtSystem> {
    LdtSystem::new(sys.a().inverse()?, sys.b().clone())
}

/// Infinite-horizon controllability-region volume,
/// `|det A|^-1 * vol R^d_inf(A^-1, B)`. Needs every `|lambda| > 1`.
pub fn volume_controllability(sys: &LdtSystem) -> Result<f64> {
    Ok(controllability_report(sys, DEFAULT_CLUSTER_TOL)?.analytic)
}

/// Controllability report; the oracle, when attached later, should use
/// control-kind generators of `sys` itself.
pub fn controllability_report(sys: &LdtSystem, cluster_tol: f64) -> Result<VolumeReport> {
    if sys.r() != 1 {
        return Err(Error::MultiInputUnsupported { r: sys.r() });
    }
    check_anti_stable(sys.a())?;
    let det_a = sys.a().det()?;
    let inv = inverse_pair(sys)?;
    let mut report = volume_auto(&inv, cluster_tol)?;
    report.analytic /= det_a.abs();
    Ok(report)
}

/// Volumes `V(delta)` of the perturbed single-block systems with input
/// `(0, ..., 0, b_last)`, each computed by the distinct-eigenvalue formula.
/// The sequence tends to [`volume_single_jordan`] as `delta -> 0`.
pub fn jordan_limit_check(
    lambda: f64,
    n: usize,
    b_last: f64,
    deltas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let mut b = vec![0.0; n.max(1)];
    *b.last_mut().unwrap() = b_last;
    let b = DenseMatrix::column(&b)?;
    deltas
        .iter()
        .map(|&delta| {
            let sys = spectral::perturbed_single_block(lambda, n, delta, &b)?;
            // Perturbed eigenvalues are exactly `delta` apart, so any
            // positive cluster tolerance below `delta` keeps them distinct.
            let tol = DEFAULT_CLUSTER_TOL.min(0.5 * delta);
            Ok((delta, volume_distinct_with(&sys, tol)?))
        })
        .collect()
}
