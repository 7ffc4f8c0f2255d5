//! Real spectra and numerical Jordan structure.
//!
//! Eigenvalues come from a real Schur decomposition (exact diagonal read-out
//! for triangular input). Jordan chains are built per eigenvalue cluster from
//! the null spaces of powers of `A - lambda I`, using an SVD rank test.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, LdtSystem};

/// Default merge distance for eigenvalues that belong to one Jordan group.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Default bound on the imaginary part accepted as "real".
pub const DEFAULT_COMPLEX_TOL: f64 = 1e-6;
/// Relative singular-value threshold used in rank tests.
pub const RANK_TOL: f64 = 1e-10;
/// Elementwise tolerance for `P^-1 A P` against the assembled Jordan matrix,
/// relative to `max(1, max|A_ij|)`.
pub const STRUCTURE_TOL: f64 = 1e-6;

const MAX_DIM: usize = 32;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReal {
    /// Eigenvalues in ascending order, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Largest |imaginary part| seen before it was discarded.
    pub imag_residual: f64,
}

/// Returns every eigenvalue of `a` as a real number, or `ComplexSpectrum` if
/// one has an imaginary part larger than `complex_tol`.
pub fn eig_real(a: &DenseMatrix, complex_tol: f64) -> Result<SpectrumReal> {
    a.require_square()?;
    let n = a.rows();
    if n > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue routine supports n <= {MAX_DIM}, got {n}"
        )));
    }
    if a.is_upper_triangular() || a.is_lower_triangular() {
        let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eigenvalues.sort_by(f64::total_cmp);
        return Ok(SpectrumReal {
            eigenvalues,
            imag_residual: 0.0,
        });
    }
    let schur = nalgebra::Schur::try_new(a.to_nalgebra(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::IllConditioned("Schur iteration did not converge".into()))?;
    let complex = schur.complex_eigenvalues();
    let mut imag_residual: f64 = 0.0;
    let mut eigenvalues = Vec::with_capacity(n);
    for z in complex.iter() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite);
        }
        imag_residual = imag_residual.max(z.im.abs());
        eigenvalues.push(z.re);
    }
    if imag_residual > complex_tol {
        return Err(Error::ComplexSpectrum {
            imag: imag_residual,
            tol: complex_tol,
        });
    }
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumReal {
        eigenvalues,
        imag_residual,
    })
}

/// One Jordan block `J(lambda, size)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanBlock {
    pub lambda: f64,
    pub size: usize,
}

impl JordanBlock {
    pub fn new(lambda: f64, size: usize) -> Self {
        Self { lambda, size }
    }
}

/// `A = P_J J P_J^-1` with `J` block diagonal.
///
/// Blocks are ordered by ascending eigenvalue (larger blocks first inside a
/// group). Column `offset(i) + j` of `P_J` is the `j`-th vector of block `i`'s
/// chain, with the eigenvector first. Rows of `Q = P_J^-1` are the left
/// vectors `q_{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanStructure {
    blocks: Vec<JordanBlock>,
    p: DenseMatrix,
    q: DenseMatrix,
}

impl JordanStructure {
    /// Structure supplied by the caller. Checks that `P^-1 A P` is the Jordan
    /// matrix of `blocks`.
    pub fn from_parts(a: &DenseMatrix, blocks: Vec<JordanBlock>, p: DenseMatrix) -> Result<Self> {
        a.require_square()?;
        let n = a.rows();
        let total: usize = blocks.iter().map(|b| b.size).sum();
        if blocks.is_empty() || blocks.iter().any(|b| b.size == 0) || total != n {
            return Err(Error::DimensionMismatch(format!(
                "Jordan block sizes sum to {total}, expected {n}"
            )));
        }
        if p.rows() != n || p.cols() != n {
            return Err(Error::DimensionMismatch("P_J must be n x n".into()));
        }
        let q = p.inverse()?;
        let js = Self { blocks, p, q };
        js.check_similarity(a)?;
        Ok(js)
    }

    /// Structure of a matrix that is already in Jordan form (`P_J = I`).
    pub fn jordan_form(blocks: Vec<JordanBlock>) -> Result<(DenseMatrix, Self)> {
        let mats = blocks
            .iter()
            .map(|b| DenseMatrix::jordan_block(b.lambda, b.size))
            .collect::<Result<Vec<_>>>()?;
        let a = DenseMatrix::block_diag(&mats)?;
        let n = a.rows();
        let js = Self::from_parts(&a, blocks, DenseMatrix::identity(n))?;
        Ok((a, js))
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    /// Transformation matrix `P_J`.
    pub fn p(&self) -> &DenseMatrix {
        &self.p
    }

    /// `P_J^-1`; its rows are the `q_{i,j}`.
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.p.rows()
    }

    /// Row index in `Q` of `q_{block, pos}` (both zero-based).
    pub fn row_index(&self, block: usize, pos: usize) -> usize {
        assert!(pos < self.blocks[block].size);
        self.blocks[..block].iter().map(|b| b.size).sum::<usize>() + pos
    }

    /// The row `q_{i, m_i}` closing block `i`.
    pub fn last_row(&self, block: usize) -> &[f64] {
        self.q
            .row(self.row_index(block, self.blocks[block].size - 1))
    }

    /// True when every block has size one.
    pub fn is_diagonalizable(&self) -> bool {
        self.blocks.iter().all(|b| b.size == 1)
    }

    /// Block-diagonal Jordan matrix `J`.
    pub fn jordan_matrix(&self) -> DenseMatrix {
        let mats: Vec<DenseMatrix> = self
            .blocks
            .iter()
            .map(|b| DenseMatrix::jordan_block(b.lambda, b.size).expect("validated block"))
            .collect();
        DenseMatrix::block_diag(&mats).expect("validated blocks")
    }

    /// Same structure with column `col` of `P_J` multiplied by `s` and row
    /// `col` of `Q` divided by it. Only a valid Jordan basis when `col`
    /// belongs to a size-one block or the whole chain is rescaled.
    pub fn rescale_column(&self, col: usize, s: f64) -> Self {
        let mut p = self.p.clone();
        let mut q = self.q.clone();
        for i in 0..p.rows() {
            p[(i, col)] *= s;
        }
        for j in 0..q.cols() {
            q[(col, j)] /= s;
        }
        Self {
            blocks: self.blocks.clone(),
            p,
            q,
        }
    }

    fn check_similarity(&self, a: &DenseMatrix) -> Result<()> {
        let reconstructed = self.q.matmul(a)?.matmul(&self.p)?;
        let err = reconstructed.max_abs_diff(&self.jordan_matrix());
        let tol = STRUCTURE_TOL * a.max_abs().max(1.0);
        if err > tol {
            return Err(Error::IllConditioned(format!(
                "P^-1 A P deviates from the Jordan matrix by {err:.3e}"
            )));
        }
        Ok(())
    }
}

/// Numerical Jordan decomposition of `a`. Eigenvalues closer than
/// `cluster_tol` are merged and replaced by their mean.
pub fn jordan_structure(a: &DenseMatrix, cluster_tol: f64) -> Result<JordanStructure> {
    jordan_structure_with(a, cluster_tol, DEFAULT_COMPLEX_TOL)
}

pub fn jordan_structure_with(
    a: &DenseMatrix,
    cluster_tol: f64,
    complex_tol: f64,
) -> Result<JordanStructure> {
    let spectrum = eig_real(a, complex_tol)?;
    let n = a.rows();
    let scale = a.frobenius_norm().max(1.0);

    let mut blocks = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (lambda, mult) in cluster(&spectrum.eigenvalues, cluster_tol) {
        let shifted = a.shifted(lambda)?.to_nalgebra();
        for chain in chains_for_eigenvalue(&shifted, mult, scale)? {
            blocks.push(JordanBlock::new(lambda, chain.len()));
            columns.extend(chain);
        }
    }

    let p = DenseMatrix::from_columns(&columns)?;
    let q = p
        .inverse()
        .map_err(|_| Error::IllConditioned("chain vectors are linearly dependent".into()))?;
    let js = JordanStructure { blocks, p, q };
    js.check_similarity(a)?;
    Ok(js)
}

/// Groups sorted eigenvalues whose consecutive gaps are within `tol`.
fn cluster(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &x in sorted {
        match groups.last_mut() {
            Some(g) if (x - g[g.len() - 1]).abs() <= tol => g.push(x),
            _ => groups.push(vec![x]),
        }
    }
    groups
        .into_iter()
        .map(|g| (g.iter().sum::<f64>() / g.len() as f64, g.len()))
        .collect()
}

/// Right singular vectors belonging to the `dim` smallest singular values.
fn null_space(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let k = v_t.nrows();
    // SVD::new sorts singular values in descending order.
    v_t.rows(k - dim, dim).transpose()
}

/// Jordan chains for one eigenvalue of algebraic multiplicity `mult`, given
/// `shifted = A - lambda I`. Each chain starts with the eigenvector.
fn chains_for_eigenvalue(
    shifted: &DMatrix<f64>,
    mult: usize,
    scale: f64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = shifted.nrows();
    if mult == 1 {
        let v = null_space(shifted, 1);
        return Ok(vec![vec![normalized(
            v.column(0).iter().copied().collect(),
        )]]);
    }

    // nullity[p] = dim ker (A - lambda I)^p, capped at the multiplicity.
    let mut powers = vec![DMatrix::identity(n, n)];
    let mut nullity = vec![0usize];
    let mut p = 0;
    while nullity[p] < mult {
        p += 1;
        if p > mult {
            return Err(Error::IllConditioned(format!(
                "generalized eigenspace has dimension {} < multiplicity {mult}",
                nullity[p - 1]
            )));
        }
        let next = shifted * &powers[p - 1];
        let sv = next.singular_values();
        let thresh = RANK_TOL * scale.powi(p as i32);
        let count = sv.iter().filter(|&&s| s <= thresh).count().min(mult);
        if count < nullity[p - 1] {
            return Err(Error::IllConditioned("kernel dimensions not nested".into()));
        }
        powers.push(next);
        nullity.push(count);
    }
    let longest = p;
    let increments: Vec<usize> = (1..=longest).map(|p| nullity[p] - nullity[p - 1]).collect();
    if increments.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::IllConditioned(
            "kernel growth is inconsistent with a Jordan structure".into(),
        ));
    }

    let mut chains: Vec<Vec<DVec>> = Vec::new();
    for level in (1..=longest).rev() {
        let longer_here = increments.get(level).copied().unwrap_or(0);
        let new_count = increments[level - 1] - longer_here;
        if new_count == 0 {
            continue;
        }
        let kernel = null_space(&powers[level], nullity[level]);
        let mut spanning: Vec<DVec> = Vec::new();
        if nullity[level - 1] > 0 {
            let lower = null_space(&powers[level - 1], nullity[level - 1]);
            spanning.extend(lower.column_iter().map(|c| c.into_owned()));
        }
        for chain in &chains {
            // Chains are stored eigenvector first, so index level-1 sits at this level.
            spanning.push(chain[level - 1].clone());
        }
        let residual = match orthonormal_basis(&spanning) {
            Some(basis) => &kernel - &basis * (basis.transpose() * &kernel),
            None => kernel.clone(),
        };
        let svd = SVD::new(residual, false, true);
        let sv = &svd.singular_values;
        if sv[new_count - 1] <= 1e-8 {
            return Err(Error::IllConditioned(
                "no independent top vector for a Jordan chain".into(),
            ));
        }
        let v_t = svd.v_t.expect("requested V^T");
        for t in 0..new_count {
            let coeff = v_t.row(t).transpose();
            let top = &kernel * coeff;
            let mut chain = vec![top];
            for _ in 1..level {
                let next = shifted * chain.last().unwrap();
                chain.push(next);
            }
            chain.reverse();
            chains.push(chain);
        }
    }

    chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Ok(chains
        .into_iter()
        .map(|chain| {
            let s = chain[0].norm();
            chain
                .into_iter()
                .map(|v| v.iter().map(|x| x / s).collect())
                .collect()
        })
        .collect())
}

type DVec = nalgebra::DVector<f64>;

fn orthonormal_basis(vectors: &[DVec]) -> Option<DMatrix<f64>> {
    if vectors.is_empty() {
        return None;
    }
    let m = DMatrix::from_columns(vectors);
    Some(m.qr().q())
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Single-input pair whose state matrix has `lambda + (i-1) delta` on the
/// diagonal and ones on the superdiagonal. As `delta -> 0` it tends to the
/// Jordan block `J(lambda, n)`.
pub fn perturbed_single_block(
    lambda: f64,
    n: usize,
    delta: f64,
    b: &DenseMatrix,
) -> Result<LdtSystem> {
    if n == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if b.rows() != n || b.cols() != 1 {
        return Err(Error::DimensionMismatch(format!("b must be {n}x1")));
    }
    let top = lambda + (n - 1) as f64 * delta;
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::EigenvalueOutOfRange { lambda });
    }
    if top >= 1.0 {
        return Err(Error::EigenvalueOutOfRange { lambda: top });
    }
    let mut a = DenseMatrix::jordan_block(lambda, n)?;
    for i in 1..n {
        a[(i, i)] = lambda + i as f64 * delta;
    }
    LdtSystem::new(a, b.clone())
}

/// Upper-triangular eigenvector matrix of the perturbed block, with
/// `p_ij = (j-1)! / (j-i)! * delta^(i-1)` for `j >= i` (one-based).
pub fn perturbed_eigenvectors(n: usize, delta: f64) -> DenseMatrix {
    let mut p = DenseMatrix::zeros(n, n);
    for i in 1..=n {
        for j in i..=n {
            p[(i - 1, j - 1)] = falling(j - 1, i - 1) * delta.powi(i as i32 - 1);
        }
    }
    p
}

/// `x! / (x - k)!`
fn falling(x: usize, k: usize) -> f64 {
    ((x - k + 1)..=x).map(|v| v as f64).product()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Coordinates `beta = P^-1 (0, ..., 0, b_n)` of the last-row input in the
/// eigenvector basis of the perturbed block:
/// `beta_{n-k} = (-1)^k b_n / ((n-k-1)! k! delta^(n-1))`.
pub fn chain_coefficients(n: usize, delta: f64, b_n: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let scale = delta.powi(n as i32 - 1);
    let mut beta = vec![0.0; n];
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        beta[n - k - 1] = sign * b_n / (factorial(n - k - 1) * factorial(k) * scale);
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn eig_real_diagonal() {
        let s = eig_real(&DenseMatrix::diag(&[0.9, 0.4]).unwrap(), 1e-9).unwrap();
        assert_eq!(s.eigenvalues, vec![0.4, 0.9]);
    }

    #[test]
    fn eig_real_triangular() {
        let a = DenseMatrix::from_rows(&[[0.9, 1.0], [0.0, 0.9]]).unwrap();
        assert_eq!(eig_real(&a, 1e-9).unwrap().eigenvalues, vec![0.9, 0.9]);
    }

    #[test]
    fn eig_real_rotation_is_complex() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(matches!(
            eig_real(&a, 1e-9),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn eig_real_full_matrix() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let a = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_close(&eig_real(&a, 1e-9).unwrap().eigenvalues, &[1.0, 3.0], 1e-12);
    }

    #[test]
    fn eig_real_rejects_oversized() {
        assert!(eig_real(&DenseMatrix::identity(33), 1e-9).is_err());
    }

    #[test]
    fn jordan_of_jordan_block_is_identity_transform() {
        let a = DenseMatrix::from_rows(&[[0.9, 1.0], [0.0, 0.9]]).unwrap();
        let js = jordan_structure(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(js.blocks(), &[JordanBlock::new(0.9, 2)]);
        assert!(js.p().max_abs_diff(&DenseMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn jordan_of_diagonal() {
        let js = jordan_structure(&DenseMatrix::diag(&[0.4, 0.9]).unwrap(), 1e-8).unwrap();
        assert_eq!(
            js.blocks(),
            &[JordanBlock::new(0.4, 1), JordanBlock::new(0.9, 1)]
        );
    }

    #[test]
    fn jordan_of_block_diagonal() {
        let a = DenseMatrix::block_diag(&[
            DenseMatrix::diag(&[0.3]).unwrap(),
            DenseMatrix::jordan_block(0.6, 2).unwrap(),
        ])
        .unwrap();
        let js = jordan_structure(&a, 1e-8).unwrap();
        assert_eq!(
            js.blocks(),
            &[JordanBlock::new(0.3, 1), JordanBlock::new(0.6, 2)]
        );
        let prod = js.q().matmul(js.p()).unwrap();
        assert!(prod.max_abs_diff(&DenseMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn jordan_mixed_sizes_same_eigenvalue() {
        // J(0.5, 2) (+) J(0.5, 1): two blocks sharing one eigenvalue.
        let a = DenseMatrix::block_diag(&[
            DenseMatrix::jordan_block(0.5, 1).unwrap(),
            DenseMatrix::jordan_block(0.5, 2).unwrap(),
        ])
        .unwrap();
        let js = jordan_structure(&a, 1e-8).unwrap();
        assert_eq!(
            js.blocks(),
            &[JordanBlock::new(0.5, 2), JordanBlock::new(0.5, 1)]
        );
    }

    #[test]
    fn jordan_of_conjugated_block() {
        // T J T^-1 with J = J(0.7, 3), T upper triangular so the spectrum stays exact.
        let (j, _) = JordanStructure::jordan_form(vec![JordanBlock::new(0.7, 3)]).unwrap();
        let t =
            DenseMatrix::from_rows(&[[1.0, 0.5, -0.2], [0.0, 2.0, 0.3], [0.0, 0.0, 0.5]]).unwrap();
        let a = t.matmul(&j).unwrap().matmul(&t.inverse().unwrap()).unwrap();
        let js = jordan_structure(&a, 1e-8).unwrap();
        assert_eq!(js.blocks().len(), 1);
        assert_eq!(js.blocks()[0].size, 3);
        assert!((js.blocks()[0].lambda - 0.7).abs() < 1e-12);
        let j = js.jordan_matrix();
        let rec = js.q().matmul(&a).unwrap().matmul(js.p()).unwrap();
        assert!(rec.max_abs_diff(&j) < 1e-9);
    }

    #[test]
    fn from_parts_rejects_wrong_structure() {
        let a = DenseMatrix::diag(&[0.4, 0.9]).unwrap();
        let err = JordanStructure::from_parts(
            &a,
            vec![JordanBlock::new(0.4, 2)],
            DenseMatrix::identity(2),
        );
        assert!(matches!(err, Err(Error::IllConditioned(_))));
        let err = JordanStructure::from_parts(
            &a,
            vec![JordanBlock::new(0.4, 1)],
            DenseMatrix::identity(2),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn perturbed_block_examples() {
        let b = DenseMatrix::column(&[0.0, 1.0]).unwrap();
        let sys = perturbed_single_block(0.5, 2, 0.1, &b).unwrap();
        let expected = DenseMatrix::from_rows(&[[0.5, 1.0], [0.0, 0.6]]).unwrap();
        assert!(sys.a().max_abs_diff(&expected) < 1e-15);

        let b3 = DenseMatrix::column(&[0.0, 0.0, 1.0]).unwrap();
        let sys = perturbed_single_block(0.9, 3, 0.01, &b3).unwrap();
        let diag: Vec<f64> = (0..3).map(|i| sys.a()[(i, i)]).collect();
        assert_close(&diag, &[0.9, 0.91, 0.92], 1e-15);

        assert!(matches!(
            perturbed_single_block(0.9, 2, 0.2, &b),
            Err(Error::EigenvalueOutOfRange { .. })
        ));
    }

    #[test]
    fn chain_coefficient_examples() {
        assert_close(
            &chain_coefficients(2, 0.1, 1.0).unwrap(),
            &[-10.0, 10.0],
            1e-12,
        );
        assert_close(
            &chain_coefficients(3, 0.1, 1.0).unwrap(),
            &[50.0, -100.0, 50.0],
            1e-10,
        );
    }

    #[test]
    fn perturbed_eigenvectors_are_eigenvectors() {
        let n = 4;
        let delta = 0.05;
        let b = DenseMatrix::column(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let sys = perturbed_single_block(0.2, n, delta, &b).unwrap();
        let p = perturbed_eigenvectors(n, delta);
        for j in 0..n {
            let col = p.col(j);
            let av = sys.a().matvec(&col).unwrap();
            let lambda = 0.2 + j as f64 * delta;
            for i in 0..n {
                assert!((av[i] - lambda * col[i]).abs() < 1e-14);
            }
        }
    }
}
