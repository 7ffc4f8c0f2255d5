#![allow(dead_code)]

use ctlvol::{DenseMatrix, LdtSystem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random `T = I + 0.4 R` with `R` uniform in [-1, 1]; redrawn until its
/// condition number is below 20.
pub fn well_conditioned(rng: &mut StdRng, n: usize) -> DenseMatrix {
    loop {
        let mut t = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] += 0.4 * rng.gen_range(-1.0..1.0);
            }
        }
        let sv = t.singular_values();
        if sv[n - 1] > 0.0 && sv[0] / sv[n - 1] < 20.0 {
            return t;
        }
    }
}

/// Eigenvalues uniform in `[lo, hi]` with pairwise gaps of at least `gap`.
pub fn spread_eigenvalues(rng: &mut StdRng, n: usize, lo: f64, hi: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut eigs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        eigs.sort_by(f64::total_cmp);
        if eigs.windows(2).all(|w| w[1] - w[0] >= gap) {
            return eigs;
        }
    }
}

/// `(T diag(eigs) T^-1, b)` with a random well-conditioned `T`.
pub fn random_distinct_system(rng: &mut StdRng, eigs: &[f64], b: &[f64]) -> LdtSystem {
    let n = eigs.len();
    let t = well_conditioned(rng, n);
    let a = t
        .matmul(&DenseMatrix::diag(eigs).unwrap())
        .unwrap()
        .matmul(&t.inverse().unwrap())
        .unwrap();
    LdtSystem::single_input(a, b).unwrap()
}

pub fn random_vec(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Upper-triangular solve by back substitution.
pub fn back_substitute(u: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= u[(i, j)] * x[j];
        }
        x[i] = s / u[(i, i)];
    }
    x
}

/// Truncated double sum `sum_{0<=j<k<N} lambda^(j+k-1) (k-j)`: the unit-cube
/// volume of the `N`-step zonotope of `(J(lambda, 2), (0, 1))`, whose
/// generators are `(k lambda^(k-1), lambda^k)`.
pub fn jordan2_double_sum(lambda: f64, horizon: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..horizon {
        for j in 0..k {
            total += lambda.powi((j + k) as i32 - 1) * (k - j) as f64;
        }
    }
    total
}

/// `1 / ((1 - lambda)^2 (1 - lambda^2))`, the limit of [`jordan2_double_sum`].
pub fn jordan2_closed_form(lambda: f64) -> f64 {
    1.0 / ((1.0 - lambda).powi(2) * (1.0 - lambda * lambda))
}
