//! Finite-horizon reachability / controllability zonotopes.
//!
//! A zonotope here is the Minkowski sum of segments `c_k g_k` where each
//! coefficient ranges over `[0, 1]` (unit-cube convention) or `[-1, 1]`
//! (symmetric convention). Its volume is the sum of `|det|` over all
//! `n`-subsets of generators, scaled by `2^n` in the symmetric convention.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix, LdtSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Generators `A^k B`, `k = 0..N-1`.
    Reach,
    /// Generators `A^-k B`, `k = 1..N`.
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Input coefficients in `[0, 1]`.
    UnitCube,
    /// Input coefficients in `[-1, 1]`.
    Symmetric,
}

impl Convention {
    /// Factor converting a unit-cube volume in dimension `n` to this convention.
    pub fn volume_factor(self, n: usize) -> f64 {
        match self {
            Convention::UnitCube => 1.0,
            Convention::Symmetric => 2f64.powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    dim: usize,
    generators: Vec<Vec<f64>>,
    horizon: usize,
    kind: RegionKind,
    convention: Convention,
}

impl Zonotope {
    pub fn new(
        generators: Vec<Vec<f64>>,
        horizon: usize,
        kind: RegionKind,
        convention: Convention,
    ) -> Result<Self> {
        let dim = generators.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::DimensionMismatch("zonotope needs generators".into()));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch(
                "generators of unequal length".into(),
            ));
        }
        if generators.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            dim,
            generators,
            horizon,
            kind,
            convention,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Same generators, different coefficient convention.
    pub fn with_convention(&self, convention: Convention) -> Self {
        Self {
            convention,
            ..self.clone()
        }
    }

    /// Generator matrix with one column per generator.
    pub fn generator_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_columns(&self.generators).expect("validated generators")
    }
}

/// Generators of `R^d_N` (reach) or `R^c_N` (control) in the unit-cube
/// convention.
pub fn build_generators(sys: &LdtSystem, horizon: usize, kind: RegionKind) -> Result<Zonotope> {
    build_generators_with(sys, horizon, kind, Convention::UnitCube)
}

pub fn build_generators_with(
    sys: &LdtSystem,
    horizon: usize,
    kind: RegionKind,
    convention: Convention,
) -> Result<Zonotope> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be >= 1".into()));
    }
    let step = match kind {
        RegionKind::Reach => sys.a().clone(),
        RegionKind::Control => sys.a().inverse()?,
    };
    let mut current = match kind {
        RegionKind::Reach => sys.b().clone(),
        RegionKind::Control => step.matmul(sys.b())?,
    };
    let mut generators = Vec::with_capacity(horizon * sys.r());
    for k in 0..horizon {
        if k > 0 {
            current = step.matmul(&current)?;
        }
        for j in 0..sys.r() {
            generators.push(current.col(j));
        }
    }
    Zonotope::new(generators, horizon, kind, convention)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Volume as the sum of `|det|` over all `n`-subsets of generators, times
/// `2^n` in the symmetric convention. Rank-deficient sets give zero.
pub fn oracle_volume(z: &Zonotope) -> Result<f64> {
    let n = z.dim;
    if z.generators.len() < n {
        return Err(Error::DimensionMismatch(format!(
            "{} generators cannot span dimension {n}",
            z.generators.len()
        )));
    }
    Ok(subset_determinant_sum(&z.generators, n) * z.convention.volume_factor(n))
}

/// `sum_{k1 < ... < kn} |det [g_k1 ... g_kn]|`.
///
/// Combinations are walked in lexicographic order. The range of the first
/// index is split across threads; for every prefix of `n - 1` columns the
/// cofactor vector is formed once and dotted with each admissible last column.
pub fn subset_determinant_sum(gens: &[Vec<f64>], n: usize) -> f64 {
    let m = gens.len();
    if n == 0 || m < n {
        return 0.0;
    }
    if n == 1 {
        let mut acc = CompensatedSum::default();
        for g in gens {
            acc.add(g[0].abs());
        }
        return acc.value();
    }
    let partials: Vec<f64> = (0..=m - n)
        .into_par_iter()
        .map(|first| {
            let mut acc = CompensatedSum::default();
            let mut prefix = Vec::with_capacity(n - 1);
            prefix.push(first);
            let mut scratch = Scratch::new(n);
            walk_prefixes(gens, n, &mut prefix, &mut scratch, &mut acc);
            acc.value()
        })
        .collect();
    let mut total = CompensatedSum::default();
    for p in partials {
        total.add(p);
    }
    total.value()
}

struct Scratch {
    minor: Vec<f64>,
    cofactor: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            minor: vec![0.0; (n - 1) * (n - 1)],
            cofactor: vec![0.0; n],
        }
    }
}

fn walk_prefixes(
    gens: &[Vec<f64>],
    n: usize,
    prefix: &mut Vec<usize>,
    scratch: &mut Scratch,
    acc: &mut CompensatedSum,
) {
    let m = gens.len();
    let last = *prefix.last().expect("non-empty prefix");
    if prefix.len() == n - 1 {
        cofactors(gens, prefix, scratch);
        for g in &gens[last + 1..] {
            acc.add(dot(&scratch.cofactor, g).abs());
        }
        return;
    }
    let remaining = n - prefix.len();
    for next in last + 1..=m - remaining {
        prefix.push(next);
        walk_prefixes(gens, n, prefix, scratch, acc);
        prefix.pop();
    }
}

/// Fills `scratch.cofactor` with `c` such that `det [g_p1 .. g_p(n-1) x] = c . x`.
fn cofactors(gens: &[Vec<f64>], prefix: &[usize], scratch: &mut Scratch) {
    let n = prefix.len() + 1;
    let k = n - 1;
    for skip in 0..n {
        let rows = (0..n).filter(|&row| row != skip);
        for (r, row) in rows.enumerate() {
            for (c, &g) in prefix.iter().enumerate() {
                scratch.minor[r * k + c] = gens[g][row];
            }
        }
        let sign = if (skip + n - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        scratch.cofactor[skip] = sign * small_det(&mut scratch.minor, k);
    }
}

/// Determinant of a `k x k` row-major matrix by partial-pivot elimination.
/// Overwrites `m`.
fn small_det(m: &mut [f64], k: usize) -> f64 {
    match k {
        1 => return m[0],
        2 => return m[0] * m[3] - m[1] * m[2],
        _ => {}
    }
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a * k + col].abs().total_cmp(&m[b * k + col].abs()))
            .unwrap();
        if m[pivot * k + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                m.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det *= p;
        for row in col + 1..k {
            let f = m[row * k + col] / p;
            if f != 0.0 {
                for j in col..k {
                    m[row * k + j] -= f * m[col * k + j];
                }
            }
        }
    }
    det
}

/// Closed polygon, counterclockwise, with the closing edge implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    pub vertices: Vec<[f64; 2]>,
}

/// Relative cross-product threshold under which two generators count as
/// parallel.
const PARALLEL_TOL: f64 = 1e-12;

/// Boundary of the symmetric-convention zonotope `sum c_k g_k, c_k in [-1, 1]`.
///
/// Generators are flipped into the upper half-plane, parallel ones merged,
/// and the rest sorted by angle. The walk starts at the vertex `sum g_k` and
/// traverses `-2 g_1, ..., -2 g_m, 2 g_1, ..., 2 g_m`.
pub fn polygon_2d(z: &Zonotope) -> Result<Polygon2D> {
    if z.dim != 2 {
        return Err(Error::DimensionUnsupported { n: z.dim });
    }
    let mut dirs: Vec<[f64; 2]> = z
        .generators
        .iter()
        .filter(|g| g[0] != 0.0 || g[1] != 0.0)
        .map(|g| {
            if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
                [-g[0], -g[1]]
            } else {
                [g[0], g[1]]
            }
        })
        .collect();
    dirs.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));

    let mut merged: Vec<[f64; 2]> = Vec::with_capacity(dirs.len());
    for d in dirs {
        if let Some(prev) = merged.last_mut() {
            let cross = prev[0] * d[1] - prev[1] * d[0];
            let scale = prev[0].hypot(prev[1]) * d[0].hypot(d[1]);
            if cross.abs() <= PARALLEL_TOL * scale {
                prev[0] += d[0];
                prev[1] += d[1];
                continue;
            }
        }
        merged.push(d);
    }
    // The first and last direction may also be parallel (angles near 0 and pi).
    if merged.len() > 1 {
        let (f, l) = (merged[0], merged[merged.len() - 1]);
        let cross = f[0] * l[1] - f[1] * l[0];
        if cross.abs() <= PARALLEL_TOL * f[0].hypot(f[1]) * l[0].hypot(l[1]) {
            let l = merged.pop().unwrap();
            merged[0] = if f[0] * l[0] + f[1] * l[1] >= 0.0 {
                [f[0] + l[0], f[1] + l[1]]
            } else {
                [f[0] - l[0], f[1] - l[1]]
            };
        }
    }
    if merged.len() < 2 {
        return Err(Error::Degenerate);
    }

    let mut v = merged
        .iter()
        .fold([0.0, 0.0], |s, d| [s[0] + d[0], s[1] + d[1]]);
    let mut vertices = Vec::with_capacity(2 * merged.len());
    for sign in [-2.0, 2.0] {
        for d in &merged {
            vertices.push(v);
            v = [v[0] + sign * d[0], v[1] + sign * d[1]];
        }
    }
    Ok(Polygon2D { vertices })
}

/// Boundary of the region in the zonotope's own convention. For the
/// unit-cube convention this is the symmetric boundary halved and shifted by
/// half the generator sum.
pub fn region_polygon(z: &Zonotope) -> Result<Polygon2D> {
    let sym = polygon_2d(z)?;
    match z.convention {
        Convention::Symmetric => Ok(sym),
        Convention::UnitCube => {
            let s = z
                .generators
                .iter()
                .fold([0.0, 0.0], |s, g| [s[0] + g[0], s[1] + g[1]]);
            Ok(Polygon2D {
                vertices: sym
                    .vertices
                    .iter()
                    .map(|v| [0.5 * (v[0] + s[0]), 0.5 * (v[1] + s[1])])
                    .collect(),
            })
        }
    }
}

/// Shoelace area, always non-negative.
pub fn polygon_area(p: &Polygon2D) -> f64 {
    let n = p.vertices.len();
    let mut acc = CompensatedSum::default();
    for i in 0..n {
        let a = p.vertices[i];
        let b = p.vertices[(i + 1) % n];
        acc.add(a[0] * b[1] - a[1] * b[0]);
    }
    0.5 * acc.value().abs()
}

/// Half-widths of the box circumscribing the symmetric-convention zonotope
/// in the coordinates `P^-1 x`: component `i` is `sum_k |(P^-1 g_k)_i|`.
pub fn eigencoord_halfwidths(z: &Zonotope, p: &DenseMatrix) -> Result<Vec<f64>> {
    if p.rows() != z.dim || p.cols() != z.dim {
        return Err(Error::DimensionMismatch(format!(
            "P must be {0}x{0}",
            z.dim
        )));
    }
    let p_inv = p.inverse()?;
    let mut acc = vec![CompensatedSum::default(); z.dim];
    for g in &z.generators {
        for (a, c) in acc.iter_mut().zip(p_inv.matvec(g)?) {
            a.add(c.abs());
        }
    }
    Ok(acc.into_iter().map(CompensatedSum::value).collect())
}
