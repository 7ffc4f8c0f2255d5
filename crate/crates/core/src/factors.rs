//! Shape-factor decomposition of the analytic volume.
//!
//! * `f1`: eigenvalue evenness (shape) factor.
//! * `f2`: half-widths of the circumscribing box in eigen-coordinates.
//! * `f3`: modal controllability, `|q b|` per mode or `|q_{i,m_i} b|^m_i`
//!   per Jordan block.
//!
//! In the distinct case `V = |det P| * f1 * prod f2` exactly. In the Jordan
//! case the recursive half-widths do not multiply back to the volume; the
//! exact identity uses the last-row terms `(|q_{i,m_i} b| / (1 - l_i))^m_i`
//! instead, and both are reported.

use crate::error::{Error, Result};
use crate::matrix::LdtSystem;
use crate::spectral::{self, JordanBlock, JordanStructure};
use crate::volume::{
    check_blocks, check_unit_interval, cross_block_factor, distinct_terms, evenness_product,
    last_row_couplings, modal_coupling, within_block_factor, DistinctTerms,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorCase {
    Distinct,
    Jordan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFactors {
    pub f1: f64,
    /// Distinct: one entry per eigenvalue. Jordan: entries `(i, j)` flattened
    /// in block order, `j = 1..m_i`.
    pub f2: Vec<f64>,
    /// One entry per eigenvalue (distinct) or per block (Jordan).
    pub f3: Vec<f64>,
    pub case: FactorCase,
    /// False when the Jordan recursion mixed signs, so `f2` only bounds the
    /// box approximately.
    pub same_sign_ok: bool,
}

/// `|prod_{i<j} (l_j - l_i) / (1 - l_i l_j)|`.
pub fn f1_distinct(eigs: &[f64]) -> Result<f64> {
    for &l in eigs {
        check_unit_interval(l)?;
    }
    Ok(evenness_product(eigs).abs())
}

/// `|q_i b| / (1 - l_i)` per eigenvalue, plus a flag set when some `q_i b`
/// vanishes.
pub fn f2_distinct(sys: &LdtSystem) -> Result<(Vec<f64>, bool)> {
    let terms = distinct_terms(sys, spectral::DEFAULT_CLUSTER_TOL)?;
    Ok((f2_from_terms(&terms), terms.uncontrollable()))
}

fn f2_from_terms(terms: &DistinctTerms) -> Vec<f64> {
    terms
        .eigenvalues
        .iter()
        .zip(&terms.couplings)
        .map(|(l, qb)| qb.abs() / (1.0 - l))
        .collect()
}

/// Modal controllability for a resolved structure: `|q_i b|` for size-one
/// blocks, `|q_{i,m_i} b|^m_i` in general.
pub fn f3_modal(js: &JordanStructure, b: &[f64]) -> Result<Vec<f64>> {
    Ok(last_row_couplings(js, b)?
        .iter()
        .zip(js.blocks())
        .map(|(qb, blk)| qb.abs().powi(blk.size as i32))
        .collect())
}

/// `|prod_{i<j} ((l_i - l_j)/(1 - l_i l_j))^(m_i m_j)| * prod_i (1 - l_i^2)^-(m_i(m_i-1)/2)`.
pub fn f1_jordan(blocks: &[JordanBlock]) -> Result<f64> {
    for b in blocks {
        check_unit_interval(b.lambda)?;
    }
    Ok(cross_block_factor(blocks) * within_block_factor(blocks))
}

/// Recursive box half-widths for each Jordan block, computed backward from
/// the chain end: `S_m = q_m b / (1 - l)`, `S_j = (q_j b + S_{j+1}) / (1 - l)`,
/// `F_{2,i,j} = |S_j|`. The flag turns false when some `q_j b` and `S_{j+1}`
/// have opposite signs.
pub fn f2_jordan(js: &JordanStructure, b: &[f64]) -> Result<(Vec<f64>, bool)> {
    if b.len() != js.n() {
        return Err(Error::DimensionMismatch(format!(
            "b has length {}, expected {}",
            b.len(),
            js.n()
        )));
    }
    let mut out = Vec::with_capacity(js.n());
    let mut same_sign = true;
    for (i, blk) in js.blocks().iter().enumerate() {
        check_unit_interval(blk.lambda)?;
        let denom = 1.0 - blk.lambda;
        let mut signed = vec![0.0; blk.size];
        let mut next: Option<f64> = None;
        for j in (0..blk.size).rev() {
            let qb = modal_coupling(js.q().row(js.row_index(i, j)), b);
            let s = match next {
                None => qb / denom,
                Some(prev) => {
                    if qb * prev < 0.0 {
                        same_sign = false;
                    }
                    (qb + prev) / denom
                }
            };
            signed[j] = s;
            next = Some(s);
        }
        out.extend(signed.iter().map(|s| s.abs()));
    }
    Ok((out, same_sign))
}

/// Factors together with the exact-identity residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub factors: ShapeFactors,
    /// Analytic volume (unit-cube convention).
    pub volume: f64,
    pub det_p: f64,
    /// Distinct: `prod f2`. Jordan: `prod_i (|q_{i,m_i} b| / (1 - l_i))^m_i`.
    pub modal_product: f64,
    /// `|V/|det P| - f1 * modal_product| / (V/|det P|)`; zero when `V = 0`
    /// and the product vanishes too.
    pub residual: f64,
    /// `prod f2` for the Jordan case (differs from `modal_product` in general).
    pub box_product: f64,
    pub uncontrollable: bool,
}

/// Decomposes the analytic volume of a single-input system, detecting the
/// Jordan structure with the default cluster tolerance.
pub fn decompose(sys: &LdtSystem) -> Result<Decomposition> {
    let js = spectral::jordan_structure(sys.a(), spectral::DEFAULT_CLUSTER_TOL)?;
    decompose_with_structure(sys, &js)
}

pub fn decompose_with_structure(sys: &LdtSystem, js: &JordanStructure) -> Result<Decomposition> {
    let b = sys.input_vector()?;
    check_blocks(js.blocks())?;
    let det_p = js.p().det()?;
    if js.is_diagonalizable() {
        let terms = DistinctTerms::from_structure(js, &b)?;
        let volume = terms.volume();
        let f1 = f1_distinct(&terms.eigenvalues)?;
        let f2 = f2_from_terms(&terms);
        let f3 = terms.couplings.iter().map(|c| c.abs()).collect();
        let modal_product: f64 = f2.iter().product();
        let residual = identity_residual(volume / det_p.abs(), f1 * modal_product);
        return Ok(Decomposition {
            factors: ShapeFactors {
                f1,
                f2,
                f3,
                case: FactorCase::Distinct,
                same_sign_ok: true,
            },
            volume,
            det_p,
            box_product: modal_product,
            modal_product,
            residual,
            uncontrollable: terms.uncontrollable(),
        });
    }

    let volume = crate::volume::volume_jordan(js, sys.b())?;
    let f1 = f1_jordan(js.blocks())?;
    let (f2, same_sign_ok) = f2_jordan(js, &b)?;
    let f3 = f3_modal(js, &b)?;
    let couplings = last_row_couplings(js, &b)?;
    let modal_product: f64 = js
        .blocks()
        .iter()
        .zip(&couplings)
        .map(|(blk, qb)| (qb.abs() / (1.0 - blk.lambda)).powi(blk.size as i32))
        .product();
    let residual = identity_residual(volume / det_p.abs(), f1 * modal_product);
    Ok(Decomposition {
        factors: ShapeFactors {
            f1,
            f2: f2.clone(),
            f3,
            case: FactorCase::Jordan,
            same_sign_ok,
        },
        volume,
        det_p,
        modal_product,
        residual,
        box_product: f2.iter().product(),
        uncontrollable: couplings.contains(&0.0),
    })
}

fn identity_residual(v_eigen: f64, product: f64) -> f64 {
    if v_eigen == 0.0 {
        product.abs()
    } else {
        (v_eigen - product).abs() / v_eigen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    fn jordan_system(blocks: Vec<JordanBlock>, b: &[f64]) -> (LdtSystem, JordanStructure) {
        let (a, js) = JordanStructure::jordan_form(blocks).unwrap();
        (LdtSystem::single_input(a, b).unwrap(), js)
    }

    #[test]
    fn f1_caption_values() {
        assert!((f1_distinct(&[0.4, 0.9]).unwrap() - 0.7813).abs() < 1e-4);
        assert!((f1_distinct(&[0.85, 0.9]).unwrap() - 0.2128).abs() < 1e-4);
        assert_eq!(f1_distinct(&[0.9, 0.9]).unwrap(), 0.0);
        assert!(f1_distinct(&[0.9, 1.2]).is_err());
    }

    #[test]
    fn f2_distinct_examples() {
        let sys =
            LdtSystem::single_input(DenseMatrix::diag(&[0.4, 0.9]).unwrap(), &[1.0, 1.0]).unwrap();
        let (f2, unc) = f2_distinct(&sys).unwrap();
        assert!((f2[0] - 1.0 / 0.6).abs() < 1e-12 && (f2[1] - 10.0).abs() < 1e-12);
        assert!(!unc);

        let sys =
            LdtSystem::single_input(DenseMatrix::diag(&[0.4, 0.9]).unwrap(), &[1.0, 0.0]).unwrap();
        let (f2, unc) = f2_distinct(&sys).unwrap();
        assert!((f2[0] - 1.0 / 0.6).abs() < 1e-12 && f2[1] == 0.0);
        assert!(unc);
    }

    #[test]
    fn f3_examples() {
        let js =
            spectral::jordan_structure(&DenseMatrix::diag(&[0.4, 0.9]).unwrap(), 1e-8).unwrap();
        assert_eq!(f3_modal(&js, &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);

        let (_, js) = jordan_system(vec![JordanBlock::new(0.5, 2)], &[0.0, 1.0]);
        assert_eq!(f3_modal(&js, &[0.0, 1.0]).unwrap(), vec![1.0]);

        let (_, js) = jordan_system(
            vec![JordanBlock::new(0.3, 1), JordanBlock::new(0.6, 2)],
            &[1.0, 0.0, 0.0],
        );
        assert_eq!(f3_modal(&js, &[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn f1_jordan_examples() {
        assert!((f1_jordan(&[JordanBlock::new(0.5, 2)]).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        let v = f1_jordan(&[JordanBlock::new(0.3, 1), JordanBlock::new(0.6, 2)]).unwrap();
        assert!((v - 0.2091).abs() < 1e-4);
        let eigs = [0.2, 0.5, 0.7];
        let blocks: Vec<_> = eigs.iter().map(|&l| JordanBlock::new(l, 1)).collect();
        assert!((f1_jordan(&blocks).unwrap() - f1_distinct(&eigs).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn f2_jordan_examples() {
        let (_, js) = jordan_system(vec![JordanBlock::new(0.5, 2)], &[0.0, 1.0]);
        let (f2, ok) = f2_jordan(&js, &[0.0, 1.0]).unwrap();
        assert!((f2[0] - 4.0).abs() < 1e-14 && (f2[1] - 2.0).abs() < 1e-14);
        assert!(ok);

        let (_, js) = jordan_system(vec![JordanBlock::new(0.9, 2)], &[-0.7, 1.0]);
        let (_, ok) = f2_jordan(&js, &[-0.7, 1.0]).unwrap();
        assert!(!ok);

        // all-negative input keeps a consistent sign
        let (_, ok) = f2_jordan(&js, &[-0.7, -1.0]).unwrap();
        assert!(ok);

        let (_, js) = jordan_system(vec![JordanBlock::new(0.4, 1)], &[2.0]);
        let (f2, _) = f2_jordan(&js, &[2.0]).unwrap();
        assert!((f2[0] - 2.0 / 0.6).abs() < 1e-14);
    }

    #[test]
    fn decompose_distinct_identity() {
        let sys =
            LdtSystem::single_input(DenseMatrix::diag(&[0.4, 0.9]).unwrap(), &[1.0, 1.0]).unwrap();
        let d = decompose(&sys).unwrap();
        assert_eq!(d.factors.case, FactorCase::Distinct);
        assert!(d.residual <= 1e-12);
        assert!((d.volume - 13.0208).abs() < 1e-4);
    }

    #[test]
    fn decompose_jordan_identity() {
        let (sys, _) = jordan_system(vec![JordanBlock::new(0.5, 2)], &[0.0, 1.0]);
        let d = decompose(&sys).unwrap();
        assert_eq!(d.factors.case, FactorCase::Jordan);
        assert!(d.residual <= 1e-12);
        assert!((d.modal_product - 4.0).abs() < 1e-14);
        // The box product is 4 * 2 = 8, twice V / f1 = 4.
        assert!((d.box_product - 8.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_uncontrollable() {
        let sys =
            LdtSystem::single_input(DenseMatrix::diag(&[0.4, 0.9]).unwrap(), &[0.0, 1.0]).unwrap();
        let d = decompose(&sys).unwrap();
        assert_eq!(d.volume, 0.0);
        assert!(d.uncontrollable);
        assert!(d.factors.f3.contains(&0.0));
        assert_eq!(d.residual, 0.0);
    }
}
