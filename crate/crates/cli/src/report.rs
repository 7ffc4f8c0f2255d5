//! Assembles the analysis report shared by `analyze` and `factors`.

use ctlvol::factors::{decompose_with_structure, Decomposition};
use ctlvol::spectral::jordan_structure;
use ctlvol::volume::{controllability_report, inverse_pair, volume_with_structure};
use ctlvol::zonotope::{build_generators, oracle_volume};
use ctlvol::{Convention, Error, JordanBlock, JordanStructure, RegionKind, VolumeCase};
use serde_json::{Map, Value};

use crate::format::{opt_sig4, sig4, table};
use crate::system_file::{number, opt_number, LoadedSystem, SystemFile};
use crate::CliError;

/// Largest number of n-subsets the oracle is allowed to enumerate inside
/// `analyze`; beyond this the oracle is skipped with a warning.
pub const ORACLE_SUBSET_BUDGET: f64 = 2e8;

/// Eigenvalues closer than this (relative to the spectral spread, floored
/// at 1) trigger a near-repeated-spectrum warning.
pub const NEAR_REPEATED_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Warning {
    Uncontrollable,
    NearRepeatedSpectrum,
    SignMixedHalfWidths,
    OracleSkipped,
    ExplicitJordanIgnored,
}

impl Warning {
    pub fn as_str(self) -> &'static str {
        match self {
            Warning::Uncontrollable => "Uncontrollable",
            Warning::NearRepeatedSpectrum => "NearRepeatedSpectrum",
            Warning::SignMixedHalfWidths => "SignMixedHalfWidths",
            Warning::OracleSkipped => "OracleSkipped",
            Warning::ExplicitJordanIgnored => "ExplicitJordanIgnored",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    /// Oracle horizon; zero skips the oracle.
    pub horizon: usize,
    pub region: RegionKind,
    pub cluster_tol: f64,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub region: RegionKind,
    pub case: VolumeCase,
    pub n: usize,
    /// Spectrum of the matrix whose reach region was evaluated: `A` for the
    /// reach region, `A^-1` for the controllability region.
    pub blocks: Vec<JordanBlock>,
    pub analytic: f64,
    pub oracle: Option<f64>,
    pub horizon: usize,
    pub decomposition: Decomposition,
    pub warnings: Vec<Warning>,
    pub system: SystemFile,
}

pub fn region_name(kind: RegionKind) -> &'static str {
    match kind {
        RegionKind::Reach => "reach",
        RegionKind::Control => "control",
    }
}

/// Number of n-subsets of `m` generators, as a float to avoid overflow.
pub fn subset_count(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    (0..n).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

pub fn analyze(
    loaded: &LoadedSystem,
    file: &SystemFile,
    opts: AnalyzeOptions,
) -> Result<Analysis, CliError> {
    let sys = &loaded.system;
    if sys.r() != 1 {
        return Err(Error::MultiInputUnsupported { r: sys.r() }.into());
    }
    let mut warnings = Vec::new();

    let (analytic, case, uncontrollable, decomposition, js) = match opts.region {
        RegionKind::Reach => {
            let js = match &loaded.jordan {
                Some(js) => js.clone(),
                None => jordan_structure(sys.a(), opts.cluster_tol)?,
            };
            let report = volume_with_structure(sys, &js)?;
            let dec = decompose_with_structure(sys, &js)?;
            (report.analytic, report.case, report.uncontrollable, dec, js)
        }
        RegionKind::Control => {
            if loaded.jordan.is_some() {
                warnings.push(Warning::ExplicitJordanIgnored);
            }
            let report = controllability_report(sys, opts.cluster_tol)?;
            let inv = inverse_pair(sys)?;
            let js = jordan_structure(inv.a(), opts.cluster_tol)?;
            let dec = decompose_with_structure(&inv, &js)?;
            (report.analytic, report.case, report.uncontrollable, dec, js)
        }
    };

    if uncontrollable {
        warnings.push(Warning::Uncontrollable);
    }
    if near_repeated(&js) {
        warnings.push(Warning::NearRepeatedSpectrum);
    }
    if !decomposition.factors.same_sign_ok {
        warnings.push(Warning::SignMixedHalfWidths);
    }

    let n = sys.n();
    let oracle = if opts.horizon == 0 {
        None
    } else if subset_count(opts.horizon, n) > ORACLE_SUBSET_BUDGET {
        warnings.push(Warning::OracleSkipped);
        None
    } else {
        let z = build_generators(sys, opts.horizon, opts.region)?;
        Some(oracle_volume(&z)?)
    };

    Ok(Analysis {
        region: opts.region,
        case,
        n,
        blocks: js.blocks().to_vec(),
        analytic,
        oracle,
        horizon: opts.horizon,
        decomposition,
        warnings,
        system: file.clone(),
    })
}

fn near_repeated(js: &JordanStructure) -> bool {
    let mut l: Vec<f64> = js.blocks().iter().map(|b| b.lambda).collect();
    if l.len() < 2 {
        return false;
    }
    l.sort_by(f64::total_cmp);
    let spread = (l[l.len() - 1] - l[0]).max(1.0);
    l.windows(2)
        .any(|w| w[1] - w[0] < NEAR_REPEATED_TOL * spread)
}

impl Analysis {
    pub fn analytic_symmetric(&self) -> f64 {
        Convention::Symmetric.volume_factor(self.n) * self.analytic
    }

    pub fn rel_gap(&self) -> Option<f64> {
        let o = self.oracle?;
        if self.analytic == 0.0 {
            return Some(if o == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some((self.analytic - o).abs() / self.analytic.abs())
    }

    pub fn factors_value(&self) -> Value {
        let d = &self.decomposition;
        let f = &d.factors;
        let mut m = Map::new();
        m.insert("f1".into(), number(f.f1));
        m.insert(
            "f2".into(),
            Value::Array(f.f2.iter().map(|&x| number(x)).collect()),
        );
        m.insert(
            "f3".into(),
            Value::Array(f.f3.iter().map(|&x| number(x)).collect()),
        );
        m.insert("same_sign_ok".into(), Value::Bool(f.same_sign_ok));
        m.insert("det_p".into(), number(d.det_p));
        m.insert("modal_product".into(), number(d.modal_product));
        m.insert("box_product".into(), number(d.box_product));
        m.insert("residual".into(), number(d.residual));
        Value::Object(m)
    }

    pub fn to_json(&self) -> Value {
        let mut vol = Map::new();
        vol.insert("analytic_unit".into(), number(self.analytic));
        vol.insert(
            "analytic_symmetric".into(),
            number(self.analytic_symmetric()),
        );
        vol.insert("oracle".into(), opt_number(self.oracle));
        vol.insert("horizon".into(), Value::from(self.horizon));
        vol.insert("rel_gap".into(), opt_number(self.rel_gap()));

        let spectrum = self
            .blocks
            .iter()
            .map(|b| {
                let mut m = Map::new();
                m.insert("lambda".into(), number(b.lambda));
                m.insert("size".into(), Value::from(b.size));
                Value::Object(m)
            })
            .collect();

        let mut root = Map::new();
        root.insert("case".into(), Value::from(self.case.as_str()));
        root.insert("region".into(), Value::from(region_name(self.region)));
        root.insert("n".into(), Value::from(self.n));
        root.insert("spectrum".into(), Value::Array(spectrum));
        root.insert("volume".into(), Value::Object(vol));
        root.insert("factors".into(), self.factors_value());
        root.insert(
            "warnings".into(),
            Value::Array(
                self.warnings
                    .iter()
                    .map(|w| Value::from(w.as_str()))
                    .collect(),
            ),
        );
        root.insert("system".into(), self.system.to_value());
        Value::Object(root)
    }

    pub fn to_table(&self) -> String {
        let mut rows = vec![
            kv("case", self.case.as_str().into()),
            kv("region", region_name(self.region).into()),
            kv("n", self.n.to_string()),
            kv(
                "spectrum",
                self.blocks
                    .iter()
                    .map(|b| format!("{}^{}", sig4(b.lambda), b.size))
                    .collect::<Vec<_>>()
                    .join(" "),
            ),
            kv("volume (unit cube)", sig4(self.analytic)),
            kv("volume (symmetric)", sig4(self.analytic_symmetric())),
            kv(
                &format!("oracle (N={})", self.horizon),
                opt_sig4(self.oracle),
            ),
            kv("relative gap", opt_sig4(self.rel_gap())),
        ];
        rows.extend(self.factor_rows());
        let warnings = if self.warnings.is_empty() {
            "none".to_string()
        } else {
            self.warnings
                .iter()
                .map(|w| w.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        rows.push(kv("warnings", warnings));
        table(&["quantity", "value"], &rows)
    }

    pub fn factors_table(&self) -> String {
        table(&["factor", "value"], &self.factor_rows())
    }

    fn factor_rows(&self) -> Vec<Vec<String>> {
        let d = &self.decomposition;
        let f = &d.factors;
        let list = |xs: &[f64]| xs.iter().map(|&x| sig4(x)).collect::<Vec<_>>().join(" ");
        vec![
            kv("f1", sig4(f.f1)),
            kv("f2", list(&f.f2)),
            kv("f3", list(&f.f3)),
            kv("same_sign_ok", f.same_sign_ok.to_string()),
            kv("det P", sig4(d.det_p)),
            kv("modal product", sig4(d.modal_product)),
            kv("box product", sig4(d.box_product)),
            kv("residual", sig4(d.residual)),
        ]
    }
}

fn kv(k: &str, v: String) -> Vec<String> {
    vec![k.to_string(), v]
}
