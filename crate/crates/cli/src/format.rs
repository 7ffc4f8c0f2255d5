//! Text formatting: four significant digits for tables, seventeen for
//! machine-readable output (see [`crate::system_file::fmt17`]).

/// Rounds to four significant digits, switching to scientific notation for
/// very large or very small magnitudes.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn opt_sig4(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), sig4)
}

/// Renders rows as a left-aligned plain-text table with a header rule.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let mut out = line(header);
    out.push('\n');
    out.push_str(&line(&rule.iter().map(String::as_str).collect::<Vec<_>>()));
    out.push('\n');
    for row in rows {
        out.push_str(&line(&row.iter().map(String::as_str).collect::<Vec<_>>()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(13.020833), "13.02");
        assert_eq!(sig4(0.78127), "0.7813");
        assert_eq!(sig4(526.31578), "526.3");
        assert_eq!(sig4(1234.6), "1235");
        assert_eq!(sig4(-0.095238), "-0.09524");
        assert_eq!(sig4(2.5e-9), "2.500e-9");
        assert_eq!(sig4(0.0), "0");
    }

    #[test]
    fn table_aligns_columns() {
        let t = table(&["N", "gap"], &[vec!["10".into(), "0.5".into()]]);
        assert_eq!(t, "N   gap\n--  ---\n10  0.5\n");
    }
}
