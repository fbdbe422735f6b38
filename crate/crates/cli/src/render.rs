/// Six decimals, or scientific when that would hide the leading digits.
pub fn fmt_num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

/// Left-aligned columns separated by two spaces, one line per row.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        format!("{}\n", padded.join("  ").trim_end())
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligns_columns() {
        let rows = vec![
            vec!["10".to_string(), "1.5".to_string()],
            vec!["1000".to_string(), "2".to_string()],
        ];
        assert_eq!(render_table(&["N", "x"], &rows), "N     x\n10    1.5\n1000  2\n");
        assert_eq!(fmt_num(2.0e-5), "2.0000e-5");
        assert_eq!(fmt_num(0.0), "0.000000");
    }
}
