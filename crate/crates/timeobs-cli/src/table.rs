//! Bit-exact CSV result tables.
//!
//! Every command serializes its numbers into a [`ResultTable`]: a title
//! line, a units line, one column-name row, data rows of reals printed
//! with 17 significant digits, optional per-row comment lines, and footer
//! metadata lines.  Serialization is deterministic and round-trips
//! losslessly through [`ResultTable::parse`], so archived outputs can be
//! compared byte for byte.

use std::fmt::Write as _;

/// Rectangular table of named real columns with comment and footer
/// metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    title: String,
    hbar: f64,
    mass: f64,
    columns: Vec<String>,
    rows: Vec<Row>,
    footer: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    comment: Option<String>,
    values: Vec<f64>,
}

impl ResultTable {
    /// Empty table with a title, the units it was computed in, and its
    /// column names.
    pub fn new(title: &str, hbar: f64, mass: f64, columns: &[&str]) -> Self {
        ResultTable {
            title: title.to_string(),
            hbar,
            mass,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    /// Appends a data row; the width must match the column count.
    pub fn push_row(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width mismatch");
        self.rows.push(Row {
            comment: None,
            values,
        });
    }

    /// Appends a data row preceded by a `#`-prefixed comment line.
    pub fn push_commented_row(&mut self, comment: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width mismatch");
        self.rows.push(Row {
            comment: Some(comment.to_string()),
            values,
        });
    }

    /// Appends a footer metadata entry, serialized as `# key=value`.
    pub fn push_footer(&mut self, key: &str, value: f64) {
        self.footer.push((key.to_string(), value));
    }

    /// Serializes the table; the output always ends with a newline.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", self.title).unwrap();
        writeln!(
            out,
            "# units: hbar={}, mass={}",
            format_real(self.hbar),
            format_real(self.mass)
        )
        .unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            if let Some(comment) = &row.comment {
                writeln!(out, "#{comment}").unwrap();
            }
            let cells: Vec<String> = row.values.iter().map(|&v| format_real(v)).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        for (key, value) in &self.footer {
            writeln!(out, "# {key}={}", format_real(*value)).unwrap();
        }
        out
    }

    /// Parses a serialized table back; the inverse of [`Self::to_csv`].
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let title = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or("missing title line")?
            .to_string();
        let units_line = lines
            .next()
            .and_then(|l| l.strip_prefix("# units: "))
            .ok_or("missing units line")?;
        let (hbar_part, mass_part) = units_line.split_once(", ").ok_or("malformed units line")?;
        let hbar = parse_real(
            hbar_part
                .strip_prefix("hbar=")
                .ok_or("units line lacks hbar")?,
        )?;
        let mass = parse_real(
            mass_part
                .strip_prefix("mass=")
                .ok_or("units line lacks mass")?,
        )?;
        let columns: Vec<String> = lines
            .next()
            .ok_or("missing column row")?
            .split(',')
            .map(|c| c.to_string())
            .collect();

        let mut rows = Vec::new();
        let mut footer = Vec::new();
        let mut pending: Option<String> = None;
        for line in lines {
            if let Some(rest) = line.strip_prefix('#') {
                if pending.is_some() {
                    // Two consecutive comment lines can only be footer
                    // entries, which never precede further data.
                    footer.push(parse_footer(pending.take().unwrap())?);
                }
                pending = Some(rest.to_string());
                continue;
            }
            let values = line
                .split(',')
                .map(parse_real)
                .collect::<Result<Vec<f64>, String>>()?;
            if values.len() != columns.len() {
                return Err(format!(
                    "row width {} does not match {} columns",
                    values.len(),
                    columns.len()
                ));
            }
            rows.push(Row {
                comment: pending.take(),
                values,
            });
        }
        if let Some(last) = pending.take() {
            footer.push(parse_footer(last)?);
        }
        Ok(ResultTable {
            title,
            hbar,
            mass,
            columns,
            rows,
            footer,
        })
    }
}

fn parse_footer(line: String) -> Result<(String, f64), String> {
    let body = line
        .strip_prefix(' ')
        .ok_or_else(|| format!("malformed footer line '#{line}'"))?;
    let (key, value) = body
        .split_once('=')
        .ok_or_else(|| format!("malformed footer line '#{line}'"))?;
    Ok((key.to_string(), parse_real(value)?))
}

/// Decimal form with 17 significant digits; NaN cells read "nan".
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    if s == "nan" {
        return Ok(f64::NAN);
    }
    s.parse::<f64>()
        .map_err(|e| format!("invalid real '{s}': {e}"))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("timeobs sample", 1.0, 1.0, &["x", "y"]);
        t.push_row(vec![-4.0e1, 9.0140541077465993e-8]);
        t.push_commented_row("singular", vec![0.1, f64::NAN]);
        t.push_row(vec![1.0 / 3.0, -0.0]);
        t.push_footer("T", 0.2);
        t.push_footer("R", 0.8);
        t
    }

    #[test]
    fn roundtrip_is_lossless() {
        let table = sample();
        let text = table.to_csv();
        let back = ResultTable::parse(&text).unwrap();
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn seventeen_digit_cells_recover_every_bit() {
        for &x in &[
            1.0 / 3.0,
            9.0140541077465993e-8,
            -0.49999995492972946,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let printed = format_real(x);
            assert_eq!(printed.parse::<f64>().unwrap(), x, "{printed}");
        }
        assert_eq!(format_real(f64::NAN), "nan");
    }

    #[test]
    fn comments_attach_to_their_rows() {
        let table = sample();
        let back = ResultTable::parse(&table.to_csv()).unwrap();
        assert_eq!(back.rows[1].comment.as_deref(), Some("singular"));
        assert!(back.rows[1].values[1].is_nan());
        assert_eq!(back.footer.len(), 2);
        assert_eq!(back.footer[0].0, "T");
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(ResultTable::parse("").is_err());
        assert!(ResultTable::parse("# t\n# units: hbar=1, mass=1\na,b\n1.0\n").is_err());
        assert!(ResultTable::parse("# t\n# units: hbar=1\na\n").is_err());
    }
}
