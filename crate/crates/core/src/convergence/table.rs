use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::Error;

/// Errors below this absolute value are treated as round-off.
pub const DEFAULT_ROUNDOFF_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub l2: f64,
    pub energy: f64,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableMeta {
    pub test: String,
    pub family: String,
    pub degree: usize,
    pub beta: Option<f64>,
    pub partition: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub meta: TableMeta,
    pub rows: Vec<ConvergenceRow>,
    pub roundoff_floor: f64,
}

/// A convergence rate as displayed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Value(f64),
    /// Error at or below the round-off floor.
    Floor,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Value(v) => Some(v),
            Rate::Floor => None,
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Value(v) => write!(f, "{v:.1}"),
            Rate::Floor => f.write_str("---"),
        }
    }
}

/// `log2(prev / cur)` per level; the first level gets 0.0.
pub fn rates(errors: &[f64], floor: f64) -> Vec<Rate> {
    errors
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if e < floor || (i > 0 && errors[i - 1] < floor) {
                Rate::Floor
            } else if i == 0 {
                Rate::Value(0.0)
            } else {
                Rate::Value((errors[i - 1] / e).log2())
            }
        })
        .collect()
}

/// Scientific notation with a mantissa in [0.1, 1), e.g. `0.684E-01`.
pub fn format_sci(x: f64) -> String {
    if x == 0.0 {
        return "0.000E+00".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.2e}", x.abs());
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if x < 0.0 { "-" } else { "" };
    let e = exp + 1;
    let esign = if e < 0 { '-' } else { '+' };
    format!("{sign}0.{digits}E{esign}{:02}", e.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::Config(format!("unknown table format `{other}`"))),
        }
    }
}

impl ConvergenceTable {
    pub fn new(meta: TableMeta) -> Self {
        Self {
            meta,
            rows: Vec::new(),
            roundoff_floor: DEFAULT_ROUNDOFF_FLOOR,
        }
    }

    pub fn push(&mut self, row: ConvergenceRow) {
        self.rows.push(row);
    }

    pub fn l2_rates(&self) -> Vec<Rate> {
        rates(&self.rows.iter().map(|r| r.l2).collect::<Vec<_>>(), self.roundoff_floor)
    }

    pub fn energy_rates(&self) -> Vec<Rate> {
        rates(&self.rows.iter().map(|r| r.energy).collect::<Vec<_>>(), self.roundoff_floor)
    }

    pub fn emit(&self, format: TableFormat) -> String {
        let l2r = self.l2_rates();
        let enr = self.energy_rates();
        let iters = |r: &ConvergenceRow| r.iterations.map_or(String::new(), |n| n.to_string());
        let mut out = String::new();
        match format {
            TableFormat::Csv => {
                out.push_str("level,l2_err,l2_rate,energy_err,energy_rate,iters\n");
                for (i, r) in self.rows.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.level,
                        format_sci(r.l2),
                        l2r[i],
                        format_sci(r.energy),
                        enr[i],
                        iters(r)
                    );
                }
            }
            TableFormat::Markdown => {
                let m = &self.meta;
                let beta = m.beta.map_or(String::from("-"), |b| format!("{b}"));
                let _ = writeln!(
                    out,
                    "{} {} (k = {}), partition {}, beta = {}\n",
                    m.test, m.family, m.degree, m.partition, beta
                );
                out.push_str("| level | ‖Q0u−u0‖ | rate | ‖∇w(Qhu−uh)‖ | rate | # iteration |\n");
                out.push_str("|---|---|---|---|---|---|\n");
                for (i, r) in self.rows.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        r.level,
                        format_sci(r.l2),
                        l2r[i],
                        format_sci(r.energy),
                        enr[i],
                        iters(r)
                    );
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(0.0684), "0.684E-01");
        assert_eq!(format_sci(0.211), "0.211E+00");
        assert_eq!(format_sci(0.469e-8), "0.469E-08");
        assert_eq!(format_sci(1.0), "0.100E+01");
        assert_eq!(format_sci(0.99999), "0.100E+01");
        assert_eq!(format_sci(123.4), "0.123E+03");
    }

    #[test]
    fn rate_examples() {
        let r = rates(&[0.684e-1, 0.178e-1], DEFAULT_ROUNDOFF_FLOOR);
        assert_eq!(r[0].to_string(), "0.0");
        assert_eq!(r[1].to_string(), "1.9");
        let r = rates(&[0.5, 0.5], DEFAULT_ROUNDOFF_FLOOR);
        assert_eq!(r[1], Rate::Value(0.0));
        let r = rates(&[0.114e-6, 0.469e-8], DEFAULT_ROUNDOFF_FLOOR);
        assert_eq!(r[1].to_string(), "---");
    }

    #[test]
    fn emission() {
        let mut t = ConvergenceTable::new(TableMeta::default());
        assert_eq!(t.emit(TableFormat::Csv).lines().count(), 1);
        t.push(ConvergenceRow {
            level: 1,
            l2: 0.0684,
            energy: 0.211,
            iterations: Some(6),
        });
        let csv = t.emit(TableFormat::Csv);
        assert_eq!(csv.lines().nth(1).unwrap(), "1,0.684E-01,0.0,0.211E+00,0.0,6");
        let md = t.emit(TableFormat::Markdown);
        assert!(md.contains("| 1 | 0.684E-01 | 0.0 | 0.211E+00 | 0.0 | 6 |"));
    }
}
