//! CSV tables with a fixed float format.

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(g12).unwrap_or_default()
}

/// A table rendered as CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for row in &self.rows {
            w.write_record(row).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(0.381966011250105), "0.38196601125");
        assert_eq!(g12(1.0827420941775), "1.08274209418");
        assert_eq!(g12(-0.25), "-0.25");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(1e12), "1e+12");
        assert_eq!(g12(1.5e-7), "1.5e-07");
        assert_eq!(g12(0.0001), "0.0001");
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(f64::NAN), "nan");
        // rounding that bumps the exponent
        assert_eq!(g12(9.9999999999999e-6), "1e-05");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["quantity", "value"]);
        t.push(["mean[a=1,c=2]", "0.5"]);
        t.push(["a·b", "1"]);
        assert_eq!(t.to_csv(), "quantity,value\n\"mean[a=1,c=2]\",0.5\na·b,1\n");
    }
}
