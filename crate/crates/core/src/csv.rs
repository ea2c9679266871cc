//! Minimal CSV emission for experiment artifacts: fixed header, one record
//! per line, floats printed with 17 significant digits.

use std::io::{self, Write};

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_header<W: Write>(out: &mut W, columns: &[String]) -> io::Result<()> {
    writeln!(out, "{}", columns.join(","))
}

pub fn write_record<W: Write>(out: &mut W, fields: &[String]) -> io::Result<()> {
    writeln!(out, "{}", fields.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, -1.0 / 3.0, 0.556_073_526_032_491, 1e-300, 0.0] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(0.5), "5.0000000000000000e-1");
    }
}
