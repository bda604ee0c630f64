//! CSV emission with shortest round-trip number formatting.

use std::io::{self, Write};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_header<W: Write>(w: &mut W, names: &[&str]) -> io::Result<()> {
    writeln!(w, "{}", names.join(","))
}

pub fn write_row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let fields: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    writeln!(w, "{}", fields.join(","))
}

/// Numeric fields followed by a trailing boolean column.
pub fn write_row_flag<W: Write>(w: &mut W, values: &[f64], flag: bool) -> io::Result<()> {
    let mut fields: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    fields.push(flag.to_string());
    writeln!(w, "{}", fields.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        let mut buf = Vec::new();
        write_row_flag(&mut buf, &[0.5, -2.0], false).unwrap();
        assert_eq!(buf, b"0.5,-2.0,false\n");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
