//! Plain-text term lists, one term per line:
//!
//! ```text
//! coeff_re coeff_im | create_f: i.. | annih_f: k.. | create_b: j.. | annih_b: l..
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::GammaOp;

pub fn format_terms(terms: &[(Complex64, GammaOp)]) -> String {
    let mut out = String::new();
    for (c, op) in terms {
        writeln!(out, "{:.16e} {:.16e} | {op}", c.re, c.im).unwrap();
    }
    out
}

fn parse_indices(field: &str, label: &str, line: usize) -> Result<Vec<usize>> {
    let rest = field
        .trim()
        .strip_prefix(label)
        .and_then(|r| r.trim_start().strip_prefix(':'))
        .ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `{label}:` field, found `{}`", field.trim()),
        })?;
    rest.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("bad index `{tok}` in {label}: {e}"),
            })
        })
        .collect()
}

pub fn parse_terms(text: &str) -> Result<Vec<(Complex64, GammaOp)>> {
    let mut terms = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('|').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 5 `|`-separated fields, found {}", fields.len()),
            });
        }
        let coeff: Vec<f64> = fields[0]
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("bad coefficient `{t}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if coeff.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: "coefficient needs real and imaginary parts".into(),
            });
        }
        let op = GammaOp::new(
            parse_indices(fields[1], "create_f", line)?,
            parse_indices(fields[2], "annih_f", line)?,
            parse_indices(fields[3], "create_b", line)?,
            parse_indices(fields[4], "annih_b", line)?,
        )
        .map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        terms.push((Complex64::new(coeff[0], coeff[1]), op));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_tavis_cummings, TcParams};
    use proptest::prelude::*;

    #[test]
    fn parses_documented_layout() {
        let text = "# comment\n\n2 0 | create_f: | annih_f: | create_b: 0 | annih_b: 0\n\
                    0.25 -0.5 | create_f: 3 | annih_f: 2 | create_b: | annih_b: 0\n";
        let terms = parse_terms(text).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(
            terms[0],
            (Complex64::new(2.0, 0.0), GammaOp::boson_number(0))
        );
        assert_eq!(terms[1].0, Complex64::new(0.25, -0.5));
        assert_eq!(
            terms[1].1,
            GammaOp::new(vec![3], vec![2], vec![], vec![0]).unwrap()
        );
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_terms("1 0 | create_f: | annih_f: | create_b: 0 | annih_b: 0\n1 0 | create_f: x | annih_f: | create_b: | annih_b:").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(
            parse_terms("1 | create_f: | annih_f: | create_b: | annih_b:"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_terms("1 0 | create_f: 1 1 | annih_f: | create_b: | annih_b:"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_terms("1 0 | annih_f: | create_f: | create_b: | annih_b:"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn tavis_cummings_round_trip() {
        let h = build_tavis_cummings(&TcParams {
            g_c: 0.7,
            ..TcParams::default()
        })
        .unwrap();
        let text = format_terms(h.terms());
        assert_eq!(parse_terms(&text).unwrap(), h.terms());
    }

    proptest! {
        #[test]
        fn coefficients_survive_text(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let terms = vec![(Complex64::new(re, im), GammaOp::fermion_number(1))];
            prop_assert_eq!(parse_terms(&format_terms(&terms)).unwrap(), terms);
        }
    }
}
