//! Line-oriented instance files.
//!
//! ```text
//! # comment
//! n 3
//! h 0 0.5
//! J 0 1 1
//! J 1 2 -2
//! ```
//!
//! `n` must precede any `h`/`J` line. The canonical form lists nonzero biases
//! then edges, both sorted by index, with shortest round-trip floats.

use std::fmt::Write as _;

use super::SpinInstance;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

pub fn parse_instance(text: &str) -> Result<SpinInstance> {
    let mut n: Option<usize> = None;
    let mut biases: Vec<Option<f64>> = Vec::new();
    let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap_or_default();
        match key {
            "n" => {
                if n.is_some() {
                    return Err(parse_err(line, "repeated `n` line"));
                }
                let value: usize = field(toks.next(), "qubit count", line)?;
                if value == 0 || value > 64 {
                    return Err(parse_err(line, format!("qubit count {value} outside 1..=64")));
                }
                n = Some(value);
                biases = vec![None; value];
            }
            "h" => {
                let size = n.ok_or_else(|| parse_err(line, "`h` before `n`"))?;
                let i: usize = field(toks.next(), "spin index", line)?;
                let h: f64 = field(toks.next(), "bias", line)?;
                if i >= size {
                    return Err(parse_err(line, format!("spin index {i} out of range for n = {size}")));
                }
                if !h.is_finite() {
                    return Err(parse_err(line, "non-finite bias"));
                }
                if biases[i].replace(h).is_some() {
                    return Err(parse_err(line, format!("duplicate bias for spin {i}")));
                }
            }
            "J" => {
                let size = n.ok_or_else(|| parse_err(line, "`J` before `n`"))?;
                let a: usize = field(toks.next(), "spin index", line)?;
                let b: usize = field(toks.next(), "spin index", line)?;
                let value: f64 = field(toks.next(), "coupling", line)?;
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                if j >= size {
                    return Err(parse_err(line, format!("spin index {j} out of range for n = {size}")));
                }
                if i == j {
                    return Err(parse_err(line, format!("self-coupling on spin {i}")));
                }
                if !value.is_finite() || value == 0.0 {
                    return Err(parse_err(line, format!("coupling must be finite and nonzero, got {value}")));
                }
                if edges.iter().any(|e| (e.0, e.1) == (i, j)) {
                    return Err(parse_err(line, format!("duplicate edge ({i}, {j})")));
                }
                edges.push((i, j, value, line));
            }
            other => return Err(parse_err(line, format!("unknown key {other:?}"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("unexpected trailing token {extra:?}")));
        }
    }

    let n = n.ok_or_else(|| parse_err(text.lines().count().max(1), "missing `n` line"))?;
    let biases = biases.into_iter().map(|h| h.unwrap_or(0.0)).collect();
    SpinInstance::with_biases(n, edges.into_iter().map(|(i, j, v, _)| (i, j, v)), biases)
        .map_err(|e| parse_err(0, e.to_string()))
}

pub fn serialize_instance(instance: &SpinInstance) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", instance.n()).unwrap();
    for (i, &h) in instance.biases().iter().enumerate() {
        if h != 0.0 {
            writeln!(out, "h {i} {h}").unwrap();
        }
    }
    for c in instance.couplings() {
        writeln!(out, "J {} {} {}", c.i, c.j, c.value).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_spin_ferromagnet() {
        let inst = parse_instance("n 2\nJ 0 1 1.0\n").unwrap();
        assert_eq!(inst, SpinInstance::new(2, [(0, 1, 1.0)]).unwrap());
    }

    #[test]
    fn canonical_form() {
        let text = "# demo\nn 3\nJ 2 1 -2.50\n  J 0 1 1.0 # ferro\nh 1 0.0\nh 2 0.25\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(serialize_instance(&inst), "n 3\nh 2 0.25\nJ 0 1 1\nJ 1 2 -2.5\n");
    }

    #[test]
    fn duplicate_edge_reports_line() {
        match parse_instance("n 2\nJ 0 1 1\nJ 0 1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_instance("n 2\nJ 0 1 1\nJ 1 0 2\n").is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "J 0 1 1\n",
            "n 2\nJ 0 2 1\n",
            "n 2\nJ 0 1\n",
            "n 2\nJ 0 1 x\n",
            "n 2\nK 0 1 1\n",
            "n 2\nn 2\n",
            "n 2\nh 5 1\n",
            "n 2\nJ 0 1 1 7\n",
            "n 2\nJ 0 1 0\n",
            "",
        ] {
            assert!(matches!(parse_instance(bad), Err(Error::Parse { .. })), "{bad:?}");
        }
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            n in 2usize..10,
            raw in proptest::collection::vec((0usize..10, 0usize..10, -8.0f64..8.0), 0..20),
            h in proptest::collection::vec(prop_oneof![Just(0.0), -3.0f64..3.0], 10),
        ) {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = raw.into_iter()
                .map(|(a, b, v)| (a % n, b % n, v))
                .filter(|&(a, b, v)| a != b && v != 0.0 && seen.insert((a.min(b), a.max(b))))
                .collect();
            let inst = SpinInstance::with_biases(n, edges, h[..n].to_vec()).unwrap();
            let text = serialize_instance(&inst);
            let back = parse_instance(&text).unwrap();
            prop_assert_eq!(&back, &inst);
            prop_assert_eq!(serialize_instance(&back), text);
        }
    }
}
