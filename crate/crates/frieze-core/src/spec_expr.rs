//! Textual grammar for set specifications.
//!
//! ```text
//! expr := residue(m; r1,r2,...) | ap(a; d) | explicit[n1,n2,...]
//!       | bernoulli(p; seed)    | primes   | pow2
//!       | file("path")
//!       | union(expr,expr) | inter(expr,expr) | diff(expr,expr)
//! ```
//!
//! Whitespace is ignored between tokens. `p` is an exact decimal or
//! fraction. Printing is canonical and `parse(print(s)) == s`.

use std::fmt;

use num_rational::Ratio;

use crate::error::Error;
use crate::set_model::SetSpec;

/// Parses a set expression. `file(...)` loads the bitmap eagerly, so this
/// can fail with i/o errors as well as syntax/semantic ones.
pub fn parse_spec(text: &str) -> Result<SetSpec, Error> {
    let mut p = Parser { text, pos: 0 };
    let spec = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(spec)
}

/// Canonical text form; inverse of [`parse_spec`] on the abstract spec.
pub fn spec_to_text(spec: &SetSpec) -> String {
    let mut s = String::new();
    write_spec(&mut s, spec);
    s
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&spec_to_text(self))
    }
}

fn write_spec(out: &mut String, spec: &SetSpec) {
    use std::fmt::Write;
    match spec {
        SetSpec::Explicit { elements } => {
            out.push_str("explicit[");
            for (idx, e) in elements.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                write!(out, "{e}").unwrap();
            }
            out.push(']');
        }
        SetSpec::ResidueClasses { modulus, residues } => {
            write!(out, "residue({modulus};").unwrap();
            for (idx, r) in residues.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                write!(out, "{r}").unwrap();
            }
            out.push(')');
        }
        SetSpec::ArithmeticProgression { anchor, difference } => {
            write!(out, "ap({anchor};{difference})").unwrap();
        }
        SetSpec::Union(a, b) => {
            out.push_str("union(");
            write_spec(out, a);
            out.push(',');
            write_spec(out, b);
            out.push(')');
        }
        SetSpec::Intersection(a, b) => {
            out.push_str("inter(");
            write_spec(out, a);
            out.push(',');
            write_spec(out, b);
            out.push(')');
        }
        SetSpec::Difference(a, b) => {
            out.push_str("diff(");
            write_spec(out, a);
            out.push(',');
            write_spec(out, b);
            out.push(')');
        }
        SetSpec::Bernoulli { prob, seed } => {
            write!(out, "bernoulli({}/{};{seed})", prob.numer(), prob.denom()).unwrap();
        }
        SetSpec::Primes => out.push_str("primes"),
        SetSpec::PowersOfTwo => out.push_str("pow2"),
        SetSpec::Bitmap { path, .. } => {
            write!(out, "file(\"{path}\")").unwrap();
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), Error> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{}`", c as char))),
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let bytes = self.text.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        self.text[start..self.pos].to_string()
    }

    /// A contiguous numeric token: digits with optional sign, `.`, `/`.
    fn number_token(&mut self) -> Result<String, Error> {
        self.skip_ws();
        let bytes = self.text.as_bytes();
        let start = self.pos;
        if self.pos < bytes.len() && (bytes[self.pos] == b'-' || bytes[self.pos] == b'+') {
            self.pos += 1;
        }
        while self.pos < bytes.len()
            && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.' || bytes[self.pos] == b'/')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn int_i64(&mut self) -> Result<i64, Error> {
        let start = self.pos;
        let tok = self.number_token()?;
        tok.parse::<i64>().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("invalid integer `{tok}`"),
        })
    }

    fn int_u64(&mut self) -> Result<u64, Error> {
        let start = self.pos;
        let tok = self.number_token()?;
        tok.parse::<u64>().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("invalid non-negative integer `{tok}`"),
        })
    }

    fn rational_u64(&mut self) -> Result<Ratio<u64>, Error> {
        let start = self.pos;
        let tok = self.number_token()?;
        let parsed = crate::rat::parse::<i128>(&tok).map_err(|_| Error::Parse {
            pos: start,
            msg: format!("invalid rational `{tok}`"),
        })?;
        let num = u64::try_from(*parsed.numer()).map_err(|_| Error::Parse {
            pos: start,
            msg: "probability must be non-negative".into(),
        })?;
        let den = u64::try_from(*parsed.denom()).map_err(|_| Error::Parse {
            pos: start,
            msg: "probability denominator too large".into(),
        })?;
        Ok(Ratio::new(num, den))
    }

    fn string_literal(&mut self) -> Result<String, Error> {
        self.expect(b'"')?;
        let bytes = self.text.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && bytes[self.pos] != b'"' {
            self.pos += 1;
        }
        if self.pos == bytes.len() {
            return Err(self.err("unterminated string"));
        }
        let s = self.text[start..self.pos].to_string();
        self.pos += 1; // closing quote
        Ok(s)
    }

    fn expr(&mut self) -> Result<SetSpec, Error> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident();
        match name.as_str() {
            "residue" => {
                self.expect(b'(')?;
                let modulus = self.int_u64()?;
                self.expect(b';')?;
                let mut residues = vec![self.int_u64()?];
                while self.peek() == Some(b',') {
                    self.pos += 1;
                    residues.push(self.int_u64()?);
                }
                self.expect(b')')?;
                SetSpec::residues(modulus, residues)
            }
            "ap" => {
                self.expect(b'(')?;
                let anchor = self.int_i64()?;
                self.expect(b';')?;
                let difference = self.int_u64()?;
                self.expect(b')')?;
                SetSpec::progression(anchor, difference)
            }
            "explicit" => {
                self.expect(b'[')?;
                let mut elements = Vec::new();
                if self.peek() != Some(b']') {
                    elements.push(self.int_i64()?);
                    while self.peek() == Some(b',') {
                        self.pos += 1;
                        elements.push(self.int_i64()?);
                    }
                }
                self.expect(b']')?;
                SetSpec::explicit(elements)
            }
            "bernoulli" => {
                self.expect(b'(')?;
                let prob = self.rational_u64()?;
                self.expect(b';')?;
                let seed = self.int_u64()?;
                self.expect(b')')?;
                SetSpec::bernoulli(prob, seed)
            }
            "primes" => Ok(SetSpec::Primes),
            "pow2" => Ok(SetSpec::PowersOfTwo),
            "file" => {
                self.expect(b'(')?;
                let path = self.string_literal()?;
                self.expect(b')')?;
                SetSpec::bitmap_from_file(&path)
            }
            "union" | "inter" | "diff" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(match name.as_str() {
                    "union" => SetSpec::union(a, b),
                    "inter" => SetSpec::intersection(a, b),
                    _ => SetSpec::difference(a, b),
                })
            }
            "" => Err(Error::Parse {
                pos: at,
                msg: "expected a set expression".into(),
            }),
            other => Err(Error::Parse {
                pos: at,
                msg: format!("unknown set constructor `{other}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_the_evens() {
        let spec = parse_spec("residue(2;0)").unwrap();
        assert_eq!(spec, SetSpec::residues(2, vec![0]).unwrap());
        assert!(spec.contains(4));
    }

    #[test]
    fn parses_empty_explicit() {
        let spec = parse_spec("explicit[]").unwrap();
        assert!(!spec.contains(0));
    }

    #[test]
    fn parses_nested_booleans() {
        let spec = parse_spec("union(residue(4;0),residue(4;1))").unwrap();
        assert!(spec.contains(0) && spec.contains(1) && spec.contains(4) && spec.contains(5));
        assert!(!spec.contains(2) && !spec.contains(3));
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse_spec("union( residue( 4 ; 0 , 1 ) , explicit [ -3 , 7 ] )").unwrap();
        let b = parse_spec("union(residue(4;0,1),explicit[-3,7])").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_spec("residue(2:0)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_spec("blah"), Err(Error::Parse { .. })));
        assert!(matches!(parse_spec(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_spec("primes junk"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn semantic_errors_are_reported() {
        assert!(parse_spec("residue(4;5)").is_err());
        assert!(parse_spec("bernoulli(3/2;1)").is_err());
        assert!(parse_spec("explicit[5,1]").is_err());
        assert!(parse_spec("ap(3;0)").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        for text in [
            "residue(2;0)",
            "ap(-3;7)",
            "explicit[-5,0,12]",
            "bernoulli(3/10;42)",
            "primes",
            "pow2",
            "diff(union(residue(2;0),primes),inter(pow2,explicit[1,2]))",
        ] {
            let spec = parse_spec(text).unwrap();
            let printed = spec_to_text(&spec);
            let again = parse_spec(&printed).unwrap();
            assert_eq!(spec, again, "round trip through {printed}");
        }
    }

    fn leaf() -> impl Strategy<Value = SetSpec> {
        prop_oneof![
            Just(SetSpec::Primes),
            Just(SetSpec::PowersOfTwo),
            prop::collection::btree_set(-100i64..100, 0..6)
                .prop_map(|s| SetSpec::explicit(s.into_iter().collect()).unwrap()),
            (1u64..12).prop_flat_map(|m| {
                prop::collection::btree_set(0..m, 1..=(m as usize))
                    .prop_map(move |rs| SetSpec::residues(m, rs.into_iter().collect()).unwrap())
            }),
            (-50i64..50, 1u64..10)
                .prop_map(|(a, d)| SetSpec::progression(a, d).unwrap()),
            (0u64..=10, 1u64..=10, any::<u64>()).prop_map(|(n, d, seed)| {
                let num = n.min(d);
                SetSpec::bernoulli(Ratio::new(num, d), seed).unwrap()
            }),
        ]
    }

    fn spec_tree() -> impl Strategy<Value = SetSpec> {
        leaf().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SetSpec::union(a, b)),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| SetSpec::intersection(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| SetSpec::difference(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_is_identity(spec in spec_tree()) {
            let printed = spec_to_text(&spec);
            let parsed = parse_spec(&printed).unwrap();
            prop_assert_eq!(spec, parsed);
        }

        #[test]
        fn boolean_algebra_is_pointwise(a in spec_tree(), b in spec_tree(), i in -1000i64..1000) {
            prop_assert_eq!(
                SetSpec::union(a.clone(), b.clone()).contains(i),
                a.contains(i) || b.contains(i)
            );
            prop_assert_eq!(
                SetSpec::intersection(a.clone(), b.clone()).contains(i),
                a.contains(i) && b.contains(i)
            );
            prop_assert_eq!(
                SetSpec::difference(a.clone(), b.clone()).contains(i),
                a.contains(i) && !b.contains(i)
            );
        }
    }
}
