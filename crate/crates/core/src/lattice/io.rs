//! The `.lat` text format: rank, then the Gram rows. `#` starts a comment.

use std::path::Path;

use num_bigint::BigInt;

use super::Lattice;
use crate::error::{Error, Result};
use crate::exact::IntMatrix;

pub fn parse_lat(text: &str) -> Result<Lattice> {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        tokens.extend(content.split_whitespace().map(|t| (lineno + 1, t)));
    }
    let mut it = tokens.into_iter();
    let (line, first) = it.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input, expected the rank".into(),
    })?;
    let n: usize = first.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("rank {first:?} is not a nonnegative integer"),
    })?;
    let mut entries = Vec::with_capacity(n * n);
    let mut last_line = line;
    for k in 0..n * n {
        let (line, tok) = it.next().ok_or(Error::Parse {
            line: last_line,
            msg: format!("expected {} Gram entries, found {k}", n * n),
        })?;
        last_line = line;
        let v: BigInt = tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("{tok:?} is not an integer"),
        })?;
        entries.push(v);
    }
    if let Some((line, tok)) = it.next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected trailing token {tok:?}"),
        });
    }
    let gram = IntMatrix::new(n, n, entries)?;
    Lattice::new(gram)
}

pub fn to_lat_string(l: &Lattice) -> String {
    let n = l.rank();
    let mut s = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = l.gram().row(i).iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_lat(path: impl AsRef<Path>) -> Result<Lattice> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut l = parse_lat(&text)?;
    if let Some(stem) = path.as_ref().file_stem().and_then(|s| s.to_str()) {
        l = l.with_label(stem);
    }
    Ok(l)
}

pub fn write_lat(path: impl AsRef<Path>, l: &Lattice) -> Result<()> {
    std::fs::write(path, to_lat_string(l))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::lattice_e;

    #[test]
    fn round_trip() {
        let e8 = lattice_e(8).unwrap();
        let s = to_lat_string(&e8);
        assert_eq!(parse_lat(&s).unwrap().gram(), e8.gram());
    }

    #[test]
    fn comments_and_errors() {
        let l = parse_lat("# A2\n2\n2 -1 # first row\n-1 2\n").unwrap();
        assert_eq!(l.det(), BigInt::from(3));
        let e = parse_lat("2\n2 1\n0 2\n").unwrap_err();
        assert!(e.to_string().contains("symmetric"));
        let e = parse_lat("2\n1 2\n2 1\n").unwrap_err();
        assert!(e.to_string().contains("positive definite"));
        assert!(matches!(parse_lat("2\n1 0\n0"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_lat("1\nx"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
