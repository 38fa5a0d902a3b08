//! Set files. Two formats are read:
//!
//! * plain: one positive integer per line (blank lines and `#` comments
//!   ignored);
//! * run-length: a first line `DFSET1 <N>`, then lines `start length`, each
//!   a run `start, start+1, ..., start+length-1` inside `[1, N]`.

use crate::error::{Error, Result};

pub const MAGIC: &str = "DFSET1";

/// Parse a set file; returns the sorted, deduplicated elements and the `N`
/// from a run-length header if there is one.
pub fn parse_set(text: &str) -> Result<(Vec<u64>, Option<u64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut out = Vec::new();
    let mut header_n = None;
    let first = lines.next();
    let mut rest: Vec<&str> = lines.collect();
    match first {
        Some(l) if l.starts_with(MAGIC) => {
            let n = l[MAGIC.len()..]
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad {MAGIC} header: {l}")))?;
            header_n = Some(n);
            for l in rest {
                let mut it = l.split_whitespace();
                let (Some(s), Some(len), None) = (it.next(), it.next(), it.next()) else {
                    return Err(Error::Parse(format!("bad run line: {l}")));
                };
                let s: u64 = s.parse().map_err(|_| Error::Parse(format!("bad run start: {l}")))?;
                let len: u64 = len.parse().map_err(|_| Error::Parse(format!("bad run length: {l}")))?;
                if s == 0 || s.saturating_add(len) > n + 1 {
                    return Err(Error::Parse(format!("run {l} outside [1, {n}]")));
                }
                out.extend(s..s + len);
            }
        }
        Some(l) => {
            rest.insert(0, l);
            for l in rest {
                let v: u64 = l.parse().map_err(|_| Error::Parse(format!("bad set element: {l}")))?;
                out.push(v);
            }
        }
        None => {}
    }
    out.sort_unstable();
    out.dedup();
    Ok((out, header_n))
}

/// Run-length form of a sorted set inside `[1, n]`.
pub fn write_runs(set: &[u64], n: u64) -> String {
    let mut s = format!("{MAGIC} {n}\n");
    let mut i = 0;
    while i < set.len() {
        let start = set[i];
        let mut j = i + 1;
        while j < set.len() && set[j] == set[j - 1] + 1 {
            j += 1;
        }
        s.push_str(&format!("{start} {}\n", j - i));
        i = j;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_formats() {
        assert_eq!(parse_set("3\n1\n\n# c\n3\n").unwrap(), (vec![1, 3], None));
        let set = vec![1, 2, 3, 7, 9, 10];
        let text = write_runs(&set, 10);
        assert_eq!(text, "DFSET1 10\n1 3\n7 1\n9 2\n");
        assert_eq!(parse_set(&text).unwrap(), (set, Some(10)));
        assert!(parse_set("DFSET1 5\n4 3\n").is_err());
        assert!(parse_set("x\n").is_err());
    }
}
