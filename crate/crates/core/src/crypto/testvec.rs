//! Hex test-vector files: one record per line, tab-separated, the first
//! column naming the record kind. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;

use super::CryptoError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorRecord {
    pub kind: String,
    pub fields: Vec<Vec<u8>>,
}

pub fn parse_vectors(text: &str) -> Result<Vec<VectorRecord>, CryptoError> {
    let mut out = Vec::new();
    for line in text.lines() {
        // Only the line ending goes; a trailing tab is an empty last column.
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let kind = cols.next().unwrap_or_default().to_string();
        let fields = cols
            .map(|c| hex::decode(c).map_err(|_| CryptoError::MalformedEncoding("test vector hex")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(VectorRecord { kind, fields });
    }
    Ok(out)
}

pub fn format_vectors(records: &[VectorRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.kind);
        for f in &r.fields {
            let _ = write!(s, "\t{}", hex::encode(f));
        }
        s.push('\n');
    }
    s
}
