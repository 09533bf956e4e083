//! Versioned text serialization of a [`ProlateBasis`].
//!
//! ```text
//! PROLATOSCOPE-BASIS v1
//! c=1
//! K=18
//! N=66
//! precision_bits=256
//! mode=0
//! lambda=5.72581780... e-01
//! chi=...
//! gamma=66
//! 0 9.9...e-01
//! 1 0
//! ...
//! checksum=sha256:<hex of every preceding byte>
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use super::ProlateBasis;
use crate::error::{Error, Result};
use crate::mp::Real;

pub const BASIS_HEADER: &str = "PROLATOSCOPE-BASIS v1";
const HEADER_PREFIX: &str = "PROLATOSCOPE-BASIS ";
const CHECKSUM_PREFIX: &str = "checksum=sha256:";

/// Significant digits written for extended-precision values: every digit
/// kept is backed by the working precision, with a few guard digits spare.
pub(crate) fn decimal_digits(bits: usize) -> usize {
    ((bits as f64 * std::f64::consts::LOG10_2).floor() as usize).saturating_sub(4)
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ProlateBasis {
    /// Canonical serialized form, including the trailing checksum line.
    pub fn to_text(&self) -> String {
        let digits = decimal_digits(self.precision_bits);
        let mut s = String::new();
        s.push_str(BASIS_HEADER);
        s.push('\n');
        s.push_str(&format!("c={}\n", self.c));
        s.push_str(&format!("K={}\n", self.modes.len()));
        s.push_str(&format!("N={}\n", self.matrix_order));
        s.push_str(&format!("precision_bits={}\n", self.precision_bits));
        for m in &self.modes {
            s.push_str(&format!("mode={}\n", m.index));
            s.push_str(&format!("lambda={}\n", m.lambda_hp.to_sci_string(digits)));
            s.push_str(&format!("chi={}\n", m.chi.to_sci_string(digits)));
            s.push_str(&format!("gamma={}\n", m.gamma_hp.len()));
            for (k, g) in m.gamma_hp.iter().enumerate() {
                s.push_str(&format!("{k} {}\n", g.to_sci_string(digits)));
            }
        }
        let sum = sha256_hex(s.as_bytes());
        s.push_str(CHECKSUM_PREFIX);
        s.push_str(&sum);
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical serialization body.
    pub fn checksum(&self) -> String {
        let text = self.to_text();
        let line = text.rfind(CHECKSUM_PREFIX).expect("checksum line present");
        text[line + CHECKSUM_PREFIX.len()..].trim_end().to_string()
    }

    /// Parses and validates a serialized basis.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cur = Cursor { text, pos: 0 };

        let (off, header) = cur.line()?;
        if header != BASIS_HEADER {
            if let Some(v) = header.strip_prefix(HEADER_PREFIX) {
                return Err(Error::Version(v.to_string()));
            }
            return Err(parse_err(off, "missing basis header"));
        }
        let c: f64 = cur.field("c")?;
        let k: usize = cur.field("K")?;
        let n: usize = cur.field("N")?;
        let bits: usize = cur.field("precision_bits")?;
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Invariant(format!("c = {c} must be positive")));
        }
        if bits < super::MIN_PRECISION_BITS {
            return Err(Error::Invariant(format!(
                "precision_bits = {bits} too small"
            )));
        }

        let mut raw = Vec::with_capacity(k);
        for idx in 0..k {
            let (off, mode) = cur.field_at::<usize>("mode")?;
            if mode != idx {
                return Err(parse_err(
                    off,
                    format!("expected mode={idx}, found mode={mode}"),
                ));
            }
            let lambda = cur.real_field("lambda", bits)?;
            let chi = cur.real_field("chi", bits)?;
            let (off, count) = cur.field_at::<usize>("gamma")?;
            if count != n {
                return Err(parse_err(
                    off,
                    format!("gamma count {count} differs from N={n}"),
                ));
            }
            let mut gamma = Vec::with_capacity(n);
            for j in 0..n {
                let (off, line) = cur.line()?;
                let (lhs, rhs) = line
                    .split_once(' ')
                    .ok_or_else(|| parse_err(off, "expected '<index> <value>'"))?;
                if lhs.parse::<usize>().ok() != Some(j) {
                    return Err(parse_err(off, format!("expected coefficient index {j}")));
                }
                let v = Real::parse(rhs, bits)
                    .ok_or_else(|| parse_err(off + lhs.len() + 1, "malformed decimal"))?;
                gamma.push(v);
            }
            raw.push((lambda, chi, gamma));
        }

        let body_end = cur.pos;
        let (off, line) = cur.line()?;
        let stored = line
            .strip_prefix(CHECKSUM_PREFIX)
            .ok_or_else(|| parse_err(off, "expected checksum line"))?;
        if cur.pos != text.len() {
            return Err(parse_err(cur.pos, "trailing data after checksum"));
        }
        let computed = sha256_hex(&text.as_bytes()[..body_end]);
        if stored != computed {
            return Err(Error::Checksum {
                stored: stored.to_string(),
                computed,
            });
        }
        ProlateBasis::from_parts(c, n, bits, raw)
    }
}

fn parse_err(offset: usize, detail: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        detail: detail.into(),
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Next newline-terminated line and its starting byte offset.
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.text[start..];
        match rest.find('\n') {
            Some(i) => {
                self.pos = start + i + 1;
                Ok((start, &rest[..i]))
            }
            None => Err(parse_err(self.text.len(), "unexpected end of file")),
        }
    }

    fn value(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (off, line) = self.line()?;
        let v = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| parse_err(off, format!("expected '{key}='")))?;
        Ok((off + key.len() + 1, v))
    }

    fn field_at<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T)> {
        let (off, v) = self.value(key)?;
        let parsed = v
            .parse()
            .map_err(|_| parse_err(off, format!("malformed value for {key}")))?;
        Ok((off, parsed))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        Ok(self.field_at(key)?.1)
    }

    fn real_field(&mut self, key: &str, bits: usize) -> Result<Real> {
        let (off, v) = self.value(key)?;
        Real::parse(v, bits).ok_or_else(|| parse_err(off, format!("malformed decimal for {key}")))
    }
}

/// Writes the basis atomically (temporary file, then rename).
pub fn save_basis(basis: &ProlateBasis, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, basis.to_text()).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_basis(path: impl AsRef<Path>) -> Result<ProlateBasis> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ProlateBasis::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn small() -> &'static ProlateBasis {
        static B: OnceLock<ProlateBasis> = OnceLock::new();
        B.get_or_init(|| ProlateBasis::build(1.0, 6, 256).unwrap())
    }

    fn reseal(body_with_sum: &str) -> String {
        let i = body_with_sum.rfind(CHECKSUM_PREFIX).unwrap();
        let body = &body_with_sum[..i];
        format!("{body}{CHECKSUM_PREFIX}{}\n", sha256_hex(body.as_bytes()))
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.txt");
        save_basis(small(), &p).unwrap();
        let first = std::fs::read(&p).unwrap();
        let loaded = load_basis(&p).unwrap();
        save_basis(&loaded, &p).unwrap();
        assert_eq!(first, std::fs::read(&p).unwrap());
        assert_eq!(loaded.checksum(), small().checksum());
        assert_eq!(loaded.lambda(5).unwrap(), small().lambda(5).unwrap());
    }

    #[test]
    fn header_and_digits() {
        let t = small().to_text();
        assert!(
            t.starts_with("PROLATOSCOPE-BASIS v1\nc=1\nK=6\nN=42\nprecision_bits=256\nmode=0\n")
        );
        let lam = t.lines().find(|l| l.starts_with("lambda=")).unwrap();
        let mant = lam.trim_start_matches("lambda=").split('e').next().unwrap();
        assert!(mant.len() > 40);
    }

    #[test]
    fn swapped_lambdas_violate_monotonicity() {
        let t = small().to_text();
        let lams: Vec<&str> = t.lines().filter(|l| l.starts_with("lambda=")).collect();
        let (l2, l3) = (lams[2], lams[3]);
        let tampered = t
            .replacen(l3, "@@", 1)
            .replacen(l2, l3, 1)
            .replacen("@@", l2, 1);
        let err = ProlateBasis::from_text(&reseal(&tampered)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)), "{err}");
    }

    #[test]
    fn truncated_file_reports_offset() {
        let t = small().to_text();
        let cut = &t[..t.len() / 2];
        match ProlateBasis::from_text(cut) {
            Err(Error::Parse { offset, .. }) => assert!(offset <= cut.len()),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_digit_fails_checksum() {
        let t = small().to_text();
        let i = t.find("lambda=").unwrap() + "lambda=".len() + 3;
        let mut bytes = t.into_bytes();
        bytes[i] = if bytes[i] == b'1' { b'2' } else { b'1' };
        let err = ProlateBasis::from_text(std::str::from_utf8(&bytes).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Checksum { .. }), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let t = small().to_text().replacen("v1", "v2", 1);
        assert!(matches!(ProlateBasis::from_text(&t), Err(Error::Version(v)) if v == "v2"));
    }

    #[test]
    fn odd_mode_with_even_coefficient_is_rejected() {
        let t = small().to_text();
        let m1 = t.find("mode=1\n").unwrap();
        let g0 = m1 + t[m1..].find("\n0 0\n").unwrap() + 1;
        let tampered = format!("{}0 1.0e-30{}", &t[..g0], &t[g0 + 3..]);
        let err = ProlateBasis::from_text(&reseal(&tampered)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)), "{err}");
    }
}
