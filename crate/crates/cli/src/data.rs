//! Newline-delimited JSON vector files.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use chebmod::Complex64;

fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// One JSON array of numbers per line.
pub fn read_real_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    lines(path)?
        .into_iter()
        .map(|(n, l)| {
            serde_json::from_str(&l)
                .with_context(|| format!("{}:{n}: expected a JSON array of numbers", path.display()))
        })
        .collect()
}

/// One JSON array of `[re, im]` pairs per line.
pub fn read_complex_vectors(path: &Path) -> Result<Vec<Vec<Complex64>>> {
    lines(path)?
        .into_iter()
        .map(|(n, l)| {
            let pairs: Vec<(f64, f64)> = serde_json::from_str(&l)
                .with_context(|| format!("{}:{n}: expected a JSON array of [re, im] pairs", path.display()))?;
            Ok(pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
        })
        .collect()
}

pub fn write_real_vectors(path: &Path, vectors: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for v in vectors {
        serde_json::to_writer(&mut w, v)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Trailing zero slots are dropped to keep files small.
pub fn write_complex_vectors(path: &Path, vectors: &[Vec<Complex64>]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for v in vectors {
        let used = v.iter().rposition(|z| z.re != 0.0 || z.im != 0.0).map_or(0, |i| i + 1);
        let pairs: Vec<(f64, f64)> = v[..used].iter().map(|z| (z.re, z.im)).collect();
        serde_json::to_writer(&mut w, &pairs)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.ndjson");
        write_real_vectors(&path, &[vec![1.0, 2.5], vec![]]).unwrap();
        assert_eq!(read_real_vectors(&path).unwrap(), vec![vec![1.0, 2.5], vec![]]);
        std::fs::write(&path, "[1,2]\n\n[3]\n").unwrap();
        assert_eq!(read_real_vectors(&path).unwrap(), vec![vec![1.0, 2.0], vec![3.0]]);
    }

    #[test]
    fn complex_write_drops_trailing_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ndjson");
        let v = vec![
            Complex64::new(1.0, -2.0),
            Complex64::new(0.0, 3.0),
            Complex64::default(),
        ];
        write_complex_vectors(&path, std::slice::from_ref(&v)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "[[1.0,-2.0],[0.0,3.0]]\n");
        assert_eq!(read_complex_vectors(&path).unwrap(), vec![v[..2].to_vec()]);
    }

    #[test]
    fn bad_line_is_reported_with_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ndjson");
        std::fs::write(&path, "[1]\n{}\n").unwrap();
        let err = format!("{:#}", read_real_vectors(&path).unwrap_err());
        assert!(err.contains(":2:"), "{err}");
    }
}
