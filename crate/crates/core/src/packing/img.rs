use num_complex::Complex64;

use crate::error::Result;
use crate::hesim::SlotCiphertext;

/// Slot `j` becomes `a[j] + b[j] i`; missing entries are zero.
pub fn img_pack(a: &[f64], b: &[f64]) -> Vec<Complex64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|j| Complex64::new(a.get(j).copied().unwrap_or(0.0), b.get(j).copied().unwrap_or(0.0)))
        .collect()
}

/// Separates real and imaginary parts:
/// `a = r1 (x + conj x)` with `r1 = 0.5` on the first `n1` slots and
/// `b = r2 (x - conj x)` with `r2 = -0.5i` on the first `n2` slots.
pub fn img_unpack(ct: &SlotCiphertext, n1: usize, n2: usize) -> Result<(SlotCiphertext, SlotCiphertext)> {
    let conj = ct.conjugate();
    let real = ct.add(&conj)?.mul_plain(&vec![Complex64::new(0.5, 0.0); n1])?;
    let imag = ct.sub(&conj)?.mul_plain(&vec![Complex64::new(0.0, -0.5); n2])?;
    Ok((real, imag))
}
