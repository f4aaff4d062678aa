use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hesim::SlotCiphertext;

/// Sizes `n_1..n_d` of the vectors concatenated into one slot vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcatLayout {
    sizes: Vec<usize>,
}

impl ConcatLayout {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidParameter(
                "concat sizes must be a non-empty list of positive lengths".into(),
            ));
        }
        Ok(Self { sizes })
    }

    /// `count` vectors of `len` elements each.
    pub fn uniform(len: usize, count: usize) -> Result<Self> {
        Self::new(vec![len; count])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Left-rotation offsets `sum_{j<i} n_j`.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect()
    }

    fn check_fits(&self, slots: usize) -> Result<()> {
        if self.total() > slots {
            return Err(Error::Capacity {
                len: self.total(),
                slots,
            });
        }
        Ok(())
    }
}

/// Concatenates `vectors` and zero-pads to `slots`.
pub fn vec_pack<T: Copy + Default>(vectors: &[Vec<T>], layout: &ConcatLayout, slots: usize) -> Result<Vec<T>> {
    layout.check_fits(slots)?;
    if vectors.len() != layout.sizes.len() {
        return Err(Error::Shape(format!(
            "layout expects {} vectors, got {}",
            layout.sizes.len(),
            vectors.len()
        )));
    }
    let mut out = Vec::with_capacity(slots);
    for (i, (v, &size)) in vectors.iter().zip(&layout.sizes).enumerate() {
        if v.len() != size {
            return Err(Error::Shape(format!(
                "vector {i} has length {} but the layout expects {size}",
                v.len()
            )));
        }
        out.extend_from_slice(v);
    }
    out.resize(slots, T::default());
    Ok(out)
}

fn prefix_mask(len: usize, value: Complex64) -> Vec<Complex64> {
    vec![value; len]
}

/// Splits a concatenation: vector `i` is rotated to the front and masked to its
/// `n_i` slots. All rotations are issued as one batch; one level is consumed.
pub fn vec_unpack(ct: &SlotCiphertext, layout: &ConcatLayout) -> Result<Vec<SlotCiphertext>> {
    layout.check_fits(ct.n())?;
    let steps: Vec<i64> = layout.offsets().into_iter().map(|o| o as i64).collect();
    let one = Complex64::new(1.0, 0.0);
    ct.rotate_batch(&steps)
        .iter()
        .zip(&layout.sizes)
        .map(|(rot, &size)| rot.mul_plain(&prefix_mask(size, one)))
        .collect()
}

/// Turns `x | 0..` (with `|x| = d_x`) into `x | x | .. | x | 0..` with `r` copies,
/// using only rotations and additions.
pub fn repack_repeat(ct: &SlotCiphertext, d_x: usize, r: usize) -> Result<SlotCiphertext> {
    if r == 0 || d_x == 0 {
        return Err(Error::InvalidParameter(
            "repeat count and length must be positive".into(),
        ));
    }
    let needed = r.saturating_mul(d_x);
    if needed > ct.n() {
        return Err(Error::Capacity {
            len: needed,
            slots: ct.n(),
        });
    }
    let top = (usize::BITS - 1 - r.leading_zeros()) as usize;
    // powers[i] holds 2^i copies.
    let mut powers = vec![ct.clone()];
    for i in 0..top {
        let p = &powers[i];
        let shifted = p.rotate(-(((1usize << i) * d_x) as i64));
        powers.push(p.add(&shifted)?);
    }
    let mut acc = powers[top].clone();
    let mut offset = 1usize << top;
    for i in (0..top).rev() {
        if r >> i & 1 == 1 {
            acc = acc.add(&powers[i].rotate(-((offset * d_x) as i64)))?;
            offset += 1 << i;
        }
    }
    Ok(acc)
}
