//! Packing schemes and their homomorphic unpacking.
//!
//! * [`concat`]: VecConcat, several short vectors side by side in the slots.
//! * [`img`]: ImgConcat, a second real vector in the imaginary parts.
//! * [`bitstack`]: radix stacking of small integers, unpacked layer by layer with ModP.
//! * [`crt`]: CRT stacking, every layer unpacked independently with ModP.
//! * [`pipeline`]: compositions of the above, unpacked in reverse order.

pub mod bitstack;
pub mod concat;
pub mod crt;
pub mod img;
pub mod pipeline;

pub use bitstack::{bitstack_pack, bitstack_unpack, BitStackLayout};
pub use concat::{repack_repeat, vec_pack, vec_unpack, ConcatLayout};
pub use crt::{crt_pack, crt_unpack, CrtBasis};
pub use img::{img_pack, img_unpack};
pub use pipeline::{pipeline_pack, pipeline_unpack, PackLayout, Stage};

use crate::error::{Error, Result};

/// Checks `0 <= v < bound` for every element of one layer.
pub(crate) fn check_layer(layer: usize, values: &[i64], bound: u64) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if value < 0 || value as u64 >= bound {
            return Err(Error::OutOfRange {
                layer,
                index,
                value,
                bound,
            });
        }
    }
    Ok(())
}

/// Length shared by all layers, or a shape error.
pub(crate) fn common_len(values: &[Vec<i64>]) -> Result<usize> {
    let len = values.first().map_or(0, Vec::len);
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.len() != len) {
        return Err(Error::Shape(format!(
            "layer {i} has length {} but layer 0 has length {len}",
            v.len()
        )));
    }
    Ok(len)
}
