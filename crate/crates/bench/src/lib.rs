//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use chebmod::fitting::DeltaChoice;
use chebmod::packing::bitstack::{bitstack_pack, BitStackLayout};
use chebmod::packing::crt::{crt_pack, CrtBasis};
use chebmod::{SimParams, Simulator, SlotCiphertext};

/// Deterministic values in `[0, bound)`.
pub fn ramp(len: usize, bound: u64, salt: u64) -> Vec<i64> {
    (0..len as u64)
        .map(|i| ((i * 2654435761 + salt * 40503) % bound) as i64)
        .collect()
}

pub fn simulator(slots: usize) -> Arc<Simulator> {
    Simulator::new(SimParams::with_slots(slots)).expect("valid simulator parameters")
}

fn encrypt_u64(sim: &Arc<Simulator>, values: &[u64]) -> SlotCiphertext {
    let xs: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    sim.encrypt_real(&xs).expect("fits in the slot count")
}

/// A CRT (4, 5, 7) ciphertext with plans of the given degree.
pub fn crt_fixture(slots: usize, degree: usize) -> (CrtBasis, SlotCiphertext) {
    let basis = CrtBasis::new(vec![4, 5, 7])
        .unwrap()
        .fit_plans(degree, DeltaChoice::Default)
        .unwrap();
    let layers: Vec<Vec<i64>> = basis
        .moduli()
        .iter()
        .enumerate()
        .map(|(i, &m)| ramp(slots, m, i as u64))
        .collect();
    let packed = crt_pack(&layers, &basis).unwrap();
    (basis, encrypt_u64(&simulator(slots), &packed))
}

/// A three-layer 2-bit stack with plans of the given degree.
pub fn bitstack_fixture(slots: usize, degree: usize) -> (BitStackLayout, SlotCiphertext) {
    let layout = BitStackLayout::from_bit_widths(&[2, 2, 2])
        .unwrap()
        .fit_plans(degree, DeltaChoice::Default)
        .unwrap();
    let layers: Vec<Vec<i64>> = (0..3).map(|i| ramp(slots, 4, i)).collect();
    let packed = bitstack_pack(&layers, &layout).unwrap();
    (layout, encrypt_u64(&simulator(slots), &packed))
}
