//! Slot-level CKKS simulator.
//!
//! A [`SlotCiphertext`] is a vector of `n` complex slots plus a remaining
//! multiplicative level. Additions keep the lower operand level; every
//! multiplication (ciphertext, plaintext vector or scalar) consumes one level.
//! Rotations and conjugations are free. With `noise_stddev == 0` the simulator is
//! exact complex arithmetic.
//!
//! Noise, when enabled, is drawn from a generator seeded by `(seed, lineage tag)`,
//! where the tag is a hash of the operation and its operands. Results therefore do
//! not depend on evaluation order or threading.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Slot count, a power of two.
    pub n: usize,
    pub max_level: usize,
    /// Standard deviation of the Gaussian noise added per slot after each multiplication.
    pub noise_stddev: f64,
    pub seed: u64,
    /// Scaling modulus bits. Recorded for reference only; the simulator has no modulus chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_bits: Option<u32>,
    /// First modulus bits. Recorded for reference only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mod_bits: Option<u32>,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n: 1 << 15,
            max_level: 25,
            noise_stddev: 0.0,
            seed: 0,
            scale_bits: None,
            first_mod_bits: None,
        }
    }
}

impl SimParams {
    pub fn with_slots(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "slot count must be a power of two, got {}",
                self.n
            )));
        }
        if !(self.noise_stddev >= 0.0) || !self.noise_stddev.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise_stddev must be a finite value >= 0, got {}",
                self.noise_stddev
            )));
        }
        Ok(())
    }
}

/// Operation counters; a deterministic stand-in for timing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    pub ct_mults: u64,
    pub scalar_mults: u64,
    pub rotations: u64,
    pub conjugations: u64,
    pub additions: u64,
}

impl OpCounts {
    pub fn mults(&self) -> u64 {
        self.ct_mults + self.scalar_mults
    }
}

#[derive(Default)]
struct Counters {
    ct_mults: AtomicU64,
    scalar_mults: AtomicU64,
    rotations: AtomicU64,
    conjugations: AtomicU64,
    additions: AtomicU64,
}

/// Shared simulator context: parameters and operation counters.
pub struct Simulator {
    params: SimParams,
    counters: Counters,
}

impl fmt::Debug for Simulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Simulator")
            .field("params", &self.params)
            .field("counts", &self.counts())
            .finish()
    }
}

impl Simulator {
    pub fn new(params: SimParams) -> Result<Arc<Self>> {
        params.validate()?;
        Ok(Arc::new(Self {
            params,
            counters: Counters::default(),
        }))
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn slots(&self) -> usize {
        self.params.n
    }

    pub fn counts(&self) -> OpCounts {
        let c = &self.counters;
        OpCounts {
            ct_mults: c.ct_mults.load(Ordering::Relaxed),
            scalar_mults: c.scalar_mults.load(Ordering::Relaxed),
            rotations: c.rotations.load(Ordering::Relaxed),
            conjugations: c.conjugations.load(Ordering::Relaxed),
            additions: c.additions.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counts(&self) {
        let c = &self.counters;
        for a in [
            &c.ct_mults,
            &c.scalar_mults,
            &c.rotations,
            &c.conjugations,
            &c.additions,
        ] {
            a.store(0, Ordering::Relaxed);
        }
    }

    /// Encrypts `v`, zero-padded to `n` slots, at the top level.
    pub fn encrypt(self: &Arc<Self>, v: &[Complex64]) -> Result<SlotCiphertext> {
        let n = self.params.n;
        if v.len() > n {
            return Err(Error::Capacity { len: v.len(), slots: n });
        }
        let mut slots = v.to_vec();
        slots.resize(n, Complex64::new(0.0, 0.0));
        let mut tag = mix(TAG_ENCRYPT, v.len() as u64);
        for z in v {
            tag = mix(tag, z.re.to_bits());
            tag = mix(tag, z.im.to_bits());
        }
        Ok(SlotCiphertext {
            ctx: Arc::clone(self),
            slots: Arc::new(slots),
            level: self.params.max_level,
            tag,
        })
    }

    pub fn encrypt_real(self: &Arc<Self>, v: &[f64]) -> Result<SlotCiphertext> {
        let v: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.encrypt(&v)
    }

    fn bump(&self, which: &AtomicU64, by: u64) {
        which.fetch_add(by, Ordering::Relaxed);
    }
}

/// A simulated ciphertext. Cheap to clone; never mutated after construction.
#[derive(Clone)]
pub struct SlotCiphertext {
    ctx: Arc<Simulator>,
    slots: Arc<Vec<Complex64>>,
    level: usize,
    tag: u64,
}

impl fmt::Debug for SlotCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SlotCiphertext")
            .field("n", &self.slots.len())
            .field("level", &self.level)
            .field("head", &&self.slots[..self.slots.len().min(4)])
            .finish()
    }
}

const TAG_ENCRYPT: u64 = 0x01;
const TAG_ADD: u64 = 0x02;
const TAG_SUB: u64 = 0x03;
const TAG_MUL: u64 = 0x04;
const TAG_MUL_PLAIN: u64 = 0x05;
const TAG_MUL_CONST: u64 = 0x06;
const TAG_ADD_CONST: u64 = 0x07;
const TAG_ROTATE: u64 = 0x08;
const TAG_CONJ: u64 = 0x09;
const TAG_CONST: u64 = 0x0a;
const TAG_NEG: u64 = 0x0b;

/// splitmix64-style mixing of two words.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ b.wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SlotCiphertext {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn slots(&self) -> &[Complex64] {
        &self.slots
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn simulator(&self) -> &Arc<Simulator> {
        &self.ctx
    }

    /// Returns the slot vector.
    pub fn decrypt(&self) -> Vec<Complex64> {
        self.slots.as_ref().clone()
    }

    /// Real parts of the slots.
    pub fn decrypt_real(&self) -> Vec<f64> {
        self.slots.iter().map(|z| z.re).collect()
    }

    fn derive(&self, slots: Vec<Complex64>, level: usize, tag: u64) -> Self {
        Self {
            ctx: Arc::clone(&self.ctx),
            slots: Arc::new(slots),
            level,
            tag,
        }
    }

    fn check_pair(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) && self.ctx.params != other.ctx.params {
            return Err(Error::Shape("ciphertexts come from different simulators".into()));
        }
        if self.n() != other.n() {
            return Err(Error::Shape(format!(
                "slot counts differ: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, tag: u64, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_pair(other)?;
        let slots = self
            .slots
            .iter()
            .zip(other.slots.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        self.ctx.bump(&self.ctx.counters.additions, 1);
        Ok(self.derive(slots, self.level.min(other.level), mix(mix(tag, self.tag), other.tag)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TAG_ADD, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, TAG_SUB, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        let slots = self.slots.iter().map(|&a| -a).collect();
        self.derive(slots, self.level, mix(TAG_NEG, self.tag))
    }

    pub fn add_const(&self, c: f64) -> Self {
        let slots = self.slots.iter().map(|&a| a + c).collect();
        self.derive(slots, self.level, mix(mix(TAG_ADD_CONST, self.tag), c.to_bits()))
    }

    /// A ciphertext holding `c` in every slot, at this ciphertext's level.
    pub fn constant_like(&self, c: f64) -> Self {
        let slots = vec![Complex64::new(c, 0.0); self.n()];
        self.derive(slots, self.level, mix(TAG_CONST, c.to_bits()))
    }

    fn consume_level(&self, available: usize) -> Result<usize> {
        if available == 0 {
            return Err(Error::LevelExhausted {
                needed: 1,
                available: 0,
            });
        }
        Ok(available - 1)
    }

    fn finish_mul(&self, mut slots: Vec<Complex64>, level: usize, tag: u64) -> Self {
        let sigma = self.ctx.params.noise_stddev;
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(self.ctx.params.seed, tag));
            let normal = Normal::new(0.0, sigma).expect("validated stddev");
            for z in slots.iter_mut() {
                z.re += normal.sample(&mut rng);
                z.im += normal.sample(&mut rng);
            }
        }
        self.derive(slots, level, tag)
    }

    /// Slot-wise product of two ciphertexts.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_pair(other)?;
        let level = self.consume_level(self.level.min(other.level))?;
        let slots = self
            .slots
            .iter()
            .zip(other.slots.iter())
            .map(|(&a, &b)| a * b)
            .collect();
        self.ctx.bump(&self.ctx.counters.ct_mults, 1);
        Ok(self.finish_mul(slots, level, mix(mix(TAG_MUL, self.tag), other.tag)))
    }

    /// Slot-wise product with a plaintext vector (zero-padded to `n`).
    pub fn mul_plain(&self, plain: &[Complex64]) -> Result<Self> {
        if plain.len() > self.n() {
            return Err(Error::Capacity {
                len: plain.len(),
                slots: self.n(),
            });
        }
        let level = self.consume_level(self.level)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut tag = mix(TAG_MUL_PLAIN, self.tag);
        for z in plain {
            tag = mix(tag, z.re.to_bits() ^ z.im.to_bits().rotate_left(32));
        }
        let slots = self
            .slots
            .iter()
            .enumerate()
            .map(|(j, &a)| a * plain.get(j).copied().unwrap_or(zero))
            .collect();
        self.ctx.bump(&self.ctx.counters.scalar_mults, 1);
        Ok(self.finish_mul(slots, level, tag))
    }

    /// Product with a real scalar.
    pub fn mul_const(&self, c: f64) -> Result<Self> {
        let level = self.consume_level(self.level)?;
        let slots = self.slots.iter().map(|&a| a * c).collect();
        self.ctx.bump(&self.ctx.counters.scalar_mults, 1);
        Ok(self.finish_mul(slots, level, mix(mix(TAG_MUL_CONST, self.tag), c.to_bits())))
    }

    /// Cyclic left rotation by `steps` (negative rotates right).
    pub fn rotate(&self, steps: i64) -> Self {
        self.ctx.bump(&self.ctx.counters.rotations, 1);
        self.rotate_uncounted(steps)
    }

    fn rotate_uncounted(&self, steps: i64) -> Self {
        let n = self.n();
        let shift = steps.rem_euclid(n as i64) as usize;
        let mut slots = Vec::with_capacity(n);
        slots.extend_from_slice(&self.slots[shift..]);
        slots.extend_from_slice(&self.slots[..shift]);
        self.derive(slots, self.level, mix(mix(TAG_ROTATE, self.tag), shift as u64))
    }

    /// Rotations of one input by several steps, sharing the (modelled) decomposition.
    pub fn rotate_batch(&self, steps: &[i64]) -> Vec<Self> {
        self.ctx.bump(&self.ctx.counters.rotations, steps.len() as u64);
        steps.iter().map(|&s| self.rotate_uncounted(s)).collect()
    }

    pub fn conjugate(&self) -> Self {
        self.ctx.bump(&self.ctx.counters.conjugations, 1);
        let slots = self.slots.iter().map(|a| a.conj()).collect();
        self.derive(slots, self.level, mix(TAG_CONJ, self.tag))
    }
}
