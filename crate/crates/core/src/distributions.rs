//! Disturbance families and seedable, splittable random streams.
//!
//! A stream is addressed by `(master_seed, stream_id)`. The pair is expanded
//! into a 128-bit key with the splitmix64 finalizer, and the key seeds a
//! ChaCha8 block generator whose 64-bit stream word is `stream_id`. Replicate
//! `k` of a simulation always draws from stream `k`, so results do not
//! depend on which worker runs it.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(alias = "Laplace")]
    Laplace,
    #[serde(alias = "Normal", alias = "gaussian")]
    Normal,
    #[serde(alias = "CenteredExponential", alias = "centered_exp")]
    CenteredExponential,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Laplace => "laplace",
            Family::Normal => "normal",
            Family::CenteredExponential => "centered_exponential",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laplace" => Ok(Family::Laplace),
            "normal" | "gaussian" => Ok(Family::Normal),
            "centered_exponential" | "centeredexponential" | "centered_exp" => {
                Ok(Family::CenteredExponential)
            }
            other => Err(Error::InvalidInput(format!("unknown family '{other}'"))),
        }
    }
}

/// Disturbance law with mean `location`.
///
/// `scale` is the Laplace `b` (variance `2 b^2`), the normal standard
/// deviation, or the exponential scale (variance `s^2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub family: Family,
    #[serde(default)]
    pub location: f64,
    pub scale: f64,
}

impl DisturbanceSpec {
    pub fn new(family: Family, location: f64, scale: f64) -> Result<Self> {
        let spec = DisturbanceSpec {
            family,
            location,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        Self::new(Family::Laplace, location, scale)
    }

    pub fn normal(location: f64, sd: f64) -> Result<Self> {
        Self::new(Family::Normal, location, sd)
    }

    pub fn centered_exponential(location: f64, scale: f64) -> Result<Self> {
        Self::new(Family::CenteredExponential, location, scale)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{} location must be finite",
                self.family
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{} scale must be finite and positive, got {}",
                self.family, self.scale
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.location
    }

    pub fn variance(&self) -> f64 {
        match self.family {
            Family::Laplace => 2.0 * self.scale * self.scale,
            Family::Normal | Family::CenteredExponential => self.scale * self.scale,
        }
    }

    /// One draw.
    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match self.family {
            Family::Laplace => {
                let u = rng.uniform_open01() - 0.5;
                self.location - self.scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Family::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                self.location + self.scale * z
            }
            Family::CenteredExponential => {
                -self.scale * rng.uniform_open01().ln() - self.scale + self.location
            }
        }
    }
}

/// `count` i.i.d. draws from `spec`.
pub fn sample(spec: &DisturbanceSpec, stream: &mut RngStream, count: usize) -> Vec<f64> {
    (0..count).map(|_| spec.draw(stream)).collect()
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 output function; a bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 128-bit key for `(master_seed, stream_id)`. For a fixed seed the low word
/// is a bijection of `stream_id`, so keys of one seed never collide.
pub fn stream_key(master_seed: u64, stream_id: u64) -> [u64; 2] {
    let lo = mix64(mix64(stream_id.wrapping_add(GOLDEN)) ^ master_seed);
    let hi = mix64(lo ^ mix64(master_seed.wrapping_add(GOLDEN.wrapping_mul(2))).rotate_left(17));
    [lo, hi]
}

/// Single-consumer random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    key: [u64; 2],
    rng: ChaCha8Rng,
}

/// Stream `stream_id` of `master_seed`.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RngStream {
    let key = stream_key(master_seed, stream_id);
    let mut state = key[0] ^ key[1].rotate_left(32);
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        state = state.wrapping_add(GOLDEN);
        let word = mix64(state ^ key[i % 2]);
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream_id);
    RngStream {
        master_seed,
        stream_id,
        key,
        rng,
    }
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn key(&self) -> [u64; 2] {
        self.key
    }

    /// An independent stream nested under this one, e.g. bootstrap draw
    /// `index` of a test that was handed this stream.
    pub fn child(&self, index: u64) -> RngStream {
        derive_stream(self.key[0] ^ self.key[1].rotate_left(29), index)
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    pub fn uniform_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn same_address_same_draws() {
        let a: Vec<u64> = {
            let mut s = derive_stream(42, 0);
            (0..100).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = derive_stream(42, 0);
            (0..100).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn different_streams_differ() {
        let mut s0 = derive_stream(42, 0);
        let mut s1 = derive_stream(42, 1);
        let a: Vec<u64> = (0..100).map(|_| s0.next_u64()).collect();
        let b: Vec<u64> = (0..100).map(|_| s1.next_u64()).collect();
        assert_ne!(a, b);
        assert_ne!(
            derive_stream(1, 5).next_u64(),
            derive_stream(2, 5).next_u64()
        );
    }

    #[test]
    fn no_key_collisions_over_replicates() {
        let keys: HashSet<[u64; 2]> = (0..25_000).map(|k| stream_key(42, k)).collect();
        assert_eq!(keys.len(), 25_000);
    }

    #[test]
    fn uniform_stays_open() {
        let mut s = derive_stream(7, 3);
        for _ in 0..100_000 {
            let u = s.uniform_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn empty_sample() {
        let spec = DisturbanceSpec::laplace(0.0, 1.0).unwrap();
        assert!(sample(&spec, &mut derive_stream(1, 1), 0).is_empty());
    }

    #[test]
    fn analytic_variances() {
        assert_eq!(DisturbanceSpec::laplace(0.0, 1.0).unwrap().variance(), 2.0);
        assert_eq!(DisturbanceSpec::laplace(0.0, 2.0).unwrap().variance(), 8.0);
        assert_eq!(DisturbanceSpec::normal(1.0, 3.0).unwrap().variance(), 9.0);
        let e = DisturbanceSpec::centered_exponential(0.5, 2.0).unwrap();
        assert_eq!((e.mean(), e.variance()), (0.5, 4.0));
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(DisturbanceSpec::laplace(0.0, 0.0).is_err());
        assert!(DisturbanceSpec::normal(0.0, -1.0).is_err());
        assert!(DisturbanceSpec::normal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn family_names() {
        for f in [Family::Laplace, Family::Normal, Family::CenteredExponential] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("cauchy".parse::<Family>().is_err());
    }
}
