//! Seeded randomness for the generators.
//!
//! All streams are `ChaCha8Rng` instances keyed by a 64-bit seed mixed with
//! a textual tag (and optionally an index) through SplitMix64, so every
//! stage and every ensemble member draws from an independent, reproducible
//! sub-stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Root of a family of independent random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for `(tag, index)`.
    pub fn derive(&self, tag: &str, index: u64) -> Seed {
        Seed(splitmix64(splitmix64(self.0 ^ fnv1a(tag)).wrapping_add(index)))
    }

    /// Random stream for `tag`.
    pub fn rng(&self, tag: &str) -> StreamRng {
        StreamRng::seed_from_u64(self.derive(tag, 0).0)
    }

    pub fn rng_indexed(&self, tag: &str, index: u64) -> StreamRng {
        StreamRng::seed_from_u64(self.derive(tag, index).0)
    }
}

/// Integer powerlaw on `[a, b)` with `P[X = k] ∝ k^-gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PldParams {
    pub a: u64,
    pub b: u64,
    pub gamma: f64,
}

impl PldParams {
    pub fn new(a: u64, b: u64, gamma: f64) -> Result<Self> {
        let p = PldParams { a, b, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a < 1 {
            return invalid(format!("powerlaw lower limit must be >= 1, got {}", self.a));
        }
        if self.b <= self.a {
            return invalid(format!(
                "powerlaw upper limit {} must exceed lower limit {}",
                self.b, self.a
            ));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return invalid(format!("powerlaw exponent must be >= 1, got {}", self.gamma));
        }
        Ok(())
    }
}

/// Tabulated powerlaw distribution supporting inverse-transform sampling.
#[derive(Clone, Debug)]
pub struct Pld {
    params: PldParams,
    // cdf[i] = P[X <= a + i]; the last entry is exactly 1
    cdf: Vec<f64>,
    norm: f64,
}

impl Pld {
    pub fn new(params: PldParams) -> Result<Self> {
        params.validate()?;
        let PldParams { a, b, gamma } = params;
        // Neumaier summation keeps the normalizer exact to a few ulps even
        // for supports of many millions of values.
        let mut cdf = Vec::with_capacity((b - a) as usize);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in a..b {
            let w = (k as f64).powf(-gamma);
            let t = sum + w;
            if sum.abs() >= w.abs() {
                comp += (sum - t) + w;
            } else {
                comp += (w - t) + sum;
            }
            sum = t;
            cdf.push(sum + comp);
        }
        let norm = sum + comp;
        for c in &mut cdf {
            *c /= norm;
        }
        *cdf.last_mut().expect("b > a") = 1.0;
        Ok(Pld { params, cdf, norm })
    }

    pub fn params(&self) -> PldParams {
        self.params
    }

    /// Normalizing constant `sum_{k=a}^{b-1} k^-gamma`.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.params.a || k >= self.params.b {
            0.0
        } else {
            (k as f64).powf(-self.params.gamma) / self.norm
        }
    }

    pub fn cdf(&self, k: u64) -> f64 {
        if k < self.params.a {
            0.0
        } else if k >= self.params.b {
            1.0
        } else {
            self.cdf[(k - self.params.a) as usize]
        }
    }

    /// Smallest `k` in `[a, b)` whose CDF exceeds `u`.
    pub fn inverse_cdf(&self, u: f64) -> Result<u64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Domain(format!("uniform variate {u} not in [0, 1)")));
        }
        Ok(self.params.a + self.cdf.partition_point(|&c| c <= u) as u64)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        self.inverse_cdf(u).expect("random::<f64>() lies in [0, 1)")
    }

    pub fn mean(&self) -> f64 {
        (self.params.a..self.params.b)
            .map(|k| k as f64 * self.pmf(k))
            .sum()
    }
}

/// Streams `n` powerlaw variates in non-decreasing order without sorting.
///
/// Sorted uniforms are produced online from the largest order statistic
/// downwards (`U_(n) = V^(1/n)`, `U_(i) = U_(i+1) V^(1/i)`); reflecting them
/// gives an ascending sequence, and the inverse CDF carries the order over.
pub struct MonotonicPld<'a, R: Rng> {
    dist: &'a Pld,
    rng: R,
    remaining: u64,
    top: f64,
    cursor: usize,
}

impl<'a, R: Rng> MonotonicPld<'a, R> {
    pub fn new(dist: &'a Pld, n: u64, rng: R) -> Self {
        MonotonicPld {
            dist,
            rng,
            remaining: n,
            top: 1.0,
            cursor: 0,
        }
    }
}

impl<R: Rng> Iterator for MonotonicPld<'_, R> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let v: f64 = 1.0 - self.rng.random::<f64>();
        self.top *= v.powf(1.0 / self.remaining as f64);
        self.remaining -= 1;
        let u = (1.0 - self.top).min(1.0 - f64::EPSILON / 2.0);
        let cdf = &self.dist.cdf;
        while cdf[self.cursor] <= u {
            self.cursor += 1;
        }
        Some(self.dist.params.a + self.cursor as u64)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining as usize, Some(self.remaining as usize))
    }
}

/// Non-decreasing sample of `n` i.i.d. powerlaw degrees.
pub fn sample_monotonic_pld<R: Rng>(n: u64, params: PldParams, rng: R) -> Result<Vec<u64>> {
    if n == 0 {
        return invalid("monotonic sample needs n >= 1");
    }
    let dist = Pld::new(params)?;
    Ok(MonotonicPld::new(&dist, n, rng).collect())
}

/// Uniform random permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: u64, rng: &mut R) -> Vec<u64> {
    let mut p: Vec<u64> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Rounds `x` down or up at random so that the expectation equals `x`.
pub fn randomized_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    debug_assert!(x >= 0.0);
    let base = x.floor();
    let frac = x - base;
    let up = frac > 0.0 && rng.random::<f64>() < frac;
    base as u64 + up as u64
}

/// Splits `d` into `parts` near-equal integers, placing the remainder at
/// uniformly random positions.
pub fn even_split<R: Rng + ?Sized>(d: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    assert!(parts >= 1, "even_split needs at least one part");
    let base = d / parts as u64;
    let rem = (d % parts as u64) as usize;
    let mut out = vec![base; parts];
    if rem > 0 {
        for i in rand::seq::index::sample(rng, parts, rem) {
            out[i] += 1;
        }
    }
    out
}
