//! Owen-scrambled Sobol points.
//!
//! Direction numbers come from the bundled Joe–Kuo table. Points are produced
//! in Gray-code order; scrambling is a hash-driven nested uniform (Owen)
//! permutation of the 32 output bits, keyed by a 64-bit seed and the
//! dimension.

use crate::error::{Error, Result};
use crate::rng::mix64;

const TABLE: &str = include_str!("../../data/sobol_directions.txt");
const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Number of dimensions available from the bundled table.
pub fn max_dimensions() -> usize {
    1 + TABLE
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count()
}

#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    scramble: Option<u64>,
}

impl Sobol {
    pub fn new(dims: usize, scramble: Option<u64>) -> Result<Self> {
        if dims == 0 || dims > max_dimensions() {
            return Err(Error::Argument(format!(
                "Sobol dimension must lie in 1..={}, got {dims}",
                max_dimensions()
            )));
        }
        let mut directions = Vec::with_capacity(dims);
        let mut first = [0u32; BITS];
        for (j, v) in first.iter_mut().enumerate() {
            *v = 1u32 << (BITS - 1 - j);
        }
        directions.push(first);

        let rows = TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        for row in rows.take(dims - 1) {
            directions.push(parse_row(row)?);
        }
        Ok(Self { directions, scramble })
    }

    pub fn dims(&self) -> usize {
        self.directions.len()
    }

    /// Integer coordinates of point `index` before scrambling.
    fn raw(&self, index: u32) -> impl Iterator<Item = u32> + '_ {
        let gray = index ^ (index >> 1);
        self.directions.iter().map(move |v| {
            let mut x = 0u32;
            let mut g = gray;
            let mut j = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= v[j];
                }
                g >>= 1;
                j += 1;
            }
            x
        })
    }

    /// Point `index` of the sequence, every coordinate in `[0, 1)`.
    pub fn point(&self, index: u32) -> Vec<f64> {
        self.raw(index)
            .enumerate()
            .map(|(d, x)| {
                let x = match self.scramble {
                    Some(seed) => owen_scramble(x, mix64(seed ^ mix64(d as u64 + 1))),
                    None => x,
                };
                x as f64 * SCALE
            })
            .collect()
    }
}

fn parse_row(row: &str) -> Result<[u32; BITS]> {
    let bad = || Error::Format(format!("bad direction-number row '{row}'"));
    let nums: Vec<u32> = row
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (s, a) = (*nums.get(1).ok_or_else(bad)? as usize, *nums.get(2).ok_or_else(bad)?);
    let m = &nums[3..];
    if s == 0 || m.len() != s {
        return Err(bad());
    }
    let mut v = [0u32; BITS];
    for j in 0..BITS {
        v[j] = if j < s {
            m[j] << (BITS - 1 - j)
        } else {
            let mut x = v[j - s] ^ (v[j - s] >> s);
            for k in 1..s {
                if (a >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[j - k];
                }
            }
            x
        };
    }
    Ok(v)
}

/// Nested uniform scramble: bit `b` (counting from the most significant) is
/// flipped according to a hash of the `b` bits above it.
fn owen_scramble(x: u32, key: u64) -> u32 {
    let mut flips = 0u32;
    for depth in 0..BITS {
        let prefix = if depth == 0 { 0 } else { (x >> (BITS - depth)) as u64 };
        let h = mix64(key ^ mix64(((depth as u64) << 32) | prefix));
        if h & 1 == 1 {
            flips |= 1 << (BITS - 1 - depth);
        }
    }
    x ^ flips
}

/// `n` five-dimensional points starting at index 0. `seed = None` disables
/// scrambling.
pub fn sobol_scrambled(n: usize, dim: usize, seed: Option<u64>) -> Result<Vec<[f64; 5]>> {
    if dim != 5 {
        return Err(Error::Argument(format!("only 5-dimensional sampling is supported, got {dim}")));
    }
    if n == 0 || n > u32::MAX as usize {
        return Err(Error::Argument(format!("point count {n} out of range")));
    }
    let s = Sobol::new(5, seed)?;
    Ok((0..n as u32)
        .map(|i| {
            let p = s.point(i);
            [p[0], p[1], p[2], p[3], p[4]]
        })
        .collect())
}
