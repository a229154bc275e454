//! Example oracles EX(f, mu) and noisy oracles EX^eta with replayable,
//! counter-based randomness.
//!
//! All randomness is derived from a keyed mixing function of
//! (seed, stream, index), so disjoint index ranges can be drawn concurrently
//! and lazily evaluated functions see consistent per-point random values
//! without materializing tables.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::{DomainKind, FunctionTable, Point};

#[inline]
fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based PRF: a 64-bit value keyed by (seed, stream, index).
#[inline]
pub fn prf(seed: u64, stream: u64, index: u64) -> u64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    h = mix(h ^ stream.wrapping_mul(0xff51_afd7_ed55_8ccd));
    mix(h ^ index.wrapping_mul(0xc4ce_b9fe_1a85_ec53))
}

/// Uniform f64 in [0, 1) from the PRF.
#[inline]
pub fn prf_f64(seed: u64, stream: u64, index: u64) -> f64 {
    (prf(seed, stream, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased-enough draw from [0, n) via 128-bit multiply.
#[inline]
pub fn prf_below(seed: u64, stream: u64, index: u64, n: u64) -> u64 {
    ((prf(seed, stream, index) as u128 * n as u128) >> 64) as u64
}

// Stream ids reserved by the oracle; other modules use ids >= 1 << 32.
const STREAM_CUBE_POINT: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_GRID_BASE: u64 = 16;

/// A labeled example (x, f(x)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub point: Point,
    pub label: u8,
}

impl LabeledExample {
    /// Boolean label in ±1 (value 1 -> +1).
    pub fn label_pm1(&self) -> f64 {
        if self.label == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// The labeled-function source behind an oracle.
#[derive(Clone)]
pub enum Source {
    Table(Arc<FunctionTable>),
    /// Lazily evaluated function; `r` must be supplied alongside.
    Callable(Arc<dyn Fn(&Point) -> u8 + Send + Sync>),
}

/// The point distribution an oracle samples from.
#[derive(Clone)]
pub enum Distribution {
    UniformHypercube { d: usize },
    UniformHypergrid { d: usize, n: usize },
    /// Counter-based custom sampler (e.g. a pushforward through a block map);
    /// receives (seed, index) and must be deterministic in them.
    Custom(Arc<dyn Fn(u64, u64) -> Point + Send + Sync>),
}

/// Configuration of an example oracle EX^eta(f, mu).
#[derive(Clone)]
pub struct OracleConfig {
    pub source: Source,
    pub distribution: Distribution,
    pub r: u32,
    pub eta: f64,
    pub seed: u64,
}

impl OracleConfig {
    /// Noiseless uniform oracle over the table's own domain.
    pub fn for_table(f: Arc<FunctionTable>, seed: u64) -> Self {
        let distribution = match f.domain() {
            DomainKind::Hypercube { d } => Distribution::UniformHypercube { d },
            DomainKind::Hypergrid { d, n } => Distribution::UniformHypergrid { d, n },
        };
        OracleConfig {
            r: f.r(),
            source: Source::Table(f),
            distribution,
            eta: 0.0,
            seed,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!(
                "noise rate eta = {} must lie in [0, 1/2)",
                self.eta
            )));
        }
        // Random classification noise is defined for Boolean labels only.
        if self.eta > 0.0 && self.r != 2 {
            return Err(Error::UnsupportedNoise(format!(
                "eta = {} with r = {}: label-flip noise requires r = 2",
                self.eta, self.r
            )));
        }
        Ok(())
    }

    fn sample_point(&self, index: u64) -> Point {
        match &self.distribution {
            Distribution::UniformHypercube { d } => {
                Point::Cube((prf(self.seed, STREAM_CUBE_POINT, index) & ((1 << d) - 1)) as u32)
            }
            Distribution::UniformHypergrid { d, n } => Point::Grid(
                (0..*d)
                    .map(|c| {
                        prf_below(self.seed, STREAM_GRID_BASE + c as u64, index, *n as u64) as u16
                    })
                    .collect(),
            ),
            Distribution::Custom(f) => f(self.seed, index),
        }
    }

    fn label(&self, p: &Point, index: u64) -> Result<u8> {
        let mut label = match &self.source {
            Source::Table(t) => t.value(p)?,
            Source::Callable(f) => f(p),
        };
        if self.eta > 0.0 && prf_f64(self.seed, STREAM_NOISE, index) < self.eta {
            label = 1 - label;
        }
        Ok(label)
    }

    /// Draw the examples with indices [start, start + count); deterministic
    /// given (config, index range).
    pub fn draw_range(&self, start: u64, count: u64) -> Result<Vec<LabeledExample>> {
        self.validate()?;
        (start..start + count)
            .map(|i| {
                let point = self.sample_point(i);
                let label = self.label(&point, i)?;
                Ok(LabeledExample { point, label })
            })
            .collect()
    }

    /// Draw s i.i.d. examples (indices 0..s).
    pub fn draw(&self, s: u64) -> Result<Vec<LabeledExample>> {
        self.draw_range(0, s)
    }
}

/// CSV dump: `point,label` with the point rendered as its table index
/// (cube mask or base-N digits value).
pub fn write_examples_csv(
    examples: &[LabeledExample],
    dom: &DomainKind,
    w: &mut impl Write,
) -> Result<()> {
    writeln!(w, "point,label")?;
    for ex in examples {
        let idx = match (&ex.point, dom) {
            (Point::Cube(m), _) => *m as usize,
            (Point::Grid(v), DomainKind::Hypergrid { n, .. }) => {
                v.iter().rev().fold(0usize, |acc, &c| acc * n + c as usize)
            }
            _ => {
                return Err(Error::DomainMismatch(
                    "grid point with non-grid domain".into(),
                ))
            }
        };
        writeln!(w, "{},{}", idx, ex.label)?;
    }
    Ok(())
}
