//! Function tables over the hypercube `{0,1}^d` and hypergrid `[N]^d`,
//! together with the coordinatewise partial order.
//!
//! Hypercube points are packed bit masks (`d <= 26`), so `x <= y` in the
//! partial order iff `x & y == x`. Hypergrid points are digit vectors with
//! coordinate 0 stored as the least significant digit of the table index.

use std::fmt;
use std::io::{Read, Write};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported hypercube dimension. Tables are fully materialized, so
/// this caps memory at 2^26 values.
pub const MAX_CUBE_DIM: usize = 26;

/// The domain a [`FunctionTable`] is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "domain_kind", rename_all = "snake_case")]
pub enum DomainKind {
    Hypercube { d: usize },
    Hypergrid { d: usize, n: usize },
}

impl DomainKind {
    pub fn dim(&self) -> usize {
        match self {
            DomainKind::Hypercube { d } => *d,
            DomainKind::Hypergrid { d, .. } => *d,
        }
    }

    /// Number of points in the domain.
    pub fn size(&self) -> usize {
        match self {
            DomainKind::Hypercube { d } => 1usize << d,
            DomainKind::Hypergrid { d, n } => n.pow(*d as u32),
        }
    }
}

/// A point of the hypercube (packed mask) or hypergrid (digit vector).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Cube(u32),
    Grid(Vec<u16>),
}

impl Point {
    /// Hamming weight of a cube point; coordinate sum of a grid point.
    pub fn weight(&self) -> u32 {
        match self {
            Point::Cube(m) => m.count_ones(),
            Point::Grid(v) => v.iter().map(|&c| c as u32).sum(),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Cube(m) => write!(f, "{m}"),
            Point::Grid(v) => {
                let s: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", s.join(","))
            }
        }
    }
}

/// True iff `x <= y` coordinatewise. Errors on mismatched domains.
pub fn is_comparable(x: &Point, y: &Point) -> Result<bool> {
    match (x, y) {
        (Point::Cube(a), Point::Cube(b)) => Ok(a & b == *a),
        (Point::Grid(a), Point::Grid(b)) => {
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch(format!(
                    "grid points of dimension {} vs {}",
                    a.len(),
                    b.len()
                )));
            }
            Ok(a.iter().zip(b).all(|(ai, bi)| ai <= bi))
        }
        _ => Err(Error::DomainMismatch(
            "cannot compare hypercube and hypergrid points".into(),
        )),
    }
}

/// Domination check on raw table indices (both interpreted in `dom`).
pub fn index_dominates(dom: &DomainKind, lo: usize, hi: usize) -> bool {
    match dom {
        DomainKind::Hypercube { .. } => lo & hi == lo,
        DomainKind::Hypergrid { d, n } => {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..*d {
                if a % n > b % n {
                    return false;
                }
                a /= n;
                b /= n;
            }
            true
        }
    }
}

/// An explicit `[r]`-valued function on the hypercube or hypergrid.
///
/// Immutable after construction; all operations on it are pure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionTable {
    #[serde(flatten)]
    domain: DomainKind,
    r: u32,
    values: Vec<u8>,
}

impl FunctionTable {
    pub fn new_hypercube(d: usize, r: u32, values: Vec<u8>) -> Result<Self> {
        Self::new(DomainKind::Hypercube { d }, r, values)
    }

    pub fn new_hypergrid(d: usize, n: usize, r: u32, values: Vec<u8>) -> Result<Self> {
        Self::new(DomainKind::Hypergrid { d, n }, r, values)
    }

    pub fn new(domain: DomainKind, r: u32, values: Vec<u8>) -> Result<Self> {
        if let DomainKind::Hypercube { d } = domain {
            if d > MAX_CUBE_DIM {
                return Err(Error::Budget(format!(
                    "hypercube dimension {d} exceeds cap {MAX_CUBE_DIM}"
                )));
            }
        }
        if let DomainKind::Hypergrid { n, .. } = domain {
            if n == 0 {
                return Err(Error::InvalidParameter("hypergrid N must be >= 1".into()));
            }
        }
        if r < 2 || r > 256 {
            return Err(Error::InvalidParameter(format!(
                "image size r={r} out of supported range 2..=256"
            )));
        }
        if values.len() != domain.size() {
            return Err(Error::InvalidParameter(format!(
                "table length {} does not match domain size {}",
                values.len(),
                domain.size()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| (v as u32) >= r) {
            return Err(Error::InvalidParameter(format!(
                "table value {v} out of range [0,{r})"
            )));
        }
        Ok(FunctionTable { domain, r, values })
    }

    /// Build a table by evaluating `f` at every domain index.
    pub fn from_fn(domain: DomainKind, r: u32, f: impl Fn(usize) -> u8) -> Result<Self> {
        let values = (0..domain.size()).map(f).collect();
        Self::new(domain, r, values)
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn value_at(&self, idx: usize) -> u8 {
        self.values[idx]
    }

    pub fn point_at(&self, idx: usize) -> Point {
        match self.domain {
            DomainKind::Hypercube { .. } => Point::Cube(idx as u32),
            DomainKind::Hypergrid { d, n } => {
                let mut v = Vec::with_capacity(d);
                let mut rem = idx;
                for _ in 0..d {
                    v.push((rem % n) as u16);
                    rem /= n;
                }
                Point::Grid(v)
            }
        }
    }

    pub fn index_of(&self, p: &Point) -> Result<usize> {
        match (&self.domain, p) {
            (DomainKind::Hypercube { d }, Point::Cube(m)) => {
                if (*m as usize) >> d != 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "point {m} outside {{0,1}}^{d}"
                    )));
                }
                Ok(*m as usize)
            }
            (DomainKind::Hypergrid { d, n }, Point::Grid(v)) => {
                if v.len() != *d {
                    return Err(Error::DimensionMismatch(format!(
                        "grid point of dimension {} in [N]^{}",
                        v.len(),
                        d
                    )));
                }
                let mut idx = 0usize;
                for &c in v.iter().rev() {
                    if c as usize >= *n {
                        return Err(Error::InvalidParameter(format!(
                            "coordinate {c} outside [{n}]"
                        )));
                    }
                    idx = idx * n + c as usize;
                }
                Ok(idx)
            }
            _ => Err(Error::DomainMismatch(
                "point kind does not match table domain".into(),
            )),
        }
    }

    pub fn value(&self, p: &Point) -> Result<u8> {
        Ok(self.values[self.index_of(p)?])
    }

    /// The Boolean threshold table `1(f(x) >= t)`.
    pub fn threshold(&self, t: u32) -> Result<FunctionTable> {
        FunctionTable::new(
            self.domain,
            2,
            self.values
                .iter()
                .map(|&v| u8::from(v as u32 >= t))
                .collect(),
        )
    }

    /// JSON form `{d, r, domain_kind, N?, values: [...]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: FunctionTable = serde_json::from_str(s)?;
        // Re-validate: serde bypasses the constructor.
        FunctionTable::new(t.domain, t.r, t.values)
    }

    /// Raw binary form: magic `KMFT`, version byte, kind byte (0 = cube,
    /// 1 = grid), then d, N, r as little-endian u32, then one value byte per
    /// point in index order.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"KMFT")?;
        w.write_all(&[1u8])?;
        let (kind, d, n) = match self.domain {
            DomainKind::Hypercube { d } => (0u8, d as u32, 0u32),
            DomainKind::Hypergrid { d, n } => (1u8, d as u32, n as u32),
        };
        w.write_all(&[kind])?;
        w.write_all(&d.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&self.r.to_le_bytes())?;
        w.write_all(&self.values)?;
        Ok(())
    }

    pub fn read_binary(rd: &mut impl Read) -> Result<Self> {
        let mut head = [0u8; 18];
        rd.read_exact(&mut head)?;
        if &head[0..4] != b"KMFT" || head[4] != 1 {
            return Err(Error::InvalidParameter(
                "bad magic or version in binary table".into(),
            ));
        }
        let d = u32::from_le_bytes(head[6..10].try_into().unwrap()) as usize;
        let n = u32::from_le_bytes(head[10..14].try_into().unwrap()) as usize;
        let r = u32::from_le_bytes(head[14..18].try_into().unwrap());
        let domain = match head[5] {
            0 => DomainKind::Hypercube { d },
            1 => DomainKind::Hypergrid { d, n },
            k => {
                return Err(Error::InvalidParameter(format!(
                    "unknown domain kind byte {k}"
                )))
            }
        };
        let mut values = vec![0u8; domain.size()];
        rd.read_exact(&mut values)?;
        FunctionTable::new(domain, r, values)
    }
}

/// Fraction of points where `f` and `g` disagree, as an exact rational.
pub fn hamming_distance(f: &FunctionTable, g: &FunctionTable) -> Result<Rational64> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(
            "hamming distance requires identical domains".into(),
        ));
    }
    let diff = f
        .values
        .iter()
        .zip(&g.values)
        .filter(|(a, b)| a != b)
        .count();
    Ok(Rational64::new(diff as i64, f.len() as i64))
}
