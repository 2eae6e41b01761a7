//! Bijections between process indices `1..=N(N+1)/2` and upper-triangular
//! cells `(i, j)`, `1 <= i <= j <= N`, together with the induced index
//! distance, the neighbour count and the fiber profile.
//!
//! All public coordinates are 1-based. Cells with `i > j` are read as `(j, i)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::FillingError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillingKind {
    /// Main diagonal first, then each superdiagonal, each top to bottom.
    Diagonal,
    /// Row by row, left to right.
    RowWise,
    /// Explicit permutation table.
    Custom,
}

impl FillingKind {
    pub fn name(self) -> &'static str {
        match self {
            FillingKind::Diagonal => "diagonal",
            FillingKind::RowWise => "rowwise",
            FillingKind::Custom => "custom",
        }
    }
}

impl fmt::Display for FillingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingMap {
    n: usize,
    kind: FillingKind,
    /// `forward[m - 1]` is the 0-based cell receiving `Z_m`.
    forward: Vec<(u32, u32)>,
    /// `inverse[i * n + j]` is `m` for the cell, stored for both orientations.
    inverse: Vec<u32>,
}

pub fn triangle_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Closed-form inverse of the diagonal filling.
pub fn diagonal_inverse(n: usize, i: usize, j: usize) -> u64 {
    let (n, i, j) = (n as u64, i as u64, j as u64);
    let off = i.abs_diff(j);
    n * (n + 1) / 2 - (n - off) * (n - off + 1) / 2 + i.min(j)
}

impl FillingMap {
    pub fn diagonal(n: usize) -> Result<Self, FillingError> {
        let forward = (0..n)
            .flat_map(|off| (0..n - off).map(move |i| (i as u32, (i + off) as u32)))
            .collect();
        let map = Self::from_forward(n, FillingKind::Diagonal, forward)?;
        debug_assert!(map.forward.iter().enumerate().all(|(m, &(i, j))| {
            diagonal_inverse(n, i as usize + 1, j as usize + 1) == m as u64 + 1
        }));
        Ok(map)
    }

    pub fn row_wise(n: usize) -> Result<Self, FillingError> {
        let forward = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i as u32, j as u32)))
            .collect();
        Self::from_forward(n, FillingKind::RowWise, forward)
    }

    /// Builds a custom filling from `(m, i, j)` triples (1-based).
    pub fn custom(n: usize, entries: &[(u64, usize, usize)]) -> Result<Self, FillingError> {
        let len = triangle_len(n);
        if entries.len() != len {
            return Err(FillingError::NotBijective(format!(
                "expected {len} entries for N = {n}, got {}",
                entries.len()
            )));
        }
        let mut forward = vec![None; len];
        for &(m, i, j) in entries {
            if m == 0 || m > len as u64 {
                return Err(FillingError::IndexOutOfRange { m, max: len as u64 });
            }
            if i == 0 || j == 0 || i > n || j > n {
                return Err(FillingError::CellOutOfRange { i, j, n });
            }
            let slot = &mut forward[m as usize - 1];
            if slot.is_some() {
                return Err(FillingError::NotBijective(format!("index {m} appears twice")));
            }
            let (a, b) = (i.min(j) - 1, i.max(j) - 1);
            *slot = Some((a as u32, b as u32));
        }
        let forward = forward.into_iter().map(|c| c.unwrap()).collect();
        Self::from_forward(n, FillingKind::Custom, forward)
    }

    /// Parses the text format: one `m i j` line per process index.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_custom(text: &str) -> Result<Self, FillingError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |msg: String| FillingError::Parse {
                line: lineno + 1,
                msg,
            };
            if fields.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, got {}", fields.len())));
            }
            let m: u64 = fields[0]
                .parse()
                .map_err(|e| parse_err(format!("bad index {:?}: {e}", fields[0])))?;
            let i: usize = fields[1]
                .parse()
                .map_err(|e| parse_err(format!("bad row {:?}: {e}", fields[1])))?;
            let j: usize = fields[2]
                .parse()
                .map_err(|e| parse_err(format!("bad column {:?}: {e}", fields[2])))?;
            entries.push((m, i, j));
        }
        let len = entries.len();
        let n = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
        if n == 0 || triangle_len(n) != len {
            return Err(FillingError::NotBijective(format!(
                "{len} entries is not a triangular number"
            )));
        }
        Self::custom(n, &entries)
    }

    pub fn load_custom(path: &Path) -> Result<Self, FillingError> {
        let text = std::fs::read_to_string(path).map_err(|e| FillingError::Parse {
            line: 0,
            msg: format!("{}: {e}", path.display()),
        })?;
        Self::parse_custom(&text)
    }

    /// Renders the map in the custom file format.
    pub fn to_custom_text(&self) -> String {
        let mut out = String::with_capacity(self.forward.len() * 12);
        for (m, &(i, j)) in self.forward.iter().enumerate() {
            out.push_str(&format!("{} {} {}\n", m + 1, i + 1, j + 1));
        }
        out
    }

    fn from_forward(
        n: usize,
        kind: FillingKind,
        forward: Vec<(u32, u32)>,
    ) -> Result<Self, FillingError> {
        if n == 0 {
            return Err(FillingError::ZeroDimension);
        }
        let mut inverse = vec![0u32; n * n];
        for (m, &(i, j)) in forward.iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            if i > j || j >= n {
                return Err(FillingError::CellOutOfRange {
                    i: i + 1,
                    j: j + 1,
                    n,
                });
            }
            if inverse[i * n + j] != 0 {
                return Err(FillingError::NotBijective(format!(
                    "cell ({}, {}) receives two indices",
                    i + 1,
                    j + 1
                )));
            }
            inverse[i * n + j] = m as u32 + 1;
            inverse[j * n + i] = m as u32 + 1;
        }
        Ok(FillingMap {
            n,
            kind,
            forward,
            inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FillingKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn phi(&self, m: u64) -> Result<(usize, usize), FillingError> {
        let max = self.forward.len() as u64;
        if m == 0 || m > max {
            return Err(FillingError::IndexOutOfRange { m, max });
        }
        let (i, j) = self.forward[m as usize - 1];
        Ok((i as usize + 1, j as usize + 1))
    }

    pub fn phi_inv(&self, i: usize, j: usize) -> Result<u64, FillingError> {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(FillingError::CellOutOfRange { i, j, n: self.n });
        }
        Ok(self.inverse[(i - 1) * self.n + (j - 1)] as u64)
    }

    /// 0-based lookup without range checks beyond slice indexing.
    #[inline]
    pub(crate) fn index0(&self, i: usize, j: usize) -> usize {
        self.inverse[i * self.n + j] as usize
    }

    pub fn distance(&self, a: (usize, usize), b: (usize, usize)) -> Result<u64, FillingError> {
        Ok(self.phi_inv(a.0, a.1)?.abs_diff(self.phi_inv(b.0, b.1)?))
    }

    /// Number of consecutive process steps landing on horizontally or
    /// vertically adjacent cells.
    pub fn neighbor_count(&self) -> u64 {
        self.forward
            .windows(2)
            .filter(|w| {
                let ((i, j), (k, l)) = (w[0], w[1]);
                (i == k && j.abs_diff(l) == 1) || (j == l && i.abs_diff(k) == 1)
            })
            .count() as u64
    }

    /// For every distance `n`, the number of `x` with `|(i,x) - (x,j)| = n`.
    pub fn fiber_profile(&self, i: usize, j: usize) -> Result<BTreeMap<u64, usize>, FillingError> {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(FillingError::CellOutOfRange { i, j, n: self.n });
        }
        let mut profile = BTreeMap::new();
        for x in 0..self.n {
            let d = (self.index0(i - 1, x) as u64).abs_diff(self.index0(x, j - 1) as u64);
            *profile.entry(d).or_insert(0) += 1;
        }
        Ok(profile)
    }

    /// Largest fiber over distances `n >= 1` for the pair `(i, j)` (0-based).
    pub(crate) fn max_fiber0(&self, i: usize, j: usize, scratch: &mut Vec<u64>) -> usize {
        scratch.clear();
        scratch.extend((0..self.n).filter_map(|x| {
            let d = (self.index0(i, x) as u64).abs_diff(self.index0(x, j) as u64);
            (d > 0).then_some(d)
        }));
        scratch.sort_unstable();
        let mut best = 0;
        let mut run = 0;
        for k in 0..scratch.len() {
            run = if k > 0 && scratch[k] == scratch[k - 1] {
                run + 1
            } else {
                1
            };
            best = usize::max(best, run);
        }
        best
    }
}
