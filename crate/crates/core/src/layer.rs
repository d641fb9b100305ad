//! Weight-sharing schemes: the sparse connectivity of a graph convolution.
//!
//! Each triple `(out, in, w)` connects input neuron `in` to output neuron
//! `out` through shared weight `w`. By default the kernel is centered on the
//! output neuron; [`WeightSharingScheme::transpose`] gives the other
//! convention.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::propagation::PlacementMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub out: usize,
    pub input: usize,
    pub weight: usize,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.out, self.input, self.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSharingScheme {
    n: usize,
    k: usize,
    transposed: bool,
    triples: Vec<Triple>,
}

impl WeightSharingScheme {
    /// Validates and canonicalizes (sorts by `(out, weight)`) a scheme.
    ///
    /// Every vertex needs its `(v, v, 0)` triple and `(out, in)` pairs must
    /// be unique. In the default orientation each `(out, weight)` pair is
    /// unique as well.
    pub fn new(n: usize, k: usize, transposed: bool, mut triples: Vec<Triple>) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("a scheme needs at least one weight"));
        }
        for t in &triples {
            if t.out >= n || t.input >= n {
                return Err(Error::param(format!(
                    "triple ({t}) has a vertex >= n = {n}"
                )));
            }
            if t.weight >= k {
                return Err(Error::param(format!(
                    "triple ({t}) has weight index >= K = {k}"
                )));
            }
        }
        triples.sort_unstable_by_key(|t| (t.out, t.weight, t.input));

        let mut pairs: Vec<(usize, usize)> = triples.iter().map(|t| (t.out, t.input)).collect();
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!(
                "input {} feeds output {} twice",
                w[0].1, w[0].0
            )));
        }
        if !transposed {
            if let Some(w) = triples
                .windows(2)
                .find(|w| (w[0].out, w[0].weight) == (w[1].out, w[1].weight))
            {
                return Err(Error::param(format!(
                    "weight {} used twice at output {}",
                    w[0].weight, w[0].out
                )));
            }
        }
        let mut has_center = vec![false; n];
        for t in &triples {
            if t.out == t.input && t.weight == 0 {
                has_center[t.out] = true;
            }
        }
        if let Some(v) = has_center.iter().position(|&c| !c) {
            return Err(Error::param(format!("missing center triple ({v} {v} 0)")));
        }
        Ok(WeightSharingScheme {
            n,
            k,
            transposed,
            triples,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Swaps the roles of input and output neurons.
    pub fn transpose(&self) -> WeightSharingScheme {
        let triples = self
            .triples
            .iter()
            .map(|t| Triple {
                out: t.input,
                input: t.out,
                weight: t.weight,
            })
            .collect();
        WeightSharingScheme::new(self.n, self.k, !self.transposed, triples)
            .expect("transposing preserves validity")
    }

    /// Number of triples per output vertex.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for t in &self.triples {
            d[t.out] += 1;
        }
        d
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.transposed {
            writeln!(out, "{} {} transposed", self.n, self.k).unwrap();
        } else {
            writeln!(out, "{} {}", self.n, self.k).unwrap();
        }
        for t in &self.triples {
            writeln!(out, "{t}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<WeightSharingScheme> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `n K` header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, k, transposed) = match fields.as_slice() {
            [n, k] => (num(n, hline)?, num(k, hline)?, false),
            [n, k, "transposed"] => (num(n, hline)?, num(k, hline)?, true),
            _ => {
                return Err(Error::parse(
                    hline,
                    "expected header `n K` or `n K transposed`",
                ))
            }
        };

        let mut triples = Vec::new();
        for (line, content) in lines {
            let f: Vec<&str> = content.split_whitespace().collect();
            let [o, i, w] = f.as_slice() else {
                return Err(Error::parse(line, "expected `out in idx`"));
            };
            let t = Triple {
                out: num(o, line)?,
                input: num(i, line)?,
                weight: num(w, line)?,
            };
            if t.out >= n || t.input >= n {
                return Err(Error::VertexRange {
                    line,
                    vertex: t.out.max(t.input),
                    n,
                });
            }
            if t.weight >= k {
                return Err(Error::parse(
                    line,
                    format!("weight index {} >= K = {k}", t.weight),
                ));
            }
            triples.push(t);
        }
        WeightSharingScheme::new(n, k, transposed, triples)
            .map_err(|e| Error::parse(hline, e.to_string()))
    }
}

fn num(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid number `{s}`")))
}

/// One triple `(c, v, i)` per surviving slot `i` of the placement at `c`.
pub fn build_scheme(pm: &PlacementMap) -> Result<WeightSharingScheme> {
    let mut triples = Vec::new();
    for (c, p) in pm.placements().iter().enumerate() {
        let p = p.as_ref().ok_or(Error::Incomplete(c))?;
        triples.extend(p.support().map(|(i, v)| Triple {
            out: c,
            input: v,
            weight: i,
        }));
    }
    WeightSharingScheme::new(pm.n(), pm.k(), false, triples)
}

/// Grid offset `(row delta, column delta)` of a weight.
pub type Offset = (isize, isize);

/// Offsets of the 4-connected plus kernel.
pub const PLUS_OFFSETS: [Offset; 5] = [(0, 0), (-1, 0), (0, -1), (0, 1), (1, 0)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridWitness {
    /// A triple whose offset disagrees with its weight's offset.
    Triple(Triple),
    /// An in-bounds offset with no triple at this output.
    Missing {
        out: usize,
        weight: usize,
        offset: Offset,
    },
    /// More weights than distinct plus-kernel offsets.
    TooManyWeights(usize),
}

impl fmt::Display for GridWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridWitness::Triple(t) => write!(f, "triple ({t})"),
            GridWitness::Missing {
                out,
                weight,
                offset,
            } => {
                write!(f, "output {out} lacks weight {weight} at offset {offset:?}")
            }
            GridWitness::TooManyWeights(k) => write!(f, "{k} weights exceed the 5 grid offsets"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridReport {
    /// Offset assigned to each weight index.
    pub offsets: Vec<Offset>,
    pub witness: Option<GridWitness>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks that a scheme over the `rows x cols` grid is a classical
/// convolution: each weight index has one fixed offset among
/// [`PLUS_OFFSETS`], distinct weights have distinct offsets, every triple
/// follows its weight's offset, and every in-bounds offset is realized at
/// every output.
///
/// Offsets are taken as the majority over each weight's triples, so a local
/// perturbation is reported through one of the perturbed triples.
pub fn verify_grid_equivalence(
    s: &WeightSharingScheme,
    rows: usize,
    cols: usize,
) -> Result<GridReport> {
    if rows * cols != s.n {
        return Err(Error::param(format!(
            "grid {rows}x{cols} has {} vertices, scheme has {}",
            rows * cols,
            s.n
        )));
    }
    let pos = |v: usize| ((v / cols) as isize, (v % cols) as isize);
    let offset_of = |t: &Triple| {
        let (or, oc) = pos(t.out);
        let (ir, ic) = pos(t.input);
        (ir - or, ic - oc)
    };

    if s.k > PLUS_OFFSETS.len() {
        return Ok(GridReport {
            offsets: Vec::new(),
            witness: Some(GridWitness::TooManyWeights(s.k)),
        });
    }

    let mut votes: Vec<BTreeMap<Offset, usize>> = vec![BTreeMap::new(); s.k];
    for t in &s.triples {
        *votes[t.weight].entry(offset_of(t)).or_default() += 1;
    }
    let mut offsets: Vec<Option<Offset>> = votes
        .iter()
        .map(|v| {
            v.iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&o, _)| o)
        })
        .collect();

    let first_triple = |w: usize| s.triples.iter().find(|t| t.weight == w).copied();
    // Offsets must be plus-kernel offsets and pairwise distinct.
    let mut used: Vec<Offset> = Vec::new();
    for w in 0..s.k {
        if let Some(o) = offsets[w] {
            if !PLUS_OFFSETS.contains(&o) || used.contains(&o) {
                let t = first_triple(w).expect("weight has triples");
                return Ok(GridReport {
                    offsets: offsets.iter().flatten().copied().collect(),
                    witness: Some(GridWitness::Triple(t)),
                });
            }
            used.push(o);
        }
    }
    for o in offsets.iter_mut().filter(|o| o.is_none()) {
        let free = PLUS_OFFSETS
            .iter()
            .find(|c| !used.contains(c))
            .copied()
            .expect("k <= 5 leaves a free offset");
        used.push(free);
        *o = Some(free);
    }
    let offsets: Vec<Offset> = offsets.into_iter().flatten().collect();

    if let Some(t) = s.triples.iter().find(|t| offset_of(t) != offsets[t.weight]) {
        return Ok(GridReport {
            offsets,
            witness: Some(GridWitness::Triple(*t)),
        });
    }

    let mut present = vec![vec![false; s.k]; s.n];
    for t in &s.triples {
        present[t.out][t.weight] = true;
    }
    for (out, present) in present.iter().enumerate() {
        let (r, c) = pos(out);
        for (w, &(dr, dc)) in offsets.iter().enumerate() {
            let (nr, nc) = (r + dr, c + dc);
            let inside = nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < cols;
            if inside && !present[w] {
                return Ok(GridReport {
                    offsets,
                    witness: Some(GridWitness::Missing {
                        out,
                        weight: w,
                        offset: (dr, dc),
                    }),
                });
            }
        }
    }

    Ok(GridReport {
        offsets,
        witness: None,
    })
}
