//! Quivers, dimension vectors, slope stability and Kronecker root
//! arithmetic.
//!
//! Everything here is exact: slopes are rationals compared by
//! cross-multiplication, the stability test sweeps integer sub-dimension
//! tuples, and root classification works on the integer Tits form
//! `d^2 + e^2 - m*d*e`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default cap on the size of the sub-dimension sweep in
/// [`BipartiteQuiver::is_generically_stable`].
pub const DEFAULT_SWEEP_CAP: u128 = 10_000_000;

/// A dimension vector: a map from vertex ids to non-negative integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionVector {
    entries: BTreeMap<String, u64>,
}

impl DimensionVector {
    pub fn new(entries: BTreeMap<String, u64>) -> Self {
        Self { entries }
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }

    pub fn get(&self, vertex: &str) -> Option<u64> {
        self.entries.get(vertex).copied()
    }

    pub fn entries(&self) -> &BTreeMap<String, u64> {
        &self.entries
    }

    /// `dim(d)`, the sum of all entries.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|&v| v == 0)
    }
}

/// A linear form `Theta` on dimension vectors, one integer per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeSpec {
    theta: BTreeMap<String, i64>,
}

impl SlopeSpec {
    pub fn new(theta: BTreeMap<String, i64>) -> Self {
        Self { theta }
    }

    pub fn theta_of(&self, d: &DimensionVector) -> Result<i128, Error> {
        let mut acc: i128 = 0;
        for (v, &dv) in d.entries() {
            let t = self
                .theta
                .get(v)
                .ok_or_else(|| Error::MissingVertex(v.clone()))?;
            acc += (*t as i128) * (dv as i128);
        }
        Ok(acc)
    }
}

/// `mu(d) = Theta(d) / dim(d)` as an exact rational.
pub fn slope(d: &DimensionVector, s: &SlopeSpec) -> Result<Ratio<i128>, Error> {
    if d.is_zero() {
        return Err(Error::ZeroVector);
    }
    let num = s.theta_of(d)?;
    Ok(Ratio::new(num, d.total() as i128))
}

/// A Kronecker dimension pair `(d, e)` for the quiver `K(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KroneckerPair {
    pub m: u64,
    pub d: u64,
    pub e: u64,
}

impl KroneckerPair {
    pub fn new(m: u64, d: u64, e: u64) -> Self {
        Self { m, d, e }
    }

    /// The Kronecker slope `d / (d + e)` for `Theta = (1, 0)`.
    pub fn slope(&self) -> Result<Ratio<i128>, Error> {
        if self.d == 0 && self.e == 0 {
            return Err(Error::ZeroVector);
        }
        Ok(Ratio::new(self.d as i128, (self.d + self.e) as i128))
    }

    /// The Tits form `<(d,e),(d,e)> = d^2 + e^2 - m*d*e`.
    pub fn tits_form(&self) -> i128 {
        let (m, d, e) = (self.m as i128, self.d as i128, self.e as i128);
        d * d + e * e - m * d * e
    }

    /// `dim M = 1 - d^2 - e^2 + d*e*m`.
    pub fn moduli_dimension(&self) -> i128 {
        1 - self.tits_form()
    }

    pub fn is_coprime(&self) -> bool {
        num_integer::gcd(self.d, self.e) == 1
    }
}

/// Root classification of a Kronecker pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootClass {
    Real,
    Imaginary,
    NotARoot,
}

/// A reflection move on Kronecker pairs.
///
/// `Swap` is `(d, e) -> (e, d)`; `Reflect` is `(d, e) -> (m*e - d, e)`.
/// Both are isomorphisms of the corresponding moduli spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    Swap,
    Reflect,
}

impl Move {
    pub fn apply(self, m: u64, d: i128, e: i128) -> (i128, i128) {
        match self {
            Move::Swap => (e, d),
            Move::Reflect => (m as i128 * e - d, e),
        }
    }
}

/// Classify `(d, e)` as a real root, an imaginary root or not a root.
///
/// Imaginary means the Tits form is non-positive, i.e. `e/d` lies in the
/// interval `[m1, m2]` around the slopes of the two eigendirections. Real
/// means the pair reflects down to a simple root.
pub fn classify_root(p: &KroneckerPair) -> RootClass {
    if p.tits_form() <= 0 {
        return RootClass::Imaginary;
    }
    let (rep, _) = normalize_kronecker(p);
    if (rep.d, rep.e) == (0, 1) || (rep.d, rep.e) == (1, 0) {
        RootClass::Real
    } else {
        RootClass::NotARoot
    }
}

/// Reduce `(d, e)` to its reflection-orbit representative.
///
/// Applies `Swap` and `Reflect` until either the imaginary fundamental
/// region `d <= e <= (m/2) d` is reached, a simple root appears, or no
/// move reduces `d + e` any further (so the pair is not a root). Returns
/// the representative together with the move list, in the order the moves
/// were applied to the input.
pub fn normalize_kronecker(p: &KroneckerPair) -> (KroneckerPair, Vec<Move>) {
    assert!(
        p.d != 0 || p.e != 0,
        "normalize_kronecker requires a nonzero pair"
    );
    let m = p.m;
    let (mut d, mut e) = (p.d as i128, p.e as i128);
    let mut moves = Vec::new();
    loop {
        if d > e {
            let (nd, ne) = Move::Swap.apply(m, d, e);
            moves.push(Move::Swap);
            d = nd;
            e = ne;
            continue;
        }
        if d == 0 {
            break;
        }
        // d <= e; fundamental region is 2e <= m*d.
        if 2 * e <= m as i128 * d {
            break;
        }
        // Swap then reflect: (d, e) -> (m*d - e, d).
        let cand = m as i128 * d - e;
        if cand < 0 {
            break;
        }
        // Outside the fundamental region this pair of moves strictly
        // decreases d + e.
        assert!(cand + d < d + e, "reflection failed to decrease d + e");
        moves.push(Move::Swap);
        moves.push(Move::Reflect);
        e = d;
        d = cand;
        if d > e {
            let (nd, ne) = Move::Swap.apply(m, d, e);
            moves.push(Move::Swap);
            d = nd;
            e = ne;
        }
    }
    (KroneckerPair::new(m, d as u64, e as u64), moves)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VertexSpec {
    id: String,
    dim: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuiverSpec {
    m: u64,
    sources: Vec<VertexSpec>,
    sinks: Vec<VertexSpec>,
    arrows: Vec<(String, String)>,
}

/// A bipartite quiver: sources, sinks, at most one arrow per pair, all
/// arrows source -> sink, with per-vertex arrow counts bounded by `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteQuiver {
    m: u64,
    sources: Vec<String>,
    sinks: Vec<String>,
    arrows: BTreeSet<(String, String)>,
    dims: DimensionVector,
}

impl BipartiteQuiver {
    pub fn new(
        m: u64,
        sources: Vec<(String, u64)>,
        sinks: Vec<(String, u64)>,
        arrows: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, Error> {
        let mut dims = BTreeMap::new();
        let mut src_ids = Vec::new();
        let mut sink_ids = Vec::new();
        for (id, dim) in sources {
            if dims.insert(id.clone(), dim).is_some() {
                return Err(Error::Invalid(format!("duplicate vertex id `{id}`")));
            }
            src_ids.push(id);
        }
        for (id, dim) in sinks {
            if dims.insert(id.clone(), dim).is_some() {
                return Err(Error::Invalid(format!("duplicate vertex id `{id}`")));
            }
            sink_ids.push(id);
        }
        let src_set: BTreeSet<&String> = src_ids.iter().collect();
        let sink_set: BTreeSet<&String> = sink_ids.iter().collect();
        let mut arrow_set = BTreeSet::new();
        for (s, t) in arrows {
            if !src_set.contains(&s) || !sink_set.contains(&t) {
                return Err(Error::Invalid(format!(
                    "arrow ({s}, {t}) is not source -> sink"
                )));
            }
            if !arrow_set.insert((s.clone(), t.clone())) {
                return Err(Error::Invalid(format!("duplicate arrow ({s}, {t})")));
            }
        }
        let q = Self {
            m,
            sources: src_ids,
            sinks: sink_ids,
            arrows: arrow_set,
            dims: DimensionVector::new(dims),
        };
        for s in &q.sources {
            if q.out_degree(s) > m as usize {
                return Err(Error::Invalid(format!(
                    "source `{s}` has more than m = {m} arrows"
                )));
            }
        }
        for t in &q.sinks {
            if q.in_degree(t) > m as usize {
                return Err(Error::Invalid(format!(
                    "sink `{t}` has more than m = {m} arrows"
                )));
            }
        }
        Ok(q)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn sinks(&self) -> &[String] {
        &self.sinks
    }

    pub fn arrows(&self) -> impl Iterator<Item = (&str, &str)> {
        self.arrows.iter().map(|(s, t)| (s.as_str(), t.as_str()))
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.sources.len() + self.sinks.len()
    }

    pub fn dims(&self) -> &DimensionVector {
        &self.dims
    }

    pub fn dim_of(&self, vertex: &str) -> u64 {
        self.dims.get(vertex).unwrap_or(0)
    }

    pub fn out_degree(&self, source: &str) -> usize {
        self.arrows.iter().filter(|(s, _)| s == source).count()
    }

    pub fn in_degree(&self, sink: &str) -> usize {
        self.arrows.iter().filter(|(_, t)| t == sink).count()
    }

    pub fn is_sink(&self, id: &str) -> bool {
        self.sinks.iter().any(|s| s == id)
    }

    /// Total source dimension `d` and total sink dimension `e`.
    pub fn dimension_type(&self) -> (u64, u64) {
        let d = self.sources.iter().map(|s| self.dim_of(s)).sum();
        let e = self.sinks.iter().map(|s| self.dim_of(s)).sum();
        (d, e)
    }

    /// Whether the quiver is connected through vertices of positive
    /// dimension.
    pub fn is_connected(&self) -> bool {
        let verts: Vec<&String> = self
            .sources
            .iter()
            .chain(self.sinks.iter())
            .filter(|v| self.dim_of(v) > 0)
            .collect();
        if verts.is_empty() {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![verts[0].clone()];
        seen.insert(verts[0].clone());
        while let Some(v) = stack.pop() {
            for (s, t) in &self.arrows {
                if self.dim_of(s) == 0 || self.dim_of(t) == 0 {
                    continue;
                }
                let other = if *s == v {
                    t
                } else if *t == v {
                    s
                } else {
                    continue;
                };
                if seen.insert(other.clone()) {
                    stack.push(other.clone());
                }
            }
        }
        seen.len() == verts.len()
    }

    /// Whether the positive-dimension part is a tree: connected with
    /// `|vertices| = |arrows| + 1`.
    pub fn is_tree(&self) -> bool {
        let nv = self
            .sources
            .iter()
            .chain(self.sinks.iter())
            .filter(|v| self.dim_of(v) > 0)
            .count();
        let na = self
            .arrows
            .iter()
            .filter(|(s, t)| self.dim_of(s) > 0 && self.dim_of(t) > 0)
            .count();
        self.is_connected() && nv == na + 1
    }

    /// The Euler form `<d, e> = sum_v d_v e_v - sum_{a: i -> j} d_i e_j`
    /// over this quiver shape.
    pub fn euler_form(&self, d: &DimensionVector, e: &DimensionVector) -> Result<i128, Error> {
        let verts: BTreeSet<&String> = self.sources.iter().chain(self.sinks.iter()).collect();
        let dkeys: BTreeSet<&String> = d.entries().keys().collect();
        let ekeys: BTreeSet<&String> = e.entries().keys().collect();
        if dkeys != verts || ekeys != verts {
            return Err(Error::VertexMismatch);
        }
        let mut acc: i128 = 0;
        for v in verts {
            acc += d.get(v).unwrap() as i128 * e.get(v).unwrap() as i128;
        }
        for (s, t) in &self.arrows {
            acc -= d.get(s).unwrap() as i128 * e.get(t).unwrap() as i128;
        }
        Ok(acc)
    }

    /// `dim M = 1 - <d, d>` for this quiver shape and its own dimensions.
    pub fn moduli_dimension(&self) -> Result<i128, Error> {
        Ok(1 - self.euler_form(&self.dims, &self.dims)?)
    }

    /// Decide (semi)stability of the generic representation.
    ///
    /// A subrepresentation is cut out by choosing a subspace `U_i` in each
    /// source; its minimal sink part is the span of the arrow images.
    /// Images of independent generic maps are in general position, so the
    /// sink dimension is `min(d_j, sum of incoming image ranks)`. The image
    /// rank along an arrow depends on how `U_i` meets the arrow's kernel,
    /// and the adversarial subspace may sit inside kernel intersections:
    /// the sweep enumerates, per source, every rank vector achievable
    /// against the generic kernel arrangement, then takes all combinations.
    /// Sink-only subrepresentations have slope 0 and never destabilize for
    /// `Theta = (1, 0)`.
    pub fn is_generically_stable(&self, strict: bool) -> Result<bool, Error> {
        self.is_generically_stable_capped(strict, DEFAULT_SWEEP_CAP)
            .map(|v| v.is_none())
    }

    /// As [`Self::is_generically_stable`] but returns the destabilizing
    /// source tuple (ids with chosen sub-dimensions) when one exists.
    pub fn is_generically_stable_capped(
        &self,
        strict: bool,
        cap: u128,
    ) -> Result<Option<Vec<(String, u64)>>, Error> {
        let live_sources: Vec<&String> =
            self.sources.iter().filter(|s| self.dim_of(s) > 0).collect();
        let live_sinks: Vec<&String> = self.sinks.iter().filter(|s| self.dim_of(s) > 0).collect();
        let total_d: u64 = live_sources.iter().map(|s| self.dim_of(s)).sum();
        let total_e: u64 = live_sinks.iter().map(|s| self.dim_of(s)).sum();
        if total_d == 0 {
            // Sink-only quiver: nothing in the sweep can destabilize.
            return Ok(None);
        }

        // Arrow targets per source, as indices into live_sinks.
        let source_sinks: Vec<Vec<usize>> = live_sources
            .iter()
            .map(|i| {
                live_sinks
                    .iter()
                    .enumerate()
                    .filter(|(_, j)| self.arrows.contains(&((**i).clone(), (**j).clone())))
                    .map(|(idx, _)| idx)
                    .collect()
            })
            .collect();
        let sink_dims: Vec<u64> = live_sinks.iter().map(|j| self.dim_of(j)).collect();

        // Every (sub-dimension, image ranks) pair a subspace of this source
        // can realize.
        let options: Vec<Vec<(u64, Vec<u64>)>> = live_sources
            .iter()
            .zip(source_sinks.iter())
            .map(|(i, targets)| {
                let tdims: Vec<u64> = targets.iter().map(|&j| sink_dims[j]).collect();
                source_rank_options(self.dim_of(i), &tdims)
            })
            .collect();

        let mut size: u128 = 1;
        for o in &options {
            size = size.saturating_mul(o.len() as u128);
            if size > cap {
                return Err(Error::SweepTooLarge { size, cap });
            }
        }

        let mut idx = vec![0usize; options.len()];
        loop {
            let sum_u: u64 = idx.iter().zip(options.iter()).map(|(&k, o)| o[k].0).sum();
            if sum_u > 0 {
                let mut v = vec![0u64; live_sinks.len()];
                for (i, &k) in idx.iter().enumerate() {
                    for (a, &j) in source_sinks[i].iter().enumerate() {
                        v[j] += options[i][k].1[a];
                    }
                }
                let mut sum_v: u64 = 0;
                let mut is_full = sum_u == total_d;
                for (j, &dj) in sink_dims.iter().enumerate() {
                    let vj = dj.min(v[j]);
                    sum_v += vj;
                    if vj != dj {
                        is_full = false;
                    }
                }
                if !(is_full && sum_v == total_e) {
                    // slope(u, v) >= mu  <=>  sum_u * (D + E) >= D * (sum_u + sum_v)
                    let lhs = sum_u as u128 * (total_d + total_e) as u128;
                    let rhs = total_d as u128 * (sum_u + sum_v) as u128;
                    let destabilizes = if strict { lhs >= rhs } else { lhs > rhs };
                    if destabilizes {
                        let witness = live_sources
                            .iter()
                            .zip(idx.iter().zip(options.iter()))
                            .filter(|(_, (&k, o))| o[k].0 > 0)
                            .map(|(s, (&k, o))| ((*s).clone(), o[k].0))
                            .collect();
                        return Ok(Some(witness));
                    }
                }
            }
            // Advance the mixed-radix counter over option indices.
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return Ok(None);
                }
                if idx[pos] + 1 < options[pos].len() {
                    idx[pos] += 1;
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }

    pub fn to_json(&self) -> String {
        let spec = QuiverSpec {
            m: self.m,
            sources: self
                .sources
                .iter()
                .map(|id| VertexSpec {
                    id: id.clone(),
                    dim: self.dim_of(id),
                })
                .collect(),
            sinks: self
                .sinks
                .iter()
                .map(|id| VertexSpec {
                    id: id.clone(),
                    dim: self.dim_of(id),
                })
                .collect(),
            arrows: self.arrows.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&spec).expect("quiver serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let spec: QuiverSpec =
            serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        Self::new(
            spec.m,
            spec.sources.into_iter().map(|v| (v.id, v.dim)).collect(),
            spec.sinks.into_iter().map(|v| (v.id, v.dim)).collect(),
            spec.arrows,
        )
    }
}

/// All pairs `(u, ranks)` a `u`-dimensional subspace of a `di`-dimensional
/// source can realize as image ranks along its arrows, given generic maps
/// to sinks of dimensions `sink_dims`.
///
/// The kernel of the arrow to a `d_j`-dimensional sink has codimension
/// `min(di, d_j)`, and the kernels are in general position. A subspace is
/// modelled by allocating dimension into common kernels of arrow subsets
/// (plus a generic remainder); an allocation is feasible when, for each
/// subset, the total allocated inside its common kernel fits. The rank
/// along an arrow is then the part of `u` outside that kernel, capped by
/// the kernel codimension.
fn source_rank_options(di: u64, sink_dims: &[u64]) -> Vec<(u64, Vec<u64>)> {
    let n = sink_dims.len();
    let codim: Vec<u64> = sink_dims.iter().map(|&dj| di.min(dj)).collect();
    // (arrow subset mask, dimension of its common kernel); mask 0 is the
    // generic remainder with capacity di.
    let mut buckets: Vec<(u32, u64)> = vec![(0, di)];
    for mask in 1u32..(1u32 << n) {
        let c: u64 = (0..n)
            .filter(|&a| mask >> a & 1 == 1)
            .map(|a| codim[a])
            .sum();
        if c < di {
            buckets.push((mask, di - c));
        }
    }

    let mut out: BTreeSet<(u64, Vec<u64>)> = BTreeSet::new();
    let mut t = vec![0u64; buckets.len()];
    loop {
        let total: u64 = t.iter().sum();
        let feasible = total <= di
            && buckets.iter().all(|&(mask, k)| {
                mask == 0 || {
                    let inside: u64 = buckets
                        .iter()
                        .zip(t.iter())
                        .filter(|((m2, _), _)| m2 & mask == mask)
                        .map(|(_, &tv)| tv)
                        .sum();
                    inside <= k
                }
            });
        if feasible {
            let ranks: Vec<u64> = (0..n)
                .map(|a| {
                    let killed: u64 = buckets
                        .iter()
                        .zip(t.iter())
                        .filter(|((m2, _), _)| m2 >> a & 1 == 1)
                        .map(|(_, &tv)| tv)
                        .sum();
                    (total - killed).min(codim[a])
                })
                .collect();
            out.insert((total, ranks));
        }
        let mut pos = 0;
        loop {
            if pos == t.len() {
                return out.into_iter().collect();
            }
            if t[pos] < buckets[pos].1 {
                t[pos] += 1;
                break;
            }
            t[pos] = 0;
            pos += 1;
        }
    }
}

/// The Kronecker Euler form `<(d,e),(d',e')> = d d' + e e' - m d e'`.
pub fn kronecker_euler_form(m: u64, a: (u64, u64), b: (u64, u64)) -> i128 {
    let (d, e) = (a.0 as i128, a.1 as i128);
    let (dp, ep) = (b.0 as i128, b.1 as i128);
    d * dp + e * ep - m as i128 * d * ep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(m: u64, nsinks: usize) -> BipartiteQuiver {
        BipartiteQuiver::new(
            m,
            vec![("i".into(), 1)],
            (0..nsinks).map(|k| (format!("j{k}"), 1)).collect(),
            (0..nsinks).map(|k| ("i".to_string(), format!("j{k}"))),
        )
        .unwrap()
    }

    #[test]
    fn kronecker_slopes() {
        assert_eq!(
            KroneckerPair::new(3, 1, 0).slope().unwrap(),
            Ratio::new(1, 1)
        );
        assert_eq!(
            KroneckerPair::new(3, 3, 4).slope().unwrap(),
            Ratio::new(3, 7)
        );
        assert_eq!(
            KroneckerPair::new(3, 2, 2).slope().unwrap(),
            Ratio::new(1, 2)
        );
    }

    #[test]
    fn slope_errors_on_zero() {
        let d = DimensionVector::from_pairs([("a".to_string(), 0)]);
        let s = SlopeSpec::new([("a".to_string(), 1)].into());
        assert!(matches!(slope(&d, &s), Err(Error::ZeroVector)));
    }

    #[test]
    fn euler_form_kronecker_values() {
        assert_eq!(kronecker_euler_form(3, (1, 0), (1, 0)), 1);
        assert_eq!(kronecker_euler_form(3, (2, 3), (2, 3)), -5);
    }

    #[test]
    fn euler_form_tree_star() {
        // one source (dim 1) and m sinks (dim 1): <d,d> = (1 + m) - m = 1
        for m in 3..=5 {
            let q = star(m, m as usize);
            assert_eq!(q.euler_form(q.dims(), q.dims()).unwrap(), 1);
            assert_eq!(q.moduli_dimension().unwrap(), 0);
        }
    }

    #[test]
    fn moduli_dimensions() {
        assert_eq!(KroneckerPair::new(4, 1, 0).moduli_dimension(), 0);
        assert_eq!(KroneckerPair::new(3, 2, 3).moduli_dimension(), 6);
        assert_eq!(KroneckerPair::new(3, 3, 4).moduli_dimension(), 12);
    }

    #[test]
    fn star_is_stable() {
        for m in 3..=5 {
            let q = star(m, m as usize);
            assert!(q.is_generically_stable(true).unwrap());
        }
    }

    #[test]
    fn disjoint_union_is_not_stable() {
        // two disjoint stable (1,2) stars inside K(3)
        let q = BipartiteQuiver::new(
            3,
            vec![("a".into(), 1), ("b".into(), 1)],
            vec![
                ("a0".into(), 1),
                ("a1".into(), 1),
                ("b0".into(), 1),
                ("b1".into(), 1),
            ],
            [
                ("a".to_string(), "a0".to_string()),
                ("a".to_string(), "a1".to_string()),
                ("b".to_string(), "b0".to_string()),
                ("b".to_string(), "b1".to_string()),
            ],
        )
        .unwrap();
        assert!(!q.is_generically_stable(true).unwrap());
        // each half has the full slope, so semistability survives
        assert!(q.is_generically_stable(false).unwrap());
    }

    #[test]
    fn kernel_subspace_destabilizes_strictly() {
        // Source of dim 2 onto sinks of dims (2, 1, 1): a line in the
        // kernel of one of the rank-1 maps has image (1, 0, 1) and slope
        // 1/3 = mu, so the generic representation is semistable but not
        // stable. A naive sweep assuming full-rank images misses it.
        let q = BipartiteQuiver::new(
            3,
            vec![("i".into(), 2)],
            vec![("j0".into(), 2), ("j1".into(), 1), ("j2".into(), 1)],
            [
                ("i".to_string(), "j0".to_string()),
                ("i".to_string(), "j1".to_string()),
                ("i".to_string(), "j2".to_string()),
            ],
        )
        .unwrap();
        assert!(!q.is_generically_stable(true).unwrap());
        assert!(q.is_generically_stable(false).unwrap());
        let w = q.is_generically_stable_capped(true, 1 << 20).unwrap();
        assert_eq!(w, Some(vec![("i".to_string(), 1)]));
    }

    #[test]
    fn rank_options_respect_kernels() {
        let opts = source_rank_options(2, &[2, 1, 1]);
        assert!(opts.contains(&(1, vec![1, 0, 1])));
        assert!(opts.contains(&(1, vec![1, 1, 0])));
        assert!(opts.contains(&(1, vec![1, 1, 1])));
        // no subspace of dim 1 can kill both rank-1 maps at once
        assert!(!opts.contains(&(1, vec![1, 0, 0])));
        // the full space always has full ranks
        assert_eq!(
            opts.iter().filter(|(u, _)| *u == 2).collect::<Vec<_>>(),
            vec![&(2, vec![2, 1, 1])]
        );
    }

    #[test]
    fn dangling_source_is_unstable() {
        let q = BipartiteQuiver::new(
            3,
            vec![("i".into(), 1), ("k".into(), 1)],
            vec![("j".into(), 1)],
            [("i".to_string(), "j".to_string())],
        )
        .unwrap();
        assert!(!q.is_generically_stable(true).unwrap());
    }

    #[test]
    fn no_tree_of_type_n_times_m_minus_1_is_stable() {
        // m = 3, type (2, 4): every bipartite tree of this type fails.
        // Trees with 2 sources / 4 sinks and 5 arrows, degrees <= 3.
        let trees = enumerate_small_trees(2, 4, 3);
        assert!(!trees.is_empty());
        for q in trees {
            assert!(!q.is_generically_stable(true).unwrap(), "{}", q.to_json());
        }
    }

    /// All bipartite trees with the given source/sink counts (dims all 1),
    /// degrees bounded by m, built by adding each vertex as a child of an
    /// earlier vertex of the opposite side.
    fn enumerate_small_trees(ns: usize, nt: usize, m: u64) -> Vec<BipartiteQuiver> {
        // vertex 0 is a source; each later vertex picks a parent
        let total = ns + nt;
        let mut out = Vec::new();
        // assignment: which vertices are sources (fixed: first ns of a chosen
        // labelling); instead enumerate parent vectors over side patterns.
        fn rec(
            sides: &mut Vec<bool>, // true = source
            parents: &mut Vec<usize>,
            total: usize,
            ns: usize,
            m: u64,
            out: &mut Vec<BipartiteQuiver>,
        ) {
            let k = sides.len();
            if k == total {
                if sides.iter().filter(|&&s| s).count() != ns {
                    return;
                }
                let mut deg = vec![0usize; total];
                for (c, &p) in parents.iter().enumerate() {
                    deg[c + 1] += 1;
                    deg[p] += 1;
                }
                if deg.iter().any(|&d| d > m as usize) {
                    return;
                }
                let mut sources = Vec::new();
                let mut sinks = Vec::new();
                for (v, &is_src) in sides.iter().enumerate() {
                    if is_src {
                        sources.push((format!("v{v}"), 1));
                    } else {
                        sinks.push((format!("v{v}"), 1));
                    }
                }
                let arrows: Vec<(String, String)> = parents
                    .iter()
                    .enumerate()
                    .map(|(c, &p)| {
                        let (child, parent) = (c + 1, p);
                        if sides[child] {
                            (format!("v{child}"), format!("v{parent}"))
                        } else {
                            (format!("v{parent}"), format!("v{child}"))
                        }
                    })
                    .collect();
                if let Ok(q) = BipartiteQuiver::new(m, sources, sinks, arrows) {
                    out.push(q);
                }
                return;
            }
            for side in [true, false] {
                if k == 0 && !side {
                    continue; // root is a source by convention
                }
                sides.push(side);
                if k == 0 {
                    rec(sides, parents, total, ns, m, out);
                } else {
                    for p in 0..k {
                        if sides[p] == side {
                            continue; // bipartite: parent must be opposite
                        }
                        parents.push(p);
                        rec(sides, parents, total, ns, m, out);
                        parents.pop();
                    }
                }
                sides.pop();
            }
        }
        rec(&mut Vec::new(), &mut Vec::new(), total, ns, m, &mut out);
        out
    }

    #[test]
    fn classify_roots() {
        assert_eq!(
            classify_root(&KroneckerPair::new(3, 1, 1)),
            RootClass::Imaginary
        );
        assert_eq!(classify_root(&KroneckerPair::new(3, 3, 8)), RootClass::Real);
        assert_eq!(
            classify_root(&KroneckerPair::new(3, 1, 4)),
            RootClass::NotARoot
        );
        // the m = 3 real-root ladder from the simple roots
        for (d, e) in [(0, 1), (1, 3), (3, 8), (8, 21), (21, 55)] {
            assert_eq!(
                classify_root(&KroneckerPair::new(3, d, e)),
                RootClass::Real,
                "({d},{e})"
            );
        }
    }

    #[test]
    fn normalize_reduces_real_roots() {
        let (rep, _) = normalize_kronecker(&KroneckerPair::new(3, 8, 3));
        assert_eq!((rep.d, rep.e), (0, 1));
    }

    #[test]
    fn normalize_is_idempotent() {
        for (d, e) in [(1u64, 1u64), (2, 3), (3, 4), (5, 7), (5, 8), (8, 3)] {
            let (rep, _) = normalize_kronecker(&KroneckerPair::new(3, d, e));
            let (rep2, moves2) = normalize_kronecker(&rep);
            assert_eq!(rep, rep2);
            assert!(moves2.is_empty());
        }
    }

    #[test]
    fn normalize_lands_in_fundamental_region() {
        let (rep, moves) = normalize_kronecker(&KroneckerPair::new(3, 5, 8));
        assert!(rep.d <= rep.e && 2 * rep.e <= 3 * rep.d, "{rep:?}");
        // replay the move list and confirm it reaches the representative
        let (mut d, mut e) = (5i128, 8i128);
        for mv in moves {
            let (nd, ne) = mv.apply(3, d, e);
            d = nd;
            e = ne;
        }
        assert_eq!((d as u64, e as u64), (rep.d, rep.e));
        // moduli dimension is a reflection invariant
        assert_eq!(
            KroneckerPair::new(3, 5, 8).moduli_dimension(),
            rep.moduli_dimension()
        );
    }

    #[test]
    fn json_round_trip() {
        let q = star(3, 3);
        let q2 = BipartiteQuiver::from_json(&q.to_json()).unwrap();
        assert_eq!(q, q2);
    }

    #[test]
    fn rejects_overloaded_source() {
        let r = BipartiteQuiver::new(
            3,
            vec![("i".into(), 1)],
            (0..4).map(|k| (format!("j{k}"), 1)).collect(),
            (0..4).map(|k| ("i".to_string(), format!("j{k}"))),
        );
        assert!(r.is_err());
    }
}
