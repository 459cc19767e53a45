//! The universal abelian covering quiver of `K(m)`: weight assignment to
//! coloured trees, localization data up to translation, stable
//! colourings, induced arrows, and the brute-force census of tree-shaped
//! torus fixed points.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::quiver::{BipartiteQuiver, DimensionVector, KroneckerPair};

/// A character of the torus, written in the basis `e_1, ..., e_m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(m: u64) -> Self {
        Weight(vec![0; m as usize])
    }

    pub fn plus_e(&self, k: usize) -> Self {
        let mut w = self.0.clone();
        w[k] += 1;
        Weight(w)
    }

    pub fn minus_e(&self, k: usize) -> Self {
        let mut w = self.0.clone();
        w[k] -= 1;
        Weight(w)
    }

    pub fn translate(&self, v: &[i64]) -> Self {
        Weight(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// If `other - self` is a standard basis vector, return its index.
    pub fn arrow_colour_to(&self, other: &Weight) -> Option<usize> {
        let mut idx = None;
        for (k, (a, b)) in self.0.iter().zip(&other.0).enumerate() {
            match b - a {
                0 => {}
                1 if idx.is_none() => idx = Some(k),
                _ => return None,
            }
        }
        idx
    }
}

/// An arrow colouring `c: arrows -> {1, ..., m}` of a bipartite quiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colouring {
    colours: BTreeMap<(String, String), u64>,
}

impl Colouring {
    pub fn new(colours: BTreeMap<(String, String), u64>) -> Self {
        Self { colours }
    }

    pub fn colour_of(&self, source: &str, sink: &str) -> Option<u64> {
        self.colours
            .get(&(source.to_string(), sink.to_string()))
            .copied()
    }

    pub fn colours(&self) -> &BTreeMap<(String, String), u64> {
        &self.colours
    }

    /// Stability of the colouring: colours pairwise distinct at every
    /// source and every sink, all in `{1, ..., m}`.
    pub fn is_stable(&self, q: &BipartiteQuiver) -> Result<(), Error> {
        for (s, t) in q.arrows() {
            match self.colour_of(s, t) {
                None => {
                    return Err(Error::UnstableColouring(format!(
                        "arrow ({s}, {t}) has no colour"
                    )))
                }
                Some(c) if c == 0 || c > q.m() => {
                    return Err(Error::UnstableColouring(format!(
                        "arrow ({s}, {t}) has colour {c} outside 1..={}",
                        q.m()
                    )))
                }
                _ => {}
            }
        }
        for v in q.sources().iter().chain(q.sinks()) {
            let mut seen = BTreeSet::new();
            for (s, t) in q.arrows() {
                if s != v.as_str() && t != v.as_str() {
                    continue;
                }
                let c = self.colour_of(s, t).unwrap();
                if !seen.insert(c) {
                    return Err(Error::UnstableColouring(format!(
                        "colour {c} repeats at vertex `{v}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Enumerate all stable colourings of `q` in lexicographic order over the
/// sorted arrow list.
pub fn stable_colourings(q: &BipartiteQuiver) -> Vec<Colouring> {
    let arrows: Vec<(String, String)> = {
        let mut a: Vec<_> = q
            .arrows()
            .map(|(s, t)| (s.to_string(), t.to_string()))
            .collect();
        a.sort();
        a
    };
    let m = q.m();
    let mut out = Vec::new();
    let mut current: BTreeMap<(String, String), u64> = BTreeMap::new();

    fn free_at(current: &BTreeMap<(String, String), u64>, vertex: &str, colour: u64) -> bool {
        current
            .iter()
            .all(|((s, t), c)| *c != colour || (s != vertex && t != vertex))
    }

    fn rec(
        arrows: &[(String, String)],
        idx: usize,
        m: u64,
        current: &mut BTreeMap<(String, String), u64>,
        out: &mut Vec<Colouring>,
    ) {
        if idx == arrows.len() {
            out.push(Colouring::new(current.clone()));
            return;
        }
        let (s, t) = &arrows[idx];
        for colour in 1..=m {
            if free_at(current, s, colour) && free_at(current, t, colour) {
                current.insert((s.clone(), t.clone()), colour);
                rec(arrows, idx + 1, m, current, out);
                current.remove(&(s.clone(), t.clone()));
            }
        }
    }

    rec(&arrows, 0, m, &mut current, &mut out);
    out
}

/// A localization datum: weights of sources and sinks of the covering
/// quiver together with their dimensions. Arrows are implied: a source at
/// `w` maps to every present sink at `w + e_k`, with colour `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationDatum {
    pub m: u64,
    pub source_weights: BTreeMap<String, Weight>,
    pub sink_weights: BTreeMap<String, Weight>,
    pub dims: DimensionVector,
}

impl LocalizationDatum {
    pub fn dim_of(&self, id: &str) -> u64 {
        self.dims.get(id).unwrap_or(0)
    }

    /// Translate every weight by the same vector.
    pub fn translate(&self, v: &[i64]) -> Self {
        let map = |ws: &BTreeMap<String, Weight>| {
            ws.iter()
                .map(|(id, w)| (id.clone(), w.translate(v)))
                .collect()
        };
        Self {
            m: self.m,
            source_weights: map(&self.source_weights),
            sink_weights: map(&self.sink_weights),
            dims: self.dims.clone(),
        }
    }

    /// Shift so the lexicographically smallest weight is the zero vector.
    pub fn canonicalize(&self) -> Self {
        let min = self
            .source_weights
            .values()
            .chain(self.sink_weights.values())
            .min()
            .expect("datum has at least one vertex")
            .clone();
        let neg: Vec<i64> = min.0.iter().map(|x| -x).collect();
        self.translate(&neg)
    }

    /// The id-independent signature of the canonical form: the sorted
    /// list of (side, weight, dim). Two data are equivalent iff the keys
    /// of their canonical forms coincide.
    pub fn canonical_key(&self) -> Vec<(u8, Weight, u64)> {
        let c = self.canonicalize();
        let mut key: Vec<(u8, Weight, u64)> = c
            .source_weights
            .iter()
            .map(|(id, w)| (0u8, w.clone(), c.dim_of(id)))
            .chain(
                c.sink_weights
                    .iter()
                    .map(|(id, w)| (1u8, w.clone(), c.dim_of(id))),
            )
            .collect();
        key.sort();
        key
    }

    /// All arrows implied by the weights, with their colours.
    pub fn implied_arrows(&self) -> Vec<(String, String, u64)> {
        let mut out = Vec::new();
        for (i, wi) in &self.source_weights {
            for (j, wj) in &self.sink_weights {
                if let Some(k) = wi.arrow_colour_to(wj) {
                    out.push((i.clone(), j.clone(), k as u64 + 1));
                }
            }
        }
        out
    }

    /// The bipartite quiver shape carried by the datum.
    pub fn to_quiver(&self) -> Result<BipartiteQuiver, Error> {
        BipartiteQuiver::new(
            self.m,
            self.source_weights
                .keys()
                .map(|id| (id.clone(), self.dim_of(id)))
                .collect(),
            self.sink_weights
                .keys()
                .map(|id| (id.clone(), self.dim_of(id)))
                .collect(),
            self.implied_arrows().into_iter().map(|(s, t, _)| (s, t)),
        )
    }

    /// `dim M = 1 - <d, d>` over the implied quiver shape.
    pub fn moduli_dimension(&self) -> Result<i128, Error> {
        self.to_quiver()?.moduli_dimension()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("datum serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))
    }

    /// Graphviz form: one node per vertex labelled `id:dim@(w_1,...,w_m)`,
    /// one edge per implied arrow labelled with its colour.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph datum {\n");
        let fmt_w = |w: &Weight| {
            let parts: Vec<String> = w.0.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        };
        for (id, w) in &self.source_weights {
            s.push_str(&format!(
                "  \"{id}\" [label=\"{id}:{}@{}\"];\n",
                self.dim_of(id),
                fmt_w(w)
            ));
        }
        for (id, w) in &self.sink_weights {
            s.push_str(&format!(
                "  \"{id}\" [label=\"{id}:{}@{}\"];\n",
                self.dim_of(id),
                fmt_w(w)
            ));
        }
        let mut arrows = self.implied_arrows();
        arrows.sort();
        for (i, j, c) in arrows {
            s.push_str(&format!("  \"{i}\" -> \"{j}\" [label=\"{c}\"];\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Assign weights to a stably coloured tree: the root gets zero and each
/// arrow of colour `k` adds `e_k` from source to sink. Vertices whose
/// weights collide are merged with summed dimensions (the cyclic data of
/// the census arise exactly this way).
pub fn weights_from_coloured_tree(
    q: &BipartiteQuiver,
    c: &Colouring,
    root: &str,
) -> Result<LocalizationDatum, Error> {
    if !q.is_tree() {
        return Err(Error::NotATree);
    }
    c.is_stable(q)?;
    let m = q.m();
    let mut weights: BTreeMap<String, Weight> = BTreeMap::new();
    weights.insert(root.to_string(), Weight::zero(m));
    let mut stack = vec![root.to_string()];
    while let Some(v) = stack.pop() {
        let wv = weights[&v].clone();
        for (s, t) in q.arrows() {
            let k = (c.colour_of(s, t).unwrap() - 1) as usize;
            if s == v && !weights.contains_key(t) {
                weights.insert(t.to_string(), wv.plus_e(k));
                stack.push(t.to_string());
            } else if t == v && !weights.contains_key(s) {
                weights.insert(s.to_string(), wv.minus_e(k));
                stack.push(s.to_string());
            }
        }
    }
    if weights.len() != q.vertex_count() {
        return Err(Error::NotATree);
    }

    // group per side by weight, summing dimensions; the smallest id
    // represents a merged group
    let mut source_weights = BTreeMap::new();
    let mut sink_weights = BTreeMap::new();
    let mut dims = BTreeMap::new();
    for (side, ids) in [(0, q.sources()), (1, q.sinks())] {
        let mut by_weight: BTreeMap<Weight, (String, u64)> = BTreeMap::new();
        for id in ids {
            let w = weights[id].clone();
            let entry = by_weight.entry(w).or_insert_with(|| (id.clone(), 0));
            entry.1 += q.dim_of(id);
            if *id < entry.0 {
                entry.0 = id.clone();
            }
        }
        for (w, (id, dim)) in by_weight {
            if side == 0 {
                source_weights.insert(id.clone(), w);
            } else {
                sink_weights.insert(id.clone(), w);
            }
            dims.insert(id, dim);
        }
    }
    let datum = LocalizationDatum {
        m,
        source_weights,
        sink_weights,
        dims: DimensionVector::new(dims),
    };
    Ok(datum.canonicalize())
}

/// The weight-implied arrows that are not arrows of `q`.
pub fn induced_arrows(x: &LocalizationDatum, q: &BipartiteQuiver) -> Vec<(String, String, u64)> {
    x.implied_arrows()
        .into_iter()
        .filter(|(s, t, _)| !q.arrows().any(|(qs, qt)| qs == s && qt == t))
        .collect()
}

/// The census total: a number when all components are points, otherwise
/// a flag that positive-dimensional components occurred.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TotalChi {
    Count(BigInt),
    PositiveDimensional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CensusReport {
    pub data: Vec<LocalizationDatum>,
    pub per_datum_moduli_dim: Vec<i128>,
    pub total_chi: TotalChi,
    /// enumerated (set, root) pairs before canonical deduplication
    pub raw_count: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct CensusOptions {
    pub type1_only: bool,
    pub cap: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            type1_only: false,
            cap: 10_000_000,
        }
    }
}

/// Enumerate, up to translation equivalence, all localization data of
/// dimension type `(d, e)` reachable from stable coloured trees.
///
/// Rooted coloured trees are grown source-first: every vertex chooses a
/// set of child-edge colours distinct from the colour towards its parent,
/// so the colouring is stable by construction and rooted coloured trees
/// are rigid (each is generated exactly once). Dimensions are assigned as
/// compositions, the tree is filtered by strict generic stability, and
/// the weight map folds it into a datum: vertices landing on the same
/// weight merge with summed dimensions (possibly creating cycles of
/// implied arrows). The raw count sees each datum once per source that
/// can serve as the root; deduplication is by canonical form.
pub fn enumerate_localization_data(
    p: &KroneckerPair,
    opts: &CensusOptions,
) -> Result<CensusReport, Error> {
    // non-coprime types are allowed: the vanishing families (n, (m-1)n)
    // are exactly the non-coprime ones worth auditing
    let (m, d, e) = (p.m, p.d, p.e);

    struct TV {
        is_sink: bool,
        weight: Weight,
        parent: Option<(usize, usize)>, // (parent index, edge colour)
    }

    struct Search<'a> {
        m: usize,
        d: u64,
        e: u64,
        opts: &'a CensusOptions,
        visited: u64,
        raw: u64,
        seen: BTreeSet<String>,
        data: Vec<LocalizationDatum>,
        // moduli dimension over the tree shape; the folded datum can pick
        // up extra implied arrows, but the fixed component is counted by
        // its trees, so the tree dimension decides isolatedness
        tree_dims: Vec<i128>,
    }

    /// Canonical form of a rooted coloured tree with dimensions: colours
    /// at a vertex are pairwise distinct, so sorting children by edge
    /// colour is a complete invariant.
    fn rooted_form(
        adj: &[Vec<(usize, usize)>],
        dims: &[u64],
        v: usize,
        from: Option<usize>,
    ) -> String {
        let mut parts: Vec<(usize, String)> = adj[v]
            .iter()
            .filter(|(_, u)| Some(*u) != from)
            .map(|&(c, u)| (c, rooted_form(adj, dims, u, Some(v))))
            .collect();
        parts.sort();
        let inner: Vec<String> = parts.into_iter().map(|(c, s)| format!("{c}:{s}")).collect();
        format!("({};{})", dims[v], inner.join(","))
    }

    impl Search<'_> {
        /// A complete coloured tree: assign dimensions, filter by
        /// stability of the tree representation, fold into a datum.
        fn consider(&mut self, verts: &[TV]) -> Result<(), Error> {
            let ns = verts.iter().filter(|v| !v.is_sink).count() as u64;
            let nt = verts.len() as u64 - ns;
            if nt == 0 || (self.opts.type1_only && (ns != self.d || nt != self.e)) {
                return Ok(());
            }
            let source_ids: Vec<String> = (0..ns).map(|n| format!("i{n}")).collect();
            let sink_ids: Vec<String> = (0..nt).map(|n| format!("j{n}")).collect();
            // vertex index -> id, numbering each side in generation order
            let mut names = Vec::with_capacity(verts.len());
            let (mut si, mut ti) = (0usize, 0usize);
            for v in verts {
                if v.is_sink {
                    names.push(sink_ids[ti].clone());
                    ti += 1;
                } else {
                    names.push(source_ids[si].clone());
                    si += 1;
                }
            }
            let arrows: Vec<(String, String)> = verts
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    v.parent.map(|(p, _)| {
                        if v.is_sink {
                            (names[p].clone(), names[i].clone())
                        } else {
                            (names[i].clone(), names[p].clone())
                        }
                    })
                })
                .collect();

            for sdims in compositions(self.d, ns) {
                for tdims in compositions(self.e, nt) {
                    if self.opts.type1_only
                        && (sdims.iter().any(|&x| x != 1) || tdims.iter().any(|&x| x != 1))
                    {
                        continue;
                    }
                    let q = BipartiteQuiver::new(
                        self.m as u64,
                        source_ids
                            .iter()
                            .cloned()
                            .zip(sdims.iter().copied())
                            .collect(),
                        sink_ids
                            .iter()
                            .cloned()
                            .zip(tdims.iter().copied())
                            .collect(),
                        arrows.iter().cloned(),
                    )?;
                    if !q.is_generically_stable(true)? {
                        continue;
                    }
                    self.raw += 1;
                    // dedup the d rootings of the same tree: the key is
                    // the minimal rooted form over all source roots
                    let mut vdims = Vec::with_capacity(verts.len());
                    let (mut si, mut ti) = (0usize, 0usize);
                    for v in verts {
                        vdims.push(if v.is_sink {
                            ti += 1;
                            tdims[ti - 1]
                        } else {
                            si += 1;
                            sdims[si - 1]
                        });
                    }
                    let mut adj = vec![Vec::new(); verts.len()];
                    for (i, v) in verts.iter().enumerate() {
                        if let Some((p, c)) = v.parent {
                            adj[i].push((c, p));
                            adj[p].push((c, i));
                        }
                    }
                    let key = verts
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_sink)
                        .map(|(i, _)| rooted_form(&adj, &vdims, i, None))
                        .min()
                        .unwrap();
                    if self.seen.insert(key) {
                        // fold the weight map into the datum: same-side
                        // weight collisions merge with summed dimensions
                        let mut merged: BTreeMap<(bool, Weight), u64> = BTreeMap::new();
                        for (v, dim) in verts.iter().zip(&vdims) {
                            *merged.entry((v.is_sink, v.weight.clone())).or_insert(0) += dim;
                        }
                        let sources: Vec<&Weight> =
                            merged.keys().filter(|(s, _)| !s).map(|(_, w)| w).collect();
                        let sinks: Vec<&Weight> =
                            merged.keys().filter(|(s, _)| *s).map(|(_, w)| w).collect();
                        let msdims: Vec<u64> = merged
                            .iter()
                            .filter(|((s, _), _)| !s)
                            .map(|(_, &dim)| dim)
                            .collect();
                        let mtdims: Vec<u64> = merged
                            .iter()
                            .filter(|((s, _), _)| *s)
                            .map(|(_, &dim)| dim)
                            .collect();
                        let datum = build_datum(self.m as u64, &sources, &sinks, &msdims, &mtdims);
                        self.data.push(datum.canonicalize());
                        self.tree_dims.push(q.moduli_dimension()?);
                    }
                }
            }
            Ok(())
        }

        /// Decide the child-edge colour set of `verts[next]`; when every
        /// vertex is decided the tree is complete.
        fn grow(
            &mut self,
            verts: &mut Vec<TV>,
            next: usize,
            n_src: u64,
            n_snk: u64,
        ) -> Result<(), Error> {
            self.visited += 1;
            if self.visited > self.opts.cap {
                return Err(Error::CapExceeded {
                    visited: self.visited,
                    cap: self.opts.cap,
                    found: self.data.len(),
                });
            }
            if next == verts.len() {
                return self.consider(verts);
            }
            let parent_colour = verts[next].parent.map(|(_, c)| c);
            let avail: Vec<usize> = (0..self.m).filter(|k| Some(*k) != parent_colour).collect();
            let is_sink = verts[next].is_sink;
            let w = verts[next].weight.clone();
            for mask in 0u32..(1 << avail.len()) {
                let cols: Vec<usize> = avail
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &k)| k)
                    .collect();
                let add = cols.len() as u64;
                let (ns, nt) = if is_sink {
                    (n_src + add, n_snk)
                } else {
                    (n_src, n_snk + add)
                };
                if ns > self.d || nt > self.e {
                    continue;
                }
                let base = verts.len();
                for &k in &cols {
                    let weight = if is_sink { w.minus_e(k) } else { w.plus_e(k) };
                    verts.push(TV {
                        is_sink: !is_sink,
                        weight,
                        parent: Some((next, k)),
                    });
                }
                self.grow(verts, next + 1, ns, nt)?;
                verts.truncate(base);
            }
            Ok(())
        }
    }

    fn compositions(total: u64, parts: u64) -> Vec<Vec<u64>> {
        if parts == 0 {
            return if total == 0 { vec![vec![]] } else { vec![] };
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(total: u64, parts: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if parts == 1 {
                if total >= 1 {
                    cur.push(total);
                    out.push(cur.clone());
                    cur.pop();
                }
                return;
            }
            for x in 1..=(total + 1 - parts) {
                cur.push(x);
                rec(total - x, parts - 1, cur, out);
                cur.pop();
            }
        }
        rec(total, parts, &mut cur, &mut out);
        out
    }

    fn build_datum(
        m: u64,
        sources: &[&Weight],
        sinks: &[&Weight],
        sdims: &[u64],
        tdims: &[u64],
    ) -> LocalizationDatum {
        let mut dims = BTreeMap::new();
        let mut source_weights = BTreeMap::new();
        let mut sink_weights = BTreeMap::new();
        for (n, (w, dim)) in sources.iter().zip(sdims).enumerate() {
            let id = format!("i{n}");
            source_weights.insert(id.clone(), (*w).clone());
            dims.insert(id, *dim);
        }
        for (n, (w, dim)) in sinks.iter().zip(tdims).enumerate() {
            let id = format!("j{n}");
            sink_weights.insert(id.clone(), (*w).clone());
            dims.insert(id, *dim);
        }
        LocalizationDatum {
            m,
            source_weights,
            sink_weights,
            dims: DimensionVector::new(dims),
        }
    }

    let mut search = Search {
        m: m as usize,
        d,
        e,
        opts,
        visited: 0,
        raw: 0,
        seen: BTreeSet::new(),
        data: Vec::new(),
        tree_dims: Vec::new(),
    };
    if d >= 1 {
        let mut verts = vec![TV {
            is_sink: false,
            weight: Weight::zero(m),
            parent: None,
        }];
        search.grow(&mut verts, 0, 1, 0)?;
    }

    // the d-to-1 tree/datum correspondence in the all-ones family
    if opts.type1_only && e == (m - 1) * d + 1 {
        assert_eq!(
            search.raw,
            d * search.data.len() as u64,
            "raw census count must be d times the datum count"
        );
    }

    let mut paired: Vec<(LocalizationDatum, i128)> =
        search.data.into_iter().zip(search.tree_dims).collect();
    paired.sort_by_key(|(x, _)| x.canonical_key());
    let (data, per_datum_moduli_dim): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
    let total_chi = if per_datum_moduli_dim.iter().all(|&x| x == 0) {
        TotalChi::Count(BigInt::from(data.len()))
    } else {
        TotalChi::PositiveDimensional
    };
    Ok(CensusReport {
        data,
        per_datum_moduli_dim,
        total_chi,
        raw_count: search.raw,
    })
}

/// Serialize a datum as DOT or JSON.
pub fn export_datum(x: &LocalizationDatum, dot: bool) -> String {
    if dot {
        x.to_dot()
    } else {
        x.to_json()
    }
}
