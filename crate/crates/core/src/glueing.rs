//! Glueing arithmetic: starting vectors, the canonical decomposition of a
//! dimension pair into glue steps, the glue operation on bipartite
//! quivers, and the knot/count recursions for the glued tree families.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::quiver::BipartiteQuiver;
use crate::series::{binomial, lagrange_power_coeff_big};

/// A starting vector `(d_s, e_s)` for the target pair `(d, e)`, the
/// unique pair with `d_s <= d`, `e_s <= e` satisfying the glueing
/// condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartVector {
    pub d_s: u64,
    pub e_s: u64,
    pub d: u64,
    pub e: u64,
}

impl StartVector {
    /// The determinant identity `e_s d - e d_s = 1`.
    pub fn identity_holds(&self) -> bool {
        self.e_s as i128 * self.d as i128 - self.e as i128 * self.d_s as i128 == 1
    }

    /// All five glueing-condition inequalities, by exact
    /// cross-multiplication.
    pub fn glueing_condition_holds(&self) -> bool {
        let (ds, es, d, e) = (
            self.d_s as i128,
            self.e_s as i128,
            self.d as i128,
            self.e as i128,
        );
        // (e + e_s)/(d + d_s) * d < e + 1; at d = 1 the (0, 1) vector
        // gives exact equality, so the bound is non-strict there
        if d == 1 {
            if (e + es) * d > (e + 1) * (d + ds) {
                return false;
            }
        } else if (e + es) * d >= (e + 1) * (d + ds) {
            return false;
        }
        // (e + e_s)/(d + d_s) * d > e
        if (e + es) * d <= e * (d + ds) {
            return false;
        }
        // (e_s - 1)/d_s <= e/d, with equality required when d = 1
        if d == 1 {
            if (es - 1) * d != e * ds {
                return false;
            }
        } else if (es - 1) * d > e * ds {
            return false;
        }
        // (e + e_s)/(d + d_s) * d' < ceil(e d'/d) for all d' < d
        for dp in 1..d {
            let ceil = (e * dp + d - 1).div_euclid(d);
            if (e + es) * dp >= ceil * (d + ds) {
                return false;
            }
        }
        self.d_s <= self.d
            && self.e_s <= self.e
            && (self.d + self.d_s).gcd(&(self.e + self.e_s)) == 1
    }

    /// The shifted inequalities for the glue schedule, for any `k, l >= 1`:
    /// they guarantee that a stable quiver of type
    /// `(d_s + k d, e_s + k e)` is a starting quiver for type `(l d, l e + 1)`.
    pub fn shifted_inequalities_hold(&self, k: u64, l: u64) -> bool {
        let (ds, es, d, e) = (
            self.d_s as i128,
            self.e_s as i128,
            self.d as i128,
            self.e as i128,
        );
        let (k, l) = (k as i128, l as i128);
        let (kd, ke) = (ds + k * d, es + k * e);
        // the slope bounds feeding the glue theorem evaluate the slope at
        // the combined index k + l (the type after glueing)
        let (kld, kle) = (ds + (k + l) * d, es + (k + l) * e);
        // (e_s + (k+l) e)/(d_s + (k+l) d) * l d < l e + 1
        if kle * l * d >= (l * e + 1) * kld {
            return false;
        }
        // (e_s + k e)/(d_s + k d) * l d > l e
        if ke * l * d <= l * e * kd {
            return false;
        }
        // (e_s + k e - 1)/(d_s + k d) <= (l e)/(l d)
        if (ke - 1) * l * d > l * e * kd {
            return false;
        }
        // ((k+l) e + e_s)/((k+l) d + d_s) * d' < ceil(e d'/d) for d' < d
        for dp in 1..d {
            let ceil = (e * dp + d - 1).div_euclid(d);
            if kle * dp >= ceil * kld {
                return false;
            }
        }
        true
    }
}

/// The unique starting vector for coprime `(d, e)` with `d <= e`:
/// `(0, 1)` for `d = 1`, otherwise `d_s = min{x >= 1 : d | 1 + e x}` and
/// `e_s = (1 + d_s e)/d`.
pub fn starting_vector(d: u64, e: u64) -> Result<StartVector, Error> {
    if d.gcd(&e) != 1 {
        return Err(Error::NotCoprime { d, e });
    }
    if d > e {
        return Err(Error::NotOrdered { d, e });
    }
    let sv = if d == 1 {
        StartVector {
            d_s: 0,
            e_s: 1,
            d,
            e,
        }
    } else {
        let d_s = (1..)
            .find(|&x| (1 + e as u128 * x as u128).is_multiple_of(d as u128))
            .expect("coprimality guarantees a solution");
        let e_s = ((1 + d_s as u128 * e as u128) / d as u128) as u64;
        StartVector { d_s, e_s, d, e }
    };
    assert!(sv.identity_holds(), "starting vector identity failed");
    assert!(
        sv.glueing_condition_holds(),
        "glueing condition failed for {sv:?}"
    );
    Ok(sv)
}

/// One level of a glue decomposition: `(d, e) = (ds, es) + k * block`,
/// where `block` is the next level's pair (or `(1, n - 1)` at the end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub ds: u64,
    pub es: u64,
    pub d: u64,
    pub e: u64,
    pub k: u64,
}

/// The full decomposition of `(d, e)`: the tuple `(n_k, ..., n_1)`
/// (outermost first) over the base pair `(1, n - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueChain {
    pub d: u64,
    pub e: u64,
    pub n: u64,
    pub tuple: Vec<u64>,
    pub chain: Vec<ChainStep>,
}

impl GlueChain {
    /// Rebuild `(d, e)` from the tuple alone. Each level takes
    /// `(d, e) = start + n_i * block` and advances
    /// `start += (n_i - 1) * block`.
    pub fn replay(&self) -> (u64, u64) {
        let (mut ds, mut es) = (0u64, 1u64);
        let (mut bd, mut be) = (1u64, self.n - 1);
        for &ni in self.tuple.iter().rev() {
            let (d, e) = (ds + ni * bd, es + ni * be);
            ds += (ni - 1) * bd;
            es += (ni - 1) * be;
            bd = d;
            be = e;
        }
        (bd, be)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))
    }
}

/// Decompose coprime `(d, e)` with `d <= e` into its glue chain.
///
/// At each level, `e'` is minimal with `e | 1 + d e'`, the block is
/// `(d', e') = ((1 + e' d)/e, e')`, and the multiplicity is
/// `k = (d - d_s)/d'` with `(d_s, e_s)` the starting vector of the block.
/// The recursion terminates at a block `(1, n - 1)`.
pub fn decompose(d: u64, e: u64) -> Result<GlueChain, Error> {
    if d == 0 {
        return Err(Error::Invalid("d must be positive".into()));
    }
    if d.gcd(&e) != 1 {
        return Err(Error::NotCoprime { d, e });
    }
    if d > e {
        return Err(Error::NotOrdered { d, e });
    }
    let mut tuple = Vec::new();
    let mut chain = Vec::new();
    let (mut cd, mut ce) = (d, e);
    let n = loop {
        if cd == 1 {
            break ce + 1;
        }
        let ep = (1..)
            .find(|&x| (1 + cd as u128 * x as u128).is_multiple_of(ce as u128))
            .expect("coprimality guarantees a solution");
        let dp = ((1 + ep as u128 * cd as u128) / ce as u128) as u64;
        let sv = starting_vector(dp, ep)?;
        let num = cd - sv.d_s;
        if num % dp != 0 {
            return Err(Error::Invalid(format!(
                "block ({dp}, {ep}) does not divide ({cd}, {ce})"
            )));
        }
        let k = num / dp;
        assert_eq!(ce - sv.e_s, k * ep, "chain bookkeeping mismatch");
        assert!(k >= 1);
        tuple.push(k);
        chain.push(ChainStep {
            ds: sv.d_s,
            es: sv.e_s,
            d: cd,
            e: ce,
            k,
        });
        cd = dp;
        ce = ep;
    };
    let gc = GlueChain {
        d,
        e,
        n,
        tuple,
        chain,
    };
    assert_eq!(gc.replay(), (d, e), "chain replay failed");
    Ok(gc)
}

/// Glue two bipartite quivers by identifying the sinks `j0` of `q0` and
/// `j1` of `q1` into one sink of dimension `merged_dim`. Vertex ids are
/// prefixed `L/` and `R/`; the merged sink keeps the left name.
pub fn glue(
    q0: &BipartiteQuiver,
    j0: &str,
    q1: &BipartiteQuiver,
    j1: &str,
    merged_dim: u64,
) -> Result<BipartiteQuiver, Error> {
    if !q0.is_sink(j0) {
        return Err(Error::NotASink(j0.into()));
    }
    if !q1.is_sink(j1) {
        return Err(Error::NotASink(j1.into()));
    }
    assert_eq!(q0.m(), q1.m(), "glueing requires a common arrow count m");
    let m = q0.m();
    let got = q0.in_degree(j0) + q1.in_degree(j1);
    if got > m as usize {
        return Err(Error::ColourCapacity { got, m: m as usize });
    }
    let merged = format!("L/{j0}");
    let sources: Vec<(String, u64)> = q0
        .sources()
        .iter()
        .map(|s| (format!("L/{s}"), q0.dim_of(s)))
        .chain(
            q1.sources()
                .iter()
                .map(|s| (format!("R/{s}"), q1.dim_of(s))),
        )
        .collect();
    let sinks: Vec<(String, u64)> = q0
        .sinks()
        .iter()
        .map(|s| {
            let dim = if s == j0 { merged_dim } else { q0.dim_of(s) };
            (format!("L/{s}"), dim)
        })
        .chain(
            q1.sinks()
                .iter()
                .filter(|s| *s != j1)
                .map(|s| (format!("R/{s}"), q1.dim_of(s))),
        )
        .collect();
    let arrows: Vec<(String, String)> = q0
        .arrows()
        .map(|(s, t)| (format!("L/{s}"), format!("L/{t}")))
        .chain(q1.arrows().map(|(s, t)| {
            let target = if t == j1 {
                merged.clone()
            } else {
                format!("R/{t}")
            };
            (format!("R/{s}"), target)
        }))
        .collect();
    BipartiteQuiver::new(m, sources, sinks, arrows)
}

/// The three sink modifications turning a stable quiver of type `(d, e)`
/// into candidates of type `(d, e + 1)`: attach a fresh sink to a source
/// with spare arrow capacity, bump a sink with `1 < R_j < m`, or bump a
/// sink whose dimension is below the sum over its source neighbours.
/// Returns each modified quiver with its modified vertex id.
pub fn hat_modifications(q: &BipartiteQuiver) -> Vec<(BipartiteQuiver, String)> {
    let m = q.m();
    let mut out = Vec::new();
    // fresh sink attached to a source with R_i < m
    for i in q.sources() {
        if q.out_degree(i) >= m as usize {
            continue;
        }
        let mut fresh = "hat".to_string();
        while q.is_sink(&fresh) || q.sources().contains(&fresh) {
            fresh.push('\'');
        }
        let sources: Vec<(String, u64)> = q
            .sources()
            .iter()
            .map(|s| (s.clone(), q.dim_of(s)))
            .collect();
        let mut sinks: Vec<(String, u64)> =
            q.sinks().iter().map(|s| (s.clone(), q.dim_of(s))).collect();
        sinks.push((fresh.clone(), 1));
        let mut arrows: Vec<(String, String)> =
            q.arrows().map(|(s, t)| (s.into(), t.into())).collect();
        arrows.push((i.clone(), fresh.clone()));
        if let Ok(nq) = BipartiteQuiver::new(m, sources, sinks, arrows) {
            out.push((nq, fresh));
        }
    }
    // dimension bumps
    for j in q.sinks() {
        let rj = q.in_degree(j);
        let neighbour_sum: u64 = q
            .sources()
            .iter()
            .filter(|i| q.arrows().any(|(s, t)| s == i.as_str() && t == j))
            .map(|i| q.dim_of(i))
            .sum();
        let bump_mid = rj > 1 && rj < m as usize;
        let bump_under = q.dim_of(j) < neighbour_sum;
        if !bump_mid && !bump_under {
            continue;
        }
        let sources: Vec<(String, u64)> = q
            .sources()
            .iter()
            .map(|s| (s.clone(), q.dim_of(s)))
            .collect();
        let sinks: Vec<(String, u64)> = q
            .sinks()
            .iter()
            .map(|s| {
                let dim = q.dim_of(s) + u64::from(s == j);
                (s.clone(), dim)
            })
            .collect();
        let arrows: Vec<(String, String)> = q.arrows().map(|(s, t)| (s.into(), t.into())).collect();
        if let Ok(nq) = BipartiteQuiver::new(m, sources, sinks, arrows) {
            out.push((nq, j.clone()));
        }
    }
    out
}

/// All quivers in the glue schedule for base pair `(1, 1)` (so level
/// types `(d, e) = (0, 1) + tuple-weighted sums): level sets are built by
/// glueing a schedule quiver with a modified quiver of the previous
/// level, over every sink and modification with `R_{j0} + R_{j1} <= m`.
/// The tuple is outermost-first, matching [`decompose`].
pub fn schedule_quivers(m: u64, tuple: &[u64]) -> Result<Vec<BipartiteQuiver>, Error> {
    if tuple.is_empty() || tuple.contains(&0) {
        return Err(Error::InvalidTuple(format!("{tuple:?}")));
    }
    // T_0: the lone sink of dimension 1, the (0, 1) starting quiver.
    let lone = BipartiteQuiver::new(m, vec![], vec![("j".into(), 1)], [])?;
    // level(t) = the set for the (reversed, innermost-first) prefix t
    fn level(m: u64, t: &[u64], lone: &BipartiteQuiver) -> Result<Vec<BipartiteQuiver>, Error> {
        // set for head n over tail: glue(S in set(head - 1 over tail),
        // T in hat(set(tail))); head 0 degenerates to the decremented tail
        let (head, tail) = t.split_last().map(|(h, r)| (*h, r)).unwrap();
        if head == 0 {
            return match tail.split_last() {
                None => Ok(vec![lone.clone()]),
                Some((h2, r2)) => {
                    let mut dec = r2.to_vec();
                    dec.push(h2 - 1);
                    level(m, &dec, lone)
                }
            };
        }
        let mut dec = tail.to_vec();
        dec.push(head - 1);
        let starts = level(m, &dec, lone)?;
        let prev = if tail.is_empty() {
            // the base pair (1, 1): one source, one sink, one arrow
            vec![BipartiteQuiver::new(
                m,
                vec![("i".into(), 1)],
                vec![("j".into(), 1)],
                [("i".to_string(), "j".to_string())],
            )?]
        } else {
            level(m, tail, lone)?
        };
        let mut out = Vec::new();
        for s in &starts {
            for p in &prev {
                for (hat, j1) in hat_modifications(p) {
                    for j0 in s.sinks() {
                        if s.in_degree(j0) + hat.in_degree(&j1) > m as usize {
                            continue;
                        }
                        let merged = s.dim_of(j0) + hat.dim_of(&j1) - 1;
                        out.push(glue(s, j0, &hat, &j1, merged)?);
                    }
                }
            }
        }
        Ok(out)
    }
    let rev: Vec<u64> = tuple.iter().rev().cloned().collect();
    level(m, &rev, &lone)
}

/// The counts attached to a glued tree family: `a` coloured quivers, each
/// with `K` knots (sinks of in-degree one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCount {
    pub a: BigInt,
    pub k: u64,
    pub m: u64,
    pub n: u64,
    pub tuple: Vec<u64>,
}

/// Knot and colouring counts for the family indexed by
/// `(n_k, ..., n_1)` (outermost first) over the base type `(n, mn - 1)`.
///
/// `K` follows `K_{h,t} = K_{dec t} + h K_t - h`; `a` follows
/// `a_{h,t} = a_{dec t} * A_{a_t, K_t, K_{dec t}, K_{dec t} + h K_t}`
/// where `A` is the Lagrange power coefficient and `dec t` decrements the
/// head of `t`. A zero head degenerates to the decremented tail; the
/// empty index has `K = m` and `a = 1`.
pub fn family_counts(m: u64, n: u64, tuple: &[u64]) -> Result<FamilyCount, Error> {
    if m < 3 || n < 2 {
        return Err(Error::Invalid(format!(
            "need m >= 3 and n >= 2, got m = {m}, n = {n}"
        )));
    }
    if tuple.is_empty() || tuple.contains(&0) {
        return Err(Error::InvalidTuple(format!("{tuple:?}")));
    }

    struct Memo {
        m: u64,
        n: u64,
        k: HashMap<Vec<u64>, u64>,
        a: HashMap<Vec<u64>, BigInt>,
    }

    impl Memo {
        // `t` is innermost-first: t[0] = n_1, last = current head
        fn knots(&mut self, t: &[u64]) -> u64 {
            if let Some(v) = self.k.get(t) {
                return *v;
            }
            let (m, n) = (self.m, self.n);
            let v = match t.split_last() {
                None => m,
                Some((&0, tail)) => match tail.split_last() {
                    None => m,
                    Some((&h2, r2)) => {
                        let mut dec = r2.to_vec();
                        dec.push(h2 - 1);
                        self.knots(&dec)
                    }
                },
                Some((&h, [])) => n * (m - 1) + (h - 1) * (n - 1) * (m - 1) - (h - 1),
                Some((&h, tail)) => {
                    let mut dec = tail.to_vec();
                    *dec.last_mut().unwrap() -= 1;
                    self.knots(&dec) + h * self.knots(tail) - h
                }
            };
            self.k.insert(t.to_vec(), v);
            v
        }

        fn count(&mut self, t: &[u64]) -> BigInt {
            if let Some(v) = self.a.get(t) {
                return v.clone();
            }
            let (m, n) = (self.m, self.n);
            let v = match t.split_last() {
                None => BigInt::one(),
                Some((&0, tail)) => match tail.split_last() {
                    None => BigInt::one(),
                    Some((&h2, r2)) => {
                        let mut dec = r2.to_vec();
                        dec.push(h2 - 1);
                        self.count(&dec)
                    }
                },
                Some((&h, [])) => {
                    let weight = binomial(m - 1, n - 1);
                    binomial(m - 1, n)
                        * lagrange_power_coeff_big(
                            &weight,
                            (n - 1) * (m - 1),
                            n * (m - 1),
                            n * (m - 1) + (h - 1) * (n - 1) * (m - 1),
                        )
                }
                Some((&h, tail)) => {
                    let mut dec = tail.to_vec();
                    *dec.last_mut().unwrap() -= 1;
                    let a_tail = self.count(tail);
                    let k_tail = self.knots(tail);
                    let k_dec = self.knots(&dec);
                    self.count(&dec)
                        * lagrange_power_coeff_big(&a_tail, k_tail, k_dec, k_dec + h * k_tail)
                }
            };
            self.a.insert(t.to_vec(), v.clone());
            v
        }
    }

    let mut memo = Memo {
        m,
        n,
        k: HashMap::new(),
        a: HashMap::new(),
    };
    let rev: Vec<u64> = tuple.iter().rev().cloned().collect();
    let k = memo.knots(&rev);
    let a = memo.count(&rev);
    Ok(FamilyCount {
        a,
        k,
        m,
        n,
        tuple: tuple.to_vec(),
    })
}
