//! Dynamics of prefix matrices mod `p^k`: the sets `U_k(w)`, their
//! collection over shifts, the nested towers `V_k(n, w)`, derived words and
//! the bipartite factor graphs `G_n`.
//!
//! The residue stream `φ_k(A_{w_n})` lives in a finite monoid.  Saturation
//! of `U_k` is certified exactly for periodic sources (cycle detection on
//! the pair `(n mod l, residue)`); other sources use a no-new-element
//! window of the group-order bound, and the certificate says which.

use crate::matrices::{checked_modulus, MatError, ResMat2};
use crate::words::{factors, WordError, WordSource};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("scan budget exhausted before saturation (scanned {scanned})")]
    Unsaturated { scanned: usize },
}

pub type Result<T> = std::result::Result<T, DynError>;

/// How a `U_k` scan was certified complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    /// Periodic source: the pair (position mod period, residue) recurred,
    /// so the stream is provably periodic and the set complete.
    ExactCycle { period: usize },
    /// No new element over a window of the group-order bound.
    Window { window: usize },
    /// Scan budget ended first; the set is a lower bound.
    No,
}

impl Saturation {
    pub fn is_saturated(&self) -> bool {
        !matches!(self, Saturation::No)
    }
}

/// `U_k(w) = {φ_k(A_{w_n}) : n ≥ 0}` as far as scanned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UkSet {
    pub p: u64,
    pub k: u32,
    pub matrices: BTreeSet<ResMat2>,
    pub saturated: Saturation,
    pub prefixes_scanned: usize,
}

impl UkSet {
    /// Canonical encoding: the sorted residue list (deterministic keys for
    /// collection indexing).
    pub fn canonical_key(&self) -> Vec<[u64; 4]> {
        self.matrices.iter().map(|m| m.e).collect()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn contains(&self, m: &ResMat2) -> bool {
        self.matrices.contains(m)
    }

    /// `A · U_k` as a set.
    pub fn left_translate(&self, a: &ResMat2) -> BTreeSet<ResMat2> {
        self.matrices.iter().map(|m| a.mul(m)).collect()
    }

    /// Does `A·U_k = U_k`?  (The stabilizer condition that feeds the
    /// orbit-inclusion hypothesis for arbitrary powers.)
    pub fn is_stabilized_by(&self, a: &ResMat2) -> bool {
        self.left_translate(a) == self.matrices
    }
}

/// `|SL₂^±(Z/p^k)|`: the saturation window bound.
pub fn group_order_bound(p: u64, k: u32) -> u64 {
    // |SL₂(Z/p^k)| = p^(3k−2)(p²−1); det = −1 doubles it except mod 2.
    let sl = p.saturating_pow(3 * k - 2) * (p * p - 1);
    if p == 2 && k == 1 {
        sl
    } else {
        sl.saturating_mul(2)
    }
}

/// Budget cap for saturation scans.
const SCAN_CAP: usize = 1 << 21;

/// Scan `{φ_k(A_{w_n}) : 0 ≤ n ≤ n_max}` with saturation detection.
///
/// `n_max = None` scans until the certificate triggers (or the cap ends
/// the attempt, flagged `Saturation::No`).
pub fn uk_set(source: &WordSource, p: u64, k: u32, n_max: Option<usize>) -> Result<UkSet> {
    let modulus = checked_modulus(p, k)?;
    let mut set = BTreeSet::new();
    let mut acc = ResMat2::identity(modulus);
    set.insert(acc);

    let window = group_order_bound(p, k).min(SCAN_CAP as u64) as usize;
    let budget = n_max.unwrap_or(SCAN_CAP).min(SCAN_CAP);

    // Exact certificate for periodic sources: states (n mod l, residue).
    let period = source.minimal_period();
    let mut seen_states: HashMap<(usize, [u64; 4]), usize> = HashMap::new();

    let mut last_new = 0usize;
    let mut n = 0usize;
    let chunk = 1024usize;
    'scan: loop {
        let have = n;
        let mut want = (have + chunk).min(budget);
        if want == have {
            break;
        }
        let prefix = match source.prefix(want) {
            Ok(p) => p,
            // Finite explicit words end the stream early.
            Err(WordError::PrefixTooLong { have: avail, .. }) => {
                let usable = avail.saturating_sub(source.shift_offset());
                if usable <= have {
                    break;
                }
                want = usable;
                source.prefix(want)?
            }
            Err(e) => return Err(e.into()),
        };
        for (i, &letter) in prefix.iter().enumerate().take(want).skip(have) {
            acc = acc.mul(&ResMat2::letter(letter as u64, modulus));
            n = i + 1;
            if set.insert(acc) {
                last_new = n;
            }
            if let Some(ref per) = period {
                let state = (n % per.len(), acc.e);
                if let Some(_first) = seen_states.insert(state, n) {
                    return Ok(UkSet {
                        p,
                        k,
                        matrices: set,
                        saturated: Saturation::ExactCycle {
                            period: per.len(),
                        },
                        prefixes_scanned: n,
                    });
                }
            } else if n - last_new >= window {
                break 'scan;
            }
        }
        if n >= budget {
            break;
        }
    }
    let saturated = if period.is_none() && n - last_new >= window {
        Saturation::Window { window }
    } else {
        Saturation::No
    };
    Ok(UkSet {
        p,
        k,
        matrices: set,
        saturated,
        prefixes_scanned: n,
    })
}

/// The reduced prefix matrix `φ_k(A_{w_m})`.
pub fn prefix_matrix(source: &WordSource, m: usize, p: u64, k: u32) -> Result<ResMat2> {
    let modulus = checked_modulus(p, k)?;
    let mut acc = ResMat2::identity(modulus);
    for &letter in &source.prefix(m)? {
        acc = acc.mul(&ResMat2::letter(letter as u64, modulus));
    }
    Ok(acc)
}

/// Least `m ≥ 1` with `φ_k(A_{w_m}) = Id`, within `n_max` steps.
pub fn identity_return(source: &WordSource, p: u64, k: u32, n_max: usize) -> Result<Option<usize>> {
    let modulus = checked_modulus(p, k)?;
    let mut acc = ResMat2::identity(modulus);
    let prefix = source.prefix(n_max)?;
    for (i, &letter) in prefix.iter().enumerate() {
        acc = acc.mul(&ResMat2::letter(letter as u64, modulus));
        if acc.is_identity() {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// The distinct sets `U_k(T^m w)` for `m ≤ shift_max`, with the map from
/// shift to collection index (indices by first appearance).
#[derive(Debug, Clone)]
pub struct UkCollection {
    pub sets: Vec<UkSet>,
    /// `assignment[m]` = index of `U_k(T^m w)` in `sets`.
    pub assignment: Vec<usize>,
    pub all_saturated: bool,
    /// All members have equal cardinality (checked only when saturated).
    pub equal_cardinality: Option<bool>,
}

pub fn uk_collection(
    source: &WordSource,
    p: u64,
    k: u32,
    shift_max: usize,
    n_max: Option<usize>,
) -> Result<UkCollection> {
    let mut sets: Vec<UkSet> = Vec::new();
    let mut index: BTreeMap<Vec<[u64; 4]>, usize> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(shift_max + 1);
    for m in 0..=shift_max {
        let uk = uk_set(&source.shifted(m), p, k, n_max)?;
        let key = uk.canonical_key();
        let idx = match index.get(&key) {
            Some(&i) => i,
            None => {
                let i = sets.len();
                index.insert(key, i);
                sets.push(uk);
                i
            }
        };
        assignment.push(idx);
    }
    let all_saturated = sets.iter().all(|s| s.saturated.is_saturated());
    let equal_cardinality = if all_saturated {
        let first = sets[0].len();
        Some(sets.iter().all(|s| s.len() == first))
    } else {
        None
    };
    Ok(UkCollection {
        sets,
        assignment,
        all_saturated,
        equal_cardinality,
    })
}

/// `V_k(n, w)`: images `φ_k(A_{w_m})` over shifts `m ≤ shift_max` at which
/// `w_n` is a prefix of `T^m w` (`n = 0` admits every shift).
pub fn vk_set(
    source: &WordSource,
    n: usize,
    p: u64,
    k: u32,
    shift_max: usize,
) -> Result<BTreeSet<ResMat2>> {
    let modulus = checked_modulus(p, k)?;
    let prefix = source.prefix(shift_max + n)?;
    let pattern = &prefix[..n];
    let mut out = BTreeSet::new();
    let mut acc = ResMat2::identity(modulus);
    for m in 0..=shift_max {
        if m > 0 {
            acc = acc.mul(&ResMat2::letter(prefix[m - 1] as u64, modulus));
        }
        if m + n <= prefix.len() && &prefix[m..m + n] == pattern {
            out.insert(acc);
        }
    }
    Ok(out)
}

/// Executable form of the shift identity: `φ_k(A_{w_m}) · U_k(T^m w) =
/// U_k(w)` for recurrent words, as exact set equality of saturated scans.
pub fn lem3_identity_holds(
    source: &WordSource,
    p: u64,
    k: u32,
    m: usize,
    n_max: Option<usize>,
) -> Result<bool> {
    let base = uk_set(source, p, k, n_max)?;
    let shifted = uk_set(&source.shifted(m), p, k, n_max)?;
    if !base.saturated.is_saturated() || !shifted.saturated.is_saturated() {
        return Err(DynError::Unsaturated {
            scanned: base.prefixes_scanned.max(shifted.prefixes_scanned),
        });
    }
    let a = prefix_matrix(source, m, p, k)?;
    Ok(shifted.left_translate(&a) == base.matrices)
}

/// Smallest `n ≤ n_cap` such that every `A ∈ V_k(n, w)` satisfies
/// `A·U_k(w) = U_k(w)`, with the witnessing tower size.
pub fn stabilizing_vk_level(
    source: &WordSource,
    p: u64,
    k: u32,
    shift_max: usize,
    n_cap: usize,
) -> Result<Option<usize>> {
    let base = uk_set(source, p, k, None)?;
    if !base.saturated.is_saturated() {
        return Err(DynError::Unsaturated {
            scanned: base.prefixes_scanned,
        });
    }
    for n in 1..=n_cap {
        let v = vk_set(source, n, p, k, shift_max)?;
        if v.iter().all(|a| base.is_stabilized_by(a)) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// The derived word u(k).
// ---------------------------------------------------------------------------

/// `u(k) = b₁b₂…` with `b_n = U_k(T^{n−1} w)`, letters being collection
/// indices (first-appearance order).
#[derive(Debug, Clone)]
pub struct DerivedWord {
    pub letters: Vec<usize>,
    pub collection: UkCollection,
}

pub fn derived_word(
    source: &WordSource,
    p: u64,
    k: u32,
    length: usize,
    n_max: Option<usize>,
) -> Result<DerivedWord> {
    let collection = uk_collection(source, p, k, length.saturating_sub(1), n_max)?;
    let letters = collection.assignment[..length].to_vec();
    Ok(DerivedWord {
        letters,
        collection,
    })
}

/// Two-letter factors of `u(k)` determining letters of `w`: returns the
/// collision pairs `((c₁, c₂), {letters})` that violate uniqueness.
pub fn derived_pair_collisions(
    source: &WordSource,
    derived: &DerivedWord,
) -> Result<Vec<((usize, usize), BTreeSet<u8>)>> {
    let len = derived.letters.len();
    if len < 2 {
        return Ok(Vec::new());
    }
    let w_prefix = source.prefix(len)?;
    let mut map: BTreeMap<(usize, usize), BTreeSet<u8>> = BTreeMap::new();
    for n in 0..len - 1 {
        let key = (derived.letters[n], derived.letters[n + 1]);
        // b_n b_{n+1} sits over the n-th letter of w (1-based a_n).
        map.entry(key).or_default().insert(w_prefix[n]);
    }
    Ok(map
        .into_iter()
        .filter(|(_, letters)| letters.len() > 1)
        .collect())
}

/// `l`-letter factors of `w` determining `(l+1)`-letter factors of `u(k)`:
/// collision report mirroring [`derived_pair_collisions`].
pub fn factor_determines_derived(
    source: &WordSource,
    derived: &DerivedWord,
    l: usize,
) -> Result<Vec<(Vec<u8>, BTreeSet<Vec<usize>>)>> {
    let len = derived.letters.len();
    if len < l + 1 {
        return Ok(Vec::new());
    }
    let w_prefix = source.prefix(len)?;
    let mut map: BTreeMap<Vec<u8>, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for n in 0..=len - l - 1 {
        if n + l > w_prefix.len() {
            break;
        }
        let v = w_prefix[n..n + l].to_vec();
        let v_derived = derived.letters[n..n + l + 1].to_vec();
        map.entry(v).or_default().insert(v_derived);
    }
    Ok(map
        .into_iter()
        .filter(|(_, images)| images.len() > 1)
        .collect())
}

// ---------------------------------------------------------------------------
// Bipartite factor graphs G_n.
// ---------------------------------------------------------------------------

/// `G_n`: left and right vertex sets are the length-`n` factors; `(s, t)`
/// is an edge iff `st` is a length-`2n` factor.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    pub n: usize,
    pub left: Vec<Vec<u8>>,
    pub right: Vec<Vec<u8>>,
    /// Index pairs into `left` × `right`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub components: usize,
    /// Both factor sets and the edge set are certified exact.
    pub exact: bool,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        let mut roots = BTreeSet::new();
        for x in 0..n {
            let r = self.find(x);
            roots.insert(r);
        }
        roots.len()
    }
}

/// Build `G_n` on a window.  Edges are found by testing each pair
/// `(s, t)` against the independently enumerated `2n`-factor set, so the
/// edge-count law `#E = P(w, 2n)` is a genuine cross-check, not a
/// construction artifact.
pub fn factor_graph(source: &WordSource, n: usize, window: usize) -> Result<FactorGraph> {
    assert!(n >= 1);
    let fs_n = factors(source, n, window)?;
    let fs_2n = factors(source, 2 * n, window)?;
    let left: Vec<Vec<u8>> = fs_n.factors.iter().cloned().collect();
    let right = left.clone();
    let mut edges = Vec::new();
    let mut joined = Vec::with_capacity(2 * n);
    for (i, s) in left.iter().enumerate() {
        for (j, t) in right.iter().enumerate() {
            joined.clear();
            joined.extend_from_slice(s);
            joined.extend_from_slice(t);
            if fs_2n.factors.contains(&joined) {
                edges.push((i, j));
            }
        }
    }
    let mut uf = UnionFind::new(left.len() + right.len());
    for &(i, j) in &edges {
        uf.union(i, left.len() + j);
    }
    let components = uf.component_count();
    Ok(FactorGraph {
        n,
        left,
        right,
        edges,
        components,
        exact: fs_n.exact && fs_2n.exact,
    })
}
