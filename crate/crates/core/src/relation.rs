//! Finitary relations over `{0..k-1}` stored as dense bitsets.
//!
//! The tuple `(a1, ..., an)` sits at bit `a1*k^(n-1) + ... + an`, so argument 1
//! is the most significant digit. This is the only encoding used anywhere in
//! the crate, including in the canonical text form.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// An element of a universe `{0..k-1}`.
pub type Elem = u32;

const WORD: usize = 64;

/// Number of tuples in `A^n` for `|A| = k`, or `None` on overflow.
pub fn tuple_count(k: u32, n: usize) -> Option<usize> {
    (k as usize).checked_pow(u32::try_from(n).ok()?)
}

/// Positional index of a tuple, argument 1 most significant.
pub fn tuple_index(k: u32, tuple: &[Elem]) -> usize {
    tuple
        .iter()
        .fold(0usize, |acc, &a| acc * k as usize + a as usize)
}

/// Inverse of [`tuple_index`].
pub fn tuple_of_index(k: u32, n: usize, mut index: usize) -> Vec<Elem> {
    let mut t = vec![0; n];
    for slot in t.iter_mut().rev() {
        *slot = (index % k as usize) as Elem;
        index /= k as usize;
    }
    t
}

/// A total map `sigma: {1..source} -> {1..target}` used to take minors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinorMap {
    target: usize,
    /// `sigma[i - 1] = sigma(i)`, values in `1..=target`.
    sigma: Vec<usize>,
}

impl MinorMap {
    pub fn new(target: usize, sigma: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = sigma.iter().find(|&&j| j == 0 || j > target) {
            return Err(Error::Arity(format!(
                "minor map value {bad} is outside {{1..{target}}}"
            )));
        }
        Ok(MinorMap { target, sigma })
    }

    pub fn identity(n: usize) -> Self {
        MinorMap {
            target: n,
            sigma: (1..=n).collect(),
        }
    }

    pub fn source(&self) -> usize {
        self.sigma.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// `sigma(i)` for `i` in `1..=source`.
    pub fn apply(&self, i: usize) -> usize {
        self.sigma[i - 1]
    }

    pub fn values(&self) -> &[usize] {
        &self.sigma
    }

    /// `then ∘ self`: taking the minor by `self` and then by `then` equals the
    /// minor by the composite.
    pub fn then(&self, then: &MinorMap) -> Result<MinorMap> {
        if then.source() != self.target {
            return Err(Error::Arity(format!(
                "cannot compose a map into {{1..{}}} with a map from {{1..{}}}",
                self.target,
                then.source()
            )));
        }
        Ok(MinorMap {
            target: then.target,
            sigma: self.sigma.iter().map(|&j| then.apply(j)).collect(),
        })
    }

    /// Every map `{1..source} -> {1..target}`, in lexicographic order.
    pub fn all(source: usize, target: usize) -> impl Iterator<Item = MinorMap> {
        let total = if target == 0 && source > 0 {
            0
        } else {
            target.checked_pow(source as u32).unwrap_or(usize::MAX)
        };
        (0..total).map(move |mut code| {
            let mut sigma = vec![0; source];
            for slot in sigma.iter_mut().rev() {
                *slot = code % target + 1;
                code /= target;
            }
            MinorMap { target, sigma }
        })
    }
}

impl fmt::Display for MinorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.sigma.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}↦{}", i + 1, j)?;
        }
        write!(f, "}}")
    }
}

/// A subset of `A^n` for `A = {0..k-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    k: u32,
    arity: usize,
    bits: Vec<u64>,
}

impl Relation {
    /// The empty `n`-ary relation. Panics if `k^n` overflows `usize`.
    pub fn empty(k: u32, arity: usize) -> Self {
        let size = tuple_count(k, arity).expect("relation size overflows usize");
        Relation {
            k,
            arity,
            bits: vec![0; size.div_ceil(WORD)],
        }
    }

    pub fn full(k: u32, arity: usize) -> Self {
        let mut r = Self::empty(k, arity);
        r.bits.iter_mut().for_each(|w| *w = !0);
        r.trim();
        r
    }

    /// Builds a relation from tuples, validating lengths and entries.
    pub fn from_tuples<'a, I>(k: u32, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [Elem]>,
    {
        let mut r = Self::empty(k, arity);
        for t in tuples {
            if t.len() != arity {
                return Err(Error::Arity(format!(
                    "tuple of length {} in a relation of arity {arity}",
                    t.len()
                )));
            }
            if let Some(&a) = t.iter().find(|&&a| a >= k) {
                return Err(Error::OutOfRange(format!(
                    "element {a} in a universe of size {k}"
                )));
            }
            r.insert(tuple_index(k, t));
        }
        Ok(r)
    }

    pub fn from_indices(k: u32, arity: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut r = Self::empty(k, arity);
        for i in indices {
            r.insert(i);
        }
        r
    }

    pub(crate) fn from_words(k: u32, arity: usize, bits: Vec<u64>) -> Self {
        let mut r = Relation { k, arity, bits };
        debug_assert_eq!(r.bits.len(), r.size().div_ceil(WORD));
        r.trim();
        r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Number of tuples in `A^n`, i.e. the bit length.
    pub fn size(&self) -> usize {
        tuple_count(self.k, self.arity).unwrap()
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.bits[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        tuple.len() == self.arity
            && tuple.iter().all(|&a| a < self.k)
            && self.contains_index(tuple_index(self.k, tuple))
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.size(), "tuple index {i} out of range");
        self.bits[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        self.bits[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.size()
    }

    /// Tuple indices of the members, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn tuples(&self) -> Vec<Vec<Elem>> {
        self.iter()
            .map(|i| tuple_of_index(self.k, self.arity, i))
            .collect()
    }

    fn same_shape(&self, other: &Relation) -> Result<()> {
        if self.k != other.k {
            return Err(Error::UniverseMismatch(self.k, other.k));
        }
        if self.arity != other.arity {
            return Err(Error::Arity(format!(
                "relations of arity {} and {}",
                self.arity, other.arity
            )));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        self.same_shape(other)?;
        let mut r = self.clone();
        r.and_assign(other);
        Ok(r)
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.same_shape(other)?;
        let mut r = self.clone();
        r.or_assign(other);
        Ok(r)
    }

    pub fn complement(&self) -> Relation {
        let mut r = self.clone();
        r.bits.iter_mut().for_each(|w| *w = !*w);
        r.trim();
        r
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        debug_assert!(self.same_shape(other).is_ok());
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| a & !b == 0)
    }

    pub(crate) fn and_assign(&mut self, other: &Relation) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub(crate) fn or_assign(&mut self, other: &Relation) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    fn trim(&mut self) {
        let size = self.size();
        let rem = size % WORD;
        if rem != 0 {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// The minor `{ b in A^m | (b_sigma(1), ..., b_sigma(n)) in self }`.
    pub fn minor(&self, map: &MinorMap) -> Result<Relation> {
        if map.source() != self.arity {
            return Err(Error::Arity(format!(
                "minor map from {{1..{}}} applied to a relation of arity {}",
                map.source(),
                self.arity
            )));
        }
        let k = self.k as usize;
        let n = self.arity;
        let m = map.target();
        // Source index is linear in the target digits: weight[j] collects
        // k^(n-i) for every source position i sent to target position j.
        let mut weight = vec![0usize; m];
        let mut place = 1usize;
        for i in (0..n).rev() {
            weight[map.sigma[i] - 1] += place;
            place *= k;
        }
        let mut out = Relation::empty(self.k, m);
        let total = out.size();
        let mut digits = vec![0usize; m];
        let mut src = 0usize;
        for idx in 0..total {
            if self.contains_index(src) {
                out.bits[idx / WORD] |= 1 << (idx % WORD);
            }
            // odometer, last digit fastest
            for j in (0..m).rev() {
                if digits[j] + 1 < k {
                    digits[j] += 1;
                    src += weight[j];
                    break;
                }
                src -= digits[j] * weight[j];
                digits[j] = 0;
            }
        }
        Ok(out)
    }

    /// Canonical text `rel/k/n:{(t),(t),...}`, tuples ascending by index.
    pub fn canonical_text(&self) -> String {
        self.to_string()
    }

    /// Parses the canonical text form.
    pub fn parse_canonical(text: &str) -> Result<Relation> {
        let text = text.trim();
        let bad = |msg: &str| Error::syntax(1, 1, format!("relation text: {msg}"));
        let rest = text
            .strip_prefix("rel/")
            .ok_or_else(|| bad("expected `rel/k/n:{...}`"))?;
        let (head, body) = rest.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let (k, n) = head.split_once('/').ok_or_else(|| bad("missing arity"))?;
        let k: u32 = k.trim().parse().map_err(|_| bad("bad universe size"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("bad arity"))?;
        if k == 0 || n == 0 {
            return Err(bad("universe size and arity must be positive"));
        }
        Self::parse_tuple_set(k, n, body)
    }

    /// Parses `{(a,b),(c,d)}` as an `n`-ary relation over `{0..k-1}`.
    pub fn parse_tuple_set(k: u32, n: usize, text: &str) -> Result<Relation> {
        let bad = |msg: String| Error::syntax(1, 1, format!("tuple set: {msg}"));
        let body = text
            .trim()
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| bad("expected `{...}`".into()))?;
        let mut tuples = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| bad(format!("expected `(` at `{rest}`")))?;
            let close = open.find(')').ok_or_else(|| bad("unclosed tuple".into()))?;
            let tuple = open[..close]
                .split(',')
                .map(|s| s.trim().parse::<Elem>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(format!("bad tuple `({})`", &open[..close])))?;
            tuples.push(tuple);
            rest = open[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        }
        Relation::from_tuples(k, n, tuples.iter().map(Vec::as_slice))
    }
}

impl Ord for Relation {
    /// Universe size, then arity, then the bitset read as a big-endian integer.
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then(self.arity.cmp(&other.arity))
            .then_with(|| self.bits.iter().rev().cmp(other.bits.iter().rev()))
    }
}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rel/{}/{}:{{", self.k, self.arity)?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            for (j, a) in tuple_of_index(self.k, self.arity, i).iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A relation viewed as its characteristic function `A^n -> {0,1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharFunction(Relation);

pub fn char_fn(t: &Relation) -> CharFunction {
    CharFunction(t.clone())
}

/// The function minor `f'(b) = f(b_sigma(1), ..., b_sigma(n))`.
pub fn char_minor(f: &CharFunction, map: &MinorMap) -> Result<CharFunction> {
    f.0.minor(map).map(CharFunction)
}

impl CharFunction {
    pub fn arity(&self) -> usize {
        self.0.arity()
    }

    pub fn value(&self, tuple: &[Elem]) -> u8 {
        self.0.contains(tuple) as u8
    }

    pub fn value_at_index(&self, i: usize) -> u8 {
        self.0.contains_index(i) as u8
    }

    /// Pointwise meet in the two-element lattice.
    pub fn meet(&self, other: &CharFunction) -> Result<CharFunction> {
        self.0.intersect(&other.0).map(CharFunction)
    }

    /// Pointwise join in the two-element lattice.
    pub fn join(&self, other: &CharFunction) -> Result<CharFunction> {
        self.0.union(&other.0).map(CharFunction)
    }

    pub fn support(&self) -> &Relation {
        &self.0
    }

    pub fn into_relation(self) -> Relation {
        self.0
    }
}
