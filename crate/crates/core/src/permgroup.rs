//! Permutations of the node set, the cyclic permutations carried by cliques,
//! and closure of generated subgroups.
//!
//! Nodes are 0-based in the Rust API. Serialized permutations (JSON) are
//! written as 1-based image arrays.
//!
//! Composition is fixed once for the whole crate: `p.compose(&q)` is the map
//! `i -> p(q(i))`, i.e. `q` acts first.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default element budget for [`generate_subgroup`]. Full permutation groups
/// up to seven nodes (5040 elements) fit comfortably.
pub const DEFAULT_SUBGROUP_CAP: usize = 50_000;

/// A bijection on `{0, .., n-1}`; `images[i]` is the image of `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "OneBased", into = "OneBased")]
pub struct Permutation {
    images: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct OneBased(Vec<usize>);

impl TryFrom<OneBased> for Permutation {
    type Error = Error;

    fn try_from(value: OneBased) -> Result<Self> {
        Permutation::from_one_based(&value.0)
    }
}

impl From<Permutation> for OneBased {
    fn from(p: Permutation) -> Self {
        OneBased(p.to_one_based())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 0-based images, rejecting anything that is
    /// not a bijection.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {x} out of range for {n} points"
                )));
            }
            if std::mem::replace(&mut seen[x], true) {
                return Err(Error::InvalidPermutation(format!("image {x} repeated")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let zero_based = images
            .iter()
            .map(|&x| {
                x.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("1-based image 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(zero_based)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x + 1).collect()
    }

    /// Number of points acted on.
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self.compose_unchecked(other))
    }

    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    /// `self` composed with itself `t` times; `pow(0)` is the identity.
    pub fn pow(&self, t: usize) -> Permutation {
        let mut images = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mut x = i;
            for _ in 0..t % self.order_of_point(i) {
                x = self.images[x];
            }
            images.push(x);
        }
        Permutation { images }
    }

    fn order_of_point(&self, i: usize) -> usize {
        let mut x = self.images[i];
        let mut len = 1;
        while x != i {
            x = self.images[x];
            len += 1;
        }
        len
    }

    /// Disjoint cycles of length at least two, each starting at its smallest
    /// element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.images[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Points moved by the permutation, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.images[i] != i).collect()
    }

    pub fn parity(&self) -> Parity {
        // A cycle of length L is a product of L - 1 transpositions.
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Least `t >= 1` with `self.pow(t)` the identity.
    pub fn order(&self) -> usize {
        self.cycles().iter().fold(1, |acc, c| lcm(acc, c.len()))
    }

    /// True when this is a single cycle whose support is exactly `edge`.
    pub fn is_cycle_on(&self, edge: &[usize]) -> bool {
        let cycles = self.cycles();
        if cycles.len() != 1 {
            return false;
        }
        let mut sorted = edge.to_vec();
        sorted.sort_unstable();
        self.support() == sorted
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "()");
        }
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (idx, x) in cycle.iter().enumerate() {
                if idx > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", x + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

pub(crate) fn factorial(k: usize) -> usize {
    (1..=k).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `compose(p, q)(i) = p(q(i))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    p.compose(q)
}

pub fn power(p: &Permutation, t: usize) -> Permutation {
    p.pow(t)
}

pub fn parity(p: &Permutation) -> Parity {
    p.parity()
}

/// Sorts an edge and checks it is a set of at least two distinct nodes below
/// `n`.
pub fn checked_edge(edge: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sorted = edge.to_vec();
    sorted.sort_unstable();
    let invalid = |reason| Error::InvalidEdge {
        edge: edge.to_vec(),
        n,
        reason,
    };
    if sorted.len() < 2 {
        return Err(invalid("an edge needs at least two nodes"));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("repeated node"));
    }
    if sorted.last().is_some_and(|&x| x >= n) {
        return Err(invalid("node out of range"));
    }
    Ok(sorted)
}

/// Every cyclic permutation of `edge` (identity off the edge), in canonical
/// order.
///
/// With the edge sorted as `v1 < v2 < .. < vk`, each cycle is written starting
/// from `v1` and the cycles are listed in lexicographic order of the remaining
/// sequence. Index 0 is therefore `v1 -> v2 -> .. -> vk -> v1`.
pub fn cyclic_perms_over(edge: &[usize], n: usize) -> Result<Vec<Permutation>> {
    let edge = checked_edge(edge, n)?;
    let mut out = Vec::with_capacity(factorial(edge.len() - 1));
    let mut rest = edge[1..].to_vec();
    loop {
        out.push(cycle_through(edge[0], &rest, n));
        if !next_lexicographic(&mut rest) {
            break;
        }
    }
    Ok(out)
}

/// The `index`-th cyclic permutation of `edge` in the order of
/// [`cyclic_perms_over`], computed without listing the others.
pub fn cyclic_perm(edge: &[usize], n: usize, index: usize) -> Result<Permutation> {
    let edge = checked_edge(edge, n)?;
    let count = factorial(edge.len() - 1);
    if index >= count {
        return Err(Error::InvalidArgument(format!(
            "cycle index {index} out of range, edge has {count} cyclic permutations"
        )));
    }
    let rest = nth_arrangement(&edge[1..], index);
    Ok(cycle_through(edge[0], &rest, n))
}

/// The canonical cycle `v1 -> v2 -> .. -> vk -> v1` over the sorted edge.
pub fn canonical_cycle(edge: &[usize], n: usize) -> Result<Permutation> {
    cyclic_perm(edge, n, 0)
}

fn cycle_through(first: usize, rest: &[usize], n: usize) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    let mut prev = first;
    for &x in rest {
        images[prev] = x;
        prev = x;
    }
    images[prev] = first;
    Permutation { images }
}

/// Lexicographic rank-`index` arrangement of a sorted slice (factorial number
/// system).
fn nth_arrangement(sorted: &[usize], mut index: usize) -> Vec<usize> {
    let mut pool = sorted.to_vec();
    let mut out = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        let block = factorial(pool.len() - 1);
        out.push(pool.remove(index / block));
        index %= block;
    }
    out
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// All `k`-subsets of `{0, .., n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
    out
}

/// The set `P_k`: every `k`-cycle over some `k` nodes, identity elsewhere.
///
/// Ordered by edge (lexicographic `k`-subset) and then by cycle index, so
/// element `e * (k-1)! + c` is cycle `c` over the `e`-th subset.
pub fn enumerate_pk(n: usize, k: usize) -> Result<Vec<Permutation>> {
    check_clique_size(n, k)?;
    let mut out = Vec::with_capacity(binomial(n, k) * factorial(k - 1));
    for edge in k_subsets(n, k) {
        out.extend(cyclic_perms_over(&edge, n)?);
    }
    Ok(out)
}

pub(crate) fn check_clique_size(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "clique size must satisfy 2 <= k <= n, got n={n}, k={k}"
        )));
    }
    Ok(())
}

/// A finite permutation group stored as its full element list.
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    elements: Vec<Permutation>,
    index: HashSet<Permutation>,
}

impl PermutationGroup {
    pub fn trivial(n: usize) -> Self {
        let id = Permutation::identity(n);
        PermutationGroup {
            degree: n,
            elements: vec![id.clone()],
            index: HashSet::from([id]),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Number of points the elements act on.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.elements.iter()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains(p)
    }

    /// True when every element is even.
    pub fn is_even(&self) -> bool {
        self.elements.iter().all(|p| p.parity() == Parity::Even)
    }
}

/// Closure of `generators` under composition, by breadth-first expansion from
/// the identity. Fails with [`Error::GroupTooLarge`] as soon as the element
/// count would exceed `cap`.
pub fn generate_subgroup(generators: &[Permutation], cap: usize) -> Result<PermutationGroup> {
    let Some(first) = generators.first() else {
        return Err(Error::InvalidArgument(
            "at least one generator is required".into(),
        ));
    };
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be at least 1".into()));
    }
    let n = first.len();
    if let Some(bad) = generators.iter().find(|g| g.len() != n) {
        return Err(Error::SizeMismatch {
            left: n,
            right: bad.len(),
        });
    }

    let mut group = PermutationGroup::trivial(n);
    let mut frontier = vec![Permutation::identity(n)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for element in &frontier {
            for g in generators {
                let candidate = element.compose_unchecked(g);
                if group.index.contains(&candidate) {
                    continue;
                }
                if group.elements.len() == cap {
                    return Err(Error::GroupTooLarge { cap });
                }
                group.index.insert(candidate.clone());
                group.elements.push(candidate.clone());
                next.push(candidate);
            }
        }
        frontier = next;
    }
    Ok(group)
}

/// The subgroup generated by `P_k`, which governs the limit of random clique
/// gossiping.
pub fn pk_generated_group(n: usize, k: usize, cap: usize) -> Result<PermutationGroup> {
    generate_subgroup(&enumerate_pk(n, k)?, cap)
}
