//! Generalized interaction graphs whose edges are cliques of two or more
//! nodes, plus the finite-time averaging questions asked of `k`-regular ones.
//!
//! Graph files are JSON of the form `{"n": 4, "edges": [[1,2,3],[3,4]]}` with
//! 1-based nodes; in memory nodes are 0-based.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::{check_clique_size, checked_edge, k_subsets};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct GeneralizedGraph {
    n: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<GraphFile> for GeneralizedGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        let edges = file
            .edges
            .into_iter()
            .map(|e| crate::io::from_one_based(&e))
            .collect::<Result<Vec<_>>>()?;
        GeneralizedGraph::new(file.n, edges)
    }
}

impl From<GeneralizedGraph> for GraphFile {
    fn from(g: GeneralizedGraph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|e| crate::io::to_one_based(e)).collect(),
        }
    }
}

impl GeneralizedGraph {
    /// Validates every edge, sorts each one and drops duplicates (first
    /// occurrence wins, order otherwise kept).
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a graph needs at least one node".into()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for edge in edges {
            let edge = checked_edge(&edge, n)?;
            if seen.insert(edge.clone()) {
                out.push(edge);
            }
        }
        Ok(GeneralizedGraph { n, edges: out })
    }

    /// Every `k`-subset of the nodes as an edge.
    pub fn complete_k_regular(n: usize, k: usize) -> Result<Self> {
        check_clique_size(n, k)?;
        Ok(GeneralizedGraph {
            n,
            edges: k_subsets(n, k),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Vacuously true for a graph with no edges.
    pub fn is_k_regular(&self, k: usize) -> bool {
        self.edges.iter().all(|e| e.len() == k)
    }

    /// Whether deterministic clique gossiping over this graph drives every
    /// reduced state to the network average.
    ///
    /// Checked as connectivity of the pairwise graph `{ {i,j} : i, j in some
    /// edge }` over all `n` nodes. Unlike the "cover plus overlap" phrasing,
    /// this is well defined for a single edge.
    pub fn reduced_consensus_condition(&self) -> bool {
        let mut sets = DisjointSets::new(self.n);
        for edge in &self.edges {
            for &v in &edge[1..] {
                sets.union(edge[0], v);
            }
        }
        sets.components == 1
    }
}

/// Reports `reduced_consensus_condition` for a graph; free-function form.
pub fn reduced_consensus_condition(g: &GeneralizedGraph) -> bool {
    g.reduced_consensus_condition()
}

pub fn is_k_regular(g: &GeneralizedGraph, k: usize) -> bool {
    g.is_k_regular(k)
}

struct DisjointSets {
    parent: Vec<usize>,
    components: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            components: n,
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
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
pub fn prime_factors(mut x: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut e = 0;
        while x % p == 0 {
            x /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteTimeReport {
    pub n: usize,
    pub k: usize,
    pub feasible: bool,
    /// Step count of the fastest schedule; present only when feasible.
    #[serde(rename = "T")]
    pub steps: Option<usize>,
    pub n_factors: Vec<(usize, u32)>,
    pub k_factors: Vec<(usize, u32)>,
}

/// Whether some `k`-regular graph averages `n` reduced states exactly in
/// finitely many steps, and the step count of the fastest such schedule.
///
/// With `k = p1^r1 .. pd^rd`, feasibility requires `n = p1^s1 .. pd^sd` over
/// the same primes with `s_i >= r_i`; the fastest schedule then takes
/// `n * max_i ceil(s_i / r_i) / k` steps.
pub fn finite_time_feasible(n: usize, k: usize) -> Result<FiniteTimeReport> {
    check_clique_size(n, k)?;
    let n_factors = prime_factors(n);
    let k_factors = prime_factors(k);
    let same_primes = n_factors.len() == k_factors.len()
        && n_factors
            .iter()
            .zip(&k_factors)
            .all(|(&(pn, s), &(pk, r))| pn == pk && s >= r);
    let steps = same_primes.then(|| {
        let rounds = n_factors
            .iter()
            .zip(&k_factors)
            .map(|(&(_, s), &(_, r))| s.div_ceil(r) as usize)
            .max()
            .unwrap_or(1);
        n * rounds / k
    });
    Ok(FiniteTimeReport {
        n,
        k,
        feasible: same_primes,
        steps,
        n_factors,
        k_factors,
    })
}

/// Outcome of [`search_finite_time_schedule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleSearch {
    /// Shortest edge sequence found, in application order.
    pub schedule: Option<Vec<Vec<usize>>>,
    /// True when the state budget ran out before the depth bound was reached,
    /// so a `None` schedule proves nothing.
    pub budget_exhausted: bool,
    /// Distinct averaging matrices visited.
    pub states_explored: usize,
}

pub const DEFAULT_SEARCH_BUDGET: usize = 2_000_000;

/// Looks for a sequence of at most `max_steps` size-`k` cliques whose reduced
/// dynamics maps every initial assignment exactly onto its average.
///
/// Breadth-first over the products of clique averaging matrices, in exact
/// rational arithmetic, deduplicating matrices that agree up to a relabeling
/// of the nodes. Returns a shortest schedule when one exists within the bound.
pub fn search_finite_time_schedule(n: usize, k: usize, max_steps: usize) -> Result<ScheduleSearch> {
    search_finite_time_schedule_with_budget(n, k, max_steps, DEFAULT_SEARCH_BUDGET)
}

pub fn search_finite_time_schedule_with_budget(
    n: usize,
    k: usize,
    max_steps: usize,
    budget: usize,
) -> Result<ScheduleSearch> {
    check_clique_size(n, k)?;
    if n > 8 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive schedule search is limited to n <= 8, got {n}"
        )));
    }
    let edges = k_subsets(n, k);
    let relabelings = all_relabelings(n);
    let mut nodes: Vec<(usize, usize)> = Vec::new(); // (parent, edge index)
    let mut seen = HashSet::new();
    let root = RationalMatrix::identity(n);
    seen.insert(root.canonical_key(&relabelings));
    // Every k-subset is an edge and the target is symmetric, so the first step
    // can be fixed to edge 0 without losing any schedule up to relabeling.
    let mut frontier: Vec<(Option<usize>, RationalMatrix)> = vec![(None, root)];
    for depth in 1..=max_steps {
        let mut next = Vec::new();
        for (node, matrix) in &frontier {
            let choices = if depth == 1 { 0..1 } else { 0..edges.len() };
            for e in choices {
                let child = matrix.average_over(&edges[e], k)?;
                if !seen.insert(child.canonical_key(&relabelings)) {
                    continue;
                }
                let idx = nodes.len();
                nodes.push((node.unwrap_or(usize::MAX), e));
                if child.is_uniform() {
                    let mut path = vec![e];
                    let mut cursor = nodes[idx].0;
                    while cursor != usize::MAX {
                        path.push(nodes[cursor].1);
                        cursor = nodes[cursor].0;
                    }
                    path.reverse();
                    return Ok(ScheduleSearch {
                        schedule: Some(path.into_iter().map(|e| edges[e].clone()).collect()),
                        budget_exhausted: false,
                        states_explored: seen.len(),
                    });
                }
                if seen.len() >= budget {
                    return Ok(ScheduleSearch {
                        schedule: None,
                        budget_exhausted: true,
                        states_explored: seen.len(),
                    });
                }
                next.push((Some(idx), child));
            }
        }
        frontier = next;
    }
    Ok(ScheduleSearch {
        schedule: None,
        budget_exhausted: false,
        states_explored: seen.len(),
    })
}

/// Node relabelings used to canonicalize matrices. Only a subgroup large
/// enough to be useful is enumerated for larger `n`; any subgroup keeps the
/// deduplication sound.
fn all_relabelings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        if out.len() >= 5040 || !next_permutation(&mut current) {
            break;
        }
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
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

/// Row-major `n x n` rational matrix sharing one denominator, kept in lowest
/// terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct RationalMatrix {
    n: usize,
    num: Vec<i128>,
    den: i128,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalMatrix {
    fn identity(n: usize) -> Self {
        let mut num = vec![0; n * n];
        for i in 0..n {
            num[i * n + i] = 1;
        }
        RationalMatrix { n, num, den: 1 }
    }

    /// Left-multiplies by the averaging matrix of `edge`: rows in the edge are
    /// replaced by their mean, other rows are untouched.
    fn average_over(&self, edge: &[usize], k: usize) -> Result<Self> {
        let n = self.n;
        let k = k as i128;
        let overflow = || Error::InvalidArgument("schedule search overflowed i128".into());
        let mut num = vec![0i128; n * n];
        let mut in_edge = vec![false; n];
        for &v in edge {
            in_edge[v] = true;
        }
        let mut sum = vec![0i128; n];
        for &v in edge {
            for c in 0..n {
                sum[c] += self.num[v * n + c];
            }
        }
        for r in 0..n {
            for c in 0..n {
                num[r * n + c] = if in_edge[r] {
                    sum[c]
                } else {
                    self.num[r * n + c].checked_mul(k).ok_or_else(overflow)?
                };
            }
        }
        let den = self.den.checked_mul(k).ok_or_else(overflow)?;
        let g = num.iter().fold(den, |g, &x| gcd_i128(g, x));
        Ok(RationalMatrix {
            n,
            num: num.into_iter().map(|x| x / g).collect(),
            den: den / g,
        })
    }

    fn is_uniform(&self) -> bool {
        self.num.iter().all(|&x| x == self.num[0])
    }

    /// Lexicographically least numerator vector over simultaneous row and
    /// column relabelings, plus the denominator.
    fn canonical_key(&self, relabelings: &[Vec<usize>]) -> (Vec<i128>, i128) {
        let n = self.n;
        let mut best: Option<Vec<i128>> = None;
        let mut scratch = vec![0i128; n * n];
        for sigma in relabelings {
            for r in 0..n {
                for c in 0..n {
                    scratch[r * n + c] = self.num[sigma[r] * n + sigma[c]];
                }
            }
            if best.as_ref().is_none_or(|b| scratch < *b) {
                best = Some(scratch.clone());
            }
        }
        (best.unwrap_or_default(), self.den)
    }
}
