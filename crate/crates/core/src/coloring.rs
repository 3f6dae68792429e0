//! Vertex coloring, independence number and code-size bounds.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::confusion::{ConfusionGraph, ConnectionSet};
use crate::error::{Error, Result};
use crate::field::{PrimeField, Word};
use crate::graph::{iter_bits, words_for, Graph};
use crate::model::FicpInstance;

/// Node-expansion budget used when the caller has no preference.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Coloring {
    pub color_of: Vec<usize>,
    pub num_colors: usize,
}

impl Coloring {
    pub fn new(color_of: Vec<usize>) -> Self {
        let num_colors = color_of.iter().map(|&c| c + 1).max().unwrap_or(0);
        Coloring {
            color_of,
            num_colors,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.color_of.len()
    }

    /// Vertices of each color, ascending; empty colors yield empty classes.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.num_colors];
        for (v, &c) in self.color_of.iter().enumerate() {
            classes[c].push(v);
        }
        classes
    }

    /// First monochromatic edge, if any.
    pub fn conflict(&self, g: &Graph) -> Option<(usize, usize)> {
        if self.color_of.len() != g.vertex_count() {
            return Some((0, 0));
        }
        g.edges()
            .find(|&(u, v)| self.color_of[u] == self.color_of[v])
    }

    pub fn is_proper(&self, g: &Graph) -> bool {
        self.conflict(g).is_none()
    }

    /// Renumbers colors by least vertex label and drops empty colors.
    pub fn canonical(&self) -> Coloring {
        let mut remap = HashMap::new();
        let color_of = self
            .color_of
            .iter()
            .map(|&c| {
                let next = remap.len();
                *remap.entry(c).or_insert(next)
            })
            .collect();
        Coloring {
            color_of,
            num_colors: remap.len(),
        }
    }
}

/// DSATUR: repeatedly color the vertex with the most distinct neighbor
/// colors (ties: larger degree, then lower label) with its least free color.
pub fn dsatur(g: &Graph) -> Coloring {
    let n = g.vertex_count();
    let degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut color = vec![usize::MAX; n];
    // Neighbor color sets as growable bitsets.
    let mut seen: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut sat = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| color[v] == usize::MAX)
            .max_by(|&a, &b| {
                (sat[a], degree[a])
                    .cmp(&(sat[b], degree[b]))
                    .then(b.cmp(&a))
            })
            .expect("an uncolored vertex remains");
        let c = (0..)
            .find(|&c| seen[v].get(c / 64).is_none_or(|w| w >> (c % 64) & 1 == 0))
            .expect("some color is free");
        color[v] = c;
        for u in g.neighbors(v) {
            if color[u] == usize::MAX {
                let s = &mut seen[u];
                if s.len() <= c / 64 {
                    s.resize(c / 64 + 1, 0);
                }
                if s[c / 64] >> (c % 64) & 1 == 0 {
                    s[c / 64] |= 1 << (c % 64);
                    sat[u] += 1;
                }
            }
        }
    }
    Coloring::new(color).canonical()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChromaticResult {
    pub chi: usize,
    pub coloring: Coloring,
    /// Clique found while seeding the search.
    pub clique: Vec<usize>,
    pub nodes: u64,
}

struct ColorSearch<'a> {
    g: &'a Graph,
    degree: Vec<usize>,
    color: Vec<usize>,
    /// `count[v * width + c]` = number of neighbors of `v` colored `c`.
    count: Vec<u32>,
    sat: Vec<usize>,
    width: usize,
    best: Vec<usize>,
    best_k: usize,
    lower: usize,
    nodes: u64,
    budget: u64,
    stopped: bool,
}

impl ColorSearch<'_> {
    fn assign(&mut self, v: usize, c: usize) {
        self.color[v] = c;
        for u in self.g.neighbors(v) {
            let slot = &mut self.count[u * self.width + c];
            if *slot == 0 {
                self.sat[u] += 1;
            }
            *slot += 1;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.color[v] = usize::MAX;
        for u in self.g.neighbors(v) {
            let slot = &mut self.count[u * self.width + c];
            *slot -= 1;
            if *slot == 0 {
                self.sat[u] -= 1;
            }
        }
    }

    fn pick(&self) -> Option<usize> {
        let n = self.color.len();
        (0..n)
            .filter(|&v| self.color[v] == usize::MAX)
            .max_by(|&a, &b| {
                (self.sat[a], self.degree[a])
                    .cmp(&(self.sat[b], self.degree[b]))
                    .then(b.cmp(&a))
            })
    }

    fn search(&mut self, used: usize) {
        if self.stopped || self.best_k <= self.lower {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.stopped = true;
            return;
        }
        let Some(v) = self.pick() else {
            self.best_k = used;
            self.best.clone_from(&self.color);
            return;
        };
        for c in 0..used {
            if self.count[v * self.width + c] == 0 {
                self.assign(v, c);
                self.search(used);
                self.unassign(v, c);
                if self.stopped || self.best_k <= self.lower {
                    return;
                }
            }
        }
        if used + 1 < self.best_k {
            self.assign(v, used);
            self.search(used + 1);
            self.unassign(v, used);
        }
    }
}

/// Exact chromatic number by DSATUR-ordered branch and bound. The search is
/// seeded with a clique (pre-colored) and the DSATUR coloring; `lower_hint`
/// may supply any other valid lower bound, e.g. `⌈|V|/α⌉`.
pub fn exact_chromatic(
    g: &Graph,
    budget: u64,
    lower_hint: Option<usize>,
) -> Result<ChromaticResult> {
    let n = g.vertex_count();
    let upper = dsatur(g);
    if n == 0 {
        return Ok(ChromaticResult {
            chi: 0,
            coloring: upper,
            clique: Vec::new(),
            nodes: 0,
        });
    }
    let clique_budget = (budget / 10).max(1000);
    let clique = match max_clique(g, clique_budget) {
        Ok(c) => c,
        Err(Error::IndependenceTimeout { witness, .. }) => witness,
        Err(e) => return Err(e),
    };
    let lower = clique.len().max(lower_hint.unwrap_or(0)).max(1);
    if upper.num_colors <= lower {
        return Ok(ChromaticResult {
            chi: upper.num_colors,
            coloring: upper,
            clique,
            nodes: 0,
        });
    }
    let width = upper.num_colors;
    let mut s = ColorSearch {
        g,
        degree: (0..n).map(|v| g.degree(v)).collect(),
        color: vec![usize::MAX; n],
        count: vec![0; n * width],
        sat: vec![0; n],
        width,
        best: upper.color_of.clone(),
        best_k: upper.num_colors,
        lower,
        nodes: 0,
        budget,
        stopped: false,
    };
    for (c, &v) in clique.iter().enumerate() {
        s.assign(v, c);
    }
    s.search(clique.len());
    let coloring = Coloring::new(s.best.clone()).canonical();
    debug_assert!(coloring.is_proper(g));
    if s.stopped {
        return Err(Error::ColoringTimeout {
            lower,
            upper: coloring.num_colors,
            best: Box::new(coloring),
        });
    }
    Ok(ChromaticResult {
        chi: coloring.num_colors,
        coloring,
        clique,
        nodes: s.nodes,
    })
}

fn first_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .position(|&w| w != 0)
        .map(|i| i * 64 + row[i].trailing_zeros() as usize)
}

struct CliqueSearch {
    /// Adjacency in search order: bit `j` of row `i` ⇔ `order[i] ~ order[j]`.
    adj: Vec<Vec<u64>>,
    current: Vec<usize>,
    best: Vec<usize>,
    /// Cliques no larger than this are not worth recording.
    floor: usize,
    nodes: u64,
    budget: u64,
    stopped: bool,
}

impl CliqueSearch {
    /// Greedy sequential coloring of `p`; returns vertices with their color
    /// numbers (1-based), non-decreasing in color.
    fn color_sort(&self, p: &[u64]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut uncolored = p.to_vec();
        let mut k = 0;
        while uncolored.iter().any(|&w| w != 0) {
            k += 1;
            let mut avail = uncolored.clone();
            while let Some(v) = first_bit(&avail) {
                avail[v / 64] &= !(1 << (v % 64));
                uncolored[v / 64] &= !(1 << (v % 64));
                for (a, r) in avail.iter_mut().zip(&self.adj[v]) {
                    *a &= !r;
                }
                out.push((v, k));
            }
        }
        out
    }

    fn expand(&mut self, mut p: Vec<u64>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.stopped = true;
            return;
        }
        let sorted = self.color_sort(&p);
        for &(v, k) in sorted.iter().rev() {
            if self.current.len() + k <= self.best.len().max(self.floor) {
                return;
            }
            self.current.push(v);
            let next: Vec<u64> = p.iter().zip(&self.adj[v]).map(|(a, b)| a & b).collect();
            if next.iter().all(|&w| w == 0) {
                if self.current.len() > self.best.len() {
                    self.best.clone_from(&self.current);
                    if self.floor > 0 && self.best.len() > self.floor {
                        self.stopped = true;
                        return;
                    }
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            if self.stopped {
                return;
            }
            p[v / 64] &= !(1 << (v % 64));
        }
    }
}

fn clique_search(
    g: &Graph,
    candidates: &[usize],
    floor: usize,
    budget: u64,
) -> (CliqueSearch, Vec<usize>, usize) {
    let mut order = candidates.to_vec();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let n = order.len();
    let words = words_for(n);
    let adj = order
        .iter()
        .map(|&u| {
            let mut row = vec![0u64; words];
            for (j, &v) in order.iter().enumerate() {
                if g.has_edge(u, v) {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    let mut s = CliqueSearch {
        adj,
        current: Vec::new(),
        best: Vec::new(),
        floor,
        nodes: 0,
        budget,
        stopped: false,
    };
    let mut all = vec![u64::MAX; words];
    if !n.is_multiple_of(64) {
        all[words - 1] = (1 << (n % 64)) - 1;
    }
    let root_bound = s.color_sort(&all).last().map_or(0, |&(_, k)| k);
    if n > 0 {
        s.expand(all);
    }
    (s, order, root_bound)
}

/// Maximum clique by branch and bound with greedy-coloring bounds.
/// Returns the clique sorted ascending.
pub fn max_clique(g: &Graph, budget: u64) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let all: Vec<usize> = (0..n).collect();
    let (s, order, root_bound) = clique_search(g, &all, 0, budget);
    let mut clique: Vec<usize> = s.best.iter().map(|&i| order[i]).collect();
    clique.sort_unstable();
    debug_assert!(g.is_clique(&clique));
    if s.stopped {
        return Err(Error::IndependenceTimeout {
            lower: clique.len(),
            upper: root_bound,
            witness: clique,
        });
    }
    Ok(clique)
}

/// Decides whether `g` has a clique of `size` vertices, optionally one
/// through `through`. Returns a witness clique or `None` when none exists.
pub fn clique_of_size(
    g: &Graph,
    size: usize,
    through: Option<usize>,
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    let (candidates, need): (Vec<usize>, usize) = match through {
        Some(v) => (g.neighbors(v).collect(), size.saturating_sub(1)),
        None => ((0..g.vertex_count()).collect(), size),
    };
    if need == 0 {
        return Ok(Some(through.into_iter().collect()));
    }
    let (s, order, root_bound) = clique_search(g, &candidates, need - 1, budget);
    let found = s.best.len() >= need;
    if s.stopped && !found {
        return Err(Error::IndependenceTimeout {
            lower: s.best.len() + usize::from(through.is_some()),
            upper: root_bound + usize::from(through.is_some()),
            witness: Vec::new(),
        });
    }
    Ok(found.then(|| {
        let mut clique: Vec<usize> = s.best.iter().map(|&i| order[i]).chain(through).collect();
        clique.sort_unstable();
        debug_assert!(g.is_clique(&clique));
        clique
    }))
}

struct TransversalSearch<'a> {
    g: &'a Graph,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl TransversalSearch<'_> {
    /// Forward checking with smallest-domain-first branching.
    fn extend(&mut self, domains: Vec<Vec<u64>>) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let count = |d: &[u64]| d.iter().map(|w| w.count_ones() as usize).sum::<usize>();
        let Some((pick, _)) = domains.iter().enumerate().min_by_key(|(_, d)| count(d)) else {
            return Some(true);
        };
        let mut rest = domains;
        let dom = rest.swap_remove(pick);
        for v in iter_bits(&dom) {
            let row = self.g.row(v);
            let next: Vec<Vec<u64>> = rest
                .iter()
                .map(|d| d.iter().zip(row).map(|(a, b)| a & !b).collect())
                .collect();
            if next.iter().any(|d: &Vec<u64>| d.iter().all(|&w| w == 0)) {
                continue;
            }
            self.chosen.push(v);
            match self.extend(next) {
                Some(false) => {}
                other => return other,
            }
            self.chosen.pop();
        }
        Some(false)
    }
}

/// Searches for an independent set meeting every part exactly once. When the
/// parts are disjoint cliques covering `g`, such a set exists iff
/// `α(g)` equals the number of parts.
pub fn independent_transversal(
    g: &Graph,
    parts: &[Vec<usize>],
    budget: u64,
) -> Result<Option<Vec<usize>>> {
    let words = words_for(g.vertex_count());
    let domains = parts
        .iter()
        .map(|p| {
            let mut d = vec![0u64; words];
            for &v in p {
                d[v / 64] |= 1 << (v % 64);
            }
            d
        })
        .collect();
    let mut s = TransversalSearch {
        g,
        chosen: Vec::new(),
        nodes: 0,
        budget,
    };
    match s.extend(domains) {
        Some(true) => {
            let mut set = s.chosen;
            set.sort_unstable();
            debug_assert!(g.is_independent(&set));
            Ok(Some(set))
        }
        Some(false) => Ok(None),
        None => Err(Error::IndependenceTimeout {
            lower: 0,
            upper: parts.len(),
            witness: Vec::new(),
        }),
    }
}

/// Maximum independent set (as a maximum clique of the complement).
pub fn max_independent_set(g: &Graph, budget: u64) -> Result<(usize, Vec<usize>)> {
    let set = max_clique(&g.complement(), budget)?;
    Ok((set.len(), set))
}

/// `|V|/α`, which equals `χ_f` for vertex-transitive graphs.
pub fn vt_fractional(vertices: usize, alpha: Option<usize>) -> Result<Ratio<u128>> {
    match alpha {
        Some(a) if a > 0 => Ok(Ratio::new(vertices as u128, a as u128)),
        _ => Err(Error::MissingAlpha),
    }
}

/// Smallest `L` with `q^L ≥ c`.
pub fn ceil_log(q: u32, c: u128) -> usize {
    let mut len = 0;
    let mut reach: u128 = 1;
    while reach < c {
        reach = reach.saturating_mul(q as u128);
        len += 1;
    }
    len
}

fn ceil_ratio(r: &Ratio<u128>) -> u128 {
    r.numer().div_ceil(*r.denom())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Vertices of the scalar confusion graph `C`.
    pub vertices: usize,
    /// Block length the codebook bounds refer to.
    pub n: usize,
    pub clique_lb: usize,
    /// Certified independence number of `C`; `None` on timeout.
    pub alpha: Option<usize>,
    pub alpha_upper: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub chi_f_lower: Ratio<u128>,
    /// `chi_f_lower` is the exact fractional chromatic number (Cayley graph).
    pub chi_f_exact: bool,
    pub chi_upper: usize,
    /// Certified chromatic number of `C`; `None` on timeout.
    pub chi: Option<usize>,
    /// Entropy bound for block length `n`, in q-ary symbols.
    pub mu: usize,
    /// Most distinct Want-values inside one Has-fiber: these form a clique.
    pub fiber_clique: usize,
    /// `⌈(|V|/α)^n⌉`, a lower bound on `χ(Cⁿ)` for the OR power. It bounds
    /// lifted codes only when `n = 1`.
    pub power_lower: u128,
    /// Lower bound on the codebook size of any block-length-`n` code.
    pub codebook_lower: u128,
    /// Size of some block-length-`n` code (product colorings of `C`, or the
    /// fractional bound on vertex-transitive graphs).
    pub codebook_upper: u128,
    /// Bounds on the code length in q-ary symbols for the whole block.
    pub length_lower: usize,
    pub length_upper: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Bounds on the codebook size of block-length-`n` codes, from the scalar
/// confusion graph `g` of `inst`.
pub fn code_size_bounds(
    inst: &FicpInstance,
    g: &ConfusionGraph,
    n: usize,
    budget: u64,
) -> Result<BoundsReport> {
    if n == 0 {
        return Err(Error::DimensionMismatch(
            "block length must be at least 1".into(),
        ));
    }
    let graph = g.graph();
    let vertices = graph.vertex_count();
    let (alpha, alpha_upper) = match max_independent_set(graph, budget) {
        Ok((a, _)) => (Some(a), a),
        Err(Error::IndependenceTimeout { upper, .. }) => (None, upper),
        Err(e) => return Err(e),
    };
    let hint = (vertices as u128).div_ceil(alpha_upper.max(1) as u128) as usize;
    let (chi, chi_upper, clique_lb) = match exact_chromatic(graph, budget, Some(hint)) {
        Ok(r) => (Some(r.chi), r.chi, r.clique.len()),
        Err(Error::ColoringTimeout { upper, .. }) => {
            let clique = match max_clique(graph, budget / 10) {
                Ok(c) => c.len(),
                Err(Error::IndependenceTimeout { lower, .. }) => lower,
                Err(e) => return Err(e),
            };
            (None, upper, clique)
        }
        Err(e) => return Err(e),
    };
    let chi_f_lower = Ratio::new(vertices as u128, alpha_upper.max(1) as u128);
    let chi_f_exact = g.is_cayley() && alpha.is_some();
    let exp =
        u32::try_from(n).map_err(|_| Error::DimensionMismatch("block length too large".into()))?;
    let power = ratio_pow(&chi_f_lower, exp);
    let power_lower = ceil_ratio(&power);
    let mut codebook_upper = (chi_upper as u128).saturating_pow(exp);
    if chi_f_exact {
        let a = alpha.expect("exact flag implies alpha");
        let real =
            (*power.numer() as f64 / *power.denom() as f64) * (1.0 + n as f64 * (a as f64).log2());
        if real.is_finite() && real < codebook_upper as f64 {
            codebook_upper = codebook_upper.min(real.floor() as u128);
        }
    }
    let entropy = max_conditional_entropy(inst);
    let mu = entropy_ceil(n as f64 * entropy);
    let fiber_clique = max_fiber_clique(inst);
    let codebook_lower = if n == 1 {
        power_lower
            .max(clique_lb as u128)
            .max(chi.unwrap_or(0) as u128)
    } else {
        (fiber_clique as u128).saturating_pow(exp)
    };
    let q = inst.field.q();
    Ok(BoundsReport {
        vertices,
        n,
        clique_lb,
        alpha,
        alpha_upper,
        chi_f_lower,
        chi_f_exact,
        chi_upper,
        chi,
        mu,
        fiber_clique,
        power_lower,
        codebook_lower,
        codebook_upper,
        length_lower: ceil_log(q, codebook_lower).max(mu),
        length_upper: ceil_log(q, codebook_upper),
    })
}

fn ratio_pow(r: &Ratio<u128>, exp: u32) -> Ratio<u128> {
    Ratio::new(r.numer().pow(exp), r.denom().pow(exp))
}

fn entropy_ceil(h: f64) -> usize {
    (h - 1e-9).ceil().max(0.0) as usize
}

/// Per receiver and Has-value: how often each Want-value occurs.
fn fiber_counts(inst: &FicpInstance, i: usize) -> Vec<Vec<usize>> {
    let table = inst.tabulate(i).expect("instance within tabulation range");
    let mut counts: Vec<HashMap<u32, usize>> = vec![HashMap::new(); table.has_values.len()];
    for (&h, &w) in table.has_ids.iter().zip(&table.want_ids) {
        *counts[h as usize].entry(w).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|m| m.into_values().collect())
        .collect()
}

/// `max_i max_h H(W_i | H_i = h)` for uniform messages, in base `q`.
pub fn max_conditional_entropy(inst: &FicpInstance) -> f64 {
    let ln_q = (inst.field.q() as f64).ln();
    let mut best = 0f64;
    for i in 0..inst.num_receivers() {
        for fiber in fiber_counts(inst, i) {
            let total: usize = fiber.iter().sum();
            let h: f64 = fiber
                .iter()
                .map(|&c| {
                    let p = c as f64 / total as f64;
                    -p * p.ln() / ln_q
                })
                .sum();
            best = best.max(h);
        }
    }
    best
}

/// `μ = max_i ⌈max_h H(W_i | H_i = h)⌉` in q-ary symbols.
pub fn mu_bound(inst: &FicpInstance) -> usize {
    entropy_ceil(max_conditional_entropy(inst))
}

/// Largest number of distinct Want-values within a single Has-fiber.
pub fn max_fiber_clique(inst: &FicpInstance) -> usize {
    (0..inst.num_receivers())
        .flat_map(|i| fiber_counts(inst, i).into_iter().map(|f| f.len()))
        .max()
        .unwrap_or(1)
        .max(1)
}

/// Coloring by cosets of a subspace `K` with `K ∩ S = ∅`, where `S` is the
/// connection set of a Cayley graph: `x` and `x + s` never share a coset.
/// Searches for `K` of the largest dimension, stopping early once the
/// dimension reaches `len − target_codim`. Returns the coloring and a basis of `K`.
pub fn coset_coloring(
    set: &ConnectionSet,
    target_codim: usize,
    budget: u64,
) -> Result<(Coloring, Vec<Word>)> {
    let field = set.field();
    let len = set.word_len();
    let count = field.word_count_usize(len)?;
    let mut forbidden = vec![false; count];
    for l in set.labels() {
        forbidden[l] = true;
    }
    let adder = LabelAdder::new(field, len);
    let mut s = SubspaceSearch {
        adder: &adder,
        forbidden: &forbidden,
        in_span: vec![false; count],
        span: vec![0],
        basis: Vec::new(),
        best: Vec::new(),
        target: len.saturating_sub(target_codim),
        nodes: 0,
        budget,
    };
    s.in_span[0] = true;
    s.extend(1);
    let best = s.best.clone();
    let members = adder.span(&best);
    let mut color = vec![usize::MAX; count];
    let mut next = 0;
    for x in 0..count {
        if color[x] == usize::MAX {
            for &k in &members {
                color[adder.add(x, k)] = next;
            }
            next += 1;
        }
    }
    let basis = best
        .iter()
        .map(|&b| field.unrank(b, len))
        .collect::<Result<_>>()?;
    Ok((Coloring::new(color), basis))
}

struct LabelAdder {
    field: PrimeField,
    len: usize,
}

impl LabelAdder {
    fn new(field: PrimeField, len: usize) -> Self {
        LabelAdder { field, len }
    }

    fn add(&self, a: usize, b: usize) -> usize {
        if self.field.q() == 2 {
            return a ^ b;
        }
        let mut x = vec![0; self.len];
        let mut y = vec![0; self.len];
        self.field.unrank_into(a, &mut x);
        self.field.unrank_into(b, &mut y);
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = self.field.add(*xi, yi);
        }
        self.field.rank(&x)
    }

    fn scale(&self, a: usize, c: u32) -> usize {
        let mut x = vec![0; self.len];
        self.field.unrank_into(a, &mut x);
        for xi in x.iter_mut() {
            *xi = self.field.mul(*xi, c);
        }
        self.field.rank(&x)
    }

    fn span(&self, basis: &[usize]) -> Vec<usize> {
        let mut span = vec![0];
        for &b in basis {
            let mut next = span.clone();
            for c in 1..self.field.q() {
                let cb = self.scale(b, c);
                next.extend(span.iter().map(|&u| self.add(u, cb)));
            }
            span = next;
        }
        span
    }
}

struct SubspaceSearch<'a> {
    adder: &'a LabelAdder,
    forbidden: &'a [bool],
    in_span: Vec<bool>,
    span: Vec<usize>,
    basis: Vec<usize>,
    best: Vec<usize>,
    target: usize,
    nodes: u64,
    budget: u64,
}

impl SubspaceSearch<'_> {
    /// Returns `true` once the search should stop.
    fn extend(&mut self, start: usize) -> bool {
        self.nodes += 1;
        if self.basis.len() > self.best.len() {
            self.best.clone_from(&self.basis);
        }
        if self.best.len() >= self.target || self.nodes > self.budget {
            return true;
        }
        let q = self.adder.field.q();
        for v in start..self.in_span.len() {
            if self.in_span[v] || self.forbidden[v] {
                continue;
            }
            // Every subspace has a basis in which each vector is the least
            // element of its coset over the previous span; enumerate only those.
            if self.span.iter().any(|&u| self.adder.add(v, u) < v) {
                continue;
            }
            let mut added = Vec::with_capacity(self.span.len() * (q as usize - 1));
            let mut ok = true;
            'scan: for c in 1..q {
                let cv = self.adder.scale(v, c);
                for &u in &self.span {
                    let w = self.adder.add(u, cv);
                    if self.forbidden[w] {
                        ok = false;
                        break 'scan;
                    }
                    added.push(w);
                }
            }
            if !ok {
                continue;
            }
            let old = self.span.len();
            for &w in &added {
                self.in_span[w] = true;
            }
            self.span.extend_from_slice(&added);
            self.basis.push(v);
            let stop = self.extend(v + 1);
            self.basis.pop();
            self.span.truncate(old);
            for &w in &added {
                self.in_span[w] = false;
            }
            if stop {
                return true;
            }
        }
        false
    }
}
