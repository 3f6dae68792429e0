//! Error-correcting functional index codes.
//!
//! A map corrects `δ` errors iff codewords of every confusable pair are at
//! Hamming distance at least `2δ + 1`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::EncodingMap;
use crate::coloring::ceil_log;
use crate::confusion::{connection_set_linear, ConfusionGraph, ConnectionSet};
use crate::error::{Error, Result};
use crate::field::{distance, weight, Matrix, PrimeField, Symbol, Word};
use crate::model::FicpInstance;

/// Linear `[m, k, d]` code given by a full-rank `k × m` generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearBlockCode {
    generator: Matrix,
    min_distance: usize,
}

impl LinearBlockCode {
    pub fn new(generator: Matrix) -> Result<Self> {
        if generator.rank() != generator.rows() {
            return Err(Error::RankDeficient);
        }
        let field = generator.field();
        let k = generator.rows();
        let count = field.word_count_usize(k)?;
        let mut msg = vec![0; k];
        let min_distance = (1..count)
            .map(|label| {
                field.unrank_into(label, &mut msg);
                weight(&generator.vec_mul(&msg))
            })
            .min()
            .unwrap_or(generator.cols());
        Ok(LinearBlockCode {
            generator,
            min_distance,
        })
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn field(&self) -> PrimeField {
        self.generator.field()
    }

    pub fn length(&self) -> usize {
        self.generator.cols()
    }

    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    /// Errors corrected: `⌊(d − 1)/2⌋`.
    pub fn radius(&self) -> usize {
        self.min_distance.saturating_sub(1) / 2
    }

    pub fn encode(&self, msg: &[Symbol]) -> Result<Word> {
        if msg.len() != self.dimension() {
            return Err(Error::LengthMismatch {
                left: self.dimension(),
                right: msg.len(),
            });
        }
        Word::new(self.field(), self.generator.vec_mul(msg))
    }
}

fn rows(field: PrimeField, rows: &[&str]) -> Matrix {
    let parsed: Vec<Vec<Symbol>> = rows
        .iter()
        .map(|r| r.bytes().map(|b| (b - b'0') as Symbol).collect())
        .collect();
    Matrix::from_rows(field, &parsed).expect("static generator")
}

pub const BUILTIN_CODES: [&str; 4] = ["repetition", "hamming74", "shortened633", "mds423"];

/// Named generators. `repetition` is the `[2δ+1, 1, 2δ+1]` code over `F_q`;
/// the others exist only over their native field.
pub fn builtin_code(name: &str, q: u32, delta: usize) -> Result<LinearBlockCode> {
    let field = PrimeField::new(q)?;
    let g = match (name, q) {
        ("repetition", _) => Matrix::from_rows(field, &[vec![1; 2 * delta + 1]])?,
        ("hamming74", 2) => rows(field, &["1000110", "0100101", "0010011", "0001111"]),
        ("shortened633", 2) => rows(field, &["100110", "010101", "001011"]),
        ("mds423", 3) => rows(field, &["1012", "0111"]),
        _ => return Err(Error::UnknownCode(format!("{name} over F_{q}"))),
    };
    LinearBlockCode::new(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    Concatenated { outer: String, inner_length: usize },
}

#[derive(Debug, Clone)]
pub struct DeltaFic {
    pub map: EncodingMap,
    pub matrix: Option<Matrix>,
    pub delta: usize,
    pub provenance: Provenance,
}

impl DeltaFic {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaCheck {
    pub delta: usize,
    pub passed: bool,
    /// Least codeword distance over confusable pairs (`None`: no such pair).
    pub min_distance: Option<usize>,
    /// First confusable pair (ascending) closer than `2δ + 1`.
    pub witness: Option<(usize, usize)>,
}

impl DeltaCheck {
    fn from_pairs(delta: usize, pairs: impl Iterator<Item = ((usize, usize), usize)>) -> Self {
        let mut min_distance = None;
        let mut witness = None;
        for (pair, d) in pairs {
            min_distance = Some(min_distance.map_or(d, |m: usize| m.min(d)));
            if witness.is_none() && d < 2 * delta + 1 {
                witness = Some(pair);
            }
        }
        DeltaCheck {
            delta,
            passed: witness.is_none(),
            min_distance,
            witness,
        }
    }
}

/// Pairwise distance condition over every edge of the confusion graph.
pub fn verify_delta(graph: &ConfusionGraph, map: &EncodingMap, delta: usize) -> Result<DeltaCheck> {
    if graph.vertex_count() != map.vertex_count() {
        return Err(Error::VertexMismatch {
            left: graph.vertex_count(),
            right: map.vertex_count(),
        });
    }
    let pairs = graph.graph().edges().map(|(u, v)| {
        let d = distance(map.codeword(u).symbols(), map.codeword(v).symbols());
        ((u, v), d)
    });
    Ok(DeltaCheck::from_pairs(delta, pairs))
}

pub fn min_confusable_distance(graph: &ConfusionGraph, map: &EncodingMap) -> Result<Option<usize>> {
    Ok(verify_delta(graph, map, 0)?.min_distance)
}

/// Weight condition `wt(s·M) ≥ 2δ + 1` over the union of connection sets;
/// a witness is reported as the pair `(0, s)`.
pub fn verify_delta_linear(inst: &FicpInstance, m: &Matrix, delta: usize) -> Result<DeltaCheck> {
    if !inst.is_linear() {
        return Err(Error::NotLinearInstance);
    }
    if m.rows() != inst.nk() || m.field() != inst.field {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, instance has {} symbols",
            m.rows(),
            inst.nk()
        )));
    }
    let mut set = ConnectionSet::empty(inst.field, inst.nk());
    for i in 0..inst.num_receivers() {
        set = set.union(&connection_set_linear(inst, i)?)?;
    }
    let pairs = set
        .elements()
        .iter()
        .map(|s| ((0, s.rank()), weight(&m.vec_mul(s.symbols()))));
    Ok(DeltaCheck::from_pairs(delta, pairs))
}

/// Concatenates the inner map with a linear outer code.
///
/// With `dimension = L` the codeword `b` becomes `b·G` (and `M₁ = M₀·G` for
/// a linear inner map). Otherwise codewords are routed through an index:
/// `rank(b)` when every rank is below `q^k`, else the codebook position.
pub fn concatenate(
    inner: &EncodingMap,
    inner_matrix: Option<&Matrix>,
    outer: &LinearBlockCode,
    outer_name: &str,
) -> Result<DeltaFic> {
    let field = inner.field();
    if outer.field() != field {
        return Err(Error::DimensionMismatch(format!(
            "outer code over F_{}, inner over F_{}",
            outer.field().q(),
            field.q()
        )));
    }
    let k = outer.dimension();
    let capacity = field.word_count(k).unwrap_or(u128::MAX);
    let map = if k == inner.len() {
        inner.map_codewords(|b| outer.encode(b.symbols()))?
    } else if inner
        .codebook()
        .iter()
        .all(|b| (b.rank() as u128) < capacity)
    {
        inner.map_codewords(|b| outer.encode(field.unrank(b.rank(), k)?.symbols()))?
    } else if (inner.size() as u128) <= capacity {
        let position: HashMap<&Word, usize> = inner
            .codebook()
            .iter()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        inner.map_codewords(|b| outer.encode(field.unrank(position[b], k)?.symbols()))?
    } else {
        return Err(Error::DimensionMismatch(format!(
            "outer code has {} messages, inner codebook has {} words",
            capacity,
            inner.size()
        )));
    };
    let matrix = match inner_matrix {
        Some(m0) if k == inner.len() => {
            let m1 = m0.mul(outer.generator())?;
            if EncodingMap::from_matrix(&m1)? != map {
                return Err(Error::DimensionMismatch(
                    "inner matrix does not describe the inner map".into(),
                ));
            }
            Some(m1)
        }
        _ => None,
    };
    Ok(DeltaFic {
        map,
        matrix,
        delta: outer.radius(),
        provenance: Provenance::Concatenated {
            outer: outer_name.to_string(),
            inner_length: inner.len(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SingletonComparison {
    pub bound: usize,
    pub length: usize,
    pub meets: bool,
}

/// `L_δ ≥ L_opt + 2δ`.
pub fn singleton_bound(l_opt: usize, delta: usize) -> usize {
    l_opt + 2 * delta
}

pub fn compare_singleton(l_opt: usize, delta: usize, length: usize) -> SingletonComparison {
    let bound = singleton_bound(l_opt, delta);
    SingletonComparison {
        bound,
        length,
        meets: length == bound,
    }
}

/// Length of exhaustive searches: `q^length` words at most.
pub const EXACT_SEARCH_LIMIT: usize = 1 << 16;

fn lexicode(field: PrimeField, len: usize, c: usize, d: usize) -> Option<Vec<Vec<Symbol>>> {
    let count = field.word_count_usize(len).ok()?;
    let mut chosen: Vec<Vec<Symbol>> = Vec::new();
    let mut w = vec![0; len];
    for label in 0..count {
        field.unrank_into(label, &mut w);
        if chosen.iter().all(|u| distance(u, &w) >= d) {
            chosen.push(w.clone());
            if chosen.len() == c {
                return Some(chosen);
            }
        }
    }
    None
}

struct CodeSearch<'a> {
    words: &'a [Vec<Symbol>],
    d: usize,
    c: usize,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl CodeSearch<'_> {
    /// `Some(true)` found, `Some(false)` exhausted, `None` out of budget.
    fn extend(&mut self, candidates: &[usize]) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        if self.chosen.len() == self.c {
            return Some(true);
        }
        if self.chosen.len() + candidates.len() < self.c {
            return Some(false);
        }
        for (pos, &w) in candidates.iter().enumerate() {
            if self.chosen.len() + candidates.len() - pos < self.c {
                break;
            }
            let rest: Vec<usize> = candidates[pos + 1..]
                .iter()
                .copied()
                .filter(|&u| distance(&self.words[u], &self.words[w]) >= self.d)
                .collect();
            self.chosen.push(w);
            match self.extend(&rest)? {
                true => return Some(true),
                false => {
                    self.chosen.pop();
                }
            }
        }
        Some(false)
    }
}

/// Shortest code of `c` words over `F_q` with pairwise distance `≥ d`.
/// A lexicode gives the first feasible length; shorter lengths with at most
/// [`EXACT_SEARCH_LIMIT`] words are then searched exactly (first word fixed
/// to zero, which translation invariance allows).
pub fn search_codebook(c: usize, d: usize, q: u32, budget: u64) -> Result<Vec<Word>> {
    let field = PrimeField::new(q)?;
    if c == 0 || d == 0 {
        return Err(Error::DimensionMismatch(
            "codebook search needs c >= 1 and d >= 1".into(),
        ));
    }
    let start = ceil_log(q, c as u128);
    if c == 1 {
        return Ok(vec![Word::zero(field, start)]);
    }
    let mut lex_len = start.max(d);
    let lex = loop {
        if let Some(words) = lexicode(field, lex_len, c, d) {
            break words;
        }
        lex_len += 1;
    };
    let to_words = |ws: Vec<Vec<Symbol>>| {
        ws.into_iter()
            .map(|w| Word::new(field, w))
            .collect::<Result<Vec<_>>>()
    };
    let mut nodes_left = budget;
    for len in start.max(d)..lex_len {
        let Ok(count) = field.word_count_usize(len) else {
            break;
        };
        if count > EXACT_SEARCH_LIMIT {
            return Err(Error::CodebookTimeout {
                best: to_words(lex)?,
            });
        }
        let words: Vec<Vec<Symbol>> = (0..count)
            .map(|l| field.unrank(l, len).unwrap().into_symbols())
            .collect();
        let candidates: Vec<usize> = (1..count).filter(|&u| weight(&words[u]) >= d).collect();
        let mut s = CodeSearch {
            words: &words,
            d,
            c,
            chosen: vec![0],
            nodes: 0,
            budget: nodes_left,
        };
        match s.extend(&candidates) {
            Some(true) => return to_words(s.chosen.iter().map(|&i| words[i].clone()).collect()),
            Some(false) => nodes_left -= s.nodes,
            None => {
                return Err(Error::CodebookTimeout {
                    best: to_words(lex)?,
                })
            }
        }
    }
    to_words(lex)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimMode {
    /// Every error pattern of weight `≤ δ`.
    Exhaustive,
    /// One fixed error pattern applied to every message.
    Pattern(Word),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimFailure {
    pub message: usize,
    /// Rank of the error pattern.
    pub pattern: usize,
    pub receiver: usize,
    pub expected: Vec<Symbol>,
    pub got: Option<Vec<Symbol>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub patterns: usize,
    pub trials: u128,
    pub failures: Vec<SimFailure>,
}

impl SimReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All words of length `len` and weight `≤ delta`, ascending by rank.
pub fn error_patterns(field: PrimeField, len: usize, delta: usize) -> Vec<Word> {
    fn rec(
        field: PrimeField,
        delta: usize,
        pos: usize,
        cur: &mut Vec<Symbol>,
        wt: usize,
        out: &mut Vec<Word>,
    ) {
        if pos == cur.len() {
            out.push(Word::new(field, cur.clone()).expect("symbols in range"));
            return;
        }
        rec(field, delta, pos + 1, cur, wt, out);
        if wt < delta {
            for s in 1..field.q() {
                cur[pos] = s;
                rec(field, delta, pos + 1, cur, wt + 1, out);
            }
            cur[pos] = 0;
        }
    }
    let mut out = Vec::new();
    rec(field, delta, 0, &mut vec![0; len], 0, &mut out);
    out.sort_by_key(Word::rank);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of `(message, pattern)` trials an exhaustive run needs.
pub fn exhaustive_trials(field: PrimeField, nk: usize, len: usize, delta: usize) -> u128 {
    let q1 = (field.q() - 1) as u128;
    let balls: u128 = (0..=delta.min(len))
        .map(|w| binomial(len, w).saturating_mul(q1.saturating_pow(w as u32)))
        .sum();
    balls.saturating_mul(field.word_count(nk).unwrap_or(u128::MAX))
}

/// Channel simulation. Receiver `i` with Has-value `h` decodes the received
/// word to the nearest codeword among those that occur together with `h`
/// (ties: lowest codeword rank) and then looks up its Want-value.
pub fn simulate_errors(
    inst: &FicpInstance,
    map: &EncodingMap,
    delta: usize,
    mode: &SimMode,
    budget: u128,
) -> Result<SimReport> {
    let field = inst.field;
    if map.field() != field || map.symbols_per_vertex() != inst.nk() {
        return Err(Error::DimensionMismatch(
            "map does not match the instance".into(),
        ));
    }
    let len = map.len();
    let patterns = match mode {
        SimMode::Exhaustive => {
            let required = exhaustive_trials(field, inst.nk(), len, delta);
            if required > budget {
                return Err(Error::BudgetExceeded { required, budget });
            }
            error_patterns(field, len, delta)
        }
        SimMode::Pattern(e) => {
            if e.len() != len {
                return Err(Error::LengthMismatch {
                    left: len,
                    right: e.len(),
                });
            }
            vec![e.clone()]
        }
    };
    // Per receiver: for every Has-value, the codewords seen with it and the
    // Want-value each one decodes to (`None` when the map itself clashes).
    let tables = (0..inst.num_receivers())
        .map(|i| {
            let t = inst.tabulate(i)?;
            let mut by_has: Vec<HashMap<usize, Option<u32>>> =
                vec![HashMap::new(); t.has_values.len()];
            for v in 0..map.vertex_count() {
                let entry = by_has[t.has_ids[v] as usize]
                    .entry(map.index_of(v))
                    .or_insert(Some(t.want_ids[v]));
                if *entry != Some(t.want_ids[v]) {
                    *entry = None;
                }
            }
            let by_has: Vec<Vec<(usize, Option<u32>)>> = by_has
                .into_iter()
                .map(|m| {
                    let mut v: Vec<_> = m.into_iter().collect();
                    v.sort_by_key(|&(c, _)| map.codebook()[c].rank());
                    v
                })
                .collect();
            Ok((t, by_has))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut failures: Vec<SimFailure> = (0..map.vertex_count())
        .into_par_iter()
        .flat_map_iter(|v| {
            let sent = map.codeword(v).symbols();
            let mut out = Vec::new();
            let mut y = vec![0; len];
            for e in &patterns {
                for ((yi, &s), &ei) in y.iter_mut().zip(sent).zip(e.symbols()) {
                    *yi = field.add(s, ei);
                }
                for (i, (t, by_has)) in tables.iter().enumerate() {
                    let candidates = &by_has[t.has_ids[v] as usize];
                    let best = candidates
                        .iter()
                        .min_by_key(|&&(c, _)| distance(map.codebook()[c].symbols(), &y))
                        .and_then(|&(_, w)| w);
                    if best != Some(t.want_ids[v]) {
                        out.push(SimFailure {
                            message: v,
                            pattern: e.rank(),
                            receiver: i,
                            expected: t.want_values[t.want_ids[v] as usize].clone(),
                            got: best.map(|w| t.want_values[w as usize].clone()),
                        });
                    }
                }
            }
            out
        })
        .collect();
    failures.sort_by_key(|f| (f.message, f.pattern, f.receiver));
    Ok(SimReport {
        patterns: patterns.len(),
        trials: patterns.len() as u128 * map.vertex_count() as u128,
        failures,
    })
}
