//! Encoding maps, decoder tables, verification and code synthesis.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::coloring::{
    ceil_log, coset_coloring, dsatur, exact_chromatic, max_clique, max_independent_set, Coloring,
};
use crate::confusion::{confusion_graph, ConfusionGraph};
use crate::error::{Error, Result};
use crate::field::{Matrix, PrimeField, Symbol, Word};
use crate::model::{FicpInstance, FuncDef};

/// Encoding map `M: F_q^{nK} → B`, stored as a codebook plus the codebook
/// index of every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingMap {
    field: PrimeField,
    nk: usize,
    len: usize,
    codebook: Vec<Word>,
    index: Vec<usize>,
}

impl EncodingMap {
    /// Codebook order follows first appearance by vertex label.
    pub fn from_vertex_words(field: PrimeField, nk: usize, words: Vec<Word>) -> Result<Self> {
        let count = field.word_count_usize(nk)?;
        if words.len() != count {
            return Err(Error::VertexMismatch {
                left: words.len(),
                right: count,
            });
        }
        let len = words.first().map_or(0, Word::len);
        let mut position: HashMap<Word, usize> = HashMap::new();
        let mut codebook = Vec::new();
        let mut index = Vec::with_capacity(count);
        for w in words {
            if w.len() != len {
                return Err(Error::LengthMismatch {
                    left: len,
                    right: w.len(),
                });
            }
            let next = codebook.len();
            let id = *position.entry(w.clone()).or_insert_with(|| {
                codebook.push(w);
                next
            });
            index.push(id);
        }
        Ok(EncodingMap {
            field,
            nk,
            len,
            codebook,
            index,
        })
    }

    /// Map given as explicit classes; the classes must partition the vertices.
    pub fn from_classes(
        field: PrimeField,
        nk: usize,
        classes: &[(Vec<usize>, Word)],
    ) -> Result<Self> {
        let count = field.word_count_usize(nk)?;
        let mut words: Vec<Option<Word>> = vec![None; count];
        for (members, w) in classes {
            for &v in members {
                let slot = words.get_mut(v).ok_or(Error::OutOfRange {
                    value: v as u128,
                    bound: count as u128,
                })?;
                if slot.is_some() {
                    return Err(Error::Format(format!("vertex {v} listed twice")));
                }
                *slot = Some(w.clone());
            }
        }
        let words = words
            .into_iter()
            .enumerate()
            .map(|(v, w)| w.ok_or_else(|| Error::Format(format!("vertex {v} has no codeword"))))
            .collect::<Result<Vec<_>>>()?;
        EncodingMap::from_vertex_words(field, nk, words)
    }

    /// Linear map `x ↦ x·M`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let field = m.field();
        let count = field.word_count_usize(m.rows())?;
        let mut x = vec![0; m.rows()];
        let words = (0..count)
            .map(|v| {
                field.unrank_into(v, &mut x);
                Word::new(field, m.vec_mul(&x))
            })
            .collect::<Result<Vec<_>>>()?;
        EncodingMap::from_vertex_words(field, m.rows(), words)
    }

    /// Map given by one function per transmitted symbol.
    pub fn from_functions(inst: &FicpInstance, f: &FuncDef) -> Result<Self> {
        let field = inst.field;
        let count = field.word_count_usize(inst.nk())?;
        let mut x = vec![0; inst.nk()];
        let words = (0..count)
            .map(|v| {
                field.unrank_into(v, &mut x);
                Word::new(field, f.eval(&field, &x))
            })
            .collect::<Result<Vec<_>>>()?;
        EncodingMap::from_vertex_words(field, inst.nk(), words)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn symbols_per_vertex(&self) -> usize {
        self.nk
    }

    pub fn vertex_count(&self) -> usize {
        self.index.len()
    }

    /// Code length `L` in q-ary symbols.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn codebook(&self) -> &[Word] {
        &self.codebook
    }

    pub fn size(&self) -> usize {
        self.codebook.len()
    }

    pub fn index_of(&self, v: usize) -> usize {
        self.index[v]
    }

    pub fn codeword(&self, v: usize) -> &Word {
        &self.codebook[self.index[v]]
    }

    pub fn encode(&self, x: &[Symbol]) -> Result<&Word> {
        if x.len() != self.nk {
            return Err(Error::LengthMismatch {
                left: self.nk,
                right: x.len(),
            });
        }
        if let Some(&s) = x.iter().find(|&&s| !self.field.contains(s)) {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                q: self.field.q(),
            });
        }
        Ok(self.codeword(self.field.rank(x)))
    }

    /// Classes `(sorted vertices, codeword)` ordered by least vertex.
    pub fn classes(&self) -> Vec<(Vec<usize>, Word)> {
        let mut members = vec![Vec::new(); self.codebook.len()];
        for (v, &i) in self.index.iter().enumerate() {
            members[i].push(v);
        }
        // Codebook order is first appearance, i.e. already by least vertex.
        members
            .into_iter()
            .zip(self.codebook.iter().cloned())
            .collect()
    }

    /// Composes with `f` on codewords.
    pub fn map_codewords(&self, f: impl Fn(&Word) -> Result<Word>) -> Result<EncodingMap> {
        let images = self.codebook.iter().map(f).collect::<Result<Vec<_>>>()?;
        let words = self.index.iter().map(|&i| images[i].clone()).collect();
        EncodingMap::from_vertex_words(self.field, self.nk, words)
    }

    /// Code file: one `{v1,v2,...} -> word` line per class, plus a matrix
    /// block when one is supplied.
    pub fn to_code_file(&self, matrix: Option<&Matrix>) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# q={} symbols={} L={} classes={}",
            self.field.q(),
            self.nk,
            self.len,
            self.size()
        )
        .unwrap();
        for (members, w) in self.classes() {
            let labels: Vec<String> = members.iter().map(usize::to_string).collect();
            writeln!(out, "{{{}}} -> {}", labels.join(","), w).unwrap();
        }
        if let Some(m) = matrix {
            out.push_str("matrix\n");
            out.push_str(&m.to_string());
        }
        out
    }

    /// Parses a code file. Lines are `{labels} -> word`; `#` starts a
    /// comment; a line `matrix` introduces a trailing matrix block.
    pub fn parse_code_file(
        field: PrimeField,
        nk: usize,
        text: &str,
    ) -> Result<(EncodingMap, Option<Matrix>)> {
        let mut classes = Vec::new();
        let mut lines = text.lines();
        let mut matrix = None;
        while let Some(line) = lines.next() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "matrix" {
                let rest: Vec<&str> = lines.by_ref().collect();
                matrix = Some(Matrix::parse(&rest.join("\n"))?);
                break;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::Format(format!("expected '->' in {line:?}")))?;
            let lhs = lhs.trim();
            let inner = lhs
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::Format(format!("expected {{labels}} in {lhs:?}")))?;
            let members = inner
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Format(format!("bad vertex label {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let rhs = rhs.trim();
            let word = if rhs == "-" || rhs.is_empty() {
                Word::zero(field, 0)
            } else {
                Word::parse(field, rhs)?
            };
            classes.push((members, word));
        }
        Ok((EncodingMap::from_classes(field, nk, &classes)?, matrix))
    }
}

/// Lookup table for one receiver: `(codeword index, Has-value) → Want-value`.
#[derive(Debug, Clone)]
pub struct Decoder {
    has_index: HashMap<Vec<Symbol>, u32>,
    table: HashMap<(usize, u32), u32>,
    want_values: Vec<Vec<Symbol>>,
}

impl Decoder {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn lookup(&self, codeword_index: usize, has_value: &[Symbol]) -> Option<&[Symbol]> {
        let h = *self.has_index.get(has_value)?;
        self.table
            .get(&(codeword_index, h))
            .map(|&w| &self.want_values[w as usize][..])
    }

    /// Codebook indices decodable together with `has_value`, ascending.
    pub fn candidates(&self, has_value: &[Symbol]) -> Vec<usize> {
        let Some(&h) = self.has_index.get(has_value) else {
            return Vec::new();
        };
        let mut out: Vec<usize> = self
            .table
            .keys()
            .filter(|k| k.1 == h)
            .map(|k| k.0)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Decoder tables for every receiver; a clash is a violated exclusive law.
pub fn build_decoders(inst: &FicpInstance, map: &EncodingMap) -> Result<Vec<Decoder>> {
    check_shape(inst, map)?;
    (0..inst.num_receivers())
        .into_par_iter()
        .map(|i| {
            let t = inst.tabulate(i)?;
            let mut table: HashMap<(usize, u32), (u32, usize)> = HashMap::new();
            for v in 0..map.vertex_count() {
                let key = (map.index[v], t.has_ids[v]);
                match table.get(&key) {
                    Some(&(w, first)) if w != t.want_ids[v] => {
                        return Err(Error::Conflict {
                            receiver: i,
                            x: first,
                            x_prime: v,
                        })
                    }
                    Some(_) => {}
                    None => {
                        table.insert(key, (t.want_ids[v], v));
                    }
                }
            }
            Ok(Decoder {
                has_index: t
                    .has_values
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(k, h)| (h, k as u32))
                    .collect(),
                table: table.into_iter().map(|(k, (w, _))| (k, w)).collect(),
                want_values: t.want_values,
            })
        })
        .collect()
}

fn check_shape(inst: &FicpInstance, map: &EncodingMap) -> Result<()> {
    if map.field != inst.field || map.nk != inst.nk() {
        return Err(Error::DimensionMismatch(format!(
            "map is over F_{}^{} but the instance has F_{}^{}",
            map.field.q(),
            map.nk,
            inst.field.q(),
            inst.nk()
        )));
    }
    Ok(())
}

/// A functional index code: encoding map plus per-receiver decoders.
#[derive(Debug, Clone)]
pub struct Fic {
    pub map: EncodingMap,
    pub decoders: Vec<Decoder>,
}

impl Fic {
    pub fn new(inst: &FicpInstance, map: EncodingMap) -> Result<Self> {
        let decoders = build_decoders(inst, &map)?;
        Ok(Fic { map, decoders })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn encode(&self, x: &[Symbol]) -> Result<&Word> {
        self.map.encode(x)
    }

    pub fn decode(
        &self,
        receiver: usize,
        codeword: &Word,
        has_value: &[Symbol],
    ) -> Result<Vec<Symbol>> {
        let idx = self
            .map
            .codebook
            .iter()
            .position(|w| w == codeword)
            .ok_or(Error::UnknownKey)?;
        let dec = self.decoders.get(receiver).ok_or(Error::UnknownKey)?;
        dec.lookup(idx, has_value)
            .map(<[Symbol]>::to_vec)
            .ok_or(Error::UnknownKey)
    }
}

/// Codeword assignment: classes are ordered by least vertex and class `l`
/// receives `assignment[l]`, or `unrank(l, L)` by default.
pub fn synthesize(
    inst: &FicpInstance,
    graph: &ConfusionGraph,
    coloring: &Coloring,
    assignment: Option<&[Word]>,
) -> Result<Fic> {
    if let Some((u, v)) = coloring.conflict(graph.graph()) {
        return Err(Error::ImproperColoring(u, v));
    }
    let classes: Vec<Vec<usize>> = coloring.canonical().classes();
    let field = inst.field;
    let words: Vec<Word> = match assignment {
        Some(a) => {
            if a.len() < classes.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} codewords for {} classes",
                    a.len(),
                    classes.len()
                )));
            }
            let mut seen: HashMap<&Word, usize> = HashMap::new();
            for (l, w) in a.iter().take(classes.len()).enumerate() {
                if let Some(&prev) = seen.get(w) {
                    return Err(Error::AssignmentCollision(prev, l));
                }
                seen.insert(w, l);
            }
            a[..classes.len()].to_vec()
        }
        None => {
            let len = ceil_log(field.q(), classes.len() as u128);
            (0..classes.len())
                .map(|l| field.unrank(l, len))
                .collect::<Result<_>>()?
        }
    };
    let mut per_vertex = vec![None; graph.vertex_count()];
    for (members, w) in classes.iter().zip(&words) {
        for &v in members {
            per_vertex[v] = Some(w.clone());
        }
    }
    let map = EncodingMap::from_vertex_words(
        field,
        inst.nk(),
        per_vertex.into_iter().map(Option::unwrap).collect(),
    )?;
    Fic::new(inst, map)
}

/// Assignment taken from another map: each class gets the codeword that
/// `reference` gives its least vertex.
pub fn assignment_from_map(coloring: &Coloring, reference: &EncodingMap) -> Vec<Word> {
    coloring
        .canonical()
        .classes()
        .iter()
        .map(|members| reference.codeword(members[0]).clone())
        .collect()
}

/// The partition of a map into classes, as a coloring.
pub fn coloring_of_map(map: &EncodingMap) -> Coloring {
    Coloring::new(map.index.clone()).canonical()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeFailure {
    pub receiver: usize,
    pub x: usize,
    pub expected: Vec<Symbol>,
    pub got: Option<Vec<Symbol>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checked: usize,
    /// Confusable pair sharing a codeword: `(receiver, x, x')`.
    pub witness: Option<(usize, usize, usize)>,
    pub failures: Vec<DecodeFailure>,
}

/// Exhaustively decodes every message at every receiver.
pub fn verify_fic(inst: &FicpInstance, fic: &Fic) -> Result<VerifyReport> {
    check_shape(inst, &fic.map)?;
    let nk = inst.nk();
    let mut failures: Vec<DecodeFailure> = (0..fic.map.vertex_count())
        .into_par_iter()
        .flat_map_iter(|v| {
            let x = inst
                .field
                .unrank(v, nk)
                .expect("vertex in range")
                .into_symbols();
            (0..inst.num_receivers())
                .filter_map(|i| {
                    let expected = inst.want_key(i, &x);
                    let got = fic.decoders[i]
                        .lookup(fic.map.index[v], &inst.has_key(i, &x))
                        .map(<[Symbol]>::to_vec);
                    (got.as_deref() != Some(&expected[..])).then_some(DecodeFailure {
                        receiver: i,
                        x: v,
                        expected,
                        got,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    failures.sort_by_key(|f| (f.x, f.receiver));
    Ok(VerifyReport {
        passed: failures.is_empty(),
        checked: fic.map.vertex_count() * inst.num_receivers(),
        witness: None,
        failures,
    })
}

/// Verifies an encoding map: decoders must exist and decode everything.
pub fn verify_map(inst: &FicpInstance, map: &EncodingMap) -> Result<VerifyReport> {
    match Fic::new(inst, map.clone()) {
        Ok(fic) => verify_fic(inst, &fic),
        Err(Error::Conflict {
            receiver,
            x,
            x_prime,
        }) => Ok(VerifyReport {
            passed: false,
            checked: 0,
            witness: Some((receiver, x, x_prime)),
            failures: Vec::new(),
        }),
        Err(e) => Err(e),
    }
}

/// Whether the code length equals the entropy bound `mu`.
pub fn is_perfect(fic: &Fic, mu: usize) -> bool {
    fic.len() == mu
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapLinearity {
    Linear(Matrix),
    Affine(Matrix, Vec<Symbol>),
    NotLinear,
}

/// Recovers `M` from the images of the unit vectors and checks
/// `M(x) = x·M + M(0)` on every vertex.
pub fn check_linear_map(map: &EncodingMap) -> MapLinearity {
    let field = map.field;
    let nk = map.nk;
    let offset = map.codeword(0).symbols().to_vec();
    let columns: Vec<Vec<Symbol>> = (0..map.len)
        .map(|c| {
            (0..nk)
                .map(|r| {
                    let unit = field.word_count_usize(nk - 1 - r).expect("within map size");
                    field.sub(map.codeword(unit).symbols()[c], offset[c])
                })
                .collect()
        })
        .collect();
    let m = Matrix::from_columns(field, nk, &columns).expect("columns have nk entries");
    let mut x = vec![0; nk];
    let mut y = vec![0; map.len];
    for v in 0..map.vertex_count() {
        field.unrank_into(v, &mut x);
        m.vec_mul_into(&x, &mut y);
        let ok = y
            .iter()
            .zip(&offset)
            .zip(map.codeword(v).symbols())
            .all(|((&a, &b), &c)| field.add(a, b) == c);
        if !ok {
            return MapLinearity::NotLinear;
        }
    }
    if offset.iter().all(|&s| s == 0) {
        MapLinearity::Linear(m)
    } else {
        MapLinearity::Affine(m, offset)
    }
}

/// Closed-form rendering of each column as a sum of message variables,
/// e.g. `x1 + x2`. `n` selects the variable naming (`xk` or `xk_j`).
pub fn render_columns(m: &Matrix, offset: Option<&[Symbol]>, n: usize) -> Vec<String> {
    (0..m.cols())
        .map(|c| {
            let mut terms = Vec::new();
            if let Some(b) = offset.filter(|b| b[c] != 0) {
                terms.push(b[c].to_string());
            }
            for r in 0..m.rows() {
                let name = if n == 1 {
                    format!("x{}", r + 1)
                } else {
                    format!("x{}_{}", r / n + 1, r % n + 1)
                };
                match m.get(r, c) {
                    0 => {}
                    1 => terms.push(name),
                    a => terms.push(format!("{a}*{name}")),
                }
            }
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            }
        })
        .collect()
}

/// Budgets for coloring searches inside synthesis pipelines.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub vertices: usize,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringOutcome {
    pub coloring: Coloring,
    /// Valid lower bound on the chromatic number.
    pub lower: usize,
    /// The code length `⌈log_q c⌉` is certified minimal.
    pub length_optimal: bool,
    /// Basis of `K` when the classes are the cosets of a subspace `K`.
    pub subspace: Option<Vec<Word>>,
}

/// Coloring for automated synthesis, optimal in code length when the
/// budget allows. Candidates are DSATUR and, for Cayley graphs, a coset
/// coloring (preferred at equal length, since it gives a linear code); they
/// are accepted without search when their length matches the clique (or
/// `⌈|V|/α⌉`) bound. Otherwise branch and bound runs; when it times out the
/// best coloring is returned uncertified.
pub fn length_optimal_coloring(g: &ConfusionGraph, nodes: u64) -> Result<ColoringOutcome> {
    let q = g.field().q();
    let len_of = |c: usize| ceil_log(q, c as u128);
    let mut lower = match max_clique(g.graph(), nodes / 10 + 1000) {
        Ok(c) => c.len(),
        Err(Error::IndependenceTimeout { lower, .. }) => lower,
        Err(e) => return Err(e),
    };
    if let Ok((a, _)) = max_independent_set(g.graph(), nodes / 10 + 1000) {
        lower = lower.max(g.vertex_count().div_ceil(a.max(1)));
    }
    let mut best = dsatur(g.graph());
    let mut subspace = None;
    if let Some(set) = g.cayley_set() {
        let (coset, basis) = coset_coloring(set, len_of(lower), nodes)?;
        if len_of(coset.num_colors) <= len_of(best.num_colors) {
            best = coset;
            subspace = Some(basis);
        }
    }
    if len_of(best.num_colors) <= len_of(lower) {
        return Ok(ColoringOutcome {
            coloring: best,
            lower,
            length_optimal: true,
            subspace,
        });
    }
    match exact_chromatic(g.graph(), nodes, Some(lower)) {
        Ok(r) if len_of(r.chi) < len_of(best.num_colors) || subspace.is_none() => {
            Ok(ColoringOutcome {
                lower: r.chi,
                coloring: r.coloring,
                length_optimal: true,
                subspace: None,
            })
        }
        Ok(r) => Ok(ColoringOutcome {
            lower: r.chi,
            coloring: best,
            length_optimal: true,
            subspace,
        }),
        Err(Error::ColoringTimeout {
            lower: lb,
            upper,
            best: found,
        }) => {
            let (coloring, subspace) = if len_of(found.num_colors) < len_of(best.num_colors) {
                (*found, None)
            } else {
                (best, subspace)
            };
            Ok(ColoringOutcome {
                length_optimal: len_of(upper.min(coloring.num_colors)) <= len_of(lb),
                lower: lb,
                coloring,
                subspace,
            })
        }
        Err(e) => Err(e),
    }
}

/// The linear map `x ↦ x M` whose fibers are the cosets of `span(basis)`.
/// The basis is reduced with pivots taken from the right; a coset is
/// encoded by the remaining coordinates of its representative that
/// vanishes at every pivot.
pub fn quotient_matrix(field: PrimeField, len: usize, basis: &[Word]) -> Result<Matrix> {
    let mut rows: Vec<Vec<Symbol>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for b in basis {
        if b.len() != len {
            return Err(Error::LengthMismatch {
                left: b.len(),
                right: len,
            });
        }
        let mut v = b.symbols().to_vec();
        for (r, &p) in rows.iter().zip(&pivots) {
            let c = v[p];
            for (vi, &ri) in v.iter_mut().zip(r) {
                *vi = field.sub(*vi, field.mul(c, ri));
            }
        }
        let Some(p) = (0..len).rev().find(|&j| v[j] != 0) else {
            return Err(Error::RankDeficient);
        };
        let inv = field.inv(v[p])?;
        for vi in v.iter_mut() {
            *vi = field.mul(*vi, inv);
        }
        for r in rows.iter_mut() {
            let c = r[p];
            for (ri, &vi) in r.iter_mut().zip(&v) {
                *ri = field.sub(*ri, field.mul(c, vi));
            }
        }
        rows.push(v);
        pivots.push(p);
    }
    let free: Vec<usize> = (0..len).filter(|j| !pivots.contains(j)).collect();
    // Row i of M is the reduced unit vector e_i restricted to the free positions.
    let mut m = Matrix::zeros(field, len, free.len());
    for i in 0..len {
        let mut x = vec![0; len];
        x[i] = 1 % field.q();
        for (r, &p) in rows.iter().zip(&pivots) {
            let c = x[p];
            for (xi, &ri) in x.iter_mut().zip(r) {
                *xi = field.sub(*xi, field.mul(c, ri));
            }
        }
        for (col, &j) in free.iter().enumerate() {
            m.set(i, col, x[j]);
        }
    }
    Ok(m)
}

/// A basis of `K` when the color classes are exactly the cosets of a subspace
/// `K` of `F_q^len` (`K` being the class of the zero vector).
pub fn coset_basis(field: PrimeField, len: usize, coloring: &Coloring) -> Option<Vec<Word>> {
    let words: Vec<Word> = (0..coloring.vertex_count())
        .map(|v| field.unrank(v, len))
        .collect::<Result<_>>()
        .ok()?;
    let classes = coloring.classes();
    let zero_class = classes.iter().find(|c| c.contains(&0))?;
    let mut span: Vec<Word> = vec![Word::zero(field, len)];
    let mut basis = Vec::new();
    for &v in zero_class {
        let w = &words[v];
        if span.contains(w) {
            continue;
        }
        let mut next = span.clone();
        for c in 1..field.q() {
            let cw = Word::new(
                field,
                w.symbols().iter().map(|&s| field.mul(s, c)).collect(),
            )
            .ok()?;
            next.extend(span.iter().map(|u| u.add(&cw).expect("same length")));
        }
        span = next;
        basis.push(w.clone());
        if span.len() > zero_class.len() {
            return None;
        }
    }
    let kernel: std::collections::HashSet<usize> = span.iter().map(Word::rank).collect();
    if kernel.len() != zero_class.len() || !zero_class.iter().all(|v| kernel.contains(v)) {
        return None;
    }
    let cosets = classes.iter().all(|class| {
        class.len() == kernel.len()
            && class.iter().all(|&m| {
                kernel.contains(&words[m].sub(&words[class[0]]).expect("same length").rank())
            })
    });
    cosets.then_some(basis)
}

/// Default synthesis: a length-optimal coloring, encoded linearly through
/// the quotient map when the classes are cosets of a subspace.
pub fn synthesize_default(
    inst: &FicpInstance,
    g: &ConfusionGraph,
    nodes: u64,
) -> Result<(Fic, ColoringOutcome)> {
    let mut outcome = length_optimal_coloring(g, nodes)?;
    if outcome.subspace.is_none() {
        outcome.subspace = coset_basis(inst.field, inst.nk(), &outcome.coloring);
    }
    let fic = match &outcome.subspace {
        Some(basis) => Fic::new(
            inst,
            EncodingMap::from_matrix(&quotient_matrix(inst.field, inst.nk(), basis)?)?,
        )?,
        None => synthesize(inst, g, &outcome.coloring, None)?,
    };
    Ok((fic, outcome))
}

#[derive(Debug, Clone)]
pub struct PartitionedCode {
    /// `(block length of the part, part code on the lifted instance)`.
    pub parts: Vec<(usize, Fic)>,
    /// Per part: its length is certified minimal for that block length.
    pub certified: Vec<bool>,
    /// Combined map on the instance lifted to the total block length.
    pub combined: EncodingMap,
}

impl PartitionedCode {
    pub fn len(&self) -> usize {
        self.parts.iter().map(|(_, f)| f.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits the sub-packets into consecutive blocks of the given sizes and
/// solves each block independently; the transmissions are concatenated.
pub fn partitioned_synthesize(
    inst: &FicpInstance,
    partition: &[usize],
    budget: SearchBudget,
) -> Result<PartitionedCode> {
    if partition.is_empty() || partition.contains(&0) {
        return Err(Error::DimensionMismatch(
            "partition parts must be positive".into(),
        ));
    }
    let total: usize = partition.iter().sum();
    let mut solved: BTreeMap<usize, (Fic, bool)> = BTreeMap::new();
    for &m in partition {
        if solved.contains_key(&m) {
            continue;
        }
        let lifted = inst.lift(m)?;
        let g = confusion_graph(&lifted, budget.vertices)?;
        let (fic, outcome) = synthesize_default(&lifted, &g, budget.nodes)?;
        solved.insert(m, (fic, outcome.length_optimal));
    }
    let certified = partition.iter().map(|m| solved[m].1).collect();
    let parts: Vec<(usize, Fic)> = partition
        .iter()
        .map(|&m| (m, solved[&m].0.clone()))
        .collect();
    let field = inst.field;
    let k = inst.nk();
    let combined_len = k * total;
    let count = field.word_count(combined_len).unwrap_or(u128::MAX);
    if count > budget.vertices as u128 {
        return Err(Error::SizeLimit {
            vertices: count,
            budget: budget.vertices,
        });
    }
    let mut x = vec![0; combined_len];
    let words = (0..count as usize)
        .map(|v| {
            field.unrank_into(v, &mut x);
            let mut symbols = Vec::new();
            let mut offset = 0;
            for (m, fic) in &parts {
                let sub: Vec<Symbol> = (0..k * m)
                    .map(|idx| x[(idx / m) * total + offset + idx % m])
                    .collect();
                symbols.extend_from_slice(fic.map.codeword(field.rank(&sub)).symbols());
                offset += m;
            }
            Word::new(field, symbols)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionedCode {
        parts,
        certified,
        combined: EncodingMap::from_vertex_words(field, combined_len, words)?,
    })
}
