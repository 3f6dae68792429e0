use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ficoder::codec::{
    assignment_from_map, coloring_of_map, length_optimal_coloring, render_columns, MapLinearity,
    SearchBudget,
};
use ficoder::coloring::ceil_log;
use ficoder::confusion::{confusable, confusion_graph, export_dot, is_regular};
use ficoder::ecc::{compare_singleton, exhaustive_trials, Provenance};
use ficoder::model::ValidationReport;
use ficoder::{
    build_decoders, builtin_code, check_linear_map, code_size_bounds, concatenate, exact_chromatic,
    is_perfect, mu_bound, partitioned_synthesize, search_codebook, simulate_errors,
    synthesize_default, verify_delta, verify_delta_linear, verify_fic, verify_map, EncodingMap,
    Error, FicpInstance, Matrix, SimMode, Word,
};
use serde::Serialize;

use crate::report::Report;
use crate::{CodeSource, Common};

pub const OK: i32 = 0;
pub const FAILED: i32 = 1;
pub const USAGE: i32 = 2;
pub const TIMEOUT: i32 = 3;

pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::ColoringTimeout { .. }
            | Error::IndependenceTimeout { .. }
            | Error::CodebookTimeout { .. }
            | Error::BudgetExceeded { .. },
        ) => TIMEOUT,
        _ => USAGE,
    }
}

/// A confusable pair reported with 1-based receiver numbers and words.
#[derive(Serialize)]
struct Witness {
    receiver: Option<usize>,
    x: String,
    x_prime: String,
}

fn word(inst: &FicpInstance, v: usize) -> String {
    inst.field
        .unrank(v, inst.nk())
        .expect("vertex in range")
        .to_string()
}

fn witness(inst: &FicpInstance, receiver: Option<usize>, x: usize, y: usize) -> Witness {
    Witness {
        receiver: receiver.map(|i| i + 1),
        x: word(inst, x),
        x_prime: word(inst, y),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(c: &Common, report: &Report) {
    print!("{}", report.render(c.format));
}

fn load_raw(c: &Common) -> Result<(FicpInstance, ValidationReport)> {
    let inst = FicpInstance::from_json(&read(&c.instance)?)
        .with_context(|| format!("parsing {}", c.instance.display()))?;
    let v = inst.validate(c.vertex_budget);
    if !v.is_valid() {
        bail!(Error::InvalidInstance(v.errors));
    }
    Ok((inst, v))
}

/// The instance, lifted when `--n` is given.
fn load(c: &Common) -> Result<FicpInstance> {
    let (inst, _) = load_raw(c)?;
    match c.n {
        Some(m) if m > 1 || inst.n != 1 => Ok(inst.lift(m as usize)?),
        _ => Ok(inst),
    }
}

fn base(inst: &FicpInstance, report: &mut Report) {
    report
        .field("q", inst.field.q())
        .field("n", inst.n)
        .field("messages", inst.k)
        .field("receivers", inst.num_receivers())
        .field("vertices", inst.vertex_count());
}

fn load_code(
    inst: &FicpInstance,
    src: &CodeSource,
) -> Result<Option<(EncodingMap, Option<Matrix>)>> {
    if let Some(p) = &src.assignment {
        let (map, m) = EncodingMap::parse_code_file(inst.field, inst.nk(), &read(p)?)
            .with_context(|| format!("parsing {}", p.display()))?;
        return Ok(Some((map, m)));
    }
    if let Some(p) = &src.matrix {
        let m = Matrix::parse(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
        if m.field() != inst.field || m.rows() != inst.nk() {
            bail!(Error::DimensionMismatch(format!(
                "matrix is {}x{} over F_{}, instance needs {} rows over F_{}",
                m.rows(),
                m.cols(),
                m.field().q(),
                inst.nk(),
                inst.field.q()
            )));
        }
        return Ok(Some((EncodingMap::from_matrix(&m)?, Some(m))));
    }
    Ok(None)
}

fn require_code(inst: &FicpInstance, src: &CodeSource) -> Result<(EncodingMap, Option<Matrix>)> {
    load_code(inst, src)?
        .ok_or_else(|| anyhow::anyhow!("one of --assignment or --matrix is required"))
}

fn closed_form(map: &EncodingMap, n: usize) -> (String, Option<Vec<String>>) {
    match check_linear_map(map) {
        MapLinearity::Linear(m) => ("linear".into(), Some(render_columns(&m, None, n))),
        MapLinearity::Affine(m, b) => ("affine".into(), Some(render_columns(&m, Some(&b), n))),
        MapLinearity::NotLinear => ("nonlinear".into(), None),
    }
}

fn matrix_of(map: &EncodingMap) -> Option<Matrix> {
    match check_linear_map(map) {
        MapLinearity::Linear(m) => Some(m),
        _ => None,
    }
}

pub fn validate(c: &Common) -> Result<i32> {
    let inst = FicpInstance::from_json(&read(&c.instance)?)
        .with_context(|| format!("parsing {}", c.instance.display()));
    let inst = match inst {
        Ok(i) => i,
        Err(e) => bail!(e),
    };
    let v = inst.validate(c.vertex_budget);
    let mut r = Report::new("validate");
    base(&inst, &mut r);
    r.field("valid", v.is_valid())
        .field("linear", inst.is_linear())
        .field("errors", &v.errors)
        .field("warnings", &v.warnings)
        .field("notes", &v.notes);
    emit(c, &r);
    Ok(if v.is_valid() { OK } else { USAGE })
}

pub fn graph(c: &Common, dot: Option<&Path>) -> Result<i32> {
    let inst = load(c)?;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let reg = is_regular(g.graph());
    let mut r = Report::new("graph");
    base(&inst, &mut r);
    r.field("edges", g.edge_count())
        .field("cayley", g.is_cayley())
        .field("connection_set_size", g.cayley_set().map(|s| s.len()))
        .field("regular", reg.regular)
        .field("min_degree", reg.min_degree)
        .field("max_degree", reg.max_degree);
    if let Some(p) = dot {
        write(p, &export_dot(g.graph()))?;
        r.field("dot", p.display().to_string());
    }
    emit(c, &r);
    Ok(OK)
}

#[derive(Serialize)]
struct ColoringFile<'a> {
    num_colors: usize,
    color_of: &'a [usize],
}

pub fn color(c: &Common) -> Result<i32> {
    let inst = load(c)?;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let q = inst.field.q();
    let mut r = Report::new("color");
    base(&inst, &mut r);
    let quick = length_optimal_coloring(&g, c.budget)?;
    let (coloring, lower, certificate, status) = if quick.coloring.num_colors == quick.lower {
        (
            quick.coloring,
            quick.lower,
            "lower bound met by the coloring",
            OK,
        )
    } else {
        match exact_chromatic(g.graph(), c.budget, Some(quick.lower)) {
            Ok(res) => (res.coloring, res.chi, "exhaustive search", OK),
            Err(Error::ColoringTimeout { lower, upper, best }) => {
                let best = if quick.coloring.num_colors < upper {
                    quick.coloring
                } else {
                    *best
                };
                (
                    best,
                    lower.max(quick.lower),
                    "none (budget exhausted)",
                    TIMEOUT,
                )
            }
            Err(e) => return Err(e.into()),
        }
    };
    let certified = status == OK;
    r.field("chi", certified.then_some(coloring.num_colors))
        .field("chi_lower", lower)
        .field("chi_upper", coloring.num_colors)
        .field("certificate", certificate)
        .field("length", ceil_log(q, coloring.num_colors as u128))
        .field(
            "length_certified",
            certified || ceil_log(q, lower as u128) == ceil_log(q, coloring.num_colors as u128),
        );
    let file = serde_json::to_string_pretty(&ColoringFile {
        num_colors: coloring.num_colors,
        color_of: &coloring.color_of,
    })? + "\n";
    match &c.output {
        Some(p) => {
            write(p, &file)?;
            r.field("output", p.display().to_string());
        }
        None => {
            r.block("coloring", file);
        }
    }
    emit(c, &r);
    Ok(status)
}

fn code_output(c: &Common, r: &mut Report, text: String) -> Result<()> {
    match &c.output {
        Some(p) => {
            write(p, &text)?;
            r.field("output", p.display().to_string());
        }
        None => {
            r.block("code", text);
        }
    }
    Ok(())
}

pub fn synthesize(
    c: &Common,
    assignment: Option<&Path>,
    partition: Option<&[usize]>,
) -> Result<i32> {
    if let Some(parts) = partition {
        return synthesize_partitioned(c, parts);
    }
    let inst = load(c)?;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let (fic, certified, source) = match assignment {
        Some(p) => {
            let (printed, _) = EncodingMap::parse_code_file(inst.field, inst.nk(), &read(p)?)
                .with_context(|| format!("parsing {}", p.display()))?;
            let coloring = coloring_of_map(&printed);
            let words = assignment_from_map(&coloring, &printed);
            let fic = ficoder::synthesize(&inst, &g, &coloring, Some(&words))?;
            let lower = length_optimal_coloring(&g, c.budget)?.lower;
            let q = inst.field.q();
            let certified = ceil_log(q, lower as u128) == fic.len();
            (fic, certified, "assignment")
        }
        None => {
            let (fic, outcome) = synthesize_default(&inst, &g, c.budget)?;
            let source = if outcome.subspace.is_some() {
                "cosets"
            } else {
                "coloring"
            };
            (fic, outcome.length_optimal, source)
        }
    };
    let report = verify_fic(&inst, &fic)?;
    let mu = mu_bound(&inst);
    let (kind, columns) = closed_form(&fic.map, inst.n);
    let mut r = Report::new("synthesize");
    base(&inst, &mut r);
    r.field("classes_from", source)
        .field("codewords", fic.map.size())
        .field("length", fic.len())
        .field("length_certified", certified)
        .field("mu", mu)
        .field("perfect", is_perfect(&fic, mu))
        .field("map", kind)
        .field("closed_form", columns)
        .field("verified", report.passed);
    code_output(
        c,
        &mut r,
        fic.map.to_code_file(matrix_of(&fic.map).as_ref()),
    )?;
    emit(c, &r);
    Ok(if report.passed { OK } else { FAILED })
}

fn synthesize_partitioned(c: &Common, parts: &[usize]) -> Result<i32> {
    let (inst, _) = load_raw(c)?;
    let budget = SearchBudget {
        vertices: c.vertex_budget,
        nodes: c.budget,
    };
    let code = partitioned_synthesize(&inst, parts, budget)?;
    let total: usize = parts.iter().sum();
    let lifted = inst.lift(total)?;
    let report = verify_map(&lifted, &code.combined)?;
    let mut r = Report::new("synthesize");
    base(&lifted, &mut r);
    r.field("partition", parts)
        .field(
            "part_lengths",
            code.parts.iter().map(|(_, f)| f.len()).collect::<Vec<_>>(),
        )
        .field("part_lengths_certified", &code.certified)
        .field("length", code.len())
        .field("closed_form", closed_form(&code.combined, total).1)
        .field("verified", report.passed);
    code_output(
        c,
        &mut r,
        code.combined
            .to_code_file(matrix_of(&code.combined).as_ref()),
    )?;
    emit(c, &r);
    Ok(if report.passed { OK } else { FAILED })
}

pub fn bounds(c: &Common) -> Result<i32> {
    let (inst, _) = load_raw(c)?;
    let n = c.n.unwrap_or(1) as usize;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let b = code_size_bounds(&inst, &g, n, c.budget)?;
    let q = inst.field.q();
    let l_opt = match (n, b.chi) {
        (1, Some(chi)) => Some(ceil_log(q, chi as u128)),
        _ if b.length_lower == b.length_upper => Some(b.length_lower),
        _ => None,
    };
    let mut r = Report::new("bounds");
    base(&inst, &mut r);
    r.field("cayley", g.is_cayley())
        .field("bounds", &b)
        .field("l_opt", l_opt)
        .field("mu", b.mu)
        .field("perfect", l_opt.map(|l| l == b.mu));
    emit(c, &r);
    let certified = b.alpha.is_some() && (n > 1 || b.chi.is_some());
    Ok(if certified { OK } else { TIMEOUT })
}

pub fn verify(c: &Common, src: &CodeSource) -> Result<i32> {
    let inst = load(c)?;
    let (map, _) = require_code(&inst, src)?;
    let report = verify_map(&inst, &map)?;
    let mut r = Report::new("verify");
    base(&inst, &mut r);
    r.field("codewords", map.size())
        .field("length", map.len())
        .field("passed", report.passed)
        .field("checked", report.checked)
        .field(
            "witness",
            report
                .witness
                .map(|(i, x, y)| witness(&inst, Some(i), x, y)),
        )
        .field("failures", report.failures.len());
    if let Some(f) = report.failures.first() {
        r.field(
            "first_failure",
            format!("receiver {} on {}", f.receiver + 1, word(&inst, f.x)),
        );
    }
    emit(c, &r);
    Ok(if report.passed { OK } else { FAILED })
}

fn confusing_receiver(inst: &FicpInstance, x: usize, y: usize) -> Option<usize> {
    (0..inst.num_receivers()).find(|&i| confusable(inst, i, x, y).unwrap_or(false))
}

pub fn ecc_verify(c: &Common, src: &CodeSource, delta: usize) -> Result<i32> {
    let inst = load(c)?;
    let (map, matrix) = require_code(&inst, src)?;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let check = verify_delta(&g, &map, delta)?;
    let mut r = Report::new("ecc-verify");
    base(&inst, &mut r);
    r.field("length", map.len())
        .field("delta", delta)
        .field("required_distance", 2 * delta + 1)
        .field("min_distance", check.min_distance)
        .field("passed", check.passed)
        .field(
            "witness",
            check
                .witness
                .map(|(x, y)| witness(&inst, confusing_receiver(&inst, x, y), x, y)),
        );
    if let Some(m) = matrix.as_ref().filter(|_| inst.is_linear()) {
        let lin = verify_delta_linear(&inst, m, delta)?;
        r.field(
            "linear_check_agrees",
            lin.passed == check.passed && lin.min_distance == check.min_distance,
        );
    }
    emit(c, &r);
    Ok(if check.passed { OK } else { FAILED })
}

pub fn ecc_concat(c: &Common, src: &CodeSource, outer: &str, delta: usize) -> Result<i32> {
    let inst = load(c)?;
    let g = confusion_graph(&inst, c.vertex_budget)?;
    let q = inst.field.q();
    let (fic, outcome) = synthesize_default(&inst, &g, c.budget)?;
    let (inner, inner_matrix) = match load_code(&inst, src)? {
        Some(code) => code,
        None => {
            let m = matrix_of(&fic.map);
            (fic.map, m)
        }
    };
    build_decoders(&inst, &inner).context("the inner code does not decode")?;
    let (map, matrix, achieved, provenance) = if outer == "search" {
        let words = search_codebook(inner.size(), 2 * delta + 1, q, c.budget)?;
        let map = inner.map_codewords(|w| {
            let i = inner
                .codebook()
                .iter()
                .position(|u| u == w)
                .expect("codeword in codebook");
            Ok(words[i].clone())
        })?;
        (map, None, delta, "searched codebook".to_string())
    } else {
        let code = builtin_code(outer, q, delta)?;
        let d = concatenate(&inner, inner_matrix.as_ref(), &code, outer)?;
        let how = match &d.provenance {
            Provenance::Direct => "direct".to_string(),
            Provenance::Concatenated {
                outer,
                inner_length,
            } => format!("{outer} after a length-{inner_length} code"),
        };
        (d.map, d.matrix, d.delta, how)
    };
    let check = verify_delta(&g, &map, achieved)?;
    let l_opt = ceil_log(q, outcome.lower as u128).max(
        ceil_log(q, outcome.coloring.num_colors as u128) * usize::from(outcome.length_optimal),
    );
    let cmp = compare_singleton(l_opt, achieved, map.len());
    let mut r = Report::new("ecc-concat");
    base(&inst, &mut r);
    r.field("outer", outer)
        .field("construction", provenance)
        .field("inner_length", inner.len())
        .field("length", map.len())
        .field("delta", achieved)
        .field("min_distance", check.min_distance)
        .field("passed", check.passed)
        .field("l_opt", outcome.length_optimal.then_some(l_opt))
        .field("singleton_bound", cmp.bound)
        .field(
            "optimality",
            if cmp.meets && outcome.length_optimal {
                "optimal (meets the Singleton bound)"
            } else {
                "valid, optimality unknown"
            },
        );
    code_output(c, &mut r, map.to_code_file(matrix.as_ref()))?;
    emit(c, &r);
    Ok(if check.passed && achieved >= delta {
        OK
    } else {
        FAILED
    })
}

/// JSON numbers past `u64` are written as decimal strings.
fn count(n: u128) -> serde_json::Value {
    u64::try_from(n).map_or_else(|_| n.to_string().into(), Into::into)
}

pub fn simulate(
    c: &Common,
    src: &CodeSource,
    delta: usize,
    pattern: Option<&str>,
    trials: u128,
) -> Result<i32> {
    let inst = load(c)?;
    let (map, _) = require_code(&inst, src)?;
    let mode = match pattern {
        Some(p) => SimMode::Pattern(Word::parse(inst.field, p)?),
        None => SimMode::Exhaustive,
    };
    let report = simulate_errors(&inst, &map, delta, &mode, trials)?;
    let mut r = Report::new("simulate");
    base(&inst, &mut r);
    r.field("length", map.len())
        .field("delta", delta)
        .field(
            "mode",
            if pattern.is_some() {
                "pattern"
            } else {
                "exhaustive"
            },
        )
        .field("patterns", report.patterns)
        .field("trials", count(report.trials))
        .field("failures", report.failures.len())
        .field("passed", report.passed());
    if pattern.is_none() {
        r.field(
            "exhaustive_trials",
            count(exhaustive_trials(inst.field, inst.nk(), map.len(), delta)),
        );
    }
    if let Some(f) = report.failures.first() {
        let e = inst.field.unrank(f.pattern, map.len())?;
        r.field(
            "first_failure",
            format!(
                "receiver {} on {} with error {}",
                f.receiver + 1,
                word(&inst, f.message),
                e
            ),
        );
    }
    emit(c, &r);
    Ok(if report.passed() { OK } else { FAILED })
}
