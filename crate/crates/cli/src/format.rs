//! The line-based description format: `begin <kind> <name>` ... `end`
//! blocks with one record per line. Parsing is total (every input yields
//! a document or a line-numbered diagnostic) and the canonical
//! serialization round-trips.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use ktc_core::matrix::{is_prime, RingTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone)]
pub struct Document {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub name: String,
    /// Line of the `begin` marker, for diagnostics.
    pub line: usize,
    pub data: BlockData,
}

#[derive(Debug, Clone)]
pub enum BlockData {
    Category(CategoryData),
    Exact(ExactData),
    Waldhausen(WaldhausenData),
    Complex(ComplexData),
    Field(FieldData),
    Branes(BranesData),
    Pndp(PndpData),
}

impl BlockData {
    pub fn kind(&self) -> &'static str {
        match self {
            BlockData::Category(_) => "category",
            BlockData::Exact(_) => "exact",
            BlockData::Waldhausen(_) => "waldhausen",
            BlockData::Complex(_) => "complex",
            BlockData::Field(_) => "field",
            BlockData::Branes(_) => "branes",
            BlockData::Pndp(_) => "pndp",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CategoryData {
    pub objects: Vec<String>,
    /// `(name, src, tgt)`
    pub morphisms: Vec<(String, String, String)>,
    /// `(object, morphism)` overriding the synthesized identity
    pub identities: Vec<(String, String)>,
    /// `(g, f, h)` meaning `g ∘ f = h`
    pub composes: Vec<(String, String, String)>,
}

impl CategoryData {
    /// The identity morphism name for an object: a declared override or
    /// the synthesized `id_<obj>`.
    pub fn identity_name(&self, object: &str) -> String {
        self.identities
            .iter()
            .find(|(o, _)| o == object)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| format!("id_{object}"))
    }

    fn known_morphism(&self, name: &str) -> bool {
        self.morphisms.iter().any(|(n, _, _)| n == name)
            || self
                .objects
                .iter()
                .any(|o| self.identity_name(o) == name)
    }
}

#[derive(Debug, Clone)]
pub struct ExactData {
    pub ring: RingTag,
    /// Generate the full subcategory of free modules of rank up to this
    /// bound (fields only); excludes explicit object/morphism lines.
    pub full_maxrank: Option<usize>,
    /// Σ := every exact sequence formable from declared morphisms.
    pub sigma_full: bool,
    /// `(name, rank, relation columns)`
    pub objects: Vec<(String, usize, Vec<Vec<i128>>)>,
    /// `(name, src, tgt, row-major entries)`
    pub morphisms: Vec<(String, String, String, Vec<i128>)>,
    /// `(left, mid, right, f1, f2)` with the source line for diagnostics
    pub seqs: Vec<SeqLine>,
}

#[derive(Debug, Clone)]
pub struct SeqLine {
    pub names: [String; 5],
    pub line: usize,
}

impl ExactData {
    fn known_object(&self, name: &str) -> bool {
        self.objects.iter().any(|(n, _, _)| n == name)
    }

    /// Names usable in `seq` lines: declared morphisms, synthesized
    /// identities `id_<obj>` and zero morphisms `z_<src>_<tgt>`.
    fn known_morphism(&self, name: &str) -> bool {
        if self.morphisms.iter().any(|(n, _, _, _)| n == name) {
            return true;
        }
        for (o, _, _) in &self.objects {
            if name == format!("id_{o}") {
                return true;
            }
            for (t, _, _) in &self.objects {
                if name == format!("z_{o}_{t}") {
                    return true;
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone)]
pub struct WaldhausenData {
    pub category: String,
    pub zero: String,
    pub cof: Vec<String>,
    pub we: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ComplexData {
    pub simplices: Vec<Vec<usize>>,
    pub cochains: Vec<CochainDecl>,
}

#[derive(Debug, Clone)]
pub struct CochainDecl {
    pub name: String,
    pub degree: usize,
    /// `(simplex, value)`
    pub values: Vec<(Vec<usize>, i128)>,
}

#[derive(Debug, Clone)]
pub struct FieldData {
    pub extents: [usize; 4],
    /// `(region name, site)` assignments; empty means one region
    pub regions: Vec<(String, [usize; 4])>,
    pub sites: Vec<([usize; 4], f64)>,
}

#[derive(Debug, Clone)]
pub struct BranesData {
    pub complex: String,
    /// `(id, stack, region complex name)`
    pub branes: Vec<(String, usize, String)>,
    /// `(id, start brane, end brane)`
    pub strings: Vec<(String, String, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct PndpData {
    /// `(id, b1, b2, fiber, rank)`
    pub specs: Vec<(String, u32, u32, u32, u32)>,
}

pub fn parse_ring(s: &str) -> Result<RingTag, String> {
    if s == "z" {
        return Ok(RingTag::Int);
    }
    if let Some(p) = s.strip_prefix("zmod:") {
        let p: u32 = p.parse().map_err(|_| format!("bad modulus in {s}"))?;
        if !is_prime(p) {
            return Err(format!("{p} is not prime"));
        }
        return Ok(RingTag::Mod(p));
    }
    Err(format!("unknown ring {s}, expected z or zmod:<p>"))
}

// ---------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.is_empty() {
                None
            } else {
                Some(Line {
                    number: i + 1,
                    tokens,
                })
            }
        })
        .collect()
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError {
            line,
            message: format!("expected {what}, got {tok}"),
        })
}

fn parse_i128(tok: &str, line: usize) -> Result<i128, ParseError> {
    tok.parse().map_err(|_| ParseError {
        line,
        message: format!("expected integer, got {tok}"),
    })
}

/// Parse a document. Total: every input yields a [`Document`] or a
/// line-numbered [`ParseError`].
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let lines = tokenize(text);
    let mut blocks: Vec<Block> = Vec::new();
    let mut names = BTreeSet::new();
    let mut i = 0;
    while i < lines.len() {
        let line = &lines[i];
        if line.tokens[0] != "begin" {
            return err(line.number, format!("expected begin, got {}", line.tokens[0]));
        }
        if line.tokens.len() != 3 {
            return err(line.number, "expected: begin <kind> <name>");
        }
        let kind = line.tokens[1];
        let name = line.tokens[2].to_string();
        if !names.insert(name.clone()) {
            return err(line.number, format!("duplicate block name {name}"));
        }
        let begin_line = line.number;
        // collect body lines until end
        let mut body = Vec::new();
        i += 1;
        loop {
            if i >= lines.len() {
                return err(begin_line, format!("block {name} is never closed"));
            }
            if lines[i].tokens[0] == "end" {
                break;
            }
            body.push(&lines[i]);
            i += 1;
        }
        i += 1; // past end
        let data = match kind {
            "category" => BlockData::Category(parse_category(&body)?),
            "exact" => BlockData::Exact(parse_exact(&body, begin_line)?),
            "waldhausen" => BlockData::Waldhausen(parse_waldhausen(&body, begin_line)?),
            "complex" => BlockData::Complex(parse_complex(&body)?),
            "field" => BlockData::Field(parse_field(&body, begin_line)?),
            "branes" => BlockData::Branes(parse_branes(&body, begin_line)?),
            "pndp" => BlockData::Pndp(parse_pndp(&body)?),
            other => return err(begin_line, format!("unknown block kind {other}")),
        };
        blocks.push(Block {
            name,
            line: begin_line,
            data,
        });
    }
    let doc = Document { blocks };
    validate_references(&doc)?;
    Ok(doc)
}

fn parse_category(body: &[&Line]) -> Result<CategoryData, ParseError> {
    let mut data = CategoryData::default();
    for l in body {
        match l.tokens[0] {
            "object" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: object <id>");
                }
                if data.objects.iter().any(|o| o == l.tokens[1]) {
                    return err(l.number, format!("duplicate object {}", l.tokens[1]));
                }
                data.objects.push(l.tokens[1].to_string());
            }
            "morphism" => {
                if l.tokens.len() != 4 {
                    return err(l.number, "expected: morphism <id> <src> <tgt>");
                }
                let (name, src, tgt) = (l.tokens[1], l.tokens[2], l.tokens[3]);
                if data.morphisms.iter().any(|(n, _, _)| n == name) {
                    return err(l.number, format!("duplicate morphism {name}"));
                }
                for o in [src, tgt] {
                    if !data.objects.iter().any(|x| x == o) {
                        return err(l.number, format!("undefined object {o}"));
                    }
                }
                data.morphisms
                    .push((name.to_string(), src.to_string(), tgt.to_string()));
            }
            "identity" => {
                if l.tokens.len() != 3 {
                    return err(l.number, "expected: identity <obj> <mor>");
                }
                let (obj, mor) = (l.tokens[1], l.tokens[2]);
                if !data.objects.iter().any(|x| x == obj) {
                    return err(l.number, format!("undefined object {obj}"));
                }
                if !data.morphisms.iter().any(|(n, _, _)| n == mor) {
                    return err(l.number, format!("undefined morphism {mor}"));
                }
                data.identities.push((obj.to_string(), mor.to_string()));
            }
            "compose" => {
                // compose <g> <f> = <h>
                if l.tokens.len() != 5 || l.tokens[3] != "=" {
                    return err(l.number, "expected: compose <g> <f> = <h>");
                }
                let (g, f, h) = (l.tokens[1], l.tokens[2], l.tokens[4]);
                data.composes
                    .push((g.to_string(), f.to_string(), h.to_string()));
            }
            other => return err(l.number, format!("unknown category line {other}")),
        }
    }
    // compose references are checked once all morphisms are known
    for (g, f, h) in &data.composes {
        for m in [g, f, h] {
            if !data.known_morphism(m) {
                let line = body
                    .iter()
                    .find(|l| l.tokens[0] == "compose" && l.tokens.contains(&m.as_str()))
                    .map(|l| l.number)
                    .unwrap_or(0);
                return err(line, format!("undefined morphism {m}"));
            }
        }
    }
    Ok(data)
}

fn parse_exact(body: &[&Line], begin: usize) -> Result<ExactData, ParseError> {
    let mut ring = None;
    let mut data = ExactData {
        ring: RingTag::Int,
        full_maxrank: None,
        sigma_full: false,
        objects: Vec::new(),
        morphisms: Vec::new(),
        seqs: Vec::new(),
    };
    for l in body {
        match l.tokens[0] {
            "ring" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: ring z|zmod:<p>");
                }
                ring = Some(parse_ring(l.tokens[1]).map_err(|m| ParseError {
                    line: l.number,
                    message: m,
                })?);
            }
            "full" => {
                if l.tokens.len() != 3 || l.tokens[1] != "maxrank" {
                    return err(l.number, "expected: full maxrank <n>");
                }
                data.full_maxrank = Some(parse_usize(l.tokens[2], l.number, "rank")?);
            }
            "sigma" => {
                if l.tokens.len() != 2 || l.tokens[1] != "full" {
                    return err(l.number, "expected: sigma full");
                }
                data.sigma_full = true;
            }
            "object" => {
                // object <id> rank <n> [relations <k> <entries...>]
                if l.tokens.len() < 4 || l.tokens[2] != "rank" {
                    return err(l.number, "expected: object <id> rank <n> [relations <k> <entries>]");
                }
                let name = l.tokens[1].to_string();
                if data.known_object(&name) {
                    return err(l.number, format!("duplicate object {name}"));
                }
                let rank = parse_usize(l.tokens[3], l.number, "rank")?;
                let mut relations = Vec::new();
                if l.tokens.len() > 4 {
                    if l.tokens[4] != "relations" || l.tokens.len() < 6 {
                        return err(l.number, "expected: relations <k> <entries>");
                    }
                    let k = parse_usize(l.tokens[5], l.number, "relation count")?;
                    let entries = &l.tokens[6..];
                    if entries.len() != rank * k {
                        return err(
                            l.number,
                            format!("expected {} relation entries, got {}", rank * k, entries.len()),
                        );
                    }
                    // entries are column-major per relation
                    for c in 0..k {
                        let mut col = Vec::new();
                        for r in 0..rank {
                            col.push(parse_i128(entries[c * rank + r], l.number)?);
                        }
                        relations.push(col);
                    }
                }
                data.objects.push((name, rank, relations));
            }
            "morphism" => {
                // morphism <id> <src> <tgt> <entries...>
                if l.tokens.len() < 4 {
                    return err(l.number, "expected: morphism <id> <src> <tgt> <entries>");
                }
                let name = l.tokens[1].to_string();
                let (src, tgt) = (l.tokens[2].to_string(), l.tokens[3].to_string());
                let src_rank = data
                    .objects
                    .iter()
                    .find(|(n, _, _)| *n == src)
                    .map(|(_, r, _)| *r);
                let tgt_rank = data
                    .objects
                    .iter()
                    .find(|(n, _, _)| *n == tgt)
                    .map(|(_, r, _)| *r);
                let (Some(sr), Some(tr)) = (src_rank, tgt_rank) else {
                    return err(l.number, "morphism references an undefined object");
                };
                let entries = &l.tokens[4..];
                if entries.len() != sr * tr {
                    return err(
                        l.number,
                        format!("expected {} entries, got {}", sr * tr, entries.len()),
                    );
                }
                let mut m = Vec::new();
                for tok in entries {
                    m.push(parse_i128(tok, l.number)?);
                }
                data.morphisms.push((name, src, tgt, m));
            }
            "seq" => {
                if l.tokens.len() != 6 {
                    return err(l.number, "expected: seq <L'> <L> <L''> <f1> <f2>");
                }
                data.seqs.push(SeqLine {
                    names: [
                        l.tokens[1].to_string(),
                        l.tokens[2].to_string(),
                        l.tokens[3].to_string(),
                        l.tokens[4].to_string(),
                        l.tokens[5].to_string(),
                    ],
                    line: l.number,
                });
            }
            other => return err(l.number, format!("unknown exact line {other}")),
        }
    }
    let Some(ring) = ring else {
        return err(begin, "exact block needs a ring line");
    };
    data.ring = ring;
    if let Some(_r) = data.full_maxrank {
        if !matches!(ring, RingTag::Mod(_)) {
            return err(begin, "full generation needs a finite field ring (zmod:<p>)");
        }
        if !data.objects.is_empty() || !data.morphisms.is_empty() || !data.seqs.is_empty() {
            return err(begin, "full blocks take no object/morphism/seq lines");
        }
    }
    // seq references
    for s in &data.seqs {
        for o in &s.names[..3] {
            if !data.known_object(o) {
                return err(s.line, format!("undefined object {o}"));
            }
        }
        for m in &s.names[3..] {
            if !data.known_morphism(m) {
                return err(s.line, format!("undefined morphism {m}"));
            }
        }
    }
    Ok(data)
}

fn parse_waldhausen(body: &[&Line], begin: usize) -> Result<WaldhausenData, ParseError> {
    let mut category = None;
    let mut zero = None;
    let mut cof = Vec::new();
    let mut we = Vec::new();
    for l in body {
        match l.tokens[0] {
            "category" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: category <name>");
                }
                category = Some(l.tokens[1].to_string());
            }
            "zero" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: zero <obj>");
                }
                zero = Some(l.tokens[1].to_string());
            }
            "cof" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: cof <mor>");
                }
                cof.push(l.tokens[1].to_string());
            }
            "we" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: we <mor>");
                }
                we.push(l.tokens[1].to_string());
            }
            other => return err(l.number, format!("unknown waldhausen line {other}")),
        }
    }
    let Some(category) = category else {
        return err(begin, "waldhausen block needs a category line");
    };
    let Some(zero) = zero else {
        return err(begin, "waldhausen block needs a zero line");
    };
    Ok(WaldhausenData {
        category,
        zero,
        cof,
        we,
    })
}

fn parse_complex(body: &[&Line]) -> Result<ComplexData, ParseError> {
    let mut data = ComplexData::default();
    for l in body {
        match l.tokens[0] {
            "simplex" => {
                if l.tokens.len() < 2 {
                    return err(l.number, "expected: simplex v0 [v1 ...]");
                }
                let mut verts = Vec::new();
                for t in &l.tokens[1..] {
                    verts.push(parse_usize(t, l.number, "vertex")?);
                }
                let mut sorted = verts.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != verts.len() {
                    return err(l.number, "simplex has repeated vertices");
                }
                data.simplices.push(verts);
            }
            "cochain" => {
                if l.tokens.len() != 4 || l.tokens[2] != "degree" {
                    return err(l.number, "expected: cochain <name> degree <d>");
                }
                let name = l.tokens[1].to_string();
                if data.cochains.iter().any(|c| c.name == name) {
                    return err(l.number, format!("duplicate cochain {name}"));
                }
                let degree = parse_usize(l.tokens[3], l.number, "degree")?;
                data.cochains.push(CochainDecl {
                    name,
                    degree,
                    values: Vec::new(),
                });
            }
            "value" => {
                if l.tokens.len() < 4 {
                    return err(l.number, "expected: value <cochain> v0 ... vd <c>");
                }
                let name = l.tokens[1];
                let Some(decl) = data.cochains.iter_mut().find(|c| c.name == name) else {
                    return err(l.number, format!("undefined cochain {name}"));
                };
                let verts_toks = &l.tokens[2..l.tokens.len() - 1];
                if verts_toks.len() != decl.degree + 1 {
                    return err(
                        l.number,
                        format!(
                            "expected {} vertices for a degree-{} value",
                            decl.degree + 1,
                            decl.degree
                        ),
                    );
                }
                let mut verts = Vec::new();
                for t in verts_toks {
                    verts.push(parse_usize(t, l.number, "vertex")?);
                }
                verts.sort_unstable();
                let value = parse_i128(l.tokens[l.tokens.len() - 1], l.number)?;
                if decl.values.iter().any(|(v, _)| *v == verts) {
                    return err(l.number, format!("duplicate value for simplex {verts:?}"));
                }
                decl.values.push((verts, value));
            }
            other => return err(l.number, format!("unknown complex line {other}")),
        }
    }
    // every valued simplex must belong to the complex's closure
    let closure = ktc_core::complex::SimplicialComplex::from_maximal(&data.simplices)
        .map_err(|e| ParseError {
            line: body.first().map(|l| l.number).unwrap_or(0),
            message: e.to_string(),
        })?;
    for c in &data.cochains {
        for (v, _) in &c.values {
            if !closure.contains(v) {
                let line = body
                    .iter()
                    .find(|l| l.tokens[0] == "value" && l.tokens[1] == c.name)
                    .map(|l| l.number)
                    .unwrap_or(0);
                return err(line, format!("simplex {v:?} is not in the complex"));
            }
        }
    }
    Ok(data)
}

fn parse_field(body: &[&Line], begin: usize) -> Result<FieldData, ParseError> {
    let mut extents = None;
    let mut regions = Vec::new();
    let mut sites: Vec<([usize; 4], f64)> = Vec::new();
    for l in body {
        match l.tokens[0] {
            "extent" => {
                if l.tokens.len() != 5 {
                    return err(l.number, "expected: extent e0 e1 e2 e3");
                }
                let mut e = [0usize; 4];
                for (k, t) in l.tokens[1..].iter().enumerate() {
                    e[k] = parse_usize(t, l.number, "extent")?;
                    if e[k] == 0 {
                        return err(l.number, "extents must be positive");
                    }
                }
                extents = Some(e);
            }
            "region" => {
                if l.tokens.len() != 6 {
                    return err(l.number, "expected: region <name> x0 x1 x2 x3");
                }
                let mut x = [0usize; 4];
                for (k, t) in l.tokens[2..].iter().enumerate() {
                    x[k] = parse_usize(t, l.number, "coordinate")?;
                }
                regions.push((l.tokens[1].to_string(), x));
            }
            "site" => {
                // site x0 x1 x2 x3 value <v>
                if l.tokens.len() != 7 || l.tokens[5] != "value" {
                    return err(l.number, "expected: site x0 x1 x2 x3 value <v>");
                }
                let mut x = [0usize; 4];
                for (k, t) in l.tokens[1..5].iter().enumerate() {
                    x[k] = parse_usize(t, l.number, "coordinate")?;
                }
                let v: f64 = l.tokens[6].parse().map_err(|_| ParseError {
                    line: l.number,
                    message: format!("expected value, got {}", l.tokens[6]),
                })?;
                if sites.iter().any(|(y, _)| *y == x) {
                    return err(l.number, format!("duplicate site {x:?}"));
                }
                sites.push((x, v));
            }
            other => return err(l.number, format!("unknown field line {other}")),
        }
    }
    let Some(extents) = extents else {
        return err(begin, "field block needs an extent line");
    };
    for (name, x) in &regions {
        if x.iter().zip(&extents).any(|(a, b)| a >= b) {
            return err(begin, format!("region {name} site {x:?} outside extents"));
        }
    }
    for (x, _) in &sites {
        if x.iter().zip(&extents).any(|(a, b)| a >= b) {
            return err(begin, format!("site {x:?} outside extents"));
        }
    }
    if !regions.is_empty() {
        // a declared partition must cover every site exactly once
        let mut seen = BTreeSet::new();
        for (name, x) in &regions {
            if !seen.insert(*x) {
                return err(begin, format!("site {x:?} assigned twice (region {name})"));
            }
        }
        let total: usize = extents.iter().product();
        if seen.len() != total {
            return err(
                begin,
                format!("regions cover {} of {total} sites", seen.len()),
            );
        }
    }
    Ok(FieldData {
        extents,
        regions,
        sites,
    })
}

fn parse_branes(body: &[&Line], begin: usize) -> Result<BranesData, ParseError> {
    let mut complex = None;
    let mut branes = Vec::new();
    let mut strings = Vec::new();
    for l in body {
        match l.tokens[0] {
            "complex" => {
                if l.tokens.len() != 2 {
                    return err(l.number, "expected: complex <name>");
                }
                complex = Some(l.tokens[1].to_string());
            }
            "brane" => {
                // brane <id> stack <n> region <complex-name>
                if l.tokens.len() != 6 || l.tokens[2] != "stack" || l.tokens[4] != "region" {
                    return err(l.number, "expected: brane <id> stack <n> region <complex>");
                }
                let stack = parse_usize(l.tokens[3], l.number, "stack size")?;
                if stack == 0 {
                    return err(l.number, "stack size must be at least 1");
                }
                branes.push((l.tokens[1].to_string(), stack, l.tokens[5].to_string()));
            }
            "string" => {
                if l.tokens.len() != 4 {
                    return err(l.number, "expected: string <id> <braneA> <braneB>");
                }
                strings.push((
                    l.tokens[1].to_string(),
                    l.tokens[2].to_string(),
                    l.tokens[3].to_string(),
                ));
            }
            other => return err(l.number, format!("unknown branes line {other}")),
        }
    }
    let Some(complex) = complex else {
        return err(begin, "branes block needs a complex line");
    };
    for (id, a, b) in &strings {
        for endpoint in [a, b] {
            if !branes.iter().any(|(bid, _, _)| bid == endpoint) {
                return err(begin, format!("string {id} references undefined brane {endpoint}"));
            }
        }
    }
    Ok(BranesData {
        complex,
        branes,
        strings,
    })
}

fn parse_pndp(body: &[&Line]) -> Result<PndpData, ParseError> {
    let mut data = PndpData::default();
    for l in body {
        if l.tokens[0] != "pndp" {
            return err(l.number, format!("unknown pndp line {}", l.tokens[0]));
        }
        // pndp <id> b1 <n> b2 <n> fiber <n> rank <n>
        if l.tokens.len() != 10
            || l.tokens[2] != "b1"
            || l.tokens[4] != "b2"
            || l.tokens[6] != "fiber"
            || l.tokens[8] != "rank"
        {
            return err(l.number, "expected: pndp <id> b1 <n> b2 <n> fiber <n> rank <n>");
        }
        let num = |tok: &str| -> Result<u32, ParseError> {
            tok.parse().map_err(|_| ParseError {
                line: l.number,
                message: format!("expected number, got {tok}"),
            })
        };
        data.specs.push((
            l.tokens[1].to_string(),
            num(l.tokens[3])?,
            num(l.tokens[5])?,
            num(l.tokens[7])?,
            num(l.tokens[9])?,
        ));
    }
    Ok(data)
}

/// Cross-block reference validation: waldhausen blocks name category
/// blocks (and their morphisms), branes blocks name complex blocks.
fn validate_references(doc: &Document) -> Result<(), ParseError> {
    let categories: BTreeMap<&str, &CategoryData> = doc
        .blocks
        .iter()
        .filter_map(|b| match &b.data {
            BlockData::Category(c) => Some((b.name.as_str(), c)),
            _ => None,
        })
        .collect();
    let complexes: BTreeSet<&str> = doc
        .blocks
        .iter()
        .filter_map(|b| match &b.data {
            BlockData::Complex(_) => Some(b.name.as_str()),
            _ => None,
        })
        .collect();
    for b in &doc.blocks {
        match &b.data {
            BlockData::Waldhausen(w) => {
                let Some(cat) = categories.get(w.category.as_str()) else {
                    return err(b.line, format!("undefined category {}", w.category));
                };
                if !cat.objects.contains(&w.zero) {
                    return err(b.line, format!("undefined zero object {}", w.zero));
                }
                for m in w.cof.iter().chain(&w.we) {
                    if !cat.known_morphism(m) {
                        return err(b.line, format!("undefined morphism {m}"));
                    }
                }
            }
            BlockData::Branes(br) => {
                if !complexes.contains(br.complex.as_str()) {
                    return err(b.line, format!("undefined complex {}", br.complex));
                }
                for (id, _, region) in &br.branes {
                    if !complexes.contains(region.as_str()) {
                        return err(
                            b.line,
                            format!("brane {id} references undefined complex {region}"),
                        );
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------

impl Document {
    /// Canonical text form; reparsing it yields an equal document.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let _ = writeln!(out, "begin {} {}", b.data.kind(), b.name);
            match &b.data {
                BlockData::Category(c) => {
                    for o in &c.objects {
                        let _ = writeln!(out, "object {o}");
                    }
                    for (n, s, t) in &c.morphisms {
                        let _ = writeln!(out, "morphism {n} {s} {t}");
                    }
                    for (o, m) in &c.identities {
                        let _ = writeln!(out, "identity {o} {m}");
                    }
                    for (g, f, h) in &c.composes {
                        let _ = writeln!(out, "compose {g} {f} = {h}");
                    }
                }
                BlockData::Exact(e) => {
                    let _ = writeln!(out, "ring {}", e.ring);
                    if let Some(r) = e.full_maxrank {
                        let _ = writeln!(out, "full maxrank {r}");
                    }
                    if e.sigma_full {
                        let _ = writeln!(out, "sigma full");
                    }
                    for (n, rank, rels) in &e.objects {
                        if rels.is_empty() {
                            let _ = writeln!(out, "object {n} rank {rank}");
                        } else {
                            let flat: Vec<String> = rels
                                .iter()
                                .flat_map(|col| col.iter().map(|x| x.to_string()))
                                .collect();
                            let _ = writeln!(
                                out,
                                "object {n} rank {rank} relations {} {}",
                                rels.len(),
                                flat.join(" ")
                            );
                        }
                    }
                    for (n, s, t, m) in &e.morphisms {
                        let flat: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                        let _ = writeln!(out, "morphism {n} {s} {t} {}", flat.join(" "));
                    }
                    for s in &e.seqs {
                        let _ = writeln!(
                            out,
                            "seq {} {} {} {} {}",
                            s.names[0], s.names[1], s.names[2], s.names[3], s.names[4]
                        );
                    }
                }
                BlockData::Waldhausen(w) => {
                    let _ = writeln!(out, "category {}", w.category);
                    let _ = writeln!(out, "zero {}", w.zero);
                    for c in &w.cof {
                        let _ = writeln!(out, "cof {c}");
                    }
                    for m in &w.we {
                        let _ = writeln!(out, "we {m}");
                    }
                }
                BlockData::Complex(c) => {
                    for s in &c.simplices {
                        let verts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                        let _ = writeln!(out, "simplex {}", verts.join(" "));
                    }
                    for ch in &c.cochains {
                        let _ = writeln!(out, "cochain {} degree {}", ch.name, ch.degree);
                        for (v, x) in &ch.values {
                            let verts: Vec<String> = v.iter().map(|v| v.to_string()).collect();
                            let _ = writeln!(out, "value {} {} {x}", ch.name, verts.join(" "));
                        }
                    }
                }
                BlockData::Field(f) => {
                    let _ = writeln!(
                        out,
                        "extent {} {} {} {}",
                        f.extents[0], f.extents[1], f.extents[2], f.extents[3]
                    );
                    for (n, x) in &f.regions {
                        let _ = writeln!(out, "region {n} {} {} {} {}", x[0], x[1], x[2], x[3]);
                    }
                    for (x, v) in &f.sites {
                        let _ = writeln!(
                            out,
                            "site {} {} {} {} value {v}",
                            x[0], x[1], x[2], x[3]
                        );
                    }
                }
                BlockData::Branes(br) => {
                    let _ = writeln!(out, "complex {}", br.complex);
                    for (id, stack, region) in &br.branes {
                        let _ = writeln!(out, "brane {id} stack {stack} region {region}");
                    }
                    for (id, a, bb) in &br.strings {
                        let _ = writeln!(out, "string {id} {a} {bb}");
                    }
                }
                BlockData::Pndp(p) => {
                    for (id, b1, b2, fiber, rank) in &p.specs {
                        let _ = writeln!(out, "pndp {id} b1 {b1} b2 {b2} fiber {fiber} rank {rank}");
                    }
                }
            }
            let _ = writeln!(out, "end");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_empty_document() {
        let doc = parse_document("").unwrap();
        assert!(doc.blocks.is_empty());
        assert_eq!(doc.canonical_text(), "");
    }

    #[test]
    fn one_object_category() {
        let doc = parse_document("begin category C\nobject A\nend\n").unwrap();
        assert_eq!(doc.blocks.len(), 1);
        assert_eq!(doc.blocks[0].data.kind(), "category");
    }

    #[test]
    fn undefined_object_names_the_line() {
        let e = parse_document("begin category C\nobject A\nmorphism f A B\nend\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains('B'));
    }

    #[test]
    fn duplicate_block_names_rejected() {
        let text = "begin category C\nend\nbegin complex C\nend\n";
        let e = parse_document(text).unwrap_err();
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn unknown_kind_rejected() {
        let e = parse_document("begin widget W\nend\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("widget"));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let text = "# header\n\nbegin category C # trailing\nobject A\n\nend\n";
        assert!(parse_document(text).is_ok());
    }

    #[test]
    fn round_trip_is_stable() {
        let text = "\
begin category C
object A
object B
morphism f A B
compose id_B f = f
end
begin complex K
simplex 0 1
simplex 1 2
simplex 0 2
cochain omega degree 1
value omega 0 1 1
end
begin pndp P
pndp p1 b1 1 b2 1 fiber 2 rank 4
end
";
        let doc = parse_document(text).unwrap();
        let canon = doc.canonical_text();
        let doc2 = parse_document(&canon).unwrap();
        assert_eq!(canon, doc2.canonical_text());
    }

    #[test]
    fn waldhausen_reference_checking() {
        let text = "begin waldhausen W\ncategory C\nzero A\nend\n";
        let e = parse_document(text).unwrap_err();
        assert!(e.message.contains("undefined category"));
    }

    #[test]
    fn cochain_value_must_be_in_complex() {
        let text = "\
begin complex K
simplex 0 1
cochain t degree 1
value t 3 4 1
end
";
        let e = parse_document(text).unwrap_err();
        assert!(e.message.contains("not in the complex"));
    }

    #[test]
    fn parser_is_total_on_token_soup() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let vocab = [
            "begin", "end", "category", "exact", "complex", "field", "branes", "pndp",
            "waldhausen", "object", "morphism", "simplex", "value", "cochain", "seq", "ring",
            "z", "zmod:2", "site", "region", "extent", "brane", "string", "stack", "rank",
            "b1", "b2", "fiber", "compose", "=", "#", "0", "1", "2", "17", "-3", "x", "A",
        ];
        for _ in 0..300 {
            let len = rng.gen_range(0..60);
            let mut text = String::new();
            for _ in 0..len {
                text.push_str(vocab[rng.gen_range(0..vocab.len())]);
                if rng.gen_bool(0.3) {
                    text.push('\n');
                } else {
                    text.push(' ');
                }
            }
            // must never panic: either a document or a diagnostic
            let _ = parse_document(&text);
        }
    }
}
