//! Finite categories with explicit composition tables, diagrams over
//! them, commutativity checking, and pushouts verified against the
//! universal property by exhaustive enumeration.
//!
//! Everything here is pure and deterministic: objects and morphisms are
//! indices into the category's tables, and every enumeration walks them
//! in index order.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::report::ValidationReport;

/// Index of an object in its [`FinCategory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjId(pub usize);

/// Index of a morphism in its [`FinCategory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorId(pub usize);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

impl fmt::Display for MorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub src: ObjId,
    pub tgt: ObjId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("morphisms {f} and {g} are not composable")]
    NonComposable { f: String, g: String },
    #[error("no pushout: {0}")]
    PushoutMissing(String),
}

/// A finite category: objects, morphisms, identity assignment, and a
/// partial composition table keyed by `(g, f)` for `g ∘ f`.
///
/// Construction only checks index bounds and name uniqueness; the
/// category laws themselves are the business of
/// [`check_category_axioms`], which must be able to report violations on
/// deliberately broken tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    /// Dense table: `table[g * n_mor + f]` is `g ∘ f`, `u32::MAX` if absent.
    table: Vec<u32>,
}

const NO_ENTRY: u32 = u32::MAX;

impl FinCategory {
    /// Assemble a category from raw parts.
    ///
    /// `composition` lists `(g, f, h)` entries meaning `g ∘ f = h`.
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<MorId>,
        composition: &[(MorId, MorId, MorId)],
    ) -> Result<Self, CatError> {
        let n_obj = objects.len();
        let n_mor = morphisms.len();
        {
            let mut seen = std::collections::BTreeSet::new();
            for name in &objects {
                if !seen.insert(name) {
                    return Err(CatError::Structural(format!("duplicate object {name}")));
                }
            }
            let mut seen = std::collections::BTreeSet::new();
            for m in &morphisms {
                if !seen.insert(&m.name) {
                    return Err(CatError::Structural(format!("duplicate morphism {}", m.name)));
                }
                if m.src.0 >= n_obj || m.tgt.0 >= n_obj {
                    return Err(CatError::Structural(format!(
                        "morphism {} references missing object",
                        m.name
                    )));
                }
            }
        }
        if identities.len() != n_obj {
            return Err(CatError::Structural(
                "identity assignment must cover every object".into(),
            ));
        }
        for (o, id) in identities.iter().enumerate() {
            if id.0 >= n_mor {
                return Err(CatError::Structural(format!(
                    "identity of {} references missing morphism",
                    objects[o]
                )));
            }
        }
        let mut table = vec![NO_ENTRY; n_mor * n_mor];
        for &(g, f, h) in composition {
            if g.0 >= n_mor || f.0 >= n_mor || h.0 >= n_mor {
                return Err(CatError::Structural(
                    "composition entry references missing morphism".into(),
                ));
            }
            table[g.0 * n_mor + f.0] = h.0 as u32;
        }
        Ok(FinCategory {
            objects,
            morphisms,
            identities,
            table,
        })
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn morphism_count(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjId> {
        (0..self.objects.len()).map(ObjId)
    }

    pub fn morphisms(&self) -> impl Iterator<Item = MorId> {
        (0..self.morphisms.len()).map(MorId)
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o.0]
    }

    pub fn morphism(&self, m: MorId) -> &Morphism {
        &self.morphisms[m.0]
    }

    pub fn morphism_name(&self, m: MorId) -> &str {
        &self.morphisms[m.0].name
    }

    pub fn src(&self, m: MorId) -> ObjId {
        self.morphisms[m.0].src
    }

    pub fn tgt(&self, m: MorId) -> ObjId {
        self.morphisms[m.0].tgt
    }

    pub fn identity(&self, o: ObjId) -> MorId {
        self.identities[o.0]
    }

    pub fn object_by_name(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|n| n == name).map(ObjId)
    }

    pub fn morphism_by_name(&self, name: &str) -> Option<MorId> {
        self.morphisms.iter().position(|m| m.name == name).map(MorId)
    }

    /// Raw table lookup for `g ∘ f`, without composability checks.
    pub fn table_entry(&self, g: MorId, f: MorId) -> Option<MorId> {
        let e = self.table[g.0 * self.morphisms.len() + f.0];
        (e != NO_ENTRY).then_some(MorId(e as usize))
    }

    pub fn composable(&self, f: MorId, g: MorId) -> bool {
        self.tgt(f) == self.src(g)
    }

    /// Morphisms from `a` to `b`, in index order.
    pub fn hom(&self, a: ObjId, b: ObjId) -> Vec<MorId> {
        self.morphisms()
            .filter(|&m| self.src(m) == a && self.tgt(m) == b)
            .collect()
    }

    /// Is `f` invertible in the declared category?
    pub fn is_iso(&self, f: MorId) -> bool {
        self.inverse(f).is_some()
    }

    pub fn inverse(&self, f: MorId) -> Option<MorId> {
        let (a, b) = (self.src(f), self.tgt(f));
        self.hom(b, a).into_iter().find(|&g| {
            self.table_entry(g, f) == Some(self.identity(a))
                && self.table_entry(f, g) == Some(self.identity(b))
        })
    }

    pub fn isomorphisms(&self) -> Vec<MorId> {
        self.morphisms().filter(|&m| self.is_iso(m)).collect()
    }
}

/// Composition `g ∘ f` (first `f`, then `g`).
pub fn compose(cat: &FinCategory, f: MorId, g: MorId) -> Result<MorId, CatError> {
    if !cat.composable(f, g) {
        return Err(CatError::NonComposable {
            f: cat.morphism_name(f).to_string(),
            g: cat.morphism_name(g).to_string(),
        });
    }
    cat.table_entry(g, f).ok_or_else(|| {
        CatError::Structural(format!(
            "composition table has no entry for {} ∘ {}",
            cat.morphism_name(g),
            cat.morphism_name(f)
        ))
    })
}

/// Check identity laws, associativity, totality and closure of the
/// composition table. Every violated law is reported with a witness;
/// an empty report means the data is a category.
pub fn check_category_axioms(cat: &FinCategory) -> Result<ValidationReport, CatError> {
    let mut report = ValidationReport::new();
    let n = cat.morphism_count();

    // entries on non-composable pairs are malformed input, not a law violation
    for g in cat.morphisms() {
        for f in cat.morphisms() {
            if cat.table_entry(g, f).is_some() && !cat.composable(f, g) {
                return Err(CatError::Structural(format!(
                    "table entry for non-composable pair ({}, {})",
                    cat.morphism_name(g),
                    cat.morphism_name(f)
                )));
            }
        }
    }

    // identities have the right endpoints
    for o in cat.objects() {
        let id = cat.identity(o);
        if cat.src(id) != o || cat.tgt(id) != o {
            report.push(
                "identity-endpoints",
                format!(
                    "identity of {} is {}: {} -> {}",
                    cat.object_name(o),
                    cat.morphism_name(id),
                    cat.object_name(cat.src(id)),
                    cat.object_name(cat.tgt(id))
                ),
            );
        }
    }

    // totality and closure
    for f in cat.morphisms() {
        for g in cat.morphisms() {
            if !cat.composable(f, g) {
                continue;
            }
            match cat.table_entry(g, f) {
                None => report.push(
                    "composition-totality",
                    format!(
                        "no entry for {} ∘ {}",
                        cat.morphism_name(g),
                        cat.morphism_name(f)
                    ),
                ),
                Some(h) => {
                    if cat.src(h) != cat.src(f) || cat.tgt(h) != cat.tgt(g) {
                        report.push(
                            "composition-endpoints",
                            format!(
                                "{} ∘ {} = {} has wrong endpoints",
                                cat.morphism_name(g),
                                cat.morphism_name(f),
                                cat.morphism_name(h)
                            ),
                        );
                    }
                }
            }
        }
    }

    // identity laws
    for f in cat.morphisms() {
        let (a, b) = (cat.src(f), cat.tgt(f));
        if let Some(h) = cat.table_entry(cat.identity(b), f) {
            if h != f {
                report.push(
                    "identity-law",
                    format!(
                        "id_{} ∘ {} = {} ≠ {}",
                        cat.object_name(b),
                        cat.morphism_name(f),
                        cat.morphism_name(h),
                        cat.morphism_name(f)
                    ),
                );
            }
        }
        if let Some(h) = cat.table_entry(f, cat.identity(a)) {
            if h != f {
                report.push(
                    "identity-law",
                    format!(
                        "{} ∘ id_{} = {} ≠ {}",
                        cat.morphism_name(f),
                        cat.object_name(a),
                        cat.morphism_name(h),
                        cat.morphism_name(f)
                    ),
                );
            }
        }
    }

    // associativity over every composable triple
    for f in 0..n {
        let f = MorId(f);
        for g in cat.morphisms() {
            if !cat.composable(f, g) {
                continue;
            }
            let Some(gf) = cat.table_entry(g, f) else { continue };
            for h in cat.morphisms() {
                if !cat.composable(g, h) {
                    continue;
                }
                let Some(hg) = cat.table_entry(h, g) else { continue };
                let left = cat.table_entry(h, gf);
                let right = cat.table_entry(hg, f);
                if let (Some(l), Some(r)) = (left, right) {
                    if l != r {
                        report.push(
                            "associativity",
                            format!(
                                "({} ∘ {}) ∘ {} = {} but {} ∘ ({} ∘ {}) = {}",
                                cat.morphism_name(h),
                                cat.morphism_name(g),
                                cat.morphism_name(f),
                                cat.morphism_name(r),
                                cat.morphism_name(h),
                                cat.morphism_name(g),
                                cat.morphism_name(f),
                                cat.morphism_name(l)
                            ),
                        );
                    }
                }
            }
        }
    }

    Ok(report)
}

/// A finite diagram: nodes labelled by objects, directed edges labelled
/// by morphisms of the host category (passed separately to each check).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub nodes: Vec<ObjId>,
    /// `(from_node, to_node, label)`
    pub edges: Vec<(usize, usize, MorId)>,
}

impl Diagram {
    pub fn new(nodes: Vec<ObjId>, edges: Vec<(usize, usize, MorId)>) -> Self {
        Diagram { nodes, edges }
    }

    /// Every edge's morphism must run between its endpoint labels.
    pub fn validate(&self, cat: &FinCategory) -> Result<(), CatError> {
        for &(a, b, m) in &self.edges {
            if a >= self.nodes.len() || b >= self.nodes.len() {
                return Err(CatError::Structural(format!(
                    "edge ({a},{b}) references missing node"
                )));
            }
            if m.0 >= cat.morphism_count() {
                return Err(CatError::Structural(format!(
                    "edge ({a},{b}) carries a missing morphism label"
                )));
            }
            if cat.src(m) != self.nodes[a] || cat.tgt(m) != self.nodes[b] {
                return Err(CatError::Structural(format!(
                    "edge ({a},{b}) labelled {} does not match its endpoints",
                    cat.morphism_name(m)
                )));
            }
        }
        Ok(())
    }
}

/// Result of a commutativity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutativityReport {
    pub commutes: bool,
    /// `(from_node, to_node, composite_a, composite_b)` for the first
    /// node pair with two distinct path composites.
    pub counterexample: Option<(usize, usize, MorId, MorId)>,
}

/// Does every pair of directed paths between the same nodes compose to
/// the same morphism?
///
/// Computed as a Kleene closure over path composites: for a finite
/// category the set of composites between two nodes stabilizes, so this
/// agrees with literal path enumeration (and stays total on diagrams
/// with directed cycles).
pub fn check_commutes(cat: &FinCategory, d: &Diagram) -> Result<CommutativityReport, CatError> {
    d.validate(cat)?;
    let n = d.nodes.len();
    // composites[a][b] = set of path composites from node a to node b
    let mut composites: Vec<Vec<std::collections::BTreeSet<MorId>>> =
        vec![vec![Default::default(); n]; n];
    for &(a, b, m) in &d.edges {
        composites[a][b].insert(m);
    }
    loop {
        let mut grew = false;
        for &(b, c, m) in &d.edges {
            for a in 0..n {
                let extend: Vec<MorId> = composites[a][b]
                    .iter()
                    .filter_map(|&f| cat.table_entry(m, f))
                    .collect();
                for h in extend {
                    grew |= composites[a][c].insert(h);
                }
            }
        }
        if !grew {
            break;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if composites[a][b].len() > 1 {
                let mut it = composites[a][b].iter();
                let x = *it.next().unwrap();
                let y = *it.next().unwrap();
                return Ok(CommutativityReport {
                    commutes: false,
                    counterexample: Some((a, b, x, y)),
                });
            }
        }
    }
    Ok(CommutativityReport {
        commutes: true,
        counterexample: None,
    })
}

/// A cocone over a span, i.e. a candidate pushout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cocone {
    pub object: ObjId,
    /// Leg from the span's first target.
    pub leg_a: MorId,
    /// Leg from the span's second target.
    pub leg_b: MorId,
}

/// Pushout of a span `f: X -> A`, `g: X -> B`, verified to satisfy the
/// universal property against every cocone in the category.
///
/// Enumeration follows index order, so the returned cocone is canonical.
pub fn pushout(cat: &FinCategory, f: MorId, g: MorId) -> Result<Cocone, CatError> {
    if cat.src(f) != cat.src(g) {
        return Err(CatError::Structural(
            "span legs must share their source".into(),
        ));
    }
    let (a, b) = (cat.tgt(f), cat.tgt(g));

    let cocones: Vec<Cocone> = cat
        .objects()
        .flat_map(|p| {
            let legs_a = cat.hom(a, p);
            let legs_b = cat.hom(b, p);
            let mut out = Vec::new();
            for &pa in &legs_a {
                for &pb in &legs_b {
                    if cat.table_entry(pa, f) == cat.table_entry(pb, g)
                        && cat.table_entry(pa, f).is_some()
                    {
                        out.push(Cocone {
                            object: p,
                            leg_a: pa,
                            leg_b: pb,
                        });
                    }
                }
            }
            out
        })
        .collect();

    if cocones.is_empty() {
        return Err(CatError::PushoutMissing(format!(
            "no cocone over span ({}, {})",
            cat.morphism_name(f),
            cat.morphism_name(g)
        )));
    }

    'candidates: for cand in &cocones {
        for other in &cocones {
            let mut mediating = 0usize;
            for u in cat.hom(cand.object, other.object) {
                if cat.table_entry(u, cand.leg_a) == Some(other.leg_a)
                    && cat.table_entry(u, cand.leg_b) == Some(other.leg_b)
                {
                    mediating += 1;
                }
            }
            if mediating != 1 {
                continue 'candidates;
            }
        }
        return Ok(*cand);
    }

    Err(CatError::PushoutMissing(format!(
        "cocones over span ({}, {}) exist but none is universal",
        cat.morphism_name(f),
        cat.morphism_name(g)
    )))
}

/// All universal cocones over a span (used to test uniqueness up to
/// isomorphism).
pub fn all_pushouts(cat: &FinCategory, f: MorId, g: MorId) -> Vec<Cocone> {
    let Ok(first) = pushout(cat, f, g) else {
        return Vec::new();
    };
    let (a, b) = (cat.tgt(f), cat.tgt(g));
    let mut cocones = Vec::new();
    for p in cat.objects() {
        for pa in cat.hom(a, p) {
            for pb in cat.hom(b, p) {
                if cat.table_entry(pa, f) == cat.table_entry(pb, g)
                    && cat.table_entry(pa, f).is_some()
                {
                    cocones.push(Cocone {
                        object: p,
                        leg_a: pa,
                        leg_b: pb,
                    });
                }
            }
        }
    }
    let universal: Vec<Cocone> = cocones
        .iter()
        .filter(|cand| {
            cocones.iter().all(|other| {
                cat.hom(cand.object, other.object)
                    .into_iter()
                    .filter(|&u| {
                        cat.table_entry(u, cand.leg_a) == Some(other.leg_a)
                            && cat.table_entry(u, cand.leg_b) == Some(other.leg_b)
                    })
                    .count()
                    == 1
            })
        })
        .copied()
        .collect();
    debug_assert!(universal.contains(&first));
    universal
}

/// A functor between finite categories: object and morphism index maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub object_map: Vec<ObjId>,
    pub morphism_map: Vec<MorId>,
}

impl Functor {
    pub fn identity(cat: &FinCategory) -> Self {
        Functor {
            object_map: cat.objects().collect(),
            morphism_map: cat.morphisms().collect(),
        }
    }

    pub fn on_obj(&self, o: ObjId) -> ObjId {
        self.object_map[o.0]
    }

    pub fn on_mor(&self, m: MorId) -> MorId {
        self.morphism_map[m.0]
    }

    /// Functor laws: endpoint, identity, and composition preservation.
    pub fn validate(&self, src: &FinCategory, tgt: &FinCategory) -> ValidationReport {
        let mut report = ValidationReport::new();
        if self.object_map.len() != src.object_count()
            || self.morphism_map.len() != src.morphism_count()
        {
            report.push("functor-shape", "maps must cover the source category");
            return report;
        }
        if self.object_map.iter().any(|o| o.0 >= tgt.object_count())
            || self.morphism_map.iter().any(|m| m.0 >= tgt.morphism_count())
        {
            report.push("functor-shape", "maps must land in the target category");
            return report;
        }
        for m in src.morphisms() {
            let fm = self.on_mor(m);
            if tgt.src(fm) != self.on_obj(src.src(m)) || tgt.tgt(fm) != self.on_obj(src.tgt(m)) {
                report.push(
                    "functor-endpoints",
                    format!("image of {} has wrong endpoints", src.morphism_name(m)),
                );
            }
        }
        for o in src.objects() {
            if self.on_mor(src.identity(o)) != tgt.identity(self.on_obj(o)) {
                report.push(
                    "functor-identity",
                    format!("identity of {} not preserved", src.object_name(o)),
                );
            }
        }
        for f in src.morphisms() {
            for g in src.morphisms() {
                if !src.composable(f, g) {
                    continue;
                }
                let Some(gf) = src.table_entry(g, f) else { continue };
                let expect = tgt.table_entry(self.on_mor(g), self.on_mor(f));
                if expect != Some(self.on_mor(gf)) {
                    report.push(
                        "functor-composition",
                        format!(
                            "F({} ∘ {}) ≠ F({}) ∘ F({})",
                            src.morphism_name(g),
                            src.morphism_name(f),
                            src.morphism_name(g),
                            src.morphism_name(f)
                        ),
                    );
                }
            }
        }
        report
    }
}

/// Convenience builder for small hand-written categories. Identities and
/// identity-law composites are synthesized; other composites are given
/// explicitly by name.
pub struct CategoryBuilder {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    compositions: Vec<(String, String, String)>,
}

impl Default for CategoryBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl CategoryBuilder {
    pub fn new() -> Self {
        CategoryBuilder {
            objects: Vec::new(),
            morphisms: Vec::new(),
            compositions: Vec::new(),
        }
    }

    pub fn object(mut self, name: &str) -> Self {
        self.objects.push(name.to_string());
        self
    }

    pub fn morphism(mut self, name: &str, src: &str, tgt: &str) -> Self {
        let si = self.objects.iter().position(|o| o == src).expect("src");
        let ti = self.objects.iter().position(|o| o == tgt).expect("tgt");
        self.morphisms.push(Morphism {
            name: name.to_string(),
            src: ObjId(si),
            tgt: ObjId(ti),
        });
        self
    }

    /// Record `g ∘ f = h`.
    pub fn compose(mut self, g: &str, f: &str, h: &str) -> Self {
        self.compositions
            .push((g.to_string(), f.to_string(), h.to_string()));
        self
    }

    pub fn build(mut self) -> Result<FinCategory, CatError> {
        let mut identities = Vec::new();
        for (oi, name) in self.objects.iter().enumerate() {
            let id_name = format!("id_{name}");
            let idx = match self.morphisms.iter().position(|m| m.name == id_name) {
                Some(i) => i,
                None => {
                    self.morphisms.push(Morphism {
                        name: id_name,
                        src: ObjId(oi),
                        tgt: ObjId(oi),
                    });
                    self.morphisms.len() - 1
                }
            };
            identities.push(MorId(idx));
        }
        let by_name: BTreeMap<String, MorId> = self
            .morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.clone(), MorId(i)))
            .collect();
        let mut comp = Vec::new();
        // identity laws fill the table first; explicit entries may override
        for (i, m) in self.morphisms.iter().enumerate() {
            let f = MorId(i);
            comp.push((identities[m.tgt.0], f, f));
            comp.push((f, identities[m.src.0], f));
        }
        for (g, f, h) in &self.compositions {
            let lookup = |n: &String| {
                by_name
                    .get(n)
                    .copied()
                    .ok_or_else(|| CatError::Structural(format!("unknown morphism {n}")))
            };
            comp.push((lookup(g)?, lookup(f)?, lookup(h)?));
        }
        FinCategory::new(self.objects, self.morphisms, identities, &comp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Poset chain 0 -> 1 -> 2 with the unique composite.
    fn chain3() -> FinCategory {
        CategoryBuilder::new()
            .object("0")
            .object("1")
            .object("2")
            .morphism("f01", "0", "1")
            .morphism("f12", "1", "2")
            .morphism("f02", "0", "2")
            .compose("f12", "f01", "f02")
            .build()
            .unwrap()
    }

    #[test]
    fn terminal_category_passes() {
        let cat = CategoryBuilder::new().object("*").build().unwrap();
        assert!(check_category_axioms(&cat).unwrap().is_ok());
    }

    #[test]
    fn chain_passes() {
        assert!(check_category_axioms(&chain3()).unwrap().is_ok());
    }

    #[test]
    fn compose_identity_and_chain() {
        let cat = chain3();
        let f01 = cat.morphism_by_name("f01").unwrap();
        let f12 = cat.morphism_by_name("f12").unwrap();
        let f02 = cat.morphism_by_name("f02").unwrap();
        let id0 = cat.identity(ObjId(0));
        assert_eq!(compose(&cat, id0, f01).unwrap(), f01);
        assert_eq!(compose(&cat, f01, f12).unwrap(), f02);
        // two parallel arrows 0 -> 1 do not compose
        assert!(matches!(
            compose(&cat, f01, f01),
            Err(CatError::NonComposable { .. })
        ));
    }

    #[test]
    fn broken_associativity_reported_with_witness() {
        // one object, three non-identity endomorphisms with a deliberately
        // non-associative table
        let cat = CategoryBuilder::new()
            .object("x")
            .morphism("a", "x", "x")
            .morphism("b", "x", "x")
            .morphism("c", "x", "x")
            // a∘a = b, b∘a = c, a∘b = a: then (a∘a)∘a = b∘a = c
            // but a∘(a∘a) = a∘b = a.
            .compose("a", "a", "b")
            .compose("b", "a", "c")
            .compose("a", "b", "a")
            .compose("c", "a", "a")
            .compose("a", "c", "a")
            .compose("b", "b", "a")
            .compose("c", "b", "a")
            .compose("b", "c", "a")
            .compose("c", "c", "a")
            .build()
            .unwrap();
        let report = check_category_axioms(&cat).unwrap();
        assert!(!report.is_ok());
        assert!(report.of_rule("associativity").count() > 0);
        let w = &report.of_rule("associativity").next().unwrap().witness;
        assert!(w.contains('a'), "witness names the triple: {w}");
    }

    #[test]
    fn malformed_table_is_structural() {
        let cat = FinCategory::new(
            vec!["x".into(), "y".into()],
            vec![
                Morphism {
                    name: "id_x".into(),
                    src: ObjId(0),
                    tgt: ObjId(0),
                },
                Morphism {
                    name: "id_y".into(),
                    src: ObjId(1),
                    tgt: ObjId(1),
                },
                Morphism {
                    name: "f".into(),
                    src: ObjId(0),
                    tgt: ObjId(1),
                },
            ],
            vec![MorId(0), MorId(1)],
            // entry for (id_x, f): not composable since f: x -> y
            &[(MorId(0), MorId(2), MorId(2))],
        )
        .unwrap();
        assert!(matches!(
            check_category_axioms(&cat),
            Err(CatError::Structural(_))
        ));
    }

    #[test]
    fn square_of_identities_commutes() {
        let cat = CategoryBuilder::new().object("x").build().unwrap();
        let id = cat.identity(ObjId(0));
        let d = Diagram::new(
            vec![ObjId(0); 4],
            vec![(0, 1, id), (0, 2, id), (1, 3, id), (2, 3, id)],
        );
        assert!(check_commutes(&cat, &d).unwrap().commutes);
    }

    #[test]
    fn parallel_generators_fail() {
        let cat = CategoryBuilder::new()
            .object("a")
            .object("b")
            .morphism("f", "a", "b")
            .morphism("g", "a", "b")
            .build()
            .unwrap();
        let f = cat.morphism_by_name("f").unwrap();
        let g = cat.morphism_by_name("g").unwrap();
        let d = Diagram::new(vec![ObjId(0), ObjId(1)], vec![(0, 1, f), (0, 1, g)]);
        let r = check_commutes(&cat, &d).unwrap();
        assert!(!r.commutes);
        let (a, b, x, y) = r.counterexample.unwrap();
        assert_eq!((a, b), (0, 1));
        assert_ne!(x, y);
    }

    #[test]
    fn unlabeled_edge_is_structural() {
        let cat = chain3();
        let d = Diagram::new(vec![ObjId(0), ObjId(1)], vec![(0, 1, MorId(999))]);
        assert!(matches!(check_commutes(&cat, &d), Err(CatError::Structural(_))));
    }

    /// Brute-force path enumeration on an acyclic diagram: all directed
    /// paths, composed literally.
    fn paths_brute(cat: &FinCategory, d: &Diagram) -> bool {
        use std::collections::BTreeSet;
        let n = d.nodes.len();
        let mut table: Vec<Vec<BTreeSet<MorId>>> = vec![vec![Default::default(); n]; n];
        fn dfs(
            cat: &FinCategory,
            d: &Diagram,
            start: usize,
            at: usize,
            acc: Option<MorId>,
            table: &mut Vec<Vec<BTreeSet<MorId>>>,
            depth: usize,
        ) {
            if depth > d.edges.len() {
                return;
            }
            for &(a, b, m) in &d.edges {
                if a != at {
                    continue;
                }
                let comp = match acc {
                    None => Some(m),
                    Some(f) => cat.table_entry(m, f),
                };
                if let Some(c) = comp {
                    table[start][b].insert(c);
                    dfs(cat, d, start, b, Some(c), table, depth + 1);
                }
            }
        }
        for s in 0..n {
            dfs(cat, d, s, s, None, &mut table, 0);
        }
        table
            .iter()
            .all(|row| row.iter().all(|cell| cell.len() <= 1))
    }

    #[test]
    fn closure_matches_brute_force_on_small_diagrams() {
        let cat = chain3();
        let f01 = cat.morphism_by_name("f01").unwrap();
        let f12 = cat.morphism_by_name("f12").unwrap();
        let f02 = cat.morphism_by_name("f02").unwrap();
        let cases = vec![
            Diagram::new(
                vec![ObjId(0), ObjId(1), ObjId(2)],
                vec![(0, 1, f01), (1, 2, f12), (0, 2, f02)],
            ),
            Diagram::new(vec![ObjId(0), ObjId(2)], vec![(0, 1, f02)]),
            Diagram::new(
                vec![ObjId(0), ObjId(1), ObjId(1), ObjId(2)],
                vec![(0, 1, f01), (0, 2, f01), (1, 3, f12), (2, 3, f12)],
            ),
        ];
        for d in cases {
            assert_eq!(
                check_commutes(&cat, &d).unwrap().commutes,
                paths_brute(&cat, &d),
            );
        }
    }

    #[test]
    fn pushout_of_identities_is_the_point() {
        let cat = CategoryBuilder::new().object("pt").build().unwrap();
        let id = cat.identity(ObjId(0));
        let p = pushout(&cat, id, id).unwrap();
        assert_eq!(p.object, ObjId(0));
        assert_eq!(p.leg_a, id);
        assert_eq!(p.leg_b, id);
    }

    #[test]
    fn pushout_missing_in_discrete_pair() {
        // two objects, no connecting morphisms: the span (id_a, id_a) has
        // the cocone (a, id, id) and it is universal; but a span over a
        // category with no cocone at all must error. Use two parallel
        // arrows into nowhere: span f: x -> a, g: x -> b with no object
        // receiving both a and b.
        let cat = CategoryBuilder::new()
            .object("x")
            .object("a")
            .object("b")
            .morphism("f", "x", "a")
            .morphism("g", "x", "b")
            .build()
            .unwrap();
        let f = cat.morphism_by_name("f").unwrap();
        let g = cat.morphism_by_name("g").unwrap();
        assert!(matches!(
            pushout(&cat, f, g),
            Err(CatError::PushoutMissing(_))
        ));
    }

    #[test]
    fn pushout_unique_up_to_iso_in_poset() {
        // poset lattice x <= a, x <= b, a <= t, b <= t: pushout of a <- x -> b is t
        let cat = CategoryBuilder::new()
            .object("x")
            .object("a")
            .object("b")
            .object("t")
            .morphism("xa", "x", "a")
            .morphism("xb", "x", "b")
            .morphism("at", "a", "t")
            .morphism("bt", "b", "t")
            .morphism("xt", "x", "t")
            .compose("at", "xa", "xt")
            .compose("bt", "xb", "xt")
            .build()
            .unwrap();
        assert!(check_category_axioms(&cat).unwrap().is_ok());
        let xa = cat.morphism_by_name("xa").unwrap();
        let xb = cat.morphism_by_name("xb").unwrap();
        let p = pushout(&cat, xa, xb).unwrap();
        assert_eq!(cat.object_name(p.object), "t");
        let all = all_pushouts(&cat, xa, xb);
        // uniqueness up to isomorphism: comparison isos exist between any two
        for u in &all {
            for w in &all {
                assert!(cat
                    .hom(u.object, w.object)
                    .into_iter()
                    .any(|m| cat.is_iso(m)));
            }
        }
    }

    #[test]
    fn identity_functor_validates() {
        let cat = chain3();
        let f = Functor::identity(&cat);
        assert!(f.validate(&cat, &cat).is_ok());
    }
}
