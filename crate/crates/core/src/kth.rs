//! The K-theory engine: nerves of finite categories as truncated
//! simplicial sets, the staircase S-construction over a Waldhausen
//! structure, weak-equivalence subcategories, and the degree-0
//! K-invariant as a finitely presented abelian group.
//!
//! Topological realization is out of scope: the pipeline stops at the
//! truncated simplicial set and at K₀.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::cat::{self, Diagram, FinCategory, MorId, Morphism, ObjId};
use crate::exact::{check_exact_axioms, ExactError, ExactStructure, WaldHost, WaldhausenStructure};
use crate::matrix::{self, Mat};
use crate::report::ValidationReport;

pub use crate::matrix::{smith_normal_form, Smith};

#[derive(Debug, Error)]
pub enum KthError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Cat(#[from] cat::CatError),
    #[error("host fails its axioms:\n{0}")]
    AxiomsFail(ValidationReport),
    #[error("staircase quotient has no declared object: cokernel of {mono} is {cokernel}")]
    EnumerationIncomplete { mono: String, cokernel: String },
    #[error("induced staircase arrow not declared ({0})")]
    InducedArrowMissing(String),
    #[error("level {0} exceeds the desk-scale cap of 3")]
    LevelCap(usize),
}

// ---------------------------------------------------------------------
// Simplicial sets
// ---------------------------------------------------------------------

/// A simplicial set truncated at level `T`: simplex counts per level,
/// face maps `d_i` and degeneracy maps `s_i` as index tables.
///
/// `faces(m)[s][i]` is `d_i(s)` at level `m ≥ 1`; `degeneracies(m)[s][i]`
/// is `s_i(s)` landing in level `m + 1 ≤ T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialSet {
    truncation: usize,
    counts: Vec<usize>,
    faces: Vec<Vec<Vec<usize>>>,
    degeneracies: Vec<Vec<Vec<usize>>>,
    degenerate: Vec<Vec<bool>>,
}

impl SimplicialSet {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn count(&self, level: usize) -> usize {
        self.counts.get(level).copied().unwrap_or(0)
    }

    pub fn face(&self, level: usize, simplex: usize, i: usize) -> usize {
        self.faces[level - 1][simplex][i]
    }

    pub fn degeneracy(&self, level: usize, simplex: usize, i: usize) -> usize {
        self.degeneracies[level][simplex][i]
    }

    pub fn is_degenerate(&self, level: usize, simplex: usize) -> bool {
        self.degenerate[level][simplex]
    }

    pub fn nondegenerate_count(&self, level: usize) -> usize {
        self.degenerate[level].iter().filter(|d| !**d).count()
    }

    /// Exhaustive check of the simplicial identities on all stored
    /// levels.
    pub fn verify_identities(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let t = self.truncation;
        // d_i d_j = d_{j-1} d_i for i < j, on levels m >= 2
        for m in 2..=t {
            for s in 0..self.count(m) {
                for j in 1..=m {
                    for i in 0..j {
                        let a = self.face(m - 1, self.face(m, s, j), i);
                        let b = self.face(m - 1, self.face(m, s, i), j - 1);
                        if a != b {
                            report.push(
                                "face-face",
                                format!("level {m} simplex {s}: d_{i} d_{j} ≠ d_{} d_{i}", j - 1),
                            );
                        }
                    }
                }
            }
        }
        // s_i s_j = s_{j+1} s_i for i <= j, landing two levels up
        for m in 0..t.saturating_sub(1) {
            for s in 0..self.count(m) {
                for j in 0..=m {
                    for i in 0..=j {
                        let a = self.degeneracy(m + 1, self.degeneracy(m, s, j), i);
                        let b = self.degeneracy(m + 1, self.degeneracy(m, s, i), j + 1);
                        if a != b {
                            report.push(
                                "degeneracy-degeneracy",
                                format!("level {m} simplex {s}: s_{i} s_{j} ≠ s_{} s_{i}", j + 1),
                            );
                        }
                    }
                }
            }
        }
        // d_i s_j relations, faces of level m+1
        for m in 0..t {
            for s in 0..self.count(m) {
                for j in 0..=m {
                    let up = self.degeneracy(m, s, j);
                    for i in 0..=m + 1 {
                        let got = self.face(m + 1, up, i);
                        if i == j || i == j + 1 {
                            if got != s {
                                report.push(
                                    "face-degeneracy",
                                    format!("level {m} simplex {s}: d_{i} s_{j} ≠ id"),
                                );
                            }
                        } else if i < j {
                            // d_i s_j = s_{j-1} d_i needs level m >= 1
                            if m >= 1 {
                                let want = self.degeneracy(m - 1, self.face(m, s, i), j - 1);
                                if got != want {
                                    report.push(
                                        "face-degeneracy",
                                        format!("level {m} simplex {s}: d_{i} s_{j} ≠ s_{} d_{i}", j - 1),
                                    );
                                }
                            }
                        } else if m >= 1 {
                            // i > j + 1: d_i s_j = s_j d_{i-1}
                            let want = self.degeneracy(m - 1, self.face(m, s, i - 1), j);
                            if got != want {
                                report.push(
                                    "face-degeneracy",
                                    format!("level {m} simplex {s}: d_{i} s_{j} ≠ s_{j} d_{}", i - 1),
                                );
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

/// The nerve of a finite category, truncated at level `T`: level-`m`
/// simplices are chains of `m` composable morphisms, faces compose or
/// drop, degeneracies insert identities.
pub fn nerve(c: &FinCategory, truncation: usize) -> Result<SimplicialSet, KthError> {
    let axioms = cat::check_category_axioms(c)?;
    if !axioms.is_ok() {
        return Err(KthError::AxiomsFail(axioms));
    }

    // chains per level; a level-m chain is (f_1, ..., f_m) with
    // tgt(f_k) = src(f_{k+1}); level 0 holds the objects
    let mut chains: Vec<Vec<Vec<MorId>>> = Vec::new();
    let mut index: Vec<BTreeMap<Vec<MorId>, usize>> = Vec::new();
    chains.push(c.objects().map(|_| Vec::new()).collect());
    index.push(BTreeMap::new()); // level 0 indexed by object id directly
    for m in 1..=truncation {
        let mut level = Vec::new();
        let mut idx = BTreeMap::new();
        if m == 1 {
            for f in c.morphisms() {
                idx.insert(vec![f], level.len());
                level.push(vec![f]);
            }
        } else {
            for chain in &chains[m - 1] {
                let last_tgt = c.tgt(*chain.last().unwrap());
                for f in c.morphisms() {
                    if c.src(f) == last_tgt {
                        let mut next = chain.clone();
                        next.push(f);
                        idx.insert(next.clone(), level.len());
                        level.push(next);
                    }
                }
            }
        }
        chains.push(level);
        index.push(idx);
    }

    let chain_src = |chain: &[MorId]| c.src(chain[0]).0;
    let chain_tgt = |chain: &[MorId]| c.tgt(*chain.last().unwrap()).0;

    let mut faces = Vec::new();
    for m in 1..=truncation {
        let mut lvl = Vec::new();
        for chain in &chains[m] {
            let mut fs = Vec::with_capacity(m + 1);
            for i in 0..=m {
                if m == 1 {
                    // d_0 drops to the target object, d_1 to the source
                    fs.push(if i == 0 {
                        chain_tgt(chain)
                    } else {
                        chain_src(chain)
                    });
                } else if i == 0 {
                    fs.push(index[m - 1][&chain[1..].to_vec()]);
                } else if i == m {
                    fs.push(index[m - 1][&chain[..m - 1].to_vec()]);
                } else {
                    let mut shorter = chain[..i - 1].to_vec();
                    let composite = c
                        .table_entry(chain[i], chain[i - 1])
                        .expect("valid category");
                    shorter.push(composite);
                    shorter.extend_from_slice(&chain[i + 1..]);
                    fs.push(index[m - 1][&shorter]);
                }
            }
            lvl.push(fs);
        }
        faces.push(lvl);
    }

    let mut degeneracies = Vec::new();
    let mut degenerate: Vec<Vec<bool>> = chains
        .iter()
        .map(|lvl| vec![false; lvl.len()])
        .collect();
    for m in 0..truncation {
        let mut lvl = Vec::new();
        for (si, chain) in chains[m].iter().enumerate() {
            let mut ds = Vec::with_capacity(m + 1);
            for i in 0..=m {
                let target = if m == 0 {
                    vec![c.identity(ObjId(si))]
                } else {
                    // insert the identity of the object at position i
                    let at = if i == 0 {
                        c.src(chain[0])
                    } else {
                        c.tgt(chain[i - 1])
                    };
                    let mut next = chain[..i].to_vec();
                    next.push(c.identity(at));
                    next.extend_from_slice(&chain[i..]);
                    next
                };
                let ti = index[m + 1][&target];
                degenerate[m + 1][ti] = true;
                ds.push(ti);
            }
            lvl.push(ds);
        }
        degeneracies.push(lvl);
    }

    Ok(SimplicialSet {
        truncation,
        counts: chains.iter().map(Vec::len).collect(),
        faces,
        degeneracies,
        degenerate,
    })
}

// ---------------------------------------------------------------------
// The S-construction
// ---------------------------------------------------------------------

/// One staircase diagram: objects `A_{ij}` for `0 ≤ i ≤ j ≤ n` with
/// `A_{ii} = 0`, horizontal cofibrations `(i,j) -> (i,j+1)` and vertical
/// quotient maps `(i,j) -> (i+1,j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Staircase {
    pub n: usize,
    pub objects: BTreeMap<(usize, usize), ObjId>,
    pub horizontal: BTreeMap<(usize, usize), MorId>,
    pub vertical: BTreeMap<(usize, usize), MorId>,
    /// Chosen quotient maps `q_{ij}: A_{0j} -> A_{ij}`.
    pub quotient_maps: BTreeMap<(usize, usize), MorId>,
}

impl Staircase {
    /// The staircase as a diagram in the host category, for
    /// commutativity checks.
    pub fn diagram(&self) -> Diagram {
        let positions: Vec<(usize, usize)> = self.objects.keys().copied().collect();
        let node_of = |p: &(usize, usize)| positions.iter().position(|q| q == p).unwrap();
        let nodes = positions.iter().map(|p| self.objects[p]).collect();
        let mut edges = Vec::new();
        for (&(i, j), &m) in &self.horizontal {
            edges.push((node_of(&(i, j)), node_of(&(i, j + 1)), m));
        }
        for (&(i, j), &m) in &self.vertical {
            edges.push((node_of(&(i, j)), node_of(&(i + 1, j)), m));
        }
        Diagram::new(nodes, edges)
    }
}

/// A staircase map: one component per grid position, commuting with the
/// staircase arrows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaircaseMap {
    pub src: usize,
    pub tgt: usize,
    pub components: BTreeMap<(usize, usize), MorId>,
}

/// The `n`-th S-construction level: all staircases over the Waldhausen
/// structure with their levelwise maps, assembled into a finite
/// category.
#[derive(Clone, Debug)]
pub struct SConstructionLevel {
    pub n: usize,
    pub staircases: Vec<Staircase>,
    pub maps: Vec<StaircaseMap>,
    /// The S-construction as a category: objects are staircases, in
    /// order; morphisms are the maps, in order.
    pub category: FinCategory,
}

fn positions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in i..=n {
            out.push((i, j));
        }
    }
    out
}

/// Enumerate all quotient data `(Q, q)` for a mono `c: A -> B`: declared
/// epimorphisms `q: B -> Q` completing `c` to a short exact sequence (on
/// matrix hosts), or cocones of the pushout of `c` along `A -> 0` (on
/// declared hosts).
fn quotient_candidates(
    host: WaldHost,
    zero: ObjId,
    c: MorId,
) -> Result<Vec<(ObjId, MorId)>, KthError> {
    let cat = host.cat();
    let b = cat.tgt(c);
    match host {
        WaldHost::Matrix(mc) => {
            let mut out = Vec::new();
            for q in cat.morphisms() {
                if cat.src(q) != b {
                    continue;
                }
                if crate::exact::is_exact_sequence(&mc.seq_data(c, q))? {
                    out.push((cat.tgt(q), q));
                }
            }
            Ok(out)
        }
        WaldHost::Declared(dc) => {
            let to_zero = cat.hom(cat.src(c), zero);
            if to_zero.len() != 1 {
                return Err(KthError::Structural(format!(
                    "no unique morphism {} -> {}",
                    cat.object_name(cat.src(c)),
                    cat.object_name(zero)
                )));
            }
            Ok(cat::all_pushouts(dc, c, to_zero[0])
                .into_iter()
                .map(|p| (p.object, p.leg_a))
                .collect())
        }
    }
}

/// Describe the cokernel of a mono for the enumeration-incomplete error.
fn cokernel_description(host: WaldHost, c: MorId) -> String {
    match host {
        WaldHost::Matrix(mc) => {
            let cat = mc.cat();
            let b = mc.presentation(cat.tgt(c));
            let rel = b.relations.hcat(mc.matrix(c));
            let pres = AbelianGroupPresentation {
                generators: b.rank,
                relations: rel,
            };
            match mc.ring() {
                matrix::RingTag::Int => pres.normal_form().to_string(),
                matrix::RingTag::Mod(p) => {
                    format!("module of rank {} over zmod:{p}", b.rank)
                }
            }
        }
        WaldHost::Declared(_) => "not representable in the declared category".into(),
    }
}

/// Build the `n`-th S-construction level over a Waldhausen structure.
///
/// Staircases are enumerated as cofibration chains
/// `0 ↣ A_{01} ↣ … ↣ A_{0n}` with a chosen quotient `(Q_{ij}, q_{ij})`
/// for every `0 < i < j`; the remaining arrows are the induced ones and
/// every emitted staircase is verified to commute.
pub fn s_construct(
    host: WaldHost,
    w: &WaldhausenStructure,
    n: usize,
) -> Result<SConstructionLevel, KthError> {
    if n > 3 {
        return Err(KthError::LevelCap(n));
    }
    let axioms = crate::exact::check_waldhausen_axioms(host, w)?;
    if !axioms.is_ok() {
        return Err(KthError::AxiomsFail(axioms));
    }
    let cat = host.cat();
    let zero = w.zero;

    // cofibration chains starting at the zero object
    let mut chains: Vec<Vec<MorId>> = vec![Vec::new()];
    for _ in 1..=n {
        let mut next = Vec::new();
        for chain in &chains {
            let at = chain.last().map_or(zero, |&m| cat.tgt(m));
            for &c in &w.co {
                if cat.src(c) == at {
                    let mut ext = chain.clone();
                    ext.push(c);
                    next.push(ext);
                }
            }
        }
        chains = next;
    }

    let mut staircases = Vec::new();
    for chain in &chains {
        // objects on row 0
        let mut base: BTreeMap<(usize, usize), ObjId> = BTreeMap::new();
        for i in 0..=n {
            base.insert((i, i), zero);
        }
        for (j, &m) in chain.iter().enumerate() {
            base.insert((0, j + 1), cat.tgt(m));
        }
        // composite monos c_{i,j}: A_{0i} -> A_{0j} for i < j
        let mut composite: BTreeMap<(usize, usize), MorId> = BTreeMap::new();
        for i in 0..n {
            let mut acc = chain[i];
            composite.insert((i, i + 1), acc);
            for j in i + 2..=n {
                acc = cat
                    .table_entry(chain[j - 1], acc)
                    .expect("valid category");
                composite.insert((i, j), acc);
            }
        }
        // quotient choices per interior position
        let interior: Vec<(usize, usize)> = positions(n)
            .into_iter()
            .filter(|&(i, j)| i > 0 && i < j)
            .collect();
        let mut choice_sets = Vec::new();
        for &(i, j) in &interior {
            let c = composite[&(i, j)];
            let cands = quotient_candidates(host, zero, c)?;
            if cands.is_empty() {
                return Err(KthError::EnumerationIncomplete {
                    mono: cat.morphism_name(c).to_string(),
                    cokernel: cokernel_description(host, c),
                });
            }
            choice_sets.push(cands);
        }
        // cartesian product of choices, in canonical order
        let mut selections = vec![Vec::new()];
        for set in &choice_sets {
            let mut next = Vec::new();
            for sel in &selections {
                for item in set {
                    let mut s: Vec<(ObjId, MorId)> = sel.clone();
                    s.push(*item);
                    next.push(s);
                }
            }
            selections = next;
        }

        for sel in selections {
            let mut objects = base.clone();
            let mut qmaps: BTreeMap<(usize, usize), MorId> = BTreeMap::new();
            for (k, &(i, j)) in interior.iter().enumerate() {
                objects.insert((i, j), sel[k].0);
                qmaps.insert((i, j), sel[k].1);
            }
            // q_{0j} = identity, q_{jj} = the unique map to zero
            for j in 0..=n {
                qmaps.insert((0, j), cat.identity(objects[&(0, j)]));
                let to_zero = cat.hom(objects[&(0, j)], zero);
                if to_zero.len() != 1 {
                    return Err(KthError::Structural(format!(
                        "no unique morphism {} -> 0",
                        cat.object_name(objects[&(0, j)])
                    )));
                }
                qmaps.insert((j, j), to_zero[0]);
            }

            let unique_arrow = |src: ObjId,
                                tgt: ObjId,
                                q_from: MorId,
                                rhs: MorId,
                                what: &str|
             -> Result<MorId, KthError> {
                let found: Vec<MorId> = cat
                    .hom(src, tgt)
                    .into_iter()
                    .filter(|&h| cat.table_entry(h, q_from) == Some(rhs))
                    .collect();
                match found.len() {
                    1 => Ok(found[0]),
                    0 => Err(KthError::InducedArrowMissing(format!(
                        "{what}: no declared arrow {} -> {}",
                        cat.object_name(src),
                        cat.object_name(tgt)
                    ))),
                    _ => Err(KthError::InducedArrowMissing(format!(
                        "{what}: arrow {} -> {} is not unique",
                        cat.object_name(src),
                        cat.object_name(tgt)
                    ))),
                }
            };

            let mut horizontal = BTreeMap::new();
            let mut vertical = BTreeMap::new();
            let mut ok = true;
            // horizontal (i,j) -> (i,j+1): h ∘ q_{ij} = q_{i,j+1} ∘ m_{j+1}
            for i in 0..=n {
                for j in i..n {
                    let h = if i == 0 {
                        chain[j]
                    } else {
                        let rhs = cat
                            .table_entry(qmaps[&(i, j + 1)], chain[j])
                            .expect("valid category");
                        unique_arrow(
                            objects[&(i, j)],
                            objects[&(i, j + 1)],
                            qmaps[&(i, j)],
                            rhs,
                            "horizontal",
                        )?
                    };
                    if !w.co.contains(&h) {
                        ok = false;
                        break;
                    }
                    horizontal.insert((i, j), h);
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                // a derived horizontal arrow escaped the cofibrations;
                // this choice of quotients does not assemble
                return Err(KthError::InducedArrowMissing(
                    "derived horizontal arrow is not a cofibration".into(),
                ));
            }
            // vertical (i,j) -> (i+1,j): v ∘ q_{ij} = q_{i+1,j}
            for i in 0..n {
                for j in i + 1..=n {
                    let v = unique_arrow(
                        objects[&(i, j)],
                        objects[&(i + 1, j)],
                        qmaps[&(i, j)],
                        qmaps[&(i + 1, j)],
                        "vertical",
                    )?;
                    vertical.insert((i, j), v);
                }
            }

            let st = Staircase {
                n,
                objects,
                horizontal,
                vertical,
                quotient_maps: qmaps,
            };
            let commuted = cat::check_commutes(cat, &st.diagram())?;
            if !commuted.commutes {
                return Err(KthError::Structural(
                    "assembled staircase does not commute".into(),
                ));
            }
            staircases.push(st);
        }
    }

    // staircase maps: levelwise tuples commuting with all arrows
    let pos = positions(n);
    let mut maps = Vec::new();
    for (xi, x) in staircases.iter().enumerate() {
        for (yi, y) in staircases.iter().enumerate() {
            // assign components position by position, pruning against
            // every square whose corners are already assigned
            let mut partial: Vec<BTreeMap<(usize, usize), MorId>> = vec![BTreeMap::new()];
            for &p in &pos {
                let (i, j) = p;
                let mut next = Vec::new();
                for asg in &partial {
                    'cand: for cand in cat.hom(x.objects[&p], y.objects[&p]) {
                        // horizontal square ending at p: (i, j-1) -> (i,j)
                        if j > 0 && i < j {
                            if let Some(&prev) = asg.get(&(i, j - 1)) {
                                let a = cat.table_entry(cand, x.horizontal[&(i, j - 1)]);
                                let b = cat.table_entry(y.horizontal[&(i, j - 1)], prev);
                                if a != b {
                                    continue 'cand;
                                }
                            }
                        }
                        // vertical square ending at p: (i-1, j) -> (i,j)
                        if i > 0 {
                            if let Some(&prev) = asg.get(&(i - 1, j)) {
                                let a = cat.table_entry(cand, x.vertical[&(i - 1, j)]);
                                let b = cat.table_entry(y.vertical[&(i - 1, j)], prev);
                                if a != b {
                                    continue 'cand;
                                }
                            }
                        }
                        let mut ext = asg.clone();
                        ext.insert(p, cand);
                        next.push(ext);
                    }
                }
                partial = next;
            }
            for components in partial {
                maps.push(StaircaseMap {
                    src: xi,
                    tgt: yi,
                    components,
                });
            }
        }
    }

    // assemble the S_n category
    let objects: Vec<String> = (0..staircases.len()).map(|i| format!("st{i}")).collect();
    let morphisms: Vec<Morphism> = maps
        .iter()
        .enumerate()
        .map(|(k, m)| Morphism {
            name: format!("sm{k}"),
            src: ObjId(m.src),
            tgt: ObjId(m.tgt),
        })
        .collect();
    let map_index: BTreeMap<(usize, usize, Vec<MorId>), usize> = maps
        .iter()
        .enumerate()
        .map(|(k, m)| {
            (
                (m.src, m.tgt, m.components.values().copied().collect()),
                k,
            )
        })
        .collect();
    let mut identities = Vec::new();
    for (i, st) in staircases.iter().enumerate() {
        let comps: Vec<MorId> = pos.iter().map(|p| cat.identity(st.objects[p])).collect();
        let k = map_index
            .get(&(i, i, comps))
            .copied()
            .ok_or_else(|| KthError::Structural("identity staircase map missing".into()))?;
        identities.push(MorId(k));
    }
    let mut comp = Vec::new();
    for (gk, g) in maps.iter().enumerate() {
        for (fk, f) in maps.iter().enumerate() {
            if f.tgt != g.src {
                continue;
            }
            let mut comps = Vec::with_capacity(pos.len());
            for p in &pos {
                let c = cat
                    .table_entry(g.components[p], f.components[p])
                    .expect("valid category");
                comps.push(c);
            }
            let h = map_index
                .get(&(f.src, g.tgt, comps))
                .copied()
                .ok_or_else(|| KthError::Structural("staircase maps not closed".into()))?;
            comp.push((MorId(gk), MorId(fk), MorId(h)));
        }
    }
    let category = FinCategory::new(objects, morphisms, identities, &comp)?;

    Ok(SConstructionLevel {
        n,
        staircases,
        maps,
        category,
    })
}

/// Restrict an S-construction level to the maps that are levelwise weak
/// equivalences.
pub fn weak_equiv_subcat(
    w: &WaldhausenStructure,
    s: &SConstructionLevel,
) -> Result<FinCategory, KthError> {
    let keep: Vec<usize> = s
        .maps
        .iter()
        .enumerate()
        .filter(|(_, m)| m.components.values().all(|c| w.we.contains(c)))
        .map(|(k, _)| k)
        .collect();
    let old_to_new: BTreeMap<usize, usize> =
        keep.iter().enumerate().map(|(nw, &old)| (old, nw)).collect();
    let objects: Vec<String> = (0..s.staircases.len()).map(|i| format!("st{i}")).collect();
    let morphisms: Vec<Morphism> = keep
        .iter()
        .map(|&k| Morphism {
            name: format!("sm{k}"),
            src: ObjId(s.maps[k].src),
            tgt: ObjId(s.maps[k].tgt),
        })
        .collect();
    let mut identities = Vec::new();
    for i in 0..s.staircases.len() {
        let old = s.category.identity(ObjId(i));
        let new = old_to_new.get(&old.0).copied().ok_or_else(|| {
            KthError::Structural("identity map is not a weak equivalence".into())
        })?;
        identities.push(MorId(new));
    }
    let mut comp = Vec::new();
    for &g in &keep {
        for &f in &keep {
            if s.maps[f].tgt != s.maps[g].src {
                continue;
            }
            let h = s
                .category
                .table_entry(MorId(g), MorId(f))
                .expect("closed category");
            let h_new = old_to_new.get(&h.0).copied().ok_or_else(|| {
                KthError::Structural("weak equivalences not closed under composition".into())
            })?;
            comp.push((MorId(old_to_new[&g]), MorId(old_to_new[&f]), MorId(h_new)));
        }
    }
    Ok(FinCategory::new(objects, morphisms, identities, &comp)?)
}

/// Combinatorial K-spectrum level: the nerve of `ωS_m`, truncated.
pub fn k_spectrum_level(
    host: WaldHost,
    w: &WaldhausenStructure,
    m: usize,
    truncation: usize,
) -> Result<SimplicialSet, KthError> {
    if m > 3 {
        return Err(KthError::LevelCap(m));
    }
    if truncation > 3 {
        return Err(KthError::LevelCap(truncation));
    }
    let s = s_construct(host, w, m)?;
    let omega = weak_equiv_subcat(w, &s)?;
    nerve(&omega, truncation)
}

// ---------------------------------------------------------------------
// K0 as a finitely presented abelian group
// ---------------------------------------------------------------------

/// A finitely presented abelian group: `Z^generators / im(relations)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroupPresentation {
    pub generators: usize,
    pub relations: Mat,
}

/// Invariant-factor normal form: free rank plus torsion factors (each
/// dividing the next, trivial factors dropped).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupNormalForm {
    pub free_rank: usize,
    pub torsion: Vec<i128>,
}

impl AbelianGroupPresentation {
    pub fn trivial() -> Self {
        AbelianGroupPresentation {
            generators: 0,
            relations: Mat::zeros(0, 0),
        }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroupPresentation {
            generators: rank,
            relations: Mat::zeros(rank, 0),
        }
    }

    pub fn normal_form(&self) -> GroupNormalForm {
        let s = smith_normal_form(&self.relations);
        GroupNormalForm {
            free_rank: self.generators - s.rank,
            torsion: s
                .invariant_factors
                .iter()
                .copied()
                .filter(|&d| d.abs() > 1)
                .map(|d| d.abs())
                .collect(),
        }
    }
}

impl fmt::Display for GroupNormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.free_rank == 0 && self.torsion.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// True iff the two presentations define isomorphic groups: equal free
/// ranks and equal invariant-factor lists (trivial factors ignored).
pub fn groups_isomorphic(a: &AbelianGroupPresentation, b: &AbelianGroupPresentation) -> bool {
    a.normal_form() == b.normal_form()
}

/// The Grothendieck group of an exact structure: generators are
/// isomorphism classes of declared objects, one relation
/// `[L] = [L'] + [L'']` per sequence in Σ, reduced to invariant-factor
/// form by Smith normal form.
pub fn k0(e: &ExactStructure) -> Result<AbelianGroupPresentation, KthError> {
    let report = check_exact_axioms(e)?;
    if !report.is_ok() {
        return Err(KthError::AxiomsFail(report));
    }
    Ok(k0_presentation_unchecked(e))
}

/// The K0 presentation without re-running the axiom checker (for callers
/// that already validated the structure).
pub fn k0_presentation_unchecked(e: &ExactStructure) -> AbelianGroupPresentation {
    let cat = e.host.cat();
    let objects: Vec<ObjId> = cat.objects().collect();
    let triples: Vec<(ObjId, ObjId, ObjId)> = e
        .sigma
        .iter()
        .map(|&(f1, f2)| (cat.src(f1), cat.tgt(f1), cat.tgt(f2)))
        .collect();
    grothendieck_presentation(cat, &objects, &triples)
}

/// Grothendieck presentation over a chosen object set: generators are
/// isomorphism classes of the listed objects (classes taken with the
/// host's declared isomorphisms), one relation `[mid] = [left] + [right]`
/// per triple.
pub fn grothendieck_presentation(
    cat: &FinCategory,
    objects: &[ObjId],
    triples: &[(ObjId, ObjId, ObjId)],
) -> AbelianGroupPresentation {
    let mut class: Vec<usize> = (0..cat.object_count()).collect();
    fn find(class: &mut Vec<usize>, i: usize) -> usize {
        if class[i] != i {
            let root = find(class, class[i]);
            class[i] = root;
        }
        class[i]
    }
    let in_set: BTreeSet<usize> = objects.iter().map(|o| o.0).collect();
    for iso in cat.isomorphisms() {
        let (a, b) = (cat.src(iso).0, cat.tgt(iso).0);
        if !in_set.contains(&a) || !in_set.contains(&b) {
            continue;
        }
        let (ra, rb) = (find(&mut class, a), find(&mut class, b));
        if ra != rb {
            class[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = {
        let mut seen = BTreeSet::new();
        for o in objects {
            seen.insert(find(&mut class, o.0));
        }
        seen.into_iter().collect()
    };
    let gen_of: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();

    let mut relations = Mat::zeros(roots.len(), triples.len());
    for (col, &(left, mid, right)) in triples.iter().enumerate() {
        let left = gen_of[&find(&mut class, left.0)];
        let mid = gen_of[&find(&mut class, mid.0)];
        let right = gen_of[&find(&mut class, right.0)];
        // [mid] - [left] - [right] = 0
        relations[(mid, col)] += 1;
        relations[(left, col)] -= 1;
        relations[(right, col)] -= 1;
    }
    AbelianGroupPresentation {
        generators: roots.len(),
        relations,
    }
}
