//! Exact-category and Waldhausen-category structures over concrete
//! matrix categories, their axiom checkers, and the conversion of the
//! former into the latter.
//!
//! Concrete hosts are finite subcategories of module categories over Z
//! or Z/p: every object is a finitely presented module (a free rank plus
//! an integer relation matrix) and every morphism a matrix, reduced to a
//! canonical representative modulo the target's relations. The declared
//! morphism set must be closed under composition so that the
//! combinatorial shadow is an honest [`FinCategory`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::cat::{self, FinCategory, MorId, Morphism, ObjId};
use crate::matrix::{
    self, columns_in_span, kernel_basis, reduce_mod_span, same_column_span, Mat, RingTag,
};
use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("category error: {0}")]
    Cat(#[from] cat::CatError),
    #[error("composition closure exceeded cap of {0} morphisms")]
    ClosureCap(usize),
    #[error("exact axioms fail:\n{0}")]
    AxiomsFail(ValidationReport),
    #[error("host has no zero object")]
    NoZeroObject,
}

/// A finitely presented module: the cokernel of
/// `relations: R^k -> R^rank`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModulePresentation {
    pub rank: usize,
    pub relations: Mat,
}

impl ModulePresentation {
    pub fn free(rank: usize) -> Self {
        ModulePresentation {
            rank,
            relations: Mat::zeros(rank, 0),
        }
    }

    pub fn with_relations(rank: usize, relations: Mat) -> Self {
        assert_eq!(relations.rows(), rank, "relation matrix height");
        ModulePresentation { rank, relations }
    }

    pub fn is_free(&self) -> bool {
        self.relations.cols() == 0
    }

    /// Biproduct presentation.
    pub fn direct_sum(&self, other: &ModulePresentation) -> ModulePresentation {
        ModulePresentation {
            rank: self.rank + other.rank,
            relations: self.relations.block_diag(&other.relations),
        }
    }
}

/// A short exact sequence candidate `0 -> L' -f1-> L -f2-> L'' -> 0`,
/// carried as raw presentation data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortExactSeq {
    pub ring: RingTag,
    pub left: ModulePresentation,
    pub mid: ModulePresentation,
    pub right: ModulePresentation,
    pub f1: Mat,
    pub f2: Mat,
}

/// Generators for the kernel of a morphism of presented modules, as a
/// sublattice of the source's free cover: all `x` with
/// `f x ∈ span(tgt_rel)`.
fn kernel_cover(ring: RingTag, f: &Mat, tgt_rel: &Mat) -> Mat {
    // x in ker  <=>  exists y with f x = tgt_rel y
    let block = f.hcat(&tgt_rel.scale(-1));
    let basis = kernel_basis(ring, &block);
    let mut out = Mat::zeros(f.cols(), basis.cols());
    for c in 0..basis.cols() {
        for r in 0..f.cols() {
            out[(r, c)] = basis[(r, c)];
        }
    }
    out
}

fn is_injective(ring: RingTag, f: &Mat, src: &ModulePresentation, tgt: &ModulePresentation) -> bool {
    let ker = kernel_cover(ring, f, &tgt.relations);
    columns_in_span(ring, &src.relations, &ker)
}

fn is_surjective(ring: RingTag, f: &Mat, tgt: &ModulePresentation) -> bool {
    // columns of [f | rel_tgt] must span the whole free cover
    let block = f.hcat(&tgt.relations);
    match ring {
        RingTag::Int => {
            let s = matrix::smith_normal_form(&block);
            s.rank == tgt.rank && s.invariant_factors.iter().all(|&d| d.abs() == 1)
        }
        RingTag::Mod(_) => matrix::rank(ring, &block) == tgt.rank,
    }
}

/// Is the candidate an exact sequence: `f1` injective, `f2` surjective,
/// `im f1 = ker f2`, computed exactly over the declared ring?
pub fn is_exact_sequence(seq: &ShortExactSeq) -> Result<bool, ExactError> {
    let ShortExactSeq {
        ring,
        left,
        mid,
        right,
        f1,
        f2,
    } = seq;
    if f1.rows() != mid.rank || f1.cols() != left.rank {
        return Err(ExactError::Structural(format!(
            "f1 shape {}x{} does not match {} -> {}",
            f1.rows(),
            f1.cols(),
            left.rank,
            mid.rank
        )));
    }
    if f2.rows() != right.rank || f2.cols() != mid.rank {
        return Err(ExactError::Structural(format!(
            "f2 shape {}x{} does not match {} -> {}",
            f2.rows(),
            f2.cols(),
            mid.rank,
            right.rank
        )));
    }

    // fast path: free modules over a field
    if ring.is_field() && left.is_free() && mid.is_free() && right.is_free() {
        let comp = f2.mul(f1).reduce(*ring);
        return Ok(comp.is_zero()
            && matrix::rank(*ring, f1) == left.rank
            && matrix::rank(*ring, f2) == right.rank
            && left.rank + right.rank == mid.rank);
    }

    if !is_injective(*ring, f1, left, mid) {
        return Ok(false);
    }
    if !is_surjective(*ring, f2, right) {
        return Ok(false);
    }
    // image of f1 and kernel of f2 as sublattices of the middle cover
    let image = f1.hcat(&mid.relations);
    let kernel = kernel_cover(*ring, f2, &right.relations).hcat(&mid.relations);
    Ok(same_column_span(*ring, &image, &kernel))
}

/// The canonical split sequence `0 -> L' -> L' ⊕ L'' -> L'' -> 0`.
pub fn split_seq(
    ring: RingTag,
    left: &ModulePresentation,
    right: &ModulePresentation,
) -> ShortExactSeq {
    let mid = left.direct_sum(right);
    let mut f1 = Mat::zeros(mid.rank, left.rank);
    for i in 0..left.rank {
        f1[(i, i)] = 1;
    }
    let mut f2 = Mat::zeros(right.rank, mid.rank);
    for i in 0..right.rank {
        f2[(i, left.rank + i)] = 1;
    }
    ShortExactSeq {
        ring,
        left: left.clone(),
        mid,
        right: right.clone(),
        f1,
        f2,
    }
}

/// Does the sequence split: is there a module morphism `s: L'' -> L`
/// with `f2 ∘ s = id`? The section condition and the requirement that
/// `s` respect the presentations are solved as one linear system, so a
/// section that exists only outside the morphism set cannot produce a
/// false positive.
pub fn sequence_splits(seq: &ShortExactSeq) -> bool {
    // every short exact sequence of vector spaces splits
    if seq.ring.is_field() {
        return true;
    }
    let ring = seq.ring;
    let (l, c) = (seq.mid.rank, seq.right.rank);
    let k_right = seq.right.relations.cols();
    let k_mid = seq.mid.relations.cols();
    // unknowns: S (l*c, column-major), Y (k_right per column of S),
    // Z (k_mid per relation column of the right object)
    let n_unknown = l * c + k_right * c + k_mid * k_right;
    let n_rows = c * c + l * k_right;
    let mut a = Mat::zeros(n_rows, n_unknown);
    let mut b = vec![0i128; n_rows];
    // rows 0..c*c: f2 * S_j + rel'' * Y_j = e_j for each column j
    for j in 0..c {
        for r in 0..c {
            let row = j * c + r;
            for t in 0..l {
                a[(row, j * l + t)] = seq.f2[(r, t)];
            }
            for t in 0..k_right {
                a[(row, l * c + j * k_right + t)] = seq.right.relations[(r, t)];
            }
            b[row] = i128::from(r == j);
        }
    }
    // rows c*c..: S * rel''_col_k - rel_mid * Z_k = 0
    for k in 0..k_right {
        for r in 0..l {
            let row = c * c + k * l + r;
            for j in 0..c {
                a[(row, j * l + r)] = seq.right.relations[(j, k)];
            }
            for t in 0..k_mid {
                a[(row, l * c + k_right * c + k * k_mid + t)] = -seq.mid.relations[(r, t)];
            }
        }
    }
    matrix::solve(ring, &a, &b).is_some()
}

// ---------------------------------------------------------------------
// Matrix categories
// ---------------------------------------------------------------------

/// A finite subcategory of modules over Z or Z/p: declared objects with
/// presentations, declared morphisms as canonical matrices, composition
/// closed, with a [`FinCategory`] shadow for all combinatorial work.
#[derive(Clone, Debug)]
pub struct MatrixCategory {
    ring: RingTag,
    presentations: Vec<ModulePresentation>,
    mats: Vec<Mat>,
    cat: FinCategory,
}

impl MatrixCategory {
    pub fn ring(&self) -> RingTag {
        self.ring
    }

    pub fn cat(&self) -> &FinCategory {
        &self.cat
    }

    pub fn presentation(&self, o: ObjId) -> &ModulePresentation {
        &self.presentations[o.0]
    }

    pub fn matrix(&self, m: MorId) -> &Mat {
        &self.mats[m.0]
    }

    /// Canonical representative of a matrix as a morphism into `tgt`.
    pub fn canonical(&self, tgt: ObjId, m: &Mat) -> Mat {
        canonical_matrix(self.ring, &self.presentations[tgt.0].relations, m)
    }

    pub fn find_morphism(&self, src: ObjId, tgt: ObjId, m: &Mat) -> Option<MorId> {
        let want = self.canonical(tgt, m);
        self.cat
            .hom(src, tgt)
            .into_iter()
            .find(|&id| self.mats[id.0] == want)
    }

    /// The first declared zero object (initial and terminal), if any.
    pub fn zero_object(&self) -> Option<ObjId> {
        self.cat.objects().find(|&z| {
            self.cat
                .objects()
                .all(|a| self.cat.hom(z, a).len() == 1 && self.cat.hom(a, z).len() == 1)
        })
    }

    /// Raw sequence data for a composable pair of declared morphisms.
    pub fn seq_data(&self, f1: MorId, f2: MorId) -> ShortExactSeq {
        let c = &self.cat;
        ShortExactSeq {
            ring: self.ring,
            left: self.presentations[c.src(f1).0].clone(),
            mid: self.presentations[c.tgt(f1).0].clone(),
            right: self.presentations[c.tgt(f2).0].clone(),
            f1: self.mats[f1.0].clone(),
            f2: self.mats[f2.0].clone(),
        }
    }

    /// All composable pairs `(f1, f2)` that form exact sequences.
    pub fn all_exact_pairs(&self) -> Vec<(MorId, MorId)> {
        let mut out = Vec::new();
        for f1 in self.cat.morphisms() {
            for f2 in self.cat.morphisms() {
                if self.cat.tgt(f1) != self.cat.src(f2) {
                    continue;
                }
                if is_exact_sequence(&self.seq_data(f1, f2)).unwrap_or(false) {
                    out.push((f1, f2));
                }
            }
        }
        out
    }

    /// Is the declared morphism injective as a module map?
    pub fn morphism_injective(&self, m: MorId) -> bool {
        is_injective(
            self.ring,
            &self.mats[m.0],
            &self.presentations[self.cat.src(m).0],
            &self.presentations[self.cat.tgt(m).0],
        )
    }

    pub fn morphism_surjective(&self, m: MorId) -> bool {
        is_surjective(
            self.ring,
            &self.mats[m.0],
            &self.presentations[self.cat.tgt(m).0],
        )
    }
}

fn canonical_matrix(ring: RingTag, tgt_rel: &Mat, m: &Mat) -> Mat {
    let mut out = Mat::zeros(m.rows(), m.cols());
    for c in 0..m.cols() {
        out.set_col(c, &reduce_mod_span(ring, tgt_rel, &m.col(c)));
    }
    out
}

/// Builder for [`MatrixCategory`]. Identities and (optionally) zero
/// morphisms are synthesized, then the morphism set is closed under
/// composition up to a cap.
pub struct MatrixCategoryBuilder {
    ring: RingTag,
    objects: Vec<(String, ModulePresentation)>,
    morphisms: Vec<(String, usize, usize, Mat)>,
    index: HashMap<(usize, usize, Mat), usize>,
}

impl MatrixCategoryBuilder {
    pub fn new(ring: RingTag) -> Self {
        MatrixCategoryBuilder {
            ring,
            objects: Vec::new(),
            morphisms: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn object(&mut self, name: &str, pres: ModulePresentation) -> ObjId {
        self.objects.push((name.to_string(), pres));
        ObjId(self.objects.len() - 1)
    }

    /// Add a morphism (canonicalized, deduplicated). Returns its index.
    pub fn morphism(
        &mut self,
        name: &str,
        src: ObjId,
        tgt: ObjId,
        m: Mat,
    ) -> Result<MorId, ExactError> {
        let src_p = &self.objects[src.0].1;
        let tgt_p = &self.objects[tgt.0].1;
        if m.rows() != tgt_p.rank || m.cols() != src_p.rank {
            return Err(ExactError::Structural(format!(
                "morphism {name} has shape {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                tgt_p.rank,
                src_p.rank
            )));
        }
        let canon = canonical_matrix(self.ring, &tgt_p.relations, &m);
        // must send source relations into target relations
        let moved = canon.mul(&src_p.relations);
        if !columns_in_span(self.ring, &tgt_p.relations, &moved) {
            return Err(ExactError::Structural(format!(
                "morphism {name} does not respect the presentations"
            )));
        }
        let key = (src.0, tgt.0, canon.clone());
        if let Some(&i) = self.index.get(&key) {
            return Ok(MorId(i));
        }
        self.morphisms.push((name.to_string(), src.0, tgt.0, canon));
        self.index.insert(key, self.morphisms.len() - 1);
        Ok(MorId(self.morphisms.len() - 1))
    }

    /// Add the zero morphism between every ordered pair of objects.
    pub fn add_zero_morphisms(&mut self) -> Result<(), ExactError> {
        for s in 0..self.objects.len() {
            for t in 0..self.objects.len() {
                let m = Mat::zeros(self.objects[t].1.rank, self.objects[s].1.rank);
                self.morphism(&format!("z{s}_{t}"), ObjId(s), ObjId(t), m)?;
            }
        }
        Ok(())
    }

    /// Close under composition and assemble. `cap` bounds the total
    /// morphism count so a generator of infinite order fails loudly
    /// instead of diverging.
    pub fn build(mut self, cap: usize) -> Result<MatrixCategory, ExactError> {
        let object_data = self.objects.clone();
        let mut identities = Vec::new();
        for (i, (name, pres)) in object_data.iter().enumerate() {
            let id = self.morphism(
                &format!("id_{name}"),
                ObjId(i),
                ObjId(i),
                Mat::identity(pres.rank),
            )?;
            identities.push(id);
        }

        let mut frontier: Vec<usize> = (0..self.morphisms.len()).collect();
        while !frontier.is_empty() {
            if self.morphisms.len() > cap {
                return Err(ExactError::ClosureCap(cap));
            }
            let snapshot = self.morphisms.len();
            let mut next = Vec::new();
            for second in 0..snapshot {
                for &first in &frontier {
                    for (g, f) in [(second, first), (first, second)] {
                        if self.morphisms[f].2 != self.morphisms[g].1 {
                            continue;
                        }
                        let prod = self.morphisms[g].3.mul(&self.morphisms[f].3);
                        let (src, tgt) = (self.morphisms[f].1, self.morphisms[g].2);
                        let before = self.morphisms.len();
                        let id = self.morphism(&format!("c{before}"), ObjId(src), ObjId(tgt), prod)?;
                        if id.0 >= before {
                            next.push(id.0);
                        }
                    }
                }
            }
            frontier = next;
        }

        // composition table over the closed set
        let n = self.morphisms.len();
        let mut comp = Vec::new();
        for g in 0..n {
            for f in 0..n {
                if self.morphisms[f].2 != self.morphisms[g].1 {
                    continue;
                }
                let prod = self.morphisms[g].3.mul(&self.morphisms[f].3);
                let tgt = self.morphisms[g].2;
                let canon = canonical_matrix(self.ring, &object_data[tgt].1.relations, &prod);
                let key = (self.morphisms[f].1, tgt, canon);
                let h = *self.index.get(&key).expect("closure missed a composite");
                comp.push((MorId(g), MorId(f), MorId(h)));
            }
        }

        let objects: Vec<String> = object_data.iter().map(|(n, _)| n.clone()).collect();
        let presentations: Vec<ModulePresentation> =
            object_data.into_iter().map(|(_, p)| p).collect();
        let morphisms: Vec<Morphism> = self
            .morphisms
            .iter()
            .map(|(name, s, t, _)| Morphism {
                name: name.clone(),
                src: ObjId(*s),
                tgt: ObjId(*t),
            })
            .collect();
        let mats: Vec<Mat> = self.morphisms.into_iter().map(|(_, _, _, m)| m).collect();
        let cat = FinCategory::new(objects, morphisms, identities, &comp)?;
        Ok(MatrixCategory {
            ring: self.ring,
            presentations,
            mats,
            cat,
        })
    }
}

/// The full subcategory of free modules of rank `0..=max_rank` over the
/// field Z/p, with every matrix as a morphism.
pub fn full_field_category(p: u32, max_rank: usize) -> Result<MatrixCategory, ExactError> {
    if !matrix::is_prime(p) {
        return Err(ExactError::Structural(format!("{p} is not prime")));
    }
    let ring = RingTag::Mod(p);
    let mut b = MatrixCategoryBuilder::new(ring);
    for r in 0..=max_rank {
        b.object(&format!("r{r}"), ModulePresentation::free(r));
    }
    for s in 0..=max_rank {
        for t in 0..=max_rank {
            let count = (p as u128).pow((s * t) as u32);
            for idx in 0..count {
                let mut data = vec![0i128; s * t];
                let mut rem = idx;
                for e in data.iter_mut() {
                    *e = (rem % p as u128) as i128;
                    rem /= p as u128;
                }
                let m = Mat::from_flat(t, s, data);
                b.morphism(&format!("f{s}_{t}_{idx}"), ObjId(s), ObjId(t), m)?;
            }
        }
    }
    // the morphism set is every matrix, so closure adds nothing
    b.build(usize::MAX)
}

/// Free Z-modules of rank `0..=max_rank` with partial-permutation
/// matrices (entries 0/1, at most one 1 per row and per column) as the
/// declared morphisms. This monoid is finite and closed under
/// composition, which makes integer hosts at any desk rank possible.
pub fn int_permutation_category(max_rank: usize) -> Result<MatrixCategory, ExactError> {
    let mut b = MatrixCategoryBuilder::new(RingTag::Int);
    for r in 0..=max_rank {
        b.object(&format!("r{r}"), ModulePresentation::free(r));
    }
    fn partial_injections(cols: usize, rows: usize) -> Vec<Mat> {
        let mut out = vec![Mat::zeros(rows, cols)];
        for c in 0..cols {
            let mut next = Vec::new();
            for m in &out {
                next.push(m.clone()); // column c stays zero
                for r in 0..rows {
                    if (0..c).all(|cc| m[(r, cc)] == 0) {
                        let mut m2 = m.clone();
                        m2[(r, c)] = 1;
                        next.push(m2);
                    }
                }
            }
            out = next;
        }
        out
    }
    for s in 0..=max_rank {
        for t in 0..=max_rank {
            for (k, m) in partial_injections(s, t).into_iter().enumerate() {
                b.morphism(&format!("p{s}_{t}_{k}"), ObjId(s), ObjId(t), m)?;
            }
        }
    }
    b.build(usize::MAX)
}

/// Integer host with a genuine non-split extension: objects
/// `0, A = Z, B = Z, T = Z/2` and generating morphisms `f = [2]: A -> B`
/// and the projection `p: B -> T`, so that `0 -> A -> B -> T -> 0` is
/// exact but not split.
pub fn mul2_extension_category() -> Result<MatrixCategory, ExactError> {
    let mut b = MatrixCategoryBuilder::new(RingTag::Int);
    b.object("0", ModulePresentation::free(0));
    let a = b.object("A", ModulePresentation::free(1));
    let bb = b.object("B", ModulePresentation::free(1));
    let t = b.object(
        "T",
        ModulePresentation::with_relations(1, Mat::from_rows(vec![vec![2]])),
    );
    b.add_zero_morphisms()?;
    b.morphism("f", a, bb, Mat::from_rows(vec![vec![2]]))?;
    b.morphism("p", bb, t, Mat::from_rows(vec![vec![1]]))?;
    b.build(64)
}

/// Integer host with a sign involution: objects `0, Z` and the
/// isomorphism `-1` alongside the identity.
pub fn sign_involution_category() -> Result<MatrixCategory, ExactError> {
    let mut b = MatrixCategoryBuilder::new(RingTag::Int);
    b.object("0", ModulePresentation::free(0));
    let a = b.object("A", ModulePresentation::free(1));
    b.add_zero_morphisms()?;
    b.morphism("neg", a, a, Mat::from_rows(vec![vec![-1]]))?;
    b.build(32)
}

// ---------------------------------------------------------------------
// Exact structures
// ---------------------------------------------------------------------

/// A host matrix category together with its declared class Σ of short
/// exact sequences, each given by a composable pair of declared
/// morphisms.
#[derive(Clone, Debug)]
pub struct ExactStructure {
    pub host: MatrixCategory,
    pub sigma: Vec<(MorId, MorId)>,
}

impl ExactStructure {
    /// Σ := all exact sequences formable from declared morphisms.
    pub fn with_full_sigma(host: MatrixCategory) -> Self {
        let sigma = host.all_exact_pairs();
        ExactStructure { host, sigma }
    }

    pub fn admissible_monos(&self) -> BTreeSet<MorId> {
        self.sigma.iter().map(|&(f1, _)| f1).collect()
    }

    pub fn admissible_epis(&self) -> BTreeSet<MorId> {
        self.sigma.iter().map(|&(_, f2)| f2).collect()
    }
}

/// Check the declared exact structure: every Σ member exact, split
/// sequences present for every object pair that admits one among the
/// declared data, Σ closed under isomorphism of sequences, and the
/// admissible classes closed under composition (the extension axiom in
/// its checkable, declared-set form).
pub fn check_exact_axioms(e: &ExactStructure) -> Result<ValidationReport, ExactError> {
    let cat = e.host.cat();
    let mut report = cat::check_category_axioms(cat)?;
    if !report.is_ok() {
        return Ok(report);
    }

    let sigma_set: BTreeSet<(MorId, MorId)> = e.sigma.iter().copied().collect();

    for &(f1, f2) in &e.sigma {
        if cat.tgt(f1) != cat.src(f2) {
            report.push(
                "sigma-shape",
                format!(
                    "({}, {}) is not composable",
                    cat.morphism_name(f1),
                    cat.morphism_name(f2)
                ),
            );
            continue;
        }
        if !is_exact_sequence(&e.host.seq_data(f1, f2))? {
            report.push(
                "sigma-not-exact",
                format!(
                    "sequence ({}, {}) is not exact",
                    cat.morphism_name(f1),
                    cat.morphism_name(f2)
                ),
            );
        }
    }

    let exact_pairs = e.host.all_exact_pairs();

    // split sequences present for every pair that has one in the host
    let mut split_by_ends: BTreeMap<(ObjId, ObjId), Vec<(MorId, MorId)>> = BTreeMap::new();
    for &(f1, f2) in &exact_pairs {
        if sequence_splits(&e.host.seq_data(f1, f2)) {
            split_by_ends
                .entry((cat.src(f1), cat.tgt(f2)))
                .or_default()
                .push((f1, f2));
        }
    }
    for ((l, r), seqs) in &split_by_ends {
        if !seqs.iter().any(|s| sigma_set.contains(s)) {
            report.push(
                "split-missing",
                format!(
                    "no split sequence for pair ({}, {}) in Σ",
                    cat.object_name(*l),
                    cat.object_name(*r)
                ),
            );
        }
    }

    // isomorphism closure: an exact pair outside Σ that is isomorphic to
    // a Σ member is a violation
    let isos_by_pair: BTreeMap<(ObjId, ObjId), Vec<MorId>> = {
        let mut m: BTreeMap<(ObjId, ObjId), Vec<MorId>> = BTreeMap::new();
        for i in cat.isomorphisms() {
            m.entry((cat.src(i), cat.tgt(i))).or_default().push(i);
        }
        m
    };
    let empty = Vec::new();
    for &(g1, g2) in &exact_pairs {
        if sigma_set.contains(&(g1, g2)) {
            continue;
        }
        'search: for &(f1, f2) in &e.sigma {
            let alphas = isos_by_pair
                .get(&(cat.src(f1), cat.src(g1)))
                .unwrap_or(&empty);
            let betas = isos_by_pair
                .get(&(cat.tgt(f1), cat.tgt(g1)))
                .unwrap_or(&empty);
            let gammas = isos_by_pair
                .get(&(cat.tgt(f2), cat.tgt(g2)))
                .unwrap_or(&empty);
            for &alpha in alphas {
                for &beta in betas {
                    if cat.table_entry(beta, f1) != cat.table_entry(g1, alpha) {
                        continue;
                    }
                    for &gamma in gammas {
                        if cat.table_entry(gamma, f2) == cat.table_entry(g2, beta) {
                            report.push(
                                "iso-closure",
                                format!(
                                    "({}, {}) is isomorphic to Σ member ({}, {}) but missing from Σ",
                                    cat.morphism_name(g1),
                                    cat.morphism_name(g2),
                                    cat.morphism_name(f1),
                                    cat.morphism_name(f2)
                                ),
                            );
                            break 'search;
                        }
                    }
                }
            }
        }
    }

    // extension closure: admissible monos/epis closed under composition
    let monos = e.admissible_monos();
    let epis = e.admissible_epis();
    for (class, name) in [(&monos, "mono"), (&epis, "epi")] {
        for &u in class.iter() {
            for &v in class.iter() {
                if cat.tgt(u) != cat.src(v) {
                    continue;
                }
                if let Some(w) = cat.table_entry(v, u) {
                    if !class.contains(&w) && !cat.is_iso(w) {
                        report.push(
                            "extension-closure",
                            format!(
                                "composite {} of admissible {name}s {} and {} is not admissible",
                                cat.morphism_name(w),
                                cat.morphism_name(u),
                                cat.morphism_name(v)
                            ),
                        );
                    }
                }
            }
        }
    }

    Ok(report)
}

// ---------------------------------------------------------------------
// Waldhausen structures
// ---------------------------------------------------------------------

/// Cofibration and weak-equivalence classes over a host category, with a
/// distinguished zero object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaldhausenStructure {
    pub co: BTreeSet<MorId>,
    pub we: BTreeSet<MorId>,
    pub zero: ObjId,
}

/// The host a Waldhausen structure is checked against. Declared hosts
/// verify pushouts by exhaustive search inside the finite category;
/// matrix hosts verify them in the ambient module category (cokernel
/// construction), since finite declared object sets are rarely closed
/// under pushouts.
#[derive(Clone, Copy)]
pub enum WaldHost<'a> {
    Declared(&'a FinCategory),
    Matrix(&'a MatrixCategory),
}

impl<'a> WaldHost<'a> {
    pub fn cat(&self) -> &'a FinCategory {
        match self {
            WaldHost::Declared(c) => c,
            WaldHost::Matrix(m) => m.cat(),
        }
    }
}

/// Convert an exact structure into a Waldhausen structure: cofibrations
/// are the admissible monomorphisms plus all isomorphisms, weak
/// equivalences are exactly the isomorphisms.
pub fn exact_to_waldhausen(e: &ExactStructure) -> Result<WaldhausenStructure, ExactError> {
    let report = check_exact_axioms(e)?;
    if !report.is_ok() {
        return Err(ExactError::AxiomsFail(report));
    }
    let cat = e.host.cat();
    let zero = e.host.zero_object().ok_or(ExactError::NoZeroObject)?;
    let isos: BTreeSet<MorId> = cat.isomorphisms().into_iter().collect();
    let mut co = e.admissible_monos();
    co.extend(isos.iter().copied());
    Ok(WaldhausenStructure { co, we: isos, zero })
}

/// Check the Waldhausen axioms: the zero object is initial and terminal,
/// both classes contain every isomorphism and are closed under
/// composition, `0 -> A` is a cofibration for every `A`, and pushouts of
/// cofibrations along arbitrary morphisms exist with cofibration induced
/// legs.
pub fn check_waldhausen_axioms(
    host: WaldHost,
    w: &WaldhausenStructure,
) -> Result<ValidationReport, ExactError> {
    let cat = host.cat();
    let mut report = cat::check_category_axioms(cat)?;
    if !report.is_ok() {
        return Ok(report);
    }

    for m in w.co.iter().chain(w.we.iter()) {
        if m.0 >= cat.morphism_count() {
            return Err(ExactError::Structural(format!(
                "class member {m} is not a morphism of the host"
            )));
        }
    }

    // zero object: initial and terminal
    let zero = w.zero;
    let mut zero_ok = true;
    for a in cat.objects() {
        let from = cat.hom(zero, a);
        let to = cat.hom(a, zero);
        if from.len() != 1 || to.len() != 1 {
            report.push(
                "zero-object",
                format!(
                    "{} is not a zero object relative to {}",
                    cat.object_name(zero),
                    cat.object_name(a)
                ),
            );
            zero_ok = false;
        }
    }

    // isomorphisms lie in both classes
    for i in cat.isomorphisms() {
        if !w.co.contains(&i) {
            report.push(
                "iso-in-co",
                format!("isomorphism {} missing from co", cat.morphism_name(i)),
            );
        }
        if !w.we.contains(&i) {
            report.push(
                "iso-in-we",
                format!("isomorphism {} missing from we", cat.morphism_name(i)),
            );
        }
    }

    // closure under composition
    for (class, slug) in [(&w.co, "co-composition"), (&w.we, "we-composition")] {
        for &u in class.iter() {
            for &v in class.iter() {
                if cat.tgt(u) != cat.src(v) {
                    continue;
                }
                if let Some(c) = cat.table_entry(v, u) {
                    if !class.contains(&c) {
                        report.push(
                            slug,
                            format!(
                                "{} ∘ {} = {} escapes the class",
                                cat.morphism_name(v),
                                cat.morphism_name(u),
                                cat.morphism_name(c)
                            ),
                        );
                    }
                }
            }
        }
    }

    // unique cofibration 0 -> A for every object
    if zero_ok {
        for a in cat.objects() {
            let init = cat.hom(zero, a)[0];
            if !w.co.contains(&init) {
                report.push(
                    "initial-cofibration",
                    format!(
                        "morphism {} -> {} is not a cofibration",
                        cat.object_name(zero),
                        cat.object_name(a)
                    ),
                );
            }
        }
    }

    // pushout compatibility
    for &c in w.co.iter() {
        let a = cat.src(c);
        for f in cat.morphisms() {
            if cat.src(f) != a {
                continue;
            }
            match host {
                WaldHost::Declared(dc) => match cat::pushout(dc, c, f) {
                    Ok(p) => {
                        if !w.co.contains(&p.leg_b) {
                            report.push(
                                "pushout-cofibration",
                                format!(
                                    "induced map {} of pushout of {} along {} is not a cofibration",
                                    cat.morphism_name(p.leg_b),
                                    cat.morphism_name(c),
                                    cat.morphism_name(f)
                                ),
                            );
                        }
                    }
                    Err(cat::CatError::PushoutMissing(msg)) => {
                        report.push(
                            "pushout-missing",
                            format!(
                                "cofibration {} along {}: {}",
                                cat.morphism_name(c),
                                cat.morphism_name(f),
                                msg
                            ),
                        );
                    }
                    Err(err) => return Err(err.into()),
                },
                WaldHost::Matrix(mc) => {
                    // ambient pushout P = (B ⊕ C) / im(c, -f); the induced
                    // leg C -> P must stay monic, i.e. a cofibration in the
                    // ambient exact category
                    let (pres, leg) = ambient_pushout(mc, c, f);
                    let c_obj = mc.presentation(cat.tgt(f));
                    if !is_injective(mc.ring(), &leg, c_obj, &pres) {
                        report.push(
                            "pushout-cofibration",
                            format!(
                                "induced leg of pushout of {} along {} is not monic",
                                cat.morphism_name(c),
                                cat.morphism_name(f)
                            ),
                        );
                    }
                }
            }
        }
    }

    Ok(report)
}

/// Ambient pushout of `c: A -> B` along `f: A -> C` in the module
/// category: the presented module `(B ⊕ C) / im(c, -f)` and the induced
/// leg `C -> P`.
fn ambient_pushout(mc: &MatrixCategory, c: MorId, f: MorId) -> (ModulePresentation, Mat) {
    let cat = mc.cat();
    let b_pres = mc.presentation(cat.tgt(c));
    let c_pres = mc.presentation(cat.tgt(f));
    let glue = {
        let top = mc.matrix(c);
        let bottom = mc.matrix(f).scale(-1);
        let mut m = Mat::zeros(b_pres.rank + c_pres.rank, top.cols());
        for col in 0..top.cols() {
            for r in 0..top.rows() {
                m[(r, col)] = top[(r, col)];
            }
            for r in 0..bottom.rows() {
                m[(b_pres.rank + r, col)] = bottom[(r, col)];
            }
        }
        m
    };
    let relations = b_pres.relations.block_diag(&c_pres.relations).hcat(&glue);
    let pres = ModulePresentation::with_relations(b_pres.rank + c_pres.rank, relations);
    let mut leg = Mat::zeros(pres.rank, c_pres.rank);
    for i in 0..c_pres.rank {
        leg[(b_pres.rank + i, i)] = 1;
    }
    (pres, leg)
}

/// Block-diagonal product of two exact structures over the same ring:
/// objects are pairs realized as direct sums, morphisms are pairs
/// realized as block-diagonal matrices, and Σ is the componentwise
/// product of the factors' classes.
pub fn product_exact(
    e1: &ExactStructure,
    e2: &ExactStructure,
) -> Result<ExactStructure, ExactError> {
    if e1.host.ring() != e2.host.ring() {
        return Err(ExactError::Structural(
            "product factors must share the coefficient ring".into(),
        ));
    }
    let ring = e1.host.ring();
    let (c1, c2) = (e1.host.cat(), e2.host.cat());
    let mut b = MatrixCategoryBuilder::new(ring);
    let mut obj_index = BTreeMap::new();
    for o1 in c1.objects() {
        for o2 in c2.objects() {
            let name = format!("{}*{}", c1.object_name(o1), c2.object_name(o2));
            let pres = e1
                .host
                .presentation(o1)
                .direct_sum(e2.host.presentation(o2));
            obj_index.insert((o1, o2), b.object(&name, pres));
        }
    }
    let mut mor_index = BTreeMap::new();
    for m1 in c1.morphisms() {
        for m2 in c2.morphisms() {
            let src = obj_index[&(c1.src(m1), c2.src(m2))];
            let tgt = obj_index[&(c1.tgt(m1), c2.tgt(m2))];
            let mat = e1.host.matrix(m1).block_diag(e2.host.matrix(m2));
            let name = format!("{}*{}", c1.morphism_name(m1), c2.morphism_name(m2));
            let id = b.morphism(&name, src, tgt, mat)?;
            mor_index.insert((m1, m2), id);
        }
    }
    let host = b.build(usize::MAX)?;
    let mut sigma = Vec::new();
    for &(f1, f2) in &e1.sigma {
        for &(g1, g2) in &e2.sigma {
            sigma.push((mor_index[&(f1, g1)], mor_index[&(f2, g2)]));
        }
    }
    Ok(ExactStructure { host, sigma })
}
