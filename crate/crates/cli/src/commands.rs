//! Subcommand dispatch: assemble core structures from parsed blocks and
//! aggregate each check into a [`Report`]. Blocks are processed in
//! document order; failures become FAIL records rather than process
//! aborts, so a run always yields a complete report.

use std::collections::BTreeMap;

use thiserror::Error;

use ktc_core::brane::{
    extension_rank_check, gauge_group, loop_nontrivial, twist_class, Brane, BraneConfig,
    StringConfig, TwistAssignment,
};
use ktc_core::cat::{self, FinCategory, MorId, Morphism, ObjId};
use ktc_core::complex::{
    barycentric_refine, cochain_from_simplicial, cohomology_normal_forms, exactness_by_degree,
    potential_sequence, theorem_check, Cochain, SimplicialComplex,
};
use ktc_core::exact::{
    check_exact_axioms, check_waldhausen_axioms, exact_to_waldhausen, full_field_category,
    ExactStructure, MatrixCategoryBuilder, ModulePresentation, WaldHost, WaldhausenStructure,
};
use ktc_core::gft::{argument_count_check, gft_decompose, gft_reconstruct, ChunkGrid, GroupSpec};
use ktc_core::kth::{k0, nerve, s_construct, GroupNormalForm};
use ktc_core::matrix::{Mat, RingTag};
use ktc_core::pndp::{is_discrete_space, emerge_brane_points, virtual_dimension, zero_manifold_equiv, PndpSpec};

use crate::format::{
    BlockData, BranesData, CategoryData, ComplexData, Document, ExactData, FieldData, PndpData,
    WaldhausenData,
};
use crate::report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Document(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    CheckCategory,
    CheckExact,
    CheckWaldhausen,
    SConstruct,
    Nerve,
    K0,
    Cohomology,
    Potential,
    Refine,
    TheoremCheck,
    GftRoundtrip,
    BranesClassify,
    TwistClass,
    Pndp,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::CheckCategory => "check-category",
            CommandKind::CheckExact => "check-exact",
            CommandKind::CheckWaldhausen => "check-waldhausen",
            CommandKind::SConstruct => "s-construct",
            CommandKind::Nerve => "nerve",
            CommandKind::K0 => "k0",
            CommandKind::Cohomology => "cohomology",
            CommandKind::Potential => "potential",
            CommandKind::Refine => "refine",
            CommandKind::TheoremCheck => "theorem-check",
            CommandKind::GftRoundtrip => "gft-roundtrip",
            CommandKind::BranesClassify => "branes-classify",
            CommandKind::TwistClass => "twist-class",
            CommandKind::Pndp => "pndp",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub level: usize,
    pub truncate: usize,
    pub ring: RingTag,
    pub group: GroupSpec,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            level: 2,
            truncate: 3,
            ring: RingTag::Int,
            group: GroupSpec {
                kind: ktc_core::gft::GroupKind::Cyclic(2),
            },
        }
    }
}

// ---------------------------------------------------------------------
// Block assembly
// ---------------------------------------------------------------------

fn build_category(data: &CategoryData) -> Result<FinCategory, String> {
    let mut objects = Vec::new();
    let mut morphisms: Vec<Morphism> = Vec::new();
    let obj_id = |objects: &[String], name: &str| -> Option<ObjId> {
        objects.iter().position(|o| o == name).map(ObjId)
    };
    for o in &data.objects {
        objects.push(o.clone());
    }
    for (n, s, t) in &data.morphisms {
        morphisms.push(Morphism {
            name: n.clone(),
            src: obj_id(&objects, s).ok_or_else(|| format!("undefined object {s}"))?,
            tgt: obj_id(&objects, t).ok_or_else(|| format!("undefined object {t}"))?,
        });
    }
    // identities: declared override or synthesized id_<obj>
    let mut identities = Vec::new();
    for (oi, o) in objects.iter().enumerate() {
        let id_name = data.identity_name(o);
        let idx = match morphisms.iter().position(|m| m.name == id_name) {
            Some(i) => i,
            None => {
                morphisms.push(Morphism {
                    name: id_name,
                    src: ObjId(oi),
                    tgt: ObjId(oi),
                });
                morphisms.len() - 1
            }
        };
        identities.push(MorId(idx));
    }
    let mor_id = |name: &str| -> Option<MorId> {
        morphisms.iter().position(|m| m.name == name).map(MorId)
    };
    let mut comp = Vec::new();
    for (i, m) in morphisms.iter().enumerate() {
        let f = MorId(i);
        comp.push((identities[m.tgt.0], f, f));
        comp.push((f, identities[m.src.0], f));
    }
    for (g, f, h) in &data.composes {
        let g = mor_id(g).ok_or_else(|| format!("undefined morphism {g}"))?;
        let f = mor_id(f).ok_or_else(|| format!("undefined morphism {f}"))?;
        let h = mor_id(h).ok_or_else(|| format!("undefined morphism {h}"))?;
        comp.push((g, f, h));
    }
    FinCategory::new(objects, morphisms, identities, &comp).map_err(|e| e.to_string())
}

const CLOSURE_CAP: usize = 4096;

fn build_exact(data: &ExactData) -> Result<ExactStructure, String> {
    if let Some(maxrank) = data.full_maxrank {
        let RingTag::Mod(p) = data.ring else {
            return Err("full generation needs a finite field".into());
        };
        let host = full_field_category(p, maxrank).map_err(|e| e.to_string())?;
        return Ok(ExactStructure::with_full_sigma(host));
    }
    let mut b = MatrixCategoryBuilder::new(data.ring);
    let mut name_map: BTreeMap<String, MorId> = BTreeMap::new();
    let mut obj_map: BTreeMap<String, ObjId> = BTreeMap::new();
    let has_zero = data.objects.iter().any(|(_, r, _)| *r == 0);
    if !has_zero {
        obj_map.insert("_zero".into(), b.object("_zero", ModulePresentation::free(0)));
    }
    for (name, rank, rels) in &data.objects {
        let pres = if rels.is_empty() {
            ModulePresentation::free(*rank)
        } else {
            let mut m = Mat::zeros(*rank, rels.len());
            for (c, col) in rels.iter().enumerate() {
                for (r, &x) in col.iter().enumerate() {
                    m[(r, c)] = x;
                }
            }
            ModulePresentation::with_relations(*rank, m)
        };
        obj_map.insert(name.clone(), b.object(name, pres));
    }
    for (name, src, tgt, entries) in &data.morphisms {
        let (s, t) = (obj_map[src], obj_map[tgt]);
        let (sr, tr) = (
            data.objects.iter().find(|(n, _, _)| n == src).unwrap().1,
            data.objects.iter().find(|(n, _, _)| n == tgt).unwrap().1,
        );
        let m = Mat::from_flat(tr, sr, entries.clone());
        let id = b.morphism(name, s, t, m).map_err(|e| e.to_string())?;
        name_map.insert(name.clone(), id);
    }
    // referenceable synthesized morphisms: zeros and identities
    let pairs: Vec<(String, ObjId, String, ObjId)> = obj_map
        .iter()
        .flat_map(|(a, &ai)| {
            obj_map
                .iter()
                .map(move |(c, &ci)| (a.clone(), ai, c.clone(), ci))
        })
        .collect();
    for (a, ai, c, ci) in pairs {
        let rank_a = match data.objects.iter().find(|(n, _, _)| *n == a) {
            Some((_, r, _)) => *r,
            None => 0,
        };
        let rank_c = match data.objects.iter().find(|(n, _, _)| *n == c) {
            Some((_, r, _)) => *r,
            None => 0,
        };
        let name = format!("z_{a}_{c}");
        let id = b
            .morphism(&name, ai, ci, Mat::zeros(rank_c, rank_a))
            .map_err(|e| e.to_string())?;
        name_map.insert(name, id);
        if ai == ci {
            let name = format!("id_{a}");
            let id = b
                .morphism(&name, ai, ci, Mat::identity(rank_a))
                .map_err(|e| e.to_string())?;
            name_map.insert(name, id);
        }
    }
    let host = b.build(CLOSURE_CAP).map_err(|e| e.to_string())?;
    let sigma = if data.sigma_full {
        host.all_exact_pairs()
    } else {
        let mut sigma = Vec::new();
        for s in &data.seqs {
            let f1 = name_map
                .get(&s.names[3])
                .copied()
                .ok_or_else(|| format!("line {}: undefined morphism {}", s.line, s.names[3]))?;
            let f2 = name_map
                .get(&s.names[4])
                .copied()
                .ok_or_else(|| format!("line {}: undefined morphism {}", s.line, s.names[4]))?;
            let cat = host.cat();
            let want = [&s.names[0], &s.names[1], &s.names[2]];
            let got = [cat.src(f1), cat.tgt(f1), cat.tgt(f2)];
            for (w, g) in want.iter().zip(got) {
                if cat.object_name(g) != w.as_str() {
                    return Err(format!(
                        "line {}: sequence endpoints do not match its morphisms",
                        s.line
                    ));
                }
            }
            sigma.push((f1, f2));
        }
        sigma
    };
    Ok(ExactStructure { host, sigma })
}

fn build_waldhausen(
    doc: &Document,
    data: &WaldhausenData,
) -> Result<(FinCategory, WaldhausenStructure), String> {
    let cat_data = doc
        .blocks
        .iter()
        .find_map(|b| match &b.data {
            BlockData::Category(c) if b.name == data.category => Some(c),
            _ => None,
        })
        .ok_or_else(|| format!("undefined category {}", data.category))?;
    let cat = build_category(cat_data)?;
    let zero = cat
        .object_by_name(&data.zero)
        .ok_or_else(|| format!("undefined object {}", data.zero))?;
    let lookup = |names: &[String]| -> Result<std::collections::BTreeSet<MorId>, String> {
        names
            .iter()
            .map(|n| {
                cat.morphism_by_name(n)
                    .ok_or_else(|| format!("undefined morphism {n}"))
            })
            .collect()
    };
    let w = WaldhausenStructure {
        co: lookup(&data.cof)?,
        we: lookup(&data.we)?,
        zero,
    };
    Ok((cat, w))
}

fn build_complex(data: &ComplexData) -> Result<SimplicialComplex, String> {
    SimplicialComplex::from_maximal(&data.simplices).map_err(|e| e.to_string())
}

fn block_cochain(
    complex: &SimplicialComplex,
    decl: &crate::format::CochainDecl,
) -> Result<Cochain, String> {
    let mut values = vec![0i128; complex.count(decl.degree)];
    for (verts, x) in &decl.values {
        let idx = complex
            .index_of(verts)
            .ok_or_else(|| format!("simplex {verts:?} missing from the complex"))?;
        values[idx] = *x;
    }
    Ok(Cochain {
        degree: decl.degree,
        values,
    })
}

fn build_field(data: &FieldData) -> Result<(ChunkGrid, Vec<f64>), String> {
    let sites: usize = data.extents.iter().product();
    let grid = if data.regions.is_empty() {
        ChunkGrid::uniform(data.extents).map_err(|e| e.to_string())?
    } else {
        let mut region_names: Vec<&str> = Vec::new();
        let mut region_of = vec![0usize; sites];
        // need site indexing before the grid exists; replicate the layout
        let site_index = |x: &[usize; 4]| {
            ((x[3] * data.extents[2] + x[2]) * data.extents[1] + x[1]) * data.extents[0] + x[0]
        };
        for (name, x) in &data.regions {
            let id = match region_names.iter().position(|n| n == name) {
                Some(i) => i,
                None => {
                    region_names.push(name);
                    region_names.len() - 1
                }
            };
            region_of[site_index(x)] = id;
        }
        ChunkGrid::new(data.extents, region_of).map_err(|e| e.to_string())?
    };
    let mut values = vec![0.0f64; sites];
    for (x, v) in &data.sites {
        values[grid.site_index(*x)] = *v;
    }
    Ok((grid, values))
}

fn build_branes(doc: &Document, data: &BranesData) -> Result<(BraneConfig, Vec<(String, StringConfig)>), String> {
    let complex_by_name = |name: &str| -> Result<SimplicialComplex, String> {
        doc.blocks
            .iter()
            .find_map(|b| match &b.data {
                BlockData::Complex(c) if b.name == name => Some(build_complex(c)),
                _ => None,
            })
            .ok_or_else(|| format!("undefined complex {name}"))?
    };
    let host = complex_by_name(&data.complex)?;
    let mut branes = Vec::new();
    for (id, stack, region) in &data.branes {
        branes.push(Brane {
            id: id.clone(),
            stack: *stack,
            region: complex_by_name(region)?,
        });
    }
    let cfg = BraneConfig::new(host, branes).map_err(|e| e.to_string())?;
    let strings = data
        .strings
        .iter()
        .map(|(id, a, b)| {
            (
                id.clone(),
                StringConfig {
                    start: a.clone(),
                    end: b.clone(),
                },
            )
        })
        .collect();
    Ok((cfg, strings))
}

// ---------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------

fn nf_text(nf: &GroupNormalForm) -> String {
    if nf.torsion.is_empty() {
        format!("free rank {}, no torsion ({nf})", nf.free_rank)
    } else {
        let t: Vec<String> = nf.torsion.iter().map(|x| x.to_string()).collect();
        format!("free rank {}, torsion ({}) ({nf})", nf.free_rank, t.join(", "))
    }
}

fn push_validation(report: &mut Report, block: &str, slug: &str, v: &ktc_core::ValidationReport) {
    if v.is_ok() {
        report.pass(format!("{block}.{slug}"), "all axioms hold");
    } else {
        for violation in &v.violations {
            report.fail(
                format!("{block}.{}", violation.rule),
                violation.witness.clone(),
            );
        }
    }
}

/// Run one subcommand over a parsed document.
pub fn run_command(cmd: CommandKind, opts: &Options, doc: &Document) -> Result<Report, CliError> {
    let mut report = Report::new(cmd.name());
    match cmd {
        CommandKind::CheckCategory => {
            for b in &doc.blocks {
                let BlockData::Category(data) = &b.data else { continue };
                match build_category(data) {
                    Err(e) => report.fail(format!("{}.build", b.name), e),
                    Ok(cat) => match cat::check_category_axioms(&cat) {
                        Err(e) => report.fail(format!("{}.structural", b.name), e.to_string()),
                        Ok(v) => push_validation(&mut report, &b.name, "axioms", &v),
                    },
                }
            }
        }
        CommandKind::CheckExact => {
            for b in &doc.blocks {
                let BlockData::Exact(data) = &b.data else { continue };
                match build_exact(data) {
                    Err(e) => report.fail(format!("{}.build", b.name), e),
                    Ok(e) => match check_exact_axioms(&e) {
                        Err(err) => report.fail(format!("{}.structural", b.name), err.to_string()),
                        Ok(v) => push_validation(&mut report, &b.name, "exact-axioms", &v),
                    },
                }
            }
        }
        CommandKind::CheckWaldhausen => {
            for b in &doc.blocks {
                match &b.data {
                    BlockData::Waldhausen(data) => match build_waldhausen(doc, data) {
                        Err(e) => report.fail(format!("{}.build", b.name), e),
                        Ok((cat, w)) => {
                            match check_waldhausen_axioms(WaldHost::Declared(&cat), &w) {
                                Err(e) => {
                                    report.fail(format!("{}.structural", b.name), e.to_string())
                                }
                                Ok(v) => {
                                    push_validation(&mut report, &b.name, "waldhausen-axioms", &v)
                                }
                            }
                        }
                    },
                    BlockData::Exact(data) => match build_exact(data) {
                        Err(e) => report.fail(format!("{}.build", b.name), e),
                        Ok(e) => match exact_to_waldhausen(&e) {
                            Err(err) => report.fail(format!("{}.lemma", b.name), err.to_string()),
                            Ok(w) => {
                                match check_waldhausen_axioms(WaldHost::Matrix(&e.host), &w) {
                                    Err(err) => report
                                        .fail(format!("{}.structural", b.name), err.to_string()),
                                    Ok(v) if v.is_ok() => report.pass(
                                        format!("{}.lemma", b.name),
                                        "exact structure converts to a Waldhausen structure",
                                    ),
                                    Ok(v) => push_validation(&mut report, &b.name, "lemma", &v),
                                }
                            }
                        },
                    },
                    _ => {}
                }
            }
        }
        CommandKind::SConstruct => {
            let n = opts.level;
            for b in &doc.blocks {
                match &b.data {
                    BlockData::Exact(data) => match build_exact(data) {
                        Err(e) => report.fail(format!("{}.build", b.name), e),
                        Ok(e) => match exact_to_waldhausen(&e)
                            .map_err(|err| err.to_string())
                            .and_then(|w| {
                                s_construct(WaldHost::Matrix(&e.host), &w, n)
                                    .map_err(|err| err.to_string())
                            }) {
                            Err(err) => report.fail(format!("{}.s{n}", b.name), err),
                            Ok(s) => {
                                report.pass(
                                    format!("{}.s{n}.staircases", b.name),
                                    format!("count = {}", s.staircases.len()),
                                );
                                report.pass(
                                    format!("{}.s{n}.commutes", b.name),
                                    "every staircase commutes",
                                );
                            }
                        },
                    },
                    BlockData::Waldhausen(data) => match build_waldhausen(doc, data) {
                        Err(e) => report.fail(format!("{}.build", b.name), e),
                        Ok((cat, w)) => {
                            match s_construct(WaldHost::Declared(&cat), &w, n) {
                                Err(err) => {
                                    report.fail(format!("{}.s{n}", b.name), err.to_string())
                                }
                                Ok(s) => {
                                    report.pass(
                                        format!("{}.s{n}.staircases", b.name),
                                        format!("count = {}", s.staircases.len()),
                                    );
                                    report.pass(
                                        format!("{}.s{n}.commutes", b.name),
                                        "every staircase commutes",
                                    );
                                }
                            }
                        }
                    },
                    _ => {}
                }
            }
        }
        CommandKind::Nerve => {
            for b in &doc.blocks {
                let BlockData::Category(data) = &b.data else { continue };
                match build_category(data).map_err(CliErrorText) {
                    Err(CliErrorText(e)) => report.fail(format!("{}.build", b.name), e),
                    Ok(cat) => match nerve(&cat, opts.truncate) {
                        Err(e) => report.fail(format!("{}.nerve", b.name), e.to_string()),
                        Ok(ns) => {
                            let sizes: Vec<String> = (0..=opts.truncate)
                                .map(|l| ns.count(l).to_string())
                                .collect();
                            report.pass(
                                format!("{}.nerve.levels", b.name),
                                format!("sizes = {}", sizes.join(", ")),
                            );
                            let idents = ns.verify_identities();
                            report.record(
                                format!("{}.nerve.simplicial-identities", b.name),
                                idents.is_ok(),
                                if idents.is_ok() {
                                    "all identities hold".to_string()
                                } else {
                                    idents.to_string()
                                },
                            );
                        }
                    },
                }
            }
        }
        CommandKind::K0 => {
            for b in &doc.blocks {
                let BlockData::Exact(data) = &b.data else { continue };
                match build_exact(data) {
                    Err(e) => report.fail(format!("{}.build", b.name), e),
                    Ok(e) => match k0(&e) {
                        Err(err) => report.fail(format!("{}.k0", b.name), err.to_string()),
                        Ok(g) => {
                            report.pass(format!("{}.k0", b.name), nf_text(&g.normal_form()))
                        }
                    },
                }
            }
        }
        CommandKind::Cohomology => {
            for b in &doc.blocks {
                let BlockData::Complex(data) = &b.data else { continue };
                match build_complex(data)
                    .and_then(|k| cochain_from_simplicial(&k, opts.ring).map_err(|e| e.to_string()))
                {
                    Err(e) => report.fail(format!("{}.cochain", b.name), e),
                    Ok(c) => {
                        match cohomology_normal_forms(&c) {
                            Err(e) => report.fail(format!("{}.cohomology", b.name), e.to_string()),
                            Ok(groups) => {
                                for (n, g) in groups.iter().enumerate() {
                                    report.pass(format!("{}.H{n}", b.name), g.to_string());
                                }
                                let flags = exactness_by_degree(&c).unwrap_or_default();
                                let text: Vec<String> = flags
                                    .iter()
                                    .enumerate()
                                    .map(|(n, &e)| format!("H{n} {}", if e { "trivial" } else { "nontrivial" }))
                                    .collect();
                                report.pass(
                                    format!("{}.exactness-by-degree", b.name),
                                    text.join("; "),
                                );
                            }
                        }
                    }
                }
            }
        }
        CommandKind::Potential => {
            for b in &doc.blocks {
                let BlockData::Complex(data) = &b.data else { continue };
                let complex = match build_complex(data) {
                    Err(e) => {
                        report.fail(format!("{}.build", b.name), e);
                        continue;
                    }
                    Ok(k) => k,
                };
                let cochain_complex = match cochain_from_simplicial(&complex, opts.ring) {
                    Err(e) => {
                        report.fail(format!("{}.cochain", b.name), e.to_string());
                        continue;
                    }
                    Ok(c) => c,
                };
                let mut any = false;
                for decl in &data.cochains {
                    if decl.degree == 0 {
                        continue;
                    }
                    any = true;
                    let phi = match block_cochain(&complex, decl) {
                        Err(e) => {
                            report.fail(format!("{}.{}.potential", b.name, decl.name), e);
                            continue;
                        }
                        Ok(c) => c,
                    };
                    match potential_sequence(&cochain_complex, &phi) {
                        Err(e) => {
                            report.fail(
                                format!("{}.{}.potential", b.name, decl.name),
                                e.to_string(),
                            );
                        }
                        Ok(r) if r.solvable() => {
                            if r.gauge_holds == Some(true) {
                                report.pass(
                                    format!("{}.{}.potential", b.name, decl.name),
                                    "witness found; gauge property holds on a full basis",
                                );
                            } else {
                                report.fail(
                                    format!("{}.{}.gauge", b.name, decl.name),
                                    "witness found but the gauge property failed",
                                );
                            }
                        }
                        Ok(r) => {
                            let witness = match (&r.obstruction, r.closed) {
                                (Some(cls), _) => format!("no potential; obstruction class {cls}"),
                                (None, false) => "no potential; the cochain is not closed".into(),
                                (None, true) => "no potential".into(),
                            };
                            report.fail(format!("{}.{}.potential", b.name, decl.name), witness);
                        }
                    }
                }
                if any {
                    report.pass(
                        format!("{}.reading", b.name),
                        "potential sequence read as solvability plus gauge invariance; exactness reported per degree",
                    );
                }
            }
        }
        CommandKind::Refine => {
            for b in &doc.blocks {
                let BlockData::Complex(data) = &b.data else { continue };
                match build_complex(data) {
                    Err(e) => report.fail(format!("{}.build", b.name), e),
                    Ok(k) => {
                        let r = barycentric_refine(&k);
                        let fmt = |counts: Vec<usize>| -> String {
                            counts
                                .iter()
                                .map(|c| c.to_string())
                                .collect::<Vec<_>>()
                                .join(",")
                        };
                        report.pass(
                            format!("{}.refine.counts", b.name),
                            format!("{} -> {}", fmt(k.counts()), fmt(r.counts())),
                        );
                        report.record(
                            format!("{}.refine.face-closed", b.name),
                            r.is_face_closed(),
                            "subdivision is face-closed",
                        );
                    }
                }
            }
        }
        CommandKind::TheoremCheck => {
            let complexes: Vec<(&str, &ComplexData)> = doc
                .blocks
                .iter()
                .filter_map(|b| match &b.data {
                    BlockData::Complex(c) => Some((b.name.as_str(), c)),
                    _ => None,
                })
                .collect();
            if complexes.len() < 2 {
                return Err(CliError::Document(
                    "theorem-check needs at least two complex blocks".into(),
                ));
            }
            let (name_a, data_a) = complexes[0];
            let (name_b, data_b) = complexes[1];
            let ka = build_complex(data_a).map_err(CliError::Document)?;
            let kb = build_complex(data_b).map_err(CliError::Document)?;
            match theorem_check(&ka, &kb) {
                Err(e) => report.fail("theorem-check.run", e.to_string()),
                Ok(r) => {
                    for d in &r.degrees {
                        report.record(
                            format!("H{}", d.degree),
                            d.preserved,
                            format!("{} vs {}", d.left, d.right),
                        );
                    }
                    report.record(
                        "k0-proxy",
                        r.k0_preserved,
                        format!("{} vs {}", r.k0_left, r.k0_right),
                    );
                    report.record(
                        "preserved",
                        r.preserved,
                        format!("{name_a} vs {name_b}"),
                    );
                }
            }
        }
        CommandKind::GftRoundtrip => {
            for b in &doc.blocks {
                let BlockData::Field(data) = &b.data else { continue };
                match build_field(data) {
                    Err(e) => report.fail(format!("{}.build", b.name), e),
                    Ok((grid, values)) => {
                        match gft_decompose(&values, &grid, opts.group) {
                            Err(e) => report.fail(format!("{}.decompose", b.name), e.to_string()),
                            Ok(field) => {
                                let (arity, conforming) = argument_count_check(&field);
                                report.record(
                                    format!("{}.argument-count", b.name),
                                    conforming,
                                    format!("{arity} group arguments"),
                                );
                                // regions the field avoids carry no coefficients
                                let mut locality = true;
                                for region in 0..grid.region_count() {
                                    let silent = grid
                                        .region_sites(region)
                                        .iter()
                                        .all(|&s| values[s] == 0.0);
                                    if silent
                                        && field.regions[region].iter().any(|c| c.norm() != 0.0)
                                    {
                                        locality = false;
                                    }
                                }
                                report.record(
                                    format!("{}.support-locality", b.name),
                                    locality,
                                    "silent regions have zero coefficients",
                                );
                                match gft_reconstruct(&field, &grid, opts.group) {
                                    Err(e) => report
                                        .fail(format!("{}.reconstruct", b.name), e.to_string()),
                                    Ok(back) => {
                                        let max_err = values
                                            .iter()
                                            .zip(&back)
                                            .map(|(v, r)| {
                                                (r - num_complex::Complex64::new(*v, 0.0)).norm()
                                            })
                                            .fold(0.0f64, f64::max);
                                        report.record(
                                            format!("{}.roundtrip", b.name),
                                            max_err <= 1e-12,
                                            format!("max error = {max_err:.3e}"),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        CommandKind::BranesClassify => {
            for b in &doc.blocks {
                let BlockData::Branes(data) = &b.data else { continue };
                match build_branes(doc, data) {
                    Err(e) => report.fail(format!("{}.config", b.name), e),
                    Ok((cfg, strings)) => {
                        let expr = gauge_group(&cfg);
                        report.pass(format!("{}.gauge-group", b.name), expr.to_string());
                        report.record(
                            format!("{}.u-bound", b.name),
                            expr.total_rank() == cfg.total_stack(),
                            format!(
                                "subgroup of U({}) with factor ranks summing to {}",
                                cfg.total_stack(),
                                expr.total_rank()
                            ),
                        );
                        let ext = extension_rank_check(cfg.total_stack().max(1));
                        if let Ok(ext) = ext {
                            report.record(
                                format!("{}.extension-ranks", b.name),
                                ext.additive,
                                format!(
                                    "dim U({}) = {} = 1 + {}",
                                    ext.n, ext.dim_un, ext.dim_pun
                                ),
                            );
                        }
                        for (sid, s) in &strings {
                            match loop_nontrivial(s, &cfg) {
                                Err(e) => report
                                    .fail(format!("{}.{sid}.loop", b.name), e.to_string()),
                                Ok(nontrivial) => report.pass(
                                    format!("{}.{sid}.loop", b.name),
                                    if nontrivial {
                                        "nontrivial loop"
                                    } else {
                                        "trivial loop"
                                    },
                                ),
                            }
                        }
                    }
                }
            }
        }
        CommandKind::TwistClass => {
            for b in &doc.blocks {
                let BlockData::Complex(data) = &b.data else { continue };
                let complex = match build_complex(data) {
                    Err(e) => {
                        report.fail(format!("{}.build", b.name), e);
                        continue;
                    }
                    Ok(k) => k,
                };
                for decl in &data.cochains {
                    if decl.degree != 3 {
                        continue;
                    }
                    let record = format!("{}.{}.twist-class", b.name, decl.name);
                    match block_cochain(&complex, decl).map_err(CliErrorText).and_then(|c| {
                        TwistAssignment::new(complex.clone(), c.values)
                            .map_err(|e| CliErrorText(e.to_string()))
                    }) {
                        Err(CliErrorText(e)) => report.fail(record, e),
                        Ok(t) => match twist_class(&t) {
                            Err(e) => report.fail(record, e.to_string()),
                            Ok(cls) => {
                                let text = if cls.is_zero() {
                                    "trivial class".to_string()
                                } else {
                                    format!("class {cls}")
                                };
                                report.pass(record, text);
                            }
                        },
                    }
                }
            }
        }
        CommandKind::Pndp => {
            for b in &doc.blocks {
                let BlockData::Pndp(data) = &b.data else { continue };
                let specs = build_pndp(data);
                for s in &specs {
                    let (f, m) = virtual_dimension(s);
                    report.pass(
                        format!("{}.{}.virtual-dimension", b.name, s.id),
                        format!("dim F = {f}, dim M = {m}"),
                    );
                }
                match emerge_brane_points(&specs) {
                    Err(e) => report.fail(format!("{}.emerge", b.name), e.to_string()),
                    Ok(space) => {
                        let discrete = is_discrete_space(&space).unwrap_or(false);
                        let agree = zero_manifold_equiv(&space).map(|r| r.agree).unwrap_or(false);
                        report.record(
                            format!("{}.emerge", b.name),
                            discrete && agree,
                            format!(
                                "discrete brane with {} points; 0-manifold proposition agrees",
                                space.point_count()
                            ),
                        );
                    }
                }
            }
        }
    }
    Ok(report)
}

fn build_pndp(data: &PndpData) -> Vec<PndpSpec> {
    data.specs
        .iter()
        .map(|(id, b1, b2, fiber, rank)| PndpSpec::new(id, *b1, *b2, *fiber, *rank))
        .collect()
}

/// Small adapter so string errors thread through `and_then` chains.
struct CliErrorText(String);
