//! Cross-module oracle checks: staircase commutativity against literal
//! path enumeration, K0 against a minors-gcd reducer, and the
//! exact-to-Waldhausen conversion on the integer hosts.

use std::collections::BTreeSet;

use ktc_core::cat::{check_commutes, Diagram, FinCategory, MorId};
use ktc_core::exact::{
    check_waldhausen_axioms, exact_to_waldhausen, full_field_category, int_permutation_category,
    mul2_extension_category, product_exact, sign_involution_category, ExactStructure, WaldHost,
};
use ktc_core::kth::{k0, nerve, s_construct, smith_normal_form, AbelianGroupPresentation};
use ktc_core::matrix::{determinant, Mat};

/// Literal path enumeration on an acyclic diagram: every directed path,
/// composed morphism by morphism.
fn brute_force_commutes(cat: &FinCategory, d: &Diagram) -> bool {
    fn dfs(
        cat: &FinCategory,
        d: &Diagram,
        start: usize,
        at: usize,
        acc: Option<MorId>,
        out: &mut Vec<Vec<BTreeSet<MorId>>>,
        depth: usize,
    ) {
        if depth > d.edges.len() {
            return;
        }
        for &(a, b, m) in &d.edges {
            if a != at {
                continue;
            }
            let composite = match acc {
                None => Some(m),
                Some(f) => cat.table_entry(m, f),
            };
            if let Some(c) = composite {
                out[start][b].insert(c);
                dfs(cat, d, start, b, Some(c), out, depth + 1);
            }
        }
    }
    let n = d.nodes.len();
    let mut table: Vec<Vec<BTreeSet<MorId>>> = vec![vec![Default::default(); n]; n];
    for s in 0..n {
        dfs(cat, d, s, s, None, &mut table, 0);
    }
    table.iter().all(|row| row.iter().all(|c| c.len() <= 1))
}

#[test]
fn staircase_diagrams_agree_with_path_enumeration() {
    let e = ExactStructure::with_full_sigma(full_field_category(2, 2).unwrap());
    let w = exact_to_waldhausen(&e).unwrap();
    let s = s_construct(WaldHost::Matrix(&e.host), &w, 2).unwrap();
    assert!(!s.staircases.is_empty());
    for st in &s.staircases {
        let d = st.diagram();
        let fix = check_commutes(e.host.cat(), &d).unwrap().commutes;
        let brute = brute_force_commutes(e.host.cat(), &d);
        assert!(fix, "fixpoint check must accept an emitted staircase");
        assert_eq!(fix, brute);
    }
}

#[test]
fn s3_over_tiny_host_commutes_and_nerve_is_simplicial() {
    let e = ExactStructure::with_full_sigma(full_field_category(2, 1).unwrap());
    let w = exact_to_waldhausen(&e).unwrap();
    let s = s_construct(WaldHost::Matrix(&e.host), &w, 3).unwrap();
    for st in &s.staircases {
        assert!(brute_force_commutes(e.host.cat(), &st.diagram()));
    }
    let omega = ktc_core::kth::weak_equiv_subcat(&w, &s).unwrap();
    let ns = nerve(&omega, 3).unwrap();
    assert!(ns.verify_identities().is_ok());
}

/// Invariant factors through gcds of k-minors, independent of the SNF
/// elimination path.
fn minors_gcd_factors(m: &Mat) -> (usize, Vec<i128>) {
    use itertools::Itertools;
    fn gcd(a: i128, b: i128) -> i128 {
        let (mut a, mut b) = (a.abs(), b.abs());
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let mut factors = Vec::new();
    let mut prev = 1i128;
    for k in 1..=m.rows().min(m.cols()) {
        let mut g = 0i128;
        for rows in (0..m.rows()).combinations(k) {
            for cols in (0..m.cols()).combinations(k) {
                let mut sub = Mat::zeros(k, k);
                for (i, &r) in rows.iter().enumerate() {
                    for (j, &c) in cols.iter().enumerate() {
                        sub[(i, j)] = m[(r, c)];
                    }
                }
                g = gcd(g, determinant(&sub));
            }
        }
        if g == 0 {
            break;
        }
        factors.push(g / prev);
        prev = g;
    }
    (factors.len(), factors)
}

/// Reduce a K0 presentation independently: deduplicate relation columns
/// (duplicates span nothing new), then run the minors-gcd oracle.
fn brute_reduce(g: &AbelianGroupPresentation) -> (usize, Vec<i128>) {
    let unique: BTreeSet<Vec<i128>> = (0..g.relations.cols())
        .map(|c| g.relations.col(c))
        .filter(|col| col.iter().any(|&x| x != 0))
        .collect();
    let mut m = Mat::zeros(g.generators, unique.len());
    for (c, col) in unique.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    let (rank, factors) = minors_gcd_factors(&m);
    (
        g.generators - rank,
        factors.into_iter().filter(|&f| f.abs() > 1).collect(),
    )
}

#[test]
fn k0_matches_brute_force_reducer() {
    // F2-spaces of rank <= 3: K0 = Z
    let e = ExactStructure::with_full_sigma(full_field_category(2, 3).unwrap());
    let g = k0(&e).unwrap();
    let nf = g.normal_form();
    let (free, torsion) = brute_reduce(&g);
    assert_eq!((nf.free_rank, nf.torsion.clone()), (free, torsion));
    assert_eq!(nf.free_rank, 1);
    assert!(nf.torsion.is_empty());

    // the product category: K0 = Z^2
    let f = ExactStructure::with_full_sigma(full_field_category(2, 1).unwrap());
    let p = product_exact(&f, &f).unwrap();
    let g = k0(&p).unwrap();
    let nf = g.normal_form();
    let (free, torsion) = brute_reduce(&g);
    assert_eq!((nf.free_rank, nf.torsion.clone()), (free, torsion));
    assert_eq!(nf.free_rank, 2);
}

#[test]
fn integer_hosts_pass_the_lemma() {
    let hosts = vec![
        mul2_extension_category().unwrap(),
        sign_involution_category().unwrap(),
        int_permutation_category(3).unwrap(),
    ];
    for host in hosts {
        let e = ExactStructure::with_full_sigma(host);
        let w = exact_to_waldhausen(&e).expect("exact axioms hold");
        let report = check_waldhausen_axioms(WaldHost::Matrix(&e.host), &w).unwrap();
        assert!(report.is_ok(), "{report}");
    }
}

#[test]
fn mul2_extension_k0_counts_unlinked_generators() {
    // no declared isomorphism identifies the two copies of Z, and the
    // extension relation [B] = [A] + [T] kills one generator
    let e = ExactStructure::with_full_sigma(mul2_extension_category().unwrap());
    let g = k0(&e).unwrap();
    let nf = g.normal_form();
    assert_eq!(nf.free_rank, 2);
    assert!(nf.torsion.is_empty());
}

#[test]
fn nerve_counts_powers_of_group_order() {
    // Z/3 as a one-object category: level m has 3^m simplices
    let cat = ktc_core::cat::CategoryBuilder::new()
        .object("x")
        .morphism("g", "x", "x")
        .morphism("h", "x", "x")
        .compose("g", "g", "h")
        .compose("h", "g", "id_x")
        .compose("g", "h", "id_x")
        .compose("h", "h", "g")
        .build()
        .unwrap();
    let ns = nerve(&cat, 3).unwrap();
    for (level, want) in [(0usize, 1usize), (1, 3), (2, 9), (3, 27)] {
        assert_eq!(ns.count(level), want);
    }
    assert!(ns.verify_identities().is_ok());
}

#[test]
fn snf_transforms_are_unimodular_certificates() {
    let m = Mat::from_rows(vec![vec![4, 6, 10], vec![2, 0, 8], vec![6, 6, 18]]);
    let s = smith_normal_form(&m);
    assert_eq!(s.u.mul(&m).mul(&s.v), s.d);
    assert_eq!(s.u.mul(&s.u_inv), Mat::identity(3));
    assert_eq!(s.v.mul(&s.v_inv), Mat::identity(3));
    assert_eq!(determinant(&s.u).abs(), 1);
    assert_eq!(determinant(&s.v).abs(), 1);
}
