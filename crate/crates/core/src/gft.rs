//! Group-field expansion over a 4-dimensional chunk grid: fields on grid
//! sites decompose into per-region coefficient tensors indexed by four
//! group arguments, and reconstruct exactly.
//!
//! The expansion basis is indicator-times-character: each region pairs
//! its sites with character 4-tuples through a fixed bijection, which
//! turns the decomposition into an exact finite Fourier transform.
//! Supported groups are cyclic Z_N (functions sampled on elements) and
//! the circle truncated to N Fourier modes (functions carried by their
//! retained mode coefficients).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GftError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("region {region} has {sites} sites but the basis carries only {capacity} functions")]
    Resolution {
        region: usize,
        sites: usize,
        capacity: usize,
    },
}

/// The number of group arguments a field carries; fields on 3+1
/// dimensional chunks use four.
pub const GROUP_ARGUMENTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// The cyclic group Z_N.
    Cyclic(usize),
    /// The circle, truncated to N Fourier modes.
    Circle(usize),
}

/// A compact group at desk scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub kind: GroupKind,
}

impl GroupSpec {
    pub fn cyclic(n: usize) -> Result<Self, GftError> {
        if n == 0 {
            return Err(GftError::Structural("group order must be positive".into()));
        }
        Ok(GroupSpec {
            kind: GroupKind::Cyclic(n),
        })
    }

    pub fn circle(modes: usize) -> Result<Self, GftError> {
        if modes == 0 {
            return Err(GftError::Structural(
                "mode truncation must be positive".into(),
            ));
        }
        Ok(GroupSpec {
            kind: GroupKind::Circle(modes),
        })
    }

    /// Number of basis functions per group argument.
    pub fn size(&self) -> usize {
        match self.kind {
            GroupKind::Cyclic(n) | GroupKind::Circle(n) => n,
        }
    }

    /// Retained circle modes, symmetric around zero.
    pub fn circle_modes(&self) -> Vec<i64> {
        let n = self.size() as i64;
        (0..n).map(|j| j - n / 2).collect()
    }
}

/// Deterministic permutation-invariant sum: values are totally ordered
/// before accumulation, so reindexing the group leaves the result
/// bit-identical.
fn sorted_sum(values: &mut [Complex64]) -> Complex64 {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let re: f64 = values.iter().map(|v| v.re).sum();
    let im: f64 = values.iter().map(|v| v.im).sum();
    Complex64::new(re, im)
}

/// Normalized Haar integral of a function on one group: the average of
/// the element samples (cyclic), or the zero-mode coefficient (circle).
pub fn haar_integrate(group: GroupSpec, samples: &[Complex64]) -> Result<Complex64, GftError> {
    if samples.len() != group.size() {
        return Err(GftError::Structural(format!(
            "expected {} samples, got {}",
            group.size(),
            samples.len()
        )));
    }
    match group.kind {
        GroupKind::Cyclic(n) => {
            let mut vals = samples.to_vec();
            Ok(sorted_sum(&mut vals) / n as f64)
        }
        GroupKind::Circle(_) => {
            let zero_at = group
                .circle_modes()
                .iter()
                .position(|&m| m == 0)
                .expect("mode set contains zero");
            Ok(samples[zero_at])
        }
    }
}

/// Sample reindexing by a group shift `g -> h + g` (cyclic groups).
pub fn shift_samples(group: GroupSpec, samples: &[Complex64], h: usize) -> Vec<Complex64> {
    match group.kind {
        GroupKind::Cyclic(n) => (0..n).map(|g| samples[(h + g) % n]).collect(),
        GroupKind::Circle(_) => samples.to_vec(),
    }
}

/// A 4-dimensional grid of sites partitioned into regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChunkGrid {
    pub extents: [usize; 4],
    region_of: Vec<usize>,
    region_count: usize,
}

impl ChunkGrid {
    pub fn new(extents: [usize; 4], region_of: Vec<usize>) -> Result<Self, GftError> {
        let sites: usize = extents.iter().product();
        if sites == 0 {
            return Err(GftError::Structural("grid extents must be positive".into()));
        }
        if region_of.len() != sites {
            return Err(GftError::Structural(format!(
                "region assignment covers {} sites, grid has {sites}",
                region_of.len()
            )));
        }
        let region_count = region_of.iter().max().map_or(0, |&m| m + 1);
        Ok(ChunkGrid {
            extents,
            region_of,
            region_count,
        })
    }

    /// One region covering the whole grid.
    pub fn uniform(extents: [usize; 4]) -> Result<Self, GftError> {
        let sites: usize = extents.iter().product();
        ChunkGrid::new(extents, vec![0; sites])
    }

    pub fn site_count(&self) -> usize {
        self.region_of.len()
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn region_of_site(&self, site: usize) -> usize {
        self.region_of[site]
    }

    /// Canonical site index: `x0` varies fastest.
    pub fn site_index(&self, x: [usize; 4]) -> usize {
        ((x[3] * self.extents[2] + x[2]) * self.extents[1] + x[1]) * self.extents[0] + x[0]
    }

    /// Sites of one region, in canonical order.
    pub fn region_sites(&self, region: usize) -> Vec<usize> {
        (0..self.site_count())
            .filter(|&s| self.region_of[s] == region)
            .collect()
    }
}

/// Per-region coefficient tensors over the group basis.
#[derive(Clone, Debug)]
pub struct GftField {
    pub group: GroupSpec,
    arity: usize,
    pub regions: Vec<Vec<Complex64>>,
}

impl GftField {
    pub fn new(group: GroupSpec, regions: Vec<Vec<Complex64>>) -> Result<Self, GftError> {
        let want = group.size().pow(GROUP_ARGUMENTS as u32);
        for (i, r) in regions.iter().enumerate() {
            if r.len() != want {
                return Err(GftError::Structural(format!(
                    "region {i} tensor has {} entries, expected {want}",
                    r.len()
                )));
            }
        }
        Ok(GftField {
            group,
            arity: GROUP_ARGUMENTS,
            regions,
        })
    }

    /// A tensor with a nonstandard number of group arguments; exists so
    /// the arity check has something to flag.
    pub fn with_arity(group: GroupSpec, arity: usize, region_count: usize) -> Self {
        let len = group.size().pow(arity as u32);
        GftField {
            group,
            arity,
            regions: vec![vec![Complex64::new(0.0, 0.0); len]; region_count],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

/// Number of group arguments of a field, with the conformance flag for
/// the 4-dimensional contract.
pub fn argument_count_check(field: &GftField) -> (usize, bool) {
    (field.arity, field.arity == GROUP_ARGUMENTS)
}

fn digits(mut j: usize, base: usize) -> [usize; 4] {
    let mut out = [0usize; 4];
    for d in out.iter_mut() {
        *d = j % base;
        j /= base;
    }
    out
}

/// Character pairing for a cyclic group: `ω^(k · g)` with `ω` the
/// primitive N-th root of unity.
fn cyclic_character(n: usize, k: &[usize; 4], g: &[usize; 4]) -> Complex64 {
    let dot: usize = k.iter().zip(g).map(|(a, b)| a * b).sum();
    let angle = 2.0 * std::f64::consts::PI * (dot % n) as f64 / n as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Decompose a real field on the grid into per-region coefficient
/// tensors. Coefficients of a region depend only on sites inside it, and
/// vanish for regions the field avoids.
pub fn gft_decompose(
    values: &[f64],
    grid: &ChunkGrid,
    group: GroupSpec,
) -> Result<GftField, GftError> {
    if values.len() != grid.site_count() {
        return Err(GftError::Structural(format!(
            "field carries {} values, grid has {} sites",
            values.len(),
            grid.site_count()
        )));
    }
    let n = group.size();
    let capacity = n.pow(GROUP_ARGUMENTS as u32);
    let mut regions = Vec::new();
    for region in 0..grid.region_count() {
        let sites = grid.region_sites(region);
        if sites.len() > capacity {
            return Err(GftError::Resolution {
                region,
                sites: sites.len(),
                capacity,
            });
        }
        let mut tensor = vec![Complex64::new(0.0, 0.0); capacity];
        match group.kind {
            GroupKind::Cyclic(_) => {
                for (j, &site) in sites.iter().enumerate() {
                    let k = digits(j, n);
                    if values[site] == 0.0 {
                        continue;
                    }
                    for (gi, slot) in tensor.iter_mut().enumerate() {
                        let g = digits(gi, n);
                        *slot += values[site] * cyclic_character(n, &k, &g).conj();
                    }
                }
            }
            GroupKind::Circle(_) => {
                // mode-coefficient representation: site j sits at its
                // mode 4-tuple
                for (j, &site) in sites.iter().enumerate() {
                    tensor[j] = Complex64::new(values[site], 0.0);
                }
            }
        }
        regions.push(tensor);
    }
    GftField::new(group, regions)
}

/// Evaluate the quadruple Haar pairing per site, inverting
/// [`gft_decompose`]. Exact for cyclic groups; for the circle the stored
/// mode coefficients are read back (truncation shows up only when the
/// coefficients came from a continuum function).
pub fn gft_reconstruct(
    field: &GftField,
    grid: &ChunkGrid,
    group: GroupSpec,
) -> Result<Vec<Complex64>, GftError> {
    if field.arity != GROUP_ARGUMENTS {
        return Err(GftError::Structural(format!(
            "field has {} group arguments, expected {GROUP_ARGUMENTS}",
            field.arity
        )));
    }
    if field.group != group {
        return Err(GftError::Structural("group mismatch".into()));
    }
    if field.regions.len() != grid.region_count() {
        return Err(GftError::Structural(format!(
            "field has {} regions, grid has {}",
            field.regions.len(),
            grid.region_count()
        )));
    }
    let n = group.size();
    let capacity = n.pow(GROUP_ARGUMENTS as u32);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.site_count()];
    for region in 0..grid.region_count() {
        let tensor = &field.regions[region];
        if tensor.len() != capacity {
            return Err(GftError::Structural(format!(
                "region {region} tensor has {} entries, expected {capacity}",
                tensor.len()
            )));
        }
        let sites = grid.region_sites(region);
        if sites.len() > capacity {
            return Err(GftError::Resolution {
                region,
                sites: sites.len(),
                capacity,
            });
        }
        match group.kind {
            GroupKind::Cyclic(_) => {
                let norm = (capacity as f64).recip();
                for (j, &site) in sites.iter().enumerate() {
                    let k = digits(j, n);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (gi, coeff) in tensor.iter().enumerate() {
                        let g = digits(gi, n);
                        acc += coeff * cyclic_character(n, &k, &g);
                    }
                    out[site] = acc * norm;
                }
            }
            GroupKind::Circle(_) => {
                for (j, &site) in sites.iter().enumerate() {
                    out[site] = tensor[j];
                }
            }
        }
    }
    Ok(out)
}

/// Fourier coefficients of a function on the circle for the retained
/// modes, by uniform quadrature (exact for trigonometric polynomials of
/// degree below the quadrature size).
pub fn circle_project(f: impl Fn(f64) -> Complex64, group: GroupSpec) -> Vec<Complex64> {
    const QUADRATURE: usize = 2048;
    let modes = group.circle_modes();
    let mut coeffs = Vec::with_capacity(modes.len());
    for &m in &modes {
        let mut acc = Complex64::new(0.0, 0.0);
        for q in 0..QUADRATURE {
            let theta = 2.0 * std::f64::consts::PI * q as f64 / QUADRATURE as f64;
            let phase = Complex64::new((m as f64 * theta).cos(), -(m as f64 * theta).sin());
            acc += f(theta) * phase;
        }
        coeffs.push(acc / QUADRATURE as f64);
    }
    coeffs
}

/// Evaluate a retained-mode expansion at a point of the circle.
pub fn circle_eval(coeffs: &[Complex64], group: GroupSpec, theta: f64) -> Complex64 {
    let modes = group.circle_modes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&m, &c) in modes.iter().zip(coeffs) {
        let phase = Complex64::new((m as f64 * theta).cos(), (m as f64 * theta).sin());
        acc += c * phase;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn haar_constant_is_one() {
        let g = GroupSpec::cyclic(4).unwrap();
        let samples = vec![c(1.0, 0.0); 4];
        assert_eq!(haar_integrate(g, &samples).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn haar_of_nontrivial_character_is_zero() {
        // fourth roots of unity sum to zero exactly
        let g = GroupSpec::cyclic(4).unwrap();
        let samples = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert_eq!(haar_integrate(g, &samples).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn haar_shift_invariance_exhaustive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..=16usize {
            let g = GroupSpec::cyclic(n).unwrap();
            let samples: Vec<Complex64> = (0..n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let base = haar_integrate(g, &samples).unwrap();
            for h in 0..n {
                let shifted = shift_samples(g, &samples, h);
                let v = haar_integrate(g, &shifted).unwrap();
                assert_eq!(v, base, "shift by {h} on Z_{n}");
            }
        }
    }

    #[test]
    fn haar_sample_length_mismatch() {
        let g = GroupSpec::cyclic(4).unwrap();
        assert!(matches!(
            haar_integrate(g, &[c(1.0, 0.0)]),
            Err(GftError::Structural(_))
        ));
    }

    #[test]
    fn haar_circle_reads_zero_mode() {
        let g = GroupSpec::circle(5).unwrap();
        // modes -2..=2, zero mode at index 2
        let samples = vec![c(9.0, 0.0), c(8.0, 0.0), c(4.5, 0.0), c(7.0, 0.0), c(6.0, 0.0)];
        assert_eq!(haar_integrate(g, &samples).unwrap(), c(4.5, 0.0));
    }

    #[test]
    fn decompose_zero_field() {
        let grid = ChunkGrid::uniform([2, 2, 2, 2]).unwrap();
        let g = GroupSpec::cyclic(2).unwrap();
        let f = gft_decompose(&vec![0.0; 16], &grid, g).unwrap();
        assert!(f.regions[0].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn support_locality() {
        // two regions split along x3; field supported in region 0 only
        let extents = [2, 2, 2, 2];
        let region_of: Vec<usize> = (0..16).map(|s| if s < 8 { 0 } else { 1 }).collect();
        let grid = ChunkGrid::new(extents, region_of).unwrap();
        let g = GroupSpec::cyclic(2).unwrap();
        let mut values = vec![0.0; 16];
        values[3] = 2.5;
        let f = gft_decompose(&values, &grid, g).unwrap();
        assert!(f.regions[0].iter().any(|v| v.norm() > 0.0));
        assert!(f.regions[1].iter().all(|v| v.norm() == 0.0));

        // coefficients of region 0 unchanged by edits inside region 1
        let mut values2 = values.clone();
        values2[12] = -7.0;
        let f2 = gft_decompose(&values2, &grid, g).unwrap();
        assert_eq!(f.regions[0], f2.regions[0]);
    }

    #[test]
    fn roundtrip_random_field() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let grid = ChunkGrid::uniform([2, 2, 2, 2]).unwrap();
        let g = GroupSpec::cyclic(2).unwrap();
        let values: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = gft_decompose(&values, &grid, g).unwrap();
        let back = gft_reconstruct(&f, &grid, g).unwrap();
        for (orig, rec) in values.iter().zip(&back) {
            assert!((rec - c(*orig, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_delta_field() {
        let grid = ChunkGrid::uniform([2, 1, 1, 1]).unwrap();
        let g = GroupSpec::cyclic(3).unwrap();
        let values = vec![0.0, 1.0];
        let f = gft_decompose(&values, &grid, g).unwrap();
        let back = gft_reconstruct(&f, &grid, g).unwrap();
        for (orig, rec) in values.iter().zip(&back) {
            assert!((rec - c(*orig, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_circle_is_exact_on_grids() {
        let grid = ChunkGrid::uniform([2, 2, 1, 1]).unwrap();
        let g = GroupSpec::circle(2).unwrap();
        let values = vec![0.5, -1.5, 2.0, 0.25];
        let f = gft_decompose(&values, &grid, g).unwrap();
        let back = gft_reconstruct(&f, &grid, g).unwrap();
        for (orig, rec) in values.iter().zip(&back) {
            assert_eq!(*rec, c(*orig, 0.0));
        }
    }

    #[test]
    fn decomposition_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let grid = ChunkGrid::uniform([2, 2, 1, 1]).unwrap();
        let g = GroupSpec::cyclic(2).unwrap();
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (alpha, beta) = (2.5f64, -0.75f64);
        let combo: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let fa = gft_decompose(&a, &grid, g).unwrap();
        let fb = gft_decompose(&b, &grid, g).unwrap();
        let fc = gft_decompose(&combo, &grid, g).unwrap();
        for i in 0..fc.regions[0].len() {
            let want = fa.regions[0][i] * alpha + fb.regions[0][i] * beta;
            assert!((fc.regions[0][i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn inadequate_basis_names_the_region() {
        let grid = ChunkGrid::uniform([2, 2, 2, 2]).unwrap();
        let g = GroupSpec::cyclic(1).unwrap();
        match gft_decompose(&vec![1.0; 16], &grid, g) {
            Err(GftError::Resolution { region, sites, capacity }) => {
                assert_eq!(region, 0);
                assert_eq!(sites, 16);
                assert_eq!(capacity, 1);
            }
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn argument_count_contract() {
        let g = GroupSpec::cyclic(2).unwrap();
        let grid = ChunkGrid::uniform([2, 1, 1, 1]).unwrap();
        let f = gft_decompose(&[1.0, 2.0], &grid, g).unwrap();
        assert_eq!(argument_count_check(&f), (4, true));
        let odd = GftField::with_arity(g, 2, 1);
        assert_eq!(argument_count_check(&odd), (2, false));
        let empty = GftField::new(g, Vec::new()).unwrap();
        assert_eq!(argument_count_check(&empty), (4, true));
    }

    #[test]
    fn circle_truncation_error_non_increasing() {
        // a smooth function on the circle, projected at two truncations
        let f = |theta: f64| c((theta.cos()).exp(), 0.5 * (2.0 * theta).sin());
        let l2_err = |modes: usize| -> f64 {
            let g = GroupSpec::circle(modes).unwrap();
            let coeffs = circle_project(f, g);
            let mut err = 0.0;
            const SAMPLES: usize = 256;
            for q in 0..SAMPLES {
                let theta = 2.0 * std::f64::consts::PI * q as f64 / SAMPLES as f64;
                err += (circle_eval(&coeffs, g, theta) - f(theta)).norm_sqr();
            }
            (err / SAMPLES as f64).sqrt()
        };
        for n in [2usize, 4, 8, 16] {
            let coarse = l2_err(n);
            let fine = l2_err(2 * n);
            assert!(
                fine <= coarse + 1e-12,
                "error grew from {coarse} to {fine} at N = {n}"
            );
        }
    }
}
