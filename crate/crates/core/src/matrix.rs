//! Dense integer matrices and the exact linear algebra the rest of the
//! crate is built on: Smith normal form over the integers, Gaussian
//! elimination mod p, kernels, lattice membership and solving.
//!
//! Entries are `i128`. Inputs are desk-scale (a few hundred rows at most),
//! so coefficient growth during elimination stays far below the `i128`
//! range; debug builds additionally trap on overflow.

use std::fmt;

use thiserror::Error;

/// Coefficient ring for exact computations: the integers, or the field
/// of integers mod a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingTag {
    /// The ring of integers.
    Int,
    /// Integers mod p, p prime.
    Mod(u32),
}

impl RingTag {
    /// Reduce an entry to its canonical representative.
    pub fn normalize(self, x: i128) -> i128 {
        match self {
            RingTag::Int => x,
            RingTag::Mod(p) => x.rem_euclid(p as i128),
        }
    }

    pub fn is_field(self) -> bool {
        matches!(self, RingTag::Mod(_))
    }
}

impl fmt::Display for RingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingTag::Int => write!(f, "z"),
            RingTag::Mod(p) => write!(f, "zmod:{p}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0} is not prime")]
    NotPrime(u32),
}

/// Row-major dense matrix over the integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<i128>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat({}x{})[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = i128;
    fn index(&self, (r, c): (usize, usize)) -> &i128 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i128 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i128>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<i128>) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn col(&self, c: usize) -> Vec<i128> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[i128]) {
        assert_eq!(v.len(), self.rows);
        for r in 0..self.rows {
            self[(r, c)] = v[r];
        }
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "mul shape");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i128]) -> Vec<i128> {
        assert_eq!(self.cols, v.len(), "mul_vec shape");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Mat {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, k: i128) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows, "hcat shape");
        let mut out = Mat::zeros(self.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
            for c in 0..rhs.cols {
                out[(r, self.cols + c)] = rhs[(r, c)];
            }
        }
        out
    }

    /// Block-diagonal sum `diag(self, rhs)`.
    pub fn block_diag(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..rhs.rows {
            for c in 0..rhs.cols {
                out[(self.rows + r, self.cols + c)] = rhs[(r, c)];
            }
        }
        out
    }

    /// Keep the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.rows, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for r in 0..self.rows {
                out[(r, j)] = self[(r, c)];
            }
        }
        out
    }

    pub fn reduce(&self, ring: RingTag) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| ring.normalize(x)).collect(),
        }
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_inverse(a: i128, p: i128) -> i128 {
    // extended Euclid; a is nonzero mod p, p prime
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "not invertible mod p");
    t.rem_euclid(p)
}

/// Smith normal form decomposition `d = u * a * v` with `u`, `v`
/// unimodular. Inverses are tracked alongside so unimodularity is
/// certified by exact multiplication rather than determinants.
#[derive(Clone, Debug)]
pub struct Smith {
    pub d: Mat,
    pub u: Mat,
    pub v: Mat,
    pub u_inv: Mat,
    pub v_inv: Mat,
    /// Nonzero diagonal entries, each dividing the next.
    pub invariant_factors: Vec<i128>,
    pub rank: usize,
}

struct SnfState {
    a: Mat,
    u: Mat,
    u_inv: Mat,
    v: Mat,
    v_inv: Mat,
}

impl SnfState {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.a.cols() {
            let t = self.a[(i, c)];
            self.a[(i, c)] = self.a[(j, c)];
            self.a[(j, c)] = t;
        }
        for c in 0..self.u.cols() {
            let t = self.u[(i, c)];
            self.u[(i, c)] = self.u[(j, c)];
            self.u[(j, c)] = t;
        }
        // inverse move: swap columns i,j of u_inv
        for r in 0..self.u_inv.rows() {
            let t = self.u_inv[(r, i)];
            self.u_inv[(r, i)] = self.u_inv[(r, j)];
            self.u_inv[(r, j)] = t;
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.a.rows() {
            let t = self.a[(r, i)];
            self.a[(r, i)] = self.a[(r, j)];
            self.a[(r, j)] = t;
        }
        for r in 0..self.v.rows() {
            let t = self.v[(r, i)];
            self.v[(r, i)] = self.v[(r, j)];
            self.v[(r, j)] = t;
        }
        for c in 0..self.v_inv.cols() {
            let t = self.v_inv[(i, c)];
            self.v_inv[(i, c)] = self.v_inv[(j, c)];
            self.v_inv[(j, c)] = t;
        }
    }

    /// row[i] += k * row[j]
    fn add_row(&mut self, i: usize, j: usize, k: i128) {
        if k == 0 {
            return;
        }
        for c in 0..self.a.cols() {
            let t = self.a[(j, c)];
            self.a[(i, c)] += k * t;
        }
        for c in 0..self.u.cols() {
            let t = self.u[(j, c)];
            self.u[(i, c)] += k * t;
        }
        // inverse move: col[j] -= k * col[i] of u_inv
        for r in 0..self.u_inv.rows() {
            let t = self.u_inv[(r, i)];
            self.u_inv[(r, j)] -= k * t;
        }
    }

    /// col[i] += k * col[j]
    fn add_col(&mut self, i: usize, j: usize, k: i128) {
        if k == 0 {
            return;
        }
        for r in 0..self.a.rows() {
            let t = self.a[(r, j)];
            self.a[(r, i)] += k * t;
        }
        for r in 0..self.v.rows() {
            let t = self.v[(r, j)];
            self.v[(r, i)] += k * t;
        }
        for c in 0..self.v_inv.cols() {
            let t = self.v_inv[(i, c)];
            self.v_inv[(j, c)] -= k * t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.a.cols() {
            self.a[(i, c)] = -self.a[(i, c)];
        }
        for c in 0..self.u.cols() {
            self.u[(i, c)] = -self.u[(i, c)];
        }
        for r in 0..self.u_inv.rows() {
            self.u_inv[(r, i)] = -self.u_inv[(r, i)];
        }
    }
}

/// Smith normal form of an integer matrix.
pub fn smith_normal_form(m: &Mat) -> Smith {
    let (rows, cols) = (m.rows(), m.cols());
    let mut st = SnfState {
        a: m.clone(),
        u: Mat::identity(rows),
        u_inv: Mat::identity(rows),
        v: Mat::identity(cols),
        v_inv: Mat::identity(cols),
    };

    let n = rows.min(cols);
    let mut k = 0;
    while k < n {
        // smallest nonzero |entry| in the trailing block as pivot
        let mut pivot: Option<(usize, usize)> = None;
        for r in k..rows {
            for c in k..cols {
                let x = st.a[(r, c)].abs();
                if x != 0 && pivot.is_none_or(|(pr, pc)| x < st.a[(pr, pc)].abs()) {
                    pivot = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        st.swap_rows(k, pr);
        st.swap_cols(k, pc);

        // clear row and column k; restart if a remainder shrinks the pivot
        loop {
            let p = st.a[(k, k)];
            let mut dirty = false;
            for r in k + 1..rows {
                let q = st.a[(r, k)].div_euclid(p);
                st.add_row(r, k, -q);
                if st.a[(r, k)] != 0 {
                    // nonzero remainder strictly smaller than |p|
                    st.swap_rows(k, r);
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            for c in k + 1..cols {
                let q = st.a[(k, c)].div_euclid(p);
                st.add_col(c, k, -q);
                if st.a[(k, c)] != 0 {
                    st.swap_cols(k, c);
                    dirty = true;
                    break;
                }
            }
            if !dirty {
                break;
            }
        }

        // pivot must divide the whole trailing block
        let p = st.a[(k, k)];
        let mut offender = None;
        'scan: for r in k + 1..rows {
            for c in k + 1..cols {
                if st.a[(r, c)] % p != 0 {
                    offender = Some(r);
                    break 'scan;
                }
            }
        }
        if let Some(r) = offender {
            st.add_row(k, r, 1);
            continue; // redo column k
        }

        if st.a[(k, k)] < 0 {
            st.negate_row(k);
        }
        k += 1;
    }

    let rank = (0..n).take_while(|&i| st.a[(i, i)] != 0).count();
    let invariant_factors = (0..rank).map(|i| st.a[(i, i)]).collect();
    Smith {
        d: st.a,
        u: st.u,
        v: st.v,
        u_inv: st.u_inv,
        v_inv: st.v_inv,
        invariant_factors,
        rank,
    }
}

/// Rank over the given ring.
pub fn rank(ring: RingTag, m: &Mat) -> usize {
    match ring {
        RingTag::Int => smith_normal_form(m).rank,
        RingTag::Mod(p) => row_echelon_mod(m, p as i128).1.len(),
    }
}

/// Row echelon form mod p. Returns the reduced matrix and pivot columns.
fn row_echelon_mod(m: &Mat, p: i128) -> (Mat, Vec<usize>) {
    let mut a = m.reduce(RingTag::Mod(p as u32));
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| a[(i, c)] % p != 0) else {
            continue;
        };
        for j in 0..cols {
            let t = a[(r, j)];
            a[(r, j)] = a[(pr, j)];
            a[(pr, j)] = t;
        }
        let inv = mod_inverse(a[(r, c)], p);
        for j in 0..cols {
            a[(r, j)] = (a[(r, j)] * inv).rem_euclid(p);
        }
        for i in 0..rows {
            if i != r && a[(i, c)] != 0 {
                let f = a[(i, c)];
                for j in 0..cols {
                    a[(i, j)] = (a[(i, j)] - f * a[(r, j)]).rem_euclid(p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the kernel of `m` as matrix columns, over the given ring.
/// Over the integers this is a lattice basis (from the SNF right
/// transform); over a field a vector space basis.
pub fn kernel_basis(ring: RingTag, m: &Mat) -> Mat {
    match ring {
        RingTag::Int => {
            let s = smith_normal_form(m);
            let cols: Vec<usize> = (s.rank..m.cols()).collect();
            s.v.select_cols(&cols)
        }
        RingTag::Mod(p) => {
            let p = p as i128;
            let (e, pivots) = row_echelon_mod(m, p);
            let cols = m.cols();
            let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
            let mut basis = Mat::zeros(cols, free.len());
            for (j, &fc) in free.iter().enumerate() {
                basis[(fc, j)] = 1;
                for (ri, &pc) in pivots.iter().enumerate() {
                    basis[(pc, j)] = (-e[(ri, fc)]).rem_euclid(p);
                }
            }
            basis
        }
    }
}

/// One solution of `m x = b` over the ring, if any.
pub fn solve(ring: RingTag, m: &Mat, b: &[i128]) -> Option<Vec<i128>> {
    assert_eq!(b.len(), m.rows(), "solve shape");
    match ring {
        RingTag::Int => {
            let s = smith_normal_form(m);
            let ub = s.u.mul_vec(b);
            let mut y = vec![0i128; m.cols()];
            for i in 0..m.rows() {
                let d = if i < s.rank { s.d[(i, i)] } else { 0 };
                if d == 0 {
                    if ub[i] != 0 {
                        return None;
                    }
                } else {
                    if ub[i] % d != 0 {
                        return None;
                    }
                    y[i] = ub[i] / d;
                }
            }
            Some(s.v.mul_vec(&y))
        }
        RingTag::Mod(p) => {
            let p = p as i128;
            let aug = m.hcat(&Mat::from_flat(
                b.len(),
                1,
                b.iter().map(|&x| x.rem_euclid(p)).collect(),
            ));
            let (e, pivots) = row_echelon_mod(&aug, p);
            // inconsistent iff a pivot lands in the augmented column
            if pivots.contains(&m.cols()) {
                return None;
            }
            let mut x = vec![0i128; m.cols()];
            for (ri, &pc) in pivots.iter().enumerate() {
                x[pc] = e[(ri, m.cols())];
            }
            Some(x)
        }
    }
}

/// Does `v` lie in the column span (lattice over Z, subspace over F_p)
/// of `m`?
pub fn in_column_span(ring: RingTag, m: &Mat, v: &[i128]) -> bool {
    solve(ring, m, v).is_some()
}

/// Is every column of `sub` in the column span of `ambient`?
pub fn columns_in_span(ring: RingTag, ambient: &Mat, sub: &Mat) -> bool {
    (0..sub.cols()).all(|c| in_column_span(ring, ambient, &sub.col(c)))
}

/// Column spans equal as subgroups/subspaces of the ambient free module.
pub fn same_column_span(ring: RingTag, a: &Mat, b: &Mat) -> bool {
    assert_eq!(a.rows(), b.rows(), "span shape");
    columns_in_span(ring, a, b) && columns_in_span(ring, b, a)
}

/// Canonical representative of `v` modulo the column span of `rel`.
///
/// Over the integers the representative is reduced against the column
/// Hermite form of `rel`; over F_p against its column echelon form. Two
/// vectors are congruent mod the span iff their representatives agree,
/// which is what makes morphism identity in quotient modules decidable.
pub fn reduce_mod_span(ring: RingTag, rel: &Mat, v: &[i128]) -> Vec<i128> {
    assert_eq!(rel.rows(), v.len(), "reduce shape");
    let mut v: Vec<i128> = v.iter().map(|&x| ring.normalize(x)).collect();
    if rel.cols() == 0 {
        return v;
    }
    match ring {
        RingTag::Int => {
            let h = column_hermite(rel);
            // pivots of h are strictly increasing in row index
            for c in 0..h.cols() {
                let Some(pr) = (0..h.rows()).find(|&r| h[(r, c)] != 0) else {
                    continue;
                };
                let p = h[(pr, c)];
                let q = v[pr].div_euclid(p);
                if q != 0 {
                    for r in 0..h.rows() {
                        v[r] -= q * h[(r, c)];
                    }
                }
            }
            v
        }
        RingTag::Mod(p) => {
            let p = p as i128;
            let (e, pivots) = row_echelon_mod(&rel.transpose(), p);
            // rows of e span the row space of rel^T = column space of rel
            for (ri, &pc) in pivots.iter().enumerate() {
                let f = v[pc].rem_euclid(p);
                if f != 0 {
                    for j in 0..v.len() {
                        v[j] = (v[j] - f * e[(ri, j)]).rem_euclid(p);
                    }
                }
            }
            v
        }
    }
}

/// Column-style Hermite normal form: unimodular column operations only,
/// result has staircase columns with positive pivots and entries below
/// each pivot reduced. Zero columns are dropped.
pub fn column_hermite(m: &Mat) -> Mat {
    let rows = m.rows();
    let mut cols: Vec<Vec<i128>> = (0..m.cols()).map(|c| m.col(c)).collect();
    let mut fixed = 0;
    for r in 0..rows {
        // gcd-reduce entries of row r across unfixed columns
        loop {
            let mut best: Option<usize> = None;
            for (ci, col) in cols.iter().enumerate().skip(fixed) {
                if col[r] != 0 && best.is_none_or(|b| col[r].abs() < cols[b][r].abs()) {
                    best = Some(ci);
                }
            }
            let Some(b) = best else { break };
            cols.swap(fixed, b);
            let p = cols[fixed][r];
            let mut all_zero = true;
            for ci in fixed + 1..cols.len() {
                let q = cols[ci][r].div_euclid(p);
                if q != 0 {
                    for rr in 0..rows {
                        let t = cols[fixed][rr];
                        cols[ci][rr] -= q * t;
                    }
                }
                if cols[ci][r] != 0 {
                    all_zero = false;
                }
            }
            if all_zero {
                break;
            }
        }
        if fixed < cols.len() && cols[fixed][r] != 0 {
            if cols[fixed][r] < 0 {
                for rr in 0..rows {
                    cols[fixed][rr] = -cols[fixed][rr];
                }
            }
            // reduce earlier columns' entries in this row
            let p = cols[fixed][r];
            for ci in 0..fixed {
                let q = cols[ci][r].div_euclid(p);
                if q != 0 {
                    for rr in 0..rows {
                        let t = cols[fixed][rr];
                        cols[ci][rr] -= q * t;
                    }
                }
            }
            fixed += 1;
        }
    }
    cols.truncate(fixed);
    let mut out = Mat::zeros(rows, fixed);
    for (ci, col) in cols.iter().enumerate() {
        out.set_col(ci, col);
    }
    out
}

/// Determinant by Bareiss fraction-free elimination. Exact; intended for
/// small matrices (tests and certificates).
pub fn determinant(m: &Mat) -> i128 {
    assert_eq!(m.rows(), m.cols(), "determinant of non-square");
    let n = m.rows();
    if n == 0 {
        return 1;
    }
    let mut a = m.clone();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[(k, k)] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[(r, k)] != 0) else {
                return 0;
            };
            for c in 0..n {
                let t = a[(k, c)];
                a[(k, c)] = a[(r, c)];
                a[(r, c)] = t;
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[(i, j)] = (a[(i, j)] * a[(k, k)] - a[(i, k)] * a[(k, j)]) / prev;
            }
            a[(i, k)] = 0;
        }
        prev = a[(k, k)];
    }
    sign * a[(n - 1, n - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snf_check(m: &Mat) -> Smith {
        let s = smith_normal_form(m);
        // d = u m v
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        // certified unimodularity
        assert_eq!(s.u.mul(&s.u_inv), Mat::identity(m.rows()));
        assert_eq!(s.v.mul(&s.v_inv), Mat::identity(m.cols()));
        // diagonal with successive divisibility
        for r in 0..s.d.rows() {
            for c in 0..s.d.cols() {
                if r != c {
                    assert_eq!(s.d[(r, c)], 0, "off-diagonal in SNF");
                }
            }
        }
        for w in s.invariant_factors.windows(2) {
            assert_eq!(w[1] % w[0], 0, "divisibility {w:?}");
        }
        s
    }

    #[test]
    fn snf_identity() {
        let s = snf_check(&Mat::identity(2));
        assert_eq!(s.invariant_factors, vec![1, 1]);
    }

    #[test]
    fn snf_zero() {
        let s = snf_check(&Mat::zeros(3, 2));
        assert!(s.invariant_factors.is_empty());
    }

    #[test]
    fn snf_2468() {
        // gcd of entries 2, |det| = 8, so factors must be (2, 4)
        let m = Mat::from_rows(vec![vec![2, 4], vec![6, 8]]);
        let s = snf_check(&m);
        assert_eq!(s.invariant_factors, vec![2, 4]);
        assert_eq!(determinant(&m).abs(), 8);
    }

    #[test]
    fn snf_needs_divisibility_fix() {
        let m = Mat::from_rows(vec![vec![2, 0], vec![0, 3]]);
        let s = snf_check(&m);
        assert_eq!(s.invariant_factors, vec![1, 6]);
    }

    #[test]
    fn kernel_and_solve_int() {
        // x + 2y + 3z = 0 over Z
        let m = Mat::from_rows(vec![vec![1, 2, 3]]);
        let k = kernel_basis(RingTag::Int, &m);
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
        let x = solve(RingTag::Int, &m, &[6]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![6]);
        // 2x = 3 has no integer solution
        let m2 = Mat::from_rows(vec![vec![2]]);
        assert!(solve(RingTag::Int, &m2, &[3]).is_none());
        assert!(solve(RingTag::Int, &m2, &[4]).is_some());
    }

    #[test]
    fn kernel_and_solve_mod() {
        let ring = RingTag::Mod(3);
        let m = Mat::from_rows(vec![vec![1, 2], vec![2, 4]]);
        let k = kernel_basis(ring, &m);
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).reduce(ring).is_zero());
        // consistent system
        let x = solve(ring, &m, &[1, 2]).unwrap();
        let mx = m.mul_vec(&x);
        assert_eq!(ring.normalize(mx[0]), 1);
        assert_eq!(ring.normalize(mx[1]), 2);
        // inconsistent system
        assert!(solve(ring, &m, &[1, 1]).is_none());
    }

    #[test]
    fn span_and_reduce() {
        let rel = Mat::from_rows(vec![vec![0], vec![2]]);
        // (0, 2) is in the span, (0, 1) is not
        assert!(in_column_span(RingTag::Int, &rel, &[0, 2]));
        assert!(!in_column_span(RingTag::Int, &rel, &[0, 1]));
        // reduction mod the span is canonical
        assert_eq!(reduce_mod_span(RingTag::Int, &rel, &[0, 5]), vec![0, 1]);
        assert_eq!(reduce_mod_span(RingTag::Int, &rel, &[0, -1]), vec![0, 1]);
        assert_eq!(reduce_mod_span(RingTag::Int, &rel, &[3, 4]), vec![3, 0]);
    }

    #[test]
    fn hermite_column_form() {
        let m = Mat::from_rows(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let h = column_hermite(&m);
        // same column lattice
        assert!(same_column_span(RingTag::Int, &m, &h));
    }

    /// Invariant-factor oracle: d_k = gcd(k-minors) / gcd((k-1)-minors).
    fn minors_gcd_factors(m: &Mat) -> Vec<i128> {
        use itertools::Itertools;
        fn gcd(a: i128, b: i128) -> i128 {
            let (mut a, mut b) = (a.abs(), b.abs());
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a
        }
        fn minor_det(m: &Mat, rows: &[usize], cols: &[usize]) -> i128 {
            let k = rows.len();
            let mut sub = Mat::zeros(k, k);
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    sub[(i, j)] = m[(r, c)];
                }
            }
            determinant(&sub)
        }
        let mut factors = Vec::new();
        let mut prev_gcd = 1i128;
        for k in 1..=m.rows().min(m.cols()) {
            let mut g = 0i128;
            for rows in (0..m.rows()).combinations(k) {
                for cols in (0..m.cols()).combinations(k) {
                    g = gcd(g, minor_det(m, &rows, &cols));
                }
            }
            if g == 0 {
                break;
            }
            factors.push(g / prev_gcd);
            prev_gcd = g;
        }
        factors
    }

    #[test]
    fn snf_matches_minors_oracle() {
        let cases = vec![
            Mat::from_rows(vec![vec![2, 4], vec![6, 8]]),
            Mat::from_rows(vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]),
            Mat::from_rows(vec![vec![6, 0, 0], vec![0, 10, 0], vec![0, 0, 15]]),
            Mat::from_rows(vec![vec![0, 2], vec![3, 0], vec![0, 0]]),
        ];
        for m in cases {
            let s = snf_check(&m);
            assert_eq!(s.invariant_factors, minors_gcd_factors(&m), "for {m:?}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_mat(max_dim: usize) -> impl Strategy<Value = Mat> {
            (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-9i128..=9, r * c)
                    .prop_map(move |data| Mat::from_flat(r, c, data))
            })
        }

        proptest! {
            #[test]
            fn snf_divisibility_and_transform(m in small_mat(4)) {
                let s = smith_normal_form(&m);
                prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
                prop_assert_eq!(s.u.mul(&s.u_inv), Mat::identity(m.rows()));
                prop_assert_eq!(s.v.mul(&s.v_inv), Mat::identity(m.cols()));
                for w in s.invariant_factors.windows(2) {
                    prop_assert_eq!(w[1] % w[0], 0);
                }
            }

            #[test]
            fn snf_det_product(m in small_mat(4)) {
                prop_assume!(m.rows() == m.cols());
                let det = determinant(&m);
                prop_assume!(det != 0);
                let s = smith_normal_form(&m);
                let prod: i128 = s.invariant_factors.iter().product();
                prop_assert_eq!(prod, det.abs());
            }

            #[test]
            fn kernel_is_kernel(m in small_mat(4)) {
                let k = kernel_basis(RingTag::Int, &m);
                prop_assert!(m.mul(&k).is_zero());
            }
        }
    }
}
