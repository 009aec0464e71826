//! Exact integer linear algebra over Z^n.
//!
//! Vectors are stored as `Vec<i64>` with checked arithmetic (overflow panics
//! instead of wrapping); every matrix kernel (echelon forms, Smith normal form,
//! kernels, inverses) runs over arbitrary-precision integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type LatticeVector = Vec<i64>;
pub type BigMatrix = Vec<Vec<BigInt>>;

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0i64, |acc, (x, y)| {
        acc.checked_add(x.checked_mul(*y).expect("lattice overflow"))
            .expect("lattice overflow")
    })
}

pub fn add(a: &[i64], b: &[i64]) -> LatticeVector {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).expect("lattice overflow"))
        .collect()
}

pub fn sub(a: &[i64], b: &[i64]) -> LatticeVector {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_sub(*y).expect("lattice overflow"))
        .collect()
}

pub fn scale(k: i64, a: &[i64]) -> LatticeVector {
    a.iter()
        .map(|x| x.checked_mul(k).expect("lattice overflow"))
        .collect()
}

pub fn neg(a: &[i64]) -> LatticeVector {
    scale(-1, a)
}

pub fn is_zero(a: &[i64]) -> bool {
    a.iter().all(|&x| x == 0)
}

pub fn unit(n: usize, i: usize) -> LatticeVector {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Divides out the gcd of the coordinates; the zero vector is returned as is.
pub fn primitive(a: &[i64]) -> LatticeVector {
    let g = a.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        a.to_vec()
    } else {
        a.iter().map(|x| x / g).collect()
    }
}

pub fn to_big(a: &[i64]) -> Vec<BigInt> {
    a.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn from_big(a: &[BigInt]) -> LatticeVector {
    a.iter()
        .map(|x| x.to_i64().expect("lattice coordinate exceeds 64 bits"))
        .collect()
}

pub fn big_matrix(rows: &[LatticeVector]) -> BigMatrix {
    rows.iter().map(|r| to_big(r)).collect()
}

pub fn big_primitive(a: &[BigInt]) -> Vec<BigInt> {
    let g = a.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        a.to_vec()
    } else {
        a.iter().map(|x| x / &g).collect()
    }
}

pub fn big_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> BigMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn transpose(m: &BigMatrix, cols: usize) -> BigMatrix {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Row-style Hermite normal form of the lattice spanned by `rows` (vectors in
/// Z^n). Returns a basis in echelon form with positive pivots and reduced
/// entries above each pivot; the zero rows are dropped.
pub fn hermite_basis(rows: &[Vec<BigInt>], n: usize) -> BigMatrix {
    let mut m: BigMatrix = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        if pivot_row >= m.len() {
            break;
        }
        // Euclid on column `col` among rows pivot_row..
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..m.len() {
                if !m[r][col].is_zero()
                    && best.map_or(true, |b| m[r][col].abs() < m[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            m.swap(pivot_row, b);
            let mut done = true;
            for r in pivot_row + 1..m.len() {
                if !m[r][col].is_zero() {
                    let q = m[r][col].div_floor(&m[pivot_row][col]);
                    for c in col..n {
                        let t = &q * &m[pivot_row][c];
                        m[r][c] -= t;
                    }
                    if !m[r][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[pivot_row][col].is_zero() {
            continue;
        }
        if m[pivot_row][col].is_negative() {
            for c in 0..n {
                m[pivot_row][c] = -m[pivot_row][c].clone();
            }
        }
        for r in 0..pivot_row {
            let q = m[r][col].div_floor(&m[pivot_row][col]);
            if !q.is_zero() {
                for c in 0..n {
                    let t = &q * &m[pivot_row][c];
                    m[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    m.retain(|r| r.iter().any(|x| !x.is_zero()));
    m
}

/// Reduces `v` against a Hermite basis; zero remainder means membership in
/// the lattice.
pub fn hermite_reduce(basis: &BigMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let mut v = v.to_vec();
    for row in basis {
        let Some(p) = row.iter().position(|x| !x.is_zero()) else { continue };
        let q = v[p].div_floor(&row[p]);
        if !q.is_zero() {
            for (c, x) in row.iter().enumerate() {
                v[c] -= &q * x;
            }
        }
    }
    v
}

pub fn in_lattice(basis: &BigMatrix, v: &[i64]) -> bool {
    hermite_reduce(basis, &to_big(v)).iter().all(|x| x.is_zero())
}

pub fn rank(rows: &[LatticeVector], n: usize) -> usize {
    hermite_basis(&big_matrix(rows), n).len()
}

/// Smith normal form: `left · m · right = diag(d_1, d_2, …)` with
/// `d_1 | d_2 | ⋯`, non-negative `d_i`, and unimodular `left`, `right`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub left: BigMatrix,
    pub right: BigMatrix,
}

pub fn smith_normal_form(m: &[LatticeVector]) -> Snf {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    smith_big(&big_matrix(m), rows, cols)
}

pub fn smith_big(m: &BigMatrix, rows: usize, cols: usize) -> Snf {
    let mut a = m.clone();
    let mut left = identity(rows);
    let mut right = identity(cols);
    let k = rows.min(cols);
    let mut t = 0;
    while t < k {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        left.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        for row in right.iter_mut() {
            row.swap(t, bj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if !a[i][t].is_zero() {
                let q = a[i][t].div_floor(&a[t][t]);
                for j in 0..cols {
                    let x = &q * &a[t][j];
                    a[i][j] -= x;
                }
                for j in 0..rows {
                    let x = &q * &left[t][j];
                    left[i][j] -= x;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
        }
        for j in t + 1..cols {
            if !a[t][j].is_zero() {
                let q = a[t][j].div_floor(&a[t][t]);
                for i in 0..rows {
                    let x = &q * &a[i][t];
                    a[i][j] -= x;
                }
                for i in 0..cols {
                    let x = &q * &right[i][t];
                    right[i][j] -= x;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // divisibility: fold any offending row into row t
        let mut offender = None;
        'find: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    offender = Some(i);
                    break 'find;
                }
            }
        }
        if let Some(i) = offender {
            for j in 0..cols {
                let x = a[i][j].clone();
                a[t][j] += x;
            }
            for j in 0..rows {
                let x = left[i][j].clone();
                left[t][j] += x;
            }
            continue;
        }
        if a[t][t].is_negative() {
            for j in 0..cols {
                a[t][j] = -a[t][j].clone();
            }
            for j in 0..rows {
                left[t][j] = -left[t][j].clone();
            }
        }
        t += 1;
    }
    let diag = (0..k).map(|i| a[i][i].clone()).filter(|d| !d.is_zero()).collect();
    Snf { diag, left, right }
}

/// Basis of the integer kernel `{ y ∈ Z^cols : m · y = 0 }`.
pub fn integer_kernel(m: &BigMatrix, cols: usize) -> BigMatrix {
    let rows = m.len();
    let snf = smith_big(m, rows, cols);
    let r = snf.diag.len();
    (r..cols)
        .map(|j| (0..cols).map(|i| snf.right[i][j].clone()).collect())
        .collect()
}

/// Basis of the saturated lattice orthogonal to all `rows` in Z^n.
pub fn orthogonal_complement(rows: &[LatticeVector], n: usize) -> Vec<LatticeVector> {
    let m = big_matrix(rows);
    let ker = integer_kernel(&m, n);
    hermite_basis(&ker, n).iter().map(|r| from_big(r)).collect()
}

/// Exact inverse of a square integer matrix over Q, `None` if singular.
pub fn rational_inverse(m: &BigMatrix) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..2 * n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(m: &BigMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let snf = smith_big(m, n, n);
    if snf.diag.len() < n {
        return BigInt::zero();
    }
    let prod: BigInt = snf.diag.iter().product();
    let dl = unimodular_sign(&snf.left);
    let dr = unimodular_sign(&snf.right);
    prod * dl * dr
}

/// Determinant of a unimodular matrix (±1) via rational elimination.
fn unimodular_sign(m: &BigMatrix) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap(c, p);
            det = -det;
        }
        det = &det * &a[c][c];
        for r in c + 1..n {
            if !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
            }
        }
    }
    det.to_integer()
}

/// The lattice spanned by the rows, as a reduced basis in i64 coordinates.
pub fn lattice_basis(rows: &[LatticeVector], n: usize) -> Vec<LatticeVector> {
    hermite_basis(&big_matrix(rows), n).iter().map(|r| from_big(r)).collect()
}

/// Coordinates of `v` in terms of the given independent rows, if `v` is in
/// their rational span with integer coefficients.
pub fn lattice_coords(basis: &[LatticeVector], v: &[i64]) -> Option<LatticeVector> {
    let k = basis.len();
    let n = v.len();
    if k == 0 {
        return if is_zero(v) { Some(vec![]) } else { None };
    }
    // Solve y · B = v over Q via the normal equations on a pivot subset.
    let b = big_matrix(basis);
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|c| {
            let mut row: Vec<BigRational> = (0..k).map(|r| BigRational::from_integer(b[r][c].clone())).collect();
            row.push(BigRational::from_integer(BigInt::from(v[c])));
            row
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..=k {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    if (r..n).any(|i| !a[i][k].is_zero()) {
        return None;
    }
    let mut y = vec![0i64; k];
    for (i, &c) in piv_cols.iter().enumerate() {
        if !a[i][k].is_integer() {
            return None;
        }
        y[c] = a[i][k].to_integer().to_i64()?;
    }
    Some(y)
}

/// Some integer vector `c` with `Σ c_k rows[k] = v`, if one exists. The
/// rows need not be independent.
pub fn integer_solution(rows: &[LatticeVector], v: &[i64]) -> Option<LatticeVector> {
    let k = rows.len();
    let n = v.len();
    if k == 0 {
        return if is_zero(v) { Some(vec![]) } else { None };
    }
    // left · G · right = D, so c · G = v becomes y · D = v · right with y = c · left⁻¹.
    let snf = smith_normal_form(rows);
    let vr: Vec<BigInt> = (0..n).map(|j| (0..n).map(|i| BigInt::from(v[i]) * &snf.right[i][j]).sum()).collect();
    let mut y = vec![BigInt::zero(); k];
    for (j, x) in vr.iter().enumerate() {
        let d = snf.diag.get(j).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            if !x.is_zero() {
                return None;
            }
        } else {
            let (q, r) = x.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            y[j] = q;
        }
    }
    let c: Vec<BigInt> = (0..k).map(|j| (0..k).map(|i| &y[i] * &snf.left[i][j]).sum()).collect();
    c.iter().map(|x| x.to_i64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_solution_handles_dependent_rows() {
        let rows = vec![vec![1, 0], vec![1, 1], vec![1, 2]];
        let c = integer_solution(&rows, &[3, 7]).unwrap();
        let s = (0..3).fold(vec![0, 0], |acc, i| add(&acc, &scale(c[i], &rows[i])));
        assert_eq!(s, vec![3, 7]);
        assert_eq!(integer_solution(&[vec![2, 0]], &[1, 0]), None);
        assert_eq!(integer_solution(&[vec![2, 0]], &[2, 1]), None);
    }
    use proptest::prelude::*;

    fn check_snf(m: &[LatticeVector]) {
        let snf = smith_normal_form(m);
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let prod = mat_mul(&mat_mul(&snf.left, &big_matrix(m)), &snf.right);
        for i in 0..rows {
            for j in 0..cols {
                let expect = if i == j && i < snf.diag.len() { snf.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(prod[i][j], expect, "entry ({i},{j}) of {m:?}");
            }
        }
        for w in snf.diag.windows(2) {
            assert!((&w[1] % &w[0]).is_zero());
        }
        assert_eq!(determinant(&snf.left).abs(), BigInt::one());
        assert_eq!(determinant(&snf.right).abs(), BigInt::one());
    }

    #[test]
    fn snf_small_examples() {
        let d = |m: Vec<LatticeVector>| -> Vec<i64> {
            check_snf(&m);
            smith_normal_form(&m).diag.iter().map(|x| x.to_i64().unwrap()).collect()
        };
        assert_eq!(d(vec![vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(d(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]), vec![1, 1, 1]);
        assert_eq!(d(vec![vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert!(smith_normal_form(&[]).diag.is_empty());
    }

    #[test]
    fn kernel_and_complement() {
        let k = orthogonal_complement(&[vec![1, 1, 0]], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(dot(v, &[1, 1, 0]), 0);
        }
        let k = orthogonal_complement(&[vec![2, 4]], 2);
        assert_eq!(k.len(), 1);
        assert_eq!(dot(&k[0], &[2, 4]), 0);
        assert_eq!(primitive(&k[0]), k[0]);
    }

    #[test]
    fn hermite_membership() {
        let b = hermite_basis(&big_matrix(&[vec![2, 0], vec![0, 3], vec![2, 3]]), 2);
        assert!(in_lattice(&b, &[4, 3]));
        assert!(!in_lattice(&b, &[1, 0]));
        assert_eq!(lattice_coords(&[vec![1, 1], vec![0, 2]], &[3, 7]), Some(vec![3, 2]));
        assert_eq!(lattice_coords(&[vec![1, 1], vec![0, 2]], &[3, 4]), None);
    }

    proptest! {
        #[test]
        fn snf_reconstructs(rows in 0usize..4, cols in 0usize..4, seed in prop::collection::vec(-9i64..10, 16)) {
            let m: Vec<LatticeVector> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 4 + j]).collect()).collect();
            check_snf(&m);
        }

        #[test]
        fn determinant_matches_product_of_diagonal(seed in prop::collection::vec(-5i64..6, 9)) {
            let m: Vec<LatticeVector> = seed.chunks(3).map(|c| c.to_vec()).collect();
            let snf = smith_normal_form(&m);
            let d = determinant(&big_matrix(&m));
            let p: BigInt = if snf.diag.len() == 3 { snf.diag.iter().product() } else { BigInt::zero() };
            prop_assert_eq!(d.abs(), p);
        }
    }
}
