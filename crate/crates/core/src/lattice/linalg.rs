//! Exact dense linear algebra over Z, Q and GF(2).
//!
//! Matrices are row-major `Vec<Vec<_>>`. Nothing here touches floating point.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{Int, Rat};

/// Determinant by fraction-free Bareiss elimination.
pub fn determinant(m: &[Vec<Int>]) -> Int {
    let n = m.len();
    if n == 0 {
        return Int::one();
    }
    let mut a: Vec<Vec<Int>> = m.to_vec();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Int::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Rank over Q.
pub fn rank(m: &[Vec<Int>]) -> usize {
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .map(|r| r.iter().cloned().map(Rat::from_integer).collect())
        .collect();
    row_echelon(&mut a)
}

fn row_echelon(a: &mut [Vec<Rat>]) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pivot = a[r][c].clone();
        for i in r + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &pivot;
            for j in c..cols {
                let d = &f * &a[r][j];
                a[i][j] -= d;
            }
        }
        r += 1;
    }
    r
}

/// Inertia `(positive, negative, null)` of a symmetric integer matrix,
/// computed by exact congruence diagonalization over Q.
pub fn inertia(gram: &[Vec<Int>]) -> (usize, usize, usize) {
    let n = gram.len();
    let mut a: Vec<Vec<Rat>> = gram
        .iter()
        .map(|r| r.iter().cloned().map(Rat::from_integer).collect())
        .collect();
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0;
    while k < n {
        // Bring a nonzero diagonal entry to position k.
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                symmetric_swap(&mut a, k, i);
            } else if let Some((i, j)) = first_offdiagonal(&a, k) {
                // e_i <- e_i + e_j makes the (i, i) entry 2 a_ij != 0.
                add_basis_vector(&mut a, i, j);
                symmetric_swap(&mut a, k, i);
            } else {
                break;
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k + 1..n {
                if a[k][j].is_zero() {
                    continue;
                }
                let d = &f * &a[k][j];
                a[i][j] -= d;
            }
            a[i][k] = Rat::zero();
        }
        for j in k + 1..n {
            a[k][j] = Rat::zero();
        }
        k += 1;
    }
    (pos, neg, n - pos - neg)
}

fn symmetric_swap(a: &mut [Vec<Rat>], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn first_offdiagonal(a: &[Vec<Rat>], from: usize) -> Option<(usize, usize)> {
    let n = a.len();
    (from..n).find_map(|i| (from..n).find(|&j| j != i && !a[i][j].is_zero()).map(|j| (i, j)))
}

/// Congruence by the elementary matrix replacing basis vector `i` with
/// `e_i + e_j`.
fn add_basis_vector(a: &mut [Vec<Rat>], i: usize, j: usize) {
    let n = a.len();
    let row_j = a[j].clone();
    for c in 0..n {
        a[i][c] += &row_j[c];
    }
    for r in 0..n {
        let v = a[r][j].clone();
        a[r][i] += v;
    }
}

/// Extended gcd with `s*a + t*b = g`, `g >= 0`.
fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// A basis of the saturated integer kernel `{x in Z^n : m x = 0}`.
///
/// Unimodular column operations bring `m` to column echelon form; the
/// trailing columns of the accumulated transform span the kernel over Z.
pub fn integer_kernel(m: &[Vec<Int>], n: usize) -> Vec<Vec<Int>> {
    let mut a: Vec<Vec<Int>> = m.to_vec();
    let mut u: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    let mut pc = 0;
    for r in 0..a.len() {
        if pc == n {
            break;
        }
        for j in pc + 1..n {
            if a[r][j].is_zero() {
                continue;
            }
            if a[r][pc].is_zero() {
                swap_cols(&mut a, pc, j);
                swap_cols(&mut u, pc, j);
                continue;
            }
            let x = a[r][pc].clone();
            let y = a[r][j].clone();
            let (g, s, t) = ext_gcd(&x, &y);
            let (xg, yg) = (&x / &g, &y / &g);
            combine_cols(&mut a, pc, j, &s, &t, &yg, &xg);
            combine_cols(&mut u, pc, j, &s, &t, &yg, &xg);
        }
        if !a[r][pc].is_zero() {
            pc += 1;
        }
    }
    (pc..n).map(|c| u.iter().map(|row| row[c].clone()).collect()).collect()
}

fn swap_cols(m: &mut [Vec<Int>], i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

/// `col_a <- s col_a + t col_b`, `col_b <- -yg col_a + xg col_b` (determinant 1).
fn combine_cols(m: &mut [Vec<Int>], a: usize, b: usize, s: &Int, t: &Int, yg: &Int, xg: &Int) {
    for row in m.iter_mut() {
        let (ca, cb) = (row[a].clone(), row[b].clone());
        row[a] = s * &ca + t * &cb;
        row[b] = xg * &cb - yg * &ca;
    }
}

/// Row-style Hermite normal form of a set of integer row vectors; spans the
/// same Z-module. Zero rows are dropped.
pub fn hermite_rows(rows: Vec<Vec<Int>>) -> Vec<Vec<Int>> {
    let mut a = rows;
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        // gcd-combine everything below r into row r.
        for i in r + 1..a.len() {
            if a[i][c].is_zero() {
                continue;
            }
            if a[r][c].is_zero() {
                a.swap(r, i);
                continue;
            }
            let x = a[r][c].clone();
            let y = a[i][c].clone();
            let (g, s, t) = ext_gcd(&x, &y);
            let (xg, yg) = (&x / &g, &y / &g);
            let (rr, ri) = (a[r].clone(), a[i].clone());
            a[r] = rr.iter().zip(&ri).map(|(p, q)| &s * p + &t * q).collect();
            a[i] = rr.iter().zip(&ri).map(|(p, q)| &xg * q - &yg * p).collect();
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            a[r] = a[r].iter().map(|v| -v).collect();
        }
        let pivot = a[r][c].clone();
        for i in 0..r {
            let q = a[i][c].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            let pr = a[r].clone();
            for (x, p) in a[i].iter_mut().zip(&pr) {
                *x -= &q * p;
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Solves `sum_k y_k * cols[k] = b` exactly. `cols` must be linearly
/// independent; returns `None` when `b` is outside their span.
pub fn solve_in_span(cols: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let k = cols.len();
    let n = b.len();
    // Augmented system: n equations, k unknowns.
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut pivots = Vec::with_capacity(k);
    let mut r = 0;
    for c in 0..k {
        let p = (r..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, r);
        let pivot = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..n {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            let pr = a[r].clone();
            for (x, p) in a[i].iter_mut().zip(&pr) {
                *x -= &f * p;
            }
        }
        pivots.push(r);
        r += 1;
    }
    if (r..n).any(|i| !a[i][k].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&row| a[row][k].clone()).collect())
}

/// Solves `a x = b` over GF(2). Returns a particular solution and a basis of
/// the homogeneous solutions.
pub fn gf2_solve(a: &[Vec<bool>], b: &[bool]) -> Option<(Vec<bool>, Vec<Vec<bool>>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<bool>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut row = r.clone();
            row.push(bi);
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c]) else {
            continue;
        };
        m.swap(p, r);
        for i in 0..rows {
            if i != r && m[i][c] {
                let pr = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pr) {
                    *x ^= *y;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if (r..rows).any(|i| m[i][cols]) {
        return None;
    }
    let mut particular = vec![false; cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        particular[c] = m[row][cols];
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![false; cols];
            v[f] = true;
            for (row, &c) in pivot_cols.iter().enumerate() {
                v[c] = m[row][f];
            }
            v
        })
        .collect();
    Some((particular, kernel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn im(rows: &[&[i64]]) -> Vec<Vec<Int>> {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = im(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(determinant(&m), int(4));
        let m = im(&[&[0, 1], &[1, 0]]);
        assert_eq!(determinant(&m), int(-1));
        let m = im(&[&[1, 2], &[2, 4]]);
        assert_eq!(determinant(&m), int(0));
    }

    #[test]
    fn inertia_handles_zero_diagonal() {
        assert_eq!(inertia(&im(&[&[0, 1], &[1, 0]])), (1, 1, 0));
        assert_eq!(inertia(&im(&[&[0, 0], &[0, 0]])), (0, 0, 2));
        assert_eq!(inertia(&im(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, -3]])), (1, 2, 0));
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x + 4y = 0 has kernel spanned by (2, -1), not (4, -2).
        let k = integer_kernel(&im(&[&[2, 4]]), 2);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(&v[0] * 2 + &v[1] * 4, int(0));
        assert!(v[0].abs() == int(2) && v[1].abs() == int(1));
    }

    #[test]
    fn hermite_rows_reduces() {
        let h = hermite_rows(im(&[&[2, 4, 0], &[3, 6, 1]]));
        assert_eq!(h, im(&[&[1, 2, 1], &[0, 0, 2]]));
    }

    #[test]
    fn gf2_system() {
        let a = vec![vec![true, true], vec![false, false]];
        let (x, ker) = gf2_solve(&a, &[true, false]).unwrap();
        assert!(x[0] ^ x[1]);
        assert_eq!(ker.len(), 1);
        assert!(gf2_solve(&a, &[true, true]).is_none());
    }
}
