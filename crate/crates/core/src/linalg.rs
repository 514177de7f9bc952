//! Small dense helpers for the low-dimensional geometry in the sampler.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormalises `candidates` against `basis` (modified Gram-Schmidt),
/// appending every candidate whose residual norm exceeds `tol`.
pub(crate) fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, candidates: &[Vec<f64>], tol: f64) {
    for c in candidates {
        let mut v = c.clone();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let n = norm(&v);
        if n > tol {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
}

/// Rank of a set of vectors, by Gram-Schmidt with absolute tolerance `tol`.
pub(crate) fn rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, vectors, tol);
    basis.len()
}

/// Determinant of a square matrix given as rows, via LU with partial pivoting.
pub(crate) fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("non-empty range");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            let (upper, lower) = m.split_at_mut(row);
            for (target, v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= factor * v;
            }
        }
    }
    det
}

/// Solves `m x = rhs` by Gaussian elimination; `None` when singular.
pub(crate) fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(pivot, col);
        rhs.swap(pivot, col);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            let (upper, lower) = m.split_at_mut(row);
            for (target, v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= factor * v;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Some(x)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(vec![vec![2.0]]), 2.0);
        let d = determinant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((d + 1.0).abs() < 1e-15);
        let d = determinant(vec![
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 1.0, 1.0],
        ]);
        // 2(3-2) - 0 + 1(1-3)
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn solve_and_rank() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
        let r = rank(
            &[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            1e-12,
        );
        assert_eq!(r, 2);
    }
}
