use crate::C64;

use super::{sparse_lu_solve_complex, LinalgError, SparseMatrix, TripletBuilder};

/// Real form `[[re, -im], [im, re]]` of the complex matrix `re + i im`,
/// acting on `(Re x, Im x)`.
pub fn real_split(re: &SparseMatrix, im: &SparseMatrix) -> SparseMatrix {
    let (r, c) = (re.n_rows(), re.n_cols());
    let mut t = TripletBuilder::with_capacity(2 * r, 2 * c, 2 * (re.nnz() + im.nnz()));
    for i in 0..r {
        for (j, v) in re.row(i) {
            t.push(i, j, v);
            t.push(r + i, c + j, v);
        }
        for (j, v) in im.row(i) {
            t.push(i, c + j, -v);
            t.push(r + i, j, v);
        }
    }
    t.build()
}

/// Solves `(re + i im) x = b`.
pub fn solve_complex(re: &SparseMatrix, im: &SparseMatrix, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
    sparse_lu_solve_complex(re, im, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_complex_division() {
        let re = SparseMatrix::from_diagonal(&[1.0, 2.0]);
        let im = SparseMatrix::from_diagonal(&[1.0, 0.0]);
        let x = solve_complex(&re, &im, &[C64::new(2.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!((x[0] - C64::new(1.0, -1.0)).norm() < 1e-15);
        assert!((x[1] - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_lu_matches_real_split() {
        let n = 30;
        let mut tr = TripletBuilder::new(n, n);
        let mut ti = TripletBuilder::new(n, n);
        for i in 0..n {
            tr.push(i, i, 2.0 + i as f64 * 0.1);
            ti.push(i, (i * 7 + 3) % n, 0.5);
            if i + 1 < n {
                tr.push(i, i + 1, -1.0);
                tr.push(i + 1, i, 0.3);
            }
        }
        let (re, im) = (tr.build(), ti.build());
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0 - i as f64 * 0.5)).collect();
        let z = solve_complex(&re, &im, &b).unwrap();
        let rhs: Vec<f64> = b.iter().map(|z| z.re).chain(b.iter().map(|z| z.im)).collect();
        let x = super::super::sparse_lu_solve(&real_split(&re, &im), &rhs).unwrap();
        for i in 0..n {
            assert!((z[i] - C64::new(x[i], x[n + i])).norm() < 1e-12);
        }
    }
}
