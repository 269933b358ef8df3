//! Dense row-major matrix helpers.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `mat` is (r, p); `data` is (p, q); returns (r, q).
pub(crate) fn apply_axis0(mat: &[f64], r: usize, p: usize, data: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * q];
    for i in 0..r {
        let orow = &mut out[i * q..(i + 1) * q];
        for j in 0..p {
            let c = mat[i * p + j];
            if c != 0.0 {
                axpy(orow, c, &data[j * q..(j + 1) * q]);
            }
        }
    }
    out
}

/// `mat` is (r, p); `data` is (q, p); returns (q, r).
pub(crate) fn apply_axis1(mat: &[f64], r: usize, p: usize, data: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; q * r];
    for i in 0..q {
        let drow = &data[i * p..(i + 1) * p];
        for j in 0..r {
            out[i * r + j] = dot(&mat[j * p..(j + 1) * p], drow);
        }
    }
    out
}
