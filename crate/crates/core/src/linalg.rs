/// Thomas algorithm for a tridiagonal system. `sub[0]` and `sup[n-1]` are ignored.
/// Returns `None` on a vanishing pivot.
pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 || !piv.is_finite() {
        return None;
    }
    c[0] = if n > 1 { sup[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { sup[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}
