use nalgebra::{DMatrix, DVector};

/// Solves `(JᵀJ + μ D) x = rhs` where `D` is `diag(JᵀJ)` floored at `floor`.
pub(crate) fn damped_normal_solve(
    j: &DMatrix<f64>,
    rhs: &DVector<f64>,
    scale: f64,
    mu: f64,
    floor: f64,
) -> Option<DVector<f64>> {
    let mut a = j.transpose() * j * scale;
    for k in 0..a.nrows() {
        let d = a[(k, k)].max(floor);
        a[(k, k)] += mu * d;
    }
    a.clone()
        .cholesky()
        .map(|c| c.solve(rhs))
        .or_else(|| a.lu().solve(rhs))
}
