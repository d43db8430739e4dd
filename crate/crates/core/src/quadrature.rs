//! Fixed-grid quadrature rules on [0,1].

/// Composite trapezoid rule on `points` equally spaced nodes (endpoints included).
pub fn trapezoid<F: FnMut(f64) -> f64>(points: usize, mut f: F) -> f64 {
    assert!(points >= 2, "trapezoid rule needs at least two nodes");
    let h = 1.0 / (points - 1) as f64;
    let mut acc = 0.5 * (f(0.0) + f(1.0));
    for i in 1..points - 1 {
        acc += f(i as f64 * h);
    }
    acc * h
}

/// Trapezoid nodes and weights, for when the same grid is reused many times.
pub fn trapezoid_rule(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 2, "trapezoid rule needs at least two nodes");
    let h = 1.0 / (points - 1) as f64;
    let nodes = (0..points).map(|i| i as f64 * h).collect();
    let mut weights = vec![h; points];
    weights[0] = 0.5 * h;
    weights[points - 1] = 0.5 * h;
    (nodes, weights)
}

/// Gauss–Legendre nodes and weights on [0,1] (Golub–Welsch), exact for
/// polynomials of degree `2·points − 1`.
pub fn gauss_legendre_rule(points: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points >= 1, "Gauss rule needs at least one node");
    let jacobi = nalgebra::DMatrix::from_fn(points, points, |i, j| {
        let k = i.max(j) as f64;
        if i.abs_diff(j) == 1 {
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Midpoint Riemann sum with `cells` equal cells.
pub fn midpoint<F: FnMut(f64) -> f64>(cells: usize, mut f: F) -> f64 {
    assert!(cells >= 1, "midpoint rule needs at least one cell");
    let h = 1.0 / cells as f64;
    (0..cells).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Number of cells used for Riemann-sum integrals of fitted curves.
pub const RIEMANN_CELLS: usize = 1_000;

/// Node count of the reference trapezoid grid.
pub const FINE_GRID: usize = 10_001;
