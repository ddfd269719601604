//! Uniform radial meshes and weighted quadrature for radially symmetric
//! functions on R^N (N = 2, 3).
//!
//! A radial function `u(|x|)` is sampled at nodes `r_j = j * dr`, `j = 0..=M`.
//! Integrals over R^N reduce to `omega_{N-1} * int_0^{r_max} g(r) r^{N-1} dr`,
//! evaluated with the composite trapezoid rule.

use std::f64::consts::PI;

use thiserror::Error;

/// Smallest number of cells a grid may have.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("unsupported dimension {0}: only N = 2 and N = 3 are implemented")]
    UnsupportedDimension(usize),
    #[error("r_max must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("num_cells must be at least {MIN_CELLS}, got {0}")]
    TooFewCells(usize),
    #[error("field has {got} samples but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {node} (r = {r})")]
    NonFinite { node: usize, r: f64, value: f64 },
    #[error("weight exponent {0} is outside the supported range")]
    InvalidExponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Uniform radial mesh on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    r_max: f64,
    num_cells: usize,
    spacing: f64,
}

impl RadialGrid {
    pub fn new(dim: usize, r_max: f64, num_cells: usize) -> Result<Self, GridError> {
        if dim != 2 && dim != 3 {
            return Err(GridError::UnsupportedDimension(dim));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(GridError::InvalidRadius(r_max));
        }
        if num_cells < MIN_CELLS {
            return Err(GridError::TooFewCells(num_cells));
        }
        Ok(Self {
            dim,
            r_max,
            num_cells,
            spacing: r_max / num_cells as f64,
        })
    }

    /// Grid with spacing exactly `dr` whose outer radius is the first
    /// multiple of `dr` at or beyond `min_r_max`.
    pub fn with_spacing(dim: usize, min_r_max: f64, dr: f64) -> Result<Self, GridError> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(GridError::InvalidRadius(dr));
        }
        let cells = (min_r_max / dr - 1e-9).ceil().max(1.0) as usize;
        Self::new(dim, cells as f64 * dr, cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_nodes(&self) -> usize {
        self.num_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Radius of node `j`. The last node is pinned to `r_max`.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        if j == self.num_cells {
            self.r_max
        } else {
            j as f64 * self.spacing
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.num_cells).map(move |j| self.node(j))
    }

    /// Surface measure of the unit sphere S^{N-1}.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// Same extent and dimension with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self, GridError> {
        Self::new(self.dim, self.r_max, self.num_cells * factor.max(1))
    }
}

/// `omega_{N-1}`: 2*pi for N = 2, 4*pi for N = 3.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

/// `r^e` with the conventions `0^0 = 1` and `0^e = 0` for `e > 0`.
#[inline]
pub(crate) fn rpow(r: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if r == 0.0 {
        0.0
    } else {
        r.powf(e)
    }
}

/// Samples of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.num_nodes() {
            return Err(GridError::LengthMismatch {
                expected: grid.num_nodes(),
                got: values.len(),
            });
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite {
                node,
                r: grid.node(node),
                value,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.num_nodes()],
        }
    }

    pub fn from_fn(grid: RadialGrid, profile: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::new(grid, grid.nodes().map(profile).collect())
    }

    /// Skips the finiteness scan; callers guarantee finite samples.
    pub(crate) fn from_vec_unchecked(grid: RadialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_nodes());
        Self { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Largest node radius where `|u| > threshold`, or 0 when there is none.
    pub fn support_radius(&self, threshold: f64) -> f64 {
        self.values
            .iter()
            .rposition(|v| v.abs() > threshold)
            .map_or(0.0, |j| self.grid.node(j))
    }

    /// Nodewise difference `self - other`.
    pub fn sub(&self, other: &RadialField) -> Result<RadialField, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(Self::from_vec_unchecked(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// Radial derivative: centered differences inside, one-sided at `r_max`,
    /// and `u_r(0) = 0` at the origin.
    pub fn gradient(&self) -> Vec<f64> {
        let m = self.grid.num_cells;
        let h = self.grid.spacing;
        let u = &self.values;
        let mut g = vec![0.0; m + 1];
        for j in 1..m {
            g[j] = (u[j + 1] - u[j - 1]) / (2.0 * h);
        }
        g[m] = (u[m] - u[m - 1]) / h;
        g
    }
}

fn trapezoid_radial(
    grid: &RadialGrid,
    samples: impl Iterator<Item = f64>,
    weight_exponent: f64,
) -> Result<f64, GridError> {
    let m = grid.num_cells;
    let h = grid.spacing;
    let jac = grid.dim as f64 - 1.0 + weight_exponent;
    let mut acc = 0.0;
    for (j, g) in samples.enumerate() {
        if !g.is_finite() {
            return Err(GridError::NonFinite {
                node: j,
                r: grid.node(j),
                value: g,
            });
        }
        if jac < 0.0 && j <= 1 {
            // r^jac is unbounded on [0, h]: integrate it exactly against the
            // linear interpolant of the samples.
            let cell = h.powf(jac) / (jac + 2.0);
            if j == 0 {
                acc += g * cell / (jac + 1.0);
            } else {
                acc += g * cell;
                if m > 1 {
                    acc += 0.5 * g * grid.node(1).powf(jac);
                }
            }
            continue;
        }
        let c = if j == 0 || j == m { 0.5 } else { 1.0 };
        acc += c * g * rpow(grid.node(j), jac);
    }
    Ok(grid.sphere_area() * acc * h)
}

/// `omega_{N-1} int_0^{r_max} transform(u(r)) r^{N-1+w} dr`, i.e. the discrete
/// `int_{R^N} |x|^w transform(u) dx`, by the composite trapezoid rule.
pub fn weighted_integral(
    field: &RadialField,
    weight_exponent: f64,
    transform: impl Fn(f64) -> f64,
) -> Result<f64, GridError> {
    if !(weight_exponent.is_finite() && weight_exponent >= 0.0) {
        return Err(GridError::InvalidExponent(weight_exponent));
    }
    trapezoid_radial(
        &field.grid,
        field.values.iter().map(|&v| transform(v)),
        weight_exponent,
    )
}

/// Variant of [`weighted_integral`] for integrable singular weights
/// `|x|^w` with `-N < w < 0`. When the combined radial exponent `N - 1 + w`
/// is negative the first cell is integrated exactly against the power weight
/// with the field taken piecewise linear.
pub fn weighted_integral_singular(
    field: &RadialField,
    weight_exponent: f64,
    transform: impl Fn(f64) -> f64,
) -> Result<f64, GridError> {
    let n = field.grid.dim as f64;
    if !(weight_exponent.is_finite() && weight_exponent > -n) {
        return Err(GridError::InvalidExponent(weight_exponent));
    }
    trapezoid_radial(
        &field.grid,
        field.values.iter().map(|&v| transform(v)),
        weight_exponent,
    )
}

pub fn l2_norm(field: &RadialField) -> f64 {
    trapezoid_radial(&field.grid, field.values.iter().map(|v| v * v), 0.0)
        .unwrap_or(f64::NAN)
        .sqrt()
}

pub fn grad_l2_norm(field: &RadialField) -> f64 {
    trapezoid_radial(
        &field.grid,
        field.gradient().into_iter().map(|g| g * g),
        0.0,
    )
    .unwrap_or(f64::NAN)
    .sqrt()
}

/// `sqrt(||u||^2 + ||grad u||^2)`.
pub fn h1_norm(field: &RadialField) -> f64 {
    l2_norm(field).hypot(grad_l2_norm(field))
}

/// `(int |u|^p dx)^{1/p}` for `1 <= p < inf`, and the max norm for `p = inf`.
pub fn lp_norm(field: &RadialField, p: f64) -> f64 {
    if p.is_infinite() {
        return field.max_abs();
    }
    trapezoid_radial(&field.grid, field.values.iter().map(|v| v.abs().powf(p)), 0.0)
        .unwrap_or(f64::NAN)
        .powf(1.0 / p)
}

/// `max_j r_j^exponent |u(r_j)|`.
pub fn weighted_sup(field: &RadialField, exponent: f64) -> f64 {
    field
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| rpow(field.grid.node(j), exponent) * v.abs())
        .fold(0.0, f64::max)
}

/// Default absolute tolerance for quadrature-based comparisons.
pub fn quadrature_tolerance(grid: &RadialGrid, integrand_scale: f64) -> f64 {
    (10.0 * grid.spacing * grid.spacing * integrand_scale.abs()).max(1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_nodes() {
        let g = RadialGrid::new(3, 2.0, 8).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        let g = RadialGrid::new(2, 1.0, 10).unwrap();
        assert_relative_eq!(g.spacing(), 0.1);
        assert_eq!(g.node(10), 1.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert_eq!(
            RadialGrid::new(4, 1.0, 10),
            Err(GridError::UnsupportedDimension(4))
        );
        assert_eq!(RadialGrid::new(3, 0.0, 10), Err(GridError::InvalidRadius(0.0)));
        assert_eq!(RadialGrid::new(3, -1.0, 10), Err(GridError::InvalidRadius(-1.0)));
        assert_eq!(RadialGrid::new(2, 1.0, 7), Err(GridError::TooFewCells(7)));
    }

    #[test]
    fn with_spacing_keeps_dr() {
        let g = RadialGrid::with_spacing(3, 3.004, 1e-3).unwrap();
        assert_eq!(g.num_cells(), 3004);
        assert_relative_eq!(g.spacing(), 1e-3, max_relative = 1e-12);
        assert!(g.r_max() >= 3.004 - 1e-12);
    }

    #[test]
    fn volume_and_moments() {
        let g = RadialGrid::new(3, 1.0, 1000).unwrap();
        let one = RadialField::from_fn(g, |_| 1.0).unwrap();
        let tol = quadrature_tolerance(&g, 4.0 * PI);
        let vol = weighted_integral(&one, 0.0, |v| v).unwrap();
        assert!((vol - 4.0 * PI / 3.0).abs() < tol);
        let m1 = weighted_integral(&one, 1.0, |v| v).unwrap();
        assert!((m1 - PI).abs() < tol);
    }

    #[test]
    fn gaussian_mass_2d() {
        let g = RadialGrid::new(2, 8.0, 8000).unwrap();
        let f = RadialField::from_fn(g, |r| (-r * r / 2.0).exp()).unwrap();
        let v = weighted_integral(&f, 0.0, |u| u * u).unwrap();
        assert!((v - PI).abs() < 1e-6);
        assert!((l2_norm(&f).powi(2) - PI).abs() < 1e-6);
    }

    #[test]
    fn non_finite_transform_reports_node() {
        let g = RadialGrid::new(2, 1.0, 10).unwrap();
        let f = RadialField::from_fn(g, |r| r).unwrap();
        let err = weighted_integral(&f, 0.0, |u| if u > 0.45 { f64::NAN } else { u }).unwrap_err();
        match err {
            GridError::NonFinite { node, .. } => assert_eq!(node, 5),
            e => panic!("unexpected {e:?}"),
        }
        assert!(weighted_integral(&f, -0.5, |u| u).is_err());
    }

    #[test]
    fn zero_field_norms() {
        let g = RadialGrid::new(3, 1.0, 16).unwrap();
        let z = RadialField::zeros(g);
        assert_eq!((l2_norm(&z), grad_l2_norm(&z), h1_norm(&z)), (0.0, 0.0, 0.0));
        assert_eq!(weighted_sup(&z, 1.0), 0.0);
    }

    #[test]
    fn weighted_sup_examples() {
        let g = RadialGrid::new(3, 2.0, 20).unwrap();
        let one = RadialField::from_fn(g, |_| 1.0).unwrap();
        assert_eq!(weighted_sup(&one, 1.0), 2.0);
        let g = RadialGrid::new(3, 10.0, 100).unwrap();
        let f = RadialField::from_fn(g, |r| 1.0 / (1.0 + r)).unwrap();
        assert!((weighted_sup(&f, 1.0) - 10.0 / 11.0).abs() <= 1e-15);
    }

    #[test]
    fn weighted_sup_zero_exponent_sees_origin() {
        let g = RadialGrid::new(2, 1.0, 10).unwrap();
        let mut vals = vec![0.0; 11];
        vals[0] = 3.0;
        let f = RadialField::new(g, vals).unwrap();
        assert_eq!(weighted_sup(&f, 0.0), 3.0);
        assert_eq!(weighted_sup(&f, 0.5), 0.0);
    }

    #[test]
    fn trapezoid_is_second_order() {
        // int_{R^2} e^{-r^2} dx = pi; the odd integrand r e^{-r^2} keeps the
        // endpoint error term alive
        let exact = PI;
        let err = |cells: usize| {
            let g = RadialGrid::new(2, 7.0, cells).unwrap();
            let f = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
            (weighted_integral(&f, 0.0, |v| v).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(40), err(80));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn additivity_over_disjoint_supports() {
        let g = RadialGrid::new(3, 4.0, 400).unwrap();
        let a = RadialField::from_fn(g, |r| if r < 1.5 { (1.5 - r).powi(2) } else { 0.0 }).unwrap();
        let b = RadialField::from_fn(g, |r| if r > 2.0 { (r - 2.0) * (4.0 - r) } else { 0.0 }).unwrap();
        let sum = RadialField::new(
            g,
            a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect(),
        )
        .unwrap();
        let ia = weighted_integral(&a, 0.0, |v| v).unwrap();
        let ib = weighted_integral(&b, 0.0, |v| v).unwrap();
        let is = weighted_integral(&sum, 0.0, |v| v).unwrap();
        assert_relative_eq!(ia + ib, is, max_relative = 1e-13);
    }

    #[test]
    fn singular_weight_integrable() {
        // int_{R^2} e^{-r^2} / |x| dx = 2 pi * sqrt(pi) / 2 = pi^{3/2}
        let g = RadialGrid::new(2, 8.0, 8000).unwrap();
        let f = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
        let v = weighted_integral_singular(&f, -1.0, |u| u).unwrap();
        assert!((v - PI.powf(1.5)).abs() < 1e-5, "{v}");
        // beta = 1.5: the r^{-1/2} singularity limits the rule to O(dr^{1/2})
        let exact = 2.0 * PI * 0.5 * gamma_quarter();
        let err = |cells: usize| {
            let g = RadialGrid::new(2, 8.0, cells).unwrap();
            let f = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
            (weighted_integral_singular(&f, -1.5, |u| u).unwrap() - exact).abs()
        };
        let (coarse, fine) = (err(2000), err(32000));
        assert!(fine < 1e-2 * exact, "{fine}");
        assert!(coarse / fine > 3.0, "{coarse} {fine}");
        assert!(weighted_integral_singular(&f, -2.0, |u| u).is_err());
    }

    // int_0^inf r^{-1/2} e^{-r^2} dr = Gamma(1/4)/2
    fn gamma_quarter() -> f64 {
        3.625_609_908_221_908
    }
}
