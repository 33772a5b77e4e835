//! Uniform 1D discretization: finite differences, composite Simpson
//! quadrature, inner products, and the discretized fluctuation operator
//! with its low-lying spectrum.

use crate::error::{Error, Result};
use crate::model::FieldModel;

/// Uniform grid on `[x_min, x_max]` with an odd number of nodes.
///
/// Odd node counts keep the composite Simpson rule applicable; the
/// constructor rounds the requested count up when necessary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::Usage(format!(
                "grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        let n_points = n_points.max(3);
        let n_points = if n_points % 2 == 0 {
            n_points + 1
        } else {
            n_points
        };
        let h = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n_points,
            h,
        })
    }

    /// Grid with spacing no coarser than `h_target`.
    pub fn from_spacing(x_min: f64, x_max: f64, h_target: f64) -> Result<Self> {
        if !(h_target > 0.0) {
            return Err(Error::Usage(format!("spacing {h_target} must be positive")));
        }
        let n = ((x_max - x_min) / h_target).ceil() as usize + 1;
        Self::new(x_min, x_max, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.h * i as f64
    }

    /// All node coordinates.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Samples a function on every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }
}

/// Boundary treatment of a [`FieldProfile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// Pinned value.
    Dirichlet(f64),
    /// Prescribed slope; a mirror ghost node enforces it.
    Neumann(f64),
    /// Pinned to a model vacuum (a Dirichlet condition that the relaxation
    /// solver checks against the model).
    FixedVacuum(f64),
}

impl BoundaryCondition {
    fn ghost(&self, h: f64, inner: f64, sign: f64) -> f64 {
        match *self {
            BoundaryCondition::Dirichlet(v) | BoundaryCondition::FixedVacuum(v) => v,
            BoundaryCondition::Neumann(slope) => inner + sign * 2.0 * h * slope,
        }
    }
}

/// Field values on a uniform grid plus boundary-condition descriptors.
#[derive(Clone, Debug)]
pub struct FieldProfile {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

impl FieldProfile {
    pub fn new(
        grid: Grid1D,
        values: Vec<f64>,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Usage(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("profile contains non-finite values".into()));
        }
        Ok(Self {
            grid,
            values,
            bc_left,
            bc_right,
        })
    }

    pub fn from_fn(
        grid: Grid1D,
        f: impl Fn(f64) -> f64,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self> {
        Self::new(grid, grid.sample(f), bc_left, bc_right)
    }
}

/// Second derivative by central differences, `O(h^2)`.
///
/// Boundary nodes use ghost values implied by the boundary condition:
/// mirror for Neumann, pinned for Dirichlet/FixedVacuum.
pub fn second_derivative(profile: &FieldProfile) -> Vec<f64> {
    let n = profile.grid.n_points();
    let h = profile.grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let f = &profile.values;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv_h2;
    }
    let ghost_left = profile.bc_left.ghost(h, f[1], -1.0);
    out[0] = (ghost_left - 2.0 * f[0] + f[1]) * inv_h2;
    let ghost_right = profile.bc_right.ghost(h, f[n - 2], 1.0);
    out[n - 1] = (f[n - 2] - 2.0 * f[n - 1] + ghost_right) * inv_h2;
    out
}

/// First derivative by fourth-order central differences with one-sided
/// stencils of the same order at the ends.
pub fn first_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "fourth-order stencil needs at least 5 nodes");
    let f = values;
    let c = 1.0 / (12.0 * h);
    let mut out = vec![0.0; n];
    out[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    out[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        out[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    out[n - 2] = c * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]);
    out[n - 1] = c * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]);
    out
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Composite Simpson rule over the grid, `O(h^4)`; compensated summation
/// keeps round-off below the quadrature error.
pub fn integrate(values: &[f64], grid: &Grid1D) -> f64 {
    assert_eq!(values.len(), grid.n_points());
    let n = values.len();
    let mut acc = KahanSum::default();
    acc.add(values[0]);
    acc.add(values[n - 1]);
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    acc.sum * grid.spacing() / 3.0
}

/// Simpson quadrature of a function on `[a, b]` with `n` nodes (rounded up
/// to odd).
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(3);
    let n = if n % 2 == 0 { n + 1 } else { n };
    let h = (b - a) / (n - 1) as f64;
    let mut acc = KahanSum::default();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + h * i as f64));
    }
    acc.sum * h / 3.0
}

/// Running integral `C[k] = int_{x_0}^{x_k} f dx` with Simpson panels on
/// even indices and a local cubic on the odd half-panels.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5 && n % 2 == 1, "cumulative Simpson needs odd n >= 5");
    let f = values;
    let mut c = vec![0.0; n];
    for k in 1..n {
        if k % 2 == 0 {
            c[k] = c[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        } else if k + 2 < n {
            c[k] = c[k - 1]
                + h / 24.0 * (9.0 * f[k - 1] + 19.0 * f[k] - 5.0 * f[k + 1] + f[k + 2]);
        } else {
            c[k] = c[k - 1]
                + h / 24.0 * (f[k - 3] - 5.0 * f[k - 2] + 19.0 * f[k - 1] + 9.0 * f[k]);
        }
    }
    c
}

/// Grid inner product `<f, g> = int f g dx`.
pub fn inner_product(f: &FieldProfile, g: &FieldProfile) -> Result<f64> {
    if f.grid != g.grid {
        return Err(Error::Usage("inner product of profiles on different grids".into()));
    }
    let prod: Vec<f64> = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b)
        .collect();
    Ok(integrate(&prod, &f.grid))
}

/// Symmetric tridiagonal operator `-D^2 + diag(w)` on the interior nodes of
/// a grid, with Dirichlet-zero ends.
#[derive(Clone, Debug)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    off: f64,
    grid: Grid1D,
}

impl TridiagonalOperator {
    /// Assembles `-D^2 + diag(weights)` for given interior weights.
    pub fn new(grid: Grid1D, weights: Vec<f64>) -> Self {
        let h = grid.spacing();
        let diag = weights.iter().map(|w| 2.0 / (h * h) + w).collect();
        Self {
            diag,
            off: -1.0 / (h * h),
            grid,
        }
    }

    /// Matrix dimension (number of interior nodes).
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Coordinate of interior node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.grid.x(i + 1)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off
    }

    /// Applies the operator to a vector of interior values.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off * v[i - 1];
            }
            if i + 1 < n {
                s += self.off * v[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = d - x - if i > 0 { e2 / q } else { 0.0 };
            if q < 0.0 {
                count += 1;
            }
            if q == 0.0 {
                q = -1e-300;
                count += 1;
            }
        }
        count
    }

    fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let n = self.dim();
        for i in 0..n {
            let radius = self.off.abs()
                * (if i > 0 { 1.0 } else { 0.0 } + if i + 1 < n { 1.0 } else { 0.0 });
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    fn bisect_eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin_bounds();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        while hi - lo > 1e-13 * scale {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn inverse_iteration(&self, shift: f64) -> Result<(f64, Vec<f64>)> {
        let n = self.dim();
        let scale = shift.abs().max(1.0);
        let solver = TridiagonalSolver::factor(
            &vec![self.off; n - 1],
            &self.diag.iter().map(|d| d - shift - 1e-12 * scale).collect::<Vec<_>>(),
            &vec![self.off; n - 1],
        );
        // deterministic start vector with no accidental symmetry
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (i as f64).sin()).collect();
        normalize(&mut v);
        for _ in 0..50 {
            let mut w = solver.solve(&v);
            normalize(&mut w);
            let aw = self.apply(&w);
            let rayleigh: f64 = w.iter().zip(&aw).map(|(a, b)| a * b).sum();
            let residual: f64 = aw
                .iter()
                .zip(&w)
                .map(|(awi, wi)| {
                    let r = awi - rayleigh * wi;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            v = w;
            if residual <= 1e-10 {
                fix_sign(&mut v);
                return Ok((rayleigh, v));
            }
        }
        Err(Error::NumericalFailure {
            op: "lowest_eigenpairs",
            detail: format!("inverse iteration stalled at shift {shift}"),
        })
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

fn fix_sign(v: &mut [f64]) {
    let lead = v
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap_or(1.0);
    if lead < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Discretized fluctuation operator `-d^2/dx^2 + U''(u_c(x))` with
/// Dirichlet-zero ends. The grid should span at least `[-10/m, 10/m]` so the
/// bound states decay well inside the box.
pub fn fluctuation_operator(model: &FieldModel, grid: &Grid1D) -> TridiagonalOperator {
    let weights = (1..grid.n_points() - 1)
        .map(|i| model.d2u(model.kink(grid.x(i))))
        .collect();
    TridiagonalOperator::new(*grid, weights)
}

/// The `k` smallest eigenvalues with normalized eigenvectors, by bisection
/// on the Sturm count plus inverse iteration. Eigenvalues come back in
/// non-decreasing order; each eigenvector residual is at most 1e-8.
pub fn lowest_eigenpairs(op: &TridiagonalOperator, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if k == 0 || k > op.dim() {
        return Err(Error::Usage(format!(
            "requested {k} eigenpairs of a {}-dimensional operator",
            op.dim()
        )));
    }
    (0..k)
        .map(|j| {
            let lambda = op.bisect_eigenvalue(j);
            op.inverse_iteration(lambda)
        })
        .collect()
}

/// Tridiagonal LU with partial pivoting (one fill-in diagonal).
pub(crate) struct TridiagonalSolver {
    n: usize,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    upper2: Vec<f64>,
    pivoted: Vec<bool>,
}

impl TridiagonalSolver {
    pub(crate) fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        assert_eq!(sub.len(), n - 1);
        assert_eq!(sup.len(), n - 1);
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut dl = sub.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut pivoted = vec![false; n - 1];
        for i in 0..n - 1 {
            if dl[i].abs() <= d[i].abs() {
                // no pivot
                if d[i] != 0.0 {
                    let factor = dl[i] / d[i];
                    dl[i] = factor;
                    d[i + 1] -= factor * du[i];
                }
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                // swap rows i and i+1
                let factor = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = factor;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - factor * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -factor * du[i + 1];
                }
                pivoted[i] = true;
            }
        }
        Self {
            n,
            lower: dl,
            diag: d,
            upper: du,
            upper2: du2,
            pivoted,
        }
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if self.pivoted[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.lower[i] * b[i];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = b[n - 1] / self.diag[n - 1];
        if n >= 2 {
            x[n - 2] = (b[n - 2] - self.upper[n - 2] * x[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (b[i] - self.upper[i] * x[i + 1] - self.upper2[i] * x[i + 2]) / self.diag[i];
        }
        x
    }
}
