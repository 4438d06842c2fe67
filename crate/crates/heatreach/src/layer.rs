//! Thermal layer potentials and the first-kind boundary-integral solve.
//!
//! The single layer `S q(t,x) = ∫₀ᵗ ∫_∂Ω G(t−s, x−y) q(s,y) dσ(y) ds`
//! is discretized by collocation: densities are piecewise constant on
//! time slabs `[lΔt, (l+1)Δt)`, collocated at the slab midpoints
//! `t_i = (i+½)Δt`, with a Nyström rule on the boundary.  The time
//! integral over each slab is done *in closed form* (no quadrature in
//! `τ = t−s`), which is what makes the weakly singular `τ → 0` slab
//! harmless:
//!
//! * `d = 1`: `∫ G(τ,c) dτ = F(τ₁) − F(τ₀)` with
//!   `F(τ) = √(τ/π)·e^{−c²/4τ} − (c/2)·erfc(c/(2√τ))` and `F(0) = 0`
//!   whenever `ℜc > 0` (differentiating `F` returns the kernel exactly).
//! * `d = 2`: `∫ G(τ,c) dτ = (E₁(c²/4τ₁) − E₁(c²/4τ₀))/4π`, and on the
//!   diagonal the flat-panel self interaction has the primitive
//!   `P(τ) = √(τ/π)·erf(w/(4√τ)) + (w/4π)·E₁(w²/16τ)` for a panel of
//!   arclength `w` (integrate the Gaussian across the panel first, then
//!   by parts in `τ`).
//!
//! Complex evaluation points are allowed whenever they lie in the closed
//! analyticity egg of the domain: there `ℜ((z−y)·(z−y)) ≥ 0` for every
//! boundary point `y`, so every slab primitive stays on its principal
//! branch.  The resulting time-marching system is lower-triangular block
//! Toeplitz and is solved by one LU factorization of the first block.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::geometry::{ComplexPoint, DomainSpec};
use crate::quad::gauss_legendre;
use crate::special::{erf_c, erfc_c, exp_integral_e1};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.7724538509055160273;

/// One boundary quadrature node: location, surface weight, outward normal.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNode {
    pub point: Vec<f64>,
    pub weight: f64,
    pub normal: Vec<f64>,
}

/// Space-time discretization of `∂Ω × [0, t_final]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeGrid {
    pub domain: DomainSpec,
    pub t_final: f64,
    pub nt: usize,
    pub nodes: Vec<BoundaryNode>,
}

impl SpaceTimeGrid {
    /// Builds the boundary rule for the domain.
    ///
    /// * Interval (or one-dimensional ball): the two endpoints, unit
    ///   weight each, outward normals −1 and +1 (`nb` is ignored — the
    ///   boundary measure in one dimension is counting measure).
    /// * Disk: `nb` uniformly spaced angles, trapezoidal weights
    ///   `2πR/nb`, radial normals.
    /// * Polygon: a Gauss–Legendre rule per edge, sized proportionally
    ///   to edge length so the total node count is about `nb`.
    pub fn new(domain: DomainSpec, t_final: f64, nt: usize, nb: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive and finite, got {t_final}"
            )));
        }
        if nt == 0 {
            return Err(Error::InvalidArgument("need at least one time slab".into()));
        }
        let nodes = match &domain {
            DomainSpec::Interval { a, b } => interval_nodes(*a, *b),
            DomainSpec::Ball { center, radius } => match center.len() {
                1 => interval_nodes(center[0] - radius, center[0] + radius),
                2 => {
                    if nb < 8 {
                        return Err(Error::InvalidArgument(format!(
                            "disk boundary needs at least 8 nodes, got {nb}"
                        )));
                    }
                    let mut nodes = Vec::with_capacity(nb);
                    let w = 2.0 * std::f64::consts::PI * radius / nb as f64;
                    for j in 0..nb {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / nb as f64;
                        let (s, c) = th.sin_cos();
                        nodes.push(BoundaryNode {
                            point: vec![center[0] + radius * c, center[1] + radius * s],
                            weight: w,
                            normal: vec![c, s],
                        });
                    }
                    nodes
                }
                d => {
                    return Err(Error::InvalidDomain(format!(
                        "boundary rules are available in dimensions 1 and 2, not {d}"
                    )))
                }
            },
            DomainSpec::Polygon { vertices } => polygon_nodes(vertices, nb)?,
        };
        Ok(Self {
            domain,
            t_final,
            nt,
            nodes,
        })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    /// Collocation time of slab `i`: its midpoint `(i+½)Δt`.
    pub fn collocation_time(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dt()
    }

    pub fn nb(&self) -> usize {
        self.nodes.len()
    }

    /// Total boundary measure carried by the rule (Σ weights).
    pub fn boundary_measure(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

fn interval_nodes(a: f64, b: f64) -> Vec<BoundaryNode> {
    vec![
        BoundaryNode {
            point: vec![a],
            weight: 1.0,
            normal: vec![-1.0],
        },
        BoundaryNode {
            point: vec![b],
            weight: 1.0,
            normal: vec![1.0],
        },
    ]
}

fn polygon_nodes(vertices: &[[f64; 2]], nb: usize) -> Result<Vec<BoundaryNode>> {
    let n = vertices.len();
    if nb < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "polygon with {n} edges needs at least {} boundary nodes, got {nb}",
            2 * n
        )));
    }
    let mut lengths = Vec::with_capacity(n);
    let mut perimeter = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        lengths.push(len);
        perimeter += len;
    }
    let mut nodes = Vec::with_capacity(nb + n);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let len = lengths[i];
        let order = ((nb as f64 * len / perimeter).round() as usize).max(2);
        let (gx, gw) = gauss_legendre(order)?;
        // Outward normal of a counter-clockwise edge p→q.
        let normal = vec![(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
        for (x, w) in gx.iter().zip(&gw) {
            let s = 0.5 * (x + 1.0);
            nodes.push(BoundaryNode {
                point: vec![p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])],
                weight: w * len / 2.0,
                normal: normal.clone(),
            });
        }
    }
    Ok(nodes)
}

/// Space-time boundary samples: densities, or Dirichlet boundary data,
/// stored row-major as `values[i * nb + j]` for time slab `i`, node `j`,
/// sampled at the collocation times `(i+½)Δt`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDensity {
    pub grid: SpaceTimeGrid,
    pub values: Vec<Complex64>,
}

impl BoundaryDensity {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.nt * grid.nb()],
        }
    }

    /// Samples `f(t, y)` at every collocation time and boundary node.
    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, &[f64]) -> Complex64) -> Self {
        let nb = grid.nb();
        let mut values = Vec::with_capacity(grid.nt * nb);
        for i in 0..grid.nt {
            let t = grid.collocation_time(i);
            for node in &grid.nodes {
                values.push(f(t, &node.point));
            }
        }
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.nb() + j]
    }

    /// Relative ℓ² distance to another density on the same grid.
    pub fn rel_l2_distance(&self, other: &Self) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

fn check_slab_range(tau0: f64, tau1: f64) -> Result<()> {
    if !(0.0 <= tau0 && tau0 < tau1) || !tau1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slab range [{tau0}, {tau1}] must satisfy 0 ≤ τ₀ < τ₁"
        )));
    }
    Ok(())
}

fn separation_root(csq: Complex64) -> Result<Complex64> {
    let c = csq.sqrt();
    if c.re <= 0.0 {
        return Err(Error::Guard(format!(
            "squared separation {csq} lies on the negative real axis; \
             the evaluation point is outside the closed analyticity egg"
        )));
    }
    Ok(c)
}

/// `∫_{τ₀}^{τ₁} G₁(τ, ·) dτ` for squared separation `csq = (z−y)²`.
pub fn single_slab_1d(csq: Complex64, tau0: f64, tau1: f64) -> Result<Complex64> {
    check_slab_range(tau0, tau1)?;
    if csq == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(
            (tau1 / std::f64::consts::PI).sqrt() - (tau0 / std::f64::consts::PI).sqrt(),
            0.0,
        ));
    }
    let c = separation_root(csq)?;
    let f = |tau: f64| -> Complex64 {
        if tau == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = tau.sqrt();
        Complex64::new(s / SQRT_PI, 0.0) * (-csq / (4.0 * tau)).exp()
            - 0.5 * c * erfc_c(c / (2.0 * s))
    };
    Ok(f(tau1) - f(tau0))
}

/// `∫_{τ₀}^{τ₁} G₂(τ, ·) dτ` for squared separation `csq = (z−y)·(z−y)`.
///
/// The coincident case `csq = 0` is only integrable away from `τ = 0`
/// (logarithmic kernel); the genuinely singular diagonal is handled by
/// [`panel_self_slab_2d`].
pub fn single_slab_2d(csq: Complex64, tau0: f64, tau1: f64) -> Result<Complex64> {
    check_slab_range(tau0, tau1)?;
    let quarter = 0.25 / std::f64::consts::PI;
    if csq == Complex64::new(0.0, 0.0) {
        if tau0 == 0.0 {
            return Err(Error::InvalidArgument(
                "coincident two-dimensional slab touching τ = 0 diverges; \
                 use the flat-panel self weight"
                    .into(),
            ));
        }
        return Ok(Complex64::new(quarter * (tau1 / tau0).ln(), 0.0));
    }
    separation_root(csq)?;
    let upper = exp_integral_e1(csq / (4.0 * tau1))?;
    let lower = if tau0 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        exp_integral_e1(csq / (4.0 * tau0))?
    };
    Ok(quarter * (upper - lower))
}

/// Exact self-interaction of a flat panel of arclength `w` over a time
/// slab: `∫_{τ₀}^{τ₁} ∫_{−w/2}^{w/2} G₂(τ, r) dr dτ = P(τ₁) − P(τ₀)`.
pub fn panel_self_slab_2d(panel_len: f64, tau0: f64, tau1: f64) -> Result<f64> {
    check_slab_range(tau0, tau1)?;
    if !(panel_len > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "panel length must be positive, got {panel_len}"
        )));
    }
    let p = |tau: f64| -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        let b = panel_len / (4.0 * tau.sqrt());
        let e1 = exp_integral_e1(Complex64::new(b * b, 0.0))?.re;
        Ok((tau / std::f64::consts::PI).sqrt() * erf_c(Complex64::new(b, 0.0)).re
            + panel_len / (4.0 * std::f64::consts::PI) * e1)
    };
    Ok(p(tau1)? - p(tau0)?)
}

/// `∫_{τ₀}^{τ₁} ∂_{n(y)} G₁(τ, z−y) dτ` with scalar separation `w = z−y`
/// and outward normal `n ∈ {−1, +1}`.  The kernel is
/// `G·(w·n)/(2τ)`, whose primitive in `τ` is `(w n / 2c)·erfc(c/2√τ)`.
pub fn double_slab_1d(w: Complex64, n: f64, tau0: f64, tau1: f64) -> Result<Complex64> {
    check_slab_range(tau0, tau1)?;
    if w == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = separation_root(w * w)?;
    let upper = erfc_c(c / (2.0 * tau1.sqrt()));
    let lower = if tau0 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        erfc_c(c / (2.0 * tau0.sqrt()))
    };
    Ok(0.5 * n * w / c * (upper - lower))
}

/// `∫_{τ₀}^{τ₁} ∂_{n(y)} G₂(τ, z−y) dτ` with `wdotn = (z−y)·n(y)` and
/// `csq = (z−y)·(z−y)`; the primitive in `τ` is
/// `(wdotn / 2π csq)·e^{−csq/4τ}`.
pub fn double_slab_2d(wdotn: Complex64, csq: Complex64, tau0: f64, tau1: f64) -> Result<Complex64> {
    check_slab_range(tau0, tau1)?;
    if csq == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if tau0 == 0.0 && csq.re <= 0.0 {
        return Err(Error::Guard(format!(
            "squared separation {csq} has no decay at τ → 0"
        )));
    }
    separation_root(csq)?;
    let upper = (-csq / (4.0 * tau1)).exp();
    let lower = if tau0 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (-csq / (4.0 * tau0)).exp()
    };
    Ok(wdotn / (2.0 * std::f64::consts::PI * csq) * (upper - lower))
}

fn real_squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Single-layer collocation matrices `B_m` (`m = i − l` slabs back):
/// `B_m[j,k]` integrates the kernel from node `k` to node `j` over
/// `τ ∈ [max(0,(m−½))Δt, (m+½)Δt]`, including the surface weight.
pub fn step_matrices(grid: &SpaceTimeGrid) -> Result<Vec<DMatrix<Complex64>>> {
    let nb = grid.nb();
    let dt = grid.dt();
    let d = grid.domain.dimension();
    let mut mats = Vec::with_capacity(grid.nt);
    for m in 0..grid.nt {
        let tau0 = if m == 0 { 0.0 } else { (m as f64 - 0.5) * dt };
        let tau1 = (m as f64 + 0.5) * dt;
        let mut mat = DMatrix::<Complex64>::zeros(nb, nb);
        for j in 0..nb {
            for k in 0..nb {
                let entry = if d == 1 {
                    let csq = real_squared_distance(&grid.nodes[j].point, &grid.nodes[k].point);
                    grid.nodes[k].weight * single_slab_1d(Complex64::new(csq, 0.0), tau0, tau1)?
                } else if j == k {
                    // The flat-panel weight already contains the surface
                    // integration across the panel.
                    Complex64::new(panel_self_slab_2d(grid.nodes[j].weight, tau0, tau1)?, 0.0)
                } else {
                    let csq = real_squared_distance(&grid.nodes[j].point, &grid.nodes[k].point);
                    grid.nodes[k].weight * single_slab_2d(Complex64::new(csq, 0.0), tau0, tau1)?
                };
                mat[(j, k)] = entry;
            }
        }
        mats.push(mat);
    }
    Ok(mats)
}

/// ∞-norm condition number from an explicitly computed inverse (the
/// blocks are small, so this is exact and cheap); `None` if singular.
pub(crate) fn cond_inf(mat: &DMatrix<Complex64>) -> Option<f64> {
    let inv = mat.clone().lu().try_inverse()?;
    let norm = |m: &DMatrix<Complex64>| -> f64 {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Some(norm(mat) * norm(&inv))
}

fn inf_norm(mat: &DMatrix<Complex64>) -> f64 {
    (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU of the leading block, with a tiny Tikhonov shift `1e−10·‖B₀‖` when
/// the block is ill-conditioned beyond 1e12 or outright singular.
pub(crate) fn lu_with_conditioning(
    mat: &DMatrix<Complex64>,
) -> Result<(nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, bool)> {
    let healthy = matches!(cond_inf(mat), Some(c) if c <= 1e12);
    if healthy {
        return Ok((mat.clone().lu(), false));
    }
    let shift = Complex64::new(1e-10 * inf_norm(mat), 0.0);
    let regularized = mat + DMatrix::<Complex64>::identity(mat.nrows(), mat.ncols()) * shift;
    match cond_inf(&regularized) {
        Some(c) if c.is_finite() => Ok((regularized.lu(), true)),
        _ => Err(Error::Numerical(
            "leading collocation block is singular even after regularization".into(),
        )),
    }
}

fn check_same_grid(a: &SpaceTimeGrid, b: &SpaceTimeGrid) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(
            "boundary data lives on a different space-time grid".into(),
        ));
    }
    Ok(())
}

/// Applies the discrete single-layer operator to a density: returns
/// `(Vq)(t_i, x_j)` on the same grid (the first-kind left-hand side).
pub fn boundary_operator_apply(grid: &SpaceTimeGrid, q: &BoundaryDensity) -> Result<BoundaryDensity> {
    check_same_grid(grid, &q.grid)?;
    let mats = step_matrices(grid)?;
    apply_with_matrices(grid, &mats, q)
}

fn apply_with_matrices(
    grid: &SpaceTimeGrid,
    mats: &[DMatrix<Complex64>],
    q: &BoundaryDensity,
) -> Result<BoundaryDensity> {
    let nb = grid.nb();
    let mut out = BoundaryDensity::zeros(grid);
    let mut slab = DVector::<Complex64>::zeros(nb);
    for i in 0..grid.nt {
        let mut acc = DVector::<Complex64>::zeros(nb);
        for l in 0..=i {
            for k in 0..nb {
                slab[k] = q.at(l, k);
            }
            acc += &mats[i - l] * &slab;
        }
        for j in 0..nb {
            out.values[i * nb + j] = acc[j];
        }
    }
    Ok(out)
}

/// Solves the first-kind system `Vq = g` for the boundary density by
/// causal time marching: one LU factorization of the leading block, then
/// back-substitution of the Toeplitz history at every step.
pub fn volterra_solve(grid: &SpaceTimeGrid, g: &BoundaryDensity) -> Result<BoundaryDensity> {
    check_same_grid(grid, &g.grid)?;
    let nb = grid.nb();
    let mats = step_matrices(grid)?;
    let (lu, _) = lu_with_conditioning(&mats[0])?;
    let mut q = BoundaryDensity::zeros(grid);
    let mut hist = DVector::<Complex64>::zeros(nb);
    for i in 0..grid.nt {
        let mut rhs = DVector::<Complex64>::from_fn(nb, |j, _| g.at(i, j));
        for m in 1..=i {
            for k in 0..nb {
                hist[k] = q.at(i - m, k);
            }
            rhs -= &mats[m] * &hist;
        }
        let sol = lu.solve(&rhs).ok_or_else(|| {
            Error::Numerical("time-marching solve failed on a leading block".into())
        })?;
        for j in 0..nb {
            q.values[i * nb + j] = sol[j];
        }
    }
    Ok(q)
}

/// First-kind Dirichlet solve: given boundary data `g`, returns the
/// single-layer density `q` with `Vq = g` (alias for [`volterra_solve`]).
pub fn dirichlet_solve_bie(grid: &SpaceTimeGrid, g: &BoundaryDensity) -> Result<BoundaryDensity> {
    volterra_solve(grid, g)
}

fn check_eval_point(domain: &DomainSpec, t: f64, t_final: f64, z: &ComplexPoint) -> Result<()> {
    if !(t > 0.0) || t > t_final * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "evaluation time {t} outside (0, {t_final}]"
        )));
    }
    if !crate::geometry::egg_contains(domain, z, true)? {
        return Err(Error::Guard(format!(
            "evaluation point (re {:?}, im {:?}) lies outside the closed \
             analyticity egg of the domain",
            z.re, z.im
        )));
    }
    Ok(())
}

/// Evaluates the single-layer potential of a density at time `t` and a
/// (possibly complex) point `z` in the closed analyticity egg.
pub fn single_layer_eval(q: &BoundaryDensity, t: f64, z: &ComplexPoint) -> Result<Complex64> {
    let grid = &q.grid;
    check_eval_point(&grid.domain, t, grid.t_final, z)?;
    let d = grid.domain.dimension();
    if z.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "point of dimension {} in a domain of dimension {d}",
            z.dim()
        )));
    }
    let dt = grid.dt();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..grid.nt {
        let slab_start = l as f64 * dt;
        if slab_start >= t {
            break;
        }
        let tau0 = (t - (l + 1) as f64 * dt).max(0.0);
        let tau1 = t - slab_start;
        for (k, node) in grid.nodes.iter().enumerate() {
            let csq = z.minus_real(&node.point)?.complex_square();
            let contribution = if d == 1 {
                node.weight * single_slab_1d(csq, tau0, tau1)?
            } else if csq == Complex64::new(0.0, 0.0) {
                Complex64::new(panel_self_slab_2d(node.weight, tau0, tau1)?, 0.0)
            } else {
                node.weight * single_slab_2d(csq, tau0, tau1)?
            };
            acc += q.at(l, k) * contribution;
        }
    }
    Ok(acc)
}

/// Evaluates the single-layer potential at a real point.
pub fn single_layer_eval_real(q: &BoundaryDensity, t: f64, x: &[f64]) -> Result<Complex64> {
    single_layer_eval(q, t, &ComplexPoint::real(x.to_vec()))
}

/// Evaluates the double-layer potential of boundary values `u` at time
/// `t` and point `z`: `D u(t,z) = ∫₀ᵗ ∫_∂Ω ∂_{n(y)}G(t−s, z−y) u(s,y)`.
pub fn double_layer_eval(u: &BoundaryDensity, t: f64, z: &ComplexPoint) -> Result<Complex64> {
    let grid = &u.grid;
    check_eval_point(&grid.domain, t, grid.t_final, z)?;
    let d = grid.domain.dimension();
    if z.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "point of dimension {} in a domain of dimension {d}",
            z.dim()
        )));
    }
    let dt = grid.dt();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..grid.nt {
        let slab_start = l as f64 * dt;
        if slab_start >= t {
            break;
        }
        let tau0 = (t - (l + 1) as f64 * dt).max(0.0);
        let tau1 = t - slab_start;
        for (k, node) in grid.nodes.iter().enumerate() {
            let diff = z.minus_real(&node.point)?;
            let slab = if d == 1 {
                let w = diff.as_scalar()?;
                double_slab_1d(w, node.normal[0], tau0, tau1)?
            } else {
                let csq = diff.complex_square();
                let wdotn: Complex64 = diff
                    .re
                    .iter()
                    .zip(&diff.im)
                    .zip(&node.normal)
                    .map(|((&re, &im), &n)| Complex64::new(re, im) * n)
                    .sum();
                double_slab_2d(wdotn, csq, tau0, tau1)?
            };
            acc += u.at(l, k) * node.weight * slab;
        }
    }
    Ok(acc)
}
