//! Boundary-control synthesis for centred balls via Wick rotation.
//!
//! A state `u` holomorphic past the closed egg of `B(0, R)` is reached at
//! time `T` by one explicit field.  Rotate the target onto the imaginary
//! axis (the egg of a centred ball is invariant under `z ↦ iz`, so the
//! rotated trace `y ↦ u(iy)` is defined for `|y|` up to the analyticity
//! radius), damp it with a smooth radial cutoff `ψ`, flow the product
//! under the heat semigroup, and rotate back:
//!
//! ```text
//! Φ_t(w) = (4πt)^{-d/2} ∫ exp(-(w-y')ᵀ(w-y')/4t) · u(iy') · ψ(|y'|) dy',
//! U(t, x) = Φ_{T-t}(-ix).
//! ```
//!
//! `Φ_t` is entire in `w` for every `t > 0` (the integrand is), so each
//! coordinate satisfies the Cauchy–Riemann equations.  The un-reversed
//! slice `V(t, x) = Φ_t(-ix)` solves the *backward* heat equation
//! `∂_t V + Δ_x V = 0` (the Wick rotation flips the sign of the
//! Laplacian); after the time reversal `t ↦ T - t` the field `U` solves
//! the ordinary forward equation `∂_t U = Δ_x U`, which is what lets a
//! standard marching scheme replay it.  As `t → T` the flow time shrinks
//! to zero, the kernel concentrates, and `U(T, x) → u(x)·ψ(|x|) = u(x)`
//! on the ball (the cutoff is exactly 1 there).  Reading off `U` at
//! `t = 0` gives the initial state `g`, and its boundary trace over time
//! gives the Dirichlet control `h`: driving the heat equation from `g`
//! with control `h` lands on the target at time `T`.
//!
//! Two error sources are tracked honestly instead of hidden:
//!
//! * **Amplification.**  At `w = -ix` the kernel carries a factor up to
//!   `exp(|x|²/4t)`; once that passes [`AMPLIFICATION_LIMIT`] the final
//!   value is a cancellation of quadrature terms beyond double precision,
//!   so evaluations refuse with a [`Error::Guard`] carrying the smallest
//!   usable flow time rather than return noise.
//! * **Cutoff tail.**  The mass `(1-ψ)·u(iy)` discarded outside the
//!   cutoff perturbs every schedule entry by at most
//!   `(4πτ)^{-d/2} ∫ (1-ψ(|y|)) |u(iy)| e^{-(|y|²-R²)/4τ} dy`; the
//!   schedule metadata reports the worst bound over its own flow times.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::{ComplexPoint, DomainSpec};
use crate::quad::{composite_gauss_legendre, panels_for_spacing};
use crate::targets::{CutoffBump, HolomorphicTarget, TargetFamily};
use crate::{Error, Result};

/// Largest tolerated kernel amplification `exp(|ℑw|²/4t)`.  Beyond this
/// the analytic continuation is a cancellation of more than twelve
/// digits and double precision returns noise.
pub const AMPLIFICATION_LIMIT: f64 = 1e12;

/// Gauss–Legendre order per quadrature panel.
const QUAD_ORDER: usize = 16;

/// Panel width in units of the required node spacing: 16 nodes per panel
/// resolve about two kernel widths (or oscillation wavelengths) to full
/// precision.
const PANEL_SPACINGS: f64 = 6.0;

/// Angular samples used when bounding the cutoff tail of a planar target.
const TAIL_ANGLES: usize = 64;

/// Fixed-order pairwise summation, so quadrature results are bitwise
/// reproducible no matter how the surrounding work is scheduled.
pub(crate) fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    match terms.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => terms[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

fn amplification(im_norm: f64, t: f64) -> f64 {
    (im_norm * im_norm / (4.0 * t)).exp()
}

/// Smallest flow time at which a point with imaginary displacement
/// `im_norm` stays within the amplification guard.
fn guarded_minimum_time(im_norm: f64) -> f64 {
    im_norm * im_norm / (4.0 * AMPLIFICATION_LIMIT.ln())
}

fn check_guard(im_norm: f64, t: f64) -> Result<()> {
    let amp = amplification(im_norm, t);
    if amp > AMPLIFICATION_LIMIT {
        return Err(Error::Guard(format!(
            "evaluating at imaginary displacement {im_norm:.6} with flow time {t:.3e} \
             would amplify quadrature noise by {amp:.2e} (limit {AMPLIFICATION_LIMIT:.0e}); \
             increase the flow time to at least {:.3e}",
            guarded_minimum_time(im_norm)
        )));
    }
    Ok(())
}

/// Slice data at one flow time, tabulated on a quadrature grid:
/// everything about a kernel evolution that does not depend on the
/// evaluation point.  Building the table costs one sweep of data
/// evaluations; every subsequent point costs only kernel exponentials.
/// The synthesis tabulates the rotated trace `u(iy)ψ(|y|)`; the
/// verification experiments reuse the same machinery for real-axis data.
pub(crate) struct SliceTable {
    dim: usize,
    t: f64,
    prefactor: f64,
    nodes: Vec<f64>,
    /// Nonzero data entries `(i, j, weight·data)`; `j = 0` when `d = 1`.
    entries: Vec<(u32, u32, Complex64)>,
}

impl SliceTable {
    /// Tabulates `data` (already including any cutoff; return exact zero
    /// to skip a node) against the flow-`t` kernel over
    /// `[-half_width, half_width]^d`, resolved finely enough for every
    /// evaluation point with imaginary displacement up to `max_im_norm`.
    pub(crate) fn tabulate(
        dim: usize,
        half_width: f64,
        t: f64,
        max_im_norm: f64,
        data: &dyn Fn(&[f64]) -> Result<Complex64>,
    ) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidArgument(format!(
                "slice evolution handles d = 1 and d = 2, got d = {dim}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "flow time must be positive and finite, got {t}"
            )));
        }
        // The kernel has width ~2√t; evaluated at ℑw ≠ 0 it also
        // oscillates with wavelength 4πt/|ℑw|.  Space the nodes to
        // resolve the finer of the two.
        let mut spacing = t.sqrt() / 3.0;
        if max_im_norm > 0.0 {
            spacing = spacing.min(2.0 * std::f64::consts::PI * t / (3.0 * max_im_norm));
        }
        let panels =
            panels_for_spacing(-half_width, half_width, PANEL_SPACINGS * spacing).max(2);
        let (nodes, weights) =
            composite_gauss_legendre(-half_width, half_width, panels, QUAD_ORDER)?;

        let mut entries = Vec::new();
        match dim {
            1 => {
                for (i, (&y, &wt)) in nodes.iter().zip(&weights).enumerate() {
                    let u = data(&[y])?;
                    if u.re == 0.0 && u.im == 0.0 {
                        continue;
                    }
                    entries.push((i as u32, 0, u * wt));
                }
            }
            _ => {
                for (i, (&y1, &w1)) in nodes.iter().zip(&weights).enumerate() {
                    for (j, (&y2, &w2)) in nodes.iter().zip(&weights).enumerate() {
                        let u = data(&[y1, y2])?;
                        if u.re == 0.0 && u.im == 0.0 {
                            continue;
                        }
                        entries.push((i as u32, j as u32, u * (w1 * w2)));
                    }
                }
            }
        }
        let prefactor = (4.0 * std::f64::consts::PI * t).powf(-(dim as f64) / 2.0);
        Ok(Self {
            dim,
            t,
            prefactor,
            nodes,
            entries,
        })
    }

    /// Tabulates the Wick-rotated trace `u(iy)·ψ(|y|)` of a target.
    fn build(
        target: &HolomorphicTarget,
        cutoff: &CutoffBump,
        t: f64,
        max_im_norm: f64,
    ) -> Result<Self> {
        let d = target.dim();
        if cutoff.r_zero > target.analyticity_radius * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "cutoff support [0, {}] reaches past the target's analyticity radius {}",
                cutoff.r_zero, target.analyticity_radius
            )));
        }
        let data = |y: &[f64]| -> Result<Complex64> {
            let r = if d == 1 { y[0].abs() } else { y[0].hypot(y[1]) };
            let psi = cutoff.eval(r);
            if psi == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let p = ComplexPoint::new(vec![0.0; d], y.to_vec())?;
            Ok(target.value(&p)? * psi)
        };
        Self::tabulate(d, cutoff.r_zero, t, max_im_norm, &data)
    }

    /// `Φ_t(w)` from the tabulated slice.
    pub(crate) fn eval(&self, w: &ComplexPoint) -> Result<Complex64> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "evaluation point has dimension {}, slice has {}",
                w.dim(),
                self.dim
            )));
        }
        check_guard(w.im_norm(), self.t)?;
        let quarter_t = 4.0 * self.t;
        let terms: Vec<Complex64> = if self.dim == 1 {
            let w0 = w.as_scalar()?;
            self.entries
                .iter()
                .map(|&(i, _, coeff)| {
                    let dz = w0 - self.nodes[i as usize];
                    coeff * (-dz * dz / quarter_t).exp()
                })
                .collect()
        } else {
            self.entries
                .iter()
                .map(|&(i, j, coeff)| {
                    let y = [self.nodes[i as usize], self.nodes[j as usize]];
                    let q = w.minus_real(&y).expect("dimension checked").complex_square();
                    coeff * (-q / quarter_t).exp()
                })
                .collect()
        };
        let value = self.prefactor * pairwise_sum(&terms);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Numerical(format!(
                "slice evolution produced a non-finite value at t = {}",
                self.t
            )));
        }
        Ok(value)
    }
}

/// Heat evolution of the rotated, cut-off slice data, analytically
/// continued to the complex point `w`:
///
/// `Φ_t(w) = (4πt)^{-d/2} ∫ exp(-(w-y')ᵀ(w-y')/4t) u(iy') ψ(|y'|) dy'`.
///
/// For real `w` this is the ordinary heat evolution of `y ↦ u(iy)ψ(|y|)`.
/// Refuses with [`Error::Guard`] when `exp(|ℑw|²/4t)` exceeds
/// [`AMPLIFICATION_LIMIT`].
pub fn heat_evolve_slice(
    target: &HolomorphicTarget,
    cutoff: &CutoffBump,
    t: f64,
    w: &ComplexPoint,
) -> Result<Complex64> {
    let table = SliceTable::build(target, cutoff, t, w.im_norm())?;
    table.eval(w)
}

/// Grid resolutions for a synthesized schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthesisGrids {
    /// Interior resolution: number of spatial cells.  For `d = 1` the
    /// interior grid is the `nx + 1` uniform points of `[-R, R]`
    /// including the endpoints; for `d = 2` it is `nx` radial cell
    /// centres `(i + ½)·R/nx`.
    pub nx: usize,
    /// Angular cell count for `d = 2` (cell centres `j·2π/ntheta`);
    /// ignored for `d = 1`.
    pub ntheta: usize,
    /// Number of schedule rows, including both `t = 0` and `t = T`.
    pub nt: usize,
}

/// Provenance and quality metrics recorded with a schedule.
#[derive(Clone, Debug)]
pub struct ScheduleMetadata {
    /// Human-readable description of the synthesized target.
    pub target_description: String,
    /// Grid resolutions the schedule was built on.
    pub grids: SynthesisGrids,
    /// Largest kernel amplification factor any schedule entry needed.
    pub amplification: f64,
    /// Upper bound on the error any entry inherits from the mass
    /// discarded outside the cutoff.
    pub cutoff_tail_bound: f64,
    /// Largest |imaginary part| dropped when storing the (analytically
    /// real) samples; a residue near the tail bound is healthy, a large
    /// one signals a quadrature problem.
    pub max_imaginary_residue: f64,
    /// Sup distance between the last computed boundary row and the
    /// target-trace row at `t = T`; measures how settled the control is
    /// when the limit value takes over.
    pub final_step_mismatch: f64,
}

/// A complete boundary-control schedule: initial state, boundary nodes,
/// and the control values on a (time × node) grid.
#[derive(Clone, Debug)]
pub struct ControlSchedule {
    /// The ball the control acts on.
    pub domain: DomainSpec,
    /// Steering horizon `T`.
    pub t_final: f64,
    /// Interior sample points (matching the reference solver's grid).
    pub interior_points: Vec<Vec<f64>>,
    /// Initial state `g` on the interior points.
    pub initial: Vec<f64>,
    /// Boundary node coordinates.
    pub boundary_nodes: Vec<Vec<f64>>,
    /// Row times `0 = t_0 < … < t_{nt-1} = T`.
    pub times: Vec<f64>,
    /// Control values, row-major `time × node`.
    pub boundary_values: Vec<f64>,
    /// Provenance and quality metrics.
    pub metadata: ScheduleMetadata,
}

impl ControlSchedule {
    /// Number of boundary nodes.
    pub fn nodes(&self) -> usize {
        self.boundary_nodes.len()
    }

    /// Control value at schedule row `row` and boundary node `node`.
    pub fn control_at(&self, row: usize, node: usize) -> f64 {
        self.boundary_values[row * self.nodes() + node]
    }

    /// Piecewise-linear interpolation of the control in time (clamped to
    /// the schedule's span, so marching solvers may ask for `T + ulp`).
    pub fn control_interp(&self, t: f64, node: usize) -> f64 {
        let nt = self.times.len();
        let t = t.clamp(0.0, self.t_final);
        let dt = self.times[1] - self.times[0];
        let k = ((t / dt).floor() as usize).min(nt - 2);
        let lambda = ((t - self.times[k]) / dt).clamp(0.0, 1.0);
        (1.0 - lambda) * self.control_at(k, node) + lambda * self.control_at(k + 1, node)
    }
}

fn describe_target(target: &HolomorphicTarget) -> String {
    match &target.family {
        TargetFamily::Polynomial { monomials, d } => {
            let body = monomials
                .iter()
                .filter(|m| m.coeff != 0.0)
                .map(|m| {
                    let vars: String = m
                        .powers
                        .iter()
                        .enumerate()
                        .filter(|(_, &p)| p > 0)
                        .map(|(k, &p)| {
                            if p == 1 {
                                format!(" z{}", k + 1)
                            } else {
                                format!(" z{}^{}", k + 1, p)
                            }
                        })
                        .collect();
                    format!("{}{}", m.coeff, vars)
                })
                .collect::<Vec<_>>()
                .join(" + ");
            format!("polynomial [{body}] (d = {d})")
        }
        TargetFamily::Lorentzian { alpha, d } => format!("lorentzian alpha = {alpha} (d = {d})"),
        TargetFamily::PoleQuotient { pole } => format!("pole quotient at {pole}"),
        TargetFamily::SingularE1 { x0, a } => {
            format!("singular exponential-integral family x0 = {x0:?}, a = {a}")
        }
    }
}

/// Worst-case bound on what the discarded cutoff tail contributes to any
/// schedule entry with flow time `tau` and imaginary displacement up to
/// `ball_radius`:
/// `(4πτ)^{-d/2} ∫_{r_one ≤ |y| ≤ r_zero} (1-ψ)|u(iy)| e^{-(|y|²-R²)/4τ} dy`.
fn cutoff_tail_bound(
    target: &HolomorphicTarget,
    cutoff: &CutoffBump,
    tau: f64,
    ball_radius: f64,
) -> Result<f64> {
    let d = target.dim();
    let (ys, ws) = composite_gauss_legendre(cutoff.r_one, cutoff.r_zero, 8, 12)?;
    let mut integral = 0.0;
    match d {
        1 => {
            for (&y, &wt) in ys.iter().zip(&ws) {
                let damp = (-(y * y - ball_radius * ball_radius) / (4.0 * tau)).exp();
                let mass = target.value(&ComplexPoint::scalar(0.0, y))?.norm()
                    + target.value(&ComplexPoint::scalar(0.0, -y))?.norm();
                integral += wt * (1.0 - cutoff.eval(y)) * mass * damp;
            }
        }
        _ => {
            let dth = 2.0 * std::f64::consts::PI / TAIL_ANGLES as f64;
            for (&r, &wt) in ys.iter().zip(&ws) {
                let damp = (-(r * r - ball_radius * ball_radius) / (4.0 * tau)).exp();
                let mut ring = 0.0;
                for j in 0..TAIL_ANGLES {
                    let (s, c) = (j as f64 * dth).sin_cos();
                    let p = ComplexPoint::new(vec![0.0, 0.0], vec![r * c, r * s])?;
                    ring += target.value(&p)?.norm() * dth;
                }
                integral += wt * r * (1.0 - cutoff.eval(r)) * ring * damp;
            }
        }
    }
    Ok((4.0 * std::f64::consts::PI * tau).powf(-(d as f64) / 2.0) * integral)
}

/// Synthesizes the full control schedule steering the heat equation on
/// `B(0, R)` from `g(x) = Φ_T(-ix)` to the target at time `T`, with the
/// Dirichlet control `h(t_k, y_j) = Φ_{T-t_k}(-iy_j)` for `t_k < T` and
/// the target's own boundary trace at `t_k = T` (the continuity limit).
///
/// Requires the cutoff to be exactly 1 on the ball's imaginary slice
/// (`r_one ≥ R`) and refuses with [`Error::Guard`] when the smallest
/// look-ahead `T - t_k` would break the amplification limit.
pub fn wick_synthesize(
    target: &HolomorphicTarget,
    domain: &DomainSpec,
    t_final: f64,
    cutoff: &CutoffBump,
    grids: SynthesisGrids,
) -> Result<ControlSchedule> {
    let d = target.dim();
    let radius = match domain {
        DomainSpec::Ball { center, radius } if center.iter().all(|&c| c == 0.0) => {
            if center.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "target dimension {d} vs ball dimension {}",
                    center.len()
                )));
            }
            *radius
        }
        _ => {
            return Err(Error::InvalidDomain(
                "synthesis is set up for balls centred at the origin".into(),
            ))
        }
    };
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "steering horizon must be positive and finite, got {t_final}"
        )));
    }
    if cutoff.r_one < radius * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "the cutoff must be exactly 1 on the ball's imaginary slice: \
             need inner radius ≥ {radius}, got {}",
            cutoff.r_one
        )));
    }
    if grids.nt < 2 {
        return Err(Error::InvalidArgument(
            "a schedule needs at least rows t = 0 and t = T".into(),
        ));
    }
    if grids.nx < 2 || (d == 2 && (grids.ntheta < 4 || grids.ntheta % 2 != 0)) {
        return Err(Error::InvalidArgument(format!(
            "interior grid too coarse: nx = {}, ntheta = {}",
            grids.nx, grids.ntheta
        )));
    }

    let nt = grids.nt;
    let dt = t_final / (nt - 1) as f64;
    let mut times: Vec<f64> = (0..nt).map(|k| k as f64 * dt).collect();
    times[nt - 1] = t_final;

    // Every entry evaluates at imaginary displacement ≤ R; the worst
    // flow time is the final step Δt.  Refuse up front with the remedy.
    check_guard(radius, dt).map_err(|_| {
        Error::Guard(format!(
            "the last boundary row before t = T has look-ahead {dt:.3e}, which would \
             amplify quadrature noise by {:.2e} at displacement {radius} \
             (limit {AMPLIFICATION_LIMIT:.0e}); use fewer rows or a larger horizon so \
             the row spacing is at least {:.3e}",
            amplification(radius, dt),
            guarded_minimum_time(radius)
        ))
    })?;

    // Interior and boundary geometry, matching the reference solver's
    // grids exactly (interval points for d = 1, polar cell centres for
    // d = 2) so a replay needs no spatial interpolation.
    let (interior_points, boundary_nodes): (Vec<Vec<f64>>, Vec<Vec<f64>>) = if d == 1 {
        let h = 2.0 * radius / grids.nx as f64;
        let pts = (0..=grids.nx).map(|i| vec![-radius + i as f64 * h]).collect();
        (pts, vec![vec![-radius], vec![radius]])
    } else {
        let dr = radius / grids.nx as f64;
        let dth = 2.0 * std::f64::consts::PI / grids.ntheta as f64;
        let mut pts = Vec::with_capacity(grids.nx * grids.ntheta);
        for i in 0..grids.nx {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..grids.ntheta {
                let (s, c) = (j as f64 * dth).sin_cos();
                pts.push(vec![r * c, r * s]);
            }
        }
        let rim = (0..grids.ntheta)
            .map(|j| {
                let (s, c) = (j as f64 * dth).sin_cos();
                vec![radius * c, radius * s]
            })
            .collect();
        (pts, rim)
    };

    let rotate = |p: &[f64]| -> Result<ComplexPoint> {
        ComplexPoint::new(vec![0.0; d], p.iter().map(|&v| -v).collect())
    };

    let nodes = boundary_nodes.len();
    let mut boundary_values = vec![0.0; nt * nodes];
    let mut max_residue: f64 = 0.0;

    for k in 0..nt - 1 {
        let tau = t_final - times[k];
        let table = SliceTable::build(target, cutoff, tau, radius)?;
        let row: Vec<(f64, f64)> = boundary_nodes
            .par_iter()
            .map(|y| {
                let value = table.eval(&rotate(y)?)?;
                Ok((value.re, value.im.abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (j, (re, im)) in row.into_iter().enumerate() {
            boundary_values[k * nodes + j] = re;
            max_residue = max_residue.max(im);
        }
    }
    for (j, y) in boundary_nodes.iter().enumerate() {
        let trace = target.value_real(y)?;
        boundary_values[(nt - 1) * nodes + j] = trace.re;
        max_residue = max_residue.max(trace.im.abs());
    }

    let table = SliceTable::build(target, cutoff, t_final, radius)?;
    let initial: Vec<f64> = {
        let rows: Vec<(f64, f64)> = interior_points
            .par_iter()
            .map(|x| {
                let value = table.eval(&rotate(x)?)?;
                Ok((value.re, value.im.abs()))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.into_iter()
            .map(|(re, im)| {
                max_residue = max_residue.max(im);
                re
            })
            .collect()
    };

    let final_step_mismatch = (0..nodes)
        .map(|j| (boundary_values[(nt - 2) * nodes + j] - boundary_values[(nt - 1) * nodes + j]).abs())
        .fold(0.0, f64::max);

    // The tail enters each row with its own flow time; report the worst.
    let mut tail = 0.0_f64;
    for k in 0..nt - 1 {
        tail = tail.max(cutoff_tail_bound(target, cutoff, t_final - times[k], radius)?);
    }

    let metadata = ScheduleMetadata {
        target_description: describe_target(target),
        grids,
        amplification: amplification(radius, dt),
        cutoff_tail_bound: tail,
        max_imaginary_residue: max_residue,
        final_step_mismatch,
    };

    Ok(ControlSchedule {
        domain: domain.clone(),
        t_final,
        interior_points,
        initial,
        boundary_nodes,
        times,
        boundary_values,
        metadata,
    })
}

/// Sup and root-mean-square errors of a replayed schedule.
#[derive(Clone, Copy, Debug)]
pub struct RoundtripReport {
    /// Sup over the interior grid of |field(T, x) − target(x)|.
    pub sup_error: f64,
    /// Root-mean-square of the same differences.
    pub l2_error: f64,
}

fn grids_match(actual: &[Vec<f64>], expected: &[Vec<f64>], what: &str) -> Result<()> {
    let same = actual.len() == expected.len()
        && actual.iter().zip(expected).all(|(a, b)| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
        });
    if same {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "schedule {what} grid does not match the resolution it declares"
        )))
    }
}

/// Replays a schedule through the independent marching solver and
/// compares the arrival field at `t = T` against the target on the
/// interior grid.
pub fn roundtrip_verify(
    schedule: &ControlSchedule,
    target: &HolomorphicTarget,
    nt_solver: usize,
) -> Result<RoundtripReport> {
    let d = schedule.domain.dimension();
    if d != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "schedule dimension {d} vs target dimension {}",
            target.dim()
        )));
    }
    let radius = match &schedule.domain {
        DomainSpec::Ball { radius, .. } => *radius,
        _ => {
            return Err(Error::InvalidDomain(
                "roundtrip replay needs a ball domain".into(),
            ))
        }
    };
    let grids = schedule.metadata.grids;

    let field = if d == 1 {
        let nx = grids.nx;
        let h = 2.0 * radius / nx as f64;
        let expected: Vec<Vec<f64>> = (0..=nx).map(|i| vec![-radius + i as f64 * h]).collect();
        grids_match(&schedule.interior_points, &expected, "interior")?;
        let u0 = |x: &[f64]| -> Complex64 {
            let i = ((x[0] + radius) / h).round() as usize;
            Complex64::new(schedule.initial[i], 0.0)
        };
        let g = |t: f64, x: &[f64]| -> Complex64 {
            let node = usize::from(x[0] > 0.0);
            Complex64::new(schedule.control_interp(t, node), 0.0)
        };
        crate::fdm::crank_nicolson_interval(&schedule.domain, schedule.t_final, nx, nt_solver, u0, g)?
    } else {
        let (nr, ntheta) = (grids.nx, grids.ntheta);
        let dr = radius / nr as f64;
        let dth = 2.0 * std::f64::consts::PI / ntheta as f64;
        let mut expected = Vec::with_capacity(nr * ntheta);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..ntheta {
                let (s, c) = (j as f64 * dth).sin_cos();
                expected.push(vec![r * c, r * s]);
            }
        }
        grids_match(&schedule.interior_points, &expected, "interior")?;
        let angle_index = |x: &[f64]| -> usize {
            let theta = x[1].atan2(x[0]);
            ((theta / dth).round() as i64).rem_euclid(ntheta as i64) as usize
        };
        let u0 = |x: &[f64]| -> Complex64 {
            let r = x[0].hypot(x[1]);
            let i = ((r / dr) - 0.5).round() as usize;
            Complex64::new(schedule.initial[i * ntheta + angle_index(x)], 0.0)
        };
        let g = |t: f64, x: &[f64]| -> Complex64 {
            Complex64::new(schedule.control_interp(t, angle_index(x)), 0.0)
        };
        crate::fdm::crank_nicolson_disk(
            &schedule.domain,
            schedule.t_final,
            nr,
            ntheta,
            nt_solver,
            u0,
            g,
        )?
    };

    let row = field.time_index(schedule.t_final)?;
    let mut sup = 0.0_f64;
    let mut sum_sq = 0.0;
    for (p, x) in field.spatial_grid.iter().enumerate() {
        let diff = (field.value(row, p) - target.value_real(x)?).norm();
        sup = sup.max(diff);
        sum_sq += diff * diff;
    }
    Ok(RoundtripReport {
        sup_error: sup,
        l2_error: (sum_sq / field.npoints() as f64).sqrt(),
    })
}
