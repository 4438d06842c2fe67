//! Independent finite-difference reference solvers for the heat equation.
//!
//! These exist to cross-check the layer-potential and synthesis machinery
//! with a method that shares *no* code with it: Crank–Nicolson time
//! stepping with Dirichlet boundary control, on an interval (Thomas
//! tridiagonal solve) and on a disk (cell-centered polar grid with
//! Peaceman–Rachford ADI).
//!
//! On the disk the radial grid is staggered, `r_i = (i+½)Δr`: the origin
//! is an interior cell *face* of zero area, so the `1/r` coordinate
//! singularity never enters the stencil.  The Dirichlet value at `r = R`
//! is imposed through a quadratically extrapolated ghost cell
//! `u_ghost = (u_{nr−2} − 6u_{nr−1} + 8h)/3`, which keeps the boundary
//! second-order accurate.  Boundary data is sampled at half steps
//! `t^{n+½}`, matching the scheme's centering.

use num_complex::Complex64;

use crate::geometry::DomainSpec;
use crate::{Error, Result};

/// A field sampled on a fixed spatial grid at a list of times, stored
/// row-major as `values[row * npoints + p]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub domain: DomainSpec,
    pub times: Vec<f64>,
    pub spatial_grid: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
}

impl FieldSample {
    pub fn npoints(&self) -> usize {
        self.spatial_grid.len()
    }

    pub fn value(&self, row: usize, point: usize) -> Complex64 {
        self.values[row * self.npoints() + point]
    }

    /// Index of the sampled time closest to `t`, if within tolerance.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("time {t} was not sampled by this solve"))
            })
    }

    /// Sup-norm distance between the sampled field at time `t` and a
    /// reference function evaluated on the same spatial grid.
    pub fn sup_error(&self, t: f64, reference: impl Fn(&[f64]) -> Complex64) -> Result<f64> {
        let row = self.time_index(t)?;
        Ok(self
            .spatial_grid
            .iter()
            .enumerate()
            .map(|(p, x)| (self.value(row, p) - reference(x)).norm())
            .fold(0.0, f64::max))
    }
}

/// Complex Thomas solve of a tridiagonal system (no pivoting; all callers
/// assemble diagonally dominant matrices).
pub(crate) fn thomas_solve(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        if i < n - 1 {
            c[i] = sup[i] / m;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] -= c[i] * next;
    }
    d
}

/// Cyclic (periodic) tridiagonal solve via the Sherman–Morrison rank-one
/// update: `corner_first` is the `[0, n−1]` entry, `corner_last` the
/// `[n−1, 0]` entry.
pub(crate) fn cyclic_solve(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    corner_first: Complex64,
    corner_last: Complex64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut diag_mod = diag.to_vec();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= corner_first * corner_last / gamma;
    let y = thomas_solve(sub, &diag_mod, sup, rhs);
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[0] = gamma;
    u[n - 1] = corner_last;
    let z = thomas_solve(sub, &diag_mod, sup, &u);
    let vy = y[0] + corner_first / gamma * y[n - 1];
    let vz = z[0] + corner_first / gamma * z[n - 1];
    let factor = vy / (Complex64::new(1.0, 0.0) + vz);
    y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect()
}

fn check_corner(u0: Complex64, g0: Complex64, whereabouts: &str) -> Result<()> {
    if (u0 - g0).norm() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "initial and boundary data disagree at the {whereabouts} corner \
             by {:.3e}; the scheme needs compatible data",
            (u0 - g0).norm()
        )));
    }
    Ok(())
}

/// Crank–Nicolson on an interval with Dirichlet control at both ends.
///
/// The grid has `nx+1` points including the endpoints; the returned
/// sample holds every time level `0, Δt, …, t_final` on the full grid
/// (endpoint columns carry the exact boundary samples).
pub fn crank_nicolson_interval(
    domain: &DomainSpec,
    t_final: f64,
    nx: usize,
    nt: usize,
    u0: impl Fn(&[f64]) -> Complex64,
    g: impl Fn(f64, &[f64]) -> Complex64,
) -> Result<FieldSample> {
    let (a, b) = match domain {
        DomainSpec::Interval { a, b } => (*a, *b),
        DomainSpec::Ball { center, radius } if center.len() == 1 => {
            (center[0] - radius, center[0] + radius)
        }
        _ => {
            return Err(Error::InvalidDomain(
                "the interval solver needs a one-dimensional domain".into(),
            ))
        }
    };
    if nx < 4 || nt == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need nx ≥ 4, nt ≥ 1, t_final > 0; got nx = {nx}, nt = {nt}, t_final = {t_final}"
        )));
    }
    let h = (b - a) / nx as f64;
    let dt = t_final / nt as f64;
    let kappa = dt / (h * h);
    let xs: Vec<f64> = (0..=nx).map(|i| a + i as f64 * h).collect();

    let mut u: Vec<Complex64> = xs.iter().map(|&x| u0(&[x])).collect();
    check_corner(u[0], g(0.0, &[a]), "left")?;
    check_corner(u[nx], g(0.0, &[b]), "right")?;

    let spatial_grid: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    let mut times = Vec::with_capacity(nt + 1);
    let mut values = Vec::with_capacity((nt + 1) * (nx + 1));
    times.push(0.0);
    values.extend_from_slice(&u);

    let m = nx - 1; // interior unknowns
    let sub = vec![Complex64::new(-0.5 * kappa, 0.0); m];
    let diag = vec![Complex64::new(1.0 + kappa, 0.0); m];
    let sup = vec![Complex64::new(-0.5 * kappa, 0.0); m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];

    for n in 0..nt {
        let t_half = (n as f64 + 0.5) * dt;
        let t_next = (n + 1) as f64 * dt;
        let ga = g(t_half, &[a]);
        let gb = g(t_half, &[b]);
        for i in 1..nx {
            let left = if i == 1 { ga } else { u[i - 1] };
            let right = if i == nx - 1 { gb } else { u[i + 1] };
            rhs[i - 1] = u[i] + 0.5 * kappa * (left - 2.0 * u[i] + right);
        }
        // Implicit boundary columns, held at the half-step value.
        rhs[0] += 0.5 * kappa * ga;
        rhs[m - 1] += 0.5 * kappa * gb;
        let interior = thomas_solve(&sub, &diag, &sup, &rhs);
        u[0] = g(t_next, &[a]);
        u[nx] = g(t_next, &[b]);
        u[1..nx].copy_from_slice(&interior);
        // Keep the half-step convention consistent on the explicit side
        // of the *next* step: interior values are already u^{n+1}.
        times.push(t_next);
        values.extend_from_slice(&u);
    }

    Ok(FieldSample {
        domain: domain.clone(),
        times,
        spatial_grid,
        values,
    })
}

/// Crank–Nicolson (Peaceman–Rachford ADI) on a disk with Dirichlet
/// control on the rim.  The grid is cell-centered polar,
/// `r_i = (i+½)Δr`, `θ_j = 2πj/nθ`; the returned spatial grid lists the
/// Cartesian cell centers.
pub fn crank_nicolson_disk(
    domain: &DomainSpec,
    t_final: f64,
    nr: usize,
    ntheta: usize,
    nt: usize,
    u0: impl Fn(&[f64]) -> Complex64,
    g: impl Fn(f64, &[f64]) -> Complex64,
) -> Result<FieldSample> {
    let (center, radius) = match domain {
        DomainSpec::Ball { center, radius } if center.len() == 2 => (center.clone(), *radius),
        _ => {
            return Err(Error::InvalidDomain(
                "the disk solver needs a two-dimensional ball".into(),
            ))
        }
    };
    if nr < 16 || ntheta < 8 || ntheta % 2 != 0 || nt == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need nr ≥ 16, even nθ ≥ 8, nt ≥ 1, t_final > 0; \
             got nr = {nr}, nθ = {ntheta}, nt = {nt}, t_final = {t_final}"
        )));
    }
    let dr = radius / nr as f64;
    let dth = 2.0 * std::f64::consts::PI / ntheta as f64;
    let dt = t_final / nt as f64;

    let rs: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) * dr).collect();
    let angles: Vec<(f64, f64)> = (0..ntheta)
        .map(|j| {
            let th = j as f64 * dth;
            th.sin_cos()
        })
        .collect();
    let point = |i: usize, j: usize| -> Vec<f64> {
        let (s, c) = angles[j];
        vec![center[0] + rs[i] * c, center[1] + rs[i] * s]
    };
    let rim_point = |j: usize| -> Vec<f64> {
        let (s, c) = angles[j];
        vec![center[0] + radius * c, center[1] + radius * s]
    };

    // Radial operator coefficients: A_r u|_i =
    //   (r_{i+½} u_{i+1} − (r_{i+½}+r_{i−½}) u_i + r_{i−½} u_{i−1}) / (r_i Δr²),
    // with r_{−½} = 0 (zero-area origin face) and the ghost cell folded
    // into the last row.
    let mut sub_r = vec![0.0; nr];
    let mut diag_r = vec![0.0; nr];
    let mut sup_r = vec![0.0; nr];
    let mut bc_r = 0.0; // coefficient of the rim value h in the last row
    for i in 0..nr {
        let r = rs[i];
        let rp = (i + 1) as f64 * dr;
        let rm = i as f64 * dr;
        let scale = 1.0 / (r * dr * dr);
        if i + 1 < nr {
            sub_r[i] = rm * scale;
            diag_r[i] = -(rp + rm) * scale;
            sup_r[i] = rp * scale;
        } else {
            // rp·u_ghost = (rp/3)u_{nr−2} − 2rp·u_{nr−1} + (8rp/3)h.
            sub_r[i] = (rm + rp / 3.0) * scale;
            diag_r[i] = -(3.0 * rp + rm) * scale;
            sup_r[i] = 0.0;
            bc_r = 8.0 * rp / 3.0 * scale;
        }
    }
    let mu_th: Vec<f64> = rs.iter().map(|r| 1.0 / (r * dth * (r * dth))).collect();

    let idx = |i: usize, j: usize| i * ntheta + j;
    let mut u: Vec<Complex64> = (0..nr)
        .flat_map(|i| (0..ntheta).map(move |j| (i, j)))
        .map(|(i, j)| u0(&point(i, j)))
        .collect();
    for j in 0..ntheta {
        // The outermost cell center sits Δr/2 inside the rim; check the
        // initial data extrapolated to the rim against the boundary data
        // there.  Linear extrapolation leaves an O(Δr²) slack, so the
        // comparison is loosened by that much relative to the data size.
        let rim_estimate = (3.0 * u[idx(nr - 1, j)] - u[idx(nr - 2, j)]) / 2.0;
        let g0 = g(0.0, &rim_point(j));
        let slack = 1e-8 + dr * dr * (1.0 + g0.norm());
        if (rim_estimate - g0).norm() > slack {
            return Err(Error::InvalidArgument(format!(
                "initial and boundary data disagree at the rim by {:.3e}; \
                 the scheme needs compatible data",
                (rim_estimate - g0).norm()
            )));
        }
    }

    let spatial_grid: Vec<Vec<f64>> = (0..nr)
        .flat_map(|i| (0..ntheta).map(move |j| (i, j)))
        .map(|(i, j)| point(i, j))
        .collect();
    let mut times = Vec::with_capacity(nt + 1);
    let mut values = Vec::with_capacity((nt + 1) * nr * ntheta);
    times.push(0.0);
    values.extend_from_slice(&u);

    let half = 0.5 * dt;
    let mut ustar = vec![Complex64::new(0.0, 0.0); nr * ntheta];
    let mut rim = vec![Complex64::new(0.0, 0.0); ntheta];

    for n in 0..nt {
        let t_half = (n as f64 + 0.5) * dt;
        for (j, r) in rim.iter_mut().enumerate() {
            *r = g(t_half, &rim_point(j));
        }

        // Sweep 1: implicit in r, explicit in θ.
        let sub: Vec<Complex64> = sub_r
            .iter()
            .map(|&v| Complex64::new(-half * v, 0.0))
            .collect();
        let diag: Vec<Complex64> = diag_r
            .iter()
            .map(|&v| Complex64::new(1.0 - half * v, 0.0))
            .collect();
        let sup: Vec<Complex64> = sup_r
            .iter()
            .map(|&v| Complex64::new(-half * v, 0.0))
            .collect();
        let mut rhs = vec![Complex64::new(0.0, 0.0); nr];
        for j in 0..ntheta {
            let jm = (j + ntheta - 1) % ntheta;
            let jp = (j + 1) % ntheta;
            for i in 0..nr {
                let lap_th = mu_th[i] * (u[idx(i, jp)] - 2.0 * u[idx(i, j)] + u[idx(i, jm)]);
                rhs[i] = u[idx(i, j)] + half * lap_th;
            }
            rhs[nr - 1] += half * bc_r * rim[j];
            let col = thomas_solve(&sub, &diag, &sup, &rhs);
            for i in 0..nr {
                ustar[idx(i, j)] = col[i];
            }
        }

        // Sweep 2: implicit in θ, explicit in r.
        for i in 0..nr {
            let mu = half * mu_th[i];
            let subt = vec![Complex64::new(-mu, 0.0); ntheta];
            let diagt = vec![Complex64::new(1.0 + 2.0 * mu, 0.0); ntheta];
            let supt = vec![Complex64::new(-mu, 0.0); ntheta];
            let corner = Complex64::new(-mu, 0.0);
            let mut rhs = vec![Complex64::new(0.0, 0.0); ntheta];
            for j in 0..ntheta {
                let mut ar = diag_r[i] * ustar[idx(i, j)];
                if i > 0 {
                    ar += sub_r[i] * ustar[idx(i - 1, j)];
                }
                if i + 1 < nr {
                    ar += sup_r[i] * ustar[idx(i + 1, j)];
                } else {
                    // sub_r of the last row already folds u_{nr−2}.
                    ar += bc_r * rim[j];
                }
                rhs[j] = ustar[idx(i, j)] + half * ar;
            }
            let row = cyclic_solve(&subt, &diagt, &supt, corner, corner, &rhs);
            for j in 0..ntheta {
                u[idx(i, j)] = row[j];
            }
        }

        times.push((n + 1) as f64 * dt);
        values.extend_from_slice(&u);
    }

    Ok(FieldSample {
        domain: domain.clone(),
        times,
        spatial_grid,
        values,
    })
}
