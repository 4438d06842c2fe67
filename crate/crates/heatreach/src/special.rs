//! Heat kernels and the special functions they drag in.
//!
//! Three families live here:
//!
//! * the Gaussian heat kernel `G(t, x) = (4πt)^{-d/2} exp(-|x|²/4t)`
//!   (zero for `t ≤ 0`) and its analytic extension `G̃`, which replaces
//!   `|x|²` by the *bilinear* square `z·z = Σ (x_k + i y_k)²`;
//! * the exponential integral `E₁` on the principal branch, with an
//!   explicit path-continuation routine exposing its `−2πi` monodromy
//!   around the origin, plus the closed "singular family"
//!   `(4π)^{-d/2} E₁(((z−x₀)·(z−x₀) + a)/4)` of reachable states whose
//!   singularities can be parked just outside the analyticity egg;
//! * the complementary error function for complex arguments (the time
//!   integral of the 1-d heat kernel over a slab is an `erfc`
//!   difference), and the Lorentzian-type target family.
//!
//! Branch policy: every function here is single-valued on the principal
//! branch; multivaluedness is reachable only through [`e1_continued`],
//! which takes an explicit path.

use num_complex::Complex64;

use crate::geometry::{
    distance_to_boundary, egg_contains, nearest_boundary_point, ComplexPoint, DomainSpec,
};
use crate::{Error, Result};

/// Euler–Mascheroni constant, 20 significant digits.
pub const EULER_GAMMA: f64 = 0.57721566490153286061;

/// Heat kernel `G(t, x)`: `(4πt)^{-d/2} exp(-|x|²/4t)` for `t > 0`,
/// exactly `0` for `t ≤ 0` (causal extension by zero).
pub fn heat_kernel(t: f64, x: &[f64]) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let d = x.len();
    let coef = (4.0 * std::f64::consts::PI * t).powf(-(d as f64) / 2.0);
    let s: f64 = x.iter().map(|&v| v * v).sum();
    let e = -s / (4.0 * t);
    coef * e.exp()
}

/// Analytic extension `G̃(t, z) = (4πt)^{-d/2} exp(-(z·z)/4t)`.
///
/// Uses the bilinear square `z·z`, whose real part is `|x|² − |y|²`:
/// imaginary displacements *amplify* the kernel, which is the whole
/// reason the analyticity egg exists.  Restricted to real `z` this is
/// bit-for-bit equal to [`heat_kernel`].
pub fn heat_kernel_c(t: f64, z: &ComplexPoint) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let d = z.dim();
    let coef = (4.0 * std::f64::consts::PI * t).powf(-(d as f64) / 2.0);
    let e = (-z.complex_square()).unscale(4.0 * t);
    e.exp() * coef
}

/// Exponential integral `E₁(ζ)` on the principal branch (cut along the
/// negative real axis), accurate to about `1e-13` relative for
/// `|arg ζ| < π`.
///
/// Three regimes:
/// * `|ζ| ≤ 4`, plus the strip near the negative real axis with
///   `|ζ| + ℜζ ≤ 4` up to `|ζ| ≤ 32`: the classical series
///   `−γ − log ζ − Σ (−ζ)^k/(k·k!)`.  Floating cancellation in the sum
///   grows like `e^{|ζ|+ℜζ}`, so the series stays accurate far out
///   *only* close to the negative axis — hence the strip condition;
/// * everywhere else with `ℜζ > 0`, or `|ζ| ≤ 32` (where the strip
///   condition bounds the argument away from the cut): modified-Lentz
///   evaluation of the continued fraction
///   `e^{-ζ}/(ζ+1− 1²/(ζ+3− 2²/(ζ+5− …)))`;
/// * the remaining far left half-plane `|ζ| > 32`: the asymptotic series
///   `(e^{-ζ}/ζ) Σ (−1)^k k!/ζ^k` truncated at its smallest term, whose
///   relative error `~√(2π|ζ|) e^{-|ζ|}` is below 1e-12 there.
pub fn exp_integral_e1(zeta: Complex64) -> Result<Complex64> {
    if zeta.re == 0.0 && zeta.im == 0.0 {
        return Err(Error::InvalidArgument(
            "exponential integral has a logarithmic singularity at 0".into(),
        ));
    }
    let r = zeta.norm();
    if r <= 4.0 || (zeta.re <= 0.0 && r <= 32.0 && r + zeta.re <= 4.0) {
        e1_series(zeta)
    } else if zeta.re > 0.0 || r <= 32.0 {
        e1_continued_fraction(zeta)
    } else {
        Ok(e1_asymptotic(zeta))
    }
}

fn e1_series(zeta: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0); // (−ζ)^k / k!
    for k in 1..=200 {
        term *= -zeta / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.norm() < 1e-17 * sum.norm().max(1.0) && k > 3 {
            let v = -Complex64::new(EULER_GAMMA, 0.0) - zeta.ln() - sum;
            return Ok(v);
        }
    }
    Err(Error::Numerical(format!(
        "exponential-integral series did not converge at ζ = {zeta}"
    )))
}

fn e1_continued_fraction(zeta: Complex64) -> Result<Complex64> {
    // Even contraction, evaluated by the modified Lentz algorithm:
    // E₁(ζ) = e^{−ζ} / (ζ+1 − 1²/(ζ+3 − 2²/(ζ+5 − …))).
    let tiny = Complex64::new(1e-290, 0.0);
    let mut f = zeta + 1.0;
    if f.norm() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..=400u32 {
        let a = Complex64::new(-((j as f64) * (j as f64)), 0.0);
        let b = zeta + (2 * j + 1) as f64;
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok((-zeta).exp() / f);
        }
    }
    Err(Error::Numerical(format!(
        "exponential-integral continued fraction did not converge at ζ = {zeta}"
    )))
}

fn e1_asymptotic(zeta: Complex64) -> Complex64 {
    // Divergent asymptotic series truncated at the smallest term; for
    // |ζ| > 32 this leaves a relative error near e^{−|ζ|}.
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..=60 {
        term *= -(k as f64) / zeta;
        if term.norm() >= prev {
            break;
        }
        prev = term.norm();
        sum += term;
    }
    (-zeta).exp() / zeta * sum
}

/// Analytic continuation of `E₁` along a polyline that avoids the origin.
///
/// The start value is the principal branch at `path[0]`; the returned
/// value is the continuation at the last point.  Because
/// `E₁(ζ) + log ζ` is entire, continuation only shifts the value by
/// `−2πi` per positive loop of the path around the origin, so the result
/// is `E₁(end) − 2πi·(winding beyond the principal sector)`.  Steps must
/// subtend less than `π/2` as seen from the origin so the winding count
/// is unambiguous.
pub fn e1_continued(path: &[Complex64]) -> Result<Complex64> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("continuation path is empty".into()));
    }
    let mut theta = path[0].arg();
    if path[0].norm() == 0.0 {
        return Err(Error::InvalidArgument("continuation path touches 0".into()));
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.norm() == 0.0 {
            return Err(Error::InvalidArgument("continuation path touches 0".into()));
        }
        let step = (b / a).arg();
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidArgument(format!(
                "continuation step subtends {:.3} rad ≥ π/2; refine the path",
                step.abs()
            )));
        }
        theta += step;
    }
    let end = *path.last().unwrap();
    let loops = ((theta - end.arg()) / (2.0 * std::f64::consts::PI)).round();
    let principal = exp_integral_e1(end)?;
    Ok(principal - Complex64::new(0.0, 2.0 * std::f64::consts::PI * loops))
}

/// Error function for complex arguments.
///
/// Maclaurin series for `|z| ≤ 3`, otherwise the continued fraction for
/// `erfc` (reflected into the right half-plane first).  Intended for the
/// cone `|arg z| < π/4` that slab integrals of the complexified heat
/// kernel produce; accuracy there is ~1e-13 absolute.
pub fn erf_c(z: Complex64) -> Complex64 {
    1.0 - erfc_c(z)
}

/// Complementary error function for complex arguments.
pub fn erfc_c(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        return 2.0 - erfc_c(-z);
    }
    if z.norm() <= 3.0 {
        1.0 - erf_series(z)
    } else {
        // erfc(z) = e^{−z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + …))))
        // via modified Lentz; partial numerators k/2, denominators z.
        let tiny = Complex64::new(1e-290, 0.0);
        let mut f = z;
        let mut c = f;
        let mut d = Complex64::new(0.0, 0.0);
        for j in 1..=300u32 {
            let a = Complex64::new(j as f64 / 2.0, 0.0);
            d = z + a * d;
            if d.norm() == 0.0 {
                d = tiny;
            }
            c = z + a / c;
            if c.norm() == 0.0 {
                c = tiny;
            }
            d = d.inv();
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).norm() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / (std::f64::consts::PI.sqrt() * f)
    }
}

fn erf_series(z: Complex64) -> Complex64 {
    // erf(z) = (2/√π) Σ_{k≥0} (−1)^k z^{2k+1} / (k! (2k+1)).
    let mut term = z; // z^{2k+1} (−1)^k / k!
    let mut sum = z;
    let z2 = z * z;
    for k in 1..=120 {
        term *= -z2 / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.norm() < 1e-18 * sum.norm().max(1e-30) {
            break;
        }
    }
    sum * (2.0 / std::f64::consts::PI.sqrt())
}

/// Value of the reachable singular family
/// `g(z) = (4π)^{-d/2} E₁(((z−x₀)·(z−x₀) + a) / 4)`.
///
/// For `ℜ(a) > 0` and `x₀` outside the domain closure, this is exactly
/// the state reached at time 1 by a point-source boundary history, and
/// its nearest singularities sit where the `E₁` argument vanishes.
pub fn singular_family_value(z: &ComplexPoint, x0: &[f64], a: Complex64) -> Result<Complex64> {
    if x0.len() != z.dim() {
        return Err(Error::DimensionMismatch(format!(
            "base point of dimension {} against point of dimension {}",
            x0.len(),
            z.dim()
        )));
    }
    let d = z.dim();
    let shifted = z.minus_real(x0)?;
    let arg = (shifted.complex_square() + a) / 4.0;
    if arg.re == 0.0 && arg.im == 0.0 {
        return Err(Error::InvalidArgument(
            "evaluation point is the singular point of the family".into(),
        ));
    }
    let coef = (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    Ok(exp_integral_e1(arg)? * coef)
}

/// Chooses `(x₀, a)` so the singular family blows up exactly at `p`.
///
/// Requires `p` outside the closed egg, i.e. `|ℑ(p)| > dist(ℜ(p), ∂Ω)`.
/// The base point is searched along the ray from `ℜ(p)` through the
/// nearest boundary point: the primary choice sits two thirds of the
/// admissible slack beyond the boundary, falling back to a finer scan
/// when that lands inside the domain (possible for nonconvex polygons).
/// Then `a = −(p−x₀)·(p−x₀)`, which has `ℜ(a) = |ℑ(p)|² − |ℜ(p)−x₀|² > 0`
/// exactly when the admissibility condition `|ℜ(p)−x₀| < |ℑ(p)|` holds.
pub fn singular_family_params(
    p: &ComplexPoint,
    domain: &DomainSpec,
) -> Result<(Vec<f64>, Complex64)> {
    if egg_contains(domain, p, true)? {
        return Err(Error::InvalidArgument(
            "point lies in the closed egg; the singular family needs a point outside it".into(),
        ));
    }
    let imn = p.im_norm();
    let bd = distance_to_boundary(domain, &p.re)?;

    let admissible = |x0: &[f64]| -> Result<bool> {
        let sep = p
            .re
            .iter()
            .zip(x0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let outside = !distance_to_boundary(domain, x0)?.interior
            && distance_to_boundary(domain, x0)?.distance > 0.0;
        Ok(outside && sep < imn)
    };

    let make = |x0: Vec<f64>| -> Result<(Vec<f64>, Complex64)> {
        let shifted = p.minus_real(&x0)?;
        let a = -shifted.complex_square();
        Ok((x0, a))
    };

    if !bd.interior {
        // ℜ(p) is already outside (or on) the boundary: x₀ = ℜ(p) works
        // whenever it is strictly exterior and p has an imaginary part.
        let x0 = p.re.clone();
        if admissible(&x0)? {
            return make(x0);
        }
        return Err(Error::InvalidArgument(
            "no admissible exterior base point near the real part".into(),
        ));
    }

    let q = nearest_boundary_point(domain, &p.re)?;
    let sep: f64 = q
        .iter()
        .zip(&p.re)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if sep == 0.0 {
        return Err(Error::InvalidArgument(
            "real part sits on the boundary; base-point direction is undefined".into(),
        ));
    }
    let dir: Vec<f64> = q.iter().zip(&p.re).map(|(a, b)| (a - b) / sep).collect();
    let slack = imn - bd.distance;
    debug_assert!(slack > 0.0);

    // Primary choice: two thirds of the slack beyond the boundary.
    let place = |s: f64| -> Vec<f64> {
        p.re.iter().zip(&dir).map(|(x, d)| x + s * d).collect()
    };
    let primary = place(bd.distance + slack * 2.0 / 3.0);
    if admissible(&primary)? {
        return make(primary);
    }
    for j in 1..32 {
        let cand = place(bd.distance + slack * j as f64 / 32.0);
        if admissible(&cand)? {
            return make(cand);
        }
    }
    Err(Error::InvalidArgument(
        "no admissible exterior base point found along the boundary ray".into(),
    ))
}

/// Lorentzian-type holomorphic target
/// `c_d α (2π)^{(d+2)/2} / (4π²α² + z·z)^{(d+1)/2}`,
/// with `c_d = Γ((d+1)/2)/π^{(d+1)/2}`.
///
/// Real and positive on real `z`; its complex singularities form the
/// sphere `z·z = −4π²α²`, i.e. purely imaginary displacements of norm
/// `2πα`, which makes the analyticity radius tunable via `α`.
pub fn lorentzian_target(alpha: f64, z: &ComplexPoint) -> Result<Complex64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lorentzian scale must be positive and finite, got {alpha}"
        )));
    }
    let d = z.dim() as f64;
    let den_base = z.complex_square() + 4.0 * std::f64::consts::PI.powi(2) * alpha * alpha;
    if den_base.im == 0.0 && den_base.re <= 0.0 {
        return Err(Error::InvalidArgument(
            "argument lies on the branch cut of the lorentzian target".into(),
        ));
    }
    let c_d = statrs::function::gamma::gamma((d + 1.0) / 2.0)
        / std::f64::consts::PI.powf((d + 1.0) / 2.0);
    let num = c_d * alpha * (2.0 * std::f64::consts::PI).powf((d + 2.0) / 2.0);
    let den = (den_base.ln() * ((d + 1.0) / 2.0)).exp();
    Ok(den.inv() * num)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    /// Quadrature oracle for E₁, independent of every series/fraction in
    /// the implementation.  Right half-plane: E₁(ζ) = ∫₁^∞ e^{−ζu}/u du
    /// (pole-free integrand).  Left half-plane: the horizontal-ray form
    /// E₁(ζ) = e^{−ζ} ∫₀^∞ e^{−s}/(ζ+s) ds with panels fine enough to
    /// resolve the pole at s = −ζ sitting |ℑζ| off the contour.
    fn e1_oracle(zeta: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if zeta.re > 0.0 {
            let range = 1.0 + 50.0 / zeta.re;
            let width = (0.8 / zeta.norm()).min(1.0);
            let panels = quad::panels_for_spacing(1.0, range, width);
            let (u, w) = quad::composite_gauss_legendre(1.0, range, panels, 16).unwrap();
            for (&ui, &wi) in u.iter().zip(&w) {
                acc += (-zeta * ui).exp() / ui * wi;
            }
            acc
        } else {
            let width = (zeta.im.abs() / 3.0).min(0.02);
            let panels = quad::panels_for_spacing(0.0, 60.0, width);
            let (s, w) = quad::composite_gauss_legendre(0.0, 60.0, panels, 16).unwrap();
            for (&si, &wi) in s.iter().zip(&w) {
                acc += (-si).exp() / (zeta + si) * wi;
            }
            (-zeta).exp() * acc
        }
    }

    /// Quadrature oracle for erf: (2/√π)∫₀^z e^{−s²} ds along the segment,
    /// i.e. (2z/√π)∫₀¹ e^{−t²z²} dt — the integrand is entire.
    fn erf_oracle(z: Complex64) -> Complex64 {
        let (t, w) = quad::composite_gauss_legendre(0.0, 1.0, 60, 12).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&ti, &wi) in t.iter().zip(&w) {
            acc += (-(z * z) * ti * ti).exp() * wi;
        }
        acc * z * (2.0 / std::f64::consts::PI.sqrt())
    }

    #[test]
    fn heat_kernel_closed_form_points() {
        assert_relative_eq!(
            heat_kernel(1.0 / (4.0 * std::f64::consts::PI), &[0.0]),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(heat_kernel(-0.5, &[3.0]), 0.0);
        assert_eq!(heat_kernel(0.0, &[0.2, 0.1]), 0.0);
        let expect = (4.0 * std::f64::consts::PI).recip() * (-1.0f64).exp();
        assert_relative_eq!(heat_kernel(1.0, &[2.0, 0.0]), expect, epsilon = 1e-15);
    }

    #[test]
    fn complex_kernel_restricts_to_real_kernel_bitwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31415);
        for _ in 0..1000 {
            let d = rng.gen_range(1..=3);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let t = rng.gen_range(0.01..2.0);
            let z = ComplexPoint::real(x.clone());
            let c = heat_kernel_c(t, &z);
            assert_eq!(c.re, heat_kernel(t, &x));
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn complex_kernel_amplifies_imaginary_displacements() {
        // (iy)² = −y², so a purely imaginary point flips the sign in the
        // exponent: G̃(t, iy) = (4πt)^{−1/2} e^{+y²/4t}.
        let t = 0.3;
        let y = 0.8;
        let z = ComplexPoint::scalar(0.0, y);
        let got = heat_kernel_c(t, &z);
        let expect = (4.0 * std::f64::consts::PI * t).powf(-0.5) * (y * y / (4.0 * t)).exp();
        assert_relative_eq!(got.re, expect, epsilon = 1e-13 * expect);
        assert_relative_eq!(got.im, 0.0, epsilon = 1e-14);

        // (1+i)² = 2i: pure oscillation, no damping.
        let z = ComplexPoint::scalar(1.0, 1.0);
        let got = heat_kernel_c(1.0, &z);
        let coef = (4.0 * std::f64::consts::PI).powf(-0.5);
        assert_relative_eq!(got.re, coef * 0.5f64.cos(), epsilon = 1e-14);
        assert_relative_eq!(got.im, -coef * 0.5f64.sin(), epsilon = 1e-14);
        assert_eq!(heat_kernel_c(-1.0, &z), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn heat_kernel_has_unit_mass() {
        for d in [1usize, 2] {
            for t in [0.05f64, 0.4] {
                let r = 20.0 * t.sqrt();
                let n = quad::panels_for_spacing(-r, r, t.sqrt() / 2.0);
                let (xs, ws) = quad::midpoint_rule(-r, r, n).unwrap();
                let mass = if d == 1 {
                    xs.iter()
                        .zip(&ws)
                        .map(|(&x, &w)| w * heat_kernel(t, &[x]))
                        .sum::<f64>()
                } else {
                    let mut acc = 0.0;
                    for (&x, &wx) in xs.iter().zip(&ws) {
                        for (&y, &wy) in xs.iter().zip(&ws) {
                            acc += wx * wy * heat_kernel(t, &[x, y]);
                        }
                    }
                    acc
                };
                assert_relative_eq!(mass, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn heat_kernel_semigroup_property() {
        // ∫ G(s, x−w) G(t, w) dw = G(s+t, x) in one dimension.
        let (s, t, x) = (0.3, 0.5, 0.7);
        let r = 16.0;
        let n = quad::panels_for_spacing(-r, r, 0.05);
        let (ws_nodes, ws_weights) = quad::midpoint_rule(-r, r, n).unwrap();
        let conv: f64 = ws_nodes
            .iter()
            .zip(&ws_weights)
            .map(|(&w, &wt)| wt * heat_kernel(s, &[x - w]) * heat_kernel(t, &[w]))
            .sum();
        assert_relative_eq!(conv, heat_kernel(s + t, &[x]), epsilon = 1e-8);
    }

    #[test]
    fn exponential_integral_matches_quadrature_oracle() {
        // Spot value with an independently computed reference.
        let got = exp_integral_e1(Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(got.re, 0.21938393439552026, epsilon = 1e-13);
        assert_relative_eq!(got.im, 0.0, epsilon = 1e-15);

        for zeta in [
            Complex64::new(0.3, 0.0),
            Complex64::new(2.0, 3.0),
            Complex64::new(0.5, -1.2),
            Complex64::new(-3.0, 0.5),
            Complex64::new(-0.8, -0.2),
            Complex64::new(7.0, 1.0),
            Complex64::new(0.01, 0.02),
            Complex64::new(12.0, -9.0),
        ] {
            let got = exp_integral_e1(zeta).unwrap();
            let want = e1_oracle(zeta);
            assert_relative_eq!(got.re, want.re, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(got.im, want.im, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn exponential_integral_small_and_large_limits() {
        // ζ→0⁺: E₁(ζ) + γ + log ζ → 0.
        for &zeta in &[1e-3, 1e-6, 1e-9] {
            let v = exp_integral_e1(Complex64::new(zeta, 0.0)).unwrap();
            let defect = v + EULER_GAMMA + Complex64::new(zeta, 0.0).ln();
            assert!(defect.norm() < 2.0 * zeta);
        }
        // Leading asymptotics at ζ = 50: E₁(50)·e^50·50 ≈ 1 within 2%.
        let v = exp_integral_e1(Complex64::new(50.0, 0.0)).unwrap();
        let scaled = v.re * 50f64.exp() * 50.0;
        assert!((scaled - 1.0).abs() < 0.02, "scaled = {scaled}");
        assert!(exp_integral_e1(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn exponential_integral_regimes_agree_at_the_switches() {
        // Seam 1: the circle |ζ| = 4 in the right half-plane, where the
        // algorithm hands over from series to continued fraction.
        for k in 0..9 {
            let phi = -1.4 + 2.8 * k as f64 / 8.0;
            let zeta = Complex64::from_polar(4.0, phi);
            let a = e1_series(zeta).unwrap();
            let b = e1_continued_fraction(zeta).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12), "ζ = {zeta}");
        }
        // Seam 2: the left-half-plane curve |ζ| + ℜζ = 4 where the series
        // stops being used because its cancellation grows past e⁴.
        for r in [12.0f64, 20.0, 28.0] {
            let re = 4.0 - r;
            let im = (r * r - re * re).sqrt();
            for sign in [1.0, -1.0] {
                let zeta = Complex64::new(re, sign * im);
                let a = e1_series(zeta).unwrap();
                let b = e1_continued_fraction(zeta).unwrap();
                assert!((a - b).norm() <= 1e-11 * a.norm(), "ζ = {zeta}");
            }
        }
        // Seam 3: |ζ| ≈ 32 near the negative axis, where the series hands
        // over to the truncated asymptotic expansion.
        for phi in [2.8f64, 2.95, 3.1] {
            let zeta = Complex64::from_polar(31.5, phi);
            let a = e1_series(zeta).unwrap();
            let b = e1_asymptotic(zeta);
            assert!((a - b).norm() <= 1e-11 * a.norm(), "ζ = {zeta}");
        }
    }

    #[test]
    fn continuation_along_trivial_path_is_principal() {
        let z = Complex64::new(1.0, 0.0);
        let path = vec![z, z, z];
        let got = e1_continued(&path).unwrap();
        let want = exp_integral_e1(z).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn continuation_around_origin_picks_up_minus_two_pi_i() {
        let principal = exp_integral_e1(Complex64::new(1.0, 0.0)).unwrap();
        for radius in [0.5, 1.0, 2.0] {
            let n = 64;
            let path: Vec<Complex64> = (0..=n)
                .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
                .collect();
            // Close the loop back at the real starting point, then compare
            // against the principal value there.
            let end = e1_continued(&path).unwrap();
            let jump = end - exp_integral_e1(path[n]).unwrap();
            assert_relative_eq!(jump.re, 0.0, epsilon = 1e-12);
            assert_relative_eq!(jump.im, -2.0 * std::f64::consts::PI, epsilon = 1e-12);
            if radius == 1.0 {
                let expected = principal - Complex64::new(0.0, 2.0 * std::f64::consts::PI);
                assert_relative_eq!(end.re, expected.re, epsilon = 1e-12);
                assert_relative_eq!(end.im, expected.im, epsilon = 1e-12);
            }
        }
        // Two loops double the jump.
        let n = 128;
        let path: Vec<Complex64> = (0..=2 * n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let end = e1_continued(&path).unwrap();
        let expected = principal - Complex64::new(0.0, 4.0 * std::f64::consts::PI);
        assert_relative_eq!(end.im, expected.im, epsilon = 1e-12);
        // Coarse path: a 3-step "circle" subtends 2π/3 ≥ π/2 per step.
        let coarse: Vec<Complex64> = (0..=3)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        assert!(e1_continued(&coarse).is_err());
        assert!(e1_continued(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn complex_erfc_matches_oracle_and_real_libraries() {
        // Real axis: compare against statrs, whose own rational
        // approximation carries ~1e-10 error (the tight accuracy check is
        // the quadrature oracle below).
        for k in 0..60 {
            let x = -4.0 + 8.0 * k as f64 / 59.0;
            let got = erfc_c(Complex64::new(x, 0.0));
            let want = statrs::function::erf::erfc(x);
            assert_relative_eq!(got.re, want, epsilon = 1e-9, max_relative = 1e-9);
            assert!(got.im.abs() < 1e-14);
        }
        // Complex points inside and outside the series/fraction switch, in
        // the cone |arg z| ≤ π/4 where slab integrals live.
        for z in [
            Complex64::new(1.0, 1.0),
            Complex64::new(0.4, -0.3),
            Complex64::new(2.5, 2.0),
            Complex64::new(4.0, 1.5),
            Complex64::new(6.0, -5.0),
            Complex64::new(0.05, 0.04),
        ] {
            let got = erf_c(z);
            let want = erf_oracle(z);
            assert!(
                (got - want).norm() <= 1e-12 * want.norm().max(1.0),
                "z = {z}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn erfc_reflection_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(271828);
        for _ in 0..200 {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let s = erfc_c(z) + erfc_c(-z);
            assert_relative_eq!(s.re, 2.0, epsilon = 1e-11, max_relative = 1e-11);
            assert!(s.im.abs() < 1e-11 * s.norm().max(1.0));
        }
    }

    #[test]
    fn singular_family_value_consistency_and_decay() {
        let x0 = [1.2];
        let a = Complex64::new(0.15, 1.12);
        // Definition: equals the prefactored exponential integral.
        let z = ComplexPoint::scalar(-0.3, 0.2);
        let got = singular_family_value(&z, &x0, a).unwrap();
        let arg = ((Complex64::new(-0.3, 0.2) - 1.2).powu(2) + a) / 4.0;
        let want = exp_integral_e1(arg).unwrap() * (4.0 * std::f64::consts::PI).powf(-0.5);
        assert_eq!(got, want);

        // Monotone decay toward ±∞ along the real axis.
        let vals: Vec<f64> = [-2.0, -4.0, -8.0, -16.0]
            .iter()
            .map(|&x| {
                singular_family_value(&ComplexPoint::scalar(x, 0.0), &x0, a)
                    .unwrap()
                    .norm()
            })
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0]);
        }

        // The singular point itself is rejected.  Dyadic values make the
        // cancellation exact in floating point: p = 0.5 + 0.5i, x₀ = 1,
        // a = −(p−x₀)² = 0.5i gives an E₁ argument of exactly zero.
        let p = ComplexPoint::scalar(0.5, 0.5);
        assert!(singular_family_value(&p, &[1.0], Complex64::new(0.0, 0.5)).is_err());
    }

    #[test]
    fn singular_family_params_reproduce_worked_interval_case() {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let p = ComplexPoint::scalar(0.5, 0.8);
        let (x0, a) = singular_family_params(&p, &dom).unwrap();
        assert_relative_eq!(x0[0], 1.2, epsilon = 1e-14);
        assert_relative_eq!(a.re, 0.15, epsilon = 1e-14);
        assert_relative_eq!(a.im, 1.12, epsilon = 1e-14);
        // ℜ(a) = ℑ(p)² − (ℜ(p) − x₀)² = 0.64 − 0.49.
        assert_relative_eq!(a.re, 0.8f64.powi(2) - 0.7f64.powi(2), epsilon = 1e-14);

        // Inside the egg: no singular family exists.
        let inside = ComplexPoint::scalar(0.5, 0.4);
        assert!(singular_family_params(&inside, &dom).is_err());
    }

    #[test]
    fn singular_family_params_work_on_the_disk() {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = ComplexPoint::new(vec![0.5, 0.0], vec![0.0, 0.8]).unwrap();
        let (x0, a) = singular_family_params(&p, &dom).unwrap();
        assert_relative_eq!(x0[0], 1.2, epsilon = 1e-14);
        assert_relative_eq!(x0[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(a.re, 0.15, epsilon = 1e-14);
        assert_relative_eq!(a.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_family_params_admissibility_invariants() {
        let domains = [
            DomainSpec::interval(-1.0, 1.0).unwrap(),
            DomainSpec::ball(vec![0.1, -0.2], 0.8).unwrap(),
            DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(555);
        for dom in &domains {
            let d = dom.dimension();
            let (lo, hi) = dom.bounding_box();
            let mut tested = 0;
            while tested < 120 {
                let x: Vec<f64> = (0..d)
                    .map(|k| rng.gen_range(lo[k]..hi[k]))
                    .collect();
                let bd = distance_to_boundary(dom, &x).unwrap();
                if !bd.interior || bd.distance < 1e-3 {
                    continue;
                }
                // Imaginary part strictly larger than the distance: outside
                // the closed egg, singular family must exist (convex Ω).
                let scale = bd.distance * rng.gen_range(1.1..2.0) / (d as f64).sqrt();
                let y: Vec<f64> = (0..d).map(|_| scale).collect();
                let p = ComplexPoint::new(x, y).unwrap();
                let (x0, a) = singular_family_params(&p, dom).unwrap();
                assert!(a.re > 0.0);
                assert!(!distance_to_boundary(dom, &x0).unwrap().interior);
                let sep = p
                    .re
                    .iter()
                    .zip(&x0)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                assert!(sep < p.im_norm());
                // The family really is singular at p: the E₁ argument vanishes.
                let arg = p.minus_real(&x0).unwrap().complex_square() + a;
                assert!(arg.norm() < 1e-12);
                tested += 1;
            }
        }
    }

    #[test]
    fn lorentzian_matches_directly_evaluated_formula() {
        // d = 1, α = 1/π at z = 0: c₁ α (2π)^{3/2} / (4π²α²)^1 with c₁ = 1/π.
        let alpha = 1.0 / std::f64::consts::PI;
        let z = ComplexPoint::scalar(0.0, 0.0);
        let got = lorentzian_target(alpha, &z).unwrap();
        let pi = std::f64::consts::PI;
        let want = (1.0 / pi) * alpha * (2.0 * pi).powf(1.5) / (4.0 * pi * pi * alpha * alpha);
        assert_relative_eq!(got.re, want, epsilon = 1e-14);
        assert_relative_eq!(got.im, 0.0, epsilon = 1e-15);

        // d = 2 spot check against log-exp evaluation at a complex point.
        let z2 = ComplexPoint::new(vec![0.3, -0.2], vec![0.1, 0.25]).unwrap();
        let got2 = lorentzian_target(0.5, &z2).unwrap();
        let c2 = statrs::function::gamma::gamma(1.5) / pi.powf(1.5);
        let base = z2.complex_square() + 4.0 * pi * pi * 0.25;
        let want2 = (base.ln() * -1.5).exp() * c2 * 0.5 * (2.0 * pi).powf(2.0);
        assert_relative_eq!(got2.re, want2.re, epsilon = 1e-14);
        assert_relative_eq!(got2.im, want2.im, epsilon = 1e-14);
    }

    #[test]
    fn lorentzian_is_positive_on_real_points_and_guards_its_cut() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(808);
        for _ in 0..200 {
            let d = rng.gen_range(1..=2);
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v = lorentzian_target(0.7, &ComplexPoint::real(x)).unwrap();
            assert!(v.re > 0.0);
            assert_eq!(v.im, 0.0);
        }
        // Singularity sphere: z·z = −4π²α² (d=1: z = ±2παi). On the cut
        // beyond the pole the principal power is undefined.
        let alpha = 1.0 / std::f64::consts::PI;
        let pole = ComplexPoint::scalar(0.0, 2.0); // 2πα = 2
        assert!(lorentzian_target(alpha, &pole).is_err());
        let beyond = ComplexPoint::scalar(0.0, 3.0);
        assert!(lorentzian_target(alpha, &beyond).is_err());
        let safe = ComplexPoint::scalar(0.0, 1.9);
        assert!(lorentzian_target(alpha, &safe).is_ok());
    }
}
