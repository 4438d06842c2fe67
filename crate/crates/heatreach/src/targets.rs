//! Holomorphic target families and smooth cutoffs.
//!
//! Reachability experiments need *certified* analytic targets: a family
//! must come with the region where it is holomorphic, because every
//! synthesis step integrates the target along the imaginary slice and a
//! cutoff must fit strictly inside the analyticity region.  Regions are
//! measured in the taxicab gauge `|ℜz| + |ℑz|` since the egg of a
//! centred ball is exactly a taxicab ball, and Wick rotation
//! (`z ↦ iz`) leaves that gauge invariant.
//!
//! The cutoff is the classical `C^∞` bump built from the smooth step
//! `B(s) = e(s)/(e(s) + e(1−s))` with `e(s) = exp(−1/s)` for `s > 0`:
//! exactly 1 below its inner radius, exactly 0 beyond its outer radius
//! (not merely "to machine precision" — the floating evaluation collapses
//! to `1` and `0` there), infinitely flat at both contacts.

use num_complex::Complex64;

use crate::geometry::ComplexPoint;
use crate::special;
use crate::{Error, Result};

/// One monomial `c · z₁^{p₁} ⋯ z_d^{p_d}` of a polynomial target.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

/// Closed-form analytic target family.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetFamily {
    /// Entire polynomial `Σ c_m z^{p_m}` in `d` complex variables.
    Polynomial { monomials: Vec<Monomial>, d: usize },
    /// Lorentzian-type bump with singularity sphere `|ℑz| = 2πα`.
    Lorentzian { alpha: f64, d: usize },
    /// Simple pole `1/(z − p₀)` (one dimension).
    PoleQuotient { pole: Complex64 },
    /// Exponential-integral family `(4π)^{-d/2} E₁(((z−x₀)·(z−x₀)+a)/4)`.
    SingularE1 { x0: Vec<f64>, a: Complex64 },
}

/// A target family together with its certified analyticity radius in the
/// taxicab gauge: the family is holomorphic on `{z : |ℜz| + |ℑz| < R'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicTarget {
    pub family: TargetFamily,
    pub analyticity_radius: f64,
}

impl HolomorphicTarget {
    /// Entire polynomial target; analytic everywhere.
    pub fn polynomial(monomials: Vec<Monomial>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "polynomial dimension must be at least 1".into(),
            ));
        }
        for m in &monomials {
            if m.powers.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "monomial with {} exponents in dimension {d}",
                    m.powers.len()
                )));
            }
        }
        Ok(Self {
            family: TargetFamily::Polynomial { monomials, d },
            analyticity_radius: f64::INFINITY,
        })
    }

    /// One-dimensional polynomial from ascending coefficients.
    pub fn polynomial_1d(coeffs: &[f64]) -> Result<Self> {
        let monomials = coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| Monomial {
                powers: vec![k as u32],
                coeff: c,
            })
            .collect();
        Self::polynomial(monomials, 1)
    }

    /// Lorentzian-type target; singular exactly on `z·z = −4π²α²`, so the
    /// taxicab analyticity radius is `2πα` (attained at `ℜz = 0`,
    /// `|ℑz| = 2πα`; any point with `|ℜz|+|ℑz| < 2πα` has
    /// `ℜ(z·z + 4π²α²) ≥ 4π²α² − |ℑz|² + |ℜz|² > 0` off the cut).
    pub fn lorentzian(alpha: f64, d: usize) -> Result<Self> {
        if !(alpha > 0.0) || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "lorentzian needs alpha > 0 and d ≥ 1, got alpha = {alpha}, d = {d}"
            )));
        }
        Ok(Self {
            family: TargetFamily::Lorentzian { alpha, d },
            analyticity_radius: 2.0 * std::f64::consts::PI * alpha,
        })
    }

    /// Simple pole target `1/(z − p₀)`, one dimension.
    pub fn pole_quotient(pole: Complex64) -> Result<Self> {
        if pole.re == 0.0 && pole.im == 0.0 {
            return Err(Error::InvalidArgument(
                "pole at the origin leaves no analyticity region".into(),
            ));
        }
        Ok(Self {
            family: TargetFamily::PoleQuotient { pole },
            analyticity_radius: pole.re.abs() + pole.im.abs(),
        })
    }

    /// Exponential-integral singular family (one dimension).
    ///
    /// The singular set is the curve `z = x₀ ± i√(a + s)`, `s ≥ 0`
    /// (where the `E₁` argument runs down the branch cut); the radius is
    /// the sampled minimum of the taxicab gauge along both branches.
    pub fn singular_e1(x0: f64, a: Complex64) -> Result<Self> {
        if a.re == 0.0 && a.im == 0.0 {
            return Err(Error::InvalidArgument(
                "singular family with a = 0 degenerates".into(),
            ));
        }
        let mut radius = f64::INFINITY;
        for k in 0..=4000 {
            // Geometric-ish sampling of s ∈ [0, 400] resolving small s.
            let s = 400.0 * (k as f64 / 4000.0).powi(3);
            let root = (a + s).sqrt();
            for sign in [1.0, -1.0] {
                let z = Complex64::new(x0, 0.0) + Complex64::new(0.0, sign) * root;
                radius = radius.min(z.re.abs() + z.im.abs());
            }
        }
        Ok(Self {
            family: TargetFamily::SingularE1 { x0: vec![x0], a },
            analyticity_radius: radius,
        })
    }

    /// Spatial dimension of the target.
    pub fn dim(&self) -> usize {
        match &self.family {
            TargetFamily::Polynomial { d, .. } => *d,
            TargetFamily::Lorentzian { d, .. } => *d,
            TargetFamily::PoleQuotient { .. } => 1,
            TargetFamily::SingularE1 { x0, .. } => x0.len(),
        }
    }

    /// Evaluate the target at a complex point.
    pub fn value(&self, z: &ComplexPoint) -> Result<Complex64> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "target of dimension {} evaluated at a point of dimension {}",
                self.dim(),
                z.dim()
            )));
        }
        match &self.family {
            TargetFamily::Polynomial { monomials, .. } => {
                let coords: Vec<Complex64> = z
                    .re
                    .iter()
                    .zip(&z.im)
                    .map(|(&x, &y)| Complex64::new(x, y))
                    .collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for m in monomials {
                    let mut term = Complex64::new(m.coeff, 0.0);
                    for (c, &p) in coords.iter().zip(&m.powers) {
                        term *= c.powu(p);
                    }
                    acc += term;
                }
                Ok(acc)
            }
            TargetFamily::Lorentzian { alpha, .. } => special::lorentzian_target(*alpha, z),
            TargetFamily::PoleQuotient { pole } => {
                let w = z.as_scalar()? - pole;
                if w.norm() == 0.0 {
                    return Err(Error::InvalidArgument(
                        "evaluation at the pole of the target".into(),
                    ));
                }
                Ok(w.inv())
            }
            TargetFamily::SingularE1 { x0, a } => special::singular_family_value(z, x0, *a),
        }
    }

    /// Evaluate at a real point.
    pub fn value_real(&self, x: &[f64]) -> Result<Complex64> {
        self.value(&ComplexPoint::real(x.to_vec()))
    }

    /// Centered-difference Laplacian at a real point (step `h` per axis).
    ///
    /// Exact for quadratic polynomials; fourth-order truncation error
    /// `h²/12 · Σ ∂⁴u/∂x_k⁴` otherwise.
    pub fn laplacian_fd(&self, x: &[f64], h: f64) -> Result<Complex64> {
        let center = self.value_real(x)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..x.len() {
            let mut xp = x.to_vec();
            xp[k] += h;
            let mut xm = x.to_vec();
            xm[k] -= h;
            acc += self.value_real(&xp)? - 2.0 * center + self.value_real(&xm)?;
        }
        Ok(acc / (h * h))
    }
}

/// Radial `C^∞` cutoff: exactly 1 on `[0, r_one]`, exactly 0 on
/// `[r_zero, ∞)`, smooth and strictly decreasing in between.  The `beta`
/// field is the corner-smoothing length used when the same bump profile
/// is composed with the taxicab gauge (tube cutoffs in the contour-shift
/// experiment); the radial profile itself does not use it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffBump {
    pub r_one: f64,
    pub r_zero: f64,
    pub beta: f64,
}

/// Builds the radial cutoff with inner radius `r_one` and outer `r_zero`.
pub fn make_cutoff(r_one: f64, r_zero: f64) -> Result<CutoffBump> {
    if !(0.0 < r_one && r_one < r_zero) || !r_zero.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cutoff needs 0 < inner < outer, got ({r_one}, {r_zero})"
        )));
    }
    Ok(CutoffBump {
        r_one,
        r_zero,
        beta: 0.01,
    })
}

impl CutoffBump {
    /// Radial profile `ψ(r) = B((r_zero − r)/(r_zero − r_one))`.
    pub fn eval(&self, r: f64) -> f64 {
        smooth_step((self.r_zero - r) / (self.r_zero - self.r_one))
    }

    /// `dψ/dr` (closed form, no differencing).
    pub fn eval_deriv(&self, r: f64) -> f64 {
        -smooth_step_deriv((self.r_zero - r) / (self.r_zero - self.r_one))
            / (self.r_zero - self.r_one)
    }
}

/// `e(s) = exp(−1/s)` for `s > 0`, zero otherwise: the standard flat germ.
fn flat_germ(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step `B(s) = e(s)/(e(s)+e(1−s))`: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let f = flat_germ(s);
    let g = flat_germ(1.0 - s);
    f / (f + g)
}

/// Derivative `B'(s) = e(s)e(1−s)(s⁻² + (1−s)⁻²) / (e(s)+e(1−s))²`.
pub fn smooth_step_deriv(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let f = flat_germ(s);
    let g = flat_germ(1.0 - s);
    let denom = (f + g) * (f + g);
    f * g * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s))) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cutoff_is_exact_at_its_plateaus() {
        let psi = make_cutoff(1.0, 1.5).unwrap();
        assert_eq!(psi.eval(0.0), 1.0);
        assert_eq!(psi.eval(1.0), 1.0);
        assert_eq!(psi.eval(1.5), 0.0);
        assert_eq!(psi.eval(7.0), 0.0);
        // Midpoint hits exactly 1/2 by the symmetry of B.
        assert_eq!(psi.eval(1.25), 0.5);
        assert!(make_cutoff(1.5, 1.0).is_err());
        assert!(make_cutoff(0.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_has_flat_contacts_and_monotone_descent() {
        let psi = make_cutoff(1.0, 1.5).unwrap();
        let h = 1e-3;
        for r in [1.0, 1.5] {
            let fd = (psi.eval(r + h) - psi.eval(r - h)) / (2.0 * h);
            assert!(fd.abs() < 1e-8, "contact slope {fd} at r = {r}");
        }
        let mut prev = 1.0;
        for k in 1..=100 {
            let r = 1.0 + 0.5 * k as f64 / 100.0;
            let v = psi.eval(r);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn cutoff_derivative_matches_finite_differences() {
        let psi = make_cutoff(0.6, 1.4).unwrap();
        let h = 1e-6;
        for k in 1..20 {
            let r = 0.6 + 0.8 * k as f64 / 20.0;
            let fd = (psi.eval(r + h) - psi.eval(r - h)) / (2.0 * h);
            assert_relative_eq!(psi.eval_deriv(r), fd, epsilon = 1e-7, max_relative = 1e-6);
        }
    }

    #[test]
    fn polynomial_targets_evaluate_by_monomials() {
        // 1 - 2z + 3z³ at z = 1+i: direct expansion.
        let t = HolomorphicTarget::polynomial_1d(&[1.0, -2.0, 0.0, 3.0]).unwrap();
        let z = ComplexPoint::scalar(1.0, 1.0);
        let zc = Complex64::new(1.0, 1.0);
        let want = 1.0 - 2.0 * zc + 3.0 * zc.powu(3);
        let got = t.value(&z).unwrap();
        assert_relative_eq!(got.re, want.re, epsilon = 1e-14);
        assert_relative_eq!(got.im, want.im, epsilon = 1e-14);
        assert_eq!(t.analyticity_radius, f64::INFINITY);

        // Harmonic z₁² − z₂² in two variables.
        let h = HolomorphicTarget::polynomial(
            vec![
                Monomial { powers: vec![2, 0], coeff: 1.0 },
                Monomial { powers: vec![0, 2], coeff: -1.0 },
            ],
            2,
        )
        .unwrap();
        let z2 = ComplexPoint::new(vec![0.4, -0.3], vec![0.2, 0.1]).unwrap();
        let (a, b) = (Complex64::new(0.4, 0.2), Complex64::new(-0.3, 0.1));
        let want2 = a * a - b * b;
        let got2 = h.value(&z2).unwrap();
        assert_relative_eq!(got2.re, want2.re, epsilon = 1e-14);
        assert_relative_eq!(got2.im, want2.im, epsilon = 1e-14);
    }

    #[test]
    fn family_values_match_their_closed_forms() {
        let lor = HolomorphicTarget::lorentzian(1.0 / std::f64::consts::PI, 1).unwrap();
        assert_relative_eq!(lor.analyticity_radius, 2.0, epsilon = 1e-15);
        let z = ComplexPoint::scalar(0.3, 0.4);
        let want = special::lorentzian_target(1.0 / std::f64::consts::PI, &z).unwrap();
        assert_eq!(lor.value(&z).unwrap(), want);

        let pq = HolomorphicTarget::pole_quotient(Complex64::new(0.0, 2.0)).unwrap();
        assert_relative_eq!(pq.analyticity_radius, 2.0, epsilon = 1e-15);
        let got = pq.value(&ComplexPoint::scalar(1.0, 0.0)).unwrap();
        // 1/(1 − 2i) = (1 + 2i)/5.
        assert_relative_eq!(got.re, 0.2, epsilon = 1e-15);
        assert_relative_eq!(got.im, 0.4, epsilon = 1e-15);
        assert!(pq.value(&ComplexPoint::scalar(0.0, 2.0)).is_err());

        let se = HolomorphicTarget::singular_e1(1.2, Complex64::new(0.15, 1.12)).unwrap();
        let zv = ComplexPoint::scalar(-0.2, 0.1);
        let want = special::singular_family_value(&zv, &[1.2], Complex64::new(0.15, 1.12)).unwrap();
        assert_eq!(se.value(&zv).unwrap(), want);
        // Nearest singularity lies at 0.5 + 0.8i: taxicab norm 1.3; the cut
        // curve only moves away from the origin from there.
        assert!(se.analyticity_radius <= 1.3 + 1e-9);
        assert!(se.analyticity_radius > 1.25);
    }

    #[test]
    fn families_are_holomorphic_on_their_declared_regions() {
        // Discrete Cauchy–Riemann residual ∂u/∂x + i ∂u/∂y ≈ 0 per axis.
        let targets = [
            HolomorphicTarget::polynomial_1d(&[0.0, 0.0, 1.0]).unwrap(),
            HolomorphicTarget::lorentzian(1.0 / std::f64::consts::PI, 1).unwrap(),
            HolomorphicTarget::pole_quotient(Complex64::new(0.4, 1.9)).unwrap(),
            HolomorphicTarget::singular_e1(1.2, Complex64::new(0.15, 1.12)).unwrap(),
        ];
        let h = 1e-5;
        for t in &targets {
            for &(x, y) in &[(0.0, 0.0), (0.5, 0.3), (-0.7, 0.15), (0.2, -0.6)] {
                let up = t.value(&ComplexPoint::scalar(x + h, y)).unwrap();
                let um = t.value(&ComplexPoint::scalar(x - h, y)).unwrap();
                let vp = t.value(&ComplexPoint::scalar(x, y + h)).unwrap();
                let vm = t.value(&ComplexPoint::scalar(x, y - h)).unwrap();
                let residual = (up - um) / (2.0 * h) + Complex64::i() * (vp - vm) / (2.0 * h);
                assert!(
                    residual.norm() < 1e-6,
                    "CR residual {} for {:?} at ({x}, {y})",
                    residual.norm(),
                    t.family
                );
            }
        }
    }

    #[test]
    fn finite_difference_laplacian_is_exact_on_quadratics() {
        let t = HolomorphicTarget::polynomial_1d(&[-0.2, 0.0, 1.0]).unwrap();
        let lap = t.laplacian_fd(&[0.37], 1e-3).unwrap();
        assert_relative_eq!(lap.re, 2.0, epsilon = 1e-9);
        assert_relative_eq!(lap.im, 0.0, epsilon = 1e-12);

        let h = HolomorphicTarget::polynomial(
            vec![
                Monomial { powers: vec![2, 0], coeff: 1.0 },
                Monomial { powers: vec![0, 2], coeff: -1.0 },
            ],
            2,
        )
        .unwrap();
        let lap2 = h.laplacian_fd(&[0.3, -0.4], 1e-3).unwrap();
        assert_relative_eq!(lap2.re, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn dimension_checks_are_enforced() {
        let t = HolomorphicTarget::lorentzian(0.5, 2).unwrap();
        assert!(t.value(&ComplexPoint::scalar(0.0, 0.0)).is_err());
        assert!(HolomorphicTarget::polynomial(
            vec![Monomial { powers: vec![1], coeff: 1.0 }],
            2
        )
        .is_err());
    }
}
