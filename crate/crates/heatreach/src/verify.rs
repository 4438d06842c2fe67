//! Cross-checking experiments tying the analytic machinery together.
//!
//! Four independent probes of the reachability picture:
//!
//! * **Convergence sweep** — the heat evolution `K_t(uχ)` of a cut-off
//!   target, continued to complex arguments, converges to `u` uniformly
//!   on compact subsets of the egg as `t → 0⁺`.  The sweep measures the
//!   sup distance on a sampled compact subset for a decreasing list of
//!   times and reports the profile.
//! * **Contour shift** — the identity behind that convergence: for
//!   `z = x + iv` in the egg, the real-axis integral equals a
//!   shifted-contour integral (a *real* Gaussian against the data on
//!   `ℝ + iv`, free of the `e^{v²/4t}` amplification) plus an area
//!   correction supported where the cutoff decays, integrated over the
//!   strip between the two contours.  On that strip the kernel exponent
//!   stays strictly positive — for `z` at taxicab margin `m` inside the
//!   egg and `ζ` in the tube's support with `ℑζ` between `0` and `v`,
//!   `ℜ(z−ζ)² > m²` — so the correction vanishes like `e^{-m²/4t}`:
//!   faster than any power of `t`.
//! * **Optimality family** — the explicit boundary-controlled field
//!   whose time-`1` state is the exponential-integral target
//!   `(4π)^{-d/2}E₁(((z−x₀)² + a)/4)`.  The time integral of the moving
//!   heat kernel is evaluated by blunt quadrature (after the
//!   substitution `1−s = σ²` that removes the endpoint singularity) and
//!   compared with the closed form across the egg.
//! * **Monodromy detection** — the same target continued around its
//!   singular point `z* = x₀ + i√a` picks up the logarithm's jump
//!   `−2πi·(4π)^{-d/2}` per positive loop, which is what certifies that
//!   the state is *not* analytic there: reachable states can saturate
//!   the egg exactly.

use num_complex::Complex64;

use crate::geometry::{
    egg_contains, sample_compact_subset, ComplexPoint, DomainSpec, GridCounts,
};
use crate::quad::{composite_gauss_legendre, panels_for_spacing};
use crate::special::{e1_continued, singular_family_params, singular_family_value};
use crate::targets::{smooth_step, smooth_step_deriv, CutoffBump, HolomorphicTarget};
use crate::wick::{self, SliceTable};
use crate::{Error, Result};

/// Sup-error profile of the small-time sweep on one compact subset.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    /// Distance from the compact subset to the egg's boundary.
    pub margin: f64,
    /// Number of sampled egg points.
    pub points: usize,
    /// `(t, sup |K_t(uχ)(z) − u(z)|)` rows, in the order requested.
    pub samples: Vec<(f64, f64)>,
}

/// Measures sup `|K_t(uχ)(z) − u(z)|` over a sampled compact subset of
/// the egg for each `t` in `ts` (positive, strictly decreasing).
///
/// `K_t(uχ)` is the real-axis integral
/// `(4πt)^{-d/2}∫ exp(−(z−w)ᵀ(z−w)/4t) u(w) χ(|w|) dw`, so the cutoff
/// must be exactly 1 on the closure of the (centred) domain and die
/// inside the target's analyticity region.  Refuses with
/// [`Error::Guard`] when the deepest sample point would amplify
/// quadrature noise beyond [`wick::AMPLIFICATION_LIMIT`].
pub fn convergence_sweep(
    target: &HolomorphicTarget,
    domain: &DomainSpec,
    cutoff: &CutoffBump,
    margin: f64,
    ts: &[f64],
    counts: GridCounts,
) -> Result<ConvergenceReport> {
    let d = target.dim();
    if domain.dimension() != d {
        return Err(Error::DimensionMismatch(format!(
            "target dimension {d} vs domain dimension {}",
            domain.dimension()
        )));
    }
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument(
            "the sweep needs a nonempty list of positive times".into(),
        ));
    }
    if ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "sweep times must be strictly decreasing".into(),
        ));
    }
    let outer_reach = match domain {
        DomainSpec::Interval { a, b } => {
            if *a != -*b {
                return Err(Error::InvalidDomain(
                    "the radial cutoff needs a centred interval".into(),
                ));
            }
            b.abs()
        }
        DomainSpec::Ball { center, radius } => {
            if center.iter().any(|&c| c != 0.0) {
                return Err(Error::InvalidDomain(
                    "the radial cutoff needs a ball centred at the origin".into(),
                ));
            }
            *radius
        }
        DomainSpec::Polygon { .. } => {
            return Err(Error::InvalidDomain(
                "the sweep's radial cutoff does not fit a polygon".into(),
            ))
        }
    };
    if cutoff.r_one < outer_reach * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "the cutoff must be exactly 1 on the closed domain: need inner radius ≥ \
             {outer_reach}, got {}",
            cutoff.r_one
        )));
    }
    if cutoff.r_zero > target.analyticity_radius * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "cutoff support [0, {}] reaches past the target's analyticity radius {}",
            cutoff.r_zero, target.analyticity_radius
        )));
    }

    let points = sample_compact_subset(domain, margin, counts)?;
    let deepest = points.iter().map(|p| p.im_norm()).fold(0.0, f64::max);

    let real_data = |w: &[f64]| -> Result<Complex64> {
        let r = if d == 1 { w[0].abs() } else { w[0].hypot(w[1]) };
        let chi = cutoff.eval(r);
        if chi == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(target.value_real(w)? * chi)
    };

    let mut samples = Vec::with_capacity(ts.len());
    for &t in ts {
        let table = SliceTable::tabulate(d, cutoff.r_zero, t, deepest, &real_data)?;
        let mut sup = 0.0_f64;
        for z in &points {
            let err = (table.eval(z)? - target.value(z)?).norm();
            sup = sup.max(err);
        }
        samples.push((t, sup));
    }
    Ok(ConvergenceReport {
        margin,
        points: points.len(),
        samples,
    })
}

/// Smoothed tube cutoff for the contour-shift experiment: a function of
/// the smoothed taxicab gauge `n_β(x, y) = √(x²+β²) + √(y²+β²) − 2β`,
/// exactly 1 where `n_β ≤ l_inner` (which contains the closed egg of
/// `(−l_inner, l_inner)`, since `n_β ≤ |x| + |y|`), exactly 0 where
/// `n_β ≥ l_outer`, with a closed-form `∂̄`-derivative — no numerical
/// differentiation in the Stokes correction.  The exact taxicab gauge
/// has corners on the axes; the `β`-smoothing removes them without
/// moving the plateaus by more than `2β`.
#[derive(Clone, Copy, Debug)]
pub struct TubeCutoff {
    /// Inner taxicab radius (flat value 1 within).
    pub l_inner: f64,
    /// Outer taxicab radius (vanishes beyond).
    pub l_outer: f64,
    /// Corner-smoothing length.
    pub beta: f64,
}

impl TubeCutoff {
    /// Builds the tube cutoff with the standard smoothing `β = 0.01`.
    pub fn new(l_inner: f64, l_outer: f64) -> Result<Self> {
        if !(0.0 < l_inner && l_inner < l_outer) || !l_outer.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tube cutoff needs 0 < inner < outer, got ({l_inner}, {l_outer})"
            )));
        }
        Ok(Self {
            l_inner,
            l_outer,
            beta: 0.01,
        })
    }

    fn gauge(&self, x: f64, y: f64) -> f64 {
        let b2 = self.beta * self.beta;
        (x * x + b2).sqrt() + (y * y + b2).sqrt() - 2.0 * self.beta
    }

    /// `χ(x + iy)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        smooth_step((self.l_outer - self.gauge(x, y)) / (self.l_outer - self.l_inner))
    }

    /// `∂̄χ = ½(∂_x + i∂_y)χ`, in closed form.
    pub fn dbar(&self, x: f64, y: f64) -> Complex64 {
        let s = (self.l_outer - self.gauge(x, y)) / (self.l_outer - self.l_inner);
        let bp = smooth_step_deriv(s);
        if bp == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b2 = self.beta * self.beta;
        let gx = x / (x * x + b2).sqrt();
        let gy = y / (y * y + b2).sqrt();
        let scale = -bp / (self.l_outer - self.l_inner);
        0.5 * scale * Complex64::new(gx, gy)
    }
}

/// The three integrals of the contour-shift identity.
#[derive(Clone, Copy, Debug)]
pub struct ContourShiftReport {
    /// Real-axis integral `K_t(uχ)(z)` (carries the `e^{v²/4t}` factor).
    pub direct: Complex64,
    /// Shifted-contour integral over `ℝ + iv` (real Gaussian, no
    /// amplification).
    pub i1: Complex64,
    /// Stokes area correction against `∂̄χ` over the tube strip.
    pub i2: Complex64,
}

impl ContourShiftReport {
    /// `|direct − (I₁ + I₂)|`.
    pub fn defect(&self) -> f64 {
        (self.direct - self.i1 - self.i2).norm()
    }
}

/// Verifies the contour-shift identity at one `(z, t)`:
/// `direct = I₁ + I₂` with `I₂` the `∂̄χ` area term picked up between
/// the real axis and the shifted contour `ℝ + iℑ(z)`.
///
/// One-dimensional; `z` must lie in the open egg of
/// `(−l_inner, l_inner)`, and the target must be holomorphic past the
/// tube's outer reach.
pub fn contour_shift_check(
    z: &ComplexPoint,
    t: f64,
    target: &HolomorphicTarget,
    tube: &TubeCutoff,
) -> Result<ContourShiftReport> {
    if z.dim() != 1 || target.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "the contour-shift experiment is one-dimensional".into(),
        ));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "flow time must be positive and finite, got {t}"
        )));
    }
    let domain = DomainSpec::interval(-tube.l_inner, tube.l_inner)?;
    if !egg_contains(&domain, z, false)? {
        return Err(Error::InvalidArgument(format!(
            "evaluation point {} + {}i lies outside the open egg of (−{}, {})",
            z.re[0], z.im[0], tube.l_inner, tube.l_inner
        )));
    }
    let reach = tube.l_outer + 2.0 * tube.beta;
    if reach > target.analyticity_radius * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "tube support reaches taxicab radius {reach}, past the target's \
             analyticity radius {}",
            target.analyticity_radius
        )));
    }
    let (x, v) = (z.re[0], z.im[0]);
    let zc = Complex64::new(x, v);
    let amp = (v * v / (4.0 * t)).exp();
    if amp > wick::AMPLIFICATION_LIMIT {
        return Err(Error::Guard(format!(
            "the direct integral at displacement {v} with t = {t:.3e} would amplify \
             quadrature noise by {amp:.2e}; increase t"
        )));
    }

    // One spacing serves all three integrals: kernel width, oscillation
    // at the worst displacement, and the tube's transition width.
    let mut spacing = t.sqrt() / 3.0;
    if v != 0.0 {
        spacing = spacing.min(2.0 * std::f64::consts::PI * t / (3.0 * v.abs()));
    }
    spacing = spacing.min((tube.l_outer - tube.l_inner) / 8.0);
    let panel_w = 6.0 * spacing;
    let prefactor = 1.0 / (4.0 * std::f64::consts::PI * t).sqrt();
    let quarter_t = 4.0 * t;

    let panels = panels_for_spacing(-tube.l_outer, tube.l_outer, panel_w).max(2);
    let (ws, wws) = composite_gauss_legendre(-tube.l_outer, tube.l_outer, panels, 16)?;

    // Real-axis integral: χ evaluated on the real slice.
    let mut terms = Vec::with_capacity(ws.len());
    for (&w, &wt) in ws.iter().zip(&wws) {
        let chi = tube.eval(w, 0.0);
        if chi == 0.0 {
            continue;
        }
        let dz = zc - w;
        terms.push(target.value_real(&[w])? * chi * wt * (-dz * dz / quarter_t).exp());
    }
    let direct = prefactor * wick::pairwise_sum(&terms);

    // Shifted contour ℝ + iv: a real Gaussian in w against the data on
    // the shifted line.
    let mut terms = Vec::with_capacity(ws.len());
    for (&w, &wt) in ws.iter().zip(&wws) {
        let chi = tube.eval(w, v);
        if chi == 0.0 {
            continue;
        }
        let g = (-(x - w) * (x - w) / quarter_t).exp();
        terms.push(target.value(&ComplexPoint::scalar(w, v))? * chi * wt * g);
    }
    let i1 = prefactor * wick::pairwise_sum(&terms);

    // Stokes correction over the strip between the contours:
    // ±2i ∫∫ K(z−ζ) u(ζ) ∂̄χ(ζ) dA, sign following the strip's side.
    let i2 = if v == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let (lo, hi) = (v.min(0.0), v.max(0.0));
        let ypanels = panels_for_spacing(lo, hi, panel_w).max(2);
        let (ys, yws) = composite_gauss_legendre(lo, hi, ypanels, 16)?;
        let mut terms = Vec::new();
        for (&w, &wt) in ws.iter().zip(&wws) {
            for (&y, &yw) in ys.iter().zip(&yws) {
                let dbar = tube.dbar(w, y);
                if dbar.re == 0.0 && dbar.im == 0.0 {
                    continue;
                }
                let zeta = Complex64::new(w, y);
                let dz = zc - zeta;
                let val = target.value(&ComplexPoint::scalar(w, y))?;
                terms.push(val * dbar * (wt * yw) * (-dz * dz / quarter_t).exp());
            }
        }
        let signed = 2.0 * v.signum();
        Complex64::new(0.0, signed) * prefactor * wick::pairwise_sum(&terms)
    };

    for value in [direct, i1, i2] {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Numerical(
                "contour-shift integral produced a non-finite value".into(),
            ));
        }
    }
    Ok(ContourShiftReport { direct, i1, i2 })
}

/// Cross-check of the explicit optimal family against its closed form.
#[derive(Clone, Debug)]
pub struct OptimalityReport {
    /// Exterior base point the family is driven from.
    pub x0: Vec<f64>,
    /// Quadratic offset (chosen so the family blows up at the requested
    /// exterior point).
    pub a: Complex64,
    /// Number of egg points compared.
    pub points: usize,
    /// Largest |s-integral − closed form| over those points.
    pub max_defect: f64,
}

/// Evaluates the time integral of the moving heat kernel
/// `(4π)^{-1/2}∫₀¹ (1−s)^{-1} e^{−((z−x₀)²+a)/4(1−s)} ds` (after the
/// substitution `1−s = σ²`, which removes the endpoint singularity of
/// the `d = 1` measure exactly) on a sampled compact subset of the egg
/// and compares it with the closed form
/// `(4π)^{-1/2} E₁(((z−x₀)²+a)/4)`.
///
/// `(x₀, a)` are derived from the requested exterior singular point `p`
/// via [`singular_family_params`], so the report also records which
/// admissible parameters the construction produced.
pub fn optimality_cross_check(
    domain: &DomainSpec,
    p: &ComplexPoint,
    margin: f64,
    counts: GridCounts,
    quad_panels: usize,
) -> Result<OptimalityReport> {
    if domain.dimension() != 1 || p.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "the optimality cross-check is one-dimensional".into(),
        ));
    }
    if quad_panels < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 quadrature panels, got {quad_panels}"
        )));
    }
    let (x0, a) = singular_family_params(p, domain)?;
    let points = sample_compact_subset(domain, margin, counts)?;
    let (sigmas, sws) = composite_gauss_legendre(0.0, 1.0, quad_panels, 16)?;
    let coef = 1.0 / (4.0 * std::f64::consts::PI).sqrt();

    let mut max_defect = 0.0_f64;
    for z in &points {
        let zeta = z.minus_real(&x0)?.complex_square() + a;
        if zeta.re <= 0.0 {
            return Err(Error::Numerical(format!(
                "the kernel exponent ℜζ = {} is not positive at {} + {}i; the \
                 parameters are not admissible on this egg",
                zeta.re, z.re[0], z.im[0]
            )));
        }
        let mut terms = Vec::with_capacity(sigmas.len());
        for (&sigma, &wt) in sigmas.iter().zip(&sws) {
            // (1−s)^{-1} ds = 2 dσ/σ with 1−s = σ²; the integrand dives
            // to an exact flat zero as σ → 0 (ℜζ > 0), so the open
            // Gauss nodes never see a singularity.
            terms.push((-zeta / (4.0 * sigma * sigma)).exp() * (2.0 * wt / sigma));
        }
        let integral = coef * wick::pairwise_sum(&terms);
        let closed = singular_family_value(z, &x0, a)?;
        max_defect = max_defect.max((integral - closed).norm());
    }
    Ok(OptimalityReport {
        x0,
        a,
        points: points.len(),
        max_defect,
    })
}

/// Loop geometry for monodromy detection.
#[derive(Clone, Copy, Debug)]
pub struct LoopSpec {
    /// Loop centre; `None` centres the loop on the singular point.
    pub center: Option<Complex64>,
    /// Loop radius.
    pub radius: f64,
    /// Sample points along the loop (≥ 16; 128 resolves every case here).
    pub steps: usize,
    /// Positive (counterclockwise) orientation.
    pub positive: bool,
}

impl LoopSpec {
    /// Counterclockwise loop of radius `radius` around the singular
    /// point, with the default 128 steps.
    pub fn around_singularity(radius: f64) -> Self {
        Self {
            center: None,
            radius,
            steps: 128,
            positive: true,
        }
    }
}

/// Outcome of continuing the singular family around one loop.
#[derive(Clone, Copy, Debug)]
pub struct MonodromyReport {
    /// The singular point `z* = x₀ + i√a` (positive imaginary part).
    pub singular_point: Complex64,
    /// Loop radius.
    pub loop_radius: f64,
    /// Continuation steps.
    pub steps: usize,
    /// Principal value at the loop's base point.
    pub start_value: Complex64,
    /// Continued value after the full loop.
    pub end_value: Complex64,
    /// `end − start`; `−2πi(4π)^{-d/2}` per positive enclosure.
    pub jump: Complex64,
    /// Winding number of `ζ(z) = (z−x₀)² + a` along the loop.
    pub winding: i32,
}

/// Continues `g(z) = (4π)^{-d/2} E₁(((z−x₀)² + a)/4)` around a closed
/// loop and reports the branch jump.
///
/// A loop around the singular point `z* = x₀ + i√a` winds `ζ` exactly
/// once, so the jump is the logarithm's `−2πi` scaled by the prefactor;
/// a loop around neither root leaves the value fixed.  A loop enclosing
/// *both* roots of `ζ` (radius too large) is rejected — detected by the
/// winding count, not assumed from the geometry.
pub fn monodromy_detect(
    x0: f64,
    a: Complex64,
    d: usize,
    loop_spec: &LoopSpec,
) -> Result<MonodromyReport> {
    if d == 0 || d > 2 {
        return Err(Error::InvalidArgument(format!(
            "the family is defined for d = 1 and d = 2, got d = {d}"
        )));
    }
    if loop_spec.steps < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 continuation steps, got {}",
            loop_spec.steps
        )));
    }
    if !(loop_spec.radius > 0.0) || !loop_spec.radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "loop radius must be positive and finite, got {}",
            loop_spec.radius
        )));
    }
    let root = a.sqrt();
    let z_star = Complex64::new(x0, 0.0) + Complex64::i() * root;
    let center = loop_spec.center.unwrap_or(z_star);

    // Closed polyline around the loop; the final point is bitwise the
    // first so a regular loop returns a bitwise-zero jump.
    let n = loop_spec.steps;
    let sign = if loop_spec.positive { 1.0 } else { -1.0 };
    let mut zs: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            center + loop_spec.radius * Complex64::new(th.cos(), th.sin())
        })
        .collect();
    zs.push(zs[0]);

    let mirror = Complex64::new(x0, 0.0) - Complex64::i() * root;
    for z in &zs {
        let clearance = (z - z_star).norm().min((z - mirror).norm());
        if clearance < 1e-9 * (1.0 + loop_spec.radius) {
            return Err(Error::InvalidArgument(
                "the loop passes through a root of the family's argument".into(),
            ));
        }
    }

    let zeta_path: Vec<Complex64> = zs
        .iter()
        .map(|&z| {
            let dz = z - x0;
            (dz * dz + a) / 4.0
        })
        .collect();
    let mut total_arg = 0.0;
    for w in zeta_path.windows(2) {
        total_arg += (w[1] / w[0]).arg();
    }
    let winding = (total_arg / (2.0 * std::f64::consts::PI)).round() as i32;
    if winding.abs() > 1 {
        return Err(Error::InvalidArgument(format!(
            "the loop winds {winding} times around the singular value — it encloses \
             both roots of (z−x₀)² + a; shrink the radius below half the root \
             separation {:.3}",
            (z_star - mirror).norm()
        )));
    }

    let coef = (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let start_value = coef * crate::special::exp_integral_e1(zeta_path[0])?;
    let end_value = coef * e1_continued(&zeta_path)?;
    Ok(MonodromyReport {
        singular_point: z_star,
        loop_radius: loop_spec.radius,
        steps: n,
        start_value,
        end_value,
        jump: end_value - start_value,
        winding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::make_cutoff;
    use approx::assert_relative_eq;

    fn quadratic() -> HolomorphicTarget {
        HolomorphicTarget::polynomial_1d(&[0.0, 0.0, 1.0]).unwrap()
    }

    fn lorentzian() -> HolomorphicTarget {
        HolomorphicTarget::lorentzian(1.0 / std::f64::consts::PI, 1).unwrap()
    }

    #[test]
    fn tube_cutoff_is_flat_on_the_egg_with_closed_form_dbar() {
        let tube = TubeCutoff::new(1.0, 1.2).unwrap();
        // Exactly 1 on the closed egg (taxicab ≤ 1), exactly 0 far out.
        for (x, y) in [(0.0, 0.0), (0.5, 0.5), (0.99, 0.0), (0.3, 0.65)] {
            assert_eq!(tube.eval(x, y), 1.0, "not flat at ({x}, {y})");
            assert_eq!(tube.dbar(x, y), Complex64::new(0.0, 0.0));
        }
        assert_eq!(tube.eval(1.4, 0.0), 0.0);
        assert_eq!(tube.eval(0.8, 0.6), 0.0);

        // Closed-form ∂̄ against centred differences in the tube.
        let h = 1e-5;
        for (x, y) in [(1.05, 0.1), (0.6, 0.55), (-0.9, 0.25), (0.3, -0.85)] {
            let fd_x = (tube.eval(x + h, y) - tube.eval(x - h, y)) / (2.0 * h);
            let fd_y = (tube.eval(x, y + h) - tube.eval(x, y - h)) / (2.0 * h);
            let fd = 0.5 * Complex64::new(fd_x, fd_y);
            let err = (tube.dbar(x, y) - fd).norm();
            assert!(err < 1e-6, "∂̄ mismatch {err:e} at ({x}, {y})");
        }
    }

    #[test]
    fn tube_keeps_the_kernel_exponent_positive() {
        // The decay of the Stokes correction rests on this inequality:
        // for z = x + iv at taxicab margin m inside the egg and
        // ζ = w + iy in the tube's support *between the contours*
        // (y between 0 and v — exactly where I₂ integrates), the
        // support forces |w| + |y| > l_inner, so
        // |x − w| > m + (|v| − |y|) and
        // ℜ(z−ζ)² = (x−w)² − (v−y)² > m² + 2m(|v|−|y|) ≥ m².
        // Off the strip (|y| > |v|) the exponent can genuinely go
        // negative; the identity never evaluates the kernel there.
        let tube = TubeCutoff::new(1.0, 1.2).unwrap();
        let domain = DomainSpec::interval(-1.0, 1.0).unwrap();
        let zs = sample_compact_subset(
            &domain,
            0.2,
            GridCounts { n_re: 9, n_im: 5 },
        )
        .unwrap();
        let mut worst = f64::INFINITY;
        let mut checked = 0usize;
        for z in &zs {
            let (x, v) = (z.re[0], z.im[0]);
            if v == 0.0 {
                continue;
            }
            let zc = Complex64::new(x, v);
            for i in 0..60 {
                let w = -1.25 + 2.5 * i as f64 / 59.0;
                for j in 0..20 {
                    let y = v * j as f64 / 19.0;
                    if tube.dbar(w, y).norm() == 0.0 {
                        continue;
                    }
                    let dz = zc - Complex64::new(w, y);
                    worst = worst.min((dz * dz).re);
                    checked += 1;
                }
            }
        }
        assert!(checked > 100, "only {checked} strip samples hit the tube");
        assert!(worst > 0.04, "kernel exponent dips to {worst:e}");
    }

    #[test]
    fn sweep_errors_decrease_for_the_quadratic() {
        // Cutoff starting at 1.5 keeps the tail well below the 2t law
        // even for sample points hugging the egg's boundary; a cutoff
        // starting right at the domain edge would leak tail mass
        // comparable to 2t at the larger times.
        let report = convergence_sweep(
            &quadratic(),
            &DomainSpec::interval(-1.0, 1.0).unwrap(),
            &make_cutoff(1.5, 2.5).unwrap(),
            0.1,
            &[0.2, 0.1, 0.05],
            GridCounts { n_re: 12, n_im: 4 },
        )
        .unwrap();
        assert!(report.points >= 40);
        assert!(report
            .samples
            .windows(2)
            .all(|w| w[1].1 < w[0].1), "{:?}", report.samples);
        // The heat flow of z² is z² + 2t: the sweep error is essentially
        // 2t plus the cutoff tail.
        for &(t, err) in &report.samples {
            assert!((err - 2.0 * t).abs() < 0.15 * (2.0 * t), "t = {t}: {err}");
        }
    }

    #[test]
    fn sweep_error_is_tail_only_for_the_constant() {
        let constant = HolomorphicTarget::polynomial_1d(&[1.0]).unwrap();
        let report = convergence_sweep(
            &constant,
            &DomainSpec::interval(-1.0, 1.0).unwrap(),
            &make_cutoff(2.0, 3.0).unwrap(),
            0.1,
            &[0.05, 0.02],
            GridCounts { n_re: 12, n_im: 4 },
        )
        .unwrap();
        // A constant is heat-invariant, so the sweep error is *only*
        // the cutoff tail e^{−(taxicab gap)²/4t} — here the gap to the
        // cutoff's shoulder is ≥ 1.1 and the errors are far below the
        // 2t-scale errors of any genuinely curved target.
        assert!(report.samples[0].1 < 1e-3, "{:?}", report.samples);
        assert!(report.samples[1].1 < 1e-9, "{:?}", report.samples);
    }

    #[test]
    fn sweep_error_shrinks_on_smaller_compacts() {
        let domain = DomainSpec::interval(-1.0, 1.0).unwrap();
        let cutoff = make_cutoff(1.0, 1.5).unwrap();
        let counts = GridCounts { n_re: 12, n_im: 4 };
        let wide = convergence_sweep(&lorentzian(), &domain, &cutoff, 0.1, &[0.1], counts)
            .unwrap();
        let narrow = convergence_sweep(&lorentzian(), &domain, &cutoff, 0.4, &[0.1], counts)
            .unwrap();
        assert!(narrow.samples[0].1 <= wide.samples[0].1);
    }

    #[test]
    fn sweep_rejects_bad_configurations() {
        let domain = DomainSpec::interval(-1.0, 1.0).unwrap();
        let cutoff = make_cutoff(1.0, 1.5).unwrap();
        let counts = GridCounts { n_re: 8, n_im: 3 };
        // Times not decreasing.
        assert!(convergence_sweep(&quadratic(), &domain, &cutoff, 0.1, &[0.1, 0.2], counts)
            .is_err());
        // Cutoff not flat on the domain.
        let narrow = make_cutoff(0.8, 1.5).unwrap();
        assert!(
            convergence_sweep(&quadratic(), &domain, &narrow, 0.1, &[0.1], counts).is_err()
        );
        // Cutoff past the analyticity radius.
        let wide = make_cutoff(1.0, 2.5).unwrap();
        assert!(
            convergence_sweep(&lorentzian(), &domain, &wide, 0.1, &[0.1], counts).is_err()
        );
    }

    #[test]
    fn contour_shift_identity_holds() {
        let tube = TubeCutoff::new(1.0, 1.2).unwrap();
        let z = ComplexPoint::scalar(0.3, 0.4);
        let report = contour_shift_check(&z, 0.1, &quadratic(), &tube).unwrap();
        assert!(report.defect() < 1e-6, "defect {:e}", report.defect());
        // The correction genuinely participates at this depth.
        assert!(report.i2.norm() > 1e-4, "I₂ = {:e}", report.i2.norm());
    }

    #[test]
    fn contour_shift_reduces_to_cauchy_for_wide_tubes() {
        // With the tube far outside the kernel's reach (the kernel at
        // t = 0.04 has effectively died by |w − x| ≈ 1.5, the tube
        // transition starts at taxicab 3) the integrand is effectively
        // holomorphic between the contours: I₂ ≈ 0 and the shift is
        // pure Cauchy.
        let tube = TubeCutoff::new(3.0, 4.0).unwrap();
        let z = ComplexPoint::scalar(0.3, 0.4);
        let report = contour_shift_check(&z, 0.04, &quadratic(), &tube).unwrap();
        assert!(report.i2.norm() < 1e-10, "I₂ = {:e}", report.i2.norm());
        assert!(
            (report.direct - report.i1).norm() < 1e-8,
            "shift defect {:e}",
            (report.direct - report.i1).norm()
        );
    }

    #[test]
    fn contour_correction_vanishes_to_high_order_in_t() {
        // Deep in the egg (taxicab margin 0.8) the correction decays
        // like e^{−m²/4t}: every halving of t must shrink it by far
        // more than the criterion's factor 5.
        let tube = TubeCutoff::new(1.0, 1.2).unwrap();
        let z = ComplexPoint::scalar(0.1, 0.1);
        let mut magnitudes = Vec::new();
        for t in [0.1, 0.05, 0.025] {
            let report = contour_shift_check(&z, t, &quadratic(), &tube).unwrap();
            assert!(report.defect() < 1e-6, "defect {:e} at t = {t}", report.defect());
            magnitudes.push(report.i2.norm());
        }
        for pair in magnitudes.windows(2) {
            assert!(
                pair[1] < pair[0] / 5.0,
                "correction decayed too slowly: {magnitudes:?}"
            );
        }
    }

    #[test]
    fn contour_shift_rejects_points_outside_the_egg() {
        let tube = TubeCutoff::new(1.0, 1.2).unwrap();
        let z = ComplexPoint::scalar(0.7, 0.5);
        assert!(matches!(
            contour_shift_check(&z, 0.1, &quadratic(), &tube),
            Err(Error::InvalidArgument(_))
        ));
        // Lorentzian poles at ±2i: a tube reaching taxicab 2.1 must be
        // refused.
        let wide = TubeCutoff::new(1.9, 2.1).unwrap();
        let inside = ComplexPoint::scalar(0.3, 0.4);
        assert!(contour_shift_check(&inside, 0.1, &lorentzian(), &wide).is_err());
    }

    #[test]
    fn optimality_family_matches_its_closed_form() {
        // The singular point 0.5 + 0.8i sits outside the closed egg of
        // (−1, 1); the derived parameters land on x₀ = 1.2,
        // a = 0.15 + 1.12i, and the s-integral reproduces the closed
        // form across the egg.
        let domain = DomainSpec::interval(-1.0, 1.0).unwrap();
        let p = ComplexPoint::scalar(0.5, 0.8);
        let report = optimality_cross_check(
            &domain,
            &p,
            0.05,
            GridCounts { n_re: 25, n_im: 5 },
            240,
        )
        .unwrap();
        assert_relative_eq!(report.x0[0], 1.2, max_relative = 1e-12);
        assert_relative_eq!(report.a.re, 0.15, max_relative = 1e-10);
        assert_relative_eq!(report.a.im, 1.12, max_relative = 1e-10);
        assert!(report.points >= 100, "only {} points", report.points);
        assert!(report.max_defect < 1e-6, "defect {:e}", report.max_defect);
    }

    #[test]
    fn strong_damping_flattens_the_family() {
        // Large ℜ(a) multiplies the whole field by e^{−a/4s}-type
        // damping: the closed form is uniformly tiny on the egg.
        let domain = DomainSpec::interval(-1.0, 1.0).unwrap();
        let points = sample_compact_subset(&domain, 0.05, GridCounts { n_re: 15, n_im: 4 })
            .unwrap();
        let a = Complex64::new(40.0, 1.12);
        let mut sup = 0.0_f64;
        for z in &points {
            sup = sup.max(singular_family_value(z, &[1.2], a).unwrap().norm());
        }
        assert!(sup < 1e-4, "family not damped: {sup:e}");
    }

    #[test]
    fn monodromy_jump_matches_the_log_branch() {
        let a = Complex64::new(0.15, 1.12);
        let report =
            monodromy_detect(1.2, a, 1, &LoopSpec::around_singularity(0.3)).unwrap();
        assert_relative_eq!(report.singular_point.re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(report.singular_point.im, 0.8, epsilon = 1e-12);
        assert_eq!(report.winding, 1);
        let expected = std::f64::consts::PI.sqrt();
        assert!(
            (report.jump.norm() - expected).abs() < 0.01 * expected,
            "jump magnitude {} vs √π",
            report.jump.norm()
        );

        // Radius independence: the jump is topological.
        let half = monodromy_detect(1.2, a, 1, &LoopSpec::around_singularity(0.15)).unwrap();
        assert!(
            (half.jump - report.jump).norm() < 1e-8,
            "jump moved by {:e} between radii",
            (half.jump - report.jump).norm()
        );
    }

    #[test]
    fn monodromy_is_silent_on_regular_loops() {
        let a = Complex64::new(0.15, 1.12);
        let spec = LoopSpec {
            center: Some(Complex64::new(0.5, 1.7)),
            radius: 0.3,
            steps: 128,
            positive: true,
        };
        let report = monodromy_detect(1.2, a, 1, &spec).unwrap();
        assert_eq!(report.winding, 0);
        assert!(report.jump.norm() < 1e-10, "jump {:e}", report.jump.norm());
    }

    #[test]
    fn monodromy_flips_with_orientation() {
        let a = Complex64::new(0.15, 1.12);
        let pos = monodromy_detect(1.2, a, 1, &LoopSpec::around_singularity(0.3)).unwrap();
        let neg = monodromy_detect(
            1.2,
            a,
            1,
            &LoopSpec {
                center: None,
                radius: 0.3,
                steps: 128,
                positive: false,
            },
        )
        .unwrap();
        assert_eq!(neg.winding, -1);
        assert!(
            (pos.jump + neg.jump).norm() < 1e-9,
            "jumps not opposite: {:?} vs {:?}",
            pos.jump,
            neg.jump
        );
    }

    #[test]
    fn monodromy_rejects_bad_loops() {
        let a = Complex64::new(0.15, 1.12);
        // Radius beyond the root separation winds ζ twice.
        match monodromy_detect(1.2, a, 1, &LoopSpec::around_singularity(3.0)) {
            Err(Error::InvalidArgument(msg)) => assert!(msg.contains("both roots")),
            other => panic!("expected a double-enclosure rejection, got {other:?}"),
        }
        // Too few steps.
        let coarse = LoopSpec {
            center: None,
            radius: 0.3,
            steps: 8,
            positive: true,
        };
        assert!(monodromy_detect(1.2, a, 1, &coarse).is_err());
    }
}
