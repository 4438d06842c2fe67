//! Spatial domains and their complex analyticity "eggs".
//!
//! For a bounded domain `Ω ⊂ ℝᵈ` the egg is the set of complex points
//! `z = x + iy ∈ ℂᵈ` with `x ∈ Ω` and `|y| < dist(x, ∂Ω)`: the imaginary
//! displacement may grow as large as the distance to the boundary, which
//! gives the egg its pointed shape over the boundary and its full width
//! over the incenter.  States reachable by boundary controls of the heat
//! equation extend holomorphically exactly to this region, so membership
//! tests and compact exhaustions of the egg are the geometric primitives
//! every experiment in this crate builds on.
//!
//! Three domain shapes are supported: intervals (d = 1), balls (any d),
//! and simple polygons (d = 2).  All distances are exact — polygon
//! distance is the true minimum over edge segments, not an offset
//! approximation.

use num_complex::Complex64;

use crate::{Error, Result};

/// A point `z = x + iy` of `ℂᵈ`, stored as paired real vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    /// Builds a point, checking that both parts share a length `d ≥ 1`.
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.is_empty() || re.len() != im.len() {
            return Err(Error::DimensionMismatch(format!(
                "complex point needs matching nonempty parts, got re of length {} and im of length {}",
                re.len(),
                im.len()
            )));
        }
        Ok(Self { re, im })
    }

    /// A purely real point.
    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(re: f64, im: f64) -> Self {
        Self {
            re: vec![re],
            im: vec![im],
        }
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    /// Euclidean norm of the imaginary part.
    pub fn im_norm(&self) -> f64 {
        self.im.iter().map(|y| y * y).sum::<f64>().sqrt()
    }

    /// The complex bilinear square `z·z = Σ_k (x_k + i y_k)²`.
    ///
    /// This is the quantity the analytically continued heat kernel
    /// exponentiates — *not* the Hermitian `|z|²`.  Its real part is
    /// `|x|² − |y|²`, which is what makes imaginary displacements
    /// dangerous and the egg condition necessary.
    pub fn complex_square(&self) -> Complex64 {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&x, &y)| {
                let c = Complex64::new(x, y);
                c * c
            })
            .sum()
    }

    /// `z − y` for a real shift `y` (used for kernel arguments `z − y`).
    pub fn minus_real(&self, y: &[f64]) -> Result<ComplexPoint> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot shift a {}-dimensional point by a {}-dimensional vector",
                self.dim(),
                y.len()
            )));
        }
        Ok(ComplexPoint {
            re: self.re.iter().zip(y).map(|(a, b)| a - b).collect(),
            im: self.im.clone(),
        })
    }

    /// Scalar accessor for d = 1 points.
    pub fn as_scalar(&self) -> Result<Complex64> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected a 1-dimensional point, got dimension {}",
                self.dim()
            )));
        }
        Ok(Complex64::new(self.re[0], self.im[0]))
    }
}

/// Spatial domain `Ω`.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Open interval `(a, b)`, `a < b`.
    Interval { a: f64, b: f64 },
    /// Open ball of the given center and radius; dimension is the length
    /// of the center vector.
    Ball { center: Vec<f64>, radius: f64 },
    /// Simple, positively oriented polygon in the plane.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "interval needs finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(DomainSpec::Interval { a, b })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDomain("ball center must be nonempty".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "ball needs finite center and radius > 0, got radius {radius}"
            )));
        }
        Ok(DomainSpec::Ball { center, radius })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices
            .iter()
            .any(|v| !v[0].is_finite() || !v[1].is_finite())
        {
            return Err(Error::InvalidDomain(
                "polygon vertices must be finite".into(),
            ));
        }
        // Shoelace: twice the signed area; positive means counter-clockwise.
        let n = vertices.len();
        let area2: f64 = (0..n)
            .map(|i| {
                let p = vertices[i];
                let q = vertices[(i + 1) % n];
                p[0] * q[1] - q[0] * p[1]
            })
            .sum();
        if area2 <= 0.0 {
            return Err(Error::InvalidDomain(
                "polygon must be positively oriented (counter-clockwise) with positive area".into(),
            ));
        }
        // Simplicity: no two non-adjacent edges may intersect.
        for i in 0..n {
            let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::InvalidDomain(format!(
                        "polygon is self-intersecting: edges {i} and {j} cross"
                    )));
                }
            }
        }
        Ok(DomainSpec::Polygon { vertices })
    }

    /// Spatial dimension of the domain.
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            DomainSpec::Ball { center, .. } => center.len(),
            DomainSpec::Polygon { .. } => 2,
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSpec::Interval { a, b } => (vec![*a], vec![*b]),
            DomainSpec::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            DomainSpec::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo.to_vec(), hi.to_vec())
            }
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} in a domain of dimension {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

/// Distance from a point to the boundary `∂Ω`, plus which side it lies on.
///
/// The distance is always nonnegative; `interior` distinguishes the two
/// sides instead of a sign convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDistance {
    pub distance: f64,
    pub interior: bool,
}

/// Euclidean distance from `x` to `∂Ω`.
pub fn distance_to_boundary(domain: &DomainSpec, x: &[f64]) -> Result<BoundaryDistance> {
    domain.check_dim(x)?;
    match domain {
        DomainSpec::Interval { a, b } => {
            let distance = (x[0] - a).abs().min((x[0] - b).abs());
            Ok(BoundaryDistance {
                distance,
                interior: *a < x[0] && x[0] < *b,
            })
        }
        DomainSpec::Ball { center, radius } => {
            let r = x
                .iter()
                .zip(center)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum::<f64>()
                .sqrt();
            Ok(BoundaryDistance {
                distance: (radius - r).abs(),
                interior: r < *radius,
            })
        }
        DomainSpec::Polygon { vertices } => {
            let p = [x[0], x[1]];
            let n = vertices.len();
            let mut distance = f64::INFINITY;
            for i in 0..n {
                let (d, _) = point_segment(p, vertices[i], vertices[(i + 1) % n]);
                distance = distance.min(d);
            }
            let inside = distance > 0.0 && point_in_polygon(p, vertices);
            Ok(BoundaryDistance {
                distance,
                interior: inside,
            })
        }
    }
}

/// A boundary point of minimal distance to `x`.
pub fn nearest_boundary_point(domain: &DomainSpec, x: &[f64]) -> Result<Vec<f64>> {
    domain.check_dim(x)?;
    match domain {
        DomainSpec::Interval { a, b } => {
            if (x[0] - a).abs() <= (x[0] - b).abs() {
                Ok(vec![*a])
            } else {
                Ok(vec![*b])
            }
        }
        DomainSpec::Ball { center, radius } => {
            let diff: Vec<f64> = x.iter().zip(center).map(|(xi, ci)| xi - ci).collect();
            let r = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
            if r == 0.0 {
                // Center: every boundary point is nearest; pick the +e1 one.
                let mut p = center.clone();
                p[0] += radius;
                return Ok(p);
            }
            Ok(center
                .iter()
                .zip(&diff)
                .map(|(ci, di)| ci + di * radius / r)
                .collect())
        }
        DomainSpec::Polygon { vertices } => {
            let p = [x[0], x[1]];
            let n = vertices.len();
            let mut best = (f64::INFINITY, [0.0, 0.0]);
            for i in 0..n {
                let cand = point_segment(p, vertices[i], vertices[(i + 1) % n]);
                if cand.0 < best.0 {
                    best = cand;
                }
            }
            Ok(best.1.to_vec())
        }
    }
}

/// Membership in the egg `{x + iy : x ∈ Ω, |y| < dist(x, ∂Ω)}`.
///
/// `closed = true` relaxes both comparisons: `x ∈ closure(Ω)` and
/// `|y| ≤ dist(x, ∂Ω)`.
pub fn egg_contains(domain: &DomainSpec, z: &ComplexPoint, closed: bool) -> Result<bool> {
    let bd = distance_to_boundary(domain, &z.re)?;
    let imag = z.im_norm();
    if closed {
        let in_closure = bd.interior || bd.distance == 0.0;
        Ok(in_closure && imag <= bd.distance)
    } else {
        Ok(bd.interior && imag < bd.distance)
    }
}

/// Grid resolution for [`sample_compact_subset`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCounts {
    /// Points per real axis (so d = 2 domains get `n_re²` candidate sites).
    pub n_re: usize,
    /// Imaginary displacements per real point.
    pub n_im: usize,
}

/// Deterministic sample of a compact subset of the egg.
///
/// Real parts walk the midpoints of an `n_re`-per-axis grid over the
/// bounding box of `Ω`, keeping those with `slack = dist(x, ∂Ω) − margin`
/// positive.  Each surviving `x` is paired with imaginary displacements
/// `y = slack · u · (1, …, 1)/√d` for `u` over the midpoints of `n_im`
/// equal cells of `[−1, 1]`, so `|y| = |u| · slack < slack` and every
/// sample sits at least `margin · (something positive)` inside the egg.
/// No randomness: identical output on every call.
pub fn sample_compact_subset(
    domain: &DomainSpec,
    margin: f64,
    counts: GridCounts,
) -> Result<Vec<ComplexPoint>> {
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "margin must be positive and finite, got {margin}"
        )));
    }
    if counts.n_re == 0 || counts.n_im == 0 {
        return Err(Error::InvalidArgument(
            "sampling grid counts must be positive".into(),
        ));
    }
    let d = domain.dimension();
    if d > 2 {
        return Err(Error::InvalidDomain(format!(
            "compact sampling supports dimensions 1 and 2, got {d}"
        )));
    }
    let (lo, hi) = domain.bounding_box();
    let axis = |k: usize, i: usize| lo[k] + (i as f64 + 0.5) * (hi[k] - lo[k]) / counts.n_re as f64;
    let mut sites: Vec<Vec<f64>> = Vec::new();
    if d == 1 {
        for i in 0..counts.n_re {
            sites.push(vec![axis(0, i)]);
        }
    } else {
        for i in 0..counts.n_re {
            for j in 0..counts.n_re {
                sites.push(vec![axis(0, i), axis(1, j)]);
            }
        }
    }
    let mut out = Vec::new();
    let scale = 1.0 / (d as f64).sqrt();
    for x in sites {
        let bd = distance_to_boundary(domain, &x)?;
        if !bd.interior {
            continue;
        }
        let slack = bd.distance - margin;
        if slack <= 0.0 {
            continue;
        }
        for k in 0..counts.n_im {
            let u = -1.0 + (k as f64 + 0.5) * 2.0 / counts.n_im as f64;
            let y: Vec<f64> = (0..d).map(|_| slack * u * scale).collect();
            out.push(ComplexPoint { re: x.clone(), im: y });
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "margin {margin} leaves no interior sample sites (empty compact subset)"
        )));
    }
    Ok(out)
}

/// Distance from `p` to segment `[a, b]` and the closest segment point.
fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> (f64, [f64; 2]) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    (d, q)
}

/// Even–odd ray-crossing test (ray towards +x).  Points exactly on the
/// boundary are handled by the caller via the distance test.
fn point_in_polygon(p: [f64; 2], vertices: &[[f64; 2]]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if x_cross > p[0] {
                inside = !inside;
            }
        }
    }
    inside
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Proper or degenerate intersection of segments `[a1,a2]` and `[b1,b2]`.
fn segments_intersect(a1: [f64; 2], a2: [f64; 2], b1: [f64; 2], b2: [f64; 2]) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b1, b2, a1))
        || (d2 == 0.0 && on_segment(b1, b2, a2))
        || (d3 == 0.0 && on_segment(a1, a2, b1))
        || (d4 == 0.0 && on_segment(a1, a2, b2))
}
