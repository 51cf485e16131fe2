//! Pure-gauge potentials outside the tube, plane paths with branch-tracked
//! azimuth, line integrals and winding numbers.
//!
//! All coordinates are measured from the tube axis. Outside the tube both
//! potentials are gradients of multi-valued functions of the azimuth,
//! `A = grad(phi_m * phi / 2pi)` and `C = grad(-phi_e * phi / 2pi)`, so any
//! closed-loop integral counts windings.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use serde::Deserialize;

use crate::error::{domain, Error, Result};
use crate::units::{DyonCharge, FluxTube};

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Principal azimuth in `(-pi, pi]`.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    fn distance(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// `strength / (2 pi r)` along the azimuthal unit vector: the gradient of
/// `strength * phi / 2pi`.
pub fn azimuthal_gradient(strength: f64, p: PlanePoint) -> Vec2 {
    let r2 = p.x * p.x + p.y * p.y;
    let s = strength / (TAU * r2);
    [-s * p.y, s * p.x]
}

fn outside(f: &FluxTube, p: PlanePoint) -> Result<()> {
    let r = p.r();
    if r < f.radius_eps {
        Err(Error::InsideTube {
            x: p.x,
            y: p.y,
            r,
            radius: f.radius_eps,
        })
    } else {
        Ok(())
    }
}

/// Magnetic and electric vector potentials `(A, C)` at `p`.
pub fn vector_potentials(f: &FluxTube, p: PlanePoint) -> Result<(Vec2, Vec2)> {
    outside(f, p)?;
    Ok((
        azimuthal_gradient(f.phi_m, p),
        azimuthal_gradient(-f.phi_e, p),
    ))
}

/// Minimal-coupling field `q A + g C`.
///
/// Outside the tube this is `grad(alpha_eff * phi)` with
/// `alpha_eff = (q phi_m - g phi_e) / 2pi`.
pub fn conjugate_momentum_field(d: &DyonCharge, f: &FluxTube, p: PlanePoint) -> Result<Vec2> {
    let (a, c) = vector_potentials(f, p)?;
    Ok([d.q * a[0] + d.g * c[0], d.q * a[1] + d.g * c[1]])
}

/// Gradient of `beta = theta * phi / 2pi`.
pub fn beta_gradient(theta: f64, p: PlanePoint) -> Vec2 {
    azimuthal_gradient(theta, p)
}

/// Azimuth jumps at or above this between consecutive samples are rejected.
pub const MAX_AZIMUTH_JUMP: f64 = PI * (1.0 - 1e-9);

/// Polyline in the plane with its azimuth unwrapped along the way.
#[derive(Debug, Clone)]
pub struct PlanePath {
    points: Vec<PlanePoint>,
    azimuth: Vec<f64>,
    closed: bool,
}

impl PlanePath {
    pub fn open(points: Vec<PlanePoint>) -> Result<Self> {
        Self::build(points, false)
    }

    /// A closed path; the last point must repeat the first.
    pub fn closed(points: Vec<PlanePoint>) -> Result<Self> {
        if let (Some(a), Some(b)) = (points.first(), points.last()) {
            if a.distance(b) > 1e-12 * (1.0 + a.r()) {
                return Err(domain("closed path must end where it starts"));
            }
        }
        Self::build(points, true)
    }

    /// Close a ring of points by repeating the first one at the end.
    pub fn closed_ring(mut points: Vec<PlanePoint>) -> Result<Self> {
        if let Some(&first) = points.first() {
            points.push(first);
        }
        Self::closed(points)
    }

    /// Circle around `center` traversed `turns` times, counterclockwise for
    /// positive `turns`.
    pub fn circle(
        center: PlanePoint,
        radius: f64,
        turns: i64,
        samples_per_turn: usize,
    ) -> Result<Self> {
        if turns == 0 {
            return Err(domain("circle needs a non-zero number of turns"));
        }
        let n = samples_per_turn.max(3) * turns.unsigned_abs() as usize;
        let sign = turns.signum() as f64;
        let points = (0..=n)
            .map(|i| {
                let t = if i == n {
                    0.0
                } else {
                    sign * TAU * (i as f64 / samples_per_turn.max(3) as f64)
                };
                PlanePoint::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            })
            .collect();
        Self::closed(points)
    }

    /// Read points from CSV with a header row containing `x` and `y`.
    pub fn from_csv<R: Read>(reader: R, closed: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let points = rdr
            .deserialize::<PlanePoint>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if closed {
            Self::closed(points)
        } else {
            Self::open(points)
        }
    }

    fn build(points: Vec<PlanePoint>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(domain("a path needs at least two points"));
        }
        let mut azimuth = Vec::with_capacity(points.len());
        let mut prev: Option<f64> = None;
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(domain(format!("non-finite path point at index {i}")));
            }
            if p.r() == 0.0 {
                return Err(domain(format!("path point {i} lies on the tube axis")));
            }
            let a = p.azimuth();
            let unwrapped = match prev {
                None => a,
                Some(last) => {
                    let jump = wrap(a - last);
                    if jump.abs() >= MAX_AZIMUTH_JUMP {
                        return Err(Error::CoarsePath {
                            segment: i - 1,
                            jump,
                        });
                    }
                    last + jump
                }
            };
            azimuth.push(unwrapped);
            prev = Some(unwrapped);
        }
        Ok(Self {
            points,
            azimuth,
            closed,
        })
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Net unwrapped azimuth swept from the first to the last point.
    pub fn azimuth_change(&self) -> f64 {
        self.azimuth[self.azimuth.len() - 1] - self.azimuth[0]
    }

    /// This path followed by `other`, which must start where this one ends.
    pub fn concat(&self, other: &PlanePath) -> Result<PlanePath> {
        let end = self.points[self.points.len() - 1];
        if end.distance(&other.points[0]) > 1e-12 * (1.0 + end.r()) {
            return Err(domain("paths do not join"));
        }
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points[1..]);
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if first.distance(&last) <= 1e-12 * (1.0 + first.r()) {
            Self::closed(pts)
        } else {
            Self::open(pts)
        }
    }

    /// Quadrature step used when the caller does not choose one.
    pub fn default_step(&self) -> f64 {
        self.length() / 1024.0
    }
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed number of counterclockwise turns of a closed path around the axis.
pub fn winding_number(path: &PlanePath) -> Result<i64> {
    if !path.is_closed() {
        return Err(Error::OpenPath);
    }
    Ok((path.azimuth_change() / TAU).round() as i64)
}

// 8-point Gauss-Legendre on [-1, 1]: positive nodes, used in +/- pairs.
#[allow(clippy::excessive_precision)]
pub(crate) const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
#[allow(clippy::excessive_precision)]
pub(crate) const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Line integral of a vector field along a straight segment, split into
/// pieces no longer than `step`, each integrated with 8-point Gauss-Legendre.
pub fn segment_integral<F>(field: &F, a: PlanePoint, b: PlanePoint, step: f64) -> Result<f64>
where
    F: Fn(PlanePoint) -> Result<Vec2>,
{
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = dx.hypot(dy);
    if len == 0.0 {
        return Ok(0.0);
    }
    let pieces = (len / step).ceil().max(1.0) as usize;
    let inv = 1.0 / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let mid = (k as f64 + 0.5) * inv;
        let half = 0.5 * inv;
        let mut acc = 0.0;
        for (&node, &w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            for s in [mid - half * node, mid + half * node] {
                let v = field(PlanePoint::new(a.x + s * dx, a.y + s * dy))?;
                acc += w * (v[0] * dx + v[1] * dy);
            }
        }
        total += acc * half;
    }
    Ok(total)
}

/// Line integral of `field` along `path`.
///
/// Errors from `field` (for instance a quadrature node inside the tube)
/// propagate unchanged.
pub fn line_integral<F>(field: F, path: &PlanePath, quadrature_step: f64) -> Result<f64>
where
    F: Fn(PlanePoint) -> Result<Vec2>,
{
    if !(quadrature_step > 0.0) {
        return Err(domain(format!(
            "quadrature step must be positive, got {quadrature_step}"
        )));
    }
    path.points
        .windows(2)
        .map(|w| segment_integral(&field, w[0], w[1], quadrature_step))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{witten_charges, PhysicalConstants};

    const ORIGIN: PlanePoint = PlanePoint::new(0.0, 0.0);

    fn beta(theta: f64) -> impl Fn(PlanePoint) -> Result<Vec2> {
        move |p| Ok(beta_gradient(theta, p))
    }

    #[test]
    fn potential_examples() {
        let c = PhysicalConstants::default();
        let f = FluxTube::new(c.phi_m0, 0.0, 0.5).unwrap();
        let (a, cc) = vector_potentials(&f, PlanePoint::new(1.0, 0.0)).unwrap();
        assert!(a[0].abs() < 1e-15);
        assert!((a[1] - c.phi_m0 / TAU).abs() < 1e-14);
        assert_eq!(cc, [0.0, 0.0]);

        let zero = FluxTube::new(0.0, 0.0, 0.5).unwrap();
        let (a, cc) = vector_potentials(&zero, PlanePoint::new(0.3, 2.0)).unwrap();
        assert!(a.iter().chain(cc.iter()).all(|v| *v == 0.0));

        let norm = |v: Vec2| v[0].hypot(v[1]);
        let (a1, _) = vector_potentials(&f, PlanePoint::new(0.6, 0.8)).unwrap();
        let (a2, _) = vector_potentials(&f, PlanePoint::new(1.2, 1.6)).unwrap();
        assert!((norm(a2) - 0.5 * norm(a1)).abs() < 1e-15);

        assert!(matches!(
            vector_potentials(&f, PlanePoint::new(0.1, 0.1)),
            Err(Error::InsideTube { .. })
        ));
    }

    #[test]
    fn conjugate_momentum_examples() {
        let c = PhysicalConstants::default();
        let f = FluxTube::flux_quanta(0.5, &c).unwrap();
        let d = DyonCharge::new(c.e, c.g0);
        for p in [PlanePoint::new(1.0, 0.0), PlanePoint::new(-3.0, 2.0)] {
            let v = conjugate_momentum_field(&d, &f, p).unwrap();
            assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
        }

        let theta = 1.3;
        let vac = witten_charges(1, 1, theta, &c);
        for r in [0.7, 2.0, 9.0] {
            let v = conjugate_momentum_field(&vac, &f, PlanePoint::new(r, 0.0)).unwrap();
            assert!((v[0].hypot(v[1]) - theta / (TAU * r)).abs() < 1e-12);
        }
        let v = conjugate_momentum_field(
            &witten_charges(1, 1, 0.0, &c),
            &f,
            PlanePoint::new(2.0, 0.0),
        )
        .unwrap();
        assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
    }

    #[test]
    fn loop_integral_examples() {
        let theta = PI / 3.0;
        let once = PlanePath::circle(ORIGIN, 1.0, 1, 64).unwrap();
        let v = line_integral(beta(theta), &once, once.default_step()).unwrap();
        assert!((v - theta).abs() < 1e-10, "{v}");

        let away = PlanePath::circle(PlanePoint::new(3.0, 1.0), 1.0, 1, 64).unwrap();
        let v = line_integral(beta(theta), &away, away.default_step()).unwrap();
        assert!(v.abs() < 1e-10, "{v}");

        let twice = PlanePath::circle(ORIGIN, 1.0, 2, 64).unwrap();
        let v = line_integral(beta(theta), &twice, twice.default_step()).unwrap();
        let analytic = twice.azimuth_change() * theta / TAU;
        assert!((v - 2.0 * theta).abs() < 1e-10);
        assert!((v - analytic).abs() < 1e-10);
    }

    #[test]
    fn winding_examples() {
        let ccw = PlanePath::circle(ORIGIN, 1.0, 1, 32).unwrap();
        assert_eq!(winding_number(&ccw).unwrap(), 1);
        let cw2 = PlanePath::circle(ORIGIN, 1.0, -2, 32).unwrap();
        assert_eq!(winding_number(&cw2).unwrap(), -2);
        let away = PlanePath::circle(PlanePoint::new(5.0, 0.0), 1.0, 1, 32).unwrap();
        assert_eq!(winding_number(&away).unwrap(), 0);

        let open =
            PlanePath::open(vec![PlanePoint::new(1.0, 0.0), PlanePoint::new(0.0, 1.0)]).unwrap();
        assert!(matches!(winding_number(&open), Err(Error::OpenPath)));
    }

    #[test]
    fn path_validation() {
        // straight through the axis: jump of exactly pi
        let through = PlanePath::open(vec![PlanePoint::new(-1.0, 0.0), PlanePoint::new(1.0, 0.0)]);
        assert!(matches!(through, Err(Error::CoarsePath { .. })));
        let not_closed = PlanePath::closed(vec![
            PlanePoint::new(1.0, 0.0),
            PlanePoint::new(0.0, 1.0),
            PlanePoint::new(-1.0, 0.1),
        ]);
        assert!(not_closed.is_err());
        assert!(PlanePath::open(vec![PlanePoint::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn path_entering_tube_is_an_error() {
        let c = PhysicalConstants::default();
        let f = FluxTube::flux_quanta(0.5, &c).unwrap();
        let d = witten_charges(1, 1, 1.0, &c);
        let path =
            PlanePath::open(vec![PlanePoint::new(-1.0, 0.2), PlanePoint::new(1.0, 0.2)]).unwrap();
        let r = line_integral(|p| conjugate_momentum_field(&d, &f, p), &path, 0.01);
        assert!(matches!(r, Err(Error::InsideTube { .. })));
    }

    #[test]
    fn csv_import() {
        let data = "x,y\n1,0\n0,1\n-1,0\n0,-1\n1,0\n";
        let path = PlanePath::from_csv(data.as_bytes(), true).unwrap();
        assert_eq!(path.points().len(), 5);
        assert_eq!(winding_number(&path).unwrap(), 1);
        let v = line_integral(beta(2.0), &path, path.default_step()).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn concatenation_is_additive() {
        let a = PlanePath::open(vec![
            PlanePoint::new(2.0, 0.0),
            PlanePoint::new(0.0, 2.0),
            PlanePoint::new(-2.0, 0.5),
        ])
        .unwrap();
        let b = PlanePath::open(vec![
            PlanePoint::new(-2.0, 0.5),
            PlanePoint::new(0.5, -2.0),
            PlanePoint::new(2.0, 0.0),
        ])
        .unwrap();
        let ab = a.concat(&b).unwrap();
        assert!(ab.is_closed());
        let f = beta(0.9);
        let sum = line_integral(&f, &a, 0.05).unwrap() + line_integral(&f, &b, 0.05).unwrap();
        let whole = line_integral(&f, &ab, 0.05).unwrap();
        assert!((sum - whole).abs() < 1e-10);
        assert!((whole - 0.9).abs() < 1e-10);
    }
}
