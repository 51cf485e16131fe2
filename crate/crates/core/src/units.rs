//! Charge and flux quanta in natural units (hbar = c = 1, alpha = e^2).
//!
//! Every phase in the crate is a pure number of radians: `q * phi_m` and
//! `g * phi_e` are dimensionless once hbar*c is set to one.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Measured fine-structure constant.
pub const ALPHA_DEFAULT: f64 = 1.0 / 137.035999084;

/// Exact test fixture: `e = 1/2`, `g0 = 1`.
pub const ALPHA_QUARTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub alpha: f64,
    /// Electric charge quantum, `sqrt(alpha)`.
    pub e: f64,
    /// Magnetic charge quantum, `e / (2 alpha)`.
    pub g0: f64,
    /// Magnetic flux quantum, `2 pi / e`.
    pub phi_m0: f64,
    /// Electric flux quantum, `2 pi / g0`.
    pub phi_e0: f64,
}

impl PhysicalConstants {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let e = alpha.sqrt();
        let g0 = e / (2.0 * alpha);
        Ok(Self {
            alpha,
            e,
            g0,
            phi_m0: TAU / e,
            phi_e0: TAU / g0,
        })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::new(ALPHA_DEFAULT).expect("default alpha is positive")
    }
}

/// Alias kept for call sites that read better as a verb.
pub fn make_constants(alpha: f64) -> Result<PhysicalConstants> {
    PhysicalConstants::new(alpha)
}

/// Integer labels a charge was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeQuanta {
    pub n_q: i64,
    pub n_g: i64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyonCharge {
    /// Electric charge.
    pub q: f64,
    /// Magnetic charge.
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quanta: Option<ChargeQuanta>,
}

impl DyonCharge {
    pub fn new(q: f64, g: f64) -> Self {
        Self { q, g, quanta: None }
    }
}

/// Charges obeying the theta-shifted quantisation rules
/// `q = n_q e + n_g e theta / 2pi`, `g = n_g g0`.
pub fn witten_charges(n_q: i64, n_g: i64, theta: f64, consts: &PhysicalConstants) -> DyonCharge {
    let q = n_q as f64 * consts.e + n_g as f64 * consts.e * theta / TAU;
    DyonCharge {
        q,
        g: n_g as f64 * consts.g0,
        quanta: Some(ChargeQuanta { n_q, n_g, theta }),
    }
}

/// Integer labels a flux tube was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxQuanta {
    pub n_phi_e: i64,
    pub n_phi_m: i64,
    pub theta: f64,
}

/// An infinitely long tube carrying magnetic and electric flux along its axis.
///
/// The tube axis is the origin of every plane coordinate handed to
/// [`crate::gauge`]. Potentials are only defined for `r >= radius_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTube {
    pub phi_m: f64,
    pub phi_e: f64,
    pub radius_eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quanta: Option<FluxQuanta>,
}

impl FluxTube {
    pub fn new(phi_m: f64, phi_e: f64, radius_eps: f64) -> Result<Self> {
        check_radius(radius_eps)?;
        Ok(Self {
            phi_m,
            phi_e,
            radius_eps,
            quanta: None,
        })
    }

    /// One magnetic and one electric flux quantum.
    pub fn flux_quanta(radius_eps: f64, consts: &PhysicalConstants) -> Result<Self> {
        Self::new(consts.phi_m0, consts.phi_e0, radius_eps)
    }

    /// Same fluxes with a different exclusion radius.
    pub fn with_radius(&self, radius_eps: f64) -> Result<Self> {
        check_radius(radius_eps)?;
        Ok(Self {
            radius_eps,
            ..*self
        })
    }
}

fn check_radius(radius_eps: f64) -> Result<()> {
    if radius_eps > 0.0 && radius_eps.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "tube radius must be positive, got {radius_eps}"
        )))
    }
}

/// Fluxes from the hypothetical quantisation rules
/// `phi_e = n_phi_e phi_e0 + n_phi_m phi_e0 theta / 2pi`, `phi_m = n_phi_m phi_m0`.
pub fn flux_from_integers(
    n_phi_e: i64,
    n_phi_m: i64,
    theta: f64,
    radius_eps: f64,
    consts: &PhysicalConstants,
) -> Result<FluxTube> {
    check_radius(radius_eps)?;
    let phi_e = n_phi_e as f64 * consts.phi_e0 + n_phi_m as f64 * consts.phi_e0 * theta / TAU;
    Ok(FluxTube {
        phi_m: n_phi_m as f64 * consts.phi_m0,
        phi_e,
        radius_eps,
        quanta: Some(FluxQuanta {
            n_phi_e,
            n_phi_m,
            theta,
        }),
    })
}

/// `q1 g2 - q2 g1`, in units where the quantisation condition reads `N / 2`.
pub fn sz_pairing(d1: &DyonCharge, d2: &DyonCharge) -> f64 {
    d1.q * d2.g - d2.q * d1.g
}

/// Outcome of testing a pairing against `N / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SzOutcome {
    Quantised { n: i64 },
    Violation { pairing: f64, nearest_n: i64 },
}

impl SzOutcome {
    pub fn is_quantised(&self) -> bool {
        matches!(self, SzOutcome::Quantised { .. })
    }
}

pub const SZ_TOLERANCE: f64 = 1e-9;

pub fn sz_check(d1: &DyonCharge, d2: &DyonCharge) -> SzOutcome {
    let pairing = sz_pairing(d1, d2);
    let twice = 2.0 * pairing;
    let nearest = twice.round();
    if (pairing - nearest / 2.0).abs() <= SZ_TOLERANCE {
        SzOutcome::Quantised { n: nearest as i64 }
    } else {
        SzOutcome::Violation {
            pairing,
            nearest_n: nearest as i64,
        }
    }
}

/// SO(2) duality rotation of the charge and flux doublets.
///
/// `q' = q cos xi + g sin xi`, `g' = -q sin xi + g cos xi`, and the fluxes
/// rotate as `(phi_e, phi_m)` with the same matrix, so `q phi_m - g phi_e` is
/// invariant. Integer labels do not survive a generic rotation and are dropped.
pub fn duality_rotate(d: &DyonCharge, f: &FluxTube, xi: f64) -> (DyonCharge, FluxTube) {
    let (s, c) = quarter_exact_sin_cos(xi);
    let d2 = DyonCharge::new(d.q * c + d.g * s, -d.q * s + d.g * c);
    let f2 = FluxTube {
        phi_e: f.phi_e * c + f.phi_m * s,
        phi_m: -f.phi_e * s + f.phi_m * c,
        radius_eps: f.radius_eps,
        quanta: None,
    };
    (d2, f2)
}

// sin/cos that return exact 0 and +-1 at multiples of pi/2, so quarter
// rotations permute the doublets without round-off residue.
fn quarter_exact_sin_cos(x: f64) -> (f64, f64) {
    let quarters = x / (PI / 2.0);
    let k = quarters.round();
    if (quarters - k).abs() < 1e-15 {
        match (k as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        x.sin_cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> PhysicalConstants {
        PhysicalConstants::new(ALPHA_QUARTER).unwrap()
    }

    #[test]
    fn quarter_alpha_fixture() {
        let c = quarter();
        assert_eq!(c.e, 0.5);
        assert_eq!(c.g0, 1.0);
        assert!((c.phi_m0 - 4.0 * PI).abs() < 1e-15);
        assert!((c.phi_e0 - TAU).abs() < 1e-15);
    }

    #[test]
    fn measured_alpha_charge() {
        let c = PhysicalConstants::default();
        // sqrt(1/137.035999084) to 30 digits via mpmath: 0.0854245431318412202679...
        assert!((c.e - 0.085_424_543_131_841_22).abs() < 1e-15);
        assert!((c.e * c.g0 - 0.5).abs() < 1e-15);
        assert!((c.e * c.phi_m0 - TAU).abs() < 1e-13);
        assert!((c.g0 * c.phi_e0 - TAU).abs() < 1e-13);
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        assert!(PhysicalConstants::new(0.0).is_err());
        assert!(PhysicalConstants::new(-1.0).is_err());
        assert!(PhysicalConstants::new(f64::NAN).is_err());
    }

    #[test]
    fn witten_examples() {
        let c = quarter();
        let d = witten_charges(1, 0, 2.7, &c);
        assert_eq!((d.q, d.g), (c.e, 0.0));

        let d = witten_charges(0, 1, PI, &c);
        assert!((d.q - c.e / 2.0).abs() < 1e-15);
        assert_eq!(d.g, c.g0);

        let a = witten_charges(1, 1, TAU, &c);
        let b = witten_charges(2, 1, 0.0, &c);
        assert!((a.q - b.q).abs() < 1e-15);
        assert_eq!(a.g, b.g);
    }

    #[test]
    fn sz_examples() {
        let c = PhysicalConstants::default();
        let electric = DyonCharge::new(c.e, 0.0);
        let magnetic = DyonCharge::new(0.0, c.g0);
        assert!((sz_pairing(&electric, &magnetic) - 0.5).abs() < 1e-15);
        assert_eq!(
            sz_check(&electric, &magnetic),
            SzOutcome::Quantised { n: 1 }
        );
        assert_eq!(
            sz_check(&electric, &electric),
            SzOutcome::Quantised { n: 0 }
        );

        for theta in [0.0, 0.3, 1.0, PI, 5.5, -2.0] {
            let d1 = witten_charges(1, 1, theta, &c);
            let d2 = witten_charges(0, 1, theta, &c);
            assert!((sz_pairing(&d1, &d2) - 0.5).abs() < 1e-12);
        }

        let off = DyonCharge::new(0.0, 0.3 * c.g0);
        assert!(!sz_check(&electric, &off).is_quantised());
    }

    #[test]
    fn duality_quarter_turn() {
        let d = DyonCharge::new(1.5, -0.25);
        let f = FluxTube::new(3.0, 7.0, 1.0).unwrap();
        let (d2, f2) = duality_rotate(&d, &f, PI / 2.0);
        assert_eq!((d2.q, d2.g), (d.g, -d.q));
        assert_eq!((f2.phi_e, f2.phi_m), (f.phi_m, -f.phi_e));

        let (d0, f0) = duality_rotate(&d, &f, 0.0);
        assert_eq!(
            (d0.q, d0.g, f0.phi_e, f0.phi_m),
            (d.q, d.g, f.phi_e, f.phi_m)
        );
    }

    #[test]
    fn flux_rule_examples() {
        let c = quarter();
        let f = flux_from_integers(0, 1, 0.0, 1.0, &c).unwrap();
        assert_eq!((f.phi_e, f.phi_m), (0.0, c.phi_m0));

        let f = flux_from_integers(1, 1, PI, 1.0, &c).unwrap();
        assert!((f.phi_e - 1.5 * c.phi_e0).abs() < 1e-14);
        assert_eq!(f.phi_m, c.phi_m0);

        for theta in [0.0, 1.0, 4.0] {
            let f = flux_from_integers(1, 0, theta, 1.0, &c).unwrap();
            assert_eq!((f.phi_e, f.phi_m), (c.phi_e0, 0.0));
        }

        assert!(flux_from_integers(1, 0, 0.0, 0.0, &c).is_err());
        assert!(FluxTube::new(1.0, 1.0, -1.0).is_err());
    }
}
