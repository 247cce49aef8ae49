//! Green function of the free magnetic Schrödinger operator with a
//! homogeneous field `B` in the symmetric gauge, its phase factor, and the
//! regularized diagonal value `ξ(z)`.
//!
//! ```text
//! G₀(x,y;z) = 1/(4π) Φ_B(x,y) Γ(ν) U(ν, 1; |B|/2 |x-y|²),   ν = (|B|-z)/(2|B|)
//! Φ_B(x,y)  = exp[-iB/2 (x₁y₂ - x₂y₁) - |B|/4 |x-y|²]
//! ξ(z)      = -1/(4π) [ψ(ν) + 2 C_E + ln(|B|/2)]
//! ```
//!
//! The `Γ·U` product is combined in log space so that the Γ growth near the
//! Landau levels does not overflow before the product is formed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{self, EULER_GAMMA};

/// Coincident-point threshold: below this separation the log singularity
/// dominates and the caller must use [`xi_homogeneous`] instead.
pub const COINCIDENT_THRESHOLD: f64 = 1e-12;

/// Hard guard (in units of `|B|`) on the distance from `z` to a Landau level.
/// The soft `delta` margin belongs to [`SpectralWindow`]; this floor only
/// converts genuinely ill-conditioned evaluations into diagnosable errors.
pub const HARD_LEVEL_MARGIN: f64 = 1e-9;

/// Default `delta` margin for spectral windows, in units of `|B|`.
pub const DEFAULT_DELTA_FACTOR: f64 = 1e-3;

/// Homogeneous magnetic field in the symmetric gauge
/// `A(x) = (-B x₂/2, B x₁/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticSystem {
    b: f64,
}

impl MagneticSystem {
    pub fn new(b: f64) -> Result<Self> {
        if !(b != 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "field strength B must be finite and nonzero, got {b}"
            )));
        }
        Ok(Self { b })
    }

    /// Signed field strength.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn b_abs(&self) -> f64 {
        self.b.abs()
    }

    /// The m-th Landau level `|B|(2m+1)`, m = 0, 1, 2, ...
    pub fn landau_level(&self, m: usize) -> f64 {
        self.b.abs() * (2.0 * m as f64 + 1.0)
    }

    /// Distance from `z` to the nearest Landau level.
    pub fn distance_to_landau_level(&self, z: f64) -> f64 {
        let b = self.b.abs();
        if z <= b {
            return b - z;
        }
        let m = ((z / b - 1.0) / 2.0).round().max(0.0);
        (z - b * (2.0 * m + 1.0)).abs()
    }

    /// Gamma/digamma argument `ν = (|B| - z) / (2|B|)`.
    pub fn hypergeom_parameter(&self, z: f64) -> f64 {
        (self.b.abs() - z) / (2.0 * self.b.abs())
    }

    /// Reject spectral parameters within the hard margin of a Landau level.
    pub fn check_spectral_parameter(&self, z: f64) -> Result<()> {
        self.check_z(z)
    }

    fn check_z(&self, z: f64) -> Result<()> {
        let margin = HARD_LEVEL_MARGIN * self.b.abs();
        if self.distance_to_landau_level(z) < margin {
            return Err(Error::WindowViolation {
                z,
                z_lo: f64::NEG_INFINITY,
                z_hi: f64::INFINITY,
                delta: margin,
            });
        }
        Ok(())
    }
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x1: f64,
    pub x2: f64,
}

impl PlanePoint {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "plane point coordinates must be finite, got ({x1}, {x2})"
            )));
        }
        Ok(Self { x1, x2 })
    }

    pub fn distance(&self, other: &PlanePoint) -> f64 {
        ((self.x1 - other.x1).powi(2) + (self.x2 - other.x2).powi(2)).sqrt()
    }
}

/// A real interval strictly inside a gap between adjacent Landau levels (or
/// below the lowest), kept at distance `delta` from the levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub z_lo: f64,
    pub z_hi: f64,
    pub delta: f64,
}

impl SpectralWindow {
    pub fn new(z_lo: f64, z_hi: f64, delta: f64, sys: &MagneticSystem) -> Result<Self> {
        if !(z_lo < z_hi) {
            return Err(Error::InvalidArgument(format!(
                "window requires z_lo < z_hi, got [{z_lo}, {z_hi}]"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window margin delta must be positive, got {delta}"
            )));
        }
        let w = Self { z_lo, z_hi, delta };
        // No Landau level inside, and both endpoints at distance >= delta.
        let b = sys.b_abs();
        let mut m = 0usize;
        loop {
            let level = b * (2.0 * m as f64 + 1.0);
            if level > z_hi + delta {
                break;
            }
            if level > z_lo && level < z_hi {
                return Err(Error::InvalidArgument(format!(
                    "Landau level {level} lies inside window [{z_lo}, {z_hi}]"
                )));
            }
            m += 1;
        }
        // The slack absorbs rounding when an endpoint sits at exactly
        // delta from a level, as the standard gap windows do.
        for endpoint in [z_lo, z_hi] {
            if sys.distance_to_landau_level(endpoint) < delta * (1.0 - 1e-9) {
                return Err(Error::InvalidArgument(format!(
                    "window endpoint {endpoint} is within delta = {delta} of a Landau level"
                )));
            }
        }
        Ok(w)
    }

    /// Window with the default margin `1e-3 |B|`.
    pub fn with_default_delta(z_lo: f64, z_hi: f64, sys: &MagneticSystem) -> Result<Self> {
        Self::new(z_lo, z_hi, DEFAULT_DELTA_FACTOR * sys.b_abs(), sys)
    }

    /// The gap below the lowest Landau level: `[-3|B|, |B| - delta]`.
    pub fn below_lowest(sys: &MagneticSystem) -> Result<Self> {
        let b = sys.b_abs();
        let delta = DEFAULT_DELTA_FACTOR * b;
        Self::new(-3.0 * b, b - delta, delta, sys)
    }

    /// The gap between Landau levels `m` and `m+1` (1-based gap index `g`):
    /// `[|B|(2g-1) + delta, |B|(2g+1) - delta]`.
    pub fn gap(g: usize, sys: &MagneticSystem) -> Result<Self> {
        if g == 0 {
            return Self::below_lowest(sys);
        }
        let b = sys.b_abs();
        let delta = DEFAULT_DELTA_FACTOR * b;
        Self::new(
            b * (2.0 * g as f64 - 1.0) + delta,
            b * (2.0 * g as f64 + 1.0) - delta,
            delta,
            sys,
        )
    }

    pub fn contains(&self, z: f64) -> bool {
        z > self.z_lo && z < self.z_hi
    }

    pub fn check(&self, z: f64) -> Result<()> {
        if !self.contains(z) {
            return Err(Error::WindowViolation {
                z,
                z_lo: self.z_lo,
                z_hi: self.z_hi,
                delta: self.delta,
            });
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.z_hi - self.z_lo
    }
}

/// Gauge phase factor `Φ_B(x, y)`; the `|x-y|²` Gaussian damping is folded in.
pub fn phase_factor(x: &PlanePoint, y: &PlanePoint, sys: &MagneticSystem) -> Complex64 {
    let cross = x.x1 * y.x2 - x.x2 * y.x1;
    let r2 = (x.x1 - y.x1).powi(2) + (x.x2 - y.x2).powi(2);
    let modulus = (-sys.b_abs() / 4.0 * r2).exp();
    let angle = -sys.b() / 2.0 * cross;
    Complex64::from_polar(modulus, angle)
}

/// `G₀(x, y; z)` for `x ≠ y` and `z` away from the Landau levels.
pub fn green0(x: &PlanePoint, y: &PlanePoint, sys: &MagneticSystem, z: f64) -> Result<Complex64> {
    let dist = x.distance(y);
    if dist < COINCIDENT_THRESHOLD {
        return Err(Error::CoincidentPoints {
            dist,
            threshold: COINCIDENT_THRESHOLD,
        });
    }
    sys.check_z(z)?;
    let nu = sys.hypergeom_parameter(z);
    let w = sys.b_abs() / 2.0 * dist * dist;
    let u = specfun::tricomi_u_b1(nu, w)?;
    let (ln_g, g_sign) = specfun::ln_gamma_sign(nu)?;
    // Γ(ν) U(ν,1;w) in log space.
    let magnitude = (ln_g + u.abs().ln()).exp();
    let gamma_u = g_sign * u.signum() * magnitude;
    let phase = phase_factor(x, y, sys);
    Ok(phase * gamma_u / (4.0 * std::f64::consts::PI))
}

/// Regularized Green function `ξ(z)`; independent of the potential position
/// for a homogeneous field.
pub fn xi_homogeneous(sys: &MagneticSystem, z: f64) -> Result<f64> {
    sys.check_z(z)?;
    let nu = sys.hypergeom_parameter(z);
    let psi = specfun::digamma(nu)?;
    Ok(-(psi + 2.0 * EULER_GAMMA + (sys.b_abs() / 2.0).ln()) / (4.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn sys1() -> MagneticSystem {
        MagneticSystem::new(1.0).unwrap()
    }

    #[test]
    fn landau_ladder() {
        let sys = MagneticSystem::new(-2.0).unwrap();
        assert_eq!(sys.landau_level(0), 2.0);
        assert_eq!(sys.landau_level(3), 14.0);
        assert!(MagneticSystem::new(0.0).is_err());
    }

    #[test]
    fn window_validation() {
        let sys = sys1();
        assert!(SpectralWindow::with_default_delta(-3.0, 0.9, &sys).is_ok());
        // Landau level 1 inside
        assert!(SpectralWindow::with_default_delta(0.5, 1.5, &sys).is_err());
        // Endpoint too close to level 3
        assert!(SpectralWindow::new(1.1, 3.0 - 1e-6, 1e-3, &sys).is_err());
        assert!(SpectralWindow::new(1.0, 0.5, 1e-3, &sys).is_err());
    }

    #[test]
    fn phase_factor_properties() {
        let sys = sys1();
        let x = PlanePoint::new(0.7, -0.3).unwrap();
        assert_relative_eq!(
            (phase_factor(&x, &x, &sys) - Complex64::new(1.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-14
        );

        let o = PlanePoint::new(0.0, 0.0).unwrap();
        let y = PlanePoint::new(2.0, 0.0).unwrap();
        assert_relative_eq!(
            phase_factor(&o, &y, &sys).norm(),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = PlanePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)).unwrap();
            let y = PlanePoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)).unwrap();
            let fwd = phase_factor(&x, &y, &sys);
            let bwd = phase_factor(&y, &x, &sys);
            assert!((fwd - bwd.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn green0_hermitian_symmetry() {
        let sys = sys1();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let x = PlanePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
            let y = PlanePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
            if x.distance(&y) < 1e-3 {
                continue;
            }
            let z = rng.gen_range(-2.5..0.9);
            let fwd = green0(&x, &y, &sys, z).unwrap();
            let bwd = green0(&y, &x, &sys, z).unwrap();
            assert!(
                (fwd - bwd.conj()).norm() < 1e-10,
                "asymmetry {:e}",
                (fwd - bwd.conj()).norm()
            );
        }
    }

    /// Independent evaluation of G₀ at B=1, z=-1, x=(0,0), y=(1,0):
    /// ν = 1, so Γ(ν) = 1 exactly and U(1,1;w) = ∫₀^∞ e^{-wt}/(1+t) dt, which
    /// the oracle evaluates by oversampled Simpson quadrature.
    #[test]
    fn green0_matches_quadrature_oracle() {
        let sys = sys1();
        let x = PlanePoint::new(0.0, 0.0).unwrap();
        let y = PlanePoint::new(1.0, 0.0).unwrap();
        let w: f64 = 0.5; // |B|/2 |x-y|^2

        // Simpson on t = s/(1-s), 2_000_001 nodes (10x oversampled).
        let f = |s: f64| -> f64 {
            let t = s / (1.0 - s);
            (-w * t).exp() / (1.0 + t) / ((1.0 - s) * (1.0 - s))
        };
        let n = 2_000_001usize;
        let a = 0.0;
        let b = 1.0 - 1e-12;
        let h = (b - a) / (n - 1) as f64;
        let mut u_oracle = f(a) + f(b);
        for i in 1..n - 1 {
            let wgt = if i % 2 == 1 { 4.0 } else { 2.0 };
            u_oracle += wgt * f(a + i as f64 * h);
        }
        u_oracle *= h / 3.0;

        let expected = phase_factor(&x, &y, &sys) * u_oracle / (4.0 * std::f64::consts::PI);
        let got = green0(&x, &y, &sys, -1.0).unwrap();
        assert!(
            (got - expected).norm() / expected.norm() < 1e-7,
            "relative deviation {:e}",
            (got - expected).norm() / expected.norm()
        );
    }

    #[test]
    fn diagonal_regularization_limit() {
        let sys = sys1();
        let z = -1.0;
        let xi = xi_homogeneous(&sys, z).unwrap();
        let o = PlanePoint::new(0.3, -0.2).unwrap();
        let reg = |r: f64| -> f64 {
            let y = PlanePoint::new(o.x1 + r, o.x2).unwrap();
            let g = green0(&o, &y, &sys, z).unwrap();
            g.re + (r.ln()) / (2.0 * std::f64::consts::PI)
        };
        let f3 = reg(1e-3);
        let f4 = reg(1e-4);
        // Error of the truncated limit behaves like r^2 ln r; the r-ratio of 10
        // suppresses it by ~100x, so the Richardson combination removes the bulk.
        let extrapolated = (100.0 * f4 - f3) / 99.0;
        assert!(
            (extrapolated - xi).abs() < 1e-4,
            "extrapolated {extrapolated}, xi {xi}"
        );
        // Monotone approach along r = 1e-2, 1e-3, 1e-4.
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&r| (reg(r) - xi).abs()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "errors {errs:?}");
    }

    #[test]
    fn xi_values() {
        let sys = sys1();
        // -(1/4π)[ψ(1) + 2 C_E + ln(1/2)]
        let expected = -(-EULER_GAMMA + 2.0 * EULER_GAMMA + 0.5f64.ln())
            / (4.0 * std::f64::consts::PI);
        assert_relative_eq!(
            xi_homogeneous(&sys, -1.0).unwrap(),
            expected,
            max_relative = 1e-12
        );
        assert!((expected - 0.00922).abs() < 1e-5);

        // ψ pole at argument 0: ψ(ν) → -∞ as z → |B|⁻, hence ξ → +∞.
        let near = xi_homogeneous(&sys, 1.0 - 1e-6).unwrap();
        assert!(near > 10.0, "xi near the level: {near}");

        // No point argument: identical (B, z) must give identical values.
        assert_eq!(
            xi_homogeneous(&sys, -0.5).unwrap(),
            xi_homogeneous(&sys, -0.5).unwrap()
        );
    }

    #[test]
    fn rotational_modulus_invariance() {
        let sys = sys1();
        let z = -2.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let x = PlanePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
            let y = PlanePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
            if x.distance(&y) < 1e-2 {
                continue;
            }
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let rot = |p: &PlanePoint| {
                PlanePoint::new(
                    p.x1 * phi.cos() - p.x2 * phi.sin(),
                    p.x1 * phi.sin() + p.x2 * phi.cos(),
                )
                .unwrap()
            };
            let g = green0(&x, &y, &sys, z).unwrap();
            let gr = green0(&rot(&x), &rot(&y), &sys, z).unwrap();
            assert!(
                (g.norm() - gr.norm()).abs() < 1e-10,
                "modulus changed by {:e}",
                (g.norm() - gr.norm()).abs()
            );
        }
    }

    #[test]
    fn landau_pole_blowup() {
        let sys = sys1();
        let x = PlanePoint::new(0.0, 0.0).unwrap();
        let y = PlanePoint::new(0.5, 0.0).unwrap();
        let g_far = green0(&x, &y, &sys, 1.0 - 1e-2).unwrap().norm();
        let g_near = green0(&x, &y, &sys, 1.0 - 1e-4).unwrap().norm();
        assert!(g_near / g_far >= 10.0, "ratio {}", g_near / g_far);
    }

    #[test]
    fn green0_errors() {
        let sys = sys1();
        let x = PlanePoint::new(0.0, 0.0).unwrap();
        let y = PlanePoint::new(1e-13, 0.0).unwrap();
        assert!(matches!(
            green0(&x, &x, &sys, -1.0),
            Err(Error::CoincidentPoints { .. })
        ));
        assert!(matches!(
            green0(&x, &y, &sys, -1.0),
            Err(Error::CoincidentPoints { .. })
        ));
        let far = PlanePoint::new(1.0, 0.0).unwrap();
        assert!(matches!(
            green0(&x, &far, &sys, 1.0 + 1e-12),
            Err(Error::WindowViolation { .. })
        ));
    }
}
