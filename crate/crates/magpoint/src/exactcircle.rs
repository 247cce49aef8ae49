//! Exact reference for the uniform circle measure: the per-mode
//! Birman-Schwinger condition `α = c_l(z)`, where `c_l` is the `l`-th Fourier
//! coefficient of the Green kernel restricted to the circle.
//!
//! The kernel at angular separation `θ` splits as
//!
//! ```text
//! K(θ) = a(θ) ln(2R |sin(θ/2)|) + b(θ)
//! a(θ) = -1/(2π) Φ(θ) M(ν, 1; w(θ))
//! b(θ) = -1/(4π) Φ(θ) [M(ν, 1; w) ln(|B|/2) + D(w)]
//! ```
//!
//! with `M` the regular Kummer series, `D` its digamma-weighted companion and
//! `w(θ) = |B|/2 (2R sin(θ/2))²`. Both `a` and `b` are smooth and periodic, so
//! their Fourier coefficients come out of a plain DFT with spectral accuracy,
//! and the log factor contributes its closed-form coefficients
//! (`-1/(2|m|)` for `m ≠ 0`) through a convolution. This restores spectral
//! accuracy despite the integrable log singularity at `θ = 0`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{green0, MagneticSystem, PlanePoint, SpectralWindow};
use crate::pointop::{coupling_alpha_for_circle, EigenvalueRecord};
use crate::specfun::{self, EULER_GAMMA};

/// Grid resolution used by the per-mode root scan.
pub const EXACT_GRID_POINTS: usize = 400;

/// Angular guard around the kernel's coincidence singularity.
pub const THETA_GUARD: f64 = 1e-9;

/// The uniform circle measure problem: radius `R`, coupling function value
/// `γ`, normalized-measure coupling `α = 1/(2πRγ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleMeasureProblem {
    pub sys: MagneticSystem,
    pub radius: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub quadrature_order: usize,
}

impl CircleMeasureProblem {
    pub fn new(
        sys: MagneticSystem,
        radius: f64,
        gamma: f64,
        quadrature_order: usize,
    ) -> Result<Self> {
        if quadrature_order < 256 || !quadrature_order.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "quadrature_order must be a power of two >= 256, got {quadrature_order}"
            )));
        }
        let alpha = coupling_alpha_for_circle(radius, gamma)?;
        Ok(Self {
            sys,
            radius,
            gamma,
            alpha,
            quadrature_order,
        })
    }

    pub fn with_default_order(sys: MagneticSystem, radius: f64, gamma: f64) -> Result<Self> {
        Self::new(sys, radius, gamma, 2048)
    }

    fn point_at(&self, theta: f64) -> PlanePoint {
        PlanePoint::new(self.radius * theta.cos(), self.radius * theta.sin()).unwrap()
    }
}

/// One Fourier coefficient of the circle-restricted kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficient {
    pub l: i64,
    pub z: f64,
    pub c_l: f64,
}

/// Kernel value `G₀(p(0), p(θ); z)` between circle points at angular
/// separation `θ ∈ (0, 2π)`.
pub fn circle_kernel(theta: f64, prob: &CircleMeasureProblem, z: f64) -> Result<Complex64> {
    if !(THETA_GUARD..=std::f64::consts::TAU - THETA_GUARD).contains(&theta) {
        return Err(Error::CoincidentPoints {
            dist: 2.0 * prob.radius * (theta.min(std::f64::consts::TAU - theta) / 2.0).sin().abs(),
            threshold: THETA_GUARD,
        });
    }
    green0(&prob.point_at(0.0), &prob.point_at(theta), &prob.sys, z)
}

/// Regular Kummer series `M(ν, 1; w)` and the companion
/// `D(w) = Σ_k (ν)_k w^k/(k!)² (ψ(ν+k) - 2ψ(k+1))`, which together give
/// `Γ(ν) U(ν, 1; w) = -[M ln w + D]`.
fn kummer_m_and_companion(nu: f64, w: f64, max_terms: usize) -> Result<(f64, f64)> {
    let mut coef = 1.0;
    let mut psi_a = specfun::digamma(nu)?;
    let mut psi_k = -EULER_GAMMA;
    let mut m_sum = 0.0;
    let mut d_sum = 0.0;
    for k in 0..max_terms {
        m_sum += coef;
        d_sum += coef * (psi_a - 2.0 * psi_k);
        let kf = k as f64;
        if kf > w.sqrt() * 2.0 + 4.0 && coef.abs() * (1.0 + psi_a.abs()) <= 1e-16 * (m_sum.abs() + d_sum.abs() + 1.0) {
            return Ok((m_sum, d_sum));
        }
        coef *= (nu + kf) * w / ((kf + 1.0) * (kf + 1.0));
        psi_a += 1.0 / (nu + kf);
        psi_k += 1.0 / (kf + 1.0);
    }
    Err(Error::NonConvergence {
        what: "Kummer series for the circle kernel split",
        target: 1e-16,
        limit: max_terms,
    })
}

/// Fourier data of the circle kernel at a fixed `z`: DFT coefficients of the
/// smooth factors `a(θ)` and `b(θ)` of the log split. Build once per `z` and
/// query any mode `l`.
#[derive(Debug, Clone)]
pub struct CircleKernelTransform {
    order: usize,
    radius: f64,
    a_hat: Vec<Complex64>,
    b_hat: Vec<Complex64>,
}

impl CircleKernelTransform {
    /// Assemble from raw samples of the smooth factors at `θ_j = 2πj/Q`.
    pub fn from_samples(
        a_samples: Vec<Complex64>,
        b_samples: Vec<Complex64>,
        radius: f64,
    ) -> Result<Self> {
        let order = a_samples.len();
        if order != b_samples.len() || order < 256 || !order.is_power_of_two() {
            return Err(Error::InvalidArgument(
                "sample vectors must share a power-of-two length >= 256".into(),
            ));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(order);
        let mut a_hat = a_samples;
        let mut b_hat = b_samples;
        fft.process(&mut a_hat);
        fft.process(&mut b_hat);
        let scale = 1.0 / order as f64;
        for v in a_hat.iter_mut().chain(b_hat.iter_mut()) {
            *v *= scale;
        }
        Ok(Self {
            order,
            radius,
            a_hat,
            b_hat,
        })
    }

    /// Sample the kernel split for a circle problem at spectral parameter `z`.
    pub fn new(prob: &CircleMeasureProblem, z: f64) -> Result<Self> {
        prob.sys.check_spectral_parameter(z)?;
        let q = prob.quadrature_order;
        let sys = &prob.sys;
        let b_abs = sys.b_abs();
        let nu = sys.hypergeom_parameter(z);
        let ln_half_b = (b_abs / 2.0).ln();
        let r = prob.radius;
        let four_pi = 4.0 * std::f64::consts::PI;
        let mut a_samples = Vec::with_capacity(q);
        let mut b_samples = Vec::with_capacity(q);
        for j in 0..q {
            let theta = std::f64::consts::TAU * j as f64 / q as f64;
            let chord = 2.0 * r * (theta / 2.0).sin().abs();
            let w = b_abs / 2.0 * chord * chord;
            let phi = Complex64::from_polar(
                (-w / 2.0).exp(),
                -sys.b() * r * r * theta.sin() / 2.0,
            );
            let (m, d) = kummer_m_and_companion(nu, w, 512)?;
            a_samples.push(-phi * m / (2.0 * std::f64::consts::PI));
            b_samples.push(-phi * (m * ln_half_b + d) / four_pi);
        }
        Self::from_samples(a_samples, b_samples, r)
    }

    fn hat(v: &[Complex64], p: i64) -> Complex64 {
        let q = v.len() as i64;
        if p < -q / 2 || p >= q / 2 {
            return Complex64::default();
        }
        v[p.rem_euclid(q) as usize]
    }

    /// Complex value of the mode-`l` coefficient (imaginary part is a
    /// numerical residue; the Hermitian kernel makes the exact value real).
    pub fn coefficient_complex(&self, l: i64) -> Result<Complex64> {
        if l.unsigned_abs() as usize > self.order / 8 {
            return Err(Error::Aliasing {
                l,
                order: self.order,
            });
        }
        // c_l = ln R * â_l + Σ_{m≠0} (-1/(2|m|)) â_{l-m} + b̂_l
        let mut c = self.radius.ln() * Self::hat(&self.a_hat, l) + Self::hat(&self.b_hat, l);
        let q = self.order as i64;
        for p in -q / 2..q / 2 {
            let m = l - p;
            if m == 0 {
                continue;
            }
            c -= Self::hat(&self.a_hat, p) / (2.0 * m.abs() as f64);
        }
        Ok(c)
    }

    pub fn coefficient(&self, l: i64, z: f64) -> Result<ModeCoefficient> {
        let c = self.coefficient_complex(l)?;
        Ok(ModeCoefficient { l, z, c_l: c.re })
    }
}

/// `c_l(z)`, the `l`-th Fourier coefficient of the circle-restricted kernel.
pub fn fourier_mode_coefficient(
    l: i64,
    prob: &CircleMeasureProblem,
    z: f64,
) -> Result<ModeCoefficient> {
    CircleKernelTransform::new(prob, z)?.coefficient(l, z)
}

/// Locate the roots of `f_l(z) = α - c_l(z)` for `l ∈ [-l_range, l_range]` in
/// the window, by grid scan plus bisection. Records carry the angular
/// momentum `l` as their branch label; output sorted ascending in `z`.
pub fn exact_circle_eigenvalues(
    prob: &CircleMeasureProblem,
    window: &SpectralWindow,
    l_range: i64,
    tol: f64,
) -> Result<Vec<EigenvalueRecord>> {
    if l_range < 1 {
        return Err(Error::InvalidArgument(format!(
            "l_range must be >= 1, got {l_range}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid_points = EXACT_GRID_POINTS;
    let h = window.width() / grid_points as f64;
    let grid: Vec<f64> = (0..=grid_points)
        .map(|i| window.z_lo + i as f64 * h)
        .collect();
    let modes: Vec<i64> = (-l_range..=l_range).collect();
    // One transform per grid node serves every mode.
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    for &z in &grid {
        let tf = CircleKernelTransform::new(prob, z)?;
        values.push(
            modes
                .iter()
                .map(|&l| tf.coefficient(l, z).map(|c| prob.alpha - c.c_l))
                .collect::<Result<_>>()?,
        );
    }
    let f_single = |z: f64, mode_idx: usize| -> Result<f64> {
        let tf = CircleKernelTransform::new(prob, z)?;
        Ok(prob.alpha - tf.coefficient(modes[mode_idx], z)?.c_l)
    };

    let mut records = Vec::new();
    for (mi, &l) in modes.iter().enumerate() {
        for i in 0..grid_points {
            let (f_lo, f_hi) = (values[i][mi], values[i + 1][mi]);
            if f_lo == 0.0 {
                records.push(EigenvalueRecord {
                    z: grid[i],
                    branch: l,
                    n_points: 0,
                    bracket: (grid[i], grid[i]),
                    residual: 0.0,
                });
                continue;
            }
            if f_lo * f_hi < 0.0 {
                let (mut lo, mut hi, mut fl) = (grid[i], grid[i + 1], f_lo);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let fm = f_single(mid, mi)?;
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fl * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        fl = fm;
                    }
                }
                let z_root = 0.5 * (lo + hi);
                records.push(EigenvalueRecord {
                    z: z_root,
                    branch: l,
                    n_points: 0,
                    bracket: (lo, hi),
                    residual: f_single(z_root, mi)?.abs(),
                });
            }
        }
    }
    records.sort_by(|a, b| {
        a.z.partial_cmp(&b.z)
            .unwrap()
            .then(a.branch.cmp(&b.branch))
    });
    Ok(records)
}
