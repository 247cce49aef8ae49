//! Point-potential side of the solver: site generation, assembly of the
//! Krein matrix `Λ_{Y,α}(z)`, eigenvalue branches (circulant fast path and
//! dense fall-back), gap scanning, and the Schur-Holmgren invertibility
//! diagnostic.
//!
//! For `N` sites placed equidistantly on a circle, `Λ(z)` is a Hermitian
//! circulant matrix; its eigenvalue branches `λ_k(z)` follow from a DFT of the
//! first row, and eigenvalues of the point-potential operator are the zeros
//! `λ_k(z) = 0` in a spectral gap. The branch label `k` is chosen so that
//! `λ_k(z)/N → α - c_k(z)` with `c_l` the angular-momentum coefficient of the
//! exact circle problem.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{green0, xi_homogeneous, MagneticSystem, PlanePoint, SpectralWindow};

/// Minimum allowed pairwise site distance.
pub const MIN_SITE_DISTANCE: f64 = 1e-9;

/// Tolerance for the Hermitian-circulant first-row precondition.
pub const HERMITIAN_ROW_TOL: f64 = 1e-10;

/// Metadata carried by circle-generated configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleMeta {
    pub radius: f64,
    pub equidistant: bool,
}

/// A finite set of potential sites `Y` with the coupling datum `α`
/// (each site carries the value `α |Y|` on the Λ diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub sites: Vec<PlanePoint>,
    pub alpha: f64,
    pub circle_meta: Option<CircleMeta>,
}

impl PointConfiguration {
    pub fn new(
        sites: Vec<PlanePoint>,
        alpha: f64,
        circle_meta: Option<CircleMeta>,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("at least one site required".into()));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling alpha must be positive, got {alpha}"
            )));
        }
        if let Some(meta) = &circle_meta {
            if meta.equidistant {
                // Adjacent chord is the minimum pairwise distance.
                let n = sites.len();
                if n > 1 {
                    let chord =
                        2.0 * meta.radius * (std::f64::consts::PI / n as f64).sin();
                    if chord <= MIN_SITE_DISTANCE {
                        return Err(Error::InvalidArgument(format!(
                            "adjacent chord {chord:e} below minimum site distance"
                        )));
                    }
                }
            }
        } else {
            for i in 0..sites.len() {
                for j in i + 1..sites.len() {
                    let d = sites[i].distance(&sites[j]);
                    if d <= MIN_SITE_DISTANCE {
                        return Err(Error::InvalidArgument(format!(
                            "sites {i} and {j} are {d:e} apart (minimum {MIN_SITE_DISTANCE:e})"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            sites,
            alpha,
            circle_meta,
        })
    }

    /// `N` sites equidistant on the radius-`R` circle, with coupling `alpha`.
    pub fn equidistant_circle(radius: f64, n: usize, alpha: f64) -> Result<Self> {
        let sites = equidistant_circle_points(radius, n)?;
        Self::new(
            sites,
            alpha,
            Some(CircleMeta {
                radius,
                equidistant: true,
            }),
        )
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    fn is_equidistant_circle(&self) -> bool {
        matches!(self.circle_meta, Some(CircleMeta { equidistant: true, .. }))
    }
}

/// Site `j` at angle `2πj/N` on the radius-`R` circle, `j = 0 … N-1`.
pub fn equidistant_circle_points(radius: f64, n: usize) -> Result<Vec<PlanePoint>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / n as f64;
            PlanePoint::new(radius * theta.cos(), radius * theta.sin())
        })
        .collect()
}

/// Normalized-measure coupling for the uniform circle: `α = 1/(2πRγ)`, so that
/// the Λ diagonal `|Y|α - ξ` carries the per-site value `N/(2πRγ)`.
pub fn coupling_alpha_for_circle(radius: f64, gamma: f64) -> Result<f64> {
    if !(radius > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius and gamma must be positive, got R = {radius}, gamma = {gamma}"
        )));
    }
    Ok(1.0 / (std::f64::consts::TAU * radius * gamma))
}

/// The `|Y| × |Y|` Hermitian matrix `Λ_{Y,α}(z)` at fixed real `z`.
///
/// `Λ[y][y] = |Y| α - ξ(z)`, `Λ[y][y'] = -G₀(y, y'; z)` off the diagonal.
/// For equidistant circle configurations only the first row is stored.
#[derive(Debug, Clone)]
pub struct KreinMatrix {
    pub size: usize,
    pub z: f64,
    pub is_circulant: bool,
    pub first_row: Option<Vec<Complex64>>,
    dense: Option<DMatrix<Complex64>>,
}

impl KreinMatrix {
    /// Dense entries; expands the first row when on the circulant path.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        if let Some(dense) = &self.dense {
            return dense.clone();
        }
        let row = self.first_row.as_ref().expect("circulant without first row");
        let n = self.size;
        DMatrix::from_fn(n, n, |p, q| row[(q + n - p) % n])
    }

    /// All eigenvalues, ascending. Circulant path goes through the DFT;
    /// the dense path uses a Hermitian eigensolver.
    pub fn eigenvalues_sorted(&self) -> Result<Vec<f64>> {
        let mut ev = if let Some(row) = &self.first_row {
            circulant_eigenvalues(row)?
        } else {
            dense_hermitian_eigenvalues(self.dense.as_ref().unwrap())
        };
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(ev)
    }

    /// Eigenvalue branches in label order: `λ_k` by DFT index on the circulant
    /// path, sorted spectrum on the dense path.
    pub fn branch_values(&self) -> Result<Vec<f64>> {
        if let Some(row) = &self.first_row {
            circulant_eigenvalues(row)
        } else {
            Ok(dense_hermitian_eigenvalues_sorted(
                self.dense.as_ref().unwrap(),
            ))
        }
    }
}

/// Assemble `Λ_{Y,α}(z)`. The circulant fast path computes `N` Green
/// evaluations instead of `N²`.
pub fn assemble_lambda(
    conf: &PointConfiguration,
    sys: &MagneticSystem,
    z: f64,
) -> Result<KreinMatrix> {
    let n = conf.len();
    let diag = Complex64::new(n as f64 * conf.alpha - xi_homogeneous(sys, z)?, 0.0);
    if conf.is_equidistant_circle() {
        let mut row = vec![Complex64::default(); n];
        row[0] = diag;
        // Hermitian circulant: row[n-j] = conj(row[j]).
        for j in 1..=n / 2 {
            let g = green0(&conf.sites[0], &conf.sites[j], sys, z)?;
            row[j] = -g;
            if j != n - j {
                row[n - j] = (-g).conj();
            }
        }
        return Ok(KreinMatrix {
            size: n,
            z,
            is_circulant: true,
            first_row: Some(row),
            dense: None,
        });
    }
    let mut m = DMatrix::from_element(n, n, Complex64::default());
    for p in 0..n {
        m[(p, p)] = diag;
        for q in p + 1..n {
            let g = green0(&conf.sites[p], &conf.sites[q], sys, z)?;
            m[(p, q)] = -g;
            m[(q, p)] = (-g).conj();
        }
    }
    Ok(KreinMatrix {
        size: n,
        z,
        is_circulant: false,
        first_row: None,
        dense: Some(m),
    })
}

/// Eigenvalues of a Hermitian circulant matrix from its first row:
/// `λ_k = Σ_j c_j e^{-2πi jk/N}`, `k = 0 … N-1`, in branch order.
///
/// The sign of the exponent labels branch `k` so that it matches the
/// angular-momentum mode `l = k` of the circle problem.
pub fn circulant_eigenvalues(first_row: &[Complex64]) -> Result<Vec<f64>> {
    let n = first_row.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty first row".into()));
    }
    let scale = first_row
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(1.0);
    for j in 1..n {
        let residual = (first_row[j] - first_row[n - j].conj()).norm();
        if residual > HERMITIAN_ROW_TOL * scale {
            return Err(Error::HermitianViolation {
                index: j,
                residual,
            });
        }
    }
    let mut buf: Vec<Complex64> = first_row.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let imag_tol = 1e-9 * scale * n as f64;
    for (k, v) in buf.iter().enumerate() {
        if v.im.abs() > imag_tol {
            return Err(Error::HermitianViolation {
                index: k,
                residual: v.im.abs(),
            });
        }
    }
    Ok(buf.into_iter().map(|v| v.re).collect())
}

fn dense_hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().copied().collect()
}

fn dense_hermitian_eigenvalues_sorted(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev = dense_hermitian_eigenvalues(m);
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// One located eigenvalue of the point-potential operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub z: f64,
    /// Circulant mode `k` (or the exact oracle's angular momentum `l`);
    /// `-1` for dense-scan results.
    pub branch: i64,
    pub n_points: usize,
    pub bracket: (f64, f64),
    pub residual: f64,
}

/// Result of a gap scan: located roots plus non-fatal warnings.
#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub records: Vec<EigenvalueRecord>,
    pub warnings: Vec<String>,
}

/// Scan a spectral window for zeros of the eigenvalue branches of `Λ(z)`.
///
/// Each branch is sampled on a uniform grid; sign changes are refined by
/// bisection to bracket width `< tol`. Output is sorted ascending in `z`,
/// ties broken by branch label.
pub fn scan_gap_for_eigenvalues(
    conf: &PointConfiguration,
    sys: &MagneticSystem,
    window: &SpectralWindow,
    grid_points: usize,
    tol: f64,
) -> Result<ScanOutcome> {
    if grid_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid_points must be >= 16, got {grid_points}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let circulant = conf.is_equidistant_circle();
    let branch_fn = |z: f64| -> Result<Vec<f64>> { assemble_lambda(conf, sys, z)?.branch_values() };
    let single_branch = |z: f64, k: usize| -> Result<f64> { Ok(branch_fn(z)?[k]) };

    let h = window.width() / grid_points as f64;
    let grid: Vec<f64> = (0..=grid_points).map(|i| window.z_lo + i as f64 * h).collect();
    let values: Vec<Vec<f64>> = grid.iter().map(|&z| branch_fn(z)).collect::<Result<_>>()?;
    let n_branches = values[0].len();

    let mut outcome = ScanOutcome::default();
    for k in 0..n_branches {
        let mut cell_roots: Vec<usize> = Vec::new();
        for i in 0..grid_points {
            let (f_lo, f_hi) = (values[i][k], values[i + 1][k]);
            if f_lo == 0.0 {
                outcome.records.push(EigenvalueRecord {
                    z: grid[i],
                    branch: if circulant { k as i64 } else { -1 },
                    n_points: conf.len(),
                    bracket: (grid[i], grid[i]),
                    residual: 0.0,
                });
                cell_roots.push(i);
                continue;
            }
            if f_lo * f_hi < 0.0 {
                let (mut lo, mut hi, mut f_lo) = (grid[i], grid[i + 1], f_lo);
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let f_mid = single_branch(mid, k)?;
                    if f_mid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if f_lo * f_mid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        f_lo = f_mid;
                    }
                }
                let z_root = 0.5 * (lo + hi);
                outcome.records.push(EigenvalueRecord {
                    z: z_root,
                    branch: if circulant { k as i64 } else { -1 },
                    n_points: conf.len(),
                    bracket: (lo, hi),
                    residual: single_branch(z_root, k)?.abs(),
                });
                cell_roots.push(i);
            }
        }
        for pair in cell_roots.windows(2) {
            if pair[1] == pair[0] {
                outcome.warnings.push(format!(
                    "branch {k}: two roots in one grid cell; grid too coarse"
                ));
            }
        }
    }
    outcome.records.sort_by(|a, b| {
        a.z.partial_cmp(&b.z)
            .unwrap()
            .then(a.branch.cmp(&b.branch))
    });
    Ok(outcome)
}

/// Schur-Holmgren row-sum quantity `(1/|Y|) max_x Σ_{y≠x} |G₀(x,y;z)|`,
/// the `α̃` of the approximation theorem's invertibility hypothesis.
pub fn schur_holmgren_bound(
    conf: &PointConfiguration,
    sys: &MagneticSystem,
    z: f64,
) -> Result<f64> {
    let n = conf.len();
    if n == 1 {
        return Ok(0.0);
    }
    if conf.is_equidistant_circle() {
        // All row sums are equal by rotational symmetry.
        let mut sum = 0.0;
        for j in 1..n {
            sum += green0(&conf.sites[0], &conf.sites[j], sys, z)?.norm();
        }
        return Ok(sum / n as f64);
    }
    let mut worst = 0.0f64;
    for p in 0..n {
        let mut sum = 0.0;
        for q in 0..n {
            if q != p {
                sum += green0(&conf.sites[p], &conf.sites[q], sys, z)?.norm();
            }
        }
        worst = worst.max(sum);
    }
    Ok(worst / n as f64)
}
