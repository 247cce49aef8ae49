use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by all solver modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument hit (or came within the guard radius of) a pole of the
    /// evaluated special function.
    #[error("argument {arg} is within {guard:e} of a pole of {function}")]
    Pole {
        function: &'static str,
        arg: f64,
        guard: f64,
    },

    /// Series or quadrature failed to reach the requested accuracy.
    #[error("{what} did not converge to {target:e} within {limit} terms")]
    NonConvergence {
        what: &'static str,
        target: f64,
        limit: usize,
    },

    /// Green function requested at coincident points; the caller must use the
    /// regularized diagonal value instead.
    #[error("coincident points: |x - y| = {dist:e} below threshold {threshold:e}")]
    CoincidentPoints { dist: f64, threshold: f64 },

    /// Spectral parameter outside the window or too close to a Landau level.
    #[error("z = {z} violates the spectral window [{z_lo}, {z_hi}] (margin {delta:e})")]
    WindowViolation {
        z: f64,
        z_lo: f64,
        z_hi: f64,
        delta: f64,
    },

    /// First row of an allegedly Hermitian circulant matrix failed the
    /// `c_j = conj(c_{N-j})` check.
    #[error("circulant first row violates Hermitian symmetry at index {index}: residual {residual:e}")]
    HermitianViolation { index: usize, residual: f64 },

    /// Fourier mode outside the anti-aliasing margin of the quadrature order.
    #[error("mode l = {l} too large for quadrature order {order} (|l| must be <= order/8)")]
    Aliasing { l: i64, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
