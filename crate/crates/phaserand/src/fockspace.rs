//! Truncated photon-number-basis operators for partially phase-randomized
//! coherent states.
//!
//! A pulse with coherent amplitude `a` whose optical phase theta follows a
//! Gaussian law g(theta, theta0) of width sigma has density-matrix entries
//!
//! ```text
//! rho[m, n] = e^{-a^2} a^{m+n} <e^{i(m-n)theta}> / sqrt(m! n!),
//! <e^{ik theta}> = exp(-k^2 sigma^2 / 2 + i k theta0).
//! ```
//!
//! The fully randomized (uniform-phase) limit keeps only the diagonal and is
//! provided as an explicit constructor so convergence against the asymptote
//! can be tested exactly. Time-bin qubits occupy a two-mode basis (fast and
//! slow temporal modes) truncated by total photon number.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest truncation supported by the log-factorial table.
pub const MAX_N_MAX: usize = 64;

// ln(n!) for n = 0..=2*MAX_N_MAX, built once.
fn ln_factorial(n: usize) -> f64 {
    debug_assert!(n <= 2 * MAX_N_MAX);
    static TABLE: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 2 * MAX_N_MAX + 1];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n]
}

/// Probability mass of a Poisson(mu) distribution above `n_max`.
///
/// Builders do not renormalize after truncation; their trace falls short of
/// one by exactly this amount.
pub fn poisson_tail_mass(mu: f64, n_max: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let mut kept = 0.0;
    for k in 0..=n_max {
        kept += (-mu + k as f64 * mu.ln() - ln_factorial(k)).exp();
    }
    (1.0 - kept).max(0.0)
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/* Basis ********************************************************************/

/// Photon-number basis on which an operator is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockBasis {
    /// Single optical mode, photon numbers 0..=n_max.
    SingleMode { n_max: usize },
    /// Fast/slow time-bin pair |f>_F |s>_S truncated by total photon number
    /// f + s <= n_max. States are ordered by total photon number M, then by
    /// the slow-mode occupation s.
    TwoModeTimeBin { n_max: usize },
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        match *self {
            FockBasis::SingleMode { n_max } => n_max + 1,
            FockBasis::TwoModeTimeBin { n_max } => (n_max + 1) * (n_max + 2) / 2,
        }
    }

    pub fn n_max(&self) -> usize {
        match *self {
            FockBasis::SingleMode { n_max } | FockBasis::TwoModeTimeBin { n_max } => n_max,
        }
    }

    /// Flat index of the two-mode state |fast>_F |slow>_S.
    pub fn two_mode_index(fast: usize, slow: usize) -> usize {
        let total = fast + slow;
        total * (total + 1) / 2 + slow
    }

    /// Inverse of [`FockBasis::two_mode_index`]: returns (fast, slow).
    pub fn two_mode_modes(index: usize) -> (usize, usize) {
        let mut total = 0;
        while (total + 1) * (total + 2) / 2 <= index {
            total += 1;
        }
        let slow = index - total * (total + 1) / 2;
        (total - slow, slow)
    }
}

/* Operators ****************************************************************/

/// A complex matrix on a truncated photon-number basis: density matrices,
/// POVM elements, and everything in between.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    basis: FockBasis,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    /// Wrap a matrix, checking that its shape matches the basis dimension.
    pub fn new(basis: FockBasis, matrix: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BasisMismatch(format!(
                "matrix is {}x{}, basis dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                d
            )));
        }
        Ok(FockOperator { basis, matrix })
    }

    pub fn zeros(basis: FockBasis) -> Self {
        let d = basis.dim();
        FockOperator {
            basis,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(basis: FockBasis) -> Self {
        let d = basis.dim();
        FockOperator {
            basis,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// Real part of the trace. All operators handled here are Hermitian, so
    /// the imaginary part is numerical noise.
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entry-wise deviation from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Replace the matrix by its self-adjoint part (A + A†)/2.
    pub fn hermitized(mut self) -> Self {
        let adj = self.matrix.adjoint();
        self.matrix += adj;
        self.matrix *= C64::new(0.5, 0.0);
        self
    }

    /// Eigendecomposition of a Hermitian operator: ascending-sorted real
    /// eigenvalues and the matching unitary of column eigenvectors.
    pub fn eig_hermitian(&self) -> Result<(DVector<f64>, DMatrix<C64>)> {
        crate::linalg::eigh(&self.matrix)
    }

    /// Ascending eigenvalues of a Hermitian operator, without eigenvectors.
    pub fn eigenvalues(&self) -> Result<DVector<f64>> {
        crate::linalg::eigvalsh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn scale(mut self, factor: f64) -> Self {
        self.matrix *= C64::new(factor, 0.0);
        self
    }

    /// Operator product on a shared basis.
    pub fn mul(&self, other: &FockOperator) -> Result<FockOperator> {
        check_same_basis(self, other)?;
        Ok(FockOperator {
            basis: self.basis,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        check_same_basis(self, other)?;
        Ok(FockOperator {
            basis: self.basis,
            matrix: &self.matrix + &other.matrix,
        })
    }
}

fn check_same_basis(a: &FockOperator, b: &FockOperator) -> Result<()> {
    if a.basis != b.basis {
        return Err(Error::BasisMismatch(format!(
            "{:?} vs {:?}",
            a.basis, b.basis
        )));
    }
    Ok(())
}

/* Phase distributions ******************************************************/

/// Law of the optical phase of a pulse (or of the relative phase between
/// adjacent pulses).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseDistribution {
    /// Gaussian with central value theta0 (stored in (-pi, pi]) and standard
    /// deviation sigma >= 0.
    Gaussian { theta0: f64, sigma: f64 },
    /// Fully randomized: uniform on (-pi, pi].
    Uniform,
}

impl PhaseDistribution {
    pub fn gaussian(theta0: f64, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::param(format!("sigma must be >= 0, got {sigma}")));
        }
        if !theta0.is_finite() {
            return Err(Error::param("theta0 must be finite"));
        }
        Ok(PhaseDistribution::Gaussian {
            theta0: wrap_phase(theta0),
            sigma,
        })
    }

    pub fn uniform() -> Self {
        PhaseDistribution::Uniform
    }
}

/// Expectation value <e^{ik theta}> of the phase law.
///
/// For the Gaussian law this is exp(-k^2 sigma^2/2 + i k theta0); for the
/// uniform law it is 1 at k = 0 and 0 otherwise.
pub fn gaussian_phase_factor(k: i64, phase: &PhaseDistribution) -> C64 {
    match *phase {
        PhaseDistribution::Uniform => {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }
        PhaseDistribution::Gaussian { theta0, sigma } => {
            let kf = k as f64;
            let mag = (-0.5 * kf * kf * sigma * sigma).exp();
            C64::from_polar(mag, kf * theta0)
        }
    }
}

/* State builders ***********************************************************/

/// A single-mode partially phase-randomized coherent state to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec {
    /// Coherent amplitude a >= 0; mean photon number of the mode is a^2.
    pub amplitude: f64,
    pub phase: PhaseDistribution,
    /// Photon-number truncation of the basis.
    pub n_max: usize,
}

// Coherent-state amplitude coefficients c_m = e^{-a^2/2} a^m / sqrt(m!),
// evaluated through logs so large m does not overflow.
fn coherent_coefficients(amplitude: f64, n_max: usize) -> Vec<f64> {
    let a2 = amplitude * amplitude;
    (0..=n_max)
        .map(|m| {
            if amplitude == 0.0 {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-0.5 * a2 + m as f64 * amplitude.ln() - 0.5 * ln_factorial(m)).exp()
            }
        })
        .collect()
}

fn check_truncation(n_max: usize) -> Result<()> {
    if n_max < 1 {
        return Err(Error::param("n_max must be >= 1"));
    }
    if n_max > MAX_N_MAX {
        return Err(Error::param(format!("n_max must be <= {MAX_N_MAX}")));
    }
    Ok(())
}

/// Build the single-mode density matrix of `spec`.
///
/// Entries are `c_m c_n <e^{i(m-n)theta}>` with the coherent coefficients
/// `c_m`; the trace equals the truncated Poisson(a^2) mass.
pub fn build_single_mode_state(spec: &StateSpec) -> Result<FockOperator> {
    if !spec.amplitude.is_finite() || spec.amplitude < 0.0 {
        return Err(Error::param(format!(
            "amplitude must be >= 0, got {}",
            spec.amplitude
        )));
    }
    check_truncation(spec.n_max)?;
    let c = coherent_coefficients(spec.amplitude, spec.n_max);
    let d = spec.n_max + 1;
    let mut m = DMatrix::zeros(d, d);
    for row in 0..d {
        for col in 0..d {
            let factor = gaussian_phase_factor(row as i64 - col as i64, &spec.phase);
            m[(row, col)] = factor * (c[row] * c[col]);
        }
    }
    FockOperator::new(FockBasis::SingleMode { n_max: spec.n_max }, m)
}

/// Build the two-mode time-bin state used for Z coding: an equal mixture of
/// (pulse in the fast bin, vacuum in the slow bin) and the reverse, with the
/// pulse phase drawn from `phase`.
pub fn build_rho_z(mu: f64, phase: &PhaseDistribution, n_max: usize) -> Result<FockOperator> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::param(format!("mu must be >= 0, got {mu}")));
    }
    check_truncation(n_max)?;
    let c = coherent_coefficients(mu.sqrt(), n_max);
    let basis = FockBasis::TwoModeTimeBin { n_max };
    let mut m = DMatrix::zeros(basis.dim(), basis.dim());
    for big_m in 0..=n_max {
        for big_n in 0..=n_max {
            let value = gaussian_phase_factor(big_m as i64 - big_n as i64, phase)
                * (0.5 * c[big_m] * c[big_n]);
            // pulse in F, vacuum in S
            m[(
                FockBasis::two_mode_index(big_m, 0),
                FockBasis::two_mode_index(big_n, 0),
            )] += value;
            // vacuum in F, pulse in S
            m[(
                FockBasis::two_mode_index(0, big_m),
                FockBasis::two_mode_index(0, big_n),
            )] += value;
        }
    }
    FockOperator::new(basis, m)
}

// Shared core of the X-coding builders. `total_factor(M - N)` scales the
// coupling between total-photon-number sectors M and N.
fn build_rho_x_with(
    mu: f64,
    n_max: usize,
    total_factor: impl Fn(i64) -> f64,
) -> Result<FockOperator> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::param(format!("mu must be >= 0, got {mu}")));
    }
    check_truncation(n_max)?;
    // d[M][m] = (mu/2)^{M/2} / sqrt((M-m)! m!)
    let half = mu / 2.0;
    let mut d = vec![vec![0.0; n_max + 1]; n_max + 1];
    for (big_m, row) in d.iter_mut().enumerate() {
        for (m, value) in row.iter_mut().enumerate().take(big_m + 1) {
            *value = if half == 0.0 {
                if big_m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (0.5 * big_m as f64 * half.ln()
                    - 0.5 * (ln_factorial(big_m - m) + ln_factorial(m)))
                .exp()
            };
        }
    }
    let basis = FockBasis::TwoModeTimeBin { n_max };
    let mut out = DMatrix::zeros(basis.dim(), basis.dim());
    let norm = 0.5 * (-mu).exp();
    for big_m in 0..=n_max {
        for big_n in 0..=n_max {
            let sector = total_factor(big_m as i64 - big_n as i64);
            if sector == 0.0 {
                continue;
            }
            for m in 0..=big_m {
                for n in 0..=big_n {
                    // 1 + (-1)^{m-n}: 2 when m and n share parity, else 0.
                    if (m + n) % 2 != 0 {
                        continue;
                    }
                    let row = FockBasis::two_mode_index(big_m - m, m);
                    let col = FockBasis::two_mode_index(big_n - n, n);
                    out[(row, col)] +=
                        C64::new(norm * sector * d[big_m][m] * d[big_n][n] * 2.0, 0.0);
                }
            }
        }
    }
    FockOperator::new(basis, out)
}

/// Build the two-mode time-bin state used for X coding: an equal mixture of
/// the two X-basis pulse pairs, with a Gaussian pulse phase of width `sigma`
/// centred at zero (only the relative phase between codings matters).
pub fn build_rho_x(mu: f64, sigma: f64, n_max: usize) -> Result<FockOperator> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::param(format!("sigma must be >= 0, got {sigma}")));
    }
    build_rho_x_with(mu, n_max, |k| {
        (-0.5 * (k * k) as f64 * sigma * sigma).exp()
    })
}

/// Fully randomized limit of [`build_rho_x`]: every coupling between
/// different total photon numbers vanishes exactly.
pub fn build_rho_x_randomized(mu: f64, n_max: usize) -> Result<FockOperator> {
    build_rho_x_with(mu, n_max, |k| if k == 0 { 1.0 } else { 0.0 })
}

/* Fidelity *****************************************************************/

const HERMITICITY_TOL: f64 = 1e-10;

/// Hermitian square root of a positive semidefinite operator.
///
/// Eigenvalues pushed slightly negative by rounding are clamped to zero
/// before the root is taken. Rejects operators that are not Hermitian.
pub fn matrix_sqrt_psd(op: &FockOperator) -> Result<FockOperator> {
    let dev = op.hermiticity_deviation();
    let scale = op.max_abs_entry().max(1.0);
    if dev > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    // Zero rows carry no weight; compressing them keeps the eigenproblem as
    // small as the state's actual support (two-mode states live on a thin
    // slice of the basis).
    let zero = C64::new(0.0, 0.0);
    let support: Vec<usize> = (0..op.dim())
        .filter(|&i| (0..op.dim()).any(|j| op.matrix[(i, j)] != zero))
        .collect();
    let mut out = DMatrix::zeros(op.dim(), op.dim());
    if !support.is_empty() {
        let sub = DMatrix::from_fn(support.len(), support.len(), |i, j| {
            op.matrix[(support[i], support[j])]
        });
        let (values, vectors) = crate::linalg::eigh(&sub)?;
        // Eigenvalues at rounding-noise level get sqrt-amplified into
        // spurious 1e-8 entries; zero them with the genuinely negative ones.
        let floor = 1e-13 * values[values.len() - 1].max(0.0);
        let roots = DVector::from_iterator(
            values.len(),
            values
                .iter()
                .map(|&v| C64::new(if v > floor { v.sqrt() } else { 0.0 }, 0.0)),
        );
        let sub_root = &vectors * DMatrix::from_diagonal(&roots) * vectors.adjoint();
        for (i, &row) in support.iter().enumerate() {
            for (j, &col) in support.iter().enumerate() {
                out[(row, col)] = sub_root[(i, j)];
            }
        }
    }
    Ok(FockOperator::new(op.basis(), out)?.hermitized())
}

/// Uhlmann fidelity F(rho, tau) = Tr sqrt( sqrt(rho) tau sqrt(rho) ).
///
/// Symmetric in its arguments; equals Tr(rho) when the states coincide
/// (slightly below one for truncated, unnormalized states).
///
/// Evaluated as the trace norm ||sqrt(rho) sqrt(tau)||_1, which is the same
/// quantity but avoids squaring the dynamic range of the spectrum the way
/// the textbook sqrt(rho) tau sqrt(rho) route does.
pub fn uhlmann_fidelity(rho: &FockOperator, tau: &FockOperator) -> Result<f64> {
    check_same_basis(rho, tau)?;
    let a = matrix_sqrt_psd(rho)?;
    let b = matrix_sqrt_psd(tau)?;
    crate::linalg::trace_norm(&(a.matrix() * b.matrix()))
}
