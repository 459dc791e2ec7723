//! Mixed-radix basis bookkeeping, per-site ladder operators, state-vector
//! evolution primitives, and Born-rule sampling.
//!
//! A [`Register`] is an ordered list of sites, each a discrete variable of
//! dimension `d >= 2` with a physical eigenvalue attached to every digit.
//! Site 0 is the most significant digit of the flat basis index.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for unitarity / hermiticity / normalization checks.
const OP_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("site dimension {0} is invalid (must be >= 2)")]
    InvalidDimension(usize),
    #[error("family {family:?} cannot be built at dimension {dim}")]
    InvalidFamily { family: LadderFamily, dim: usize },
    #[error("eigenvalue list has length {got}, expected {expected}")]
    EigenvalueLength { expected: usize, got: usize },
    #[error("configuration has {got} digits, register has {expected} sites")]
    SiteCountMismatch { expected: usize, got: usize },
    #[error("digit {digit} at site {site} is out of range (dimension {dim})")]
    DigitOutOfRange { site: usize, digit: u8, dim: usize },
    #[error("operator is {got}x{got}, site {site} has dimension {dim}")]
    OperatorShapeMismatch { site: usize, dim: usize, got: usize },
    #[error("site index {site} out of range ({count} sites)")]
    SiteIndexOutOfRange { site: usize, count: usize },
    #[error("matrix is not unitary within {OP_TOL:e}")]
    NotUnitary,
    #[error("matrix is not Hermitian within {OP_TOL:e}")]
    NotHermitian,
    #[error("matrix dimension {0} exceeds the dense-exponential cap of 16")]
    ExponentialTooLarge(usize),
    #[error("energy table has length {got}, register space has {expected}")]
    EnergyTableLength { expected: usize, got: usize },
    #[error("state norm deviates from 1 by {0:e}, cannot sample")]
    NotNormalized(f64),
    #[error("sample count must be >= 1")]
    EmptySampleRequest,
}

/// What a site represents in the scheduling problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteRole {
    /// Charging power level of EV `ev` during time step `step`.
    Charging { ev: usize, step: usize },
    /// Binary flag: EV `ev` serves trip `trip`.
    TripBinary { ev: usize, trip: usize },
    /// Index of the EV serving trip `trip` (0 = unserved).
    TripInteger { trip: usize },
}

/// One discrete variable: a dimension, a role, and the physical eigenvalue
/// carried by each digit.
#[derive(Debug, Clone)]
pub struct Site {
    pub dim: usize,
    pub role: SiteRole,
    pub eigenvalues: Vec<f64>,
}

/// Ordered list of sites defining a mixed-radix configuration space.
#[derive(Debug, Clone)]
pub struct Register {
    sites: Vec<Site>,
    /// strides[s] = product of dimensions of all sites after s.
    strides: Vec<usize>,
    total: usize,
}

impl Register {
    pub fn new(sites: Vec<Site>) -> Result<Self, HilbertError> {
        for site in &sites {
            if site.dim < 2 {
                return Err(HilbertError::InvalidDimension(site.dim));
            }
            if site.eigenvalues.len() != site.dim {
                return Err(HilbertError::EigenvalueLength {
                    expected: site.dim,
                    got: site.eigenvalues.len(),
                });
            }
        }
        let mut strides = vec![1usize; sites.len()];
        let mut total = 1usize;
        for s in (0..sites.len()).rev() {
            strides[s] = total;
            total *= sites[s].dim;
        }
        Ok(Self { sites, strides, total })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Total configuration-space size (product of all site dimensions).
    pub fn total_size(&self) -> usize {
        self.total
    }

    /// Stride of site `s` in the flat index (site 0 is most significant).
    pub fn stride(&self, s: usize) -> usize {
        self.strides[s]
    }

    pub fn all_two_level(&self) -> bool {
        self.sites.iter().all(|s| s.dim == 2)
    }

    /// Flat index of a configuration. Bijective onto `[0, total_size)`.
    pub fn encode_index(&self, config: &Configuration) -> Result<usize, HilbertError> {
        if config.digits.len() != self.sites.len() {
            return Err(HilbertError::SiteCountMismatch {
                expected: self.sites.len(),
                got: config.digits.len(),
            });
        }
        let mut index = 0usize;
        for (s, (&digit, site)) in config.digits.iter().zip(&self.sites).enumerate() {
            if usize::from(digit) >= site.dim {
                return Err(HilbertError::DigitOutOfRange { site: s, digit, dim: site.dim });
            }
            index = index * site.dim + usize::from(digit);
        }
        Ok(index)
    }

    /// Inverse of [`Register::encode_index`].
    pub fn decode_index(&self, mut index: usize) -> Configuration {
        debug_assert!(index < self.total);
        let mut digits = vec![0u8; self.sites.len()];
        for s in (0..self.sites.len()).rev() {
            let d = self.sites[s].dim;
            digits[s] = (index % d) as u8;
            index /= d;
        }
        Configuration { digits }
    }

    /// Physical eigenvalue of site `s` for a given digit.
    pub fn eigenvalue(&self, s: usize, digit: u8) -> f64 {
        self.sites[s].eigenvalues[usize::from(digit)]
    }
}

/// One assignment of a digit to every site; a computational basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub digits: Vec<u8>,
}

impl Configuration {
    pub fn new(digits: Vec<u8>) -> Self {
        Self { digits }
    }
}

/// Ladder-operator family, selecting the eigenvalue ladder of the z operator.
///
/// The raising/lowering coefficients are those of the symmetric
/// angular-momentum ladder in every family; the families differ only in the
/// z eigenvalues (centered for bi-directional charging, shifted to start at
/// zero otherwise) and in their validity constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderFamily {
    /// Charging levels {-(d-1)/2, ..., (d-1)/2}; requires odd dimension.
    ChargingBidirectional,
    /// Charging levels {0, ..., d-1}.
    ChargingUnidirectional,
    /// Trip flag {0, 1}; requires dimension 2.
    TripBinary,
    /// Trip assignment {0, ..., N_EV}; dimension N_EV + 1.
    TripInteger,
}

/// Dense complex matrix acting on a single site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteOperator {
    pub dim: usize,
    /// Row-major `dim x dim` elements.
    pub elements: Vec<Complex64>,
}

impl SiteOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, elements: vec![Complex64::ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for k in 0..dim {
            op.elements[k * dim + k] = Complex64::ONE;
        }
        op
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            op.elements[k * diag.len() + k] = Complex64::new(v, 0.0);
        }
        op
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.elements[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for c in 0..d {
                    out.elements[r * d + c] += a * rhs.get(k, c);
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, elements: self.elements.iter().map(|e| e * factor).collect() }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            elements: self.elements.iter().zip(&rhs.elements).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for r in 0..self.dim {
            for c in 0..self.dim {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self.adjoint().matmul(self);
        for r in 0..self.dim {
            for c in 0..self.dim {
                let expected = if r == c { Complex64::ONE } else { Complex64::ZERO };
                if (product.get(r, c) - expected).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// The operator set of one site: z, raising/lowering, x, y, and z squared.
#[derive(Debug, Clone)]
pub struct LadderOps {
    pub z: SiteOperator,
    pub plus: SiteOperator,
    pub minus: SiteOperator,
    pub x: SiteOperator,
    pub y: SiteOperator,
    pub z_squared: SiteOperator,
}

/// Eigenvalue ladder of the z operator for a family at a given dimension.
pub fn family_eigenvalues(dim: usize, family: LadderFamily) -> Result<Vec<f64>, HilbertError> {
    if dim < 2 {
        return Err(HilbertError::InvalidDimension(dim));
    }
    match family {
        LadderFamily::ChargingBidirectional => {
            if dim % 2 == 0 {
                return Err(HilbertError::InvalidFamily { family, dim });
            }
            let half = (dim as f64 - 1.0) / 2.0;
            Ok((0..dim).map(|k| k as f64 - half).collect())
        }
        LadderFamily::TripBinary => {
            if dim != 2 {
                return Err(HilbertError::InvalidFamily { family, dim });
            }
            Ok(vec![0.0, 1.0])
        }
        LadderFamily::ChargingUnidirectional | LadderFamily::TripInteger => {
            Ok((0..dim).map(|k| k as f64).collect())
        }
    }
}

/// Build the full operator set for a site family.
///
/// The raising coefficient from digit `k` to `k + 1` is
/// `sqrt((k + 1) (d - 1 - k))`, the symmetric angular-momentum ladder
/// expressed in the digit basis; `minus` is the adjoint of `plus`,
/// `x = (plus + minus) / 2` and `y = (plus - minus) / 2i`.
pub fn build_ladder_operators(
    dim: usize,
    family: LadderFamily,
) -> Result<LadderOps, HilbertError> {
    let eigenvalues = family_eigenvalues(dim, family)?;
    let z = SiteOperator::from_diagonal(&eigenvalues);
    let z_squared = SiteOperator::from_diagonal(
        &eigenvalues.iter().map(|v| v * v).collect::<Vec<_>>(),
    );

    let mut plus = SiteOperator::zeros(dim);
    for k in 0..dim - 1 {
        let coeff = (((k + 1) * (dim - 1 - k)) as f64).sqrt();
        plus.set(k + 1, k, Complex64::new(coeff, 0.0));
    }
    let minus = plus.adjoint();
    let x = plus.add(&minus).scale(Complex64::new(0.5, 0.0));
    let y = {
        let diff = plus.add(&minus.scale(-Complex64::ONE));
        diff.scale(Complex64::new(0.0, -0.5))
    };

    Ok(LadderOps { z, plus, minus, x, y, z_squared })
}

/// Exact `exp(-i H)` of a small dense Hermitian matrix via spectral
/// decomposition.
pub fn hermitian_exponential(h: &SiteOperator) -> Result<SiteOperator, HilbertError> {
    if h.dim > 16 {
        return Err(HilbertError::ExponentialTooLarge(h.dim));
    }
    if !h.is_hermitian(OP_TOL) {
        return Err(HilbertError::NotHermitian);
    }
    let d = h.dim;
    let m = nalgebra::DMatrix::from_fn(d, d, |r, c| h.get(r, c));
    let eig = nalgebra::SymmetricEigen::new(m);
    // U = V diag(exp(-i lambda)) V^H
    let mut out = SiteOperator::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = Complex64::ZERO;
            for j in 0..d {
                let phase = Complex64::from_polar(1.0, -eig.eigenvalues[j]);
                acc += eig.eigenvectors[(r, j)] * phase * eig.eigenvectors[(c, j)].conj();
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// Complex amplitude array over the mixed-radix space of a register.
#[derive(Debug, Clone)]
pub struct StateVector {
    register: Arc<Register>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Equal superposition of all basis states.
    pub fn uniform(register: Arc<Register>) -> Self {
        let n = register.total_size();
        let amp = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        Self { register, amplitudes: vec![amp; n] }
    }

    /// Basis state `|index>`.
    pub fn basis(register: Arc<Register>, index: usize) -> Self {
        let n = register.total_size();
        assert!(index < n);
        let mut amplitudes = vec![Complex64::ZERO; n];
        amplitudes[index] = Complex64::ONE;
        Self { register, amplitudes }
    }

    pub fn from_amplitudes(
        register: Arc<Register>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, HilbertError> {
        if amplitudes.len() != register.total_size() {
            return Err(HilbertError::EnergyTableLength {
                expected: register.total_size(),
                got: amplitudes.len(),
            });
        }
        Ok(Self { register, amplitudes })
    }

    pub fn register(&self) -> &Arc<Register> {
        &self.register
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a dense unitary to one site: `I x ... x U x ... x I`.
    pub fn apply_site_unitary(
        &mut self,
        site: usize,
        u: &SiteOperator,
    ) -> Result<(), HilbertError> {
        if site >= self.register.site_count() {
            return Err(HilbertError::SiteIndexOutOfRange {
                site,
                count: self.register.site_count(),
            });
        }
        let dim = self.register.sites()[site].dim;
        if u.dim != dim {
            return Err(HilbertError::OperatorShapeMismatch { site, dim, got: u.dim });
        }
        if !u.is_unitary(OP_TOL) {
            return Err(HilbertError::NotUnitary);
        }

        let stride = self.register.stride(site);
        let block = dim * stride;
        let n = self.amplitudes.len();
        let mut scratch = vec![Complex64::ZERO; block];
        for base in (0..n).step_by(block) {
            scratch.copy_from_slice(&self.amplitudes[base..base + block]);
            for row in 0..dim {
                let out = &mut self.amplitudes[base + row * stride..base + (row + 1) * stride];
                let mut first = true;
                for col in 0..dim {
                    let coeff = u.get(row, col);
                    let src = &scratch[col * stride..(col + 1) * stride];
                    if first {
                        for (o, s) in out.iter_mut().zip(src) {
                            *o = coeff * s;
                        }
                        first = false;
                    } else if coeff != Complex64::ZERO {
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += coeff * s;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Multiply amplitude `k` by `exp(-i gamma energies[k])`.
    pub fn apply_diagonal_phase(
        &mut self,
        gamma: f64,
        energies: &[f64],
    ) -> Result<(), HilbertError> {
        if energies.len() != self.amplitudes.len() {
            return Err(HilbertError::EnergyTableLength {
                expected: self.amplitudes.len(),
                got: energies.len(),
            });
        }
        if gamma == 0.0 {
            return Ok(());
        }
        for (a, &e) in self.amplitudes.iter_mut().zip(energies) {
            let (sin, cos) = (-gamma * e).sin_cos();
            *a *= Complex64::new(cos, sin);
        }
        Ok(())
    }

    /// Draw `m` i.i.d. Born-rule samples, deterministic for a fixed RNG
    /// stream. Uses inverse-CDF lookup over the cumulative probabilities.
    pub fn born_sample<R: Rng>(
        &self,
        m: usize,
        rng: &mut R,
    ) -> Result<Vec<Configuration>, HilbertError> {
        if m == 0 {
            return Err(HilbertError::EmptySampleRequest);
        }
        let norm = self.norm_sq();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized((norm - 1.0).abs()));
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let top = acc;
        let samples = (0..m)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * top;
                let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                self.register.decode_index(idx)
            })
            .collect();
        Ok(samples)
    }
}

/// Truncated-series oracle for `exp(-iH)` (scaling and squaring), kept
/// independent of the spectral-decomposition path it checks.
#[cfg(test)]
pub(crate) fn taylor_expm(h: &SiteOperator) -> SiteOperator {
    let d = h.dim;
    let norm: f64 = h.elements.iter().map(|e| e.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let scale = Complex64::new(0.0, -1.0) / 2f64.powi(squarings as i32);
    let a = h.scale(scale);
    let mut result = SiteOperator::identity(d);
    let mut term = SiteOperator::identity(d);
    for n in 1..40 {
        term = term.matmul(&a).scale(Complex64::new(1.0 / n as f64, 0.0));
        result = result.add(&term);
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}
