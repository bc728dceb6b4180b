//! Dense operator algebra on small qubit registers.
//!
//! Basis convention: index `b` of a register of `n` qubits encodes the
//! bitstring of qubits `1..=n` with qubit 1 as the most significant bit, so
//! `|q1 q2 ... qn>` has index `q1 * 2^(n-1) + ... + qn`. Qubits are numbered
//! from 1 everywhere in the public API.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DjcError, Result};

pub type C64 = Complex64;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 12;

/// Tolerance used by [`exponentiate`] when checking that a generator is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit mask selecting qubit `q` (1-based) in a register of `n` qubits.
#[inline]
pub fn site_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - q)
}

/// Value (0 or 1) of qubit `q` in basis index `b`.
#[inline]
pub fn site_bit(b: usize, n_qubits: usize, q: usize) -> usize {
    (b >> (n_qubits - q)) & 1
}

/// Renders basis index `b` as a bitstring, qubit 1 first.
pub fn bitstring(b: usize, n_qubits: usize) -> String {
    (1..=n_qubits)
        .map(|q| if site_bit(b, n_qubits, q) == 1 { '1' } else { '0' })
        .collect()
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(DjcError::TooManyQubits(n_qubits));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermKind {
    /// `T_ij = (X_i X_j + Y_i Y_j) / 2`
    XY,
    /// `Z_i Z_j`
    Ising,
    /// `Z_i`
    LocalZ,
}

impl TermKind {
    pub fn arity(self) -> usize {
        match self {
            TermKind::XY | TermKind::Ising => 2,
            TermKind::LocalZ => 1,
        }
    }
}

/// One controllable interaction with a real dimensionless strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub kind: TermKind,
    pub sites: Vec<usize>,
    pub coefficient: f64,
}

impl HamiltonianTerm {
    pub fn xy(i: usize, j: usize) -> Self {
        Self {
            kind: TermKind::XY,
            sites: vec![i, j],
            coefficient: 1.0,
        }
    }

    pub fn ising(i: usize, j: usize) -> Self {
        Self {
            kind: TermKind::Ising,
            sites: vec![i, j],
            coefficient: 1.0,
        }
    }

    pub fn local_z(i: usize) -> Self {
        Self {
            kind: TermKind::LocalZ,
            sites: vec![i],
            coefficient: 1.0,
        }
    }

    pub fn scaled(mut self, coefficient: f64) -> Self {
        self.coefficient = coefficient;
        self
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let expected = self.kind.arity();
        if self.sites.len() != expected {
            return Err(DjcError::WrongArity {
                kind: self.kind,
                expected,
                got: self.sites.len(),
            });
        }
        for &s in &self.sites {
            if s == 0 || s > n_qubits {
                return Err(DjcError::SiteOutOfRange { site: s, n_qubits });
            }
        }
        if expected == 2 && self.sites[0] == self.sites[1] {
            return Err(DjcError::DuplicateSite(self.sites[0]));
        }
        Ok(())
    }

    /// Applies `exp(-i * angle * coefficient * term)` in place.
    ///
    /// The closed forms below follow from the spectra: `Z`-type terms are
    /// diagonal and `T_ij` acts as `sigma_x` on `{|01>, |10>}` and annihilates
    /// `|00>`, `|11>`.
    fn evolve_in_place(&self, angle: f64, amps: &mut [C64], n_qubits: usize) {
        let theta = angle * self.coefficient;
        match self.kind {
            TermKind::XY => {
                let mi = site_mask(n_qubits, self.sites[0]);
                let mj = site_mask(n_qubits, self.sites[1]);
                let (c, s) = (theta.cos(), theta.sin());
                let mis = C64::new(0.0, -s);
                for b in 0..amps.len() {
                    // visit each {|..0..1..>, |..1..0..>} pair once
                    if b & mi == 0 && b & mj != 0 {
                        let p = b ^ mi ^ mj;
                        let (x, y) = (amps[b], amps[p]);
                        amps[b] = x * c + y * mis;
                        amps[p] = x * mis + y * c;
                    }
                }
            }
            TermKind::Ising => {
                let mi = site_mask(n_qubits, self.sites[0]);
                let mj = site_mask(n_qubits, self.sites[1]);
                let plus = C64::from_polar(1.0, -theta);
                let minus = plus.conj();
                for (b, a) in amps.iter_mut().enumerate() {
                    let odd = ((b & mi != 0) as u8) ^ ((b & mj != 0) as u8);
                    *a *= if odd == 0 { plus } else { minus };
                }
            }
            TermKind::LocalZ => {
                let mi = site_mask(n_qubits, self.sites[0]);
                let plus = C64::from_polar(1.0, -theta);
                let minus = plus.conj();
                for (b, a) in amps.iter_mut().enumerate() {
                    *a *= if b & mi == 0 { plus } else { minus };
                }
            }
        }
    }
}

impl HamiltonianTerm {
    /// Action of `coefficient * term` (the generator itself, not its exponential).
    pub fn act(&self, amps: &[C64], n_qubits: usize) -> Vec<C64> {
        let c = self.coefficient;
        let mut out = vec![ZERO; amps.len()];
        match self.kind {
            TermKind::XY => {
                let mi = site_mask(n_qubits, self.sites[0]);
                let mj = site_mask(n_qubits, self.sites[1]);
                for (b, &a) in amps.iter().enumerate() {
                    if (b & mi == 0) != (b & mj == 0) {
                        out[b ^ mi ^ mj] += a * c;
                    }
                }
            }
            TermKind::Ising => {
                let mi = site_mask(n_qubits, self.sites[0]);
                let mj = site_mask(n_qubits, self.sites[1]);
                for (b, &a) in amps.iter().enumerate() {
                    let same = (b & mi == 0) == (b & mj == 0);
                    out[b] = a * if same { c } else { -c };
                }
            }
            TermKind::LocalZ => {
                let mi = site_mask(n_qubits, self.sites[0]);
                for (b, &a) in amps.iter().enumerate() {
                    out[b] = a * if b & mi == 0 { c } else { -c };
                }
            }
        }
        out
    }
}

impl fmt::Display for HamiltonianTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            TermKind::XY => "T",
            TermKind::Ising => "ZZ",
            TermKind::LocalZ => "Z",
        };
        let sites: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        write!(f, "{}*{}({})", self.coefficient, name, sites.join(","))
    }
}

/// A `2^n x 2^n` complex matrix acting on an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(DjcError::DimensionMismatch {
                expected: dim,
                got: matrix.ncols(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(DjcError::NotPowerOfTwo(dim));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Self { n_qubits, matrix })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// Diagonal operator from a function of the basis index.
    pub fn diagonal(n_qubits: usize, f: impl Fn(usize) -> C64) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::from_diagonal(&DVector::from_fn(dim, |b, _| f(b))),
        }
    }

    /// Embeds an operator on the ordered `sites` (first site = most significant
    /// local bit) into an `n`-qubit register, identity elsewhere.
    pub fn embed(local: &DMatrix<C64>, sites: &[usize], n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let k = sites.len();
        if local.nrows() != 1 << k || local.ncols() != 1 << k {
            return Err(DjcError::DimensionMismatch {
                expected: 1 << k,
                got: local.nrows(),
            });
        }
        for (idx, &s) in sites.iter().enumerate() {
            if s == 0 || s > n_qubits {
                return Err(DjcError::SiteOutOfRange { site: s, n_qubits });
            }
            if sites[..idx].contains(&s) {
                return Err(DjcError::DuplicateSite(s));
            }
        }
        let masks: Vec<usize> = sites.iter().map(|&s| site_mask(n_qubits, s)).collect();
        let all: usize = masks.iter().sum();
        let local_index = |b: usize| {
            masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(b & m != 0))
        };
        let with_local = |b: usize, r: usize| {
            masks.iter().enumerate().fold(b & !all, |acc, (t, &m)| {
                if (r >> (k - 1 - t)) & 1 == 1 {
                    acc | m
                } else {
                    acc
                }
            })
        };
        let dim = 1 << n_qubits;
        let mut matrix = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let c = local_index(col);
            for r in 0..(1 << k) {
                let v = local[(r, c)];
                if v != ZERO {
                    matrix[(with_local(col, r), col)] = v;
                }
            }
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
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

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Frobenius norm of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() < tol
    }

    /// Frobenius norm of `U^dagger U - 1`.
    pub fn unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<C64>::identity(dim, dim)).norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() < tol
    }

    /// Frobenius distance `||self - other||`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// `min_gamma ||self - e^{i gamma} other||` in Frobenius norm.
    pub fn phase_insensitive_distance(&self, other: &Self) -> f64 {
        phase_insensitive_distance(&self.matrix, &other.matrix)
    }

    /// `basis^dagger * self * basis` for a matrix whose columns span a subspace.
    pub fn restrict(&self, basis: &DMatrix<C64>) -> DMatrix<C64> {
        basis.adjoint() * &self.matrix * basis
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(DjcError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

/// `min_gamma ||a - e^{i gamma} b||_F` for matrices (or vectors) of equal shape.
pub fn phase_insensitive_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    (a - b * phase).norm()
}

/// Builds `coefficient * term` as a dense `2^n` matrix.
pub fn build_term(term: &HamiltonianTerm, n_qubits: usize) -> Result<DenseOperator> {
    check_register(n_qubits)?;
    term.validate(n_qubits)?;
    let c = C64::new(term.coefficient, 0.0);
    let n = n_qubits;
    let op = match term.kind {
        TermKind::XY => {
            let (mi, mj) = (site_mask(n, term.sites[0]), site_mask(n, term.sites[1]));
            let mut op = DenseOperator::zeros(n);
            for b in 0..(1 << n) {
                if (b & mi == 0) != (b & mj == 0) {
                    op.matrix[(b ^ mi ^ mj, b)] = c;
                }
            }
            op
        }
        TermKind::Ising => {
            let (i, j) = (term.sites[0], term.sites[1]);
            DenseOperator::diagonal(n, |b| {
                if site_bit(b, n, i) == site_bit(b, n, j) {
                    c
                } else {
                    -c
                }
            })
        }
        TermKind::LocalZ => {
            let i = term.sites[0];
            DenseOperator::diagonal(n, |b| if site_bit(b, n, i) == 0 { c } else { -c })
        }
    };
    Ok(op)
}

/// Excitation-number operator `N = sum_i |1><1|_i`.
pub fn excitation_number(n_qubits: usize) -> DenseOperator {
    DenseOperator::diagonal(n_qubits, |b| C64::new(b.count_ones() as f64, 0.0))
}

/// Collective `S_z = sum_i Z_i`.
pub fn collective_z(n_qubits: usize) -> DenseOperator {
    DenseOperator::diagonal(n_qubits, |b| {
        let ones = b.count_ones() as f64;
        C64::new(n_qubits as f64 - 2.0 * ones, 0.0)
    })
}

/// Returns `exp(-i * angle * op)` for Hermitian `op`, via its eigendecomposition.
pub fn exponentiate(op: &DenseOperator, angle: f64) -> Result<DenseOperator> {
    let residual = op.hermiticity_residual();
    if residual >= HERMITIAN_TOL {
        return Err(DjcError::NotHermitian { residual });
    }
    // symmetrize so rounding noise cannot leak into the eigensolver
    let h = (&op.matrix + op.matrix.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -angle * l)),
    );
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    Ok(DenseOperator {
        n_qubits: op.n_qubits,
        matrix: scaled * v.adjoint(),
    })
}

/// `exp(-i phi a) * b * exp(i phi a)`.
pub fn conjugate_with(a: &DenseOperator, phi: f64, b: &DenseOperator) -> Result<DenseOperator> {
    a.same_dim(b)?;
    let u = exponentiate(a, phi)?;
    Ok(DenseOperator {
        n_qubits: a.n_qubits,
        matrix: &u.matrix * &b.matrix * u.matrix.adjoint(),
    })
}

/// Matrix-vector product `u |s>`. The result is not renormalized.
pub fn apply(u: &DenseOperator, s: &QState) -> Result<QState> {
    if u.dim() != s.dim() {
        return Err(DjcError::DimensionMismatch {
            expected: u.dim(),
            got: s.dim(),
        });
    }
    Ok(QState {
        n_qubits: s.n_qubits,
        amplitudes: &u.matrix * &s.amplitudes,
    })
}

/// Complex amplitude vector over the `2^n` computational basis states.
///
/// States may be sub-normalized (conditional evolution, post-jump vectors);
/// [`QState::is_normalized`] reports the flag.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl QState {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = DVector::zeros(1 << n_qubits);
        amplitudes[index] = ONE;
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// `|b1 b2 ... bn>` from a string of `0`/`1`, qubit 1 first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        check_register(n)?;
        let mut index = 0usize;
        for ch in bits.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(DjcError::InvalidConfig(format!("bad bitstring {bits:?}"))),
                };
        }
        Ok(Self::basis(n, index))
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(DjcError::NotPowerOfTwo(dim));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn from_vector(amplitudes: DVector<C64>) -> Result<Self> {
        Self::from_amplitudes(amplitudes.as_slice().to_vec())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        self.amplitudes.as_mut_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() < tol
    }

    /// Returns the state scaled to unit norm; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.normalize();
        out
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes /= C64::new(n, 0.0);
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.amplitudes - &other.amplitudes).norm()
    }

    pub fn phase_insensitive_distance(&self, other: &Self) -> f64 {
        let a = DMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        let b = DMatrix::from_column_slice(other.dim(), 1, other.amplitudes.as_slice());
        phase_insensitive_distance(&a, &b)
    }

    /// Expectation of a diagonal projector `|1><1|_q` (unnormalized states give the raw weight).
    pub fn excited_population(&self, q: usize) -> f64 {
        let m = site_mask(self.n_qubits, q);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| b & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Applies the emission operator `|0><1|_q` (not renormalized).
    pub fn lowered(&self, q: usize) -> Self {
        let m = site_mask(self.n_qubits, q);
        let mut out = DVector::zeros(self.dim());
        for (b, &a) in self.amplitudes.iter().enumerate() {
            if b & m != 0 {
                out[b ^ m] = a;
            }
        }
        Self {
            n_qubits: self.n_qubits,
            amplitudes: out,
        }
    }

    /// Tensor product `self ⊗ other` (self on the leading qubits).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_register(n)?;
        Ok(Self {
            n_qubits: n,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

/// One primitive inside a schedule step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pulse {
    /// `exp(-i * angle * term)`
    Evolve { term: HamiltonianTerm, angle: f64 },
    /// Single-qubit Hadamard primitive, used only by recovery.
    Hadamard { site: usize },
}

impl Pulse {
    pub fn evolve(term: HamiltonianTerm, angle: f64) -> Self {
        Pulse::Evolve { term, angle }
    }

    pub fn sites(&self) -> &[usize] {
        match self {
            Pulse::Evolve { term, .. } => &term.sites,
            Pulse::Hadamard { site } => std::slice::from_ref(site),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            Pulse::Evolve { term, .. } => term.validate(n_qubits),
            Pulse::Hadamard { site } => {
                if *site == 0 || *site > n_qubits {
                    Err(DjcError::SiteOutOfRange {
                        site: *site,
                        n_qubits,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Time-like cost of the pulse in radians of rotation; fixed gates cost nothing.
    pub fn rotation(&self) -> f64 {
        match self {
            Pulse::Evolve { term, angle } => (angle * term.coefficient).abs(),
            Pulse::Hadamard { .. } => 0.0,
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Pulse::Evolve { term, angle } => Pulse::Evolve {
                term: term.clone(),
                angle: -angle,
            },
            Pulse::Hadamard { site } => Pulse::Hadamard { site: *site },
        }
    }

    /// Applies the pulse to raw amplitudes of an `n`-qubit register.
    pub fn apply_in_place(&self, amps: &mut [C64], n_qubits: usize) {
        match self {
            Pulse::Evolve { term, angle } => term.evolve_in_place(*angle, amps, n_qubits),
            Pulse::Hadamard { site } => {
                let m = site_mask(n_qubits, *site);
                let r = C64::new(FRAC_1_SQRT_2, 0.0);
                for b in 0..amps.len() {
                    if b & m == 0 {
                        let (x, y) = (amps[b], amps[b | m]);
                        amps[b] = (x + y) * r;
                        amps[b | m] = (x - y) * r;
                    }
                }
            }
        }
    }

    /// The pulse with its rotation split into `parts` equal slices.
    pub fn slice(&self, parts: usize) -> Self {
        match self {
            Pulse::Evolve { term, angle } => Pulse::Evolve {
                term: term.clone(),
                angle: angle / parts as f64,
            },
            other => other.clone(),
        }
    }
}

/// A group of pulses executed as one time step, in list order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Step {
    pub pulses: Vec<Pulse>,
}

impl Step {
    pub fn single(pulse: Pulse) -> Self {
        Self {
            pulses: vec![pulse],
        }
    }
}

/// Ordered list of steps; the first step is applied first.
///
/// The composed unitary is `e^{i global_phase} * U_last * ... * U_first`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseSchedule {
    pub steps: Vec<Step>,
    pub global_phase: f64,
}

impl PulseSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pulses(pulses: impl IntoIterator<Item = Pulse>) -> Self {
        Self {
            steps: pulses.into_iter().map(Step::single).collect(),
            global_phase: 0.0,
        }
    }

    pub fn push(&mut self, term: HamiltonianTerm, angle: f64) {
        self.steps.push(Step::single(Pulse::evolve(term, angle)));
    }

    pub fn push_step(&mut self, step: Step) {
        self.steps.push(step);
    }

    /// Appends `other` so that it runs after `self`.
    pub fn append(&mut self, other: PulseSchedule) {
        self.steps.extend(other.steps);
        self.global_phase += other.global_phase;
    }

    pub fn then(mut self, other: PulseSchedule) -> Self {
        self.append(other);
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.steps.iter().flat_map(|s| s.pulses.iter())
    }

    pub fn max_site(&self) -> usize {
        self.pulses()
            .flat_map(|p| p.sites().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.pulses().try_for_each(|p| p.validate(n_qubits))
    }

    pub fn inverse(&self) -> Self {
        Self {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| Step {
                    pulses: s.pulses.iter().rev().map(Pulse::inverse).collect(),
                })
                .collect(),
            global_phase: -self.global_phase,
        }
    }

    /// Applies the whole schedule, including the global phase.
    pub fn apply(&self, state: &QState) -> Result<QState> {
        self.validate(state.n_qubits())?;
        let mut out = state.clone();
        let n = out.n_qubits();
        for p in self.pulses() {
            p.apply_in_place(out.amplitudes_mut(), n);
        }
        Ok(out.scaled(C64::from_polar(1.0, self.global_phase)))
    }

    /// States after each step (the input is not included).
    pub fn trace_states(&self, state: &QState) -> Result<Vec<QState>> {
        self.validate(state.n_qubits())?;
        let n = state.n_qubits();
        let mut cur = state.clone();
        let mut out = Vec::with_capacity(self.len());
        for step in &self.steps {
            for p in &step.pulses {
                p.apply_in_place(cur.amplitudes_mut(), n);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Composed unitary on an `n`-qubit register.
    pub fn unitary(&self, n_qubits: usize) -> Result<DenseOperator> {
        check_register(n_qubits)?;
        self.validate(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut m = DMatrix::<C64>::identity(dim, dim);
        for mut col in m.column_iter_mut() {
            let slice = col.as_mut_slice();
            for p in self.pulses() {
                p.apply_in_place(slice, n_qubits);
            }
        }
        m *= C64::from_polar(1.0, self.global_phase);
        Ok(DenseOperator { n_qubits, matrix: m })
    }

    /// Composed unitary of the schedule restricted to `sites`, as a `2^k` matrix
    /// with `sites[0]` the most significant local qubit.
    pub fn local_unitary(&self, sites: &[usize]) -> Result<DenseOperator> {
        let k = sites.len();
        let remap = |s: usize| -> Result<usize> {
            sites
                .iter()
                .position(|&x| x == s)
                .map(|p| p + 1)
                .ok_or(DjcError::SiteOutOfRange { site: s, n_qubits: k })
        };
        let mut local = PulseSchedule {
            steps: Vec::with_capacity(self.len()),
            global_phase: self.global_phase,
        };
        for step in &self.steps {
            let mut pulses = Vec::with_capacity(step.pulses.len());
            for p in &step.pulses {
                pulses.push(match p {
                    Pulse::Evolve { term, angle } => Pulse::Evolve {
                        term: HamiltonianTerm {
                            kind: term.kind,
                            sites: term.sites.iter().map(|&s| remap(s)).collect::<Result<_>>()?,
                            coefficient: term.coefficient,
                        },
                        angle: *angle,
                    },
                    Pulse::Hadamard { site } => Pulse::Hadamard { site: remap(*site)? },
                });
            }
            local.steps.push(Step { pulses });
        }
        local.unitary(k)
    }
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn term(n: usize) -> impl Strategy<Value = HamiltonianTerm> {
        (1..=n, 1..=n, 0..3u8, -2.0f64..2.0)
            .prop_filter("distinct sites", |(i, j, _, _)| i != j)
            .prop_map(|(i, j, k, c)| {
                match k {
                    0 => HamiltonianTerm::xy(i, j),
                    1 => HamiltonianTerm::ising(i, j),
                    _ => HamiltonianTerm::local_z(i),
                }
                .scaled(c)
            })
    }

    proptest! {
        #[test]
        fn exponent_angles_add(t in term(4), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let h = build_term(&t, 4).unwrap();
            let lhs = exponentiate(&h, a).unwrap().mul(&exponentiate(&h, b).unwrap()).unwrap();
            let rhs = exponentiate(&h, a + b).unwrap();
            prop_assert!(lhs.distance(&rhs) < 1e-10);
            prop_assert!(rhs.is_unitary(1e-10));
        }

        #[test]
        fn pulse_kernels_match_dense_exponential(t in term(4), a in -3.0f64..3.0, seed in any::<u64>()) {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let s = QState::from_amplitudes(crate::channel::random_amplitudes(16, &mut rng)).unwrap();
            let p = PulseSchedule::from_pulses(vec![Pulse::Evolve { term: t.clone(), angle: a }]);
            let fast = p.apply(&s).unwrap();
            let dense = apply(&exponentiate(&build_term(&t, 4).unwrap(), a).unwrap(), &s).unwrap();
            prop_assert!(fast.distance(&dense) < 1e-10);
            prop_assert!((fast.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn schedule_inverse_undoes_it(ts in prop::collection::vec((term(4), -3.0f64..3.0), 1..6), phase in -3.0f64..3.0) {
            let mut s = PulseSchedule::from_pulses(
                ts.into_iter().map(|(term, angle)| Pulse::Evolve { term, angle }).collect::<Vec<_>>(),
            );
            s.global_phase = phase;
            let id = s.clone().then(s.inverse()).unitary(4).unwrap();
            prop_assert!(id.distance(&DenseOperator::identity(4)) < 1e-10);
        }
    }
}
