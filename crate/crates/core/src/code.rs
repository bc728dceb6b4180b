//! The balanced-bitstring DFS and the DJC code family on `2n` qubits.
//!
//! Pair `i` (qubits `2i-1`, `2i`) carries the tilde states
//! `|0~>_i = |0 1>` and `|1~>_i = -sign(J_i) |1 0>`. The logical word
//! `|e_1 ... e_{n-1}>_L` is the cat state of `|e~_1 ... e~_{n-1} 0~_n>` and its
//! bitwise NOT, where the NOT branch flips the tilde labels and carries the
//! tilde signs of the flipped labels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DjcError, Result};
use crate::operator::{bitstring, site_mask, HamiltonianTerm, QState, C64, MAX_QUBITS};

/// Absolute tolerance for every exact code identity.
pub const CODE_TOL: f64 = 1e-12;

/// Basis indices of the bitstrings with exactly `n/2` ones, in lexicographic order.
pub fn dfs_basis(n_qubits: usize) -> Result<Vec<usize>> {
    if n_qubits % 2 == 1 {
        return Err(DjcError::OddQubitCount(n_qubits));
    }
    if n_qubits > MAX_QUBITS {
        return Err(DjcError::TooManyQubits(n_qubits));
    }
    let half = (n_qubits / 2) as u32;
    Ok((0..1usize << n_qubits)
        .filter(|b| b.count_ones() == half)
        .collect())
}

/// Norm of the component of `state` outside the balanced subspace.
pub fn dfs_leakage(state: &QState) -> f64 {
    let half = (state.n_qubits() / 2) as u32;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(b, _)| b.count_ones() != half || state.n_qubits() % 2 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// A DJC code: `n_pairs` pairs, one coupling sign per pair, `2^(n_pairs-1)` logical words.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    n_pairs: usize,
    pair_signs: Vec<i8>,
    logical_basis: Vec<QState>,
}

impl CodeSpec {
    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn n_physical(&self) -> usize {
        2 * self.n_pairs
    }

    pub fn n_logical(&self) -> usize {
        self.n_pairs - 1
    }

    pub fn logical_dim(&self) -> usize {
        1 << self.n_logical()
    }

    pub fn pair_signs(&self) -> &[i8] {
        &self.pair_signs
    }

    /// Sign of `J` on pair `i` (1-based).
    pub fn pair_sign(&self, i: usize) -> i8 {
        self.pair_signs[i - 1]
    }

    pub fn logical_basis(&self) -> &[QState] {
        &self.logical_basis
    }

    /// Columns are the logical basis words.
    pub fn basis_matrix(&self) -> DMatrix<C64> {
        let dim = 1 << self.n_physical();
        DMatrix::from_fn(dim, self.logical_dim(), |r, c| {
            self.logical_basis[c].amplitudes()[r]
        })
    }

    /// Encoded over physical qubits as the unreduced fraction `(n-1, 2n)`.
    pub fn rate(&self) -> (usize, usize) {
        (self.n_logical(), self.n_physical())
    }

    /// Checks that `i` is a logical qubit index.
    pub fn check_logical(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_logical() {
            return Err(DjcError::LogicalIndexOutOfRange {
                index: i,
                n_logical: self.n_logical(),
            });
        }
        Ok(())
    }

    /// Basis index and sign of a product of tilde states with the given labels.
    fn tilde_ket(&self, labels: &[bool]) -> (usize, f64) {
        let n = self.n_physical();
        labels
            .iter()
            .enumerate()
            .fold((0usize, 1.0), |(idx, sign), (p, &one)| {
                let pair = p + 1;
                if one {
                    (
                        idx | site_mask(n, 2 * pair - 1),
                        sign * -f64::from(self.pair_sign(pair)),
                    )
                } else {
                    (idx | site_mask(n, 2 * pair), sign)
                }
            })
    }

    pub fn to_document(&self) -> CodeDocument {
        CodeDocument {
            n_pairs: self.n_pairs,
            pair_signs: self.pair_signs.clone(),
            logical_basis: self
                .logical_basis
                .iter()
                .map(|s| {
                    s.amplitudes()
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() > 0.0)
                        .map(|(b, a)| (b, a.re, a.im))
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds a code from a document without re-deriving the words, so a
    /// corrupted file is checked as written.
    pub fn from_document(doc: &CodeDocument) -> Result<Self> {
        if doc.n_pairs < 2 {
            return Err(DjcError::TooFewPairs(doc.n_pairs));
        }
        check_signs(doc.n_pairs, &doc.pair_signs)?;
        let n = 2 * doc.n_pairs;
        if n > MAX_QUBITS {
            return Err(DjcError::TooManyQubits(n));
        }
        let expected = 1 << (doc.n_pairs - 1);
        if doc.logical_basis.len() != expected {
            return Err(DjcError::DimensionMismatch {
                expected,
                got: doc.logical_basis.len(),
            });
        }
        let dim = 1usize << n;
        let logical_basis = doc
            .logical_basis
            .iter()
            .map(|entries| {
                let mut amps = vec![C64::new(0.0, 0.0); dim];
                for &(b, re, im) in entries {
                    if b >= dim {
                        return Err(DjcError::SiteOutOfRange {
                            site: b,
                            n_qubits: n,
                        });
                    }
                    amps[b] += C64::new(re, im);
                }
                QState::from_amplitudes(amps)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_pairs: doc.n_pairs,
            pair_signs: doc.pair_signs.clone(),
            logical_basis,
        })
    }
}

/// JSON form of a code: each logical word is a list of `[index, re, im]` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub n_pairs: usize,
    pub pair_signs: Vec<i8>,
    pub logical_basis: Vec<Vec<(usize, f64, f64)>>,
}

fn check_signs(n_pairs: usize, signs: &[i8]) -> Result<()> {
    if signs.len() != n_pairs {
        return Err(DjcError::SignCount {
            expected: n_pairs,
            got: signs.len(),
        });
    }
    if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(DjcError::InvalidSign(bad));
    }
    Ok(())
}

/// Builds the code on `2 * n_pairs` qubits; `pair_signs[i]` is `sign(J_{2i+1,2i+2})`.
pub fn build_code(n_pairs: usize, pair_signs: &[i8]) -> Result<CodeSpec> {
    if n_pairs < 2 {
        return Err(DjcError::TooFewPairs(n_pairs));
    }
    check_signs(n_pairs, pair_signs)?;
    let n = 2 * n_pairs;
    if n > MAX_QUBITS {
        return Err(DjcError::TooManyQubits(n));
    }
    let mut code = CodeSpec {
        n_pairs,
        pair_signs: pair_signs.to_vec(),
        logical_basis: Vec::new(),
    };
    let k = n_pairs - 1;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for word in 0..1usize << k {
        let mut labels: Vec<bool> = (0..k).map(|t| (word >> (k - 1 - t)) & 1 == 1).collect();
        labels.push(false);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let (b0, s0) = code.tilde_ket(&labels);
        let (b1, s1) = code.tilde_ket(&flipped);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[b0] = C64::new(s0 * r, 0.0);
        amps[b1] = C64::new(s1 * r, 0.0);
        code.logical_basis.push(QState::from_amplitudes(amps)?);
    }
    Ok(code)
}

/// `sum_e amp_e |e_L>` for normalized logical amplitudes (logical qubit 1 most significant).
pub fn encode(code: &CodeSpec, logical_amplitudes: &[C64]) -> Result<QState> {
    if logical_amplitudes.len() != code.logical_dim() {
        return Err(DjcError::DimensionMismatch {
            expected: code.logical_dim(),
            got: logical_amplitudes.len(),
        });
    }
    let norm = logical_amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(DjcError::NotNormalized(norm));
    }
    let v = code.basis_matrix() * DVector::from_column_slice(logical_amplitudes);
    QState::from_vector(v)
}

/// Outcome of the known-location error-correction check
/// `<psi_m| S_i^dag S_i |psi_n> = Lambda_i delta_mn`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QeccCheckResult {
    /// `Lambda_i` for each physical qubit, taken as the mean diagonal entry.
    pub lambdas: Vec<f64>,
    pub max_off_diagonal: f64,
    /// Largest spread of diagonal entries for a fixed jump location.
    pub max_diagonal_spread: f64,
    pub pass: bool,
}

/// Checks the condition over arbitrary states for every single-qubit emission.
pub fn check_qecc_states(states: &[QState], tol: f64) -> QeccCheckResult {
    let n = states.first().map_or(0, QState::n_qubits);
    let mut lambdas = Vec::with_capacity(n);
    let mut max_off = 0.0f64;
    let mut max_spread = 0.0f64;
    for q in 1..=n {
        let images: Vec<QState> = states.iter().map(|s| s.lowered(q)).collect();
        let mut diag = Vec::with_capacity(images.len());
        for (m, a) in images.iter().enumerate() {
            for (k, b) in images.iter().enumerate() {
                let g = a.inner(b);
                if m == k {
                    diag.push(g.re);
                } else {
                    max_off = max_off.max(g.norm());
                }
            }
        }
        let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max_spread = max_spread.max(hi - lo);
        lambdas.push(diag.iter().sum::<f64>() / diag.len() as f64);
    }
    QeccCheckResult {
        lambdas,
        max_off_diagonal: max_off,
        max_diagonal_spread: max_spread,
        pass: max_off < tol && max_spread < tol,
    }
}

/// Checks the code words (plus optional extra states such as `|2_L>`) at [`CODE_TOL`].
pub fn check_qecc(code: &CodeSpec, extra_states: &[QState]) -> QeccCheckResult {
    let mut states = code.logical_basis.clone();
    states.extend_from_slice(extra_states);
    check_qecc_states(&states, CODE_TOL)
}

/// Adds `v` to an orthonormal list if it has a component outside the span.
/// Returns whether the list grew.
pub fn orthonormal_extend(basis: &mut Vec<DVector<C64>>, mut v: DVector<C64>, tol: f64) -> bool {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.dotc(&v);
            v -= b * c;
        }
    }
    let norm = v.norm();
    if norm > tol {
        basis.push(v / C64::new(norm, 0.0));
        true
    } else {
        false
    }
}

/// Generators used by the compiled gate set on this code:
/// `T_{2a-1,2a}`, `T_{2a,2b-1}`, `T_{2a-1,2b-1}` and `Z_{2a-1} Z_{2b-1}` for pairs `a != b`.
pub fn gate_generators(code: &CodeSpec) -> Vec<HamiltonianTerm> {
    let n = code.n_pairs();
    let mut out: Vec<HamiltonianTerm> = (1..=n).map(|a| HamiltonianTerm::xy(2 * a - 1, 2 * a)).collect();
    for a in 1..=n {
        for b in 1..=n {
            if a == b {
                continue;
            }
            out.push(HamiltonianTerm::xy(2 * a, 2 * b - 1));
            if a < b {
                out.push(HamiltonianTerm::xy(2 * a - 1, 2 * b - 1));
                out.push(HamiltonianTerm::ising(2 * a - 1, 2 * b - 1));
            }
        }
    }
    out
}

/// Orthonormal basis (as columns) of the smallest subspace containing the
/// logical words and closed under [`gate_generators`]: the extended DJC space
/// visited by compiled gates. The logical words are the leading columns.
pub fn djc_space(code: &CodeSpec) -> DMatrix<C64> {
    let n = code.n_physical();
    let gens = gate_generators(code);
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for s in code.logical_basis() {
        orthonormal_extend(&mut basis, s.amplitudes().clone(), 1e-9);
    }
    let mut frontier = 0;
    while frontier < basis.len() {
        let v = basis[frontier].clone();
        for g in &gens {
            let w = DVector::from_vec(g.act(v.as_slice(), n));
            orthonormal_extend(&mut basis, w, 1e-9);
        }
        frontier += 1;
    }
    DMatrix::from_columns(&basis)
}

/// Orthonormal states of [`djc_space`] orthogonal to the logical span
/// (for two pairs this is `|2_L>` up to sign).
pub fn auxiliary_states(code: &CodeSpec) -> Result<Vec<QState>> {
    let space = djc_space(code);
    space
        .columns(code.logical_dim(), space.ncols() - code.logical_dim())
        .column_iter()
        .map(|c| QState::from_vector(c.into_owned()))
        .collect()
}

/// Pretty form of a state's support, for reports and debugging.
pub fn describe(state: &QState) -> String {
    let n = state.n_qubits();
    let terms: Vec<String> = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-12)
        .map(|(b, a)| format!("({:+.4}{:+.4}i)|{}>", a.re, a.im, bitstring(b, n)))
        .collect();
    terms.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{apply, excitation_number};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cat(a: &str, b: &str, sign: f64) -> QState {
        let x = QState::from_bits(a).unwrap().scaled(C64::new(FRAC_1_SQRT_2, 0.0));
        let y = QState::from_bits(b).unwrap().scaled(C64::new(sign * FRAC_1_SQRT_2, 0.0));
        QState::from_vector(x.amplitudes() + y.amplitudes()).unwrap()
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn dfs_small_cases() {
        assert_eq!(dfs_basis(2).unwrap(), vec![0b01, 0b10]);
        assert_eq!(dfs_basis(4).unwrap().len(), 6);
        for n in [2, 4, 6, 8] {
            assert_eq!(dfs_basis(n).unwrap().len(), binomial(n, n / 2));
        }
        assert_eq!(dfs_basis(3), Err(DjcError::OddQubitCount(3)));
    }

    #[test]
    fn dfs_strings_are_excitation_eigenvectors() {
        let n = 6;
        let c = excitation_number(n);
        for b in dfs_basis(n).unwrap() {
            let s = QState::basis(n, b);
            let out = apply(&c, &s).unwrap();
            assert!(out.distance(&s.scaled(C64::new(3.0, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn four_qubit_code_words_negative_coupling() {
        let code = build_code(2, &[-1, -1]).unwrap();
        assert!(code.logical_basis()[0].distance(&cat("1010", "0101", 1.0)) < 1e-15);
        assert!(code.logical_basis()[1].distance(&cat("0110", "1001", 1.0)) < 1e-15);
    }

    #[test]
    fn four_qubit_code_words_positive_coupling() {
        let code = build_code(2, &[1, 1]).unwrap();
        assert!(code.logical_basis()[0].distance(&cat("1010", "0101", 1.0)) < 1e-15);
        let minus_one = cat("0110", "1001", 1.0).scaled(C64::new(-1.0, 0.0));
        assert!(code.logical_basis()[1].distance(&minus_one) < 1e-15);
    }

    #[test]
    fn code_words_orthonormal_and_balanced() {
        for (n_pairs, signs) in [(2, vec![1, -1]), (3, vec![-1, 1, 1]), (4, vec![1, 1, -1, -1])] {
            let code = build_code(n_pairs, &signs).unwrap();
            assert_eq!(code.logical_basis().len(), 1 << (n_pairs - 1));
            let b = code.basis_matrix();
            let gram = b.adjoint() * &b;
            let id = DMatrix::<C64>::identity(gram.nrows(), gram.ncols());
            assert!((gram - id).norm() < 1e-12);
            for s in code.logical_basis() {
                assert!(dfs_leakage(s) < 1e-15);
            }
        }
    }

    #[test]
    fn build_code_errors() {
        assert_eq!(build_code(1, &[1]), Err(DjcError::TooFewPairs(1)));
        assert_eq!(
            build_code(3, &[1, 1]),
            Err(DjcError::SignCount { expected: 3, got: 2 })
        );
        assert_eq!(build_code(2, &[1, 0]), Err(DjcError::InvalidSign(0)));
        assert_eq!(build_code(7, &[1; 7]), Err(DjcError::TooManyQubits(14)));
    }

    #[test]
    fn encode_examples() {
        let code = build_code(2, &[-1, -1]).unwrap();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(encode(&code, &[one, zero]).unwrap(), code.logical_basis()[0]);
        assert!(matches!(
            encode(&code, &[one]),
            Err(DjcError::DimensionMismatch { .. })
        ));
        assert!(matches!(encode(&code, &[one, one]), Err(DjcError::NotNormalized(_))));
    }

    #[test]
    fn balanced_superposition_is_singlet_pair_product() {
        let code = build_code(2, &[1, 1]).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = encode(&code, &[h, h]).unwrap();
        let singlet = cat("01", "10", -1.0);
        let expected = singlet.tensor(&singlet).unwrap();
        assert!(s.distance(&expected) < 1e-15);
    }

    #[test]
    fn qecc_on_four_qubit_code_and_two_l() {
        let code = build_code(2, &[-1, -1]).unwrap();
        let r = check_qecc(&code, &[]);
        assert!(r.pass);
        for l in &r.lambdas {
            assert!((l - 0.5).abs() < 1e-12);
        }
        let two_l = cat("0011", "1100", 1.0);
        assert!(check_qecc(&code, &[two_l]).pass);
    }

    #[test]
    fn qecc_counterexample_bare_pair() {
        let states = [QState::from_bits("01").unwrap(), QState::from_bits("10").unwrap()];
        let r = check_qecc_states(&states, CODE_TOL);
        assert!(!r.pass);
        assert!((r.max_diagonal_spread - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_dfs_does_not_satisfy_condition() {
        let states: Vec<QState> = dfs_basis(4).unwrap().into_iter().map(|b| QState::basis(4, b)).collect();
        assert!(!check_qecc_states(&states, CODE_TOL).pass);
    }

    #[test]
    fn auxiliary_state_for_two_pairs_is_two_l() {
        let code = build_code(2, &[-1, -1]).unwrap();
        let aux = auxiliary_states(&code).unwrap();
        assert_eq!(aux.len(), 1);
        assert!(aux[0].phase_insensitive_distance(&cat("0011", "1100", 1.0)) < 1e-12);
    }

    #[test]
    fn djc_space_satisfies_condition() {
        for (n_pairs, signs) in [(2, vec![1, 1]), (3, vec![1, -1, 1])] {
            let code = build_code(n_pairs, &signs).unwrap();
            let space = djc_space(&code);
            let states: Vec<QState> = space
                .column_iter()
                .map(|c| QState::from_vector(c.into_owned()).unwrap())
                .collect();
            // half of the balanced subspace: one state per complementary pair of strings
            assert_eq!(states.len(), binomial(2 * n_pairs, n_pairs) / 2);
            assert!(check_qecc_states(&states, 1e-10).pass);
        }
    }

    #[test]
    fn document_round_trip_and_corruption() {
        let code = build_code(3, &[1, -1, 1]).unwrap();
        let doc = code.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: CodeDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(CodeSpec::from_document(&back).unwrap(), code);

        let mut bad = doc.clone();
        bad.logical_basis[1][0].0 = bad.logical_basis[0][0].0;
        let corrupted = CodeSpec::from_document(&bad).unwrap();
        assert!(!check_qecc(&corrupted, &[]).pass);
    }
}
