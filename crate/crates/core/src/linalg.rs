//! Dense complex matrices, Pauli-sum observables and a Hermitian eigensolver.
//!
//! Qubit ordering is big-endian throughout: qubit 0 is the leftmost tensor
//! factor, so it maps to the most significant bit of a basis-state index.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense routines accept.
pub const MAX_QUBITS: usize = 10;

const HERMITIAN_TOL: f64 = 1e-12;

/// Bit mask selecting `qubit` inside a basis index of an `n_qubits` register.
#[inline]
pub(crate) fn qubit_mask(qubit: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Outer product |v⟩⟨v|.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = v[r] * v[c].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = Self::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        m[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max_{ij} |A_ij − conj(A_ji)|, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.is_hermitian() {
            let eig = eigh(self, false)?;
            let lo = eig.values.first().copied().unwrap_or(0.0);
            let hi = eig.values.last().copied().unwrap_or(0.0);
            return Ok(lo.abs().max(hi.abs()));
        }
        let gram = self.adjoint().matmul(self)?;
        let eig = eigh(&symmetrize(&gram), false)?;
        Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for r in 0..m.rows {
        for c in 0..m.cols {
            out[(r, c)] = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
        }
    }
    out
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigen-decomposition of a Hermitian matrix; values ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// One column per eigenvalue when requested, empty otherwise.
    pub vectors: Vec<Vec<Complex64>>,
}

/// Hermitian eigensolver: Householder tridiagonalisation followed by implicit
/// QL iterations. Complex input is handled through the real symmetric
/// embedding `[[Re A, -Im A], [Im A, Re A]]`, whose spectrum is that of `A`
/// with every eigenvalue doubled.
pub fn eigh(m: &ComplexMatrix, want_vectors: bool) -> Result<Eigh> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: vec![],
        });
    }
    let real = m.as_slice().iter().all(|z| z.im == 0.0);
    if real {
        let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| m[(r, c)].re).collect()).collect();
        let (values, vecs) = symmetric_eigen(&mut a, want_vectors);
        let vectors = vecs
            .map(|v| {
                (0..n)
                    .map(|k| (0..n).map(|i| Complex64::new(v[i][k], 0.0)).collect())
                    .collect()
            })
            .unwrap_or_default();
        return Ok(Eigh { values, vectors });
    }

    let n2 = 2 * n;
    let mut a = vec![vec![0.0; n2]; n2];
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            a[r][c] = z.re;
            a[r + n][c + n] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
        }
    }
    let (values2, vecs) = symmetric_eigen(&mut a, want_vectors);
    // Eigenvalues come in exact pairs; keep every other one.
    let values: Vec<f64> = values2.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let vectors = match vecs {
        None => vec![],
        Some(v) => {
            let mut out = Vec::with_capacity(n);
            for pair in 0..n {
                // Of the two embedded vectors, take the one with the larger
                // complex-lift norm for numerical safety.
                let best = [2 * pair, 2 * pair + 1]
                    .into_iter()
                    .map(|k| {
                        let z: Vec<Complex64> = (0..n).map(|i| Complex64::new(v[i][k], v[i + n][k])).collect();
                        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                        (norm, z)
                    })
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .expect("two candidates");
                let (norm, z) = best;
                out.push(z.into_iter().map(|c| c / norm).collect());
            }
            out
        }
    };
    Ok(Eigh { values, vectors })
}

/// Real symmetric eigen-decomposition (tred2 + tql2). Returns ascending
/// eigenvalues and, optionally, the eigenvector matrix with eigenvectors as
/// columns.
fn symmetric_eigen(a: &mut [Vec<f64>], want_vectors: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    let n = a.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(a, &mut d, &mut e, want_vectors);
    tql2(a, &mut d, &mut e, want_vectors);
    (d, want_vectors.then(|| a.to_vec()))
}

// Householder reduction to tridiagonal form. On return `v` holds the
// accumulated orthogonal transform when `vectors` is set.
fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], vectors: bool) {
    let n = v.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    if vectors {
        for i in 0..n.saturating_sub(1) {
            v[n - 1][i] = v[i][i];
            v[i][i] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[k][i + 1] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[k][i + 1] * v[k][j];
                    }
                    for k in 0..=i {
                        v[k][j] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[k][i + 1] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[n - 1][j];
            v[n - 1][j] = 0.0;
        }
        v[n - 1][n - 1] = 1.0;
    } else {
        // The tridiagonal diagonal sits on the diagonal of the reduced matrix.
        for j in 0..n {
            d[j] = v[j][j];
        }
    }
    e[0] = 0.0;
}

// Symmetric tridiagonal QL with implicit shifts.
fn tql2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], vectors: bool) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for row in v.iter_mut() {
                            h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps the eigenvector columns aligned.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if vectors {
                for row in v.iter_mut() {
                    row.swap(i, k);
                }
            }
        }
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![one, o, o, one],
            Pauli::X => vec![o, one, one, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![one, o, o, -one],
        };
        ComplexMatrix::from_vec(2, 2, data).expect("2x2")
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A real coefficient times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub operators: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, operators: impl Into<Vec<(usize, Pauli)>>) -> Self {
        Self {
            coefficient,
            operators: operators.into(),
        }
    }

    pub fn identity(coefficient: f64) -> Self {
        Self::new(coefficient, Vec::new())
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut seen = 0u64;
        for &(q, _) in &self.operators {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }
}

/// Pauli string compiled to bit masks: `P|c⟩ = phase(c) |c ^ flip⟩`.
#[derive(Debug, Clone, Copy)]
struct CompiledTerm {
    coefficient: f64,
    flip: usize,
    z_mask: usize,
    y_mask: usize,
    y_count: u32,
}

impl CompiledTerm {
    fn new(term: &PauliTerm, n_qubits: usize) -> Self {
        let mut flip = 0;
        let mut z_mask = 0;
        let mut y_mask = 0;
        let mut y_count = 0;
        for &(q, p) in &term.operators {
            let m = qubit_mask(q, n_qubits);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= m,
                Pauli::Y => {
                    flip |= m;
                    y_mask |= m;
                    y_count += 1;
                }
                Pauli::Z => z_mask |= m,
            }
        }
        Self {
            coefficient: term.coefficient,
            flip,
            z_mask,
            y_mask,
            y_count,
        }
    }

    /// Matrix element ⟨row|P|row ^ flip⟩.
    ///
    /// Y = [[0, -i], [i, 0]] contributes `i` when the row bit is 1 and `-i`
    /// when it is 0; Z contributes `(-1)^bit`.
    #[inline]
    fn element(&self, row: usize) -> Complex64 {
        let mut sign = (row & self.z_mask).count_ones();
        // i^{y_count} · (-1)^{#Y with row bit 0}
        let y_zero = self.y_count - (row & self.y_mask).count_ones();
        sign += y_zero;
        let phase = match self.y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if sign % 2 == 1 {
            -phase
        } else {
            phase
        }
    }
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Debug)]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    compiled: Vec<CompiledTerm>,
    dense: OnceLock<ComplexMatrix>,
}

impl Clone for Observable {
    fn clone(&self) -> Self {
        let dense = OnceLock::new();
        if let Some(m) = self.dense.get() {
            let _ = dense.set(m.clone());
        }
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.clone(),
            compiled: self.compiled.clone(),
            dense,
        }
    }
}

/// Validates `terms` and assembles an observable on `n_qubits` qubits.
pub fn build_observable(terms: Vec<PauliTerm>, n_qubits: usize) -> Result<Observable> {
    Observable::new(terms, n_qubits)
}

impl Observable {
    pub fn new(terms: Vec<PauliTerm>, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("observable needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        if terms.is_empty() {
            return Err(Error::EmptyTerms);
        }
        for t in &terms {
            t.validate(n_qubits)?;
            if !t.coefficient.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let compiled = terms.iter().map(|t| CompiledTerm::new(t, n_qubits)).collect();
        Ok(Self {
            n_qubits,
            terms,
            compiled,
            dense: OnceLock::new(),
        })
    }

    /// `I_{2^(N-1)} ⊗ |0⟩⟨0|` style projector onto |0⟩ of `qubit`, written as (I + Z)/2.
    pub fn zero_projector(qubit: usize, n_qubits: usize) -> Result<Self> {
        Self::new(
            vec![PauliTerm::identity(0.5), PauliTerm::new(0.5, vec![(qubit, Pauli::Z)])],
            n_qubits,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Σ|c_t|, an upper bound on the operator norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Tr(O), nonzero only through identity components.
    pub fn trace(&self) -> f64 {
        let dim = self.dim() as f64;
        self.compiled
            .iter()
            .filter(|t| t.flip == 0 && t.z_mask == 0)
            .map(|t| t.coefficient * dim)
            .sum()
    }

    /// Dense realisation, built once and cached.
    pub fn dense(&self) -> &ComplexMatrix {
        self.dense.get_or_init(|| {
            let dim = self.dim();
            let mut m = ComplexMatrix::zeros(dim, dim);
            for t in &self.compiled {
                for row in 0..dim {
                    m[(row, row ^ t.flip)] += t.element(row) * t.coefficient;
                }
            }
            m
        })
    }

    /// ⟨ψ|O|ψ⟩ evaluated term by term without materialising O.
    pub fn expectation_state(&self, amps: &[Complex64]) -> f64 {
        debug_assert_eq!(amps.len(), self.dim());
        let mut total = 0.0;
        for t in &self.compiled {
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, a) in amps.iter().enumerate() {
                acc += a.conj() * t.element(row) * amps[row ^ t.flip];
            }
            total += t.coefficient * acc.re;
        }
        total
    }

    /// Tr(Oρ) for a row-major density matrix.
    pub fn expectation_density(&self, rho: &ComplexMatrix) -> f64 {
        let mut total = 0.0;
        for t in &self.compiled {
            // Tr(Pρ) = Σ_r P[r, r^f] ρ[r^f, r]
            let acc: Complex64 = (0..rho.rows()).map(|r| t.element(r) * rho[(r ^ t.flip, r)]).sum();
            total += t.coefficient * acc.re;
        }
        total
    }

    pub fn operator_norm(&self) -> Result<f64> {
        self.dense().operator_norm()
    }

    /// (λ_min, λ_max) of the dense realisation.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        let eig = eigh(self.dense(), false)?;
        Ok((eig.values[0], *eig.values.last().expect("non-empty")))
    }

    /// Full eigen-decomposition, ascending.
    pub fn eigh(&self, want_vectors: bool) -> Result<Eigh> {
        eigh(self.dense(), want_vectors)
    }
}

/// Free-function form of [`Observable::operator_norm`].
pub fn operator_norm(obs: &Observable) -> Result<f64> {
    obs.operator_norm()
}

/// Free-function form of [`Observable::extreme_eigenvalues`].
pub fn extreme_eigenvalues(obs: &Observable) -> Result<(f64, f64)> {
    obs.extreme_eigenvalues()
}
