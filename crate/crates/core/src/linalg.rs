//! Dense complex operators on one or two qubits.
//!
//! Only dimensions 2 and 4 occur in this crate, so everything is stored as a
//! flat row-major `Vec` and multiplied naively. Exponentials are taken either
//! from the Pauli closed form (2×2) or from a cyclic complex Jacobi
//! eigendecomposition (any Hermitian input).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity tolerance, relative to `max(1, |H|_max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unitarity tolerance used when validating inputs to fidelity computations.
pub const UNITARY_INPUT_TOL: f64 = 1e-9;

const JACOBI_THRESHOLD: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: if dim < 3 { 2 } else { 4 },
            found: dim,
        })
    }
}

impl Operator {
    /// # Panics
    /// If `dim` is not 2 or 4.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "operator dimension must be 2 or 4, got {dim}");
        Operator {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// # Panics
    /// If `dim` is not 2 or 4.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Operator { dim, data })
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Operator { dim, data })
    }

    pub fn diagonal(diag: &[C64]) -> Result<Self> {
        check_dim(diag.len())?;
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.max_norm().max(1.0)
    }

    /// `(H + H†)/2`.
    pub fn hermitian_part(&self) -> Operator {
        (self + &self.dagger()).scale_re(0.5)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length does not match operator");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `<v|A|v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let av = self.apply(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    /// Extracts the 2×2 submatrix on the given row/column indices.
    pub fn submatrix(&self, idx: [usize; 2]) -> Operator {
        let mut out = Operator::zeros(2);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                out[(r, c)] = self[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Operator {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_re(-1.0)
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, " ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Serialized as rows of `[re, im]` pairs.
impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut rows = serializer.serialize_seq(Some(self.dim))?;
        for i in 0..self.dim {
            let row: Vec<[f64; 2]> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    [z.re, z.im]
                })
                .collect();
            rows.serialize_element(&row)?;
        }
        rows.end()
    }
}

pub fn sigma_x() -> Operator {
    Operator::from_vec(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn sigma_y() -> Operator {
    Operator::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_vec(2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

/// `n·σ` for a real 3-vector `n` (not necessarily unit).
pub fn sigma_dot(n: [f64; 3]) -> Operator {
    let [x, y, z] = n;
    Operator::from_vec(
        2,
        vec![C64::new(z, 0.0), C64::new(x, -y), C64::new(x, y), C64::new(-z, 0.0)],
    )
    .unwrap()
}

/// `H = a0·I + ax·σx + ay·σy + az·σz`, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PauliCoeffs {
    pub a0: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl PauliCoeffs {
    pub fn new(a0: f64, ax: f64, ay: f64, az: f64) -> Self {
        PauliCoeffs { a0, ax, ay, az }
    }

    pub fn is_finite(&self) -> bool {
        self.a0.is_finite() && self.ax.is_finite() && self.ay.is_finite() && self.az.is_finite()
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.ax, self.ay, self.az]
    }

    /// Decomposes a 2×2 operator; the imaginary parts of the traces are
    /// discarded, so this is exact only for Hermitian input.
    pub fn from_operator(h: &Operator) -> Result<Self> {
        if h.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: h.dim(),
            });
        }
        let half_tr = |p: &Operator| 0.5 * (p * h).trace().re;
        Ok(PauliCoeffs {
            a0: 0.5 * h.trace().re,
            ax: half_tr(&sigma_x()),
            ay: half_tr(&sigma_y()),
            az: half_tr(&sigma_z()),
        })
    }
}

pub fn pauli_compose(c: PauliCoeffs) -> Operator {
    let mut h = sigma_dot(c.vector());
    h[(0, 0)] += c.a0;
    h[(1, 1)] += c.a0;
    h
}

/// `exp(-i(a0·I + a·σ)t)` in closed form.
pub fn expm_pauli(c: PauliCoeffs, t: f64) -> Operator {
    let [ax, ay, az] = c.vector();
    let norm = (ax * ax + ay * ay + az * az).sqrt();
    let global = C64::from_polar(1.0, -c.a0 * t);
    if norm == 0.0 {
        return Operator::identity(2).scale(global);
    }
    let (s, co) = (norm * t).sin_cos();
    let unit = [ax / norm, ay / norm, az / norm];
    let rot = &Operator::identity(2).scale_re(co) - &sigma_dot(unit).scale(I * s);
    rot.scale(global)
}

/// Eigendecomposition `H = V·diag(λ)·V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors are the columns.
    pub vectors: Operator,
}

impl HermitianEigen {
    pub fn new(h: &Operator) -> Result<Self> {
        let scale = h.max_norm().max(1.0);
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianInput { defect });
        }
        Ok(jacobi_eigen(&h.hermitian_part()))
    }

    /// `V·diag(e^{-iλt})·V†`.
    pub fn exp(&self, t: f64) -> Operator {
        let n = self.values.len();
        let phases: Vec<C64> = self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
        let v = &self.vectors;
        let mut out = Operator::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum();
            }
        }
        out
    }

    /// `exp(-iHt)·psi` without forming the full propagator.
    pub fn exp_apply(&self, t: f64, psi: &[C64]) -> Vec<C64> {
        let n = self.values.len();
        let v = &self.vectors;
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let proj: C64 = (0..n).map(|i| v[(i, k)].conj() * psi[i]).sum();
                proj * C64::from_polar(1.0, -self.values[k] * t)
            })
            .collect();
        (0..n).map(|i| (0..n).map(|k| v[(i, k)] * coeffs[k]).sum()).collect()
    }
}

fn off_diagonal_norm(a: &Operator) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn frobenius(a: &Operator) -> f64 {
    a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn jacobi_eigen(h: &Operator) -> HermitianEigen {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = Operator::identity(n);
    let threshold = JACOBI_THRESHOLD * frobenius(h).max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase_conj = (apq / r).conj();
                let zeta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let w_pp = C64::new(c, 0.0);
                let w_pq = C64::new(s, 0.0);
                let w_qp = phase_conj * (-s);
                let w_qq = phase_conj * c;

                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * w_pp + akq * w_qp;
                    a[(k, q)] = akp * w_pq + akq * w_qq;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * w_pp + vkq * w_qp;
                    v[(k, q)] = vkp * w_pq + vkq * w_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = w_pp.conj() * apk + w_qp.conj() * aqk;
                    a[(q, k)] = w_pq.conj() * apk + w_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    orthonormalize_columns(&mut v);
    HermitianEigen {
        values: (0..n).map(|k| a[(k, k)].re).collect(),
        vectors: v,
    }
}

/// Modified Gram–Schmidt, applied twice. Removes the slow loss of
/// orthogonality left by long rotation sequences, so that propagators built
/// from many steps stay unitary to rounding.
fn orthonormalize_columns(v: &mut Operator) {
    let n = v.dim();
    for _ in 0..2 {
        for k in 0..n {
            for j in 0..k {
                let proj: C64 = (0..n).map(|i| v[(i, j)].conj() * v[(i, k)]).sum();
                for i in 0..n {
                    let vij = v[(i, j)];
                    v[(i, k)] -= proj * vij;
                }
            }
            let norm = (0..n).map(|i| v[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..n {
                v[(i, k)] /= norm;
            }
        }
    }
}

/// Polar projection `U·(U†U)^{-1/2}` onto the closest unitary.
pub fn nearest_unitary(u: &Operator) -> Operator {
    let gram = (&u.dagger() * u).hermitian_part();
    let eig = jacobi_eigen(&gram);
    let n = u.dim();
    let v = &eig.vectors;
    let mut inv_sqrt = Operator::zeros(n);
    for i in 0..n {
        for j in 0..n {
            inv_sqrt[(i, j)] = (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() / eig.values[k].sqrt())
                .sum();
        }
    }
    u * &inv_sqrt
}

/// `exp(-iHt)` for Hermitian `H` of dimension 2 or 4.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    Ok(HermitianEigen::new(h)?.exp(t))
}

/// Tensor product with `a` as the left (most significant) factor.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    for m in [a, b] {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
    }
    let mut out = Operator::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Max-norm of `U†U − I`.
pub fn unitarity_defect(u: &Operator) -> f64 {
    (&(&u.dagger() * u) - &Operator::identity(u.dim())).max_norm()
}

/// `|Tr(U†V)| / d`, blind to global phase.
pub fn gate_fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    for m in [u, v] {
        let defect = unitarity_defect(m);
        if defect > UNITARY_INPUT_TOL {
            return Err(Error::NonUnitaryInput { defect });
        }
    }
    let f = (&u.dagger() * v).trace().norm() / u.dim() as f64;
    Ok(f.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn compose_zero_and_sigma_z() {
        assert_eq!(pauli_compose(PauliCoeffs::default()), Operator::zeros(2));
        let j = 1.7;
        let h = pauli_compose(PauliCoeffs::new(0.0, 0.0, 0.0, j));
        assert_eq!(h, Operator::diagonal(&[c(j, 0.0), c(-j, 0.0)]).unwrap());
    }

    #[test]
    fn compose_x_plus_y_entrywise() {
        // σx + σy = [[0, 1 - i], [1 + i, 0]]
        let h = pauli_compose(PauliCoeffs::new(0.0, 1.0, 1.0, 0.0));
        let expected = Operator::from_rows(&[&[c(0.0, 0.0), c(1.0, -1.0)], &[c(1.0, 1.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(h, expected);
        assert!(h.is_hermitian());
    }

    #[test]
    fn expm_pauli_quarter_period_is_minus_i_sigma_z() {
        let j = 2.3;
        let u = expm_pauli(PauliCoeffs::new(0.0, 0.0, 0.0, j), PI / (2.0 * j));
        assert!(u.approx_eq(&sigma_z().scale(-I), 1e-12));
        let via_eigen = expm_hermitian(&pauli_compose(PauliCoeffs::new(0.0, 0.0, 0.0, j)), PI / (2.0 * j)).unwrap();
        assert!(u.approx_eq(&via_eigen, 1e-12));
    }

    #[test]
    fn expm_pauli_pi_pulse_about_x() {
        let omega = 5.0;
        let u = expm_pauli(PauliCoeffs::new(0.0, omega / 2.0, 0.0, 0.0), PI / omega);
        assert!(u.approx_eq(&sigma_x().scale(-I), 1e-12));
    }

    #[test]
    fn expm_of_zero_is_identity() {
        assert!(expm_pauli(PauliCoeffs::default(), 3.0).approx_eq(&Operator::identity(2), 0.0));
        let u = expm_hermitian(&Operator::zeros(4), 11.0).unwrap();
        assert!(u.approx_eq(&Operator::identity(4), 0.0));
    }

    #[test]
    fn expm_diagonal() {
        let h = [0.3, -1.2, 2.5, 0.0];
        let t = 0.77;
        let diag: Vec<C64> = h.iter().map(|&x| c(x, 0.0)).collect();
        let u = expm_hermitian(&Operator::diagonal(&diag).unwrap(), t).unwrap();
        let expected: Vec<C64> = h.iter().map(|&x| C64::from_polar(1.0, -x * t)).collect();
        assert!(u.approx_eq(&Operator::diagonal(&expected).unwrap(), 1e-15));
    }

    #[test]
    fn expm_zz_coupling_quarter_period() {
        let j = 0.9;
        let zz = kron(&sigma_z(), &sigma_z()).unwrap().scale_re(0.5 * j);
        let u = expm_hermitian(&zz, PI / (2.0 * j)).unwrap();
        let m = C64::from_polar(1.0, -PI / 4.0);
        let p = C64::from_polar(1.0, PI / 4.0);
        assert!(u.approx_eq(&Operator::diagonal(&[m, p, p, m]).unwrap(), 1e-12));
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = Operator::zeros(2);
        h[(0, 1)] = ONE;
        assert!(matches!(expm_hermitian(&h, 1.0), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn jacobi_handles_degenerate_spectrum() {
        // σx⊗σx has eigenvalues {1, 1, -1, -1}.
        let xx = kron(&sigma_x(), &sigma_x()).unwrap();
        let eig = HermitianEigen::new(&xx).unwrap();
        let mut vals = eig.values.clone();
        vals.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        // exp(-i π/2 XX) = -i XX
        let u = eig.exp(PI / 2.0);
        assert!(u.approx_eq(&xx.scale(-I), 1e-12));
    }

    #[test]
    fn kron_basics() {
        assert_eq!(
            kron(&Operator::identity(2), &Operator::identity(2)).unwrap(),
            Operator::identity(4)
        );
        let zz = kron(&sigma_z(), &sigma_z()).unwrap();
        assert_eq!(zz, Operator::diagonal(&[ONE, -ONE, -ONE, ONE]).unwrap());
        // σx⊗I swaps the a-index: (0,2), (1,3), (2,0), (3,1) are the only ones.
        let xi = kron(&sigma_x(), &Operator::identity(2)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 2) || (i, j) == (1, 3) || (i, j) == (2, 0) || (i, j) == (3, 1) {
                    ONE
                } else {
                    ZERO
                };
                assert_eq!(xi[(i, j)], expected, "entry ({i},{j})");
            }
        }
        assert!(matches!(kron(&xi, &sigma_x()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_cases() {
        let id = Operator::identity(4);
        let xi = kron(&sigma_x(), &Operator::identity(2)).unwrap();
        assert!((gate_fidelity(&xi, &xi).unwrap() - 1.0).abs() < 1e-15);
        assert!(gate_fidelity(&id, &xi).unwrap().abs() < 1e-15);
        let phased = id.scale(C64::from_polar(1.0, 0.731));
        assert!((gate_fidelity(&id, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            gate_fidelity(&id, &Operator::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            gate_fidelity(&id, &id.scale_re(2.0)),
            Err(Error::NonUnitaryInput { .. })
        ));
    }

    #[test]
    fn unitarity_defect_cases() {
        assert_eq!(unitarity_defect(&Operator::identity(2)), 0.0);
        assert_eq!(unitarity_defect(&Operator::identity(4).scale_re(2.0)), 3.0);
    }

    #[test]
    fn pauli_decomposition_round_trip() {
        let c0 = PauliCoeffs::new(0.25, -1.0, 0.5, 2.0);
        let back = PauliCoeffs::from_operator(&pauli_compose(c0)).unwrap();
        assert!((back.a0 - c0.a0).abs() < 1e-15);
        assert!((back.ax - c0.ax).abs() < 1e-15);
        assert!((back.ay - c0.ay).abs() < 1e-15);
        assert!((back.az - c0.az).abs() < 1e-15);
    }

    #[test]
    fn nearest_unitary_repairs_small_defects() {
        let u = expm_pauli(PauliCoeffs::new(0.3, 0.2, -0.5, 0.9), 1.1);
        assert!(nearest_unitary(&u).approx_eq(&u, 1e-14));
        // a slightly stretched unitary is pulled back onto U(2)
        let stretched = u.scale_re(1.0 + 1e-9);
        let fixed = nearest_unitary(&stretched);
        assert!(unitarity_defect(&fixed) < 1e-15);
        assert!(fixed.approx_eq(&u, 1e-14));
    }
}
