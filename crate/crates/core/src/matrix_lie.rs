//! Complex matrix Lie algebra arithmetic, the Levi-Civita and 't Hooft
//! symbols, and (anti-)self-dual projection of antisymmetric 2-tensors.
//!
//! All tensor indices are zero-based: spacetime indices run over `0..4`
//! (standing for x¹..x⁴) and 't Hooft colour indices over `0..3`.
//! The orientation is fixed by ε₀₁₂₃ = +1.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Values that can be added and scaled: Lie matrices, jets, Laurent modes.
pub trait LinearValue: Clone {
    fn zero_like(&self) -> Self;
    fn add_value(&self, other: &Self) -> Self;
    fn scale_value(&self, c: Complex64) -> Self;
    /// Largest absolute entry.
    fn max_norm(&self) -> f64;

    fn sub_value(&self, other: &Self) -> Self {
        self.add_value(&other.scale_value(Complex64::new(-1.0, 0.0)))
    }
}

/// A complex n×n matrix, the value type of all fields.
///
/// Tracelessness and anti-Hermiticity are checked properties rather than
/// type-level guarantees, since intermediate hidden-symmetry objects live
/// in sl(n, C).
#[derive(Clone, PartialEq)]
pub struct LieMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl LieMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix rank must be positive");
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m.data[r * n + c] = f(r, c);
            }
        }
        m
    }

    /// Row-major entries.
    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.n, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().norm() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        (self + &self.dagger()).max_abs() <= tol
    }

    /// Membership in su(n): traceless and anti-Hermitian.
    pub fn is_su(&self, tol: f64) -> bool {
        self.is_traceless(tol) && self.is_anti_hermitian(tol)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self * other)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap();
            if a[pivot * n + col].norm() < 1e-300 {
                return Err(Error::Singular);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                    inv.swap(pivot * n + k, col * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == ZERO {
                    continue;
                }
                for k in 0..n {
                    let ak = a[col * n + k];
                    let ik = inv[col * n + k];
                    a[r * n + k] -= f * ak;
                    inv[r * n + k] -= f * ik;
                }
            }
        }
        Ok(Self { n, data: inv })
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap();
            if a[pivot * n + col].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det
    }
}

impl fmt::Debug for LieMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieMatrix[")?;
        for r in 0..self.n {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.n {
                let v = self.get(r, c);
                write!(f, " {:.6}{:+.6}i", v.re, v.im)?;
            }
        }
        write!(f, " ]")
    }
}

impl Add for &LieMatrix {
    type Output = LieMatrix;
    fn add(self, rhs: &LieMatrix) -> LieMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        LieMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &LieMatrix {
    type Output = LieMatrix;
    fn sub(self, rhs: &LieMatrix) -> LieMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        LieMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &LieMatrix {
    type Output = LieMatrix;
    fn neg(self) -> LieMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &LieMatrix {
    type Output = LieMatrix;
    fn mul(self, rhs: &LieMatrix) -> LieMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = LieMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

impl LinearValue for LieMatrix {
    fn zero_like(&self) -> Self {
        LieMatrix::zeros(self.n)
    }
    fn add_value(&self, other: &Self) -> Self {
        self + other
    }
    fn scale_value(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn max_norm(&self) -> f64 {
        self.max_abs()
    }
}

/// `AB − BA`.
pub fn commutator(a: &LieMatrix, b: &LieMatrix) -> Result<LieMatrix> {
    a.check_dim(b)?;
    Ok(&(a * b) - &(b * a))
}

/// Anti-Hermitian su(2) basis `T_a = σ_a / (2i)`, normalised so that
/// `[T_a, T_b] = ε_abc T_c`.
pub fn su2_basis() -> [LieMatrix; 3] {
    let half_i = Complex64::new(0.0, -0.5);
    let s1 = LieMatrix::from_fn(2, |r, c| if r != c { ONE } else { ZERO });
    let s2 = LieMatrix::from_fn(2, |r, c| match (r, c) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    });
    let s3 = LieMatrix::from_fn(2, |r, c| match (r, c) {
        (0, 0) => ONE,
        (1, 1) => -ONE,
        _ => ZERO,
    });
    [s1.scale(half_i), s2.scale(half_i), s3.scale(half_i)]
}

/// Totally antisymmetric symbol on four indices with ε₀₁₂₃ = 1.
pub fn levi_civita4(i: usize, j: usize, k: usize, l: usize) -> i32 {
    let idx = [i, j, k, l];
    for a in 0..4 {
        assert!(idx[a] < 4, "index out of range");
        for b in a + 1..4 {
            if idx[a] == idx[b] {
                return 0;
            }
        }
    }
    let mut sign = 1;
    let mut p = idx;
    for a in 0..4 {
        for b in 0..3 - a {
            if p[b] > p[b + 1] {
                p.swap(b, b + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// Three-index symbol with ε₀₁₂ = 1.
pub fn levi_civita3(a: usize, b: usize, c: usize) -> i32 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ThooftKind {
    /// Self-dual η.
    #[serde(rename = "eta")]
    Eta,
    /// Anti-self-dual η̄.
    #[serde(rename = "eta_bar")]
    EtaBar,
}

impl ThooftKind {
    pub fn dual(self) -> Self {
        match self {
            ThooftKind::Eta => ThooftKind::EtaBar,
            ThooftKind::EtaBar => ThooftKind::Eta,
        }
    }
}

/// η^a_μν or η̄^a_μν.
///
/// Spatial block ε_abc for μ, ν < 3; the mixed entries are ±δ^a_μ when
/// ν is the fourth index, with the sign flipped for η̄.
pub fn thooft(kind: ThooftKind, a: usize, mu: usize, nu: usize) -> i32 {
    assert!(a < 3 && mu < 4 && nu < 4, "index out of range");
    let s = match kind {
        ThooftKind::Eta => 1,
        ThooftKind::EtaBar => -1,
    };
    match (mu, nu) {
        (3, 3) => 0,
        (m, 3) => s * i32::from(a == m),
        (3, n) => -s * i32::from(a == n),
        (m, n) => levi_civita3(a, m, n),
    }
}

/// Ordered index pairs μ < ν used as storage slots.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_slot(mu: usize, nu: usize) -> Option<(usize, bool)> {
    if mu == nu {
        return None;
    }
    let (lo, hi, flipped) = if mu < nu { (mu, nu, false) } else { (nu, mu, true) };
    let slot = PAIRS.iter().position(|&p| p == (lo, hi)).unwrap();
    Some((slot, flipped))
}

/// Antisymmetric 2-tensor with values in `T`, stored on the six ordered
/// pairs μ < ν.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor2Antisym<T> {
    comps: [T; 6],
}

impl<T: LinearValue> Tensor2Antisym<T> {
    pub fn from_pairs(comps: [T; 6]) -> Self {
        Self { comps }
    }

    /// Build from a function on ordered pairs μ < ν.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Self {
            comps: PAIRS.map(|(m, n)| f(m, n)),
        }
    }

    pub fn pairs(&self) -> &[T; 6] {
        &self.comps
    }

    pub fn get(&self, mu: usize, nu: usize) -> T {
        match pair_slot(mu, nu) {
            None => self.comps[0].zero_like(),
            Some((slot, false)) => self.comps[slot].clone(),
            Some((slot, true)) => self.comps[slot].scale_value(Complex64::new(-1.0, 0.0)),
        }
    }

    /// Hodge dual `½ ε_μνρσ F_ρσ`.
    pub fn hodge_dual(&self) -> Self {
        Self::from_fn(|mu, nu| {
            let mut acc = self.comps[0].zero_like();
            for (slot, &(r, s)) in PAIRS.iter().enumerate() {
                let e = levi_civita4(mu, nu, r, s);
                if e != 0 {
                    acc = acc.add_value(&self.comps[slot].scale_value(Complex64::new(e as f64, 0.0)));
                }
            }
            acc
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].add_value(&other.comps[i])),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].sub_value(&other.comps[i])),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            comps: std::array::from_fn(|i| self.comps[i].scale_value(c)),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.max_norm()).fold(0.0, f64::max)
    }

    pub fn map<U: LinearValue>(&self, f: impl FnMut(&T) -> U) -> Tensor2Antisym<U> {
        Tensor2Antisym {
            comps: self.comps.each_ref().map(f),
        }
    }
}

/// Split `F` into its self-dual and anti-self-dual parts,
/// `F⁺ = ½(F + ⋆F)` and `F⁻ = F − F⁺`.
pub fn sd_asd_project<T: LinearValue>(f: &Tensor2Antisym<T>) -> (Tensor2Antisym<T>, Tensor2Antisym<T>) {
    let half = Complex64::new(0.5, 0.0);
    let plus = f.add(&f.hodge_dual()).scale(half);
    let minus = f.sub(&plus);
    (plus, minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_su2(rng: &mut impl Rng) -> LieMatrix {
        let t = su2_basis();
        let mut m = LieMatrix::zeros(2);
        for b in &t {
            m = &m + &b.scale_real(rng.gen_range(-1.0..1.0));
        }
        m
    }

    #[test]
    fn commutator_of_self_is_zero() {
        let t = su2_basis();
        assert_eq!(commutator(&t[0], &t[0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn su2_basis_closes_with_epsilon() {
        let t = su2_basis();
        // direct multiply: T1 T2 - T2 T1
        let direct = &(&t[0] * &t[1]) - &(&t[1] * &t[0]);
        assert!((&direct - &t[2]).max_abs() < 1e-15);
        for a in 0..3 {
            for b in 0..3 {
                let lhs = commutator(&t[a], &t[b]).unwrap();
                let mut rhs = LieMatrix::zeros(2);
                for c in 0..3 {
                    rhs = &rhs + &t[c].scale_real(levi_civita3(a, b, c) as f64);
                }
                assert!((&lhs - &rhs).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn commutator_antisymmetric_and_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_su2(&mut rng);
            let b = random_su2(&mut rng);
            let ab = commutator(&a, &b).unwrap();
            let ba = commutator(&b, &a).unwrap();
            assert!((&ab + &ba).max_abs() < 1e-15);
            assert!(ab.is_su(1e-14));
        }
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let a = LieMatrix::identity(2);
        let b = LieMatrix::identity(3);
        assert!(matches!(commutator(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn thooft_table_entries() {
        // η^1_23, η^1_14, η̄^1_14, η^2_22 in one-based notation
        assert_eq!(thooft(ThooftKind::Eta, 0, 1, 2), 1);
        assert_eq!(thooft(ThooftKind::Eta, 0, 0, 3), 1);
        assert_eq!(thooft(ThooftKind::EtaBar, 0, 0, 3), -1);
        assert_eq!(thooft(ThooftKind::Eta, 1, 1, 1), 0);
    }

    #[test]
    fn thooft_duality_exhaustive() {
        for kind in [ThooftKind::Eta, ThooftKind::EtaBar] {
            let sign = if kind == ThooftKind::Eta { 1 } else { -1 };
            for a in 0..3 {
                for mu in 0..4 {
                    for nu in 0..4 {
                        assert_eq!(thooft(kind, a, mu, nu), -thooft(kind, a, nu, mu));
                        let mut dual2 = 0;
                        for r in 0..4 {
                            for s in 0..4 {
                                dual2 += levi_civita4(mu, nu, r, s) * thooft(kind, a, r, s);
                            }
                        }
                        assert_eq!(dual2, 2 * sign * thooft(kind, a, mu, nu));
                    }
                }
            }
        }
    }

    #[test]
    fn levi_civita_orientation() {
        assert_eq!(levi_civita4(0, 1, 2, 3), 1);
        assert_eq!(levi_civita4(1, 0, 2, 3), -1);
        assert_eq!(levi_civita4(0, 2, 1, 3), -1);
        assert_eq!(levi_civita4(3, 2, 1, 0), 1);
        assert_eq!(levi_civita4(0, 0, 1, 2), 0);
    }

    fn thooft_tensor(kind: ThooftKind, a: usize, t: &LieMatrix) -> Tensor2Antisym<LieMatrix> {
        Tensor2Antisym::from_fn(|m, n| t.scale_real(thooft(kind, a, m, n) as f64))
    }

    #[test]
    fn project_thooft_tensors() {
        let t = su2_basis();
        for a in 0..3 {
            let sd = thooft_tensor(ThooftKind::Eta, a, &t[1]);
            let (p, m) = sd_asd_project(&sd);
            assert!(p.sub(&sd).max_norm() < 1e-15);
            assert!(m.max_norm() < 1e-15);
            let asd = thooft_tensor(ThooftKind::EtaBar, a, &t[1]);
            let (p, m) = sd_asd_project(&asd);
            assert!(p.max_norm() < 1e-15);
            assert!(m.sub(&asd).max_norm() < 1e-15);
        }
    }

    fn random_tensor(rng: &mut impl Rng) -> Tensor2Antisym<LieMatrix> {
        Tensor2Antisym::from_fn(|_, _| random_su2(rng))
    }

    #[test]
    fn projector_identities_on_random_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = random_tensor(&mut rng);
            let (p, m) = sd_asd_project(&f);
            assert!(p.add(&m).sub(&f).max_norm() < 1e-12);
            let (pp, pm) = sd_asd_project(&p);
            assert!(pp.sub(&p).max_norm() < 1e-12);
            assert!(pm.max_norm() < 1e-12);
            let (mp, mm) = sd_asd_project(&m);
            assert!(mp.max_norm() < 1e-12);
            assert!(mm.sub(&m).max_norm() < 1e-12);
            // F⁺ = ⋆F⁺ and F⁻ = −⋆F⁻
            assert!(p.hodge_dual().sub(&p).max_norm() < 1e-12);
            assert!(m.hodge_dual().add(&m).max_norm() < 1e-12);
            for c in p.pairs().iter().chain(m.pairs()) {
                assert!(c.is_traceless(1e-12));
            }
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = LieMatrix::from_fn(3, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let inv = m.inverse().unwrap();
            assert!((&(&m * &inv) - &LieMatrix::identity(3)).max_abs() < 1e-10);
            let d = m.determinant() * inv.determinant();
            assert!((d - ONE).norm() < 1e-10);
        }
        assert!(matches!(LieMatrix::zeros(2).inverse(), Err(Error::Singular)));
    }
}
