//! Exact sparse polynomials in up to five variables and exact linear
//! algebra over a field. Used for conformal vector fields and their lifts.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

/// Exact complex rational.
pub type Cq = Complex<Rational64>;

pub const NVARS: usize = 5;
pub type Exps = [u8; NVARS];

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + fmt::Debug
{
    fn from_int(v: i64) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Coeff for Rational64 {
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap(), 0.0)
    }
}

impl Coeff for Cq {
    fn from_int(v: i64) -> Self {
        Cq::new(Rational64::from_integer(v), Rational64::zero())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

pub fn cq(re: i64, im: i64) -> Cq {
    Cq::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

pub fn half() -> Rational64 {
    Rational64::new(1, 2)
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Poly<R: Coeff> {
    terms: BTreeMap<Exps, R>,
}

impl<R: Coeff> Default for Poly<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Coeff> fmt::Debug for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("{c:?}*{e:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<R: Coeff> Poly<R> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: R) -> Self {
        Self::monomial(c, [0; NVARS])
    }

    pub fn monomial(c: R, e: Exps) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    pub fn var(v: usize) -> Self {
        let mut e = [0; NVARS];
        e[v] = 1;
        Self::monomial(R::one(), e)
    }

    pub fn add_term(&mut self, e: Exps, c: R) {
        let entry = self.terms.entry(e).or_insert_with(R::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &R)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exps) -> R {
        self.terms.get(e).cloned().unwrap_or_else(R::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .max()
    }

    /// Largest exponent of variable `v`.
    pub fn degree_in(&self, v: usize) -> Option<u8> {
        self.terms.keys().map(|e| e[v]).max()
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut p = Self::zero();
        for (e, v) in &self.terms {
            p.add_term(*e, v.clone() * c.clone());
        }
        p
    }

    pub fn derive(&self, v: usize) -> Self {
        let mut p = Self::zero();
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut lower = *e;
            lower[v] -= 1;
            p.add_term(lower, c.clone() * R::from_int(e[v] as i64));
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(R::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Replace every variable `v` by `subs[v]`.
    pub fn substitute(&self, subs: &[Poly<R>; NVARS]) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let mut t = Self::constant(c.clone());
            for v in 0..NVARS {
                if e[v] > 0 {
                    t = &t * &subs[v].pow(e[v] as u32);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn map_coeffs<S: Coeff>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        let mut p = Poly::zero();
        for (e, c) in &self.terms {
            p.add_term(*e, f(c));
        }
        p
    }

    pub fn eval(&self, vals: &[Complex64; NVARS]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = c.to_c64();
                for v in 0..NVARS {
                    m *= vals[v].powu(e[v] as u32);
                }
                m
            })
            .sum()
    }
}

impl<R: Coeff> Add for &Poly<R> {
    type Output = Poly<R>;
    fn add(self, rhs: &Poly<R>) -> Poly<R> {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(*e, c.clone());
        }
        p
    }
}

impl<R: Coeff> Sub for &Poly<R> {
    type Output = Poly<R>;
    fn sub(self, rhs: &Poly<R>) -> Poly<R> {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(*e, -c.clone());
        }
        p
    }
}

impl<R: Coeff> Neg for &Poly<R> {
    type Output = Poly<R>;
    fn neg(self) -> Poly<R> {
        self.scale(&-R::one())
    }
}

impl<R: Coeff> Mul for &Poly<R> {
    type Output = Poly<R>;
    fn mul(self, rhs: &Poly<R>) -> Poly<R> {
        let mut p = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exps = std::array::from_fn(|v| ea[v] + eb[v]);
                p.add_term(e, ca.clone() * cb.clone());
            }
        }
        p
    }
}

pub fn to_complex(p: &Poly<Rational64>) -> Poly<Cq> {
    p.map_coeffs(|c| Cq::new(*c, Rational64::zero()))
}

/// Gaussian elimination to reduced row echelon form in place; returns the
/// pivot columns.
fn rref<R: Coeff + std::ops::Div<Output = R>>(rows: &mut [Vec<R>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = R::one() / rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..rows[i].len() {
                    let sub = f.clone() * rows[r][k].clone();
                    rows[i][k] = rows[i][k].clone() - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank of a list of row vectors.
pub fn rank<R: Coeff + std::ops::Div<Output = R>>(rows: &[Vec<R>]) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Outcome of an exact linear solve `M u = b`.
#[derive(Debug, PartialEq)]
pub enum Solve<R> {
    Unique(Vec<R>),
    Inconsistent,
    Underdetermined(usize),
}

/// Solve a linear system given as augmented rows `[m_0 .. m_{k-1} | b]`.
pub fn solve_exact<R: Coeff + std::ops::Div<Output = R>>(aug: &[Vec<R>], unknowns: usize) -> Solve<R> {
    let mut m = aug.to_vec();
    let pivots = rref(&mut m, unknowns + 1);
    if pivots.contains(&unknowns) {
        return Solve::Inconsistent;
    }
    if pivots.len() < unknowns {
        return Solve::Underdetermined(unknowns - pivots.len());
    }
    let mut u = vec![R::zero(); unknowns];
    for (r, &c) in pivots.iter().enumerate() {
        u[c] = m[r][unknowns].clone();
    }
    Solve::Unique(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Rational64;

    fn q(v: i64) -> Q {
        Q::from_integer(v)
    }

    #[test]
    fn product_and_derivative() {
        let x = Poly::<Q>::var(0);
        let y = Poly::<Q>::var(1);
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p, &(&x * &x) - &(&y * &y));
        assert_eq!(p.derive(0), x.scale(&q(2)));
        assert_eq!(p.degree(), Some(2));
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn substitution() {
        let x = Poly::<Q>::var(0);
        let y = Poly::<Q>::var(1);
        let subs = [
            &y + &Poly::constant(q(1)),
            x.clone(),
            Poly::var(2),
            Poly::var(3),
            Poly::var(4),
        ];
        let p = &x * &x;
        let s = p.substitute(&subs);
        let expect = &(&(&y * &y) + &y.scale(&q(2))) + &Poly::constant(q(1));
        assert_eq!(s, expect);
    }

    #[test]
    fn exact_solve_and_rank() {
        let rows = vec![vec![q(1), q(2), q(5)], vec![q(3), q(-1), q(1)]];
        assert_eq!(solve_exact(&rows, 2), Solve::Unique(vec![q(1), q(2)]));
        let bad = vec![vec![q(1), q(1), q(1)], vec![q(2), q(2), q(3)]];
        assert_eq!(solve_exact(&bad, 2), Solve::Inconsistent);
        let free = vec![vec![q(1), q(1), q(1)]];
        assert_eq!(solve_exact(&free, 2), Solve::Underdetermined(1));
        assert_eq!(rank(&[vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
    }

    #[test]
    fn complex_evaluation() {
        let p = Poly::<Cq>::var(0).scale(&cq(0, 1));
        let v = p.eval(&[Complex64::new(2.0, 0.0), Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default()]);
        assert_eq!(v, Complex64::new(0.0, 2.0));
    }
}
