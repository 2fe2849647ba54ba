//! Truncated multivariate power series in four variables with matrix
//! coefficients.
//!
//! A [`Jet`] is the Taylor data of a field around a base point, known up
//! to total degree `order`. Everything past `order` is unknown, and every
//! operation propagates that knowledge exactly: a product is valid to
//! `min(o_f + v_g, o_g + v_f)` where `v` is the valuation (lowest degree
//! that may be nonzero), a derivative loses one degree, an antiderivative
//! gains one. An order of `-1` means nothing is known.
//!
//! Two variable frames exist. The real frame uses `uᵘ = xᵘ − x₀ᵘ`; the
//! complex frame uses `(y, ȳ, z, z̄)` relative to the base point with
//! `y = x¹ + i x²`, `z = x³ − i x⁴`, all four treated as independent.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix_lie::{LieMatrix, LinearValue};

/// Largest total degree any jet may carry.
pub const MAX_ORDER: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Variables u¹..u⁴.
    Real,
    /// Variables y, ȳ, z, z̄ (indices 0..4 in that order).
    Complex,
}

/// A differentiation direction: a real coordinate xᵘ (zero-based) or one
/// of the complex coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    X(usize),
    Y,
    Ybar,
    Z,
    Zbar,
}

impl Coord {
    pub const COMPLEX: [Coord; 4] = [Coord::Y, Coord::Ybar, Coord::Z, Coord::Zbar];
    pub const REAL: [Coord; 4] = [Coord::X(0), Coord::X(1), Coord::X(2), Coord::X(3)];

    /// The derivative along `self` as a combination of ∂/∂(frame variable).
    pub fn in_frame(self, frame: Frame) -> [Complex64; 4] {
        let h = 0.5;
        match (frame, self) {
            (Frame::Complex, Coord::Y) => [ONE, ZERO, ZERO, ZERO],
            (Frame::Complex, Coord::Ybar) => [ZERO, ONE, ZERO, ZERO],
            (Frame::Complex, Coord::Z) => [ZERO, ZERO, ONE, ZERO],
            (Frame::Complex, Coord::Zbar) => [ZERO, ZERO, ZERO, ONE],
            (Frame::Complex, Coord::X(0)) => [ONE, ONE, ZERO, ZERO],
            (Frame::Complex, Coord::X(1)) => [I, -I, ZERO, ZERO],
            (Frame::Complex, Coord::X(2)) => [ZERO, ZERO, ONE, ONE],
            (Frame::Complex, Coord::X(3)) => [ZERO, ZERO, -I, I],
            (Frame::Real, Coord::X(m)) => {
                let mut c = [ZERO; 4];
                c[m] = ONE;
                c
            }
            (Frame::Real, Coord::Y) => [ONE * h, -I * h, ZERO, ZERO],
            (Frame::Real, Coord::Ybar) => [ONE * h, I * h, ZERO, ZERO],
            (Frame::Real, Coord::Z) => [ZERO, ZERO, ONE * h, I * h],
            (Frame::Real, Coord::Zbar) => [ZERO, ZERO, ONE * h, -I * h],
            (_, Coord::X(m)) => panic!("coordinate index {m} out of range"),
        }
    }

    /// Frame variable index when `self` is one of the frame's own variables.
    pub fn frame_var(self, frame: Frame) -> Option<usize> {
        match (frame, self) {
            (Frame::Real, Coord::X(m)) => Some(m),
            (Frame::Complex, Coord::Y) => Some(0),
            (Frame::Complex, Coord::Ybar) => Some(1),
            (Frame::Complex, Coord::Z) => Some(2),
            (Frame::Complex, Coord::Zbar) => Some(3),
            _ => None,
        }
    }
}

/// Graded monomial table shared by all jets.
struct Basis {
    exps: Vec<[u8; 4]>,
    /// `offset[d]` = number of monomials of degree < d.
    offset: Vec<usize>,
    lookup: Vec<u16>,
}

const SIDE: usize = MAX_ORDER + 1;

impl Basis {
    fn build() -> Self {
        let mut exps = Vec::new();
        let mut offset = vec![0];
        for d in 0..=MAX_ORDER {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    for c in (0..=d - a - b).rev() {
                        exps.push([a as u8, b as u8, c as u8, (d - a - b - c) as u8]);
                    }
                }
            }
            offset.push(exps.len());
        }
        let mut lookup = vec![u16::MAX; SIDE.pow(4)];
        for (i, e) in exps.iter().enumerate() {
            lookup[Self::key(e)] = i as u16;
        }
        Self {
            exps,
            offset,
            lookup,
        }
    }

    #[inline]
    fn key(e: &[u8; 4]) -> usize {
        ((e[0] as usize * SIDE + e[1] as usize) * SIDE + e[2] as usize) * SIDE + e[3] as usize
    }

    #[inline]
    fn index(&self, e: &[u8; 4]) -> usize {
        self.lookup[Self::key(e)] as usize
    }

    #[inline]
    fn count(&self, order: i32) -> usize {
        if order < 0 {
            0
        } else {
            self.offset[order as usize + 1]
        }
    }
}

fn basis() -> &'static Basis {
    static B: OnceLock<Basis> = OnceLock::new();
    B.get_or_init(Basis::build)
}

/// Number of monomials of total degree ≤ `order`.
pub fn monomial_count(order: i32) -> usize {
    basis().count(order)
}

/// Exponent tuples of total degree ≤ `order`, in graded order.
pub fn monomials(order: i32) -> &'static [[u8; 4]] {
    let b = basis();
    &b.exps[..b.count(order)]
}

fn degree(e: &[u8; 4]) -> usize {
    e.iter().map(|&v| v as usize).sum()
}

/// Truncated power series around `base` with n×n complex coefficients
/// (n = 1 for scalar jets).
#[derive(Clone, PartialEq)]
pub struct Jet {
    frame: Frame,
    base: [f64; 4],
    n: usize,
    order: i32,
    data: Vec<Complex64>,
}

impl Jet {
    pub fn zero(frame: Frame, base: [f64; 4], n: usize, order: i32) -> Self {
        assert!(order >= -1 && order <= MAX_ORDER as i32, "jet order {order} out of range");
        assert!(n > 0);
        Self {
            frame,
            base,
            n,
            order,
            data: vec![ZERO; basis().count(order) * n * n],
        }
    }

    pub fn constant(frame: Frame, base: [f64; 4], value: &LieMatrix, order: i32) -> Self {
        let mut j = Self::zero(frame, base, value.n(), order);
        if order >= 0 {
            j.data[..value.n() * value.n()].copy_from_slice(value.as_slice());
        }
        j
    }

    pub fn scalar(frame: Frame, base: [f64; 4], value: Complex64, order: i32) -> Self {
        let mut j = Self::zero(frame, base, 1, order);
        if order >= 0 {
            j.data[0] = value;
        }
        j
    }

    /// The scalar jet of frame variable `var` (relative to the base point).
    pub fn variable(frame: Frame, base: [f64; 4], var: usize, order: i32) -> Self {
        let mut j = Self::zero(frame, base, 1, order);
        if order >= 1 {
            let mut e = [0u8; 4];
            e[var] = 1;
            j.data[basis().index(&e)] = ONE;
        }
        j
    }

    /// The scalar jet of the global coordinate `c`: xᵘ itself for
    /// `Coord::X(μ)`, or y, ȳ, z, z̄.
    pub fn coordinate(frame: Frame, base: [f64; 4], c: Coord, order: i32) -> Self {
        // value and linear form of c in terms of real coordinates
        let real: [Complex64; 4] = match c {
            Coord::X(m) => {
                let mut r = [ZERO; 4];
                r[m] = ONE;
                r
            }
            Coord::Y => [ONE, I, ZERO, ZERO],
            Coord::Ybar => [ONE, -I, ZERO, ZERO],
            Coord::Z => [ZERO, ZERO, ONE, -I],
            Coord::Zbar => [ZERO, ZERO, ONE, I],
        };
        let value: Complex64 = (0..4).map(|m| real[m] * base[m]).sum();
        let mut j = Self::scalar(frame, base, value, order);
        if order < 1 {
            return j;
        }
        // linear part in frame variables
        let lin: [Complex64; 4] = match frame {
            Frame::Real => real,
            Frame::Complex => {
                // u1 = (Y+Ȳ)/2, u2 = -i(Y-Ȳ)/2, u3 = (Z+Z̄)/2, u4 = i(Z-Z̄)/2
                let u: [[Complex64; 4]; 4] = [
                    [ONE * 0.5, ONE * 0.5, ZERO, ZERO],
                    [-I * 0.5, I * 0.5, ZERO, ZERO],
                    [ZERO, ZERO, ONE * 0.5, ONE * 0.5],
                    [ZERO, ZERO, I * 0.5, -I * 0.5],
                ];
                std::array::from_fn(|v| (0..4).map(|m| real[m] * u[m][v]).sum())
            }
        };
        for (v, c) in lin.iter().enumerate() {
            let mut e = [0u8; 4];
            e[v] = 1;
            j.data[basis().index(&e)] = *c;
        }
        j
    }

    /// Scalar jet times a constant matrix.
    pub fn scalar_times(scalar: &Jet, m: &LieMatrix) -> Jet {
        assert_eq!(scalar.n, 1, "expected a scalar jet");
        let n = m.n();
        let mut out = Jet::zero(scalar.frame, scalar.base, n, scalar.order);
        for (k, s) in scalar.data.iter().enumerate() {
            if *s == ZERO {
                continue;
            }
            for (o, v) in out.data[k * n * n..(k + 1) * n * n].iter_mut().zip(m.as_slice()) {
                *o = s * v;
            }
        }
        out
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn base(&self) -> [f64; 4] {
        self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    fn block(&self) -> usize {
        self.n * self.n
    }

    pub fn coeff(&self, exps: [u8; 4]) -> LieMatrix {
        let d = degree(&exps) as i32;
        if d > self.order {
            return LieMatrix::zeros(self.n);
        }
        let k = basis().index(&exps);
        let b = self.block();
        LieMatrix::from_row_major(self.n, self.data[k * b..(k + 1) * b].to_vec()).unwrap()
    }

    pub fn set_coeff(&mut self, exps: [u8; 4], value: &LieMatrix) {
        assert_eq!(value.n(), self.n);
        let d = degree(&exps) as i32;
        assert!(d <= self.order, "degree {d} beyond jet order {}", self.order);
        let k = basis().index(&exps);
        let b = self.block();
        self.data[k * b..(k + 1) * b].copy_from_slice(value.as_slice());
    }

    /// Constant term.
    pub fn value_at_base(&self) -> LieMatrix {
        if self.order < 0 {
            return LieMatrix::zeros(self.n);
        }
        self.coeff([0; 4])
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.data
    }

    fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        let b = basis();
        b.offset[d] * self.block()..b.offset[d + 1] * self.block()
    }

    /// Coefficients of the homogeneous degree-`d` part (empty if unknown).
    pub fn degree_part(&self, d: usize) -> &[Complex64] {
        if d as i32 > self.order {
            return &[];
        }
        &self.data[self.degree_range(d)]
    }

    /// Lowest degree that may be nonzero, counting the unknown tail:
    /// the first degree with a nonzero known coefficient, or `order + 1`.
    pub fn valuation(&self) -> i32 {
        for d in 0..=self.order.max(-1) {
            if self.degree_part(d as usize).iter().any(|c| *c != ZERO) {
                return d;
            }
        }
        self.order + 1
    }

    pub fn truncate(&self, order: i32) -> Jet {
        let order = order.min(self.order);
        let mut j = Jet::zero(self.frame, self.base, self.n, order);
        let len = j.data.len();
        j.data.copy_from_slice(&self.data[..len]);
        j
    }

    /// Largest absolute coefficient entry over the known part.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn compatible(&self, other: &Jet) -> bool {
        self.frame == other.frame && self.base == other.base
    }

    fn check(&self, other: &Jet) -> Result<()> {
        if !self.compatible(other) {
            return Err(Error::FrameMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check(other)?;
        if self.n != other.n && self.n != 1 && other.n != 1 {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self * other)
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        let mut j = self.clone();
        for v in &mut j.data {
            *v *= c;
        }
        j
    }

    pub fn scale_real(&self, c: f64) -> Jet {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Product truncated to at most `cap`.
    pub fn mul_capped(&self, other: &Jet, cap: i32) -> Jet {
        assert!(self.compatible(other), "jet frame mismatch");
        let (vf, vg) = (self.valuation(), other.valuation());
        let order = (self.order + vg)
            .min(other.order + vf)
            .min(cap)
            .min(MAX_ORDER as i32)
            .max(-1);
        let n = self.n.max(other.n);
        assert!(
            self.n == other.n || self.n == 1 || other.n == 1,
            "jet dimension mismatch"
        );
        let mut out = Jet::zero(self.frame, self.base, n, order);
        if order < 0 {
            return out;
        }
        let b = basis();
        for df in vf.max(0)..=self.order.min(order) {
            let dg_max = other.order.min(order - df);
            if dg_max < vg {
                continue;
            }
            for i in b.offset[df as usize]..b.offset[df as usize + 1] {
                let fi = &self.data[i * self.block()..(i + 1) * self.block()];
                if fi.iter().all(|c| *c == ZERO) {
                    continue;
                }
                let ei = b.exps[i];
                for j in b.offset[vg.max(0) as usize]..b.offset[dg_max as usize + 1] {
                    let gj = &other.data[j * other.block()..(j + 1) * other.block()];
                    let ej = b.exps[j];
                    let k = b.index(&[ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2], ei[3] + ej[3]]);
                    let dst = &mut out.data[k * n * n..(k + 1) * n * n];
                    block_mul_add(dst, fi, self.n, gj, other.n);
                }
            }
        }
        out
    }

    /// Homogeneous degree-`d` part of `self · other`, assuming both are
    /// known through the degrees that contribute.
    pub fn mul_degree_part(&self, other: &Jet, d: usize) -> Vec<Complex64> {
        assert!(self.compatible(other), "jet frame mismatch");
        let n = self.n.max(other.n);
        let b = basis();
        let mut out = vec![ZERO; (b.offset[d + 1] - b.offset[d]) * n * n];
        for df in 0..=d {
            let dg = d - df;
            if df as i32 > self.order || dg as i32 > other.order {
                continue;
            }
            for i in b.offset[df]..b.offset[df + 1] {
                let fi = &self.data[i * self.block()..(i + 1) * self.block()];
                if fi.iter().all(|c| *c == ZERO) {
                    continue;
                }
                let ei = b.exps[i];
                for j in b.offset[dg]..b.offset[dg + 1] {
                    let gj = &other.data[j * other.block()..(j + 1) * other.block()];
                    let ej = b.exps[j];
                    let k = b.index(&[ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2], ei[3] + ej[3]])
                        - b.offset[d];
                    block_mul_add(&mut out[k * n * n..(k + 1) * n * n], fi, self.n, gj, other.n);
                }
            }
        }
        out
    }

    /// Write the homogeneous degree-`d` coefficients.
    pub fn set_degree_part(&mut self, d: usize, values: &[Complex64]) {
        let r = self.degree_range(d);
        self.data[r].copy_from_slice(values);
    }

    /// Partial derivative along a frame variable.
    fn derive_var(&self, var: usize) -> Jet {
        let mut out = Jet::zero(self.frame, self.base, self.n, self.order - 1);
        let b = basis();
        let blk = self.block();
        for k in 0..b.count(self.order) {
            let e = b.exps[k];
            if e[var] == 0 {
                continue;
            }
            let mut lower = e;
            lower[var] -= 1;
            let t = b.index(&lower);
            let f = e[var] as f64;
            for c in 0..blk {
                out.data[t * blk + c] = self.data[k * blk + c] * f;
            }
        }
        out
    }

    /// Formal partial derivative along any coordinate direction.
    pub fn derive(&self, c: Coord) -> Jet {
        let weights = c.in_frame(self.frame);
        let mut out = Jet::zero(self.frame, self.base, self.n, self.order - 1);
        for (v, w) in weights.iter().enumerate() {
            if *w == ZERO {
                continue;
            }
            let d = self.derive_var(v);
            for (o, x) in out.data.iter_mut().zip(&d.data) {
                *o += w * x;
            }
        }
        out
    }

    /// Antiderivative along a frame variable with zero integration
    /// constant; the order grows by one.
    pub fn antiderive(&self, c: Coord) -> Result<Jet> {
        let var = c.frame_var(self.frame).ok_or_else(|| {
            Error::InvalidParameter(format!("{c:?} is not a variable of the {:?} frame", self.frame))
        })?;
        let new_order = (self.order + 1).min(MAX_ORDER as i32);
        let mut out = Jet::zero(self.frame, self.base, self.n, new_order);
        let b = basis();
        let blk = self.block();
        for k in 0..b.count(new_order - 1) {
            let e = b.exps[k];
            let mut raised = e;
            raised[var] += 1;
            let t = b.index(&raised);
            let f = 1.0 / raised[var] as f64;
            for c in 0..blk {
                out.data[t * blk + c] = self.data[k * blk + c] * f;
            }
        }
        Ok(out)
    }

    /// Values of the frame variables at the point `x`.
    fn frame_values(&self, x: &[f64; 4]) -> [Complex64; 4] {
        let u: [f64; 4] = std::array::from_fn(|m| x[m] - self.base[m]);
        match self.frame {
            Frame::Real => u.map(|v| Complex64::new(v, 0.0)),
            Frame::Complex => [
                Complex64::new(u[0], u[1]),
                Complex64::new(u[0], -u[1]),
                Complex64::new(u[2], -u[3]),
                Complex64::new(u[2], u[3]),
            ],
        }
    }

    /// Evaluate the truncated series at `x`.
    pub fn eval(&self, x: &[f64; 4]) -> LieMatrix {
        let vals = self.frame_values(x);
        let top = self.order.max(0) as usize;
        // powers[v][k] = vals[v]^k
        let powers: Vec<Vec<Complex64>> = vals
            .iter()
            .map(|v| {
                let mut p = vec![ONE; top + 1];
                for k in 1..=top {
                    p[k] = p[k - 1] * v;
                }
                p
            })
            .collect();
        let b = basis();
        let blk = self.block();
        // accumulate degree by degree from the top (Horner in the total degree)
        let mut acc = vec![ZERO; blk];
        for k in 0..b.count(self.order) {
            let e = b.exps[k];
            let m = powers[0][e[0] as usize]
                * powers[1][e[1] as usize]
                * powers[2][e[2] as usize]
                * powers[3][e[3] as usize];
            for c in 0..blk {
                acc[c] += m * self.data[k * blk + c];
            }
        }
        LieMatrix::from_row_major(self.n, acc).unwrap()
    }

    /// Hermitian conjugate of the field: conjugate-transposed coefficients,
    /// and in the complex frame y ↔ ȳ, z ↔ z̄.
    pub fn dagger(&self) -> Jet {
        let mut out = Jet::zero(self.frame, self.base, self.n, self.order);
        let b = basis();
        let n = self.n;
        let blk = self.block();
        for k in 0..b.count(self.order) {
            let e = b.exps[k];
            let t = match self.frame {
                Frame::Real => k,
                Frame::Complex => b.index(&[e[1], e[0], e[3], e[2]]),
            };
            for r in 0..n {
                for c in 0..n {
                    out.data[t * blk + r * n + c] = self.data[k * blk + c * n + r].conj();
                }
            }
        }
        out
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul(&self, m: &LieMatrix) -> Jet {
        let c = Jet::constant(self.frame, self.base, m, MAX_ORDER as i32);
        &c * self
    }

    pub fn right_mul(&self, m: &LieMatrix) -> Jet {
        let c = Jet::constant(self.frame, self.base, m, MAX_ORDER as i32);
        self * &c
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Jet) -> Jet {
        &(self * other) - &(other * self)
    }

    /// Inverse of a matrix (or scalar) jet with invertible constant term.
    pub fn inverse(&self) -> Result<Jet> {
        if self.order < 0 {
            return Err(Error::InsufficientOrder {
                what: "jet inverse",
                needed: 0,
                have: self.order,
            });
        }
        let c0_inv = self.value_at_base().inverse()?;
        let c0_inv_jet = Jet::constant(self.frame, self.base, &c0_inv, self.order);
        // f = c0 (1 + M), M = c0⁻¹ (f − c0)
        let mut nil = self.clone();
        let blk = self.block();
        for v in &mut nil.data[..blk] {
            *v = ZERO;
        }
        let m = &c0_inv_jet * &nil;
        let mut term = c0_inv_jet.clone();
        let mut acc = c0_inv_jet;
        for _ in 0..self.order {
            term = (&m * &term).scale_real(-1.0).truncate(self.order);
            acc = &acc + &term;
        }
        Ok(acc.truncate(self.order))
    }

    /// Re-express a real-frame jet in the complex frame (or return a clone
    /// if already complex).
    pub fn to_complex_frame(&self) -> Jet {
        self.change_frame(Frame::Complex)
    }

    pub fn to_real_frame(&self) -> Jet {
        self.change_frame(Frame::Real)
    }

    fn change_frame(&self, target: Frame) -> Jet {
        if self.frame == target {
            return self.clone();
        }
        let order = self.order;
        // old frame variables as linear jets in the target frame
        let lin: Vec<Jet> = (0..4)
            .map(|v| {
                let c = match self.frame {
                    Frame::Real => Coord::X(v),
                    Frame::Complex => Coord::COMPLEX[v],
                };
                let mut j = Jet::coordinate(target, self.base, c, order.max(1));
                if order >= 0 {
                    // relative coordinate: drop the constant
                    j.data[0] = ZERO;
                }
                j
            })
            .collect();
        let top = order.max(0) as usize;
        let powers: Vec<Vec<Jet>> = lin
            .iter()
            .map(|l| {
                let mut p = vec![Jet::scalar(target, self.base, ONE, order)];
                for k in 1..=top {
                    let next = p[k - 1].mul_capped(l, order);
                    p.push(next);
                }
                p
            })
            .collect();
        let mut out = Jet::zero(target, self.base, self.n, order);
        let b = basis();
        for k in 0..b.count(order) {
            let e = b.exps[k];
            let c = self.coeff(e);
            if c.max_abs() == 0.0 {
                continue;
            }
            let mono = powers[0][e[0] as usize]
                .mul_capped(&powers[1][e[1] as usize], order)
                .mul_capped(&powers[2][e[2] as usize], order)
                .mul_capped(&powers[3][e[3] as usize], order);
            out = &out + &Jet::scalar_times(&mono, &c);
        }
        out
    }
}

#[inline]
fn block_mul_add(dst: &mut [Complex64], f: &[Complex64], nf: usize, g: &[Complex64], ng: usize) {
    if nf == 1 {
        let s = f[0];
        for (d, v) in dst.iter_mut().zip(g) {
            *d += s * v;
        }
    } else if ng == 1 {
        let s = g[0];
        for (d, v) in dst.iter_mut().zip(f) {
            *d += v * s;
        }
    } else {
        let n = nf;
        for r in 0..n {
            for k in 0..n {
                let a = f[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    dst[r * n + c] += a * g[k * n + c];
                }
            }
        }
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet({:?}, base={:?}, n={}, order={}, |.|={:.3e})",
            self.frame,
            self.base,
            self.n,
            self.order,
            self.max_norm()
        )
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert!(self.compatible(rhs), "jet frame mismatch");
        assert_eq!(self.n, rhs.n, "jet dimension mismatch");
        let order = self.order.min(rhs.order);
        let mut out = Jet::zero(self.frame, self.base, self.n, order);
        for (k, o) in out.data.iter_mut().enumerate() {
            *o = self.data[k] + rhs.data[k];
        }
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert!(self.compatible(rhs), "jet frame mismatch");
        assert_eq!(self.n, rhs.n, "jet dimension mismatch");
        let order = self.order.min(rhs.order);
        let mut out = Jet::zero(self.frame, self.base, self.n, order);
        for (k, o) in out.data.iter_mut().enumerate() {
            *o = self.data[k] - rhs.data[k];
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale_real(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_capped(rhs, MAX_ORDER as i32)
    }
}

impl LinearValue for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero(self.frame, self.base, self.n, self.order)
    }
    fn add_value(&self, other: &Self) -> Self {
        self + other
    }
    fn scale_value(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn max_norm(&self) -> f64 {
        Jet::max_norm(self)
    }
}

/// Truncated product; fails on frame mismatch.
pub fn jet_mul(f: &Jet, g: &Jet) -> Result<Jet> {
    f.checked_mul(g)
}

pub fn jet_derive(f: &Jet, c: Coord) -> Jet {
    f.derive(c)
}

pub fn jet_antiderive(f: &Jet, c: Coord) -> Result<Jet> {
    f.antiderive(c)
}

pub fn jet_eval(f: &Jet, x: &[f64; 4]) -> LieMatrix {
    f.eval(x)
}
