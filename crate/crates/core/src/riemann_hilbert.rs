//! Laurent analysis on the annulus around |λ| = 1 and the additive
//! splitting `φ = φ₋ − φ₊` into parts holomorphic inside and outside.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::matrix_lie::{LieMatrix, LinearValue};

pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_BUDGET: usize = 16;
/// Default weight of the constant mode given to the minus part.
pub const SYMMETRIC_SPLIT: f64 = 0.5;

/// Finite Laurent polynomial `Σ_{n=lo}^{hi} λⁿ c_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<C> {
    lo: i32,
    modes: Vec<C>,
}

impl<C: LinearValue> LaurentPoly<C> {
    pub fn new(lo: i32, modes: Vec<C>) -> Self {
        assert!(!modes.is_empty(), "a Laurent polynomial needs at least one mode");
        Self { lo, modes }
    }

    pub fn monomial(k: i32, c: C) -> Self {
        Self::new(k, vec![c])
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.modes.len() as i32 - 1
    }

    pub fn modes(&self) -> &[C] {
        &self.modes
    }

    pub fn mode(&self, k: i32) -> Option<&C> {
        if k < self.lo || k > self.hi() {
            None
        } else {
            Some(&self.modes[(k - self.lo) as usize])
        }
    }

    pub fn mode_or_zero(&self, k: i32) -> C {
        self.mode(k).cloned().unwrap_or_else(|| self.modes[0].zero_like())
    }

    /// Coefficient of λᵏ; fails outside the stored window.
    pub fn coefficient(&self, k: i32) -> Result<C> {
        self.mode(k).cloned().ok_or(Error::OutOfWindow {
            mode: k,
            lo: self.lo,
            hi: self.hi(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &C)> {
        self.modes.iter().enumerate().map(move |(i, c)| (self.lo + i as i32, c))
    }

    pub fn map<D: LinearValue>(&self, f: impl FnMut(&C) -> D) -> LaurentPoly<D> {
        LaurentPoly {
            lo: self.lo,
            modes: self.modes.iter().map(f).collect(),
        }
    }

    /// Like [`map`](Self::map) but also passes the mode index.
    pub fn map_indexed<D: LinearValue>(&self, mut f: impl FnMut(i32, &C) -> D) -> LaurentPoly<D> {
        LaurentPoly {
            lo: self.lo,
            modes: self.iter().map(|(k, c)| f(k, c)).collect(),
        }
    }

    /// Multiply by λᵏ.
    pub fn shift(&self, k: i32) -> Self {
        Self {
            lo: self.lo + k,
            modes: self.modes.clone(),
        }
    }

    /// Restrict (or zero-extend) to the window `[lo, hi]`.
    pub fn window(&self, lo: i32, hi: i32) -> Self {
        Self::new(lo, (lo..=hi).map(|k| self.mode_or_zero(k)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let modes = (lo..=hi)
            .map(|k| match (self.mode(k), other.mode(k)) {
                (Some(a), Some(b)) => a.add_value(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => self.modes[0].zero_like(),
            })
            .collect();
        Self { lo, modes }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|m| m.scale_value(c))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_norm(&self) -> f64 {
        self.modes.iter().map(|m| m.max_norm()).fold(0.0, f64::max)
    }

    /// Product through a coefficient multiplication; terms landing on the
    /// same power are summed.
    pub fn mul_with<D: LinearValue, E: LinearValue>(
        &self,
        other: &LaurentPoly<D>,
        mut f: impl FnMut(&C, &D) -> E,
    ) -> LaurentPoly<E> {
        let lo = self.lo + other.lo;
        let hi = self.hi() + other.hi();
        let mut slots: Vec<Option<E>> = (lo..=hi).map(|_| None).collect();
        for (i, a) in self.iter() {
            for (j, b) in other.iter() {
                let p = f(a, b);
                let slot = &mut slots[(i + j - lo) as usize];
                *slot = Some(match slot.take() {
                    Some(acc) => acc.add_value(&p),
                    None => p,
                });
            }
        }
        LaurentPoly {
            lo,
            modes: slots.into_iter().map(|s| s.unwrap()).collect(),
        }
    }

    /// Evaluate `Σ λⁿ c_n` at a numeric λ.
    pub fn eval_at(&self, lambda: Complex64) -> C {
        let mut acc = self.modes[0].zero_like();
        for (k, c) in self.iter() {
            acc = acc.add_value(&c.scale_value(lambda.powi(k)));
        }
        acc
    }
}

impl LaurentPoly<LieMatrix> {
    /// `[φ₁, φ₂]` pointwise in λ.
    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.mul_with(other, |a, b| a * b);
        let ba = other.mul_with(self, |a, b| a * b);
        ab.sub(&ba)
    }
}

/// Samples `f(λ_j)` at `λ_j = exp(2πij/N)` with a declared mode budget.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    samples: Vec<LieMatrix>,
    budget: usize,
}

impl SampledFunction {
    pub fn from_fn(count: usize, budget: usize, f: impl Fn(Complex64) -> LieMatrix) -> Result<Self> {
        if !count.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("sample count {count} is not a power of two")));
        }
        if count < 4 * budget {
            return Err(Error::Aliasing {
                budget,
                needed: 4 * budget,
                samples: count,
            });
        }
        let samples = (0..count)
            .map(|j| f(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / count as f64)))
            .collect();
        Ok(Self { samples, budget })
    }

    pub fn from_laurent(p: &LaurentPoly<LieMatrix>, count: usize, budget: usize) -> Result<Self> {
        let widest = p.lo().unsigned_abs().max(p.hi().unsigned_abs()) as usize;
        if widest > budget {
            return Err(Error::OutOfWindow {
                mode: if p.hi().abs() >= p.lo().abs() { p.hi() } else { p.lo() },
                lo: -(budget as i32),
                hi: budget as i32,
            });
        }
        Self::from_fn(count, budget, |l| p.eval_at(l))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn samples(&self) -> &[LieMatrix] {
        &self.samples
    }

    /// Modes `-budget..=budget` through the FFT: mode n sits in bin n mod N.
    fn modes(&self) -> LaurentPoly<LieMatrix> {
        let nsamp = self.samples.len();
        let n = self.samples[0].n();
        let fft = FftPlanner::new().plan_fft_forward(nsamp);
        let mut bins = vec![LieMatrix::zeros(n); nsamp];
        let mut buf = vec![Complex64::new(0.0, 0.0); nsamp];
        for r in 0..n {
            for c in 0..n {
                for (b, s) in buf.iter_mut().zip(&self.samples) {
                    *b = s.get(r, c);
                }
                fft.process(&mut buf);
                for (k, v) in buf.iter().enumerate() {
                    bins[k].set(r, c, v / nsamp as f64);
                }
            }
        }
        let b = self.budget as i32;
        LaurentPoly::new(-b, (-b..=b).map(|k| bins[k.rem_euclid(nsamp as i32) as usize].clone()).collect())
    }

    /// Trapezoidal rule for `∮ dλ/(2πi λ^{k+1}) f`.
    fn quadrature(&self, k: i32) -> LieMatrix {
        let nsamp = self.samples.len();
        let mut acc = LieMatrix::zeros(self.samples[0].n());
        for (j, s) in self.samples.iter().enumerate() {
            let w = Complex64::from_polar(1.0 / nsamp as f64, -2.0 * PI * (j as f64) * (k as f64) / nsamp as f64);
            acc = &acc + &s.scale(w);
        }
        acc
    }
}

/// Matrix-valued function on the annulus.
#[derive(Clone, Debug)]
pub enum AnnulusFunction {
    Laurent(LaurentPoly<LieMatrix>),
    Sampled(SampledFunction),
}

pub fn laurent_coefficients(f: &AnnulusFunction) -> LaurentPoly<LieMatrix> {
    match f {
        AnnulusFunction::Laurent(p) => p.clone(),
        AnnulusFunction::Sampled(s) => s.modes(),
    }
}

/// `∮_{|λ|=1} dλ/(2πi λ^{k+1}) f`.
pub fn contour_coefficient(f: &AnnulusFunction, k: i32) -> Result<LieMatrix> {
    match f {
        AnnulusFunction::Laurent(p) => p.coefficient(k),
        AnnulusFunction::Sampled(s) => {
            let b = s.budget as i32;
            if k.abs() > b {
                return Err(Error::OutOfWindow { mode: k, lo: -b, hi: b });
            }
            Ok(s.quadrature(k))
        }
    }
}

/// `φ₊` holds modes n ≥ 0, `φ₋` modes n ≤ 0, and `φ₋ − φ₊ = φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPair<C> {
    pub plus: LaurentPoly<C>,
    pub minus: LaurentPoly<C>,
}

/// Split with the minus part receiving `minus_weight · φ₀` and the plus
/// part `(minus_weight − 1) · φ₀`.
pub fn split_with<C: LinearValue>(f: &LaurentPoly<C>, minus_weight: f64) -> SplitPair<C> {
    let c0 = f.mode_or_zero(0);
    let neg = Complex64::new(-1.0, 0.0);
    let hi = f.hi().max(0);
    let lo = f.lo().min(0);
    let plus = LaurentPoly::new(
        0,
        (0..=hi)
            .map(|n| {
                if n == 0 {
                    c0.scale_value(Complex64::new(minus_weight - 1.0, 0.0))
                } else {
                    f.mode_or_zero(n).scale_value(neg)
                }
            })
            .collect(),
    );
    let minus = LaurentPoly::new(
        lo,
        (lo..=0)
            .map(|n| {
                if n == 0 {
                    c0.scale_value(Complex64::new(minus_weight, 0.0))
                } else {
                    f.mode_or_zero(n)
                }
            })
            .collect(),
    );
    SplitPair { plus, minus }
}

/// Symmetric split (the constant mode is shared ±φ₀/2).
pub fn split<C: LinearValue>(f: &LaurentPoly<C>) -> SplitPair<C> {
    split_with(f, SYMMETRIC_SPLIT)
}

pub fn split_annulus(f: &AnnulusFunction) -> SplitPair<LieMatrix> {
    split(&laurent_coefficients(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_lie::su2_basis;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: Complex64) -> LieMatrix {
        LieMatrix::from_fn(1, |_, _| v)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_poly(rng: &mut impl Rng, lo: i32, hi: i32) -> LaurentPoly<LieMatrix> {
        LaurentPoly::new(
            lo,
            (lo..=hi)
                .map(|_| LieMatrix::from_fn(2, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect(),
        )
    }

    #[test]
    fn coefficient_examples() {
        let t = su2_basis()[0].clone();
        let f = AnnulusFunction::Laurent(LaurentPoly::monomial(1, t.clone()));
        let m = laurent_coefficients(&f);
        assert_eq!(m.mode(1), Some(&t));
        assert_eq!(m.lo(), 1);
        assert_eq!(m.hi(), 1);

        let s = SampledFunction::from_fn(64, 16, |l| scalar(l * l + c(3.0) / l)).unwrap();
        let m = laurent_coefficients(&AnnulusFunction::Sampled(s));
        for (k, v) in m.iter() {
            let want = match k {
                2 => 1.0,
                -1 => 3.0,
                _ => 0.0,
            };
            assert!((v.get(0, 0) - c(want)).norm() < 1e-12, "mode {k}");
        }
    }

    #[test]
    fn rational_function_modes_match_residues() {
        let s = SampledFunction::from_fn(256, 16, |l| scalar(c(1.0) / (l - c(2.0)))).unwrap();
        let m = laurent_coefficients(&AnnulusFunction::Sampled(s));
        for (k, v) in m.iter() {
            let want = if k >= 0 { -(2f64.powi(-k - 1)) } else { 0.0 };
            assert!((v.get(0, 0) - c(want)).norm() < 1e-12, "mode {k}");
        }
        let sp = split(&m);
        // poles outside the disk: nothing below mode 0, the constant is shared
        assert!(sp.minus.iter().filter(|(k, _)| *k < 0).all(|(_, v)| v.max_abs() < 1e-12));
        assert!((sp.minus.mode_or_zero(0).get(0, 0) - c(-0.25)).norm() < 1e-12);
        assert!(sp.minus.sub(&sp.plus).sub(&m).max_norm() < 1e-12);
    }

    #[test]
    fn aliasing_budget_is_enforced() {
        assert!(matches!(
            SampledFunction::from_fn(32, 16, |_| scalar(c(1.0))),
            Err(Error::Aliasing { .. })
        ));
        assert!(SampledFunction::from_fn(100, 4, |_| scalar(c(1.0))).is_err());
    }

    #[test]
    fn split_examples() {
        let t = su2_basis()[2].clone();
        let sp = split(&LaurentPoly::monomial(1, t.clone()));
        assert!((&sp.plus.mode_or_zero(1) + &t).max_abs() < 1e-15);
        assert_eq!(sp.plus.mode_or_zero(0).max_abs(), 0.0);
        assert_eq!(sp.minus.max_norm(), 0.0);
        let sp = split(&LaurentPoly::monomial(0, t.clone()));
        assert!((&sp.plus.mode_or_zero(0) + &t.scale_real(0.5)).max_abs() < 1e-15);
        assert!((&sp.minus.mode_or_zero(0) - &t.scale_real(0.5)).max_abs() < 1e-15);
    }

    #[test]
    fn constant_convention_is_configurable() {
        let t = su2_basis()[0].clone();
        let f = LaurentPoly::new(-1, vec![t.clone(), t.scale_real(2.0), t.clone()]);
        for w in [0.0, 0.3, 1.0] {
            let sp = split_with(&f, w);
            assert!(sp.minus.sub(&sp.plus).sub(&f).max_norm() < 1e-15);
            let d = &sp.minus.mode_or_zero(0) - &sp.plus.mode_or_zero(0);
            assert!((&d - &t.scale_real(2.0)).max_abs() < 1e-15);
        }
    }

    #[test]
    fn contour_coefficients() {
        let t = su2_basis()[1].clone();
        let f = AnnulusFunction::Laurent(LaurentPoly::monomial(1, t.clone()));
        assert_eq!(contour_coefficient(&f, 1).unwrap(), t);
        assert!(matches!(contour_coefficient(&f, 3), Err(Error::OutOfWindow { .. })));
        let g = AnnulusFunction::Laurent(LaurentPoly::monomial(0, t.clone()));
        assert_eq!(contour_coefficient(&g, 0).unwrap(), t);
    }

    #[test]
    fn dual_backend_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_poly(&mut rng, -4, 3);
        let s = AnnulusFunction::Sampled(SampledFunction::from_laurent(&p, 256, 16).unwrap());
        let e = AnnulusFunction::Laurent(p.clone());
        for k in -4..=4 {
            let a = contour_coefficient(&e, k).unwrap_or_else(|_| LieMatrix::zeros(2));
            let b = contour_coefficient(&s, k).unwrap();
            assert!((&a - &b).max_abs() < 1e-12);
        }
        let fft = laurent_coefficients(&s);
        assert!(fft.sub(&p).max_norm() < 1e-12);
    }

    #[test]
    fn split_mode_support_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_poly(&mut rng, -3, 5);
        let sp = split(&f);
        assert!(sp.plus.lo() >= 0);
        assert!(sp.minus.hi() <= 0);
        let again = split(&sp.plus);
        assert!(again.minus.iter().all(|(k, _)| k == 0));
        let rescaled = sp.plus.map_indexed(|k, m| if k == 0 { m.scale_real(-0.5) } else { m.scale_real(-1.0) });
        assert!(again.plus.sub(&rescaled).max_norm() < 1e-15);
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly<LieMatrix>> {
        (-4i32..=0, 1usize..9, proptest::collection::vec(-1.0f64..1.0, 72)).prop_map(|(lo, len, v)| {
            LaurentPoly::new(
                lo,
                (0..len)
                    .map(|i| LieMatrix::from_fn(2, |r, c| Complex64::new(v[i * 8 + r * 4 + c * 2], v[i * 8 + r * 4 + c * 2 + 1])))
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_reconstructs(f in arb_poly()) {
            let sp = split(&f);
            prop_assert!(sp.minus.sub(&sp.plus).sub(&f).max_norm() <= 1e-12);
            prop_assert!(sp.plus.lo() >= 0 && sp.minus.hi() <= 0);
        }

        #[test]
        fn split_is_linear(f in arb_poly(), g in arb_poly(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let comb = f.scale(c(a)).add(&g.scale(c(b)));
            let s = split(&comb);
            let (sf, sg) = (split(&f), split(&g));
            let plus = sf.plus.scale(c(a)).add(&sg.plus.scale(c(b)));
            let minus = sf.minus.scale(c(a)).add(&sg.minus.scale(c(b)));
            prop_assert!(s.plus.sub(&plus).max_norm() <= 1e-14);
            prop_assert!(s.minus.sub(&minus).max_norm() <= 1e-14);
        }
    }
}
