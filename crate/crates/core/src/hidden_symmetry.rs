//! The linear system `(D_ȳ − λD_z)ψ = 0`, `(D_z̄ + λD_y)ψ = 0` solved
//! order by order in λ on jets, the reconstruction of the potential from
//! its fundamental solutions, the transition matrix `ℱ = ψ₋⁻¹ψ₊`, and the
//! two families of nonlocal infinitesimal symmetries acting through `ℱ`.
//!
//! `ψ₊ = Σ_{k≥0} λᵏ ξ_k` and `ψ₋ = Σ_{k≥0} λ⁻ᵏ χ_k`. Only levels `0..=K`
//! are computed; level `m > K` lies in the m-th power of the ideal
//! generated by (ȳ, z̄) (resp. (y, z)), so it is carried as a zero jet of
//! order `m − 1`. That keeps every product on Laurent objects honest about
//! which coefficients are known.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gauge_field::{ComplexComponents, JetPotential, Variation};
use crate::jet::{monomials, Coord, Frame, Jet, MAX_ORDER};
use crate::matrix_lie::LieMatrix;
use crate::riemann_hilbert::{split, LaurentPoly, SplitPair};
use crate::twistor_geometry::{
    apply_vbar1, apply_vbar2, laurent_jet_mul, twistor_coordinate_jets, LaurentJet, TwistorVectorField,
};

/// Compatibility defects above this (relative to the size of the
/// potential) abort the recursion.
pub const COMPATIBILITY_TOL: f64 = 1e-8;
/// Tolerance for the vanishing of λ-modes that must be absent.
pub const TRUNCATION_TOL: f64 = 1e-8;
/// Two-sided identities above this (relative) abort a symmetry evaluation.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Jet orders available to a pipeline: the potential is known to
/// `jet_order`, the fundamental solutions to `jet_order + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderBudget {
    pub jet_order: i32,
    pub lambda_order: usize,
}

impl OrderBudget {
    pub fn new(jet_order: i32, lambda_order: usize) -> Result<Self> {
        let b = Self {
            jet_order,
            lambda_order,
        };
        b.require("lambda recursion", lambda_order as i32 + 2, jet_order)?;
        if jet_order + 1 > MAX_ORDER as i32 {
            return Err(Error::InsufficientOrder {
                what: "jet storage",
                needed: jet_order + 1,
                have: MAX_ORDER as i32,
            });
        }
        Ok(b)
    }

    pub fn solution_order(&self) -> i32 {
        self.jet_order + 1
    }

    pub fn require(&self, what: &'static str, needed: i32, have: i32) -> Result<()> {
        if have < needed {
            Err(Error::InsufficientOrder { what, needed, have })
        } else {
            Ok(())
        }
    }
}

/// Truncated fundamental solutions `ψ±` of the linear system.
#[derive(Clone, Debug)]
pub struct LaxSolution {
    potential: JetPotential,
    budget: OrderBudget,
    xi: Vec<Jet>,
    chi: Vec<Jet>,
}

fn homogeneous(like: &Jet, d: usize, values: &[Complex64]) -> Jet {
    let mut j = Jet::zero(like.frame(), like.base(), like.n(), d as i32);
    j.set_degree_part(d, values);
    j
}

/// Drop every monomial that contains the frame variable `var`.
fn restrict_to_zero(j: &Jet, var: usize) -> Jet {
    let mut out = j.clone();
    let zero = LieMatrix::zeros(j.n());
    for e in monomials(j.order()) {
        if e[var] > 0 {
            out.set_coeff(*e, &zero);
        }
    }
    out
}

/// Solve `D_u f = s₁`, `D_v f = s₂` (fundamental action) degree by degree
/// with `f(x₀) = leading` and zero integration constants otherwise.
fn solve_level(
    a: &JetPotential,
    (u, v): (Coord, Coord),
    sources: (&Jet, &Jet),
    leading: &LieMatrix,
    order: i32,
    tol: f64,
) -> Result<Jet> {
    let (au, av) = (a.component(u), a.component(v));
    let mut sol = Jet::zero(Frame::Complex, a.base(), a.n(), order);
    sol.set_coeff([0; 4], leading);
    let uvar = u.frame_var(Frame::Complex).expect("complex frame direction");
    for d in 0..order as usize {
        let mut parts = Vec::with_capacity(2);
        for (s, ac) in [(sources.0, &au), (sources.1, &av)] {
            let known = s.degree_part(d);
            if known.is_empty() {
                return Err(Error::InsufficientOrder {
                    what: "linear system source",
                    needed: d as i32,
                    have: s.order(),
                });
            }
            let prod = ac.mul_degree_part(&sol, d);
            let vals: Vec<Complex64> = known.iter().zip(&prod).map(|(x, y)| x - y).collect();
            parts.push(homogeneous(&sol, d, &vals));
        }
        let h1 = parts[0].antiderive(u)?;
        let r = &parts[1] - &h1.derive(v);
        let defect = r.derive(u).max_norm();
        if defect > tol {
            return Err(Error::Compatibility { degree: d, residual: defect });
        }
        let h = &h1 + &restrict_to_zero(&r, uvar).antiderive(v)?;
        sol.set_degree_part(d + 1, h.degree_part(d + 1));
    }
    Ok(sol)
}

/// Solve the linear system for `ψ±` through λ-order `lambda_order`.
pub fn lax_recursion(a: &JetPotential, lambda_order: usize) -> Result<LaxSolution> {
    let a = to_complex_potential(a)?;
    let budget = OrderBudget::new(a.order(), lambda_order)?;
    let order = budget.solution_order();
    let tol = COMPATIBILITY_TOL * (1.0 + a.comps().iter().map(|c| c.max_norm()).fold(0.0, f64::max));
    let n = a.n();
    let one = LieMatrix::identity(n);
    let zero_m = LieMatrix::zeros(n);
    let zero = Jet::zero(Frame::Complex, a.base(), n, order - 1);

    let mut xi = vec![solve_level(&a, (Coord::Ybar, Coord::Zbar), (&zero, &zero), &one, order, tol)?];
    for k in 1..=lambda_order {
        let prev = &xi[k - 1];
        let s1 = a.fundamental_derive(prev, Coord::Z);
        let s2 = a.fundamental_derive(prev, Coord::Y).scale_real(-1.0);
        xi.push(solve_level(&a, (Coord::Ybar, Coord::Zbar), (&s1, &s2), &zero_m, order, tol)?);
    }
    let mut chi = vec![solve_level(&a, (Coord::Z, Coord::Y), (&zero, &zero), &one, order, tol)?];
    for k in 1..=lambda_order {
        let prev = &chi[k - 1];
        let s1 = a.fundamental_derive(prev, Coord::Ybar);
        let s2 = a.fundamental_derive(prev, Coord::Zbar).scale_real(-1.0);
        chi.push(solve_level(&a, (Coord::Z, Coord::Y), (&s1, &s2), &zero_m, order, tol)?);
    }
    Ok(LaxSolution {
        potential: a,
        budget,
        xi,
        chi,
    })
}

fn to_complex_potential(a: &JetPotential) -> Result<JetPotential> {
    if a.frame() == Frame::Complex {
        Ok(a.clone())
    } else {
        JetPotential::new(a.comps().each_ref().map(|c| c.to_complex_frame()))
    }
}

impl LaxSolution {
    pub fn potential(&self) -> &JetPotential {
        &self.potential
    }

    pub fn budget(&self) -> OrderBudget {
        self.budget
    }

    pub fn base(&self) -> [f64; 4] {
        self.potential.base()
    }

    pub fn n(&self) -> usize {
        self.potential.n()
    }

    pub fn lambda_order(&self) -> usize {
        self.budget.lambda_order
    }

    /// Jet order of the fundamental solutions.
    pub fn order(&self) -> i32 {
        self.budget.solution_order()
    }

    pub fn xi(&self) -> &[Jet] {
        &self.xi
    }

    pub fn chi(&self) -> &[Jet] {
        &self.chi
    }

    /// Valid jet order of each computed level of `ψ₊` and `ψ₋`.
    pub fn level_orders(&self) -> (Vec<i32>, Vec<i32>) {
        (
            self.xi.iter().map(|j| j.order()).collect(),
            self.chi.iter().map(|j| j.order()).collect(),
        )
    }

    fn tail(&self, m: usize) -> Jet {
        Jet::zero(Frame::Complex, self.base(), self.n(), m as i32 - 1)
    }

    /// `ψ₊` with modes `0..=order`, the uncomputed levels carried as tails.
    pub fn psi_plus(&self) -> LaurentJet {
        let top = self.order() as usize;
        let modes = (0..=top)
            .map(|m| self.xi.get(m).cloned().unwrap_or_else(|| self.tail(m)))
            .collect();
        LaurentPoly::new(0, modes)
    }

    /// `ψ₋` with modes `−order..=0`.
    pub fn psi_minus(&self) -> LaurentJet {
        let top = self.order() as usize;
        let modes = (0..=top)
            .rev()
            .map(|m| self.chi.get(m).cloned().unwrap_or_else(|| self.tail(m)))
            .collect();
        LaurentPoly::new(-(top as i32), modes)
    }

    /// `ψ± ↦ g⁻¹ψ±` for a constant matrix `g`.
    pub fn gauge_rotated(&self, g: &LieMatrix) -> Result<Self> {
        let gi = g.inverse()?;
        Ok(Self {
            potential: self.potential.conjugate(g)?,
            budget: self.budget,
            xi: self.xi.iter().map(|j| j.left_mul(&gi)).collect(),
            chi: self.chi.iter().map(|j| j.left_mul(&gi)).collect(),
        })
    }

    /// Add `delta` to the coefficient of the monomial `exps` of level
    /// `level` of `ψ₊` (`plus`) or `ψ₋`.
    pub fn perturb(&mut self, plus: bool, level: usize, exps: [u8; 4], delta: &LieMatrix) -> Result<()> {
        let tower = if plus { &mut self.xi } else { &mut self.chi };
        let j = tower.get_mut(level).ok_or(Error::OutOfWindow {
            mode: level as i32,
            lo: 0,
            hi: self.budget.lambda_order as i32,
        })?;
        let c = &j.coeff(exps) + delta;
        j.set_coeff(exps, &c);
        Ok(())
    }

    /// `max |det ξ₀(x) − 1|` and the same for `χ₀`, at the given points.
    pub fn leading_determinant_defect(&self, points: &[[f64; 4]]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            for j in [&self.xi[0], &self.chi[0]] {
                let d = j.eval(x).determinant();
                worst = worst.max((d - Complex64::new(1.0, 0.0)).norm());
            }
        }
        worst
    }
}

/// Inverse of a Laurent series in λ (`sign = 1`) or λ⁻¹ (`sign = −1`)
/// whose leading mode is invertible.
fn series_inverse(p: &LaurentJet, sign: i32, cap: i32) -> Result<LaurentJet> {
    let len = p.modes().len();
    let mode = |k: usize| p.mode_or_zero(sign * k as i32);
    let lead_inv = mode(0).inverse()?;
    let mut inv: Vec<Jet> = vec![lead_inv.truncate(cap)];
    for k in 1..len {
        let mut acc = mode(1).mul_capped(&inv[k - 1], cap);
        for j in 2..=k {
            acc = &acc + &mode(j).mul_capped(&inv[k - j], cap);
        }
        inv.push(lead_inv.mul_capped(&acc, cap).scale_real(-1.0));
    }
    if sign < 0 {
        inv.reverse();
        Ok(LaurentPoly::new(-(len as i32 - 1), inv))
    } else {
        Ok(LaurentPoly::new(0, inv))
    }
}

/// `ψ₊⁻¹`, modes `0..=order`.
pub fn psi_plus_inverse(psi: &LaxSolution) -> Result<LaurentJet> {
    series_inverse(&psi.psi_plus(), 1, psi.order())
}

/// `ψ₋⁻¹`, modes `−order..=0`.
pub fn psi_minus_inverse(psi: &LaxSolution) -> Result<LaurentJet> {
    series_inverse(&psi.psi_minus(), -1, psi.order())
}

/// Fundamental action of `D_ȳ − λD_z` (which = 1) or `D_z̄ + λD_y`.
fn fundamental_frame_op(a: &JetPotential, f: &LaurentJet, which: usize) -> LaurentJet {
    let (c0, c1, s) = frame_dirs(which);
    let p0 = f.map(|j| a.fundamental_derive(j, c0));
    let p1 = f.map(|j| a.fundamental_derive(j, c1).scale_real(s)).shift(1);
    p0.add(&p1)
}

/// Adjoint action of `D_ȳ − λD_z` (which = 1) or `D_z̄ + λD_y`.
fn adjoint_frame_op(a: &JetPotential, f: &LaurentJet, which: usize) -> LaurentJet {
    let (c0, c1, s) = frame_dirs(which);
    let p0 = f.map(|j| a.adjoint_derive(j, c0));
    let p1 = f.map(|j| a.adjoint_derive(j, c1).scale_real(s)).shift(1);
    p0.add(&p1)
}

fn frame_dirs(which: usize) -> (Coord, Coord, f64) {
    match which {
        1 => (Coord::Ybar, Coord::Z, -1.0),
        2 => (Coord::Zbar, Coord::Y, 1.0),
        _ => panic!("frame index must be 1 or 2"),
    }
}

fn weighted_norm(p: &LaurentJet, lambda: Complex64) -> f64 {
    let r = lambda.norm();
    p.iter().map(|(m, j)| r.powi(m) * j.max_norm()).sum()
}

/// Residual of both equations of the linear system for `ψ₊` and `ψ₋`:
/// `max_λ Σ_m |λ|^m ‖r_m‖` over the samples, each mode on its known
/// coefficients.
pub fn verify_linear_system(a: &JetPotential, psi: &LaxSolution, lambdas: &[Complex64]) -> Result<f64> {
    let a = to_complex_potential(a)?;
    if a.base() != psi.base() {
        return Err(Error::FrameMismatch);
    }
    let mut parts = Vec::new();
    for f in [psi.psi_plus(), psi.psi_minus()] {
        for which in [1, 2] {
            parts.push(fundamental_frame_op(&a, &f, which));
        }
    }
    let mut worst: f64 = 0.0;
    for l in lambdas {
        for p in &parts {
            worst = worst.max(weighted_norm(p, *l));
        }
    }
    Ok(worst)
}

fn check_vanishing(p: &LaurentJet, modes: impl Iterator<Item = i32>, tol: f64) -> Result<()> {
    for k in modes {
        if let Some(j) = p.mode(k) {
            let norm = j.max_norm();
            if norm > tol {
                return Err(Error::NonTruncating { power: k, norm });
            }
        }
    }
    Ok(())
}

/// Read the potential back off `ψ₊`:
/// `(∂_ȳ − λ∂_z)ψ₊ · ψ₊⁻¹ = −(A_ȳ − λA_z)` and
/// `(∂_z̄ + λ∂_y)ψ₊ · ψ₊⁻¹ = −(A_z̄ + λA_y)`.
/// The same reading from `ψ₋` must agree on the common known orders.
pub fn potentials_from_psi(psi: &LaxSolution) -> Result<JetPotential> {
    let cap = psi.order();
    let k = psi.lambda_order() as i32;
    let scale = 1.0 + psi.xi().iter().chain(psi.chi()).map(|j| j.max_norm()).fold(0.0, f64::max);
    let tol = TRUNCATION_TOL * scale;

    let plus = psi.psi_plus().window(0, k);
    let iota = series_inverse(&plus, 1, cap)?;
    let m1 = laurent_jet_mul(&apply_vbar1(&plus), &iota, cap);
    let m2 = laurent_jet_mul(&apply_vbar2(&plus), &iota, cap);
    check_vanishing(&m1, 2..=k, tol)?;
    check_vanishing(&m2, 2..=k, tol)?;
    let from_plus = ComplexComponents {
        y: m2.mode_or_zero(1).scale_real(-1.0),
        ybar: m1.mode_or_zero(0).scale_real(-1.0),
        z: m1.mode_or_zero(1),
        zbar: m2.mode_or_zero(0).scale_real(-1.0),
    };

    let minus = psi.psi_minus();
    let kappa = psi_minus_inverse(psi)?;
    let n1 = laurent_jet_mul(&apply_vbar1(&minus), &kappa, cap);
    let n2 = laurent_jet_mul(&apply_vbar2(&minus), &kappa, cap);
    check_vanishing(&n1, n1.lo()..0, tol)?;
    check_vanishing(&n2, n2.lo()..0, tol)?;
    let from_minus = ComplexComponents {
        y: n2.mode_or_zero(1).scale_real(-1.0),
        ybar: n1.mode_or_zero(0).scale_real(-1.0),
        z: n1.mode_or_zero(1),
        zbar: n2.mode_or_zero(0).scale_real(-1.0),
    };
    let mut worst: f64 = 0.0;
    for c in Coord::COMPLEX {
        worst = worst.max((&from_plus.get(c) - &from_minus.get(c)).max_norm());
    }
    if worst > tol {
        return Err(Error::Consistency { residual: worst });
    }
    JetPotential::from_complex(&from_plus)
}

/// `ℱ = ψ₋⁻¹ψ₊` over the window `[−order, order]`.
pub fn transition_matrix(psi: &LaxSolution) -> Result<LaurentJet> {
    let cap = psi.order();
    let kappa = psi_minus_inverse(psi)?;
    let f = laurent_jet_mul(&kappa, &psi.psi_plus(), cap);
    Ok(f.window(-cap, cap))
}

/// `ψ₋ · σ(ψ₊) − 1` on known coefficients, where σ is the antipodal map.
/// Vanishes for anti-Hermitian potentials.
pub fn antipodal_relation_defect(psi: &LaxSolution) -> f64 {
    let cap = psi.order();
    let prod = laurent_jet_mul(&psi.psi_minus(), &antipodal_laurent(&psi.psi_plus()), cap);
    let one = Jet::constant(Frame::Complex, psi.base(), &LieMatrix::identity(psi.n()), cap);
    prod.sub(&LaurentPoly::monomial(0, one)).max_norm()
}

/// Antipodal map on a Laurent object: mode `m` goes to mode `−m` with
/// coefficient `(−1)^m F_m†`, the dagger acting on the jet as a field.
pub fn antipodal_laurent(f: &LaurentJet) -> LaurentJet {
    let mut modes: Vec<Jet> = f
        .iter()
        .map(|(m, j)| {
            let d = j.dagger();
            if m.rem_euclid(2) == 1 {
                d.scale_real(-1.0)
            } else {
                d
            }
        })
        .collect();
    modes.reverse();
    LaurentPoly::new(-f.hi(), modes)
}

/// One term `coeff · λⁿ · w₁ᵃ · w₂ᵇ` of a gauge-type generator, with
/// `w₁ = y − λz̄`, `w₂ = z + λȳ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTerm {
    pub lambda_power: i32,
    pub w1: u8,
    pub w2: u8,
    pub coeff: LieMatrix,
}

/// Element of the loop algebra with values in polynomials of the twistor
/// coordinates: a finite sum of [`GaugeTerm`]s with traceless
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTypeGenerator {
    n: usize,
    terms: Vec<GaugeTerm>,
}

impl GaugeTypeGenerator {
    pub fn new(n: usize, terms: Vec<GaugeTerm>) -> Result<Self> {
        for t in &terms {
            if t.coeff.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: t.coeff.n(),
                });
            }
            if !t.coeff.is_traceless(1e-12) {
                return Err(Error::InvalidParameter("gauge-type coefficients must be traceless".into()));
            }
        }
        Ok(Self { n, terms }.simplified())
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    /// `λⁿ T`.
    pub fn loop_element(power: i32, t: &LieMatrix) -> Result<Self> {
        Self::monomial(power, 0, 0, t)
    }

    /// `λⁿ w₁ᵃ w₂ᵇ T`.
    pub fn monomial(power: i32, a: u8, b: u8, t: &LieMatrix) -> Result<Self> {
        Self::new(
            t.n(),
            vec![GaugeTerm {
                lambda_power: power,
                w1: a,
                w2: b,
                coeff: t.clone(),
            }],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[GaugeTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge terms with equal exponents and drop vanishing ones.
    fn simplified(mut self) -> Self {
        let mut out: Vec<GaugeTerm> = Vec::new();
        self.terms.sort_by_key(|t| (t.lambda_power, t.w1, t.w2));
        for t in self.terms {
            match out.last_mut() {
                Some(l) if (l.lambda_power, l.w1, l.w2) == (t.lambda_power, t.w1, t.w2) => {
                    l.coeff = &l.coeff + &t.coeff;
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff.max_abs() > 0.0);
        Self { n: self.n, terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { n: self.n, terms }.simplified()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|t| GaugeTerm { coeff: t.coeff.scale(c), ..t.clone() }).collect(),
        }
        .simplified()
    }

    /// Pointwise commutator `[φ₁, φ₂]`.
    pub fn commutator(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for s in &self.terms {
            for o in &other.terms {
                terms.push(GaugeTerm {
                    lambda_power: s.lambda_power + o.lambda_power,
                    w1: s.w1 + o.w1,
                    w2: s.w2 + o.w2,
                    coeff: crate::matrix_lie::commutator(&s.coeff, &o.coeff).expect("equal dimensions"),
                });
            }
        }
        Self { n: self.n, terms }.simplified()
    }

    /// The antipodal conjugate `φ†(−1/λ̄)` with the coordinates transformed
    /// alongside: `c λⁿ w₁ᵃ w₂ᵇ ↦ (−1)ⁿ⁺ᵇ c† λ^{−n−a−b} w₁ᵇ w₂ᵃ`.
    pub fn antipodal(&self) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let sign = if (t.lambda_power + t.w2 as i32).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                    GaugeTerm {
                        lambda_power: -t.lambda_power - t.w1 as i32 - t.w2 as i32,
                        w1: t.w2,
                        w2: t.w1,
                        coeff: t.coeff.dagger().scale_real(sign),
                    }
                })
                .collect(),
        }
        .simplified()
    }

    /// Reality of the induced variation only needs traceless coefficients:
    /// the combination `φ + σ(φ)` entering the action is σ-invariant for
    /// every mode table.
    pub fn is_antipodal_compatible(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.is_traceless(1e-12))
    }

    /// Expansion around `base` as a jet×Laurent object.
    pub fn to_laurent(&self, base: [f64; 4], order: i32) -> LaurentJet {
        let zero = LaurentPoly::monomial(0, Jet::zero(Frame::Complex, base, self.n, order));
        let (w1, w2) = twistor_coordinate_jets(Frame::Complex, base, order);
        let one = LaurentPoly::monomial(0, Jet::scalar(Frame::Complex, base, Complex64::new(1.0, 0.0), order));
        let mut acc = zero;
        for t in &self.terms {
            let mut s = one.clone();
            for _ in 0..t.w1 {
                s = laurent_jet_mul(&s, &w1, order);
            }
            for _ in 0..t.w2 {
                s = laurent_jet_mul(&s, &w2, order);
            }
            let term = s.map(|j| Jet::scalar_times(j, &t.coeff)).shift(t.lambda_power);
            acc = acc.add(&term);
        }
        acc
    }
}

/// `δ_φ X = φX + Xσ(φ)` with both factors given as Laurent objects.
fn gauge_type_apply(phi: &LaurentJet, sigma_phi: &LaurentJet, x: &LaurentJet, cap: i32) -> LaurentJet {
    laurent_jet_mul(phi, x, cap).add(&laurent_jet_mul(x, sigma_phi, cap))
}

fn frame_of(f: &LaurentJet) -> ([f64; 4], i32) {
    let j = &f.modes()[0];
    (j.base(), f.modes().iter().map(|m| m.order()).max().unwrap())
}

/// `δ_φℱ = φ(λ)ℱ + ℱφ†(−1/λ̄)`.
pub fn gauge_type_delta_f(phi: &GaugeTypeGenerator, f: &LaurentJet) -> LaurentJet {
    let (base, cap) = frame_of(f);
    let p = phi.to_laurent(base, cap);
    let s = phi.antipodal().to_laurent(base, cap);
    gauge_type_apply(&p, &s, f, cap)
}

/// Everything produced by one symmetry evaluation.
#[derive(Clone, Debug)]
pub struct SymmetryOutcome {
    /// The overlap function (`ψ₋ δℱ ψ₊⁻¹`) that gets split.
    pub overlap: LaurentJet,
    pub split: SplitPair<Jet>,
    pub delta_a: ComplexComponents<Jet>,
    pub delta_psi_plus: LaurentJet,
    pub delta_psi_minus: LaurentJet,
    /// `max ‖(D_ȳ − λD_z)φ₊ − (D_ȳ − λD_z)φ₋‖` and the same for
    /// `D_z̄ + λD_y`.
    pub consistency_residual: f64,
    /// Difference between the two independent constructions of the
    /// overlap function.
    pub route_discrepancy: f64,
    /// Difference between δA read from `φ₊` and from `φ₋`.
    pub side_discrepancy: f64,
}

impl SymmetryOutcome {
    pub fn variation(&self) -> Variation {
        Variation::from_complex(&self.delta_a)
    }
}

/// δA read off the plus part:
/// `δA_ȳ − λδA_z = (D_ȳ − λD_z)φ₊`, `δA_z̄ + λδA_y = (D_z̄ + λD_y)φ₊`.
fn delta_a_from_plus(a: &JetPotential, plus: &LaurentJet) -> ComplexComponents<Jet> {
    let (p0, p1) = (plus.mode_or_zero(0), plus.mode_or_zero(1));
    ComplexComponents {
        y: &a.adjoint_derive(&p1, Coord::Zbar) + &a.adjoint_derive(&p0, Coord::Y),
        ybar: a.adjoint_derive(&p0, Coord::Ybar),
        z: &a.adjoint_derive(&p0, Coord::Z) - &a.adjoint_derive(&p1, Coord::Ybar),
        zbar: a.adjoint_derive(&p0, Coord::Zbar),
    }
}

/// The same read off the minus part.
fn delta_a_from_minus(a: &JetPotential, minus: &LaurentJet) -> ComplexComponents<Jet> {
    let (m0, m1) = (minus.mode_or_zero(0), minus.mode_or_zero(-1));
    ComplexComponents {
        y: a.adjoint_derive(&m0, Coord::Y),
        ybar: &a.adjoint_derive(&m0, Coord::Ybar) - &a.adjoint_derive(&m1, Coord::Z),
        z: a.adjoint_derive(&m0, Coord::Z),
        zbar: &a.adjoint_derive(&m0, Coord::Zbar) + &a.adjoint_derive(&m1, Coord::Y),
    }
}

fn components_distance(a: &ComplexComponents<Jet>, b: &ComplexComponents<Jet>) -> f64 {
    Coord::COMPLEX
        .iter()
        .map(|c| (&a.get(*c) - &b.get(*c)).max_norm())
        .fold(0.0, f64::max)
}

/// δA, δψ± and the two-sided identities for a given splitting
/// `φ₋ − φ₊` of the overlap function.
pub fn variation_from_split(psi: &LaxSolution, parts: &SplitPair<Jet>) -> Result<SymmetryOutcome> {
    let a = psi.potential();
    let cap = psi.order();
    let delta_a = delta_a_from_plus(a, &parts.plus);
    for c in Coord::COMPLEX {
        psi.budget().require("symmetry variation", 1, delta_a.get(c).order())?;
    }
    let side = delta_a_from_minus(a, &parts.minus);
    let mut consistency: f64 = 0.0;
    for which in [1, 2] {
        let l = adjoint_frame_op(a, &parts.plus, which);
        let r = adjoint_frame_op(a, &parts.minus, which);
        consistency = consistency.max(l.sub(&r).max_norm());
    }
    let neg = Complex64::new(-1.0, 0.0);
    Ok(SymmetryOutcome {
        overlap: parts.minus.sub(&parts.plus),
        split: parts.clone(),
        side_discrepancy: components_distance(&delta_a, &side),
        delta_a,
        delta_psi_plus: laurent_jet_mul(&parts.plus, &psi.psi_plus(), cap).scale(neg),
        delta_psi_minus: laurent_jet_mul(&parts.minus, &psi.psi_minus(), cap).scale(neg),
        consistency_residual: consistency,
        route_discrepancy: 0.0,
    })
}

fn finish(psi: &LaxSolution, overlap: LaurentJet, other_route: &LaurentJet) -> Result<SymmetryOutcome> {
    let route = overlap.sub(other_route).max_norm();
    let parts = split(&overlap);
    let mut out = variation_from_split(psi, &parts)?;
    out.overlap = overlap;
    out.route_discrepancy = route;
    let tol = CONSISTENCY_TOL * (1.0 + out.overlap.max_norm());
    let worst = out.consistency_residual.max(out.side_discrepancy);
    if worst > tol {
        return Err(Error::Consistency { residual: worst });
    }
    Ok(out)
}

/// The variation generated by a loop-algebra element through
/// `δ_φℱ = φℱ + ℱσ(φ)`: the overlap function
/// `ψ₋φψ₋⁻¹ + ψ₊σ(φ)ψ₊⁻¹` is split and δA read off the plus part. The
/// overlap is also assembled as `ψ₋(δ_φℱ)ψ₊⁻¹` for comparison.
pub fn gauge_type_variation(psi: &LaxSolution, phi: &GaugeTypeGenerator) -> Result<SymmetryOutcome> {
    if phi.n() != psi.n() {
        return Err(Error::DimensionMismatch {
            left: psi.n(),
            right: phi.n(),
        });
    }
    let cap = psi.order();
    let base = psi.base();
    let p = phi.to_laurent(base, cap);
    let s = phi.antipodal().to_laurent(base, cap);
    let (pp, pm) = (psi.psi_plus(), psi.psi_minus());
    let (iota, kappa) = (psi_plus_inverse(psi)?, psi_minus_inverse(psi)?);

    let left = laurent_jet_mul(&laurent_jet_mul(&pm, &p, cap), &kappa, cap);
    let right = laurent_jet_mul(&laurent_jet_mul(&pp, &s, cap), &iota, cap);
    let overlap = left.add(&right);

    let f = laurent_jet_mul(&kappa, &pp, cap);
    let df = gauge_type_apply(&p, &s, &f, cap);
    let other = laurent_jet_mul(&laurent_jet_mul(&pm, &df, cap), &iota, cap);
    finish(psi, overlap, &other)
}

/// Which chart a vector field of a diffeomorphism-type generator lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

/// A pair of holomorphic vector fields on the two charts; either may be
/// absent (zero).
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoTypeGenerator {
    pub plus: Option<TwistorVectorField>,
    pub minus: Option<TwistorVectorField>,
}

impl DiffeoTypeGenerator {
    pub fn zero() -> Self {
        Self { plus: None, minus: None }
    }

    pub fn on(branch: Branch, field: TwistorVectorField) -> Self {
        match branch {
            Branch::Plus => Self {
                plus: Some(field),
                minus: None,
            },
            Branch::Minus => Self {
                plus: None,
                minus: Some(field),
            },
        }
    }

    pub fn field(&self, branch: Branch) -> Option<&TwistorVectorField> {
        match branch {
            Branch::Plus => self.plus.as_ref(),
            Branch::Minus => self.minus.as_ref(),
        }
    }
}

fn apply_or_zero(eta: Option<&TwistorVectorField>, f: &LaurentJet, cap: i32) -> LaurentJet {
    match eta {
        Some(e) => e.apply(f, cap),
        None => f.map(|j| j.scale_real(0.0)),
    }
}

/// The variation `δ^±_η ℱ = η±(ℱ)`: the overlap function
/// `ψ₋ η(ℱ) ψ₊⁻¹` is split and δA read off the plus part. The overlap is
/// also assembled as `η(ψ₊)ψ₊⁻¹ − η(ψ₋)ψ₋⁻¹` for comparison.
pub fn diffeo_type_variation(psi: &LaxSolution, eta: &DiffeoTypeGenerator, branch: Branch) -> Result<SymmetryOutcome> {
    let cap = psi.order();
    let field = eta.field(branch);
    let (pp, pm) = (psi.psi_plus(), psi.psi_minus());
    let (iota, kappa) = (psi_plus_inverse(psi)?, psi_minus_inverse(psi)?);
    let f = laurent_jet_mul(&kappa, &pp, cap);
    let ef = apply_or_zero(field, &f, cap);
    let overlap = laurent_jet_mul(&laurent_jet_mul(&pm, &ef, cap), &iota, cap);
    let other = laurent_jet_mul(&apply_or_zero(field, &pp, cap), &iota, cap)
        .sub(&laurent_jet_mul(&apply_or_zero(field, &pm, cap), &kappa, cap));
    finish(psi, overlap, &other)
}

/// `δ_η = δ⁻_η − δ⁺_η` on the potential.
pub fn diffeo_type_combined(psi: &LaxSolution, eta: &DiffeoTypeGenerator) -> Result<ComplexComponents<Jet>> {
    let plus = diffeo_type_variation(psi, eta, Branch::Plus)?.delta_a;
    let minus = diffeo_type_variation(psi, eta, Branch::Minus)?.delta_a;
    Ok(ComplexComponents {
        y: &minus.y - &plus.y,
        ybar: &minus.ybar - &plus.ybar,
        z: &minus.z - &plus.z,
        zbar: &minus.zbar - &plus.zbar,
    })
}

/// `‖[δ_φ₁, δ_φ₂]ℱ − δ_{[φ₁,φ₂]}ℱ‖`, where `(δ_a ∘ δ_b)ℱ` applies the
/// formula for `δ_a` to `δ_bℱ`.
pub fn action_bracket_check(phi1: &GaugeTypeGenerator, phi2: &GaugeTypeGenerator, f: &LaurentJet) -> f64 {
    let (base, cap) = frame_of(f);
    let p1 = phi1.to_laurent(base, cap);
    let s1 = phi1.antipodal().to_laurent(base, cap);
    let p2 = phi2.to_laurent(base, cap);
    let s2 = phi2.antipodal().to_laurent(base, cap);
    let d12 = gauge_type_apply(&p1, &s1, &gauge_type_apply(&p2, &s2, f, cap), cap);
    let d21 = gauge_type_apply(&p2, &s2, &gauge_type_apply(&p1, &s1, f, cap), cap);
    let rhs = gauge_type_delta_f(&phi1.commutator(phi2), f);
    d12.sub(&d21).sub(&rhs).max_norm()
}

/// `‖(δ_η∘δ_φ − δ_φ∘δ_η)ℱ − δ_{η(φ)}ℱ‖` with `δ_ηX = η(X)`. The right
/// side uses the antipodal map on Laurent objects since `η(φ)` is no
/// longer a polynomial in the twistor coordinates.
pub fn derivation_check(eta: &TwistorVectorField, phi: &GaugeTypeGenerator, f: &LaurentJet) -> f64 {
    let (base, cap) = frame_of(f);
    let p = phi.to_laurent(base, cap);
    let s = phi.antipodal().to_laurent(base, cap);
    let eta_after_phi = eta.apply(&gauge_type_apply(&p, &s, f, cap), cap);
    let phi_after_eta = gauge_type_apply(&p, &s, &eta.apply(f, cap), cap);
    let lhs = eta_after_phi.sub(&phi_after_eta);
    let ep = eta.apply(&p, cap);
    let rhs = gauge_type_apply(&ep, &antipodal_laurent(&ep), f, cap);
    lhs.sub(&rhs).max_norm()
}

/// Gauge parameter reproducing the variation of the λ-independent loop
/// element `T`: `ϑ = −½(ξ₀Tξ₀⁻¹ + χ₀Tχ₀⁻¹)`. It differs from the split
/// part `φ₊` by `ψ₊Tψ₊⁻¹`, which is covariantly constant along the frame.
pub fn loop_zero_mode_gauge_parameter(psi: &LaxSolution, t: &LieMatrix) -> Result<Jet> {
    let cap = psi.order();
    let conj = |j: &Jet| -> Result<Jet> { Ok(j.right_mul(t).mul_capped(&j.inverse()?, cap)) };
    Ok((&conj(&psi.xi()[0])? + &conj(&psi.chi()[0])?).scale_real(-0.5))
}

/// Least-squares search for a polynomial `ϑ` (sl(n,C)-valued, degree ≤
/// `degree` in the complex frame) minimizing `‖δA − Dϑ‖` over the known
/// coefficients of δA. Returns `ϑ` and the remaining max-norm distance.
pub fn nearest_gauge_parameter(a: &JetPotential, delta_a: &ComplexComponents<Jet>, degree: usize) -> Result<(Jet, f64)> {
    let n = a.n();
    let base = a.base();
    let order = Coord::COMPLEX.iter().map(|c| delta_a.get(*c).order()).min().unwrap();
    let mut algebra: Vec<LieMatrix> = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if r != c {
                let mut m = LieMatrix::zeros(n);
                m.set(r, c, Complex64::new(1.0, 0.0));
                algebra.push(m);
            }
        }
    }
    for k in 0..n.saturating_sub(1) {
        let mut m = LieMatrix::zeros(n);
        m.set(k, k, Complex64::new(1.0, 0.0));
        m.set(k + 1, k + 1, Complex64::new(-1.0, 0.0));
        algebra.push(m);
    }
    let theta_order = order + 1;
    let mut columns: Vec<Jet> = Vec::new();
    for e in monomials(degree as i32) {
        let mut mono = Jet::scalar(Frame::Complex, base, Complex64::new(1.0, 0.0), theta_order);
        for (v, &p) in e.iter().enumerate() {
            let x = Jet::variable(Frame::Complex, base, v, theta_order);
            for _ in 0..p {
                mono = mono.mul_capped(&x, theta_order);
            }
        }
        for t in &algebra {
            columns.push(Jet::scalar_times(&mono, t));
        }
    }
    let flatten = |comps: &ComplexComponents<Jet>| -> Vec<Complex64> {
        let mut v = Vec::new();
        for c in Coord::COMPLEX {
            v.extend_from_slice(&comps.get(c).truncate(order).raw());
        }
        v
    };
    let images: Vec<Vec<Complex64>> = columns
        .iter()
        .map(|t| {
            flatten(&ComplexComponents {
                y: a.adjoint_derive(t, Coord::Y),
                ybar: a.adjoint_derive(t, Coord::Ybar),
                z: a.adjoint_derive(t, Coord::Z),
                zbar: a.adjoint_derive(t, Coord::Zbar),
            })
        })
        .collect();
    let target = flatten(delta_a);
    let rows = target.len();
    let m = DMatrix::from_fn(rows, images.len(), |r, c| images[c].get(r).copied().unwrap_or_default());
    let b = DVector::from_vec(target);
    let svd = m.svd(true, true);
    let x = svd.solve(&b, 1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut theta = Jet::zero(Frame::Complex, base, n, theta_order);
    for (k, col) in columns.iter().enumerate() {
        theta = &theta + &col.scale(x[k]);
    }
    let fitted = ComplexComponents {
        y: a.adjoint_derive(&theta, Coord::Y),
        ybar: a.adjoint_derive(&theta, Coord::Ybar),
        z: a.adjoint_derive(&theta, Coord::Z),
        zbar: a.adjoint_derive(&theta, Coord::Zbar),
    };
    let dist = Coord::COMPLEX
        .iter()
        .map(|c| (&delta_a.get(*c).truncate(order) - &fitted.get(*c).truncate(order)).max_norm())
        .fold(0.0, f64::max);
    Ok((theta, dist))
}
