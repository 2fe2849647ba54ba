//! Gauge transformations and the 15 conformal generators acting on
//! potentials.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gauge_field::{JetPotential, Variation};
use crate::jet::{Coord, Frame, Jet};
use crate::matrix_lie::{su2_basis, thooft, LieMatrix, ThooftKind};
use crate::poly::{half, rank, Exps, Poly};

type Q = Rational64;

/// Polynomial vector field `Nᵛ ∂_ν` on R⁴ with exact rational
/// coefficients in x¹..x⁴ (poly variables 0..4).
#[derive(Clone, PartialEq)]
pub struct VectorField {
    pub comps: [Poly<Q>; 4],
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.comps.iter()).finish()
    }
}

impl VectorField {
    pub fn zero() -> Self {
        Self {
            comps: std::array::from_fn(|_| Poly::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, c: Q) -> Self {
        Self {
            comps: self.comps.each_ref().map(|p| p.scale(&c)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            comps: std::array::from_fn(|k| &self.comps[k] + &other.comps[k]),
        }
    }

    /// `Nᵛ(x)` at a real point.
    pub fn eval(&self, x: &[f64; 4]) -> [f64; 4] {
        let v = [
            Complex64::new(x[0], 0.0),
            Complex64::new(x[1], 0.0),
            Complex64::new(x[2], 0.0),
            Complex64::new(x[3], 0.0),
            Complex64::new(0.0, 0.0),
        ];
        self.comps.each_ref().map(|p| p.eval(&v).re)
    }

    /// Coefficient vector over all monomials of degree ≤ 2, for rank tests.
    pub fn coefficient_vector(&self) -> Vec<Q> {
        let mut out = Vec::new();
        for c in &self.comps {
            for e in crate::jet::monomials(2) {
                let ex: Exps = [e[0], e[1], e[2], e[3], 0];
                out.push(c.coeff(&ex));
            }
        }
        out
    }

    /// Scalar jets of the components around `base`.
    pub fn to_jets(&self, frame: Frame, base: [f64; 4], order: i32) -> [Jet; 4] {
        self.comps.each_ref().map(|p| poly_to_jet(p, frame, base, order))
    }
}

/// Jet of a real polynomial in the global coordinates.
pub fn poly_to_jet(p: &Poly<Q>, frame: Frame, base: [f64; 4], order: i32) -> Jet {
    let xs: Vec<Jet> = (0..4).map(|m| Jet::coordinate(frame, base, Coord::X(m), order)).collect();
    let mut acc = Jet::scalar(frame, base, Complex64::new(0.0, 0.0), order);
    for (e, c) in p.terms() {
        let mut t = Jet::scalar(frame, base, Complex64::new(c.to_f64().unwrap(), 0.0), order);
        for m in 0..4 {
            for _ in 0..e[m] {
                t = t.mul_capped(&xs[m], order);
            }
        }
        acc = &acc + &t;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorKind {
    /// Rotation built from the self-dual tensors, index a ∈ 0..3.
    X(usize),
    /// Rotation built from the anti-self-dual tensors, index a ∈ 0..3.
    Y(usize),
    /// Translation, index μ ∈ 0..4.
    P(usize),
    /// Special conformal transformation, index μ ∈ 0..4.
    K(usize),
    /// Dilatation.
    B,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::X(a) => write!(f, "X{}", a + 1),
            GeneratorKind::Y(a) => write!(f, "Y{}", a + 1),
            GeneratorKind::P(m) => write!(f, "P{}", m + 1),
            GeneratorKind::K(m) => write!(f, "K{}", m + 1),
            GeneratorKind::B => write!(f, "B"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalGenerator {
    pub kind: GeneratorKind,
    pub field: VectorField,
}

fn x(m: usize) -> Poly<Q> {
    Poly::var(m)
}

fn rotation(kind: ThooftKind, a: usize) -> VectorField {
    // Nᵛ = k^a_μν x_μ
    VectorField {
        comps: std::array::from_fn(|nu| {
            let mut p = Poly::zero();
            for mu in 0..4 {
                let k = thooft(kind, a, mu, nu);
                if k != 0 {
                    p = &p + &x(mu).scale(&Q::from_integer(k as i64));
                }
            }
            p
        }),
    }
}

fn dilatation() -> VectorField {
    VectorField {
        comps: std::array::from_fn(x),
    }
}

pub fn conformal_generator(kind: GeneratorKind) -> Result<ConformalGenerator> {
    let bad = |what: &str, i: usize| Err(Error::InvalidParameter(format!("{what} index {i} out of range")));
    let field = match kind {
        GeneratorKind::X(a) if a < 3 => rotation(ThooftKind::Eta, a),
        GeneratorKind::Y(a) if a < 3 => rotation(ThooftKind::EtaBar, a),
        GeneratorKind::X(a) | GeneratorKind::Y(a) => return bad("rotation", a),
        GeneratorKind::P(m) if m < 4 => {
            let mut f = VectorField::zero();
            f.comps[m] = Poly::constant(Q::from_integer(1));
            f
        }
        GeneratorKind::K(m) if m < 4 => {
            // ½ x_σ x_σ ∂_μ − x_μ x_ν ∂_ν
            let sq = (0..4).fold(Poly::zero(), |acc, s| &acc + &(&x(s) * &x(s)));
            let mut f = VectorField {
                comps: std::array::from_fn(|nu| -&(&x(m) * &x(nu))),
            };
            f.comps[m] = &f.comps[m] + &sq.scale(&half());
            f
        }
        GeneratorKind::P(m) | GeneratorKind::K(m) => return bad("vector", m),
        GeneratorKind::B => dilatation(),
    };
    Ok(ConformalGenerator { kind, field })
}

/// All 15 generators in a fixed order: X, Y, P, K, B.
pub fn all_generators() -> Vec<ConformalGenerator> {
    let mut kinds = Vec::new();
    kinds.extend((0..3).map(GeneratorKind::X));
    kinds.extend((0..3).map(GeneratorKind::Y));
    kinds.extend((0..4).map(GeneratorKind::P));
    kinds.extend((0..4).map(GeneratorKind::K));
    kinds.push(GeneratorKind::B);
    kinds.into_iter().map(|k| conformal_generator(k).unwrap()).collect()
}

/// Exact Lie bracket `[N, M]ᵛ = N^σ ∂_σ Mᵛ − M^σ ∂_σ Nᵛ`.
pub fn vf_bracket(n: &VectorField, m: &VectorField) -> VectorField {
    VectorField {
        comps: std::array::from_fn(|nu| {
            let mut acc = Poly::zero();
            for s in 0..4 {
                acc = &acc + &(&n.comps[s] * &m.comps[nu].derive(s));
                acc = &acc - &(&m.comps[s] * &n.comps[nu].derive(s));
            }
            acc
        }),
    }
}

/// Exact rank of the span of the given fields.
pub fn span_rank(fields: &[VectorField]) -> usize {
    let rows: Vec<Vec<Q>> = fields.iter().map(|f| f.coefficient_vector()).collect();
    rank(&rows)
}

/// Largest rank increase caused by appending one pairwise bracket to the
/// generator span; zero means the set closes.
pub fn closure_defect(gens: &[VectorField]) -> usize {
    let base = span_rank(gens);
    let mut worst = 0;
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            let mut all = gens.to_vec();
            all.push(vf_bracket(a, b));
            worst = worst.max(span_rank(&all) - base);
        }
    }
    worst
}

/// `δ_ϑ A_μ = ∂_μ ϑ + [A_μ, ϑ]`.
pub fn gauge_variation(a: &JetPotential, theta: &Jet) -> Result<Variation> {
    if theta.frame() != a.frame() || theta.base() != a.base() {
        return Err(Error::FrameMismatch);
    }
    Ok(Variation::Jet(std::array::from_fn(|m| a.adjoint_derive(theta, Coord::X(m)))))
}

/// `Nᵛ ∂_ν ω_μ + ω_ν ∂_μ Nᵛ` for a 1-form ω given by four jets.
pub fn lie_derivative(n: &VectorField, w: &[Jet; 4]) -> Result<[Jet; 4]> {
    let order = w.iter().map(|c| c.order()).min().unwrap();
    if order < 1 {
        return Err(Error::InsufficientOrder {
            what: "conformal variation",
            needed: 1,
            have: order,
        });
    }
    let (frame, base) = (w[0].frame(), w[0].base());
    let nj = n.to_jets(frame, base, order + 1);
    Ok(std::array::from_fn(|mu| {
        let mut acc = Jet::zero(frame, base, w[0].n(), order - 1);
        for nu in 0..4 {
            acc = &acc + &(&nj[nu] * &w[mu].derive(Coord::X(nu)));
            acc = &acc + &(&w[nu] * &nj[nu].derive(Coord::X(mu)));
        }
        acc
    }))
}

/// `δ_N A_μ = Nᵛ ∂_ν A_μ + A_ν ∂_μ Nᵛ`.
pub fn conformal_variation(a: &JetPotential, n: &VectorField) -> Result<Variation> {
    Ok(Variation::Jet(lie_derivative(n, a.comps())?))
}

/// `(δ_N ∘ δ_M) A`: the formula for `δ_N` applied to the varied 1-form
/// `δ_M A`.
pub fn compose_conformal(a: &JetPotential, n: &VectorField, m: &VectorField) -> Result<[Jet; 4]> {
    let inner = lie_derivative(m, a.comps())?;
    lie_derivative(n, &inner)
}

/// Random su(2)-valued polynomial `ϑ = Σ_a p_a(x) T_a` with real
/// coefficients of total degree ≤ `degree`.
pub fn random_gauge_parameter(rng: &mut impl Rng, base: [f64; 4], order: i32, degree: usize) -> Jet {
    let t = su2_basis();
    let mut acc = Jet::zero(Frame::Complex, base, 2, order);
    for ta in &t {
        let mut p = Poly::<Q>::zero();
        for e in crate::jet::monomials(degree as i32) {
            let c = Q::new(rng.gen_range(-8..=8), 8);
            if !c.is_zero() {
                p.add_term([e[0], e[1], e[2], e[3], 0], c);
            }
        }
        let j = poly_to_jet(&p, Frame::Complex, base, order);
        acc = &acc + &Jet::scalar_times(&j, ta);
    }
    acc
}

/// Embed an su(2) element into n×n.
pub fn embed(m: &LieMatrix, n: usize) -> LieMatrix {
    let mut out = LieMatrix::zeros(n);
    for r in 0..m.n() {
        for c in 0..m.n() {
            out.set(r, c, m.get(r, c));
        }
    }
    out
}
