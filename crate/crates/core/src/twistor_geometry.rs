//! Complex structures on R⁴, the antiholomorphic frame on twistor space,
//! twistor coordinates, holomorphy residuals and the lift of conformal
//! vector fields.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::jet::{Coord, Frame, Jet};
use crate::manifest_symmetry::VectorField;
use crate::matrix_lie::{thooft, LinearValue, ThooftKind};
use crate::poly::{cq, solve_exact, to_complex, Cq, Exps, Poly, Solve, NVARS};
use crate::riemann_hilbert::LaurentPoly;

/// Laurent polynomial in λ with jet coefficients.
pub type LaurentJet = LaurentPoly<Jet>;

pub const DEFAULT_ALPHA: f64 = 0.5;

/// Polynomial variable slots for twistor-space polynomials.
pub const VAR_Y: usize = 0;
pub const VAR_YBAR: usize = 1;
pub const VAR_Z: usize = 2;
pub const VAR_ZBAR: usize = 3;
pub const VAR_LAMBDA: usize = 4;

/// A point `s` on the unit two-sphere and its stereographic image λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexStructureParams {
    pub s: [f64; 3],
    pub lambda: Complex64,
}

impl ComplexStructureParams {
    pub fn new(s: [f64; 3]) -> Result<Self> {
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("|s| = {norm}, expected 1")));
        }
        if s[2] <= -1.0 + 1e-15 {
            return Err(Error::InvalidParameter("s = (0,0,-1) maps to λ = ∞; use the other chart".into()));
        }
        let lambda = Complex64::new(s[0], s[1]) / (1.0 + s[2]);
        Ok(Self { s, lambda })
    }
}

/// `J^ν_μ = s_a η̄^a_μν`, returned as `j[ν][μ]` so that `(Jv)^ν = Σ_μ j[ν][μ] v^μ`.
pub fn complex_structure(s: [f64; 3]) -> Result<[[f64; 4]; 4]> {
    ComplexStructureParams::new(s)?;
    Ok(std::array::from_fn(|nu| {
        std::array::from_fn(|mu| (0..3).map(|a| s[a] * thooft(ThooftKind::EtaBar, a, mu, nu) as f64).sum())
    }))
}

/// Real-basis components of `V̄₁ = ∂_ȳ − λ∂_z` (which = 1) or
/// `V̄₂ = ∂_z̄ + λ∂_y` (which = 2).
pub fn frame_vector(which: usize, lambda: Complex64) -> [Complex64; 4] {
    let h = 0.5;
    let i = Complex64::new(0.0, 1.0);
    // ∂_y = ½(∂1 − i∂2), ∂_ȳ = ½(∂1 + i∂2), ∂_z = ½(∂3 + i∂4), ∂_z̄ = ½(∂3 − i∂4)
    let dy = [Complex64::new(h, 0.0), -i * h, Complex64::default(), Complex64::default()];
    let dybar = [Complex64::new(h, 0.0), i * h, Complex64::default(), Complex64::default()];
    let dz = [Complex64::default(), Complex64::default(), Complex64::new(h, 0.0), i * h];
    let dzbar = [Complex64::default(), Complex64::default(), Complex64::new(h, 0.0), -i * h];
    match which {
        1 => std::array::from_fn(|k| dybar[k] - lambda * dz[k]),
        2 => std::array::from_fn(|k| dzbar[k] + lambda * dy[k]),
        _ => panic!("frame index must be 1 or 2"),
    }
}

/// `(w₁, w₂) = (y − λz̄, z + λȳ)` at a real point.
pub fn twistor_coords(x: &[f64; 4], lambda: Complex64) -> (Complex64, Complex64) {
    let y = Complex64::new(x[0], x[1]);
    let z = Complex64::new(x[2], -x[3]);
    (y - lambda * z.conj(), z + lambda * y.conj())
}

/// `w₁` and `w₂` as scalar jet×Laurent objects around `base`.
pub fn twistor_coordinate_jets(frame: Frame, base: [f64; 4], order: i32) -> (LaurentJet, LaurentJet) {
    let c = |k| Jet::coordinate(frame, base, k, order);
    let w1 = LaurentPoly::new(0, vec![c(Coord::Y), c(Coord::Zbar).scale_real(-1.0)]);
    let w2 = LaurentPoly::new(0, vec![c(Coord::Z), c(Coord::Ybar)]);
    (w1, w2)
}

/// The two-set cover of the λ-sphere: `C₊ = {|λ| ≤ 1+α}`, `C₋ = {|λ| ≥ 1−α}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverRegion {
    pub alpha: f64,
}

impl Default for CoverRegion {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA }
    }
}

impl CoverRegion {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("cover parameter must be in (0,1), got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn in_plus(&self, lambda: Complex64) -> bool {
        lambda.norm() <= 1.0 + self.alpha
    }

    pub fn in_minus(&self, lambda: Complex64) -> bool {
        lambda.norm() >= 1.0 - self.alpha
    }

    pub fn in_overlap(&self, lambda: Complex64) -> bool {
        let r = lambda.norm();
        (1.0 - self.alpha..=1.0 + self.alpha).contains(&r)
    }

    /// λ-samples on |λ| = 1 and the circles |λ| = 1 ± α/2.
    pub fn samples(&self, per_circle: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(3 * per_circle);
        for r in [1.0, 1.0 - self.alpha / 2.0, 1.0 + self.alpha / 2.0] {
            for k in 0..per_circle {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / per_circle as f64;
                out.push(Complex64::from_polar(r, t));
            }
        }
        out
    }
}

/// `(V̄₁ F)_m = ∂_ȳ F_m − ∂_z F_{m−1}`.
pub fn apply_vbar1(f: &LaurentJet) -> LaurentJet {
    shifted_combination(f, Coord::Ybar, Coord::Z, -1.0)
}

/// `(V̄₂ F)_m = ∂_z̄ F_m + ∂_y F_{m−1}`.
pub fn apply_vbar2(f: &LaurentJet) -> LaurentJet {
    shifted_combination(f, Coord::Zbar, Coord::Y, 1.0)
}

fn shifted_combination(f: &LaurentJet, c0: Coord, c1: Coord, sign: f64) -> LaurentJet {
    let a = f.map(|j| j.derive(c0));
    let b = f.map(|j| j.derive(c1).scale_real(sign)).shift(1);
    a.add(&b)
}

/// `max_λ Σ_m |λ|^m ‖(V̄_a F)_m‖` over a ∈ {1, 2} and the λ-samples, each
/// mode measured on its own known coefficients.
pub fn holomorphy_residual(f: &LaurentJet, lambdas: &[Complex64]) -> f64 {
    let parts = [apply_vbar1(f), apply_vbar2(f)];
    let mut worst: f64 = 0.0;
    for l in lambdas {
        let r = l.norm();
        for p in &parts {
            let s: f64 = p.iter().map(|(m, j)| r.powi(m) * j.max_norm()).sum();
            worst = worst.max(s);
        }
    }
    worst
}

/// `∂_λ F`.
pub fn lambda_derivative<C: LinearValue>(f: &LaurentPoly<C>) -> LaurentPoly<C> {
    f.map_indexed(|m, c| c.scale_value(Complex64::new(m as f64, 0.0))).shift(-1)
}

/// Product of jet×Laurent objects with every coefficient product capped at
/// `cap`.
pub fn laurent_jet_mul(a: &LaurentJet, b: &LaurentJet, cap: i32) -> LaurentJet {
    a.mul_with(b, |x, y| x.mul_capped(y, cap))
}

/// Holomorphic vector field on twistor space,
/// `λ^shift (ηʸ ∂_y + η^ȳ ∂_ȳ + η^z ∂_z + η^z̄ ∂_z̄ + η^λ ∂_λ)`,
/// with polynomial coefficients in (y, ȳ, z, z̄, λ).
#[derive(Clone, Debug, PartialEq)]
pub struct TwistorVectorField {
    /// Components along ∂_y, ∂_ȳ, ∂_z, ∂_z̄.
    pub horizontal: [Poly<Cq>; 4],
    pub vertical: Poly<Cq>,
    pub shift: i32,
}

/// Substitution `xᵘ ↦` complex coordinates.
fn real_to_complex_subs() -> [Poly<Cq>; NVARS] {
    let h = Rational64::new(1, 2);
    let c = |re: Rational64, im: Rational64| Cq::new(re, im);
    let z = Rational64::zero();
    let v = |k| Poly::<Cq>::var(k);
    [
        &v(VAR_Y).scale(&c(h, z)) + &v(VAR_YBAR).scale(&c(h, z)),
        &v(VAR_Y).scale(&c(z, -h)) + &v(VAR_YBAR).scale(&c(z, h)),
        &v(VAR_Z).scale(&c(h, z)) + &v(VAR_ZBAR).scale(&c(h, z)),
        &v(VAR_Z).scale(&c(z, h)) + &v(VAR_ZBAR).scale(&c(z, -h)),
        v(VAR_LAMBDA),
    ]
}

/// Complex-basis components `(Nʸ, N^ȳ, N^z, N^z̄)` of a real vector field,
/// as polynomials in the complex coordinates.
pub fn complex_basis_components(n: &VectorField) -> [Poly<Cq>; 4] {
    let subs = real_to_complex_subs();
    let c: Vec<Poly<Cq>> = n.comps.iter().map(|p| to_complex(p).substitute(&subs)).collect();
    let i = cq(0, 1);
    [
        &c[0] + &c[1].scale(&i),
        &c[0] - &c[1].scale(&i),
        &c[2] - &c[3].scale(&i),
        &c[2] + &c[3].scale(&i),
    ]
}

/// First-order operator with polynomial coefficients on the five
/// twistor variables.
type PolyField = [Poly<Cq>; NVARS];

fn apply_field(v: &PolyField, p: &Poly<Cq>) -> Poly<Cq> {
    let mut acc = Poly::zero();
    for k in 0..NVARS {
        if !v[k].is_zero() {
            acc = &acc + &(&v[k] * &p.derive(k));
        }
    }
    acc
}

fn field_bracket(u: &PolyField, w: &PolyField) -> PolyField {
    std::array::from_fn(|k| &apply_field(u, &w[k]) - &apply_field(w, &u[k]))
}

fn vbar_fields() -> [PolyField; 2] {
    let lam = Poly::<Cq>::var(VAR_LAMBDA);
    let one = Poly::constant(cq(1, 0));
    let z = Poly::zero;
    [
        [z(), one.clone(), -&lam, z(), z()],
        [lam, z(), z(), one, z()],
    ]
}

impl TwistorVectorField {
    pub fn zero() -> Self {
        Self {
            horizontal: std::array::from_fn(|_| Poly::zero()),
            vertical: Poly::zero(),
            shift: 0,
        }
    }

    /// The field without its λ^shift prefactor.
    fn unshifted(&self) -> PolyField {
        [
            self.horizontal[0].clone(),
            self.horizontal[1].clone(),
            self.horizontal[2].clone(),
            self.horizontal[3].clone(),
            self.vertical.clone(),
        ]
    }

    /// Multiply by λⁿ.
    pub fn times_lambda_power(&self, n: i32) -> Self {
        Self {
            shift: self.shift + n,
            ..self.clone()
        }
    }

    pub fn scale(&self, c: &Cq) -> Self {
        Self {
            horizontal: self.horizontal.each_ref().map(|p| p.scale(c)),
            vertical: self.vertical.scale(c),
            shift: self.shift,
        }
    }

    /// Sum of two fields with the same λ-prefactor.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shift != other.shift {
            return Err(Error::InvalidParameter("fields carry different λ prefactors".into()));
        }
        Ok(Self {
            horizontal: std::array::from_fn(|k| &self.horizontal[k] + &other.horizontal[k]),
            vertical: &self.vertical + &other.vertical,
            shift: self.shift,
        })
    }

    /// Maximum degree in λ of the vertical component.
    pub fn vertical_lambda_degree(&self) -> Option<u8> {
        self.vertical.degree_in(VAR_LAMBDA)
    }

    /// True if the vertical component does not depend on x.
    pub fn vertical_is_x_independent(&self) -> bool {
        self.vertical.terms().all(|(e, _)| e[..4].iter().all(|&v| v == 0))
    }

    /// Holomorphy-preservation defect: `[Ñ, V̄_a] − c₁V̄₁ − c₂V̄₂` with the
    /// coefficients read off the ∂_ȳ and ∂_z̄ components, evaluated at
    /// real points and λ-samples (the λ^shift prefactor is annihilated by
    /// V̄_a and does not enter).
    pub fn bracket_residual(&self, points: &[[f64; 4]], lambdas: &[Complex64]) -> f64 {
        let me = self.unshifted();
        let frame = vbar_fields();
        let mut worst: f64 = 0.0;
        for v in &frame {
            let br = field_bracket(&me, v);
            for x in points {
                for l in lambdas {
                    let y = Complex64::new(x[0], x[1]);
                    let z = Complex64::new(x[2], -x[3]);
                    let vals = [y, y.conj(), z, z.conj(), *l];
                    let b: Vec<Complex64> = br.iter().map(|p| p.eval(&vals)).collect();
                    let f1: Vec<Complex64> = frame[0].iter().map(|p| p.eval(&vals)).collect();
                    let f2: Vec<Complex64> = frame[1].iter().map(|p| p.eval(&vals)).collect();
                    let (c1, c2) = (b[VAR_YBAR], b[VAR_ZBAR]);
                    for k in 0..NVARS {
                        worst = worst.max((b[k] - c1 * f1[k] - c2 * f2[k]).norm());
                    }
                }
            }
        }
        worst
    }

    /// Components as scalar jet×Laurent objects around `base`:
    /// `[ηʸ, η^ȳ, η^z, η^z̄, η^λ]`, including the λ^shift prefactor.
    pub fn to_laurent_jets(&self, frame: Frame, base: [f64; 4], order: i32) -> [LaurentJet; 5] {
        let coords: Vec<Jet> = Coord::COMPLEX.iter().map(|c| Jet::coordinate(frame, base, *c, order)).collect();
        let conv = |p: &Poly<Cq>| -> LaurentJet {
            let top = p.degree_in(VAR_LAMBDA).unwrap_or(0) as i32;
            let mut modes: Vec<Jet> = (0..=top)
                .map(|_| Jet::scalar(frame, base, Complex64::new(0.0, 0.0), order))
                .collect();
            for (e, c) in p.terms() {
                let mut t = Jet::scalar(frame, base, crate::poly::Coeff::to_c64(c), order);
                for (v, coord) in coords.iter().enumerate() {
                    for _ in 0..e[v] {
                        t = t.mul_capped(coord, order);
                    }
                }
                let k = e[VAR_LAMBDA] as usize;
                modes[k] = &modes[k] + &t;
            }
            LaurentPoly::new(self.shift, modes)
        };
        [
            conv(&self.horizontal[0]),
            conv(&self.horizontal[1]),
            conv(&self.horizontal[2]),
            conv(&self.horizontal[3]),
            conv(&self.vertical),
        ]
    }

    /// `η(F) = Σ_c η^c ∂_c F + η^λ ∂_λ F`, products capped at `cap`.
    pub fn apply(&self, f: &LaurentJet, cap: i32) -> LaurentJet {
        let (frame, base) = (f.modes()[0].frame(), f.modes()[0].base());
        let comps = self.to_laurent_jets(frame, base, cap + 1);
        let mut acc: Option<LaurentJet> = None;
        for (k, c) in Coord::COMPLEX.iter().enumerate() {
            if self.horizontal[k].is_zero() {
                continue;
            }
            let d = f.map(|j| j.derive(*c));
            let t = laurent_jet_mul(&comps[k], &d, cap);
            acc = Some(match acc {
                Some(a) => a.add(&t),
                None => t,
            });
        }
        if !self.vertical.is_zero() {
            let t = laurent_jet_mul(&comps[4], &lambda_derivative(f), cap);
            acc = Some(match acc {
                Some(a) => a.add(&t),
                None => t,
            });
        }
        acc.unwrap_or_else(|| f.map(|j| j.scale_real(0.0)))
    }
}

fn monomial_basis(max_deg: usize) -> Vec<Exps> {
    let mut out = Vec::new();
    for e in crate::jet::monomials(max_deg as i32) {
        out.push([e[0], e[1], e[2], e[3], 0]);
    }
    out
}

/// Lift a conformal vector field to twistor space by solving for the
/// vertical component `Ñ^λ` (polynomial of degree ≤ 2 in λ and ≤ 2 in x)
/// that makes `[Ñ, V̄_a]` a combination of `V̄₁, V̄₂`.
pub fn lift_conformal(n: &VectorField) -> Result<TwistorVectorField> {
    let comps = complex_basis_components(n);
    let [ny, nybar, nz, nzbar] = comps.clone();
    let frame = vbar_fields();
    let v1 = |p: &Poly<Cq>| apply_field(&frame[0], p);
    let v2 = |p: &Poly<Cq>| apply_field(&frame[1], p);
    let lam = Poly::<Cq>::var(VAR_LAMBDA);

    // conditions that only involve N
    let c1 = &v1(&ny) - &(&lam * &v1(&nzbar));
    let c2 = &v2(&nz) + &(&lam * &v2(&nybar));
    if !c1.is_zero() || !c2.is_zero() {
        return Err(Error::NoSolution("vector field does not preserve the complex structures".into()));
    }

    // unknowns u_{k,m}: coefficient of λᵏ·m(y,ȳ,z,z̄)
    let basis = monomial_basis(2);
    let mut unknowns: Vec<Poly<Cq>> = Vec::new();
    for k in 0..=2u8 {
        for m in &basis {
            let mut e = *m;
            e[VAR_LAMBDA] = k;
            unknowns.push(Poly::monomial(cq(1, 0), e));
        }
    }
    // equations: L(u) = rhs, as polynomial identities
    //   Ñ^λ = −V̄₁(N^z) − λV̄₁(N^ȳ)
    //   Ñ^λ = V̄₂(Nʸ) − λV̄₂(N^z̄)
    //   V̄₁(Ñ^λ) = 0,  V̄₂(Ñ^λ) = 0
    let rhs1 = -&(&v1(&nz) + &(&lam * &v1(&nybar)));
    let rhs2 = &v2(&ny) - &(&lam * &v2(&nzbar));
    let eqs: Vec<(Box<dyn Fn(&Poly<Cq>) -> Poly<Cq>>, Poly<Cq>)> = vec![
        (Box::new(|p: &Poly<Cq>| p.clone()), rhs1),
        (Box::new(|p: &Poly<Cq>| p.clone()), rhs2),
        (Box::new(move |p: &Poly<Cq>| v1(p)), Poly::zero()),
        (Box::new(move |p: &Poly<Cq>| v2(p)), Poly::zero()),
    ];
    let mut rows: Vec<Vec<Cq>> = Vec::new();
    for (op, rhs) in &eqs {
        let images: Vec<Poly<Cq>> = unknowns.iter().map(op).collect();
        let mut monos: std::collections::BTreeSet<Exps> = rhs.terms().map(|(e, _)| *e).collect();
        for im in &images {
            monos.extend(im.terms().map(|(e, _)| *e));
        }
        for m in monos {
            let mut row: Vec<Cq> = images.iter().map(|im| im.coeff(&m)).collect();
            row.push(rhs.coeff(&m));
            rows.push(row);
        }
    }
    let sol = match solve_exact(&rows, unknowns.len()) {
        Solve::Unique(u) => u,
        Solve::Inconsistent => {
            return Err(Error::NoSolution("no vertical component of degree ≤ 2 exists".into()))
        }
        Solve::Underdetermined(free) => return Err(Error::NonUnique { free }),
    };
    let mut vertical = Poly::zero();
    for (u, c) in unknowns.iter().zip(sol) {
        vertical = &vertical + &u.scale(&c);
    }
    Ok(TwistorVectorField {
        horizontal: comps,
        vertical,
        shift: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest_symmetry::{all_generators, conformal_generator, GeneratorKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n < 1.0 && v[2] / n > -0.99 {
                return v.map(|c| c / n);
            }
        }
    }

    #[test]
    fn complex_structure_squares_to_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = random_unit(&mut rng);
            let j = complex_structure(s).unwrap();
            for a in 0..4 {
                for b in 0..4 {
                    let v: f64 = (0..4).map(|k| j[a][k] * j[k][b]).sum();
                    let want = if a == b { -1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-14);
                }
            }
        }
        assert!(complex_structure([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn stereographic_parameter() {
        let p = ComplexStructureParams::new([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.lambda, Complex64::new(0.0, 0.0));
        assert!(ComplexStructureParams::new([0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn frame_vectors_are_minus_i_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = random_unit(&mut rng);
            let p = ComplexStructureParams::new(s).unwrap();
            let j = complex_structure(s).unwrap();
            for which in [1, 2] {
                let v = frame_vector(which, p.lambda);
                for nu in 0..4 {
                    let jv: Complex64 = (0..4).map(|mu| v[mu] * j[nu][mu]).sum();
                    assert!((jv + Complex64::new(0.0, 1.0) * v[nu]).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn frame_annihilates_twistor_coordinates() {
        let base = [0.3, -0.2, 0.1, 0.4];
        let (w1, w2) = twistor_coordinate_jets(Frame::Complex, base, 3);
        for w in [&w1, &w2] {
            assert!(apply_vbar1(w).max_norm() < 1e-14);
            assert!(apply_vbar2(w).max_norm() < 1e-14);
        }
        let ybar = LaurentPoly::monomial(0, Jet::coordinate(Frame::Complex, base, Coord::Ybar, 3));
        let v = apply_vbar1(&ybar);
        assert!((v.mode_or_zero(0).value_at_base().get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let y = LaurentPoly::monomial(0, Jet::coordinate(Frame::Complex, base, Coord::Y, 3));
        assert!(apply_vbar1(&y).max_norm() < 1e-15);
    }

    #[test]
    fn twistor_coordinate_examples() {
        let (a, b) = twistor_coords(&[0.0; 4], Complex64::new(0.3, 0.2));
        assert_eq!((a, b), (Complex64::default(), Complex64::default()));
        let x = [1.0, 2.0, 3.0, 4.0];
        let (a, b) = twistor_coords(&x, Complex64::default());
        assert_eq!(a, Complex64::new(1.0, 2.0));
        assert_eq!(b, Complex64::new(3.0, -4.0));
        // jets agree with the pointwise map
        let l = Complex64::new(0.4, -0.7);
        let (w1, _) = twistor_coordinate_jets(Frame::Complex, [0.1, 0.2, 0.3, 0.4], 2);
        let v = w1.eval_at(l).eval(&x).get(0, 0);
        assert!((v - twistor_coords(&x, l).0).norm() < 1e-14);
    }

    #[test]
    fn holomorphy_residual_examples() {
        let base = [0.2, 0.1, -0.3, 0.0];
        let (w1, w2) = twistor_coordinate_jets(Frame::Complex, base, 4);
        let f = laurent_jet_mul(&laurent_jet_mul(&w1, &w1, 4), &w2, 4);
        let lams = CoverRegion::default().samples(8);
        assert!(holomorphy_residual(&f, &lams) < 1e-12);
        let ybar = LaurentPoly::monomial(0, Jet::coordinate(Frame::Complex, base, Coord::Ybar, 4));
        assert!((holomorphy_residual(&ybar, &lams) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cover_membership_is_consistent() {
        let cover = CoverRegion::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let l = Complex64::from_polar(rng.gen_range(0.0..3.0), rng.gen_range(0.0..6.3));
            assert_eq!(cover.in_overlap(l), cover.in_plus(l) && cover.in_minus(l));
        }
        assert!(CoverRegion::new(1.5).is_err());
    }

    #[test]
    fn lifts_of_translations_and_dilatation_are_horizontal() {
        for k in [GeneratorKind::P(0), GeneratorKind::P(3), GeneratorKind::B] {
            let l = lift_conformal(&conformal_generator(k).unwrap().field).unwrap();
            assert!(l.vertical.is_zero(), "{k}");
        }
    }

    #[test]
    fn rotation_lifts_are_x_independent() {
        let pts = [[0.3, -0.2, 0.5, 0.1], [1.0, 0.0, -1.0, 2.0]];
        let lams = [Complex64::new(0.5, 0.5), Complex64::new(-1.2, 0.3)];
        for k in [0, 1, 2].map(GeneratorKind::X).into_iter().chain([0, 1, 2].map(GeneratorKind::Y)) {
            let l = lift_conformal(&conformal_generator(k).unwrap().field).unwrap();
            assert!(l.vertical_is_x_independent(), "{k}");
            assert!(l.vertical_lambda_degree().unwrap_or(0) <= 2);
            assert!(l.bracket_residual(&pts, &lams) <= 1e-12);
        }
    }

    #[test]
    fn every_generator_lifts() {
        let pts = [[0.3, -0.2, 0.5, 0.1], [1.0, 0.0, -1.0, 2.0], [0.0, 0.7, 0.2, -0.4]];
        let lams = CoverRegion::default().samples(3);
        for g in all_generators() {
            let l = lift_conformal(&g.field).unwrap();
            assert!(l.bracket_residual(&pts, &lams) <= 1e-12, "{}", g.kind);
        }
    }

    #[test]
    fn special_conformal_lifts_depend_on_x() {
        for m in 0..4 {
            let l = lift_conformal(&conformal_generator(GeneratorKind::K(m)).unwrap().field).unwrap();
            assert!(!l.vertical_is_x_independent());
        }
    }

    #[test]
    fn lift_is_linear() {
        let gens = all_generators();
        let (a, b) = (Rational64::new(3, 2), Rational64::new(-2, 5));
        for (i, j) in [(0, 4), (7, 12), (14, 3), (10, 11)] {
            let comb = gens[i].field.scale(a).add(&gens[j].field.scale(b));
            let lhs = lift_conformal(&comb).unwrap();
            let rhs = lift_conformal(&gens[i].field)
                .unwrap()
                .scale(&Cq::new(a, Rational64::zero()))
                .add(&lift_conformal(&gens[j].field).unwrap().scale(&Cq::new(b, Rational64::zero())))
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn non_conformal_field_has_no_lift() {
        let mut f = VectorField::zero();
        f.comps[0] = &Poly::var(0) * &Poly::var(0);
        assert!(matches!(lift_conformal(&f), Err(Error::NoSolution(_))));
    }

    #[test]
    fn lambda_derivative_of_monomials() {
        let one = Jet::scalar(Frame::Complex, [0.0; 4], Complex64::new(1.0, 0.0), 2);
        let f = LaurentPoly::new(-1, vec![one.clone(), one.clone(), one.clone()]);
        let d = lambda_derivative(&f);
        assert_eq!(d.lo(), -2);
        let vals: Vec<f64> = d.modes().iter().map(|j| j.value_at_base().get(0, 0).re).collect();
        assert_eq!(vals, vec![-1.0, 0.0, 1.0]);
    }
}
