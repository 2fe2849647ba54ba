//! Gauge potentials, covariant derivatives, curvature, the self-duality
//! residual and its linearization, plus the built-in instanton families.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Coord, Frame, Jet};
use crate::matrix_lie::{sd_asd_project, su2_basis, thooft, LieMatrix, LinearValue, Tensor2Antisym, ThooftKind};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Central finite-difference step used when a variation is only known
/// pointwise.
pub const FD_STEP: f64 = 1e-4;

/// Components along y, ȳ, z, z̄ of a 1-form, so that
/// `A_μ dxᵘ = A_y dy + A_ȳ dȳ + A_z dz + A_z̄ dz̄`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexComponents<T> {
    pub y: T,
    pub ybar: T,
    pub z: T,
    pub zbar: T,
}

impl<T: LinearValue> ComplexComponents<T> {
    pub fn from_real(a: &[T; 4]) -> Self {
        let h = Complex64::new(0.5, 0.0);
        let ia2 = a[1].scale_value(I);
        let ia4 = a[3].scale_value(I);
        Self {
            y: a[0].sub_value(&ia2).scale_value(h),
            ybar: a[0].add_value(&ia2).scale_value(h),
            z: a[2].add_value(&ia4).scale_value(h),
            zbar: a[2].sub_value(&ia4).scale_value(h),
        }
    }

    pub fn to_real(&self) -> [T; 4] {
        [
            self.y.add_value(&self.ybar),
            self.y.sub_value(&self.ybar).scale_value(I),
            self.z.add_value(&self.zbar),
            self.zbar.sub_value(&self.z).scale_value(I),
        ]
    }

    pub fn get(&self, c: Coord) -> T {
        match c {
            Coord::Y => self.y.clone(),
            Coord::Ybar => self.ybar.clone(),
            Coord::Z => self.z.clone(),
            Coord::Zbar => self.zbar.clone(),
            Coord::X(m) => self.to_real()[m].clone(),
        }
    }
}

/// A potential given by closed-form value and first derivatives.
pub trait AnalyticField: Send + Sync {
    fn n(&self) -> usize;
    fn name(&self) -> String;
    /// `A_μ(x)` for μ = 0..4.
    fn value(&self, x: &[f64; 4]) -> [LieMatrix; 4];
    /// `grad[ν][μ] = ∂_ν A_μ(x)`.
    fn gradient(&self, x: &[f64; 4]) -> [[LieMatrix; 4]; 4];
    /// Taylor expansion at `base`, when the family supports it.
    fn to_jet(&self, base: [f64; 4], order: i32, frame: Frame) -> Result<JetPotential> {
        let _ = (base, order, frame);
        Err(Error::InvalidParameter(format!("{} has no jet expansion", self.name())))
    }
    /// Singular points to keep probes away from.
    fn poles(&self) -> Vec<[f64; 4]> {
        Vec::new()
    }
}

/// Gauge potential as four jets `A_μ` around a common base point.
#[derive(Clone, Debug)]
pub struct JetPotential {
    comps: [Jet; 4],
    complex: ComplexComponents<Jet>,
}

impl JetPotential {
    pub fn new(comps: [Jet; 4]) -> Result<Self> {
        for c in &comps[1..] {
            if c.frame() != comps[0].frame() || c.base() != comps[0].base() {
                return Err(Error::FrameMismatch);
            }
            if c.n() != comps[0].n() {
                return Err(Error::DimensionMismatch {
                    left: comps[0].n(),
                    right: c.n(),
                });
            }
        }
        let complex = ComplexComponents::from_real(&comps);
        Ok(Self { comps, complex })
    }

    pub fn from_complex(c: &ComplexComponents<Jet>) -> Result<Self> {
        Self::new(c.to_real())
    }

    pub fn zero(n: usize, base: [f64; 4], order: i32) -> Self {
        let z = Jet::zero(Frame::Complex, base, n, order);
        Self::new([z.clone(), z.clone(), z.clone(), z]).unwrap()
    }

    /// Constant potential `A_μ = values[μ]`.
    pub fn constant(values: &[LieMatrix; 4], base: [f64; 4], order: i32) -> Self {
        Self::new(values.each_ref().map(|v| Jet::constant(Frame::Complex, base, v, order))).unwrap()
    }

    pub fn comps(&self) -> &[Jet; 4] {
        &self.comps
    }

    pub fn complex(&self) -> &ComplexComponents<Jet> {
        &self.complex
    }

    pub fn n(&self) -> usize {
        self.comps[0].n()
    }

    pub fn base(&self) -> [f64; 4] {
        self.comps[0].base()
    }

    pub fn frame(&self) -> Frame {
        self.comps[0].frame()
    }

    /// Smallest valid order among the components.
    pub fn order(&self) -> i32 {
        self.comps.iter().map(|c| c.order()).min().unwrap()
    }

    /// Component along a real or complex direction.
    pub fn component(&self, c: Coord) -> Jet {
        match c {
            Coord::X(m) => self.comps[m].clone(),
            _ => self.complex.get(c),
        }
    }

    /// `∂_c f + [A_c, f]`.
    pub fn adjoint_derive(&self, f: &Jet, c: Coord) -> Jet {
        let a = self.component(c);
        &f.derive(c) + &a.commutator(f)
    }

    /// `∂_c f + A_c f`.
    pub fn fundamental_derive(&self, f: &Jet, c: Coord) -> Jet {
        let a = self.component(c);
        &f.derive(c) + &(&a * f)
    }

    pub fn curvature(&self) -> Tensor2Antisym<Jet> {
        let a = &self.comps;
        Tensor2Antisym::from_fn(|m, n| {
            let d = &a[n].derive(Coord::X(m)) - &a[m].derive(Coord::X(n));
            &d + &a[m].commutator(&a[n])
        })
    }

    /// Curvature component `F_cd = [D_c, D_d]` between two directions.
    pub fn curvature_component(&self, c: Coord, d: Coord) -> Jet {
        let (ac, ad) = (self.component(c), self.component(d));
        let deriv = &ad.derive(c) - &ac.derive(d);
        &deriv + &ac.commutator(&ad)
    }

    pub fn truncate(&self, order: i32) -> Self {
        Self::new(self.comps.each_ref().map(|c| c.truncate(order))).unwrap()
    }

    /// Conjugate by a constant group element: `g⁻¹ A g`.
    pub fn conjugate(&self, g: &LieMatrix) -> Result<Self> {
        let gi = g.inverse()?;
        Self::new(self.comps.each_ref().map(|c| c.left_mul(&gi).right_mul(g)))
    }

    pub fn eval(&self, x: &[f64; 4]) -> [LieMatrix; 4] {
        self.comps.each_ref().map(|c| c.eval(x))
    }
}

/// A gauge potential with one of two backends.
#[derive(Clone)]
pub enum GaugePotential {
    Analytic(Arc<dyn AnalyticField>),
    Jet(JetPotential),
}

impl fmt::Debug for GaugePotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugePotential::Analytic(a) => write!(f, "Analytic({})", a.name()),
            GaugePotential::Jet(j) => write!(f, "Jet(order {}, base {:?})", j.order(), j.base()),
        }
    }
}

impl GaugePotential {
    pub fn n(&self) -> usize {
        match self {
            GaugePotential::Analytic(a) => a.n(),
            GaugePotential::Jet(j) => j.n(),
        }
    }

    /// Jet expansion; a jet potential is returned as is.
    pub fn to_jet(&self, base: [f64; 4], order: i32) -> Result<JetPotential> {
        match self {
            GaugePotential::Analytic(a) => a.to_jet(base, order, Frame::Complex),
            GaugePotential::Jet(j) => Ok(j.clone()),
        }
    }

    pub fn value(&self, x: &[f64; 4]) -> [LieMatrix; 4] {
        match self {
            GaugePotential::Analytic(a) => a.value(x),
            GaugePotential::Jet(j) => j.eval(x),
        }
    }

    /// Pointwise curvature; for jets the truncated series is evaluated.
    pub fn curvature_at(&self, x: &[f64; 4]) -> Tensor2Antisym<LieMatrix> {
        match self {
            GaugePotential::Analytic(a) => {
                let v = a.value(x);
                let g = a.gradient(x);
                Tensor2Antisym::from_fn(|m, n| &(&(&g[m][n] - &g[n][m]) + &(&v[m] * &v[n])) - &(&v[n] * &v[m]))
            }
            GaugePotential::Jet(j) => j.curvature().map(|f| f.eval(x)),
        }
    }
}

pub fn curvature(a: &JetPotential) -> Tensor2Antisym<Jet> {
    a.curvature()
}

pub fn complex_components(a: &[LieMatrix; 4]) -> ComplexComponents<LieMatrix> {
    ComplexComponents::from_real(a)
}

/// Anti-self-dual part of the curvature, measured as a max norm: over the
/// probes for analytic potentials, over every known Taylor coefficient for
/// jet potentials.
pub fn sdym_residual(a: &GaugePotential, probes: &[[f64; 4]]) -> f64 {
    match a {
        GaugePotential::Jet(j) => sd_asd_project(&j.curvature()).1.max_norm(),
        GaugePotential::Analytic(_) => probes
            .iter()
            .map(|x| sd_asd_project(&a.curvature_at(x)).1.max_norm())
            .fold(0.0, f64::max),
    }
}

/// Same as [`sdym_residual`] but for the self-dual part.
pub fn anti_sdym_residual(a: &GaugePotential, probes: &[[f64; 4]]) -> f64 {
    match a {
        GaugePotential::Jet(j) => sd_asd_project(&j.curvature()).0.max_norm(),
        GaugePotential::Analytic(_) => probes
            .iter()
            .map(|x| sd_asd_project(&a.curvature_at(x)).0.max_norm())
            .fold(0.0, f64::max),
    }
}

type PointField = dyn Fn(&[f64; 4]) -> [LieMatrix; 4] + Send + Sync;

/// First-order change of the four components `δA_μ`.
#[derive(Clone)]
pub enum Variation {
    Jet([Jet; 4]),
    Field(Arc<PointField>),
}

impl fmt::Debug for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variation::Jet(j) => write!(f, "Variation::Jet({:?})", j[0]),
            Variation::Field(_) => write!(f, "Variation::Field"),
        }
    }
}

impl Variation {
    pub fn from_complex(c: &ComplexComponents<Jet>) -> Self {
        Variation::Jet(c.to_real())
    }

    pub fn jets(&self) -> Option<&[Jet; 4]> {
        match self {
            Variation::Jet(j) => Some(j),
            Variation::Field(_) => None,
        }
    }

    pub fn scale(&self, c: f64) -> Variation {
        match self {
            Variation::Jet(j) => Variation::Jet(j.each_ref().map(|v| v.scale_real(c))),
            Variation::Field(f) => {
                let f = f.clone();
                Variation::Field(Arc::new(move |x| f(x).map(|m| m.scale_real(c))))
            }
        }
    }

    pub fn value(&self, x: &[f64; 4]) -> [LieMatrix; 4] {
        match self {
            Variation::Jet(j) => j.each_ref().map(|v| v.eval(x)),
            Variation::Field(f) => f(x),
        }
    }

    /// Smallest valid jet order, or `None` for pointwise variations.
    pub fn order(&self) -> Option<i32> {
        self.jets().map(|j| j.iter().map(|c| c.order()).min().unwrap())
    }

    /// Largest difference from another jet variation over known coefficients.
    pub fn distance(&self, other: &Variation) -> Result<f64> {
        match (self, other) {
            (Variation::Jet(a), Variation::Jet(b)) => {
                let mut m: f64 = 0.0;
                for k in 0..4 {
                    a[k].checked_add(&b[k])?;
                    m = m.max((&a[k] - &b[k]).max_norm());
                }
                Ok(m)
            }
            _ => Err(Error::InvalidParameter("distance needs jet variations".into())),
        }
    }

    /// Largest anti-Hermitian defect `‖δA + δA†‖` at the probes.
    pub fn hermiticity_defect(&self, probes: &[[f64; 4]]) -> f64 {
        probes
            .iter()
            .flat_map(|x| self.value(x))
            .map(|m| (&m + &m.dagger()).max_abs())
            .fold(0.0, f64::max)
    }
}

/// `δF_μν = D_μ δA_ν − D_ν δA_μ` (adjoint covariant derivative) projected
/// onto its anti-self-dual part.
pub fn linearized_sdym_residual(a: &GaugePotential, da: &Variation, probes: &[[f64; 4]]) -> Result<f64> {
    match da {
        Variation::Jet(d) => {
            let base = d[0].base();
            let order = d.iter().map(|c| c.order()).max().unwrap() + 1;
            let aj = a.to_jet(base, order)?;
            for c in d {
                if c.frame() != aj.frame() || c.base() != aj.base() {
                    return Err(Error::FrameMismatch);
                }
            }
            let df = Tensor2Antisym::from_fn(|m, n| {
                &aj.adjoint_derive(&d[n], Coord::X(m)) - &aj.adjoint_derive(&d[m], Coord::X(n))
            });
            Ok(sd_asd_project(&df).1.max_norm())
        }
        Variation::Field(f) => {
            let mut worst: f64 = 0.0;
            for x in probes {
                let av = a.value(x);
                let dv = f(x);
                let grad: [[LieMatrix; 4]; 4] = std::array::from_fn(|m| {
                    let (mut xp, mut xm) = (*x, *x);
                    xp[m] += FD_STEP;
                    xm[m] -= FD_STEP;
                    let (fp, fm) = (f(&xp), f(&xm));
                    std::array::from_fn(|k| (&fp[k] - &fm[k]).scale_real(0.5 / FD_STEP))
                });
                let df = Tensor2Antisym::from_fn(|m, n| {
                    let dmn = &(&grad[m][n] - &grad[n][m]) + &(&(&av[m] * &dv[n]) - &(&dv[n] * &av[m]));
                    &dmn - &(&(&av[n] * &dv[m]) - &(&dv[m] * &av[n]))
                });
                worst = worst.max(sd_asd_project(&df).1.max_norm());
            }
            Ok(worst)
        }
    }
}

/// Profile `Φ` of the 't Hooft ansatz `A_μ = s·T_a k^a_μν ∂_ν ln Φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `Φ = |x − c|² + ρ²` (regular gauge, one instanton).
    Regular { center: [f64; 4], scale: f64 },
    /// `Φ = 1 + Σ wᵢ/|x − cᵢ|²`.
    Harmonic { poles: Vec<Pole> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub center: [f64; 4],
    pub weight: f64,
}

// Pinned by `instanton_conventions_are_pinned` below: these are the only
// (tensor, sign) choices for which the residual vanishes.
const REGULAR_KIND: ThooftKind = ThooftKind::Eta;
const REGULAR_SIGN: f64 = 1.0;
const HARMONIC_KIND: ThooftKind = ThooftKind::EtaBar;
const HARMONIC_SIGN: f64 = -1.0;

/// su(2) instanton (or anti-instanton) of 't Hooft-ansatz form, embedded
/// in the top-left block for n > 2.
#[derive(Clone, Debug)]
pub struct ThooftFamily {
    profile: Profile,
    kind: ThooftKind,
    sign: f64,
    n: usize,
    flip: [bool; 4],
    label: String,
}

impl ThooftFamily {
    fn build(profile: Profile, anti: bool, n: usize, label: &str) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("instantons need n >= 2, got {n}")));
        }
        let (kind, sign) = match profile {
            Profile::Regular { .. } => (REGULAR_KIND, REGULAR_SIGN),
            Profile::Harmonic { .. } => (HARMONIC_KIND, HARMONIC_SIGN),
        };
        let kind = if anti { kind.dual() } else { kind };
        Ok(Self {
            profile,
            kind,
            sign,
            n,
            flip: [false; 4],
            label: label.to_string(),
        })
    }

    /// Explicit discrete choices, bypassing the pinned convention.
    pub fn with_convention(profile: Profile, kind: ThooftKind, sign: f64, n: usize) -> Self {
        Self {
            profile,
            kind,
            sign,
            n,
            flip: [false; 4],
            label: "custom".into(),
        }
    }

    /// Negate the listed components (used to build corrupted fixtures).
    pub fn with_sign_flips(mut self, comps: &[usize]) -> Result<Self> {
        for &c in comps {
            if c >= 4 {
                return Err(Error::InvalidParameter(format!("component {c} out of range")));
            }
            self.flip[c] = !self.flip[c];
        }
        Ok(self)
    }

    pub fn kind(&self) -> ThooftKind {
        self.kind
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    fn generators(&self) -> [LieMatrix; 3] {
        su2_basis().map(|t| {
            let mut m = LieMatrix::zeros(self.n);
            for r in 0..2 {
                for c in 0..2 {
                    m.set(r, c, t.get(r, c));
                }
            }
            m
        })
    }

    /// `(∂_ν ln Φ, ∂_ρ ∂_ν ln Φ)`.
    fn log_derivs(&self, x: &[f64; 4]) -> ([f64; 4], [[f64; 4]; 4]) {
        match &self.profile {
            Profile::Regular { center, scale } => {
                let r: [f64; 4] = std::array::from_fn(|m| x[m] - center[m]);
                let phi = r.iter().map(|v| v * v).sum::<f64>() + scale * scale;
                let g = r.map(|v| 2.0 * v / phi);
                let h = std::array::from_fn(|a| {
                    std::array::from_fn(|b| {
                        let d = if a == b { 2.0 / phi } else { 0.0 };
                        d - 4.0 * r[a] * r[b] / (phi * phi)
                    })
                });
                (g, h)
            }
            Profile::Harmonic { poles } => {
                let mut phi = 1.0;
                let mut dphi = [0.0; 4];
                let mut ddphi = [[0.0; 4]; 4];
                for p in poles {
                    let r: [f64; 4] = std::array::from_fn(|m| x[m] - p.center[m]);
                    let r2: f64 = r.iter().map(|v| v * v).sum();
                    phi += p.weight / r2;
                    for a in 0..4 {
                        dphi[a] -= 2.0 * p.weight * r[a] / (r2 * r2);
                        for b in 0..4 {
                            let d = if a == b { -2.0 / (r2 * r2) } else { 0.0 };
                            ddphi[a][b] += p.weight * (d + 8.0 * r[a] * r[b] / (r2 * r2 * r2));
                        }
                    }
                }
                let g = dphi.map(|v| v / phi);
                let h = std::array::from_fn(|a| std::array::from_fn(|b| ddphi[a][b] / phi - g[a] * g[b]));
                (g, h)
            }
        }
    }

    /// Contract `sign · T_a k^a_μν v_ν` for component μ.
    fn contract(&self, mu: usize, v: &[f64; 4]) -> LieMatrix {
        let t = self.generators();
        let mut acc = LieMatrix::zeros(self.n);
        for (a, ta) in t.iter().enumerate() {
            for (nu, vn) in v.iter().enumerate() {
                let k = thooft(self.kind, a, mu, nu);
                if k != 0 {
                    acc = &acc + &ta.scale_real(self.sign * k as f64 * vn);
                }
            }
        }
        if self.flip[mu] {
            acc = acc.scale_real(-1.0);
        }
        acc
    }

    /// Scalar jet of Φ at `order`.
    fn profile_jet(&self, base: [f64; 4], order: i32, frame: Frame) -> Result<Jet> {
        let one = Jet::scalar(frame, base, Complex64::new(1.0, 0.0), order);
        let sq_dist = |c: &[f64; 4]| -> Jet {
            let mut acc = Jet::scalar(frame, base, Complex64::new(0.0, 0.0), order);
            for m in 0..4 {
                let x = Jet::coordinate(frame, base, Coord::X(m), order);
                let r = &x - &Jet::scalar(frame, base, Complex64::new(c[m], 0.0), order);
                acc = &acc + &r.mul_capped(&r, order);
            }
            acc
        };
        match &self.profile {
            Profile::Regular { center, scale } => {
                Ok(&sq_dist(center) + &one.scale_real(scale * scale))
            }
            Profile::Harmonic { poles } => {
                let mut acc = one.clone();
                for p in poles {
                    acc = &acc + &sq_dist(&p.center).inverse()?.scale_real(p.weight);
                }
                Ok(acc)
            }
        }
    }
}

impl AnalyticField for ThooftFamily {
    fn n(&self) -> usize {
        self.n
    }

    fn name(&self) -> String {
        self.label.clone()
    }

    fn value(&self, x: &[f64; 4]) -> [LieMatrix; 4] {
        let (g, _) = self.log_derivs(x);
        std::array::from_fn(|mu| self.contract(mu, &g))
    }

    fn gradient(&self, x: &[f64; 4]) -> [[LieMatrix; 4]; 4] {
        let (_, h) = self.log_derivs(x);
        // ∂_ρ A_μ = s T_a k^a_μν ∂_ρ∂_ν ln Φ
        std::array::from_fn(|rho| std::array::from_fn(|mu| self.contract(mu, &h[rho])))
    }

    fn to_jet(&self, base: [f64; 4], order: i32, frame: Frame) -> Result<JetPotential> {
        let phi = self.profile_jet(base, order + 1, frame)?;
        let inv = phi.inverse()?;
        let dlog: Vec<Jet> = (0..4).map(|nu| &phi.derive(Coord::X(nu)) * &inv).collect();
        let t = self.generators();
        let comps: [Jet; 4] = std::array::from_fn(|mu| {
            let mut acc = Jet::zero(frame, base, self.n, order);
            for (a, ta) in t.iter().enumerate() {
                for (nu, d) in dlog.iter().enumerate() {
                    let k = thooft(self.kind, a, mu, nu);
                    if k != 0 {
                        let s = self.sign * k as f64 * if self.flip[mu] { -1.0 } else { 1.0 };
                        acc = &acc + &Jet::scalar_times(d, &ta.scale_real(s));
                    }
                }
            }
            acc.truncate(order)
        });
        JetPotential::new(comps)
    }

    fn poles(&self) -> Vec<[f64; 4]> {
        match &self.profile {
            Profile::Regular { .. } => Vec::new(),
            Profile::Harmonic { poles } => poles.iter().map(|p| p.center).collect(),
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    Ok(())
}

/// Regular-gauge one-instanton of size `scale` centred at `center`.
pub fn bpst_instanton(center: [f64; 4], scale: f64, n: usize) -> Result<ThooftFamily> {
    check_scale(scale)?;
    ThooftFamily::build(Profile::Regular { center, scale }, false, n, "bpst")
}

/// Orientation-reversed one-instanton: anti-self-dual curvature.
pub fn anti_bpst_instanton(center: [f64; 4], scale: f64, n: usize) -> Result<ThooftFamily> {
    check_scale(scale)?;
    ThooftFamily::build(Profile::Regular { center, scale }, true, n, "anti_bpst")
}

fn check_poles(poles: &[Pole]) -> Result<()> {
    if poles.is_empty() {
        return Err(Error::InvalidParameter("at least one pole required".into()));
    }
    for (i, p) in poles.iter().enumerate() {
        if !(p.weight > 0.0 && p.weight.is_finite()) {
            return Err(Error::InvalidParameter(format!("pole weight must be positive, got {}", p.weight)));
        }
        for q in &poles[..i] {
            let d: f64 = (0..4).map(|m| (p.center[m] - q.center[m]).powi(2)).sum();
            if d == 0.0 {
                return Err(Error::InvalidParameter("pole centers must be distinct".into()));
            }
        }
    }
    Ok(())
}

/// Multi-pole harmonic 't Hooft ansatz.
pub fn thooft_ansatz(poles: &[Pole], n: usize) -> Result<ThooftFamily> {
    check_poles(poles)?;
    ThooftFamily::build(Profile::Harmonic { poles: poles.to_vec() }, false, n, "thooft")
}

pub fn anti_thooft_ansatz(poles: &[Pole], n: usize) -> Result<ThooftFamily> {
    check_poles(poles)?;
    ThooftFamily::build(Profile::Harmonic { poles: poles.to_vec() }, true, n, "anti_thooft")
}

/// The vanishing potential.
#[derive(Clone, Copy, Debug)]
pub struct ZeroField {
    pub n: usize,
}

impl AnalyticField for ZeroField {
    fn n(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "zero".into()
    }
    fn value(&self, _x: &[f64; 4]) -> [LieMatrix; 4] {
        std::array::from_fn(|_| LieMatrix::zeros(self.n))
    }
    fn gradient(&self, _x: &[f64; 4]) -> [[LieMatrix; 4]; 4] {
        std::array::from_fn(|_| std::array::from_fn(|_| LieMatrix::zeros(self.n)))
    }
    fn to_jet(&self, base: [f64; 4], order: i32, _frame: Frame) -> Result<JetPotential> {
        Ok(JetPotential::zero(self.n, base, order))
    }
}

/// Deterministic probe points in a ball: a Halton sequence with a seeded
/// random shift, skipping points within `exclusion` of any pole.
pub fn probe_points(
    seed: u64,
    count: usize,
    center: [f64; 4],
    radius: f64,
    poles: &[[f64; 4]],
    exclusion: f64,
) -> Vec<[f64; 4]> {
    const BASES: [u64; 4] = [2, 3, 5, 7];
    fn radical_inverse(mut i: u64, b: u64) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            r += f * (i % b) as f64;
            i /= b;
        }
        r
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let u: [f64; 4] = std::array::from_fn(|k| 2.0 * ((radical_inverse(i, BASES[k]) + shift[k]) % 1.0) - 1.0);
        i += 1;
        if u.iter().map(|v| v * v).sum::<f64>() > 1.0 {
            continue;
        }
        let x: [f64; 4] = std::array::from_fn(|k| center[k] + radius * u[k]);
        let near = poles
            .iter()
            .any(|p| (0..4).map(|k| (x[k] - p[k]).powi(2)).sum::<f64>().sqrt() < exclusion);
        if !near {
            out.push(x);
        }
    }
    out
}

/// Fixture record for reproducible instanton backgrounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub family: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub center: [f64; 4],
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub poles: Vec<Pole>,
    /// Components whose sign is flipped (corruption for negative controls).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sign_flip: Vec<usize>,
}

fn default_n() -> usize {
    2
}

fn default_scale() -> f64 {
    1.0
}

impl FixtureRecord {
    pub fn bpst(center: [f64; 4], scale: f64) -> Self {
        Self {
            family: "bpst".into(),
            n: 2,
            center,
            scale,
            poles: Vec::new(),
            sign_flip: Vec::new(),
        }
    }

    pub fn thooft(poles: Vec<Pole>) -> Self {
        Self {
            family: "thooft".into(),
            n: 2,
            center: [0.0; 4],
            scale: 1.0,
            poles,
            sign_flip: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<ThooftFamily> {
        let fam = match self.family.as_str() {
            "bpst" => bpst_instanton(self.center, self.scale, self.n)?,
            "anti_bpst" => anti_bpst_instanton(self.center, self.scale, self.n)?,
            "thooft" => thooft_ansatz(&self.poles, self.n)?,
            "anti_thooft" => anti_thooft_ansatz(&self.poles, self.n)?,
            other => return Err(Error::Config(format!("unknown fixture family '{other}'"))),
        };
        fam.with_sign_flips(&self.sign_flip)
    }

    /// Characteristic size used for probe balls and exclusion radii.
    pub fn length_scale(&self) -> f64 {
        if self.poles.is_empty() {
            self.scale
        } else {
            self.poles.iter().map(|p| p.weight.sqrt()).fold(0.0, f64::max)
        }
    }

    /// Centre of the probe ball.
    pub fn probe_center(&self) -> [f64; 4] {
        if self.poles.is_empty() {
            return self.center;
        }
        let k = self.poles.len() as f64;
        std::array::from_fn(|m| self.poles.iter().map(|p| p.center[m]).sum::<f64>() / k)
    }
}

pub fn load_fixtures(path: &Path) -> Result<Vec<FixtureRecord>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn default_fixtures() -> Vec<FixtureRecord> {
    vec![
        FixtureRecord::bpst([0.1, -0.2, 0.3, 0.05], 1.0),
        FixtureRecord::thooft(vec![
            Pole {
                center: [0.8, 0.0, 0.0, 0.0],
                weight: 1.0,
            },
            Pole {
                center: [-0.6, 0.5, 0.0, 0.2],
                weight: 0.5,
            },
        ]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::MAX_ORDER;

    fn probes_for(f: &ThooftFamily, center: [f64; 4]) -> Vec<[f64; 4]> {
        probe_points(7, 100, center, 2.0, &f.poles(), 0.1)
    }

    #[test]
    fn instanton_conventions_are_pinned() {
        let regular = Profile::Regular {
            center: [0.0; 4],
            scale: 1.0,
        };
        let harmonic = Profile::Harmonic {
            poles: vec![Pole {
                center: [0.0; 4],
                weight: 1.0,
            }],
        };
        for (profile, kind, sign) in [
            (regular, REGULAR_KIND, REGULAR_SIGN),
            (harmonic, HARMONIC_KIND, HARMONIC_SIGN),
        ] {
            let pts = probe_points(3, 40, [0.0; 4], 2.0, &[[0.0; 4]], 0.1);
            for k in [ThooftKind::Eta, ThooftKind::EtaBar] {
                for s in [1.0, -1.0] {
                    let f = ThooftFamily::with_convention(profile.clone(), k, s, 2);
                    let r = sdym_residual(&GaugePotential::Analytic(Arc::new(f)), &pts);
                    if k == kind && s == sign {
                        assert!(r < 1e-12, "{profile:?} {k:?} {s}: {r}");
                    } else {
                        assert!(r > 1e-2, "{profile:?} {k:?} {s}: {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn bpst_is_self_dual() {
        let c = [0.1, 0.2, -0.3, 0.4];
        for scale in [0.5, 1.0, 3.0] {
            let f = bpst_instanton(c, scale, 2).unwrap();
            let pts = probes_for(&f, c);
            let a = GaugePotential::Analytic(Arc::new(f));
            assert!(sdym_residual(&a, &pts) <= 1e-10);
        }
    }

    #[test]
    fn two_pole_ansatz_is_self_dual() {
        let rec = &default_fixtures()[1];
        let f = rec.build().unwrap();
        let pts = probe_points(11, 100, rec.probe_center(), 2.0, &f.poles(), 0.1 * rec.length_scale());
        let a = GaugePotential::Analytic(Arc::new(f));
        assert!(sdym_residual(&a, &pts) <= 1e-10);
        assert!(anti_sdym_residual(&a, &pts) > 1e-2);
    }

    #[test]
    fn anti_instanton_is_anti_self_dual() {
        let f = anti_bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let pts = probes_for(&f, [0.0; 4]);
        let a = GaugePotential::Analytic(Arc::new(f));
        assert!(sdym_residual(&a, &pts) > 1e-2);
        assert!(anti_sdym_residual(&a, &pts) <= 1e-10);
    }

    #[test]
    fn curvature_matches_finite_differences() {
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let x = [0.3, -0.4, 0.2, 0.7];
        let a = GaugePotential::Analytic(Arc::new(f.clone()));
        let fa = a.curvature_at(&x);
        let h = 1e-4;
        let d = |m: usize| -> [LieMatrix; 4] {
            let (mut p, mut q) = (x, x);
            p[m] += h;
            q[m] -= h;
            let (vp, vq) = (f.value(&p), f.value(&q));
            std::array::from_fn(|k| (&vp[k] - &vq[k]).scale_real(0.5 / h))
        };
        let v = f.value(&x);
        for (m, n) in crate::matrix_lie::PAIRS {
            let fd = &(&(&d(m)[n] - &d(n)[m]) + &(&v[m] * &v[n])) - &(&v[n] * &v[m]);
            assert!((&fd - &fa.get(m, n)).max_abs() < 1e-6);
        }
    }

    #[test]
    fn zero_and_abelian_curvature_vanish() {
        let z = JetPotential::zero(2, [0.0; 4], 4);
        assert_eq!(z.curvature().max_norm(), 0.0);
        let d = |a: f64| {
            let mut m = LieMatrix::zeros(2);
            m.set(0, 0, Complex64::new(0.0, a));
            m.set(1, 1, Complex64::new(0.0, -a));
            m
        };
        let c = JetPotential::constant(&[d(1.0), d(-0.5), d(2.0), d(0.3)], [0.0; 4], 3);
        assert_eq!(c.curvature().max_norm(), 0.0);
        let pts = probe_points(1, 5, [0.0; 4], 1.0, &[], 0.0);
        assert_eq!(sdym_residual(&GaugePotential::Analytic(Arc::new(ZeroField { n: 2 })), &pts), 0.0);
    }

    #[test]
    fn jet_expansion_matches_analytic_values() {
        let f = bpst_instanton([0.1, 0.0, -0.2, 0.3], 1.0, 2).unwrap();
        let base = [0.2, 0.1, 0.0, -0.1];
        let j = f.to_jet(base, 8, Frame::Complex).unwrap();
        let x = [0.25, 0.12, 0.03, -0.08];
        let (jv, av) = (j.eval(&x), f.value(&x));
        for m in 0..4 {
            assert!((&jv[m] - &av[m]).max_abs() < 1e-9);
        }
        let jr = f.to_jet(base, 5, Frame::Real).unwrap();
        assert!((&jr.comps()[2].to_complex_frame() - &j.comps()[2].truncate(5)).max_norm() < 1e-12);
    }

    #[test]
    fn jet_curvature_is_self_dual() {
        for rec in default_fixtures() {
            let f = rec.build().unwrap();
            let j = f.to_jet([0.1, 0.2, 0.0, -0.1], 6, Frame::Complex).unwrap();
            let r = sdym_residual(&GaugePotential::Jet(j), &[]);
            assert!(r <= 1e-10, "{}: {r}", rec.family);
        }
    }

    #[test]
    fn complex_components_examples() {
        let t = su2_basis()[0].clone();
        let z = LieMatrix::zeros(2);
        let c = complex_components(&[t.clone(), z.clone(), z.clone(), z.clone()]);
        assert!((&c.y - &t.scale_real(0.5)).max_abs() < 1e-15);
        assert!((&c.ybar - &t.scale_real(0.5)).max_abs() < 1e-15);
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let v = f.value(&[0.3, -0.1, 0.5, 0.2]);
        let c = complex_components(&v);
        let back = c.to_real();
        for m in 0..4 {
            assert!((&back[m] - &v[m]).max_abs() < 1e-14);
        }
        assert!((&c.ybar + &c.y.dagger()).max_abs() < 1e-14);
        assert!((&c.zbar + &c.z.dagger()).max_abs() < 1e-14);
    }

    #[test]
    fn complex_frame_curvature_matches_real_frame() {
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let j = f.to_jet([0.2, -0.1, 0.3, 0.1], 5, Frame::Complex).unwrap();
        let fr = j.curvature();
        let fc = |c, d| j.curvature_component(c, d);
        // F_yz and F_ȳz̄ vanish; F_yȳ + F_zz̄ = 0 on self-dual backgrounds
        assert!(fc(Coord::Y, Coord::Z).max_norm() < 1e-12);
        assert!(fc(Coord::Ybar, Coord::Zbar).max_norm() < 1e-12);
        assert!((&fc(Coord::Y, Coord::Ybar) + &fc(Coord::Z, Coord::Zbar)).max_norm() < 1e-12);
        // F_yȳ = (i/2) F_12
        let f12 = fr.get(0, 1).scale(Complex64::new(0.0, 0.5));
        assert!((&fc(Coord::Y, Coord::Ybar) - &f12).max_norm() < 1e-12);
    }

    #[test]
    fn curvature_commutator_identity() {
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let j = f.to_jet([0.1, 0.1, 0.1, 0.1], 6, Frame::Complex).unwrap();
        let mut g = Jet::zero(Frame::Complex, j.base(), 2, 6);
        for (k, e) in crate::jet::monomials(6).iter().enumerate() {
            let t = &su2_basis()[k % 3];
            g.set_coeff(*e, &t.scale_real(1.0 / (1.0 + k as f64)));
        }
        let lhs = &j.adjoint_derive(&j.adjoint_derive(&g, Coord::Ybar), Coord::Y)
            - &j.adjoint_derive(&j.adjoint_derive(&g, Coord::Y), Coord::Ybar);
        let rhs = j.curvature_component(Coord::Y, Coord::Ybar).commutator(&g);
        assert!((&lhs - &rhs).max_norm() < 1e-12);
        assert!(MAX_ORDER >= 8);
    }

    #[test]
    fn gauge_covariance_of_residual() {
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let j = f.to_jet([0.1, 0.1, 0.1, 0.1], 5, Frame::Complex).unwrap();
        let t = su2_basis();
        // a constant SU(2) element exp(0.7 T_1) in closed form
        let g = &LieMatrix::identity(2).scale_real((0.35f64).cos()) + &t[0].scale_real(2.0 * (0.35f64).sin());
        let jg = j.conjugate(&g).unwrap();
        let (r0, r1) = (
            sdym_residual(&GaugePotential::Jet(j), &[]),
            sdym_residual(&GaugePotential::Jet(jg), &[]),
        );
        assert!((r0 - r1).abs() < 1e-12);
    }

    #[test]
    fn large_scale_limit_decays() {
        let x = [0.3, 0.2, -0.1, 0.4];
        let small = bpst_instanton([0.0; 4], 1e4, 2).unwrap().value(&x);
        assert!(small.iter().all(|m| m.max_abs() < 1e-7));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(bpst_instanton([0.0; 4], 0.0, 2).is_err());
        assert!(bpst_instanton([0.0; 4], 1.0, 1).is_err());
        let p = Pole {
            center: [0.0; 4],
            weight: 1.0,
        };
        assert!(thooft_ansatz(&[p, p], 2).is_err());
        assert!(thooft_ansatz(&[Pole { weight: -1.0, ..p }], 2).is_err());
    }

    #[test]
    fn linearized_residual_scales_linearly() {
        let f = bpst_instanton([0.0; 4], 1.0, 2).unwrap();
        let a = GaugePotential::Analytic(Arc::new(f));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = [(); 4].map(|_| Jet::zero(Frame::Complex, [0.1; 4], 2, 4));
        for c in d.iter_mut() {
            for e in crate::jet::monomials(4) {
                let m = LieMatrix::from_fn(2, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                c.set_coeff(*e, &m);
            }
        }
        let v = Variation::Jet(d);
        let r1 = linearized_sdym_residual(&a, &v, &[]).unwrap();
        assert!(r1 > 1e-2);
        for c in [2.0, 10.0] {
            let rc = linearized_sdym_residual(&a, &v.scale(c), &[]).unwrap();
            assert!((rc - c * r1).abs() < 1e-12 * rc.max(1.0));
        }
    }

    #[test]
    fn fixture_roundtrip() {
        let recs = default_fixtures();
        let text = serde_json::to_string(&recs).unwrap();
        let back: Vec<FixtureRecord> = serde_json::from_str(&text).unwrap();
        assert_eq!(recs, back);
        let bad = FixtureRecord {
            family: "nope".into(),
            ..recs[0].clone()
        };
        assert!(bad.build().is_err());
    }

    #[test]
    fn probes_are_deterministic_and_respect_exclusion() {
        let a = probe_points(5, 50, [0.0; 4], 2.0, &[[0.0; 4]], 0.5);
        let b = probe_points(5, 50, [0.0; 4], 2.0, &[[0.0; 4]], 0.5);
        assert_eq!(a, b);
        for x in &a {
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r <= 2.0 && r >= 0.5);
        }
        assert_ne!(a, probe_points(6, 50, [0.0; 4], 2.0, &[[0.0; 4]], 0.5));
    }
}
