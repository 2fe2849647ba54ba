//! Verification suites behind the `sdym` binary and their JSON Lines reports.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gauge_field::{
    bpst_instanton, default_fixtures, load_fixtures, probe_points, sdym_residual, linearized_sdym_residual,
    AnalyticField, FixtureRecord, GaugePotential, JetPotential,
};
use crate::hidden_symmetry::{
    action_bracket_check, antipodal_relation_defect, derivation_check, diffeo_type_variation,
    gauge_type_variation, lax_recursion, loop_zero_mode_gauge_parameter, potentials_from_psi, transition_matrix,
    variation_from_split, verify_linear_system, Branch, DiffeoTypeGenerator, GaugeTypeGenerator, LaxSolution,
    OrderBudget, SymmetryOutcome,
};
use crate::jet::{Frame, Jet};
use crate::manifest_symmetry::{
    all_generators, closure_defect, conformal_generator, conformal_variation, embed, gauge_variation,
    random_gauge_parameter, span_rank, vf_bracket, GeneratorKind,
};
use crate::matrix_lie::{levi_civita4, su2_basis, thooft, LieMatrix, ThooftKind, PAIRS};
use crate::riemann_hilbert::{
    contour_coefficient, laurent_coefficients, split, split_annulus, AnnulusFunction, LaurentPoly, SampledFunction,
};
use crate::twistor_geometry::{
    apply_vbar1, apply_vbar2, complex_structure, holomorphy_residual, lift_conformal, twistor_coordinate_jets,
    CoverRegion, LaurentJet, TwistorVectorField,
};

/// Environment variable that fixes the worker pool size.
pub const WORKERS_ENV: &str = "SDYM_WORKERS";

/// Base point of the jet expansions used by the manifest and hidden suites.
pub const BACKGROUND_BASE: [f64; 4] = [0.2, 0.1, -0.1, 0.3];
const BACKGROUND_CENTER: [f64; 4] = [0.1, -0.2, 0.3, 0.05];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Pure floating point identities.
    pub machine: f64,
    /// Mode-level splitting and reduction identities.
    pub strict: f64,
    /// Exact and jet-level checks.
    pub exact: f64,
    /// Symmetry residuals.
    pub symmetry: f64,
    /// Finite-difference cross-checks.
    pub fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            machine: 1e-14,
            strict: 1e-12,
            exact: 1e-10,
            symmetry: 1e-8,
            fd: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Machine,
    Strict,
    Exact,
    Symmetry,
    Fd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Rank of the gauge group SU(n) for the built-in background.
    pub n: usize,
    pub jet_order: i32,
    pub lambda_order: usize,
    /// Largest |mode| resolved by the sampled Laurent backend.
    pub mode_budget: usize,
    /// Points on the unit circle for the sampled backend.
    pub samples: usize,
    pub probes: usize,
    /// Spectral samples per circle of the cover.
    pub lambda_samples: usize,
    pub tolerances: Tolerances,
    pub tolerance_scale: f64,
    pub seed: u64,
    pub alpha: f64,
    pub fixtures: Option<PathBuf>,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            jet_order: 6,
            lambda_order: 3,
            mode_budget: 16,
            samples: 256,
            probes: 100,
            lambda_samples: 8,
            tolerances: Tolerances::default(),
            tolerance_scale: 1.0,
            seed: 0,
            alpha: 0.5,
            fixtures: None,
            timings: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("rank n = {} must be at least 2", self.n));
        }
        OrderBudget::new(self.jet_order, self.lambda_order).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if self.mode_budget < 4 {
            return bad(format!("mode budget {} is below 4", self.mode_budget));
        }
        if !self.samples.is_power_of_two() || self.samples < 4 * self.mode_budget {
            return bad(format!(
                "sample count {} must be a power of two and at least {}",
                self.samples,
                4 * self.mode_budget
            ));
        }
        if self.lambda_samples == 0 {
            return bad("lambda_samples must be positive".into());
        }
        let t = &self.tolerances;
        let all = [t.machine, t.strict, t.exact, t.symmetry, t.fd, self.tolerance_scale];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("tolerances must be finite and non-negative".into());
        }
        Ok(())
    }

    fn tolerance(&self, class: Class) -> f64 {
        let t = &self.tolerances;
        let base = match class {
            Class::Machine => t.machine,
            Class::Strict => t.strict,
            Class::Exact => t.exact,
            Class::Symmetry => t.symmetry,
            Class::Fd => t.fd,
        };
        base * self.tolerance_scale
    }

    pub fn fixture_records(&self) -> Result<Vec<FixtureRecord>> {
        match &self.fixtures {
            Some(p) => load_fixtures(p).map_err(|e| Error::Config(format!("fixtures {}: {e}", p.display()))),
            None => Ok(default_fixtures()),
        }
    }

    fn lambdas(&self) -> Result<Vec<Complex64>> {
        Ok(CoverRegion::new(self.alpha)?.samples(self.lambda_samples))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sdym,
    Manifest,
    Hidden,
    Rh,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub inputs_digest: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time: Option<f64>,
    pub error: Option<String>,
}

type CheckFn = Box<dyn Fn() -> Result<f64> + Send + Sync>;

struct Check {
    id: String,
    class: Class,
    inputs: Value,
    run: CheckFn,
}

impl Check {
    fn new(id: impl Into<String>, class: Class, inputs: Value, run: impl Fn() -> Result<f64> + Send + Sync + 'static) -> Self {
        Self {
            id: id.into(),
            class,
            inputs,
            run: Box::new(run),
        }
    }
}

fn digest(id: &str, inputs: &Value) -> String {
    // serde_json maps are key-sorted, so this rendering is canonical
    let text = json!({ "check": id, "inputs": inputs }).to_string();
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn execute(cfg: &RunConfig, checks: Vec<Check>) -> Vec<CheckReport> {
    let run_one = |c: &Check| {
        let tolerance = cfg.tolerance(c.class);
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| (c.run)()))
            .unwrap_or_else(|_| Err(Error::InvalidParameter(format!("check {} panicked", c.id))));
        let elapsed = start.elapsed().as_secs_f64();
        let (residual, error) = match outcome {
            Ok(r) if r.is_nan() => (f64::MAX, Some("residual is NaN".to_string())),
            Ok(r) => (r, None),
            Err(e) => (f64::MAX, Some(e.to_string())),
        };
        CheckReport {
            check_id: c.id.clone(),
            inputs_digest: digest(&c.id, &c.inputs),
            residual,
            tolerance,
            pass: error.is_none() && residual <= tolerance,
            wall_time: cfg.timings.then_some(elapsed),
            error,
        }
    };
    let workers = std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let mut reports: Vec<CheckReport> = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| checks.par_iter().map(run_one).collect()),
        Err(_) => checks.iter().map(run_one).collect(),
    };
    reports.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    reports
}

fn run_config_checked(cfg: &RunConfig, build: impl FnOnce(&RunConfig) -> Result<Vec<Check>>) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let checks = build(cfg)?;
    Ok(execute(cfg, checks))
}

pub fn cmd_check_sdym(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    run_config_checked(cfg, sdym_checks)
}

pub fn cmd_check_manifest(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    run_config_checked(cfg, |c| Ok(manifest_checks(c)))
}

pub fn cmd_check_hidden(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    run_config_checked(cfg, hidden_checks)
}

pub fn cmd_check_rh(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    run_config_checked(cfg, |c| Ok(rh_checks(c)))
}

pub fn cmd_run_suite(cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    run_config_checked(cfg, |c| {
        let mut all = sdym_checks(c)?;
        all.extend(manifest_checks(c));
        all.extend(hidden_checks(c)?);
        all.extend(rh_checks(c));
        Ok(all)
    })
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    match suite {
        Suite::Sdym => cmd_check_sdym(cfg),
        Suite::Manifest => cmd_check_manifest(cfg),
        Suite::Hidden => cmd_check_hidden(cfg),
        Suite::Rh => cmd_check_rh(cfg),
        Suite::All => cmd_run_suite(cfg),
    }
}

pub fn to_jsonl(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("reports serialize"));
        out.push('\n');
    }
    out
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn sdym_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let records = cfg.fixture_records()?;
    let mut checks = Vec::new();
    for (i, rec) in records.into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let probes = cfg.probes;
        let inputs = json!({ "fixture": rec, "seed": seed, "probes": probes });
        let id = format!("sdym.fixture.{i:03}.{}", rec.family);
        checks.push(Check::new(id, Class::Exact, inputs, move || {
            let fam = rec.build()?;
            let ell = rec.length_scale();
            let pts = probe_points(seed, probes, rec.probe_center(), 2.0 * ell, &fam.poles(), 0.1 * ell);
            Ok(sdym_residual(&GaugePotential::Analytic(Arc::new(fam)), &pts))
        }));
    }
    Ok(checks)
}

fn background(n: usize) -> Result<GaugePotential> {
    Ok(GaugePotential::Analytic(Arc::new(bpst_instanton(BACKGROUND_CENTER, 1.0, n)?)))
}

fn background_inputs(cfg: &RunConfig) -> Value {
    json!({
        "n": cfg.n,
        "center": BACKGROUND_CENTER,
        "base": BACKGROUND_BASE,
        "jet_order": cfg.jet_order,
    })
}

fn background_jet(cfg: &RunConfig) -> Result<JetPotential> {
    background(cfg.n)?.to_jet(BACKGROUND_BASE, cfg.jet_order)
}

fn jets_residual(bg: &JetPotential, v: &crate::gauge_field::Variation) -> Result<f64> {
    linearized_sdym_residual(&GaugePotential::Jet(bg.clone()), v, &[])
}

fn thooft_duality_defect() -> f64 {
    let mut worst = 0i32;
    for (kind, sign) in [(ThooftKind::Eta, 1), (ThooftKind::EtaBar, -1)] {
        for a in 0..3 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut dual2 = 0;
                    for r in 0..4 {
                        for s in 0..4 {
                            dual2 += levi_civita4(mu, nu, r, s) * thooft(kind, a, r, s);
                        }
                    }
                    worst = worst.max((dual2 - 2 * sign * thooft(kind, a, mu, nu)).abs());
                    worst = worst.max((thooft(kind, a, mu, nu) + thooft(kind, a, nu, mu)).abs());
                }
            }
        }
    }
    // the two families are orthogonal and each is normalized to 4δ
    for a in 0..3 {
        for b in 0..3 {
            let mut mixed = 0;
            let mut same = [0; 2];
            for mu in 0..4 {
                for nu in 0..4 {
                    mixed += thooft(ThooftKind::Eta, a, mu, nu) * thooft(ThooftKind::EtaBar, b, mu, nu);
                    same[0] += thooft(ThooftKind::Eta, a, mu, nu) * thooft(ThooftKind::Eta, b, mu, nu);
                    same[1] += thooft(ThooftKind::EtaBar, a, mu, nu) * thooft(ThooftKind::EtaBar, b, mu, nu);
                }
            }
            let want = if a == b { 4 } else { 0 };
            worst = worst.max(mixed.abs()).max((same[0] - want).abs()).max((same[1] - want).abs());
        }
    }
    worst as f64
}

fn curvature_fd_defect(n: usize, points: &[[f64; 4]]) -> Result<f64> {
    let g = background(n)?;
    let h = 1e-4;
    let mut worst = 0.0f64;
    for x in points {
        let fa = g.curvature_at(x);
        let d = |m: usize| -> [LieMatrix; 4] {
            let (mut p, mut q) = (*x, *x);
            p[m] += h;
            q[m] -= h;
            let (vp, vq) = (g.value(&p), g.value(&q));
            std::array::from_fn(|k| (&vp[k] - &vq[k]).scale_real(0.5 / h))
        };
        let v = g.value(x);
        for (m, nu) in PAIRS {
            let fd = &(&(&d(m)[nu] - &d(nu)[m]) + &(&v[m] * &v[nu])) - &(&v[nu] * &v[m]);
            worst = worst.max((&fd - &fa.get(m, nu)).max_abs());
        }
    }
    Ok(worst)
}

fn manifest_checks(cfg: &RunConfig) -> Vec<Check> {
    let bg = Arc::new(OnceLock::<std::result::Result<JetPotential, String>>::new());
    let cfg_bg = cfg.clone();
    let get = {
        let bg = bg.clone();
        move || -> Result<JetPotential> {
            bg.get_or_init(|| background_jet(&cfg_bg).map_err(|e| e.to_string()))
                .clone()
                .map_err(Error::InvalidParameter)
        }
    };
    let get = Arc::new(get);
    let mut checks = Vec::new();

    checks.push(Check::new("manifest.thooft_duality", Class::Exact, json!({}), || Ok(thooft_duality_defect())));

    let fields: Vec<_> = all_generators().into_iter().map(|g| g.field).collect();
    {
        let fields = fields.clone();
        checks.push(Check::new("manifest.closure", Class::Exact, json!({}), move || {
            Ok((15 - span_rank(&fields).min(15)) as f64 + closure_defect(&fields) as f64)
        }));
    }
    checks.push(Check::new("manifest.rotations_commute", Class::Exact, json!({}), || {
        let mut nonzero = 0;
        for a in 0..3 {
            for b in 0..3 {
                let x = conformal_generator(GeneratorKind::X(a))?.field;
                let y = conformal_generator(GeneratorKind::Y(b))?.field;
                if !vf_bracket(&x, &y).is_zero() {
                    nonzero += 1;
                }
            }
        }
        Ok(nonzero as f64)
    }));

    let inputs = background_inputs(cfg);
    {
        let get = get.clone();
        checks.push(Check::new("manifest.background_sdym", Class::Exact, inputs.clone(), move || {
            Ok(sdym_residual(&GaugePotential::Jet(get()?), &[]))
        }));
    }
    for g in all_generators() {
        let get = get.clone();
        let id = format!("manifest.conformal.{}", g.kind);
        let inputs = json!({ "background": inputs, "generator": g.kind.to_string() });
        checks.push(Check::new(id, Class::Exact, inputs, move || {
            let a = get()?;
            jets_residual(&a, &conformal_variation(&a, &g.field)?)
        }));
    }
    for k in 0..5u64 {
        let get = get.clone();
        let seed = cfg.seed;
        let n = cfg.n;
        let order = cfg.jet_order + 1;
        let inputs = json!({ "background": inputs, "seed": seed, "stream": k, "degree": 3 });
        checks.push(Check::new(format!("manifest.gauge.{k}"), Class::Exact, inputs, move || {
            let a = get()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let th = random_gauge_parameter(&mut rng, a.base(), order, 3);
            let th = if n == 2 { th } else { embed_jet(&th, n) };
            jets_residual(&a, &gauge_variation(&a, &th)?)
        }));
    }
    {
        let n = cfg.n;
        let pts = probe_points(cfg.seed, 5, BACKGROUND_CENTER, 2.0, &[BACKGROUND_CENTER], 0.1);
        let inputs = json!({ "n": n, "points": pts, "step": 1e-4 });
        checks.push(Check::new("manifest.curvature_fd", Class::Fd, inputs, move || curvature_fd_defect(n, &pts)));
    }
    checks
}

fn embed_jet(j: &Jet, n: usize) -> Jet {
    let mut out = Jet::zero(j.frame(), j.base(), n, j.order());
    for e in crate::jet::monomials(j.order()) {
        out.set_coeff(*e, &embed(&j.coeff(*e), n));
    }
    out
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n < 1.0 && v[2] / n > -0.99 {
            return v.map(|c| c / n);
        }
    }
}

type Shared<T> = Arc<OnceLock<std::result::Result<T, String>>>;

fn shared<T: Clone>(cell: &Shared<T>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .clone()
        .map_err(Error::InvalidParameter)
}

struct HiddenContext {
    cfg: RunConfig,
    solution: Shared<Arc<LaxSolution>>,
    transition: Shared<Arc<LaurentJet>>,
}

impl HiddenContext {
    fn psi(&self) -> Result<Arc<LaxSolution>> {
        shared(&self.solution, || Ok(Arc::new(lax_recursion(&background_jet(&self.cfg)?, self.cfg.lambda_order)?)))
    }

    fn transition(&self) -> Result<Arc<LaurentJet>> {
        shared(&self.transition, || Ok(Arc::new(transition_matrix(&*self.psi()?)?)))
    }

    fn generators(&self) -> Vec<LieMatrix> {
        su2_basis().iter().map(|t| embed(t, self.cfg.n)).collect()
    }
}

fn outcome_defect(out: &SymmetryOutcome) -> f64 {
    out.consistency_residual.max(out.route_discrepancy).max(out.side_discrepancy)
}

fn hidden_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let lambdas = cfg.lambdas()?;
    let ctx = Arc::new(HiddenContext {
        cfg: cfg.clone(),
        solution: Arc::default(),
        transition: Arc::default(),
    });
    let bg_inputs = json!({ "background": background_inputs(cfg), "lambda_order": cfg.lambda_order });
    let lam_inputs = json!({ "alpha": cfg.alpha, "per_circle": cfg.lambda_samples });
    let mut checks = Vec::new();

    {
        let seed = cfg.seed;
        checks.push(Check::new("twistor.complex_structure", Class::Machine, json!({ "seed": seed, "count": 100 }), move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let j = complex_structure(random_unit(&mut rng))?;
                for a in 0..4 {
                    for b in 0..4 {
                        let v: f64 = (0..4).map(|k| j[a][k] * j[k][b]).sum();
                        worst = worst.max((v + if a == b { 1.0 } else { 0.0 }).abs());
                    }
                }
            }
            Ok(worst)
        }));
    }
    checks.push(Check::new("twistor.frame_annihilation", Class::Machine, json!({ "base": BACKGROUND_BASE }), || {
        let (w1, w2) = twistor_coordinate_jets(Frame::Complex, BACKGROUND_BASE, 4);
        Ok([&w1, &w2]
            .iter()
            .map(|w| apply_vbar1(w).max_norm().max(apply_vbar2(w).max_norm()))
            .fold(0.0, f64::max))
    }));
    let points = probe_points(cfg.seed, 3, [0.0; 4], 1.5, &[], 0.0);
    for g in all_generators() {
        let pts = points.clone();
        let lams = lambdas.clone();
        let inputs = json!({ "generator": g.kind.to_string(), "points": pts, "lambdas": lam_inputs });
        checks.push(Check::new(format!("twistor.lift.{}", g.kind), Class::Strict, inputs, move || {
            Ok(lift_conformal(&g.field)?.bracket_residual(&pts, &lams))
        }));
    }

    let lax_inputs = json!({ "background": bg_inputs, "lambdas": lam_inputs });
    {
        let (ctx, lams) = (ctx.clone(), lambdas.clone());
        checks.push(Check::new("lax.linear_system", Class::Exact, lax_inputs.clone(), move || {
            let psi = ctx.psi()?;
            verify_linear_system(psi.potential(), &psi, &lams)
        }));
    }
    {
        let ctx = ctx.clone();
        checks.push(Check::new("lax.roundtrip", Class::Exact, bg_inputs.clone(), move || {
            let psi = ctx.psi()?;
            let rec = potentials_from_psi(&psi)?;
            Ok((0..4)
                .map(|m| (&rec.comps()[m] - &psi.potential().comps()[m]).max_norm())
                .fold(0.0, f64::max))
        }));
    }
    {
        let (ctx, lams) = (ctx.clone(), lambdas.clone());
        checks.push(Check::new("lax.transition_holomorphy", Class::Exact, lax_inputs.clone(), move || {
            Ok(holomorphy_residual(&*ctx.transition()?, &lams))
        }));
    }
    {
        let ctx = ctx.clone();
        checks.push(Check::new("lax.antipodal", Class::Exact, bg_inputs.clone(), move || {
            Ok(antipodal_relation_defect(&*ctx.psi()?))
        }));
    }

    for power in 0..3i32 {
        for (ti, t) in ctx.generators().into_iter().enumerate() {
            let cell: Shared<Arc<SymmetryOutcome>> = Arc::default();
            let compute = {
                let ctx = ctx.clone();
                Arc::new(move || {
                    shared(&cell, || {
                        let phi = GaugeTypeGenerator::loop_element(power, &t)?;
                        Ok(Arc::new(gauge_type_variation(&*ctx.psi()?, &phi)?))
                    })
                })
            };
            let stem = format!("hidden.gauge.n{power}.t{}", ti + 1);
            let inputs = json!({ "background": bg_inputs, "power": power, "basis_index": ti });
            let c = compute.clone();
            checks.push(Check::new(format!("{stem}.identities"), Class::Exact, inputs.clone(), move || {
                Ok(outcome_defect(&*c()?))
            }));
            let (c, ctx2) = (compute.clone(), ctx.clone());
            checks.push(Check::new(format!("{stem}.symmetry"), Class::Symmetry, inputs.clone(), move || {
                linearized_sdym_residual(&background(ctx2.cfg.n)?, &c()?.variation(), &[])
            }));
            let c = compute;
            checks.push(Check::new(format!("{stem}.reality"), Class::Exact, inputs, move || {
                Ok(c()?.variation().hermiticity_defect(&[BACKGROUND_BASE]))
            }));
        }
    }

    {
        let ctx = ctx.clone();
        let seed = cfg.seed;
        let inputs = json!({ "background": bg_inputs, "seed": seed, "degree": 3 });
        checks.push(Check::new("hidden.reduction.split", Class::Strict, inputs, move || {
            let psi = ctx.psi()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = random_gauge_parameter(&mut rng, psi.base(), psi.order() + 1, 3);
            let theta = if ctx.cfg.n == 2 { theta } else { embed_jet(&theta, ctx.cfg.n) };
            let parts = crate::riemann_hilbert::SplitPair {
                plus: LaurentPoly::monomial(0, theta.clone()),
                minus: LaurentPoly::monomial(0, theta.clone()),
            };
            let out = variation_from_split(&psi, &parts)?;
            out.variation().distance(&gauge_variation(psi.potential(), &theta)?)
        }));
    }
    {
        let ctx = ctx.clone();
        checks.push(Check::new("hidden.reduction.zero_mode", Class::Strict, bg_inputs.clone(), move || {
            let psi = ctx.psi()?;
            let t = &ctx.generators()[0];
            let out = gauge_type_variation(&psi, &GaugeTypeGenerator::loop_element(0, t)?)?;
            let theta = loop_zero_mode_gauge_parameter(&psi, t)?;
            out.variation().distance(&gauge_variation(psi.potential(), &theta)?)
        }));
    }

    for kind in [GeneratorKind::P(0), GeneratorKind::B, GeneratorKind::X(0)] {
        for power in 0..2i32 {
            let cell: Shared<Arc<SymmetryOutcome>> = Arc::default();
            let compute = {
                let ctx = ctx.clone();
                Arc::new(move || {
                    shared(&cell, || {
                        let lift = lift_conformal(&conformal_generator(kind)?.field)?;
                        let eta = DiffeoTypeGenerator::on(Branch::Plus, lift.times_lambda_power(-power));
                        Ok(Arc::new(diffeo_type_variation(&*ctx.psi()?, &eta, Branch::Plus)?))
                    })
                })
            };
            let stem = format!("hidden.diffeo.{kind}.n{power}");
            let inputs = json!({ "background": bg_inputs, "generator": kind.to_string(), "power": -power });
            let c = compute.clone();
            checks.push(Check::new(format!("{stem}.identities"), Class::Exact, inputs.clone(), move || {
                Ok(outcome_defect(&*c()?))
            }));
            let (c, n) = (compute, cfg.n);
            checks.push(Check::new(format!("{stem}.symmetry"), Class::Symmetry, inputs, move || {
                linearized_sdym_residual(&background(n)?, &c()?.variation(), &[])
            }));
        }
    }

    for (i, case) in algebra_cases().into_iter().enumerate() {
        let ctx = ctx.clone();
        let inputs = json!({ "background": bg_inputs, "case": case.describe() });
        checks.push(Check::new(format!("hidden.algebra.{:02}", i + 1), Class::Exact, inputs, move || {
            let f = ctx.transition()?;
            case.residual(&ctx.generators(), &f)
        }));
    }
    Ok(checks)
}

#[derive(Clone, Copy, Debug)]
struct LoopSpec {
    power: i32,
    w1: u8,
    w2: u8,
    basis: usize,
}

impl LoopSpec {
    const fn new(power: i32, w1: u8, w2: u8, basis: usize) -> Self {
        Self { power, w1, w2, basis }
    }

    fn build(&self, basis: &[LieMatrix]) -> Result<GaugeTypeGenerator> {
        GaugeTypeGenerator::monomial(self.power, self.w1, self.w2, &basis[self.basis])
    }
}

#[derive(Clone, Copy, Debug)]
enum AlgebraCase {
    Bracket(LoopSpec, LoopSpec),
    Derivation(GeneratorKind, i32, LoopSpec),
}

impl AlgebraCase {
    fn describe(&self) -> String {
        format!("{self:?}")
    }

    fn residual(&self, basis: &[LieMatrix], f: &LaurentJet) -> Result<f64> {
        match self {
            AlgebraCase::Bracket(a, b) => Ok(action_bracket_check(&a.build(basis)?, &b.build(basis)?, f)),
            AlgebraCase::Derivation(kind, power, phi) => {
                let eta: TwistorVectorField = lift_conformal(&conformal_generator(*kind)?.field)?.times_lambda_power(*power);
                Ok(derivation_check(&eta, &phi.build(basis)?, f))
            }
        }
    }
}

fn algebra_cases() -> Vec<AlgebraCase> {
    use AlgebraCase::{Bracket, Derivation};
    vec![
        Bracket(LoopSpec::new(1, 0, 0, 0), LoopSpec::new(0, 0, 0, 1)),
        Bracket(LoopSpec::new(1, 0, 0, 0), LoopSpec::new(-1, 0, 2, 2)),
        Bracket(LoopSpec::new(0, 0, 0, 0), LoopSpec::new(2, 0, 0, 2)),
        Bracket(LoopSpec::new(1, 1, 0, 1), LoopSpec::new(-1, 0, 0, 0)),
        Bracket(LoopSpec::new(1, 0, 0, 0), LoopSpec::new(1, 0, 1, 1)),
        Derivation(GeneratorKind::P(2), 0, LoopSpec::new(1, 0, 0, 0)),
        Derivation(GeneratorKind::B, 0, LoopSpec::new(0, 0, 0, 1)),
        Derivation(GeneratorKind::X(0), 0, LoopSpec::new(1, 0, 1, 2)),
        Derivation(GeneratorKind::P(0), -1, LoopSpec::new(1, 0, 0, 1)),
        Derivation(GeneratorKind::K(0), 0, LoopSpec::new(0, 0, 0, 0)),
    ]
}

fn random_laurent(rng: &mut impl Rng, n: usize, lo: i32, hi: i32) -> LaurentPoly<LieMatrix> {
    LaurentPoly::new(
        lo,
        (lo..=hi)
            .map(|_| LieMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect(),
    )
}

fn scalar(v: Complex64) -> LieMatrix {
    LieMatrix::from_fn(1, |_, _| v)
}

fn rh_checks(cfg: &RunConfig) -> Vec<Check> {
    let (n, seed, samples, budget) = (cfg.n, cfg.seed, cfg.samples, cfg.mode_budget);
    let b = budget as i32;
    let (lo, hi) = (-(b.min(4)), b.min(3));
    let poly = move || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_laurent(&mut rng, n, lo, hi)
    };
    let inputs = json!({ "n": n, "seed": seed, "window": [lo, hi], "samples": samples, "budget": budget });
    let mut checks = Vec::new();
    checks.push(Check::new("rh.reconstruction", Class::Strict, inputs.clone(), move || {
        let p = poly();
        let sp = split(&p);
        Ok(sp.minus.sub(&sp.plus).sub(&p).max_norm())
    }));
    checks.push(Check::new("rh.mode_support", Class::Strict, inputs.clone(), move || {
        let sp = split(&poly());
        let wrong_plus = sp.plus.iter().filter(|(k, _)| *k < 0).map(|(_, m)| m.max_abs()).fold(0.0, f64::max);
        let wrong_minus = sp.minus.iter().filter(|(k, _)| *k > 0).map(|(_, m)| m.max_abs()).fold(0.0, f64::max);
        // splitting a plus part again only rescales its constant mode
        let again = split(&sp.plus);
        let rescaled = sp.plus.map_indexed(|k, m| if k == 0 { m.scale_real(-0.5) } else { m.scale_real(-1.0) });
        let stray = again.minus.iter().filter(|(k, _)| *k != 0).map(|(_, m)| m.max_abs()).fold(0.0, f64::max);
        Ok(wrong_plus.max(wrong_minus).max(again.plus.sub(&rescaled).max_norm()).max(stray))
    }));
    checks.push(Check::new("rh.dual_backend", Class::Strict, inputs.clone(), move || {
        let p = poly();
        let s = AnnulusFunction::Sampled(SampledFunction::from_laurent(&p, samples, budget)?);
        let e = AnnulusFunction::Laurent(p.clone());
        let mut worst = laurent_coefficients(&s).sub(&p).max_norm();
        for k in -b..=b {
            let a = contour_coefficient(&e, k).unwrap_or_else(|_| LieMatrix::zeros(n));
            worst = worst.max((&a - &contour_coefficient(&s, k)?).max_abs());
        }
        Ok(worst)
    }));
    checks.push(Check::new("rh.sampled_split", Class::Strict, inputs, move || {
        let p = poly();
        let s = AnnulusFunction::Sampled(SampledFunction::from_laurent(&p, samples, budget)?);
        let (a, e) = (split_annulus(&s), split(&p));
        Ok(a.plus.sub(&e.plus).max_norm().max(a.minus.sub(&e.minus).max_norm()))
    }));
    let inputs = json!({ "samples": samples, "budget": budget, "poles": [2.0, 0.5] });
    checks.push(Check::new("rh.rational_residue", Class::Exact, inputs, move || {
        let mut worst = 0.0f64;
        for pole in [2.0f64, 0.5] {
            let s = SampledFunction::from_fn(samples, budget, |l| scalar(1.0 / (l - Complex64::new(pole, 0.0))))?;
            let m = laurent_coefficients(&AnnulusFunction::Sampled(s));
            for (k, v) in m.iter() {
                // 1/(λ−a) expands in λ^k a^{−k−1} outside, in a^{−k−1} λ^k for k < 0 inside
                let want = if pole > 1.0 {
                    if k >= 0 { -pole.powi(-k - 1) } else { 0.0 }
                } else if k < 0 {
                    pole.powi(-k - 1)
                } else {
                    0.0
                };
                worst = worst.max((v.get(0, 0) - Complex64::new(want, 0.0)).norm());
            }
        }
        Ok(worst)
    }));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_roundtrips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = RunConfig::default();
        let cases = [
            RunConfig { jet_order: 4, ..base.clone() },
            RunConfig { jet_order: 14, ..base.clone() },
            RunConfig { alpha: 1.0, ..base.clone() },
            RunConfig { samples: 48, ..base.clone() },
            RunConfig { samples: 32, ..base.clone() },
            RunConfig { n: 1, ..base.clone() },
        ];
        for c in cases {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn digest_depends_on_inputs() {
        let a = digest("x", &json!({ "a": 1, "b": 2 }));
        assert_eq!(a, digest("x", &json!({ "b": 2, "a": 1 })));
        assert_ne!(a, digest("x", &json!({ "a": 1, "b": 3 })));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn thooft_identities_hold() {
        assert_eq!(thooft_duality_defect(), 0.0);
    }

    #[test]
    fn rh_suite_passes() {
        let reports = cmd_check_rh(&RunConfig::default()).unwrap();
        assert_eq!(reports.len(), 5);
        assert!(all_pass(&reports), "{reports:?}");
    }

    #[test]
    fn errors_become_failing_reports() {
        let cfg = RunConfig::default();
        let checks = vec![Check::new("boom", Class::Exact, json!({}), || Err(Error::Singular))];
        let r = execute(&cfg, checks);
        assert!(!r[0].pass);
        assert_eq!(r[0].residual, f64::MAX);
        assert!(r[0].error.is_some());
        assert!(r[0].wall_time.is_none());
    }
}
