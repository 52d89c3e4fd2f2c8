//! Invariant suites run by `hexcover verify`.
//!
//! Each suite is a [`Suite`] trait object in a [`SuiteRegistry`]. Sampling
//! is seeded, so a suite's report is the same on every run apart from wall
//! time.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covering::{self, CoverContext};
use crate::elliptic::{self, klein_j, modular_lambda, EllipticContext, ModularPoint};
use crate::error::{Error, Result};
use crate::gamma::{
    aut, clifford_bracket, core_square, in_n, matrix_to_word, n_matrix, normal_form, psi_letter, psi_matrix, psi_word,
    reduce_to_f, AffineMap, GammaElt, Letter, NMatrix, Word,
};
use crate::lattice::{distance_to_excised, FundamentalTriangle, OMEGA, OMEGA_SQ};
use crate::registry::EvalOptions;
use crate::report::{CheckResult, RunReport};
use crate::sl3::{self, CartanElt};

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, opts: &EvalOptions) -> RunReport;
}

/// Name → suite. `all` is not an entry; [`SuiteRegistry::run`] expands it.
pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn Suite>>,
    order: Vec<&'static str>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        Self {
            suites: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GroupSuite));
        r.register(Box::new(EllipticSuite));
        r.register(Box::new(CoverSuite));
        r.register(Box::new(Sl3Suite));
        r
    }

    pub fn register(&mut self, suite: Box<dyn Suite>) {
        let name = suite.name();
        if self.suites.insert(name, suite).is_none() {
            self.order.push(name);
        }
    }

    /// Suite names in registration order.
    pub fn names(&self) -> &[&'static str] {
        &self.order
    }

    pub fn get(&self, name: &str) -> Option<&dyn Suite> {
        self.suites.get(name).map(|s| s.as_ref())
    }

    pub fn run(&self, name: &str, opts: &EvalOptions) -> Result<RunReport> {
        if name == "all" {
            let parts = self.order.iter().map(|n| self.suites[n].run(opts)).collect();
            return Ok(RunReport::merge("all", parts));
        }
        self.get(name).map(|s| s.run(opts)).ok_or_else(|| Error::Unknown {
            kind: "suite",
            name: name.to_string(),
        })
    }
}

/// Turns an error inside a check into a failed check.
fn guard(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::failed(name, e.to_string()))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point of the standard fundamental domain with `Im z ≤ y_max`.
pub fn sample_f<R: Rng + ?Sized>(rng: &mut R, y_max: f64) -> Complex64 {
    let x: f64 = rng.gen_range(-0.5..0.5);
    let y0 = (1.0 - x * x).sqrt();
    c(x, rng.gen_range(y0..y_max))
}

/// A point of the fundamental domain at least `margin` from `i`, `ρ` and `ρ + 1`.
fn sample_f_generic<R: Rng + ?Sized>(rng: &mut R, y_max: f64, margin: f64) -> Complex64 {
    loop {
        let z = sample_f(rng, y_max);
        let d = [c(0.0, 1.0), OMEGA, OMEGA_SQ]
            .iter()
            .map(|p| (z - p).norm())
            .fold(f64::INFINITY, f64::min);
        if d > margin {
            return z;
        }
    }
}

struct GroupSuite;

impl Suite for GroupSuite {
    fn name(&self) -> &'static str {
        "group"
    }

    fn summary(&self) -> &'static str {
        "presentation, normal forms, kernel N and Clifford identities"
    }

    fn run(&self, _opts: &EvalOptions) -> RunReport {
        RunReport::timed(self.name(), || {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6a11);
            vec![
                guard("presentation", group_presentation),
                guard("aut-relations", aut_relations),
                guard("normal-form-roundtrip", || normal_form_roundtrip(&mut rng, 1000)),
                guard("normal-form-identities", normal_form_identities),
                guard("word-roundtrip", || word_roundtrip(&mut rng, 200)),
                guard("kernel-conjugates", || kernel_conjugates(&mut rng, 200)),
                guard("kernel-n-matrix", kernel_n_matrix),
                guard("kernel-excludes-generators", kernel_excludes_generators),
                guard("clifford-square", || clifford_square(&mut rng, 100)),
                guard("clifford-bracket", || clifford_brackets(&mut rng, 100)),
            ]
        })
    }
}

fn group_presentation() -> Result<CheckResult> {
    let s = psi_letter(Letter::S);
    let t = psi_letter(Letter::T);
    let st = s.compose(&t)?;
    let ok = s.pow(2)?.is_identity() && st.pow(3)?.is_identity() && t.pow(6)?.is_identity();
    Ok(CheckResult::exact("presentation", ok, "S², (ST)³, T⁶ map to the identity"))
}

fn aut_relations() -> Result<CheckResult> {
    use aut::{a, b, c};
    let o = |x: AffineMap, y: AffineMap| x.compose(&y);
    let (ai, bi) = (a().inverse()?, b().inverse()?);
    let checks = [
        (o(b(), a())?, o(a(), b())?),
        (o(c(), a())?, o(b(), c())?),
        (o(c(), b())?, o(o(ai, b())?, c())?),
        (o(c(), ai)?, o(bi, c())?),
        (o(c(), bi)?, o(o(a(), bi)?, c())?),
        (c().pow(6)?, AffineMap::IDENTITY),
    ];
    let bad = checks.iter().filter(|(x, y)| x != y).count();
    Ok(CheckResult::exact("aut-relations", bad == 0, format!("{bad} of 6 relations fail")))
}

fn normal_form_roundtrip(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..count {
        let len = rng.gen_range(0..=16);
        let m = psi_word(&Word::random(rng, len))?;
        if normal_form(&m)?.to_affine()? != m {
            bad += 1;
        }
    }
    Ok(CheckResult::exact(
        "normal-form-roundtrip",
        bad == 0,
        format!("{bad} of {count} images fail"),
    ))
}

fn normal_form_identities() -> Result<CheckResult> {
    let w = |s: &str| -> Result<AffineMap> { psi_word(&s.parse()?) };
    let c3 = aut::c().pow(3)?;
    let ok = w("S")? == aut::big_b().compose(&c3)?
        && w("STTT")? == aut::big_b()
        && w("tSTTTT")? == aut::big_a();
    Ok(CheckResult::exact(
        "normal-form-identities",
        ok,
        "S = Bc³, B = ST³, A = T⁻¹ST⁴",
    ))
}

fn word_roundtrip(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..count {
        let len = rng.gen_range(0..=12);
        let g = Word::random(rng, len).to_gamma()?;
        if matrix_to_word(&g)?.to_gamma()? != g {
            bad += 1;
        }
    }
    Ok(CheckResult::exact("word-roundtrip", bad == 0, format!("{bad} of {count} fail")))
}

fn kernel_conjugates(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let t6 = GammaElt::t_pow(6);
    let mut bad = 0;
    for _ in 0..count {
        let len = rng.gen_range(0..=8);
        let h = Word::random(rng, len).to_gamma()?;
        let g = h.mul(&t6)?.mul(&h.inverse())?;
        if !in_n(&g)? {
            bad += 1;
        }
    }
    Ok(CheckResult::exact(
        "kernel-conjugates",
        bad == 0,
        format!("{bad} of {count} conjugates of T⁶ outside N"),
    ))
}

fn kernel_n_matrix() -> Result<CheckResult> {
    let mut bad = 0;
    for x in -5..=5 {
        for y in -5..=5 {
            if (x, y) != (0, 0) && !in_n(&n_matrix(x, y)?)? {
                bad += 1;
            }
        }
    }
    Ok(CheckResult::exact("kernel-n-matrix", bad == 0, format!("{bad} of 120 outside N")))
}

fn kernel_excludes_generators() -> Result<CheckResult> {
    let st = GammaElt::S.mul(&GammaElt::T)?;
    let ok = !in_n(&GammaElt::S)? && !in_n(&GammaElt::T)? && !in_n(&st)?;
    Ok(CheckResult::exact("kernel-excludes-generators", ok, "S, T, ST"))
}

fn clifford_square(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..count {
        let m = NMatrix::new(rng.gen_range(-50..=50), rng.gen_range(-50..=50));
        if core_square(&m)? != [[0, 0], [0, 0]] {
            bad += 1;
        }
    }
    Ok(CheckResult::exact("clifford-square", bad == 0, format!("{bad} of {count} nonzero")))
}

fn clifford_brackets(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let mut bad = 0;
    for _ in 0..count {
        let (x, y, p, q) = (
            rng.gen_range(-50..=50i64),
            rng.gen_range(-50..=50i64),
            rng.gen_range(-50..=50i64),
            rng.gen_range(-50..=50i64),
        );
        let br = clifford_bracket(&NMatrix::new(x, y), &NMatrix::new(p, q))?;
        let d = x * q - p * y;
        if !br.is_scalar || br.scalar.abs() != d * d {
            bad += 1;
        }
    }
    Ok(CheckResult::exact(
        "clifford-bracket",
        bad == 0,
        format!("{bad} of {count} pairs fail |AB+BA| = (xq−py)²"),
    ))
}

struct EllipticSuite;

impl Suite for EllipticSuite {
    fn name(&self) -> &'static str {
        "elliptic"
    }

    fn summary(&self) -> &'static str {
        "Weierstrass ODE, invariants, direct sums, λ and J identities"
    }

    fn run(&self, _opts: &EvalOptions) -> RunReport {
        RunReport::timed(self.name(), || {
            let mut rng = ChaCha8Rng::seed_from_u64(0xe11);
            vec![
                guard("ode-residual", || ode_residual(&mut rng, 100)),
                guard("g2-of-r", || {
                    let g2 = EllipticContext::standard_r().g2().norm();
                    Ok(CheckResult::bounded("g2-of-r", g2, 1e-10, "equianharmonic"))
                }),
                guard("fast-vs-direct", || fast_vs_direct(&mut rng, 20)),
                guard("j-invariance", || j_invariance(&mut rng, 50, 10)),
                guard("j-at-omega", || {
                    let a = klein_j(ModularPoint::new(OMEGA)?)?.norm();
                    let b = klein_j(ModularPoint::new(OMEGA_SQ)?)?.norm();
                    Ok(CheckResult::bounded("j-at-omega", a.max(b), 1e-8, "J(ω) = J(ω²) = 0"))
                }),
                guard("lambda-at-i", || {
                    let l = modular_lambda(ModularPoint::new(c(0.0, 1.0))?)?;
                    Ok(CheckResult::bounded("lambda-at-i", (l - 0.5).norm(), 1e-9, "λ(i) = ½"))
                }),
                guard("lambda-functional-equations", lambda_functional_equations),
            ]
        })
    }
}

fn test_lattices() -> Result<Vec<EllipticContext>> {
    Ok(vec![
        EllipticContext::standard_r(),
        EllipticContext::new(c(1.0, 0.0), c(0.0, 1.0))?,
        EllipticContext::new(c(0.7, -0.2), c(0.4, 1.3))?,
    ])
}

fn ode_residual(rng: &mut ChaCha8Rng, per_lattice: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for ctx in test_lattices()? {
        let mut done = 0;
        while done < per_lattice {
            let z = ctx.period1() * rng.gen::<f64>() + ctx.period2() * rng.gen::<f64>();
            if ctx.distance_to_lattice(z) < 0.25 * ctx.shortest_vector() {
                continue;
            }
            worst = worst.max(ctx.ode_residual(z)?.norm());
            done += 1;
        }
    }
    Ok(CheckResult::bounded(
        "ode-residual",
        worst,
        1e-8,
        format!("{per_lattice} points on each of 3 lattices"),
    ))
}

fn fast_vs_direct(rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let ctx = EllipticContext::standard_r();
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < count {
        let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if ctx.distance_to_lattice(z) < 0.2 {
            continue;
        }
        let direct = elliptic::wp_direct_oracle(ctx.period1(), ctx.period2(), z, 150);
        worst = worst.max((ctx.wp(z)? - direct).norm());
        done += 1;
    }
    Ok(CheckResult::bounded(
        "fast-vs-direct",
        worst,
        1e-3,
        format!("{count} points, direct cutoff 150"),
    ))
}

fn j_invariance(rng: &mut ChaCha8Rng, words: usize, points: usize) -> Result<CheckResult> {
    let zs: Vec<_> = (0..points).map(|_| sample_f(rng, 2.0)).collect();
    let mut worst = 0.0f64;
    for _ in 0..words {
        let len = rng.gen_range(0..=6);
        let g = Word::random(rng, len).to_gamma()?;
        for &z in &zs {
            let a = klein_j(ModularPoint::new(g.act(z))?)?;
            let b = klein_j(ModularPoint::new(z)?)?;
            worst = worst.max((a - b).norm());
        }
    }
    Ok(CheckResult::bounded(
        "j-invariance",
        worst,
        1e-7,
        format!("{words} words of length ≤ 6 × {points} points"),
    ))
}

fn lambda_functional_equations() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for tau in [c(0.1, 1.2), c(-0.3, 0.9), c(0.45, 1.6), c(0.0, 1.0), c(0.2, 0.7)] {
        let l = modular_lambda(ModularPoint::new(tau)?)?;
        let lt = modular_lambda(ModularPoint::new(tau + 1.0)?)?;
        let ls = modular_lambda(ModularPoint::new(-tau.inv())?)?;
        worst = worst.max((lt - l / (l - 1.0)).norm()).max((ls - (1.0 - l)).norm());
    }
    Ok(CheckResult::bounded(
        "lambda-functional-equations",
        worst,
        1e-8,
        "λ(τ+1) = λ/(λ−1), λ(−1/τ) = 1−λ",
    ))
}

struct CoverSuite;

impl Suite for CoverSuite {
    fn name(&self) -> &'static str {
        "cover"
    }

    fn summary(&self) -> &'static str {
        "covering identity, equivariance, seams, derivative laws and range"
    }

    fn run(&self, opts: &EvalOptions) -> RunReport {
        RunReport::timed(self.name(), || {
            let ctx = CoverContext::with_normalization(opts.normalization);
            let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
            let mut checks = vec![
                guard("covering-identity", || covering_identity(&ctx, &mut rng, 200)),
                guard("image-in-triangle", || image_in_triangle(&ctx)),
                guard("equivariance", || equivariance(&ctx, &mut rng, 30, 100)),
                guard("seam", || seams(&ctx)),
            ];
            checks.extend(
                derivative_laws(&ctx, &mut rng, 20, 20)
                    .unwrap_or_else(|e| vec![CheckResult::failed("derivative-law", e.to_string())]),
            );
            checks.extend(range(&ctx).unwrap_or_else(|e| vec![CheckResult::failed("range", e.to_string())]));
            checks
        })
    }
}

/// Heights above this make `|α(J)|` large enough that an absolute `1e−9`
/// asks for more than double precision.
pub const COVER_SAMPLE_HEIGHT: f64 = 2.5;

fn covering_identity(ctx: &CoverContext, rng: &mut ChaCha8Rng, count: usize) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for _ in 0..count {
        let z = sample_f(rng, COVER_SAMPLE_HEIGHT);
        let w = covering::phi(z, ctx)?.value;
        let d = ctx.elliptic().wp_prime(w)?;
        let j = klein_j(ModularPoint::new(z)?)?;
        worst = worst.max((d * d - ctx.alpha_normalized(j)).norm());
    }
    Ok(CheckResult::bounded(
        "covering-identity",
        worst,
        1e-9,
        format!("|℘′(φ)² − α(J)| at {count} points of F, Im ≤ {COVER_SAMPLE_HEIGHT}"),
    ))
}

fn image_in_triangle(ctx: &CoverContext) -> Result<CheckResult> {
    let tri = FundamentalTriangle::default();
    let mut worst = 0.0f64;
    for i in 0..=20 {
        for j in 0..20 {
            let x = -0.5 + i as f64 / 20.0;
            let y = (1.0 - x * x).sqrt() + 0.2 * j as f64;
            let w = covering::phi(c(x, y), ctx)?.value;
            let outside = tri.barycentric(w).iter().map(|b| -b).fold(0.0, f64::max);
            worst = worst.max(outside);
        }
    }
    Ok(CheckResult::bounded(
        "image-in-triangle",
        worst,
        1e-6,
        "largest negative barycentric coordinate on a 21×20 grid of F",
    ))
}

fn equivariance(ctx: &CoverContext, rng: &mut ChaCha8Rng, words: usize, points: usize) -> Result<CheckResult> {
    let zs: Vec<_> = (0..points).map(|_| sample_f(rng, 3.0)).collect();
    let mut worst = 0.0f64;
    for _ in 0..words {
        let len = rng.gen_range(0..=8);
        let g = Word::random(rng, len).to_gamma()?;
        for &z in &zs {
            worst = worst.max(covering::equivariance_residual(&g, z, ctx)?);
        }
    }
    Ok(CheckResult::bounded(
        "equivariance",
        worst,
        1e-6,
        format!("{words} words of length ≤ 8 × {points} points"),
    ))
}

fn seams(ctx: &CoverContext) -> Result<CheckResult> {
    let d = 1e-7;
    let mut worst = 0.0f64;
    for y in [0.9, 1.2, 1.7, 2.5, 3.5] {
        for x in [-0.5, 0.5] {
            let a = covering::phi(c(x - d, y), ctx)?.value;
            let b = covering::phi(c(x + d, y), ctx)?.value;
            worst = worst.max((a - b).norm());
        }
    }
    for t in [0.2f64, 0.7, -0.4] {
        let p = c(t.sin(), t.cos());
        let a = covering::phi(p * (1.0 + d), ctx)?.value;
        let b = covering::phi(p * (1.0 - d), ctx)?.value;
        worst = worst.max((a - b).norm());
    }
    Ok(CheckResult::bounded("seam", worst, 1e-6, "across Re = ±½ and the unit arc"))
}

fn derivative_laws(
    ctx: &CoverContext,
    rng: &mut ChaCha8Rng,
    words: usize,
    points: usize,
) -> Result<Vec<CheckResult>> {
    let zs: Vec<_> = (0..points).map(|_| sample_f_generic(rng, 2.0, 0.05)).collect();
    let dz = zs
        .iter()
        .map(|&z| covering::phi_prime(z, ctx))
        .collect::<Result<Vec<_>>>()?;
    let (mut weight2, mut weight12) = (0.0f64, 0.0f64);
    for _ in 0..words {
        let len = rng.gen_range(0..=6);
        let g = Word::random(rng, len).to_gamma()?;
        let ell = psi_matrix(&g)?.linear().to_complex();
        for (&z, &d) in zs.iter().zip(&dz) {
            let gz = g.act(z);
            if gz.im < 2.0 * covering::STENCIL_RADIUS {
                continue;
            }
            let dg = covering::phi_prime(gz, ctx)?;
            let j2 = g.automorphy(z).powi(2);
            weight2 = weight2.max((dg - ell * j2 * d).norm() / d.norm());
            let rhs = j2.powi(6) * d.powi(6);
            weight12 = weight12.max((dg.powi(6) - rhs).norm() / rhs.norm());
        }
    }
    Ok(vec![
        CheckResult::bounded(
            "derivative-law",
            weight2,
            1e-4,
            "φ′(gz) = ℓ(g)(cz+d)²φ′(z), relative",
        ),
        CheckResult::bounded(
            "sixth-power-law",
            weight12,
            1e-3,
            "φ′(gz)⁶ = (cz+d)¹²φ′(z)⁶, relative",
        ),
    ])
}

/// Reduced height up to which `φ` keeps a `1e−3` margin from `R`.
pub const RANGE_HEIGHT: f64 = 7.0;

fn range(ctx: &CoverContext) -> Result<Vec<CheckResult>> {
    // Near a cusp φ(z) approaches a point of R like 2.47·e^{−πy/3}, y the
    // reduced height, so the margin is only uniform on bounded heights.
    let mut margin = f64::INFINITY;
    let mut asym = 0.0f64;
    let mut deep = 0;
    for i in 0..50 {
        for j in 0..50 {
            let z = c(-2.0 + 4.0 * i as f64 / 49.0, 0.05 + 3.95 * j as f64 / 49.0);
            let (_, zr) = reduce_to_f(z)?;
            let m = distance_to_excised(covering::phi(z, ctx)?.value);
            if zr.im <= RANGE_HEIGHT {
                margin = margin.min(m);
            } else {
                deep += 1;
                let predicted = 2.47 * (-PI * zr.im / 3.0).exp();
                asym = asym.max((m / predicted - 1.0).abs());
            }
        }
    }
    Ok(vec![
        CheckResult::at_least(
            "range",
            margin,
            1e-3,
            format!("smallest distance to R over reduced heights ≤ {RANGE_HEIGHT}"),
        ),
        CheckResult::bounded(
            "range-cusp-asymptotics",
            asym,
            0.05,
            format!("{deep} deeper nodes follow 2.47·e^(−πy/3)"),
        ),
    ])
}

struct Sl3Suite;

impl Suite for Sl3Suite {
    fn name(&self) -> &'static str {
        "sl3"
    }

    fn summary(&self) -> &'static str {
        "weight trace sums for ℘ and λ"
    }

    fn run(&self, opts: &EvalOptions) -> RunReport {
        RunReport::timed(self.name(), || {
            vec![
                guard("trace-sum-accuracy", || trace_sum_accuracy(opts.cutoff.unwrap_or(300))),
                guard("trace-sum-convergence", trace_sum_convergence),
                guard("weight-count", || {
                    let bad = (1..=50u32)
                        .filter(|&n| {
                            let m = 3 * n as usize;
                            sl3::sym_weights(n).len() != (m + 1) * (m + 2) / 2
                        })
                        .count();
                    Ok(CheckResult::exact("weight-count", bad == 0, "(3n+1)(3n+2)/2 for n ≤ 50"))
                }),
                guard("weight-triangle", weight_triangle),
                guard("sym-convergence", sym_convergence),
                guard("lambda-rep", || lambda_rep(opts)),
            ]
        })
    }
}

pub const TRACE_POINTS: [Complex64; 5] = [
    Complex64::new(0.3, 0.2),
    Complex64::new(-0.4, 0.5),
    Complex64::new(0.1, -0.7),
    Complex64::new(0.9, 0.1),
    Complex64::new(0.25, 1.0),
];

fn trace_sum_accuracy(cutoff: u32) -> Result<CheckResult> {
    let h = CartanElt::standard();
    let ctx = EllipticContext::standard_r();
    let mut worst = 0.0f64;
    for z in TRACE_POINTS {
        let wp = ctx.wp(z)?;
        worst = worst.max((sl3::wp_trace_sum(&h, z, cutoff)? - wp).norm() / wp.norm());
    }
    Ok(CheckResult::bounded(
        "trace-sum-accuracy",
        worst,
        0.05,
        format!("relative error at cutoff {cutoff}, 5 points"),
    ))
}

fn trace_sum_convergence() -> Result<CheckResult> {
    let h = CartanElt::standard();
    let ctx = EllipticContext::standard_r();
    let mut bad = 0;
    let mut ratios = vec![];
    for z in TRACE_POINTS {
        let wp = ctx.wp(z)?;
        let errs = [50, 100, 200, 400]
            .iter()
            .map(|&k| Ok((sl3::wp_trace_sum(&h, z, k)? - wp).norm()))
            .collect::<Result<Vec<_>>>()?;
        bad += errs.windows(2).filter(|w| w[1] >= w[0]).count();
        ratios.push(errs[2] / errs[3]);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(CheckResult::exact(
        "trace-sum-convergence",
        bad == 0,
        format!("error falls at each doubling of 50..400; mean factor {mean:.3} at 200 → 400"),
    ))
}

fn weight_triangle() -> Result<CheckResult> {
    let h = CartanElt::standard();
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let mut bad = vec![];
    for n in [1u32, 2, 5, 9] {
        let from_sym: BTreeSet<(i64, i64)> = sl3::sym_weights(n).iter().map(|w| w.root_coords()).collect();
        let nf = 3.0 * n as f64;
        let v = [h.h[0] * nf, h.h[1] * nf, h.h[2] * nf];
        let area = cross(v[1] - v[0], v[2] - v[0]);
        let k = 4 * n as i64;
        let mut direct = BTreeSet::new();
        for n1 in -k..=k {
            for n2 in -k..=k {
                let p = h.root(n1, n2);
                if (0..3).all(|i| cross(v[(i + 1) % 3] - v[i], p - v[i]) / area >= -1e-9) {
                    direct.insert((n1, n2));
                }
            }
        }
        if direct != from_sym {
            bad.push(n);
        }
    }
    Ok(CheckResult::exact(
        "weight-triangle",
        bad.is_empty(),
        format!("Sym^(3n) weights = root points of the triangle, n in {{1,2,5,9}}; mismatches {bad:?}"),
    ))
}

fn sym_convergence() -> Result<CheckResult> {
    let h = CartanElt::standard();
    let ctx = EllipticContext::standard_r();
    let mut bad = 0;
    for z in &TRACE_POINTS[..3] {
        let wp = ctx.wp(*z)?;
        let err = |n: u32| -> Result<(f64, f64)> {
            let a = sl3::sym_trace_partial(n, &h, *z, false)?;
            let b = sl3::sym_trace_partial(n, &h, *z, true)?;
            Ok(((a - wp).norm(), ((a + b) / 2.0 - wp).norm()))
        };
        let (p50, avg50) = err(50)?;
        let (p100, avg100) = err(100)?;
        if !(p100 < p50 && avg100 < avg50 && avg100 <= p100) {
            bad += 1;
        }
    }
    Ok(CheckResult::exact(
        "sym-convergence",
        bad == 0,
        "error at n = 100 below n = 50; primal/dual average no worse, 3 points",
    ))
}

fn lambda_rep(opts: &EvalOptions) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for tau in [c(0.0, 1.0), c(0.0, 2.0), c(0.3, 1.1)] {
        let exact = modular_lambda(ModularPoint::new(tau)?)?;
        worst = worst.max((sl3::lambda_rep_with(tau, 500, opts.labeling)? - exact).norm());
    }
    Ok(CheckResult::bounded(
        "lambda-rep",
        worst,
        1e-2,
        format!("cutoff 500, labeling {}", opts.labeling.name()),
    ))
}
