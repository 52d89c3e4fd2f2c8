//! The covering map `φ: ℍ → 𝐁`, built on `F` as the composite
//! `((℘′)²)⁻¹ ∘ α ∘ J` with values in the triangle `F̄ = (0, ω, ω²)` and
//! extended to `ℍ` by `φ(z) = ψ(g)⁻¹ φ(g z)` for the reducing element `g`.
//!
//! `(℘′)²` for the lattice `R` is invariant under `w ↦ ωw` and under
//! translation by `R`, and maps `F̄` onto `ℂ`. Inversion is Newton's method
//! seeded from a table of forward values over `F̄`, followed by folding the
//! root back into `F̄`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::{klein_j, EllipticContext, ModularPoint};
use crate::error::{Error, Result};
use crate::gamma::{psi_matrix, reduce_to_f, GammaElt};
use crate::lattice::{excised_embed, nearest_excised_point, FundamentalTriangle, OMEGA, OMEGA_SQ};

/// Radius of the Cauchy stencil used for `φ′`.
pub const STENCIL_RADIUS: f64 = 1e-3;
/// Number of nodes on the stencil circle.
pub const STENCIL_POINTS: usize = 16;
/// Distance kept from the elliptic points `i`, `ω`, `ω²` by `φ′`.
pub const CORNER_GUARD: f64 = 1e-3;

const SEED_GRID: usize = 64;
const RANDOM_SEEDS: usize = 16;
/// Above this modulus the reciprocal equation `1/℘′² = 1/v` is solved.
const LARGE_VALUE: f64 = 1e3;
/// Above this modulus the root is within about 0.02 of the pole and the
/// Laurent expansion there is exact to double precision.
const POLE_VALUE: f64 = 1e10;

/// How `J` is mapped to a value of `(℘′)²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// `α(z) = (z − 1)/℘′(ω)²`.
    Printed,
    /// `α(z) = ℘′(ω)²(1 − z)`: sends `J = 1` to `0` and `J = 0` to `℘′(ω)²`,
    /// which matches the corners and edges of `F` with those of `F̄`.
    #[default]
    BoundaryMatched,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::Printed => "printed",
            Normalization::BoundaryMatched => "boundary-matched",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Normalization::Printed),
            "boundary-matched" => Ok(Normalization::BoundaryMatched),
            other => Err(Error::Unknown {
                kind: "normalization",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonParams {
    pub max_iter: usize,
    /// Relative residual `|℘′(w)² − v| / max(1, |v|)` at which iteration stops.
    pub residual_target: f64,
    /// Relative residual accepted as success.
    pub accept: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            max_iter: 50,
            residual_target: 1e-11,
            accept: 1e-9,
        }
    }
}

/// Outcome of one inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiResult {
    pub value: Complex64,
    /// `|℘′(w)² − v|` for the target `v` of the inversion.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct CoverContext {
    elliptic: EllipticContext,
    wp_prime_omega_sq: Complex64,
    seeds: Vec<(Complex64, Complex64)>,
    newton: NewtonParams,
    normalization: Normalization,
}

impl Default for CoverContext {
    fn default() -> Self {
        Self::new()
    }
}

impl CoverContext {
    pub fn new() -> Self {
        Self::with_normalization(Normalization::default())
    }

    pub fn with_normalization(normalization: Normalization) -> Self {
        let elliptic = EllipticContext::standard_r();
        let d = elliptic.wp_prime(OMEGA).expect("ω is not a lattice point of R");
        let tri = FundamentalTriangle::default();
        let n = SEED_GRID as f64;
        let mut seeds = Vec::with_capacity(SEED_GRID * (SEED_GRID + 1) / 2);
        for i in 0..SEED_GRID {
            for j in 0..SEED_GRID - i {
                // barycentric ((i+⅓)/n, (j+⅓)/n, rest): strictly interior
                let (b1, b2) = ((i as f64 + 1.0 / 3.0) / n, (j as f64 + 1.0 / 3.0) / n);
                let w = OMEGA * b1 + OMEGA_SQ * b2;
                let corner = [Complex64::new(0.0, 0.0), OMEGA, OMEGA_SQ]
                    .iter()
                    .map(|c| (w - c).norm())
                    .fold(f64::INFINITY, f64::min);
                if corner < CORNER_GUARD || !tri.contains(w, 0.0) {
                    continue;
                }
                if let Ok(p) = elliptic.wp_prime(w) {
                    seeds.push((w, p * p));
                }
            }
        }
        Self {
            elliptic,
            wp_prime_omega_sq: d * d,
            seeds,
            newton: NewtonParams::default(),
            normalization,
        }
    }

    pub fn with_newton(mut self, newton: NewtonParams) -> Self {
        self.newton = newton;
        self
    }

    pub fn elliptic(&self) -> &EllipticContext {
        &self.elliptic
    }

    /// `℘′(ω)²` for the lattice `R`; equals `−g₃`.
    pub fn wp_prime_omega_sq(&self) -> Complex64 {
        self.wp_prime_omega_sq
    }

    pub fn seeds(&self) -> &[(Complex64, Complex64)] {
        &self.seeds
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn newton(&self) -> NewtonParams {
        self.newton
    }

    /// `α` under the context's normalization.
    pub fn alpha_normalized(&self, z: Complex64) -> Complex64 {
        match self.normalization {
            Normalization::Printed => alpha(z, self),
            Normalization::BoundaryMatched => self.wp_prime_omega_sq * (1.0 - z),
        }
    }

    fn nearest_seed(&self, v: Complex64) -> Complex64 {
        self.seeds
            .iter()
            .min_by(|a, b| (a.1 - v).norm_sqr().total_cmp(&(b.1 - v).norm_sqr()))
            .map(|s| s.0)
            .unwrap_or_else(|| FundamentalTriangle::default().centroid())
    }
}

/// `α(z) = (z − 1)/℘′(ω)²`.
pub fn alpha(z: Complex64, ctx: &CoverContext) -> Complex64 {
    (z - 1.0) / ctx.wp_prime_omega_sq
}

fn rel_residual(dp: Complex64, v: Complex64) -> f64 {
    (dp * dp - v).norm() / v.norm().max(1.0)
}

/// Seed near the pole at 0: `℘′(w)² ≈ 4/w⁶`, taking the sixth root whose
/// argument lies between those of `ω` and `ω²`.
fn asymptotic_seed(v: Complex64) -> Complex64 {
    let base = (Complex64::new(4.0, 0.0) / v).powf(1.0 / 6.0);
    (0..6)
        .map(|k| base * Complex64::from_polar(1.0, k as f64 * PI / 3.0))
        .find(|w| {
            let a = w.arg();
            (PI / 3.0 - 1e-12..=2.0 * PI / 3.0 + 1e-12).contains(&a)
        })
        .unwrap_or(base)
}

fn newton_from(v: Complex64, w0: Complex64, ctx: &CoverContext) -> (Complex64, f64, usize) {
    let ell = &ctx.elliptic;
    let p = ctx.newton;
    let g2 = ell.g2();
    let large = v.norm() > LARGE_VALUE;
    let eval = |w: Complex64| ell.wp_pair(w).ok().map(|(x, d)| (x, d, rel_residual(d, v)));
    let Some(mut cur) = eval(w0) else {
        return (w0, f64::INFINITY, 0);
    };
    let mut w = w0;
    let mut iters = 0;
    let mut polished = false;
    while iters < p.max_iter {
        let (x, d, r) = cur;
        if r <= p.residual_target {
            if polished {
                break;
            }
            polished = true;
        }
        iters += 1;
        let dd = x * x * 6.0 - g2 / 2.0;
        let step = if large {
            // f = 1/℘′² − 1/v, f′ = −2℘″/℘′³
            (d.inv() * d.inv() - v.inv()) / (-dd * 2.0 / (d * d * d))
        } else {
            (d * d - v) / (d * dd * 2.0)
        };
        if !step.is_finite() {
            break;
        }
        let mut lam = 1.0;
        let mut next = None;
        for _ in 0..12 {
            let cand = w - step * lam;
            if let Some(e) = eval(cand) {
                if e.2 < r {
                    next = Some((cand, e));
                    break;
                }
            }
            lam *= 0.5;
        }
        match next {
            Some((cand, e)) => {
                w = cand;
                cur = e;
            }
            None => break,
        }
    }
    (w, cur.2, iters)
}

/// Maps `w` into the closed triangle `F̄` by a translation in `R` followed by
/// a rotation `ω^{−k}`; both leave `(℘′)²` unchanged.
pub fn fold_into_triangle(w: Complex64) -> Complex64 {
    let tri = FundamentalTriangle::default();
    let d = w - excised_embed(nearest_excised_point(w));
    (0..6)
        .map(|k| d * Complex64::from_polar(1.0, -(k as f64) * PI / 3.0))
        .max_by(|a, b| {
            let ma = tri.barycentric(*a).into_iter().fold(f64::INFINITY, f64::min);
            let mb = tri.barycentric(*b).into_iter().fold(f64::INFINITY, f64::min);
            ma.total_cmp(&mb)
        })
        .expect("six candidates")
}

/// `℘′` from its Laurent expansion `−2/w³ + (g₂/10)w + (g₃/7)w³`.
fn wp_prime_laurent(w: Complex64, ctx: &CoverContext) -> Complex64 {
    let e = &ctx.elliptic;
    -2.0 / (w * w * w) + e.g2() / 10.0 * w + e.g3() / 7.0 * w * w * w
}

/// `℘′² = 4/w⁶ − (2g₂/5)/w² − 4g₃/7 + O(w²)`; with `g₂(R) = 0` this gives
/// `w⁶ = 4/(v + 4g₃/7)` up to a relative `O(w¹²)`.
fn invert_near_pole(v: Complex64, ctx: &CoverContext) -> PhiResult {
    let w = asymptotic_seed(v + ctx.elliptic.g3() * (4.0 / 7.0));
    let d = wp_prime_laurent(w, ctx);
    PhiResult {
        value: w,
        residual: (d * d - v).norm(),
        iterations: 0,
    }
}

/// Solves `℘′(w)² = v` for `w ∈ F̄`.
///
/// Seeds are tried in order: the supplied one, the nearest tabulated value
/// (or the pole asymptotics for large `|v|`), the midpoints of the three
/// edges, then sixteen fixed pseudo-random interior points.
pub fn invert_wp_prime_sq(v: Complex64, ctx: &CoverContext, seed: Option<Complex64>) -> Result<PhiResult> {
    if !v.is_finite() {
        return Err(Error::Domain(format!("cannot invert at non-finite value {v}")));
    }
    if v.norm() > POLE_VALUE {
        return Ok(invert_near_pole(v, ctx));
    }
    let first = if v.norm() > LARGE_VALUE {
        asymptotic_seed(v)
    } else {
        ctx.nearest_seed(v)
    };
    let tri = FundamentalTriangle::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let randoms = (0..RANDOM_SEEDS).map(move |_| {
        let (mut a, mut b) = (rng.gen::<f64>(), rng.gen::<f64>());
        if a + b > 1.0 {
            (a, b) = (1.0 - a, 1.0 - b);
        }
        OMEGA * a + OMEGA_SQ * b
    });
    let mids = [OMEGA / 2.0, OMEGA - 0.5, OMEGA_SQ / 2.0];
    let mut best = (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY, 0usize);
    let mut total = 0;
    for w0 in seed.into_iter().chain([first]).chain(mids).chain(randoms) {
        let (w, r, it) = newton_from(v, w0, ctx);
        total += it;
        if r < best.1 {
            best = (w, r, it);
        }
        if r <= ctx.newton.accept {
            break;
        }
    }
    let scale = v.norm().max(1.0);
    if !(best.1 <= ctx.newton.accept) {
        return Err(Error::NonConvergence {
            best_residual: best.1 * scale,
        });
    }
    let w = fold_into_triangle(best.0);
    debug_assert!(tri.contains(w, 1e-9));
    let d = ctx.elliptic.wp_prime(w)?;
    Ok(PhiResult {
        value: w,
        residual: (d * d - v).norm(),
        iterations: total,
    })
}

/// Radius around the corners `ω`, `ω²` where [`polish_near_corner`] runs.
const CORNER_POLISH: f64 = 0.25;

/// Re-solves near a corner of `F̄`.
///
/// `℘′²` has a triple critical point at `ω` and `ω²` (there `℘ = 0` and
/// `g₂ = 0`), so Newton on `℘′² = v` only pins `w` down to about `ε^{1/3}`
/// and may even settle at the wrong corner. Since `℘′² − P = 4℘³` on `R`,
/// with `P = −g₃`, the equation is equivalent to `℘(w) = s` for a cube root
/// `s` of `δ/4`, `δ = v − P`, and `℘` is well conditioned at both corners.
/// Of the six local solutions exactly one lies in `F̄` (each corner's 60°
/// wedge covers half of the `δ` plane). `δ` is passed separately so callers
/// can form it without cancellation.
fn polish_near_corner(w: Complex64, delta: Complex64, ctx: &CoverContext) -> Option<Complex64> {
    if (w - OMEGA).norm().min((w - OMEGA_SQ).norm()) > CORNER_POLISH {
        return None;
    }
    let ell = &ctx.elliptic;
    let tri = FundamentalTriangle::default();
    let base = (delta / 4.0).powf(1.0 / 3.0);
    let solve = |corner: Complex64, s: Complex64| -> Option<Complex64> {
        let mut w = corner + s / ell.wp_prime(corner).ok()?;
        for _ in 0..12 {
            let (x, d) = ell.wp_pair(w).ok()?;
            let step = (x - s) / d;
            if !step.is_finite() {
                return None;
            }
            w -= step;
            if step.norm() <= 1e-16 {
                break;
            }
        }
        Some(w)
    };
    let depth = |w: &Complex64| tri.barycentric(*w).into_iter().fold(f64::INFINITY, f64::min);
    [OMEGA, OMEGA_SQ]
        .into_iter()
        .flat_map(|corner| (0..3).map(move |k| (corner, base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0))))
        .filter_map(|(corner, s)| solve(corner, s))
        .max_by(|a, b| depth(a).total_cmp(&depth(b)))
}

fn in_closed_f(z: Complex64) -> bool {
    z.im > 0.0 && z.re.abs() <= 0.5 + 1e-12 && z.norm_sqr() >= 1.0 - 1e-12
}

/// `φ` on the standard fundamental domain `F`.
pub fn phi_on_f(z: Complex64, ctx: &CoverContext) -> Result<PhiResult> {
    if !in_closed_f(z) {
        return Err(Error::Domain(format!("{z} is not in the fundamental domain")));
    }
    let j = klein_j(ModularPoint::new(z)?)?;
    let v = ctx.alpha_normalized(j);
    let mut res = invert_wp_prime_sq(v, ctx, None)?;
    let delta = match ctx.normalization {
        Normalization::BoundaryMatched => -ctx.wp_prime_omega_sq * j,
        Normalization::Printed => v - ctx.wp_prime_omega_sq,
    };
    if let Some(w) = polish_near_corner(res.value, delta, ctx) {
        let d = ctx.elliptic.wp_prime(w)?;
        let r = (d * d - v).norm();
        if r <= ctx.newton.accept * v.norm().max(1.0) {
            res.value = w;
            res.residual = r;
        }
    }
    // On the boundary of F both mirror images −w̄ solve the equation; the left
    // edge and the left half of the arc go to the right half of F̄.
    let on_edge = (z.re + 0.5).abs() <= 1e-12 || (z.norm_sqr() - 1.0).abs() <= 1e-12;
    if on_edge && z.re * res.value.re > 0.0 {
        let m = -res.value.conj();
        let d = ctx.elliptic.wp_prime(m)?;
        let r = (d * d - v).norm();
        if r <= ctx.newton.accept * v.norm().max(1.0) {
            res.value = m;
            res.residual = r;
        }
    }
    Ok(res)
}

/// `φ(z) = ψ(g)⁻¹ φ_F(g z)` where `g` reduces `z` into `F`.
pub fn phi(z: Complex64, ctx: &CoverContext) -> Result<PhiResult> {
    let (g, zr) = reduce_to_f(z)?;
    let mut res = phi_on_f(zr, ctx)?;
    if !g.is_identity() {
        res.value = psi_matrix(&g)?.inverse()?.apply(res.value);
    }
    Ok(res)
}

/// `φ′(z)` by the trapezoid rule on `φ′(z) = (1/2πi)∮ φ(ζ)/(ζ−z)² dζ`.
pub fn phi_prime(z: Complex64, ctx: &CoverContext) -> Result<Complex64> {
    phi_prime_with_radius(z, ctx, STENCIL_RADIUS)
}

pub fn phi_prime_with_radius(z: Complex64, ctx: &CoverContext, radius: f64) -> Result<Complex64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("stencil radius must be positive, got {radius}")));
    }
    if !(z.im - radius > 0.0) {
        return Err(Error::Domain(format!(
            "stencil circle of radius {radius} around {z} leaves the upper half plane"
        )));
    }
    let (_, zr) = reduce_to_f(z)?;
    let i = Complex64::new(0.0, 1.0);
    let corner = [i, OMEGA, OMEGA_SQ]
        .iter()
        .map(|c| (zr - c).norm())
        .fold(f64::INFINITY, f64::min);
    if corner < CORNER_GUARD {
        return Err(Error::Domain(format!(
            "{z} is within {CORNER_GUARD} of an elliptic point"
        )));
    }
    let n = STENCIL_POINTS;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
        acc += phi(z + e * radius, ctx)?.value * e.conj();
    }
    Ok(acc / (n as f64 * radius))
}

/// `|φ(g z) − ψ(g) φ(z)|`.
pub fn equivariance_residual(g: &GammaElt, z: Complex64, ctx: &CoverContext) -> Result<f64> {
    let lhs = phi(g.act(z), ctx)?.value;
    let rhs = psi_matrix(g)?.apply(phi(z, ctx)?.value);
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::Word;
    use crate::lattice::{distance_to_excised, SQRT3};
    use std::sync::OnceLock;

    fn ctx() -> &'static CoverContext {
        static CTX: OnceLock<CoverContext> = OnceLock::new();
        CTX.get_or_init(CoverContext::new)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn alpha_examples() {
        let ctx = ctx();
        let p = ctx.wp_prime_omega_sq();
        assert_eq!(alpha(c(1.0, 0.0), ctx), c(0.0, 0.0));
        assert!((alpha(c(0.0, 0.0), ctx) + p.inv()).norm() < 1e-15);
        assert!((alpha(p + 1.0, ctx) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn wp_prime_omega_sq_is_minus_g3() {
        let ctx = ctx();
        let p = ctx.wp_prime_omega_sq();
        assert!((p + ctx.elliptic().g3()).norm() < 1e-10);
        assert!(p.im.abs() < 1e-10 && p.re > 30.0 && p.re < 31.0);
    }

    #[test]
    fn seeds_lie_in_triangle() {
        let tri = FundamentalTriangle::default();
        assert!(ctx().seeds().len() > 1500);
        for (w, v) in ctx().seeds() {
            assert!(tri.contains(*w, 0.0));
            assert!(v.is_finite());
        }
    }

    #[test]
    fn round_trip_at_centroid() {
        let ctx = ctx();
        let w0 = FundamentalTriangle::default().centroid();
        let d = ctx.elliptic().wp_prime(w0).unwrap();
        let r = invert_wp_prime_sq(d * d, ctx, None).unwrap();
        assert!((r.value - w0).norm() < 1e-9);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn zero_inverts_to_half_period() {
        let r = invert_wp_prime_sq(c(0.0, 0.0), ctx(), None).unwrap();
        assert!((r.value - c(0.0, SQRT3 / 2.0)).norm() < 1e-6, "{}", r.value);
    }

    #[test]
    fn inversion_is_continuous() {
        let ctx = ctx();
        for v in [c(3.0, 4.0), c(-20.0, 1.0), c(100.0, -50.0), c(5000.0, 10.0)] {
            let a = invert_wp_prime_sq(v, ctx, None).unwrap().value;
            let b = invert_wp_prime_sq(v + c(0.6e-4, 0.8e-4), ctx, None).unwrap().value;
            assert!((a - b).norm() < 1e-2);
        }
    }

    #[test]
    fn large_values_invert_near_the_pole() {
        let ctx = ctx();
        for v in [c(1e6, 0.0), c(-3e8, 2e8), c(0.0, 1e12)] {
            let r = invert_wp_prime_sq(v, ctx, None).unwrap();
            assert!(r.residual <= 1e-9 * v.norm());
            assert!(FundamentalTriangle::default().contains(r.value, 1e-9));
        }
    }

    #[test]
    fn phi_on_f_examples() {
        let ctx = ctx();
        let z = c(0.0, 2.0);
        let r = phi_on_f(z, ctx).unwrap();
        assert!(r.residual < 1e-9);
        assert!(FundamentalTriangle::default().contains(r.value, 1e-6));
        let j = klein_j(ModularPoint::new(z).unwrap()).unwrap();
        let d = ctx.elliptic().wp_prime(r.value).unwrap();
        let v = ctx.alpha_normalized(j);
        assert!((d * d - v).norm() < 1e-9 * v.norm().max(1.0));
        // nearby points, nearby values
        let s = phi_on_f(z + 1e-5, ctx).unwrap();
        assert!((s.value - r.value).norm() < 1e-2);
        assert!(phi_on_f(c(0.0, 0.5), ctx).is_err());
    }

    #[test]
    fn corners_and_elliptic_points() {
        let ctx = ctx();
        let rho = OMEGA_SQ;
        let w = phi_on_f(rho, ctx).unwrap().value;
        assert!((w - OMEGA).norm() < 1e-12, "φ(ω²) = {w}");
        let w = phi(OMEGA, ctx).unwrap().value;
        assert!((w - OMEGA_SQ).norm() < 1e-12, "φ(ω) = {w}");
        // just off the corner the local map is z − ρ ↦ const·(z − ρ)
        for eps in [1e-3, 1e-5, 1e-7, 1e-10] {
            let z = rho + c(eps, eps);
            let w = phi_on_f(z, ctx).unwrap().value;
            let ratio = (w - OMEGA).norm() / (z - rho).norm();
            assert!(ratio > 0.1 && ratio < 10.0, "{eps}: {ratio}");
            let z = OMEGA + c(-eps, eps);
            let w = phi_on_f(z, ctx).unwrap().value;
            let ratio = (w - OMEGA_SQ).norm() / (z - OMEGA).norm();
            assert!(ratio > 0.1 && ratio < 10.0, "mirror {eps}: {ratio}");
        }
        let w = phi_on_f(c(0.0, 1.0), ctx).unwrap().value;
        assert!((w - c(0.0, SQRT3 / 2.0)).norm() < 1e-6, "φ(i) = {w}");
    }

    #[test]
    fn cusp_goes_to_zero() {
        let w = phi(c(0.1, 6.0), ctx()).unwrap().value;
        assert!(w.norm() < 1e-2, "{w}");
    }

    #[test]
    fn boundary_edges_match_triangle_edges() {
        let ctx = ctx();
        let tri = FundamentalTriangle::default();
        for y in [1.0, 1.3, 2.0, 3.0] {
            // left edge of F lands on [0, ω]
            let w = phi_on_f(c(-0.5, y), ctx).unwrap().value;
            assert!(tri.barycentric(w)[2].abs() < 1e-7, "left edge {y}: {w}");
        }
        for t in [0.1f64, 0.3, 0.5] {
            // right half of the arc lands on the half of the top edge near ω²
            let z = c(t.sin(), t.cos());
            let w = phi_on_f(z, ctx).unwrap().value;
            assert!(tri.barycentric(w)[0].abs() < 1e-7 && w.re < 0.0, "arc {t}: {w}");
        }
    }

    #[test]
    fn t_and_s_equivariance() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let z = c(rng.gen_range(-1.5..1.5), rng.gen_range(0.3..2.5));
            let w = phi(z, ctx).unwrap().value;
            let wt = phi(z + 1.0, ctx).unwrap().value;
            assert!((wt - OMEGA * w).norm() < 1e-7);
            let ws = phi(-z.inv(), ctx).unwrap().value;
            assert!((ws - (-w + c(0.0, SQRT3))).norm() < 1e-7);
        }
    }

    #[test]
    fn equivariance_examples() {
        let ctx = ctx();
        let z = c(0.0, 2.0);
        assert_eq!(equivariance_residual(&GammaElt::IDENTITY, z, ctx).unwrap(), 0.0);
        assert!(equivariance_residual(&GammaElt::T, z, ctx).unwrap() < 1e-7);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let len = rng.gen_range(0..=8);
            let g = Word::random(&mut rng, len).to_gamma().unwrap();
            for i in 0..10 {
                for j in 0..10 {
                    let x = -0.45 + 0.1 * i as f64;
                    let y = 1.05 + 0.2 * j as f64;
                    if x * x + y * y < 1.1 {
                        continue;
                    }
                    worst = worst.max(equivariance_residual(&g, c(x, y), ctx).unwrap());
                }
            }
        }
        assert!(worst < 1e-6, "max residual {worst}");
    }

    fn seam_residual(ctx: &CoverContext, y: f64) -> f64 {
        let d = 1e-7;
        let inside = phi(c(-0.5 + d, y), ctx).unwrap().value;
        let outside = phi(c(-0.5 - d, y), ctx).unwrap().value;
        (inside - outside).norm()
    }

    #[test]
    fn seam_consistency() {
        let ctx = ctx();
        for y in [0.9, 1.2, 1.7, 2.5, 3.5] {
            assert!(seam_residual(ctx, y) < 1e-6);
            // mirrored across Re = +½
            let d = 1e-7;
            let a = phi(c(0.5 - d, y), ctx).unwrap().value;
            let b = phi(c(0.5 + d, y), ctx).unwrap().value;
            assert!((a - b).norm() < 1e-6);
        }
        for t in [0.2f64, 0.7] {
            // across the arc
            let (inside, outside) = (c(t.sin(), t.cos()) * (1.0 + 1e-7), c(t.sin(), t.cos()) * (1.0 - 1e-7));
            let a = phi(inside, ctx).unwrap().value;
            let b = phi(outside, ctx).unwrap().value;
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn printed_normalization_tears_the_seam() {
        let printed = CoverContext::with_normalization(Normalization::Printed);
        let worst = [1.2, 1.7, 2.5]
            .into_iter()
            .map(|y| seam_residual(&printed, y))
            .fold(0.0, f64::max);
        assert!(worst > 1e-2, "printed α seam jump only {worst}");
    }

    #[test]
    fn derivative_transformation_law() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let z = c(rng.gen_range(-0.4..0.4), rng.gen_range(1.2..2.0));
            let d = phi_prime(z, ctx).unwrap();
            let dt = phi_prime(z + 1.0, ctx).unwrap();
            assert!((dt - OMEGA * d).norm() < 1e-5 * d.norm());
            let len = rng.gen_range(0..=4);
            let g = Word::random(&mut rng, len).to_gamma().unwrap();
            let ell = psi_matrix(&g).unwrap().linear().to_complex();
            let j = g.automorphy(z);
            let dg = phi_prime(g.act(z), ctx).unwrap();
            assert!((dg - ell * j * j * d).norm() < 1e-4 * d.norm(), "g = {g}");
        }
    }

    #[test]
    fn derivative_stable_under_radius_halving() {
        let ctx = ctx();
        let z = c(0.2, 1.5);
        let a = phi_prime_with_radius(z, ctx, 1e-3).unwrap();
        let b = phi_prime_with_radius(z, ctx, 5e-4).unwrap();
        assert!((a - b).norm() < 1e-6 * a.norm());
        assert!(phi_prime(c(0.0, 5e-4), ctx).is_err());
        assert!(phi_prime(c(0.0, 1.0005), ctx).is_err());
    }

    #[test]
    fn injective_on_f() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sample = || loop {
            let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.87..3.0));
            if z.norm_sqr() > 1.0 {
                return z;
            }
        };
        for _ in 0..200 {
            let (a, b) = (sample(), sample());
            let (wa, wb) = (phi(a, ctx).unwrap().value, phi(b, ctx).unwrap().value);
            assert!((wa - wb).norm() > 1e-6 * (a - b).norm(), "{a} and {b}");
        }
    }

    #[test]
    fn measured_relation_with_j() {
        // (℘′∘φ)² is the α-composite of J, an affine function of J and not J itself
        let ctx = ctx();
        let p = ctx.wp_prime_omega_sq();
        for z in [c(0.1, 1.3), c(-0.3, 2.0), c(0.45, 1.0)] {
            let w = phi(z, ctx).unwrap().value;
            let d = ctx.elliptic().wp_prime(w).unwrap();
            let j = klein_j(ModularPoint::new(z).unwrap()).unwrap();
            assert!((d * d - p * (1.0 - j)).norm() < 1e-9 * (d * d).norm().max(1.0));
            assert!((d * d - j).norm() > 1.0);
        }
    }

    #[test]
    fn range_avoids_excised_lattice_away_from_cusps() {
        // Near a cusp φ tends to a point of R like |w − r| ≈ 2.47·e^{−πy/3},
        // y the reduced height, so a fixed margin only holds for bounded y.
        let ctx = ctx();
        for i in 0..50 {
            for j in 0..50 {
                let z = c(-2.0 + 4.0 * i as f64 / 49.0, 0.05 + 3.95 * j as f64 / 49.0);
                let (_, zr) = reduce_to_f(z).unwrap();
                let w = phi(z, ctx).unwrap().value;
                let margin = distance_to_excised(w);
                if zr.im <= 7.0 {
                    assert!(margin >= 1e-3, "margin {margin} at {z}");
                } else {
                    let predicted = 2.47 * (-PI * zr.im / 3.0).exp();
                    assert!((margin / predicted - 1.0).abs() < 0.05, "{z}: {margin} vs {predicted}");
                }
            }
        }
    }
}
