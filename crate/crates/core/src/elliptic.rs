//! Weierstrass `℘` and `℘′` for an arbitrary lattice, the invariants
//! `g₂, g₃`, modular `λ` and the Klein invariant `J`.
//!
//! Evaluation first changes the period basis so that `τ = ω₂/ω₁` lies in
//! the standard fundamental domain, then reduces `z` into the centred period
//! cell and sums the Lambert-type series in `q = e^{2πiτ}`, `u = e^{2πiz/ω₁}`:
//!
//! ```text
//! ℘(ζ; 1, τ) = π²/sin²(πζ) + (2πi)² [ Σₙ qⁿu/(1−qⁿu)² + qⁿ/u/(1−qⁿ/u)² − 2qⁿ/(1−qⁿ)² + 1/12 ]
//! ```
//!
//! With `Im τ ≥ √3/2` each term shrinks by at least `e^{−π√3}`, so about a
//! dozen terms reach double precision.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::reduce_to_f;
use crate::lattice::{OMEGA, OMEGA_SQ};

/// Distance from a lattice point inside which `℘` is reported as a pole.
pub const POLE_GUARD: f64 = 1e-8;

const MAX_TERMS: usize = 200;

fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// A point of the upper half plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularPoint {
    tau: Complex64,
}

impl ModularPoint {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::Domain(format!("tau must have Im > 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }
}

/// Precomputed data for one lattice `Zω₁ + Zω₂`.
#[derive(Clone, Debug)]
pub struct EllipticContext {
    period1: Complex64,
    period2: Complex64,
    /// Reduced basis: `w1` is a shortest vector and `tau = w2/w1 ∈ F`.
    w1: Complex64,
    tau: Complex64,
    q: Complex64,
    g2: Complex64,
    g3: Complex64,
    e: [Complex64; 3],
    tol: f64,
}

/// Builds the context for the lattice spanned by `period1`, `period2`.
pub fn make_context(period1: Complex64, period2: Complex64) -> Result<EllipticContext> {
    EllipticContext::new(period1, period2)
}

impl EllipticContext {
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(period1: Complex64, period2: Complex64) -> Result<Self> {
        Self::with_tolerance(period1, period2, Self::DEFAULT_TOL)
    }

    pub fn with_tolerance(period1: Complex64, period2: Complex64, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        if period1.norm() == 0.0 || !period1.is_finite() || !period2.is_finite() {
            return Err(Error::DegeneratePeriods(0.0));
        }
        let ratio = period2 / period1;
        // relative threshold: a ratio this close to the real line has no usable cell
        if !(ratio.im > 1e-12) {
            return Err(Error::DegeneratePeriods(ratio.im));
        }
        let (g, tau) = reduce_to_f(ratio)?;
        let [[a, b], [c, d]] = g.entries().map(|r| r.map(|x| x as f64));
        let w2 = period2 * a + period1 * b;
        let w1 = period2 * c + period1 * d;
        let q = (two_pi_i() * tau).exp();
        let mut ctx = Self {
            period1,
            period2,
            w1,
            tau: w2 / w1,
            q,
            g2: Complex64::new(0.0, 0.0),
            g3: Complex64::new(0.0, 0.0),
            e: [Complex64::new(0.0, 0.0); 3],
            tol,
        };
        debug_assert!((ctx.tau - tau).norm() < 1e-9 * tau.norm());
        let (e4, e6) = ctx.eisenstein_e4_e6();
        ctx.g2 = e4 * (4.0 * PI.powi(4) / 3.0) / w1.powi(4);
        ctx.g3 = e6 * (8.0 * PI.powi(6) / 27.0) / w1.powi(6);
        ctx.e = [
            ctx.wp(period1 / 2.0)?,
            ctx.wp(period2 / 2.0)?,
            ctx.wp((period1 + period2) / 2.0)?,
        ];
        Ok(ctx)
    }

    /// The lattice `R = Z(ω+1) ⊕ Z(ω²−1)`.
    pub fn standard_r() -> Self {
        Self::new(OMEGA + 1.0, OMEGA_SQ - 1.0).expect("R is a nondegenerate lattice")
    }

    pub fn period1(&self) -> Complex64 {
        self.period1
    }

    pub fn period2(&self) -> Complex64 {
        self.period2
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    /// `[e₁, e₂, e₃]` with `e_k = ℘(ω_k/2)` and `ω₃ = ω₁ + ω₂`.
    pub fn half_period_values(&self) -> [Complex64; 3] {
        self.e
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Length of a shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.w1.norm()
    }

    /// Reduced modulus `τ ∈ F` of the lattice.
    pub fn reduced_tau(&self) -> Complex64 {
        self.tau
    }

    fn eisenstein_e4_e6(&self) -> (Complex64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        let (mut s3, mut s5) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut qn = one;
        for n in 1..=MAX_TERMS {
            qn *= self.q;
            let lam = qn / (one - qn);
            let nf = n as f64;
            s3 += lam * nf.powi(3);
            s5 += lam * nf.powi(5);
            if qn.norm() * nf.powi(5) < 1e-18 {
                break;
            }
        }
        (one + s3 * 240.0, one - s5 * 504.0)
    }

    /// `z/w1` as `x + yτ` with real `x, y`.
    fn lattice_coords(&self, zeta: Complex64) -> (f64, f64) {
        let y = zeta.im / self.tau.im;
        (zeta.re - y * self.tau.re, y)
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let zeta = z / self.w1;
        let (x, y) = self.lattice_coords(zeta);
        let (x0, y0) = (x.floor(), y.floor());
        let mut best = f64::INFINITY;
        for dy in -1..=2 {
            for dx in -1..=2 {
                let p = Complex64::new(x0 + dx as f64, 0.0) + self.tau * (y0 + dy as f64);
                best = best.min((zeta - p).norm());
            }
        }
        best * self.w1.norm()
    }

    /// `z/w1` shifted by a lattice vector into the cell centred at 0.
    fn centred(&self, z: Complex64) -> Complex64 {
        let mut zeta = z / self.w1;
        let ny = (zeta.im / self.tau.im).round();
        zeta -= self.tau * ny;
        zeta.re -= zeta.re.round();
        zeta
    }

    fn check_pole(&self, z: Complex64) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        let d = self.distance_to_lattice(z);
        if d < POLE_GUARD {
            return Err(Error::Pole { distance: d });
        }
        Ok(())
    }

    /// `(℘(z), ℘′(z))` in one pass.
    pub fn wp_pair(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_pole(z)?;
        let zeta = self.centred(z);
        let one = Complex64::new(1.0, 0.0);
        let u = (two_pi_i() * zeta).exp();
        let ui = u.inv();
        let (s, c) = ((zeta * PI).sin(), (zeta * PI).cos());
        let s2 = s * s;
        let lead = Complex64::new(PI * PI, 0.0) / s2;
        let lead_p = -c * (2.0 * PI.powi(3)) / (s2 * s);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_p = Complex64::new(0.0, 0.0);
        let mut qn = one;
        let cutoff = (self.tol * 1e-6).min(1e-17);
        let mut converged = false;
        for _ in 1..=MAX_TERMS {
            qn *= self.q;
            let x = qn * u;
            let y = qn * ui;
            let (dx, dy, dq) = (one - x, one - y, one - qn);
            acc += x / (dx * dx) + y / (dy * dy) - qn * 2.0 / (dq * dq);
            acc_p += x * (one + x) / (dx * dx * dx) - y * (one + y) / (dy * dy * dy);
            if x.norm().max(y.norm()) < cutoff {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence("q-series for wp did not converge".into()));
        }
        let tpi = two_pi_i();
        let wp = lead + tpi * tpi * (acc + one / 12.0);
        let wpp = lead_p + tpi * tpi * tpi * acc_p;
        let w1 = self.w1;
        Ok((wp / (w1 * w1), wpp / (w1 * w1 * w1)))
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.wp_pair(z).map(|p| p.0)
    }

    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64> {
        self.wp_pair(z).map(|p| p.1)
    }

    /// `℘″ = 6℘² − g₂/2`.
    pub fn wp_double(&self, z: Complex64) -> Result<Complex64> {
        let p = self.wp(z)?;
        Ok(p * p * 6.0 - self.g2 / 2.0)
    }

    /// `℘′² − (4℘³ − g₂℘ − g₃)`.
    pub fn ode_residual(&self, z: Complex64) -> Result<Complex64> {
        let (p, dp) = self.wp_pair(z)?;
        Ok(dp * dp - (p * p * p * 4.0 - self.g2 * p - self.g3))
    }
}

/// `1/z² + Σ [1/(z−w)² − 1/w²]` over `w = mω₁ + nω₂`,
/// `0 < max(|m|, |n|) ≤ cutoff`. Slow; meant as an independent check.
pub fn wp_direct_oracle(period1: Complex64, period2: Complex64, z: Complex64, cutoff: u32) -> Complex64 {
    let k = cutoff as i64;
    let mut sum = z.powi(-2);
    for m in -k..=k {
        for n in -k..=k {
            if m == 0 && n == 0 {
                continue;
            }
            let w = period1 * m as f64 + period2 * n as f64;
            sum += (z - w).powi(-2) - w.powi(-2);
        }
    }
    sum
}

/// `λ(τ) = (℘((τ+1)/2) − ℘(τ/2)) / (℘(1/2) − ℘(τ/2))` for the periods
/// `{1, τ}`.
pub fn modular_lambda(tau: ModularPoint) -> Result<Complex64> {
    let ctx = EllipticContext::new(Complex64::new(1.0, 0.0), tau.tau())?;
    let [e1, e2, e3] = ctx.half_period_values();
    let den = e1 - e2;
    if den.norm() < 1e-14 {
        return Err(Error::Degenerate(den.norm()));
    }
    Ok((e3 - e2) / den)
}

/// `θ₂(τ)⁴/θ₃(τ)⁴` with nome `e^{iπτ}`. Accurate for `τ` in or near `F`,
/// where `|e^{iπτ}| ≤ e^{−π√3/2}`.
pub(crate) fn lambda_theta(tau: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let i_pi_tau = Complex64::new(0.0, PI) * tau;
    // θ₂ = 2 e^{iπτ/4} Σ_{n≥0} e^{iπτ n(n+1)},  θ₃ = 1 + 2 Σ_{n≥1} e^{iπτ n²}
    let mut t2 = Complex64::new(0.0, 0.0);
    let mut t3 = one;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let a = (i_pi_tau * (nf * (nf + 1.0))).exp();
        t2 += a;
        if n > 0 {
            t3 += (i_pi_tau * (nf * nf)).exp() * 2.0;
        }
        if a.norm() < 1e-18 {
            break;
        }
    }
    let t2 = t2 * 2.0 * (i_pi_tau / 4.0).exp();
    (t2 / t3).powi(4)
}

/// Denominator used in `J = (4/27)(1 − λ + λ²)³ / denominator`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum JDenominator {
    /// `λ²(1−λ)²`.
    #[default]
    Classical,
    /// `λ²(1−λ²)`, as written in some sources; not `Γ`-invariant.
    AsPrinted,
}

/// `J` as a rational function of `λ`.
pub fn j_from_lambda(lambda: Complex64, denom: JDenominator) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let l2 = lambda * lambda;
    let den = match denom {
        JDenominator::Classical => l2 * (one - lambda) * (one - lambda),
        JDenominator::AsPrinted => l2 * (one - l2),
    };
    if den.norm() == 0.0 || !den.is_finite() {
        return Err(Error::Degenerate(den.norm()));
    }
    let num = (one - lambda + l2).powi(3) * (4.0 / 27.0);
    let j = num / den;
    if !j.is_finite() {
        return Err(Error::Degenerate(den.norm()));
    }
    Ok(j)
}

/// Klein's `J`, normalised by `J(ω) = 0`, `J(i) = 1`.
///
/// `τ` is first reduced into `F` (where `J` takes the same value) and `λ` is
/// taken from the theta quotient there, which keeps full relative accuracy
/// high up the cusp.
pub fn klein_j(tau: ModularPoint) -> Result<Complex64> {
    let (_, t) = reduce_to_f(tau.tau())?;
    j_from_lambda(lambda_theta(t), JDenominator::Classical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::Word;
    use crate::lattice::SQRT3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn contexts() -> Vec<EllipticContext> {
        vec![
            EllipticContext::standard_r(),
            make_context(c(1.0, 0.0), c(0.0, 1.0)).unwrap(),
            make_context(c(1.0, 0.0), c(0.0, 2.0)).unwrap(),
            make_context(c(0.7, -0.2), c(0.4, 1.3)).unwrap(),
            make_context(c(1.0, 0.0), c(5.3, 0.05)).unwrap(),
        ]
    }

    /// Point of the period parallelogram with coordinates `(s, t) ∈ [0,1)²`.
    fn cell_point(ctx: &EllipticContext, s: f64, t: f64) -> Complex64 {
        ctx.period1() * s + ctx.period2() * t
    }

    #[test]
    fn invariants_of_symmetric_lattices() {
        let r = EllipticContext::standard_r();
        assert!(r.g2().norm() < 1e-10, "g2(R) = {}", r.g2());
        let sq = make_context(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!(sq.g3().norm() < 1e-10, "g3(square) = {}", sq.g3());
    }

    #[test]
    fn degenerate_periods_rejected() {
        assert!(matches!(
            make_context(c(1.0, 0.0), c(2.0, 0.0)),
            Err(Error::DegeneratePeriods(_))
        ));
        assert!(make_context(c(1.0, 0.0), c(0.0, -1.0)).is_err());
        assert!(make_context(c(0.0, 0.0), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn invariants_match_eisenstein_sums() {
        // G_k = Σ' w^{−k} summed over growing discs; g₂ = 60G₄, g₃ = 140G₆
        let (p1, p2) = (c(1.0, 0.0), c(0.0, 2.0));
        let ctx = make_context(p1, p2).unwrap();
        let radius = 200.0f64;
        let (mut g4, mut g6) = (c(0.0, 0.0), c(0.0, 0.0));
        let k = radius as i64;
        for m in -k..=k {
            for n in -k..=k {
                let w = p1 * m as f64 + p2 * n as f64;
                if (m, n) == (0, 0) || w.norm() > radius {
                    continue;
                }
                g4 += w.powi(-4);
                g6 += w.powi(-6);
            }
        }
        let (g2, g3) = (g4 * 60.0, g6 * 140.0);
        assert!((g2 - ctx.g2()).norm() < 1e-5 * ctx.g2().norm(), "{g2} vs {}", ctx.g2());
        assert!((g3 - ctx.g3()).norm() < 1e-8 * ctx.g3().norm(), "{g3} vs {}", ctx.g3());
    }

    #[test]
    fn half_period_values_sum_to_zero() {
        for ctx in contexts() {
            let [e1, e2, e3] = ctx.half_period_values();
            let scale = e1.norm().max(e2.norm()).max(1.0);
            assert!((e1 + e2 + e3).norm() < 1e-10 * scale);
            // and they are the roots of 4t³ − g₂t − g₃
            for e in [e1, e2, e3] {
                let f = e * e * e * 4.0 - ctx.g2() * e - ctx.g3();
                assert!(f.norm() < 1e-9 * scale.powi(3));
            }
        }
    }

    #[test]
    fn wp_prime_vanishes_at_half_periods() {
        for ctx in contexts() {
            let (p1, p2) = (ctx.period1(), ctx.period2());
            for h in [p1 / 2.0, p2 / 2.0, (p1 + p2) / 2.0] {
                let d = ctx.wp_prime(h).unwrap();
                assert!(d.norm() < 1e-9 * ctx.shortest_vector().powi(-3).max(1.0), "{d}");
            }
        }
    }

    #[test]
    fn differential_equation_on_grid() {
        for ctx in contexts() {
            let scale = ctx.shortest_vector();
            for i in 0..10 {
                for j in 0..10 {
                    let z = cell_point(&ctx, 0.05 + 0.1 * i as f64, 0.05 + 0.1 * j as f64);
                    if ctx.distance_to_lattice(z) < 0.25 * scale {
                        continue;
                    }
                    let r = ctx.ode_residual(z).unwrap();
                    // absolute bound for unit-scale lattices, relative otherwise
                    let dp = ctx.wp_prime(z).unwrap().norm_sqr();
                    let bound = if scale > 0.5 { 1e-8 } else { 1e-13 * dp };
                    assert!(r.norm() < bound, "residual {r} at {z}");
                }
            }
        }
    }

    #[test]
    fn pole_guard() {
        let ctx = EllipticContext::standard_r();
        let w = ctx.period1() * 2.0 - ctx.period2();
        assert!(matches!(ctx.wp(w + 1e-10), Err(Error::Pole { .. })));
        assert!(ctx.wp(w + 1e-3).is_ok());
    }

    #[test]
    fn fast_matches_direct_sum() {
        let ctx = EllipticContext::standard_r();
        let z = c(0.3, 0.1);
        let fast = ctx.wp(z).unwrap();
        let slow = wp_direct_oracle(ctx.period1(), ctx.period2(), z, 150);
        assert!((fast - slow).norm() < 1e-3, "{fast} vs {slow}");
    }

    #[test]
    fn oracle_basic_properties() {
        let (p1, p2) = (c(1.0, 0.0), c(0.2, 1.1));
        let z = c(0.31, 0.17);
        assert_eq!(wp_direct_oracle(p1, p2, z, 0), z.powi(-2));
        let a = wp_direct_oracle(p1, p2, z, 20);
        let b = wp_direct_oracle(p1, p2, -z, 20);
        assert!((a - b).norm() < 1e-12 * a.norm());
        let ctx = make_context(p1, p2).unwrap();
        let exact = ctx.wp(z).unwrap();
        let mut prev = f64::INFINITY;
        for k in [10, 20, 40, 80] {
            let err = (wp_direct_oracle(p1, p2, z, k) - exact).norm();
            assert!(err < prev, "cutoff {k}: {err} !< {prev}");
            prev = err;
        }
    }

    #[test]
    fn lambda_at_i() {
        let l = modular_lambda(ModularPoint::new(c(0.0, 1.0)).unwrap()).unwrap();
        assert!((l - 0.5).norm() < 1e-9, "{l}");
        // the same quotient from the slow lattice sum
        let (one, i) = (c(1.0, 0.0), c(0.0, 1.0));
        let wp = |z| wp_direct_oracle(one, i, z, 300);
        let slow = (wp((i + 1.0) / 2.0) - wp(i / 2.0)) / (wp(one / 2.0) - wp(i / 2.0));
        assert!((slow - 0.5).norm() < 1e-4, "{slow}");
    }

    #[test]
    fn lambda_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let tau = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..3.0));
            let a = modular_lambda(ModularPoint::new(tau).unwrap()).unwrap();
            let b = lambda_theta(tau);
            assert!((a - b).norm() < 1e-10, "{a} vs {b} at {tau}");
        }
    }

    #[test]
    fn lambda_functional_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let tau = c(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
            let l = |t| modular_lambda(ModularPoint::new(t).unwrap()).unwrap();
            let base = l(tau);
            assert!((l(tau + 2.0) - base).norm() < 1e-8);
            assert!((l(-tau.inv()) - (1.0 - base)).norm() < 1e-8);
        }
    }

    #[test]
    fn j_special_values() {
        let j = |t| klein_j(ModularPoint::new(t).unwrap()).unwrap();
        assert!((j(c(0.0, 1.0)) - 1.0).norm() < 1e-12);
        assert!(j(OMEGA).norm() < 1e-8);
        assert!(j(OMEGA_SQ).norm() < 1e-8);
        assert!((j_from_lambda(c(0.5, 0.0), JDenominator::Classical).unwrap() - 1.0).norm() < 1e-15);
        // J(2i) = (11/6)³ · 1728 / 1728 = 287496/1728 / ... classical value 66³/1728
        assert!((j(c(0.0, 2.0)) - 66.0f64.powi(3) / 1728.0).norm() < 1e-8 * 171.0);
    }

    #[test]
    fn j_invariant_under_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let len = rng.gen_range(0..=6);
            let g = Word::random(&mut rng, len).to_gamma().unwrap();
            let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..2.0));
            let a = klein_j(ModularPoint::new(z).unwrap()).unwrap();
            let b = klein_j(ModularPoint::new(g.act(z)).unwrap()).unwrap();
            assert!((a - b).norm() < 1e-7 * a.norm().max(1.0));
        }
    }

    #[test]
    fn printed_denominator_breaks_invariance() {
        let tau = c(0.1, 1.2);
        let l0 = modular_lambda(ModularPoint::new(tau).unwrap()).unwrap();
        let l1 = modular_lambda(ModularPoint::new(tau + 1.0).unwrap()).unwrap();
        let cl0 = j_from_lambda(l0, JDenominator::Classical).unwrap();
        let cl1 = j_from_lambda(l1, JDenominator::Classical).unwrap();
        assert!((cl0 - cl1).norm() < 1e-8 * cl0.norm());
        let p0 = j_from_lambda(l0, JDenominator::AsPrinted).unwrap();
        let p1 = j_from_lambda(l1, JDenominator::AsPrinted).unwrap();
        assert!((p0 - p1).norm() > 1e-2 * p0.norm());
    }

    #[test]
    fn modular_point_rejects_lower_half_plane() {
        assert!(ModularPoint::new(c(0.0, 0.0)).is_err());
        assert!(ModularPoint::new(c(1.0, -1.0)).is_err());
    }

    #[test]
    fn wp_of_r_at_omega() {
        // on the equianharmonic lattice ℘ vanishes at ω and ℘′ at ω − ½
        let r = EllipticContext::standard_r();
        assert!(r.wp(OMEGA).unwrap().norm() < 1e-10);
        let d = r.wp_prime(OMEGA).unwrap();
        assert!((d * d + r.g3()).norm() < 1e-9);
        assert!(r.wp_prime(c(0.0, SQRT3 / 2.0)).unwrap().norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn parity_and_periodicity(s in 0.02f64..0.98, t in 0.02f64..0.98, which in 0usize..5) {
            let ctx = &contexts()[which];
            let z = cell_point(ctx, s, t);
            prop_assume!(ctx.distance_to_lattice(z) > 0.05 * ctx.shortest_vector());
            let (p, d) = ctx.wp_pair(z).unwrap();
            let scale = p.norm().max(1.0);
            let dscale = d.norm().max(1.0);
            let (pm, dm) = ctx.wp_pair(-z).unwrap();
            prop_assert!((pm - p).norm() <= 1e-10 * scale);
            prop_assert!((dm + d).norm() <= 1e-10 * dscale);
            // z + w carries a rounding error of order ε|z + w|, amplified by
            // the derivative of whatever is being compared
            let dd = ctx.wp_double(z).unwrap().norm();
            for w in [ctx.period1(), ctx.period2(), ctx.period1() - ctx.period2() * 3.0] {
                let (pw, dw) = ctx.wp_pair(z + w).unwrap();
                let arg = 1e-13 * (z + w).norm();
                prop_assert!((pw - p).norm() <= 1e-10 * scale + d.norm() * arg);
                prop_assert!((dw - d).norm() <= 1e-10 * dscale + dd * arg);
            }
        }
    }
}
