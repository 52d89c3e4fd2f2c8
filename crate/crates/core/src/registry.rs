//! Named evaluators of complex functions, built on demand from options.
//!
//! Every function the command line can evaluate or rasterise sits behind the
//! [`Evaluator`] trait. A [`FunctionRegistry`] maps names to factories so the
//! expensive contexts are only built for the function actually requested.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::covering::{self, CoverContext, NewtonParams, Normalization};
use crate::elliptic::{self, EllipticContext, ModularPoint};
use crate::error::{Error, Result};
use crate::lattice::{OMEGA, OMEGA_SQ};
use crate::sl3::{self, CartanElt, ShiftLabeling};

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` and `-i` with dot-decimal
/// components (exponents allowed), plus the names `omega`/`ω` and
/// `omega2`/`ω²` for `e^{iπ/3}` and `e^{2iπ/3}`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match t.as_str() {
        "omega" | "ω" => return Ok(OMEGA),
        "omega2" | "ω²" => return Ok(OMEGA_SQ),
        _ => {}
    }
    let bad = || Error::Parse(format!("'{s}' is not a complex literal like 1.5-0.25i"));
    let num = |x: &str| -> Result<f64> {
        // reject inf/nan spellings that f64::from_str would accept
        if x.is_empty() || !x.chars().all(|c| c.is_ascii_digit() || "+-.eE".contains(c)) {
            return Err(bad());
        }
        x.parse::<f64>().map_err(|_| bad())
    };
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    Ok(Complex64::new(re, im))
}

/// `a+bi` with 15 significant digits per component; [`parse_complex`]
/// reads it back.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.14e}{sign}{:.14e}i", z.re, z.im.abs())
}

/// Knobs shared by all evaluators; `None` means the evaluator's default.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalOptions {
    pub tol: Option<f64>,
    pub cutoff: Option<u32>,
    pub normalization: Normalization,
    pub labeling: ShiftLabeling,
}

impl EvalOptions {
    fn cutoff_or(&self, default: u32) -> u32 {
        self.cutoff.unwrap_or(default)
    }
}

/// Where an evaluator is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// The whole plane minus poles.
    Plane,
    /// `Im z > 0`.
    UpperHalfPlane,
}

/// A value and, where the evaluator has one, a self-check residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOutput {
    pub value: Complex64,
    pub residual: Option<f64>,
}

impl EvalOutput {
    fn plain(value: Complex64) -> Self {
        Self { value, residual: None }
    }
}

pub trait Evaluator: Send + Sync {
    fn name(&self) -> &'static str;
    fn domain(&self) -> Domain;
    fn eval(&self, z: Complex64) -> Result<EvalOutput>;

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("{} needs a finite point", self.name())));
        }
        if self.domain() == Domain::UpperHalfPlane && !(z.im > 0.0) {
            return Err(Error::Domain(format!("{} is defined for Im z > 0, got {z}", self.name())));
        }
        Ok(())
    }
}

type Factory = fn(&EvalOptions) -> Result<Box<dyn Evaluator>>;

struct Entry {
    summary: &'static str,
    factory: Factory,
}

/// Name → evaluator factory.
pub struct FunctionRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl Default for FunctionRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl FunctionRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("wp", "Weierstrass p for the lattice R; residual is the ODE defect", |o| {
            Ok(Box::new(Wp::new(o, false)?))
        });
        r.register("wp-prime", "derivative of Weierstrass p for R", |o| Ok(Box::new(Wp::new(o, true)?)));
        r.register("wp-direct", "truncated double lattice sum for R (cutoff, default 150)", |o| {
            Ok(Box::new(WpDirect { cutoff: o.cutoff_or(150) }))
        });
        r.register("lambda", "modular lambda", |_| Ok(Box::new(Lambda)));
        r.register("j", "Klein J, normalised so J(i) = 1", |_| Ok(Box::new(KleinJ)));
        r.register("phi", "the covering map; residual is the Newton residual", |o| {
            Ok(Box::new(Phi::new(o, false)))
        });
        r.register("phi-prime", "derivative of the covering map", |o| Ok(Box::new(Phi::new(o, true))));
        r.register("wp-trace", "weight sum over W for the standard Cartan element (cutoff, default 300)", |o| {
            Ok(Box::new(WpTrace {
                h: CartanElt::standard(),
                cutoff: o.cutoff_or(300),
            }))
        });
        r.register("wp-sym", "primal/dual average over Sym^{3n} (cutoff n, default 50)", |o| {
            Ok(Box::new(WpSym {
                h: CartanElt::standard(),
                n: o.cutoff_or(50),
            }))
        });
        r.register("lambda-rep", "lambda from paired weight sums (cutoff, default 500)", |o| {
            Ok(Box::new(LambdaRep {
                cutoff: o.cutoff_or(500),
                labeling: o.labeling,
            }))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, summary: &'static str, factory: Factory) {
        self.entries.insert(name, Entry { summary, factory });
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn summary(&self, name: &str) -> Option<&'static str> {
        self.entries.get(name).map(|e| e.summary)
    }

    pub fn build(&self, name: &str, opts: &EvalOptions) -> Result<Box<dyn Evaluator>> {
        let entry = self.entries.get(name).ok_or_else(|| Error::Unknown {
            kind: "function",
            name: name.to_string(),
        })?;
        if let Some(t) = opts.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("tolerance must be positive, got {t}")));
            }
        }
        (entry.factory)(opts)
    }
}

struct Wp {
    ctx: EllipticContext,
    derivative: bool,
}

impl Wp {
    fn new(o: &EvalOptions, derivative: bool) -> Result<Self> {
        let tol = o.tol.unwrap_or(EllipticContext::DEFAULT_TOL);
        let ctx = EllipticContext::with_tolerance(OMEGA + 1.0, OMEGA_SQ - 1.0, tol)?;
        Ok(Self { ctx, derivative })
    }
}

impl Evaluator for Wp {
    fn name(&self) -> &'static str {
        if self.derivative {
            "wp-prime"
        } else {
            "wp"
        }
    }

    fn domain(&self) -> Domain {
        Domain::Plane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        let (p, d) = self.ctx.wp_pair(z)?;
        let residual = self.ctx.ode_residual(z)?.norm();
        Ok(EvalOutput {
            value: if self.derivative { d } else { p },
            residual: Some(residual),
        })
    }
}

struct WpDirect {
    cutoff: u32,
}

impl Evaluator for WpDirect {
    fn name(&self) -> &'static str {
        "wp-direct"
    }

    fn domain(&self) -> Domain {
        Domain::Plane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        if crate::lattice::distance_to_excised(z) < elliptic::POLE_GUARD {
            return Err(Error::Pole {
                distance: crate::lattice::distance_to_excised(z),
            });
        }
        Ok(EvalOutput::plain(elliptic::wp_direct_oracle(
            OMEGA + 1.0,
            OMEGA_SQ - 1.0,
            z,
            self.cutoff,
        )))
    }
}

struct Lambda;

impl Evaluator for Lambda {
    fn name(&self) -> &'static str {
        "lambda"
    }

    fn domain(&self) -> Domain {
        Domain::UpperHalfPlane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        Ok(EvalOutput::plain(elliptic::modular_lambda(ModularPoint::new(z)?)?))
    }
}

struct KleinJ;

impl Evaluator for KleinJ {
    fn name(&self) -> &'static str {
        "j"
    }

    fn domain(&self) -> Domain {
        Domain::UpperHalfPlane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        Ok(EvalOutput::plain(elliptic::klein_j(ModularPoint::new(z)?)?))
    }
}

struct Phi {
    ctx: Arc<CoverContext>,
    derivative: bool,
}

impl Phi {
    fn new(o: &EvalOptions, derivative: bool) -> Self {
        let mut ctx = CoverContext::with_normalization(o.normalization);
        if let Some(t) = o.tol {
            let newton = NewtonParams {
                accept: t,
                residual_target: t.min(NewtonParams::default().residual_target),
                ..NewtonParams::default()
            };
            ctx = ctx.with_newton(newton);
        }
        Self {
            ctx: Arc::new(ctx),
            derivative,
        }
    }
}

impl Evaluator for Phi {
    fn name(&self) -> &'static str {
        if self.derivative {
            "phi-prime"
        } else {
            "phi"
        }
    }

    fn domain(&self) -> Domain {
        Domain::UpperHalfPlane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        if self.derivative {
            return Ok(EvalOutput::plain(covering::phi_prime(z, &self.ctx)?));
        }
        let r = covering::phi(z, &self.ctx)?;
        Ok(EvalOutput {
            value: r.value,
            residual: Some(r.residual),
        })
    }
}

struct WpTrace {
    h: CartanElt,
    cutoff: u32,
}

impl Evaluator for WpTrace {
    fn name(&self) -> &'static str {
        "wp-trace"
    }

    fn domain(&self) -> Domain {
        Domain::Plane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        Ok(EvalOutput::plain(sl3::wp_trace_sum(&self.h, z, self.cutoff)?))
    }
}

struct WpSym {
    h: CartanElt,
    n: u32,
}

impl Evaluator for WpSym {
    fn name(&self) -> &'static str {
        "wp-sym"
    }

    fn domain(&self) -> Domain {
        Domain::Plane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        let a = sl3::sym_trace_partial(self.n, &self.h, z, false)?;
        let b = sl3::sym_trace_partial(self.n, &self.h, z, true)?;
        Ok(EvalOutput::plain((a + b) / 2.0))
    }
}

struct LambdaRep {
    cutoff: u32,
    labeling: ShiftLabeling,
}

impl Evaluator for LambdaRep {
    fn name(&self) -> &'static str {
        "lambda-rep"
    }

    fn domain(&self) -> Domain {
        Domain::UpperHalfPlane
    }

    fn eval(&self, z: Complex64) -> Result<EvalOutput> {
        self.check_domain(z)?;
        Ok(EvalOutput::plain(sl3::lambda_rep_with(z, self.cutoff, self.labeling)?))
    }
}
