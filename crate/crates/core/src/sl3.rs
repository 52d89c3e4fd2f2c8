//! Weight-lattice sums for `sl₃` that reproduce `℘` and modular `λ`.
//!
//! A diagonal `H = diag(h₁, h₂, h₃)` built from a pair of periods turns the
//! root lattice `Zα₁ + Zα₂` into the period lattice. Inverse-square trace
//! sums over the weights of the Laurent-monomial representation `W` then give
//! `℘`, and the same sums over the half-shifted variants `W(1..3)` give the
//! half-period values whose ratio is `λ`.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Distance below which a weight counts as hitting the evaluation point.
pub const POLE_GUARD: f64 = 1e-8;

/// Diagonal trace-zero element `diag(h₁, h₂, h₃)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanElt {
    pub h: [Complex64; 3],
}

impl CartanElt {
    pub fn new(h1: Complex64, h2: Complex64, h3: Complex64) -> Result<Self> {
        let scale = h1.norm().max(h2.norm()).max(h3.norm()).max(1.0);
        let tr = (h1 + h2 + h3).norm();
        if tr > 1e-12 * scale {
            return Err(Error::Domain(format!("Cartan element has trace {tr}")));
        }
        Ok(Self { h: [h1, h2, h3] })
    }

    /// `H` for the lattice `R = Z(ω+1) ⊕ Z(ω²−1)`, i.e. `diag(1, ω², ω⁴)`.
    pub fn standard() -> Self {
        use crate::lattice::{OMEGA, OMEGA_SQ};
        cartan_from_periods(OMEGA + 1.0, OMEGA_SQ - 1.0).expect("nonzero periods")
    }

    pub fn trace(&self) -> Complex64 {
        self.h.iter().sum()
    }

    /// `α₁(H) = h₁ − h₂`.
    pub fn alpha1(&self) -> Complex64 {
        self.h[0] - self.h[1]
    }

    /// `α₂(H) = h₂ − h₃`.
    pub fn alpha2(&self) -> Complex64 {
        self.h[1] - self.h[2]
    }

    /// `n₁α₁(H) + n₂α₂(H)`.
    pub fn root(&self, n1: i64, n2: i64) -> Complex64 {
        self.alpha1() * n1 as f64 + self.alpha2() * n2 as f64
    }

    pub fn half_shift(&self, s: HalfShift) -> Complex64 {
        match s {
            HalfShift::Alpha1 => self.alpha1() / 2.0,
            HalfShift::Alpha2 => self.alpha2() / 2.0,
            HalfShift::Third => (self.h[2] - self.h[0]) / 2.0,
        }
    }
}

/// `H(ω₁, ω₂)` with `h = (⅓ω₁ − ⅓ω₂, ⅓ω₁ + ⅔ω₂, −⅔ω₁ − ⅓ω₂)`, so that
/// `α₁(H) = −ω₂` and `α₂(H) = ω₁ + ω₂`.
pub fn cartan_from_periods(w1: Complex64, w2: Complex64) -> Result<CartanElt> {
    if w1.norm() == 0.0 && w2.norm() == 0.0 {
        return Err(Error::Domain("periods are both zero".into()));
    }
    let h1 = (w1 - w2) / 3.0;
    let h2 = (w1 + w2 * 2.0) / 3.0;
    let h3 = -(w1 * 2.0 + w2) / 3.0;
    CartanElt::new(h1, h2, h3)
}

/// `(α₁(H), α₂(H))`.
pub fn root_values(h: &CartanElt) -> (Complex64, Complex64) {
    (h.alpha1(), h.alpha2())
}

/// The three half-period shifts of the root lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HalfShift {
    /// `½α₁`
    Alpha1,
    /// `½α₂`
    Alpha2,
    /// `½(h₃ − h₁) = −½(α₁ + α₂)`
    Third,
}

/// Which family a weight belongs to: `W` or one of `W(1)`, `W(2)`, `W(3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShiftTag {
    None,
    W1,
    W2,
    W3,
}

impl fmt::Display for ShiftTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShiftTag::None => "W",
            ShiftTag::W1 => "W(1)",
            ShiftTag::W2 => "W(2)",
            ShiftTag::W3 => "W(3)",
        })
    }
}

/// Assignment of half shifts to the tags `W1..W3`.
///
/// With `H = H(1, τ)` the shifts evaluate to `½α₁ = −τ/2`, `½α₂ = (1+τ)/2`
/// and `½(h₃−h₁) = −½`, so the ratio
/// `(℘(s₃) − ℘(s₂))/(℘(s₁) − ℘(s₂))` is `λ`, `1/λ` or `1/(1−λ)`
/// depending on the labeling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ShiftLabeling {
    /// `W1 ↔ ½(h₃−h₁)`, `W2 ↔ ½α₁`, `W3 ↔ ½α₂`; the ratio is `λ`.
    #[default]
    OmitNext,
    /// `W(i)` is the span where the coefficient of `Lᵢ` stays integral:
    /// `W1 ↔ ½α₂`, `W2 ↔ ½(h₃−h₁)`, `W3 ↔ ½α₁`; the ratio is `1/(1−λ)`.
    OmitSame,
    /// `W1 ↔ ½α₂`, `W2 ↔ ½α₁`, `W3 ↔ ½(h₃−h₁)`; the ratio is `1/λ`.
    OmitReflected,
}

impl ShiftLabeling {
    pub const ALL: [ShiftLabeling; 3] = [
        ShiftLabeling::OmitNext,
        ShiftLabeling::OmitSame,
        ShiftLabeling::OmitReflected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShiftLabeling::OmitNext => "omit-next",
            ShiftLabeling::OmitSame => "omit-same",
            ShiftLabeling::OmitReflected => "omit-reflected",
        }
    }

    pub fn shift(self, tag: ShiftTag) -> Option<HalfShift> {
        use HalfShift::*;
        use ShiftTag::*;
        let [s1, s2, s3] = match self {
            ShiftLabeling::OmitNext => [Third, Alpha1, Alpha2],
            ShiftLabeling::OmitSame => [Alpha2, Third, Alpha1],
            ShiftLabeling::OmitReflected => [Alpha2, Alpha1, Third],
        };
        match tag {
            None => Option::None,
            W1 => Some(s1),
            W2 => Some(s2),
            W3 => Some(s3),
        }
    }

    pub fn tag_for(self, s: HalfShift) -> ShiftTag {
        [ShiftTag::W1, ShiftTag::W2, ShiftTag::W3]
            .into_iter()
            .find(|&t| self.shift(t) == Some(s))
            .expect("each labeling is a bijection")
    }
}

impl std::str::FromStr for ShiftLabeling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "shift labeling",
                name: s.to_string(),
            })
    }
}

/// A weight `n₁α₁ + n₂α₂ + shift(tag)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightPoint {
    pub n1: i64,
    pub n2: i64,
    pub tag: ShiftTag,
}

impl WeightPoint {
    pub fn new(n1: i64, n2: i64, tag: ShiftTag) -> Self {
        Self { n1, n2, tag }
    }

    pub fn value(&self, h: &CartanElt) -> Complex64 {
        self.value_with(h, ShiftLabeling::default())
    }

    pub fn value_with(&self, h: &CartanElt, labeling: ShiftLabeling) -> Complex64 {
        let base = h.root(self.n1, self.n2);
        match labeling.shift(self.tag) {
            Some(s) => base + h.half_shift(s),
            None => base,
        }
    }
}

/// `f_{(a,b,c)} = (e₁/e₂)^a (e₂/e₃)^b (e₃/e₁)^c` with exponents in `½Z`.
///
/// As a Laurent monomial it is `e₁^{a−c} e₂^{b−a} e₃^{c−b}`, so
/// `(a, b, c)` and `(a+t, b+t, c+t)` name the same function; equality and
/// hashing use the exponent vector `(a−c, b−a, c−b)`.
#[derive(Clone, Copy, Debug)]
pub struct Monomial {
    pub a: Rational64,
    pub b: Rational64,
    pub c: Rational64,
}

impl PartialEq for Monomial {
    fn eq(&self, other: &Self) -> bool {
        self.exponents() == other.exponents()
    }
}

impl Eq for Monomial {}

impl Monomial {
    pub fn new(a: Rational64, b: Rational64, c: Rational64) -> Result<Self> {
        for x in [a, b, c] {
            if *x.denom() != 1 && *x.denom() != 2 {
                return Err(Error::Domain(format!("exponent {x} is not in ½Z")));
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    /// Powers `(x₁, x₂, x₃)` of `e₁, e₂, e₃`; they sum to zero.
    pub fn exponents(&self) -> [Rational64; 3] {
        [self.a - self.c, self.b - self.a, self.c - self.b]
    }

    /// Weight in root coordinates: `x₁L₁ + x₂L₂ + x₃L₃ = x₁α₁ − x₃α₂`. A
    /// half-integral part is one of `½α₁`, `½α₂` or `½(α₁+α₂)`, and the last
    /// is written as `(α₁ + α₂) + ½(h₃ − h₁)`.
    pub fn weight(&self, labeling: ShiftLabeling) -> WeightPoint {
        let [x1, _, x3] = self.exponents();
        let (c1, c2) = (x1, -x3);
        let half = |r: Rational64| !r.is_integer();
        let (f1, f2) = (c1.floor().to_integer(), c2.floor().to_integer());
        match (half(c1), half(c2)) {
            (false, false) => WeightPoint::new(f1, f2, ShiftTag::None),
            (true, false) => WeightPoint::new(f1, f2, labeling.tag_for(HalfShift::Alpha1)),
            (false, true) => WeightPoint::new(f1, f2, labeling.tag_for(HalfShift::Alpha2)),
            (true, true) => WeightPoint::new(f1 + 1, f2 + 1, labeling.tag_for(HalfShift::Third)),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f({}, {}, {})", self.a, self.b, self.c)
    }
}

/// `E_{ij} f = e_i ∂_j f` on a Laurent monomial: the coefficient is the
/// power `x_j` of `e_j`, and the result raises `x_i` and lowers `x_j` by one.
pub fn rep_action(i: usize, j: usize, m: &Monomial) -> Result<(Rational64, Monomial)> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i == j {
        return Err(Error::Domain(format!("E_{i}{j} needs distinct indices in 1..=3")));
    }
    let coeff = m.exponents()[j - 1];
    let one = Rational64::from_integer(1);
    let mut out = *m;
    // x₁ = a − c, x₂ = b − a, x₃ = c − b
    match (i, j) {
        (1, 2) => out.a += one,
        (2, 1) => out.a -= one,
        (2, 3) => out.b += one,
        (3, 2) => out.b -= one,
        (3, 1) => out.c += one,
        (1, 3) => out.c -= one,
        _ => unreachable!(),
    }
    Ok((coeff, out))
}

/// A weight `pL₁ + qL₂ + rL₃` of `Sym^{3n}`, `p + q + r = 3n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymWeight {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl SymWeight {
    pub fn value(&self, h: &CartanElt) -> Complex64 {
        h.h[0] * self.p as f64 + h.h[1] * self.q as f64 + h.h[2] * self.r as f64
    }

    /// Root coordinates `(p − n, n − r)` where `3n = p + q + r`.
    pub fn root_coords(&self) -> (i64, i64) {
        let n = (self.p + self.q + self.r) as i64 / 3;
        (self.p as i64 - n, n - self.r as i64)
    }
}

/// All weights of `Sym^{3n}`, in lexicographic `(p, q)` order.
pub fn sym_weights(n: u32) -> Vec<SymWeight> {
    let d = 3 * n;
    (0..=d)
        .flat_map(|p| (0..=d - p).map(move |q| SymWeight { p, q, r: d - p - q }))
        .collect()
}

/// `Σ f(n₁, n₂)` over the square `|n₁|, |n₂| ≤ cutoff`, summed row by row in
/// parallel and then in row order, so the result does not depend on
/// scheduling.
fn square_sum<F>(cutoff: u32, f: F) -> Result<Complex64>
where
    F: Fn(i64, i64) -> Result<Complex64> + Sync,
{
    let k = cutoff as i64;
    let rows: Vec<Complex64> = (-k..=k)
        .into_par_iter()
        .map(|n1| (-k..=k).try_fold(Complex64::new(0.0, 0.0), |acc, n2| Ok(acc + f(n1, n2)?)))
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().sum())
}

fn inv_sq(x: Complex64, guard: f64) -> Result<Complex64> {
    if x.norm() < guard {
        return Err(Error::Pole { distance: x.norm() });
    }
    Ok((x * x).inv())
}

/// `Σ [1/(μ(H) − z)² − 1/μ(H)²]` over the weights `μ` of `W` with
/// `|n₁|, |n₂| ≤ cutoff`; the zero weight contributes `1/z²` only.
pub fn wp_trace_sum(h: &CartanElt, z: Complex64, cutoff: u32) -> Result<Complex64> {
    square_sum(cutoff, |n1, n2| {
        let mu = h.root(n1, n2);
        let t = inv_sq(mu - z, POLE_GUARD)?;
        if n1 == 0 && n2 == 0 {
            Ok(t)
        } else {
            Ok(t - inv_sq(mu, 0.0)?)
        }
    })
}

/// `Σ [1/(μ + sᵢ)² − 1/(μ + sⱼ)²]` over the square `|n₁|, |n₂| ≤ cutoff`,
/// with shifts from the default labeling.
pub fn killing_diff(tag_i: ShiftTag, tag_j: ShiftTag, h: &CartanElt, cutoff: u32) -> Result<Complex64> {
    killing_diff_with(tag_i, tag_j, h, cutoff, ShiftLabeling::default())
}

pub fn killing_diff_with(
    tag_i: ShiftTag,
    tag_j: ShiftTag,
    h: &CartanElt,
    cutoff: u32,
    labeling: ShiftLabeling,
) -> Result<Complex64> {
    if tag_i == tag_j {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (Some(si), Some(sj)) = (labeling.shift(tag_i), labeling.shift(tag_j)) else {
        return Err(Error::Domain("paired sums need shifted tags W1, W2 or W3".into()));
    };
    let (si, sj) = (h.half_shift(si), h.half_shift(sj));
    square_sum(cutoff, |n1, n2| {
        let mu = h.root(n1, n2);
        Ok(inv_sq(mu + si, 1e-12)? - inv_sq(mu + sj, 1e-12)?)
    })
}

/// `((H₃⁻¹,H₃⁻¹) − (H₂⁻¹,H₂⁻¹)) / ((H₁⁻¹,H₁⁻¹) − (H₂⁻¹,H₂⁻¹))` for `H(1, τ)`.
pub fn lambda_rep(tau: Complex64, cutoff: u32) -> Result<Complex64> {
    lambda_rep_with(tau, cutoff, ShiftLabeling::default())
}

pub fn lambda_rep_with(tau: Complex64, cutoff: u32, labeling: ShiftLabeling) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("tau must have Im > 0, got {tau}")));
    }
    if cutoff < 1 {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    let h = cartan_from_periods(Complex64::new(1.0, 0.0), tau)?;
    let num = killing_diff_with(ShiftTag::W3, ShiftTag::W2, &h, cutoff, labeling)?;
    let den = killing_diff_with(ShiftTag::W1, ShiftTag::W2, &h, cutoff, labeling)?;
    if den.norm() < 1e-12 {
        return Err(Error::Degenerate(den.norm()));
    }
    Ok(num / den)
}

/// `Σ [1/(v − z)² − 1/v²]` over the weights `v` of `Sym^{3n}` (or of its
/// dual when `dual` is set, which negates every weight), dropping `1/v²` at
/// the zero weight `p = q = r = n`.
pub fn sym_trace_partial(n: u32, h: &CartanElt, z: Complex64, dual: bool) -> Result<Complex64> {
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let sign = if dual { -1.0 } else { 1.0 };
    let mut sum = Complex64::new(0.0, 0.0);
    for w in sym_weights(n) {
        let v = w.value(h) * sign;
        sum += inv_sq(v - z, POLE_GUARD)?;
        if !(w.p == n && w.q == n) {
            sum -= inv_sq(v, 0.0)?;
        }
    }
    Ok(sum)
}
