//! Rectangular sampling of an evaluator, CSV export and domain-coloured PPM.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::registry::{Domain, Evaluator};

pub const MAX_SIDE: usize = 4096;

pub const CSV_HEADER: &str = "re,im,val_re,val_im,residual";

/// `nx × ny` nodes spanning `[re_min, re_max] × [im_min, im_max]`, endpoints
/// included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self, domain: Domain) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::Domain("grid bounds must be finite".into()));
        }
        if self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(Error::Domain("grid bounds are reversed".into()));
        }
        if self.nx == 0 || self.ny == 0 || self.nx > MAX_SIDE || self.ny > MAX_SIDE {
            return Err(Error::Domain(format!(
                "grid size {}×{} outside 1..={MAX_SIDE}",
                self.nx, self.ny
            )));
        }
        if domain == Domain::UpperHalfPlane && !(self.im_min > 0.0) {
            return Err(Error::Domain(format!(
                "im_min must be positive for this function, got {}",
                self.im_min
            )));
        }
        Ok(())
    }

    fn coord(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    /// Node `(i, j)`, column `i` along the real axis and row `j` along the
    /// imaginary axis.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            Self::coord(self.re_min, self.re_max, self.nx, i),
            Self::coord(self.im_min, self.im_max, self.ny, j),
        )
    }

    /// All nodes, row-major with `Im` ascending between rows and `Re`
    /// ascending within a row.
    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| self.node(i, j))
            .collect()
    }
}

/// One evaluated node. A failed evaluation keeps its error message and has a
/// NaN value.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub z: Complex64,
    pub value: Complex64,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

/// Evaluates every node in parallel; the output keeps node order.
pub fn evaluate(eval: &dyn Evaluator, region: &GridSpec) -> Result<Vec<GridRow>> {
    region.validate(eval.domain())?;
    Ok(region
        .nodes()
        .into_par_iter()
        .map(|z| match eval.eval(z) {
            Ok(out) => GridRow {
                z,
                value: out.value,
                residual: out.residual,
                error: None,
            },
            Err(e) => GridRow {
                z,
                value: Complex64::new(f64::NAN, f64::NAN),
                residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// 15 significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.14e}")
}

/// Header plus one LF-terminated line per row. A missing residual is an
/// empty field.
pub fn write_csv<W: Write>(rows: &[GridRow], out: &mut W) -> Result<()> {
    let mut buf = String::with_capacity(rows.len() * 100 + 64);
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for r in rows {
        let res = r.residual.map(fmt_real).unwrap_or_default();
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_real(r.z.re),
            fmt_real(r.z.im),
            fmt_real(r.value.re),
            fmt_real(r.value.im),
            res
        ));
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Parses a file written by [`write_csv`] back into `(z, value, residual)`.
pub fn parse_csv(text: &str) -> Result<Vec<(Complex64, Complex64, Option<f64>)>> {
    let mut lines = text.split('\n');
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing CSV header".into()));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("expected 5 fields in '{l}'")));
            }
            let res = if f[4].is_empty() { None } else { Some(num(f[4])?) };
            Ok((
                Complex64::new(num(f[0])?, num(f[1])?),
                Complex64::new(num(f[2])?, num(f[3])?),
                res,
            ))
        })
        .collect()
}

/// HSL with full saturation to 8-bit RGB.
fn hsl_to_rgb(h: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()).max(0.0);
    let hp = h * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [r, g, b].map(|v| ((v + m).clamp(0.0, 1.0) * 255.0).round() as u8)
}

/// Domain colouring: hue is the argument, lightness `(2/π)·atan|w|` runs from
/// black at zeros to white at poles. Undefined values are mid grey.
pub fn color(w: Complex64) -> [u8; 3] {
    if !w.is_finite() {
        return [128, 128, 128];
    }
    let hue = (w.arg() / (2.0 * PI)).rem_euclid(1.0);
    let light = 2.0 / PI * w.norm().atan();
    hsl_to_rgb(hue, light)
}

/// Binary PPM, top row at `im_max`.
pub fn write_ppm<W: Write>(rows: &[GridRow], region: &GridSpec, out: &mut W) -> Result<()> {
    if rows.len() != region.nx * region.ny {
        return Err(Error::Domain(format!(
            "{} rows for a {}×{} grid",
            rows.len(),
            region.nx,
            region.ny
        )));
    }
    let mut buf = format!("P6\n{} {}\n255\n", region.nx, region.ny).into_bytes();
    for j in (0..region.ny).rev() {
        for r in &rows[j * region.nx..(j + 1) * region.nx] {
            buf.extend_from_slice(&color(r.value));
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{EvalOptions, FunctionRegistry};

    fn region(nx: usize, ny: usize) -> GridSpec {
        GridSpec {
            re_min: -0.5,
            re_max: 0.5,
            im_min: 1.0,
            im_max: 2.0,
            nx,
            ny,
        }
    }

    #[test]
    fn nodes_are_row_major() {
        let s = region(3, 2);
        let n = s.nodes();
        assert_eq!(n.len(), 6);
        assert_eq!(n[0], Complex64::new(-0.5, 1.0));
        assert_eq!(n[2], Complex64::new(0.5, 1.0));
        assert_eq!(n[3], Complex64::new(-0.5, 2.0));
        assert_eq!(region(1, 1).nodes(), vec![Complex64::new(-0.5, 1.0)]);
    }

    #[test]
    fn validation() {
        assert!(region(2, 2).validate(Domain::UpperHalfPlane).is_ok());
        assert!(region(0, 2).validate(Domain::Plane).is_err());
        assert!(region(4097, 2).validate(Domain::Plane).is_err());
        let mut s = region(2, 2);
        s.im_min = 0.0;
        assert!(s.validate(Domain::UpperHalfPlane).is_err());
        assert!(s.validate(Domain::Plane).is_ok());
        s.re_min = 1.0;
        assert!(s.validate(Domain::Plane).is_err());
    }

    #[test]
    fn csv_roundtrip_and_determinism() {
        let e = FunctionRegistry::default().build("j", &EvalOptions::default()).unwrap();
        let rows = evaluate(e.as_ref(), &region(4, 3)).unwrap();
        let mut a = vec![];
        write_csv(&rows, &mut a).unwrap();
        let mut b = vec![];
        write_csv(&evaluate(e.as_ref(), &region(4, 3)).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.is_ascii() && !text.contains('\r'));
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.len(), 12);
        for ((z, v, res), row) in parsed.iter().zip(&rows) {
            assert!((z - row.z).norm() <= 1e-15 * row.z.norm());
            assert!((v - row.value).norm() <= 1e-14 * row.value.norm().max(1.0));
            assert!(res.is_none());
        }
    }

    #[test]
    fn failed_nodes_are_nan() {
        let e = FunctionRegistry::default().build("wp", &EvalOptions::default()).unwrap();
        let s = GridSpec {
            re_min: 0.0,
            re_max: 1.0,
            im_min: 0.0,
            im_max: 1.0,
            nx: 2,
            ny: 2,
        };
        let rows = evaluate(e.as_ref(), &s).unwrap();
        assert!(rows[0].value.re.is_nan() && rows[0].error.is_some());
        assert!(rows[3].error.is_none());
    }

    #[test]
    fn ppm_layout() {
        let rows: Vec<_> = region(3, 2)
            .nodes()
            .into_iter()
            .map(|z| GridRow {
                z,
                value: z,
                residual: None,
                error: None,
            })
            .collect();
        let mut out = vec![];
        write_ppm(&rows, &region(3, 2), &mut out).unwrap();
        let header = b"P6\n3 2\n255\n";
        assert_eq!(&out[..header.len()], header);
        assert_eq!(out.len(), header.len() + 18);
        // first pixel is the top-left node, Im = im_max
        assert_eq!(&out[header.len()..header.len() + 3], &color(rows[3].value));
    }

    #[test]
    fn colors() {
        assert_eq!(color(Complex64::new(0.0, 0.0)), [0, 0, 0]);
        assert_eq!(color(Complex64::new(1e300, 0.0)), [255, 255, 255]);
        assert_eq!(color(Complex64::new(1.0, 0.0)), [255, 0, 0]);
        assert_eq!(color(Complex64::new(f64::NAN, 0.0)), [128, 128, 128]);
    }
}
