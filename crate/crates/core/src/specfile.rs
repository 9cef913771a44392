//! Structured-text spec files for measures and diagonal systems. The format
//! is line-based `key: value` with `#` comments; every float is emitted with
//! 17 significant digits so that `parse(emit(x)) == x` exactly and output
//! diffs are byte-stable.
//!
//! Radial measures:
//! ```text
//! kind: radial
//! atom0: 1
//! atom: <r> <mass>
//! piece: <lo> <hi> power <coeff> <alpha>
//! piece: <lo> <hi> samples <r1> <v1> <r2> <v2> ...
//! ```
//!
//! Half-plane measures (`axis:` opens a 1-D boundary-density component,
//! `product:` a radial-times-Lebesgue component; `piece:`/`radial-*` lines
//! attach to the most recently opened component):
//! ```text
//! kind: halfplane
//! boundary-atoms: true
//! atom: <re> <im> <mass>
//! axis:
//! piece: 1 inf power 1 -0.5
//! product: <y_lo> <y_hi> <scale>
//! radial-atom0: <mass>
//! radial-atom: <r> <mass>
//! radial-piece: <lo> <hi> power <coeff> <alpha>
//! ```
//!
//! Diagonal systems (one mode per row):
//! ```text
//! kind: system
//! mode: <re_lambda> <im_lambda> <re_b> <im_b>
//! ```

use crate::error::{Error, Result};
use crate::measure::{
    Atom, DensityComponent, DensityForm, DensityPiece, HalfPlaneMeasure, RadialMeasure,
};
use num_complex::Complex64;
use std::path::Path;

/// Any object a spec file can describe.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedSpec {
    Radial(RadialMeasure),
    HalfPlane(HalfPlaneMeasure),
    /// `(lambda_k, b_k)` rows; the basis exponent comes from the caller
    System(Vec<(Complex64, Complex64)>),
}

impl ParsedSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedSpec::Radial(_) => "radial",
            ParsedSpec::HalfPlane(_) => "halfplane",
            ParsedSpec::System(_) => "system",
        }
    }
}

/// 17-significant-digit float formatting; round-trips every finite `f64`
/// exactly through `parse_f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn schema(line: usize, msg: impl Into<String>) -> Error {
    Error::Schema {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| schema(line, format!("expected a number, got `{tok}`"))),
    }
}

fn parse_floats(toks: &[&str], line: usize) -> Result<Vec<f64>> {
    toks.iter().map(|t| parse_f64(t, line)).collect()
}

fn expect_arity(toks: &[&str], n: usize, line: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(schema(
            line,
            format!("{what} takes {n} fields, got {}", toks.len()),
        ));
    }
    Ok(())
}

fn parse_piece(toks: &[&str], line: usize) -> Result<DensityPiece> {
    if toks.len() < 3 {
        return Err(schema(line, "piece needs `<lo> <hi> <form> ...`"));
    }
    let lo = parse_f64(toks[0], line)?;
    let hi = parse_f64(toks[1], line)?;
    if !(lo >= 0.0) || !(hi > lo) {
        return Err(schema(line, format!("bad piece interval [{lo}, {hi})")));
    }
    let form = match toks[2] {
        "power" => {
            expect_arity(toks, 5, line, "power piece")?;
            let coeff = parse_f64(toks[3], line)?;
            if coeff < 0.0 {
                return Err(schema(line, format!("negative density coefficient {coeff}")));
            }
            DensityForm::Power {
                coeff,
                alpha: parse_f64(toks[4], line)?,
            }
        }
        "samples" => {
            let vals = parse_floats(&toks[3..], line)?;
            if vals.len() < 4 || vals.len() % 2 != 0 {
                return Err(schema(line, "samples piece needs >= 2 (r, value) pairs"));
            }
            let grid: Vec<f64> = vals.iter().step_by(2).copied().collect();
            let values: Vec<f64> = vals.iter().skip(1).step_by(2).copied().collect();
            if !grid.windows(2).all(|w| w[1] > w[0]) {
                return Err(schema(line, "sample grid must be strictly increasing"));
            }
            if values.iter().any(|&v| v < 0.0) {
                return Err(schema(line, "negative sample value"));
            }
            DensityForm::Samples { grid, values }
        }
        other => return Err(schema(line, format!("unknown density form `{other}`"))),
    };
    Ok(DensityPiece { lo, hi, form })
}

fn positive_mass(m: f64, line: usize) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(schema(line, format!("negative mass {m}")));
    }
    Ok(m)
}

/// Which component the attaching lines of a half-plane spec refer to.
enum Open {
    None,
    Axis,
    Product,
}

/// Parse a spec from its text; `kind:` must be the first non-comment line.
pub fn parse_spec_str(text: &str) -> Result<ParsedSpec> {
    let mut kind: Option<&str> = None;
    let mut radial = RadialMeasure::default();
    let mut half = HalfPlaneMeasure::default();
    let mut modes: Vec<(Complex64, Complex64)> = Vec::new();
    let mut open = Open::None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| schema(line, "expected `key: value`"))?;
        let key = key.trim();
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if kind.is_none() {
            if key != "kind" {
                return Err(schema(line, "first entry must be `kind: ...`"));
            }
            kind = match toks.as_slice() {
                ["radial"] => Some("radial"),
                ["halfplane"] => Some("halfplane"),
                ["system"] => Some("system"),
                _ => return Err(schema(line, format!("unknown kind `{}`", rest.trim()))),
            };
            continue;
        }
        match (kind.unwrap(), key) {
            ("radial", "atom0") => {
                expect_arity(&toks, 1, line, "atom0")?;
                radial.atom_at_zero = positive_mass(parse_f64(toks[0], line)?, line)?;
            }
            ("radial", "atom") => {
                expect_arity(&toks, 2, line, "atom")?;
                let r = parse_f64(toks[0], line)?;
                if !(r > 0.0) {
                    return Err(schema(line, format!("atom radius {r} must be positive")));
                }
                let m = positive_mass(parse_f64(toks[1], line)?, line)?;
                radial.atoms.push((r, m));
            }
            ("radial", "piece") => radial.pieces.push(parse_piece(&toks, line)?),
            ("halfplane", "boundary-atoms") => {
                expect_arity(&toks, 1, line, "boundary-atoms")?;
                half.include_boundary_atoms = match toks[0] {
                    "true" => true,
                    "false" => false,
                    other => return Err(schema(line, format!("expected true/false, got `{other}`"))),
                };
            }
            ("halfplane", "atom") => {
                expect_arity(&toks, 3, line, "atom")?;
                let v = parse_floats(&toks, line)?;
                let z = Complex64::new(v[0], v[1]);
                if z.re < 0.0 {
                    return Err(schema(line, format!("atom at {z} left of the axis")));
                }
                half.atoms.push(Atom {
                    z,
                    mass: positive_mass(v[2], line)?,
                });
            }
            ("halfplane", "axis") => {
                expect_arity(&toks, 0, line, "axis")?;
                half.components
                    .push(DensityComponent::Axis { pieces: Vec::new() });
                open = Open::Axis;
            }
            ("halfplane", "piece") => {
                let piece = parse_piece(&toks, line)?;
                match (&mut open, half.components.last_mut()) {
                    (Open::Axis, Some(DensityComponent::Axis { pieces })) => pieces.push(piece),
                    _ => return Err(schema(line, "piece outside an `axis:` component")),
                }
            }
            ("halfplane", "product") => {
                expect_arity(&toks, 3, line, "product")?;
                let v = parse_floats(&toks, line)?;
                if !(v[1] > v[0]) {
                    return Err(schema(line, "product needs y_hi > y_lo"));
                }
                half.components.push(DensityComponent::Product {
                    radial: RadialMeasure::default(),
                    y_lo: v[0],
                    y_hi: v[1],
                    scale: positive_mass(v[2], line)?,
                });
                open = Open::Product;
            }
            ("halfplane", "radial-atom0" | "radial-atom" | "radial-piece") => {
                let r = match (&mut open, half.components.last_mut()) {
                    (Open::Product, Some(DensityComponent::Product { radial, .. })) => radial,
                    _ => {
                        return Err(schema(
                            line,
                            format!("{key} outside a `product:` component"),
                        ))
                    }
                };
                match key {
                    "radial-atom0" => {
                        expect_arity(&toks, 1, line, "radial-atom0")?;
                        r.atom_at_zero = positive_mass(parse_f64(toks[0], line)?, line)?;
                    }
                    "radial-atom" => {
                        expect_arity(&toks, 2, line, "radial-atom")?;
                        let radius = parse_f64(toks[0], line)?;
                        if !(radius > 0.0) {
                            return Err(schema(line, format!("atom radius {radius} must be positive")));
                        }
                        r.atoms
                            .push((radius, positive_mass(parse_f64(toks[1], line)?, line)?));
                    }
                    _ => r.pieces.push(parse_piece(&toks, line)?),
                }
            }
            ("system", "mode") => {
                expect_arity(&toks, 4, line, "mode")?;
                let v = parse_floats(&toks, line)?;
                let lambda = Complex64::new(v[0], v[1]);
                if lambda.re >= 0.0 {
                    return Err(schema(
                        line,
                        format!("eigenvalue {lambda} not in the open left half-plane"),
                    ));
                }
                modes.push((lambda, Complex64::new(v[2], v[3])));
            }
            (k, other) => {
                return Err(schema(line, format!("unknown key `{other}` for kind {k}")))
            }
        }
    }
    match kind {
        None => Err(schema(0, "empty spec")),
        Some("radial") => {
            radial.validate()?;
            Ok(ParsedSpec::Radial(radial))
        }
        Some("halfplane") => {
            half.validate()?;
            Ok(ParsedSpec::HalfPlane(half))
        }
        _ => Ok(ParsedSpec::System(modes)),
    }
}

/// Parse a spec file from disk.
pub fn parse_spec(path: impl AsRef<Path>) -> Result<ParsedSpec> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| schema(0, format!("cannot read {}: {e}", path.as_ref().display())))?;
    parse_spec_str(&text)
}

fn emit_piece(out: &mut String, key: &str, piece: &DensityPiece) {
    match &piece.form {
        DensityForm::Power { coeff, alpha } => out.push_str(&format!(
            "{key}: {} {} power {} {}\n",
            fmt_f64(piece.lo),
            fmt_f64(piece.hi),
            fmt_f64(*coeff),
            fmt_f64(*alpha)
        )),
        DensityForm::Samples { grid, values } => {
            out.push_str(&format!(
                "{key}: {} {} samples",
                fmt_f64(piece.lo),
                fmt_f64(piece.hi)
            ));
            for (g, v) in grid.iter().zip(values) {
                out.push_str(&format!(" {} {}", fmt_f64(*g), fmt_f64(*v)));
            }
            out.push('\n');
        }
    }
}

fn emit_radial_body(out: &mut String, prefix: &str, nu: &RadialMeasure) {
    if nu.atom_at_zero != 0.0 {
        out.push_str(&format!("{prefix}atom0: {}\n", fmt_f64(nu.atom_at_zero)));
    }
    for (r, m) in &nu.atoms {
        out.push_str(&format!("{prefix}atom: {} {}\n", fmt_f64(*r), fmt_f64(*m)));
    }
    for p in &nu.pieces {
        emit_piece(out, &format!("{prefix}piece"), p);
    }
}

/// Serialize a radial measure.
pub fn emit_radial(nu: &RadialMeasure) -> String {
    let mut out = String::from("kind: radial\n");
    emit_radial_body(&mut out, "", nu);
    out
}

/// Serialize a half-plane measure; callback-density components have no
/// textual form and are rejected.
pub fn emit_halfplane(mu: &HalfPlaneMeasure) -> Result<String> {
    let mut out = String::from("kind: halfplane\n");
    if !mu.include_boundary_atoms {
        out.push_str("boundary-atoms: false\n");
    }
    for a in &mu.atoms {
        out.push_str(&format!(
            "atom: {} {} {}\n",
            fmt_f64(a.z.re),
            fmt_f64(a.z.im),
            fmt_f64(a.mass)
        ));
    }
    for c in &mu.components {
        match c {
            DensityComponent::Axis { pieces } => {
                out.push_str("axis:\n");
                for p in pieces {
                    emit_piece(&mut out, "piece", p);
                }
            }
            DensityComponent::Product {
                radial,
                y_lo,
                y_hi,
                scale,
            } => {
                out.push_str(&format!(
                    "product: {} {} {}\n",
                    fmt_f64(*y_lo),
                    fmt_f64(*y_hi),
                    fmt_f64(*scale)
                ));
                emit_radial_body(&mut out, "radial-", radial);
            }
            DensityComponent::Callback { .. } => {
                return Err(Error::UnsupportedMeasure(
                    "callback densities have no spec-file form",
                ))
            }
        }
    }
    Ok(out)
}

/// Serialize the mode rows of a diagonal system.
pub fn emit_system(modes: &[(Complex64, Complex64)]) -> String {
    let mut out = String::from("kind: system\n");
    for (lambda, b) in modes {
        out.push_str(&format!(
            "mode: {} {} {} {}\n",
            fmt_f64(lambda.re),
            fmt_f64(lambda.im),
            fmt_f64(b.re),
            fmt_f64(b.im)
        ));
    }
    out
}

/// Serialize any parsed spec back to its textual form.
pub fn emit(spec: &ParsedSpec) -> Result<String> {
    match spec {
        ParsedSpec::Radial(nu) => Ok(emit_radial(nu)),
        ParsedSpec::HalfPlane(mu) => emit_halfplane(mu),
        ParsedSpec::System(modes) => Ok(emit_system(modes)),
    }
}
