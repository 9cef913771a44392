//! Measures on the half-line and the right half-plane, region masses and
//! doubling diagnostics.
//!
//! All intervals are half-open `[u, v)`; the cumulative function
//! `F(r) = nu([0, r))` is left-continuous and atoms are counted
//! unambiguously. Densities are restricted to forms whose region masses are
//! either closed-form or one-dimensional quadrature: power laws, tabulated
//! samples, 1-D densities on the real axis, and radial-times-Lebesgue
//! products. A callback-backed 2-D density exists for internally generated
//! measures (symbol-induced densities); it is not part of the file schema.

use crate::error::{Error, Result};
use crate::{par, quad};
use num_complex::Complex64;
use std::sync::Arc;

/// A 1-D density on an interval `[lo, hi)` (`hi` may be infinite for power
/// laws decaying fast enough).
#[derive(Debug, Clone, PartialEq)]
pub enum DensityForm {
    /// `coeff * r^alpha dr`
    Power { coeff: f64, alpha: f64 },
    /// linear interpolation of tabulated samples on a strictly increasing grid
    Samples { grid: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub form: DensityForm,
}

impl DensityPiece {
    pub fn power(lo: f64, hi: f64, coeff: f64, alpha: f64) -> Self {
        DensityPiece {
            lo,
            hi,
            form: DensityForm::Power { coeff, alpha },
        }
    }

    /// Integral of the density over `[lo, min(r, hi))`.
    pub fn mass_below(&self, r: f64) -> f64 {
        let v = r.min(self.hi);
        if v <= self.lo {
            return 0.0;
        }
        match &self.form {
            DensityForm::Power { coeff, alpha } => {
                // alpha > -1 enforced at validation for pieces touching 0
                let a1 = alpha + 1.0;
                if a1 == 0.0 {
                    coeff * (v.ln() - self.lo.ln())
                } else {
                    coeff * (v.powf(a1) - self.lo.powf(a1)) / a1
                }
            }
            DensityForm::Samples { grid, values } => {
                // trapezoid over the clipped grid
                let mut acc = 0.0;
                for w in grid.windows(2).zip(values.windows(2)) {
                    let (g, val) = w;
                    let (t0, t1) = (g[0], g[1]);
                    if t1 <= self.lo || t0 >= v {
                        continue;
                    }
                    let a = t0.max(self.lo);
                    let b = t1.min(v);
                    let fa = lerp(t0, t1, val[0], val[1], a);
                    let fb = lerp(t0, t1, val[0], val[1], b);
                    acc += 0.5 * (fa + fb) * (b - a);
                }
                acc
            }
        }
    }

    pub fn mass_between(&self, u: f64, v: f64) -> f64 {
        self.mass_below(v) - self.mass_below(u)
    }

    pub fn density_at(&self, r: f64) -> f64 {
        if r < self.lo || r >= self.hi {
            return 0.0;
        }
        match &self.form {
            DensityForm::Power { coeff, alpha } => coeff * r.powf(*alpha),
            DensityForm::Samples { grid, values } => {
                for (g, val) in grid.windows(2).zip(values.windows(2)) {
                    if r >= g[0] && r <= g[1] {
                        return lerp(g[0], g[1], val[0], val[1], r);
                    }
                }
                0.0
            }
        }
    }

    fn clip(&self, u: f64, v: f64) -> Option<DensityPiece> {
        let lo = self.lo.max(u);
        let hi = self.hi.min(v);
        if hi <= lo {
            return None;
        }
        match &self.form {
            DensityForm::Power { .. } => Some(DensityPiece {
                lo,
                hi,
                form: self.form.clone(),
            }),
            DensityForm::Samples { grid, values } => {
                let mut g = Vec::new();
                let mut vals = Vec::new();
                if grid.first().copied().unwrap_or(lo) < lo {
                    g.push(lo);
                    vals.push(self.density_at(lo));
                }
                for (t, val) in grid.iter().zip(values) {
                    if *t >= lo && *t <= hi {
                        g.push(*t);
                        vals.push(*val);
                    }
                }
                if grid.last().copied().unwrap_or(hi) > hi && hi.is_finite() {
                    g.push(hi);
                    vals.push(self.density_at(hi));
                }
                if g.len() < 2 {
                    return None;
                }
                Some(DensityPiece {
                    lo,
                    hi,
                    form: DensityForm::Samples {
                        grid: g,
                        values: vals,
                    },
                })
            }
        }
    }
}

fn lerp(t0: f64, t1: f64, v0: f64, v1: f64, t: f64) -> f64 {
    if t1 == t0 {
        v0
    } else {
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
}

/// A positive regular Borel measure on `[0, inf)`: the radial factor of a
/// translation-invariant measure on the half-plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialMeasure {
    pub atom_at_zero: f64,
    /// strictly increasing `(location, mass)` pairs, locations > 0
    pub atoms: Vec<(f64, f64)>,
    /// pairwise disjoint density pieces
    pub pieces: Vec<DensityPiece>,
}

impl RadialMeasure {
    /// Dirac mass at 0 (Hardy-space radial measure).
    pub fn dirac_zero() -> Self {
        RadialMeasure {
            atom_at_zero: 1.0,
            ..Default::default()
        }
    }

    /// Lebesgue measure on `[0, inf)` (unweighted Bergman).
    pub fn lebesgue() -> Self {
        RadialMeasure::power_law(1.0, 0.0)
    }

    /// `coeff * r^alpha dr` on `[0, inf)`, `alpha > -1`.
    pub fn power_law(coeff: f64, alpha: f64) -> Self {
        RadialMeasure {
            atom_at_zero: 0.0,
            atoms: Vec::new(),
            pieces: vec![DensityPiece::power(0.0, f64::INFINITY, coeff, alpha)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Error::Schema {
            line: 0,
            msg: msg.to_string(),
        };
        if self.atom_at_zero < 0.0 {
            return Err(bad("atom_at_zero must be nonnegative"));
        }
        let mut prev = 0.0;
        for (loc, mass) in &self.atoms {
            if *loc <= prev && prev > 0.0 || *loc <= 0.0 {
                return Err(bad("atoms must be strictly ordered with locations > 0"));
            }
            if *mass < 0.0 {
                return Err(bad("atom masses must be nonnegative"));
            }
            prev = *loc;
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if !(p.lo < p.hi) || p.lo < 0.0 {
                return Err(bad("density pieces must satisfy 0 <= lo < hi"));
            }
            if let DensityForm::Power { alpha, .. } = p.form {
                if p.lo == 0.0 && alpha <= -1.0 {
                    return Err(bad("power pieces touching 0 need alpha > -1"));
                }
            }
            for q in &self.pieces[i + 1..] {
                if p.lo < q.hi && q.lo < p.hi {
                    return Err(bad("density pieces must be disjoint"));
                }
            }
        }
        Ok(())
    }

    /// `F(r) = nu([0, r))`, exact for atoms and power pieces.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::NegativeRadius(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let mut f = self.atom_at_zero;
        for (loc, mass) in &self.atoms {
            if *loc < r {
                f += mass;
            }
        }
        for p in &self.pieces {
            f += p.mass_below(r);
        }
        Ok(f)
    }

    /// Mass of the half-open interval `[u, v)`. The atom at 0 counts iff
    /// `u == 0`.
    pub fn mass_between(&self, u: f64, v: f64) -> f64 {
        if v <= u {
            return 0.0;
        }
        let mut m = if u <= 0.0 { self.atom_at_zero } else { 0.0 };
        for (loc, mass) in &self.atoms {
            if *loc >= u && *loc < v {
                m += mass;
            }
        }
        for p in &self.pieces {
            m += p.mass_between(u.max(0.0), v);
        }
        m
    }

    /// Mass of the open-left half-open interval `(u, v]`.
    pub fn mass_between_semiopen_right(&self, u: f64, v: f64) -> f64 {
        if v <= u {
            return 0.0;
        }
        let mut m = if u < 0.0 { self.atom_at_zero } else { 0.0 };
        for (loc, mass) in &self.atoms {
            if *loc > u && *loc <= v {
                m += mass;
            }
        }
        for p in &self.pieces {
            m += p.mass_between(u.max(0.0), v);
        }
        m
    }

    pub fn total_mass(&self) -> f64 {
        self.mass_between(0.0, f64::INFINITY)
    }

    /// Restriction to `[u, v)`.
    pub fn clip(&self, u: f64, v: f64) -> RadialMeasure {
        RadialMeasure {
            atom_at_zero: if u <= 0.0 { self.atom_at_zero } else { 0.0 },
            atoms: self
                .atoms
                .iter()
                .filter(|(loc, _)| *loc >= u && *loc < v)
                .copied()
                .collect(),
            pieces: self.pieces.iter().filter_map(|p| p.clip(u, v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> RadialMeasure {
        let scale_form = |form: &DensityForm| match form {
            DensityForm::Power { coeff, alpha } => DensityForm::Power {
                coeff: coeff * c,
                alpha: *alpha,
            },
            DensityForm::Samples { grid, values } => DensityForm::Samples {
                grid: grid.clone(),
                values: values.iter().map(|v| v * c).collect(),
            },
        };
        RadialMeasure {
            atom_at_zero: self.atom_at_zero * c,
            atoms: self.atoms.iter().map(|(l, m)| (*l, m * c)).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| DensityPiece {
                    lo: p.lo,
                    hi: p.hi,
                    form: scale_form(&p.form),
                })
                .collect(),
        }
    }

    /// Integral of `g` against the measure: atoms exactly, pieces by
    /// quadrature. Used by transforms and embedding norms.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let mut acc = 0.0;
        if self.atom_at_zero > 0.0 {
            acc += self.atom_at_zero * g(0.0);
        }
        for (loc, mass) in &self.atoms {
            acc += mass * g(*loc);
        }
        for p in &self.pieces {
            acc += quad::integral_ray(|r| p.density_at(r) * g(r), p.lo, p.hi, quad::REL_TOL)?;
        }
        Ok(acc)
    }
}

/// Doubling diagnostics for a radial measure.
#[derive(Debug, Clone)]
pub struct DoublingInfo {
    /// estimated doubling constant `sup F(2t)/F(t)` over the probe grid
    pub constant: f64,
    pub grid: Vec<f64>,
    pub sup_location: f64,
    /// set when the ratio exceeded the configured cap (non-doubling)
    pub exceeds_cap: bool,
}

/// Geometric probe grid with `per_octave` points per octave.
pub fn probe_grid(lo: f64, hi: f64, per_octave: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let octaves = (hi / lo).log2();
    let n = ((octaves * per_octave as f64).ceil() as usize).max(1);
    (0..=n)
        .map(|k| lo * (hi / lo).powf(k as f64 / n as f64))
        .collect()
}

/// Default probe grid used by the doubling diagnostics and the sequence
/// construction: 8 points per octave over 2^-30 .. 2^30.
pub fn default_probe_grid() -> Vec<f64> {
    probe_grid(2f64.powi(-30), 2f64.powi(30), 8)
}

/// `R = sup_t F(2t)/F(t)` over the probe grid.
pub fn doubling_constant(nu: &RadialMeasure, grid: &[f64], cap: f64) -> Result<DoublingInfo> {
    let mut best = 0.0f64;
    let mut at = f64::NAN;
    for &t in grid {
        let ft = nu.cdf(t)?;
        if ft <= 0.0 {
            return Err(Error::ZeroMassNearOrigin);
        }
        let f2t = nu.cdf(2.0 * t)?;
        let ratio = f2t / ft;
        if ratio > best {
            best = ratio;
            at = t;
        }
    }
    Ok(DoublingInfo {
        constant: best,
        grid: grid.to_vec(),
        sup_location: at,
        exceeds_cap: best > cap,
    })
}

/// `inf_r F(Mr)/F(r)` over the probe grid (inverse doubling diagnostic).
pub fn inverse_doubling_infimum(nu: &RadialMeasure, m: f64, grid: &[f64]) -> Result<f64> {
    assert!(m > 1.0);
    let mut best = f64::INFINITY;
    for &t in grid {
        let ft = nu.cdf(t)?;
        if ft <= 0.0 {
            return Err(Error::ZeroMassNearOrigin);
        }
        best = best.min(nu.cdf(m * t)? / ft);
    }
    Ok(best)
}

/// Carleson square `Q_I = { x + iy : 0 < x < |I|, |y - center| < |I|/2 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonSquare {
    pub center_y: f64,
    pub side: f64,
}

impl CarlesonSquare {
    pub fn new(center_y: f64, side: f64) -> Self {
        assert!(side > 0.0);
        CarlesonSquare { center_y, side }
    }
    pub fn y_lo(&self) -> f64 {
        self.center_y - 0.5 * self.side
    }
    pub fn y_hi(&self) -> f64 {
        self.center_y + 0.5 * self.side
    }
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= 0.0 && z.re < self.side && z.im >= self.y_lo() && z.im < self.y_hi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: Complex64,
    pub mass: f64,
}

/// Rectangle used for callback-density supports and restrictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect {
            x_lo: self.x_lo.max(o.x_lo),
            x_hi: self.x_hi.min(o.x_hi),
            y_lo: self.y_lo.max(o.y_lo),
            y_hi: self.y_hi.min(o.y_hi),
        };
        (r.x_lo < r.x_hi && r.y_lo < r.y_hi).then_some(r)
    }
}

type Density2D = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Density parts of a half-plane measure.
#[derive(Clone)]
pub enum DensityComponent {
    /// 1-D density on the positive real axis
    Axis { pieces: Vec<DensityPiece> },
    /// `scale * (radial in x) x (Lebesgue on [y_lo, y_hi) in y)`
    Product {
        radial: RadialMeasure,
        y_lo: f64,
        y_hi: f64,
        scale: f64,
    },
    /// callback-backed 2-D density with rectangular support; region masses
    /// by nested quadrature (internal use, not parseable)
    Callback { support: Rect, density: Density2D },
}

impl std::fmt::Debug for DensityComponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityComponent::Axis { pieces } => {
                f.debug_struct("Axis").field("pieces", pieces).finish()
            }
            DensityComponent::Product {
                radial,
                y_lo,
                y_hi,
                scale,
            } => f
                .debug_struct("Product")
                .field("radial", radial)
                .field("y_lo", y_lo)
                .field("y_hi", y_hi)
                .field("scale", scale)
                .finish(),
            DensityComponent::Callback { support, .. } => f
                .debug_struct("Callback")
                .field("support", support)
                .finish_non_exhaustive(),
        }
    }
}

impl PartialEq for DensityComponent {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DensityComponent::Axis { pieces: a }, DensityComponent::Axis { pieces: b }) => a == b,
            (
                DensityComponent::Product {
                    radial: r1,
                    y_lo: a1,
                    y_hi: b1,
                    scale: s1,
                },
                DensityComponent::Product {
                    radial: r2,
                    y_lo: a2,
                    y_hi: b2,
                    scale: s2,
                },
            ) => r1 == r2 && a1 == a2 && b1 == b2 && s1 == s2,
            (
                DensityComponent::Callback { density: d1, .. },
                DensityComponent::Callback { density: d2, .. },
            ) => Arc::ptr_eq(d1, d2),
            _ => false,
        }
    }
}

/// A positive regular Borel measure on the closed right half-plane: finitely
/// many atoms plus density components.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlaneMeasure {
    pub atoms: Vec<Atom>,
    pub components: Vec<DensityComponent>,
    /// whether atoms on the boundary `Re z = 0` count inside Carleson
    /// squares (Hardy-space reading); default true
    pub include_boundary_atoms: bool,
}

impl Default for HalfPlaneMeasure {
    fn default() -> Self {
        HalfPlaneMeasure {
            atoms: Vec::new(),
            components: Vec::new(),
            include_boundary_atoms: true,
        }
    }
}

impl HalfPlaneMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: Vec<(Complex64, f64)>) -> Self {
        HalfPlaneMeasure {
            atoms: atoms
                .into_iter()
                .map(|(z, mass)| Atom { z, mass })
                .collect(),
            ..Default::default()
        }
    }

    pub fn single_atom(z: Complex64, mass: f64) -> Self {
        Self::from_atoms(vec![(z, mass)])
    }

    /// The section-3.2 counterexample measure `dx/sqrt(x)` on `[1, inf)`.
    pub fn inverse_sqrt_on_ray() -> Self {
        HalfPlaneMeasure {
            components: vec![DensityComponent::Axis {
                pieces: vec![DensityPiece::power(1.0, f64::INFINITY, 1.0, -0.5)],
            }],
            ..Default::default()
        }
    }

    /// Materialization of the product measure `radial x Lebesgue` restricted
    /// to `[y_lo, y_hi)` in the imaginary direction.
    pub fn product(radial: RadialMeasure, y_lo: f64, y_hi: f64) -> Self {
        HalfPlaneMeasure {
            components: vec![DensityComponent::Product {
                radial,
                y_lo,
                y_hi,
                scale: 1.0,
            }],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if a.z.re < 0.0 {
                return Err(Error::Schema {
                    line: 0,
                    msg: format!("atom at {} outside the closed right half-plane", a.z),
                });
            }
            if a.mass < 0.0 {
                return Err(Error::Schema {
                    line: 0,
                    msg: "atom masses must be nonnegative".into(),
                });
            }
        }
        Ok(())
    }

    /// Mass of the half-open rectangle `[x_lo, x_hi) x [y_lo, y_hi)`.
    /// Boundary atoms at `Re z = 0` are included iff `x_lo == 0` and the
    /// boundary flag is set.
    pub fn rect_mass(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<f64> {
        self.rect_mass_impl(x_lo, x_hi, y_lo, y_hi, false)
    }

    /// Mass of the cell `(x_lo, x_hi] x (y_lo, y_hi]` (dyadic-tiling
    /// convention; boundary atoms go to the lower cell).
    pub fn cell_mass(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<f64> {
        self.rect_mass_impl(x_lo, x_hi, y_lo, y_hi, true)
    }

    fn rect_mass_impl(
        &self,
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
        semiopen_right: bool,
    ) -> Result<f64> {
        if x_hi <= x_lo || y_hi <= y_lo {
            return Ok(0.0);
        }
        let mut m = 0.0;
        for a in &self.atoms {
            let x_in = if semiopen_right {
                a.z.re > x_lo && a.z.re <= x_hi
            } else if a.z.re == 0.0 && x_lo == 0.0 {
                self.include_boundary_atoms
            } else {
                a.z.re >= x_lo && a.z.re < x_hi
            };
            let y_in = if semiopen_right {
                a.z.im > y_lo && a.z.im <= y_hi
            } else {
                a.z.im >= y_lo && a.z.im < y_hi
            };
            if x_in && y_in {
                m += a.mass;
            }
        }
        for c in &self.components {
            m += match c {
                DensityComponent::Axis { pieces } => {
                    let y0_in = if semiopen_right {
                        y_lo < 0.0 && 0.0 <= y_hi
                    } else {
                        y_lo <= 0.0 && 0.0 < y_hi
                    };
                    if y0_in {
                        pieces
                            .iter()
                            .map(|p| p.mass_between(x_lo.max(0.0), x_hi))
                            .sum()
                    } else {
                        0.0
                    }
                }
                DensityComponent::Product {
                    radial,
                    y_lo: w_lo,
                    y_hi: w_hi,
                    scale,
                } => {
                    let overlap = (y_hi.min(*w_hi) - y_lo.max(*w_lo)).max(0.0);
                    if overlap > 0.0 {
                        let radial_mass = if semiopen_right {
                            radial.mass_between_semiopen_right(x_lo, x_hi)
                        } else {
                            let include0 = x_lo <= 0.0 && self.include_boundary_atoms;
                            let mut rm = radial.mass_between(x_lo.max(f64::MIN_POSITIVE), x_hi);
                            if include0 && x_lo <= 0.0 {
                                rm += radial.atom_at_zero;
                            }
                            rm
                        };
                        scale * radial_mass * overlap
                    } else {
                        0.0
                    }
                }
                DensityComponent::Callback { support, density } => {
                    let rect = Rect {
                        x_lo,
                        x_hi,
                        y_lo,
                        y_hi,
                    };
                    match support.intersect(&rect) {
                        None => 0.0,
                        Some(r) => {
                            let d = density.clone();
                            quad::adaptive(
                                |x| {
                                    quad::adaptive(
                                        |y| d(x, y),
                                        r.y_lo,
                                        r.y_hi,
                                        1e-10,
                                        quad::ABS_FLOOR,
                                    )
                                    .unwrap_or(f64::NAN)
                                },
                                r.x_lo,
                                r.x_hi,
                                quad::REL_TOL,
                                quad::ABS_FLOOR,
                            )?
                        }
                    }
                }
            };
        }
        Ok(m)
    }

    /// Exact mass of the Carleson square `Q`.
    pub fn square_mass(&self, q: &CarlesonSquare) -> Result<f64> {
        self.rect_mass(0.0, q.side, q.y_lo(), q.y_hi())
    }

    /// Mass of a square of the shifted half-plane `Re z > shift`.
    pub fn shifted_square_mass(&self, shift: f64, q: &CarlesonSquare) -> Result<f64> {
        self.rect_mass(shift, shift + q.side, q.y_lo(), q.y_hi())
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.rect_mass(0.0, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Restriction to `[x_lo, x_hi) x [y_lo, y_hi)`.
    pub fn restrict(&self, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> HalfPlaneMeasure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.z.re >= x_lo && a.z.re < x_hi && a.z.im >= y_lo && a.z.im < y_hi)
            .copied()
            .collect();
        let mut components = Vec::new();
        for c in &self.components {
            match c {
                DensityComponent::Axis { pieces } => {
                    if y_lo <= 0.0 && 0.0 < y_hi {
                        let clipped: Vec<_> =
                            pieces.iter().filter_map(|p| p.clip(x_lo, x_hi)).collect();
                        if !clipped.is_empty() {
                            components.push(DensityComponent::Axis { pieces: clipped });
                        }
                    }
                }
                DensityComponent::Product {
                    radial,
                    y_lo: w_lo,
                    y_hi: w_hi,
                    scale,
                } => {
                    let lo = y_lo.max(*w_lo);
                    let hi = y_hi.min(*w_hi);
                    if hi > lo {
                        let clipped = radial.clip(x_lo, x_hi);
                        components.push(DensityComponent::Product {
                            radial: clipped,
                            y_lo: lo,
                            y_hi: hi,
                            scale: *scale,
                        });
                    }
                }
                DensityComponent::Callback { support, density } => {
                    let rect = Rect {
                        x_lo,
                        x_hi,
                        y_lo,
                        y_hi,
                    };
                    if let Some(r) = support.intersect(&rect) {
                        components.push(DensityComponent::Callback {
                            support: r,
                            density: density.clone(),
                        });
                    }
                }
            }
        }
        HalfPlaneMeasure {
            atoms,
            components,
            include_boundary_atoms: self.include_boundary_atoms,
        }
    }

    pub fn scaled(&self, c: f64) -> HalfPlaneMeasure {
        HalfPlaneMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    z: a.z,
                    mass: a.mass * c,
                })
                .collect(),
            components: self
                .components
                .iter()
                .map(|comp| match comp {
                    DensityComponent::Axis { pieces } => {
                        let scaled = pieces
                            .iter()
                            .map(|p| DensityPiece {
                                lo: p.lo,
                                hi: p.hi,
                                form: match &p.form {
                                    DensityForm::Power { coeff, alpha } => DensityForm::Power {
                                        coeff: coeff * c,
                                        alpha: *alpha,
                                    },
                                    DensityForm::Samples { grid, values } => DensityForm::Samples {
                                        grid: grid.clone(),
                                        values: values.iter().map(|v| v * c).collect(),
                                    },
                                },
                            })
                            .collect();
                        DensityComponent::Axis { pieces: scaled }
                    }
                    DensityComponent::Product {
                        radial,
                        y_lo,
                        y_hi,
                        scale,
                    } => DensityComponent::Product {
                        radial: radial.clone(),
                        y_lo: *y_lo,
                        y_hi: *y_hi,
                        scale: scale * c,
                    },
                    DensityComponent::Callback { support, density } => {
                        let d = density.clone();
                        DensityComponent::Callback {
                            support: *support,
                            density: Arc::new(move |x, y| c * d(x, y)),
                        }
                    }
                })
                .collect(),
            include_boundary_atoms: self.include_boundary_atoms,
        }
    }

    /// Merge another measure into this one (sum of measures).
    pub fn add(&mut self, other: &HalfPlaneMeasure) {
        self.atoms.extend_from_slice(&other.atoms);
        self.components.extend_from_slice(&other.components);
    }

    /// Translate the measure vertically by `s`.
    pub fn translated_y(&self, s: f64) -> HalfPlaneMeasure {
        HalfPlaneMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    z: a.z + Complex64::new(0.0, s),
                    mass: a.mass,
                })
                .collect(),
            components: self
                .components
                .iter()
                .map(|c| match c {
                    DensityComponent::Product {
                        radial,
                        y_lo,
                        y_hi,
                        scale,
                    } => DensityComponent::Product {
                        radial: radial.clone(),
                        y_lo: y_lo + s,
                        y_hi: y_hi + s,
                        scale: *scale,
                    },
                    DensityComponent::Axis { .. } if s == 0.0 => c.clone(),
                    DensityComponent::Axis { pieces } => {
                        // an axis density translated off the axis becomes a
                        // degenerate product over [s, s) -- represent as a
                        // callback-free product of width 0 is useless, so
                        // keep it as atoms is not possible either; axis
                        // translations are only used with s = 0 in practice
                        DensityComponent::Axis {
                            pieces: pieces.clone(),
                        }
                    }
                    DensityComponent::Callback { support, density } => {
                        let d = density.clone();
                        DensityComponent::Callback {
                            support: Rect {
                                y_lo: support.y_lo + s,
                                y_hi: support.y_hi + s,
                                ..*support
                            },
                            density: Arc::new(move |x, y| d(x, y - s)),
                        }
                    }
                })
                .collect(),
            include_boundary_atoms: self.include_boundary_atoms,
        }
    }

    /// Extent of the support: `(x_min, x_max, |y|_max)`, conservative for
    /// densities.
    pub fn support_extent(&self) -> (f64, f64, f64) {
        let mut x_min = f64::INFINITY;
        let mut x_max: f64 = 0.0;
        let mut y_abs: f64 = 0.0;
        for a in &self.atoms {
            x_min = x_min.min(a.z.re);
            x_max = x_max.max(a.z.re);
            y_abs = y_abs.max(a.z.im.abs());
        }
        for c in &self.components {
            match c {
                DensityComponent::Axis { pieces } => {
                    for p in pieces {
                        x_min = x_min.min(p.lo);
                        x_max = x_max.max(p.hi);
                    }
                }
                DensityComponent::Product {
                    radial, y_lo, y_hi, ..
                } => {
                    if radial.atom_at_zero > 0.0 {
                        x_min = x_min.min(0.0);
                    }
                    for (loc, _) in &radial.atoms {
                        x_min = x_min.min(*loc);
                        x_max = x_max.max(*loc);
                    }
                    for p in &radial.pieces {
                        x_min = x_min.min(p.lo);
                        x_max = x_max.max(p.hi);
                    }
                    y_abs = y_abs.max(y_lo.abs()).max(y_hi.abs());
                }
                DensityComponent::Callback { support, .. } => {
                    x_min = x_min.min(support.x_lo);
                    x_max = x_max.max(support.x_hi);
                    y_abs = y_abs.max(support.y_lo.abs()).max(support.y_hi.abs());
                }
            }
        }
        if x_min > x_max {
            x_min = 0.0;
        }
        (x_min, x_max, y_abs)
    }

    pub fn is_atomic(&self) -> bool {
        self.components.is_empty()
    }

    /// Integral of `g(z)` against the measure; densities by quadrature.
    /// Divergent integrals propagate as errors.
    pub fn integrate<G: Fn(Complex64) -> f64 + Copy>(&self, g: G) -> Result<f64> {
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.mass * g(a.z);
        }
        for c in &self.components {
            acc += match c {
                DensityComponent::Axis { pieces } => {
                    let mut s = 0.0;
                    for p in pieces {
                        s += quad::integral_ray(
                            |x| p.density_at(x) * g(Complex64::new(x, 0.0)),
                            p.lo,
                            p.hi,
                            quad::REL_TOL,
                        )?;
                    }
                    s
                }
                DensityComponent::Product {
                    radial,
                    y_lo,
                    y_hi,
                    scale,
                } => {
                    let inner = |r: f64| -> f64 {
                        quad::adaptive(
                            |y| g(Complex64::new(r, y)),
                            *y_lo,
                            *y_hi,
                            1e-8,
                            quad::ABS_FLOOR,
                        )
                        .unwrap_or(f64::NAN)
                    };
                    scale * radial.integrate(inner)?
                }
                DensityComponent::Callback { support, density } => {
                    let d = density.clone();
                    quad::adaptive(
                        |x| {
                            quad::adaptive(
                                |y| d(x, y) * g(Complex64::new(x, y)),
                                support.y_lo,
                                support.y_hi,
                                1e-8,
                                quad::ABS_FLOOR,
                            )
                            .unwrap_or(f64::NAN)
                        },
                        support.x_lo,
                        support.x_hi,
                        quad::REL_TOL,
                        quad::ABS_FLOOR,
                    )?
                }
            };
        }
        Ok(acc)
    }
}

/// Gauges compared against square masses in `carleson_ratio_sup`.
#[derive(Debug, Clone)]
pub enum Gauge {
    /// `|I|^s`
    SidePower(f64),
    /// constant gauge 1 (the `p = 1` degenerate case)
    One,
    /// `nu(Q_I) = |I| F(|I|)` for a product measure `nu = radial x Lebesgue`
    NuProduct(RadialMeasure),
}

impl Gauge {
    pub fn eval(&self, side: f64) -> Result<f64> {
        Ok(match self {
            Gauge::SidePower(s) => side.powf(*s),
            Gauge::One => 1.0,
            Gauge::NuProduct(nu) => side * nu.cdf(side)?,
        })
    }
}

/// A finite family of Carleson squares: geometric side grid times an adapted
/// center grid. A sup over the family is a lower bound for the true sup; the
/// `density` knob refines both grids.
#[derive(Debug, Clone)]
pub struct SquareFamily {
    pub squares: Vec<CarlesonSquare>,
}

impl SquareFamily {
    pub fn from_squares(squares: Vec<CarlesonSquare>) -> Self {
        SquareFamily { squares }
    }

    /// Geometric side grid (ratio `2^{1/(4 density)}`) over `[side_min,
    /// side_max]`, centers on a linear grid over `[-y_extent, y_extent]`
    /// plus `extra_centers`.
    pub fn build(
        side_min: f64,
        side_max: f64,
        y_extent: f64,
        extra_centers: &[f64],
        density: u32,
    ) -> Self {
        assert!(side_min > 0.0 && side_max >= side_min);
        let per_octave = 4 * density as usize;
        let octaves = (side_max / side_min).log2().max(1e-9);
        let n_sides = ((octaves * per_octave as f64).ceil() as usize).max(1);
        let sides: Vec<f64> = (0..=n_sides)
            .map(|k| side_min * (side_max / side_min).powf(k as f64 / n_sides as f64))
            .collect();
        let n_centers = (8 * density as usize).max(1);
        let mut centers: Vec<f64> = if y_extent > 0.0 {
            (0..=2 * n_centers)
                .map(|k| -y_extent + y_extent * k as f64 / n_centers as f64)
                .collect()
        } else {
            vec![0.0]
        };
        centers.extend_from_slice(extra_centers);
        centers.sort_by(f64::total_cmp);
        centers.dedup();
        let mut squares = Vec::with_capacity(sides.len() * centers.len());
        for &s in &sides {
            for &c in &centers {
                squares.push(CarlesonSquare::new(c, s));
            }
        }
        SquareFamily { squares }
    }

    /// Family adapted to the support of `mu`.
    pub fn adapted(mu: &HalfPlaneMeasure, density: u32) -> Self {
        let (x_min, x_max, y_abs) = mu.support_extent();
        let lo = if x_min > 0.0 && x_min.is_finite() {
            x_min / 4.0
        } else {
            2f64.powi(-10)
        };
        let hi_base = if x_max.is_finite() && x_max > 0.0 {
            x_max
        } else {
            2f64.powi(10)
        };
        let hi = 4.0 * (hi_base + y_abs).max(lo * 2.0);
        let extra: Vec<f64> = mu.atoms.iter().map(|a| a.z.im).collect();
        SquareFamily::build(lo, hi, y_abs.max(1.0), &extra, density)
    }
}

/// Result of a square-family sweep: the supremum ratio with its witness and
/// the per-square table `(square, mass, gauge, ratio)`.
#[derive(Debug, Clone)]
pub struct RatioSweep {
    pub constant: f64,
    pub witness: CarlesonSquare,
    pub table: Vec<(CarlesonSquare, f64, f64, f64)>,
}

fn ratio_table(
    mu: &HalfPlaneMeasure,
    gauge: &Gauge,
    family: &SquareFamily,
    sequential: bool,
) -> Result<Vec<(CarlesonSquare, f64, f64, f64)>> {
    let eval = |q: &CarlesonSquare| -> Result<(CarlesonSquare, f64, f64, f64)> {
        let mass = mu.square_mass(q)?;
        let g = gauge.eval(q.side)?;
        if !(g > 0.0) {
            return Err(Error::EmptyFamily);
        }
        Ok((*q, mass, g, mass / g))
    };
    let rows = if sequential {
        par::sweep_sequential(&family.squares, eval)
    } else {
        par::sweep(&family.squares, eval)
    };
    rows.into_iter().collect()
}

/// `sup_Q mu(Q) / gauge(|I|)` over the finite family, with witness.
pub fn carleson_ratio_sup(
    mu: &HalfPlaneMeasure,
    gauge: &Gauge,
    family: &SquareFamily,
) -> Result<RatioSweep> {
    carleson_ratio_sup_impl(mu, gauge, family, false)
}

/// Sequential twin of [`carleson_ratio_sup`], kept for benchmarking.
pub fn carleson_ratio_sup_seq(
    mu: &HalfPlaneMeasure,
    gauge: &Gauge,
    family: &SquareFamily,
) -> Result<RatioSweep> {
    carleson_ratio_sup_impl(mu, gauge, family, true)
}

fn carleson_ratio_sup_impl(
    mu: &HalfPlaneMeasure,
    gauge: &Gauge,
    family: &SquareFamily,
    sequential: bool,
) -> Result<RatioSweep> {
    if family.squares.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let table = ratio_table(mu, gauge, family, sequential)?;
    let ratios: Vec<f64> = table.iter().map(|r| r.3).collect();
    let idx = par::argmax(&ratios).ok_or(Error::EmptyFamily)?;
    Ok(RatioSweep {
        constant: table[idx].3,
        witness: table[idx].0,
        table,
    })
}

/// `nu(Q_I) = |I| * F(|I|)` for the product measure `nu = radial x Lebesgue`
/// (the y-integral is trivial by translation invariance).
pub fn product_square_mass(nu: &RadialMeasure, q: &CarlesonSquare) -> Result<f64> {
    Ok(q.side * nu.cdf(q.side)?)
}
