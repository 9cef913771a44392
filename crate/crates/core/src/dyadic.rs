//! Adapted radial sequences, their geometric refinements, the induced tile
//! decomposition of a shifted half-plane, and the greedy slab-by-slab
//! splitting of a dominated measure into shifted Carleson measures.
//!
//! The splitting works against the atomized comparison measure: the radial
//! measure is collapsed onto the adapted radii, each slab contributing a
//! line measure `beta_n * delta_{a_n} (x) Lebesgue`. Collapsing only lowers
//! square masses, so domination by the original product measure implies the
//! precondition checked here.

use crate::error::{Error, Result};
use crate::measure::{HalfPlaneMeasure, RadialMeasure};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// Radii adapted to the cumulative function: mass between consecutive radii
/// grows geometrically and consecutive radii are uniformly separated.
#[derive(Debug, Clone)]
pub struct AdaptedSequence {
    /// index of `a[0]` in the doubly-infinite indexing
    pub n_lo: i32,
    pub a: Vec<f64>,
    /// mass of `[a_i, a_{i+1})`; in the atom-at-zero variant the first
    /// entry excludes the atom itself
    pub interval_masses: Vec<f64>,
    /// achieved separation `min (a_{i+1} - a_i) / a_{i+1}`
    pub c: f64,
    /// doubling constant the construction used
    pub r: f64,
    /// whether the measure has an atom at 0 (variant construction)
    pub atom_variant: bool,
    /// set when the defining supremum became infinite before the window end
    pub truncated: bool,
}

const BISECT_ITERS: usize = 90;
const SCAN_MIN: i32 = -100;
const SCAN_MAX: i32 = 100;

/// Largest radius whose cumulative mass stays at or below `threshold`, or
/// `None` when every radius qualifies (supremum infinite).
fn sup_radius(nu: &RadialMeasure, threshold: f64) -> Result<Option<f64>> {
    if nu.cdf(2f64.powi(SCAN_MAX))? <= threshold {
        return Ok(None);
    }
    let mut k = SCAN_MIN;
    if nu.cdf(2f64.powi(SCAN_MIN))? > threshold {
        // supremum below any representable probe radius
        return Ok(Some(0.0));
    }
    while nu.cdf(2f64.powi(k + 1))? <= threshold {
        k += 1;
    }
    let mut lo = 2f64.powi(k);
    let mut hi = 2f64.powi(k + 1);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nu.cdf(mid)? <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Build the adapted sequence over the index window `[n_min, n_max]`.
///
/// Without an atom at 0 the defining thresholds are `(2R)^{2n}`; with an
/// atom the sequence starts at `a_0 = 0` with thresholds
/// `(2R)^{2(n+1)} * nu({0})` and the window is clamped to `n >= 0`. The
/// sequence stops early wherever the supremum becomes infinite.
pub fn build_adapted_sequence(
    nu: &RadialMeasure,
    n_min: i32,
    n_max: i32,
) -> Result<AdaptedSequence> {
    if n_max < n_min {
        return Err(Error::EmptyWindow);
    }
    let grid = crate::measure::default_probe_grid();
    let info = crate::measure::doubling_constant(nu, &grid, 1e6)?;
    if info.exceeds_cap {
        return Err(Error::NotDoubling(info.constant));
    }
    let r = info.constant.max(1.0);
    let atom_variant = nu.atom_at_zero > 0.0;
    let (lo, base) = if atom_variant {
        (n_min.max(0), nu.atom_at_zero)
    } else {
        (n_min, 1.0)
    };
    let mut a = Vec::new();
    let mut truncated = false;
    if atom_variant {
        a.push(0.0);
    }
    let start = if atom_variant { lo.max(1) } else { lo };
    for n in start..=n_max {
        let exponent = if atom_variant { 2 * (n + 1) } else { 2 * n };
        let threshold = base * (2.0 * r).powi(exponent);
        match sup_radius(nu, threshold)? {
            Some(v) if v > 0.0 => {
                if a.last().is_some_and(|prev| v <= *prev) {
                    // threshold resolution exhausted; drop the collapsed index
                    continue;
                }
                a.push(v);
            }
            Some(_) => continue,
            None => {
                truncated = true;
                break;
            }
        }
    }
    if a.len() < if atom_variant { 1 } else { 2 } {
        return Err(Error::EmptyWindow);
    }
    let mut interval_masses = Vec::with_capacity(a.len().saturating_sub(1));
    for (i, w) in a.windows(2).enumerate() {
        let m = if atom_variant && i == 0 {
            // first interval excludes the atom itself: mass of (0, a_1)
            nu.cdf(w[1])? - nu.atom_at_zero
        } else {
            nu.cdf(w[1])? - nu.cdf(w[0])?
        };
        interval_masses.push(m);
    }
    let mut c = f64::INFINITY;
    for w in a.windows(2) {
        if w[1] > 0.0 {
            c = c.min((w[1] - w[0]) / w[1]);
        }
    }
    if !c.is_finite() {
        c = 1.0;
    }
    Ok(AdaptedSequence {
        n_lo: if atom_variant { 0 } else { lo },
        a,
        interval_masses,
        c,
        r,
        atom_variant,
        truncated,
    })
}

/// Geometric refinement of a radius sequence: consecutive ratios are forced
/// into `[1/(1-c), 1/(1-c)^2)` by inserting geometric midpoints.
#[derive(Debug, Clone)]
pub struct RefinedSequence {
    pub b: Vec<f64>,
    /// for each `b_j`, the index of the original radius it equals, if any
    pub parent: Vec<Option<usize>>,
    /// separation constant actually used (at most `1 - 1/sqrt(2)`)
    pub c: f64,
}

/// Refine `radii` (strictly increasing, positive) with separation constant
/// `c`, clamped to the tile-friendly value `1 - 1/sqrt(2)`.
pub fn refine_sequence(radii: &[f64], c: f64) -> Result<RefinedSequence> {
    if radii.len() < 2 || radii[0] <= 0.0 {
        return Err(Error::EmptyWindow);
    }
    let c = c.min(1.0 - FRAC_1_SQRT_2);
    let lower = 1.0 / (1.0 - c);
    let upper = lower * lower;
    let mut b = vec![radii[0]];
    let mut parent = vec![Some(0)];
    for (i, w) in radii.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        if ratio < lower * (1.0 - 1e-12) {
            return Err(Error::Schema {
                line: 0,
                msg: format!(
                    "radius ratio {ratio} below the separation bound {lower}; \
                     sequence not adapted"
                ),
            });
        }
        let mut l = 1usize;
        while ratio.powf(1.0 / l as f64) >= upper {
            l += 1;
        }
        let gamma = ratio.powf(1.0 / l as f64);
        for k in 1..l {
            b.push(w[0] * gamma.powi(k as i32));
            parent.push(None);
        }
        b.push(w[1]);
        parent.push(Some(i + 1));
    }
    for w in b.windows(2) {
        let ratio = w[1] / w[0];
        debug_assert!(
            ratio >= lower * (1.0 - 1e-9) && ratio < upper * (1.0 + 1e-9),
            "refinement ratio {ratio} outside [{lower}, {upper})"
        );
    }
    Ok(RefinedSequence { b, parent, c })
}

/// One tile `[x_lo, x_hi) x [y_lo, y_hi)` of generation `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tile {
    pub j: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// The tiling of `[b_0, b_last) x [-Y, Y)` by generation: each generation
/// `j` pairs the slab `[b_j, b_{j+1})` with the unique dyadic interval size
/// of bounded eccentricity.
#[derive(Debug, Clone)]
pub struct TileSet {
    pub b: Vec<f64>,
    /// dyadic interval size of each generation (a multiple of `sizes[0]`)
    pub sizes: Vec<f64>,
    /// vertical half-extent, a multiple of the largest interval size
    pub y_extent: f64,
}

fn dyadic_size_for(b_next: f64, s_min: f64) -> f64 {
    let l = (b_next / s_min).log2();
    let m = (l - 0.5).ceil();
    assert!(m >= -1e-9, "interval size below the minimal grid length");
    s_min * 2f64.powi(m.max(0.0) as i32)
}

/// Build the tile set for the refined sequence, truncated vertically to
/// (at least) `[-y_extent, y_extent)`.
pub fn build_tiles(refined: &RefinedSequence, y_extent: f64) -> TileSet {
    let b = refined.b.clone();
    let s_min = b[0];
    let sizes: Vec<f64> = b[1..]
        .iter()
        .map(|&b_next| {
            let s = dyadic_size_for(b_next, s_min);
            let ecc = b_next / s;
            assert!(
                ecc > FRAC_1_SQRT_2 * (1.0 - 1e-9) && ecc <= SQRT_2 * (1.0 + 1e-9),
                "eccentricity {ecc} out of range"
            );
            s
        })
        .collect();
    let s_max = sizes.last().copied().unwrap_or(s_min);
    let y = (y_extent / s_max).ceil().max(1.0) * s_max;
    TileSet {
        b,
        sizes,
        y_extent: y,
    }
}

impl TileSet {
    pub fn generations(&self) -> usize {
        self.sizes.len()
    }

    /// Dyadic intervals `[k s_j, (k+1) s_j)` of generation `j` covering the
    /// vertical extent.
    pub fn intervals(&self, j: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let s = self.sizes[j];
        let k_lo = (-self.y_extent / s).round() as i64;
        let k_hi = (self.y_extent / s).round() as i64;
        (k_lo..k_hi).map(move |k| (k as f64 * s, (k + 1) as f64 * s))
    }

    /// Generation-`j` intervals meeting `[y_lo, y_hi]`, clipped to the
    /// tiled extent. Intervals outside never carry measure mass, so every
    /// sweep that skips them is exact.
    pub fn active_intervals(
        &self,
        j: usize,
        y_lo: f64,
        y_hi: f64,
    ) -> impl Iterator<Item = (f64, f64)> + '_ {
        let s = self.sizes[j];
        let full_lo = (-self.y_extent / s).round() as i64;
        let full_hi = (self.y_extent / s).round() as i64;
        let k_lo = ((y_lo / s).floor() as i64).max(full_lo);
        let k_hi = ((y_hi / s).floor() as i64 + 1).min(full_hi);
        (k_lo..k_hi).map(move |k| (k as f64 * s, (k + 1) as f64 * s))
    }

    pub fn tiles(&self) -> Vec<Tile> {
        let mut out = Vec::new();
        for j in 0..self.generations() {
            for (y_lo, y_hi) in self.intervals(j) {
                out.push(Tile {
                    j,
                    x_lo: self.b[j],
                    x_hi: self.b[j + 1],
                    y_lo,
                    y_hi,
                });
            }
        }
        out
    }

    /// Carleson rectangles `(0, b_{j+1}) x I` of the family, as
    /// `(j, x_hi, y_lo, y_hi)`.
    pub fn family_squares(&self) -> Vec<(usize, f64, f64, f64)> {
        let mut out = Vec::new();
        for j in 0..self.generations() {
            for (y_lo, y_hi) in self.intervals(j) {
                out.push((j, self.b[j + 1], y_lo, y_hi));
            }
        }
        out
    }
}

/// Piecewise-constant line density on `[lo, hi)`: strictly increasing
/// breakpoints with one value per gap. Keeps the per-step density budget
/// compact even when the tiled extent is many orders of magnitude wider
/// than the support of the measure.
struct LineDensity {
    pts: Vec<f64>,
    vals: Vec<f64>,
}

impl LineDensity {
    fn uniform(lo: f64, hi: f64, v: f64) -> Self {
        LineDensity {
            pts: vec![lo + 0.0, hi + 0.0],
            vals: vec![v],
        }
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        for (i, v) in self.vals.iter().enumerate() {
            let a = self.pts[i].max(lo);
            let b = self.pts[i + 1].min(hi);
            if b > a {
                acc += v * (b - a);
            }
        }
        acc
    }

    fn split(&mut self, x: f64) {
        if let Err(i) = self.pts.binary_search_by(|p| p.total_cmp(&x)) {
            self.pts.insert(i, x);
            self.vals.insert(i - 1, self.vals[i - 1]);
        }
    }

    fn set(&mut self, lo: f64, hi: f64, v: f64) {
        let lo = (lo + 0.0).max(self.pts[0]);
        let hi = (hi + 0.0).min(*self.pts.last().unwrap());
        if hi <= lo {
            return;
        }
        self.split(lo);
        self.split(hi);
        let i = self
            .pts
            .binary_search_by(|p| p.total_cmp(&lo))
            .expect("breakpoint at lo");
        let j = self
            .pts
            .binary_search_by(|p| p.total_cmp(&hi))
            .expect("breakpoint at hi");
        self.pts.drain(i + 1..j);
        self.vals.splice(i..j, std::iter::once(v));
    }
}

/// Case tags of the per-tile capture rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileType {
    /// remaining line mass exceeds the tile mass: capture the tile fully
    Type1,
    /// positive but insufficient line mass: capture a proportional part
    Type2,
    /// line mass already exhausted over the base interval
    Type3,
}

/// Result of the slab decomposition `mu = sum_n mu_n`.
#[derive(Debug)]
pub struct Decomposition {
    /// absolute index of the first part
    pub n_start: i32,
    pub parts: Vec<HalfPlaneMeasure>,
    /// per processed tile: (step, generation, base interval lower edge, tag)
    pub type_log: Vec<(usize, usize, f64, TileType)>,
    /// per step: max over family rectangles of part mass / line mass
    pub domination: Vec<f64>,
    /// line densities used per step
    pub line_density: Vec<f64>,
    /// mass of `mu` never processed (left of the first radius, beyond the
    /// last radius, or outside the vertical extent)
    pub truncation_loss: f64,
}

/// Split `mu` into parts `mu_n`, each dominated by the line measure at
/// `a_n` and supported right of `a_n`. Precondition: `mu(Q) <= nu_line(Q)`
/// on the generation-0 rectangles of every step, where `nu_line` is the
/// atomized radial measure; violations are reported with a witness.
pub fn decompose(
    mu: &HalfPlaneMeasure,
    nu: &RadialMeasure,
    seq: &AdaptedSequence,
    y_extent: f64,
) -> Result<Decomposition> {
    let start = if seq.atom_variant { 1 } else { 0 };
    if seq.a.len() < start + 2 {
        return Err(Error::EmptyWindow);
    }
    let total = mu.total_mass()?;
    let mut cur = mu.restrict(seq.a[start], f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let mut parts = Vec::new();
    let mut type_log = Vec::new();
    let mut domination = Vec::new();
    let mut line_density = Vec::new();
    for s in start..seq.a.len() - 1 {
        // first step lumps all mass below a_{s+1} onto the line at a_s
        let d = if s == start {
            nu.cdf(seq.a[s + 1])?
        } else {
            nu.cdf(seq.a[s + 1])? - nu.cdf(seq.a[s])?
        };
        line_density.push(d);
        let refined = refine_sequence(&seq.a[s..], seq.c)?;
        let tiles = build_tiles(&refined, y_extent);
        // intervals outside the vertical extent of the support never carry
        // mass and never change their line-density budget (untouched cells
        // keep density d exactly), so every sweep below is restricted to
        // the intervals meeting the support
        let (_, _, y_bbox) = cur.support_extent();
        let y_bbox = y_bbox.min(tiles.y_extent);
        if s == start {
            // spot-check the domination hypothesis against the atomized
            // radial measure on the family rectangles of the finest step
            for j in 0..tiles.generations() {
                let b = tiles.b[j + 1];
                for (y_lo, y_hi) in tiles.active_intervals(j, -y_bbox, y_bbox) {
                    let next = seq
                        .a
                        .iter()
                        .copied()
                        .find(|&r| r >= b * (1.0 - 1e-12))
                        .unwrap_or(*seq.a.last().unwrap());
                    let line = nu.cdf(next)? * (y_hi - y_lo);
                    let m = mu.rect_mass(0.0, b, y_lo, y_hi)?;
                    if m > line * (1.0 + 1e-9) {
                        return Err(Error::CarlesonViolation {
                            center: 0.5 * (y_lo + y_hi),
                            side: b,
                            mu: m,
                            nu: line,
                        });
                    }
                }
            }
        }
        let s0 = tiles.sizes[0];
        let y = tiles.y_extent;
        let mut dens = LineDensity::uniform(-y, y, d);
        let mut part = HalfPlaneMeasure::zero();
        let mut remainder = HalfPlaneMeasure::zero();
        // generation 0: capture fully, checking the domination precondition
        let (b0, b1) = (tiles.b[0], tiles.b[1]);
        for (y_lo, y_hi) in tiles.active_intervals(0, -y_bbox, y_bbox) {
            let t = cur.rect_mass(b0, b1, y_lo, y_hi)?;
            let q = d * s0;
            if t > q * (1.0 + 1e-9) {
                return Err(Error::CarlesonViolation {
                    center: 0.5 * (y_lo + y_hi),
                    side: b1,
                    mu: t,
                    nu: q,
                });
            }
            let piece = cur.restrict(b0, b1, y_lo, y_hi);
            if !(piece.atoms.is_empty() && piece.components.is_empty()) {
                part.add(&piece);
            }
            let v = if q > 0.0 { d * (q - t).max(0.0) / q } else { 0.0 };
            dens.set(y_lo, y_hi, v);
            type_log.push((s, 0, y_lo, TileType::Type1));
        }
        // later generations: greedy capture against the remaining line mass
        for j in 1..tiles.generations() {
            let (x_lo, x_hi) = (tiles.b[j], tiles.b[j + 1]);
            for (y_lo, y_hi) in tiles.active_intervals(j, -y_bbox, y_bbox) {
                let nuq = dens.integral(y_lo, y_hi);
                let t = cur.rect_mass(x_lo, x_hi, y_lo, y_hi)?;
                let piece = cur.restrict(x_lo, x_hi, y_lo, y_hi);
                let empty = piece.atoms.is_empty() && piece.components.is_empty();
                if nuq > t {
                    if !empty {
                        part.add(&piece);
                    }
                    // the rule resets the whole base interval to a uniform
                    // fraction of the original line density
                    let f = (nuq - t) / nuq;
                    dens.set(y_lo, y_hi, d * f);
                    type_log.push((s, j, y_lo, TileType::Type1));
                } else if nuq > 0.0 {
                    let frac = nuq / t;
                    if !empty {
                        part.add(&piece.scaled(frac));
                        remainder.add(&piece.scaled(1.0 - frac));
                    }
                    dens.set(y_lo, y_hi, 0.0);
                    type_log.push((s, j, y_lo, TileType::Type2));
                } else {
                    if !empty {
                        remainder.add(&piece);
                    }
                    type_log.push((s, j, y_lo, TileType::Type3));
                }
            }
        }
        // domination constant over the family rectangles of this step;
        // rectangles away from the support hold no part mass
        let mut dom = 0.0f64;
        for j in 0..tiles.generations() {
            let x_hi = tiles.b[j + 1];
            for (y_lo, y_hi) in tiles.active_intervals(j, -y_bbox, y_bbox) {
                let m = part.rect_mass(0.0, x_hi, y_lo, y_hi)?;
                let line = d * (y_hi - y_lo);
                if line > 0.0 {
                    dom = dom.max(m / line);
                }
            }
        }
        domination.push(dom);
        parts.push(part);
        // mass beyond the tiled region stays in play for later steps only
        // if it is right of the next radius; collect it into the remainder
        let b_last = *tiles.b.last().unwrap();
        remainder.add(&cur.restrict(b_last, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY));
        remainder.add(&cur.restrict(b0, b_last, y, f64::INFINITY));
        remainder.add(&cur.restrict(b0, b_last, f64::NEG_INFINITY, -y));
        cur = remainder;
    }
    let captured: f64 = parts.iter().map(|p| p.total_mass().unwrap_or(0.0)).sum();
    Ok(Decomposition {
        n_start: seq.n_lo + start as i32,
        parts,
        type_log,
        domination,
        line_density,
        truncation_loss: (total - captured).max(0.0),
    })
}

/// Supremum over squares of the shifted half-plane `Re z > shift` of
/// `mu(Q) / |I|`.
pub fn shifted_carleson_constant(mu: &HalfPlaneMeasure, shift: f64, density: u32) -> Result<f64> {
    let (x_min, x_max, y_abs) = mu.support_extent();
    let lo = ((x_min - shift).max(0.0) / 4.0).max(2f64.powi(-20));
    let hi = (4.0 * ((x_max - shift).max(lo) + y_abs)).max(2.0 * lo);
    let per_octave = 4 * density as usize;
    let n_sides = (((hi / lo).log2().max(1e-9) * per_octave as f64).ceil() as usize).max(1);
    let mut best = 0.0f64;
    let n_centers = (8 * density as usize).max(1);
    let y_span = y_abs.max(1.0);
    let mut centers: Vec<f64> = (0..=2 * n_centers)
        .map(|k| -y_span + y_span * k as f64 / n_centers as f64)
        .collect();
    centers.extend(mu.atoms.iter().map(|a| a.z.im));
    for k in 0..=n_sides {
        let h = lo * (hi / lo).powf(k as f64 / n_sides as f64);
        for &c in &centers {
            let m = mu.rect_mass(shift, shift + h, c - 0.5 * h, c + 0.5 * h)?;
            best = best.max(m / h);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn adapted_sequence_lebesgue() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 3).unwrap();
        assert_relative_eq!(seq.r, 2.0, epsilon = 1e-12);
        for (n, a) in seq.a.iter().enumerate() {
            assert_relative_eq!(*a, 16f64.powi(n as i32), max_relative = 1e-12);
        }
        assert!(seq.c >= 0.5);
        assert_relative_eq!(seq.c, 15.0 / 16.0, max_relative = 1e-9);
        for w in seq.interval_masses.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio >= 2.0 * seq.r && ratio <= (2.0 * seq.r).powi(3));
            assert_relative_eq!(ratio, 16.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn adapted_sequence_bergman_weight() {
        let nu = RadialMeasure::power_law(1.0, 1.0);
        let seq = build_adapted_sequence(&nu, 0, 3).unwrap();
        assert_relative_eq!(seq.r, 4.0, epsilon = 1e-12);
        for (n, a) in seq.a.iter().enumerate() {
            let expected = (2.0 * 64f64.powi(n as i32)).sqrt();
            assert_relative_eq!(*a, expected, max_relative = 1e-12);
        }
        for w in seq.interval_masses.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio >= 8.0 && ratio <= 512.0);
            assert_relative_eq!(ratio, 64.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn adapted_sequence_hardy_stops() {
        let seq = build_adapted_sequence(&RadialMeasure::dirac_zero(), 0, 5).unwrap();
        assert!(seq.atom_variant);
        assert_eq!(seq.a, vec![0.0]);
        assert!(seq.truncated);
    }

    #[test]
    fn adapted_sequence_atom_variant() {
        let mut nu = RadialMeasure::lebesgue();
        nu.atom_at_zero = 1.0;
        let seq = build_adapted_sequence(&nu, 0, 3).unwrap();
        assert!(seq.atom_variant);
        assert_eq!(seq.a[0], 0.0);
        // F(r) = 1 + r, thresholds (2R)^{2(n+1)}: a_n = (2R)^{2(n+1)} - 1
        let tr = 2.0 * seq.r;
        for (i, a) in seq.a.iter().enumerate().skip(1) {
            assert_relative_eq!(*a, tr.powi(2 * (i as i32 + 1)) - 1.0, max_relative = 1e-9);
        }
        for w in seq.a.windows(2) {
            assert!(w[1] > 0.0 && (w[1] - w[0]) / w[1] >= 0.5 - 1e-12);
        }
        for w in seq.interval_masses.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio >= 2.0 * seq.r - 1e-9 && ratio <= (2.0 * seq.r).powi(3) + 1e-9);
        }
    }

    #[test]
    fn refinement_examples() {
        let r = refine_sequence(&[1.0, 16.0], 0.5).unwrap();
        assert_eq!(r.b.len(), 6);
        let gamma = 16f64.powf(0.2);
        for w in r.b.windows(2) {
            assert_relative_eq!(w[1] / w[0], gamma, max_relative = 1e-12);
        }
        let r = refine_sequence(&[1.0, SQRT_2], 1.0 - FRAC_1_SQRT_2).unwrap();
        assert_eq!(r.b, vec![1.0, SQRT_2]);
        let r = refine_sequence(&[1.0, 2.0, 4.0, 8.0], 1.0 - FRAC_1_SQRT_2).unwrap();
        assert_eq!(r.b.len(), 7);
        for w in r.b.windows(2) {
            assert_relative_eq!(w[1] / w[0], SQRT_2, max_relative = 1e-12);
        }
    }

    #[test]
    fn refinement_keeps_parents() {
        let radii = [1.0, 16.0, 256.0];
        let r = refine_sequence(&radii, 0.5).unwrap();
        let recovered: Vec<f64> = r
            .b
            .iter()
            .zip(&r.parent)
            .filter_map(|(b, p)| p.map(|_| *b))
            .collect();
        assert_eq!(recovered, radii);
    }

    #[test]
    fn tile_generation_sizes() {
        let refined = RefinedSequence {
            b: vec![1.0, 2.0, 4.0],
            parent: vec![Some(0), None, Some(1)],
            c: 1.0 - FRAC_1_SQRT_2,
        };
        let tiles = build_tiles(&refined, 8.0);
        assert_eq!(tiles.sizes, vec![2.0, 4.0]);
        // disjoint cover: total area equals the covered rectangle
        let area: f64 = tiles
            .tiles()
            .iter()
            .map(|t| (t.x_hi - t.x_lo) * (t.y_hi - t.y_lo))
            .sum();
        assert_relative_eq!(
            area,
            (4.0 - 1.0) * 2.0 * tiles.y_extent,
            max_relative = 1e-12
        );
    }

    #[test]
    fn tiles_pairwise_disjoint() {
        let refined = refine_sequence(&[1.0, 16.0, 256.0], 0.5).unwrap();
        let tiles = build_tiles(&refined, 20.0);
        let list = tiles.tiles();
        for (i, t) in list.iter().enumerate() {
            for u in &list[i + 1..] {
                let x_overlap = t.x_lo < u.x_hi && u.x_lo < t.x_hi;
                let y_overlap = t.y_lo < u.y_hi && u.y_lo < t.y_hi;
                assert!(!(x_overlap && y_overlap), "{t:?} overlaps {u:?}");
            }
        }
    }

    fn line_measure(x: f64, density: f64, y: f64) -> HalfPlaneMeasure {
        let mut radial = RadialMeasure::default();
        radial.atoms.push((x, density));
        HalfPlaneMeasure::product(radial, -y, y)
    }

    #[test]
    fn decompose_single_slab_is_identity() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 2).unwrap();
        // mu = the atomized first slab itself: full line mass at a_0
        let d0 = nu.cdf(seq.a[1]).unwrap();
        let mu = line_measure(seq.a[0], d0, 64.0);
        let dec = decompose(&mu, &nu, &seq, 48.0).unwrap();
        let m0 = dec.parts[0].total_mass().unwrap();
        let total = mu.total_mass().unwrap();
        // everything inside the vertical extent is captured in part 0
        let inside = mu
            .rect_mass(0.0, f64::INFINITY, -dec_extent(&dec), dec_extent(&dec))
            .unwrap();
        assert_relative_eq!(m0, inside, max_relative = 1e-12);
        for p in &dec.parts[1..] {
            assert_eq!(p.total_mass().unwrap(), 0.0);
        }
        assert!(dec.truncation_loss <= total - inside + 1e-9);
        assert!(dec.domination[0] <= 1.0 + 1e-9);
    }

    fn dec_extent(dec: &Decomposition) -> f64 {
        // recover the rounded vertical extent from the captured support
        let (_, _, y) = dec.parts[0].support_extent();
        y
    }

    #[test]
    fn decompose_deep_atom_goes_to_first_part() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 3).unwrap();
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(20.0, 3.0), 0.5);
        let dec = decompose(&mu, &nu, &seq, 32.0).unwrap();
        assert_relative_eq!(dec.parts[0].total_mass().unwrap(), 0.5, epsilon = 1e-12);
        for p in &dec.parts[1..] {
            assert_eq!(p.total_mass().unwrap(), 0.0);
        }
        assert!(dec.domination[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn decompose_conserves_and_supports() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 2).unwrap();
        // several atoms across slabs, masses small against the line measure
        let mu = HalfPlaneMeasure::from_atoms(vec![
            (Complex64::new(2.0, 1.0), 1.0),
            (Complex64::new(20.0, -5.0), 2.0),
            (Complex64::new(100.0, 9.0), 4.0),
        ]);
        let dec = decompose(&mu, &nu, &seq, 32.0).unwrap();
        let sum: f64 = dec.parts.iter().map(|p| p.total_mass().unwrap()).sum();
        assert_relative_eq!(sum, 7.0, max_relative = 1e-12);
        assert!(dec.truncation_loss <= 1e-12);
        for (i, p) in dec.parts.iter().enumerate() {
            let (x_min, _, _) = p.support_extent();
            if p.total_mass().unwrap() > 0.0 {
                assert!(x_min >= seq.a[i] - 1e-12, "part {i} leaks left");
            }
            assert!(dec.domination[i] <= 1.0 + 1e-9, "step {i}");
        }
    }

    #[test]
    fn decompose_splits_heavy_atom() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 2).unwrap();
        // one atom heavier than the first step's line measure can hold over
        // its base interval, but still dominated by the radial gauge
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(200.0, 0.0), 5000.0);
        let dec = decompose(&mu, &nu, &seq, 64.0).unwrap();
        let sum: f64 = dec.parts.iter().map(|p| p.total_mass().unwrap()).sum();
        assert_relative_eq!(sum, 5000.0, max_relative = 1e-12);
        // part 0 captures exactly the line mass of the atom's base interval
        // (density 16 over a dyadic interval of length 256); the rest moves
        // to the next step
        assert_relative_eq!(
            dec.parts[0].total_mass().unwrap(),
            4096.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            dec.parts[1].total_mass().unwrap(),
            904.0,
            max_relative = 1e-9
        );
        for (i, _) in dec.parts.iter().enumerate() {
            assert!(dec.domination[i] <= 1.0 + 1e-9, "step {i}");
        }
    }

    #[test]
    fn decompose_rejects_violating_measure() {
        let nu = RadialMeasure::lebesgue();
        let seq = build_adapted_sequence(&nu, 0, 2).unwrap();
        // enormous atom in the first slab: generation-0 precondition fails
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(2.0, 0.0), 1e9);
        assert!(matches!(
            decompose(&mu, &nu, &seq, 32.0),
            Err(Error::CarlesonViolation { .. })
        ));
    }

    #[test]
    fn shifted_constant_of_line_measure() {
        let mu = line_measure(16.0, 240.0, 4096.0);
        let c = shifted_carleson_constant(&mu, 1.0, 2).unwrap();
        assert!(c <= 240.0 * (1.0 + 1e-9), "constant {c}");
        assert!(c > 0.9 * 240.0, "constant {c}");
    }
}
