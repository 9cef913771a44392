//! Sector and strip geometry, the dyadic cell tiling of the half-plane,
//! balayage (Poisson sweep) and its dyadic counterpart, and the uncentered
//! Hardy--Littlewood maximal function.
//!
//! The dyadic cells are `T_{n,k} = (2^{n-1}, 2^n] x (k 2^n - 2^{n-1},
//! k 2^n + 2^{n-1}]`; atoms on a horizontal cell boundary belong to the
//! lower cell and are flagged in the mass table.

use crate::error::{Error, Result};
use crate::measure::HalfPlaneMeasure;
use crate::transforms::{laplace, poisson_kernel, TestFunction};
use std::f64::consts::PI;

/// An open sector `|arg z| < theta` in the right half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorSpec {
    pub theta: f64,
}

impl SectorSpec {
    pub fn new(theta: f64) -> Self {
        assert!(theta > 0.0 && theta < PI / 2.0, "sector angle out of range");
        SectorSpec { theta }
    }

    pub fn contains(&self, z: num_complex::Complex64) -> bool {
        z.re > 0.0 && z.im.abs() < z.re * self.theta.tan()
    }

    /// Whether the support of `mu` lies inside the sector (conservative for
    /// density components: their bounding rectangle must fit).
    pub fn supports(&self, mu: &HalfPlaneMeasure) -> bool {
        let tan = self.theta.tan();
        if mu.atoms.iter().any(|a| !self.contains(a.z)) {
            return false;
        }
        mu.components.iter().all(|c| {
            let (x_lo, _, y_lo, y_hi) = component_box(c);
            x_lo > 0.0 && y_lo.abs().max(y_hi.abs()) < x_lo * tan
        })
    }
}

/// A closed vertical strip `alpha1 <= Re z <= alpha2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSpec {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl StripSpec {
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        assert!(alpha1 > 0.0 && alpha2 >= alpha1, "strip bounds out of range");
        StripSpec { alpha1, alpha2 }
    }

    pub fn contains(&self, z: num_complex::Complex64) -> bool {
        self.alpha1 <= z.re && z.re <= self.alpha2
    }

    pub fn supports(&self, mu: &HalfPlaneMeasure) -> bool {
        if mu
            .atoms
            .iter()
            .any(|a| a.z.re < self.alpha1 || a.z.re > self.alpha2)
        {
            return false;
        }
        mu.components.iter().all(|c| {
            let (x_lo, x_hi, _, _) = component_box(c);
            x_lo >= self.alpha1 && x_hi <= self.alpha2
        })
    }
}

fn component_box(c: &crate::measure::DensityComponent) -> (f64, f64, f64, f64) {
    use crate::measure::DensityComponent::*;
    match c {
        Axis { pieces } => {
            let lo = pieces.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min);
            let hi = pieces
                .iter()
                .map(|p| p.hi)
                .fold(f64::NEG_INFINITY, f64::max);
            (lo, hi, 0.0, 0.0)
        }
        Product {
            radial,
            y_lo,
            y_hi,
            ..
        } => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            if radial.atom_at_zero > 0.0 {
                lo = 0.0;
                hi = 0.0;
            }
            for (r, _) in &radial.atoms {
                lo = lo.min(*r);
                hi = hi.max(*r);
            }
            for p in &radial.pieces {
                lo = lo.min(p.lo);
                hi = hi.max(p.hi);
            }
            (lo, hi, *y_lo, *y_hi)
        }
        Callback { support, .. } => (support.x_lo, support.x_hi, support.y_lo, support.y_hi),
    }
}

/// One cell `T_{n,k}` of the dyadic tiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicCell {
    pub n: i32,
    pub k: i64,
}

impl DyadicCell {
    pub fn x_lo(&self) -> f64 {
        2f64.powi(self.n - 1)
    }
    pub fn x_hi(&self) -> f64 {
        2f64.powi(self.n)
    }
    pub fn y_center(&self) -> f64 {
        self.k as f64 * 2f64.powi(self.n)
    }
    pub fn y_lo(&self) -> f64 {
        self.y_center() - 2f64.powi(self.n - 1)
    }
    pub fn y_hi(&self) -> f64 {
        self.y_center() + 2f64.powi(self.n - 1)
    }

    /// The base interval `I_{n,k}`; closed, as the indicator is defined.
    pub fn interval_contains(&self, t: f64) -> bool {
        (t - self.y_center()).abs() <= 2f64.powi(self.n - 1)
    }

    pub fn mass(&self, mu: &HalfPlaneMeasure) -> Result<f64> {
        mu.cell_mass(self.x_lo(), self.x_hi(), self.y_lo(), self.y_hi())
    }
}

/// Table of cell masses `mu(T_{n,k})` over a finite index window.
#[derive(Debug, Clone)]
pub struct CellTable {
    pub n_lo: i32,
    pub n_hi: i32,
    pub k_abs: i64,
    /// rows indexed by `n - n_lo`, columns by `k + k_abs`
    pub masses: Vec<Vec<f64>>,
    /// slab masses `mu(S_n)` per row
    pub slabs: Vec<f64>,
    /// slab mass not covered by the tabulated `k` range, per row
    pub out_of_range: Vec<f64>,
    /// set when an atom sits exactly on a horizontal cell boundary
    pub boundary_atoms: bool,
}

/// Tabulate `mu(T_{n,k})` for `n_lo <= n <= n_hi`, `|k| <= k_abs`, together
/// with the slab masses `mu(S_n)`.
pub fn cell_masses(mu: &HalfPlaneMeasure, n_lo: i32, n_hi: i32, k_abs: i64) -> Result<CellTable> {
    if n_hi < n_lo {
        return Err(Error::EmptyWindow);
    }
    let mut masses = Vec::new();
    let mut slabs = Vec::new();
    let mut out_of_range = Vec::new();
    let mut boundary_atoms = false;
    for n in n_lo..=n_hi {
        let half = 2f64.powi(n - 1);
        for a in &mu.atoms {
            if a.z.re > half && a.z.re <= 2.0 * half {
                let q = a.z.im / half;
                if q.fract() == 0.0 && (q as i64) % 2 != 0 {
                    boundary_atoms = true;
                }
            }
        }
        let mut row = Vec::with_capacity(2 * k_abs as usize + 1);
        let mut sum = 0.0;
        for k in -k_abs..=k_abs {
            let m = DyadicCell { n, k }.mass(mu)?;
            sum += m;
            row.push(m);
        }
        let slab = mu.cell_mass(half, 2.0 * half, f64::NEG_INFINITY, f64::INFINITY)?;
        masses.push(row);
        slabs.push(slab);
        out_of_range.push((slab - sum).max(0.0));
    }
    Ok(CellTable {
        n_lo,
        n_hi,
        k_abs,
        masses,
        slabs,
        out_of_range,
        boundary_atoms,
    })
}

/// Value of a Poisson sweep: divergence is an ordinary outcome here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sweep {
    Finite(f64),
    Divergent,
}

impl Sweep {
    pub fn finite(self) -> Option<f64> {
        match self {
            Sweep::Finite(v) => Some(v),
            Sweep::Divergent => None,
        }
    }
}

/// Balayage `S_mu(t) = int p_z(t) dmu(z)`: exact over atoms, quadrature
/// over densities.
pub fn balayage_eval(mu: &HalfPlaneMeasure, t: f64) -> Result<Sweep> {
    match mu.integrate(|z| poisson_kernel(z, t)) {
        Ok(v) => Ok(Sweep::Finite(v)),
        Err(Error::DivergentIntegral) => Ok(Sweep::Divergent),
        Err(e) => Err(e),
    }
}

/// Dyadic balayage `S^d_mu(t) = sum chi_{I_{n,k}}(t) mu(T_{n,k}) / 2^n`
/// over the given index window.
pub fn dyadic_balayage(
    mu: &HalfPlaneMeasure,
    t: f64,
    n_lo: i32,
    n_hi: i32,
    k_abs: i64,
) -> Result<f64> {
    if n_hi < n_lo {
        return Err(Error::EmptyWindow);
    }
    let mut acc = 0.0;
    for n in n_lo..=n_hi {
        let scale = 2f64.powi(n);
        let half = 0.5 * scale;
        // at most two intervals I_{n,k} contain t (they are closed)
        let k_min = ((t - half) / scale).ceil() as i64;
        let k_max = ((t + half) / scale).floor() as i64;
        for k in k_min..=k_max {
            if k.abs() > k_abs {
                continue;
            }
            let cell = DyadicCell { n, k };
            if cell.interval_contains(t) {
                acc += cell.mass(mu)? / scale;
            }
        }
    }
    Ok(acc)
}

/// Layer values of the dyadic balayage of a sectorial measure:
/// `S^d_{mu,k}(t) = sum_n chi_{I_n \ I_{n-1}}(t) mu(T_{n+k}) / 2^{n+k}`,
/// which equals `S^d_{mu,0}(2^k t)`. The scaling identity is verified per
/// call. Requires an opening angle below `arctan(1/2)` so that the support
/// lies in the central cells `T_n`.
pub fn sectorial_balayage_layers(
    mu: &HalfPlaneMeasure,
    sector: &SectorSpec,
    t: f64,
    k_max: u32,
) -> Result<Vec<f64>> {
    if sector.theta >= 0.5f64.atan() || !sector.supports(mu) {
        return Err(Error::NotSectorial);
    }
    let mut out = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let direct = layer_direct(mu, t, k as i32)?;
        let scaled = layer_zero(mu, 2f64.powi(k as i32) * t)?;
        debug_assert!(
            (direct - scaled).abs() <= 1e-12 * (1.0 + direct.abs()),
            "layer identity violated: {direct} vs {scaled}"
        );
        out.push(direct);
    }
    Ok(out)
}

/// `S^d_{mu,0}(s)`: the single term at the scale with `2^{n-2} < |s| <=
/// 2^{n-1}`; zero at `s = 0` (the annuli `I_n \ I_{n-1}` miss the origin).
fn layer_zero(mu: &HalfPlaneMeasure, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let n = (s.abs().log2().ceil() as i32) + 1;
    let cell = DyadicCell { n, k: 0 };
    Ok(cell.mass(mu)? / 2f64.powi(n))
}

fn layer_direct(mu: &HalfPlaneMeasure, t: f64, k: i32) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let n = (t.abs().log2().ceil() as i32) + 1;
    let cell = DyadicCell { n: n + k, k: 0 };
    Ok(cell.mass(mu)? / 2f64.powi(n + k))
}

/// Right-hand side of the pointwise upper estimate
/// `S_mu(t) <= C (1/pi) (sum_{j<0} 2^{2j} S^d_{mu,0}(2^j t) + S^d_mu(t))`,
/// with the central-cell form of `S^d_mu` valid for sectorial measures.
/// Sharp per-cell kernel maxima give the absolute constant
/// [`BALAYAGE_UPPER_FACTOR`]; the returned value is the bracket times
/// `1/pi`, without that factor.
/// Absolute constant making the dyadic upper estimate rigorous: for
/// `t` in `I_n \ I_{n-1}` and `z` in `T_k`, the Poisson kernel satisfies
/// `p_z(t) <= 64 * c_{n,k}` with `c_{n,k}` the coefficient of
/// `mu(T_k)` in the bracket of [`balayage_upper_bound`] (the worst case is
/// the cell `k = n - 1`, whose base interval touches `t`).
pub const BALAYAGE_UPPER_FACTOR: f64 = 64.0;

pub fn balayage_upper_bound(mu: &HalfPlaneMeasure, t: f64, depth: u32) -> Result<f64> {
    let mut acc = 0.0;
    for j in 1..=depth as i32 {
        acc += 2f64.powi(-2 * j) * layer_zero(mu, 2f64.powi(-j) * t)?;
    }
    for j in 0..=depth as i32 {
        acc += layer_zero(mu, 2f64.powi(j) * t)?;
    }
    Ok(acc / PI)
}

/// Uncentered Hardy--Littlewood maximal function of a nonnegative sampled
/// function at `t`: the best average over intervals with endpoints on the
/// grid (or at `t` itself) that contain `t`. The sampled function is read
/// as piecewise linear on its grid and zero outside.
pub fn maximal_function(grid: &[f64], values: &[f64], t: f64) -> f64 {
    assert_eq!(grid.len(), values.len());
    assert!(grid.len() >= 2, "need at least two samples");
    // cumulative trapezoidal integral along the grid
    let mut cum = vec![0.0f64; grid.len()];
    for i in 1..grid.len() {
        cum[i] = cum[i - 1] + 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
    }
    let integral_to = |x: f64| -> f64 {
        if x <= grid[0] {
            return 0.0;
        }
        if x >= *grid.last().unwrap() {
            return *cum.last().unwrap();
        }
        let i = grid.partition_point(|&g| g <= x) - 1;
        let h = x - grid[i];
        let slope = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        cum[i] + values[i] * h + 0.5 * slope * h * h
    };
    let mut left: Vec<f64> = grid.iter().copied().filter(|&g| g < t).collect();
    left.push(t);
    let mut right: Vec<f64> = grid.iter().copied().filter(|&g| g > t).collect();
    right.insert(0, t);
    let mut best = 0.0f64;
    for &a in &left {
        for &b in &right {
            if b > a {
                best = best.max((integral_to(b) - integral_to(a)) / (b - a));
            }
        }
    }
    best
}

/// Empirical constant in the pointwise domination of the Laplace transform
/// on dyadic cells: the largest observed value of
/// `|Lf(z)| / (2^{-n+1} Mf(2^{-n+1}))` over sample points `z` in `T_n`.
pub fn laplace_maximal_constant(
    grid: &[f64],
    values: &[f64],
    n_lo: i32,
    n_hi: i32,
) -> Result<f64> {
    let f = TestFunction::Sampled {
        grid: grid.to_vec(),
        values: values.to_vec(),
    };
    let mut worst = 0.0f64;
    for n in n_lo..=n_hi {
        let half = 2f64.powi(n - 1);
        let m = maximal_function(grid, values, 2f64.powi(-n + 1));
        let bound = 2f64.powi(-n + 1) * m;
        if bound == 0.0 {
            continue;
        }
        for &(fx, fy) in &[(1.0, 0.0), (1.0, 0.9), (1.0, -0.9), (1.9, 0.0), (1.9, 0.9)] {
            let z = num_complex::Complex64::new(fx * half, fy * half);
            let lf = laplace(&f, z)?.norm();
            worst = worst.max(lf / bound);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::RadialMeasure;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cell_table_single_atom() {
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.5, 0.0), 1.0);
        let table = cell_masses(&mu, -2, 4, 4).unwrap();
        for (i, row) in table.masses.iter().enumerate() {
            let n = table.n_lo + i as i32;
            for (j, &m) in row.iter().enumerate() {
                let k = j as i64 - table.k_abs;
                if n == 1 && k == 0 {
                    assert_eq!(m, 1.0);
                } else {
                    assert_eq!(m, 0.0, "unexpected mass in T_({n},{k})");
                }
            }
        }
        assert!(!table.boundary_atoms);
    }

    #[test]
    fn slab_masses_inverse_sqrt() {
        let mu = HalfPlaneMeasure::inverse_sqrt_on_ray();
        let table = cell_masses(&mu, 1, 6, 2).unwrap();
        for (i, &s) in table.slabs.iter().enumerate() {
            let n = (1 + i) as i32;
            let expected = 2.0 * (2f64.powf(n as f64 / 2.0) - 2f64.powf((n - 1) as f64 / 2.0));
            assert_relative_eq!(s, expected, max_relative = 1e-9);
            assert!(table.out_of_range[i] <= 1e-12);
        }
    }

    #[test]
    fn row_sums_match_slabs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let atoms: Vec<(Complex64, f64)> = (0..60)
            .map(|_| {
                let x = rng.gen_range(0.6..7.9);
                let y = rng.gen_range(-3.0..3.0);
                (Complex64::new(x, y), rng.gen_range(0.1..1.0))
            })
            .collect();
        let mu = HalfPlaneMeasure::from_atoms(atoms);
        let table = cell_masses(&mu, -1, 3, 16).unwrap();
        for (i, row) in table.masses.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert_relative_eq!(sum, table.slabs[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_atom_flagged_and_assigned_low() {
        // y = 1 is the boundary between T_{1,0} and T_{1,1}
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.5, 1.0), 1.0);
        let table = cell_masses(&mu, 1, 1, 2).unwrap();
        assert!(table.boundary_atoms);
        let row = &table.masses[0];
        assert_eq!(row[(table.k_abs) as usize], 1.0); // k = 0
        assert_eq!(row[(table.k_abs + 1) as usize], 0.0); // k = 1
    }

    #[test]
    fn balayage_point_masses() {
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.0, 0.0), 1.0);
        let s = balayage_eval(&mu, 0.0).unwrap().finite().unwrap();
        assert_relative_eq!(s, 1.0 / std::f64::consts::PI, max_relative = 1e-12);

        let mu = HalfPlaneMeasure::from_atoms(vec![
            (Complex64::new(1.0, 0.0), 1.0),
            (Complex64::new(1.0, 2.0), 1.0),
        ]);
        let s = balayage_eval(&mu, 1.0).unwrap().finite().unwrap();
        assert_relative_eq!(s, 1.0 / std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn balayage_vertical_segment() {
        let mut radial = RadialMeasure::default();
        radial.atoms.push((1.0, 1.0));
        let mu = HalfPlaneMeasure::product(radial, 0.0, 1.0);
        let s = balayage_eval(&mu, 0.0).unwrap().finite().unwrap();
        assert_relative_eq!(s, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn balayage_translation_covariance() {
        let mu = HalfPlaneMeasure::from_atoms(vec![
            (Complex64::new(0.7, -0.2), 1.0),
            (Complex64::new(2.5, 1.4), 0.3),
        ]);
        let shifted = mu.translated_y(0.8);
        for &t in &[-1.0, 0.0, 0.5, 3.0] {
            let a = balayage_eval(&shifted, t).unwrap().finite().unwrap();
            let b = balayage_eval(&mu, t - 0.8).unwrap().finite().unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn dyadic_balayage_examples() {
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.5, 0.0), 1.0);
        assert_relative_eq!(dyadic_balayage(&mu, 0.0, -4, 8, 16).unwrap(), 0.5);
        assert_eq!(dyadic_balayage(&mu, 5.0, -4, 8, 16).unwrap(), 0.0);
    }

    #[test]
    fn dyadic_below_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let sector = SectorSpec::new(0.4);
        let atoms: Vec<(Complex64, f64)> = (0..40)
            .map(|_| {
                let x: f64 = rng.gen_range(0.1..20.0);
                let y = rng.gen_range(-0.9..0.9) * x * sector.theta.tan();
                (Complex64::new(x, y), rng.gen_range(0.1..1.0))
            })
            .collect();
        let mu = HalfPlaneMeasure::from_atoms(atoms);
        assert!(sector.supports(&mu));
        let mut max_ratio = 0.0f64;
        for i in 0..100 {
            let t = -8.0 + 16.0 * i as f64 / 99.0;
            let sweep = balayage_eval(&mu, t).unwrap().finite().unwrap();
            let dyadic = dyadic_balayage(&mu, t, -12, 12, 64).unwrap();
            assert!(
                dyadic <= 2.0 * std::f64::consts::PI * sweep * (1.0 + 1e-12),
                "dyadic balayage exceeds 2 pi sweep at t = {t}"
            );
            if sweep > 0.0 {
                max_ratio = max_ratio.max(dyadic / sweep);
            }
        }
        assert!(max_ratio <= 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn layer_values_and_scaling() {
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.5, 0.0), 1.0);
        let sector = SectorSpec::new(0.2);
        // t = 3/4 lies in I_1 \ I_0, picking up T_1 at layer 0
        let layers = sectorial_balayage_layers(&mu, &sector, 0.75, 3).unwrap();
        assert_relative_eq!(layers[0], 0.5);
        for (k, &v) in layers.iter().enumerate() {
            let scaled = super::layer_zero(&mu, 2f64.powi(k as i32) * 0.75).unwrap();
            assert_eq!(v, scaled);
        }
        // the annuli miss the origin, so every layer vanishes at t = 0
        let at_zero = sectorial_balayage_layers(&mu, &sector, 0.0, 3).unwrap();
        assert!(at_zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layers_reject_wide_sector() {
        let mu = HalfPlaneMeasure::single_atom(Complex64::new(1.0, 0.9), 1.0);
        let sector = SectorSpec::new(1.1);
        assert!(matches!(
            sectorial_balayage_layers(&mu, &sector, 0.5, 2),
            Err(Error::NotSectorial)
        ));
        let narrow = SectorSpec::new(0.3);
        assert!(matches!(
            sectorial_balayage_layers(&mu, &narrow, 0.5, 2),
            Err(Error::NotSectorial)
        ));
    }

    #[test]
    fn upper_estimate_dominates_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let sector = SectorSpec::new(0.3);
        let atoms: Vec<(Complex64, f64)> = (0..30)
            .map(|_| {
                let x: f64 = rng.gen_range(0.2..30.0);
                let y = rng.gen_range(-0.9..0.9) * x * sector.theta.tan();
                (Complex64::new(x, y), rng.gen_range(0.1..1.0))
            })
            .collect();
        let mu = HalfPlaneMeasure::from_atoms(atoms);
        let mut worst = 0.0f64;
        for i in 0..25 {
            let t = 0.05 + 12.0 * i as f64 / 24.0;
            let sweep = balayage_eval(&mu, t).unwrap().finite().unwrap();
            let bound = balayage_upper_bound(&mu, t, 40).unwrap();
            assert!(
                sweep <= BALAYAGE_UPPER_FACTOR * bound * (1.0 + 1e-9),
                "upper estimate fails at t = {t}: sweep {sweep}, bound {bound}"
            );
            if bound > 0.0 {
                worst = worst.max(sweep / bound);
            }
        }
        // the bracket alone is usually within a small factor of the sweep
        assert!(worst <= 8.0, "observed ratio {worst} unexpectedly large");
    }

    #[test]
    fn maximal_function_indicator() {
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        let values = vec![1.0; grid.len()];
        assert_relative_eq!(maximal_function(&grid, &values, 2.0), 0.5);
        assert_relative_eq!(maximal_function(&grid, &values, 0.5), 1.0);
    }

    #[test]
    fn maximal_function_homogeneous_and_consistent() {
        let grid: Vec<f64> = (0..=64).map(|i| i as f64 / 8.0).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = grid.iter().map(|_| rng.gen_range(0.0..2.0)).collect();
        let scaled: Vec<f64> = values.iter().map(|v| 3.0 * v).collect();
        for &t in &[0.3, 1.7, 4.0, 9.5] {
            let m = maximal_function(&grid, &values, t);
            assert_relative_eq!(maximal_function(&grid, &scaled, t), 3.0 * m, epsilon = 1e-12);
            // lower-bound consistency against one explicit interval
            let a = 0.0;
            let b = 8.0f64.max(t + 0.125);
            let avg = {
                let f = |x: f64| -> f64 {
                    if x <= 0.0 || x >= 8.0 {
                        return 0.0;
                    }
                    let i = (x * 8.0) as usize;
                    let h = x - grid[i];
                    values[i] + (values[i + 1] - values[i]) * h / (grid[i + 1] - grid[i])
                };
                crate::quad::integrate(f, a, b.min(8.0)).unwrap() / (b - a)
            };
            assert!(m >= avg - 1e-6, "maximal value below a tested average");
        }
    }

    #[test]
    fn laplace_domination_constant_is_moderate() {
        let grid: Vec<f64> = (0..=128).map(|i| i as f64 / 16.0).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let values: Vec<f64> = grid.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
        let c = laplace_maximal_constant(&grid, &values, -2, 3).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert!(c <= 16.0, "observed constant {c} unexpectedly large");
    }
}
