//! Reproducing and Poisson kernels, test functions with exact Laplace
//! transforms, weighted norms on the half-line and the half-plane, and the
//! isometry check between them.
//!
//! Closed forms are always the primary path; quadrature is the fallback and
//! the cross-check.

use crate::error::{Error, Result};
use crate::measure::{DensityForm, RadialMeasure};
use crate::quad;
use num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_ur};
use std::cell::RefCell;
use std::f64::consts::PI;

/// Test functions on `(0, inf)` whose Laplace transforms are known in
/// closed form (except `Sampled`, which is integrated per linear segment).
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `e^{-lambda t}`, `Re lambda > 0` (complex rates allowed)
    Exponential(Complex64),
    /// `t^{n-1} e^{-lambda t}`
    MonomialExponential { n: u32, lambda: Complex64 },
    /// `lambda^{1/p} e^{-lambda t}`, normalized so the `L^p` norm is
    /// independent of `lambda`
    NormalizedKernel { lambda: f64, p: f64 },
    /// `sum_n alpha_n 2^{n/p} e^{-2^n t}` over `n = n_min ..`
    Lacunary {
        coeffs: Vec<f64>,
        n_min: i32,
        p: f64,
    },
    /// piecewise-linear interpolant of samples, zero outside the grid
    Sampled { grid: Vec<f64>, values: Vec<f64> },
    /// inverse transform of the truncated Herglotz integral of
    /// `phi(t) = |t|^{-1/2} (1 + log|t|)^{-1}` (`= 1` for `|t| <= 1`);
    /// parameterized by `log` of the truncation radius so that truncations
    /// far beyond floating-point range stay representable
    HerglotzPhi { log_trunc: f64 },
}

impl TestFunction {
    pub fn exponential(re: f64) -> Self {
        TestFunction::Exponential(Complex64::new(re, 0.0))
    }

    /// Pointwise value at `t > 0`. Not available for `HerglotzPhi` (its
    /// time-domain values are only defined through an oscillatory integral).
    pub fn eval_time(&self, t: f64) -> Result<Complex64> {
        Ok(match self {
            TestFunction::Exponential(lambda) => (-lambda * t).exp(),
            TestFunction::MonomialExponential { n, lambda } => {
                t.powi(*n as i32 - 1) * (-lambda * t).exp()
            }
            TestFunction::NormalizedKernel { lambda, p } => {
                Complex64::new(lambda.powf(1.0 / p) * (-lambda * t).exp(), 0.0)
            }
            TestFunction::Lacunary { coeffs, n_min, p } => {
                let mut acc = 0.0;
                for (i, a) in coeffs.iter().enumerate() {
                    let lam = 2f64.powi(n_min + i as i32);
                    acc += a * lam.powf(1.0 / p) * (-lam * t).exp();
                }
                Complex64::new(acc, 0.0)
            }
            TestFunction::Sampled { grid, values } => {
                let mut v = 0.0;
                for (g, val) in grid.windows(2).zip(values.windows(2)) {
                    if t >= g[0] && t <= g[1] && g[1] > g[0] {
                        v = val[0] + (val[1] - val[0]) * (t - g[0]) / (g[1] - g[0]);
                        break;
                    }
                }
                Complex64::new(v, 0.0)
            }
            TestFunction::HerglotzPhi { .. } => {
                return Err(Error::UnsupportedTestFunction(
                    "HerglotzPhi has no pointwise time-domain evaluator",
                ))
            }
        })
    }
}

/// Reproducing kernel of `H^2` on the right half-plane.
pub fn kernel(lambda: Complex64, z: Complex64) -> Complex64 {
    1.0 / (2.0 * PI * (z + lambda.conj()))
}

/// `||k_lambda||_{H^2}^2 = 1 / (4 pi Re lambda)`.
pub fn kernel_norm_sq(lambda: Complex64) -> f64 {
    1.0 / (4.0 * PI * lambda.re)
}

/// Poisson kernel of the right half-plane at `z = x + iy`, evaluated at the
/// boundary point `it`. Normalized so the total mass is 1.
pub fn poisson_kernel(z: Complex64, t: f64) -> f64 {
    let (x, y) = (z.re, z.im);
    x / (PI * (x * x + (y - t) * (y - t)))
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|k| k as f64).product()
}

/// Laplace transform `(Lf)(z) = int_0^inf e^{-tz} f(t) dt`. Closed form for
/// every variant except `Sampled` (exact per linear segment) and
/// `HerglotzPhi` (log-domain quadrature of the Herglotz integral).
pub fn laplace(f: &TestFunction, z: Complex64) -> Result<Complex64> {
    Ok(match f {
        TestFunction::Exponential(lambda) => 1.0 / (z + lambda),
        TestFunction::MonomialExponential { n, lambda } => {
            factorial(n - 1) / (z + lambda).powu(*n)
        }
        TestFunction::NormalizedKernel { lambda, p } => {
            Complex64::new(lambda.powf(1.0 / p), 0.0) / (z + lambda)
        }
        TestFunction::Lacunary { coeffs, n_min, p } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, a) in coeffs.iter().enumerate() {
                let lam = 2f64.powi(n_min + i as i32);
                acc += a * lam.powf(1.0 / p) / (z + lam);
            }
            acc
        }
        TestFunction::Sampled { grid, values } => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (g, val) in grid.windows(2).zip(values.windows(2)) {
                acc += segment_laplace(g[0], g[1], val[0], val[1], z)?;
            }
            acc
        }
        TestFunction::HerglotzPhi { log_trunc } => herglotz_transform(*log_trunc, z)?,
    })
}

/// Exact transform of the linear segment through `(t0, v0)`, `(t1, v1)`.
fn segment_laplace(t0: f64, t1: f64, v0: f64, v1: f64, z: Complex64) -> Result<Complex64> {
    if t1 <= t0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.norm() < 1e-8 {
        // transform degenerates to the plain integral of the segment
        return Ok(Complex64::new(0.5 * (v0 + v1) * (t1 - t0), 0.0));
    }
    let slope = (v1 - v0) / (t1 - t0);
    let e0 = (-z * t0).exp();
    let e1 = (-z * t1).exp();
    // int (a + b t) e^{-zt} dt with antiderivative
    // -(a + b t)/z e^{-zt} - b/z^2 e^{-zt}
    let a = v0 - slope * t0;
    let term = |t: f64, e: Complex64| -(a + slope * t) / z * e - slope / (z * z) * e;
    Ok(term(t1, e1) - term(t0, e0))
}

/// Herglotz integral `(1/pi) int_{-T}^{T} phi(t) / (z - it) dt` with
/// `T = e^{log_trunc}`, evaluated entirely in `u = log t` coordinates so the
/// truncation radius never has to be exponentiated.
fn herglotz_transform(log_trunc: f64, z: Complex64) -> Result<Complex64> {
    // |t| <= 1: phi = 1, closed form i (log(z - i) - log(z + i)) / pi
    let head = Complex64::new(0.0, 1.0)
        * ((z - Complex64::new(0.0, 1.0)).ln() - (z + Complex64::new(0.0, 1.0)).ln())
        / PI;
    // |t| > 1: t = e^u, paired with -t; integrand decays like e^{-3u/2}
    let hi = log_trunc.min(500.0);
    if hi <= 0.0 {
        return Ok(head);
    }
    let part = |re: bool| {
        quad::adaptive(
            |u| {
                let em = (-2.0 * u).exp();
                let w = 2.0 * z * (-1.5 * u).exp() / ((1.0 + u) * (z * z * em + 1.0));
                if re {
                    w.re
                } else {
                    w.im
                }
            },
            0.0,
            hi,
            quad::REL_TOL,
            quad::ABS_FLOOR,
        )
    };
    let tail = Complex64::new(part(true)?, part(false)?) / PI;
    Ok(head + tail)
}

/// `L^p(0, inf)` norm. Closed forms for the exponential family; quadrature
/// for `Lacunary` and `Sampled`; the exact truncation formula for
/// `HerglotzPhi` at `p = 2`.
pub fn lp_norm(f: &TestFunction, p: f64) -> Result<f64> {
    assert!(p >= 1.0);
    Ok(match f {
        TestFunction::Exponential(lambda) => (1.0 / (p * lambda.re)).powf(1.0 / p),
        TestFunction::MonomialExponential { n, lambda } => {
            let m = (*n as f64 - 1.0) * p;
            (gamma(m + 1.0) / (p * lambda.re).powf(m + 1.0)).powf(1.0 / p)
        }
        TestFunction::NormalizedKernel { lambda, p: p0 } => {
            lambda.powf(1.0 / p0 - 1.0 / p) * (1.0 / p).powf(1.0 / p)
        }
        TestFunction::Lacunary { .. } => {
            let fp = |t: f64| f.eval_time(t).map(|v| v.norm().powf(p)).unwrap_or(f64::NAN);
            quad::integral_0_inf(fp, quad::REL_TOL)?.powf(1.0 / p)
        }
        TestFunction::Sampled { grid, .. } => {
            let lo = grid.first().copied().unwrap_or(0.0);
            let hi = grid.last().copied().unwrap_or(0.0);
            let fp = |t: f64| f.eval_time(t).map(|v| v.norm().powf(p)).unwrap_or(f64::NAN);
            quad::adaptive(fp, lo, hi, quad::REL_TOL, quad::ABS_FLOOR)?.powf(1.0 / p)
        }
        TestFunction::HerglotzPhi { log_trunc } => {
            if p != 2.0 {
                return Err(Error::UnsupportedTestFunction(
                    "HerglotzPhi norm only available for p = 2",
                ));
            }
            // ||f_T||^2 on (0, inf) = (1/pi) ||phi_T||^2 on R
            //                        = (2/pi) (2 - 1/(1 + log T))
            ((2.0 / PI) * (2.0 - 1.0 / (1.0 + log_trunc))).sqrt()
        }
    })
}

/// Isometry weight `w(t) = 2 pi int_0^inf e^{-2rt} d nu(r)`.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    nu: RadialMeasure,
}

impl WeightFunction {
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::DivergentWeight(t));
        }
        let mut w = 2.0 * PI * self.nu.atom_at_zero;
        for (loc, mass) in &self.nu.atoms {
            w += 2.0 * PI * mass * (-2.0 * loc * t).exp();
        }
        for piece in &self.nu.pieces {
            w += 2.0
                * PI
                * match &piece.form {
                    DensityForm::Power { coeff, alpha } if *alpha > -1.0 => {
                        // int_lo^hi r^a e^{-2tr} dr via the regularized upper
                        // incomplete gamma
                        let a1 = alpha + 1.0;
                        let s = 2.0 * t;
                        let g = gamma(a1) / s.powf(a1);
                        let upper = |x: f64| {
                            if x <= 0.0 {
                                1.0
                            } else if x.is_infinite() {
                                0.0
                            } else {
                                gamma_ur(a1, x)
                            }
                        };
                        coeff * g * (upper(s * piece.lo) - upper(s * piece.hi))
                    }
                    // strongly singular power pieces (away from 0) and
                    // sampled pieces fall back to quadrature
                    _ => quad::adaptive(
                        |r| piece.density_at(r) * (-2.0 * r * t).exp(),
                        piece.lo,
                        piece.hi.min(piece.lo + 700.0 / t),
                        quad::REL_TOL,
                        quad::ABS_FLOOR,
                    )?,
                };
        }
        if !w.is_finite() {
            return Err(Error::DivergentWeight(t));
        }
        Ok(w)
    }
}

pub fn weight_from_measure(nu: &RadialMeasure) -> WeightFunction {
    WeightFunction { nu: nu.clone() }
}

/// Norm of `Lf` in the weighted Bergman space of `nu = radial x Lebesgue`:
/// for each radius the line integral `int |Lf(r + iy)|^p dy`, then the
/// radial integral against the measure. Divergence on either level is
/// reported as [`Error::DivergentNorm`].
pub fn zen_norm(f: &TestFunction, nu: &RadialMeasure, p: f64) -> Result<f64> {
    let inner_failure: RefCell<Option<Error>> = RefCell::new(None);
    let line = |r: f64| -> f64 {
        let res = quad::integral_real_line(
            |y| {
                laplace(f, Complex64::new(r, y))
                    .map(|v| v.norm().powf(p))
                    .unwrap_or(f64::NAN)
            },
            1e-8,
        );
        match res {
            Ok(v) => v,
            Err(e) => {
                inner_failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let total = nu.integrate(line);
    if let Some(e) = inner_failure.into_inner() {
        return Err(match e {
            Error::DivergentIntegral => Error::DivergentNorm,
            other => other,
        });
    }
    match total {
        Ok(v) => Ok(v.powf(1.0 / p)),
        Err(Error::DivergentIntegral) => Err(Error::DivergentNorm),
        Err(e) => Err(e),
    }
}

/// Fractional Sobolev norm `(||f||_2^2 + ||D^beta f||_2^2)^{1/2}` of a
/// uniformly sampled function, via the Fourier multiplier `|xi|^beta` on the
/// zero-extended signal.
pub fn sobolev_norm(grid: &[f64], values: &[f64], beta: f64) -> Result<f64> {
    assert!(beta >= 0.0);
    assert!(grid.len() == values.len() && grid.len() >= 4);
    let n = grid.len();
    let h = grid[1] - grid[0];
    for w in grid.windows(2) {
        assert!(
            ((w[1] - w[0]) - h).abs() < 1e-9 * h.abs(),
            "uniform grid required"
        );
    }
    let m = (4 * n).next_power_of_two();
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = values
        .iter()
        .map(|v| rustfft::num_complex::Complex::new(*v, 0.0))
        .chain(std::iter::repeat(rustfft::num_complex::Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let mut energy = 0.0;
    let mut deriv_energy = 0.0;
    let mut tail_energy = 0.0;
    for (k, c) in buf.iter().enumerate() {
        let freq = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let xi = 2.0 * PI * freq / (m as f64 * h);
        let e = c.norm_sqr();
        energy += e;
        let mult = if xi == 0.0 && beta == 0.0 {
            1.0
        } else {
            xi.abs().powf(beta)
        };
        deriv_energy += mult * mult * e;
        // tail relative to the original sampling rate: |freq| >= n/4 of the
        // unpadded grid corresponds to |freq| >= m/8 here (4x zero padding)
        if freq.abs() >= m as f64 / 8.0 {
            tail_energy += e;
        }
    }
    if energy > 0.0 && tail_energy / energy > 0.01 {
        return Err(Error::GridTooCoarse(100.0 * tail_energy / energy));
    }
    let scale = h / m as f64;
    Ok((scale * (energy + deriv_energy)).sqrt())
}

/// Outcome of the Laplace-transform isometry check between `L^2_w(0, inf)`
/// and the weighted Bergman space of `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PwOutcome {
    Finite { lhs: f64, rhs: f64, gap: f64 },
    BothDivergent,
}

/// Compare `||Lf||^2` in the Bergman space of `nu` against
/// `int_0^inf |f|^2 w dt`. Divergence must be consistent on both sides.
pub fn paley_wiener_check(nu: &RadialMeasure, f: &TestFunction) -> Result<PwOutcome> {
    let w = weight_from_measure(nu);
    let lhs = match zen_norm(f, nu, 2.0) {
        Ok(v) => Some(v * v),
        Err(Error::DivergentNorm) => None,
        Err(e) => return Err(e),
    };
    let wf = RefCell::new(None::<Error>);
    let rhs = quad::integral_0_inf(
        |t| match (f.eval_time(t), w.eval(t)) {
            (Ok(v), Ok(wt)) => v.norm_sqr() * wt,
            (Err(e), _) | (_, Err(e)) => {
                wf.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        quad::REL_TOL,
    );
    if let Some(e) = wf.into_inner() {
        return Err(e);
    }
    let rhs = match rhs {
        Ok(v) => Some(v),
        Err(Error::DivergentIntegral) => None,
        Err(e) => return Err(e),
    };
    match (lhs, rhs) {
        (Some(l), Some(r)) => {
            let gap = if r == 0.0 {
                l.abs()
            } else {
                (l - r).abs() / r
            };
            Ok(PwOutcome::Finite { lhs: l, rhs: r, gap })
        }
        (None, None) => Ok(PwOutcome::BothDivergent),
        _ => Err(Error::InconsistentDivergence),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_values() {
        let one = Complex64::new(1.0, 0.0);
        assert_relative_eq!(kernel(one, one).re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(kernel_norm_sq(one), 1.0 / (4.0 * PI), epsilon = 1e-15);
        let v = kernel(one, Complex64::new(0.0, 1.0));
        assert_relative_eq!(v.norm(), 1.0 / (2.0 * PI * 2f64.sqrt()), epsilon = 1e-14);
    }

    #[test]
    fn poisson_mass_and_identity() {
        assert_relative_eq!(
            poisson_kernel(Complex64::new(1.0, 0.0), 0.0),
            1.0 / PI,
            epsilon = 1e-15
        );
        let z = Complex64::new(2.0, 3.0);
        let mass = quad::integral_real_line(|t| poisson_kernel(z, t), quad::REL_TOL).unwrap();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-9);
        // p_lambda(t) = |k_lambda(it)|^2 / ||k_lambda||^2
        let lam = Complex64::new(1.0, 1.0);
        let t = 2.0;
        let lhs = poisson_kernel(lam, t);
        let k = kernel(lam, Complex64::new(0.0, t));
        let rhs = k.norm_sqr() / kernel_norm_sq(lam);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
        // symmetry about the height of z
        let z = Complex64::new(0.7, -1.3);
        for s in [0.1, 1.0, 4.0] {
            assert_relative_eq!(
                poisson_kernel(z, z.im + s),
                poisson_kernel(z, z.im - s),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn laplace_closed_forms() {
        let f = TestFunction::exponential(1.0);
        let v = laplace(&f, Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.5, epsilon = 1e-15);
        let f = TestFunction::MonomialExponential {
            n: 2,
            lambda: Complex64::new(1.0, 0.0),
        };
        let v = laplace(&f, Complex64::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 1.0, epsilon = 1e-15);
        let f = TestFunction::NormalizedKernel { lambda: 4.0, p: 2.0 };
        let v = laplace(&f, Complex64::new(4.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn laplace_closed_form_matches_sampled_quadrature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid: Vec<f64> = (0..6000).map(|k| k as f64 * 0.005).collect();
        for f in [
            TestFunction::exponential(1.0),
            TestFunction::MonomialExponential {
                n: 2,
                lambda: Complex64::new(1.5, 0.0),
            },
            TestFunction::NormalizedKernel { lambda: 2.0, p: 2.0 },
        ] {
            let values: Vec<f64> = grid.iter().map(|t| f.eval_time(*t).unwrap().re).collect();
            let sampled = TestFunction::Sampled {
                grid: grid.clone(),
                values,
            };
            for _ in 0..25 {
                let z = Complex64::new(rng.gen_range(0.5..4.0), rng.gen_range(-3.0..3.0));
                let exact = laplace(&f, z).unwrap();
                let approx = laplace(&sampled, z).unwrap();
                assert!(
                    (exact - approx).norm() / exact.norm() < 1e-4,
                    "{f:?} at {z}: {exact} vs {approx}"
                );
            }
        }
    }

    #[test]
    fn lp_norm_closed_forms() {
        let f = TestFunction::exponential(1.0);
        let n = lp_norm(&f, 2.0).unwrap();
        assert_relative_eq!(n * n, 0.5, epsilon = 1e-15);
        let f = TestFunction::NormalizedKernel { lambda: 8.0, p: 2.0 };
        assert_relative_eq!(lp_norm(&f, 2.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        let f = TestFunction::MonomialExponential {
            n: 2,
            lambda: Complex64::new(1.0, 0.0),
        };
        let n = lp_norm(&f, 2.0).unwrap();
        assert_relative_eq!(n * n, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn normalized_kernel_norm_is_rate_free() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let base = lp_norm(&TestFunction::NormalizedKernel { lambda: 1.0, p }, p).unwrap();
            for lambda in [0.25, 2.0, 64.0, 1e6] {
                let n = lp_norm(&TestFunction::NormalizedKernel { lambda, p }, p).unwrap();
                assert_relative_eq!(n, base, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn weight_closed_forms() {
        let w = weight_from_measure(&RadialMeasure::dirac_zero());
        assert_relative_eq!(w.eval(1.0).unwrap(), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(w.eval(17.0).unwrap(), 2.0 * PI, epsilon = 1e-14);
        let w = weight_from_measure(&RadialMeasure::lebesgue());
        assert_relative_eq!(w.eval(1.0).unwrap(), PI, epsilon = 1e-12);
        let w = weight_from_measure(&RadialMeasure::power_law(1.0, 1.0));
        assert_relative_eq!(w.eval(1.0).unwrap(), PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zen_norm_hardy_cases() {
        let f = TestFunction::exponential(1.0);
        let nu = RadialMeasure::dirac_zero();
        let n = zen_norm(&f, &nu, 2.0).unwrap();
        assert_relative_eq!(n * n, PI, epsilon = 1e-8);
        // k_1 = (1/2pi) L[e^{-t}], so ||k_1||^2 = pi / (2 pi)^2 = 1/(4 pi)
        let k1_sq = n * n / (4.0 * PI * PI);
        assert_relative_eq!(k1_sq, 1.0 / (4.0 * PI), epsilon = 1e-8);
    }

    #[test]
    fn zen_norm_divergence_flagged() {
        let f = TestFunction::exponential(1.0);
        let r = zen_norm(&f, &RadialMeasure::lebesgue(), 2.0);
        assert!(matches!(r, Err(Error::DivergentNorm)), "{r:?}");
    }

    #[test]
    fn sobolev_norm_limits() {
        let h = 0.02;
        let grid: Vec<f64> = (0..2048).map(|k| -20.0 + k as f64 * h).collect();
        let gauss: Vec<f64> = grid.iter().map(|t| (-t * t).exp()).collect();
        let l2_sq = (PI / 2.0).sqrt();
        let n0 = sobolev_norm(&grid, &gauss, 0.0).unwrap();
        assert_relative_eq!(n0, (2.0 * l2_sq).sqrt(), epsilon = 1e-6);
        // beta = 1: ||f'||^2 = int 4 t^2 e^{-2t^2} = sqrt(pi/2)
        let n1 = sobolev_norm(&grid, &gauss, 1.0).unwrap();
        assert_relative_eq!(n1 * n1, l2_sq + (PI / 2.0).sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn sobolev_scaling_law() {
        let beta = 0.75;
        let h = 0.01;
        let grid: Vec<f64> = (0..4096).map(|k| -20.48 + k as f64 * h).collect();
        let f: Vec<f64> = grid.iter().map(|t| (-t * t).exp()).collect();
        let f2: Vec<f64> = grid
            .iter()
            .map(|t| (-(2.0 * t) * (2.0 * t)).exp())
            .collect();
        let d = |vals: &[f64]| {
            let n = sobolev_norm(&grid, vals, beta).unwrap();
            let l2 = sobolev_norm(&grid, vals, 0.0).unwrap().powi(2) / 2.0;
            n * n - l2
        };
        assert_relative_eq!(d(&f2) / d(&f), 2f64.powf(2.0 * beta - 1.0), epsilon = 1e-4);
    }

    #[test]
    fn sobolev_coarse_grid_rejected() {
        let h = 0.5;
        let grid: Vec<f64> = (0..64).map(|k| -16.0 + k as f64 * h).collect();
        let spiky: Vec<f64> = (0..64).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(matches!(
            sobolev_norm(&grid, &spiky, 1.0),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn paley_wiener_examples() {
        let out = paley_wiener_check(&RadialMeasure::dirac_zero(), &TestFunction::exponential(1.0))
            .unwrap();
        match out {
            PwOutcome::Finite { lhs, rhs, gap } => {
                assert_relative_eq!(lhs, PI, epsilon = 1e-7);
                assert_relative_eq!(rhs, PI, epsilon = 1e-9);
                assert!(gap <= 1e-7);
            }
            other => panic!("{other:?}"),
        }
        let f = TestFunction::MonomialExponential {
            n: 2,
            lambda: Complex64::new(1.0, 0.0),
        };
        let out = paley_wiener_check(&RadialMeasure::lebesgue(), &f).unwrap();
        match out {
            PwOutcome::Finite { rhs, gap, .. } => {
                assert_relative_eq!(rhs, PI / 4.0, epsilon = 1e-8);
                assert!(gap <= 1e-6, "gap {gap}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn paley_wiener_consistent_divergence() {
        let out = paley_wiener_check(&RadialMeasure::lebesgue(), &TestFunction::exponential(1.0))
            .unwrap();
        assert_eq!(out, PwOutcome::BothDivergent);
    }

    #[test]
    fn herglotz_norm_formula() {
        let f = TestFunction::HerglotzPhi { log_trunc: 9.0 };
        let n = lp_norm(&f, 2.0).unwrap();
        assert_relative_eq!(n * n, (2.0 / PI) * (2.0 - 0.1), epsilon = 1e-15);
    }

    #[test]
    fn herglotz_transform_is_laplace_of_positive_function() {
        // F_T(x) on the positive real axis is real and positive (phi >= 0
        // even), and decreasing in x
        let f = TestFunction::HerglotzPhi { log_trunc: 5.0 };
        let mut prev = f64::INFINITY;
        for x in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = laplace(&f, Complex64::new(x, 0.0)).unwrap();
            assert!(v.im.abs() < 1e-10, "imaginary residue {v}");
            assert!(v.re > 0.0 && v.re < prev);
            prev = v.re;
        }
    }
}
