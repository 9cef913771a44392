//! Symbol-side boundedness certificate for little Hankel operators on
//! weighted Bergman-type spaces: the operator with symbol `b` is bounded
//! whenever the induced measure `|b'(z)|^2 Re z F(Re z) dA(z)` is Carleson
//! for the gauge `nu(Q_I) = |I| F(|I|)`, where `F` is the cumulative radial
//! weight. Symbols form a small descriptor algebra so the derivative is
//! exact — no numerical differentiation enters the sup.

use crate::embed::{EmbeddingVerdict, Witness};
use crate::error::{Error, Result};
use crate::measure::{
    carleson_ratio_sup, default_probe_grid, inverse_doubling_infimum, DensityComponent, Gauge,
    HalfPlaneMeasure, RadialMeasure, Rect, SquareFamily,
};
use crate::quad;
use num_complex::Complex64;
use std::cell::RefCell;
use std::sync::Arc;

/// Analytic symbol with an exactly evaluable derivative.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Constant(Complex64),
    /// `b(z) = z`
    Identity,
    /// `b(z) = log(1 + z)`
    Log1p,
    /// `b(z) = 1 / (lambda + z)`
    Kernel { lambda: f64 },
    Scale(Complex64, Box<Symbol>),
    Sum(Box<Symbol>, Box<Symbol>),
}

impl Symbol {
    /// `b'(z)`, exact per descriptor.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Constant(_) => Complex64::new(0.0, 0.0),
            Symbol::Identity => Complex64::new(1.0, 0.0),
            Symbol::Log1p => 1.0 / (Complex64::new(1.0, 0.0) + z),
            Symbol::Kernel { lambda } => {
                let d = z + lambda;
                -1.0 / (d * d)
            }
            Symbol::Scale(c, inner) => c * inner.derivative(z),
            Symbol::Sum(a, b) => a.derivative(z) + b.derivative(z),
        }
    }
}

/// The measure `|b'(z)|^2 Re z F(Re z) dA(z)` restricted to `extent`,
/// realized as a callback density (region masses by nested quadrature).
pub fn hankel_measure(b: &Symbol, nu: &RadialMeasure, extent: Rect) -> HalfPlaneMeasure {
    let b = b.clone();
    let nu = nu.clone();
    let density = Arc::new(move |x: f64, y: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let f = nu.cdf(x).unwrap_or(f64::NAN);
        let z = Complex64::new(x, y);
        b.derivative(z).norm_sqr() * x * f
    });
    let mut m = HalfPlaneMeasure::default();
    m.components.push(DensityComponent::Callback {
        support: extent,
        density,
    });
    m
}

/// Carleson-criterion verdict for the symbol-induced measure against the
/// gauge `nu(Q_I)`; a pass is a sufficiency certificate for boundedness of
/// the little Hankel operator with symbol `b` (and in the Hardy case, where
/// the radial weight is a unit atom at zero, the criterion is also
/// necessary).
pub fn check_hankel_bounded(
    b: &Symbol,
    nu: &RadialMeasure,
    density: u32,
    cap: f64,
) -> Result<EmbeddingVerdict> {
    let side_min = 2f64.powi(-3);
    let side_max = 2f64.powi(3);
    let y_extent = 8.0;
    let extent = Rect {
        x_lo: 0.0,
        x_hi: side_max,
        y_lo: -(y_extent + 0.5 * side_max),
        y_hi: y_extent + 0.5 * side_max,
    };
    let mu = hankel_measure(b, nu, extent);
    let family = SquareFamily::build(side_min, side_max, y_extent, &[], density);
    let sweep = carleson_ratio_sup(&mu, &Gauge::NuProduct(nu.clone()), &family)?;
    Ok(EmbeddingVerdict {
        criterion: "hankel-carleson".to_string(),
        constant: sweep.constant,
        witness: Some(Witness::Square(sweep.witness)),
        pass: sweep.constant <= cap,
        cap,
        notes: format!(
            "sup of induced mass over |I| F(|I|), sides in [{side_min}, {side_max}], density {density}"
        ),
    })
}

/// `sup_z |b'(z)| Re z` over the grid.
pub fn bloch_norm(b: &Symbol, grid: &[Complex64]) -> f64 {
    grid.iter()
        .map(|&z| b.derivative(z).norm() * z.re)
        .fold(0.0, f64::max)
}

/// Default Bloch grid: geometric real parts over `2^-10 .. 2^10` crossed
/// with linear imaginary offsets.
pub fn default_bloch_grid() -> Vec<Complex64> {
    let mut pts = Vec::new();
    for k in -40..=40 {
        let x = 2f64.powf(k as f64 / 4.0);
        for j in -8..=8i32 {
            pts.push(Complex64::new(x, j as f64 * x / 4.0));
        }
    }
    pts
}

/// Empirical check of the cumulative-weight integral inequality
/// `int_0^x F(s)/s ds <= C F(x)`: returns the sup ratio over `x_grid`
/// together with the predicted constant `gamma (M-1)/(gamma - 1)` from the
/// inverse-doubling witnesses `(M, gamma)`.
pub fn log_integral_bound(nu: &RadialMeasure, x_grid: &[f64]) -> Result<(f64, f64)> {
    let probe = default_probe_grid();
    let mut witness: Option<(f64, f64)> = None;
    for k in 1..=10 {
        let m = 2f64.powi(k);
        let gamma = inverse_doubling_infimum(nu, m, &probe)?;
        if gamma > 1.0 + 1e-9 {
            witness = Some((m, gamma));
            break;
        }
    }
    let (m, gamma) = witness.ok_or(Error::InverseDoublingFails)?;
    let predicted = gamma * (m - 1.0) / (gamma - 1.0);
    let failed: RefCell<Option<Error>> = RefCell::new(None);
    let mut sup = 0.0f64;
    for &x in x_grid {
        if !(x > 0.0) {
            return Err(Error::NegativeRadius(x));
        }
        let fx = nu.cdf(x)?;
        if fx <= 0.0 {
            return Err(Error::ZeroMassNearOrigin);
        }
        let integral = quad::adaptive(
            |s| match nu.cdf(s) {
                Ok(v) => v / s,
                Err(e) => {
                    *failed.borrow_mut() = Some(e);
                    f64::NAN
                }
            },
            0.0,
            x,
            quad::REL_TOL,
            quad::ABS_FLOOR,
        )?;
        if let Some(e) = failed.borrow_mut().take() {
            return Err(e);
        }
        sup = sup.max(integral / fx);
    }
    Ok((sup, predicted))
}
