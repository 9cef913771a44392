//! Admissibility of scalar control operators for diagonal semigroups.
//!
//! A diagonal system with eigenvalues in the open left half-plane and
//! control coefficients `b_k` is admissible exactly when the Laplace
//! transform maps the input space continuously into `L^q` of the atomic
//! measure with mass `|b_k|^q` at `-lambda_k`. This module builds that
//! measure and dispatches to the embedding checks of the matching exponent
//! regime, reporting whether the regime's criterion is an equivalence or
//! only necessary.

use crate::embed::{
    check_necessary_power_bound, check_pprime_le_q, check_sectorial_plq, check_sectorial_qgep,
    check_strip, check_zen_embedding, select_kernel_power, CheckConfig, EmbeddingVerdict,
    ExponentPair,
};
use crate::balayage::{SectorSpec, StripSpec};
use crate::error::{Error, Result};
use crate::measure::{default_probe_grid, doubling_constant, HalfPlaneMeasure, RadialMeasure};
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Finite diagonal system: eigenvalues in the open left half-plane, control
/// coefficients, and the Riesz-basis exponent `q` of the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSystem {
    pub eigenvalues: Vec<Complex64>,
    pub controls: Vec<Complex64>,
    pub q: f64,
}

impl DiagonalSystem {
    pub fn new(eigenvalues: Vec<Complex64>, controls: Vec<Complex64>, q: f64) -> Self {
        assert_eq!(eigenvalues.len(), controls.len());
        assert!(q >= 1.0);
        DiagonalSystem {
            eigenvalues,
            controls,
            q,
        }
    }
}

/// Input space of the control: `L^p(0, inf)` or the weighted `L^2` space
/// whose Laplace image is the Bergman-type space of the radial weight.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpace {
    Lp { p: f64 },
    WeightedL2 { nu: RadialMeasure },
}

/// Input space for fractional (`alpha`-)admissibility: the power weight
/// `w(t) = t^alpha` realized through the radial measure `c r^{-alpha-1}`
/// whose exponential moment reproduces it exactly. Only the window
/// `-1 < alpha < 0` inverts within the built-in power-law family.
pub fn power_weight_space(alpha: f64) -> Result<InputSpace> {
    if !(-1.0 < alpha && alpha < 0.0) {
        return Err(Error::UnsupportedMeasure(
            "power-weight inversion is available for exponents in (-1, 0) only",
        ));
    }
    let c = 2f64.powf(-alpha) / (2.0 * PI * gamma(-alpha));
    Ok(InputSpace::WeightedL2 {
        nu: RadialMeasure::power_law(c, -alpha - 1.0),
    })
}

/// The measure `sum_k |b_k|^q delta_{-lambda_k}`, with coinciding
/// eigenvalues merged into a single atom.
pub fn system_measure(sys: &DiagonalSystem) -> Result<HalfPlaneMeasure> {
    let mut atoms: Vec<(Complex64, f64)> = Vec::with_capacity(sys.eigenvalues.len());
    for (lam, b) in sys.eigenvalues.iter().zip(&sys.controls) {
        if lam.re >= 0.0 {
            return Err(Error::EigenvalueInRightHalfPlane(*lam));
        }
        let z = -lam;
        let mass = b.norm().powf(sys.q);
        if let Some(existing) = atoms.iter_mut().find(|(w, _)| *w == z) {
            existing.1 += mass;
        } else {
            atoms.push((z, mass));
        }
    }
    Ok(HalfPlaneMeasure::from_atoms(atoms))
}

/// Admissibility verdict with the regime that produced it.
#[derive(Debug, Clone)]
pub struct AdmissReport {
    pub measure: HalfPlaneMeasure,
    /// which embedding criterion the system was routed to
    pub regime: String,
    /// whether the routed criterion is an equivalence (not just necessary)
    pub sufficiency_certified: bool,
    pub verdicts: Vec<EmbeddingVerdict>,
    /// all condition constants within the configured cap
    pub admissible: bool,
}

fn spectrum_sector(mu: &HalfPlaneMeasure) -> Option<SectorSpec> {
    let mut theta: f64 = 0.0;
    for a in &mu.atoms {
        if a.z.re <= 0.0 {
            return None;
        }
        theta = theta.max((a.z.im.abs() / a.z.re).atan());
    }
    let theta = 1.05 * theta + 1e-6;
    (theta < 0.5 * PI).then(|| SectorSpec::new(theta))
}

fn spectrum_strip(mu: &HalfPlaneMeasure) -> Option<StripSpec> {
    let res: Vec<f64> = mu.atoms.iter().map(|a| a.z.re).collect();
    let lo = res.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = res.iter().copied().fold(0.0f64, f64::max);
    (lo.is_finite() && lo > 0.0 && hi >= lo).then(|| StripSpec::new(lo, hi))
}

/// Route the system to the embedding criterion of its exponent/support
/// regime and aggregate the verdicts.
pub fn admissibility_verdict(
    sys: &DiagonalSystem,
    space: &InputSpace,
    cfg: &CheckConfig,
) -> Result<AdmissReport> {
    let mu = system_measure(sys)?;
    let q = sys.q;
    let (regime, certified, verdicts) = match space {
        InputSpace::WeightedL2 { nu } => {
            let info = doubling_constant(nu, &default_probe_grid(), 1e6)?;
            let n = select_kernel_power(info.constant, 2.0);
            let v = check_zen_embedding(&mu, nu, 2.0, n, cfg)?;
            ("weighted-l2-zen".to_string(), true, v)
        }
        InputSpace::Lp { p } => {
            let pq = ExponentPair::new(*p, q);
            let pprime = pq.p_conjugate();
            if *p > 1.0 && *p <= 2.0 && pprime <= q {
                let v = check_pprime_le_q(&mu, pq, cfg)?;
                ("pprime-le-q".to_string(), true, v)
            } else if let Some(sector) = spectrum_sector(&mu) {
                if q >= *p && *p > 1.0 {
                    let v = check_sectorial_qgep(&mu, &sector, pq, cfg)?;
                    ("sectorial-q-ge-p".to_string(), true, v)
                } else if q < *p && q >= 1.0 {
                    let r = check_sectorial_plq(&mu, &sector, pq, cfg)?;
                    ("sectorial-p-gt-q".to_string(), true, r.verdicts)
                } else {
                    let v = check_necessary_power_bound(&mu, pq, cfg)?;
                    ("necessary-only".to_string(), false, vec![v])
                }
            } else if pprime <= q && q >= 2.0 {
                if let Some(strip) = spectrum_strip(&mu) {
                    let v = check_strip(&mu, &strip, pq, cfg)?;
                    ("strip".to_string(), true, v)
                } else {
                    let mut v = check_necessary_power_bound(&mu, pq, cfg)?;
                    v.notes.push_str("; sufficiency not certified");
                    ("necessary-only".to_string(), false, vec![v])
                }
            } else {
                let mut v = check_necessary_power_bound(&mu, pq, cfg)?;
                v.notes.push_str("; sufficiency not certified");
                ("necessary-only".to_string(), false, vec![v])
            }
        }
    };
    let admissible = verdicts.iter().all(|v| v.pass);
    Ok(AdmissReport {
        measure: mu,
        regime,
        sufficiency_certified: certified,
        verdicts,
        admissible,
    })
}
