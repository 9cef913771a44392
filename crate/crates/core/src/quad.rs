//! Adaptive Gauss--Kronrod quadrature.
//!
//! Finite intervals use a globally adaptive 15-point Kronrod rule (worst
//! segment first). Semi-infinite integrals are summed over dyadic shells so
//! that logarithmic divergence can be told apart from slow convergence and
//! reported as [`Error::DivergentIntegral`].

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

/// Default relative tolerance for all quadrature in the crate.
pub const REL_TOL: f64 = 1e-9;
/// Absolute error floor, below which further refinement is pointless.
pub const ABS_FLOOR: f64 = 1e-14;

// 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point Gauss
// weights (QUADPACK qk15 constants).
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    for j in 0..7 {
        let x = XGK[j] * h;
        let f1 = f(c - x);
        let f2 = f(c + x);
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[(j - 1) / 2] * (f1 + f2);
        }
    }
    let val = res_k * h;
    let err = ((res_k - res_g) * h).abs();
    (val, err.max(val.abs() * f64::EPSILON))
}

struct Seg {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_SEGMENTS: usize = 20_000;

/// Integrate `f` over the finite interval `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64, abs_floor: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive(f, b, a, rel, abs_floor).map(|v| -v);
    }
    let (val, err) = gk15(&f, a, b);
    if !val.is_finite() {
        return Err(Error::QuadratureFailure {
            estimate: val,
            error: err,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut total_val = val;
    let mut total_err = err;
    heap.push(Seg { err, a, b, val });
    for _ in 0..MAX_SEGMENTS {
        if total_err <= abs_floor.max(rel * total_val.abs()) {
            return Ok(total_val);
        }
        let worst = heap.pop().expect("heap never empty here");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval width at the resolution limit; accept what we have
            return Ok(total_val);
        }
        total_val -= worst.val;
        total_err -= worst.err;
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (v, e) = gk15(&f, lo, hi);
            if !v.is_finite() {
                return Err(Error::QuadratureFailure {
                    estimate: v,
                    error: e,
                });
            }
            total_val += v;
            total_err += e;
            heap.push(Seg {
                err: e,
                a: lo,
                b: hi,
                val: v,
            });
        }
    }
    Err(Error::QuadratureFailure {
        estimate: total_val,
        error: total_err,
    })
}

/// Integrate `f` over `[a, b]` at the crate default tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    adaptive(f, a, b, REL_TOL, ABS_FLOOR)
}

const MAX_SHELLS: usize = 400;
const DIVERGENCE_LOOKBACK: usize = 10;

fn shell_sum(increments: &mut dyn Iterator<Item = Result<f64>>, rel: f64) -> Result<f64> {
    let mut acc = 0.0f64;
    let mut recent: Vec<f64> = Vec::new();
    let mut quiet = 0usize;
    for (k, inc) in increments.enumerate() {
        let inc = inc?;
        acc += inc;
        let prev = recent.last().copied().unwrap_or(f64::INFINITY);
        recent.push(inc.abs());
        // a small increment only counts as convergence when increments are
        // no longer growing; otherwise the mass may still lie further out
        if inc.abs() <= prev && inc.abs() <= ABS_FLOOR.max(0.1 * rel * acc.abs()) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        if k >= 30 && recent.len() > DIVERGENCE_LOOKBACK {
            let tail = &recent[recent.len() - DIVERGENCE_LOOKBACK..];
            let non_decaying = tail.windows(2).all(|w| w[1] >= 0.9 * w[0]);
            if non_decaying && tail[DIVERGENCE_LOOKBACK - 1] > ABS_FLOOR {
                return Err(Error::DivergentIntegral);
            }
        }
    }
    let last = recent.last().copied().unwrap_or(0.0);
    if last > ABS_FLOOR.max(rel * acc.abs()) {
        Err(Error::QuadratureFailure {
            estimate: acc,
            error: last,
        })
    } else {
        Ok(acc)
    }
}

/// Integrate `f` over `(0, infinity)` by dyadic shells, flagging divergence.
pub fn integral_0_inf<F: Fn(f64) -> f64>(f: F, rel: f64) -> Result<f64> {
    // shells toward zero: [2^{-k-1}, 2^{-k}]
    let down = (0..MAX_SHELLS).map(|k| {
        let hi = 2f64.powi(-(k as i32));
        adaptive(&f, hi / 2.0, hi, rel, ABS_FLOOR)
    });
    // shells toward infinity: [2^k, 2^{k+1}]
    let up = (0..MAX_SHELLS).map(|k| {
        let lo = 2f64.powi(k as i32);
        adaptive(&f, lo, 2.0 * lo, rel, ABS_FLOOR)
    });
    let low = shell_sum(&mut down.into_iter(), rel)?;
    let high = shell_sum(&mut up.into_iter(), rel)?;
    Ok(low + high)
}

/// Integrate `f` over the whole real line, flagging divergence.
pub fn integral_real_line<F: Fn(f64) -> f64>(f: F, rel: f64) -> Result<f64> {
    integral_0_inf(|t| f(t) + f(-t), rel)
}

/// Integrate over `[lo, hi)` where `hi` may be infinite.
pub fn integral_ray<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel: f64) -> Result<f64> {
    if hi.is_finite() {
        adaptive(f, lo, hi, rel, ABS_FLOOR)
    } else if lo <= 0.0 {
        integral_0_inf(f, rel)
    } else {
        let up = (0..MAX_SHELLS).map(|k| {
            let a = lo * 2f64.powi(k as i32);
            adaptive(&f, a, 2.0 * a, rel, ABS_FLOOR)
        });
        shell_sum(&mut up.into_iter(), rel)
    }
}
