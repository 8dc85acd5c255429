//! Quantized barrier-traversal times.
//!
//! An electron enters through channel `n` at `cos(omega t_n) = n / N` and
//! leaves through channel `m < n` at `cos(omega t_m) = m / N`, with
//! `t_m = t_n + T`. Eliminating `t_n` (taking `sin(omega t_n) >= 0`) gives
//!
//! ```text
//! (n/N) cos(omega T) - sqrt(1 - (n/N)^2) sin(omega T) = m/N
//! ```
//!
//! solved here exactly, to first order in `omega T` (low frequency), and as a
//! quadratic in `tan(omega T)` (high frequency).
//!
//! Durations are reported as positive magnitudes. The absorption/emission
//! distinction is carried by field names, not by sign.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{Branch, ChannelSpectrum};

/// Entry channels above this fraction of `N` are outside the `n << N` regime
/// of the binomial expansion.
pub const LOW_APPROX_MAX_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Exact,
    LowFrequency,
    HighFrequency,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::LowFrequency => "low-frequency",
            Regime::HighFrequency => "high-frequency",
        }
    }
}

/// One `n -> m` traversal in a given regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraversalSolution {
    pub n: u32,
    pub m: u32,
    pub n_max: u32,
    pub regime: Regime,
    /// Absorption time.
    pub t_plus: f64,
    /// Emission time.
    pub t_minus: f64,
    /// High frequency only.
    pub tan_theta_plus: Option<f64>,
    /// High frequency only; `None` when the root is at infinity (`A = 0`).
    pub tan_theta_minus: Option<f64>,
    /// `theta = atan(tan theta) + branch * pi`.
    pub branch: u32,
    /// `A = N^2 - n^2 - m^2` vanished and the quadratic became linear.
    pub degenerate: bool,
}

impl TraversalSolution {
    /// Re-evaluates the high-frequency times on another `pi` branch.
    ///
    /// Branch 0 is only valid when both principal angles are positive.
    pub fn with_branch(&self, branch: u32, omega: f64) -> Result<Self> {
        if self.regime != Regime::HighFrequency {
            return Err(Error::Domain("only high-frequency solutions carry a branch".into()));
        }
        let (t_plus, t_minus) = high_times(self.tan_theta_plus, self.tan_theta_minus, branch, omega)?;
        Ok(Self {
            t_plus,
            t_minus,
            branch,
            ..*self
        })
    }

    /// `omega T_+ - omega T_-` on the current branch.
    pub fn theta_gap(&self, omega: f64) -> f64 {
        omega * (self.t_plus - self.t_minus)
    }
}

fn check_indices(n: u32, m: u32, n_max: u32) -> Result<()> {
    if m >= n {
        return Err(Error::Domain(format!(
            "exit channel m = {m} must be below entry channel n = {n}"
        )));
    }
    if n > n_max {
        return Err(Error::Domain(format!(
            "entry channel n = {n} exceeds N = {n_max}"
        )));
    }
    Ok(())
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

/// All traversal times in one modulation period `[0, 2 pi / omega)`, ascending.
///
/// The roots are `omega T = acos(m/N) - acos(n/N)` and
/// `2 pi - acos(m/N) - acos(n/N)`; every other solution differs from one of
/// them by a whole period.
pub fn traversal_exact(n: u32, m: u32, n_max: u32, omega: f64) -> Result<Vec<f64>> {
    check_indices(n, m, n_max)?;
    check_positive("omega", omega)?;
    let nn = f64::from(n_max);
    let entry = (f64::from(n) / nn).acos();
    let exit = (f64::from(m) / nn).acos();
    let mut roots: Vec<f64> = [exit - entry, TAU - exit - entry]
        .into_iter()
        .map(|theta| theta.rem_euclid(TAU) / omega)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

/// First-order (`omega T << 1`) traversal time
/// `|n - m| N tau / sqrt((N + n)(N - n))`, equal for absorption and emission.
pub fn traversal_low(n: u32, m: u32, n_max: u32, tau: f64) -> Result<TraversalSolution> {
    check_indices(n, m, n_max)?;
    check_positive("tau", tau)?;
    if n == n_max {
        return Err(Error::Singularity(format!(
            "low-frequency traversal time at n = N = {n_max}"
        )));
    }
    let nn = f64::from(n_max);
    let nf = f64::from(n);
    let t = f64::from(n - m) * nn * tau / ((nn + nf) * (nn - nf)).sqrt();
    Ok(TraversalSolution {
        n,
        m,
        n_max,
        regime: Regime::LowFrequency,
        t_plus: t,
        t_minus: t,
        tan_theta_plus: None,
        tan_theta_minus: None,
        branch: 0,
        degenerate: false,
    })
}

/// `|n - m| (1 + n^2 / 2N^2) tau`, with a flag when `n > N/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowApprox {
    pub time: f64,
    pub outside_regime: bool,
}

pub fn traversal_low_approx(n: u32, m: u32, n_max: u32, tau: f64) -> Result<LowApprox> {
    check_indices(n, m, n_max)?;
    check_positive("tau", tau)?;
    let nn = f64::from(n_max);
    let nf = f64::from(n);
    Ok(LowApprox {
        time: f64::from(n - m) * (1.0 + nf * nf / (2.0 * nn * nn)) * tau,
        outside_regime: nf > LOW_APPROX_MAX_FRACTION * nn,
    })
}

/// Low-frequency times from the channel energies, `|n - m| / |E_n^{+-} - E_N|`.
pub fn traversal_low_energy(n: u32, m: u32, spectrum: &ChannelSpectrum) -> Result<TraversalSolution> {
    check_indices(n, m, spectrum.n_max)?;
    if n == spectrum.n_max {
        return Err(Error::Singularity(format!(
            "E_n = E_N at n = N = {}",
            spectrum.n_max
        )));
    }
    let level = |branch| {
        spectrum
            .channel(n, branch)
            .map(|c| c.energy)
            .ok_or_else(|| Error::Domain(format!("channel ({n}, {branch}) not in spectrum")))
    };
    let up = level(Branch::Absorption)?;
    let down = level(Branch::Emission)?;
    let dn = f64::from(n - m);
    Ok(TraversalSolution {
        n,
        m,
        n_max: spectrum.n_max,
        regime: Regime::LowFrequency,
        t_plus: dn / (up - spectrum.e_elastic),
        t_minus: -dn / (down - spectrum.e_elastic),
        tan_theta_plus: None,
        tan_theta_minus: None,
        branch: 0,
        degenerate: false,
    })
}

/// Coefficients of `A tan^2 + 2B tan + C = 0`.
pub fn quadratic_coefficients(n: u32, m: u32, n_max: u32) -> (f64, f64, f64) {
    let (nn, nf, mf) = (f64::from(n_max), f64::from(n), f64::from(m));
    let a = nn * nn - nf * nf - mf * mf;
    let b = nf * (nn * nn - nf * nf).sqrt();
    let c = nf * nf - mf * mf;
    (a, b, c)
}

/// High-frequency roots `tan(theta_+-)`, reported on branch 1 (`theta` in
/// `(pi/2, 3pi/2)`), which keeps both times positive.
///
/// The roots are taken as `-C / (B + D)` and `-(B + D) / A` with
/// `D = m sqrt(N^2 - m^2)`; these are the `+` and `-` roots of the quadratic
/// formula without cancellation, and the first stays finite when `A = 0`.
pub fn traversal_high(n: u32, m: u32, n_max: u32, omega: f64) -> Result<TraversalSolution> {
    if m == 0 || !(m < n && n < n_max) {
        return Err(Error::Domain(format!(
            "high-frequency traversal needs 0 < m < n < N, got n = {n}, m = {m}, N = {n_max}"
        )));
    }
    check_positive("omega", omega)?;
    let (a, b, c) = quadratic_coefficients(n, m, n_max);
    let (nn, mf) = (f64::from(n_max), f64::from(m));
    let d = mf * (nn * nn - mf * mf).sqrt();
    let degenerate = n_max * n_max == n * n + m * m;
    let tan_plus = -c / (b + d);
    let tan_minus = (!degenerate).then(|| -(b + d) / a);
    let branch = 1;
    let (t_plus, t_minus) = high_times(Some(tan_plus), tan_minus, branch, omega)?;
    Ok(TraversalSolution {
        n,
        m,
        n_max,
        regime: Regime::HighFrequency,
        t_plus,
        t_minus,
        tan_theta_plus: Some(tan_plus),
        tan_theta_minus: tan_minus,
        branch,
        degenerate,
    })
}

fn high_times(
    tan_plus: Option<f64>,
    tan_minus: Option<f64>,
    branch: u32,
    omega: f64,
) -> Result<(f64, f64)> {
    let shift = f64::from(branch) * PI;
    // an infinite root sits at atan(-inf) = -pi/2
    let angle = |t: Option<f64>| t.map_or(-FRAC_PI_2, f64::atan) + shift;
    let (tp, tm) = (angle(tan_plus), angle(tan_minus));
    if tp <= 0.0 || tm <= 0.0 {
        return Err(Error::Domain(format!(
            "branch {branch} gives non-positive angles ({tp}, {tm})"
        )));
    }
    Ok((tp / omega, tm / omega))
}

/// `[n sqrt(N^2-n^2) - m sqrt(N^2-m^2)] / [n sqrt(N^2-n^2) + m sqrt(N^2-m^2)]`,
/// equal to `tan(theta_+) / tan(theta_-)`.
pub fn high_freq_ratio(n: u32, m: u32, n_max: u32) -> Result<f64> {
    if m == 0 || !(m < n && n < n_max) {
        return Err(Error::Domain(format!(
            "ratio needs 0 < m < n < N, got n = {n}, m = {m}, N = {n_max}"
        )));
    }
    let (nn, nf, mf) = (f64::from(n_max), f64::from(n), f64::from(m));
    let p = nf * (nn * nn - nf * nf).sqrt();
    let q = mf * (nn * nn - mf * mf).sqrt();
    Ok((p - q) / (p + q))
}
