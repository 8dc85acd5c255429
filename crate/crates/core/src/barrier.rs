//! Static rectangular-barrier scattering.
//!
//! The barrier occupies `|x| <= b/2` with height `V0`; both outer regions are
//! at zero potential. Units are natural with `hbar = 1` and `2m = 1`, so a
//! wavenumber squared is numerically an energy (`k^2 = E`). To convert from
//! SI, measure energies in some unit `E_u` and lengths in
//! `L_u = hbar / sqrt(2 m E_u)`; times are then in units of `hbar / E_u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical parameters of a (possibly modulated) rectangular barrier.
///
/// `v1` and `omega` describe the modulation `V(t) = v0 + v1 sin(omega t)`.
/// For purely static work they are ignored except for validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    /// Static barrier height `V0`.
    pub v0: f64,
    /// Barrier width.
    pub b: f64,
    /// Modulation amplitude `V1`.
    #[serde(default)]
    pub v1: f64,
    /// Modulation angular frequency.
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Incident (elastic-channel) energy.
    pub e_incident: f64,
}

fn default_omega() -> f64 {
    1.0
}

impl BarrierConfig {
    /// A static barrier (no modulation).
    pub fn new_static(v0: f64, b: f64, e_incident: f64) -> Self {
        Self {
            v0,
            b,
            v1: 0.0,
            omega: 1.0,
            e_incident,
        }
    }

    pub fn new(v0: f64, b: f64, v1: f64, omega: f64, e_incident: f64) -> Self {
        Self {
            v0,
            b,
            v1,
            omega,
            e_incident,
        }
    }

    /// Checks every parameter invariant.
    ///
    /// A zero width is accepted and describes free space.
    pub fn validate(&self) -> Result<()> {
        let finite = |field: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite, got {v}")))
            }
        };
        finite("v0", self.v0)?;
        finite("b", self.b)?;
        finite("v1", self.v1)?;
        finite("omega", self.omega)?;
        finite("e_incident", self.e_incident)?;
        if self.v0 <= 0.0 {
            return Err(invalid("v0", format!("must be > 0, got {}", self.v0)));
        }
        if self.b < 0.0 {
            return Err(invalid("b", format!("must be >= 0, got {}", self.b)));
        }
        if self.omega <= 0.0 {
            return Err(invalid("omega", format!("must be > 0, got {}", self.omega)));
        }
        if self.e_incident <= 0.0 {
            return Err(invalid(
                "e_incident",
                format!("must be > 0, got {}", self.e_incident),
            ));
        }
        if self.e_incident >= self.v0 {
            return Err(invalid(
                "e_incident",
                format!(
                    "must lie below the barrier height v0 = {}, got {}",
                    self.v0, self.e_incident
                ),
            ));
        }
        if self.v1 < 0.0 || self.v1 > self.v0 {
            return Err(invalid(
                "v1",
                format!("must lie in [0, v0 = {}], got {}", self.v0, self.v1),
            ));
        }
        Ok(())
    }

    /// Photon quantum `alpha = hbar * omega` (numerically `omega`).
    pub fn alpha(&self) -> f64 {
        self.omega
    }

    /// Returns a copy with one named field replaced. Used by parameter sweeps.
    pub fn with_field(&self, field: &str, value: f64) -> Result<Self> {
        let mut out = *self;
        match field {
            "v0" => out.v0 = value,
            "b" => out.b = value,
            "v1" => out.v1 = value,
            "omega" => out.omega = value,
            "e_incident" => out.e_incident = value,
            _ => {
                return Err(Error::InvalidParameter {
                    field: "sweep.parameter",
                    reason: format!(
                        "`{field}` is not a barrier field (v0, b, v1, omega, e_incident)"
                    ),
                })
            }
        }
        Ok(out)
    }
}

/// Matched amplitudes and probabilities for one static barrier, unit incident
/// amplitude from the left.
///
/// Region II is written `B+ e^{kappa x} + B- e^{-kappa x}` and region III
/// `C+ e^{i k x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticSolution {
    pub k0: f64,
    pub kappa0: f64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub c_plus: Complex64,
    pub transmission: f64,
    pub reflection: f64,
}

/// Free-space wavenumber and in-barrier decay constant for a sub-barrier
/// energy.
pub fn wavenumbers(e: f64, v0: f64) -> Result<(f64, f64)> {
    if !(e > 0.0 && e < v0) {
        return Err(Error::Domain(format!(
            "wavenumbers need 0 < e < v0, got e = {e}, v0 = {v0}"
        )));
    }
    Ok((e.sqrt(), (v0 - e).sqrt()))
}

/// Solves the four continuity conditions at `x = -b/2` and `x = b/2`.
///
/// Internally the barrier solution is carried as
/// `P e^{kappa (x - b/2)} + Q e^{-kappa (x + b/2)}`, which keeps every matrix
/// entry bounded by one however thick the barrier is. The amplitudes are
/// converted back to the `e^{+-kappa x}` basis on output; for very opaque
/// barriers they underflow to zero while the probabilities stay accurate.
pub fn match_static(cfg: &BarrierConfig) -> Result<StaticSolution> {
    cfg.validate()?;
    let (k, kappa) = wavenumbers(cfg.e_incident, cfg.v0)?;
    let h = 0.5 * cfg.b;
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let decay = Complex64::new((-kappa * cfg.b).exp(), 0.0);
    let ik = i * k;
    let kap = Complex64::new(kappa, 0.0);
    let out_phase = (ik * h).exp(); // e^{ikh}
    let in_phase = (-ik * h).exp(); // e^{-ikh}

    // unknowns: [A, P, Q, C]
    let mut m = [
        // psi continuous at -h
        [out_phase, -decay, -one, zero],
        // psi' continuous at -h
        [-ik * out_phase, -kap * decay, kap, zero],
        // psi continuous at +h
        [zero, one, decay, -out_phase],
        // psi' continuous at +h
        [zero, kap, -kap * decay, -ik * out_phase],
    ];
    let mut rhs = [-in_phase, -ik * in_phase, zero, zero];
    let [a, p, q, c] = solve4(&mut m, &mut rhs)?;

    let shift = (-kappa * h).exp();
    let b_plus = p * shift;
    let b_minus = q * shift;
    let transmission = c.norm_sqr();
    let reflection = a.norm_sqr();
    Ok(StaticSolution {
        k0: k,
        kappa0: kappa,
        a_minus: a,
        b_plus,
        b_minus,
        c_plus: c,
        transmission,
        reflection,
    })
}

/// Closed-form static transmission probability.
pub fn transmission_static(cfg: &BarrierConfig) -> Result<f64> {
    cfg.validate()?;
    wavenumbers(cfg.e_incident, cfg.v0)?;
    Ok(tunnelling_probability(
        cfg.e_incident,
        cfg.v0 - cfg.e_incident,
        cfg.b,
    ))
}

/// Opaque-barrier approximation, `sinh^2` replaced by `e^{2 kappa b} / 4`.
///
/// Evaluated through the logarithm of the ratio of the two denominator terms
/// so that arbitrarily large `kappa b` returns a (possibly zero) probability
/// instead of overflowing. Inaccurate for small `kappa b`: at `b = 0` it gives
/// `16 k^2 kappa^2 / (16 k^2 kappa^2 + (k^2 + kappa^2)^2)` rather than one.
pub fn transmission_opaque(cfg: &BarrierConfig) -> Result<f64> {
    cfg.validate()?;
    let (k, kappa) = wavenumbers(cfg.e_incident, cfg.v0)?;
    let k2 = k * k;
    let kappa2 = kappa * kappa;
    let log_ratio =
        2.0 * (k2 + kappa2).ln() + 2.0 * kappa * cfg.b - (16.0 * k2 * kappa2).ln();
    Ok(logistic_complement(log_ratio))
}

/// `1 / (1 + e^x)` without overflow.
fn logistic_complement(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `4 k^2 kappa^2 / (4 k^2 kappa^2 + (k^2 + kappa^2)^2 sinh^2(kappa b))`.
///
/// Shared by the static barrier and every sub-barrier channel so that the
/// elastic channel reproduces the static value bit for bit.
pub(crate) fn tunnelling_probability(k2: f64, kappa2: f64, b: f64) -> f64 {
    let s = (kappa2.sqrt() * b).sinh();
    let num = 4.0 * k2 * kappa2;
    let sum = k2 + kappa2;
    let den = num + sum * sum * s * s;
    if den.is_infinite() {
        return 0.0;
    }
    num / den
}

/// Gaussian elimination with partial pivoting on a 4x4 complex system.
fn solve4(m: &mut [[Complex64; 4]; 4], rhs: &mut [Complex64; 4]) -> Result<[Complex64; 4]> {
    const N: usize = 4;
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&r, &s| m[r][col].norm().total_cmp(&m[s][col].norm()))
            .expect("non-empty range");
        let pivot = m[pivot_row][col].norm();
        if !(pivot > 1e-14 * scale) {
            return Err(Error::SingularSystem { pivot });
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for r in col + 1..N {
            let f = m[r][col] / m[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (upper, lower) = m.split_at_mut(r);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
            let sub = f * rhs[col];
            rhs[r] -= sub;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); N];
    for r in (0..N).rev() {
        let mut acc = rhs[r];
        for c in r + 1..N {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}
