//! Direct wave-packet propagation through the modulated barrier.
//!
//! Solves `i dpsi/dt = -d^2 psi/dx^2 + V(x, t) psi` (`hbar = 1`, `2m = 1`) on a
//! uniform grid with zero boundary values, using the Cayley form
//! `(1 + i dt H/2) psi' = (1 - i dt H/2) psi` with `H` evaluated at the middle
//! of the step. The update is unitary, so the discrete norm is conserved to
//! rounding. `V = V0 + V1 sin(omega t)` inside `|x| < b/2` and zero outside;
//! grid cells that straddle a barrier edge get the overlap-weighted potential
//! so the effective width is exactly `b`.
//!
//! This module is a brute-force reference for the closed forms; it has no
//! absorbing layers, so grids must be large enough that nothing reaches the
//! ends.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::BarrierConfig;
use crate::error::{invalid, Error, Result};

pub const MIN_POINTS: usize = 512;
/// Free space required on each side of the barrier, in barrier widths.
pub const MIN_CLEARANCE_WIDTHS: f64 = 10.0;
pub const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Norm drift beyond this aborts a run.
pub const DRIFT_LIMIT: f64 = 1e-8;
const OVERLAP_LIMIT: f64 = 1e-12;
const EDGE_FRACTION: f64 = 0.025;
const EDGE_LIMIT: f64 = 1e-6;
const RESIDUAL_LIMIT: f64 = 1e-6;
const EDGE_CHECK_EVERY: usize = 50;

/// Time-dependent rectangular potential. Unlike [`BarrierConfig`] it does not
/// carry an incident energy, and `v0 = 0` (free space) is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivenBarrier {
    pub v0: f64,
    pub v1: f64,
    pub omega: f64,
    pub b: f64,
}

impl DrivenBarrier {
    pub fn free() -> Self {
        Self {
            v0: 0.0,
            v1: 0.0,
            omega: 0.0,
            b: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("v0", self.v0),
            ("v1", self.v1),
            ("omega", self.omega),
            ("b", self.b),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.v0 + self.v1
    }

    pub fn height_at(&self, t: f64) -> f64 {
        self.v0 + self.v1 * (self.omega * t).sin()
    }
}

impl From<&BarrierConfig> for DrivenBarrier {
    fn from(cfg: &BarrierConfig) -> Self {
        Self {
            v0: cfg.v0,
            v1: cfg.v1,
            omega: cfg.omega,
            b: cfg.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub dt: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn validate(&self, potential: &DrivenBarrier) -> Result<()> {
        if self.points < MIN_POINTS {
            return Err(invalid(
                "grid.points",
                format!("need at least {MIN_POINTS}, got {}", self.points),
            ));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(invalid("grid.x_min", "need finite x_min < x_max"));
        }
        let half = 0.5 * potential.b;
        let clearance = MIN_CLEARANCE_WIDTHS * potential.b;
        if !(self.x_min < -half - clearance && self.x_max > half + clearance) {
            return Err(invalid(
                "grid.x_min",
                format!(
                    "barrier [-{half}, {half}] needs {MIN_CLEARANCE_WIDTHS} widths of free space each side"
                ),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("grid.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dt * potential.max_abs() > MAX_PHASE_PER_STEP {
            return Err(invalid(
                "grid.dt",
                format!(
                    "dt * max|V| = {} exceeds {MAX_PHASE_PER_STEP}",
                    self.dt * potential.max_abs()
                ),
            ));
        }
        if self.steps == 0 {
            return Err(invalid("grid.steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// `psi(x) ~ exp(-(x - center)^2 / (4 width^2) + i k_mean x)`; `width` is the
/// standard deviation of `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    pub k_mean: f64,
}

impl GaussianPacket {
    pub fn mean_energy(&self) -> f64 {
        self.k_mean * self.k_mean
    }

    /// Standard deviation of the kinetic energy, `2 k sigma_k` to first order.
    pub fn energy_width(&self) -> f64 {
        self.k_mean / self.width
    }

    /// Free-space spread at time `t`.
    pub fn width_at(&self, t: f64) -> f64 {
        let s2 = self.width * self.width;
        self.width * (1.0 + (t / s2).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavePacketState {
    pub grid: GridSpec,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
    /// `|norm(t) - norm(0)|` accumulated over the run.
    pub norm_drift: f64,
}

impl WavePacketState {
    pub fn norm(&self) -> f64 {
        discrete_norm(&self.amplitudes, self.grid.dx())
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        let weighted: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| self.grid.x(j) * a.norm_sqr())
            .sum();
        weighted * dx / self.norm()
    }

    fn probability_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(j, _)| pred(self.grid.x(*j)))
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * dx
    }
}

fn discrete_norm(psi: &[Complex64], dx: f64) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx
}

/// Fraction of each grid cell covered by the barrier.
fn barrier_cover(grid: &GridSpec, b: f64) -> Vec<f64> {
    let dx = grid.dx();
    let half = 0.5 * b;
    (0..grid.points)
        .map(|j| {
            let x = grid.x(j);
            let lo = (x - 0.5 * dx).max(-half);
            let hi = (x + 0.5 * dx).min(half);
            ((hi - lo) / dx).max(0.0)
        })
        .collect()
}

pub fn initial_state(grid: &GridSpec, packet: &GaussianPacket) -> WavePacketState {
    let mut psi: Vec<Complex64> = (0..grid.points)
        .map(|j| {
            let x = grid.x(j) - packet.center;
            let envelope = (-x * x / (4.0 * packet.width * packet.width)).exp();
            Complex64::from_polar(envelope, packet.k_mean * grid.x(j))
        })
        .collect();
    let norm = discrete_norm(&psi, grid.dx());
    let scale = 1.0 / norm.sqrt();
    for a in &mut psi {
        *a *= scale;
    }
    WavePacketState {
        grid: *grid,
        amplitudes: psi,
        time: 0.0,
        norm_drift: 0.0,
    }
}

/// Propagates `packet` for `grid.steps` steps of size `grid.dt`.
pub fn propagate(
    potential: &DrivenBarrier,
    grid: &GridSpec,
    packet: &GaussianPacket,
) -> Result<WavePacketState> {
    potential.validate()?;
    grid.validate(potential)?;
    if !(packet.width > 0.0 && packet.width.is_finite() && packet.k_mean.is_finite()) {
        return Err(invalid("packet.width", "must be positive and finite"));
    }
    let half = 0.5 * potential.b;
    if packet.center >= -half {
        return Err(Error::Geometry(format!(
            "packet centre {} is not left of the barrier",
            packet.center
        )));
    }
    let mut state = initial_state(grid, packet);
    let overlap = state.probability_where(|x| x.abs() <= half + 0.5 * grid.dx());
    if potential.b > 0.0 && overlap >= OVERLAP_LIMIT {
        return Err(Error::Geometry(format!(
            "initial packet overlaps the barrier with probability {overlap:e}"
        )));
    }
    check_edges(&state)?;

    let n = grid.points;
    let dx = grid.dx();
    let dt = grid.dt;
    let cover = barrier_cover(grid, potential.b);
    let kinetic = 2.0 / (dx * dx);
    let off = Complex64::new(0.0, -0.5 * dt / (dx * dx));
    let norm0 = state.norm();

    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];

    for step in 0..grid.steps {
        let height = potential.height_at(state.time + 0.5 * dt);
        let psi = &state.amplitudes;
        for j in 0..n {
            let h_jj = kinetic + cover[j] * height;
            let half_phase = Complex64::new(0.0, 0.5 * dt * h_jj);
            diag[j] = 1.0 + half_phase;
            let left = if j > 0 { psi[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { psi[j + 1] } else { Complex64::new(0.0, 0.0) };
            // (1 - i dt H / 2) psi, off-diagonal of H is -1/dx^2
            rhs[j] = (1.0 - half_phase) * psi[j] - off * (left + right);
        }
        thomas(&diag, off, &mut rhs, &mut c_prime, &mut next);
        std::mem::swap(&mut state.amplitudes, &mut next);
        state.time = (step + 1) as f64 * dt;

        if (step + 1) % EDGE_CHECK_EVERY == 0 {
            check_edges(&state)?;
        }
    }
    check_edges(&state)?;

    state.norm_drift = (state.norm() - norm0).abs();
    if state.norm_drift > DRIFT_LIMIT {
        return Err(Error::Unstable {
            drift: state.norm_drift,
            limit: DRIFT_LIMIT,
        });
    }
    if potential.b > 0.0 {
        let residual = state.probability_where(|x| x.abs() <= potential.b);
        if residual > RESIDUAL_LIMIT {
            return Err(Error::Geometry(format!(
                "packet has not cleared the barrier (residual probability {residual:e}); increase steps"
            )));
        }
    }
    Ok(state)
}

/// Solves a tridiagonal system with constant off-diagonal `off`. `rhs` is
/// overwritten.
fn thomas(
    diag: &[Complex64],
    off: Complex64,
    rhs: &mut [Complex64],
    c_prime: &mut [Complex64],
    out: &mut [Complex64],
) {
    let n = diag.len();
    let mut denom = diag[0];
    c_prime[0] = off / denom;
    rhs[0] /= denom;
    for j in 1..n {
        denom = diag[j] - off * c_prime[j - 1];
        c_prime[j] = off / denom;
        let prev = rhs[j - 1];
        rhs[j] = (rhs[j] - off * prev) / denom;
    }
    out[n - 1] = rhs[n - 1];
    for j in (0..n - 1).rev() {
        out[j] = rhs[j] - c_prime[j] * out[j + 1];
    }
}

fn check_edges(state: &WavePacketState) -> Result<()> {
    let n = state.grid.points;
    let band = ((n as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let dx = state.grid.dx();
    let edge: f64 = state.amplitudes[..band]
        .iter()
        .chain(&state.amplitudes[n - band..])
        .map(|a| a.norm_sqr())
        .sum::<f64>()
        * dx;
    if edge > EDGE_LIMIT {
        return Err(Error::Geometry(format!(
            "packet reached the grid edge at t = {} (edge probability {edge:e})",
            state.time
        )));
    }
    Ok(())
}

/// Probability to the right of the barrier, `sum |psi|^2 dx` over `x > b/2`.
pub fn transmitted_fraction(state: &WavePacketState, b: f64) -> f64 {
    let half = 0.5 * b;
    state.probability_where(|x| x > half).clamp(0.0, 1.0)
}

pub fn reflected_fraction(state: &WavePacketState, b: f64) -> f64 {
    let half = 0.5 * b;
    state.probability_where(|x| x < -half).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub k: f64,
    pub energy: f64,
    pub density: f64,
}

/// `|phi(k)|^2` of the transmitted part, `phi(k) = (2 pi)^{-1/2} sum psi e^{-ikx} dx`
/// over `x > b/2`, sampled at `count` evenly spaced `k` in `[k_min, k_max]`.
pub fn transmitted_spectrum(
    state: &WavePacketState,
    b: f64,
    k_min: f64,
    k_max: f64,
    count: usize,
) -> Result<Vec<SpectrumSample>> {
    if count < 2 || !(k_min < k_max) {
        return Err(invalid("spectrum", "need count >= 2 and k_min < k_max"));
    }
    let half = 0.5 * b;
    let dx = state.grid.dx();
    let tail: Vec<(f64, Complex64)> = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(j, a)| (state.grid.x(j), *a))
        .filter(|(x, _)| *x > half)
        .collect();
    let scale = dx / (2.0 * PI).sqrt();
    Ok((0..count)
        .map(|i| {
            let k = k_min + (k_max - k_min) * i as f64 / (count - 1) as f64;
            let phi: Complex64 = tail
                .iter()
                .map(|(x, a)| a * Complex64::from_polar(1.0, -k * x))
                .sum::<Complex64>()
                * scale;
            SpectrumSample {
                k,
                energy: k * k,
                density: phi.norm_sqr(),
            }
        })
        .collect())
}

/// Packet and grid sized so that, after the run, both the reflected and the
/// transmitted parts sit well away from the barrier and from the grid ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OraclePlan {
    pub packet: GaussianPacket,
    pub grid: GridSpec,
}

/// Plans a run at mean energy `energy`.
///
/// With `energy_width = None` the packet width is chosen to minimise the
/// spread at the end of the run; otherwise `width = k / energy_width`.
pub fn plan_run(
    potential: &DrivenBarrier,
    energy: f64,
    energy_width: Option<f64>,
    points: usize,
) -> Result<OraclePlan> {
    potential.validate()?;
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(invalid("oracle.energy", format!("must be positive, got {energy}")));
    }
    let k = energy.sqrt();
    let v = 2.0 * k;
    let half = 0.5 * potential.b;
    // clearance in units of the final spread
    let sigmas = 8.0;

    let (distance, width) = match energy_width {
        None => {
            // width^2 = t_final gives a final spread of sqrt(2) width
            let c = sigmas * 2.0_f64.sqrt() * (2.0 / v).sqrt();
            let u = 0.5 * (c + (c * c + 4.0 * half).sqrt());
            let d = u * u;
            (d, (2.0 * d / v).sqrt())
        }
        Some(de) => {
            if !(de > 0.0 && de.is_finite()) {
                return Err(invalid("oracle.energy_width", "must be positive"));
            }
            let width = k / de;
            let spread = |d: f64| {
                let t = 2.0 * d / v;
                width * (1.0 + (t / (width * width)).powi(2)).sqrt()
            };
            let mut d = half + sigmas * width;
            let mut converged = false;
            for _ in 0..500 {
                let next = half + sigmas * spread(d);
                if (next - d).abs() < 1e-9 * d {
                    converged = true;
                    d = next;
                    break;
                }
                d = next;
            }
            if !converged || !d.is_finite() {
                return Err(Error::Geometry(format!(
                    "packet of energy width {de} spreads too fast to clear the barrier"
                )));
            }
            (d, width)
        }
    };
    let packet = GaussianPacket {
        center: -distance,
        width,
        k_mean: k,
    };
    let t_final = 2.0 * distance / v;
    let fastest = if potential.v1 > 0.0 {
        2.0 * (energy + potential.v1 + 2.0 * potential.omega).sqrt()
    } else {
        v
    };
    let reach = (distance * fastest / v).max(distance) + 6.0 * packet.width_at(t_final);
    let extent = reach.max(half + (MIN_CLEARANCE_WIDTHS + 1.0) * potential.b);

    let mut dt: f64 = 0.05;
    if potential.max_abs() > 0.0 {
        dt = dt.min(0.5 * MAX_PHASE_PER_STEP / potential.max_abs());
    }
    if potential.v1 > 0.0 && potential.omega > 0.0 {
        dt = dt.min(2.0 * PI / (40.0 * potential.omega));
    }
    let grid = GridSpec {
        x_min: -extent,
        x_max: extent,
        points,
        dt,
        steps: (t_final / dt).ceil() as usize,
    };
    Ok(OraclePlan { packet, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec {
            x_min: -60.0,
            x_max: 60.0,
            points: 1024,
            dt: 0.02,
            steps: 500,
        }
    }

    #[test]
    fn thomas_solves_tridiagonal() {
        let n = 6;
        let diag: Vec<Complex64> = (0..n).map(|j| Complex64::new(3.0 + j as f64, 0.5)).collect();
        let off = Complex64::new(0.2, -1.0);
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, 1.0 - j as f64)).collect();
        let mut rhs: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut s = diag[j] * x[j];
                if j > 0 {
                    s += off * x[j - 1];
                }
                if j + 1 < n {
                    s += off * x[j + 1];
                }
                s
            })
            .collect();
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        thomas(&diag, off, &mut rhs, &mut c, &mut out);
        for (a, b) in out.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn cover_integrates_to_width() {
        let g = small_grid();
        let cover = barrier_cover(&g, 1.234);
        let width: f64 = cover.iter().sum::<f64>() * g.dx();
        assert!((width - 1.234).abs() < 1e-12);
    }

    #[test]
    fn free_packet_moves_at_group_velocity() {
        let packet = GaussianPacket {
            center: -20.0,
            width: 4.0,
            k_mean: 2.0,
        };
        // fine enough that lattice dispersion stays well under 1%
        let g = GridSpec {
            points: 2048,
            ..small_grid()
        };
        let s = propagate(&DrivenBarrier::free(), &g, &packet).unwrap();
        let moved = s.mean_position() - packet.center;
        let expected = 2.0 * packet.k_mean * s.time;
        assert!((moved - expected).abs() < 1e-2 * expected, "{moved} vs {expected}");
        assert!(s.norm_drift <= 1e-10);
        assert!(transmitted_fraction(&s, 0.0) >= 1.0 - 1e-4);
    }

    #[test]
    fn geometry_errors() {
        let packet = GaussianPacket {
            center: -20.0,
            width: 4.0,
            k_mean: 1.0,
        };
        let mut g = small_grid();
        g.steps = 2000;
        assert!(matches!(
            propagate(&DrivenBarrier::free(), &g, &packet),
            Err(Error::Geometry(_))
        ));
        let barrier = DrivenBarrier {
            v0: 1.0,
            v1: 0.0,
            omega: 0.0,
            b: 1.0,
        };
        let touching = GaussianPacket {
            center: -2.0,
            ..packet
        };
        assert!(matches!(
            propagate(&barrier, &small_grid(), &touching),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn grid_validation() {
        let barrier = DrivenBarrier {
            v0: 2.0,
            v1: 0.0,
            omega: 0.0,
            b: 1.0,
        };
        let ok = small_grid();
        assert!(ok.validate(&barrier).is_ok());
        assert!(GridSpec { points: 100, ..ok }.validate(&barrier).is_err());
        assert!(GridSpec { dt: 0.1, ..ok }.validate(&barrier).is_err());
        assert!(GridSpec { x_min: -5.0, ..ok }.validate(&barrier).is_err());
        assert!(GridSpec { steps: 0, ..ok }.validate(&barrier).is_err());
    }

    #[test]
    fn opaque_barrier_reflects() {
        let barrier = DrivenBarrier {
            v0: 20.0,
            v1: 0.0,
            omega: 0.0,
            b: 3.0,
        };
        let plan = plan_run(&barrier, 1.0, None, 2048).unwrap();
        let s = propagate(&barrier, &plan.grid, &plan.packet).unwrap();
        assert!(transmitted_fraction(&s, barrier.b) <= 1e-3);
        assert!(reflected_fraction(&s, barrier.b) > 0.999);
    }
}
