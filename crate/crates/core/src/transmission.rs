//! Per-channel and total transmission through a modulated barrier.
//!
//! Each channel behaves as the elastic channel of an equivalent static barrier
//! of height `V0` at the channel energy, so the static formula is re-used with
//! `k_n^2 = E_n` and `kappa_n^2 = V0 - E_n`. Channels above the barrier top
//! use the analytic continuation `kappa -> i q`.

use rayon::prelude::*;
use serde::Serialize;

use crate::barrier::{tunnelling_probability, BarrierConfig};
use crate::error::{Error, Result};
use crate::spectrum::{build_spectrum, Branch, Channel, Classification, SpectrumNotice};

/// Which closed form produced a channel transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formula {
    Tunnelling,
    BarrierTop,
    Propagating,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::Tunnelling => "tunnelling",
            Formula::BarrierTop => "barrier-top",
            Formula::Propagating => "propagating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelTransmission {
    pub n: u32,
    pub branch: Branch,
    pub energy: f64,
    pub classification: Classification,
    /// `sqrt(E_n)`; absent for closed channels.
    pub kn: Option<f64>,
    /// `sqrt(|V0 - E_n|)`: decay constant below the top, wavenumber above it.
    pub kappa_n: Option<f64>,
    pub formula: Option<Formula>,
    pub t_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissionResult {
    pub per_channel: Vec<ChannelTransmission>,
    /// Unweighted sum over open channels. Can exceed one.
    pub total: f64,
    /// `total / open_count`: a plotting diagnostic, not a probability law.
    pub normalized_total: f64,
    pub open_count: usize,
    pub closed_count: usize,
    pub notices: Vec<SpectrumNotice>,
}

/// Transmission of a single open channel through the static barrier `(v0, b)`.
pub fn transmission_channel(cfg: &BarrierConfig, channel: &Channel) -> Result<f64> {
    transmission_at_energy(cfg.v0, cfg.b, channel.energy).map(|(t, _)| t)
}

/// Transmission at an arbitrary positive energy, with the formula used.
///
/// * `E < V0`: `4 k^2 kappa^2 / (4 k^2 kappa^2 + (k^2 + kappa^2)^2 sinh^2(kappa b))`
/// * `E = V0`: `1 / (1 + k^2 b^2 / 4)`
/// * `E > V0`: `4 k^2 q^2 / (4 k^2 q^2 + (k^2 - q^2)^2 sin^2(q b))`, `q^2 = E - V0`
pub fn transmission_at_energy(v0: f64, b: f64, energy: f64) -> Result<(f64, Formula)> {
    if !(energy > 0.0) {
        return Err(Error::ClosedChannel { energy });
    }
    let k2 = energy;
    if energy < v0 {
        Ok((tunnelling_probability(k2, v0 - energy, b), Formula::Tunnelling))
    } else if energy == v0 {
        Ok((1.0 / (1.0 + k2 * b * b / 4.0), Formula::BarrierTop))
    } else {
        let q2 = energy - v0;
        let s = (q2.sqrt() * b).sin();
        let num = 4.0 * k2 * q2;
        let diff = k2 - q2;
        Ok((num / (num + diff * diff * s * s), Formula::Propagating))
    }
}

fn evaluate(cfg: &BarrierConfig, ch: &Channel) -> Result<ChannelTransmission> {
    let (kn, kappa_n, formula, t_n) = if ch.classification.is_open() {
        let (t, f) = transmission_at_energy(cfg.v0, cfg.b, ch.energy)?;
        (
            Some(ch.energy.sqrt()),
            Some((cfg.v0 - ch.energy).abs().sqrt()),
            Some(f),
            Some(t),
        )
    } else {
        (None, None, None, None)
    };
    Ok(ChannelTransmission {
        n: ch.n,
        branch: ch.branch,
        energy: ch.energy,
        classification: ch.classification,
        kn,
        kappa_n,
        formula,
        t_n,
    })
}

/// Builds the spectrum and sums channel transmissions over open channels.
///
/// Channels are evaluated in parallel; the result keeps spectrum order.
pub fn transmission_total(cfg: &BarrierConfig) -> Result<TransmissionResult> {
    let spectrum = build_spectrum(cfg)?;
    let per_channel = spectrum
        .channels
        .par_iter()
        .map(|ch| evaluate(cfg, ch))
        .collect::<Result<Vec<_>>>()?;
    let open_count = per_channel.iter().filter(|c| c.t_n.is_some()).count();
    let closed_count = per_channel.len() - open_count;
    let total: f64 = per_channel.iter().filter_map(|c| c.t_n).sum();
    Ok(TransmissionResult {
        per_channel,
        total,
        normalized_total: total / open_count as f64,
        open_count,
        closed_count,
        notices: spectrum.notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::transmission_static;

    #[test]
    fn elastic_channel_matches_static() {
        let cfg = BarrierConfig::new(10.0, 1.0, 1.0, 0.25, 5.0);
        let s = build_spectrum(&cfg).unwrap();
        let t = transmission_channel(&cfg, s.elastic()).unwrap();
        assert_eq!(t, transmission_static(&cfg).unwrap());
    }

    #[test]
    fn reference_channel_value() {
        let cfg = BarrierConfig::new_static(2.0, 1.0, 0.5);
        let t = transmission_channel(&cfg, &Channel::at_energy(1.0, 2.0)).unwrap();
        assert!((t - 0.419_974_341_614_026_1).abs() < 1e-15);
    }

    #[test]
    fn barrier_top_limit() {
        let cfg = BarrierConfig::new_static(2.0, 1.0, 0.5);
        let (t, f) = transmission_at_energy(cfg.v0, cfg.b, 2.0).unwrap();
        assert_eq!(f, Formula::BarrierTop);
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn closed_channel_rejected() {
        let cfg = BarrierConfig::new_static(2.0, 1.0, 0.5);
        assert!(matches!(
            transmission_channel(&cfg, &Channel::at_energy(-0.1, 2.0)),
            Err(Error::ClosedChannel { .. })
        ));
    }

    #[test]
    fn over_barrier_resonance_is_full_transmission() {
        // sin(q b) = 0 at q b = pi
        let v0 = 2.0;
        let b = 1.0;
        let e = v0 + std::f64::consts::PI.powi(2);
        let (t, f) = transmission_at_energy(v0, b, e).unwrap();
        assert_eq!(f, Formula::Propagating);
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn static_reduction_when_unmodulated() {
        let cfg = BarrierConfig::new(2.0, 1.0, 0.0, 0.3, 0.7);
        let r = transmission_total(&cfg).unwrap();
        assert_eq!(r.per_channel.len(), 1);
        assert_eq!(r.total, transmission_static(&cfg).unwrap());
        assert!(matches!(r.notices[0], SpectrumNotice::Degenerate { .. }));
    }

    #[test]
    fn nine_channel_sum_rechecked() {
        let cfg = BarrierConfig::new(10.0, 1.0, 1.0, 0.25, 5.0);
        let r = transmission_total(&cfg).unwrap();
        assert_eq!(r.open_count, 9);
        assert_eq!(r.closed_count, 0);
        // independent re-evaluation of the tunnelling formula at E_N +- sqrt(16 - n^2)/4
        let mut expected = 0.0;
        for n in 0..=4_i32 {
            let off = f64::from(16 - n * n).sqrt() / 4.0;
            let signs: &[f64] = if n == 4 { &[0.0] } else { &[-1.0, 1.0] };
            for s in signs {
                let e = 5.0 + s * off;
                let k2 = e;
                let kap2 = 10.0 - e;
                let sh = kap2.sqrt().sinh();
                expected += 4.0 * k2 * kap2 / (4.0 * k2 * kap2 + (k2 + kap2).powi(2) * sh * sh);
            }
        }
        assert!((r.total - expected).abs() < 1e-13);
        for c in &r.per_channel {
            let t = c.t_n.unwrap();
            assert!((0.0..=1.0).contains(&t));
            assert!((c.kn.unwrap().powi(2) - c.energy).abs() < 1e-12);
        }
        assert!((r.normalized_total - r.total / 9.0).abs() < 1e-15);
    }

    #[test]
    fn closed_channels_excluded_from_sum() {
        let cfg = BarrierConfig::new(2.0, 1.0, 1.5, 0.5, 1.0);
        let r = transmission_total(&cfg).unwrap();
        assert!(r.closed_count > 0);
        assert!(r.open_count >= 1);
        let sum: f64 = r.per_channel.iter().filter_map(|c| c.t_n).sum();
        assert_eq!(sum, r.total);
        assert!(r
            .per_channel
            .iter()
            .filter(|c| c.classification == Classification::Closed)
            .all(|c| c.t_n.is_none()));
    }
}
