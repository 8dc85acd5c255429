//! Perturbative sideband baseline.
//!
//! Expanding the oscillating phase `exp[-i (V1/alpha) sin(omega t)]` in the
//! Bessel series `sum_n J_n(V1/alpha) e^{-i n omega t}` gives an infinite,
//! equally spaced ladder `E_n = E_0 + n alpha` with weights `J_n(V1/alpha)^2`.
//! Each open sideband is assigned `weight * T_static(E_n)`, the usual
//! photon-assisted tunnelling composition. The ladder is cut once the retained
//! weight reaches `1 - cutoff_tol`.

use serde::Serialize;

use crate::barrier::BarrierConfig;
use crate::bessel::{bessel_j_orders, MAX_ORDER};
use crate::error::{invalid, Error, Result};
use crate::spectrum::Classification;
use crate::transmission::transmission_at_energy;

pub const MAX_CUTOFF_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandRow {
    pub n: i64,
    pub weight: f64,
    pub energy: f64,
    pub classification: Classification,
    /// Static transmission at `E_n`; absent when closed.
    pub static_transmission: Option<f64>,
    /// `weight * static_transmission`.
    pub transmission: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandTable {
    /// `V1 / alpha`.
    pub argument: f64,
    pub alpha: f64,
    pub n_cutoff: u32,
    pub cutoff_tol: f64,
    pub weight_sum: f64,
    /// Ordered by `n`, from `-n_cutoff` to `n_cutoff`.
    pub rows: Vec<SidebandRow>,
}

impl SidebandTable {
    /// Sum of weighted transmissions over open sidebands.
    pub fn total_transmission(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.transmission).sum()
    }

    /// Whether any retained sideband lies outside `[E_0 - V1, E_0 + V1]`.
    pub fn extends_beyond(&self, e0: f64, v1: f64) -> bool {
        self.rows
            .iter()
            .any(|r| r.energy < e0 - v1 || r.energy > e0 + v1)
    }
}

pub fn tg_sidebands(cfg: &BarrierConfig, cutoff_tol: f64) -> Result<SidebandTable> {
    cfg.validate()?;
    if !(cutoff_tol > 0.0 && cutoff_tol <= MAX_CUTOFF_TOL) {
        return Err(invalid(
            "cutoff_tol",
            format!("must lie in (0, {MAX_CUTOFF_TOL}], got {cutoff_tol}"),
        ));
    }
    let alpha = cfg.alpha();
    let argument = cfg.v1 / alpha;
    let max_order = ((argument + 40.0 + 4.0 * argument.sqrt()).ceil() as u32).min(MAX_ORDER);
    let j = bessel_j_orders(max_order, argument)?;

    let target = 1.0 - cutoff_tol;
    let mut cumulative = j[0] * j[0];
    let mut n_cutoff = 0_u32;
    while cumulative < target {
        if n_cutoff == max_order {
            return Err(Error::BesselRange(format!(
                "weight {cumulative} still below {target} at order {max_order}"
            )));
        }
        n_cutoff += 1;
        let w = j[n_cutoff as usize];
        let pair = 2.0 * w * w;
        // below rounding: the weight cannot grow any further
        if pair <= f64::EPSILON * 1e-3 && f64::from(n_cutoff) > argument {
            break;
        }
        cumulative += pair;
    }

    let nc = i64::from(n_cutoff);
    let rows = (-nc..=nc)
        .map(|n| {
            let jn = j[n.unsigned_abs() as usize];
            let weight = jn * jn;
            let energy = cfg.e_incident + n as f64 * alpha;
            let classification = Classification::of(energy, cfg.v0);
            let static_transmission = if classification.is_open() {
                Some(transmission_at_energy(cfg.v0, cfg.b, energy)?.0)
            } else {
                None
            };
            Ok(SidebandRow {
                n,
                weight,
                energy,
                classification,
                static_transmission,
                transmission: static_transmission.map(|t| weight * t),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SidebandTable {
        argument,
        alpha,
        n_cutoff,
        cutoff_tol,
        weight_sum: cumulative,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::transmission_static;

    #[test]
    fn unmodulated_is_one_row() {
        let cfg = BarrierConfig::new(2.0, 1.0, 0.0, 0.5, 1.0);
        let t = tg_sidebands(&cfg, 1e-6).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].weight, 1.0);
        assert_eq!(t.rows[0].transmission, Some(transmission_static(&cfg).unwrap()));
    }

    #[test]
    fn unit_argument_weights() {
        let cfg = BarrierConfig::new(4.0, 1.0, 0.5, 0.5, 1.0);
        let t = tg_sidebands(&cfg, 1e-6).unwrap();
        assert_eq!(t.argument, 1.0);
        let w = |n: i64| t.rows.iter().find(|r| r.n == n).unwrap().weight;
        assert!((w(0) - 0.585_527_499_513_664).abs() < 1e-14);
        assert!((w(1) - 0.193_644_518_014_459_1).abs() < 1e-14);
        assert_eq!(w(1), w(-1));
        assert!(t.rows.len() >= 5);
        assert!(t.weight_sum >= 1.0 - 1e-6 && t.weight_sum <= 1.0 + 1e-14);
        // equal spacing
        for pair in t.rows.windows(2) {
            assert!((pair[1].energy - pair[0].energy - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn support_grows_as_tolerance_shrinks() {
        let cfg = BarrierConfig::new(4.0, 1.0, 0.5, 0.5, 1.0);
        let loose = tg_sidebands(&cfg, 1e-3).unwrap();
        let tight = tg_sidebands(&cfg, 1e-12).unwrap();
        assert!(tight.n_cutoff > loose.n_cutoff);
        assert!(tight.extends_beyond(cfg.e_incident, cfg.v1));
    }

    #[test]
    fn closed_sidebands_flagged() {
        let cfg = BarrierConfig::new(4.0, 1.0, 2.0, 0.5, 0.6);
        let t = tg_sidebands(&cfg, 1e-8).unwrap();
        let closed: Vec<_> = t
            .rows
            .iter()
            .filter(|r| r.classification == Classification::Closed)
            .collect();
        assert!(!closed.is_empty());
        assert!(closed.iter().all(|r| r.transmission.is_none() && r.energy <= 0.0));
    }

    #[test]
    fn tolerance_validated() {
        let cfg = BarrierConfig::new(4.0, 1.0, 0.5, 0.5, 1.0);
        assert!(tg_sidebands(&cfg, 0.0).is_err());
        assert!(tg_sidebands(&cfg, 0.01).is_err());
    }
}
