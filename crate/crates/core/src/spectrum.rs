//! Quantized channel spectrum of a modulated barrier.
//!
//! Matching the temporal factor of the free-space and in-barrier solutions
//! forces `V1 cos(omega t_n) = n alpha` with integer `n`. The admissible
//! instants are therefore discrete, and so are the channel energies
//!
//! ```text
//! E_n^{+-} = E_N +- sqrt(N^2 - n^2) alpha,   0 <= n <= N = floor(V1 / alpha)
//! ```
//!
//! which all lie on the circle `(E - E_N)^2 + (n alpha)^2 = (N alpha)^2`.
//! The spectrum is finite: `2N + 1` levels between `E_N - V1` and `E_N + V1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::barrier::BarrierConfig;
use crate::error::{Error, Result};

/// Relative slack when deciding whether `V1 / alpha` is an integer.
const INTEGRAL_RATIO_TOL: f64 = 1e-9;

/// Which side of the elastic level a channel sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// `E_n^+`, reached by absorbing quanta.
    #[serde(rename = "+")]
    Absorption,
    /// `E_n^-`, reached by emitting quanta.
    #[serde(rename = "-")]
    Emission,
    /// The `n = N` level at `E_N`.
    #[serde(rename = "0")]
    Elastic,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Absorption => 1.0,
            Branch::Emission => -1.0,
            Branch::Elastic => 0.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Absorption => "+",
            Branch::Emission => "-",
            Branch::Elastic => "0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Branch::Absorption),
            "-" => Some(Branch::Emission),
            "0" => Some(Branch::Elastic),
            _ => None,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Whether a channel can carry flux and on which side of the barrier top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    OpenSubbarrier,
    OpenOverbarrier,
    Closed,
}

impl Classification {
    pub fn of(energy: f64, v0: f64) -> Self {
        if energy <= 0.0 {
            Classification::Closed
        } else if energy >= v0 {
            Classification::OpenOverbarrier
        } else {
            Classification::OpenSubbarrier
        }
    }

    pub fn is_open(self) -> bool {
        self != Classification::Closed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::OpenSubbarrier => "open-subbarrier",
            Classification::OpenOverbarrier => "open-overbarrier",
            Classification::Closed => "closed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "open-subbarrier" => Some(Classification::OpenSubbarrier),
            "open-overbarrier" => Some(Classification::OpenOverbarrier),
            "closed" => Some(Classification::Closed),
            _ => None,
        }
    }
}

/// One quantized scattering channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub n: u32,
    pub branch: Branch,
    pub energy: f64,
    /// Height of the matching snapshot barrier, `V0 +- sqrt(V1^2 - (n alpha)^2)`.
    pub snapshot_height: f64,
    pub classification: Classification,
}

impl Channel {
    /// A free-standing channel at an arbitrary energy, classified against `v0`.
    pub fn at_energy(energy: f64, v0: f64) -> Self {
        Self {
            n: 0,
            branch: Branch::Elastic,
            energy,
            snapshot_height: v0,
            classification: Classification::of(energy, v0),
        }
    }

    /// `(E - E_N)^2 + (n alpha)^2 - (N alpha)^2`.
    pub fn circle_residual(&self, e_elastic: f64, alpha: f64, n_max: u32) -> f64 {
        let de = self.energy - e_elastic;
        let na = f64::from(self.n) * alpha;
        let r = f64::from(n_max) * alpha;
        de * de + na * na - r * r
    }
}

/// Non-fatal conditions attached to a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumNotice {
    /// `V1 < alpha`: no sidebands, only the elastic level.
    Degenerate { v1: f64, alpha: f64 },
    /// `V1 / alpha` is not an integer, so `1 / (N omega)` and `1 / V1` differ.
    NonIntegralRatio { ratio: f64, n_max: u32 },
    /// `E_N - V1 <= 0`: some emission channels are closed.
    ClosedChannels { count: usize },
}

impl fmt::Display for SpectrumNotice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumNotice::Degenerate { v1, alpha } => write!(
                f,
                "degenerate spectrum: V1 = {v1} < alpha = {alpha}, elastic channel only"
            ),
            SpectrumNotice::NonIntegralRatio { ratio, n_max } => write!(
                f,
                "V1/alpha = {ratio} is not integral; using N = {n_max} and tau = 1/(N omega)"
            ),
            SpectrumNotice::ClosedChannels { count } => {
                write!(f, "{count} channel(s) closed (energy <= 0)")
            }
        }
    }
}

/// The finite set of channels for one barrier configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpectrum {
    pub n_max: u32,
    pub alpha: f64,
    pub omega: f64,
    pub v1: f64,
    /// The timeon `1 / (N omega)`; absent when `N = 0`.
    pub tau: Option<f64>,
    pub e_elastic: f64,
    /// Sorted by ascending energy.
    pub channels: Vec<Channel>,
    pub notices: Vec<SpectrumNotice>,
}

impl ChannelSpectrum {
    pub fn is_degenerate(&self) -> bool {
        self.n_max == 0
    }

    pub fn channel(&self, n: u32, branch: Branch) -> Option<&Channel> {
        self.channels
            .iter()
            .find(|c| c.n == n && c.branch == branch)
    }

    pub fn elastic(&self) -> &Channel {
        self.channels
            .iter()
            .find(|c| c.branch == Branch::Elastic)
            .expect("every spectrum has an elastic channel")
    }
}

/// Builds the `2N + 1` channels, sorted by energy.
///
/// `N = floor(V1 / alpha)` with a relative tolerance of 1e-9 so that ratios
/// like `0.3 / 0.1` count as integral. Channel offsets are capped at `V1`,
/// which keeps every level inside `[E_N - V1, E_N + V1]` when rounding pushes
/// `N alpha` a few ulps past `V1`.
pub fn build_spectrum(cfg: &BarrierConfig) -> Result<ChannelSpectrum> {
    cfg.validate()?;
    let alpha = cfg.alpha();
    let ratio = cfg.v1 / alpha;
    let nearest = ratio.round();
    let n_max_f = if (ratio - nearest).abs() <= INTEGRAL_RATIO_TOL * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    if n_max_f > f64::from(u32::MAX) {
        return Err(Error::Domain(format!(
            "V1/alpha = {ratio} gives too many channels"
        )));
    }
    let n_max = n_max_f as u32;

    let mut notices = Vec::new();
    if n_max == 0 {
        notices.push(SpectrumNotice::Degenerate { v1: cfg.v1, alpha });
    } else if ((f64::from(n_max) * alpha - cfg.v1) / cfg.v1).abs() > INTEGRAL_RATIO_TOL {
        notices.push(SpectrumNotice::NonIntegralRatio { ratio, n_max });
    }

    let e_n = cfg.e_incident;
    let nn = f64::from(n_max);
    let mut channels = Vec::with_capacity(2 * n_max as usize + 1);
    for n in 0..=n_max {
        let nf = f64::from(n);
        let branches: &[Branch] = if n == n_max {
            &[Branch::Elastic]
        } else {
            &[Branch::Emission, Branch::Absorption]
        };
        let offset = ((nn * nn - nf * nf).sqrt() * alpha).min(cfg.v1);
        for &branch in branches {
            let (energy, snapshot_height) = match branch {
                Branch::Elastic => (e_n, cfg.v0),
                Branch::Absorption => (e_n + offset, cfg.v0 + offset),
                Branch::Emission => (e_n - offset, cfg.v0 - offset),
            };
            channels.push(Channel {
                n,
                branch,
                energy,
                snapshot_height,
                classification: Classification::of(energy, cfg.v0),
            });
        }
    }
    channels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.n.cmp(&b.n)));

    let closed = channels
        .iter()
        .filter(|c| c.classification == Classification::Closed)
        .count();
    if closed > 0 {
        notices.push(SpectrumNotice::ClosedChannels { count: closed });
    }

    Ok(ChannelSpectrum {
        n_max,
        alpha,
        omega: cfg.omega,
        v1: cfg.v1,
        tau: (n_max > 0).then(|| 1.0 / (nn * cfg.omega)),
        e_elastic: e_n,
        channels,
        notices,
    })
}

/// Level density `1 / |n alpha omega|`; diverges at the band centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Density {
    Finite(f64),
    Unbounded,
}

impl Density {
    pub fn finite(self) -> Option<f64> {
        match self {
            Density::Finite(v) => Some(v),
            Density::Unbounded => None,
        }
    }
}

pub fn density_of_states(n: i64, alpha: f64, omega: f64) -> Density {
    if n == 0 {
        return Density::Unbounded;
    }
    Density::Finite(1.0 / (n as f64 * alpha * omega).abs())
}

/// Principal entry instant `arccos(n / N) / omega`, in `[0, pi / omega]`.
///
/// The full solution set of `cos(omega t) = n / N` is `+-t_n + 2 pi k / omega`.
pub fn entry_time(n: u32, spectrum: &ChannelSpectrum) -> Result<f64> {
    if spectrum.n_max == 0 {
        return Err(Error::Domain(
            "entry time undefined for a degenerate spectrum (N = 0)".into(),
        ));
    }
    if n > spectrum.n_max {
        return Err(Error::Domain(format!(
            "entry channel n = {n} exceeds N = {}",
            spectrum.n_max
        )));
    }
    let c = f64::from(n) / f64::from(spectrum.n_max);
    Ok(c.acos() / spectrum.omega)
}
