//! Per-command evaluation into a table, a JSON document and an optional plot.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::barrier::{match_static, transmission_opaque, transmission_static};
use crate::spectrum::{build_spectrum, density_of_states, entry_time, Density};
use crate::tdse::{self, DrivenBarrier};
use crate::tien_gordon::tg_sidebands;
use crate::transmission::{transmission_at_energy, transmission_total};
use crate::traversal::{
    high_freq_ratio, traversal_exact, traversal_high, traversal_low, traversal_low_approx,
};

use super::config::{RunConfig, SweepPoint};
use super::svg::{Plot, Series, Style};
use super::table::{num, opt_num, Table};
use super::{CliError, Command};

pub struct Output {
    pub table: Table,
    pub json: Value,
    pub plot: Option<Plot>,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

fn numerical(point: &SweepPoint) -> impl Fn(crate::Error) -> CliError + '_ {
    move |e| CliError::Numerical(format!("point {}: {e}", point.index))
}

fn lead(point: &SweepPoint) -> Vec<String> {
    vec![point.index.to_string(), opt_num(point.value)]
}

/// Evaluates sweep points concurrently, keeping sweep order.
fn each<T: Send>(
    points: &[SweepPoint],
    f: impl Fn(&SweepPoint) -> Result<T, CliError> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    points.par_iter().map(f).collect()
}

fn sweep_label(cfg: &RunConfig) -> String {
    cfg.sweep
        .as_ref()
        .map(|s| s.parameter.clone())
        .unwrap_or_else(|| "point".into())
}

fn x_of(p: &SweepPoint) -> f64 {
    p.value.unwrap_or(p.index as f64)
}

pub fn evaluate(command: Command, cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    match command {
        Command::Static => static_cmd(cfg, points),
        Command::Spectrum => spectrum_cmd(points),
        Command::Transmit => transmit_cmd(cfg, points),
        Command::Traverse => traverse_cmd(cfg, points),
        Command::Dos => dos_cmd(points),
        Command::TgCompare => tg_compare_cmd(cfg, points),
        Command::Oracle => oracle_cmd(cfg, points),
    }
}

fn static_cmd(cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    let results = each(points, |p| {
        let err = numerical(p);
        let sol = match_static(&p.barrier).map_err(&err)?;
        let t = transmission_static(&p.barrier).map_err(&err)?;
        let opaque = transmission_opaque(&p.barrier).map_err(&err)?;
        Ok((sol, t, opaque))
    })?;
    let mut table = Table::new(&[
        "point", "sweep_value", "v0", "b", "e_incident", "k0", "kappa0", "kappa_b",
        "transmission", "reflection", "transmission_opaque", "flux_residual",
    ]);
    let mut docs = Vec::new();
    for (p, (sol, t, opaque)) in points.iter().zip(&results) {
        let c = &p.barrier;
        let mut row = lead(p);
        row.extend([
            num(c.v0),
            num(c.b),
            num(c.e_incident),
            num(sol.k0),
            num(sol.kappa0),
            num(sol.kappa0 * c.b),
            num(*t),
            num(sol.reflection),
            num(*opaque),
            num(sol.reflection + sol.transmission - 1.0),
        ]);
        table.push(row);
        docs.push(json!({
            "point": p.index,
            "sweep_value": p.value,
            "barrier": c,
            "transmission": t,
            "transmission_opaque": opaque,
            "matched": sol,
        }));
    }
    let style = if points.len() > 1 { Style::Line } else { Style::Markers };
    let plot = Plot {
        title: "Static transmission".into(),
        x_label: sweep_label(cfg),
        y_label: "T".into(),
        series: vec![
            Series {
                label: "exact".into(),
                style,
                points: points.iter().zip(&results).map(|(p, r)| (x_of(p), r.1)).collect(),
            },
            Series {
                label: "opaque limit".into(),
                style,
                points: points.iter().zip(&results).map(|(p, r)| (x_of(p), r.2)).collect(),
            },
        ],
    };
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(plot),
        notes: Vec::new(),
    })
}

fn spectrum_cmd(points: &[SweepPoint]) -> Result<Output, CliError> {
    let spectra = each(points, |p| build_spectrum(&p.barrier).map_err(numerical(p)))?;
    let mut table = Table::new(&[
        "point", "sweep_value", "n", "sign", "n_alpha", "energy", "snapshot_height",
        "classification", "n_max", "alpha", "e_elastic", "v0", "v1",
    ]);
    let mut docs = Vec::new();
    let mut notes = Vec::new();
    let mut series = Vec::new();
    for (p, s) in points.iter().zip(&spectra) {
        for c in &s.channels {
            let mut row = lead(p);
            row.extend([
                c.n.to_string(),
                c.branch.symbol().to_string(),
                num(f64::from(c.n) * s.alpha),
                num(c.energy),
                num(c.snapshot_height),
                c.classification.as_str().to_string(),
                s.n_max.to_string(),
                num(s.alpha),
                num(s.e_elastic),
                num(p.barrier.v0),
                num(s.v1),
            ]);
            table.push(row);
        }
        let entry: Vec<Option<f64>> = (0..=s.n_max).map(|n| entry_time(n, s).ok()).collect();
        docs.push(json!({
            "point": p.index,
            "sweep_value": p.value,
            "spectrum": s,
            "entry_times": entry,
        }));
        notes.extend(s.notices.iter().map(|n| format!("point {}: {n}", p.index)));

        let radius = f64::from(s.n_max) * s.alpha;
        let circle = (0..=128)
            .map(|i| {
                let th = -0.5 * PI + PI * f64::from(i) / 128.0;
                (radius * th.cos(), s.e_elastic + radius * th.sin())
            })
            .collect();
        series.push(Series {
            label: format!("circle {}", p.index),
            style: Style::Line,
            points: circle,
        });
        series.push(Series {
            label: format!("levels {}", p.index),
            style: Style::Markers,
            points: s
                .channels
                .iter()
                .map(|c| (f64::from(c.n) * s.alpha, c.energy))
                .collect(),
        });
    }
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(Plot {
            title: "Quantized channel energies".into(),
            x_label: "n alpha".into(),
            y_label: "E".into(),
            series,
        }),
        notes,
    })
}

fn transmit_cmd(cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    let results = each(points, |p| transmission_total(&p.barrier).map_err(numerical(p)))?;
    let mut table = Table::new(&[
        "point", "sweep_value", "n", "sign", "energy", "classification", "kn", "kappa_n",
        "formula", "t_n", "total", "open_count", "closed_count",
    ]);
    let mut docs = Vec::new();
    let mut notes = Vec::new();
    for (p, r) in points.iter().zip(&results) {
        for c in &r.per_channel {
            let mut row = lead(p);
            row.extend([
                c.n.to_string(),
                c.branch.symbol().to_string(),
                num(c.energy),
                c.classification.as_str().to_string(),
                opt_num(c.kn),
                opt_num(c.kappa_n),
                c.formula.map(|f| f.as_str().to_string()).unwrap_or_default(),
                opt_num(c.t_n),
                num(r.total),
                r.open_count.to_string(),
                r.closed_count.to_string(),
            ]);
            table.push(row);
        }
        docs.push(json!({ "point": p.index, "sweep_value": p.value, "result": r }));
        notes.extend(r.notices.iter().map(|n| format!("point {}: {n}", p.index)));
    }
    let plot = if points.len() > 1 {
        Plot {
            title: "Total transmission".into(),
            x_label: sweep_label(cfg),
            y_label: "sum of T_n".into(),
            series: vec![Series {
                label: "total".into(),
                style: Style::Line,
                points: points.iter().zip(&results).map(|(p, r)| (x_of(p), r.total)).collect(),
            }],
        }
    } else {
        Plot {
            title: "Channel transmission".into(),
            x_label: "E_n".into(),
            y_label: "T_n".into(),
            series: vec![Series {
                label: "open channels".into(),
                style: Style::Markers,
                points: results[0]
                    .per_channel
                    .iter()
                    .filter_map(|c| c.t_n.map(|t| (c.energy, t)))
                    .collect(),
            }],
        }
    };
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(plot),
        notes,
    })
}

pub const TRAVERSE_COLUMNS: [&str; 15] = [
    "point", "sweep_value", "n", "m", "N", "omega", "regime", "t_plus", "t_minus",
    "tan_theta_plus", "tan_theta_minus", "branch", "ratio", "low_approx", "outside_regime",
];

#[derive(Serialize)]
struct TraverseDoc {
    point: usize,
    sweep_value: Option<f64>,
    n_max: u32,
    omega: f64,
    tau: f64,
    pairs: Vec<PairDoc>,
}

#[derive(Serialize)]
struct PairDoc {
    n: u32,
    m: u32,
    exact_roots: Vec<f64>,
    low: Option<crate::traversal::TraversalSolution>,
    low_approx: Option<crate::traversal::LowApprox>,
    high: Option<crate::traversal::TraversalSolution>,
    ratio: Option<f64>,
}

fn traverse_cmd(cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    let branch = cfg.traverse.branch;
    let docs = each(points, |p| {
        let err = numerical(p);
        let s = build_spectrum(&p.barrier).map_err(&err)?;
        let (nn, omega) = (s.n_max, s.omega);
        let Some(tau) = s.tau else {
            return Err(CliError::Numerical(format!(
                "point {}: degenerate spectrum (N = 0) has no traversal times",
                p.index
            )));
        };
        let pairs: Vec<(u32, u32)> = match &cfg.traverse.pairs {
            Some(list) => {
                if let Some(&(n, m)) = list.iter().find(|&&(n, m)| m >= n || n > nn) {
                    return Err(CliError::Validation(format!(
                        "field `traverse.pairs`: ({n}, {m}) needs 0 <= m < n <= N = {nn} at point {}",
                        p.index
                    )));
                }
                list.clone()
            }
            None => (1..=nn).flat_map(|n| (0..n).map(move |m| (n, m))).collect(),
        };
        let mut out = Vec::with_capacity(pairs.len());
        for (n, m) in pairs {
            let exact_roots = traversal_exact(n, m, nn, omega).map_err(&err)?;
            let (low, low_approx) = if n < nn {
                (
                    Some(traversal_low(n, m, nn, tau).map_err(&err)?),
                    Some(traversal_low_approx(n, m, nn, tau).map_err(&err)?),
                )
            } else {
                (None, None)
            };
            let (high, ratio) = if m > 0 && n < nn {
                let h = traversal_high(n, m, nn, omega).map_err(&err)?;
                let h = if branch == h.branch { h } else { h.with_branch(branch, omega).map_err(&err)? };
                (Some(h), Some(high_freq_ratio(n, m, nn).map_err(&err)?))
            } else {
                (None, None)
            };
            out.push(PairDoc {
                n,
                m,
                exact_roots,
                low,
                low_approx,
                high,
                ratio,
            });
        }
        Ok(TraverseDoc {
            point: p.index,
            sweep_value: p.value,
            n_max: nn,
            omega,
            tau,
            pairs: out,
        })
    })?;

    let mut table = Table::new(&TRAVERSE_COLUMNS);
    let mut notes = Vec::new();
    for d in &docs {
        let head = |regime: &str| {
            vec![
                d.point.to_string(),
                opt_num(d.sweep_value),
                String::new(),
                String::new(),
                d.n_max.to_string(),
                num(d.omega),
                regime.to_string(),
            ]
        };
        for pr in &d.pairs {
            let with_pair = |mut row: Vec<String>| {
                row[2] = pr.n.to_string();
                row[3] = pr.m.to_string();
                row
            };
            let first = pr.exact_roots[0];
            let mut row = with_pair(head("exact"));
            row.extend([num(first), num(first), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]);
            table.push(row);
            if let (Some(low), Some(apx)) = (&pr.low, &pr.low_approx) {
                let mut row = with_pair(head("low-frequency"));
                row.extend([
                    num(low.t_plus),
                    num(low.t_minus),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    num(apx.time),
                    apx.outside_regime.to_string(),
                ]);
                table.push(row);
                if apx.outside_regime {
                    notes.push(format!(
                        "point {}: n = {} > N/4, the low-frequency approximation is outside its regime",
                        d.point, pr.n
                    ));
                }
            }
            if let Some(h) = &pr.high {
                let mut row = with_pair(head("high-frequency"));
                row.extend([
                    num(h.t_plus),
                    num(h.t_minus),
                    opt_num(h.tan_theta_plus),
                    opt_num(h.tan_theta_minus),
                    h.branch.to_string(),
                    opt_num(pr.ratio),
                    String::new(),
                    String::new(),
                ]);
                table.push(row);
            }
        }
    }
    notes.dedup();
    Ok(Output {
        table,
        json: serde_json::to_value(&docs).map_err(|e| CliError::Io(e.to_string()))?,
        plot: None,
        notes,
    })
}

fn dos_cmd(points: &[SweepPoint]) -> Result<Output, CliError> {
    let spectra = each(points, |p| build_spectrum(&p.barrier).map_err(numerical(p)))?;
    let mut table = Table::new(&["point", "sweep_value", "n", "n_alpha", "density", "alpha", "omega"]);
    let mut docs = Vec::new();
    let mut series = Vec::new();
    for (p, s) in points.iter().zip(&spectra) {
        let nn = i64::from(s.n_max);
        let rows: Vec<(i64, Density)> = (-nn..=nn)
            .map(|n| (n, density_of_states(n, s.alpha, s.omega)))
            .collect();
        for (n, d) in &rows {
            let mut row = lead(p);
            row.extend([
                n.to_string(),
                num(*n as f64 * s.alpha),
                d.finite().map(num).unwrap_or_else(|| "unbounded".into()),
                num(s.alpha),
                num(s.omega),
            ]);
            table.push(row);
        }
        docs.push(json!({
            "point": p.index,
            "sweep_value": p.value,
            "n_max": s.n_max,
            "alpha": s.alpha,
            "omega": s.omega,
            "density": rows.iter().map(|(n, d)| json!({ "n": n, "density": d })).collect::<Vec<_>>(),
        }));
        if nn > 0 {
            // continuous curves 1/|x omega|, cut short of the divergence at x = 0
            let edge = s.n_max as f64 * s.alpha;
            let inner = 0.5 * s.alpha;
            let branch = |sign: f64| {
                (0..=100).map(move |i| {
                    let x = sign * (inner + (edge - inner) * f64::from(i) / 100.0);
                    (x, 1.0 / (x * s.omega).abs())
                })
            };
            let mut curve: Vec<(f64, f64)> = branch(-1.0).collect();
            curve.push((f64::NAN, f64::NAN));
            curve.extend(branch(1.0));
            series.push(Series {
                label: format!("rho {}", p.index),
                style: Style::Line,
                points: curve,
            });
            series.push(Series {
                label: format!("levels {}", p.index),
                style: Style::Markers,
                points: rows
                    .iter()
                    .filter_map(|(n, d)| d.finite().map(|v| (*n as f64 * s.alpha, v)))
                    .collect(),
            });
        }
    }
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(Plot {
            title: "Density of states".into(),
            x_label: "n alpha".into(),
            y_label: "rho".into(),
            series,
        }),
        notes: Vec::new(),
    })
}

fn tg_compare_cmd(cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    let tol = cfg.tg.cutoff_tol;
    let results = each(points, |p| {
        let err = numerical(p);
        let exact = transmission_total(&p.barrier).map_err(&err)?;
        let tg = tg_sidebands(&p.barrier, tol).map_err(|e| match e {
            crate::Error::InvalidParameter { .. } => CliError::Validation(format!("tg.{e}")),
            other => err(other),
        })?;
        Ok((exact, tg))
    })?;
    let mut table = Table::new(&[
        "point", "sweep_value", "source", "n", "sign", "energy", "weight", "classification",
        "transmission",
    ]);
    let mut docs = Vec::new();
    let mut notes = Vec::new();
    let mut series = Vec::new();
    for (p, (exact, tg)) in points.iter().zip(&results) {
        for c in &exact.per_channel {
            let mut row = lead(p);
            row.extend([
                "exact".into(),
                c.n.to_string(),
                c.branch.symbol().to_string(),
                num(c.energy),
                String::new(),
                c.classification.as_str().to_string(),
                opt_num(c.t_n),
            ]);
            table.push(row);
        }
        for r in &tg.rows {
            let mut row = lead(p);
            row.extend([
                "tg".into(),
                r.n.to_string(),
                String::new(),
                num(r.energy),
                num(r.weight),
                r.classification.as_str().to_string(),
                opt_num(r.transmission),
            ]);
            table.push(row);
        }
        let beyond = tg.extends_beyond(p.barrier.e_incident, p.barrier.v1);
        notes.push(format!(
            "point {}: exact {} levels, total {:.6}; sidebands {} (|n| <= {}), total {:.6}{}",
            p.index,
            exact.per_channel.len(),
            exact.total,
            tg.rows.len(),
            tg.n_cutoff,
            tg.total_transmission(),
            if beyond { ", extends beyond E +- V1" } else { "" }
        ));
        docs.push(json!({
            "point": p.index,
            "sweep_value": p.value,
            "exact": exact,
            "tg": tg,
            "tg_total": tg.total_transmission(),
            "tg_extends_beyond_band": beyond,
        }));
        series.push(Series {
            label: format!("exact {}", p.index),
            style: Style::Markers,
            points: exact
                .per_channel
                .iter()
                .filter_map(|c| c.t_n.map(|t| (c.energy, t)))
                .collect(),
        });
        series.push(Series {
            label: format!("sidebands {}", p.index),
            style: Style::Line,
            points: tg
                .rows
                .iter()
                .filter_map(|r| r.transmission.map(|t| (r.energy, t)))
                .collect(),
        });
    }
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(Plot {
            title: "Quantized channels vs sideband ladder".into(),
            x_label: "E".into(),
            y_label: "transmission".into(),
            series,
        }),
        notes,
    })
}

fn oracle_cmd(cfg: &RunConfig, points: &[SweepPoint]) -> Result<Output, CliError> {
    let opts = cfg.oracle;
    if opts.samples < 2 {
        return Err(CliError::Validation("field `oracle.samples`: must be at least 2".into()));
    }
    let results = each(points, |p| {
        let err = numerical(p);
        let potential = DrivenBarrier::from(&p.barrier);
        let energy = opts.energy.unwrap_or(p.barrier.e_incident);
        let plan = tdse::plan_run(&potential, energy, opts.energy_width, opts.points).map_err(|e| match e {
            crate::Error::InvalidParameter { .. } => CliError::Validation(e.to_string()),
            other => err(other),
        })?;
        plan.grid.validate(&potential).map_err(|e| CliError::Validation(e.to_string()))?;
        let state = tdse::propagate(&potential, &plan.grid, &plan.packet).map_err(&err)?;
        let sigma_k = 0.5 / plan.packet.width;
        let low_e = (energy - p.barrier.v1 - 2.0 * p.barrier.omega).max(0.0);
        let high_e = energy + p.barrier.v1 + 2.0 * p.barrier.omega;
        let k_min = opts.k_min.unwrap_or((low_e.sqrt() - 6.0 * sigma_k).max(0.0));
        let k_max = opts.k_max.unwrap_or(high_e.sqrt() + 6.0 * sigma_k);
        let spectrum = tdse::transmitted_spectrum(&state, p.barrier.b, k_min, k_max, opts.samples)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        let fraction = tdse::transmitted_fraction(&state, p.barrier.b);
        let reflected = tdse::reflected_fraction(&state, p.barrier.b);
        let reference = transmission_at_energy(p.barrier.v0, p.barrier.b, energy)
            .map(|r| r.0)
            .map_err(&err)?;
        let doc = json!({
            "point": p.index,
            "sweep_value": p.value,
            "plan": plan,
            "final_time": state.time,
            "norm_drift": state.norm_drift,
            "transmitted_fraction": fraction,
            "reflected_fraction": reflected,
            "static_transmission_at_mean_energy": reference,
            "spectrum": spectrum,
        });
        Ok((spectrum, fraction, reference, state.norm_drift, doc))
    })?;
    let mut table = Table::new(&["point", "sweep_value", "k", "energy", "density"]);
    let mut docs = Vec::new();
    let mut notes = Vec::new();
    let mut series = Vec::new();
    for (p, (spectrum, fraction, reference, drift, doc)) in points.iter().zip(results) {
        for s in &spectrum {
            let mut row = lead(&p.clone());
            row.extend([num(s.k), num(s.energy), num(s.density)]);
            table.push(row);
        }
        notes.push(format!(
            "point {}: transmitted fraction {fraction:.6} (static formula at mean energy {reference:.6}), norm drift {drift:.2e}",
            p.index
        ));
        series.push(Series {
            label: format!("point {}", p.index),
            style: Style::Line,
            points: spectrum.iter().map(|s| (s.energy, s.density)).collect(),
        });
        docs.push(doc);
    }
    Ok(Output {
        table,
        json: Value::Array(docs),
        plot: Some(Plot {
            title: "Transmitted momentum distribution".into(),
            x_label: "E = k^2".into(),
            y_label: "|phi(k)|^2".into(),
            series,
        }),
        notes,
    })
}
