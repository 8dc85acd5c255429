//! Re-reads emitted CSV and re-checks the invariants of the module that
//! produced it.

use crate::barrier::{transmission_static, BarrierConfig};
use crate::spectrum::{Branch, Channel, Classification};
use crate::transmission::transmission_at_energy;
use crate::traversal::{quadratic_coefficients, traversal_exact, traversal_low};

use super::config::{RunConfig, SweepPoint};
use super::table::Table;
use super::{CliError, Command};

const TOL: f64 = 1e-12;
const HIGH_TOL: f64 = 1e-9;

fn fail(row: usize, what: impl std::fmt::Display) -> CliError {
    CliError::Verify(format!("row {row}: {what}"))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Rows grouped by the `point` column, in order.
fn groups(t: &Table, points: &[SweepPoint]) -> Result<Vec<(BarrierConfig, Vec<usize>)>, CliError> {
    let mut out: Vec<(BarrierConfig, Vec<usize>)> = points.iter().map(|p| (p.barrier, Vec::new())).collect();
    for r in 0..t.rows.len() {
        let p = t.int(r, "point")?;
        let slot = usize::try_from(p)
            .ok()
            .and_then(|i| out.get_mut(i))
            .ok_or_else(|| fail(r, format!("unknown point {p}")))?;
        slot.1.push(r);
    }
    if let Some(i) = out.iter().position(|g| g.1.is_empty()) {
        return Err(CliError::Verify(format!("no rows for point {i}")));
    }
    Ok(out)
}

/// Returns a one-line summary of what was checked.
pub fn verify(command: Command, csv: &str, cfg: &RunConfig, points: &[SweepPoint]) -> Result<String, CliError> {
    let t = Table::from_csv(csv)?;
    let what = match command {
        Command::Static => verify_static(&t, cfg, points)?,
        Command::Spectrum => verify_spectrum(&t, points)?,
        Command::Transmit => verify_transmit(&t, points)?,
        Command::Traverse => verify_traverse(&t)?,
        Command::Dos => verify_dos(&t, points)?,
        Command::TgCompare => verify_tg(&t, cfg, points)?,
        Command::Oracle => verify_oracle(&t, cfg, points)?,
    };
    Ok(format!("verified {} rows: {what}", t.rows.len()))
}

fn verify_static(t: &Table, cfg: &RunConfig, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    let gs = groups(t, points)?;
    let mut by_width = Vec::new();
    for (_, rows) in &gs {
        let r = rows[0];
        if rows.len() != 1 {
            return Err(fail(r, "expected one row per point"));
        }
        let cfg_row = BarrierConfig::new_static(t.float(r, "v0")?, t.float(r, "b")?, t.float(r, "e_incident")?);
        let tr = t.float(r, "transmission")?;
        if !(0.0..=1.0).contains(&tr) {
            return Err(fail(r, format!("transmission {tr} outside [0, 1]")));
        }
        let flux = t.float(r, "flux_residual")?;
        if flux.abs() > TOL {
            return Err(fail(r, format!("|R + T - 1| = {flux:e}")));
        }
        let again = transmission_static(&cfg_row).map_err(|e| fail(r, e))?;
        if !close(tr, again, TOL) {
            return Err(fail(r, format!("transmission {tr} does not recompute ({again})")));
        }
        by_width.push((cfg_row.b, tr));
    }
    if cfg.sweep.as_ref().is_some_and(|s| s.parameter == "b") {
        by_width.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = by_width.windows(2).find(|w| w[1].1 > w[0].1) {
            return Err(CliError::Verify(format!(
                "transmission rises with width: T({}) = {} < T({}) = {}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        return Ok("flux, closed form, monotone in width");
    }
    Ok("flux, closed form")
}

fn verify_spectrum(t: &Table, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    for (cfg, rows) in groups(t, points)? {
        let r0 = rows[0];
        let n_max = u32::try_from(t.int(r0, "n_max")?).map_err(|_| fail(r0, "negative N"))?;
        let alpha = t.float(r0, "alpha")?;
        let e_n = t.float(r0, "e_elastic")?;
        let v1 = t.float(r0, "v1")?;
        if rows.len() != 2 * n_max as usize + 1 {
            return Err(fail(r0, format!("{} channels for N = {n_max}", rows.len())));
        }
        let mut offsets = Vec::with_capacity(rows.len());
        for &r in &rows {
            let n = u32::try_from(t.int(r, "n")?).map_err(|_| fail(r, "negative n"))?;
            let branch = Branch::parse(t.text(r, "sign")?).ok_or_else(|| fail(r, "bad sign"))?;
            let energy = t.float(r, "energy")?;
            let ch = Channel {
                n,
                branch,
                energy,
                snapshot_height: t.float(r, "snapshot_height")?,
                classification: Classification::parse(t.text(r, "classification")?)
                    .ok_or_else(|| fail(r, "bad classification"))?,
            };
            let res = ch.circle_residual(e_n, alpha, n_max);
            // absolute for small bands, relative to (N alpha)^2 for large ones
            let radius = f64::from(n_max) * alpha;
            if res.abs() > TOL * radius.powi(2).max(1.0) {
                return Err(fail(r, format!("circle residual {res:e}")));
            }
            if energy < e_n - v1 - TOL || energy > e_n + v1 + TOL {
                return Err(fail(r, format!("energy {energy} outside [E_N - V1, E_N + V1]")));
            }
            if ch.classification != Classification::of(energy, cfg.v0) {
                return Err(fail(r, "classification does not match energy"));
            }
            offsets.push(energy - e_n);
        }
        let mut up: Vec<f64> = offsets.clone();
        let mut down: Vec<f64> = offsets.iter().map(|d| -d).collect();
        up.sort_by(f64::total_cmp);
        down.sort_by(f64::total_cmp);
        if up.iter().zip(&down).any(|(a, b)| (a - b).abs() > TOL) {
            return Err(fail(r0, "energies are not symmetric about E_N"));
        }
    }
    Ok("2N+1 channels, circle identity, band bounds, symmetry, classification")
}

fn verify_transmit(t: &Table, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    for (cfg, rows) in groups(t, points)? {
        let mut sum = 0.0;
        for &r in &rows {
            let energy = t.float(r, "energy")?;
            let class = Classification::parse(t.text(r, "classification")?)
                .ok_or_else(|| fail(r, "bad classification"))?;
            match (class.is_open(), t.opt_float(r, "t_n")?) {
                (true, Some(tn)) => {
                    if !(0.0..=1.0).contains(&tn) {
                        return Err(fail(r, format!("t_n {tn} outside [0, 1]")));
                    }
                    let (again, _) = transmission_at_energy(cfg.v0, cfg.b, energy).map_err(|e| fail(r, e))?;
                    if !close(tn, again, TOL) {
                        return Err(fail(r, format!("t_n {tn} does not recompute ({again})")));
                    }
                    let kn = t.float(r, "kn")?;
                    if !close(kn * kn, energy, TOL) {
                        return Err(fail(r, "kn^2 != E_n"));
                    }
                    sum += tn;
                }
                (false, None) => {}
                _ => return Err(fail(r, "t_n present exactly when the channel is open")),
            }
        }
        let total = t.float(rows[0], "total")?;
        if !close(total, sum, TOL) {
            return Err(fail(rows[0], format!("total {total} != sum {sum}")));
        }
    }
    Ok("t_n in [0, 1], closed form, kn^2 = E_n, total = sum over open channels")
}

fn verify_traverse(t: &Table) -> Result<&'static str, CliError> {
    for r in 0..t.rows.len() {
        let u = |name: &str| -> Result<u32, CliError> {
            u32::try_from(t.int(r, name)?).map_err(|_| fail(r, format!("negative {name}")))
        };
        let (n, m, nn) = (u("n")?, u("m")?, u("N")?);
        let omega = t.float(r, "omega")?;
        let tp = t.float(r, "t_plus")?;
        let tm = t.float(r, "t_minus")?;
        match t.text(r, "regime")? {
            "exact" => {
                let roots = traversal_exact(n, m, nn, omega).map_err(|e| fail(r, e))?;
                if tp != tm || !close(tp, roots[0], TOL) {
                    return Err(fail(r, "exact time is not the smallest root"));
                }
            }
            "low-frequency" => {
                if tp.to_bits() != tm.to_bits() {
                    return Err(fail(r, "low-frequency t_plus != t_minus"));
                }
                let tau = 1.0 / (f64::from(nn) * omega);
                let again = traversal_low(n, m, nn, tau).map_err(|e| fail(r, e))?;
                if !close(tp, again.t_plus, TOL) {
                    return Err(fail(r, "low-frequency time does not recompute"));
                }
            }
            "high-frequency" => {
                let (a, b, c) = quadratic_coefficients(n, m, nn);
                let tan_plus = t.opt_float(r, "tan_theta_plus")?.ok_or_else(|| fail(r, "missing tan_theta_plus"))?;
                let tan_minus = t.opt_float(r, "tan_theta_minus")?;
                let mut roots = vec![tan_plus];
                match tan_minus {
                    Some(x) => roots.push(x),
                    None if a == 0.0 => {}
                    None => return Err(fail(r, "tan_theta_minus missing with A != 0")),
                }
                for x in roots {
                    let res = a * x * x + 2.0 * b * x + c;
                    let scale = (a * x * x).abs() + (2.0 * b * x).abs() + c.abs();
                    if res.abs() > HIGH_TOL * scale.max(1.0) {
                        return Err(fail(r, format!("quadratic residual {res:e} at tan = {x}")));
                    }
                }
                let ratio = t.float(r, "ratio")?;
                if !(ratio < 1.0) {
                    return Err(fail(r, format!("ratio {ratio} not below 1")));
                }
                if !(tp > 0.0 && tm > 0.0) {
                    return Err(fail(r, "non-positive high-frequency time"));
                }
            }
            other => return Err(fail(r, format!("unknown regime `{other}`"))),
        }
    }
    Ok("exact roots, low-frequency equality, high-frequency quadratic and ratio")
}

fn verify_dos(t: &Table, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    for (_, rows) in groups(t, points)? {
        for &r in &rows {
            let n = t.int(r, "n")?;
            let cell = t.text(r, "density")?;
            if n == 0 {
                if cell != "unbounded" {
                    return Err(fail(r, "n = 0 must be unbounded"));
                }
                continue;
            }
            let rho = t.float(r, "density")?;
            let product = rho * (n as f64 * t.float(r, "alpha")? * t.float(r, "omega")?).abs();
            if (product - 1.0).abs() > 4.0 * f64::EPSILON {
                return Err(fail(r, format!("rho |n alpha omega| = {product}")));
            }
        }
    }
    Ok("rho |n alpha omega| = 1, unbounded at n = 0")
}

fn verify_tg(t: &Table, cfg: &RunConfig, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    for (barrier, rows) in groups(t, points)? {
        let (mut exact, mut tg) = (Vec::new(), Vec::new());
        for &r in &rows {
            match t.text(r, "source")? {
                "exact" => exact.push(r),
                "tg" => tg.push(r),
                other => return Err(fail(r, format!("unknown source `{other}`"))),
            }
        }
        let lo = barrier.e_incident - barrier.v1 - TOL;
        let hi = barrier.e_incident + barrier.v1 + TOL;
        if exact.len() % 2 != 1 {
            return Err(fail(rows[0], "exact spectrum must have 2N+1 levels"));
        }
        for &r in &exact {
            let e = t.float(r, "energy")?;
            if e < lo || e > hi {
                return Err(fail(r, "exact level outside the band"));
            }
        }
        let mut weight = 0.0;
        let mut prev: Option<f64> = None;
        for &r in &tg {
            let w = t.float(r, "weight")?;
            let e = t.float(r, "energy")?;
            weight += w;
            if let Some(p) = prev {
                if !close(e - p, barrier.alpha(), 1e-9) {
                    return Err(fail(r, "sidebands not spaced by alpha"));
                }
            }
            prev = Some(e);
            if let Some(tr) = t.opt_float(r, "transmission")? {
                let (ts, _) = transmission_at_energy(barrier.v0, barrier.b, e).map_err(|e| fail(r, e))?;
                if !close(tr, w * ts, TOL) {
                    return Err(fail(r, "sideband transmission != weight * T(E_n)"));
                }
            }
        }
        // weights are printed to 17 digits, so the sum can lose an ulp or two
        if weight < 1.0 - cfg.tg.cutoff_tol - TOL || weight > 1.0 + TOL {
            return Err(fail(rows[0], format!("sideband weights sum to {weight}")));
        }
    }
    Ok("finite band, sideband spacing, weight sum, weighted transmissions")
}

fn verify_oracle(t: &Table, cfg: &RunConfig, points: &[SweepPoint]) -> Result<&'static str, CliError> {
    for (_, rows) in groups(t, points)? {
        if rows.len() != cfg.oracle.samples {
            return Err(fail(rows[0], "sample count mismatch"));
        }
        for &r in &rows {
            let k = t.float(r, "k")?;
            if t.float(r, "energy")? != k * k {
                return Err(fail(r, "energy != k^2"));
            }
            if !(t.float(r, "density")? >= 0.0) {
                return Err(fail(r, "negative density"));
            }
        }
    }
    Ok("energy = k^2, non-negative densities")
}
