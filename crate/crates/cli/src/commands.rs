use anyhow::{bail, ensure, Context, Result};
use mcrelay::channel::{ChannelModel, HopChannel};
use mcrelay::link::{
    direct_error, optimize_thresholds, sweep_allocation, sweep_kinetics, sweep_relay_position,
    two_hop_error, ErrorBreakdown, LinkConfig, Thresholds,
};
use mcrelay::sim::{estimate_psi_mc, simulate_two_hop_ber, two_hop_trace};
use rayon::prelude::*;

use crate::cli::{
    Axis, BerArgs, BerMode, Command, CompareArgs, HopChoice, PsiArgs, SweepArgs, TraceArgs,
};
use crate::config::RunConfig;

/// Tabular result plus human-readable summary lines.
#[derive(Debug, Default)]
pub struct Output {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
}

impl Output {
    fn new(header: &[&str]) -> Self {
        Output {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }
}

/// Analytical values: 12 significant digits.
fn an(x: f64) -> String {
    format!("{x:.11e}")
}

/// Monte Carlo estimates: 6 significant digits.
fn mc(x: f64) -> String {
    format!("{x:.5e}")
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Output> {
    match cmd {
        Command::Psi(a) => psi(a, cfg),
        Command::Ber(a) => ber(a, cfg),
        Command::Sweep(a) => sweep(a, cfg),
        Command::CompareDirect(a) => compare_direct(a, cfg),
        Command::Trace(a) => trace(a, cfg),
    }
}

fn select_hop(link: &LinkConfig, choice: HopChoice) -> Result<HopChannel> {
    Ok(match choice {
        HopChoice::First => link.first_hop()?,
        HopChoice::Second => link.second_hop()?,
        HopChoice::Direct => link.direct_hop()?,
    })
}

fn psi(a: &PsiArgs, cfg: &RunConfig) -> Result<Output> {
    ensure!(
        a.t_min > 0.0 && a.t_min.is_finite(),
        "--t-min must be > 0, got {}",
        a.t_min
    );
    ensure!(
        a.t_max >= a.t_min && a.t_max.is_finite(),
        "--t-max must be >= --t-min"
    );
    ensure!(a.points >= 1, "--points must be >= 1");
    let hop = select_hop(&cfg.link, a.hop)?;
    let step = if a.points > 1 {
        (a.t_max - a.t_min) / (a.points - 1) as f64
    } else {
        0.0
    };
    let mut grid: Vec<f64> = (0..a.points).map(|i| a.t_min + i as f64 * step).collect();
    let dt = cfg.simulation.dt;
    if a.mc_validate {
        // the simulator samples on multiples of dt
        grid.iter_mut()
            .for_each(|t| *t = (*t / dt).round().max(1.0) * dt);
    }
    let model = cfg.model();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| {
            model
                .psi(t, &hop)
                .with_context(|| format!("binding response at t = {t}"))
        })
        .collect::<Result<_>>()?;

    let mut out = if a.mc_validate {
        Output::new(&["t_s", "psi_analytical", "psi_mc", "std_err"])
    } else {
        Output::new(&["t_s", "psi_analytical"])
    };
    if a.mc_validate {
        let est = estimate_psi_mc(&hop, &grid, a.molecules, &cfg.simulation)?;
        let mut worst = 0.0f64;
        for ((t, v), e) in grid.iter().zip(&values).zip(&est) {
            if e.std_err > 0.0 {
                worst = worst.max((e.psi_hat - v).abs() / e.std_err);
            }
            out.rows
                .push(vec![an(*t), an(*v), mc(e.psi_hat), mc(e.std_err)]);
        }
        out.summary.push(format!(
            "largest deviation {worst:.2} standard errors over {} points ({} molecules)",
            grid.len(),
            a.molecules
        ));
    } else {
        out.rows = grid
            .iter()
            .zip(&values)
            .map(|(t, v)| vec![an(*t), an(*v)])
            .collect();
    }
    let peak = values.iter().copied().fold(0.0, f64::max);
    out.summary.push(format!("peak psi {peak:.6e}"));
    Ok(out)
}

/// Thresholds from the configuration, or the jointly optimal pair.
fn resolve_thresholds(model: &ChannelModel, link: &LinkConfig) -> Result<LinkConfig> {
    let mut c = link.clone();
    if c.thresholds.is_none() {
        let best = optimize_thresholds(model, &c, None).context("threshold optimization")?;
        c.thresholds = Some(Thresholds {
            tau_r: best.tau_r,
            tau_d: best.tau_d,
        });
    }
    Ok(c)
}

const BREAKDOWN_COLS: [&str; 8] = [
    "p_s1r0", "p_s0r1", "p_s1r1", "p_s0r0", "p_r1d0", "p_r0d1", "p_r1d1", "p_r0d0",
];

fn breakdown_cells(b: &ErrorBreakdown, fmt: fn(f64) -> String) -> Vec<String> {
    [
        b.p_s1r0, b.p_s0r1, b.p_s1r1, b.p_s0r0, b.p_r1d0, b.p_r0d1, b.p_r1d1, b.p_r0d0,
    ]
    .into_iter()
    .map(fmt)
    .collect()
}

fn ber(a: &BerArgs, cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model();
    let link = resolve_thresholds(&model, &cfg.link)?;
    let th = link.thresholds.expect("resolved");
    let mut header = vec![
        "mode",
        "tau_r",
        "tau_d",
        "pe",
        "ci_low",
        "ci_high",
        "snapshots",
    ];
    header.extend(BREAKDOWN_COLS);
    let mut out = Output::new(&header);
    out.summary.push(format!(
        "thresholds tau_r = {}, tau_d = {}",
        th.tau_r, th.tau_d
    ));

    let analytical = matches!(a.mode, BerMode::Analytical | BerMode::Both)
        .then(|| two_hop_error(&model, &link))
        .transpose()?;
    let simulated = matches!(a.mode, BerMode::Simulate | BerMode::Both)
        .then(|| simulate_two_hop_ber(&cfg.simulation, &link))
        .transpose()?;

    if let Some(b) = &analytical {
        let mut row = vec![
            "analytical".into(),
            th.tau_r.to_string(),
            th.tau_d.to_string(),
            an(b.pe),
        ];
        row.extend([String::new(), String::new(), String::new()]);
        row.extend(breakdown_cells(b, an));
        out.rows.push(row);
        out.summary.push(format!("analytical pe {:.6e}", b.pe));
    }
    if let Some(r) = &simulated {
        let mut row = vec![
            "simulated".into(),
            th.tau_r.to_string(),
            th.tau_d.to_string(),
            mc(r.pe),
            mc(r.ci95.0),
            mc(r.ci95.1),
            r.snapshots.to_string(),
        ];
        row.extend(breakdown_cells(&r.breakdown, mc));
        out.rows.push(row);
        out.summary.push(format!(
            "simulated pe {:.6e}, 95% CI [{:.6e}, {:.6e}] over {} snapshots",
            r.pe, r.ci95.0, r.ci95.1, r.snapshots
        ));
    }
    if let (Some(b), Some(r)) = (&analytical, &simulated) {
        let inside = r.ci95.0 <= b.pe && b.pe <= r.ci95.1;
        out.summary.push(format!(
            "analytical pe inside simulated CI: {}",
            if inside { "yes" } else { "no" }
        ));
    }
    Ok(out)
}

fn sweep(a: &SweepArgs, cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model();
    let link = &cfg.link;
    let (mut out, configs) = match a.axis {
        Axis::RelayPosition => {
            let ratios = a
                .values
                .clone()
                .unwrap_or_else(|| vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]);
            ensure!(!ratios.is_empty(), "the grid is empty");
            let pts = sweep_relay_position(&model, link, &ratios)?;
            let mut out = Output::new(&["ratio", "tau_r", "tau_d", "pe"]);
            let mut configs = Vec::new();
            for p in &pts {
                out.rows.push(vec![
                    p.ratio.to_string(),
                    p.tau_r.to_string(),
                    p.tau_d.to_string(),
                    an(p.pe),
                ]);
                configs.push(with_thresholds(link.with_ratio(p.ratio)?, p.tau_r, p.tau_d));
            }
            (out, configs)
        }
        Axis::Allocation => {
            let Some(budget) = link.protocol.budget else {
                bail!("the allocation sweep needs protocol.budget");
            };
            let values = a
                .values
                .clone()
                .unwrap_or_else(|| (1..10).map(|k| (k * budget / 10) as f64).collect());
            ensure!(!values.is_empty(), "the grid is empty");
            let n_a: Vec<u64> = values
                .iter()
                .map(|&v| {
                    ensure!(
                        v >= 0.0 && v.fract() == 0.0,
                        "N_A values must be whole numbers, got {v}"
                    );
                    Ok(v as u64)
                })
                .collect::<Result<_>>()?;
            let pts = sweep_allocation(&model, link, budget, &n_a)?;
            let mut out = Output::new(&["n_a", "n_b", "tau_r", "tau_d", "pe"]);
            let mut configs = Vec::new();
            for p in &pts {
                out.rows.push(vec![
                    p.n_a.to_string(),
                    p.n_b.to_string(),
                    p.tau_r.to_string(),
                    p.tau_d.to_string(),
                    an(p.pe),
                ]);
                configs.push(with_thresholds(
                    link.with_allocation(budget, p.n_a)?,
                    p.tau_r,
                    p.tau_d,
                ));
            }
            (out, configs)
        }
        Axis::KonKoffGrid => {
            ensure!(
                !a.k_on.is_empty() && !a.k_off.is_empty(),
                "the grid is empty"
            );
            let pts = sweep_kinetics(&model, link, &a.k_on, &a.k_off)?;
            let mut out = Output::new(&["k_on", "k_off", "tau_r", "tau_d", "pe"]);
            let mut configs = Vec::new();
            for p in &pts {
                out.rows.push(vec![
                    p.k_on.to_string(),
                    p.k_off.to_string(),
                    p.tau_r.to_string(),
                    p.tau_d.to_string(),
                    an(p.pe),
                ]);
                configs.push(with_thresholds(
                    link.with_rates(p.k_on, p.k_off),
                    p.tau_r,
                    p.tau_d,
                ));
            }
            (out, configs)
        }
    };

    if let Some((i, best)) = out
        .rows
        .iter()
        .map(|r| {
            r.last()
                .and_then(|s| s.parse::<f64>().ok())
                .unwrap_or(f64::NAN)
        })
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        out.summary.push(format!(
            "minimum pe {best:.6e} at {} = {}",
            out.header[0], out.rows[i][0]
        ));
    }

    if a.simulate {
        let key = out.header[0].clone();
        out.header
            .extend(["pe_mc", "ci_low", "ci_high"].map(String::from));
        for (row, c) in out.rows.iter_mut().zip(&configs) {
            let r = simulate_two_hop_ber(&cfg.simulation, c)
                .with_context(|| format!("simulation at {key} = {}", row[0]))?;
            row.extend([mc(r.pe), mc(r.ci95.0), mc(r.ci95.1)]);
        }
    }
    Ok(out)
}

fn with_thresholds(mut c: LinkConfig, tau_r: i64, tau_d: i64) -> LinkConfig {
    c.thresholds = Some(Thresholds { tau_r, tau_d });
    c
}

fn compare_direct(a: &CompareArgs, cfg: &RunConfig) -> Result<Output> {
    let model = cfg.model();
    let link = &cfg.link;
    let Some(budget) = link.protocol.budget else {
        bail!("compare-direct needs protocol.budget");
    };
    let n_direct = a.n_direct.unwrap_or(budget);
    let relay = optimize_thresholds(&model, link, None).context("relay link")?;
    let direct = direct_error(&model, link, n_direct).context("direct link")?;
    let mut out = Output::new(&[
        "relay_pe",
        "tau_r",
        "tau_d",
        "n_a",
        "n_b",
        "direct_pe",
        "tau_direct",
        "n_direct",
    ]);
    out.rows.push(vec![
        an(relay.pe),
        relay.tau_r.to_string(),
        relay.tau_d.to_string(),
        link.protocol.n_a.to_string(),
        link.protocol.n_b.to_string(),
        an(direct.pe),
        direct.tau.to_string(),
        n_direct.to_string(),
    ]);
    out.summary.push(format!(
        "relay pe {:.6e} (N_A = {}, N_B = {})",
        relay.pe, link.protocol.n_a, link.protocol.n_b
    ));
    out.summary
        .push(format!("direct pe {:.6e} (N = {n_direct})", direct.pe));
    let verdict = if relay.pe < direct.pe {
        format!("relay better by a factor {:.3}", direct.pe / relay.pe)
    } else {
        "relay not better".to_string()
    };
    out.summary.push(verdict);
    Ok(out)
}

fn trace(a: &TraceArgs, cfg: &RunConfig) -> Result<Output> {
    ensure!(a.bit <= 1, "--bit must be 0 or 1");
    let model = cfg.model();
    let link = resolve_thresholds(&model, &cfg.link)?;
    let pts = two_hop_trace(&cfg.simulation, &link, a.snapshot, a.bit == 1)?;
    let mut out = Output::new(&["time_s", "complexes_r", "complexes_d"]);
    out.rows = pts
        .iter()
        .map(|p| {
            vec![
                an(p.time_s),
                p.complexes_r.to_string(),
                p.complexes_d.to_string(),
            ]
        })
        .collect();
    let peak_r = pts.iter().map(|p| p.complexes_r).max().unwrap_or(0);
    let peak_d = pts.iter().map(|p| p.complexes_d).max().unwrap_or(0);
    out.summary.push(format!(
        "peak complexes: relay {peak_r}, destination {peak_d}"
    ));
    Ok(out)
}
