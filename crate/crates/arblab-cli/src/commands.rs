//! Command implementations: dispatch to the library, serialize results, and
//! assemble the run manifest.

use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use arblab::classify::{classify, DiffusionFamily};
use arblab::deflator::{
    price_increasing_profit, price_master, price_na1, price_strong_arbitrage, McPrice,
};
use arblab::funding::{
    build_scale_transform, funding_schedule, shares_with_arbitrager, FundingMode, QProfile,
    ScaleFamily,
};
use arblab::hedging::{
    barrier_delta_initial, barrier_delta_strategy, bessel_na_strategy, increasing_profit_strategy,
    localtime_corrected_strategy, localtime_initial, skew_corrected_strategy, skew_initial,
    verify_superreplication, wealth_process, Strategy,
};
use arblab::paths::{future_infimum, simulate, ModelSpec, RngSpec, SamplePath};
use arblab::pricers::closed::{bs_barrier_call, bs_call};
use arblab::pricers::{bachelier_knockout, BarrierSpec, Payoff, PayoffKind};

use crate::config::{
    ClassifyConfig, ExperimentConfig, Method, OutputFormat, ScaleFamilyConfig, ScheduleKind,
    StrategyKind,
};

/// Envelope written for every run: reproducibility metadata plus the
/// command's result payload. The payload is a pure function of the config
/// and seed; only `wall_time_ms` varies between identical runs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub manifest: Manifest,
    pub result: Value,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub master_seed: u64,
    pub wall_time_ms: u128,
}

pub fn run_command(name: &str, cfg: &ExperimentConfig) -> anyhow::Result<RunReport> {
    let start = Instant::now();
    let result = match name {
        "simulate" => cmd_simulate(cfg)?,
        "price" => cmd_price(cfg)?,
        "hedge" => cmd_hedge(cfg)?,
        "fund" => cmd_fund(cfg)?,
        "classify" => cmd_classify(cfg)?,
        other => bail!("unknown command {other}"),
    };
    Ok(RunReport {
        manifest: Manifest {
            command: name.to_string(),
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: cfg.master_seed,
            wall_time_ms: start.elapsed().as_millis(),
        },
        result,
    })
}

fn mc_json(p: &McPrice) -> Value {
    json!({ "mc_price": p.price, "std_error": p.std_error, "n_paths": p.n_paths })
}

/// The matching closed-form oracle for (model, payoff), when one exists.
fn oracle_price(model: &ModelSpec, g: &Payoff) -> Option<f64> {
    let tau = g.maturity;
    match (*model, &g.kind) {
        (ModelSpec::ReflectedGbm { s0, b, sigma, .. }, PayoffKind::Call { strike }) => {
            bs_barrier_call(tau, s0, b, *strike, sigma).ok()
        }
        (ModelSpec::LocalTimeAlpha { s0, beta0_abs, .. }, _) => {
            bachelier_knockout(g, tau, s0, &BarrierSpec::lower(s0 - beta0_abs)).ok()
        }
        (ModelSpec::SkewBm { s0, .. }, _) => {
            bachelier_knockout(g, tau, s0, &BarrierSpec::lower(0.0)).ok()
        }
        (ModelSpec::WilliamsBessel { x0, j }, _) => {
            bachelier_knockout(g, tau, x0, &BarrierSpec::lower(j)).ok()
        }
        (ModelSpec::Bessel3 { x0 }, PayoffKind::Digital) if x0 > 0.0 => {
            Some(arblab::pricers::bessel_survival(tau, x0))
        }
        (ModelSpec::BesselIndex { x0, nu }, _) if (nu + 0.5).abs() < 1e-12 => {
            bachelier_knockout(g, tau, x0, &BarrierSpec::lower(0.0)).ok()
        }
        (ModelSpec::ConstDriftGbm { s0, sigma }, PayoffKind::Call { strike }) => {
            Some(bs_call(s0, *strike, sigma, tau))
        }
        _ => None,
    }
}

pub fn cmd_price(cfg: &ExperimentConfig) -> anyhow::Result<Value> {
    let g = cfg.payoff.clone().ok_or_else(|| anyhow!("price needs a [payoff] section"))?;
    let grid = cfg.grid.build()?;
    let method = cfg.method.clone().ok_or_else(|| anyhow!("price needs method"))?;
    let oracle = oracle_price(&cfg.model, &g);
    let attach = |p: McPrice, method: &str| -> Value {
        let mut v = mc_json(&p);
        v["method"] = json!(method);
        if let Some(o) = oracle {
            v["oracle_price"] = json!(o);
            if p.std_error > 0.0 {
                v["z_score"] = json!((p.price - o) / p.std_error);
            }
        }
        v
    };
    Ok(match method {
        Method::Ip => attach(
            price_increasing_profit(&cfg.model, &g, cfg.n_paths, &grid, cfg.master_seed)?,
            "ip",
        ),
        Method::Na1 => {
            attach(price_na1(&cfg.model, &g, cfg.n_paths, &grid, cfg.master_seed)?, "na1")
        }
        Method::Master => {
            attach(price_master(&cfg.model, &g, cfg.n_paths, &grid, cfg.master_seed)?, "master")
        }
        Method::Sa => {
            let eps = cfg
                .sa_eps
                .clone()
                .ok_or_else(|| anyhow!("method sa needs the sa_eps ladder"))?;
            let ladder =
                price_strong_arbitrage(&cfg.model, &g, &eps, cfg.n_paths, cfg.master_seed)?;
            let rows: Vec<Value> = ladder
                .iter()
                .map(|(e, p)| json!({ "eps": e, "mc_price": p.price, "std_error": p.std_error }))
                .collect();
            json!({ "method": "sa", "ladder": rows })
        }
        Method::ClosedForm => {
            let o = oracle
                .ok_or_else(|| anyhow!("no closed form for this model/payoff combination"))?;
            json!({ "method": "closed_form", "price": o })
        }
    })
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> anyhow::Result<Value> {
    let grid = cfg.grid.build()?;
    let want_j = cfg.model.is_transient_up();
    let mut csv = String::new();
    let mut header = String::from("path,t,S,kappa,kappa_var");
    // header columns fixed from the first path
    let first = simulate(&cfg.model, &grid, &RngSpec::new(cfg.master_seed, 0))?;
    for track in &first.local_times {
        header.push_str(&format!(",L_{}", track.level));
    }
    if want_j {
        header.push_str(",J");
    }
    csv.push_str("# arblab-csv-v1 simulate\n");
    csv.push_str(&header);
    csv.push('\n');
    let mut terminals = Vec::with_capacity(cfg.n_paths);
    for idx in 0..cfg.n_paths as u64 {
        let spec = RngSpec::new(cfg.master_seed, idx);
        let mut path = simulate(&cfg.model, &grid, &spec)?;
        if want_j {
            future_infimum(&mut path, &cfg.model, &spec)?;
        }
        terminals.push(path.terminal());
        for i in 0..=path.n_steps() {
            csv.push_str(&format!(
                "{},{},{},{},{}",
                idx,
                grid.time_at(i),
                path.values[i],
                path.kappa[i],
                path.kappa_var[i]
            ));
            for track in &path.local_times {
                csv.push_str(&format!(",{}", track.cumulative[i]));
            }
            if let Some(j) = &path.future_inf {
                csv.push_str(&format!(",{}", j[i]));
            }
            csv.push('\n');
        }
    }
    let acc = arblab::math::MeanVar::from_slice(&terminals);
    Ok(json!({
        "csv": csv,
        "n_paths": cfg.n_paths,
        "terminal_mean": acc.mean(),
        "terminal_std_error": acc.std_error(),
    }))
}

fn build_strategy(cfg: &ExperimentConfig) -> anyhow::Result<(Strategy, f64)> {
    let hedge = cfg.hedge.as_ref().ok_or_else(|| anyhow!("hedge needs a [hedge] section"))?;
    let g = cfg.payoff.clone();
    let maturity = cfg.grid.t_end;
    Ok(match (&hedge.strategy, &cfg.model) {
        (StrategyKind::BarrierDelta, ModelSpec::ReflectedGbm { s0, b, sigma, .. }) => {
            let g = g.ok_or_else(|| anyhow!("barrier delta needs a payoff"))?;
            let PayoffKind::Call { strike } = g.kind else {
                bail!("barrier delta hedges call payoffs");
            };
            let strat = barrier_delta_strategy(*b, strike, maturity, *sigma)?;
            let x0 = barrier_delta_initial(*b, strike, maturity, *sigma, *s0)?;
            (strat, x0)
        }
        (StrategyKind::Localtime, ModelSpec::LocalTimeAlpha { s0, beta0_abs, alpha }) => {
            let g = g.ok_or_else(|| anyhow!("localtime strategy needs a payoff"))?;
            let strat = localtime_corrected_strategy(&g, maturity, *alpha, hedge.bandwidth)?;
            let x0 = localtime_initial(&g, maturity, *s0, s0 - beta0_abs)?;
            (strat, x0)
        }
        (StrategyKind::Skew, ModelSpec::SkewBm { s0, alpha }) => {
            let g = g.ok_or_else(|| anyhow!("skew strategy needs a payoff"))?;
            let strat = skew_corrected_strategy(&g, maturity, *alpha, hedge.bandwidth)?;
            let x0 = skew_initial(&g, maturity, *s0)?;
            (strat, x0)
        }
        (StrategyKind::BesselNa, ModelSpec::Bessel3 { x0 }) => {
            (bessel_na_strategy(maturity, *x0)?, 0.0)
        }
        (StrategyKind::IncreasingProfit, model) => (increasing_profit_strategy(model)?, 0.0),
        (kind, model) => bail!("strategy {kind:?} does not apply to model {model:?}"),
    })
}

pub fn cmd_hedge(cfg: &ExperimentConfig) -> anyhow::Result<Value> {
    let hedge = cfg.hedge.as_ref().ok_or_else(|| anyhow!("hedge needs a [hedge] section"))?;
    let grid = cfg.grid.build()?;
    let (strat, paper_x0) = build_strategy(cfg)?;
    let x0 = paper_x0 * hedge.fortune_scale;
    let g = cfg
        .payoff
        .clone()
        .unwrap_or(Payoff { kind: PayoffKind::Custom { xs: vec![0.0, 1.0], ys: vec![0.0, 0.0] }, maturity: grid.t_end() });
    let report = verify_superreplication(
        &cfg.model,
        &strat,
        x0,
        &g,
        cfg.n_paths,
        &grid,
        cfg.master_seed,
        hedge.shortfall_tol,
    )?;
    let mut out = serde_json::to_value(&report)?;
    out["strategy"] = json!(strat.label);
    out["paper_initial"] = json!(paper_x0);
    if let Some(csv_path) = &hedge.paths_csv {
        let path = simulate(&cfg.model, &grid, &RngSpec::new(cfg.master_seed, 0))?;
        let wealth = wealth_process(&path, &strat, x0);
        let mut csv = String::from("# arblab-csv-v1 hedge\nt,S,h,V\n");
        for i in 0..=path.n_steps() {
            let h = if i < path.n_steps() { strat.holdings(i, &path) } else { 0.0 };
            csv.push_str(&format!("{},{},{},{}\n", grid.time_at(i), path.values[i], h, wealth[i]));
        }
        std::fs::write(csv_path, csv).with_context(|| format!("writing {csv_path}"))?;
        out["paths_csv"] = json!(csv_path);
    }
    Ok(out)
}

pub fn cmd_fund(cfg: &ExperimentConfig) -> anyhow::Result<Value> {
    let fund = cfg.fund.as_ref().ok_or_else(|| anyhow!("fund needs a [fund] section"))?;
    let grid = cfg.grid.build()?;
    let spec = RngSpec::new(cfg.master_seed, 0);
    let mut path: SamplePath = simulate(&cfg.model, &grid, &spec)?;
    let track = match fund.schedule {
        ScheduleKind::Kappa => {
            let q = QProfile { q_at_lower: fund.q_lower, q_at_upper: fund.q_upper };
            shares_with_arbitrager(&path, fund.n0, &q)?
        }
        ScheduleKind::FutureInf => {
            future_infimum(&mut path, &cfg.model, &spec)?;
            let family = match fund
                .scale_family
                .as_ref()
                .ok_or_else(|| anyhow!("future_inf schedule needs scale_family"))?
            {
                ScaleFamilyConfig::Bm => ScaleFamily::Bm,
                ScaleFamilyConfig::Gbm { mu, sigma } => ScaleFamily::Gbm { mu: *mu, sigma: *sigma },
                ScaleFamilyConfig::Besq { delta } => ScaleFamily::Besq { delta: *delta },
                ScaleFamilyConfig::InverseSquare => ScaleFamily::InverseSquare,
            };
            let st = build_scale_transform(
                family,
                fund.y0,
                fund.mode.unwrap_or(FundingMode::Repurchase),
                fund.c_extra,
            )?;
            funding_schedule(&path, &st, fund.n0)?
        }
    };
    let mut csv = String::from("# arblab-csv-v1 fund\nt,S,n,F,G,H,V_cap,zero_sum_running\n");
    for i in 0..=path.n_steps() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            grid.time_at(i),
            path.values[i],
            track.n[i],
            track.f[i],
            track.g[i],
            track.h[i],
            track.v_cap[i],
            (track.f[i] + track.g[i] + track.h[i]).abs(),
        ));
    }
    Ok(json!({
        "csv": csv,
        "n_terminal": track.n.last(),
        "f_terminal": track.f.last(),
        "g_terminal": track.g.last(),
        "h_terminal": track.h.last(),
        "v_cap_terminal": track.v_cap.last(),
        "zero_sum_residual": track.zero_sum_residual,
        "capital_residual": track.capital_residual,
    }))
}

pub fn cmd_classify(cfg: &ExperimentConfig) -> anyhow::Result<Value> {
    let section =
        cfg.classify.as_ref().ok_or_else(|| anyhow!("classify needs a [classify] section"))?;
    let family = match section {
        ClassifyConfig::Besq { delta } => DiffusionFamily::besq(*delta),
        ClassifyConfig::Gbm { mu, sigma } => DiffusionFamily::gbm(*mu, *sigma),
        ClassifyConfig::PowerLaw { sigma0, p, mu0, q } => {
            DiffusionFamily::PowerLaw { sigma0: *sigma0, p: *p, mu0: *mu0, q: *q }
        }
    };
    let report = classify(&family)?;
    let mut out = serde_json::to_value(&report)?;
    out["table"] = json!(report.table());
    Ok(out)
}

/// Render the payload written to `--out`: for the CSV format, commands with
/// a `csv` field emit it verbatim; everything else is JSON.
pub fn render_output(report: &RunReport, format: &OutputFormat) -> anyhow::Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report)?),
        OutputFormat::Csv => {
            if let Some(csv) = report.result.get("csv").and_then(|v| v.as_str()) {
                Ok(csv.to_string())
            } else {
                bail!("this command has no CSV payload; use format = \"json\"")
            }
        }
    }
}
