use crate::config::{Format, Rate, RunConfig, Source};
use crate::error::CliError;
use crate::output::{Cell, Table};
use varlen::asymptotics::{
    asymptotic_summary, convergence_study, entropy, optimistic_study, second_order_threshold,
};
use varlen::bounds::sandwich_sweep;
use varlen::codes::{
    construct_theorem2_code, optimal_threshold, optimal_tradeoff, simulate_roundtrip, MAX_THRESHOLD,
};
use varlen::{
    iid_spectrum, mixed_spectrum, sample_sequences, switching_spectrum, Distribution, Spectrum,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    Tradeoff,
    Threshold,
    Bounds,
    Converge,
    Optimistic,
    Asymptotics,
    Simulate,
}

/// Rendered output and whether a bound check failed.
pub struct Outcome {
    pub text: String,
    pub violation: Option<String>,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let default_format = if cmd == Command::Asymptotics {
        Format::Json
    } else {
        Format::Csv
    };
    let format = cfg.format.unwrap_or(default_format);
    let mut violation = None;
    let table = match cmd {
        Command::Spectrum => spectrum(cfg)?,
        Command::Tradeoff => tradeoff(cfg)?,
        Command::Threshold => threshold(cfg)?,
        Command::Bounds => {
            let (t, v) = bounds(cfg)?;
            violation = v;
            t
        }
        Command::Converge => converge(cfg)?,
        Command::Optimistic => optimistic(cfg)?,
        Command::Asymptotics => return asymptotics(cfg, format),
        Command::Simulate => simulate(cfg)?,
    };
    Ok(Outcome {
        text: table.render(format),
        violation,
    })
}

fn build(source: &Source, n: u32) -> Result<Spectrum, CliError> {
    Ok(match source {
        Source::Iid(d) => iid_spectrum(d, n)?,
        Source::Mixed {
            first,
            second,
            weight,
        } => mixed_spectrum(first, second, *weight, n)?,
        Source::Switching(s) => switching_spectrum(s, n)?,
    })
}

fn iid(cfg: &RunConfig) -> Result<&Distribution, CliError> {
    match &cfg.source {
        Source::Iid(d) => Ok(d),
        other => Err(CliError::invalid(
            "model",
            format!("this command needs iid, got {}", other.kind()),
        )),
    }
}

fn block_length(cfg: &RunConfig) -> Result<u32, CliError> {
    match cfg.n {
        Some(0) => Err(CliError::invalid("n", "must be at least 1")),
        Some(n) => Ok(n),
        None => Err(CliError::invalid("n", "missing")),
    }
}

fn n_grid(cfg: &RunConfig) -> Result<Vec<u32>, CliError> {
    let grid = cfg
        .n_grid
        .clone()
        .ok_or_else(|| CliError::invalid("n_grid", "missing"))?;
    if grid.is_empty() {
        return Err(CliError::invalid("n_grid", "empty grid"));
    }
    if grid.contains(&0) {
        return Err(CliError::invalid(
            "n_grid",
            "block lengths must be at least 1",
        ));
    }
    Ok(grid)
}

fn eta_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let grid = cfg
        .eta_grid
        .clone()
        .ok_or_else(|| CliError::invalid("eta_grid", "missing"))?;
    if let Some(&bad) = grid.iter().find(|e| !(1.0..=MAX_THRESHOLD).contains(*e)) {
        return Err(CliError::invalid(
            "eta_grid",
            format!("{bad} outside [1, 1e7]"),
        ));
    }
    Ok(grid)
}

fn eps_values(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    if let Some(&bad) = cfg.eps.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(CliError::invalid("eps", format!("{bad} outside [0, 1)")));
    }
    Ok(cfg.eps.clone())
}

fn eps_single(cfg: &RunConfig) -> Result<f64, CliError> {
    match eps_values(cfg)?.as_slice() {
        [e] => Ok(*e),
        _ => Err(CliError::invalid(
            "eps",
            "this command takes a single value",
        )),
    }
}

fn budgets(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let eps = eps_single(cfg)?;
    let delta = cfg
        .delta
        .ok_or_else(|| CliError::invalid("delta", "missing"))?;
    if delta < 0.0 || delta.is_nan() {
        return Err(CliError::invalid("delta", "must be nonnegative"));
    }
    if eps + delta >= 1.0 {
        return Err(CliError::invalid("delta", "eps + delta must be below 1"));
    }
    Ok((eps, delta))
}

fn unit_note(t: &mut Table, cfg: &RunConfig) {
    t.meta(
        "rates",
        Cell::Text(format!("base-{} log units per symbol", cfg.source.base())),
    );
    t.meta("model", Cell::Text(cfg.source.kind().into()));
}

fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = block_length(cfg)?;
    let s = build(&cfg.source, n)?;
    let mut t = Table::new(&["rate", "count", "mass"]);
    unit_note(&mut t, cfg);
    t.meta("n", Cell::Int(n.into()));
    for (i, a) in s.atoms().iter().enumerate() {
        t.push(vec![
            Cell::Float(s.rate(i)),
            Cell::Big(a.count.to_string()),
            Cell::Float(a.mass),
        ]);
    }
    Ok(t)
}

fn tradeoff(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = block_length(cfg)?;
    let (etas, epss) = (eta_grid(cfg)?, eps_values(cfg)?);
    let s = build(&cfg.source, n)?;
    let mut t = Table::new(&["eta", "eps", "delta_star", "M"]);
    unit_note(&mut t, cfg);
    t.meta("n", Cell::Int(n.into()));
    for &eps in &epss {
        for &eta in &etas {
            let p = optimal_tradeoff(&s, eta, eps)?;
            t.push(vec![
                Cell::Float(eta),
                Cell::Float(eps),
                Cell::Float(p.delta_star),
                Cell::Big(p.m.to_string()),
            ]);
        }
    }
    Ok(t)
}

fn threshold(cfg: &RunConfig) -> Result<Table, CliError> {
    let grid = match (&cfg.n_grid, cfg.n) {
        (Some(_), _) => n_grid(cfg)?,
        (None, _) => vec![block_length(cfg)?],
    };
    let (eps, delta) = budgets(cfg)?;
    let mut t = Table::new(&["n", "eta_star", "eta_star_per_symbol"]);
    unit_note(&mut t, cfg);
    t.meta("eps", Cell::Float(eps));
    t.meta("delta", Cell::Float(delta));
    for n in grid {
        let s = build(&cfg.source, n)?;
        let eta = optimal_threshold(&s, eps, delta)?;
        t.push(vec![
            Cell::Int(n.into()),
            Cell::Int(eta),
            Cell::Float(eta as f64 / f64::from(n)),
        ]);
    }
    Ok(t)
}

fn bounds(cfg: &RunConfig) -> Result<(Table, Option<String>), CliError> {
    let n = block_length(cfg)?;
    let eps = eps_single(cfg)?;
    let etas = eta_grid(cfg)?;
    let gamma = cfg
        .gamma
        .ok_or_else(|| CliError::invalid("gamma", "missing"))?;
    if gamma <= 0.0 || gamma.is_nan() {
        return Err(CliError::invalid("gamma", "must be positive"));
    }
    let rule = cfg.a_rule(gamma)?;
    let s = build(&cfg.source, n)?;
    let reports = sandwich_sweep(&s, eps, &etas, rule)?;
    let mut t = Table::new(&["eta", "lower", "exact", "upper", "a_n", "optimal"]);
    unit_note(&mut t, cfg);
    t.meta("n", Cell::Int(n.into()));
    t.meta("eps", Cell::Float(eps));
    t.meta("gamma", Cell::Float(gamma));
    t.meta("a_rule", Cell::Text(cfg.a_rule.clone()));
    let mut violation = None;
    for r in &reports {
        if violation.is_none() && !r.holds() {
            violation = Some(format!(
                "eta={} lower={} exact={} upper={} optimal={}",
                r.eta, r.lower, r.exact_code_overflow, r.upper, r.exact_optimal
            ));
        }
        t.push(vec![
            Cell::Float(r.eta),
            Cell::Float(r.lower),
            Cell::Float(r.exact_code_overflow),
            Cell::Float(r.upper),
            Cell::Float(r.a_n),
            Cell::Float(r.exact_optimal),
        ]);
    }
    Ok((t, violation))
}

fn converge(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = iid(cfg)?;
    let grid = n_grid(cfg)?;
    let (eps, delta) = budgets(cfg)?;
    if eps + delta <= 0.0 {
        return Err(CliError::invalid("delta", "eps + delta must be positive"));
    }
    let report = convergence_study(d, eps, delta, &grid)?;
    let mut t = Table::new(&[
        "n",
        "eta_star",
        "first_order_gap",
        "second_order_value",
        "L_pred",
        "gap",
    ]);
    unit_note(&mut t, cfg);
    t.meta("H", Cell::Float(report.h));
    t.meta("V", Cell::Float(report.v));
    for p in &report.measurements {
        t.push(vec![
            Cell::Int(p.n.into()),
            Cell::Int(p.eta_star),
            Cell::Float(p.first_order_gap),
            Cell::Float(p.second_order_value),
            Cell::Float(report.l_pred),
            Cell::Float(p.gap),
        ]);
    }
    Ok(t)
}

fn optimistic(cfg: &RunConfig) -> Result<Table, CliError> {
    let Source::Switching(sched) = &cfg.source else {
        return Err(CliError::invalid("model", "this command needs switching"));
    };
    let grid = n_grid(cfg)?;
    let (eps, delta) = budgets(cfg)?;
    let tf = cfg.tail_fraction;
    if !(tf > 0.0 && tf <= 1.0) {
        return Err(CliError::invalid(
            "tail_fraction",
            "expected 0 < tail_fraction <= 1",
        ));
    }
    let r = optimistic_study(sched, eps, delta, &grid, tf)?;
    let mut t = Table::new(&["n", "value", "component_active"]);
    unit_note(&mut t, cfg);
    for p in &r.points {
        t.push(vec![
            Cell::Int(p.n.into()),
            Cell::Float(p.value),
            Cell::Int(p.component as u64),
        ]);
    }
    let [h0, h1] = r.component_entropies;
    t.summary = vec![
        ("limsup_estimate".into(), Cell::Float(r.limsup_estimate)),
        ("liminf_estimate".into(), Cell::Float(r.liminf_estimate)),
        ("entropy_component_0".into(), Cell::Float(h0)),
        ("entropy_component_1".into(), Cell::Float(h1)),
    ];
    Ok(t)
}

fn asymptotics(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let d = iid(cfg)?;
    let (eps, delta) = budgets(cfg)?;
    if eps + delta <= 0.0 {
        return Err(CliError::invalid("delta", "eps + delta must be positive"));
    }
    let r = asymptotic_summary(d, eps, delta)?;
    let mut t = Table::new(&["H", "V", "R1", "R2", "L_pred", "kpv"]);
    let kpv = r.kpv.map_or(Cell::Text("undefined".into()), Cell::Float);
    let mut row = vec![
        Cell::Float(r.h),
        Cell::Float(r.v),
        Cell::Float(r.r1),
        Cell::Float(r.r2),
        Cell::Float(r.l_pred),
        kpv,
    ];
    if let Some(rate) = cfg.rate {
        let h = entropy(d);
        let value = match rate {
            Rate::Entropy => h,
            Rate::Value(v) => {
                let gap = (v - h).abs();
                if gap > varlen::asymptotics::ENTROPY_MATCH_TOL && gap < 1e-9 {
                    return Err(CliError::invalid(
                        "rate",
                        format!("{v} is within 1e-9 of H = {h} but not equal; pass rate = H"),
                    ));
                }
                v
            }
        };
        t.columns.extend(["rate", "L_at_rate"]);
        row.push(Cell::Float(value));
        row.push(Cell::Float(second_order_threshold(d, eps, delta, value)?));
    }
    t.push(row);
    let text = match format {
        Format::Csv => {
            unit_note(&mut t, cfg);
            t.render(Format::Csv)
        }
        Format::Json => {
            let obj: serde_json::Map<String, serde_json::Value> = t
                .columns
                .iter()
                .zip(&t.rows[0])
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            let mut text = serde_json::to_string_pretty(&obj).expect("plain values");
            text.push('\n');
            text
        }
    };
    Ok(Outcome {
        text,
        violation: None,
    })
}

fn simulate(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = iid(cfg)?;
    let n = block_length(cfg)?;
    let eps = eps_single(cfg)?;
    let etas = eta_grid(cfg)?;
    if cfg.samples == 0 {
        return Err(CliError::invalid("samples", "must be positive"));
    }
    let s = iid_spectrum(d, n)?;
    let code = construct_theorem2_code(&s, eps)?;
    let draws = sample_sequences(d, n, cfg.samples, cfg.seed);
    let mut t = Table::new(&[
        "eta",
        "samples",
        "empirical_error",
        "exact_error",
        "empirical_overflow",
        "exact_overflow",
    ]);
    unit_note(&mut t, cfg);
    t.meta("n", Cell::Int(n.into()));
    t.meta("eps", Cell::Float(eps));
    t.meta("seed", Cell::Int(cfg.seed));
    for &eta in &etas {
        let r = simulate_roundtrip(&code, &s, &draws, eta)?;
        t.push(vec![
            Cell::Float(eta),
            Cell::Int(r.samples as u64),
            Cell::Float(r.empirical_error),
            Cell::Float(r.exact_error),
            Cell::Float(r.empirical_overflow),
            Cell::Float(r.exact_overflow),
        ]);
    }
    Ok(t)
}
