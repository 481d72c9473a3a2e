use std::fmt::Write as _;

use binomci::{
    exact_coverage, monte_carlo_coverage, sweep as run_sweep, tune_theta, Containment, CoverageRecord,
    Estimator, EstimatorOptions, Method, SweepAxis, SweepPlan, TunedThetaTable,
};
use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use crate::grid::{parse_int_grid, parse_real_grid};
use crate::output::{format_f64, Cell, OutputRecord};
use crate::presets::{preset, Preset};
use crate::{CliError, GlobalArgs};

pub const INTERVAL_COLUMNS: &[&str] = &[
    "method",
    "n",
    "k",
    "delta",
    "theta",
    "lower",
    "upper",
    "raw_lower",
    "raw_upper",
    "width",
];

pub const COVERAGE_COLUMNS: &[&str] = &[
    "evaluation",
    "method",
    "n",
    "p",
    "delta",
    "convention",
    "coverage",
    "error_prob",
    "mean_width",
    "samples",
    "seed",
    "std_error",
];

pub const TUNE_COLUMNS: &[&str] = &[
    "delta",
    "theta_star",
    "theta_rigorous",
    "theta_reference",
    "reference_feasible",
    "binding_n",
    "binding_p",
    "binding_coverage",
    "n_set",
    "p_points",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Strict,
    Closed,
}

impl From<ConventionArg> for Containment {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Strict => Containment::StrictInterior,
            ConventionArg::Closed => Containment::ClosedInterval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    K,
    P,
    N,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    /// Number of trials N
    #[arg(long)]
    pub n: u64,
    /// Number of successes k
    #[arg(long)]
    pub k: u64,
    /// Confidence parameter delta in (0, 1)
    #[arg(long)]
    pub delta: f64,
    /// Comma-separated methods: cp, rigorous, tuned, wald, wilson (default: all)
    #[arg(long, visible_alias = "methods")]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub n: u64,
    /// True success probability in (0, 1)
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta: f64,
    /// Also estimate coverage from this many Monte Carlo samples
    #[arg(long)]
    pub mc: Option<u64>,
    /// Containment rule (default: the method's own)
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Swept quantity: k (limits), p or n (coverage)
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
    /// Grid as start:step:stop or a,b,c (k defaults to 0..N)
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, visible_alias = "method")]
    pub methods: Option<String>,
    /// Start from a numbered comparison preset (1-27)
    #[arg(long)]
    pub preset: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub delta: f64,
    /// Sample sizes the constraint must hold for
    #[arg(long, default_value = "10,50,100,500,1000")]
    pub n_set: String,
    /// p-grid the constraint must hold on
    #[arg(long, default_value = "0.001:0.001:0.999")]
    pub p_grid: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn tuned_table(g: &GlobalArgs) -> Result<TunedThetaTable, CliError> {
    let mut table = TunedThetaTable::default();
    for entry in &g.tuned_theta {
        let (d, t) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("--tuned-theta '{entry}' is not DELTA=THETA")))?;
        let d: f64 = d
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad delta in '{entry}'")))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad theta in '{entry}'")))?;
        table = table.with_entry(d, t)?;
    }
    Ok(table)
}

fn options(g: &GlobalArgs) -> Result<EstimatorOptions, CliError> {
    Ok(EstimatorOptions {
        tol: g.tol,
        tuned: tuned_table(g)?,
    })
}

fn parse_methods(list: Option<&str>) -> Result<Vec<Method>, CliError> {
    let Some(list) = list else {
        return Ok(Method::ALL.to_vec());
    };
    let methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Method>().map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(usage("no methods given"));
    }
    Ok(methods)
}

fn global_params(g: &GlobalArgs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tol".into(), json!(g.tol));
    m.insert("seed".into(), json!(g.seed));
    m.insert("tuned_theta".into(), json!(g.tuned_theta));
    m
}

fn interval_row(est: &Estimator, n: u64, k: u64) -> Result<Vec<Cell>, CliError> {
    let iv = est.interval(n, k)?;
    Ok(vec![
        est.method().short_name().into(),
        n.into(),
        k.into(),
        est.delta().into(),
        est.theta().into(),
        iv.lower.into(),
        iv.upper.into(),
        iv.raw_lower.into(),
        iv.raw_upper.into(),
        iv.width().into(),
    ])
}

fn coverage_row(r: &CoverageRecord, evaluation: &str, mc: Option<(u64, u64, f64)>) -> Vec<Cell> {
    vec![
        evaluation.into(),
        r.method.short_name().into(),
        r.trials.into(),
        r.true_p.into(),
        r.delta.into(),
        r.convention.short_name().into(),
        r.coverage.into(),
        r.error_prob.into(),
        r.mean_width.into(),
        mc.map(|m| m.0).into(),
        mc.map(|m| m.1).into(),
        mc.map(|m| m.2).into(),
    ]
}

pub fn interval(a: &IntervalArgs, g: &GlobalArgs) -> Result<OutputRecord, CliError> {
    if a.k > a.n {
        return Err(usage(format!("--k {} exceeds --n {}", a.k, a.n)));
    }
    let methods = parse_methods(a.method.as_deref())?;
    let opts = options(g)?;
    let mut params = global_params(g);
    params.insert("n".into(), json!(a.n));
    params.insert("k".into(), json!(a.k));
    params.insert("delta".into(), json!(a.delta));
    params.insert(
        "methods".into(),
        json!(methods.iter().map(|m| m.short_name()).collect::<Vec<_>>()),
    );
    let mut out = OutputRecord::new("interval", INTERVAL_COLUMNS, params);
    for m in methods {
        let est = Estimator::new(m, a.delta, &opts)?;
        out.push(interval_row(&est, a.n, a.k)?);
    }
    Ok(out)
}

pub fn coverage(a: &CoverageArgs, g: &GlobalArgs) -> Result<OutputRecord, CliError> {
    let method: Method = a.method.parse()?;
    let est = Estimator::new(method, a.delta, &options(g)?)?;
    let convention = a
        .convention
        .map_or(method.default_convention(), Containment::from);
    let mut params = global_params(g);
    params.insert("method".into(), json!(method.short_name()));
    params.insert("n".into(), json!(a.n));
    params.insert("p".into(), json!(a.p));
    params.insert("delta".into(), json!(a.delta));
    params.insert("mc".into(), json!(a.mc));
    params.insert("convention".into(), json!(convention.short_name()));
    let mut out = OutputRecord::new("coverage", COVERAGE_COLUMNS, params);
    let exact = exact_coverage(&est, a.n, a.p, convention)?;
    out.push(coverage_row(&exact, "exact", None));
    if let Some(samples) = a.mc {
        let mc = monte_carlo_coverage(&est, a.n, a.p, convention, samples, g.seed)?;
        let se = mc.standard_error(exact.coverage);
        out.push(coverage_row(
            &mc.record,
            "monte_carlo",
            Some((samples, g.seed, se)),
        ));
    }
    Ok(out)
}

struct ResolvedSweep {
    axis: AxisArg,
    n: Option<u64>,
    p: Option<f64>,
    delta: f64,
    grid: Option<String>,
    methods: Vec<Method>,
}

fn resolve_sweep(a: &SweepArgs) -> Result<ResolvedSweep, CliError> {
    let base = match a.preset {
        Some(f) => Some(preset(f).ok_or_else(|| usage(format!("--preset {f} is not in 1..=27")))?),
        None => None,
    };
    let (mut axis, mut n, mut p, mut delta, mut grid, mut methods) = (None, None, None, None, None, None);
    match base {
        Some(Preset::OverK {
            trials,
            delta: d,
            methods: m,
        }) => {
            axis = Some(AxisArg::K);
            n = Some(trials);
            delta = Some(d);
            methods = Some(m);
        }
        Some(Preset::OverN {
            true_p,
            delta: d,
            grid: gr,
            methods: m,
        }) => {
            axis = Some(AxisArg::N);
            p = Some(true_p);
            delta = Some(d);
            grid = Some(gr.to_string());
            methods = Some(m);
        }
        None => {}
    }
    Ok(ResolvedSweep {
        axis: a.axis.or(axis).ok_or_else(|| usage("--axis is required"))?,
        n: a.n.or(n),
        p: a.p.or(p),
        delta: a.delta.or(delta).ok_or_else(|| usage("--delta is required"))?,
        grid: a.grid.clone().or(grid),
        methods: match &a.methods {
            Some(list) => parse_methods(Some(list))?,
            None => methods.unwrap_or_else(|| Method::ALL.to_vec()),
        },
    })
}

fn coverage_summary(rows: &[CoverageRecord], methods: &[Method]) -> String {
    let mut s = String::new();
    for &m in methods {
        let cells: Vec<&CoverageRecord> = rows.iter().filter(|r| r.method == m).collect();
        let Some(worst) = cells.iter().min_by(|a, b| a.coverage.total_cmp(&b.coverage)) else {
            continue;
        };
        let max_err = cells.iter().map(|r| r.error_prob).fold(0.0, f64::max);
        let below = cells.iter().filter(|r| r.coverage < 1.0 - r.delta).count();
        let _ = writeln!(
            s,
            "method={} cells={} min_coverage={} at n={} p={} max_error_prob={} cells_below_nominal={}",
            m.short_name(),
            cells.len(),
            format_f64(worst.coverage),
            worst.trials,
            format_f64(worst.true_p),
            format_f64(max_err),
            below
        );
    }
    s
}

pub fn sweep(a: &SweepArgs, g: &GlobalArgs) -> Result<(OutputRecord, String), CliError> {
    let r = resolve_sweep(a)?;
    let opts = options(g)?;
    let mut params = global_params(g);
    params.insert("axis".into(), json!(format!("{:?}", r.axis).to_lowercase()));
    params.insert("n".into(), json!(r.n));
    params.insert("p".into(), json!(r.p));
    params.insert("delta".into(), json!(r.delta));
    params.insert("grid".into(), json!(r.grid));
    params.insert("preset".into(), json!(a.preset));
    params.insert(
        "methods".into(),
        json!(r.methods.iter().map(|m| m.short_name()).collect::<Vec<_>>()),
    );

    match r.axis {
        AxisArg::K => {
            let n = r.n.ok_or_else(|| usage("--n is required for --axis k"))?;
            let ks = match &r.grid {
                Some(spec) => parse_int_grid(spec).map_err(usage)?,
                None => (0..=n).collect(),
            };
            if ks.is_empty() {
                return Err(usage("grid is empty"));
            }
            if let Some(k) = ks.iter().find(|&&k| k > n) {
                return Err(usage(format!("grid value k = {k} exceeds --n {n}")));
            }
            let ests = r
                .methods
                .iter()
                .map(|&m| Estimator::new(m, r.delta, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = OutputRecord::new("sweep", INTERVAL_COLUMNS, params);
            for &k in &ks {
                for est in &ests {
                    out.push(interval_row(est, n, k)?);
                }
            }
            let summary = format!("rows={} n={} delta={}\n", out.rows.len(), n, format_f64(r.delta));
            Ok((out, summary))
        }
        AxisArg::P | AxisArg::N => {
            let spec = r.grid.as_deref().ok_or_else(|| usage("--grid is required"))?;
            let axis = if r.axis == AxisArg::P {
                SweepAxis::OverP {
                    trials: r.n.ok_or_else(|| usage("--n is required for --axis p"))?,
                    grid: parse_real_grid(spec).map_err(usage)?,
                }
            } else {
                SweepAxis::OverN {
                    true_p: r.p.ok_or_else(|| usage("--p is required for --axis n"))?,
                    grid: parse_int_grid(spec).map_err(usage)?,
                }
            };
            let plan = SweepPlan {
                axis,
                delta: r.delta,
                methods: r.methods.clone(),
                options: opts,
            };
            let rows = run_sweep(&plan)?;
            let mut out = OutputRecord::new("sweep", COVERAGE_COLUMNS, params);
            for rec in &rows {
                out.push(coverage_row(rec, "exact", None));
            }
            let summary = coverage_summary(&rows, &r.methods);
            Ok((out, summary))
        }
    }
}

pub fn tune(a: &TuneArgs, g: &GlobalArgs) -> Result<OutputRecord, CliError> {
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(usage(format!("--delta {} is outside (0, 1)", a.delta)));
    }
    let n_set = parse_int_grid(&a.n_set).map_err(usage)?;
    let p_grid = parse_real_grid(&a.p_grid).map_err(usage)?;
    let table = tuned_table(g)?;
    let outcome = tune_theta(&n_set, a.delta, &p_grid, g.tol)?;
    let reference = table.theta(a.delta);
    let theta = outcome.config.theta();

    let mut params = global_params(g);
    params.insert("delta".into(), json!(a.delta));
    params.insert("n_set".into(), json!(n_set));
    params.insert("p_grid".into(), json!(a.p_grid));
    let mut out = OutputRecord::new("tune", TUNE_COLUMNS, params);
    out.push(vec![
        a.delta.into(),
        theta.into(),
        outcome.rigorous_theta.into(),
        reference.into(),
        reference.map(|r| theta >= r).into(),
        outcome.binding_trials.into(),
        outcome.binding_p.into(),
        outcome.binding_coverage.into(),
        n_set
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" ")
            .as_str()
            .into(),
        (p_grid.len() as u64).into(),
    ]);
    Ok(out)
}
