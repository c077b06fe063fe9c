// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use kaonbell::bell_chsh::{reference_times, s_value, BellConfiguration, EvalPath, LOCAL_BOUND};
use kaonbell::bipartite::{evolve_bipartite, expectation_closed_form, expectation_matrix, PureTwoKaonState};
use kaonbell::diagrams::{
    curve_csv, mems_curve, purity_curve, s_curve, s_curve_csv, trajectory_csv, trajectory_with, werner_curve,
    Scenario, TimePath,
};
use kaonbell::entanglement::{
    concurrence_closed_form, eof_from_concurrence, ppt_min_eigenvalue, wootters_concurrence,
    wootters_concurrence_normalized,
};
use kaonbell::exec::with_threads;
use kaonbell::format::{csv_table, fmt_num, Metadata};
use kaonbell::linalg::{Mat4, C64};
use kaonbell::optimizer::{maximize_s_with, Budget, LocalMethod, SearchSpace, DEFAULT_T_MAX};
use kaonbell::params::{MesonParameters, Preset};
use kaonbell::reproduce::{render_table, reproduce, ReproduceOptions};
use kaonbell::single_kaon::{evolve_single, purity_minimum, OffDiagonalMode, QuasiSpin, SingleKaonInitial};
use kaonbell::Exec;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{Cli, Command, ConcurrenceMethod, MethodArg, Mode, PathArg, SingleArgs, StateArgs, Which};
use crate::config::FileConfig;
use crate::output::{commented_document, emit, json_document};
use crate::Failure;

const DEFAULT_STARTS: usize = 200;
const DEFAULT_BUDGET: usize = 200_000;
// Smaller search used only to locate the time path of `curves --which s`.
const PATH_STARTS: usize = 32;
const PATH_BUDGET: usize = 16_000;

/// Settings after merging flags, the config file and defaults.
struct Context {
    params: MesonParameters,
    seed: u64,
    exec: Exec,
    file: FileConfig,
    out: Option<PathBuf>,
}

impl Context {
    fn meta(&self, command: &str) -> Metadata {
        Metadata::new(command, &self.params, Some(self.seed))
    }

    fn json(&self, meta: &Metadata, result: Value) -> Result<(), Failure> {
        emit(&json_document(meta, result), self.out.as_deref(), self.file.out_dir.as_deref())
    }

    fn text(&self, meta: &Metadata, body: &str) -> Result<(), Failure> {
        emit(&commented_document(meta, body), self.out.as_deref(), self.file.out_dir.as_deref())
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let g = cli.global;
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let preset: Preset = g.preset.as_deref().or(file.preset.as_deref()).unwrap_or("kaon-paper").parse()?;
    if preset == Preset::Custom
        && [g.gamma_s.or(file.gamma_s), g.gamma_l.or(file.gamma_l), g.delta_m.or(file.delta_m)]
            .iter()
            .any(Option::is_none)
    {
        return Err(Failure::usage("preset `custom` needs gamma_s, gamma_l and delta_m"));
    }
    let params = MesonParameters::resolve(
        preset,
        g.gamma_s.or(file.gamma_s),
        g.gamma_l.or(file.gamma_l),
        g.delta_m.or(file.delta_m),
    )?;
    let threads = g.threads.or(file.threads);
    if threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let ctx =
        Context { params, seed: g.seed.or(file.seed).unwrap_or(0), exec: Exec::default(), file, out: g.out };
    with_threads(threads, || dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &Context, command: Command) -> Result<(), Failure> {
    match command {
        Command::EvolveSingle { initial, t, offdiag } => evolve_single_cmd(ctx, &initial, t, offdiag),
        Command::PurityScan { initial, t_end, step, steps } => purity_scan(ctx, &initial, t_end, step, steps),
        Command::Expectation { state, t_l, t_r, left, right, path } => {
            expectation(ctx, &state, t_l, t_r, &left, &right, path)
        }
        Command::Concurrence { state, t_l, t_r, method } => concurrence(ctx, &state, t_l, t_r, method),
        Command::BellEval { state, times, quasispins, path } => {
            bell_eval(ctx, &state, times, quasispins, path)
        }
        Command::BellOptimize { fix_state, free_phases, starts, budget, t_max, method } => {
            bell_optimize(ctx, fix_state, free_phases, starts, budget, t_max, method)
        }
        Command::Trajectory { state, scenario, t_end, step } => {
            trajectory(ctx, &state, &scenario, t_end, step)
        }
        Command::Curves { which, points, state, times, u_max } => {
            curves(ctx, which, points, &state, times, u_max)
        }
        Command::Reproduce { strict, samples } => reproduce_cmd(ctx, strict, samples),
    }
}

fn single_initial(a: &SingleArgs) -> Result<(String, SingleKaonInitial), Failure> {
    match a.rho_ss {
        Some(rho_ss) => {
            let sl = a.rho_sl.unwrap_or([0.0, 0.0]);
            let init = SingleKaonInitial::new(rho_ss, 1.0 - rho_ss, C64::new(sl[0], sl[1]))?;
            Ok((format!("rho_ss={} rho_sl={},{}", fmt_num(rho_ss), fmt_num(sl[0]), fmt_num(sl[1])), init))
        }
        None if a.rho_sl.is_some() => Err(Failure::usage("--rho-sl needs --rho-ss")),
        None if a.initial.eq_ignore_ascii_case("custom") => {
            Err(Failure::usage("--initial custom needs --rho-ss"))
        }
        None => Ok((a.initial.clone(), SingleKaonInitial::from_quasispin(&QuasiSpin::by_name(&a.initial)?))),
    }
}

fn pair_state(a: &StateArgs, default: &str) -> Result<(String, PureTwoKaonState), Failure> {
    match (&a.r, &a.phi) {
        (Some(r), phi) => {
            if a.state.is_some() {
                return Err(Failure::usage("--state and --r are mutually exclusive"));
            }
            let psi = PureTwoKaonState::normalized(*r, phi.unwrap_or([0.0; 4]))?;
            Ok(("custom".into(), psi))
        }
        (None, Some(_)) => Err(Failure::usage("--phi needs --r")),
        (None, None) => {
            let name = a.state.clone().unwrap_or_else(|| default.into());
            let psi = match PureTwoKaonState::by_name(&name) {
                Ok(psi) => psi,
                Err(_) if Path::new(&name).is_file() => state_file(Path::new(&name))?,
                Err(e) => return Err(e.into()),
            };
            Ok((name, psi))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    r: [f64; 4],
    #[serde(default)]
    phi: [f64; 4],
}

fn state_file(path: &Path) -> Result<PureTwoKaonState, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read state file {}: {e}", path.display())))?;
    let f: StateFile = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("state file {}: {e}", path.display())))?;
    Ok(PureTwoKaonState::normalized(f.r, f.phi)?)
}

fn state_json(psi: &PureTwoKaonState) -> Value {
    json!({ "r": psi.r, "phi": psi.phi })
}

fn matrix_json(m: &Mat4) -> Value {
    let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..4).map(|r| (0..4).map(|c| f(&m[(r, c)])).collect()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

fn path_of(p: PathArg) -> EvalPath {
    match p {
        PathArg::Closed => EvalPath::Closed,
        PathArg::Matrix => EvalPath::Matrix,
    }
}

fn path_name(p: PathArg) -> &'static str {
    match p {
        PathArg::Closed => "closed",
        PathArg::Matrix => "matrix",
    }
}

fn evolve_single_cmd(ctx: &Context, a: &SingleArgs, t: f64, mode: Mode) -> Result<(), Failure> {
    let (label, init) = single_initial(a)?;
    let (mode, mode_name) = match mode {
        Mode::Zero => (OffDiagonalMode::Zero, "zero"),
        Mode::FormalX => (OffDiagonalMode::FormalX, "formal-x"),
    };
    let s = evolve_single(&init, t, &ctx.params, mode)?;
    let meta = ctx.meta("evolve-single").with("initial", &label).with("mode", mode_name);
    ctx.json(
        &meta,
        json!({
            "t": t,
            "basis": ["K_S", "K_L", "from_K_L", "from_K_S"],
            "density_matrix": matrix_json(&s.density_matrix()),
            "surviving_trace": s.surviving_trace(),
            "total_trace": s.total_trace(),
            "purity": s.purity(),
        }),
    )
}

fn purity_scan(
    ctx: &Context,
    a: &SingleArgs,
    t_end: Option<f64>,
    step: Option<f64>,
    steps: Option<usize>,
) -> Result<(), Failure> {
    let (label, init) = single_initial(a)?;
    let t_end = t_end.or(ctx.file.t_end).unwrap_or(10.0);
    let step = match steps {
        Some(0) => return Err(Failure::usage("--steps must be at least 1")),
        Some(n) => t_end / n as f64,
        None => step.or(ctx.file.step).unwrap_or(0.01),
    };
    let rows = purity_curve(&init, t_end, step, &ctx.params)?;
    let (t_min, p_min) = purity_minimum(&init, &ctx.params, t_end)?;
    let meta = ctx
        .meta("purity-scan")
        .with("initial", &label)
        .with("purity_min", fmt_num(p_min))
        .with("purity_min_t", fmt_num(t_min));
    ctx.text(&meta, &csv_table(&["t", "purity"], rows.into_iter().map(|(t, p)| vec![t, p])))
}

fn expectation(
    ctx: &Context,
    a: &StateArgs,
    t_l: f64,
    t_r: f64,
    left: &str,
    right: &str,
    path: PathArg,
) -> Result<(), Failure> {
    let (label, psi) = pair_state(a, "xi")?;
    let (ql, qr) = (QuasiSpin::by_name(left)?, QuasiSpin::by_name(right)?);
    let e = match path {
        PathArg::Matrix => expectation_matrix(&psi, &ql.projector(), &qr.projector(), t_l, t_r, &ctx.params)?,
        PathArg::Closed => {
            let anti = |q: &QuasiSpin| q.alpha.norm() < 1e-12;
            if !(anti(&ql) && anti(&qr)) {
                return Err(Failure::usage("the closed path covers k0bar on both sides; use --path matrix"));
            }
            expectation_closed_form(&psi, t_l, t_r, &ctx.params)?
        }
    };
    let meta = ctx.meta("expectation").with("state", &label).with("path", path_name(path));
    ctx.json(
        &meta,
        json!({
            "state": state_json(&psi),
            "t_l": t_l, "t_r": t_r,
            "left": left.to_ascii_lowercase(), "right": right.to_ascii_lowercase(),
            "E": e,
        }),
    )
}

fn concurrence(
    ctx: &Context,
    a: &StateArgs,
    t_l: f64,
    t_r: f64,
    method: ConcurrenceMethod,
) -> Result<(), Failure> {
    let (label, psi) = pair_state(a, "xi")?;
    let state = evolve_bipartite(&psi, t_l, t_r, &ctx.params)?;
    let raw = wootters_concurrence(&state.ssss)?;
    let renorm = wootters_concurrence_normalized(&state.ssss)?;
    let closed = concurrence_closed_form(&psi, t_l, t_r, &ctx.params)?;
    let purity = state.purity();
    let (value, method_name) = match method {
        ConcurrenceMethod::Wootters => (raw.value, "wootters"),
        ConcurrenceMethod::Closed => (closed, "closed"),
    };
    let meta = ctx.meta("concurrence").with("state", &label).with("method", method_name);
    ctx.json(
        &meta,
        json!({
            "state": state_json(&psi),
            "t_l": t_l, "t_r": t_r,
            "survival_probability": state.ssss.trace().re,
            "concurrence": value,
            "concurrence_raw": raw.value,
            "concurrence_renorm": renorm,
            "concurrence_closed_form": closed,
            "wootters_lambdas": raw.lambdas,
            "eof_renorm": eof_from_concurrence(renorm.min(1.0))?,
            "ppt_min_eigenvalue": ppt_min_eigenvalue(&state),
            "purity_raw": purity.raw,
            "purity_norm": purity.normalized,
        }),
    )
}

fn bell_eval(
    ctx: &Context,
    a: &StateArgs,
    times: Option<[f64; 4]>,
    quasispins: Option<[String; 4]>,
    path: PathArg,
) -> Result<(), Failure> {
    let (label, psi) = pair_state(a, "xi")?;
    let times = times
        .or_else(|| reference_times(&label))
        .ok_or_else(|| Failure::usage(format!("state `{label}` has no reference times; pass --times")))?;
    let names = quasispins.unwrap_or_else(|| std::array::from_fn(|_| "k0bar".to_string()));
    let mut qs = [QuasiSpin::antikaon(); 4];
    for (q, name) in qs.iter_mut().zip(&names) {
        *q = QuasiSpin::by_name(name)?;
    }
    let cfg = BellConfiguration::new(times, qs)?;
    let s = s_value(&psi, &cfg, &ctx.params, path_of(path))?;
    let meta = ctx.meta("bell-eval").with("state", &label).with("path", path_name(path));
    ctx.json(
        &meta,
        json!({
            "state": state_json(&psi),
            "times": times,
            "quasispins": names.iter().map(|n| n.to_ascii_lowercase()).collect::<Vec<_>>(),
            "S": s,
            "violation": s > LOCAL_BOUND,
        }),
    )
}

fn budget(ctx: &Context, starts: Option<usize>, evaluations: Option<usize>) -> Budget {
    Budget::new(
        starts.or(ctx.file.starts).unwrap_or(DEFAULT_STARTS),
        evaluations.or(ctx.file.budget).unwrap_or(DEFAULT_BUDGET),
    )
}

fn bell_optimize(
    ctx: &Context,
    fix_state: Option<String>,
    free_phases: bool,
    starts: Option<usize>,
    evaluations: Option<usize>,
    t_max: Option<f64>,
    method: MethodArg,
) -> Result<(), Failure> {
    let t_max = t_max.or(ctx.file.t_max).unwrap_or(DEFAULT_T_MAX);
    let method = match method {
        MethodArg::Profile => LocalMethod::Profile,
        MethodArg::Simplex => LocalMethod::Simplex,
    };
    let (space, mode) = match &fix_state {
        Some(name) => {
            if free_phases {
                return Err(Failure::usage("--free-phases has no effect with --fix-state"));
            }
            (SearchSpace::fixed_state(PureTwoKaonState::by_name(name)?, t_max), format!("fixed:{name}"))
        }
        None => (
            SearchSpace::full(free_phases, t_max),
            if free_phases { "phases-free" } else { "phases-frozen" }.into(),
        ),
    };
    let budget = budget(ctx, starts, evaluations);
    let res = maximize_s_with(&space.with_method(method), &ctx.params, budget, ctx.seed, ctx.exec)?;
    let meta = ctx
        .meta("bell-optimize")
        .with("mode", &mode)
        .with("method", format!("{method:?}").to_ascii_lowercase())
        .with("starts", budget.starts)
        .with("budget", budget.evaluations)
        .with("t_max", fmt_num(t_max));
    ctx.json(
        &meta,
        json!({
            "S": res.best_s,
            "S_matrix": res.matrix_s,
            "violation": res.best_s > LOCAL_BOUND,
            "state": state_json(&res.best_state),
            "times": res.best_times,
            "n_starts": res.n_starts,
            "n_evals": res.n_evals,
            "budget_exhausted": res.budget_exhausted,
            "history": res.history,
        }),
    )
}

fn trajectory(
    ctx: &Context,
    a: &StateArgs,
    scenario: &str,
    t_end: Option<f64>,
    step: Option<f64>,
) -> Result<(), Failure> {
    let (label, psi) = pair_state(a, "phi+")?;
    let scenario: Scenario = scenario.parse()?;
    let t_end = t_end.or(ctx.file.t_end).unwrap_or(100.0);
    let step = step.or(ctx.file.step).unwrap_or(0.05);
    let points = trajectory_with(&psi, scenario, t_end, step, &ctx.params, ctx.exec)?;
    let meta = ctx.meta("trajectory").with("state", &label).with("scenario", scenario.name());
    ctx.text(&meta, &trajectory_csv(&points))
}

fn curves(
    ctx: &Context,
    which: Which,
    points: Option<usize>,
    a: &StateArgs,
    times: Option<[f64; 4]>,
    u_max: f64,
) -> Result<(), Failure> {
    let points = points.or(ctx.file.points);
    match which {
        Which::Mems => ctx
            .text(&ctx.meta("curves").with("curve", "mems"), &curve_csv(&mems_curve(points.unwrap_or(101))?)),
        Which::Werner => ctx.text(
            &ctx.meta("curves").with("curve", "werner"),
            &curve_csv(&werner_curve(points.unwrap_or(101))?),
        ),
        Which::S => {
            let (label, psi) = pair_state(a, "xi")?;
            let (times_opt, origin) = match times.or_else(|| reference_times(&label)) {
                Some(t) => (t, "given"),
                None => {
                    let space = SearchSpace::fixed_state(psi, ctx.file.t_max.unwrap_or(DEFAULT_T_MAX));
                    let budget = Budget::new(PATH_STARTS, PATH_BUDGET);
                    (
                        maximize_s_with(&space, &ctx.params, budget, ctx.seed, ctx.exec)?.best_times,
                        "optimized",
                    )
                }
            };
            let path = TimePath { times_opt, u_max, n_points: points.unwrap_or(301) };
            let rows = s_curve(&psi, &path, &ctx.params)?;
            let meta = ctx
                .meta("curves")
                .with("curve", "s")
                .with("state", &label)
                .with("times_opt", times_opt.map(fmt_num).join(","))
                .with("times_origin", origin);
            ctx.text(&meta, &s_curve_csv(&rows))
        }
    }
}

fn reproduce_cmd(ctx: &Context, strict: bool, samples: Option<usize>) -> Result<(), Failure> {
    let defaults = ReproduceOptions::default();
    let opts = ReproduceOptions {
        seed: ctx.seed,
        oracle_samples: samples.or(ctx.file.samples).unwrap_or(defaults.oracle_samples),
        optimizer_budget: Budget::new(
            ctx.file.starts.unwrap_or(defaults.optimizer_budget.starts),
            ctx.file.budget.unwrap_or(defaults.optimizer_budget.evaluations),
        ),
        exec: ctx.exec,
    };
    let checks = reproduce(&ctx.params, &opts)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    let meta = ctx.meta("reproduce").with("samples", opts.oracle_samples);
    let mut body = render_table(&checks);
    body.push_str(&format!("# {} checks, {} failed\n", checks.len(), failed));
    ctx.text(&meta, &body)?;
    if strict && failed > 0 {
        return Err(Failure::domain(format!("{failed} reproduce check(s) failed")));
    }
    Ok(())
}
