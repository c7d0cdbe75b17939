use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use chronoflip::channels::Channel;
use chronoflip::game::{
    builtin_sets, classify_pair, play_game, GamePair, PromiseClass, PROMISE_TOL,
};
use chronoflip::haar::{
    appendix_d_inequality_d2, appendix_d_inequality_d3, frame_operator, frame_operator_closed_form,
    TwirlMethod,
};
use chronoflip::inversion::{in_bistochastic_span, invert_channel, invert_general, InversionKind};
use chronoflip::linalg::{eigvals_hermitian, random, vnorm};
use chronoflip::reproduce::{run_criterion, ReproduceConfig, CRITERIA};
use chronoflip::teleport::simulate_flip_circuit;
use chronoflip::testersdp::{optimal_error_bound, SdpError, SolverOptions};
use chronoflip::timeflip::{
    bipartite_supermap, check_supermap_normalization, flip_supermap_choi, time_flip, SupermapKind,
};
use chronoflip::ComplexMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{read_json, table, write_json, yes_no, CliError, CliResult, Outcome, Report};
use crate::{BoundAction, Cli, Command, Global, VerifyCheck};

type M = ComplexMatrix<f64>;

/// What a subcommand hands back before the envelope is added.
struct Body {
    name: String,
    tolerances: Value,
    result: Value,
    text: String,
    ok: bool,
}

fn body(name: &str, tolerances: Value, result: impl Serialize, text: String, ok: bool) -> Body {
    Body {
        name: name.to_string(),
        tolerances,
        result: serde_json::to_value(result).expect("result serializes"),
        text,
        ok,
    }
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    let start = Instant::now();
    let b = match &cli.command {
        Command::Check { input } => check(g, input)?,
        Command::Invert { kind, input, out } => invert(g, kind, input, out.as_deref())?,
        Command::Flip { input, out } => flip(g, input, out.as_deref())?,
        Command::Supermap { kind, a, b, out } => supermap(g, kind, a, b, out.as_deref())?,
        Command::Teleport {
            u,
            psi,
            alpha,
            beta,
            d,
        } => teleport(g, u.as_deref(), psi.as_deref(), alpha, beta, *d)?,
        Command::Game { u, v, builtin } => {
            if *builtin {
                game_builtin(g)?
            } else {
                let (u, v) = (u.as_deref().expect("clap"), v.as_deref().expect("clap"));
                game_pair(g, u, v)?
            }
        }
        Command::Bound {
            action:
                BoundAction::Solve {
                    eps,
                    feas,
                    max_iter,
                    report,
                },
        } => bound(g, *eps, *feas, *max_iter, report.as_deref())?,
        Command::Verify { check } => match check {
            VerifyCheck::Frame { d, method } => verify_frame(g, *d, method.as_deref())?,
            VerifyCheck::AppendixD { d, report } => verify_appendix_d(g, *d, report.as_deref())?,
            VerifyCheck::SupermapNorm { d, exchange } => verify_supermap_norm(g, *d, *exchange)?,
        },
        Command::ReproduceAll {
            only,
            tolerance_scale,
            report,
        } => reproduce_all(g, only, *tolerance_scale, report.as_deref())?,
    };
    let report = Report {
        tool: "chronoflip",
        version: env!("CARGO_PKG_VERSION"),
        command: b.name,
        seed: g.seed,
        tolerances: b.tolerances,
        ok: b.ok,
        wall_time_s: start.elapsed().as_secs_f64(),
        result: b.result,
    };
    Ok(Outcome {
        report,
        text: b.text,
        ok: b.ok,
    })
}

fn read_channel(path: &Path) -> CliResult<Channel<f64>> {
    read_json(path)
}

fn emit_channel(c: &Channel<f64>, out: Option<&Path>) -> CliResult<()> {
    if let Some(p) = out {
        write_json(p, c)?;
    }
    Ok(())
}

fn rng(g: &Global) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(g.seed)
}

fn tol_only(g: &Global) -> Value {
    json!({ "tol": g.tol })
}

#[derive(Serialize)]
struct ChannelCheck {
    d_in: usize,
    d_out: usize,
    kraus_count: usize,
    completely_positive: bool,
    trace_preserving: bool,
    cptp: bool,
    unital: bool,
    bistochastic: bool,
    in_bistochastic_span: bool,
    trace_preservation_deviation: f64,
    unitality_deviation: Option<f64>,
    choi_min_eig: f64,
}

fn check(g: &Global, input: &Path) -> CliResult<Body> {
    let c = read_channel(input)?;
    let j = c.choi();
    let square = c.d_in() == c.d_out();
    let unital_dev = c.unitality_deviation();
    let r = ChannelCheck {
        d_in: c.d_in(),
        d_out: c.d_out(),
        kraus_count: c.kraus().len(),
        completely_positive: j.is_cp(g.tol),
        trace_preserving: c.trace_preservation_deviation() <= g.tol,
        cptp: c.is_cptp(g.tol),
        unital: unital_dev <= g.tol,
        bistochastic: c.is_bistochastic(g.tol),
        in_bistochastic_span: square && in_bistochastic_span(&j, g.tol),
        trace_preservation_deviation: c.trace_preservation_deviation(),
        unitality_deviation: square.then_some(unital_dev),
        choi_min_eig: j.min_eig()?,
    };
    let text = table(&[
        ("dimensions", format!("{} -> {}", r.d_in, r.d_out)),
        ("Kraus operators", r.kraus_count.to_string()),
        ("CPTP", yes_no(r.cptp)),
        ("bistochastic", yes_no(r.bistochastic)),
        ("in bistochastic span", yes_no(r.in_bistochastic_span)),
        (
            "trace deviation",
            format!("{:.3e}", r.trace_preservation_deviation),
        ),
        ("unitality deviation", format!("{:.3e}", unital_dev)),
        ("Choi min eigenvalue", format!("{:.3e}", r.choi_min_eig)),
    ]);
    // predicate failures are data, not errors
    Ok(body("check", tol_only(g), r, text, true))
}

fn parse_kind<K: std::str::FromStr<Err = chronoflip::Error>>(s: &str) -> CliResult<K> {
    s.parse()
        .map_err(|e: chronoflip::Error| CliError::Usage(e.to_string()))
}

fn invert(g: &Global, kind: &str, input: &Path, out: Option<&Path>) -> CliResult<Body> {
    let kind: InversionKind = parse_kind(kind)?;
    let c = read_channel(input)?;
    let bistochastic = c.is_bistochastic(g.tol);
    // channels outside the bistochastic set are projected first
    let inv = if bistochastic {
        invert_channel(&c, kind)
    } else {
        invert_general(&c, kind)?
    };
    emit_channel(&inv, out)?;
    let text = table(&[
        ("inversion", kind.to_string()),
        ("input bistochastic", yes_no(bistochastic)),
        ("projected first", yes_no(!bistochastic)),
        ("output CPTP", yes_no(inv.is_cptp(g.tol))),
        (
            "written to",
            out.map_or("-".into(), |p| p.display().to_string()),
        ),
    ]);
    let result = json!({ "kind": kind.to_string(), "projected": !bistochastic, "channel": inv });
    Ok(body("invert", tol_only(g), result, text, true))
}

fn flip(g: &Global, input: &Path, out: Option<&Path>) -> CliResult<Body> {
    let c = read_channel(input)?;
    let f = time_flip(&c)?;
    emit_channel(&f, out)?;
    let text = table(&[
        (
            "input",
            format!("{} -> {}, {} Kraus", c.d_in(), c.d_out(), c.kraus().len()),
        ),
        (
            "output",
            format!("{} -> {}, {} Kraus", f.d_in(), f.d_out(), f.kraus().len()),
        ),
        ("output CPTP", yes_no(f.is_cptp(g.tol))),
        (
            "written to",
            out.map_or("-".into(), |p| p.display().to_string()),
        ),
    ]);
    Ok(body(
        "flip",
        tol_only(g),
        json!({ "channel": f }),
        text,
        true,
    ))
}

fn supermap(g: &Global, kind: &str, a: &Path, b: &Path, out: Option<&Path>) -> CliResult<Body> {
    let kind: SupermapKind = parse_kind(kind)?;
    let (ca, cb) = (read_channel(a)?, read_channel(b)?);
    let s = bipartite_supermap(kind, &ca, &cb)?;
    emit_channel(&s, out)?;
    let text = table(&[
        ("supermap", kind.to_string()),
        (
            "output",
            format!("{} -> {}, {} Kraus", s.d_in(), s.d_out(), s.kraus().len()),
        ),
        ("output CPTP", yes_no(s.is_cptp(g.tol))),
        (
            "written to",
            out.map_or("-".into(), |p| p.display().to_string()),
        ),
    ]);
    Ok(body(
        "supermap",
        tol_only(g),
        json!({ "kind": kind, "channel": s }),
        text,
        true,
    ))
}

fn parse_complex(s: &str) -> CliResult<Complex<f64>> {
    let bad = || {
        CliError::Usage(format!(
            "cannot read `{s}` as a complex number (`re` or `re,im`)"
        ))
    };
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(p) => p.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex::new(re, im))
}

#[derive(Serialize)]
struct TeleportRow {
    outcome: usize,
    probability: f64,
    /// Normalized state on target ⊗ control.
    state: Vec<[f64; 2]>,
}

fn teleport(
    g: &Global,
    u: Option<&Path>,
    psi: Option<&Path>,
    alpha: &str,
    beta: &str,
    d: usize,
) -> CliResult<Body> {
    let mut rng = rng(g);
    let u: M = match u {
        Some(p) => read_json(p)?,
        None if d >= 1 => random::haar_unitary(d, &mut rng),
        None => return Err(CliError::Usage("dimension must be positive".into())),
    };
    let d = u.rows();
    let psi: Vec<Complex<f64>> = match psi {
        Some(p) => read_json::<Vec<[f64; 2]>>(p)?
            .into_iter()
            .map(|[a, b]| Complex::new(a, b))
            .collect(),
        None => random::random_state(d, &mut rng),
    };
    let (a, b) = (parse_complex(alpha)?, parse_complex(beta)?);
    let n = vnorm(&[a, b]);
    if !(n > 0.0) {
        return Err(CliError::Usage("control amplitudes are both zero".into()));
    }
    let (a, b) = (a / n, b / n);
    let outcomes = simulate_flip_circuit(&u, &psi, a, b)?;
    let rows: Vec<TeleportRow> = outcomes
        .iter()
        .map(|o| TeleportRow {
            outcome: o.outcome_index,
            probability: o.probability,
            state: o.conditional_state.iter().map(|z| [z.re, z.im]).collect(),
        })
        .collect();
    let total: f64 = rows.iter().map(|r| r.probability).sum();
    let mut text = format!("d = {d}, alpha = {a:.6}, beta = {b:.6}\noutcome  probability\n");
    for r in &rows {
        let _ = writeln!(text, "{:>7}  {:.12}", r.outcome, r.probability);
    }
    let _ = writeln!(
        text,
        "  total  {total:.12}  (heralded outcome 0; expected 1/d² = {:.12})",
        1.0 / (d * d) as f64
    );
    let result = json!({
        "d": d,
        "u": u,
        "psi": psi.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "alpha": [a.re, a.im],
        "beta": [b.re, b.im],
        "outcomes": rows,
        "total_probability": total,
    });
    Ok(body("teleport", tol_only(g), result, text, true))
}

#[derive(Serialize)]
struct GameRow {
    name: String,
    declared: PromiseClass,
    classified: PromiseClass,
    outcome: PromiseClass,
    p_plus: f64,
    p_minus: f64,
    correct: bool,
}

fn game_row(pair: &GamePair<f64>, tol: f64) -> CliResult<GameRow> {
    let classified = classify_pair(&pair.u, &pair.v, tol)?;
    let declared = if pair.declared_class == PromiseClass::None {
        classified
    } else {
        pair.declared_class
    };
    if declared == PromiseClass::None {
        return Err(chronoflip::Error::PromiseViolated.into());
    }
    let r = play_game(&pair.u, &pair.v)?;
    Ok(GameRow {
        name: pair.name.clone(),
        declared,
        classified,
        outcome: r.outcome,
        p_plus: r.p_plus,
        p_minus: r.p_minus,
        correct: r.outcome == declared && r.error_probability(declared) <= tol,
    })
}

fn game_text(rows: &[GameRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.name.chars().count())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut text = format!("{:width$}  class  outcome  P(+)          P(-)\n", "pair");
    for r in rows {
        let pad = width - r.name.chars().count();
        let _ = writeln!(
            text,
            "{}{:pad$}  {:<5}  {:<7}  {:.6e}  {:.6e}{}",
            r.name,
            "",
            r.declared.to_string(),
            r.outcome.to_string(),
            r.p_plus,
            r.p_minus,
            if r.correct { "" } else { "  WRONG" }
        );
    }
    text
}

fn game_pair(g: &Global, u: &Path, v: &Path) -> CliResult<Body> {
    let pair = GamePair::new("(U, V)", read_json(u)?, read_json(v)?, PromiseClass::None);
    let row = game_row(&pair, g.tol.max(PROMISE_TOL))?;
    let ok = row.correct;
    let text = game_text(std::slice::from_ref(&row));
    Ok(body("game", tol_only(g), row, text, ok))
}

fn game_builtin(g: &Global) -> CliResult<Body> {
    let (sp, sm) = builtin_sets::<f64>();
    let rows = sp
        .iter()
        .chain(&sm)
        .map(|p| game_row(p, g.tol.max(PROMISE_TOL)))
        .collect::<CliResult<Vec<_>>>()?;
    let ok = rows.iter().all(|r| r.correct);
    let mut text = game_text(&rows);
    let right = rows.iter().filter(|r| r.correct).count();
    let _ = writeln!(text, "{right}/{} pairs identified", rows.len());
    Ok(body(
        "game --builtin",
        tol_only(g),
        json!({ "pairs": rows }),
        text,
        ok,
    ))
}

fn bound(
    g: &Global,
    eps: f64,
    feas: f64,
    max_iter: usize,
    report: Option<&Path>,
) -> CliResult<Body> {
    if !(eps > 0.0 && feas > 0.0) {
        return Err(CliError::Usage("--eps and --feas must be positive".into()));
    }
    let opts = SolverOptions {
        max_iter,
        eps_gap: eps,
        eps_feas: feas,
        seed: g.seed,
    };
    let tolerances = json!({ "eps_gap": eps, "eps_feas": feas });
    let r = match optimal_error_bound(2, &opts) {
        Ok(r) => r,
        Err(SdpError::Problem(e)) => return Err(e.into()),
        Err(e @ (SdpError::Infeasible(_) | SdpError::IterationLimit { .. })) => {
            let text = format!("solver failed: {e}\n");
            let result = json!({ "error": e.to_string() });
            return Ok(body("bound solve", tolerances, result, text, false));
        }
    };
    if let Some(p) = report {
        write_json(p, &r)?;
    }
    let mut text = table(&[
        ("objective", format!("{:.7}", r.objective)),
        ("dual objective", format!("{:.7}", r.dual_objective)),
        ("relative gap", format!("{:.2e}", r.relative_gap)),
        ("primal residual", format!("{:.2e}", r.primal_residual)),
        ("dual residual", format!("{:.2e}", r.dual_residual)),
        ("iterations", r.iterations.to_string()),
        ("largest error term", format!("{:.7}", r.max_error)),
        ("wall time", format!("{:.2} s", r.wall_time_s)),
    ]);
    if g.verbose {
        for e in r.errors.e0.iter().chain(&r.errors.e1) {
            let _ = writeln!(text, "  {:<28} {:.7}", e.name, e.value);
        }
    }
    Ok(body("bound solve", tolerances, r, text, true))
}

fn verify_frame(g: &Global, d: usize, method: Option<&str>) -> CliResult<Body> {
    let method: TwirlMethod = match method {
        Some(m) => parse_kind(m)?,
        None if d == 2 => TwirlMethod::Design,
        None => TwirlMethod::Weingarten,
    };
    let f = frame_operator::<f64>(d, method)?;
    let dev = f.distance(&frame_operator_closed_form(d));
    let spectrum = eigvals_hermitian(&f.hermitian_part())?;
    let ok = dev <= g.tol;
    let text = table(&[
        ("dimension", d.to_string()),
        ("method", method.to_string()),
        ("distance to closed form", format!("{dev:.3e}")),
        ("largest eigenvalue", format!("{:.12}", spectrum[0])),
        (
            "smallest eigenvalue",
            format!("{:.3e}", spectrum[spectrum.len() - 1]),
        ),
        ("verdict", if ok { "pass" } else { "fail" }.into()),
    ]);
    let result =
        json!({ "d": d, "method": method.to_string(), "distance": dev, "spectrum": spectrum });
    Ok(body("verify frame", tol_only(g), result, text, ok))
}

fn verify_appendix_d(g: &Global, d: usize, report: Option<&Path>) -> CliResult<Body> {
    let (result, holds, min_eig) = match d {
        2 => {
            let r = appendix_d_inequality_d2::<f64>(g.tol)?;
            (
                serde_json::to_value(&r).expect("serializes"),
                r.holds,
                r.min_eig,
            )
        }
        3 => {
            let r = appendix_d_inequality_d3::<f64>(g.tol)?;
            (
                serde_json::to_value(&r).expect("serializes"),
                r.holds,
                r.min_eig,
            )
        }
        _ => {
            return Err(CliError::Usage(format!(
                "the inequality is checked for d = 2 or 3, not {d}"
            )))
        }
    };
    if let Some(p) = report {
        write_json(p, &result)?;
    }
    let text = table(&[
        ("dimension", d.to_string()),
        ("min eigenvalue", format!("{min_eig:.3e}")),
        ("verdict", if holds { "holds" } else { "violated" }.into()),
    ]);
    Ok(body("verify appendix-d", tol_only(g), result, text, holds))
}

fn verify_supermap_norm(g: &Global, d: usize, exchange: bool) -> CliResult<Body> {
    if d < 2 {
        return Err(CliError::Usage(format!("dimension {d} is too small")));
    }
    let mut s = flip_supermap_choi::<f64>(d);
    if exchange {
        s = s.exchange_input_output()?;
    }
    let r = check_supermap_normalization(&s, g.tol)?;
    let ok = r.passed();
    let text = table(&[
        ("dimension", d.to_string()),
        ("exchanged", yes_no(exchange)),
        ("identity residual", format!("{:.3e}", r.residual_identity)),
        ("marginal residual", format!("{:.3e}", r.residual_marginals)),
        ("verdict", if ok { "pass" } else { "fail" }.into()),
    ]);
    Ok(body("verify supermap-norm", tol_only(g), r, text, ok))
}

fn reproduce_all(g: &Global, only: &[usize], scale: f64, report: Option<&Path>) -> CliResult<Body> {
    if !(scale >= 0.0) {
        return Err(CliError::Usage(
            "--tolerance-scale must be non-negative".into(),
        ));
    }
    let cfg = ReproduceConfig {
        seed: g.seed,
        solver: SolverOptions {
            seed: g.seed,
            ..SolverOptions::default()
        },
        tolerance_scale: scale,
        trials: g.trials,
    };
    let ids: Vec<usize> = if only.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        only.to_vec()
    };
    let mut results = Vec::with_capacity(ids.len());
    let mut text = String::new();
    for id in ids {
        let r = run_criterion(id, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
        if g.verbose {
            eprintln!("{}", r.line());
        }
        let _ = writeln!(text, "{}", r.line());
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(text, "{passed}/{} criteria passed", results.len());
    let ok = passed == results.len();
    let result = json!({ "passed": passed, "total": results.len(), "criteria": results });
    if let Some(p) = report {
        write_json(p, &result)?;
    }
    let tolerances = json!({ "tolerance_scale": scale, "solver": cfg.solver });
    Ok(body("reproduce-all", tolerances, result, text, ok))
}
