//! Subcommand implementations. Each returns the rendered report and its exit code.

use std::sync::Arc;

use rayon::prelude::*;

use phimax::intersection::{
    ip_decide_ball, ip_decide_fullspace, ip_no_witness_certificate_1d, IPDecision, Touch, Verdict,
};
use phimax::minimax::{
    conv_minimax_witness, default_dictionary, eps_subgradient_ip_witness_search, nonexistence_certificate_1d,
    saddle_values, subgradient_ip_witness_search, support_ip_witness_search, verify_ip_witness, IPWitness,
    Region, SaddleProblem, SaddleValues,
};
use phimax::primitives::{support_membership, Grid, QuadMinorant, SampledFunction, Vector, DEFAULT_TOL};
use phimax::subdiff::{definitional_test, membership_report, subdiff_membership, subgradient_search, SubdiffQuery};
use phimax::support::{envelope_tolerance, phi_convexity_gap, tight_offset, MinorantDictionary};
use phimax::variational::{bronsted_rockafellar, ip_transfer_to_ball, BRResult, BrRoute, TransferLeg};

use crate::problem::Problem;
use crate::report::{csv_field, number, Json};
use crate::{CliError, Command, Format, Mode, Output, EXIT_OK, EXIT_UNDECIDED, EXIT_VIOLATION};

/// Longest minorant list printed by `subdiff` searches.
const LIST_LIMIT: usize = 64;
/// Largest number of rows in one sweep.
const MAX_SWEEP_ROWS: usize = 10_000;

pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    match cmd {
        Command::Envelope { file, function } => {
            let p = Problem::load(file)?;
            envelope_report(&p, function)
        }
        Command::Subdiff {
            file,
            function,
            at,
            eps,
            phi,
        } => {
            let p = Problem::load(file)?;
            subdiff_report(&p, function, at, *eps, phi.as_deref())
        }
        Command::Intersect {
            phi1,
            phi2,
            alpha,
            ball,
            margin,
        } => intersect_report(phi1, phi2, *alpha, *ball, *margin),
        Command::Br {
            file,
            function,
            at,
            phi,
            eps,
            lambda,
        } => {
            let p = Problem::load(file)?;
            let eps = param(*eps, p.file.parameters.epsilon, "--eps")?;
            let lambda = param(*lambda, p.file.parameters.lambda, "--lambda")?;
            br_report(&p, function, at, phi, eps, lambda)
        }
        Command::Transfer {
            file,
            function,
            function2,
            phi1,
            phi2,
            alpha,
            gamma,
            eta,
        } => {
            let p = Problem::load(file)?;
            let params = &p.file.parameters;
            let alpha = param(*alpha, params.alpha, "--alpha")?;
            let gamma = param(*gamma, params.gamma, "--gamma")?;
            let eta = param(*eta, params.eta, "--eta")?;
            transfer_report(&p, function, function2, phi1, phi2, alpha, gamma, eta)
        }
        Command::Minimax {
            file,
            alpha_sweep,
            ball,
            mode,
            eps,
            format,
        } => {
            let p = Problem::load(file)?;
            let eps = eps.or(p.file.parameters.epsilon).unwrap_or(0.1);
            minimax_report(&p, alpha_sweep, *ball, *mode, eps, *format)
        }
        Command::PaperExample { gamma, eta } => worked_example(*gamma, *eta),
    }
}

fn param(flag: Option<f64>, file: Option<f64>, name: &str) -> Result<f64, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Input(format!("{name} is required (flag or file parameter)")))
}

fn done(report: Json, code: i32) -> Result<Output, CliError> {
    Ok(Output {
        text: report.render(),
        code,
    })
}

pub fn parse_numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: {s:?} is not a number")))
        })
        .collect()
}

pub fn parse_vector(text: &str) -> Result<Vector, CliError> {
    Ok(Vector::new(parse_numbers(text, "point")?)?)
}

/// Parses `a,l1,…,ln,c`.
pub fn parse_minorant(text: &str) -> Result<QuadMinorant, CliError> {
    let v = parse_numbers(text, "minorant")?;
    if v.len() < 3 {
        return Err(CliError::Input(format!(
            "minorant {text:?} needs at least a, one slope coordinate and c"
        )));
    }
    let slope = Vector::new(v[1..v.len() - 1].to_vec())?;
    Ok(QuadMinorant::new(v[0], slope, v[v.len() - 1])?)
}

fn check_dim(phi: &QuadMinorant, n: usize, what: &str) -> Result<(), CliError> {
    if phi.dim() != n {
        return Err(CliError::Input(format!("{what} has dimension {}, expected {n}", phi.dim())));
    }
    Ok(())
}

fn dictionary_for(p: &Problem, f: &SampledFunction) -> Result<MinorantDictionary, CliError> {
    match p.dictionary()? {
        Some(d) => Ok(d),
        None => Ok(MinorantDictionary::default_for(f)?),
    }
}

fn dictionary_json(d: &MinorantDictionary) -> Json {
    Json::obj()
        .with("curvatures", d.curvatures())
        .with("slopes", d.slopes().len())
        .with("size", d.len())
}

fn envelope_report(p: &Problem, name: &str) -> Result<Output, CliError> {
    let f = p.function(name)?;
    let dict = dictionary_for(p, f)?;
    let gap = phi_convexity_gap(f, &dict)?;
    let tol = envelope_tolerance(f);
    let report = Json::obj()
        .with("command", "envelope")
        .with("function", name)
        .with("grid_points", f.len())
        .with("dictionary", dictionary_json(&dict))
        .with("gap", gap)
        .with("tolerance", tol)
        .with("phi_convex", gap <= tol);
    done(report, EXIT_OK)
}

fn subdiff_report(p: &Problem, name: &str, at: &str, eps: f64, phi: Option<&str>) -> Result<Output, CliError> {
    let f = p.function(name)?;
    let x = parse_vector(at)?;
    let q = SubdiffQuery::new(f, &x, eps, DEFAULT_TOL)?;
    let base = Json::obj()
        .with("command", "subdiff")
        .with("function", name)
        .with("at", &q.x_bar())
        .with("f_at", q.f_at())
        .with("epsilon", eps);
    if let Some(text) = phi {
        let phi = parse_minorant(text)?;
        check_dim(&phi, f.dim(), "--phi")?;
        let rep = membership_report(&q, &phi)?;
        let report = base
            .with("phi", &phi)
            .with("member", rep.member)
            .with("definitional", definitional_test(&q, &phi)?)
            .with("definitional_margin", rep.definitional_margin)
            .with("normalized", &rep.normalized)
            .with("normalized_min_slack", rep.normalized_min_slack)
            .with("literal_characterization", rep.literal_characterization);
        return done(report, EXIT_OK);
    }
    let dict = dictionary_for(p, f)?;
    let found: Vec<QuadMinorant> = if eps == 0.0 {
        subgradient_search(f, &q.x_bar(), &dict)?
    } else {
        // The tight member of each dictionary direction is the best candidate
        // for that direction: any ε-subgradient with that (a, l) lies below it.
        let mut out = Vec::new();
        for (a, l) in dict.pairs() {
            let phi = tight_offset(f, a, l)?.minorant(a, l)?;
            if subdiff_membership(&q, &phi)? {
                out.push(phi);
            }
        }
        out
    };
    let listed: Vec<Json> = found.iter().take(LIST_LIMIT).map(Json::from).collect();
    let report = base
        .with("dictionary", dictionary_json(&dict))
        .with("count", found.len())
        .with("truncated", found.len() > LIST_LIMIT)
        .with("minorants", listed);
    done(report, EXIT_OK)
}

fn intersect_report(phi1: &str, phi2: &str, alpha: f64, ball: Option<f64>, margin: f64) -> Result<Output, CliError> {
    let phi1 = parse_minorant(phi1)?;
    let phi2 = parse_minorant(phi2)?;
    check_dim(&phi2, phi1.dim(), "--phi2")?;
    let decision = match ball {
        None => ip_decide_fullspace(&phi1, &phi2, alpha, phi1.dim())?,
        Some(g) => ip_decide_ball(&phi1, &phi2, alpha, g, margin)?,
    };
    let region = ball.map_or("fullspace".to_string(), |g| format!("ball({})", number(g, false)));
    let report = Json::obj()
        .with("command", "intersect")
        .with("phi1", &phi1)
        .with("phi2", &phi2)
        .with("alpha", alpha)
        .with("region", region)
        .with("verdict", decision.verdict.as_str())
        .with("witness", decision.witness.as_ref())
        .with("certificate", decision.certificate.as_str())
        .with("margin", decision.margin);
    done(report, verdict_code(&decision))
}

fn verdict_code(d: &IPDecision) -> i32 {
    if d.verdict == Verdict::Undecided {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn route_name(r: BrRoute) -> &'static str {
    match r {
        BrRoute::ClosedForm => "closed-form",
        BrRoute::ShiftedCenter => "shifted-center",
    }
}

fn br_json(f: &SampledFunction, r: &BRResult) -> Result<(Json, bool), CliError> {
    let q = SubdiffQuery::new(f, &r.y_bar, 0.0, DEFAULT_TOL)?;
    let exact = subdiff_membership(&q, &r.phi_bar)?;
    let b = &r.bounds;
    let bounds = Json::obj()
        .with("dist", b.dist)
        .with("slope_change", b.slope_change)
        .with("slope_bound", b.slope_bound)
        .with("curv_change", b.curv_change)
        .with("curv_target", b.curv_target)
        .with("offset_change", b.offset_change)
        .with("offset_bound", b.offset_bound);
    let json = Json::obj()
        .with("y_bar", &r.y_bar)
        .with("phi_bar", &r.phi_bar)
        .with("phi_base", &r.phi_base)
        .with("center", &r.center)
        .with("route", route_name(r.route))
        .with("bounds", bounds)
        .with("exact_subgradient", exact);
    Ok((json, exact))
}

fn br_report(p: &Problem, name: &str, at: &str, phi: &str, eps: f64, lambda: f64) -> Result<Output, CliError> {
    let f = p.function(name)?;
    let y = parse_vector(at)?;
    let phi = parse_minorant(phi)?;
    check_dim(&phi, f.dim(), "--phi")?;
    let base = Json::obj()
        .with("command", "br")
        .with("function", name)
        .with("y", &y)
        .with("phi", &phi)
        .with("epsilon", eps)
        .with("lambda", lambda);
    match bronsted_rockafellar(f, &y, &phi, eps, lambda) {
        Ok(r) => {
            let (json, exact) = br_json(f, &r)?;
            let report = base.with("status", "ok").with("result", json);
            done(report, if exact { EXIT_OK } else { EXIT_VIOLATION })
        }
        Err(phimax::Error::NoAdmissiblePoint(msg)) => {
            let report = base.with("status", "no-admissible-point").with("reason", msg);
            done(report, EXIT_VIOLATION)
        }
        Err(e) => Err(e.into()),
    }
}

fn leg_json(f: &SampledFunction, leg: &TransferLeg) -> Result<(Json, bool), CliError> {
    let (br, exact) = br_json(f, &leg.br)?;
    let json = Json::obj()
        .with("x", &leg.eps.x1)
        .with("lift", leg.eps.c1)
        .with("eps_subgradient", &leg.eps.phi_bar)
        .with("lambda", leg.lambda)
        .with("br", br);
    Ok((json, exact))
}

#[allow(clippy::too_many_arguments)]
fn transfer_report(
    p: &Problem,
    fname: &str,
    gname: &str,
    phi1: &str,
    phi2: &str,
    alpha: f64,
    gamma: f64,
    eta: f64,
) -> Result<Output, CliError> {
    let f = p.function(fname)?;
    let g = p.function(gname)?;
    let phi1 = parse_minorant(phi1)?;
    let phi2 = parse_minorant(phi2)?;
    check_dim(&phi1, f.dim(), "--phi1")?;
    check_dim(&phi2, f.dim(), "--phi2")?;
    let t = ip_transfer_to_ball(f, g, &phi1, &phi2, alpha, gamma, eta)?;
    let (leg1, ok1) = leg_json(f, &t.leg1)?;
    let (leg2, ok2) = leg_json(g, &t.leg2)?;
    let report = Json::obj()
        .with("command", "transfer")
        .with("functions", vec![Json::from(fname), Json::from(gname)])
        .with("phi1", &phi1)
        .with("phi2", &phi2)
        .with("alpha", alpha)
        .with("gamma", gamma)
        .with("eta", eta)
        .with("epsilon", t.epsilon)
        .with("level", t.level)
        .with("leg1", leg1)
        .with("leg2", leg2)
        .with("decision", &t.decision);
    let code = if !(ok1 && ok2) {
        EXIT_VIOLATION
    } else {
        verdict_code(&t.decision)
    };
    done(report, code)
}

/// Levels `lo, lo + step, …` up to `hi`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Input(format!("sweep {text:?} must be lo:hi:step with step > 0 and lo <= hi"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums = parts
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && lo <= hi) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > MAX_SWEEP_ROWS {
        return Err(CliError::Input(format!("sweep has {count} rows, at most {MAX_SWEEP_ROWS} allowed")));
    }
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

struct Row {
    alpha: f64,
    status: &'static str,
    witness: Option<IPWitness>,
    nonexistence: Option<&'static str>,
    verify_ok: Option<bool>,
    message: Option<String>,
}

fn sweep_row(
    p: &SaddleProblem,
    values: &SaddleValues,
    alpha: f64,
    mode: Mode,
    region: Region,
    eps: f64,
    dict: &MinorantDictionary,
) -> Result<Row, CliError> {
    let mut row = Row {
        alpha,
        status: "none",
        witness: None,
        nonexistence: None,
        verify_ok: None,
        message: None,
    };
    if alpha >= values.upper {
        row.status = "skipped";
        row.message = Some("level is not below the upper value".into());
        return Ok(row);
    }
    let found = match mode {
        Mode::Support => support_ip_witness_search(p, alpha, dict),
        Mode::Subgrad => subgradient_ip_witness_search(p, alpha, region, dict),
        Mode::Eps => eps_subgradient_ip_witness_search(p, alpha, eps, dict),
        Mode::Conv => conv_minimax_witness(p, alpha),
    };
    let found = match found {
        Ok(w) => w,
        Err(phimax::Error::TheoremViolation(msg)) => {
            row.status = "theorem-violation";
            row.message = Some(msg);
            return Ok(row);
        }
        Err(e) => return Err(e.into()),
    };
    match found {
        Some(w) => {
            let ok = verify_ip_witness(p, &w)?;
            row.status = w.decision.verdict.as_str();
            row.verify_ok = Some(ok);
            row.witness = Some(w);
        }
        None => {
            let touch = match (mode, region) {
                (Mode::Subgrad, Region::FullSpace) => Some(Touch::Interior),
                (Mode::Support | Mode::Eps, _) => Some(Touch::Closed),
                _ => None,
            };
            row.nonexistence = Some(match touch {
                Some(t) if p.dim() == 1 => {
                    if nonexistence_certificate_1d(p, alpha, t)? {
                        "certified"
                    } else {
                        "dictionary-exhaustive"
                    }
                }
                Some(_) => "dictionary-exhaustive",
                None => "search-negative",
            });
        }
    }
    Ok(row)
}

fn values_json(v: &SaddleValues) -> Json {
    Json::obj()
        .with("lower", v.lower)
        .with("upper", v.upper)
        .with("gap", v.gap)
        .with("lower_argmax", v.lower_argmax.as_slice())
        .with("upper_argmin", &v.upper_argmin)
        .with("refinement_delta", v.refinement_delta)
        .with("gap_tolerance", v.gap_tolerance())
}

fn semis(v: &[f64]) -> String {
    v.iter().map(|&x| number(x, false)).collect::<Vec<_>>().join(";")
}

fn minorant_semis(phi: &QuadMinorant) -> String {
    let mut v = vec![phi.curvature()];
    v.extend_from_slice(phi.slope().as_slice());
    v.push(phi.offset());
    semis(&v)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Support => "support",
        Mode::Subgrad => "subgrad",
        Mode::Eps => "eps",
        Mode::Conv => "conv",
    }
}

fn minimax_report(
    p: &Problem,
    sweep: &str,
    ball: Option<f64>,
    mode: Mode,
    eps: f64,
    format: Format,
) -> Result<Output, CliError> {
    let alphas = parse_sweep(sweep)?;
    let region = match (ball, mode) {
        (None, _) => Region::FullSpace,
        (Some(g), Mode::Subgrad) if g.is_finite() && g > 0.0 => Region::Ball(g),
        (Some(g), Mode::Subgrad) => return Err(CliError::Input(format!("ball radius {g} must be > 0"))),
        (Some(_), _) => return Err(CliError::Input("--ball applies to --mode subgrad only".into())),
    };
    if mode == Mode::Eps && !(eps.is_finite() && eps > 0.0) {
        return Err(CliError::Input(format!("epsilon {eps} must be > 0")));
    }
    let saddle = p.saddle()?;
    let values = saddle_values(&saddle)?;
    let dict = match p.dictionary()? {
        Some(d) => d,
        None => default_dictionary(&saddle)?,
    };
    let rows = alphas
        .par_iter()
        .map(|&a| sweep_row(&saddle, &values, a, mode, region, eps, &dict))
        .collect::<Result<Vec<_>, _>>()?;

    let violations = rows
        .iter()
        .filter(|r| r.status == "theorem-violation" || r.verify_ok == Some(false))
        .count();
    let undecided = rows.iter().any(|r| r.status == Verdict::Undecided.as_str());
    let code = if violations > 0 {
        EXIT_VIOLATION
    } else if undecided {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    };

    let text = match format {
        Format::Json => {
            let rows_json: Vec<Json> = rows
                .iter()
                .map(|r| {
                    Json::obj()
                        .with("alpha", r.alpha)
                        .with("verdict", r.status)
                        .with("witness_found", r.witness.is_some())
                        .with("witness", r.witness.as_ref())
                        .with("verify_ok", r.verify_ok)
                        .with("nonexistence", r.nonexistence)
                        .with("message", r.message.clone())
                })
                .collect();
            let mut report = Json::obj()
                .with("command", "minimax")
                .with("labels", saddle.labels().iter().map(|l| Json::from(l.as_str())).collect::<Vec<_>>())
                .with("mixture_step", saddle.mixture_step())
                .with("values", values_json(&values))
                .with("mode", mode_name(mode))
                .with("region", region.name())
                .with("dictionary", dictionary_json(&dict));
            if mode == Mode::Eps {
                report = report.with("epsilon", eps);
            }
            report.with("violations", violations).with("rows", rows_json).render()
        }
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&format!(
                "# lower={} upper={} gap={} refinement_delta={}\n",
                number(values.lower, false),
                number(values.upper, false),
                number(values.gap, false),
                number(values.refinement_delta, false)
            ));
            out.push_str("alpha,mode,region,verdict,witness_found,y1,y2,phi1,phi2,verify_ok\n");
            for r in &rows {
                let verdict = match (r.status, r.nonexistence) {
                    ("none", Some(kind)) => format!("none-{kind}"),
                    (s, _) => s.to_string(),
                };
                let (y1, y2, phi1, phi2) = match &r.witness {
                    Some(w) => (semis(&w.y1), semis(&w.y2), minorant_semis(&w.phi1), minorant_semis(&w.phi2)),
                    None => Default::default(),
                };
                let fields = [
                    number(r.alpha, false),
                    mode_name(mode).to_string(),
                    region.name(),
                    verdict,
                    r.witness.is_some().to_string(),
                    y1,
                    y2,
                    phi1,
                    phi2,
                    r.verify_ok.map_or(String::new(), |b| b.to_string()),
                ];
                out.push_str(&fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
    };
    Ok(Output { text, code })
}

/// The worked example's two functions on `[-10, 10]` with step 0.01.
pub fn worked_example_functions() -> Result<(SampledFunction, SampledFunction), CliError> {
    let grid = Arc::new(Grid::cube(1, -10.0, 10.0, 0.01)?);
    let f = SampledFunction::from_real_fn(grid.clone(), |x| x[0].exp2())?;
    let g = SampledFunction::from_real_fn(grid, |x| -x[0].abs() + 2.0)?;
    Ok((f, g))
}

fn worked_example(gamma: Option<f64>, eta: f64) -> Result<Output, CliError> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(CliError::Input(format!("eta {eta} must be > 0")));
    }
    let gammas = match gamma {
        Some(g) if g.is_finite() && g > 0.0 => vec![g],
        Some(g) => return Err(CliError::Input(format!("gamma {g} must be > 0"))),
        None => vec![1.0, 5.0, 10.0],
    };
    let (f, g) = worked_example_functions()?;
    let alpha = 0.0;

    // Whole line: the samples stand for functions on all of R, so touching
    // points must be interior grid points.
    let certified = ip_no_witness_certificate_1d(&f, &g, alpha)?;
    let pair = SaddleProblem::new(vec!["f".into(), "g".into()], vec![f.clone(), g.clone()], Some(1.0))?;
    let dict = MinorantDictionary::lattice(vec![0.0, 0.5, 1.0, 2.0, 4.0], &[8.0], 0.25)?;
    let search = subgradient_ip_witness_search(&pair, alpha, Region::FullSpace, &dict)?;

    // Support pair with the intersection property on R at level 0: the
    // constant 0 below 2^x and -x^2 below -|x| + 2.
    let phi1 = QuadMinorant::constant(1, 0.0)?;
    let phi2 = QuadMinorant::new(1.0, Vector::scalar(0.0)?, 0.0)?;
    let support_ok = support_membership(&f, &phi1, DEFAULT_TOL)?.member
        && support_membership(&g, &phi2, DEFAULT_TOL)?.member
        && ip_decide_fullspace(&phi1, &phi2, alpha, 1)?.verdict == Verdict::Holds;

    let mut balls = Vec::new();
    let mut all_hold = true;
    let mut undecided = false;
    for &gm in &gammas {
        let t = ip_transfer_to_ball(&f, &g, &phi1, &phi2, alpha, gm, eta)?;
        let (phi_f, phi_g) = (&t.leg1.br.phi_bar, &t.leg2.br.phi_bar);
        let recheck = ip_decide_ball(phi_f, phi_g, t.level, gm, phimax::intersection::DEFAULT_BALL_MARGIN)?;
        let exact_f = subdiff_membership(&SubdiffQuery::new(&f, &t.leg1.br.y_bar, 0.0, DEFAULT_TOL)?, phi_f)?;
        let exact_g = subdiff_membership(&SubdiffQuery::new(&g, &t.leg2.br.y_bar, 0.0, DEFAULT_TOL)?, phi_g)?;
        let verified = recheck.verdict == Verdict::Holds && exact_f && exact_g;
        all_hold &= verified;
        undecided |= recheck.verdict == Verdict::Undecided;
        let witness = Json::obj()
            .with("x1", &t.leg1.br.y_bar)
            .with("phi1", phi_f)
            .with("x2", &t.leg2.br.y_bar)
            .with("phi2", phi_g);
        balls.push(
            Json::obj()
                .with("gamma", gm)
                .with("eta", eta)
                .with("epsilon", t.epsilon)
                .with("level", t.level)
                .with("ball_witness", witness)
                .with("verdict", recheck.verdict.as_str())
                .with("certificate", recheck.certificate.as_str())
                .with("verified", verified),
        );
    }
    let reproduced = certified && search.is_none() && support_ok && all_hold;
    let report = Json::obj()
        .with("command", "paper-example")
        .with("f", "exp2(x)")
        .with("g", "-abs(x) + 2")
        .with("box", Json::obj().with("low", -10.0).with("high", 10.0).with("step", 0.01))
        .with("alpha", alpha)
        .with("fullspace_witness", search.as_ref())
        .with(
            "fullspace",
            Json::obj()
                .with("touch", "interior")
                .with("certified_nonexistence", certified)
                .with("dictionary", dictionary_json(&dict)),
        )
        .with(
            "support_pair",
            Json::obj()
                .with("phi1", &phi1)
                .with("phi2", &phi2)
                .with("holds_on_space", support_ok),
        )
        .with("ball", balls)
        .with("reproduced", reproduced);
    let code = if !reproduced {
        if undecided {
            EXIT_UNDECIDED
        } else {
            EXIT_VIOLATION
        }
    } else {
        EXIT_OK
    };
    done(report, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let phi = parse_minorant("1,-2,3,0.5").unwrap();
        assert_eq!(phi.curvature(), 1.0);
        assert_eq!(phi.slope().as_slice(), &[-2.0, 3.0]);
        assert_eq!(phi.offset(), 0.5);
        assert!(parse_minorant("1,2").is_err());
        assert!(parse_minorant("-1,0,0").is_err());
        assert!(parse_minorant("1,x,0").is_err());
        assert_eq!(parse_vector("1, -2").unwrap().as_slice(), &[1.0, -2.0]);
    }

    #[test]
    fn parses_sweeps() {
        assert_eq!(parse_sweep("-4:-2:0.5").unwrap(), vec![-4.0, -3.5, -3.0, -2.5, -2.0]);
        assert_eq!(parse_sweep("0:0:1").unwrap(), vec![0.0]);
        assert_eq!(parse_sweep("0:1:0.3").unwrap().len(), 4);
        for bad in ["1:0:1", "0:1:0", "0:1", "a:b:c", "0:1e9:1e-3"] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
