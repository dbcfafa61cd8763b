//! Subcommand adapters producing [`Report`]s.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::format::ArrangementFile;
use super::report::{ExitStatus, Hypotheses, Measured, Report, SCHEMA_ID};
use crate::archzeta2::{
    residue_fit, residue_nd, verify_section4, LineConfig, Precision, QuadratureConfig, ResidueReport, SignVerdict,
};
use crate::arrangement::{Arrangement, EdgePoset};
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, int, to_f64, Rational};
use crate::resolution::{self, GoodTupleVerdict, ResolutionChoice};
use crate::topzeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lattice,
    Dense,
    Resolution,
    Lct,
    Candidates,
    GoodTuple,
    Topzeta,
    Residue,
    VerifySection4,
    VerifyNd,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lattice => "lattice",
            Self::Dense => "dense",
            Self::Resolution => "resolution",
            Self::Lct => "lct",
            Self::Candidates => "candidates",
            Self::GoodTuple => "good-tuple",
            Self::Topzeta => "topzeta",
            Self::Residue => "residue",
            Self::VerifySection4 => "verify-section4",
            Self::VerifyNd => "verify-nd",
        }
    }

    fn numeric(self) -> bool {
        matches!(self, Self::Residue | Self::VerifySection4 | Self::VerifyNd)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Combinatorial,
    Numeric2d,
    #[default]
    Both,
}

#[derive(Clone, Debug)]
pub struct Options {
    /// Multiplicities in file order; `None` uses the file's.
    pub b: Option<Vec<u64>>,
    pub resolution: ResolutionChoice,
    pub mode: Mode,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    pub samples: usize,
    /// Largest `beta` in archimedean candidate lists.
    pub beta_max: u32,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            b: None,
            resolution: ResolutionChoice::Edges,
            mode: Mode::Both,
            quadrature: QuadratureConfig::default(),
            seed: 0,
            samples: 10,
            beta_max: 4,
        }
    }
}

impl Options {
    pub fn with_precision_from_env(mut self) -> Result<Self> {
        self.quadrature.precision = Precision::from_env()?;
        Ok(self)
    }
}

/// Result of one command: the results block, verdict and status.
struct Outcome {
    results: Value,
    verdict: Option<String>,
    status: ExitStatus,
    assumptions: Vec<String>,
    warnings: Vec<String>,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Self { results, verdict: None, status: ExitStatus::Success, assumptions: Vec::new(), warnings: Vec::new() }
    }
}

/// Runs `command` and wraps the outcome in a report. Errors that are not hypothesis failures
/// are returned as `Err`.
pub fn run(command: Command, file: &ArrangementFile, opts: &Options) -> Result<Report> {
    let start = Instant::now();
    let a = &file.arrangement;
    let b = multiplicities(a, opts)?;
    let hypotheses = Hypotheses::of(a);
    let outcome = match dispatch(command, a, &b, opts) {
        Ok(o) => o,
        Err(Error::Hypothesis(msg)) => Outcome {
            results: json!({ "hypotheses_not_met": msg }),
            verdict: Some(format!("hypotheses not met: {msg}")),
            status: ExitStatus::HypothesesNotMet,
            assumptions: Vec::new(),
            warnings: Vec::new(),
        },
        Err(e) => return Err(e),
    };
    let mut warnings = file.warnings.clone();
    warnings.extend(outcome.warnings);
    Ok(Report {
        schema: SCHEMA_ID,
        command: command.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION"),
        inputs: inputs_echo(file, &b, opts, command),
        hypotheses,
        resolution: opts.resolution,
        quadrature: command.numeric().then(|| opts.quadrature.clone()),
        assumptions: outcome.assumptions,
        results: outcome.results,
        verdict: outcome.verdict,
        status: outcome.status,
        exit_code: outcome.status.code(),
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
        warnings,
    })
}

fn multiplicities(a: &Arrangement, opts: &Options) -> Result<Vec<u64>> {
    match &opts.b {
        Some(b) => {
            if b.len() != a.len() {
                return Err(Error::InvalidInput(format!(
                    "--b has {} entries but the arrangement has {} hyperplanes",
                    b.len(),
                    a.len()
                )));
            }
            if b.contains(&0) {
                return Err(Error::InvalidInput("multiplicities must be positive".into()));
            }
            Ok(b.clone())
        }
        None => Ok(a.multiplicities().iter().map(|&m| m as u64).collect()),
    }
}

fn inputs_echo(file: &ArrangementFile, b: &[u64], opts: &Options, command: Command) -> Value {
    let a = &file.arrangement;
    let hyperplanes: Vec<Value> = a
        .forms()
        .iter()
        .zip(a.multiplicities())
        .zip(&file.labels)
        .map(|((f, m), label)| {
            json!({
                "coefficients": f.iter().map(fmt_rational).collect::<Vec<_>>(),
                "multiplicity": m,
                "label": label,
            })
        })
        .collect();
    let mut echo = json!({
        "dimension": a.dim(),
        "hyperplanes": hyperplanes,
        "b": b,
    });
    match command {
        Command::VerifyNd => echo["mode"] = json!(opts.mode),
        Command::VerifySection4 => {
            echo["samples"] = json!(opts.samples);
            echo["seed"] = json!(opts.seed);
        }
        Command::Candidates => echo["beta_max"] = json!(opts.beta_max),
        _ => {}
    }
    echo
}

fn dispatch(command: Command, a: &Arrangement, b: &[u64], opts: &Options) -> Result<Outcome> {
    match command {
        Command::Lattice => Ok(lattice(a)),
        Command::Dense => Ok(dense(a)),
        Command::Resolution => Ok(resolution_cmd(a, opts.resolution)),
        Command::Lct => lct_cmd(a, b, opts.resolution),
        Command::Candidates => candidates(a, b, opts),
        Command::GoodTuple => good_tuple(a, b, opts.resolution),
        Command::Topzeta => topzeta_cmd(a, b),
        Command::Residue => residue_cmd(a, b, &opts.quadrature),
        Command::VerifySection4 => section4(a, b, opts),
        Command::VerifyNd => verify_nd(a, b, opts),
    }
}

fn lattice(a: &Arrangement) -> Outcome {
    let poset = EdgePoset::build(a);
    let mobius = poset.mobius();
    let edges: Vec<Value> = poset
        .edges()
        .iter()
        .zip(&mobius)
        .map(|(e, mu)| json!({ "hyperplanes": e.hyperplanes, "codim": e.codim, "mobius": mu }))
        .collect();
    Outcome::ok(json!({ "edge_count": edges.len(), "edges": edges, "rank": a.rank() }))
}

fn dense(a: &Arrangement) -> Outcome {
    let poset = EdgePoset::build(a);
    let edges: Vec<Value> = a
        .dense_edges(&poset)
        .iter()
        .map(|e| json!({ "hyperplanes": e.hyperplanes, "codim": e.codim }))
        .collect();
    Outcome::ok(json!({ "dense_count": edges.len(), "dense_edges": edges }))
}

fn resolution_cmd(a: &Arrangement, choice: ResolutionChoice) -> Outcome {
    let data: Vec<Value> = resolution::resolution_data(a, choice)
        .iter()
        .map(|d| json!({ "hyperplanes": d.edge.hyperplanes, "nu": d.nu, "n": d.n_indicator }))
        .collect();
    Outcome::ok(json!({ "divisor_count": data.len(), "divisors": data }))
}

fn lct_cmd(a: &Arrangement, b: &[u64], choice: ResolutionChoice) -> Result<Outcome> {
    let value = resolution::lct_with(a, b, choice)?;
    let d: u64 = b.iter().sum();
    let nd = int(a.dim() as i64) / int(d as i64);
    Ok(Outcome::ok(json!({
        "lct": fmt_rational(&value),
        "lct_float": Measured::new(to_f64(&value), 0.0),
        "n_over_d": fmt_rational(&nd),
        "equals_n_over_d": value == nd,
    })))
}

fn candidates(a: &Arrangement, b: &[u64], opts: &Options) -> Result<Outcome> {
    let s_min = -int(a.dim() as i64) - Rational::one();
    let arch = resolution::candidate_poles_archimedean(a, b, opts.beta_max, &s_min, opts.resolution)?;
    let motivic = resolution::candidate_poles_motivic(a, b)?;
    let mut out = Outcome::ok(json!({ "archimedean": arch, "motivic": motivic, "s_min": fmt_rational(&s_min) }));
    if let Some(note) = resolution::pole_order_assumption(a) {
        out.assumptions.push(note.to_string());
    }
    Ok(out)
}

fn good_tuple(a: &Arrangement, b: &[u64], choice: ResolutionChoice) -> Result<Outcome> {
    let cert = resolution::find_good_tuple(a, None, choice)?;
    let lct = resolution::lct_with(a, &cert.tuple, choice)?;
    let d: u64 = cert.tuple.iter().sum();
    let given = origin_verdict(a, b, choice)?;
    Ok(Outcome::ok(json!({
        "certificate": cert,
        "lct_of_certificate": fmt_rational(&lct),
        "n_over_d": fmt_rational(&(int(a.dim() as i64) / int(d as i64))),
        "given_b_is_good": given.is_good(),
        "given_b": given,
    })))
}

fn origin_verdict(a: &Arrangement, b: &[u64], choice: ResolutionChoice) -> Result<GoodTupleVerdict> {
    let poset = EdgePoset::build(a);
    let origin = poset
        .origin()
        .ok_or_else(|| Error::Hypothesis("essential=false".into()))?
        .clone();
    resolution::is_good_tuple(a, b, &origin, choice)
}

fn topzeta_cmd(a: &Arrangement, b: &[u64]) -> Result<Outcome> {
    let z = topzeta::topzeta_local_dim2(a, b)?;
    let poles: Vec<Value> = z
        .value
        .poles()?
        .iter()
        .map(|p| {
            json!({
                "value": fmt_rational(&p.value),
                "order": p.order,
                "residue": p.residue.as_ref().map(fmt_rational),
            })
        })
        .collect();
    let nd = topzeta::nd_pole_status(b)?;
    let mut out = Outcome::ok(json!({
        "function": z.value.to_factored_string(),
        "poles": poles,
        "value_at_zero": fmt_rational(&topzeta::value_at_zero(&z)),
        "strata": z.strata,
        "n_over_d_pole": nd,
    }));
    if z.outside_hypotheses {
        out.warnings.push("fewer than three lines: the n/d statements do not apply".into());
    }
    Ok(out)
}

/// A planar arrangement rewritten as `x + a_l y` with the heaviest line first.
#[derive(Clone, Debug, Serialize)]
pub struct PlaneModel {
    /// File indices in model order.
    pub order: Vec<usize>,
    #[serde(serialize_with = "ser_rationals")]
    pub slopes: Vec<Rational>,
    pub b: Vec<u64>,
    /// New coordinates `X`, `Y` as linear forms in the file coordinates.
    #[serde(serialize_with = "ser_rationals")]
    pub x_form: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub y_form: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

impl PlaneModel {
    pub fn line_config(&self) -> Result<LineConfig> {
        let slopes: Vec<f64> = self.slopes.iter().map(to_f64).collect();
        LineConfig::for_multiplicities(&slopes, &self.b)
    }
}

pub fn plane_model(a: &Arrangement, b: &[u64]) -> Result<PlaneModel> {
    if a.dim() != 2 {
        return Err(Error::InvalidInput(format!("planar analysis needs n = 2, got n = {}", a.dim())));
    }
    let heavy = (0..b.len()).fold(0, |best, i| if b[i] > b[best] { i } else { best });
    let mut order = vec![heavy];
    order.extend((0..b.len()).filter(|&i| i != heavy));
    let forms = a.forms();
    let l0 = &forms[heavy];
    let det = |f: &[Rational], g: &[Rational]| &f[0] * &g[1] - &f[1] * &g[0];
    let y_form = (0i64..)
        .map(|k| if k == 0 { vec![int(0), int(1)] } else { vec![int(1), int(k - 1)] })
        .find(|m| forms.iter().all(|f| !det(f, m).is_zero()))
        .expect("finitely many lines");
    // f = alpha L0 + beta M, slope beta/alpha
    let dm = det(l0, &y_form);
    let slopes: Vec<Rational> = order
        .iter()
        .map(|&i| {
            let f = &forms[i];
            let alpha = det(f, &y_form) / &dm;
            let beta = det(l0, f) / &dm;
            beta / alpha
        })
        .collect();
    Ok(PlaneModel {
        b: order.iter().map(|&i| b[i]).collect(),
        order,
        slopes,
        x_form: l0.clone(),
        y_form,
    })
}

fn measured_residue(r: &ResidueReport) -> Value {
    json!({
        "residue": Measured::new(r.residue, r.error_estimate),
        "c_value": r.c_value.map(|c| Measured::new(c, r.error_estimate / r.residue.abs().max(f64::MIN_POSITIVE) * c.abs())),
        "order_bound": r.order_bound,
        "sign_verdict": r.sign_verdict,
        "delta_trace": r.delta_trace,
        "fit": r.fit,
    })
}

struct PlaneResidue {
    method: &'static str,
    verdict: SignVerdict,
    details: Value,
}

fn plane_residue(model: &PlaneModel, q: &QuadratureConfig) -> Result<PlaneResidue> {
    let b = &model.b;
    let d: u64 = b.iter().sum();
    if b.len() < 3 {
        return Err(Error::Hypothesis("indecomposable=false (fewer than three lines)".into()));
    }
    let nd = topzeta::nd_pole_status(b)?;
    if 2 * b[0] == d {
        return Ok(PlaneResidue {
            method: "order-two",
            verdict: SignVerdict::OrderTwo,
            details: json!({
                "reason": "b1 = d/2: -2/d is the log canonical threshold pole and may have order two",
                "topological_order": nd.order,
            }),
        });
    }
    let cfg = model.line_config()?;
    let (method, rep) = if 2 * b[0] > d {
        ("regularized-constant", residue_nd(&cfg, b, q)?)
    } else {
        ("fit", residue_fit(&cfg, b, q)?)
    };
    let mut details = measured_residue(&rep);
    details["topological_pole_survives"] = json!(nd.survives);
    Ok(PlaneResidue { method, verdict: rep.sign_verdict, details })
}

fn residue_cmd(a: &Arrangement, b: &[u64], q: &QuadratureConfig) -> Result<Outcome> {
    let model = plane_model(a, b)?;
    let res = plane_residue(&model, q)?;
    let status = if res.verdict == SignVerdict::Inconclusive {
        ExitStatus::Inconclusive
    } else {
        ExitStatus::Success
    };
    let mut out = Outcome::ok(json!({
        "model": model,
        "method": res.method,
        "sign_verdict": res.verdict,
        "analysis": res.details,
    }));
    out.status = status;
    out.warnings.push("cut-off functions are taken in the normalized coordinates of `model`".into());
    Ok(out)
}

fn section4(a: &Arrangement, b: &[u64], opts: &Options) -> Result<Outcome> {
    let model = plane_model(a, b)?;
    let b1 = *b.iter().max().expect("nonempty");
    let d: u64 = b.iter().sum();
    let cfg = LineConfig::new(
        model.slopes.iter().map(|q| Complex64::new(to_f64(q), 0.0)).collect(),
        b1,
        d,
    )?;
    let rep = verify_section4(&cfg, b1, d, opts.samples, &opts.quadrature, opts.seed)?;
    let vertices: Vec<Value> = rep
        .vertices
        .iter()
        .map(|v| json!({ "b_prime": v.b_prime, "c": Measured::new(v.c_value, v.c_error), "vanishes": v.vanishes }))
        .collect();
    let interior: Vec<Value> = rep
        .interior
        .iter()
        .map(|p| {
            json!({
                "b_prime": p.b_prime,
                "c": Measured::new(p.c_value, p.c_error),
                "negative": p.negative,
                "residue": Measured::new(p.residue, p.residue_error),
                "hessian": json!({ "value": p.hessian, "error": p.hessian_error }),
                "hessian_min_eigenvalue": Measured::new(p.hessian_min_eigenvalue, p.hessian_error),
                "positive_definite": p.positive_definite,
            })
        })
        .collect();
    let mut out = Outcome::ok(json!({
        "model": model,
        "b1": b1,
        "d": d,
        "vertices": vertices,
        "interior": interior,
        "all_pass": rep.all_pass,
    }));
    out.verdict = Some(if rep.all_pass { "all checks pass" } else { "some checks fail" }.into());
    if !rep.all_pass {
        out.status = ExitStatus::Inconclusive;
    }
    Ok(out)
}

fn verify_nd(a: &Arrangement, b: &[u64], opts: &Options) -> Result<Outcome> {
    let hyp = Hypotheses::of(a);
    if !hyp.all() {
        return Err(Error::Hypothesis(hyp.failing().join(", ")));
    }
    if opts.mode == Mode::Numeric2d && a.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "numeric2d mode needs n = 2, got n = {}",
            a.dim()
        )));
    }
    let n = a.dim();
    let d: u64 = b.iter().sum();
    let s0 = -int(n as i64) / int(d as i64);
    let mut results = json!({ "candidate": fmt_rational(&s0) });
    let mut warnings = Vec::new();
    let mut assumptions = Vec::new();
    let mut holds = false;
    let mut inconclusive = false;
    let mut reasons = Vec::new();

    if matches!(opts.mode, Mode::Combinatorial | Mode::Both) {
        let verdict = origin_verdict(a, b, opts.resolution)?;
        let lct = resolution::lct_with(a, b, opts.resolution)?;
        let good = verdict.is_good();
        let lct_is_nd = lct == -s0.clone();
        if good && lct_is_nd {
            holds = true;
            reasons.push("n/d-conjecture holds for this b via the good-dense-edge case".to_string());
        }
        results["combinatorial"] = json!({
            "good_tuple": good,
            "verdict": verdict,
            "lct": fmt_rational(&lct),
            "lct_equals_n_over_d": lct_is_nd,
        });
    }

    if matches!(opts.mode, Mode::Numeric2d | Mode::Both) {
        if n == 2 {
            let model = plane_model(a, b)?;
            let res = plane_residue(&model, &opts.quadrature)?;
            let pole = match res.verdict {
                SignVerdict::OrderTwo => Some("pole of order 2"),
                SignVerdict::Positive => Some("simple pole with residue > 0"),
                SignVerdict::Negative => Some("simple pole with residue < 0"),
                SignVerdict::Inconclusive => None,
            };
            match pole {
                Some(p) => {
                    holds = true;
                    reasons.push(format!("{p}: -2/d in [-1, 0) is a pole, hence a root of the b-function"));
                }
                None => inconclusive = true,
            }
            results["numeric2d"] = json!({
                "model": model,
                "method": res.method,
                "sign_verdict": res.verdict,
                "pole": pole,
                "analysis": res.details,
            });
            warnings.push("cut-off functions are taken in the normalized coordinates of `numeric2d.model`".into());
        } else {
            warnings.push(format!("numeric2d skipped: n = {n}"));
        }
    }
    if n >= 3 {
        if let Some(note) = resolution::pole_order_assumption(a) {
            assumptions.push(note.to_string());
        }
    }
    let (verdict, status) = if holds {
        (format!("holds: {}", reasons.join("; ")), ExitStatus::Success)
    } else if inconclusive {
        ("inconclusive".to_string(), ExitStatus::Inconclusive)
    } else {
        ("not decided by the available criteria".to_string(), ExitStatus::Inconclusive)
    };
    results["holds"] = json!(holds);
    Ok(Outcome { results, verdict: Some(verdict), status, assumptions, warnings })
}
