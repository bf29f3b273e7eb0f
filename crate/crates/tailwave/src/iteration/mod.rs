//! Mechanized decay-exponent iteration.
//!
//! The engine represents pointwise bounds `<r>^-p_r <v>^-p_v <u>^-p_u`
//! symbolically (exact rationals with infinitesimal slack markers) and
//! alternates three rules — source assembly, cone conversion, interior
//! propagation — until the bound stops improving. For the Schwarzschild-class
//! operator the fixed point is `<v>^-1 <u>^-kappa` with
//! `kappa = min(delta, 1)`, reached in at most three passes. A deterministic
//! [`RuleTrace`] records every step, including the normalizations and the
//! worst-case merges across `mu = min(<r>, <u>)` regions.
//!
//! The engine is a bookkeeping machine for a fixed rule table, not a general
//! inequality prover: inputs outside the shapes the table covers are
//! rejected with [`IterationError::Rule`].

mod exponent;
mod rules;

pub use exponent::{DecayBound, Exponent, Rat, Region, Slack};
pub use rules::{
    eta_tilde, globalize, rule_cone_derivative, rule_conversion, rule_derivative, rule_interior,
    rule_source_assembly, DeltaBranch, MuBranch, SourceAssembly, SourceTriple,
};

pub use crate::coefficients::OperatorKind;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IterationError {
    /// The case-split exponent has no branch at `eta = 1`.
    #[error("ambiguous eta: the conversion table defines no branch at eta = 1")]
    AmbiguousEta,
    /// A rule precondition failed.
    #[error("rule error: {0}")]
    Rule(String),
    /// No fixed point within the pass budget.
    #[error("non-termination: no fixed point within {passes} passes")]
    NonTermination { passes: usize },
    #[error("invalid delta: {0}")]
    InvalidDelta(String),
}

/// One audited step: rule name, rendered inputs, rendered output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: String,
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
    pub out: String,
}

/// Deterministic audit trail of an iteration run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct RuleTrace {
    pub steps: Vec<TraceStep>,
}

impl RuleTrace {
    fn push(&mut self, rule: &str, inputs: Vec<String>, out: String) {
        self.steps.push(TraceStep {
            rule: rule.to_string(),
            inputs,
            out,
        });
    }

    /// Human-readable rendering, one step per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            s.push_str(&step.rule);
            if !step.inputs.is_empty() {
                s.push_str(": ");
                s.push_str(&step.inputs.join(" , "));
            }
            s.push_str(" => ");
            s.push_str(&step.out);
            s.push('\n');
        }
        s
    }

    /// Global bounds recorded at the end of each pass, in order.
    pub fn pass_results(&self) -> Vec<String> {
        self.steps
            .iter()
            .filter(|s| s.rule == "globalize")
            .map(|s| s.out.clone())
            .collect()
    }
}

/// Where the once-only time-derivative cone rule is attempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStepAt {
    Pass2,
    Pass3,
}

/// Result of a full iteration run.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    /// The fixed-point bound with slack markers resolved to their rational
    /// envelope.
    pub bound: DecayBound,
    pub trace: RuleTrace,
    /// Passes consumed including the confirming (non-improving) pass.
    pub passes: usize,
    pub kappa: Rat,
}

/// The energy-derived starting bound `<v>^-1 <u>^{1/2}`.
pub fn initial_pointwise_bound() -> DecayBound {
    DecayBound::global(
        Exponent::exact_int(0),
        Exponent::exact_int(1),
        Exponent::exact(-Rat::new(1, 2)),
    )
}

/// Run the iteration from the standard starting bound.
pub fn run_iteration(
    delta: Rat,
    kind: OperatorKind,
    max_passes: usize,
) -> Result<IterationOutcome, IterationError> {
    run_iteration_from(
        initial_pointwise_bound(),
        delta,
        kind,
        max_passes,
        ConeStepAt::Pass2,
    )
}

/// Run with an explicit starting bound and cone-rule placement.
pub fn run_iteration_from(
    initial: DecayBound,
    delta: Rat,
    kind: OperatorKind,
    max_passes: usize,
    cone_at: ConeStepAt,
) -> Result<IterationOutcome, IterationError> {
    if delta <= Rat::from_integer(0) {
        return Err(IterationError::InvalidDelta(format!(
            "delta = {delta} must be > 0"
        )));
    }
    if max_passes < 2 {
        return Err(IterationError::InvalidDelta(format!(
            "max_passes = {max_passes} must be >= 2"
        )));
    }
    let branch = DeltaBranch::for_delta(delta);
    let kappa = delta.min(Rat::from_integer(1));
    let mut trace = RuleTrace::default();
    trace.push(
        "initial-bound",
        vec![
            format!("delta={delta}"),
            format!("branch={}", branch.name()),
            format!("operator={kind:?}"),
        ],
        initial.to_string(),
    );

    let mut bound = initial;
    let mut cone_done = false;
    let mut fixed_at = None;

    for pass in 1..=max_passes {
        let asm = rule_source_assembly(&bound, delta, branch)?;
        trace.push(
            "source-assembly",
            vec![bound.to_string(), format!("kappa={}", asm.kappa)],
            asm.triples
                .iter()
                .map(|(mu, t)| format!("[{}] {}", mu.name(), t))
                .collect::<Vec<_>>()
                .join(" ; "),
        );

        let mut worst: Option<DecayBound> = None;
        for (mu, triple) in &asm.triples {
            let (converted, notes) = convert_with_perturbation(*triple, &mut trace)?;
            for note in notes {
                trace.push("conversion-note", vec![format!("[{}]", mu.name())], note);
            }
            trace.push(
                "conversion",
                vec![format!("[{}] {}", mu.name(), triple)],
                converted.to_string(),
            );
            worst = Some(match worst {
                None => converted,
                Some(w) => {
                    if converted.p_u < w.p_u {
                        converted
                    } else {
                        w
                    }
                }
            });
        }
        let exterior = worst.expect("assembly produced at least one triple");
        if asm.triples.len() > 1 {
            trace.push(
                "mu-merge",
                asm.triples
                    .iter()
                    .map(|(m, _)| m.name().to_string())
                    .collect(),
                exterior.to_string(),
            );
        }

        let interior = rule_interior(exterior)?;
        trace.push(
            "interior-propagation",
            vec![exterior.to_string()],
            interior.to_string(),
        );
        let mut global = globalize(exterior, interior);
        trace.push(
            "globalize",
            vec![exterior.to_string(), interior.to_string()],
            global.to_string(),
        );

        // Once-only near-cone time-derivative channel, attempted when the
        // bound has reached the iterated shape.
        let due = match cone_at {
            ConeStepAt::Pass2 => pass >= 2,
            ConeStepAt::Pass3 => pass >= 3,
        };
        if !cone_done && due {
            cone_done = true;
            cone_transition_step(kind, &bound, &mut global, &mut trace)?;
        }

        let improved =
            global.p_v > bound.p_v || (global.p_v == bound.p_v && global.p_u > bound.p_u);
        if !improved {
            trace.push(
                "fixed-point",
                vec![bound.to_string()],
                format!("confirmed at pass {pass}"),
            );
            fixed_at = Some(pass);
            break;
        }
        bound = global;
    }

    let passes = fixed_at.ok_or(IterationError::NonTermination { passes: max_passes })?;

    sustainment_check(kind, &bound, &mut trace)?;

    let final_bound = bound.envelope();
    trace.push(
        "envelope",
        vec![bound.to_string()],
        format!("{final_bound} (rational envelope of the eps-family)"),
    );

    Ok(IterationOutcome {
        bound: final_bound,
        trace,
        passes,
        kappa,
    })
}

/// Conversion with the documented boundary perturbation: an assembled
/// `eta = 1` is weakened to `1-` (`<u>^-1 <= <u>^-(1-eps)`) before retrying.
fn convert_with_perturbation(
    triple: SourceTriple,
    trace: &mut RuleTrace,
) -> Result<(DecayBound, Vec<String>), IterationError> {
    match rule_conversion(triple) {
        Err(IterationError::AmbiguousEta) => {
            let weakened =
                SourceTriple::new(triple.alpha, triple.beta, Exponent::minus(triple.eta.value));
            trace.push(
                "eta-perturbation",
                vec![triple.to_string()],
                format!("eta weakened to {}", weakened.eta),
            );
            rule_conversion(weakened)
        }
        other => other,
    }
}

/// The once-only cone channel. For the Schwarzschild class the first-order
/// divergence coefficients vanish identically, so the channel is vacuous;
/// for the general class the folded majorant `<r>^-(2+) <u>^-p` is fed to
/// the time-derivative rule where its validity window `alpha + eta > 3`
/// admits it, and otherwise deferred to the plain-conversion sustainment
/// channels.
fn cone_transition_step(
    kind: OperatorKind,
    phi: &DecayBound,
    global: &mut DecayBound,
    trace: &mut RuleTrace,
) -> Result<(), IterationError> {
    match kind {
        OperatorKind::P => {
            trace.push(
                "cone-derivative",
                vec![phi.to_string()],
                "vacuous: first-order divergence coefficients vanish for this operator class"
                    .into(),
            );
        }
        OperatorKind::PPrime => {
            let alpha = Exponent::plus(Rat::from_integer(2));
            let eta = phi.p_u;
            match rule_cone_derivative(alpha, eta) {
                Ok(out) => {
                    let folded = rule_interior(out)?;
                    trace.push(
                        "cone-derivative",
                        vec![format!("alpha={alpha}"), format!("eta={eta}")],
                        folded.to_string(),
                    );
                    if folded.p_u < global.p_u {
                        global.p_u = folded.p_u;
                        trace.push("cone-merge", vec![folded.to_string()], global.to_string());
                    }
                }
                Err(IterationError::Rule(why)) => {
                    trace.push(
                        "cone-derivative",
                        vec![format!("alpha={alpha}"), format!("eta={eta}")],
                        format!("not applicable ({why}); channel covered by plain conversion"),
                    );
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

/// Verify that the operator's linear coefficient channels map the fixed
/// point to at-least-as-good bounds, so the fixed point is self-consistent.
fn sustainment_check(
    kind: OperatorKind,
    fixed: &DecayBound,
    trace: &mut RuleTrace,
) -> Result<(), IterationError> {
    let p = fixed.p_u;
    let channels: Vec<(&str, SourceTriple)> = match kind {
        OperatorKind::P => vec![(
            "radial-potential channel <r>^-3 phi",
            SourceTriple::new(Exponent::exact_int(3), Exponent::exact_int(1), p),
        )],
        OperatorKind::PPrime => vec![
            (
                "zeroth-order channel <r>^-(2+) phi",
                SourceTriple::new(
                    Exponent::plus(Rat::from_integer(2)),
                    Exponent::exact_int(1),
                    p,
                ),
            ),
            (
                "first-order channel <r>^-(1+) dphi (off cone)",
                SourceTriple::new(
                    Exponent::plus(Rat::from_integer(2)),
                    Exponent::exact_int(1),
                    p,
                ),
            ),
        ],
    };
    for (name, triple) in channels {
        let (out, _) = convert_with_perturbation(triple, trace)?;
        let back = rule_interior(out)?;
        let ok = back.p_u.value >= fixed.p_u.value;
        trace.push(
            "sustainment",
            vec![name.to_string(), triple.to_string()],
            format!(
                "{back} ({})",
                if ok {
                    "sustains fixed point"
                } else {
                    "CAPS FIXED POINT"
                }
            ),
        );
        if !ok {
            return Err(IterationError::Rule(format!(
                "channel '{name}' caps the fixed point: {back} below {fixed}"
            )));
        }
    }
    Ok(())
}
