//! The individual rewrite rules of the decay-exponent engine.
//!
//! Every rule maps symbolic bounds to symbolic bounds in exact rational
//! arithmetic. Preconditions resolve slack markers to strict inequalities;
//! normalizations that weaken a bound to enter a rule's window are recorded
//! in the returned notes so traces replay the full reasoning.

use super::exponent::{DecayBound, Exponent, Rat, Region, Slack};
use super::IterationError;
use std::fmt;

/// Source majorant exponents `<r>^-alpha <v>^-beta <u>^-eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceTriple {
    pub alpha: Exponent,
    pub beta: Exponent,
    pub eta: Exponent,
}

impl SourceTriple {
    pub fn new(alpha: Exponent, beta: Exponent, eta: Exponent) -> Self {
        Self { alpha, beta, eta }
    }
}

impl fmt::Display for SourceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha={}, beta={}, eta={})",
            self.alpha, self.beta, self.eta
        )
    }
}

/// Which side of the `mu = min(<r>, <u>)` split a regional bound lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuBranch {
    /// `r <= u`: the derivative gain lands on `p_r`.
    RleqU,
    /// `u <= r`: the derivative gain lands on `p_u`.
    UleqR,
}

impl MuBranch {
    pub fn name(self) -> &'static str {
        match self {
            MuBranch::RleqU => "r<=u",
            MuBranch::UleqR => "u<=r",
        }
    }
}

/// Case-split exponent with slack-aware branch selection: `eta - 2` below 1,
/// `-1` above 1. Exactly 1 belongs to neither branch; upstream slack (an
/// `eps`-perturbed input) selects a side.
pub fn eta_tilde(eta: Exponent) -> Result<Exponent, IterationError> {
    let one = Rat::from_integer(1);
    if eta.gt(one) {
        Ok(Exponent::exact_int(-1))
    } else if eta.lt(one) {
        Ok(eta - Exponent::exact_int(2))
    } else {
        Err(IterationError::AmbiguousEta)
    }
}

/// Conversion rule: a source bounded by `<r>^-alpha <v>^-beta <u>^-eta`
/// yields a solution bound `<r>^-1 <u>^-(alpha+beta+eta~-1)` in `{u > 1}`.
///
/// Normalizations applied before the exponent-table window `2 < alpha < 3`,
/// `beta >= 0`, `eta >= -1/2`:
///
/// * `eta` below `-1/2`: u-growth traded into `v`-decay (`<u> <= <v>`);
/// * `alpha` at or below 2: `v`-decay traded into `r`-decay (`<r> <= <v>`
///   holds on the cone, the trade is valid in `r <= t`);
/// * `alpha` at or above 3: surplus `r`-decay discarded (a trade into
///   `beta` would need `<v> <~ <r>`, which fails off the cone).
pub fn rule_conversion(src: SourceTriple) -> Result<(DecayBound, Vec<String>), IterationError> {
    let mut alpha = src.alpha;
    let mut beta = src.beta;
    let mut eta = src.eta;
    let mut notes = Vec::new();

    let half = Rat::new(1, 2);
    let two = Rat::from_integer(2);
    let three = Rat::from_integer(3);

    // u-growth beyond <u>^{1/2}: move into beta using <u> <= <v>.
    if eta.lt(-half) {
        let moved = eta + Exponent::exact(half);
        beta = beta + moved;
        eta = Exponent::exact(-half);
        notes.push(format!(
            "u->v exchange (<u> <= <v>): beta {} eta {}",
            beta, eta
        ));
        if beta.lt(Rat::from_integer(0)) {
            return Err(IterationError::Rule(format!(
                "source grows too fast: beta = {beta} after u->v exchange"
            )));
        }
    }

    // alpha at or below the table window: borrow decay from beta,
    // valid in r <= t where <r> <~ <v>.
    if !alpha.gt(two) {
        let borrowed = Exponent::exact(two - alpha.value);
        let beta_slack = if alpha.slack == Slack::Plus {
            // alpha's own surplus covers the borrowed infinitesimal.
            beta.slack
        } else {
            beta.slack.combine(Slack::Minus)
        };
        beta = Exponent {
            value: (beta - borrowed).value,
            slack: beta_slack,
        };
        alpha = Exponent::plus(two);
        notes.push(format!(
            "r<-v exchange (valid in r <= t): alpha {} beta {}",
            alpha, beta
        ));
        if beta.lt(Rat::from_integer(0)) {
            return Err(IterationError::Rule(format!(
                "insufficient v-decay to reach the alpha window: beta = {beta}"
            )));
        }
    }

    // alpha at or above 3: weaken to just inside the window.
    if !alpha.lt(three) {
        alpha = Exponent::minus(three);
        notes.push(format!("surplus r-decay discarded: alpha {}", alpha));
    }

    if !(alpha.gt(two) && alpha.lt(three)) {
        return Err(IterationError::Rule(format!(
            "alpha = {alpha} outside (2, 3)"
        )));
    }
    if beta.lt(Rat::from_integer(0)) {
        return Err(IterationError::Rule(format!("beta = {beta} negative")));
    }
    if eta.lt(-half) {
        return Err(IterationError::Rule(format!("eta = {eta} below -1/2")));
    }

    let et = eta_tilde(eta)?;
    let p_u = alpha + beta + et - Exponent::exact_int(1);
    Ok((
        DecayBound::global(Exponent::exact_int(1), Exponent::exact_int(0), p_u),
        notes,
    ))
}

/// Interior propagation: a bound `<r>^-1 F(u)` valid everywhere upgrades to
/// `<t>^-1 F(u)` on `r <= 3t/4`, i.e. one unit moves from `p_r` to `p_v`.
pub fn rule_interior(b: DecayBound) -> Result<DecayBound, IterationError> {
    if b.p_r.lt(Rat::from_integer(1)) {
        return Err(IterationError::Rule(format!(
            "interior propagation needs p_r >= 1, got {}",
            b.p_r
        )));
    }
    Ok(DecayBound {
        p_r: b.p_r - Exponent::exact_int(1),
        p_v: b.p_v + Exponent::exact_int(1),
        p_u: b.p_u,
        region: Region::Interior,
    })
}

/// Merge an interior bound with the exterior reading of the conversion
/// output (`<r> ~ <v>` on `r >= t/2`) into a single global bound.
pub fn globalize(exterior: DecayBound, interior: DecayBound) -> DecayBound {
    DecayBound::global(
        Exponent::exact_int(0),
        interior.p_v.min(exterior.p_r + exterior.p_v),
        interior.p_u.min(exterior.p_u),
    )
}

/// Derivative gain: one factor of `mu^-1 = min(<r>, <u>)^-1`, returned as
/// the two regional variants; downstream rules take the worst case.
pub fn rule_derivative(b: &DecayBound) -> [(MuBranch, DecayBound); 2] {
    [
        (
            MuBranch::RleqU,
            DecayBound {
                p_r: b.p_r + Exponent::exact_int(1),
                ..*b
            },
        ),
        (
            MuBranch::UleqR,
            DecayBound {
                p_u: b.p_u + Exponent::exact_int(1),
                ..*b
            },
        ),
    ]
}

/// Which of the two proof branches the engine follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaBranch {
    /// `delta < 1`: the near-cone damping of the slow coefficient slot binds.
    Small,
    /// `delta >= 1`: the tangential-derivative gain caps the damping at one
    /// power of `<u>/<t>`.
    Large,
}

impl DeltaBranch {
    pub fn for_delta(delta: Rat) -> DeltaBranch {
        if delta < Rat::from_integer(1) {
            DeltaBranch::Small
        } else {
            DeltaBranch::Large
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DeltaBranch::Small => "delta<1",
            DeltaBranch::Large => "delta>=1",
        }
    }
}

/// Assembled source majorants for the quasilinear term `H phi d^2 phi`,
/// one triple per `mu`-branch.
#[derive(Debug, Clone)]
pub struct SourceAssembly {
    pub triples: Vec<(MuBranch, SourceTriple)>,
    pub kappa: Rat,
}

/// Assemble the source exponents from the current global bound on the
/// solution. Two input shapes arise in the iteration:
///
/// * the initial energy-derived bound `<v>^-1 <u>^{1/2}` — product chain
///   `(<u>/<t>)^kappa (<u>^{1/2}/<t>)^2 (<t>/(<r><u>))^2`, a single triple
///   `(2, kappa, 1 - kappa)`;
/// * an iterated bound `<v>^-1 <u>^-p` with `p >= 0` — chain
///   `(<u>/<v>)^kappa <v>^-2 <u>^-2p mu^-2`, split over the two `mu`
///   branches.
///
/// The near-cone factor enters once, capped at power `kappa = min(delta, 1)`;
/// for `delta >= 1` the cap makes the output identical to `delta = 1`.
pub fn rule_source_assembly(
    phi: &DecayBound,
    delta: Rat,
    branch: DeltaBranch,
) -> Result<SourceAssembly, IterationError> {
    if phi.region != Region::Global {
        return Err(IterationError::Rule(format!(
            "source assembly needs a global bound, got {}",
            phi
        )));
    }
    if branch != DeltaBranch::for_delta(delta) {
        return Err(IterationError::Rule(format!(
            "branch {} inconsistent with delta = {delta}",
            branch.name()
        )));
    }
    let one = Rat::from_integer(1);
    let kappa = delta.min(one);
    let k = Exponent::exact(kappa);
    let two = Exponent::exact_int(2);

    let initial_shape = phi.p_r == Exponent::exact_int(0)
        && phi.p_v == Exponent::exact_int(1)
        && phi.p_u == Exponent::exact(-Rat::new(1, 2));

    if initial_shape {
        // (2, kappa, 1 - kappa), all exact.
        let triple = SourceTriple::new(Exponent::exact_int(2), k, Exponent::exact_int(1) - k);
        return Ok(SourceAssembly {
            triples: vec![(MuBranch::UleqR, triple)],
            kappa,
        });
    }

    let iterated_shape = phi.p_r == Exponent::exact_int(0)
        && phi.p_v == Exponent::exact_int(1)
        && phi.p_u.value >= Rat::from_integer(0);
    if !iterated_shape {
        return Err(IterationError::Rule(format!(
            "unsupported solution-bound shape {}",
            phi
        )));
    }

    let p2 = phi.p_u.double();
    // u <= r: mu = <u>; all v-decay, to be exchanged into the alpha window.
    let u_branch = SourceTriple::new(Exponent::exact_int(0), two + k, two + p2 - k);
    // r <= u: mu = <r>.
    let r_branch = SourceTriple::new(two, two + k, p2 - k);
    Ok(SourceAssembly {
        triples: vec![(MuBranch::UleqR, u_branch), (MuBranch::RleqU, r_branch)],
        kappa,
    })
}

/// Time-derivative source variant (near-cone channel): for `box psi = d_t G`
/// with cone-supported `G` majorized by `<r>^-alpha <u>^-eta`, the solution
/// gains one full power over the plain conversion:
/// `<r>^-1 <u>^-(alpha + eta~)`, valid for `alpha + eta > 3`.
pub fn rule_cone_derivative(alpha: Exponent, eta: Exponent) -> Result<DecayBound, IterationError> {
    let two = Rat::from_integer(2);
    let three = Rat::from_integer(3);
    if !(alpha.gt(two) && alpha.lt(three)) {
        return Err(IterationError::Rule(format!(
            "cone-derivative rule needs 2 < alpha < 3, got {alpha}"
        )));
    }
    if !(alpha + eta).gt(three) {
        return Err(IterationError::Rule(format!(
            "cone-derivative rule needs alpha + eta > 3, got {}",
            alpha + eta
        )));
    }
    let p_u = alpha + eta_tilde(eta)?;
    Ok(DecayBound::global(
        Exponent::exact_int(1),
        Exponent::exact_int(0),
        p_u,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn eta_tilde_branches_with_slack() {
        assert_eq!(
            eta_tilde(Exponent::exact_int(2)).unwrap(),
            Exponent::exact_int(-1)
        );
        assert_eq!(
            eta_tilde(Exponent::exact(rat(1, 2))).unwrap(),
            Exponent::exact(rat(-3, 2))
        );
        assert!(matches!(
            eta_tilde(Exponent::exact_int(1)),
            Err(IterationError::AmbiguousEta)
        ));
        // Upstream slack selects a side at the boundary.
        assert_eq!(
            eta_tilde(Exponent::plus(rat(1, 1))).unwrap(),
            Exponent::exact_int(-1)
        );
        let below = eta_tilde(Exponent::minus(rat(1, 1))).unwrap();
        assert_eq!(below.value, rat(-1, 1));
        assert_eq!(below.slack, Slack::Minus);
    }

    #[test]
    fn conversion_first_pass_example() {
        // (2+, delta-, 1-delta) at delta = 1/2 -> (1, 0, 0-).
        let src = SourceTriple::new(
            Exponent::plus(rat(2, 1)),
            Exponent::minus(rat(1, 2)),
            Exponent::exact(rat(1, 2)),
        );
        let (out, _) = rule_conversion(src).unwrap();
        assert_eq!(out.p_r, Exponent::exact_int(1));
        assert_eq!(out.p_v, Exponent::exact_int(0));
        assert_eq!(out.p_u.value, rat(0, 1));
        assert_eq!(out.p_u.slack, Slack::Minus);
        assert_eq!(out.region, Region::Global);
    }

    #[test]
    fn conversion_second_pass_example_with_exchange() {
        // (2, delta, 2-delta) at delta = 1/2: the engine shifts alpha to 2+
        // and lands at p_u = delta- = 1/2-.
        let src = SourceTriple::new(
            Exponent::exact_int(2),
            Exponent::exact(rat(1, 2)),
            Exponent::exact(rat(3, 2)),
        );
        let (out, notes) = rule_conversion(src).unwrap();
        assert_eq!(out.p_u.value, rat(1, 2));
        assert_eq!(out.p_u.slack, Slack::Minus);
        assert!(notes.iter().any(|n| n.contains("r<-v exchange")));
    }

    #[test]
    fn conversion_rejects_exact_eta_one() {
        let src = SourceTriple::new(
            Exponent::plus(rat(2, 1)),
            Exponent::exact_int(0),
            Exponent::exact_int(1),
        );
        assert!(matches!(
            rule_conversion(src),
            Err(IterationError::AmbiguousEta)
        ));
    }

    #[test]
    fn conversion_floors_eta_and_discards_alpha_surplus() {
        // eta below -1/2 is traded into beta.
        let src = SourceTriple::new(
            Exponent::exact_int(2),
            Exponent::exact(rat(5, 2)),
            Exponent::exact(rat(-3, 2)),
        );
        let (out, notes) = rule_conversion(src).unwrap();
        assert!(notes.iter().any(|n| n.contains("u->v exchange")));
        // beta 5/2 - 1 = 3/2, eta -1/2, alpha 2+: p_u = 2 + 3/2 - 5/2 - 1 = 0.
        assert_eq!(out.p_u.value, rat(0, 1));

        // alpha = 3 weakens into the window.
        let src = SourceTriple::new(
            Exponent::exact_int(3),
            Exponent::exact_int(1),
            Exponent::exact(rat(1, 2)),
        );
        let (out, notes) = rule_conversion(src).unwrap();
        assert!(notes.iter().any(|n| n.contains("discarded")));
        // p_u = 3- + 1 + (1/2 - 2) - 1 = 3/2-.
        assert_eq!(out.p_u.value, rat(3, 2));
        assert_eq!(out.p_u.slack, Slack::Minus);
    }

    #[test]
    fn interior_rule_examples() {
        let b = DecayBound::global(
            Exponent::exact_int(1),
            Exponent::exact_int(0),
            Exponent::exact_int(0),
        );
        let out = rule_interior(b).unwrap();
        assert_eq!(out.p_r, Exponent::exact_int(0));
        assert_eq!(out.p_v, Exponent::exact_int(1));
        assert_eq!(out.region, Region::Interior);

        let b = DecayBound::global(
            Exponent::exact_int(1),
            Exponent::exact_int(0),
            Exponent::exact(rat(1, 2)),
        );
        let out = rule_interior(b).unwrap();
        assert_eq!(out.p_u, Exponent::exact(rat(1, 2)));

        let b = DecayBound::global(
            Exponent::exact(rat(1, 2)),
            Exponent::exact_int(0),
            Exponent::exact_int(0),
        );
        assert!(rule_interior(b).is_err());
    }

    #[test]
    fn derivative_rule_examples() {
        let b = DecayBound::global(
            Exponent::exact_int(1),
            Exponent::exact_int(0),
            Exponent::exact_int(0),
        );
        let [(br1, v1), (br2, v2)] = rule_derivative(&b);
        assert_eq!(br1, MuBranch::RleqU);
        assert_eq!(v1.p_r, Exponent::exact_int(2));
        assert_eq!(v1.p_u, Exponent::exact_int(0));
        assert_eq!(br2, MuBranch::UleqR);
        assert_eq!(v2.p_r, Exponent::exact_int(1));
        assert_eq!(v2.p_u, Exponent::exact_int(1));

        let b = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(1),
            Exponent::exact(rat(1, 2)),
        );
        let [(_, v1), (_, v2)] = rule_derivative(&b);
        assert_eq!(v1.p_r, Exponent::exact_int(1));
        assert_eq!(v2.p_u, Exponent::exact(rat(3, 2)));

        let zero = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(0),
            Exponent::exact_int(0),
        );
        let [(_, v1), (_, v2)] = rule_derivative(&zero);
        assert_eq!(v1.p_r, Exponent::exact_int(1));
        assert_eq!(v2.p_u, Exponent::exact_int(1));
    }

    #[test]
    fn source_assembly_first_pass() {
        let phi = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(1),
            Exponent::exact(rat(-1, 2)),
        );
        let asm = rule_source_assembly(&phi, rat(1, 2), DeltaBranch::Small).unwrap();
        assert_eq!(asm.triples.len(), 1);
        let (_, t) = asm.triples[0];
        assert_eq!(t.alpha, Exponent::exact_int(2));
        assert_eq!(t.beta, Exponent::exact(rat(1, 2)));
        assert_eq!(t.eta, Exponent::exact(rat(1, 2)));
    }

    #[test]
    fn source_assembly_second_pass_matches_displayed_chain() {
        let phi = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(1),
            Exponent::exact_int(0),
        );
        let asm = rule_source_assembly(&phi, rat(1, 2), DeltaBranch::Small).unwrap();
        let (_, u_branch) = asm.triples[0];
        // alpha + beta = 2 + delta, eta = 2 - delta.
        assert_eq!((u_branch.alpha + u_branch.beta).value, rat(5, 2));
        assert_eq!(u_branch.eta.value, rat(3, 2));
    }

    #[test]
    fn source_assembly_large_delta_capped_at_one() {
        let phi = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(1),
            Exponent::exact(rat(-1, 2)),
        );
        let at_one = rule_source_assembly(&phi, rat(1, 1), DeltaBranch::Large).unwrap();
        let at_two = rule_source_assembly(&phi, rat(2, 1), DeltaBranch::Large).unwrap();
        assert_eq!(at_one.triples[0].1, at_two.triples[0].1);
        assert_eq!(at_two.kappa, rat(1, 1));
    }

    #[test]
    fn source_assembly_rejects_mismatched_branch_and_region() {
        let phi = DecayBound::global(
            Exponent::exact_int(0),
            Exponent::exact_int(1),
            Exponent::exact_int(0),
        );
        assert!(rule_source_assembly(&phi, rat(2, 1), DeltaBranch::Small).is_err());
        let mut interior = phi;
        interior.region = Region::Interior;
        assert!(rule_source_assembly(&interior, rat(1, 2), DeltaBranch::Small).is_err());
    }

    #[test]
    fn cone_derivative_gains_one_over_conversion_at_beta_zero() {
        // Table identity: for beta = 0 sources in both windows, the
        // time-derivative variant improves p_u by exactly 1.
        for (a, e) in [
            (rat(5, 2), rat(2, 1)),
            (rat(5, 2), rat(3, 4)),
            (rat(11, 4), rat(2, 1)),
        ] {
            let alpha = Exponent::exact(a);
            let eta = Exponent::exact(e);
            let plain = rule_conversion(SourceTriple::new(alpha, Exponent::exact_int(0), eta))
                .unwrap()
                .0;
            let gained = rule_cone_derivative(alpha, eta).unwrap();
            assert_eq!(gained.p_u.value, plain.p_u.value + rat(1, 1));
        }
        // Outside its validity window the rule refuses.
        assert!(
            rule_cone_derivative(Exponent::exact(rat(5, 2)), Exponent::exact(rat(1, 4))).is_err()
        );
        assert!(rule_cone_derivative(Exponent::exact(rat(7, 2)), Exponent::exact_int(2)).is_err());
    }
}
