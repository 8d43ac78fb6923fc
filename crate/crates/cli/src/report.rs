//! Result documents: plain `key = value` text with numbers at 17
//! significant digits, suitable for diffing and regression goldens.

use birisk::gaussian::{SolveOutcome, Thresholds};
use birisk::scenario::{ScenarioOutcome, SlaterStatus};

pub fn fmt_num(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn fmt_vec(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" ")
}

fn push_kv(out: &mut String, key: &str, value: &str) {
    out.push_str(key);
    out.push_str(" = ");
    out.push_str(value);
    out.push('\n');
}

fn push_opt(out: &mut String, key: &str, value: Option<f64>) {
    match value {
        Some(v) => push_kv(out, key, &fmt_num(v)),
        None => push_kv(out, key, "undefined"),
    }
}

pub struct EpsilonSolution {
    pub epsilon: f64,
    pub weights: Vec<f64>,
    pub sigma: f64,
    pub mu: f64,
    pub value: f64,
}

pub fn gaussian_document(
    rho1: f64,
    rho2: f64,
    r: f64,
    thresholds: &Thresholds,
    outcome: &SolveOutcome,
    epsilon: Option<&EpsilonSolution>,
) -> String {
    let mut out = String::new();
    push_kv(&mut out, "mode", "gaussian");
    push_kv(&mut out, "tag", outcome.tag_name());
    push_kv(&mut out, "rho1_coeff", &fmt_num(rho1));
    push_kv(&mut out, "rho2_coeff", &fmt_num(rho2));
    push_kv(&mut out, "r", &fmt_num(r));
    push_kv(&mut out, "slope", &fmt_num(thresholds.slope));
    push_kv(&mut out, "r_zero", &fmt_num(thresholds.r_zero));
    push_opt(&mut out, "r_star", thresholds.r_star);
    push_opt(&mut out, "sigma_star", thresholds.sigma_star);
    push_opt(&mut out, "mu_star", thresholds.mu_star);
    push_opt(&mut out, "r_minus", thresholds.r_minus);
    push_opt(&mut out, "r_plus", thresholds.r_plus);
    match outcome {
        SolveOutcome::Optimal(opt) => {
            push_kv(&mut out, "case", &opt.case.to_string());
            push_kv(&mut out, "case_detail", &opt.case_label);
            push_kv(&mut out, "value", &fmt_num(opt.value));
            push_kv(&mut out, "sigma", &fmt_num(opt.sigma));
            push_kv(&mut out, "mu", &fmt_num(opt.mu));
            push_kv(&mut out, "portfolio", &fmt_vec(&opt.weights));
        }
        SolveOutcome::InfimumNotAttained { value } => {
            push_kv(&mut out, "value", &fmt_num(*value));
            push_kv(
                &mut out,
                "note",
                "finite infimum approached along the asymptote; no portfolio attains it",
            );
        }
        SolveOutcome::Unbounded => {
            push_kv(&mut out, "note", "objective decreases without bound along the frontier");
        }
        SolveOutcome::Infeasible => {
            push_kv(&mut out, "note", "no frontier point satisfies the risk bound");
        }
    }
    if let Some(eps) = epsilon {
        push_kv(&mut out, "epsilon", &fmt_num(eps.epsilon));
        push_kv(&mut out, "epsilon_value", &fmt_num(eps.value));
        push_kv(&mut out, "epsilon_sigma", &fmt_num(eps.sigma));
        push_kv(&mut out, "epsilon_mu", &fmt_num(eps.mu));
        push_kv(&mut out, "epsilon_portfolio", &fmt_vec(&eps.weights));
    }
    out
}

pub fn scenario_document(r: f64, long_only: bool, outcome: &ScenarioOutcome) -> String {
    let mut out = String::new();
    push_kv(&mut out, "mode", "scenario");
    push_kv(&mut out, "tag", outcome.tag_name());
    push_kv(&mut out, "r", &fmt_num(r));
    push_kv(&mut out, "long_only", if long_only { "true" } else { "false" });
    let slater = match outcome {
        ScenarioOutcome::Optimal(sol) => &sol.slater,
        ScenarioOutcome::Infeasible { slater } | ScenarioOutcome::DualInfeasible { slater } => {
            slater
        }
    };
    match slater {
        SlaterStatus::Satisfied { .. } => push_kv(&mut out, "slater", "satisfied"),
        SlaterStatus::Violated { min_rho2 } => {
            push_kv(&mut out, "slater", "violated");
            push_kv(&mut out, "slater_min_rho2", &fmt_num(*min_rho2));
        }
    }
    match outcome {
        ScenarioOutcome::Optimal(sol) => {
            push_kv(&mut out, "value", &fmt_num(sol.value));
            push_kv(&mut out, "dual_objective", &fmt_num(sol.dual_objective));
            push_kv(&mut out, "duality_gap", &fmt_num(sol.duality_gap));
            push_kv(&mut out, "rho2_value", &fmt_num(sol.rho2_value));
            push_kv(&mut out, "budget_residual", &fmt_num(sol.budget_residual));
            push_kv(&mut out, "lambda", &fmt_num(sol.dual.lambda));
            push_kv(&mut out, "pivots", &sol.dual.iterations.to_string());
            push_kv(&mut out, "portfolio", &fmt_vec(&sol.portfolio));
        }
        ScenarioOutcome::Infeasible { .. } => {
            push_kv(&mut out, "note", "dual unbounded: no portfolio satisfies the risk bound");
        }
        ScenarioOutcome::DualInfeasible { .. } => {
            push_kv(
                &mut out,
                "diagnostic",
                "dual infeasible: primal unbounded or infimum not attained",
            );
        }
    }
    out
}

/// Exit code mandated for each outcome tag.
pub fn exit_code_for_tag(tag: &str) -> i32 {
    match tag {
        "optimal" => 0,
        "infeasible" => 2,
        "unbounded" => 3,
        "infimum-not-attained" => 4,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
    }

    #[test]
    fn exit_codes_are_tag_functions() {
        assert_eq!(exit_code_for_tag("optimal"), 0);
        assert_eq!(exit_code_for_tag("infeasible"), 2);
        assert_eq!(exit_code_for_tag("unbounded"), 3);
        assert_eq!(exit_code_for_tag("infimum-not-attained"), 4);
    }
}
