//! End-to-end synthesis: ESOP to a minimized CNOT/CV/CV† circuit.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::circuit::Circuit;
use crate::classical::{
    check_upper_bound_i, decompose_classical, drop_dead_restores, esop_to_cascade, BoundCheck,
    ClassicalOptions,
};
use crate::error::{Error, Result};
use crate::esop::EsopExpr;
use crate::linearize::linearize_circuit;
use crate::minimize::{rematerialize_virtual, Minimizer, RuleApplication};
use crate::oracle::{output_truth_table, MAX_STATE_QUBITS};
use crate::quantum::{check_upper_bound_ii, decompose_quantum, QuantumOptions};

/// Upper limit on minimize/rematerialize rounds in [`canonicalize_circuit`].
pub const MAX_ROUNDS: usize = 8;

const ORDERING_NOTE: &str = "term ordering: product terms sorted by their total order \
(variable, then polarity, then length), followed by pairwise merging of terms that \
differ in one polarity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Parse,
    Merge,
    Cascade,
    DecomposeClassical,
    DecomposeQuantum,
    Linearize,
    Minimize,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Parse,
        Stage::Merge,
        Stage::Cascade,
        Stage::DecomposeClassical,
        Stage::DecomposeQuantum,
        Stage::Linearize,
        Stage::Minimize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Merge => "merge",
            Stage::Cascade => "cascade",
            Stage::DecomposeClassical => "decompose-classical",
            Stage::DecomposeQuantum => "decompose-quantum",
            Stage::Linearize => "linearize",
            Stage::Minimize => "minimize",
        }
    }

    pub fn produces_circuit(self) -> bool {
        self >= Stage::Cascade
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    /// Restore ancillas after each multi-control term.
    pub uncompute: bool,
    /// Keep ancilla restores that no later gate reads.
    pub keep_uncompute: bool,
    /// Decompose Toffoli gates into CV/CV† only.
    pub cv_only: bool,
    /// Check the output truth table after every rule application.
    pub verify_each: bool,
    /// Largest wire count allowed when adding ancillas.
    pub max_wires: Option<usize>,
    /// Last stage to run.
    pub stop_after: Stage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            uncompute: true,
            keep_uncompute: false,
            cv_only: false,
            verify_each: false,
            max_wires: None,
            stop_after: Stage::Minimize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub name: &'static str,
    pub gate_count: usize,
    pub two_qubit_count: usize,
    pub rules_applied: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Two-control Toffoli bound for the merged expression.
    #[serde(rename = "rm_I")]
    pub rm_i: usize,
    /// Two-qubit operator bound for the merged expression.
    #[serde(rename = "rm_II")]
    pub rm_ii: usize,
    /// Two-qubit operators in the final circuit.
    pub actual: usize,
    pub toffoli_check: BoundCheck,
    pub two_qubit_check: BoundCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub stages: Vec<StageSummary>,
    /// Output truth table of the final circuit equals the expression's.
    /// `false` when the check did not run; see `notes`.
    pub verified: bool,
    pub bounds: Option<Bounds>,
    pub rules: Vec<RuleApplication>,
    pub notes: Vec<String>,
}

/// Result of [`run_pipeline`]: the (merged) expression, the circuit of the
/// last circuit-producing stage, and the report.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub esop: EsopExpr,
    pub circuit: Option<Circuit>,
    pub report: StageReport,
}

fn summary(name: &'static str, c: &Circuit, rules: usize) -> StageSummary {
    StageSummary {
        name,
        gate_count: c.gate_count(),
        two_qubit_count: c.two_qubit_count(),
        rules_applied: rules,
    }
}

fn esop_summary(name: &'static str, e: &EsopExpr, rules: usize) -> StageSummary {
    summary(name, &esop_to_cascade(e), rules)
}

/// Minimizes and rematerializes until the circuit stops changing (at most
/// [`MAX_ROUNDS`] rounds).
pub fn canonicalize_circuit_with(
    c: &Circuit,
    minimizer: &mut Minimizer<'_>,
    max_wires: Option<usize>,
) -> Result<Circuit> {
    let mut cur = c.clone();
    for _ in 0..MAX_ROUNDS {
        let m = minimizer.minimize(&cur)?;
        let r = minimizer.rematerialize(&m, max_wires)?;
        if r == cur {
            break;
        }
        cur = r;
    }
    cur.renumber_groups();
    Ok(cur)
}

pub fn canonicalize_circuit(c: &Circuit) -> Result<Circuit> {
    canonicalize_circuit_with(c, &mut Minimizer::new(), None)
}

/// True when one more minimize + rematerialize pass leaves `c` unchanged.
pub fn is_fixpoint(c: &Circuit) -> Result<bool> {
    let m = Minimizer::new().minimize(c)?;
    let mut r = rematerialize_virtual(&m, None)?;
    r.renumber_groups();
    let mut base = c.clone();
    base.renumber_groups();
    Ok(r == base)
}

/// Runs the stages up to `config.stop_after`, calling `on_step` after
/// every rule application in the minimize stage.
pub fn run_pipeline_traced(
    e: &EsopExpr,
    config: &PipelineConfig,
    on_step: impl FnMut(&RuleApplication, &Circuit),
) -> Result<PipelineOutput> {
    let mut report = StageReport {
        stages: vec![esop_summary("parse", e, 0)],
        verified: false,
        bounds: None,
        rules: Vec::new(),
        notes: Vec::new(),
    };
    let stop = config.stop_after;
    let done = |report: StageReport, esop: EsopExpr, circuit: Option<Circuit>| PipelineOutput {
        esop,
        circuit,
        report,
    };
    if stop == Stage::Parse {
        return Ok(done(report, e.clone(), None));
    }

    let merged = e.merge_terms();
    report.notes.push(ORDERING_NOTE.into());
    report.stages.push(esop_summary(
        "merge",
        &merged,
        e.terms().len() - merged.terms().len(),
    ));
    if stop == Stage::Merge {
        return Ok(done(report, merged, None));
    }

    let toffoli_check = check_upper_bound_i(&merged)?;
    let two_qubit_check = check_upper_bound_ii(&merged)?;

    let cascade = esop_to_cascade(&merged);
    report.stages.push(summary("cascade", &cascade, 0));
    if stop == Stage::Cascade {
        return Ok(done(report, merged, Some(cascade)));
    }

    let mut classical = decompose_classical(
        &cascade,
        ClassicalOptions {
            uncompute: config.uncompute,
        },
    )?;
    if !config.keep_uncompute {
        classical = drop_dead_restores(&classical);
    }
    if let Some(limit) = config.max_wires {
        if classical.num_wires() > limit {
            return Err(Error::AncillaBudget { limit });
        }
    }
    report.stages.push(summary("decompose-classical", &classical, 0));
    if stop == Stage::DecomposeClassical {
        return Ok(done(report, merged, Some(classical)));
    }

    let quantum = decompose_quantum(
        &classical,
        QuantumOptions {
            cv_only: config.cv_only,
        },
    )?;
    report.stages.push(summary("decompose-quantum", &quantum, 0));
    if stop == Stage::DecomposeQuantum {
        return Ok(done(report, merged, Some(quantum)));
    }

    let (linear, lin_report) = linearize_circuit(&quantum)?;
    for s in &lin_report.skipped {
        report.notes.push(format!(
            "linearize: gates {}..{} left unchanged ({})",
            s.start, s.position, s.reason
        ));
    }
    report
        .stages
        .push(summary("linearize", &linear, lin_report.regions_linearized));
    if stop == Stage::Linearize {
        return Ok(done(report, merged, Some(linear)));
    }

    let mut minimizer = Minimizer::new()
        .verify_each(config.verify_each)
        .on_step(on_step);
    let fin = canonicalize_circuit_with(&linear, &mut minimizer, config.max_wires)?;
    let rules = minimizer.into_log();
    report.stages.push(summary("minimize", &fin, rules.len()));
    report.rules = rules;
    report.bounds = Some(Bounds {
        rm_i: toffoli_check.bound,
        rm_ii: two_qubit_check.bound,
        actual: fin.two_qubit_count(),
        toffoli_check,
        two_qubit_check,
    });
    if fin.num_wires() <= MAX_STATE_QUBITS && merged.arity() <= MAX_STATE_QUBITS {
        report.verified = output_truth_table(&fin)? == merged.truth_table()?;
    } else {
        report
            .notes
            .push("verification skipped: too many wires to simulate".into());
    }
    Ok(done(report, merged, Some(fin)))
}

pub fn run_pipeline(e: &EsopExpr, config: &PipelineConfig) -> Result<PipelineOutput> {
    run_pipeline_traced(e, config, |_, _| {})
}

/// Full pipeline; returns the minimized circuit and its report.
pub fn canonicalize(e: &EsopExpr, config: &PipelineConfig) -> Result<(Circuit, StageReport)> {
    let config = PipelineConfig {
        stop_after: Stage::Minimize,
        ..config.clone()
    };
    let out = run_pipeline(e, &config)?;
    Ok((out.circuit.expect("minimize produces a circuit"), out.report))
}
