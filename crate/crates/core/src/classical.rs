//! ESOP to Toffoli cascade, and reduction of many-control Toffoli gates to
//! two-control Toffoli gates through an ancilla AND-chain.

use crate::circuit::{Circuit, Control, Gate, OpKind, WireRole};
use crate::error::{Error, Result};
use crate::esop::{var_name, EsopExpr};

/// Name of the function output wire.
pub const OUTPUT_WIRE: &str = "t";

/// One input wire per variable, then the output wire `t`, then one X gate
/// on `t` per term.
pub fn esop_to_cascade(e: &EsopExpr) -> Circuit {
    let mut c = Circuit::new();
    for v in 0..e.arity() {
        c.add_wire(var_name(v), WireRole::Input)
            .expect("distinct variable names");
    }
    let t = c
        .add_wire(OUTPUT_WIRE, WireRole::Output)
        .expect("output name is free");
    for term in e.terms() {
        let controls = term
            .literals()
            .iter()
            .map(|l| Control::new(l.var, l.polarity))
            .collect();
        c.gates.push(Gate::x(t, controls));
    }
    c
}

/// Splits an X gate with n > 2 controls into two-control Toffoli gates:
/// `anc1 = c1 c2`, `anc_k = anc_(k-1) c_(k+1)`, the final Toffoli onto the
/// original target, then (optionally) the chain in reverse. Gates with at
/// most two controls are returned unchanged.
pub fn decompose_toffoli(gate: &Gate, ancillas: &[usize], uncompute: bool) -> Result<Vec<Gate>> {
    if gate.op != OpKind::X {
        return Err(Error::InvalidGate(format!(
            "only X gates have a Toffoli decomposition, found {:?}",
            gate.op
        )));
    }
    let ctl = gate.controls();
    let n = ctl.len();
    if n <= 2 {
        return Ok(vec![gate.clone()]);
    }
    if ancillas.len() < n - 2 {
        return Err(Error::InsufficientAncillas {
            needed: n - 2,
            available: ancillas.len(),
        });
    }
    if let Some(&bad) = ancillas[..n - 2]
        .iter()
        .find(|&&a| gate.touches(a))
    {
        return Err(Error::InvalidGate(format!(
            "ancilla wire {bad} is used by the gate itself"
        )));
    }
    let mut chain = Vec::with_capacity(n - 2);
    chain.push(Gate::new(OpKind::X, ancillas[0], vec![ctl[0], ctl[1]])?);
    for k in 1..n - 2 {
        chain.push(Gate::new(
            OpKind::X,
            ancillas[k],
            vec![Control::pos(ancillas[k - 1]), ctl[k + 1]],
        )?);
    }
    let act = Gate::new(
        OpKind::X,
        gate.target,
        vec![Control::pos(ancillas[n - 3]), ctl[n - 1]],
    )?;
    let mut out = chain.clone();
    out.push(act);
    if uncompute {
        out.extend(chain.into_iter().rev());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalOptions {
    /// Restore ancillas after each term; ancillas are then shared.
    pub uncompute: bool,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self { uncompute: true }
    }
}

/// Rewrites every X gate with more than two controls. With uncompute the
/// lowest-indexed ancillas are reused by every term; without it each term
/// gets fresh ancillas that are left dirty. Each expanded chain becomes one
/// `∘`-group.
pub fn decompose_classical(c: &Circuit, opts: ClassicalOptions) -> Result<Circuit> {
    let mut out = c.clone();
    out.gates.clear();
    let mut pool = out.ancillas();
    let mut next_fresh = 0;
    let mut group = c.next_group_id();
    for g in &c.gates {
        let n = g.controls().len();
        if g.op != OpKind::X || n <= 2 {
            out.gates.push(g.clone());
            continue;
        }
        let needed = n - 2;
        let start = if opts.uncompute { 0 } else { next_fresh };
        while pool.len() < start + needed {
            pool.push(out.fresh_ancilla());
        }
        let ancillas = &pool[start..start + needed];
        if !opts.uncompute {
            next_fresh += needed;
        }
        out.gates.extend(
            decompose_toffoli(g, ancillas, opts.uncompute)?
                .into_iter()
                .map(|x| x.with_group(Some(group))),
        );
        group += 1;
    }
    Ok(out)
}

/// Removes gates that write an ancilla whose value is never read again.
/// Only the output wire's function is preserved; ancillas may end dirty.
pub fn drop_dead_restores(c: &Circuit) -> Circuit {
    let mut live = vec![false; c.num_wires()];
    let mut keep = vec![true; c.gates.len()];
    for (idx, g) in c.gates.iter().enumerate().rev() {
        if c.role(g.target) == WireRole::Ancilla && !live[g.target] {
            keep[idx] = false;
            continue;
        }
        for w in g.control_wires() {
            live[w] = true;
        }
    }
    let mut out = c.clone();
    out.gates = c
        .gates
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(g, _)| g.clone())
        .collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct BoundCheck {
    pub actual: usize,
    pub bound: usize,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.actual <= self.bound
    }
}

/// Per-term bound on two-control Toffoli gates: 1 for terms with at most
/// two literals, else `2^(n-2) + 1`.
pub fn toffoli_bound_for_term(literals: usize) -> usize {
    if literals <= 2 {
        1
    } else {
        (1usize << (literals - 2)) + 1
    }
}

/// Counts the gates (each with at most two controls) emitted by the
/// uncomputing decomposition and compares them to the summed per-term bound.
pub fn check_upper_bound_i(e: &EsopExpr) -> Result<BoundCheck> {
    let cascade = esop_to_cascade(e);
    let decomposed = decompose_classical(&cascade, ClassicalOptions { uncompute: true })?;
    Ok(BoundCheck {
        actual: decomposed.gate_count(),
        bound: e
            .terms()
            .iter()
            .map(|t| toffoli_bound_for_term(t.len()))
            .sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esop::parse_esop;
    use crate::oracle::{equivalent, output_truth_table, EquivalenceMode};

    #[test]
    fn grm_example_maps_to_three_toffolis() {
        let e = parse_esop("abc ^ !abd ^ e!d").unwrap();
        let c = esop_to_cascade(&e);
        assert_eq!(c.gate_count(), 3);
        assert!(c.gates.iter().all(|g| g.op == OpKind::X && g.target == 5));
        assert_eq!(output_truth_table(&c).unwrap(), e.truth_table().unwrap());
    }

    #[test]
    fn trivial_cascades() {
        let zero = parse_esop("").unwrap();
        assert!(esop_to_cascade(&zero).is_empty());
        let a = esop_to_cascade(&parse_esop("a").unwrap());
        assert_eq!(a.gates, vec![Gate::cnot(Control::pos(0), 1)]);
        let one = esop_to_cascade(&parse_esop("1").unwrap());
        assert_eq!(one.gates, vec![Gate::x(0, vec![])]);
    }

    fn three_control_setup() -> (Circuit, Gate) {
        let names = [
            ("a", WireRole::Input),
            ("b", WireRole::Input),
            ("c", WireRole::Input),
            ("t", WireRole::Output),
            ("t1", WireRole::Ancilla),
        ];
        let c = Circuit::with_wires(names.iter().map(|(n, r)| (n.to_string(), *r))).unwrap();
        let g = Gate::x(3, vec![Control::pos(0), Control::neg(1), Control::pos(2)]);
        (c, g)
    }

    #[test]
    fn three_control_toffoli_uses_three_gates() {
        let (mut base, g) = three_control_setup();
        let seq = decompose_toffoli(&g, &[4], true).unwrap();
        assert_eq!(seq.len(), 3);
        assert!(seq.iter().all(|s| s.controls().len() == 2));
        let mut expanded = base.clone();
        expanded.gates = seq;
        base.gates = vec![g];
        // Ancilla-0 columns agree; the uncompute also returns the ancilla to 0.
        assert!(equivalent(&base, &expanded, EquivalenceMode::Ancilla0Subspace).unwrap());
    }

    #[test]
    fn chain_length_is_linear() {
        for n in 3..=6 {
            let controls = (0..n).map(Control::pos).collect();
            let g = Gate::x(n, controls);
            let anc: Vec<usize> = (n + 1..2 * n).collect();
            assert_eq!(decompose_toffoli(&g, &anc, true).unwrap().len(), 2 * (n - 2) + 1);
            assert_eq!(decompose_toffoli(&g, &anc, false).unwrap().len(), n - 1);
        }
    }

    #[test]
    fn small_gates_pass_through_and_ancillas_are_checked() {
        let g = Gate::x(2, vec![Control::pos(0), Control::pos(1)]);
        assert_eq!(decompose_toffoli(&g, &[], true).unwrap(), vec![g]);
        let g = Gate::x(3, vec![Control::pos(0), Control::pos(1), Control::pos(2)]);
        assert!(matches!(
            decompose_toffoli(&g, &[], true),
            Err(Error::InsufficientAncillas { needed: 1, available: 0 })
        ));
    }

    #[test]
    fn grm_expansion_adds_one_ancilla_product_per_three_control_term() {
        let e = parse_esop("abc ^ !abd ^ e!d").unwrap();
        let c = decompose_classical(&esop_to_cascade(&e), ClassicalOptions::default()).unwrap();
        assert_eq!(c.ancillas().len(), 1);
        assert_eq!(c.gate_count(), 3 + 3 + 1);
        assert!(c.gates.iter().all(|g| g.controls().len() <= 2));
        assert_eq!(output_truth_table(&c).unwrap(), e.truth_table().unwrap());
        c.validate().unwrap();
    }

    #[test]
    fn dirty_ancillas_are_fresh_per_term() {
        let e = parse_esop("abc ^ !abd").unwrap();
        let c = decompose_classical(&esop_to_cascade(&e), ClassicalOptions { uncompute: false })
            .unwrap();
        assert_eq!(c.ancillas().len(), 2);
        assert_eq!(c.gate_count(), 4);
        assert_eq!(output_truth_table(&c).unwrap(), e.truth_table().unwrap());
    }

    #[test]
    fn dead_restores_are_dropped_but_shared_ones_kept() {
        let e = parse_esop("!cd ^ !ab!c ^ abd").unwrap();
        let full = decompose_classical(&esop_to_cascade(&e), ClassicalOptions::default()).unwrap();
        assert_eq!(full.gate_count(), 7);
        let trimmed = drop_dead_restores(&full);
        assert_eq!(trimmed.gate_count(), 6);
        assert_eq!(output_truth_table(&trimmed).unwrap(), e.truth_table().unwrap());
    }

    #[test]
    fn bound_one_examples() {
        let two_big = parse_esop("abc ^ !a!bd").unwrap();
        let check = check_upper_bound_i(&two_big).unwrap();
        assert_eq!(check.actual, 6);
        assert_eq!(check.bound, 6);
        assert!(check.holds());
        let small = parse_esop("ab ^ !cd ^ a!d").unwrap();
        let check = check_upper_bound_i(&small).unwrap();
        assert_eq!(check.actual, 3);
        assert!(check.holds());
        let f = parse_esop("!cd ^ !ab!c ^ abd").unwrap();
        let check = check_upper_bound_i(&f).unwrap();
        assert_eq!(check.actual, 7);
        assert_eq!(check.bound, 1 + 3 + 3);
    }
}
