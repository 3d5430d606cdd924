//! Rewrite rules on linearized circuits.
//!
//! * `group`: move a gate next to an earlier gate it can fuse with, using
//!   only commuting swaps (the control lines between them are uninterrupted).
//! * `merge`: fuse adjacent gates on the same target with identical controls
//!   (powers of V add mod 4), with one control of opposite polarity and
//!   the same operator (the literal drops out), or an uncontrolled `U`
//!   with `U^-1` on one control `x` (giving `U` on `!x`).
//! * `factor`: two equal gates split by interrupt points on their control
//!   wires act as `U^(C_i + C_j)`; when that sum is a product of input
//!   literals the pair collapses into one gate.
//! * `adjacency`: two X gates on the same target with controls `L·x`,
//!   `L·!x` become `L`, and `L`, `L·y` become `L·!y`.
//!
//! [`rematerialize_virtual`] turns the remaining virtual gates back into
//! realizable gates.

use serde::Serialize;

use crate::circuit::{Circuit, Control, Gate, OpKind, WireRole};
use crate::error::{Error, Result};
use crate::esop::Polarity;
use crate::oracle::{classical_trace, output_truth_table};

/// Circuits with more wires skip the `factor` rule (it simulates every input).
pub const FACTOR_MAX_WIRES: usize = 14;
/// Default bound on rule applications per minimization run.
pub const DEFAULT_MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleApplication {
    pub rule: &'static str,
    pub position: usize,
}

/// Builds `U^power` with the given controls; odd powers with two or more
/// controls are virtual.
fn power_gate(power: u8, target: usize, controls: Vec<Control>) -> Option<Gate> {
    let virtual_gate = power % 2 == 1 && controls.len() >= 2;
    OpKind::from_power(power, virtual_gate).map(|op| Gate::build(op, target, controls))
}

/// Position of the single control whose polarity differs, if the two gates
/// have the same control wires and differ in exactly one polarity.
fn single_flip(a: &Gate, b: &Gate) -> Option<usize> {
    if !a.same_control_wires(b) {
        return None;
    }
    let mut diff = a
        .controls()
        .iter()
        .zip(b.controls())
        .enumerate()
        .filter(|(_, (x, y))| x.polarity != y.polarity)
        .map(|(k, _)| k);
    match (diff.next(), diff.next()) {
        (Some(k), None) => Some(k),
        _ => None,
    }
}

fn without(controls: &[Control], k: usize) -> Vec<Control> {
    controls
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, c)| *c)
        .collect()
}

/// Result of fusing two gates: nothing left, or one gate.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Fused {
    Identity,
    Gate(Gate),
}

fn fuse(a: &Gate, b: &Gate) -> Option<Fused> {
    if a.target != b.target || a.group.is_some() || b.group.is_some() {
        return None;
    }
    if a.controls() == b.controls() {
        let p = (a.op.power() + b.op.power()) % 4;
        return Some(match power_gate(p, a.target, a.controls().to_vec()) {
            None => Fused::Identity,
            Some(g) => Fused::Gate(g),
        });
    }
    if a.op.power() == b.op.power() {
        if let Some(k) = single_flip(a, b) {
            return power_gate(a.op.power(), a.target, without(a.controls(), k)).map(Fused::Gate);
        }
    }
    if (a.op.power() + b.op.power()).is_multiple_of(4) {
        let (short, long) = shorter_by_one(a, b)?;
        if short.controls().is_empty() {
            return Some(Fused::Gate(absorbed(short, long)?));
        }
    }
    None
}

/// The gate with one control fewer, and the other, when the longer control
/// set is the shorter plus one literal.
fn shorter_by_one<'g>(a: &'g Gate, b: &'g Gate) -> Option<(&'g Gate, &'g Gate)> {
    let (short, long) = if a.controls().len() + 1 == b.controls().len() {
        (a, b)
    } else if b.controls().len() + 1 == a.controls().len() {
        (b, a)
    } else {
        return None;
    };
    short
        .controls()
        .iter()
        .all(|c| long.controls().contains(c))
        .then_some((short, long))
}

/// `U^p` on `L` with `U^-p` on `L·x` is `U^p` on `L·!x`.
fn absorbed(short: &Gate, long: &Gate) -> Option<Gate> {
    let extra = long
        .controls()
        .iter()
        .find(|c| !short.controls().contains(c))?;
    let mut controls = short.controls().to_vec();
    controls.push(extra.flipped());
    power_gate(short.op.power(), short.target, controls)
}

/// X-gate reduction: flip merge or absorption of one extra literal.
fn reduce_toffoli_pair(a: &Gate, b: &Gate) -> Option<Gate> {
    if a.op != OpKind::X || b.op != OpKind::X || a.target != b.target {
        return None;
    }
    if a.group.is_some() || b.group.is_some() {
        return None;
    }
    if let Some(k) = single_flip(a, b) {
        return Some(Gate::build(OpKind::X, a.target, without(a.controls(), k)));
    }
    let (short, long) = shorter_by_one(a, b)?;
    absorbed(short, long)
}

type Step = fn(&Circuit) -> Result<Option<(Circuit, usize)>>;

fn merge_step(c: &Circuit) -> Result<Option<(Circuit, usize)>> {
    for k in 0..c.gates.len().saturating_sub(1) {
        if let Some(f) = fuse(&c.gates[k], &c.gates[k + 1]) {
            let mut out = c.clone();
            match f {
                Fused::Identity => {
                    out.gates.drain(k..k + 2);
                }
                Fused::Gate(g) => {
                    out.gates[k] = g;
                    out.gates.remove(k + 1);
                }
            }
            return Ok(Some((out, k)));
        }
    }
    Ok(None)
}

fn move_left(c: &Circuit, j: usize, i: usize) -> Circuit {
    let mut out = c.clone();
    let g = out.gates.remove(j);
    out.gates.insert(i + 1, g);
    out
}

fn group_step(c: &Circuit) -> Result<Option<(Circuit, usize)>> {
    let n = c.gates.len();
    for i in 0..n {
        if i + 1 < n && fuse(&c.gates[i], &c.gates[i + 1]).is_some() {
            continue;
        }
        for j in i + 2..n {
            if fuse(&c.gates[i], &c.gates[j]).is_some() && c.can_move_left(j, i) {
                return Ok(Some((move_left(c, j, i), i + 1)));
            }
        }
    }
    Ok(None)
}

fn adjacency_step(c: &Circuit) -> Result<Option<(Circuit, usize)>> {
    let n = c.gates.len();
    for i in 0..n {
        for j in i + 1..n {
            let Some(g) = reduce_toffoli_pair(&c.gates[i], &c.gates[j]) else {
                continue;
            };
            if j == i + 1 || c.can_move_left(j, i) {
                let mut out = c.clone();
                out.gates[i] = g;
                out.gates.remove(j);
                return Ok(Some((out, i)));
            }
        }
    }
    Ok(None)
}

/// Value of a gate's control predicate at position `pos` for every input
/// assignment, or `None` if some control wire is not classical there.
fn control_values(trace: &[Vec<Vec<Option<bool>>>], g: &Gate, pos: usize) -> Option<Vec<bool>> {
    trace
        .iter()
        .map(|per_pos| {
            g.controls().iter().try_fold(true, |acc, ctl| {
                per_pos[pos][ctl.wire].map(|v| acc && ctl.is_active(v))
            })
        })
        .collect()
}

/// The product of input literals whose onset is exactly `onset`, if any.
fn cube_over_inputs(c: &Circuit, onset: &[bool]) -> Option<Vec<Control>> {
    let inputs = c.inputs();
    let k = inputs.len();
    let bit = |x: usize, p: usize| (x >> (k - 1 - p)) & 1 == 1;
    let ones: Vec<usize> = (0..onset.len()).filter(|&x| onset[x]).collect();
    let first = *ones.first()?;
    let lits: Vec<(usize, bool)> = (0..k)
        .filter(|&p| ones.iter().all(|&x| bit(x, p) == bit(first, p)))
        .map(|p| (p, bit(first, p)))
        .collect();
    let matches = (0..onset.len()).all(|x| onset[x] == lits.iter().all(|&(p, v)| bit(x, p) == v));
    matches.then(|| {
        lits.iter()
            .map(|&(p, v)| Control::new(inputs[p], Polarity::from_active_value(v)))
            .collect()
    })
}

fn factor_step(c: &Circuit) -> Result<Option<(Circuit, usize)>> {
    if c.num_wires() > FACTOR_MAX_WIRES {
        return Ok(None);
    }
    let n = c.gates.len();
    let mut trace = None;
    for i in 0..n {
        let gi = &c.gates[i];
        if gi.group.is_some() || gi.controls().is_empty() || c.role(gi.target) == WireRole::Input {
            continue;
        }
        for j in i + 2..n {
            let gj = &c.gates[j];
            if gj.has_control_on(gi.target) {
                break;
            }
            if gj.group.is_some() || gj.op != gi.op || gj.target != gi.target || gj.controls() != gi.controls() {
                continue;
            }
            let interrupted = c.gates[i + 1..j]
                .iter()
                .any(|h| gi.has_control_on(h.target));
            if !interrupted {
                continue;
            }
            if trace.is_none() {
                trace = Some(classical_trace(c)?);
            }
            let tr = trace.as_ref().expect("trace computed");
            let (Some(ci), Some(cj)) = (control_values(tr, gi, i), control_values(tr, gj, j)) else {
                continue;
            };
            if ci.iter().zip(&cj).any(|(a, b)| *a && *b) {
                continue;
            }
            let onset: Vec<bool> = ci.iter().zip(&cj).map(|(a, b)| a ^ b).collect();
            let mut out = c.clone();
            if onset.iter().all(|v| !v) {
                out.gates.remove(j);
                out.gates.remove(i);
                return Ok(Some((out, i)));
            }
            let Some(cube) = cube_over_inputs(c, &onset) else {
                continue;
            };
            if cube.len() > gi.controls().len() {
                continue;
            }
            let holds_inputs = cube.iter().all(|ctl| {
                let p = c.inputs().iter().position(|&w| w == ctl.wire).expect("input wire");
                let k = c.inputs().len();
                tr.iter()
                    .enumerate()
                    .all(|(x, per_pos)| per_pos[i][ctl.wire] == Some((x >> (k - 1 - p)) & 1 == 1))
            });
            if !holds_inputs {
                continue;
            }
            out.gates[i] = power_gate(gi.op.power(), gi.target, cube).expect("nonzero power");
            out.gates.remove(j);
            return Ok(Some((out, i)));
        }
    }
    Ok(None)
}

/// Rules in priority order. `merge` comes first so that every `group` move
/// is followed by the fusion it enables.
const RULES: [(&str, Step); 4] = [
    ("merge", merge_step),
    ("group", group_step),
    ("factor", factor_step),
    ("adjacency", adjacency_step),
];

pub type TraceFn<'a> = Box<dyn FnMut(&RuleApplication, &Circuit) + 'a>;

/// Applies the rules one at a time until none fires.
pub struct Minimizer<'a> {
    verify_each: bool,
    max_steps: usize,
    trace: Option<TraceFn<'a>>,
    log: Vec<RuleApplication>,
}

impl Default for Minimizer<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Minimizer<'a> {
    pub fn new() -> Self {
        Self {
            verify_each: false,
            max_steps: DEFAULT_MAX_STEPS,
            trace: None,
            log: Vec::new(),
        }
    }

    /// Re-checks the output truth table after every application.
    pub fn verify_each(mut self, on: bool) -> Self {
        self.verify_each = on;
        self
    }

    pub fn max_steps(mut self, steps: usize) -> Self {
        self.max_steps = steps;
        self
    }

    pub fn on_step(mut self, f: impl FnMut(&RuleApplication, &Circuit) + 'a) -> Self {
        self.trace = Some(Box::new(f));
        self
    }

    pub fn log(&self) -> &[RuleApplication] {
        &self.log
    }

    pub fn into_log(self) -> Vec<RuleApplication> {
        self.log
    }

    fn record(
        &mut self,
        reference: Option<&Vec<bool>>,
        rule: &'static str,
        position: usize,
        c: &Circuit,
    ) -> Result<()> {
        let app = RuleApplication { rule, position };
        if let Some(want) = reference {
            match output_truth_table(c) {
                Ok(got) if &got == want => {}
                Ok(_) | Err(Error::NonClassicalOutput { .. }) => {
                    return Err(Error::RuleBroke { rule, position })
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(f) = self.trace.as_mut() {
            f(&app, c);
        }
        self.log.push(app);
        Ok(())
    }

    fn reference(&self, c: &Circuit) -> Result<Option<Vec<bool>>> {
        if self.verify_each && c.output().is_some() {
            Ok(Some(output_truth_table(c)?))
        } else {
            Ok(None)
        }
    }

    fn run_rules(&mut self, c: &Circuit, rules: &[(&'static str, Step)]) -> Result<Circuit> {
        let reference = self.reference(c)?;
        let mut current = c.clone();
        let mut steps = 0;
        'outer: loop {
            for (name, step) in rules {
                if let Some((next, pos)) = step(&current)? {
                    steps += 1;
                    if steps > self.max_steps {
                        return Err(Error::NoConvergence(self.max_steps));
                    }
                    self.record(reference.as_ref(), name, pos, &next)?;
                    current = next;
                    continue 'outer;
                }
            }
            return Ok(current);
        }
    }

    /// All rules to a fixpoint.
    pub fn minimize(&mut self, c: &Circuit) -> Result<Circuit> {
        self.run_rules(c, &RULES)
    }

    /// Virtual gates to realizable gates, logged as one application.
    pub fn rematerialize(&mut self, c: &Circuit, max_wires: Option<usize>) -> Result<Circuit> {
        let reference = self.reference(c)?;
        let out = rematerialize_virtual(c, max_wires)?;
        if out != *c {
            self.record(reference.as_ref(), "rematerialize", 0, &out)?;
        }
        Ok(out)
    }
}

/// One left-to-right sweep moving each gate's first fusable partner next
/// to it.
pub fn group_on_uninterrupted_lines(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    let mut i = 0;
    while i < out.gates.len() {
        let n = out.gates.len();
        if i + 1 < n && fuse(&out.gates[i], &out.gates[i + 1]).is_some() {
            i += 2;
            continue;
        }
        if let Some(j) = (i + 2..n)
            .find(|&j| fuse(&out.gates[i], &out.gates[j]).is_some() && out.can_move_left(j, i))
        {
            out = move_left(&out, j, i);
            i += 2;
        } else {
            i += 1;
        }
    }
    out
}

fn fixpoint(c: &Circuit, step: Step) -> Result<Circuit> {
    let mut current = c.clone();
    while let Some((next, _)) = step(&current)? {
        current = next;
    }
    Ok(current)
}

/// Fuses adjacent gates until none can be fused.
pub fn merge_pe_gates(c: &Circuit) -> Circuit {
    fixpoint(c, merge_step).expect("merge never fails")
}

pub fn factor_interrupt_points(c: &Circuit) -> Result<Circuit> {
    fixpoint(c, factor_step)
}

pub fn toffoli_adjacency_reduce(c: &Circuit) -> Circuit {
    fixpoint(c, adjacency_step).expect("adjacency never fails")
}

/// All rules to a fixpoint without logging.
pub fn minimize(c: &Circuit) -> Result<Circuit> {
    Minimizer::new().minimize(c)
}

/// An ancilla whose every use is a compute/act/uncompute group, so it is 0
/// outside those groups.
fn scratch_ancilla(c: &Circuit) -> Option<usize> {
    c.ancillas().into_iter().find(|&w| {
        let mut k = 0;
        let mut used = false;
        while k < c.gates.len() {
            let g = &c.gates[k];
            if !g.touches(w) {
                k += 1;
                continue;
            }
            used = true;
            let Some(id) = g.group else { return false };
            let end = (k..c.gates.len())
                .find(|&e| c.gates[e].group != Some(id))
                .unwrap_or(c.gates.len());
            let block = &c.gates[k..end];
            let ok = block.len() == 3
                && block[0].target == w
                && block[0] == block[2]
                && block[1].controls() == [Control::pos(w)];
            if !ok {
                return false;
            }
            k = end;
        }
        used
    })
}

/// Rewrites virtual gates into realizable ones. A pair `!x y`, `x !y` (or
/// `!x !y`, `x y`) on the same operator and target becomes
/// `(x+y)_y ∘ U(y) ∘ (x+y)_y`; any other virtual gate computes its control
/// product on a scratch ancilla, applies the real gate from it, and
/// uncomputes. Fails when a new ancilla would exceed `max_wires`.
pub fn rematerialize_virtual(c: &Circuit, max_wires: Option<usize>) -> Result<Circuit> {
    let mut cur = c.clone();
    for g in &mut cur.gates {
        *g = g.clone().normalized();
    }
    let mut next_group = cur.next_group_id();

    let mut i = 0;
    while i < cur.gates.len() {
        let gi = cur.gates[i].clone();
        if !gi.op.is_virtual() || gi.controls().len() != 2 || gi.group.is_some() {
            i += 1;
            continue;
        }
        let partner = (i + 1..cur.gates.len()).find(|&j| {
            let gj = &cur.gates[j];
            gj.op == gi.op
                && gj.target == gi.target
                && gj.group.is_none()
                && gi.same_control_wires(gj)
                && gi.controls().iter().zip(gj.controls()).all(|(a, b)| a.polarity != b.polarity)
                && (j == i + 1 || cur.can_move_left(j, i))
        });
        let Some(j) = partner else {
            i += 1;
            continue;
        };
        let [x, y] = [gi.controls()[0], gi.controls()[1]];
        let parity = x.polarity.active_value() ^ y.polarity.active_value();
        let flip = Gate::cnot(Control::pos(x.wire), y.wire);
        let act = Gate::build(
            gi.op.realized(),
            gi.target,
            vec![Control::new(y.wire, Polarity::from_active_value(parity))],
        );
        cur.gates.remove(j);
        cur.gates.splice(
            i..=i,
            [flip.clone(), act, flip].map(|g| g.with_group(Some(next_group))),
        );
        next_group += 1;
        i += 3;
    }

    let mut scratch = None;
    let mut i = 0;
    while i < cur.gates.len() {
        let g = cur.gates[i].clone();
        if !g.op.is_virtual() {
            i += 1;
            continue;
        }
        let anc = match scratch {
            Some(a) => a,
            None => {
                let a = match scratch_ancilla(&cur) {
                    Some(a) => a,
                    None => {
                        if let Some(limit) = max_wires {
                            if cur.num_wires() + 1 > limit {
                                return Err(Error::AncillaBudget { limit });
                            }
                        }
                        cur.fresh_ancilla()
                    }
                };
                scratch = Some(a);
                a
            }
        };
        let compute = Gate::build(OpKind::X, anc, g.controls().to_vec());
        let act = Gate::build(g.op.realized(), g.target, vec![Control::pos(anc)]);
        cur.gates.splice(
            i..=i,
            [compute.clone(), act, compute].map(|x| x.with_group(Some(next_group))),
        );
        next_group += 1;
        i += 3;
    }
    cur.renumber_groups();
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{equivalent, EquivalenceMode};

    fn circuit(names: &[&str], gates: Vec<Gate>) -> Circuit {
        let mut c = Circuit::new();
        for n in names {
            let role = match *n {
                "t" => WireRole::Output,
                _ if n.starts_with('t') => WireRole::Ancilla,
                _ => WireRole::Input,
            };
            c.add_wire(*n, role).unwrap();
        }
        c.gates = gates;
        c.validate().unwrap();
        c
    }

    fn virt(op: OpKind, target: usize, controls: Vec<Control>) -> Gate {
        Gate::build(op, target, controls)
    }

    #[test]
    fn pe_merge_of_virtual_pair_drops_the_flipped_literal() {
        // !a!b∇ then !ab∇ on t1 leave !a V on t1.
        let c = circuit(
            &["a", "b", "t", "t1"],
            vec![
                virt(OpKind::VirtV, 3, vec![Control::neg(0), Control::neg(1)]),
                virt(OpKind::VirtV, 3, vec![Control::neg(0), Control::pos(1)]),
            ],
        );
        let m = merge_pe_gates(&c);
        assert_eq!(m.gates, vec![Gate::cv(Control::neg(0), 3)]);
        assert!(equivalent(&c, &m, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn v_then_vdg_cancels() {
        let c = circuit(&["a", "t"], vec![Gate::cv(Control::pos(0), 1), Gate::cvdg(Control::pos(0), 1)]);
        assert!(merge_pe_gates(&c).is_empty());
    }

    #[test]
    fn two_v_become_cnot() {
        let c = circuit(&["a", "t"], vec![Gate::cv(Control::pos(0), 1), Gate::cv(Control::pos(0), 1)]);
        assert_eq!(merge_pe_gates(&c).gates, vec![Gate::cnot(Control::pos(0), 1)]);
    }

    #[test]
    fn uncontrolled_v_absorbs_controlled_vdg() {
        // V then !a V+ on t is a V on t.
        let c = circuit(
            &["a", "t"],
            vec![Gate::build(OpKind::V, 1, vec![]), Gate::cvdg(Control::neg(0), 1)],
        );
        let m = merge_pe_gates(&c);
        assert_eq!(m.gates, vec![Gate::cv(Control::pos(0), 1)]);
        assert!(equivalent(&c, &m, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn grouping_brings_equal_gates_together() {
        let c = circuit(
            &["a", "b", "t"],
            vec![Gate::cv(Control::pos(0), 2), Gate::cv(Control::pos(1), 2), Gate::cv(Control::pos(0), 2)],
        );
        let g = group_on_uninterrupted_lines(&c);
        assert_eq!(g.gates[0], g.gates[1]);
        assert!(equivalent(&c, &g, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn interrupted_lines_block_grouping() {
        let c = circuit(
            &["a", "b", "t"],
            vec![Gate::cv(Control::pos(0), 2), Gate::cnot(Control::pos(1), 0), Gate::cv(Control::pos(0), 2)],
        );
        assert_eq!(group_on_uninterrupted_lines(&c), c);
    }

    #[test]
    fn toffoli_flip_pairs_reduce() {
        // abde and a!bde, then abcde and abc!de.
        let t = 5;
        let abde = Gate::x(t, vec![Control::pos(0), Control::pos(1), Control::pos(3), Control::pos(4)]);
        let ab_de = Gate::x(t, vec![Control::pos(0), Control::neg(1), Control::pos(3), Control::pos(4)]);
        let c = circuit(&["a", "b", "c", "d", "e", "t"], vec![abde, ab_de]);
        let r = toffoli_adjacency_reduce(&c);
        assert_eq!(r.gate_count(), 1);
        assert_eq!(r.gates[0].controls().len(), 3);
        assert!(equivalent(&c, &r, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn toffoli_absorption_flips_the_extra_literal() {
        let c = circuit(
            &["a", "b", "t"],
            vec![Gate::cnot(Control::pos(0), 2), Gate::x(2, vec![Control::pos(0), Control::pos(1)])],
        );
        let r = toffoli_adjacency_reduce(&c);
        assert_eq!(r.gates, vec![Gate::x(2, vec![Control::pos(0), Control::neg(1)])]);
        assert!(equivalent(&c, &r, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn two_extra_literals_are_not_reduced() {
        // abcd·e next to a·e.
        let abcde = Gate::x(5, (0..5).map(Control::pos).collect());
        let ae = Gate::x(5, vec![Control::pos(0), Control::pos(4)]);
        let c = circuit(&["a", "b", "c", "d", "e", "t"], vec![abcde, ae]);
        assert_eq!(toffoli_adjacency_reduce(&c), c);
    }

    #[test]
    fn factor_collapses_interrupted_ancilla_reads() {
        // t1 = !ab, V(t1 -> t), t1 ^= b (t1 = ab), V(t1 -> t): V^(!ab + ab) = V^b.
        let c = circuit(
            &["a", "b", "t", "t1"],
            vec![
                Gate::x(3, vec![Control::neg(0), Control::pos(1)]),
                Gate::cv(Control::pos(3), 2),
                Gate::cnot(Control::pos(1), 3),
                Gate::cv(Control::pos(3), 2),
            ],
        );
        let f = factor_interrupt_points(&c).unwrap();
        assert_eq!(f.gate_count(), 3);
        assert_eq!(f.gates[1], Gate::cv(Control::pos(1), 2));
        // The ancilla is read as computed from 0, so equality holds on that subspace.
        assert!(equivalent(&c, &f, EquivalenceMode::Ancilla0Subspace).unwrap());
        assert!(!equivalent(&c, &f, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn factor_rejects_overlapping_reads() {
        // t1 = a, then t1 = a ^ b: V^(a + a^b) reaches V^2 at a=1,b=0.
        let c = circuit(
            &["a", "b", "t", "t1"],
            vec![
                Gate::cnot(Control::pos(0), 3),
                Gate::cv(Control::pos(3), 2),
                Gate::cnot(Control::pos(1), 3),
                Gate::cv(Control::pos(3), 2),
            ],
        );
        assert_eq!(factor_interrupt_points(&c).unwrap(), c);
    }

    #[test]
    fn linearized_toffoli_rematerializes_as_five_gates() {
        let c = circuit(
            &["a", "b", "t"],
            vec![
                Gate::cv(Control::pos(0), 2),
                Gate::cv(Control::pos(1), 2),
                virt(OpKind::VirtVdg, 2, vec![Control::neg(0), Control::pos(1)]),
                virt(OpKind::VirtVdg, 2, vec![Control::pos(0), Control::neg(1)]),
            ],
        );
        let r = rematerialize_virtual(&c, None).unwrap();
        let expected = crate::quantum::toffoli_to_5gate(&Gate::x(2, vec![Control::pos(0), Control::pos(1)])).unwrap();
        let plain: Vec<Gate> = r.gates.iter().map(|g| g.clone().with_group(None)).collect();
        assert_eq!(plain, expected);
        assert!(equivalent(&c, &r, EquivalenceMode::Exact).unwrap());
        assert_eq!(rematerialize_virtual(&r, None).unwrap(), r);
    }

    #[test]
    fn lone_virtual_gate_uses_a_scratch_ancilla() {
        let c = circuit(
            &["a", "b", "c", "t"],
            vec![
                virt(OpKind::VirtV, 3, vec![Control::pos(0), Control::neg(1), Control::pos(2)]),
                virt(OpKind::VirtVdg, 3, vec![Control::pos(0), Control::pos(1)]),
            ],
        );
        let r = rematerialize_virtual(&c, None).unwrap();
        assert_eq!(r.num_wires(), 5);
        assert_eq!(r.gate_count(), 6);
        assert_eq!(r.virtual_count(), 0);
        r.validate().unwrap();
        let mut padded = c.clone();
        padded.add_wire("t1", WireRole::Ancilla).unwrap();
        assert!(equivalent(&padded, &r, EquivalenceMode::Ancilla0Subspace).unwrap());
        assert!(matches!(rematerialize_virtual(&c, Some(4)), Err(Error::AncillaBudget { limit: 4 })));
    }

    #[test]
    fn verified_minimizer_logs_every_rule() {
        let c = circuit(
            &["a", "b", "t"],
            vec![
                Gate::cv(Control::pos(0), 2),
                Gate::cv(Control::pos(1), 2),
                Gate::cv(Control::pos(0), 2),
                Gate::cv(Control::pos(1), 2),
            ],
        );
        let mut steps = 0;
        let mut m = Minimizer::new().verify_each(true).on_step(|_, _| steps += 1);
        let out = m.minimize(&c).unwrap();
        assert_eq!(out.gate_count(), 2);
        let rules: Vec<&str> = m.log().iter().map(|a| a.rule).collect();
        assert_eq!(rules, ["group", "merge", "merge"]);
        drop(m);
        assert_eq!(steps, 3);
    }

    #[test]
    fn step_cap_reports_no_convergence() {
        let c = circuit(&["a", "t"], vec![Gate::cv(Control::pos(0), 1), Gate::cv(Control::pos(0), 1)]);
        assert!(matches!(Minimizer::new().max_steps(0).minimize(&c), Err(Error::NoConvergence(0))));
    }
}
