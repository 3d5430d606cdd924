//! Removal of non-terminal CNOT cascades. A control that reads an XOR of
//! wires is replaced by one gate per minterm of that XOR, giving a circuit
//! whose same-target gates can be reordered freely.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{Circuit, Control, Gate, OpKind, WireRole};
use crate::error::{Error, Result};
use crate::esop::Polarity;

/// Largest support expanded into minterms (2^16 gates).
pub const MAX_EXPANSION_WIRES: usize = 16;

/// Gates for `op` on `target`, controlled by every full minterm over
/// `support` (sorted ascending, first wire most significant) on which
/// `active` holds. Gates with two or more controls are virtual.
fn expand_predicate(
    op: OpKind,
    target: usize,
    support: &[usize],
    active: impl Fn(&BTreeMap<usize, bool>) -> bool,
) -> Vec<Gate> {
    let k = support.len();
    let mut out = Vec::new();
    for m in 0..1usize << k {
        let values: BTreeMap<usize, bool> = support
            .iter()
            .enumerate()
            .map(|(pos, &w)| (w, m >> (k - 1 - pos) & 1 == 1))
            .collect();
        if !active(&values) {
            continue;
        }
        let controls = values
            .iter()
            .map(|(&w, &v)| Control::new(w, Polarity::from_active_value(v)))
            .collect::<Vec<_>>();
        let virtual_gate = op != OpKind::X && controls.len() >= 2;
        let op = OpKind::from_power(op.power(), virtual_gate).expect("nonzero power");
        out.push(Gate::build(op, target, controls));
    }
    out
}

/// Expands `op` on `target` controlled by the XOR of `literals` into
/// `2^(n-1)` gates, one per minterm where the XOR is 1.
pub fn expand_xor_control(op: OpKind, target: usize, literals: &[Control]) -> Result<Vec<Gate>> {
    if literals.is_empty() {
        return Err(Error::EmptySupport);
    }
    let support: Vec<usize> = literals
        .iter()
        .map(|l| l.wire)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if support.len() != literals.len() {
        return Err(Error::InvalidGate("XOR support repeats a wire".into()));
    }
    if support.contains(&target) {
        return Err(Error::InvalidGate("target is part of the XOR support".into()));
    }
    if support.len() > MAX_EXPANSION_WIRES {
        return Err(Error::ExpansionTooLarge {
            position: 0,
            wires: support.len(),
            limit: MAX_EXPANSION_WIRES,
        });
    }
    Ok(expand_predicate(op, target, &support, |v| {
        literals
            .iter()
            .fold(false, |acc, l| acc ^ l.is_active(v[&l.wire]))
    }))
}

/// Value of a wire as an XOR of region-start wire values plus a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Affine {
    vars: BTreeSet<usize>,
    constant: bool,
}

impl Affine {
    fn wire(w: usize) -> Self {
        Self {
            vars: BTreeSet::from([w]),
            constant: false,
        }
    }

    fn is_identity_of(&self, w: usize) -> bool {
        !self.constant && self.vars.len() == 1 && self.vars.contains(&w)
    }

    fn xor_assign(&mut self, other: &Affine) {
        for v in &other.vars {
            if !self.vars.remove(v) {
                self.vars.insert(*v);
            }
        }
        self.constant ^= other.constant;
    }

    fn eval(&self, values: &BTreeMap<usize, bool>) -> bool {
        self.vars.iter().fold(self.constant, |acc, v| acc ^ values[v])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SkippedRegion {
    /// Index of the first gate of the region in the input circuit.
    pub start: usize,
    /// Index of the gate where recognition failed (`len` at end of circuit).
    pub position: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct LinearizeReport {
    pub regions_linearized: usize,
    pub skipped: Vec<SkippedRegion>,
}

struct Region {
    start: usize,
    out_len: usize,
    pending: BTreeMap<usize, Affine>,
}

impl Region {
    fn value(&self, w: usize) -> Affine {
        self.pending.get(&w).cloned().unwrap_or_else(|| Affine::wire(w))
    }

    fn in_support(&self, w: usize) -> bool {
        self.pending.contains_key(&w) || self.pending.values().any(|a| a.vars.contains(&w))
    }
}

fn is_linear_x(g: &Gate) -> bool {
    g.op == OpKind::X && g.controls().len() <= 1
}

/// Linearizes every region that starts with a CNOT/NOT on a non-output wire
/// and ends when all such wires are restored. Regions that do not fit this
/// shape are copied unchanged and listed in the report.
pub fn linearize_circuit(c: &Circuit) -> Result<(Circuit, LinearizeReport)> {
    let mut out = c.clone();
    out.gates.clear();
    let mut report = LinearizeReport::default();
    let mut region: Option<Region> = None;

    let fail = |out: &mut Circuit,
                report: &mut LinearizeReport,
                r: Region,
                position: usize,
                reason: String| {
        out.gates.truncate(r.out_len);
        let end = position.min(c.gates.len());
        out.gates.extend_from_slice(&c.gates[r.start..end]);
        report.skipped.push(SkippedRegion {
            start: r.start,
            position,
            reason,
        });
    };

    let mut idx = 0;
    while idx < c.gates.len() {
        let g = &c.gates[idx];
        let deferrable = is_linear_x(g) && c.role(g.target) != WireRole::Output;
        let Some(r) = region.as_mut() else {
            if deferrable {
                region = Some(Region {
                    start: idx,
                    out_len: out.gates.len(),
                    pending: BTreeMap::new(),
                });
                continue;
            }
            out.gates.push(g.clone());
            idx += 1;
            continue;
        };

        if deferrable {
            let mut value = r.value(g.target);
            match g.controls() {
                [] => value.constant ^= true,
                [ctl] => {
                    let mut src = r.value(ctl.wire);
                    src.constant ^= !ctl.polarity.active_value();
                    value.xor_assign(&src);
                }
                _ => unreachable!(),
            }
            if value.is_identity_of(g.target) {
                r.pending.remove(&g.target);
            } else {
                r.pending.insert(g.target, value);
            }
            idx += 1;
        } else if r.in_support(g.target) {
            let r = region.take().expect("open region");
            fail(&mut out, &mut report, r, idx, format!("gate {idx} overwrites a wire read by a pending XOR"));
            // The failing gate starts over outside any region.
            out.gates.push(g.clone());
            idx += 1;
            continue;
        } else if g.control_wires().any(|w| r.pending.contains_key(&w)) {
            if c.role(g.target) == WireRole::Input {
                let r = region.take().expect("open region");
                fail(&mut out, &mut report, r, idx, format!("gate {idx} would expand onto an input wire"));
                out.gates.push(g.clone());
                idx += 1;
                continue;
            }
            let values: Vec<(Affine, Polarity)> = g
                .controls()
                .iter()
                .map(|ctl| (r.value(ctl.wire), ctl.polarity))
                .collect();
            let support: Vec<usize> = values
                .iter()
                .flat_map(|(a, _)| a.vars.iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if support.len() > MAX_EXPANSION_WIRES {
                return Err(Error::ExpansionTooLarge {
                    position: idx,
                    wires: support.len(),
                    limit: MAX_EXPANSION_WIRES,
                });
            }
            let gates = expand_predicate(g.op, g.target, &support, |v| {
                values
                    .iter()
                    .all(|(a, p)| a.eval(v) == p.active_value())
            });
            out.gates.extend(gates);
            idx += 1;
        } else {
            out.gates.push(g.clone().with_group(None));
            idx += 1;
        }

        if let Some(r) = region.as_ref() {
            if r.pending.is_empty() {
                let r = region.take().expect("open region");
                for gate in &mut out.gates[r.out_len..] {
                    gate.group = None;
                }
                report.regions_linearized += 1;
            }
        }
    }
    if let Some(r) = region.take() {
        let len = c.gates.len();
        fail(&mut out, &mut report, r, len, "circuit ends with unrestored CNOT targets".into());
    }
    out.renumber_groups();
    Ok((out, report))
}
