//! Gate and circuit model shared by every stage.
//!
//! All gates are single-target controlled operators drawn from the
//! powers of V: `V^1 = V`, `V^2 = X`, `V^3 = V†`. Virtual operators carry
//! the same matrices but mark multi-controlled V/V† gates that still need
//! rematerialization.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::esop::Polarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum OpKind {
    X,
    V,
    Vdg,
    VirtV,
    VirtVdg,
}

impl OpKind {
    /// Exponent k such that the operator equals V^k.
    pub fn power(self) -> u8 {
        match self {
            OpKind::X => 2,
            OpKind::V | OpKind::VirtV => 1,
            OpKind::Vdg | OpKind::VirtVdg => 3,
        }
    }

    pub fn is_virtual(self) -> bool {
        matches!(self, OpKind::VirtV | OpKind::VirtVdg)
    }

    /// Operator for `V^power`; `None` for the identity.
    pub fn from_power(power: u8, virtual_gate: bool) -> Option<Self> {
        match (power % 4, virtual_gate) {
            (0, _) => None,
            (1, false) => Some(OpKind::V),
            (1, true) => Some(OpKind::VirtV),
            (2, _) => Some(OpKind::X),
            (3, false) => Some(OpKind::Vdg),
            (3, true) => Some(OpKind::VirtVdg),
            _ => unreachable!(),
        }
    }

    pub fn realized(self) -> Self {
        match self {
            OpKind::VirtV => OpKind::V,
            OpKind::VirtVdg => OpKind::Vdg,
            op => op,
        }
    }

    pub fn virtualized(self) -> Self {
        match self {
            OpKind::V => OpKind::VirtV,
            OpKind::Vdg => OpKind::VirtVdg,
            op => op,
        }
    }

    /// The V-family operator with the opposite rotation (V <-> V†).
    pub fn adjoint(self) -> Self {
        match self {
            OpKind::V => OpKind::Vdg,
            OpKind::Vdg => OpKind::V,
            OpKind::VirtV => OpKind::VirtVdg,
            OpKind::VirtVdg => OpKind::VirtV,
            OpKind::X => OpKind::X,
        }
    }

    pub fn netlist_name(self) -> &'static str {
        match self {
            OpKind::X => "X",
            OpKind::V => "V",
            OpKind::Vdg => "Vdg",
            OpKind::VirtV => "VirtV",
            OpKind::VirtVdg => "VirtVdg",
        }
    }

    pub fn from_netlist_name(name: &str) -> Option<Self> {
        Some(match name {
            "X" => OpKind::X,
            "V" => OpKind::V,
            "Vdg" => OpKind::Vdg,
            "VirtV" => OpKind::VirtV,
            "VirtVdg" => OpKind::VirtVdg,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub wire: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(wire: usize) -> Self {
        Self {
            wire,
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(wire: usize) -> Self {
        Self {
            wire,
            polarity: Polarity::Negative,
        }
    }

    pub fn new(wire: usize, polarity: Polarity) -> Self {
        Self { wire, polarity }
    }

    pub fn flipped(self) -> Self {
        Self {
            wire: self.wire,
            polarity: self.polarity.flip(),
        }
    }

    pub fn is_active(self, value: bool) -> bool {
        value == self.polarity.active_value()
    }
}

/// A controlled operator. Controls are kept sorted by wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: OpKind,
    pub target: usize,
    controls: Vec<Control>,
    pub group: Option<u32>,
}

impl Gate {
    pub fn new(op: OpKind, target: usize, mut controls: Vec<Control>) -> Result<Self> {
        controls.sort();
        for pair in controls.windows(2) {
            if pair[0].wire == pair[1].wire {
                return Err(Error::InvalidGate(format!(
                    "wire {} used twice as a control",
                    pair[0].wire
                )));
            }
        }
        if controls.iter().any(|c| c.wire == target) {
            return Err(Error::InvalidGate(format!(
                "target wire {target} is also a control"
            )));
        }
        Ok(Self {
            op,
            target,
            controls,
            group: None,
        })
    }

    /// Panicking constructor for gates assembled from already-valid parts.
    pub(crate) fn build(op: OpKind, target: usize, controls: Vec<Control>) -> Self {
        Self::new(op, target, controls).expect("well-formed gate")
    }

    pub fn x(target: usize, controls: Vec<Control>) -> Self {
        Self::build(OpKind::X, target, controls)
    }

    pub fn cnot(control: Control, target: usize) -> Self {
        Self::build(OpKind::X, target, vec![control])
    }

    pub fn cv(control: Control, target: usize) -> Self {
        Self::build(OpKind::V, target, vec![control])
    }

    pub fn cvdg(control: Control, target: usize) -> Self {
        Self::build(OpKind::Vdg, target, vec![control])
    }

    pub fn with_group(mut self, group: Option<u32>) -> Self {
        self.group = group;
        self
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn control_wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().map(|c| c.wire)
    }

    pub fn has_control_on(&self, wire: usize) -> bool {
        self.controls.iter().any(|c| c.wire == wire)
    }

    pub fn touches(&self, wire: usize) -> bool {
        self.target == wire || self.has_control_on(wire)
    }

    pub fn same_control_wires(&self, other: &Gate) -> bool {
        self.controls.len() == other.controls.len()
            && self
                .controls
                .iter()
                .zip(&other.controls)
                .all(|(a, b)| a.wire == b.wire)
    }

    /// Virtual gates with at most one control are ordinary CV/CV† gates.
    pub fn normalized(mut self) -> Self {
        self.op = if self.controls.len() <= 1 {
            self.op.realized()
        } else {
            self.op
        };
        self
    }

    pub fn is_realizable(&self) -> bool {
        !self.op.is_virtual()
    }

    /// Whether the control predicate holds on a full basis assignment.
    pub fn controls_active(&self, value_of: impl Fn(usize) -> bool) -> bool {
        self.controls.iter().all(|c| c.is_active(value_of(c.wire)))
    }
}

/// Two gates can be swapped without changing the unitary when neither
/// target is read or written by the other gate, apart from a shared
/// target. Every operator here is a power of V, so gates acting on the
/// same target commute once controls are left alone.
pub fn gates_commute(g1: &Gate, g2: &Gate) -> bool {
    if g1.has_control_on(g2.target) || g2.has_control_on(g1.target) {
        return false;
    }
    // Shared target: both act as V-powers controlled by untouched wires.
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum WireRole {
    Input,
    Ancilla,
    Output,
}

impl WireRole {
    pub fn netlist_name(self) -> &'static str {
        match self {
            WireRole::Input => "input",
            WireRole::Ancilla => "ancilla",
            WireRole::Output => "output",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wire {
    pub name: String,
    pub role: WireRole,
}

/// An ordered gate list over a fixed wire table. Gates sharing a group id
/// form a contiguous `∘`-sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Circuit {
    wires: Vec<Wire>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_wires(wires: impl IntoIterator<Item = (String, WireRole)>) -> Result<Self> {
        let mut c = Self::new();
        for (name, role) in wires {
            c.add_wire(name, role)?;
        }
        Ok(c)
    }

    pub fn add_wire(&mut self, name: impl Into<String>, role: WireRole) -> Result<usize> {
        let name = name.into();
        if !is_valid_wire_name(&name) {
            return Err(Error::InvalidCircuit(format!("bad wire name `{name}`")));
        }
        if self.wire_index(&name).is_some() {
            return Err(Error::InvalidCircuit(format!("duplicate wire `{name}`")));
        }
        self.wires.push(Wire { name, role });
        Ok(self.wires.len() - 1)
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn num_wires(&self) -> usize {
        self.wires.len()
    }

    pub fn wire_index(&self, name: &str) -> Option<usize> {
        self.wires.iter().position(|w| w.name == name)
    }

    pub fn role(&self, wire: usize) -> WireRole {
        self.wires[wire].role
    }

    pub fn wires_with_role(&self, role: WireRole) -> Vec<usize> {
        (0..self.wires.len())
            .filter(|&w| self.wires[w].role == role)
            .collect()
    }

    pub fn inputs(&self) -> Vec<usize> {
        self.wires_with_role(WireRole::Input)
    }

    pub fn ancillas(&self) -> Vec<usize> {
        self.wires_with_role(WireRole::Ancilla)
    }

    /// The designated output wire (the first wire with output role).
    pub fn output(&self) -> Option<usize> {
        self.wires.iter().position(|w| w.role == WireRole::Output)
    }

    /// Adds an ancilla named `t<k>` with the smallest unused k.
    pub fn fresh_ancilla(&mut self) -> usize {
        let k = (1..)
            .find(|k| self.wire_index(&format!("t{k}")).is_none())
            .expect("unbounded search");
        self.add_wire(format!("t{k}"), WireRole::Ancilla)
            .expect("fresh name")
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn check_gate(&self, g: &Gate) -> Result<()> {
        let n = self.wires.len();
        if g.target >= n || g.controls.iter().any(|c| c.wire >= n) {
            return Err(Error::InvalidGate(format!(
                "gate references a wire outside 0..{n}"
            )));
        }
        Ok(())
    }

    /// Checks wire references and group contiguity.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            self.check_gate(g)?;
            Gate::new(g.op, g.target, g.controls.clone())?;
        }
        let mut closed = BTreeSet::new();
        let mut current: Option<u32> = None;
        for g in &self.gates {
            if g.group != current {
                if let Some(prev) = current {
                    closed.insert(prev);
                }
                if let Some(id) = g.group {
                    if closed.contains(&id) {
                        return Err(Error::InvalidCircuit(format!(
                            "group {id} is not contiguous"
                        )));
                    }
                }
                current = g.group;
            }
        }
        Ok(())
    }

    /// Renumbers groups 0, 1, 2, ... in order of appearance.
    pub fn renumber_groups(&mut self) {
        let mut prev: Option<u32> = None;
        let mut next = 0;
        for g in &mut self.gates {
            match g.group {
                Some(id) => {
                    if prev != Some(id) {
                        next += 1;
                    }
                    prev = Some(id);
                    g.group = Some(next - 1);
                }
                None => prev = None,
            }
        }
    }

    pub fn next_group_id(&self) -> u32 {
        self.gates
            .iter()
            .filter_map(|g| g.group)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of two-qubit operators after full decomposition; see
    /// [`two_qubit_cost`].
    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().map(two_qubit_cost).sum()
    }

    pub fn virtual_count(&self) -> usize {
        self.gates.iter().filter(|g| g.op.is_virtual()).count()
    }

    pub fn gates_commute_at(&self, i: usize, j: usize) -> Result<bool> {
        let len = self.gates.len();
        for p in [i, j] {
            if p >= len {
                return Err(Error::PositionOutOfRange { position: p, len });
            }
        }
        Ok(gates_commute(&self.gates[i], &self.gates[j]))
    }

    /// True when no gate strictly between `from` and `to` targets `wire`.
    pub fn is_uninterrupted(&self, wire: usize, from: usize, to: usize) -> Result<bool> {
        let len = self.gates.len();
        for p in [from, to] {
            if p >= len {
                return Err(Error::PositionOutOfRange { position: p, len });
            }
        }
        if from >= to {
            return Err(Error::InvalidCircuit(format!(
                "interval [{from}, {to}] is empty"
            )));
        }
        if wire >= self.wires.len() {
            return Err(Error::InvalidCircuit(format!("no wire {wire}")));
        }
        Ok(!self.gates[from + 1..to].iter().any(|g| g.target == wire))
    }

    pub fn is_terminal(&self, gate: &Gate) -> bool {
        self.role(gate.target) == WireRole::Output
    }

    /// True when no control wire of any gate was altered by an earlier
    /// CNOT or NOT, i.e. no control is an XOR of other wires.
    pub fn is_linearized(&self) -> bool {
        let mut flipped = vec![false; self.wires.len()];
        for g in &self.gates {
            if g.control_wires().any(|w| flipped[w]) {
                return false;
            }
            if g.op == OpKind::X && g.controls.len() <= 1 {
                flipped[g.target] = true;
            }
        }
        true
    }

    /// Whether gate `j` can be moved directly after gate `i` using only
    /// commuting adjacent swaps. Gates inside a `∘`-group never move and
    /// nothing moves across them.
    pub fn can_move_left(&self, j: usize, i: usize) -> bool {
        if j <= i {
            return false;
        }
        let g = &self.gates[j];
        if g.group.is_some() && j > i + 1 {
            return false;
        }
        self.gates[i + 1..j]
            .iter()
            .all(|h| h.group.is_none() && gates_commute(g, h))
    }
}

/// Two-qubit operator cost: 0 for an uncontrolled gate, 1 for a singly
/// controlled gate, 5 per two-control Toffoli of the linear AND-chain for
/// a multi-controlled X, and compute/act/uncompute through an ancilla for
/// a multi-controlled V-family gate.
pub fn two_qubit_cost(g: &Gate) -> usize {
    let k = g.controls().len();
    match (k, g.op) {
        (0, _) => 0,
        (1, _) => 1,
        (_, OpKind::X) => 5 * (2 * (k - 2) + 1),
        _ => {
            let compute = 5 * (2 * (k - 2) + 1);
            2 * compute + 1
        }
    }
}

pub(crate) fn is_valid_wire_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| c.is_ascii_digit())
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_netlist(self))
    }
}

/// Netlist text: `wire <name> <role>` headers, then one gate per line as
/// `op target | +ctrl -ctrl [@group]`.
pub fn emit_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    for w in &c.wires {
        out.push_str(&format!("wire {} {}\n", w.name, w.role.netlist_name()));
    }
    for g in &c.gates {
        out.push_str(g.op.netlist_name());
        out.push(' ');
        out.push_str(&c.wires[g.target].name);
        out.push_str(" |");
        for ctl in &g.controls {
            out.push(' ');
            out.push(if ctl.polarity == Polarity::Positive { '+' } else { '-' });
            out.push_str(&c.wires[ctl.wire].name);
        }
        if let Some(id) = g.group {
            out.push_str(&format!(" @{id}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_netlist(text: &str) -> Result<Circuit, ParseError> {
    let mut c = Circuit::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let col_of = |token: &str| -> usize {
            (token.as_ptr() as usize - raw.as_ptr() as usize) + 1
        };
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        if head == "wire" {
            let name = tokens
                .next()
                .ok_or_else(|| ParseError::new(line_no, col_of(head), "missing wire name"))?;
            let role_tok = tokens
                .next()
                .ok_or_else(|| ParseError::new(line_no, col_of(name), "missing wire role"))?;
            let role = match role_tok {
                "input" => WireRole::Input,
                "ancilla" => WireRole::Ancilla,
                "output" => WireRole::Output,
                other => {
                    return Err(ParseError::new(
                        line_no,
                        col_of(role_tok),
                        format!("unknown role `{other}`"),
                    ))
                }
            };
            if let Some(extra) = tokens.next() {
                return Err(ParseError::new(line_no, col_of(extra), "trailing tokens"));
            }
            if !c.gates.is_empty() {
                return Err(ParseError::new(line_no, 1, "wire declared after gates"));
            }
            c.add_wire(name, role)
                .map_err(|e| ParseError::new(line_no, col_of(name), e.to_string()))?;
            continue;
        }
        let op = OpKind::from_netlist_name(head).ok_or_else(|| {
            ParseError::new(line_no, col_of(head), format!("unknown operator `{head}`"))
        })?;
        let lookup = |tok: &str, name: &str| {
            c.wire_index(name).ok_or_else(|| {
                ParseError::new(line_no, col_of(tok), format!("undeclared wire `{name}`"))
            })
        };
        let target_tok = tokens
            .next()
            .ok_or_else(|| ParseError::new(line_no, col_of(head), "missing target"))?;
        let target = lookup(target_tok, target_tok)?;
        let bar = tokens
            .next()
            .ok_or_else(|| ParseError::new(line_no, col_of(target_tok), "missing `|`"))?;
        if bar != "|" {
            return Err(ParseError::new(line_no, col_of(bar), "expected `|`"));
        }
        let mut controls = Vec::new();
        let mut group = None;
        for tok in tokens {
            if group.is_some() {
                return Err(ParseError::new(line_no, col_of(tok), "tokens after group tag"));
            }
            if let Some(id) = tok.strip_prefix('@') {
                group = Some(id.parse::<u32>().map_err(|_| {
                    ParseError::new(line_no, col_of(tok), "bad group id")
                })?);
                continue;
            }
            let (polarity, name) = match tok.split_at(1) {
                ("+", name) => (Polarity::Positive, name),
                ("-", name) => (Polarity::Negative, name),
                _ => {
                    return Err(ParseError::new(
                        line_no,
                        col_of(tok),
                        "control must start with `+` or `-`",
                    ))
                }
            };
            controls.push(Control::new(lookup(tok, name)?, polarity));
        }
        let gate = Gate::new(op, target, controls)
            .map_err(|e| ParseError::new(line_no, col_of(head), e.to_string()))?
            .with_group(group);
        c.gates.push(gate);
    }
    c.validate()
        .map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    Ok(c)
}
