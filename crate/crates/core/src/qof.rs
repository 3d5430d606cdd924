//! Plain-text quantum operator form.
//!
//! ```text
//! # wires: a b c t:out t1:anc
//! a^V_t (+) b^V_t [ (a+b)_b o b^V+_t o (a+b)_b ]
//! ```
//!
//! A gate is `controls^OP_target` with controls written as concatenated
//! wire names (`!` negates, `1` for none) and OP one of `X`, `V`, `V+`,
//! `~V`, `~V+`. A singly controlled X is written `(c+t)_t`. A `∘`-group is
//! `[ g o g ... ]`. Neighbouring gates on the output wire are joined by
//! `(+)`, other items by a space.

use std::fmt::Write as _;

use crate::circuit::{is_valid_wire_name, Circuit, Control, Gate, OpKind, WireRole};
use crate::error::ParseError;
use crate::esop::Polarity;

fn op_suffix(op: OpKind) -> &'static str {
    match op {
        OpKind::X => "X",
        OpKind::V => "V",
        OpKind::Vdg => "V+",
        OpKind::VirtV => "~V",
        OpKind::VirtVdg => "~V+",
    }
}

fn op_from_suffix(s: &str) -> Option<OpKind> {
    Some(match s {
        "X" => OpKind::X,
        "V" => OpKind::V,
        "V+" => OpKind::Vdg,
        "~V" => OpKind::VirtV,
        "~V+" => OpKind::VirtVdg,
        _ => return None,
    })
}

fn literal(c: &Circuit, ctl: &Control) -> String {
    let name = &c.wires()[ctl.wire].name;
    match ctl.polarity {
        Polarity::Positive => name.clone(),
        Polarity::Negative => format!("!{name}"),
    }
}

/// One gate as a QOF term.
pub fn emit_gate(c: &Circuit, g: &Gate) -> String {
    let target = &c.wires()[g.target].name;
    if let (OpKind::X, [ctl]) = (g.op, g.controls()) {
        return format!("({}+{target})_{target}", literal(c, ctl));
    }
    let controls = if g.controls().is_empty() {
        "1".to_string()
    } else {
        g.controls().iter().map(|ctl| literal(c, ctl)).collect()
    };
    format!("{controls}^{}_{target}", op_suffix(g.op))
}

fn header(c: &Circuit) -> String {
    let mut out = String::from("# wires:");
    for w in c.wires() {
        let _ = write!(out, " {}", w.name);
        match w.role {
            WireRole::Input => {}
            WireRole::Output => out.push_str(":out"),
            WireRole::Ancilla => out.push_str(":anc"),
        }
    }
    out
}

/// Header line with the wire table, then the gate expression on one line.
pub fn emit_qof(c: &Circuit) -> String {
    let mut items: Vec<(String, bool)> = Vec::new();
    let mut i = 0;
    while i < c.gates.len() {
        let g = &c.gates[i];
        match g.group {
            Some(id) => {
                let mut parts = Vec::new();
                while i < c.gates.len() && c.gates[i].group == Some(id) {
                    parts.push(emit_gate(c, &c.gates[i]));
                    i += 1;
                }
                items.push((format!("[ {} ]", parts.join(" o ")), false));
            }
            None => {
                items.push((emit_gate(c, g), c.is_terminal(g)));
                i += 1;
            }
        }
    }
    let mut body = String::new();
    for (k, (text, terminal)) in items.iter().enumerate() {
        if k > 0 {
            body.push_str(if *terminal && items[k - 1].1 { " (+) " } else { " " });
        }
        body.push_str(text);
    }
    format!("{}\n{}\n", header(c), body)
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> (Option<Token<'_>>, Vec<Token<'_>>) {
    let mut header = None;
    let mut tokens = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix("# wires:") {
            if header.is_none() && tokens.is_empty() {
                header = Some(Token {
                    text: rest,
                    line,
                    column: raw.len() - rest.len() + 1,
                });
            }
            continue;
        }
        let body = raw.split('#').next().unwrap_or("");
        let mut start = None;
        for (pos, ch) in body.char_indices().chain([(body.len(), ' ')]) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push(Token {
                        text: &body[s..pos],
                        line,
                        column: s + 1,
                    });
                    start = None;
                }
                _ => {}
            }
        }
    }
    (header, tokens)
}

fn parse_header(tok: &Token<'_>) -> Result<Circuit, ParseError> {
    let mut c = Circuit::new();
    for entry in tok.text.split_whitespace() {
        let column = tok.column + (entry.as_ptr() as usize - tok.text.as_ptr() as usize);
        let (name, role) = match entry.split_once(':') {
            None => (entry, WireRole::Input),
            Some((n, "out")) => (n, WireRole::Output),
            Some((n, "anc")) => (n, WireRole::Ancilla),
            Some((_, r)) => {
                return Err(ParseError::new(tok.line, column, format!("unknown wire role `{r}`")))
            }
        };
        c.add_wire(name, role)
            .map_err(|e| ParseError::new(tok.line, column, e.to_string()))?;
    }
    Ok(c)
}

/// Wire table for text without a header: inputs in name order, then `t`,
/// then ancillas `t<k>` by number.
fn infer_wires(tokens: &[Token<'_>]) -> Result<Circuit, ParseError> {
    let mut names = std::collections::BTreeSet::new();
    for tok in tokens.iter().filter(|t| !["[", "]", "o", "(+)"].contains(&t.text)) {
        for name in tok
            .text
            .split(|ch: char| !ch.is_ascii_alphanumeric())
            .flat_map(split_names)
        {
            if name.starts_with(|ch: char| ch.is_ascii_lowercase()) {
                names.insert(name.to_string());
            }
        }
    }
    let role = |n: &str| match n {
        "t" => WireRole::Output,
        _ if n.len() > 1 && n.starts_with('t') => WireRole::Ancilla,
        _ => WireRole::Input,
    };
    let ancilla_num = |n: &str| n[1..].parse::<u64>().unwrap_or(u64::MAX);
    let mut inputs: Vec<&String> = names.iter().filter(|n| role(n) == WireRole::Input).collect();
    inputs.sort();
    let mut ancillas: Vec<&String> = names.iter().filter(|n| role(n) == WireRole::Ancilla).collect();
    ancillas.sort_by_key(|n| ancilla_num(n));
    let mut c = Circuit::new();
    let outputs = names.iter().filter(|n| role(n) == WireRole::Output);
    for n in inputs.into_iter().chain(outputs).chain(ancillas) {
        c.add_wire(n.clone(), role(n))
            .map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    }
    Ok(c)
}

/// Splits a run like `ab12c` into `a`, `b12`, `c`.
fn split_names(run: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (pos, ch) in run.char_indices().skip(1) {
        if ch.is_ascii_alphabetic() {
            out.push(&run[start..pos]);
            start = pos;
        }
    }
    if !run.is_empty() {
        out.push(&run[start..]);
    }
    out
}

struct GateParser<'c, 't> {
    circuit: &'c Circuit,
    tok: &'t Token<'t>,
}

impl GateParser<'_, '_> {
    fn err(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.tok.line, self.tok.column + offset, msg)
    }

    fn wire(&self, name: &str, offset: usize) -> Result<usize, ParseError> {
        if !is_valid_wire_name(name) {
            return Err(self.err(offset, format!("invalid wire name `{name}`")));
        }
        self.circuit
            .wire_index(name)
            .ok_or_else(|| self.err(offset, format!("unknown wire `{name}`")))
    }

    /// Parses `!a b12 !c` written without spaces.
    fn literals(&self, s: &str, offset: usize) -> Result<Vec<Control>, ParseError> {
        let bytes = s.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let negated = bytes[i] == b'!';
            if negated {
                i += 1;
            }
            let start = i;
            if i >= bytes.len() || !bytes[i].is_ascii_lowercase() {
                return Err(self.err(offset + i, "expected a wire name"));
            }
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let w = self.wire(&s[start..i], offset + start)?;
            out.push(Control::new(w, Polarity::from_active_value(!negated)));
        }
        if out.is_empty() {
            return Err(self.err(offset, "empty control list"));
        }
        Ok(out)
    }

    fn gate(&self) -> Result<Gate, ParseError> {
        let s = self.tok.text;
        let (head, target) = s
            .rsplit_once('_')
            .ok_or_else(|| self.err(0, format!("expected `_target` in `{s}`")))?;
        let target_off = head.len() + 1;
        let target = self.wire(target, target_off)?;
        let (op, controls) = if let Some(inner) = head.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| self.err(head.len(), "expected `)`"))?;
            let (ctl, tgt) = inner
                .split_once('+')
                .ok_or_else(|| self.err(1, "expected `control+target`"))?;
            if self.wire(tgt, 2 + ctl.len())? != target {
                return Err(self.err(2 + ctl.len(), "CNOT target mismatch"));
            }
            let controls = self.literals(ctl, 1)?;
            if controls.len() != 1 {
                return Err(self.err(1, "a CNOT has exactly one control"));
            }
            (OpKind::X, controls)
        } else {
            let (ctl, op) = head
                .split_once('^')
                .ok_or_else(|| self.err(0, format!("expected `^` in `{s}`")))?;
            let op = op_from_suffix(op)
                .ok_or_else(|| self.err(ctl.len() + 1, format!("unknown operator `{op}`")))?;
            let controls = if ctl == "1" {
                Vec::new()
            } else {
                self.literals(ctl, 0)?
            };
            (op, controls)
        };
        Gate::new(op, target, controls).map_err(|e| self.err(0, e.to_string()))
    }
}

/// Inverse of [`emit_qof`]. Groups are numbered in order of appearance.
pub fn parse_qof(text: &str) -> Result<Circuit, ParseError> {
    let (header, tokens) = tokenize(text);
    let mut c = match &header {
        Some(h) => parse_header(h)?,
        None => infer_wires(&tokens)?,
    };
    let mut group: Option<u32> = None;
    let mut next_group = 0;
    // After an item, a separator is allowed; inside a group `o` must sit
    // between gates.
    let mut expect_gate = false;
    let mut after_item = false;
    for tok in &tokens {
        let err = |msg: &str| ParseError::new(tok.line, tok.column, msg);
        match tok.text {
            "[" => {
                if group.is_some() {
                    return Err(err("nested group"));
                }
                group = Some(next_group);
                next_group += 1;
                expect_gate = true;
                after_item = false;
            }
            "]" => {
                if group.is_none() {
                    return Err(err("`]` without `[`"));
                }
                if expect_gate {
                    return Err(err("group must end with a gate"));
                }
                group = None;
                after_item = true;
            }
            "o" => {
                if group.is_none() || expect_gate {
                    return Err(err("`o` must separate gates inside a group"));
                }
                expect_gate = true;
            }
            "(+)" => {
                if group.is_some() || !after_item {
                    return Err(err("`(+)` must separate top-level items"));
                }
                after_item = false;
                expect_gate = true;
            }
            _ => {
                if group.is_some() && !expect_gate {
                    return Err(err("expected `o` between grouped gates"));
                }
                let g = GateParser { circuit: &c, tok }.gate()?;
                c.gates.push(g.with_group(group));
                expect_gate = false;
                after_item = group.is_none();
            }
        }
    }
    if group.is_some() {
        let (line, column) = tokens.last().map_or((1, 1), |t| (t.line, t.column));
        return Err(ParseError::new(line, column, "unclosed group"));
    }
    if expect_gate && !tokens.is_empty() {
        let last = tokens.last().expect("non-empty");
        return Err(ParseError::new(last.line, last.column, "dangling separator"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wires(spec: &[(&str, WireRole)]) -> Circuit {
        Circuit::with_wires(spec.iter().map(|(n, r)| (n.to_string(), *r))).unwrap()
    }

    fn abdt() -> Circuit {
        wires(&[
            ("a", WireRole::Input),
            ("b", WireRole::Input),
            ("d", WireRole::Input),
            ("t", WireRole::Output),
        ])
    }

    #[test]
    fn gate_terms() {
        let c = abdt();
        assert_eq!(emit_gate(&c, &Gate::cv(Control::pos(0), 3)), "a^V_t");
        let multi = Gate::build(OpKind::V, 3, vec![Control::pos(0), Control::pos(1), Control::pos(2)]);
        assert_eq!(emit_gate(&c, &multi), "abd^V_t");
        assert_eq!(emit_gate(&c, &Gate::cnot(Control::pos(0), 1)), "(a+b)_b");
        assert_eq!(emit_gate(&c, &Gate::cnot(Control::neg(0), 1)), "(!a+b)_b");
        assert_eq!(emit_gate(&c, &Gate::x(3, vec![])), "1^X_t");
        let virt = Gate::build(OpKind::VirtVdg, 3, vec![Control::neg(0), Control::pos(1)]);
        assert_eq!(emit_gate(&c, &virt), "!ab^~V+_t");
    }

    #[test]
    fn single_term_without_header() {
        let c = parse_qof("a^V_t").unwrap();
        assert_eq!(c.wires().len(), 2);
        assert_eq!(c.gates, vec![Gate::cv(Control::pos(0), 1)]);
        assert_eq!(c.role(1), WireRole::Output);
    }

    #[test]
    fn group_parses_as_three_gates() {
        let c = parse_qof("[ (a+b)_b o b^V+_t o (a+b)_b ]").unwrap();
        assert_eq!(c.gates.len(), 3);
        assert!(c.gates.iter().all(|g| g.group == Some(0)));
        assert_eq!(c.gates[1], Gate::cvdg(Control::pos(1), 2).with_group(Some(0)));
    }

    #[test]
    fn syntax_errors() {
        for bad in ["a^^V", "a^V", "a^W_t", "[ a^V_t", "a^V_t ]", "[ o a^V_t ]", "(+) a^V_t", "a^V_t (+)", "[ a^V_t b^V_t ]", "(a+b)_t"] {
            assert!(parse_qof(bad).is_err(), "{bad}");
        }
        let e = parse_qof("a^V_t\n  a^^V").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn round_trip_with_groups_ancillas_and_output_joins() {
        let mut c = wires(&[
            ("a", WireRole::Input),
            ("b", WireRole::Input),
            ("t", WireRole::Output),
            ("t1", WireRole::Ancilla),
        ]);
        c.gates = vec![
            Gate::cv(Control::pos(0), 2),
            Gate::cv(Control::neg(1), 2),
            Gate::cnot(Control::pos(0), 1).with_group(Some(0)),
            Gate::cvdg(Control::pos(1), 3).with_group(Some(0)),
            Gate::cnot(Control::pos(0), 1).with_group(Some(0)),
            Gate::build(OpKind::VirtV, 2, vec![Control::pos(0), Control::pos(3)]),
        ];
        let text = emit_qof(&c);
        assert_eq!(
            text,
            "# wires: a b t:out t1:anc\na^V_t (+) !b^V_t [ (a+b)_b o b^V+_t1 o (a+b)_b ] at1^~V_t\n"
        );
        assert_eq!(parse_qof(&text).unwrap(), c);
    }

    #[test]
    fn empty_circuit_round_trips() {
        let c = abdt();
        assert_eq!(parse_qof(&emit_qof(&c)).unwrap(), c);
    }

    #[test]
    fn inferred_wire_order() {
        let c = parse_qof("t1b^V_t (+) (a+t1)_t1").unwrap();
        let names: Vec<&str> = c.wires().iter().map(|w| w.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "t", "t1"]);
    }
}
