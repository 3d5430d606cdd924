//! Two-control Toffoli gates as CNOT/CV/CV† sequences, and the Peres family.

use crate::circuit::{Circuit, Control, Gate, OpKind, WireRole};
use crate::classical::{decompose_classical, esop_to_cascade, BoundCheck, ClassicalOptions};
use crate::error::{Error, Result};
use crate::esop::EsopExpr;

fn check_two_controls(g: &Gate) -> Result<(Control, Control)> {
    if g.op != OpKind::X {
        return Err(Error::InvalidGate(format!(
            "expected a Toffoli (X) gate, found {:?}",
            g.op
        )));
    }
    match g.controls() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::ControlCount {
            expected: 2,
            found: other.len(),
        }),
    }
}

/// `a^V_t b^V_t (a+b)_b ∘ b^V†_t ∘ (a+b)_b`, where `a` is the lower wire.
///
/// The CNOT carries the first control's polarity, so after it wire `b`
/// holds `la ⊕ b`; the CV† then uses the second control's polarity and
/// fires on `la ⊕ lb`. The exponent of V on the target is
/// `la + lb - (la ⊕ lb) = 2·la·lb`.
pub fn toffoli_to_5gate(g: &Gate) -> Result<Vec<Gate>> {
    let (a, b) = check_two_controls(g)?;
    let t = g.target;
    let flip = Gate::cnot(Control::new(a.wire, a.polarity), b.wire);
    Ok(vec![
        Gate::cv(a, t),
        Gate::cv(b, t),
        flip.clone(),
        Gate::cvdg(Control::new(b.wire, b.polarity), t),
        flip,
    ])
}

/// The 5-gate form with each CNOT replaced by two CV gates.
pub fn toffoli_to_7gate(g: &Gate) -> Result<Vec<Gate>> {
    let five = toffoli_to_5gate(g)?;
    let mut out = Vec::with_capacity(7);
    for gate in five {
        if gate.op == OpKind::X {
            let half = Gate::build(OpKind::V, gate.target, gate.controls().to_vec());
            out.push(half.clone());
            out.push(half);
        } else {
            out.push(gate);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeresVariant {
    One,
    Two,
    Three,
}

impl TryFrom<u8> for PeresVariant {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            other => Err(Error::InvalidGate(format!("no Peres variant {other}"))),
        }
    }
}

/// Four-gate Peres circuit on wires `a, b, c` computing
/// `(a, a ⊕ b, ab ⊕ c)`. The variants permute V and V† placement.
pub fn peres(variant: PeresVariant) -> Circuit {
    let mut c = Circuit::with_wires([
        ("a".to_string(), WireRole::Input),
        ("b".to_string(), WireRole::Input),
        ("c".to_string(), WireRole::Output),
    ])
    .expect("fixed wires");
    let (a, b) = (Control::pos(0), Control::pos(1));
    let cnot = Gate::cnot(a, 1);
    c.gates = match variant {
        PeresVariant::One => vec![Gate::cv(a, 2), Gate::cv(b, 2), cnot, Gate::cvdg(b, 2)],
        PeresVariant::Two => vec![Gate::cvdg(a, 2), Gate::cvdg(b, 2), cnot, Gate::cv(b, 2)],
        PeresVariant::Three => vec![Gate::cv(b, 2), cnot, Gate::cvdg(b, 2), Gate::cv(a, 2)],
    };
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuantumOptions {
    /// Use the 7-gate CV/CV†-only form.
    pub cv_only: bool,
}

/// Replaces every two-control X gate by its CNOT/CV/CV† form. The
/// CNOT ∘ CV† ∘ CNOT core of each block becomes a `∘`-group; earlier group
/// tags are dropped. Gates with more than two controls are rejected.
pub fn decompose_quantum(c: &Circuit, opts: QuantumOptions) -> Result<Circuit> {
    let mut out = c.clone();
    out.gates.clear();
    let mut group = 0u32;
    for g in &c.gates {
        let n = g.controls().len();
        if g.op == OpKind::X && n > 2 {
            return Err(Error::ControlCount {
                expected: 2,
                found: n,
            });
        }
        if g.op != OpKind::X || n < 2 {
            out.gates.push(g.clone().with_group(None));
            continue;
        }
        let seq = if opts.cv_only {
            toffoli_to_7gate(g)?
        } else {
            toffoli_to_5gate(g)?
        };
        let core = if opts.cv_only { 2..7 } else { 2..5 };
        for (k, gate) in seq.into_iter().enumerate() {
            let tag = core.contains(&k).then_some(group);
            out.gates.push(gate.with_group(tag));
        }
        group += 1;
    }
    Ok(out)
}

/// Per-term bound on two-qubit operators: 1 for terms with at most one
/// literal, else `5·2^(n-2) + 1`.
pub fn quantum_bound_for_term(literals: usize) -> usize {
    if literals <= 1 {
        1
    } else {
        5 * (1usize << (literals - 2)) + 1
    }
}

/// Two-qubit operators after the ancilla chain (without uncompute, fresh
/// ancillas per term) and the 5-gate decomposition, against the summed
/// per-term bound.
pub fn check_upper_bound_ii(e: &EsopExpr) -> Result<BoundCheck> {
    let cascade = esop_to_cascade(e);
    let classical = decompose_classical(&cascade, ClassicalOptions { uncompute: false })?;
    let quantum = decompose_quantum(&classical, QuantumOptions::default())?;
    Ok(BoundCheck {
        actual: quantum.gate_count(),
        bound: e
            .terms()
            .iter()
            .map(|t| quantum_bound_for_term(t.len()))
            .sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esop::parse_esop;
    use crate::oracle::{circuit_unitary, Unitary, EQ_TOLERANCE};

    fn three_wires(gates: Vec<Gate>) -> Circuit {
        let mut c = peres(PeresVariant::One);
        c.gates = gates;
        c
    }

    /// Permutation matrix of a mixed-polarity Toffoli on (a, b, c), built
    /// directly from its truth table.
    fn toffoli_permutation(pa: bool, pb: bool) -> Unitary {
        let perm: Vec<usize> = (0..8)
            .map(|i| {
                let (a, b) = (i & 4 != 0, i & 2 != 0);
                if a == pa && b == pb {
                    i ^ 1
                } else {
                    i
                }
            })
            .collect();
        Unitary::from_permutation(3, &perm)
    }

    fn toffoli(pa: bool, pb: bool) -> Gate {
        let ctl = |w, p: bool| if p { Control::pos(w) } else { Control::neg(w) };
        Gate::x(2, vec![ctl(0, pa), ctl(1, pb)])
    }

    #[test]
    fn five_gate_forms_equal_every_polarity_pattern() {
        for (pa, pb) in [(true, true), (false, true), (true, false), (false, false)] {
            let seq = toffoli_to_5gate(&toffoli(pa, pb)).unwrap();
            assert_eq!(seq.len(), 5);
            let u = circuit_unitary(&three_wires(seq)).unwrap();
            assert!(u.approx_eq(&toffoli_permutation(pa, pb), EQ_TOLERANCE), "{pa} {pb}");
        }
    }

    #[test]
    fn positive_five_gate_shape() {
        let seq = toffoli_to_5gate(&toffoli(true, true)).unwrap();
        assert_eq!(
            seq,
            vec![
                Gate::cv(Control::pos(0), 2),
                Gate::cv(Control::pos(1), 2),
                Gate::cnot(Control::pos(0), 1),
                Gate::cvdg(Control::pos(1), 2),
                Gate::cnot(Control::pos(0), 1),
            ]
        );
    }

    #[test]
    fn sequence_twice_is_identity() {
        let mut seq = toffoli_to_5gate(&toffoli(true, true)).unwrap();
        seq.extend(seq.clone());
        let u = circuit_unitary(&three_wires(seq)).unwrap();
        assert!(u.approx_eq(&Unitary::identity(3), EQ_TOLERANCE));
    }

    #[test]
    fn seven_gate_forms_are_cv_only_and_exact() {
        for (pa, pb) in [(true, true), (false, true)] {
            let seq = toffoli_to_7gate(&toffoli(pa, pb)).unwrap();
            assert_eq!(seq.len(), 7);
            assert!(seq.iter().all(|g| g.op != OpKind::X));
            let u = circuit_unitary(&three_wires(seq)).unwrap();
            assert!(u.approx_eq(&toffoli_permutation(pa, pb), EQ_TOLERANCE));
        }
    }

    #[test]
    fn wrong_control_count_is_rejected() {
        let g = Gate::cnot(Control::pos(0), 2);
        assert!(matches!(
            toffoli_to_5gate(&g),
            Err(Error::ControlCount { expected: 2, found: 1 })
        ));
        assert!(toffoli_to_7gate(&g).is_err());
    }

    fn peres_permutation() -> Vec<usize> {
        (0..8)
            .map(|i| {
                let (a, b, c) = (i >> 2 & 1, i >> 1 & 1, i & 1);
                (a << 2) | ((a ^ b) << 1) | ((a & b) ^ c)
            })
            .collect()
    }

    #[test]
    fn peres_variants_share_cost_and_function() {
        for v in [PeresVariant::One, PeresVariant::Two, PeresVariant::Three] {
            let c = peres(v);
            assert_eq!(c.gate_count(), 4);
            let u = circuit_unitary(&c).unwrap();
            assert_eq!(u.as_permutation(EQ_TOLERANCE), Some(peres_permutation()));
        }
        assert!(PeresVariant::try_from(4).is_err());
    }

    #[test]
    fn peres_then_inverse_is_identity() {
        let c = peres(PeresVariant::One);
        let mut inv = c.clone();
        inv.gates = c
            .gates
            .iter()
            .rev()
            .map(|g| Gate::build(g.op.adjoint(), g.target, g.controls().to_vec()))
            .collect();
        let mut both = c.clone();
        both.gates.extend(inv.gates);
        assert!(circuit_unitary(&both)
            .unwrap()
            .approx_eq(&Unitary::identity(3), EQ_TOLERANCE));
    }

    #[test]
    fn bound_two_examples() {
        let single = check_upper_bound_ii(&parse_esop("ab").unwrap()).unwrap();
        assert_eq!((single.actual, single.bound), (5, 6));
        let two = check_upper_bound_ii(&parse_esop("ab ^ !cd").unwrap()).unwrap();
        assert_eq!(two.actual, 10);
        assert!(two.holds());
        let zero = check_upper_bound_ii(&parse_esop("").unwrap()).unwrap();
        assert_eq!((zero.actual, zero.bound), (0, 0));
    }

    #[test]
    fn decompose_groups_the_cnot_core() {
        let e = parse_esop("ab ^ c").unwrap();
        let c = decompose_quantum(&esop_to_cascade(&e), QuantumOptions::default()).unwrap();
        assert_eq!(c.gate_count(), 6);
        let groups: Vec<Option<u32>> = c.gates.iter().map(|g| g.group).collect();
        assert_eq!(groups, vec![None, None, Some(0), Some(0), Some(0), None]);
        c.validate().unwrap();
    }
}
