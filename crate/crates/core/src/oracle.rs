//! Exact dense-unitary simulation used as ground truth for every rewrite.
//!
//! Wire 0 is the most significant bit of a basis index. A gate's matrix is
//! applied on the target whenever its control predicate holds.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, OpKind, WireRole};
use crate::error::{Error, Result};

/// Hard limit on wires for full unitaries (4096 x 4096 complex entries).
pub const MAX_UNITARY_QUBITS: usize = 12;
/// Default cap used by the command-line driver.
pub const DEFAULT_MAX_QUBITS: usize = 10;
/// Limit for state-vector simulation of basis inputs.
pub const MAX_STATE_QUBITS: usize = 20;

pub const EQ_TOLERANCE: f64 = 1e-10;
pub const ALGEBRA_TOLERANCE: f64 = 1e-12;

const HALF: f64 = 0.5;

pub type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn v_matrix() -> Matrix2 {
    [
        [c(HALF, HALF), c(HALF, -HALF)],
        [c(HALF, -HALF), c(HALF, HALF)],
    ]
}

pub fn vdg_matrix() -> Matrix2 {
    [
        [c(HALF, -HALF), c(HALF, HALF)],
        [c(HALF, HALF), c(HALF, -HALF)],
    ]
}

pub fn x_matrix() -> Matrix2 {
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
}

pub fn identity2() -> Matrix2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn op_matrix(op: OpKind) -> Matrix2 {
    match op {
        OpKind::X => x_matrix(),
        OpKind::V | OpKind::VirtV => v_matrix(),
        OpKind::Vdg | OpKind::VirtVdg => vdg_matrix(),
    }
}

pub fn mul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger2(a: &Matrix2) -> Matrix2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn max_diff2(a: &Matrix2, b: &Matrix2) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Checks the square-root-of-NOT identities of V and V† entrywise.
pub fn operator_self_test() -> Result<()> {
    let (v, vd, x, i) = (v_matrix(), vdg_matrix(), x_matrix(), identity2());
    let checks: [(&str, Matrix2, Matrix2); 9] = [
        ("V*V = NOT", mul2(&v, &v), x),
        ("V†*V† = NOT", mul2(&vd, &vd), x),
        ("V*V† = I", mul2(&v, &vd), i),
        ("V†*V = I", mul2(&vd, &v), i),
        ("V*NOT = V†", mul2(&v, &x), vd),
        ("NOT*V = V†", mul2(&x, &v), vd),
        ("V†*NOT = V", mul2(&vd, &x), v),
        ("NOT*V† = V", mul2(&x, &vd), v),
        ("V† is the conjugate transpose of V", dagger2(&v), vd),
    ];
    for (name, got, want) in checks {
        let d = max_diff2(&got, &want);
        if d > ALGEBRA_TOLERANCE {
            return Err(Error::SelfTest(format!("{name}: deviation {d:e}")));
        }
    }
    Ok(())
}

/// Dense square matrix of dimension 2^n, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    qubits: usize,
    data: Vec<Complex64>,
}

impl Unitary {
    pub fn identity(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            data[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        Self { qubits, data }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|r| self.get(r, col)).collect()
    }

    /// `self * other`.
    pub fn mul(&self, other: &Unitary) -> Unitary {
        assert_eq!(self.qubits, other.qubits);
        let dim = self.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.data[i * dim + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    data[i * dim + j] += a * other.data[k * dim + j];
                }
            }
        }
        Unitary {
            qubits: self.qubits,
            data,
        }
    }

    pub fn dagger(&self) -> Unitary {
        let dim = self.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[j * dim + i] = self.data[i * dim + j].conj();
            }
        }
        Unitary {
            qubits: self.qubits,
            data,
        }
    }

    pub fn max_diff(&self, other: &Unitary) -> f64 {
        if self.qubits != other.qubits {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Unitary, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.dagger())
            .approx_eq(&Unitary::identity(self.qubits), tol)
    }

    /// When every column holds a single entry of magnitude 1, returns the
    /// basis permutation `col -> row`.
    pub fn as_permutation(&self, tol: f64) -> Option<Vec<usize>> {
        let dim = self.dim();
        (0..dim)
            .map(|col| {
                let mut hit = None;
                for row in 0..dim {
                    let v = self.get(row, col);
                    if (v - Complex64::new(1.0, 0.0)).norm() <= tol {
                        if hit.is_some() {
                            return None;
                        }
                        hit = Some(row);
                    } else if v.norm() > tol {
                        return None;
                    }
                }
                hit
            })
            .collect()
    }

    /// Permutation matrix with `col -> perm[col]`.
    pub fn from_permutation(qubits: usize, perm: &[usize]) -> Self {
        let dim = 1usize << qubits;
        assert_eq!(perm.len(), dim);
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (col, &row) in perm.iter().enumerate() {
            data[row * dim + col] = Complex64::new(1.0, 0.0);
        }
        Self { qubits, data }
    }
}

#[inline]
fn bit_of(qubits: usize, wire: usize) -> usize {
    1 << (qubits - 1 - wire)
}

/// Applies one gate in place to a state vector over `qubits` wires.
pub fn apply_gate(state: &mut [Complex64], qubits: usize, gate: &Gate) {
    let m = op_matrix(gate.op);
    let tbit = bit_of(qubits, gate.target);
    let (mut need, mut mask) = (0usize, 0usize);
    for ctl in gate.controls() {
        let b = bit_of(qubits, ctl.wire);
        mask |= b;
        if ctl.polarity.active_value() {
            need |= b;
        }
    }
    for idx in 0..state.len() {
        if idx & tbit != 0 || idx & mask != need {
            continue;
        }
        let j = idx | tbit;
        let (s0, s1) = (state[idx], state[j]);
        state[idx] = m[0][0] * s0 + m[0][1] * s1;
        state[j] = m[1][0] * s0 + m[1][1] * s1;
    }
}

fn check_qubits(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::TooManyQubits { qubits: n, limit });
    }
    Ok(())
}

/// Unitary of the circuit, gates applied left to right.
pub fn circuit_unitary(c: &Circuit) -> Result<Unitary> {
    circuit_unitary_capped(c, MAX_UNITARY_QUBITS)
}

pub fn circuit_unitary_capped(c: &Circuit, max_qubits: usize) -> Result<Unitary> {
    let n = c.num_wires();
    check_qubits(n, max_qubits.min(MAX_UNITARY_QUBITS))?;
    let dim = 1usize << n;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    for col in 0..dim {
        state.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        state[col] = Complex64::new(1.0, 0.0);
        for g in &c.gates {
            apply_gate(&mut state, n, g);
        }
        for (row, amp) in state.iter().enumerate() {
            data[row * dim + col] = *amp;
        }
    }
    Ok(Unitary { qubits: n, data })
}

/// Basis index for an assignment of the input wires (first input wire is
/// the most significant assignment bit); ancillas and outputs start at 0.
pub fn basis_index(c: &Circuit, assignment: usize) -> usize {
    let n = c.num_wires();
    let inputs = c.inputs();
    let k = inputs.len();
    inputs.iter().enumerate().fold(0, |acc, (pos, &w)| {
        if (assignment >> (k - 1 - pos)) & 1 == 1 {
            acc | bit_of(n, w)
        } else {
            acc
        }
    })
}

pub fn simulate_basis(c: &Circuit, assignment: usize) -> Result<Vec<Complex64>> {
    let n = c.num_wires();
    check_qubits(n, MAX_STATE_QUBITS)?;
    let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
    state[basis_index(c, assignment)] = Complex64::new(1.0, 0.0);
    for g in &c.gates {
        apply_gate(&mut state, n, g);
    }
    Ok(state)
}

/// Definite value of every wire, or `None` for wires in superposition.
pub fn definite_wire_values(state: &[Complex64], qubits: usize) -> Vec<Option<bool>> {
    (0..qubits)
        .map(|w| {
            let b = bit_of(qubits, w);
            let p1: f64 = state
                .iter()
                .enumerate()
                .filter(|(i, _)| i & b != 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if p1 <= EQ_TOLERANCE {
                Some(false)
            } else if p1 >= 1.0 - EQ_TOLERANCE {
                Some(true)
            } else {
                None
            }
        })
        .collect()
}

/// Output-wire bit for an input assignment with ancillas at 0. The final
/// state must be a single basis vector.
pub fn boolean_output(c: &Circuit, assignment: usize) -> Result<bool> {
    let out = c
        .output()
        .ok_or_else(|| Error::InvalidCircuit("circuit has no output wire".into()))?;
    let state = simulate_basis(c, assignment)?;
    let (idx, amp) = state
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty state");
    if (amp.norm_sqr() - 1.0).abs() > EQ_TOLERANCE {
        return Err(Error::NonClassicalOutput { assignment });
    }
    Ok(idx & bit_of(c.num_wires(), out) != 0)
}

/// Boolean function realized on the output wire, indexed like
/// [`crate::esop::EsopExpr::truth_table`].
pub fn output_truth_table(c: &Circuit) -> Result<Vec<bool>> {
    let k = c.inputs().len();
    if k > MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: k,
            limit: MAX_STATE_QUBITS,
        });
    }
    (0..1usize << k).map(|a| boolean_output(c, a)).collect()
}

/// Per input assignment, per gate boundary `p` (state before gate `p`;
/// `p == len` is the final state), the definite value of every wire.
pub fn classical_trace(c: &Circuit) -> Result<Vec<Vec<Vec<Option<bool>>>>> {
    let n = c.num_wires();
    check_qubits(n, MAX_STATE_QUBITS)?;
    let k = c.inputs().len();
    let mut all = Vec::with_capacity(1 << k);
    for a in 0..1usize << k {
        let mut state = vec![Complex64::new(0.0, 0.0); 1 << n];
        state[basis_index(c, a)] = Complex64::new(1.0, 0.0);
        let mut per_pos = Vec::with_capacity(c.gates.len() + 1);
        per_pos.push(definite_wire_values(&state, n));
        for g in &c.gates {
            apply_gate(&mut state, n, g);
            per_pos.push(definite_wire_values(&state, n));
        }
        all.push(per_pos);
    }
    Ok(all)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum EquivalenceMode {
    /// Entrywise equality of full unitaries.
    Exact,
    /// Same Boolean function on the output wire, ancillas starting at 0.
    OutputWire,
    /// Equal unitaries restricted to columns where every ancilla is 0.
    Ancilla0Subspace,
}

impl std::str::FromStr for EquivalenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "output-wire" => Ok(Self::OutputWire),
            "ancilla0-subspace" | "ancilla0" => Ok(Self::Ancilla0Subspace),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

fn names_with_role(c: &Circuit, role: WireRole) -> Vec<&str> {
    c.wires()
        .iter()
        .filter(|w| w.role == role)
        .map(|w| w.name.as_str())
        .collect()
}

pub fn equivalent(a: &Circuit, b: &Circuit, mode: EquivalenceMode) -> Result<bool> {
    equivalent_capped(a, b, mode, MAX_UNITARY_QUBITS)
}

pub fn equivalent_capped(
    a: &Circuit,
    b: &Circuit,
    mode: EquivalenceMode,
    max_qubits: usize,
) -> Result<bool> {
    match mode {
        EquivalenceMode::Exact | EquivalenceMode::Ancilla0Subspace => {
            if a.wires() != b.wires() {
                return Err(Error::IncompatibleWires(
                    "full-unitary comparison needs identical wire tables".into(),
                ));
            }
            let (ua, ub) = (
                circuit_unitary_capped(a, max_qubits)?,
                circuit_unitary_capped(b, max_qubits)?,
            );
            if mode == EquivalenceMode::Exact {
                return Ok(ua.approx_eq(&ub, EQ_TOLERANCE));
            }
            let n = a.num_wires();
            let anc_mask = a
                .ancillas()
                .iter()
                .fold(0, |m, &w| m | bit_of(n, w));
            for col in (0..ua.dim()).filter(|col| col & anc_mask == 0) {
                for row in 0..ua.dim() {
                    if (ua.get(row, col) - ub.get(row, col)).norm() > EQ_TOLERANCE {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        EquivalenceMode::OutputWire => {
            for role in [WireRole::Input, WireRole::Output] {
                if names_with_role(a, role) != names_with_role(b, role) {
                    return Err(Error::IncompatibleWires(format!(
                        "{} wires differ",
                        role.netlist_name()
                    )));
                }
            }
            Ok(output_truth_table(a)? == output_truth_table(b)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Control;

    fn circuit(names: &[(&str, WireRole)], gates: Vec<Gate>) -> Circuit {
        let mut c = Circuit::with_wires(names.iter().map(|(n, r)| (n.to_string(), *r))).unwrap();
        for g in gates {
            c.push(g).unwrap();
        }
        c
    }

    #[test]
    fn self_test_passes() {
        operator_self_test().unwrap();
    }

    #[test]
    fn controlled_v_is_block_diagonal() {
        let c = circuit(
            &[("a", WireRole::Input), ("b", WireRole::Output)],
            vec![Gate::cv(Control::pos(0), 1)],
        );
        let u = circuit_unitary(&c).unwrap();
        let v = v_matrix();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let expected = [
            [one, zero, zero, zero],
            [zero, one, zero, zero],
            [zero, zero, v[0][0], v[0][1]],
            [zero, zero, v[1][0], v[1][1]],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (col, want) in row.iter().enumerate() {
                assert!((u.get(r, col) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = circuit(
            &[("a", WireRole::Input), ("b", WireRole::Input), ("t", WireRole::Output)],
            vec![],
        );
        assert!(circuit_unitary(&c).unwrap().approx_eq(&Unitary::identity(3), 0.0));
    }

    #[test]
    fn two_cv_make_a_cnot() {
        let names = [("a", WireRole::Input), ("b", WireRole::Output)];
        let twice = circuit(&names, vec![Gate::cv(Control::pos(0), 1), Gate::cv(Control::pos(0), 1)]);
        let cnot = circuit(&names, vec![Gate::cnot(Control::pos(0), 1)]);
        assert!(equivalent(&twice, &cnot, EquivalenceMode::Exact).unwrap());
    }

    #[test]
    fn negative_control_fires_on_zero() {
        let c = circuit(
            &[("a", WireRole::Input), ("t", WireRole::Output)],
            vec![Gate::cnot(Control::neg(0), 1)],
        );
        assert_eq!(output_truth_table(&c).unwrap(), vec![true, false]);
    }

    #[test]
    fn non_classical_output_is_reported() {
        let c = circuit(
            &[("a", WireRole::Input), ("t", WireRole::Output)],
            vec![Gate::cv(Control::pos(0), 1)],
        );
        assert!(!boolean_output(&c, 0).unwrap());
        assert!(matches!(
            boolean_output(&c, 1),
            Err(Error::NonClassicalOutput { assignment: 1 })
        ));
    }

    #[test]
    fn qubit_limit_is_enforced() {
        let names: Vec<(String, WireRole)> =
            (0..13).map(|i| (format!("q{i}"), WireRole::Input)).collect();
        let c = Circuit::with_wires(names).unwrap();
        assert!(matches!(circuit_unitary(&c), Err(Error::TooManyQubits { .. })));
        assert!(circuit_unitary_capped(&c, 4).is_err());
    }

    #[test]
    fn incompatible_wires_are_rejected() {
        let a = circuit(&[("a", WireRole::Input), ("t", WireRole::Output)], vec![]);
        let b = circuit(&[("b", WireRole::Input), ("t", WireRole::Output)], vec![]);
        assert!(equivalent(&a, &b, EquivalenceMode::Exact).is_err());
        assert!(equivalent(&a, &b, EquivalenceMode::OutputWire).is_err());
    }

    #[test]
    fn ancilla_subspace_ignores_dirty_columns() {
        let names = [("a", WireRole::Input), ("t", WireRole::Output), ("t1", WireRole::Ancilla)];
        // Differs only when the ancilla starts at 1.
        let plain = circuit(&names, vec![Gate::cnot(Control::pos(0), 1)]);
        let odd = circuit(
            &names,
            vec![Gate::cnot(Control::pos(0), 1), Gate::cnot(Control::pos(2), 1)],
        );
        assert!(equivalent(&plain, &odd, EquivalenceMode::Ancilla0Subspace).unwrap());
        assert!(!equivalent(&plain, &odd, EquivalenceMode::Exact).unwrap());
    }
}
