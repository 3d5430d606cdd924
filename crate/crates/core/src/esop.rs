//! Exclusive-or sum of products expressions and Reed-Muller forms.
//!
//! An [`EsopExpr`] is an XOR of [`ProductTerm`]s over a fixed number of
//! variables. Expressions are always kept normalized: terms are sorted by
//! the total order on [`ProductTerm`] and pairs of identical terms cancel.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;

use crate::error::{Error, ParseError, Result};

/// Largest arity accepted by [`EsopExpr::truth_table`].
pub const MAX_TRUTH_TABLE_ARITY: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    /// Value the variable must take for the literal to be true.
    pub fn active_value(self) -> bool {
        self == Polarity::Positive
    }

    pub fn from_active_value(value: bool) -> Self {
        if value {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub polarity: Polarity,
}

impl Literal {
    pub fn positive(var: usize) -> Self {
        Self {
            var,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(var: usize) -> Self {
        Self {
            var,
            polarity: Polarity::Negative,
        }
    }

    pub fn eval(&self, value: bool) -> bool {
        value == self.polarity.active_value()
    }
}

/// Name of variable `var` in the text grammar: `a`..`z`, then `x26`, `x27`, ...
pub fn var_name(var: usize) -> String {
    if var < 26 {
        ((b'a' + var as u8) as char).to_string()
    } else {
        format!("x{var}")
    }
}

/// A product of literals, at most one per variable, in ascending variable
/// order. The empty product is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductTerm {
    literals: Vec<Literal>,
}

impl ProductTerm {
    pub fn one() -> Self {
        Self {
            literals: Vec::new(),
        }
    }

    /// Builds a term, rejecting a variable that appears twice.
    pub fn new(mut literals: Vec<Literal>) -> Result<Self> {
        literals.sort();
        for pair in literals.windows(2) {
            if pair[0].var == pair[1].var {
                return Err(Error::InvalidGate(format!(
                    "variable {} appears twice in one term",
                    var_name(pair[0].var)
                )));
            }
        }
        Ok(Self { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.literals.last().map(|l| l.var)
    }

    /// Evaluates the term on an assignment given as a bit mask where
    /// variable 0 is the most significant of `arity` bits.
    pub fn eval(&self, assignment: usize, arity: usize) -> bool {
        self.literals
            .iter()
            .all(|l| l.eval((assignment >> (arity - 1 - l.var)) & 1 == 1))
    }

    fn without_var(&self, var: usize) -> Self {
        Self {
            literals: self
                .literals
                .iter()
                .copied()
                .filter(|l| l.var != var)
                .collect(),
        }
    }

    /// If the two terms have the same support and differ in the polarity of
    /// exactly one variable, returns that variable.
    pub fn single_polarity_difference(&self, other: &Self) -> Option<usize> {
        if self.literals.len() != other.literals.len() {
            return None;
        }
        let mut diff = None;
        for (a, b) in self.literals.iter().zip(&other.literals) {
            if a.var != b.var {
                return None;
            }
            if a.polarity != b.polarity {
                if diff.is_some() {
                    return None;
                }
                diff = Some(a.var);
            }
        }
        diff
    }
}

impl Ord for ProductTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic over (var, polarity) pairs, then by length.
        for (a, b) in self.literals.iter().zip(&other.literals) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.literals.len().cmp(&other.literals.len())
    }
}

impl PartialOrd for ProductTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ProductTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("1");
        }
        for lit in &self.literals {
            if lit.polarity == Polarity::Negative {
                f.write_str("!")?;
            }
            f.write_str(&var_name(lit.var))?;
        }
        Ok(())
    }
}

/// Reed-Muller class of an expression, most restrictive first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RmClass {
    Pprm,
    Fprm,
    Grm,
    Esop,
}

impl fmt::Display for RmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RmClass::Pprm => "PPRM",
            RmClass::Fprm => "FPRM",
            RmClass::Grm => "GRM",
            RmClass::Esop => "ESOP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EsopExpr {
    arity: usize,
    terms: Vec<ProductTerm>,
}

impl EsopExpr {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            terms: Vec::new(),
        }
    }

    /// Builds a normalized expression. Fails when a term uses a variable
    /// outside `0..arity`.
    pub fn new(arity: usize, terms: impl IntoIterator<Item = ProductTerm>) -> Result<Self> {
        let terms: Vec<ProductTerm> = terms.into_iter().collect();
        if let Some(v) = terms.iter().filter_map(ProductTerm::max_var).max() {
            if v >= arity {
                return Err(Error::InvalidGate(format!(
                    "variable {} outside arity {arity}",
                    var_name(v)
                )));
            }
        }
        Ok(Self {
            arity,
            terms: normalize(terms),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, assignment: usize) -> bool {
        self.terms
            .iter()
            .fold(false, |acc, t| acc ^ t.eval(assignment, self.arity))
    }

    /// Truth table with variable 0 as the most significant index bit.
    pub fn truth_table(&self) -> Result<Vec<bool>> {
        if self.arity > MAX_TRUTH_TABLE_ARITY {
            return Err(Error::ArityTooLarge {
                arity: self.arity,
                limit: MAX_TRUTH_TABLE_ARITY,
            });
        }
        Ok((0..1usize << self.arity).map(|i| self.eval(i)).collect())
    }

    pub fn classify_polarity(&self) -> RmClass {
        let literals = || self.terms.iter().flat_map(|t| t.literals.iter());
        if literals().all(|l| l.polarity == Polarity::Positive) {
            return RmClass::Pprm;
        }
        let mut fixed: Vec<Option<Polarity>> = vec![None; self.arity];
        let single_polarity = literals().all(|l| match fixed[l.var] {
            None => {
                fixed[l.var] = Some(l.polarity);
                true
            }
            Some(p) => p == l.polarity,
        });
        if single_polarity {
            return RmClass::Fprm;
        }
        let mut supports: Vec<Vec<usize>> = self
            .terms
            .iter()
            .map(|t| t.literals.iter().map(|l| l.var).collect())
            .collect();
        supports.sort();
        if supports.windows(2).all(|w| w[0] != w[1]) {
            RmClass::Grm
        } else {
            RmClass::Esop
        }
    }

    /// Repeatedly replaces two terms that differ only in one variable's
    /// polarity by the term without that variable. Pairs are scanned in
    /// sorted order and the scan restarts after every merge.
    pub fn merge_terms(&self) -> Self {
        let mut terms = self.terms.clone();
        'outer: loop {
            for i in 0..terms.len() {
                for j in i + 1..terms.len() {
                    if let Some(var) = terms[i].single_polarity_difference(&terms[j]) {
                        let merged = terms[i].without_var(var);
                        terms.remove(j);
                        terms.remove(i);
                        terms.push(merged);
                        terms = normalize(terms);
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Self {
            arity: self.arity,
            terms,
        }
    }

    /// Same expression with its terms in the given order (for tests of
    /// order independence); normalization restores the canonical order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let terms = order.iter().map(|&i| self.terms[i].clone()).collect();
        Self {
            arity: self.arity,
            terms: normalize(terms),
        }
    }

    /// Uniformly random expression with up to `max_terms` terms of at least
    /// one literal each.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, arity: usize, max_terms: usize) -> Self {
        let count = rng.gen_range(1..=max_terms.max(1));
        let terms = (0..count)
            .map(|_| {
                let lits: Vec<Literal> = (0..arity)
                    .filter_map(|var| match rng.gen_range(0..3) {
                        0 => Some(Literal::positive(var)),
                        1 => Some(Literal::negative(var)),
                        _ => None,
                    })
                    .collect();
                let lits = if lits.is_empty() {
                    vec![Literal::positive(rng.gen_range(0..arity))]
                } else {
                    lits
                };
                ProductTerm { literals: lits }
            })
            .collect();
        Self {
            arity,
            terms: normalize(terms),
        }
    }
}

fn normalize(mut terms: Vec<ProductTerm>) -> Vec<ProductTerm> {
    terms.sort();
    let mut out: Vec<ProductTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if out.last() == Some(&t) {
            out.pop();
        } else {
            out.push(t);
        }
    }
    out
}

impl fmt::Display for EsopExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ^ ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Parses either the `^`-separated text grammar or a PLA-style `.type esop`
/// file. The arity of a text expression is one past its largest variable.
pub fn parse_esop(text: &str) -> Result<EsopExpr, ParseError> {
    if text.lines().any(|l| l.trim_start().starts_with('.')) {
        parse_pla(text)
    } else {
        parse_esop_text(text, None)
    }
}

/// Parses the text grammar with a fixed arity; variables beyond it are an
/// error.
pub fn parse_esop_with_arity(text: &str, arity: usize) -> Result<EsopExpr, ParseError> {
    parse_esop_text(text, Some(arity))
}

fn parse_esop_text(text: &str, arity: Option<usize>) -> Result<EsopExpr, ParseError> {
    let mut terms = Vec::new();
    let mut current: Vec<(Literal, usize, usize)> = Vec::new();
    let mut constant: Option<(char, usize, usize)> = None;
    let mut expect_term = true;
    let mut negate: Option<(usize, usize)> = None;
    let mut max_var: Option<usize> = None;

    let finish = |current: &mut Vec<(Literal, usize, usize)>,
                      constant: &mut Option<(char, usize, usize)>,
                      terms: &mut Vec<ProductTerm>,
                      line: usize,
                      col: usize|
     -> Result<(), ParseError> {
        match (constant.take(), current.is_empty()) {
            (Some((c, l, k)), false) => {
                return Err(ParseError::new(l, k, format!("constant `{c}` mixed with literals")))
            }
            (Some(('1', _, _)), true) => terms.push(ProductTerm::one()),
            (Some(_), true) => {}
            (None, true) => return Err(ParseError::new(line, col, "expected a term")),
            (None, false) => {
                let mut lits: Vec<(Literal, usize, usize)> = std::mem::take(current);
                lits.sort_by_key(|(l, _, _)| l.var);
                for w in lits.windows(2) {
                    if w[0].0.var == w[1].0.var {
                        return Err(ParseError::new(
                            w[1].1,
                            w[1].2,
                            format!("variable `{}` appears twice in one term", var_name(w[1].0.var)),
                        ));
                    }
                }
                terms.push(ProductTerm {
                    literals: lits.into_iter().map(|(l, _, _)| l).collect(),
                });
            }
        }
        Ok(())
    };

    let (mut line, mut col) = (1, 0);
    for ch in text.chars() {
        col += 1;
        if ch == '\n' {
            line += 1;
            col = 0;
            continue;
        }
        if ch.is_whitespace() {
            continue;
        }
        match ch {
            '!' => {
                if negate.is_some() {
                    return Err(ParseError::new(line, col, "double negation"));
                }
                negate = Some((line, col));
            }
            'a'..='z' => {
                if constant.is_some() {
                    return Err(ParseError::new(line, col, "constant mixed with literals"));
                }
                let var = (ch as u8 - b'a') as usize;
                if let Some(a) = arity {
                    if var >= a {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("variable `{ch}` outside arity {a}"),
                        ));
                    }
                }
                max_var = Some(max_var.map_or(var, |m: usize| m.max(var)));
                let polarity = if negate.take().is_some() {
                    Polarity::Negative
                } else {
                    Polarity::Positive
                };
                current.push((Literal { var, polarity }, line, col));
                expect_term = false;
            }
            '0' | '1' => {
                if negate.is_some() {
                    return Err(ParseError::new(line, col, "negated constant"));
                }
                if !current.is_empty() || constant.is_some() {
                    return Err(ParseError::new(line, col, "constant mixed with literals"));
                }
                constant = Some((ch, line, col));
                expect_term = false;
            }
            '^' => {
                if negate.is_some() {
                    return Err(ParseError::new(line, col, "dangling `!`"));
                }
                finish(&mut current, &mut constant, &mut terms, line, col)?;
                expect_term = true;
            }
            other => {
                return Err(ParseError::new(line, col, format!("unexpected character `{other}`")))
            }
        }
    }
    if negate.is_some() {
        return Err(ParseError::new(line, col, "dangling `!`"));
    }
    if !(expect_term && terms.is_empty() && current.is_empty() && constant.is_none()) {
        finish(&mut current, &mut constant, &mut terms, line, col + 1)?;
    }
    let arity = arity.unwrap_or(max_var.map_or(0, |m| m + 1));
    Ok(EsopExpr {
        arity,
        terms: normalize(terms),
    })
}

/// PLA-style input: `.i N`, `.type esop`, then one cube per row over
/// `{0,1,-}`. An optional single output column is accepted; rows whose
/// output is `0` are skipped.
pub fn parse_pla(text: &str) -> Result<EsopExpr, ParseError> {
    let mut arity: Option<usize> = None;
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(directive) = line.strip_prefix('.') {
            let mut parts = directive.split_whitespace();
            match parts.next() {
                Some("i") => {
                    let n = parts
                        .next()
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| ParseError::new(line_no, 1, "`.i` needs an integer"))?;
                    arity = Some(n);
                }
                Some("type") => match parts.next() {
                    Some("esop") => {}
                    other => {
                        return Err(ParseError::new(
                            line_no,
                            1,
                            format!("unsupported PLA type {:?}", other.unwrap_or("")),
                        ))
                    }
                },
                Some("o") => {
                    if parts.next() != Some("1") {
                        return Err(ParseError::new(line_no, 1, "only single-output PLA files are supported"));
                    }
                }
                Some("e") | Some("end") | Some("p") | Some("ilb") | Some("ob") => {}
                Some(other) => {
                    return Err(ParseError::new(line_no, 1, format!("unknown directive `.{other}`")))
                }
                None => return Err(ParseError::new(line_no, 1, "empty directive")),
            }
            continue;
        }
        let n = arity.ok_or_else(|| ParseError::new(line_no, 1, "cube row before `.i`"))?;
        let mut fields = line.split_whitespace();
        let cube = fields.next().unwrap_or("");
        if cube.chars().count() != n {
            return Err(ParseError::new(
                line_no,
                1,
                format!("cube has {} columns, expected {n}", cube.chars().count()),
            ));
        }
        match fields.next() {
            None | Some("1") => {}
            Some("0") => continue,
            Some(other) => {
                return Err(ParseError::new(
                    line_no,
                    cube.len() + 2,
                    format!("bad output column `{other}`"),
                ))
            }
        }
        let mut literals = Vec::new();
        for (var, ch) in cube.chars().enumerate() {
            match ch {
                '1' => literals.push(Literal::positive(var)),
                '0' => literals.push(Literal::negative(var)),
                '-' => {}
                other => {
                    return Err(ParseError::new(
                        line_no,
                        var + 1,
                        format!("unexpected cube character `{other}`"),
                    ))
                }
            }
        }
        terms.push(ProductTerm { literals });
    }
    let arity = arity.ok_or_else(|| ParseError::new(1, 1, "missing `.i` header"))?;
    Ok(EsopExpr {
        arity,
        terms: normalize(terms),
    })
}
