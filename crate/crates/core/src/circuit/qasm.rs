//! Parser for the OpenQASM 2.0 subset used by the benchmark fixtures.
//!
//! Accepted statements: `qreg`, `cx`, `rz`, `rx`, `h`, `x`, `z`, `s`, `sdg`, `t`,
//! `tdg`, `barrier`. Headers, `include`, `creg` and `measure` are skipped.

use crate::error::{ParseError, ParseErrorKind};
use crate::scalar::Scalar;

use super::{rewrite_to_basis, Circuit};

/// Gate as written in the source, before rewriting to the rotation basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceGate<T> {
    Cx(usize, usize),
    Rz(usize, T),
    Rx(usize, T),
    H(usize),
    X(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceProgram<T> {
    pub name: String,
    pub n_qubits: usize,
    pub gates: Vec<SourceGate<T>>,
}

/// Parses QASM text and rewrites it into {CNOT, Rx, Rz}.
pub fn parse_qasm<T: Scalar>(name: &str, text: &str) -> Result<Circuit<T>, ParseError> {
    Ok(rewrite_to_basis(&parse_source(name, text)?))
}

/// Parses QASM text keeping the symbolic Clifford+T gates.
pub fn parse_source<T: Scalar>(name: &str, text: &str) -> Result<SourceProgram<T>, ParseError> {
    let mut register: Option<(String, usize)> = None;
    let mut gates = Vec::new();

    for (line, stmt) in statements(text) {
        let err = |kind| ParseError { line, kind };
        let (head, args) = split_head(&stmt);
        match head.as_str() {
            "OPENQASM" | "include" | "creg" | "measure" | "barrier" | "reset" => continue,
            "qreg" => {
                if register.is_some() {
                    return Err(err(ParseErrorKind::Register));
                }
                let (reg, size) = parse_ref(args)
                    .ok_or_else(|| err(ParseErrorKind::Malformed(stmt.clone())))?;
                let size = size.ok_or_else(|| err(ParseErrorKind::Malformed(stmt.clone())))?;
                register = Some((reg, size));
                continue;
            }
            _ => {}
        }

        let (reg, size) = register
            .clone()
            .ok_or_else(|| err(ParseErrorKind::Register))?;
        let (gate_name, params) = split_params(&head)
            .ok_or_else(|| err(ParseErrorKind::Malformed(stmt.clone())))?;
        let mut operands = Vec::new();
        for a in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let (r, idx) =
                parse_ref(a).ok_or_else(|| err(ParseErrorKind::Malformed(stmt.clone())))?;
            if r != reg {
                return Err(err(ParseErrorKind::Malformed(format!(
                    "unknown register `{r}`"
                ))));
            }
            match idx {
                Some(i) if i >= size => {
                    return Err(err(ParseErrorKind::QubitOutOfRange { index: i, size }))
                }
                _ => operands.push(idx),
            }
        }

        let angle = || -> Result<T, ParseError> {
            match params {
                Some(p) => eval_expr(p)
                    .map(T::of)
                    .ok_or_else(|| err(ParseErrorKind::Malformed(format!("bad angle `{p}`")))),
                None => Err(err(ParseErrorKind::Malformed(stmt.clone()))),
            }
        };

        match gate_name {
            "cx" | "CX" => {
                let (c, t) = match operands.as_slice() {
                    [Some(c), Some(t)] if c != t => (*c, *t),
                    _ => return Err(err(ParseErrorKind::Malformed(stmt.clone()))),
                };
                gates.push(SourceGate::Cx(c, t));
            }
            "rz" | "rx" | "h" | "x" | "z" | "s" | "sdg" | "t" | "tdg" => {
                if operands.len() != 1 {
                    return Err(err(ParseErrorKind::Malformed(stmt.clone())));
                }
                let theta = if matches!(gate_name, "rz" | "rx") {
                    Some(angle()?)
                } else if params.is_some() {
                    return Err(err(ParseErrorKind::Malformed(stmt.clone())));
                } else {
                    None
                };
                // a bare register name broadcasts over every qubit
                let targets: Vec<usize> = match operands[0] {
                    Some(q) => vec![q],
                    None => (0..size).collect(),
                };
                for q in targets {
                    gates.push(match gate_name {
                        "rz" => SourceGate::Rz(q, theta.unwrap()),
                        "rx" => SourceGate::Rx(q, theta.unwrap()),
                        "h" => SourceGate::H(q),
                        "x" => SourceGate::X(q),
                        "z" => SourceGate::Z(q),
                        "s" => SourceGate::S(q),
                        "sdg" => SourceGate::Sdg(q),
                        "t" => SourceGate::T(q),
                        _ => SourceGate::Tdg(q),
                    });
                }
            }
            other => return Err(err(ParseErrorKind::UnknownGate(other.to_string()))),
        }
    }

    // a program with no statements at all is the empty circuit
    let n_qubits = match register {
        Some((_, n)) => n,
        None if gates.is_empty() => 0,
        None => {
            return Err(ParseError {
                line: text.lines().count().max(1),
                kind: ParseErrorKind::Register,
            })
        }
    };
    Ok(SourceProgram {
        name: name.to_string(),
        n_qubits,
        gates,
    })
}

/// Splits into `;`-terminated statements with the line each one starts on.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find("//") {
            Some(p) => &raw[..p],
            None => raw,
        };
        for ch in line.chars() {
            if ch == ';' {
                let s = current.trim().to_string();
                if !s.is_empty() {
                    out.push((start, s));
                }
                current.clear();
            } else {
                if current.trim().is_empty() && !ch.is_whitespace() {
                    start = i + 1;
                }
                current.push(ch);
            }
        }
        current.push(' ');
    }
    let rest = current.trim();
    if !rest.is_empty() {
        out.push((start, rest.to_string()));
    }
    out
}

/// Splits `rz(pi/2) q[0]` into `("rz(pi/2)", "q[0]")`, keeping parentheses intact.
fn split_head(stmt: &str) -> (String, &str) {
    let mut depth = 0i32;
    for (i, ch) in stmt.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                return (stmt[..i].to_string(), stmt[i..].trim());
            }
            _ => {}
        }
    }
    (stmt.to_string(), "")
}

fn split_params(head: &str) -> Option<(&str, Option<&str>)> {
    match head.find('(') {
        None => Some((head, None)),
        Some(open) => {
            let inner = head[open + 1..].strip_suffix(')')?;
            Some((&head[..open], Some(inner)))
        }
    }
}

/// `q[3]` -> ("q", Some(3)); `q` -> ("q", None).
fn parse_ref(s: &str) -> Option<(String, Option<usize>)> {
    let s = s.trim();
    match s.find('[') {
        None => {
            let valid = !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
            valid.then(|| (s.to_string(), None))
        }
        Some(open) => {
            let name = s[..open].trim();
            let idx = s[open + 1..].strip_suffix(']')?.trim().parse().ok()?;
            (!name.is_empty()).then(|| (name.to_string(), Some(idx)))
        }
    }
}

/// Evaluates the arithmetic allowed in gate parameters: numbers, `pi`, `+ - * /`, parentheses.
pub(crate) fn eval_expr(src: &str) -> Option<f64> {
    let tokens = tokenize(src)?;
    let mut p = ExprParser { tokens, pos: 0 };
    let v = p.sum()?;
    (p.pos == p.tokens.len()).then_some(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(src: &str) -> Option<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().ok()?));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" | "PI" => out.push(Tok::Num(std::f64::consts::PI)),
                _ => return None,
            }
        } else {
            return None;
        }
    }
    Some(out)
}

struct ExprParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl ExprParser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Option<f64> {
        let mut v = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Some(v)
    }

    fn product(&mut self) -> Option<f64> {
        let mut v = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Some(v)
    }

    fn unary(&mut self) -> Option<f64> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Some(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Option<f64> {
        match self.tokens.get(self.pos)?.clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Some(v)
            }
            Tok::Op('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return None;
                }
                self.pos += 1;
                Some(v)
            }
            Tok::Op(_) => None,
        }
    }
}
