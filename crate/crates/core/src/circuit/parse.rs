//! Line-oriented circuit and function files.
//!
//! ```text
//! QUBITS 2          # optional; defaults to the largest qubit index
//! IN 1 s2 s2        # amplitudes a b; s2 = 1/sqrt(2), complex as 0.5+0.5i
//! ROTY 2 pi/4
//! CZ 1 2
//! H 2
//! FIN 1 1 0
//! ```
//!
//! Gate words: IN, FIN, PROJ (q a b); ROTX, ROTY, ROTZ (q θ); X, Y, Z, ID,
//! H (q); CZ, AOP, CNOT (q1 q2); DYAD (q r c).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::pipeline::BooleanFunction;
use super::{Circuit, Gate, GateKind};
use crate::aux_algebra::Encoding;
use crate::error::{Error, Result};
use crate::linalg::C64;

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Real literal: a number, `s2`, or a multiple/fraction of `pi` such as
/// `-3pi/4`, `pi`, `2*pi/3`.
pub fn parse_real(tok: &str) -> Option<f64> {
    let t = tok.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return None;
    }
    let value = if body == "s2" {
        FRAC_1_SQRT_2
    } else if let Some(pos) = body.find("pi") {
        let coef = body[..pos].trim_end_matches('*');
        let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
        let rest = &body[pos + 2..];
        let den = if rest.is_empty() { 1.0 } else { rest.strip_prefix('/')?.parse::<f64>().ok()? };
        coef * PI / den
    } else {
        body.parse::<f64>().ok()?
    };
    value.is_finite().then_some(sign * value)
}

fn parse_imag(tok: &str) -> Option<f64> {
    let body = tok.strip_suffix('i')?;
    match body {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(body),
    }
}

/// Complex literal: `x`, `yi`, `x+yi`, `x-yi` (each part a real literal).
pub fn parse_complex(tok: &str) -> Option<C64> {
    let t = tok.trim();
    if !t.ends_with('i') {
        return parse_real(t).map(|re| C64::new(re, 0.0));
    }
    let bytes = t.as_bytes();
    let split =
        (1..t.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Some(C64::new(parse_real(&t[..i])?, parse_imag(&t[i..])?)),
        None => parse_imag(t).map(|im| C64::new(0.0, im)),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_gate(words: &[&str], line: usize) -> Result<Option<Gate>> {
    let op = words[0].to_ascii_uppercase();
    let args = &words[1..];
    let want = |k: usize| -> Result<()> {
        if args.len() == k {
            Ok(())
        } else {
            Err(perr(line, format!("{op} takes {k} argument(s), got {}", args.len())))
        }
    };
    let qubit = |s: &str| -> Result<usize> {
        s.parse::<usize>().ok().filter(|&q| q >= 1).ok_or_else(|| perr(line, format!("bad qubit index '{s}'")))
    };
    let real = |s: &str| parse_real(s).ok_or_else(|| perr(line, format!("bad angle '{s}'")));
    let cplx = |s: &str| parse_complex(s).ok_or_else(|| perr(line, format!("bad amplitude '{s}'")));
    let single = |e: Encoding| -> Result<Option<Gate>> { Ok(Some(Gate::enc(e, qubit(args[0])?))) };
    let gate = match op.as_str() {
        "IN" | "FIN" | "PROJ" => {
            want(3)?;
            let (a, b) = (cplx(args[1])?, cplx(args[2])?);
            single(match op.as_str() {
                "IN" => Encoding::In { a, b },
                "FIN" => Encoding::Fin { a, b },
                _ => Encoding::Projector { a, b },
            })?
        }
        "ROTX" | "ROTY" | "ROTZ" => {
            want(2)?;
            let t = real(args[1])?;
            single(match op.as_str() {
                "ROTX" => Encoding::RotX(t),
                "ROTY" => Encoding::RotY(t),
                _ => Encoding::RotZ(t),
            })?
        }
        "X" | "Y" | "Z" | "ID" => {
            want(1)?;
            single(match op.as_str() {
                "X" => Encoding::PauliX,
                "Y" => Encoding::PauliY,
                "Z" => Encoding::PauliZ,
                _ => Encoding::Identity,
            })?
        }
        "H" => {
            want(1)?;
            Some(Gate::hadamard(qubit(args[0])?))
        }
        "CZ" | "AOP" | "CNOT" => {
            want(2)?;
            let (q1, q2) = (qubit(args[0])?, qubit(args[1])?);
            let kind = match op.as_str() {
                "CZ" => GateKind::Encoded(Encoding::Cz),
                "AOP" => GateKind::Encoded(Encoding::AOp),
                _ => GateKind::Cnot,
            };
            Some(Gate::new(kind, vec![q1, q2]))
        }
        "DYAD" => {
            want(3)?;
            let bit = |s: &str| match s {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                _ => Err(perr(line, format!("dyad index '{s}' must be 0 or 1"))),
            };
            single(Encoding::RawDyad { row: bit(args[1])?, col: bit(args[2])? })?
        }
        _ => return Ok(None),
    };
    if let Some(Gate { kind: GateKind::Encoded(e), .. }) = &gate {
        e.validate().map_err(|err| perr(line, err.to_string()))?;
    }
    Ok(gate)
}

fn parse_count(words: &[&str], line: usize, what: &str) -> Result<usize> {
    if words.len() != 2 {
        return Err(perr(line, format!("{what} takes one argument")));
    }
    words[1]
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| perr(line, format!("bad {what} count '{}'", words[1])))
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        if words[0].eq_ignore_ascii_case("QUBITS") {
            n = Some(parse_count(&words, line, "QUBITS")?);
            continue;
        }
        match parse_gate(&words, line)? {
            Some(g) => gates.push((line, g)),
            None => return Err(perr(line, format!("unknown gate '{}'", words[0]))),
        }
    }
    let max_q = gates.iter().flat_map(|(_, g)| g.qubits.iter().copied()).max().unwrap_or(0);
    let n = n.unwrap_or(max_q);
    if let Some((line, _)) = gates.iter().find(|(_, g)| g.qubits.iter().any(|&q| q > n)) {
        return Err(perr(*line, format!("qubit index exceeds QUBITS {n}")));
    }
    Circuit::new(n, gates.into_iter().map(|(_, g)| g).collect())
}

/// A parsed function file: either a truth table or a gate list writing f
/// into qubit VARS+1.
#[derive(Debug, Clone)]
pub struct FunctionSpec {
    pub function: BooleanFunction,
}

/// ```text
/// VARS 2
/// TRUTH 0001        # f(x) for x = 00, 01, 10, 11 (x₁ most significant)
/// ```
/// or `VARS n` followed by interior gate lines on qubits 1..=n+1.
pub fn parse_function(text: &str) -> Result<FunctionSpec> {
    let mut n: Option<usize> = None;
    let mut truth: Option<(usize, Vec<bool>)> = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0].to_ascii_uppercase().as_str() {
            "VARS" => n = Some(parse_count(&words, line, "VARS")?),
            "TRUTH" => {
                let bits: String = words[1..].concat();
                let t = bits
                    .chars()
                    .map(|ch| match ch {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(perr(line, format!("truth table character '{ch}'"))),
                    })
                    .collect::<Result<Vec<bool>>>()?;
                truth = Some((line, t));
            }
            _ => match parse_gate(&words, line)? {
                Some(g) => gates.push(g),
                None => return Err(perr(line, format!("unknown directive '{}'", words[0]))),
            },
        }
    }
    let n = n.ok_or_else(|| perr(1, "missing VARS line"))?;
    let function = match truth {
        Some((line, t)) => {
            if !gates.is_empty() {
                return Err(perr(line, "give either TRUTH or gate lines, not both"));
            }
            BooleanFunction::from_truth_table(n, t).map_err(|e| perr(line, e.to_string()))?
        }
        None => {
            if let Some(q) = gates.iter().flat_map(|g| g.qubits.iter().copied()).find(|&q| q > n + 1) {
                return Err(perr(1, format!("gate uses qubit {q} beyond the ancilla {}", n + 1)));
            }
            BooleanFunction::from_gates(n, gates)?
        }
    };
    Ok(FunctionSpec { function })
}
