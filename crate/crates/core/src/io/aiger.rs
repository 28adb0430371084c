//! AIGER reader and writer for combinational And-Inverter graphs.
//!
//! Gate `v` of the resulting circuit is AIGER variable `v`. Variable 0 (the
//! AIGER constant) becomes an input gate pinned to 1: AIGER literal 1 maps to
//! its positive literal and literal 0 to its complement. Every output literal
//! is required to evaluate to 1. When an output literal points at an AND that
//! has parents or is listed with both polarities, or at an input already
//! constrained the other way, a unary AND buffer is appended after the last
//! variable and carries the constraint.

use crate::circuit::{Circuit, CircuitError, ConstrainedCircuit, GateDef, Literal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AigerError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("latches are not supported (found {0})")]
    LatchesUnsupported(usize),
    #[error("truncated delta encoding in and gate {0}")]
    TruncatedDeltaEncoding(usize),
    #[error("literal {literal} out of range (maximum variable {max_var})")]
    LiteralOutOfRange { literal: u64, max_var: usize },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("circuit is not representable in AIGER: {0}")]
    Unrepresentable(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// The `M I L O A` counts of an AIGER header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AigerHeader {
    pub binary: bool,
    pub max_var: usize,
    pub inputs: usize,
    pub latches: usize,
    pub outputs: usize,
    pub ands: usize,
}

impl AigerHeader {
    fn parse(line: &str) -> Result<Self, AigerError> {
        let bad = |msg: &str| AigerError::MalformedHeader(format!("{msg}: {line:?}"));
        let mut fields = line.split_ascii_whitespace();
        let binary = match fields.next() {
            Some("aag") => false,
            Some("aig") => true,
            _ => return Err(bad("expected 'aag' or 'aig'")),
        };
        let nums = fields
            .map(|f| f.parse::<usize>().map_err(|_| bad("non-numeric field")))
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() < 5 || nums.len() > 9 {
            return Err(bad("expected M I L O A"));
        }
        // B C J F sections (bad states, invariants, justice, fairness)
        if nums[5..].iter().any(|&n| n != 0) {
            return Err(bad("property sections are not supported"));
        }
        let header = AigerHeader {
            binary,
            max_var: nums[0],
            inputs: nums[1],
            latches: nums[2],
            outputs: nums[3],
            ands: nums[4],
        };
        if header.latches != 0 {
            return Err(AigerError::LatchesUnsupported(header.latches));
        }
        if header.max_var != header.inputs + header.latches + header.ands {
            return Err(bad("M must equal I + L + A"));
        }
        if header.max_var >= (u32::MAX >> 2) as usize {
            return Err(bad("too many variables"));
        }
        Ok(header)
    }
}

/// Parses ASCII (`aag`) or binary (`aig`) AIGER.
pub fn parse_aiger(bytes: &[u8]) -> Result<ConstrainedCircuit, AigerError> {
    let mut cursor = Cursor { bytes, pos: 0, line: 0 };
    let header_line = cursor
        .next_line()
        .ok_or_else(|| AigerError::MalformedHeader("empty input".into()))?;
    let header = AigerHeader::parse(header_line)?;
    let mut parser = Parser::new(header);
    if header.binary {
        parser.read_binary(&mut cursor)?;
    } else {
        parser.read_ascii(&mut cursor)?;
    }
    parser.finish()
}

/// Parses the header only.
pub fn parse_header(bytes: &[u8]) -> Result<AigerHeader, AigerError> {
    let mut cursor = Cursor { bytes, pos: 0, line: 0 };
    let line = cursor
        .next_line()
        .ok_or_else(|| AigerError::MalformedHeader("empty input".into()))?;
    AigerHeader::parse(line)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        self.line += 1;
        let line = std::str::from_utf8(&rest[..end]).ok()?;
        Some(line.trim_end_matches('\r'))
    }

    fn next_byte(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        self.pos += 1;
        b
    }
}

struct Parser {
    header: AigerHeader,
    defs: Vec<Option<GateDef>>,
    outputs: Vec<Literal>,
}

impl Parser {
    fn new(header: AigerHeader) -> Self {
        let mut defs = vec![None; header.max_var + 1];
        defs[0] = Some(GateDef::Input);
        Parser {
            header,
            defs,
            outputs: Vec::new(),
        }
    }

    fn literal(&self, code: u64) -> Result<Literal, AigerError> {
        if code > 2 * self.header.max_var as u64 + 1 {
            return Err(AigerError::LiteralOutOfRange {
                literal: code,
                max_var: self.header.max_var,
            });
        }
        Ok(map_literal(code as u32))
    }

    fn define(&mut self, var: usize, def: GateDef, line: usize) -> Result<(), AigerError> {
        if var == 0 {
            return Err(AigerError::MalformedLine {
                line,
                message: "cannot define the constant".into(),
            });
        }
        let slot = &mut self.defs[var];
        if slot.is_some() {
            return Err(CircuitError::DuplicateDefinition(var).into());
        }
        *slot = Some(def);
        Ok(())
    }

    fn and_def(&self, rhs0: u64, rhs1: u64) -> Result<GateDef, AigerError> {
        let mut children = [self.literal(rhs0)?, self.literal(rhs1)?];
        children.sort_unstable_by(|a, b| b.cmp(a));
        Ok(GateDef::And(children.to_vec()))
    }

    fn read_ascii(&mut self, cursor: &mut Cursor<'_>) -> Result<(), AigerError> {
        let h = self.header;
        for _ in 0..h.inputs {
            let (line, nums) = numbers(cursor, 1)?;
            let lit = self.literal(nums[0])?;
            if lit.is_complemented() || lit.gate() == 0 {
                return Err(AigerError::MalformedLine {
                    line,
                    message: "input literal must be a positive variable".into(),
                });
            }
            self.define(lit.gate(), GateDef::Input, line)?;
        }
        for _ in 0..h.outputs {
            let (_, nums) = numbers(cursor, 1)?;
            let lit = self.literal(nums[0])?;
            self.outputs.push(lit);
        }
        for _ in 0..h.ands {
            let (line, nums) = numbers(cursor, 3)?;
            let lhs = self.literal(nums[0])?;
            if lhs.is_complemented() {
                return Err(AigerError::MalformedLine {
                    line,
                    message: "and gate output literal must be even".into(),
                });
            }
            let def = self.and_def(nums[1], nums[2])?;
            self.define(lhs.gate(), def, line)?;
        }
        // symbol table and comments follow; not needed
        Ok(())
    }

    fn read_binary(&mut self, cursor: &mut Cursor<'_>) -> Result<(), AigerError> {
        let h = self.header;
        for var in 1..=h.inputs {
            self.defs[var] = Some(GateDef::Input);
        }
        for _ in 0..h.outputs {
            let (_, nums) = numbers(cursor, 1)?;
            let lit = self.literal(nums[0])?;
            self.outputs.push(lit);
        }
        for i in 0..h.ands {
            let lhs = 2 * (h.inputs + h.latches + i + 1) as u64;
            let delta0 = read_delta(cursor, i)?;
            let delta1 = read_delta(cursor, i)?;
            let out_of_range = |d| AigerError::LiteralOutOfRange {
                literal: d,
                max_var: h.max_var,
            };
            let rhs0 = lhs.checked_sub(delta0).filter(|_| delta0 > 0).ok_or(out_of_range(delta0))?;
            let rhs1 = rhs0.checked_sub(delta1).ok_or(out_of_range(delta1))?;
            let def = self.and_def(rhs0, rhs1)?;
            self.defs[(lhs / 2) as usize] = Some(def);
        }
        Ok(())
    }

    fn finish(self) -> Result<ConstrainedCircuit, AigerError> {
        let num_vars = self.defs.len();
        let mut defs = Vec::with_capacity(num_vars + self.outputs.len());
        for (var, def) in self.defs.into_iter().enumerate() {
            defs.push(def.ok_or(CircuitError::UndefinedGate(var))?);
        }
        let mut has_parent = vec![false; num_vars];
        for def in &defs {
            if let GateDef::And(children) = def {
                for l in children {
                    has_parent[l.gate()] = true;
                }
            }
        }
        let mut constraint: Vec<Option<bool>> = vec![None; num_vars];
        if has_parent[0] || self.outputs.iter().any(|l| l.gate() == 0) {
            constraint[0] = Some(true);
        }
        // an AND may carry its constraint only if it stays parentless, so an
        // AND listed as an output with both polarities is buffered both times
        let mut mixed = vec![false; num_vars];
        for &out in &self.outputs {
            let g = out.gate();
            mixed[g] |= self.outputs.iter().any(|&o| o == !out);
        }
        let mut buffers = Vec::new();
        for &out in &self.outputs {
            let g = out.gate();
            let want = !out.is_complemented();
            let is_input = matches!(defs[g], GateDef::Input);
            match constraint[g] {
                Some(v) if v == want => {}
                None if is_input || (!has_parent[g] && !mixed[g]) => constraint[g] = Some(want),
                _ => buffers.push(out),
            }
        }
        let mut constraints: Vec<(usize, bool)> = constraint
            .iter()
            .enumerate()
            .filter_map(|(g, v)| v.map(|v| (g, v)))
            .collect();
        for out in buffers {
            constraints.push((defs.len(), true));
            defs.push(GateDef::And(vec![out]));
        }
        let circuit = Circuit::new(defs)?;
        Ok(ConstrainedCircuit::new(circuit, constraints)?)
    }
}

fn map_literal(code: u32) -> Literal {
    if code < 2 {
        // constant: gate 0 holds 1, so literal 1 is its positive literal
        Literal::new(0, code == 0)
    } else {
        Literal::from_code(code)
    }
}

fn unmap_literal(lit: Literal) -> u32 {
    if lit.gate() == 0 {
        if lit.is_complemented() {
            0
        } else {
            1
        }
    } else {
        lit.code()
    }
}

fn numbers(cursor: &mut Cursor<'_>, count: usize) -> Result<(usize, Vec<u64>), AigerError> {
    let text = cursor.next_line().ok_or_else(|| AigerError::MalformedLine {
        line: cursor.line + 1,
        message: "unexpected end of file".into(),
    })?;
    let line = cursor.line;
    let nums = text
        .split_ascii_whitespace()
        .map(|f| f.parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| AigerError::MalformedLine {
            line,
            message: format!("expected {count} unsigned integers"),
        })?;
    if nums.len() != count {
        return Err(AigerError::MalformedLine {
            line,
            message: format!("expected {count} unsigned integers, found {}", nums.len()),
        });
    }
    Ok((line, nums))
}

fn read_delta(cursor: &mut Cursor<'_>, and_index: usize) -> Result<u64, AigerError> {
    let mut value = 0u64;
    let mut shift = 0;
    loop {
        let byte = cursor
            .next_byte()
            .ok_or(AigerError::TruncatedDeltaEncoding(and_index))?;
        if shift > 35 {
            return Err(AigerError::TruncatedDeltaEncoding(and_index));
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

fn write_delta(out: &mut Vec<u8>, mut value: u32) {
    while value >= 0x80 {
        out.push((value as u8 & 0x7f) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

/// Layout of a circuit in AIGER terms.
struct Layout {
    inputs: usize,
    ands: usize,
    outputs: Vec<u32>,
}

fn layout(cc: &ConstrainedCircuit) -> Result<Layout, AigerError> {
    let c = cc.circuit();
    let n = c.num_gates();
    let unrep = |m: String| AigerError::Unrepresentable(m);
    if n == 0 || !c.is_input(0) {
        return Err(unrep("gate 0 must be the constant input".into()));
    }
    if cc.constraint(0) == Some(false) {
        return Err(unrep("constant gate pinned to 0".into()));
    }
    let inputs = (1..n).take_while(|&g| c.is_input(g)).count();
    let mut ands = 0;
    for g in 1 + inputs..n {
        if c.fanin(g).len() != 2 {
            break;
        }
        ands += 1;
    }
    let max_var = inputs + ands;
    let mut outputs = Vec::new();
    for g in max_var + 1..n {
        let fanin = c.fanin(g);
        if fanin.len() != 1 || cc.constraint(g).is_none() {
            return Err(unrep(format!("gate {g} is neither an and2 nor an output buffer")));
        }
    }
    for (g, v) in cc.constraints() {
        if g == 0 {
            // a pinned constant is implicit unless nothing references it,
            // in which case it came from a constant-true output
            if c.fanout(0).is_empty() {
                outputs.push(1);
            }
            continue;
        }
        let lit = if g <= max_var {
            Literal::new(g, !v)
        } else {
            let l = c.fanin(g)[0];
            if v {
                l
            } else {
                !l
            }
        };
        outputs.push(unmap_literal(lit));
    }
    Ok(Layout {
        inputs,
        ands,
        outputs,
    })
}

/// Writes ASCII AIGER. Outputs are listed in constrained-gate order.
pub fn write_aiger_ascii(cc: &ConstrainedCircuit) -> Result<String, AigerError> {
    use std::fmt::Write;
    let l = layout(cc)?;
    let c = cc.circuit();
    let mut s = String::new();
    let m = l.inputs + l.ands;
    writeln!(s, "aag {m} {} 0 {} {}", l.inputs, l.outputs.len(), l.ands).unwrap();
    for g in 1..=l.inputs {
        writeln!(s, "{}", 2 * g).unwrap();
    }
    for o in &l.outputs {
        writeln!(s, "{o}").unwrap();
    }
    for g in l.inputs + 1..=m {
        let f = c.fanin(g);
        writeln!(s, "{} {} {}", 2 * g, unmap_literal(f[0]), unmap_literal(f[1])).unwrap();
    }
    Ok(s)
}

/// Writes binary AIGER. Every AND must reference only lower variables.
pub fn write_aiger_binary(cc: &ConstrainedCircuit) -> Result<Vec<u8>, AigerError> {
    let l = layout(cc)?;
    let c = cc.circuit();
    let m = l.inputs + l.ands;
    let mut out = format!("aig {m} {} 0 {} {}\n", l.inputs, l.outputs.len(), l.ands).into_bytes();
    for o in &l.outputs {
        out.extend_from_slice(format!("{o}\n").as_bytes());
    }
    for g in l.inputs + 1..=m {
        let lhs = 2 * g as u32;
        let f = c.fanin(g);
        let (mut r0, mut r1) = (unmap_literal(f[0]), unmap_literal(f[1]));
        if r0 < r1 {
            std::mem::swap(&mut r0, &mut r1);
        }
        if r0 >= lhs {
            return Err(AigerError::Unrepresentable(format!(
                "and gate {g} references a later variable"
            )));
        }
        write_delta(&mut out, lhs - r0);
        write_delta(&mut out, r0 - r1);
    }
    Ok(out)
}
