//! Parsing of diy-style litmus tests.
//!
//! The supported fragment: a `RISCV <name>` header, an `{ ... }` init
//! block binding registers to values or symbolic locations and locations
//! to values, an instruction table with one column per thread, and a
//! final `exists (...)` postcondition. Instructions are word loads and
//! stores, fences, and enough integer arithmetic to build dependency
//! chains.

use std::collections::BTreeMap;
use std::fmt;

use rvsem_core::inst::{Instruction, Register};
use rvsem_core::xword::MachineInt;

pub const MAX_THREADS: usize = 4;

/// Symbolic locations get spaced word-aligned addresses; threads get
/// disjoint code windows.
pub const LOCATION_BASE: u64 = 0x1000;
pub const LOCATION_STRIDE: u64 = 0x10;
pub const CODE_BASE: u64 = 0x4000;
pub const CODE_STRIDE: u64 = 0x1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegInit {
    Value(u64),
    Location(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Eq { thread: usize, reg: u8, value: u64 },
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl Cond {
    pub fn eval(&self, regs: &dyn Fn(usize, u8) -> u64) -> bool {
        match self {
            Cond::Eq { thread, reg, value } => regs(*thread, *reg) == *value,
            Cond::And(a, b) => a.eval(regs) && b.eval(regs),
            Cond::Or(a, b) => a.eval(regs) || b.eval(regs),
        }
    }

    /// Registers the condition mentions, sorted and deduplicated.
    pub fn registers(&self) -> Vec<(usize, u8)> {
        fn walk(c: &Cond, out: &mut Vec<(usize, u8)>) {
            match c {
                Cond::Eq { thread, reg, .. } => out.push((*thread, *reg)),
                Cond::And(a, b) | Cond::Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone)]
pub struct LitmusTest {
    pub name: String,
    pub init_regs: BTreeMap<(usize, u8), RegInit>,
    /// Symbolic locations in order of first appearance.
    pub locations: Vec<String>,
    pub init_mem: BTreeMap<String, u32>,
    pub programs: Vec<Vec<Instruction>>,
    pub postcondition: Cond,
}

impl LitmusTest {
    pub fn nthreads(&self) -> usize {
        self.programs.len()
    }

    pub fn location_addr(&self, name: &str) -> Option<u64> {
        let i = self.locations.iter().position(|l| l == name)?;
        Some(LOCATION_BASE + LOCATION_STRIDE * i as u64)
    }

    pub fn thread_base(&self, thread: usize) -> u64 {
        CODE_BASE + CODE_STRIDE * thread as u64
    }

    /// Initial memory by address; every location has a value, default 0.
    pub fn init_mem_by_addr(&self) -> BTreeMap<u64, u32> {
        self.locations
            .iter()
            .map(|name| {
                let addr = self.location_addr(name).unwrap();
                (addr, self.init_mem.get(name).copied().unwrap_or(0))
            })
            .collect()
    }

    /// Initial value of a register: explicit value, location address, or 0.
    pub fn reg_init(&self, thread: usize, reg: u8) -> u64 {
        match self.init_regs.get(&(thread, reg)) {
            Some(RegInit::Value(v)) => *v,
            Some(RegInit::Location(name)) => {
                self.location_addr(name).expect("bound locations exist")
            }
            None => 0,
        }
    }
}

struct Parser<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, msg: msg.into() })
}

pub fn parse_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut p = Parser { lines, pos: 0 };

    let (hline, header) = p.next_line("missing header")?;
    let name = match header.strip_prefix("RISCV") {
        Some(rest) if !rest.trim().is_empty() => rest.trim().to_string(),
        _ => return err(hline, "expected `RISCV <name>` header"),
    };

    let mut locations = Vec::new();
    let mut init_regs = BTreeMap::new();
    let mut init_mem = BTreeMap::new();
    parse_init_block(&mut p, &mut locations, &mut init_regs, &mut init_mem)?;

    let (programs, label_maps) = parse_table(&mut p, &mut locations)?;
    let programs = resolve_branches(programs, &label_maps)?;

    let (cline, cond_line) = p.next_line("missing `exists (...)` postcondition")?;
    let postcondition = parse_postcondition(cline, cond_line, programs.len())?;

    if let Some((l, s)) = p.peek() {
        return err(l, format!("unexpected trailing content `{s}`"));
    }

    Ok(LitmusTest { name, init_regs, locations, init_mem, programs, postcondition })
}

impl<'a> Parser<'a> {
    fn next_line(&mut self, missing: &str) -> Result<(usize, &'a str), ParseError> {
        match self.lines.get(self.pos) {
            Some(&(n, s)) => {
                self.pos += 1;
                Ok((n, s))
            }
            None => {
                let last = self.lines.last().map(|&(n, _)| n).unwrap_or(0);
                err(last, missing)
            }
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }
}

fn add_location(locations: &mut Vec<String>, name: &str) {
    if !locations.iter().any(|l| l == name) {
        locations.push(name.to_string());
    }
}

fn parse_init_block(
    p: &mut Parser,
    locations: &mut Vec<String>,
    init_regs: &mut BTreeMap<(usize, u8), RegInit>,
    init_mem: &mut BTreeMap<String, u32>,
) -> Result<(), ParseError> {
    let (oline, first) = p.next_line("missing `{` init block")?;
    if !first.starts_with('{') {
        return err(oline, "expected `{` to open the init block");
    }
    let mut body = String::new();
    let mut line = oline;
    let mut rest = first[1..].to_string();
    loop {
        if let Some(end) = rest.find('}') {
            body.push_str(&rest[..end]);
            if !rest[end + 1..].trim().is_empty() {
                return err(line, "unexpected content after `}`");
            }
            break;
        }
        body.push_str(&rest);
        body.push(' ');
        let (l, s) = p.next_line("unterminated init block")?;
        line = l;
        rest = s.to_string();
    }

    for binding in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((lhs, rhs)) = binding.split_once('=') else {
            return err(oline, format!("malformed init binding `{binding}`"));
        };
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if let Some((t, r)) = lhs.split_once(':') {
            let thread = parse_usize(oline, t, "thread id")?;
            let reg = parse_reg(oline, r)?;
            let init = if rhs.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                add_location(locations, rhs);
                RegInit::Location(rhs.to_string())
            } else {
                RegInit::Value(parse_value(oline, rhs)?)
            };
            init_regs.insert((thread, reg.index() as u8), init);
        } else {
            let value = parse_value(oline, rhs)?;
            add_location(locations, lhs);
            init_mem.insert(lhs.to_string(), value as u32);
        }
    }
    Ok(())
}

/// One instruction cell, before branch targets are resolved.
#[derive(Debug, Clone)]
enum Pending {
    Ready(Instruction),
    Branch { equal: bool, rs1: Register, rs2: Register, target: String, line: usize },
}

type LabelMap = BTreeMap<String, usize>;

fn parse_table(
    p: &mut Parser,
    locations: &mut Vec<String>,
) -> Result<(Vec<Vec<Pending>>, Vec<LabelMap>), ParseError> {
    let (hline, header) = p.next_line("missing thread header row")?;
    let headers: Vec<&str> = split_row(hline, header)?;
    let nthreads = headers.len();
    if nthreads == 0 {
        return err(hline, "no threads in header row");
    }
    if nthreads > MAX_THREADS {
        return err(hline, format!("{nthreads} threads, the checker supports at most {MAX_THREADS}"));
    }
    for (i, h) in headers.iter().enumerate() {
        if *h != format!("P{i}") {
            return err(hline, format!("expected thread header `P{i}`, found `{h}`"));
        }
    }

    let mut programs: Vec<Vec<Pending>> = vec![Vec::new(); nthreads];
    let mut labels: Vec<LabelMap> = vec![LabelMap::new(); nthreads];
    loop {
        let Some((line, text)) = p.peek() else {
            return err(0, "missing `exists (...)` postcondition");
        };
        if text.starts_with("exists") {
            break;
        }
        p.pos += 1;
        let cells = split_row(line, text)?;
        if cells.len() > nthreads {
            return err(line, format!("row has {} cells for {nthreads} threads", cells.len()));
        }
        for (t, cell) in cells.iter().enumerate() {
            let mut cell = cell.trim();
            while let Some((label, rest)) = split_label(cell) {
                if labels[t].insert(label.to_string(), programs[t].len()).is_some() {
                    return err(line, format!("duplicate label `{label}`"));
                }
                cell = rest;
            }
            if cell.is_empty() {
                continue;
            }
            programs[t].push(parse_instruction(line, cell, locations)?);
        }
    }
    Ok((programs, labels))
}

/// Splits `..ident: rest`, refusing mnemonics as labels.
fn split_label(cell: &str) -> Option<(&str, &str)> {
    let colon = cell.find(':')?;
    let head = &cell[..colon];
    if head.is_empty() || !head.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((head, cell[colon + 1..].trim_start()))
}

fn split_row(line: usize, text: &str) -> Result<Vec<&str>, ParseError> {
    let Some(body) = text.strip_suffix(';') else {
        return err(line, "table rows must end with `;`");
    };
    Ok(body.split('|').map(str::trim).collect())
}

fn parse_instruction(
    line: usize,
    text: &str,
    locations: &mut Vec<String>,
) -> Result<Pending, ParseError> {
    let _ = locations;
    let mut split = text.splitn(2, char::is_whitespace);
    let mnemonic = split.next().unwrap();
    let rest = split.next().unwrap_or("");
    let ops: Vec<&str> = rest
        .split([',', '(', ')'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let need = |n: usize| -> Result<(), ParseError> {
        if ops.len() == n {
            Ok(())
        } else {
            err(line, format!("`{mnemonic}` takes {n} operands, found {}", ops.len()))
        }
    };
    use Instruction::*;
    let inst = match mnemonic {
        "lw" => {
            need(3)?;
            Lw {
                rd: parse_reg(line, ops[0])?,
                oimm12: parse_imm(line, ops[1])?,
                rs1: parse_reg(line, ops[2])?,
            }
        }
        "sw" => {
            need(3)?;
            Sw {
                rs2: parse_reg(line, ops[0])?,
                simm12: parse_imm(line, ops[1])?,
                rs1: parse_reg(line, ops[2])?,
            }
        }
        "fence" => {
            need(2)?;
            Fence { pred: parse_fence_set(line, ops[0])?, succ: parse_fence_set(line, ops[1])? }
        }
        "addi" | "ori" | "xori" | "andi" => {
            need(3)?;
            let rd = parse_reg(line, ops[0])?;
            let rs1 = parse_reg(line, ops[1])?;
            let imm12 = parse_imm(line, ops[2])?;
            match mnemonic {
                "addi" => Addi { rd, rs1, imm12 },
                "ori" => Ori { rd, rs1, imm12 },
                "xori" => Xori { rd, rs1, imm12 },
                _ => Andi { rd, rs1, imm12 },
            }
        }
        "add" | "sub" | "xor" | "or" | "and" => {
            need(3)?;
            let rd = parse_reg(line, ops[0])?;
            let rs1 = parse_reg(line, ops[1])?;
            let rs2 = parse_reg(line, ops[2])?;
            match mnemonic {
                "add" => Add { rd, rs1, rs2 },
                "sub" => Sub { rd, rs1, rs2 },
                "xor" => Xor { rd, rs1, rs2 },
                "or" => Or { rd, rs1, rs2 },
                _ => And { rd, rs1, rs2 },
            }
        }
        "beq" | "bne" => {
            need(3)?;
            return Ok(Pending::Branch {
                equal: mnemonic == "beq",
                rs1: parse_reg(line, ops[0])?,
                rs2: parse_reg(line, ops[1])?,
                target: ops[2].to_string(),
                line,
            });
        }
        "lb" | "lh" | "ld" | "lbu" | "lhu" | "lwu" | "sb" | "sh" | "sd" => {
            return err(line, format!("unsupported-instruction: `{mnemonic}` is not word-sized"));
        }
        other => return err(line, format!("unsupported-instruction: `{other}`")),
    };
    Ok(Pending::Ready(inst))
}

fn resolve_branches(
    programs: Vec<Vec<Pending>>,
    labels: &[LabelMap],
) -> Result<Vec<Vec<Instruction>>, ParseError> {
    let mut out = Vec::with_capacity(programs.len());
    for (t, program) in programs.into_iter().enumerate() {
        let mut insts = Vec::with_capacity(program.len());
        for (i, pending) in program.into_iter().enumerate() {
            let inst = match pending {
                Pending::Ready(inst) => inst,
                Pending::Branch { equal, rs1, rs2, target, line } => {
                    let Some(&dest) = labels[t].get(&target) else {
                        return err(line, format!("unknown branch target `{target}`"));
                    };
                    let sbimm12 = (dest as MachineInt - i as MachineInt) * 4;
                    if equal {
                        Instruction::Beq { rs1, rs2, sbimm12 }
                    } else {
                        Instruction::Bne { rs1, rs2, sbimm12 }
                    }
                }
            };
            insts.push(inst);
        }
        out.push(insts);
    }
    Ok(out)
}

fn parse_postcondition(line: usize, text: &str, nthreads: usize) -> Result<Cond, ParseError> {
    let Some(rest) = text.strip_prefix("exists") else {
        return err(line, format!("expected `exists (...)`, found `{text}`"));
    };
    let rest = rest.trim();
    if !rest.starts_with('(') || !rest.ends_with(')') {
        return err(line, "postcondition must be parenthesized");
    }
    let inner = rest[1..rest.len() - 1].trim();
    if inner.is_empty() {
        return err(line, "empty postcondition");
    }
    let mut toks = tokenize_cond(line, inner)?;
    toks.reverse(); // pop() from the front
    let cond = parse_or(line, &mut toks, nthreads)?;
    if let Some(t) = toks.pop() {
        return err(line, format!("unexpected `{t}` in postcondition"));
    }
    Ok(cond)
}

fn tokenize_cond(line: usize, s: &str) -> Result<Vec<String>, ParseError> {
    let mut toks = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        rest = rest.trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(r) = rest.strip_prefix("/\\") {
            toks.push("/\\".to_string());
            rest = r;
        } else if let Some(r) = rest.strip_prefix("\\/") {
            toks.push("\\/".to_string());
            rest = r;
        } else if let Some(r) = rest.strip_prefix('(') {
            toks.push("(".to_string());
            rest = r;
        } else if let Some(r) = rest.strip_prefix(')') {
            toks.push(")".to_string());
            rest = r;
        } else {
            let end = rest
                .find(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == '\\' || c == '/')
                .unwrap_or(rest.len());
            if end == 0 {
                return err(line, format!("cannot tokenize postcondition at `{rest}`"));
            }
            toks.push(rest[..end].to_string());
            rest = &rest[end..];
        }
    }
    Ok(toks)
}

fn parse_or(line: usize, toks: &mut Vec<String>, nthreads: usize) -> Result<Cond, ParseError> {
    let mut left = parse_and(line, toks, nthreads)?;
    while toks.last().map(String::as_str) == Some("\\/") {
        toks.pop();
        let right = parse_and(line, toks, nthreads)?;
        left = Cond::Or(Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_and(line: usize, toks: &mut Vec<String>, nthreads: usize) -> Result<Cond, ParseError> {
    let mut left = parse_atom(line, toks, nthreads)?;
    while toks.last().map(String::as_str) == Some("/\\") {
        toks.pop();
        let right = parse_atom(line, toks, nthreads)?;
        left = Cond::And(Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_atom(line: usize, toks: &mut Vec<String>, nthreads: usize) -> Result<Cond, ParseError> {
    let Some(tok) = toks.pop() else {
        return err(line, "postcondition ended unexpectedly");
    };
    if tok == "(" {
        let inner = parse_or(line, toks, nthreads)?;
        if toks.pop().as_deref() != Some(")") {
            return err(line, "unbalanced parentheses in postcondition");
        }
        return Ok(inner);
    }
    // thread:xN=value
    let Some((lhs, value)) = tok.split_once('=') else {
        return err(line, format!("expected `<thread>:x<reg>=<value>`, found `{tok}`"));
    };
    let Some((t, r)) = lhs.split_once(':') else {
        return err(line, format!("expected `<thread>:x<reg>`, found `{lhs}`"));
    };
    let thread = parse_usize(line, t, "thread id")?;
    if thread >= nthreads {
        return err(line, format!("postcondition names thread {thread}, test has {nthreads}"));
    }
    let reg = parse_reg(line, r)?;
    let value = parse_value(line, value)?;
    Ok(Cond::Eq { thread, reg: reg.index() as u8, value })
}

fn parse_reg(line: usize, s: &str) -> Result<Register, ParseError> {
    let s = s.trim();
    let Some(n) = s.strip_prefix('x') else {
        return err(line, format!("expected register `x<N>`, found `{s}`"));
    };
    match n.parse::<u8>() {
        Ok(i) if i < 32 => Ok(Register::new(i)),
        _ => err(line, format!("register `{s}` out of range")),
    }
}

fn parse_usize(line: usize, s: &str, what: &str) -> Result<usize, ParseError> {
    s.trim().parse().map_err(|_| ParseError {
        line,
        msg: format!("expected {what}, found `{s}`"),
    })
}

fn parse_value(line: usize, s: &str) -> Result<u64, ParseError> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let parsed = match body.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => body.parse::<u64>(),
    };
    match parsed {
        Ok(v) if neg => Ok((v as i64).wrapping_neg() as u64),
        Ok(v) => Ok(v),
        Err(_) => err(line, format!("expected a value, found `{s}`")),
    }
}

fn parse_imm(line: usize, s: &str) -> Result<MachineInt, ParseError> {
    let v = parse_value(line, s)? as i64;
    if !(-2048..=2047).contains(&v) {
        return err(line, format!("immediate `{s}` out of the 12-bit range"));
    }
    Ok(v)
}

fn parse_fence_set(line: usize, s: &str) -> Result<MachineInt, ParseError> {
    let mut mask = 0;
    for c in s.trim().chars() {
        mask |= match c {
            'r' => 2,
            'w' => 1,
            _ => return err(line, format!("fence set `{s}` may only contain `r` and `w`")),
        };
    }
    if mask == 0 {
        return err(line, "empty fence set");
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rvsem_core::inst::Instruction::*;

    fn x(i: u8) -> Register {
        Register::new(i)
    }

    const SB: &str = "\
RISCV SB
{
0:x6=x; 0:x7=y;
1:x6=y; 1:x7=x;
}
 P0           | P1           ;
 ori x5,x0,1  | ori x5,x0,1  ;
 sw x5,0(x6)  | sw x5,0(x6)  ;
 lw x8,0(x7)  | lw x8,0(x7)  ;
exists (0:x8=0 /\\ 1:x8=0)
";

    #[test]
    fn parses_the_store_buffering_test() {
        let t = parse_litmus(SB).unwrap();
        assert_eq!(t.name, "SB");
        assert_eq!(t.nthreads(), 2);
        assert_eq!(t.locations, ["x", "y"]);
        assert_eq!(t.location_addr("x"), Some(0x1000));
        assert_eq!(t.location_addr("y"), Some(0x1010));
        assert_eq!(t.reg_init(0, 6), 0x1000);
        assert_eq!(t.reg_init(1, 6), 0x1010);
        assert_eq!(t.reg_init(1, 30), 0);
        assert_eq!(
            t.programs[0],
            vec![
                Ori { rd: x(5), rs1: x(0), imm12: 1 },
                Sw { rs1: x(6), rs2: x(5), simm12: 0 },
                Lw { rd: x(8), rs1: x(7), oimm12: 0 },
            ]
        );
        assert_eq!(
            t.postcondition,
            Cond::And(
                Box::new(Cond::Eq { thread: 0, reg: 8, value: 0 }),
                Box::new(Cond::Eq { thread: 1, reg: 8, value: 0 }),
            )
        );
        assert_eq!(t.init_mem_by_addr().get(&0x1000), Some(&0));
    }

    #[test]
    fn labels_resolve_to_forward_branch_offsets() {
        let text = "\
RISCV CTRL
{ 0:x6=x; }
 P0              ;
 lw x5,0(x6)     ;
 beq x5,x5,LC00  ;
 ori x7,x0,1     ;
 LC00: sw x7,0(x6) ;
exists (0:x5=0)
";
        let t = parse_litmus(text).unwrap();
        assert_eq!(t.programs[0][1], Beq { rs1: x(5), rs2: x(5), sbimm12: 8 });
        assert_eq!(t.programs[0].len(), 4);
    }

    #[test]
    fn fence_sets_map_to_bitmasks() {
        let text = "\
RISCV F
{ 0:x6=x; }
 P0           ;
 fence rw,w   ;
 fence r,rw   ;
exists (0:x5=0)
";
        let t = parse_litmus(text).unwrap();
        assert_eq!(t.programs[0][0], Fence { pred: 3, succ: 1 });
        assert_eq!(t.programs[0][1], Fence { pred: 2, succ: 3 });
    }

    #[test]
    fn rejects_non_word_accesses() {
        let text = "\
RISCV BAD
{ 0:x6=x; }
 P0           ;
 lb x5,0(x6)  ;
exists (0:x5=0)
";
        let e = parse_litmus(text).unwrap_err();
        assert!(e.msg.contains("unsupported-instruction"), "{e}");
        assert_eq!(e.line, 4);
    }

    #[test]
    fn rejects_unknown_mnemonics() {
        let text = "\
RISCV AMO
{ 0:x6=x; }
 P0                    ;
 amoswap x5,x5,(x6)    ;
exists (0:x5=0)
";
        let e = parse_litmus(text).unwrap_err();
        assert!(e.msg.contains("unsupported-instruction"), "{e}");
        assert!(e.msg.contains("amoswap"), "{e}");
    }

    #[test]
    fn rejects_too_many_threads() {
        let text = "\
RISCV WIDE
{ }
 P0 | P1 | P2 | P3 | P4 ;
 ori x1,x0,1 | ori x1,x0,1 | ori x1,x0,1 | ori x1,x0,1 | ori x1,x0,1 ;
exists (0:x1=1)
";
        let e = parse_litmus(text).unwrap_err();
        assert!(e.msg.contains("at most 4"), "{e}");
    }

    #[test]
    fn rejects_an_empty_postcondition() {
        let text = "\
RISCV E
{ 0:x6=x; }
 P0          ;
 lw x5,0(x6) ;
exists ()
";
        let e = parse_litmus(text).unwrap_err();
        assert_eq!(e.msg, "empty postcondition");
    }

    #[test]
    fn rejects_a_missing_postcondition() {
        let text = "\
RISCV M
{ 0:x6=x; }
 P0          ;
 lw x5,0(x6) ;
";
        assert!(parse_litmus(text).is_err());
    }

    #[test]
    fn postcondition_or_and_parentheses_nest() {
        let text = "\
RISCV P
{ 0:x6=x; }
 P0          ;
 lw x5,0(x6) ;
exists ((0:x5=0 \\/ 0:x5=1) /\\ 0:x6=4096)
";
        let t = parse_litmus(text).unwrap();
        let regs = |_: usize, r: u8| -> u64 {
            match r {
                5 => 1,
                6 => 4096,
                _ => 0,
            }
        };
        assert!(t.postcondition.eval(&regs));
        assert_eq!(t.postcondition.registers(), vec![(0, 5), (0, 6)]);
    }

    #[test]
    fn unknown_branch_targets_are_errors() {
        let text = "\
RISCV B
{ 0:x6=x; }
 P0              ;
 beq x5,x5,NOPE  ;
exists (0:x5=0)
";
        let e = parse_litmus(text).unwrap_err();
        assert!(e.msg.contains("NOPE"), "{e}");
    }
}
