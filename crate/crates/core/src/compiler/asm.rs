use std::fmt::Write;

use thiserror::Error;

use super::{CodeArea, Instr};
use crate::terms::Reg;
use crate::typesys::TypeHierarchy;

/// One instruction per line; labels on their own line as `name:`.
pub fn disassemble(area: &CodeArea, h: &TypeHierarchy) -> String {
    let mut out = String::new();
    let mut labels = area.labels.iter().peekable();
    for (pc, ins) in area.code.iter().enumerate() {
        while let Some((name, _)) = labels.next_if(|(_, at)| *at == pc) {
            let _ = writeln!(out, "{name}:");
        }
        let _ = writeln!(out, "{}", show(ins, h));
    }
    for (name, _) in labels {
        let _ = writeln!(out, "{name}:");
    }
    out
}

fn show(ins: &Instr, h: &TypeHierarchy) -> String {
    let n = |t| h.type_name(t);
    match *ins {
        Instr::PutNode { ty, arity, reg } => format!("put_node {}/{arity},{reg}", n(ty)),
        Instr::PutVar { ty, reg } => format!("put_var {},{reg}", n(ty)),
        Instr::PutArc { reg, offset, value } => format!("put_arc {reg},{offset},{value}"),
        Instr::GetStructure { ty, arity, reg } => {
            format!("get_structure {}/{arity},{reg}", n(ty))
        }
        Instr::GetVar { ty, reg } => format!("get_var {},{reg}", n(ty)),
        Instr::UnifyVariable(r) => format!("unify_variable {r}"),
        Instr::UnifyValue(r) => format!("unify_value {r}"),
        Instr::Advance => "advance".into(),
        Instr::StartRule(k) => format!("start_rule {k}"),
        Instr::MoveDot => "move_dot".into(),
        Instr::NextItem => "next_item".into(),
        Instr::EndRule => "end_rule".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct AsmError {
    pub line: usize,
    pub message: String,
}

/// Reads a listing produced by [`disassemble`] back into a code area.
pub fn assemble(text: &str, h: &TypeHierarchy) -> Result<CodeArea, AsmError> {
    let mut area = CodeArea::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| AsmError {
            line: i + 1,
            message,
        };
        if let Some(label) = line.strip_suffix(':') {
            area.labels.push((label.to_string(), area.code.len()));
            continue;
        }
        let (op, rest) = line.split_once(' ').unwrap_or((line, ""));
        let args: Vec<&str> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',').map(str::trim).collect()
        };
        let want = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(err(format!("`{op}` takes {k} operands")))
            }
        };
        let reg = |s: &str| {
            s.strip_prefix('X')
                .and_then(|d| d.parse().ok())
                .map(Reg)
                .ok_or_else(|| err(format!("bad register `{s}`")))
        };
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad number `{s}`")))
        };
        let ty = |s: &str| {
            h.type_id(s)
                .ok_or_else(|| err(format!("unknown type `{s}`")))
        };
        let functor = |s: &str| {
            let (name, arity) = s
                .split_once('/')
                .ok_or_else(|| err(format!("expected type/arity, found `{s}`")))?;
            let t = ty(name)?;
            let arity = num(arity)?;
            if arity != h.arity(t) {
                return Err(err(format!("`{name}` has arity {}", h.arity(t))));
            }
            Ok((t, arity))
        };
        let ins = match op {
            "put_node" | "get_structure" => {
                want(2)?;
                let (t, arity) = functor(args[0])?;
                let r = reg(args[1])?;
                if op == "put_node" {
                    Instr::PutNode {
                        ty: t,
                        arity,
                        reg: r,
                    }
                } else {
                    Instr::GetStructure {
                        ty: t,
                        arity,
                        reg: r,
                    }
                }
            }
            "put_var" | "get_var" => {
                want(2)?;
                let (t, r) = (ty(args[0])?, reg(args[1])?);
                if op == "put_var" {
                    Instr::PutVar { ty: t, reg: r }
                } else {
                    Instr::GetVar { ty: t, reg: r }
                }
            }
            "put_arc" => {
                want(3)?;
                Instr::PutArc {
                    reg: reg(args[0])?,
                    offset: num(args[1])?,
                    value: reg(args[2])?,
                }
            }
            "unify_variable" => {
                want(1)?;
                Instr::UnifyVariable(reg(args[0])?)
            }
            "unify_value" => {
                want(1)?;
                Instr::UnifyValue(reg(args[0])?)
            }
            "start_rule" => {
                want(1)?;
                Instr::StartRule(num(args[0])?)
            }
            "advance" | "move_dot" | "next_item" | "end_rule" => {
                want(0)?;
                match op {
                    "advance" => Instr::Advance,
                    "move_dot" => Instr::MoveDot,
                    "next_item" => Instr::NextItem,
                    _ => Instr::EndRule,
                }
            }
            other => return Err(err(format!("unknown instruction `{other}`"))),
        };
        area.code.push(ins);
    }
    Ok(area)
}
