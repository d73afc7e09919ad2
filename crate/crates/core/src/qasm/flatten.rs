use std::collections::HashMap;

use super::ast::*;
use super::QasmError;
use crate::circuit::{Circuit, ClassicalRegister, Gate, Measurement};

/// Expands every gate call down to `U` and `CX`, in program order.
///
/// Gate definitions may reference each other in any order; a definition that (transitively)
/// calls itself is rejected. Measurements are collected separately and must not be followed by
/// any gate on the measured qubit.
pub fn flatten(program: &Program) -> Result<Circuit, QasmError> {
    let mut ctx = Flattener {
        program,
        circuit: Circuit::new(program.num_qubits()),
        measured: vec![false; program.num_qubits() as usize],
        stack: Vec::new(),
    };
    ctx.circuit.cregs = program
        .cregs
        .iter()
        .map(|r| ClassicalRegister {
            name: r.name.clone(),
            size: r.size,
        })
        .collect();

    for stmt in &program.statements {
        let line = stmt.line;
        match &stmt.kind {
            StatementKind::Call { name, params, args } => {
                let values = params
                    .iter()
                    .map(|e| eval(e, &HashMap::new(), line))
                    .collect::<Result<Vec<_>, _>>()?;
                for qubits in ctx.broadcast(args, line)? {
                    ctx.apply(name, &values, &qubits, line)?;
                }
            }
            StatementKind::Measure { qubit, clbit } => {
                let qs = ctx.resolve(qubit, true);
                let cs = ctx.resolve(clbit, false);
                if qs.len() != cs.len() {
                    return Err(QasmError::semantic(
                        line,
                        format!(
                            "measure maps {} qubits onto {} classical bits",
                            qs.len(),
                            cs.len()
                        ),
                    ));
                }
                for (q, c) in qs.into_iter().zip(cs) {
                    ctx.measured[q as usize] = true;
                    ctx.circuit.measurements.push(Measurement {
                        qubit: q,
                        clbit: c,
                    });
                }
            }
            StatementKind::Barrier { .. } => ctx.circuit.push(Gate::Barrier),
        }
    }
    Ok(ctx.circuit)
}

struct Flattener<'a> {
    program: &'a Program,
    circuit: Circuit,
    measured: Vec<bool>,
    stack: Vec<&'a str>,
}

impl<'a> Flattener<'a> {
    fn resolve(&self, op: &Operand, quantum: bool) -> Vec<u32> {
        let reg = if quantum {
            self.program.qreg(&op.register)
        } else {
            self.program.creg(&op.register)
        }
        .expect("operands are checked by the parser");
        match op.index {
            Some(i) => vec![reg.offset + i],
            None => (0..reg.size).map(|i| reg.offset + i).collect(),
        }
    }

    /// Expands whole-register operands into one operand tuple per register element.
    fn broadcast(&self, args: &[Operand], line: usize) -> Result<Vec<Vec<u32>>, QasmError> {
        let resolved: Vec<Vec<u32>> = args.iter().map(|a| self.resolve(a, true)).collect();
        let width = resolved
            .iter()
            .zip(args)
            .filter(|(_, a)| a.index.is_none())
            .map(|(r, _)| r.len())
            .try_fold(None, |acc: Option<usize>, len| match acc {
                Some(w) if w != len => Err(QasmError::semantic(
                    line,
                    format!("registers of different sizes ({w} and {len}) in one call"),
                )),
                _ => Ok(Some(len)),
            })?;
        let Some(width) = width else {
            return Ok(vec![resolved.into_iter().map(|r| r[0]).collect()]);
        };
        Ok((0..width)
            .map(|k| {
                resolved
                    .iter()
                    .map(|r| if r.len() == 1 { r[0] } else { r[k] })
                    .collect()
            })
            .collect())
    }

    fn emit(&mut self, gate: Gate, line: usize) -> Result<(), QasmError> {
        for q in gate.qubits().iter() {
            if self.measured[q as usize] {
                return Err(QasmError::Unsupported {
                    line,
                    construct: format!("mid-circuit measurement (gate on qubit {q} after measure)"),
                });
            }
        }
        self.circuit.push(gate);
        Ok(())
    }

    fn apply(&mut self, name: &str, params: &[f64], qubits: &[u32], line: usize) -> Result<(), QasmError> {
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(QasmError::semantic(
                    line,
                    format!("'{name}' applied to qubit {q} more than once"),
                ));
            }
        }
        let arity = |expected_params: usize, expected_qubits: usize| {
            if params.len() != expected_params {
                Err(QasmError::Arity {
                    line,
                    name: name.to_string(),
                    message: format!("takes {expected_params} parameters, {} given", params.len()),
                })
            } else if qubits.len() != expected_qubits {
                Err(QasmError::Arity {
                    line,
                    name: name.to_string(),
                    message: format!("takes {expected_qubits} qubits, {} given", qubits.len()),
                })
            } else {
                Ok(())
            }
        };
        match name {
            "U" => {
                arity(3, 1)?;
                return self.emit(Gate::u(qubits[0], params[0], params[1], params[2]), line);
            }
            "CX" => {
                arity(0, 2)?;
                return self.emit(Gate::cx(qubits[0], qubits[1]), line);
            }
            _ => {}
        }
        let program = self.program;
        let def = program.gate(name).ok_or_else(|| QasmError::UndefinedGate {
            line,
            name: name.to_string(),
        })?;
        arity(def.params.len(), def.qargs.len())?;
        if let Some(pos) = self.stack.iter().position(|&n| n == def.name) {
            let mut cycle: Vec<String> = self.stack[pos..].iter().map(|s| s.to_string()).collect();
            cycle.push(def.name.clone());
            return Err(QasmError::RecursiveDefinition { cycle });
        }
        let env: HashMap<&str, f64> = def
            .params
            .iter()
            .map(String::as_str)
            .zip(params.iter().copied())
            .collect();
        let binding: HashMap<&str, u32> = def
            .qargs
            .iter()
            .map(String::as_str)
            .zip(qubits.iter().copied())
            .collect();

        self.stack.push(&def.name);
        for call in &def.body {
            let args: Vec<u32> = call.args.iter().map(|a| binding[a.as_str()]).collect();
            if call.name == "barrier" {
                self.circuit.push(Gate::Barrier);
                continue;
            }
            let values = call
                .params
                .iter()
                .map(|e| eval(e, &env, line))
                .collect::<Result<Vec<_>, _>>()?;
            self.apply(&call.name, &values, &args, line)?;
        }
        self.stack.pop();
        Ok(())
    }
}

fn eval(e: &Expr, env: &HashMap<&str, f64>, line: usize) -> Result<f64, QasmError> {
    let v = e
        .eval(&|name| env.get(name).copied())
        .map_err(|name| QasmError::semantic(line, format!("unknown parameter '{name}'")))?;
    if !v.is_finite() {
        return Err(QasmError::semantic(line, "angle evaluates to a non-finite value"));
    }
    Ok(v)
}
