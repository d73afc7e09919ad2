use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{QasmError, STDLIB_NAME};

pub(crate) fn parse_program(text: &str, stdlib: &str) -> Result<Program, QasmError> {
    let mut program = Program::default();
    Parser::new(text)?.run(&mut program, Some(stdlib))?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, QasmError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> QasmError {
        let t = self.peek();
        QasmError::syntax(t.line, t.col, message)
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, QasmError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().tok.describe()
            )))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error_here(format!(
                "expected identifier, found {}",
                other.describe()
            ))),
        }
    }

    fn nonneg_int(&mut self, what: &str) -> Result<u32, QasmError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                self.next();
                Ok(v as u32)
            }
            other => Err(QasmError::syntax(
                t.line,
                t.col,
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    /// `stdlib` is `None` while parsing the library itself, so it cannot include anything.
    fn run(&mut self, program: &mut Program, stdlib: Option<&str>) -> Result<(), QasmError> {
        if let Tok::Ident(kw) = &self.peek().tok {
            if kw == "OPENQASM" {
                let line = self.next().line;
                let t = self.peek().clone();
                let version = match t.tok {
                    Tok::Number(v) => v,
                    other => {
                        return Err(QasmError::syntax(
                            t.line,
                            t.col,
                            format!("expected version number, found {}", other.describe()),
                        ))
                    }
                };
                self.next();
                if version.trunc() != 2.0 {
                    return Err(QasmError::Unsupported {
                        line,
                        construct: format!("OPENQASM {version}"),
                    });
                }
                self.expect(Tok::Semi)?;
            }
        }
        let mut included = false;
        while self.peek().tok != Tok::Eof {
            self.statement(program, stdlib, &mut included)?;
        }
        Ok(())
    }

    fn statement(
        &mut self,
        program: &mut Program,
        stdlib: Option<&str>,
        included: &mut bool,
    ) -> Result<(), QasmError> {
        let start = self.peek().clone();
        let line = start.line;
        let keyword = match &start.tok {
            Tok::Ident(s) => s.clone(),
            other => {
                return Err(self.error_here(format!(
                    "expected a statement, found {}",
                    other.describe()
                )))
            }
        };
        match keyword.as_str() {
            "OPENQASM" => Err(self.error_here("OPENQASM header must be the first statement")),
            "include" => {
                self.next();
                let t = self.peek().clone();
                let file = match t.tok {
                    Tok::Str(s) => s,
                    other => {
                        return Err(QasmError::syntax(
                            t.line,
                            t.col,
                            format!("expected file name string, found {}", other.describe()),
                        ))
                    }
                };
                self.next();
                self.expect(Tok::Semi)?;
                match stdlib {
                    Some(lib) if file == STDLIB_NAME => {
                        if !*included {
                            *included = true;
                            let wrap = |inner| QasmError::Include {
                                file: file.clone(),
                                inner: Box::new(inner),
                            };
                            let mut p = Parser::new(lib).map_err(wrap)?;
                            p.run(program, None).map_err(wrap)?;
                        }
                        Ok(())
                    }
                    _ => Err(QasmError::Unsupported {
                        line,
                        construct: format!("include \"{file}\""),
                    }),
                }
            }
            "qreg" | "creg" => {
                self.next();
                let name = self.ident()?;
                self.expect(Tok::LBracket)?;
                let size = self.nonneg_int("register size")?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Semi)?;
                if size == 0 {
                    return Err(QasmError::semantic(line, format!("register '{name}' has size 0")));
                }
                if program.qreg(&name).is_some() || program.creg(&name).is_some() {
                    return Err(QasmError::Redefinition { line, name });
                }
                let regs = if keyword == "qreg" {
                    &mut program.qregs
                } else {
                    &mut program.cregs
                };
                let offset = regs.iter().map(|r| r.size).sum();
                regs.push(Register { name, size, offset });
                Ok(())
            }
            "gate" => {
                self.next();
                let def = self.gate_def(line)?;
                if program.gate_index.contains_key(&def.name) || is_builtin(&def.name) {
                    return Err(QasmError::Redefinition {
                        line,
                        name: def.name,
                    });
                }
                program
                    .gate_index
                    .insert(def.name.clone(), program.gates.len());
                program.gates.push(def);
                Ok(())
            }
            "opaque" | "if" | "reset" => Err(QasmError::Unsupported {
                line,
                construct: keyword,
            }),
            "measure" => {
                self.next();
                let qubit = self.operand(program, line, RegKind::Quantum)?;
                self.expect(Tok::Arrow)?;
                let clbit = self.operand(program, line, RegKind::Classical)?;
                self.expect(Tok::Semi)?;
                program.statements.push(Statement {
                    kind: StatementKind::Measure { qubit, clbit },
                    line,
                });
                Ok(())
            }
            "barrier" => {
                self.next();
                let args = self.operand_list(program, line)?;
                self.expect(Tok::Semi)?;
                program.statements.push(Statement {
                    kind: StatementKind::Barrier { args },
                    line,
                });
                Ok(())
            }
            _ => {
                self.next();
                let params = self.call_params()?;
                let args = self.operand_list(program, line)?;
                self.expect(Tok::Semi)?;
                program.statements.push(Statement {
                    kind: StatementKind::Call {
                        name: keyword,
                        params,
                        args,
                    },
                    line,
                });
                Ok(())
            }
        }
    }

    fn gate_def(&mut self, line: usize) -> Result<GateDef, QasmError> {
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat(Tok::LParen) && !self.eat(Tok::RParen) {
            loop {
                params.push(self.ident()?);
                if self.eat(Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let mut qargs = vec![self.ident()?];
        while self.eat(Tok::Comma) {
            qargs.push(self.ident()?);
        }
        for (i, a) in params.iter().chain(&qargs).enumerate() {
            if params.iter().chain(&qargs).skip(i + 1).any(|b| b == a) {
                return Err(QasmError::semantic(
                    line,
                    format!("gate '{name}' declares '{a}' twice"),
                ));
            }
        }
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !self.eat(Tok::RBrace) {
            let t = self.peek().clone();
            let callee = match t.tok {
                Tok::Ident(s) => s,
                Tok::Eof => return Err(self.error_here(format!("unterminated body of gate '{name}'"))),
                other => {
                    return Err(QasmError::syntax(
                        t.line,
                        t.col,
                        format!("expected a gate call, found {}", other.describe()),
                    ))
                }
            };
            if matches!(callee.as_str(), "measure" | "reset" | "if" | "opaque" | "gate") {
                return Err(QasmError::Unsupported {
                    line: t.line,
                    construct: format!("{callee} inside gate body"),
                });
            }
            self.next();
            let call_params = if callee == "barrier" {
                Vec::new()
            } else {
                self.call_params()?
            };
            let mut args = vec![self.body_arg(&qargs)?];
            while self.eat(Tok::Comma) {
                args.push(self.body_arg(&qargs)?);
            }
            self.expect(Tok::Semi)?;
            for e in &call_params {
                check_params(e, &params, t.line)?;
            }
            body.push(BodyCall {
                name: callee,
                params: call_params,
                args,
                line: t.line,
            });
        }
        Ok(GateDef {
            name,
            params,
            qargs,
            body,
            line,
        })
    }

    fn body_arg(&mut self, qargs: &[String]) -> Result<String, QasmError> {
        let t = self.peek().clone();
        let name = self.ident()?;
        if self.peek().tok == Tok::LBracket {
            return Err(self.error_here("indexed operands are not allowed inside a gate body"));
        }
        if !qargs.contains(&name) {
            return Err(QasmError::semantic(
                t.line,
                format!("'{name}' is not an argument of the enclosing gate"),
            ));
        }
        Ok(name)
    }

    fn call_params(&mut self) -> Result<Vec<Expr>, QasmError> {
        let mut params = Vec::new();
        if self.eat(Tok::LParen) && !self.eat(Tok::RParen) {
            loop {
                params.push(self.expr()?);
                if self.eat(Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(params)
    }

    fn operand_list(&mut self, program: &Program, line: usize) -> Result<Vec<Operand>, QasmError> {
        let mut args = vec![self.operand(program, line, RegKind::Quantum)?];
        while self.eat(Tok::Comma) {
            args.push(self.operand(program, line, RegKind::Quantum)?);
        }
        Ok(args)
    }

    fn operand(&mut self, program: &Program, line: usize, kind: RegKind) -> Result<Operand, QasmError> {
        let register = self.ident()?;
        let reg = match kind {
            RegKind::Quantum => program.qreg(&register),
            RegKind::Classical => program.creg(&register),
        };
        let size = match reg {
            Some(r) => r.size,
            None => {
                return Err(QasmError::UndefinedRegister {
                    line,
                    name: register,
                })
            }
        };
        let index = if self.eat(Tok::LBracket) {
            let index = self.nonneg_int("register index")?;
            self.expect(Tok::RBracket)?;
            if index >= size {
                return Err(QasmError::IndexOutOfBounds {
                    line,
                    register,
                    index,
                    size,
                });
            }
            Some(index)
        } else {
            None
        };
        Ok(Operand { register, index })
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, QasmError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr, QasmError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, QasmError> {
        if self.eat(Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    // power := atom ('^' unary)?
    fn power(&mut self) -> Result<Expr, QasmError> {
        let base = self.atom()?;
        if self.eat(Tok::Caret) {
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, QasmError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Number(v) => {
                self.next();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                if let Some(f) = MathFn::from_name(&name) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                Ok(Expr::Param(name))
            }
            other => Err(QasmError::syntax(
                t.line,
                t.col,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

#[derive(Clone, Copy)]
enum RegKind {
    Quantum,
    Classical,
}

fn is_builtin(name: &str) -> bool {
    name == "U" || name == "CX"
}

fn check_params(e: &Expr, params: &[String], line: usize) -> Result<(), QasmError> {
    match e {
        Expr::Number(_) | Expr::Pi => Ok(()),
        Expr::Param(p) if params.contains(p) => Ok(()),
        Expr::Param(p) => Err(QasmError::semantic(line, format!("unknown parameter '{p}'"))),
        Expr::Neg(a) | Expr::Call(_, a) => check_params(a, params, line),
        Expr::Binary(_, a, b) => {
            check_params(a, params, line)?;
            check_params(b, params, line)
        }
    }
}
