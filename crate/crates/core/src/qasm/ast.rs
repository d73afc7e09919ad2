use std::collections::HashMap;

/// Parameter expression, evaluated to `f64` during flattening.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(f64),
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(MathFn, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MathFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl MathFn {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => MathFn::Sin,
            "cos" => MathFn::Cos,
            "tan" => MathFn::Tan,
            "exp" => MathFn::Exp,
            "ln" => MathFn::Ln,
            "sqrt" => MathFn::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            MathFn::Sin => x.sin(),
            MathFn::Cos => x.cos(),
            MathFn::Tan => x.tan(),
            MathFn::Exp => x.exp(),
            MathFn::Ln => x.ln(),
            MathFn::Sqrt => x.sqrt(),
        }
    }
}

impl Expr {
    /// Evaluates with `lookup` resolving parameter names. Returns the unresolved name on failure.
    pub fn eval(&self, lookup: &impl Fn(&str) -> Option<f64>) -> Result<f64, String> {
        Ok(match self {
            Expr::Number(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Param(name) => lookup(name).ok_or_else(|| name.clone())?,
            Expr::Neg(e) => -e.eval(lookup)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(lookup)?, b.eval(lookup)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(lookup)?),
        })
    }
}

/// `name[index]`, or the whole register when `index` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operand {
    pub register: String,
    pub index: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub size: u32,
    /// Position of element 0 in the flat index space of all registers of the same kind.
    pub offset: u32,
}

/// A gate application inside a gate body; operands are the definition's formal arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyCall {
    pub name: String,
    pub params: Vec<Expr>,
    pub args: Vec<String>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub qargs: Vec<String>,
    pub body: Vec<BodyCall>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StatementKind {
    /// `U`, `CX` or a named gate applied to register operands.
    Call {
        name: String,
        params: Vec<Expr>,
        args: Vec<Operand>,
    },
    Measure {
        qubit: Operand,
        clbit: Operand,
    },
    Barrier {
        args: Vec<Operand>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub kind: StatementKind,
    pub line: usize,
}

/// Parsed program: declarations, gate definitions (including any included library) and the
/// top-level statements in source order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub qregs: Vec<Register>,
    pub cregs: Vec<Register>,
    pub gates: Vec<GateDef>,
    pub statements: Vec<Statement>,
    pub(crate) gate_index: HashMap<String, usize>,
}

impl Program {
    pub fn num_qubits(&self) -> u32 {
        self.qregs.iter().map(|r| r.size).sum()
    }

    pub fn num_clbits(&self) -> u32 {
        self.cregs.iter().map(|r| r.size).sum()
    }

    pub fn qreg(&self, name: &str) -> Option<&Register> {
        self.qregs.iter().find(|r| r.name == name)
    }

    pub fn creg(&self, name: &str) -> Option<&Register> {
        self.cregs.iter().find(|r| r.name == name)
    }

    pub fn gate(&self, name: &str) -> Option<&GateDef> {
        self.gate_index.get(name).map(|&i| &self.gates[i])
    }
}
