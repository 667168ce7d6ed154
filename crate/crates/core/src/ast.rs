//! Abstract syntax shared by every stage: terms, formulas, games, proof
//! statements and proof terms.

use std::fmt;

use num_rational::BigRational;

use crate::span::Span;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// A program variable. `idx` is `None` in parsed source and `Some(i)` after
/// SSA elaboration, where index 0 is the initial value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub idx: Option<u32>,
}

impl Var {
    pub fn new(name: impl Into<String>) -> Var {
        Var { name: name.into(), idx: None }
    }

    pub fn ssa(name: impl Into<String>, idx: u32) -> Var {
        Var { name: name.into(), idx: Some(idx) }
    }

    pub fn base(&self) -> Var {
        Var::new(self.name.clone())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.idx {
            None => write!(f, "{}", self.name),
            Some(i) => write!(f, "{}_{}", self.name, i),
        }
    }
}

/// Reference to a label, as in `e@ode(T)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Located {
    pub label: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Num(Rat),
    Var(Var),
    Neg(Box<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    /// Exponents are rational in source; only naturals survive elaboration.
    Pow(Box<Term>, Rat),
    Min(Box<Term>, Box<Term>),
    Max(Box<Term>, Box<Term>),
    App(String, Vec<Term>),
    At(Box<Term>, Located),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
    Ne,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Ne => "!=",
        }
    }

    /// The comparison obtained by swapping operands.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Ge,
            Cmp::Lt => Cmp::Gt,
            Cmp::Ge => Cmp::Le,
            Cmp::Gt => Cmp::Lt,
            c => c,
        }
    }

    /// Classical negation.
    pub fn negate(self) -> Cmp {
        match self {
            Cmp::Le => Cmp::Gt,
            Cmp::Lt => Cmp::Ge,
            Cmp::Ge => Cmp::Lt,
            Cmp::Gt => Cmp::Le,
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Cmp(Cmp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    Box(Box<Game>, Box<Formula>),
    Diamond(Box<Game>, Box<Formula>),
    Pred(String, Vec<Term>),
    At(Box<Formula>, Located),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Game {
    Assign(Var, Term),
    Random(Var),
    Ode(Vec<(Var, Term)>, Formula),
    Test(Formula),
    Seq(Vec<Game>),
    Choice(Box<Game>, Box<Game>),
    Repeat(Box<Game>),
    Dual(Box<Game>),
    /// Reference to a `let g ::= ...` game definition.
    Call(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProofTerm {
    Fact(String),
    Rule(String, Vec<ProofTerm>),
    Ellipsis,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Auto,
    Prop,
    Rcf,
    Solution,
    Induction,
    Guard(Option<Term>),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Prop => "prop",
            Method::Rcf => "rcf",
            Method::Solution => "solution",
            Method::Induction => "induction",
            Method::Guard(_) => "guard",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GhostKind {
    None,
    Forward,
    Inverse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeEq {
    pub name: Option<String>,
    pub var: Var,
    pub rhs: Term,
    pub ghost: GhostKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomClause {
    Assume { name: Option<String>, fml: Formula },
    Assert { name: Option<String>, fml: Formula, using: Option<Vec<ProofTerm>>, method: Option<Method> },
    Duration { name: Option<String>, var: Var, rhs: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeProof {
    pub eqs: Vec<OdeEq>,
    pub dom: Vec<(DomClause, Span)>,
}

impl OdeProof {
    pub fn is_angelic(&self) -> bool {
        self.dom.iter().any(|(c, _)| matches!(c, DomClause::Duration { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForLoop {
    pub init: Stmt,
    pub inv: Stmt,
    pub guard: Stmt,
    pub update: Stmt,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub name: Option<String>,
    pub guard: Formula,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Def {
    Term { name: String, params: Vec<String>, body: Term },
    Formula { name: String, params: Vec<String>, body: Formula },
    Game { name: String, body: Game },
}

impl Def {
    pub fn name(&self) -> &str {
        match self {
            Def::Term { name, .. } | Def::Formula { name, .. } | Def::Game { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Term(Term),
    Formula(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assume { name: Option<String>, fml: Formula },
    Assert { name: Option<String>, fml: Formula, using: Option<Vec<ProofTerm>>, method: Option<Method> },
    /// `x := f;`, `x := *;` (rhs `None`), or with `fact` set the
    /// equality-binding form `?id:(x := f);` whose name may be omitted.
    Assign { name: Option<String>, var: Var, rhs: Option<Term>, fact: bool },
    Ode(OdeProof),
    Loop(Vec<Stmt>),
    For(Box<ForLoop>),
    Switch { scrutinee: Option<ProofTerm>, cases: Vec<Case> },
    Choice(Vec<Vec<Stmt>>),
    Note { name: String, pt: ProofTerm },
    Let(Def),
    Ghost(Vec<Stmt>),
    InverseGhost(Vec<Stmt>),
    Label { name: String, params: Vec<String> },
    Print(Expr),
    Block(Vec<Stmt>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Stmt {
        Stmt { kind, span }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Conclusion { name: String, with: Option<Vec<String>>, span: Span },
    Proves { name: String, target: Formula, span: Span },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Document {
    pub stmts: Vec<Stmt>,
    pub commands: Vec<Command>,
}
