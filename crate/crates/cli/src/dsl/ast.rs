//! Syntax tree of model files and its printer.
//!
//! Printing is canonical: `parse(print(m)) == m` for every parsed model.

use std::fmt::{self, Write};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ModelFile {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Alphabet(Vec<String>),
    Graph(GraphDecl),
    Constraint(ConstraintDecl),
    Rule(RuleDecl),
    Automaton(AutomatonDecl),
    Formula(FormulaDecl),
    Query(QueryDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphItem {
    Node {
        name: String,
        label: String,
    },
    Edge {
        name: Option<String>,
        src: String,
        label: String,
        tgt: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphDecl {
    pub name: String,
    pub items: Vec<GraphItem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CondExpr {
    True,
    False,
    Not(Box<CondExpr>),
    And(Vec<CondExpr>),
    Or(Vec<CondExpr>),
    Implies(Box<CondExpr>, Box<CondExpr>),
    /// Extension by the listed items; `None` nested means `true`.
    Exists(Vec<GraphItem>, Option<Box<CondExpr>>),
    Forall(Vec<GraphItem>, Box<CondExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub name: String,
    pub body: CondExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleDecl {
    System,
    Environment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub name: String,
    pub role: RoleDecl,
    pub left: Vec<GraphItem>,
    pub right: Vec<GraphItem>,
    pub when: Option<CondExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDecl {
    pub from: String,
    pub to: String,
    pub select: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonDecl {
    pub name: String,
    pub states: Vec<String>,
    pub start: String,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Logic {
    Ltl,
    Ctl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    X,
    G,
    AX,
    EX,
    AG,
    EG,
}

impl UnaryOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnaryOp::X => "X",
            UnaryOp::G => "G",
            UnaryOp::AX => "AX",
            UnaryOp::EX => "EX",
            UnaryOp::AG => "AG",
            UnaryOp::EG => "EG",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathQuant {
    A,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    U,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TemporalExpr {
    True,
    False,
    Atom(String),
    Not(Box<TemporalExpr>),
    And(Box<TemporalExpr>, Box<TemporalExpr>),
    Or(Box<TemporalExpr>, Box<TemporalExpr>),
    Implies(Box<TemporalExpr>, Box<TemporalExpr>),
    Unary(UnaryOp, Box<TemporalExpr>),
    /// `a U b`, or `A(a U b)` / `E(a U b)` with a path quantifier.
    Binary(Option<PathQuant>, BinaryOp, Box<TemporalExpr>, Box<TemporalExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaDecl {
    pub name: String,
    pub logic: Logic,
    pub body: TemporalExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QueryDecl {
    pub name: String,
    pub automaton: Option<String>,
    pub kind: Option<String>,
    pub k: Option<usize>,
    pub pre: Option<String>,
    pub post: Option<String>,
    pub inits: Vec<String>,
    pub method: Option<String>,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_graph_size: Option<usize>,
}

fn write_items(out: &mut String, items: &[GraphItem]) {
    out.push('{');
    for it in items {
        out.push(' ');
        match it {
            GraphItem::Node { name, label } => write!(out, "{name}: {label};").unwrap(),
            GraphItem::Edge {
                name,
                src,
                label,
                tgt,
            } => {
                if let Some(n) = name {
                    write!(out, "{n}: ").unwrap();
                }
                write!(out, "{src} -{label}-> {tgt};").unwrap();
            }
        }
    }
    out.push_str(" }");
}

impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, parts: &[CondExpr], op: &str| {
            write!(f, "(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")
        };
        match self {
            CondExpr::True => write!(f, "true"),
            CondExpr::False => write!(f, "false"),
            CondExpr::Not(c) => write!(f, "!{c}"),
            CondExpr::And(cs) => join(f, cs, "&"),
            CondExpr::Or(cs) => join(f, cs, "|"),
            CondExpr::Implies(a, b) => write!(f, "({a} -> {b})"),
            CondExpr::Exists(items, nested) => {
                let mut s = String::new();
                write_items(&mut s, items);
                write!(f, "exists {s}")?;
                match nested {
                    Some(c) => write!(f, " : {c}"),
                    None => Ok(()),
                }
            }
            CondExpr::Forall(items, nested) => {
                let mut s = String::new();
                write_items(&mut s, items);
                write!(f, "forall {s} : {nested}")
            }
        }
    }
}

impl fmt::Display for TemporalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalExpr::True => write!(f, "true"),
            TemporalExpr::False => write!(f, "false"),
            TemporalExpr::Atom(a) => write!(f, "{a}"),
            TemporalExpr::Not(a) => write!(f, "!{a}"),
            TemporalExpr::And(a, b) => write!(f, "({a} & {b})"),
            TemporalExpr::Or(a, b) => write!(f, "({a} | {b})"),
            TemporalExpr::Implies(a, b) => write!(f, "({a} -> {b})"),
            TemporalExpr::Unary(op, a) => write!(f, "{} {a}", op.as_str()),
            TemporalExpr::Binary(q, op, a, b) => {
                let op = match op {
                    BinaryOp::U => "U",
                    BinaryOp::W => "W",
                };
                match q {
                    None => write!(f, "({a} {op} {b})"),
                    Some(PathQuant::A) => write!(f, "A({a} {op} {b})"),
                    Some(PathQuant::E) => write!(f, "E({a} {op} {b})"),
                }
            }
        }
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Alphabet(labels) => writeln!(f, "alphabet {};", labels.join(", ")),
            Item::Graph(g) => {
                let mut s = String::new();
                write_items(&mut s, &g.items);
                writeln!(f, "graph {} {s}", g.name)
            }
            Item::Constraint(c) => writeln!(f, "constraint {} := {};", c.name, c.body),
            Item::Rule(r) => {
                let role = match r.role {
                    RoleDecl::System => "system",
                    RoleDecl::Environment => "environment",
                };
                writeln!(f, "rule {} {role} {{", r.name)?;
                let (mut l, mut rr) = (String::new(), String::new());
                write_items(&mut l, &r.left);
                write_items(&mut rr, &r.right);
                writeln!(f, "  left {l}")?;
                writeln!(f, "  right {rr}")?;
                if let Some(c) = &r.when {
                    writeln!(f, "  when {c};")?;
                }
                writeln!(f, "}}")
            }
            Item::Automaton(a) => {
                writeln!(f, "automaton {} {{", a.name)?;
                writeln!(f, "  states {};", a.states.join(" "))?;
                writeln!(f, "  start {};", a.start)?;
                for t in &a.transitions {
                    writeln!(f, "  {} -> {} [{}];", t.from, t.to, t.select.join(", "))?;
                }
                writeln!(f, "}}")
            }
            Item::Formula(d) => {
                let kw = match d.logic {
                    Logic::Ltl => "ltl",
                    Logic::Ctl => "ctl",
                };
                writeln!(f, "{kw} {} := {};", d.name, d.body)
            }
            Item::Query(q) => {
                writeln!(f, "query {} {{", q.name)?;
                if let Some(a) = &q.automaton {
                    writeln!(f, "  automaton {a};")?;
                }
                if let Some(k) = &q.kind {
                    writeln!(f, "  kind {k};")?;
                }
                if let Some(k) = q.k {
                    writeln!(f, "  k {k};")?;
                }
                if let Some(c) = &q.pre {
                    writeln!(f, "  pre {c};")?;
                }
                if let Some(d) = &q.post {
                    writeln!(f, "  post {d};")?;
                }
                if !q.inits.is_empty() {
                    writeln!(f, "  init {};", q.inits.join(", "))?;
                }
                if let Some(m) = &q.method {
                    writeln!(f, "  method {m};")?;
                }
                if let Some(n) = q.max_states {
                    writeln!(f, "  max-states {n};")?;
                }
                if let Some(n) = q.max_depth {
                    writeln!(f, "  max-depth {n};")?;
                }
                if let Some(n) = q.max_graph_size {
                    writeln!(f, "  max-graph-size {n};")?;
                }
                writeln!(f, "}}")
            }
        }
    }
}
