//! Name resolution and translation of a parsed model into engine objects.

use std::collections::{BTreeMap, BTreeSet};

use adverse_core::correctness::{Formula, Kind, Method};
use adverse_core::ctl::Ctl;
use adverse_core::graph::{marking_labels, EdgeId, Graph, LabelSet, NodeId};
use adverse_core::ltl::Ltl;
use adverse_core::morphism::Morphism;
use adverse_core::regulation::{JointModel, RegulationAutomaton, Transition};
use adverse_core::rewrite::{PlainRule, Role, Rule};
use adverse_core::temporal::Prop;
use adverse_core::condition::Condition;
use thiserror::Error;

use super::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{message} `{name}`")]
pub struct ResolutionError {
    pub name: String,
    pub message: String,
}

fn err<T>(message: &str, name: &str) -> Result<T, ResolutionError> {
    Err(ResolutionError {
        name: name.to_string(),
        message: message.to_string(),
    })
}

/// A model with every name resolved.
#[derive(Clone, Debug)]
pub struct Model {
    pub alphabet: LabelSet,
    pub graphs: Vec<(String, Graph)>,
    pub constraints: Vec<Prop>,
    pub system: Vec<Rule>,
    pub environment: Vec<Rule>,
    pub automata: Vec<(String, RegulationAutomaton)>,
    pub formulas: Vec<(String, Formula)>,
    pub queries: Vec<QueryDecl>,
}

impl Model {
    pub fn graph(&self, name: &str) -> Result<&Graph, ResolutionError> {
        match self.graphs.iter().find(|(n, _)| n == name) {
            Some((_, g)) => Ok(g),
            None => err("unknown graph", name),
        }
    }

    pub fn prop(&self, name: &str) -> Result<&Prop, ResolutionError> {
        match self.constraints.iter().find(|p| p.name == name) {
            Some(p) => Ok(p),
            None => err("unknown constraint", name),
        }
    }

    pub fn formula(&self, name: &str) -> Result<&Formula, ResolutionError> {
        match self.formulas.iter().find(|(n, _)| n == name) {
            Some((_, f)) => Ok(f),
            None => err("unknown formula", name),
        }
    }

    pub fn query(&self, name: &str) -> Result<&QueryDecl, ResolutionError> {
        match self.queries.iter().find(|q| q.name == name) {
            Some(q) => Ok(q),
            None => err("unknown query", name),
        }
    }

    /// The named automaton, or the only one when `name` is `None`.
    pub fn automaton(&self, name: Option<&str>) -> Result<&RegulationAutomaton, ResolutionError> {
        match name {
            Some(n) => match self.automata.iter().find(|(a, _)| a == n) {
                Some((_, a)) => Ok(a),
                None => err("unknown automaton", n),
            },
            None => match self.automata.as_slice() {
                [(_, a)] => Ok(a),
                [] => err("model declares no automaton", ""),
                _ => err("several automata declared; choose one of", &self.automaton_names()),
            },
        }
    }

    fn automaton_names(&self) -> String {
        self.automata
            .iter()
            .map(|(n, _)| n.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn joint_model(&self, automaton: Option<&str>) -> Result<JointModel, ResolutionError> {
        let a = self.automaton(automaton)?.clone();
        JointModel::new(self.system.clone(), self.environment.clone(), a).map_err(|e| {
            ResolutionError {
                name: automaton.unwrap_or("").to_string(),
                message: e.to_string(),
            }
        })
    }

    pub fn state_labels(&self) -> LabelSet {
        self.automata
            .iter()
            .flat_map(|(_, a)| a.states.iter().cloned())
            .collect()
    }
}

/// A graph under construction with its node and edge names.
#[derive(Clone, Default)]
struct Named {
    graph: Graph,
    nodes: BTreeMap<String, NodeId>,
    edges: BTreeMap<String, EdgeId>,
    /// Declaration order of named nodes.
    order: Vec<String>,
}

struct Ctx<'a> {
    labels: &'a mut BTreeSet<String>,
}

impl Ctx<'_> {
    fn add_items(
        &mut self,
        g: &mut Named,
        items: &[GraphItem],
        allow_redeclare: bool,
    ) -> Result<(), ResolutionError> {
        for it in items {
            match it {
                GraphItem::Node { name, label } => {
                    self.labels.insert(label.clone());
                    if let Some(&n) = g.nodes.get(name) {
                        if !allow_redeclare {
                            return err("duplicate node", name);
                        }
                        if g.graph.node_label(n) != label {
                            return err("node redeclared with a different label", name);
                        }
                        continue;
                    }
                    let id = g.graph.add_node(label.clone());
                    g.nodes.insert(name.clone(), id);
                    g.order.push(name.clone());
                }
                GraphItem::Edge {
                    name,
                    src,
                    label,
                    tgt,
                } => {
                    self.labels.insert(label.clone());
                    let Some(&s) = g.nodes.get(src) else {
                        return err("unknown node", src);
                    };
                    let Some(&t) = g.nodes.get(tgt) else {
                        return err("unknown node", tgt);
                    };
                    if let Some(n) = name {
                        if g.edges.contains_key(n) || g.nodes.contains_key(n) {
                            return err("duplicate edge name", n);
                        }
                    }
                    let id = g.graph.add_edge(s, t, label.clone()).expect("endpoints exist");
                    if let Some(n) = name {
                        g.edges.insert(n.clone(), id);
                    }
                }
            }
        }
        Ok(())
    }

    fn condition(&mut self, c: &CondExpr, ctx: &Named) -> Result<Condition, ResolutionError> {
        Ok(match c {
            CondExpr::True => Condition::True,
            CondExpr::False => Condition::false_(),
            CondExpr::Not(a) => self.condition(a, ctx)?.negate(),
            CondExpr::And(cs) => Condition::and(
                cs.iter()
                    .map(|c| self.condition(c, ctx))
                    .collect::<Result<_, _>>()?,
            ),
            CondExpr::Or(cs) => Condition::or(
                cs.iter()
                    .map(|c| self.condition(c, ctx))
                    .collect::<Result<_, _>>()?,
            ),
            CondExpr::Implies(a, b) => {
                Condition::implies(self.condition(a, ctx)?, self.condition(b, ctx)?)
            }
            CondExpr::Exists(items, nested) => {
                let mut ext = ctx.clone();
                self.add_items(&mut ext, items, true)?;
                let inner = match nested {
                    Some(n) => self.condition(n, &ext)?,
                    None => Condition::True,
                };
                Condition::exists(Morphism::inclusion(&ctx.graph), ext.graph, inner)
            }
            CondExpr::Forall(items, nested) => {
                let mut ext = ctx.clone();
                self.add_items(&mut ext, items, true)?;
                let inner = self.condition(nested, &ext)?;
                Condition::forall(Morphism::inclusion(&ctx.graph), ext.graph, inner)
            }
        })
    }

    fn rule(&mut self, r: &RuleDecl) -> Result<Rule, ResolutionError> {
        let mut left = Named::default();
        self.add_items(&mut left, &r.left, false)?;
        let mut right = Named::default();
        self.add_items(&mut right, &r.right, false)?;

        let mut k = Graph::new();
        let (mut kl, mut kr) = (Morphism::empty(), Morphism::empty());
        let mut k_nodes: BTreeMap<&str, NodeId> = BTreeMap::new();
        for name in &left.order {
            let Some(&rn) = right.nodes.get(name) else { continue };
            let ln = left.nodes[name];
            if left.graph.node_label(ln) != right.graph.node_label(rn) {
                return err("preserved node changes its label in rule", name);
            }
            k_nodes.insert(name, k.add_node(left.graph.node_label(ln)));
            kl.nodes.push(ln);
            kr.nodes.push(rn);
        }
        let node_name = |g: &Named, n: NodeId| -> String {
            g.nodes.iter().find(|(_, &v)| v == n).unwrap().0.clone()
        };
        let mut preserved: Vec<(&String, EdgeId)> = left.edges.iter().map(|(n, &e)| (n, e)).collect();
        preserved.sort_by_key(|&(_, e)| e);
        for (name, le) in preserved {
            let Some(&re) = right.edges.get(name) else { continue };
            let (l, rr) = (left.graph.edge(le), right.graph.edge(re));
            let (ls, lt) = (node_name(&left, l.src), node_name(&left, l.tgt));
            let (rs, rt) = (node_name(&right, rr.src), node_name(&right, rr.tgt));
            if l.label != rr.label || ls != rs || lt != rt {
                return err("preserved edge changes in rule", name);
            }
            let (Some(&s), Some(&t)) = (k_nodes.get(ls.as_str()), k_nodes.get(lt.as_str())) else {
                return err("preserved edge has a deleted endpoint", name);
            };
            k.add_edge(s, t, l.label.clone()).expect("interface endpoints exist");
            kl.edges.push(le);
            kr.edges.push(re);
        }
        let plain = PlainRule::new(r.name.clone(), left.graph.clone(), k, right.graph, kl, kr)
            .map_err(|e| ResolutionError {
                name: r.name.clone(),
                message: e.to_string(),
            })?;
        let ac = match &r.when {
            Some(c) => self.condition(c, &left)?,
            None => Condition::True,
        };
        let role = match r.role {
            RoleDecl::System => Role::System,
            RoleDecl::Environment => Role::Environment,
        };
        Rule::new(plain, ac, role).map_err(|e| ResolutionError {
            name: r.name.clone(),
            message: e.to_string(),
        })
    }
}

fn temporal_ltl(e: &TemporalExpr, props: &[Prop]) -> Result<Ltl, ResolutionError> {
    let rec = |x: &TemporalExpr| temporal_ltl(x, props);
    Ok(match e {
        TemporalExpr::True => Ltl::True,
        TemporalExpr::False => Ltl::False,
        TemporalExpr::Atom(a) => Ltl::atom(atom(a, props)?),
        TemporalExpr::Not(a) => Ltl::not(rec(a)?),
        TemporalExpr::And(a, b) => Ltl::and(rec(a)?, rec(b)?),
        TemporalExpr::Or(a, b) => Ltl::or(rec(a)?, rec(b)?),
        TemporalExpr::Implies(a, b) => Ltl::implies(rec(a)?, rec(b)?),
        TemporalExpr::Unary(UnaryOp::X, a) => Ltl::x(rec(a)?),
        TemporalExpr::Unary(UnaryOp::G, a) => Ltl::g(rec(a)?),
        TemporalExpr::Binary(None, BinaryOp::U, a, b) => Ltl::u(rec(a)?, rec(b)?),
        TemporalExpr::Binary(None, BinaryOp::W, a, b) => Ltl::w(rec(a)?, rec(b)?),
        other => return err("path quantifier in LTL formula", &other.to_string()),
    })
}

fn temporal_ctl(e: &TemporalExpr, props: &[Prop]) -> Result<Ctl, ResolutionError> {
    let rec = |x: &TemporalExpr| temporal_ctl(x, props);
    Ok(match e {
        TemporalExpr::True => Ctl::True,
        TemporalExpr::False => Ctl::False,
        TemporalExpr::Atom(a) => Ctl::atom(atom(a, props)?),
        TemporalExpr::Not(a) => Ctl::not(rec(a)?),
        TemporalExpr::And(a, b) => Ctl::and(rec(a)?, rec(b)?),
        TemporalExpr::Or(a, b) => Ctl::or(rec(a)?, rec(b)?),
        TemporalExpr::Implies(a, b) => Ctl::implies(rec(a)?, rec(b)?),
        TemporalExpr::Unary(UnaryOp::AX, a) => Ctl::ax(rec(a)?),
        TemporalExpr::Unary(UnaryOp::EX, a) => Ctl::ex(rec(a)?),
        TemporalExpr::Unary(UnaryOp::AG, a) => Ctl::ag(rec(a)?),
        TemporalExpr::Unary(UnaryOp::EG, a) => Ctl::eg(rec(a)?),
        TemporalExpr::Binary(Some(PathQuant::A), BinaryOp::U, a, b) => Ctl::au(rec(a)?, rec(b)?),
        TemporalExpr::Binary(Some(PathQuant::E), BinaryOp::U, a, b) => Ctl::eu(rec(a)?, rec(b)?),
        TemporalExpr::Binary(Some(PathQuant::A), BinaryOp::W, a, b) => Ctl::aw(rec(a)?, rec(b)?),
        TemporalExpr::Binary(Some(PathQuant::E), BinaryOp::W, a, b) => Ctl::ew(rec(a)?, rec(b)?),
        other => return err("unquantified temporal operator in CTL formula", &other.to_string()),
    })
}

fn atom(name: &str, props: &[Prop]) -> Result<Prop, ResolutionError> {
    match name {
        "s" => Ok(Prop::sys()),
        "e" => Ok(Prop::env()),
        _ => match props.iter().find(|p| p.name == name) {
            Some(p) => Ok(p.clone()),
            None => err("unknown constraint", name),
        },
    }
}

fn check_unique<'a>(kind: &str, names: impl Iterator<Item = &'a String>) -> Result<(), ResolutionError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return err(&format!("duplicate {kind}"), n);
        }
    }
    Ok(())
}

/// Resolves names, builds rules and automata and checks that object labels,
/// automaton states and markings are pairwise disjoint.
pub fn compile(m: &ModelFile) -> Result<Model, ResolutionError> {
    let mut used = BTreeSet::new();
    let mut declared: Option<LabelSet> = None;
    let mut out = Model {
        alphabet: LabelSet::new(),
        graphs: Vec::new(),
        constraints: Vec::new(),
        system: Vec::new(),
        environment: Vec::new(),
        automata: Vec::new(),
        formulas: Vec::new(),
        queries: Vec::new(),
    };
    let mut formula_decls = Vec::new();
    let mut automaton_decls = Vec::new();
    {
        let mut ctx = Ctx { labels: &mut used };
        for item in &m.items {
            match item {
                Item::Alphabet(ls) => {
                    declared
                        .get_or_insert_with(LabelSet::new)
                        .extend(ls.iter().cloned());
                }
                Item::Graph(g) => {
                    let mut named = Named::default();
                    ctx.add_items(&mut named, &g.items, false)?;
                    out.graphs.push((g.name.clone(), named.graph));
                }
                Item::Constraint(c) => {
                    if matches!(c.name.as_str(), "s" | "e" | "true" | "false") {
                        return err("reserved constraint name", &c.name);
                    }
                    let cond = ctx.condition(&c.body, &Named::default())?;
                    out.constraints.push(Prop::new(c.name.clone(), cond));
                }
                Item::Rule(r) => {
                    let rule = ctx.rule(r)?;
                    match rule.role {
                        Role::System => out.system.push(rule),
                        _ => out.environment.push(rule),
                    }
                }
                Item::Automaton(a) => automaton_decls.push(a),
                Item::Formula(f) => formula_decls.push(f),
                Item::Query(q) => out.queries.push(q.clone()),
            }
        }
    }
    check_unique("graph", out.graphs.iter().map(|(n, _)| n))?;
    check_unique("constraint", out.constraints.iter().map(|p| &p.name))?;
    let rule_names: Vec<String> = out
        .system
        .iter()
        .chain(out.environment.iter())
        .map(|r| r.name().to_string())
        .collect();
    check_unique("rule", rule_names.iter())?;
    check_unique("automaton", automaton_decls.iter().map(|a| &a.name))?;
    check_unique("formula", formula_decls.iter().map(|f| &f.name))?;
    check_unique("query", out.queries.iter().map(|q| &q.name))?;

    if let Some(decl) = &declared {
        if let Some(l) = used.iter().find(|l| !decl.contains(*l)) {
            return err("label missing from the alphabet", l);
        }
    }
    out.alphabet = declared.unwrap_or(used);
    let marks = marking_labels();
    if let Some(l) = out.alphabet.iter().find(|l| marks.contains(*l)) {
        return err("object label clashes with a marking", l);
    }

    for a in automaton_decls {
        for q in &a.states {
            if out.alphabet.contains(q) {
                return err("automaton state clashes with an object label", q);
            }
            if marks.contains(q) {
                return err("automaton state clashes with a marking", q);
            }
        }
        check_unique("automaton state", a.states.iter())?;
        let mut transitions = Vec::new();
        for t in &a.transitions {
            for r in &t.select {
                if !rule_names.contains(r) {
                    return err("unknown rule", r);
                }
            }
            transitions.push(Transition {
                from: t.from.clone(),
                to: t.to.clone(),
                select: t.select.iter().cloned().collect(),
            });
        }
        let automaton = RegulationAutomaton::new(a.states.clone(), a.start.clone(), transitions)
            .map_err(|e| ResolutionError {
                name: a.name.clone(),
                message: e.to_string(),
            })?;
        out.automata.push((a.name.clone(), automaton));
    }

    for f in formula_decls {
        let formula = match f.logic {
            Logic::Ltl => Formula::Ltl(temporal_ltl(&f.body, &out.constraints)?),
            Logic::Ctl => Formula::Ctl(temporal_ctl(&f.body, &out.constraints)?),
        };
        out.formulas.push((f.name.clone(), formula));
    }

    for q in &out.queries {
        if let Some(a) = &q.automaton {
            out.automaton(Some(a))?;
        }
        for c in q.pre.iter().chain(q.post.iter()) {
            out.prop(c)?;
        }
        for g in &q.inits {
            out.graph(g)?;
        }
        if let Some(k) = &q.kind {
            k.parse::<Kind>().or_else(|_| err("unknown kind", k))?;
        }
        if let Some(mth) = &q.method {
            mth.parse::<Method>().or_else(|_| err("unknown method", mth))?;
        }
    }
    Ok(out)
}
