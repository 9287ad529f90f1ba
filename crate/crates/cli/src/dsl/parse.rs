//! Lexer and recursive-descent parser for model files.

use std::fmt;

use thiserror::Error;

use super::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Define,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Bang => "`!`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Arrow => "`->`",
            Tok::Define => "`:=`",
            Tok::Minus => "`-`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ';' => (Tok::Semi, 1),
            ',' => (Tok::Comma, 1),
            '!' => (Tok::Bang, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Pipe, 1),
            ':' if next == Some('=') => (Tok::Define, 2),
            ':' => (Tok::Colon, 1),
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '-' => (Tok::Minus, 1),
            c if is_ident_char(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => {
                return Err(ParseError {
                    line,
                    column,
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        advance(len, &mut i);
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

const TEMPORAL_KEYWORDS: &[&str] = &[
    "X", "G", "U", "W", "A", "E", "AX", "EX", "AG", "EG", "true", "false",
];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError {
            line: t.line,
            column: t.column,
            expected: expected.to_string(),
            found: t.tok.to_string(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(&t.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    /// Identifier possibly joined by hyphens, as in `k-step`.
    fn dashed(&mut self, what: &str) -> PResult<String> {
        let mut s = self.ident(what)?;
        while self.peek() == &Tok::Minus && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            s.push('-');
            s.push_str(&self.ident(what)?);
        }
        Ok(s)
    }

    fn number(&mut self) -> PResult<usize> {
        if let Tok::Ident(s) = self.peek() {
            if let Ok(n) = s.parse::<usize>() {
                self.bump();
                return Ok(n);
            }
        }
        self.error("a number")
    }

    fn ident_list(&mut self, what: &str, end: &Tok) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        while self.peek() != end {
            out.push(self.ident(what)?);
            self.eat(&Tok::Comma);
        }
        Ok(out)
    }

    fn model(&mut self) -> PResult<ModelFile> {
        let mut items = Vec::new();
        while self.peek() != &Tok::Eof {
            items.push(self.item()?);
        }
        if items.is_empty() {
            return self.error("a declaration");
        }
        Ok(ModelFile { items })
    }

    fn item(&mut self) -> PResult<Item> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error("a declaration"),
        };
        match kw.as_str() {
            "alphabet" => {
                self.bump();
                let labels = self.ident_list("a label", &Tok::Semi)?;
                self.expect(Tok::Semi)?;
                Ok(Item::Alphabet(labels))
            }
            "graph" => {
                self.bump();
                let name = self.ident("a graph name")?;
                let items = self.graph_items()?;
                Ok(Item::Graph(GraphDecl { name, items }))
            }
            "constraint" => {
                self.bump();
                let name = self.ident("a constraint name")?;
                self.expect(Tok::Define)?;
                let body = self.cond()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Constraint(ConstraintDecl { name, body }))
            }
            "rule" => self.rule().map(Item::Rule),
            "automaton" => self.automaton().map(Item::Automaton),
            "ltl" | "ctl" => {
                self.bump();
                let logic = if kw == "ltl" { Logic::Ltl } else { Logic::Ctl };
                let name = self.ident("a formula name")?;
                self.expect(Tok::Define)?;
                let body = self.temporal()?;
                self.expect(Tok::Semi)?;
                Ok(Item::Formula(FormulaDecl { name, logic, body }))
            }
            "query" => self.query().map(Item::Query),
            _ => self.error("a declaration"),
        }
    }

    fn graph_items(&mut self) -> PResult<Vec<GraphItem>> {
        self.expect(Tok::LBrace)?;
        let mut items = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let first = self.ident("a node or edge")?;
            let item = if self.eat(&Tok::Colon) {
                let second = self.ident("a label or source node")?;
                if self.peek() == &Tok::Minus {
                    self.edge_tail(Some(first), second)?
                } else {
                    GraphItem::Node {
                        name: first,
                        label: second,
                    }
                }
            } else if self.peek() == &Tok::Minus {
                self.edge_tail(None, first)?
            } else {
                return self.error("`:` or `-`");
            };
            self.expect(Tok::Semi)?;
            items.push(item);
        }
        Ok(items)
    }

    fn edge_tail(&mut self, name: Option<String>, src: String) -> PResult<GraphItem> {
        self.expect(Tok::Minus)?;
        let label = self.ident("an edge label")?;
        self.expect(Tok::Arrow)?;
        let tgt = self.ident("a target node")?;
        Ok(GraphItem::Edge {
            name,
            src,
            label,
            tgt,
        })
    }

    fn cond(&mut self) -> PResult<CondExpr> {
        let lhs = self.cond_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.cond()?;
            return Ok(CondExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn cond_or(&mut self) -> PResult<CondExpr> {
        let mut parts = vec![self.cond_and()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.cond_and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            CondExpr::Or(parts)
        })
    }

    fn cond_and(&mut self) -> PResult<CondExpr> {
        let mut parts = vec![self.cond_unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.cond_unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            CondExpr::And(parts)
        })
    }

    fn cond_unary(&mut self) -> PResult<CondExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(CondExpr::Not(Box::new(self.cond_unary()?)));
        }
        if self.eat(&Tok::LParen) {
            let c = self.cond()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        match self.peek() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(CondExpr::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(CondExpr::False)
            }
            Tok::Ident(s) if s == "exists" => {
                self.bump();
                let items = self.graph_items()?;
                let nested = if self.eat(&Tok::Colon) {
                    Some(Box::new(self.cond_unary()?))
                } else {
                    None
                };
                Ok(CondExpr::Exists(items, nested))
            }
            Tok::Ident(s) if s == "forall" => {
                self.bump();
                let items = self.graph_items()?;
                self.expect(Tok::Colon)?;
                let nested = self.cond_unary()?;
                Ok(CondExpr::Forall(items, Box::new(nested)))
            }
            _ => self.error("a condition"),
        }
    }

    fn rule(&mut self) -> PResult<RuleDecl> {
        self.expect_kw("rule")?;
        let name = self.ident("a rule name")?;
        let role = match self.ident("`system` or `environment`")?.as_str() {
            "system" => RoleDecl::System,
            "environment" => RoleDecl::Environment,
            _ => {
                self.pos -= 1;
                return self.error("`system` or `environment`");
            }
        };
        self.expect(Tok::LBrace)?;
        self.expect_kw("left")?;
        let left = self.graph_items()?;
        self.expect_kw("right")?;
        let right = self.graph_items()?;
        let when = if self.is_kw("when") {
            self.bump();
            let c = self.cond()?;
            self.expect(Tok::Semi)?;
            Some(c)
        } else {
            None
        };
        self.expect(Tok::RBrace)?;
        Ok(RuleDecl {
            name,
            role,
            left,
            right,
            when,
        })
    }

    fn automaton(&mut self) -> PResult<AutomatonDecl> {
        self.expect_kw("automaton")?;
        let name = self.ident("an automaton name")?;
        self.expect(Tok::LBrace)?;
        self.expect_kw("states")?;
        let states = self.ident_list("a state", &Tok::Semi)?;
        self.expect(Tok::Semi)?;
        self.expect_kw("start")?;
        let start = self.ident("a start state")?;
        self.expect(Tok::Semi)?;
        let mut transitions = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let from = self.ident("a transition or `}`")?;
            self.expect(Tok::Arrow)?;
            let to = self.ident("a target state")?;
            self.expect(Tok::LBracket)?;
            let select = self.ident_list("a rule name", &Tok::RBracket)?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Semi)?;
            transitions.push(TransitionDecl { from, to, select });
        }
        Ok(AutomatonDecl {
            name,
            states,
            start,
            transitions,
        })
    }

    fn query(&mut self) -> PResult<QueryDecl> {
        self.expect_kw("query")?;
        let mut q = QueryDecl {
            name: self.ident("a query name")?,
            ..Default::default()
        };
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let key = self.dashed("a query field")?;
            match key.as_str() {
                "automaton" => q.automaton = Some(self.ident("an automaton name")?),
                "kind" => q.kind = Some(self.dashed("a kind")?),
                "k" => q.k = Some(self.number()?),
                "pre" => q.pre = Some(self.ident("a constraint name")?),
                "post" => q.post = Some(self.ident("a constraint name")?),
                "init" => q.inits = self.ident_list("a graph name", &Tok::Semi)?,
                "method" => q.method = Some(self.ident("a method")?),
                "max-states" => q.max_states = Some(self.number()?),
                "max-depth" => q.max_depth = Some(self.number()?),
                "max-graph-size" => q.max_graph_size = Some(self.number()?),
                _ => {
                    self.pos -= 1;
                    return self.error("a query field");
                }
            }
            self.expect(Tok::Semi)?;
        }
        Ok(q)
    }

    fn temporal(&mut self) -> PResult<TemporalExpr> {
        let lhs = self.t_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.temporal()?;
            return Ok(TemporalExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn t_or(&mut self) -> PResult<TemporalExpr> {
        let mut lhs = self.t_and()?;
        while self.eat(&Tok::Pipe) {
            lhs = TemporalExpr::Or(Box::new(lhs), Box::new(self.t_and()?));
        }
        Ok(lhs)
    }

    fn t_and(&mut self) -> PResult<TemporalExpr> {
        let mut lhs = self.t_until()?;
        while self.eat(&Tok::Amp) {
            lhs = TemporalExpr::And(Box::new(lhs), Box::new(self.t_until()?));
        }
        Ok(lhs)
    }

    fn t_until(&mut self) -> PResult<TemporalExpr> {
        let lhs = self.t_unary()?;
        let op = if self.is_kw("U") {
            BinaryOp::U
        } else if self.is_kw("W") {
            BinaryOp::W
        } else {
            return Ok(lhs);
        };
        self.bump();
        let rhs = self.t_until()?;
        Ok(TemporalExpr::Binary(None, op, Box::new(lhs), Box::new(rhs)))
    }

    fn t_unary(&mut self) -> PResult<TemporalExpr> {
        if self.eat(&Tok::Bang) {
            return Ok(TemporalExpr::Not(Box::new(self.t_unary()?)));
        }
        if self.eat(&Tok::LParen) {
            let e = self.temporal()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let name = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error("a formula"),
        };
        let unary = match name.as_str() {
            "X" => Some(UnaryOp::X),
            "G" => Some(UnaryOp::G),
            "AX" => Some(UnaryOp::AX),
            "EX" => Some(UnaryOp::EX),
            "AG" => Some(UnaryOp::AG),
            "EG" => Some(UnaryOp::EG),
            _ => None,
        };
        if let Some(op) = unary {
            self.bump();
            return Ok(TemporalExpr::Unary(op, Box::new(self.t_unary()?)));
        }
        if (name == "A" || name == "E") && self.peek_at(1) == &Tok::LParen {
            self.bump();
            self.bump();
            let quant = if name == "A" { PathQuant::A } else { PathQuant::E };
            let inner = self.temporal()?;
            self.expect(Tok::RParen)?;
            return match inner {
                TemporalExpr::Binary(None, op, a, b) => Ok(TemporalExpr::Binary(Some(quant), op, a, b)),
                _ => {
                    self.pos -= 1;
                    self.error("`U` or `W` under a path quantifier")
                }
            };
        }
        if TEMPORAL_KEYWORDS.contains(&name.as_str()) && name != "true" && name != "false" {
            return self.error("a formula");
        }
        self.bump();
        Ok(match name.as_str() {
            "true" => TemporalExpr::True,
            "false" => TemporalExpr::False,
            _ => TemporalExpr::Atom(name),
        })
    }
}

pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.model()
}
