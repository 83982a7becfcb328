//! Propositional epistemic logic over finite Kripke models.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! formula := or ( "->" formula )?          right-associative
//! or      := and ( "|" and )*              left-associative
//! and     := unary ( "&" unary )*          left-associative
//! unary   := "!" unary | "K{" agent "}" unary | atom | "(" formula ")"
//! atom    := [A-Za-z_][A-Za-z0-9_]*
//! agent   := [A-Za-z0-9_]+
//! ```
//!
//! `K{i} φ` holds at a point when `φ` holds at every point agent `i` considers
//! possible from there. This module evaluates formulas; it does not attempt
//! to derive anything about what an agent could come to know.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::RngState;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpistemicError {
    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(String),
    #[error("relation of agent {agent:?} is not an equivalence: {reason}")]
    NotEquivalence { agent: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Knows(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Self {
        Formula::Atom(name.to_owned())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn knows(agent: &str, f: Formula) -> Self {
        Formula::Knows(agent.to_owned(), Box::new(f))
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Knows(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn agents(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_agents(out),
            Formula::Knows(a, f) => {
                out.insert(a);
                f.collect_agents(out);
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_agents(out);
                b.collect_agents(out);
            }
        }
    }
}

/// Binary connectives are always parenthesized, so printing then parsing
/// gives back the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::Knows(a, x) => write!(f, "K{{{a}}} {x}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, EpistemicError> {
        Err(EpistemicError::SyntaxError {
            position: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        let len = self.rest().find(|c| !pred(c)).unwrap_or(self.rest().len());
        self.pos += len;
        &self.src[start..start + len]
    }

    fn formula(&mut self) -> Result<Formula, EpistemicError> {
        let lhs = self.or()?;
        if self.eat("->") {
            Ok(Formula::implies(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, EpistemicError> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, EpistemicError> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, EpistemicError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("K{") {
            self.skip_ws();
            let agent = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
            if agent.is_empty() {
                return self.error("expected agent name");
            }
            if !self.eat("}") {
                return self.error("expected '}'");
            }
            return Ok(Formula::knows(agent, self.unary()?));
        }
        if self.eat("(") {
            let inner = self.formula()?;
            if !self.eat(")") {
                return self.error("expected ')'");
            }
            return Ok(inner);
        }
        self.skip_ws();
        match self.rest().chars().next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                Ok(Formula::atom(name))
            }
            Some(c) => self.error(format!("unexpected {c:?}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses a formula; positions in errors are byte offsets.
pub fn parse(text: &str) -> Result<Formula, EpistemicError> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// Every relation must be an equivalence.
    #[default]
    S5,
    Arbitrary,
}

/// The JSON shape of a model: `{points, atoms, relations, relation_kind}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub points: Vec<String>,
    #[serde(default)]
    pub atoms: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    pub relation_kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    points: Vec<String>,
    index: HashMap<String, usize>,
    valuation: Vec<BTreeSet<String>>,
    /// Per agent, the sorted successors of each point.
    access: BTreeMap<String, Vec<Vec<usize>>>,
    kind: RelationKind,
}

impl KripkeModel {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, EpistemicError> {
        let mut index = HashMap::new();
        for (i, p) in spec.points.iter().enumerate() {
            if index.insert(p.clone(), i).is_some() {
                return Err(EpistemicError::DuplicatePoint(p.clone()));
            }
        }
        let lookup = |p: &String| {
            index
                .get(p)
                .copied()
                .ok_or_else(|| EpistemicError::UnknownPoint(p.clone()))
        };
        let mut valuation = vec![BTreeSet::new(); spec.points.len()];
        for (p, atoms) in &spec.atoms {
            valuation[lookup(p)?].extend(atoms.iter().cloned());
        }
        let mut access = BTreeMap::new();
        for (agent, pairs) in &spec.relations {
            let mut succ = vec![BTreeSet::new(); spec.points.len()];
            for (a, b) in pairs {
                succ[lookup(a)?].insert(lookup(b)?);
            }
            access.insert(
                agent.clone(),
                succ.into_iter().map(|s| s.into_iter().collect()).collect(),
            );
        }
        let model = Self {
            points: spec.points.clone(),
            index,
            valuation,
            access,
            kind: spec.relation_kind,
        };
        if model.kind == RelationKind::S5 {
            model.check_equivalence()?;
        }
        Ok(model)
    }

    /// An S5 model in which agent `i` cannot tell apart points sharing a
    /// block of `partitions[i]`. `blocks[p]` is the block id of point `p`.
    pub fn from_partitions(
        points: Vec<String>,
        valuation: Vec<BTreeSet<String>>,
        partitions: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self, EpistemicError> {
        let mut spec = ModelSpec {
            relation_kind: RelationKind::S5,
            ..ModelSpec::default()
        };
        for (p, v) in points.iter().zip(&valuation) {
            spec.atoms.insert(p.clone(), v.iter().cloned().collect());
        }
        for (agent, blocks) in partitions {
            let mut pairs = Vec::new();
            for (i, bi) in blocks.iter().enumerate() {
                for (j, bj) in blocks.iter().enumerate() {
                    if bi == bj {
                        pairs.push((points[i].clone(), points[j].clone()));
                    }
                }
            }
            spec.relations.insert(agent, pairs);
        }
        spec.points = points;
        Self::from_spec(&spec)
    }

    fn check_equivalence(&self) -> Result<(), EpistemicError> {
        for (agent, succ) in &self.access {
            let fail = |reason: String| {
                Err(EpistemicError::NotEquivalence {
                    agent: agent.clone(),
                    reason,
                })
            };
            let has = |a: usize, b: usize| succ[a].binary_search(&b).is_ok();
            for a in 0..succ.len() {
                if !has(a, a) {
                    return fail(format!("{} is not related to itself", self.points[a]));
                }
                for &b in &succ[a] {
                    if !has(b, a) {
                        return fail(format!(
                            "{} -> {} has no reverse",
                            self.points[a], self.points[b]
                        ));
                    }
                    for &c in &succ[b] {
                        if !has(a, c) {
                            return fail(format!(
                                "{} -> {} -> {} is not closed",
                                self.points[a], self.points[b], self.points[c]
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn agents(&self) -> impl Iterator<Item = &str> {
        self.access.keys().map(String::as_str)
    }

    pub fn relation_kind(&self) -> RelationKind {
        self.kind
    }

    fn point_index(&self, point: &str) -> Result<usize, EpistemicError> {
        self.index
            .get(point)
            .copied()
            .ok_or_else(|| EpistemicError::UnknownPoint(point.to_owned()))
    }

    fn successors(&self, agent: &str, point: usize) -> Result<&[usize], EpistemicError> {
        self.access
            .get(agent)
            .map(|s| s[point].as_slice())
            .ok_or_else(|| EpistemicError::UnknownAgent(agent.to_owned()))
    }

    /// Labels of the points agent `agent` considers possible at `point`.
    pub fn accessible(&self, agent: &str, point: &str) -> Result<Vec<&str>, EpistemicError> {
        let i = self.point_index(point)?;
        Ok(self
            .successors(agent, i)?
            .iter()
            .map(|&j| self.points[j].as_str())
            .collect())
    }

    fn eval_at(&self, point: usize, f: &Formula) -> Result<bool, EpistemicError> {
        Ok(match f {
            Formula::Atom(a) => self.valuation[point].contains(a),
            Formula::Not(x) => !self.eval_at(point, x)?,
            Formula::And(a, b) => self.eval_at(point, a)? & self.eval_at(point, b)?,
            Formula::Or(a, b) => self.eval_at(point, a)? | self.eval_at(point, b)?,
            Formula::Implies(a, b) => !self.eval_at(point, a)? | self.eval_at(point, b)?,
            Formula::Knows(agent, x) => {
                let succ = self.successors(agent, point)?;
                let mut all = true;
                for &s in succ {
                    all &= self.eval_at(s, x)?;
                }
                all
            }
        })
    }
}

/// Truth of `f` at `point`. Every agent named in `f` must exist in the model,
/// even where the quantifier would be vacuous.
pub fn evaluate(model: &KripkeModel, point: &str, f: &Formula) -> Result<bool, EpistemicError> {
    let i = model.point_index(point)?;
    for agent in f.agents() {
        model.successors(agent, i)?;
    }
    model.eval_at(i, f)
}

/// Whether `!K{agent} !f` agrees with "some accessible point satisfies `f`".
pub fn duality_check(
    model: &KripkeModel,
    point: &str,
    agent: &str,
    f: &Formula,
) -> Result<bool, EpistemicError> {
    let i = model.point_index(point)?;
    let possible = evaluate(
        model,
        point,
        &Formula::not(Formula::knows(agent, Formula::not(f.clone()))),
    )?;
    let mut witness = false;
    for &s in model.successors(agent, i)? {
        witness |= model.eval_at(s, f)?;
    }
    Ok(possible == witness)
}

/// A random S5 model with `1..=max_points` points labelled `w0, w1, ...`.
pub fn random_s5_model(
    rng: &mut RngState,
    max_points: usize,
    agents: &[&str],
    atoms: &[&str],
) -> KripkeModel {
    let n = 1 + rng.below(max_points.max(1) as u64) as usize;
    let points: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let valuation = (0..n)
        .map(|_| {
            atoms
                .iter()
                .filter(|_| rng.below(2) == 1)
                .map(|a| a.to_string())
                .collect()
        })
        .collect();
    let partitions = agents
        .iter()
        .map(|a| {
            (
                a.to_string(),
                (0..n).map(|_| rng.below(n as u64) as usize).collect(),
            )
        })
        .collect();
    KripkeModel::from_partitions(points, valuation, partitions)
        .expect("partitions give equivalences")
}

/// A random formula of depth at most `max_depth`.
pub fn random_formula(
    rng: &mut RngState,
    max_depth: usize,
    agents: &[&str],
    atoms: &[&str],
) -> Formula {
    let pick =
        |rng: &mut RngState, xs: &[&str]| xs[rng.below(xs.len() as u64) as usize].to_string();
    if max_depth == 0 || rng.below(4) == 0 {
        return Formula::Atom(pick(rng, atoms));
    }
    let d = max_depth - 1;
    match rng.below(5) {
        0 => Formula::not(random_formula(rng, d, agents, atoms)),
        1 => Formula::Knows(
            pick(rng, agents),
            Box::new(random_formula(rng, d, agents, atoms)),
        ),
        2 => Formula::and(
            random_formula(rng, d, agents, atoms),
            random_formula(rng, d, agents, atoms),
        ),
        3 => Formula::or(
            random_formula(rng, d, agents, atoms),
            random_formula(rng, d, agents, atoms),
        ),
        _ => Formula::implies(
            random_formula(rng, d, agents, atoms),
            random_formula(rng, d, agents, atoms),
        ),
    }
}
