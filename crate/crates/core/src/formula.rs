//! First-order formulas over a single binary relation symbol: surface syntax,
//! Tarski evaluation over finite structures, and the expansion that turns a
//! formula list into new relation symbols.
//!
//! Surface grammar (precedence low to high, `->` right-associative):
//!
//! ```text
//! formula    := 'forall' VAR '.' formula | 'exists' VAR '.' formula | implies
//! implies    := or ('->' implies)?
//! or         := and ('|' and)*
//! and        := not ('&' not)*
//! not        := '!' not | atom
//! atom       := NAME '(' VAR ',' VAR ')' | VAR '=' VAR | '(' formula ')'
//! ```

use crate::error::{Error, Result};
use crate::presheaf::tuples;
use crate::rel::{RelLanguage, RelStructure, RelSymbol};
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Rel(String, String, String),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Rel(r, x, y) => write!(f, "{r}({x},{y})"),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Not(p) => write!(f, "!{p}"),
            Formula::And(p, q) => write!(f, "({p} & {q})"),
            Formula::Or(p, q) => write!(f, "({p} | {q})"),
            Formula::Implies(p, q) => write!(f, "({p} -> {q})"),
            Formula::ForAll(x, p) => write!(f, "forall {x}. {p}"),
            Formula::Exists(x, p) => write!(f, "exists {x}. {p}"),
        }
    }
}

impl Formula {
    pub fn not(p: Formula) -> Formula {
        Formula::Not(Box::new(p))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let mut push = |name: &String, bound: &[String], out: &mut Vec<String>| {
            if !bound.contains(name) && !out.contains(name) {
                out.push(name.clone());
            }
        };
        match self {
            Formula::Rel(_, x, y) => {
                push(x, bound, out);
                push(y, bound, out);
            }
            Formula::Eq(x, y) => {
                push(x, bound, out);
                push(y, bound, out);
            }
            Formula::Not(p) => p.collect_free(bound, out),
            Formula::And(p, q) | Formula::Or(p, q) | Formula::Implies(p, q) => {
                p.collect_free(bound, out);
                q.collect_free(bound, out);
            }
            Formula::ForAll(x, p) | Formula::Exists(x, p) => {
                bound.push(x.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn parse(input: &str) -> Result<Formula> {
        let mut p = Parser {
            input: input.as_bytes(),
            pos: 0,
        };
        let f = p.formula()?;
        p.skip_ws();
        if p.pos != p.input.len() {
            return Err(Error::Parse {
                offset: p.pos,
                message: "trailing input".into(),
            });
        }
        Ok(f)
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.pos,
                message: format!("expected {:?}", b as char),
            })
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len()
            && (self.input[self.pos].is_ascii_alphanumeric() || self.input[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Parse {
                offset: start,
                message: "expected an identifier".into(),
            });
        }
        Ok(std::str::from_utf8(&self.input[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn formula(&mut self) -> Result<Formula> {
        self.skip_ws();
        if self.try_keyword("forall") {
            let var = self.ident()?;
            self.eat(b'.')?;
            return Ok(Formula::ForAll(var, Box::new(self.formula()?)));
        }
        if self.try_keyword("exists") {
            let var = self.ident()?;
            self.eat(b'.')?;
            return Ok(Formula::Exists(var, Box::new(self.formula()?)));
        }
        self.implies()
    }

    fn try_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let end = self.pos + kw.len();
        if self.input.len() >= end && &self.input[self.pos..end] == kw.as_bytes() {
            // must not continue as an identifier
            let next = self.input.get(end);
            if next.is_none_or(|b| !b.is_ascii_alphanumeric() && *b != b'_') {
                self.pos = end;
                return true;
            }
        }
        false
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        self.skip_ws();
        if self.input[self.pos..].starts_with(b"->") {
            self.pos += 2;
            let rhs = self.implies()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.not()?;
        while self.peek() == Some(b'&') {
            self.pos += 1;
            let rhs = self.not()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Formula> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Formula::not(self.not()?));
        }
        // a quantifier may start here too; its body extends as far right as
        // possible
        if self.try_keyword("forall") {
            let var = self.ident()?;
            self.eat(b'.')?;
            return Ok(Formula::ForAll(var, Box::new(self.formula()?)));
        }
        if self.try_keyword("exists") {
            let var = self.ident()?;
            self.eat(b'.')?;
            return Ok(Formula::Exists(var, Box::new(self.formula()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let f = self.formula()?;
            self.eat(b')')?;
            return Ok(f);
        }
        let name = self.ident()?;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let x = self.ident()?;
                self.eat(b',')?;
                let y = self.ident()?;
                self.eat(b')')?;
                Ok(Formula::Rel(name, x, y))
            }
            Some(b'=') => {
                self.pos += 1;
                let y = self.ident()?;
                Ok(Formula::Eq(name, y))
            }
            _ => Err(Error::Parse {
                offset: self.pos,
                message: "expected '(' or '=' after identifier".into(),
            }),
        }
    }
}

/// Tarski evaluation over a finite structure. Atoms resolve their relation
/// symbol by name; the symbol must be binary.
pub fn eval_formula(
    a: &RelStructure,
    phi: &Formula,
    assignment: &BTreeMap<String, usize>,
) -> Result<bool> {
    match phi {
        Formula::Rel(r, x, y) => {
            let idx = a
                .language
                .symbol_index(r)
                .ok_or_else(|| Error::UnknownSymbol { name: r.clone() })?;
            if a.language.symbols[idx].arity != 2 {
                return Err(Error::UnknownSymbol {
                    name: format!("{r} (not binary)"),
                });
            }
            let vx = lookup(assignment, x)?;
            let vy = lookup(assignment, y)?;
            Ok(a.relations[idx].contains(&vec![vx, vy]))
        }
        Formula::Eq(x, y) => Ok(lookup(assignment, x)? == lookup(assignment, y)?),
        Formula::Not(p) => Ok(!eval_formula(a, p, assignment)?),
        Formula::And(p, q) => Ok(eval_formula(a, p, assignment)? && eval_formula(a, q, assignment)?),
        Formula::Or(p, q) => Ok(eval_formula(a, p, assignment)? || eval_formula(a, q, assignment)?),
        Formula::Implies(p, q) => {
            Ok(!eval_formula(a, p, assignment)? || eval_formula(a, q, assignment)?)
        }
        Formula::ForAll(x, p) => {
            let mut inner = assignment.clone();
            for v in 0..a.size() {
                inner.insert(x.clone(), v);
                if !eval_formula(a, p, &inner)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Exists(x, p) => {
            let mut inner = assignment.clone();
            for v in 0..a.size() {
                inner.insert(x.clone(), v);
                if eval_formula(a, p, &inner)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

fn lookup(assignment: &BTreeMap<String, usize>, name: &str) -> Result<usize> {
    assignment
        .get(name)
        .copied()
        .ok_or_else(|| Error::UnboundVariable { name: name.into() })
}

/// Expand a structure by one new relation symbol per formula: the symbol `q{i}`
/// has arity equal to the number of free variables of the `i`-th formula and
/// holds of exactly the satisfying tuples (in free-variable order).
pub fn hat_expand(
    a: &RelStructure,
    formulas: &[Formula],
    nullary_free: bool,
) -> Result<RelStructure> {
    let mut symbols = Vec::new();
    let mut relations = Vec::new();
    for (i, phi) in formulas.iter().enumerate() {
        let vars = phi.free_vars();
        if vars.is_empty() && nullary_free {
            return Err(Error::NullaryFormula);
        }
        symbols.push(RelSymbol {
            name: format!("q{i}"),
            arity: vars.len(),
        });
        let mut set = BTreeSet::new();
        for tuple in tuples(a.size(), vars.len()) {
            let assignment: BTreeMap<String, usize> = vars
                .iter()
                .cloned()
                .zip(tuple.iter().copied())
                .collect();
            if eval_formula(a, phi, &assignment)? {
                set.insert(tuple);
            }
        }
        relations.push(set);
    }
    RelStructure::new(
        RelLanguage { symbols },
        a.carrier.clone(),
        relations,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rel::hom_enum;

    fn edge_structure() -> RelStructure {
        RelStructure::new(
            RelLanguage::new(vec![("r", 2)]).unwrap(),
            vec!["0".into(), "1".into()],
            vec![[vec![0, 1]].into_iter().collect()],
        )
        .unwrap()
    }

    #[test]
    fn parse_and_display() {
        let f = Formula::parse("forall x. exists y. (r(x,y) & !r(y,x))").unwrap();
        assert_eq!(f.to_string(), "forall x. exists y. (r(x,y) & !r(y,x))");
        let g = Formula::parse("x = y -> r(x,y) | r(y,x)").unwrap();
        assert!(matches!(g, Formula::Implies(_, _)));
        assert!(Formula::parse("r(x,").is_err());
        assert!(Formula::parse("forall . r(x,y)").is_err());
        assert!(Formula::parse("r(x,y) extra").is_err());
    }

    #[test]
    fn free_vars_in_first_occurrence_order() {
        let f = Formula::parse("r(y,x) & exists z. r(z,x)").unwrap();
        assert_eq!(f.free_vars(), vec!["y".to_string(), "x".to_string()]);
    }

    #[test]
    fn eval_reflexivity_tautology() {
        let a = edge_structure();
        let f = Formula::parse("x = x").unwrap();
        for v in 0..2 {
            let assignment = [("x".to_string(), v)].into_iter().collect();
            assert!(eval_formula(&a, &f, &assignment).unwrap());
        }
    }

    #[test]
    fn eval_exists_edge() {
        let a = edge_structure();
        let f = Formula::parse("exists y. r(x,y)").unwrap();
        let at = |v: usize| -> bool {
            let assignment = [("x".to_string(), v)].into_iter().collect();
            eval_formula(&a, &f, &assignment).unwrap()
        };
        assert!(at(0));
        assert!(!at(1));
    }

    #[test]
    fn eval_symmetry_fails_on_directed_edge() {
        let a = edge_structure();
        let f = Formula::parse("forall x. forall y. (r(x,y) -> r(y,x))").unwrap();
        assert!(!eval_formula(&a, &f, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn eval_unbound_variable() {
        let a = edge_structure();
        let f = Formula::parse("r(x,y)").unwrap();
        assert!(matches!(
            eval_formula(&a, &f, &BTreeMap::new()),
            Err(Error::UnboundVariable { .. })
        ));
    }

    #[test]
    fn hat_expand_identity_formula() {
        let a = edge_structure();
        let hat = hat_expand(&a, &[Formula::parse("r(x,y)").unwrap()], true).unwrap();
        assert_eq!(hat.relations[0], a.relations[0]);
    }

    #[test]
    fn hat_expand_empty_list() {
        let a = edge_structure();
        let hat = hat_expand(&a, &[], true).unwrap();
        assert!(hat.language.symbols.is_empty());
        // every function is a morphism of the empty expansion
        assert_eq!(hom_enum(&hat, &hat, 100).unwrap().len(), 4);
    }

    #[test]
    fn hat_expand_rejects_sentences_in_nullary_free_mode() {
        let a = edge_structure();
        let sentence = Formula::parse("exists x. r(x,x)").unwrap();
        assert!(matches!(
            hat_expand(&a, &[sentence.clone()], true),
            Err(Error::NullaryFormula)
        ));
        let hat = hat_expand(&a, &[sentence], false).unwrap();
        assert_eq!(hat.language.symbols[0].arity, 0);
        // no loop in the edge structure, so the sentence is false
        assert!(hat.relations[0].is_empty());
    }

    #[test]
    fn hat_expand_with_negations_forces_biconditional_preservation() {
        let a = edge_structure();
        let phi = Formula::parse("r(x,y)").unwrap();
        let hat = hat_expand(&a, &[phi.clone(), Formula::not(phi.clone())], true).unwrap();
        let vars = phi.free_vars();
        for f in hom_enum(&hat, &hat, 1000).unwrap() {
            for tuple in tuples(a.size(), vars.len()) {
                let assignment: BTreeMap<String, usize> = vars
                    .iter()
                    .cloned()
                    .zip(tuple.iter().copied())
                    .collect();
                let mapped: BTreeMap<String, usize> = vars
                    .iter()
                    .cloned()
                    .zip(tuple.iter().map(|&v| f[v]))
                    .collect();
                let before = eval_formula(&a, &phi, &assignment).unwrap();
                let after = eval_formula(&a, &phi, &mapped).unwrap();
                assert_eq!(before, after, "morphism {f:?} breaks the biconditional");
            }
        }
    }
}
