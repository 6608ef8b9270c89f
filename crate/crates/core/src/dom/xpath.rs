//! The XPath subset used for locators.
//!
//! Supported: absolute (`/a/b`) and descendant (`//a`) location paths, name
//! tests and `*`, positional predicates (`[2]`, `[last()]`), attribute
//! predicates (`[@id]`, `[@type="submit"]`). A relative path such as
//! `input[@type="submit"]` is evaluated against the whole document, like
//! `//input[@type="submit"]`. Anything else is reported as unsupported.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DomTree, NodeId};
use crate::error::DomError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct XPathLocator {
    pub descriptor: String,
}

impl XPathLocator {
    pub fn new(descriptor: impl Into<String>) -> XPathLocator {
        XPathLocator {
            descriptor: descriptor.into(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.descriptor
    }
}

impl fmt::Display for XPathLocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

/// Positional absolute path from the root, e.g. `/html[1]/body[1]/div[2]`.
pub fn absolute_xpath(tree: &DomTree, node: NodeId) -> Result<XPathLocator, DomError> {
    tree.checked(node)?;
    let mut steps = Vec::new();
    let mut cur = Some(node);
    while let Some(id) = cur {
        let n = tree.node(id);
        steps.push((n.tag(), n.sibling_index()));
        cur = n.parent();
    }
    let mut out = String::with_capacity(steps.len() * 8);
    for (tag, k) in steps.iter().rev() {
        out.push('/');
        out.push_str(tag);
        out.push('[');
        out.push_str(&k.to_string());
        out.push(']');
    }
    Ok(XPathLocator::new(out))
}

#[derive(Debug, Clone, PartialEq)]
enum Axis {
    Child,
    DescendantChild,
}

#[derive(Debug, Clone, PartialEq)]
enum Predicate {
    Position(usize),
    Last,
    HasAttr(String),
    AttrEq(String, String),
}

#[derive(Debug, Clone, PartialEq)]
struct Step {
    axis: Axis,
    name: Option<String>,
    predicates: Vec<Predicate>,
}

struct Parser<'a> {
    expr: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax(&self, reason: impl Into<String>) -> DomError {
        DomError::XPathSyntax {
            expr: self.expr.to_owned(),
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> DomError {
        DomError::XPathUnsupported {
            expr: self.expr.to_owned(),
            construct: construct.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            let ok = c.is_ascii_alphanumeric()
                || matches!(c, b'-' | b'_' | b'.')
                || (c == b':' && self.bytes.get(self.pos + 1) != Some(&b':'))
                || c >= 0x80;
            if !ok {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.expr[start..self.pos])
    }

    fn parse(mut self) -> Result<Vec<Step>, DomError> {
        let mut steps = Vec::new();
        self.skip_ws();
        if self.bytes.is_empty() || self.pos == self.bytes.len() {
            return Err(self.syntax("empty expression"));
        }
        let mut axis = if self.bytes[self.pos..].starts_with(b"//") {
            self.pos += 2;
            Axis::DescendantChild
        } else if self.eat(b'/') {
            Axis::Child
        } else {
            Axis::DescendantChild
        };
        loop {
            steps.push(self.step(axis)?);
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'/') => {
                    if self.bytes[self.pos..].starts_with(b"//") {
                        self.pos += 2;
                        axis = Axis::DescendantChild;
                    } else {
                        self.pos += 1;
                        axis = Axis::Child;
                    }
                }
                Some(b'|') => return Err(self.unsupported("union")),
                Some(_) => return Err(self.syntax("expected '/' or end of expression")),
            }
        }
        Ok(steps)
    }

    fn step(&mut self, axis: Axis) -> Result<Step, DomError> {
        self.skip_ws();
        let name = match self.peek() {
            Some(b'*') => {
                self.pos += 1;
                None
            }
            Some(b'.') => return Err(self.unsupported("self or parent step")),
            Some(b'@') => return Err(self.unsupported("attribute axis step")),
            _ => {
                let n = self.name().ok_or_else(|| self.syntax("expected a name test"))?;
                self.skip_ws();
                if self.bytes[self.pos..].starts_with(b"::") {
                    return Err(self.unsupported(format!("axis {n}::")));
                }
                if self.peek() == Some(b'(') {
                    return Err(self.unsupported(format!("function {n}()")));
                }
                Some(n.to_ascii_lowercase())
            }
        };
        let mut predicates = Vec::new();
        while self.eat(b'[') {
            predicates.push(self.predicate()?);
            if !self.eat(b']') {
                return Err(self.syntax("expected ']'"));
            }
        }
        Ok(Step { axis, name, predicates })
    }

    fn predicate(&mut self) -> Result<Predicate, DomError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let k: usize = self.expr[start..self.pos]
                    .parse()
                    .map_err(|_| self.syntax("position out of range"))?;
                if k == 0 {
                    return Err(self.syntax("positions start at 1"));
                }
                self.skip_ws();
                match self.peek() {
                    Some(b']') => Ok(Predicate::Position(k)),
                    None => Err(self.syntax("expected ']'")),
                    Some(_) => Err(self.unsupported("arithmetic in predicate")),
                }
            }
            Some(b'@') => {
                self.pos += 1;
                let name = self
                    .name()
                    .ok_or_else(|| self.syntax("expected attribute name"))?
                    .to_owned();
                if self.eat(b'=') {
                    let value = self.literal()?;
                    Ok(Predicate::AttrEq(name, value))
                } else {
                    self.skip_ws();
                    match self.peek() {
                        Some(b']') => Ok(Predicate::HasAttr(name)),
                        None => Err(self.syntax("expected ']'")),
                        Some(_) => Err(self.unsupported("attribute comparison other than '='")),
                    }
                }
            }
            _ => {
                let save = self.pos;
                if let Some(n) = self.name() {
                    if n == "last" && self.eat(b'(') && self.eat(b')') {
                        return Ok(Predicate::Last);
                    }
                    self.pos = save;
                    return Err(self.unsupported(format!("predicate starting with {n:?}")));
                }
                Err(self.syntax("empty predicate"))
            }
        }
    }

    fn literal(&mut self) -> Result<String, DomError> {
        self.skip_ws();
        let quote = match self.peek() {
            Some(q @ (b'"' | b'\'')) => q,
            _ => return Err(self.unsupported("non-literal comparison operand")),
        };
        self.pos += 1;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == quote {
                let s = self.expr[start..self.pos].to_owned();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += 1;
        }
        Err(self.syntax("unterminated string literal"))
    }
}

/// Evaluates `locator` on `tree`, returning matching nodes in document order.
pub fn eval_xpath(tree: &DomTree, locator: &XPathLocator) -> Result<Vec<NodeId>, DomError> {
    let expr = locator.as_str();
    let steps = Parser {
        expr,
        bytes: expr.as_bytes(),
        pos: 0,
    }
    .parse()?;

    // `None` stands for the document node above the root element.
    let mut context: Vec<Option<NodeId>> = vec![None];
    for step in &steps {
        if step.axis == Axis::DescendantChild {
            let mut expanded = Vec::new();
            for c in &context {
                expanded.push(*c);
                let range = match c {
                    None => 0..tree.size(),
                    Some(id) => id.0 + 1..tree.node(*id).subtree_end(),
                };
                expanded.extend(range.map(|i| Some(NodeId(i))));
            }
            expanded.sort();
            expanded.dedup();
            context = expanded;
        }
        let mut next: Vec<NodeId> = Vec::new();
        for c in &context {
            let children: &[NodeId] = match c {
                None => std::slice::from_ref(&NodeId(0)),
                Some(id) => tree.node(*id).children(),
            };
            let mut selected: Vec<NodeId> = children
                .iter()
                .copied()
                .filter(|ch| step.name.as_deref().is_none_or(|n| tree.node(*ch).tag() == n))
                .collect();
            for p in &step.predicates {
                selected = match p {
                    Predicate::Position(k) => selected.get(k - 1).copied().into_iter().collect(),
                    Predicate::Last => selected.last().copied().into_iter().collect(),
                    Predicate::HasAttr(a) => selected
                        .into_iter()
                        .filter(|n| tree.node(*n).attr(a).is_some())
                        .collect(),
                    Predicate::AttrEq(a, v) => selected
                        .into_iter()
                        .filter(|n| tree.node(*n).attr(a) == Some(v.as_str()))
                        .collect(),
                };
            }
            next.extend(selected);
        }
        next.sort();
        next.dedup();
        context = next.into_iter().map(Some).collect();
    }
    Ok(context.into_iter().flatten().collect())
}
