//! Generic block/field syntax tree for `.a9r` register documents.
//!
//! The tree carries no schema knowledge; every node keeps the span it was
//! parsed from so later stages can point diagnostics at exact source
//! locations.

use chrono::NaiveDate;

use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntaxTree {
    pub blocks: Vec<Block>,
}

/// `keyword [ "label" ] { items }`
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub keyword: String,
    pub label: Option<String>,
    pub items: Vec<Item>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Field(Field),
    Block(Block),
}

/// `key: value`
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub key: String,
    pub value: Value,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Number(f64),
    Date(NaiveDate),
    Bool(bool),
    Ident(String),
    List(Vec<Value>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Number(_) => "number",
            Value::Date(_) => "date",
            Value::Bool(_) => "bool",
            Value::Ident(_) => "identifier",
            Value::List(_) => "list",
        }
    }
}

impl SyntaxTree {
    /// Structural equality ignoring spans: same blocks, labels, fields, and
    /// values in the same order. This is the notion of equality under which
    /// `parse(serialize(t))` reproduces `t`.
    pub fn structurally_eq(&self, other: &SyntaxTree) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| blocks_eq(a, b))
    }
}

fn blocks_eq(a: &Block, b: &Block) -> bool {
    a.keyword == b.keyword
        && a.label == b.label
        && a.items.len() == b.items.len()
        && a.items.iter().zip(&b.items).all(|(x, y)| items_eq(x, y))
}

fn items_eq(a: &Item, b: &Item) -> bool {
    match (a, b) {
        (Item::Field(f), Item::Field(g)) => f.key == g.key && f.value == g.value,
        (Item::Block(x), Item::Block(y)) => blocks_eq(x, y),
        _ => false,
    }
}
