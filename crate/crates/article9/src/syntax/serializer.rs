//! Canonical serializer: 2-space indent per block depth, one field per
//! line, lists inline. `parse(serialize(t))` is structurally equal to `t`.

use std::fmt::Write;

use crate::syntax::ast::{Block, Item, SyntaxTree, Value};

pub fn serialize(tree: &SyntaxTree) -> String {
    let mut out = String::new();
    for block in &tree.blocks {
        write_block(&mut out, block, 0);
    }
    out
}

fn write_block(out: &mut String, block: &Block, depth: usize) {
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    out.push_str(&block.keyword);
    if let Some(label) = &block.label {
        out.push(' ');
        write_string(out, label);
    }
    out.push_str(" {\n");
    for item in &block.items {
        match item {
            Item::Field(f) => {
                let _ = write!(out, "{indent}  {}: ", f.key);
                write_value(out, &f.value);
                out.push('\n');
            }
            Item::Block(b) => write_block(out, b, depth + 1),
        }
    }
    out.push_str(&indent);
    out.push_str("}\n");
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Str(s) => write_string(out, s),
        Value::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Date(d) => {
            let _ = write!(out, "{}", d.format("%Y-%m-%d"));
        }
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Ident(id) => out.push_str(id),
        Value::List(elems) => {
            out.push('[');
            for (i, v) in elems.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, v);
            }
            out.push(']');
        }
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out.push('"');
}
