use super::{DomTree, NodeId, DEFAULT_SIGNATURE_ATTR};

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source", "track", "wbr",
];

/// Serializes a tree back to HTML. Own text is written before the children;
/// signatures are written as an attribute so that re-parsing restores them.
pub fn to_html(tree: &DomTree) -> String {
    let sig_attr = tree.signature_attr().unwrap_or(DEFAULT_SIGNATURE_ATTR);
    let mut out = String::new();
    if tree.node(tree.root()).tag() == "html" {
        out.push_str("<!DOCTYPE html>\n");
    }
    write_node(tree, tree.root(), sig_attr, &mut out);
    out.push('\n');
    out
}

fn write_node(tree: &DomTree, id: NodeId, sig_attr: &str, out: &mut String) {
    let n = tree.node(id);
    out.push('<');
    out.push_str(n.tag());
    for (k, v) in n.attrs() {
        write_attr(out, k, v);
    }
    if let Some(sig) = &n.signature {
        write_attr(out, sig_attr, sig);
    }
    out.push('>');
    if VOID.contains(&n.tag()) {
        return;
    }
    escape_into(out, n.own_text(), false);
    for c in n.children() {
        write_node(tree, *c, sig_attr, out);
    }
    out.push_str("</");
    out.push_str(n.tag());
    out.push('>');
}

fn write_attr(out: &mut String, name: &str, value: &str) {
    out.push(' ');
    out.push_str(name);
    out.push_str("=\"");
    escape_into(out, value, true);
    out.push('"');
}

fn escape_into(out: &mut String, s: &str, attr: bool) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            c => out.push(c),
        }
    }
}
