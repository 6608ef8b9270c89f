#![allow(dead_code)]

use erratum_core::dom::{parse_html, DomTree, Element, ParseConfig};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIG_OLD: &str = r#"<div class="content-info__item">
    <div class="item__title">...</div>
    <div class="item__subtitle">
        ...
        <a href="/plugins">Plugins</a>
    </div>
</div>"#;

pub const FIG_NEW: &str = r#"<div class="items-wrap">
    <div class="item">
    <div class="item__title">...</div>
        <div class="item__subtitle">
            ...
            <a href="/extensions">Extensions</a>
        </div>
    </div>
    <div>
        ...
        <a href="/newsletter">Newsletter</a>
    </div>
</div>"#;

pub fn fragment(html: &str) -> DomTree {
    parse_html(html.as_bytes(), &ParseConfig::fragment()).unwrap()
}

pub fn document(html: &str) -> DomTree {
    parse_html(html.as_bytes(), &ParseConfig::default()).unwrap()
}

const TAGS: &[&str] = &["div", "span", "a", "p", "li", "ul", "b"];
const CLASSES: &[&str] = &["nav", "item", "card", "title", "btn", "x1", "x2", "x3"];

fn random_element(rng: &mut impl Rng) -> Element {
    let mut e = Element::new(*TAGS.choose(rng).unwrap());
    if rng.gen_bool(0.5) {
        e = e.attr("class", *CLASSES.choose(rng).unwrap());
    }
    if rng.gen_bool(0.2) {
        e = e.attr("href", format!("/p{}", rng.gen_range(0..6)));
    }
    e
}

/// Random tree with exactly `n` nodes.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> Element {
    let mut nodes: Vec<Element> = (0..n).map(|_| random_element(rng)).collect();
    // parent[i] < i; attach children from the back so indices stay valid.
    let parents: Vec<usize> = (1..n).map(|i| rng.gen_range(0..i)).collect();
    for i in (1..n).rev() {
        let child = nodes.pop().unwrap();
        nodes[parents[i - 1]].children.insert(0, child);
    }
    nodes.pop().unwrap()
}

/// Applies a few random edits: relabels, attribute drops, leaf deletions and
/// insertions.
pub fn perturb(rng: &mut impl Rng, root: &Element, edits: usize) -> Element {
    let mut root = root.clone();
    for _ in 0..edits {
        let path = random_path(rng, &root);
        let node = at_path(&mut root, &path);
        match rng.gen_range(0..4) {
            0 => node.tag = TAGS.choose(rng).unwrap().to_string(),
            1 => node.attrs.clear(),
            2 if !node.children.is_empty() => {
                let k = rng.gen_range(0..node.children.len());
                node.children.remove(k);
            }
            _ => {
                let k = rng.gen_range(0..=node.children.len());
                node.children.insert(k, random_element(rng));
            }
        }
    }
    root
}

fn random_path(rng: &mut impl Rng, root: &Element) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = root;
    while !cur.children.is_empty() && rng.gen_bool(0.6) {
        let k = rng.gen_range(0..cur.children.len());
        path.push(k);
        cur = &cur.children[k];
    }
    path
}

fn at_path<'a>(root: &'a mut Element, path: &[usize]) -> &'a mut Element {
    path.iter().fold(root, |e, k| &mut e.children[*k])
}

/// A page-like tree of roughly `n` nodes built from repeated widgets.
pub fn synthetic_page(rng: &mut impl Rng, n: usize) -> Element {
    let mut body = Element::new("body");
    let mut nav = Element::new("ul").attr("class", "nav");
    for i in 0..12 {
        nav = nav.child(
            Element::new("li")
                .attr("class", "nav-item")
                .child(Element::new("a").attr("href", format!("/section/{i}")).text("Section")),
        );
    }
    body = body.child(Element::new("header").attr("id", "top").child(nav));
    let mut main = Element::new("main");
    let mut size = 16;
    let mut k = 0;
    while size < n {
        let mut card = Element::new("div").attr("class", "card");
        card = card.child(Element::new("h2").child(Element::new("a").attr("href", format!("/item/{k}")).text("Title")));
        for _ in 0..rng.gen_range(1..4) {
            card = card.child(Element::new("p").text("lorem ipsum"));
        }
        card = card.child(
            Element::new("div")
                .child(Element::new("span").attr("class", "price"))
                .child(Element::new("button").attr("class", "btn buy").text("Buy")),
        );
        size += card.size();
        main = main.child(card);
        k += 1;
    }
    body = body.child(main);
    Element::new("html")
        .child(Element::new("head").child(Element::new("title").text("page")))
        .child(body)
}
