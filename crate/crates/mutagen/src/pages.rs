//! Source pages: a few bundled documents and seeded synthetic pages built
//! from common site layouts (shared chrome plus repeated content widgets).

use std::fmt;
use std::str::FromStr;

use erratum_core::dom::{parse_html, DomTree, Element, ParseConfig, DEFAULT_SIGNATURE_ATTR};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::MutagenError;

const BUNDLED: &[(&str, &str)] = &[
    ("bundled-store", include_str!("../pages/store.html")),
    ("bundled-newsroom", include_str!("../pages/newsroom.html")),
    ("bundled-handbook", include_str!("../pages/handbook.html")),
];

/// Bundled pages as `(name, tree)`, in a fixed order.
pub fn bundled_pages() -> Result<Vec<(String, DomTree)>, MutagenError> {
    BUNDLED
        .iter()
        .map(|(name, html)| Ok((name.to_string(), parse_html(html.as_bytes(), &ParseConfig::default())?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    News,
    Shop,
    Blog,
    Docs,
    Forum,
    Landing,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::News,
        Template::Shop,
        Template::Blog,
        Template::Docs,
        Template::Forum,
        Template::Landing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::News => "news",
            Template::Shop => "shop",
            Template::Blog => "blog",
            Template::Docs => "docs",
            Template::Forum => "forum",
            Template::Landing => "landing",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown template {s:?}"))
    }
}

const WORDS: &[&str] = &[
    "market", "update", "city", "council", "report", "season", "energy", "travel", "garden", "review", "launch",
    "design", "health", "coffee", "winter", "summer", "museum", "river", "project", "budget", "science", "school",
    "music", "festival", "policy", "weather", "team", "record", "studio", "kitchen", "history", "network", "open",
    "local", "global", "quiet", "bright", "simple", "new", "final", "early", "late", "fresh", "classic", "modern",
    "small",
];

const SECTIONS: &[&str] = &[
    "world", "business", "tech", "culture", "sport", "travel", "science", "opinion", "food", "style", "health", "video",
];

struct Gen {
    rng: ChaCha8Rng,
    serial: usize,
}

impl Gen {
    fn word(&mut self) -> &'static str {
        WORDS.choose(&mut self.rng).unwrap()
    }

    fn words(&mut self, lo: usize, hi: usize) -> String {
        let n = self.rng.gen_range(lo..=hi);
        (0..n).map(|_| self.word()).collect::<Vec<_>>().join(" ")
    }

    fn title(&mut self) -> String {
        let mut t = self.words(3, 7);
        if let Some(first) = t.get_mut(..1) {
            first.make_ascii_uppercase();
        }
        t
    }

    fn slug(&mut self) -> String {
        self.serial += 1;
        format!("{}-{}-{}", self.word(), self.word(), self.serial)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Icon-only button, as found in toolbars and card actions.
    fn icon_button(&mut self, class: &str, label: &str, icon: &str) -> Element {
        Element::new("button")
            .attr("type", "button")
            .attr("class", format!("btn-icon {class}"))
            .attr("aria-label", label)
            .child(Element::new("i").attr("class", format!("icon icon-{icon}")))
    }

    /// Grid wrappers of a typical CSS framework layout.
    fn column(&mut self, inner: Element) -> Element {
        let width = [3, 4, 6].choose(&mut self.rng).unwrap();
        Element::new("div")
            .attr("class", format!("col col-md-{width}"))
            .child(inner)
    }

    fn head(&mut self, title: &str) -> Element {
        Element::new("head")
            .child(Element::new("meta").attr("charset", "utf-8"))
            .child(
                Element::new("meta")
                    .attr("name", "viewport")
                    .attr("content", "width=device-width, initial-scale=1"),
            )
            .child(Element::new("title").text(title))
            .child(
                Element::new("link")
                    .attr("rel", "stylesheet")
                    .attr("href", "/static/css/site.css"),
            )
    }

    fn header(&mut self) -> Element {
        let n = self.rng.gen_range(5..=9);
        let mut ul = Element::new("ul").attr("class", "nav-list");
        for s in SECTIONS.choose_multiple(&mut self.rng, n) {
            ul = ul.child(
                Element::new("li").attr("class", "nav-item").child(
                    Element::new("a")
                        .attr("class", "nav-link")
                        .attr("href", format!("/{s}"))
                        .text(s.to_string()),
                ),
            );
        }
        let search = Element::new("form")
            .attr("class", "search-form")
            .attr("action", "/search")
            .attr("method", "get")
            .child(
                Element::new("input")
                    .attr("type", "search")
                    .attr("name", "q")
                    .attr("placeholder", "Search"),
            )
            .child(
                Element::new("button")
                    .attr("type", "submit")
                    .attr("class", "btn btn-search")
                    .text("Search"),
            );
        let mut header = Element::new("header")
            .attr("class", "site-header")
            .attr("id", "top")
            .child(
                Element::new("a").attr("class", "logo").attr("href", "/").child(
                    Element::new("img")
                        .attr("src", "/static/img/logo.svg")
                        .attr("alt", "Home"),
                ),
            )
            .child(
                Element::new("nav")
                    .attr("class", "main-nav")
                    .attr("aria-label", "Main")
                    .child(ul),
            )
            .child(search);
        let account = Element::new("div").attr("class", "account").child(
            Element::new("a")
                .attr("class", "signin")
                .attr("href", "/login")
                .text("Sign in"),
        );
        header = header.child(if self.chance(0.5) {
            account.child(
                Element::new("a")
                    .attr("class", "btn btn-primary")
                    .attr("href", "/subscribe")
                    .text("Subscribe"),
            )
        } else {
            account
        });
        header
    }

    fn cookie_banner(&mut self) -> Element {
        Element::new("div")
            .attr("class", "cookie-banner")
            .attr("id", "cookie-consent")
            .attr("role", "dialog")
            .child(
                Element::new("p")
                    .text("We use cookies to improve your experience.")
                    .child(Element::new("a").attr("href", "/privacy").text("Learn more")),
            )
            .child(
                Element::new("button")
                    .attr("type", "button")
                    .attr("class", "btn btn-accept")
                    .text("Accept"),
            )
            .child(
                Element::new("button")
                    .attr("type", "button")
                    .attr("class", "btn btn-reject")
                    .text("Reject"),
            )
    }

    fn footer(&mut self) -> Element {
        let mut footer = Element::new("footer").attr("class", "site-footer");
        for heading in ["Company", "Help", "Legal"] {
            let mut ul = Element::new("ul");
            for _ in 0..self.rng.gen_range(3..=5) {
                let w = self.word();
                ul = ul.child(
                    Element::new("li").child(
                        Element::new("a")
                            .attr("href", format!("/{}/{w}", heading.to_lowercase()))
                            .text(w),
                    ),
                );
            }
            footer = footer.child(
                Element::new("div")
                    .attr("class", "footer-col")
                    .child(Element::new("h4").text(heading))
                    .child(ul),
            );
        }
        footer.child(
            Element::new("p")
                .attr("class", "copyright")
                .text("© 2024 Example Media"),
        )
    }

    fn story(&mut self, section: &str) -> Element {
        let slug = self.slug();
        let mut article = Element::new("article").attr("class", "story");
        if self.chance(0.6) {
            article = article.child(
                Element::new("a")
                    .attr("class", "story-image")
                    .attr("href", format!("/{section}/{slug}"))
                    .child(
                        Element::new("img")
                            .attr("src", format!("/media/{slug}.jpg"))
                            .attr("alt", ""),
                    ),
            );
        }
        let title = self.title();
        let summary = self.words(8, 20);
        let author = self.title();
        article
            .child(
                Element::new("h2")
                    .attr("class", "story-title")
                    .child(Element::new("a").attr("href", format!("/{section}/{slug}")).text(title)),
            )
            .child(Element::new("p").attr("class", "summary").text(summary))
            .child(
                Element::new("div")
                    .attr("class", "meta")
                    .child(Element::new("span").attr("class", "author").text(author))
                    .child(
                        Element::new("time")
                            .attr(
                                "datetime",
                                format!("2024-0{}-1{}", self.rng.gen_range(1..10), self.rng.gen_range(0..10)),
                            )
                            .text("2 hours ago"),
                    )
                    .child(
                        Element::new("a")
                            .attr("class", "comments")
                            .attr("href", format!("/{section}/{slug}#comments"))
                            .text(format!("{} comments", self.rng.gen_range(0..300))),
                    ),
            )
            .child(
                Element::new("div")
                    .attr("class", "story-actions")
                    .child(self.icon_button("save", "Save", "bookmark"))
                    .child(self.icon_button("share", "Share", "share")),
            )
    }

    fn news(&mut self, main: &mut Element, budget: usize) {
        let mut section_no = 0;
        while main.size() < budget {
            let section = SECTIONS[section_no % SECTIONS.len()];
            section_no += 1;
            let mut s = Element::new("section").attr("class", "headlines").child(
                Element::new("h2")
                    .attr("class", "section-title")
                    .child(Element::new("a").attr("href", format!("/{section}")).text(section)),
            );
            let mut row = Element::new("div").attr("class", "row");
            for _ in 0..self.rng.gen_range(3..=6) {
                let story = self.story(section);
                row = row.child(self.column(story));
            }
            s = s.child(row);
            if self.chance(0.3) {
                s = s.child(
                    Element::new("a")
                        .attr("class", "more")
                        .attr("href", format!("/{section}"))
                        .text("More stories"),
                );
            }
            main.children.push(s);
        }
    }

    fn product(&mut self) -> Element {
        let slug = self.slug();
        let mut card = Element::new("div").attr("class", "product-card");
        if self.chance(0.4) {
            card = card.attr("data-sku", format!("SKU{}", self.rng.gen_range(10000..99999)));
        }
        let name = self.title();
        let mut card = card
            .child(
                Element::new("a")
                    .attr("class", "thumb")
                    .attr("href", format!("/p/{slug}"))
                    .child(
                        Element::new("img")
                            .attr("src", format!("/img/{slug}.webp"))
                            .attr("alt", name.clone()),
                    ),
            )
            .child(
                Element::new("h3")
                    .attr("class", "product-title")
                    .child(Element::new("a").attr("href", format!("/p/{slug}")).text(name)),
            )
            .child(Element::new("div").attr("class", "price-box").child(
                Element::new("span").attr("class", "price").text(format!(
                    "${}.{:02}",
                    self.rng.gen_range(3..400),
                    self.rng.gen_range(0..100)
                )),
            ));
        if self.chance(0.5) {
            card = card.child(
                Element::new("div")
                    .attr("class", "rating")
                    .attr("title", "Rated by customers")
                    .child(Element::new("span").attr("class", "stars"))
                    .child(
                        Element::new("span")
                            .attr("class", "count")
                            .text(format!("({})", self.rng.gen_range(1..900))),
                    ),
            );
        }
        if self.chance(0.2) {
            card = card.child(Element::new("span").attr("class", "badge sale").text("Sale"));
        }
        let mut actions = Element::new("div")
            .attr("class", "card-actions")
            .child(
                Element::new("button")
                    .attr("type", "button")
                    .attr("class", "btn add-to-cart")
                    .text("Add to cart"),
            )
            .child(self.icon_button("wishlist", "Add to wishlist", "heart"));
        if self.chance(0.5) {
            actions = actions.child(
                Element::new("a")
                    .attr("class", "quick-view")
                    .attr("href", "#")
                    .text("Quick view"),
            );
        }
        card.child(actions)
    }

    fn shop(&mut self, main: &mut Element, budget: usize) {
        let mut filters = Element::new("aside").attr("class", "filters");
        for facet in ["Brand", "Price", "Color"] {
            let mut ul = Element::new("ul").attr("class", "facet");
            for _ in 0..self.rng.gen_range(3..=6) {
                let w = self.word();
                ul = ul.child(
                    Element::new("li").child(
                        Element::new("label")
                            .child(
                                Element::new("input")
                                    .attr("type", "checkbox")
                                    .attr("name", facet.to_lowercase())
                                    .attr("value", w),
                            )
                            .child(Element::new("span").text(w)),
                    ),
                );
            }
            filters = filters.child(Element::new("h4").text(facet)).child(ul);
        }
        main.children.push(filters);
        let mut sort = Element::new("select").attr("name", "sort").attr("class", "sort");
        for (i, t) in ["Featured", "Price: low to high", "Price: high to low", "Newest"]
            .iter()
            .enumerate()
        {
            sort = sort.child(Element::new("option").attr("value", i.to_string()).text(*t));
        }
        main.children
            .push(Element::new("div").attr("class", "toolbar").child(sort));
        let mut grid = Element::new("div").attr("class", "product-grid row");
        while main.size() + grid.size() < budget.saturating_sub(14) {
            let product = self.product();
            grid = grid.child(self.column(product));
        }
        main.children.push(grid);
        let mut pages = Element::new("ul").attr("class", "pagination");
        for k in 1..=5 {
            pages = pages.child(
                Element::new("li").child(Element::new("a").attr("href", format!("?page={k}")).text(k.to_string())),
            );
        }
        main.children
            .push(Element::new("nav").attr("class", "pager").child(pages));
    }

    fn comment(&mut self) -> Element {
        self.serial += 1;
        let author = self.title();
        let body = self.words(6, 25);
        Element::new("div")
            .attr("class", "comment")
            .attr("id", format!("c{}", self.serial))
            .child(Element::new("div").attr("class", "comment-author").text(author))
            .child(Element::new("p").text(body))
            .child(
                Element::new("div")
                    .attr("class", "comment-actions")
                    .child(
                        Element::new("button")
                            .attr("type", "button")
                            .attr("class", "reply")
                            .text("Reply"),
                    )
                    .child(
                        Element::new("button")
                            .attr("type", "button")
                            .attr("class", "like")
                            .text("Like"),
                    ),
            )
    }

    fn blog(&mut self, main: &mut Element, budget: usize) {
        let title = self.title();
        let byline = self.title();
        let mut body = Element::new("div").attr("class", "post-body");
        for _ in 0..self.rng.gen_range(4..=10) {
            let mut p = Element::new("p").text(self.words(15, 40));
            if self.chance(0.3) {
                let w = self.word();
                p = p.child(Element::new("a").attr("href", format!("/tag/{w}")).text(w));
            }
            body = body.child(p);
            if self.chance(0.2) {
                body = body.child(Element::new("blockquote").child(Element::new("p").text(self.words(8, 16))));
            }
            if self.chance(0.2) {
                let mut ul = Element::new("ul");
                for _ in 0..self.rng.gen_range(2..=5) {
                    ul = ul.child(Element::new("li").text(self.words(3, 8)));
                }
                body = body.child(ul);
            }
        }
        main.children.push(
            Element::new("article")
                .attr("class", "post")
                .child(
                    Element::new("header")
                        .attr("class", "post-header")
                        .child(Element::new("h1").attr("class", "post-title").text(title))
                        .child(Element::new("div").attr("class", "byline").text(byline)),
                )
                .child(body)
                .child(
                    Element::new("div")
                        .attr("class", "share")
                        .child(
                            Element::new("a")
                                .attr("class", "share-link twitter")
                                .attr("href", "https://twitter.com/share")
                                .text("Share"),
                        )
                        .child(
                            Element::new("a")
                                .attr("class", "share-link mail")
                                .attr("href", "mailto:?subject=post")
                                .text("Email"),
                        ),
                ),
        );
        let mut comments = Element::new("section")
            .attr("class", "comments")
            .attr("id", "comments")
            .child(Element::new("h3").text("Comments"));
        while main.size() + comments.size() < budget.saturating_sub(8) {
            comments = comments.child(self.comment());
        }
        comments = comments.child(
            Element::new("form")
                .attr("class", "comment-form")
                .attr("action", "/comments")
                .attr("method", "post")
                .child(Element::new("textarea").attr("name", "body"))
                .child(
                    Element::new("button")
                        .attr("type", "submit")
                        .attr("class", "btn btn-primary")
                        .text("Post comment"),
                ),
        );
        main.children.push(comments);
    }

    fn docs(&mut self, main: &mut Element, budget: usize) {
        let mut toc = Element::new("ul").attr("class", "toc-list");
        let mut content = Element::new("div").attr("class", "doc-content");
        let mut k = 0;
        while main.size() + toc.size() + content.size() < budget {
            k += 1;
            let heading = self.title();
            toc = toc.child(
                Element::new("li").child(
                    Element::new("a")
                        .attr("href", format!("#sec-{k}"))
                        .text(heading.clone()),
                ),
            );
            let mut sec = Element::new("section")
                .attr("class", "doc-section")
                .child(Element::new("h2").attr("id", format!("sec-{k}")).text(heading))
                .child(Element::new("p").text(self.words(12, 30)));
            if self.chance(0.6) {
                let w = self.word();
                let copy = self.icon_button("copy", "Copy to clipboard", "clipboard");
                sec = sec.child(
                    Element::new("div").attr("class", "code-block").child(copy).child(
                        Element::new("pre").child(
                            Element::new("code")
                                .attr("class", "language-rust")
                                .text(format!("let {w} = client.{w}()?;")),
                        ),
                    ),
                );
            }
            if self.chance(0.5) {
                let mut tbody = Element::new("tbody");
                for _ in 0..self.rng.gen_range(2..=5) {
                    let w = self.word();
                    tbody = tbody.child(
                        Element::new("tr")
                            .child(Element::new("td").child(Element::new("code").text(w)))
                            .child(Element::new("td").text("string"))
                            .child(Element::new("td").text(self.words(4, 10))),
                    );
                }
                sec = sec.child(
                    Element::new("table")
                        .attr("class", "params")
                        .child(
                            Element::new("thead").child(
                                Element::new("tr")
                                    .child(Element::new("th").text("Name"))
                                    .child(Element::new("th").text("Type"))
                                    .child(Element::new("th").text("Description")),
                            ),
                        )
                        .child(tbody),
                );
            }
            if self.chance(0.3) {
                sec = sec.child(
                    Element::new("div")
                        .attr("class", "note")
                        .child(Element::new("strong").text("Note"))
                        .child(Element::new("p").text(self.words(6, 14))),
                );
            }
            content = content.child(sec);
        }
        main.children.push(
            Element::new("nav")
                .attr("class", "toc")
                .attr("aria-label", "Contents")
                .child(toc),
        );
        main.children.push(content);
        main.children.push(
            Element::new("div")
                .attr("class", "page-nav")
                .child(
                    Element::new("a")
                        .attr("class", "prev")
                        .attr("href", "/docs/intro")
                        .text("Previous"),
                )
                .child(
                    Element::new("a")
                        .attr("class", "next")
                        .attr("href", "/docs/advanced")
                        .text("Next"),
                ),
        );
    }

    fn forum(&mut self, main: &mut Element, budget: usize) {
        main.children.push(
            Element::new("div").attr("class", "forum-actions").child(
                Element::new("a")
                    .attr("class", "btn btn-primary")
                    .attr("href", "/t/new")
                    .text("New topic"),
            ),
        );
        let mut tbody = Element::new("tbody");
        while main.size() + tbody.size() < budget.saturating_sub(12) {
            let slug = self.slug();
            let user = self.word();
            let mut topic = Element::new("td").attr("class", "topic").child(
                Element::new("a")
                    .attr("class", "title")
                    .attr("href", format!("/t/{slug}"))
                    .text(self.title()),
            );
            if self.chance(0.3) {
                topic = topic.child(Element::new("span").attr("class", "tag").text(self.word()));
            }
            let class = if self.chance(0.1) { "thread pinned" } else { "thread" };
            let row = Element::new("tr").attr("class", class);
            tbody = tbody.child(
                row.child(topic)
                    .child(
                        Element::new("td")
                            .attr("class", "replies")
                            .text(self.rng.gen_range(0..500).to_string()),
                    )
                    .child(
                        Element::new("td")
                            .attr("class", "views")
                            .text(self.rng.gen_range(10..9000).to_string()),
                    )
                    .child(
                        Element::new("td").attr("class", "last").child(
                            Element::new("a")
                                .attr("class", "user")
                                .attr("href", format!("/u/{user}"))
                                .text(user),
                        ),
                    )
                    .child(
                        Element::new("td")
                            .attr("class", "actions")
                            .child(self.icon_button("follow", "Follow", "bell")),
                    ),
            );
        }
        main.children.push(
            Element::new("table")
                .attr("class", "threads")
                .child(
                    Element::new("thead").child(
                        Element::new("tr")
                            .child(Element::new("th").text("Topic"))
                            .child(Element::new("th").text("Replies"))
                            .child(Element::new("th").text("Views"))
                            .child(Element::new("th").text("Activity")),
                    ),
                )
                .child(tbody),
        );
    }

    fn landing(&mut self, main: &mut Element, budget: usize) {
        main.children.push(
            Element::new("section")
                .attr("class", "hero")
                .child(Element::new("h1").text(self.title()))
                .child(Element::new("p").attr("class", "lead").text(self.words(10, 20)))
                .child(
                    Element::new("a")
                        .attr("class", "btn btn-primary btn-lg")
                        .attr("href", "/signup")
                        .text("Get started"),
                )
                .child(
                    Element::new("a")
                        .attr("class", "btn btn-link")
                        .attr("href", "/tour")
                        .text("Take the tour"),
                ),
        );
        let mut features = Element::new("div").attr("class", "features");
        for _ in 0..self.rng.gen_range(3..=6) {
            let w = self.word();
            features = features.child(
                Element::new("div")
                    .attr("class", "feature")
                    .child(Element::new("i").attr("class", format!("icon icon-{w}")))
                    .child(Element::new("h3").text(self.title()))
                    .child(Element::new("p").text(self.words(8, 18)))
                    .child(
                        Element::new("a")
                            .attr("class", "learn-more")
                            .attr("href", format!("/features/{w}"))
                            .text("Learn more"),
                    ),
            );
        }
        main.children.push(features);
        let mut pricing = Element::new("section").attr("class", "pricing");
        for (plan, price) in [("Starter", "$0"), ("Team", "$12"), ("Business", "$40")] {
            let mut ul = Element::new("ul").attr("class", "plan-features");
            for _ in 0..self.rng.gen_range(3..=6) {
                ul = ul.child(Element::new("li").text(self.words(2, 5)));
            }
            pricing = pricing.child(
                Element::new("div")
                    .attr("class", "plan")
                    .child(Element::new("h3").text(plan))
                    .child(Element::new("span").attr("class", "price").text(price))
                    .child(ul)
                    .child(
                        Element::new("a")
                            .attr("class", "btn btn-outline")
                            .attr("href", format!("/signup?plan={}", plan.to_lowercase()))
                            .text("Choose"),
                    ),
            );
        }
        main.children.push(pricing);
        let prev = self.icon_button("carousel-prev", "Previous", "chevron-left");
        let next = self.icon_button("carousel-next", "Next", "chevron-right");
        let mut testimonials = Element::new("section")
            .attr("class", "testimonials carousel")
            .child(prev)
            .child(next);
        while main.size() + testimonials.size() < budget.saturating_sub(6) {
            testimonials = testimonials.child(
                Element::new("blockquote")
                    .attr("class", "testimonial")
                    .child(Element::new("p").text(self.words(10, 25)))
                    .child(Element::new("cite").text(self.title())),
            );
        }
        main.children.push(testimonials);
        main.children.push(
            Element::new("form")
                .attr("class", "newsletter")
                .attr("action", "/newsletter")
                .attr("method", "post")
                .child(
                    Element::new("input")
                        .attr("type", "email")
                        .attr("name", "email")
                        .attr("placeholder", "you@example.com"),
                )
                .child(
                    Element::new("button")
                        .attr("type", "submit")
                        .attr("class", "btn btn-primary")
                        .text("Subscribe"),
                ),
        );
    }
}

/// A seeded page of roughly `target` nodes (never fewer than the shared
/// chrome needs).
pub fn synthetic_page(template: Template, target: usize, seed: u64) -> DomTree {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        serial: 0,
    };
    let title = g.title();
    let header = g.header();
    let cookie = g.chance(0.5).then(|| g.cookie_banner());
    let footer = g.footer();
    let chrome = 3 + header.size() + cookie.as_ref().map_or(0, Element::size) + footer.size() + 6;
    let budget = target.saturating_sub(chrome).max(10);
    let mut main = Element::new("main")
        .attr("id", "content")
        .attr("class", format!("page-{template}"));
    match template {
        Template::News => g.news(&mut main, budget),
        Template::Shop => g.shop(&mut main, budget),
        Template::Blog => g.blog(&mut main, budget),
        Template::Docs => g.docs(&mut main, budget),
        Template::Forum => g.forum(&mut main, budget),
        Template::Landing => g.landing(&mut main, budget),
    }
    let mut body = Element::new("body").attr("class", format!("{template} layout-default"));
    if let Some(c) = cookie {
        body = body.child(c);
    }
    body = body.child(header).child(main).child(footer);
    let root = Element::new("html")
        .attr("lang", "en")
        .child(g.head(&title))
        .child(body);
    DomTree::from_element(&root, Some(DEFAULT_SIGNATURE_ATTR))
}

/// `count` synthetic pages with templates in rotation and sizes drawn
/// log-uniformly from `[min_nodes, max_nodes]`, named `<template>-<i>`.
pub fn synthetic_corpus(count: usize, min_nodes: usize, max_nodes: usize, seed: u64) -> Vec<(String, DomTree)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (
        (min_nodes.max(1) as f64).ln(),
        (max_nodes.max(min_nodes).max(1) as f64).ln(),
    );
    (0..count)
        .map(|i| {
            let template = Template::ALL[i % Template::ALL.len()];
            let target = if hi > lo {
                rng.gen_range(lo..=hi).exp()
            } else {
                lo.exp()
            }
            .round() as usize;
            let page_seed = rng.gen();
            (
                format!("{template}-{i:03}"),
                synthetic_page(template, target, page_seed),
            )
        })
        .collect()
}
