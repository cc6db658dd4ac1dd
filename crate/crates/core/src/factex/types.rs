use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::text::normalize_token;
use crate::corpus::vocab::SEP_TOKEN;
use crate::error::{Error, Result};

/// A surface token, optionally carrying its 1-based position in the source
/// sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub form: String,
    pub index: Option<usize>,
}

impl Token {
    pub fn new(form: impl Into<String>) -> Self {
        Token {
            form: form.into(),
            index: None,
        }
    }

    pub fn at(form: impl Into<String>, index: usize) -> Self {
        Token {
            form: form.into(),
            index: Some(index),
        }
    }
}

/// An open-IE relation `(subject; predicate; object)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Vec<Token>,
    pub predicate: Vec<Token>,
    #[serde(default)]
    pub object: Vec<Token>,
}

impl Triple {
    pub fn new(subject: Vec<Token>, predicate: Vec<Token>, object: Vec<Token>) -> Result<Self> {
        let t = Triple {
            subject,
            predicate,
            object,
        };
        t.validate()?;
        Ok(t)
    }

    /// Builds a triple from whitespace-separated strings without indices.
    pub fn from_strs(subject: &str, predicate: &str, object: &str) -> Result<Self> {
        let toks = |s: &str| s.split_whitespace().map(Token::new).collect();
        Self::new(toks(subject), toks(predicate), toks(object))
    }

    pub fn validate(&self) -> Result<()> {
        if self.subject.is_empty() || self.predicate.is_empty() {
            return Err(Error::Invalid("triple needs a non-empty subject and predicate".into()));
        }
        Ok(())
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.subject.iter().chain(&self.predicate).chain(&self.object)
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let part = |toks: &[Token]| toks.iter().map(|t| t.form.as_str()).collect::<Vec<_>>().join(" ");
        write!(f, "({}; {}; {})", part(&self.subject), part(&self.predicate), part(&self.object))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepNode {
    pub index: usize,
    pub form: String,
    /// 0 for the root.
    pub head: usize,
    pub label: String,
}

/// A dependency tree over tokens `1..=n` with a single root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    nodes: Vec<DepNode>,
}

impl DepTree {
    pub fn new(nodes: Vec<DepNode>) -> Result<Self> {
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.index != i + 1 {
                return Err(Error::Invalid(format!(
                    "token {} has index {}, expected consecutive indices from 1",
                    i + 1,
                    node.index
                )));
            }
            if node.head > n || node.head == node.index {
                return Err(Error::Invalid(format!(
                    "token {} has invalid head {}",
                    node.index, node.head
                )));
            }
        }
        let roots = nodes.iter().filter(|n| n.head == 0).count();
        if n > 0 && roots != 1 {
            return Err(Error::Invalid(format!("expected a single root, found {roots}")));
        }
        for start in &nodes {
            let mut cur = start.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(Error::Invalid(format!("cycle through token {}", start.index)));
                }
                cur = nodes[cur - 1].head;
            }
        }
        Ok(DepTree { nodes })
    }

    pub fn nodes(&self) -> &[DepNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> Option<&DepNode> {
        index.checked_sub(1).and_then(|i| self.nodes.get(i))
    }
}

/// A labeled `(governor; dependent)` arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTuple {
    pub governor: (usize, String),
    pub dependent: (usize, String),
    pub label: String,
}

/// A fact description: tokens in strictly increasing index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactDesc {
    tokens: Vec<(usize, String)>,
}

impl FactDesc {
    pub fn new(tokens: Vec<(usize, String)>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Invalid("fact description must be non-empty".into()));
        }
        if tokens.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Invalid("fact description indices must strictly increase".into()));
        }
        Ok(FactDesc { tokens })
    }

    pub fn tokens(&self) -> &[(usize, String)] {
        &self.tokens
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|(_, f)| f.as_str())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn render(&self) -> String {
        self.forms().collect::<Vec<_>>().join(" ")
    }
}

/// Ordered fact descriptions, flattened with a separator between them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactSeq {
    pub facts: Vec<FactDesc>,
}

impl FactSeq {
    pub fn flattened(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, f) in self.facts.iter().enumerate() {
            if i > 0 {
                out.push(SEP_TOKEN.to_string());
            }
            out.extend(f.forms().map(String::from));
        }
        out
    }

    /// Facts joined by ` ||| `; the empty string for no facts.
    pub fn render(&self) -> String {
        self.flattened().join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

/// Multiset of normalized surface forms.
pub(crate) type WordBag = HashMap<String, usize>;

pub(crate) fn word_bag<'a>(forms: impl Iterator<Item = &'a str>) -> WordBag {
    let mut bag = WordBag::new();
    for f in forms {
        *bag.entry(normalize_token(f)).or_default() += 1;
    }
    bag
}

/// `a ⊆ b` as multisets.
pub(crate) fn sub_bag(a: &WordBag, b: &WordBag) -> bool {
    a.iter().all(|(w, n)| b.get(w).is_some_and(|m| m >= n))
}
