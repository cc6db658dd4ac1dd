use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::types::{DepNode, DepTree, FactSeq, Token, Triple};
use crate::error::{Error, Result};

/// Reads CoNLL-U style sentences. Only ID, FORM, HEAD and DEPREL (columns
/// 1, 2, 7 and 8) are used; comments, multiword ranges and empty nodes are
/// skipped; a blank line ends a sentence.
pub fn read_conllu<R: BufRead>(reader: R) -> Result<Vec<DepTree>> {
    let mut trees = Vec::new();
    let mut nodes = Vec::new();
    let finish = |nodes: &mut Vec<DepNode>, trees: &mut Vec<DepTree>, line: usize| -> Result<()> {
        if !nodes.is_empty() {
            let tree = DepTree::new(std::mem::take(nodes))
                .map_err(|e| Error::parse(format!("sentence ending at line {line}"), e.to_string()))?;
            trees.push(tree);
        }
        Ok(())
    };
    let mut lineno = 0;
    for line in reader.lines() {
        lineno += 1;
        let line = line.map_err(|e| Error::parse(format!("conllu line {lineno}"), e.to_string()))?;
        let line = line.trim_end();
        if line.is_empty() {
            finish(&mut nodes, &mut trees, lineno)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(Error::parse(
                format!("conllu line {lineno}"),
                format!("expected at least 8 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains(['-', '.']) {
            continue;
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(format!("conllu line {lineno}"), format!("bad {what} {s:?}")))
        };
        nodes.push(DepNode {
            index: num(cols[0], "ID")?,
            form: cols[1].to_string(),
            head: num(cols[6], "HEAD")?,
            label: cols[7].to_string(),
        });
    }
    finish(&mut nodes, &mut trees, lineno)?;
    Ok(trees)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawToken {
    Plain(String),
    Indexed {
        #[serde(alias = "text", alias = "word")]
        form: String,
        #[serde(default)]
        index: Option<usize>,
    },
}

impl From<RawToken> for Token {
    fn from(t: RawToken) -> Self {
        match t {
            RawToken::Plain(form) => Token { form, index: None },
            RawToken::Indexed { form, index } => Token { form, index },
        }
    }
}

#[derive(Deserialize)]
struct RawTriple {
    subject: Vec<RawToken>,
    predicate: Vec<RawToken>,
    #[serde(default)]
    object: Vec<RawToken>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: usize,
    #[serde(default)]
    triples: Vec<RawTriple>,
}

/// Reads JSON-lines triple records `{"id": n, "triples": [...]}` keyed by
/// sentence id. Tokens are strings or `{"form": .., "index": ..}` objects.
pub fn read_triples<R: BufRead>(reader: R) -> Result<HashMap<usize, Vec<Triple>>> {
    let mut out: HashMap<usize, Vec<Triple>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let loc = || format!("triples line {}", i + 1);
        let line = line.map_err(|e| Error::parse(loc(), e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::parse(loc(), e.to_string()))?;
        let entry = out.entry(rec.id).or_default();
        for t in rec.triples {
            let conv = |v: Vec<RawToken>| v.into_iter().map(Token::from).collect();
            let triple = Triple::new(conv(t.subject), conv(t.predicate), conv(t.object))
                .map_err(|e| Error::parse(loc(), e.to_string()))?;
            entry.push(triple);
        }
    }
    Ok(out)
}

/// One line per sentence; an empty line for an empty fact sequence.
pub fn write_facts<W: std::io::Write>(mut w: W, seqs: &[FactSeq]) -> std::io::Result<()> {
    for s in seqs {
        writeln!(w, "{}", s.render())?;
    }
    w.flush()
}
