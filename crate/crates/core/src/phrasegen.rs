//! Enumeration of the phrase language `(adj )+noun` over a lexicon.

use std::collections::HashSet;
use std::io::{self, Write};

use serde::Serialize;

use crate::lexicon::{Adjective, AdjectiveType, Lexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    Adjective(AdjectiveType),
    Noun,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub surface: String,
    pub role: Role,
}

/// One or more distinct adjectives followed by a single noun.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Phrase {
    terms: Vec<Term>,
    text: String,
}

impl Phrase {
    pub fn new(adjectives: &[&Adjective], noun: &str) -> Self {
        let mut terms: Vec<Term> = adjectives
            .iter()
            .map(|a| Term {
                surface: a.surface.clone(),
                role: Role::Adjective(a.kind),
            })
            .collect();
        terms.push(Term {
            surface: noun.to_string(),
            role: Role::Noun,
        });
        let text = terms
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        Self { terms, text }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn adjective_count(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn adjective_types(&self) -> Vec<AdjectiveType> {
        self.terms
            .iter()
            .filter_map(|t| match t.role {
                Role::Adjective(kind) => Some(kind),
                Role::Noun => None,
            })
            .collect()
    }

    pub fn noun(&self) -> &str {
        &self.terms[self.terms.len() - 1].surface
    }
}

/// Every phrase of 1..=`max_adjectives` ordered, pairwise-distinct adjectives
/// followed by one noun. Shorter phrases come first; within a length the
/// adjective slots vary in lexicon order left to right, then the noun.
pub fn generate_phrases(lex: &Lexicon, max_adjectives: usize) -> Vec<Phrase> {
    let adjectives = lex.adjectives();
    let mut out = Vec::new();
    if adjectives.is_empty() || lex.nouns().is_empty() {
        return out;
    }
    let mut stack: Vec<usize> = Vec::new();
    for len in 1..=max_adjectives.min(adjectives.len()) {
        expand(adjectives, lex.nouns(), len, &mut stack, &mut out);
    }
    out
}

fn expand(
    adjectives: &[Adjective],
    nouns: &[String],
    len: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Phrase>,
) {
    if stack.len() == len {
        let chosen: Vec<&Adjective> = stack.iter().map(|&i| &adjectives[i]).collect();
        for noun in nouns {
            out.push(Phrase::new(&chosen, noun));
        }
        return;
    }
    for i in 0..adjectives.len() {
        if stack.contains(&i) {
            continue;
        }
        stack.push(i);
        expand(adjectives, nouns, len, stack, out);
        stack.pop();
    }
}

/// Closed-form size of [`generate_phrases`]: sum over k of A!/(A-k)! * N.
pub fn phrase_count(adjectives: usize, nouns: usize, max_adjectives: usize) -> usize {
    let mut total = 0;
    let mut perms = 1;
    for k in 0..max_adjectives.min(adjectives) {
        perms *= adjectives - k;
        total += perms * nouns;
    }
    total
}

/// Two distinct adjectives crossed with two distinct nouns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairQuadruple<'a> {
    pub a1: &'a Adjective,
    pub a2: &'a Adjective,
    pub n1: &'a str,
    pub n2: &'a str,
}

impl<'a> PairQuadruple<'a> {
    pub fn key(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.a1.surface, self.a2.surface, self.n1, self.n2
        )
    }

    /// Texts of `a1 n1`, `a1 n2`, `a2 n1`, `a2 n2`.
    pub fn phrase_texts(&self) -> [String; 4] {
        [
            format!("{} {}", self.a1.surface, self.n1),
            format!("{} {}", self.a1.surface, self.n2),
            format!("{} {}", self.a2.surface, self.n1),
            format!("{} {}", self.a2.surface, self.n2),
        ]
    }

    /// Same nouns, adjectives exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a1: self.a2,
            a2: self.a1,
            ..*self
        }
    }
}

/// Ordered adjective pairs (a1 != a2) times unordered noun pairs {n1, n2}
/// with n1 before n2 in lexicon order.
pub fn generate_pair_quadruples(lex: &Lexicon) -> impl Iterator<Item = PairQuadruple<'_>> + '_ {
    let adjectives = lex.adjectives();
    let nouns = lex.nouns();
    adjectives.iter().enumerate().flat_map(move |(i, a1)| {
        adjectives
            .iter()
            .enumerate()
            .filter(move |&(j, _)| j != i)
            .flat_map(move |(_, a2)| {
                (0..nouns.len()).flat_map(move |x| {
                    (x + 1..nouns.len()).map(move |y| PairQuadruple {
                        a1,
                        a2,
                        n1: &nouns[x],
                        n2: &nouns[y],
                    })
                })
            })
    })
}

/// Every text that needs an embedding: phrase texts (including the AN
/// phrases the quadruples reference), then each single adjective and noun.
/// First occurrence wins; order is deterministic.
pub fn phrase_texts_needed<'a>(
    phrases: &[Phrase],
    quadruples: impl IntoIterator<Item = PairQuadruple<'a>>,
) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |text: &str, out: &mut Vec<String>| {
        if seen.insert(text.to_string()) {
            out.push(text.to_string());
        }
    };
    for phrase in phrases {
        push(phrase.text(), &mut out);
    }
    let mut singles: Vec<String> = Vec::new();
    for q in quadruples {
        for text in q.phrase_texts() {
            push(&text, &mut out);
        }
        for s in [&q.a1.surface, &q.a2.surface] {
            singles.push(s.clone());
        }
        singles.push(q.n1.to_string());
        singles.push(q.n2.to_string());
    }
    for phrase in phrases {
        for term in phrase.terms() {
            if term.role != Role::Noun {
                push(&term.surface, &mut out);
            }
        }
    }
    for phrase in phrases {
        push(phrase.noun(), &mut out);
    }
    for s in &singles {
        push(s, &mut out);
    }
    out
}

/// Writes one phrase text per line in generation order.
pub fn write_corpus<W: Write>(phrases: &[Phrase], mut out: W) -> io::Result<()> {
    for phrase in phrases {
        writeln!(out, "{}", phrase.text())?;
    }
    out.flush()
}
