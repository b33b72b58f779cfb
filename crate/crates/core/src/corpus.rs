//! Documents, sentence segmentation and tokenization.
//!
//! Tokens carry byte spans into the text they were cut from, so every
//! later stage can recover the exact original surface (including the
//! original quotation characters) while matching on a normalized form.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const DEFAULT_ABBREVIATIONS: &str = include_str!("../resources/abbreviations.txt");

/// Canonical form of every double quotation mark.
pub const DOUBLE_QUOTE: &str = "\"";
/// Canonical form of every single quotation mark.
pub const SINGLE_QUOTE: &str = "'";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub domain_tag: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            domain_tag: None,
        }
    }

    pub fn with_domain(mut self, tag: impl Into<String>) -> Self {
        self.domain_tag = Some(tag.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Exact source text of the token.
    pub surface: String,
    /// Matching form: quotes are folded onto [`DOUBLE_QUOTE`] / [`SINGLE_QUOTE`],
    /// everything else equals `surface`.
    pub form: String,
    pub index: usize,
    /// Byte offsets `(start, end)` into the source text.
    pub span: (usize, usize),
}

impl Token {
    pub fn is_quote(&self) -> bool {
        self.form == DOUBLE_QUOTE || self.form == SINGLE_QUOTE
    }

    pub fn is_punct(&self) -> bool {
        self.surface.chars().all(|c| !c.is_alphanumeric())
    }

    pub fn lower(&self) -> String {
        self.form.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub tokens: Vec<Token>,
    /// The sentence exactly as it appears in the document.
    pub text: String,
    /// Byte offset of `text` within the document.
    pub offset: usize,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn reference(&self) -> SentenceRef {
        SentenceRef {
            doc_id: self.doc_id.clone(),
            sentence: self.index,
        }
    }

    /// Source text from token `first` through token `last`, original spacing kept.
    pub fn slice(&self, first: usize, last: usize) -> &str {
        let start = self.tokens[first].span.0 - self.offset;
        let end = self.tokens[last].span.1 - self.offset;
        &self.text[start..end]
    }

    /// Builds a sentence directly from raw text (a one-sentence document).
    pub fn from_text(doc_id: &str, index: usize, text: &str) -> Sentence {
        Sentence {
            doc_id: doc_id.to_string(),
            index,
            tokens: tokenize(text),
            text: text.to_string(),
            offset: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SentenceRef {
    pub doc_id: String,
    pub sentence: usize,
}

impl std::fmt::Display for SentenceRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}", self.doc_id, self.sentence)
    }
}

fn double_quote(c: char) -> bool {
    matches!(c, '"' | '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{00AB}' | '\u{00BB}')
}

fn single_quote(c: char) -> bool {
    matches!(c, '\'' | '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '`')
}

/// Characters that always form a token of their own.
fn always_split(c: char) -> bool {
    matches!(c, ';' | ':' | '(' | ')' | '[' | ']' | '!' | '?' | '\u{2026}') || double_quote(c)
}

fn canonical_form(surface: &str) -> String {
    let mut chars = surface.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if double_quote(c) => DOUBLE_QUOTE.to_string(),
        (Some(c), None) if single_quote(c) => SINGLE_QUOTE.to_string(),
        _ => surface.to_string(),
    }
}

/// Whitespace and punctuation tokenizer with an abbreviation guard list.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    abbreviations: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::from_list(DEFAULT_ABBREVIATIONS)
    }
}

impl Tokenizer {
    /// Parses an abbreviation list: one entry per line, `#` comments.
    pub fn from_list(content: &str) -> Self {
        let abbreviations = content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Tokenizer { abbreviations }
    }

    pub fn is_abbreviation(&self, word: &str) -> bool {
        self.abbreviations.contains(&word.to_lowercase())
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut spans: Vec<(usize, usize)> = Vec::new();
        let mut chunk_start = None;
        for (i, c) in text.char_indices() {
            if c.is_whitespace() {
                if let Some(s) = chunk_start.take() {
                    self.split_chunk(text, s, i, &mut spans);
                }
            } else if chunk_start.is_none() {
                chunk_start = Some(i);
            }
        }
        if let Some(s) = chunk_start {
            self.split_chunk(text, s, text.len(), &mut spans);
        }
        spans
            .into_iter()
            .enumerate()
            .map(|(index, (start, end))| {
                let surface = text[start..end].to_string();
                Token {
                    form: canonical_form(&surface),
                    surface,
                    index,
                    span: (start, end),
                }
            })
            .collect()
    }

    fn split_chunk(&self, text: &str, start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
        let chars: Vec<(usize, char)> = text[start..end]
            .char_indices()
            .map(|(i, c)| (start + i, c))
            .collect();
        let mut word_start: Option<usize> = None;
        let mut k = 0;
        while k < chars.len() {
            let (pos, c) = chars[k];
            let prev = if k > 0 { Some(chars[k - 1].1) } else { None };
            let next = chars.get(k + 1).map(|&(_, c)| c);
            let inner = |ok: fn(char) -> bool| {
                word_start.is_some() && prev.is_some_and(ok) && next.is_some_and(ok)
            };
            let keep_inside = match c {
                '.' => inner(char::is_alphanumeric),
                ',' => inner(|c| c.is_ascii_digit()),
                c if single_quote(c) => inner(char::is_alphabetic),
                _ => !always_split(c) && !single_quote(c) && c != '.' && c != ',',
            };
            if keep_inside {
                word_start.get_or_insert(pos);
                k += 1;
                continue;
            }
            if c == '.' {
                if let Some(ws) = word_start {
                    let candidate = &text[ws..pos + 1];
                    if self.is_abbreviation(candidate) {
                        out.push((ws, pos + 1));
                        word_start = None;
                        k += 1;
                        continue;
                    }
                }
            }
            if let Some(ws) = word_start.take() {
                out.push((ws, pos));
            }
            // runs of periods form one ellipsis token
            if c == '.' {
                let mut j = k;
                while j + 1 < chars.len() && chars[j + 1].1 == '.' {
                    j += 1;
                }
                let last = chars[j];
                out.push((pos, last.0 + last.1.len_utf8()));
                k = j + 1;
                continue;
            }
            out.push((pos, pos + c.len_utf8()));
            k += 1;
        }
        if let Some(ws) = word_start {
            out.push((ws, end));
        }
    }
}

/// Tokenizes with the default abbreviation list.
pub fn tokenize(text: &str) -> Vec<Token> {
    Tokenizer::default().tokenize(text)
}

/// Segments with the default abbreviation list.
pub fn segment_sentences(doc: &Document) -> Vec<Sentence> {
    Tokenizer::default().segment(doc)
}

fn is_terminal(token: &Token) -> bool {
    matches!(token.form.as_str(), "." | "!" | "?")
}

fn is_closer(token: &Token) -> bool {
    token.is_quote() || matches!(token.form.as_str(), ")" | "]")
}

impl Tokenizer {
    /// Splits a document into sentences. A boundary follows `.`, `!` or `?`
    /// (plus any directly attached closing quotes or brackets) when the next
    /// token is separated by whitespace and starts with a capital letter or
    /// an opening quote.
    pub fn segment(&self, doc: &Document) -> Vec<Sentence> {
        let tokens = self.tokenize(&doc.text);
        let mut sentences = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            current.push(tokens[i].clone());
            if is_terminal(&tokens[i]) {
                let mut j = i;
                while j + 1 < tokens.len()
                    && (is_terminal(&tokens[j + 1]) || is_closer(&tokens[j + 1]))
                    && tokens[j + 1].span.0 == tokens[j].span.1
                {
                    j += 1;
                    current.push(tokens[j].clone());
                }
                let boundary = match tokens.get(j + 1) {
                    None => true,
                    Some(next) => {
                        let gap = next.span.0 > tokens[j].span.1;
                        let starts_upper = next.surface.chars().next().is_some_and(char::is_uppercase);
                        gap && (starts_upper || next.is_quote())
                    }
                };
                i = j;
                if boundary {
                    sentences.push(build_sentence(doc, sentences.len(), std::mem::take(&mut current)));
                }
            }
            i += 1;
        }
        if !current.is_empty() {
            sentences.push(build_sentence(doc, sentences.len(), current));
        }
        sentences
    }
}

fn build_sentence(doc: &Document, index: usize, mut tokens: Vec<Token>) -> Sentence {
    for (k, t) in tokens.iter_mut().enumerate() {
        t.index = k;
    }
    let offset = tokens[0].span.0;
    let end = tokens[tokens.len() - 1].span.1;
    Sentence {
        doc_id: doc.id.clone(),
        index,
        text: doc.text[offset..end].to_string(),
        offset,
        tokens,
    }
}

/// Reads every `*.txt` file in `dir` (sorted by name) as a document whose id
/// is the file stem. If the directory holds a `manifest.tsv`, that manifest
/// is used instead.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<Document>> {
    let manifest = dir.join("manifest.tsv");
    if manifest.is_file() {
        return load_manifest(&manifest);
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "txt") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    let mut docs = Vec::new();
    let mut unreadable = Vec::new();
    for path in paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match fs::read_to_string(&path) {
            Ok(text) => docs.push(Document::new(id, text)),
            Err(_) => unreadable.push(path),
        }
    }
    if !unreadable.is_empty() {
        return Err(Error::UnreadableInputs(unreadable));
    }
    Ok(docs)
}

/// Reads a corpus manifest: `id TAB path TAB domain_tag` per line, paths
/// relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<Document>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let name = path.display().to_string();
    let mut docs: Vec<Document> = Vec::new();
    let mut unreadable = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in content.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields[0].is_empty() {
            return Err(Error::syntax(&name, n + 1, "expected `id TAB path [TAB domain]`"));
        }
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::syntax(&name, n + 1, format!("duplicate document id `{}`", fields[0])));
        }
        let doc_path = base.join(fields[1]);
        match fs::read_to_string(&doc_path) {
            Ok(text) => {
                let mut doc = Document::new(fields[0], text);
                if let Some(tag) = fields.get(2).filter(|t| !t.is_empty()) {
                    doc.domain_tag = Some(tag.to_string());
                }
                docs.push(doc);
            }
            Err(_) => unreadable.push(doc_path),
        }
    }
    if !unreadable.is_empty() {
        return Err(Error::UnreadableInputs(unreadable));
    }
    Ok(docs)
}
