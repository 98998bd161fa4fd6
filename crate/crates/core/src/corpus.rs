//! Text ingestion: tokenizing, POS tagging, lemmatization and stopword removal.
//!
//! The default tagger is a lexicon lookup with suffix heuristics. Anything
//! implementing [`Tagger`] can replace it, and [`ingest_pretagged`] accepts the
//! output of an external tagger directly.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");
const BUNDLED_LEMMAS: &str = include_str!("../data/lemmas.tsv");

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        }
    }

    /// Parses a coarse tag name or a Penn Treebank tag (`NNS`, `VBD`, ...).
    pub fn parse(tag: &str) -> Pos {
        let upper = tag.trim().to_ascii_uppercase();
        match upper.as_str() {
            "NOUN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            "OTHER" => Pos::Other,
            t if t.starts_with("NN") => Pos::Noun,
            t if t.starts_with("VB") => Pos::Verb,
            t if t.starts_with("JJ") => Pos::Adj,
            t if t.starts_with("RB") => Pos::Adv,
            _ => Pos::Other,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RawDocument {
    pub author_id: String,
    pub doc_id: String,
    pub text: String,
    pub source_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    /// Index in the token sequence before stopword removal.
    pub position: usize,
}

/// Preprocessed lemma sequence of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub author_id: String,
    pub doc_id: String,
    pub tokens: Vec<Token>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }

    /// Writes `position<TAB>surface<TAB>lemma<TAB>tag`, one token per line.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.tokens.len() * 24);
        for t in &self.tokens {
            out.push_str(&format!("{}\t{}\t{}\t{}\n", t.position, t.surface, t.lemma, t.pos));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path, author_id: &str, doc_id: &str) -> Result<TokenStream> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parse_err = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: message.to_string(),
            };
            if fields.len() != 4 {
                return Err(parse_err("expected 4 tab-separated fields"));
            }
            let position = fields[0]
                .parse()
                .map_err(|_| parse_err("position is not an integer"))?;
            tokens.push(Token {
                surface: fields[1].to_string(),
                lemma: fields[2].to_string(),
                pos: Pos::parse(fields[3]),
                position,
            });
        }
        Ok(TokenStream {
            author_id: author_id.to_string(),
            doc_id: doc_id.to_string(),
            tokens,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StopwordList {
    words: BTreeSet<String>,
    pub source_path: Option<PathBuf>,
}

impl StopwordList {
    /// The bundled English function-word list.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS, None)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text, Some(path.to_path_buf())))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
            source_path: None,
        }
    }

    fn parse(text: &str, source_path: Option<PathBuf>) -> Self {
        let mut list = Self::from_words(text.lines());
        list.source_path = source_path;
        list
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// Splits text into lowercase alphabetic tokens.
///
/// Digits, punctuation and whitespace separate tokens. An apostrophe between
/// two letters stays inside the token, so "don't" is one token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if (c == '\'' || c == '\u{2019}')
            && !current.is_empty()
            && chars.peek().is_some_and(|n| n.is_alphabetic())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Assigns a coarse tag to every token of a sequence.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> Vec<Pos>;
}

/// Word-to-tag table with suffix heuristics for unknown words.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    lexicon: HashMap<String, Pos>,
}

impl LexiconTagger {
    pub fn bundled() -> Self {
        let mut lexicon = HashMap::new();
        for line in BUNDLED_LEXICON.lines() {
            if let Some((word, tag)) = line.split_once('\t') {
                lexicon.entry(word.to_string()).or_insert_with(|| Pos::parse(tag));
            }
        }
        // Inflected forms from the lemma table carry their own tag.
        for line in BUNDLED_LEMMAS.lines() {
            let mut f = line.split('\t');
            if let (Some(surface), Some(tag)) = (f.next(), f.next()) {
                lexicon.entry(surface.to_string()).or_insert_with(|| Pos::parse(tag));
            }
        }
        LexiconTagger { lexicon }
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.lexicon.keys().map(String::as_str)
    }

    pub fn tag_word(&self, word: &str) -> Pos {
        if let Some(&pos) = self.lexicon.get(word) {
            return pos;
        }
        suffix_tag(word)
    }
}

impl Tagger for LexiconTagger {
    fn tag(&self, tokens: &[String]) -> Vec<Pos> {
        tokens.iter().map(|t| self.tag_word(t)).collect()
    }
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| "aeiouy".contains(c))
}

fn suffix_tag(word: &str) -> Pos {
    let len = word.chars().count();
    if word.ends_with("n't") || word.ends_with("'ll") || word.ends_with("'re") || word.ends_with("'ve")
    {
        return Pos::Other;
    }
    if word.ends_with("'s") {
        return Pos::Noun;
    }
    if len > 4 && word.ends_with("ly") {
        return Pos::Adv;
    }
    if len > 5 && word.ends_with("ing") && has_vowel(&word[..word.len() - 3]) {
        return Pos::Verb;
    }
    if len > 4 && word.ends_with("ed") && has_vowel(&word[..word.len() - 2]) {
        return Pos::Verb;
    }
    const NOUN_SUFFIXES: [&str; 12] = [
        "tion", "sion", "ness", "ment", "ity", "ship", "hood", "ism", "ist", "ance", "ence", "er",
    ];
    if NOUN_SUFFIXES.iter().any(|s| word.ends_with(s)) {
        return Pos::Noun;
    }
    const ADJ_SUFFIXES: [&str; 9] = ["ous", "ful", "ive", "able", "ible", "less", "ish", "ic", "al"];
    if len > 4 && ADJ_SUFFIXES.iter().any(|s| word.ends_with(s)) {
        return Pos::Adj;
    }
    Pos::Noun
}

/// Irregular-form table plus the set of known base forms used to arbitrate
/// between suffix-rule candidates.
#[derive(Debug, Clone, Default)]
pub struct LemmaDictionary {
    entries: HashMap<(String, Pos), String>,
    known: HashSet<String>,
}

impl LemmaDictionary {
    pub fn bundled() -> Self {
        let mut dict = Self::parse(BUNDLED_LEMMAS);
        dict.add_known_words(LexiconTagger::bundled().words());
        dict
    }

    /// Loads a `surface<TAB>tag<TAB>lemma` file.
    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingLemmaResource(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in text.lines().enumerate() {
            if !line.is_empty() && line.split('\t').count() != 3 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected surface<TAB>tag<TAB>lemma".into(),
                });
            }
        }
        Ok(Self::parse(&text))
    }

    fn parse(text: &str) -> Self {
        let mut dict = LemmaDictionary::default();
        for line in text.lines() {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() == 3 {
                let lemma = f[2].to_lowercase();
                dict.known.insert(lemma.clone());
                dict.entries.insert((f[0].to_lowercase(), Pos::parse(f[1])), lemma);
            }
        }
        dict
    }

    pub fn add_known_words<'a>(&mut self, words: impl IntoIterator<Item = &'a str>) {
        self.known.extend(words.into_iter().map(str::to_string));
    }

    pub fn is_known(&self, word: &str) -> bool {
        self.known.contains(word)
    }

    /// Lemma for a lowercase word with the given tag.
    pub fn lemmatize(&self, word: &str, pos: Pos) -> String {
        if let Some(l) = self.entries.get(&(word.to_string(), pos)) {
            return l.clone();
        }
        let word = word.strip_suffix("'s").unwrap_or(word);
        match pos {
            Pos::Noun => self.noun_lemma(word),
            Pos::Verb => self.verb_lemma(word),
            _ => word.to_string(),
        }
    }

    fn pick(&self, candidates: &[String], fallback: String) -> String {
        candidates
            .iter()
            .find(|c| self.known.contains(c.as_str()))
            .cloned()
            .unwrap_or(fallback)
    }

    fn noun_lemma(&self, word: &str) -> String {
        if self.known.contains(word) {
            return word.to_string();
        }
        let n = word.len();
        if n > 4 && word.ends_with("ies") {
            return format!("{}y", &word[..n - 3]);
        }
        if n > 3 && word.ends_with("es") {
            let strip_es = word[..n - 2].to_string();
            let strip_s = word[..n - 1].to_string();
            let sibilant = ["sses", "xes", "zzes", "ches", "shes"]
                .iter()
                .any(|s| word.ends_with(s));
            let fallback = if sibilant { strip_es.clone() } else { strip_s.clone() };
            return self.pick(&[strip_s, strip_es], fallback);
        }
        if n > 3 && word.ends_with('s') && !["ss", "us", "is"].iter().any(|s| word.ends_with(s)) {
            return word[..n - 1].to_string();
        }
        word.to_string()
    }

    fn verb_lemma(&self, word: &str) -> String {
        if self.known.contains(word) {
            return word.to_string();
        }
        let n = word.len();
        if n > 4 && (word.ends_with("ies") || word.ends_with("ied")) {
            return format!("{}y", &word[..n - 3]);
        }
        if n > 4 && word.ends_with("ing") {
            return self.undo_suffix(word, &word[..n - 3]);
        }
        if n > 3 && word.ends_with("ed") {
            if word.ends_with("eed") && !self.known.contains(&word[..n - 1]) {
                return word.to_string();
            }
            return self.undo_suffix(word, &word[..n - 2]);
        }
        if n > 3 && word.ends_with("es") {
            let strip_es = word[..n - 2].to_string();
            let strip_s = word[..n - 1].to_string();
            let sibilant = ["sses", "xes", "zes", "ches", "shes"]
                .iter()
                .any(|s| word.ends_with(s));
            let fallback = if sibilant { strip_es.clone() } else { strip_s.clone() };
            return self.pick(&[strip_s, strip_es], fallback);
        }
        if n > 3 && word.ends_with('s') && !word.ends_with("ss") {
            return word[..n - 1].to_string();
        }
        word.to_string()
    }

    /// Base form for a verb after removing `-ed` / `-ing`.
    fn undo_suffix(&self, word: &str, stem: &str) -> String {
        if stem.len() < 2 || !has_vowel(stem) {
            return word.to_string();
        }
        let bytes = stem.as_bytes();
        let last = bytes[bytes.len() - 1];
        let doubled = bytes.len() >= 3
            && last == bytes[bytes.len() - 2]
            && !b"aeioulsfz".contains(&last);
        let undoubled = stem[..stem.len() - 1].to_string();
        let with_e = format!("{stem}e");

        let mut candidates = Vec::new();
        if doubled {
            candidates.push(undoubled.clone());
        }
        candidates.push(with_e.clone());
        candidates.push(stem.to_string());
        let fallback = if doubled {
            undoubled
        } else if needs_final_e(stem) {
            with_e
        } else {
            stem.to_string()
        };
        self.pick(&candidates, fallback)
    }
}

fn is_vowel(b: u8) -> bool {
    b"aeiou".contains(&b)
}

// Stems that lost a silent final `e`: "lov", "danc", "argu", or a short
// consonant-vowel-consonant ending ("hop", "smil").
fn needs_final_e(stem: &str) -> bool {
    let b = stem.as_bytes();
    let n = b.len();
    let last = b[n - 1];
    if matches!(last, b'v' | b'c' | b'z' | b'u') {
        return true;
    }
    if n >= 3 && !is_vowel(last) && !b"wxy".contains(&last) && is_vowel(b[n - 2]) && !is_vowel(b[n - 3]) {
        let start_cluster = b[..n - 2].iter().all(|&c| !is_vowel(c));
        return start_cluster && n <= 4;
    }
    false
}

/// Tags and lemmatizes a token sequence. Positions are the token indices.
pub fn tag_and_lemmatize(tokens: &[String], tagger: &dyn Tagger, lemmas: &LemmaDictionary) -> Vec<Token> {
    let tags = tagger.tag(tokens);
    tokens
        .iter()
        .zip(tags)
        .enumerate()
        .map(|(position, (surface, pos))| {
            let lower = surface.to_lowercase();
            let mut lemma = lemmas.lemmatize(&lower, pos);
            if lemma.is_empty() {
                lemma = lower;
            }
            Token {
                surface: surface.clone(),
                lemma,
                pos,
                position,
            }
        })
        .collect()
}

/// Drops every token whose lemma is a stopword, keeping order.
pub fn remove_stopwords(tokens: &[Token], stopwords: &StopwordList) -> Vec<Token> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(&t.lemma))
        .cloned()
        .collect()
}

/// Reads a `surface<TAB>lemma<TAB>tag` file produced by an external tagger.
///
/// Blank lines are skipped. Lemmas are lowercased and filtered against the
/// stopword list exactly as [`Preprocessor::preprocess`] would.
pub fn ingest_pretagged(
    path: &Path,
    stopwords: &StopwordList,
    author_id: &str,
    doc_id: &str,
) -> Result<TokenStream> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[1].trim().is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "expected surface<TAB>lemma<TAB>tag".into(),
            });
        }
        tokens.push(Token {
            surface: fields[0].to_string(),
            lemma: fields[1].trim().to_lowercase(),
            pos: Pos::parse(fields[2]),
            position: tokens.len(),
        });
    }
    Ok(TokenStream {
        author_id: author_id.to_string(),
        doc_id: doc_id.to_string(),
        tokens: remove_stopwords(&tokens, stopwords),
    })
}

/// Tagger, lemma rules and stopword list bundled together.
pub struct Preprocessor {
    tagger: Box<dyn Tagger>,
    lemmas: LemmaDictionary,
    stopwords: StopwordList,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            tagger: Box::new(LexiconTagger::bundled()),
            lemmas: LemmaDictionary::bundled(),
            stopwords: StopwordList::bundled(),
        }
    }
}

impl Preprocessor {
    pub fn new(tagger: Box<dyn Tagger>, lemmas: LemmaDictionary, stopwords: StopwordList) -> Self {
        Preprocessor {
            tagger,
            lemmas,
            stopwords,
        }
    }

    pub fn stopwords(&self) -> &StopwordList {
        &self.stopwords
    }

    pub fn preprocess(&self, doc: &RawDocument) -> TokenStream {
        let surfaces = tokenize(&doc.text);
        let tokens = tag_and_lemmatize(&surfaces, self.tagger.as_ref(), &self.lemmas);
        TokenStream {
            author_id: doc.author_id.clone(),
            doc_id: doc.doc_id.clone(),
            tokens: remove_stopwords(&tokens, &self.stopwords),
        }
    }
}

/// One row of the `author,doc,path` corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub author: String,
    pub doc: String,
    pub path: PathBuf,
}

/// Reads the corpus manifest. Relative paths resolve against the manifest's
/// directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["author", "doc", "path"] {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "manifest header must be author,doc,path".into(),
        });
    }
    let mut entries: Vec<ManifestEntry> = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in reader.deserialize::<ManifestEntry>().enumerate() {
        let mut entry = row?;
        if !seen.insert((entry.author.clone(), entry.doc.clone())) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("duplicate (author, doc) = ({}, {})", entry.author, entry.doc),
            });
        }
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
        entries.push(entry);
    }
    Ok(entries)
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in entries {
        w.serialize(e)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_document(entry: &ManifestEntry) -> Result<RawDocument> {
    let bytes = fs::read(&entry.path).map_err(|e| Error::io(&entry.path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
        path: entry.path.clone(),
        line: 0,
        message: "document is not valid UTF-8".into(),
    })?;
    if text.trim().is_empty() {
        return Err(Error::Parse {
            path: entry.path.clone(),
            line: 0,
            message: "document is empty".into(),
        });
    }
    Ok(RawDocument {
        author_id: entry.author.clone(),
        doc_id: entry.doc.clone(),
        text,
        source_path: entry.path.clone(),
    })
}

/// Writes the lemma sequence one per line; used for quick inspection.
pub fn write_lemmas(path: &Path, stream: &TokenStream) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for l in stream.lemmas() {
        writeln!(f, "{l}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lemma_of(word: &str, pos: Pos) -> String {
        LemmaDictionary::bundled().lemmatize(word, pos)
    }

    #[test]
    fn tokenize_strips_punctuation() {
        assert_eq!(tokenize("The cat, the cat!"), vec!["the", "cat", "the", "cat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("It's 2 cats"), vec!["it's", "cats"]);
    }

    #[test]
    fn tokenize_apostrophes() {
        assert_eq!(tokenize("don't"), vec!["don't"]);
        assert_eq!(tokenize("'quoted' words'"), vec!["quoted", "words"]);
        assert_eq!(tokenize("rock\u{2019}n\u{2019}roll"), vec!["rock'n'roll"]);
        assert_eq!(tokenize("abc123def"), vec!["abc", "def"]);
    }

    #[test]
    fn lemma_examples() {
        assert_eq!(lemma_of("cats", Pos::Noun), "cat");
        assert_eq!(lemma_of("running", Pos::Verb), "run");
        assert_eq!(lemma_of("whale", Pos::Noun), "whale");
    }

    #[test]
    fn lemma_rules() {
        assert_eq!(lemma_of("stories", Pos::Noun), "story");
        assert_eq!(lemma_of("boxes", Pos::Noun), "box");
        assert_eq!(lemma_of("churches", Pos::Noun), "church");
        assert_eq!(lemma_of("houses", Pos::Noun), "house");
        assert_eq!(lemma_of("glasses", Pos::Noun), "glass");
        assert_eq!(lemma_of("children", Pos::Noun), "child");
        assert_eq!(lemma_of("walked", Pos::Verb), "walk");
        assert_eq!(lemma_of("stopped", Pos::Verb), "stop");
        assert_eq!(lemma_of("hoped", Pos::Verb), "hope");
        assert_eq!(lemma_of("loved", Pos::Verb), "love");
        assert_eq!(lemma_of("visited", Pos::Verb), "visit");
        assert_eq!(lemma_of("tried", Pos::Verb), "try");
        assert_eq!(lemma_of("wishes", Pos::Verb), "wish");
        assert_eq!(lemma_of("went", Pos::Verb), "go");
        assert_eq!(lemma_of("was", Pos::Verb), "be");
        assert_eq!(lemma_of("agreed", Pos::Verb), "agree");
        assert_eq!(lemma_of("called", Pos::Verb), "call");
        assert_eq!(lemma_of("smiling", Pos::Verb), "smile");
        assert_eq!(lemma_of("quickly", Pos::Adv), "quickly");
        assert_eq!(lemma_of("captain's", Pos::Noun), "captain");
    }

    #[test]
    fn tagger_heuristics() {
        let t = LexiconTagger::bundled();
        assert_eq!(t.tag_word("cats"), Pos::Noun);
        assert_eq!(t.tag_word("slowly"), Pos::Adv);
        assert_eq!(t.tag_word("jumped"), Pos::Verb);
        assert_eq!(t.tag_word("dangerous"), Pos::Adj);
        assert_eq!(t.tag_word("the"), Pos::Other);
        assert_eq!(t.tag_word("went"), Pos::Verb);
        assert_eq!(t.tag_word("thing"), Pos::Noun);
    }

    #[test]
    fn stopwords_filter_on_lemma() {
        let pre = Preprocessor::default();
        let doc = RawDocument {
            author_id: "a".into(),
            doc_id: "d".into(),
            text: "The cat was chasing the whales.".into(),
            source_path: PathBuf::new(),
        };
        let stream = pre.preprocess(&doc);
        let lemmas: Vec<&str> = stream.lemmas().collect();
        assert_eq!(lemmas, vec!["cat", "chase", "whale"]);
        let positions: Vec<usize> = stream.tokens.iter().map(|t| t.position).collect();
        assert_eq!(positions, vec![1, 3, 5]);
    }

    #[test]
    fn remove_stopwords_examples() {
        let stop = StopwordList::from_words(["the"]);
        let toks: Vec<Token> = ["the", "cat", "the", "cat"]
            .iter()
            .enumerate()
            .map(|(i, w)| Token {
                surface: w.to_string(),
                lemma: w.to_string(),
                pos: Pos::Other,
                position: i,
            })
            .collect();
        let out = remove_stopwords(&toks, &stop);
        assert_eq!(out.iter().map(|t| t.lemma.as_str()).collect::<Vec<_>>(), ["cat", "cat"]);
        assert!(remove_stopwords(&[], &stop).is_empty());
    }

    #[test]
    fn bundled_stopwords_are_lowercase() {
        let s = StopwordList::bundled();
        assert!(s.len() >= 150);
        assert!(s.iter().all(|w| w == w.to_lowercase()));
        assert!(s.contains("be") && s.contains("the"));
    }

    #[test]
    fn pretagged_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let stop = StopwordList::from_words(["the"]);

        let p = dir.path().join("ok.tsv");
        fs::write(&p, "cats\tcat\tNOUN\n").unwrap();
        let s = ingest_pretagged(&p, &stop, "a", "d").unwrap();
        assert_eq!(s.tokens.len(), 1);
        assert_eq!(s.tokens[0].surface, "cats");
        assert_eq!(s.tokens[0].lemma, "cat");
        assert_eq!(s.tokens[0].pos, Pos::Noun);

        let p = dir.path().join("empty.tsv");
        fs::write(&p, "").unwrap();
        assert!(ingest_pretagged(&p, &stop, "a", "d").unwrap().is_empty());

        let p = dir.path().join("bad.tsv");
        fs::write(&p, "The\tthe\tDT\ncats cat NOUN\n").unwrap();
        match ingest_pretagged(&p, &stop, "a", "d") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pretagged_matches_preprocess() {
        let pre = Preprocessor::default();
        let doc = RawDocument {
            author_id: "a".into(),
            doc_id: "d".into(),
            text: "The sailors were hunting the great white whale again.".into(),
            source_path: PathBuf::new(),
        };
        let direct = pre.preprocess(&doc);
        let surfaces = tokenize(&doc.text);
        let tagged = tag_and_lemmatize(&surfaces, &LexiconTagger::bundled(), &LemmaDictionary::bundled());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("doc.tsv");
        let body: String = tagged
            .iter()
            .map(|t| format!("{}\t{}\t{}\n", t.surface, t.lemma, t.pos))
            .collect();
        fs::write(&p, body).unwrap();
        let ingested = ingest_pretagged(&p, pre.stopwords(), "a", "d").unwrap();
        assert_eq!(ingested, direct);
    }

    #[test]
    fn missing_lemma_dictionary() {
        let err = LemmaDictionary::from_path(Path::new("/nonexistent/lemmas.tsv")).unwrap_err();
        assert!(matches!(err, Error::MissingLemmaResource(_)));
    }

    #[test]
    fn penn_tags() {
        assert_eq!(Pos::parse("NNS"), Pos::Noun);
        assert_eq!(Pos::parse("VBD"), Pos::Verb);
        assert_eq!(Pos::parse("JJR"), Pos::Adj);
        assert_eq!(Pos::parse("RB"), Pos::Adv);
        assert_eq!(Pos::parse("DT"), Pos::Other);
    }

    #[test]
    fn manifest_roundtrip_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("corpus.csv");
        fs::write(&m, "author,doc,path\nmelville,moby,moby.txt\n").unwrap();
        let entries = read_manifest(&m).unwrap();
        assert_eq!(entries[0].path, dir.path().join("moby.txt"));

        fs::write(&m, "author,doc,path\na,x,x.txt\na,x,y.txt\n").unwrap();
        assert!(matches!(read_manifest(&m), Err(Error::Parse { line: 3, .. })));
    }
}
