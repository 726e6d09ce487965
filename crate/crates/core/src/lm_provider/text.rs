//! Tokenizing and light stemming shared by the rule-based parsers.

/// Words that carry no meaning for column matching.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "to", "is", "are", "was", "be", "will", "my", "me", "i", "what", "whether", "how", "much",
    "many", "some", "please", "this", "that", "it", "its", "their", "his", "her", "value", "in", "on", "at", "as",
    "by", "do", "does", "can", "could", "would", "want", "like", "s",
];

pub const NEGATIONS: &[&str] =
    &["no", "not", "non", "without", "never", "nor", "none", "zero", "dont", "doesnt", "isnt"];

/// Prefixes of verbs that ask for a prediction.
pub const TASK_VERBS: &[&str] = &["predict", "recommend", "classif", "estimat", "forecast"];

/// Model-type nouns such as `classifier` or `RegressionModel` are not verbs.
pub fn is_task_verb(word: &str) -> bool {
    const NOUNS: [&str; 3] = ["classifier", "classification", "recommender"];
    TASK_VERBS.iter().any(|v| word.starts_with(v))
        && !word.ends_with("model")
        && !NOUNS.iter().any(|n| word.starts_with(n))
}

/// Plural and possessive stripping: `activities -> activity`, `hours -> hour`,
/// `class -> class`.
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    if w.len() > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..w.len() - 3]);
    }
    if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return w[..w.len() - 1].to_string();
    }
    w
}

/// Equal stems, or one a prefix of the other when both have at least four
/// characters (`smoke`/`smoker`, `playlist`/`playlistname`).
pub fn token_match(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    a.len() >= 4 && b.len() >= 4 && (a.starts_with(b) || b.starts_with(a))
}

pub fn number_word(w: &str) -> Option<f64> {
    const WORDS: [&str; 21] = [
        "zero",
        "one",
        "two",
        "three",
        "four",
        "five",
        "six",
        "seven",
        "eight",
        "nine",
        "ten",
        "eleven",
        "twelve",
        "thirteen",
        "fourteen",
        "fifteen",
        "sixteen",
        "seventeen",
        "eighteen",
        "nineteen",
        "twenty",
    ];
    match w {
        "no" | "none" => Some(0.0),
        "single" => Some(1.0),
        "twice" => Some(2.0),
        _ => WORDS.iter().position(|x| *x == w).map(|i| i as f64),
    }
}

/// Lowercase alphanumeric runs of `text`; everything else separates.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

/// Matching tokens of a column name: words minus stopwords and short
/// positional codes such as `X2` or a leading `Y`, stemmed.
pub fn column_tokens(name: &str) -> Vec<String> {
    let ws = words(name);
    let n = ws.len();
    ws.into_iter()
        .enumerate()
        .filter(|(i, w)| {
            let code = w.len() <= 3
                && w.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && w.chars().skip(1).all(|c| c.is_ascii_digit())
                && (w.len() > 1 || (*i == 0 && n > 1));
            !code && !STOPWORDS.contains(&w.as_str())
        })
        .map(|(_, w)| stem(&w))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Word,
    Number(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    /// Surface form as written.
    pub raw: String,
    /// Lowercased surface form.
    pub text: String,
    pub stem: String,
    pub kind: TokenKind,
    /// Clause number, counting from 0.
    pub clause: usize,
}

impl Token {
    pub fn number(&self) -> Option<f64> {
        match self.kind {
            TokenKind::Number(v) => Some(v),
            TokenKind::Word => None,
        }
    }
}

/// Words that end one clause and start the next; they are not emitted.
const CLAUSE_WORDS: &[&str] = &["and", "with", "but", "while", "plus", "also"];

/// Splits `text` into word and number tokens grouped into clauses. Commas,
/// semicolons, sentence punctuation and [`CLAUSE_WORDS`] end a clause.
/// Decimal points inside numbers are kept, and a `-` directly before a digit
/// that does not follow a letter or digit is a sign.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut clause = 0usize;
    let mut clause_has_tokens = false;
    let mut i = 0;
    let end_clause = |clause: &mut usize, has: &mut bool| {
        if *has {
            *clause += 1;
            *has = false;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let prev_alnum = i > 0 && chars[i - 1].is_alphanumeric();
        let starts_number = c.is_ascii_digit()
            || (c == '-' && !prev_alnum && chars.get(i + 1).is_some_and(char::is_ascii_digit))
            || (c == '.' && !prev_alnum && chars.get(i + 1).is_some_and(char::is_ascii_digit));
        if starts_number {
            let start = i;
            i += 1;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)))
            {
                i += 1;
            }
            // digits glued to letters ("x2", "3rd") stay one word
            if i < chars.len() && chars[i].is_alphabetic() {
                while i < chars.len() && chars[i].is_alphanumeric() {
                    i += 1;
                }
                let raw: String = chars[start..i].iter().collect();
                let w = raw.to_lowercase();
                out.push(Token { raw, stem: stem(&w), text: w, kind: TokenKind::Word, clause });
            } else {
                let s: String = chars[start..i].iter().collect();
                let kind = s.parse().map_or(TokenKind::Word, TokenKind::Number);
                out.push(Token { raw: s.clone(), stem: s.clone(), text: s, kind, clause });
            }
            clause_has_tokens = true;
            continue;
        }
        if c.is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            let w = raw.to_lowercase();
            if CLAUSE_WORDS.contains(&w.as_str()) {
                end_clause(&mut clause, &mut clause_has_tokens);
                continue;
            }
            let kind = number_word(&w).map_or(TokenKind::Word, TokenKind::Number);
            out.push(Token { raw, stem: stem(&w), text: w, kind, clause });
            clause_has_tokens = true;
            continue;
        }
        if matches!(c, ',' | ';' | '.' | '!' | '?' | ':' | '\n') {
            end_clause(&mut clause, &mut clause_has_tokens);
        }
        i += 1;
    }
    out
}

/// Stems of `tokens` plus stems of each adjacent pair glued together, so
/// `extra-curricular` also yields `extracurricular`.
pub fn stems_with_joins(tokens: &[&Token]) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = tokens.iter().enumerate().map(|(i, t)| (i, t.stem.clone())).collect();
    for (i, w) in tokens.windows(2).enumerate() {
        if w[0].kind == TokenKind::Word && w[1].kind == TokenKind::Word {
            out.push((i, stem(&format!("{}{}", w[0].text, w[1].text))));
        }
    }
    out
}
