use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

/// A word token. `pos` is a coarse tag (`NOUN`, `ADJ`, ...) supplied by a sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    #[serde(default)]
    pub pos: Option<String>,
    #[serde(default)]
    pub sent_initial: bool,
}

impl Token {
    pub fn new(surface: &str, sent_initial: bool) -> Self {
        Token {
            surface: surface.to_string(),
            lower: surface.to_lowercase(),
            pos: None,
            sent_initial,
        }
    }

    pub fn with_pos(mut self, pos: &str) -> Self {
        self.pos = Some(pos.to_string());
        self
    }
}

fn is_emoji_char(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF | 0x2300..=0x23FF)
}

#[derive(Clone, Copy, PartialEq)]
enum Seg {
    Word,
    Emoji,
    Hyphen,
    Boundary,
    Other,
}

fn classify(seg: &str) -> Seg {
    if seg.chars().any(char::is_alphanumeric) {
        Seg::Word
    } else if seg.chars().any(is_emoji_char) {
        Seg::Emoji
    } else if seg == "-" {
        Seg::Hyphen
    } else if seg.contains(['.', '!', '?', '\n']) {
        Seg::Boundary
    } else {
        Seg::Other
    }
}

/// Splits `text` into lowercase word and emoji tokens.
///
/// Words follow Unicode word boundaries, with `word-word` runs re-joined so
/// hyphenated compounds stay one token. A word is sentence-initial when no
/// word precedes it since the start of text or the last `.`, `!`, `?` or newline.
pub fn tokenize(text: &str) -> Vec<Token> {
    let segs: Vec<(&str, Seg)> = text
        .split_word_bounds()
        .map(|s| (s, classify(s)))
        .collect();
    let mut out = Vec::new();
    let mut sentence_start = true;
    let mut i = 0;
    while i < segs.len() {
        let (s, kind) = segs[i];
        match kind {
            Seg::Word => {
                let mut surface = s.to_string();
                while i + 2 < segs.len()
                    && segs[i + 1].1 == Seg::Hyphen
                    && segs[i + 2].1 == Seg::Word
                {
                    surface.push('-');
                    surface.push_str(segs[i + 2].0);
                    i += 2;
                }
                out.push(Token::new(&surface, sentence_start));
                sentence_start = false;
            }
            Seg::Emoji => out.push(Token::new(s, false)),
            Seg::Boundary => sentence_start = true,
            Seg::Hyphen | Seg::Other => {}
        }
        i += 1;
    }
    out
}
