//! The token pattern dialect and its matcher.
//!
//! Patterns are a small, closed regex subset: literal characters, character
//! classes with ranges and negation (`[a-z]`, `[^"\\]`), postfix `*` `+` `?`,
//! alternation `|`, grouping `(...)`, and escapes. `\` before punctuation
//! yields that character; `\n`, `\t`, `\r` yield the usual controls. There is
//! no `.`, no anchors, and no backreferences.
//!
//! Matching is anchored at a position and reports the *longest* match there,
//! which is what a maximal-munch lexer needs. The implementation is a plain
//! Thompson construction simulated breadth-first, so alternation order never
//! affects the result and matching is linear in the input.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternError {
    /// Byte offset into the pattern source.
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at offset {})", self.message, self.pos)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum ClassItem {
    Char(char),
    Range(char, char),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Test {
    Char(char),
    Class { negated: bool, items: Vec<ClassItem> },
}

impl Test {
    fn accepts(&self, c: char) -> bool {
        match self {
            Test::Char(want) => *want == c,
            Test::Class { negated, items } => {
                let hit = items.iter().any(|item| match item {
                    ClassItem::Char(x) => *x == c,
                    ClassItem::Range(lo, hi) => (*lo..=*hi).contains(&c),
                });
                hit != *negated
            }
        }
    }
}

/// One NFA state: epsilon edges plus at most one consuming edge.
#[derive(Debug, Clone)]
struct State {
    eps: Vec<usize>,
    step: Option<(Test, usize)>,
}

#[derive(Debug, Clone)]
pub struct Pattern {
    source: String,
    states: Vec<State>,
    start: usize,
    accept: usize,
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}
impl Eq for Pattern {}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// (start, accept) pair of a partially built automaton.
type Frag = (usize, usize);

struct Compiler<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    states: Vec<State>,
}

impl<'a> Compiler<'a> {
    fn new(src: &'a str) -> Self {
        Compiler {
            src,
            chars: src.char_indices().peekable(),
            states: Vec::new(),
        }
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> Result<T, PatternError> {
        let pos = self.chars.peek().map(|(i, _)| *i).unwrap_or(self.src.len());
        Err(PatternError { pos, message: message.into() })
    }

    fn push(&mut self) -> usize {
        self.states.push(State { eps: Vec::new(), step: None });
        self.states.len() - 1
    }

    fn single(&mut self, test: Test) -> Frag {
        let s = self.push();
        let a = self.push();
        self.states[s].step = Some((test, a));
        (s, a)
    }

    fn empty(&mut self) -> Frag {
        let s = self.push();
        (s, s)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|(_, c)| *c)
    }

    fn bump(&mut self) -> Option<char> {
        self.chars.next().map(|(_, c)| c)
    }

    /// alternation := concat ("|" concat)*
    fn alternation(&mut self) -> Result<Frag, PatternError> {
        let mut arms = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.bump();
            arms.push(self.concat()?);
        }
        if arms.len() == 1 {
            return Ok(arms[0]);
        }
        let s = self.push();
        let a = self.push();
        for (fs, fa) in arms {
            self.states[s].eps.push(fs);
            self.states[fa].eps.push(a);
        }
        Ok((s, a))
    }

    fn concat(&mut self) -> Result<Frag, PatternError> {
        let mut frag: Option<Frag> = None;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let piece = self.repeated()?;
            frag = Some(match frag {
                None => piece,
                Some((s, a)) => {
                    self.states[a].eps.push(piece.0);
                    (s, piece.1)
                }
            });
        }
        match frag {
            Some(f) => Ok(f),
            None => Ok(self.empty()),
        }
    }

    fn repeated(&mut self) -> Result<Frag, PatternError> {
        let mut frag = self.atom()?;
        while let Some(op) = self.peek() {
            if op != '*' && op != '+' && op != '?' {
                break;
            }
            self.bump();
            let (fs, fa) = frag;
            let s = self.push();
            let a = self.push();
            self.states[s].eps.push(fs);
            self.states[fa].eps.push(a);
            if op == '*' || op == '?' {
                self.states[s].eps.push(a);
            }
            if op == '*' || op == '+' {
                self.states[fa].eps.push(fs);
            }
            frag = (s, a);
        }
        Ok(frag)
    }

    fn atom(&mut self) -> Result<Frag, PatternError> {
        match self.peek() {
            None => self.fail("unexpected end of pattern"),
            Some('(') => {
                self.bump();
                let inner = self.alternation()?;
                if self.bump() != Some(')') {
                    return self.fail("unclosed group");
                }
                Ok(inner)
            }
            Some('[') => {
                self.bump();
                let test = self.class()?;
                Ok(self.single(test))
            }
            Some('*') | Some('+') | Some('?') => self.fail("repetition operator with nothing to repeat"),
            Some(']') => self.fail("unmatched `]`"),
            Some('\\') => {
                self.bump();
                let c = self.escaped()?;
                Ok(self.single(Test::Char(c)))
            }
            Some(c) => {
                self.bump();
                Ok(self.single(Test::Char(c)))
            }
        }
    }

    fn escaped(&mut self) -> Result<char, PatternError> {
        match self.bump() {
            None => self.fail("trailing backslash"),
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some('r') => Ok('\r'),
            Some(c) if c.is_ascii_punctuation() => Ok(c),
            Some(c) => self.fail(format!("unknown escape `\\{c}`")),
        }
    }

    fn class(&mut self) -> Result<Test, PatternError> {
        let negated = if self.peek() == Some('^') {
            self.bump();
            true
        } else {
            false
        };
        let mut items = Vec::new();
        loop {
            let c = match self.peek() {
                None => return self.fail("unclosed character class"),
                Some(']') if !items.is_empty() || negated => {
                    self.bump();
                    break;
                }
                Some(']') => return self.fail("empty character class"),
                Some('\\') => {
                    self.bump();
                    self.escaped()?
                }
                Some(c) => {
                    self.bump();
                    c
                }
            };
            // `a-z` forms a range unless the `-` is last in the class.
            if self.peek() == Some('-') {
                self.bump();
                match self.peek() {
                    Some(']') | None => {
                        items.push(ClassItem::Char(c));
                        items.push(ClassItem::Char('-'));
                    }
                    Some('\\') => {
                        self.bump();
                        let hi = self.escaped()?;
                        if hi < c {
                            return self.fail(format!("reversed range `{c}-{hi}`"));
                        }
                        items.push(ClassItem::Range(c, hi));
                    }
                    Some(hi) => {
                        self.bump();
                        if hi < c {
                            return self.fail(format!("reversed range `{c}-{hi}`"));
                        }
                        items.push(ClassItem::Range(c, hi));
                    }
                }
            } else {
                items.push(ClassItem::Char(c));
            }
        }
        Ok(Test::Class { negated, items })
    }
}

impl Pattern {
    pub fn compile(source: &str) -> Result<Pattern, PatternError> {
        let mut c = Compiler::new(source);
        let (start, accept) = c.alternation()?;
        if let Some(ch) = c.peek() {
            return c.fail(format!("unexpected `{ch}`"));
        }
        Ok(Pattern { source: source.to_string(), states: c.states, start, accept })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Length in bytes of the longest match starting at `start`, if any.
    /// A pattern that matches the empty string yields `Some(0)`.
    pub fn longest_match_at(&self, text: &str, start: usize) -> Option<usize> {
        let mut seen = vec![u32::MAX; self.states.len()];
        let mut current: Vec<usize> = Vec::new();
        let mut generation = 0u32;
        self.close(self.start, generation, &mut seen, &mut current);

        let mut best = if current.contains(&self.accept) { Some(0) } else { None };
        for (i, ch) in text[start..].char_indices() {
            let mut next = Vec::new();
            generation += 1;
            for &s in &current {
                if let Some((test, to)) = &self.states[s].step {
                    if test.accepts(ch) {
                        self.close(*to, generation, &mut seen, &mut next);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            current = next;
            if current.contains(&self.accept) {
                best = Some(i + ch.len_utf8());
            }
        }
        best
    }

    pub fn matches_exactly(&self, text: &str) -> bool {
        self.longest_match_at(text, 0) == Some(text.len())
    }

    /// Epsilon closure, stamped per generation to avoid re-clearing.
    fn close(&self, state: usize, generation: u32, seen: &mut [u32], out: &mut Vec<usize>) {
        if seen[state] == generation {
            return;
        }
        seen[state] = generation;
        out.push(state);
        // Clone keeps the borrow checker happy; eps lists are tiny.
        let eps = self.states[state].eps.clone();
        for e in eps {
            self.close(e, generation, seen, out);
        }
    }
}
