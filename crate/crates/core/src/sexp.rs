//! Position-tracking s-expression reader for the corpus format.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SExp {
    Atom(String, Pos),
    List(Vec<SExp>, Pos),
}

impl SExp {
    pub fn pos(&self) -> Pos {
        match self {
            SExp::Atom(_, p) | SExp::List(_, p) => *p,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SExp::Atom(a, _) => format!("`{a}`"),
            SExp::List(items, _) => match items.first() {
                Some(SExp::Atom(h, _)) => format!("form `({h} ...)`"),
                Some(_) => "list".to_string(),
                None => "`()`".to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: expected {expected}, found {found}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExp, SyntaxError> {
        self.skip_trivia();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => Err(SyntaxError::new(start, "`(` or atom", "end of input")),
            Some(')') => Err(SyntaxError::new(start, "`(` or atom", "`)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(SyntaxError::new(self.pos(), "`)`", "end of input"));
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(SExp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(SExp::Atom(atom, start))
            }
        }
    }
}

/// Reads every top-level form of `text`.
pub fn read_all(text: &str) -> Result<Vec<SExp>, SyntaxError> {
    let mut reader = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut forms = Vec::new();
    loop {
        reader.skip_trivia();
        if reader.chars.peek().is_none() {
            return Ok(forms);
        }
        forms.push(reader.read()?);
    }
}
