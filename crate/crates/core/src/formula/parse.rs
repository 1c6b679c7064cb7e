use super::{FormulaStore, NodeId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Word(String),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Next token with the position of its first character.
    fn next_token(&mut self) -> Option<(Tok, usize, usize)> {
        loop {
            match *self.chars.peek()? {
                c if c.is_whitespace() => {
                    self.bump();
                }
                ';' => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, column) = (self.line, self.column);
        let c = self.bump()?;
        let tok = match c {
            '(' => Tok::Open,
            ')' => Tok::Close,
            _ => {
                let mut word = String::from(c);
                while let Some(&n) = self.chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    word.push(n);
                    self.bump();
                }
                Tok::Word(word)
            }
        };
        Some((tok, line, column))
    }
}

struct Parser<'a, 's> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, usize, usize)>,
    store: &'s mut FormulaStore,
}

impl Parser<'_, '_> {
    fn peek(&mut self) -> Option<&(Tok, usize, usize)> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next_token();
        }
        self.peeked.as_ref()
    }

    fn next(&mut self) -> Option<(Tok, usize, usize)> {
        self.peek();
        self.peeked.take()
    }

    fn eof_error(&self) -> ParseError {
        ParseError { line: self.lexer.line, column: self.lexer.column, message: "unexpected end of input".into() }
    }

    fn formula(&mut self) -> Result<NodeId, ParseError> {
        let (tok, line, column) = self.next().ok_or_else(|| self.eof_error())?;
        let err = |message: String| ParseError { line, column, message };
        match tok {
            Tok::Close => Err(err("unexpected ')'".into())),
            Tok::Word(w) => self.leaf(&w).map_err(err),
            Tok::Open => {
                let (head, hl, hc) = self.next().ok_or_else(|| self.eof_error())?;
                let op = match head {
                    Tok::Word(w) => w,
                    _ => return Err(ParseError { line: hl, column: hc, message: "expected operator".into() }),
                };
                let f = match op.as_str() {
                    "~" => {
                        let a = self.formula()?;
                        self.store.not(a)
                    }
                    "&" | "|" => {
                        let mut children = vec![self.formula()?, self.formula()?];
                        while !matches!(self.peek(), Some((Tok::Close, ..)) | None) {
                            children.push(self.formula()?);
                        }
                        if op == "&" {
                            self.store.and(children)
                        } else {
                            self.store.or(children)
                        }
                    }
                    "->" | "<->" => {
                        let a = self.formula()?;
                        let b = self.formula()?;
                        if op == "->" {
                            self.store.implies(a, b)
                        } else {
                            self.store.iff(a, b)
                        }
                    }
                    "box" | "dia" => {
                        let r = self.modality()?;
                        let a = self.formula()?;
                        if op == "box" {
                            self.store.boxed(r, a)
                        } else {
                            self.store.dia(r, a)
                        }
                    }
                    other => {
                        return Err(ParseError { line: hl, column: hc, message: format!("unknown operator '{other}'") })
                    }
                };
                match self.next() {
                    Some((Tok::Close, ..)) => Ok(f),
                    Some((_, l, c)) => Err(ParseError { line: l, column: c, message: "expected ')'".into() }),
                    None => Err(self.eof_error()),
                }
            }
        }
    }

    fn modality(&mut self) -> Result<u32, ParseError> {
        let (tok, line, column) = self.next().ok_or_else(|| self.eof_error())?;
        let err = |message: String| ParseError { line, column, message };
        match tok {
            Tok::Word(w) => match w.parse::<u32>() {
                Ok(0) => Err(err("modality index must be >= 1".into())),
                Ok(r) => Ok(r),
                Err(_) => Err(err(format!("expected modality index, found '{w}'"))),
            },
            _ => Err(err("expected modality index".into())),
        }
    }

    fn leaf(&mut self, word: &str) -> Result<NodeId, String> {
        match word {
            "true" => Ok(self.store.top()),
            "false" => Ok(self.store.bottom()),
            _ => {
                let digits = word.strip_prefix('p').ok_or_else(|| format!("unexpected token '{word}'"))?;
                match digits.parse::<u32>() {
                    Ok(0) => Err("atom index must be >= 1".into()),
                    Ok(k) => Ok(self.store.atom(k)),
                    Err(_) => Err(format!("malformed atom '{word}'")),
                }
            }
        }
    }
}

/// Parses one formula in the s-expression grammar into `store`.
///
/// `;` starts a comment running to the end of the line.
pub fn parse(store: &mut FormulaStore, text: &str) -> Result<NodeId, ParseError> {
    let mut p = Parser { lexer: Lexer::new(text), peeked: None, store };
    let f = p.formula()?;
    if let Some((_, line, column)) = p.next() {
        return Err(ParseError { line, column, message: "trailing input after formula".into() });
    }
    Ok(f)
}
