use crate::model::InterventionSet;

use super::{Formula, FormulaError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Eq,
    Arrow,
    Amp,
    Bar,
    Bang,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`<-`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Bang => "`!`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '+')
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '=' => Some(Tok::Eq),
            '&' | '∧' => Some(Tok::Amp),
            '|' | '∨' => Some(Tok::Bar),
            '!' | '¬' => Some(Tok::Bang),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '←' => Some(Tok::Arrow),
            _ => None,
        };
        if let Some(tok) = single {
            chars.next();
            out.push((tok, pos));
            continue;
        }
        if c == '<' {
            chars.next();
            match chars.peek() {
                Some(&(_, '-')) => {
                    chars.next();
                    out.push((Tok::Arrow, pos));
                    continue;
                }
                _ => {
                    return Err(FormulaError::Syntax {
                        position: pos,
                        message: "expected `<-`".into(),
                    })
                }
            }
        }
        if is_word_char(c) {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if !is_word_char(c) {
                    break;
                }
                word.push(c);
                chars.next();
            }
            out.push((Tok::Word(word), pos));
            continue;
        }
        return Err(FormulaError::Syntax {
            position: pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    in_do: bool,
}

/// Parses a formula. Only syntax is checked; names are bound by
/// [`Formula::check`].
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        in_do: false,
    };
    let f = p.formula()?;
    match p.peek() {
        Tok::End => Ok(f),
        other => Err(p.error(format!("unexpected {} after formula", other.describe()))),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> FormulaError {
        FormulaError::Syntax {
            position: self.pos(),
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), FormulaError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let first = self.and()?;
        if *self.peek() != Tok::Bar {
            return Ok(first);
        }
        let mut parts = vec![first];
        while *self.peek() == Tok::Bar {
            self.bump();
            parts.push(self.and()?);
        }
        Ok(Formula::Or(parts))
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let first = self.unary()?;
        if *self.peek() != Tok::Amp {
            return Ok(first);
        }
        let mut parts = vec![first];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(Formula::And(parts))
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::LBrack => self.intervention(),
            Tok::Word(_) => {
                let var = self.ident()?;
                self.expect(Tok::Eq)?;
                let value = self.value()?;
                Ok(Formula::event(var, value))
            }
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn intervention(&mut self) -> Result<Formula, FormulaError> {
        if self.in_do {
            return Err(FormulaError::NestedIntervention {
                position: Some(self.pos()),
            });
        }
        self.expect(Tok::LBrack)?;
        let mut assignments = Vec::new();
        loop {
            let var = self.ident()?;
            self.expect(Tok::Arrow)?;
            let value = self.value()?;
            assignments.push((var, value));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    break;
                }
                other => return Err(self.error(format!("expected `,` or `]`, found {}", other.describe()))),
            }
        }
        let set = InterventionSet::new(assignments)?;
        self.expect(Tok::LParen)?;
        self.in_do = true;
        let body = self.formula();
        self.in_do = false;
        let body = body?;
        self.expect(Tok::RParen)?;
        Ok(Formula::intervene(set, body))
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        match self.peek().clone() {
            Tok::Word(w) if w.starts_with(|c: char| c.is_alphabetic() || c == '_') => {
                self.bump();
                Ok(w)
            }
            other => Err(self.error(format!("expected a variable name, found {}", other.describe()))),
        }
    }

    fn value(&mut self) -> Result<String, FormulaError> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.bump();
                Ok(w)
            }
            other => Err(self.error(format!("expected a value, found {}", other.describe()))),
        }
    }
}
