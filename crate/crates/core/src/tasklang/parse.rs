use super::Formula;
use crate::error::{Error, Result};
use crate::gridworld::Color;

/// Parses a task expression such as `"(!g & !b) U r"`.
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        len: text.len(),
    };
    let f = p.until()?;
    p.skip_ws();
    if let Some(&(at, c)) = p.chars.get(p.pos) {
        return Err(Error::Syntax {
            pos: at,
            msg: format!("unexpected `{c}` after complete expression"),
        });
    }
    Ok(f)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self
            .chars
            .get(self.pos)
            .is_some_and(|(_, c)| c.is_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(i, _)| i)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.peek() == Some('U') {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some('F') => {
                self.pos += 1;
                Ok(Formula::eventually(self.unary()?))
            }
            Some('G') => {
                self.pos += 1;
                Ok(Formula::always(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let at = {
            self.skip_ws();
            self.offset()
        };
        match self.peek() {
            None => Err(Error::Syntax {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
            Some('(') => {
                self.pos += 1;
                let f = self.until()?;
                if self.peek() != Some(')') {
                    return Err(Error::Syntax {
                        pos: self.offset(),
                        msg: "expected `)`".into(),
                    });
                }
                self.pos += 1;
                Ok(f)
            }
            Some(c) if c.is_ascii_alphabetic() => match Color::from_letter(c) {
                Some(color) => {
                    self.pos += 1;
                    Ok(Formula::Prop(color))
                }
                None => Err(Error::Syntax {
                    pos: at,
                    msg: format!("unknown atom `{c}` (expected r, g or b)"),
                }),
            },
            Some(c) => Err(Error::Syntax {
                pos: at,
                msg: format!("unexpected `{c}`"),
            }),
        }
    }
}
