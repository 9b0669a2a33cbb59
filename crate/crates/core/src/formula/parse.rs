//! Recursive-descent parser for the textual formula syntax (see docs/grammar.md).
//!
//! Binding strength, tightest first: `!`, unary temporal operators
//! (`F G AvF AvG`), binary temporal operators (`U R AvU AvR`, which do not
//! chain), `&`, `|`, `->` (right-associative).

use super::{Formula, Interval, Relation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Rel(Relation),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| Error::Parse { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |tok: Tok, len: usize, out: &mut Vec<Token>| {
            out.push(Token { tok, line: l0, column: c0 });
            len
        };
        let next = chars.get(i + 1).copied();
        let len = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => 1,
            '[' => push(Tok::LBracket, 1, &mut out),
            ']' => push(Tok::RBracket, 1, &mut out),
            '(' => push(Tok::LParen, 1, &mut out),
            ')' => push(Tok::RParen, 1, &mut out),
            ',' => push(Tok::Comma, 1, &mut out),
            '!' => push(Tok::Bang, 1, &mut out),
            '&' => push(Tok::Amp, 1, &mut out),
            '|' => push(Tok::Pipe, 1, &mut out),
            '<' if next == Some('=') => push(Tok::Rel(Relation::Le), 2, &mut out),
            '<' => push(Tok::Rel(Relation::Lt), 1, &mut out),
            '>' if next == Some('=') => push(Tok::Rel(Relation::Ge), 2, &mut out),
            '>' => push(Tok::Rel(Relation::Gt), 1, &mut out),
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut out),
            c if c.is_ascii_digit()
                || c == '.'
                || ((c == '-' || c == '+') && next.is_some_and(|n| n.is_ascii_digit() || n == '.')) =>
            {
                let mut j = i + 1;
                while j < chars.len() {
                    let d = chars[j];
                    let exp_sign = (d == '-' || d == '+') && matches!(chars[j - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(l0, c0, format!("malformed number `{s}`")))?;
                push(Tok::Number(v), j - i, &mut out)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '.') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Ident(s), j - i, &mut out)
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        };
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Unary {
    F,
    G,
    AvF,
    AvG,
}

#[derive(Clone, Copy, PartialEq)]
enum Binary {
    U,
    R,
    AvU,
    AvR,
}

fn unary_kw(s: &str) -> Option<Unary> {
    match s {
        "F" => Some(Unary::F),
        "G" => Some(Unary::G),
        "AvF" => Some(Unary::AvF),
        "AvG" => Some(Unary::AvG),
        _ => None,
    }
}

fn binary_kw(s: &str) -> Option<Binary> {
    match s {
        "U" => Some(Binary::U),
        "R" => Some(Binary::R),
        "AvU" => Some(Binary::AvU),
        "AvR" => Some(Binary::AvR),
        _ => None,
    }
}

fn is_keyword(s: &str) -> bool {
    unary_kw(s).is_some() || binary_kw(s).is_some() || matches!(s, "true" | "false" | "inf")
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at<T>(&self, t: &Token, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            self.error_at(&t, format!("expected {what}, found {}", describe(&t.tok)))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.peek().tok == Tok::Pipe {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.binary_temporal()?;
        while self.peek().tok == Tok::Amp {
            self.bump();
            f = Formula::and(f, self.binary_temporal()?);
        }
        Ok(f)
    }

    fn peek_binary(&self) -> Option<Binary> {
        match &self.peek().tok {
            Tok::Ident(s) => binary_kw(s),
            _ => None,
        }
    }

    fn binary_temporal(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        let Some(op) = self.peek_binary() else {
            return Ok(lhs);
        };
        self.bump();
        let iv = self.opt_interval()?;
        let rhs = self.unary()?;
        if self.peek_binary().is_some() {
            let t = self.peek().clone();
            return self.error_at(&t, "binary temporal operators do not chain; add parentheses");
        }
        Ok(match op {
            Binary::U => Formula::until(iv, lhs, rhs),
            Binary::R => Formula::release(iv, lhs, rhs),
            Binary::AvU => Formula::avg_until(iv, lhs, rhs),
            Binary::AvR => Formula::avg_release(iv, lhs, rhs),
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(s) if unary_kw(s).is_some() => {
                let op = unary_kw(s).unwrap();
                self.bump();
                let iv = self.opt_interval()?;
                let f = self.unary()?;
                Ok(match op {
                    Unary::F => Formula::eventually(iv, f),
                    Unary::G => Formula::always(iv, f),
                    Unary::AvF => Formula::avg_eventually(iv, f),
                    Unary::AvG => Formula::avg_always(iv, f),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let t = self.bump();
        match &t.tok {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => Ok(Formula::True),
            Tok::Ident(s) if s == "false" => Ok(Formula::False),
            Tok::Ident(s) if is_keyword(s) => self.error_at(&t, format!("unexpected keyword `{s}`")),
            Tok::Ident(s) => {
                if let Tok::Rel(rel) = self.peek().tok {
                    self.bump();
                    let n = self.bump();
                    match &n.tok {
                        Tok::Number(v) => Ok(Formula::atom(s.clone(), rel, *v)),
                        other => self.error_at(&n, format!("expected a threshold, found {}", describe(other))),
                    }
                } else {
                    Ok(Formula::prop(s.clone()))
                }
            }
            other => self.error_at(&t, format!("expected a formula, found {}", describe(other))),
        }
    }

    fn opt_interval(&mut self) -> Result<Interval> {
        if self.peek().tok != Tok::LBracket {
            return Ok(Interval::full());
        }
        let open = self.bump();
        let lo = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let t = self.bump();
        let hi = match &t.tok {
            Tok::Number(v) => {
                self.expect(Tok::RBracket, "`]`")?;
                Some(*v)
            }
            Tok::Ident(s) if s == "inf" => {
                let close = self.bump();
                if close.tok != Tok::RParen && close.tok != Tok::RBracket {
                    return self.error_at(&close, "expected `)` after `inf`");
                }
                None
            }
            other => return self.error_at(&t, format!("expected an interval end, found {}", describe(other))),
        };
        if lo < 0.0 || hi.is_some_and(|h| h < 0.0) {
            return self.error_at(&open, "interval endpoints must be nonnegative");
        }
        if hi.is_some_and(|h| h <= lo) {
            return self.error_at(&open, "interval must be non-singular with start < end");
        }
        Interval::new(lo, hi).or_else(|e| self.error_at(&open, e.to_string()))
    }

    fn number(&mut self) -> Result<f64> {
        let t = self.bump();
        match &t.tok {
            Tok::Number(v) => Ok(*v),
            other => self.error_at(&t, format!("expected a number, found {}", describe(other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(v) => format!("number {v}"),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Rel(_) => "a relation".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses formula text.
///
/// ```
/// use avstl::formula::{parse, Formula, Interval};
///
/// let f = parse("F[0,5] airbag | AvF[5,10] airbag").unwrap();
/// let airbag = Formula::prop("airbag");
/// assert_eq!(
///     f,
///     Formula::or(
///         Formula::eventually(Interval::bounded(0.0, 5.0).unwrap(), airbag.clone()),
///         Formula::avg_eventually(Interval::bounded(5.0, 10.0).unwrap(), airbag),
///     )
/// );
/// ```
pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return p.error_at(&t, format!("unexpected {} after formula", describe(&t.tok)));
    }
    Ok(f)
}
