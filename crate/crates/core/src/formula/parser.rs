//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence, loosest first: quantifiers (scope extends as far right as
//! possible), `->` (right associative), `|`, `&`, `!`.

use thiserror::Error;

use super::ast::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: expected {expected}, found {found}")]
pub struct SyntaxError {
    /// Character offset into the input.
    pub position: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Bang,
    Amp,
    Pipe,
    Arrow,
    LeftArrow,
    Equals,
    Less,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("{s:?}"),
            Tok::Int(i) => format!("{i}"),
            Tok::End => "end of input".to_string(),
            other => format!("{:?}", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Arrow => "->",
            Tok::LeftArrow => "<-",
            Tok::Equals => "=",
            Tok::Less => "<",
            _ => "",
        }
    }
}

const KEYWORDS: [&str; 5] = ["ifp", "E2log", "A2log", "logn", "BIT"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let value = digits.parse().map_err(|_| SyntaxError {
                position: start,
                expected: "an integer that fits in a machine word".into(),
                found: digits.clone(),
            })?;
            out.push((Tok::Int(value), start));
            continue;
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                ('-', Some('>')) => {
                    i += 1;
                    Tok::Arrow
                }
                ('<', Some('-')) => {
                    i += 1;
                    Tok::LeftArrow
                }
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                ('[', _) => Tok::LBracket,
                (']', _) => Tok::RBracket,
                (',', _) => Tok::Comma,
                ('.', _) => Tok::Dot,
                (':', _) => Tok::Colon,
                ('!', _) => Tok::Bang,
                ('&', _) => Tok::Amp,
                ('|', _) => Tok::Pipe,
                ('=', _) => Tok::Equals,
                ('<', _) => Tok::Less,
                _ => {
                    return Err(SyntaxError {
                        position: start,
                        expected: "a formula token".into(),
                        found: format!("{c:?}"),
                    })
                }
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

fn is_element_var(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase()) && !KEYWORDS.contains(&s)
}

fn is_relation_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase()) && !KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Relation variables bound by enclosing binders.
    relvar_scope: Vec<String>,
}

/// Parses a formula. Atoms whose name is bound by an enclosing `ifp` or
/// log-quantifier become [`Formula::RelVar`]; all others are [`Formula::Rel`].
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        relvar_scope: Vec::new(),
    };
    let f = p.formula()?;
    p.expect(Tok::End, "end of input")?;
    Ok(f)
}

/// Parses a comma-separated term list such as `x,0,logn`.
pub fn parse_terms(text: &str) -> Result<Vec<Term>, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        relvar_scope: Vec::new(),
    };
    let terms = p.term_list()?;
    p.expect(Tok::End, "end of input")?;
    Ok(terms)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let (tok, position) = &self.toks[self.pos];
        SyntaxError {
            position: *position,
            expected: expected.to_string(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if let Some(f) = self.try_quantifier()? {
            return Ok(f);
        }
        self.primary()
    }

    /// `Ex.`, `E x.`, `Ax.`, `E2log[k] X:a.`, `A2log[k] X:a.`
    fn try_quantifier(&mut self) -> Result<Option<Formula>, SyntaxError> {
        let Tok::Ident(word) = self.peek().clone() else {
            return Ok(None);
        };
        if word == "E2log" || word == "A2log" {
            self.bump();
            self.expect(Tok::LBracket, "\"[\"")?;
            let k = self.positive_int("a positive exponent")?;
            self.expect(Tok::RBracket, "\"]\"")?;
            let var = match self.peek().clone() {
                Tok::Ident(v) if is_relation_name(&v) => {
                    self.bump();
                    v
                }
                _ => return Err(self.error("a relation variable")),
            };
            self.expect(Tok::Colon, "\":\"")?;
            let arity = self.positive_int("a positive arity")?;
            self.expect(Tok::Dot, "\".\"")?;
            self.relvar_scope.push(var.clone());
            let body = self.formula();
            self.relvar_scope.pop();
            let body = Box::new(body?);
            let k = u32::try_from(k).map_err(|_| self.error("a smaller exponent"))?;
            return Ok(Some(if word == "E2log" {
                Formula::ExistsLog {
                    k,
                    var,
                    arity,
                    body,
                }
            } else {
                Formula::ForallLog {
                    k,
                    var,
                    arity,
                    body,
                }
            }));
        }
        let existential = match word.chars().next() {
            Some('E') => true,
            Some('A') => false,
            _ => return Ok(None),
        };
        let rest = &word[1..];
        let var = if !rest.is_empty() {
            if !is_element_var(rest) || *self.peek_at(1) != Tok::Dot {
                return Ok(None);
            }
            self.bump();
            rest.to_string()
        } else {
            match (self.peek_at(1), self.peek_at(2)) {
                (Tok::Ident(v), Tok::Dot) if is_element_var(v) => {
                    let v = v.clone();
                    self.bump();
                    self.bump();
                    v
                }
                _ => return Ok(None),
            }
        };
        self.expect(Tok::Dot, "\".\"")?;
        let body = self.formula()?;
        Ok(Some(if existential {
            Formula::exists(var, body)
        } else {
            Formula::forall(var, body)
        }))
    }

    fn positive_int(&mut self, what: &str) -> Result<usize, SyntaxError> {
        match *self.peek() {
            Tok::Int(i) if i > 0 => {
                self.bump();
                Ok(i)
            }
            _ => Err(self.error(what)),
        }
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "\")\"")?;
                Ok(f)
            }
            Tok::Ident(w) if w == "ifp" => self.ifp(),
            Tok::Ident(w) if w == "BIT" => {
                self.bump();
                self.expect(Tok::LParen, "\"(\"")?;
                let a = self.term()?;
                self.expect(Tok::Comma, "\",\"")?;
                let b = self.term()?;
                self.expect(Tok::RParen, "\")\"")?;
                Ok(Formula::Bit(a, b))
            }
            Tok::Ident(name) if is_relation_name(&name) => {
                self.bump();
                self.expect(Tok::LParen, "\"(\"")?;
                let args = self.term_list()?;
                self.expect(Tok::RParen, "\")\"")?;
                if self.relvar_scope.contains(&name) {
                    Ok(Formula::RelVar { name, args })
                } else {
                    Ok(Formula::Rel { name, args })
                }
            }
            _ => {
                let a = self.term().map_err(|_| self.error("a formula"))?;
                let op = match self.peek() {
                    Tok::Equals | Tok::Less => self.bump(),
                    _ => return Err(self.error("\"=\" or \"<\"")),
                };
                let b = self.term()?;
                if op == Tok::Equals {
                    Ok(Formula::Eq(a, b))
                } else {
                    Ok(Formula::Less(a, b))
                }
            }
        }
    }

    fn ifp(&mut self) -> Result<Formula, SyntaxError> {
        self.bump();
        self.expect(Tok::LBracket, "\"[\"")?;
        let relvar = match self.peek().clone() {
            Tok::Ident(v) if is_relation_name(&v) => {
                self.bump();
                v
            }
            _ => return Err(self.error("a relation variable")),
        };
        self.expect(Tok::LParen, "\"(\"")?;
        let mut vars = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(v) if is_element_var(&v) => {
                    self.bump();
                    vars.push(v);
                }
                _ => return Err(self.error("an element variable")),
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen, "\")\"")?;
        self.expect(Tok::LeftArrow, "\"<-\"")?;
        self.relvar_scope.push(relvar.clone());
        let body = self.formula();
        self.relvar_scope.pop();
        let body = Box::new(body?);
        self.expect(Tok::RBracket, "\"]\"")?;
        self.expect(Tok::LParen, "\"(\"")?;
        let args = self.term_list()?;
        self.expect(Tok::RParen, "\")\"")?;
        Ok(Formula::Ifp {
            vars,
            relvar,
            body,
            args,
        })
    }

    fn term_list(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut terms = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Lit(i))
            }
            Tok::Ident(w) if w == "logn" => {
                self.bump();
                Ok(Term::LogN)
            }
            Tok::Ident(v) if is_element_var(&v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            _ => Err(self.error("a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn parses_first_order_quantifier() {
        assert_eq!(
            parse_formula("Ex. x=x").unwrap(),
            Formula::exists("x", Formula::eq(v("x"), v("x")))
        );
        assert_eq!(
            parse_formula("E x . x=x").unwrap(),
            parse_formula("Ex. x=x").unwrap()
        );
    }

    #[test]
    fn parses_log_quantifier() {
        let f = parse_formula("E2log[1] X:1 . Ey. X(y)").unwrap();
        assert_eq!(
            f,
            Formula::ExistsLog {
                k: 1,
                var: "X".into(),
                arity: 1,
                body: Box::new(Formula::exists("y", Formula::relvar("X", [v("y")]))),
            }
        );
    }

    #[test]
    fn parses_ifp() {
        let f = parse_formula("ifp[Y(u,v) <- E(u,v) | Ez.(E(u,z) & Y(z,v))](x,y)").unwrap();
        let Formula::Ifp {
            vars,
            relvar,
            body,
            args,
        } = f
        else {
            panic!("expected ifp");
        };
        assert_eq!(vars, ["u", "v"]);
        assert_eq!(relvar, "Y");
        assert_eq!(args, [v("x"), v("y")]);
        assert_eq!(
            *body,
            Formula::or(
                Formula::rel("E", [v("u"), v("v")]),
                Formula::exists(
                    "z",
                    Formula::and(
                        Formula::rel("E", [v("u"), v("z")]),
                        Formula::relvar("Y", [v("z"), v("v")])
                    )
                )
            )
        );
    }

    #[test]
    fn relation_named_e_is_not_a_quantifier() {
        assert_eq!(
            parse_formula("E(x,y)").unwrap(),
            Formula::rel("E", [v("x"), v("y")])
        );
        assert_eq!(
            parse_formula("Ax(x)").unwrap(),
            Formula::rel("Ax", [v("x")])
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let a = || Formula::rel("P", [v("x")]);
        let b = || Formula::rel("Q", [v("x")]);
        let c = || Formula::rel("R", [v("x")]);
        assert_eq!(
            parse_formula("P(x) | Q(x) & R(x)").unwrap(),
            Formula::or(a(), Formula::and(b(), c()))
        );
        assert_eq!(
            parse_formula("P(x) -> Q(x) -> R(x)").unwrap(),
            Formula::implies(a(), Formula::implies(b(), c()))
        );
        assert_eq!(
            parse_formula("!P(x) & Q(x)").unwrap(),
            Formula::and(Formula::not(a()), b())
        );
        // quantifier scope runs to the right
        assert_eq!(
            parse_formula("P(x) & Ex. Q(x) | R(x)").unwrap(),
            Formula::and(a(), Formula::exists("x", Formula::or(b(), c())))
        );
    }

    #[test]
    fn terms_and_builtins() {
        assert_eq!(
            parse_formula("x<logn & BIT(y,0)").unwrap(),
            Formula::and(
                Formula::Less(v("x"), Term::LogN),
                Formula::Bit(v("y"), Term::Lit(0))
            )
        );
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_formula("Ex. x=").unwrap_err();
        assert_eq!(e.position, 6);
        let e = parse_formula("E2log[0] X:1. X(x)").unwrap_err();
        assert_eq!(e.position, 6);
        let e = parse_formula("P(x) P(y)").unwrap_err();
        assert_eq!(e.position, 5);
        assert!(parse_formula("x ? y").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn print_parse_identity_on_examples() {
        for text in [
            "Ex. x=x",
            "E2log[1] X:1. Ey. X(y)",
            "ifp[Y(u,v) <- E(u,v) | Ez. (E(u,z) & Y(z,v))](x,y)",
            "!(E2log[1] X:1. Ey. X(y))",
            "(P(x) -> Q(x)) -> R(x)",
            "P(x) & (Q(x) & R(x))",
            "A2log[2] Z:2. Ax. Ay. (Z(x,y) -> x<y)",
        ] {
            let f = parse_formula(text).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_formula(&printed).unwrap(), f, "{printed}");
        }
    }
}
