//! Tokenizer and recursive-descent parser for the `.dlx` axiom language.
//!
//! ```text
//! ontology := { axiom NEWLINE } ;
//! axiom    := IDENT "sub" expr ;
//! expr     := term { "or" term } ;
//! term     := factor { "and" factor } ;
//! factor   := IDENT | "(" expr ")"
//!           | "some" IDENT "." factor
//!           | "only" IDENT "." factor
//!           | ("min" | "exact") NAT IDENT [ "." factor ] ;
//! ```
//!
//! Keywords have Unicode aliases: `⊑` sub, `⊓`/`Π` and, `⊔`/`∨` or,
//! `∃` some, `∀` only, `≥` min, `=` exact. `#` starts a comment.

use std::fmt;

use serde::Serialize;

use crate::model::{Axiom, ConceptExpr, OntologyDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TokenKind {
    Ident,
    Sub,
    And,
    Or,
    Some,
    Only,
    Min,
    Exact,
    Dot,
    LParen,
    RParen,
    Nat,
    Newline,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident => "identifier",
            TokenKind::Sub => "`sub`",
            TokenKind::And => "`and`",
            TokenKind::Or => "`or`",
            TokenKind::Some => "`some`",
            TokenKind::Only => "`only`",
            TokenKind::Min => "`min`",
            TokenKind::Exact => "`exact`",
            TokenKind::Dot => "`.`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::Nat => "number",
            TokenKind::Newline => "end of line",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    /// 1-based, counted in characters.
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<TokenKind>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            let names: Vec<String> = self.expected.iter().map(|k| k.to_string()).collect();
            write!(f, " (expected {})", names.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "sub" => TokenKind::Sub,
        "and" => TokenKind::And,
        "or" => TokenKind::Or,
        "some" => TokenKind::Some,
        "only" => TokenKind::Only,
        "min" => TokenKind::Min,
        "exact" => TokenKind::Exact,
        _ => return None,
    })
}

fn symbol(c: char) -> Option<TokenKind> {
    Some(match c {
        '⊑' => TokenKind::Sub,
        '⊓' | 'Π' => TokenKind::And,
        '⊔' | '∨' => TokenKind::Or,
        '∃' => TokenKind::Some,
        '∀' => TokenKind::Only,
        '≥' => TokenKind::Min,
        '=' => TokenKind::Exact,
        '.' => TokenKind::Dot,
        '(' => TokenKind::LParen,
        ')' => TokenKind::RParen,
        _ => return None,
    })
}

/// Tokenizes one line (without its terminator). Comments are dropped.
fn tokenize_line(text: &str, line: usize, out: &mut Vec<Token>) -> Result<(), ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let lexeme: String = chars[start..i].iter().collect();
            let kind = keyword(&lexeme).unwrap_or(TokenKind::Ident);
            out.push(Token {
                kind,
                lexeme,
                line,
                col,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let lexeme: String = chars[start..i].iter().collect();
            if lexeme.parse::<u32>().is_err() {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("number `{lexeme}` is out of range"),
                    expected: vec![],
                });
            }
            out.push(Token {
                kind: TokenKind::Nat,
                lexeme,
                line,
                col,
            });
            continue;
        }
        match symbol(c) {
            Some(kind) => {
                out.push(Token {
                    kind,
                    lexeme: c.to_string(),
                    line,
                    col,
                });
                i += 1;
            }
            None => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                    expected: vec![],
                })
            }
        }
    }
    Ok(())
}

fn lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
}

/// Tokenizes a whole source text. Each non-empty line's tokens are followed
/// by a `Newline` token; blank and comment-only lines produce nothing.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (line_no, text) in lines(source) {
        let before = out.len();
        tokenize_line(text, line_no, &mut out)?;
        if out.len() > before {
            let col = text.chars().count() + 1;
            out.push(Token {
                kind: TokenKind::Newline,
                lexeme: "\n".to_string(),
                line: line_no,
                col,
            });
        }
    }
    Ok(out)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens
            .get(self.pos)
            .filter(|t| t.kind != TokenKind::Newline)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn error(&self, expected: &[TokenKind]) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError {
                line: tok.line,
                col: tok.col,
                message: format!("unexpected {} `{}`", tok.kind, tok.lexeme),
                expected: expected.to_vec(),
            },
            None => {
                // point at the last real token so the position exists in the source
                let last = self.tokens[..self.pos]
                    .iter()
                    .rev()
                    .find(|t| t.kind != TokenKind::Newline);
                let (line, col) = match last {
                    Some(t) => (t.line, t.col + t.lexeme.chars().count() - 1),
                    None => (self.tokens.first().map_or(1, |t| t.line), 1),
                };
                ParseError {
                    line,
                    col,
                    message: "unexpected end of line".to_string(),
                    expected: expected.to_vec(),
                }
            }
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        if self.peek_kind() == Some(kind) {
            Ok(self.bump())
        } else {
            Err(self.error(&[kind]))
        }
    }

    fn axiom(&mut self) -> Result<Axiom, ParseError> {
        let lhs = self.expect(TokenKind::Ident)?;
        self.expect(TokenKind::Sub)?;
        let rhs = self.expr()?;
        if self.peek().is_some() {
            return Err(self.error(&[TokenKind::And, TokenKind::Or, TokenKind::Newline]));
        }
        Ok(Axiom::new(lhs.lexeme.clone(), rhs, lhs.line))
    }

    fn expr(&mut self) -> Result<ConceptExpr, ParseError> {
        let mut terms = vec![self.term()?];
        while self.peek_kind() == Some(TokenKind::Or) {
            self.bump();
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ConceptExpr::Or(terms)
        })
    }

    fn term(&mut self) -> Result<ConceptExpr, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.peek_kind() == Some(TokenKind::And) {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ConceptExpr::And(factors)
        })
    }

    fn factor(&mut self) -> Result<ConceptExpr, ParseError> {
        const STARTS: [TokenKind; 6] = [
            TokenKind::Ident,
            TokenKind::LParen,
            TokenKind::Some,
            TokenKind::Only,
            TokenKind::Min,
            TokenKind::Exact,
        ];
        match self.peek_kind() {
            Some(TokenKind::Ident) => Ok(ConceptExpr::Atom(self.bump().lexeme.clone())),
            Some(TokenKind::LParen) => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            Some(TokenKind::Some) | Some(TokenKind::Only) => {
                let universal = self.bump().kind == TokenKind::Only;
                let role = self.expect(TokenKind::Ident)?.lexeme.clone();
                self.expect(TokenKind::Dot)?;
                let filler = Box::new(self.factor()?);
                Ok(if universal {
                    ConceptExpr::ForAll { role, filler }
                } else {
                    ConceptExpr::Exists { role, filler }
                })
            }
            Some(TokenKind::Min) | Some(TokenKind::Exact) => {
                let exact = self.bump().kind == TokenKind::Exact;
                let n = self
                    .expect(TokenKind::Nat)?
                    .lexeme
                    .parse::<u32>()
                    .expect("tokenizer validated the number");
                let role = self.expect(TokenKind::Ident)?.lexeme.clone();
                let filler = if self.peek_kind() == Some(TokenKind::Dot) {
                    self.bump();
                    Some(Box::new(self.factor()?))
                } else {
                    None
                };
                Ok(if exact {
                    ConceptExpr::ExactCard { n, role, filler }
                } else {
                    ConceptExpr::MinCard { n, role, filler }
                })
            }
            _ => Err(self.error(&STARTS)),
        }
    }
}

/// Parses the tokens of a single axiom. A trailing `Newline` is allowed.
pub fn parse_axiom(tokens: &[Token]) -> Result<Axiom, ParseError> {
    let end = tokens
        .iter()
        .position(|t| t.kind == TokenKind::Newline)
        .unwrap_or(tokens.len());
    let mut parser = Parser {
        tokens: &tokens[..end],
        pos: 0,
    };
    parser.axiom()
}

/// Parses a single axiom from source text, e.g. `A sub some r . B`.
pub fn parse_axiom_str(source: &str) -> Result<Axiom, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "empty input".to_string(),
            expected: vec![TokenKind::Ident],
        });
    }
    let newline = tokens
        .iter()
        .position(|t| t.kind == TokenKind::Newline)
        .unwrap_or(tokens.len());
    if let Some(extra) = tokens.get(newline + 1) {
        return Err(ParseError {
            line: extra.line,
            col: extra.col,
            message: "more than one axiom".to_string(),
            expected: vec![],
        });
    }
    parse_axiom(&tokens)
}

/// Parses a whole ontology file, one axiom per line. All errors are
/// collected (at most one per line); any error means no document.
pub fn parse_ontology(source: &str, name: &str) -> Result<OntologyDoc, Vec<ParseError>> {
    let mut axioms = Vec::new();
    let mut errors = Vec::new();
    for (line_no, text) in lines(source) {
        let mut tokens = Vec::new();
        if let Err(e) = tokenize_line(text, line_no, &mut tokens) {
            errors.push(e);
            continue;
        }
        if tokens.is_empty() {
            continue;
        }
        match parse_axiom(&tokens) {
            Ok(axiom) => axioms.push(axiom),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(OntologyDoc::new(name, axioms))
    } else {
        Err(errors)
    }
}
