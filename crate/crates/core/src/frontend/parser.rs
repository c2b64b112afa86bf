//! Recursive-descent parser for `.hll` programs.
//!
//! ```text
//! program := ("type" IDENT "=" data ";")* expr ";"?
//! expr    := "let" IDENT (":" type)? "=" expr ";" expr
//!          | "case" parties expr "of" "Inl" IDENT "=>" expr ";" "Inr" IDENT "=>" expr
//!          | atom+                                   (left-associative application)
//! atom    := "()" "@" parties | "(" "fn" IDENT ":" type "." expr ")" "@" parties
//!          | "Inl" atom | "Inr" atom | "Pair" atom atom
//!          | "(" expr ")" | "(" expr "," ")" | "(" expr ("," expr)+ ")"
//!          | "fst" parties | "snd" parties | "lookup" "[" INT "]" parties
//!          | "com" "[" IDENT "]" parties | IDENT
//! type    := data "@" parties | "(" type "->" type ")" "@" parties
//!          | "(" type "," ")" | "(" type ("," type)+ ")"
//! data    := prod ("+" prod)*
//! prod    := datom ("*" datom)*
//! datom   := "()" | IDENT | "(" data ")"
//! ```

use crate::ast::{Party, PartySet};
use crate::span::SourceSpan;

use super::lexer::{lex, Tok, Token};
use super::surface::{Alias, SData, SExpr, SExprKind, SType, SurfaceProgram};
use super::ParseError;

pub fn parse(src: &str) -> Result<SurfaceProgram, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let program = p.program()?;
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(self.span(), expected, &self.peek().to_string())
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.error(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(x)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn party(&mut self) -> PResult<Party> {
        let span = self.span();
        let name = self.ident()?;
        Party::new(name.as_str())
            .map_err(|_| ParseError::new(span, "a party name", &format!("`{name}`")))
    }

    /// `[p, q, ...]`
    fn parties(&mut self) -> PResult<PartySet> {
        let start = self.expect(Tok::LBracket)?;
        let mut ps = Vec::new();
        if *self.peek() != Tok::RBracket {
            ps.push(self.party()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                ps.push(self.party()?);
            }
        }
        let end = self.expect(Tok::RBracket)?;
        PartySet::new(ps)
            .map_err(|_| ParseError::new(start.join(end), "a nonempty party list", "`[]`"))
    }

    fn program(&mut self) -> PResult<SurfaceProgram> {
        let mut aliases: Vec<Alias> = Vec::new();
        while *self.peek() == Tok::TypeKw {
            let start = self.bump().span;
            let name_span = self.span();
            let name = self.ident()?;
            if aliases.iter().any(|a| a.name == name) {
                return Err(ParseError::new(
                    name_span,
                    "a fresh alias name",
                    &format!("duplicate alias `{name}`"),
                ));
            }
            self.expect(Tok::Eq)?;
            let data = self.data()?;
            let end = self.expect(Tok::Semi)?;
            aliases.push(Alias {
                name,
                data,
                span: start.join(end),
            });
        }
        let body = self.expr()?;
        if *self.peek() == Tok::Semi {
            self.bump();
        }
        if *self.peek() != Tok::Eof {
            return Err(self.error("end of input"));
        }
        Ok(SurfaceProgram { aliases, body })
    }

    fn expr(&mut self) -> PResult<SExpr> {
        match self.peek() {
            Tok::Let => self.let_expr(),
            Tok::Case => self.case_expr(),
            _ => self.app(),
        }
    }

    fn let_expr(&mut self) -> PResult<SExpr> {
        let start = self.bump().span;
        let var = self.ident()?;
        let annotation = if *self.peek() == Tok::Colon {
            self.bump();
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::Eq)?;
        let bound = self.expr()?;
        self.expect(Tok::Semi)?;
        let body = self.expr()?;
        let span = start.join(body.span);
        Ok(SExpr {
            kind: SExprKind::Let {
                var,
                annotation,
                bound: Box::new(bound),
                body: Box::new(body),
            },
            span,
        })
    }

    fn case_expr(&mut self) -> PResult<SExpr> {
        let start = self.bump().span;
        let guards = self.parties()?;
        let scrutinee = self.expr()?;
        self.expect(Tok::Of)?;
        self.expect(Tok::Inl)?;
        let left_var = self.ident()?;
        self.expect(Tok::FatArrow)?;
        let left = self.expr()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::Inr)?;
        let right_var = self.ident()?;
        self.expect(Tok::FatArrow)?;
        let right = self.expr()?;
        let span = start.join(right.span);
        Ok(SExpr {
            kind: SExprKind::Case {
                guards,
                scrutinee: Box::new(scrutinee),
                left_var,
                left: Box::new(left),
                right_var,
                right: Box::new(right),
            },
            span,
        })
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::LParen
                | Tok::Ident(_)
                | Tok::Inl
                | Tok::Inr
                | Tok::Pair
                | Tok::Fst
                | Tok::Snd
                | Tok::Lookup
                | Tok::Com
        )
    }

    fn app(&mut self) -> PResult<SExpr> {
        if !self.starts_atom() {
            return Err(self.error("an expression"));
        }
        let mut e = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            let span = e.span.join(arg.span);
            e = SExpr {
                kind: SExprKind::App(Box::new(e), Box::new(arg)),
                span,
            };
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<SExpr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                SExprKind::Var(x)
            }
            Tok::Inl | Tok::Inr => {
                let left = *self.peek() == Tok::Inl;
                self.bump();
                let inner = Box::new(self.atom()?);
                if left {
                    SExprKind::Inl(inner)
                } else {
                    SExprKind::Inr(inner)
                }
            }
            Tok::Pair => {
                self.bump();
                let a = self.atom()?;
                let b = self.atom()?;
                SExprKind::Pair(Box::new(a), Box::new(b))
            }
            Tok::Fst => {
                self.bump();
                SExprKind::Fst(self.parties()?)
            }
            Tok::Snd => {
                self.bump();
                SExprKind::Snd(self.parties()?)
            }
            Tok::Lookup => {
                self.bump();
                self.expect(Tok::LBracket)?;
                let Tok::Int(i) = *self.peek() else {
                    return Err(self.error("a tuple index"));
                };
                if i == 0 {
                    return Err(self.error("an index of at least 1"));
                }
                self.bump();
                self.expect(Tok::RBracket)?;
                SExprKind::Lookup(i, self.parties()?)
            }
            Tok::Com => {
                self.bump();
                self.expect(Tok::LBracket)?;
                let s = self.party()?;
                self.expect(Tok::RBracket)?;
                SExprKind::Com(s, self.parties()?)
            }
            Tok::LParen => return self.paren(),
            _ => return Err(self.error("an expression")),
        };
        Ok(SExpr {
            kind,
            span: start.join(self.prev_span()),
        })
    }

    fn paren(&mut self) -> PResult<SExpr> {
        let start = self.expect(Tok::LParen)?;
        if *self.peek() == Tok::RParen {
            self.bump();
            self.expect(Tok::At)?;
            let owners = self.parties()?;
            return Ok(SExpr {
                kind: SExprKind::Unit(owners),
                span: start.join(self.prev_span()),
            });
        }
        if *self.peek() == Tok::Fn {
            self.bump();
            let param = self.ident()?;
            self.expect(Tok::Colon)?;
            let param_type = self.ty()?;
            self.expect(Tok::Dot)?;
            let body = self.expr()?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::At)?;
            let owners = self.parties()?;
            return Ok(SExpr {
                kind: SExprKind::Lambda {
                    param,
                    param_type,
                    body: Box::new(body),
                    owners,
                },
                span: start.join(self.prev_span()),
            });
        }
        let first = self.expr()?;
        if *self.peek() == Tok::RParen {
            self.bump();
            // Parentheses only group; keep the inner node with a wider span.
            return Ok(SExpr {
                kind: first.kind,
                span: start.join(self.prev_span()),
            });
        }
        let mut elems = vec![first];
        while *self.peek() == Tok::Comma {
            self.bump();
            if *self.peek() == Tok::RParen {
                break;
            }
            elems.push(self.expr()?);
        }
        self.expect(Tok::RParen)?;
        Ok(SExpr {
            kind: SExprKind::Tuple(elems),
            span: start.join(self.prev_span()),
        })
    }

    fn ty(&mut self) -> PResult<SType> {
        let save = self.pos;
        if let Ok(d) = self.data() {
            if *self.peek() == Tok::At {
                self.bump();
                return Ok(SType::Data(d, self.parties()?));
            }
        }
        self.pos = save;
        if *self.peek() != Tok::LParen {
            // Re-run the data parser for its error message.
            self.data()?;
            return Err(self.error("`@`"));
        }
        self.bump();
        let first = self.ty()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                let ret = self.ty()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::At)?;
                let owners = self.parties()?;
                Ok(SType::Fun(Box::new(first), Box::new(ret), owners))
            }
            Tok::Comma => {
                let mut elems = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    if *self.peek() == Tok::RParen {
                        break;
                    }
                    elems.push(self.ty()?);
                }
                self.expect(Tok::RParen)?;
                Ok(SType::Tuple(elems))
            }
            _ => Err(self.error("`->` or `,`")),
        }
    }

    fn data(&mut self) -> PResult<SData> {
        let mut d = self.prod()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.prod()?;
            d = SData::Sum(Box::new(d), Box::new(r));
        }
        Ok(d)
    }

    fn prod(&mut self) -> PResult<SData> {
        let mut d = self.datom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let r = self.datom()?;
            d = SData::Prod(Box::new(d), Box::new(r));
        }
        Ok(d)
    }

    fn datom(&mut self) -> PResult<SData> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(SData::Named(name, span))
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(SData::Unit);
                }
                let d = self.data()?;
                self.expect(Tok::RParen)?;
                Ok(d)
            }
            _ => Err(self.error("a data type")),
        }
    }
}
