//! Tokenizer for `.hll` source text.

use std::fmt;

use crate::span::SourceSpan;

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    At,
    Plus,
    Star,
    Arrow,
    FatArrow,
    Eq,
    Fn,
    Let,
    Case,
    Of,
    TypeKw,
    Inl,
    Inr,
    Pair,
    Fst,
    Snd,
    Lookup,
    Com,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Int(n) => return write!(f, "number `{n}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::At => "`@`",
            Tok::Plus => "`+`",
            Tok::Star => "`*`",
            Tok::Arrow => "`->`",
            Tok::FatArrow => "`=>`",
            Tok::Eq => "`=`",
            Tok::Fn => "`fn`",
            Tok::Let => "`let`",
            Tok::Case => "`case`",
            Tok::Of => "`of`",
            Tok::TypeKw => "`type`",
            Tok::Inl => "`Inl`",
            Tok::Inr => "`Inr`",
            Tok::Pair => "`Pair`",
            Tok::Fst => "`fst`",
            Tok::Snd => "`snd`",
            Tok::Lookup => "`lookup`",
            Tok::Com => "`com`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "fn" => Tok::Fn,
        "let" => Tok::Let,
        "case" => Tok::Case,
        "of" => Tok::Of,
        "type" => Tok::TypeKw,
        "Inl" => Tok::Inl,
        "Inr" => Tok::Inr,
        "Pair" => Tok::Pair,
        "fst" => Tok::Fst,
        "snd" => Tok::Snd,
        "lookup" => Tok::Lookup,
        "com" => Tok::Com,
        _ => return None,
    })
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
            {
                i += 1;
            }
            let word = &src[start..i];
            keyword(word).unwrap_or_else(|| Tok::Ident(word.to_owned()))
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse().map_err(|_| {
                ParseError::new(
                    SourceSpan::locate(src, start, i),
                    "a number that fits in memory",
                    "an oversized number",
                )
            })?;
            Tok::Int(n)
        } else {
            let two = bytes.get(i + 1).copied();
            let (tok, len) = match (c, two) {
                (b'-', Some(b'>')) => (Tok::Arrow, 2),
                (b'=', Some(b'>')) => (Tok::FatArrow, 2),
                (b'(', _) => (Tok::LParen, 1),
                (b')', _) => (Tok::RParen, 1),
                (b'[', _) => (Tok::LBracket, 1),
                (b']', _) => (Tok::RBracket, 1),
                (b',', _) => (Tok::Comma, 1),
                (b';', _) => (Tok::Semi, 1),
                (b':', _) => (Tok::Colon, 1),
                (b'.', _) => (Tok::Dot, 1),
                (b'@', _) => (Tok::At, 1),
                (b'+', _) => (Tok::Plus, 1),
                (b'*', _) => (Tok::Star, 1),
                (b'=', _) => (Tok::Eq, 1),
                _ => {
                    let ch = src[i..].chars().next().expect("in bounds");
                    let end = i + ch.len_utf8();
                    return Err(ParseError::new(
                        SourceSpan::locate(src, i, end),
                        "a token",
                        &format!("unexpected character `{ch}`"),
                    ));
                }
            };
            i += len;
            tok
        };
        out.push(Token {
            tok,
            span: SourceSpan::locate(src, start, i),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::locate(src, src.len(), src.len()),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_keywords_and_punctuation() {
        assert_eq!(
            toks("com[s][r_1] -> => # comment\n x$1"),
            vec![
                Tok::Com,
                Tok::LBracket,
                Tok::Ident("s".into()),
                Tok::RBracket,
                Tok::LBracket,
                Tok::Ident("r_1".into()),
                Tok::RBracket,
                Tok::Arrow,
                Tok::FatArrow,
                Tok::Ident("x$1".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn tracks_positions() {
        let ts = lex("a\n  b").unwrap();
        assert_eq!((ts[1].span.line, ts[1].span.column), (2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("a ≤ b").unwrap_err();
        assert_eq!(err.span.column, 3);
    }
}
