use std::sync::Arc;

use crate::model::SourceSpan;

use super::ParseDiagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// `[A-Za-z0-9_]+`: identifiers, keywords, numerals and state ids.
    Word(String),
    SymLit(char),
    StrLit(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semi,
    Equals,
    Less,
    Plus,
    Assign,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::SymLit(c) => format!("symbol literal {}", crate::value::quote_sym(*c)),
            Tok::StrLit(s) => format!("string literal {}", crate::value::quote_str(s)),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Less => "`<`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits `text` into tokens. `#` starts a comment running to end of line.
/// Shared by the cinnamon and while-program grammars.
pub(crate) fn tokenize(text: &str, file: &Arc<str>) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column, length| SourceSpan {
        file: file.clone(),
        line,
        column,
        length,
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (i, col);
        let tok = if c.is_ascii_alphanumeric() || c == '_' {
            let mut w = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                w.push(chars[i]);
                i += 1;
            }
            Tok::Word(w)
        } else if c == '\'' {
            i += 1;
            let sym = match (chars.get(i), chars.get(i + 1)) {
                (Some('\\'), Some(&e @ ('\'' | '\\'))) => {
                    i += 2;
                    Some(e)
                }
                (Some(&s), _) if s != '\'' && s != '\n' => {
                    i += 1;
                    Some(s)
                }
                _ => None,
            };
            match (sym, chars.get(i)) {
                (Some(s), Some('\'')) => {
                    i += 1;
                    Tok::SymLit(s)
                }
                _ => {
                    return Err(ParseDiagnostic::error(
                        span(line, start.1, 1),
                        "syntax",
                        "malformed symbol literal",
                    ))
                }
            }
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some('\n') | None => {
                        return Err(ParseDiagnostic::error(
                            span(line, start.1, 1),
                            "syntax",
                            "unterminated string literal",
                        ))
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            Tok::StrLit(s)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                (':', Some('=')) => (Tok::Assign, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                (';', _) => (Tok::Semi, 1),
                ('=', _) => (Tok::Equals, 1),
                ('<', _) => (Tok::Less, 1),
                ('+', _) => (Tok::Plus, 1),
                _ => {
                    return Err(ParseDiagnostic::error(
                        span(line, col, 1),
                        "syntax",
                        format!("unexpected character `{c}`"),
                    ))
                }
            };
            i += len;
            tok
        };
        let length = i - start.0;
        col = start.1 + length;
        tokens.push(Token {
            tok,
            span: span(line, start.1, length),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: span(line, col, 0),
    });
    Ok(tokens)
}
