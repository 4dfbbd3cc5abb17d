use std::fmt;
use std::sync::Arc;

use crate::dsl::lexer::{tokenize, Tok, Token};
use crate::dsl::ParseDiagnostic;

/// Index `i` of variable `x_i`; `x0` is the output.
pub type WVar = u32;

/// Kozen-style while-programs over the naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WhileProgram {
    /// `x := 0`
    AssignZero(WVar),
    /// `x := y + 1`
    AssignSucc(WVar, WVar),
    /// `x := y`
    AssignCopy(WVar, WVar),
    Seq(Box<WhileProgram>, Box<WhileProgram>),
    /// `if x < y then p else q`
    If(WVar, WVar, Box<WhileProgram>, Box<WhileProgram>),
    /// `for y do p`, running `p` as many times as `y` held on entry.
    For(WVar, Box<WhileProgram>),
    /// `while x < y do p`
    While(WVar, WVar, Box<WhileProgram>),
}

impl WhileProgram {
    pub fn seq(p: WhileProgram, q: WhileProgram) -> Self {
        WhileProgram::Seq(Box::new(p), Box::new(q))
    }

    pub fn if_less(x: WVar, y: WVar, p: WhileProgram, q: WhileProgram) -> Self {
        WhileProgram::If(x, y, Box::new(p), Box::new(q))
    }

    pub fn for_loop(y: WVar, p: WhileProgram) -> Self {
        WhileProgram::For(y, Box::new(p))
    }

    pub fn while_less(x: WVar, y: WVar, p: WhileProgram) -> Self {
        WhileProgram::While(x, y, Box::new(p))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use WhileProgram::*;
        match self {
            AssignZero(_) | AssignSucc(..) | AssignCopy(..) => 1,
            Seq(p, q) | If(_, _, p, q) => 1 + p.size() + q.size(),
            For(_, p) | While(_, _, p) => 1 + p.size(),
        }
    }

    /// Largest variable index mentioned, or 0 for none.
    pub fn max_var(&self) -> WVar {
        use WhileProgram::*;
        match self {
            AssignZero(x) => *x,
            AssignSucc(x, y) | AssignCopy(x, y) => (*x).max(*y),
            Seq(p, q) => p.max_var().max(q.max_var()),
            If(x, y, p, q) => (*x).max(*y).max(p.max_var()).max(q.max_var()),
            For(y, p) => (*y).max(p.max_var()),
            While(x, y, p) => (*x).max(*y).max(p.max_var()),
        }
    }
}

impl fmt::Display for WhileProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use WhileProgram::*;
        match self {
            AssignZero(x) => write!(f, "x{x} := 0"),
            AssignSucc(x, y) => write!(f, "x{x} := x{y} + 1"),
            AssignCopy(x, y) => write!(f, "x{x} := x{y}"),
            Seq(p, q) => write!(f, "{{ {p} ; {q} }}"),
            If(x, y, p, q) => write!(f, "if x{x} < x{y} then {p} else {q}"),
            For(y, p) => write!(f, "for x{y} do {p}"),
            While(x, y, p) => write!(f, "while x{x} < x{y} do {p}"),
        }
    }
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

    fn error(&self, expected: &str) -> ParseDiagnostic {
        let t = self.peek();
        ParseDiagnostic::error(
            t.span.clone(),
            "syntax",
            format!("expected {expected}, found {}", t.tok.describe()),
        )
    }

    fn punct(&mut self, tok: Tok) -> Result<(), ParseDiagnostic> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseDiagnostic> {
        match &self.peek().tok {
            Tok::Word(w) if w == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&format!("`{kw}`"))),
        }
    }

    fn var(&mut self) -> Result<WVar, ParseDiagnostic> {
        if let Tok::Word(w) = &self.peek().tok {
            if let Some(n) = w.strip_prefix('x') {
                let digits_ok = !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit());
                if let (true, Ok(i)) = (digits_ok, n.parse::<WVar>()) {
                    self.bump();
                    return Ok(i);
                }
            }
        }
        Err(self.error("a variable `x<n>`"))
    }

    fn prog(&mut self) -> Result<WhileProgram, ParseDiagnostic> {
        match self.peek().tok.clone() {
            Tok::LBrace => {
                self.bump();
                let p = self.prog()?;
                self.punct(Tok::Semi)?;
                let q = self.prog()?;
                self.punct(Tok::RBrace)?;
                Ok(WhileProgram::seq(p, q))
            }
            Tok::Word(w) if w == "if" => {
                self.bump();
                let x = self.var()?;
                self.punct(Tok::Less)?;
                let y = self.var()?;
                self.keyword("then")?;
                let p = self.prog()?;
                self.keyword("else")?;
                let q = self.prog()?;
                Ok(WhileProgram::if_less(x, y, p, q))
            }
            Tok::Word(w) if w == "for" => {
                self.bump();
                let y = self.var()?;
                self.keyword("do")?;
                Ok(WhileProgram::for_loop(y, self.prog()?))
            }
            Tok::Word(w) if w == "while" => {
                self.bump();
                let x = self.var()?;
                self.punct(Tok::Less)?;
                let y = self.var()?;
                self.keyword("do")?;
                Ok(WhileProgram::while_less(x, y, self.prog()?))
            }
            _ => {
                let x = self.var()?;
                self.punct(Tok::Assign)?;
                if matches!(&self.peek().tok, Tok::Word(w) if w == "0") {
                    self.bump();
                    return Ok(WhileProgram::AssignZero(x));
                }
                let y = self.var()?;
                if self.peek().tok == Tok::Plus {
                    self.bump();
                    self.keyword("1")?;
                    Ok(WhileProgram::AssignSucc(x, y))
                } else {
                    Ok(WhileProgram::AssignCopy(x, y))
                }
            }
        }
    }
}

/// Parses one while-program. `#` comments are allowed.
pub fn parse_while(text: &str) -> Result<WhileProgram, ParseDiagnostic> {
    parse_while_named(text, "<input>")
}

pub fn parse_while_named(text: &str, file: &str) -> Result<WhileProgram, ParseDiagnostic> {
    let file: Arc<str> = file.into();
    let toks = tokenize(text, &file)?;
    let mut p = Parser { toks, pos: 0 };
    let prog = p.prog()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("end of input"));
    }
    Ok(prog)
}
