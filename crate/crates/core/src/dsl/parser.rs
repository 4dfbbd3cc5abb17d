use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;

use crate::model::{
    arrow_id, Actual, Arrow, Cinnamon, LabelItem, Macro, NodeRef, Operand, Primitive, SourceSpan, Subnet, VarName,
};
use crate::value::{Mode, Value};

use super::lexer::{tokenize, Tok, Token};
use super::ParseDiagnostic;

const KEYWORDS: &[&str] = &[
    "cinnamon", "mode", "nat", "str", "macro", "main", "subnet", "vars", "init", "call", "clear", "copy", "inc", "if",
    "nonEq", "eq", "empty", "sep", "cons", "FINISH", "RETURN",
];

pub(crate) fn is_keyword(w: &str) -> bool {
    KEYWORDS.contains(&w)
}

/// Syntax errors abort; name-resolution errors are collected and parsing
/// continues.
struct Abort;

type PResult<T> = Result<T, Abort>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    mode: Mode,
    macro_names: HashMap<String, usize>,
}

struct PendingCall {
    subnet: String,
    span: SourceSpan,
}

pub fn parse_named(text: &str, file: &str) -> Result<Cinnamon, Vec<ParseDiagnostic>> {
    let file: Arc<str> = file.into();
    let tokens = tokenize(text, &file).map_err(|d| vec![d])?;
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        mode: Mode::Nat,
        macro_names: HashMap::new(),
    };
    match p.file() {
        Ok(c) if p.diags.is_empty() => Ok(c),
        _ => {
            debug_assert!(!p.diags.is_empty());
            Err(p.diags)
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.diags.push(ParseDiagnostic::error(
            span,
            "syntax",
            format!("expected {expected}, found {found}"),
        ));
        Err(Abort)
    }

    fn error(&mut self, span: SourceSpan, rule: &'static str, message: impl Into<String>) {
        self.diags.push(ParseDiagnostic::error(span, rule, message));
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn keyword(&mut self, w: &str) -> PResult<SourceSpan> {
        if self.is_word(w) {
            Ok(self.bump().span)
        } else {
            self.fail(&format!("`{w}`"))
        }
    }

    fn punct(&mut self, t: Tok) -> PResult<SourceSpan> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            let d = t.describe();
            self.fail(&d)
        }
    }

    /// A non-keyword word that is not purely numeric.
    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Word(w) if !is_keyword(&w) && !w.chars().all(|c| c.is_ascii_digit()) => Ok((w, self.bump().span)),
            _ => self.fail(what),
        }
    }

    fn state_id(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Word(w) if !is_keyword(&w) => Ok((w, self.bump().span)),
            _ => self.fail("state name"),
        }
    }

    fn node_ref(&mut self) -> PResult<NodeRef> {
        if self.is_word("FINISH") {
            self.bump();
            Ok(NodeRef::Finish)
        } else if self.is_word("RETURN") {
            self.bump();
            Ok(NodeRef::Return)
        } else {
            Ok(NodeRef::State(self.state_id()?.0))
        }
    }

    fn params(&mut self, close: Tok) -> PResult<Vec<(String, SourceSpan)>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        loop {
            out.push(self.ident("parameter name")?);
            if *self.peek() != Tok::Comma {
                return Ok(out);
            }
            self.bump();
        }
    }

    fn file(&mut self) -> PResult<Cinnamon> {
        self.keyword("cinnamon")?;
        let (name, _) = self.ident("cinnamon name")?;
        self.keyword("mode")?;
        self.mode = if self.is_word("nat") {
            Mode::Nat
        } else if self.is_word("str") {
            Mode::Str
        } else {
            return self.fail("`nat` or `str`");
        };
        self.bump();

        let mut macros = Vec::new();
        let mut macro_uses = Vec::new();
        while self.is_word("macro") {
            let m = self.macro_def(&mut macro_uses)?;
            if self.macro_names.contains_key(&m.name) {
                self.error(
                    m.span.clone().unwrap(),
                    "duplicate-decl",
                    format!("macro `{}` is already defined", m.name),
                );
            }
            self.macro_names.insert(m.name.clone(), m.params.len());
            macros.push(m);
        }
        for (name, span) in macro_uses {
            if !self.macro_names.contains_key(&name) {
                self.error(span, "unknown-macro", format!("unknown macro `{name}`"));
            }
        }

        let mut subnets: Vec<Subnet> = Vec::new();
        let mut main: Option<(String, SourceSpan)> = None;
        let mut calls = Vec::new();
        loop {
            let is_main = self.is_word("main");
            if !is_main && !self.is_word("subnet") {
                break;
            }
            let start = self.span();
            if is_main {
                self.bump();
            }
            let s = self.subnet(&mut calls)?;
            if subnets.iter().any(|o| o.name == s.name) {
                self.error(
                    start.clone(),
                    "duplicate-decl",
                    format!("subnet `{}` is already defined", s.name),
                );
            }
            if is_main {
                if let Some((m, _)) = &main {
                    self.error(
                        start.clone(),
                        "main-count",
                        format!("`{}` is marked main but `{m}` already is", s.name),
                    );
                } else {
                    main = Some((s.name.clone(), start));
                }
            }
            subnets.push(s);
        }
        if *self.peek() != Tok::Eof || subnets.is_empty() {
            return self.fail("`subnet` or `main subnet`");
        }
        let Some((main, _)) = main else {
            let span = self.span();
            self.error(span, "main-count", "no subnet is marked main");
            return Err(Abort);
        };
        for call in calls {
            if !subnets.iter().any(|s| s.name == call.subnet) {
                self.error(
                    call.span,
                    "unknown-subnet",
                    format!("call of unknown subnet `{}`", call.subnet),
                );
            }
        }
        Ok(Cinnamon {
            name,
            mode: self.mode,
            macros,
            subnets,
            main,
        })
    }

    fn macro_def(&mut self, uses: &mut Vec<(String, SourceSpan)>) -> PResult<Macro> {
        let start = self.keyword("macro")?;
        let (name, _) = self.ident("macro name")?;
        self.punct(Tok::LParen)?;
        let params: Vec<String> = self.params(Tok::RParen)?.into_iter().map(|p| p.0).collect();
        self.punct(Tok::RParen)?;
        self.punct(Tok::Equals)?;
        let mut body = Vec::new();
        loop {
            body.push(self.item(None, uses, &mut Vec::new())?);
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        Ok(Macro {
            name,
            params,
            body,
            span: Some(start),
        })
    }

    fn subnet(&mut self, calls: &mut Vec<PendingCall>) -> PResult<Subnet> {
        let start = self.keyword("subnet")?;
        let (name, _) = self.ident("subnet name")?;
        self.punct(Tok::LParen)?;
        let formals = self.params(Tok::RParen)?;
        self.punct(Tok::RParen)?;
        self.punct(Tok::LBrace)?;
        let mut locals = Vec::new();
        if self.is_word("vars") {
            self.bump();
            locals = self.params(Tok::Eof)?;
        }
        let mut declared = HashSet::new();
        for (v, span) in formals.iter().chain(locals.iter()) {
            if !declared.insert(v.clone()) {
                self.error(
                    span.clone(),
                    "duplicate-decl",
                    format!("variable `{v}` is already declared in `{name}`"),
                );
            }
        }
        self.keyword("init")?;
        let init = self.node_ref()?;

        let mut arrows: Vec<Arrow> = Vec::new();
        let mut macro_uses = Vec::new();
        while *self.peek() != Tok::RBrace {
            let (source, span) = self.state_id()?;
            self.punct(Tok::Arrow)?;
            let target = self.node_ref()?;
            self.punct(Tok::Colon)?;
            let mut label = Vec::new();
            if self.at_item_start() {
                loop {
                    label.push(self.item(Some(&declared), &mut macro_uses, calls)?);
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
            }
            let end = &self.tokens[self.pos - 1].span;
            let span = SourceSpan {
                length: if end.line == span.line {
                    end.column + end.length - span.column
                } else {
                    span.length
                },
                ..span
            };
            let position = arrows.iter().filter(|a| a.source == source).count() + 1;
            arrows.push(Arrow {
                id: arrow_id(&source, position),
                source,
                target,
                label,
                span: Some(span),
            });
        }
        self.punct(Tok::RBrace)?;
        for (m, span) in macro_uses {
            if !self.macro_names.contains_key(&m) {
                self.error(span, "unknown-macro", format!("unknown macro `{m}`"));
            }
        }
        Ok(Subnet {
            name,
            formals: formals.into_iter().map(|p| p.0).collect(),
            locals: locals.into_iter().map(|p| p.0).collect(),
            init,
            arrows,
            span: Some(start),
        })
    }

    fn at_item_start(&self) -> bool {
        match self.peek() {
            Tok::Word(w) => match w.as_str() {
                "call" | "clear" | "copy" | "inc" | "if" | "sep" | "cons" => true,
                w => !is_keyword(w) && *self.peek_at(1) == Tok::LParen,
            },
            _ => false,
        }
    }

    /// `declared` is `None` inside macro bodies, where names are resolved
    /// only after substitution.
    fn item(
        &mut self,
        declared: Option<&HashSet<String>>,
        macro_uses: &mut Vec<(String, SourceSpan)>,
        calls: &mut Vec<PendingCall>,
    ) -> PResult<LabelItem> {
        let head_span = self.span();
        let Tok::Word(head) = self.peek().clone() else {
            return self.fail("primitive, call or macro use");
        };
        self.bump();
        let prim = match head.as_str() {
            "call" => {
                let (subnet, span) = self.ident("subnet name")?;
                let actuals = self.actuals(declared)?;
                calls.push(PendingCall {
                    subnet: subnet.clone(),
                    span,
                });
                return Ok(LabelItem::Call { subnet, actuals });
            }
            "clear" => {
                let [x] = self.var_args(declared)?;
                Primitive::Clear(x)
            }
            "copy" => {
                let [x, y] = self.var_args(declared)?;
                Primitive::Copy(x, y)
            }
            "inc" => {
                let [x] = self.var_args(declared)?;
                Primitive::Inc(x)
            }
            "sep" => {
                let [l, h, t] = self.var_args(declared)?;
                Primitive::Sep(l, h, t)
            }
            "cons" => {
                let [h, t, l] = self.var_args(declared)?;
                Primitive::Cons(h, t, l)
            }
            "if" => {
                if self.is_word("nonEq") {
                    self.bump();
                    let [x, y] = self.var_args(declared)?;
                    Primitive::IfNonEq(x, y)
                } else if self.is_word("empty") {
                    self.bump();
                    let [l] = self.var_args(declared)?;
                    Primitive::IfEmpty(l)
                } else if self.is_word("eq") {
                    self.bump();
                    self.punct(Tok::LParen)?;
                    let a = self.operand(declared)?;
                    self.punct(Tok::Comma)?;
                    let b = self.operand(declared)?;
                    self.punct(Tok::RParen)?;
                    Primitive::IfEq(a, b)
                } else {
                    return self.fail("`nonEq`, `eq` or `empty`");
                }
            }
            w if !is_keyword(w) => {
                let args = self.actuals(declared)?;
                match self.macro_names.get(w) {
                    Some(&n) if n != args.len() => self.error(
                        head_span.clone(),
                        "macro-arity",
                        format!("macro `{w}` takes {n} argument(s), {} given", args.len()),
                    ),
                    _ => macro_uses.push((w.to_string(), head_span)),
                }
                return Ok(LabelItem::Macro {
                    name: w.to_string(),
                    args,
                });
            }
            _ => {
                self.pos -= 1;
                return self.fail("primitive, call or macro use");
            }
        };
        if let Some(m) = prim.mode() {
            if m != self.mode {
                self.error(
                    head_span,
                    "mode-mismatch",
                    format!("`{}` is not available in a {}-mode cinnamon", prim.name(), self.mode),
                );
            }
        }
        Ok(LabelItem::Prim(prim))
    }

    fn var(&mut self, declared: Option<&HashSet<String>>) -> PResult<VarName> {
        let (v, span) = self.ident("variable name")?;
        if let Some(d) = declared {
            if !d.contains(&v) {
                self.error(span, "undeclared-var", format!("variable `{v}` is not declared"));
            }
        }
        Ok(v)
    }

    fn var_args<const N: usize>(&mut self, declared: Option<&HashSet<String>>) -> PResult<[VarName; N]> {
        self.punct(Tok::LParen)?;
        let mut vars = Vec::with_capacity(N);
        for i in 0..N {
            if i > 0 {
                self.punct(Tok::Comma)?;
            }
            vars.push(self.var(declared)?);
        }
        self.punct(Tok::RParen)?;
        Ok(vars.try_into().expect("exactly N operands"))
    }

    fn operand(&mut self, declared: Option<&HashSet<String>>) -> PResult<Operand> {
        if let Tok::SymLit(c) = *self.peek() {
            let span = self.bump().span;
            if self.mode != Mode::Str {
                self.error(span, "mode-mismatch", "symbol literal in a nat-mode cinnamon");
            }
            return Ok(Operand::Sym(c));
        }
        Ok(Operand::Var(self.var(declared)?))
    }

    fn actuals(&mut self, declared: Option<&HashSet<String>>) -> PResult<Vec<Actual>> {
        self.punct(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                out.push(self.actual(declared)?);
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.punct(Tok::RParen)?;
        Ok(out)
    }

    fn actual(&mut self, declared: Option<&HashSet<String>>) -> PResult<Actual> {
        let span = self.span();
        let value = match self.peek().clone() {
            Tok::Word(w) if w.chars().all(|c| c.is_ascii_digit()) => {
                self.bump();
                Value::Nat(w.parse::<BigUint>().expect("decimal digits"))
            }
            Tok::SymLit(c) => {
                self.bump();
                Value::Str(c.to_string())
            }
            Tok::StrLit(s) => {
                self.bump();
                Value::Str(s)
            }
            _ => return Ok(Actual::Var(self.var(declared)?)),
        };
        if value.mode() != self.mode {
            self.error(
                span,
                "mode-mismatch",
                format!("constant {value} in a {}-mode cinnamon", self.mode),
            );
        }
        Ok(Actual::Const(value))
    }
}
