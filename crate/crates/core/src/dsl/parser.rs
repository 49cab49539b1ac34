use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::error::DslError;
use super::lexer::{tokenize, Tok, Token};

const STATE_KEYWORDS: &[&str] = &["initial", "state", "and", "region", "trans"];

struct Parser {
    toks: Vec<Token>,
    at: usize,
    anon: u32,
}

impl Parser {
    fn new(src: &str) -> Result<Self, DslError> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
            anon: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> DslError {
        DslError::syntax(self.pos(), expected, &self.peek().describe())
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Pos, DslError> {
        let pos = self.pos();
        if self.eat_kw(kw) {
            Ok(pos)
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, DslError> {
        let pos = self.pos();
        if self.eat(&tok) {
            Ok(pos)
        } else {
            Err(self.error(&[&format!("`{}`", tok.symbol())]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.error(&[what])),
        }
    }

    /// `A` or `P::Q::A`.
    fn qualified(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        let (mut name, pos) = self.ident(what)?;
        while self.eat(&Tok::ColonColon) {
            let (part, _) = self.ident("name after `::`")?;
            name.push_str("::");
            name.push_str(&part);
        }
        Ok((name, pos))
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Semi | Tok::Comma) {
            self.bump();
        }
    }

    fn int(&mut self) -> Result<i64, DslError> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn literal(&mut self, allow_objects: bool) -> Result<Literal, DslError> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => Ok(Literal::Int(self.int()?)),
            Tok::Str(s) => {
                self.bump();
                Ok(Literal::Str(s))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Literal::Bool(s == "true"))
            }
            Tok::Ident(s) if allow_objects => {
                self.bump();
                Ok(Literal::Object(s))
            }
            _ => Err(self.error(&["literal"])),
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.anon += 1;
        format!("${prefix}{}", self.anon)
    }

    // -----------------------------------------------------------------------
    // Expressions
    // -----------------------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.expr_prec(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::EqEq | Tok::Assign => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Ident(s) if s == "and" => BinOp::And,
            Tok::Ident(s) if s == "or" => BinOp::Or,
            _ => return None,
        })
    }

    fn expr_prec(&mut self, min: u8) -> Result<Expr, DslError> {
        let mut lhs = if self.is_kw("not") {
            let pos = self.bump().pos;
            Expr::Not(Box::new(self.expr_prec(3)?), pos)
        } else {
            self.primary()?
        };
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min {
                break;
            }
            self.bump();
            let rhs = self.expr_prec(prec + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Lit(Literal::Int(n), pos))
            }
            Tok::Minus => {
                self.bump();
                match self.primary()? {
                    Expr::Lit(Literal::Int(n), _) => Ok(Expr::Lit(Literal::Int(-n), pos)),
                    e => Ok(Expr::Neg(Box::new(e), pos)),
                }
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Literal::Str(s), pos))
            }
            Tok::Hash => {
                self.bump();
                let key = self.link_key()?;
                Ok(Expr::Count(key, pos))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Lit(Literal::Bool(s == "true"), pos))
            }
            Tok::Ident(s) if s == "and" || s == "or" || s == "not" => {
                Err(self.error(&["expression"]))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Expr::Name(s, pos))
            }
            _ => Err(self.error(&["expression"])),
        }
    }

    /// `assoc` or `assoc.Class` (class possibly qualified).
    fn link_key(&mut self) -> Result<String, DslError> {
        let (mut key, _) = self.ident("link-set name")?;
        if self.eat(&Tok::Dot) {
            let (class, _) = self.qualified("class name")?;
            key.push('.');
            key.push_str(&class);
        }
        Ok(key)
    }

    // -----------------------------------------------------------------------
    // Class models
    // -----------------------------------------------------------------------

    fn class_items(
        &mut self,
        package: Option<&str>,
        model: &mut ClassModelAst,
        scopes: &mut Scopes,
    ) -> Result<(), DslError> {
        loop {
            self.skip_separators();
            let pos = self.pos();
            match self.peek() {
                Tok::Eof if package.is_none() => return Ok(()),
                Tok::RBrace if package.is_some() => return Ok(()),
                Tok::Ident(kw) => match kw.as_str() {
                    "package" => {
                        self.bump();
                        let (name, _) = self.ident("package name")?;
                        let full = qualify(package, &name);
                        // packages may be reopened
                        if !model.packages.iter().any(|p| p.name == full) {
                            model.packages.push(PackageDecl {
                                name: full.clone(),
                                pos,
                            });
                        }
                        self.expect(Tok::LBrace)?;
                        self.class_items(Some(&full), model, scopes)?;
                        self.expect(Tok::RBrace)?;
                    }
                    "abstract" | "class" => self.class_decl(package, model, scopes)?,
                    "assoc" => {
                        let a = self.assoc_decl()?;
                        model.associations.push(a);
                        scopes.assocs.push(package.map(str::to_string));
                    }
                    "gen" => {
                        self.bump();
                        let (sub, _) = self.qualified("subclass name")?;
                        self.expect(Tok::Lt)?;
                        let (sup, _) = self.qualified("superclass name")?;
                        model.generalizations.push(GenDecl { sub, sup, pos });
                        scopes.gens.push(package.map(str::to_string));
                    }
                    "constraint" => {
                        self.bump();
                        let (name, _) = self.ident("constraint name")?;
                        self.expect_kw("on")?;
                        let (class, _) = self.qualified("class name")?;
                        self.expect(Tok::Colon)?;
                        let expr = self.expr()?;
                        model.constraints.push(ConstraintDecl {
                            name,
                            class,
                            expr,
                            pos,
                        });
                        scopes.constraints.push(package.map(str::to_string));
                    }
                    _ => return Err(self.class_item_error(package)),
                },
                _ => return Err(self.class_item_error(package)),
            }
        }
    }

    fn class_item_error(&self, package: Option<&str>) -> DslError {
        let mut exp = vec!["`package`", "`abstract`", "`class`", "`assoc`", "`gen`", "`constraint`"];
        exp.push(if package.is_some() { "`}`" } else { "end of input" });
        self.error(&exp)
    }

    fn class_decl(
        &mut self,
        package: Option<&str>,
        model: &mut ClassModelAst,
        scopes: &mut Scopes,
    ) -> Result<(), DslError> {
        let pos = self.pos();
        let is_abstract = self.eat_kw("abstract");
        self.expect_kw("class")?;
        let (name, _) = self.ident("class name")?;
        let full = qualify(package, &name);
        if self.eat_kw("extends") {
            loop {
                let gpos = self.pos();
                let (sup, _) = self.qualified("superclass name")?;
                model.generalizations.push(GenDecl {
                    sub: full.clone(),
                    sup,
                    pos: gpos,
                });
                scopes.gens.push(package.map(str::to_string));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut attributes = Vec::new();
        let mut operations = Vec::new();
        self.expect(Tok::LBrace)?;
        loop {
            self.skip_separators();
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.is_kw("attr") {
                attributes.push(self.attr_decl()?);
            } else if self.is_kw("op") {
                operations.push(self.op_decl()?);
            } else {
                return Err(self.error(&["`attr`", "`op`", "`}`"]));
            }
        }
        model.classes.push(ClassDecl {
            name: full,
            package: package.map(str::to_string),
            is_abstract,
            attributes,
            operations,
            pos,
        });
        Ok(())
    }

    fn type_ref(&mut self) -> Result<TypeRef, DslError> {
        let (name, _) = self.qualified("type name")?;
        Ok(match name.as_str() {
            "int" => TypeRef::Int,
            "bool" => TypeRef::Bool,
            "string" => TypeRef::Str,
            _ => TypeRef::Class(name),
        })
    }

    fn attr_decl(&mut self) -> Result<AttrDecl, DslError> {
        let pos = self.expect_kw("attr")?;
        let (name, _) = self.ident("attribute name")?;
        self.expect(Tok::Colon)?;
        let ty = self.type_ref()?;
        let domain = if self.eat_kw("in") {
            if self.eat(&Tok::LBrace) {
                let mut vals = Vec::new();
                loop {
                    vals.push(self.literal(false)?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Some(Domain::Values(vals))
            } else {
                let lo = self.int()?;
                self.expect(Tok::DotDot)?;
                let hi = self.int()?;
                Some(Domain::Range(lo, hi))
            }
        } else {
            None
        };
        Ok(AttrDecl {
            name,
            ty,
            domain,
            pos,
        })
    }

    fn op_decl(&mut self) -> Result<OpDecl, DslError> {
        let pos = self.expect_kw("op")?;
        let (name, _) = self.ident("operation name")?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                params.push(self.type_ref()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        let result = if self.eat(&Tok::Colon) {
            Some(self.type_ref()?)
        } else {
            None
        };
        Ok(OpDecl {
            name,
            params,
            result,
            pos,
        })
    }

    fn multiplicity(&mut self) -> Result<Multiplicity, DslError> {
        self.expect(Tok::LBracket)?;
        let m = if self.eat(&Tok::Star) {
            Multiplicity::MANY
        } else {
            let lo = self.int()?;
            if lo < 0 {
                return Err(self.error(&["nonnegative bound"]));
            }
            if self.eat(&Tok::DotDot) {
                if self.eat(&Tok::Star) {
                    Multiplicity {
                        lower: lo as u32,
                        upper: None,
                    }
                } else {
                    let hi_pos = self.pos();
                    let hi = self.int()?;
                    if hi < lo {
                        return Err(DslError::syntax(
                            hi_pos,
                            &["upper bound not below lower bound"],
                            &hi.to_string(),
                        ));
                    }
                    Multiplicity {
                        lower: lo as u32,
                        upper: Some(hi as u32),
                    }
                }
            } else {
                Multiplicity::exactly(lo as u32)
            }
        };
        self.expect(Tok::RBracket)?;
        Ok(m)
    }

    fn assoc_end(&mut self) -> Result<AssocEnd, DslError> {
        let (class, pos) = self.qualified("class name")?;
        let mult = if *self.peek() == Tok::LBracket {
            self.multiplicity()?
        } else {
            Multiplicity::MANY
        };
        Ok(AssocEnd { class, mult, pos })
    }

    fn assoc_decl(&mut self) -> Result<AssocDecl, DslError> {
        let pos = self.expect_kw("assoc")?;
        let (name, _) = self.ident("association name")?;
        let left = self.assoc_end()?;
        let kind = match self.peek() {
            Tok::Link => AssocKind::Plain,
            Tok::Shared => AssocKind::Aggregate,
            Tok::Composite => AssocKind::Composition,
            _ => return Err(self.error(&["`--`", "`o--`", "`*--`"])),
        };
        self.bump();
        let right = self.assoc_end()?;
        let mut attributes = Vec::new();
        if self.eat(&Tok::LBrace) {
            loop {
                self.skip_separators();
                if self.eat(&Tok::RBrace) {
                    break;
                }
                attributes.push(self.attr_decl()?);
            }
        }
        Ok(AssocDecl {
            name,
            left,
            right,
            kind,
            attributes,
            pos,
        })
    }

    // -----------------------------------------------------------------------
    // State diagrams
    // -----------------------------------------------------------------------

    fn state_name(&mut self) -> Option<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !STATE_KEYWORDS.contains(&s.as_str()) => {
                let pos = self.bump().pos;
                Some((s, pos))
            }
            _ => None,
        }
    }

    /// Items of one OR-scope. Returns (children, initial).
    fn state_items(
        &mut self,
        top: bool,
        transitions: &mut Vec<TransitionDecl>,
    ) -> Result<(Vec<StateNode>, Option<(String, Pos)>), DslError> {
        let mut children = Vec::new();
        let mut initial: Option<(String, Pos)> = None;
        loop {
            self.skip_separators();
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Eof if top => break,
                Tok::RBrace if !top => break,
                Tok::Ident(kw) if kw == "initial" => {
                    self.bump();
                    if initial.is_some() {
                        return Err(DslError::syntax(
                            pos,
                            &["at most one `initial` per scope"],
                            "second `initial`",
                        ));
                    }
                    let (name, npos) = self.ident("state name")?;
                    initial = Some((name, npos));
                }
                Tok::Ident(kw) if kw == "state" => {
                    self.bump();
                    let name = self.state_name();
                    let (name, anonymous) = match name {
                        Some((n, _)) => (n, false),
                        None => (self.fresh("s"), true),
                    };
                    let kind = if self.eat(&Tok::LBrace) {
                        let (kids, init) = self.state_items(false, transitions)?;
                        self.expect(Tok::RBrace)?;
                        if kids.is_empty() && init.is_none() {
                            StateKind::Simple
                        } else {
                            let initial = self.check_initial(&kids, init)?;
                            StateKind::Or {
                                initial,
                                children: kids,
                            }
                        }
                    } else {
                        StateKind::Simple
                    };
                    children.push(StateNode {
                        name,
                        anonymous,
                        kind,
                        pos,
                    });
                }
                Tok::Ident(kw) if kw == "and" => {
                    self.bump();
                    let (name, anonymous) = match self.state_name() {
                        Some((n, _)) => (n, false),
                        None => (self.fresh("s"), true),
                    };
                    self.expect(Tok::LBrace)?;
                    let mut regions = Vec::new();
                    loop {
                        self.skip_separators();
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        let rpos = self.expect_kw("region").map_err(|_| self.error(&["`region`", "`}`"]))?;
                        let (rname, ranon) = match self.state_name() {
                            Some((n, _)) => (n, false),
                            None => (self.fresh("s"), true),
                        };
                        self.expect(Tok::LBrace)?;
                        let (kids, init) = self.state_items(false, transitions)?;
                        self.expect(Tok::RBrace)?;
                        let initial = self.check_initial(&kids, init)?;
                        regions.push(StateNode {
                            name: rname,
                            anonymous: ranon,
                            kind: StateKind::Or {
                                initial,
                                children: kids,
                            },
                            pos: rpos,
                        });
                    }
                    if regions.is_empty() {
                        return Err(DslError::syntax(pos, &["at least one `region`"], "`}`"));
                    }
                    children.push(StateNode {
                        name,
                        anonymous,
                        kind: StateKind::And { regions },
                        pos,
                    });
                }
                Tok::Ident(kw) if kw == "trans" => {
                    transitions.push(self.transition()?);
                }
                _ => {
                    let mut exp = vec!["`initial`", "`state`", "`and`", "`trans`"];
                    exp.push(if top { "end of input" } else { "`}`" });
                    return Err(self.error(&exp));
                }
            }
        }
        Ok((children, initial))
    }

    fn check_initial(
        &self,
        kids: &[StateNode],
        init: Option<(String, Pos)>,
    ) -> Result<Option<String>, DslError> {
        match init {
            None => Ok(None),
            Some((name, pos)) => {
                if kids.iter().any(|k| k.name == name) {
                    Ok(Some(name))
                } else {
                    Err(DslError::resolve(
                        &name,
                        pos,
                        "initial state is not a direct substate of this scope",
                    ))
                }
            }
        }
    }

    fn pattern(&mut self) -> Result<Pattern, DslError> {
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(Pattern::Wild)
            }
            Tok::Ident(s) if s != "true" && s != "false" => {
                self.bump();
                Ok(Pattern::Bind(s))
            }
            _ => Ok(Pattern::Lit(
                self.literal(false).map_err(|_| self.error(&["pattern"]))?,
            )),
        }
    }

    fn transition(&mut self) -> Result<TransitionDecl, DslError> {
        let pos = self.expect_kw("trans")?;
        let (source, _) = self.ident("source state")?;
        self.expect(Tok::Arrow)?;
        let (target, _) = self.ident("target state")?;
        let event = if self.is_kw("on") {
            self.bump();
            let (selector, epos) = self.ident("event selector")?;
            let mut params = Vec::new();
            if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                loop {
                    params.push(self.pattern()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            Some(EventDecl {
                selector,
                params,
                pos: epos,
            })
        } else {
            None
        };
        let guard = if self.eat(&Tok::LBracket) {
            let g = self.expr()?;
            self.expect(Tok::RBracket)?;
            Some(g)
        } else {
            None
        };
        let mut sends = Vec::new();
        if self.eat(&Tok::Slash) {
            loop {
                sends.push(self.send()?);
                // a comma followed by a send target continues the clause
                if *self.peek() == Tok::Comma && self.send_follows(1) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        Ok(TransitionDecl {
            source,
            target,
            event,
            guard,
            sends,
            pos,
        })
    }

    fn send_follows(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Ident(s) if s == "new" => true,
            Tok::Ident(s) => !STATE_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn send(&mut self) -> Result<SendDecl, DslError> {
        let pos = self.pos();
        let target = if self.is_kw("new") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            let (class, _) = self.qualified("class name")?;
            SendTarget::New(class)
        } else {
            SendTarget::Name(self.link_key()?)
        };
        self.expect(Tok::Bang)?;
        let (selector, _) = self.ident("message selector")?;
        let mut args = Vec::new();
        self.expect(Tok::LParen)?;
        if !self.eat(&Tok::RParen) {
            loop {
                args.push(self.expr()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(Tok::Comma)?;
            }
        }
        Ok(SendDecl {
            target,
            selector,
            args,
            pos,
        })
    }
}

fn qualify(package: Option<&str>, name: &str) -> String {
    match package {
        Some(p) => format!("{p}::{name}"),
        None => name.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Class-name resolution
// ---------------------------------------------------------------------------

struct ClassTable {
    names: BTreeSet<String>,
}

impl ClassTable {
    fn resolve(&self, name: &str, package: Option<&str>, pos: Pos) -> Result<String, DslError> {
        if name.contains("::") {
            return if self.names.contains(name) {
                Ok(name.to_string())
            } else {
                Err(DslError::resolve(name, pos, "no such class"))
            };
        }
        let mut scope = package.map(str::to_string);
        while let Some(p) = scope {
            let candidate = format!("{p}::{name}");
            if self.names.contains(&candidate) {
                return Ok(candidate);
            }
            scope = p.rsplit_once("::").map(|(head, _)| head.to_string());
        }
        if self.names.contains(name) {
            return Ok(name.to_string());
        }
        let suffix = format!("::{name}");
        let matches: Vec<&String> = self.names.iter().filter(|n| n.ends_with(&suffix)).collect();
        match matches.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(DslError::resolve(
                name,
                pos,
                "neither a declared class nor a base type",
            )),
            _ => Err(DslError::resolve(name, pos, "ambiguous class name")),
        }
    }

    fn resolve_type(&self, ty: &mut TypeRef, package: Option<&str>, pos: Pos) -> Result<(), DslError> {
        if let TypeRef::Class(name) = ty {
            *name = self.resolve(name, package, pos)?;
        }
        Ok(())
    }
}

/// Package scope of each association, generalization and constraint, parallel
/// to the corresponding vectors of the model.
#[derive(Default)]
struct Scopes {
    assocs: Vec<Option<String>>,
    gens: Vec<Option<String>>,
    constraints: Vec<Option<String>>,
}

fn resolve_class_model(model: &mut ClassModelAst, scopes: &Scopes) -> Result<(), DslError> {
    let mut names = BTreeSet::new();
    for c in &model.classes {
        if !names.insert(c.name.clone()) {
            return Err(DslError::resolve(&c.name, c.pos, "class declared twice in the same package"));
        }
    }
    let table = ClassTable { names };

    for c in &mut model.classes {
        let pkg = c.package.clone();
        let mut seen = BTreeSet::new();
        for a in &mut c.attributes {
            if !seen.insert(a.name.clone()) {
                return Err(DslError::resolve(&a.name, a.pos, "member declared twice"));
            }
            table.resolve_type(&mut a.ty, pkg.as_deref(), a.pos)?;
        }
        for o in &mut c.operations {
            if !seen.insert(o.name.clone()) {
                return Err(DslError::resolve(&o.name, o.pos, "member declared twice"));
            }
            for p in &mut o.params {
                table.resolve_type(p, pkg.as_deref(), o.pos)?;
            }
            if let Some(r) = &mut o.result {
                table.resolve_type(r, pkg.as_deref(), o.pos)?;
            }
        }
    }
    let mut assoc_names = BTreeSet::new();
    for (a, pkg) in model.associations.iter_mut().zip(&scopes.assocs) {
        if !assoc_names.insert(a.name.clone()) {
            return Err(DslError::resolve(&a.name, a.pos, "association declared twice"));
        }
        a.left.class = table.resolve(&a.left.class, pkg.as_deref(), a.left.pos)?;
        a.right.class = table.resolve(&a.right.class, pkg.as_deref(), a.right.pos)?;
        for attr in &mut a.attributes {
            table.resolve_type(&mut attr.ty, pkg.as_deref(), attr.pos)?;
        }
    }
    for (g, pkg) in model.generalizations.iter_mut().zip(&scopes.gens) {
        g.sub = table.resolve(&g.sub, pkg.as_deref(), g.pos)?;
        g.sup = table.resolve(&g.sup, pkg.as_deref(), g.pos)?;
    }
    for (k, pkg) in model.constraints.iter_mut().zip(&scopes.constraints) {
        k.class = table.resolve(&k.class, pkg.as_deref(), k.pos)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Parses a class model (`.uml`) and resolves every class reference.
pub fn parse_class_model(text: &str) -> Result<ClassModelAst, DslError> {
    let mut p = Parser::new(text)?;
    let mut model = ClassModelAst::default();
    let mut scopes = Scopes::default();
    p.class_items(None, &mut model, &mut scopes)?;
    resolve_class_model(&mut model, &scopes)?;
    Ok(model)
}

/// Parses a state diagram (`.stm`).
pub fn parse_state_diagram(text: &str) -> Result<StateDiagramAst, DslError> {
    let mut p = Parser::new(text)?;
    let mut ast = StateDiagramAst::default();
    if p.eat_kw("statechart") {
        let (owner, _) = p.qualified("owner class")?;
        ast.owner = Some(owner);
        if p.eat_kw("unhandled") {
            ast.unhandled = Some(if p.eat_kw("ignore") {
                UnhandledPolicy::Ignore
            } else if p.eat_kw("chaos") {
                UnhandledPolicy::Chaos
            } else {
                return Err(p.error(&["`ignore`", "`chaos`"]));
            });
        }
    }
    let mut transitions = Vec::new();
    let (states, initial) = p.state_items(true, &mut transitions)?;
    ast.initial = p.check_initial(&states, initial)?;
    ast.states = states;
    ast.transitions = transitions;

    let mut seen = BTreeSet::new();
    for n in ast.walk() {
        if !seen.insert(n.name.as_str()) {
            return Err(DslError::resolve(&n.name, n.pos, "state name declared twice"));
        }
    }
    for t in &ast.transitions {
        for end in [&t.source, &t.target] {
            if !seen.contains(end.as_str()) {
                return Err(DslError::resolve(end, t.pos, "transition endpoint is not a declared state"));
            }
        }
        if let Some(ev) = &t.event {
            let mut binders = BTreeSet::new();
            for p in &ev.params {
                if let Pattern::Bind(b) = p {
                    if !binders.insert(b.as_str()) {
                        return Err(DslError::resolve(b, ev.pos, "binder used twice in one event"));
                    }
                }
            }
        }
    }
    Ok(ast)
}

/// Parses a sequence diagram (`.seq`).
pub fn parse_sequence_diagram(text: &str) -> Result<SequenceDiagramAst, DslError> {
    let mut p = Parser::new(text)?;
    p.skip_separators();
    p.expect_kw("seq")?;
    let (name, _) = p.ident("diagram name")?;
    let mut ast = SequenceDiagramAst {
        name,
        ..Default::default()
    };
    loop {
        p.skip_separators();
        let pos = p.pos();
        if *p.peek() == Tok::Eof {
            break;
        }
        if p.eat_kw("lifeline") {
            let (role, rpos) = p.ident("role name")?;
            p.expect(Tok::Colon)?;
            let (class, _) = p.qualified("class name")?;
            if ast.lifeline(&role).is_some() {
                return Err(DslError::resolve(&role, rpos, "role declared twice"));
            }
            ast.lifelines.push(Lifeline { role, class, pos });
        } else if p.eat_kw("msg") {
            let (from, fpos) = p.ident("sender role")?;
            p.expect(Tok::Arrow)?;
            let (to, tpos) = p.ident("receiver role")?;
            let (selector, _) = p.ident("message selector")?;
            let mut args = Vec::new();
            if p.eat(&Tok::LParen) && !p.eat(&Tok::RParen) {
                loop {
                    if p.eat(&Tok::Underscore) {
                        args.push(ArgPattern::Wild);
                    } else {
                        args.push(ArgPattern::Lit(p.literal(false)?));
                    }
                    if p.eat(&Tok::RParen) {
                        break;
                    }
                    p.expect(Tok::Comma)?;
                }
            }
            for (role, rpos) in [(&from, fpos), (&to, tpos)] {
                if ast.lifeline(role).is_none() {
                    return Err(DslError::resolve(role, rpos, "undeclared lifeline role"));
                }
            }
            ast.interactions.push(Interaction {
                from,
                to,
                selector,
                args,
                pos,
            });
        } else {
            return Err(p.error(&["`lifeline`", "`msg`", "end of input"]));
        }
    }
    if ast.interactions.is_empty() {
        return Err(p.error(&["`msg`"]));
    }
    Ok(ast)
}

/// Parses a snapshot (`.snap`). Attribute and association names are checked
/// separately by [`resolve_snapshot`], which needs the class model.
pub fn parse_snapshot(text: &str) -> Result<SnapshotAst, DslError> {
    let mut p = Parser::new(text)?;
    let mut ast = SnapshotAst::default();
    p.skip_separators();
    if p.eat_kw("snapshot") {
        ast.name = Some(p.ident("snapshot name")?.0);
    }
    let mut anon = 0;
    loop {
        p.skip_separators();
        let pos = p.pos();
        if *p.peek() == Tok::Eof {
            break;
        }
        let explicit = p.eat_kw("obj");
        if explicit || *p.peek() == Tok::Colon {
            let (name, anonymous) = if *p.peek() == Tok::Colon {
                anon += 1;
                (format!("$o{anon}"), true)
            } else {
                (p.ident("object name")?.0, false)
            };
            p.expect(Tok::Colon)?;
            let (class, _) = p.qualified("class name")?;
            let mut bindings = Vec::new();
            if p.eat(&Tok::LBrace) {
                loop {
                    p.skip_separators();
                    if p.eat(&Tok::RBrace) {
                        break;
                    }
                    let (attr, apos) = p.ident("attribute name")?;
                    p.expect(Tok::Assign)?;
                    let value = p.literal(true)?;
                    bindings.push(Binding {
                        attr,
                        value,
                        pos: apos,
                    });
                }
            }
            if ast.object(&name).is_some() {
                return Err(DslError::resolve(&name, pos, "object declared twice"));
            }
            ast.objects.push(ObjectDecl {
                name,
                anonymous,
                class,
                bindings,
                pos,
            });
        } else if p.eat_kw("link") {
            let (assoc, _) = p.ident("association name")?;
            let (from, fpos) = p.ident("object name")?;
            let bidirectional = match p.peek() {
                Tok::Link => true,
                Tok::Arrow => false,
                _ => return Err(p.error(&["`--`", "`->`"])),
            };
            p.bump();
            let (to, tpos) = p.ident("object name")?;
            for (o, opos) in [(&from, fpos), (&to, tpos)] {
                if ast.object(o).is_none() {
                    return Err(DslError::resolve(o, opos, "undeclared object"));
                }
            }
            ast.links.push(LinkDecl {
                assoc,
                from,
                to,
                bidirectional,
                pos,
            });
        } else {
            return Err(p.error(&["`obj`", "`link`", "end of input"]));
        }
    }
    Ok(ast)
}

/// Reflexive-transitive superclasses of `class`, cycle-safe, in BFS order.
pub fn superclasses(model: &ClassModelAst, class: &str) -> Vec<String> {
    let mut out = vec![class.to_string()];
    let mut i = 0;
    while i < out.len() {
        let cur = out[i].clone();
        for g in model.generalizations.iter().filter(|g| g.sub == cur) {
            if !out.contains(&g.sup) {
                out.push(g.sup.clone());
            }
        }
        i += 1;
    }
    out
}

/// Checks a snapshot against a class model: object classes exist, bound
/// attributes are declared (possibly inherited) with matching value kinds,
/// object-valued attributes name snapshot objects, and every link joins
/// objects whose classes the named association connects.
pub fn resolve_snapshot(snap: &mut SnapshotAst, model: &ClassModelAst) -> Result<(), DslError> {
    let table = ClassTable {
        names: model.classes.iter().map(|c| c.name.clone()).collect(),
    };
    for o in &mut snap.objects {
        o.class = table.resolve(&o.class, None, o.pos)?;
    }
    let class_of: BTreeMap<&str, &str> = snap
        .objects
        .iter()
        .map(|o| (o.name.as_str(), o.class.as_str()))
        .collect();
    for o in &snap.objects {
        let supers = superclasses(model, &o.class);
        for b in &o.bindings {
            let decl = supers
                .iter()
                .filter_map(|c| model.class(c))
                .flat_map(|c| c.attributes.iter())
                .find(|a| a.name == b.attr)
                .ok_or_else(|| {
                    DslError::resolve(&b.attr, b.pos, format!("class {} has no such attribute", o.class))
                })?;
            let ok = match (&decl.ty, &b.value) {
                (TypeRef::Int, Literal::Int(_))
                | (TypeRef::Bool, Literal::Bool(_))
                | (TypeRef::Str, Literal::Str(_)) => true,
                (TypeRef::Class(c), Literal::Object(obj)) => match class_of.get(obj.as_str()) {
                    Some(oc) => superclasses(model, oc).contains(c),
                    None => {
                        return Err(DslError::resolve(obj, b.pos, "undeclared object"));
                    }
                },
                _ => false,
            };
            if !ok {
                return Err(DslError::resolve(&b.attr, b.pos, "value does not match the attribute type"));
            }
        }
    }
    for l in &snap.links {
        let assoc = model
            .association(&l.assoc)
            .ok_or_else(|| DslError::resolve(&l.assoc, l.pos, "no such association"))?;
        let from = superclasses(model, class_of[l.from.as_str()]);
        let to = superclasses(model, class_of[l.to.as_str()]);
        let forward = from.contains(&assoc.left.class) && to.contains(&assoc.right.class);
        let backward = from.contains(&assoc.right.class) && to.contains(&assoc.left.class);
        if !forward && !backward {
            return Err(DslError::resolve(
                &l.assoc,
                l.pos,
                format!(
                    "association joins {} and {}, not {} and {}",
                    assoc.left.class,
                    assoc.right.class,
                    class_of[l.from.as_str()],
                    class_of[l.to.as_str()]
                ),
            ));
        }
    }
    Ok(())
}
