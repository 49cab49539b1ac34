use super::ast::Pos;
use super::error::DslError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    ColonColon,
    Semi,
    Comma,
    Dot,
    DotDot,
    Arrow,
    /// `--`
    Link,
    /// `o--`
    Shared,
    /// `*--`
    Composite,
    Bang,
    Slash,
    Star,
    Hash,
    Underscore,
    Plus,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    Assign,
    EqEq,
    Ne,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Arrow => "->",
            Tok::Link => "--",
            Tok::Shared => "o--",
            Tok::Composite => "*--",
            Tok::Bang => "!",
            Tok::Slash => "/",
            Tok::Star => "*",
            Tok::Hash => "#",
            Tok::Underscore => "_",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::Str(_) => "string",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let peek = |k: usize| chars.get(i + k).copied();

        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && peek(1) == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(DslError::syntax(pos, &["closing `\"`"], "end of line"));
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        match chars.get(i) {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            _ => {
                                return Err(DslError::syntax(
                                    Pos { line, col },
                                    &["escape sequence"],
                                    "invalid escape",
                                ))
                            }
                        }
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(d) = chars.get(i).filter(|d| d.is_ascii_digit()) {
                s.push(*d);
                bump!();
            }
            let n = s
                .parse::<i64>()
                .map_err(|_| DslError::syntax(pos, &["integer literal"], "out-of-range number"))?;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let mut s = String::new();
            while let Some(d) = chars
                .get(i)
                .filter(|d| d.is_alphanumeric() || **d == '_' || **d == '$')
            {
                s.push(*d);
                bump!();
            }
            if s == "o" && chars.get(i) == Some(&'-') && chars.get(i + 1) == Some(&'-') {
                bump!();
                bump!();
                out.push(Token { tok: Tok::Shared, pos });
            } else if s == "_" {
                out.push(Token { tok: Tok::Underscore, pos });
            } else {
                out.push(Token { tok: Tok::Ident(s), pos });
            }
            continue;
        }

        let two = (c, peek(1));
        let (tok, len) = match two {
            ('*', Some('-')) if peek(2) == Some('-') => (Tok::Composite, 3),
            (':', Some(':')) => (Tok::ColonColon, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('-', Some('-')) => (Tok::Link, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('!', _) => (Tok::Bang, 1),
            ('/', _) => (Tok::Slash, 1),
            ('*', _) => (Tok::Star, 1),
            ('#', _) => (Tok::Hash, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Assign, 1),
            _ => {
                return Err(DslError::syntax(
                    pos,
                    &["token"],
                    &format!("unexpected character {c:?}"),
                ))
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
