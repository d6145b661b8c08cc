use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase- or underscore-led identifier (labels, variables, keywords).
    Ident(String),
    /// Uppercase-led identifier (module names).
    UIdent(String),
    /// Unsigned decimal literal, kept verbatim for exact parsing.
    Number(String),
    Key(u64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Pipe,
    Dot,
    Assign,
    Bang,
    At,
    Minus,
    Plus,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::UIdent(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Key(k) => write!(f, "key `#{k:016x}`"),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Semi => ";",
                    Tok::Pipe => "|",
                    Tok::Dot => ".",
                    Tok::Assign => "=",
                    Tok::Bang => "!",
                    Tok::At => "@",
                    Tok::Minus => "-",
                    Tok::Plus => "+",
                    Tok::Lt => "<",
                    Tok::Le => "<=",
                    Tok::Gt => ">",
                    Tok::Ge => ">=",
                    Tok::EqEq => "==",
                    Tok::Ne => "!=",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let simple = match c {
            '[' => Some((Tok::LBracket, 1)),
            ']' => Some((Tok::RBracket, 1)),
            '(' => Some((Tok::LParen, 1)),
            ')' => Some((Tok::RParen, 1)),
            '{' => Some((Tok::LBrace, 1)),
            '}' => Some((Tok::RBrace, 1)),
            ',' => Some((Tok::Comma, 1)),
            ';' => Some((Tok::Semi, 1)),
            '|' => Some((Tok::Pipe, 1)),
            '.' => Some((Tok::Dot, 1)),
            '@' => Some((Tok::At, 1)),
            '-' => Some((Tok::Minus, 1)),
            '+' => Some((Tok::Plus, 1)),
            '=' if next == Some('=') => Some((Tok::EqEq, 2)),
            '=' => Some((Tok::Assign, 1)),
            '!' if next == Some('=') => Some((Tok::Ne, 2)),
            '!' => Some((Tok::Bang, 1)),
            '<' if next == Some('=') => Some((Tok::Le, 2)),
            '<' => Some((Tok::Lt, 1)),
            '>' if next == Some('=') => Some((Tok::Ge, 2)),
            '>' => Some((Tok::Gt, 1)),
            _ => None,
        };
        if let Some((tok, n)) = simple {
            out.push(Token { tok, line: tl, col: tc });
            advance(n, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_hexdigit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            let key = u64::from_str_radix(&digits, 16).map_err(|_| LexError {
                message: "malformed key literal".into(),
                line: tl,
                col: tc,
            })?;
            out.push(Token { tok: Tok::Key(key), line: tl, col: tc });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text: String = chars[i..j].iter().collect();
            out.push(Token { tok: Tok::Number(text), line: tl, col: tc });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let tok = if c.is_uppercase() {
                Tok::UIdent(text)
            } else {
                Tok::Ident(text)
            };
            out.push(Token { tok, line: tl, col: tc });
            advance(j - i, &mut i, &mut col);
            continue;
        }
        return Err(LexError {
            message: format!("unexpected character `{c}`"),
            line: tl,
            col: tc,
        });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_invocation() {
        assert_eq!(
            kinds("net.forward[x, 1.5]"),
            vec![
                Tok::Ident("net".into()),
                Tok::Dot,
                Tok::Ident("forward".into()),
                Tok::LBracket,
                Tok::Ident("x".into()),
                Tok::Comma,
                Tok::Number("1.5".into()),
                Tok::RBracket,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn tracks_positions_and_comments() {
        let toks = tokenize("idle // comment\n  MSensor <= #ff").unwrap();
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
        assert_eq!(toks[1].tok, Tok::UIdent("MSensor".into()));
        assert_eq!(toks[2].tok, Tok::Le);
        assert_eq!(toks[3].tok, Tok::Key(0xff));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("idle $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
    }
}
