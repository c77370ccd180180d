use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Slash,
    Equals,
    And,
    Or,
    Not,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Equals => "`=`".into(),
            Tok::And => "`/\\`".into(),
            Tok::Or => "`\\/`".into(),
            Tok::Not => "`~`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits `text` into tokens. `#` starts a comment running to the end of the line.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
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
        let (tok, width) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semi, 1),
            '=' => (Tok::Equals, 1),
            '~' => (Tok::Not, 1),
            '/' if chars.get(i + 1) == Some(&'\\') => (Tok::And, 2),
            '/' => (Tok::Slash, 1),
            '\\' if chars.get(i + 1) == Some(&'/') => (Tok::Or, 2),
            c if c.is_ascii_digit() => {
                let j = (i..chars.len())
                    .find(|&j| !chars[j].is_ascii_digit())
                    .unwrap_or(chars.len());
                let s: String = chars[i..j].iter().collect();
                let n = s
                    .parse::<u64>()
                    .map_err(|_| Error::syntax(line, col, format!("integer `{s}` is too large")))?;
                (Tok::Int(n), j - i)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let j = (i..chars.len())
                    .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                    .unwrap_or(chars.len());
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => {
                return Err(Error::syntax(line, col, format!("unexpected character `{other}`")));
            }
        };
        out.push(Token { tok, line, col });
        i += width;
        col += width;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectives_and_positions() {
        let toks = tokenize("x1 /\\ ~x2\n\\/ f(x3)").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("x1".into()),
                Tok::And,
                Tok::Not,
                Tok::Ident("x2".into()),
                Tok::Or,
                Tok::Ident("f".into()),
                Tok::LParen,
                Tok::Ident("x3".into()),
                Tok::RParen,
                Tok::Eof
            ]
        );
        assert_eq!((toks[4].line, toks[4].col), (2, 1));
        assert_eq!((toks[2].line, toks[2].col), (1, 7));
    }

    #[test]
    fn bad_character() {
        let err = tokenize("x1 & x2").unwrap_err();
        assert!(matches!(err, Error::Syntax { pos, .. } if pos.col == 4));
    }
}
