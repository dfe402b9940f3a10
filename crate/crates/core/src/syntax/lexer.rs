use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    /// Keywords and punctuation, stored by their source spelling.
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(n) => n.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Sym(s) => (*s).to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const KEYWORDS: &[&str] = &[
    "mod", "or", "not", "POW", "dom", "ran", "card", "size", "TRUE", "FALSE",
];

// Longest spellings first so that maximal munch falls out of a linear scan.
const SYMBOLS: &[&str] = &[
    "<=>", "-->", "+->", "|->", "<->", "==", "=>", "/=", "<=", ">=", "**", "..", "\\/", "/\\",
    "/:", "<:", "+", "-", "*", "/", "=", "<", ">", "&", "!", "#", ".", ":", "(", ")", "{", "}",
    "[", "]", ",",
];

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start_col = col;
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let lexeme = &text[start..i];
            let n = lexeme.parse::<i64>().map_err(|_| ParseError::Syntax {
                line,
                column: start_col,
                found: lexeme.to_string(),
                expected: "an integer literal that fits in 64 bits".into(),
            })?;
            col += i - start;
            tokens.push(Token {
                tok: Tok::Int(n),
                line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            col += i - start;
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Sym(k),
                None => Tok::Ident(word.to_string()),
            };
            tokens.push(Token {
                tok,
                line,
                column: start_col,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                tokens.push(Token {
                    tok: Tok::Sym(sym),
                    line,
                    column: start_col,
                });
            }
            None => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::UnknownOperator {
                    line,
                    column: start_col,
                    found: ch.to_string(),
                });
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        tokenize(text).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn maximal_munch() {
        assert_eq!(
            kinds("a<=>b<=c<:d<->e"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<=>"),
                Tok::Ident("b".into()),
                Tok::Sym("<="),
                Tok::Ident("c".into()),
                Tok::Sym("<:"),
                Tok::Ident("d".into()),
                Tok::Sym("<->"),
                Tok::Ident("e".into()),
                Tok::Eof
            ]
        );
        assert_eq!(kinds("1..8-->{0,1}")[1], Tok::Sym(".."));
        assert_eq!(kinds("1..8-->{0,1}")[3], Tok::Sym("-->"));
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a &\n  b").unwrap();
        assert_eq!((toks[2].line, toks[2].column), (2, 3));
    }

    #[test]
    fn unknown_character_is_reported() {
        let err = tokenize("a $ b").unwrap_err();
        assert!(matches!(err, ParseError::UnknownOperator { column: 3, .. }));
    }
}
