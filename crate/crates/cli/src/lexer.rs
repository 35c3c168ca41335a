//! Tokeniser for the surface syntax.  One lexer serves all three dialects;
//! comments run from `--` to the end of the line.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    // Keywords.
    Const,
    Eq,
    Check,
    Derivation,
    Type,
    El,
    Valid,
    Kind,
    // Punctuation.
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LAngle,
    RAngle,
    Comma,
    Colon,
    Dot,
    Equals,
    Turnstile,
    Lambda,
    At,
    // Identifiers: letters, digits, underscores and primes.
    Name(String),
    Number(usize),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Const => write!(f, "const"),
            Token::Eq => write!(f, "eq"),
            Token::Check => write!(f, "check"),
            Token::Derivation => write!(f, "derivation"),
            Token::Type => write!(f, "Type"),
            Token::El => write!(f, "El"),
            Token::Valid => write!(f, "valid"),
            Token::Kind => write!(f, "kind"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::LBracket => write!(f, "["),
            Token::RBracket => write!(f, "]"),
            Token::LBrace => write!(f, "{{"),
            Token::RBrace => write!(f, "}}"),
            Token::LAngle => write!(f, "<"),
            Token::RAngle => write!(f, ">"),
            Token::Comma => write!(f, ","),
            Token::Colon => write!(f, ":"),
            Token::Dot => write!(f, "."),
            Token::Equals => write!(f, "="),
            Token::Turnstile => write!(f, "|-"),
            Token::Lambda => write!(f, "\\"),
            Token::At => write!(f, "@"),
            Token::Name(n) => write!(f, "{n}"),
            Token::Number(n) => write!(f, "{n}"),
        }
    }
}

/// A token with its source position (1-based line and column).
#[derive(Clone, Debug)]
pub struct Spanned {
    pub token: Token,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

pub fn lex(text: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start_line = line;
        let start_column = column;
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '-' {
            // Comment `--` or an error: names never start with a dash.
            bump(&mut chars);
            if chars.peek() == Some(&'-') {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            return Err(LexError {
                line: start_line,
                column: start_column,
                message: "stray `-` (comments are `--`)".into(),
            });
        }
        if c == '|' {
            bump(&mut chars);
            if chars.peek() == Some(&'-') {
                bump(&mut chars);
                out.push(Spanned { token: Token::Turnstile, line: start_line, column: start_column });
                continue;
            }
            return Err(LexError {
                line: start_line,
                column: start_column,
                message: "stray `|` (expected `|-`)".into(),
            });
        }
        let simple = match c {
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '[' => Some(Token::LBracket),
            ']' => Some(Token::RBracket),
            '{' => Some(Token::LBrace),
            '}' => Some(Token::RBrace),
            '<' => Some(Token::LAngle),
            '>' => Some(Token::RAngle),
            ',' => Some(Token::Comma),
            ':' => Some(Token::Colon),
            '.' => Some(Token::Dot),
            '=' => Some(Token::Equals),
            '\\' => Some(Token::Lambda),
            '@' => Some(Token::At),
            _ => None,
        };
        if let Some(token) = simple {
            bump(&mut chars);
            out.push(Spanned { token, line: start_line, column: start_column });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n = String::new();
            while let Some(&c2) = chars.peek() {
                if c2.is_ascii_digit() {
                    n.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            // A number followed by identifier characters is a name.
            if chars
                .peek()
                .is_some_and(|c2| c2.is_alphanumeric() || *c2 == '_' || *c2 == '\'')
            {
                let mut name = n;
                while let Some(&c2) = chars.peek() {
                    if c2.is_alphanumeric() || c2 == '_' || c2 == '\'' {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { token: Token::Name(name), line: start_line, column: start_column });
            } else {
                let value = n.parse().map_err(|_| LexError {
                    line: start_line,
                    column: start_column,
                    message: "number out of range".into(),
                })?;
                out.push(Spanned { token: Token::Number(value), line: start_line, column: start_column });
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut name = String::new();
            while let Some(&c2) = chars.peek() {
                if c2.is_alphanumeric() || c2 == '_' || c2 == '\'' {
                    name.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            let token = match name.as_str() {
                "const" => Token::Const,
                "eq" => Token::Eq,
                "check" => Token::Check,
                "derivation" => Token::Derivation,
                "Type" => Token::Type,
                "El" => Token::El,
                "valid" => Token::Valid,
                "kind" => Token::Kind,
                _ => Token::Name(name),
            };
            out.push(Spanned { token, line: start_line, column: start_column });
            continue;
        }
        return Err(LexError {
            line: start_line,
            column: start_column,
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_a_declaration() {
        let toks = lex("const Pi : (A : Type) Type. -- comment\n").unwrap();
        assert_eq!(toks.first().map(|t| t.token.clone()), Some(Token::Const));
        assert!(toks.iter().any(|t| t.token == Token::Dot));
        // The comment is skipped.
        assert!(!toks.iter().any(|t| matches!(&t.token, Token::Name(n) if n == "comment")));
    }

    #[test]
    fn primes_are_name_characters() {
        let toks = lex("x' x''").unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].token, Token::Name("x'".into()));
        assert_eq!(toks[1].token, Token::Name("x''".into()));
    }

    #[test]
    fn turnstile_and_stray_pipe() {
        assert!(lex("A : Type |- x : El A").is_ok());
        assert!(lex("A | B").is_err());
    }
}
