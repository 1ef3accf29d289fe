use serde::Serialize;

use crate::error::{ParseError, Position};
use crate::symbols::command_kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Text,
    MathDelim,
    Command,
    BraceOpen,
    BraceClose,
    Superscript,
    Subscript,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: Position,
}

impl Token {
    /// Command name without the leading backslash.
    pub fn command_name(&self) -> Option<&str> {
        match self.kind {
            TokenKind::Command => self.lexeme.strip_prefix('\\'),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        self.kind == TokenKind::Text && self.lexeme.chars().all(char::is_whitespace)
    }

    /// How the token reads in an error message.
    pub(crate) fn describe(&self) -> String {
        match self.kind {
            TokenKind::Text if self.is_blank() => "whitespace".into(),
            _ => format!("{:?}", self.lexeme),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum MathClass {
    Letter,
    Number,
    Space,
}

fn math_class(c: char) -> Option<MathClass> {
    if c.is_alphabetic() {
        Some(MathClass::Letter)
    } else if c.is_ascii_digit() || c == '.' {
        Some(MathClass::Number)
    } else if c == ' ' || c == '\t' || c == '\n' || c == '\r' {
        Some(MathClass::Space)
    } else {
        None
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Position,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }
}

/// Splits `source` into tokens. The stream is lossless: concatenating
/// every lexeme reproduces `source`.
///
/// `$` toggles math mode. Outside math, text runs stop only at `$`, `\`,
/// `{` and `}`. Inside math, letters, numbers and whitespace form separate
/// runs, `^`/`_` are script markers and any other character is a symbol.
/// Commands must name a known command.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: source.chars().peekable(), pos: Position::START };
    let mut tokens = Vec::new();
    let mut in_math = false;

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        check_char(&mut cur, c)?;
        let single = |kind, c: char| Token { kind, lexeme: c.to_string(), position: start };
        match c {
            '$' => {
                cur.bump();
                in_math = !in_math;
                tokens.push(single(TokenKind::MathDelim, c));
            }
            '{' => {
                cur.bump();
                tokens.push(single(TokenKind::BraceOpen, c));
            }
            '}' => {
                cur.bump();
                tokens.push(single(TokenKind::BraceClose, c));
            }
            '\\' => {
                cur.bump();
                let mut name = String::new();
                while let Some(n) = cur.peek().filter(char::is_ascii_alphabetic) {
                    name.push(n);
                    cur.bump();
                }
                if name.is_empty() {
                    let found = match cur.peek() {
                        Some(n) => format!("\"\\{n}\""),
                        None => "end of input".into(),
                    };
                    return Err(ParseError::new(start, "command name", found));
                }
                if command_kind(&name).is_none() {
                    return Err(ParseError::new(start, "known command", format!("\"\\{name}\"")));
                }
                tokens.push(Token { kind: TokenKind::Command, lexeme: format!("\\{name}"), position: start });
            }
            '^' | '_' if in_math => {
                cur.bump();
                let kind = if c == '^' { TokenKind::Superscript } else { TokenKind::Subscript };
                tokens.push(single(kind, c));
            }
            _ if in_math => match math_class(c) {
                Some(class) => {
                    let mut lexeme = String::new();
                    while let Some(n) = cur.peek() {
                        if math_class(n) != Some(class) {
                            break;
                        }
                        check_char(&mut cur, n)?;
                        lexeme.push(n);
                        cur.bump();
                    }
                    tokens.push(Token { kind: TokenKind::Text, lexeme, position: start });
                }
                None => {
                    cur.bump();
                    tokens.push(single(TokenKind::Symbol, c));
                }
            },
            _ => {
                let mut lexeme = String::new();
                while let Some(n) = cur.peek() {
                    if matches!(n, '$' | '\\' | '{' | '}') {
                        break;
                    }
                    check_char(&mut cur, n)?;
                    lexeme.push(n);
                    cur.bump();
                }
                tokens.push(Token { kind: TokenKind::Text, lexeme, position: start });
            }
        }
    }
    Ok(tokens)
}

/// Rejects control characters other than newline and tab. A carriage
/// return is accepted only as part of CRLF.
fn check_char(cur: &mut Cursor<'_>, c: char) -> Result<(), ParseError> {
    if !c.is_control() || c == '\n' || c == '\t' {
        return Ok(());
    }
    if c == '\r' {
        let mut ahead = cur.chars.clone();
        ahead.next();
        if ahead.peek() == Some(&'\n') {
            return Ok(());
        }
    }
    Err(ParseError::new(cur.pos, "printable character", format!("U+{:04X}", c as u32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
    }

    #[test]
    fn empty_source_has_no_tokens() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn hand_traced_inline_math() {
        use TokenKind::*;
        assert_eq!(
            kinds("a$x^2$"),
            vec![
                (Text, "a".into()),
                (MathDelim, "$".into()),
                (Text, "x".into()),
                (Superscript, "^".into()),
                (Text, "2".into()),
                (MathDelim, "$".into()),
            ]
        );
    }

    #[test]
    fn unknown_command_fails_at_backslash() {
        let err = tokenize("\\q@").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 1 });
        assert_eq!(err.found, "\"\\q\"");
    }

    #[test]
    fn backslash_needs_letters() {
        let err = tokenize("ab\\@").unwrap_err();
        assert_eq!(err.position, Position { line: 1, column: 3 });
        assert_eq!(err.expected, "command name");
        let err = tokenize("x\\").unwrap_err();
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn control_characters_rejected() {
        let err = tokenize("ok\nno\u{7}").unwrap_err();
        assert_eq!(err.position, Position { line: 2, column: 3 });
        assert!(tokenize("a\tb\r\nc").is_ok());
        assert!(tokenize("a\rb").is_err());
    }

    #[test]
    fn scripts_are_text_outside_math() {
        assert_eq!(kinds("snake_case^x"), vec![(TokenKind::Text, "snake_case^x".into())]);
    }

    #[test]
    fn math_splits_letters_numbers_and_symbols() {
        use TokenKind::*;
        assert_eq!(
            kinds("$2.5x+y$"),
            vec![
                (MathDelim, "$".into()),
                (Text, "2.5".into()),
                (Text, "x".into()),
                (Symbol, "+".into()),
                (Text, "y".into()),
                (MathDelim, "$".into()),
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n$\\mu$").unwrap();
        assert_eq!(toks[1].position, Position { line: 2, column: 1 });
        assert_eq!(toks[2].position, Position { line: 2, column: 2 });
        assert_eq!(toks[2].command_name(), Some("mu"));
    }
}
